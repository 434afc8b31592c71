//! Frequency-domain error diffusion: coefficients, Hermite–Galerkin
//! matrices and backward-Euler time stepping.
//!
//! The real part `η̂⁺` of the error transform obeys
//! `∂ₜη̂⁺ = ∂ξ(A⁻ ∂ξ η̂⁺) − B⁺ η̂⁺` and the imaginary part the same equation
//! with the signs swapped. With the trial/test basis `Ĥ_k(λξ)` each step
//! solves `(D − Δt(K∓ + M±)) U±_m = D U±_{m−1}`.

use std::f64::consts::PI;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::exec::Exec;
use crate::hermite::{hermite_functions_into, weighted_inner_products, HermiteBasis};
use crate::quadrature::{gauss_hermite_rule, gauss_legendre_rule};
use crate::xform::FrequencyProfile;

/// Scale layout of a multi-scale network: factors `α_0 … α_s` and input dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleSpec {
    alphas: Vec<f64>,
    dim: usize,
}

impl ScaleSpec {
    pub fn new(alphas: Vec<f64>, dim: usize) -> Result<Self> {
        if alphas.is_empty() {
            return Err(invalid("at least one scale is required"));
        }
        if dim == 0 {
            return Err(invalid("input dimension must be positive"));
        }
        if let Some(a) = alphas.iter().find(|a| !(a.is_finite() && **a >= 1.0)) {
            return Err(invalid(format!("scale factors must be >= 1, got {a}")));
        }
        Ok(Self { alphas, dim })
    }

    /// `α_j = 2^j` for `j = 0..=s`.
    pub fn pow2(num_scales: usize, dim: usize) -> Result<Self> {
        Self::new((0..=num_scales).map(|j| 2f64.powi(j as i32)).collect(), dim)
    }

    /// The index `s` of the last scale; `s + 1` scales in total.
    pub fn num_scales(&self) -> usize {
        self.alphas.len() - 1
    }

    pub fn scale_count(&self) -> usize {
        self.alphas.len()
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    pub fn dim(&self) -> usize {
        self.dim
    }
}

/// Which of the `1 ± e^{-2}` coefficient families.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    pub fn factor(self) -> f64 {
        let e2 = (-2.0f64).exp();
        match self {
            Branch::Plus => 1.0 + e2,
            Branch::Minus => 1.0 - e2,
        }
    }
}

/// Fourier transform of `exp(-α²|x|²/2)` in `d` dimensions.
pub fn gaussian_hat(xi: &[f64], alpha: f64, d: usize) -> f64 {
    let r2: f64 = xi.iter().map(|v| v * v).sum();
    let df = d as f64;
    (2.0 * PI).powf(df / 2.0) * alpha.powf(-df) * (-2.0 * PI * PI * r2 / (alpha * alpha)).exp()
}

/// Diffusion coefficient `A_s^±(ξ)`.
pub fn coeff_a(xi: &[f64], branch: Branch, spec: &ScaleSpec) -> f64 {
    let d = xi.len();
    let sum: f64 = spec
        .alphas
        .iter()
        .map(|&a| a.powi(2 * (d as i32 + 1)) * gaussian_hat(xi, a, d))
        .sum();
    branch.factor() / (8.0 * PI * PI * spec.scale_count() as f64) * sum
}

/// Reaction coefficient `B_s^±(ξ)`.
pub fn coeff_b(xi: &[f64], branch: Branch, spec: &ScaleSpec) -> f64 {
    let d = xi.len();
    let sum: f64 = spec
        .alphas
        .iter()
        .map(|&a| a.powi(2 * d as i32) * gaussian_hat(xi, a, d))
        .sum();
    branch.factor() / (2.0 * spec.scale_count() as f64) * sum
}

/// Assembled Galerkin matrices of the diffusion model. `D = I/λ` is implicit.
#[derive(Debug, Clone)]
pub struct SpectralOperator {
    basis: HermiteBasis,
    spec: ScaleSpec,
    pub k_plus: DMatrix<f64>,
    pub k_minus: DMatrix<f64>,
    pub m_plus: DMatrix<f64>,
    pub m_minus: DMatrix<f64>,
}

impl SpectralOperator {
    /// Assembles `K±` and `M±` through the weighted inner products `I_{nk}(2π²/(α_j²λ²))`.
    pub fn assemble(basis: HermiteBasis, spec: &ScaleSpec, exec: Exec) -> Result<Self> {
        if spec.dim != 1 {
            return Err(invalid(format!(
                "diffusion assembly is one-dimensional, got d = {}",
                spec.dim
            )));
        }
        let p = basis.order();
        let lambda = basis.lambda();
        let s1 = spec.scale_count() as f64;

        let per_scale: Vec<Result<DMatrix<f64>>> = exec.map(spec.scale_count(), |j| {
            let a = spec.alphas[j];
            weighted_inner_products(2.0 * PI * PI / (a * a * lambda * lambda), p + 1)
        });
        let mut c_base = DMatrix::zeros(p + 2, p + 2);
        let mut m_base = DMatrix::zeros(p + 1, p + 1);
        for (j, ip) in per_scale.into_iter().enumerate() {
            let ip = ip?;
            let a = spec.alphas[j];
            c_base += &ip * (a * a * a);
            m_base += ip.view((0, 0), (p + 1, p + 1)) * a;
        }

        let c_scale = -lambda / (2.0 * (2.0 * PI).powf(1.5) * s1);
        let m_scale = -(PI / 2.0).sqrt() / (s1 * lambda);
        let k_base = stiffness_from_c(&c_base, p);

        Ok(Self {
            basis,
            spec: spec.clone(),
            k_plus: &k_base * (c_scale * Branch::Plus.factor()),
            k_minus: &k_base * (c_scale * Branch::Minus.factor()),
            m_plus: &m_base * (m_scale * Branch::Plus.factor()),
            m_minus: &m_base * (m_scale * Branch::Minus.factor()),
        })
    }

    pub fn basis(&self) -> &HermiteBasis {
        &self.basis
    }

    pub fn spec(&self) -> &ScaleSpec {
        &self.spec
    }

    /// Diagonal entry of the mass matrix `D`.
    pub fn mass(&self) -> f64 {
        1.0 / self.basis.lambda()
    }

    /// `D − Δt(K⁻ + M⁺)` (real part) and `D − Δt(K⁺ + M⁻)` (imaginary part).
    pub fn system_matrices(&self, dt: f64) -> (DMatrix<f64>, DMatrix<f64>) {
        let n = self.basis.len();
        let d = DMatrix::<f64>::identity(n, n) * self.mass();
        let real = &d - (&self.k_minus + &self.m_plus) * dt;
        let imag = &d - (&self.k_plus + &self.m_minus) * dt;
        (real, imag)
    }

    /// Factorises both stepping systems once for repeated use.
    pub fn stepper(&self, dt: f64) -> Result<Stepper> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(invalid(format!("time step must be positive, got {dt}")));
        }
        let (real, imag) = self.system_matrices(dt);
        let real = Cholesky::new(real)
            .ok_or_else(|| Error::Numerical("real-part system is not SPD".into()))?;
        let imag = Cholesky::new(imag)
            .ok_or_else(|| Error::Numerical("imaginary-part system is not SPD".into()))?;
        Ok(Stepper {
            dt,
            mass: self.mass(),
            real,
            imag,
        })
    }
}

/// `K_{nk} = ½[√(nk)C_{n−1,k−1} − √((n+1)k)C_{n+1,k−1} − √(n(k+1))C_{n−1,k+1} + √((n+1)(k+1))C_{n+1,k+1}]`,
/// which covers the `n = 0` / `k = 0` rows since their `√0` terms drop out.
fn stiffness_from_c(c: &DMatrix<f64>, p: usize) -> DMatrix<f64> {
    let mut k = DMatrix::zeros(p + 1, p + 1);
    for n in 0..=p {
        let sn = (n as f64).sqrt();
        let sn1 = (n as f64 + 1.0).sqrt();
        for m in n..=p {
            if (n + m) % 2 == 1 {
                continue;
            }
            let sm = (m as f64).sqrt();
            let sm1 = (m as f64 + 1.0).sqrt();
            let mut v = sn1 * sm1 * c[(n + 1, m + 1)];
            if n > 0 {
                v -= sn * sm1 * c[(n - 1, m + 1)];
            }
            if m > 0 {
                v -= sn1 * sm * c[(n + 1, m - 1)];
            }
            if n > 0 && m > 0 {
                v += sn * sm * c[(n - 1, m - 1)];
            }
            k[(n, m)] = 0.5 * v;
            k[(m, n)] = 0.5 * v;
        }
    }
    k
}

/// Hermite coefficients of the real (`u_plus`) and imaginary (`u_minus`) error parts.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralState {
    pub u_plus: DVector<f64>,
    pub u_minus: DVector<f64>,
    pub time: f64,
    pub lambda: f64,
}

impl SpectralState {
    pub fn zeros(basis: &HermiteBasis) -> Self {
        Self {
            u_plus: DVector::zeros(basis.len()),
            u_minus: DVector::zeros(basis.len()),
            time: 0.0,
            lambda: basis.lambda(),
        }
    }
}

/// `∫|η̃|²dξ = (|U⁺|² + |U⁻|²)/λ` by orthogonality of the scaled basis.
pub fn energy(state: &SpectralState) -> f64 {
    (state.u_plus.norm_squared() + state.u_minus.norm_squared()) / state.lambda
}

/// Pre-factorised backward-Euler step for a fixed `(operator, Δt)`.
pub struct Stepper {
    dt: f64,
    mass: f64,
    real: Cholesky<f64, Dyn>,
    imag: Cholesky<f64, Dyn>,
}

impl Stepper {
    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn step(&self, state: &SpectralState) -> SpectralState {
        SpectralState {
            u_plus: self.real.solve(&(&state.u_plus * self.mass)),
            u_minus: self.imag.solve(&(&state.u_minus * self.mass)),
            time: state.time + self.dt,
            lambda: state.lambda,
        }
    }
}

/// One backward-Euler step, factorising on the spot.
pub fn step_backward_euler(op: &SpectralOperator, state: &SpectralState, dt: f64) -> Result<SpectralState> {
    Ok(op.stepper(dt)?.step(state))
}

/// A complex-valued function of frequency to be projected onto the basis.
pub trait Spectrum: Sync {
    fn eval(&self, xi: f64) -> Complex64;

    /// Closed interval outside which the function vanishes, if any.
    fn support(&self) -> Option<(f64, f64)> {
        None
    }
}

/// `value` on `|ξ| ≤ half_width`, zero elsewhere.
#[derive(Debug, Clone, Copy)]
pub struct Indicator {
    pub half_width: f64,
    pub value: Complex64,
}

impl Spectrum for Indicator {
    fn eval(&self, xi: f64) -> Complex64 {
        if xi.abs() <= self.half_width {
            self.value
        } else {
            Complex64::new(0.0, 0.0)
        }
    }

    fn support(&self) -> Option<(f64, f64)> {
        Some((-self.half_width, self.half_width))
    }
}

/// Adapts a closure to [`Spectrum`] (no compact support).
pub struct FnSpectrum<F>(pub F);

impl<F: Fn(f64) -> Complex64 + Sync> Spectrum for FnSpectrum<F> {
    fn eval(&self, xi: f64) -> Complex64 {
        (self.0)(xi)
    }
}

/// Output of [`project_initial`].
#[derive(Debug, Clone)]
pub struct Projection {
    pub state: SpectralState,
    /// Norm of the top 10% of coefficients relative to the full coefficient norm.
    pub tail_fraction: f64,
    pub resolution_warning: bool,
}

const TAIL_WARNING: f64 = 0.1;

/// L² projection `U±_k = λ⟨Re/Im f, Ĥ_k(λ·)⟩`.
///
/// Compactly supported inputs are integrated with composite Gauss–Legendre
/// panels over their support, everything else with a `4(p+1)`-node
/// Gauss–Hermite rule in the scaled variable.
pub fn project_initial(basis: &HermiteBasis, f: &dyn Spectrum, exec: Exec) -> Result<Projection> {
    let n = basis.len();
    let lambda = basis.lambda();
    let (nodes, weights): (Vec<f64>, Vec<f64>) = match f.support() {
        Some((a, b)) => {
            let gl = gauss_legendre_rule(24)?;
            let wavelength = 2.0 * PI / (lambda * ((2 * n + 1) as f64).sqrt());
            let panels = ((b - a) / (0.5 * wavelength)).ceil().max(1.0) as usize;
            let h = (b - a) / panels as f64;
            let mut xs = Vec::with_capacity(panels * gl.count());
            let mut ws = Vec::with_capacity(panels * gl.count());
            for p in 0..panels {
                let lo = a + h * p as f64;
                for (&x, &w) in gl.nodes.iter().zip(&gl.weights) {
                    xs.push(lo + 0.5 * h * (x + 1.0));
                    // λ · ∫ f Ĥ_k(λξ) dξ
                    ws.push(lambda * 0.5 * h * w);
                }
            }
            (xs, ws)
        }
        None => {
            let gh = gauss_hermite_rule(4 * n)?;
            // ξ = x/λ, dξ = dx/λ, cancelling the leading λ.
            (gh.nodes.iter().map(|x| x / lambda).collect(), gh.scaled_weights)
        }
    };

    let values: Vec<Complex64> = exec.map(nodes.len(), |i| f.eval(nodes[i]));
    let mut u_plus = DVector::<f64>::zeros(n);
    let mut u_minus = DVector::<f64>::zeros(n);
    let mut h = vec![0.0; n];
    for ((&xi, &w), v) in nodes.iter().zip(&weights).zip(&values) {
        if v.re == 0.0 && v.im == 0.0 {
            continue;
        }
        hermite_functions_into(lambda * xi, &mut h);
        for k in 0..n {
            u_plus[k] += w * v.re * h[k];
            u_minus[k] += w * v.im * h[k];
        }
    }
    let total = u_plus.norm_squared() + u_minus.norm_squared();
    let tail_len = (n / 10).max(1);
    let tail: f64 = (n - tail_len..n)
        .map(|k| u_plus[k] * u_plus[k] + u_minus[k] * u_minus[k])
        .sum();
    let tail_fraction = if total > 0.0 { (tail / total).sqrt() } else { 0.0 };
    Ok(Projection {
        state: SpectralState {
            u_plus,
            u_minus,
            time: 0.0,
            lambda,
        },
        tail_fraction,
        resolution_warning: tail_fraction > TAIL_WARNING,
    })
}

/// Pointwise synthesis of both parts on `xi_grid`.
pub fn evaluate_spectral(
    state: &SpectralState,
    basis: &HermiteBasis,
    xi_grid: &[f64],
    exec: Exec,
) -> FrequencyProfile {
    let n = basis.len();
    let lambda = basis.lambda();
    let vals: Vec<(f64, f64)> = exec.map(xi_grid.len(), |i| {
        let mut h = vec![0.0; n];
        hermite_functions_into(lambda * xi_grid[i], &mut h);
        let re = h.iter().zip(state.u_plus.iter()).map(|(a, b)| a * b).sum();
        let im = h.iter().zip(state.u_minus.iter()).map(|(a, b)| a * b).sum();
        (re, im)
    });
    FrequencyProfile {
        xi: xi_grid.to_vec(),
        real: vals.iter().map(|v| v.0).collect(),
        imag: vals.iter().map(|v| v.1).collect(),
    }
}

/// `∫_{lo ≤ |ξ| ≤ hi} |η̃|² dξ`; `hi = ∞` is allowed.
pub fn band_energy(state: &SpectralState, basis: &HermiteBasis, lo: f64, hi: f64) -> Result<f64> {
    if !(lo >= 0.0 && hi > lo) {
        return Err(invalid(format!("invalid band [{lo}, {hi}]")));
    }
    if hi.is_infinite() {
        let inner = if lo > 0.0 { band_energy(state, basis, 0.0, lo)? } else { 0.0 };
        return Ok((energy(state) - inner).max(0.0));
    }
    let gl = gauss_legendre_rule(24)?;
    let n = basis.len();
    let lambda = basis.lambda();
    let wavelength = 2.0 * PI / (lambda * ((2 * n + 1) as f64).sqrt());
    let panels = ((hi - lo) / (0.5 * wavelength)).ceil().max(1.0) as usize;
    let mut h = vec![0.0; n];
    let mut density = |xi: f64| {
        hermite_functions_into(lambda * xi, &mut h);
        let re: f64 = h.iter().zip(state.u_plus.iter()).map(|(a, b)| a * b).sum();
        let im: f64 = h.iter().zip(state.u_minus.iter()).map(|(a, b)| a * b).sum();
        re * re + im * im
    };
    let step = (hi - lo) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let a = lo + step * p as f64;
        for (&x, &w) in gl.nodes.iter().zip(&gl.weights) {
            let xi = a + 0.5 * step * (x + 1.0);
            total += 0.5 * step * w * (density(xi) + density(-xi));
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gaussian_hat_values() {
        assert_relative_eq!(gaussian_hat(&[0.0], 1.0, 1), (2.0 * PI).sqrt(), epsilon = 1e-14);
        assert_relative_eq!(gaussian_hat(&[0.0], 2.0, 1), (2.0 * PI).sqrt() / 2.0, epsilon = 1e-14);
        assert!(gaussian_hat(&[0.3], 1.0, 1) > gaussian_hat(&[0.4], 1.0, 1));
    }

    #[test]
    fn coefficient_values_at_origin() {
        let spec = ScaleSpec::pow2(0, 1).unwrap();
        let e2 = (-2.0f64).exp();
        assert_relative_eq!(
            coeff_a(&[0.0], Branch::Plus, &spec),
            (1.0 + e2) * (2.0 * PI).sqrt() / (8.0 * PI * PI),
            epsilon = 1e-15
        );
        assert_relative_eq!(coeff_a(&[0.0], Branch::Plus, &spec), 0.036043, epsilon = 1e-6);
        assert_relative_eq!(coeff_b(&[0.0], Branch::Plus, &spec), 1.422932, epsilon = 1e-6);
        for xi in [-3.0, 0.0, 0.7, 4.0] {
            assert!(coeff_a(&[xi], Branch::Plus, &spec) > coeff_a(&[xi], Branch::Minus, &spec));
        }
    }

    #[test]
    fn scale_spec_validation() {
        assert!(ScaleSpec::new(vec![], 1).is_err());
        assert!(ScaleSpec::new(vec![0.5], 1).is_err());
        assert!(ScaleSpec::new(vec![1.0], 0).is_err());
        let s = ScaleSpec::pow2(3, 1).unwrap();
        assert_eq!(s.alphas(), &[1.0, 2.0, 4.0, 8.0]);
        assert_eq!(s.num_scales(), 3);
    }

    #[test]
    fn assembly_requires_one_dimension() {
        let basis = HermiteBasis::new(4, 1.0).unwrap();
        let spec = ScaleSpec::pow2(1, 2).unwrap();
        assert!(SpectralOperator::assemble(basis, &spec, Exec::Sequential).is_err());
    }

    #[test]
    fn parity_zeros_and_symmetry() {
        let basis = HermiteBasis::new(12, 0.8).unwrap();
        let op = SpectralOperator::assemble(basis, &ScaleSpec::pow2(2, 1).unwrap(), Exec::Sequential).unwrap();
        for m in [&op.k_plus, &op.k_minus, &op.m_plus, &op.m_minus] {
            for n in 0..13 {
                for k in 0..13 {
                    if (n + k) % 2 == 1 {
                        assert_eq!(m[(n, k)], 0.0);
                    }
                    assert_relative_eq!(m[(n, k)], m[(k, n)], epsilon = 1e-14, max_relative = 1e-12);
                }
            }
        }
    }

    #[test]
    fn zero_and_unit_states() {
        let basis = HermiteBasis::new(6, 1.3).unwrap();
        let op = SpectralOperator::assemble(basis, &ScaleSpec::pow2(1, 1).unwrap(), Exec::Sequential).unwrap();
        let zero = SpectralState::zeros(&basis);
        assert_eq!(energy(&zero), 0.0);
        let next = step_backward_euler(&op, &zero, 1e-3).unwrap();
        assert_eq!(energy(&next), 0.0);
        assert_relative_eq!(next.time, 1e-3);

        let mut e0 = SpectralState::zeros(&basis);
        e0.u_plus[0] = 1.0;
        assert_relative_eq!(energy(&e0), 1.0 / 1.3);
        assert!(op.m_plus[(0, 0)] < 0.0);
        let next = step_backward_euler(&op, &e0, 1e-3).unwrap();
        assert!(energy(&next) < energy(&e0));
        assert!(op.stepper(0.0).is_err());
    }

    #[test]
    fn projection_of_basis_function() {
        let basis = HermiteBasis::new(10, 0.9).unwrap();
        let f = FnSpectrum(|xi: f64| Complex64::new(basis.eval(xi)[0], 0.0));
        let proj = project_initial(&basis, &f, Exec::Sequential).unwrap();
        assert_relative_eq!(proj.state.u_plus[0], 1.0, epsilon = 1e-12);
        for k in 1..11 {
            assert!(proj.state.u_plus[k].abs() < 1e-12);
            assert!(proj.state.u_minus[k].abs() < 1e-12);
        }
        assert!(!proj.resolution_warning);

        let zero = FnSpectrum(|_| Complex64::new(0.0, 0.0));
        let proj = project_initial(&basis, &zero, Exec::Sequential).unwrap();
        assert_eq!(energy(&proj.state), 0.0);
        assert_eq!(proj.tail_fraction, 0.0);
    }

    #[test]
    fn synthesis_at_origin() {
        let basis = HermiteBasis::new(5, 2.0).unwrap();
        let mut s = SpectralState::zeros(&basis);
        s.u_plus[0] = 1.0;
        let prof = evaluate_spectral(&s, &basis, &[0.0, 1.0], Exec::Sequential);
        assert_relative_eq!(prof.real[0], PI.powf(-0.25), epsilon = 1e-15);
        assert_eq!(prof.imag[0], 0.0);
    }

    #[test]
    fn band_energy_partitions_total() {
        let basis = HermiteBasis::new(20, 1.0).unwrap();
        let mut s = SpectralState::zeros(&basis);
        s.u_plus[0] = 1.0;
        s.u_minus[3] = 0.5;
        let inner = band_energy(&s, &basis, 0.0, 2.0).unwrap();
        let mid = band_energy(&s, &basis, 2.0, 30.0).unwrap();
        assert_relative_eq!(inner + mid, energy(&s), epsilon = 1e-12);
        let outer = band_energy(&s, &basis, 2.0, f64::INFINITY).unwrap();
        assert_relative_eq!(outer, mid, epsilon = 1e-12);
    }
}
