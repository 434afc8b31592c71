//! Fourier transforms on `[-β, β]` with the convention
//! `ĝ(ξ) = ∫ g(x) e^{-2πiξx} dx`, and the way back from Hermite coefficients
//! to physical space.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::exec::Exec;
use crate::hermite::{hermite_functions_into, HermiteBasis};
use crate::net::NetworkParams;
use crate::quadrature::adaptive_gk;
use crate::spectral::SpectralState;

/// Sampled complex error `η̂ = η̂⁺ + iη̂⁻` on a frequency grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyProfile {
    pub xi: Vec<f64>,
    pub real: Vec<f64>,
    pub imag: Vec<f64>,
}

impl FrequencyProfile {
    pub fn validate(&self) -> Result<()> {
        if self.real.len() != self.xi.len() || self.imag.len() != self.xi.len() {
            return Err(invalid("profile parts differ in length"));
        }
        if self.real.iter().chain(&self.imag).any(|v| !v.is_finite()) {
            return Err(Error::Numerical("non-finite value in frequency profile".into()));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.xi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xi.is_empty()
    }

    /// Trapezoidal `(∫ |η̂|² dξ)^{1/2}` over the grid.
    pub fn l2_norm(&self) -> f64 {
        trapezoid(&self.xi, |i| self.real[i].powi(2) + self.imag[i].powi(2)).sqrt()
    }

    /// Trapezoidal L² distance to a profile on the same grid.
    pub fn l2_distance(&self, other: &FrequencyProfile) -> Result<f64> {
        if self.xi != other.xi {
            return Err(invalid("profiles live on different grids"));
        }
        Ok(trapezoid(&self.xi, |i| {
            (self.real[i] - other.real[i]).powi(2) + (self.imag[i] - other.imag[i]).powi(2)
        })
        .sqrt())
    }
}

fn trapezoid(x: &[f64], f: impl Fn(usize) -> f64) -> f64 {
    x.windows(2)
        .enumerate()
        .map(|(i, w)| 0.5 * (w[1] - w[0]) * (f(i) + f(i + 1)))
        .sum()
}

/// `sin z / z`, with its Taylor series near the origin.
pub fn sinc(z: f64) -> f64 {
    if z.abs() < 1e-4 {
        let z2 = z * z;
        1.0 - z2 / 6.0 + z2 * z2 / 120.0
    } else {
        z.sin() / z
    }
}

/// `f(x) = sin(aπx) + cos(bπx)` restricted to `[-β, β]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetSpec {
    pub a: f64,
    pub b: f64,
    pub beta: f64,
}

impl TargetSpec {
    pub fn new(a: f64, b: f64, beta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta.is_finite()) || !a.is_finite() || !b.is_finite() {
            return Err(invalid("target needs finite a, b and beta > 0"));
        }
        Ok(Self { a, b, beta })
    }

    pub fn value(&self, x: f64) -> f64 {
        (self.a * PI * x).sin() + (self.b * PI * x).cos()
    }
}

/// `sin(cβπ)/(cπ)`, equal to `β` in the limit `c → 0`.
fn sinc_term(c: f64, beta: f64) -> f64 {
    beta * sinc(c * beta * PI)
}

/// Closed-form transform of the zero-extended target.
pub fn target_hat(xi: f64, spec: &TargetSpec) -> Complex64 {
    let (a, b, beta) = (spec.a, spec.b, spec.beta);
    let re = sinc_term(b + 2.0 * xi, beta) + sinc_term(b - 2.0 * xi, beta);
    let im = sinc_term(a + 2.0 * xi, beta) - sinc_term(a - 2.0 * xi, beta);
    Complex64::new(re, im)
}

const RESONANCE_EPS: f64 = 1e-8;

/// Transform of `sin(ωx + b)` over `[-β, β]`, scaled by nothing.
fn neuron_hat(omega: f64, bias: f64, xi: f64, beta: f64) -> Complex64 {
    let nu = 2.0 * PI * xi;
    let den = omega * omega - nu * nu;
    if den.abs() <= RESONANCE_EPS * (omega * omega + nu * nu) {
        // -iβ [e^{ib} sinc((ω-ν)β) - e^{-ib} sinc((ω+ν)β)]
        let eb = Complex64::from_polar(1.0, bias);
        let inner = eb * sinc((omega - nu) * beta) - eb.conj() * sinc((omega + nu) * beta);
        return Complex64::new(0.0, -beta) * inner;
    }
    let ep = Complex64::from_polar(1.0, nu * beta);
    let em = ep.conj();
    let (wb_minus, wb_plus) = (omega * beta - bias, omega * beta + bias);
    let s = Complex64::new(0.0, -nu) * (ep * wb_minus.sin() + em * wb_plus.sin());
    let c = omega * (ep * wb_minus.cos() - em * wb_plus.cos());
    (s + c) / den
}

/// Transform of the zero-extended one-dimensional network.
pub fn network_hat(xi: f64, params: &NetworkParams, beta: f64) -> Result<Complex64> {
    if params.dim() != 1 {
        return Err(invalid(format!(
            "network transform is one-dimensional, got d = {}",
            params.dim()
        )));
    }
    let mut total = Complex64::new(0.0, 0.0);
    for i in 0..params.width() {
        let omega = params.neuron_alpha(i) * params.weights()[i];
        total += params.neuron_coef(i) * neuron_hat(omega, params.biases()[i], xi, beta);
    }
    Ok(total)
}

/// `η̂(ξ) = 𝒩̂(ξ) − f̂(ξ)` on a grid.
pub fn error_hat(
    xi_grid: &[f64],
    params: &NetworkParams,
    target: &TargetSpec,
    exec: Exec,
) -> Result<FrequencyProfile> {
    if params.dim() != 1 {
        return Err(invalid("network transform is one-dimensional"));
    }
    let vals = exec.map(xi_grid.len(), |i| {
        let xi = xi_grid[i];
        network_hat(xi, params, target.beta).map(|n| n - target_hat(xi, target))
    });
    let mut profile = FrequencyProfile {
        xi: xi_grid.to_vec(),
        real: Vec::with_capacity(vals.len()),
        imag: Vec::with_capacity(vals.len()),
    };
    for v in vals {
        let v = v?;
        profile.real.push(v.re);
        profile.imag.push(v.im);
    }
    Ok(profile)
}

/// Inverse transform of `Σ_k (u⁺_k + iu⁻_k) Ĥ_k(λξ)`, using
/// `ℱ⁻¹[Ĥ_k(λ·)](x) = (√(2π)/λ) i^k Ĥ_k(2πx/λ)`.
pub fn hermite_to_physical(state: &SpectralState, basis: &HermiteBasis, x_grid: &[f64], exec: Exec) -> Vec<Complex64> {
    let n = basis.len();
    let lambda = basis.lambda();
    let scale = (2.0 * PI).sqrt() / lambda;
    exec.map(x_grid.len(), |i| {
        let mut h = vec![0.0; n];
        hermite_functions_into(2.0 * PI * x_grid[i] / lambda, &mut h);
        let mut acc = Complex64::new(0.0, 0.0);
        let mut ik = Complex64::new(1.0, 0.0);
        for k in 0..n {
            acc += ik * Complex64::new(state.u_plus[k], state.u_minus[k]) * h[k];
            ik *= Complex64::i();
        }
        scale * acc
    })
}

const ORACLE_TOL: f64 = 1e-10;
const ORACLE_MAX_PANELS: usize = 1 << 14;

/// Adaptive Gauss–Kronrod value of `∫_a^b g(x) e^{-2πiξx} dx`.
pub fn fourier_quadrature_oracle<G: Fn(f64) -> f64>(g: G, a: f64, b: f64, xi: f64) -> Result<Complex64> {
    adaptive_gk(
        |x| g(x) * Complex64::from_polar(1.0, -2.0 * PI * xi * x),
        a,
        b,
        ORACLE_TOL,
        ORACLE_MAX_PANELS,
    )
}

/// Adaptive value of `∫_a^b ĝ(ξ) e^{2πiξx} dξ` for a complex integrand.
pub fn inverse_fourier_oracle<G: Fn(f64) -> Complex64>(g: G, a: f64, b: f64, x: f64) -> Result<Complex64> {
    adaptive_gk(
        |xi| g(xi) * Complex64::from_polar(1.0, 2.0 * PI * xi * x),
        a,
        b,
        ORACLE_TOL,
        ORACLE_MAX_PANELS,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::net::init_params;
    use crate::spectral::ScaleSpec;
    use approx::assert_relative_eq;

    fn test2() -> TargetSpec {
        TargetSpec::new(4.2, 5.8, 1.0).unwrap()
    }

    #[test]
    fn target_at_zero_frequency() {
        let v = target_hat(0.0, &test2());
        let b = 5.8 * PI;
        assert_relative_eq!(v.re, 2.0 * b.sin() / b, epsilon = 1e-15);
        assert_relative_eq!(v.re, -0.064517, epsilon = 1e-6);
        assert_eq!(v.im, 0.0);
    }

    #[test]
    fn target_removable_points() {
        let t = test2();
        // 2ξ = b: the cosine contributes β from one term.
        let v = target_hat(2.9, &t);
        let w = target_hat(2.9 + 1e-9, &t);
        assert!((v - w).norm() < 1e-7);
        assert!(v.re.is_finite() && v.im.is_finite());
        assert!(TargetSpec::new(1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn network_hat_rejects_higher_dimensions() {
        let p = init_params(&ScaleSpec::pow2(1, 2).unwrap(), 3, 0, true).unwrap();
        assert!(network_hat(0.5, &p, 1.0).is_err());
    }

    #[test]
    fn resonant_branch_is_continuous() {
        let beta = 1.0;
        for (omega, bias) in [(3.0f64, 0.4), (-7.5, -1.2), (0.0, 0.9)] {
            let xi = omega.abs() / (2.0 * PI);
            let at = neuron_hat(omega, bias, xi, beta);
            for off in [1e-9, 1e-7, 1e-5] {
                let near = neuron_hat(omega, bias, xi + off, beta);
                assert!((near - at).norm() < 10.0 * off + 1e-10, "ω={omega} off={off}");
            }
        }
    }

    #[test]
    fn zero_state_is_zero_in_space() {
        let basis = HermiteBasis::new(10, 1.0).unwrap();
        let state = SpectralState::zeros(&basis);
        let v = hermite_to_physical(&state, &basis, &[-1.0, 0.0, 2.0], Exec::Sequential);
        assert!(v.iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn single_coefficient_gaussian() {
        let basis = HermiteBasis::new(4, 1.3).unwrap();
        let mut state = SpectralState::zeros(&basis);
        state.u_plus[0] = 1.0;
        let x = 0.2;
        let v = hermite_to_physical(&state, &basis, &[x], Exec::Sequential)[0];
        let y = 2.0 * PI * x / 1.3;
        let expected = (2.0 * PI).sqrt() / 1.3 * PI.powf(-0.25) * (-0.5 * y * y).exp();
        assert_relative_eq!(v.re, expected, epsilon = 1e-14);
        assert_eq!(v.im, 0.0);
    }

    #[test]
    fn oracle_simple_integrals() {
        let v = fourier_quadrature_oracle(|_| 1.0, -1.0, 1.0, 0.0).unwrap();
        assert_relative_eq!(v.re, 2.0, epsilon = 1e-12);
        let v = fourier_quadrature_oracle(|_| 1.0, -1.0, 1.0, 1.0).unwrap();
        assert!(v.norm() < 1e-10);
        let b = 5.8;
        let v = fourier_quadrature_oracle(|x| (b * PI * x).cos(), -1.0, 1.0, 0.0).unwrap();
        assert_relative_eq!(v.re, 2.0 * (b * PI).sin() / (b * PI), epsilon = 1e-10);
    }

    #[test]
    fn profile_norms() {
        let p = FrequencyProfile {
            xi: vec![0.0, 1.0, 2.0],
            real: vec![1.0, 1.0, 1.0],
            imag: vec![0.0, 0.0, 0.0],
        };
        p.validate().unwrap();
        assert_relative_eq!(p.l2_norm(), 2f64.sqrt(), epsilon = 1e-15);
        assert_eq!(p.l2_distance(&p).unwrap(), 0.0);
        let bad = FrequencyProfile {
            imag: vec![0.0],
            ..p.clone()
        };
        assert!(bad.validate().is_err());
    }
}
