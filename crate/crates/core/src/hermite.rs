//! Normalised Hermite functions, scale-connection coefficients and the
//! Gaussian-weighted inner products that the Galerkin assembly reduces to.
//!
//! `Ĥ_n(x) = π^{-1/4} (2^n n!)^{-1/2} e^{-x²/2} H_n(x)` is always evaluated
//! through its three-term recurrence on the function form. A running
//! log-scale keeps the recurrence finite far outside the oscillatory region.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::error::{ensure_finite, invalid, Result};

const RESCALE_AT: f64 = 1e100;
const RESCALE_LOG: f64 = 230.258_509_299_404_56; // ln(1e100)

fn pi_quarter_inv() -> f64 {
    PI.powf(-0.25)
}

/// Runs the recurrence up to index `n` and returns `(h_n, h_{n-1}, log_scale)`
/// with `Ĥ_k(x) = h_k · exp(log_scale)`.
pub(crate) fn hermite_pair_scaled(x: f64, n: usize) -> (f64, f64, f64) {
    let mut log_scale = -0.5 * x * x;
    let mut prev = 0.0;
    let mut cur = pi_quarter_inv();
    for k in 0..n {
        let kf = k as f64;
        let next = x * (2.0 / (kf + 1.0)).sqrt() * cur - (kf / (kf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
        if cur.abs() > RESCALE_AT {
            cur /= RESCALE_AT;
            prev /= RESCALE_AT;
            log_scale += RESCALE_LOG;
        }
    }
    (cur, prev, log_scale)
}

#[inline]
fn unscale(value: f64, log_scale: f64) -> f64 {
    if log_scale > -700.0 {
        value * log_scale.exp()
    } else if value == 0.0 {
        0.0
    } else {
        value.signum() * (log_scale + value.abs().ln()).exp()
    }
}

/// Writes `Ĥ_0(x) … Ĥ_{out.len()-1}(x)` into `out`.
pub fn hermite_functions_into(x: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    let mut log_scale = -0.5 * x * x;
    let mut prev = 0.0;
    let mut cur = pi_quarter_inv();
    out[0] = unscale(cur, log_scale);
    for k in 0..out.len() - 1 {
        let kf = k as f64;
        let next = x * (2.0 / (kf + 1.0)).sqrt() * cur - (kf / (kf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
        if cur.abs() > RESCALE_AT {
            cur /= RESCALE_AT;
            prev /= RESCALE_AT;
            log_scale += RESCALE_LOG;
        }
        out[k + 1] = unscale(cur, log_scale);
    }
}

/// `Ĥ_0(x) … Ĥ_{n_max}(x)`.
pub fn eval_hermite_functions(x: f64, n_max: usize) -> Result<Vec<f64>> {
    ensure_finite(x, "x")?;
    let mut out = vec![0.0; n_max + 1];
    hermite_functions_into(x, &mut out);
    Ok(out)
}

/// `Ĥ'_0(x) … Ĥ'_{n_max}(x)` from `Ĥ'_n = √(n/2) Ĥ_{n-1} − √((n+1)/2) Ĥ_{n+1}`.
pub fn eval_hermite_derivatives(x: f64, n_max: usize) -> Result<Vec<f64>> {
    ensure_finite(x, "x")?;
    let mut h = vec![0.0; n_max + 2];
    hermite_functions_into(x, &mut h);
    Ok(derivatives_from_values(&h, n_max))
}

pub(crate) fn derivatives_from_values(h: &[f64], n_max: usize) -> Vec<f64> {
    (0..=n_max)
        .map(|n| {
            let nf = n as f64;
            let lower = if n > 0 { (nf / 2.0).sqrt() * h[n - 1] } else { 0.0 };
            lower - ((nf + 1.0) / 2.0).sqrt() * h[n + 1]
        })
        .collect()
}

/// A scaled Hermite basis `{Ĥ_k(λξ)}_{k=0..=order}` on the frequency axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HermiteBasis {
    order: usize,
    lambda: f64,
}

impl HermiteBasis {
    pub fn new(order: usize, lambda: f64) -> Result<Self> {
        if !(lambda.is_finite() && lambda > 0.0) {
            return Err(invalid(format!("lambda must be positive, got {lambda}")));
        }
        Ok(Self { order, lambda })
    }

    /// Picks `λ = √(2p+1) / ξ_cover` so that the outermost turning point sits at `ξ_cover`.
    pub fn covering(order: usize, xi_cover: f64) -> Result<Self> {
        if !(xi_cover.is_finite() && xi_cover > 0.0) {
            return Err(invalid(format!("coverage must be positive, got {xi_cover}")));
        }
        Self::new(order, ((2 * order + 1) as f64).sqrt() / xi_cover)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn len(&self) -> usize {
        self.order + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Values `Ĥ_k(λξ)` for every basis index.
    pub fn eval(&self, xi: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        hermite_functions_into(self.lambda * xi, &mut out);
        out
    }

    /// `Σ_k c_k Ĥ_k(λξ)`.
    pub fn synthesize(&self, coeffs: &[f64], xi: f64) -> f64 {
        let vals = self.eval(xi);
        vals.iter().zip(coeffs).map(|(v, c)| v * c).sum()
    }
}

/// Lower-triangular table of `h_{n,k}(λ)`, the expansion of `H̃_n(λy)` in `H̃_k(y)`.
#[derive(Debug, Clone)]
pub struct ConnectionTable {
    lambda: f64,
    n_max: usize,
    entries: Vec<f64>,
}

impl ConnectionTable {
    #[inline]
    fn index(n: usize, k: usize) -> usize {
        n * (n + 1) / 2 + k
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    /// `h_{n,k}`; zero above the diagonal.
    #[inline]
    pub fn get(&self, n: usize, k: usize) -> f64 {
        if k > n {
            0.0
        } else {
            self.entries[Self::index(n, k)]
        }
    }

    /// Row `n` as a slice of length `n + 1`.
    pub fn row(&self, n: usize) -> &[f64] {
        let start = Self::index(n, 0);
        &self.entries[start..start + n + 1]
    }
}

/// Builds `h_{n,k}(λ)` for `0 ≤ k ≤ n ≤ n_max`.
///
/// Uses `h_{n,n} = λⁿ` and the two-term step
/// `h_{n+1,k} = (λ²−1)·√(n(n+1))/(n+1−k)·h_{n−1,k}`, which never subtracts.
/// The three-branch relation
/// `h_{n+1,k} = λ√((k+1)/(n+1))h_{n,k+1} − √(n/(n+1))h_{n−1,k} + λ√(k/(n+1))h_{n,k−1}`
/// holds for the same table but cancels catastrophically near `λ = 1`.
pub fn connection_table(lambda: f64, n_max: usize) -> Result<ConnectionTable> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(invalid(format!("lambda must be positive, got {lambda}")));
    }
    let mut t = ConnectionTable {
        lambda,
        n_max,
        entries: vec![0.0; (n_max + 1) * (n_max + 2) / 2],
    };
    let shift = lambda * lambda - 1.0;
    let mut diag = 1.0;
    for n in 0..=n_max {
        let row = ConnectionTable::index(n, 0);
        t.entries[row + n] = diag;
        diag *= lambda;
        if n >= 2 {
            let prev = ConnectionTable::index(n - 2, 0);
            let root = ((n - 1) as f64 * n as f64).sqrt();
            for k in (n % 2..n - 1).step_by(2) {
                t.entries[row + k] = shift * root / (n - k) as f64 * t.entries[prev + k];
            }
        }
    }
    Ok(t)
}

fn ln_factorials(n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n + 1];
    for i in 1..=n {
        out[i] = out[i - 1] + (i as f64).ln();
    }
    out
}

/// Closed form of `h_{n,k}(λ)`; log-space for `n > 30`.
pub fn connection_explicit(n: usize, k: usize, lambda: f64) -> Result<f64> {
    if k > n {
        return Err(invalid(format!("k = {k} exceeds n = {n}")));
    }
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(invalid(format!("lambda must be positive, got {lambda}")));
    }
    if (n - k) % 2 == 1 {
        return Ok(0.0);
    }
    let s = (n - k) / 2;
    let shift = lambda * lambda - 1.0;
    if n <= 30 {
        let fact = |m: usize| (1..=m).fold(1.0f64, |acc, i| acc * i as f64);
        let root = (fact(n) / (2f64.powi((n - k) as i32) * fact(k))).sqrt();
        return Ok(root / fact(s) * lambda.powi(k as i32) * shift.powi(s as i32));
    }
    if s > 0 && shift == 0.0 {
        return Ok(0.0);
    }
    let lf = ln_factorials(n);
    let log_mag = 0.5 * (lf[n] - (n - k) as f64 * std::f64::consts::LN_2 - lf[k]) - lf[s]
        + k as f64 * lambda.ln()
        + if s > 0 { s as f64 * shift.abs().ln() } else { 0.0 };
    let sign = if shift < 0.0 && s % 2 == 1 { -1.0 } else { 1.0 };
    Ok(sign * log_mag.exp())
}

/// `I_{nk}(τ) = ∫ Ĥ_n Ĥ_k e^{-τx²} dx` for `0 ≤ n, k ≤ n_max`.
pub fn weighted_inner_products(tau: f64, n_max: usize) -> Result<DMatrix<f64>> {
    if !(tau.is_finite() && tau >= 0.0) {
        return Err(invalid(format!("tau must be non-negative, got {tau}")));
    }
    let scale = 1.0 / (tau + 1.0).sqrt();
    let table = connection_table(scale, n_max)?;
    let dim = n_max + 1;
    let mut out = DMatrix::zeros(dim, dim);
    for n in 0..dim {
        let rn = table.row(n);
        for k in (n % 2..=n).step_by(2) {
            let rk = table.row(k);
            // Only indices with the parity of k contribute.
            let mut acc = 0.0;
            let mut i = k % 2;
            while i <= k {
                acc += rn[i] * rk[i];
                i += 2;
            }
            let v = scale * acc;
            out[(n, k)] = v;
            out[(k, n)] = v;
        }
    }
    Ok(out)
}
