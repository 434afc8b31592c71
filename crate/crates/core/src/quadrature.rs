//! Gaussian quadrature rules and an adaptive Gauss–Kronrod integrator.
//!
//! The Hermite rule is built by Newton iteration on the normalised Hermite
//! *functions*, so nodes and weights stay representable for thousands of
//! points. Besides the classical weights it carries `scaled_weights`
//! (`w_i·exp(x_i²)`), which integrate a plain integrand over the real line
//! without the Gaussian weight factor.

use num_complex::Complex64;

use crate::error::{invalid, Error, Result};
use crate::hermite::hermite_pair_scaled;

/// Nodes and weights of a Gauss rule.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// `weights[i] * exp(nodes[i]^2)`; only meaningful for Hermite rules.
    pub scaled_weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn count(&self) -> usize {
        self.nodes.len()
    }

    /// `Σ w_i f(x_i)`, the weighted integral the rule was built for.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    /// `Σ w_i exp(x_i²) f(x_i)` ≈ `∫ f(x) dx` over the real line (Hermite rules).
    pub fn integrate_unweighted<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.scaled_weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// Gauss–Hermite rule for the weight `exp(-x²)` with `count` nodes, ascending.
pub fn gauss_hermite_rule(count: usize) -> Result<QuadratureRule> {
    if count == 0 {
        return Err(invalid("quadrature node count must be at least 1"));
    }
    let n = count;
    let m = n.div_ceil(2);
    let mut roots = vec![0.0f64; m];
    let mut z = 0.0f64;
    let nf = n as f64;
    for i in 0..m {
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * roots[0],
            3 => 1.91 * z - 0.91 * roots[1],
            _ => 2.0 * z - roots[i - 2],
        };
        if n % 2 == 1 && i == m - 1 {
            z = 0.0;
        }
        let mut converged = false;
        for _ in 0..200 {
            let (h_n, h_nm1, _) = hermite_pair_scaled(z, n);
            // H'_n = sqrt(2n) H_{n-1} - x H_n on the function form.
            let deriv = (2.0 * nf).sqrt() * h_nm1 - z * h_n;
            let dz = h_n / deriv;
            z -= dz;
            if dz.abs() <= 1e-15 * z.abs().max(1.0) {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::Quadrature(format!(
                "Gauss-Hermite root {i} of {n} failed to converge"
            )));
        }
        roots[i] = z;
    }

    let mut nodes = Vec::with_capacity(n);
    for &r in &roots {
        nodes.push(r);
        if r != 0.0 {
            nodes.push(-r);
        }
    }
    nodes.sort_by(|a, b| a.partial_cmp(b).unwrap());
    debug_assert_eq!(nodes.len(), n);

    let mut scaled = Vec::with_capacity(n);
    for &x in &nodes {
        let (_, h_nm1, log_scale) = hermite_pair_scaled(x, n);
        let h = h_nm1 * log_scale.exp();
        scaled.push(1.0 / (nf * h * h));
    }
    let weights = nodes
        .iter()
        .zip(&scaled)
        .map(|(&x, &w)| w * (-x * x).exp())
        .collect();
    Ok(QuadratureRule {
        nodes,
        weights,
        scaled_weights: scaled,
    })
}

/// Gauss–Legendre rule on `[-1, 1]` with `count` nodes, ascending.
pub fn gauss_legendre_rule(count: usize) -> Result<QuadratureRule> {
    if count == 0 {
        return Err(invalid("quadrature node count must be at least 1"));
    }
    let n = count;
    let nf = n as f64;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        for _ in 0..100 {
            let (p, p_prev) = legendre_pair(z, n);
            let dp = nf * (z * p - p_prev) / (z * z - 1.0);
            let dz = p / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let (p, p_prev) = legendre_pair(z, n);
        if p.abs() > 1e-10 {
            return Err(Error::Quadrature(format!(
                "Gauss-Legendre root {i} of {n} failed to converge"
            )));
        }
        let dp = nf * (z * p - p_prev) / (z * z - 1.0);
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    Ok(QuadratureRule {
        scaled_weights: weights.clone(),
        nodes,
        weights,
    })
}

fn legendre_pair(x: f64, n: usize) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 1..n {
        let kf = k as f64;
        let p2 = ((2.0 * kf + 1.0) * x * p1 - kf * p0) / (kf + 1.0);
        p0 = p1;
        p1 = p2;
    }
    (p1, p0)
}

/// Composite Gauss–Legendre integration of `f` over `[a, b]` split into `panels` equal pieces.
pub fn integrate_panels<T, F>(rule: &QuadratureRule, a: f64, b: f64, panels: usize, f: F) -> T
where
    T: std::iter::Sum<T> + std::ops::Mul<f64, Output = T>,
    F: Fn(f64) -> T,
{
    let panels = panels.max(1);
    let h = (b - a) / panels as f64;
    (0..panels)
        .flat_map(|p| {
            let lo = a + h * p as f64;
            let f = &f;
            rule.nodes
                .iter()
                .zip(&rule.weights)
                .map(move |(&x, &w)| f(lo + 0.5 * h * (x + 1.0)) * (0.5 * h * w))
        })
        .sum()
}

const GK_NODES: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const GK_WEIGHTS: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const G7_WEIGHTS: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> (Complex64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * GK_WEIGHTS[7];
    let mut gauss = fc * G7_WEIGHTS[3];
    for i in 0..7 {
        let dx = h * GK_NODES[i];
        let pair = f(c - dx) + f(c + dx);
        kron += pair * GK_WEIGHTS[i];
        if i % 2 == 1 {
            gauss += pair * G7_WEIGHTS[i / 2];
        }
    }
    let kron = kron * h;
    let gauss = gauss * h;
    (kron, (kron - gauss).norm())
}

/// Adaptive 7/15-point Gauss–Kronrod quadrature of a complex integrand.
///
/// Bisects the worst panel until the summed error estimate drops below `tol`.
/// Fails after `max_panels` panels.
pub fn adaptive_gk<F>(f: F, a: f64, b: f64, tol: f64, max_panels: usize) -> Result<Complex64>
where
    F: Fn(f64) -> Complex64,
{
    if !(a.is_finite() && b.is_finite()) {
        return Err(invalid("integration bounds must be finite"));
    }
    if a == b {
        return Ok(Complex64::new(0.0, 0.0));
    }
    // (lo, hi, value, err)
    let mut panels: Vec<(f64, f64, Complex64, f64)> = Vec::new();
    let initial = 8usize;
    let h = (b - a) / initial as f64;
    for i in 0..initial {
        let lo = a + h * i as f64;
        let hi = if i + 1 == initial { b } else { lo + h };
        let (v, e) = gk15(&f, lo, hi);
        panels.push((lo, hi, v, e));
    }
    loop {
        let total_err: f64 = panels.iter().map(|p| p.3).sum();
        if !total_err.is_finite() {
            return Err(Error::Quadrature("integrand is not finite on the interval".into()));
        }
        if total_err <= tol {
            return Ok(panels.iter().map(|p| p.2).sum());
        }
        if panels.len() >= max_panels {
            return Err(Error::Quadrature(format!(
                "error estimate {total_err:.3e} above tolerance {tol:.1e} after {} panels",
                panels.len()
            )));
        }
        let (worst, _) = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .unwrap();
        let (lo, hi, _, _) = panels.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gk15(&f, lo, mid);
        let (v2, e2) = gk15(&f, mid, hi);
        panels.push((lo, mid, v1, e1));
        panels.push((mid, hi, v2, e2));
    }
}
