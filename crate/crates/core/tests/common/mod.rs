//! Independent reference computations shared by the integration suites.
//!
//! Nothing here calls the production code paths being checked: integrals use
//! plain Gauss–Legendre panels and the network is summed term by term.

#![allow(dead_code)]

use std::f64::consts::PI;

use nalgebra::DMatrix;

use mscale_lab::hermite::{eval_hermite_derivatives, eval_hermite_functions};
use mscale_lab::net::NetworkParams;
use mscale_lab::quadrature::{gauss_legendre_rule, integrate_panels};
use mscale_lab::spectral::{coeff_a, coeff_b, Branch, ScaleSpec};

/// `∫_{-l}^{l} f` on `panels` panels of 24-point Gauss–Legendre.
pub fn gl(f: impl Fn(f64) -> f64, l: f64, panels: usize) -> f64 {
    let rule = gauss_legendre_rule(24).unwrap();
    integrate_panels(&rule, -l, l, panels, f)
}

/// `∫ Ĥ_n Ĥ_k e^{-τx²} dx` for all `n, k ≤ n_max` by panel quadrature.
pub fn inner_products_by_quadrature(tau: f64, n_max: usize) -> DMatrix<f64> {
    let l = 2.0 * ((2 * n_max + 1) as f64).sqrt() + 8.0;
    let rule = gauss_legendre_rule(24).unwrap();
    let panels = (4.0 * l) as usize;
    let n = n_max + 1;
    let mut m = DMatrix::zeros(n, n);
    let h = 2.0 * l / panels as f64;
    for p in 0..panels {
        let lo = -l + h * p as f64;
        for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
            let xx = lo + 0.5 * h * (x + 1.0);
            let ww = 0.5 * h * w * (-tau * xx * xx).exp();
            let v = eval_hermite_functions(xx, n_max).unwrap();
            for i in 0..n {
                for j in 0..n {
                    m[(i, j)] += ww * v[i] * v[j];
                }
            }
        }
    }
    m
}

/// Direct Galerkin matrices `(K, M)` for `branch`:
/// `K_nk = -λ²∫A Ĥ'_k(λξ)Ĥ'_n(λξ)dξ`, `M_nk = -∫B Ĥ_k(λξ)Ĥ_n(λξ)dξ`.
pub fn galerkin_by_quadrature(p: usize, lambda: f64, spec: &ScaleSpec, branch: Branch) -> (DMatrix<f64>, DMatrix<f64>) {
    let n = p + 1;
    let l = 2.0 * ((2 * p + 3) as f64).sqrt() + 8.0;
    let rule = gauss_legendre_rule(24).unwrap();
    let panels = (8.0 * l) as usize;
    let mut k = DMatrix::zeros(n, n);
    let mut m = DMatrix::zeros(n, n);
    let h = 2.0 * l / panels as f64;
    for q in 0..panels {
        let lo = -l + h * q as f64;
        for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
            let u = lo + 0.5 * h * (x + 1.0);
            let ww = 0.5 * h * w;
            let xi = u / lambda;
            let a = coeff_a(&[xi], branch, spec);
            let b = coeff_b(&[xi], branch, spec);
            let v = eval_hermite_functions(u, p).unwrap();
            let dv = eval_hermite_derivatives(u, p).unwrap();
            for i in 0..n {
                for j in 0..n {
                    k[(i, j)] -= lambda * ww * a * dv[i] * dv[j];
                    m[(i, j)] -= ww * b * v[i] * v[j] / lambda;
                }
            }
        }
    }
    (k, m)
}

pub fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    (a - b).abs().max()
}

/// Term-by-term network output.
pub fn naive_forward(p: &NetworkParams, x: &[f64]) -> f64 {
    let d = p.dim();
    let n = p.width();
    let q = p.width_per_scale();
    let mut total = 0.0;
    for i in 0..n {
        let alpha = p.spec().alphas()[i / q];
        let mut phase = p.biases()[i];
        for a in 0..d {
            phase += p.weights()[i * d + a] * alpha * x[a];
        }
        total += alpha.powi(d as i32) * phase.sin();
    }
    total / (n as f64).sqrt()
}

/// Midpoint-grid loss `½ h^d Σ (𝒩 − f)²`, summed term by term.
pub fn naive_loss(p: &NetworkParams, xs: &[Vec<f64>], ys: &[f64], cell: f64) -> f64 {
    0.5 * cell
        * xs
            .iter()
            .zip(ys)
            .map(|(x, y)| (naive_forward(p, x) - y).powi(2))
            .sum::<f64>()
}

/// One full-batch gradient step, written out loop by loop.
pub fn naive_step(p: &NetworkParams, xs: &[Vec<f64>], ys: &[f64], cell: f64, tau: f64) -> NetworkParams {
    let d = p.dim();
    let n = p.width();
    let q = p.width_per_scale();
    let errs: Vec<f64> = xs.iter().zip(ys).map(|(x, y)| naive_forward(p, x) - y).collect();
    let mut w = p.weights().to_vec();
    let mut b = p.biases().to_vec();
    for i in 0..n {
        let alpha = p.spec().alphas()[i / q];
        let c = alpha.powi(d as i32) / (n as f64).sqrt();
        let mut gb = 0.0;
        let mut gw = vec![0.0; d];
        for (x, e) in xs.iter().zip(&errs) {
            let mut phase = p.biases()[i];
            for a in 0..d {
                phase += p.weights()[i * d + a] * alpha * x[a];
            }
            let g = cell * e * c * phase.cos();
            gb += g;
            for a in 0..d {
                gw[a] += g * alpha * x[a];
            }
        }
        if p.has_bias() {
            b[i] -= tau * gb;
        }
        for a in 0..d {
            w[i * d + a] -= tau * gw[a];
        }
    }
    NetworkParams::new(p.spec().clone(), q, w, b, p.has_bias(), p.seed()).unwrap()
}

/// Midpoints of `m` equal cells on `[-β, β]`.
pub fn midpoints(beta: f64, m: usize) -> Vec<f64> {
    let h = 2.0 * beta / m as f64;
    (0..m).map(|i| -beta + (i as f64 + 0.5) * h).collect()
}

/// `sin(aπx) + cos(bπx)`.
pub fn test2_target(a: f64, b: f64) -> impl Fn(f64) -> f64 {
    move |x| (a * PI * x).sin() + (b * PI * x).cos()
}
