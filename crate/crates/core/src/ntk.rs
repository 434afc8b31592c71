//! Neural tangent kernels of the two-layer multi-scale network.
//!
//! Only the inner weights and biases are trained, so
//! `Θ(x,x′) = Σ_i (α_i^{2d}/N)(α_i² x·x′ + 1) cos(φ_i(x)) cos(φ_i(x′))`.
//! With standard normal `θ` and `b` the infinite-width expectation is a
//! Gaussian mixture over scales.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::exec::Exec;
use crate::net::NetworkParams;
use crate::spectral::ScaleSpec;

/// Kernel value between `e_1` and a unit vector at angle `angle` from it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSample {
    pub angle: f64,
    pub value: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn check_dims(dim: usize, x: &[f64], xp: &[f64]) -> Result<()> {
    for v in [x, xp] {
        if v.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: v.len(),
            });
        }
    }
    Ok(())
}

fn empirical(params: &NetworkParams, x: &[f64], xp: &[f64], bias: bool) -> Result<f64> {
    check_dims(params.dim(), x, xp)?;
    let q = params.width_per_scale();
    let d = params.dim() as i32;
    let xx = dot(x, xp);
    let mut total = 0.0;
    for (j, &alpha) in params.spec().alphas().iter().enumerate() {
        let mut inner = 0.0;
        for i in j * q..(j + 1) * q {
            let w = params.weight_row(i);
            let b = params.biases()[i];
            let u = alpha * dot(w, x) + b;
            let v = alpha * dot(w, xp) + b;
            inner += u.cos() * v.cos();
        }
        let pre = alpha * alpha * xx + if bias { 1.0 } else { 0.0 };
        total += alpha.powi(2 * d) * pre * inner;
    }
    Ok(total / params.width() as f64)
}

/// Finite-width kernel of a network with trainable biases.
pub fn empirical_ntk(params: &NetworkParams, x: &[f64], xp: &[f64]) -> Result<f64> {
    empirical(params, x, xp, true)
}

/// Finite-width kernel when only the weights are trained.
pub fn empirical_ntk_no_bias(params: &NetworkParams, x: &[f64], xp: &[f64]) -> Result<f64> {
    empirical(params, x, xp, false)
}

fn limit(x: &[f64], xp: &[f64], spec: &ScaleSpec, bias: bool) -> Result<f64> {
    check_dims(spec.dim(), x, xp)?;
    let d = spec.dim() as i32;
    let xx = dot(x, xp);
    let plus: f64 = x.iter().zip(xp).map(|(a, b)| (a + b) * (a + b)).sum();
    let minus: f64 = x.iter().zip(xp).map(|(a, b)| (a - b) * (a - b)).sum();
    let damp = if bias { (-2.0f64).exp() } else { 1.0 };
    let total: f64 = spec
        .alphas()
        .iter()
        .map(|&a| {
            let a2 = a * a;
            let pre = a.powi(2 * d) * (a2 * xx + if bias { 1.0 } else { 0.0 });
            pre * (damp * (-0.5 * a2 * plus).exp() + (-0.5 * a2 * minus).exp())
        })
        .sum();
    Ok(total / (2.0 * spec.scale_count() as f64))
}

/// Infinite-width kernel with biases.
pub fn limit_ntk(x: &[f64], xp: &[f64], spec: &ScaleSpec) -> Result<f64> {
    limit(x, xp, spec, true)
}

/// Infinite-width kernel without biases.
pub fn limit_ntk_no_bias(x: &[f64], xp: &[f64], spec: &ScaleSpec) -> Result<f64> {
    limit(x, xp, spec, false)
}

/// `count` uniform angles on `[0, π]`.
pub fn angle_grid(count: usize) -> Result<Vec<f64>> {
    if count < 2 {
        return Err(invalid("angle grid needs at least two points"));
    }
    Ok((0..count).map(|i| PI * i as f64 / (count - 1) as f64).collect())
}

/// `e_1` and `cos β e_1 + sin β e_2` in `dim` dimensions.
pub fn sphere_pair(dim: usize, angle: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    if dim < 2 {
        return Err(invalid("an angle sweep needs d >= 2"));
    }
    let mut x = vec![0.0; dim];
    let mut xp = vec![0.0; dim];
    x[0] = 1.0;
    xp[0] = angle.cos();
    xp[1] = angle.sin();
    Ok((x, xp))
}

/// What to evaluate along an angle sweep.
#[derive(Debug, Clone, Copy)]
pub enum KernelSource<'a> {
    Empirical(&'a NetworkParams),
    Limit(&'a ScaleSpec),
}

impl KernelSource<'_> {
    fn dim(&self) -> usize {
        match self {
            KernelSource::Empirical(p) => p.dim(),
            KernelSource::Limit(s) => s.dim(),
        }
    }

    pub fn eval(&self, x: &[f64], xp: &[f64], bias: bool) -> Result<f64> {
        match (self, bias) {
            (KernelSource::Empirical(p), true) => empirical_ntk(p, x, xp),
            (KernelSource::Empirical(p), false) => empirical_ntk_no_bias(p, x, xp),
            (KernelSource::Limit(s), true) => limit_ntk(x, xp, s),
            (KernelSource::Limit(s), false) => limit_ntk_no_bias(x, xp, s),
        }
    }
}

/// Kernel along the unit-circle sweep in the `e_1, e_2` plane.
pub fn kernel_vs_angle(source: KernelSource<'_>, bias: bool, angles: &[f64], exec: Exec) -> Result<Vec<KernelSample>> {
    let dim = source.dim();
    exec.map(angles.len(), |i| {
        let (x, xp) = sphere_pair(dim, angles[i])?;
        Ok(KernelSample {
            angle: angles[i],
            value: source.eval(&x, &xp, bias)?,
        })
    })
    .into_iter()
    .collect()
}

/// `sup |a − r| / sup |r|` over matching samples.
pub fn sup_relative_error(curve: &[KernelSample], reference: &[KernelSample]) -> Result<f64> {
    if curve.len() != reference.len() || curve.is_empty() {
        return Err(invalid("kernel curves must be non-empty and equally long"));
    }
    let scale = reference.iter().map(|s| s.value.abs()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Err(Error::Numerical("reference kernel vanishes".into()));
    }
    let err = curve
        .iter()
        .zip(reference)
        .map(|(a, r)| (a.value - r.value).abs())
        .fold(0.0, f64::max);
    Ok(err / scale)
}

/// Gram matrix of the limit kernel on `points` (each of length `spec.dim()`).
pub fn limit_gram(points: &[Vec<f64>], spec: &ScaleSpec, bias: bool) -> Result<DMatrix<f64>> {
    let n = points.len();
    let mut g = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let v = limit(&points[i], &points[j], spec, bias)?;
            g[(i, j)] = v;
            g[(j, i)] = v;
        }
    }
    Ok(g)
}

/// Smallest eigenvalue of a symmetric matrix.
pub fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    SymmetricEigen::new(m.clone())
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn single_neuron_by_hand() {
        let spec = ScaleSpec::pow2(0, 1).unwrap();
        let p = NetworkParams::new(spec, 1, vec![0.0], vec![0.0], true, 0).unwrap();
        for (x, xp) in [(0.3, -1.2), (2.0, 0.5)] {
            assert_relative_eq!(empirical_ntk(&p, &[x], &[xp]).unwrap(), x * xp + 1.0, epsilon = 1e-15);
        }
        assert!(empirical_ntk(&p, &[0.0, 1.0], &[0.0]).is_err());
    }

    #[test]
    fn limit_at_origin() {
        let spec = ScaleSpec::pow2(0, 1).unwrap();
        let e2 = (-2.0f64).exp();
        assert_relative_eq!(limit_ntk(&[0.0], &[0.0], &spec).unwrap(), (1.0 + e2) / 2.0, epsilon = 1e-15);
        assert_relative_eq!(limit_ntk(&[0.0], &[0.0], &spec).unwrap(), 0.56767, epsilon = 1e-5);
    }

    #[test]
    fn limit_diagonal_unit_vector() {
        let spec = ScaleSpec::pow2(0, 3).unwrap();
        let x = [0.6, 0.0, 0.8];
        let e2 = (-2.0f64).exp();
        let expected = (1.0 + 1.0) / 2.0 * (e2 * (-2.0f64).exp() + 1.0);
        assert_relative_eq!(limit_ntk(&x, &x, &spec).unwrap(), expected, epsilon = 1e-14);
    }

    #[test]
    fn no_bias_orthogonal_and_odd() {
        let spec = ScaleSpec::pow2(2, 2).unwrap();
        assert_eq!(limit_ntk_no_bias(&[1.0, 0.0], &[0.0, 1.0], &spec).unwrap(), 0.0);
        let x = [0.3, -0.4];
        let neg = [-0.3, 0.4];
        assert_relative_eq!(
            limit_ntk_no_bias(&x, &neg, &spec).unwrap(),
            -limit_ntk_no_bias(&x, &x, &spec).unwrap(),
            epsilon = 1e-14
        );
    }

    #[test]
    fn sweep_shape() {
        let spec = ScaleSpec::pow2(3, 3).unwrap();
        let angles = angle_grid(181).unwrap();
        assert_eq!(angles.len(), 181);
        assert_relative_eq!(angles[180], PI, epsilon = 1e-15);
        let curve = kernel_vs_angle(KernelSource::Limit(&spec), true, &angles, Exec::default()).unwrap();
        let (x, _) = sphere_pair(3, 0.0).unwrap();
        assert_relative_eq!(curve[0].value, limit_ntk(&x, &x, &spec).unwrap(), epsilon = 1e-12);
        assert!(curve.iter().skip(1).all(|s| s.value < curve[0].value));
        assert!(sphere_pair(1, 0.3).is_err());
        assert!(angle_grid(1).is_err());
    }

    #[test]
    fn relative_error_metric() {
        let r = [KernelSample { angle: 0.0, value: 2.0 }, KernelSample { angle: 1.0, value: -4.0 }];
        let c = [KernelSample { angle: 0.0, value: 2.5 }, KernelSample { angle: 1.0, value: -4.0 }];
        assert_relative_eq!(sup_relative_error(&c, &r).unwrap(), 0.125, epsilon = 1e-15);
        assert!(sup_relative_error(&c[..1], &r).is_err());
    }
}
