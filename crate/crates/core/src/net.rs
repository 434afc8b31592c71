//! Two-layer multi-scale sine network
//! `𝒩(x) = N^{-1/2} Σ_j α_j^d Σ_k sin(θ_{jq+k}·α_j x + b_{jq+k})`,
//! its closed-form gradients and full-batch gradient descent.
//!
//! Batch kernels walk the samples block by block. On tensor grids the phase
//! `θ·α_j x + b` advances by a constant per grid step, so `e^{iφ}` is
//! propagated by complex rotation and only re-seeded with `sin_cos` at
//! block starts. Scattered samples fall back to direct evaluation.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::exec::Exec;
use crate::spectral::ScaleSpec;

/// Inner weights, biases and layout of a multi-scale network.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkParams {
    spec: ScaleSpec,
    width_per_scale: usize,
    /// Row-major `N × d`; row `jq + k` belongs to scale `j`.
    weights: Vec<f64>,
    biases: Vec<f64>,
    has_bias: bool,
    seed: u64,
}

impl NetworkParams {
    pub fn new(
        spec: ScaleSpec,
        width_per_scale: usize,
        weights: Vec<f64>,
        biases: Vec<f64>,
        has_bias: bool,
        seed: u64,
    ) -> Result<Self> {
        if width_per_scale == 0 {
            return Err(invalid("width per scale must be at least 1"));
        }
        let n = spec.scale_count() * width_per_scale;
        if weights.len() != n * spec.dim() {
            return Err(Error::DimensionMismatch {
                expected: n * spec.dim(),
                got: weights.len(),
            });
        }
        if biases.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: biases.len(),
            });
        }
        if !has_bias && biases.iter().any(|b| *b != 0.0) {
            return Err(invalid("bias-free network carries non-zero biases"));
        }
        Ok(Self {
            spec,
            width_per_scale,
            weights,
            biases,
            has_bias,
            seed,
        })
    }

    pub fn spec(&self) -> &ScaleSpec {
        &self.spec
    }

    pub fn dim(&self) -> usize {
        self.spec.dim()
    }

    pub fn width_per_scale(&self) -> usize {
        self.width_per_scale
    }

    /// Total hidden width `N = (s+1) q`.
    pub fn width(&self) -> usize {
        self.spec.scale_count() * self.width_per_scale
    }

    pub fn has_bias(&self) -> bool {
        self.has_bias
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn biases(&self) -> &[f64] {
        &self.biases
    }

    pub fn weight_row(&self, neuron: usize) -> &[f64] {
        let d = self.dim();
        &self.weights[neuron * d..(neuron + 1) * d]
    }

    /// Scale factor `α_j` applied to neuron `jq + k`.
    pub fn neuron_alpha(&self, neuron: usize) -> f64 {
        self.spec.alphas()[neuron / self.width_per_scale]
    }

    /// Fixed outer coefficient `α_j^d / √N`.
    pub fn neuron_coef(&self, neuron: usize) -> f64 {
        self.neuron_alpha(neuron).powi(self.dim() as i32) / (self.width() as f64).sqrt()
    }
}

/// Draws all `θ` entries, then all `b`, i.i.d. standard normal from a seeded ChaCha8 stream.
pub fn init_params(spec: &ScaleSpec, q: usize, seed: u64, has_bias: bool) -> Result<NetworkParams> {
    if q == 0 {
        return Err(invalid("width per scale must be at least 1"));
    }
    let n = spec.scale_count() * q;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let weights: Vec<f64> = (0..n * spec.dim())
        .map(|_| StandardNormal.sample(&mut rng))
        .collect();
    let biases: Vec<f64> = if has_bias {
        (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
    } else {
        vec![0.0; n]
    };
    NetworkParams::new(spec.clone(), q, weights, biases, has_bias, seed)
}

/// Network output at a single point, by direct summation.
pub fn forward(params: &NetworkParams, x: &[f64]) -> Result<f64> {
    if x.len() != params.dim() {
        return Err(Error::DimensionMismatch {
            expected: params.dim(),
            got: x.len(),
        });
    }
    let q = params.width_per_scale;
    let mut total = 0.0;
    for (j, &alpha) in params.spec.alphas().iter().enumerate() {
        let mut inner = 0.0;
        for k in 0..q {
            let i = j * q + k;
            let phase: f64 = params
                .weight_row(i)
                .iter()
                .zip(x)
                .map(|(t, v)| t * alpha * v)
                .sum::<f64>()
                + params.biases[i];
            inner += phase.sin();
        }
        total += alpha.powi(params.dim() as i32) * inner;
    }
    Ok(total / (params.width() as f64).sqrt())
}

/// One axis of a tensor-product sample grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub start: f64,
    pub step: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Layout {
    /// Row-major tensor grid (last axis fastest).
    Grid(Vec<Axis>),
    Scattered,
}

/// Training inputs with their quadrature weight for the Riemann-sum loss.
#[derive(Debug, Clone)]
pub struct SampleSet {
    dim: usize,
    points: Vec<f64>,
    layout: Layout,
    cell_volume: f64,
}

impl SampleSet {
    /// Cell midpoints of a uniform `per_axis^dim` grid on `[-β, β]^dim`.
    pub fn uniform_grid(dim: usize, beta: f64, per_axis: usize) -> Result<Self> {
        if dim == 0 || per_axis < 1 || !(beta > 0.0 && beta.is_finite()) {
            return Err(invalid("grid needs dim >= 1, per_axis >= 1 and beta > 0"));
        }
        let h = 2.0 * beta / per_axis as f64;
        let axis = Axis {
            start: -beta + 0.5 * h,
            step: h,
            count: per_axis,
        };
        let axes = vec![axis; dim];
        let n = per_axis.pow(dim as u32);
        let mut points = Vec::with_capacity(n * dim);
        let mut idx = vec![0usize; dim];
        for _ in 0..n {
            for a in 0..dim {
                points.push(axes[a].start + axes[a].step * idx[a] as f64);
            }
            for a in (0..dim).rev() {
                idx[a] += 1;
                if idx[a] < per_axis {
                    break;
                }
                idx[a] = 0;
            }
        }
        Ok(Self {
            dim,
            points,
            layout: Layout::Grid(axes),
            cell_volume: h.powi(dim as i32),
        })
    }

    /// `n` i.i.d. uniform points on `[-β, β]^dim`, each weighted `(2β)^dim / n`.
    pub fn random_uniform(dim: usize, beta: f64, n: usize, seed: u64) -> Result<Self> {
        if dim == 0 || n < 1 || !(beta > 0.0 && beta.is_finite()) {
            return Err(invalid("random samples need dim >= 1, n >= 1 and beta > 0"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dist = Uniform::new_inclusive(-beta, beta);
        let points = (0..n * dim).map(|_| dist.sample(&mut rng)).collect();
        Ok(Self {
            dim,
            points,
            layout: Layout::Scattered,
            cell_volume: (2.0 * beta).powi(dim as i32) / n as f64,
        })
    }

    /// Arbitrary points with an explicit per-sample weight.
    pub fn scattered(dim: usize, points: Vec<f64>, cell_volume: f64) -> Result<Self> {
        if dim == 0 || points.is_empty() || !points.len().is_multiple_of(dim) {
            return Err(invalid("point buffer must be a non-empty multiple of dim"));
        }
        Ok(Self {
            dim,
            points,
            layout: Layout::Scattered,
            cell_volume,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i * self.dim..(i + 1) * self.dim]
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    /// Riemann weight per sample.
    pub fn cell_volume(&self) -> f64 {
        self.cell_volume
    }
}

/// Samples paired with target values.
#[derive(Debug, Clone)]
pub struct TrainingSet {
    pub samples: SampleSet,
    pub targets: Vec<f64>,
}

impl TrainingSet {
    pub fn from_fn(samples: SampleSet, target: &dyn Fn(&[f64]) -> f64) -> Self {
        let targets = (0..samples.len()).map(|i| target(samples.point(i))).collect();
        Self { samples, targets }
    }
}

const LANES: usize = 8;
const BLOCK: usize = 256;
const NEURON_TASK: usize = 64;

/// Eight neurons with their phase data, padded with inert lanes.
struct LaneChunk {
    /// `α_j θ_i` per axis.
    omega: Vec<[f64; LANES]>,
    bias: [f64; LANES],
    coef: [f64; LANES],
    alpha: [f64; LANES],
    rot_re: Vec<[f64; LANES]>,
    rot_im: Vec<[f64; LANES]>,
}

fn lane_chunks(params: &NetworkParams, samples: &SampleSet) -> Vec<LaneChunk> {
    let n = params.width();
    let d = params.dim();
    let steps: Vec<f64> = match &samples.layout {
        Layout::Grid(axes) => axes.iter().map(|a| a.step).collect(),
        Layout::Scattered => vec![0.0; d],
    };
    (0..n.div_ceil(LANES))
        .map(|c| {
            let mut chunk = LaneChunk {
                omega: vec![[0.0; LANES]; d],
                bias: [0.0; LANES],
                coef: [0.0; LANES],
                alpha: [0.0; LANES],
                rot_re: vec![[1.0; LANES]; d],
                rot_im: vec![[0.0; LANES]; d],
            };
            for l in 0..LANES {
                let i = c * LANES + l;
                if i >= n {
                    break;
                }
                let alpha = params.neuron_alpha(i);
                chunk.bias[l] = params.biases[i];
                chunk.coef[l] = params.neuron_coef(i);
                chunk.alpha[l] = alpha;
                for a in 0..d {
                    let w = alpha * params.weights[i * d + a];
                    chunk.omega[a][l] = w;
                    let (s, c) = (w * steps[a]).sin_cos();
                    chunk.rot_re[a][l] = c;
                    chunk.rot_im[a][l] = s;
                }
            }
            chunk
        })
        .collect()
}

/// Visits samples `f0 .. f0+len` with `(cos φ, sin φ)` for every lane.
#[inline(always)]
fn walk_block<F>(samples: &SampleSet, chunk: &LaneChunk, f0: usize, len: usize, mut visit: F)
where
    F: FnMut(usize, &[f64; LANES], &[f64; LANES]),
{
    let d = samples.dim;
    match &samples.layout {
        Layout::Scattered => {
            let mut re = [0.0; LANES];
            let mut im = [0.0; LANES];
            for t in 0..len {
                let x = samples.point(f0 + t);
                for l in 0..LANES {
                    let mut phase = chunk.bias[l];
                    for a in 0..d {
                        phase += chunk.omega[a][l] * x[a];
                    }
                    let (s, c) = phase.sin_cos();
                    re[l] = c;
                    im[l] = s;
                }
                visit(t, &re, &im);
            }
        }
        Layout::Grid(axes) => {
            // Odometer state: level `a` holds the phase at (i_0..i_a, 0, …, 0).
            let mut idx = vec![0usize; d];
            let mut rem = f0;
            for a in (0..d).rev() {
                idx[a] = rem % axes[a].count;
                rem /= axes[a].count;
            }
            let mut z_re = vec![[0.0; LANES]; d];
            let mut z_im = vec![[0.0; LANES]; d];
            for level in 0..d {
                for l in 0..LANES {
                    let mut phase = chunk.bias[l];
                    for a in 0..d {
                        let i = if a <= level { idx[a] } else { 0 };
                        phase += chunk.omega[a][l] * (axes[a].start + axes[a].step * i as f64);
                    }
                    let (s, c) = phase.sin_cos();
                    z_re[level][l] = c;
                    z_im[level][l] = s;
                }
            }
            // Tight rotation along the last axis; the odometer only moves at row ends.
            let last = d - 1;
            let (rr, ri) = (chunk.rot_re[last], chunk.rot_im[last]);
            let mut t = 0;
            loop {
                let run = (axes[last].count - idx[last]).min(len - t);
                let (mut zr, mut zi) = (z_re[last], z_im[last]);
                for k in 0..run {
                    visit(t + k, &zr, &zi);
                    for l in 0..LANES {
                        let r = zr[l] * rr[l] - zi[l] * ri[l];
                        let i = zr[l] * ri[l] + zi[l] * rr[l];
                        zr[l] = r;
                        zi[l] = i;
                    }
                }
                t += run;
                if t == len {
                    break;
                }
                idx[last] = 0;
                let mut a = last;
                while a > 0 {
                    a -= 1;
                    idx[a] += 1;
                    if idx[a] < axes[a].count {
                        let (rr, ri) = (&chunk.rot_re[a], &chunk.rot_im[a]);
                        let (zr, zi) = (&mut z_re[a], &mut z_im[a]);
                        for l in 0..LANES {
                            let r = zr[l] * rr[l] - zi[l] * ri[l];
                            let i = zr[l] * ri[l] + zi[l] * rr[l];
                            zr[l] = r;
                            zi[l] = i;
                        }
                        for deeper in a + 1..d {
                            z_re[deeper] = z_re[a];
                            z_im[deeper] = z_im[a];
                        }
                        break;
                    }
                    idx[a] = 0;
                }
            }
        }
    }
}

fn check_samples(params: &NetworkParams, samples: &SampleSet) -> Result<()> {
    if samples.dim != params.dim() {
        return Err(Error::DimensionMismatch {
            expected: params.dim(),
            got: samples.dim,
        });
    }
    Ok(())
}

fn forward_with_chunks(chunks: &[LaneChunk], samples: &SampleSet, exec: Exec) -> Vec<f64> {
    let mut out = vec![0.0; samples.len()];
    exec.chunks_mut(&mut out, BLOCK, |b, block| {
        let f0 = b * BLOCK;
        let mut acc = vec![[0.0f64; LANES]; block.len()];
        for chunk in chunks {
            walk_block(samples, chunk, f0, block.len(), |t, _re, im| {
                let a = &mut acc[t];
                for l in 0..LANES {
                    a[l] += chunk.coef[l] * im[l];
                }
            });
        }
        for (o, a) in block.iter_mut().zip(&acc) {
            *o = a.iter().sum();
        }
    });
    out
}

/// Network outputs at every sample.
pub fn forward_batch(params: &NetworkParams, samples: &SampleSet, exec: Exec) -> Result<Vec<f64>> {
    check_samples(params, samples)?;
    let chunks = lane_chunks(params, samples);
    Ok(forward_with_chunks(&chunks, samples, exec))
}

/// `½ Σ_i w (𝒩(x_i) − f(x_i))²` with the per-sample Riemann weight `w`.
pub fn loss(params: &NetworkParams, set: &TrainingSet, exec: Exec) -> Result<f64> {
    let out = forward_batch(params, &set.samples, exec)?;
    Ok(loss_from_outputs(&out, set))
}

fn loss_from_outputs(out: &[f64], set: &TrainingSet) -> f64 {
    let sq: f64 = out
        .iter()
        .zip(&set.targets)
        .map(|(o, t)| (o - t) * (o - t))
        .sum();
    0.5 * set.samples.cell_volume * sq
}

/// Gradient of the training loss with respect to the inner weights and biases.
#[derive(Debug, Clone)]
pub struct Gradient {
    pub weights: Vec<f64>,
    pub biases: Vec<f64>,
    /// Loss at the parameters the gradient was taken at.
    pub loss: f64,
}

/// Loss and closed-form gradient in one forward/backward sweep.
pub fn loss_and_gradient(params: &NetworkParams, set: &TrainingSet, exec: Exec) -> Result<Gradient> {
    check_samples(params, &set.samples)?;
    let samples = &set.samples;
    let chunks = lane_chunks(params, samples);
    let out = forward_with_chunks(&chunks, samples, exec);
    let loss = loss_from_outputs(&out, set);
    let w = samples.cell_volume;
    let werr: Vec<f64> = out.iter().zip(&set.targets).map(|(o, t)| w * (o - t)).collect();

    let d = params.dim();
    let n = params.width();
    let n_blocks = samples.len().div_ceil(BLOCK);
    let chunks_per_task = NEURON_TASK / LANES;
    let mut gw = vec![0.0; n.div_ceil(LANES) * LANES * d];
    let mut gb = vec![0.0; n.div_ceil(LANES) * LANES];
    let has_bias = params.has_bias;
    exec.chunks2_mut(&mut gw, NEURON_TASK * d, &mut gb, NEURON_TASK, |task, gw_t, gb_t| {
        for (ci, chunk) in chunks
            .iter()
            .skip(task * chunks_per_task)
            .take(chunks_per_task)
            .enumerate()
        {
            let mut acc_b = [0.0f64; LANES];
            let mut acc_w = vec![[0.0f64; LANES]; d];
            for b in 0..n_blocks {
                let f0 = b * BLOCK;
                let len = BLOCK.min(samples.len() - f0);
                let errs = &werr[f0..f0 + len];
                let xs = &samples.points[f0 * d..(f0 + len) * d];
                walk_block(samples, chunk, f0, len, |t, re, _im| {
                    let e = errs[t];
                    for l in 0..LANES {
                        acc_b[l] += e * re[l];
                    }
                    for a in 0..d {
                        let ex = e * xs[t * d + a];
                        let row = &mut acc_w[a];
                        for l in 0..LANES {
                            row[l] += ex * re[l];
                        }
                    }
                });
            }
            for l in 0..LANES {
                let local = ci * LANES + l;
                if local >= gb_t.len() {
                    break;
                }
                gb_t[local] = if has_bias { chunk.coef[l] * acc_b[l] } else { 0.0 };
                for a in 0..d {
                    gw_t[local * d + a] = chunk.coef[l] * chunk.alpha[l] * acc_w[a][l];
                }
            }
        }
    });
    gw.truncate(n * d);
    gb.truncate(n);
    Ok(Gradient {
        weights: gw,
        biases: gb,
        loss,
    })
}

fn apply_gradient(params: &mut NetworkParams, grad: &Gradient, tau: f64) {
    for (w, g) in params.weights.iter_mut().zip(&grad.weights) {
        *w -= tau * g;
    }
    if params.has_bias {
        for (b, g) in params.biases.iter_mut().zip(&grad.biases) {
            *b -= tau * g;
        }
    }
}

/// `θ ← θ − τ∇L(θ)` on the full batch.
pub fn grad_step(params: &NetworkParams, set: &TrainingSet, tau: f64, exec: Exec) -> Result<NetworkParams> {
    if !(tau.is_finite() && tau > 0.0) {
        return Err(invalid(format!("learning rate must be positive, got {tau}")));
    }
    let grad = loss_and_gradient(params, set, exec)?;
    let mut next = params.clone();
    apply_gradient(&mut next, &grad, tau);
    Ok(next)
}

/// Settings for [`train`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub num_samples: usize,
    pub domain_beta: f64,
    pub seed: u64,
    pub snapshot_epochs: Vec<usize>,
    /// Draw i.i.d. uniform samples instead of the midpoint grid.
    pub random_sampling: bool,
    pub exec: Exec,
}

impl TrainConfig {
    fn validate(&self) -> Result<()> {
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(invalid("learning rate must be positive"));
        }
        if self.num_samples < 2 {
            return Err(invalid("at least two training samples are required"));
        }
        if !(self.domain_beta.is_finite() && self.domain_beta > 0.0) {
            return Err(invalid("domain half-width must be positive"));
        }
        Ok(())
    }

    /// Training inputs: `num_samples` grid midpoints in 1-D; in `d` dimensions
    /// the grid has `round(num_samples^{1/d})` points per axis.
    pub fn sample_set(&self, dim: usize) -> Result<SampleSet> {
        self.validate()?;
        if self.random_sampling {
            return SampleSet::random_uniform(dim, self.domain_beta, self.num_samples, self.seed);
        }
        let per_axis = (self.num_samples as f64).powf(1.0 / dim as f64).round().max(2.0) as usize;
        SampleSet::uniform_grid(dim, self.domain_beta, per_axis)
    }
}

#[derive(Debug, Clone)]
pub struct TrainRecord {
    pub epoch: usize,
    pub params: NetworkParams,
    pub loss: f64,
}

/// Snapshots (always including epoch 0) and the loss after every epoch.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub snapshots: Vec<TrainRecord>,
    /// `losses[m]` is the loss after `m` updates.
    pub losses: Vec<f64>,
}

/// Full-batch gradient descent from `params` towards `target`.
pub fn train(params: &NetworkParams, target: &dyn Fn(&[f64]) -> f64, config: &TrainConfig) -> Result<Trajectory> {
    let samples = config.sample_set(params.dim())?;
    let set = TrainingSet::from_fn(samples, target);
    train_on(params, &set, config)
}

/// [`train`] on a prepared training set.
pub fn train_on(params: &NetworkParams, set: &TrainingSet, config: &TrainConfig) -> Result<Trajectory> {
    config.validate()?;
    let mut current = params.clone();
    let mut losses = Vec::with_capacity(config.epochs + 1);
    let mut snapshots = Vec::new();
    for epoch in 0..config.epochs {
        let grad = loss_and_gradient(&current, set, config.exec)?;
        if !grad.loss.is_finite() {
            return Err(Error::Numerical(format!(
                "non-finite loss at epoch {epoch} (learning rate {})",
                config.learning_rate
            )));
        }
        losses.push(grad.loss);
        if epoch == 0 || config.snapshot_epochs.contains(&epoch) {
            snapshots.push(TrainRecord {
                epoch,
                params: current.clone(),
                loss: grad.loss,
            });
        }
        apply_gradient(&mut current, &grad, config.learning_rate);
    }
    let final_loss = loss(&current, set, config.exec)?;
    if !final_loss.is_finite() {
        return Err(Error::Numerical(format!(
            "non-finite loss after {} epochs",
            config.epochs
        )));
    }
    losses.push(final_loss);
    if config.epochs == 0 || config.snapshot_epochs.contains(&config.epochs) {
        snapshots.push(TrainRecord {
            epoch: config.epochs,
            params: current,
            loss: final_loss,
        });
    }
    Ok(Trajectory { snapshots, losses })
}

const SNAPSHOT_FORMAT: &str = "mscale-params-v1";

/// JSON descriptor written next to the raw parameter dump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotDescriptor {
    pub format: String,
    pub alphas: Vec<f64>,
    pub dim: usize,
    pub width_per_scale: usize,
    pub neurons: usize,
    pub has_bias: bool,
    pub seed: u64,
    pub epoch: Option<usize>,
    /// File name of the little-endian `f64` dump: all of `θ` (row-major), then `b`.
    pub data_file: String,
}

/// Writes `<stem>.json` and `<stem>.bin` into `dir`; returns both paths.
pub fn save_params(
    params: &NetworkParams,
    dir: &Path,
    stem: &str,
    epoch: Option<usize>,
) -> Result<(PathBuf, PathBuf)> {
    fs::create_dir_all(dir)?;
    let bin = dir.join(format!("{stem}.bin"));
    let json = dir.join(format!("{stem}.json"));
    let mut f = fs::File::create(&bin)?;
    let mut buf = Vec::with_capacity(8 * (params.weights.len() + params.biases.len()));
    for v in params.weights.iter().chain(&params.biases) {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    f.write_all(&buf)?;
    let desc = SnapshotDescriptor {
        format: SNAPSHOT_FORMAT.to_string(),
        alphas: params.spec.alphas().to_vec(),
        dim: params.dim(),
        width_per_scale: params.width_per_scale,
        neurons: params.width(),
        has_bias: params.has_bias,
        seed: params.seed,
        epoch,
        data_file: format!("{stem}.bin"),
    };
    fs::write(&json, serde_json::to_string_pretty(&desc)?)?;
    Ok((json, bin))
}

/// Reads a snapshot written by [`save_params`].
pub fn load_params(descriptor: &Path) -> Result<(NetworkParams, SnapshotDescriptor)> {
    let desc: SnapshotDescriptor = serde_json::from_str(&fs::read_to_string(descriptor)?)?;
    if desc.format != SNAPSHOT_FORMAT {
        return Err(invalid(format!("unknown snapshot format {}", desc.format)));
    }
    let dir = descriptor.parent().unwrap_or_else(|| Path::new("."));
    let mut raw = Vec::new();
    fs::File::open(dir.join(&desc.data_file))?.read_to_end(&mut raw)?;
    let expected = desc.neurons * (desc.dim + 1) * 8;
    if raw.len() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            got: raw.len(),
        });
    }
    let values: Vec<f64> = raw
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    let (w, b) = values.split_at(desc.neurons * desc.dim);
    let spec = ScaleSpec::new(desc.alphas.clone(), desc.dim)?;
    let params = NetworkParams::new(
        spec,
        desc.width_per_scale,
        w.to_vec(),
        b.to_vec(),
        desc.has_bias,
        desc.seed,
    )?;
    Ok((params, desc))
}
