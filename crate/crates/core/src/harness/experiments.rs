//! Drivers for the four experiments. Each is a pure function of its config.

use std::path::Path;

use num_complex::Complex64;

use super::config::{Experiment, ExperimentConfig};
use super::plot::{LinePlot, Series};
use super::report::{
    write_report, BandRecord, DiscrepancyRecord, DriftRecord, EnergyPoint, ExperimentReport,
    HalfLifePoint, NtkSummary, RunSummary, Sink,
};
use crate::error::{Error, Result};
use crate::hermite::HermiteBasis;
use crate::net::{forward_batch, init_params, save_params, train, NetworkParams, SampleSet, TrainConfig};
use crate::ntk::{angle_grid, kernel_vs_angle, sup_relative_error, KernelSample, KernelSource};
use crate::spectral::{
    band_energy, energy, evaluate_spectral, project_initial, FnSpectrum, Indicator, Projection,
    SpectralOperator, SpectralState, Spectrum, Stepper,
};
use crate::xform::{error_hat, hermite_to_physical, network_hat, target_hat, FrequencyProfile, TargetSpec};

/// Half-width of the smoothing window used for the half-life band.
pub const HALF_LIFE_WINDOW: f64 = 0.25;

/// Runs the configured experiment and writes `report.json` next to its outputs.
pub fn run(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let mut sink = Sink::new(Path::new(&config.output_dir))?;
    let mut report = ExperimentReport::new(config);
    sink.text("config.toml", &config.to_toml_string()?)?;
    match config.experiment {
        Experiment::Simulate => simulate(config, &mut sink, &mut report)?,
        Experiment::TrainCompare => train_compare(config, &mut sink, &mut report)?,
        Experiment::BiasCompare => bias_compare(config, &mut sink, &mut report)?,
        Experiment::NtkStudy => ntk_study(config, &mut sink, &mut report)?,
    }
    let root = sink.root().to_path_buf();
    report.files = sink.into_files();
    write_report(&root, &report)?;
    Ok(report)
}

pub fn run_simulate(config: &ExperimentConfig) -> Result<ExperimentReport> {
    expect(config, Experiment::Simulate)?;
    run(config)
}

pub fn run_train_compare(config: &ExperimentConfig) -> Result<ExperimentReport> {
    expect(config, Experiment::TrainCompare)?;
    run(config)
}

pub fn run_bias_compare(config: &ExperimentConfig) -> Result<ExperimentReport> {
    expect(config, Experiment::BiasCompare)?;
    run(config)
}

pub fn run_ntk_study(config: &ExperimentConfig) -> Result<ExperimentReport> {
    expect(config, Experiment::NtkStudy)?;
    run(config)
}

fn expect(config: &ExperimentConfig, e: Experiment) -> Result<()> {
    if config.experiment != e {
        return Err(Error::Config(format!(
            "config describes `{}`, not `{}`",
            config.experiment.name(),
            e.name()
        )));
    }
    Ok(())
}

const FREQ_HEADER: [&str; 6] = [
    "t",
    "xi",
    "eta_real_model",
    "eta_imag_model",
    "eta_real_train",
    "eta_imag_train",
];
const PHYS_HEADER: [&str; 6] = [
    "t",
    "x",
    "eta_real_model",
    "eta_imag_model",
    "eta_real_train",
    "eta_imag_train",
];

fn header(cols: &[&str]) -> Vec<String> {
    cols.iter().map(|s| s.to_string()).collect()
}

fn step_count(t: f64, dt: f64) -> usize {
    (t / dt).round() as usize
}

fn profile_rows(rows: &mut Vec<Vec<Option<f64>>>, t: f64, model: &FrequencyProfile, train: Option<&FrequencyProfile>) {
    for i in 0..model.len() {
        rows.push(vec![
            Some(t),
            Some(model.xi[i]),
            Some(model.real[i]),
            Some(model.imag[i]),
            train.map(|p| p.real[i]),
            train.map(|p| p.imag[i]),
        ]);
    }
}

fn curve(xs: &[f64], ys: &[f64]) -> Vec<(f64, f64)> {
    xs.iter().copied().zip(ys.iter().copied()).collect()
}

fn trapezoid(x: &[f64], f: impl Fn(usize) -> f64) -> f64 {
    x.windows(2)
        .enumerate()
        .map(|(i, w)| 0.5 * (w[1] - w[0]) * (f(i) + f(i + 1)))
        .sum()
}

/// `(lo, hi)` pairs from the edges, the last one unbounded.
fn bands(edges: &[f64]) -> Vec<(f64, Option<f64>)> {
    let mut out: Vec<(f64, Option<f64>)> = edges.windows(2).map(|w| (w[0], Some(w[1]))).collect();
    out.push((*edges.last().unwrap(), None));
    out
}

fn band_energies(state: &SpectralState, basis: &HermiteBasis, edges: &[f64]) -> Result<Vec<f64>> {
    bands(edges)
        .iter()
        .map(|&(lo, hi)| band_energy(state, basis, lo, hi.unwrap_or(f64::INFINITY)))
        .collect()
}

fn band_records(t: f64, edges: &[f64], now: &[f64], initial: &[f64]) -> Vec<BandRecord> {
    bands(edges)
        .iter()
        .zip(now.iter().zip(initial))
        .map(|(&(lo, hi), (&e, &e0))| BandRecord {
            t,
            lo,
            hi,
            energy: e,
            fraction: if e0 > 0.0 { e / e0 } else { 0.0 },
        })
        .collect()
}

fn band_label(lo: f64, hi: Option<f64>) -> String {
    match hi {
        Some(h) => format!("[{lo}, {h}]"),
        None => format!("[{lo}, inf)"),
    }
}

/// Steps `n_steps` times, calling `capture` at the requested step indices and
/// recording energy every `stride` steps.
fn evolve<F>(
    stepper: &Stepper,
    initial: SpectralState,
    n_steps: usize,
    stride: usize,
    captures: &[usize],
    mut capture: F,
) -> Result<Vec<EnergyPoint>>
where
    F: FnMut(usize, &SpectralState) -> Result<()>,
{
    let mut state = initial;
    let mut trace = Vec::new();
    for k in 0..=n_steps {
        if k % stride == 0 || k == n_steps {
            let e = energy(&state);
            if !e.is_finite() {
                return Err(Error::Numerical(format!("non-finite energy at step {k}")));
            }
            trace.push(EnergyPoint {
                t: k as f64 * stepper.dt(),
                energy: e,
            });
        }
        if captures.contains(&k) {
            capture(k, &state)?;
        }
        if k < n_steps {
            state = stepper.step(&state);
        }
    }
    Ok(trace)
}

/// Largest `ξ_h` on the grid such that the windowed amplitude ratio
/// `(∫|η̂_t|² / ∫|η̂_0|²)^{1/2}` is at most ½ at every `|ξ| ≤ ξ_h`.
/// Grid points where the initial error carries no energy are skipped.
pub fn half_life_xi(initial: &FrequencyProfile, current: &FrequencyProfile, window: f64) -> Result<f64> {
    if initial.xi != current.xi || initial.is_empty() {
        return Err(Error::InvalidArgument("profiles must share a non-empty grid".into()));
    }
    let xi = &initial.xi;
    let sq = |p: &FrequencyProfile, i: usize| p.real[i] * p.real[i] + p.imag[i] * p.imag[i];
    let ratio = |c: usize| {
        let (mut e0, mut et) = (0.0, 0.0);
        for j in 0..xi.len() {
            if (xi[j] - xi[c]).abs() <= window {
                e0 += sq(initial, j);
                et += sq(current, j);
            }
        }
        if e0 > 0.0 {
            Some((et / e0).sqrt())
        } else {
            None
        }
    };
    let mut order: Vec<usize> = (0..xi.len()).collect();
    order.sort_by(|&a, &b| xi[a].abs().total_cmp(&xi[b].abs()));
    let mut reached = 0.0;
    for i in order {
        match ratio(i) {
            Some(r) if r > 0.5 => break,
            _ => reached = xi[i].abs(),
        }
    }
    Ok(reached)
}

fn initial_error<'a>(params: &'a NetworkParams, target: &TargetSpec) -> impl Spectrum + 'a {
    let target = *target;
    FnSpectrum(move |xi: f64| {
        network_hat(xi, params, target.beta).unwrap_or(Complex64::new(f64::NAN, f64::NAN)) - target_hat(xi, &target)
    })
}

fn project(basis: &HermiteBasis, f: &dyn Spectrum, config: &ExperimentConfig, label: &str, report: &mut ExperimentReport) -> Result<Projection> {
    let proj = project_initial(basis, f, config.exec)?;
    if proj.resolution_warning {
        report.warnings.push(format!(
            "{label}: top-decile Hermite coefficients carry {:.1}% of the norm; increase p or adjust lambda",
            100.0 * proj.tail_fraction
        ));
    }
    Ok(proj)
}

fn simulate(config: &ExperimentConfig, sink: &mut Sink, report: &mut ExperimentReport) -> Result<()> {
    let basis = config.basis()?;
    let xi = config.xi_grid();
    let dt = config.dt;
    let n_steps = step_count(config.t_end, dt);
    let captures: Vec<usize> = config
        .snapshot_times
        .iter()
        .map(|&t| step_count(t, dt))
        .filter(|&k| k > 0)
        .collect();
    let indicator = Indicator {
        half_width: config.indicator_half_width,
        value: Complex64::new(config.indicator_value, 0.0),
    };
    let mut energy_plot = LinePlot::new("Error energy", "t", "energy").log_y();
    for &s in &config.scale_list {
        let label = format!("s={s}");
        let spec = config.scale_spec(s, 1)?;
        let op = SpectralOperator::assemble(basis, &spec, config.exec)?;
        let stepper = op.stepper(dt)?;
        let proj = project(&basis, &indicator, config, &label, report)?;
        let e0 = band_energies(&proj.state, &basis, &config.band_edges)?;
        let mut run = RunSummary {
            label: label.clone(),
            scales: s,
            lambda: basis.lambda(),
            p: basis.order(),
            projection_tail: proj.tail_fraction,
            bands: band_records(0.0, &config.band_edges, &e0, &e0),
            energy: Vec::new(),
            half_life: Vec::new(),
        };
        let mut rows = Vec::new();
        let mut freq_plot = LinePlot::new(format!("Real part of the error, {label}"), "xi", "Re eta");
        let p0 = evaluate_spectral(&proj.state, &basis, &xi, config.exec);
        profile_rows(&mut rows, 0.0, &p0, None);
        freq_plot.push(Series::new("t=0", curve(&xi, &p0.real)));
        let mut bands = Vec::new();
        let trace = evolve(&stepper, proj.state.clone(), n_steps, config.energy_stride, &captures, |k, st| {
            let t = k as f64 * dt;
            let p = evaluate_spectral(st, &basis, &xi, config.exec);
            profile_rows(&mut rows, t, &p, None);
            freq_plot.push(Series::new(format!("t={t}"), curve(&xi, &p.real)));
            let e = band_energies(st, &basis, &config.band_edges)?;
            bands.extend(band_records(t, &config.band_edges, &e, &e0));
            Ok(())
        })?;
        run.bands.extend(bands);
        energy_plot.push(Series::new(label.clone(), trace.iter().map(|p| (p.t, p.energy)).collect()));
        run.energy = trace;
        sink.csv(&format!("freq_s{s}.csv"), &header(&FREQ_HEADER), &rows)?;
        sink.svg(&format!("freq_s{s}.svg"), &freq_plot)?;
        report.runs.push(run);
    }
    sink.svg("energy.svg", &energy_plot)?;
    band_fraction_plot(config, sink, report)?;
    Ok(())
}

fn band_fraction_plot(config: &ExperimentConfig, sink: &mut Sink, report: &ExperimentReport) -> Result<()> {
    let mut plot = LinePlot::new("Band energy fraction", "t", "E_band(t) / E_band(0)").log_y();
    for run in &report.runs {
        for (b, &(lo, hi)) in bands(&config.band_edges).iter().enumerate() {
            let pts: Vec<(f64, f64)> = run
                .bands
                .iter()
                .filter(|r| r.lo == lo && r.hi == hi)
                .map(|r| (r.t, r.fraction))
                .collect();
            let series = Series::new(format!("{} {}", run.label, band_label(lo, hi)), pts);
            plot.push(if b % 2 == 1 { series.dashed() } else { series });
        }
    }
    sink.svg("band_fractions.svg", &plot)
}

fn physical_error(params: &NetworkParams, target: &TargetSpec, x: &[f64], config: &ExperimentConfig) -> Result<Vec<f64>> {
    let samples = SampleSet::scattered(1, x.to_vec(), 1.0)?;
    let out = forward_batch(params, &samples, config.exec)?;
    Ok(out.iter().zip(x).map(|(o, &v)| o - target.value(v)).collect())
}

fn pick_three<T: Copy>(items: &[T]) -> Vec<T> {
    match items.len() {
        0..=3 => items.to_vec(),
        n => vec![items[0], items[n / 2], items[n - 1]],
    }
}

fn train_compare(config: &ExperimentConfig, sink: &mut Sink, report: &mut ExperimentReport) -> Result<()> {
    let s = config.scales;
    let spec = config.scale_spec(s, 1)?;
    let q = ExperimentConfig::per_scale(config.width, s)?;
    let target = TargetSpec::new(config.a, config.b, config.beta)?;
    let ratio = config.learning_rate / config.dt;
    let steps_per_epoch = ratio.round();
    if steps_per_epoch < 1.0 || (ratio - steps_per_epoch).abs() > 1e-9 * ratio {
        return Err(Error::Config(format!(
            "learning_rate ({}) must be a positive integer multiple of dt ({})",
            config.learning_rate, config.dt
        )));
    }
    let steps_per_epoch = steps_per_epoch as usize;

    let params0 = init_params(&spec, q, config.seed, true)?;
    let train_cfg = TrainConfig {
        learning_rate: config.learning_rate,
        epochs: config.epochs,
        num_samples: config.samples,
        domain_beta: config.beta,
        seed: config.seed,
        snapshot_epochs: config.snapshot_epochs.clone(),
        random_sampling: config.random_sampling,
        exec: config.exec,
    };
    let traj = train(&params0, &|x: &[f64]| target.value(x[0]), &train_cfg)?;

    let basis = config.basis()?;
    let op = SpectralOperator::assemble(basis, &spec, config.exec)?;
    let stepper = op.stepper(config.dt)?;
    let label = format!("s={s}");
    let proj = project(&basis, &initial_error(&params0, &target), config, &label, report)?;

    let xi = config.xi_grid();
    let xg = config.x_grid();
    let snaps = &traj.snapshots;
    let captures: Vec<usize> = snaps.iter().map(|r| r.epoch * steps_per_epoch).collect();
    let mut freq_rows = Vec::new();
    let mut phys_rows = Vec::new();
    let mut profiles: Vec<(usize, FrequencyProfile, FrequencyProfile, Vec<f64>, Vec<f64>)> = Vec::new();
    let mut norms0: Option<(f64, f64)> = None;
    let mut discrepancies = Vec::new();
    let n_steps = captures.last().copied().unwrap_or(0);
    let trace = evolve(&stepper, proj.state.clone(), n_steps, config.energy_stride, &captures, |k, st| {
        let idx = captures.iter().position(|&c| c == k).expect("capture index");
        let rec = &snaps[idx];
        let t = rec.epoch as f64 * config.learning_rate;
        let train_p = error_hat(&xi, &rec.params, &target, config.exec)?;
        let model_p = evaluate_spectral(st, &basis, &xi, config.exec);
        let model_x = hermite_to_physical(st, &basis, &xg, config.exec);
        let train_x = physical_error(&rec.params, &target, &xg, config)?;
        let train_x_norm = trapezoid(&xg, |i| train_x[i] * train_x[i]).sqrt();
        let (f0, x0) = *norms0.get_or_insert((train_p.l2_norm(), train_x_norm));
        let phys_diff = trapezoid(&xg, |i| (model_x[i] - Complex64::new(train_x[i], 0.0)).norm_sqr()).sqrt();
        discrepancies.push(DiscrepancyRecord {
            epoch: rec.epoch,
            t,
            freq_relative: model_p.l2_distance(&train_p)? / f0,
            phys_relative: phys_diff / x0,
            model_freq_norm: model_p.l2_norm(),
            train_freq_norm: train_p.l2_norm(),
            model_total_norm: energy(st).sqrt(),
            train_total_norm: (2.0 * rec.loss).sqrt(),
            loss: rec.loss,
        });
        profile_rows(&mut freq_rows, t, &model_p, Some(&train_p));
        for i in 0..xg.len() {
            phys_rows.push(vec![
                Some(t),
                Some(xg[i]),
                Some(model_x[i].re),
                Some(model_x[i].im),
                Some(train_x[i]),
                Some(0.0),
            ]);
        }
        let model_re: Vec<f64> = model_x.iter().map(|z| z.re).collect();
        profiles.push((rec.epoch, model_p, train_p, model_re, train_x));
        Ok(())
    })?;

    let e0 = band_energies(&proj.state, &basis, &config.band_edges)?;
    report.runs.push(RunSummary {
        label,
        scales: s,
        lambda: basis.lambda(),
        p: basis.order(),
        projection_tail: proj.tail_fraction,
        bands: band_records(0.0, &config.band_edges, &e0, &e0),
        energy: trace,
        half_life: Vec::new(),
    });
    report.discrepancies = discrepancies;

    sink.csv("freq.csv", &header(&FREQ_HEADER), &freq_rows)?;
    sink.csv("phys.csv", &header(&PHYS_HEADER), &phys_rows)?;
    let loss_rows: Vec<Vec<Option<f64>>> = traj
        .losses
        .iter()
        .enumerate()
        .map(|(m, &l)| vec![Some(m as f64), Some(l)])
        .collect();
    sink.csv("loss.csv", &header(&["epoch", "loss"]), &loss_rows)?;

    let mut re_plot = LinePlot::new("Real part of the error: model (solid) vs training (dashed)", "xi", "Re eta");
    let mut im_plot = LinePlot::new("Imaginary part of the error: model (solid) vs training (dashed)", "xi", "Im eta");
    let mut x_plot = LinePlot::new("Physical error: model (solid) vs training (dashed)", "x", "eta");
    for i in pick_three(&(0..profiles.len()).collect::<Vec<_>>()) {
        let (epoch, model_p, train_p, model_x, train_x) = &profiles[i];
        re_plot.push(Series::new(format!("model m={epoch}"), curve(&xi, &model_p.real)));
        re_plot.push(Series::new(format!("train m={epoch}"), curve(&xi, &train_p.real)).dashed());
        im_plot.push(Series::new(format!("model m={epoch}"), curve(&xi, &model_p.imag)));
        im_plot.push(Series::new(format!("train m={epoch}"), curve(&xi, &train_p.imag)).dashed());
        x_plot.push(Series::new(format!("model m={epoch}"), curve(&xg, model_x)));
        x_plot.push(Series::new(format!("train m={epoch}"), curve(&xg, train_x)).dashed());
    }
    sink.svg("freq_real.svg", &re_plot)?;
    sink.svg("freq_imag.svg", &im_plot)?;
    sink.svg("phys.svg", &x_plot)?;
    let mut d_plot = LinePlot::new("Relative model-training discrepancy", "epoch", "relative L2").log_y();
    d_plot.push(Series::new(
        "frequency",
        report.discrepancies.iter().map(|d| (d.epoch as f64, d.freq_relative)).collect(),
    ));
    d_plot.push(Series::new(
        "physical",
        report.discrepancies.iter().map(|d| (d.epoch as f64, d.phys_relative)).collect(),
    ).dashed());
    sink.svg("discrepancy.svg", &d_plot)?;
    let mut l_plot = LinePlot::new("Training loss", "epoch", "loss").log_y();
    l_plot.push(Series::new("loss", loss_rows.iter().map(|r| (r[0].unwrap(), r[1].unwrap())).collect()));
    sink.svg("loss.svg", &l_plot)?;

    for rec in [snaps.first(), snaps.last()].into_iter().flatten() {
        let stem = format!("params_epoch{}", rec.epoch);
        save_params(&rec.params, sink.root(), &stem, Some(rec.epoch))?;
        sink.register(&format!("{stem}.json"));
        sink.register(&format!("{stem}.bin"));
    }
    Ok(())
}

fn bias_compare(config: &ExperimentConfig, sink: &mut Sink, report: &mut ExperimentReport) -> Result<()> {
    let basis = config.basis()?;
    let xi = config.xi_grid();
    let dt = config.dt;
    let target = TargetSpec::new(config.a, config.b, config.beta)?;
    let n_steps = step_count(config.t_end, dt);
    let captures: Vec<usize> = config
        .snapshot_times
        .iter()
        .map(|&t| step_count(t, dt))
        .filter(|&k| k > 0)
        .collect();
    let mut hl_plot = LinePlot::new("Half-life band edge", "t", "xi_h");
    for &s in &config.scale_list {
        let label = format!("s={s}");
        let spec = config.scale_spec(s, 1)?;
        let q = ExperimentConfig::per_scale(config.width, s)?;
        let params0 = init_params(&spec, q, config.seed, true)?;
        let op = SpectralOperator::assemble(basis, &spec, config.exec)?;
        let stepper = op.stepper(dt)?;
        let proj = project(&basis, &initial_error(&params0, &target), config, &label, report)?;
        let e0 = band_energies(&proj.state, &basis, &config.band_edges)?;
        let p0 = evaluate_spectral(&proj.state, &basis, &xi, config.exec);
        let mut rows = Vec::new();
        profile_rows(&mut rows, 0.0, &p0, None);
        let mut plot = LinePlot::new(format!("Error magnitude, {label}"), "xi", "|eta|");
        let abs = |p: &FrequencyProfile| -> Vec<f64> { p.real.iter().zip(&p.imag).map(|(r, i)| r.hypot(*i)).collect() };
        plot.push(Series::new("t=0", curve(&xi, &abs(&p0))));
        let mut band_recs = band_records(0.0, &config.band_edges, &e0, &e0);
        let mut half_life = Vec::new();
        let trace = evolve(&stepper, proj.state.clone(), n_steps, config.energy_stride, &captures, |k, st| {
            let t = k as f64 * dt;
            let p = evaluate_spectral(st, &basis, &xi, config.exec);
            profile_rows(&mut rows, t, &p, None);
            plot.push(Series::new(format!("t={t}"), curve(&xi, &abs(&p))));
            let e = band_energies(st, &basis, &config.band_edges)?;
            band_recs.extend(band_records(t, &config.band_edges, &e, &e0));
            half_life.push(HalfLifePoint {
                t,
                xi_half: half_life_xi(&p0, &p, HALF_LIFE_WINDOW)?,
            });
            Ok(())
        })?;
        hl_plot.push(Series::new(label.clone(), half_life.iter().map(|h| (h.t, h.xi_half)).collect()));
        sink.csv(&format!("freq_s{s}.csv"), &header(&FREQ_HEADER), &rows)?;
        sink.svg(&format!("freq_s{s}.svg"), &plot)?;
        report.runs.push(RunSummary {
            label,
            scales: s,
            lambda: basis.lambda(),
            p: basis.order(),
            projection_tail: proj.tail_fraction,
            bands: band_recs,
            energy: trace,
            half_life,
        });
    }
    sink.svg("half_life.svg", &hl_plot)?;
    band_fraction_plot(config, sink, report)?;
    Ok(())
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Fitting target for kernel-drift runs: `sin(aπx_1) + cos(bπx_2)`.
pub fn ntk_target(a: f64, b: f64) -> impl Fn(&[f64]) -> f64 {
    use std::f64::consts::PI;
    move |x: &[f64]| (a * PI * x[0]).sin() + (b * PI * x[x.len().min(2) - 1]).cos()
}

fn ntk_study(config: &ExperimentConfig, sink: &mut Sink, report: &mut ExperimentReport) -> Result<()> {
    if config.dim < 2 {
        return Err(Error::Config("ntk_study needs dim >= 2 for the angle sweep".into()));
    }
    let s = config.scales;
    let spec = config.scale_spec(s, config.dim)?;
    let angles = angle_grid(config.angle_points)?;
    let limit = kernel_vs_angle(KernelSource::Limit(&spec), true, &angles, config.exec)?;
    let values = |c: &[KernelSample]| -> Vec<f64> { c.iter().map(|k| k.value).collect() };

    let mut cols = vec![values(&limit)];
    let mut names = vec!["angle".to_string(), "limit".to_string()];
    let mut plot = LinePlot::new(format!("NTK vs angle (d={}, s={s})", config.dim), "angle", "kernel");
    plot.push(Series::new("limit", curve(&angles, &values(&limit))));
    let mut sup_errors = Vec::new();
    for &width in &config.ntk_widths {
        let q = ExperimentConfig::per_scale(width, s)?;
        let mut errs = Vec::new();
        for k in 0..config.ntk_seeds {
            let params = init_params(&spec, q, config.seed + k as u64, true)?;
            let c = kernel_vs_angle(KernelSource::Empirical(&params), true, &angles, config.exec)?;
            errs.push(sup_relative_error(&c, &limit)?);
            if k == 0 {
                plot.push(Series::new(format!("N={width}"), curve(&angles, &values(&c))).dashed());
                names.push(format!("width_{width}"));
                cols.push(values(&c));
            }
        }
        sup_errors.push(errs);
    }
    let rows: Vec<Vec<Option<f64>>> = (0..angles.len())
        .map(|i| std::iter::once(Some(angles[i])).chain(cols.iter().map(|c| Some(c[i]))).collect())
        .collect();
    sink.csv("ntk_angle.csv", &names, &rows)?;
    sink.svg("ntk_angle.svg", &plot)?;
    let median_errors = sup_errors.iter().map(|e| median(e)).collect();

    let mut drift = Vec::new();
    if config.ntk_train && !config.ntk_epochs.is_empty() {
        let target = ntk_target(config.a, config.b);
        for &width in &config.ntk_train_widths {
            let q = ExperimentConfig::per_scale(width, s)?;
            let params0 = init_params(&spec, q, config.seed, true)?;
            let cfg = TrainConfig {
                learning_rate: config.ntk_learning_rate,
                epochs: *config.ntk_epochs.last().unwrap(),
                num_samples: config.ntk_samples,
                domain_beta: config.beta,
                seed: config.seed,
                snapshot_epochs: config.ntk_epochs.clone(),
                random_sampling: config.random_sampling,
                exec: config.exec,
            };
            let traj = train(&params0, &target, &cfg)?;
            let mut names = vec!["angle".to_string()];
            let mut cols = Vec::new();
            let mut plot = LinePlot::new(format!("NTK during training, N={width}"), "angle", "kernel");
            let mut base: Option<Vec<KernelSample>> = None;
            for rec in &traj.snapshots {
                let c = kernel_vs_angle(KernelSource::Empirical(&rec.params), true, &angles, config.exec)?;
                let series = Series::new(format!("epoch {}", rec.epoch), curve(&angles, &values(&c)));
                plot.push(if rec.epoch == 0 { series } else { series.dashed() });
                names.push(format!("epoch_{}", rec.epoch));
                cols.push(values(&c));
                match &base {
                    None => base = Some(c),
                    Some(b) => drift.push(DriftRecord {
                        width,
                        epoch: rec.epoch,
                        drift: sup_relative_error(&c, b)?,
                        loss: rec.loss,
                    }),
                }
            }
            let rows: Vec<Vec<Option<f64>>> = (0..angles.len())
                .map(|i| std::iter::once(Some(angles[i])).chain(cols.iter().map(|c| Some(c[i]))).collect())
                .collect();
            sink.csv(&format!("ntk_train_w{width}.csv"), &names, &rows)?;
            sink.svg(&format!("ntk_train_w{width}.svg"), &plot)?;
        }
        let rows: Vec<Vec<Option<f64>>> = drift
            .iter()
            .map(|d| vec![Some(d.width as f64), Some(d.epoch as f64), Some(d.drift), Some(d.loss)])
            .collect();
        sink.csv("ntk_drift.csv", &header(&["width", "epoch", "drift", "loss"]), &rows)?;
    }
    report.ntk = Some(NtkSummary {
        widths: config.ntk_widths.clone(),
        sup_errors,
        median_errors,
        drift,
    });
    Ok(())
}
