use std::fs;
use std::path::Path;
use std::process::Command;

use mscale_lab::harness::experiments::{half_life_xi, HALF_LIFE_WINDOW};
use mscale_lab::harness::{run, Experiment, ExperimentConfig, ExperimentReport, Profile};
use mscale_lab::net::load_params;

fn small(experiment: Experiment, out: &Path) -> ExperimentConfig {
    let mut c = ExperimentConfig::preset(experiment, Profile::Ci);
    c.output_dir = out.to_string_lossy().into_owned();
    match experiment {
        Experiment::Simulate => {
            c.p = 40;
            c.t_end = 0.5;
            c.snapshot_times = vec![0.1, 0.5];
        }
        Experiment::TrainCompare => {
            c.p = 80;
            c.width = 80;
            c.samples = 400;
            c.epochs = 20;
            c.snapshot_epochs = vec![0, 10, 20];
        }
        Experiment::BiasCompare => {
            c.p = 60;
            c.width = 120;
            c.t_end = 0.2;
            c.snapshot_times = vec![0.1, 0.2];
        }
        Experiment::NtkStudy => {
            c.ntk_widths = vec![40, 400];
            c.ntk_seeds = 2;
            c.angle_points = 31;
            c.ntk_train_widths = vec![40];
            c.ntk_epochs = vec![5, 10];
            c.ntk_samples = 125;
        }
    }
    c
}

fn check_manifest(dir: &Path, report: &ExperimentReport) {
    assert!(!report.files.is_empty());
    for f in &report.files {
        let path = dir.join(f);
        assert!(path.exists(), "{f} missing");
        match path.extension().and_then(|e| e.to_str()) {
            Some("csv") => {
                let mut r = csv::Reader::from_path(&path).unwrap();
                let width = r.headers().unwrap().len();
                let mut rows = 0;
                for rec in r.records() {
                    let rec = rec.unwrap();
                    assert_eq!(rec.len(), width);
                    for cell in rec.iter().filter(|c| !c.is_empty()) {
                        cell.parse::<f64>().unwrap();
                    }
                    rows += 1;
                }
                assert!(rows > 0, "{f} is empty");
            }
            Some("svg") => {
                let text = fs::read_to_string(&path).unwrap();
                assert!(text.starts_with("<svg") && text.trim_end().ends_with("</svg>"));
            }
            Some("json") => {
                load_params(&path).unwrap();
            }
            Some("toml") => {
                let text = fs::read_to_string(&path).unwrap();
                ExperimentConfig::from_toml_str(&text, report.experiment, Profile::Ci).unwrap();
            }
            Some("bin") => {}
            other => panic!("unexpected output {f} ({other:?})"),
        }
    }
    let back = ExperimentReport::load(&dir.join("report.json")).unwrap();
    assert_eq!(&back, report);
}

#[test]
fn every_experiment_writes_a_consistent_manifest() {
    for e in [
        Experiment::Simulate,
        Experiment::TrainCompare,
        Experiment::BiasCompare,
        Experiment::NtkStudy,
    ] {
        let dir = tempfile::tempdir().unwrap();
        let report = run(&small(e, dir.path())).unwrap();
        check_manifest(dir.path(), &report);
    }
}

fn csv_bytes(dir: &Path, report: &ExperimentReport) -> Vec<(String, Vec<u8>)> {
    report
        .files
        .iter()
        .filter(|f| !f.ends_with(".toml"))
        .map(|f| (f.clone(), fs::read(dir.join(f)).unwrap()))
        .collect()
}

#[test]
fn reruns_and_config_echo_are_byte_identical() {
    for e in [Experiment::BiasCompare, Experiment::TrainCompare] {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let c = tempfile::tempdir().unwrap();
        let ra = run(&small(e, a.path())).unwrap();
        let rb = run(&small(e, b.path())).unwrap();
        assert_eq!(csv_bytes(a.path(), &ra), csv_bytes(b.path(), &rb));
        // re-run from the echoed config
        let text = fs::read_to_string(a.path().join("config.toml")).unwrap();
        let mut echoed = ExperimentConfig::from_toml_str(&text, e, Profile::Paper).unwrap();
        echoed.output_dir = c.path().to_string_lossy().into_owned();
        let rc = run(&echoed).unwrap();
        assert_eq!(csv_bytes(a.path(), &ra), csv_bytes(c.path(), &rc));
    }
}

#[test]
fn zero_initial_data_gives_zero_snapshots() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = small(Experiment::Simulate, dir.path());
    c.indicator_value = 0.0;
    let report = run(&c).unwrap();
    for run in &report.runs {
        assert!(run.energy.iter().all(|e| e.energy == 0.0));
    }
    let mut r = csv::Reader::from_path(dir.path().join("freq_s3.csv")).unwrap();
    for rec in r.records() {
        let rec = rec.unwrap();
        assert_eq!(rec[2].parse::<f64>().unwrap(), 0.0);
        assert_eq!(rec[3].parse::<f64>().unwrap(), 0.0);
        assert!(rec[4].is_empty() && rec[5].is_empty());
    }
}

#[test]
fn train_compare_starts_from_the_shared_initial_error() {
    let dir = tempfile::tempdir().unwrap();
    let report = run(&small(Experiment::TrainCompare, dir.path())).unwrap();
    let d0 = &report.discrepancies[0];
    assert_eq!(d0.epoch, 0);
    assert!(d0.freq_relative < 0.01, "{}", d0.freq_relative);
    let (p0, desc) = load_params(&dir.path().join("params_epoch0.json")).unwrap();
    assert_eq!(desc.epoch, Some(0));
    assert_eq!(p0.width(), 80);
}

#[test]
fn single_scale_error_halves_only_near_zero() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = ExperimentConfig::preset(Experiment::BiasCompare, Profile::Ci);
    c.output_dir = dir.path().to_string_lossy().into_owned();
    let report = run(&c).unwrap();
    let at_one = |label: &str| {
        let r = report.runs.iter().find(|r| r.label == label).unwrap();
        r.half_life.iter().find(|h| (h.t - 1.0).abs() < 1e-9).unwrap().xi_half
    };
    let (h0, h3) = (at_one("s=0"), at_one("s=3"));
    assert!(h0 <= 1.0, "s=0 band edge {h0}");
    assert!(h3 > h0, "s=3 band edge {h3} vs {h0}");
}

#[test]
fn half_life_tracks_the_first_halved_window() {
    let xi: Vec<f64> = (0..=200).map(|i| -10.0 + 0.1 * i as f64).collect();
    let ones = vec![1.0; xi.len()];
    let initial = mscale_lab::xform::FrequencyProfile { xi: xi.clone(), real: ones.clone(), imag: vec![0.0; xi.len()] };
    let current = mscale_lab::xform::FrequencyProfile {
        xi: xi.clone(),
        real: xi.iter().map(|x| if x.abs() < 3.0 { 0.1 } else { 1.0 }).collect(),
        imag: vec![0.0; xi.len()],
    };
    let h = half_life_xi(&initial, &current, HALF_LIFE_WINDOW).unwrap();
    assert!((h - 3.0).abs() <= 2.0 * HALF_LIFE_WINDOW, "{h}");
}

fn cli() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mscale-lab"))
}

#[test]
fn cli_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sim");
    let status = cli()
        .args(["simulate", "--p", "30", "--dt", "0.01", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    assert!(out.join("report.json").exists());

    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "dt = -1.0\n").unwrap();
    let status = cli().args(["simulate", "--config"]).arg(&bad).status().unwrap();
    assert_eq!(status.code(), Some(2));

    let status = cli().args(["simulate", "--config"]).arg(dir.path().join("missing.toml")).status().unwrap();
    assert_eq!(status.code(), Some(2));

    let diverge = dir.path().join("diverge.toml");
    fs::write(
        &diverge,
        "learning_rate = 1e300\ndt = 1e300\nwidth = 40\nsamples = 50\nepochs = 30\nsnapshot_epochs = [0]\n",
    )
    .unwrap();
    let status = cli()
        .args(["train-compare", "--config"])
        .arg(&diverge)
        .arg("--out")
        .arg(dir.path().join("tc"))
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(3));
}
