use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use iabsim::experiment::{empirical_ccdf, empirical_median, par_simulate, point_seed};
use iabsim::{emit_plot_script, run, Engine, ExperimentKind, ExperimentSpec, HarnessError};
use iabsim_core::sim::{simulate, SimSettings};
use iabsim_core::{Error as CoreError, NetworkConfig, Scheme};

const PROVENANCE: [&str; 5] = ["config_hash", "engine", "seed", "iterations", "tolerance"];

fn spec(kind: ExperimentKind, dir: &Path, iterations: usize) -> ExperimentSpec {
    let mut s = ExperimentSpec::new(kind, NetworkConfig::baseline());
    s.out_dir = dir.to_path_buf();
    s.iterations = iterations;
    s
}

fn read_dir(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect()
}

fn csv_table(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r.records().map(|x| x.unwrap().iter().map(String::from).collect()).collect();
    (header, rows)
}

fn assert_provenance_tail(header: &[String]) {
    let tail: Vec<&str> = header[header.len() - 5..].iter().map(String::as_str).collect();
    assert_eq!(tail, PROVENANCE);
}

#[test]
fn par_simulate_matches_sequential() {
    let c = NetworkConfig::baseline();
    let settings = SimSettings { with_loads: true, ..SimSettings::default() };
    let a = simulate(&c, &settings, 40, 17).unwrap();
    let b = par_simulate(&c, &settings, 40, 17).unwrap();
    assert_eq!(format!("{a:?}"), format!("{b:?}"));
}

#[test]
fn point_seeds_differ_and_repeat() {
    assert_eq!(point_seed(5, 3), point_seed(5, 3));
    assert_ne!(point_seed(5, 3), point_seed(5, 4));
    assert_ne!(point_seed(5, 3), point_seed(6, 3));
}

#[test]
fn empirical_helpers() {
    let v = [1.0, 2.0, 3.0, 4.0];
    assert_eq!(empirical_ccdf(&v, 2.5), (0.5, 0.25));
    assert_eq!(empirical_ccdf(&v, 4.0).0, 0.0);
    assert_eq!(empirical_median(&v), 2.5);
    assert_eq!(empirical_median(&[3.0, 1.0, 2.0]), 2.0);
}

#[test]
fn reruns_are_byte_identical() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for dir in [a.path(), b.path()] {
        let mut s = spec(ExperimentKind::RateCcdf, dir, 60);
        s.schemes = vec![Scheme::Ira, Scheme::Ora, Scheme::Wb, Scheme::MacroOnly];
        s.grid = vec![1e6, 1e7, 1e8];
        s.dump_realization = true;
        run(&s).unwrap();
        let mut s = spec(ExperimentKind::SweepBias, dir, 30);
        s.grid = vec![0.0, 10.0];
        run(&s).unwrap();
    }
    let (x, y) = (read_dir(a.path()), read_dir(b.path()));
    assert_eq!(x.keys().collect::<Vec<_>>(), y.keys().collect::<Vec<_>>());
    for (name, bytes) in &x {
        assert!(bytes == &y[name], "{name} differs between reruns");
    }
}

#[test]
fn different_seeds_give_different_samples() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let mut s = spec(ExperimentKind::Coverage, a.path(), 80);
    s.engine = Engine::Simulate;
    run(&s).unwrap();
    s.out_dir = b.path().to_path_buf();
    s.seed = 2;
    run(&s).unwrap();
    assert_ne!(fs::read(a.path().join("coverage.csv")).unwrap(), fs::read(b.path().join("coverage.csv")).unwrap());
}

#[test]
fn coverage_run_writes_all_curves_with_provenance() {
    let dir = tempfile::tempdir().unwrap();
    let report = run(&spec(ExperimentKind::Coverage, dir.path(), 60)).unwrap();
    let names: Vec<_> = report.files.iter().map(|p| p.file_name().unwrap().to_string_lossy().into_owned()).collect();
    assert_eq!(names, ["coverage.csv", "coverage.py", "coverage.meta.json"]);
    let (header, rows) = csv_table(&dir.path().join("coverage.csv"));
    assert_provenance_tail(&header);
    assert_eq!(rows.len(), 4 * 31);
    for curve in ["mbs", "sbs", "backhaul", "joint"] {
        assert_eq!(rows.iter().filter(|r| r[0] == curve).count(), 31);
    }
    let analytic = header.iter().position(|h| h == "analytic").unwrap();
    let col: Vec<f64> = rows.iter().filter(|r| r[0] == "mbs").map(|r| r[analytic].parse().unwrap()).collect();
    assert!(col.windows(2).all(|w| w[1] <= w[0] + 1e-12));
    let meta: serde_json::Value =
        serde_json::from_slice(&fs::read(dir.path().join("coverage.meta.json")).unwrap()).unwrap();
    assert_eq!(meta["kind"], "coverage");
    assert_eq!(meta["iterations"], 60);
    assert!(meta["config"].as_str().unwrap().contains("[blockage]"));
}

#[test]
fn analytic_only_rows_leave_simulation_columns_empty() {
    let dir = tempfile::tempdir().unwrap();
    let mut s = spec(ExperimentKind::RateCcdf, dir.path(), 1);
    s.engine = Engine::Analytic;
    s.grid = vec![1e6, 1e7, 1e8];
    run(&s).unwrap();
    let (header, rows) = csv_table(&dir.path().join("rate_ccdf.csv"));
    let col = |name: &str| header.iter().position(|h| h == name).unwrap();
    for r in &rows {
        assert!(r[col("simulated")].is_empty());
        assert!(r[col("seed")].is_empty());
        assert!(!r[col("analytic")].is_empty());
        assert!(!r[col("tolerance")].is_empty());
    }
}

#[test]
fn sweeps_write_one_row_per_point_and_scheme() {
    let dir = tempfile::tempdir().unwrap();
    let mut s = spec(ExperimentKind::SweepDensity, dir.path(), 30);
    s.grid = vec![50.0, 100.0];
    run(&s).unwrap();
    let (header, rows) = csv_table(&dir.path().join("sweep_density.csv"));
    assert_provenance_tail(&header);
    assert_eq!(rows.len(), 2 * 3);
    let star = header.iter().position(|h| h == "eta_star").unwrap();
    assert!(rows.iter().all(|r| !r[star].is_empty()));

    let mut s = spec(ExperimentKind::SweepEta, dir.path(), 30);
    s.grid = vec![0.2, 0.5, 0.8];
    run(&s).unwrap();
    let (_, rows) = csv_table(&dir.path().join("sweep_eta.csv"));
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r[2] == "ora"));
}

#[test]
fn calibration_writes_a_loadable_config() {
    let dir = tempfile::tempdir().unwrap();
    let report = run(&spec(ExperimentKind::Calibrate, dir.path(), 40)).unwrap();
    assert!(report.files.iter().all(|p| p.extension().unwrap() != "py"));
    let (header, rows) = csv_table(&dir.path().join("calibrate.csv"));
    assert_provenance_tail(&header);
    let mu: f64 = rows[0][0].parse().unwrap();
    let loaded = iabsim::load_config(&dir.path().join("calibrated.toml")).unwrap().config;
    assert_eq!(loaded.mu, Some(mu));
}

#[test]
fn realization_dump_lists_every_node() {
    let dir = tempfile::tempdir().unwrap();
    let mut s = spec(ExperimentKind::Coverage, dir.path(), 5);
    s.engine = Engine::Simulate;
    s.dump_realization = true;
    run(&s).unwrap();
    let (header, rows) = csv_table(&dir.path().join("realization.csv"));
    assert_provenance_tail(&header);
    for kind in ["mbs", "sbs", "ue"] {
        assert!(rows.iter().any(|r| r[0] == kind), "no {kind} rows");
    }
    let (header, _) = csv_table(&dir.path().join("blockage.csv"));
    assert_provenance_tail(&header);
}

#[test]
fn invalid_specs_fail_with_exit_code_2() {
    let dir = tempfile::tempdir().unwrap();
    let cases: [fn(&mut ExperimentSpec); 7] = [
        |s| s.grid.clear(),
        |s| s.grid = vec![1.0, 0.0],
        |s| s.iterations = 0,
        |s| s.rho = -1.0,
        |s| s.eta = Some(1.5),
        |s| s.config.lambda_s = 1.0,
        |s| s.config.mu = None,
    ];
    for (k, edit) in cases.iter().enumerate() {
        let mut s = spec(ExperimentKind::Coverage, dir.path(), 10);
        edit(&mut s);
        let err = run(&s).unwrap_err();
        assert_eq!(err.exit_code(), 2, "case {k}: {err:?}");
    }
    let mut s = spec(ExperimentKind::Calibrate, dir.path(), 10);
    s.grid = vec![20.0, 200.0, 2000.0];
    assert_eq!(run(&s).unwrap_err().exit_code(), 2);
}

#[test]
fn ora_without_eta_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let mut s = spec(ExperimentKind::RateCcdf, dir.path(), 10);
    s.config.eta_a = None;
    s.schemes = vec![Scheme::Ora];
    assert!(matches!(run(&s).unwrap_err(), HarnessError::Config(_)));
    s.eta = Some(0.6);
    run(&s).unwrap();
}

#[test]
fn core_errors_map_to_exit_codes() {
    let numeric: HarnessError = CoreError::Quadrature { context: "test", value: 0.5, abs_error: 1.0 }.into();
    assert_eq!(numeric.exit_code(), 3);
    assert_eq!(HarnessError::from(CoreError::EtaUnset).exit_code(), 2);
    let record: serde_json::Value = serde_json::from_str(&numeric.record()).unwrap();
    assert_eq!(record["error"], "convergence");
    assert_eq!(record["exit_code"], 3);
}

#[test]
fn plot_script_needs_an_existing_csv() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("coverage.csv");
    let err = emit_plot_script(&csv, ExperimentKind::Coverage).unwrap_err();
    assert!(matches!(err, HarnessError::Io(_)));
    fs::write(&csv, "curve\n").unwrap();
    let script = emit_plot_script(&csv, ExperimentKind::Coverage).unwrap();
    let text = fs::read_to_string(script).unwrap();
    assert!(text.contains("\"coverage.csv\""));
    assert!(text.contains("coverage.pdf"));
    assert!(text.contains("f\"C{i}\""));
    assert!(!text.contains("{x}") && !text.contains("{{"));
    assert!(emit_plot_script(&csv, ExperimentKind::Calibrate).is_err());
}
