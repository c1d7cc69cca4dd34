use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use iabsim_core::analytic::{calibrate_mu, AnalyticEngine};
use iabsim_core::geometry::Rect;
use iabsim_core::numerics::golden_section_max;
use iabsim_core::sim::{
    build_association_map, default_window, iteration_seed, sample_realization, typical_sample, BlockingMode,
    SimSettings, TypicalSample,
};
use iabsim_core::{NetworkConfig, Scheme, Tier};

use crate::config_file::config_to_toml;
use crate::error::HarnessError;
use crate::output::{
    write_blockage_field, write_realization, write_rows, write_text, CalibrationRow, CurveRow, Provenance, SweepRow,
};
use crate::plot::emit_plot_script;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ExperimentKind {
    Calibrate,
    Coverage,
    RateCcdf,
    SweepEta,
    SweepBias,
    SweepDensity,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Calibrate => "calibrate",
            ExperimentKind::Coverage => "coverage",
            ExperimentKind::RateCcdf => "rate_ccdf",
            ExperimentKind::SweepEta => "sweep_eta",
            ExperimentKind::SweepBias => "sweep_bias",
            ExperimentKind::SweepDensity => "sweep_density",
        }
    }

    pub fn is_sweep(self) -> bool {
        matches!(self, ExperimentKind::SweepEta | ExperimentKind::SweepBias | ExperimentKind::SweepDensity)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Engine {
    Analytic,
    Simulate,
    Both,
}

impl Engine {
    pub fn name(self) -> &'static str {
        match self {
            Engine::Analytic => "analytic",
            Engine::Simulate => "simulate",
            Engine::Both => "both",
        }
    }

    fn analytic(self) -> bool {
        self != Engine::Simulate
    }

    fn simulate(self) -> bool {
        self != Engine::Analytic
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    pub config: NetworkConfig,
    pub engine: Engine,
    /// Thresholds in dB (coverage), rates in bit/s (rate_ccdf), the
    /// calibration bracket in m, or the swept parameter.
    pub grid: Vec<f64>,
    pub out_dir: PathBuf,
    pub seed: u64,
    pub iterations: usize,
    /// Empty means IRA, ORA (when an access share is known) and WB.
    pub schemes: Vec<Scheme>,
    /// Rate threshold of the sweeps, bit/s.
    pub rho: f64,
    /// Overrides the config's ORA access share.
    pub eta: Option<f64>,
    pub window: Rect,
    /// Backhaul SNR threshold of the joint coverage curve.
    pub tau_backhaul_db: f64,
    /// Also write the first snapshot (blockages, nodes, association).
    pub dump_realization: bool,
}

fn steps(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step).round() as usize;
    (0..=n).map(|k| lo + k as f64 * step).collect()
}

/// Log-spaced rates from `10^lo` to `10^hi`.
pub fn log_grid(lo: i32, hi: i32, per_decade: u32) -> Vec<f64> {
    let n = (hi - lo) as u32 * per_decade;
    (0..=n).map(|k| 10f64.powf(lo as f64 + k as f64 / per_decade as f64)).collect()
}

pub fn default_grid(kind: ExperimentKind) -> Vec<f64> {
    match kind {
        ExperimentKind::Calibrate => vec![20.0, 2000.0],
        ExperimentKind::Coverage => steps(-10.0, 20.0, 1.0),
        ExperimentKind::RateCcdf => log_grid(5, 9, 8),
        // rounded so that grid values print cleanly
        ExperimentKind::SweepEta => steps(1.0, 19.0, 1.0).into_iter().map(|k| k / 20.0).collect(),
        ExperimentKind::SweepBias => steps(0.0, 20.0, 5.0),
        ExperimentKind::SweepDensity => vec![25.0, 50.0, 100.0, 200.0],
    }
}

impl ExperimentSpec {
    pub fn new(kind: ExperimentKind, config: NetworkConfig) -> Self {
        ExperimentSpec {
            kind,
            config,
            engine: Engine::Both,
            grid: default_grid(kind),
            out_dir: PathBuf::from("."),
            seed: 1,
            iterations: 1000,
            schemes: Vec::new(),
            rho: 2e7,
            eta: None,
            window: default_window(),
            tau_backhaul_db: 5.0,
            dump_realization: false,
        }
    }

    fn simulates(&self) -> bool {
        self.kind == ExperimentKind::Calibrate || self.engine.simulate()
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let spec = |m: &str| Err(HarnessError::Spec(m.to_string()));
        if self.grid.is_empty() {
            return spec("grid is empty");
        }
        if self.grid.iter().any(|v| !v.is_finite()) || self.grid.windows(2).any(|w| !(w[0] < w[1])) {
            return spec("grid must be finite and strictly ascending");
        }
        if self.simulates() && self.iterations == 0 {
            return spec("need at least one iteration");
        }
        if !(self.rho > 0.0 && self.rho.is_finite()) {
            return spec("rho must be positive");
        }
        if let Some(eta) = self.eta {
            if !(eta > 0.0 && eta < 1.0) {
                return spec("eta must lie in (0, 1)");
            }
        }
        match self.kind {
            ExperimentKind::Calibrate if self.grid.len() != 2 || self.grid[0] <= 0.0 => {
                return spec("calibration grid is the bracket: two positive values");
            }
            ExperimentKind::RateCcdf if self.grid[0] <= 0.0 => return spec("rate thresholds must be positive"),
            ExperimentKind::SweepEta if self.grid[0] <= 0.0 || *self.grid.last().unwrap() >= 1.0 => {
                return spec("eta grid must lie in (0, 1)");
            }
            _ => {}
        }
        if !self.window.is_valid() {
            return spec("simulation window is degenerate");
        }
        self.config.validate().map_err(HarnessError::from)?;
        Ok(())
    }

    /// Config with the access-share override applied.
    fn effective_config(&self) -> NetworkConfig {
        let mut c = self.config.clone();
        if self.eta.is_some() {
            c.eta_a = self.eta;
        }
        c
    }

    fn schemes(&self, config: &NetworkConfig) -> Result<Vec<Scheme>, HarnessError> {
        if self.schemes.is_empty() {
            let mut s = vec![Scheme::Ira];
            if config.eta_a.is_some() {
                s.push(Scheme::Ora);
            }
            s.push(Scheme::Wb);
            return Ok(s);
        }
        if self.schemes.contains(&Scheme::Ora) && config.eta_a.is_none() {
            return Err(HarnessError::Config("ORA needs eta_a in the config or --eta".into()));
        }
        Ok(self.schemes.clone())
    }

    fn settings(&self, with_loads: bool) -> SimSettings {
        SimSettings { window: self.window, mode: BlockingMode::Correlated, with_loads }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunReport {
    pub files: Vec<PathBuf>,
}

/// Seed of grid point `index`; independent of which worker runs it.
pub fn point_seed(master: u64, index: usize) -> u64 {
    iteration_seed(master ^ 0x243f_6a88_85a3_08d3, index as u64)
}

/// Same samples as the sequential simulator, iterations spread over the
/// rayon pool.
pub fn par_simulate(
    config: &NetworkConfig,
    settings: &SimSettings,
    n_iter: usize,
    seed: u64,
) -> Result<Vec<TypicalSample>, HarnessError> {
    (0..n_iter)
        .into_par_iter()
        .map(|i| typical_sample(config, settings, iteration_seed(seed, i as u64)))
        .collect::<Result<Vec<_>, _>>()
        .map_err(HarnessError::from)
}

/// `(P(X > t), stderr)` over `values`.
pub fn empirical_ccdf(values: &[f64], t: f64) -> (f64, f64) {
    let n = values.len() as f64;
    let p = values.iter().filter(|v| **v > t).count() as f64 / n;
    (p, (p * (1.0 - p) / n).sqrt())
}

pub fn empirical_median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Per-sample rate under `scheme`; ORA at the config's access share.
pub fn sample_rates(samples: &[TypicalSample], config: &NetworkConfig, scheme: Scheme) -> Vec<f64> {
    samples
        .iter()
        .filter_map(|s| {
            let r = s.rates?;
            match scheme {
                Scheme::Ira => Some(r.ira),
                Scheme::Wb | Scheme::MacroOnly => Some(r.wb),
                Scheme::Ora => s.ora_rate(config.bandwidth_w, config.eta_a?),
            }
        })
        .collect()
}

fn macro_only_config(config: &NetworkConfig) -> NetworkConfig {
    NetworkConfig { lambda_s: 0.0, ..config.clone() }
}

fn analytic_engine(config: &NetworkConfig, scheme: Scheme) -> Result<AnalyticEngine, HarnessError> {
    if config.mu.is_none() {
        return Err(HarnessError::Config("mu is unset; run calibrate first".into()));
    }
    Ok(match scheme {
        Scheme::MacroOnly => AnalyticEngine::macro_only(config)?,
        _ => AnalyticEngine::new(config)?,
    })
}

/// ORA access share maximising `P_r(rho)`.
pub fn eta_star(engine: &AnalyticEngine, rho: f64) -> Result<f64, HarnessError> {
    let mut failure = None;
    let eta = golden_section_max(
        |eta| match engine.ora_rate_coverage(rho, eta) {
            Ok(r) => r.value,
            Err(e) => {
                failure.get_or_insert(e);
                f64::NEG_INFINITY
            }
        },
        0.01,
        0.99,
        1e-3,
    );
    match failure {
        Some(e) => Err(e.into()),
        None => Ok(eta),
    }
}

#[derive(Serialize)]
struct Meta<'a> {
    kind: &'static str,
    engine: &'static str,
    seed: u64,
    iterations: usize,
    config_hash: String,
    window_side_m: f64,
    centre_to_edge_m: f64,
    blockage_margin_m: f64,
    grid: &'a [f64],
    rho_bps: f64,
    eta: Option<f64>,
    tau_backhaul_db: f64,
    config: String,
}

pub fn run(spec: &ExperimentSpec) -> Result<RunReport, HarnessError> {
    spec.validate()?;
    std::fs::create_dir_all(&spec.out_dir)?;
    let config = spec.effective_config();
    let name = spec.kind.name();
    let csv_path = spec.out_dir.join(format!("{name}.csv"));
    let mut files = vec![csv_path.clone()];

    match spec.kind {
        ExperimentKind::Calibrate => files.extend(run_calibrate(spec, &config, &csv_path)?),
        ExperimentKind::Coverage => run_coverage(spec, &config, &csv_path)?,
        ExperimentKind::RateCcdf => run_rate_ccdf(spec, &config, &csv_path)?,
        ExperimentKind::SweepEta => run_sweep_eta(spec, &config, &csv_path)?,
        ExperimentKind::SweepBias | ExperimentKind::SweepDensity => run_sweep(spec, &config, &csv_path)?,
    }
    if spec.dump_realization && spec.simulates() {
        files.extend(dump_first_snapshot(spec, &config)?);
    }
    if spec.kind != ExperimentKind::Calibrate {
        files.push(emit_plot_script(&csv_path, spec.kind)?);
    }

    let meta = Meta {
        kind: name,
        engine: if spec.kind == ExperimentKind::Calibrate { "both" } else { spec.engine.name() },
        seed: spec.seed,
        iterations: spec.iterations,
        config_hash: format!("{:016x}", config.fingerprint()),
        window_side_m: spec.window.width(),
        centre_to_edge_m: 0.5 * spec.window.width().min(spec.window.height()),
        blockage_margin_m: config.blockage_length,
        grid: &spec.grid,
        rho_bps: spec.rho,
        eta: config.eta_a,
        tau_backhaul_db: spec.tau_backhaul_db,
        config: config_to_toml(&config),
    };
    let meta_path = spec.out_dir.join(format!("{name}.meta.json"));
    write_text(&meta_path, &(serde_json::to_string_pretty(&meta).expect("metadata serializes") + "\n"))?;
    files.push(meta_path);
    Ok(RunReport { files })
}

fn run_calibrate(spec: &ExperimentSpec, config: &NetworkConfig, csv_path: &Path) -> Result<Vec<PathBuf>, HarnessError> {
    let bracket = (spec.grid[0], spec.grid[1]);
    let cal = calibrate_mu(config, spec.window, spec.iterations, bracket, spec.seed)?;
    let fitted = NetworkConfig { mu: Some(cal.mu), ..config.clone() };
    let engine = AnalyticEngine::new(&fitted)?;
    let row = CalibrationRow {
        mu_m: cal.mu,
        saturated: cal.saturated,
        a_m_simulated: cal.a_m_hat,
        a_m_stderr: cal.stderr,
        a_m_analytic: engine.a_m,
        bracket_lo_m: bracket.0,
        bracket_hi_m: bracket.1,
        config_hash: format!("{:016x}", config.fingerprint()),
        engine: "both",
        seed: Some(spec.seed),
        iterations: Some(spec.iterations),
        tolerance: Some(engine.tolerance()),
    };
    write_rows(csv_path, &[row])?;
    let toml_path = spec.out_dir.join("calibrated.toml");
    write_text(&toml_path, &config_to_toml(&fitted))?;
    Ok(vec![toml_path])
}

fn db(x: f64) -> f64 {
    10f64.powf(x / 10.0)
}

fn curve_row(
    curve: &str,
    threshold: f64,
    threshold_db: Option<f64>,
    analytic: Option<f64>,
    sim: Option<(f64, f64)>,
    prov: &Provenance,
) -> CurveRow {
    CurveRow {
        curve: curve.to_string(),
        threshold,
        threshold_db,
        analytic,
        simulated: sim.map(|s| s.0),
        sim_stderr: sim.map(|s| s.1),
        abs_gap: match (analytic, sim) {
            (Some(a), Some((s, _))) => Some((a - s).abs()),
            _ => None,
        },
        config_hash: prov.hash_hex(),
        engine: prov.engine,
        seed: prov.seed,
        iterations: prov.iterations,
        tolerance: prov.tolerance,
    }
}

fn provenance(spec: &ExperimentSpec, config: &NetworkConfig, seed: u64, tolerance: Option<f64>) -> Provenance {
    let sim = spec.engine.simulate();
    Provenance {
        config_hash: config.fingerprint(),
        engine: spec.engine.name(),
        seed: sim.then_some(seed),
        iterations: sim.then_some(spec.iterations),
        tolerance: if spec.engine.analytic() { tolerance } else { None },
    }
}

fn run_coverage(spec: &ExperimentSpec, config: &NetworkConfig, csv_path: &Path) -> Result<(), HarnessError> {
    let tau_b = db(spec.tau_backhaul_db);
    let engine = if spec.engine.analytic() {
        Some(analytic_engine(config, Scheme::Ira)?.with_interpolation(None))
    } else {
        None
    };
    let samples = if spec.engine.simulate() {
        par_simulate(config, &spec.settings(false), spec.iterations, spec.seed)?
    } else {
        Vec::new()
    };
    let prov = provenance(spec, config, spec.seed, engine.as_ref().map(|e| e.tolerance()));

    let values =
        |pick: &dyn Fn(&TypicalSample) -> Option<f64>| -> Vec<f64> { samples.iter().filter_map(pick).collect() };
    let mbs = values(&|s| (s.serving.tier == Tier::Macro).then_some(s.sinr_access));
    let sbs = values(&|s| (s.serving.tier == Tier::Small).then_some(s.sinr_access));
    let bh = values(&|s| Some(s.typical_sbs_snr));
    let joint = values(&|s| s.snr_backhaul.map(|b| if b > tau_b { s.sinr_access } else { f64::NEG_INFINITY }));
    let curves: [(&str, &Vec<f64>); 4] = [("mbs", &mbs), ("sbs", &sbs), ("backhaul", &bh), ("joint", &joint)];

    let mut rows = Vec::new();
    for (name, vals) in curves {
        for &t_db in &spec.grid {
            let tau = db(t_db);
            let analytic = match &engine {
                Some(e) => Some(
                    match name {
                        "mbs" => e.mbs_coverage(tau),
                        "sbs" => e.sbs_access_coverage(tau),
                        "backhaul" => e.backhaul_snr_ccdf(tau),
                        _ => e.joint_sbs_backhaul_coverage(tau, tau_b),
                    }?
                    .value,
                ),
                None => None,
            };
            let sim = (spec.engine.simulate() && !vals.is_empty()).then(|| empirical_ccdf(vals, tau));
            rows.push(curve_row(name, tau, Some(t_db), analytic, sim, &prov));
        }
    }
    write_rows(csv_path, &rows)
}

fn run_rate_ccdf(spec: &ExperimentSpec, config: &NetworkConfig, csv_path: &Path) -> Result<(), HarnessError> {
    let schemes = spec.schemes(config)?;
    let needs_two_tier = schemes.iter().any(|s| *s != Scheme::MacroOnly);
    let two_tier = if spec.engine.simulate() && needs_two_tier {
        par_simulate(config, &spec.settings(true), spec.iterations, spec.seed)?
    } else {
        Vec::new()
    };
    let macro_cfg = macro_only_config(config);
    let macro_samples = if spec.engine.simulate() && schemes.contains(&Scheme::MacroOnly) {
        par_simulate(&macro_cfg, &spec.settings(true), spec.iterations, point_seed(spec.seed, 1))?
    } else {
        Vec::new()
    };

    // One engine per network so the coverage tables are shared by the schemes.
    let (mut two_tier_engine, mut macro_engine) = (None, None);
    let mut rows = Vec::new();
    for scheme in schemes {
        let (cfg, samples, seed, slot) = match scheme {
            Scheme::MacroOnly => (&macro_cfg, &macro_samples, point_seed(spec.seed, 1), &mut macro_engine),
            _ => (config, &two_tier, spec.seed, &mut two_tier_engine),
        };
        if spec.engine.analytic() && slot.is_none() {
            *slot = Some(analytic_engine(config, scheme)?);
        }
        let engine = slot.as_ref();
        let prov = provenance(spec, cfg, seed, engine.map(|e| e.tolerance()));
        let rates = sample_rates(samples, cfg, scheme);
        for &rho in &spec.grid {
            let analytic = match engine {
                Some(e) => Some(e.rate_coverage(scheme, rho)?.value),
                None => None,
            };
            let sim = spec.engine.simulate().then(|| empirical_ccdf(&rates, rho));
            rows.push(curve_row(scheme.name(), rho, None, analytic, sim, &prov));
        }
    }
    write_rows(csv_path, &rows)
}

struct PointSummary {
    p_r_analytic: Option<f64>,
    p_r_sim: Option<(f64, f64)>,
    median_analytic: Option<f64>,
    median_sim: Option<f64>,
}

fn sweep_row(
    spec: &ExperimentSpec,
    value: f64,
    scheme: Scheme,
    s: &PointSummary,
    eta_star: Option<f64>,
    a_m: Option<f64>,
    prov: &Provenance,
) -> SweepRow {
    SweepRow {
        sweep: spec.kind.name(),
        value,
        scheme: scheme.name(),
        rho_bps: spec.rho,
        p_r_analytic: s.p_r_analytic,
        p_r_simulated: s.p_r_sim.map(|p| p.0),
        sim_stderr: s.p_r_sim.map(|p| p.1),
        median_analytic_bps: s.median_analytic,
        median_simulated_bps: s.median_sim,
        eta_star,
        a_m,
        config_hash: prov.hash_hex(),
        engine: prov.engine,
        seed: prov.seed,
        iterations: prov.iterations,
        tolerance: prov.tolerance,
    }
}

/// The simulated ORA curve is recomputed from one sample set for every
/// access share, so the grid points share their randomness.
fn run_sweep_eta(spec: &ExperimentSpec, config: &NetworkConfig, csv_path: &Path) -> Result<(), HarnessError> {
    let engine = if spec.engine.analytic() { Some(analytic_engine(config, Scheme::Ora)?) } else { None };
    let seed = point_seed(spec.seed, 0);
    let samples = if spec.engine.simulate() {
        par_simulate(config, &spec.settings(true), spec.iterations, seed)?
    } else {
        Vec::new()
    };
    let star = match &engine {
        Some(e) => Some(eta_star(e, spec.rho)?),
        None => None,
    };
    let prov = provenance(spec, config, seed, engine.as_ref().map(|e| e.tolerance()));
    let mut rows = Vec::new();
    for &eta in &spec.grid {
        let (p_r_analytic, median_analytic) = match &engine {
            Some(e) => (Some(e.ora_rate_coverage(spec.rho, eta)?.value), Some(e.ora_median_rate(eta)?)),
            None => (None, None),
        };
        let at = NetworkConfig { eta_a: Some(eta), ..config.clone() };
        let rates = sample_rates(&samples, &at, Scheme::Ora);
        let simulate = spec.engine.simulate();
        let s = PointSummary {
            p_r_analytic,
            p_r_sim: simulate.then(|| empirical_ccdf(&rates, spec.rho)),
            median_analytic,
            median_sim: simulate.then(|| empirical_median(&rates)),
        };
        rows.push(sweep_row(spec, eta, Scheme::Ora, &s, star, engine.as_ref().map(|e| e.a_m), &prov));
    }
    write_rows(csv_path, &rows)
}

fn sweep_point_config(
    spec: &ExperimentSpec,
    config: &NetworkConfig,
    value: f64,
) -> Result<NetworkConfig, HarnessError> {
    let c = match spec.kind {
        ExperimentKind::SweepBias => NetworkConfig { t_s: db(value), ..config.clone() },
        ExperimentKind::SweepDensity => NetworkConfig { lambda_s: value, ..config.clone() },
        _ => unreachable!("not a per-point sweep"),
    };
    c.validate()?;
    Ok(c)
}

fn run_sweep(spec: &ExperimentSpec, config: &NetworkConfig, csv_path: &Path) -> Result<(), HarnessError> {
    let schemes = spec.schemes(config)?;
    let per_point: Vec<Result<Vec<SweepRow>, HarnessError>> = spec
        .grid
        .par_iter()
        .enumerate()
        .map(|(index, &value)| {
            let c = sweep_point_config(spec, config, value)?;
            let seed = point_seed(spec.seed, index);
            let samples = if spec.engine.simulate() {
                par_simulate(&c, &spec.settings(true), spec.iterations, seed)?
            } else {
                Vec::new()
            };
            let engine = if spec.engine.analytic() { Some(AnalyticEngine::new(&c)?) } else { None };
            let star = match (&engine, spec.kind, c.eta_a) {
                (Some(e), ExperimentKind::SweepDensity, Some(_)) => Some(eta_star(e, spec.rho)?),
                _ => None,
            };
            let prov = provenance(spec, &c, seed, engine.as_ref().map(|e| e.tolerance()));
            let mut rows = Vec::new();
            for &scheme in &schemes {
                let engine_for = match (scheme, &engine) {
                    (Scheme::MacroOnly, Some(_)) => Some(analytic_engine(&c, scheme)?),
                    _ => None,
                };
                let e = engine_for.as_ref().or(engine.as_ref());
                let (p_r_analytic, median_analytic) = match e {
                    Some(e) => (Some(e.rate_coverage(scheme, spec.rho)?.value), Some(e.median_rate(scheme)?)),
                    None => (None, None),
                };
                let simulate = spec.engine.simulate() && scheme != Scheme::MacroOnly;
                let rates = sample_rates(&samples, &c, scheme);
                let s = PointSummary {
                    p_r_analytic,
                    p_r_sim: simulate.then(|| empirical_ccdf(&rates, spec.rho)),
                    median_analytic,
                    median_sim: simulate.then(|| empirical_median(&rates)),
                };
                rows.push(sweep_row(spec, value, scheme, &s, star, engine.as_ref().map(|e| e.a_m), &prov));
            }
            Ok(rows)
        })
        .collect();
    let mut rows = Vec::new();
    for r in per_point {
        rows.extend(r?);
    }
    write_rows(csv_path, &rows)
}

fn dump_first_snapshot(spec: &ExperimentSpec, config: &NetworkConfig) -> Result<Vec<PathBuf>, HarnessError> {
    let seed = iteration_seed(spec.seed, 0);
    let real = sample_realization(config, spec.window, seed)?;
    if real.mbs.is_empty() {
        return Err(HarnessError::Spec("first snapshot has no macro cell; nothing to dump".into()));
    }
    let map = build_association_map(&real, config)?;
    let prov = Provenance {
        config_hash: config.fingerprint(),
        engine: "simulate",
        seed: Some(seed),
        iterations: Some(1),
        tolerance: None,
    };
    let blockage = spec.out_dir.join("blockage.csv");
    let nodes = spec.out_dir.join("realization.csv");
    write_blockage_field(&blockage, &real.field, &prov)?;
    write_realization(&nodes, &real, &map, &prov)?;
    Ok(vec![blockage, nodes])
}
