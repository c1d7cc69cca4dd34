//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.

use std::fmt::Write as _;
use std::process::ExitCode;
use std::time::Instant;

use iabsim::experiment::{empirical_ccdf, log_grid, par_simulate, sample_rates};
use iabsim::{run, Engine, ExperimentKind, ExperimentSpec};
use iabsim_core::analytic::{
    association_probability, calibrate_mu, load_pmf, serving_pathloss_pdf, AnalyticEngine, LoadKernel, Omega,
    PathlossLaw,
};
use iabsim_core::config::Exponents;
use iabsim_core::sim::{default_window, SimSettings, TypicalSample};
use iabsim_core::{LinkType, NetworkConfig, Scheme, Tier};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

type Check = fn() -> Outcome;

fn db(x: f64) -> f64 {
    10f64.powf(x / 10.0)
}

fn coverage_grid_db() -> Vec<f64> {
    (-10..=20).map(f64::from).collect()
}

fn sparse_macro_config() -> NetworkConfig {
    NetworkConfig { lambda_m: 5.0, lambda_s: 100.0, ..NetworkConfig::baseline() }
}

fn with_loads() -> SimSettings {
    SimSettings { with_loads: true, ..SimSettings::default() }
}

fn median(e: &AnalyticEngine, scheme: Scheme) -> f64 {
    e.median_rate(scheme).expect("median rate")
}

fn c1_calibration() -> Outcome {
    let t = Instant::now();
    let cal = calibrate_mu(&NetworkConfig::baseline(), default_window(), 1000, (20.0, 2000.0), 8).expect("calibration");
    let secs = t.elapsed().as_secs_f64();
    outcome(
        !cal.saturated && (160.0..=240.0).contains(&cal.mu) && secs <= 600.0,
        format!(
            "mu = {:.1} m (A_m measured {:.4} +- {:.4}), want [160, 240]; {secs:.1} s",
            cal.mu, cal.a_m_hat, cal.stderr
        ),
    )
}

/// Largest gap between an analytic CCDF and the empirical one of `values`.
fn max_gap(values: &[f64], analytic: impl Fn(f64) -> f64, grid_db: &[f64]) -> (f64, f64) {
    let mut worst = (0.0, grid_db[0]);
    for &t in grid_db {
        let gap = (analytic(db(t)) - empirical_ccdf(values, db(t)).0).abs();
        if gap > worst.0 {
            worst = (gap, t);
        }
    }
    worst
}

fn c2_coverage() -> Outcome {
    let c = NetworkConfig::baseline();
    let engine = AnalyticEngine::new(&c).unwrap().with_interpolation(None);
    let samples = par_simulate(&c, &SimSettings::default(), 4000, 21).unwrap();
    let grid = coverage_grid_db();
    let mbs: Vec<f64> = samples.iter().filter(|s| s.serving.tier == Tier::Macro).map(|s| s.sinr_access).collect();
    let bh: Vec<f64> = samples.iter().map(|s| s.typical_sbs_snr).collect();
    let (g_m, at_m) = max_gap(&mbs, |t| engine.mbs_coverage(t).unwrap().value, &grid);
    let (g_b, at_b) = max_gap(&bh, |t| engine.backhaul_snr_ccdf(t).unwrap().value, &grid);

    let tau_b = db(5.0);
    let joint: Vec<f64> = samples
        .iter()
        .filter_map(|s| s.snr_backhaul.map(|b| if b > tau_b { s.sinr_access } else { f64::NEG_INFINITY }))
        .collect();
    let (g_j, at_j) = max_gap(&joint, |t| engine.joint_sbs_backhaul_coverage(t, tau_b).unwrap().value, &grid);
    println!("INFO [2] joint SBS access and backhaul (5 dB) coverage: max gap {g_j:.4} at {at_j} dB");
    outcome(
        g_m <= 0.05 && g_b <= 0.05,
        format!(
            "MBS coverage max gap {g_m:.4} at {at_m} dB ({} macro users); backhaul SNR max gap {g_b:.4} at {at_b} dB; \
             want <= 0.05",
            mbs.len()
        ),
    )
}

struct RateRun {
    grid: Vec<f64>,
    engine: AnalyticEngine,
    samples: Vec<TypicalSample>,
    config: NetworkConfig,
}

fn sparse_macro_run() -> RateRun {
    let config = sparse_macro_config();
    RateRun {
        grid: log_grid(5, 9, 8),
        engine: AnalyticEngine::new(&config).unwrap(),
        samples: par_simulate(&config, &with_loads(), 1000, 33).unwrap(),
        config,
    }
}

fn rate_gap(r: &RateRun, scheme: Scheme) -> (f64, f64) {
    let rates = sample_rates(&r.samples, &r.config, scheme);
    let mut worst = (0.0, r.grid[0]);
    for &rho in &r.grid {
        let gap = (r.engine.rate_coverage(scheme, rho).unwrap().value - empirical_ccdf(&rates, rho).0).abs();
        if gap > worst.0 {
            worst = (gap, rho);
        }
    }
    worst
}

fn c3_rates(r: &RateRun) -> Outcome {
    let (g_i, at_i) = rate_gap(r, Scheme::Ira);
    let (g_o, at_o) = rate_gap(r, Scheme::Ora);
    let (g_w, at_w) = rate_gap(r, Scheme::Wb);
    println!("INFO [3] WB max gap {g_w:.4} at {:.3e} bit/s", at_w);
    outcome(
        g_i <= 0.07 && g_o <= 0.07,
        format!("IRA max gap {g_i:.4} at {at_i:.3e} bit/s; ORA max gap {g_o:.4} at {at_o:.3e} bit/s; want <= 0.07"),
    )
}

fn c4_dominance(r: &RateRun) -> Outcome {
    let mut analytic_ok = true;
    let mut note = String::new();
    for (name, engine) in
        [("baseline", &AnalyticEngine::new(&NetworkConfig::baseline()).unwrap()), ("lambda_m 5", &r.engine)]
    {
        for &rho in &r.grid {
            let wb = engine.rate_coverage(Scheme::Wb, rho).unwrap().value;
            for s in [Scheme::Ira, Scheme::Ora] {
                let v = engine.rate_coverage(s, rho).unwrap().value;
                if v > wb {
                    analytic_ok = false;
                    let _ = write!(note, " [{name}: {} {v:.6} > wb {wb:.6} at {rho:.3e}]", s.name());
                }
            }
        }
    }
    let wb = sample_rates(&r.samples, &r.config, Scheme::Wb);
    let mut worst_z = f64::NEG_INFINITY;
    for s in [Scheme::Ira, Scheme::Ora] {
        let other = sample_rates(&r.samples, &r.config, s);
        for &rho in &r.grid {
            let (p_w, se_w) = empirical_ccdf(&wb, rho);
            let (p_o, se_o) = empirical_ccdf(&other, rho);
            let se = (se_w * se_w + se_o * se_o).sqrt();
            if p_o > p_w {
                worst_z = worst_z.max(if se > 0.0 { (p_o - p_w) / se } else { f64::INFINITY });
            }
        }
    }
    let sim_ok = worst_z <= 2.0;
    let excess = if worst_z.is_finite() { format!("{worst_z:.2} stderr") } else { "none".to_string() };
    outcome(
        analytic_ok && sim_ok,
        format!("analytic WB >= IRA, ORA at every threshold: {analytic_ok}{note}; simulated excess over WB: {excess}, want <= 2"),
    )
}

fn c5_optimal_split() -> Outcome {
    let rho = 2e7;
    let grid: Vec<f64> = (1..=19).map(|k| k as f64 / 20.0).collect();
    let argmax = |c: &NetworkConfig| -> (f64, Vec<f64>) {
        let e = AnalyticEngine::new(c).unwrap();
        let p: Vec<f64> = grid.iter().map(|&eta| e.ora_rate_coverage(rho, eta).unwrap().value).collect();
        let k = (0..p.len()).max_by(|&a, &b| p[a].total_cmp(&p[b])).unwrap();
        (grid[k], p)
    };
    let (star, p) = argmax(&NetworkConfig::baseline());
    let best = p.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let margin = best - p[0].max(p[p.len() - 1]);
    let interior = star > grid[0] && star < grid[grid.len() - 1];

    let mut stars = Vec::new();
    let mut continuous = Vec::new();
    for ls in [25.0, 50.0, 100.0, 200.0] {
        let c = NetworkConfig { lambda_s: ls, ..NetworkConfig::baseline() };
        stars.push(argmax(&c).0);
        continuous.push(iabsim::experiment::eta_star(&AnalyticEngine::new(&c).unwrap(), rho).unwrap());
    }
    let non_increasing = stars.windows(2).all(|w| w[1] <= w[0]);
    println!("INFO [5] golden-section eta* over lambda_s 25, 50, 100, 200: {continuous:.3?}");
    outcome(
        interior && margin > 0.01 && non_increasing,
        format!(
            "eta* = {star:.2}, P_r(eta*) = {best:.4}, margin over endpoints {margin:.4} (want > 0.01); \
             grid eta* over lambda_s 25, 50, 100, 200: {stars:?}"
        ),
    )
}

fn c6_saturation() -> Outcome {
    let at = |ls: f64| AnalyticEngine::new(&NetworkConfig { lambda_s: ls, ..NetworkConfig::baseline() }).unwrap();
    let (e1, e2) = (at(100.0), at(200.0));
    let (i1, i2) = (median(&e1, Scheme::Ira), median(&e2, Scheme::Ira));
    let (w1, w2) = (median(&e1, Scheme::Wb), median(&e2, Scheme::Wb));
    let (gi, gw) = (i2 / i1 - 1.0, w2 / w1 - 1.0);
    let ratio = i2 / w2;
    outcome(
        gi < gw && ratio < 1.0,
        format!(
            "median gain 100 -> 200 per km2: IRA {:.1}% vs WB {:.1}%; IRA/WB at 200: {ratio:.3}",
            100.0 * gi,
            100.0 * gw
        ),
    )
}

fn c7_offloading() -> Outcome {
    let biases = [0.0, 5.0, 10.0, 15.0, 20.0];
    let medians = |scheme: Scheme| -> Vec<f64> {
        biases
            .iter()
            .map(|&b| {
                median(
                    &AnalyticEngine::new(&NetworkConfig { t_s: db(b), ..NetworkConfig::baseline() }).unwrap(),
                    scheme,
                )
            })
            .collect()
    };
    let gain = |m: &[f64]| m.iter().cloned().fold(f64::NEG_INFINITY, f64::max) / m[0] - 1.0;
    let (wb, ira) = (medians(Scheme::Wb), medians(Scheme::Ira));
    let (gw, gi) = (gain(&wb), gain(&ira));
    outcome(
        gw > gi,
        format!(
            "best-over-bias median gain: WB {:.1}% vs IRA {:.1}% (T_s 0..20 dB, 5 dB steps)",
            100.0 * gw,
            100.0 * gi
        ),
    )
}

fn log_trapezoid(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let g = |t: f64| {
        let l = t.exp();
        f(l) * l
    };
    let mut s = 0.5 * (g(a) + g(b));
    for k in 1..n {
        s += g(a + k as f64 * h);
    }
    s * h
}

fn c8_properties() -> Outcome {
    let t = Instant::now();
    let mut failures = Vec::new();
    let mut check = |ok: bool, what: String| {
        if !ok {
            failures.push(what);
        }
    };
    let base = NetworkConfig::baseline();
    let links = [LinkType::Access, LinkType::Backhaul];

    for mu in [30.0, 200.0, 1500.0] {
        let law = PathlossLaw::with_mu(&base, mu);
        for k in links {
            for i in Tier::ALL {
                for ln_l in [6.0, 15.0, 25.0, 40.0] {
                    let l = f64::exp(ln_l);
                    let (a, b) = law.intensity_split(k, i, l);
                    let total = law.intensity(k, i, l);
                    check((a + b - total).abs() <= 1e-9 * total, format!("intensity split mu {mu} l e^{ln_l}"));
                    let h = l * 1e-5;
                    let fd = (law.intensity(k, i, l + h) - law.intensity(k, i, l - h)) / (2.0 * h);
                    let d = law.density(k, i, l);
                    check((fd - d).abs() <= 1e-5 * d, format!("density vs difference mu {mu} l e^{ln_l}: {fd} {d}"));
                }
            }
        }
    }

    for alpha in [2.5, 3.0, 4.0] {
        let c = NetworkConfig { alpha: [[Exponents { los: alpha, nlos: alpha }; 2]; 2], ..base.clone() };
        let law = PathlossLaw::with_mu(&c, 200.0);
        for i in Tier::ALL {
            for l in [1e5f64, 1e10, 1e15] {
                let exact = std::f64::consts::PI * c.density_m2(i) * l.powf(2.0 / alpha);
                let got = law.intensity(LinkType::Access, i, l);
                check((got - exact).abs() <= 1e-9 * exact, format!("equal-exponent reduction alpha {alpha}"));
            }
        }
    }

    for (lm, ls, ts) in [(10.0, 50.0, 0.0), (5.0, 100.0, 10.0), (2.0, 200.0, 20.0)] {
        let c = NetworkConfig { lambda_m: lm, lambda_s: ls, t_s: db(ts), ..base.clone() };
        let law = PathlossLaw::new(&c).unwrap();
        let omega = Omega::new(&c);
        let a_m = association_probability(&law, &omega, Tier::Macro).unwrap().value;
        let a_s = association_probability(&law, &omega, Tier::Small).unwrap().value;
        check((a_m + a_s - 1.0).abs() < 1e-6, format!("A_m + A_s = {} at {lm}/{ls}", a_m + a_s));
        for i in Tier::ALL {
            let pdf = serving_pathloss_pdf(&law, &omega, i).unwrap();
            let total = log_trapezoid(|l| pdf.at(l), f64::ln(1e-12), f64::ln(1e22), 200_000);
            check((total - 1.0).abs() < 1e-4, format!("serving pdf {i:?} integrates to {total}"));
        }
    }

    for ratio in [0.3, 5.0, 20.0, 100.0] {
        let (mut mass, mut mean) = (0.0, 0.0);
        for n in 0..=(ratio as u64 * 40 + 400) {
            let p = load_pmf(LoadKernel::Typical, 1.0, ratio, n);
            mass += p;
            mean += n as f64 * p;
        }
        check((mass - 1.0).abs() < 1e-9, format!("load pmf mass {mass} at ratio {ratio}"));
        check((mean - ratio).abs() < 1e-9 * ratio.max(1.0), format!("load mean {mean} vs {ratio}"));
    }

    let e = AnalyticEngine::new(&base).unwrap().with_interpolation(None);
    let mut prev = [1.0f64; 3];
    for t in coverage_grid_db() {
        let now = [
            e.mbs_coverage(db(t)).unwrap().value,
            e.sbs_access_coverage(db(t)).unwrap().value,
            e.backhaul_snr_ccdf(db(t)).unwrap().value,
        ];
        for k in 0..3 {
            check(now[k] <= prev[k] + 1e-7, format!("coverage curve {k} rises at {t} dB"));
        }
        prev = now;
    }
    let e = AnalyticEngine::new(&base).unwrap();
    for s in [Scheme::Ira, Scheme::Ora, Scheme::Wb] {
        let v: Vec<f64> = log_grid(5, 9, 8).iter().map(|&r| e.rate_coverage(s, r).unwrap().value).collect();
        check(v.windows(2).all(|w| w[1] <= w[0]), format!("{} rate coverage not monotone", s.name()));
    }

    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    let mut bytes = Vec::new();
    for d in &dirs {
        let mut spec = ExperimentSpec::new(ExperimentKind::RateCcdf, base.clone());
        spec.engine = Engine::Both;
        spec.iterations = 100;
        spec.grid = vec![1e6, 1e7, 1e8];
        spec.out_dir = d.path().to_path_buf();
        spec.dump_realization = true;
        let files = run(&spec).unwrap().files;
        bytes.push(files.iter().map(|f| std::fs::read(f).unwrap()).collect::<Vec<_>>());
    }
    check(bytes[0] == bytes[1], "replay is not byte-identical".into());

    let secs = t.elapsed().as_secs_f64();
    check(secs <= 300.0, format!("property checks took {secs:.0} s"));
    let detail = if failures.is_empty() {
        format!("all property checks hold; {secs:.1} s")
    } else {
        format!("{} failures: {}", failures.len(), failures.join("; "))
    };
    outcome(failures.is_empty(), detail)
}

fn main() -> ExitCode {
    // libtest flags such as --nocapture are passed through by cargo; a
    // filter argument that names nothing here skips the run.
    if std::env::args().skip(1).any(|a| a == "--list") {
        return ExitCode::SUCCESS;
    }
    let started = Instant::now();
    let mut results: Vec<(u32, &str, Outcome)> = Vec::new();
    let mut report = |n: u32, name: &'static str, o: Outcome| {
        println!("{} [{n}] {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        results.push((n, name, o));
    };
    let independent: [(u32, &str, Check); 2] =
        [(1, "mu calibration", c1_calibration), (2, "coverage cross-validation", c2_coverage)];
    for (n, name, f) in independent {
        report(n, name, f());
    }
    let sparse = sparse_macro_run();
    report(3, "rate cross-validation", c3_rates(&sparse));
    report(4, "stochastic dominance", c4_dominance(&sparse));
    let rest: [(u32, &str, Check); 4] = [
        (5, "optimal split", c5_optimal_split),
        (6, "saturation", c6_saturation),
        (7, "offloading", c7_offloading),
        (8, "property suite", c8_properties),
    ];
    for (n, name, f) in rest {
        report(n, name, f());
    }
    let failed: Vec<u32> = results.iter().filter(|r| !r.2.pass).map(|r| r.0).collect();
    println!(
        "acceptance: {} of {} criteria pass in {:.0} s{}",
        results.len() - failed.len(),
        results.len(),
        started.elapsed().as_secs_f64(),
        if failed.is_empty() { String::new() } else { format!("; failing: {failed:?}") }
    );
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
