use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use iabsim::{load_config, run, Engine, ExperimentKind, ExperimentSpec, HarnessError};
use iabsim_core::{NetworkConfig, Scheme};

#[derive(Parser)]
#[command(
    name = "iabsim",
    version,
    about = "Rate coverage of two-tier mm-wave networks with integrated access and backhaul"
)]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Subcommand)]
enum Verb {
    /// Fit the LOS range constant mu to simulated macro association.
    Calibrate(Common),
    /// Access SINR and backhaul SNR coverage curves.
    Coverage(Common),
    /// Rate CCDFs per resource allocation scheme.
    Rate(Common),
    /// Parameter sweeps with median rates and optimal ORA split.
    Sweep {
        #[arg(value_enum)]
        over: SweepOver,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SweepOver {
    Eta,
    Bias,
    Density,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum SchemeArg {
    Ira,
    Ora,
    Wb,
    Macro,
    All,
}

#[derive(Args)]
struct Common {
    /// TOML network config; the built-in defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "both")]
    engine: Engine,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 1000)]
    iters: usize,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Comma-separated values or `lo:step:hi`. Coverage thresholds in dB,
    /// rates in bit/s, the calibration bracket in m, or the swept values
    /// (eta_a, T_s in dB, lambda_s per km²).
    #[arg(long, allow_hyphen_values = true)]
    grid: Option<String>,
    #[arg(long, value_enum, default_value = "all")]
    scheme: SchemeArg,
    /// Rate threshold of the sweeps, bit/s.
    #[arg(long, default_value_t = 2e7)]
    rho: f64,
    /// ORA access share, overriding the config.
    #[arg(long)]
    eta: Option<f64>,
    /// Also write the first simulated snapshot.
    #[arg(long)]
    dump: bool,
}

fn parse_grid(s: &str) -> Result<Vec<f64>, HarnessError> {
    let bad = || HarnessError::Spec(format!("cannot parse grid {s:?}"));
    let num = |t: &str| t.trim().parse::<f64>().map_err(|_| bad());
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        [lo, step, hi] => {
            let (lo, step, hi) = (num(lo)?, num(step)?, num(hi)?);
            if !(step > 0.0 && hi >= lo) {
                return Err(bad());
            }
            let n = ((hi - lo) / step + 1e-9).floor() as usize;
            Ok((0..=n).map(|k| lo + k as f64 * step).collect())
        }
        [_] => s.split(',').map(num).collect(),
        _ => Err(bad()),
    }
}

fn build_spec(kind: ExperimentKind, c: Common) -> Result<ExperimentSpec, HarnessError> {
    let config = match &c.config {
        Some(path) => {
            let loaded = load_config(path)?;
            for w in &loaded.warnings {
                eprintln!("warning: {w:?}");
            }
            loaded.config
        }
        None => NetworkConfig::baseline(),
    };
    let mut spec = ExperimentSpec::new(kind, config);
    spec.engine = c.engine;
    spec.seed = c.seed;
    spec.iterations = c.iters;
    spec.out_dir = c.out;
    if let Some(g) = &c.grid {
        spec.grid = parse_grid(g)?;
    }
    spec.schemes = match c.scheme {
        SchemeArg::All => Vec::new(),
        SchemeArg::Ira => vec![Scheme::Ira],
        SchemeArg::Ora => vec![Scheme::Ora],
        SchemeArg::Wb => vec![Scheme::Wb],
        SchemeArg::Macro => vec![Scheme::MacroOnly],
    };
    spec.rho = c.rho;
    spec.eta = c.eta;
    spec.dump_realization = c.dump;
    Ok(spec)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, common) = match cli.verb {
        Verb::Calibrate(c) => (ExperimentKind::Calibrate, c),
        Verb::Coverage(c) => (ExperimentKind::Coverage, c),
        Verb::Rate(c) => (ExperimentKind::RateCcdf, c),
        Verb::Sweep { over, common } => (
            match over {
                SweepOver::Eta => ExperimentKind::SweepEta,
                SweepOver::Bias => ExperimentKind::SweepBias,
                SweepOver::Density => ExperimentKind::SweepDensity,
            },
            common,
        ),
    };
    match build_spec(kind, common).and_then(|spec| run(&spec)) {
        Ok(report) => {
            for f in report.files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.record());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
