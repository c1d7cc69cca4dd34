use std::path::{Path, PathBuf};

use crate::error::HarnessError;
use crate::experiment::ExperimentKind;
use crate::output::write_text;

const CURVES: &str = r#"import sys
import pandas as pd
import matplotlib.pyplot as plt

df = pd.read_csv(sys.argv[1] if len(sys.argv) > 1 else "{csv}")
fig, ax = plt.subplots()
for i, (name, g) in enumerate(df.groupby("curve", sort=False)):
    color = f"C{{i}}"
    x = g["{x}"]
    if g["analytic"].notna().any():
        ax.plot(x, g["analytic"], color=color, label=f"{{name}} analytic")
    if g["simulated"].notna().any():
        ax.plot(x, g["simulated"], "o", color=color, mfc="none", label=f"{{name}} simulated")
{xscale}ax.set_xlabel("{xlabel}")
ax.set_ylabel("{ylabel}")
ax.set_ylim(0, 1)
ax.grid(True, alpha=0.3)
ax.legend()
fig.savefig("{stem}.pdf", bbox_inches="tight")
"#;

const SWEEP: &str = r#"import sys
import pandas as pd
import matplotlib.pyplot as plt

df = pd.read_csv(sys.argv[1] if len(sys.argv) > 1 else "{csv}")
fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))
for i, (scheme, g) in enumerate(df.groupby("scheme", sort=False)):
    color = f"C{{i}}"
    if g["p_r_analytic"].notna().any():
        ax1.plot(g["value"], g["p_r_analytic"], color=color, label=f"{{scheme}} analytic")
        ax2.plot(g["value"], g["median_analytic_bps"] / 1e6, color=color, label=f"{{scheme}} analytic")
    if g["p_r_simulated"].notna().any():
        ax1.plot(g["value"], g["p_r_simulated"], "o", color=color, mfc="none", label=f"{{scheme}} simulated")
        ax2.plot(g["value"], g["median_simulated_bps"] / 1e6, "o", color=color, mfc="none", label=f"{{scheme}} simulated")
rho = df["rho_bps"].iloc[0] / 1e6
ax1.set_xlabel("{xlabel}")
ax1.set_ylabel(f"rate coverage at {{rho:g}} Mbps")
ax2.set_xlabel("{xlabel}")
ax2.set_ylabel("median rate (Mbps)")
for ax in (ax1, ax2):
    ax.grid(True, alpha=0.3)
    ax.legend()
fig.savefig("{stem}.pdf", bbox_inches="tight")
"#;

/// Writes `<csv stem>.py` next to `csv_path`: a matplotlib script that
/// reads the CSV and saves `<csv stem>.pdf`.
pub fn emit_plot_script(csv_path: &Path, kind: ExperimentKind) -> Result<PathBuf, HarnessError> {
    if !csv_path.is_file() {
        return Err(HarnessError::Io(format!("no CSV at {}", csv_path.display())));
    }
    let stem = csv_path
        .file_stem()
        .and_then(|s| s.to_str())
        .ok_or_else(|| HarnessError::Spec("CSV path has no usable file name".into()))?;
    let csv = csv_path.file_name().and_then(|s| s.to_str()).unwrap_or(stem);
    let fill = |template: &str, pairs: &[(&str, &str)]| {
        let mut s = template.replace("{csv}", csv).replace("{stem}", stem);
        for (k, v) in pairs {
            s = s.replace(k, v);
        }
        s.replace("{{", "{").replace("}}", "}")
    };
    let script = match kind {
        ExperimentKind::Coverage => fill(
            CURVES,
            &[
                ("{x}", "threshold_db"),
                ("{xscale}", ""),
                ("{xlabel}", "SINR threshold (dB)"),
                ("{ylabel}", "coverage probability"),
            ],
        ),
        ExperimentKind::RateCcdf => fill(
            CURVES,
            &[
                ("{x}", "threshold"),
                ("{xscale}", "ax.set_xscale(\"log\")\n"),
                ("{xlabel}", "rate threshold (bit/s)"),
                ("{ylabel}", "rate coverage"),
            ],
        ),
        ExperimentKind::SweepEta => fill(SWEEP, &[("{xlabel}", "access share eta_a")]),
        ExperimentKind::SweepBias => fill(SWEEP, &[("{xlabel}", "small-cell bias T_s (dB)")]),
        ExperimentKind::SweepDensity => fill(SWEEP, &[("{xlabel}", "small-cell density (per km^2)")]),
        ExperimentKind::Calibrate => return Err(HarnessError::Spec("calibration has no figure".into())),
    };
    let path = csv_path.with_extension("py");
    write_text(&path, &script)?;
    Ok(path)
}
