//! TOML network configuration. Powers, gains, biases, reference losses and
//! noise are written in dB here and converted to linear units on load;
//! nothing past this module sees a dB value.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use iabsim_core::config::{ConfigWarning, Exponents};
use iabsim_core::NetworkConfig;

use crate::error::HarnessError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub density: Density,
    pub power: Power,
    #[serde(default)]
    pub bias: Bias,
    pub antenna: Antenna,
    pub pathloss: Pathloss,
    pub channel: Channel,
    #[serde(default)]
    pub ora: Ora,
    pub blockage: Blockage,
    #[serde(default)]
    pub model: Model,
}

/// Points per km².
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Density {
    pub macro_cells: f64,
    pub small_cells: f64,
    pub users: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Power {
    pub macro_dbm: f64,
    pub small_dbm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bias {
    pub macro_db: f64,
    pub small_db: f64,
}

impl Default for Bias {
    fn default() -> Self {
        Bias { macro_db: 0.0, small_db: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Antenna {
    pub macro_main_db: f64,
    pub macro_side_db: f64,
    pub small_main_db: f64,
    pub small_side_db: f64,
    pub user_main_db: f64,
    pub user_side_db: f64,
    pub macro_beamwidth_deg: f64,
    pub small_beamwidth_deg: f64,
    pub user_beamwidth_deg: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkLaw {
    pub los: f64,
    pub nlos: f64,
    /// Loss at 1 m, dB (negative).
    pub ref_db: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TierLaws {
    #[serde(rename = "macro")]
    pub macro_cell: LinkLaw,
    #[serde(rename = "small")]
    pub small_cell: LinkLaw,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Pathloss {
    pub access: TierLaws,
    pub backhaul: TierLaws,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Channel {
    pub bandwidth_hz: f64,
    pub noise_psd_dbm_hz: f64,
    /// Added to the noise PSD on load.
    #[serde(default)]
    pub noise_figure_db: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Ora {
    pub eta_a: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Blockage {
    pub density: f64,
    pub length_m: f64,
    pub mu_m: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Model {
    #[serde(default)]
    pub mbs_access_interference: bool,
    #[serde(default)]
    pub backhaul_interference: bool,
}

fn from_db(d: f64) -> f64 {
    10f64.powf(d / 10.0)
}

fn from_dbm(d: f64) -> f64 {
    from_db(d - 30.0)
}

fn from_deg(d: f64) -> f64 {
    d * PI / 180.0
}

/// Boundary value `d` near `guess` with `decode(d) == x` exactly, so that
/// writing a config and reading it back gives the same bits. Falls back to
/// `guess` if no float within a few ulps decodes exactly.
fn encode(x: f64, guess: f64, decode: fn(f64) -> f64) -> f64 {
    // Shortest decimal first so that -2 dB is written as -2.0.
    for digits in 0..17 {
        let c: f64 = format!("{guess:.digits$e}").parse().unwrap_or(guess);
        if decode(c) == x {
            return c;
        }
    }
    let (mut up, mut down) = (guess, guess);
    for _ in 0..64 {
        up = up.next_up();
        down = down.next_down();
        if decode(up) == x {
            return up;
        }
        if decode(down) == x {
            return down;
        }
    }
    guess
}

fn to_db(x: f64) -> f64 {
    encode(x, 10.0 * x.log10(), from_db)
}

fn to_dbm(x: f64) -> f64 {
    encode(x, 10.0 * x.log10() + 30.0, from_dbm)
}

fn to_deg(x: f64) -> f64 {
    encode(x, x * 180.0 / PI, from_deg)
}

fn law(l: &LinkLaw) -> (Exponents, f64) {
    (Exponents { los: l.los, nlos: l.nlos }, from_db(l.ref_db))
}

impl ConfigFile {
    pub fn to_network_config(&self) -> NetworkConfig {
        let p = &self.pathloss;
        let (am, bam) = law(&p.access.macro_cell);
        let (as_, bas) = law(&p.access.small_cell);
        let (bm, bbm) = law(&p.backhaul.macro_cell);
        let (bs, bbs) = law(&p.backhaul.small_cell);
        let a = &self.antenna;
        NetworkConfig {
            lambda_m: self.density.macro_cells,
            lambda_s: self.density.small_cells,
            lambda_u: self.density.users,
            p_m: from_dbm(self.power.macro_dbm),
            p_s: from_dbm(self.power.small_dbm),
            t_m: from_db(self.bias.macro_db),
            t_s: from_db(self.bias.small_db),
            g_main_m: from_db(a.macro_main_db),
            g_side_m: from_db(a.macro_side_db),
            g_main_s: from_db(a.small_main_db),
            g_side_s: from_db(a.small_side_db),
            g_main_u: from_db(a.user_main_db),
            g_side_u: from_db(a.user_side_db),
            theta_m: from_deg(a.macro_beamwidth_deg),
            theta_s: from_deg(a.small_beamwidth_deg),
            theta_u: from_deg(a.user_beamwidth_deg),
            alpha: [[am, as_], [bm, bs]],
            beta: [[bam, bas], [bbm, bbs]],
            bandwidth_w: self.channel.bandwidth_hz,
            noise_psd: from_dbm(self.channel.noise_psd_dbm_hz + self.channel.noise_figure_db),
            eta_a: self.ora.eta_a,
            blockage_density: self.blockage.density,
            blockage_length: self.blockage.length_m,
            mu: self.blockage.mu_m,
            mbs_access_interference: self.model.mbs_access_interference,
            backhaul_interference: self.model.backhaul_interference,
        }
    }

    /// The noise figure is already folded into the PSD and is written as 0.
    pub fn from_network_config(c: &NetworkConfig) -> Self {
        let link = |k: usize, i: usize| LinkLaw {
            los: c.alpha[k][i].los,
            nlos: c.alpha[k][i].nlos,
            ref_db: to_db(c.beta[k][i]),
        };
        ConfigFile {
            density: Density { macro_cells: c.lambda_m, small_cells: c.lambda_s, users: c.lambda_u },
            power: Power { macro_dbm: to_dbm(c.p_m), small_dbm: to_dbm(c.p_s) },
            bias: Bias { macro_db: to_db(c.t_m), small_db: to_db(c.t_s) },
            antenna: Antenna {
                macro_main_db: to_db(c.g_main_m),
                macro_side_db: to_db(c.g_side_m),
                small_main_db: to_db(c.g_main_s),
                small_side_db: to_db(c.g_side_s),
                user_main_db: to_db(c.g_main_u),
                user_side_db: to_db(c.g_side_u),
                macro_beamwidth_deg: to_deg(c.theta_m),
                small_beamwidth_deg: to_deg(c.theta_s),
                user_beamwidth_deg: to_deg(c.theta_u),
            },
            pathloss: Pathloss {
                access: TierLaws { macro_cell: link(0, 0), small_cell: link(0, 1) },
                backhaul: TierLaws { macro_cell: link(1, 0), small_cell: link(1, 1) },
            },
            channel: Channel {
                bandwidth_hz: c.bandwidth_w,
                noise_psd_dbm_hz: to_dbm(c.noise_psd),
                noise_figure_db: 0.0,
            },
            ora: Ora { eta_a: c.eta_a },
            blockage: Blockage { density: c.blockage_density, length_m: c.blockage_length, mu_m: c.mu },
            model: Model {
                mbs_access_interference: c.mbs_access_interference,
                backhaul_interference: c.backhaul_interference,
            },
        }
    }
}

/// A validated configuration and whatever the validator warned about.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: NetworkConfig,
    pub warnings: Vec<ConfigWarning>,
}

pub fn parse_config(text: &str) -> Result<LoadedConfig, HarnessError> {
    let file: ConfigFile = toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
    let config = file.to_network_config();
    let warnings = config.validate().map_err(|e| HarnessError::Config(e.to_string()))?;
    Ok(LoadedConfig { config, warnings })
}

pub fn load_config(path: &Path) -> Result<LoadedConfig, HarnessError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| HarnessError::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text)
}

pub fn config_to_toml(config: &NetworkConfig) -> String {
    toml::to_string(&ConfigFile::from_network_config(config)).expect("config tables serialize")
}
