//! Network parameters and the antenna gain model.
//!
//! Everything here is linear: powers in watts, gains and losses as ratios,
//! densities in points per km². Decibel conversion happens at the file
//! boundary in the `iabsim` crate.

// Shadowed by the inherent methods whenever std is linked.
use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

const TWO_PI: f64 = 2.0 * PI;

/// Base-station tier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Tier {
    Macro,
    Small,
}

impl Tier {
    pub const ALL: [Tier; 2] = [Tier::Macro, Tier::Small];

    pub fn index(self) -> usize {
        match self {
            Tier::Macro => 0,
            Tier::Small => 1,
        }
    }

    pub fn other(self) -> Tier {
        match self {
            Tier::Macro => Tier::Small,
            Tier::Small => Tier::Macro,
        }
    }
}

/// Access links end at a user, backhaul links at a small cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LinkType {
    Access,
    Backhaul,
}

impl LinkType {
    pub fn index(self) -> usize {
        match self {
            LinkType::Access => 0,
            LinkType::Backhaul => 1,
        }
    }
}

/// Bandwidth sharing between access and backhaul. `MacroOnly` is the
/// single-tier network without small cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Scheme {
    Ira,
    Ora,
    Wb,
    MacroOnly,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::Ira => "ira",
            Scheme::Ora => "ora",
            Scheme::Wb => "wb",
            Scheme::MacroOnly => "macro",
        }
    }
}

/// LOS and NLOS pathloss exponents of one (link type, tier) pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Exponents {
    pub los: f64,
    pub nlos: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConfigWarning {
    /// Density ordering holds but with less than a factor of two between
    /// consecutive tiers, which strains the full-buffer assumption.
    SmallDensityMargin,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkConfig {
    /// Macro, small-cell and user densities, per km².
    pub lambda_m: f64,
    pub lambda_s: f64,
    pub lambda_u: f64,
    /// Transmit powers, W.
    pub p_m: f64,
    pub p_s: f64,
    /// Association biases.
    pub t_m: f64,
    pub t_s: f64,
    pub g_main_m: f64,
    pub g_side_m: f64,
    pub g_main_s: f64,
    pub g_side_s: f64,
    pub g_main_u: f64,
    pub g_side_u: f64,
    /// Main-lobe beamwidths, rad.
    pub theta_m: f64,
    pub theta_s: f64,
    pub theta_u: f64,
    /// Indexed `[link_type][tier]`.
    pub alpha: [[Exponents; 2]; 2],
    /// Loss at the 1 m reference distance, linear (< 1), `[link_type][tier]`.
    pub beta: [[f64; 2]; 2],
    /// System bandwidth, Hz.
    pub bandwidth_w: f64,
    /// Noise PSD including the receiver noise figure, W/Hz.
    pub noise_psd: f64,
    /// Access share of the bandwidth under ORA.
    pub eta_a: Option<f64>,
    /// Blockage midpoint density per km² and segment length in m.
    pub blockage_density: f64,
    pub blockage_length: f64,
    /// LOS range constant, m. `None` until calibrated.
    pub mu: Option<f64>,
    /// Sensitivity switches; both off reproduces the analysed model.
    pub mbs_access_interference: bool,
    pub backhaul_interference: bool,
}

fn db(x: f64) -> f64 {
    10f64.powf(x / 10.0)
}

impl NetworkConfig {
    /// Default deployment: 10/50/1000 per km², 40/20 dBm, 18/-2 dB BS
    /// gains, exponents 3/4 at -70 dB, 5 m blockages at 1500 per km²,
    /// 1 GHz, beamwidths 30°/30°/60°, η_a = 0.8, μ = 200 m.
    pub fn baseline() -> Self {
        let exps = Exponents { los: 3.0, nlos: 4.0 };
        Self {
            lambda_m: 10.0,
            lambda_s: 50.0,
            lambda_u: 1000.0,
            p_m: db(40.0 - 30.0),
            p_s: db(20.0 - 30.0),
            t_m: 1.0,
            t_s: 1.0,
            g_main_m: db(18.0),
            g_side_m: db(-2.0),
            g_main_s: db(18.0),
            g_side_s: db(-2.0),
            g_main_u: 1.0,
            g_side_u: 1.0,
            theta_m: PI / 6.0,
            theta_s: PI / 6.0,
            theta_u: PI / 3.0,
            alpha: [[exps; 2]; 2],
            beta: [[db(-70.0); 2]; 2],
            bandwidth_w: 1e9,
            noise_psd: db(-174.0 - 30.0 + 10.0),
            eta_a: Some(0.8),
            blockage_density: 1500.0,
            blockage_length: 5.0,
            mu: Some(200.0),
            mbs_access_interference: false,
            backhaul_interference: false,
        }
    }

    pub fn density(&self, tier: Tier) -> f64 {
        match tier {
            Tier::Macro => self.lambda_m,
            Tier::Small => self.lambda_s,
        }
    }

    /// Density in points per m².
    pub fn density_m2(&self, tier: Tier) -> f64 {
        self.density(tier) * 1e-6
    }

    pub fn user_density_m2(&self) -> f64 {
        self.lambda_u * 1e-6
    }

    pub fn power(&self, tier: Tier) -> f64 {
        match tier {
            Tier::Macro => self.p_m,
            Tier::Small => self.p_s,
        }
    }

    pub fn bias(&self, tier: Tier) -> f64 {
        match tier {
            Tier::Macro => self.t_m,
            Tier::Small => self.t_s,
        }
    }

    pub fn main_gain(&self, tier: Tier) -> f64 {
        match tier {
            Tier::Macro => self.g_main_m,
            Tier::Small => self.g_main_s,
        }
    }

    pub fn side_gain(&self, tier: Tier) -> f64 {
        match tier {
            Tier::Macro => self.g_side_m,
            Tier::Small => self.g_side_s,
        }
    }

    pub fn beamwidth(&self, tier: Tier) -> f64 {
        match tier {
            Tier::Macro => self.theta_m,
            Tier::Small => self.theta_s,
        }
    }

    pub fn exponents(&self, link: LinkType, tier: Tier) -> Exponents {
        self.alpha[link.index()][tier.index()]
    }

    pub fn ref_loss(&self, link: LinkType, tier: Tier) -> f64 {
        self.beta[link.index()][tier.index()]
    }

    pub fn noise_power(&self) -> f64 {
        self.noise_psd * self.bandwidth_w
    }

    /// Biased association weight `P T β_a G` of a tier (the user gain is
    /// common to both tiers and cancels).
    pub fn association_weight(&self, tier: Tier) -> f64 {
        self.power(tier) * self.bias(tier) * self.ref_loss(LinkType::Access, tier) * self.main_gain(tier)
    }

    /// Received-power scale `P β G_tx G_rx` of a perfectly aligned link.
    pub fn aligned_power(&self, link: LinkType, tier: Tier) -> f64 {
        let rx = match link {
            LinkType::Access => self.g_main_u,
            LinkType::Backhaul => self.g_main_s,
        };
        self.power(tier) * self.ref_loss(link, tier) * self.main_gain(tier) * rx
    }

    pub fn mu(&self) -> Result<f64> {
        self.mu.ok_or(Error::Config("mu is unset; calibrate it first"))
    }

    pub fn validate(&self) -> Result<Vec<ConfigWarning>> {
        let positive = [
            self.lambda_m,
            self.lambda_u,
            self.p_m,
            self.p_s,
            self.t_m,
            self.t_s,
            self.g_main_m,
            self.g_side_m,
            self.g_main_s,
            self.g_side_s,
            self.g_main_u,
            self.g_side_u,
            self.bandwidth_w,
            self.noise_psd,
            self.blockage_length,
        ];
        if positive.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::Config("densities, powers, biases, gains, bandwidth and noise must be positive"));
        }
        if !(self.lambda_s.is_finite() && self.lambda_s >= 0.0) {
            return Err(Error::Config("lambda_s must be non-negative"));
        }
        if !(self.blockage_density.is_finite() && self.blockage_density >= 0.0) {
            return Err(Error::Config("blockage density must be non-negative"));
        }
        for theta in [self.theta_m, self.theta_s, self.theta_u] {
            if !(theta > 0.0 && theta <= TWO_PI) {
                return Err(Error::Config("beamwidths must lie in (0, 2π]"));
            }
        }
        for row in &self.alpha {
            for e in row {
                if !(e.los > 2.0 && e.nlos >= e.los && e.nlos.is_finite()) {
                    return Err(Error::Config("need alpha_nlos >= alpha_los > 2"));
                }
            }
        }
        for row in &self.beta {
            for b in row {
                if !(b.is_finite() && *b > 0.0) {
                    return Err(Error::Config("reference losses must be positive"));
                }
            }
        }
        if let Some(eta) = self.eta_a {
            if !(eta > 0.0 && eta < 1.0) {
                return Err(Error::Config("eta_a must lie in (0, 1)"));
            }
        }
        if let Some(mu) = self.mu {
            if !(mu > 0.0) {
                return Err(Error::Config("mu must be positive"));
            }
        }

        let mut warnings = Vec::new();
        // lambda_s = 0 is the macro-only network.
        if self.lambda_s > 0.0 {
            if !(self.lambda_m < self.lambda_s && self.lambda_s < self.lambda_u) {
                return Err(Error::Config("need lambda_m < lambda_s < lambda_u"));
            }
            if self.lambda_s < 2.0 * self.lambda_m || self.lambda_u < 2.0 * self.lambda_s {
                warnings.push(ConfigWarning::SmallDensityMargin);
            }
        } else if self.lambda_m >= self.lambda_u {
            return Err(Error::Config("need lambda_m < lambda_u"));
        }
        Ok(warnings)
    }

    /// Stable 64-bit FNV-1a digest of every parameter, used to tag outputs.
    pub fn fingerprint(&self) -> u64 {
        let mut h = Fnv::default();
        for v in [
            self.lambda_m,
            self.lambda_s,
            self.lambda_u,
            self.p_m,
            self.p_s,
            self.t_m,
            self.t_s,
            self.g_main_m,
            self.g_side_m,
            self.g_main_s,
            self.g_side_s,
            self.g_main_u,
            self.g_side_u,
            self.theta_m,
            self.theta_s,
            self.theta_u,
            self.bandwidth_w,
            self.noise_psd,
            self.eta_a.unwrap_or(f64::NAN),
            self.blockage_density,
            self.blockage_length,
            self.mu.unwrap_or(f64::NAN),
        ] {
            h.write(v.to_bits());
        }
        for link in 0..2 {
            for tier in 0..2 {
                h.write(self.alpha[link][tier].los.to_bits());
                h.write(self.alpha[link][tier].nlos.to_bits());
                h.write(self.beta[link][tier].to_bits());
            }
        }
        h.write(self.mbs_access_interference as u64);
        h.write(self.backhaul_interference as u64);
        h.0
    }
}

struct Fnv(u64);

impl Default for Fnv {
    fn default() -> Self {
        Fnv(0xcbf2_9ce4_8422_2325)
    }
}

impl Fnv {
    fn write(&mut self, word: u64) {
        for byte in word.to_le_bytes() {
            self.0 ^= byte as u64;
            self.0 = self.0.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
}

/// Discrete law of the effective antenna gain of an interfering link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainDistribution {
    pub values: [f64; 4],
    pub probabilities: [f64; 4],
}

impl GainDistribution {
    pub fn mean(&self) -> f64 {
        self.values.iter().zip(&self.probabilities).map(|(v, p)| v * p).sum()
    }

    /// Inverse-CDF draw from a uniform `u` in `[0, 1)`.
    pub fn pick(&self, u: f64) -> f64 {
        let mut acc = 0.0;
        for (v, p) in self.values.iter().zip(&self.probabilities) {
            acc += p;
            if u < acc {
                return *v;
            }
        }
        // Rounding left the cumulative sum a hair below 1.
        self.values
            .iter()
            .zip(&self.probabilities)
            .rev()
            .find(|(_, p)| **p > 0.0)
            .map(|(v, _)| *v)
            .unwrap_or(self.values[3])
    }
}

/// Gain seen on an interfering link from a tier-`tier` transmitter whose
/// beam points uniformly at random. The receiver is a user for access links
/// and a small cell for backhaul links.
///
/// Outcomes are ordered (main, main), (main, side), (side, main),
/// (side, side) for (transmitter, receiver).
pub fn interferer_gain_distribution(config: &NetworkConfig, link: LinkType, tier: Tier) -> GainDistribution {
    let (g_tx, g_tx_side, theta_tx) = (config.main_gain(tier), config.side_gain(tier), config.beamwidth(tier));
    let (g_rx, g_rx_side, theta_rx) = match link {
        LinkType::Access => (config.g_main_u, config.g_side_u, config.theta_u),
        LinkType::Backhaul => (config.g_main_s, config.g_side_s, config.theta_s),
    };
    let p_tx = theta_tx / TWO_PI;
    let p_rx = theta_rx / TWO_PI;
    GainDistribution {
        values: [g_tx * g_rx, g_tx * g_rx_side, g_tx_side * g_rx, g_tx_side * g_rx_side],
        probabilities: [p_tx * p_rx, p_tx * (1.0 - p_rx), (1.0 - p_tx) * p_rx, (1.0 - p_tx) * (1.0 - p_rx)],
    }
}
