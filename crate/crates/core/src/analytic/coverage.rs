// Shadowed by the inherent methods whenever std is linked.
use core::f64::consts::PI;
#[allow(unused_imports)]
use num_traits::Float;

use super::association::{association_probability, competitors};
use super::{default_quadrature, Estimate, FailureSlot, Omega, PathlossLaw};
use crate::config::{interferer_gain_distribution, LinkType, NetworkConfig, Tier};
use crate::error::{Error, Result};
use crate::numerics::Quadrature;

/// Laplace-transform exponent of small-cell interference at a user whose
/// server (tier `i`, pathloss `l`) must out-bid every interferer:
///
/// `sum_G p_G int_{Omega_si l}^inf c_G / (z + c_G) lambda_as(z) dz`.
///
/// With `z = a s^alpha` (`a = Omega_si l`) the ratio `c_G / a = kappa_G`
/// no longer depends on `l`, leaving one integral over `s in [1, inf)`.
struct InterferenceExponent {
    kappa: [f64; 4],
    p: [f64; 4],
    alpha_los: f64,
    alpha_nlos: f64,
    two_pi_lambda: f64,
    mu: f64,
    omega: f64,
}

impl InterferenceExponent {
    fn new(law: &PathlossLaw, omega: &Omega, config: &NetworkConfig, i: Tier, tau: f64) -> Self {
        let gains = interferer_gain_distribution(config, LinkType::Access, Tier::Small);
        let om = omega.get(Tier::Small, i);
        let base = tau * config.power(Tier::Small) * config.ref_loss(LinkType::Access, Tier::Small)
            / (config.aligned_power(LinkType::Access, i) * om);
        let e = law.exponents(LinkType::Access, Tier::Small);
        InterferenceExponent {
            kappa: gains.values.map(|g| base * g),
            p: gains.probabilities,
            alpha_los: e.los,
            alpha_nlos: e.nlos,
            two_pi_lambda: 2.0 * PI * law.density_m2(Tier::Small),
            mu: law.mu,
            omega: om,
        }
    }

    fn gain_sum(&self, s_alpha: f64) -> f64 {
        let mut f = 0.0;
        for (k, p) in self.kappa.iter().zip(&self.p) {
            if *p > 0.0 {
                f += p * k / (s_alpha + k);
            }
        }
        f
    }

    fn at(&self, quad: &Quadrature, l: f64) -> Result<f64> {
        if self.two_pi_lambda == 0.0 || self.kappa.iter().all(|k| *k == 0.0) {
            return Ok(0.0);
        }
        let a = self.omega * l;
        let rl = a.powf(1.0 / self.alpha_los);
        let rn = a.powf(1.0 / self.alpha_nlos);
        let (bl, bn) = (rl / self.mu, rn / self.mu);
        let r = quad.integrate(
            |s| {
                let los = rl * rl * self.gain_sum(s.powf(self.alpha_los)) * s * (-bl * s).exp();
                let nlos = rn * rn * self.gain_sum(s.powf(self.alpha_nlos)) * s * -(-bn * s).exp_m1();
                los + nlos
            },
            1.0,
            f64::INFINITY,
        );
        if !r.converged || !r.value.is_finite() {
            return Err(Error::Quadrature { context: "interference exponent", value: r.value, abs_error: r.abs_error });
        }
        Ok(self.two_pi_lambda * r.value)
    }
}

/// Knobs shared by the access-coverage integrals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoverageOptions {
    /// Outer tolerance; the inner interference integral runs one order
    /// tighter.
    pub quadrature: Quadrature,
    /// Drop the interference term, leaving noise only.
    pub interference: bool,
}

impl Default for CoverageOptions {
    fn default() -> Self {
        CoverageOptions { quadrature: default_quadrature(), interference: true }
    }
}

/// `P(SINR_a > tau | tier i serves)`; `association` is `A_i`.
pub(super) fn access_coverage_given(
    law: &PathlossLaw,
    omega: &Omega,
    config: &NetworkConfig,
    i: Tier,
    tau: f64,
    association: f64,
    opts: &CoverageOptions,
) -> Result<Estimate> {
    if !(tau >= 0.0) {
        return Err(Error::Argument("coverage threshold must be non-negative"));
    }
    if association == 0.0 {
        return Err(Error::Argument("tier is never selected"));
    }
    if tau.is_infinite() {
        return Ok(Estimate { value: 0.0, abs_error: 0.0 });
    }
    let inner_quad = opts.quadrature.tightened();
    let kernel = InterferenceExponent::new(law, omega, config, i, tau);
    let noise = tau * config.noise_power() / config.aligned_power(LinkType::Access, i);
    let failure = FailureSlot::default();
    let h = |l: f64| {
        let base = competitors(law, omega, i, l) + noise * l;
        if base > 745.0 {
            return 0.0;
        }
        let j = if opts.interference {
            match kernel.at(&inner_quad, l) {
                Ok(v) => v,
                Err(e) => {
                    failure.record(e);
                    0.0
                }
            }
        } else {
            0.0
        };
        (-(base + j)).exp()
    };
    // The association probability rescales the tolerance to the
    // conditional probability.
    let quad = Quadrature { abs_tol: opts.quadrature.abs_tol * association, ..opts.quadrature };
    let (a, b) = law.integrate_density(&quad, LinkType::Access, i, law.scale(), h);
    failure.check()?;
    let a = Estimate::from_quad(a, "access coverage (LOS server)")?;
    let b = Estimate::from_quad(b, "access coverage (NLOS server)")?;
    Ok(Estimate {
        value: ((a.value + b.value) / association).clamp(0.0, 1.0),
        abs_error: (a.abs_error + b.abs_error) / association,
    })
}

pub fn access_coverage_with(
    law: &PathlossLaw,
    omega: &Omega,
    config: &NetworkConfig,
    i: Tier,
    tau: f64,
    opts: &CoverageOptions,
) -> Result<Estimate> {
    let a = association_probability(law, omega, i)?.value;
    access_coverage_given(law, omega, config, i, tau, a, opts)
}

/// `P(SINR_a > tau | macro server)`; interferers are the small cells.
pub fn mbs_coverage(law: &PathlossLaw, omega: &Omega, config: &NetworkConfig, tau: f64) -> Result<Estimate> {
    access_coverage_with(law, omega, config, Tier::Macro, tau, &CoverageOptions::default())
}

/// `P(SINR_a > tau | small-cell server)`.
pub fn sbs_access_coverage(law: &PathlossLaw, omega: &Omega, config: &NetworkConfig, tau: f64) -> Result<Estimate> {
    access_coverage_with(law, omega, config, Tier::Small, tau, &CoverageOptions::default())
}

/// Noise-limited backhaul: `P(SNR_b > tau)` for a typical small cell fed by
/// its strongest macro cell.
pub fn backhaul_snr_ccdf(law: &PathlossLaw, config: &NetworkConfig, tau: f64) -> Result<Estimate> {
    backhaul_snr_ccdf_with(law, config, tau, &default_quadrature())
}

pub(super) fn backhaul_snr_ccdf_with(
    law: &PathlossLaw,
    config: &NetworkConfig,
    tau: f64,
    quad: &Quadrature,
) -> Result<Estimate> {
    if !(tau >= 0.0) {
        return Err(Error::Argument("coverage threshold must be non-negative"));
    }
    if tau.is_infinite() {
        return Ok(Estimate { value: 0.0, abs_error: 0.0 });
    }
    let noise = tau * config.noise_power() / config.aligned_power(LinkType::Backhaul, Tier::Macro);
    let scale = 1.0 / (PI * law.density_m2(Tier::Macro)).sqrt();
    let h = |l: f64| {
        let x = noise * l + law.intensity(LinkType::Backhaul, Tier::Macro, l);
        if x > 745.0 {
            0.0
        } else {
            (-x).exp()
        }
    };
    let (a, b) = law.integrate_density(quad, LinkType::Backhaul, Tier::Macro, scale, h);
    let a = Estimate::from_quad(a, "backhaul SNR (LOS anchor)")?;
    let b = Estimate::from_quad(b, "backhaul SNR (NLOS anchor)")?;
    Ok(Estimate { value: (a.value + b.value).clamp(0.0, 1.0), abs_error: a.abs_error + b.abs_error })
}

/// Product-form joint coverage: small-cell access coverage at `tau1`
/// times typical backhaul coverage at `tau2`.
pub fn joint_sbs_backhaul_coverage(
    law: &PathlossLaw,
    omega: &Omega,
    config: &NetworkConfig,
    tau1: f64,
    tau2: f64,
) -> Result<Estimate> {
    let a = sbs_access_coverage(law, omega, config, tau1)?;
    let b = backhaul_snr_ccdf(law, config, tau2)?;
    Ok(Estimate { value: a.value * b.value, abs_error: a.abs_error * b.value + b.abs_error * a.value })
}
