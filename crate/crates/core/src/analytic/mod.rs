//! Stochastic-geometry evaluation under independent exponential blocking:
//! each link of length `r` is LOS with probability `exp(-r/mu)`.
//!
//! Integrals over pathloss `l` are taken in the distance domain instead:
//! `lambda(l) dl` splits into a LOS part `2 pi lambda r e^{-r/mu} dr` with
//! `l = r^alpha_los` and an NLOS part `2 pi lambda r (1 - e^{-r/mu}) dr` with
//! `l = r^alpha_nlos`. Both pieces are smooth in `r`, which keeps the
//! adaptive rule away from the `l^{2/alpha - 1}` singularity at the origin.

mod association;
mod backhaul;
mod calibrate;
mod coverage;
mod load;
mod rate;

// Shadowed by the inherent methods whenever std is linked.
use core::cell::Cell;
use core::f64::consts::PI;
#[allow(unused_imports)]
use num_traits::Float;

use crate::config::{Exponents, LinkType, NetworkConfig, Tier};
use crate::error::{Error, Result};
use crate::geometry::LinkState;
use crate::numerics::{Quadrature, QuadratureResult};

pub use association::{association_probability, serving_pathloss_pdf, split_association, ServingPdf, SplitAssociation};
pub use backhaul::conditional_backhaul_intensity;
pub use calibrate::{calibrate_mu, Calibration};
pub use coverage::{
    access_coverage_with, backhaul_snr_ccdf, joint_sbs_backhaul_coverage, mbs_coverage, sbs_access_coverage,
    CoverageOptions,
};
pub use load::{load_pmf, LoadKernel, LoadPmf};
pub use rate::{AnalyticEngine, RateEstimate};

/// Probability that a link of length `r` is LOS.
pub fn los_prob(r: f64, mu: f64) -> f64 {
    (-r / mu).exp()
}

/// A probability with the error estimate of the quadrature behind it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub abs_error: f64,
}

impl Estimate {
    fn from_quad(r: QuadratureResult, context: &'static str) -> Result<Self> {
        if !r.converged || !r.value.is_finite() {
            return Err(Error::Quadrature { context, value: r.value, abs_error: r.abs_error });
        }
        Ok(Estimate { value: r.value, abs_error: r.abs_error })
    }
}

/// `int_0^R r e^{-r/mu} dr`, stable for `R << mu` and for `mu = inf`.
fn los_mass(radius: f64, mu: f64) -> f64 {
    let x = radius / mu;
    if x < 0.5 {
        // sum_k (-1)^k R^{k+2} / (mu^k k! (k+2))
        let mut term = 1.0;
        let mut sum = 0.5;
        for k in 1..30 {
            term *= -x / k as f64;
            let add = term / (k + 2) as f64;
            sum += add;
            if add.abs() < 1e-17 * sum {
                break;
            }
        }
        radius * radius * sum
    } else {
        mu * mu * (1.0 - (-x).exp() * (1.0 + x))
    }
}

/// `int_0^R r (1 - e^{-r/mu}) dr`.
fn nlos_mass(radius: f64, mu: f64) -> f64 {
    let x = radius / mu;
    if x < 0.5 {
        let mut term = 1.0;
        let mut sum = 0.0;
        for k in 1..30 {
            term *= -x / k as f64;
            let add = -term / (k + 2) as f64;
            sum += add;
            if add.abs() < 1e-17 * sum.abs() {
                break;
            }
        }
        radius * radius * sum
    } else {
        radius * radius / 2.0 - los_mass(radius, mu)
    }
}

/// Pathloss processes seen from a typical receiver: for each link type and
/// tier the PPP on the half line formed by the pathlosses of all BSs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathlossLaw {
    pub mu: f64,
    exps: [[Exponents; 2]; 2],
    /// Per m².
    lambda: [f64; 2],
}

impl PathlossLaw {
    /// Uses `config.mu`; fails if it is unset.
    pub fn new(config: &NetworkConfig) -> Result<Self> {
        Ok(Self::with_mu(config, config.mu()?))
    }

    /// `mu = f64::INFINITY` gives the blockage-free network.
    pub fn with_mu(config: &NetworkConfig, mu: f64) -> Self {
        PathlossLaw { mu, exps: config.alpha, lambda: [config.density_m2(Tier::Macro), config.density_m2(Tier::Small)] }
    }

    pub fn exponents(&self, k: LinkType, i: Tier) -> Exponents {
        self.exps[k.index()][i.index()]
    }

    /// Per m².
    pub fn density_m2(&self, i: Tier) -> f64 {
        self.lambda[i.index()]
    }

    /// `(Lambda_los, Lambda_nlos)` of `[0, l)`.
    pub fn intensity_split(&self, k: LinkType, i: Tier, l: f64) -> (f64, f64) {
        if !(l > 0.0) {
            return (0.0, 0.0);
        }
        let e = self.exponents(k, i);
        let c = 2.0 * PI * self.lambda[i.index()];
        (c * los_mass(l.powf(1.0 / e.los), self.mu), c * nlos_mass(l.powf(1.0 / e.nlos), self.mu))
    }

    /// `Lambda([0, l))`.
    pub fn intensity(&self, k: LinkType, i: Tier, l: f64) -> f64 {
        let (a, b) = self.intensity_split(k, i, l);
        a + b
    }

    /// `(lambda_los(l), lambda_nlos(l))`, derivatives of the split measure.
    pub fn density_split(&self, k: LinkType, i: Tier, l: f64) -> (f64, f64) {
        if !(l > 0.0) {
            return (0.0, 0.0);
        }
        let e = self.exponents(k, i);
        let c = 2.0 * PI * self.lambda[i.index()];
        let rl = l.powf(1.0 / e.los);
        let rn = l.powf(1.0 / e.nlos);
        (c * rl * rl * (-rl / self.mu).exp() / (e.los * l), c * rn * rn * -(-rn / self.mu).exp_m1() / (e.nlos * l))
    }

    pub fn density(&self, k: LinkType, i: Tier, l: f64) -> f64 {
        let (a, b) = self.density_split(k, i, l);
        a + b
    }

    pub fn state_density(&self, k: LinkType, i: Tier, state: LinkState, l: f64) -> f64 {
        let (a, b) = self.density_split(k, i, l);
        match state {
            LinkState::Los => a,
            LinkState::Nlos => b,
        }
    }

    /// Integrates `h(l) lambda_state(l) dl` over `l > 0` for one link state,
    /// in the distance domain. `scale` is a typical distance in metres.
    fn integrate_state<H: FnMut(f64) -> f64>(
        &self,
        quad: &Quadrature,
        k: LinkType,
        i: Tier,
        state: LinkState,
        scale: f64,
        mut h: H,
    ) -> QuadratureResult {
        let e = self.exponents(k, i);
        let c = 2.0 * PI * self.lambda[i.index()] * scale * scale;
        let mu = self.mu;
        let (alpha, los) = match state {
            LinkState::Los => (e.los, true),
            LinkState::Nlos => (e.nlos, false),
        };
        if c == 0.0 {
            return QuadratureResult { value: 0.0, abs_error: 0.0, evaluations: 0, converged: true };
        }
        quad.integrate(
            |x| {
                let r = scale * x;
                let p = if los { (-r / mu).exp() } else { -(-r / mu).exp_m1() };
                if p == 0.0 {
                    return 0.0;
                }
                let v = h(r.powf(alpha));
                if v == 0.0 {
                    0.0
                } else {
                    c * x * p * v
                }
            },
            0.0,
            f64::INFINITY,
        )
    }

    /// `int_0^inf h(l) lambda(l) dl`, split into the LOS and NLOS parts.
    fn integrate_density<H: FnMut(f64) -> f64>(
        &self,
        quad: &Quadrature,
        k: LinkType,
        i: Tier,
        scale: f64,
        mut h: H,
    ) -> (QuadratureResult, QuadratureResult) {
        let half = Quadrature { abs_tol: quad.abs_tol / 2.0, ..*quad };
        let a = self.integrate_state(&half, k, i, LinkState::Los, scale, &mut h);
        let b = self.integrate_state(&half, k, i, LinkState::Nlos, scale, &mut h);
        (a, b)
    }

    /// Typical nearest-BS distance over both tiers, m.
    fn scale(&self) -> f64 {
        let total = self.lambda[0] + self.lambda[1];
        1.0 / (PI * total).sqrt()
    }
}

/// Biased-power ratios `Omega[j][i] = P_j T_j beta_aj G_j / (P_i T_i beta_ai G_i)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Omega {
    weight: [f64; 2],
}

impl Omega {
    pub fn new(config: &NetworkConfig) -> Self {
        Omega { weight: Tier::ALL.map(|t| config.association_weight(t)) }
    }

    pub fn get(&self, j: Tier, i: Tier) -> f64 {
        self.weight[j.index()] / self.weight[i.index()]
    }
}

/// Holds the first failure seen inside a closure handed to the quadrature.
#[derive(Default)]
struct FailureSlot(Cell<Option<Error>>);

impl FailureSlot {
    fn record(&self, e: Error) {
        let prev = self.0.take();
        self.0.set(Some(prev.unwrap_or(e)));
    }

    fn check(self) -> Result<()> {
        match self.0.into_inner() {
            Some(e) => Err(e),
            None => Ok(()),
        }
    }
}

/// Default tolerances: 1e-6 absolute, 1e-4 relative per integral.
pub fn default_quadrature() -> Quadrature {
    Quadrature::new(1e-6, 1e-4)
}
