// Shadowed by the inherent methods whenever std is linked.
use super::{Estimate, Omega, PathlossLaw};
use crate::config::{LinkType, Tier};
use crate::error::Result;
use crate::geometry::LinkState;
use crate::numerics::Quadrature;
#[allow(unused_imports)]
use num_traits::Float;

/// Association integrals are cheap, so they run far tighter than the
/// coverage integrals that divide by them.
pub(super) fn association_quadrature() -> Quadrature {
    Quadrature::new(1e-11, 1e-11)
}

/// `sum_j Lambda_aj((0, Omega_ji l])`: mean number of BSs that would beat a
/// tier-`i` server at pathloss `l`.
pub(super) fn competitors(law: &PathlossLaw, omega: &Omega, i: Tier, l: f64) -> f64 {
    Tier::ALL.iter().map(|&j| law.intensity(LinkType::Access, j, omega.get(j, i) * l)).sum()
}

fn association_state(law: &PathlossLaw, omega: &Omega, i: Tier, state: LinkState) -> Result<Estimate> {
    let r = law.integrate_state(&association_quadrature(), LinkType::Access, i, state, law.scale(), |l| {
        (-competitors(law, omega, i, l)).exp()
    });
    Estimate::from_quad(r, "association probability")
}

/// Probability that the typical user picks tier `i`.
pub fn association_probability(law: &PathlossLaw, omega: &Omega, i: Tier) -> Result<Estimate> {
    if law.density_m2(i) == 0.0 {
        return Ok(Estimate { value: 0.0, abs_error: 0.0 });
    }
    let a = association_state(law, omega, i, LinkState::Los)?;
    let b = association_state(law, omega, i, LinkState::Nlos)?;
    Ok(Estimate { value: a.value + b.value, abs_error: a.abs_error + b.abs_error })
}

/// Density of the serving pathloss given association with tier `i`.
#[derive(Debug, Clone, Copy)]
pub struct ServingPdf {
    law: PathlossLaw,
    omega: Omega,
    tier: Tier,
    /// The association probability that normalises the density.
    pub association: f64,
}

impl ServingPdf {
    pub fn at(&self, l: f64) -> f64 {
        if !(l > 0.0) || self.association == 0.0 {
            return 0.0;
        }
        (-competitors(&self.law, &self.omega, self.tier, l)).exp() * self.law.density(LinkType::Access, self.tier, l)
            / self.association
    }
}

pub fn serving_pathloss_pdf(law: &PathlossLaw, omega: &Omega, i: Tier) -> Result<ServingPdf> {
    Ok(ServingPdf { law: *law, omega: *omega, tier: i, association: association_probability(law, omega, i)?.value })
}

/// Small-cell association split by the state of the serving link.
#[derive(Debug, Clone, Copy)]
pub struct SplitAssociation {
    pub a_s_los: f64,
    pub a_s_nlos: f64,
    law: PathlossLaw,
    omega: Omega,
}

impl SplitAssociation {
    pub fn probability(&self, state: LinkState) -> f64 {
        match state {
            LinkState::Los => self.a_s_los,
            LinkState::Nlos => self.a_s_nlos,
        }
    }

    /// Serving pathloss density given a small-cell server in `state`.
    pub fn conditional_pdf(&self, state: LinkState, l: f64) -> f64 {
        let a = self.probability(state);
        if !(l > 0.0) || a == 0.0 {
            return 0.0;
        }
        (-competitors(&self.law, &self.omega, Tier::Small, l)).exp()
            * self.law.state_density(LinkType::Access, Tier::Small, state, l)
            / a
    }
}

pub fn split_association(law: &PathlossLaw, omega: &Omega) -> Result<SplitAssociation> {
    let (a_s_los, a_s_nlos) = if law.density_m2(Tier::Small) == 0.0 {
        (0.0, 0.0)
    } else {
        (
            association_state(law, omega, Tier::Small, LinkState::Los)?.value,
            association_state(law, omega, Tier::Small, LinkState::Nlos)?.value,
        )
    };
    Ok(SplitAssociation { a_s_los, a_s_nlos, law: *law, omega: *omega })
}
