// Shadowed by the inherent methods whenever std is linked.
use super::association::association_probability;
use super::{Omega, PathlossLaw};
use crate::config::{NetworkConfig, Tier};
use crate::error::{Error, Result};
use crate::geometry::Rect;
use crate::numerics::{find_root, golden_section_max};
use crate::sim::empirical_association_prob;
#[allow(unused_imports)]
use num_traits::Float;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Calibration {
    /// Fitted LOS scale, m.
    pub mu: f64,
    /// Set when there is nothing to fit (no blockages) and `mu` is the
    /// upper end of the bracket.
    pub saturated: bool,
    /// Macro association probability measured by the simulator.
    pub a_m_hat: f64,
    pub stderr: f64,
}

/// Fits `mu` so that the analytic macro association probability under
/// independent blocking equals the one measured in correlated-blockage
/// snapshots.
///
/// `A_m(mu)` is not monotone: it dips where nearby small cells are mostly
/// LOS and distant macro cells mostly NLOS. The fit uses the branch above
/// that dip, where a longer LOS range means more macro association, and
/// bisects it to 1 m.
pub fn calibrate_mu(
    config: &NetworkConfig,
    window: Rect,
    n_iter: usize,
    bracket: (f64, f64),
    seed: u64,
) -> Result<Calibration> {
    let (lo, hi) = bracket;
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        return Err(Error::Argument("calibration bracket must satisfy 0 < lo < hi < inf"));
    }
    let est = empirical_association_prob(config, window, n_iter, seed)?;
    if config.blockage_density == 0.0 || config.blockage_length == 0.0 {
        return Ok(Calibration { mu: hi, saturated: true, a_m_hat: est.a_m, stderr: est.stderr });
    }
    let omega = Omega::new(config);
    let mut failure = None;
    let mut g = |mu: f64| match association_probability(&PathlossLaw::with_mu(config, mu), &omega, Tier::Macro) {
        Ok(a) => a.value - est.a_m,
        Err(e) => {
            failure.get_or_insert(e);
            0.0
        }
    };
    let dip = golden_section_max(|t: f64| -g(t.exp()), lo.ln(), hi.ln(), 1e-3).exp();
    let root = find_root(&mut g, dip.max(lo), hi, 1.0);
    if let Some(e) = failure {
        return Err(e);
    }
    let mu = root.map_err(|_| Error::NoSignChange { lo, hi })?;
    Ok(Calibration { mu, saturated: false, a_m_hat: est.a_m, stderr: est.stderr })
}
