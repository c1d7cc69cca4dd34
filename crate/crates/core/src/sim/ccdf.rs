// Shadowed by the inherent methods whenever std is linked.
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use super::{simulate, SimSettings, TypicalSample};
use crate::config::{NetworkConfig, Scheme, Tier};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Simulated,
    Analytic,
}

impl Provenance {
    pub fn name(self) -> &'static str {
        match self {
            Provenance::Simulated => "simulated",
            Provenance::Analytic => "analytic",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CurveMeta {
    pub config_hash: u64,
    /// Monte Carlo iterations, for simulated curves.
    pub iterations: Option<usize>,
    pub seed: Option<u64>,
    /// Quadrature tolerance, for analytic curves.
    pub tolerance: Option<f64>,
}

/// Complementary CDF sampled at ascending thresholds.
#[derive(Debug, Clone, PartialEq)]
pub struct CcdfCurve {
    pub thresholds: Vec<f64>,
    pub probabilities: Vec<f64>,
    /// Binomial standard errors; zero for analytic curves.
    pub stderr: Vec<f64>,
    pub provenance: Provenance,
    pub meta: CurveMeta,
}

impl CcdfCurve {
    pub fn analytic(thresholds: Vec<f64>, probabilities: Vec<f64>, meta: CurveMeta) -> Self {
        let stderr = alloc::vec![0.0; thresholds.len()];
        CcdfCurve { thresholds, probabilities, stderr, provenance: Provenance::Analytic, meta }
    }

    pub fn is_monotone(&self) -> bool {
        self.probabilities.windows(2).all(|w| w[1] <= w[0])
    }

    pub fn max_abs_gap(&self, other: &CcdfCurve) -> f64 {
        self.probabilities.iter().zip(&other.probabilities).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
}

/// What a simulated CCDF measures. SINR thresholds are linear, rate
/// thresholds in bits/s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Metric {
    /// Access SINR given that the typical user picked this tier.
    AccessSinr(Tier),
    /// Access SINR above the threshold and serving-cell backhaul SNR above
    /// `tau_backhaul`, given a small-cell server.
    JointSbsBackhaul {
        tau_backhaul: f64,
    },
    /// Backhaul SNR of a typical small cell.
    BackhaulSnr,
    Rate(Scheme),
}

impl Metric {
    fn needs_loads(self) -> bool {
        matches!(self, Metric::Rate(_))
    }

    /// `None` when the sample is outside the conditioning event.
    fn value(self, s: &TypicalSample) -> Result<Option<f64>> {
        Ok(match self {
            Metric::AccessSinr(t) => (s.serving.tier == t).then_some(s.sinr_access),
            Metric::JointSbsBackhaul { tau_backhaul } => match s.snr_backhaul {
                // Failing the backhaul test counts as below every threshold.
                Some(b) if b > tau_backhaul => Some(s.sinr_access),
                Some(_) => Some(f64::NEG_INFINITY),
                None => None,
            },
            Metric::BackhaulSnr => Some(s.typical_sbs_snr),
            Metric::Rate(scheme) => {
                let r = s.rates.ok_or(Error::Argument("samples were drawn without loads"))?;
                Some(match scheme {
                    Scheme::Ira => r.ira,
                    Scheme::Ora => r.ora.ok_or(Error::EtaUnset)?,
                    Scheme::Wb | Scheme::MacroOnly => r.wb,
                })
            }
        })
    }
}

/// Empirical CCDF `P(X > t)` of `metric` over pre-drawn samples.
pub fn estimate_ccdf_with(
    samples: &[TypicalSample],
    metric: Metric,
    thresholds: &[f64],
    meta: CurveMeta,
) -> Result<CcdfCurve> {
    if thresholds.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::Argument("thresholds must be strictly ascending"));
    }
    let mut values = Vec::with_capacity(samples.len());
    for s in samples {
        if let Some(v) = metric.value(s)? {
            values.push(v);
        }
    }
    let n = values.len();
    // Integer counts keep the result independent of sample order.
    let mut probabilities = Vec::with_capacity(thresholds.len());
    let mut stderr = Vec::with_capacity(thresholds.len());
    for &t in thresholds {
        let hits = values.iter().filter(|v| **v > t).count();
        let (p, se) = if n == 0 {
            (f64::NAN, f64::NAN)
        } else {
            let p = hits as f64 / n as f64;
            (p, (p * (1.0 - p) / n as f64).sqrt())
        };
        probabilities.push(p);
        stderr.push(se);
    }
    Ok(CcdfCurve { thresholds: thresholds.to_vec(), probabilities, stderr, provenance: Provenance::Simulated, meta })
}

/// Runs `n_iter` iterations and returns the CCDF of `metric`.
pub fn estimate_ccdf(
    config: &NetworkConfig,
    settings: &SimSettings,
    metric: Metric,
    thresholds: &[f64],
    n_iter: usize,
    seed: u64,
) -> Result<CcdfCurve> {
    if n_iter == 0 {
        return Err(Error::Argument("need at least one iteration"));
    }
    let settings = SimSettings { with_loads: settings.with_loads || metric.needs_loads(), ..*settings };
    let samples = simulate(config, &settings, n_iter, seed)?;
    let meta =
        CurveMeta { config_hash: config.fingerprint(), iterations: Some(n_iter), seed: Some(seed), tolerance: None };
    estimate_ccdf_with(&samples, metric, thresholds, meta)
}
