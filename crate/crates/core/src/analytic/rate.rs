// Shadowed by the inherent methods whenever std is linked.
use alloc::collections::BTreeMap;
use core::cell::RefCell;
use core::f64::consts::LN_2;
#[allow(unused_imports)]
use num_traits::Float;

use super::association::association_probability;
use super::coverage::{access_coverage_given, backhaul_snr_ccdf_with, CoverageOptions};
use super::load::{LoadKernel, LoadPmf};
use super::{Estimate, Omega, PathlossLaw};
use crate::config::{NetworkConfig, Scheme, Tier};
use crate::error::{Error, Result};
use crate::numerics::find_root;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateEstimate {
    pub value: f64,
    /// Quadrature error carried through the series plus the truncated
    /// load mass.
    pub abs_error: f64,
    /// Largest load kept in the macro and small-cell series.
    pub n_max: (u64, u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Macro = 0,
    Small = 1,
    Backhaul = 2,
}

#[derive(Debug, Default)]
struct Cache {
    exact: BTreeMap<u64, Estimate>,
    nodes: BTreeMap<i64, Estimate>,
}

/// Lower and upper thresholds covered by the interpolation table.
const TABLE_RANGE: (f64, f64) = (1e-6, 1e9);

/// Coverage, association and rate evaluation for one configuration.
///
/// Coverage values are memoised per threshold. With interpolation enabled
/// (the default) thresholds inside [`TABLE_RANGE`] are answered by linear
/// interpolation in `log tau` between lazily computed nodes, which keeps
/// long series and median searches affordable; the interpolant of a
/// non-increasing node sequence is itself non-increasing, so dominance
/// between schemes survives.
#[derive(Debug)]
pub struct AnalyticEngine {
    config: NetworkConfig,
    law: PathlossLaw,
    omega: Omega,
    pub a_m: f64,
    pub a_s: f64,
    options: CoverageOptions,
    nodes_per_decade: Option<u32>,
    caches: RefCell<[Cache; 3]>,
}

impl AnalyticEngine {
    pub fn new(config: &NetworkConfig) -> Result<Self> {
        config.validate()?;
        let law = PathlossLaw::new(config)?;
        Self::from_law(config, law)
    }

    pub fn with_mu(config: &NetworkConfig, mu: f64) -> Result<Self> {
        let mut c = config.clone();
        c.mu = Some(mu);
        Self::new(&c)
    }

    /// The same deployment with the small cells removed.
    pub fn macro_only(config: &NetworkConfig) -> Result<Self> {
        let mut c = config.clone();
        c.lambda_s = 0.0;
        Self::new(&c)
    }

    fn from_law(config: &NetworkConfig, law: PathlossLaw) -> Result<Self> {
        let omega = Omega::new(config);
        let a_m = association_probability(&law, &omega, Tier::Macro)?.value;
        let a_s = association_probability(&law, &omega, Tier::Small)?.value;
        Ok(AnalyticEngine {
            config: config.clone(),
            law,
            omega,
            a_m,
            a_s,
            options: CoverageOptions::default(),
            nodes_per_decade: Some(64),
            caches: RefCell::new(Default::default()),
        })
    }

    /// `None` evaluates every threshold exactly.
    pub fn with_interpolation(mut self, nodes_per_decade: Option<u32>) -> Self {
        self.nodes_per_decade = nodes_per_decade;
        self.caches = RefCell::new(Default::default());
        self
    }

    pub fn with_options(mut self, options: CoverageOptions) -> Self {
        self.options = options;
        self.caches = RefCell::new(Default::default());
        self
    }

    pub fn config(&self) -> &NetworkConfig {
        &self.config
    }

    pub fn law(&self) -> &PathlossLaw {
        &self.law
    }

    pub fn omega(&self) -> &Omega {
        &self.omega
    }

    pub fn tolerance(&self) -> f64 {
        self.options.quadrature.abs_tol
    }

    fn compute(&self, kind: Kind, tau: f64) -> Result<Estimate> {
        match kind {
            Kind::Macro => {
                access_coverage_given(&self.law, &self.omega, &self.config, Tier::Macro, tau, self.a_m, &self.options)
            }
            Kind::Small => {
                access_coverage_given(&self.law, &self.omega, &self.config, Tier::Small, tau, self.a_s, &self.options)
            }
            Kind::Backhaul => backhaul_snr_ccdf_with(&self.law, &self.config, tau, &self.options.quadrature),
        }
    }

    fn exact(&self, kind: Kind, tau: f64) -> Result<Estimate> {
        if let Some(e) = self.caches.borrow()[kind as usize].exact.get(&tau.to_bits()) {
            return Ok(*e);
        }
        let e = self.compute(kind, tau)?;
        self.caches.borrow_mut()[kind as usize].exact.insert(tau.to_bits(), e);
        Ok(e)
    }

    fn node(&self, kind: Kind, index: i64, npd: u32) -> Result<Estimate> {
        if let Some(e) = self.caches.borrow()[kind as usize].nodes.get(&index) {
            return Ok(*e);
        }
        let tau = 10f64.powf(index as f64 / npd as f64);
        let e = self.compute(kind, tau)?;
        self.caches.borrow_mut()[kind as usize].nodes.insert(index, e);
        Ok(e)
    }

    fn coverage(&self, kind: Kind, tau: f64) -> Result<Estimate> {
        if tau == 0.0 {
            return Ok(Estimate { value: 1.0, abs_error: 0.0 });
        }
        if tau.is_infinite() {
            return Ok(Estimate { value: 0.0, abs_error: 0.0 });
        }
        let Some(npd) = self.nodes_per_decade else {
            return self.exact(kind, tau);
        };
        if !(tau >= TABLE_RANGE.0 && tau <= TABLE_RANGE.1) {
            return self.exact(kind, tau);
        }
        let t = tau.log10() * npd as f64;
        let i = t.floor();
        let frac = t - i;
        let lo = self.node(kind, i as i64, npd)?;
        if frac == 0.0 {
            return Ok(lo);
        }
        let hi = self.node(kind, i as i64 + 1, npd)?;
        Ok(Estimate { value: lo.value + frac * (hi.value - lo.value), abs_error: lo.abs_error.max(hi.abs_error) })
    }

    pub fn mbs_coverage(&self, tau: f64) -> Result<Estimate> {
        if self.a_m == 0.0 {
            return Err(Error::Argument("macro tier is never selected"));
        }
        self.coverage(Kind::Macro, tau)
    }

    pub fn sbs_access_coverage(&self, tau: f64) -> Result<Estimate> {
        if self.a_s == 0.0 {
            return Err(Error::Argument("small-cell tier is never selected"));
        }
        self.coverage(Kind::Small, tau)
    }

    pub fn backhaul_snr_ccdf(&self, tau: f64) -> Result<Estimate> {
        self.coverage(Kind::Backhaul, tau)
    }

    pub fn joint_sbs_backhaul_coverage(&self, tau1: f64, tau2: f64) -> Result<Estimate> {
        let a = self.sbs_access_coverage(tau1)?;
        let b = self.backhaul_snr_ccdf(tau2)?;
        Ok(Estimate { value: a.value * b.value, abs_error: a.abs_error * b.value + b.abs_error * a.value })
    }

    pub fn rate_coverage(&self, scheme: Scheme, rho: f64) -> Result<RateEstimate> {
        match scheme {
            Scheme::Ora => {
                let eta = self.config.eta_a.ok_or(Error::EtaUnset)?;
                self.ora_rate_coverage(rho, eta)
            }
            _ => self.series(scheme, rho, 0.0),
        }
    }

    /// ORA rate coverage with access share `eta` instead of the configured
    /// one.
    pub fn ora_rate_coverage(&self, rho: f64, eta: f64) -> Result<RateEstimate> {
        if !(eta > 0.0 && eta < 1.0) {
            return Err(Error::Argument("eta_a must lie in (0, 1)"));
        }
        self.series(Scheme::Ora, rho, eta)
    }

    fn series(&self, scheme: Scheme, rho: f64, eta: f64) -> Result<RateEstimate> {
        if !(rho >= 0.0 && rho.is_finite()) {
            return Err(Error::Argument("rate threshold must be non-negative"));
        }
        if scheme == Scheme::MacroOnly && self.a_s > 0.0 {
            return Err(Error::Argument("macro-only rate needs an engine built with AnalyticEngine::macro_only"));
        }
        let c = &self.config;
        let w = c.bandwidth_w;
        let (lm, ls, lu) = (c.lambda_m, c.lambda_s, c.lambda_u);
        // 2^x - 1 without cancellation for small x.
        let thr = |x: f64| (x * LN_2).exp_m1();

        let mut value = 0.0;
        let mut err = 0.0;
        let mut n_max = (0, 0);

        if self.a_m > 0.0 {
            let pmf = LoadPmf::new(LoadKernel::Tagged, lm / self.a_m, lu)?;
            n_max.0 = pmf.n_max();
            let mut sum = 0.0;
            for (n, p) in pmf.iter() {
                let nf = n as f64;
                let tau = match scheme {
                    Scheme::Ira => thr(rho / w * (nf + self.a_s * lu / lm)),
                    Scheme::Ora => thr(rho * nf / (eta * w)),
                    Scheme::Wb | Scheme::MacroOnly => thr(rho * nf / w),
                };
                let cov = self
                    .coverage(Kind::Macro, tau)
                    .map_err(|_| Error::Series { index: n as usize, context: "macro coverage term" })?;
                sum += p * cov.value;
                err += self.a_m * p * cov.abs_error;
                if cov.value < 1e-14 {
                    break;
                }
            }
            value += self.a_m * sum;
            err += self.a_m * (1.0 - pmf.mass()).max(0.0);
        }

        if self.a_s > 0.0 && scheme != Scheme::MacroOnly {
            let pmf = LoadPmf::new(LoadKernel::Tagged, ls / self.a_s, lu)?;
            n_max.1 = pmf.n_max();
            let mut sum = 0.0;
            for (n, p) in pmf.iter() {
                let nf = n as f64;
                let (tau_a, tau_b) = match scheme {
                    Scheme::Ira => (thr(rho * nf / w * (1.0 + lm * nf / lu)), Some(thr(rho * (nf + lu / lm) / w))),
                    Scheme::Ora => {
                        (thr(rho * nf / (w * eta)), Some(thr(rho * (nf + self.a_s * lu / lm) / (w * (1.0 - eta)))))
                    }
                    _ => (thr(rho * nf / w), None),
                };
                let access = self
                    .coverage(Kind::Small, tau_a)
                    .map_err(|_| Error::Series { index: n as usize, context: "small-cell access coverage term" })?;
                let backhaul = match tau_b {
                    Some(t) => self
                        .coverage(Kind::Backhaul, t)
                        .map_err(|_| Error::Series { index: n as usize, context: "backhaul coverage term" })?,
                    None => Estimate { value: 1.0, abs_error: 0.0 },
                };
                let term = access.value * backhaul.value;
                sum += p * term;
                err += self.a_s * p * (access.abs_error * backhaul.value + backhaul.abs_error * access.value);
                if term < 1e-14 {
                    break;
                }
            }
            value += self.a_s * sum;
            err += self.a_s * (1.0 - pmf.mass()).max(0.0);
        }
        Ok(RateEstimate { value: value.clamp(0.0, 1.0), abs_error: err, n_max })
    }

    /// Rate `rho_50` with `P_r(rho_50) = 0.5`, to a relative 1e-4.
    pub fn median_rate(&self, scheme: Scheme) -> Result<f64> {
        self.quantile_rate(|rho| self.rate_coverage(scheme, rho))
    }

    pub fn ora_median_rate(&self, eta: f64) -> Result<f64> {
        self.quantile_rate(|rho| self.ora_rate_coverage(rho, eta))
    }

    fn quantile_rate(&self, f: impl Fn(f64) -> Result<RateEstimate>) -> Result<f64> {
        let mut lo = 1e5;
        while f(lo)?.value < 0.5 {
            lo /= 10.0;
            if lo < 1.0 {
                return Err(Error::Argument("rate coverage is below one half at every rate"));
            }
        }
        let mut hi = lo * 10.0;
        while f(hi)?.value >= 0.5 {
            hi *= 10.0;
            if hi > 1e15 {
                return Err(Error::Argument("rate coverage stays above one half"));
            }
        }
        let failure = super::FailureSlot::default();
        let x = find_root(
            |x| match f(x.exp()) {
                Ok(r) => r.value - 0.5,
                Err(e) => {
                    failure.record(e);
                    0.0
                }
            },
            lo.ln(),
            hi.ln(),
            1e-4,
        )?;
        failure.check()?;
        Ok(x.exp())
    }
}
