//! Monte Carlo ground truth: network snapshots, max biased power
//! association, loads, SINR and per-user rates for the typical user placed
//! at the window centre.

mod ccdf;

// Shadowed by the inherent methods whenever std is linked.
use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::cell::RefCell;
#[allow(unused_imports)]
use num_traits::Float;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};

use crate::config::{interferer_gain_distribution, Exponents, LinkType, NetworkConfig, Scheme, Tier};
use crate::error::{Error, Result};
use crate::geometry::{poisson_count, sample_blockage_field_with, BlockageField, LinkState, Point, Rect};

pub use ccdf::{estimate_ccdf, estimate_ccdf_with, CcdfCurve, CurveMeta, Metric, Provenance};

/// Side of the default square simulation window, m.
pub const DEFAULT_WINDOW_SIDE: f64 = 2000.0;

pub fn default_window() -> Rect {
    Rect::centered_square(DEFAULT_WINDOW_SIDE)
}

/// How link states are drawn.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BlockingMode {
    /// Exact intersection with a sampled segment field.
    Correlated,
    /// Each link LOS independently with probability `exp(-r/mu)`.
    Independent { mu: f64 },
}

pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of iteration `index` under `master`; independent of scheduling.
pub fn iteration_seed(master: u64, index: u64) -> u64 {
    splitmix64(master ^ splitmix64(index.wrapping_add(0x5851_f42d_4c95_7f2d)))
}

type LinkKey = [u64; 4];

fn link_key(a: Point, b: Point) -> LinkKey {
    let ka = [a.x.to_bits(), a.y.to_bits()];
    let kb = [b.x.to_bits(), b.y.to_bits()];
    let (p, q) = if ka <= kb { (ka, kb) } else { (kb, ka) };
    [p[0], p[1], q[0], q[1]]
}

/// One sampled network.
#[derive(Debug)]
pub struct NetworkRealization {
    pub mbs: Vec<Point>,
    pub sbs: Vec<Point>,
    pub ue: Vec<Point>,
    pub field: BlockageField,
    pub window: Rect,
    mode: BlockingMode,
    link_seed: u64,
    cache: RefCell<BTreeMap<LinkKey, LinkState>>,
}

impl NetworkRealization {
    /// Samples the three point processes in `window` and, in correlated
    /// mode, a blockage field over `window` grown by one blockage length.
    pub fn sample<R: Rng + ?Sized>(
        config: &NetworkConfig,
        window: Rect,
        mode: BlockingMode,
        with_users: bool,
        rng: &mut R,
    ) -> Result<Self> {
        if !window.is_valid() {
            return Err(Error::Argument("simulation window must be finite and non-degenerate"));
        }
        let area_km2 = window.area() * 1e-6;
        let points = |density: f64, rng: &mut R| -> Vec<Point> {
            let n = poisson_count(density * area_km2, rng);
            (0..n).map(|_| window.sample(rng)).collect()
        };
        let mbs = points(config.lambda_m, rng);
        let sbs = points(config.lambda_s, rng);
        let ue = if with_users { points(config.lambda_u, rng) } else { Vec::new() };
        let field = match mode {
            BlockingMode::Correlated => sample_blockage_field_with(
                config.blockage_density,
                config.blockage_length,
                window.expanded(config.blockage_length),
                rng,
            )?,
            BlockingMode::Independent { mu } => {
                if !(mu > 0.0) {
                    return Err(Error::Argument("independent blocking needs mu > 0"));
                }
                BlockageField::new(window, Vec::new())?
            }
        };
        let link_seed = rng.random();
        Ok(Self::from_parts(mbs, sbs, ue, field, window, mode, link_seed))
    }

    pub fn from_parts(
        mbs: Vec<Point>,
        sbs: Vec<Point>,
        ue: Vec<Point>,
        field: BlockageField,
        window: Rect,
        mode: BlockingMode,
        link_seed: u64,
    ) -> Self {
        NetworkRealization { mbs, sbs, ue, field, window, mode, link_seed, cache: RefCell::new(BTreeMap::new()) }
    }

    pub fn mode(&self) -> BlockingMode {
        self.mode
    }

    fn compute_state(&self, a: Point, b: Point) -> LinkState {
        match self.mode {
            BlockingMode::Correlated => self.field.link_state(a, b),
            BlockingMode::Independent { mu } => {
                let k = link_key(a, b);
                let h = k.iter().fold(self.link_seed, |h, w| splitmix64(h ^ w));
                let u = (h >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
                if u < (-a.distance(b) / mu).exp() {
                    LinkState::Los
                } else {
                    LinkState::Nlos
                }
            }
        }
    }

    /// Link state of `a`–`b`, memoised per realization.
    pub fn link_state(&self, a: Point, b: Point) -> LinkState {
        let key = link_key(a, b);
        if let Some(s) = self.cache.borrow().get(&key) {
            return *s;
        }
        let s = self.compute_state(a, b);
        self.cache.borrow_mut().insert(key, s);
        s
    }

    pub fn cached_links(&self) -> Vec<(Point, Point, LinkState)> {
        self.cache
            .borrow()
            .iter()
            .map(|(k, s)| {
                let p = Point::new(f64::from_bits(k[0]), f64::from_bits(k[1]));
                let q = Point::new(f64::from_bits(k[2]), f64::from_bits(k[3]));
                (p, q, *s)
            })
            .collect()
    }

    /// Recomputes every cached state; true iff all agree.
    pub fn cache_consistent(&self) -> bool {
        self.cached_links().iter().all(|(p, q, s)| self.compute_state(*p, *q) == *s)
    }

    fn pathloss(&self, a: Point, b: Point, e: Exponents) -> (f64, LinkState) {
        let state = self.link_state(a, b);
        let alpha = match state {
            LinkState::Los => e.los,
            LinkState::Nlos => e.nlos,
        };
        (a.distance(b).powf(alpha), state)
    }

    fn points(&self, tier: Tier) -> &[Point] {
        match tier {
            Tier::Macro => &self.mbs,
            Tier::Small => &self.sbs,
        }
    }
}

/// Sampled with correlated blockage and users.
pub fn sample_realization(config: &NetworkConfig, window: Rect, seed: u64) -> Result<NetworkRealization> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    NetworkRealization::sample(config, window, BlockingMode::Correlated, true, &mut rng)
}

/// A chosen transmitter and its link to the receiver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Serving {
    pub tier: Tier,
    pub index: usize,
    pub distance: f64,
    pub pathloss: f64,
    pub state: LinkState,
}

struct Candidates<'a> {
    tier: Tier,
    points: &'a [Point],
    weight: f64,
    exps: Exponents,
    skip: Option<usize>,
}

#[derive(Clone, Copy)]
struct Scored {
    serving: Serving,
    value: f64,
}

fn beats(a: &Scored, b: &Scored) -> bool {
    if a.value != b.value {
        return a.value > b.value;
    }
    if a.serving.distance != b.serving.distance {
        return a.serving.distance < b.serving.distance;
    }
    (a.serving.tier, a.serving.index) < (b.serving.tier, b.serving.index)
}

/// Maximum of `weight / pathloss` over all candidate sets. Only points
/// within the LOS radius that could beat the best nearest-neighbour value
/// get a link-state query.
fn best_link(real: &NetworkRealization, u: Point, sets: &[Candidates]) -> Option<Serving> {
    let score = |c: &Candidates, k: usize| {
        let p = c.points[k];
        let (pl, state) = real.pathloss(u, p, c.exps);
        Scored {
            serving: Serving { tier: c.tier, index: k, distance: u.distance(p), pathloss: pl, state },
            value: c.weight / pl,
        }
    };
    let d2 = |p: Point| (p.x - u.x) * (p.x - u.x) + (p.y - u.y) * (p.y - u.y);

    let mut best: Option<Scored> = None;
    for c in sets {
        let nearest = c
            .points
            .iter()
            .enumerate()
            .filter(|(k, _)| Some(*k) != c.skip)
            .min_by(|a, b| d2(*a.1).total_cmp(&d2(*b.1)));
        if let Some((k, _)) = nearest {
            let s = score(c, k);
            if best.as_ref().is_none_or(|b| beats(&s, b)) {
                best = Some(s);
            }
        }
    }
    let mut best = best?;
    let floor = best.value;
    for c in sets {
        // weight / r^alpha_los >= floor  <=>  r^2 <= (weight / floor)^(2 / alpha_los)
        let r2_max = (c.weight / floor).powf(2.0 / c.exps.los) * (1.0 + 1e-12);
        for (k, p) in c.points.iter().enumerate() {
            if Some(k) == c.skip || d2(*p) > r2_max {
                continue;
            }
            let s = score(c, k);
            if beats(&s, &best) {
                best = s;
            }
        }
    }
    Some(best.serving)
}

fn access_candidates<'a>(real: &'a NetworkRealization, config: &NetworkConfig) -> [Candidates<'a>; 2] {
    Tier::ALL.map(|tier| Candidates {
        tier,
        points: real.points(tier),
        weight: config.association_weight(tier),
        exps: config.exponents(LinkType::Access, tier),
        skip: None,
    })
}

/// Max biased received power over both tiers.
pub fn associate_user(u: Point, real: &NetworkRealization, config: &NetworkConfig) -> Result<Serving> {
    if real.mbs.is_empty() {
        return Err(Error::Argument("realization has no macro cell"));
    }
    best_link(real, u, &access_candidates(real, config)).ok_or(Error::Argument("no base station to associate with"))
}

/// Anchor of a small cell at `s`: the macro cell with the strongest
/// backhaul link.
pub fn anchor_sbs(s: Point, real: &NetworkRealization, config: &NetworkConfig) -> Result<Serving> {
    let set = [Candidates {
        tier: Tier::Macro,
        points: &real.mbs,
        weight: config.aligned_power(LinkType::Backhaul, Tier::Macro),
        exps: config.exponents(LinkType::Backhaul, Tier::Macro),
        skip: None,
    }];
    best_link(real, s, &set).ok_or(Error::Argument("realization has no macro cell"))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AssociationMap {
    /// (tier, index) of the base station serving each user.
    pub ue_serving: Vec<(Tier, usize)>,
    pub sbs_anchor: Vec<usize>,
    pub mbs_access_load: Vec<u32>,
    pub sbs_access_load: Vec<u32>,
    /// Number of small cells anchored to each macro cell.
    pub mbs_backhaul_load: Vec<u32>,
    /// Users reaching each macro cell through its anchored small cells.
    pub mbs_backhauled_users: Vec<u32>,
}

impl AssociationMap {
    /// Everything the macro cell schedules under IRA: its own users plus
    /// the users of its anchored small cells.
    pub fn mbs_total_load(&self, m: usize) -> u32 {
        self.mbs_access_load[m] + self.mbs_backhauled_users[m]
    }
}

pub fn build_association_map(real: &NetworkRealization, config: &NetworkConfig) -> Result<AssociationMap> {
    let mut map = AssociationMap {
        ue_serving: Vec::with_capacity(real.ue.len()),
        sbs_anchor: Vec::with_capacity(real.sbs.len()),
        mbs_access_load: alloc::vec![0; real.mbs.len()],
        sbs_access_load: alloc::vec![0; real.sbs.len()],
        mbs_backhaul_load: alloc::vec![0; real.mbs.len()],
        mbs_backhauled_users: alloc::vec![0; real.mbs.len()],
    };
    for &s in &real.sbs {
        let a = anchor_sbs(s, real, config)?.index;
        map.sbs_anchor.push(a);
        map.mbs_backhaul_load[a] += 1;
    }
    for &u in &real.ue {
        let srv = associate_user(u, real, config)?;
        map.ue_serving.push((srv.tier, srv.index));
        match srv.tier {
            Tier::Macro => map.mbs_access_load[srv.index] += 1,
            Tier::Small => {
                map.sbs_access_load[srv.index] += 1;
                map.mbs_backhauled_users[map.sbs_anchor[srv.index]] += 1;
            }
        }
    }
    Ok(map)
}

fn exp1<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    Exp1.sample(rng)
}

/// Downlink SINR at `u` from `serving`. Small cells other than the server
/// interfere with random beam gains and Rayleigh fading; macro cells only
/// when `mbs_access_interference` is set.
pub fn sinr_access<R: Rng + ?Sized>(
    u: Point,
    serving: &Serving,
    real: &NetworkRealization,
    config: &NetworkConfig,
    rng: &mut R,
) -> f64 {
    let signal = config.aligned_power(LinkType::Access, serving.tier) * exp1(rng) / serving.pathloss;
    let mut interference = 0.0;
    for tier in Tier::ALL {
        if tier == Tier::Macro && !config.mbs_access_interference {
            continue;
        }
        let gains = interferer_gain_distribution(config, LinkType::Access, tier);
        let exps = config.exponents(LinkType::Access, tier);
        let scale = config.power(tier) * config.ref_loss(LinkType::Access, tier);
        for (k, &p) in real.points(tier).iter().enumerate() {
            if tier == serving.tier && k == serving.index {
                continue;
            }
            let (pl, _) = real.pathloss(u, p, exps);
            let psi = gains.pick(rng.random());
            interference += scale * psi * exp1(rng) / pl;
        }
    }
    signal / (interference + config.noise_power())
}

/// Backhaul SNR of a small cell at `s` fed by macro cell `anchor`. With
/// `backhaul_interference` set, the other macro cells and all small cells
/// except `own` are added as interferers.
pub fn snr_backhaul<R: Rng + ?Sized>(
    s: Point,
    own: Option<usize>,
    anchor: &Serving,
    real: &NetworkRealization,
    config: &NetworkConfig,
    rng: &mut R,
) -> f64 {
    let signal = config.aligned_power(LinkType::Backhaul, Tier::Macro) * exp1(rng) / anchor.pathloss;
    let mut interference = 0.0;
    if config.backhaul_interference {
        for tier in Tier::ALL {
            let gains = interferer_gain_distribution(config, LinkType::Backhaul, tier);
            let exps = config.exponents(LinkType::Backhaul, tier);
            let scale = config.power(tier) * config.ref_loss(LinkType::Backhaul, tier);
            let skip = match tier {
                Tier::Macro => Some(anchor.index),
                Tier::Small => own,
            };
            for (k, &p) in real.points(tier).iter().enumerate() {
                if Some(k) == skip {
                    continue;
                }
                let (pl, _) = real.pathloss(s, p, exps);
                let psi = gains.pick(rng.random());
                interference += scale * psi * exp1(rng) / pl;
            }
        }
    }
    signal / (interference + config.noise_power())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkQuality {
    pub sinr_access: f64,
    /// Backhaul SNR of the serving small cell; unused for macro users.
    pub snr_backhaul: f64,
}

/// Rate of user `u` in bits/s. `MacroOnly` is the fibre-backhauled rate
/// on a network without small cells.
pub fn user_rate(
    u: usize,
    map: &AssociationMap,
    config: &NetworkConfig,
    scheme: Scheme,
    quality: LinkQuality,
) -> Result<f64> {
    let w = config.bandwidth_w;
    let eta = || config.eta_a.ok_or(Error::EtaUnset);
    let access = (1.0 + quality.sinr_access).log2();
    let (tier, k) = *map.ue_serving.get(u).ok_or(Error::Argument("user index out of range"))?;
    if scheme == Scheme::MacroOnly && !map.sbs_anchor.is_empty() {
        return Err(Error::Argument("macro-only rate needs a network without small cells"));
    }
    let rate = match tier {
        Tier::Macro => {
            let own = map.mbs_access_load[k] as f64;
            match scheme {
                Scheme::Ira => w / map.mbs_total_load(k) as f64 * access,
                Scheme::Ora => eta()? * w / own * access,
                Scheme::Wb | Scheme::MacroOnly => w / own * access,
            }
        }
        Tier::Small => {
            let load = map.sbs_access_load[k] as f64;
            let anchor = map.sbs_anchor[k];
            let backhaul = (1.0 + quality.snr_backhaul).log2();
            match scheme {
                Scheme::Ira => {
                    let omega = load / map.mbs_total_load(anchor) as f64;
                    w / load * (omega * backhaul).min((1.0 - omega) * access)
                }
                Scheme::Ora => {
                    let eta = eta()?;
                    let share = (1.0 - eta) * w / map.mbs_backhauled_users[anchor] as f64;
                    (eta * w / load * access).min(share * backhaul)
                }
                Scheme::Wb | Scheme::MacroOnly => w / load * access,
            }
        }
    };
    Ok(rate)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AssociationEstimate {
    pub a_m: f64,
    pub a_s: f64,
    /// Binomial standard error, shared by both tiers.
    pub stderr: f64,
    pub iterations: usize,
}

/// Fraction of iterations in which the typical user at the window centre
/// picks a macro cell.
pub fn empirical_association_prob(
    config: &NetworkConfig,
    window: Rect,
    n_iter: usize,
    seed: u64,
) -> Result<AssociationEstimate> {
    empirical_association_prob_with(config, window, BlockingMode::Correlated, n_iter, seed)
}

pub fn empirical_association_prob_with(
    config: &NetworkConfig,
    window: Rect,
    mode: BlockingMode,
    n_iter: usize,
    seed: u64,
) -> Result<AssociationEstimate> {
    if n_iter == 0 {
        return Err(Error::Argument("need at least one iteration"));
    }
    let center = window.center();
    let mut macro_hits = 0usize;
    for i in 0..n_iter {
        let mut rng = ChaCha8Rng::seed_from_u64(iteration_seed(seed, i as u64));
        let real = loop {
            let real = NetworkRealization::sample(config, window, mode, false, &mut rng)?;
            if !real.mbs.is_empty() {
                break real;
            }
        };
        if associate_user(center, &real, config)?.tier == Tier::Macro {
            macro_hits += 1;
        }
    }
    let n = n_iter as f64;
    let a_m = macro_hits as f64 / n;
    Ok(AssociationEstimate { a_m, a_s: 1.0 - a_m, stderr: (a_m * (1.0 - a_m) / n).sqrt(), iterations: n_iter })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateSample {
    pub ira: f64,
    pub ora: Option<f64>,
    pub wb: f64,
    /// Users sharing the serving cell, typical user included.
    pub serving_load: u32,
    /// IRA load of the macro cell at the head of the chain.
    pub macro_total_load: u32,
    /// Users behind that macro cell's small cells; its ORA backhaul load.
    pub backhauled_users: u32,
}

/// Everything measured for the typical user in one iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TypicalSample {
    pub serving: Serving,
    pub sinr_access: f64,
    /// Backhaul SNR of the serving small cell, if any.
    pub snr_backhaul: Option<f64>,
    /// Backhaul SNR of a small cell placed at the window centre.
    pub typical_sbs_snr: f64,
    pub rates: Option<RateSample>,
    /// Snapshots discarded before this one (no macro cell, or an anchor
    /// macro cell with an empty access load).
    pub resamples: u32,
}

impl TypicalSample {
    /// ORA rate at access share `eta`, recomputed from the stored links and
    /// loads. `None` for samples drawn without loads.
    pub fn ora_rate(&self, bandwidth_w: f64, eta: f64) -> Option<f64> {
        let r = self.rates?;
        let access = (1.0 + self.sinr_access).log2();
        Some(match self.snr_backhaul {
            None => eta * bandwidth_w / r.serving_load as f64 * access,
            Some(b) => {
                let share = (1.0 - eta) * bandwidth_w / r.backhauled_users as f64;
                (eta * bandwidth_w / r.serving_load as f64 * access).min(share * (1.0 + b).log2())
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimSettings {
    pub window: Rect,
    pub mode: BlockingMode,
    /// Sample users, build loads and compute rates.
    pub with_loads: bool,
}

impl Default for SimSettings {
    fn default() -> Self {
        SimSettings { window: default_window(), mode: BlockingMode::Correlated, with_loads: false }
    }
}

const MAX_RESAMPLES: u32 = 10_000;

/// One Monte Carlo iteration seeded by `seed`.
pub fn typical_sample(config: &NetworkConfig, settings: &SimSettings, seed: u64) -> Result<TypicalSample> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let center = settings.window.center();
    let mut resamples = 0;
    loop {
        if resamples > MAX_RESAMPLES {
            return Err(Error::Argument("full-buffer resampling did not terminate"));
        }
        let mut real =
            NetworkRealization::sample(config, settings.window, settings.mode, settings.with_loads, &mut rng)?;
        if real.mbs.is_empty() {
            resamples += 1;
            continue;
        }
        let serving = associate_user(center, &real, config)?;
        let map = if settings.with_loads {
            real.ue.insert(0, center);
            let map = build_association_map(&real, config)?;
            if serving.tier == Tier::Small && map.mbs_access_load[map.sbs_anchor[serving.index]] == 0 {
                resamples += 1;
                continue;
            }
            Some(map)
        } else {
            None
        };

        let sinr = sinr_access(center, &serving, &real, config, &mut rng);
        let snr_b = match serving.tier {
            Tier::Small => {
                let s = real.sbs[serving.index];
                let anchor = anchor_sbs(s, &real, config)?;
                Some(snr_backhaul(s, Some(serving.index), &anchor, &real, config, &mut rng))
            }
            Tier::Macro => None,
        };
        let typical_anchor = anchor_sbs(center, &real, config)?;
        let typical_sbs_snr = snr_backhaul(center, None, &typical_anchor, &real, config, &mut rng);

        let rates = match &map {
            Some(map) => {
                let q = LinkQuality { sinr_access: sinr, snr_backhaul: snr_b.unwrap_or(0.0) };
                let ora = match config.eta_a {
                    Some(_) => Some(user_rate(0, map, config, Scheme::Ora, q)?),
                    None => None,
                };
                let head = match serving.tier {
                    Tier::Macro => serving.index,
                    Tier::Small => map.sbs_anchor[serving.index],
                };
                Some(RateSample {
                    ira: user_rate(0, map, config, Scheme::Ira, q)?,
                    ora,
                    wb: user_rate(0, map, config, Scheme::Wb, q)?,
                    serving_load: match serving.tier {
                        Tier::Macro => map.mbs_access_load[serving.index],
                        Tier::Small => map.sbs_access_load[serving.index],
                    },
                    macro_total_load: map.mbs_total_load(head),
                    backhauled_users: map.mbs_backhauled_users[head],
                })
            }
            None => None,
        };
        return Ok(TypicalSample {
            serving,
            sinr_access: sinr,
            snr_backhaul: snr_b,
            typical_sbs_snr,
            rates,
            resamples,
        });
    }
}

/// `n_iter` iterations in order; iteration `i` uses
/// `iteration_seed(seed, i)`.
pub fn simulate(
    config: &NetworkConfig,
    settings: &SimSettings,
    n_iter: usize,
    seed: u64,
) -> Result<Vec<TypicalSample>> {
    (0..n_iter).map(|i| typical_sample(config, settings, iteration_seed(seed, i as u64))).collect()
}
