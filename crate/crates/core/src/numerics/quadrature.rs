//! Globally adaptive Gauss-Kronrod quadrature.
//!
//! Every integral in the crate goes through [`Quadrature`]. Finite intervals
//! are bisected where the 10-point Gauss / 21-point Kronrod pair disagrees
//! most. A semi-infinite interval `[a, inf)` is mapped onto `[0, 1)` with
//!
//! ```text
//! x = a + t / (1 - t),    dx = dt / (1 - t)^2
//! ```
//!
//! so callers should pass integrands whose natural length scale is O(1);
//! rescale the variable first when it is not.

// Shadowed by the inherent methods whenever std is linked.
use alloc::collections::BinaryHeap;
use core::cmp::Ordering;
#[allow(unused_imports)]
use num_traits::Float;

const XGK: [f64; 11] = [
    0.995_657_163_025_808_1,
    0.973_906_528_517_171_7,
    0.930_157_491_355_708_2,
    0.865_063_366_688_984_5,
    0.780_817_726_586_416_9,
    0.679_409_568_299_024_4,
    0.562_757_134_668_604_7,
    0.433_395_394_129_247_2,
    0.294_392_862_701_460_2,
    0.148_874_338_981_631_22,
    0.0,
];

const WG: [f64; 5] = [
    0.066_671_344_308_688_14,
    0.149_451_349_150_580_6,
    0.219_086_362_515_982_04,
    0.269_266_719_309_996_35,
    0.295_524_224_714_752_87,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874,
    0.032_558_162_307_964_725,
    0.054_755_896_574_351_995,
    0.075_039_674_810_919_96,
    0.093_125_454_583_697_6,
    0.109_387_158_802_297_64,
    0.123_491_976_262_065_84,
    0.134_709_217_311_473_34,
    0.142_775_938_577_060_09,
    0.147_739_104_901_338_49,
    0.149_445_554_002_916_9,
];

const RULE_POINTS: usize = 21;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureResult {
    pub value: f64,
    pub abs_error: f64,
    pub evaluations: usize,
    pub converged: bool,
}

impl QuadratureResult {
    fn zero() -> Self {
        Self { value: 0.0, abs_error: 0.0, evaluations: 0, converged: true }
    }

    fn combine(self, other: Self) -> Self {
        Self {
            value: self.value + other.value,
            abs_error: self.abs_error + other.abs_error,
            evaluations: self.evaluations + other.evaluations,
            converged: self.converged && other.converged,
        }
    }
}

/// Tolerances and evaluation budget for adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_evals: usize,
}

impl Default for Quadrature {
    fn default() -> Self {
        Self { abs_tol: 1e-6, rel_tol: 1e-4, max_evals: 100_000 }
    }
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}

impl Eq for Segment {}

impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn rescale_error(err: f64, res_abs: f64, res_asc: f64) -> f64 {
    let mut err = err.abs();
    if res_asc != 0.0 && err != 0.0 {
        let scale = (200.0 * err / res_asc).powf(1.5);
        err = if scale < 1.0 { res_asc * scale } else { res_asc };
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    err
}

fn kronrod21<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];

    let fc = f(center);
    let mut res_gauss = 0.0;
    let mut res_kronrod = fc * WGK[10];
    let mut res_abs = res_kronrod.abs();

    for (j, wg) in WG.iter().enumerate() {
        let k = 2 * j + 1;
        let dx = half * XGK[k];
        let (f1, f2) = (f(center - dx), f(center + dx));
        fv1[k] = f1;
        fv2[k] = f2;
        res_gauss += wg * (f1 + f2);
        res_kronrod += WGK[k] * (f1 + f2);
        res_abs += WGK[k] * (f1.abs() + f2.abs());
    }
    for j in 0..5 {
        let k = 2 * j;
        let dx = half * XGK[k];
        let (f1, f2) = (f(center - dx), f(center + dx));
        fv1[k] = f1;
        fv2[k] = f2;
        res_kronrod += WGK[k] * (f1 + f2);
        res_abs += WGK[k] * (f1.abs() + f2.abs());
    }

    let mean = 0.5 * res_kronrod;
    let mut res_asc = WGK[10] * (fc - mean).abs();
    for k in 0..10 {
        res_asc += WGK[k] * ((fv1[k] - mean).abs() + (fv2[k] - mean).abs());
    }

    let err = (res_kronrod - res_gauss) * half;
    let value = res_kronrod * half;
    let scaled = rescale_error(err, res_abs * half.abs(), res_asc * half.abs());
    (value, scaled)
}

impl Quadrature {
    pub fn new(abs_tol: f64, rel_tol: f64) -> Self {
        Self { abs_tol, rel_tol, ..Self::default() }
    }

    pub fn with_budget(mut self, max_evals: usize) -> Self {
        self.max_evals = max_evals;
        self
    }

    /// One order of magnitude tighter, for integrals nested inside others.
    pub fn tightened(self) -> Self {
        Self { abs_tol: self.abs_tol * 0.1, rel_tol: self.rel_tol * 0.1, ..self }
    }

    /// Integrates `f` over `[a, b]`. `b` may be `f64::INFINITY`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F, a: f64, b: f64) -> QuadratureResult {
        if a == b {
            return QuadratureResult::zero();
        }
        if b.is_infinite() && b > 0.0 && a.is_finite() {
            let g = |t: f64| {
                let s = 1.0 - t;
                let x = a + t / s;
                let y = f(x);
                if y == 0.0 {
                    0.0
                } else {
                    y / (s * s)
                }
            };
            return self.adaptive(g, 0.0, 1.0);
        }
        if a.is_finite() && b.is_finite() {
            if a < b {
                return self.adaptive(f, a, b);
            }
            let r = self.adaptive(f, b, a);
            return QuadratureResult { value: -r.value, ..r };
        }
        QuadratureResult { value: f64::NAN, abs_error: f64::INFINITY, evaluations: 0, converged: false }
    }

    /// Integrates piecewise between ascending breakpoints. The last
    /// breakpoint may be `f64::INFINITY`. Each piece is given the full
    /// tolerance scaled by its share of the pieces.
    pub fn integrate_piecewise<F: FnMut(f64) -> f64>(&self, mut f: F, breakpoints: &[f64]) -> QuadratureResult {
        let pieces = breakpoints.len().saturating_sub(1).max(1) as f64;
        let piece_quad = Quadrature { abs_tol: self.abs_tol / pieces, ..*self };
        breakpoints
            .windows(2)
            .filter(|w| w[1] > w[0])
            .map(|w| piece_quad.integrate(&mut f, w[0], w[1]))
            .fold(QuadratureResult::zero(), QuadratureResult::combine)
    }

    fn adaptive<F: FnMut(f64) -> f64>(&self, mut f: F, a: f64, b: f64) -> QuadratureResult {
        let (value, error) = kronrod21(&mut f, a, b);
        let mut evaluations = RULE_POINTS;
        let mut total = value;
        let mut total_err = error;
        let mut heap = BinaryHeap::new();
        heap.push(Segment { a, b, value, error });

        let mut converged = false;
        loop {
            if !total.is_finite() || !total_err.is_finite() {
                break;
            }
            let target = self.abs_tol.max(self.rel_tol * total.abs());
            if total_err <= target {
                converged = true;
                break;
            }
            if evaluations + 2 * RULE_POINTS > self.max_evals {
                break;
            }
            let Some(worst) = heap.pop() else { break };
            let mid = 0.5 * (worst.a + worst.b);
            // Interval exhausted at machine resolution.
            if mid <= worst.a || mid >= worst.b {
                heap.push(worst);
                break;
            }
            let (v1, e1) = kronrod21(&mut f, worst.a, mid);
            let (v2, e2) = kronrod21(&mut f, mid, worst.b);
            evaluations += 2 * RULE_POINTS;
            total += v1 + v2 - worst.value;
            total_err += e1 + e2 - worst.error;
            heap.push(Segment { a: worst.a, b: mid, value: v1, error: e1 });
            heap.push(Segment { a: mid, b: worst.b, value: v2, error: e2 });
        }

        // Re-sum to shed drift from the running updates.
        let (mut value, mut err) = (0.0, 0.0);
        for s in heap.iter() {
            value += s.value;
            err += s.error;
        }
        if !total.is_finite() {
            value = total;
        }
        QuadratureResult { value, abs_error: err, evaluations, converged }
    }
}

/// Adaptive integral of `f` over `[a, b]` (`b` may be `+inf`) with the
/// default evaluation budget.
pub fn integrate<F: FnMut(f64) -> f64>(f: F, a: f64, b: f64, abs_tol: f64, rel_tol: f64) -> QuadratureResult {
    Quadrature::new(abs_tol, rel_tol).integrate(f, a, b)
}
