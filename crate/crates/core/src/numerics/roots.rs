// Shadowed by the inherent methods whenever std is linked.
use super::NumericsError;
#[allow(unused_imports)]
use num_traits::Float;

/// Bisection on a bracketing interval. `g(lo)` and `g(hi)` must have
/// opposite signs; an exact zero at either end is returned as is.
pub fn find_root<G: FnMut(f64) -> f64>(mut g: G, lo: f64, hi: f64, x_tol: f64) -> Result<f64, NumericsError> {
    if !(lo.is_finite() && hi.is_finite() && x_tol > 0.0) {
        return Err(NumericsError::NonFinite);
    }
    let (mut lo, mut hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
    let mut g_lo = g(lo);
    let g_hi = g(hi);
    if g_lo == 0.0 {
        return Ok(lo);
    }
    if g_hi == 0.0 {
        return Ok(hi);
    }
    if !(g_lo.is_finite() && g_hi.is_finite()) {
        return Err(NumericsError::NonFinite);
    }
    if g_lo.signum() == g_hi.signum() {
        return Err(NumericsError::NoSignChange { lo, hi });
    }
    while hi - lo > x_tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let g_mid = g(mid);
        if g_mid == 0.0 {
            return Ok(mid);
        }
        if g_mid.signum() == g_lo.signum() {
            lo = mid;
            g_lo = g_mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Golden-section search for the maximiser of a unimodal `f` on `[lo, hi]`.
pub fn golden_section_max<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, x_tol: f64) -> f64 {
    let inv_phi = (5.0f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > x_tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}
