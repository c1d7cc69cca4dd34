// Shadowed by the inherent methods whenever std is linked.
use alloc::vec::Vec;
use core::f64::consts::PI;
#[allow(unused_imports)]
use num_traits::Float;

use super::{FailureSlot, Omega, PathlossLaw};
use crate::config::{LinkType, Tier};
use crate::error::{Error, Result};
use crate::geometry::LinkState;
use crate::numerics::{Quadrature, QuadratureResult};

/// Macro-cell density around the typical user given that none of them beat
/// the small-cell server: a macro cell at distance `d` from the user is
/// excluded when its LOS (or NLOS) access pathloss would be below
/// `Omega_ms l_a*`.
struct ExcludedDensity {
    lambda: f64,
    mu: f64,
    rho_los: f64,
    rho_nlos: f64,
    /// Distance from the user to the tagged small cell.
    x: f64,
}

impl ExcludedDensity {
    fn at_user_distance(&self, d: f64) -> f64 {
        let mut v = 0.0;
        if d > self.rho_los {
            v += self.lambda * (-d / self.mu).exp();
        }
        if d > self.rho_nlos {
            v += -self.lambda * (-d / self.mu).exp_m1();
        }
        v
    }

    /// Density at polar position `(r, theta)` around the small cell, with
    /// the user at angle zero.
    fn at(&self, r: f64, theta: f64) -> f64 {
        let d2 = r * r + self.x * self.x - 2.0 * r * self.x * theta.cos();
        self.at_user_distance(d2.max(0.0).sqrt())
    }

    fn radii(&self) -> [f64; 2] {
        [self.rho_los, self.rho_nlos]
    }

    /// Radii in `(0, r_max)` at angle `theta` where the exclusion edge is
    /// crossed.
    fn radial_breaks(&self, theta: f64, r_max: f64) -> Vec<f64> {
        let mut b = Vec::with_capacity(6);
        b.push(0.0);
        let (s, c) = theta.sin_cos();
        for rho in self.radii() {
            let disc = rho * rho - self.x * self.x * s * s;
            if disc < 0.0 {
                continue;
            }
            let q = disc.sqrt();
            for r in [self.x * c - q, self.x * c + q] {
                if r > 0.0 && r < r_max {
                    b.push(r);
                }
            }
        }
        b.push(r_max);
        b.sort_by(f64::total_cmp);
        b
    }

    /// Angles in `(0, pi)` where the radial breakpoints appear, vanish or
    /// cross one of `r_max`.
    fn angular_breaks(&self, r_max: &[f64]) -> Vec<f64> {
        let mut b = Vec::with_capacity(10);
        b.push(0.0);
        for rho in self.radii() {
            if rho > 0.0 && rho < self.x {
                let a = (rho / self.x).asin();
                b.push(a);
                b.push(PI - a);
            }
            for &r in r_max {
                if r > 0.0 && self.x > 0.0 {
                    let c = (r * r + self.x * self.x - rho * rho) / (2.0 * r * self.x);
                    if c > -1.0 && c < 1.0 {
                        b.push(c.acos());
                    }
                }
            }
        }
        b.push(PI);
        b.sort_by(f64::total_cmp);
        b.dedup();
        b
    }
}

fn conditional_quadrature() -> Quadrature {
    Quadrature::new(1e-13, 1e-8)
}

fn checked(r: QuadratureResult, context: &'static str) -> Result<f64> {
    if !r.converged || !r.value.is_finite() {
        return Err(Error::Quadrature { context, value: r.value, abs_error: r.abs_error });
    }
    Ok(r.value)
}

/// Pathloss process of the macro cells seen by the tagged small cell, given
/// that the typical user is served by it over a link in state `t` with
/// pathloss `l_a_star`. Returns `(Lambda((0, l]), lambda(l))`.
///
/// The result does not depend on the direction of the small cell, which is
/// taken along the first axis; the angular integral runs over `[0, pi]` and
/// is doubled.
pub fn conditional_backhaul_intensity(
    law: &PathlossLaw,
    omega: &Omega,
    t: LinkState,
    l: f64,
    l_a_star: f64,
) -> Result<(f64, f64)> {
    if !(l > 0.0 && l_a_star > 0.0) || !l.is_finite() || !l_a_star.is_finite() {
        return Err(Error::Argument("pathlosses must be positive and finite"));
    }
    let access_s = law.exponents(LinkType::Access, Tier::Small);
    let access_m = law.exponents(LinkType::Access, Tier::Macro);
    let bh = law.exponents(LinkType::Backhaul, Tier::Macro);
    let alpha_t = match t {
        LinkState::Los => access_s.los,
        LinkState::Nlos => access_s.nlos,
    };
    let excl = omega.get(Tier::Macro, Tier::Small) * l_a_star;
    let field = ExcludedDensity {
        lambda: law.density_m2(Tier::Macro),
        mu: law.mu,
        rho_los: excl.powf(1.0 / access_m.los),
        rho_nlos: excl.powf(1.0 / access_m.nlos),
        x: l_a_star.powf(1.0 / alpha_t),
    };
    let mu = law.mu;
    let r_los = l.powf(1.0 / bh.los);
    let r_nlos = l.powf(1.0 / bh.nlos);
    let quad = conditional_quadrature();
    let inner = quad.tightened();

    let failure = FailureSlot::default();
    let radial = |theta: f64| -> f64 {
        let los =
            inner.integrate_piecewise(|r| field.at(r, theta) * (-r / mu).exp() * r, &field.radial_breaks(theta, r_los));
        let nlos = inner
            .integrate_piecewise(|r| field.at(r, theta) * -(-r / mu).exp_m1() * r, &field.radial_breaks(theta, r_nlos));
        match (
            checked(los, "conditional backhaul radial integral (LOS)"),
            checked(nlos, "conditional backhaul radial integral (NLOS)"),
        ) {
            (Ok(a), Ok(b)) => a + b,
            (Err(e), _) | (_, Err(e)) => {
                failure.record(e);
                0.0
            }
        }
    };
    let breaks = field.angular_breaks(&[r_los, r_nlos]);
    let measure = checked(quad.integrate_piecewise(radial, &breaks), "conditional backhaul measure")?;
    failure.check()?;

    let los_w = r_los * r_los / (bh.los * l) * (-r_los / mu).exp();
    let nlos_w = r_nlos * r_nlos / (bh.nlos * l) * -(-r_nlos / mu).exp_m1();
    let density = checked(
        quad.integrate_piecewise(|theta| field.at(r_los, theta) * los_w + field.at(r_nlos, theta) * nlos_w, &breaks),
        "conditional backhaul density",
    )?;
    Ok((2.0 * measure, 2.0 * density))
}
