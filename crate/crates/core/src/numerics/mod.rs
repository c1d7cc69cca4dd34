//! Quadrature, root finding and special functions shared by the analytic
//! engine and the calibration loop.

mod quadrature;
mod roots;
mod special;

pub use quadrature::{integrate, Quadrature, QuadratureResult};
pub use roots::{find_root, golden_section_max};
pub use special::log_gamma;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum NumericsError {
    #[error("no sign change over [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },
    #[error("non-finite input or function value")]
    NonFinite,
}

/// Compensated (Neumaier) summation for long series.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl core::iter::FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = Self::default();
        for x in iter {
            s.add(x);
        }
        s
    }
}
