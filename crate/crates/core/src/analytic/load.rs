// Shadowed by the inherent methods whenever std is linked.
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::numerics::log_gamma;

const SHAPE: f64 = 3.5;
/// Probability mass allowed beyond the truncation point.
pub const TAIL_MASS: f64 = 1e-4;
pub const MAX_TERMS: usize = 2000;

/// Cell-load kernels. `Tagged` is the load of the cell containing the
/// typical point (support `n >= 1`, the typical point included); `Typical`
/// is the load of a typical cell (support `n >= 0`, mean `lambda_points /
/// lambda_cell`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LoadKernel {
    Tagged,
    Typical,
}

/// `P(load = n)` for cells of density `lambda_cell` holding points of
/// density `lambda_points` (same units).
pub fn load_pmf(kernel: LoadKernel, lambda_cell: f64, lambda_points: f64, n: u64) -> f64 {
    let r = lambda_points / lambda_cell;
    let m = match kernel {
        LoadKernel::Tagged if n == 0 => return 0.0,
        LoadKernel::Tagged => n - 1,
        LoadKernel::Typical => n,
    };
    if r == 0.0 {
        return if m == 0 { 1.0 } else { 0.0 };
    }
    let m = m as f64;
    let ln = SHAPE * SHAPE.ln() - log_gamma(m + 1.0) + log_gamma(n as f64 + SHAPE) - log_gamma(SHAPE) + m * r.ln()
        - (n as f64 + SHAPE) * (SHAPE + r).ln();
    ln.exp()
}

/// A load PMF truncated where the remaining mass drops below
/// [`TAIL_MASS`] (capped at [`MAX_TERMS`] terms).
#[derive(Debug, Clone, PartialEq)]
pub struct LoadPmf {
    pub kernel: LoadKernel,
    pub lambda_cell: f64,
    pub lambda_points: f64,
    /// Smallest load in the support.
    pub first: u64,
    pub masses: Vec<f64>,
}

impl LoadPmf {
    pub fn new(kernel: LoadKernel, lambda_cell: f64, lambda_points: f64) -> Result<Self> {
        if !(lambda_cell > 0.0 && lambda_points >= 0.0 && lambda_points.is_finite()) {
            return Err(Error::Argument("load densities must be positive"));
        }
        let first = match kernel {
            LoadKernel::Tagged => 1,
            LoadKernel::Typical => 0,
        };
        let mut masses = Vec::new();
        let mut total = 0.0;
        let mut n = first;
        while total < 1.0 - TAIL_MASS && masses.len() < MAX_TERMS {
            let p = load_pmf(kernel, lambda_cell, lambda_points, n);
            total += p;
            masses.push(p);
            n += 1;
        }
        Ok(LoadPmf { kernel, lambda_cell, lambda_points, first, masses })
    }

    /// Largest load kept.
    pub fn n_max(&self) -> u64 {
        self.first + self.masses.len() as u64 - 1
    }

    pub fn mass(&self) -> f64 {
        self.masses.iter().sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, f64)> + '_ {
        self.masses.iter().enumerate().map(move |(k, p)| (self.first + k as u64, *p))
    }
}
