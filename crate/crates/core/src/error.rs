use thiserror::Error;

use crate::numerics::NumericsError;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(&'static str),
    #[error("invalid argument: {0}")]
    Argument(&'static str),
    #[error("quadrature did not converge in {context} (estimate {value}, error {abs_error})")]
    Quadrature { context: &'static str, value: f64, abs_error: f64 },
    #[error("rate series term {index} failed: {context}")]
    Series { index: usize, context: &'static str },
    #[error(transparent)]
    Numerics(#[from] NumericsError),
    #[error("ORA rate requested but eta_a is unset")]
    EtaUnset,
    #[error("no sign change of A_m(mu) - A_m_hat over [{lo}, {hi}] m")]
    NoSignChange { lo: f64, hi: f64 },
}
