use std::io;

use serde::Serialize;

use iabsim_core::Error as CoreError;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),
    #[error("invalid experiment: {0}")]
    Spec(String),
    #[error("convergence failure: {0}")]
    Convergence(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl HarnessError {
    /// 2 for anything wrong with the inputs, 3 for numerical failures,
    /// 1 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) | HarnessError::Spec(_) => 2,
            HarnessError::Convergence(_) => 3,
            HarnessError::Io(_) => 1,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            HarnessError::Config(_) => "config",
            HarnessError::Spec(_) => "spec",
            HarnessError::Convergence(_) => "convergence",
            HarnessError::Io(_) => "io",
        }
    }

    /// One-line JSON record for stderr.
    pub fn record(&self) -> String {
        #[derive(Serialize)]
        struct Record<'a> {
            error: &'a str,
            exit_code: i32,
            message: String,
        }
        serde_json::to_string(&Record { error: self.kind(), exit_code: self.exit_code(), message: self.to_string() })
            .expect("error record serializes")
    }
}

impl From<CoreError> for HarnessError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Config(_) | CoreError::Argument(_) | CoreError::EtaUnset => HarnessError::Config(e.to_string()),
            CoreError::Quadrature { .. }
            | CoreError::Series { .. }
            | CoreError::Numerics(_)
            | CoreError::NoSignChange { .. } => HarnessError::Convergence(e.to_string()),
        }
    }
}

impl From<io::Error> for HarnessError {
    fn from(e: io::Error) -> Self {
        HarnessError::Io(e.to_string())
    }
}

impl From<csv::Error> for HarnessError {
    fn from(e: csv::Error) -> Self {
        HarnessError::Io(e.to_string())
    }
}
