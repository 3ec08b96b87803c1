use thiserror::Error;

/// Errors produced across assembly, integration, stability analysis and the harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Input(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error(
        "eigen-iteration did not converge after {iterations} iterations \
         (best lambda_max {lambda_max:.12e}, lambda_min {lambda_min:.12e}, residual {residual:.3e})"
    )]
    Convergence {
        lambda_max: f64,
        lambda_min: f64,
        residual: f64,
        iterations: usize,
    },

    #[error("matrix dimension {n} exceeds the dense spectrum cap {cap}; use sym_lambda_extremes instead")]
    SizeCap { n: usize, cap: usize },

    #[error("singular block at index {block}")]
    Singular { block: usize },

    #[error("assembly error: {0}")]
    Assembly(String),

    #[error("scheme mismatch: {0}")]
    SchemeMismatch(String),

    #[error("state error: {0}")]
    State(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("degenerate system: {0}")]
    Degenerate(String),

    #[error("no stable time step found in bracket [{lo:.6e}, {hi:.6e}]")]
    Bracket { lo: f64, hi: f64 },

    #[error("instability detected: {0}")]
    Instability(String),

    #[error("internal consistency error: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("output error: {0}")]
    Output(String),
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Input(_)
            | Error::Dimension { .. }
            | Error::Unsupported(_)
            | Error::SchemeMismatch(_)
            | Error::Io(_) => 2,
            Error::Instability(_) => 3,
            _ => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::Dimension { expected, got })
    }
}
