use std::path::PathBuf;

/// Errors produced by the simulator and the analytic toolkit.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("length mismatch: {what} has {got} entries, expected {expected}")]
    LengthMismatch {
        what: &'static str,
        got: usize,
        expected: usize,
    },

    #[error("noise standard deviation is zero; closed-form BER is undefined (use the Monte Carlo noiseless path)")]
    DegenerateNoise,

    #[error("interference plus noise power is zero (h1 = sigma = 0)")]
    ZeroPower,

    #[error("quadrature did not reach tolerance {abs_tol:e} within depth {max_depth} (estimated error {estimate:e})")]
    QuadratureNonConvergence {
        abs_tol: f64,
        max_depth: u32,
        estimate: f64,
    },

    #[error("target BER {target:e} lies outside curve range [{min:e}, {max:e}]")]
    TargetOutOfRange { target: f64, min: f64, max: f64 },

    #[error("curve {0} is not strictly monotone in BER")]
    NonMonotoneCurve(&'static str),

    #[error("waveform window [{start}, {end}) exceeds waveform of {len} ticks")]
    WindowOutOfRange { start: usize, end: usize, len: usize },

    #[error("{value} is not on the {oversampling}-tick sample grid")]
    OffGrid { value: f64, oversampling: u32 },

    #[error("spec file {path}, line {line}: {reason}")]
    SpecSyntax {
        path: PathBuf,
        line: usize,
        reason: String,
    },

    #[error("bad waveform dump: {0}")]
    BadDump(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
