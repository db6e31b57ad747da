use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParam {
        field: &'static str,
        reason: &'static str,
    },

    #[error("value outside domain: {0}")]
    Domain(&'static str),

    #[error("ordering violated: {0}")]
    Ordering(&'static str),

    #[error("search bracket does not enclose a single maximum: {0}")]
    Bracketing(&'static str),

    #[error("calibration failed to bracket a root (residual {lo_residual} at a={lo_a}, {hi_residual} at a={hi_a})")]
    Calibration {
        lo_a: f64,
        lo_residual: f64,
        hi_a: f64,
        hi_residual: f64,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("network stalled: no miner re-entered after {0} stall quanta")]
    Stalled(u64),

    #[error("internal consistency error: {0}")]
    Internal(&'static str),
}
