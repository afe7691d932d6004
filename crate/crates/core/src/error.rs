use thiserror::Error;

/// Errors raised by the core library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A caller broke a documented precondition.
    #[error("contract violation: {0}")]
    Contract(String),

    /// Parameters or solver settings that cannot be run.
    #[error("configuration error: {0}")]
    Config(String),

    /// The alpha denominator vanished: every edge probability is (close to) zero.
    #[error("degenerate edge kernel: alpha denominator {denominator:e} at u = {u}")]
    DegenerateKernel { u: f64, denominator: f64 },

    /// The power-series recursion hit a zero denominator.
    #[error("singular parameter: recursion denominator vanishes at index {index} (gamma_mp = {gamma_mp})")]
    SingularParameter { index: usize, gamma_mp: f64 },

    /// Exact enumeration requested beyond the supported size.
    #[error("enumeration budget exceeded: {blocks} blocks > {max}; use cut_norm_lower_bound")]
    Budget { blocks: usize, max: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn contract(msg: impl Into<String>) -> Error {
    Error::Contract(msg.into())
}
