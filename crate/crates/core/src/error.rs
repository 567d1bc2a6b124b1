use thiserror::Error;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("{what} out of domain: {value}")]
    Domain { what: &'static str, value: f64 },

    /// `a = 0`: the correlation machinery is undefined, use the degraded rate.
    #[error("interference gain is zero; the degraded-channel rate applies")]
    DegenerateChannel,

    /// Requested correlation above the feasibility bound `rho_0`.
    #[error("correlation {rho} is infeasible: it exceeds rho_0 = {rho_max}")]
    Infeasible { rho: f64, rho_max: f64 },

    /// The bootstrap case `rho = |a|` needs `|a| < 1`.
    #[error("bootstrap with rho = |a| requires |a| < 1, got |a| = {abs_a}")]
    BootstrapInfeasible { abs_a: f64 },

    /// A bracketing root search found no sign change.
    #[error("no sign change of {what} on (0, 1)")]
    NoBracket { what: &'static str },

    /// An identity the construction guarantees did not hold numerically.
    #[error("consistency check failed: {what} (deviation {deviation:e})")]
    Consistency { what: &'static str, deviation: f64 },

    /// The schedule is too short or carries a zero contraction factor.
    #[error("schedule error: {what} at step {step}")]
    Schedule { what: &'static str, step: usize },
}

impl Error {
    pub(crate) fn domain(what: &'static str, value: f64) -> Self {
        Error::Domain { what, value }
    }
}
