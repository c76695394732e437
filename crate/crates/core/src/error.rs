use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A model parameter violated its domain.
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    /// An argument to an operation fell outside its admissible range.
    #[error("`{name}` = {value} outside admissible range [{lo}, {hi}]")]
    OutOfRange {
        name: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("contract terms require penalty price > sell-back price > 0 (got p_s = {sellback_price}, p_e = {penalty_price})")]
    InvalidContractTerms {
        sellback_price: f64,
        penalty_price: f64,
    },

    #[error("outcome probabilities sum to {total}, editing requires a complete prospect")]
    IncompleteProspect { total: f64 },

    #[error("winning probabilities sum to {total} > 1 (scale m = {scale})")]
    InfeasibleLottery { total: f64, scale: f64 },

    #[error("lottery scale is undefined for a population without prosumers")]
    NoProsumers,

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("quadrature did not reach tolerance {tolerance:e} (error estimate {estimate:e}) on [{lo}, {hi}]")]
    Quadrature {
        lo: f64,
        hi: f64,
        tolerance: f64,
        estimate: f64,
    },

    #[error("root solver failed on bracket [{lo}, {hi}] (f = {f_lo:e}, {f_hi:e}) after {iterations} iterations")]
    RootNotBracketed {
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
        iterations: usize,
    },
}

pub(crate) fn ensure_finite(name: &'static str, value: f64) -> Result<f64> {
    if value.is_finite() {
        Ok(value)
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be finite",
        })
    }
}
