use thiserror::Error;

/// Errors raised by the solvers, the simulator and the deviation checker.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("interval bounds out of order: a = {a} > b = {b}")]
    ArgumentOrder { a: f64, b: f64 },

    #[error("degenerate case: {0}")]
    DegenerateCase(&'static str),

    #[error("`{op}` is only defined when {expected}")]
    WrongCase {
        op: &'static str,
        expected: &'static str,
    },

    #[error("root not bracketed on [{lo}, {hi}]: f(lo) = {f_lo}, f(hi) = {f_hi}")]
    NotBracketed {
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },

    #[error("root finder did not converge after {iterations} iterations")]
    NoConvergence { iterations: usize },

    #[error(
        "equilibrium violated in state {state}: {action} beats the equilibrium action by {gain:e}"
    )]
    EquilibriumViolation {
        state: String,
        action: String,
        gain: f64,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_probability(
    name: &'static str,
    value: f64,
    lo_open: bool,
    hi_open: bool,
) -> Result<()> {
    let lo_ok = if lo_open { value > 0.0 } else { value >= 0.0 };
    let hi_ok = if hi_open { value < 1.0 } else { value <= 1.0 };
    if value.is_finite() && lo_ok && hi_ok {
        Ok(())
    } else {
        let interval = match (lo_open, hi_open) {
            (true, true) => "(0, 1)",
            (true, false) => "(0, 1]",
            (false, true) => "[0, 1)",
            (false, false) => "[0, 1]",
        };
        Err(Error::InvalidParameter {
            name,
            reason: format!("{value} is not in {interval}"),
        })
    }
}

pub(crate) fn check_positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            reason: format!("{value} must be a finite positive number"),
        })
    }
}
