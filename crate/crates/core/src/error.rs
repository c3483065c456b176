use thiserror::Error;

/// Errors raised by the capacity, link and sweep computations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {name} = {value} ({reason})")]
    Domain {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    /// The radicand of `d` came out negative beyond rounding noise.
    #[error("internal error: radicand of d is {0:e} (< -1e-15)")]
    NegativeRadicand(f64),

    /// The printed active-receiver G2 noise form has a pole at `1 - tau_L * n = 0`.
    #[error("G2 active-receiver noise denominator 1 - tau_L*n = {denominator} is not positive")]
    ActiveG2Pole { denominator: f64 },

    /// A quantity requested at `nu = 0` involves `log((1+nu)/nu)` or a division by `nu`.
    #[error("{0} diverges at nu = 0")]
    Diverges(&'static str),

    /// The entanglement-assisted advantage never reaches the requested factor.
    #[error("no crossing: ea/holevo stays below {factor} for all M <= {m_max:e}")]
    NoCrossing { factor: f64, m_max: f64 },

    /// The bracket end points do not straddle a sign change.
    #[error("bracketing failed on [{lo:e}, {hi:e}]")]
    Bracket { lo: f64, hi: f64 },
}

impl Error {
    pub(crate) fn domain(name: &'static str, value: f64, reason: &'static str) -> Self {
        Error::Domain {
            name,
            value,
            reason,
        }
    }

    /// Short machine-readable code, used for the `ERR:<code>` cell sentinel.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Domain { .. } => "domain",
            Error::NegativeRadicand(_) => "radicand",
            Error::ActiveG2Pole { .. } => "g2_active_pole",
            Error::Diverges(_) => "diverges",
            Error::NoCrossing { .. } => "no_crossing",
            Error::Bracket { .. } => "bracket",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

/// Rejects NaN/inf and negative values.
pub(crate) fn non_negative(name: &'static str, value: f64) -> Result<f64> {
    if !value.is_finite() {
        return Err(Error::domain(name, value, "must be finite"));
    }
    if value < 0.0 {
        return Err(Error::domain(name, value, "must be non-negative"));
    }
    Ok(value)
}

pub(crate) fn positive(name: &'static str, value: f64) -> Result<f64> {
    non_negative(name, value)?;
    if value == 0.0 {
        return Err(Error::domain(name, value, "must be positive"));
    }
    Ok(value)
}
