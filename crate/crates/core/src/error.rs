use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Bad input: malformed matrix, unphysical state, invalid parameter or config key.
    #[error("validation error: {0}")]
    Validation(String),

    /// A numerical routine failed to produce a trustworthy answer.
    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("no steady state: drift matrix is not Hurwitz (max Re(eig) = {max_real_part:.6e})")]
    NoSteadyState { max_real_part: f64 },

    #[error("step size underflow at t = {t:.6e} s (h = {h:.3e} s); tighten tolerances or shorten t_end")]
    Stiffness { t: f64, h: f64 },

    #[error("no stable steady-field branch; intracavity |c_s|^2 roots: {roots:?}")]
    Multistability { roots: Vec<f64> },

    #[error("infeasible preparation: {reason}; maximal feasible strength is {max_strength}")]
    Infeasible { reason: String, max_strength: f64 },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }

    /// Validation-class errors map to exit status 2, everything else to 3.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Validation(_) | Error::Infeasible { .. } | Error::Io { .. }
        )
    }
}
