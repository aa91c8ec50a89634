use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("quadrature order {order} exceeds the stability cap {cap}")]
    QuadratureOrderCap { order: usize, cap: usize },

    #[error("polynomial degree index {index} exceeds the cap {cap}")]
    DegreeCap { index: usize, cap: usize },

    /// The imaginary part of a quadrature sum that must be real did not cancel.
    #[error("quadrature residual {residual:.3e} exceeds tolerance (scale {scale:.3e}) in {context}")]
    QuadratureResidual {
        context: &'static str,
        residual: f64,
        scale: f64,
    },

    /// A truncated integration window left too much mass in its tails.
    #[error("truncation diagnostic in {context}: tail fraction {tail:.3e}")]
    Truncation { context: &'static str, tail: f64 },

    /// Two independent representations of the same quantity disagree.
    #[error("dual-representation discrepancy {discrepancy:.3e} in {context}")]
    Discrepancy {
        context: &'static str,
        discrepancy: f64,
    },

    /// A result left the range of `f64`.
    #[error("overflow in {context}")]
    Overflow { context: &'static str },

    #[error("eigensolver did not converge within {iterations} iterations")]
    EigenNonConvergence { iterations: usize },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("empty sample set")]
    EmptySamples,

    #[error("quadrature budget exceeded: {0}")]
    Budget(String),

    #[error("archive format: {0}")]
    Archive(String),

    #[error("i/o: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl Error {
    /// True for failures of a numerical diagnostic (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::QuadratureResidual { .. }
                | Error::Truncation { .. }
                | Error::Discrepancy { .. }
                | Error::EigenNonConvergence { .. }
                | Error::Overflow { .. }
                | Error::Budget(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
