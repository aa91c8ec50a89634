//! Special functions and Gauss quadrature rules.

mod bessel;
mod erf;
mod laguerre;
mod quadrature;

pub use bessel::{bessel_i_entire, bessel_j, BESSEL_I_SERIES_LIMIT, BESSEL_J_SERIES_LIMIT};
pub use erf::{erf, erfc, erfcx, ln_erfc, ERFCX_FRACTION_THRESHOLD};
pub use laguerre::{laguerre, laguerre_real, laguerre_table};
pub use quadrature::{
    cached_rule, gauss_rule, QuadratureKind, QuadratureRule, DEFAULT_HERMITE_ORDER,
    DEFAULT_LEGENDRE_ORDER, HERMITE_ORDER_CAP, LEGENDRE_ORDER_CAP,
};
