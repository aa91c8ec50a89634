//! Sign / log-magnitude arithmetic.
//!
//! Quantities like `exp(m^2 / 4a^2)` or the Gaussian factors of the
//! antisymmetric weight leave the range of `f64` long before the physical
//! observables built from them do. `SignedLog` keeps the exponent separate so
//! that products and ratios combine exponents before anything is exponentiated.

use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// A real number stored as `sign * exp(ln_abs)`; `sign` is -1, 0 or +1.
#[derive(Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignedLog {
    pub sign: i8,
    pub ln_abs: f64,
}

impl SignedLog {
    pub const ZERO: SignedLog = SignedLog {
        sign: 0,
        ln_abs: f64::NEG_INFINITY,
    };
    pub const ONE: SignedLog = SignedLog {
        sign: 1,
        ln_abs: 0.0,
    };

    pub fn new(sign: i8, ln_abs: f64) -> Self {
        if sign == 0 || ln_abs == f64::NEG_INFINITY {
            Self::ZERO
        } else {
            SignedLog {
                sign: sign.signum(),
                ln_abs,
            }
        }
    }

    pub fn from_f64(x: f64) -> Self {
        if x == 0.0 {
            Self::ZERO
        } else {
            SignedLog {
                sign: if x > 0.0 { 1 } else { -1 },
                ln_abs: x.abs().ln(),
            }
        }
    }

    /// `mantissa * exp(exponent)` without forming `exp(exponent)`.
    pub fn from_scaled(mantissa: f64, exponent: f64) -> Self {
        let mut v = Self::from_f64(mantissa);
        if v.sign != 0 {
            v.ln_abs += exponent;
        }
        v
    }

    /// `exp(exponent)`.
    pub fn exp(exponent: f64) -> Self {
        Self::new(1, exponent)
    }

    pub fn is_zero(&self) -> bool {
        self.sign == 0
    }

    /// Converts back to `f64`; saturates to `±inf` / `0` outside the range.
    pub fn to_f64(self) -> f64 {
        match self.sign {
            0 => 0.0,
            s => f64::from(s) * self.ln_abs.exp(),
        }
    }

    pub fn abs(self) -> Self {
        if self.sign == 0 {
            self
        } else {
            SignedLog {
                sign: 1,
                ln_abs: self.ln_abs,
            }
        }
    }

    pub fn powi(self, k: i32) -> Self {
        if k == 0 {
            return Self::ONE;
        }
        if self.sign == 0 {
            return Self::ZERO;
        }
        let sign = if self.sign < 0 && k % 2 != 0 { -1 } else { 1 };
        SignedLog {
            sign,
            ln_abs: self.ln_abs * f64::from(k),
        }
    }

    /// Multiplies by `exp(exponent)`.
    pub fn scale_exp(self, exponent: f64) -> Self {
        if self.sign == 0 {
            self
        } else {
            SignedLog {
                sign: self.sign,
                ln_abs: self.ln_abs + exponent,
            }
        }
    }
}

impl Default for SignedLog {
    fn default() -> Self {
        Self::ZERO
    }
}

impl fmt::Debug for SignedLog {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.sign {
            0 => write!(f, "0"),
            s => write!(f, "{}exp({})", if s < 0 { "-" } else { "+" }, self.ln_abs),
        }
    }
}

impl fmt::Display for SignedLog {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = self.to_f64();
        if v.is_finite() && (v == 0.0 || v.abs() > 1e-300) {
            write!(f, "{v}")
        } else {
            write!(f, "{self:?}")
        }
    }
}

impl Neg for SignedLog {
    type Output = SignedLog;
    fn neg(self) -> SignedLog {
        SignedLog {
            sign: -self.sign,
            ln_abs: self.ln_abs,
        }
    }
}

impl Mul for SignedLog {
    type Output = SignedLog;
    fn mul(self, rhs: SignedLog) -> SignedLog {
        if self.sign == 0 || rhs.sign == 0 {
            return SignedLog::ZERO;
        }
        SignedLog {
            sign: self.sign * rhs.sign,
            ln_abs: self.ln_abs + rhs.ln_abs,
        }
    }
}

impl Mul<f64> for SignedLog {
    type Output = SignedLog;
    fn mul(self, rhs: f64) -> SignedLog {
        self * SignedLog::from_f64(rhs)
    }
}

impl Div for SignedLog {
    type Output = SignedLog;
    fn div(self, rhs: SignedLog) -> SignedLog {
        if rhs.sign == 0 {
            return SignedLog::new(self.sign.max(1), f64::INFINITY);
        }
        if self.sign == 0 {
            return SignedLog::ZERO;
        }
        SignedLog {
            sign: self.sign * rhs.sign,
            ln_abs: self.ln_abs - rhs.ln_abs,
        }
    }
}

impl Add for SignedLog {
    type Output = SignedLog;
    fn add(self, rhs: SignedLog) -> SignedLog {
        if self.sign == 0 {
            return rhs;
        }
        if rhs.sign == 0 {
            return self;
        }
        let (big, small) = if self.ln_abs >= rhs.ln_abs {
            (self, rhs)
        } else {
            (rhs, self)
        };
        if big.ln_abs == f64::INFINITY {
            return big;
        }
        let r = (small.ln_abs - big.ln_abs).exp();
        if big.sign == small.sign {
            SignedLog {
                sign: big.sign,
                ln_abs: big.ln_abs + r.ln_1p(),
            }
        } else if r == 1.0 {
            SignedLog::ZERO
        } else {
            SignedLog {
                sign: big.sign,
                ln_abs: big.ln_abs + (-r).ln_1p(),
            }
        }
    }
}

impl Sub for SignedLog {
    type Output = SignedLog;
    fn sub(self, rhs: SignedLog) -> SignedLog {
        self + (-rhs)
    }
}

impl std::iter::Sum for SignedLog {
    fn sum<I: Iterator<Item = SignedLog>>(iter: I) -> SignedLog {
        iter.fold(SignedLog::ZERO, |a, b| a + b)
    }
}

impl PartialOrd for SignedLog {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match self.sign.cmp(&other.sign) {
            Ordering::Equal => match self.sign {
                0 => Some(Ordering::Equal),
                1 => self.ln_abs.partial_cmp(&other.ln_abs),
                _ => other.ln_abs.partial_cmp(&self.ln_abs),
            },
            o => Some(o),
        }
    }
}

/// Sums `values[k] * exp(exponents[k])` by factoring out the largest exponent.
pub fn sum_scaled(values: &[f64], exponents: &[f64]) -> SignedLog {
    let top = exponents
        .iter()
        .zip(values)
        .filter(|(_, v)| **v != 0.0)
        .map(|(e, _)| *e)
        .fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY {
        return SignedLog::ZERO;
    }
    let s: f64 = values
        .iter()
        .zip(exponents)
        .map(|(v, e)| v * (e - top).exp())
        .sum();
    SignedLog::from_scaled(s, top)
}
