use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Finite-size ensemble configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Half the chiral block size.
    pub n: usize,
    /// Index: the lower chiral block is `n + nu` wide.
    pub nu: usize,
    /// Transition parameter, strictly inside `(0, 1)`.
    pub a: f64,
    /// Mass, `m >= 0`.
    pub m: f64,
}

impl ModelParams {
    pub fn new(n: usize, nu: usize, a: f64, m: f64) -> Result<Self> {
        let p = ModelParams { n, nu, a, m };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidParameter("n must be positive".into()));
        }
        if !(self.a > 0.0 && self.a < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "a must lie strictly inside (0,1), got {}",
                self.a
            )));
        }
        if !(self.m >= 0.0 && self.m.is_finite()) {
            return Err(Error::InvalidParameter(format!("m must be >= 0, got {}", self.m)));
        }
        Ok(())
    }

    /// Operator dimension `2n + nu`.
    pub fn dim(&self) -> usize {
        2 * self.n + self.nu
    }

    /// `1 - a^2`.
    pub fn c(&self) -> f64 {
        1.0 - self.a * self.a
    }

    pub(crate) fn require_nu(&self, allowed: &[usize]) -> Result<()> {
        if allowed.contains(&self.nu) {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "nu = {} not supported here (allowed {:?})",
                self.nu, allowed
            )))
        }
    }

    /// Finite-size parameters matching microscopic ones at this `n`:
    /// `m = m_hat / sqrt(2n)`, `a = 2 a_hat / sqrt(2n)`.
    pub fn from_micro(n: usize, mp: &MicroParams) -> Result<Self> {
        let s = (2.0 * n as f64).sqrt();
        Self::new(n, mp.nu, 2.0 * mp.a_hat / s, mp.m_hat / s)
    }
}

/// Parameters of the microscopic limit.
///
/// In terms of the low-energy constants of Wilson chiral perturbation theory,
/// `m_hat = m_q Sigma V` and `a_hat^2 = a_lat^2 V W8`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MicroParams {
    pub m_hat: f64,
    pub a_hat: f64,
    pub z_hat: f64,
    pub nu: usize,
}

impl MicroParams {
    pub fn new(m_hat: f64, a_hat: f64, nu: usize) -> Result<Self> {
        let mp = MicroParams {
            m_hat,
            a_hat,
            z_hat: 0.0,
            nu,
        };
        mp.validate()?;
        Ok(mp)
    }

    pub fn with_z(mut self, z_hat: f64) -> Self {
        self.z_hat = z_hat;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.m_hat >= 0.0 && self.m_hat.is_finite()) {
            return Err(Error::InvalidParameter("m_hat must be >= 0".into()));
        }
        if !(self.a_hat >= 0.0 && self.a_hat.is_finite()) {
            return Err(Error::InvalidParameter("a_hat must be >= 0".into()));
        }
        if !self.z_hat.is_finite() {
            return Err(Error::InvalidParameter("z_hat must be finite".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_endpoints() {
        assert!(ModelParams::new(2, 0, 0.0, 0.0).is_err());
        assert!(ModelParams::new(2, 0, 1.0, 0.0).is_err());
        assert!(ModelParams::new(0, 0, 0.5, 0.0).is_err());
        assert!(ModelParams::new(2, 0, 0.5, -0.1).is_err());
        assert_eq!(ModelParams::new(3, 1, 0.5, 0.2).unwrap().dim(), 7);
    }

    #[test]
    fn micro_mapping() {
        let mp = MicroParams::new(1.0, 0.1, 0).unwrap();
        let p = ModelParams::from_micro(8, &mp).unwrap();
        assert!((p.m - 0.25).abs() < 1e-15);
        assert!((p.a - 0.05).abs() < 1e-15);
    }
}
