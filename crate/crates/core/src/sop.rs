//! Skew-orthogonal polynomials of the two-matrix model.
//!
//! Internally the polynomials are carried in a normalized form
//! `P_j(x) = pi^{-1/2} int ds e^{-s^2} L_j(X_s)` and
//! `Q_j(x) = pi^{-1/2} int ds e^{-s^2} (x + 2ias) L_j(X_s)` with
//! `X_s = ((x + 2ias)^2 - m^2) / (2(1 - a^2))`, so that
//! `R_{2j} = (-1)^j j! (2c)^j P_j` and `R_{2j+1} = (-1)^j j! (2c)^j Q_j`.

use crate::error::{Error, Result};
use crate::logdomain::SignedLog;
use crate::params::ModelParams;
use crate::special_fn::{cached_rule, laguerre, QuadratureKind, QuadratureRule, DEFAULT_HERMITE_ORDER};
use num_complex::Complex64;
use std::f64::consts::PI;
use std::sync::Arc;

/// Highest half-degree `j` accepted by the polynomial routines.
pub const DEGREE_CAP: usize = 64;
/// Imaginary parts of real-valued quadrature sums must stay below this fraction of the L1 scale.
pub const IMAG_RESIDUAL_TOL: f64 = 1e-9;

fn ln_factorial(k: usize) -> f64 {
    libm::lgamma(k as f64 + 1.0)
}

/// `R_{2j} = monic_scale(j) * P_j`, `R_{2j+1} = monic_scale(j) * Q_j`.
pub(crate) fn monic_scale(j: usize, c: f64) -> SignedLog {
    let sign = if j % 2 == 0 { 1 } else { -1 };
    SignedLog::new(sign, ln_factorial(j) + j as f64 * (2.0 * c).ln())
}

/// Evaluates the normalized families `P_j`, `Q_j` for all `j <= jmax` at once.
#[derive(Debug, Clone)]
pub struct PolyEvaluator {
    params: ModelParams,
    rule: Arc<QuadratureRule>,
}

/// `P_j(x)` and `Q_j(x)` for `j = 0..=jmax`.
#[derive(Debug, Clone)]
pub struct PolyValues {
    pub p: Vec<f64>,
    pub q: Vec<f64>,
}

impl PolyEvaluator {
    pub fn new(params: ModelParams) -> Result<Self> {
        Self::with_order(params, DEFAULT_HERMITE_ORDER)
    }

    pub fn with_order(params: ModelParams, order: usize) -> Result<Self> {
        params.validate()?;
        Ok(PolyEvaluator {
            params,
            rule: cached_rule(QuadratureKind::GaussHermite, order)?,
        })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn eval(&self, x: f64, jmax: usize) -> Result<PolyValues> {
        if jmax > DEGREE_CAP {
            return Err(Error::DegreeCap {
                index: jmax,
                cap: DEGREE_CAP,
            });
        }
        let c = self.params.c();
        let a = self.params.a;
        let m2 = self.params.m * self.params.m;
        let len = jmax + 1;
        let zero = Complex64::new(0.0, 0.0);
        let mut sp = vec![zero; len];
        let mut sq = vec![zero; len];
        let mut scale_p = vec![0.0; len];
        let mut scale_q = vec![0.0; len];
        let mut table = vec![zero; len];
        for (&s, &w) in self.rule.nodes.iter().zip(&self.rule.weights) {
            let zc = Complex64::new(x, 2.0 * a * s);
            let arg = (zc * zc - m2) / (2.0 * c);
            crate::special_fn::laguerre_table(0, arg, &mut table);
            let zn = zc.norm();
            for j in 0..len {
                let l = table[j];
                sp[j] += w * l;
                sq[j] += w * zc * l;
                scale_p[j] += w * l.norm();
                scale_q[j] += w * zn * l.norm();
            }
        }
        for j in 0..len {
            check_residual("skew-orthogonal polynomial P", sp[j].im, scale_p[j])?;
            check_residual("skew-orthogonal polynomial Q", sq[j].im, scale_q[j])?;
        }
        let norm = PI.sqrt();
        Ok(PolyValues {
            p: sp.iter().map(|v| v.re / norm).collect(),
            q: sq.iter().map(|v| v.re / norm).collect(),
        })
    }
}

pub(crate) fn check_residual(context: &'static str, imag: f64, scale: f64) -> Result<()> {
    if imag.abs() > IMAG_RESIDUAL_TOL * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::QuadratureResidual {
            context,
            residual: imag.abs(),
            scale,
        });
    }
    Ok(())
}

/// Monic even skew-orthogonal polynomial `R_{2j}(x)`.
pub fn r_even(j: usize, x: f64, p: &ModelParams) -> Result<f64> {
    let v = PolyEvaluator::new(*p)?.eval(x, j)?;
    Ok((monic_scale(j, p.c()) * v.p[j]).to_f64())
}

/// Monic odd skew-orthogonal polynomial `R_{2j+1}(x)`.
pub fn r_odd(j: usize, x: f64, p: &ModelParams) -> Result<f64> {
    let v = PolyEvaluator::new(*p)?.eval(x, j)?;
    Ok((monic_scale(j, p.c()) * v.q[j]).to_f64())
}

/// `ln r_j`, the logarithm of the skew norm `<R_{2j}, R_{2j+1}>`.
pub fn ln_norm_r(j: usize, p: &ModelParams) -> f64 {
    let c = p.c();
    let jf = j as f64;
    (8.0 * (2.0 * PI).sqrt() * p.a).ln() + (2.0 * jf + 0.5) * c.ln() + 2.0 * jf * 2f64.ln()
        + 2.0 * ln_factorial(j)
        - p.m * p.m / (2.0 * c)
}

/// Skew norm `r_j = <R_{2j}, R_{2j+1}>`.
pub fn norm_r(j: usize, p: &ModelParams) -> f64 {
    ln_norm_r(j, p).exp()
}

/// `s_j = int dx w(x) f(x) R_j(x)`.
pub fn coeff_s(j: usize, p: &ModelParams) -> SignedLog {
    let i = j / 2;
    let c = p.c();
    let sign = if i % 2 == 0 { 1 } else { -1 };
    let even = SignedLog::new(
        sign,
        ln_factorial(i)
            + (i + 1) as f64 * 2f64.ln()
            + i as f64 * c.ln()
            + 0.5 * PI.ln()
            + p.a.ln()
            + p.m * p.m / (4.0 * p.a * p.a),
    );
    if j % 2 == 0 {
        even
    } else {
        even * (-p.m)
    }
}

/// `s_j / s_{2n}` with the `exp(m^2/4a^2)` factors cancelled analytically.
pub(crate) fn coeff_ratio(j: usize, p: &ModelParams) -> f64 {
    let i = j / 2;
    let n = p.n;
    let c = p.c();
    let sign = if (i + n) % 2 == 0 { 1.0 } else { -1.0 };
    let ratio =
        sign * (ln_factorial(i) - ln_factorial(n) + (i as f64 - n as f64) * (2.0 * c).ln()).exp();
    if j % 2 == 0 {
        ratio
    } else {
        -p.m * ratio
    }
}

/// Modified polynomials for `nu = 1`: `R_j - (s_j / s_{N-1}) R_{N-1}`, with `R_{N-1}` unchanged.
pub fn r_nu1(j: usize, x: f64, p: &ModelParams) -> Result<f64> {
    p.require_nu(&[1])?;
    let top = 2 * p.n;
    if j > top {
        return Err(Error::InvalidParameter(format!(
            "r_nu1 index {j} exceeds N-1 = {top}"
        )));
    }
    let v = PolyEvaluator::new(*p)?.eval(x, p.n)?;
    let c = p.c();
    let r_top = (monic_scale(p.n, c) * v.p[p.n]).to_f64();
    if j == top {
        return Ok(r_top);
    }
    let i = j / 2;
    let base = if j % 2 == 0 { v.p[i] } else { v.q[i] };
    let rj = (monic_scale(i, c) * base).to_f64();
    Ok(rj - coeff_ratio(j, p) * r_top)
}

/// Average characteristic polynomial `<det(z + D5)>` for any index `nu`.
pub fn char_poly_avg(z: f64, p: &ModelParams) -> Result<f64> {
    p.validate()?;
    let rule = cached_rule(QuadratureKind::GaussHermite, DEFAULT_HERMITE_ORDER)?;
    let c = p.c();
    let nu = u32::try_from(p.nu).map_err(|_| Error::InvalidParameter("nu too large".into()))?;
    let mut sum = Complex64::new(0.0, 0.0);
    let mut scale = 0.0;
    for (&t, &w) in rule.nodes.iter().zip(&rule.weights) {
        let zc = Complex64::new(z, 2.0 * p.a * t);
        let arg = (zc * zc - p.m * p.m) / (2.0 * c);
        let term = (zc - p.m).powu(nu) * laguerre(p.n, nu, arg);
        sum += w * term;
        scale += w * term.norm();
    }
    check_residual("characteristic polynomial average", sum.im, scale)?;
    Ok((monic_scale(p.n, c) * (sum.re / PI.sqrt())).to_f64())
}
