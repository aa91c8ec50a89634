//! Weakly non-chiral microscopic limit.
//!
//! Eigenvalues, masses and the transition parameter are rescaled as
//! `x_hat = sqrt(2n) x`, `m_hat = sqrt(2n) m`, `a_hat = sqrt(2n) a / 2` and
//! `n -> infinity`. Every Bessel function of `sqrt(m_hat^2 - w^2)` with complex
//! `w` goes through the entire functions `bessel_i_entire`, so no branch of the
//! root is ever chosen.

use crate::error::{Error, Result};
use crate::kernels::{bracket_pq, KernelSet};
use crate::params::{MicroParams, ModelParams};
use crate::sop::check_residual;
use crate::special_fn::{bessel_i_entire, bessel_j, cached_rule, QuadratureKind, QuadratureRule};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::Arc;

/// Gauss–Hermite order of the inner `s`, `r` integrals.
pub const INNER_ORDER: usize = 64;
/// Half-width of the outer integration range in units of the Gaussian width.
pub const OUTER_WIDTHS: f64 = 8.0;
/// Gauss–Legendre panels per unit of the outer variable.
const OUTER_PANELS_PER_UNIT: usize = 1;
const OUTER_PANEL_ORDER: usize = 16;
/// Gauss–Legendre order of `t`-integrals.
const T_ORDER: usize = 24;
/// Trapezoid points of the angular partition-function integral.
pub const THETA_POINTS: usize = 256;
/// Gauss–Hermite order of the Gaussian partition-function integral.
pub const PARTITION_HERMITE_ORDER: usize = 128;
/// Values below this fraction of the integrand modulus are cancellation zeros, and
/// the discrepancy is measured against this floor instead.
pub const PARTITION_ZERO_FLOOR: f64 = 1e-4;
/// Largest tolerated relative discrepancy between the two partition-function forms.
pub const PARTITION_TOLERANCE: f64 = 1e-8;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn gh(order: usize) -> Arc<QuadratureRule> {
    cached_rule(QuadratureKind::GaussHermite, order).expect("order below cap")
}

/// `exp(-2 t a_hat^2) pi^{-1/2} int ds e^{-s^2} I_0(sqrt(t (m_hat^2 - w^2)))`, `w = x_hat + 4i s a_hat`.
pub fn limit_poly_even(t: f64, x_hat: f64, mp: &MicroParams) -> Result<f64> {
    limit_poly(t, x_hat, mp, false)
}

/// Odd analogue of [`limit_poly_even`] with the extra factor `w`.
pub fn limit_poly_odd(t: f64, x_hat: f64, mp: &MicroParams) -> Result<f64> {
    limit_poly(t, x_hat, mp, true)
}

fn limit_poly(t: f64, x_hat: f64, mp: &MicroParams, odd: bool) -> Result<f64> {
    mp.validate()?;
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::InvalidParameter(format!("t must lie in [0,1], got {t}")));
    }
    let rule = gh(INNER_ORDER);
    let m2 = mp.m_hat * mp.m_hat;
    let (mut sum, mut scale) = (c(0.0, 0.0), 0.0);
    for (&s, &w) in rule.nodes.iter().zip(&rule.weights) {
        let z = c(x_hat, 4.0 * mp.a_hat * s);
        let mut term = bessel_i_entire(0, t * (m2 - z * z));
        if odd {
            term *= z;
        }
        sum += w * term;
        scale += w * term.norm();
    }
    check_residual("limiting polynomial", sum.im, scale)?;
    Ok((-2.0 * t * mp.a_hat * mp.a_hat).exp() * sum.re / PI.sqrt())
}

/// Per-node Bessel data at one abscissa: `w`, `I_0(X)`, `X I_1(X)`, `2 I_1(X) / X`
/// with `X^2 = m_hat^2 - w^2`.
struct Side {
    w: Vec<Complex64>,
    i0: Vec<Complex64>,
    xi1: Vec<Complex64>,
    i1_over: Vec<Complex64>,
}

/// Microscopic densities at fixed `(m_hat, a_hat)`.
pub struct MicroDensity {
    mp: MicroParams,
    inner: Arc<QuadratureRule>,
    outer: Vec<(f64, f64)>,
    t_rule: Arc<QuadratureRule>,
}

impl MicroDensity {
    pub fn new(mp: MicroParams) -> Result<Self> {
        mp.validate()?;
        if mp.a_hat <= 0.0 {
            return Err(Error::InvalidParameter(
                "microscopic density needs a_hat > 0".into(),
            ));
        }
        if mp.nu > 1 {
            return Err(Error::InvalidParameter(format!(
                "microscopic density needs nu in {{0,1}}, got {}",
                mp.nu
            )));
        }
        let panel = cached_rule(QuadratureKind::GaussLegendre, OUTER_PANEL_ORDER)?;
        let panels = (2.0 * OUTER_WIDTHS) as usize * OUTER_PANELS_PER_UNIT;
        let h = 2.0 * OUTER_WIDTHS / panels as f64;
        let outer = (0..panels)
            .flat_map(|k| panel.mapped(-OUTER_WIDTHS + h * k as f64, -OUTER_WIDTHS + h * (k + 1) as f64))
            .collect();
        log::debug!(
            "outer truncation at {OUTER_WIDTHS} widths, tail bound {:e}",
            (-OUTER_WIDTHS * OUTER_WIDTHS).exp()
        );
        Ok(MicroDensity {
            mp,
            inner: gh(INNER_ORDER),
            outer,
            t_rule: cached_rule(QuadratureKind::GaussLegendre, T_ORDER)?,
        })
    }

    pub fn params(&self) -> &MicroParams {
        &self.mp
    }

    fn side(&self, x: f64) -> Side {
        let m2 = self.mp.m_hat * self.mp.m_hat;
        let n = self.inner.order;
        let mut side = Side {
            w: Vec::with_capacity(n),
            i0: Vec::with_capacity(n),
            xi1: Vec::with_capacity(n),
            i1_over: Vec::with_capacity(n),
        };
        for &s in &self.inner.nodes {
            let w = c(x, 4.0 * self.mp.a_hat * s);
            let u = m2 - w * w;
            let i1 = bessel_i_entire(1, u);
            side.w.push(w);
            side.i0.push(bessel_i_entire(0, u));
            side.xi1.push(0.5 * u * i1);
            side.i1_over.push(i1);
        }
        side
    }

    // Outer abscissa z_hat = -x_hat + 4 sqrt(2) a_hat tau.
    fn z_of(&self, x: f64, tau: f64) -> f64 {
        -x + 4.0 * 2f64.sqrt() * self.mp.a_hat * tau
    }

    // erf(v / 4sqrt2 a + m / 2sqrt2 a) + erf(v / 4sqrt2 a - m / 2sqrt2 a)
    fn bracket(&self, v: f64) -> f64 {
        let s = 2.0 * 2f64.sqrt() * self.mp.a_hat;
        bracket_pq(v / (2.0 * s), self.mp.m_hat / s).to_f64()
    }

    // sum_{s,r} w_s w_r [X_r I1(X_r) I0(Y_s) - (x <-> z)] / (x + z + 4i a (s + r)),
    // r on the x side, s on the z side.
    fn cd_sum(&self, sx: &Side, sz: &Side, x: f64, z: f64) -> Result<f64> {
        let w = &self.inner.weights;
        let guard = 1e-6 * (1.0 + x.abs() + z.abs());
        let (mut sum, mut scale) = (c(0.0, 0.0), 0.0);
        for r in 0..w.len() {
            for s in 0..w.len() {
                let den = sx.w[r] + sz.w[s];
                let term = if den.norm() < guard {
                    // removable point: (v - w)/2 int_0^1 dt I0(X sqrt t) I0(Y sqrt t)
                    let (ux, uz) = (self.u(sx.w[r]), self.u(sz.w[s]));
                    let integral: Complex64 = self
                        .t_rule
                        .mapped(0.0, 1.0)
                        .iter()
                        .map(|&(t, wt)| wt * bessel_i_entire(0, t * ux) * bessel_i_entire(0, t * uz))
                        .sum();
                    0.5 * (sz.w[s] - sx.w[r]) * integral
                } else {
                    (sx.xi1[r] * sz.i0[s] - sz.xi1[s] * sx.i0[r]) / den
                };
                let wt = w[r] * w[s];
                sum += wt * term;
                scale += wt * term.norm();
            }
        }
        check_residual("microscopic Christoffel-Darboux sum", sum.im, scale)?;
        Ok(sum.re)
    }

    fn u(&self, w: Complex64) -> Complex64 {
        self.mp.m_hat * self.mp.m_hat - w * w
    }

    /// `nu = 0` density from the Christoffel–Darboux form.
    pub fn rho_s(&self, x: f64) -> Result<f64> {
        let sx = self.side(x);
        let mut acc = 0.0;
        for &(tau, wt) in &self.outer {
            let z = self.z_of(x, tau);
            let b = self.bracket(z - x);
            if b == 0.0 {
                continue;
            }
            let sz = self.side(z);
            acc += wt * (-tau * tau).exp() * b * self.cd_sum(&sx, &sz, x, z)?;
        }
        Ok(acc / (4.0 * PI.sqrt() * PI))
    }

    /// `nu = 0` density from the form with the explicit `t`-integral, as a cross-check.
    pub fn rho_s_t_form(&self, x: f64) -> Result<f64> {
        let w = &self.inner.weights;
        let sx = self.side(x);
        let ts = self.t_rule.mapped(0.0, 1.0);
        // I_0(X sqrt t) per node and t
        let table = |side: &Side| -> Vec<Vec<Complex64>> {
            side.w
                .iter()
                .map(|&wn| {
                    let u = self.u(wn);
                    ts.iter().map(|&(t, _)| bessel_i_entire(0, t * u)).collect()
                })
                .collect()
        };
        let tx = table(&sx);
        let mut acc = 0.0;
        for &(tau, wt) in &self.outer {
            let z = self.z_of(x, tau);
            let b = self.bracket(x - z);
            if b == 0.0 {
                continue;
            }
            let sz = self.side(z);
            let tz = table(&sz);
            let (mut sum, mut scale) = (c(0.0, 0.0), 0.0);
            for r in 0..w.len() {
                for s in 0..w.len() {
                    let tint: Complex64 = ts
                        .iter()
                        .enumerate()
                        .map(|(k, &(_, tw))| tw * tx[r][k] * tz[s][k])
                        .sum();
                    let term = (sx.w[r] - sz.w[s]) * tint;
                    sum += w[r] * w[s] * term;
                    scale += w[r] * w[s] * term.norm();
                }
            }
            check_residual("microscopic t-form", sum.im, scale)?;
            acc += wt * (-tau * tau).exp() * b * sum.re;
        }
        Ok(acc / (8.0 * PI.sqrt() * PI))
    }

    fn p_and_a(&self, side: &Side) -> Result<(f64, f64)> {
        let m = self.mp.m_hat;
        let (mut p, mut a) = (c(0.0, 0.0), c(0.0, 0.0));
        let (mut sp, mut sa) = (0.0, 0.0);
        for (k, &wt) in self.inner.weights.iter().enumerate() {
            let at = (m + side.w[k]) * side.i1_over[k];
            p += wt * side.i0[k];
            a += wt * at;
            sp += wt * side.i0[k].norm();
            sa += wt * at.norm();
        }
        check_residual("microscopic nu=1 moments", p.im, sp)?;
        check_residual("microscopic nu=1 moments", a.im, sa)?;
        Ok((p.re / PI.sqrt(), a.re / PI.sqrt()))
    }

    /// Correction of the `nu = 1` density relative to `rho_s`, excluding the zero-mode term.
    pub fn nu1_correction(&self, x: f64) -> Result<f64> {
        let (px, ax) = self.p_and_a(&self.side(x))?;
        let mut acc = 0.0;
        for &(tau, wt) in &self.outer {
            let z = self.z_of(x, tau);
            let b = self.bracket(x - z);
            if b == 0.0 {
                continue;
            }
            let (pz, az) = self.p_and_a(&self.side(z))?;
            acc += wt * (-tau * tau).exp() * b * (px * az - pz * ax);
        }
        Ok(acc / (8.0 * PI.sqrt()))
    }

    /// Broadened zero mode `exp(-(x + m)^2 / 16 a^2) P(x) / (4 sqrt(pi) a)`.
    pub fn zero_mode(&self, x: f64) -> Result<f64> {
        let a = self.mp.a_hat;
        let (p, _) = self.p_and_a(&self.side(x))?;
        let g = (x + self.mp.m_hat).powi(2) / (16.0 * a * a);
        Ok((-g).exp() * p / (4.0 * PI.sqrt() * a))
    }

    /// Density for the index stored in the parameters.
    pub fn density(&self, x: f64) -> Result<f64> {
        let base = self.rho_s(x)?;
        if self.mp.nu == 0 {
            return Ok(base);
        }
        Ok(base + self.nu1_correction(x)? + self.zero_mode(x)?)
    }
}

/// Microscopic `nu = 0` density.
pub fn rho_s(x_hat: f64, mp: &MicroParams) -> Result<f64> {
    require_index(mp, 0)?;
    MicroDensity::new(*mp)?.rho_s(x_hat)
}

/// Microscopic `nu = 1` density including the broadened zero mode.
pub fn rho_s_nu1(x_hat: f64, mp: &MicroParams) -> Result<f64> {
    require_index(mp, 1)?;
    MicroDensity::new(*mp)?.density(x_hat)
}

fn require_index(mp: &MicroParams, nu: usize) -> Result<()> {
    if mp.nu == nu {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "expected nu = {nu}, got {}",
            mp.nu
        )))
    }
}

/// Microscopic chGUE density `|x|/2 (J0^2 + J1^2)` (`nu = 0`) or `|x|/2 (J1^2 - J0 J2)` (`nu = 1`).
pub fn chgue_density_micro(x_hat: f64, nu: usize) -> Result<f64> {
    let x = x_hat.abs();
    match nu {
        0 => Ok(0.5 * x * (bessel_j(0, x).powi(2) + bessel_j(1, x).powi(2))),
        1 => Ok(0.5 * x * (bessel_j(1, x).powi(2) - bessel_j(0, x) * bessel_j(2, x))),
        _ => Err(Error::InvalidParameter(format!("nu must be 0 or 1, got {nu}"))),
    }
}

/// `a_hat -> 0` limit of the microscopic density away from the zero mode.
pub fn shifted_bessel_density(x_hat: f64, m_hat: f64, nu: usize) -> Result<f64> {
    if x_hat.abs() <= m_hat {
        return Ok(0.0);
    }
    let y = (x_hat * x_hat - m_hat * m_hat).sqrt();
    let ratio = if m_hat == 0.0 { 1.0 } else { x_hat.abs() / y };
    Ok(ratio * chgue_density_micro(y, nu)?)
}

/// Both representations of the one-flavour microscopic partition function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PartitionValues {
    /// Angular integral by the periodic trapezoid rule.
    pub angular: f64,
    /// Gaussian integral over Bessel functions by Gauss–Hermite.
    pub gaussian: f64,
    /// Angular integral of the modulus of the integrand.
    pub scale: f64,
    pub relative_discrepancy: f64,
}

/// One-flavour partition function at `(m_hat, z_hat, a_hat, nu)` in two independent forms.
///
/// Fails with [`Error::Discrepancy`] above [`PARTITION_TOLERANCE`].
pub fn partition_nf1_micro(mp: &MicroParams) -> Result<PartitionValues> {
    mp.validate()?;
    let (m, z, a) = (mp.m_hat, mp.z_hat, mp.a_hat);
    let nu = mp.nu as f64;
    let pre = (-2.0 * a * a).exp();

    let (mut angular, mut magnitude) = (0.0, 0.0);
    for k in 0..THETA_POINTS {
        let th = 2.0 * PI * k as f64 / THETA_POINTS as f64;
        let (s, co) = th.sin_cos();
        // real part of e^{i nu th + m cos th + i z sin th + 4a^2 sin^2 th}
        let modulus = (m * co + 4.0 * a * a * s * s - 2.0 * a * a).exp();
        angular += modulus * (nu * th + z * s).cos();
        magnitude += modulus;
    }
    angular /= THETA_POINTS as f64;
    let scale = magnitude / THETA_POINTS as f64;

    let order = u32::try_from(mp.nu).map_err(|_| Error::InvalidParameter("nu too large".into()))?;
    let rule = gh(PARTITION_HERMITE_ORDER);
    let (mut sum, mut l1) = (c(0.0, 0.0), 0.0);
    for (&x, &wt) in rule.nodes.iter().zip(&rule.weights) {
        let w = c(z, 4.0 * x * a);
        // (ratio)^{nu/2} I_nu(sqrt(m^2 - w^2)) = ((m - w)/2)^nu Î_nu(m^2 - w^2)
        let term = ((m - w) / 2.0).powu(order) * bessel_i_entire(order, m * m - w * w);
        sum += wt * term;
        l1 += wt * term.norm();
    }
    check_residual("partition function", sum.im, l1)?;
    let gaussian = pre * sum.re / PI.sqrt();

    if !(angular.is_finite() && gaussian.is_finite() && scale.is_finite()) {
        return Err(Error::Overflow {
            context: "one-flavour partition function",
        });
    }
    let reference = angular.abs().max(gaussian.abs()).max(PARTITION_ZERO_FLOOR * scale);
    let relative_discrepancy = (angular - gaussian).abs() / reference;
    if relative_discrepancy > PARTITION_TOLERANCE {
        return Err(Error::Discrepancy {
            context: "one-flavour partition function",
            discrepancy: relative_discrepancy,
        });
    }
    Ok(PartitionValues {
        angular,
        gaussian,
        scale,
        relative_discrepancy,
    })
}

/// Distances between rescaled finite-n densities and the microscopic limit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub micro: MicroParams,
    pub grid: Vec<f64>,
    pub ns: Vec<usize>,
    /// Sup-norm distance per entry of `ns`.
    pub distances: Vec<f64>,
    /// Distances are non-increasing up to `noise`.
    pub monotone: bool,
    pub noise: f64,
}

/// Compares `rho_1(x_hat / sqrt(2n)) / sqrt(2n)` with the microscopic density on `grid`.
pub fn micro_convergence_check(mp: &MicroParams, ns: &[usize], grid: &[f64]) -> Result<ConvergenceReport> {
    use rayon::prelude::*;
    if ns.is_empty() || grid.is_empty() {
        return Err(Error::InvalidParameter("need at least one n and one grid point".into()));
    }
    let micro = MicroDensity::new(*mp)?;
    let limit = grid
        .par_iter()
        .map(|&x| micro.density(x))
        .collect::<Result<Vec<_>>>()?;
    let mut distances = Vec::with_capacity(ns.len());
    for &n in ns {
        let ks = KernelSet::new(ModelParams::from_micro(n, mp)?)?;
        let s = (2.0 * n as f64).sqrt();
        let finite = grid
            .par_iter()
            .map(|&x| ks.rho1(x / s).map(|v| v / s))
            .collect::<Result<Vec<_>>>()?;
        let d = finite
            .iter()
            .zip(&limit)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        distances.push(d);
    }
    let noise = 1e-6;
    let monotone = distances.windows(2).all(|w| w[1] <= w[0] + noise);
    Ok(ConvergenceReport {
        micro: *mp,
        grid: grid.to_vec(),
        ns: ns.to_vec(),
        distances,
        monotone,
        noise,
    })
}
