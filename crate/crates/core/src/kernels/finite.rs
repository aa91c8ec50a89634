//! Finite-n kernels `S_n`, `D_n`, `I_n` for `nu = 0` and `nu = 1`.
//!
//! Every `z`-integral `int dz w(z) F(x - z) g(z)` is taken after completing the
//! square: with `z = z0 + h t`, `z0 = -c x / (1 + a^2)`, `h = a sqrt(8 / (1 + a^2))`,
//! `w(z) F(x - z) = exp(E(x) - t^2) B(x - z)` where `E(x) = c x^2 / (4a^2 (1 + a^2))`
//! and `B` is the erf bracket of `F`.

use super::weights::{weight_f, weight_F, Bracket};
use crate::error::{Error, Result};
use crate::logdomain::SignedLog;
use crate::params::ModelParams;
use crate::sop::{check_residual, PolyEvaluator, DEGREE_CAP};
use crate::special_fn::{
    cached_rule, laguerre_table, QuadratureKind, QuadratureRule, DEFAULT_HERMITE_ORDER,
};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{LN_10, PI};
use std::sync::Arc;

/// `m / a` above which the `z`-integral switches from Gauss-Hermite to a scanned trapezoid rule.
pub const TRAPEZOID_SWITCH_RATIO: f64 = 20.0;
/// Decades below the peak at which the trapezoid window is cut.
pub const TRUNCATION_DECADES: f64 = 40.0;
/// Largest tolerated tail contribution relative to the peak.
pub const TAIL_TOLERANCE: f64 = 1e-10;
/// Christoffel–Darboux denominators smaller than this (times `1 + |x| + |y|`) use the direct sum.
pub const CD_GUARD: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KernelPath {
    SumOverPolynomials,
    ChristoffelDarboux,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ZQuadrature {
    /// Gauss-Hermite unless `m / a` exceeds [`TRAPEZOID_SWITCH_RATIO`].
    Auto,
    GaussHermite,
    Trapezoid,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelConfig {
    pub path: KernelPath,
    pub z_quadrature: ZQuadrature,
    /// Gauss-Hermite order of the polynomial `s`-integrals.
    pub s_order: usize,
    /// Gauss-Hermite order of the `z`-integral.
    pub z_order: usize,
    /// Trapezoid step in the scaled variable `t`.
    pub trapezoid_step: f64,
}

impl Default for KernelConfig {
    fn default() -> Self {
        KernelConfig {
            path: KernelPath::SumOverPolynomials,
            z_quadrature: ZQuadrature::Auto,
            s_order: DEFAULT_HERMITE_ORDER,
            z_order: DEFAULT_HERMITE_ORDER,
            trapezoid_step: 0.1,
        }
    }
}

/// Everything the sum-over-polynomials kernels need at one abscissa.
///
/// `phi[j] * exp(ln_phi)` is `int dz w(z) F(x - z) P_j(z)`, likewise `psi` with `Q_j`.
#[derive(Debug, Clone)]
pub struct PointData {
    pub x: f64,
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    pub phi: Vec<f64>,
    pub psi: Vec<f64>,
    pub ln_phi: f64,
}

/// Quadrature nodes for `int dz w(z) F(x - z) g(z) = exp(ln_scale) sum_k coef[k] g(z[k])`.
#[derive(Debug, Clone)]
pub(crate) struct ZNodes {
    pub z: Vec<f64>,
    pub coef: Vec<f64>,
    pub ln_scale: f64,
}

/// Kernels at fixed model parameters.
#[derive(Debug, Clone)]
pub struct KernelSet {
    params: ModelParams,
    config: KernelConfig,
    poly: PolyEvaluator,
    s_rule: Arc<QuadratureRule>,
    z_rule: Arc<QuadratureRule>,
    bracket: Bracket,
    ln_k: f64,
    trapezoid: bool,
}

/// `S(x,y)`, `S(y,x)`, `D(x,y)`, `I(x,y)` at one pair.
#[derive(Debug, Clone, Copy)]
pub struct KernelTriple {
    pub s_xy: SignedLog,
    pub s_yx: SignedLog,
    pub d: SignedLog,
    pub i: SignedLog,
}

impl KernelSet {
    pub fn new(params: ModelParams) -> Result<Self> {
        Self::with_config(params, KernelConfig::default())
    }

    pub fn with_config(params: ModelParams, config: KernelConfig) -> Result<Self> {
        params.validate()?;
        params.require_nu(&[0, 1])?;
        if params.n > DEGREE_CAP {
            return Err(Error::DegreeCap {
                index: params.n,
                cap: DEGREE_CAP,
            });
        }
        if !(config.trapezoid_step > 0.0 && config.trapezoid_step <= 0.25) {
            return Err(Error::InvalidParameter(
                "trapezoid step must lie in (0, 0.25]".into(),
            ));
        }
        let c = params.c();
        let trapezoid = match config.z_quadrature {
            ZQuadrature::Auto => params.m / params.a > TRAPEZOID_SWITCH_RATIO,
            ZQuadrature::GaussHermite => false,
            ZQuadrature::Trapezoid => true,
        };
        Ok(KernelSet {
            params,
            config,
            poly: PolyEvaluator::with_order(params, config.s_order)?,
            s_rule: cached_rule(QuadratureKind::GaussHermite, config.s_order)?,
            z_rule: cached_rule(QuadratureKind::GaussHermite, config.z_order)?,
            bracket: Bracket::new(&params),
            ln_k: params.m * params.m / (2.0 * c)
                - (8.0 * (2.0 * PI).sqrt() * params.a * c.sqrt()).ln(),
            trapezoid,
        })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn config(&self) -> &KernelConfig {
        &self.config
    }

    pub fn uses_trapezoid(&self) -> bool {
        self.trapezoid
    }

    fn ln_w(&self, x: f64) -> f64 {
        -x * x / (4.0 * self.params.a * self.params.a)
    }

    /// `E(x) = c x^2 / (4a^2 (1 + a^2))`.
    fn gauss_exponent(&self, x: f64) -> f64 {
        let a2 = self.params.a * self.params.a;
        self.params.c() * x * x / (4.0 * a2 * (1.0 + a2))
    }

    pub(crate) fn z_nodes(&self, x: f64) -> Result<ZNodes> {
        let a = self.params.a;
        let a2 = a * a;
        let c = self.params.c();
        let h = a * (8.0 / (1.0 + a2)).sqrt();
        let z0 = -c * x / (1.0 + a2);
        // x - z = v0 - h t
        let v0 = 2.0 * x / (1.0 + a2);
        let log_b = |t: f64| self.bracket.eval(v0 - h * t);

        let (ts, lws): (Vec<f64>, Vec<f64>) = if self.trapezoid {
            self.trapezoid_window(v0, h, &log_b)?
        } else {
            (
                self.z_rule.nodes.clone(),
                self.z_rule.weights.iter().map(|w| w.ln()).collect(),
            )
        };
        let mut exps = Vec::with_capacity(ts.len());
        let mut signs = Vec::with_capacity(ts.len());
        for (&t, &lw) in ts.iter().zip(&lws) {
            let b = log_b(t);
            exps.push(lw + b.ln_abs);
            signs.push(f64::from(b.sign));
        }
        let top = exps.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if top == f64::NEG_INFINITY {
            return Ok(ZNodes {
                z: Vec::new(),
                coef: Vec::new(),
                ln_scale: 0.0,
            });
        }
        let mut z = Vec::with_capacity(ts.len());
        let mut coef = Vec::with_capacity(ts.len());
        for ((&t, &e), &s) in ts.iter().zip(&exps).zip(&signs) {
            let v = s * (e - top).exp();
            if v != 0.0 {
                z.push(z0 + h * t);
                coef.push(v);
            }
        }
        Ok(ZNodes {
            z,
            coef,
            ln_scale: h.ln() + self.gauss_exponent(x) + top,
        })
    }

    // Uniform t-grid covering everything within TRUNCATION_DECADES of the peak of
    // -t^2 + ln|B|, located by a coarse scan bounded through the envelope
    // ln|B(v)| <= -(q - |p|)^2 for |p| < q.
    fn trapezoid_window(
        &self,
        v0: f64,
        h: f64,
        log_b: &dyn Fn(f64) -> SignedLog,
    ) -> Result<(Vec<f64>, Vec<f64>)> {
        let cut = TRUNCATION_DECADES * LN_10;
        let g = |t: f64| -t * t + log_b(t).ln_abs;
        let envelope = |t: f64| {
            let p = (self.bracket.slope * (v0 - h * t)).abs();
            let q = self.bracket.q;
            -t * t + if p < q { -(q - p) * (q - p) } else { 2f64.ln() }
        };
        let g0 = g(0.0);
        let reach = if g0.is_finite() {
            (2f64.ln() + cut + 5.0 - g0).max(1.0).sqrt() + 1.0
        } else {
            (2f64.ln() + cut + 5.0 + self.bracket.q * self.bracket.q).sqrt() + 1.0
        };
        let coarse = 0.25;
        let steps = (2.0 * reach / coarse).ceil() as usize;
        let grid: Vec<f64> = (0..=steps).map(|k| -reach + coarse * k as f64).collect();
        let peak = grid.iter().map(|&t| g(t)).fold(f64::NEG_INFINITY, f64::max);
        if peak == f64::NEG_INFINITY {
            return Ok((Vec::new(), Vec::new()));
        }
        let inside: Vec<f64> = grid
            .iter()
            .cloned()
            .filter(|&t| envelope(t) >= peak - cut - 5.0)
            .collect();
        let lo = inside.first().copied().unwrap_or(-reach) - coarse;
        let hi = inside.last().copied().unwrap_or(reach) + coarse;
        let count = ((hi - lo) / self.config.trapezoid_step).ceil() as usize + 1;
        let step = (hi - lo) / (count - 1) as f64;
        let ts: Vec<f64> = (0..count).map(|k| lo + step * k as f64).collect();
        let tail = (g(lo).max(g(hi)) - peak).exp();
        if tail > TAIL_TOLERANCE {
            return Err(Error::Truncation {
                context: "z-integral trapezoid window",
                tail,
            });
        }
        let lws = ts.iter().map(|&t| step.ln() - t * t).collect();
        Ok((ts, lws))
    }

    /// Polynomials and their `z`-transforms at `x`.
    pub fn point(&self, x: f64) -> Result<PointData> {
        let n = self.params.n;
        let own = self.poly.eval(x, n)?;
        let nodes = self.z_nodes(x)?;
        let mut phi = vec![0.0; n + 1];
        let mut psi = vec![0.0; n + 1];
        for (&z, &cf) in nodes.z.iter().zip(&nodes.coef) {
            let v = self.poly.eval(z, n)?;
            for j in 0..=n {
                phi[j] += cf * v.p[j];
                psi[j] += cf * v.q[j];
            }
        }
        Ok(PointData {
            x,
            p: own.p,
            q: own.q,
            phi,
            psi,
            ln_phi: nodes.ln_scale,
        })
    }

    pub fn points(&self, xs: &[f64]) -> Result<Vec<PointData>> {
        use rayon::prelude::*;
        xs.par_iter().map(|&x| self.point(x)).collect()
    }

    // Modified (nu = 1) or plain polynomial pair at index j.
    fn pq(&self, d: &PointData, j: usize) -> (f64, f64) {
        if self.params.nu == 1 {
            let top = d.p[self.params.n];
            (d.p[j] - top, d.q[j] + self.params.m * top)
        } else {
            (d.p[j], d.q[j])
        }
    }

    fn phipsi(&self, d: &PointData, j: usize) -> (f64, f64) {
        if self.params.nu == 1 {
            let top = d.phi[self.params.n];
            (d.phi[j] - top, d.psi[j] + self.params.m * top)
        } else {
            (d.phi[j], d.psi[j])
        }
    }

    fn nu1_separable_ln(&self) -> f64 {
        let a = self.params.a;
        -self.params.m * self.params.m / (4.0 * a * a) - (2.0 * PI.sqrt() * a).ln()
    }

    /// `D(x, y)`.
    pub fn d(&self, x: &PointData, y: &PointData) -> Result<SignedLog> {
        match self.config.path {
            KernelPath::SumOverPolynomials => Ok(self.d_sum(x, y)),
            KernelPath::ChristoffelDarboux => self.d_cd(x.x, y.x),
        }
    }

    /// `S(x, y)`.
    pub fn s(&self, x: &PointData, y: &PointData) -> Result<SignedLog> {
        match self.config.path {
            KernelPath::SumOverPolynomials => Ok(self.s_sum(x, y)),
            KernelPath::ChristoffelDarboux => self.s_cd(x.x, y.x),
        }
    }

    /// `I(x, y)`; both paths share the polynomial-sum form.
    pub fn i(&self, x: &PointData, y: &PointData) -> SignedLog {
        let n = self.params.n;
        let mut sum = 0.0;
        for j in 0..n {
            let (fx, gx) = self.phipsi(x, j);
            let (fy, gy) = self.phipsi(y, j);
            sum += fx * gy - gx * fy;
        }
        let mut out = -SignedLog::from_f64(sum).scale_exp(self.ln_k + x.ln_phi + y.ln_phi);
        if self.params.nu == 1 {
            let extra = SignedLog::from_f64(x.phi[n]).scale_exp(x.ln_phi) * weight_f(y.x, &self.params)
                - SignedLog::from_f64(y.phi[n]).scale_exp(y.ln_phi) * weight_f(x.x, &self.params);
            out = out + extra.scale_exp(self.nu1_separable_ln());
        }
        out - weight_F(x.x - y.x, &self.params)
    }

    pub fn triple(&self, x: &PointData, y: &PointData) -> Result<KernelTriple> {
        Ok(KernelTriple {
            s_xy: self.s(x, y)?,
            s_yx: self.s(y, x)?,
            d: self.d(x, y)?,
            i: self.i(x, y),
        })
    }

    fn d_sum(&self, x: &PointData, y: &PointData) -> SignedLog {
        let mut sum = 0.0;
        for j in 0..self.params.n {
            let (px, qx) = self.pq(x, j);
            let (py, qy) = self.pq(y, j);
            sum += px * qy - qx * py;
        }
        SignedLog::from_f64(sum).scale_exp(self.ln_w(x.x) + self.ln_w(y.x) + self.ln_k)
    }

    fn s_sum(&self, x: &PointData, y: &PointData) -> SignedLog {
        let n = self.params.n;
        let mut sum = 0.0;
        for j in 0..n {
            let (fx, gx) = self.phipsi(x, j);
            let (py, qy) = self.pq(y, j);
            sum += fx * qy - gx * py;
        }
        let out = SignedLog::from_f64(sum).scale_exp(self.ln_w(y.x) + self.ln_k + x.ln_phi);
        if self.params.nu == 1 {
            out + self.separable(x.x, y.x, y.p[n])
        } else {
            out
        }
    }

    // f(x) w(y) R_{N-1}(y) / s_{N-1}
    fn separable(&self, x: f64, y: f64, p_top_y: f64) -> SignedLog {
        let a2 = self.params.a * self.params.a;
        let m = self.params.m;
        SignedLog::from_f64(p_top_y)
            .scale_exp(-(y * y + 2.0 * m * x) / (4.0 * a2) + self.nu1_separable_ln())
    }

    fn cd_tables(&self, x: f64) -> CdTables {
        let n = self.params.n;
        let a = self.params.a;
        let c = self.params.c();
        let m2 = self.params.m * self.params.m;
        let mut zc = Vec::with_capacity(self.s_rule.order);
        let mut lag = Vec::with_capacity(self.s_rule.order);
        let mut table = vec![Complex64::new(0.0, 0.0); n + 1];
        for &s in &self.s_rule.nodes {
            let z = Complex64::new(x, 2.0 * a * s);
            laguerre_table(0, (z * z - m2) / (2.0 * c), &mut table);
            zc.push(z);
            lag.push(table.clone());
        }
        CdTables { zc, lag }
    }

    // sum_{r,s} w_r w_s [L_n(X_r) L_{n-1}(Y_s) - L_{n-1}(X_r) L_n(Y_s)] / (Z_y(s) + Z_x(r))
    fn cd_core(&self, tx: &CdTables, ty: &CdTables, x: f64, y: f64) -> Result<f64> {
        let n = self.params.n;
        let c = self.params.c();
        let w = &self.s_rule.weights;
        let guard = CD_GUARD * (1.0 + x.abs() + y.abs());
        let mut sum = Complex64::new(0.0, 0.0);
        let mut scale = 0.0;
        for r in 0..w.len() {
            let lx = &tx.lag[r];
            for s in 0..w.len() {
                let ly = &ty.lag[s];
                let den = ty.zc[s] + tx.zc[r];
                let term = if den.norm() < guard {
                    let direct: Complex64 = (0..n).map(|j| lx[j] * ly[j]).sum();
                    (ty.zc[s] - tx.zc[r]) * direct / (2.0 * c * n as f64)
                } else {
                    (lx[n] * ly[n - 1] - lx[n - 1] * ly[n]) / den
                };
                let wt = w[r] * w[s];
                sum += wt * term;
                scale += wt * term.norm();
            }
        }
        check_residual("Christoffel-Darboux kernel", sum.im, scale)?;
        Ok(sum.re)
    }

    fn ln_cd_prefactor(&self) -> f64 {
        let a = self.params.a;
        let c = self.params.c();
        self.params.m * self.params.m / (2.0 * c)
            + (self.params.n as f64 * c.sqrt() / (4.0 * PI * (2.0 * PI).sqrt() * a)).ln()
    }

    // (P_n(v), pi^{-1/2} int dr e^{-r^2} (v + 2iar + m) L^{(1)}_{n-1}(X_r))
    fn nu1_moments(&self, t: &CdTables) -> Result<(f64, f64)> {
        let n = self.params.n;
        let m = self.params.m;
        let mut pn = Complex64::new(0.0, 0.0);
        let mut amom = Complex64::new(0.0, 0.0);
        let (mut sp, mut sa) = (0.0, 0.0);
        for (k, &w) in self.s_rule.weights.iter().enumerate() {
            let l = &t.lag[k];
            // L^{(1)}_{n-1} = sum_{j<n} L_j
            let l1: Complex64 = l[..n].iter().sum();
            let a_term = (t.zc[k] + m) * l1;
            pn += w * l[n];
            amom += w * a_term;
            sp += w * l[n].norm();
            sa += w * a_term.norm();
        }
        check_residual("nu=1 Laguerre moment", pn.im, sp)?;
        check_residual("nu=1 Laguerre moment", amom.im, sa)?;
        Ok((pn.re / PI.sqrt(), amom.re / PI.sqrt()))
    }

    // Unweighted D^{CD}(x,y) / (w(x) w(y)) as a signed log.
    fn d_cd_unweighted(&self, tx: &CdTables, ty: &CdTables, x: f64, y: f64) -> Result<SignedLog> {
        let core = SignedLog::from_f64(self.cd_core(tx, ty, x, y)?).scale_exp(self.ln_cd_prefactor());
        if self.params.nu == 1 {
            let (pnx, ax) = self.nu1_moments(tx)?;
            let (pny, ay) = self.nu1_moments(ty)?;
            let corr = SignedLog::from_f64(pny * ax - pnx * ay).scale_exp(self.ln_k);
            Ok(core + corr)
        } else {
            Ok(core)
        }
    }

    /// `D(x, y)` via the Christoffel–Darboux double integral.
    pub fn d_cd(&self, x: f64, y: f64) -> Result<SignedLog> {
        if x == y {
            return Ok(SignedLog::ZERO);
        }
        let tx = self.cd_tables(x);
        let ty = self.cd_tables(y);
        Ok(self
            .d_cd_unweighted(&tx, &ty, x, y)?
            .scale_exp(self.ln_w(x) + self.ln_w(y)))
    }

    /// `S(x, y) = int dz F(x - z) D(z, y)` with `D` from the Christoffel–Darboux form.
    pub fn s_cd(&self, x: f64, y: f64) -> Result<SignedLog> {
        let nodes = self.z_nodes(x)?;
        let ty = self.cd_tables(y);
        let mut acc = SignedLog::ZERO;
        for (&z, &cf) in nodes.z.iter().zip(&nodes.coef) {
            let tz = self.cd_tables(z);
            acc = acc + self.d_cd_unweighted(&tz, &ty, z, y)? * cf;
        }
        let out = acc.scale_exp(nodes.ln_scale + self.ln_w(y));
        if self.params.nu == 1 {
            let (pny, _) = self.nu1_moments(&ty)?;
            Ok(out + self.separable(x, y, pny))
        } else {
            Ok(out)
        }
    }

    /// Spectral density `rho_1(x) = S(x, x)`.
    pub fn rho1(&self, x: f64) -> Result<f64> {
        let d = self.point(x)?;
        Ok(self.s(&d, &d)?.to_f64())
    }

    /// Two-point function `S(x,x) S(y,y) + I(x,y) D(x,y) - S(x,y) S(y,x)`.
    pub fn rho2_from(&self, x: &PointData, y: &PointData) -> Result<f64> {
        let sxx = self.s(x, x)?;
        let syy = self.s(y, y)?;
        let t = self.triple(x, y)?;
        Ok((sxx * syy + t.i * t.d - t.s_xy * t.s_yx).to_f64())
    }

    pub fn rho2(&self, x: f64, y: f64) -> Result<f64> {
        if x == y {
            return Ok(0.0);
        }
        let px = self.point(x)?;
        let py = self.point(y)?;
        self.rho2_from(&px, &py)
    }

    /// k-point function as the Pfaffian of the 2k x 2k kernel matrix.
    pub fn rho_k(&self, points: &[f64]) -> Result<f64> {
        let k = points.len();
        if k == 0 {
            return Err(Error::InvalidParameter("rho_k needs at least one point".into()));
        }
        for i in 0..k {
            for j in i + 1..k {
                if points[i] == points[j] {
                    return Ok(0.0);
                }
            }
        }
        let data = self.points(points)?;
        self.rho_k_from(&data)
    }

    pub fn rho_k_from(&self, data: &[PointData]) -> Result<f64> {
        use crate::pfaffian::{pfaffian, AntisymmetricMatrix};
        let k = data.len();
        // congruence by diag(e^{-e_i}, e^{e_i}) balances I against D; its determinant is 1
        let e: Vec<f64> = data.iter().map(|d| 0.5 * (d.ln_phi - self.ln_w(d.x))).collect();
        let mut entries = vec![SignedLog::ZERO; 4 * k * k];
        let dim = 2 * k;
        for i in 0..k {
            for j in 0..k {
                let (di, dj) = (&data[i], &data[j]);
                let s_ij = self.s(di, dj)?.scale_exp(-e[i] + e[j]);
                entries[(2 * i) * dim + 2 * j + 1] = s_ij;
                if j > i {
                    entries[(2 * i) * dim + 2 * j] = self.i(di, dj).scale_exp(-e[i] - e[j]);
                    entries[(2 * i + 1) * dim + 2 * j + 1] =
                        -self.d(di, dj)?.scale_exp(e[i] + e[j]);
                }
            }
        }
        for i in 0..k {
            for j in 0..k {
                // row 2i+1, column 2j holds -S(d_j, d_i)
                if 2 * i + 1 < 2 * j {
                    entries[(2 * i + 1) * dim + 2 * j] = -entries[(2 * j) * dim + 2 * i + 1];
                }
            }
        }
        let top = (0..dim)
            .flat_map(|r| (r + 1..dim).map(move |c| (r, c)))
            .map(|(r, c)| entries[r * dim + c])
            .filter(|v| !v.is_zero())
            .map(|v| v.ln_abs)
            .fold(f64::NEG_INFINITY, f64::max);
        if top == f64::NEG_INFINITY {
            return Ok(0.0);
        }
        let mat = AntisymmetricMatrix::from_fn(dim, |r, c| entries[r * dim + c].scale_exp(-top).to_f64());
        Ok(pfaffian(&mat).scale_exp(k as f64 * top).to_f64())
    }
}

#[derive(Debug, Clone)]
struct CdTables {
    zc: Vec<Complex64>,
    lag: Vec<Vec<Complex64>>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn set(n: usize, nu: usize, a: f64, m: f64, path: KernelPath) -> KernelSet {
        KernelSet::with_config(
            ModelParams::new(n, nu, a, m).unwrap(),
            KernelConfig {
                path,
                ..KernelConfig::default()
            },
        )
        .unwrap()
    }

    fn rel(a: f64, b: f64, scale: f64) -> f64 {
        (a - b).abs() / scale.max(b.abs())
    }

    #[test]
    fn paths_agree() {
        for &(nu, a, m) in &[(0, 0.3, 0.4), (0, 0.5, 0.0), (1, 0.3, 1.0), (1, 0.2, 0.4)] {
            let sum = set(3, nu, a, m, KernelPath::SumOverPolynomials);
            let cd = set(3, nu, a, m, KernelPath::ChristoffelDarboux);
            for &(x, y) in &[(0.3, -0.7), (1.1, 0.2), (-1.4, 1.9)] {
                let (px, py) = (sum.point(x).unwrap(), sum.point(y).unwrap());
                let d = (sum.d(&px, &py).unwrap().to_f64(), cd.d(&px, &py).unwrap().to_f64());
                let s = (sum.s(&px, &py).unwrap().to_f64(), cd.s(&px, &py).unwrap().to_f64());
                assert!(rel(d.0, d.1, 0.0) < 1e-6, "D {nu} {a} {m} ({x},{y}): {d:?}");
                assert!(rel(s.0, s.1, 0.0) < 1e-6, "S {nu} {a} {m} ({x},{y}): {s:?}");
            }
        }
    }

    #[test]
    fn cd_guard_is_continuous() {
        // near-cancelling denominators at x + y ~ 0 and small a
        let cd = set(4, 0, 0.05, 0.0, KernelPath::ChristoffelDarboux);
        let sum = set(4, 0, 0.05, 0.0, KernelPath::SumOverPolynomials);
        for &(x, y) in &[(0.4, -0.4), (0.4, -0.40001), (0.0, 1e-6)] {
            let (px, py) = (sum.point(x).unwrap(), sum.point(y).unwrap());
            let a = cd.d(&px, &py).unwrap().to_f64();
            let b = sum.d(&px, &py).unwrap().to_f64();
            assert!((a - b).abs() <= 1e-6 * b.abs().max(1e-12), "({x},{y}): {a} vs {b}");
        }
    }

    #[test]
    fn z_rules_agree() {
        let p = ModelParams::new(3, 0, 0.2, 1.5).unwrap();
        let mk = |z| {
            KernelSet::with_config(
                p,
                KernelConfig {
                    z_quadrature: z,
                    ..KernelConfig::default()
                },
            )
            .unwrap()
        };
        let (gh, tr) = (mk(ZQuadrature::GaussHermite), mk(ZQuadrature::Trapezoid));
        assert!(!gh.uses_trapezoid() && tr.uses_trapezoid());
        for x in [-1.9, -0.3, 0.6, 2.2] {
            let (a, b) = (gh.rho1(x).unwrap(), tr.rho1(x).unwrap());
            assert!(rel(a, b, 1e-8) < 1e-8, "x={x}: {a} vs {b}");
        }
    }

    #[test]
    fn auto_switches_on_mass_ratio() {
        assert!(!set(2, 0, 0.1, 1.9, KernelPath::SumOverPolynomials).uses_trapezoid());
        assert!(set(2, 0, 0.01, 0.4, KernelPath::SumOverPolynomials).uses_trapezoid());
    }

    #[test]
    fn rho_k_reduces_to_rho1_and_rho2() {
        for &(nu, m) in &[(0, 0.4), (1, 1.0)] {
            let ks = set(4, nu, 0.3, m, KernelPath::SumOverPolynomials);
            for x in [-0.8, 0.1, 1.3] {
                let a = ks.rho_k(&[x]).unwrap();
                let b = ks.rho1(x).unwrap();
                assert!(rel(a, b, 0.0) < 1e-12);
            }
            for &(x, y) in &[(-0.8, 0.5), (0.2, 1.7), (0.5, 0.55)] {
                let a = ks.rho_k(&[x, y]).unwrap();
                let b = ks.rho2(x, y).unwrap();
                assert!(rel(a, b, 0.0) < 1e-10, "({x},{y}): {a} vs {b}");
                assert!(a >= 0.0);
            }
            assert_eq!(ks.rho_k(&[0.3, -1.0, 0.3]).unwrap(), 0.0);
            assert_eq!(ks.rho2(0.7, 0.7).unwrap(), 0.0);
            assert!(ks.rho_k(&[]).is_err());
        }
    }

    #[test]
    fn rho3_is_nonnegative_and_symmetric() {
        let ks = set(3, 0, 0.3, 0.4, KernelPath::SumOverPolynomials);
        let a = ks.rho_k(&[-0.9, 0.2, 1.1]).unwrap();
        let b = ks.rho_k(&[1.1, -0.9, 0.2]).unwrap();
        assert!(a > 0.0);
        assert!(rel(a, b, 0.0) < 1e-10);
    }

    #[test]
    fn density_symmetric_without_index() {
        let ks = set(4, 0, 0.3, 0.4, KernelPath::SumOverPolynomials);
        for x in [0.2, 0.9, 1.7, 3.0] {
            let (a, b) = (ks.rho1(x).unwrap(), ks.rho1(-x).unwrap());
            assert!(rel(a, b, 1e-12) < 1e-9, "x={x}: {a} vs {b}");
        }
    }

    #[test]
    fn rejects_unsupported_index() {
        assert!(KernelSet::new(ModelParams::new(2, 2, 0.3, 0.1).unwrap()).is_err());
        assert!(KernelSet::new(ModelParams::new(DEGREE_CAP + 1, 0, 0.3, 0.1).unwrap()).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn d_and_i_antisymmetric(x in -2.5f64..2.5, y in -2.5f64..2.5, nu in 0usize..2, m in 0.0f64..1.0) {
            let ks = set(3, nu, 0.3, m, KernelPath::SumOverPolynomials);
            let (px, py) = (ks.point(x).unwrap(), ks.point(y).unwrap());
            let d = (ks.d(&px, &py).unwrap(), ks.d(&py, &px).unwrap());
            let i = (ks.i(&px, &py), ks.i(&py, &px));
            let dscale = d.0.abs().to_f64().max(1e-300);
            let iscale = i.0.abs().to_f64().max(1e-300);
            prop_assert!((d.0 + d.1).abs().to_f64() <= 1e-10 * dscale);
            prop_assert!((i.0 + i.1).abs().to_f64() <= 1e-10 * iscale);
            prop_assert!(ks.i(&px, &px).to_f64().abs() <= 1e-10 * iscale.max(1.0));
        }
    }
}
