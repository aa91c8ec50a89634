//! One-point density straight from the joint eigenvalue distribution
//! `prod w(d_j) Delta(d) Pf[[F(d_j - d_i), A], [-A^T, 0]]`, `A_bq = d_b^q e^{-d_b m / 2a^2}`,
//! integrated by brute force over the remaining eigenvalues. Only practical for
//! tiny `N`; it is the sole density available for index 2.

use crate::error::{Error, Result};
use crate::kernels::{weight_F, CurveMeta, DensityCurve, Grid};
use crate::logdomain::SignedLog;
use crate::params::ModelParams;
use crate::pfaffian::{pfaffian_bordered, AntisymmetricMatrix};
use rayon::prelude::*;

/// Largest accepted number of integrand evaluations.
pub const JPDF_EVALUATION_BUDGET: u64 = 200_000_000;

/// Trapezoid nodes per characteristic length of the integrand.
pub const STEPS_PER_SCALE: f64 = 4.0;

/// Quadrature settings: trapezoid rule with `step` on `[-half_width, half_width]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JpdfQuadrature {
    pub step: f64,
    pub half_width: f64,
}

impl JpdfQuadrature {
    /// The window covers `m` plus six root-mean-square eigenvalues; the step resolves
    /// both that scale and the width `a sqrt(8 / c)` of the erf bracket in `F`.
    pub fn for_params(p: &ModelParams) -> Self {
        let dim = p.dim() as f64;
        let second = p.m * p.m + 4.0 * (p.n * (p.n + p.nu)) as f64 * p.c() / dim + 2.0 * p.a * p.a * dim;
        let rms = second.sqrt();
        JpdfQuadrature {
            step: rms.min(p.a * (8.0 / p.c()).sqrt()) / STEPS_PER_SCALE,
            half_width: p.m + 6.0 * rms,
        }
    }

    fn nodes(&self) -> Vec<f64> {
        let k = (self.half_width / self.step).ceil() as i64;
        (-k..=k).map(|j| j as f64 * self.step).collect()
    }
}

#[derive(Clone)]
struct Tables {
    p: ModelParams,
    /// Node abscissae, with the free argument appended at the end.
    d: Vec<f64>,
    ln_w: Vec<f64>,
    /// `F(d_j - d_i)`, row-major over all abscissae.
    f: Vec<SignedLog>,
}

impl Tables {
    fn new(p: &ModelParams, nodes: &[f64]) -> Self {
        let mut d = nodes.to_vec();
        d.push(0.0);
        let size = d.len();
        let mut t = Tables {
            p: *p,
            ln_w: d.iter().map(|&x| -x * x / (4.0 * p.a * p.a)).collect(),
            f: vec![SignedLog::ZERO; size * size],
            d,
        };
        for i in 0..size - 1 {
            for j in 0..size - 1 {
                t.f[i * size + j] = weight_F(t.d[j] - t.d[i], p);
            }
        }
        t
    }

    fn free(&self) -> usize {
        self.d.len() - 1
    }

    fn set_free(&mut self, x: f64) {
        let size = self.d.len();
        let k = size - 1;
        self.d[k] = x;
        self.ln_w[k] = -x * x / (4.0 * self.p.a * self.p.a);
        for i in 0..size {
            let v = weight_F(self.d[i] - x, &self.p);
            self.f[k * size + i] = v;
            self.f[i * size + k] = -v;
        }
    }

    /// Unnormalized jpdf at the abscissae `idx`.
    fn jpdf(&self, idx: &[usize]) -> Result<SignedLog> {
        let size = self.d.len();
        let dim = idx.len();
        let nu = self.p.nu;
        let mut delta = 1.0;
        let mut ln_w = 0.0;
        for (i, &a) in idx.iter().enumerate() {
            ln_w += self.ln_w[a];
            for &b in &idx[i + 1..] {
                delta *= self.d[b] - self.d[a];
            }
        }
        if delta == 0.0 {
            return Ok(SignedLog::ZERO);
        }
        let mut f_shift = f64::NEG_INFINITY;
        for (i, &a) in idx.iter().enumerate() {
            for &b in &idx[i + 1..] {
                f_shift = f_shift.max(self.f[a * size + b].ln_abs);
            }
        }
        if !f_shift.is_finite() {
            f_shift = 0.0;
        }
        let f_block = AntisymmetricMatrix::from_fn(dim, |i, j| self.f[idx[i] * size + idx[j]].scale_exp(-f_shift).to_f64());
        let mut border = Vec::with_capacity(dim * nu);
        let mut a_shift = f64::NEG_INFINITY;
        let mass = self.p.m / (2.0 * self.p.a * self.p.a);
        for &b in idx {
            let x = self.d[b];
            for q in 0..nu {
                let v = SignedLog::from_f64(x).powi(q as i32).scale_exp(-x * mass);
                a_shift = a_shift.max(v.ln_abs);
                border.push(v);
            }
        }
        if !a_shift.is_finite() {
            a_shift = 0.0;
        }
        let border: Vec<f64> = border.iter().map(|v| v.scale_exp(-a_shift).to_f64()).collect();
        // each term of the Pfaffian has (dim - nu) / 2 entries of F and nu of A
        let pf = pfaffian_bordered(&f_block, &border, nu)?;
        let scale = f_shift * ((dim - nu) / 2) as f64 + a_shift * nu as f64 + ln_w;
        Ok((pf * SignedLog::from_f64(delta)).scale_exp(scale))
    }
}

/// Calls `visit` with every strictly increasing `k`-subset of `0..len`.
fn for_each_subset(len: usize, k: usize, mut visit: impl FnMut(&[usize]) -> Result<()>) -> Result<()> {
    if k > len {
        return Ok(());
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        visit(&idx)?;
        let mut i = k;
        loop {
            if i == 0 {
                return Ok(());
            }
            i -= 1;
            if idx[i] < len - k + i {
                break;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

fn binomial(n: u64, k: u64) -> u64 {
    (0..k).fold(1u64, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

/// Density at each of `xs`, self-normalized to `N`.
pub fn jpdf_density(xs: &[f64], p: &ModelParams, quad: JpdfQuadrature) -> Result<Vec<f64>> {
    p.validate()?;
    if p.n != 1 {
        return Err(Error::InvalidParameter("the direct jpdf integral needs n = 1".into()));
    }
    if !(quad.step > 0.0 && quad.half_width > quad.step) {
        return Err(Error::InvalidParameter("bad jpdf quadrature".into()));
    }
    let nodes = quad.nodes();
    let dim = p.dim();
    let len = nodes.len() as u64;
    let cost = binomial(len, dim as u64) + xs.len() as u64 * binomial(len, dim as u64 - 1);
    if cost > JPDF_EVALUATION_BUDGET {
        return Err(Error::Budget(format!("{cost} jpdf evaluations")));
    }
    let base = Tables::new(p, &nodes);
    let m = base.free();
    let h = quad.step;

    // Normalization over the node grid; each N-subset is visited once, all N! orderings
    // carry the same value.
    let mut z = SignedLog::ZERO;
    for_each_subset(m, dim, |idx| {
        z = z + base.jpdf(idx)?;
        Ok(())
    })?;
    let orderings = (1..=dim).product::<usize>() as f64;
    let z = z * (orderings * h.powi(dim as i32));
    if z.is_zero() {
        return Err(Error::Discrepancy {
            context: "jpdf normalization",
            discrepancy: 0.0,
        });
    }

    xs.par_iter()
        .map_with(base.clone(), |t, &x| {
            t.set_free(x);
            let mut g = SignedLog::ZERO;
            let mut idx = vec![m; dim];
            for_each_subset(m, dim - 1, |rest| {
                idx[1..].copy_from_slice(rest);
                g = g + t.jpdf(&idx)?;
                Ok(())
            })?;
            let g = g * ((orderings / dim as f64) * h.powi(dim as i32 - 1));
            Ok((g / z).to_f64() * dim as f64)
        })
        .collect()
}

/// [`jpdf_density`] on a grid with the default quadrature.
pub fn jpdf_density_smalln(p: &ModelParams, grid: &Grid) -> Result<DensityCurve> {
    let quad = JpdfQuadrature::for_params(p);
    let xs = grid.abscissae();
    let values = jpdf_density(&xs, p, quad)?;
    let mut meta = CurveMeta::new("jpdf_rho1", serde_json::to_value(p).unwrap_or_default());
    meta.extra = Some(serde_json::json!({ "step": quad.step, "half_width": quad.half_width }));
    Ok(DensityCurve::new(xs, values, meta))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subsets_enumerated_once() {
        let mut seen = Vec::new();
        for_each_subset(5, 3, |s| {
            seen.push(s.to_vec());
            Ok(())
        })
        .unwrap();
        assert_eq!(seen.len(), 10);
        assert!(seen.iter().all(|s| s.windows(2).all(|w| w[0] < w[1])));
        assert_eq!(binomial(101, 3), 166_650);
    }

    #[test]
    fn rejects_larger_n() {
        let p = ModelParams::new(2, 0, 0.3, 0.2).unwrap();
        let g = Grid::new(-1.0, 1.0, 3).unwrap();
        assert!(jpdf_density_smalln(&p, &g).is_err());
    }
}
