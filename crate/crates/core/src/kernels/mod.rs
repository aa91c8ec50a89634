//! Weights, finite-n kernels and Pfaffian correlators.
//!
//! The free functions build a [`KernelSet`] per call and are meant for
//! one-off evaluations; loops over a grid should hold on to a `KernelSet`
//! and reuse [`PointData`].

mod chgue;
mod curve;
mod finite;
mod weights;

pub use chgue::{chgue_density_finite, shift_map, shifted_chgue_density};
pub use curve::{CurveMeta, DensityCurve, Grid};
pub use finite::{
    KernelConfig, KernelPath, KernelSet, KernelTriple, PointData, ZQuadrature, CD_GUARD,
    TAIL_TOLERANCE, TRAPEZOID_SWITCH_RATIO, TRUNCATION_DECADES,
};
#[allow(non_snake_case)]
pub use weights::{weight_F, weight_f, weight_w};
pub(crate) use weights::bracket_pq;

use crate::error::Result;
use crate::params::ModelParams;

fn nu0(p: &ModelParams) -> Result<()> {
    p.require_nu(&[0])
}

fn with_path(p: &ModelParams, path: KernelPath) -> Result<KernelSet> {
    KernelSet::with_config(
        *p,
        KernelConfig {
            path,
            ..KernelConfig::default()
        },
    )
}

/// `D_n(x, y)` at `nu = 0` from the Christoffel–Darboux double integral.
#[allow(non_snake_case)]
pub fn kernel_D(x: f64, y: f64, p: &ModelParams) -> Result<f64> {
    nu0(p)?;
    Ok(with_path(p, KernelPath::ChristoffelDarboux)?.d_cd(x, y)?.to_f64())
}

/// `S_n(x, y)` at `nu = 0`.
#[allow(non_snake_case)]
pub fn kernel_S(x: f64, y: f64, p: &ModelParams) -> Result<f64> {
    nu0(p)?;
    let ks = KernelSet::new(*p)?;
    Ok(ks.s(&ks.point(x)?, &ks.point(y)?)?.to_f64())
}

/// `I_n(x, y)` at `nu = 0`.
#[allow(non_snake_case)]
pub fn kernel_I(x: f64, y: f64, p: &ModelParams) -> Result<f64> {
    nu0(p)?;
    let ks = KernelSet::new(*p)?;
    Ok(ks.i(&ks.point(x)?, &ks.point(y)?).to_f64())
}

/// `(S, D, I)` at `nu = 1`, with `S` and `D` from the reduced forms.
pub fn kernels_nu1(x: f64, y: f64, p: &ModelParams) -> Result<(f64, f64, f64)> {
    p.require_nu(&[1])?;
    let ks = with_path(p, KernelPath::ChristoffelDarboux)?;
    let (px, py) = (ks.point(x)?, ks.point(y)?);
    Ok((
        ks.s(&px, &py)?.to_f64(),
        ks.d(&px, &py)?.to_f64(),
        ks.i(&px, &py).to_f64(),
    ))
}

/// Spectral density `rho_1(x)`.
pub fn rho1(x: f64, p: &ModelParams) -> Result<f64> {
    KernelSet::new(*p)?.rho1(x)
}

/// Two-point correlation function `rho_2(x, y)`.
pub fn rho2(x: f64, y: f64, p: &ModelParams) -> Result<f64> {
    KernelSet::new(*p)?.rho2(x, y)
}

/// k-point correlation function as a Pfaffian.
pub fn rho_k(points: &[f64], p: &ModelParams) -> Result<f64> {
    KernelSet::new(*p)?.rho_k(points)
}

/// `rho_1` over a grid, evaluated in parallel.
pub fn density_curve(p: &ModelParams, grid: &Grid) -> Result<DensityCurve> {
    use rayon::prelude::*;
    let ks = KernelSet::new(*p)?;
    let xs = grid.abscissae();
    let values = xs
        .par_iter()
        .map(|&x| ks.rho1(x))
        .collect::<Result<Vec<_>>>()?;
    Ok(DensityCurve::new(
        xs,
        values,
        CurveMeta::new("rho1", serde_json::to_value(p).unwrap_or_default()),
    ))
}
