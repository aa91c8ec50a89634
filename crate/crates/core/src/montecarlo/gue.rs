use crate::error::{Error, Result};
use crate::kernels::{CurveMeta, DensityCurve, Grid};
use std::f64::consts::PI;

/// Eigenvalue density of the `dim x dim` GUE with `E[H_ii^2] = E|H_ij|^2 = variance`,
/// from the Hermite-function kernel `sum_{k<dim} psi_k^2`. Integrates to `dim`.
pub fn gue_density(x: f64, dim: usize, variance: f64) -> f64 {
    // weight exp(-x^2 / 2 variance) = exp(-t^2) with x = s t
    let s = (2.0 * variance).sqrt();
    let t = x / s;
    let mut prev = 0.0;
    let mut cur = PI.powf(-0.25) * (-0.5 * t * t).exp();
    let mut sum = 0.0;
    for k in 0..dim {
        sum += cur * cur;
        let kf = k as f64;
        let next = (2.0 / (kf + 1.0)).sqrt() * t * cur - (kf / (kf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
    }
    sum / s
}

pub fn gue_density_curve(grid: &Grid, dim: usize, variance: f64) -> Result<DensityCurve> {
    if dim == 0 || !(variance > 0.0 && variance.is_finite()) {
        return Err(Error::InvalidParameter("need dim >= 1 and variance > 0".into()));
    }
    let xs = grid.abscissae();
    let values = xs.iter().map(|&x| gue_density(x, dim, variance)).collect();
    let meta = CurveMeta::new("gue", serde_json::json!({ "dim": dim, "variance": variance }));
    Ok(DensityCurve::new(xs, values, meta))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_by_one_is_gaussian() {
        for &x in &[-2.0, 0.0, 0.7, 3.1] {
            let v: f64 = 1.7;
            let g = (-x * x / (2.0 * v)).exp() / (2.0 * PI * v).sqrt();
            assert!((gue_density(x, 1, v) - g).abs() < 1e-15);
        }
    }

    #[test]
    fn normalized_and_second_moment() {
        // E tr H^2 = dim^2 variance
        let (dim, v) = (5, 0.8);
        let h = 0.01;
        let (mut m0, mut m2) = (0.0, 0.0);
        for k in -1500..=1500 {
            let x = h * k as f64;
            let r = gue_density(x, dim, v);
            m0 += h * r;
            m2 += h * x * x * r;
        }
        assert!((m0 - dim as f64).abs() < 1e-10);
        assert!((m2 - (dim * dim) as f64 * v).abs() < 1e-9);
    }
}
