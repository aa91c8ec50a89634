use crate::error::{Error, Result};
use crate::linalg::tridiagonal_eigen;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, Mutex, OnceLock};

pub const DEFAULT_HERMITE_ORDER: usize = 128;
pub const DEFAULT_LEGENDRE_ORDER: usize = 64;
/// Largest Hermite order whose outermost weights are still normal doubles.
pub const HERMITE_ORDER_CAP: usize = 340;
pub const LEGENDRE_ORDER_CAP: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum QuadratureKind {
    /// Weight `exp(-x^2)` on the real line.
    GaussHermite,
    /// Unit weight on `[-1, 1]`.
    GaussLegendre,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub kind: QuadratureKind,
    pub order: usize,
}

impl QuadratureRule {
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    /// Legendre nodes and weights mapped affinely onto `[lo, hi]`.
    pub fn mapped(&self, lo: f64, hi: f64) -> Vec<(f64, f64)> {
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| (mid + half * x, half * w))
            .collect()
    }
}

pub fn gauss_rule(kind: QuadratureKind, order: usize) -> Result<QuadratureRule> {
    if order == 0 {
        return Err(Error::InvalidParameter("quadrature order must be >= 1".into()));
    }
    let cap = match kind {
        QuadratureKind::GaussHermite => HERMITE_ORDER_CAP,
        QuadratureKind::GaussLegendre => LEGENDRE_ORDER_CAP,
    };
    if order > cap {
        return Err(Error::QuadratureOrderCap { order, cap });
    }
    let (nodes, weights) = match kind {
        QuadratureKind::GaussHermite => hermite(order),
        QuadratureKind::GaussLegendre => legendre(order),
    };
    Ok(QuadratureRule {
        nodes,
        weights,
        kind,
        order,
    })
}

/// Shared, lazily built rule; construction happens once per `(kind, order)`.
pub fn cached_rule(kind: QuadratureKind, order: usize) -> Result<Arc<QuadratureRule>> {
    static CACHE: OnceLock<Mutex<HashMap<(QuadratureKind, usize), Arc<QuadratureRule>>>> =
        OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(r) = cache.lock().expect("rule cache poisoned").get(&(kind, order)) {
        return Ok(Arc::clone(r));
    }
    let rule = Arc::new(gauss_rule(kind, order)?);
    cache
        .lock()
        .expect("rule cache poisoned")
        .insert((kind, order), Arc::clone(&rule));
    Ok(rule)
}

// Jacobi-matrix eigenvalues seed the nodes; Newton on the orthonormal recurrence
// polishes them and supplies the weights.
fn hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    let pim4 = PI.powf(-0.25);
    let nf = n as f64;
    let off: Vec<f64> = (1..n).map(|k| (k as f64 / 2.0).sqrt()).collect();
    let (mut x, _) = tridiagonal_eigen(&vec![0.0; n], &off, false)
        .expect("Hermite Jacobi matrix eigenvalues");
    let mut w = vec![0.0; n];
    for i in n / 2..n {
        let mut z = x[i];
        for _ in 0..8 {
            let (p1, p2) = hermite_pair(n, z, pim4);
            let dz = p1 / ((2.0 * nf).sqrt() * p2);
            z -= dz;
            if dz.abs() <= 4.0 * f64::EPSILON * z.abs().max(1.0) {
                break;
            }
        }
        let (_, p2) = hermite_pair(n, z, pim4);
        let pp = (2.0 * nf).sqrt() * p2;
        x[i] = z;
        w[i] = 2.0 / (pp * pp);
        x[n - 1 - i] = -z;
        w[n - 1 - i] = w[i];
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

// Returns (psi_n(z), psi_{n-1}(z)) for the orthonormal Hermite family without Gaussian factor.
fn hermite_pair(n: usize, z: f64, pim4: f64) -> (f64, f64) {
    let mut p1 = pim4;
    let mut p2 = 0.0;
    for j in 0..n {
        let p3 = p2;
        p2 = p1;
        let jf = (j + 1) as f64;
        p1 = z * (2.0 / jf).sqrt() * p2 - ((jf - 1.0) / jf).sqrt() * p3;
    }
    (p1, p2)
}

fn legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let nf = n as f64;
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut pp = 0.0;
        for _ in 0..100 {
            let mut p1 = 1.0;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = ((2.0 * jf + 1.0) * z * p2 - jf * p3) / (jf + 1.0);
            }
            pp = nf * (z * p1 - p2) / (z * z - 1.0);
            let dz = p1 / pp;
            z -= dz;
            if dz.abs() <= 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
        w[n - 1 - i] = w[i];
    }
    if n % 2 == 1 {
        x[m - 1] = 0.0;
    }
    (x, w)
}
