//! Pfaffians of real antisymmetric matrices by Parlett–Reid elimination.

use crate::error::{Error, Result};
use crate::logdomain::SignedLog;

/// Pivots below this fraction of the largest entry are treated as structural zeros.
pub const PIVOT_ZERO_TOL: f64 = 1e-13;

/// Dense real antisymmetric matrix; only the strict upper triangle is stored.
#[derive(Debug, Clone, PartialEq)]
pub struct AntisymmetricMatrix {
    dim: usize,
    upper: Vec<f64>,
}

impl AntisymmetricMatrix {
    pub fn zeros(dim: usize) -> Self {
        AntisymmetricMatrix {
            dim,
            upper: vec![0.0; dim * dim.saturating_sub(1) / 2],
        }
    }

    /// Builds from a closure giving the `(i, j)` entry for `i < j`.
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in i + 1..dim {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    /// Reads the strict upper triangle of a row-major dense matrix.
    pub fn from_dense(dim: usize, dense: &[f64]) -> Result<Self> {
        if dense.len() != dim * dim {
            return Err(Error::Dimension(format!(
                "{} entries for a {dim}x{dim} matrix",
                dense.len()
            )));
        }
        Ok(Self::from_fn(dim, |i, j| dense[i * dim + j]))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn index(&self, i: usize, j: usize) -> usize {
        // row i of the strict upper triangle starts after sum_{k<i} (dim-1-k) entries
        i * (2 * self.dim - i - 1) / 2 + (j - i - 1)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        match i.cmp(&j) {
            std::cmp::Ordering::Less => self.upper[self.index(i, j)],
            std::cmp::Ordering::Greater => -self.upper[self.index(j, i)],
            std::cmp::Ordering::Equal => 0.0,
        }
    }

    /// Sets `A[i][j] = v` and `A[j][i] = -v`; `i != j`.
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        assert!(i != j, "diagonal of an antisymmetric matrix is fixed at zero");
        if i < j {
            let k = self.index(i, j);
            self.upper[k] = v;
        } else {
            let k = self.index(j, i);
            self.upper[k] = -v;
        }
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let n = self.dim;
        let mut d = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                d[i * n + j] = self.get(i, j);
            }
        }
        d
    }

    pub fn max_abs(&self) -> f64 {
        self.upper.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Pfaffian as a sign / log-magnitude pair; odd dimension gives exactly zero.
pub fn pfaffian(a: &AntisymmetricMatrix) -> SignedLog {
    let n = a.dim();
    if n == 0 {
        return SignedLog::ONE;
    }
    if n % 2 == 1 {
        return SignedLog::ZERO;
    }
    let mut m = a.to_dense();
    let threshold = PIVOT_ZERO_TOL * a.max_abs();
    if a.max_abs() == 0.0 {
        return SignedLog::ZERO;
    }
    let mut sign: i8 = 1;
    let mut ln_abs = 0.0;
    let mut k = 0;
    while k + 1 < n {
        // bring the largest entry of row k (right of the diagonal) to column k+1
        let (piv, pmax) = (k + 1..n)
            .map(|j| (j, m[k * n + j].abs()))
            .fold((k + 1, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if pmax <= threshold {
            return SignedLog::ZERO;
        }
        if piv != k + 1 {
            swap_index(&mut m, n, k + 1, piv);
            sign = -sign;
        }
        let pivot = m[k * n + k + 1];
        if pivot < 0.0 {
            sign = -sign;
        }
        ln_abs += pivot.abs().ln();
        // eliminate: A'[i][j] = A[i][j] - tau_j A[i][k+1] + tau_i A[j][k+1], i, j >= k+2
        if k + 2 < n {
            let tau: Vec<f64> = (k + 2..n).map(|j| m[k * n + j] / pivot).collect();
            for i in k + 2..n {
                let ti = tau[i - k - 2];
                let aik1 = m[i * n + k + 1];
                for j in i + 1..n {
                    let tj = tau[j - k - 2];
                    let v = m[i * n + j] - tj * aik1 + ti * m[j * n + k + 1];
                    m[i * n + j] = v;
                    m[j * n + i] = -v;
                }
            }
        }
        k += 2;
    }
    SignedLog::new(sign, ln_abs)
}

fn swap_index(m: &mut [f64], n: usize, p: usize, q: usize) {
    for c in 0..n {
        m.swap(p * n + c, q * n + c);
    }
    for r in 0..n {
        m.swap(r * n + p, r * n + q);
    }
}

/// Pfaffian of `[[F, B], [-B^T, 0]]` with `F` of size `d` and border `B` of size `d x nu`.
///
/// `border` is row-major (`d` rows, `nu` columns).
pub fn pfaffian_bordered(
    f_block: &AntisymmetricMatrix,
    border: &[f64],
    nu: usize,
) -> Result<SignedLog> {
    let d = f_block.dim();
    if border.len() != d * nu {
        return Err(Error::Dimension(format!(
            "border has {} entries, expected {d}x{nu}",
            border.len()
        )));
    }
    if (d + nu) % 2 == 1 {
        return Err(Error::Dimension(format!(
            "bordered Pfaffian of odd total dimension {}",
            d + nu
        )));
    }
    let full = AntisymmetricMatrix::from_fn(d + nu, |i, j| {
        if j < d {
            f_block.get(i, j)
        } else if i < d {
            border[i * nu + (j - d)]
        } else {
            0.0
        }
    });
    Ok(pfaffian(&full))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(dim: usize, seed: u64) -> AntisymmetricMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        AntisymmetricMatrix::from_fn(dim, |_, _| rng.gen_range(-1.0..1.0))
    }

    // Independent oracle: log|det| and sign by LU with partial pivoting.
    fn det_lu(dim: usize, mut a: Vec<f64>) -> SignedLog {
        let mut sign = 1i8;
        let mut ln = 0.0;
        for k in 0..dim {
            let p = (k..dim)
                .max_by(|&i, &j| a[i * dim + k].abs().total_cmp(&a[j * dim + k].abs()))
                .unwrap();
            if a[p * dim + k] == 0.0 {
                return SignedLog::ZERO;
            }
            if p != k {
                for c in 0..dim {
                    a.swap(p * dim + c, k * dim + c);
                }
                sign = -sign;
            }
            let piv = a[k * dim + k];
            if piv < 0.0 {
                sign = -sign;
            }
            ln += piv.abs().ln();
            for i in k + 1..dim {
                let f = a[i * dim + k] / piv;
                for c in k..dim {
                    a[i * dim + c] -= f * a[k * dim + c];
                }
            }
        }
        SignedLog::new(sign, ln)
    }

    #[test]
    fn small_closed_forms() {
        let a = AntisymmetricMatrix::from_fn(2, |_, _| 2.5);
        assert!((pfaffian(&a).to_f64() - 2.5).abs() < 1e-15);
        let v = [[0.0, 1.0, 2.0, 3.0], [0.0, 0.0, 4.0, 5.0], [0.0, 0.0, 0.0, 6.0]];
        let a = AntisymmetricMatrix::from_fn(4, |i, j| v[i][j]);
        let expect = 1.0 * 6.0 - 2.0 * 5.0 + 3.0 * 4.0;
        assert!((pfaffian(&a).to_f64() - expect).abs() < 1e-14);
        assert_eq!(pfaffian(&AntisymmetricMatrix::zeros(3)), SignedLog::ZERO);
        assert_eq!(pfaffian(&AntisymmetricMatrix::zeros(4)), SignedLog::ZERO);
    }

    #[test]
    fn square_is_determinant() {
        for dim in (2..=64).step_by(2) {
            let a = random(dim, dim as u64);
            let pf = pfaffian(&a);
            let det = det_lu(dim, a.to_dense());
            assert_eq!(det.sign, 1);
            assert!((2.0 * pf.ln_abs - det.ln_abs).abs() < 1e-10 * det.ln_abs.abs().max(1.0));
        }
    }

    #[test]
    fn bordered_consistency() {
        let f = random(5, 11);
        let border: Vec<f64> = (0..5).map(|i| 0.3 * i as f64 - 0.4).collect();
        let direct = AntisymmetricMatrix::from_fn(6, |i, j| if j < 5 { f.get(i, j) } else { border[i] });
        let b = pfaffian_bordered(&f, &border, 1).unwrap();
        assert!((b.to_f64() - pfaffian(&direct).to_f64()).abs() < 1e-14);
        let g = random(4, 3);
        assert_eq!(pfaffian_bordered(&g, &[], 0).unwrap(), pfaffian(&g));
        assert!(pfaffian_bordered(&g, &[1.0; 4], 1).is_err());
        let dup: Vec<f64> = (0..8).map(|k| (k / 2) as f64 + 0.5).collect();
        assert!(pfaffian_bordered(&g, &dup, 2).unwrap().is_zero());
    }

    proptest! {
        #[test]
        fn swap_flips_sign(seed in 0u64..500, dim in 1usize..6, p in 0usize..12, q in 0usize..12) {
            let dim = 2 * dim;
            let (p, q) = (p % dim, q % dim);
            prop_assume!(p != q);
            let a = random(dim, seed);
            let mut d = a.to_dense();
            swap_index(&mut d, dim, p, q);
            let b = AntisymmetricMatrix::from_dense(dim, &d).unwrap();
            let (x, y) = (pfaffian(&a).to_f64(), pfaffian(&b).to_f64());
            prop_assert!((x + y).abs() < 1e-12 * x.abs().max(1e-12));
        }

        #[test]
        fn scaling_one_index(seed in 0u64..500, dim in 1usize..6, i in 0usize..12, lambda in -3.0f64..3.0) {
            let dim = 2 * dim;
            let i = i % dim;
            let a = random(dim, seed);
            let b = AntisymmetricMatrix::from_fn(dim, |r, c| {
                let s = if r == i || c == i { lambda } else { 1.0 };
                s * a.get(r, c)
            });
            let (x, y) = (pfaffian(&a).to_f64(), pfaffian(&b).to_f64());
            prop_assert!((lambda * x - y).abs() < 1e-12 * x.abs().max(1e-12));
        }
    }
}
