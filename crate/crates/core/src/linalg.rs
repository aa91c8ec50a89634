//! Dense Hermitian eigensolver: Householder reduction to tridiagonal form
//! followed by implicit-shift QL.

use crate::error::{Error, Result};
use num_complex::Complex64;

const MAX_QL_ITERATIONS: usize = 60;

/// Eigenvalues (ascending) and optionally eigenvectors of a symmetric tridiagonal matrix.
///
/// `diag` has length n, `off[i]` couples `i` and `i+1` (length n-1).
/// Eigenvector `k` is column `k` of the returned row-major n×n matrix.
pub fn tridiagonal_eigen(
    diag: &[f64],
    off: &[f64],
    vectors: bool,
) -> Result<(Vec<f64>, Option<Vec<f64>>)> {
    let n = diag.len();
    if n == 0 {
        return Ok((Vec::new(), vectors.then(Vec::new)));
    }
    if off.len() + 1 != n {
        return Err(Error::Dimension(format!(
            "tridiagonal: diag {} off {}",
            n,
            off.len()
        )));
    }
    let mut d = diag.to_vec();
    let mut e = vec![0.0; n];
    e[..n - 1].copy_from_slice(off);
    let mut z = if vectors {
        let mut z = vec![0.0; n * n];
        for i in 0..n {
            z[i * n + i] = 1.0;
        }
        Some(z)
    } else {
        None
    };
    ql_implicit(&mut d, &mut e, z.as_deref_mut())?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].total_cmp(&d[j]));
    let values = order.iter().map(|&i| d[i]).collect();
    let z = z.map(|z| {
        let mut sorted = vec![0.0; n * n];
        for (col, &src) in order.iter().enumerate() {
            for row in 0..n {
                sorted[row * n + col] = z[row * n + src];
            }
        }
        sorted
    });
    Ok((values, z))
}

// Implicit QL with Wilkinson-type shifts; e[n-1] is scratch.
fn ql_implicit(d: &mut [f64], e: &mut [f64], mut z: Option<&mut [f64]>) -> Result<()> {
    let n = d.len();
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > MAX_QL_ITERATIONS {
                return Err(Error::EigenNonConvergence {
                    iterations: MAX_QL_ITERATIONS,
                });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let mut s = 1.0;
            let mut c = 1.0;
            let mut p = 0.0;
            let mut i = m;
            let mut deflated = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if let Some(z) = z.as_deref_mut() {
                    for k in 0..n {
                        let zk1 = z[k * n + i + 1];
                        let zk = z[k * n + i];
                        z[k * n + i + 1] = s * zk + c * zk1;
                        z[k * n + i] = c * zk - s * zk1;
                    }
                }
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

/// Result of a Hermitian eigen-decomposition; vectors stored column-wise, row-major.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: Option<Vec<Complex64>>,
}

/// Eigen-decomposition of a dense Hermitian matrix given in row-major order.
///
/// Only the lower triangle is read.
pub fn hermitian_eigen(a: &[Complex64], n: usize, vectors: bool) -> Result<HermitianEigen> {
    if a.len() != n * n {
        return Err(Error::Dimension(format!("hermitian: {} entries for n={n}", a.len())));
    }
    let mut h = a.to_vec();
    for i in 0..n {
        h[i * n + i].im = 0.0;
        for j in 0..i {
            h[j * n + i] = h[i * n + j].conj();
        }
    }
    let mut q = if vectors {
        let mut q = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            q[i * n + i] = Complex64::new(1.0, 0.0);
        }
        Some(q)
    } else {
        None
    };

    let zero = Complex64::new(0.0, 0.0);
    let mut v = vec![zero; n];
    let mut p = vec![zero; n];
    for k in 0..n.saturating_sub(2) {
        let x0 = h[(k + 1) * n + k];
        let norm2: f64 = (k + 1..n).map(|i| h[i * n + k].norm_sqr()).sum();
        let tail2 = norm2 - x0.norm_sqr();
        if tail2 <= f64::MIN_POSITIVE * (1.0 + norm2) {
            continue;
        }
        let xn = norm2.sqrt();
        let phase = if x0.norm() > 0.0 { x0 / x0.norm() } else { Complex64::new(1.0, 0.0) };
        let alpha = -phase * xn;
        for i in 0..n {
            v[i] = if i <= k { zero } else { h[i * n + k] };
        }
        v[k + 1] -= alpha;
        let vv: f64 = v[k + 1..].iter().map(|c| c.norm_sqr()).sum();
        let tau = 2.0 / vv;
        // p = tau A v, restricted to the trailing block
        for i in k + 1..n {
            let mut s = zero;
            for j in k + 1..n {
                s += h[i * n + j] * v[j];
            }
            p[i] = tau * s;
        }
        let kappa: Complex64 = (k + 1..n).map(|i| v[i].conj() * p[i]).sum();
        let kk = 0.5 * tau * kappa.re;
        for i in k + 1..n {
            p[i] -= kk * v[i];
        }
        for i in k + 1..n {
            for j in k + 1..n {
                h[i * n + j] -= v[i] * p[j].conj() + p[i] * v[j].conj();
            }
        }
        h[(k + 1) * n + k] = alpha;
        h[k * n + k + 1] = alpha.conj();
        for i in k + 2..n {
            h[i * n + k] = zero;
            h[k * n + i] = zero;
        }
        if let Some(q) = q.as_deref_mut() {
            // Q <- Q H
            for r in 0..n {
                let s: Complex64 = (k + 1..n).map(|j| q[r * n + j] * v[j]).sum();
                let s = tau * s;
                for j in k + 1..n {
                    q[r * n + j] -= s * v[j].conj();
                }
            }
        }
    }

    let diag: Vec<f64> = (0..n).map(|i| h[i * n + i].re).collect();
    let sub: Vec<Complex64> = (0..n.saturating_sub(1)).map(|i| h[(i + 1) * n + i]).collect();
    let off: Vec<f64> = sub.iter().map(|c| c.norm()).collect();
    let (values, z) = tridiagonal_eigen(&diag, &off, vectors)?;

    let vectors = match (q, z) {
        (Some(q), Some(z)) => {
            let mut phase = vec![Complex64::new(1.0, 0.0); n];
            for i in 0..n.saturating_sub(1) {
                let t = sub[i];
                let u = if t.norm() > 0.0 { t / t.norm() } else { Complex64::new(1.0, 0.0) };
                phase[i + 1] = phase[i] * u;
            }
            let mut out = vec![zero; n * n];
            for r in 0..n {
                for c in 0..n {
                    let mut s = zero;
                    for j in 0..n {
                        s += q[r * n + j] * phase[j] * z[j * n + c];
                    }
                    out[r * n + c] = s;
                }
            }
            Some(out)
        }
        _ => None,
    };
    Ok(HermitianEigen { values, vectors })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn random_hermitian(n: usize, seed: u64) -> Vec<Complex64> {
        let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1);
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        let mut a = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            a[i * n + i] = Complex64::new(next(), 0.0);
            for j in 0..i {
                let c = Complex64::new(next(), next());
                a[i * n + j] = c;
                a[j * n + i] = c.conj();
            }
        }
        a
    }

    fn frob(a: &[Complex64]) -> f64 {
        a.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    #[test]
    fn diagonal_input() {
        let mut a = vec![Complex64::new(0.0, 0.0); 9];
        a[0] = Complex64::new(3.0, 0.0);
        a[4] = Complex64::new(-1.0, 0.0);
        a[8] = Complex64::new(2.0, 0.0);
        let e = hermitian_eigen(&a, 3, false).unwrap();
        assert_eq!(e.values, vec![-1.0, 2.0, 3.0]);
    }

    #[test]
    fn two_by_two_closed_form() {
        let b = Complex64::new(0.3, -0.4);
        let a = vec![Complex64::new(1.0, 0.0), b.conj(), b, Complex64::new(-2.0, 0.0)];
        let e = hermitian_eigen(&a, 2, false).unwrap();
        let disc = (1.5f64 * 1.5 + b.norm_sqr()).sqrt();
        assert!((e.values[0] - (-0.5 - disc)).abs() < 1e-14);
        assert!((e.values[1] - (-0.5 + disc)).abs() < 1e-14);
    }

    #[test]
    fn residuals_and_trace() {
        for (n, seed) in [(1, 1), (5, 2), (9, 3), (32, 4), (64, 5)] {
            let a = random_hermitian(n, seed);
            let e = hermitian_eigen(&a, n, true).unwrap();
            let v = e.vectors.unwrap();
            let scale = frob(&a);
            for k in 0..n {
                let mut res = 0.0;
                for i in 0..n {
                    let mut s = Complex64::new(0.0, 0.0);
                    for j in 0..n {
                        s += a[i * n + j] * v[j * n + k];
                    }
                    res += (s - e.values[k] * v[i * n + k]).norm_sqr();
                }
                assert!(res.sqrt() <= 1e-10 * scale, "n={n} k={k}");
            }
            let tr: f64 = (0..n).map(|i| a[i * n + i].re).sum();
            let sum: f64 = e.values.iter().sum();
            assert!((tr - sum).abs() < 1e-11 * scale);
            assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    proptest! {
        #[test]
        fn frobenius_norm_preserved(n in 1usize..16, seed in 0u64..1000) {
            let a = random_hermitian(n, seed);
            let e = hermitian_eigen(&a, n, false).unwrap();
            let lhs: f64 = e.values.iter().map(|x| x * x).sum();
            let rhs = frob(&a).powi(2);
            prop_assert!((lhs - rhs).abs() < 1e-12 * rhs.max(1.0));
        }
    }
}
