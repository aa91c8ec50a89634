use num_complex::Complex64;

/// Generalized Laguerre polynomial `L_degree^{(alpha)}(arg)` by forward recurrence.
pub fn laguerre(degree: usize, alpha: u32, arg: Complex64) -> Complex64 {
    let alpha = f64::from(alpha);
    let mut prev = Complex64::new(0.0, 0.0);
    let mut cur = Complex64::new(1.0, 0.0);
    for k in 0..degree {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 + alpha - arg) * cur - (kf + alpha) * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

pub fn laguerre_real(degree: usize, alpha: u32, x: f64) -> f64 {
    let alpha = f64::from(alpha);
    let mut prev = 0.0;
    let mut cur = 1.0;
    for k in 0..degree {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 + alpha - x) * cur - (kf + alpha) * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// Fills `out[k] = L_k^{(alpha)}(arg)` for `k < out.len()`.
pub fn laguerre_table(alpha: u32, arg: Complex64, out: &mut [Complex64]) {
    if out.is_empty() {
        return;
    }
    let alpha = f64::from(alpha);
    out[0] = Complex64::new(1.0, 0.0);
    if out.len() > 1 {
        out[1] = Complex64::new(1.0 + alpha, 0.0) - arg;
    }
    for k in 1..out.len().saturating_sub(1) {
        let kf = k as f64;
        out[k + 1] = ((2.0 * kf + 1.0 + alpha - arg) * out[k] - (kf + alpha) * out[k - 1]) / (kf + 1.0);
    }
}
