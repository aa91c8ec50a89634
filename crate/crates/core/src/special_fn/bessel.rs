use num_complex::Complex64;

/// `bessel_j` uses the power series for `|x|` up to this value, Miller recurrence beyond.
pub const BESSEL_J_SERIES_LIMIT: f64 = 8.0;
/// `bessel_i_entire` uses the power series for `|u|` up to this value, Miller recurrence beyond.
pub const BESSEL_I_SERIES_LIMIT: f64 = 64.0;

const RESCALE: f64 = 1e250;

fn factorial(k: u32) -> f64 {
    (1..=k).fold(1.0, |acc, i| acc * f64::from(i))
}

/// Bessel function of the first kind `J_order(x)`.
pub fn bessel_j(order: u32, x: f64) -> f64 {
    if x < 0.0 {
        let v = bessel_j(order, -x);
        return if order % 2 == 0 { v } else { -v };
    }
    if x <= BESSEL_J_SERIES_LIMIT {
        return j_series(order, x);
    }
    j_miller(order, x)
}

fn j_series(order: u32, x: f64) -> f64 {
    let q = -0.25 * x * x;
    let mut term = (0.5 * x).powi(order as i32) / factorial(order);
    let mut sum = term;
    for k in 1..200 {
        term *= q / (f64::from(k) * f64::from(k + order));
        sum += term;
        if term.abs() < 1e-17 * sum.abs().max(1e-300) {
            break;
        }
    }
    sum
}

// Backward recurrence normalized by 1 = J_0 + 2 sum_k J_{2k}.
fn j_miller(order: u32, x: f64) -> f64 {
    let start = {
        let s = (order as f64).max(x) + 30.0 + (50.0 * x).sqrt();
        let s = s as u32 + 1;
        s + s % 2
    };
    let mut next = 0.0;
    let mut cur = 1.0;
    let mut norm = 0.0;
    let mut wanted = 0.0;
    for k in (1..=start).rev() {
        // J_{k-1} = (2k/x) J_k - J_{k+1}
        let prev = 2.0 * f64::from(k) / x * cur - next;
        next = cur;
        cur = prev;
        if k - 1 == order {
            wanted = cur;
        }
        if (k - 1) % 2 == 0 && k - 1 > 0 {
            norm += 2.0 * cur;
        }
        if cur.abs() > RESCALE {
            cur /= RESCALE;
            next /= RESCALE;
            norm /= RESCALE;
            wanted /= RESCALE;
        }
    }
    if order == 0 {
        wanted = cur;
    }
    norm += cur;
    wanted / norm
}

/// Entire function `Î_order(u) = sum_k (u/4)^k / (k! (k+order)!)`.
///
/// `I_order(sqrt(u)) = (u/4)^{order/2} Î_order(u)` for any branch of the root.
pub fn bessel_i_entire(order: u32, u: Complex64) -> Complex64 {
    if u.norm() <= BESSEL_I_SERIES_LIMIT {
        return i_series(order, u);
    }
    i_miller(order, u)
}

fn i_series(order: u32, u: Complex64) -> Complex64 {
    let q = 0.25 * u;
    let mut term = Complex64::new(1.0 / factorial(order), 0.0);
    let mut sum = term;
    for k in 1..400 {
        term *= q / (f64::from(k) * f64::from(k + order));
        sum += term;
        if term.norm() < 1e-17 * sum.norm().max(1e-300) {
            break;
        }
    }
    sum
}

// Backward recurrence for I_k(w), w the principal root, normalized by e^w = I_0 + 2 sum I_k.
fn i_miller(order: u32, u: Complex64) -> Complex64 {
    let w = u.sqrt();
    let aw = w.norm();
    let start = (f64::from(order).max(aw) + 40.0 + (60.0 * aw).sqrt()) as u32 + 1;
    let zero = Complex64::new(0.0, 0.0);
    let mut next = zero;
    let mut cur = Complex64::new(1.0, 0.0);
    let mut norm = zero;
    let mut wanted = zero;
    for k in (1..=start).rev() {
        // I_{k-1} = (2k/w) I_k + I_{k+1}
        let prev = 2.0 * f64::from(k) / w * cur + next;
        next = cur;
        cur = prev;
        if k - 1 == order && order > 0 {
            wanted = cur;
        }
        if k - 1 > 0 {
            norm += 2.0 * cur;
        }
        if cur.norm() > RESCALE {
            cur /= RESCALE;
            next /= RESCALE;
            norm /= RESCALE;
            wanted /= RESCALE;
        }
    }
    if order == 0 {
        wanted = cur;
    }
    norm += cur;
    // I_order(w) = wanted * e^w / norm; divide by (w/2)^order.
    let ratio = wanted / norm;
    let half = 0.5 * w;
    ratio * w.exp() / half.powu(order)
}
