use std::f64::consts::PI;

/// Above this argument `erfcx` switches from `exp(x^2) erfc(x)` to the continued fraction.
pub const ERFCX_FRACTION_THRESHOLD: f64 = 5.0;

pub fn erf(x: f64) -> f64 {
    libm::erf(x)
}

pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}

/// Scaled complementary error function `exp(x^2) erfc(x)`.
pub fn erfcx(x: f64) -> f64 {
    if x < 0.0 {
        // erfc(-x) = 2 - erfc(x)
        if x < -26.7 {
            return f64::INFINITY;
        }
        return 2.0 * (x * x).exp() - erfcx(-x);
    }
    if x < ERFCX_FRACTION_THRESHOLD {
        return (x * x).exp() * libm::erfc(x);
    }
    1.0 / (PI.sqrt() * erfc_fraction(x))
}

/// `ln erfc(x)`, finite for all `x`.
pub fn ln_erfc(x: f64) -> f64 {
    if x < 1.0 {
        libm::erfc(x).ln()
    } else {
        erfcx(x).ln() - x * x
    }
}

// x + (1/2)/(x + 1/(x + (3/2)/(x + ...))) by modified Lentz; erfc(x) = e^{-x^2}/(sqrt(pi) K).
fn erfc_fraction(x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut f = x;
    let mut c = x;
    let mut d = 0.0;
    for k in 1..500 {
        let a = 0.5 * k as f64;
        d = x + a * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = x + a / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    f
}
