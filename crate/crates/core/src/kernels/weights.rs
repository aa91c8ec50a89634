use crate::logdomain::SignedLog;
use crate::params::ModelParams;
use crate::special_fn::{erf, ln_erfc, QuadratureKind};
use std::f64::consts::PI;

/// `w(x) = exp(-x^2 / 4a^2)`.
pub fn weight_w(x: f64, p: &ModelParams) -> SignedLog {
    SignedLog::exp(-x * x / (4.0 * p.a * p.a))
}

/// `f(x) = exp(-m x / 2a^2)`.
pub fn weight_f(x: f64, p: &ModelParams) -> SignedLog {
    SignedLog::exp(-p.m * x / (2.0 * p.a * p.a))
}

/// Antisymmetric weight `F(x) = exp(x^2 c / 8a^2) B(x)` with the erf bracket `B`.
#[allow(non_snake_case)]
pub fn weight_F(x: f64, p: &ModelParams) -> SignedLog {
    erf_bracket(x, p).scale_exp(x * x * p.c() / (8.0 * p.a * p.a))
}

/// Arguments of the bracket: `B(v) = erf(pv + q) + erf(pv - q)`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Bracket {
    /// `pv = slope * v`
    pub slope: f64,
    pub q: f64,
}

impl Bracket {
    pub fn new(p: &ModelParams) -> Self {
        let a2 = p.a * p.a;
        let c = p.c();
        Bracket {
            slope: (c / (8.0 * a2)).sqrt(),
            q: p.m / (2.0 * a2 * c).sqrt(),
        }
    }

    pub fn eval(&self, v: f64) -> SignedLog {
        bracket_pq(self.slope * v, self.q)
    }
}

pub(crate) fn erf_bracket(v: f64, p: &ModelParams) -> SignedLog {
    Bracket::new(p).eval(v)
}

/// `erf(p + q) + erf(p - q)` for `q >= 0`, odd in `p`, without cancellation.
pub(crate) fn bracket_pq(p: f64, q: f64) -> SignedLog {
    if p == 0.0 {
        return SignedLog::ZERO;
    }
    if p < 0.0 {
        return -bracket_pq(-p, q);
    }
    if p >= q {
        return SignedLog::from_f64(erf(p + q) + erf(p - q));
    }
    if 4.0 * p * q < 1.0 && p < 0.5 {
        // (2/sqrt(pi)) e^{-q^2} int_{-p}^{p} e^{-2qs - s^2} ds
        let rule = crate::special_fn::cached_rule(QuadratureKind::GaussLegendre, 16)
            .expect("order-16 Legendre rule");
        let integral: f64 = rule
            .mapped(-p, p)
            .iter()
            .map(|&(s, w)| w * (-2.0 * q * s - s * s).exp())
            .sum();
        return SignedLog::from_scaled(2.0 / PI.sqrt() * integral, -q * q);
    }
    // erfc(q - p) - erfc(q + p)
    let hi = ln_erfc(q - p);
    let lo = ln_erfc(q + p);
    SignedLog::new(1, hi + (-(lo - hi).exp_m1()).ln())
}
