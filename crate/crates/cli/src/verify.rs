//! Fast invariant suite behind `wrmt verify`: one or two cheap checks per module.

use crate::Failure;
use wrmt::kernels::{chgue_density_finite, KernelSet};
use wrmt::microscopic::{partition_nf1_micro, MicroDensity};
use wrmt::montecarlo::{sample_spectra, Ensemble, Histogram, RngConfig, Window};
use wrmt::pfaffian::{pfaffian, AntisymmetricMatrix};
use wrmt::sop::{char_poly_avg, r_even};
use wrmt::special_fn::{cached_rule, erf, QuadratureKind};
use wrmt::{MicroParams, ModelParams};

#[derive(Debug, serde::Serialize)]
pub struct Check {
    pub module: &'static str,
    pub name: &'static str,
    pub passed: bool,
    /// Set when the check could not run because of a numerical diagnostic.
    pub numerical_error: bool,
    pub detail: String,
}

#[derive(Debug, serde::Serialize)]
pub struct Report {
    pub tool_version: &'static str,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("module,name,status,detail\n");
        for c in &self.checks {
            let status = match (c.passed, c.numerical_error) {
                (true, _) => "pass",
                (false, true) => "error",
                (false, false) => "fail",
            };
            s += &format!("{},{},{status},\"{}\"\n", c.module, c.name, c.detail.replace('"', "'"));
        }
        s
    }

    pub fn outcome(&self) -> Result<(), Failure> {
        let names = |pred: &dyn Fn(&Check) -> bool| {
            self.checks
                .iter()
                .filter(|c| pred(c))
                .map(|c| format!("{}::{} ({})", c.module, c.name, c.detail))
                .collect::<Vec<_>>()
        };
        let numerical = names(&|c| c.numerical_error);
        if !numerical.is_empty() {
            return Err(Failure::Numerical(numerical.join("; ")));
        }
        let failed = names(&|c| !c.passed);
        if !failed.is_empty() {
            return Err(Failure::Verify(failed.join("; ")));
        }
        Ok(())
    }
}

type Measured = wrmt::Result<(bool, String)>;

fn check(module: &'static str, name: &'static str, body: impl FnOnce() -> Measured) -> Check {
    match body() {
        Ok((passed, detail)) => Check {
            module,
            name,
            passed,
            numerical_error: false,
            detail,
        },
        Err(e) => Check {
            module,
            name,
            passed: false,
            numerical_error: e.is_numerical(),
            detail: e.to_string(),
        },
    }
}

fn integrate(lo: f64, hi: f64, panels: usize, mut f: impl FnMut(f64) -> wrmt::Result<f64>) -> wrmt::Result<f64> {
    let rule = cached_rule(QuadratureKind::GaussLegendre, 16)?;
    let h = (hi - lo) / panels as f64;
    let mut total = 0.0;
    for k in 0..panels {
        for (x, w) in rule.mapped(lo + h * k as f64, lo + h * (k + 1) as f64) {
            total += w * f(x)?;
        }
    }
    Ok(total)
}

fn within(value: f64, expect: f64, tol: f64) -> (bool, String) {
    let err = (value - expect).abs();
    (err <= tol, format!("{value:.12e} vs {expect:.12e}, error {err:.2e} (tol {tol:.0e})"))
}

pub fn run_suite() -> Report {
    let mut checks = Vec::new();

    checks.push(check("special_fn", "erf_reference_value", || {
        Ok(within(erf(0.5), 0.520_499_877_813_046_5, 1e-15))
    }));
    checks.push(check("special_fn", "hermite_rule_second_moment", || {
        let rule = cached_rule(QuadratureKind::GaussHermite, 40)?;
        Ok(within(rule.integrate(|x| x * x), std::f64::consts::PI.sqrt() / 2.0, 1e-13))
    }));
    checks.push(check("sop", "even_polynomial_is_characteristic_average", || {
        let p = ModelParams::new(3, 0, 0.4, 0.5)?;
        Ok(within(char_poly_avg(0.8, &p)?, r_even(3, 0.8, &p)?, 1e-10 * r_even(3, 0.8, &p)?.abs().max(1.0)))
    }));
    checks.push(check("pfaffian", "four_by_four_closed_form", || {
        let a = AntisymmetricMatrix::from_fn(4, |i, j| (1 + i + 2 * j) as f64 * if (i + j) % 2 == 0 { 1.0 } else { -0.5 });
        let expect = a.get(0, 1) * a.get(2, 3) - a.get(0, 2) * a.get(1, 3) + a.get(0, 3) * a.get(1, 2);
        Ok(within(pfaffian(&a).to_f64(), expect, 1e-12 * expect.abs()))
    }));
    for (name, nu, m) in [("normalization_index_0", 0, 0.4), ("normalization_index_1", 1, 1.0)] {
        checks.push(check("kernels", name, || {
            let p = ModelParams::new(2, nu, 0.3, m)?;
            let ks = KernelSet::new(p)?;
            let total = integrate(-10.0, 10.0, 80, |x| ks.rho1(x))?;
            let dim = p.dim() as f64;
            Ok(within(total, dim, 1e-4 * dim))
        }));
    }
    checks.push(check("kernels", "pfaffian_two_point_matches_explicit", || {
        let ks = KernelSet::new(ModelParams::new(3, 1, 0.3, 0.6)?)?;
        let explicit = ks.rho2(-0.4, 1.1)?;
        Ok(within(ks.rho_k(&[-0.4, 1.1])?, explicit, 1e-10 * explicit.abs()))
    }));
    checks.push(check("kernels", "massless_density_symmetric", || {
        let ks = KernelSet::new(ModelParams::new(3, 0, 0.3, 0.0)?)?;
        let v = ks.rho1(1.3)?;
        Ok(within(ks.rho1(-1.3)?, v, 1e-10 * v))
    }));
    checks.push(check("kernels", "chgue_reference_normalization", || {
        Ok(within(integrate(-12.0, 12.0, 96, |y| chgue_density_finite(y, 3, 1))?, 6.0, 1e-8))
    }));
    checks.push(check("microscopic", "two_density_forms_agree", || {
        let d = MicroDensity::new(MicroParams::new(1.0, 0.2, 0)?)?;
        let u = d.rho_s(1.7)?;
        Ok(within(d.rho_s_t_form(1.7)?, u, 1e-5 * u))
    }));
    checks.push(check("microscopic", "partition_forms_agree", || {
        let v = partition_nf1_micro(&MicroParams::new(1.2, 0.3, 1)?.with_z(0.7))?;
        Ok((v.relative_discrepancy < 1e-10, format!("relative discrepancy {:.2e} (tol 1e-10)", v.relative_discrepancy)))
    }));
    checks.push(check("montecarlo", "trace_and_second_moment", || {
        let p = ModelParams::new(2, 1, 0.5, 0.4)?;
        let run = sample_spectra(&Ensemble::Model1(p), &RngConfig::new(1, 8)?, 20_000)?;
        let dim = p.dim() as f64;
        let expect = [-p.m, dim * p.m * p.m + 4.0 * 6.0 * p.c() + 2.0 * p.a * p.a * dim * dim];
        let mut worst = 0.0f64;
        for (k, e) in expect.iter().enumerate() {
            let vals: Vec<f64> = run.samples.iter().map(|s| s.eigenvalues.iter().map(|l| l.powi(k as i32 + 1)).sum()).collect();
            let d = vals.len() as f64;
            let mean = vals.iter().sum::<f64>() / d;
            let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (d - 1.0);
            worst = worst.max((mean - e).abs() / (var / d).sqrt());
        }
        Ok((worst < 3.0, format!("max deviation {worst:.2} standard errors (tol 3)")))
    }));
    checks.push(check("montecarlo", "histogram_matches_density", || {
        let p = ModelParams::new(2, 0, 0.3, 0.4)?;
        let (h, _) = Histogram::sample(&Ensemble::Model1(p), &RngConfig::new(2, 8)?, 50_000, Window::new(-5.0, 5.0)?, 25, None)?;
        let ks = KernelSet::new(p)?;
        let mut failure = None;
        let frac = h.fraction_within(3.0, |x| {
            ks.rho1(x).unwrap_or_else(|e| {
                failure.get_or_insert(e);
                f64::NAN
            })
        });
        if let Some(e) = failure {
            return Err(e);
        }
        Ok((frac >= 0.95, format!("{:.0}% of bins within 3 sigma (need 95%)", 100.0 * frac)))
    }));

    Report {
        tool_version: env!("CARGO_PKG_VERSION"),
        checks,
    }
}
