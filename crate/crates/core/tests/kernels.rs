use wrmt::kernels::{
    density_curve, kernel_D, kernel_I, kernel_S, kernels_nu1, rho1, shifted_chgue_density, Grid,
    KernelSet,
};
use wrmt::special_fn::{cached_rule, QuadratureKind};
use wrmt::ModelParams;

/// Composite 16-point Gauss–Legendre over `[lo, hi]` in panels of width `panel`.
fn integrate(lo: f64, hi: f64, panel: f64, f: impl Fn(f64) -> f64) -> f64 {
    let rule = cached_rule(QuadratureKind::GaussLegendre, 16).unwrap();
    let k = ((hi - lo) / panel).ceil() as usize;
    let h = (hi - lo) / k as f64;
    (0..k)
        .flat_map(|i| rule.mapped(lo + h * i as f64, lo + h * (i + 1) as f64))
        .map(|(x, w)| w * f(x))
        .sum()
}

#[test]
fn density_integrates_to_dimension() {
    for &(n, nu, a, m) in &[
        (4, 0, 0.3, 0.4),
        (4, 1, 0.3, 1.0),
        (4, 0, 0.1, 0.0),
        (2, 1, 0.6, 0.2),
        (3, 0, 0.05, 0.7),
    ] {
        let p = ModelParams::new(n, nu, a, m).unwrap();
        let ks = KernelSet::new(p).unwrap();
        let total = integrate(-10.0, 10.0, 0.1, |x| ks.rho1(x).unwrap());
        let dim = p.dim() as f64;
        assert!(
            (total - dim).abs() < 1e-4 * dim,
            "{p:?}: integral {total}"
        );
    }
}

#[test]
fn two_point_function_marginalizes() {
    for &(nu, m) in &[(0, 0.4), (1, 1.0)] {
        let p = ModelParams::new(3, nu, 0.3, m).unwrap();
        let ks = KernelSet::new(p).unwrap();
        let rule = cached_rule(QuadratureKind::GaussLegendre, 16).unwrap();
        let ys: Vec<(f64, f64)> = (0..100)
            .flat_map(|i| rule.mapped(-10.0 + 0.2 * i as f64, -10.0 + 0.2 * (i + 1) as f64))
            .collect();
        let pts = ks.points(&ys.iter().map(|y| y.0).collect::<Vec<_>>()).unwrap();
        for x in [-1.1, 0.35, 1.6] {
            let px = ks.point(x).unwrap();
            let marginal: f64 = pts
                .iter()
                .zip(&ys)
                .map(|(py, &(_, w))| w * ks.rho2_from(&px, py).unwrap())
                .sum();
            let expect = (p.dim() - 1) as f64 * ks.rho1(x).unwrap();
            assert!(
                (marginal - expect).abs() < 1e-3 * expect,
                "nu={nu} x={x}: {marginal} vs {expect}"
            );
        }
    }
}

#[test]
fn small_a_reproduces_shifted_chgue() {
    for &(nu, m) in &[(0, 0.4), (0, 1.0), (1, 0.4), (1, 1.0)] {
        let p = ModelParams::new(4, nu, 1e-3, m).unwrap();
        let ks = KernelSet::new(p).unwrap();
        let mut sup: f64 = 0.0;
        for k in 0..=60 {
            let ax = m + 0.2 + (3.0 - m - 0.2) * k as f64 / 60.0;
            for x in [ax, -ax] {
                let d = ks.rho1(x).unwrap() - shifted_chgue_density(x, 4, nu, m).unwrap();
                sup = sup.max(d.abs());
            }
        }
        assert!(sup < 5e-2, "nu={nu} m={m}: {sup}");
    }
}

#[test]
fn zero_mode_carries_unit_weight() {
    // the chGUE background is even in x, so the excess at -m over +m is the zero mode
    let m = 1.0;
    let ks = KernelSet::new(ModelParams::new(4, 1, 0.01, m).unwrap()).unwrap();
    let window = |c: f64| integrate(c - 0.3, c + 0.3, 0.01, |x| ks.rho1(x).unwrap());
    let excess = window(-m) - window(m);
    assert!((excess - 1.0).abs() < 5e-2, "{excess}");
}

#[test]
fn free_functions_match_kernel_set() {
    let p = ModelParams::new(3, 0, 0.3, 0.4).unwrap();
    let ks = KernelSet::new(p).unwrap();
    let (px, py) = (ks.point(0.4).unwrap(), ks.point(-1.0).unwrap());
    let d = kernel_D(0.4, -1.0, &p).unwrap();
    assert!((d - ks.d(&px, &py).unwrap().to_f64()).abs() < 1e-6 * d.abs());
    assert_eq!(kernel_D(0.4, 0.4, &p).unwrap(), 0.0);
    assert_eq!(kernel_S(0.4, -1.0, &p).unwrap(), ks.s(&px, &py).unwrap().to_f64());
    assert_eq!(kernel_I(0.4, -1.0, &p).unwrap(), ks.i(&px, &py).to_f64());
    assert!(kernels_nu1(0.4, -1.0, &p).is_err());

    let p1 = ModelParams::new(3, 1, 0.3, 0.4).unwrap();
    let (s, d, i) = kernels_nu1(0.4, 0.4, &p1).unwrap();
    assert_eq!(d, 0.0);
    assert_eq!(i, 0.0);
    assert!((s - rho1(0.4, &p1).unwrap()).abs() < 1e-6 * s);
}

#[test]
fn curve_export() {
    let p = ModelParams::new(2, 0, 0.3, 0.0).unwrap();
    let curve = density_curve(&p, &"-2:2:9".parse::<Grid>().unwrap()).unwrap();
    let csv = curve.to_csv();
    assert!(csv.starts_with("x,rho\n-2,"));
    assert_eq!(csv.lines().count(), 10);
    for (v, w) in curve.values.iter().zip(curve.values.iter().rev()) {
        assert!((v - w).abs() < 1e-9 * v.abs().max(1e-12));
    }
    let json: serde_json::Value = serde_json::from_str(&curve.to_json()).unwrap();
    assert_eq!(json["meta"]["kind"], "rho1");
    assert_eq!(json["meta"]["params"]["n"], 2);
}
