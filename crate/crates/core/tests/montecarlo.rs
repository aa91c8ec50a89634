use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use wrmt::kernels::rho1;
use wrmt::montecarlo::*;
use wrmt::{MicroParams, ModelParams};

/// Two-sample Kolmogorov–Smirnov statistic.
fn ks_statistic(mut a: Vec<f64>, mut b: Vec<f64>) -> f64 {
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j, mut d) = (0, 0, 0.0f64);
    while i < a.len() && j < b.len() {
        let x = a[i].min(b[j]);
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Critical value of the two-sample statistic at the 1% level.
fn ks_critical(na: usize, nb: usize) -> f64 {
    1.628 * ((na + nb) as f64 / (na as f64 * nb as f64)).sqrt()
}

fn mean_and_error(values: &[f64]) -> (f64, f64) {
    let k = values.len() as f64;
    let mean = values.iter().sum::<f64>() / k;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (k - 1.0);
    (mean, (var / k).sqrt())
}

#[test]
fn trace_and_second_moment() {
    for &(n, nu, a, m) in &[(3, 1, 0.4, 0.6), (2, 2, 0.7, 0.3)] {
        let p = ModelParams::new(n, nu, a, m).unwrap();
        let run = sample_spectra(&Ensemble::Model1(p), &RngConfig::new(21, 8).unwrap(), DEFAULT_MOMENT_DRAWS).unwrap();
        let s1: Vec<f64> = run.samples.iter().map(|s| s.eigenvalues.iter().sum()).collect();
        let s2: Vec<f64> = run.samples.iter().map(|s| s.eigenvalues.iter().map(|l| l * l).sum()).collect();
        let dim = p.dim() as f64;
        let expect1 = -m * nu as f64;
        let expect2 = dim * m * m + 4.0 * (n * (n + nu)) as f64 * p.c() + 2.0 * a * a * dim * dim;
        let (m1, e1) = mean_and_error(&s1);
        let (m2, e2) = mean_and_error(&s2);
        assert!((m1 - expect1).abs() < 3.0 * e1, "{m1} +- {e1} vs {expect1}");
        assert!((m2 - expect2).abs() < 3.0 * e2, "{m2} +- {e2} vs {expect2}");
    }
}

#[test]
fn second_ensemble_trace() {
    let p = Model2Params::new(3, 1, 1.3, 0.5).unwrap();
    let run = sample_spectra(&Ensemble::Model2(p), &RngConfig::new(5, 4).unwrap(), 20_000).unwrap();
    let s1: Vec<f64> = run.samples.iter().map(|s| s.eigenvalues.iter().sum()).collect();
    let (m1, e1) = mean_and_error(&s1);
    assert!((m1 + 0.5).abs() < 3.0 * e1, "{m1} +- {e1}");
}

#[test]
fn near_zero_mode_in_every_draw() {
    let p = ModelParams::new(4, 1, 0.01, 0.0).unwrap();
    let run = sample_spectra(&Ensemble::Model1(p), &RngConfig::default(), 5_000).unwrap();
    assert_eq!(run.skipped, 0);
    for s in &run.samples {
        assert!(s.eigenvalues.iter().any(|l| l.abs() < 10.0 * p.a), "{:?}", s.eigenvalues);
    }
}

#[test]
fn reproducible_regardless_of_threads() {
    let p = ModelParams::new(3, 1, 0.3, 0.2).unwrap();
    let cfg = RngConfig::new(77, 5).unwrap();
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| sample_spectra(&Ensemble::Model1(p), &cfg, 503).unwrap().samples)
    };
    let one = run(1);
    let four = run(4);
    assert_eq!(one, four);
    let other = sample_spectra(&Ensemble::Model1(p), &RngConfig::new(78, 5).unwrap(), 503).unwrap();
    assert_ne!(one, other.samples);
}

#[test]
fn massless_spectrum_is_symmetric() {
    let p = ModelParams::new(2, 0, 0.4, 0.0).unwrap();
    let run = sample_spectra(&Ensemble::Model1(p), &RngConfig::new(8, 16).unwrap(), 1_000_000).unwrap();
    // independent halves, so the two samples are independent
    let half = run.samples.len() / 2;
    let pos: Vec<f64> = run.samples[..half].iter().flat_map(|s| s.eigenvalues.clone()).collect();
    let neg: Vec<f64> = run.samples[half..].iter().flat_map(|s| s.eigenvalues.iter().map(|l| -l)).collect();
    let (na, nb) = (pos.len(), neg.len());
    let d = ks_statistic(pos, neg);
    assert!(d < ks_critical(na, nb), "KS {d}");
}

#[test]
fn small_spacing_splits_off_index_gue() {
    let (n, nu, a) = (2, 2, 0.02);
    let p = ModelParams::new(n, nu, a, 0.0).unwrap();
    let draws = 10_000;
    let run = sample_spectra(&Ensemble::Model1(p), &RngConfig::new(3, 4).unwrap(), draws).unwrap();
    let mut inner = Vec::new();
    for s in &run.samples {
        let small: Vec<f64> = s.eigenvalues.iter().cloned().filter(|l| l.abs() < 10.0 * a).collect();
        assert_eq!(small.len(), nu);
        inner.extend(small.iter().map(|l| l / a));
    }
    // a 2x2 GUE with the variance 2 of H / a
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut g = GaussianSource::new(&mut rng);
    let mut gue = Vec::new();
    for _ in 0..draws {
        let (h11, h22) = (2f64.sqrt() * g.normal(), 2f64.sqrt() * g.normal());
        let h12 = g.complex(2.0).norm_sqr();
        let r = (0.25 * (h11 - h22).powi(2) + h12).sqrt();
        gue.push(0.5 * (h11 + h22) + r);
        gue.push(0.5 * (h11 + h22) - r);
    }
    let (na, nb) = (inner.len(), gue.len());
    let d = ks_statistic(inner, gue);
    assert!(d < ks_critical(na, nb), "KS {d}");
}

#[test]
fn ensembles_share_microscopic_density() {
    let n = 16;
    let mp = MicroParams::new(1.0, 0.3, 0).unwrap();
    let scale = (2.0 * n as f64).sqrt();
    let w = Window::new(-4.0, 4.0).unwrap();
    let cfg = RngConfig::new(12, 8).unwrap();
    let draws = 20_000;
    let one = ModelParams::from_micro(n, &mp).unwrap();
    let two = Model2Params::from_micro(n, &mp).unwrap();
    let (h1, _) = Histogram::sample(&Ensemble::Model1(one), &cfg, draws, w, 16, Some(scale)).unwrap();
    let (h2, _) = Histogram::sample(&Ensemble::Model2(two), &cfg, draws, w, 16, Some(scale)).unwrap();
    let (d1, d2) = (h1.density(), h2.density());
    let (e1, e2) = (h1.standard_errors(), h2.standard_errors());
    let within = (0..16)
        .filter(|&k| (d1[k] - d2[k]).abs() <= 3.0 * (e1[k].powi(2) + e2[k].powi(2)).sqrt())
        .count();
    assert!(within >= 15, "{within} of 16 bins agree");
}

#[test]
fn histogram_tracks_density() {
    let p = ModelParams::new(3, 1, 0.3, 0.5).unwrap();
    let (h, skipped) = Histogram::sample(&Ensemble::Model1(p), &RngConfig::default(), 100_000, Window::new(-5.0, 5.0).unwrap(), 40, None).unwrap();
    assert_eq!(skipped, 0);
    let frac = h.fraction_within(3.0, |x| rho1(x, &p).unwrap());
    assert!(frac >= 0.95, "{frac}");
    let c = h.to_curve("mc", serde_json::Value::Null).unwrap();
    assert_eq!(c.meta.errors.as_ref().unwrap().len(), 40);
}

#[test]
fn archive_of_sampled_run() {
    let p = ModelParams::new(2, 1, 0.3, 0.5).unwrap();
    let run = sample_spectra(&Ensemble::Model1(p), &RngConfig::default(), 50).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.wrmt");
    write_archive(&path, &ArchiveHeader::new(&p, 50).unwrap(), &run.samples).unwrap();
    let (h, back) = read_archive(&path).unwrap();
    assert_eq!(h.dim(), 5);
    for (x, y) in back.iter().zip(&run.samples) {
        assert_eq!(x.eigenvalues, y.eigenvalues);
    }
}
