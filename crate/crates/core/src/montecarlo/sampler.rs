use crate::error::{Error, Result};
use crate::linalg::hermitian_eigen;
use crate::params::{MicroParams, ModelParams};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::ops::Range;

/// Master seed and number of independent streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RngConfig {
    pub seed: u64,
    pub streams: u64,
}

impl Default for RngConfig {
    fn default() -> Self {
        RngConfig {
            seed: 0x5EED,
            streams: 16,
        }
    }
}

impl RngConfig {
    pub fn new(seed: u64, streams: u64) -> Result<Self> {
        if streams == 0 {
            return Err(Error::InvalidParameter("stream count must be positive".into()));
        }
        Ok(RngConfig { seed, streams })
    }

    pub fn stream(&self, id: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(id);
        rng
    }

    /// Contiguous block of draw indices handled by stream `id`.
    pub fn block(&self, id: u64, draws: u64) -> Range<u64> {
        let lo = draws * id / self.streams;
        let hi = draws * (id + 1) / self.streams;
        lo..hi
    }

    /// Runs `job` once per stream in parallel and returns the results in stream order.
    pub fn run<T, F>(&self, draws: u64, job: F) -> Vec<T>
    where
        T: Send,
        F: Fn(u64, &mut ChaCha8Rng, Range<u64>) -> T + Sync,
    {
        (0..self.streams)
            .into_par_iter()
            .map(|id| {
                let mut rng = self.stream(id);
                job(id, &mut rng, self.block(id, draws))
            })
            .collect()
    }
}

/// Normal deviates by the Box–Muller transform, caching the second value of each pair.
pub struct GaussianSource<'a, R: Rng> {
    rng: &'a mut R,
    spare: Option<f64>,
}

impl<'a, R: Rng> GaussianSource<'a, R> {
    pub fn new(rng: &'a mut R) -> Self {
        GaussianSource { rng, spare: None }
    }

    fn pair(&mut self) -> (f64, f64) {
        // 1 - U lies in (0, 1], so the logarithm is finite
        let u1: f64 = 1.0 - self.rng.gen::<f64>();
        let u2: f64 = self.rng.gen::<f64>();
        let r = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (2.0 * std::f64::consts::PI * u2).sin_cos();
        (r * c, r * s)
    }

    /// Standard normal.
    pub fn normal(&mut self) -> f64 {
        if let Some(v) = self.spare.take() {
            return v;
        }
        let (a, b) = self.pair();
        self.spare = Some(b);
        a
    }

    /// Complex normal with `E|z|^2 = variance`.
    pub fn complex(&mut self, variance: f64) -> Complex64 {
        let s = (0.5 * variance).sqrt();
        let (a, b) = self.pair();
        Complex64::new(s * a, s * b)
    }
}

/// Eigenvalues of one draw, ascending, with the stream and draw index that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumSample {
    pub eigenvalues: Vec<f64>,
    pub stream: u64,
    pub draw: u64,
}

/// Parameters of the second ensemble, `D5 = [[m + aA, W], [W^dag, -m - aB]]`;
/// `a >= 0` is not restricted to `(0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Model2Params {
    pub n: usize,
    pub nu: usize,
    pub a: f64,
    pub m: f64,
}

impl Model2Params {
    pub fn new(n: usize, nu: usize, a: f64, m: f64) -> Result<Self> {
        if n == 0 && nu == 0 {
            return Err(Error::InvalidParameter("empty operator".into()));
        }
        if !(a >= 0.0 && a.is_finite() && m >= 0.0 && m.is_finite()) {
            return Err(Error::InvalidParameter("need a >= 0 and m >= 0".into()));
        }
        Ok(Model2Params { n, nu, a, m })
    }

    /// Same microscopic mapping as the first ensemble.
    pub fn from_micro(n: usize, mp: &MicroParams) -> Result<Self> {
        let s = (2.0 * n as f64).sqrt();
        Self::new(n, mp.nu, 2.0 * mp.a_hat / s, mp.m_hat / s)
    }

    pub fn dim(&self) -> usize {
        2 * self.n + self.nu
    }
}

/// Which ensemble to draw from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Ensemble {
    Model1(ModelParams),
    Model2(Model2Params),
}

impl Ensemble {
    pub fn dim(&self) -> usize {
        match self {
            Ensemble::Model1(p) => p.dim(),
            Ensemble::Model2(p) => p.dim(),
        }
    }

    fn matrix<R: Rng>(&self, g: &mut GaussianSource<'_, R>) -> Vec<Complex64> {
        match self {
            Ensemble::Model1(p) => model1_matrix(p, g),
            Ensemble::Model2(p) => model2_matrix(p, g),
        }
    }
}

// Lower triangle only; the eigensolver ignores the upper one.
fn add_gue<R: Rng>(d: &mut [Complex64], dim: usize, range: Range<usize>, scale: f64, var: f64, g: &mut GaussianSource<'_, R>) {
    let sd = var.sqrt();
    for i in range.clone() {
        d[i * dim + i] += scale * sd * g.normal();
        for j in range.start..i {
            d[i * dim + j] += scale * g.complex(var);
        }
    }
}

fn add_chiral<R: Rng>(d: &mut [Complex64], dim: usize, n: usize, m: f64, w_var: f64, g: &mut GaussianSource<'_, R>) {
    for i in 0..dim {
        d[i * dim + i] += if i < n { m } else { -m };
    }
    // W occupies rows 0..n, columns n..dim; its adjoint fills the lower-left block
    for i in 0..n {
        for j in n..dim {
            d[j * dim + i] += g.complex(w_var).conj();
        }
    }
}

fn model1_matrix<R: Rng>(p: &ModelParams, g: &mut GaussianSource<'_, R>) -> Vec<Complex64> {
    let dim = p.dim();
    let mut d = vec![Complex64::new(0.0, 0.0); dim * dim];
    add_chiral(&mut d, dim, p.n, p.m, 2.0 * p.c(), g);
    add_gue(&mut d, dim, 0..dim, 1.0, 2.0 * p.a * p.a, g);
    d
}

fn model2_matrix<R: Rng>(p: &Model2Params, g: &mut GaussianSource<'_, R>) -> Vec<Complex64> {
    let dim = p.dim();
    let mut d = vec![Complex64::new(0.0, 0.0); dim * dim];
    add_chiral(&mut d, dim, p.n, p.m, 2.0, g);
    add_gue(&mut d, dim, 0..p.n, p.a, 2.0, g);
    add_gue(&mut d, dim, p.n..dim, -p.a, 2.0, g);
    d
}

fn eigenvalues(d: &[Complex64], dim: usize) -> Result<Vec<f64>> {
    Ok(hermitian_eigen(d, dim, false)?.values)
}

/// One draw of the first ensemble.
pub fn sample_d5<R: Rng>(p: &ModelParams, rng: &mut R) -> Result<Vec<f64>> {
    p.validate()?;
    let mut g = GaussianSource::new(rng);
    eigenvalues(&model1_matrix(p, &mut g), p.dim())
}

/// One draw of the second ensemble.
pub fn sample_d5_model2<R: Rng>(p: &Model2Params, rng: &mut R) -> Result<Vec<f64>> {
    let mut g = GaussianSource::new(rng);
    eigenvalues(&model2_matrix(p, &mut g), p.dim())
}

/// Spectra of a parallel run, in draw order, and the number of draws skipped
/// because the eigensolver did not converge.
#[derive(Debug, Clone)]
pub struct SampleRun {
    pub samples: Vec<SpectrumSample>,
    pub skipped: u64,
}

/// Draws `draws` spectra; each stream hands every spectrum to `visit` and folds into `T`.
pub(crate) fn fold_spectra<T, I, V>(ens: &Ensemble, cfg: &RngConfig, draws: u64, init: I, visit: V) -> Vec<(T, u64)>
where
    T: Send,
    I: Fn() -> T + Sync,
    V: Fn(&mut T, SpectrumSample) + Sync,
{
    let dim = ens.dim();
    cfg.run(draws, |id, rng, block| {
        let mut acc = init();
        let mut skipped = 0;
        for draw in block {
            let mut g = GaussianSource::new(rng);
            let d = ens.matrix(&mut g);
            match eigenvalues(&d, dim) {
                Ok(eigenvalues) => visit(
                    &mut acc,
                    SpectrumSample {
                        eigenvalues,
                        stream: id,
                        draw,
                    },
                ),
                Err(e) if e.is_numerical() => {
                    log::warn!("draw {draw} of stream {id} skipped: {e}");
                    skipped += 1;
                }
                Err(e) => panic!("sampler invariant violated: {e}"),
            }
        }
        (acc, skipped)
    })
}

/// All spectra of a run, stored.
pub fn sample_spectra(ens: &Ensemble, cfg: &RngConfig, draws: u64) -> Result<SampleRun> {
    if let Ensemble::Model1(p) = ens {
        p.validate()?;
    }
    let parts = fold_spectra(ens, cfg, draws, Vec::new, |v: &mut Vec<SpectrumSample>, s| v.push(s));
    let mut samples = Vec::with_capacity(draws as usize);
    let mut skipped = 0;
    for (part, sk) in parts {
        samples.extend(part);
        skipped += sk;
    }
    Ok(SampleRun { samples, skipped })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn blocks_partition_draws() {
        let cfg = RngConfig::new(1, 7).unwrap();
        let mut next = 0;
        for id in 0..7 {
            let b = cfg.block(id, 100);
            assert_eq!(b.start, next);
            next = b.end;
        }
        assert_eq!(next, 100);
        assert!(RngConfig::new(1, 0).is_err());
    }

    #[test]
    fn normal_moments() {
        let mut rng = RngConfig::default().stream(3);
        let mut g = GaussianSource::new(&mut rng);
        let k = 200_000;
        let (mut s1, mut s2) = (0.0, 0.0);
        for _ in 0..k {
            let x = g.normal();
            s1 += x;
            s2 += x * x;
        }
        assert!((s1 / k as f64).abs() < 0.01);
        assert!((s2 / k as f64 - 1.0).abs() < 0.01);
        let mut c2 = 0.0;
        for _ in 0..k {
            c2 += g.complex(3.0).norm_sqr();
        }
        assert!((c2 / k as f64 - 3.0).abs() < 0.03);
    }

    #[test]
    fn chiral_limit_of_second_ensemble() {
        let p = Model2Params::new(3, 2, 0.0, 0.7).unwrap();
        let mut rng = RngConfig::default().stream(0);
        let ev = sample_d5_model2(&p, &mut rng).unwrap();
        // nu eigenvalues sit at -m; the rest pair up as +-sqrt(m^2 + s^2)
        assert_eq!(ev.iter().filter(|&&x| (x + 0.7).abs() < 1e-10).count(), 2);
        let rest: Vec<f64> = ev.iter().cloned().filter(|&x| (x + 0.7).abs() >= 1e-10).collect();
        for k in 0..3 {
            assert!((rest[k] + rest[5 - k]).abs() < 1e-10);
        }
    }

    #[test]
    fn sorted_and_sized() {
        let p = ModelParams::new(3, 1, 0.4, 0.2).unwrap();
        let run = sample_spectra(&Ensemble::Model1(p), &RngConfig::new(9, 3).unwrap(), 20).unwrap();
        assert_eq!(run.samples.len(), 20);
        for (k, s) in run.samples.iter().enumerate() {
            assert_eq!(s.draw, k as u64);
            assert_eq!(s.eigenvalues.len(), 7);
            assert!(s.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        }
    }
}
