use super::sampler::{fold_spectra, Ensemble, RngConfig, SpectrumSample};
use crate::error::{Error, Result};
use crate::kernels::{CurveMeta, DensityCurve};
use serde::{Deserialize, Serialize};

/// Half-open binning window `[min, max)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub min: f64,
    pub max: f64,
}

impl Window {
    pub fn new(min: f64, max: f64) -> Result<Self> {
        if !(min.is_finite() && max.is_finite() && max > min) {
            return Err(Error::InvalidParameter(format!("bad window [{min}, {max})")));
        }
        Ok(Window { min, max })
    }
}

/// Eigenvalue histogram keeping, per bin, the total count and the sum of squared
/// per-draw counts, so the standard error reflects correlations within a draw.
/// Merging is associative and commutative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub window: Window,
    /// Eigenvalues are binned as `rescale * lambda`.
    pub rescale: f64,
    pub draws: u64,
    pub eigenvalues: u64,
    pub counts: Vec<u64>,
    pub sumsq: Vec<u64>,
    #[serde(skip)]
    scratch: Vec<usize>,
}

impl Histogram {
    pub fn new(window: Window, bins: usize, rescale: Option<f64>) -> Result<Self> {
        if bins == 0 {
            return Err(Error::InvalidParameter("bin count must be positive".into()));
        }
        let rescale = rescale.unwrap_or(1.0);
        if !(rescale.is_finite() && rescale > 0.0) {
            return Err(Error::InvalidParameter("rescale factor must be positive".into()));
        }
        Ok(Histogram {
            window,
            rescale,
            draws: 0,
            eigenvalues: 0,
            counts: vec![0; bins],
            sumsq: vec![0; bins],
            scratch: Vec::new(),
        })
    }

    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    pub fn width(&self) -> f64 {
        (self.window.max - self.window.min) / self.bins() as f64
    }

    fn bin(&self, x: f64) -> Option<usize> {
        let x = self.rescale * x;
        if !(x >= self.window.min && x < self.window.max) {
            return None;
        }
        let k = ((x - self.window.min) / self.width()) as usize;
        Some(k.min(self.bins() - 1))
    }

    /// Adds the spectrum of one draw.
    pub fn add(&mut self, eigenvalues: &[f64]) {
        let mut idx = std::mem::take(&mut self.scratch);
        idx.clear();
        idx.extend(eigenvalues.iter().filter_map(|&x| self.bin(x)));
        idx.sort_unstable();
        for run in idx.chunk_by(|a, b| a == b) {
            let c = run.len() as u64;
            self.counts[run[0]] += c;
            self.sumsq[run[0]] += c * c;
        }
        self.draws += 1;
        self.eigenvalues += eigenvalues.len() as u64;
        self.scratch = idx;
    }

    pub fn merge(&mut self, other: &Histogram) -> Result<()> {
        if self.window != other.window || self.bins() != other.bins() || self.rescale != other.rescale {
            return Err(Error::Dimension("histograms have different binning".into()));
        }
        for k in 0..self.bins() {
            self.counts[k] += other.counts[k];
            self.sumsq[k] += other.sumsq[k];
        }
        self.draws += other.draws;
        self.eigenvalues += other.eigenvalues;
        Ok(())
    }

    pub fn centres(&self) -> Vec<f64> {
        let w = self.width();
        (0..self.bins()).map(|k| self.window.min + (k as f64 + 0.5) * w).collect()
    }

    /// Density per draw: integrates to the mean number of eigenvalues in the window.
    pub fn density(&self) -> Vec<f64> {
        let norm = self.draws.max(1) as f64 * self.width();
        self.counts.iter().map(|&c| c as f64 / norm).collect()
    }

    /// Standard error of each bin of [`Histogram::density`].
    pub fn standard_errors(&self) -> Vec<f64> {
        let d = self.draws as f64;
        if self.draws < 2 {
            return vec![f64::INFINITY; self.bins()];
        }
        self.counts
            .iter()
            .zip(&self.sumsq)
            .map(|(&c, &s)| {
                let mean = c as f64 / d;
                let var = ((s as f64 / d - mean * mean) * d / (d - 1.0)).max(0.0);
                (var / d).sqrt() / self.width()
            })
            .collect()
    }

    /// Accumulates a parallel run without storing spectra; returns the histogram and the skip count.
    pub fn sample(ens: &Ensemble, cfg: &RngConfig, draws: u64, window: Window, bins: usize, rescale: Option<f64>) -> Result<(Histogram, u64)> {
        if let Ensemble::Model1(p) = ens {
            p.validate()?;
        }
        let empty = Histogram::new(window, bins, rescale)?;
        let parts = fold_spectra(ens, cfg, draws, || empty.clone(), |h: &mut Histogram, s| h.add(&s.eigenvalues));
        let mut total = empty;
        let mut skipped = 0;
        for (h, sk) in &parts {
            total.merge(h)?;
            skipped += sk;
        }
        if total.draws == 0 {
            return Err(Error::EmptySamples);
        }
        Ok((total, skipped))
    }

    pub fn to_curve(&self, kind: &str, params: serde_json::Value) -> Result<DensityCurve> {
        if self.draws == 0 {
            return Err(Error::EmptySamples);
        }
        let mut meta = CurveMeta::new(kind, params);
        meta.errors = Some(self.standard_errors());
        meta.extra = Some(serde_json::json!({
            "draws": self.draws,
            "window": [self.window.min, self.window.max],
            "bin_width": self.width(),
            "rescale": self.rescale,
        }));
        Ok(DensityCurve::new(self.centres(), self.density(), meta))
    }

    /// Fraction of bins whose deviation from `reference(centre)` is within `sigmas`
    /// standard errors.
    pub fn fraction_within(&self, sigmas: f64, reference: impl FnMut(f64) -> f64) -> f64 {
        let z = self.z_scores(reference);
        z.iter().filter(|z| z.abs() <= sigmas).count() as f64 / z.len() as f64
    }

    /// `(density - reference) / standard error` per bin; the reference is the bin
    /// average of the curve, taken by 4-point Gauss–Legendre.
    pub fn z_scores(&self, mut reference: impl FnMut(f64) -> f64) -> Vec<f64> {
        const X: [f64; 2] = [0.339_981_043_584_856, 0.861_136_311_594_053];
        const W: [f64; 2] = [0.652_145_154_862_546, 0.347_854_845_137_454];
        let h = 0.5 * self.width();
        let averages: Vec<f64> = self
            .centres()
            .iter()
            .map(|&c| {
                (0..2)
                    .map(|k| 0.5 * W[k] * (reference(c - h * X[k]) + reference(c + h * X[k])))
                    .sum()
            })
            .collect();
        self.z_scores_against(&averages)
    }

    /// `(density - average) / standard error` for given per-bin reference averages.
    /// Empty bins use the one-count resolution as their error.
    pub fn z_scores_against(&self, averages: &[f64]) -> Vec<f64> {
        let floor = 1.0 / (self.draws.max(1) as f64 * self.width());
        self.density()
            .iter()
            .zip(self.standard_errors())
            .zip(averages)
            .map(|((d, se), avg)| (d - avg) / if se > 0.0 { se } else { floor })
            .collect()
    }
}

/// Histogram of stored spectra. With `rescale = Some(s)` eigenvalues are binned in
/// `s * lambda`, and the density is per unit of the rescaled variable.
pub fn histogram(samples: &[SpectrumSample], window: Window, bins: usize, rescale: Option<f64>) -> Result<DensityCurve> {
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    let mut h = Histogram::new(window, bins, rescale)?;
    for s in samples {
        h.add(&s.eigenvalues);
    }
    h.to_curve("histogram", serde_json::Value::Null)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sample(eigenvalues: Vec<f64>) -> SpectrumSample {
        SpectrumSample {
            eigenvalues,
            stream: 0,
            draw: 0,
        }
    }

    #[test]
    fn uniform_input_is_flat() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let samples: Vec<_> = (0..20_000).map(|_| sample(vec![rng.gen::<f64>(), rng.gen::<f64>()])).collect();
        let c = histogram(&samples, Window::new(0.0, 1.0).unwrap(), 10, None).unwrap();
        let se = c.meta.errors.as_ref().unwrap();
        for (v, e) in c.values.iter().zip(se) {
            // two eigenvalues per draw, so density 2
            assert!((v - 2.0).abs() < 4.0 * e, "{v} +- {e}");
        }
    }

    #[test]
    fn rescaled_binning() {
        let samples = vec![sample(vec![0.1, 0.3]), sample(vec![0.2, 0.45])];
        let h = histogram(&samples, Window::new(0.0, 1.0).unwrap(), 2, Some(2.0)).unwrap();
        // rescaled values 0.2, 0.6, 0.4, 0.9
        assert_eq!(h.values, vec![2.0 / 2.0 / 0.5, 2.0 / 2.0 / 0.5]);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(histogram(&[], Window::new(0.0, 1.0).unwrap(), 4, None).is_err());
        assert!(Window::new(1.0, 1.0).is_err());
        assert!(Histogram::new(Window::new(0.0, 1.0).unwrap(), 0, None).is_err());
    }

    proptest! {
        #[test]
        fn mass_counts_eigenvalues_in_window(xs in proptest::collection::vec(proptest::collection::vec(-3.0f64..3.0, 1..6), 1..30), bins in 1usize..20) {
            let samples: Vec<_> = xs.iter().cloned().map(sample).collect();
            let w = Window::new(-1.5, 2.0).unwrap();
            let c = histogram(&samples, w, bins, None).unwrap();
            let width = 3.5 / bins as f64;
            let mass: f64 = c.values.iter().sum::<f64>() * width;
            let inside = xs.iter().flatten().filter(|&&x| x >= -1.5 && x < 2.0).count() as f64;
            prop_assert!((mass - inside / samples.len() as f64).abs() < 1e-9);
        }

        #[test]
        fn merge_is_order_free(xs in proptest::collection::vec(proptest::collection::vec(-3.0f64..3.0, 1..6), 2..30), cut in 0usize..30) {
            let w = Window::new(-2.0, 2.0).unwrap();
            let cut = cut.min(xs.len());
            let mut whole = Histogram::new(w, 7, None).unwrap();
            let mut left = whole.clone();
            let mut right = whole.clone();
            for (k, x) in xs.iter().enumerate() {
                whole.add(x);
                if k < cut { left.add(x) } else { right.add(x) }
            }
            let mut ab = left.clone();
            ab.merge(&right).unwrap();
            let mut ba = right.clone();
            ba.merge(&left).unwrap();
            prop_assert_eq!(&ab.counts, &whole.counts);
            prop_assert_eq!(&ba.sumsq, &whole.sumsq);
        }
    }
}
