use super::sampler::{fold_spectra, Ensemble, RngConfig};
use crate::error::{Error, Result};
use crate::logdomain::SignedLog;
use crate::params::ModelParams;
use serde::{Deserialize, Serialize};

/// Smallest accepted draw count.
pub const MIN_DET_DRAWS: u64 = 1000;

/// Sample mean of `det(z + D5)` and its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DetEstimate {
    pub z: f64,
    pub mean: f64,
    pub std_error: f64,
    pub draws: u64,
}

#[derive(Clone)]
struct Moments {
    s1: Vec<SignedLog>,
    s2: Vec<SignedLog>,
    count: u64,
}

/// `<prod_i (z + lambda_i)>` at each `z`, reusing every draw for all `z`.
/// Products and sums are kept as sign and logarithm, so large `N` cannot overflow.
pub fn mc_expect_det(zs: &[f64], p: &ModelParams, draws: u64, cfg: &RngConfig) -> Result<Vec<DetEstimate>> {
    p.validate()?;
    if draws < MIN_DET_DRAWS {
        return Err(Error::InvalidParameter(format!("need at least {MIN_DET_DRAWS} draws")));
    }
    let k = zs.len();
    let init = || Moments {
        s1: vec![SignedLog::ZERO; k],
        s2: vec![SignedLog::ZERO; k],
        count: 0,
    };
    let parts = fold_spectra(&Ensemble::Model1(*p), cfg, draws, init, |acc: &mut Moments, s| {
        for (j, &z) in zs.iter().enumerate() {
            let det = s
                .eigenvalues
                .iter()
                .fold(SignedLog::ONE, |d, &l| d * SignedLog::from_f64(z + l));
            acc.s1[j] = acc.s1[j] + det;
            acc.s2[j] = acc.s2[j] + det * det;
        }
        acc.count += 1;
    });
    let mut total = init();
    for (m, _) in parts {
        for j in 0..k {
            total.s1[j] = total.s1[j] + m.s1[j];
            total.s2[j] = total.s2[j] + m.s2[j];
        }
        total.count += m.count;
    }
    if total.count < 2 {
        return Err(Error::EmptySamples);
    }
    let n = SignedLog::from_f64(total.count as f64);
    Ok(zs
        .iter()
        .enumerate()
        .map(|(j, &z)| {
            let mean = total.s1[j] / n;
            let var = (total.s2[j] / n - mean * mean) * (total.count as f64 / (total.count - 1) as f64);
            DetEstimate {
                z,
                mean: mean.to_f64(),
                std_error: (var.to_f64().max(0.0) / total.count as f64).sqrt(),
                draws: total.count,
            }
        })
        .collect())
}
