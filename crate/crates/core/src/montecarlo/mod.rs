//! Direct sampling of the two-matrix ensembles and eigenvalue statistics.
//!
//! Draws are split into contiguous blocks, one per stream; stream `s` uses
//! ChaCha8 seeded with the master seed on stream id `s`. Results are merged in
//! stream order, so output depends only on `(seed, streams, draws)` and never
//! on the number of worker threads.

mod archive;
mod detavg;
mod gue;
mod histogram;
mod jpdf;
mod sampler;

pub use archive::{read_archive, write_archive, ArchiveHeader, ARCHIVE_MAGIC, ARCHIVE_VERSION};
pub use detavg::{mc_expect_det, DetEstimate, MIN_DET_DRAWS};
pub use gue::{gue_density, gue_density_curve};
pub use histogram::{histogram, Histogram, Window};
pub use jpdf::{jpdf_density, jpdf_density_smalln, JpdfQuadrature, JPDF_EVALUATION_BUDGET, STEPS_PER_SCALE};
pub use sampler::{
    sample_d5, sample_d5_model2, sample_spectra, Ensemble, GaussianSource, Model2Params,
    RngConfig, SampleRun, SpectrumSample,
};

/// Draw count for moment tests.
pub const DEFAULT_MOMENT_DRAWS: u64 = 100_000;
/// Draw count for histogram acceptance runs.
pub const DEFAULT_HISTOGRAM_DRAWS: u64 = 1_000_000;
