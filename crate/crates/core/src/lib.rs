pub mod error;
pub mod kernels;
pub mod linalg;
pub mod logdomain;
pub mod microscopic;
pub mod montecarlo;
pub mod params;
pub mod pfaffian;
pub mod sop;
pub mod special_fn;

pub use error::{Error, Result};
pub use logdomain::SignedLog;
pub use params::{MicroParams, ModelParams};
