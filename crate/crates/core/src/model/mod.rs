//! Stochastic model: parameter domains, sample streams, random fields and the
//! analytic heat-diffusion reference.

mod analytic;
mod domain;
mod field;
mod stream;

pub use analytic::{HeatBenchmark, Moments};
pub use domain::{Density, ParameterDomain, ParameterVector};
pub use field::{RandomFieldExpansion, Side, SpatialFunction};
pub use stream::{derive_seed, SampleStream};
