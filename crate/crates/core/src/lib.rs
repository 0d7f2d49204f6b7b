//! Statistical outputs of stochastic elliptic PDEs.
//!
//! The crate is organised bottom-up:
//!
//! * [`model`]: parameter domains, seeded sample streams, random diffusion
//!   fields and the closed-form 1D heat-diffusion reference values.
//! * [`hdg`]: 1D hybridizable discontinuous Galerkin discretization written
//!   in the affine `(u, û)` form, with a statically condensed trace solver.
//! * [`rb`]: greedy reduced basis construction, online primal/dual outputs
//!   and certified output bounds.
//! * [`mc`]: plain Monte Carlo estimators, CLT half-widths and the MC-RB
//!   composite bounds.
//! * [`mvr`]: two-level and multilevel control-variate estimators, cost
//!   model, level selection and the adaptive sampling loop.
//!
//! Data-parallel loops go through [`par`], which uses rayon when the
//! `parallel` feature is enabled and plain iterators otherwise. Results never
//! depend on the number of worker threads.

pub mod error;
pub mod hdg;
pub mod mc;
pub mod model;
pub mod mvr;
pub mod par;
pub mod rb;
pub mod scalar;

pub use error::{Error, Result};
pub use scalar::HdgScalar;
