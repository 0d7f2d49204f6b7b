//! Certified reduced basis approximation of the affine HDG system.
//!
//! The offline stage ([`greedy_build`]) selects snapshot parameters, builds
//! `W`-orthonormal primal and dual bases and stores every
//! parameter-independent reduced quantity in an [`RbModel`]. Online queries
//! then cost `O(N³ + Q²N²)` independently of the full dimension.

mod greedy;
mod io;
mod model;

pub use greedy::{
    coercivity_constant, convergence_table, greedy_build, stability_data, ConvergenceRow, GreedyOptions,
    GreedyResult, GreedyStep, RbSpace,
};
pub use io::{read_model, write_model};
pub use model::{OutputBound, RbModel, ReducedSolution, Residual, StabilityData};
