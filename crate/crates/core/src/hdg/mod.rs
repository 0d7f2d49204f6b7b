//! One-dimensional HDG discretization in the affine `(u, û)` formulation.
//!
//! The gradient is eliminated through the lifting operators `l` and `m`, so
//! the bilinear form stays affine in `(κ, ϱ, ν)` and the operator splits as
//! `A(y) = A_0 + Σ_q y_q A_q`. Full-order solves never form `A(y)`; they
//! condense element modes onto the face traces instead.

mod affine;
pub mod basis;
mod discretization;
mod element;
mod mesh;
mod problem;
mod tridiag;

pub use affine::{project, spmm, spmv_acc, AffineSystem};
pub use discretization::{FieldSolution, HdgDiscretization};
pub use element::{lift, ElementOps};
pub use mesh::Mesh1D;
pub use problem::{BoundaryCondition, HdgProblem, OutputFunctional};
pub use tridiag::solve_tridiagonal;
