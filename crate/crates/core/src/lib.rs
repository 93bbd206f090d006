//! Space–time discontinuous Galerkin discretization of the first-order
//! acoustic wave system on tensor-product prismatic meshes.
//!
//! The crate is `no_std` (it only needs `alloc`). Everything here is pure
//! computation: meshing with newest-vertex bisection and corner grading,
//! modal bases and quadrature, slab-wise assembly and direct solution of the
//! DG system, norms and error functionals, and the sparse space–time
//! combination formula. File formats and the command-line driver live in the
//! companion `xtdg` crate.
#![no_std]

extern crate alloc;

pub mod analysis;
pub mod basis_quad;
pub mod dg_assembly;
pub mod error;
pub mod mesh2d;
pub mod problems;
pub mod rates;
pub mod solver;
pub mod spacetime;
pub mod sparse_combo;
pub mod study;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = core::result::Result<T, Error>;
