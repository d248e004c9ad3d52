//! Lowest-order weak Galerkin (WG) finite element discretization of the
//! Stokes problem on the unit square/cube, with block Schur complement
//! preconditioned MINRES/GMRES solvers and spectral verification of the
//! eigenvalue and residual bounds that justify the preconditioners.
//!
//! The crate is organized along the pipeline:
//!
//! * [`mesh`] — structured simplicial meshes with facet topology,
//! * [`quad`] — quadrature rules on simplices and facets,
//! * [`wg_core`] — closed-form local WG operators on one simplex,
//! * [`assembly`] — global sparse blocks `A`, `B°`, `M_p°` and right-hand sides,
//! * [`system`] — pressure-pinning regularization and the rescaled operator,
//! * [`sparse`] — CSR storage, RCM ordering, incomplete Cholesky,
//! * [`krylov`] — MINRES, restarted GMRES, PCG and the block preconditioners,
//! * [`spectral`] — inf-sup constant, spectra and theoretical bound evaluation,
//! * [`experiments`] — manufactured-solution studies behind the CLI.

// Index loops over parallel fixed-size geometry arrays are the clearest
// form for the local-operator math.
#![allow(clippy::needless_range_loop)]

pub mod assembly;
pub mod error;
pub mod experiments;
pub mod krylov;
pub mod mesh;
pub mod quad;
pub mod sparse;
pub mod spectral;
pub mod system;
pub mod wg_core;

pub use error::{Error, Result};
