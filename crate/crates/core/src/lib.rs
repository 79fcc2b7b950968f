//! Dissipative continuous-time quantum walks on a one-dimensional bipartite
//! lattice with pure loss on the B sublattice.
//!
//! The crate covers four layers:
//!
//! * [`model`]: the open-boundary real-space Hamiltonian and its Bloch,
//!   rotated and non-Bloch 2x2 counterparts, with the basis and sign
//!   conventions fixed in one place.
//! * [`dynamics`]: non-unitary evolution of a walker started on an A site and
//!   the per-cell decay-probability distribution, computed either in closed
//!   form from the eigenbasis or by fixed-step time integration.
//! * [`spectrum`]: open-boundary eigensystems, `v` scans and edge-state
//!   classification.
//! * [`topology`]: Bloch (half-integer) and non-Bloch winding numbers on the
//!   generalized Brillouin zone.
//!
//! Everything numerical is generic over [`Real`] (`f32` or `f64`); the
//! double-precision aliases below are what the command-line tool uses.

// Validation uses `!(x > 0)` so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod eigen;
pub mod error;
pub mod matrix;
pub mod model;
pub mod scalar;
pub mod spectrum;
pub mod topology;

pub use error::{Error, Result};
pub use matrix::ComplexMatrix;
pub use model::{BasisIndex, LatticeParams, Sublattice};
pub use scalar::{Real, C};

pub type Complex64 = C<f64>;
pub type Matrix64 = matrix::ComplexMatrix<f64>;
pub type Params64 = model::LatticeParams<f64>;
pub type Params32 = model::LatticeParams<f32>;
pub type State64 = dynamics::StateVector<f64>;
pub type DecayRecord64 = dynamics::DecayRecord<f64>;
pub type EvolveConfig64 = dynamics::EvolveConfig<f64>;
pub type Spectrum64 = spectrum::SpectrumResult<f64>;
pub type EdgeCriteria64 = spectrum::EdgeCriteria<f64>;
pub type Winding64 = topology::WindingResult<f64>;
