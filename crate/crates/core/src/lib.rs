//! Aharonov-Bohm caging in non-Abelian (multi-component) rhombic chains.
//!
//! The crate builds the three-site `A/B/C` chain from four link matrices,
//! computes bands, compact localized eigenstates and caging dynamics, and
//! models a superconducting-resonator realization: parametric tones per
//! coupler, rotating-frame time-dependent couplings and driven-dissipative
//! steady states.
//!
//! Numerical routines are generic over [`Scalar`] (`f64` or `f32`); the
//! `*64` aliases below fix the usual double-precision choice.
//!
//! ```
//! use abcage::{gauge, lattice, Orientation};
//!
//! let links = gauge::u2_model::<f64>();
//! let bands = lattice::band_structure(&links, Orientation::Leftward, 33).unwrap();
//! assert!(lattice::flatness_metric(&bands).iter().all(|s| *s < 1e-10));
//! ```

// `!(x > 0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cqed;
pub mod driven;
pub mod dynamics;
pub mod error;
pub mod gauge;
pub mod lattice;
pub mod linalg;
pub mod ode;
pub mod scalar;

pub use error::{Error, Result};
pub use gauge::{ComplexEntry, InterferenceReport, LinkId, LinkSet, LinkSetDoc, UnitaryMatrix};
pub use lattice::{Boundary, LatticeModel, LatticeSpec, ModeIndex, Orientation, Site};
pub use scalar::{CMatrix, CVector, Scalar, C};

pub type UnitaryMatrix64 = UnitaryMatrix<f64>;
pub type UnitaryMatrix32 = UnitaryMatrix<f32>;
pub type LinkSet64 = LinkSet<f64>;
pub type LinkSet32 = LinkSet<f32>;
pub type LatticeSpec64 = LatticeSpec<f64>;
pub type LatticeSpec32 = LatticeSpec<f32>;
pub type LatticeModel64 = LatticeModel<f64>;
pub type LatticeModel32 = LatticeModel<f32>;
pub type Cles64 = lattice::Cles<f64>;
pub type BandStructure64 = lattice::BandStructure<f64>;
pub type TimeDependentModel64 = cqed::TimeDependentModel<f64>;
pub type DriveSetup64 = driven::DriveSetup<f64>;
pub type SteadyState64 = driven::SteadyState<f64>;
pub type Trajectory64 = driven::Trajectory<f64>;
