//! Quantum Otto engine whose working medium is the maximum-spin Dicke sector
//! of the anisotropic Lipkin-Meshkov-Glick model.
//!
//! The crate is organised bottom-up:
//!
//! * [`spin`]: collective spin matrices and the LMG Hamiltonian in the
//!   `S_z` basis, with extensive (Kac-rescaled) and non-extensive coupling.
//! * [`eigen`]: dense real-symmetric eigensolver (Householder + implicit QL).
//! * [`thermo`]: Gibbs populations and the four-stroke Otto cycle.
//! * [`perturbation`]: first-order density-matrix perturbation theory for the
//!   cycle and the interference part of the work output.
//! * [`phase_space`]: exact and semiclassical `x`/`y` transition
//!   probabilities, Kramers-band geometry on the Bloch sphere, and the
//!   squeezed-vacuum photon-number demo.
//! * [`sweep`]: sweeps over the number of spins and the returns analysis.
//!
//! All energies and temperatures are in units of the cold-stroke `x` coupling.

pub mod eigen;
pub mod error;
pub mod perturbation;
pub mod phase_space;
pub mod spin;
pub mod sum;
pub mod sweep;
pub mod thermo;

pub use eigen::{eigendecompose, Spectrum};
pub use error::{Error, Result};
pub use spin::{CouplingPair, RealSymMatrix, ScalingMode, SpinAxis, SpinSector};
pub use thermo::{CycleResult, EngineParams, ThermalPopulations};
