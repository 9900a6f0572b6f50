//! Hybrid quantum-classical atomistic simulation toolkit.
//!
//! The pipeline: minimal-basis Gaussian integrals -> restricted Hartree-Fock
//! -> active-space second quantization -> Jordan-Wigner qubit Hamiltonian ->
//! VQE / ADAPT-VQE on an exact statevector simulator (with an
//! exact-diagonalization oracle) -> energies, finite-difference forces and
//! dipoles behind a calculator interface that drives geometry optimization,
//! vibrational analysis, strain decomposition and Langevin dynamics with
//! Gaussian-process active learning.
//!
//! All numeric kernels are generic over [`scalar::Real`]; the aliases below
//! pin the `f64` instantiation used by the CLI and the acceptance suite.

pub mod basis;
pub mod calculator;
pub mod constants;
pub mod ansatz;
pub mod error;
pub mod fci;
pub mod fermion;
pub mod geometry;
pub mod integrals;
pub mod jw;
pub mod linalg;
pub mod md;
pub mod optimizers;
pub mod pauli;
pub mod scalar;
pub mod scf;
pub mod statevector;
pub mod vqe;
pub mod workflows;

pub use error::{Error, Result};

/// Molecular geometry at double precision.
pub type Geometry = geometry::MolecularGeometry<f64>;
