//! Clifford-diluted unitary designs on a desk-sized simulator.
//!
//! The crate is layered bottom-up:
//!
//! - [`f2`]: packed linear algebra over the two-element field and the symplectic form.
//! - [`pauli`], [`clifford`], [`stabilizer`]: Pauli arithmetic, signed symplectic
//!   tableaux and stabilizer groups of dense states.
//! - [`dense`]: statevectors, Haar sampling and Bell-difference sampling.
//! - [`commutant`]: Pauli monomials, Weingarten tables and twirls.
//! - [`ensembles`], [`moments`]: unitary ensembles and moment-distance experiments.
//! - [`attack`]: magic compression and the Bell-difference distinguisher.


pub mod attack;
pub mod clifford;
pub mod commutant;

pub mod dense;
pub mod ensembles;
pub mod error;
pub mod f2;
pub mod moments;

pub mod pauli;
pub mod stabilizer;
pub mod stats;

pub type C64 = num_complex::Complex<f64>;
pub type CMat = nalgebra::DMatrix<C64>;

pub use clifford::{enumerate_clifford_group, random_clifford, CliffordOp};
pub use error::{Error, Result};
pub use f2::{BinMat, BinVec};
pub use pauli::{chi, pauli_mul, PauliString};
pub use stats::Estimate;
