//! Variational eigensolver built on universal Euler-Cartan brick-wall circuits.
//!
//! The crate simulates the quantum side exactly (dense statevectors with exact
//! tangent states), optimizes circuit angles with the quantum natural gradient
//! and checks every result against an exact-diagonalization oracle.
//!
//! Qubit `0` is the most significant bit of a basis index throughout.

pub mod ansatz;
pub mod driver;
pub mod ed;
pub mod error;
pub mod io;
pub mod linalg;
pub mod models;
pub mod objective;
pub mod pauli;
pub mod qng;
pub mod qsim;
pub mod symmetry;
pub mod synthesis;

// links the system OpenBLAS that provides LAPACK
extern crate openblas_src;

pub use num_complex::Complex64 as C64;

pub use ansatz::{BlockLayout, Circuit, CircuitSpec, Tying};
pub use driver::{EigenResult, RunConfig};
pub use ed::SpectrumReport;
pub use error::{Error, Result};
pub use models::ModelSpec;
pub use objective::CostSpec;
pub use pauli::{Pauli, PauliSum, PauliTerm};
pub use qsim::{Gate, StateVector};
pub use symmetry::SymmetryOp;
