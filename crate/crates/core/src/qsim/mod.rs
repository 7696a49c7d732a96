//! Dense statevector simulation.
//!
//! Gates are applied in place over amplitude strides, never by building the
//! full `2^L × 2^L` operator. Basis index bit `L-1-q` holds qubit `q`, so qubit
//! `0` is the most significant bit.

pub(crate) mod kernel;
pub mod mat;
mod tangents;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

pub use mat::{Mat2, Mat4};
pub use tangents::{apply_circuit, apply_circuit_with_tangents, CircuitOutput};

use crate::error::{Error, Result};
use crate::pauli::PauliSum;
use crate::C64;

/// Largest register the simulator accepts (~256 MiB of amplitudes).
pub const MAX_QUBITS: usize = 24;

const UNITARY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateVector {
    num_qubits: usize,
    amplitudes: Vec<C64>,
}

fn check_size(num_qubits: usize) -> Result<()> {
    if num_qubits == 0 {
        return Err(Error::EmptyRegister);
    }
    if num_qubits > MAX_QUBITS {
        return Err(Error::RegisterTooLarge(num_qubits));
    }
    Ok(())
}

impl StateVector {
    /// `|0…0⟩` on `num_qubits` qubits.
    pub fn zero_state(num_qubits: usize) -> Result<Self> {
        Self::basis_state(num_qubits, 0)
    }

    pub fn basis_state(num_qubits: usize, index: usize) -> Result<Self> {
        check_size(num_qubits)?;
        let dim = 1usize << num_qubits;
        if index >= dim {
            return Err(Error::DimensionMismatch { expected: dim, actual: index });
        }
        let mut amplitudes = vec![C64::new(0.0, 0.0); dim];
        amplitudes[index] = C64::new(1.0, 0.0);
        Ok(Self { num_qubits, amplitudes })
    }

    /// Wraps raw amplitudes; the length must be `2^num_qubits`. No normalization is applied.
    pub fn from_amplitudes(num_qubits: usize, amplitudes: Vec<C64>) -> Result<Self> {
        check_size(num_qubits)?;
        let dim = 1usize << num_qubits;
        if amplitudes.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, actual: amplitudes.len() });
        }
        Ok(Self { num_qubits, amplitudes })
    }

    pub(crate) fn from_parts_unchecked(num_qubits: usize, amplitudes: Vec<C64>) -> Self {
        debug_assert_eq!(amplitudes.len(), 1 << num_qubits);
        Self { num_qubits, amplitudes }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<C64> {
        self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn normalize(&mut self) {
        let n = self.norm_sqr().sqrt();
        if n > 0.0 {
            self.amplitudes.iter_mut().for_each(|a| *a /= n);
        }
    }

    pub fn scale(&mut self, factor: C64) {
        self.amplitudes.iter_mut().for_each(|a| *a *= factor);
    }

    fn check_same(&self, other: &StateVector) -> Result<()> {
        if self.num_qubits != other.num_qubits {
            return Err(Error::DimensionMismatch { expected: self.dim(), actual: other.dim() });
        }
        Ok(())
    }

    /// `⟨self|other⟩`, conjugating `self`.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        self.check_same(other)?;
        Ok(kernel::inner(&self.amplitudes, &other.amplitudes))
    }

    pub fn apply_gate(&mut self, gate: &Gate) -> Result<()> {
        gate.check_support(self.num_qubits)?;
        match &gate.matrix {
            GateMatrix::One(m) => kernel::apply_1q(&mut self.amplitudes, self.num_qubits, gate.support[0], m),
            GateMatrix::Two(m) => {
                kernel::apply_2q(&mut self.amplitudes, self.num_qubits, gate.support[0], gate.support[1], m)
            }
        }
        Ok(())
    }

    /// Applies an arbitrary `2^k × 2^k` operator on `qubits` (first listed = most significant).
    /// The operator need not be unitary.
    pub fn apply_local(&mut self, qubits: &[usize], matrix: &DMatrix<C64>) -> Result<()> {
        let dim = 1usize << qubits.len();
        let distinct = qubits.iter().enumerate().all(|(i, q)| !qubits[..i].contains(q));
        if qubits.is_empty() || !distinct || qubits.iter().any(|&q| q >= self.num_qubits) {
            return Err(Error::BadSupport { support: qubits.to_vec(), num_qubits: self.num_qubits });
        }
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::DimensionMismatch { expected: dim, actual: matrix.nrows() });
        }
        kernel::apply_local(&mut self.amplitudes, self.num_qubits, qubits, matrix);
        Ok(())
    }

    /// `O|ψ⟩` for a Pauli sum (no Hermiticity requirement).
    pub fn apply_pauli_sum(&self, op: &PauliSum) -> Result<StateVector> {
        if op.num_qubits() != self.num_qubits {
            return Err(Error::DimensionMismatch { expected: self.num_qubits, actual: op.num_qubits() });
        }
        let mut out = vec![C64::new(0.0, 0.0); self.dim()];
        op.apply_into(&self.amplitudes, &mut out);
        Ok(Self::from_parts_unchecked(self.num_qubits, out))
    }

    /// `⟨ψ|O|ψ⟩` for a Hermitian Pauli sum.
    pub fn expectation(&self, op: &PauliSum) -> Result<f64> {
        let worst = op.max_imaginary_coefficient();
        if worst > 1e-12 {
            return Err(Error::NotHermitian(worst));
        }
        let value = self.inner(&self.apply_pauli_sum(op)?)?;
        debug_assert!(value.im.abs() < 1e-10 * (1.0 + value.re.abs()), "imaginary residue {}", value.im);
        Ok(value.re)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GateMatrix {
    One(Mat2),
    Two(Mat4),
}

/// A one- or two-qubit unitary with its support. Unitarity is checked at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    support: Vec<usize>,
    matrix: GateMatrix,
}

impl Gate {
    pub fn single(qubit: usize, matrix: Mat2) -> Result<Self> {
        let err = mat::unitarity_error(&matrix);
        if err > UNITARY_TOL {
            return Err(Error::NotUnitary(err));
        }
        Ok(Self { support: vec![qubit], matrix: GateMatrix::One(matrix) })
    }

    /// Two-qubit gate; `q1` indexes the most significant bit of the 4×4 basis.
    pub fn two(q1: usize, q2: usize, matrix: Mat4) -> Result<Self> {
        if q1 == q2 {
            return Err(Error::BadSupport { support: vec![q1, q2], num_qubits: 0 });
        }
        let err = mat::unitarity_error(&matrix);
        if err > UNITARY_TOL {
            return Err(Error::NotUnitary(err));
        }
        Ok(Self { support: vec![q1, q2], matrix: GateMatrix::Two(matrix) })
    }

    pub fn x(qubit: usize) -> Self {
        Self { support: vec![qubit], matrix: GateMatrix::One(mat::pauli_x()) }
    }

    pub fn cnot(control: usize, target: usize) -> Result<Self> {
        Self::two(control, target, mat::cnot())
    }

    pub fn swap(a: usize, b: usize) -> Result<Self> {
        Self::two(a, b, mat::swap())
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn matrix(&self) -> &GateMatrix {
        &self.matrix
    }

    fn check_support(&self, num_qubits: usize) -> Result<()> {
        if self.support.iter().any(|&q| q >= num_qubits) {
            return Err(Error::BadSupport { support: self.support.clone(), num_qubits });
        }
        Ok(())
    }
}
