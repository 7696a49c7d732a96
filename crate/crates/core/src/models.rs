//! Benchmark lattice Hamiltonians as Pauli sums.
//!
//! * Ising: periodic chain, `-Σ X_j X_{j+1} - g Σ Z_j - h Σ X_j`.
//! * Potts: three-state clock model, each spin stored in the triplet subspace of
//!   two qubits (`|0⟩=|↑↑⟩`, `|1⟩=(|↑↓⟩+|↓↑⟩)/√2`, `|2⟩=|↓↓⟩`). The neighbour
//!   coupling uses the diagonal clock matrix and the transverse term the shift
//!   matrix. Embedded operators vanish on the singlet, which can be lifted by an
//!   optional penalty.
//! * Schwinger: open chain, staggered fermions after Jordan-Wigner, with the
//!   electric-field energy expanded into identity, `Z` and `ZZ` terms.
//!
//! `|↑⟩` is the computational `|0⟩`.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pauli::{Pauli, PauliSum, PauliTerm};
use crate::symmetry::SymmetryOp;
use crate::C64;

pub fn build_ising(num_qubits: usize, g: f64, h: f64) -> Result<PauliSum> {
    check_size(num_qubits, 2)?;
    let l = num_qubits;
    let mut terms = Vec::with_capacity(3 * l);
    for j in 0..l {
        terms.push(PauliTerm::pair(l, j, Pauli::X, (j + 1) % l, Pauli::X, -1.0));
        terms.push(PauliTerm::single(l, j, Pauli::Z, -g));
        terms.push(PauliTerm::single(l, j, Pauli::X, -h));
    }
    PauliSum::from_terms(l, terms)
}

fn check_size(num_qubits: usize, min: usize) -> Result<()> {
    if num_qubits < min {
        return Err(Error::InvalidModel(format!("need at least {min} qubits, got {num_qubits}")));
    }
    if num_qubits > crate::qsim::MAX_QUBITS {
        return Err(Error::RegisterTooLarge(num_qubits));
    }
    Ok(())
}

/// Isometry `C³ → C⁴` onto the two-qubit triplet (columns are the encoded Potts states).
pub fn triplet_isometry() -> DMatrix<C64> {
    let mut v = DMatrix::zeros(4, 3);
    v[(0, 0)] = C64::from(1.0);
    v[(1, 1)] = C64::from(FRAC_1_SQRT_2);
    v[(2, 1)] = C64::from(FRAC_1_SQRT_2);
    v[(3, 2)] = C64::from(1.0);
    v
}

/// `diag(1, ω, ω²)` with `ω = e^{2πi/3}`.
pub fn clock_matrix() -> DMatrix<C64> {
    DMatrix::from_fn(3, 3, |r, c| if r == c { C64::from_polar(1.0, 2.0 * PI * r as f64 / 3.0) } else { C64::from(0.0) })
}

/// `|k⟩ → |k+1 mod 3⟩`.
pub fn shift_matrix() -> DMatrix<C64> {
    DMatrix::from_fn(3, 3, |r, c| if r == (c + 1) % 3 { C64::from(1.0) } else { C64::from(0.0) })
}

/// `V O V†`: a 3×3 Potts operator as a 4×4 two-qubit operator, zero on the singlet.
pub fn embed(op: &DMatrix<C64>) -> DMatrix<C64> {
    let v = triplet_isometry();
    &v * op * v.adjoint()
}

/// Projector on the singlet `(|↑↓⟩−|↓↑⟩)/√2`.
pub fn singlet_projector() -> DMatrix<C64> {
    let v = triplet_isometry();
    DMatrix::identity(4, 4) - &v * v.adjoint()
}

pub(crate) fn potts_site_qubits(site: usize, num_sites: usize) -> [usize; 2] {
    let s = site % num_sites;
    [2 * s, 2 * s + 1]
}

pub fn build_potts(num_sites: usize, g: f64, h: f64, singlet_penalty: f64) -> Result<PauliSum> {
    if num_sites < 2 {
        return Err(Error::InvalidModel(format!("Potts chain needs at least 2 sites, got {num_sites}")));
    }
    let l = 2 * num_sites;
    check_size(l, 4)?;
    let clock = embed(&clock_matrix());
    let clock_dag = embed(&clock_matrix().adjoint());
    let shift = embed(&shift_matrix());
    let singlet = singlet_projector();

    let mut total = PauliSum::zero(l);
    for j in 0..num_sites {
        let here = potts_site_qubits(j, num_sites);
        let next = potts_site_qubits(j + 1, num_sites);
        let bond = &PauliSum::from_local_matrix(l, &here, &clock)? * &PauliSum::from_local_matrix(l, &next, &clock_dag)?;
        let field = &PauliSum::from_local_matrix(l, &here, &shift)?.scale(C64::from(g))
            + &PauliSum::from_local_matrix(l, &here, &clock)?.scale(C64::from(h));
        let a = &bond + &field;
        let hermitian = &a + &a.adjoint();
        total = &total + &hermitian.scale(C64::from(-1.0));
        if singlet_penalty != 0.0 {
            total = &total + &PauliSum::from_local_matrix(l, &here, &singlet)?.scale(C64::from(singlet_penalty));
        }
    }
    Ok(total)
}

pub fn build_schwinger(num_qubits: usize, m: f64, g: f64) -> Result<PauliSum> {
    check_size(num_qubits, 2)?;
    let l = num_qubits;
    // site j (1-based) lives on qubit j-1; P_j = (1 + (-1)^j Z_j)/2
    let parity = |j: usize| if j % 2 == 0 { 1.0 } else { -1.0 };
    let projector = |j: usize| -> PauliSum {
        &PauliSum::identity(l, 0.5) + &PauliSum::from_terms(l, vec![PauliTerm::single(l, j - 1, Pauli::Z, 0.5 * parity(j))]).unwrap()
    };

    let mut hopping = Vec::new();
    for q in 0..l - 1 {
        hopping.push(PauliTerm::pair(l, q, Pauli::X, q + 1, Pauli::X, 0.5));
        hopping.push(PauliTerm::pair(l, q, Pauli::Y, q + 1, Pauli::Y, 0.5));
    }
    let mut total = PauliSum::from_terms(l, hopping)?;
    for j in 1..=l {
        total = &total + &projector(j).scale(C64::from(m));
    }
    let mut field = PauliSum::zero(l);
    for j in 1..l {
        field = &field + &projector(j).scale(C64::from(parity(j)));
        total = &total + &(&field * &field).scale(C64::from(0.5 * g * g));
    }
    Ok(total)
}

fn default_singlet_penalty() -> f64 {
    1.0
}

/// One benchmark Hamiltonian instance. `L` always counts qubits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ModelSpec {
    Ising {
        #[serde(rename = "L")]
        num_qubits: usize,
        g: f64,
        h: f64,
    },
    Potts {
        #[serde(rename = "L")]
        num_qubits: usize,
        g: f64,
        h: f64,
        #[serde(default = "default_singlet_penalty")]
        singlet_penalty: f64,
    },
    Schwinger {
        #[serde(rename = "L")]
        num_qubits: usize,
        m: f64,
        g: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    Periodic,
    Open,
}

impl ModelSpec {
    pub fn num_qubits(&self) -> usize {
        match *self {
            ModelSpec::Ising { num_qubits, .. }
            | ModelSpec::Potts { num_qubits, .. }
            | ModelSpec::Schwinger { num_qubits, .. } => num_qubits,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ModelSpec::Ising { .. } => "ising",
            ModelSpec::Potts { .. } => "potts",
            ModelSpec::Schwinger { .. } => "schwinger",
        }
    }

    pub fn boundary(&self) -> Boundary {
        match self {
            ModelSpec::Schwinger { .. } => Boundary::Open,
            _ => Boundary::Periodic,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let values: &[f64] = match self {
            ModelSpec::Ising { g, h, .. } => &[*g, *h],
            ModelSpec::Potts { g, h, singlet_penalty, .. } => &[*g, *h, *singlet_penalty],
            ModelSpec::Schwinger { m, g, .. } => &[*m, *g],
        };
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidModel("couplings must be finite".into()));
        }
        if let ModelSpec::Potts { num_qubits, singlet_penalty, .. } = self {
            if num_qubits % 2 != 0 {
                return Err(Error::InvalidModel(format!("Potts encoding needs an even register, got {num_qubits}")));
            }
            if *singlet_penalty < 0.0 {
                return Err(Error::InvalidModel("singlet penalty must be non-negative".into()));
            }
        }
        Ok(())
    }

    pub fn hamiltonian(&self) -> Result<PauliSum> {
        self.validate()?;
        match *self {
            ModelSpec::Ising { num_qubits, g, h } => build_ising(num_qubits, g, h),
            ModelSpec::Potts { num_qubits, g, h, singlet_penalty } => build_potts(num_qubits / 2, g, h, singlet_penalty),
            ModelSpec::Schwinger { num_qubits, m, g } => build_schwinger(num_qubits, m, g),
        }
    }

    /// Commuting observables used to label exact eigenstates.
    pub fn symmetries(&self) -> Result<Vec<SymmetryOp>> {
        self.validate()?;
        let l = self.num_qubits();
        Ok(match self {
            ModelSpec::Ising { .. } => vec![SymmetryOp::translation(l, 1)?],
            ModelSpec::Potts { .. } => vec![
                SymmetryOp::translation(l, 2)?,
                SymmetryOp::potts_charge(l / 2)?,
                SymmetryOp::triplet_projector(l / 2)?,
            ],
            ModelSpec::Schwinger { .. } => vec![SymmetryOp::u1_charge(l)?],
        })
    }
}

/// Encoded Potts product state from labels in {0,1,2}.
pub fn potts_product_state(labels: &[usize]) -> Result<crate::qsim::StateVector> {
    if labels.iter().any(|&a| a > 2) {
        return Err(Error::InvalidModel("Potts labels must be 0, 1 or 2".into()));
    }
    let v = triplet_isometry();
    let mut amps = vec![C64::from(1.0)];
    for &a in labels {
        let col: Vec<C64> = (0..4).map(|r| v[(r, a)]).collect();
        amps = amps.iter().flat_map(|x| col.iter().map(move |y| x * y)).collect();
    }
    crate::qsim::StateVector::from_amplitudes(2 * labels.len(), amps)
}
