//! Symmetry operators and symmetry-related observables.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::models::{potts_site_qubits, singlet_projector, triplet_isometry};
use crate::pauli::{Pauli, PauliSum, PauliTerm};
use crate::qsim::StateVector;
use crate::C64;

#[derive(Debug, Clone, PartialEq)]
pub enum SymmetryOp {
    /// Cyclic shift of qubit `j` to `j + shift (mod L)`.
    Translation { num_qubits: usize, shift: usize },
    /// Per Potts site: fixes `|0⟩`, swaps `|1⟩ ↔ |2⟩`, identity on the singlet.
    PottsCharge { num_sites: usize },
    /// `Q = Σ_j Z_j`.
    U1Charge { num_qubits: usize },
    /// Projector on the product of per-site triplet subspaces (the physical Potts sector).
    TripletProjector { num_sites: usize },
}

fn potts_register(num_sites: usize) -> Result<usize> {
    if num_sites == 0 {
        return Err(Error::InvalidModel("Potts register needs at least one site".into()));
    }
    if 2 * num_sites > crate::qsim::MAX_QUBITS {
        return Err(Error::RegisterTooLarge(2 * num_sites));
    }
    Ok(2 * num_sites)
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 { a } else { gcd(b, a % b) }
}

/// Per-site 4×4 charge-conjugation matrix.
pub fn potts_charge_local() -> DMatrix<C64> {
    let v = triplet_isometry();
    let mut swap3 = DMatrix::zeros(3, 3);
    swap3[(0, 0)] = C64::from(1.0);
    swap3[(1, 2)] = C64::from(1.0);
    swap3[(2, 1)] = C64::from(1.0);
    &v * swap3 * v.adjoint() + singlet_projector()
}

impl SymmetryOp {
    pub fn translation(num_qubits: usize, shift: usize) -> Result<Self> {
        if shift == 0 {
            return Err(Error::InvalidModel("translation shift must be positive".into()));
        }
        if num_qubits == 0 || num_qubits > crate::qsim::MAX_QUBITS {
            return Err(Error::RegisterTooLarge(num_qubits));
        }
        Ok(SymmetryOp::Translation { num_qubits, shift: shift % num_qubits })
    }

    pub fn potts_charge(num_sites: usize) -> Result<Self> {
        potts_register(num_sites)?;
        Ok(SymmetryOp::PottsCharge { num_sites })
    }

    pub fn u1_charge(num_qubits: usize) -> Result<Self> {
        if num_qubits == 0 || num_qubits > crate::qsim::MAX_QUBITS {
            return Err(Error::RegisterTooLarge(num_qubits));
        }
        Ok(SymmetryOp::U1Charge { num_qubits })
    }

    pub fn triplet_projector(num_sites: usize) -> Result<Self> {
        potts_register(num_sites)?;
        Ok(SymmetryOp::TripletProjector { num_sites })
    }

    pub fn num_qubits(&self) -> usize {
        match *self {
            SymmetryOp::Translation { num_qubits, .. } | SymmetryOp::U1Charge { num_qubits } => num_qubits,
            SymmetryOp::PottsCharge { num_sites } | SymmetryOp::TripletProjector { num_sites } => 2 * num_sites,
        }
    }

    pub fn label(&self) -> String {
        match self {
            SymmetryOp::Translation { shift, .. } => format!("T{shift}"),
            SymmetryOp::PottsCharge { .. } => "C".into(),
            SymmetryOp::U1Charge { .. } => "Q".into(),
            SymmetryOp::TripletProjector { .. } => "triplet".into(),
        }
    }

    pub fn is_hermitian(&self) -> bool {
        match *self {
            SymmetryOp::Translation { num_qubits, shift } => shift == 0 || 2 * shift == num_qubits,
            _ => true,
        }
    }

    /// Pauli form, where one exists compactly.
    pub fn as_pauli_sum(&self) -> Option<PauliSum> {
        match *self {
            SymmetryOp::U1Charge { num_qubits } => PauliSum::from_terms(
                num_qubits,
                (0..num_qubits).map(|q| PauliTerm::single(num_qubits, q, Pauli::Z, 1.0)).collect(),
            )
            .ok(),
            _ => None,
        }
    }

    /// Per-site local matrix for the site-factorized operators.
    pub fn local_matrix(&self) -> Option<DMatrix<C64>> {
        match self {
            SymmetryOp::PottsCharge { .. } => Some(potts_charge_local()),
            SymmetryOp::TripletProjector { .. } => {
                let v = triplet_isometry();
                Some(&v * v.adjoint())
            }
            _ => None,
        }
    }

    fn check(&self, state: &StateVector) -> Result<()> {
        if state.num_qubits() != self.num_qubits() {
            return Err(Error::DimensionMismatch { expected: self.num_qubits(), actual: state.num_qubits() });
        }
        Ok(())
    }

    fn translate(amps: &[C64], num_qubits: usize, shift: usize) -> Vec<C64> {
        let mask = (1usize << num_qubits) - 1;
        let mut out = vec![C64::new(0.0, 0.0); amps.len()];
        if shift == 0 {
            out.copy_from_slice(amps);
            return out;
        }
        for (b, a) in amps.iter().enumerate() {
            let moved = ((b >> shift) | (b << (num_qubits - shift))) & mask;
            out[moved] = *a;
        }
        out
    }

    pub fn apply(&self, state: &StateVector) -> Result<StateVector> {
        self.check(state)?;
        let n = state.num_qubits();
        match *self {
            SymmetryOp::Translation { num_qubits, shift } => {
                Ok(StateVector::from_parts_unchecked(n, Self::translate(state.amplitudes(), num_qubits, shift)))
            }
            SymmetryOp::U1Charge { .. } => state.apply_pauli_sum(&self.as_pauli_sum().expect("U1 charge is a Pauli sum")),
            SymmetryOp::PottsCharge { num_sites } | SymmetryOp::TripletProjector { num_sites } => {
                let local = self.local_matrix().expect("site-factorized operator");
                let mut out = state.clone();
                for s in 0..num_sites {
                    out.apply_local(&potts_site_qubits(s, num_sites), &local)?;
                }
                Ok(out)
            }
        }
    }

    pub fn apply_adjoint(&self, state: &StateVector) -> Result<StateVector> {
        match *self {
            SymmetryOp::Translation { num_qubits, shift } => {
                self.check(state)?;
                let back = (num_qubits - shift) % num_qubits;
                Ok(StateVector::from_parts_unchecked(num_qubits, Self::translate(state.amplitudes(), num_qubits, back)))
            }
            _ => self.apply(state),
        }
    }

    /// `⟨ψ|O|ψ⟩` (complex for non-Hermitian `O`).
    pub fn expectation(&self, state: &StateVector) -> Result<C64> {
        state.inner(&self.apply(state)?)
    }

    /// Snaps a measured expectation to the nearest allowed eigenvalue.
    pub fn snap(&self, value: C64) -> C64 {
        match *self {
            SymmetryOp::Translation { num_qubits, shift } => {
                let order = num_qubits / gcd(num_qubits, shift.max(1));
                let step = std::f64::consts::TAU / order as f64;
                let k = (value.arg() / step).round();
                C64::from_polar(1.0, k * step)
            }
            SymmetryOp::PottsCharge { .. } => C64::from(if value.re >= 0.0 { 1.0 } else { -1.0 }),
            SymmetryOp::U1Charge { .. } => C64::from(value.re.round()),
            SymmetryOp::TripletProjector { .. } => C64::from(if value.re >= 0.5 { 1.0 } else { 0.0 }),
        }
    }
}

/// Expected number of Potts domain walls `Σ_j ⟨1 − Π_eq(j, j+1)⟩` on a periodic chain.
pub fn domain_wall_count(state: &StateVector, num_sites: usize) -> Result<f64> {
    let l = potts_register(num_sites)?;
    if state.num_qubits() != l {
        return Err(Error::DimensionMismatch { expected: l, actual: state.num_qubits() });
    }
    let v = triplet_isometry();
    let mut equal = DMatrix::<C64>::zeros(16, 16);
    for a in 0..3 {
        let col = v.column(a).kronecker(&v.column(a));
        equal += &col * col.adjoint();
    }
    let mut walls = 0.0;
    for j in 0..num_sites {
        let [a, b] = potts_site_qubits(j, num_sites);
        let [c, d] = potts_site_qubits(j + 1, num_sites);
        let mut projected = state.clone();
        projected.apply_local(&[a, b, c, d], &equal)?;
        walls += 1.0 - state.inner(&projected)?.re;
    }
    Ok(walls)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::tests_support::potts_product;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_state(n: usize, rng: &mut impl Rng) -> StateVector {
        let amps = (0..1usize << n).map(|_| C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)).collect();
        let mut s = StateVector::from_amplitudes(n, amps).unwrap();
        s.normalize();
        s
    }

    fn max_diff(a: &StateVector, b: &StateVector) -> f64 {
        a.amplitudes().iter().zip(b.amplitudes()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
    }

    #[test]
    fn translation_direction() {
        let t = SymmetryOp::translation(4, 1).unwrap();
        let s = StateVector::basis_state(4, 0b1000).unwrap();
        assert_eq!(t.apply(&s).unwrap(), StateVector::basis_state(4, 0b0100).unwrap());
        let back = t.apply_adjoint(&t.apply(&s).unwrap()).unwrap();
        assert_eq!(back, s);
        assert!(SymmetryOp::translation(4, 0).is_err());
    }

    #[test]
    fn uniform_superposition_is_translation_invariant() {
        let n = 5;
        let amp = C64::from(1.0 / (32f64).sqrt());
        let s = StateVector::from_amplitudes(n, vec![amp; 32]).unwrap();
        let t = SymmetryOp::translation(n, 1).unwrap();
        let e = t.expectation(&s).unwrap();
        assert!((e - C64::from(1.0)).norm() < 1e-14);
        assert_eq!(t.snap(e), C64::from(1.0));
    }

    #[test]
    fn potts_charge_action() {
        let c = SymmetryOp::potts_charge(2).unwrap();
        let one = potts_product(&[1, 0]);
        let two = potts_product(&[2, 0]);
        assert!(max_diff(&c.apply(&one).unwrap(), &two) < 1e-14);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..10 {
            let psi = random_state(4, &mut rng);
            let twice = c.apply(&c.apply(&psi).unwrap()).unwrap();
            assert!(max_diff(&twice, &psi) < 1e-12);
        }
        let local = potts_charge_local();
        assert!((&local - local.adjoint()).iter().all(|z| z.norm() < 1e-15));
    }

    #[test]
    fn domain_walls() {
        assert!(domain_wall_count(&potts_product(&[0, 0, 0, 0]), 4).unwrap().abs() < 1e-12);
        assert!((domain_wall_count(&potts_product(&[0, 0, 1, 2]), 4).unwrap() - 3.0).abs() < 1e-12);
        assert!((domain_wall_count(&potts_product(&[0, 1, 0, 1]), 4).unwrap() - 4.0).abs() < 1e-12);
        assert!(domain_wall_count(&StateVector::zero_state(7).unwrap(), 4).is_err());
    }

    #[test]
    fn u1_charge_and_snapping() {
        let q = SymmetryOp::u1_charge(3).unwrap();
        let s = StateVector::basis_state(3, 0b101).unwrap();
        assert!((q.expectation(&s).unwrap() - C64::from(-1.0)).norm() < 1e-15);
        let t = SymmetryOp::translation(8, 2).unwrap();
        assert!((t.snap(C64::from_polar(0.99, 1.5)) - C64::new(0.0, 1.0)).norm() < 1e-12);
    }
}
