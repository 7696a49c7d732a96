//! Augmented cost function and its exact gradient.
//!
//! `L(ψ) = ⟨H⟩ + Σ_m λ_m |⟨ψ_m|ψ⟩|² − s·μ·Re⟨T⟩ − μ_C·⟨C⟩`
//!
//! Every term is the expectation of a Hermitian operator `A`, so with
//! `w = A|ψ⟩` the cost is `Re⟨ψ|w⟩` and `∂_i L = 2 Re⟨∂_iψ|w⟩`.

use crate::ansatz::Circuit;
use crate::error::{Error, Result};
use crate::pauli::PauliSum;
use crate::qsim::{apply_circuit_with_tangents, StateVector};
use crate::symmetry::SymmetryOp;
use crate::C64;

/// `−sector·μ·Re⟨T⟩`; `sector = +1` favours the `T = +1` sector.
#[derive(Debug, Clone, PartialEq)]
pub struct TranslationPenalty {
    pub op: SymmetryOp,
    pub sector: f64,
    pub weight: f64,
}

/// `−μ_C·⟨C⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChargePenalty {
    pub op: SymmetryOp,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CostSpec {
    pub hamiltonian: PauliSum,
    pub orthogonal_states: Vec<(StateVector, f64)>,
    pub translation: Option<TranslationPenalty>,
    pub charge: Option<ChargePenalty>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostValue {
    pub cost: f64,
    pub energy: f64,
}

#[derive(Debug, Clone)]
pub struct GradientOutput {
    pub cost: f64,
    pub energy: f64,
    pub gradient: Vec<f64>,
    pub state: StateVector,
    pub tangents: Vec<StateVector>,
}

fn positive(name: &str, value: f64) -> Result<()> {
    if !(value > 0.0 && value.is_finite()) {
        return Err(Error::InvalidConfig(format!("{name} must be positive and finite, got {value}")));
    }
    Ok(())
}

impl CostSpec {
    pub fn new(hamiltonian: PauliSum) -> Self {
        Self { hamiltonian, orthogonal_states: Vec::new(), translation: None, charge: None }
    }

    pub fn num_qubits(&self) -> usize {
        self.hamiltonian.num_qubits()
    }

    /// Adds `λ|⟨ψ_m|ψ⟩|²`; the stored state is normalized.
    pub fn with_orthogonal_state(mut self, mut state: StateVector, weight: f64) -> Result<Self> {
        positive("overlap weight", weight)?;
        self.check_size(&state)?;
        if state.norm_sqr() == 0.0 {
            return Err(Error::InvalidConfig("orthogonal state has zero norm".into()));
        }
        state.normalize();
        self.orthogonal_states.push((state, weight));
        Ok(self)
    }

    pub fn with_translation(mut self, op: SymmetryOp, sector: f64, weight: f64) -> Result<Self> {
        positive("translation weight", weight)?;
        if sector != 1.0 && sector != -1.0 {
            return Err(Error::InvalidConfig(format!("translation sector must be +1 or -1, got {sector}")));
        }
        if !matches!(op, SymmetryOp::Translation { .. }) || op.num_qubits() != self.num_qubits() {
            return Err(Error::InvalidConfig("translation penalty needs a translation on the same register".into()));
        }
        self.translation = Some(TranslationPenalty { op, sector, weight });
        Ok(self)
    }

    pub fn with_charge(mut self, op: SymmetryOp, weight: f64) -> Result<Self> {
        positive("charge weight", weight)?;
        if !op.is_hermitian() || op.num_qubits() != self.num_qubits() {
            return Err(Error::InvalidConfig("charge penalty needs a Hermitian operator on the same register".into()));
        }
        self.charge = Some(ChargePenalty { op, weight });
        Ok(self)
    }

    fn check_size(&self, state: &StateVector) -> Result<()> {
        if state.num_qubits() != self.num_qubits() {
            return Err(Error::DimensionMismatch { expected: self.num_qubits(), actual: state.num_qubits() });
        }
        Ok(())
    }

    /// `(A|ψ⟩, ⟨H⟩)`.
    fn weighted_action(&self, state: &StateVector) -> Result<(Vec<C64>, f64)> {
        self.check_size(state)?;
        let psi = state.amplitudes();
        let mut w = vec![C64::new(0.0, 0.0); psi.len()];
        self.hamiltonian.apply_into(psi, &mut w);
        let energy = crate::qsim::kernel::inner(psi, &w).re;
        for (m, lambda) in &self.orthogonal_states {
            let overlap = m.inner(state)?;
            let f = overlap * *lambda;
            w.iter_mut().zip(m.amplitudes()).for_each(|(x, a)| *x += f * a);
        }
        if let Some(t) = &self.translation {
            let f = C64::from(-0.5 * t.sector * t.weight);
            let fwd = t.op.apply(state)?;
            let back = t.op.apply_adjoint(state)?;
            for ((x, a), b) in w.iter_mut().zip(fwd.amplitudes()).zip(back.amplitudes()) {
                *x += f * (a + b);
            }
        }
        if let Some(c) = &self.charge {
            let f = C64::from(-c.weight);
            let applied = c.op.apply(state)?;
            w.iter_mut().zip(applied.amplitudes()).for_each(|(x, a)| *x += f * a);
        }
        Ok((w, energy))
    }

    pub fn evaluate(&self, state: &StateVector) -> Result<f64> {
        Ok(self.evaluate_parts(state)?.cost)
    }

    pub fn evaluate_parts(&self, state: &StateVector) -> Result<CostValue> {
        let (w, energy) = self.weighted_action(state)?;
        let cost = crate::qsim::kernel::inner(state.amplitudes(), &w).re;
        Ok(CostValue { cost, energy })
    }

    pub fn evaluate_params(&self, circuit: &Circuit, params: &[f64], input: &StateVector) -> Result<CostValue> {
        let state = crate::qsim::apply_circuit(circuit, params, input)?;
        self.evaluate_parts(&state)
    }

    /// Cost, energy and the exact gradient; tangents are handed back for the metric.
    pub fn gradient(&self, circuit: &Circuit, params: &[f64], input: &StateVector) -> Result<GradientOutput> {
        let out = apply_circuit_with_tangents(circuit, params, input, true)?;
        let tangents = out.tangents.expect("tangents were requested");
        let state = out.state;
        let (w, energy) = self.weighted_action(&state)?;
        let cost = crate::qsim::kernel::inner(state.amplitudes(), &w).re;
        let gradient = tangents.iter().map(|t| 2.0 * crate::qsim::kernel::inner(t.amplitudes(), &w).re).collect();
        Ok(GradientOutput { cost, energy, gradient, state, tangents })
    }
}
