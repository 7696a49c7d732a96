//! Circuit evaluation with exact tangent states.
//!
//! Every elementary gate in a compiled circuit is either parameter-free or a
//! rotation `exp(-iθG)` with `G² = I`, so `∂/∂θ` inserts `-iG` at the rotation's
//! site. Contributions are propagated forward block by block; a tied parameter
//! accumulates the sum over all of its occurrences.

use super::kernel;
use super::StateVector;
use crate::ansatz::{BlockEval, Circuit};
use crate::error::{Error, Result};
use crate::C64;

#[derive(Debug, Clone)]
pub struct CircuitOutput {
    pub state: StateVector,
    /// One unnormalized `|∂ψ/∂θ_i⟩` per parameter, when requested.
    pub tangents: Option<Vec<StateVector>>,
}

fn check(circuit: &Circuit, params: &[f64], input: &StateVector) -> Result<()> {
    if params.len() != circuit.num_params() {
        return Err(Error::ParamCount { expected: circuit.num_params(), actual: params.len() });
    }
    if input.num_qubits() != circuit.num_qubits() {
        return Err(Error::DimensionMismatch { expected: circuit.num_qubits(), actual: input.num_qubits() });
    }
    Ok(())
}

pub fn apply_circuit(circuit: &Circuit, params: &[f64], input: &StateVector) -> Result<StateVector> {
    Ok(apply_circuit_with_tangents(circuit, params, input, false)?.state)
}

pub fn apply_circuit_with_tangents(
    circuit: &Circuit,
    params: &[f64],
    input: &StateVector,
    want_tangents: bool,
) -> Result<CircuitOutput> {
    check(circuit, params, input)?;
    let n = circuit.num_qubits();
    let dim = input.dim();
    let mut psi = input.amplitudes().to_vec();
    let mut tangents: Vec<Option<Vec<C64>>> = vec![None; if want_tangents { params.len() } else { 0 }];

    for block in circuit.blocks() {
        let eval = block.evaluate(params, want_tangents);
        match &eval {
            BlockEval::One { qubit, unitary, derivatives } => {
                if want_tangents {
                    for t in tangents.iter_mut().flatten() {
                        kernel::apply_1q(t, n, *qubit, unitary);
                    }
                    for (rot, d) in block.rotations().iter().zip(derivatives) {
                        let t = tangents[rot.param].get_or_insert_with(|| vec![C64::new(0.0, 0.0); dim]);
                        kernel::accumulate_1q(&psi, t, n, *qubit, d);
                    }
                }
                kernel::apply_1q(&mut psi, n, *qubit, unitary);
            }
            BlockEval::Two { qubits: (q1, q2), unitary, derivatives } => {
                if want_tangents {
                    for t in tangents.iter_mut().flatten() {
                        kernel::apply_2q(t, n, *q1, *q2, unitary);
                    }
                    for (rot, d) in block.rotations().iter().zip(derivatives) {
                        let t = tangents[rot.param].get_or_insert_with(|| vec![C64::new(0.0, 0.0); dim]);
                        kernel::accumulate_2q(&psi, t, n, *q1, *q2, d);
                    }
                }
                kernel::apply_2q(&mut psi, n, *q1, *q2, unitary);
            }
        }
    }

    let tangents = want_tangents.then(|| {
        tangents
            .into_iter()
            .map(|t| StateVector::from_parts_unchecked(n, t.unwrap_or_else(|| vec![C64::new(0.0, 0.0); dim])))
            .collect()
    });
    Ok(CircuitOutput { state: StateVector::from_parts_unchecked(n, psi), tangents })
}
