//! Quantum natural gradient: geometric tensor, Fubini–Study metric and the
//! regularized update `θ ← θ − η (g + εI)⁻¹ ∇L`.

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::qsim::StateVector;
use crate::C64;

pub const DEFAULT_REGULARIZATION: f64 = 1e-6;

fn check(state: &StateVector, tangents: &[StateVector]) -> Result<()> {
    for t in tangents {
        if t.num_qubits() != state.num_qubits() {
            return Err(Error::DimensionMismatch { expected: state.num_qubits(), actual: t.num_qubits() });
        }
    }
    Ok(())
}

/// `G_ij = ⟨∂_iψ|∂_jψ⟩ − ⟨∂_iψ|ψ⟩⟨ψ|∂_jψ⟩`.
pub fn geometric_tensor(state: &StateVector, tangents: &[StateVector]) -> Result<DMatrix<C64>> {
    check(state, tangents)?;
    let p = tangents.len();
    if p == 0 {
        return Ok(DMatrix::zeros(0, 0));
    }
    let dim = state.dim();
    let t = DMatrix::from_fn(dim, p, |r, c| tangents[c].amplitudes()[r]);
    let gram = t.adjoint() * &t;
    let psi = DVector::from_column_slice(state.amplitudes());
    let berry = t.adjoint() * psi; // ⟨∂_iψ|ψ⟩
    let mut g = gram - &berry * berry.adjoint();
    // exact Hermitian symmetrization of rounding noise
    for i in 0..p {
        g[(i, i)].im = 0.0;
        for j in i + 1..p {
            let avg = (g[(i, j)] + g[(j, i)].conj()) * 0.5;
            g[(i, j)] = avg;
            g[(j, i)] = avg.conj();
        }
    }
    Ok(g)
}

/// Real part of the geometric tensor.
pub fn fubini_study_metric(state: &StateVector, tangents: &[StateVector]) -> Result<DMatrix<f64>> {
    Ok(geometric_tensor(state, tangents)?.map(|z| z.re))
}

#[derive(Debug, Clone, Serialize)]
pub struct MetricReport {
    #[serde(skip)]
    pub metric: DMatrix<f64>,
    pub regularization: f64,
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
    /// `λ_max / (λ_min + ε)`.
    pub condition: f64,
}

impl MetricReport {
    pub fn new(metric: DMatrix<f64>, regularization: f64) -> Self {
        let (lo, hi) = if metric.nrows() == 0 {
            (0.0, 0.0)
        } else {
            let eig = SymmetricEigen::new(metric.clone()).eigenvalues;
            (eig.min(), eig.max())
        };
        let condition = hi.max(0.0) / (lo + regularization).max(f64::MIN_POSITIVE);
        Self { metric, regularization, min_eigenvalue: lo, max_eigenvalue: hi, condition }
    }
}

/// `(g + εI)⁻¹ grad` by Cholesky factorization.
pub fn natural_direction(gradient: &[f64], metric: &DMatrix<f64>, regularization: f64) -> Result<Vec<f64>> {
    let p = gradient.len();
    if metric.nrows() != p || metric.ncols() != p {
        return Err(Error::DimensionMismatch { expected: p, actual: metric.nrows() });
    }
    if p == 0 {
        return Ok(Vec::new());
    }
    let mut a = metric.clone();
    for i in 0..p {
        a[(i, i)] += regularization;
    }
    let chol = Cholesky::new(a).ok_or(Error::Factorization(regularization))?;
    let x = chol.solve(&DVector::from_column_slice(gradient));
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Factorization(regularization));
    }
    Ok(x.iter().copied().collect())
}

pub fn qng_step(
    params: &[f64],
    gradient: &[f64],
    metric: &DMatrix<f64>,
    learning_rate: f64,
    regularization: f64,
) -> Result<Vec<f64>> {
    if params.len() != gradient.len() {
        return Err(Error::ParamCount { expected: params.len(), actual: gradient.len() });
    }
    if !(learning_rate > 0.0) {
        return Err(Error::InvalidConfig(format!("learning rate must be positive, got {learning_rate}")));
    }
    let dir = natural_direction(gradient, metric, regularization)?;
    Ok(params.iter().zip(dir).map(|(t, d)| t - learning_rate * d).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ansatz::{Block, BlockLayout, Circuit, CircuitSpec, Generator, Rotation, Tying};
    use crate::qsim::apply_circuit_with_tangents;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn metric_of(circuit: &Circuit, params: &[f64]) -> DMatrix<f64> {
        let out = apply_circuit_with_tangents(circuit, params, &StateVector::zero_state(circuit.num_qubits()).unwrap(), true)
            .unwrap();
        fubini_study_metric(&out.state, &out.tangents.unwrap()).unwrap()
    }

    #[test]
    fn single_ry_has_unit_metric() {
        let c = Circuit::custom(1, vec![Block::one(0, vec![Rotation::new(Generator::Y1, 0)])]).unwrap();
        for theta in [0.0, 0.3, 1.1, -2.0] {
            let g = metric_of(&c, &[theta]);
            assert!((g[(0, 0)] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn empty_circuit_gives_empty_metric() {
        let s = StateVector::zero_state(2).unwrap();
        assert_eq!(geometric_tensor(&s, &[]).unwrap().shape(), (0, 0));
        assert_eq!(qng_step(&[], &[], &DMatrix::zeros(0, 0), 0.1, 1e-6).unwrap(), Vec::<f64>::new());
    }

    #[test]
    fn phase_slot_rows_vanish() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let c = CircuitSpec::new(4, 2, BlockLayout::Compressed10, Tying::General).build().unwrap();
        let params: Vec<f64> = (0..c.num_params()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let g = metric_of(&c, &params);
        for i in c.phase_params() {
            for j in 0..c.num_params() {
                assert!(g[(i, j)].abs() < 1e-10 && g[(j, i)].abs() < 1e-10);
            }
        }
    }

    #[test]
    fn metric_is_positive_semidefinite_and_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for layers in 1..=3 {
            for tying in [Tying::General, Tying::TransR1, Tying::TransR2] {
                let c = CircuitSpec::new(4, layers, BlockLayout::Compressed10, tying).build().unwrap();
                let params: Vec<f64> = (0..c.num_params()).map(|_| rng.gen_range(-3.0..3.0)).collect();
                let g = metric_of(&c, &params);
                assert!((&g - g.transpose()).amax() < 1e-12);
                let lo = SymmetricEigen::new(g).eigenvalues.min();
                assert!(lo >= -1e-10, "{lo}");
            }
        }
    }

    #[test]
    fn identity_metric_step() {
        let next = qng_step(&[0.0, 0.0], &[1.0, -2.0], &DMatrix::identity(2, 2), 0.1, 0.0).unwrap();
        assert!((next[0] + 0.1).abs() < 1e-15 && (next[1] - 0.2).abs() < 1e-15);
    }

    #[test]
    fn zero_gradient_is_a_fixed_point() {
        let p = [0.3, -0.7, 1.2];
        assert_eq!(qng_step(&p, &[0.0; 3], &DMatrix::identity(3, 3), 0.5, 1e-6).unwrap(), p.to_vec());
    }

    #[test]
    fn duplicated_parameter_is_regularized() {
        // two untied slots carrying the same generator back to back: metric rank one
        let c = Circuit::custom(
            1,
            vec![Block::one(0, vec![Rotation::new(Generator::Y1, 0), Rotation::new(Generator::Y1, 1)])],
        )
        .unwrap();
        let g = metric_of(&c, &[0.2, 0.2]);
        assert!(SymmetricEigen::new(g.clone()).eigenvalues.min().abs() < 1e-12);
        let next = qng_step(&[0.2, 0.2], &[1.0, 1.0], &g, 0.1, 1e-6).unwrap();
        assert!(next.iter().all(|x| x.is_finite()));
    }

    #[test]
    fn singular_without_regularization_is_reported() {
        let g = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        assert!(matches!(natural_direction(&[1.0, 0.0], &g, 0.0), Err(Error::Factorization(_))));
        let neg = DMatrix::from_row_slice(1, 1, &[-1.0]);
        assert!(matches!(natural_direction(&[1.0], &neg, 1e-6), Err(Error::Factorization(_))));
    }

    #[test]
    fn natural_direction_is_a_descent_direction() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let c = CircuitSpec::new(4, 2, BlockLayout::Compressed10, Tying::TransR2).build().unwrap();
        let params: Vec<f64> = (0..c.num_params()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let g = metric_of(&c, &params);
        for _ in 0..20 {
            let grad: Vec<f64> = (0..c.num_params()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let d = natural_direction(&grad, &g, 1e-6).unwrap();
            assert!(grad.iter().zip(&d).map(|(a, b)| a * b).sum::<f64>() >= 0.0);
        }
    }

    #[test]
    fn global_phase_parameter_leaves_other_entries_alone() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let spec = CircuitSpec::new(4, 1, BlockLayout::FullKak15, Tying::TransR2);
        let base = spec.build().unwrap();
        let mut blocks = base.blocks().to_vec();
        let extra = base.num_params();
        blocks.push(Block::two(0, 1, vec![Rotation::new(Generator::Phase, extra)]));
        let with_phase = Circuit::custom(4, blocks).unwrap();
        let params: Vec<f64> = (0..extra).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let mut extended = params.clone();
        extended.push(0.4);
        let g0 = metric_of(&base, &params);
        let g1 = metric_of(&with_phase, &extended);
        for i in 0..extra {
            for j in 0..extra {
                assert!((g0[(i, j)] - g1[(i, j)]).abs() < 1e-10);
            }
            assert!(g1[(i, extra)].abs() < 1e-10);
        }
    }
}
