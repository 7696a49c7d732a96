//! Euler-Cartan brick-wall circuits.
//!
//! Each layer is two sublayers of two-qubit blocks on a ring: sublayer A on
//! bonds `(0,1), (2,3), …` and sublayer B on `(1,2), …, (L-1,0)`. A block is a
//! short sequence of elementary rotations `exp(-iθG)`; the parameter vector is
//! laid out layer-major so that an `N`-layer vector is a prefix of the
//! `N+1`-layer one (final single-qubit rotations, when enabled, come last).

use nalgebra::SMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qsim::mat::{self, Mat2, Mat4};
use crate::synthesis::KakFactors;
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub enum BlockLayout {
    /// ZYZ Euler on both wires, then the XX/YY/ZZ entangler, then a global-phase angle.
    #[default]
    #[serde(rename = "COMPRESSED_10")]
    Compressed10,
    /// Full KAK form: Euler pairs before and after the entangler, no phase angle.
    #[serde(rename = "FULL_KAK_15")]
    FullKak15,
}

impl BlockLayout {
    pub fn angles(self) -> usize {
        match self {
            BlockLayout::Compressed10 => 10,
            BlockLayout::FullKak15 => 15,
        }
    }

    /// Generators in application order.
    pub fn generators(self) -> &'static [Generator] {
        use Generator::*;
        match self {
            BlockLayout::Compressed10 => &[Z1, Y1, Z1, Z2, Y2, Z2, XX, YY, ZZ, Phase],
            BlockLayout::FullKak15 => &[Z1, Y1, Z1, Z2, Y2, Z2, XX, YY, ZZ, Z1, Y1, Z1, Z2, Y2, Z2],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Tying {
    /// Every block has its own angles.
    #[default]
    General,
    /// All blocks of a layer (both sublayers) share one set of angles.
    TransR1,
    /// Blocks share angles within each sublayer.
    TransR2,
}

/// Hermitian involutory generator of an elementary rotation; `1`/`2` name the block's wires.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Generator {
    Z1,
    Y1,
    Z2,
    Y2,
    XX,
    YY,
    ZZ,
    Phase,
}

impl Generator {
    fn matrix4(self) -> Mat4 {
        let id = Mat2::identity();
        match self {
            Generator::Z1 => mat::kron(&mat::pauli_z(), &id),
            Generator::Y1 => mat::kron(&mat::pauli_y(), &id),
            Generator::Z2 => mat::kron(&id, &mat::pauli_z()),
            Generator::Y2 => mat::kron(&id, &mat::pauli_y()),
            Generator::XX => mat::kron(&mat::pauli_x(), &mat::pauli_x()),
            Generator::YY => mat::kron(&mat::pauli_y(), &mat::pauli_y()),
            Generator::ZZ => mat::kron(&mat::pauli_z(), &mat::pauli_z()),
            Generator::Phase => Mat4::identity(),
        }
    }

    fn matrix2(self) -> Option<Mat2> {
        match self {
            Generator::Z1 => Some(mat::pauli_z()),
            Generator::Y1 => Some(mat::pauli_y()),
            Generator::Phase => Some(Mat2::identity()),
            _ => None,
        }
    }

    fn export_kind(self) -> &'static str {
        match self {
            Generator::Z1 | Generator::Z2 => "rz",
            Generator::Y1 | Generator::Y2 => "ry",
            Generator::XX => "rxx",
            Generator::YY => "ryy",
            Generator::ZZ => "rzz",
            Generator::Phase => "phase",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rotation {
    pub generator: Generator,
    pub param: usize,
}

impl Rotation {
    pub fn new(generator: Generator, param: usize) -> Self {
        Self { generator, param }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Wires {
    One(usize),
    Two(usize, usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    wires: Wires,
    rotations: Vec<Rotation>,
}

/// A block's unitary and its per-rotation derivatives at a parameter point.
pub enum BlockEval {
    One { qubit: usize, unitary: Mat2, derivatives: Vec<Mat2> },
    Two { qubits: (usize, usize), unitary: Mat4, derivatives: Vec<Mat4> },
}

/// `U = R_n ⋯ R_1` and `∂U/∂θ_k = R_n ⋯ R_{k+1} (-iG_k) R_k ⋯ R_1`.
fn sequence<const N: usize>(
    gens: &[SMatrix<C64, N, N>],
    angles: &[f64],
    want_derivatives: bool,
) -> (SMatrix<C64, N, N>, Vec<SMatrix<C64, N, N>>) {
    let id = SMatrix::<C64, N, N>::identity();
    let rots: Vec<_> = gens
        .iter()
        .zip(angles)
        .map(|(g, &t)| id * C64::from(t.cos()) - g * C64::new(0.0, t.sin()))
        .collect();
    let mut prefix = Vec::with_capacity(rots.len());
    let mut acc = id;
    for r in &rots {
        acc = r * acc;
        prefix.push(acc);
    }
    if !want_derivatives {
        return (acc, Vec::new());
    }
    let mut derivatives = vec![id; rots.len()];
    let mut suffix = id;
    for k in (0..rots.len()).rev() {
        derivatives[k] = suffix * (gens[k] * C64::new(0.0, -1.0)) * prefix[k];
        suffix *= rots[k];
    }
    (acc, derivatives)
}

impl Block {
    pub fn one(qubit: usize, rotations: Vec<Rotation>) -> Self {
        Self { wires: Wires::One(qubit), rotations }
    }

    pub fn two(q1: usize, q2: usize, rotations: Vec<Rotation>) -> Self {
        Self { wires: Wires::Two(q1, q2), rotations }
    }

    pub fn wires(&self) -> Wires {
        self.wires
    }

    pub fn rotations(&self) -> &[Rotation] {
        &self.rotations
    }

    pub fn evaluate(&self, params: &[f64], want_derivatives: bool) -> BlockEval {
        let angles: Vec<f64> = self.rotations.iter().map(|r| params[r.param]).collect();
        match self.wires {
            Wires::One(q) => {
                let gens: Vec<Mat2> = self
                    .rotations
                    .iter()
                    .map(|r| r.generator.matrix2().expect("validated single-qubit generator"))
                    .collect();
                let (unitary, derivatives) = sequence(&gens, &angles, want_derivatives);
                BlockEval::One { qubit: q, unitary, derivatives }
            }
            Wires::Two(q1, q2) => {
                let gens: Vec<Mat4> = self.rotations.iter().map(|r| r.generator.matrix4()).collect();
                let (unitary, derivatives) = sequence(&gens, &angles, want_derivatives);
                BlockEval::Two { qubits: (q1, q2), unitary, derivatives }
            }
        }
    }
}

/// 4×4 unitary of one block for the given angles (slot order = application order).
pub fn block_matrix(layout: BlockLayout, angles: &[f64]) -> Result<Mat4> {
    if angles.len() != layout.angles() {
        return Err(Error::ParamCount { expected: layout.angles(), actual: angles.len() });
    }
    let gens: Vec<Mat4> = layout.generators().iter().map(|g| g.matrix4()).collect();
    Ok(sequence(&gens, angles, false).0)
}

/// FULL_KAK_15 angles reproducing `(A1⊗A2)·N(α,β,γ)·(B1⊗B2)` up to global phase.
pub fn full_kak_angles(kak: &KakFactors) -> Vec<f64> {
    let euler = |m: &Mat2| crate::synthesis::euler_decompose(m).expect("KAK factors are unitary");
    let (b1, b2, a1, a2) = (euler(&kak.b1), euler(&kak.b2), euler(&kak.a1), euler(&kak.a2));
    vec![
        b1.c, b1.b, b1.a, b2.c, b2.b, b2.a, kak.alpha, kak.beta, kak.gamma, a1.c, a1.b, a1.a, a2.c, a2.b, a2.a,
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircuitSpec {
    #[serde(rename = "L")]
    pub num_qubits: usize,
    #[serde(rename = "N")]
    pub layers: usize,
    #[serde(default)]
    pub layout: BlockLayout,
    #[serde(default)]
    pub tying: Tying,
    /// Extra ZYZ rotations on every qubit after the last layer.
    #[serde(default)]
    pub final_rotation_layer: bool,
}

impl CircuitSpec {
    pub fn new(num_qubits: usize, layers: usize, layout: BlockLayout, tying: Tying) -> Self {
        Self { num_qubits, layers, layout, tying, final_rotation_layer: false }
    }

    pub fn params_per_layer(&self) -> usize {
        let k = self.layout.angles();
        match self.tying {
            Tying::General => k * self.num_qubits,
            Tying::TransR1 => k,
            Tying::TransR2 => 2 * k,
        }
    }

    fn final_params(&self) -> usize {
        if !self.final_rotation_layer {
            return 0;
        }
        match self.tying {
            Tying::General => 3 * self.num_qubits,
            Tying::TransR1 => 3,
            Tying::TransR2 => 6,
        }
    }

    pub fn param_count(&self) -> usize {
        self.params_per_layer() * self.layers + self.final_params()
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_qubits < 4 || self.num_qubits % 2 != 0 {
            return Err(Error::InvalidCircuit(format!(
                "brick-wall ring needs an even qubit count of at least 4, got {}",
                self.num_qubits
            )));
        }
        if self.layers == 0 {
            return Err(Error::InvalidCircuit("at least one layer is required".into()));
        }
        if self.num_qubits > crate::qsim::MAX_QUBITS {
            return Err(Error::RegisterTooLarge(self.num_qubits));
        }
        Ok(())
    }

    pub fn with_layers(&self, layers: usize) -> Self {
        Self { layers, ..*self }
    }

    pub fn build(&self) -> Result<Circuit> {
        self.validate()?;
        let l = self.num_qubits;
        let k = self.layout.angles();
        let gens = self.layout.generators();
        let per_layer = self.params_per_layer();
        let mut blocks = Vec::with_capacity(l * self.layers + l);
        for layer in 0..self.layers {
            let layer_base = layer * per_layer;
            let bonds_a = (0..l / 2).map(|i| (2 * i, 2 * i + 1));
            let bonds_b = (0..l / 2).map(|i| (2 * i + 1, (2 * i + 2) % l));
            for (index, (q1, q2)) in bonds_a.chain(bonds_b).enumerate() {
                let sublayer = index / (l / 2);
                let base = layer_base
                    + match self.tying {
                        Tying::General => index * k,
                        Tying::TransR1 => 0,
                        Tying::TransR2 => sublayer * k,
                    };
                let rotations = gens.iter().enumerate().map(|(s, &g)| Rotation::new(g, base + s)).collect();
                blocks.push(Block::two(q1, q2, rotations));
            }
        }
        if self.final_rotation_layer {
            let base = per_layer * self.layers;
            for q in 0..l {
                let offset = match self.tying {
                    Tying::General => 3 * q,
                    Tying::TransR1 => 0,
                    Tying::TransR2 => 3 * (q % 2),
                };
                let rotations = [Generator::Z1, Generator::Y1, Generator::Z1]
                    .iter()
                    .enumerate()
                    .map(|(s, &g)| Rotation::new(g, base + offset + s))
                    .collect();
                blocks.push(Block::one(q, rotations));
            }
        }
        let circuit = Circuit { num_qubits: l, num_params: self.param_count(), blocks, spec: Some(*self) };
        debug_assert!(circuit.blocks.iter().flat_map(|b| &b.rotations).all(|r| r.param < circuit.num_params));
        Ok(circuit)
    }
}

/// A compiled gate program whose parametrized rotations record their parameter index.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    num_qubits: usize,
    num_params: usize,
    blocks: Vec<Block>,
    spec: Option<CircuitSpec>,
}

impl Circuit {
    /// Arbitrary block sequence; parameter count is one past the largest index used.
    pub fn custom(num_qubits: usize, blocks: Vec<Block>) -> Result<Self> {
        for b in &blocks {
            let ok = match b.wires {
                Wires::One(q) => q < num_qubits && b.rotations.iter().all(|r| r.generator.matrix2().is_some()),
                Wires::Two(q1, q2) => q1 < num_qubits && q2 < num_qubits && q1 != q2,
            };
            if !ok {
                return Err(Error::InvalidCircuit(format!("bad block {b:?}")));
            }
        }
        let num_params = blocks.iter().flat_map(|b| &b.rotations).map(|r| r.param + 1).max().unwrap_or(0);
        Ok(Self { num_qubits, num_params, blocks, spec: None })
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn num_params(&self) -> usize {
        self.num_params
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn spec(&self) -> Option<&CircuitSpec> {
        self.spec.as_ref()
    }

    /// Indices of the global-phase slots (COMPRESSED_10 only).
    pub fn phase_params(&self) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .blocks
            .iter()
            .flat_map(|b| &b.rotations)
            .filter(|r| r.generator == Generator::Phase)
            .map(|r| r.param)
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Uniform initial angles.
    pub fn uniform_params(&self, angle: f64) -> Vec<f64> {
        vec![angle; self.num_params]
    }

    /// Warm start for this circuit from the converged angles of a shallower one with the
    /// same layout and tying: existing layers are copied, appended layers get `new_angle`.
    pub fn warm_start(&self, previous: &[f64], previous_layers: usize, new_angle: f64) -> Result<Vec<f64>> {
        let spec = self
            .spec
            .ok_or_else(|| Error::InvalidCircuit("warm start needs a brick-wall circuit".into()))?;
        let prev_spec = spec.with_layers(previous_layers);
        if previous.len() != prev_spec.param_count() || previous_layers > spec.layers {
            return Err(Error::ParamCount { expected: prev_spec.param_count(), actual: previous.len() });
        }
        let per_layer = spec.params_per_layer();
        let kept = per_layer * previous_layers;
        let mut out = Vec::with_capacity(self.num_params);
        out.extend_from_slice(&previous[..kept]);
        out.resize(per_layer * spec.layers, new_angle);
        out.extend_from_slice(&previous[kept..]);
        debug_assert_eq!(out.len(), self.num_params);
        Ok(out)
    }

    pub fn export(&self) -> CircuitExport {
        let gates = self
            .blocks
            .iter()
            .flat_map(|b| {
                b.rotations.iter().map(move |r| {
                    let qubits = match (b.wires, r.generator) {
                        (Wires::One(q), _) => vec![q],
                        (Wires::Two(q1, _), Generator::Z1 | Generator::Y1) => vec![q1],
                        (Wires::Two(_, q2), Generator::Z2 | Generator::Y2) => vec![q2],
                        (Wires::Two(q1, q2), _) => vec![q1, q2],
                    };
                    GateExport { kind: r.generator.export_kind().to_string(), qubits, param_index: r.param }
                })
            })
            .collect();
        CircuitExport {
            num_qubits: self.num_qubits,
            layers: self.spec.map(|s| s.layers),
            layout: self.spec.map(|s| s.layout),
            tying: self.spec.map(|s| s.tying),
            num_params: self.num_params,
            gates,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateExport {
    pub kind: String,
    pub qubits: Vec<usize>,
    pub param_index: usize,
}

/// JSON description `{L, N, layout, tying, gates: [{kind, qubits, param_index}]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircuitExport {
    #[serde(rename = "L")]
    pub num_qubits: usize,
    #[serde(rename = "N")]
    pub layers: Option<usize>,
    pub layout: Option<BlockLayout>,
    pub tying: Option<Tying>,
    pub num_params: usize,
    pub gates: Vec<GateExport>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qsim::{apply_circuit, StateVector};
    use crate::symmetry::SymmetryOp;
    use crate::synthesis::kak_decompose;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn parameter_counts() {
        let count = |l, n, t| CircuitSpec::new(l, n, BlockLayout::Compressed10, t).build().unwrap().num_params();
        assert_eq!(count(8, 2, Tying::General), 160);
        assert_eq!(count(8, 3, Tying::TransR1), 30);
        assert_eq!(count(8, 5, Tying::TransR2), 100);
        for l in [4, 8, 12] {
            for n in 1..=3 {
                assert_eq!(count(l, n, Tying::General), 10 * l * n);
                assert_eq!(count(l, n, Tying::TransR1), 10 * n);
                assert_eq!(count(l, n, Tying::TransR2), 20 * n);
            }
        }
        let mut spec = CircuitSpec::new(6, 2, BlockLayout::FullKak15, Tying::General);
        assert_eq!(spec.param_count(), 180);
        spec.final_rotation_layer = true;
        assert_eq!(spec.param_count(), 198);
    }

    #[test]
    fn invalid_specs_are_rejected() {
        assert!(CircuitSpec::new(5, 1, BlockLayout::Compressed10, Tying::General).build().is_err());
        assert!(CircuitSpec::new(2, 1, BlockLayout::Compressed10, Tying::General).build().is_err());
        assert!(CircuitSpec::new(4, 0, BlockLayout::Compressed10, Tying::TransR2).build().is_err());
    }

    #[test]
    fn layer_structure_is_a_brick_wall() {
        let c = CircuitSpec::new(6, 1, BlockLayout::Compressed10, Tying::General).build().unwrap();
        let bonds: Vec<_> = c.blocks().iter().map(|b| b.wires()).collect();
        let expected = [(0, 1), (2, 3), (4, 5), (1, 2), (3, 4), (5, 0)].map(|(a, b)| Wires::Two(a, b));
        assert_eq!(bonds, expected);
    }

    #[test]
    fn block_matrix_examples() {
        let zero = block_matrix(BlockLayout::Compressed10, &[0.0; 10]).unwrap();
        assert!(mat::max_abs_diff(&zero, &Mat4::identity()) < 1e-15);
        let mut angles = [0.0; 10];
        angles[9] = 0.7;
        let phase = block_matrix(BlockLayout::Compressed10, &angles).unwrap();
        let expected = Mat4::identity() * C64::from_polar(1.0, -0.7);
        assert!(mat::max_abs_diff(&phase, &expected) < 1e-15);
        assert!(block_matrix(BlockLayout::Compressed10, &[0.0; 9]).is_err());

        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..20 {
            let a: Vec<f64> = (0..10).map(|_| rng.gen_range(-3.0..3.0)).collect();
            assert!(mat::unitarity_error(&block_matrix(BlockLayout::Compressed10, &a).unwrap()) < 1e-12);
        }
    }

    #[test]
    fn full_kak_block_reproduces_random_unitaries() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..100 {
            let g = Mat4::from_fn(|_, _| C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5));
            let u = g.qr().q();
            let kak = kak_decompose(&u).unwrap();
            let m = block_matrix(BlockLayout::FullKak15, &full_kak_angles(&kak)).unwrap();
            assert!(mat::phase_aligned_distance(&m, &u) < 1e-10);
        }
    }

    #[test]
    fn trans_r2_circuit_commutes_with_two_site_translation() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for l in [4, 6, 8] {
            let c = CircuitSpec::new(l, 2, BlockLayout::Compressed10, Tying::TransR2).build().unwrap();
            let params: Vec<f64> = (0..c.num_params()).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let t2 = SymmetryOp::translation(l, 2).unwrap();
            let amps = (0..1usize << l).map(|_| C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)).collect();
            let mut psi = StateVector::from_amplitudes(l, amps).unwrap();
            psi.normalize();
            let a = apply_circuit(&c, &params, &t2.apply(&psi).unwrap()).unwrap();
            let b = t2.apply(&apply_circuit(&c, &params, &psi).unwrap()).unwrap();
            let err = a.amplitudes().iter().zip(b.amplitudes()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
            assert!(err < 1e-10, "L={l}: {err:e}");
        }
    }

    #[test]
    fn warm_start_extends_prefix() {
        let spec = CircuitSpec { final_rotation_layer: true, ..CircuitSpec::new(4, 2, BlockLayout::Compressed10, Tying::General) };
        let shallow = spec.build().unwrap();
        let prev: Vec<f64> = (0..shallow.num_params()).map(|i| i as f64).collect();
        let deep = spec.with_layers(3).build().unwrap();
        let warm = deep.warm_start(&prev, 2, 0.01).unwrap();
        assert_eq!(warm.len(), deep.num_params());
        assert_eq!(&warm[..80], &prev[..80]);
        assert!(warm[80..120].iter().all(|&x| x == 0.01));
        assert_eq!(&warm[120..], &prev[80..]);
    }

    #[test]
    fn uniform_start_is_unitary_and_moves_the_state() {
        let c = CircuitSpec::new(8, 2, BlockLayout::Compressed10, Tying::TransR2).build().unwrap();
        let psi = StateVector::zero_state(8).unwrap();
        let out = apply_circuit(&c, &c.uniform_params(0.1), &psi).unwrap();
        assert!((out.norm_sqr() - 1.0).abs() < 1e-12);
        assert!(out.inner(&psi).unwrap().norm() < 1.0 - 1e-6);
    }

    #[test]
    fn export_lists_every_rotation() {
        let c = CircuitSpec::new(4, 1, BlockLayout::Compressed10, Tying::TransR2).build().unwrap();
        let e = c.export();
        assert_eq!(e.gates.len(), 40);
        assert_eq!(e.gates[6].kind, "rxx");
        assert_eq!(e.gates[6].qubits, vec![0, 1]);
        assert_eq!(e.gates[10 * 3 + 3].qubits, vec![0]);
        let json = serde_json::to_string(&e).unwrap();
        assert!(json.contains("\"L\":4") && json.contains("\"TRANS_R2\""));
    }
}
