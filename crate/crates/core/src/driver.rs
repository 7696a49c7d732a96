//! Outer optimization loop: QNG iterations at fixed depth, layer growth with warm
//! start, and sequential excited-state sweeps through orthogonality penalties.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ansatz::{BlockLayout, Circuit, CircuitSpec, Tying};
use crate::error::{Error, Result};
use crate::models::ModelSpec;
use crate::objective::CostSpec;
use crate::qng;
use crate::qsim::StateVector;
use crate::symmetry::SymmetryOp;

fn default_theta0() -> f64 {
    0.1
}
fn default_tolerance() -> f64 {
    5e-4
}
fn default_max_iters() -> usize {
    10_000
}
fn default_one() -> usize {
    1
}
fn default_regularization() -> f64 {
    qng::DEFAULT_REGULARIZATION
}
fn default_sector() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitTemplate {
    #[serde(default)]
    pub layout: BlockLayout,
    #[serde(default)]
    pub tying: Tying,
    #[serde(default)]
    pub final_rotation_layer: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Penalties {
    /// Orthogonality weight λ for previously found states; estimated from the spectral width when absent.
    #[serde(default)]
    pub overlap: Option<f64>,
    /// Translation weight μ.
    #[serde(default)]
    pub translation: Option<f64>,
    /// Targeted translation eigenvalue, +1 or -1.
    #[serde(default = "default_sector")]
    pub sector: f64,
    /// Potts charge weight μ_C.
    #[serde(default)]
    pub charge: Option<f64>,
}

impl Default for Penalties {
    fn default() -> Self {
        Self { overlap: None, translation: None, sector: 1.0, charge: None }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialState {
    #[default]
    Zero,
    /// Computational basis state written MSB (qubit 0) first, e.g. `"0101"`.
    Bits(String),
}

impl InitialState {
    pub fn build(&self, num_qubits: usize) -> Result<StateVector> {
        match self {
            InitialState::Zero => StateVector::zero_state(num_qubits),
            InitialState::Bits(bits) => {
                if bits.len() != num_qubits || !bits.chars().all(|c| c == '0' || c == '1') {
                    return Err(Error::InvalidConfig(format!("initial bits {bits:?} do not describe {num_qubits} qubits")));
                }
                StateVector::basis_state(num_qubits, usize::from_str_radix(bits, 2).expect("checked binary"))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub name: Option<String>,
    pub model: ModelSpec,
    #[serde(default)]
    pub circuit: CircuitTemplate,
    pub learning_rate: f64,
    #[serde(default = "default_theta0")]
    pub theta0: f64,
    #[serde(default = "default_tolerance")]
    pub tol_iter: f64,
    #[serde(default = "default_tolerance")]
    pub tol_layer: f64,
    /// Compare successive costs relative to their magnitude instead of absolutely.
    #[serde(default)]
    pub relative_convergence: bool,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
    #[serde(default = "default_one")]
    pub min_layers: usize,
    /// Defaults to `3L`.
    #[serde(default)]
    pub max_layers: Option<usize>,
    #[serde(default = "default_regularization")]
    pub regularization: f64,
    #[serde(default)]
    pub penalties: Penalties,
    /// Number of states to find: 1 for the ground state, `n+1` to reach the n-th excitation.
    #[serde(default = "default_one")]
    pub states: usize,
    #[serde(default)]
    pub initial_state: InitialState,
    #[serde(default)]
    pub seed: u64,
    /// Half-width of a seeded uniform perturbation of the initial angles (0 disables it).
    #[serde(default)]
    pub init_jitter: f64,
}

impl RunConfig {
    pub fn new(model: ModelSpec, circuit: CircuitTemplate, learning_rate: f64) -> Self {
        Self {
            name: None,
            model,
            circuit,
            learning_rate,
            theta0: default_theta0(),
            tol_iter: default_tolerance(),
            tol_layer: default_tolerance(),
            relative_convergence: false,
            max_iters: default_max_iters(),
            min_layers: 1,
            max_layers: None,
            regularization: default_regularization(),
            penalties: Penalties::default(),
            states: 1,
            initial_state: InitialState::Zero,
            seed: 0,
            init_jitter: 0.0,
        }
    }

    pub fn max_layers(&self) -> usize {
        self.max_layers.unwrap_or(3 * self.model.num_qubits())
    }

    pub fn circuit_spec(&self, layers: usize) -> CircuitSpec {
        CircuitSpec {
            num_qubits: self.model.num_qubits(),
            layers,
            layout: self.circuit.layout,
            tying: self.circuit.tying,
            final_rotation_layer: self.circuit.final_rotation_layer,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.model.validate()?;
        let bad = |what: &str| Err(Error::InvalidConfig(what.to_string()));
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return bad("learning_rate must be positive");
        }
        if !(self.tol_iter > 0.0) || !(self.tol_layer > 0.0) {
            return bad("tolerances must be positive");
        }
        if !self.theta0.is_finite() || !(self.init_jitter >= 0.0) {
            return bad("theta0 must be finite and init_jitter non-negative");
        }
        if !(self.regularization >= 0.0) {
            return bad("regularization must be non-negative");
        }
        if self.min_layers == 0 || self.max_layers() < self.min_layers {
            return bad("need 1 <= min_layers <= max_layers");
        }
        if self.states == 0 {
            return bad("states must be at least 1");
        }
        if self.penalties.sector != 1.0 && self.penalties.sector != -1.0 {
            return bad("penalties.sector must be +1 or -1");
        }
        for w in [self.penalties.overlap, self.penalties.translation, self.penalties.charge].into_iter().flatten() {
            if !(w > 0.0 && w.is_finite()) {
                return bad("penalty weights must be positive");
            }
        }
        if self.penalties.translation.is_some() && self.translation_op()?.is_none() {
            return bad("translation penalty needs a periodic model");
        }
        if self.penalties.charge.is_some() && !matches!(self.model, ModelSpec::Potts { .. }) {
            return bad("charge penalty is defined for the Potts model only");
        }
        self.circuit_spec(self.min_layers).validate()?;
        self.initial_state.build(self.model.num_qubits())?;
        Ok(())
    }

    /// One-site translation of the model (two qubits per site for Potts).
    pub fn translation_op(&self) -> Result<Option<SymmetryOp>> {
        let l = self.model.num_qubits();
        Ok(match self.model {
            ModelSpec::Ising { .. } => Some(SymmetryOp::translation(l, 1)?),
            ModelSpec::Potts { .. } => Some(SymmetryOp::translation(l, 2)?),
            ModelSpec::Schwinger { .. } => None,
        })
    }

    /// Cost with the configured symmetry penalties and no stored states.
    pub fn base_cost(&self) -> Result<CostSpec> {
        let mut cost = CostSpec::new(self.model.hamiltonian()?);
        if let Some(mu) = self.penalties.translation {
            let t = self.translation_op()?.ok_or_else(|| Error::InvalidConfig("no translation for this model".into()))?;
            cost = cost.with_translation(t, self.penalties.sector, mu)?;
        }
        if let Some(mu) = self.penalties.charge {
            cost = cost.with_charge(SymmetryOp::potts_charge(self.model.num_qubits() / 2)?, mu)?;
        }
        Ok(cost)
    }

    /// `λ` for orthogonality penalties: configured, else twice the spectral width, else 10.
    pub fn overlap_weight(&self) -> f64 {
        if let Some(w) = self.penalties.overlap {
            return w;
        }
        self.model
            .hamiltonian()
            .and_then(|h| crate::ed::spectral_range(&h))
            .map(|(lo, hi)| 2.0 * (hi - lo))
            .ok()
            .filter(|w| *w > 0.0 && w.is_finite())
            .unwrap_or(10.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Converged,
    MaxIterations,
    LayerConverged,
    MaxLayers,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub state: usize,
    pub layers: usize,
    pub iteration: usize,
    pub cost: f64,
    pub energy: f64,
    pub grad_norm: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DepthSummary {
    pub layers: usize,
    pub iterations: usize,
    pub cost: f64,
    pub energy: f64,
    pub termination: Termination,
}

#[derive(Debug, Clone, Serialize)]
pub struct EigenResult {
    pub state_index: usize,
    pub energy: f64,
    pub cost: f64,
    pub layers: usize,
    pub params: Vec<f64>,
    pub trace: Vec<TraceRow>,
    pub depth_summaries: Vec<DepthSummary>,
    pub termination: Termination,
    #[serde(skip)]
    pub state: StateVector,
}

/// Best iterate of one fixed-depth optimization.
#[derive(Debug, Clone)]
pub struct DepthOutcome {
    pub params: Vec<f64>,
    pub cost: f64,
    pub energy: f64,
    pub state: StateVector,
    pub iterations: usize,
    pub termination: Termination,
    pub trace: Vec<TraceRow>,
}

pub type Observer<'a> = &'a mut dyn FnMut(&TraceRow);

fn converged(config: &RunConfig, previous: f64, current: f64, tol: f64) -> bool {
    let diff = (current - previous).abs();
    if config.relative_convergence {
        diff < tol * current.abs().max(f64::MIN_POSITIVE)
    } else {
        diff < tol
    }
}

/// QNG iterations until successive costs differ by less than `tol_iter` or `max_iters`
/// updates were made. Returns the lowest-cost iterate seen.
#[allow(clippy::too_many_arguments)]
pub fn optimize_fixed_depth(
    config: &RunConfig,
    cost: &CostSpec,
    circuit: &Circuit,
    initial_params: Vec<f64>,
    input: &StateVector,
    state_index: usize,
    observer: Observer<'_>,
) -> Result<DepthOutcome> {
    if initial_params.len() != circuit.num_params() {
        return Err(Error::ParamCount { expected: circuit.num_params(), actual: initial_params.len() });
    }
    let layers = circuit.spec().map_or(0, |s| s.layers);
    let mut params = initial_params;
    let mut previous: Option<f64> = None;
    let mut best: Option<(f64, f64, Vec<f64>, StateVector)> = None;
    let mut trace = Vec::new();
    let mut iteration = 0;
    let termination = loop {
        let g = cost.gradient(circuit, &params, input)?;
        let grad_norm = g.gradient.iter().map(|x| x * x).sum::<f64>().sqrt();
        let row = TraceRow { state: state_index, layers, iteration, cost: g.cost, energy: g.energy, grad_norm };
        observer(&row);
        trace.push(row);
        if !g.cost.is_finite() || !grad_norm.is_finite() {
            return Err(Error::Diverged { layers, iteration });
        }
        if best.as_ref().map_or(true, |b| g.cost < b.0) {
            best = Some((g.cost, g.energy, params.clone(), g.state.clone()));
        }
        if previous.is_some_and(|p| converged(config, p, g.cost, config.tol_iter)) {
            break Termination::Converged;
        }
        if iteration >= config.max_iters {
            break Termination::MaxIterations;
        }
        previous = Some(g.cost);
        let metric = qng::fubini_study_metric(&g.state, &g.tangents)?;
        params = qng::qng_step(&params, &g.gradient, &metric, config.learning_rate, config.regularization)?;
        iteration += 1;
    };
    let (cost_value, energy, params, state) = best.expect("at least one evaluation");
    Ok(DepthOutcome { params, cost: cost_value, energy, state, iterations: iteration, termination, trace })
}

fn initial_params(config: &RunConfig, circuit: &Circuit) -> Vec<f64> {
    let mut p = circuit.uniform_params(config.theta0);
    if config.init_jitter > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        p.iter_mut().for_each(|x| *x += rng.gen_range(-config.init_jitter..=config.init_jitter));
    }
    p
}

/// Depth schedule `N_min, N_min+1, …` with warm starts, for a given cost.
pub fn grow_layers_with_cost(
    config: &RunConfig,
    cost: &CostSpec,
    state_index: usize,
    observer: Observer<'_>,
) -> Result<EigenResult> {
    config.validate()?;
    let input = config.initial_state.build(config.model.num_qubits())?;
    let mut layers = config.min_layers;
    let mut circuit = config.circuit_spec(layers).build()?;
    let mut params = initial_params(config, &circuit);
    let mut summaries: Vec<DepthSummary> = Vec::new();
    let mut trace = Vec::new();
    loop {
        let out = optimize_fixed_depth(config, cost, &circuit, params, &input, state_index, observer)?;
        trace.extend_from_slice(&out.trace);
        let previous = summaries.last().map(|s| s.cost);
        summaries.push(DepthSummary {
            layers,
            iterations: out.iterations,
            cost: out.cost,
            energy: out.energy,
            termination: out.termination,
        });
        let outer = if previous.is_some_and(|p| converged(config, p, out.cost, config.tol_layer)) {
            Some(Termination::LayerConverged)
        } else if layers >= config.max_layers() {
            Some(Termination::MaxLayers)
        } else {
            None
        };
        if let Some(termination) = outer {
            return Ok(EigenResult {
                state_index,
                energy: out.energy,
                cost: out.cost,
                layers,
                params: out.params,
                trace,
                depth_summaries: summaries,
                termination,
                state: out.state,
            });
        }
        let next = config.circuit_spec(layers + 1).build()?;
        params = next.warm_start(&out.params, layers, config.theta0 / 10.0)?;
        circuit = next;
        layers += 1;
    }
}

/// Ground state (or the lowest state of the penalized sector) with layer growth.
pub fn grow_layers(config: &RunConfig, observer: Observer<'_>) -> Result<EigenResult> {
    grow_layers_with_cost(config, &config.base_cost()?, 0, observer)
}

/// The `n_states` lowest states, each found with the previous ones penalized.
pub fn solve_spectrum(config: &RunConfig, n_states: usize, observer: Observer<'_>) -> Result<Vec<EigenResult>> {
    config.validate()?;
    if n_states == 0 {
        return Err(Error::InvalidConfig("n_states must be at least 1".into()));
    }
    let base = config.base_cost()?;
    let lambda = if n_states > 1 { config.overlap_weight() } else { 0.0 };
    let mut results: Vec<EigenResult> = Vec::with_capacity(n_states);
    for k in 0..n_states {
        let mut cost = base.clone();
        for r in &results {
            cost = cost.with_orthogonal_state(r.state.clone(), lambda)?;
        }
        results.push(grow_layers_with_cost(config, &cost, k, observer)?);
    }
    Ok(results)
}
