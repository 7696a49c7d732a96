//! Run orchestration and result files: JSONL trace, JSON summary, CSV plot data.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::driver::{self, DepthSummary, EigenResult, RunConfig, Termination, TraceRow};
use crate::ed::{self, SpectrumReport};
use crate::error::{Error, Result};
use crate::models::ModelSpec;
use crate::symmetry::domain_wall_count;
use crate::C64;

pub const SEED_ENV: &str = "EC_VQE_SEED";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Parses a config, applies the seed override (if given) and validates it.
pub fn parse_config(text: &str, seed_override: Option<&str>) -> Result<RunConfig> {
    let mut config: RunConfig = serde_json::from_str(text)?;
    if let Some(seed) = seed_override {
        config.seed = seed
            .trim()
            .parse()
            .map_err(|_| Error::InvalidConfig(format!("{SEED_ENV} must be an unsigned integer, got {seed:?}")))?;
    }
    config.validate()?;
    Ok(config)
}

/// Reads a config file, honouring `EC_VQE_SEED`.
pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)?;
    parse_config(&text, std::env::var(SEED_ENV).ok().as_deref())
}

/// One JSONL trace line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    #[serde(flatten)]
    pub row: TraceRow,
    pub wall_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateSummary {
    pub index: usize,
    pub energy: f64,
    pub cost: f64,
    pub layers: usize,
    pub iterations: usize,
    pub termination: Termination,
    pub reference: Option<f64>,
    /// Position of the reference state in the full spectrum.
    pub reference_index: Option<usize>,
    pub relative_error: Option<f64>,
    /// Raw expectation values `[re, im]` of the model's symmetry operators.
    pub labels: BTreeMap<String, [f64; 2]>,
    pub domain_walls: Option<f64>,
    pub depth_summaries: Vec<DepthSummary>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MassRatio {
    pub vqe: f64,
    pub exact: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub version: String,
    pub seed: u64,
    pub config: RunConfig,
    pub states: Vec<StateSummary>,
    /// `(E₂−E₀)/(E₁−E₀)` when at least three states were computed.
    pub mass_ratio: Option<MassRatio>,
    pub max_pairwise_overlap: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct RunRecord {
    pub summary: RunSummary,
    pub results: Vec<EigenResult>,
}

/// Sector the run is steered into by its penalties, as `(label, eigenvalue)` pairs.
pub fn target_sector(config: &RunConfig) -> Result<Vec<(String, C64)>> {
    let mut sector = Vec::new();
    if config.penalties.translation.is_some() {
        if let Some(t) = config.translation_op()? {
            sector.push((t.label(), C64::from(config.penalties.sector)));
        }
    }
    if let ModelSpec::Potts { .. } = config.model {
        // a tied circuit acting on |0…0⟩ never leaves the site-translation-invariant sector
        let tied = config.circuit.tying != crate::ansatz::Tying::General;
        if sector.is_empty() && tied && config.initial_state == driver::InitialState::Zero {
            sector.push(("T2".to_string(), C64::from(1.0)));
        }
        if config.penalties.charge.is_some() {
            sector.push(("C".to_string(), C64::from(1.0)));
        }
        sector.push(("triplet".to_string(), C64::from(1.0)));
    }
    Ok(sector)
}

/// Exact `(global index, energy)` of the lowest `n` states in `sector`.
pub fn reference_states(model: &ModelSpec, sector: &[(String, C64)], n: usize) -> Result<Vec<(usize, f64)>> {
    let h = model.hamiltonian()?;
    let l = model.num_qubits();
    let dim = 1usize << l;
    let mut k = if l <= 10 { dim } else { (n + 2).min(dim) };
    loop {
        let mut report: SpectrumReport = if l <= 10 {
            ed::dense_spectrum(&h, k)?
        } else {
            ed::iterative_extremal(&h, k, None, ed::LanczosOptions::default())?
        };
        let complete = report.eigenvalues.len() >= dim;
        let usable = if complete {
            report.eigenvalues.len()
        } else {
            // the highest cluster may be cut off by the window
            report.clusters.last().map_or(0, |c| c[0])
        };
        let indices: Vec<usize> = if sector.is_empty() {
            (0..usable).collect()
        } else {
            ed::classify_sectors(&mut report, &model.symmetries()?)?;
            report.sector_indices(sector).into_iter().filter(|&i| i < usable).collect()
        };
        if indices.len() >= n || complete {
            return Ok(indices.into_iter().take(n).map(|i| (i, report.eigenvalues[i])).collect());
        }
        k = (2 * k + 4).min(dim);
    }
}

fn state_labels(model: &ModelSpec, state: &crate::qsim::StateVector) -> Result<BTreeMap<String, [f64; 2]>> {
    let mut out = BTreeMap::new();
    for op in model.symmetries()? {
        let v = op.expectation(state)?;
        out.insert(op.label(), [v.re, v.im]);
    }
    Ok(out)
}

/// Runs the driver and attaches exact references and observables.
pub fn run_experiment(config: &RunConfig, observer: driver::Observer<'_>) -> Result<RunRecord> {
    config.validate()?;
    let results = driver::solve_spectrum(config, config.states, observer)?;
    let sector = target_sector(config)?;
    let refs = reference_states(&config.model, &sector, config.states).ok();
    let mut states = Vec::with_capacity(results.len());
    for (i, r) in results.iter().enumerate() {
        let reference = refs.as_ref().and_then(|v| v.get(i)).copied();
        let domain_walls = match config.model {
            ModelSpec::Potts { num_qubits, .. } => Some(domain_wall_count(&r.state, num_qubits / 2)?),
            _ => None,
        };
        states.push(StateSummary {
            index: i,
            energy: r.energy,
            cost: r.cost,
            layers: r.layers,
            iterations: r.depth_summaries.iter().map(|d| d.iterations).sum(),
            termination: r.termination,
            reference: reference.map(|x| x.1),
            reference_index: reference.map(|x| x.0),
            relative_error: reference.map(|(_, e)| (r.energy - e).abs() / e.abs()),
            labels: state_labels(&config.model, &r.state)?,
            domain_walls,
            depth_summaries: r.depth_summaries.clone(),
        });
    }
    let mass_ratio = (states.len() >= 3).then(|| {
        let ratio = |e: [f64; 3]| (e[2] - e[0]) / (e[1] - e[0]);
        MassRatio {
            vqe: ratio([states[0].energy, states[1].energy, states[2].energy]),
            exact: match (states[0].reference, states[1].reference, states[2].reference) {
                (Some(a), Some(b), Some(c)) => Some(ratio([a, b, c])),
                _ => None,
            },
        }
    });
    let mut overlap: Option<f64> = None;
    for i in 0..results.len() {
        for j in 0..i {
            let o = results[i].state.inner(&results[j].state)?.norm_sqr();
            overlap = Some(overlap.map_or(o, |m: f64| m.max(o)));
        }
    }
    let summary = RunSummary {
        version: VERSION.to_string(),
        seed: config.seed,
        config: config.clone(),
        states,
        mass_ratio,
        max_pairwise_overlap: overlap,
    };
    Ok(RunRecord { summary, results })
}

/// Output file names for a run called `name` inside `dir`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutputPaths {
    pub trace: PathBuf,
    pub summary: PathBuf,
    pub plot: PathBuf,
}

impl OutputPaths {
    pub fn new(dir: &Path, name: &str) -> Self {
        Self {
            trace: dir.join(format!("{name}.trace.jsonl")),
            summary: dir.join(format!("{name}.summary.json")),
            plot: dir.join(format!("{name}.plot.csv")),
        }
    }
}

/// Streams trace rows so a partial trace survives an aborted run.
pub struct TraceWriter {
    out: BufWriter<File>,
    start: std::time::Instant,
    last_ms: f64,
}

impl TraceWriter {
    pub fn create(path: &Path) -> Result<Self> {
        Ok(Self { out: BufWriter::new(File::create(path)?), start: std::time::Instant::now(), last_ms: 0.0 })
    }

    pub fn record(&mut self, row: &TraceRow) -> Result<TraceRecord> {
        let ms = (self.start.elapsed().as_secs_f64() * 1e3).max(self.last_ms);
        self.last_ms = ms;
        let rec = TraceRecord { row: *row, wall_ms: ms };
        serde_json::to_writer(&mut self.out, &rec)?;
        self.out.write_all(b"\n")?;
        Ok(rec)
    }

    pub fn finish(mut self) -> Result<()> {
        self.out.flush()?;
        Ok(())
    }
}

pub fn write_summary(path: &Path, summary: &RunSummary) -> Result<()> {
    let mut f = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut f, summary)?;
    f.write_all(b"\n")?;
    f.flush()?;
    Ok(())
}

/// One row of the plot CSV.
///
/// Columns: `series,state,x,energy,reference,relative_error`, where `series` is
/// `iteration` (x = iteration count within the state), `depth` (x = layers) or
/// `state` (x = state index). Missing references are empty fields.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlotRow {
    pub series: String,
    pub state: usize,
    pub x: f64,
    pub energy: f64,
    pub reference: Option<f64>,
    pub relative_error: Option<f64>,
}

pub fn plot_rows(record: &RunRecord) -> Vec<PlotRow> {
    let mut rows = Vec::new();
    let rel = |e: f64, r: Option<f64>| r.map(|r| (e - r).abs() / r.abs());
    for (s, r) in record.summary.states.iter().zip(&record.results) {
        for (k, t) in r.trace.iter().enumerate() {
            rows.push(PlotRow {
                series: "iteration".into(),
                state: s.index,
                x: k as f64,
                energy: t.energy,
                reference: s.reference,
                relative_error: rel(t.energy, s.reference),
            });
        }
        for d in &s.depth_summaries {
            rows.push(PlotRow {
                series: "depth".into(),
                state: s.index,
                x: d.layers as f64,
                energy: d.energy,
                reference: s.reference,
                relative_error: rel(d.energy, s.reference),
            });
        }
    }
    for s in &record.summary.states {
        rows.push(PlotRow {
            series: "state".into(),
            state: s.index,
            x: s.index as f64,
            energy: s.energy,
            reference: s.reference,
            relative_error: s.relative_error,
        });
    }
    rows
}

pub fn write_plot_csv(path: &Path, record: &RunRecord) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_error)?;
    for row in plot_rows(record) {
        w.serialize(row).map_err(csv_error)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::InvalidConfig(format!("csv: {other:?}")),
    }
}

pub fn read_trace(path: &Path) -> Result<Vec<TraceRecord>> {
    let text = std::fs::read_to_string(path)?;
    text.lines().filter(|l| !l.trim().is_empty()).map(|l| Ok(serde_json::from_str(l)?)).collect()
}
