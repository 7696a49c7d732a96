//! `ec-vqe` command-line front end.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use ec_vqe_core::driver::TraceRow;
use ec_vqe_core::ed::{self, LanczosOptions};
use ec_vqe_core::io::{self, OutputPaths, TraceWriter};
use ec_vqe_core::qsim::mat::{Mat2, Mat4};
use ec_vqe_core::synthesis;
use ec_vqe_core::{BlockLayout, CircuitSpec, Error, ModelSpec, Tying, C64};

#[derive(Parser)]
#[command(name = "ec-vqe", version, about = "Variational eigensolver on Euler-Cartan brick-wall circuits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment config and write trace, summary and plot data.
    Run {
        config: PathBuf,
        /// Output directory.
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Base name of the output files (defaults to the config's name, then the file stem).
        #[arg(long)]
        name: Option<String>,
    },
    /// Exact spectrum of a model.
    Ed {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 10)]
        k: usize,
        /// Label states by symmetry sector and print the sector-index map.
        #[arg(long)]
        sectors: bool,
        #[arg(long, value_enum, default_value_t = EdMethod::Auto)]
        method: EdMethod,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Cartan (KAK) decomposition of a 4x4 unitary, or Euler angles of a 2x2 one.
    Kak {
        /// Named gate: identity, cnot, swap.
        #[arg(long, conflicts_with_all = ["matrix", "file"])]
        gate: Option<String>,
        /// Matrix as JSON rows; entries are numbers or [re, im] pairs.
        #[arg(long, conflicts_with = "file")]
        matrix: Option<String>,
        #[arg(long)]
        file: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print a model Hamiltonian as a Pauli-sum JSON document.
    DumpHamiltonian {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the gate list of a brick-wall circuit.
    Circuit {
        #[arg(long = "L")]
        l: usize,
        #[arg(long = "N")]
        n: usize,
        #[arg(long, value_enum, default_value_t = LayoutArg::Compressed10)]
        layout: LayoutArg,
        #[arg(long, value_enum, default_value_t = TyingArg::General)]
        tying: TyingArg,
        #[arg(long)]
        final_rotations: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct ModelArgs {
    #[arg(long, value_enum)]
    model: ModelKind,
    /// Number of qubits.
    #[arg(long = "L")]
    l: usize,
    #[arg(long, allow_hyphen_values = true)]
    g: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    h: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    m: Option<f64>,
    #[arg(long)]
    singlet_penalty: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelKind {
    Ising,
    Potts,
    Schwinger,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum EdMethod {
    Auto,
    Dense,
    Lanczos,
}

#[derive(Clone, Copy, ValueEnum)]
enum LayoutArg {
    #[value(name = "COMPRESSED_10", alias = "compressed10")]
    Compressed10,
    #[value(name = "FULL_KAK_15", alias = "full-kak15")]
    FullKak15,
}

#[derive(Clone, Copy, ValueEnum)]
enum TyingArg {
    #[value(name = "GENERAL", alias = "general")]
    General,
    #[value(name = "TRANS_R1", alias = "trans-r1")]
    TransR1,
    #[value(name = "TRANS_R2", alias = "trans-r2")]
    TransR2,
}

impl ModelArgs {
    fn spec(&self) -> anyhow::Result<ModelSpec> {
        let need = |v: Option<f64>, name: &str| v.ok_or_else(|| anyhow!("--{name} is required for this model"));
        let spec = match self.model {
            ModelKind::Ising => ModelSpec::Ising { num_qubits: self.l, g: need(self.g, "g")?, h: need(self.h, "h")? },
            ModelKind::Potts => ModelSpec::Potts {
                num_qubits: self.l,
                g: need(self.g, "g")?,
                h: need(self.h, "h")?,
                singlet_penalty: self.singlet_penalty.unwrap_or(1.0),
            },
            ModelKind::Schwinger => {
                ModelSpec::Schwinger { num_qubits: self.l, m: need(self.m, "m")?, g: need(self.g, "g")? }
            }
        };
        spec.validate()?;
        Ok(spec)
    }
}

fn emit(value: &Value, out: Option<&Path>) -> anyhow::Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    match out {
        Some(p) => std::fs::write(p, text + "\n").with_context(|| format!("writing {}", p.display()))?,
        None => println!("{text}"),
    }
    Ok(())
}

fn complex_json(z: C64) -> Value {
    json!([z.re, z.im])
}

fn matrix_json<const N: usize>(m: &nalgebra::SMatrix<C64, N, N>) -> Value {
    Value::Array((0..N).map(|r| Value::Array((0..N).map(|c| complex_json(m[(r, c)])).collect())).collect())
}

fn parse_entry(v: &Value) -> anyhow::Result<C64> {
    match v {
        Value::Number(x) => Ok(C64::new(x.as_f64().unwrap_or(f64::NAN), 0.0)),
        Value::Array(p) if p.len() == 2 => {
            let f = |x: &Value| x.as_f64().ok_or_else(|| anyhow!("matrix entries must be numbers"));
            Ok(C64::new(f(&p[0])?, f(&p[1])?))
        }
        _ => bail!("matrix entries must be numbers or [re, im] pairs"),
    }
}

fn parse_matrix(text: &str) -> anyhow::Result<Vec<Vec<C64>>> {
    let v: Value = serde_json::from_str(text).context("matrix is not valid JSON")?;
    let rows = v.as_array().ok_or_else(|| anyhow!("matrix must be a JSON array of rows"))?;
    let out: Vec<Vec<C64>> = rows
        .iter()
        .map(|r| r.as_array().ok_or_else(|| anyhow!("each row must be an array"))?.iter().map(parse_entry).collect())
        .collect::<anyhow::Result<_>>()?;
    let n = out.len();
    if !(n == 2 || n == 4) || out.iter().any(|r| r.len() != n) {
        bail!("matrix must be 2x2 or 4x4");
    }
    Ok(out)
}

fn cmd_kak(gate: Option<String>, matrix: Option<String>, file: Option<PathBuf>, out: Option<PathBuf>) -> anyhow::Result<()> {
    use ec_vqe_core::qsim::mat;
    let rows = match (gate, matrix, file) {
        (Some(g), _, _) => {
            let m = match g.to_ascii_lowercase().as_str() {
                "identity" | "i" => Mat4::identity(),
                "cnot" | "cx" => mat::cnot(),
                "swap" => mat::swap(),
                other => bail!("unknown gate {other:?}; use identity, cnot or swap"),
            };
            (0..4).map(|r| (0..4).map(|c| m[(r, c)]).collect()).collect()
        }
        (None, Some(text), _) => parse_matrix(&text)?,
        (None, None, Some(path)) => parse_matrix(&std::fs::read_to_string(&path)?)?,
        (None, None, None) => bail!("give one of --gate, --matrix or --file"),
    };
    let value = if rows.len() == 2 {
        let u = Mat2::from_fn(|r, c| rows[r][c]);
        let e = synthesis::euler_decompose(&u)?;
        json!({"kind": "euler_zyz", "a": e.a, "b": e.b, "c": e.c, "phase": e.phase})
    } else {
        let u = Mat4::from_fn(|r, c| rows[r][c]);
        let k = synthesis::kak_decompose(&u)?;
        json!({
            "kind": "kak",
            "alpha": k.alpha, "beta": k.beta, "gamma": k.gamma, "phase": k.phase,
            "a1": matrix_json(&k.a1), "a2": matrix_json(&k.a2),
            "b1": matrix_json(&k.b1), "b2": matrix_json(&k.b2),
            "reconstruction_error": mat::max_abs_diff(&k.to_matrix(), &u),
        })
    };
    emit(&value, out.as_deref())
}

fn cmd_ed(model: &ModelArgs, k: usize, sectors: bool, method: EdMethod, out: Option<PathBuf>) -> anyhow::Result<()> {
    let spec = model.spec()?;
    let h = spec.hamiltonian()?;
    let mut report = match method {
        EdMethod::Dense => ed::dense_spectrum(&h, k)?,
        EdMethod::Lanczos => ed::iterative_extremal(&h, k, None, LanczosOptions::default())?,
        EdMethod::Auto => ed::lowest(&h, k)?,
    };
    let mut value = json!({"model": spec, "report": &report});
    if sectors {
        ed::classify_sectors(&mut report, &spec.symmetries()?)?;
        let mut map: Vec<(ed::SectorLabels, Vec<usize>)> = Vec::new();
        for (i, l) in report.labels.iter().enumerate() {
            match map.iter_mut().find(|(key, _)| key.iter().zip(l.iter()).all(|(a, b)| a.0 == b.0 && (a.1 - b.1).norm() < 1e-6)) {
                Some((_, v)) => v.push(i),
                None => map.push((l.clone(), vec![i])),
            }
        }
        let sectors: Vec<Value> = map
            .into_iter()
            .map(|(labels, indices)| {
                let labels: serde_json::Map<String, Value> =
                    labels.into_iter().map(|(k, v)| (k, complex_json(v))).collect();
                json!({"labels": labels, "global_indices": indices})
            })
            .collect();
        value = json!({"model": spec, "report": &report, "sectors": sectors});
    }
    emit(&value, out.as_deref())
}

fn cmd_circuit(l: usize, n: usize, layout: LayoutArg, tying: TyingArg, final_rotations: bool, out: Option<PathBuf>) -> anyhow::Result<()> {
    let layout = match layout {
        LayoutArg::Compressed10 => BlockLayout::Compressed10,
        LayoutArg::FullKak15 => BlockLayout::FullKak15,
    };
    let tying = match tying {
        TyingArg::General => Tying::General,
        TyingArg::TransR1 => Tying::TransR1,
        TyingArg::TransR2 => Tying::TransR2,
    };
    let spec = CircuitSpec { final_rotation_layer: final_rotations, ..CircuitSpec::new(l, n, layout, tying) };
    emit(&serde_json::to_value(spec.build()?.export())?, out.as_deref())
}

enum RunFailure {
    Config(anyhow::Error),
    Diverged(anyhow::Error),
    Other(anyhow::Error),
}

fn cmd_run(config: &Path, out: &Path, name: Option<String>) -> Result<(), RunFailure> {
    let cfg = match io::load_config(config) {
        Ok(c) => c,
        Err(Error::Io(e)) => return Err(RunFailure::Other(anyhow!("reading {}: {e}", config.display()))),
        Err(e) => return Err(RunFailure::Config(anyhow!("{}: {e}", config.display()))),
    };
    let name = name
        .or_else(|| cfg.name.clone())
        .or_else(|| config.file_stem().map(|s| s.to_string_lossy().into_owned()))
        .unwrap_or_else(|| "run".into());
    std::fs::create_dir_all(out).map_err(|e| RunFailure::Other(e.into()))?;
    let paths = OutputPaths::new(out, &name);
    let mut writer = TraceWriter::create(&paths.trace).map_err(|e| RunFailure::Other(e.into()))?;
    let mut write_error: Option<Error> = None;
    let result = io::run_experiment(&cfg, &mut |row: &TraceRow| {
        if write_error.is_none() {
            if let Err(e) = writer.record(row) {
                write_error = Some(e);
            }
        }
    });
    writer.finish().map_err(|e| RunFailure::Other(e.into()))?;
    if let Some(e) = write_error {
        return Err(RunFailure::Other(e.into()));
    }
    let record = match result {
        Ok(r) => r,
        Err(e @ Error::Diverged { .. }) | Err(e @ Error::Factorization(_)) => {
            return Err(RunFailure::Diverged(anyhow!("{e}; partial trace kept in {}", paths.trace.display())))
        }
        Err(e) => return Err(RunFailure::Other(e.into())),
    };
    io::write_summary(&paths.summary, &record.summary).map_err(|e| RunFailure::Other(e.into()))?;
    io::write_plot_csv(&paths.plot, &record).map_err(|e| RunFailure::Other(e.into()))?;
    for s in &record.summary.states {
        let rel = s.relative_error.map_or("n/a".to_string(), |r| format!("{:.4}%", 100.0 * r));
        println!(
            "state {}: E = {:.8}  ref = {}  rel.err = {rel}  N = {}  iterations = {}",
            s.index,
            s.energy,
            s.reference.map_or("n/a".to_string(), |r| format!("{r:.8}")),
            s.layers,
            s.iterations
        );
    }
    if let Some(m) = record.summary.mass_ratio {
        println!("mass ratio: {:.4} (exact {})", m.vqe, m.exact.map_or("n/a".to_string(), |x| format!("{x:.4}")));
    }
    println!("wrote {}, {}, {}", paths.trace.display(), paths.summary.display(), paths.plot.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run { config, out, name } => match cmd_run(&config, &out, name) {
            Ok(()) => return ExitCode::SUCCESS,
            Err(RunFailure::Config(e)) => {
                eprintln!("error: invalid config: {e:#}");
                return ExitCode::from(2);
            }
            Err(RunFailure::Diverged(e)) => {
                eprintln!("error: {e:#}");
                return ExitCode::from(3);
            }
            Err(RunFailure::Other(e)) => Err(e),
        },
        Command::Ed { model, k, sectors, method, out } => cmd_ed(&model, k, sectors, method, out),
        Command::Kak { gate, matrix, file, out } => cmd_kak(gate, matrix, file, out),
        Command::DumpHamiltonian { model, out } => {
            model.spec().and_then(|s| Ok(emit(&serde_json::to_value(s.hamiltonian()?)?, out.as_deref())?))
        }
        Command::Circuit { l, n, layout, tying, final_rotations, out } => cmd_circuit(l, n, layout, tying, final_rotations, out),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
