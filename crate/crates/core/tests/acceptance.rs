//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero when any criterion fails.

use std::collections::HashMap;
use std::panic::{self, AssertUnwindSafe};
use std::path::PathBuf;
use std::time::{Duration, Instant};

use ec_vqe_core::ansatz::{BlockLayout, CircuitSpec, Tying};
use ec_vqe_core::ed;
use ec_vqe_core::io::{self, RunRecord};
use ec_vqe_core::qng;
use ec_vqe_core::qsim::{Mat4, StateVector};
use ec_vqe_core::synthesis::{entangler, entangler_netlist, kak_decompose, sequence_unitary};
use ec_vqe_core::{CostSpec, ModelSpec, SymmetryOp, C64};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

type Check = std::result::Result<String, String>;

struct Runs {
    cache: HashMap<String, (RunRecord, Duration)>,
}

impl Runs {
    fn get(&mut self, name: &str) -> std::result::Result<&(RunRecord, Duration), String> {
        if !self.cache.contains_key(name) {
            let path = configs_dir().join(format!("{name}.json"));
            let config = io::load_config(&path).map_err(|e| format!("{name}: {e}"))?;
            let start = Instant::now();
            let record = io::run_experiment(&config, &mut |_| {}).map_err(|e| format!("{name}: {e}"))?;
            self.cache.insert(name.to_string(), (record, start.elapsed()));
        }
        Ok(&self.cache[name])
    }
}

fn configs_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn ensure(ok: bool, detail: String) -> Check {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn errors(record: &RunRecord) -> std::result::Result<Vec<f64>, String> {
    record
        .summary
        .states
        .iter()
        .map(|s| s.relative_error.ok_or_else(|| format!("state {} has no reference", s.index)))
        .collect()
}

fn fmt_pct(v: &[f64]) -> String {
    v.iter().map(|e| format!("{:.4}%", 100.0 * e)).collect::<Vec<_>>().join(", ")
}

fn ground_run(runs: &mut Runs, name: &str, limit: f64) -> Check {
    let (record, elapsed) = runs.get(name)?;
    let e = errors(record)?[0];
    let s = &record.summary.states[0];
    ensure(
        e < limit && s.layers == 2,
        format!("{name}: rel.err {:.4}% (limit {}%), N = {}, {:.1} s", 100.0 * e, 100.0 * limit, s.layers, elapsed.as_secs_f64()),
    )
}

fn criterion_1(runs: &mut Runs) -> Check {
    let detail = ground_run(runs, "ising_L8_ground", 0.01)?;
    let secs = runs.get("ising_L8_ground")?.1.as_secs_f64();
    ensure(secs < 120.0, detail)
}

fn criterion_2(runs: &mut Runs) -> Check {
    let (record, elapsed) = runs.get("ising_L8_spectrum")?;
    let errs = errors(record)?;
    let worst = errs.iter().cloned().fold(0.0, f64::max);
    ensure(
        errs.len() == 8 && worst <= 0.01,
        format!("{} states, max rel.err {:.4}% [{}], {:.0} s", errs.len(), 100.0 * worst, fmt_pct(&errs), elapsed.as_secs_f64()),
    )
}

fn criterion_3(runs: &mut Runs) -> Check {
    let model = ModelSpec::Ising { num_qubits: 8, g: 1.0, h: 0.156 };
    let refs = io::reference_states(&model, &[("T1".into(), C64::from(1.0))], 3).map_err(|e| e.to_string())?;
    let exact = (refs[2].1 - refs[0].1) / (refs[1].1 - refs[0].1);
    let (record, _) = runs.get("ising_L8_spectrum")?;
    let ratio = record.summary.mass_ratio.ok_or("no mass ratio")?.vqe;
    let dev = (ratio - exact).abs() / exact;
    ensure(
        dev < 0.03 && (exact - 1.41).abs() <= 0.02,
        format!("VQE {ratio:.4}, exact {exact:.4} (deviation {:.2}%)", 100.0 * dev),
    )
}

fn criterion_4(runs: &mut Runs) -> Check {
    ground_run(runs, "potts_L4_ground", 0.001)
}

fn criterion_5(runs: &mut Runs) -> Check {
    let (record, elapsed) = runs.get("potts_L4_spectrum")?;
    let errs = errors(record)?;
    let worst = errs.iter().cloned().fold(0.0, f64::max);
    let walls = record.summary.states.get(1).and_then(|s| s.domain_walls).ok_or("no first excited state")?;
    ensure(
        errs.len() == 8 && worst <= 0.03 && walls < 0.5,
        format!(
            "{} states, max rel.err {:.4}% [{}], first excited domain walls {walls:.3}, {:.0} s",
            errs.len(),
            100.0 * worst,
            fmt_pct(&errs),
            elapsed.as_secs_f64()
        ),
    )
}

fn criterion_6(runs: &mut Runs) -> Check {
    let (record, _) = runs.get("schwinger_L8_ground")?;
    if record.summary.config.circuit.tying != Tying::General {
        return Err("Schwinger run must use the untied ansatz".into());
    }
    ground_run(runs, "schwinger_L8_ground", 0.01)
}

fn criterion_7() -> Check {
    let one = C64::from(1.0);
    let ising = ModelSpec::Ising { num_qubits: 8, g: 1.0, h: 0.156 };
    let potts = ModelSpec::Potts { num_qubits: 8, g: 0.1, h: 0.1, singlet_penalty: 20.0 };
    let index = |model: &ModelSpec, sector: &[(String, C64)]| -> std::result::Result<usize, String> {
        let mut r = ed::dense_spectrum(&model.hamiltonian().map_err(|e| e.to_string())?, 60).map_err(|e| e.to_string())?;
        ed::classify_sectors(&mut r, &model.symmetries().map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
        r.sector_indices(sector).get(7).copied().ok_or_else(|| "sector too small".to_string())
    };
    let i = index(&ising, &[("T1".into(), one)])?;
    let p = index(&potts, &[("T2".into(), one), ("C".into(), one), ("triplet".into(), one)])?;
    ensure(i == 48 && p == 42, format!("Ising 7th sector excitation at global index {i}, Potts at {p}"))
}

fn criterion_8() -> Check {
    let mut checked = 0;
    for l in [4, 8, 12] {
        for n in 1..=3 {
            for (tying, expected) in [(Tying::General, 10 * l * n), (Tying::TransR1, 10 * n), (Tying::TransR2, 20 * n)] {
                let spec = CircuitSpec::new(l, n, BlockLayout::Compressed10, tying);
                let got = spec.build().map_err(|e| e.to_string())?.num_params();
                if got != expected {
                    return Err(format!("L={l} N={n} {tying:?}: {got} parameters, expected {expected}"));
                }
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} (L, N, tying) combinations match"))
}

fn criterion_9(runs: &mut Runs) -> Check {
    let mut details = Vec::new();
    let mut ok = true;
    let mut total = 0.0;
    for name in ["ising_L8_ground", "ising_L12_ground", "ising_L16_ground"] {
        match ground_run(runs, name, 0.01) {
            Ok(d) => details.push(d),
            Err(d) => {
                ok = false;
                details.push(d);
            }
        }
        total += runs.get(name)?.1.as_secs_f64();
    }
    ensure(ok && total < 3600.0, format!("{}; total {total:.0} s", details.join("; ")))
}

fn haar(n: usize, rng: &mut impl Rng) -> DMatrix<C64> {
    let g = DMatrix::<C64>::from_fn(n, n, |_, _| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)));
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    DMatrix::from_fn(n, n, |i, j| q[(i, j)] * r[(j, j)] / r[(j, j)].norm())
}

fn max_abs(m: impl IntoIterator<Item = C64>) -> f64 {
    m.into_iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn random_state(n: usize, rng: &mut impl Rng) -> StateVector {
    let amps = (0..1usize << n).map(|_| C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))).collect();
    let mut s = StateVector::from_amplitudes(n, amps).unwrap();
    s.normalize();
    s
}

fn commutes_on_states(h: &ec_vqe_core::PauliSum, op: &SymmetryOp, rng: &mut impl Rng) -> f64 {
    let mut worst: f64 = 0.0;
    for _ in 0..4 {
        let psi = random_state(h.num_qubits(), rng);
        let a = op.apply(&psi.apply_pauli_sum(h).unwrap()).unwrap();
        let b = op.apply(&psi).unwrap().apply_pauli_sum(h).unwrap();
        worst = worst.max(max_abs(a.amplitudes().iter().zip(b.amplitudes()).map(|(x, y)| x - y)));
    }
    worst
}

fn criterion_10(runs: &mut Runs) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut notes = Vec::new();

    let mut kak_err: f64 = 0.0;
    for _ in 0..500 {
        let u = Mat4::from_iterator(haar(4, &mut rng).iter().cloned());
        let k = kak_decompose(&u).map_err(|e| e.to_string())?;
        kak_err = kak_err.max(max_abs((k.to_matrix() - u).iter().cloned()));
    }
    notes.push(format!("KAK {kak_err:.1e}"));

    let mut net_err: f64 = 0.0;
    for _ in 0..200 {
        let (a, b, c) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let target = entangler(a, b, c);
        let got = sequence_unitary(&entangler_netlist(a, b, c)).map_err(|e| e.to_string())?;
        let overlap = (target.adjoint() * got).trace();
        let phase = overlap / overlap.norm();
        net_err = net_err.max(max_abs((got - target * phase).iter().cloned()));
    }
    notes.push(format!("netlist {net_err:.1e}"));

    let mut fd_err: f64 = 0.0;
    let mut metric_min: f64 = f64::INFINITY;
    let mut phase_err: f64 = 0.0;
    let models = [
        ModelSpec::Ising { num_qubits: 4, g: 1.0, h: 0.156 },
        ModelSpec::Potts { num_qubits: 4, g: 0.1, h: 0.1, singlet_penalty: 1.0 },
        ModelSpec::Schwinger { num_qubits: 4, m: 0.5, g: 0.3 },
    ];
    for model in models {
        let cost = CostSpec::new(model.hamiltonian().map_err(|e| e.to_string())?);
        for layout in [BlockLayout::Compressed10, BlockLayout::FullKak15] {
            for tying in [Tying::General, Tying::TransR1, Tying::TransR2] {
                let circuit = CircuitSpec::new(4, 2, layout, tying).build().map_err(|e| e.to_string())?;
                let params: Vec<f64> = (0..circuit.num_params()).map(|_| rng.gen_range(-1.0..1.0)).collect();
                let input = StateVector::zero_state(4).unwrap();
                let out = cost.gradient(&circuit, &params, &input).map_err(|e| e.to_string())?;
                let h = 1e-5;
                for i in 0..params.len() {
                    let mut p = params.clone();
                    p[i] += h;
                    let up = cost.evaluate_params(&circuit, &p, &input).unwrap().cost;
                    p[i] -= 2.0 * h;
                    let down = cost.evaluate_params(&circuit, &p, &input).unwrap().cost;
                    fd_err = fd_err.max((out.gradient[i] - (up - down) / (2.0 * h)).abs());
                }
                let metric = qng::fubini_study_metric(&out.state, &out.tangents).map_err(|e| e.to_string())?;
                let eig = nalgebra::SymmetricEigen::new(metric.clone()).eigenvalues;
                metric_min = metric_min.min(eig.iter().cloned().fold(f64::INFINITY, f64::min));
                for &p in &circuit.phase_params() {
                    phase_err = phase_err.max(out.gradient[p].abs());
                    phase_err = phase_err.max(metric.row(p).iter().map(|x| x.abs()).fold(0.0, f64::max));
                }
            }
        }
    }
    notes.push(format!("gradient vs FD {fd_err:.1e}"));
    notes.push(format!("metric min eigenvalue {metric_min:.1e}"));
    notes.push(format!("phase slot {phase_err:.1e}"));

    let mut comm: f64 = 0.0;
    for (model, label) in [
        (ModelSpec::Potts { num_qubits: 8, g: 0.1, h: 0.1, singlet_penalty: 1.0 }, "C"),
        (ModelSpec::Schwinger { num_qubits: 8, m: 0.5, g: 0.3 }, "Q"),
        (ModelSpec::Ising { num_qubits: 8, g: 1.0, h: 0.156 }, "T1"),
    ] {
        let h = model.hamiltonian().map_err(|e| e.to_string())?;
        let op = model.symmetries().map_err(|e| e.to_string())?.into_iter().find(|o| o.label() == label).ok_or("missing operator")?;
        comm = comm.max(commutes_on_states(&h, &op, &mut rng));
    }
    notes.push(format!("commutators {comm:.1e}"));

    let mut bound_gap = f64::INFINITY;
    let mut bundled = std::fs::read_dir(configs_dir())
        .map_err(|e| e.to_string())?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json") && p.file_stem().is_some_and(|s| s != "schema"))
        .collect::<Vec<_>>();
    bundled.sort();
    for path in &bundled {
        let name = path.file_stem().unwrap().to_string_lossy().to_string();
        let (record, _) = runs.get(&name)?;
        let model = record.summary.config.model;
        let e0 = ed::lowest(&model.hamiltonian().map_err(|e| e.to_string())?, 1).map_err(|e| e.to_string())?.ground_energy();
        for s in &record.summary.states {
            bound_gap = bound_gap.min(s.energy - e0);
        }
    }
    notes.push(format!("variational margin {bound_gap:.1e} over {} runs", bundled.len()));

    let ok = kak_err < 1e-10
        && net_err < 1e-10
        && fd_err < 1e-6
        && metric_min >= -1e-10
        && phase_err < 1e-10
        && comm < 1e-10
        && bound_gap >= -1e-9;
    ensure(ok, notes.join(", "))
}

fn main() {
    let mut runs = Runs { cache: HashMap::new() };
    let criteria: Vec<(&str, Box<dyn Fn(&mut Runs) -> Check>)> = vec![
        ("Ising ground state L=8", Box::new(criterion_1)),
        ("Ising T=+1 spectrum L=8", Box::new(criterion_2)),
        ("meson mass ratio", Box::new(criterion_3)),
        ("Potts ground state", Box::new(criterion_4)),
        ("Potts spectrum and false vacuum", Box::new(criterion_5)),
        ("Schwinger ground state", Box::new(criterion_6)),
        ("sector indexing", Box::new(|_: &mut Runs| criterion_7())),
        ("parameter counts", Box::new(|_: &mut Runs| criterion_8())),
        ("fixed depth across sizes", Box::new(criterion_9)),
        ("property suites", Box::new(criterion_10)),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = panic::catch_unwind(AssertUnwindSafe(|| check(&mut runs)))
            .unwrap_or_else(|e| Err(format!("panicked: {:?}", e.downcast_ref::<String>().cloned().unwrap_or_default())));
        match outcome {
            Ok(detail) => println!("PASS {} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {} {name}: {detail}", i + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
