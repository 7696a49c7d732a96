//! Exact reference spectra: dense Hermitian diagonalization for small registers,
//! restarted Lanczos with locking for larger ones, and symmetry-sector labels.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::pauli::PauliSum;
use crate::qsim::{kernel, StateVector};
use crate::symmetry::SymmetryOp;
use crate::C64;

pub const DENSE_MAX_QUBITS: usize = 12;
pub const ITERATIVE_MAX_QUBITS: usize = 22;
pub const DEGENERACY_TOL: f64 = 1e-8;
const DENSE_RESIDUAL: f64 = 1e-8;
const ITERATIVE_RESIDUAL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Dense,
    Lanczos,
}

/// Snapped symmetry eigenvalues of one eigenstate, keyed by operator label.
pub type SectorLabels = BTreeMap<String, C64>;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub num_qubits: usize,
    pub method: Method,
    pub eigenvalues: Vec<f64>,
    pub residuals: Vec<f64>,
    /// Groups of indices whose eigenvalues agree within the degeneracy tolerance.
    pub clusters: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub labels: Vec<SectorLabels>,
    /// Largest distance between a raw expectation and its snapped eigenvalue.
    #[serde(default)]
    pub max_label_defect: f64,
    #[serde(skip)]
    pub eigenvectors: Option<Vec<StateVector>>,
}

impl SpectrumReport {
    fn new(num_qubits: usize, method: Method, pairs: Vec<(f64, StateVector)>, residuals: Vec<f64>) -> Self {
        let eigenvalues: Vec<f64> = pairs.iter().map(|p| p.0).collect();
        let clusters = clusters(&eigenvalues);
        Self {
            num_qubits,
            method,
            eigenvalues,
            residuals,
            clusters,
            labels: Vec::new(),
            max_label_defect: 0.0,
            eigenvectors: Some(pairs.into_iter().map(|p| p.1).collect()),
        }
    }

    pub fn ground_energy(&self) -> f64 {
        self.eigenvalues[0]
    }

    /// Global indices of the states whose labels match every `(label, value)` in `sector`.
    pub fn sector_indices(&self, sector: &[(String, C64)]) -> Vec<usize> {
        self.labels
            .iter()
            .enumerate()
            .filter(|(_, l)| sector.iter().all(|(k, v)| l.get(k).is_some_and(|x| (x - v).norm() < 1e-6)))
            .map(|(i, _)| i)
            .collect()
    }
}

fn clusters(eigenvalues: &[f64]) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = Vec::new();
    for (i, &e) in eigenvalues.iter().enumerate() {
        match out.last_mut() {
            Some(c) if (e - eigenvalues[*c.last().unwrap()]).abs() <= DEGENERACY_TOL * e.abs().max(1.0) => c.push(i),
            _ => out.push(vec![i]),
        }
    }
    out
}

fn check_hermitian(h: &PauliSum) -> Result<()> {
    let worst = h.max_imaginary_coefficient();
    if worst > 1e-12 {
        return Err(Error::NotHermitian(worst));
    }
    Ok(())
}

fn residual(h: &PauliSum, value: f64, v: &StateVector) -> f64 {
    let mut hv = vec![C64::new(0.0, 0.0); v.dim()];
    h.apply_into(v.amplitudes(), &mut hv);
    hv.iter().zip(v.amplitudes()).map(|(a, b)| (a - b * value).norm_sqr()).sum::<f64>().sqrt()
}

/// The `k` lowest eigenpairs from a full dense diagonalization.
pub fn dense_spectrum(h: &PauliSum, k: usize) -> Result<SpectrumReport> {
    check_hermitian(h)?;
    let n = h.num_qubits();
    if n > DENSE_MAX_QUBITS {
        return Err(Error::TooLargeForDense("dense spectrum", n));
    }
    let m = h.to_dense();
    let dim = m.nrows();
    let mut k = k.min(dim);
    let (values, vectors) = linalg::hermitian_eigh(&m)?;
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    // never split a degenerate cluster at the window edge
    while k > 0 && k < dim && (values[order[k]] - values[order[k - 1]]).abs() <= DEGENERACY_TOL * values[order[k]].abs().max(1.0) {
        k += 1;
    }
    let mut pairs = Vec::with_capacity(k);
    let mut residuals = Vec::with_capacity(k);
    for &i in order.iter().take(k) {
        let v = StateVector::from_parts_unchecked(n, vectors.column(i).iter().copied().collect());
        let r = residual(h, values[i], &v);
        if r > DENSE_RESIDUAL * values[i].abs().max(1.0) {
            return Err(Error::NoConvergence("dense spectrum", format!("residual {r:e} at eigenvalue {}", values[i])));
        }
        residuals.push(r);
        pairs.push((values[i], v));
    }
    Ok(SpectrumReport::new(n, Method::Dense, pairs, residuals))
}

/// Options for [`iterative_extremal`].
#[derive(Debug, Clone, Copy)]
pub struct LanczosOptions {
    /// Residual tolerance relative to `Σ|c_k|` of the Hamiltonian.
    pub tolerance: f64,
    pub max_restarts: usize,
    pub krylov_dim: Option<usize>,
    /// Block size; should be at least the largest degeneracy of interest.
    pub block: usize,
    pub seed: u64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        Self { tolerance: 1e-10, max_restarts: 500, krylov_dim: None, block: 4, seed: 0x5eed }
    }
}

/// Projector applied after every operator action (e.g. onto a symmetry sector).
pub type SectorProjector<'a> = &'a dyn Fn(&mut [C64]);

fn orthogonalize(v: &mut [C64], against: &[Vec<C64>]) {
    // two passes of classical Gram-Schmidt
    for _ in 0..2 {
        for b in against {
            let c = kernel::inner(b, v);
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
        }
    }
}

fn normalize(v: &mut [C64]) -> f64 {
    let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|z| *z /= n);
    }
    n
}

fn combine(coeffs: impl Iterator<Item = C64>, vectors: &[Vec<C64>], dim: usize) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); dim];
    for (c, v) in coeffs.zip(vectors) {
        if c != C64::new(0.0, 0.0) {
            out.iter_mut().zip(v).for_each(|(x, z)| *x += z * c);
        }
    }
    out
}

/// The `k` lowest eigenpairs by block Lanczos with thick restarts, full
/// reorthogonalization and locking of converged Ritz pairs.
pub fn iterative_extremal(
    h: &PauliSum,
    k: usize,
    projector: Option<SectorProjector<'_>>,
    options: LanczosOptions,
) -> Result<SpectrumReport> {
    check_hermitian(h)?;
    let n = h.num_qubits();
    if n > ITERATIVE_MAX_QUBITS {
        return Err(Error::RegisterTooLarge(n));
    }
    let dim = 1usize << n;
    let k = k.min(dim);
    let block = options.block.max(1);
    let bytes_per_vec = dim * std::mem::size_of::<C64>();
    let budget = ((1usize << 31) / (2 * bytes_per_vec)).max(k + 2 * block + 4);
    let m_max = options.krylov_dim.unwrap_or((2 * k + 10 * block).max(40)).min(budget).min(dim);
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let project = |v: &mut [C64]| {
        if let Some(p) = projector {
            p(v)
        }
    };
    let apply = |v: &[C64]| {
        let mut out = vec![C64::new(0.0, 0.0); dim];
        h.apply_into(v, &mut out);
        project(&mut out);
        out
    };
    let scale = h.terms().iter().map(|t| t.coeff.norm()).sum::<f64>().max(1.0);
    let tol = options.tolerance * scale;

    let mut locked: Vec<(f64, Vec<C64>)> = Vec::new();
    let mut locked_vecs: Vec<Vec<C64>> = Vec::new();
    let random_vec = |rng: &mut ChaCha8Rng| -> Vec<C64> {
        (0..dim).map(|_| C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5)).collect()
    };
    let mut retained: Vec<Vec<C64>> = Vec::new();
    let mut restarts = 0;
    let mut exhausted = false;

    while locked.len() < k && restarts < options.max_restarts {
        restarts += 1;
        // basis: retained Ritz vectors, topped up with random vectors
        let mut v: Vec<Vec<C64>> = Vec::new();
        let mut hv: Vec<Vec<C64>> = Vec::new();
        let mut frontier: Vec<usize> = Vec::new();
        let mut seeds = std::mem::take(&mut retained);
        while seeds.len() < block {
            seeds.push(random_vec(&mut rng));
        }
        for mut s in seeds {
            project(&mut s);
            orthogonalize(&mut s, &locked_vecs);
            orthogonalize(&mut s, &v);
            if normalize(&mut s) > 1e-8 {
                hv.push(apply(&s));
                v.push(s);
                frontier.push(v.len() - 1);
            }
        }
        if v.is_empty() {
            exhausted = true;
            break;
        }
        let room = m_max.min(dim - locked.len());
        while v.len() < room && !frontier.is_empty() {
            let mut next = Vec::new();
            for &f in &frontier {
                if v.len() >= room {
                    break;
                }
                let mut w = hv[f].clone();
                orthogonalize(&mut w, &locked_vecs);
                orthogonalize(&mut w, &v);
                if normalize(&mut w) > 1e-10 {
                    hv.push(apply(&w));
                    v.push(w);
                    next.push(v.len() - 1);
                }
            }
            frontier = next;
        }
        let m = v.len();
        let g = DMatrix::<C64>::from_fn(m, m, |i, j| kernel::inner(&v[i], &hv[j]));
        let g = (&g + g.adjoint()) * C64::from(0.5);
        let (eigenvalues, eigenvectors) = linalg::hermitian_eigh(&g)?;
        let wanted = (k - locked.len()).min(m);
        let keep = (wanted + block).min(m / 2).max(1);
        let mut blocked = false;
        for idx in (0..m).take(keep.max(wanted)) {
            let theta = eigenvalues[idx];
            let col = eigenvectors.column(idx);
            let y = combine(col.iter().copied(), &v, dim);
            let hy = combine(col.iter().copied(), &hv, dim);
            let r = hy.iter().zip(&y).map(|(a, b)| (a - b * theta).norm_sqr()).sum::<f64>().sqrt();
            if !blocked && locked.len() < k && r < tol {
                let mut y = y;
                normalize(&mut y);
                locked_vecs.push(y.clone());
                locked.push((theta, y));
            } else {
                blocked = true;
                retained.push(y);
            }
        }
        retained.truncate(keep);
        if m < block && locked.len() < k && retained.is_empty() {
            exhausted = true;
            break;
        }
    }

    if locked.len() < k && !exhausted {
        // the (projected) space may simply hold fewer than k states
        let mut probe = random_vec(&mut rng);
        project(&mut probe);
        orthogonalize(&mut probe, &locked_vecs);
        exhausted = normalize(&mut probe) < 1e-8;
    }
    if locked.len() < k && !exhausted {
        return Err(Error::NoConvergence(
            "Lanczos",
            format!("{} of {k} eigenpairs converged after {} restarts", locked.len(), restarts),
        ));
    }
    locked.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut pairs = Vec::with_capacity(locked.len());
    let mut residuals = Vec::with_capacity(locked.len());
    for (theta, v) in locked {
        let sv = StateVector::from_parts_unchecked(n, v);
        let r = residual(h, theta, &sv);
        if r > ITERATIVE_RESIDUAL * theta.abs().max(1.0) {
            return Err(Error::NoConvergence("Lanczos", format!("residual {r:e} at eigenvalue {theta}")));
        }
        residuals.push(r);
        pairs.push((theta, sv));
    }
    Ok(SpectrumReport::new(n, Method::Lanczos, pairs, residuals))
}

/// Dense below the dense limit, Lanczos above it.
pub fn lowest(h: &PauliSum, k: usize) -> Result<SpectrumReport> {
    if h.num_qubits() <= DENSE_MAX_QUBITS {
        dense_spectrum(h, k)
    } else {
        iterative_extremal(h, k, None, LanczosOptions::default())
    }
}

/// Rough `(E_min, E_max)` from a short Lanczos run on `H` and `−H`.
pub fn spectral_range(h: &PauliSum) -> Result<(f64, f64)> {
    let opts = LanczosOptions { tolerance: 1e-6, max_restarts: 50, krylov_dim: Some(60), block: 1, seed: 7 };
    let lo = iterative_extremal(h, 1, None, opts)?.eigenvalues[0];
    let hi = -iterative_extremal(&h.scale(C64::from(-1.0)), 1, None, opts)?.eigenvalues[0];
    Ok((lo, hi))
}

/// Rotates each degenerate cluster to diagonalize the symmetry operators there,
/// then labels every state by its snapped expectation values.
pub fn classify_sectors(report: &mut SpectrumReport, ops: &[SymmetryOp]) -> Result<()> {
    let n = report.num_qubits;
    let vecs = report
        .eigenvectors
        .as_mut()
        .ok_or_else(|| Error::InvalidConfig("sector classification needs eigenvectors".into()))?;
    for op in ops {
        if op.num_qubits() != n {
            return Err(Error::DimensionMismatch { expected: n, actual: op.num_qubits() });
        }
    }
    // fixed, incommensurate weights for a generic Hermitian combination
    const WEIGHTS: [f64; 8] = [1.0, 0.5772156649, 0.3183098862, 0.2078795764, 0.1415926536, 0.0854101966, 0.0618033989, 0.0392699082];
    for cluster in &report.clusters {
        if cluster.len() < 2 {
            continue;
        }
        let d = cluster.len();
        let mut combo = DMatrix::<C64>::zeros(d, d);
        let mut wi = 0;
        for op in ops {
            let applied: Vec<StateVector> = cluster.iter().map(|&i| op.apply(&vecs[i])).collect::<Result<_>>()?;
            let m = DMatrix::from_fn(d, d, |r, c| kernel::inner(vecs[cluster[r]].amplitudes(), applied[c].amplitudes()));
            let herm = (&m + m.adjoint()) * C64::from(0.5);
            let anti = (&m - m.adjoint()) * C64::new(0.0, -0.5);
            combo += herm * C64::from(WEIGHTS[wi % WEIGHTS.len()]);
            combo += anti * C64::from(WEIGHTS[(wi + 1) % WEIGHTS.len()]);
            wi += 2;
        }
        let (_, eigenvectors) = linalg::hermitian_eigh(&combo)?;
        let dim = vecs[cluster[0]].dim();
        let rotated: Vec<Vec<C64>> = (0..d)
            .map(|col| {
                let y = eigenvectors.column(col);
                let mut v = vec![C64::new(0.0, 0.0); dim];
                for (c, &i) in y.iter().zip(cluster) {
                    v.iter_mut().zip(vecs[i].amplitudes()).for_each(|(x, z)| *x += z * *c);
                }
                v
            })
            .collect();
        for (&i, v) in cluster.iter().zip(rotated) {
            let mut sv = StateVector::from_parts_unchecked(n, v);
            // deterministic phase: largest amplitude real and positive
            let lead = sv.amplitudes().iter().copied().fold(C64::new(0.0, 0.0), |a, z| if z.norm() > a.norm() + 1e-12 { z } else { a });
            if lead.norm() > 0.0 {
                sv.scale(lead.conj() / lead.norm());
            }
            vecs[i] = sv;
        }
    }
    let mut labels = Vec::with_capacity(vecs.len());
    let mut defect: f64 = 0.0;
    for v in vecs.iter() {
        let mut l = SectorLabels::new();
        for op in ops {
            let raw = op.expectation(v)?;
            let snapped = op.snap(raw);
            defect = defect.max((raw - snapped).norm());
            l.insert(op.label(), snapped);
        }
        labels.push(l);
    }
    report.labels = labels;
    report.max_label_defect = defect;
    Ok(())
}

/// Dense operator of one eigenvector block, for tests and diagnostics.
pub fn eigenvector_matrix(report: &SpectrumReport) -> Option<DMatrix<C64>> {
    let v = report.eigenvectors.as_ref()?;
    let dim = v.first()?.dim();
    Some(DMatrix::from_fn(dim, v.len(), |r, c| v[c].amplitudes()[r]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::ModelSpec;

    fn one() -> C64 {
        C64::from(1.0)
    }

    #[test]
    fn ising_two_site_ground() {
        let h = ModelSpec::Ising { num_qubits: 2, g: 1.0, h: 0.0 }.hamiltonian().unwrap();
        let r = dense_spectrum(&h, 4).unwrap();
        assert!((r.ground_energy() + 2.0 * 2f64.sqrt()).abs() < 1e-12);
        assert!(r.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn constant_hamiltonian() {
        let h = PauliSum::identity(3, 1.7);
        let r = dense_spectrum(&h, 8).unwrap();
        assert!(r.eigenvalues.iter().all(|e| (e - 1.7).abs() < 1e-12));
        assert_eq!(r.clusters.len(), 1);
    }

    #[test]
    fn strong_field_limit() {
        let h = ModelSpec::Ising { num_qubits: 4, g: 50.0, h: 0.0 }.hamiltonian().unwrap();
        let e = dense_spectrum(&h, 1).unwrap().ground_energy();
        assert!((e + 200.0).abs() / 200.0 < 0.005, "{e}");
    }

    #[test]
    fn classical_chain_ground() {
        let h = ModelSpec::Ising { num_qubits: 6, g: 0.0, h: 0.0 }.hamiltonian().unwrap();
        let r = iterative_extremal(&h, 1, None, LanczosOptions::default()).unwrap();
        assert!((r.ground_energy() + 6.0).abs() < 1e-9);
    }

    #[test]
    fn dense_rejects_large_registers() {
        let h = PauliSum::zero(13);
        assert!(matches!(dense_spectrum(&h, 1), Err(Error::TooLargeForDense(_, 13))));
    }

    #[test]
    fn lanczos_agrees_with_dense_on_potts() {
        let h = ModelSpec::Potts { num_qubits: 8, g: 0.1, h: 0.1, singlet_penalty: 1.0 }.hamiltonian().unwrap();
        let d = dense_spectrum(&h, 10).unwrap();
        let l = iterative_extremal(&h, 10, None, LanczosOptions::default()).unwrap();
        for (a, b) in d.eigenvalues.iter().zip(&l.eigenvalues) {
            assert!((a - b).abs() < 1e-8, "{a} vs {b}");
        }
        assert!(l.residuals.iter().all(|r| *r < 1e-6));
    }

    #[test]
    fn lanczos_agrees_with_dense_on_schwinger() {
        let h = ModelSpec::Schwinger { num_qubits: 8, m: 0.5, g: 0.3 }.hamiltonian().unwrap();
        let d = dense_spectrum(&h, 1).unwrap();
        let l = iterative_extremal(&h, 1, None, LanczosOptions::default()).unwrap();
        assert!((d.ground_energy() - l.ground_energy()).abs() < 1e-8);
    }

    #[test]
    fn ising_sector_index_48() {
        let model = ModelSpec::Ising { num_qubits: 8, g: 1.0, h: 0.156 };
        let mut r = dense_spectrum(&model.hamiltonian().unwrap(), 60).unwrap();
        classify_sectors(&mut r, &model.symmetries().unwrap()).unwrap();
        assert!(r.max_label_defect < 1e-6, "{}", r.max_label_defect);
        let idx = r.sector_indices(&[("T1".into(), one())]);
        assert_eq!(&idx[..8], &[0, 1, 4, 9, 19, 36, 41, 48]);
        let e: Vec<f64> = idx[..3].iter().map(|&i| r.eigenvalues[i]).collect();
        let ratio = (e[2] - e[0]) / (e[1] - e[0]);
        assert!((ratio - 1.41).abs() < 0.02, "{ratio}");
    }

    #[test]
    fn potts_sector_index_42() {
        let model = ModelSpec::Potts { num_qubits: 8, g: 0.1, h: 0.1, singlet_penalty: 20.0 };
        let mut r = dense_spectrum(&model.hamiltonian().unwrap(), 60).unwrap();
        classify_sectors(&mut r, &model.symmetries().unwrap()).unwrap();
        assert!(r.max_label_defect < 1e-6);
        let idx = r.sector_indices(&[("T2".into(), one()), ("C".into(), one()), ("triplet".into(), one())]);
        assert_eq!(&idx[..8], &[0, 1, 3, 11, 21, 27, 38, 42]);
    }

    #[test]
    fn schwinger_charges_are_integers() {
        let model = ModelSpec::Schwinger { num_qubits: 6, m: 0.5, g: 0.3 };
        let mut r = dense_spectrum(&model.hamiltonian().unwrap(), 64).unwrap();
        classify_sectors(&mut r, &model.symmetries().unwrap()).unwrap();
        assert!(r.max_label_defect < 1e-6);
        for l in &r.labels {
            let q = l["Q"];
            assert!((q.re - q.re.round()).abs() < 1e-12 && q.im == 0.0);
        }
    }

    #[test]
    fn uniform_superposition_is_translation_invariant() {
        let t = SymmetryOp::translation(6, 1).unwrap();
        let s = StateVector::from_amplitudes(6, vec![C64::from(0.125); 64]).unwrap();
        assert!((t.snap(t.expectation(&s).unwrap()) - one()).norm() < 1e-15);
        assert!((t.expectation(&s).unwrap() - one()).norm() < 1e-12);
    }

    #[test]
    fn projected_lanczos_stays_in_sector() {
        let model = ModelSpec::Schwinger { num_qubits: 6, m: 0.5, g: 0.3 };
        let h = model.hamiltonian().unwrap();
        // keep only Q = 0 (three up, three down)
        let keep = |v: &mut [C64]| {
            for (b, z) in v.iter_mut().enumerate() {
                if (b as u32).count_ones() != 3 {
                    *z = C64::new(0.0, 0.0);
                }
            }
        };
        let r = iterative_extremal(&h, 3, Some(&keep), LanczosOptions::default()).unwrap();
        let mut full = dense_spectrum(&h, 64).unwrap();
        classify_sectors(&mut full, &model.symmetries().unwrap()).unwrap();
        let q0 = full.sector_indices(&[("Q".into(), C64::from(0.0))]);
        for (i, &g) in q0.iter().take(3).enumerate() {
            assert!((r.eigenvalues[i] - full.eigenvalues[g]).abs() < 1e-8);
        }
    }
}
