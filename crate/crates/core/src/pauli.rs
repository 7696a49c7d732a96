//! Pauli strings and canonical weighted sums of them.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Sub};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::C64;

/// Terms with `|coeff|` below this are dropped during canonicalization.
pub const DROP_TOLERANCE: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    /// `self · other = phase · result`.
    pub fn mul(self, other: Pauli) -> (C64, Pauli) {
        use Pauli::*;
        let i = C64::new(0.0, 1.0);
        let one = C64::new(1.0, 0.0);
        match (self, other) {
            (I, p) | (p, I) => (one, p),
            (a, b) if a == b => (one, I),
            (X, Y) => (i, Z),
            (Y, X) => (-i, Z),
            (Y, Z) => (i, X),
            (Z, Y) => (-i, X),
            (Z, X) => (i, Y),
            (X, Z) => (-i, Y),
            _ => unreachable!(),
        }
    }

    pub fn to_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }

    pub fn matrix(self) -> DMatrix<C64> {
        let m = match self {
            Pauli::I => crate::qsim::Mat2::identity(),
            Pauli::X => crate::qsim::mat::pauli_x(),
            Pauli::Y => crate::qsim::mat::pauli_y(),
            Pauli::Z => crate::qsim::mat::pauli_z(),
        };
        DMatrix::from_fn(2, 2, |r, c| m[(r, c)])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PauliTerm {
    pub coeff: C64,
    pub labels: Vec<Pauli>,
}

impl PauliTerm {
    pub fn new(coeff: C64, labels: Vec<Pauli>) -> Self {
        Self { coeff, labels }
    }

    pub fn parse(coeff: C64, labels: &str) -> Result<Self> {
        let labels = labels
            .chars()
            .map(|c| Pauli::from_char(c).ok_or_else(|| Error::InvalidModel(format!("bad Pauli label {c:?}"))))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { coeff, labels })
    }

    /// `coeff · P` with `P` acting on `qubit` and identity elsewhere.
    pub fn single(num_qubits: usize, qubit: usize, pauli: Pauli, coeff: f64) -> Self {
        let mut labels = vec![Pauli::I; num_qubits];
        labels[qubit] = pauli;
        Self { coeff: C64::from(coeff), labels }
    }

    pub fn pair(num_qubits: usize, q1: usize, p1: Pauli, q2: usize, p2: Pauli, coeff: f64) -> Self {
        let mut labels = vec![Pauli::I; num_qubits];
        labels[q1] = p1;
        labels[q2] = p2;
        Self { coeff: C64::from(coeff), labels }
    }

    pub fn label_string(&self) -> String {
        self.labels.iter().map(|p| p.to_char()).collect()
    }

    pub fn is_identity(&self) -> bool {
        self.labels.iter().all(|&p| p == Pauli::I)
    }

    fn masks(&self) -> (usize, usize, u32) {
        let n = self.labels.len();
        let mut flip = 0;
        let mut sign = 0;
        let mut ny = 0;
        for (q, p) in self.labels.iter().enumerate() {
            let b = 1usize << (n - 1 - q);
            match p {
                Pauli::I => {}
                Pauli::X => flip |= b,
                Pauli::Y => {
                    flip |= b;
                    sign |= b;
                    ny += 1;
                }
                Pauli::Z => sign |= b,
            }
        }
        (flip, sign, ny)
    }
}

/// Canonical Pauli sum: terms sorted by label, like terms merged, negligible terms dropped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "Vec<PauliTermRecord>", try_from = "Vec<PauliTermRecord>")]
pub struct PauliSum {
    num_qubits: usize,
    terms: Vec<PauliTerm>,
}

/// JSON wire form of one term.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PauliTermRecord {
    pub coeff_re: f64,
    pub coeff_im: f64,
    pub label_string: String,
}

impl From<PauliSum> for Vec<PauliTermRecord> {
    fn from(sum: PauliSum) -> Self {
        sum.terms
            .iter()
            .map(|t| PauliTermRecord { coeff_re: t.coeff.re, coeff_im: t.coeff.im, label_string: t.label_string() })
            .collect()
    }
}

impl TryFrom<Vec<PauliTermRecord>> for PauliSum {
    type Error = Error;

    fn try_from(records: Vec<PauliTermRecord>) -> Result<Self> {
        let n = records
            .first()
            .map(|r| r.label_string.len())
            .ok_or_else(|| Error::InvalidModel("empty Pauli sum has no register size".into()))?;
        let terms = records
            .iter()
            .map(|r| PauliTerm::parse(C64::new(r.coeff_re, r.coeff_im), &r.label_string))
            .collect::<Result<Vec<_>>>()?;
        PauliSum::from_terms(n, terms)
    }
}

impl PauliSum {
    pub fn zero(num_qubits: usize) -> Self {
        Self { num_qubits, terms: Vec::new() }
    }

    pub fn identity(num_qubits: usize, coeff: f64) -> Self {
        Self::from_terms(num_qubits, vec![PauliTerm::new(C64::from(coeff), vec![Pauli::I; num_qubits])])
            .expect("label length matches")
    }

    pub fn from_terms(num_qubits: usize, terms: Vec<PauliTerm>) -> Result<Self> {
        if let Some(bad) = terms.iter().find(|t| t.labels.len() != num_qubits) {
            return Err(Error::DimensionMismatch { expected: num_qubits, actual: bad.labels.len() });
        }
        Ok(Self::canonical(num_qubits, terms))
    }

    fn canonical(num_qubits: usize, terms: Vec<PauliTerm>) -> Self {
        let mut merged: BTreeMap<Vec<Pauli>, C64> = BTreeMap::new();
        for t in terms {
            *merged.entry(t.labels).or_insert(C64::new(0.0, 0.0)) += t.coeff;
        }
        let terms = merged
            .into_iter()
            .filter(|(_, c)| c.norm() > DROP_TOLERANCE)
            .map(|(labels, coeff)| PauliTerm { coeff, labels })
            .collect();
        Self { num_qubits, terms }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn terms(&self) -> &[PauliTerm] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, labels: &str) -> C64 {
        self.terms
            .iter()
            .find(|t| t.label_string() == labels)
            .map(|t| t.coeff)
            .unwrap_or(C64::new(0.0, 0.0))
    }

    pub fn scale(&self, factor: C64) -> Self {
        let terms = self.terms.iter().map(|t| PauliTerm { coeff: t.coeff * factor, labels: t.labels.clone() }).collect();
        Self::canonical(self.num_qubits, terms)
    }

    pub fn adjoint(&self) -> Self {
        let terms = self.terms.iter().map(|t| PauliTerm { coeff: t.coeff.conj(), labels: t.labels.clone() }).collect();
        Self { num_qubits: self.num_qubits, terms }
    }

    pub fn max_imaginary_coefficient(&self) -> f64 {
        self.terms.iter().map(|t| t.coeff.im.abs()).fold(0.0, f64::max)
    }

    pub fn is_hermitian(&self) -> bool {
        self.max_imaginary_coefficient() <= DROP_TOLERANCE
    }

    /// Non-identity term count.
    pub fn non_identity_len(&self) -> usize {
        self.terms.iter().filter(|t| !t.is_identity()).count()
    }

    pub fn commutator(&self, other: &PauliSum) -> PauliSum {
        self * other - other * self
    }

    pub fn max_abs_coefficient(&self) -> f64 {
        self.terms.iter().map(|t| t.coeff.norm()).fold(0.0, f64::max)
    }

    /// `out = O · input` (overwrites `out`).
    pub(crate) fn apply_into(&self, input: &[C64], out: &mut [C64]) {
        out.iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
        self.accumulate_into(input, out, C64::new(1.0, 0.0));
    }

    /// `out += factor · O · input`.
    pub(crate) fn accumulate_into(&self, input: &[C64], out: &mut [C64], factor: C64) {
        const I_POW: [C64; 4] =
            [C64::new(1.0, 0.0), C64::new(0.0, 1.0), C64::new(-1.0, 0.0), C64::new(0.0, -1.0)];
        for t in &self.terms {
            let (flip, sign, ny) = t.masks();
            let c = factor * t.coeff * I_POW[(ny % 4) as usize];
            if sign == 0 {
                for (b, a) in input.iter().enumerate() {
                    out[b ^ flip] += c * a;
                }
            } else {
                for (b, a) in input.iter().enumerate() {
                    let v = c * a;
                    if (b & sign).count_ones() & 1 == 0 {
                        out[b ^ flip] += v;
                    } else {
                        out[b ^ flip] -= v;
                    }
                }
            }
        }
    }

    /// Dense `2^L × 2^L` matrix. Only sensible for small registers.
    pub fn to_dense(&self) -> DMatrix<C64> {
        let dim = 1usize << self.num_qubits;
        let mut m = DMatrix::zeros(dim, dim);
        let mut col = vec![C64::new(0.0, 0.0); dim];
        let mut basis = vec![C64::new(0.0, 0.0); dim];
        for c in 0..dim {
            basis[c] = C64::new(1.0, 0.0);
            self.apply_into(&basis, &mut col);
            for r in 0..dim {
                m[(r, c)] = col[r];
            }
            basis[c] = C64::new(0.0, 0.0);
        }
        m
    }

    /// Expands a `2^k × 2^k` operator on `qubits` (first listed = most significant) into
    /// Pauli strings on an `num_qubits` register.
    pub fn from_local_matrix(num_qubits: usize, qubits: &[usize], matrix: &DMatrix<C64>) -> Result<Self> {
        let k = qubits.len();
        let sub = 1usize << k;
        if matrix.nrows() != sub || matrix.ncols() != sub {
            return Err(Error::DimensionMismatch { expected: sub, actual: matrix.nrows() });
        }
        if qubits.iter().any(|&q| q >= num_qubits) {
            return Err(Error::BadSupport { support: qubits.to_vec(), num_qubits });
        }
        let paulis = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];
        let mut terms = Vec::new();
        for code in 0..(1usize << (2 * k)) {
            let local: Vec<Pauli> = (0..k).map(|j| paulis[(code >> (2 * (k - 1 - j))) & 3]).collect();
            let p = local.iter().fold(DMatrix::from_element(1, 1, C64::new(1.0, 0.0)), |acc, q| acc.kronecker(&q.matrix()));
            let coeff = (&p * matrix).trace() / sub as f64;
            if coeff.norm() > DROP_TOLERANCE {
                let mut labels = vec![Pauli::I; num_qubits];
                for (&q, &pl) in qubits.iter().zip(&local) {
                    labels[q] = pl;
                }
                terms.push(PauliTerm { coeff, labels });
            }
        }
        Ok(Self::canonical(num_qubits, terms))
    }
}

impl Add<&PauliSum> for &PauliSum {
    type Output = PauliSum;

    fn add(self, rhs: &PauliSum) -> PauliSum {
        assert_eq!(self.num_qubits, rhs.num_qubits, "register size mismatch");
        PauliSum::canonical(self.num_qubits, self.terms.iter().chain(&rhs.terms).cloned().collect())
    }
}

impl Add for PauliSum {
    type Output = PauliSum;

    fn add(self, rhs: PauliSum) -> PauliSum {
        &self + &rhs
    }
}

impl Sub for PauliSum {
    type Output = PauliSum;

    fn sub(self, rhs: PauliSum) -> PauliSum {
        &self + &rhs.scale(C64::new(-1.0, 0.0))
    }
}

impl Mul<&PauliSum> for &PauliSum {
    type Output = PauliSum;

    fn mul(self, rhs: &PauliSum) -> PauliSum {
        assert_eq!(self.num_qubits, rhs.num_qubits, "register size mismatch");
        let mut terms = Vec::with_capacity(self.terms.len() * rhs.terms.len());
        for a in &self.terms {
            for b in &rhs.terms {
                let mut phase = a.coeff * b.coeff;
                let labels = a
                    .labels
                    .iter()
                    .zip(&b.labels)
                    .map(|(&p, &q)| {
                        let (ph, r) = p.mul(q);
                        phase *= ph;
                        r
                    })
                    .collect();
                terms.push(PauliTerm { coeff: phase, labels });
            }
        }
        PauliSum::canonical(self.num_qubits, terms)
    }
}

impl fmt::Display for PauliSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for t in &self.terms {
            writeln!(f, "{:+.12} {:+.12}i  {}", t.coeff.re, t.coeff.im, t.label_string())?;
        }
        Ok(())
    }
}
