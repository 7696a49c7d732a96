//! One- and two-qubit unitary synthesis.
//!
//! Conventions: `Rz(t) = exp(-itZ)`, `Ry(t) = exp(-itY)` and the entangler
//! `N(α,β,γ) = exp(-i(α XX + β YY + γ ZZ))`. Global phases are carried
//! explicitly so every recomposition is an exact matrix identity.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, FRAC_PI_4};

use nalgebra::{Matrix4, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qsim::mat::{self, Mat2, Mat4};
use crate::qsim::{Gate, StateVector};
use crate::C64;

const INPUT_TOL: f64 = 1e-10;

/// `U = e^{iφ} Rz(a) Ry(b) Rz(c)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EulerAngles {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub phase: f64,
}

impl EulerAngles {
    pub fn to_matrix(&self) -> Mat2 {
        mat::rz(self.a) * mat::ry(self.b) * mat::rz(self.c) * C64::from_polar(1.0, self.phase)
    }
}

/// `U = e^{iφ} (A1⊗A2) · N(α,β,γ) · (B1⊗B2)` with `π/4 ≥ α ≥ β ≥ |γ|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KakFactors {
    pub a1: Mat2,
    pub a2: Mat2,
    pub b1: Mat2,
    pub b2: Mat2,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub phase: f64,
}

impl KakFactors {
    pub fn interaction(&self) -> [f64; 3] {
        [self.alpha, self.beta, self.gamma]
    }

    pub fn to_matrix(&self) -> Mat4 {
        self.to_matrix_without_phase() * C64::from_polar(1.0, self.phase)
    }

    fn to_matrix_without_phase(&self) -> Mat4 {
        mat::kron(&self.a1, &self.a2) * entangler(self.alpha, self.beta, self.gamma) * mat::kron(&self.b1, &self.b2)
    }
}

/// Columns are the magic (Bell-like) basis; local gates become real orthogonal in it.
pub fn magic_basis() -> Mat4 {
    let s = FRAC_1_SQRT_2;
    let (r, i, z) = (C64::from(s), C64::new(0.0, s), C64::from(0.0));
    Matrix4::new(
        r, z, z, i, //
        z, i, r, z, //
        z, i, -r, z, //
        r, z, z, -i,
    )
}

/// Eigenvalues of `XX`, `YY`, `ZZ` on each magic-basis column.
fn magic_eigenvalues() -> [[f64; 4]; 3] {
    let b = magic_basis();
    let (x, y, z) = (mat::pauli_x(), mat::pauli_y(), mat::pauli_z());
    let diag = |p: &Mat2| {
        let d = b.adjoint() * mat::kron(p, p) * b;
        [d[(0, 0)].re, d[(1, 1)].re, d[(2, 2)].re, d[(3, 3)].re]
    };
    [diag(&x), diag(&y), diag(&z)]
}

/// `exp(-i(α XX + β YY + γ ZZ))`, evaluated in closed form through the magic basis.
pub fn entangler(alpha: f64, beta: f64, gamma: f64) -> Mat4 {
    let [x, y, z] = magic_eigenvalues();
    let b = magic_basis();
    let d = Mat4::from_diagonal(&nalgebra::Vector4::from_fn(|k, _| {
        C64::from_polar(1.0, -(alpha * x[k] + beta * y[k] + gamma * z[k]))
    }));
    b * d * b.adjoint()
}

fn check_unitary<const N: usize>(u: &nalgebra::SMatrix<C64, N, N>) -> Result<()> {
    let err = mat::unitarity_error(u);
    if err > INPUT_TOL || !err.is_finite() {
        return Err(Error::NotUnitary(err));
    }
    Ok(())
}

/// Divides by a root of the determinant (also rescales non-unitary proportional blocks).
fn to_special2(u: &Mat2) -> Mat2 {
    u / u.determinant().sqrt()
}

fn to_special4(u: &Mat4) -> Mat4 {
    u / u.determinant().powf(0.25)
}

fn phase_between<const N: usize>(target: &nalgebra::SMatrix<C64, N, N>, without_phase: &nalgebra::SMatrix<C64, N, N>) -> f64 {
    (without_phase.adjoint() * target).trace().arg()
}

pub fn euler_decompose(u: &Mat2) -> Result<EulerAngles> {
    check_unitary(u)?;
    let v = to_special2(u);
    let (c0, s0) = (v[(0, 0)].norm(), v[(1, 0)].norm());
    let b = s0.atan2(c0);
    let (a, c) = if s0 < 1e-12 {
        (-v[(0, 0)].arg(), 0.0)
    } else if c0 < 1e-12 {
        (v[(1, 0)].arg(), 0.0)
    } else {
        let sum = -v[(0, 0)].arg();
        let diff = v[(1, 0)].arg();
        ((sum + diff) / 2.0, (sum - diff) / 2.0)
    };
    let mut angles = EulerAngles { a, b, c, phase: 0.0 };
    angles.phase = phase_between(u, &angles.to_matrix());
    Ok(angles)
}

/// Splits `M = A ⊗ B` into special-unitary factors (phase left to the caller).
fn split_product(m: &Mat4) -> (Mat2, Mat2) {
    let block = |i: usize, j: usize| Mat2::from_fn(|k, l| m[(2 * i + k, 2 * j + l)]);
    let (mut bi, mut bj, mut best) = (0, 0, -1.0);
    for i in 0..2 {
        for j in 0..2 {
            let n = block(i, j).norm();
            if n > best {
                (bi, bj, best) = (i, j, n);
            }
        }
    }
    let b = to_special2(&block(bi, bj));
    let a = Mat2::from_fn(|i, j| (b.adjoint() * block(i, j)).trace() / 2.0);
    (to_special2(&a), b)
}

/// Real orthogonal `P` (det +1) with `PᵀMP` diagonal, for a complex-symmetric unitary `M`.
fn real_diagonalizer(m: &Mat4) -> Result<Mat4> {
    let re = m.map(|z| z.re);
    let im = m.map(|z| z.im);
    const MIXES: [(f64, f64); 6] =
        [(1.0, 0.0), (0.0, 1.0), (1.0, 0.6180339887), (0.41421356, 1.0), (1.0, -1.7320508), (-0.2679492, 1.0)];
    for (wa, wb) in MIXES {
        let s = re * wa + im * wb;
        let eig = SymmetricEigen::new(s);
        let mut order: Vec<usize> = (0..4).collect();
        order.sort_by(|&x, &y| eig.eigenvalues[x].total_cmp(&eig.eigenvalues[y]));
        let mut p = nalgebra::Matrix4::<f64>::zeros();
        for (col, &k) in order.iter().enumerate() {
            let mut v = eig.eigenvectors.column(k).into_owned();
            // sign fixed by the largest-magnitude entry
            let lead = v.iter().copied().fold(0.0_f64, |acc, x| if x.abs() > acc.abs() + 1e-12 { x } else { acc });
            if lead < 0.0 {
                v = -v;
            }
            p.set_column(col, &v);
        }
        if p.determinant() < 0.0 {
            let last = -p.column(3).into_owned();
            p.set_column(3, &last);
        }
        let pc = p.map(C64::from);
        let d = pc.transpose() * m * pc;
        let off = (0..4)
            .flat_map(|r| (0..4).map(move |c| (r, c)))
            .filter(|(r, c)| r != c)
            .map(|(r, c)| d[(r, c)].norm())
            .fold(0.0, f64::max);
        if off < 1e-9 {
            return Ok(pc);
        }
    }
    Err(Error::NoConvergence("KAK eigenbasis pairing", "no real orthogonal diagonalizer found".into()))
}

pub fn kak_decompose(u: &Mat4) -> Result<KakFactors> {
    check_unitary(u)?;
    let b = magic_basis();
    let us = to_special4(u);
    let up = b.adjoint() * us * b;
    let m = up.transpose() * up;
    let p = real_diagonalizer(&m)?;
    let d = p.transpose() * m * p;
    let mut theta: [f64; 4] = std::array::from_fn(|k| d[(k, k)].arg() / 2.0);
    // det(K1) = exp(-iΣθ) must be +1
    if C64::from_polar(1.0, -theta.iter().sum::<f64>()).re < 0.0 {
        theta[0] += std::f64::consts::PI;
    }
    let inv_sqrt = Mat4::from_diagonal(&nalgebra::Vector4::from_fn(|k, _| C64::from_polar(1.0, -theta[k])));
    let k1 = up * p * inv_sqrt;
    let [x, y, z] = magic_eigenvalues();
    let dot = |v: &[f64; 4]| -(0..4).map(|k| v[k] * theta[k]).sum::<f64>() / 4.0;
    let coeffs = [dot(&x), dot(&y), dot(&z)];

    let (a1, a2) = split_product(&(b * k1 * b.adjoint()));
    let (b1, b2) = split_product(&(b * p.transpose() * b.adjoint()));
    let mut kak = KakFactors { a1, a2, b1, b2, alpha: coeffs[0], beta: coeffs[1], gamma: coeffs[2], phase: 0.0 };
    canonicalize(&mut kak);
    kak.phase = phase_between(u, &kak.to_matrix_without_phase());
    let err = mat::max_abs_diff(&kak.to_matrix(), u);
    if err > 1e-9 {
        return Err(Error::NoConvergence("KAK decomposition", format!("recomposition error {err:e}")));
    }
    Ok(kak)
}

fn pauli(k: usize) -> Mat2 {
    match k {
        0 => mat::pauli_x(),
        1 => mat::pauli_y(),
        _ => mat::pauli_z(),
    }
}

fn rotation(k: usize, t: f64) -> Mat2 {
    match k {
        0 => mat::rx(t),
        1 => mat::ry(t),
        _ => mat::rz(t),
    }
}

/// Moves `(α,β,γ)` into `π/4 ≥ α ≥ β ≥ |γ|`, absorbing the required local gates.
/// The global phase is recomputed by the caller.
fn canonicalize(kak: &mut KakFactors) {
    let i = C64::new(0.0, 1.0);
    let mut c = [kak.alpha, kak.beta, kak.gamma];

    // exp(∓i π/2 PP) ∝ (iP)⊗(iP) commutes with the entangler; absorb it on the B side.
    for (k, ck) in c.iter_mut().enumerate() {
        let n = ((*ck - FRAC_PI_4) / FRAC_PI_2).ceil();
        *ck -= n * FRAC_PI_2;
        if (n as i64).rem_euclid(2) == 1 {
            let ip = pauli(k) * i;
            kak.b1 = ip * kak.b1;
            kak.b2 = ip * kak.b2;
        }
    }

    // Swapping the coefficients of P and Q: conjugate by W = exp(-iπ/4 R), R the third axis.
    let swap = |c: &mut [f64; 3], p: usize, q: usize, kak: &mut KakFactors| {
        let r = 3 - p - q;
        let w = rotation(r, FRAC_PI_4);
        let (p, q) = if (q + 3 - p) % 3 == 1 { (p, q) } else { (q, p) };
        debug_assert!((q + 3 - p) % 3 == 1);
        c.swap(p, q);
        kak.a1 *= w.adjoint();
        kak.a2 *= w.adjoint();
        kak.b1 = w * kak.b1;
        kak.b2 = w * kak.b2;
    };
    for _ in 0..2 {
        if c[0].abs() < c[1].abs() {
            swap(&mut c, 0, 1, kak);
        }
        if c[1].abs() < c[2].abs() {
            swap(&mut c, 1, 2, kak);
        }
    }

    // Flipping the signs of P and Q: conjugate by (iR)⊗I.
    let flip = |c: &mut [f64; 3], p: usize, q: usize, kak: &mut KakFactors| {
        let r = pauli(3 - p - q) * i;
        c[p] = -c[p];
        c[q] = -c[q];
        kak.a1 *= r;
        kak.b1 = r * kak.b1;
    };
    if c[0] < 0.0 && c[1] < 0.0 {
        flip(&mut c, 0, 1, kak);
    } else if c[0] < 0.0 {
        flip(&mut c, 0, 2, kak);
    } else if c[1] < 0.0 {
        flip(&mut c, 1, 2, kak);
    }
    [kak.alpha, kak.beta, kak.gamma] = c;
}

/// Three CNOTs and five single-qubit rotations on qubits `(0, 1)` whose product equals
/// `entangler(α, β, γ)` up to a global phase.
pub fn entangler_netlist(alpha: f64, beta: f64, gamma: f64) -> Vec<Gate> {
    let one = |q, m| Gate::single(q, m).expect("rotations are unitary");
    let cx = |c, t| Gate::cnot(c, t).expect("distinct wires");
    vec![
        one(1, mat::rz(-FRAC_PI_4)),
        cx(1, 0),
        one(0, mat::rz(gamma - FRAC_PI_4)),
        one(1, mat::ry(FRAC_PI_4 - alpha)),
        cx(0, 1),
        one(1, mat::ry(beta - FRAC_PI_4)),
        cx(1, 0),
        one(0, mat::rz(FRAC_PI_4)),
    ]
}

/// 4×4 product of a two-qubit gate sequence (first gate applied first).
pub fn sequence_unitary(gates: &[Gate]) -> Result<Mat4> {
    let mut u = Mat4::zeros();
    for col in 0..4 {
        let mut s = StateVector::basis_state(2, col)?;
        for g in gates {
            s.apply_gate(g)?;
        }
        for row in 0..4 {
            u[(row, col)] = s.amplitudes()[row];
        }
    }
    Ok(u)
}
