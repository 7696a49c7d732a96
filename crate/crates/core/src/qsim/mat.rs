//! Small fixed-size matrices shared by the synthesis and ansatz code.
//!
//! Rotations follow the `R_G(θ) = exp(-iθG)` convention (no factor ½).

use nalgebra::{Matrix2, Matrix4};

use crate::C64;

pub type Mat2 = Matrix2<C64>;
pub type Mat4 = Matrix4<C64>;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

pub fn pauli_x() -> Mat2 {
    Mat2::new(ZERO, ONE, ONE, ZERO)
}

pub fn pauli_y() -> Mat2 {
    Mat2::new(ZERO, -I, I, ZERO)
}

pub fn pauli_z() -> Mat2 {
    Mat2::new(ONE, ZERO, ZERO, -ONE)
}

pub fn rz(theta: f64) -> Mat2 {
    Mat2::new(C64::from_polar(1.0, -theta), ZERO, ZERO, C64::from_polar(1.0, theta))
}

pub fn ry(theta: f64) -> Mat2 {
    let (s, c) = theta.sin_cos();
    Mat2::new(C64::from(c), C64::from(-s), C64::from(s), C64::from(c))
}

pub fn rx(theta: f64) -> Mat2 {
    let (s, c) = theta.sin_cos();
    Mat2::new(C64::from(c), C64::new(0.0, -s), C64::new(0.0, -s), C64::from(c))
}

pub fn kron(a: &Mat2, b: &Mat2) -> Mat4 {
    Mat4::from_fn(|r, c| a[(r / 2, c / 2)] * b[(r % 2, c % 2)])
}

/// CNOT with the first wire (row-index MSB) as control.
pub fn cnot() -> Mat4 {
    let mut m = Mat4::zeros();
    m[(0, 0)] = ONE;
    m[(1, 1)] = ONE;
    m[(2, 3)] = ONE;
    m[(3, 2)] = ONE;
    m
}

/// CNOT with the second wire as control.
pub fn cnot_reversed() -> Mat4 {
    let s = swap();
    s * cnot() * s
}

pub fn swap() -> Mat4 {
    let mut m = Mat4::zeros();
    m[(0, 0)] = ONE;
    m[(1, 2)] = ONE;
    m[(2, 1)] = ONE;
    m[(3, 3)] = ONE;
    m
}

/// `max |U†U − I|` for any square matrix type.
pub fn unitarity_error<const N: usize>(u: &nalgebra::SMatrix<C64, N, N>) -> f64 {
    let p = u.adjoint() * u;
    let mut err: f64 = 0.0;
    for r in 0..N {
        for c in 0..N {
            let target = if r == c { ONE } else { ZERO };
            err = err.max((p[(r, c)] - target).norm());
        }
    }
    err
}

/// Max-abs distance after removing the best global phase between `a` and `b`.
pub fn phase_aligned_distance<const N: usize>(
    a: &nalgebra::SMatrix<C64, N, N>,
    b: &nalgebra::SMatrix<C64, N, N>,
) -> f64 {
    let overlap = (b.adjoint() * a).trace();
    let phase = if overlap.norm() > 1e-300 { overlap / overlap.norm() } else { ONE };
    (a - b * phase).iter().fold(0.0_f64, |m, z| m.max(z.norm()))
}

pub fn max_abs_diff<const N: usize>(a: &nalgebra::SMatrix<C64, N, N>, b: &nalgebra::SMatrix<C64, N, N>) -> f64 {
    (a - b).iter().fold(0.0_f64, |m, z| m.max(z.norm()))
}
