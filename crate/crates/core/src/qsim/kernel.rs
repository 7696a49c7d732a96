//! Stride kernels acting on raw amplitude slices.
//!
//! A `k`-qubit operator's row/column index orders its support with the first
//! listed qubit as the most significant bit, matching the register convention.

use nalgebra::{DMatrix, Matrix2, Matrix4};

use crate::C64;

#[inline]
pub(crate) fn bit(num_qubits: usize, qubit: usize) -> usize {
    1 << (num_qubits - 1 - qubit)
}

#[inline]
fn insert_zero(x: usize, pos: u32) -> usize {
    let low = x & ((1usize << pos) - 1);
    ((x >> pos) << (pos + 1)) | low
}

/// Base indices (all support bits cleared) for a two-qubit operator.
#[inline]
fn pair_bases(num_qubits: usize, q1: usize, q2: usize) -> (usize, usize, impl Iterator<Item = usize>) {
    let m1 = bit(num_qubits, q1);
    let m2 = bit(num_qubits, q2);
    let (lo, hi) = if m1 < m2 { (m1, m2) } else { (m2, m1) };
    let lo_pos = lo.trailing_zeros();
    let hi_pos = hi.trailing_zeros();
    let count = (1usize << num_qubits) >> 2;
    let iter = (0..count).map(move |k| insert_zero(insert_zero(k, lo_pos), hi_pos));
    (m1, m2, iter)
}

pub(crate) fn apply_1q(amps: &mut [C64], num_qubits: usize, qubit: usize, m: &Matrix2<C64>) {
    let mask = bit(num_qubits, qubit);
    let pos = mask.trailing_zeros();
    let (m00, m01, m10, m11) = (m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
    for k in 0..amps.len() / 2 {
        let i0 = insert_zero(k, pos);
        let i1 = i0 | mask;
        let a0 = amps[i0];
        let a1 = amps[i1];
        amps[i0] = m00 * a0 + m01 * a1;
        amps[i1] = m10 * a0 + m11 * a1;
    }
}

pub(crate) fn apply_2q(amps: &mut [C64], num_qubits: usize, q1: usize, q2: usize, m: &Matrix4<C64>) {
    let (m1, m2, bases) = pair_bases(num_qubits, q1, q2);
    for b in bases {
        let idx = [b, b | m2, b | m1, b | m1 | m2];
        let v = [amps[idx[0]], amps[idx[1]], amps[idx[2]], amps[idx[3]]];
        for (r, &i) in idx.iter().enumerate() {
            amps[i] = m[(r, 0)] * v[0] + m[(r, 1)] * v[1] + m[(r, 2)] * v[2] + m[(r, 3)] * v[3];
        }
    }
}

/// `dst += m · src` restricted to the two-qubit support.
pub(crate) fn accumulate_2q(
    src: &[C64],
    dst: &mut [C64],
    num_qubits: usize,
    q1: usize,
    q2: usize,
    m: &Matrix4<C64>,
) {
    let (m1, m2, bases) = pair_bases(num_qubits, q1, q2);
    for b in bases {
        let idx = [b, b | m2, b | m1, b | m1 | m2];
        let v = [src[idx[0]], src[idx[1]], src[idx[2]], src[idx[3]]];
        for (r, &i) in idx.iter().enumerate() {
            dst[i] += m[(r, 0)] * v[0] + m[(r, 1)] * v[1] + m[(r, 2)] * v[2] + m[(r, 3)] * v[3];
        }
    }
}

/// `dst += m · src` restricted to a single-qubit support.
pub(crate) fn accumulate_1q(src: &[C64], dst: &mut [C64], num_qubits: usize, qubit: usize, m: &Matrix2<C64>) {
    let mask = bit(num_qubits, qubit);
    let pos = mask.trailing_zeros();
    for k in 0..src.len() / 2 {
        let i0 = insert_zero(k, pos);
        let i1 = i0 | mask;
        let (a0, a1) = (src[i0], src[i1]);
        dst[i0] += m[(0, 0)] * a0 + m[(0, 1)] * a1;
        dst[i1] += m[(1, 0)] * a0 + m[(1, 1)] * a1;
    }
}

/// Generic gather/scatter application of a `2^k × 2^k` operator.
pub(crate) fn apply_local(amps: &mut [C64], num_qubits: usize, qubits: &[usize], m: &DMatrix<C64>) {
    let k = qubits.len();
    let sub = 1usize << k;
    debug_assert_eq!(m.nrows(), sub);
    let masks: Vec<usize> = qubits.iter().map(|&q| bit(num_qubits, q)).collect();
    let support: usize = masks.iter().fold(0, |acc, m| acc | m);
    let offsets: Vec<usize> = (0..sub)
        .map(|s| {
            masks
                .iter()
                .enumerate()
                .filter(|(j, _)| s & (1 << (k - 1 - j)) != 0)
                .fold(0, |acc, (_, m)| acc | m)
        })
        .collect();
    let mut gathered = vec![C64::new(0.0, 0.0); sub];
    for base in 0..amps.len() {
        if base & support != 0 {
            continue;
        }
        for (g, off) in gathered.iter_mut().zip(&offsets) {
            *g = amps[base | off];
        }
        for (r, off) in offsets.iter().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for (c, g) in gathered.iter().enumerate() {
                acc += m[(r, c)] * g;
            }
            amps[base | off] = acc;
        }
    }
}

#[inline]
pub(crate) fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).fold(C64::new(0.0, 0.0), |acc, (x, y)| acc + x.conj() * y)
}
