//! Dense Hermitian eigensolvers backed by LAPACK.
//!
//! Complex Hermitian matrices `A + iB` are solved through the real symmetric
//! embedding `[[A, -B], [B, A]]`, whose spectrum is that of `A + iB` with every
//! eigenvalue doubled.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::C64;

/// Eigenvalues in ascending order with matching eigenvector columns.
pub fn symmetric_eigh(m: DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let n = m.nrows();
    if n == 0 {
        return Ok((Vec::new(), DMatrix::zeros(0, 0)));
    }
    let eig = nalgebra_lapack::SymmetricEigen::try_new(m)
        .ok_or_else(|| Error::NoConvergence("symmetric eigensolver", format!("LAPACK failed on a {n}x{n} matrix")))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok((values, vectors))
}

/// Eigenvalues in ascending order with orthonormal eigenvector columns.
pub fn hermitian_eigh(m: &DMatrix<C64>) -> Result<(Vec<f64>, DMatrix<C64>)> {
    let n = m.nrows();
    if m.iter().all(|z| z.im == 0.0) {
        let (values, vectors) = symmetric_eigh(m.map(|z| z.re))?;
        return Ok((values, vectors.map(C64::from)));
    }
    let embedded = DMatrix::from_fn(2 * n, 2 * n, |r, c| {
        let z = m[(r % n, c % n)];
        match (r < n, c < n) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    });
    let (values, vectors) = symmetric_eigh(embedded)?;
    let scale = values.iter().fold(1.0f64, |a, v| a.max(v.abs()));
    let mut out_values = Vec::with_capacity(n);
    let mut out_vectors = DMatrix::<C64>::zeros(n, n);
    let mut start = 0;
    while start < 2 * n {
        let mut end = start + 1;
        while end < 2 * n && values[end] - values[end - 1] <= 1e-10 * scale {
            end += 1;
        }
        // each complex eigenvector appears twice, as (x; y) and (-y; x)
        let mut candidates: Vec<Vec<C64>> = (start..end)
            .map(|c| (0..n).map(|r| C64::new(vectors[(r, c)], vectors[(r + n, c)])).collect())
            .collect();
        let wanted = ((end - start) / 2).max(1).min(n - out_values.len());
        for _ in 0..wanted {
            let (best, _) = candidates
                .iter()
                .enumerate()
                .map(|(i, v)| (i, v.iter().map(|z| z.norm_sqr()).sum::<f64>()))
                .max_by(|a, b| a.1.total_cmp(&b.1))
                .expect("cluster is non-empty");
            let mut pick = candidates.swap_remove(best);
            let norm = pick.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            pick.iter_mut().for_each(|z| *z /= norm);
            for other in candidates.iter_mut() {
                let overlap: C64 = pick.iter().zip(other.iter()).map(|(a, b)| a.conj() * b).sum();
                other.iter_mut().zip(&pick).for_each(|(b, a)| *b -= a * overlap);
            }
            let col = out_values.len();
            let value: f64 = {
                let mv = m * nalgebra::DVector::from_column_slice(&pick);
                pick.iter().zip(mv.iter()).map(|(a, b)| (a.conj() * b).re).sum()
            };
            out_values.push(value);
            out_vectors.column_mut(col).copy_from_slice(&pick);
        }
        start = end;
    }
    Ok((out_values, out_vectors))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn check(m: &DMatrix<C64>) {
        let (values, vectors) = hermitian_eigh(m).unwrap();
        assert_eq!(values.len(), m.nrows());
        assert!(values.windows(2).all(|w| w[0] <= w[1] + 1e-12));
        let gram = vectors.adjoint() * &vectors;
        assert!((gram - DMatrix::<C64>::identity(m.nrows(), m.nrows())).iter().all(|z| z.norm() < 1e-10));
        for (i, &v) in values.iter().enumerate() {
            let col = vectors.column(i);
            assert!((m * col - col * C64::from(v)).norm() < 1e-10);
        }
    }

    #[test]
    fn random_complex_hermitian() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = DMatrix::<C64>::from_fn(12, 12, |_, _| C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5));
        check(&(&a + a.adjoint()));
    }

    #[test]
    fn degenerate_complex_hermitian() {
        // Y ⊗ I has two doubly degenerate eigenvalues and purely imaginary entries
        let y = DMatrix::from_row_slice(2, 2, &[C64::new(0.0, 0.0), C64::new(0.0, -1.0), C64::new(0.0, 1.0), C64::new(0.0, 0.0)]);
        let m = y.kronecker(&DMatrix::<C64>::identity(2, 2));
        check(&m);
        let (values, _) = hermitian_eigh(&m).unwrap();
        assert!((values[0] + 1.0).abs() < 1e-12 && (values[3] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn real_path_and_empty() {
        let m = DMatrix::<C64>::from_fn(3, 3, |r, c| C64::from((r + c) as f64));
        check(&m);
        assert!(hermitian_eigh(&DMatrix::<C64>::zeros(0, 0)).unwrap().0.is_empty());
    }
}
