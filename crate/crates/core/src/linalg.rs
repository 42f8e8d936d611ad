//! Dense helpers on top of nalgebra: ranks, spans, null spaces.

use nalgebra::{DMatrix, DVector, SymmetricEigen, SVD};

use crate::config::{RANK_ABSOLUTE, RANK_RELATIVE};

fn rank_cutoff(singular: &DVector<f64>) -> f64 {
    let largest = singular.iter().cloned().fold(0.0, f64::max);
    (RANK_RELATIVE * largest).max(RANK_ABSOLUTE)
}

/// Orthonormal basis (as columns) of the column span of `vectors`.
pub fn orthonormal_span(vectors: &DMatrix<f64>) -> DMatrix<f64> {
    orthonormal_span_above(vectors, 0.0)
}

/// As [`orthonormal_span`], also dropping singular values below `floor`.
/// Needed when every column may be round-off: the relative cutoff alone
/// would then keep noise directions.
pub fn orthonormal_span_above(vectors: &DMatrix<f64>, floor: f64) -> DMatrix<f64> {
    let rows = vectors.nrows();
    if vectors.ncols() == 0 || rows == 0 {
        return DMatrix::zeros(rows, 0);
    }
    let svd = SVD::new(vectors.clone(), true, false);
    let u = svd.u.expect("requested U");
    let cutoff = rank_cutoff(&svd.singular_values).max(floor);
    let keep: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| svd.singular_values[i] > cutoff)
        .collect();
    let mut out = DMatrix::zeros(rows, keep.len());
    for (c, &i) in keep.iter().enumerate() {
        out.set_column(c, &u.column(i));
    }
    out
}

/// Orthonormal basis of `{x : m x = 0}`.
pub fn null_space(m: &DMatrix<f64>) -> DMatrix<f64> {
    let n = m.ncols();
    if n == 0 {
        return DMatrix::zeros(0, 0);
    }
    // Pad so that SVD returns a full n x n right factor.
    let rows = m.nrows().max(n);
    let mut padded = DMatrix::zeros(rows, n);
    padded.view_mut((0, 0), (m.nrows(), n)).copy_from(m);
    let svd = SVD::new(padded, false, true);
    let v_t = svd.v_t.expect("requested V^T");
    let cutoff = rank_cutoff(&svd.singular_values);
    let null: Vec<usize> = (0..n)
        .filter(|&i| svd.singular_values[i] <= cutoff)
        .collect();
    let mut out = DMatrix::zeros(n, null.len());
    for (c, &i) in null.iter().enumerate() {
        out.set_column(c, &v_t.row(i).transpose());
    }
    out
}

pub fn symmetric_eigenvalues(m: &DMatrix<f64>) -> DVector<f64> {
    let sym = (m + m.transpose()) * 0.5;
    SymmetricEigen::new(sym).eigenvalues
}

pub fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    symmetric_eigenvalues(m).iter().cloned().fold(f64::INFINITY, f64::min)
}

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

pub fn unit(n: usize, i: usize) -> DVector<f64> {
    let mut v = DVector::zeros(n);
    v[i] = 1.0;
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spans_and_kernels() {
        let m = DMatrix::from_row_slice(3, 3, &[1.0, 2.0, 3.0, 2.0, 4.0, 6.0, 0.0, 1.0, 1.0]);
        let span = orthonormal_span(&m);
        assert_eq!(span.ncols(), 2);
        assert!((span.transpose() * &span - DMatrix::identity(2, 2)).amax() < 1e-14);
        let ker = null_space(&m);
        assert_eq!(ker.ncols(), 1);
        assert!((&m * &ker).amax() < 1e-14);
    }

    #[test]
    fn wide_matrix_kernel() {
        let m = DMatrix::from_row_slice(1, 3, &[1.0, 1.0, 0.0]);
        assert_eq!(null_space(&m).ncols(), 2);
        assert_eq!(orthonormal_span(&DMatrix::zeros(3, 0)).ncols(), 0);
    }

    #[test]
    fn eigenvalues() {
        let m = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]);
        assert!((min_eigenvalue(&m) - 1.0).abs() < 1e-14);
        assert_eq!(max_abs(&m), 2.0);
        assert_eq!(unit(3, 1), DVector::from_vec(vec![0.0, 1.0, 0.0]));
    }
}
