use nalgebra::{DMatrix, DVector};

use crate::complex::ComplexStructure;
use crate::config::{EXACT_ZERO, PD_RELATIVE};
use crate::error::{Error, Result};
use crate::exterior::KForm;
use crate::lie::Subspace;
use crate::linalg;

/// A positive-definite inner product, stored as its Gram matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Metric {
    g: DMatrix<f64>,
}

impl Metric {
    pub fn new(g: DMatrix<f64>) -> Result<Self> {
        if !g.is_square() {
            return Err(Error::DimensionMismatch { expected: g.nrows(), found: g.ncols() });
        }
        let scale = linalg::max_abs(&g).max(1.0);
        let asym = linalg::max_abs(&(&g - g.transpose()));
        if asym > 1e-12 * scale {
            return Err(Error::InvalidMetric(format!("not symmetric (defect {asym:.3e})")));
        }
        let g = linalg::symmetrize(&g);
        let lo = linalg::min_eigenvalue(&g);
        let trace = g.trace();
        if !(lo > PD_RELATIVE * trace) {
            return Err(Error::InvalidMetric(format!("not positive definite (min eigenvalue {lo:.3e})")));
        }
        Ok(Self { g })
    }

    pub fn identity(dim: usize) -> Self {
        Self { g: DMatrix::identity(dim, dim) }
    }

    pub fn diagonal(entries: &[f64]) -> Result<Self> {
        Self::new(DMatrix::from_diagonal(&DVector::from_column_slice(entries)))
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.g
    }

    pub fn dim(&self) -> usize {
        self.g.nrows()
    }

    pub fn inner(&self, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        (x.transpose() * &self.g * y)[0]
    }

    pub fn norm_sq(&self, x: &DVector<f64>) -> f64 {
        self.inner(x, x)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        linalg::min_eigenvalue(&self.g)
    }

    /// `max |J^T G J - G|`.
    pub fn hermitian_residual(&self, j: &ComplexStructure) -> f64 {
        let jm = j.matrix();
        linalg::max_abs(&(jm.transpose() * &self.g * jm - &self.g))
    }

    pub fn check_hermitian(&self, j: &ComplexStructure) -> Result<()> {
        if j.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: j.dim() });
        }
        let r = self.hermitian_residual(j);
        if r >= EXACT_ZERO * linalg::max_abs(&self.g).max(1.0) {
            return Err(Error::NotHermitian(r));
        }
        Ok(())
    }

    /// Average of `G` and `J^T G J`; the result is Hermitian for `j`.
    pub fn hermitianize(g: &DMatrix<f64>, j: &ComplexStructure) -> Result<Self> {
        let jm = j.matrix();
        Self::new(linalg::symmetrize(&((g + jm.transpose() * g * jm) * 0.5)))
    }

    /// Gram matrix in the basis given by the columns of `p`.
    pub fn change_basis(&self, p: &DMatrix<f64>) -> Result<Self> {
        Self::new(linalg::symmetrize(&(p.transpose() * &self.g * p)))
    }

    /// Restriction to a subspace, in the subspace's orthonormal frame.
    pub fn restrict(&self, s: &Subspace) -> Result<Self> {
        self.change_basis_rect(s.basis())
    }

    fn change_basis_rect(&self, q: &DMatrix<f64>) -> Result<Self> {
        Self::new(linalg::symmetrize(&(q.transpose() * &self.g * q)))
    }

    pub fn direct_sum(&self, other: &Metric) -> Metric {
        let a = self.dim();
        let b = other.dim();
        let mut g = DMatrix::zeros(a + b, a + b);
        g.view_mut((0, 0), (a, a)).copy_from(&self.g);
        g.view_mut((a, a), (b, b)).copy_from(&other.g);
        Metric { g }
    }

    /// Recovers `g(x, y) = omega(x, J y)` from a fundamental form.
    pub fn from_fundamental_form(omega: &KForm, j: &ComplexStructure) -> Result<Self> {
        if omega.degree() != 2 {
            return Err(Error::InvalidMetric("fundamental form must be a 2-form".into()));
        }
        if !omega.is_real(1e-12) {
            return Err(Error::InvalidMetric("fundamental form must be real".into()));
        }
        let n = omega.dim();
        let jm = j.matrix();
        let w = DMatrix::from_fn(n, n, |a, b| omega.eval_basis(&[a, b]).re);
        Self::new(linalg::symmetrize(&(w * jm)))
    }
}

/// `omega(x, y) = g(Jx, y)`.
pub fn fundamental_form(g: &Metric, j: &ComplexStructure) -> Result<KForm> {
    g.check_hermitian(j)?;
    let w = j.matrix().transpose() * g.matrix();
    KForm::from_real_fn(g.dim(), 2, |idx| w[(idx[0], idx[1])])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_matrices() {
        let asym = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]);
        assert!(Metric::new(asym).is_err());
        let indefinite = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(Metric::new(indefinite).is_err());
    }

    #[test]
    fn fundamental_form_of_kodaira_thurston_structures() {
        let j = ComplexStructure::standard(2);
        let omega = fundamental_form(&Metric::identity(4), &j).unwrap();
        let expected = KForm::basis(4, &[0, 2]).unwrap().add(&KForm::basis(4, &[1, 3]).unwrap()).unwrap();
        assert!(omega.distance(&expected).unwrap() < 1e-15);

        let g = Metric::diagonal(&[3.0, 5.0, 3.0, 5.0]).unwrap();
        let omega = fundamental_form(&g, &j).unwrap();
        let expected = KForm::basis(4, &[0, 2])
            .unwrap()
            .scale_real(3.0)
            .add(&KForm::basis(4, &[1, 3]).unwrap().scale_real(5.0))
            .unwrap();
        assert!(omega.distance(&expected).unwrap() < 1e-15);
    }

    #[test]
    fn fundamental_form_of_plane() {
        let omega = fundamental_form(&Metric::identity(2), &ComplexStructure::interleaved(1)).unwrap();
        assert!(omega.distance(&KForm::basis(2, &[0, 1]).unwrap()).unwrap() < 1e-15);
    }

    #[test]
    fn non_hermitian_pair_is_rejected() {
        let g = Metric::diagonal(&[1.0, 2.0, 1.0, 1.0]).unwrap();
        assert!(matches!(fundamental_form(&g, &ComplexStructure::standard(2)), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn metric_roundtrips_through_fundamental_form() {
        let j = ComplexStructure::standard(2);
        let g0 = DMatrix::from_row_slice(4, 4, &[
            2.0, 0.3, 0.0, 0.1, 0.3, 1.5, -0.1, 0.0, 0.0, -0.1, 2.0, 0.3, 0.1, 0.0, 0.3, 1.5,
        ]);
        let g = Metric::hermitianize(&g0, &j).unwrap();
        let omega = fundamental_form(&g, &j).unwrap();
        assert!(omega.j_pullback(&j).unwrap().distance(&omega).unwrap() < 1e-14);
        let back = Metric::from_fundamental_form(&omega, &j).unwrap();
        assert!((back.matrix() - g.matrix()).abs().max() < 1e-14);
    }
}
