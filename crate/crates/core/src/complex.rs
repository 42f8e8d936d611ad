//! Almost-complex structures on a Lie algebra: integrability, the abelian
//! condition and J-adapted orthonormal bases.

use nalgebra::{DMatrix, DVector};

use crate::config::{COMPLEX_STRUCTURE, EXACT_ZERO};
use crate::error::{Error, Result};
use crate::lie::LieAlgebra;
use crate::linalg;

#[derive(Clone, Debug, PartialEq)]
pub struct ComplexStructure {
    j: DMatrix<f64>,
}

impl ComplexStructure {
    pub fn new(j: DMatrix<f64>) -> Result<Self> {
        if !j.is_square() {
            return Err(Error::DimensionMismatch { expected: j.nrows(), found: j.ncols() });
        }
        let n = j.nrows();
        if !n.is_multiple_of(2) {
            return Err(Error::NotComplexStructure(f64::INFINITY));
        }
        let defect = linalg::max_abs(&(&j * &j + DMatrix::<f64>::identity(n, n)));
        if defect >= COMPLEX_STRUCTURE {
            return Err(Error::NotComplexStructure(defect));
        }
        Ok(Self { j })
    }

    /// `J e_i = e_{i+n}`, `J e_{i+n} = -e_i` on a `2n`-dimensional space.
    pub fn standard(n: usize) -> Self {
        let mut j = DMatrix::zeros(2 * n, 2 * n);
        for i in 0..n {
            j[(i + n, i)] = 1.0;
            j[(i, i + n)] = -1.0;
        }
        Self { j }
    }

    /// `J e_{2k} = e_{2k+1}`, `J e_{2k+1} = -e_{2k}`.
    pub fn interleaved(n: usize) -> Self {
        let mut j = DMatrix::zeros(2 * n, 2 * n);
        for k in 0..n {
            j[(2 * k + 1, 2 * k)] = 1.0;
            j[(2 * k, 2 * k + 1)] = -1.0;
        }
        Self { j }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.j
    }

    pub fn dim(&self) -> usize {
        self.j.nrows()
    }

    /// Complex dimension `n`.
    pub fn complex_dim(&self) -> usize {
        self.j.nrows() / 2
    }

    pub fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        &self.j * v
    }

    /// `P^{-1} J P`, the same structure in the basis given by the columns of `P`.
    pub fn change_basis(&self, p: &DMatrix<f64>) -> Result<Self> {
        let inv = p
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::InvalidParameters("basis change is singular".into()))?;
        let j = &inv * &self.j * p;
        let n = j.nrows();
        let defect = linalg::max_abs(&(&j * &j + DMatrix::<f64>::identity(n, n)));
        // Conditioning of P can cost a few digits here.
        if defect >= 1e-9 {
            return Err(Error::NotComplexStructure(defect));
        }
        Ok(Self { j })
    }

    /// Restriction to a `J`-invariant subspace, in the subspace's frame.
    pub fn restrict(&self, s: &crate::lie::Subspace) -> Result<Self> {
        if !s.is_invariant_under(&self.j, 1e-9) {
            return Err(Error::InvalidParameters("subspace is not J-invariant".into()));
        }
        let q = s.basis();
        let j = q.transpose() * &self.j * q;
        Ok(Self { j })
    }

    pub fn direct_sum(&self, other: &Self) -> Self {
        let a = self.dim();
        let b = other.dim();
        let mut j = DMatrix::zeros(a + b, a + b);
        j.view_mut((0, 0), (a, a)).copy_from(&self.j);
        j.view_mut((a, a), (b, b)).copy_from(&other.j);
        Self { j }
    }
}

fn check_dims(lie: &LieAlgebra, j: &ComplexStructure) -> Result<()> {
    if lie.dim() != j.dim() {
        return Err(Error::DimensionMismatch { expected: lie.dim(), found: j.dim() });
    }
    Ok(())
}

/// Max over basis pairs of `|J[x,y] - [Jx,y] - [x,Jy] - J[Jx,Jy]|`.
pub fn nijenhuis_residual(lie: &LieAlgebra, j: &ComplexStructure) -> Result<f64> {
    check_dims(lie, j)?;
    let n = lie.dim();
    let mut worst: f64 = 0.0;
    for a in 0..n {
        let x = linalg::unit(n, a);
        let jx = j.apply(&x);
        for b in a + 1..n {
            let y = linalg::unit(n, b);
            let jy = j.apply(&y);
            let v = j.apply(&lie.bracket(&x, &y))
                - lie.bracket(&jx, &y)
                - lie.bracket(&x, &jy)
                - j.apply(&lie.bracket(&jx, &jy));
            worst = worst.max(v.norm());
        }
    }
    Ok(worst)
}

pub fn is_integrable(lie: &LieAlgebra, j: &ComplexStructure) -> Result<bool> {
    Ok(nijenhuis_residual(lie, j)? < EXACT_ZERO)
}

/// Max over basis pairs of `|[Jx,Jy] - [x,y]|`.
pub fn abelian_residual(lie: &LieAlgebra, j: &ComplexStructure) -> Result<f64> {
    check_dims(lie, j)?;
    let n = lie.dim();
    let mut worst: f64 = 0.0;
    for a in 0..n {
        let x = linalg::unit(n, a);
        let jx = j.apply(&x);
        for b in a + 1..n {
            let y = linalg::unit(n, b);
            let v = lie.bracket(&jx, &j.apply(&y)) - lie.bracket(&x, &y);
            worst = worst.max(v.norm());
        }
    }
    Ok(worst)
}

pub fn is_abelian(lie: &LieAlgebra, j: &ComplexStructure) -> Result<bool> {
    Ok(abelian_residual(lie, j)? < EXACT_ZERO)
}

/// A `g`-orthonormal basis `eps_1..eps_2n` (matrix columns) with
/// `J eps_i = eps_{i+n}`.
///
/// Greedy: scan coordinate axes in order, take the `g`-orthogonal part of
/// each axis relative to the current (J-invariant) span, and append the pair
/// `(v, Jv)` when it survives.
pub fn adapted_basis(j: &ComplexStructure, g: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n2 = j.dim();
    if g.nrows() != n2 || g.ncols() != n2 {
        return Err(Error::DimensionMismatch { expected: n2, found: g.nrows() });
    }
    let eig = linalg::symmetric_eigenvalues(g);
    let lo = eig.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = eig.iter().cloned().fold(0.0, f64::max);
    if lo <= 0.0 || hi / lo > 1e12 {
        return Err(Error::InvalidMetric(format!("ill-conditioned metric (eigenvalues in [{lo:.3e}, {hi:.3e}])")));
    }
    let n = n2 / 2;
    let inner = |u: &DVector<f64>, v: &DVector<f64>| (u.transpose() * g * v)[0];
    let mut firsts: Vec<DVector<f64>> = Vec::with_capacity(n);
    let mut seconds: Vec<DVector<f64>> = Vec::with_capacity(n);
    for axis in 0..n2 {
        if firsts.len() == n {
            break;
        }
        let mut v = linalg::unit(n2, axis);
        // Two passes of Gram-Schmidt for stability.
        for _ in 0..2 {
            for u in firsts.iter().chain(seconds.iter()) {
                let c = inner(u, &v);
                v -= u * c;
            }
        }
        let norm = inner(&v, &v).max(0.0).sqrt();
        if norm < 1e-8 {
            continue;
        }
        v /= norm;
        let mut jv = j.apply(&v);
        let jn = inner(&jv, &jv).sqrt();
        jv /= jn;
        firsts.push(v);
        seconds.push(jv);
    }
    if firsts.len() != n {
        return Err(Error::InvalidMetric("could not complete an adapted basis".into()));
    }
    let mut out = DMatrix::zeros(n2, n2);
    for (k, v) in firsts.iter().enumerate() {
        out.set_column(k, v);
    }
    for (k, v) in seconds.iter().enumerate() {
        out.set_column(n + k, v);
    }
    Ok(out)
}
