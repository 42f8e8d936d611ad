//! Real Lie algebras given by structure constants on a fixed basis.
//!
//! `[e_i, e_j] = sum_k c[i][j][k] e_k`, stored antisymmetrized.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::complex::ComplexStructure;
use crate::config::{DERIVED_ZERO, EXACT_ZERO, RANK_RELATIVE};
use crate::error::{Error, Result};
use crate::linalg;

#[derive(Clone, Debug, PartialEq)]
pub struct LieAlgebra {
    dim: usize,
    c: Vec<f64>,
}

/// Outcome of running the lower central series to a fixed point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Nilpotency {
    /// `g^step = 0` for the first time at this index (abelian is step 1).
    Step(usize),
    NotNilpotent,
}

impl Nilpotency {
    pub fn step(self) -> Option<usize> {
        match self {
            Nilpotency::Step(s) => Some(s),
            Nilpotency::NotNilpotent => None,
        }
    }

    /// True for abelian or 2-step nilpotent algebras.
    pub fn at_most_two_step(self) -> bool {
        matches!(self, Nilpotency::Step(s) if s <= 2)
    }
}

impl LieAlgebra {
    /// Builds an algebra from `(i, j, k, c)` entries meaning `[e_i, e_j] += c e_k`
    /// (and the antisymmetric partner). Rejects brackets violating Jacobi.
    pub fn new(dim: usize, brackets: impl IntoIterator<Item = (usize, usize, usize, f64)>) -> Result<Self> {
        let lie = Self::new_unchecked(dim, brackets)?;
        let residual = lie.jacobi_residual();
        if residual >= EXACT_ZERO {
            return Err(Error::Jacobi(residual));
        }
        Ok(lie)
    }

    /// Same as [`LieAlgebra::new`] without the Jacobi check. Useful for
    /// probing what breaks when the bracket is not a Lie bracket.
    pub fn new_unchecked(
        dim: usize,
        brackets: impl IntoIterator<Item = (usize, usize, usize, f64)>,
    ) -> Result<Self> {
        let mut c = vec![0.0; dim * dim * dim];
        for (i, j, k, v) in brackets {
            let bad = i.max(j).max(k);
            if bad >= dim {
                return Err(Error::DimensionMismatch { expected: dim, found: bad + 1 });
            }
            if i == j {
                if v != 0.0 {
                    return Err(Error::InvalidParameters(format!("[e_{i}, e_{i}] must vanish")));
                }
                continue;
            }
            c[(i * dim + j) * dim + k] += v;
            c[(j * dim + i) * dim + k] -= v;
        }
        Ok(Self { dim, c })
    }

    /// From a dense `dim^3` array indexed `(i * dim + j) * dim + k`;
    /// the input is antisymmetrized in `(i, j)`.
    pub fn from_structure_constants(dim: usize, raw: &[f64]) -> Result<Self> {
        if raw.len() != dim * dim * dim {
            return Err(Error::DimensionMismatch { expected: dim * dim * dim, found: raw.len() });
        }
        let mut c = vec![0.0; raw.len()];
        for i in 0..dim {
            for j in 0..dim {
                for k in 0..dim {
                    c[(i * dim + j) * dim + k] =
                        0.5 * (raw[(i * dim + j) * dim + k] - raw[(j * dim + i) * dim + k]);
                }
            }
        }
        let lie = Self { dim, c };
        let residual = lie.jacobi_residual();
        if residual >= EXACT_ZERO {
            return Err(Error::Jacobi(residual));
        }
        Ok(lie)
    }

    pub fn abelian(dim: usize) -> Self {
        Self { dim, c: vec![0.0; dim * dim * dim] }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn structure_constant(&self, i: usize, j: usize, k: usize) -> f64 {
        self.c[(i * self.dim + j) * self.dim + k]
    }

    /// Nonzero `(i, j, k, c)` with `i < j`.
    pub fn brackets(&self) -> Vec<(usize, usize, usize, f64)> {
        let mut out = Vec::new();
        for i in 0..self.dim {
            for j in i + 1..self.dim {
                for k in 0..self.dim {
                    let v = self.structure_constant(i, j, k);
                    if v != 0.0 {
                        out.push((i, j, k, v));
                    }
                }
            }
        }
        out
    }

    pub fn is_abelian(&self) -> bool {
        self.c.iter().all(|&x| x == 0.0)
    }

    pub fn bracket_basis(&self, i: usize, j: usize) -> DVector<f64> {
        let start = (i * self.dim + j) * self.dim;
        DVector::from_column_slice(&self.c[start..start + self.dim])
    }

    pub fn bracket(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        let n = self.dim;
        let mut out = DVector::zeros(n);
        for i in 0..n {
            if x[i] == 0.0 {
                continue;
            }
            for j in 0..n {
                let w = x[i] * y[j];
                if w == 0.0 || i == j {
                    continue;
                }
                let start = (i * n + j) * n;
                for k in 0..n {
                    out[k] += w * self.c[start + k];
                }
            }
        }
        out
    }

    /// Matrix of `ad_x`.
    pub fn ad(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let n = self.dim;
        let mut m = DMatrix::zeros(n, n);
        for j in 0..n {
            let col = self.bracket(x, &linalg::unit(n, j));
            m.set_column(j, &col);
        }
        m
    }

    /// Max over basis triples of `|[[e_i,e_j],e_k] + [[e_j,e_k],e_i] + [[e_k,e_i],e_j]|`.
    pub fn jacobi_residual(&self) -> f64 {
        let n = self.dim;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                for k in j + 1..n {
                    let mut acc = DVector::zeros(n);
                    for (a, b, c) in [(i, j, k), (j, k, i), (k, i, j)] {
                        let ab = self.bracket_basis(a, b);
                        acc += self.bracket(&ab, &linalg::unit(n, c));
                    }
                    worst = worst.max(acc.norm());
                }
            }
        }
        worst
    }

    /// `max_i |tr ad_{e_i}|`.
    pub fn unimodularity_defect(&self) -> f64 {
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.structure_constant(i, j, j)).sum::<f64>().abs())
            .fold(0.0, f64::max)
    }

    pub fn is_unimodular(&self) -> bool {
        self.unimodularity_defect() < EXACT_ZERO
    }

    /// `[A, B]` for subspaces `A`, `B`.
    pub fn bracket_subspaces(&self, a: &Subspace, b: &Subspace) -> Subspace {
        let n = self.dim;
        let mut cols = DMatrix::zeros(n, a.dim() * b.dim());
        let mut c = 0;
        for u in a.basis().column_iter() {
            for v in b.basis().column_iter() {
                cols.set_column(c, &self.bracket(&u.into_owned(), &v.into_owned()));
                c += 1;
            }
        }
        // brackets of unit vectors are O(|c|); anything far below is round-off
        let floor = RANK_RELATIVE * self.c.iter().map(|x| x * x).sum::<f64>().sqrt();
        Subspace { basis: linalg::orthonormal_span_above(&cols, floor) }
    }

    /// `g = g^0 ⊇ g^1 = [g,g] ⊇ g^2 = [g,g^1] ⊇ ...` up to its fixed point.
    pub fn lower_central_series(&self) -> Vec<Subspace> {
        let full = Subspace::full(self.dim);
        let mut series = vec![full.clone()];
        loop {
            let last = series.last().expect("nonempty");
            let next = self.bracket_subspaces(&full, last);
            let stalled = next.dim() >= last.dim();
            series.push(next);
            if stalled || series.last().map(Subspace::dim) == Some(0) {
                break;
            }
        }
        series
    }

    pub fn nilpotency_step(&self) -> Nilpotency {
        let series = self.lower_central_series();
        match series.iter().position(|s| s.dim() == 0) {
            Some(0) => Nilpotency::Step(1),
            Some(i) => Nilpotency::Step(i),
            None => Nilpotency::NotNilpotent,
        }
    }

    /// `g ⊇ [g,g] ⊇ [g^(1), g^(1)] ⊇ ...` up to its fixed point.
    pub fn derived_series(&self) -> Vec<Subspace> {
        let mut series = vec![Subspace::full(self.dim)];
        loop {
            let last = series.last().expect("nonempty");
            let next = self.bracket_subspaces(last, last);
            let stalled = next.dim() >= last.dim();
            series.push(next);
            if stalled || series.last().map(Subspace::dim) == Some(0) {
                break;
            }
        }
        series
    }

    /// First index at which the derived series vanishes, if it does.
    pub fn solvability_step(&self) -> Option<usize> {
        let series = self.derived_series();
        series.iter().position(|s| s.dim() == 0).map(|i| i.max(1))
    }

    /// `{x : [x, y] = 0 for all y}` as the null space of the stacked `ad` map.
    pub fn center(&self) -> Subspace {
        let n = self.dim;
        // Row block j holds the map x -> [x, e_j].
        let mut m = DMatrix::zeros(n * n, n);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    m[(j * n + k, i)] = self.structure_constant(i, j, k);
                }
            }
        }
        Subspace { basis: linalg::null_space(&m) }
    }

    /// `[g, g]`.
    pub fn derived_algebra(&self) -> Subspace {
        let full = Subspace::full(self.dim);
        self.bracket_subspaces(&full, &full)
    }

    /// Largest component of `[S, S]` leaving `S`.
    pub fn subalgebra_defect(&self, s: &Subspace) -> f64 {
        let inner = self.bracket_subspaces_raw(s, s);
        inner
            .iter()
            .map(|v| (v - s.project(v)).norm())
            .fold(0.0, f64::max)
    }

    fn bracket_subspaces_raw(&self, a: &Subspace, b: &Subspace) -> Vec<DVector<f64>> {
        let mut out = Vec::new();
        for u in a.basis().column_iter() {
            for v in b.basis().column_iter() {
                out.push(self.bracket(&u.into_owned(), &v.into_owned()));
            }
        }
        out
    }

    /// Structure constants of the subalgebra `S` in its orthonormal frame.
    pub fn restrict(&self, s: &Subspace) -> Result<LieAlgebra> {
        if s.ambient_dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: s.ambient_dim() });
        }
        let defect = self.subalgebra_defect(s);
        if defect >= DERIVED_ZERO {
            return Err(Error::NotSubalgebra(defect));
        }
        let q = s.basis();
        let d = s.dim();
        let mut c = vec![0.0; d * d * d];
        for a in 0..d {
            for b in 0..d {
                let br = self.bracket(&q.column(a).into_owned(), &q.column(b).into_owned());
                let coords = q.transpose() * br;
                for k in 0..d {
                    c[(a * d + b) * d + k] = coords[k];
                }
            }
        }
        Ok(LieAlgebra { dim: d, c })
    }

    /// Structure constants in the basis `f_a = sum_m p[(m, a)] e_m`.
    pub fn change_basis(&self, p: &DMatrix<f64>) -> Result<LieAlgebra> {
        let n = self.dim;
        if p.nrows() != n || p.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, found: p.nrows() });
        }
        let inv = p
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::InvalidParameters("basis change is singular".into()))?;
        let mut c = vec![0.0; n * n * n];
        for a in 0..n {
            for b in 0..n {
                let br = self.bracket(&p.column(a).into_owned(), &p.column(b).into_owned());
                let coords = &inv * br;
                for k in 0..n {
                    c[(a * n + b) * n + k] = coords[k];
                }
            }
        }
        let out = LieAlgebra { dim: n, c };
        Ok(out)
    }

    /// `self ⊕ other` with `other`'s basis appended.
    pub fn direct_sum(&self, other: &LieAlgebra) -> LieAlgebra {
        let n = self.dim + other.dim;
        let mut c = vec![0.0; n * n * n];
        for (i, j, k, v) in self.brackets() {
            c[(i * n + j) * n + k] = v;
            c[(j * n + i) * n + k] = -v;
        }
        let o = self.dim;
        for (i, j, k, v) in other.brackets() {
            c[((i + o) * n + j + o) * n + k + o] = v;
            c[((j + o) * n + i + o) * n + k + o] = -v;
        }
        LieAlgebra { dim: n, c }
    }

    /// Permutes basis vectors: new `e'_a = e_{perm[a]}`.
    pub fn permute(&self, perm: &[usize]) -> Result<LieAlgebra> {
        let n = self.dim;
        let mut p = DMatrix::zeros(n, n);
        for (a, &src) in perm.iter().enumerate() {
            p[(src, a)] = 1.0;
        }
        self.change_basis(&p)
    }
}

/// `g^1_J = [g,g] + J[g,g]`.
pub fn g1_j(lie: &LieAlgebra, j: &ComplexStructure) -> Subspace {
    let g1 = lie.derived_algebra();
    g1.plus(&g1.image(j.matrix()))
}

/// A linear subspace carried by an orthonormal column frame.
#[derive(Clone, Debug)]
pub struct Subspace {
    basis: DMatrix<f64>,
}

impl Subspace {
    /// Span of the columns of `vectors`.
    pub fn span(vectors: &DMatrix<f64>) -> Self {
        Self { basis: linalg::orthonormal_span(vectors) }
    }

    pub fn from_vectors(ambient: usize, vectors: &[DVector<f64>]) -> Self {
        let mut m = DMatrix::zeros(ambient, vectors.len());
        for (c, v) in vectors.iter().enumerate() {
            m.set_column(c, v);
        }
        Self::span(&m)
    }

    pub fn zero(ambient: usize) -> Self {
        Self { basis: DMatrix::zeros(ambient, 0) }
    }

    pub fn full(ambient: usize) -> Self {
        Self { basis: DMatrix::identity(ambient, ambient) }
    }

    /// Span of the given coordinate axes.
    pub fn coordinate(ambient: usize, axes: &[usize]) -> Self {
        let vs: Vec<DVector<f64>> = axes.iter().map(|&i| linalg::unit(ambient, i)).collect();
        Self::from_vectors(ambient, &vs)
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    /// Orthonormal columns spanning the subspace.
    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn projector(&self) -> DMatrix<f64> {
        &self.basis * self.basis.transpose()
    }

    pub fn project(&self, v: &DVector<f64>) -> DVector<f64> {
        &self.basis * (self.basis.transpose() * v)
    }

    pub fn contains(&self, v: &DVector<f64>, tol: f64) -> bool {
        (v - self.project(v)).norm() <= tol * v.norm().max(1.0)
    }

    pub fn plus(&self, other: &Subspace) -> Subspace {
        let n = self.ambient_dim();
        let mut m = DMatrix::zeros(n, self.dim() + other.dim());
        m.view_mut((0, 0), (n, self.dim())).copy_from(&self.basis);
        m.view_mut((0, self.dim()), (n, other.dim())).copy_from(&other.basis);
        Subspace::span(&m)
    }

    /// Image under a linear map.
    pub fn image(&self, map: &DMatrix<f64>) -> Subspace {
        Subspace::span(&(map * &self.basis))
    }

    /// Euclidean orthogonal complement in the ambient coordinates.
    pub fn complement(&self) -> Subspace {
        let n = self.ambient_dim();
        let p = DMatrix::<f64>::identity(n, n) - self.projector();
        Subspace::span(&p)
    }

    /// Complement with respect to the inner product `g`.
    pub fn g_complement(&self, g: &DMatrix<f64>) -> Subspace {
        Subspace { basis: linalg::null_space(&(self.basis.transpose() * g)) }
    }

    pub fn is_invariant_under(&self, map: &DMatrix<f64>, tol: f64) -> bool {
        let img = map * &self.basis;
        img.column_iter().all(|c| self.contains(&c.into_owned(), tol))
    }

    /// Sine of the largest principal angle; `None` when dimensions differ.
    pub fn max_principal_angle_sin(&self, other: &Subspace) -> Option<f64> {
        if self.dim() != other.dim() || self.ambient_dim() != other.ambient_dim() {
            return None;
        }
        if self.dim() == 0 {
            return Some(0.0);
        }
        let residual = &other.basis - self.projector() * &other.basis;
        Some(residual.column_iter().map(|c| c.norm()).fold(0.0, f64::max).min(1.0))
    }

    pub fn same_as(&self, other: &Subspace, tol: f64) -> bool {
        self.max_principal_angle_sin(other).is_some_and(|s| s < tol)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kt(lambda: f64) -> LieAlgebra {
        LieAlgebra::new(4, [(0, 2, 1, lambda)]).unwrap()
    }

    #[test]
    fn jacobi_residual_of_examples() {
        assert_eq!(LieAlgebra::abelian(4).jacobi_residual(), 0.0);
        assert_eq!(kt(1.5).jacobi_residual(), 0.0);
        // [e0,e1] = e2, [e0,e2] = e1 is a genuine Lie algebra: the only triple
        // gives [e2,e2] + 0 + [-e1,e1] = 0.
        let ok = LieAlgebra::new_unchecked(3, [(0, 1, 2, 1.0), (0, 2, 1, 1.0)]).unwrap();
        assert_eq!(ok.jacobi_residual(), 0.0);
        let bad = LieAlgebra::new_unchecked(3, [(0, 1, 2, 1.0), (1, 2, 1, 1.0)]).unwrap();
        // [[e0,e1],e2] = [e2,e2] = 0; [[e1,e2],e0] = [e1,e0] = -e2; [[e2,e0],e1] = 0.
        assert!((bad.jacobi_residual() - 1.0).abs() < 1e-15);
        assert!(matches!(LieAlgebra::new(3, [(0, 1, 2, 1.0), (1, 2, 1, 1.0)]), Err(Error::Jacobi(_))));
    }

    #[test]
    fn unimodularity() {
        assert!(kt(2.0).is_unimodular());
        assert!(LieAlgebra::abelian(2).is_unimodular());
        let aff = LieAlgebra::new(2, [(0, 1, 1, 1.0)]).unwrap();
        assert!(!aff.is_unimodular());
        assert_eq!(aff.unimodularity_defect(), 1.0);
    }

    #[test]
    fn nilpotency_steps() {
        assert_eq!(LieAlgebra::abelian(4).nilpotency_step(), Nilpotency::Step(1));
        assert_eq!(kt(1.0).nilpotency_step(), Nilpotency::Step(2));
        let aff = LieAlgebra::new(2, [(0, 1, 1, 1.0)]).unwrap();
        assert_eq!(aff.nilpotency_step(), Nilpotency::NotNilpotent);
        let series = kt(1.0).lower_central_series();
        assert_eq!(series.iter().map(Subspace::dim).collect::<Vec<_>>(), vec![4, 1, 0]);
    }

    #[test]
    fn center_of_kodaira_thurston() {
        let z = kt(3.0).center();
        assert!(z.same_as(&Subspace::coordinate(4, &[1, 3]), 1e-12));
        assert_eq!(LieAlgebra::abelian(4).center().dim(), 4);
    }

    #[test]
    fn restrict_to_center_is_abelian() {
        let l = kt(1.0);
        let r = l.restrict(&l.center()).unwrap();
        assert_eq!(r.dim(), 2);
        assert!(r.brackets().iter().all(|b| b.3.abs() < 1e-15));
        let not_sub = Subspace::coordinate(4, &[0, 2]);
        assert!(matches!(l.restrict(&not_sub), Err(Error::NotSubalgebra(_))));
    }

    #[test]
    fn derived_series_of_aff() {
        let aff = LieAlgebra::new(2, [(0, 1, 1, 1.0)]).unwrap();
        assert_eq!(aff.solvability_step(), Some(2));
        assert_eq!(LieAlgebra::abelian(2).solvability_step(), Some(1));
    }

    #[test]
    fn change_basis_preserves_jacobi_and_step() {
        let l = kt(1.0);
        let p = DMatrix::from_row_slice(4, 4, &[
            1.0, 0.2, 0.0, 0.1, 0.0, 1.0, 0.3, 0.0, 0.5, 0.0, 1.0, 0.0, 0.0, 0.0, 0.4, 1.0,
        ]);
        let m = l.change_basis(&p).unwrap();
        assert!(m.jacobi_residual() < 1e-13);
        assert_eq!(m.nilpotency_step(), Nilpotency::Step(2));
    }

    #[test]
    fn principal_angles() {
        let a = Subspace::coordinate(3, &[0]);
        let b = Subspace::from_vectors(3, &[DVector::from_vec(vec![1.0, 1.0, 0.0])]);
        let s = a.max_principal_angle_sin(&b).unwrap();
        assert!((s - (0.5f64).sqrt()).abs() < 1e-14);
        assert!(a.max_principal_angle_sin(&Subspace::full(3)).is_none());
    }

    #[test]
    fn round_off_brackets_do_not_count_as_rank() {
        // a 3-step algebra in a skewed basis: [g, g^2] is round-off only
        use rand::{Rng, SeedableRng};
        let seed = 10_938_695_404_557_654_728;
        let lie = crate::sweep::generate(crate::sweep::InstanceKind::MutatedThreeStep, seed, 8).unwrap().lie;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let p = DMatrix::from_fn(8, 8, |a, b| if a == b { 1.0 } else { 0.0 } + rng.gen_range(-0.3..0.3));
        let skewed = lie.change_basis(&p).unwrap();
        assert_eq!(skewed.nilpotency_step(), Nilpotency::Step(3));
        let dims: Vec<usize> = skewed.lower_central_series().iter().map(Subspace::dim).collect();
        assert!(dims.windows(2).all(|w| w[1] <= w[0]), "{dims:?}");
    }

}
