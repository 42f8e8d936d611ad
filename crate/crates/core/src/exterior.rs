//! Exterior algebra over a fixed real basis `e_0, .., e_{N-1}` and its
//! complexification.
//!
//! A [`KForm`] stores one complex coefficient per strictly increasing
//! multi-index. Multi-indices are bit masks (so `N <= 31`) ranked in colex
//! order. Evaluation follows the determinant convention:
//! `(e^0 ^ e^1)(e_0, e_1) = 1`.
//!
//! The Chevalley-Eilenberg differential is
//! `d a(x_0, .., x_k) = sum_{i<j} (-1)^{i+j} a([x_i, x_j], x_0, .., ^x_i, .., ^x_j, ..)`,
//! so on 1-forms `d a(x, y) = -a([x, y])`.
//!
//! `J` acts on forms by precomposition in every slot:
//! `(J a)(x_1, .., x_k) = a(J x_1, .., J x_k)`.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::complex::ComplexStructure;
use crate::error::{Error, Result};
use crate::lie::LieAlgebra;

const MAX_DIM: usize = 31;

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: usize = 1;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// All masks with `k` bits set among the low `n` bits, in colex order.
pub fn index_masks(n: usize, k: usize) -> Vec<u32> {
    if k > n {
        return Vec::new();
    }
    if k == 0 {
        return vec![0];
    }
    let mut out = Vec::with_capacity(binomial(n, k));
    let mut mask: u32 = (1u32 << k) - 1;
    let limit: u64 = 1u64 << n;
    while (mask as u64) < limit {
        out.push(mask);
        // Gosper's hack
        let c = mask & mask.wrapping_neg();
        let r = mask + c;
        if r == 0 {
            break;
        }
        mask = (((r ^ mask) >> 2) / c) | r;
    }
    out
}

/// Colex rank of a mask among masks of the same popcount.
pub fn mask_rank(mask: u32) -> usize {
    let mut rank = 0;
    let mut m = mask;
    let mut i = 0;
    while m != 0 {
        let pos = m.trailing_zeros() as usize;
        rank += binomial(pos, i + 1);
        m &= m - 1;
        i += 1;
    }
    rank
}

pub fn mask_indices(mask: u32) -> Vec<usize> {
    let mut out = Vec::with_capacity(mask.count_ones() as usize);
    let mut m = mask;
    while m != 0 {
        out.push(m.trailing_zeros() as usize);
        m &= m - 1;
    }
    out
}

/// Sorts `indices`, returning the mask and the sign of the sorting
/// permutation, or `None` if an index repeats.
pub fn sort_with_sign(indices: &[usize]) -> Option<(u32, f64)> {
    let mut mask = 0u32;
    let mut inversions = 0usize;
    for (a, &i) in indices.iter().enumerate() {
        if mask & (1 << i) != 0 {
            return None;
        }
        mask |= 1 << i;
        inversions += indices[..a].iter().filter(|&&j| j > i).count();
    }
    Some((mask, if inversions.is_multiple_of(2) { 1.0 } else { -1.0 }))
}

/// Sign picked up when moving basis covector `m` past the ones in `rest`
/// to its sorted position, i.e. `e^m ^ e^rest = sign * e^(rest | m)`.
fn insertion_sign(rest: u32, m: usize) -> f64 {
    if (rest & ((1u32 << m) - 1)).count_ones().is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

fn det_in_place(a: &mut [Complex64], k: usize) -> Complex64 {
    let mut det = Complex64::new(1.0, 0.0);
    for col in 0..k {
        let mut pivot = col;
        let mut best = a[col * k + col].norm();
        for row in col + 1..k {
            let v = a[row * k + col].norm();
            if v > best {
                best = v;
                pivot = row;
            }
        }
        if best == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        if pivot != col {
            for c in 0..k {
                a.swap(col * k + c, pivot * k + c);
            }
            det = -det;
        }
        let p = a[col * k + col];
        det *= p;
        for row in col + 1..k {
            let f = a[row * k + col] / p;
            if f == Complex64::new(0.0, 0.0) {
                continue;
            }
            for c in col..k {
                let sub = f * a[col * k + c];
                a[row * k + c] -= sub;
            }
        }
    }
    det
}

#[derive(Clone, PartialEq)]
pub struct KForm {
    dim: usize,
    degree: usize,
    coeffs: Vec<Complex64>,
}

impl fmt::Debug for KForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "KForm(dim={}, degree={}, {})", self.dim, self.degree, self)
    }
}

impl fmt::Display for KForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (mask, c) in self.terms() {
            if c.norm() < 1e-14 {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let idx: Vec<String> = mask_indices(mask).iter().map(|i| i.to_string()).collect();
            if c.im == 0.0 {
                write!(f, "{}*e^{{{}}}", c.re, idx.join(","))?;
            } else {
                write!(f, "({})*e^{{{}}}", c, idx.join(","))?;
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

impl KForm {
    pub fn zero(dim: usize, degree: usize) -> Result<Self> {
        if dim > MAX_DIM {
            return Err(Error::DegreeOutOfRange { degree, dim });
        }
        // degree > dim is the zero space; kept so that d of a top form is 0
        Ok(Self {
            dim,
            degree,
            coeffs: vec![Complex64::new(0.0, 0.0); binomial(dim, degree)],
        })
    }

    /// The constant 0-form `c`.
    pub fn scalar(dim: usize, c: Complex64) -> Result<Self> {
        let mut out = Self::zero(dim, 0)?;
        out.coeffs[0] = c;
        Ok(out)
    }

    /// `e^{i_1} ^ .. ^ e^{i_k}` for arbitrary (possibly unsorted) indices.
    pub fn basis(dim: usize, indices: &[usize]) -> Result<Self> {
        let mut out = Self::zero(dim, indices.len())?;
        if let Some(&bad) = indices.iter().find(|&&i| i >= dim) {
            return Err(Error::DimensionMismatch { expected: dim, found: bad + 1 });
        }
        if let Some((mask, sign)) = sort_with_sign(indices) {
            out.coeffs[mask_rank(mask)] = Complex64::new(sign, 0.0);
        }
        Ok(out)
    }

    /// Builds a form from a closure over increasing index lists.
    pub fn from_fn(
        dim: usize,
        degree: usize,
        mut f: impl FnMut(&[usize]) -> Complex64,
    ) -> Result<Self> {
        let mut out = Self::zero(dim, degree)?;
        for mask in index_masks(dim, degree) {
            out.coeffs[mask_rank(mask)] = f(&mask_indices(mask));
        }
        Ok(out)
    }

    /// Real form from a closure over increasing index lists.
    pub fn from_real_fn(dim: usize, degree: usize, mut f: impl FnMut(&[usize]) -> f64) -> Result<Self> {
        Self::from_fn(dim, degree, |idx| Complex64::new(f(idx), 0.0))
    }

    /// A real 1-form from its components.
    pub fn covector(v: &DVector<f64>) -> Self {
        let dim = v.len();
        Self {
            dim,
            degree: 1,
            coeffs: (0..dim).map(|i| Complex64::new(v[i], 0.0)).collect(),
        }
    }

    /// A complex 1-form from its components.
    pub fn complex_covector(v: &DVector<Complex64>) -> Self {
        Self { dim: v.len(), degree: 1, coeffs: v.iter().cloned().collect() }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Coefficients in colex order of their multi-index masks.
    pub fn coefficients(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// `(mask, coefficient)` pairs for every stored multi-index.
    pub fn terms(&self) -> impl Iterator<Item = (u32, Complex64)> + '_ {
        index_masks(self.dim, self.degree)
            .into_iter()
            .map(move |m| (m, self.coeffs[mask_rank(m)]))
    }

    /// Value on a tuple of basis vectors; antisymmetric in the tuple.
    pub fn eval_basis(&self, indices: &[usize]) -> Complex64 {
        assert_eq!(indices.len(), self.degree, "wrong number of arguments");
        match sort_with_sign(indices) {
            Some((mask, sign)) => self.coeffs[mask_rank(mask)] * sign,
            None => Complex64::new(0.0, 0.0),
        }
    }

    /// Value on arbitrary complex vectors: `sum_K a_K det(V[K, :])`.
    pub fn eval(&self, vectors: &[DVector<Complex64>]) -> Complex64 {
        assert_eq!(vectors.len(), self.degree, "wrong number of arguments");
        let k = self.degree;
        let mut buf = vec![Complex64::new(0.0, 0.0); k * k];
        let mut acc = Complex64::new(0.0, 0.0);
        for (mask, c) in self.terms() {
            if c == Complex64::new(0.0, 0.0) {
                continue;
            }
            for (r, &i) in mask_indices(mask).iter().enumerate() {
                for (col, v) in vectors.iter().enumerate() {
                    buf[r * k + col] = v[i];
                }
            }
            acc += c * det_in_place(&mut buf, k);
        }
        acc
    }

    /// Value on real vectors.
    pub fn eval_real(&self, vectors: &[DVector<f64>]) -> Complex64 {
        let complex: Vec<DVector<Complex64>> =
            vectors.iter().map(|v| v.map(|x| Complex64::new(x, 0.0))).collect();
        self.eval(&complex)
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: other.dim });
        }
        if self.degree != other.degree {
            return Err(Error::DegreeOutOfRange { degree: other.degree, dim: self.dim });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect();
        Ok(Self { coeffs, ..*self })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect();
        Ok(Self { coeffs, ..*self })
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self { coeffs: self.coeffs.iter().map(|c| c * s).collect(), ..*self }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(Complex64::new(s, 0.0))
    }

    pub fn conj(&self) -> Self {
        Self { coeffs: self.coeffs.iter().map(|c| c.conj()).collect(), ..*self }
    }

    pub fn real_part(&self) -> Self {
        Self { coeffs: self.coeffs.iter().map(|c| Complex64::new(c.re, 0.0)).collect(), ..*self }
    }

    pub fn imag_part(&self) -> Self {
        Self { coeffs: self.coeffs.iter().map(|c| Complex64::new(c.im, 0.0)).collect(), ..*self }
    }

    pub fn is_real(&self, tol: f64) -> bool {
        self.coeffs.iter().all(|c| c.im.abs() <= tol)
    }

    /// Largest coefficient modulus.
    pub fn max_norm(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |acc, c| acc.max(c.norm()))
    }

    /// Max coefficient distance to `other`.
    pub fn distance(&self, other: &Self) -> Result<f64> {
        Ok(self.sub(other)?.max_norm())
    }

    pub fn wedge(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: other.dim });
        }
        let degree = self.degree + other.degree;
        if degree > self.dim {
            return Err(Error::DegreeOutOfRange { degree, dim: self.dim });
        }
        let mut out = Self::zero(self.dim, degree)?;
        let zero = Complex64::new(0.0, 0.0);
        let right: Vec<(u32, Complex64)> = other.terms().filter(|(_, c)| *c != zero).collect();
        for (ma, ca) in self.terms() {
            if ca == zero {
                continue;
            }
            for &(mb, cb) in &right {
                if ma & mb != 0 {
                    continue;
                }
                // Sign of the shuffle: pairs (a in A, b in B) with a > b.
                let mut inversions = 0u32;
                let mut rest = mb;
                while rest != 0 {
                    let b = rest.trailing_zeros();
                    inversions += (ma >> (b + 1)).count_ones();
                    rest &= rest - 1;
                }
                let sign = if inversions.is_multiple_of(2) { 1.0 } else { -1.0 };
                out.coeffs[mask_rank(ma | mb)] += ca * cb * sign;
            }
        }
        Ok(out)
    }

    /// `a ^ a ^ .. ^ a` (`k` factors); `k = 0` gives the constant 1.
    pub fn power(&self, k: usize) -> Result<Self> {
        let mut out = Self::scalar(self.dim, Complex64::new(1.0, 0.0))?;
        for _ in 0..k {
            out = out.wedge(self)?;
        }
        Ok(out)
    }

    /// Pullback `(M^* a)(x_1, ..) = a(M x_1, ..)` by a complex matrix.
    pub fn pullback(&self, m: &DMatrix<Complex64>) -> Result<Self> {
        if m.nrows() != self.dim || m.ncols() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: m.nrows() });
        }
        let k = self.degree;
        let n = self.dim;
        let masks = index_masks(n, k);
        let dense_cost = (n as f64).powi(k as i32 + 1) * k as f64;
        let minor_cost = (masks.len() as f64).powi(2) * (k as f64).powi(3);
        if k > 0 && dense_cost < minor_cost {
            return Ok(self.pullback_dense(m));
        }
        Ok(self.pullback_minors(m))
    }

    /// Pullback as a sum of `k x k` minors of `m`.
    fn pullback_minors(&self, m: &DMatrix<Complex64>) -> Self {
        let k = self.degree;
        let masks = index_masks(self.dim, k);
        let zero = Complex64::new(0.0, 0.0);
        let source: Vec<(Vec<usize>, Complex64)> = masks
            .iter()
            .filter_map(|&mk| {
                let c = self.coeffs[mask_rank(mk)];
                (c != zero).then(|| (mask_indices(mk), c))
            })
            .collect();
        let mut out = Self { dim: self.dim, degree: k, coeffs: vec![zero; masks.len()] };
        let mut buf = vec![zero; k * k];
        for &mi in &masks {
            let cols = mask_indices(mi);
            let mut acc = zero;
            for (rows, c) in &source {
                for (r, &row) in rows.iter().enumerate() {
                    for (cc, &col) in cols.iter().enumerate() {
                        buf[r * k + cc] = m[(row, col)];
                    }
                }
                acc += c * det_in_place(&mut buf, k);
            }
            out.coeffs[mask_rank(mi)] = acc;
        }
        out
    }

    /// Pullback through the full `n^k` tensor, one slot at a time.
    fn pullback_dense(&self, m: &DMatrix<Complex64>) -> Self {
        let n = self.dim;
        let k = self.degree;
        let size = n.pow(k as u32);
        let mut idx = vec![0usize; k];
        let mut t: Vec<Complex64> = (0..size)
            .map(|flat| {
                let mut f = flat;
                for slot in (0..k).rev() {
                    idx[slot] = f % n;
                    f /= n;
                }
                self.eval_basis(&idx)
            })
            .collect();
        let mut next = vec![Complex64::new(0.0, 0.0); size];
        for slot in 0..k {
            // flat = (outer * n + j) * inner + rest
            let inner = n.pow((k - 1 - slot) as u32);
            let outer = size / (inner * n);
            for o in 0..outer {
                for jj in 0..n {
                    for rest in 0..inner {
                        let mut acc = Complex64::new(0.0, 0.0);
                        for r in 0..n {
                            let c = m[(r, jj)];
                            if c != Complex64::new(0.0, 0.0) {
                                acc += c * t[(o * n + r) * inner + rest];
                            }
                        }
                        next[(o * n + jj) * inner + rest] = acc;
                    }
                }
            }
            std::mem::swap(&mut t, &mut next);
        }
        let mut out = Self { dim: n, degree: k, coeffs: vec![Complex64::new(0.0, 0.0); binomial(n, k)] };
        for mask in index_masks(n, k) {
            let flat = mask_indices(mask).iter().fold(0, |acc, &i| acc * n + i);
            out.coeffs[mask_rank(mask)] = t[flat];
        }
        out
    }

    pub fn pullback_real(&self, m: &DMatrix<f64>) -> Result<Self> {
        self.pullback(&m.map(|x| Complex64::new(x, 0.0)))
    }

    /// `J` acting slotwise: `(J a)(x, ..) = a(J x, ..)`.
    pub fn j_pullback(&self, j: &ComplexStructure) -> Result<Self> {
        self.pullback_real(j.matrix())
    }

    /// Chevalley-Eilenberg differential for the bracket of `lie`.
    pub fn ce_differential(&self, lie: &LieAlgebra) -> Result<Self> {
        if lie.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: lie.dim() });
        }
        let n = self.dim;
        let k = self.degree;
        let mut out = Self::zero(n, k + 1)?;
        for mask in index_masks(n, k + 1) {
            let idx = mask_indices(mask);
            let mut acc = Complex64::new(0.0, 0.0);
            for a in 0..idx.len() {
                for b in a + 1..idx.len() {
                    let rest = mask & !(1 << idx[a]) & !(1 << idx[b]);
                    let sign = if (a + b) % 2 == 0 { 1.0 } else { -1.0 };
                    for m in 0..n {
                        if rest & (1 << m) != 0 {
                            continue;
                        }
                        let c = lie.structure_constant(idx[a], idx[b], m);
                        if c == 0.0 {
                            continue;
                        }
                        let val = self.coeffs[mask_rank(rest | (1 << m))];
                        acc += val * (sign * c * insertion_sign(rest, m));
                    }
                }
            }
            out.coeffs[mask_rank(mask)] = acc;
        }
        Ok(out)
    }

    /// Component of bidegree `(p, q)` for the complex structure `j`.
    ///
    /// Pulls back along `A + t B` with `A = (1 - iJ)/2` (projection onto
    /// `V^{1,0}`) and `B = (1 + iJ)/2`; the coefficient of `t^q` is the
    /// `(k-q, q)` part, extracted by a discrete Fourier transform over the
    /// `k+1` roots of unity.
    pub fn bidegree_project(&self, j: &ComplexStructure, p: usize, q: usize) -> Result<Self> {
        if p + q != self.degree {
            return Err(Error::BidegreeMismatch { p, q, degree: self.degree });
        }
        if j.dim() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: j.dim() });
        }
        let k = self.degree;
        if k == 0 {
            return Ok(self.clone());
        }
        let n = self.dim;
        let i = Complex64::new(0.0, 1.0);
        let jc = j.matrix().map(|x| Complex64::new(x, 0.0));
        let id = DMatrix::<Complex64>::identity(n, n);
        let a = (&id - &jc * i) * Complex64::new(0.5, 0.0);
        let b = (&id + &jc * i) * Complex64::new(0.5, 0.0);
        let points = k + 1;
        let mut out = Self::zero(n, k)?;
        for step in 0..points {
            let angle = 2.0 * std::f64::consts::PI * step as f64 / points as f64;
            let t = Complex64::from_polar(1.0, angle);
            let m = &a + &b * t;
            let pulled = self.pullback(&m)?;
            let weight = Complex64::from_polar(1.0, -angle * q as f64) / points as f64;
            for (o, c) in out.coeffs.iter_mut().zip(&pulled.coeffs) {
                *o += c * weight;
            }
        }
        Ok(out)
    }

    /// `del` of a `(p, q)`-form: the `(p+1, q)` part of `d`.
    pub fn partial(&self, lie: &LieAlgebra, j: &ComplexStructure, p: usize, q: usize) -> Result<Self> {
        if p + q != self.degree {
            return Err(Error::BidegreeMismatch { p, q, degree: self.degree });
        }
        self.ce_differential(lie)?.bidegree_project(j, p + 1, q)
    }

    /// `del-bar` of a `(p, q)`-form: the `(p, q+1)` part of `d`.
    pub fn partial_bar(&self, lie: &LieAlgebra, j: &ComplexStructure, p: usize, q: usize) -> Result<Self> {
        if p + q != self.degree {
            return Err(Error::BidegreeMismatch { p, q, degree: self.degree });
        }
        self.ce_differential(lie)?.bidegree_project(j, p, q + 1)
    }
}

/// The complex frame `Z_k = (e_k - i J e_k)/2` built on the columns of an
/// adapted basis (first `n` columns); returns `(Z, Zbar)`.
pub fn complex_frame(
    j: &ComplexStructure,
    adapted: &DMatrix<f64>,
) -> (Vec<DVector<Complex64>>, Vec<DVector<Complex64>>) {
    let n = adapted.ncols() / 2;
    let i = Complex64::new(0.0, 1.0);
    let mut z = Vec::with_capacity(n);
    let mut zbar = Vec::with_capacity(n);
    for k in 0..n {
        let e = adapted.column(k).map(|x| Complex64::new(x, 0.0));
        let je = (j.matrix() * adapted.column(k)).map(|x| Complex64::new(x, 0.0));
        z.push((&e - &je * i) * Complex64::new(0.5, 0.0));
        zbar.push((&e + &je * i) * Complex64::new(0.5, 0.0));
    }
    (z, zbar)
}
