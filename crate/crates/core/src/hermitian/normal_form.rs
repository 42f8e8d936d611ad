//! Recovering the canonical SKL basis of a 2-step nilpotent pluriclosed
//! structure.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::metric::Metric;
use super::skl::skl_residuals;
use super::torsion::{pluriclosed_residual, require_abelian};
use crate::complex::{adapted_basis, ComplexStructure};
use crate::config::{DERIVED_ZERO, GATE};
use crate::error::{Error, Result};
use crate::lie::{g1_j, LieAlgebra, Subspace};

/// Basis `ε_1..ε_2n` (columns of `basis_change`, original coordinates) with
/// `Jε_i = ε_{i+n}`, `g¹ + Jg¹ = span{ε_{r+1..n}, ε_{n+r+1..2n}}` and the only
/// nonzero brackets `[ε_i, ε_{n+i}] = λ_i x_i`, `i < s`, for a
/// `g`-orthonormal basis `x_i` of `g¹`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CanonicalSklData {
    pub n: usize,
    pub r: usize,
    pub s: usize,
    pub lambdas: Vec<f64>,
    /// `x_i` in original coordinates, one per bracket.
    pub x: Vec<Vec<f64>>,
    #[serde(with = "crate::io::matrix_rows")]
    pub basis_change: DMatrix<f64>,
}

impl CanonicalSklData {
    pub fn parameters_admissible(n: usize, r: usize, s: usize) -> bool {
        r <= n && n - r <= s && s <= r.min(2 * (n - r))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum NormalForm {
    Found(CanonicalSklData),
    NotFound(String),
}

/// Search for the canonical basis.
///
/// Eigenplanes of `P = Σ_k B_k B_k^T` on `V = (g¹ + Jg¹)^⊥`, where
/// `B_k(x, y) = g([x, y], x_k)`, carry the brackets; inside a repeated
/// eigenvalue a generic combination `Σ_k c_k B_k(·, J·)` separates the planes.
/// Every candidate is re-verified bracket by bracket.
pub fn skl_normal_form(lie: &LieAlgebra, j: &ComplexStructure, g: &Metric) -> Result<NormalForm> {
    if !lie.nilpotency_step().at_most_two_step() {
        return Err(Error::InvalidParameters("normal form needs a nilpotent algebra of step at most 2".into()));
    }
    require_abelian(lie, j)?;
    let pc = pluriclosed_residual(lie, j, g)?;
    if pc >= GATE {
        return Err(Error::NotPluriclosed(pc));
    }
    let found = search(lie, j, g)?;
    let skl = skl_residuals(lie, j, g)?;
    match (&found, skl.is_skl(GATE)) {
        (NormalForm::NotFound(why), true) => Err(Error::Inconsistency(format!(
            "SKL residuals vanish but no canonical basis was found: {why}"
        ))),
        (NormalForm::Found(_), false) => Err(Error::Inconsistency(format!(
            "canonical basis verified but SKL residuals are {:.3e}",
            skl.max()
        ))),
        _ => Ok(found),
    }
}

fn g_orthonormal(s: &Subspace, gm: &DMatrix<f64>) -> DMatrix<f64> {
    let q = s.basis();
    if q.ncols() == 0 {
        return q.clone();
    }
    let gram = q.transpose() * gm * q;
    let eig = SymmetricEigen::new(gram);
    let inv_sqrt = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| 1.0 / l.sqrt()));
    q * &eig.eigenvectors * inv_sqrt * eig.eigenvectors.transpose()
}

fn search(lie: &LieAlgebra, j: &ComplexStructure, g: &Metric) -> Result<NormalForm> {
    let dim = lie.dim();
    let n = j.complex_dim();
    let gm = g.matrix();
    let g1 = lie.derived_algebra();
    let w = g1_j(lie, j);
    let v = w.g_complement(gm);
    let xs = g_orthonormal(&g1, gm);
    let vb = g_orthonormal(&v, gm);
    let vd = vb.ncols();
    let r = vd / 2;
    let scale = lie.brackets().iter().map(|b| b.3.abs()).fold(1.0, f64::max);

    // B_k restricted to V, in the g-orthonormal frame `vb`.
    let bks: Vec<DMatrix<f64>> = xs
        .column_iter()
        .map(|xk| {
            let gx = gm * xk;
            DMatrix::from_fn(vd, vd, |a, b| {
                gx.dot(&lie.bracket(&vb.column(a).into_owned(), &vb.column(b).into_owned()))
            })
        })
        .collect();
    let mut p = DMatrix::zeros(vd, vd);
    for b in &bks {
        p += b * b.transpose();
    }
    // J in the frame `vb` (orthogonal, since g is Hermitian and V is J-invariant).
    let jv = vb.transpose() * gm * j.matrix() * &vb;

    let eig = SymmetricEigen::new(p.clone());
    let mut order: Vec<usize> = (0..vd).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let tol = 1e-7 * scale * scale;
    let mut clusters: Vec<(f64, Vec<usize>)> = Vec::new();
    for &i in &order {
        let l = eig.eigenvalues[i];
        match clusters.last_mut() {
            Some((l0, members)) if (l - *l0).abs() < tol => members.push(i),
            _ => clusters.push((l, vec![i])),
        }
    }

    let mut firsts: Vec<DVector<f64>> = Vec::new();
    let mut kernel_firsts: Vec<DVector<f64>> = Vec::new();
    for (l, members) in &clusters {
        if members.len() % 2 != 0 {
            return Ok(NormalForm::NotFound(format!("eigenvalue {l:.6e} has odd multiplicity")));
        }
        let basis = DMatrix::from_fn(vd, members.len(), |a, c| eig.eigenvectors[(a, members[c])]);
        let planes = split_planes(&basis, &jv, &bks);
        if l.abs() < tol {
            kernel_firsts.extend(planes);
        } else {
            firsts.extend(planes);
        }
    }
    let s = firsts.len();
    if !CanonicalSklData::parameters_admissible(n, r, s) {
        return Ok(NormalForm::NotFound(format!("(n, r, s) = ({n}, {r}, {s}) violates n - r <= s <= min(r, 2(n - r))")));
    }

    let mut cols: Vec<DVector<f64>> = Vec::with_capacity(dim);
    for f in firsts.iter().chain(kernel_firsts.iter()) {
        cols.push(&vb * f);
    }
    // Adapted g-orthonormal basis of W.
    let wb = g_orthonormal(&w, gm);
    if wb.ncols() > 0 {
        let jw = wb.transpose() * gm * j.matrix() * &wb;
        let gw = DMatrix::identity(wb.ncols(), wb.ncols());
        let jw = ComplexStructure::new(jw)?;
        let ad = adapted_basis(&jw, &gw)?;
        for c in 0..wb.ncols() / 2 {
            cols.push(&wb * ad.column(c));
        }
    }
    if cols.len() != n {
        return Ok(NormalForm::NotFound("dimension count of the adapted basis is off".into()));
    }
    let mut basis = DMatrix::zeros(dim, dim);
    for (i, c) in cols.iter().enumerate() {
        basis.set_column(i, c);
        basis.set_column(n + i, &j.apply(c));
    }

    let mut lambdas = Vec::with_capacity(s);
    let mut x = Vec::with_capacity(s);
    for i in 0..s {
        let b = lie.bracket(&basis.column(i).into_owned(), &basis.column(n + i).into_owned());
        let l = g.norm_sq(&b).sqrt();
        if l < DERIVED_ZERO * scale {
            return Ok(NormalForm::NotFound(format!("bracket plane {i} is degenerate")));
        }
        lambdas.push(l);
        x.push((b / l).iter().cloned().collect::<Vec<f64>>());
    }
    let data = CanonicalSklData { n, r, s, lambdas, x, basis_change: basis };
    match verify(lie, j, g, &data) {
        Ok(()) => Ok(NormalForm::Found(data)),
        Err(why) => Ok(NormalForm::NotFound(why)),
    }
}

/// Splits a `J`-invariant subspace of `V` (columns of `basis`, orthonormal)
/// into `J`-planes and returns one unit vector per plane.
fn split_planes(basis: &DMatrix<f64>, jv: &DMatrix<f64>, bks: &[DMatrix<f64>]) -> Vec<DVector<f64>> {
    let m = basis.ncols();
    let jr = basis.transpose() * jv * basis;
    if m == 2 {
        return vec![basis.column(0).into_owned()];
    }
    // Σ_k c_k B_k(u, Jv) is symmetric and commutes with J on the subspace.
    let mut sym = DMatrix::zeros(m, m);
    for (k, b) in bks.iter().enumerate() {
        let c = 1.0 + 0.618_033_988_749_895 * (k as f64 + 1.0).sqrt();
        let br = basis.transpose() * b * basis;
        sym += (&br * &jr) * c;
    }
    let sym = (&sym + sym.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let jfull = basis * &jr * basis.transpose();
    let mut taken = DMatrix::<f64>::zeros(basis.nrows(), 0);
    let mut out = Vec::new();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    for i in order {
        let mut u = basis * eig.eigenvectors.column(i);
        for c in taken.column_iter() {
            let d = c.dot(&u);
            u -= c * d;
        }
        let norm = u.norm();
        if norm < 1e-6 {
            continue;
        }
        u /= norm;
        let ju = &jfull * &u;
        let cols = taken.ncols();
        taken = taken.insert_columns(cols, 2, 0.0);
        taken.set_column(cols, &u);
        taken.set_column(cols + 1, &ju);
        out.push(u);
        if out.len() * 2 == m {
            break;
        }
    }
    out
}

/// Re-evaluates every bracket of the candidate basis.
pub fn verify(lie: &LieAlgebra, j: &ComplexStructure, g: &Metric, data: &CanonicalSklData) -> std::result::Result<(), String> {
    let dim = lie.dim();
    let n = data.n;
    let p = &data.basis_change;
    let scale = lie.brackets().iter().map(|b| b.3.abs()).fold(1.0, f64::max);
    let tol = DERIVED_ZERO * scale;
    let gram = p.transpose() * g.matrix() * p;
    let ortho = (gram - DMatrix::<f64>::identity(dim, dim)).abs().max();
    if ortho > tol {
        return Err(format!("basis is not orthonormal (defect {ortho:.3e})"));
    }
    for i in 0..n {
        let d = (j.apply(&p.column(i).into_owned()) - p.column(n + i)).norm();
        if d > tol {
            return Err(format!("J ε_{i} differs from ε_{} by {d:.3e}", n + i));
        }
    }
    let xs: Vec<DVector<f64>> = data.x.iter().map(|v| DVector::from_column_slice(v)).collect();
    for (a, xa) in xs.iter().enumerate() {
        for (b, xb) in xs.iter().enumerate() {
            let want = if a == b { 1.0 } else { 0.0 };
            if (g.inner(xa, xb) - want).abs() > tol {
                return Err("x_i are not orthonormal".into());
            }
        }
    }
    let g1 = lie.derived_algebra();
    if g1.dim() != data.s || !xs.iter().all(|x| g1.contains(x, tol)) {
        return Err("x_i do not form a basis of the derived algebra".into());
    }
    let w = g1_j(lie, j);
    let tail: Vec<usize> = (data.r..n).chain(n + data.r..2 * n).collect();
    let span = Subspace::from_vectors(dim, &tail.iter().map(|&c| p.column(c).into_owned()).collect::<Vec<_>>());
    if !span.same_as(&w, DERIVED_ZERO) {
        return Err("g¹ + Jg¹ is not spanned by the trailing basis vectors".into());
    }
    for a in 0..dim {
        for b in a + 1..dim {
            let br = lie.bracket(&p.column(a).into_owned(), &p.column(b).into_owned());
            let expected = if b == a + n && a < data.s {
                &xs[a] * data.lambdas[a]
            } else {
                DVector::zeros(dim)
            };
            let d = (br - expected).norm();
            if d > tol {
                return Err(format!("bracket [ε_{a}, ε_{b}] off by {d:.3e}"));
            }
        }
    }
    if data.lambdas.iter().any(|&l| l <= 0.0) {
        return Err("nonpositive λ".into());
    }
    Ok(())
}
