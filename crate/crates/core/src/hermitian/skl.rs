//! Strominger Kähler-like conditions and the Bismut Ricci form.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::connection::{bismut_connection, curvature, Connection, CurvatureTensor};
use super::metric::Metric;
use super::torsion::{bismut_torsion, dense_three_form, pluriclosed_residual, require_integrable};
use crate::complex::{adapted_basis, ComplexStructure};
use crate::config::GATE;
use crate::error::Result;
use crate::exterior::KForm;
use crate::lie::LieAlgebra;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SklResiduals {
    pub bianchi: f64,
    pub type_condition: f64,
    pub nabla_torsion: f64,
    pub pluriclosed: f64,
    /// Whether `(pluriclosed and ∇T = 0)` and `(Bianchi and type)` give the
    /// same verdict at the gate.
    pub consistent: bool,
}

impl SklResiduals {
    pub fn max(&self) -> f64 {
        self.bianchi.max(self.type_condition).max(self.nabla_torsion).max(self.pluriclosed)
    }

    pub fn is_skl(&self, tol: f64) -> bool {
        self.max() < tol
    }

    fn torsion_side(&self, tol: f64) -> bool {
        self.pluriclosed < tol && self.nabla_torsion < tol
    }

    fn curvature_side(&self, tol: f64) -> bool {
        self.bianchi < tol && self.type_condition < tol
    }
}

/// `max |(∇_{e_a} T)(e_b, e_c, e_d)|` for a dense 3-form `t`.
pub fn nabla_torsion_residual(conn: &Connection, t: &[f64]) -> f64 {
    let n = conn.dim();
    let idx = |a: usize, b: usize, c: usize| (a * n + b) * n + c;
    let mut worst: f64 = 0.0;
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for d in 0..n {
                    let mut s = 0.0;
                    for m in 0..n {
                        s -= conn.christoffel(a, b, m) * t[idx(m, c, d)]
                            + conn.christoffel(a, c, m) * t[idx(b, m, d)]
                            + conn.christoffel(a, d, m) * t[idx(b, c, m)];
                    }
                    worst = worst.max(s.abs());
                }
            }
        }
    }
    worst
}

pub fn skl_residuals(lie: &LieAlgebra, j: &ComplexStructure, g: &Metric) -> Result<SklResiduals> {
    let t = dense_three_form(&bismut_torsion(lie, j, g)?);
    let conn = bismut_connection(lie, j, g)?;
    let r = curvature(&conn, lie)?;
    let mut out = SklResiduals {
        bianchi: r.first_bianchi_residual(),
        type_condition: r.type_residual(j),
        nabla_torsion: nabla_torsion_residual(&conn, &t),
        pluriclosed: pluriclosed_residual(lie, j, g)?,
        consistent: true,
    };
    out.consistent = out.torsion_side(GATE) == out.curvature_side(GATE);
    Ok(out)
}

/// Curvature of the Bismut connection.
pub fn bismut_curvature(lie: &LieAlgebra, j: &ComplexStructure, g: &Metric) -> Result<CurvatureTensor> {
    let conn = bismut_connection(lie, j, g)?;
    curvature(&conn, lie)
}

/// `ρ(x, y) = ½ Σ_{i ≤ n} R(x, y, ε_i, Jε_i)` over a `g`-orthonormal adapted
/// basis, with the sign fixed so that `[e_0, e_2] = λ e_1`, `g = Id` gives
/// `ρ(e_0, e_2) = λ²/2`. Equivalently `ρ(x, y) = -¼ tr(J R(x, y))`.
pub fn bismut_ricci(lie: &LieAlgebra, j: &ComplexStructure, g: &Metric) -> Result<KForm> {
    require_integrable(lie, j)?;
    let r = bismut_curvature(lie, j, g)?;
    let eps = adapted_basis(j, g.matrix())?;
    let n = j.complex_dim();
    let gm = g.matrix();
    let pairs: Vec<(DVector<f64>, DVector<f64>)> = (0..n)
        .map(|i| {
            let e = eps.column(i).into_owned();
            let je = j.apply(&e);
            (e, gm * je)
        })
        .collect();
    KForm::from_real_fn(lie.dim(), 2, |idx| {
        let m = r.endomorphism(idx[0], idx[1]);
        // g(R ε, Jε) = (Jε)^T G R ε
        0.5 * pairs.iter().map(|(e, gje)| gje.dot(&(m * e))).sum::<f64>()
    })
}

/// `½ g(Σ_k [ε_k, Jε_k], [x, y])` over a `g`-orthonormal adapted basis: the
/// Bismut Ricci form of a pluriclosed metric on a 2-step nilpotent algebra.
pub fn bismut_ricci_two_step(lie: &LieAlgebra, j: &ComplexStructure, g: &Metric) -> Result<KForm> {
    let eps = adapted_basis(j, g.matrix())?;
    let n = j.complex_dim();
    let dim = lie.dim();
    let mut trace = DVector::zeros(dim);
    for i in 0..n {
        let e = eps.column(i).into_owned();
        trace += lie.bracket(&e, &j.apply(&e));
    }
    let gt = g.matrix() * trace;
    KForm::from_real_fn(dim, 2, |idx| 0.5 * gt.dot(&lie.bracket_basis(idx[0], idx[1])))
}

/// Dense matrix `ρ[(a, b)] = ρ(e_a, e_b)` of a real 2-form.
pub fn two_form_matrix(rho: &KForm) -> DMatrix<f64> {
    let n = rho.dim();
    DMatrix::from_fn(n, n, |a, b| if a == b { 0.0 } else { rho.eval_basis(&[a, b]).re })
}
