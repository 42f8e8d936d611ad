//! Bismut torsion and the closedness-type conditions built on it:
//! pluriclosed, astheno-Kähler, and the center characterization for abelian
//! complex structures.

use nalgebra::{DMatrix, DVector};

use super::metric::{fundamental_form, Metric};
use crate::complex::{self, ComplexStructure};
use crate::config::{DERIVED_ZERO, EXACT_ZERO, GATE};
use crate::error::{Error, Result};
use crate::exterior::KForm;
use crate::lie::{LieAlgebra, Subspace};
use crate::linalg;

pub(crate) fn require_integrable(lie: &LieAlgebra, j: &ComplexStructure) -> Result<()> {
    let r = complex::nijenhuis_residual(lie, j)?;
    if r >= EXACT_ZERO {
        return Err(Error::NotIntegrable(r));
    }
    Ok(())
}

pub(crate) fn require_abelian(lie: &LieAlgebra, j: &ComplexStructure) -> Result<()> {
    let r = complex::abelian_residual(lie, j)?;
    if r >= EXACT_ZERO {
        return Err(Error::NotAbelian(r));
    }
    Ok(())
}

fn check_dims(lie: &LieAlgebra, j: &ComplexStructure, g: &Metric) -> Result<()> {
    if lie.dim() != j.dim() || lie.dim() != g.dim() {
        return Err(Error::DimensionMismatch { expected: lie.dim(), found: j.dim().max(g.dim()) });
    }
    Ok(())
}

/// Torsion 3-form of the Bismut connection, `T(x,y,z) = dω(Jx, Jy, Jz)`.
///
/// The sign is the one for which `∇ = ∇^LC + ½ g^{-1} T` preserves `J`.
pub fn bismut_torsion(lie: &LieAlgebra, j: &ComplexStructure, g: &Metric) -> Result<KForm> {
    check_dims(lie, j, g)?;
    require_integrable(lie, j)?;
    let omega = fundamental_form(g, j)?;
    omega.ce_differential(lie)?.j_pullback(j)
}

/// `-g([x,y],z) - g([y,z],x) - g([z,x],y)`: the Bismut torsion when `J` is
/// abelian. No check on `J` is made here.
pub fn torsion_closed_form(lie: &LieAlgebra, g: &Metric) -> Result<KForm> {
    let n = lie.dim();
    let gm = g.matrix();
    // lowered[(a, b, c)] = g([e_a, e_b], e_c)
    let lowered = |a: usize, b: usize, c: usize| -> f64 {
        (0..n).map(|k| lie.structure_constant(a, b, k) * gm[(k, c)]).sum()
    };
    KForm::from_real_fn(n, 3, |idx| {
        let (x, y, z) = (idx[0], idx[1], idx[2]);
        -(lowered(x, y, z) + lowered(y, z, x) + lowered(z, x, y))
    })
}

/// Dense `n^3` array `t[(a*n + b)*n + c] = T(e_a, e_b, e_c)` of a 3-form.
pub fn dense_three_form(t: &KForm) -> Vec<f64> {
    let n = t.dim();
    let mut out = vec![0.0; n * n * n];
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                if a != b && b != c && a != c {
                    out[(a * n + b) * n + c] = t.eval_basis(&[a, b, c]).re;
                }
            }
        }
    }
    out
}

/// `d(J dω)`, the 4-form whose vanishing is the pluriclosed condition.
pub fn ddc_omega(lie: &LieAlgebra, j: &ComplexStructure, g: &Metric) -> Result<KForm> {
    bismut_torsion(lie, j, g)?.ce_differential(lie)
}

/// `g([y,z],[w,x]) - g([x,z],[w,y]) + g([x,y],[w,z])`.
pub fn skt_quadruple(
    lie: &LieAlgebra,
    g: &Metric,
    w: &DVector<f64>,
    x: &DVector<f64>,
    y: &DVector<f64>,
    z: &DVector<f64>,
) -> f64 {
    let br = |a: &DVector<f64>, b: &DVector<f64>| lie.bracket(a, b);
    g.inner(&br(y, z), &br(w, x)) - g.inner(&br(x, z), &br(w, y)) + g.inner(&br(x, y), &br(w, z))
}

/// The quadruple expression on increasing basis quadruples, as a 4-form.
pub fn skt_quadruple_form(lie: &LieAlgebra, g: &Metric) -> Result<KForm> {
    let n = lie.dim();
    let gm = g.matrix();
    let brackets: Vec<DVector<f64>> = (0..n * n).map(|p| lie.bracket_basis(p / n, p % n)).collect();
    let gb: Vec<DVector<f64>> = brackets.iter().map(|b| gm * b).collect();
    let pair = |a: usize, b: usize, c: usize, d: usize| brackets[a * n + b].dot(&gb[c * n + d]);
    KForm::from_real_fn(n, 4, |idx| {
        let (w, x, y, z) = (idx[0], idx[1], idx[2], idx[3]);
        pair(y, z, w, x) - pair(x, z, w, y) + pair(x, y, w, z)
    })
}

/// Residuals of the pluriclosed condition along both routes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PluriclosedReport {
    /// `max |d J dω|` over basis quadruples.
    pub ddc: f64,
    /// `max |quadruple expression|`, only for abelian `J`.
    pub quadruple: Option<f64>,
    /// `max |d T - 2 * quadruple|`, only for abelian `J`.
    pub route_gap: Option<f64>,
}

impl PluriclosedReport {
    pub fn residual(&self) -> f64 {
        self.ddc
    }
}

pub fn pluriclosed_report(lie: &LieAlgebra, j: &ComplexStructure, g: &Metric) -> Result<PluriclosedReport> {
    let ddc = ddc_omega(lie, j, g)?;
    let ddc_max = ddc.max_norm();
    if complex::abelian_residual(lie, j)? >= EXACT_ZERO {
        return Ok(PluriclosedReport { ddc: ddc_max, quadruple: None, route_gap: None });
    }
    let quad = skt_quadruple_form(lie, g)?;
    let gap = ddc.distance(&quad.scale_real(2.0))?;
    let scale = ddc_max.max(quad.max_norm()).max(1.0);
    if gap > DERIVED_ZERO * scale {
        return Err(Error::Inconsistency(format!(
            "d(Jdω) and twice the quadruple expression disagree by {gap:.3e}"
        )));
    }
    Ok(PluriclosedReport { ddc: ddc_max, quadruple: Some(quad.max_norm()), route_gap: Some(gap) })
}

/// `max |d J dω|`; for abelian `J` cross-checked against the quadruple
/// expression (`dT = 2 *` quadruple).
pub fn pluriclosed_residual(lie: &LieAlgebra, j: &ComplexStructure, g: &Metric) -> Result<f64> {
    Ok(pluriclosed_report(lie, j, g)?.residual())
}

pub fn is_pluriclosed(lie: &LieAlgebra, j: &ComplexStructure, g: &Metric) -> Result<bool> {
    Ok(pluriclosed_residual(lie, j, g)? < GATE)
}

fn require_pluriclosed(lie: &LieAlgebra, j: &ComplexStructure, g: &Metric) -> Result<()> {
    let r = pluriclosed_residual(lie, j, g)?;
    if r >= GATE {
        return Err(Error::NotPluriclosed(r));
    }
    Ok(())
}

/// `|[x,y]|^2 + |[x,Jy]|^2 - g([x,Jx],[y,Jy])`, which vanishes for
/// pluriclosed metrics when `J` is abelian.
pub fn corollary_identity_residual(
    lie: &LieAlgebra,
    j: &ComplexStructure,
    g: &Metric,
    x: &DVector<f64>,
    y: &DVector<f64>,
) -> Result<f64> {
    check_dims(lie, j, g)?;
    require_abelian(lie, j)?;
    require_pluriclosed(lie, j, g)?;
    Ok(corollary_identity_unchecked(lie, j, g, x, y))
}

pub(crate) fn corollary_identity_unchecked(
    lie: &LieAlgebra,
    j: &ComplexStructure,
    g: &Metric,
    x: &DVector<f64>,
    y: &DVector<f64>,
) -> f64 {
    let jx = j.apply(x);
    let jy = j.apply(y);
    let xy = lie.bracket(x, y);
    let xjy = lie.bracket(x, &jy);
    g.norm_sq(&xy) + g.norm_sq(&xjy) - g.inner(&lie.bracket(x, &jx), &lie.bracket(y, &jy))
}

/// Smallest `|[x, Jx]|` found over unit vectors `x` of `s`, by sampling
/// (axes of `s` plus deterministic pseudo-random directions) and a few
/// gradient steps per sample.
pub fn min_self_bracket_on(lie: &LieAlgebra, j: &ComplexStructure, s: &Subspace) -> f64 {
    let d = s.dim();
    if d == 0 {
        return f64::INFINITY;
    }
    let q = s.basis();
    let f = |c: &DVector<f64>| -> f64 {
        let x = q * c;
        let x = &x / x.norm();
        lie.bracket(&x, &j.apply(&x)).norm()
    };
    let mut starts: Vec<DVector<f64>> = (0..d).map(|i| linalg::unit(d, i)).collect();
    let mut state: u64 = 0x9e37_79b9_7f4a_7c15;
    for _ in 0..(8 * d) {
        let v = DVector::from_fn(d, |_, _| {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state as f64 / u64::MAX as f64) * 2.0 - 1.0
        });
        if v.norm() > 1e-3 {
            starts.push(v);
        }
    }
    let mut best = f64::INFINITY;
    for mut c in starts {
        c /= c.norm();
        let mut val = f(&c);
        let mut step = 0.1;
        for _ in 0..30 {
            let h = 1e-6;
            let grad = DVector::from_fn(d, |i, _| {
                let mut cp = c.clone();
                cp[i] += h;
                (f(&cp) - val) / h
            });
            if grad.norm() < 1e-14 {
                break;
            }
            let trial = &c - &grad * step;
            let trial = &trial / trial.norm();
            let tv = f(&trial);
            if tv < val {
                c = trial;
                val = tv;
                step *= 1.5;
            } else {
                step *= 0.3;
            }
        }
        best = best.min(val);
    }
    best
}

/// `{x : [x, Jx] = 0}`, computed through the polarization
/// `B(x, y) = [x, Jy] + [y, Jx]` and verified on its complement.
///
/// Requires abelian `J` and a pluriclosed `g`; the result is checked against
/// the center of the algebra.
pub fn center_via_torsion(lie: &LieAlgebra, j: &ComplexStructure, g: &Metric) -> Result<Subspace> {
    check_dims(lie, j, g)?;
    require_abelian(lie, j)?;
    require_pluriclosed(lie, j, g)?;
    let n = lie.dim();
    // Rows: components of B(x, e_b) for each b, as a linear map of x.
    let mut m = DMatrix::zeros(n * n, n);
    for a in 0..n {
        let x = linalg::unit(n, a);
        let jx = j.apply(&x);
        for b in 0..n {
            let y = linalg::unit(n, b);
            let v = lie.bracket(&x, &j.apply(&y)) + lie.bracket(&y, &jx);
            for k in 0..n {
                m[(b * n + k, a)] = v[k];
            }
        }
    }
    let kernel = Subspace::span(&linalg::null_space(&m));
    let scale = lie.brackets().iter().map(|b| b.3.abs()).fold(1.0, f64::max);
    for v in kernel.basis().column_iter() {
        let v = v.into_owned();
        let q = lie.bracket(&v, &j.apply(&v)).norm();
        if q > DERIVED_ZERO * scale {
            return Err(Error::Inconsistency(format!("[x, Jx] = {q:.3e} on the polarization kernel")));
        }
    }
    let outside = min_self_bracket_on(lie, j, &kernel.complement());
    if outside < 1e-6 * scale {
        return Err(Error::Inconsistency(format!(
            "[x, Jx] nearly vanishes ({outside:.3e}) outside the polarization kernel"
        )));
    }
    let center = lie.center();
    if !kernel.same_as(&center, DERIVED_ZERO) {
        return Err(Error::Inconsistency("{x : [x,Jx] = 0} differs from the center".into()));
    }
    Ok(kernel)
}

/// `max |∂∂̄ ω^{n-2}|` over basis multi-indices (complex dimension `n >= 3`).
///
/// For `n = 3` this is half of [`pluriclosed_residual`], since
/// `d J dω = -2i ∂∂̄ω`.
pub fn astheno_residual(lie: &LieAlgebra, j: &ComplexStructure, g: &Metric) -> Result<f64> {
    Ok(astheno_form(lie, j, g)?.max_norm())
}

/// `∂∂̄ ω^{n-2}`.
pub fn astheno_form(lie: &LieAlgebra, j: &ComplexStructure, g: &Metric) -> Result<KForm> {
    check_dims(lie, j, g)?;
    astheno_of_form(lie, j, &fundamental_form(g, j)?)
}

/// `∂∂̄ ω^{n-2}` for an arbitrary real 2-form `ω`, positive or not.
pub fn astheno_of_form(lie: &LieAlgebra, j: &ComplexStructure, omega: &KForm) -> Result<KForm> {
    let n = j.complex_dim();
    if n < 3 {
        return Err(Error::Unsupported(format!(
            "astheno-Kähler condition needs complex dimension >= 3 (got {n})"
        )));
    }
    if omega.degree() != 2 || omega.dim() != lie.dim() || j.dim() != lie.dim() {
        return Err(Error::DimensionMismatch { expected: lie.dim(), found: omega.dim() });
    }
    require_integrable(lie, j)?;
    let power = omega.power(n - 2)?;
    let dbar = power.partial_bar(lie, j, n - 2, n - 2)?;
    dbar.partial(lie, j, n - 2, n - 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;
    use num_complex::Complex64;

    fn e(n: usize, i: usize) -> DVector<f64> {
        linalg::unit(n, i)
    }

    #[test]
    fn kodaira_thurston_torsion() {
        let kt = catalog::kt(1.5).unwrap();
        let t = bismut_torsion(kt.lie(), kt.j(), kt.metric().unwrap()).unwrap();
        assert!((t.eval_basis(&[0, 2, 1]).re + 1.5).abs() < 1e-12);
        assert!((t.eval_basis(&[0, 1, 2]).re - 1.5).abs() < 1e-12);
        for idx in [[0, 1, 3], [0, 2, 3], [1, 2, 3]] {
            assert!(t.eval_basis(&idx).norm() < 1e-12);
        }
        let closed = torsion_closed_form(kt.lie(), kt.metric().unwrap()).unwrap();
        assert!(t.distance(&closed).unwrap() < 1e-12);
    }

    #[test]
    fn abelian_algebra_is_torsion_free() {
        let a = catalog::abelian(3).unwrap();
        let t = bismut_torsion(a.lie(), a.j(), a.metric().unwrap()).unwrap();
        assert_eq!(t.max_norm(), 0.0);
    }

    #[test]
    fn non_integrable_structure_is_rejected() {
        let kt = catalog::kt(1.0).unwrap();
        let j = ComplexStructure::interleaved(2);
        let err = bismut_torsion(kt.lie(), &j, &Metric::identity(4)).unwrap_err();
        assert!(matches!(err, Error::NotIntegrable(_)));
    }

    #[test]
    fn pluriclosed_examples() {
        for entry in [catalog::kt(2.0).unwrap(), catalog::canonical_skl(3, 2, 2, &[1.0, 3.0], None).unwrap()] {
            let rep = pluriclosed_report(entry.lie(), entry.j(), entry.metric().unwrap()).unwrap();
            assert!(rep.ddc < 1e-12);
            assert!(rep.route_gap.unwrap() < 1e-12);
        }
        let ex = catalog::example8(Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)).unwrap();
        let rep = pluriclosed_report(ex.lie(), ex.j(), ex.metric().unwrap()).unwrap();
        assert!(rep.ddc > 0.1);
        assert!(rep.route_gap.unwrap() < 1e-10);
    }

    #[test]
    fn corollary_on_kodaira_thurston() {
        let kt = catalog::kt(1.0).unwrap();
        let g = kt.metric().unwrap();
        let x = e(4, 0);
        assert!(corollary_identity_residual(kt.lie(), kt.j(), g, &x, &x).unwrap().abs() < 1e-12);
        let y = DVector::from_vec(vec![0.3, -1.0, 0.5, 2.0]);
        assert!(corollary_identity_residual(kt.lie(), kt.j(), g, &x, &y).unwrap().abs() < 1e-12);
    }

    #[test]
    fn corollary_needs_pluriclosed_metric() {
        let ex = catalog::example8(Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)).unwrap();
        let x = e(8, 0);
        let err = corollary_identity_residual(ex.lie(), ex.j(), ex.metric().unwrap(), &x, &x).unwrap_err();
        assert!(matches!(err, Error::NotPluriclosed(_)));
    }

    #[test]
    fn center_of_canonical_family() {
        let kt = catalog::kt(1.0).unwrap();
        let c = center_via_torsion(kt.lie(), kt.j(), kt.metric().unwrap()).unwrap();
        assert!(c.same_as(&Subspace::coordinate(4, &[1, 3]), 1e-10));

        let skl = catalog::canonical_skl(3, 2, 1, &[2.0], None).unwrap();
        let c = center_via_torsion(skl.lie(), skl.j(), skl.metric().unwrap()).unwrap();
        assert!(c.same_as(&Subspace::coordinate(6, &[1, 2, 4, 5]), 1e-10));

        let a = catalog::abelian(2).unwrap();
        let c = center_via_torsion(a.lie(), a.j(), a.metric().unwrap()).unwrap();
        assert_eq!(c.dim(), 4);
    }

    #[test]
    fn astheno_needs_three_complex_dimensions() {
        let kt = catalog::kt(1.0).unwrap();
        let err = astheno_residual(kt.lie(), kt.j(), kt.metric().unwrap()).unwrap_err();
        assert!(matches!(err, Error::Unsupported(_)));
    }

    #[test]
    fn astheno_is_half_of_pluriclosed_in_dimension_six() {
        let lie = LieAlgebra::new(6, [(0, 1, 2, 1.0), (3, 4, 2, 1.0), (0, 3, 5, 1.0)]).unwrap();
        let j = ComplexStructure::standard(3);
        for seed in 0..5 {
            let g = crate::sweep::random_hermitian_metric(&j, seed).unwrap();
            let pc = pluriclosed_residual(&lie, &j, &g).unwrap();
            let ak = astheno_residual(&lie, &j, &g).unwrap();
            assert!(pc > 1e-6);
            assert!((pc - 2.0 * ak).abs() < 1e-10 * pc.max(1.0), "{pc} vs {ak}");
        }
    }

    #[test]
    fn astheno_on_example_family() {
        let ex = catalog::example8(Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)).unwrap();
        let boundary = catalog::astheno_fundamental_form(&catalog::ASTHENO_BOUNDARY).unwrap().real_part();
        assert!(astheno_of_form(ex.lie(), ex.j(), &boundary).unwrap().max_norm() < 1e-12);
        let reference = astheno_residual(ex.lie(), ex.j(), ex.metric().unwrap()).unwrap();
        assert!(reference > 0.1);
    }
}
