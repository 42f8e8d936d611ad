//! Golden inputs: the Kodaira–Thurston algebra, the canonical SKL family, an
//! 8-dimensional 3-step algebra with abelian complex structure, and a few
//! auxiliary structures.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::complex::{self, ComplexStructure};
use crate::config::{EXACT_ZERO, GATE};
use crate::error::{Error, Result};
use crate::exterior::KForm;
use crate::hermitian::{pluriclosed_residual, skl_residuals, Metric};
use crate::io::Structure;
use crate::lie::{g1_j, LieAlgebra, Nilpotency, Subspace};
use crate::structeq::{self, StructureEquationSpec};

/// Structure equations of the 8-dimensional example (1-based `phi` indices).
pub const EXAMPLE8_SEQ: &str = include_str!("../data/example8.seq");

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Expected {
    pub step: Nilpotency,
    pub unimodular: bool,
    pub abelian_j: bool,
    /// Verdict for the entry's metric (`None` when not declared).
    pub pluriclosed: Option<bool>,
    pub skl: Option<bool>,
}

#[derive(Clone, Debug)]
pub struct CatalogEntry {
    pub name: String,
    pub params: serde_json::Value,
    pub structure: Structure,
    pub expected: Expected,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Observed {
    pub step: Nilpotency,
    pub unimodular: bool,
    pub abelian_j: bool,
    pub pluriclosed: Option<bool>,
    pub skl: Option<bool>,
}

impl CatalogEntry {
    pub fn lie(&self) -> &LieAlgebra {
        &self.structure.lie
    }

    pub fn j(&self) -> &ComplexStructure {
        &self.structure.j
    }

    pub fn metric(&self) -> Option<&Metric> {
        self.structure.metric.as_ref()
    }

    pub fn observe(&self) -> Result<Observed> {
        let lie = self.lie();
        let j = self.j();
        let integrable = complex::is_integrable(lie, j)?;
        let (pluriclosed, skl) = match (self.metric(), integrable) {
            (Some(g), true) => {
                let pc = pluriclosed_residual(lie, j, g)? < GATE;
                let skl = skl_residuals(lie, j, g)?.is_skl(GATE);
                (Some(pc), Some(skl))
            }
            _ => (None, None),
        };
        Ok(Observed {
            step: lie.nilpotency_step(),
            unimodular: lie.is_unimodular(),
            abelian_j: complex::is_abelian(lie, j)?,
            pluriclosed,
            skl,
        })
    }

    /// Re-runs the checkers against the declared properties.
    pub fn verify(&self) -> Result<Observed> {
        let o = self.observe()?;
        let e = &self.expected;
        let mut bad = Vec::new();
        if o.step != e.step {
            bad.push(format!("step {:?} (declared {:?})", o.step, e.step));
        }
        if o.unimodular != e.unimodular {
            bad.push(format!("unimodular {}", o.unimodular));
        }
        if o.abelian_j != e.abelian_j {
            bad.push(format!("abelian J {}", o.abelian_j));
        }
        if e.pluriclosed.is_some() && o.pluriclosed != e.pluriclosed {
            bad.push(format!("pluriclosed {:?}", o.pluriclosed));
        }
        if e.skl.is_some() && o.skl != e.skl {
            bad.push(format!("SKL {:?}", o.skl));
        }
        if bad.is_empty() {
            Ok(o)
        } else {
            Err(Error::CatalogMismatch { entry: self.name.clone(), detail: bad.join(", ") })
        }
    }
}

pub fn abelian(n: usize) -> Result<CatalogEntry> {
    if n == 0 {
        return Err(Error::InvalidParameters("complex dimension must be positive".into()));
    }
    let entry = CatalogEntry {
        name: "abelian".into(),
        params: serde_json::json!({ "n": n }),
        structure: Structure {
            lie: LieAlgebra::abelian(2 * n),
            j: ComplexStructure::standard(n),
            metric: Some(Metric::identity(2 * n)),
        },
        expected: Expected {
            step: Nilpotency::Step(1),
            unimodular: true,
            abelian_j: true,
            pluriclosed: Some(true),
            skl: Some(true),
        },
    };
    entry.verify()?;
    Ok(entry)
}

/// `[e_0, e_2] = λ e_1`, `J e_0 = e_2`, `J e_1 = e_3`, `g = Id`.
pub fn kt(lambda: f64) -> Result<CatalogEntry> {
    let mut entry = canonical_skl(2, 1, 1, &[lambda], None)?;
    entry.name = "kt".into();
    entry.params = serde_json::json!({ "lambda": lambda });
    Ok(entry)
}

/// Default targets for the brackets: `x_i` runs through
/// `e_r, …, e_{n-1}, e_{n+r}, …, e_{2n-1}` (0-based) in order.
pub fn default_x_assign(n: usize, r: usize, s: usize) -> Vec<usize> {
    (r..n).chain(n + r..2 * n).take(s).collect()
}

/// `[e_i, e_{n+i}] = λ_i e_{x_i}` for `i < s` (0-based), `J e_i = e_{n+i}`,
/// `g = Id`.
pub fn canonical_skl(n: usize, r: usize, s: usize, lambdas: &[f64], x_assign: Option<&[usize]>) -> Result<CatalogEntry> {
    if !(r <= n && n - r <= s && s <= r.min(2 * (n - r))) {
        return Err(Error::InvalidParameters(format!(
            "(n, r, s) = ({n}, {r}, {s}) violates n - r <= s <= min(r, 2(n - r))"
        )));
    }
    if lambdas.len() != s || lambdas.iter().any(|&l| !(l > 0.0)) {
        return Err(Error::InvalidParameters(format!("need {s} positive λ values")));
    }
    let x: Vec<usize> = match x_assign {
        Some(x) => x.to_vec(),
        None => default_x_assign(n, r, s),
    };
    let allowed: Vec<usize> = (r..n).chain(n + r..2 * n).collect();
    if x.len() != s || x.iter().any(|k| !allowed.contains(k)) {
        return Err(Error::InvalidParameters("x_assign must pick s targets among e_r..e_{n-1}, e_{n+r}..e_{2n-1}".into()));
    }
    let mut sorted = x.clone();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != s {
        return Err(Error::InvalidParameters("x_assign targets must be distinct".into()));
    }
    let lie = LieAlgebra::new(2 * n, (0..s).map(|i| (i, n + i, x[i], lambdas[i])))?;
    let j = ComplexStructure::standard(n);
    let w = g1_j(&lie, &j);
    if !w.same_as(&Subspace::coordinate(2 * n, &allowed), 1e-12) {
        return Err(Error::InvalidParameters("x_assign leaves part of span{e_r..} outside g¹ + Jg¹".into()));
    }
    let entry = CatalogEntry {
        name: "canonical_skl".into(),
        params: serde_json::json!({ "n": n, "r": r, "s": s, "lambdas": lambdas, "x_assign": x }),
        structure: Structure { lie, j, metric: Some(Metric::identity(2 * n)) },
        expected: Expected {
            step: Nilpotency::Step(2),
            unimodular: true,
            abelian_j: true,
            pluriclosed: Some(true),
            skl: Some(true),
        },
    };
    entry.verify()?;
    Ok(entry)
}

pub fn example8_spec(b11: Complex64, b13: Complex64, d31: Complex64) -> Result<StructureEquationSpec> {
    let mut spec = structeq::parse(EXAMPLE8_SEQ)?;
    spec.set_param("B11", b11)?;
    spec.set_param("B13", b13)?;
    spec.set_param("D31", d31)?;
    Ok(spec)
}

/// The realified 8-dimensional example with the reference metric of the
/// astheno family.
pub fn example8(b11: Complex64, b13: Complex64, d31: Complex64) -> Result<CatalogEntry> {
    if d31.norm() < EXACT_ZERO {
        return Err(Error::InvalidParameters("D31 must be nonzero".into()));
    }
    let spec = example8_spec(b11, b13, d31)?;
    let (lie, j) = structeq::realify(&spec)?;
    let metric = astheno_metric_family(&ASTHENO_REFERENCE)?;
    let entry = CatalogEntry {
        name: "example8".into(),
        params: serde_json::json!({ "B11": [b11.re, b11.im], "B13": [b13.re, b13.im], "D31": [d31.re, d31.im] }),
        structure: Structure { lie, j, metric: Some(metric) },
        expected: Expected {
            step: Nilpotency::Step(3),
            unimodular: true,
            abelian_j: true,
            pluriclosed: Some(false),
            skl: None,
        },
    };
    entry.verify()?;
    Ok(entry)
}

/// Coefficients of
/// `ω = Σ_k i x_kk φ^{k k̄} + Σ_{k<l} (x_kl φ^{k l̄} - conj(x_kl) φ^{l k̄}) + (i/2) φ^{4 4̄}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsthenoParams {
    pub x11: f64,
    pub x22: f64,
    pub x33: f64,
    pub x12: Complex64,
    pub x13: Complex64,
    pub x23: Complex64,
}

/// Reference member of the family (no off-diagonal terms, all `x_kk = 1`).
pub const ASTHENO_REFERENCE: AsthenoParams = AsthenoParams {
    x11: 1.0,
    x22: 1.0,
    x33: 1.0,
    x12: Complex64::new(0.0, 0.0),
    x13: Complex64::new(0.0, 0.0),
    x23: Complex64::new(0.0, 0.0),
};

/// A point of the slice `x22 + x33 = 2 Im x23` on the boundary of the
/// positive cone: `ω` is only semi-definite here.
pub const ASTHENO_BOUNDARY: AsthenoParams = AsthenoParams {
    x11: 1.0,
    x22: 1.0,
    x33: 1.0,
    x12: Complex64::new(0.0, 0.0),
    x13: Complex64::new(0.0, 0.0),
    x23: Complex64::new(0.0, 1.0),
};

impl AsthenoParams {
    /// `x22 + x33 - 2 Im x23`, whose vanishing is the astheno condition on
    /// this family.
    pub fn slice_defect(&self) -> f64 {
        self.x22 + self.x33 - 2.0 * self.x23.im
    }
}

/// `g(x, y) = ω(x, Jy)` of a family member, with no positivity check.
pub fn astheno_family_gram(p: &AsthenoParams) -> Result<DMatrix<f64>> {
    let omega = astheno_fundamental_form(p)?.real_part();
    let j = ComplexStructure::interleaved(4);
    let w = DMatrix::from_fn(8, 8, |a, b| if a == b { 0.0 } else { omega.eval_basis(&[a, b]).re });
    Ok(crate::linalg::symmetrize(&(w * j.matrix())))
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SliceSearch {
    pub best: AsthenoParams,
    /// Largest smallest eigenvalue of the Gram matrix found on the slice,
    /// after normalizing the trace to 8.
    pub best_min_eigenvalue: f64,
    pub evaluations: usize,
}

pub const SLICE_BOX: f64 = 64.0;

/// Searches the slice `x22 + x33 = 2 Im x23` for a positive-definite member:
/// compass search over `(x11, x22, x33, x12, x13, Re x23)` maximizing the
/// trace-normalized smallest eigenvalue. Coordinates stay in `[-SLICE_BOX, SLICE_BOX]`.
pub fn astheno_slice_search() -> Result<SliceSearch> {
    let unpack = |v: &[f64; 9]| {
        let x23_im = 0.5 * (v[1] + v[2]);
        AsthenoParams {
            x11: v[0],
            x22: v[1],
            x33: v[2],
            x12: Complex64::new(v[3], v[4]),
            x13: Complex64::new(v[5], v[6]),
            x23: Complex64::new(v[7], x23_im),
        }
    };
    let mut evaluations = 0;
    let mut score = |v: &[f64; 9]| -> Result<f64> {
        evaluations += 1;
        let g = astheno_family_gram(&unpack(v))?;
        let tr = g.trace();
        if tr <= 0.0 {
            return Ok(f64::NEG_INFINITY);
        }
        Ok(crate::linalg::min_eigenvalue(&g) * 8.0 / tr)
    };
    let starts: [[f64; 9]; 3] = [
        [1.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [2.0, 0.5, 3.0, 0.3, -0.2, 0.1, 0.4, 0.7, 0.0],
        [0.5, 4.0, 0.25, -0.5, 0.5, 0.5, -0.5, -1.0, 0.0],
    ];
    let mut best = starts[0];
    let mut best_val = f64::NEG_INFINITY;
    for start in starts {
        let mut v = start;
        let mut val = score(&v)?;
        let mut step = 0.5;
        while step > 1e-10 {
            let mut improved = false;
            for k in 0..8 {
                for dir in [1.0, -1.0] {
                    let mut t = v;
                    t[k] += dir * step;
                    if t[0] <= 0.0 || t[1] <= 0.0 || t[2] <= 0.0 || t[k].abs() > SLICE_BOX {
                        continue;
                    }
                    let tv = score(&t)?;
                    if tv > val + 1e-15 {
                        v = t;
                        val = tv;
                        improved = true;
                    }
                }
            }
            if !improved {
                step *= 0.5;
            }
        }
        if val > best_val {
            best_val = val;
            best = v;
        }
    }
    Ok(SliceSearch { best: unpack(&best), best_min_eigenvalue: best_val, evaluations })
}

pub fn astheno_fundamental_form(p: &AsthenoParams) -> Result<KForm> {
    let frame = structeq::coframe(4);
    let i = Complex64::new(0.0, 1.0);
    let wedge_bar = |k: usize, l: usize| frame[k].wedge(&frame[l].conj());
    let mut omega = KForm::zero(8, 2)?;
    for (k, x) in [p.x11, p.x22, p.x33].into_iter().enumerate() {
        omega = omega.add(&wedge_bar(k, k)?.scale(i * x))?;
    }
    for (k, l, x) in [(0, 1, p.x12), (0, 2, p.x13), (1, 2, p.x23)] {
        omega = omega.add(&wedge_bar(k, l)?.scale(x))?;
        omega = omega.sub(&wedge_bar(l, k)?.scale(x.conj()))?;
    }
    omega = omega.add(&wedge_bar(3, 3)?.scale(i * 0.5))?;
    Ok(omega)
}

pub fn astheno_metric_family(p: &AsthenoParams) -> Result<Metric> {
    let omega = astheno_fundamental_form(p)?;
    Metric::from_fundamental_form(&omega.real_part(), &ComplexStructure::interleaved(4))
}

/// `[e_0, e_1] = e_1` with `J e_0 = e_1`: abelian complex structure on a
/// non-unimodular algebra.
pub fn aff() -> Result<CatalogEntry> {
    let entry = CatalogEntry {
        name: "aff".into(),
        params: serde_json::json!({}),
        structure: Structure {
            lie: LieAlgebra::new(2, [(0, 1, 1, 1.0)])?,
            j: ComplexStructure::standard(1),
            metric: Some(Metric::identity(2)),
        },
        expected: Expected {
            step: Nilpotency::NotNilpotent,
            unimodular: false,
            abelian_j: true,
            pluriclosed: Some(true),
            skl: None,
        },
    };
    entry.verify()?;
    Ok(entry)
}

/// The 6-dimensional SKL algebra `canonical_skl(3, 2, 2, (1, 1))` with the
/// Hermitian metric `g = Id + δ (e^0 e^1 + e^3 e^4)` (symmetrized): still
/// pluriclosed, no longer SKL.
pub fn pluriclosed_non_skl(delta: f64) -> Result<CatalogEntry> {
    let base = canonical_skl(3, 2, 2, &[1.0, 1.0], None)?;
    let mut g = DMatrix::<f64>::identity(6, 6);
    for (a, b) in [(0, 1), (3, 4)] {
        g[(a, b)] = delta;
        g[(b, a)] = delta;
    }
    let metric = Metric::new(g)?;
    metric.check_hermitian(base.j())?;
    let entry = CatalogEntry {
        name: "pluriclosed_non_skl".into(),
        params: serde_json::json!({ "delta": delta }),
        structure: Structure { lie: base.structure.lie, j: base.structure.j, metric: Some(metric) },
        expected: Expected {
            step: Nilpotency::Step(2),
            unimodular: true,
            abelian_j: true,
            pluriclosed: Some(true),
            skl: Some(false),
        },
    };
    entry.verify()?;
    Ok(entry)
}

/// Catalog names accepted by [`by_name`].
pub const NAMES: [&str; 6] = ["abelian", "kt", "canonical_skl", "example8", "aff", "pluriclosed_non_skl"];

/// Options for [`by_name`]; unset fields fall back to the defaults below.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct CatalogOptions {
    pub n: Option<usize>,
    pub r: Option<usize>,
    pub s: Option<usize>,
    pub lambda: Option<f64>,
    pub lambdas: Option<Vec<f64>>,
    pub b11: Option<f64>,
    pub b13: Option<f64>,
    pub d31: Option<f64>,
    pub delta: Option<f64>,
}

pub fn by_name(name: &str, o: &CatalogOptions) -> Result<CatalogEntry> {
    let real = |x: Option<f64>, d: f64| Complex64::new(x.unwrap_or(d), 0.0);
    match name {
        "abelian" => abelian(o.n.unwrap_or(2)),
        "kt" => kt(o.lambda.unwrap_or(1.0)),
        "canonical_skl" => {
            let n = o.n.unwrap_or(3);
            let r = o.r.unwrap_or(2);
            let s = o.s.unwrap_or(2);
            let lambdas = o.lambdas.clone().unwrap_or_else(|| vec![o.lambda.unwrap_or(1.0); s]);
            canonical_skl(n, r, s, &lambdas, None)
        }
        "example8" => example8(real(o.b11, 0.0), real(o.b13, 0.0), real(o.d31, 1.0)),
        "aff" => aff(),
        "pluriclosed_non_skl" => pluriclosed_non_skl(o.delta.unwrap_or(0.3)),
        other => Err(Error::InvalidParameters(format!("unknown catalog entry '{other}' (known: {})", NAMES.join(", ")))),
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ListingItem {
    pub name: String,
    pub params: serde_json::Value,
    pub dim: usize,
    pub expected: Expected,
    pub structure: crate::io::StructureJson,
}

/// Every entry at default parameters, as JSON.
pub fn listing() -> Result<String> {
    let items: Vec<ListingItem> = NAMES
        .iter()
        .map(|n| {
            let e = by_name(n, &CatalogOptions::default())?;
            Ok(ListingItem {
                name: e.name.clone(),
                params: e.params.clone(),
                dim: e.lie().dim(),
                expected: e.expected.clone(),
                structure: e.structure.to_json(),
            })
        })
        .collect::<Result<_>>()?;
    Ok(serde_json::to_string_pretty(&items)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_named_entry_verifies() {
        for name in NAMES {
            let e = by_name(name, &CatalogOptions::default()).unwrap();
            assert_eq!(e.name, name);
            e.verify().unwrap();
        }
        assert!(by_name("nope", &CatalogOptions::default()).is_err());
    }

    #[test]
    fn canonical_parameter_checks() {
        assert!(canonical_skl(2, 1, 0, &[], None).is_err());
        assert!(canonical_skl(2, 1, 1, &[-1.0], None).is_err());
        assert!(canonical_skl(3, 2, 2, &[1.0, 1.0], Some(&[2, 2])).is_err());
        assert!(canonical_skl(3, 2, 2, &[1.0, 1.0], Some(&[2, 5])).is_ok());
    }

    #[test]
    fn example_needs_nonzero_d31() {
        let z = Complex64::new(0.0, 0.0);
        assert!(example8(z, z, z).is_err());
    }

    #[test]
    fn example_center_contains_top_coordinates() {
        let e = example8(Complex64::new(0.5, 0.0), Complex64::new(0.0, 1.0), Complex64::new(1.0, 0.0)).unwrap();
        let c = e.lie().center();
        for k in [6, 7] {
            assert!(c.contains(&crate::linalg::unit(8, k), 1e-10));
        }
    }

    #[test]
    fn astheno_family() {
        assert!(ASTHENO_BOUNDARY.slice_defect().abs() < 1e-15);
        assert!((ASTHENO_REFERENCE.slice_defect() - 2.0).abs() < 1e-15);
        let g = astheno_family_gram(&ASTHENO_BOUNDARY).unwrap();
        assert!(crate::linalg::min_eigenvalue(&g).abs() < 1e-12);
        let g = astheno_metric_family(&ASTHENO_REFERENCE).unwrap();
        assert!(g.hermitian_residual(&ComplexStructure::interleaved(4)) < 1e-14);
        assert!(g.min_eigenvalue() > 0.0);
    }

    #[test]
    fn listing_is_json() {
        let v: serde_json::Value = serde_json::from_str(&listing().unwrap()).unwrap();
        assert_eq!(v.as_array().unwrap().len(), NAMES.len());
    }
}
