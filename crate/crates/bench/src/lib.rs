//! Shared inputs for the benchmarks.

use sktlab::catalog::{self, CatalogEntry};
use sktlab::{ComplexStructure, DMatrix, LieAlgebra, Metric};

pub struct Case {
    pub name: String,
    pub lie: LieAlgebra,
    pub j: ComplexStructure,
    pub g: Metric,
}

impl Case {
    fn from_entry(name: impl Into<String>, e: CatalogEntry) -> Self {
        let d = e.lie().dim();
        let g = match e.metric() {
            Some(g) => g.clone(),
            None => Metric::hermitianize(&DMatrix::identity(d, d), e.j()).expect("identity is positive"),
        };
        Case { name: name.into(), lie: e.lie().clone(), j: e.j().clone(), g }
    }
}

/// Canonical SKL algebras of complex dimension `n` with one λ per pair.
pub fn canonical(n: usize) -> Case {
    let (r, s) = (n - 1, n / 2);
    let lambdas: Vec<f64> = (1..=s).map(|k| k as f64).collect();
    let e = catalog::canonical_skl(n, r, s, &lambdas, None).expect("admissible parameters");
    Case::from_entry(format!("canonical_skl_n{n}"), e)
}

pub fn kt() -> Case {
    Case::from_entry("kt", catalog::kt(1.0).expect("kt"))
}

pub fn example8() -> Case {
    let one = sktlab::Complex64::new(1.0, 0.0);
    let zero = sktlab::Complex64::new(0.0, 0.0);
    Case::from_entry("example8", catalog::example8(zero, zero, one).expect("example8"))
}

/// A spread of real dimensions for the per-dimension benchmarks.
pub fn ladder() -> Vec<Case> {
    let mut v = vec![kt()];
    v.extend((3..=5).map(canonical));
    v
}
