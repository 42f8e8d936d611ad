use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sktlab::catalog;
use sktlab::complex;
use sktlab::feasibility::{decide, Mode, SolverConfig, Verdict};
use sktlab::hermitian::{
    bismut_connection, bismut_ricci, bismut_ricci_two_step, bismut_torsion, pluriclosed_residual, skl_residuals,
    torsion_closed_form, Metric,
};
use sktlab::io::{self, Structure};
use sktlab::lie::{g1_j, LieAlgebra};
use sktlab::structeq::{self, Atom, Coefficient, StructureEquationSpec, Term};
use sktlab::sweep::{self, InstanceKind};
use sktlab::KForm;

fn config() -> ProptestConfig {
    ProptestConfig { cases: 32, ..ProptestConfig::default() }
}

fn kind(k: u8) -> InstanceKind {
    match k % 3 {
        0 => InstanceKind::CanonicalFamily,
        1 => InstanceKind::TwoStepAbelian,
        _ => InstanceKind::MutatedThreeStep,
    }
}

/// A structure with abelian `J` from the sweep generators.
fn abelian_structure(k: u8, seed: u64, max_dim: usize) -> Structure {
    let kind = kind(k);
    let max_dim = if kind == InstanceKind::MutatedThreeStep { max_dim.max(8) } else { max_dim };
    sweep::generate(kind, seed, max_dim).unwrap()
}

/// Algebras of dimension 2..=8 that are not all nilpotent: the generated
/// ones, aff, so(3) ⊕ ℝ, each after a random change of basis.
fn any_algebra(pick: u8, seed: u64) -> LieAlgebra {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let lie = match pick % 4 {
        0 => LieAlgebra::new(2, [(0, 1, 1, 1.0)]).unwrap(),
        1 => LieAlgebra::new(4, [(0, 1, 2, 1.0), (1, 2, 0, 1.0), (2, 0, 1, 1.0)]).unwrap(),
        2 => abelian_structure(0, seed, 6).lie,
        _ => abelian_structure(2, seed, 8).lie,
    };
    let n = lie.dim();
    let p = DMatrix::from_fn(n, n, |a, b| if a == b { 1.0 } else { 0.0 } + rng.gen_range(-0.3..0.3));
    lie.change_basis(&p).unwrap()
}

fn random_form(dim: usize, degree: usize, seed: u64) -> KForm {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    KForm::from_fn(dim, degree, |_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).unwrap()
}

fn scale_of(lie: &LieAlgebra) -> f64 {
    lie.brackets().iter().map(|b| b.3.abs()).fold(1.0, f64::max)
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn leibniz_rule(pick in 0u8..4, seed in any::<u64>(), p in 0usize..3, q in 0usize..3) {
        let lie = any_algebra(pick, seed);
        let n = lie.dim();
        prop_assume!(p + q < n);
        let a = random_form(n, p, seed ^ 1);
        let b = random_form(n, q, seed ^ 2);
        let lhs = a.wedge(&b).unwrap().ce_differential(&lie).unwrap();
        let sign = if p % 2 == 0 { 1.0 } else { -1.0 };
        let rhs = a.ce_differential(&lie).unwrap().wedge(&b).unwrap()
            .add(&a.wedge(&b.ce_differential(&lie).unwrap()).unwrap().scale_real(sign)).unwrap();
        let s = scale_of(&lie);
        prop_assert!(lhs.distance(&rhs).unwrap() < 1e-11 * s);
    }

    #[test]
    fn d_squared_vanishes(pick in 0u8..4, seed in any::<u64>(), k in 0usize..4) {
        let lie = any_algebra(pick, seed);
        prop_assume!(k <= lie.dim());
        let a = random_form(lie.dim(), k, seed);
        let dd = a.ce_differential(&lie).unwrap().ce_differential(&lie).unwrap();
        let s = scale_of(&lie);
        prop_assert!(dd.max_norm() < 1e-11 * s * s);
    }

    #[test]
    fn broken_jacobi_shows_in_d_squared(seed in any::<u64>(), eps in 0.1f64..1.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let i = rng.gen_range(0..4);
        let j = (i + rng.gen_range(1..4)) % 4;
        let k = rng.gen_range(0..4);
        let lie = LieAlgebra::new_unchecked(4, [(0, 2, 1, 1.0), (1, 3, 0, 1.0), (i, j, k, eps)]).unwrap();
        let jac = lie.jacobi_residual();
        let worst = (0..4)
            .map(|m| {
                let e = KForm::basis(4, &[m]).unwrap();
                e.ce_differential(&lie).unwrap().ce_differential(&lie).unwrap().max_norm()
            })
            .fold(0.0, f64::max);
        prop_assert_eq!(jac > 1e-12, worst > 1e-12);
    }

    #[test]
    fn bidegree_decomposition(k in 0u8..3, seed in any::<u64>(), deg in 1usize..4) {
        let s = abelian_structure(k, seed, 6);
        let a = random_form(s.lie.dim(), deg, seed);
        let mut sum = KForm::zero(s.lie.dim(), deg).unwrap();
        for p in 0..=deg {
            sum = sum.add(&a.bidegree_project(&s.j, p, deg - p).unwrap()).unwrap();
        }
        prop_assert!(sum.distance(&a).unwrap() < 1e-12);
    }

    #[test]
    fn dolbeault_identities(k in 0u8..2, seed in any::<u64>(), p in 0usize..2, q in 0usize..2) {
        let s = abelian_structure(k, seed, 6);
        let (lie, j) = (&s.lie, &s.j);
        let a = random_form(lie.dim(), p + q, seed).bidegree_project(j, p, q).unwrap();
        let del = a.partial(lie, j, p, q).unwrap();
        let delbar = a.partial_bar(lie, j, p, q).unwrap();
        let dd = del.partial_bar(lie, j, p + 1, q).unwrap();
        let dbd = delbar.partial(lie, j, p, q + 1).unwrap();
        let sc = scale_of(lie);
        let tol = 1e-11 * sc * sc;
        prop_assert!(dd.add(&dbd).unwrap().max_norm() < tol);
        prop_assert!(del.partial(lie, j, p + 1, q).unwrap().max_norm() < tol);
        prop_assert!(delbar.partial_bar(lie, j, p, q + 1).unwrap().max_norm() < tol);
    }

    #[test]
    fn center_and_lower_central_series(pick in 0u8..4, seed in any::<u64>()) {
        let lie = any_algebra(pick, seed);
        let n = lie.dim();
        let s = scale_of(&lie);
        for z in lie.center().basis().column_iter() {
            for i in 0..n {
                let e = DVector::from_fn(n, |r, _| if r == i { 1.0 } else { 0.0 });
                prop_assert!(lie.bracket(&z.into_owned(), &e).norm() < 1e-10 * s);
            }
        }
        let series = lie.lower_central_series();
        for w in series.windows(2) {
            prop_assert!(w[1].dim() <= w[0].dim());
            for v in w[1].basis().column_iter() {
                prop_assert!(w[0].contains(&v.into_owned(), 1e-8));
            }
        }
    }

    #[test]
    fn abelian_structures(k in 0u8..3, seed in any::<u64>()) {
        let s = abelian_structure(k, seed, 10);
        prop_assert!(complex::nijenhuis_residual(&s.lie, &s.j).unwrap() < 1e-10);
        prop_assert!(s.lie.solvability_step().is_some_and(|k| k <= 2));
        prop_assert!(s.lie.is_unimodular());
        prop_assert!(g1_j(&s.lie, &s.j).dim() < s.lie.dim());
    }

    #[test]
    fn torsion_routes_agree(k in 0u8..3, seed in any::<u64>()) {
        let s = abelian_structure(k, seed, 8);
        let g = sweep::random_hermitian_metric(&s.j, seed ^ 3).unwrap();
        let t = bismut_torsion(&s.lie, &s.j, &g).unwrap();
        let c = torsion_closed_form(&s.lie, &g).unwrap();
        let sc = scale_of(&s.lie);
        prop_assert!(t.distance(&c).unwrap() < 1e-10 * sc);
    }

    #[test]
    fn bismut_is_metric_and_complex(k in 0u8..3, seed in any::<u64>()) {
        let s = abelian_structure(k, seed, 8);
        let g = sweep::random_hermitian_metric(&s.j, seed ^ 5).unwrap();
        let b = bismut_connection(&s.lie, &s.j, &g).unwrap();
        let sc = scale_of(&s.lie);
        prop_assert!(b.metric_residual() < 1e-10 * sc);
        prop_assert!(b.complex_residual(&s.j) < 1e-10 * sc);
    }

    #[test]
    fn skl_sides_agree(seed in any::<u64>(), delta in -0.4f64..0.4, l1 in 0.2f64..3.0, l2 in 0.2f64..3.0) {
        let e = catalog::pluriclosed_non_skl(delta).unwrap();
        let r = skl_residuals(e.lie(), e.j(), e.metric().unwrap()).unwrap();
        prop_assert!(r.consistent);
        let c = catalog::canonical_skl(3, 2, 2, &[l1, l2], None).unwrap();
        let g = sweep::random_hermitian_metric(c.j(), seed).unwrap();
        let r = skl_residuals(c.lie(), c.j(), &g).unwrap();
        prop_assert!(r.consistent);
    }

    #[test]
    fn two_step_ricci_matches_curvature(seed in any::<u64>()) {
        let s = sweep::generate(InstanceKind::CanonicalFamily, seed, 8).unwrap();
        let g = s.metric.clone().unwrap();
        prop_assume!(pluriclosed_residual(&s.lie, &s.j, &g).unwrap() < 1e-8);
        let full = bismut_ricci(&s.lie, &s.j, &g).unwrap();
        let short = bismut_ricci_two_step(&s.lie, &s.j, &g).unwrap();
        let sc = scale_of(&s.lie);
        prop_assert!(full.distance(&short).unwrap() < 1e-9 * sc * sc);
    }

    #[test]
    fn json_round_trip(k in 0u8..3, seed in any::<u64>()) {
        let s = abelian_structure(k, seed, 8);
        let back = io::structure_from_json(&io::structure_to_json(&s)).unwrap();
        prop_assert_eq!(back.to_json(), s.to_json());
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, ..ProptestConfig::default() })]

    #[test]
    fn feasible_witnesses_are_sound(seed in any::<u64>()) {
        let s = sweep::generate(InstanceKind::TwoStepAbelian, seed, 8).unwrap();
        let cfg = SolverConfig { bisection_steps: 4, ..SolverConfig::default() };
        let r = decide(&s.lie, &s.j, Mode::Pluriclosed, &cfg).unwrap();
        if r.verdict == Verdict::Feasible {
            let w = Metric::new(r.witness.unwrap()).unwrap();
            prop_assert!(w.min_eigenvalue() >= cfg.feasible_floor * 0.999);
            prop_assert!(w.hermitian_residual(&s.j) < 1e-12);
            prop_assert!(pluriclosed_residual(&s.lie, &s.j, &w).unwrap() < 1e-8);
        } else {
            prop_assert!(r.witness.is_none());
        }
    }
}

fn atom(n: usize) -> impl Strategy<Value = Atom> {
    (1..=n, any::<bool>()).prop_map(|(k, bar)| if bar { Atom::PhiBar(k) } else { Atom::Phi(k) })
}

fn term(n: usize) -> impl Strategy<Value = Term> {
    (atom(n), atom(n), -3i32..=3, -3i32..=3, proptest::option::of(prop_oneof![Just("a"), Just("b")])).prop_map(
        |(left, right, re, im, p)| Term {
            coefficient: Coefficient {
                literal: Complex64::new(re as f64 * 0.5, im as f64 * 0.25),
                params: p.into_iter().map(String::from).collect(),
            },
            left,
            right,
        },
    )
}

fn spec() -> impl Strategy<Value = StructureEquationSpec> {
    (1usize..=4).prop_flat_map(|n| {
        proptest::collection::vec(proptest::collection::vec(term(n), 0..4), n).prop_map(move |equations| {
            StructureEquationSpec {
                n,
                params: vec![("a".into(), Complex64::new(1.0, -2.0)), ("b".into(), Complex64::new(0.5, 0.0))],
                equations,
            }
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 128, ..ProptestConfig::default() })]

    #[test]
    fn emit_is_idempotent(s in spec()) {
        let text = structeq::emit(&s);
        let parsed = structeq::parse(&text).unwrap();
        prop_assert_eq!(&parsed, &s.canonicalize());
        prop_assert_eq!(structeq::emit(&parsed), text);
    }
}
