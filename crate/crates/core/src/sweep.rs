//! Randomized search for counterexamples to the step-two theorem: unimodular
//! algebras with abelian `J` that admit a pluriclosed inner product yet are
//! not 2-step nilpotent.
//!
//! Every instance draws from its own ChaCha stream, seeded from the sweep
//! seed and the instance index, so any single instance can be regenerated.

use std::panic::{self, AssertUnwindSafe};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::catalog;
use crate::config::EXACT_ZERO;
use crate::complex::{self, ComplexStructure};
use crate::error::{Error, Result};
use crate::feasibility::{build_constraints, certify_witness, solve, CertificatePremises, Mode, SolverConfig, Verdict};
use crate::hermitian::Metric;
use crate::io::{Structure, StructureJson};
use crate::lie::{LieAlgebra, Nilpotency};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InstanceKind {
    CanonicalFamily,
    TwoStepAbelian,
    MutatedThreeStep,
    Example8,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepConfig {
    pub n: usize,
    pub seed: u64,
    pub max_dim: usize,
    /// Append the 8-dimensional example with its default parameters.
    pub include_example8: bool,
    pub solver: SolverConfig,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            n: 200,
            seed: 42,
            max_dim: 12,
            include_example8: true,
            // feasibility only: one projection run at the floor, no bisection
            solver: SolverConfig { bisection_steps: 0, ..SolverConfig::default() },
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InstanceOutcome {
    pub index: usize,
    pub kind: InstanceKind,
    pub instance_seed: u64,
    pub dim: usize,
    pub step: Option<usize>,
    pub nilpotent: bool,
    pub unimodular: bool,
    pub abelian_j: bool,
    /// What the projection solver alone concluded.
    pub solver_verdict: Verdict,
    /// After the step-two certificate is applied.
    pub verdict: Verdict,
    pub best_min_eigenvalue: f64,
    pub counterexample: bool,
    pub structure: StructureJson,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InstanceFailure {
    pub index: usize,
    pub kind: InstanceKind,
    pub instance_seed: u64,
    pub message: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SweepReport {
    pub config: SweepConfig,
    pub outcomes: Vec<InstanceOutcome>,
    pub failures: Vec<InstanceFailure>,
}

impl SweepReport {
    pub fn counterexamples(&self) -> Vec<&InstanceOutcome> {
        self.outcomes.iter().filter(|o| o.counterexample).collect()
    }

    pub fn count(&self, kind: InstanceKind, verdict: Verdict) -> usize {
        self.outcomes.iter().filter(|o| o.kind == kind && o.verdict == verdict).count()
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty() && self.counterexamples().is_empty()
    }
}

pub fn instance_seed(seed: u64, index: usize) -> u64 {
    seed ^ (index as u64).wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

pub fn kind_for(index: usize) -> InstanceKind {
    match index % 3 {
        0 => InstanceKind::CanonicalFamily,
        1 => InstanceKind::TwoStepAbelian,
        _ => InstanceKind::MutatedThreeStep,
    }
}

/// Regenerates one instance from its kind and seed.
pub fn generate(kind: InstanceKind, instance_seed: u64, max_dim: usize) -> Result<Structure> {
    let floor = if kind == InstanceKind::CanonicalFamily || kind == InstanceKind::TwoStepAbelian { 4 } else { 8 };
    if max_dim < floor {
        return Err(Error::InvalidParameters(format!("max_dim {max_dim} is below {floor} for {kind:?}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(instance_seed);
    let (lie, j, metric) = match kind {
        InstanceKind::CanonicalFamily => {
            let (lie, j) = random_canonical(&mut rng, max_dim)?;
            let g = Metric::identity(lie.dim());
            (lie, j, Some(g))
        }
        InstanceKind::TwoStepAbelian => {
            let half = max_dim / 2;
            let q = rng.gen_range(1..half.max(2));
            let p = rng.gen_range(1..=(half - q).max(1));
            let (lie, j) = random_two_step(&mut rng, p, q)?;
            (lie, j, None)
        }
        InstanceKind::MutatedThreeStep => {
            let (lie, j) = mutated_three_step(&mut rng, max_dim)?;
            (lie, j, None)
        }
        InstanceKind::Example8 => {
            let e = catalog::example8(Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0))?;
            return Ok(Structure { lie: e.lie().clone(), j: e.j().clone(), metric: None });
        }
    };
    let p = complex_linear_change(&mut rng, &j);
    Ok(Structure {
        lie: lie.change_basis(&p)?,
        j: j.change_basis(&p)?,
        metric: metric.map(|g| g.change_basis(&p)).transpose()?,
    })
}

/// A random invertible map commuting with `J`, seeded.
pub fn random_complex_linear(j: &ComplexStructure, seed: u64) -> DMatrix<f64> {
    complex_linear_change(&mut ChaCha8Rng::seed_from_u64(seed), j)
}

/// A random `J`-Hermitian inner product with eigenvalues roughly in `[0.5, 3]`.
pub fn random_hermitian_metric(j: &ComplexStructure, seed: u64) -> Result<Metric> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let d = j.dim();
    let a = DMatrix::from_fn(d, d, |_, _| rng.gen_range(-0.5..0.5));
    Metric::hermitianize(&(a.transpose() * &a + DMatrix::identity(d, d) * 0.5), j)
}

fn random_canonical(rng: &mut ChaCha8Rng, max_dim: usize) -> Result<(LieAlgebra, ComplexStructure)> {
    let n = rng.gen_range(2..=(max_dim / 2).max(2));
    let admissible: Vec<(usize, usize)> = (0..=n)
        .flat_map(|r| (1..=n).map(move |s| (r, s)))
        .filter(|&(r, s)| crate::hermitian::CanonicalSklData::parameters_admissible(n, r, s))
        .collect();
    let (r, s) = admissible[rng.gen_range(0..admissible.len())];
    let lambdas: Vec<f64> = (0..s).map(|_| rng.gen_range(0.5..3.0)).collect();
    let e = catalog::canonical_skl(n, r, s, &lambdas, None)?;
    Ok((e.lie().clone(), e.j().clone()))
}

/// `V ⊕ Z` with `dim_C V = p`, `dim_C Z = q`, `[V, V] ⊆ Z` central and each
/// `Z`-component of the bracket a `J`-invariant 2-form on `V`.
fn random_two_step(rng: &mut ChaCha8Rng, p: usize, q: usize) -> Result<(LieAlgebra, ComplexStructure)> {
    let n = p + q;
    let j = ComplexStructure::standard(n);
    let v: Vec<usize> = (0..p).chain(n..n + p).collect();
    let z: Vec<usize> = (p..n).chain(n + p..2 * n).collect();
    let jm = j.matrix();
    let mut brackets = Vec::new();
    for &target in &z {
        if rng.gen_bool(0.25) {
            continue;
        }
        let beta = DMatrix::from_fn(2 * n, 2 * n, |a, b| {
            if v.contains(&a) && v.contains(&b) { rng.gen_range(-1.0..1.0) } else { 0.0 }
        });
        let beta = &beta - beta.transpose();
        let invariant = 0.5 * (&beta + jm.transpose() * &beta * jm);
        for (ai, &a) in v.iter().enumerate() {
            for &b in &v[ai + 1..] {
                let (lo, hi) = (a.min(b), a.max(b));
                let c = invariant[(lo, hi)];
                if c != 0.0 {
                    brackets.push((lo, hi, target, c));
                }
            }
        }
    }
    Ok((LieAlgebra::new(2 * n, brackets)?, j))
}

/// The 8-dimensional 3-step family at random parameters, sometimes with an
/// extra 2-step or abelian summand.
fn mutated_three_step(rng: &mut ChaCha8Rng, max_dim: usize) -> Result<(LieAlgebra, ComplexStructure)> {
    let mut c = || Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
    let (b11, b13) = (c(), c());
    let mut d31 = c();
    if d31.norm() < 0.1 {
        d31 += Complex64::new(1.0, 0.0);
    }
    let e = catalog::example8(b11, b13, d31)?;
    let (lie, j) = (e.lie().clone(), e.j().clone());
    let room = max_dim.saturating_sub(lie.dim()) / 2;
    match rng.gen_range(0..3usize).min(room) {
        0 => Ok((lie, j)),
        1 => {
            let extra = LieAlgebra::abelian(2);
            Ok((lie.direct_sum(&extra), j.direct_sum(&ComplexStructure::standard(1))))
        }
        _ => {
            let (extra, ej) = random_two_step(rng, 1, 1)?;
            Ok((lie.direct_sum(&extra), j.direct_sum(&ej)))
        }
    }
}

/// A well-conditioned invertible map commuting with `J`.
fn complex_linear_change(rng: &mut ChaCha8Rng, j: &ComplexStructure) -> DMatrix<f64> {
    let d = j.dim();
    let jm = j.matrix();
    loop {
        let m = DMatrix::from_fn(d, d, |_, _| rng.gen_range(-0.3..0.3));
        let p = DMatrix::identity(d, d) + 0.5 * (&m - jm * &m * jm);
        let sv = p.clone().singular_values();
        if sv.min() > 0.1 && sv.max() / sv.min() < 10.0 {
            return p;
        }
    }
}

fn evaluate(index: usize, kind: InstanceKind, seed: u64, cfg: &SweepConfig) -> Result<InstanceOutcome> {
    let s = generate(kind, seed, cfg.max_dim)?;
    let (lie, j) = (&s.lie, &s.j);
    if !complex::is_integrable(lie, j)? {
        return Err(Error::Inconsistency("generated J is not integrable".into()));
    }
    let premises = CertificatePremises::measure(lie, j)?;
    let raw = solve(&build_constraints(lie, j, Mode::Pluriclosed)?, &cfg.solver);
    if let Some(w) = &raw.witness {
        certify_witness(lie, j, Mode::Pluriclosed, w)?;
    }
    let counterexample = premises.applies() && raw.verdict == Verdict::Feasible;
    let verdict = if premises.applies() && !counterexample { Verdict::InfeasibleCertified } else { raw.verdict };
    Ok(InstanceOutcome {
        index,
        kind,
        instance_seed: seed,
        dim: lie.dim(),
        step: premises.step.step(),
        nilpotent: premises.step != Nilpotency::NotNilpotent,
        unimodular: premises.unimodularity_defect < EXACT_ZERO,
        abelian_j: premises.abelian_residual < EXACT_ZERO,
        solver_verdict: raw.verdict,
        verdict,
        best_min_eigenvalue: raw.best_min_eigenvalue,
        counterexample,
        structure: s.to_json(),
    })
}

/// Runs all instances in parallel; panics inside one instance are caught and
/// reported as that instance's failure.
pub fn run(cfg: &SweepConfig) -> SweepReport {
    let mut jobs: Vec<(usize, InstanceKind, u64)> =
        (0..cfg.n).map(|i| (i, kind_for(i), instance_seed(cfg.seed, i))).collect();
    if cfg.include_example8 {
        jobs.push((cfg.n, InstanceKind::Example8, 0));
    }
    let results: Vec<std::result::Result<InstanceOutcome, InstanceFailure>> = jobs
        .par_iter()
        .map(|&(index, kind, seed)| {
            let fail = |message: String| InstanceFailure { index, kind, instance_seed: seed, message };
            match panic::catch_unwind(AssertUnwindSafe(|| evaluate(index, kind, seed, cfg))) {
                Ok(Ok(o)) => Ok(o),
                Ok(Err(e)) => Err(fail(e.to_string())),
                Err(p) => Err(fail(
                    p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_else(|| "panic".into()),
                )),
            }
        })
        .collect();
    let mut outcomes = Vec::new();
    let mut failures = Vec::new();
    for r in results {
        match r {
            Ok(o) => outcomes.push(o),
            Err(f) => failures.push(f),
        }
    }
    SweepReport { config: cfg.clone(), outcomes, failures }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_sweep_passes() {
        let cfg = SweepConfig { n: 0, include_example8: false, ..SweepConfig::default() };
        let report = run(&cfg);
        assert!(report.outcomes.is_empty());
        assert!(report.passed());
    }

    #[test]
    fn instances_are_reproducible() {
        for index in 0..6 {
            let kind = kind_for(index);
            let seed = instance_seed(42, index);
            let a = generate(kind, seed, 10).unwrap().to_json();
            let b = generate(kind, seed, 10).unwrap().to_json();
            assert_eq!(a, b);
        }
        assert_ne!(instance_seed(42, 0), instance_seed(42, 1));
    }

    #[test]
    fn generated_kinds_have_expected_shape() {
        for index in 0..9 {
            let kind = kind_for(index);
            let s = generate(kind, instance_seed(7, index), 12).unwrap();
            assert!(s.lie.dim() <= 12 && s.lie.dim().is_multiple_of(2));
            assert!(s.lie.jacobi_residual() < 1e-10);
            assert!(complex::abelian_residual(&s.lie, &s.j).unwrap() < 1e-10);
            assert!(s.lie.is_unimodular());
            match kind {
                InstanceKind::MutatedThreeStep => assert_eq!(s.lie.nilpotency_step(), Nilpotency::Step(3)),
                _ => assert!(s.lie.nilpotency_step().at_most_two_step()),
            }
        }
    }

    #[test]
    fn dimension_floor() {
        assert!(generate(InstanceKind::MutatedThreeStep, 1, 6).is_err());
        assert!(generate(InstanceKind::TwoStepAbelian, 1, 2).is_err());
    }

    #[test]
    fn random_changes_are_complex_linear() {
        let j = ComplexStructure::standard(3);
        let p = random_complex_linear(&j, 9);
        assert!((&p * j.matrix() - j.matrix() * &p).amax() < 1e-14);
        let g = random_hermitian_metric(&j, 9).unwrap();
        assert!(g.hermitian_residual(&j) < 1e-14);
        assert!(g.min_eigenvalue() > 0.0);
    }

    #[test]
    fn small_sweep() {
        let cfg = SweepConfig { n: 6, ..SweepConfig::default() };
        let report = run(&cfg);
        assert_eq!(report.outcomes.len() + report.failures.len(), 7);
        assert!(report.passed(), "{:?}", report.failures);
        assert_eq!(report.count(InstanceKind::Example8, Verdict::InfeasibleCertified), 1);
        assert_eq!(report.count(InstanceKind::MutatedThreeStep, Verdict::InfeasibleCertified), 2);
    }
}
