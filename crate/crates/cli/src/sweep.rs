use std::collections::BTreeMap;

use serde::Serialize;
use sktlab::feasibility::{SolverConfig, Verdict};
use sktlab::sweep::{self, InstanceFailure, InstanceKind, InstanceOutcome, SweepConfig};

use crate::report::{sci, Lines};

#[derive(Serialize)]
pub struct Instance {
    pub index: usize,
    pub kind: InstanceKind,
    pub instance_seed: u64,
    pub dim: usize,
    pub step: Option<usize>,
    pub solver_verdict: Verdict,
    pub verdict: Verdict,
    pub best_min_eigenvalue: f64,
}

#[derive(Serialize)]
pub struct SweepResult {
    pub config: SweepConfig,
    pub instances: Vec<Instance>,
    /// `kind -> verdict -> count`.
    pub counts: BTreeMap<String, BTreeMap<String, usize>>,
    pub feasible_step_above_two: usize,
    pub counterexamples: Vec<InstanceOutcome>,
    pub failures: Vec<InstanceFailure>,
    pub passed: bool,
}

fn label<T: Serialize>(v: &T) -> String {
    serde_json::to_value(v).ok().and_then(|x| x.as_str().map(str::to_owned)).unwrap_or_default()
}

pub fn run(n: usize, seed: u64, max_dim: usize, include_example8: bool, solver: &SolverConfig) -> SweepResult {
    let cfg = SweepConfig { n, seed, max_dim, include_example8, solver: SolverConfig { bisection_steps: 0, ..solver.clone() } };
    // instances run in parallel; everything below is assembled on this thread
    let report = sweep::run(&cfg);
    let mut counts: BTreeMap<String, BTreeMap<String, usize>> = BTreeMap::new();
    for o in &report.outcomes {
        *counts.entry(label(&o.kind)).or_default().entry(label(&o.verdict)).or_default() += 1;
    }
    let feasible_step_above_two = report
        .outcomes
        .iter()
        .filter(|o| o.solver_verdict == Verdict::Feasible && o.step.is_none_or(|s| s > 2))
        .count();
    let instances = report
        .outcomes
        .iter()
        .map(|o| Instance {
            index: o.index,
            kind: o.kind,
            instance_seed: o.instance_seed,
            dim: o.dim,
            step: o.step,
            solver_verdict: o.solver_verdict,
            verdict: o.verdict,
            best_min_eigenvalue: o.best_min_eigenvalue,
        })
        .collect();
    let counterexamples: Vec<InstanceOutcome> = report.counterexamples().into_iter().cloned().collect();
    let passed = report.passed();
    SweepResult { config: report.config, instances, counts, feasible_step_above_two, counterexamples, failures: report.failures, passed }
}

pub fn render(r: &SweepResult) -> String {
    let mut l = Lines::new();
    l.kv(
        "instances",
        format!("{} evaluated, {} failed (seed {}, dims <= {})", r.instances.len(), r.failures.len(), r.config.seed, r.config.max_dim),
    );
    for (kind, by_verdict) in &r.counts {
        let parts: Vec<String> = by_verdict.iter().map(|(v, c)| format!("{v} {c}")).collect();
        l.kv(&format!("  {kind}"), parts.join(", "));
    }
    l.kv("feasible with step > 2", r.feasible_step_above_two);
    l.kv("counterexamples", r.counterexamples.len());
    for c in &r.counterexamples {
        l.raw(format!(
            "  #{} {:?} seed {} dim {} step {:?} best eig {}",
            c.index, c.kind, c.instance_seed, c.dim, c.step, sci(c.best_min_eigenvalue)
        ));
        l.raw(format!("  {}", serde_json::to_string(&c.structure).expect("structure serializes")));
    }
    for f in &r.failures {
        l.raw(format!("  failure #{} {:?} seed {}: {}", f.index, f.kind, f.instance_seed, f.message));
    }
    l.kv("result", if r.passed { "PASS" } else { "FAIL" });
    l.0
}
