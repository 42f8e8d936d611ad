use serde::Serialize;
use sktlab::feasibility::{decide, CertificatePremises, FeasibilityResult, Mode, SolverConfig, Verdict};
use sktlab::Result;

use crate::input::Loaded;
use crate::report::{sci, Lines};

#[derive(Serialize)]
pub struct FeasibilityReport {
    pub mode: Mode,
    #[serde(flatten)]
    pub result: FeasibilityResult,
    /// Why the step-two certificate was not used, when it was not.
    pub certificate_not_applicable: Option<String>,
}

pub fn run(input: &Loaded, mode: Mode, solver: &SolverConfig) -> Result<FeasibilityReport> {
    let lie = &input.structure.lie;
    let j = &input.structure.j;
    let result = decide(lie, j, mode, solver)?;
    let certificate_not_applicable = match (mode, &result.certificate) {
        (Mode::Pluriclosed, None) => CertificatePremises::measure(lie, j)?.not_applicable_reason(),
        (Mode::Astheno, _) => Some("the step-two certificate concerns pluriclosed metrics only".into()),
        _ => None,
    };
    Ok(FeasibilityReport { mode, result, certificate_not_applicable })
}

pub fn render(r: &FeasibilityReport) -> String {
    let mut l = Lines::new();
    let res = &r.result;
    l.kv("mode", format!("{:?}", r.mode).to_lowercase());
    l.kv(
        "verdict",
        match res.verdict {
            Verdict::Feasible => "feasible",
            Verdict::InfeasibleHeuristic => "infeasible (heuristic)",
            Verdict::InfeasibleCertified => "infeasible (certified)",
        },
    );
    l.kv("best min eigenvalue", format!("{} (trace normalized to the dimension)", sci(res.best_min_eigenvalue)));
    l.kv(
        "projections",
        format!(
            "{} iterations in {} runs{}",
            res.iterations,
            res.projection_runs,
            if res.cap_reached { "; iteration cap reached without convergence" } else { "" }
        ),
    );
    match (&res.certificate, &r.certificate_not_applicable) {
        (Some(c), _) => l.kv("certificate", c),
        (None, Some(why)) => l.kv("certificate", format!("not applicable: {why}")),
        (None, None) => {}
    }
    if let Some(w) = &res.witness {
        l.raw("witness G:");
        for row in w.row_iter() {
            let cells: Vec<String> = row.iter().map(|x| format!("{x:>11.6}")).collect();
            l.raw(format!("  {}", cells.join(" ")));
        }
    }
    l.0
}
