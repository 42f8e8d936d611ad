use std::path::Path;

use serde::Serialize;
use sktlab::flow::{gnuplot_script, integrate, singular_time_estimate, FlowConfig, Termination};
use sktlab::hermitian::{pluriclosed_residual, skl_normal_form, skl_residuals, Metric, NormalForm};
use sktlab::{DMatrix, Error, Result};

use crate::config::RunConfig;
use crate::input::Loaded;
use crate::report::{sci, yes_no, Lines};

#[derive(Serialize)]
pub struct FlowResult {
    pub steps: usize,
    pub samples: usize,
    pub termination: Termination,
    pub singular: bool,
    pub t_final: f64,
    pub initially_skl: bool,
    pub reference_basis: &'static str,
    pub max_pluriclosed: f64,
    pub max_skl: f64,
    pub max_off_diagonal: f64,
    pub initial_off_diagonal: f64,
    pub min_eigenvalue_final: f64,
    pub trace_initial: f64,
    pub trace_final: f64,
    pub singular_time_estimate: Option<f64>,
    #[serde(with = "sktlab::io::matrix_rows")]
    pub metric_final: DMatrix<f64>,
    pub pluriclosed_preserved: bool,
    pub skl_preserved: Option<bool>,
    pub diagonal_preserved: Option<bool>,
    pub csv: Option<String>,
    pub gnuplot: Option<String>,
    pub passed: bool,
}

pub fn run(input: &Loaded, cfg: &RunConfig) -> Result<FlowResult> {
    let tol = &cfg.tolerances;
    let lie = &input.structure.lie;
    let j = &input.structure.j;
    let g0 = match &input.structure.metric {
        Some(g) => g.clone(),
        None => Metric::identity(lie.dim()),
    };
    g0.check_hermitian(j)?;
    let pc = pluriclosed_residual(lie, j, &g0)?;
    if pc >= tol.gate {
        return Err(Error::NotPluriclosed(pc));
    }
    let initially_skl = skl_residuals(lie, j, &g0)?.is_skl(tol.gate);
    let (basis, reference_basis) = if initially_skl && lie.nilpotency_step().at_most_two_step() {
        match skl_normal_form(lie, j, &g0) {
            Ok(NormalForm::Found(d)) => (Some(d.basis_change), "normal form"),
            _ => (None, "identity"),
        }
    } else {
        (None, "identity")
    };
    let fc = FlowConfig {
        t_end: cfg.t_end,
        dt: cfg.dt,
        sample_every: cfg.sample_every,
        skl_diagnostics: true,
        reference_basis: basis,
        ..FlowConfig::default()
    };
    let trace = integrate(lie, j, &g0, &fc)?;

    let (csv, gnuplot) = match &cfg.csv {
        Some(path) => {
            let path = Path::new(path);
            write(path, &trace.to_csv())?;
            let gp = path.with_extension("gp");
            write(&gp, &gnuplot_script(&path.display().to_string(), lie.dim()))?;
            (Some(path.display().to_string()), Some(gp.display().to_string()))
        }
        None => (None, None),
    };

    let first = trace.samples.first().expect("initial sample");
    let last = trace.samples.last().expect("final sample");
    let max_pluriclosed = trace.max_pluriclosed();
    let max_skl = trace.max_skl();
    let max_off = trace.max_off_diagonal();
    // residuals scale with the curvature, which blows up as the metric degenerates
    let scale = trace.samples.iter().map(|s| 1.0 / s.min_eigenvalue.max(f64::MIN_POSITIVE)).fold(1.0, f64::max);
    let pluriclosed_preserved = max_pluriclosed < tol.gate * scale;
    let skl_preserved = initially_skl.then_some(max_skl < tol.gate * scale);
    let diagonal_preserved = (initially_skl && first.off_diagonal < tol.gate).then_some(max_off < tol.gate);
    let passed = pluriclosed_preserved && skl_preserved.unwrap_or(true) && diagonal_preserved.unwrap_or(true);
    Ok(FlowResult {
        steps: trace.steps,
        samples: trace.samples.len(),
        termination: trace.termination,
        singular: trace.termination == Termination::Singular,
        t_final: last.t,
        initially_skl,
        reference_basis,
        max_pluriclosed,
        max_skl,
        max_off_diagonal: max_off,
        initial_off_diagonal: first.off_diagonal,
        min_eigenvalue_final: last.min_eigenvalue,
        trace_initial: first.metric.trace(),
        trace_final: last.metric.trace(),
        singular_time_estimate: singular_time_estimate(&trace),
        metric_final: last.metric.clone(),
        pluriclosed_preserved,
        skl_preserved,
        diagonal_preserved,
        csv,
        gnuplot,
        passed,
    })
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::InvalidParameters(format!("cannot write {}: {e}", path.display())))
}

pub fn render(r: &FlowResult) -> String {
    let mut l = Lines::new();
    l.kv("steps", format!("{} ({} samples), t = {:.6}", r.steps, r.samples, r.t_final));
    l.kv(
        "termination",
        if r.singular { "metric degenerated before t_end (singular)" } else { "completed" },
    );
    l.kv("pluriclosed", format!("max residual {} (preserved: {})", sci(r.max_pluriclosed), yes_no(r.pluriclosed_preserved)));
    if let Some(p) = r.skl_preserved {
        l.kv("SKL", format!("max residual {} (preserved: {})", sci(r.max_skl), yes_no(p)));
    } else {
        l.kv("SKL", format!("not SKL at t = 0; max residual {}", sci(r.max_skl)));
    }
    let diag = format!("max off-diagonal {} in the {} basis", sci(r.max_off_diagonal), r.reference_basis);
    match r.diagonal_preserved {
        Some(p) => l.kv("diagonal", format!("{diag} (preserved: {})", yes_no(p))),
        None => l.kv("diagonal", diag),
    }
    l.kv("trace", format!("{:.9} -> {:.9}", r.trace_initial, r.trace_final));
    l.kv("min eigenvalue", format!("{:.6e} at the end", r.min_eigenvalue_final));
    l.kv("singular time", r.singular_time_estimate.map_or("no estimate (not degenerating)".into(), |t| format!("≈ {t:.6}")));
    if let (Some(c), Some(g)) = (&r.csv, &r.gnuplot) {
        l.kv("csv", format!("{c} (plot with: gnuplot -p {g})"));
    }
    l.kv("result", if r.passed { "PASS" } else { "FAIL" });
    l.0
}
