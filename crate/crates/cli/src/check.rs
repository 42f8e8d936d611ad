use serde::Serialize;
use sktlab::complex;
use sktlab::feasibility::{theorem_certificate, CertificatePremises};
use sktlab::hermitian::{
    astheno_residual, bismut_torsion, center_via_torsion, pluriclosed_report, skl_normal_form, skl_residuals,
    CanonicalSklData, Metric, NormalForm, SklResiduals,
};
use sktlab::lie::Nilpotency;
use sktlab::{Error, Result};

use crate::config::RunConfig;
use crate::input::Loaded;
use crate::report::{sci, yes_no, Lines};

#[derive(Serialize)]
pub struct Residual {
    pub residual: f64,
    pub holds: bool,
}

#[derive(Serialize)]
pub struct Pluriclosed {
    pub residual: f64,
    pub quadruple: Option<f64>,
    pub route_gap: Option<f64>,
    pub holds: bool,
}

#[derive(Serialize)]
pub struct Skl {
    #[serde(flatten)]
    pub residuals: SklResiduals,
    pub holds: bool,
}

#[derive(Serialize)]
pub struct Center {
    pub center_dim: usize,
    pub torsion_dim: usize,
    pub principal_angle_sin: f64,
}

#[derive(Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum NormalFormReport {
    Found(CanonicalSklData),
    NotFound { reason: String },
}

#[derive(Serialize)]
pub struct Certificate {
    pub applies: bool,
    pub text: String,
}

#[derive(Serialize)]
pub struct Expectation {
    pub name: &'static str,
    pub expected: serde_json::Value,
    pub observed: serde_json::Value,
    pub met: bool,
}

#[derive(Serialize)]
pub struct CheckResult {
    pub dim: usize,
    pub jacobi_residual: f64,
    pub unimodularity_defect: f64,
    pub unimodular: bool,
    pub nilpotency: Nilpotency,
    pub solvability_step: Option<usize>,
    pub nijenhuis_residual: f64,
    pub integrable: bool,
    pub abelian_residual: f64,
    pub abelian_j: bool,
    pub metric_source: &'static str,
    pub hermitian_residual: f64,
    pub torsion_max: Option<f64>,
    pub kahler: Option<bool>,
    pub pluriclosed: Option<Pluriclosed>,
    pub astheno: Option<Residual>,
    pub skl: Option<Skl>,
    pub center: Option<Center>,
    pub normal_form: Option<NormalFormReport>,
    pub certificate: Certificate,
    pub mode: String,
    pub verdict: Option<bool>,
    pub expectations: Vec<Expectation>,
    pub passed: bool,
}

pub fn run(input: &Loaded, cfg: &RunConfig) -> Result<CheckResult> {
    let tol = &cfg.tolerances;
    let lie = &input.structure.lie;
    let j = &input.structure.j;
    let (g, metric_source) = match &input.structure.metric {
        Some(g) => (g.clone(), "input"),
        None => (Metric::hermitianize(&sktlab::DMatrix::identity(lie.dim(), lie.dim()), j)?, "default (J-averaged identity)"),
    };
    g.check_hermitian(j)?;

    let nijenhuis = complex::nijenhuis_residual(lie, j)?;
    let integrable = nijenhuis < tol.exact;
    let abelian_residual = complex::abelian_residual(lie, j)?;
    let abelian = abelian_residual < tol.exact;
    let defect = lie.unimodularity_defect();
    let nilpotency = lie.nilpotency_step();

    let mut r = CheckResult {
        dim: lie.dim(),
        jacobi_residual: lie.jacobi_residual(),
        unimodularity_defect: defect,
        unimodular: defect < tol.exact,
        nilpotency,
        solvability_step: lie.solvability_step(),
        nijenhuis_residual: nijenhuis,
        integrable,
        abelian_residual,
        abelian_j: abelian,
        metric_source,
        hermitian_residual: g.hermitian_residual(j),
        torsion_max: None,
        kahler: None,
        pluriclosed: None,
        astheno: None,
        skl: None,
        center: None,
        normal_form: None,
        certificate: Certificate { applies: false, text: String::new() },
        mode: cfg.mode.clone(),
        verdict: None,
        expectations: Vec::new(),
        passed: true,
    };

    let premises = CertificatePremises::measure(lie, j)?;
    r.certificate = match theorem_certificate(lie, j)? {
        Some(text) => Certificate { applies: true, text },
        None => Certificate {
            applies: false,
            text: format!("not applicable: {}", premises.not_applicable_reason().unwrap_or_default()),
        },
    };

    if integrable {
        let t = bismut_torsion(lie, j, &g)?.max_norm();
        r.torsion_max = Some(t);
        r.kahler = Some(t < tol.gate);
        let pc = pluriclosed_report(lie, j, &g)?;
        let pc_holds = pc.ddc < tol.gate;
        r.pluriclosed = Some(Pluriclosed { residual: pc.ddc, quadruple: pc.quadruple, route_gap: pc.route_gap, holds: pc_holds });
        if j.complex_dim() >= 3 {
            let a = astheno_residual(lie, j, &g)?;
            r.astheno = Some(Residual { residual: a, holds: a < tol.gate });
        }
        let skl = skl_residuals(lie, j, &g)?;
        r.skl = Some(Skl { residuals: skl, holds: skl.is_skl(tol.gate) });
        if abelian && pc_holds {
            let c = center_via_torsion(lie, j, &g)?;
            let z = lie.center();
            r.center = Some(Center {
                center_dim: z.dim(),
                torsion_dim: c.dim(),
                principal_angle_sin: c.max_principal_angle_sin(&z).unwrap_or(1.0),
            });
            let center = r.center.as_ref().expect("just set");
            if center.center_dim != center.torsion_dim || center.principal_angle_sin > tol.derived {
                return Err(Error::Inconsistency(format!(
                    "center has dim {} but {{x : [x,Jx] = 0}} has dim {} (sin angle {:.3e}) under a pluriclosed metric with abelian J",
                    center.center_dim, center.torsion_dim, center.principal_angle_sin
                )));
            }
            if nilpotency.at_most_two_step() {
                r.normal_form = Some(match skl_normal_form(lie, j, &g)? {
                    NormalForm::Found(d) => NormalFormReport::Found(d),
                    NormalForm::NotFound(reason) => NormalFormReport::NotFound { reason },
                });
            }
        }
    }

    r.verdict = match cfg.mode.as_str() {
        "pluriclosed" => r.pluriclosed.as_ref().map(|p| p.holds),
        "astheno" => r.astheno.as_ref().map(|a| a.holds),
        _ => r.skl.as_ref().map(|s| s.holds),
    };
    r.expectations = expectations(input, &r);
    r.passed = r.expectations.iter().all(|e| e.met);
    Ok(r)
}

fn expectations(input: &Loaded, r: &CheckResult) -> Vec<Expectation> {
    let e = &input.expected;
    let mut out = Vec::new();
    let mut push = |name: &'static str, expected: serde_json::Value, observed: serde_json::Value| {
        let met = expected == observed;
        out.push(Expectation { name, expected, observed, met });
    };
    let j = |v: Option<bool>| serde_json::json!(v);
    if let Some(s) = e.step {
        push("step", serde_json::json!(s), serde_json::json!(r.nilpotency));
    }
    if let Some(v) = e.unimodular {
        push("unimodular", j(Some(v)), j(Some(r.unimodular)));
    }
    if let Some(v) = e.integrable {
        push("integrable", j(Some(v)), j(Some(r.integrable)));
    }
    if let Some(v) = e.abelian_j {
        push("abelian_j", j(Some(v)), j(Some(r.abelian_j)));
    }
    if let Some(v) = e.kahler {
        push("kahler", j(Some(v)), j(r.kahler));
    }
    if let Some(v) = e.pluriclosed {
        push("pluriclosed", j(Some(v)), j(r.pluriclosed.as_ref().map(|p| p.holds)));
    }
    if let Some(v) = e.astheno {
        push("astheno", j(Some(v)), j(r.astheno.as_ref().map(|a| a.holds)));
    }
    if let Some(v) = e.skl {
        push("skl", j(Some(v)), j(r.skl.as_ref().map(|s| s.holds)));
    }
    out
}

pub fn render(r: &CheckResult) -> String {
    let mut l = Lines::new();
    l.kv("dimension", r.dim);
    l.kv("jacobi residual", sci(r.jacobi_residual));
    l.kv("unimodular", format!("{} (max |tr ad| {})", yes_no(r.unimodular), sci(r.unimodularity_defect)));
    l.kv(
        "nilpotency",
        match r.nilpotency {
            Nilpotency::Step(s) => format!("step {s}"),
            Nilpotency::NotNilpotent => "not nilpotent".into(),
        },
    );
    l.kv("solvable", r.solvability_step.map_or("no".into(), |s| format!("step {s}")));
    l.kv("J integrable", format!("{} (Nijenhuis {})", yes_no(r.integrable), sci(r.nijenhuis_residual)));
    l.kv("J abelian", format!("{} (residual {})", yes_no(r.abelian_j), sci(r.abelian_residual)));
    l.kv("metric", format!("{} (Hermitian residual {})", r.metric_source, sci(r.hermitian_residual)));
    if let (Some(t), Some(k)) = (r.torsion_max, r.kahler) {
        l.kv("Bismut torsion", format!("max {} (Kähler: {})", sci(t), yes_no(k)));
    }
    if let Some(p) = &r.pluriclosed {
        let mut s = format!("{} (d J dω {})", yes_no(p.holds), sci(p.residual));
        if let (Some(q), Some(g)) = (p.quadruple, p.route_gap) {
            s.push_str(&format!(", quadruple {}, route gap {}", sci(q), sci(g)));
        }
        l.kv("pluriclosed", s);
    }
    if let Some(a) = &r.astheno {
        l.kv("astheno-Kähler", format!("{} (∂∂̄ωⁿ⁻² {})", yes_no(a.holds), sci(a.residual)));
    }
    if let Some(s) = &r.skl {
        let x = &s.residuals;
        l.kv(
            "SKL",
            format!(
                "{} (Bianchi {}, type {}, ∇T {}, pluriclosed {}; sides agree: {})",
                yes_no(s.holds),
                sci(x.bianchi),
                sci(x.type_condition),
                sci(x.nabla_torsion),
                sci(x.pluriclosed),
                yes_no(x.consistent)
            ),
        );
    }
    if let Some(c) = &r.center {
        l.kv(
            "center",
            format!("dim {} = dim {{x : [x,Jx] = 0}} {} (sin angle {})", c.center_dim, c.torsion_dim, sci(c.principal_angle_sin)),
        );
    }
    match &r.normal_form {
        Some(NormalFormReport::Found(d)) => {
            let ls: Vec<String> = d.lambdas.iter().map(|x| format!("{x:.6}")).collect();
            l.kv("normal form", format!("(n, r, s) = ({}, {}, {}), λ = [{}]", d.n, d.r, d.s, ls.join(", ")));
        }
        Some(NormalFormReport::NotFound { reason }) => l.kv("normal form", format!("not found: {reason}")),
        None => {}
    }
    l.kv("certificate", &r.certificate.text);
    if let Some(v) = r.verdict {
        l.kv(&format!("verdict ({})", r.mode), yes_no(v));
    }
    for e in &r.expectations {
        l.kv(
            &format!("expect {}", e.name),
            format!("{} (declared {}, observed {})", if e.met { "ok" } else { "MISMATCH" }, e.expected, e.observed),
        );
    }
    l.kv("result", if r.passed { "PASS" } else { "FAIL" });
    l.0
}
