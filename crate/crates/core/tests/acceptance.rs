//! Acceptance criteria, one PASS/FAIL line each. Runs without the libtest
//! harness so every line is printed; exits nonzero if any criterion fails.

use std::io::Write;
use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use sktlab::catalog::{self, AsthenoParams, ASTHENO_BOUNDARY, ASTHENO_REFERENCE};
use sktlab::feasibility::{decide, Mode, SolverConfig, Verdict};
use sktlab::flow::{integrate, singular_time_estimate, FlowConfig};
use sktlab::hermitian::{
    astheno_of_form, bismut_ricci, bismut_torsion, center_via_torsion, corollary_identity_residual, ddc_omega,
    skl_normal_form, skl_residuals, skt_quadruple_form, torsion_closed_form, NormalForm,
};
use sktlab::io::Structure;
use sktlab::structeq::{self, ParseError};
use sktlab::sweep::{self, InstanceKind, SweepConfig};
use sktlab::{complex, Metric, Nilpotency};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

const KINDS: [InstanceKind; 3] = [InstanceKind::CanonicalFamily, InstanceKind::TwoStepAbelian, InstanceKind::MutatedThreeStep];

/// Random Hermitian structures with abelian J, dims 4 to 12.
fn random_hermitian_inputs(count: usize, seed: u64) -> Vec<(Structure, Metric)> {
    (0..count)
        .map(|i| {
            let s = sweep::generate(KINDS[i % 3], sweep::instance_seed(seed, i), 12).expect("generator");
            let g = sweep::random_hermitian_metric(&s.j, sweep::instance_seed(seed ^ 0xA5A5, i)).expect("metric");
            (s, g)
        })
        .collect()
}

fn torsion_routes() -> Outcome {
    let inputs = random_hermitian_inputs(100, 1);
    let mut worst: f64 = 0.0;
    let mut dims = (usize::MAX, 0);
    for (s, g) in &inputs {
        let closed = torsion_closed_form(&s.lie, g).unwrap();
        let via_omega = bismut_torsion(&s.lie, &s.j, g).unwrap();
        worst = worst.max(closed.distance(&via_omega).unwrap());
        dims = (dims.0.min(s.lie.dim()), dims.1.max(s.lie.dim()));
    }
    outcome(
        worst < 1e-12,
        format!(
            "100 structures, dims {}..{}: max |closed form - dω(J·,J·,J·)| = {worst:.2e} \
             (sign: this route is +dω(J·,J·,J·) under ω = g(J·,·), dα(x,y) = -α([x,y]))",
            dims.0, dims.1
        ),
    )
}

fn torsion_differential() -> Outcome {
    let inputs = random_hermitian_inputs(100, 1);
    let mut worst: f64 = 0.0;
    for (s, g) in &inputs {
        let dt = ddc_omega(&s.lie, &s.j, g).unwrap();
        let quad = skt_quadruple_form(&s.lie, g).unwrap();
        worst = worst.max(dt.distance(&quad.scale_real(2.0)).unwrap());
    }
    outcome(worst < 1e-12, format!("100 structures: max |dT - 2 quadruple| = {worst:.2e}"))
}

fn pluriclosed_inputs() -> Vec<(Structure, Metric)> {
    let mut out = Vec::new();
    for i in 0..12 {
        let s = sweep::generate(InstanceKind::CanonicalFamily, sweep::instance_seed(3, i), 12).unwrap();
        let g = s.metric.clone().unwrap();
        out.push((s, g));
    }
    let mut i = 0;
    while out.len() < 20 && i < 60 {
        let s = sweep::generate(InstanceKind::TwoStepAbelian, sweep::instance_seed(5, i), 10).unwrap();
        i += 1;
        let r = decide(&s.lie, &s.j, Mode::Pluriclosed, &SolverConfig { bisection_steps: 0, ..Default::default() }).unwrap();
        if let Some(w) = r.witness {
            out.push((s, Metric::new(w).unwrap()));
        }
    }
    out
}

fn corollary_equalities() -> Outcome {
    let inputs = pluriclosed_inputs();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut identity: f64 = 0.0;
    let mut angle: f64 = 0.0;
    let mut pairs = 0;
    for (s, g) in &inputs {
        let n = s.lie.dim();
        for _ in 0..1000 {
            let x = DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
            let y = DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
            identity = identity.max(corollary_identity_residual(&s.lie, &s.j, g, &x, &y).unwrap().abs());
            pairs += 1;
        }
        let via = center_via_torsion(&s.lie, &s.j, g).unwrap();
        match via.max_principal_angle_sin(&s.lie.center()) {
            Some(a) => angle = angle.max(a),
            None => angle = f64::INFINITY,
        }
    }
    outcome(
        identity < 1e-10 && angle < 1e-8,
        format!(
            "{} pluriclosed inputs, {pairs} pairs: max identity residual {identity:.2e}, max principal angle sine vs center {angle:.2e}",
            inputs.len()
        ),
    )
}

fn step_two_sweep() -> Outcome {
    let cfg = SweepConfig::default();
    let t = Instant::now();
    let report = sweep::run(&cfg);
    let cex = report.counterexamples().len();
    let example = report.outcomes.iter().find(|o| o.kind == InstanceKind::Example8);
    let example_ok = example.is_some_and(|o| o.verdict == Verdict::InfeasibleCertified);
    let three_step_solver = report
        .outcomes
        .iter()
        .filter(|o| o.step.is_none_or(|k| k > 2))
        .map(|o| o.solver_verdict)
        .filter(|v| *v == Verdict::Feasible)
        .count();
    let max_dim = report.outcomes.iter().map(|o| o.dim).max().unwrap_or(0);
    outcome(
        cex == 0 && report.failures.is_empty() && example_ok && three_step_solver == 0,
        format!(
            "seed {}, N = {} (+ example), dims <= {max_dim}: {cex} counterexamples, {} failures, \
             feasible: canonical {} / 2-step {} / 3-step {}, example {:?}, {:.1}s",
            cfg.seed,
            cfg.n,
            report.failures.len(),
            report.count(InstanceKind::CanonicalFamily, Verdict::Feasible),
            report.count(InstanceKind::TwoStepAbelian, Verdict::Feasible),
            report.count(InstanceKind::MutatedThreeStep, Verdict::Feasible),
            example.map(|o| o.verdict),
            t.elapsed().as_secs_f64()
        ),
    )
}

fn sorted(v: &[f64]) -> Vec<f64> {
    let mut v = v.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v
}

fn lambda_gap(found: &[f64], want: &[f64]) -> f64 {
    if found.len() != want.len() {
        return f64::INFINITY;
    }
    sorted(found).iter().zip(sorted(want)).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}

fn skl_characterization() -> Outcome {
    let mut worst_res: f64 = 0.0;
    let mut worst_lambda: f64 = 0.0;
    let mut entries = 0;
    for n in 2..=5 {
        for r in 0..=n {
            for s in 1..=n {
                if !sktlab::CanonicalSklData::parameters_admissible(n, r, s) {
                    continue;
                }
                let lambdas: Vec<f64> = (0..s).map(|k| 0.6 + 0.45 * k as f64).collect();
                let e = catalog::canonical_skl(n, r, s, &lambdas, None).unwrap();
                let g = Metric::identity(2 * n);
                worst_res = worst_res.max(skl_residuals(e.lie(), e.j(), &g).unwrap().max());
                // in the given basis and after a random complex-linear change
                let p = sweep::random_complex_linear(e.j(), (n * 100 + r * 10 + s) as u64);
                let moved = (e.lie().change_basis(&p).unwrap(), e.j().change_basis(&p).unwrap(), g.change_basis(&p).unwrap());
                for (lie, j, g) in [(e.lie().clone(), e.j().clone(), g.clone()), moved] {
                    worst_lambda = worst_lambda.max(match skl_normal_form(&lie, &j, &g).unwrap() {
                        NormalForm::Found(d) => lambda_gap(&d.lambdas, &lambdas),
                        NormalForm::NotFound(_) => f64::INFINITY,
                    });
                }
                entries += 1;
            }
        }
    }
    outcome(
        worst_res < 1e-10 && worst_lambda < 1e-10,
        format!("{entries} canonical entries (n <= 5): max SKL residual {worst_res:.2e}, max λ mismatch {worst_lambda:.2e}"),
    )
}

fn ricci_closed_form() -> Outcome {
    let mut worst: f64 = 0.0;
    for k in 0..20 {
        let lambda = 0.4 + 0.15 * k as f64;
        let a = 0.5 + 0.2 * ((7 * k) % 20) as f64;
        let e = catalog::kt(lambda).unwrap();
        let g = Metric::diagonal(&[a, 1.0, a, 1.0]).unwrap();
        let rho = bismut_ricci(e.lie(), e.j(), &g).unwrap();
        let want = lambda * lambda / (2.0 * a);
        worst = worst.max((rho.eval_basis(&[0, 2]).re - want).abs() / want);
    }
    outcome(worst < 1e-10, format!("20 (λ, a) pairs: max relative error of ρ(e₁,e₃) vs λ²/(2a) = {worst:.2e}"))
}

fn skl_flows() -> Outcome {
    let runs = [(catalog::canonical_skl(2, 1, 1, &[1.0], None).unwrap(), 1.0), (catalog::canonical_skl(3, 2, 2, &[1.0, 2.0], None).unwrap(), 0.25)];
    let mut skl: f64 = 0.0;
    let mut off: f64 = 0.0;
    let mut completed = true;
    for (e, singular) in &runs {
        let cfg = FlowConfig { t_end: 0.9 * singular, dt: 1e-4, sample_every: 250, ..Default::default() };
        let trace = integrate(e.lie(), e.j(), e.metric().unwrap(), &cfg).unwrap();
        completed &= trace.termination == sktlab::flow::Termination::Completed;
        skl = skl.max(trace.max_skl());
        off = off.max(trace.max_off_diagonal());
    }
    outcome(
        completed && skl < 1e-7 && off < 1e-9,
        format!("KT(1) to t = 0.9, (3,2,2,(1,2)) to t = 0.225: max SKL residual {skl:.2e}, max off-diagonal {off:.2e}"),
    )
}

fn kt_error(dt: f64, t_end: f64) -> f64 {
    let e = catalog::kt(1.0).unwrap();
    let cfg = FlowConfig {
        t_end,
        dt,
        sample_every: 1,
        skl_diagnostics: false,
        local_error_bound: f64::INFINITY,
        ..Default::default()
    };
    let trace = integrate(e.lie(), e.j(), e.metric().unwrap(), &cfg).unwrap();
    trace.samples.iter().map(|s| (s.metric[(0, 0)] - (1.0 - s.t).sqrt()).abs()).fold(0.0, f64::max)
}

fn flow_closed_form() -> Outcome {
    let e = catalog::kt(1.0).unwrap();
    let cfg = FlowConfig { t_end: 0.9, dt: 1e-4, sample_every: 100, skl_diagnostics: false, ..Default::default() };
    let trace = integrate(e.lie(), e.j(), e.metric().unwrap(), &cfg).unwrap();
    let fine = trace.samples.iter().map(|s| (s.metric[(0, 0)] - (1.0 - s.t).sqrt()).abs()).fold(0.0, f64::max);
    // at dt = 1e-4 the error is already at rounding level, so the order is
    // measured where truncation dominates
    let coarse = kt_error(0.01, 0.9);
    let half = kt_error(0.005, 0.9);
    let ratio = coarse / half;
    let mut worst_t: f64 = 0.0;
    for lambda in [1.0, 2.0] {
        let e = catalog::kt(lambda).unwrap();
        let exact = 1.0 / (lambda * lambda);
        let cfg = FlowConfig { t_end: 0.9 * exact, dt: 1e-4, sample_every: 500, skl_diagnostics: false, ..Default::default() };
        let trace = integrate(e.lie(), e.j(), e.metric().unwrap(), &cfg).unwrap();
        let est = singular_time_estimate(&trace).unwrap_or(f64::NAN);
        worst_t = worst_t.max(((est - exact) / exact).abs());
    }
    outcome(
        fine < 1e-6 && (14.0..=18.0).contains(&ratio) && worst_t < 0.02,
        format!(
            "max |a - √(1-t)| = {fine:.2e} at dt = 1e-4; error ratio dt 0.01 → 0.005 = {ratio:.2}; \
             singular time relative error (λ = 1, 2) = {worst_t:.2e}"
        ),
    )
}

fn astheno_example() -> Outcome {
    let e = catalog::example8(Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)).unwrap();
    let step3 = e.lie().nilpotency_step() == Nilpotency::Step(3);
    let abelian = complex::is_abelian(e.lie(), e.j()).unwrap();
    let residual = |p: &AsthenoParams| {
        let omega = catalog::astheno_fundamental_form(p).unwrap();
        astheno_of_form(e.lie(), e.j(), &omega).unwrap().max_norm()
    };
    let search = catalog::astheno_slice_search().unwrap();
    let pd_on_slice = search.best_min_eigenvalue > 1e-9;
    let boundary = residual(&ASTHENO_BOUNDARY);
    let boundary_eig = sktlab::linalg::min_eigenvalue(&catalog::astheno_family_gram(&ASTHENO_BOUNDARY).unwrap());
    let perturbed = residual(&AsthenoParams { x23: Complex64::new(0.0, 0.8), ..ASTHENO_BOUNDARY });
    let reference = residual(&ASTHENO_REFERENCE);
    let pd_residual = if pd_on_slice { residual(&search.best) } else { f64::NAN };
    outcome(
        step3 && abelian && pd_on_slice && pd_residual < 1e-10 && perturbed > 1e-4,
        format!(
            "step 3: {step3}, abelian J: {abelian}; no positive-definite metric found on the slice \
             (best trace-normalized min eigenvalue {:.2e} over {} evaluations; the condition reduces to \
             Cauchy-Schwarz equality, which positive-definite metrics never meet); degenerate boundary point \
             (min eigenvalue {boundary_eig:.1e}) residual {boundary:.2e}; off-slice perturbation {perturbed:.2e}; \
             reference metric {reference:.2e}",
            search.best_min_eigenvalue, search.evaluations
        ),
    )
}

fn malformed_cases() -> Vec<(&'static str, usize, usize)> {
    vec![
        ("dim 2\ndphi1 = phi1^\n", 2, 14),
        ("dim 2\ndphi3 = 0\n", 2, 1),
        ("dim x\n", 1, 5),
        ("dim 2\ndphi1 = (1,2 * phi1^phibar2\n", 2, 14),
        ("dim 2\nparam a = (1,0)\ndphi2 = b*phi1^phibar1\n", 3, 9),
        ("dim 2\ndphi2 = phi1^phibar1 $\n", 2, 22),
        ("", 1, 1),
    ]
}

fn parser() -> Outcome {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/data/example8.seq");
    let text = std::fs::read_to_string(path).unwrap();
    let spec = structeq::parse(&text).unwrap();
    let (lie, _j) = structeq::realify(&spec).unwrap();
    let jacobi = lie.jacobi_residual();
    let emitted = structeq::emit(&spec);
    let reparsed = structeq::parse(&emitted).unwrap();
    let round_trip = reparsed == spec.canonicalize() && structeq::emit(&reparsed) == emitted;

    let mut positioned = 0;
    let cases = malformed_cases();
    let mut mismatched = Vec::new();
    for (src, line, col) in &cases {
        match structeq::parse(src) {
            Err(ParseError { line: l, column: c, .. }) if l == *line && c == *col => positioned += 1,
            other => mismatched.push(format!("{src:?} -> {:?}", other.err())),
        }
    }

    // byte-level mutations of the example file: never panic, always a position
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let alphabet: Vec<char> = "phibar0123456789()*+^=,.-# \ndimparamφ̄∧".chars().collect();
    let mut crashes = 0;
    let mut unpositioned = 0;
    let mutations = 3000;
    for _ in 0..mutations {
        let mut chars: Vec<char> = text.chars().collect();
        for _ in 0..rng.gen_range(1..5) {
            let at = rng.gen_range(0..chars.len());
            match rng.gen_range(0..3) {
                0 => {
                    chars.remove(at);
                }
                1 => chars.insert(at, alphabet[rng.gen_range(0..alphabet.len())]),
                _ => chars[at] = alphabet[rng.gen_range(0..alphabet.len())],
            }
        }
        let mutated: String = chars.into_iter().collect();
        match panic::catch_unwind(AssertUnwindSafe(|| structeq::parse(&mutated))) {
            Err(_) => crashes += 1,
            Ok(Err(e)) if e.line == 0 || e.column == 0 => unpositioned += 1,
            Ok(_) => {}
        }
    }
    let pass = jacobi < 1e-12 && round_trip && mismatched.is_empty() && crashes == 0 && unpositioned == 0;
    let mut detail = format!(
        "realified Jacobi residual {jacobi:.1e}, parse∘emit round trip {round_trip}, \
         {positioned}/{} malformed inputs at the expected position, {mutations} mutations: {crashes} panics, {unpositioned} unpositioned errors",
        cases.len()
    );
    if !mismatched.is_empty() {
        detail.push_str(&format!("; mismatched: {}", mismatched.join("; ")));
    }
    outcome(pass, detail)
}

fn main() -> ExitCode {
    // keep panics from a criterion on its own line
    panic::set_hook(Box::new(|_| {}));
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("torsion two-route agreement", torsion_routes),
        ("dT identity", torsion_differential),
        ("pluriclosed identity and center", corollary_equalities),
        ("step-two sweep", step_two_sweep),
        ("SKL characterization", skl_characterization),
        ("Bismut Ricci closed form", ricci_closed_form),
        ("SKL preserved along the flow", skl_flows),
        ("flow closed form", flow_closed_form),
        ("astheno example", astheno_example),
        ("structure-equation parser", parser),
    ];
    let mut failed = 0;
    let mut err = std::io::stderr().lock();
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let o = panic::catch_unwind(run).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        if !o.pass {
            failed += 1;
        }
        let verdict = if o.pass { "PASS" } else { "FAIL" };
        let _ = writeln!(err, "criterion {:>2} {verdict} [{name}] ({:.1}s) {}", i + 1, t.elapsed().as_secs_f64(), o.detail);
    }
    let _ = writeln!(err, "acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
