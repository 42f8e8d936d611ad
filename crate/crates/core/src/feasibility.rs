//! Existence of pluriclosed inner products: linear constraints on the Gram
//! matrix, intersected with an eigenvalue floor by Dykstra's alternating
//! projections.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::complex::{self, ComplexStructure};
use crate::config::{EXACT_ZERO, GATE};
use crate::error::{Error, Result};
use crate::exterior::KForm;
use crate::hermitian::{astheno_residual, pluriclosed_residual, require_integrable, Metric};
use crate::lie::{LieAlgebra, Nilpotency};
use crate::linalg;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Pluriclosed,
    Astheno,
}

/// Gram matrices are vectorized over `a <= b` with off-diagonal entries
/// scaled by `√2`, so the Euclidean norm is the Frobenius norm.
#[derive(Clone, Debug)]
pub struct FeasibilityProblem {
    pub dim: usize,
    pub mode: Mode,
    /// One row per J-Hermitian equation.
    pub symmetry_rows: DMatrix<f64>,
    /// One row per nonzero, non-duplicate condition equation.
    pub condition_rows: DMatrix<f64>,
}

impl FeasibilityProblem {
    pub fn vector_len(&self) -> usize {
        self.dim * (self.dim + 1) / 2
    }

    pub fn constraint_count(&self) -> usize {
        self.symmetry_rows.nrows() + self.condition_rows.nrows()
    }

    /// Condition rows applied to a Gram matrix.
    pub fn apply_conditions(&self, g: &DMatrix<f64>) -> DVector<f64> {
        &self.condition_rows * vectorize(g)
    }
}

pub fn vectorize(g: &DMatrix<f64>) -> DVector<f64> {
    let n = g.nrows();
    let mut v = Vec::with_capacity(n * (n + 1) / 2);
    for a in 0..n {
        for b in a..n {
            v.push(if a == b { g[(a, a)] } else { g[(a, b)] * std::f64::consts::SQRT_2 });
        }
    }
    DVector::from_vec(v)
}

pub fn unvectorize(v: &DVector<f64>, n: usize) -> DMatrix<f64> {
    let mut g = DMatrix::zeros(n, n);
    let mut idx = 0;
    for a in 0..n {
        for b in a..n {
            if a == b {
                g[(a, a)] = v[idx];
            } else {
                let x = v[idx] / std::f64::consts::SQRT_2;
                g[(a, b)] = x;
                g[(b, a)] = x;
            }
            idx += 1;
        }
    }
    g
}

/// `d J d ω` for `ω = Jᵀ G`, with no check on `G`: linear in `G`.
pub fn ddc_of_matrix(lie: &LieAlgebra, j: &ComplexStructure, g: &DMatrix<f64>) -> Result<KForm> {
    let w = j.matrix().transpose() * g;
    let omega = KForm::from_real_fn(g.nrows(), 2, |idx| w[(idx[0], idx[1])])?;
    omega.ce_differential(lie)?.j_pullback(j)?.ce_differential(lie)
}

fn prune(rows: Vec<DVector<f64>>) -> Vec<DVector<f64>> {
    let mut out: Vec<DVector<f64>> = Vec::new();
    for r in rows {
        let norm = r.norm();
        if norm < EXACT_ZERO {
            continue;
        }
        let mut u = &r / norm;
        // Fix the sign so that a row and its negative are recognised as equal.
        if let Some(first) = u.iter().find(|x| x.abs() > 1e-12) {
            if *first < 0.0 {
                u = -u;
            }
        }
        if out.iter().all(|o| (o - &u).norm() > 1e-12) {
            out.push(u);
        }
    }
    out
}

fn stack(rows: &[DVector<f64>], cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows.len(), cols, |r, c| rows[r][c])
}

pub fn build_constraints(lie: &LieAlgebra, j: &ComplexStructure, mode: Mode) -> Result<FeasibilityProblem> {
    if lie.dim() != j.dim() {
        return Err(Error::DimensionMismatch { expected: lie.dim(), found: j.dim() });
    }
    require_integrable(lie, j)?;
    if mode == Mode::Astheno && j.complex_dim() != 3 {
        return Err(Error::Unsupported(format!(
            "astheno feasibility is linear only in complex dimension 3 (got {})",
            j.complex_dim()
        )));
    }
    let n = lie.dim();
    let len = n * (n + 1) / 2;
    let basis: Vec<DMatrix<f64>> = (0..len)
        .map(|i| {
            let mut e = DVector::zeros(len);
            e[i] = 1.0;
            unvectorize(&e, n)
        })
        .collect();

    let jm = j.matrix();
    let mut sym_rows = Vec::new();
    let herm: Vec<DMatrix<f64>> = basis.iter().map(|e| jm.transpose() * e * jm - e).collect();
    for a in 0..n {
        for b in a..n {
            sym_rows.push(DVector::from_fn(len, |i, _| herm[i][(a, b)]));
        }
    }

    let images: Vec<KForm> = basis.iter().map(|e| ddc_of_matrix(lie, j, e)).collect::<Result<_>>()?;
    let terms = images.first().map_or(0, |f| f.coefficients().len());
    let mut cond_rows = Vec::new();
    for t in 0..terms {
        cond_rows.push(DVector::from_fn(len, |i, _| images[i].coefficients()[t].re));
        cond_rows.push(DVector::from_fn(len, |i, _| images[i].coefficients()[t].im));
    }
    let sym_rows = prune(sym_rows);
    let cond_rows = prune(cond_rows);
    Ok(FeasibilityProblem {
        dim: n,
        mode,
        symmetry_rows: stack(&sym_rows, len),
        condition_rows: stack(&cond_rows, len),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Feasible,
    InfeasibleHeuristic,
    InfeasibleCertified,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SolverConfig {
    pub max_iterations: usize,
    pub tolerance: f64,
    pub bisection_steps: usize,
    pub feasible_floor: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { max_iterations: 10_000, tolerance: 1e-12, bisection_steps: 40, feasible_floor: 1e-6 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FeasibilityResult {
    pub verdict: Verdict,
    #[serde(with = "crate::io::optional_matrix_rows")]
    pub witness: Option<DMatrix<f64>>,
    pub best_min_eigenvalue: f64,
    pub certificate: Option<String>,
    pub iterations: usize,
    pub projection_runs: usize,
    /// Whether some projection run stopped at the iteration cap.
    pub cap_reached: bool,
}

/// Orthogonal projector data for `{v : A v = b}`.
struct Affine {
    q: DMatrix<f64>,
    b: DVector<f64>,
}

impl Affine {
    fn new(problem: &FeasibilityProblem) -> Self {
        let n = problem.dim;
        let len = problem.vector_len();
        // Trace row: tr(G) = dim.
        let trace = vectorize(&DMatrix::identity(n, n));
        let rows = problem.symmetry_rows.nrows() + problem.condition_rows.nrows() + 1;
        let mut a = DMatrix::zeros(rows, len);
        a.view_mut((0, 0), (problem.symmetry_rows.nrows(), len)).copy_from(&problem.symmetry_rows);
        a.view_mut((problem.symmetry_rows.nrows(), 0), (problem.condition_rows.nrows(), len))
            .copy_from(&problem.condition_rows);
        a.set_row(rows - 1, &trace.transpose());
        let mut rhs = DVector::zeros(rows);
        rhs[rows - 1] = n as f64;
        // Row space from the eigenvectors of AᵀA. nalgebra's SVD loses about
        // 1e-8 of reconstruction accuracy on some of these stacks; the
        // symmetric eigensolver stays at machine precision and the spectrum
        // has a wide gap between kept and dropped directions.
        let eig = SymmetricEigen::new(a.transpose() * &a);
        let lmax = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
        let keep: Vec<usize> = (0..len).filter(|&i| eig.eigenvalues[i] > 1e-12 * lmax.max(1.0)).collect();
        let q = DMatrix::from_fn(keep.len(), len, |r, c| eig.eigenvectors[(c, keep[r])]);
        // b = Q x0 for the least-norm solution x0 = Qᵀ Λ⁻¹ Q Aᵀ rhs
        let atr = a.transpose() * rhs;
        let b = DVector::from_fn(keep.len(), |r, _| q.row(r).transpose().dot(&atr) / eig.eigenvalues[keep[r]]);
        Self { q, b }
    }

    fn project(&self, v: &DVector<f64>) -> DVector<f64> {
        v - self.q.transpose() * (&self.q * v - &self.b)
    }
}

fn floor_project(v: &DVector<f64>, n: usize, floor: f64) -> DVector<f64> {
    let g = unvectorize(v, n);
    let eig = SymmetricEigen::new(g);
    let clipped = eig.eigenvalues.map(|l| l.max(floor));
    let g = &eig.eigenvectors * DMatrix::from_diagonal(&clipped) * eig.eigenvectors.transpose();
    vectorize(&g)
}

struct Run {
    point: DVector<f64>,
    min_eig: f64,
    iterations: usize,
    capped: bool,
}

/// Dykstra between the affine set and `{λ_min >= floor}`; returns the last
/// affine iterate.
fn dykstra(affine: &Affine, n: usize, floor: f64, cfg: &SolverConfig) -> Run {
    let mut x = affine.project(&vectorize(&DMatrix::identity(n, n)));
    let mut p = DVector::zeros(x.len());
    let mut q = DVector::zeros(x.len());
    let mut iterations = 0;
    let mut capped = true;
    while iterations < cfg.max_iterations {
        iterations += 1;
        let y = floor_project(&(&x + &p), n, floor);
        let p_new = &x + &p - &y;
        let x_new = affine.project(&(&y + &q));
        let q_new = &y + &q - &x_new;
        // a fixed point of the whole iteration, not just of x
        let moved = (&x_new - &x).norm() + (&p_new - &p).norm() + (&q_new - &q).norm();
        x = x_new;
        p = p_new;
        q = q_new;
        if moved < cfg.tolerance {
            capped = false;
            break;
        }
    }
    let min_eig = linalg::min_eigenvalue(&unvectorize(&x, n));
    Run { point: x, min_eig, iterations, capped }
}

/// Maximize the eigenvalue floor over the constraint set (`tr G = dim`) by
/// bisection, starting from `G = Id`.
pub fn solve(problem: &FeasibilityProblem, cfg: &SolverConfig) -> FeasibilityResult {
    let n = problem.dim;
    let affine = Affine::new(problem);
    let mut iterations = 0;
    let mut runs = 0;
    let mut capped = false;

    let start = affine.project(&vectorize(&DMatrix::identity(n, n)));
    let start_eig = linalg::min_eigenvalue(&unvectorize(&start, n));
    let mut best_point = start.clone();
    let mut best = start_eig;
    let mut lo = if start_eig >= cfg.feasible_floor { start_eig.min(1.0) } else { 0.0 };
    let mut hi = 1.0;

    if start_eig < cfg.feasible_floor {
        let run = dykstra(&affine, n, cfg.feasible_floor, cfg);
        iterations += run.iterations;
        runs += 1;
        capped |= run.capped;
        if run.min_eig > best {
            best = run.min_eig;
            best_point = run.point.clone();
        }
        if run.min_eig < cfg.feasible_floor * (1.0 - 1e-6) {
            return FeasibilityResult {
                verdict: Verdict::InfeasibleHeuristic,
                witness: None,
                best_min_eigenvalue: best,
                certificate: None,
                iterations,
                projection_runs: runs,
                cap_reached: capped,
            };
        }
        lo = run.min_eig.min(1.0);
    }
    for _ in 0..cfg.bisection_steps {
        if hi - lo < 1e-6 {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let run = dykstra(&affine, n, mid, cfg);
        iterations += run.iterations;
        runs += 1;
        capped |= run.capped;
        if run.min_eig > best {
            best = run.min_eig;
            best_point = run.point.clone();
        }
        if run.min_eig >= mid * (1.0 - 1e-9) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let feasible = best >= cfg.feasible_floor;
    FeasibilityResult {
        verdict: if feasible { Verdict::Feasible } else { Verdict::InfeasibleHeuristic },
        witness: feasible.then(|| linalg::symmetrize(&unvectorize(&best_point, n))),
        best_min_eigenvalue: best,
        certificate: None,
        iterations,
        projection_runs: runs,
        cap_reached: capped,
    }
}

/// Snaps a solver witness onto the `J`-invariant matrices (the projector
/// enforces that only up to its rank cutoff) and re-checks the condition
/// with the geometric code path.
pub fn certify_witness(lie: &LieAlgebra, j: &ComplexStructure, mode: Mode, w: &DMatrix<f64>) -> Result<Metric> {
    let metric = Metric::hermitianize(w, j)?;
    let r = match mode {
        Mode::Pluriclosed => pluriclosed_residual(lie, j, &metric)?,
        Mode::Astheno => astheno_residual(lie, j, &metric)?,
    };
    if r >= GATE {
        return Err(Error::Inconsistency(format!("solver witness has {mode:?} residual {r:.3e}")));
    }
    Ok(metric)
}

/// Solve, then re-check the witness independently; a certificate from the
/// structure theorem overrides the solver.
pub fn decide(lie: &LieAlgebra, j: &ComplexStructure, mode: Mode, cfg: &SolverConfig) -> Result<FeasibilityResult> {
    let problem = build_constraints(lie, j, mode)?;
    let mut result = solve(&problem, cfg);
    if let Some(w) = &result.witness {
        result.witness = Some(certify_witness(lie, j, mode, w)?.matrix().clone());
    }
    if mode == Mode::Pluriclosed {
        if let Some(cert) = theorem_certificate(lie, j)? {
            if result.verdict == Verdict::Feasible {
                return Err(Error::Inconsistency(
                    "solver found a pluriclosed metric on a certified-infeasible structure".into(),
                ));
            }
            result.verdict = Verdict::InfeasibleCertified;
            result.certificate = Some(cert);
        }
    }
    Ok(result)
}

/// The three premises of the step-two certificate, as measured.
#[derive(Clone, Copy, Debug)]
pub struct CertificatePremises {
    pub unimodularity_defect: f64,
    pub abelian_residual: f64,
    pub step: Nilpotency,
}

impl CertificatePremises {
    pub fn measure(lie: &LieAlgebra, j: &ComplexStructure) -> Result<Self> {
        Ok(Self {
            unimodularity_defect: lie.unimodularity_defect(),
            abelian_residual: complex::abelian_residual(lie, j)?,
            step: lie.nilpotency_step(),
        })
    }

    pub fn applies(&self) -> bool {
        self.unimodularity_defect < EXACT_ZERO && self.abelian_residual < EXACT_ZERO && !self.step.at_most_two_step()
    }

    /// Why the certificate does not apply, or `None` when it does.
    pub fn not_applicable_reason(&self) -> Option<String> {
        if self.unimodularity_defect >= EXACT_ZERO {
            Some(format!("not unimodular (max |tr ad| = {:.1e})", self.unimodularity_defect))
        } else if self.abelian_residual >= EXACT_ZERO {
            Some(format!("J not abelian (residual {:.1e})", self.abelian_residual))
        } else if self.step.at_most_two_step() {
            Some("algebra is already nilpotent of step at most 2".into())
        } else {
            None
        }
    }
}

/// Certifies that no pluriclosed inner product exists when the algebra is
/// unimodular, `J` is abelian, and the algebra is not nilpotent of step at
/// most 2. Returns `None` when the premises do not all hold.
pub fn theorem_certificate(lie: &LieAlgebra, j: &ComplexStructure) -> Result<Option<String>> {
    let p = CertificatePremises::measure(lie, j)?;
    if !p.applies() {
        return Ok(None);
    }
    let step_text = match p.step {
        Nilpotency::Step(k) => format!("nilpotent of step {k}"),
        Nilpotency::NotNilpotent => "not nilpotent".to_string(),
    };
    Ok(Some(format!(
        "no pluriclosed inner product: unimodular (max |tr ad| = {:.1e}), \
         J abelian (residual {:.1e}), algebra {step_text}; a unimodular algebra with an \
         abelian complex structure and a pluriclosed inner product is nilpotent of step at most 2",
        p.unimodularity_defect, p.abelian_residual
    )))
}
