//! Pluriclosed flow `∂_t ω = -(ρ^B)^{(1,1)}` on left-invariant metrics,
//! integrated with fixed-step RK4.

use std::fmt::Write as _;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::complex::ComplexStructure;
use crate::config::GATE;
use crate::error::{Error, Result};
use crate::hermitian::{bismut_ricci, pluriclosed_residual, skl_residuals, Metric, SklResiduals};
use crate::lie::LieAlgebra;
use crate::linalg;

/// `dg/dt` with `ġ(x, y) = ρ^{(1,1)}(Jx, y)`, i.e. `ġ = Jᵀ ρ^{(1,1)}`.
pub fn flow_rhs(lie: &LieAlgebra, j: &ComplexStructure, g: &Metric) -> Result<DMatrix<f64>> {
    let r = pluriclosed_residual(lie, j, g)?;
    if r >= GATE {
        return Err(Error::NotPluriclosed(r));
    }
    rhs_unchecked(lie, j, g)
}

fn rhs_unchecked(lie: &LieAlgebra, j: &ComplexStructure, g: &Metric) -> Result<DMatrix<f64>> {
    let rho = bismut_ricci(lie, j, g)?;
    let rho11 = rho.bidegree_project(j, 1, 1)?.real_part();
    let m = crate::hermitian::two_form_matrix(&rho11);
    Ok(linalg::symmetrize(&(j.matrix().transpose() * m)))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FlowConfig {
    pub t_end: f64,
    pub dt: f64,
    /// Record a sample every `sample_every` steps (the final state is always
    /// recorded).
    pub sample_every: usize,
    /// Stop when the smallest metric eigenvalue drops below this.
    pub min_eigenvalue_floor: f64,
    /// Bound on the step-halving local error estimate at each sample.
    pub local_error_bound: f64,
    /// Compute SKL residuals at every sample (curvature is the costly part).
    pub skl_diagnostics: bool,
    /// Columns form the basis in which diagonality is measured (identity if
    /// absent).
    #[serde(default, with = "crate::io::optional_matrix_rows")]
    pub reference_basis: Option<DMatrix<f64>>,
}

impl Default for FlowConfig {
    fn default() -> Self {
        Self {
            t_end: 1.0,
            dt: 1e-3,
            sample_every: 100,
            min_eigenvalue_floor: 1e-3,
            local_error_bound: 1e-8,
            skl_diagnostics: true,
            reference_basis: None,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FlowSample {
    pub t: f64,
    #[serde(with = "crate::io::matrix_rows")]
    pub metric: DMatrix<f64>,
    pub pluriclosed: f64,
    pub skl: Option<SklResiduals>,
    pub min_eigenvalue: f64,
    pub off_diagonal: f64,
    pub local_error: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Completed,
    /// The metric degenerated (smallest eigenvalue below the floor).
    Singular,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FlowTrace {
    pub samples: Vec<FlowSample>,
    pub termination: Termination,
    pub steps: usize,
}

impl FlowTrace {
    pub fn max_pluriclosed(&self) -> f64 {
        self.samples.iter().map(|s| s.pluriclosed).fold(0.0, f64::max)
    }

    pub fn max_skl(&self) -> f64 {
        self.samples.iter().filter_map(|s| s.skl.map(|r| r.max())).fold(0.0, f64::max)
    }

    pub fn max_off_diagonal(&self) -> f64 {
        self.samples.iter().map(|s| s.off_diagonal).fold(0.0, f64::max)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let dim = self.samples.first().map_or(0, |s| s.metric.nrows());
        out.push('t');
        for a in 0..dim {
            for b in 0..=a {
                let _ = write!(out, ",g_{a}_{b}");
            }
        }
        out.push_str(",pluriclosed,bianchi,type,nabla_torsion,min_eigenvalue,off_diagonal,local_error\n");
        for s in &self.samples {
            let _ = write!(out, "{:e}", s.t);
            for a in 0..dim {
                for b in 0..=a {
                    let _ = write!(out, ",{:e}", s.metric[(a, b)]);
                }
            }
            let (bi, ty, nt) = s.skl.map_or((f64::NAN, f64::NAN, f64::NAN), |r| {
                (r.bianchi, r.type_condition, r.nabla_torsion)
            });
            let _ = writeln!(
                out,
                ",{:e},{:e},{:e},{:e},{:e},{:e},{:e}",
                s.pluriclosed, bi, ty, nt, s.min_eigenvalue, s.off_diagonal, s.local_error
            );
        }
        out
    }
}

fn rk4_step(lie: &LieAlgebra, j: &ComplexStructure, g: &DMatrix<f64>, h: f64) -> Result<DMatrix<f64>> {
    let f = |m: &DMatrix<f64>| -> Result<DMatrix<f64>> { rhs_unchecked(lie, j, &Metric::new(m.clone())?) };
    let k1 = f(g)?;
    let k2 = f(&(g + &k1 * (h / 2.0)))?;
    let k3 = f(&(g + &k2 * (h / 2.0)))?;
    let k4 = f(&(g + &k3 * h))?;
    Ok(g + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0))
}

/// One RK4 step, or `None` if a stage or the result is not positive definite.
fn step_in_cone(lie: &LieAlgebra, j: &ComplexStructure, g: &DMatrix<f64>, h: f64) -> Result<Option<DMatrix<f64>>> {
    let next = match rk4_step(lie, j, g, h) {
        Ok(m) => linalg::symmetrize(&m),
        Err(Error::InvalidMetric(_)) => return Ok(None),
        Err(e) => return Err(e),
    };
    match Metric::new(next.clone()) {
        Ok(_) => Ok(Some(next)),
        Err(Error::InvalidMetric(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

fn off_diagonal(g: &DMatrix<f64>, basis: Option<&DMatrix<f64>>) -> f64 {
    let m = match basis {
        Some(p) => p.transpose() * g * p,
        None => g.clone(),
    };
    let mut worst: f64 = 0.0;
    for a in 0..m.nrows() {
        for b in 0..m.ncols() {
            if a != b {
                worst = worst.max(m[(a, b)].abs());
            }
        }
    }
    worst
}

pub fn integrate(lie: &LieAlgebra, j: &ComplexStructure, g0: &Metric, cfg: &FlowConfig) -> Result<FlowTrace> {
    if !(cfg.dt > 0.0 && cfg.t_end >= 0.0 && cfg.sample_every > 0) {
        return Err(Error::InvalidParameters("flow needs dt > 0, t_end >= 0, sample_every > 0".into()));
    }
    g0.check_hermitian(j)?;
    let r0 = pluriclosed_residual(lie, j, g0)?;
    if r0 >= GATE {
        return Err(Error::NotPluriclosed(r0));
    }
    let total = (cfg.t_end / cfg.dt).round() as usize;
    let mut g = g0.matrix().clone();
    let mut samples = Vec::new();
    let mut termination = Termination::Completed;
    let mut steps = 0;
    loop {
        let t = steps as f64 * cfg.dt;
        let metric = Metric::new(g.clone())?;
        let min_eig = metric.min_eigenvalue();
        let next = if steps < total && min_eig >= cfg.min_eigenvalue_floor {
            step_in_cone(lie, j, &g, cfg.dt)?
        } else {
            None
        };
        // leaving the positive cone within one step counts as reaching the singularity
        let singular = min_eig < cfg.min_eigenvalue_floor || (steps < total && next.is_none());
        if steps % cfg.sample_every == 0 || steps == total || singular {
            samples.push(sample(lie, j, &metric, t, cfg, singular)?);
        }
        if singular {
            termination = Termination::Singular;
            break;
        }
        match next {
            Some(m) => g = m,
            None => break,
        }
        steps += 1;
    }
    Ok(FlowTrace { samples, termination, steps })
}

fn sample(lie: &LieAlgebra, j: &ComplexStructure, g: &Metric, t: f64, cfg: &FlowConfig, singular: bool) -> Result<FlowSample> {
    let pc = pluriclosed_residual(lie, j, g)?;
    if pc >= GATE {
        return Err(Error::Flow(format!("pluriclosed residual {pc:.3e} at t = {t}")));
    }
    let gm = g.matrix();
    let local_error = match (step_in_cone(lie, j, gm, cfg.dt)?, step_in_cone(lie, j, gm, cfg.dt / 2.0)?) {
        (Some(full), Some(h1)) => match step_in_cone(lie, j, &h1, cfg.dt / 2.0)? {
            Some(half) => linalg::max_abs(&(full - half)),
            None => f64::INFINITY,
        },
        _ => f64::INFINITY,
    };
    // at the singular end the error estimate is recorded, not enforced
    if local_error > cfg.local_error_bound && !singular {
        return Err(Error::Flow(format!("step rejected at t = {t}: local error {local_error:.3e}")));
    }
    Ok(FlowSample {
        t,
        metric: gm.clone(),
        pluriclosed: pc,
        skl: if cfg.skl_diagnostics { Some(skl_residuals(lie, j, g)?) } else { None },
        min_eigenvalue: g.min_eigenvalue(),
        off_diagonal: off_diagonal(gm, cfg.reference_basis.as_ref()),
        local_error,
    })
}

/// Root of the least-squares line through `(t, λ_min²)`, when it decreases.
pub fn singular_time_estimate(trace: &FlowTrace) -> Option<f64> {
    let pts: Vec<(f64, f64)> = trace.samples.iter().map(|s| (s.t, s.min_eigenvalue.powi(2))).collect();
    if pts.len() < 3 {
        return None;
    }
    let k = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mt).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    if slope >= -1e-12 * my.abs().max(1.0) {
        return None;
    }
    Some(mt - my / slope)
}

/// A gnuplot script plotting the metric entries and residuals of a CSV trace.
pub fn gnuplot_script(csv_path: &str, dim: usize) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "set datafile separator ','");
    let _ = writeln!(s, "set key autotitle columnhead");
    let _ = writeln!(s, "set xlabel 't'");
    let _ = writeln!(s, "set multiplot layout 2,1");
    let _ = write!(s, "plot");
    let mut col = 2;
    let mut first = true;
    for a in 0..dim {
        for _ in 0..=a {
            let _ = write!(s, "{} '{csv_path}' using 1:{col} with lines", if first { "" } else { "," });
            first = false;
            col += 1;
        }
    }
    let _ = writeln!(s);
    let _ = writeln!(s, "set logscale y");
    let _ = writeln!(
        s,
        "plot '{csv_path}' using 1:{} with lines, '' using 1:{} with lines",
        col,
        col + 4
    );
    let _ = writeln!(s, "unset multiplot");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    #[test]
    fn kodaira_thurston_velocity() {
        let kt = catalog::kt(1.0).unwrap();
        let v = flow_rhs(kt.lie(), kt.j(), kt.metric().unwrap()).unwrap();
        let mut expect = DMatrix::zeros(4, 4);
        expect[(0, 0)] = -0.5;
        expect[(2, 2)] = -0.5;
        assert!(linalg::max_abs(&(v - expect)) < 1e-12);
    }

    #[test]
    fn abelian_flow_is_stationary() {
        let a = catalog::abelian(2).unwrap();
        let g0 = crate::sweep::random_hermitian_metric(a.j(), 11).unwrap();
        let cfg = FlowConfig { t_end: 0.5, dt: 0.05, sample_every: 2, ..FlowConfig::default() };
        let trace = integrate(a.lie(), a.j(), &g0, &cfg).unwrap();
        assert_eq!(trace.termination, Termination::Completed);
        assert_eq!(trace.steps, 10);
        for s in &trace.samples {
            assert!(linalg::max_abs(&(&s.metric - g0.matrix())) < 1e-14);
        }
        assert_eq!(singular_time_estimate(&trace), None);
    }

    #[test]
    fn running_past_the_singularity_stops_there() {
        let kt = catalog::kt(1.0).unwrap();
        let cfg = FlowConfig { t_end: 2.0, dt: 1e-2, sample_every: 10, skl_diagnostics: false, ..FlowConfig::default() };
        let trace = integrate(kt.lie(), kt.j(), kt.metric().unwrap(), &cfg).unwrap();
        assert_eq!(trace.termination, Termination::Singular);
        let last = trace.samples.last().unwrap();
        assert!(last.t <= 1.0 + 1e-12 && last.min_eigenvalue > 0.0);
    }

    #[test]
    fn non_pluriclosed_start_is_rejected() {
        let e = catalog::example8(Default::default(), Default::default(), num_complex::Complex64::new(1.0, 0.0)).unwrap();
        let err = flow_rhs(e.lie(), e.j(), e.metric().unwrap()).unwrap_err();
        assert!(matches!(err, Error::NotPluriclosed(_)));
    }

    #[test]
    fn csv_and_script_shapes() {
        let kt = catalog::kt(1.0).unwrap();
        let cfg = FlowConfig { t_end: 0.1, dt: 0.01, sample_every: 5, ..FlowConfig::default() };
        let trace = integrate(kt.lie(), kt.j(), kt.metric().unwrap(), &cfg).unwrap();
        let csv = trace.to_csv();
        let mut lines = csv.lines();
        let header: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(header.len(), 1 + 10 + 7);
        for line in lines {
            assert_eq!(line.split(',').count(), header.len());
        }
        assert!(trace.samples.last().unwrap().metric[(0, 0)] < 1.0);
        let script = gnuplot_script("trace.csv", 4);
        assert!(script.contains("'trace.csv' using 1:2"));
    }
}
