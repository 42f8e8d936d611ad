use serde::Serialize;
use sktlab::feasibility::SolverConfig;
use sktlab::{Error, Result, Tolerances};

#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub tolerances: Tolerances,
    pub dt: f64,
    pub t_end: f64,
    pub sample_every: usize,
    pub solver: SolverConfig,
    pub seed: u64,
    pub n: usize,
    pub max_dim: usize,
    pub mode: String,
    pub json: bool,
    pub csv: Option<String>,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        let t = &self.tolerances;
        let positive = [("tolerance", t.exact), ("tolerance", t.derived), ("gate", t.gate), ("dt", self.dt), ("t-end", self.t_end)];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameters(format!("{name} must be positive and finite (got {v})")));
            }
        }
        if self.sample_every == 0 || self.solver.max_iterations == 0 {
            return Err(Error::InvalidParameters("sample stride and iteration cap must be positive".into()));
        }
        Ok(())
    }
}
