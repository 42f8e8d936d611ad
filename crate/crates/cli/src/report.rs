use serde::Serialize;

use crate::config::RunConfig;
use crate::input::InputInfo;

/// Envelope shared by every command: enough to rerun it.
#[derive(Serialize)]
pub struct Report<'a, T: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<&'a InputInfo>,
    pub seed: u64,
    pub config: &'a RunConfig,
    pub result: &'a T,
    pub exit_code: u8,
}

pub fn emit<T: Serialize>(
    command: &'static str,
    input: Option<&InputInfo>,
    cfg: &RunConfig,
    result: &T,
    exit_code: u8,
    text: impl FnOnce() -> String,
) {
    let mut out = String::new();
    if cfg.json {
        let r = Report { tool: "sktlab", version: env!("CARGO_PKG_VERSION"), command, input, seed: cfg.seed, config: cfg, result, exit_code };
        out = serde_json::to_string_pretty(&r).expect("report serializes");
        out.push('\n');
    } else {
        if let Some(i) = input {
            out.push_str(&format!("input      {} (sha256 {})\n", i.source, i.sha256));
        }
        let t = &cfg.tolerances;
        out.push_str(&format!(
            "config     seed {} | tol exact {:e} derived {:e} gate {:e} rank {:e}/{:e}\n",
            cfg.seed, t.exact, t.derived, t.gate, t.rank_relative, t.rank_absolute
        ));
        out.push_str(&text());
    }
    write_stdout(&out);
}

/// Writes to stdout; a closed pipe (`| head`) is not an error.
pub fn write_stdout(s: &str) {
    use std::io::Write;
    let mut h = std::io::stdout().lock();
    let _ = h.write_all(s.as_bytes()).and_then(|_| h.flush());
}

/// `label  value` lines with a fixed label column.
pub struct Lines(pub String);

impl Lines {
    pub fn new() -> Self {
        Self(String::new())
    }

    pub fn kv(&mut self, label: &str, value: impl std::fmt::Display) {
        self.0.push_str(&format!("{label:<22} {value}\n"));
    }

    pub fn raw(&mut self, line: impl AsRef<str>) {
        self.0.push_str(line.as_ref());
        self.0.push('\n');
    }
}

pub fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

pub fn sci(x: f64) -> String {
    format!("{x:.3e}")
}
