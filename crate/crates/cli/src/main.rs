mod catalog;
mod check;
mod config;
mod feasibility;
mod flow;
mod input;
mod report;
mod sweep;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use sktlab::catalog::CatalogOptions;
use sktlab::feasibility::{Mode, SolverConfig};
use sktlab::{Error, Tolerances};

use config::RunConfig;

const SUCCESS: u8 = 0;
const EXPECTATION: u8 = 1;
const INPUT: u8 = 2;
const INTERNAL: u8 = 3;

#[derive(Parser)]
#[command(name = "sktlab", version, about = "Left-invariant Hermitian geometry on Lie algebras")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Print a JSON report instead of text.
    #[arg(long, global = true)]
    json: bool,

    /// Zero-test tolerance.
    #[arg(long, global = true, env = "SKTLAB_TOL")]
    tol: Option<f64>,

    /// Seed recorded in every report and used by the sweep.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Structure, integrability, torsion and curvature conditions.
    Check {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, value_enum, default_value_t = CheckMode::Skl)]
        mode: CheckMode,
    },
    /// Integrate the pluriclosed flow from the input metric.
    Flow {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        #[arg(long, default_value_t = 1.0)]
        t_end: f64,
        /// Record every k-th step.
        #[arg(long, default_value_t = 100)]
        sample_every: usize,
        /// Write the trace here, and a gnuplot script next to it.
        #[arg(long, value_name = "PATH")]
        csv: Option<String>,
    },
    /// Does the structure admit a pluriclosed (or astheno-Kähler) inner product?
    Feasibility {
        #[command(flatten)]
        input: InputArgs,
        #[arg(long, value_enum, default_value_t = CheckMode::Pluriclosed)]
        mode: CheckMode,
        #[arg(long, default_value_t = 10_000)]
        max_iterations: usize,
    },
    /// Randomized search for pluriclosed structures violating the step-two theorem.
    Sweep {
        #[arg(long, default_value_t = 200)]
        n: usize,
        #[arg(long, default_value_t = 12)]
        max_dim: usize,
        /// Leave out the 8-dimensional example.
        #[arg(long)]
        no_example8: bool,
        #[arg(long, default_value_t = 10_000)]
        max_iterations: usize,
    },
    /// List the built-in structures, or print one as a structure file.
    Catalog {
        #[arg(long)]
        catalog: Option<String>,
        #[command(flatten)]
        params: CatalogArgs,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum CheckMode {
    Pluriclosed,
    Astheno,
    Skl,
}

impl CheckMode {
    fn name(self) -> &'static str {
        match self {
            CheckMode::Pluriclosed => "pluriclosed",
            CheckMode::Astheno => "astheno",
            CheckMode::Skl => "skl",
        }
    }
}

#[derive(Args)]
struct InputArgs {
    /// Structure file (JSON or structure equations), or `catalog:NAME`.
    #[arg(long)]
    input: Option<String>,
    /// Catalog entry name.
    #[arg(long)]
    catalog: Option<String>,
    #[command(flatten)]
    params: CatalogArgs,
}

#[derive(Args)]
struct CatalogArgs {
    /// Complex dimension (abelian, canonical_skl).
    #[arg(long = "n")]
    complex_dim: Option<usize>,
    #[arg(long)]
    r: Option<usize>,
    #[arg(long)]
    s: Option<usize>,
    #[arg(long)]
    lambda: Option<f64>,
    /// Comma-separated λ values (canonical_skl).
    #[arg(long, value_delimiter = ',')]
    lambdas: Option<Vec<f64>>,
    #[arg(long = "B11")]
    b11: Option<f64>,
    #[arg(long = "B13")]
    b13: Option<f64>,
    #[arg(long = "D31")]
    d31: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
}

impl CatalogArgs {
    fn options(&self) -> CatalogOptions {
        CatalogOptions {
            n: self.complex_dim,
            r: self.r,
            s: self.s,
            lambda: self.lambda,
            lambdas: self.lambdas.clone(),
            b11: self.b11,
            b13: self.b13,
            d31: self.d31,
            delta: self.delta,
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Inconsistency(_) => INTERNAL,
        Error::NotPluriclosed(_) | Error::Flow(_) | Error::CatalogMismatch { .. } => EXPECTATION,
        _ => INPUT,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut cfg = RunConfig {
        tolerances: match cli.tol {
            Some(t) => Tolerances::default().with_zero(t),
            None => Tolerances::default(),
        },
        dt: 1e-3,
        t_end: 1.0,
        sample_every: 100,
        solver: SolverConfig::default(),
        seed: cli.seed,
        n: 0,
        max_dim: 0,
        mode: String::new(),
        json: cli.json,
        csv: None,
    };
    let json = cli.json;
    match run(cli.command, &mut cfg) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            let code = exit_code(&e);
            eprintln!("error: {e}");
            if json {
                let v = serde_json::json!({ "tool": "sktlab", "error": e.to_string(), "exit_code": code, "seed": cfg.seed });
                report::write_stdout(&(serde_json::to_string_pretty(&v).expect("error report serializes") + "\n"));
            }
            ExitCode::from(code)
        }
    }
}

fn run(command: Command, cfg: &mut RunConfig) -> sktlab::Result<u8> {
    match command {
        Command::Check { input, mode } => {
            cfg.mode = mode.name().into();
            cfg.validate()?;
            let loaded = input::load(input.input.as_deref(), input.catalog.as_deref(), &input.params.options())?;
            let r = check::run(&loaded, cfg)?;
            let code = if r.passed { SUCCESS } else { EXPECTATION };
            report::emit("check", Some(&loaded.info), cfg, &r, code, || check::render(&r));
            Ok(code)
        }
        Command::Flow { input, dt, t_end, sample_every, csv } => {
            cfg.dt = dt;
            cfg.t_end = t_end;
            cfg.sample_every = sample_every;
            cfg.csv = csv;
            cfg.validate()?;
            let loaded = input::load(input.input.as_deref(), input.catalog.as_deref(), &input.params.options())?;
            let r = flow::run(&loaded, cfg)?;
            let code = if r.passed { SUCCESS } else { EXPECTATION };
            report::emit("flow", Some(&loaded.info), cfg, &r, code, || flow::render(&r));
            Ok(code)
        }
        Command::Feasibility { input, mode, max_iterations } => {
            let mode = match mode {
                CheckMode::Pluriclosed => Mode::Pluriclosed,
                CheckMode::Astheno => Mode::Astheno,
                CheckMode::Skl => {
                    return Err(Error::InvalidParameters("feasibility supports --mode pluriclosed or astheno".into()))
                }
            };
            cfg.mode = format!("{mode:?}").to_lowercase();
            cfg.solver.max_iterations = max_iterations;
            cfg.validate()?;
            let loaded = input::load(input.input.as_deref(), input.catalog.as_deref(), &input.params.options())?;
            let r = feasibility::run(&loaded, mode, &cfg.solver)?;
            report::emit("feasibility", Some(&loaded.info), cfg, &r, SUCCESS, || feasibility::render(&r));
            Ok(SUCCESS)
        }
        Command::Sweep { n, max_dim, no_example8, max_iterations } => {
            cfg.n = n;
            cfg.max_dim = max_dim;
            cfg.mode = "pluriclosed".into();
            cfg.solver.max_iterations = max_iterations;
            cfg.validate()?;
            let r = sweep::run(n, cfg.seed, max_dim, !no_example8, &cfg.solver);
            let code = if !r.counterexamples.is_empty() {
                EXPECTATION
            } else if !r.failures.is_empty() {
                INTERNAL
            } else {
                SUCCESS
            };
            report::emit("sweep", None, cfg, &r, code, || sweep::render(&r));
            Ok(code)
        }
        Command::Catalog { catalog: name, params } => {
            cfg.validate()?;
            let r = catalog::run(name.as_deref(), &params.options())?;
            match (&r, cfg.json) {
                // a bare structure file, ready for --input
                (catalog::CatalogResult::Entry { .. }, false) => report::write_stdout(&catalog::render(&r)),
                _ => report::emit("catalog", None, cfg, &r, SUCCESS, || catalog::render(&r)),
            }
            Ok(SUCCESS)
        }
    }
}
