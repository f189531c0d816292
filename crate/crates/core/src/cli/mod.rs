//! Command-line front end. [`run`] is the whole program minus process exit, so
//! it can be driven from tests.

pub mod format;
pub mod scenario;

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::nearly::{certify_nearly, decompose, NearlyOptions};
use crate::subspace::{model_space, ShiftOp};
use crate::DEFAULT_TOL;
use scenario::{render_markdown, run_all, run_scenario, ScenarioParams, ScenarioReport};

#[derive(Debug, Parser)]
#[command(name = "hardy-shift", version, about = "Nearly and almost invariant subspaces of truncated vector-valued Hardy spaces")]
struct Cli {
    /// Rank tolerance for subspace computations.
    #[arg(long, global = true, default_value_t = DEFAULT_TOL)]
    tol: f64,
    /// Seed for randomized scenarios.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Report runtime_ms as 0 so repeated runs are byte-identical.
    #[arg(long, global = true)]
    no_timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Decompose one function of a nearly S*-invariant subspace.
    Decompose {
        #[arg(long)]
        space: PathBuf,
        /// Function list spanning the defect space (may be empty).
        #[arg(long)]
        defect: PathBuf,
        #[arg(long)]
        function: PathBuf,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long)]
        kmax: Option<usize>,
    },
    /// Defect certificate of a subspace for S or S*.
    Certify {
        #[arg(long)]
        space: PathBuf,
        /// Largest admissible defect dimension.
        #[arg(long, default_value_t = 0)]
        p: usize,
        #[arg(long, default_value = "S*")]
        op: ShiftOp,
    },
    /// Orthonormal basis of the truncated model space of an inner symbol.
    ModelSpace {
        #[arg(long)]
        theta: PathBuf,
        #[arg(long)]
        order: usize,
    },
    /// Run a scripted verification, or `all` of them.
    Scenario(ScenarioArgs),
}

#[derive(Debug, Args)]
struct ScenarioArgs {
    id: String,
    /// Parameter override, `key=value`; repeatable.
    #[arg(long = "param")]
    params: Vec<String>,
    #[arg(long, conflicts_with = "markdown")]
    json: bool,
    #[arg(long)]
    markdown: bool,
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Parse {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("serializable")
}

/// Runs the program on `args` (including the binary name) and returns the exit
/// code: 0 pass, 1 mathematical failure, 2 usage or parse error.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = if code == 0 { write!(out, "{e}") } else { write!(err, "{e}") };
            return code;
        }
    };
    match execute(cli, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if e.is_mathematical() {
                1
            } else {
                2
            }
        }
    }
}

fn execute(cli: Cli, out: &mut dyn Write) -> Result<i32> {
    let io = |e: std::io::Error| Error::precondition(format!("write failed: {e}"));
    match cli.command {
        Command::Decompose {
            space,
            defect,
            function,
            eps,
            kmax,
        } => {
            let m = format::parse_space_spec(&read(&space)?, cli.tol)?;
            let e = format::parse_function_list(&read(&defect)?)?;
            let f = format::parse_function_spec(&read(&function)?)?;
            let mut opts = NearlyOptions::default();
            if let Some(eps) = eps {
                opts.eps = eps;
            }
            opts.k_max = kmax;
            let res = decompose(&m, &e, &f, opts)?;
            writeln!(out, "{}", pretty(&format::decomposition_to_value(&res))).map_err(io)?;
            Ok(if res.converged { 0 } else { 1 })
        }
        Command::Certify { space, p, op } => {
            let m = format::parse_space_spec(&read(&space)?, cli.tol)?;
            let cert = match op {
                ShiftOp::Backshift => certify_nearly(&m, p)?,
                ShiftOp::Shift => {
                    let mut c = m.defect_of_band(ShiftOp::Shift)?;
                    c.bound = Some(p);
                    c
                }
            };
            writeln!(out, "{}", pretty(&format::certificate_to_value(&cert))).map_err(io)?;
            Ok(if cert.passed() { 0 } else { 1 })
        }
        Command::ModelSpace { theta, order } => {
            let sym = format::parse_symbol_spec(&read(&theta)?)?;
            let k = model_space(&sym, order)?.with_tol(cli.tol);
            writeln!(out, "{}", pretty(&format::space_to_value(&k))).map_err(io)?;
            Ok(0)
        }
        Command::Scenario(args) => {
            let mut params = ScenarioParams::parse(&args.params)?;
            params.seed = cli.seed;
            params.tol = cli.tol;
            params.timing = !cli.no_timing;
            let reports: Vec<ScenarioReport> = if args.id == "all" {
                if !args.params.is_empty() {
                    return Err(Error::InvalidParameter {
                        name: "param".into(),
                        message: "overrides need a single scenario id".into(),
                    });
                }
                run_all(&params)?
            } else {
                vec![run_scenario(&args.id, &params)?]
            };
            if args.markdown {
                write!(out, "{}", render_markdown(&reports)).map_err(io)?;
            } else if args.id == "all" {
                writeln!(out, "{}", serde_json::to_string_pretty(&reports).expect("serializable")).map_err(io)?;
            } else {
                writeln!(out, "{}", serde_json::to_string_pretty(&reports[0]).expect("serializable")).map_err(io)?;
            }
            Ok(if reports.iter().all(|r| r.passed) { 0 } else { 1 })
        }
    }
}
