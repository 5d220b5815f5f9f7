//! Command-line front end.
//!
//! Exit codes: 0 success, 1 parse or I/O error, 2 graph or label validation
//! error, 3 numerical failure, 4 bound violation, 64 usage error.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::baselines::{lp_solve, LpConfig};
use crate::bench::{default_grid, run_rate_experiment, ChainSpec};
use crate::certificates::{
    kappa_estimate, Certificate, ReferenceKind, KAPPA_CLAIMED, KAPPA_GUARANTEED, KAPPA_SLACK,
};
use crate::error::SlpError;
use crate::graph::{EdgeSignal, EmpiricalGraph, NodeSignal};
use crate::io::{self, fmt_f64};
use crate::mp::MpNetwork;
use crate::solver::{
    self, make_preconditioners, trace_record, SamplingSet, SolverConfig, SolverTrace,
};

pub const EXIT_USAGE: i32 = 64;

#[derive(Debug, Parser)]
#[command(
    name = "slp",
    version,
    about = "Sparse label propagation on weighted graphs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algorithm {
    /// Centralized primal-dual iteration.
    Slp,
    /// The same iteration as synchronous message passing.
    SlpMp,
    /// Quadratic label propagation baseline.
    Lp,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Recover a signal from an edge list and labels.
    Solve(SolveArgs),
    /// Run the decaying-weight chain rate experiment.
    BenchChain(BenchArgs),
    /// Estimate the step-size operator norm of a graph.
    Certify(CertifyArgs),
}

#[derive(Debug, clap::Args)]
struct SolveArgs {
    /// Edge list, `i<TAB>j<TAB>w` per line.
    #[arg(long)]
    graph: PathBuf,
    /// Labels, `i<TAB>value` per line.
    #[arg(long)]
    labels: PathBuf,
    #[arg(long, value_enum, default_value_t = Algorithm::Slp)]
    algorithm: Algorithm,
    /// Iterations; defaults to 10 times the node count.
    #[arg(long)]
    iters: Option<usize>,
    /// Early-stopping threshold on the running average; 0 runs all iterations.
    #[arg(long, default_value_t = 0.0)]
    tol: f64,
    /// Write per-iteration trace records (JSON lines) here.
    #[arg(long)]
    trace: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    trace_stride: usize,
    /// Write per-round message statistics (JSON lines) here; slp-mp only.
    #[arg(long)]
    rounds: Option<PathBuf>,
    /// Write the recovered signal here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Write a convergence certificate (JSON) here.
    #[arg(long)]
    certificate: Option<PathBuf>,
    /// Write the run manifest (JSON) here.
    #[arg(long)]
    manifest: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    threads: usize,
}

#[derive(Debug, clap::Args)]
struct BenchArgs {
    /// Number of chain nodes.
    #[arg(long)]
    n: usize,
    /// Comma-separated iteration counts; defaults to 1-2-5 steps up to N/2.
    #[arg(long, value_delimiter = ',')]
    grid: Option<Vec<usize>>,
    /// Write the report as JSON here.
    #[arg(long)]
    json: Option<PathBuf>,
    /// Write the plain-text table here instead of stdout.
    #[arg(long)]
    table: Option<PathBuf>,
}

#[derive(Debug, clap::Args)]
struct CertifyArgs {
    #[arg(long)]
    graph: PathBuf,
}

/// Inputs and settings that reproduce a `solve` run.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub version: String,
    pub command: String,
    pub graph: PathBuf,
    pub labels: PathBuf,
    pub algorithm: Algorithm,
    pub iters: usize,
    pub tol: f64,
    pub trace_stride: usize,
    pub threads: usize,
    /// The solvers are deterministic; no randomness is consumed.
    pub seed: Option<u64>,
    pub outputs: Vec<PathBuf>,
}

struct Failure {
    code: i32,
    message: String,
}

impl From<SlpError> for Failure {
    fn from(e: SlpError) -> Self {
        Failure {
            code: e.exit_code(),
            message: e.to_string(),
        }
    }
}

fn fail(code: i32, message: impl Into<String>) -> Failure {
    Failure {
        code,
        message: message.into(),
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the exit code. Diagnostics go to `err`; results without an output path go
/// to `out`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            if code == 0 {
                let _ = write!(out, "{e}");
            } else {
                let _ = write!(err, "{e}");
            }
            return code;
        }
    };
    let result = match cli.command {
        Command::Solve(a) => cmd_solve(&a, out),
        Command::BenchChain(a) => cmd_bench_chain(&a, out),
        Command::Certify(a) => cmd_certify(&a, out),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}

fn load_graph(path: &Path) -> Result<EmpiricalGraph, Failure> {
    let text = io::read_to_string(path)?;
    let list = io::parse_edge_list(&text)
        .map_err(|e| fail(e.exit_code(), format!("{}: {e}", path.display())))?;
    list.into_graph().map_err(|e| {
        let line = match &e {
            SlpError::NonPositiveWeight { index, .. }
            | SlpError::SelfLoop { index, .. }
            | SlpError::DuplicateEdge { index, .. } => list.line_of(*index),
            _ => None,
        };
        let at = line.map(|l| format!(" line {l}")).unwrap_or_default();
        fail(e.exit_code(), format!("{}{at}: {e}", path.display()))
    })
}

fn load_labels(path: &Path, g: &EmpiricalGraph) -> Result<SamplingSet, Failure> {
    let text = io::read_to_string(path)?;
    let s = io::parse_labels(&text)
        .map_err(|e| fail(e.exit_code(), format!("{}: {e}", path.display())))?;
    s.check_against(g)
        .map_err(|e| fail(e.exit_code(), format!("{}: {e}", path.display())))?;
    Ok(s)
}

fn write_or_print(path: Option<&PathBuf>, text: &str, out: &mut dyn Write) -> Result<(), Failure> {
    match path {
        Some(p) => Ok(io::write_string(p, text)?),
        None => out
            .write_all(text.as_bytes())
            .map_err(|e| fail(1, e.to_string())),
    }
}

fn cmd_solve(a: &SolveArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let g = load_graph(&a.graph)?;
    let s = load_labels(&a.labels, &g)?;
    let iters = a.iters.unwrap_or(10 * g.num_nodes());
    if iters == 0 || a.threads == 0 || a.trace_stride == 0 || a.tol.is_nan() || a.tol < 0.0 {
        return Err(fail(
            EXIT_USAGE,
            "--iters, --threads and --trace-stride must be positive, --tol non-negative",
        ));
    }

    let mut outputs = Vec::new();
    let signal = match a.algorithm {
        Algorithm::Slp => {
            let cfg = SolverConfig {
                max_iters: iters,
                tol: a.tol,
                record_trace: a.trace.is_some(),
                trace_stride: a.trace_stride,
                threads: a.threads,
                ..SolverConfig::default()
            };
            let sol = solver::solve(&g, &s, &cfg)?;
            if let Some(p) = &a.trace {
                io::write_string(p, &sol.trace.to_json_lines())?;
                outputs.push(p.clone());
            }
            if let Some(p) = &a.certificate {
                write_certificate(&g, &s, &sol.state, iters, a.threads, p)?;
                outputs.push(p.clone());
            }
            sol.average
        }
        Algorithm::SlpMp => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(a.threads)
                .build()
                .map_err(|e| fail(EXIT_USAGE, e.to_string()))?;
            let mut net = MpNetwork::new(&g, &s)?.parallel(a.threads > 1);
            let p = make_preconditioners(&g);
            let x0 = NodeSignal::zeros(g.num_nodes());
            let y0 = EdgeSignal::zeros(g.num_edges());
            let mut trace = SolverTrace::default();
            let mut rounds = String::new();
            pool.install(|| -> Result<(), SlpError> {
                for r in 1..=iters {
                    let stats = net.round()?;
                    if a.rounds.is_some() {
                        rounds.push_str(&stats.to_json_line());
                        rounds.push('\n');
                    }
                    if a.trace.is_some() && (r % a.trace_stride == 0 || r == iters) {
                        let st = net.to_state();
                        trace
                            .records
                            .push(trace_record(&g, &s, &p, (&x0, &y0), &st, None));
                    }
                }
                Ok(())
            })?;
            if let Some(path) = &a.trace {
                io::write_string(path, &trace.to_json_lines())?;
                outputs.push(path.clone());
            }
            if let Some(path) = &a.rounds {
                io::write_string(path, &rounds)?;
                outputs.push(path.clone());
            }
            if let Some(path) = &a.certificate {
                write_certificate(&g, &s, &net.to_state(), iters, a.threads, path)?;
                outputs.push(path.clone());
            }
            net.average()
        }
        Algorithm::Lp => {
            let cfg = LpConfig {
                max_iters: iters,
                tol: if a.tol > 0.0 {
                    a.tol
                } else {
                    LpConfig::default().tol
                },
            };
            let outcome = lp_solve(&g, &s, &cfg)?;
            if !outcome.converged {
                return Err(fail(
                    3,
                    format!("label propagation did not converge in {iters} iterations"),
                ));
            }
            outcome.signal
        }
    };

    write_or_print(a.output.as_ref(), &io::format_signal(&signal), out)?;
    if let Some(p) = &a.output {
        outputs.push(p.clone());
    }
    if let Some(p) = &a.manifest {
        let manifest = RunManifest {
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: "solve".into(),
            graph: a.graph.clone(),
            labels: a.labels.clone(),
            algorithm: a.algorithm,
            iters,
            tol: a.tol,
            trace_stride: a.trace_stride,
            threads: a.threads,
            seed: None,
            outputs,
        };
        let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
        io::write_string(p, &(json + "\n"))?;
    }
    Ok(0)
}

/// Certificate against the final iterate of a run ten times as long.
fn write_certificate(
    g: &EmpiricalGraph,
    s: &SamplingSet,
    state: &solver::SolverState,
    iters: usize,
    threads: usize,
    path: &Path,
) -> Result<(), Failure> {
    let long = solver::solve(
        g,
        s,
        &SolverConfig {
            max_iters: iters.saturating_mul(10),
            threads,
            ..SolverConfig::default()
        },
    )?;
    let init = (
        &NodeSignal::zeros(g.num_nodes()),
        &EdgeSignal::zeros(g.num_edges()),
    );
    let cert = Certificate::evaluate(
        g,
        s,
        init,
        state,
        &long.state.x_curr,
        ReferenceKind::LongRun,
    );
    let json = serde_json::to_string_pretty(&cert).expect("certificate serializes");
    Ok(io::write_string(path, &(json + "\n"))?)
}

fn cmd_bench_chain(a: &BenchArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let spec = ChainSpec::new(a.n).map_err(|e| fail(EXIT_USAGE, e.to_string()))?;
    let grid = a.grid.clone().unwrap_or_else(|| default_grid(a.n));
    let report = run_rate_experiment(spec, &grid).map_err(|e| match e {
        SlpError::InvalidConfig(m) => fail(EXIT_USAGE, m),
        other => other.into(),
    })?;
    if let Some(p) = &a.json {
        io::write_string(p, &(report.to_json() + "\n"))?;
    }
    write_or_print(a.table.as_ref(), &report.to_table(), out)?;
    report.check()?;
    Ok(0)
}

fn cmd_certify(a: &CertifyArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let g = load_graph(&a.graph)?;
    let p = make_preconditioners(&g);
    let kappa = kappa_estimate(&g, &p);
    let text = format!(
        "nodes\t{}\nedges\t{}\nmax_degree\t{}\nkappa\t{}\nkappa_le_{}\t{}\nkappa_le_{}\t{}\n",
        g.num_nodes(),
        g.num_edges(),
        fmt_f64(g.max_degree()),
        fmt_f64(kappa),
        KAPPA_CLAIMED,
        kappa <= KAPPA_CLAIMED + KAPPA_SLACK,
        "inv_sqrt2",
        kappa <= KAPPA_GUARANTEED + KAPPA_SLACK,
    );
    out.write_all(text.as_bytes())
        .map_err(|e| fail(1, e.to_string()))?;
    if kappa <= KAPPA_GUARANTEED + KAPPA_SLACK {
        Ok(0)
    } else {
        Err(fail(
            3,
            format!("kappa {} exceeds 1/sqrt(2)", fmt_f64(kappa)),
        ))
    }
}
