//! `ncmax`: norms, dominants, maximal functions and verification suites from
//! the command line.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage or input error,
//! 3 numerical non-convergence.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use ncmax_core::domsolve::{brute_force_oracle, solve_dominant};
use ncmax_core::harness::{maximal_dominant, reports_to_csv, run_named, Suite};
use ncmax_core::io::{matrix_to_json, read_grid, read_sequence, sequence_to_string, write_grid};
use ncmax_core::vvnorms::{l1_pos_norm, l1_square_root_split, linf_pos_norm, Certificate};
use ncmax_core::{Exponent, Operator, SolverConfig, SuiteConfig};

const EXIT_FAIL: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_NONCONVERGED: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "ncmax", version, about = "Positive-cone norms, Loewner dominants and dyadic maximal functions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Positive-cone norm of a sequence file.
    Norm(NormArgs),
    /// Minimal Schatten-p dominant of a sequence file, with its dual certificate.
    Dominate(DominateArgs),
    /// Maximal dominant F of a grid file.
    Maximal(MaximalArgs),
    /// Run verification suites.
    Verify(VerifyArgs),
    /// Grid-search reference value for 2x2 sequences of length <= 3.
    Oracle(OracleArgs),
}

#[derive(Args, Debug)]
struct Common {
    /// Solver tolerance (relative certified gap).
    #[arg(long)]
    tol: Option<f64>,
    /// JSON configuration file (suite and solver fields).
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Kind {
    LinfPos,
    L1Pos,
}

#[derive(Args, Debug)]
struct NormArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum)]
    kind: Kind,
    #[arg(long, value_parser = parse_exponent)]
    p: Exponent,
    /// Where to write the certificate (dominant or factorization).
    #[arg(long)]
    output: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct DominateArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_parser = parse_exponent)]
    p: Exponent,
    /// Where to write the dominant and the dual sequence.
    #[arg(long)]
    output: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct MaximalArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_parser = parse_exponent)]
    p: Exponent,
    /// Highest dyadic level n_max.
    #[arg(long, default_value_t = 3)]
    levels: u32,
    /// Where to write F as a grid file.
    #[arg(long)]
    output: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Suite name or "all".
    #[arg(long)]
    suite: Option<String>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    dim: Option<usize>,
    /// Largest sequence length.
    #[arg(long)]
    len: Option<usize>,
    #[arg(long)]
    grid_size: Option<usize>,
    #[arg(long)]
    levels: Option<u32>,
    /// Comma-separated exponents, e.g. `1,1.5,inf`.
    #[arg(long, value_parser = parse_exponent, value_delimiter = ',')]
    p: Option<Vec<Exponent>>,
    /// Where to write the reports; stdout when absent.
    #[arg(long)]
    output: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug)]
struct OracleArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_parser = parse_exponent)]
    p: Exponent,
    /// Grid spacing of the search.
    #[arg(long, default_value_t = 1e-3)]
    resolution: f64,
    #[command(flatten)]
    common: Common,
}

fn parse_exponent(s: &str) -> Result<Exponent, String> {
    s.parse().map_err(|e: ncmax_core::Error| e.to_string())
}

/// Error carrying the exit code it maps to.
#[derive(Debug)]
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl From<anyhow::Error> for Failure {
    fn from(error: anyhow::Error) -> Self {
        // numerical breakdowns are the only core errors that are not about input
        let code = match error.downcast_ref::<ncmax_core::Error>() {
            Some(ncmax_core::Error::Eigensolver) => EXIT_NONCONVERGED,
            _ => EXIT_USAGE,
        };
        Failure { code, error }
    }
}

impl From<ncmax_core::Error> for Failure {
    fn from(error: ncmax_core::Error) -> Self {
        anyhow::Error::from(error).into()
    }
}

type CmdResult = Result<u8, Failure>;

fn load_config(common: &Common) -> anyhow::Result<SuiteConfig> {
    let mut cfg = match &common.config {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            serde_json::from_str::<SuiteConfig>(&text).with_context(|| format!("parsing {}", path.display()))?
        }
        None => SuiteConfig::default(),
    };
    if let Some(tol) = common.tol {
        cfg.solver.tol = tol;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn solver_config(common: &Common) -> anyhow::Result<SolverConfig> {
    Ok(load_config(common)?.solver)
}

fn require_json(common: &Common, command: &str) -> anyhow::Result<()> {
    if common.format == Format::Csv {
        bail!("--format csv is only supported by verify, not by {command}");
    }
    Ok(())
}

/// Writes to stdout; a closed pipe (e.g. `| head`) is not an error.
fn print_out(text: &str) {
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{text}").and_then(|_| out.flush());
}

fn emit(value: &Value) {
    print_out(&serde_json::to_string_pretty(value).expect("JSON values serialize"));
}

fn write_text(path: &Path, text: &str) -> anyhow::Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn cmd_norm(args: &NormArgs) -> CmdResult {
    require_json(&args.common, "norm")?;
    let solver = solver_config(&args.common)?;
    let seq = read_sequence(&args.input).with_context(|| format!("reading {}", args.input.display()))?;
    let (value, lower, gap, converged, certificate) = match args.kind {
        Kind::L1Pos => {
            let value = l1_pos_norm(&seq, args.p)?;
            let split = l1_square_root_split(&seq)?;
            let cert = json!({
                "kind": "l1_factorization",
                "lefts": split.lefts.iter().map(|a| matrix_to_json(a.matrix())).collect::<Vec<_>>(),
                "rights": split.rights.iter().map(|b| matrix_to_json(b.matrix())).collect::<Vec<_>>(),
            });
            (value, value, 0.0, true, cert)
        }
        Kind::LinfPos => {
            let res = linf_pos_norm(&seq, args.p, &solver)?;
            let cert = match &res.certificate {
                Some(Certificate::Dominant(a)) => json!({"kind": "dominant", "dominant": matrix_to_json(a.matrix())}),
                Some(Certificate::Factorization(f)) => json!({
                    "kind": "factorization",
                    "left": matrix_to_json(f.left.matrix()),
                    "middles": f.middles.iter().map(|z| matrix_to_json(z.matrix())).collect::<Vec<_>>(),
                    "right": matrix_to_json(f.right.matrix()),
                }),
                None => Value::Null,
            };
            (res.value, res.lower_bound, res.gap, res.converged, cert)
        }
    };
    if let Some(path) = &args.output {
        write_text(path, &serde_json::to_string_pretty(&certificate).expect("JSON values serialize"))?;
    }
    emit(&json!({
        "kind": match args.kind { Kind::LinfPos => "linf-pos", Kind::L1Pos => "l1-pos" },
        "p": args.p,
        "value": value,
        "lower_bound": lower,
        "gap": gap,
        "converged": converged,
        "certificate": args.output.as_ref().map(|p| p.display().to_string()),
    }));
    Ok(if converged { 0 } else { EXIT_NONCONVERGED })
}

fn cmd_dominate(args: &DominateArgs) -> CmdResult {
    require_json(&args.common, "dominate")?;
    let solver = solver_config(&args.common)?;
    let seq = read_sequence(&args.input).with_context(|| format!("reading {}", args.input.display()))?;
    let sol = solve_dominant(&seq, args.p, &solver)?;
    if let Some(path) = &args.output {
        let dual: Value = serde_json::from_str(&sequence_to_string(&sol.dual_sequence)?).context("encoding dual")?;
        let out = json!({"dominant": matrix_to_json(sol.dominant.matrix()), "dual": dual});
        write_text(path, &serde_json::to_string_pretty(&out).expect("JSON values serialize"))?;
    }
    emit(&json!({
        "p": args.p,
        "primal": sol.primal_value,
        "dual": sol.dual_value,
        "gap": sol.gap,
        "relative_gap": sol.relative_gap(),
        "iterations": sol.iterations,
        "converged": sol.converged,
        "dominant": matrix_to_json(sol.dominant.matrix()),
    }));
    Ok(if sol.converged { 0 } else { EXIT_NONCONVERGED })
}

fn cmd_maximal(args: &MaximalArgs) -> CmdResult {
    require_json(&args.common, "maximal")?;
    let solver = solver_config(&args.common)?;
    let f = read_grid(&args.input).with_context(|| format!("reading {}", args.input.display()))?;
    let res = maximal_dominant(&f, args.p, args.levels, &solver)?;
    if let Some(path) = &args.output {
        write_grid(path, &res.dominant).with_context(|| format!("writing {}", path.display()))?;
    }
    let mut summary = serde_json::to_value(&res.summary).context("encoding summary")?;
    summary["p"] = json!(args.p);
    summary["levels"] = json!(args.levels);
    summary["output"] = json!(args.output.as_ref().map(|p| p.display().to_string()));
    emit(&summary);
    Ok(if res.summary.all_converged { 0 } else { EXIT_NONCONVERGED })
}

fn cmd_verify(args: &VerifyArgs) -> CmdResult {
    let mut cfg = load_config(&args.common)?;
    if let Some(s) = &args.suite {
        if s != "all" {
            s.parse::<Suite>()?;
        }
        cfg.suite = s.clone();
    }
    cfg.seed = args.seed.unwrap_or(cfg.seed);
    cfg.trials = args.trials.unwrap_or(cfg.trials);
    cfg.dim = args.dim.or(cfg.dim);
    cfg.seq_len = args.len.unwrap_or(cfg.seq_len);
    cfg.grid_size = args.grid_size.unwrap_or(cfg.grid_size);
    cfg.levels = args.levels.unwrap_or(cfg.levels);
    if args.p.is_some() {
        cfg.p_list = args.p.clone();
    }
    let reports = run_named(&cfg)?;
    let text = match args.common.format {
        Format::Json => serde_json::to_string_pretty(&reports).context("encoding reports")?,
        Format::Csv => reports_to_csv(&reports),
    };
    match &args.output {
        Some(path) => write_text(path, &text)?,
        None => print_out(text.trim_end_matches('\n')),
    }
    for r in &reports {
        let p = r.p.map(|p| p.to_string()).unwrap_or_default();
        let status = if r.pass { "PASS" } else { "FAIL" };
        eprintln!(
            "{status} {} p={p} max_ratio={:.6} bound={:.6} skipped={} violations={}",
            r.suite,
            r.max_ratio,
            r.bound,
            r.skipped.len(),
            r.violations.len()
        );
    }
    Ok(if reports.iter().all(|r| r.pass) { 0 } else { EXIT_FAIL })
}

fn cmd_oracle(args: &OracleArgs) -> CmdResult {
    require_json(&args.common, "oracle")?;
    let solver = solver_config(&args.common)?;
    let seq = read_sequence(&args.input).with_context(|| format!("reading {}", args.input.display()))?;
    let oracle = brute_force_oracle(&seq, args.p, args.resolution)?;
    let sol = solve_dominant(&seq, args.p, &solver)?;
    emit(&json!({
        "p": args.p,
        "resolution": args.resolution,
        "oracle": oracle,
        "solver": sol.primal_value,
        "difference": (sol.primal_value - oracle).abs(),
        "converged": sol.converged,
    }));
    Ok(if sol.converged { 0 } else { EXIT_NONCONVERGED })
}

fn init_threads() -> anyhow::Result<()> {
    let Ok(raw) = std::env::var("NCMAX_THREADS") else { return Ok(()) };
    let n: usize = raw.trim().parse().with_context(|| format!("NCMAX_THREADS must be a positive integer, got {raw:?}"))?;
    if n == 0 {
        bail!("NCMAX_THREADS must be a positive integer, got 0");
    }
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("configuring the thread pool")
}

fn run(cli: Cli) -> CmdResult {
    init_threads()?;
    match &cli.command {
        Command::Norm(a) => cmd_norm(a),
        Command::Dominate(a) => cmd_dominate(a),
        Command::Maximal(a) => cmd_maximal(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Oracle(a) => cmd_oracle(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
