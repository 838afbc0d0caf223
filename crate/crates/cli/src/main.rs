//! One binary, six pipelines: generate designs, validate them, build and
//! analyze frames, plan block types, and run recovery trials.  Every
//! subcommand is a thin wrapper over the library; all randomness enters
//! through --seed and identical invocations print identical bytes.
//!
//! Exit codes: 0 success, 2 usage, 3 validation failure, 4 computation
//! error.

use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use csframes::analysis::{self, BoundChain, PackingBound};
use csframes::design::{self, Design, DesignKind};
use csframes::frame::{self, ConstructionTag, FrameMatrix, HadamardPolicy};
use csframes::planner::{self, Rational};
use csframes::recovery::{self, SolverKind, TrialOutcome};
use csframes::tol;

const EXIT_USAGE: u8 = 2;
const EXIT_VALIDATION: u8 = 3;
const EXIT_COMPUTE: u8 = 4;

#[derive(Parser)]
#[command(name = "csframes", version, about = "deterministic compressed-sensing frames from block designs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate or validate block designs
    Designs {
        #[command(subcommand)]
        command: DesignsCommand,
    },
    /// Build or analyze frame matrices
    Frame {
        #[command(subcommand)]
        command: FrameCommand,
    },
    /// Search for a feasible block type with prescribed totals
    Plan(PlanArgs),
    /// Run synthetic sparse-recovery trials against a frame
    Recover(RecoverArgs),
    /// Design -> frame -> analyze -> recover in one deterministic run
    Pipeline(PipelineArgs),
}

#[derive(Subcommand)]
enum DesignsCommand {
    /// Generate a design from the built-in catalog
    Gen(GenArgs),
    /// Check the pair-coverage invariant of a design file
    Validate { path: PathBuf },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Family {
    /// Steiner triple system (Bose), needs --v congruent to 3 mod 6
    Sts,
    /// Projective plane of prime order --q
    Pg2,
    /// Affine plane of prime order --q
    Ag2,
    /// Exhaustive exact-cover search, needs --v and --k-set
    Search,
}

#[derive(Args)]
struct FamilyArgs {
    #[arg(long, value_enum)]
    family: Family,
    /// Point count (sts, search)
    #[arg(long)]
    v: Option<usize>,
    /// Prime order (pg2, ag2)
    #[arg(long)]
    q: Option<usize>,
    /// Comma-separated block sizes (search), e.g. 3,5
    #[arg(long, value_delimiter = ',')]
    k_set: Option<Vec<usize>>,
}

#[derive(Args)]
struct GenArgs {
    #[command(flatten)]
    family: FamilyArgs,
    /// Output path for the .pbd file
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Subcommand)]
enum FrameCommand {
    Build(BuildArgs),
    Analyze(AnalyzeArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Construction {
    Con0,
    Con1,
    Mub,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Hadamard {
    Dft,
    Sylvester,
    Auto,
}

impl From<Hadamard> for HadamardPolicy {
    fn from(h: Hadamard) -> Self {
        match h {
            Hadamard::Dft => HadamardPolicy::Dft,
            Hadamard::Sylvester => HadamardPolicy::Sylvester,
            Hadamard::Auto => HadamardPolicy::Auto,
        }
    }
}

#[derive(Args)]
struct BuildArgs {
    /// Input .pbd design file
    #[arg(long)]
    design: PathBuf,
    #[arg(long, value_enum)]
    construction: Construction,
    #[arg(long, value_enum, default_value = "auto")]
    hadamard: Hadamard,
    /// Number of non-identity bases for the MUB extension
    #[arg(long)]
    mub_e: Option<usize>,
    /// Normalize rows to this l2 length after building
    #[arg(long)]
    normalize: Option<f64>,
    /// Output path for the .fmf frame file
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// Input .fmf frame file
    path: PathBuf,
    /// Companion design file; adds the certified bound chain
    #[arg(long)]
    design: Option<PathBuf>,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct PlanArgs {
    /// Number of blocks
    #[arg(long)]
    n: u64,
    /// Integer block-size target (exclusive with --h)
    #[arg(long, conflicts_with = "h")]
    k: Option<u64>,
    /// Rational column ratio, e.g. 9/2 or 4.5 (exclusive with --k)
    #[arg(long)]
    h: Option<String>,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct RecoverArgs {
    /// Input .fmf frame file
    #[arg(long)]
    frame: PathBuf,
    #[arg(long)]
    sparsity: usize,
    #[arg(long)]
    trials: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long, value_enum, default_value = "bp")]
    solver: Solver,
    #[arg(long, default_value_t = tol::RECOVERY_SUCCESS)]
    success_tol: f64,
    #[arg(long)]
    json: bool,
    /// Write one CSV row per trial to this path
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Solver {
    Bp,
    Omp,
    L0,
}

impl From<Solver> for SolverKind {
    fn from(s: Solver) -> Self {
        match s {
            Solver::Bp => SolverKind::Bp,
            Solver::Omp => SolverKind::Omp,
            Solver::L0 => SolverKind::L0,
        }
    }
}

#[derive(Args)]
struct PipelineArgs {
    #[command(flatten)]
    family: FamilyArgs,
    #[arg(long, value_enum)]
    construction: Construction,
    #[arg(long, value_enum, default_value = "auto")]
    hadamard: Hadamard,
    #[arg(long)]
    mub_e: Option<usize>,
    #[arg(long)]
    normalize: Option<f64>,
    #[arg(long)]
    sparsity: usize,
    #[arg(long)]
    trials: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long, value_enum, default_value = "bp")]
    solver: Solver,
    #[arg(long, default_value_t = tol::RECOVERY_SUCCESS)]
    success_tol: f64,
    #[arg(long)]
    json: bool,
}

struct CliError {
    code: u8,
    message: String,
}

impl CliError {
    fn usage(message: impl Display) -> Self {
        CliError {
            code: EXIT_USAGE,
            message: message.to_string(),
        }
    }

    fn compute(module: &str, err: impl Display) -> Self {
        CliError {
            code: EXIT_COMPUTE,
            message: format!("{module}: {err}"),
        }
    }

    fn validation(message: impl Display) -> Self {
        CliError {
            code: EXIT_VALIDATION,
            message: message.to_string(),
        }
    }
}

#[derive(Serialize)]
struct CommandResult<T: Serialize> {
    status: &'static str,
    payload: T,
    diagnostics: Vec<String>,
}

fn print_ok<T: Serialize>(payload: &T, diagnostics: Vec<String>) {
    let envelope = CommandResult {
        status: "OK",
        payload,
        diagnostics,
    };
    println!("{}", serde_json::to_string(&envelope).expect("serializable"));
}

fn print_error(message: &str) {
    #[derive(Serialize)]
    struct ErrorPayload<'a> {
        message: &'a str,
    }
    let envelope = CommandResult {
        status: "ERROR",
        payload: ErrorPayload { message },
        diagnostics: Vec::new(),
    };
    println!("{}", serde_json::to_string(&envelope).expect("serializable"));
    eprintln!("error: {message}");
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            print_error(&err.message);
            ExitCode::from(err.code)
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Designs { command } => match command {
            DesignsCommand::Gen(args) => cmd_designs_gen(args),
            DesignsCommand::Validate { path } => cmd_designs_validate(&path),
        },
        Command::Frame { command } => match command {
            FrameCommand::Build(args) => cmd_frame_build(args),
            FrameCommand::Analyze(args) => cmd_frame_analyze(args),
        },
        Command::Plan(args) => cmd_plan(args),
        Command::Recover(args) => cmd_recover(args),
        Command::Pipeline(args) => cmd_pipeline(args),
    }
}

/// Resolve family flags to a design; `Ok(None)` means an exhausted search.
fn generate_design(args: &FamilyArgs) -> Result<Option<Design>, CliError> {
    let need = |flag: &str, family: &str| {
        CliError::usage(format!("--family {family} requires {flag}"))
    };
    match args.family {
        Family::Sts => {
            let v = args.v.ok_or_else(|| need("--v", "sts"))?;
            design::steiner_triple_bose(v)
                .map(Some)
                .map_err(|e| CliError::compute("design_core", e))
        }
        Family::Pg2 => {
            let q = args.q.ok_or_else(|| need("--q", "pg2"))?;
            design::projective_plane(q)
                .map(Some)
                .map_err(|e| CliError::compute("design_core", e))
        }
        Family::Ag2 => {
            let q = args.q.ok_or_else(|| need("--q", "ag2"))?;
            design::affine_plane(q)
                .map(Some)
                .map_err(|e| CliError::compute("design_core", e))
        }
        Family::Search => {
            let v = args.v.ok_or_else(|| need("--v", "search"))?;
            let k_set = args
                .k_set
                .clone()
                .ok_or_else(|| need("--k-set", "search"))?;
            design::search::pbd_exact_cover(v, &k_set, &[])
                .map_err(|e| CliError::compute("design_core", e))
        }
    }
}

#[derive(Serialize)]
struct DesignSummary {
    v: usize,
    kind: String,
    n_blocks: usize,
    block_size_counts: std::collections::BTreeMap<usize, usize>,
    sum_block_sizes: usize,
}

fn summarize_design(d: &Design) -> DesignSummary {
    let stats = d.stats();
    DesignSummary {
        v: d.v(),
        kind: d.kind().to_string(),
        n_blocks: stats.n_blocks,
        block_size_counts: stats.block_size_counts,
        sum_block_sizes: stats.sum_block_sizes,
    }
}

fn cmd_designs_gen(args: GenArgs) -> Result<(), CliError> {
    match generate_design(&args.family)? {
        Some(d) => {
            design::write_design(&d, &args.output)
                .map_err(|e| CliError::compute("design_core", e))?;
            let s = summarize_design(&d);
            println!(
                "wrote {} ({} points, {} blocks, column total {})",
                args.output.display(),
                s.v,
                s.n_blocks,
                s.sum_block_sizes
            );
            Ok(())
        }
        None => {
            println!("NOT_FOUND: search exhausted without a design");
            Ok(())
        }
    }
}

fn cmd_designs_validate(path: &Path) -> Result<(), CliError> {
    let d = design::read_design(path).map_err(|e| CliError::compute("design_core", e))?;
    let report = d.validate();
    print_ok(&report, Vec::new());
    if report.ok {
        Ok(())
    } else {
        Err(CliError::validation(format!(
            "{} violates its pair-coverage invariant ({} bad pairs)",
            path.display(),
            report.violations.len()
        )))
    }
}

fn build_frame(
    d: &Design,
    construction: Construction,
    hadamard: Hadamard,
    mub_e: Option<usize>,
    normalize: Option<f64>,
) -> Result<FrameMatrix, CliError> {
    let module = "frame_builder";
    let built = match construction {
        Construction::Con0 => frame::build_con0(d, hadamard.into()),
        Construction::Con1 => frame::build_con1(d, hadamard.into()),
        Construction::Mub => {
            let e = mub_e
                .ok_or_else(|| CliError::usage("--construction mub requires --mub-e"))?;
            frame::build_mub_extended(d, e)
        }
    }
    .map_err(|e| CliError::compute(module, e))?;
    match normalize {
        Some(c) => frame::normalize_rows(&built, c).map_err(|e| CliError::compute(module, e)),
        None => Ok(built),
    }
}

fn cmd_frame_build(args: BuildArgs) -> Result<(), CliError> {
    let d = design::read_design(&args.design).map_err(|e| CliError::compute("design_core", e))?;
    let f = build_frame(&d, args.construction, args.hadamard, args.mub_e, args.normalize)?;
    frame::write_frame(&f, &args.output).map_err(|e| CliError::compute("frame_builder", e))?;
    println!(
        "wrote {} ({} x {}, {:?})",
        args.output.display(),
        f.n_rows(),
        f.n_cols(),
        f.tag()
    );
    Ok(())
}

#[derive(Serialize)]
struct AnalyzePayload {
    report: analysis::CoherenceReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    bounds: Option<BoundChain>,
    #[serde(skip_serializing_if = "Option::is_none")]
    packing: Option<PackingBound>,
}

fn analyze_frame(f: &FrameMatrix, d: Option<&Design>) -> Result<AnalyzePayload, CliError> {
    let report =
        analysis::coherence_report(f).map_err(|e| CliError::compute("frame_analysis", e))?;
    let mut bounds = None;
    let mut packing = None;
    if let Some(d) = d {
        if d.kind() == DesignKind::Pbd
            && matches!(f.tag(), ConstructionTag::Con0 | ConstructionTag::Con1)
        {
            bounds = Some(
                analysis::theoretical_bounds(d, f.tag())
                    .map_err(|e| CliError::compute("frame_analysis", e))?,
            );
        }
        if d.kind() == DesignKind::Packing {
            packing = Some(
                analysis::packing_bound(d).map_err(|e| CliError::compute("frame_analysis", e))?,
            );
        }
    }
    Ok(AnalyzePayload {
        report,
        bounds,
        packing,
    })
}

fn cmd_frame_analyze(args: AnalyzeArgs) -> Result<(), CliError> {
    let f = frame::read_frame(&args.path).map_err(|e| CliError::compute("frame_builder", e))?;
    let d = match &args.design {
        Some(p) => Some(design::read_design(p).map_err(|e| CliError::compute("design_core", e))?),
        None => None,
    };
    let payload = analyze_frame(&f, d.as_ref())?;
    if args.json {
        print_ok(&payload, Vec::new());
    } else {
        let r = &payload.report;
        println!(
            "{} x {} frame: mip {}, welch {}, epsilon {}, t_mip {}, tight {}, etf {}",
            r.n, r.n_cols, r.mip, r.welch, r.epsilon, r.t_mip, r.tight, r.etf
        );
        if let Some(b) = &payload.bounds {
            match b.certified_epsilon {
                Some(eps) => println!(
                    "certified epsilon {} with mip bound {}",
                    eps, b.mip_upper
                ),
                None => println!(
                    "certification withheld; mip bound {} still applies",
                    b.mip_upper
                ),
            }
        }
        if let Some(p) = &payload.packing {
            println!("packing slack tau {}, certified t {}", p.tau, p.t);
        }
    }
    Ok(())
}

#[derive(Serialize)]
#[serde(untagged)]
enum PlanPayload {
    Found(planner::PlanResult),
    NotFound { result: &'static str },
}

fn cmd_plan(args: PlanArgs) -> Result<(), CliError> {
    let outcome = match (args.k, &args.h) {
        (Some(k), None) => planner::plan_integer(args.n, k),
        (None, Some(h)) => {
            let h = Rational::parse(h).map_err(CliError::usage)?;
            planner::plan_rational(args.n, h)
        }
        _ => return Err(CliError::usage("plan needs exactly one of --k or --h")),
    }
    .map_err(|e| CliError::compute("type_planner", e))?;
    let payload = match outcome {
        Some(plan) => PlanPayload::Found(plan),
        None => PlanPayload::NotFound {
            result: "NOT_FOUND",
        },
    };
    if args.json {
        print_ok(&payload, Vec::new());
    } else {
        match &payload {
            PlanPayload::Found(p) => println!(
                "v {} alpha {:?} over sizes {:?}, tau {}, N {}, existence {}",
                p.v, p.alpha, p.k_values, p.tau, p.n_cols, p.existence
            ),
            PlanPayload::NotFound { .. } => println!("NOT_FOUND"),
        }
    }
    Ok(())
}

fn write_trial_csv(path: &Path, t: usize, solver: SolverKind, rows: &[TrialOutcome]) -> std::io::Result<()> {
    let mut out = String::from("trial,t,solver,rel_error,iters,success\n");
    for row in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            row.trial, t, solver, row.rel_error, row.iters, row.success
        ));
    }
    fs::write(path, out)
}

fn cmd_recover(args: RecoverArgs) -> Result<(), CliError> {
    let f = frame::read_frame(&args.frame).map_err(|e| CliError::compute("frame_builder", e))?;
    let (stats, rows) = recovery::run_trials(
        &f,
        args.sparsity,
        args.trials,
        args.seed,
        args.solver.into(),
        args.success_tol,
    )
    .map_err(|e| CliError::compute("sparse_recovery", e))?;
    if let Some(csv) = &args.csv {
        write_trial_csv(csv, args.sparsity, stats.solver, &rows)
            .map_err(|e| CliError::compute("sparse_recovery", e))?;
    }
    if args.json {
        print_ok(&stats, Vec::new());
    } else {
        println!(
            "{}/{} exact recoveries (t={}, solver {}, max rel err {})",
            stats.successes, stats.trials, stats.t, stats.solver, stats.max_rel_error
        );
    }
    Ok(())
}

#[derive(Serialize)]
struct PipelinePayload {
    design: DesignSummary,
    analysis: AnalyzePayload,
    recovery: recovery::RecoveryTrialStats,
}

fn cmd_pipeline(args: PipelineArgs) -> Result<(), CliError> {
    let Some(d) = generate_design(&args.family)? else {
        println!("NOT_FOUND: search exhausted without a design");
        return Ok(());
    };
    let f = build_frame(&d, args.construction, args.hadamard, args.mub_e, args.normalize)?;
    let analysis_payload = analyze_frame(&f, Some(&d))?;
    let (stats, _rows) = recovery::run_trials(
        &f,
        args.sparsity,
        args.trials,
        args.seed,
        args.solver.into(),
        args.success_tol,
    )
    .map_err(|e| CliError::compute("sparse_recovery", e))?;
    let payload = PipelinePayload {
        design: summarize_design(&d),
        analysis: analysis_payload,
        recovery: stats,
    };
    if args.json {
        print_ok(&payload, Vec::new());
    } else {
        let r = &payload.analysis.report;
        println!(
            "{} x {} frame: mip {}, epsilon {}, etf {}; {}/{} recoveries at t={}",
            r.n,
            r.n_cols,
            r.mip,
            r.epsilon,
            r.etf,
            payload.recovery.successes,
            payload.recovery.trials,
            payload.recovery.t
        );
    }
    Ok(())
}
