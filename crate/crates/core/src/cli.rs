//! The `spr-lab` command line.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path as FsPath, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::catalog::Cage;
use crate::certify::{certify, sweep, write_csv, Case, CertifyOptions, Solver, SweepConfig, DEFAULT_PATH_BUDGET};
use crate::cover::{build_cover_family, count_length_s_paths, estimate_cov_distribution, find_high_cov_path, CovEstimate, HighCov};
use crate::error::{Error, Result};
use crate::generate::{generate_cubic_high_girth, Strategy, DEFAULT_REPAIR_BUDGET};
use crate::instance::{build_instance, build_subterminal_instance, derive_params, validate_instance, Instance, Mode, Overrides};
use crate::numeric::Threshold;
use crate::solution::{stretch, validate_solution, InstanceRef, SolutionFile, SprSolution};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_UNMET: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

#[derive(Debug, Parser)]
#[command(name = "spr-lab", version, about = "Hard instances and lower-bound certificates for Steiner point removal")]
pub struct Cli {
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true, env = "SPR_LAB_THREADS")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build an instance from a cage or a random high-girth cubic graph.
    Gen(GenArgs),
    /// Check an instance or a solution.
    Validate(ValidateArgs),
    /// Produce a solution for an instance.
    Solve(SolveArgs),
    /// Exact stretch of a solution.
    Eval(EvalArgs),
    /// Cover-family statistics and a high-cov witness path.
    Cover(CoverArgs),
    /// Certify a stretch lower bound for a solution.
    Certify(CertifyArgs),
    /// Solve and certify a batch of instances from a TOML config.
    Sweep(SweepArgs),
    /// Count oriented simple paths with a given number of edges.
    CountPaths(CountArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Paper,
    Custom,
}

#[derive(Debug, Args)]
pub struct ParamArgs {
    #[arg(long, value_enum, default_value = "custom")]
    pub mode: ModeArg,
    #[arg(long = "M")]
    pub m: Option<u64>,
    #[arg(long = "S")]
    pub s: Option<u64>,
    /// Rational threshold such as `7`, `7/2` or `0.16`.
    #[arg(long = "L")]
    pub l: Option<Threshold>,
    #[arg(long = "g")]
    pub g: Option<u64>,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long, conflicts_with_all = ["n", "girth"])]
    pub cage: Option<Cage>,
    #[arg(long, requires = "girth")]
    pub n: Option<usize>,
    #[arg(long)]
    pub girth: Option<u64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_REPAIR_BUDGET)]
    pub repair_budget: usize,
    /// Comma-separated core vertices carrying terminals (sub-terminal variant).
    #[arg(long, value_delimiter = ',')]
    pub attach: Option<Vec<usize>>,
    #[command(flatten)]
    pub params: ParamArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long, required_unless_present = "solution")]
    pub instance: Option<PathBuf>,
    #[arg(long)]
    pub solution: Option<PathBuf>,
    #[arg(long)]
    pub ignore_edge_budget: bool,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long, default_value = "voronoi")]
    pub method: Solver,
    #[arg(long, default_value_t = 1_000_000)]
    pub partition_budget: usize,
    /// Embed the instance in the solution file instead of referencing it.
    #[arg(long)]
    pub inline: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub solution: PathBuf,
    /// Overrides the instance referenced by the solution file.
    #[arg(long)]
    pub instance: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CoverArgs {
    #[arg(long)]
    pub instance: Option<PathBuf>,
    #[arg(long)]
    pub solution: PathBuf,
    #[arg(long)]
    pub s: usize,
    #[arg(long, default_value_t = 10_000)]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Path budget for the high-cov search.
    #[arg(long, default_value_t = DEFAULT_PATH_BUDGET)]
    pub budget: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CertifyArgs {
    #[arg(long)]
    pub instance: Option<PathBuf>,
    #[arg(long)]
    pub solution: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = DEFAULT_PATH_BUDGET)]
    pub budget: u64,
    #[arg(long)]
    pub ignore_edge_budget: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Fill the runtime column (makes output timing dependent).
    #[arg(long)]
    pub timing: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CountArgs {
    #[arg(long, required_unless_present = "cage", conflicts_with = "cage")]
    pub instance: Option<PathBuf>,
    #[arg(long)]
    pub cage: Option<Cage>,
    #[arg(long)]
    pub s: usize,
}

/// Parses `argv` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = cli.threads {
        builder = builder.num_threads(t);
    }
    let pool = match builder.build() {
        Ok(pool) => pool,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_FAILED;
        }
    };
    match pool.install(|| execute(&cli)) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Argument(_) | Error::ParameterDomain(_) => EXIT_USAGE,
                _ => EXIT_FAILED,
            }
        }
    }
}

fn execute(cli: &Cli) -> Result<i32> {
    match &cli.command {
        Command::Gen(a) => gen(a),
        Command::Validate(a) => validate(a),
        Command::Solve(a) => solve(a),
        Command::Eval(a) => eval(a),
        Command::Cover(a) => cover(a),
        Command::Certify(a) => certify_cmd(a),
        Command::Sweep(a) => sweep_cmd(a, cli.threads),
        Command::CountPaths(a) => count_paths(a),
    }
}

fn emit_json<T: Serialize>(value: &T, out: Option<&FsPath>) -> Result<()> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

/// Human summary: stdout when the data went to a file, stderr otherwise.
fn summary(out: Option<&FsPath>, line: &str) {
    if out.is_some() {
        println!("{line}");
    } else {
        eprintln!("{line}");
    }
}

fn gen(a: &GenArgs) -> Result<i32> {
    let (core, target_girth) = match (a.cage, a.n, a.girth) {
        (Some(cage), _, _) => (cage.graph(), cage.girth()),
        (None, Some(n), Some(g)) => {
            (generate_cubic_high_girth(n, g, a.seed, Strategy::RandomRepair { budget: a.repair_budget })?, g)
        }
        _ => return Err(Error::Argument("gen needs --cage or both --n and --girth".into())),
    };
    let k = a.attach.as_ref().map_or(core.vertex_count(), Vec::len);
    let p = &a.params;
    let overrides = Overrides { m: p.m, s: p.s, l: p.l, g: p.g };
    let params = match p.mode {
        ModeArg::Paper => derive_params(k as u128, Mode::Paper, &overrides)?,
        ModeArg::Custom => {
            let overrides = Overrides { g: Some(p.g.unwrap_or(target_girth)), ..overrides };
            derive_params(k as u128, Mode::Custom, &overrides)?
        }
    };
    let inst = match &a.attach {
        Some(attach) => build_subterminal_instance(core, attach.clone(), params)?,
        None => build_instance(core, params)?,
    };
    let out = a.out.as_deref();
    emit_json(&inst.to_file(), out)?;
    let params = inst.params();
    summary(
        out,
        &format!(
            "instance: n = {}, k = {}, M = {}, S = {}, L = {}, g = {}",
            inst.core().vertex_count(),
            params.k,
            params.m,
            params.s,
            params.l,
            params.g
        ),
    );
    Ok(EXIT_OK)
}

fn load_pair(instance: Option<&FsPath>, solution: &FsPath) -> Result<(Instance, SolutionFile)> {
    let file = SolutionFile::load(solution)?;
    let inst = match instance {
        Some(path) => Instance::load(path)?,
        None => file.load_instance(solution.parent())?,
    };
    Ok((inst, file))
}

fn validate(a: &ValidateArgs) -> Result<i32> {
    let report = match &a.solution {
        Some(path) => {
            let (inst, file) = load_pair(a.instance.as_deref(), path)?;
            let mut report = validate_instance(&inst);
            let sol = file.into_solution(&inst)?;
            let mut sol_report = validate_solution(&sol);
            if a.ignore_edge_budget {
                sol_report.checks.retain(|c| c.name != "edge budget");
            }
            report.checks.extend(sol_report.checks);
            report
        }
        None => validate_instance(&Instance::load(a.instance.as_ref().expect("required by clap"))?),
    };
    print!("{report}");
    Ok(if report.passed() { EXIT_OK } else { EXIT_FAILED })
}

fn solve(a: &SolveArgs) -> Result<i32> {
    let inst = Instance::load(&a.instance)?;
    let sol = a.method.solve(&inst, a.partition_budget)?;
    let instance = if a.inline {
        InstanceRef::Inline(Box::new(inst.to_file()))
    } else {
        InstanceRef::Path(std::path::absolute(&a.instance)?)
    };
    let out = a.out.as_deref();
    emit_json(&sol.to_file(instance), out)?;
    let report = stretch(&sol);
    summary(out, &format!("{}: |E(H)| = {}, stretch = {}", a.method.name(), sol.h().edge_count(), report.max_ratio_decimal));
    Ok(EXIT_OK)
}

fn eval(a: &EvalArgs) -> Result<i32> {
    let (inst, file) = load_pair(a.instance.as_deref(), &a.solution)?;
    let sol = file.into_solution(&inst)?;
    let report = stretch(&sol);
    let out = a.out.as_deref();
    emit_json(&report, out)?;
    let witness = report.witness.map_or("none".to_string(), |(x, y)| format!("t{x}, t{y}"));
    summary(out, &format!("stretch = {} ({}), witness {witness}", report.max_ratio_decimal, report.max_ratio));
    Ok(EXIT_OK)
}

#[derive(Debug, Serialize)]
struct CoverReport {
    family_size: usize,
    source_edges: Vec<(usize, usize)>,
    estimate: CovEstimate,
    high_cov: HighCov,
}

fn cover(a: &CoverArgs) -> Result<i32> {
    let (inst, file) = load_pair(a.instance.as_deref(), &a.solution)?;
    let sol = file.into_solution(&inst)?;
    let q = build_cover_family(&sol)?;
    let estimate = estimate_cov_distribution(&inst, &q, a.s, a.trials, a.seed)?;
    let high_cov = find_high_cov_path(&inst, &q, inst.params().m as usize, a.budget, a.seed)?;
    let report = CoverReport { family_size: q.len(), source_edges: q.source_edges, estimate, high_cov };
    let out = a.out.as_deref();
    emit_json(&report, out)?;
    let e = &report.estimate;
    summary(
        out,
        &format!(
            "|Q| = {}, Pr[cov >= 2] = {:.6} (bound {:.6}), high-cov path cov = {}",
            report.family_size, e.fraction_at_least_two, e.analytic_bound, report.high_cov.cov.value
        ),
    );
    Ok(EXIT_OK)
}

fn certify_cmd(a: &CertifyArgs) -> Result<i32> {
    let (inst, file) = load_pair(a.instance.as_deref(), &a.solution)?;
    let sol: SprSolution<'_> = file.into_solution(&inst)?;
    let opts = CertifyOptions { ignore_edge_budget: a.ignore_edge_budget, budget: a.budget, seed: a.seed };
    let cert = certify(&inst, &sol, &opts)?;
    let out = a.out.as_deref();
    emit_json(&cert, out)?;
    let exact = cert.exact_ratio.map_or("NA".to_string(), |r| r.decimal());
    summary(out, &format!("case = {}, ratio_bound = {}, exact_ratio = {exact}", cert.case.name(), cert.ratio_bound_decimal));
    Ok(if cert.case == Case::PreconditionsUnmet { EXIT_UNMET } else { EXIT_OK })
}

fn sweep_cmd(a: &SweepArgs, threads: Option<usize>) -> Result<i32> {
    let mut cfg = SweepConfig::load(&a.config)?;
    cfg.timing |= a.timing;
    if threads.is_some() {
        cfg.threads = threads;
    }
    let rows = sweep(&cfg, a.config.parent())?;
    match &a.out {
        Some(path) => {
            write_csv(&rows, std::fs::File::create(path)?)?;
            let failed = rows.iter().filter(|r| !r.error.is_empty()).count();
            println!("{} rows, {failed} failed", rows.len());
        }
        None => write_csv(&rows, std::io::stdout().lock())?,
    }
    Ok(EXIT_OK)
}

fn count_paths(a: &CountArgs) -> Result<i32> {
    let core = match (&a.instance, a.cage) {
        (Some(path), _) => Instance::load(path)?.core().clone(),
        (None, Some(cage)) => cage.graph(),
        (None, None) => return Err(Error::Argument("count-paths needs --instance or --cage".into())),
    };
    println!("{}", count_length_s_paths(&core, a.s));
    Ok(EXIT_OK)
}
