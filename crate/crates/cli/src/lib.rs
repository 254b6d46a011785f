//! `qts`: solve, verify, generate and pseudo-invert from JSON files.
//!
//! Every command prints a [`RunReport`] on stdout. Exit codes: 0 for a
//! consistent system or a verified solution, 2 for an inconsistent system or
//! a rejected solution, 1 for usage, IO, parse and shape errors.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use qts_core::ginverse::{tensor_penrose, tensor_pinv};
use qts_core::matrix::DEFAULT_RANK_TOL;
use qts_core::solvers::{SolverConfig, DEFAULT_TOL_RES};
use qts_core::toolkit::{
    gen_consistent, gen_inconsistent, random_assignment, verify_solution, InstanceBundle, InstanceSpec, SolutionFile,
    SystemKind,
};
use qts_core::QTensor;

pub mod report;

pub use report::{RunReport, Tolerances, Verdict};

#[derive(Debug, Parser)]
#[command(name = "qts", version, about = "Quaternion tensor equation solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve the system in an instance bundle.
    Solve(SolveArgs),
    /// Check a solution file against an instance bundle.
    Verify(VerifyArgs),
    /// Write a random instance bundle.
    Gen(GenArgs),
    /// Moore-Penrose inverse of a tensor file.
    Pinv(PinvArgs),
}

#[derive(Debug, Args)]
struct Common {
    /// Also write the report to this file.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Add the wall-clock duration to the report.
    #[arg(long)]
    timing: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Params {
    Zero,
    Random,
}

#[derive(Debug, Args)]
struct SolveArgs {
    input: PathBuf,
    /// Tolerance of the solvability conditions.
    #[arg(long, env = "QTS_TOL", default_value_t = DEFAULT_TOL_RES)]
    tol: f64,
    /// Relative singular value cutoff of the pseudoinverses.
    #[arg(long, default_value_t = DEFAULT_RANK_TOL)]
    rank_tol: f64,
    /// Free parameters of the written solution.
    #[arg(long, value_enum, default_value_t = Params::Zero)]
    params: Params,
    /// Seed of the random parameters.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Solution file to write.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    instance: PathBuf,
    solution: PathBuf,
    /// Largest accepted residual / (1 + ‖E‖).
    #[arg(long, env = "QTS_TOL", default_value_t = DEFAULT_TOL_RES)]
    tol: f64,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct GenArgs {
    /// axb, two_term, mixed, triple or chain.
    #[arg(long)]
    kind: SystemKind,
    /// `2,3` for every index space, or `I=2,3;J=2` per space.
    #[arg(long)]
    modes: Option<String>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Push one right-hand side out of reach.
    #[arg(long)]
    inconsistent: bool,
    /// Singular value spread of the coefficients.
    #[arg(long)]
    conditioning: Option<f64>,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct PinvArgs {
    input: PathBuf,
    /// Relative singular value cutoff.
    #[arg(long, default_value_t = DEFAULT_RANK_TOL)]
    tol: f64,
    /// File for the inverse.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

/// Result of one invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct Invocation {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Runs `qts` with `args` (program name first).
pub fn run(args: &[String]) -> Invocation {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    Invocation { code: 0, stdout: text, stderr: String::new() }
                }
                _ => Invocation { code: 1, stdout: String::new(), stderr: text },
            };
        }
    };
    let echo = args.iter().skip(1).cloned().collect();
    match execute(cli.command, echo) {
        Ok(report) => Invocation { code: report.verdict.exit_code(), stdout: report.to_json() + "\n", stderr: String::new() },
        Err(e) => Invocation { code: 1, stdout: String::new(), stderr: format!("error: {e:#}\n") },
    }
}

fn execute(command: Command, echo: Vec<String>) -> Result<RunReport> {
    let start = Instant::now();
    let (mut report, common) = match command {
        Command::Solve(a) => (solve(&a, echo)?, a.common),
        Command::Verify(a) => (verify(&a, echo)?, a.common),
        Command::Gen(a) => (gen(&a, echo)?, a.common),
        Command::Pinv(a) => (pinv(&a, echo)?, a.common),
    };
    if common.timing {
        report.duration_ms = Some(start.elapsed().as_secs_f64() * 1e3);
    }
    if let Some(path) = &common.report {
        write(path, &(report.to_json() + "\n"))?;
    }
    Ok(report)
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

fn load_bundle(path: &Path) -> Result<InstanceBundle> {
    InstanceBundle::from_json(&read(path)?).with_context(|| format!("in {}", path.display()))
}

fn solve(a: &SolveArgs, echo: Vec<String>) -> Result<RunReport> {
    let bundle = load_bundle(&a.input)?;
    let system = bundle.system().with_context(|| format!("in {}", a.input.display()))?;
    let cfg = SolverConfig { tol_res: a.tol, rank_tol: a.rank_tol };
    let outcome = system.solve(&cfg)?;

    let tolerances = Tolerances { tol_res: Some(a.tol), rank_tol: Some(a.rank_tol) };
    let verdict = if outcome.consistent { Verdict::Consistent } else { Verdict::Inconsistent };
    let mut report = RunReport::new(echo, tolerances, verdict);
    report.kind = Some(system.kind());
    report.violated = outcome.violated().map(|c| c.label.clone()).collect();
    if outcome.consistent {
        let assignment = match a.params {
            Params::Zero => BTreeMap::new(),
            Params::Random => random_assignment(&outcome.all_slots(), a.seed),
        };
        let unknowns = outcome.instantiate(&assignment)?;
        report.residuals = verify_solution(&system, &unknowns)?.equations;
        if let Some(out) = &a.out {
            write(out, &(SolutionFile { unknowns }.to_json() + "\n"))?;
            report.outputs.push(out.display().to_string());
        }
    }
    report.conditions = outcome.condition_residuals;
    Ok(report)
}

fn verify(a: &VerifyArgs, echo: Vec<String>) -> Result<RunReport> {
    let bundle = load_bundle(&a.instance)?;
    let system = bundle.system().with_context(|| format!("in {}", a.instance.display()))?;
    let solution = SolutionFile::from_json(&read(&a.solution)?).with_context(|| format!("in {}", a.solution.display()))?;
    let checked = verify_solution(&system, &solution.unknowns).with_context(|| format!("in {}", a.solution.display()))?;
    let verdict = if checked.equations.iter().all(|e| e.ratio < a.tol) { Verdict::Verified } else { Verdict::Rejected };
    let mut report = RunReport::new(echo, Tolerances { tol_res: Some(a.tol), rank_tol: None }, verdict);
    report.kind = Some(system.kind());
    report.residuals = checked.equations;
    Ok(report)
}

/// Parses `2,3` or `I=2,3;J=2`.
fn parse_modes(spec: InstanceSpec, text: &str) -> Result<InstanceSpec> {
    let list = |s: &str| -> Result<Vec<usize>> {
        s.split(',')
            .map(|v| v.trim().parse::<usize>().map_err(|_| anyhow!("invalid mode size {v:?} in --modes {text:?}")))
            .collect()
    };
    if !text.contains('=') {
        return Ok(spec.with_all_modes(&list(text)?));
    }
    let mut spec = spec;
    for part in text.split(';').filter(|p| !p.trim().is_empty()) {
        let Some((space, modes)) = part.split_once('=') else {
            bail!("expected SPACE=m1,m2 in --modes, got {part:?}");
        };
        spec = spec.with_modes(space.trim(), &list(modes)?);
    }
    Ok(spec)
}

fn gen(a: &GenArgs, echo: Vec<String>) -> Result<RunReport> {
    let mut spec = InstanceSpec::new(a.kind, a.seed);
    if let Some(m) = &a.modes {
        spec = parse_modes(spec, m)?;
    }
    if let Some(k) = a.conditioning {
        spec = spec.with_conditioning(k);
    }
    spec.validate()?;
    let instance = if a.inconsistent { gen_inconsistent(&spec)? } else { gen_consistent(&spec)? };
    write(&a.out, &(InstanceBundle::from(&instance).to_json() + "\n"))?;
    let mut report = RunReport::new(echo, Tolerances { tol_res: None, rank_tol: None }, Verdict::Generated);
    report.kind = Some(a.kind);
    report.outputs.push(a.out.display().to_string());
    Ok(report)
}

fn pinv(a: &PinvArgs, echo: Vec<String>) -> Result<RunReport> {
    let tensor: QTensor =
        serde_json::from_str(&read(&a.input)?).with_context(|| format!("cannot parse tensor in {}", a.input.display()))?;
    let p = tensor_pinv(&tensor, a.tol)?;
    let mut report = RunReport::new(echo, Tolerances { tol_res: None, rank_tol: Some(a.tol) }, Verdict::Computed);
    report.penrose = Some(tensor_penrose(&tensor, &p)?);
    if let Some(out) = &a.out {
        write(out, &(serde_json::to_string_pretty(&p)? + "\n"))?;
        report.outputs.push(out.display().to_string());
    }
    Ok(report)
}
