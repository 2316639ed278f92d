//! `domp` — command line for the discrete ordered median toolkit.
//!
//! Subcommands generate instances, solve them exactly by enumeration,
//! export the equality system and the lifted conic programs as JSON, run
//! the first-order relaxation for lower bounds, and execute verification
//! campaigns. All subcommands are deterministic given their inputs and
//! seeds.

mod formats;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use domp_core::dnn::{solve_dnn, DnnSettings};
use domp_core::gen::{gen_instance, WeightPreset};
use domp_core::instance::Instance;
use domp_core::lift::{build_cp0, build_cp_explicit, ConeTag, ConicProgram, FamilyFix};
use domp_core::oracle::{solve_enumerate, solve_enumerate_extended};
use domp_core::qform::build_linear_system;

use formats::{
    emit_json, matrix_csv, read_instance, InstanceDoc, ProgramDoc, ReportDoc, ResultDoc, SystemDoc,
};
use verify::{run_verification, CheckKind, VerifyConfig, ALL_CHECKS};

#[derive(Parser)]
#[command(
    name = "domp",
    version,
    about = "Discrete ordered median problems: exact solves, conic exports, relaxation bounds"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a seeded instance and write it as JSON.
    Gen(GenArgs),
    /// Solve an instance exactly by exhaustive enumeration.
    SolveExact(SolveArgs),
    /// Export the binary quadratic formulation's equality system.
    BuildMiqp(BuildMiqpArgs),
    /// Export a lifted conic program (moment relaxation).
    BuildCp(BuildCpArgs),
    /// Lower-bound an instance with the doubly nonnegative relaxation.
    RelaxDnn(RelaxArgs),
    /// Run verification checks and emit a pass/fail report.
    Verify(VerifyArgs),
    /// Write every export for an instance into a directory.
    Export(ExportArgs),
}

#[derive(Args)]
struct GenArgs {
    /// Number of sites (and clients).
    #[arg(long)]
    n: usize,
    /// Number of sites to open.
    #[arg(long)]
    p: usize,
    /// Seed identifying the cost draw.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Weight preset: median, center, or trimmed:K1,K2.
    #[arg(long, default_value = "median", conflicts_with = "lambda")]
    preset: String,
    /// Explicit comma-separated weight vector (overrides --preset).
    #[arg(long)]
    lambda: Option<String>,
    /// Output file (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SolveArgs {
    /// Instance JSON file.
    #[arg(long)]
    instance: PathBuf,
    /// Emit machine-readable JSON instead of a sentence.
    #[arg(long)]
    json: bool,
    /// Output file (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BuildMiqpArgs {
    /// Instance JSON file.
    #[arg(long)]
    instance: PathBuf,
    /// Output file (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CpVariant {
    /// Corner + border + squared rows, derived symbolically.
    Cp0,
    /// The spelled-out inner-block family list, transcribed literally.
    Explicit,
    /// The spelled-out list with defective families replaced by their
    /// symbolic squares.
    ExplicitCorrected,
}

#[derive(Args)]
struct BuildCpArgs {
    /// Instance JSON file.
    #[arg(long)]
    instance: PathBuf,
    /// Which program to build.
    #[arg(long, value_enum, default_value_t = CpVariant::Cp0)]
    variant: CpVariant,
    /// Output file (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RelaxArgs {
    /// Instance JSON file.
    #[arg(long)]
    instance: PathBuf,
    /// Seed for the solver's starting point (never affects the answer).
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Primal and dual residual tolerance.
    #[arg(long, default_value_t = 1e-7)]
    tol: f64,
    /// Iteration cap.
    #[arg(long, default_value_t = 200_000)]
    max_iters: usize,
    /// Emit machine-readable JSON instead of a sentence.
    #[arg(long)]
    json: bool,
    /// Output file (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the solution matrix of the normalized program as CSV.
    #[arg(long)]
    matrix_out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Instance JSON file.
    #[arg(long)]
    instance: PathBuf,
    /// Comma-separated checks to run (default: all of
    /// lift,recover,surrogate,mu,bound,sort).
    #[arg(long, value_delimiter = ',')]
    checks: Vec<CheckKind>,
    /// Residual tolerance for the algebraic checks.
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Seed for the randomized checks.
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// Emit the report as JSON instead of one line per check.
    #[arg(long)]
    json: bool,
    /// Output file (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExportArgs {
    /// Instance JSON file.
    #[arg(long)]
    instance: PathBuf,
    /// Directory receiving instance.json, miqp.json, cp0.json,
    /// explicit.json, and explicit-corrected.json.
    #[arg(long)]
    out_dir: PathBuf,
}

fn main() -> ExitCode {
    match dispatch() {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

fn dispatch() -> Result<ExitCode> {
    let cli = Cli::parse();
    match cli.command {
        Command::Gen(args) => cmd_gen(args)?,
        Command::SolveExact(args) => cmd_solve_exact(args)?,
        Command::BuildMiqp(args) => cmd_build_miqp(args)?,
        Command::BuildCp(args) => cmd_build_cp(args)?,
        Command::RelaxDnn(args) => cmd_relax_dnn(args)?,
        Command::Verify(args) => return cmd_verify(args),
        Command::Export(args) => cmd_export(args)?,
    }
    Ok(ExitCode::SUCCESS)
}

fn parse_preset(text: &str) -> Result<WeightPreset> {
    match text {
        "median" => Ok(WeightPreset::Median),
        "center" => Ok(WeightPreset::Center),
        other => {
            if let Some(spec) = other.strip_prefix("trimmed:") {
                let (k1, k2) = spec
                    .split_once(',')
                    .context("trimmed preset needs the form trimmed:K1,K2")?;
                return Ok(WeightPreset::Trimmed(
                    k1.trim().parse().context("parsing K1")?,
                    k2.trim().parse().context("parsing K2")?,
                ));
            }
            bail!("unknown preset '{other}' (expected median, center, or trimmed:K1,K2)")
        }
    }
}

fn cmd_gen(args: GenArgs) -> Result<()> {
    let preset = match &args.lambda {
        Some(text) => WeightPreset::Custom(
            text.split(',')
                .map(|part| part.trim().parse::<f64>().context("parsing --lambda"))
                .collect::<Result<Vec<f64>>>()?,
        ),
        None => parse_preset(&args.preset)?,
    };
    let instance = gen_instance(args.n, args.p, args.seed, &preset)?;
    emit_json(&InstanceDoc::from_instance(&instance), args.out.as_deref())
}

fn cmd_solve_exact(args: SolveArgs) -> Result<()> {
    let instance = read_instance(&args.instance)?;
    let (value, open_sets, extended) = if instance.is_plain() {
        let (value, winners) = solve_enumerate(&instance)?;
        (value, winners, false)
    } else {
        let solution = solve_enumerate_extended(&instance)?;
        (solution.value, vec![solution.open_sites], true)
    };
    if args.json {
        #[derive(serde::Serialize)]
        struct SolveDoc {
            value: f64,
            open_sets: Vec<Vec<usize>>,
            extended: bool,
        }
        emit_json(
            &SolveDoc {
                value,
                open_sets,
                extended,
            },
            args.out.as_deref(),
        )
    } else {
        let sets = open_sets
            .iter()
            .map(|s| format!("{s:?}"))
            .collect::<Vec<_>>()
            .join(", ");
        let line = format!("optimum {value} at open sites {sets}\n");
        match &args.out {
            Some(path) => std::fs::write(path, line)?,
            None => print!("{line}"),
        }
        Ok(())
    }
}

fn cmd_build_miqp(args: BuildMiqpArgs) -> Result<()> {
    let instance = read_instance(&args.instance)?;
    let system = build_linear_system(&instance);
    emit_json(&SystemDoc::from_system(&system), args.out.as_deref())
}

fn build_variant(instance: &Instance, variant: CpVariant) -> (ConicProgram, Vec<FamilyFix>) {
    match variant {
        CpVariant::Cp0 => (build_cp0(instance, ConeTag::Dnn), Vec::new()),
        CpVariant::Explicit => build_cp_explicit(instance, false),
        CpVariant::ExplicitCorrected => build_cp_explicit(instance, true),
    }
}

fn cmd_build_cp(args: BuildCpArgs) -> Result<()> {
    let instance = read_instance(&args.instance)?;
    let (program, fixes) = build_variant(&instance, args.variant);
    // The replacement log goes to stderr so stdout stays pure JSON.
    for fix in &fixes {
        eprintln!(
            "family {}: literal form {} {}: {}",
            fix.family,
            fix.literal,
            if fix.applied { "replaced by" } else { "kept over" },
            fix.corrected
        );
    }
    emit_json(&ProgramDoc::from_program(&program), args.out.as_deref())
}

/// Largest power of two at or above `x`.
fn power_of_two_at_least(x: f64) -> f64 {
    let mut scale = 1.0;
    while scale < x {
        scale *= 2.0;
    }
    scale
}

fn cmd_relax_dnn(args: RelaxArgs) -> Result<()> {
    let instance = read_instance(&args.instance)?;
    // Normalize plain instances by a power of two: exact in floating
    // point, and the splitting method converges orders of magnitude
    // faster near unit scale. The plain objective is homogeneous in the
    // costs, so the bound divides back out.
    let (solved_instance, factor) = if instance.is_plain() {
        let max_cost = instance.costs().iter().fold(0.0f64, |a, &c| a.max(c));
        let factor = 1.0 / power_of_two_at_least(max_cost.max(1.0));
        (instance.scaled_plain(factor)?, factor)
    } else {
        (instance.clone(), 1.0)
    };
    let program = build_cp0(&solved_instance, ConeTag::Dnn);
    let settings = DnnSettings {
        seed: args.seed,
        primal_tol: args.tol,
        dual_tol: args.tol,
        max_iters: args.max_iters,
        ..DnnSettings::default()
    };
    let result = solve_dnn(&program, &settings)?;
    let bound = result.bound / factor;
    if factor != 1.0 {
        eprintln!("costs normalized by {factor}; reported bound is rescaled, residuals are in normalized units");
    }
    if let Some(path) = &args.matrix_out {
        std::fs::write(path, matrix_csv(&result.matrix))
            .with_context(|| format!("writing {}", path.display()))?;
    }
    if args.json {
        emit_json(&ResultDoc::from_result(&result, bound), args.out.as_deref())
    } else {
        let line = format!(
            "lower bound {bound:.6} ({}, {} iterations, residuals {:.2e}/{:.2e})\n",
            result.status.as_str(),
            result.iters,
            result.primal_res,
            result.dual_res
        );
        match &args.out {
            Some(path) => std::fs::write(path, line)?,
            None => print!("{line}"),
        }
        Ok(())
    }
}

fn cmd_verify(args: VerifyArgs) -> Result<ExitCode> {
    let instance = read_instance(&args.instance)?;
    let config = VerifyConfig {
        checks: if args.checks.is_empty() {
            ALL_CHECKS.to_vec()
        } else {
            args.checks.clone()
        },
        tol: args.tol,
        seed: args.seed,
    };
    let checks = run_verification(&instance, &config);
    let all_pass = checks.iter().all(|c| c.pass);
    if args.json {
        let report = ReportDoc {
            instance: InstanceDoc::from_instance(&instance),
            checks,
        };
        emit_json(&report, args.out.as_deref())?;
    } else {
        let mut text = String::new();
        for check in &checks {
            text.push_str(&format!(
                "{:9} {}  residual {:.2e}  {}\n",
                check.name,
                if check.pass { "pass" } else { "FAIL" },
                check.residual,
                check.detail
            ));
        }
        match &args.out {
            Some(path) => std::fs::write(path, text)?,
            None => print!("{text}"),
        }
    }
    Ok(if all_pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}

fn cmd_export(args: ExportArgs) -> Result<()> {
    let instance = read_instance(&args.instance)?;
    std::fs::create_dir_all(&args.out_dir)
        .with_context(|| format!("creating {}", args.out_dir.display()))?;
    emit_json(
        &InstanceDoc::from_instance(&instance),
        Some(&args.out_dir.join("instance.json")),
    )?;
    let system = build_linear_system(&instance);
    emit_json(
        &SystemDoc::from_system(&system),
        Some(&args.out_dir.join("miqp.json")),
    )?;
    for (variant, file) in [
        (CpVariant::Cp0, "cp0.json"),
        (CpVariant::Explicit, "explicit.json"),
        (CpVariant::ExplicitCorrected, "explicit-corrected.json"),
    ] {
        let (program, _) = build_variant(&instance, variant);
        emit_json(
            &ProgramDoc::from_program(&program),
            Some(&args.out_dir.join(file)),
        )?;
    }
    Ok(())
}
