//! `kvf` — command-line tool for Killing vector field geometry: Killing
//! checks, Lie-algebra closures, orbit foliation classification on R^3,
//! orbit point clouds, trajectory exports, dimension stratification, and the
//! built-in verification scenarios.
//!
//! Exit codes: 0 success, 1 failed checks/verification, 2 usage or input
//! errors, 3 I/O errors.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use kvf_cli::scenario::{parse_point, ScenarioFile};
use kvf_cli::CliError;
use kvf_core::fields::GridSpec;
use kvf_core::flow::trajectory_with_step;
use kvf_core::orbit::{dimension_stratification, sample_orbit, BoxSpec, PointCloud};
use kvf_core::verify::{scenario_run, ScenarioReport, VerifyError, SCENARIO_NAMES};
use kvf_core::{classify, flow};

/// Geometry of Killing vector fields on flat space.
///
/// Scenario files are JSON: {"dim": n, "fields": [...], "points": {...},
/// "invariants": [...]}. A field is either an exact affine spec
/// {"matrix": [[...]], "offset": [...]} or an expression spec
/// {"components": ["-y", "x", "0"]}. Expressions use variables x1..xn
/// (aliases x, y, z, w for n <= 4), numbers, + - * / ^ with integer
/// exponents, parentheses, and the functions sin, cos, exp.
#[derive(Parser)]
#[command(name = "kvf", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check every field of the file against the Killing criterion
    Check {
        file: PathBuf,
        /// Residual tolerance for grid-based checks
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Print the bracket-closure basis of the family
    Closure {
        file: PathBuf,
        /// Relative rank tolerance
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Classify the orbit foliation of an R^3 family (prints JSON)
    Classify {
        file: PathBuf,
        #[arg(long, default_value_t = classify::DEFAULT_CLASSIFY_TOL)]
        tol: f64,
        /// Seed for the generic-rank sampling
        #[arg(long, default_value_t = classify::DEFAULT_CLASSIFY_SEED)]
        seed: u64,
    },
    /// Sample an orbit point cloud and write CSV or PLY
    Orbit(OrbitArgs),
    /// Export one field's trajectory to CSV
    Flow(FlowArgs),
    /// Orbit-dimension census over a cube
    Stratify {
        file: PathBuf,
        /// Cube bounds as lo,hi
        #[arg(long = "box", allow_hyphen_values = true)]
        bounds: String,
        /// Grid points per axis
        #[arg(long)]
        res: usize,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Run verification scenarios ("all" or one of the registered names)
    Verify {
        #[arg(default_value = "all")]
        scenario: String,
        /// Emit the reports as JSON instead of tables
        #[arg(long)]
        json: bool,
    },
}

#[derive(Args)]
struct OrbitArgs {
    file: PathBuf,
    /// Start point, e.g. 1,0,0 (or a point name from the file)
    #[arg(long, allow_hyphen_values = true)]
    start: String,
    #[arg(long)]
    steps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Half-width of the uniform flow-time interval per step
    #[arg(long, default_value_t = 0.5)]
    t_scale: f64,
    /// Output file; format chosen by extension (.csv or .ply)
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct FlowArgs {
    file: PathBuf,
    /// Index of the field within the file
    #[arg(long)]
    field: usize,
    #[arg(long, allow_hyphen_values = true)]
    start: String,
    #[arg(long, allow_negative_numbers = true)]
    t0: f64,
    #[arg(long, allow_negative_numbers = true)]
    t1: f64,
    #[arg(long)]
    samples: usize,
    /// Step size for the numeric integrator (expression fields)
    #[arg(long, default_value_t = flow::DEFAULT_STEP)]
    step: f64,
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn run(command: Command) -> Result<ExitCode, CliError> {
    match command {
        Command::Check { file, tol } => check(&file, tol),
        Command::Closure { file, tol } => closure(&file, tol),
        Command::Classify { file, tol, seed } => classify_cmd(&file, tol, seed),
        Command::Orbit(args) => orbit(&args),
        Command::Flow(args) => flow_cmd(&args),
        Command::Stratify {
            file,
            bounds,
            res,
            tol,
        } => stratify(&file, &bounds, res, tol),
        Command::Verify { scenario, json } => verify(&scenario, json),
    }
}

fn check(file: &Path, tol: f64) -> Result<ExitCode, CliError> {
    let scenario = ScenarioFile::load(file)?;
    let fields = scenario.fields()?;
    let grid = GridSpec::default();
    let mut any_failed = false;
    for (index, field) in fields.iter().enumerate() {
        let report = field
            .killing_check(&grid, tol)
            .map_err(|e| CliError::Data(format!("field {index}: {e}")))?;
        if report.passed() {
            println!(
                "field {index}: PASS (mode {:?}, max residual {:e})",
                report.mode, report.max_residual
            );
        } else {
            any_failed = true;
            println!(
                "field {index}: FAIL (mode {:?}, max residual {:e})",
                report.mode, report.max_residual
            );
            for w in &report.witnesses {
                match &w.point {
                    Some(p) => {
                        let coords: Vec<String> = p.iter().map(|v| format!("{v}")).collect();
                        println!(
                            "  condition ({}, {}): residual {:e} at [{}]",
                            w.i,
                            w.j,
                            w.residual,
                            coords.join(", ")
                        );
                    }
                    None => {
                        println!("  condition ({}, {}): residual {:e}", w.i, w.j, w.residual)
                    }
                }
            }
        }
    }
    Ok(if any_failed {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    })
}

fn closure(file: &Path, tol: f64) -> Result<ExitCode, CliError> {
    let scenario = ScenarioFile::load(file)?;
    let family = scenario.family()?;
    let closure = family.closure(tol);
    println!(
        "closure dimension: {} (generation depth {})",
        closure.len(),
        closure.generation_depth()
    );
    for (k, f) in closure.basis().iter().enumerate() {
        let rows: Vec<String> = (0..f.dim())
            .map(|i| {
                let cells: Vec<String> = (0..f.dim())
                    .map(|j| format!("{}", f.linear_part()[(i, j)]))
                    .collect();
                format!("[{}]", cells.join(", "))
            })
            .collect();
        let offset: Vec<String> = f.constant_part().iter().map(|v| format!("{v}")).collect();
        println!(
            "basis[{k}]: A = [{}], b = [{}]",
            rows.join(", "),
            offset.join(", ")
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn classify_cmd(file: &Path, tol: f64, seed: u64) -> Result<ExitCode, CliError> {
    let scenario = ScenarioFile::load(file)?;
    let family = scenario.family()?;
    let class = classify::classify_r3(&family, tol, seed).map_err(|e| match e {
        classify::ClassifyError::Unclassifiable(_) => CliError::Failure(e.to_string()),
        other => CliError::Data(other.to_string()),
    })?;
    let json = serde_json::to_string(&class).expect("classification serializes");
    println!("{json}");
    Ok(ExitCode::SUCCESS)
}

fn orbit(args: &OrbitArgs) -> Result<ExitCode, CliError> {
    let scenario = ScenarioFile::load(&args.file)?;
    if args.steps == 0 {
        return Err(CliError::Data("--steps must be at least 1".into()));
    }
    if args.t_scale <= 0.0 {
        return Err(CliError::Data("--t-scale must be positive".into()));
    }
    let family = scenario.family()?;
    let p0 = resolve_point(&scenario, &args.start)?;
    let mut cloud = sample_orbit(&family, &p0, args.steps, args.t_scale, args.seed);
    for (label, expression) in scenario.invariant_expressions()? {
        cloud
            .attach_invariant(&label, &expression)
            .map_err(|e| CliError::Failure(format!("invariant `{label}`: {e}")))?;
    }
    write_cloud(&cloud, &args.out)?;
    println!(
        "wrote {} points to {}",
        cloud.points().len(),
        args.out.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn flow_cmd(args: &FlowArgs) -> Result<ExitCode, CliError> {
    let scenario = ScenarioFile::load(&args.file)?;
    let fields = scenario.fields()?;
    let field = fields.get(args.field).ok_or_else(|| {
        CliError::Data(format!(
            "field index {} out of range ({} fields)",
            args.field,
            fields.len()
        ))
    })?;
    if args.samples < 2 {
        return Err(CliError::Data("--samples must be at least 2".into()));
    }
    if args.t0 > args.t1 {
        return Err(CliError::Data("--t0 must not exceed --t1".into()));
    }
    if args.step <= 0.0 {
        return Err(CliError::Data("--step must be positive".into()));
    }
    let p0 = resolve_point(&scenario, &args.start)?;
    let traj = trajectory_with_step(field, &p0, args.t0, args.t1, args.samples, args.step)
        .map_err(|e| CliError::Failure(format!("integration failed: {e}")))?;
    let mut buffer = Vec::new();
    traj.write_csv(&mut buffer).expect("vec write");
    write_bytes(&args.out, &buffer)?;
    println!("wrote {} samples to {}", args.samples, args.out.display());
    Ok(ExitCode::SUCCESS)
}

fn stratify(file: &Path, bounds: &str, res: usize, tol: f64) -> Result<ExitCode, CliError> {
    let scenario = ScenarioFile::load(file)?;
    let family = scenario.family()?;
    let parts: Vec<&str> = bounds.split(',').collect();
    if parts.len() != 2 {
        return Err(CliError::Data("--box expects lo,hi".into()));
    }
    let lo: f64 = parts[0]
        .trim()
        .parse()
        .map_err(|_| CliError::Data(format!("invalid bound `{}`", parts[0])))?;
    let hi: f64 = parts[1]
        .trim()
        .parse()
        .map_err(|_| CliError::Data(format!("invalid bound `{}`", parts[1])))?;
    if lo >= hi {
        return Err(CliError::Data("--box bounds must satisfy lo < hi".into()));
    }
    if res < 2 {
        return Err(CliError::Data("--res must be at least 2".into()));
    }
    let box_spec = BoxSpec::uniform(family.dim(), lo, hi);
    let summary = dimension_stratification(&family, &box_spec, res, tol);
    print!("{summary}");
    Ok(ExitCode::SUCCESS)
}

fn verify(scenario: &str, json: bool) -> Result<ExitCode, CliError> {
    let reports: Vec<ScenarioReport> = if scenario == "all" {
        SCENARIO_NAMES
            .iter()
            .map(|name| scenario_run(name).expect("registered name"))
            .collect()
    } else {
        vec![scenario_run(scenario).map_err(|e| match e {
            VerifyError::UnknownScenario(_) => CliError::Data(e.to_string()),
            other => CliError::Failure(other.to_string()),
        })?]
    };

    if json {
        let payload = if reports.len() == 1 {
            serde_json::to_string_pretty(&reports[0]).expect("report serializes")
        } else {
            serde_json::to_string_pretty(&reports).expect("reports serialize")
        };
        println!("{payload}");
    } else {
        for report in &reports {
            print!("{report}");
        }
        let failed = reports.iter().filter(|r| !r.passed()).count();
        if failed == 0 {
            println!("{} scenario(s) passed", reports.len());
        } else {
            println!("{failed} of {} scenario(s) FAILED", reports.len());
        }
    }

    Ok(if reports.iter().all(|r| r.passed()) {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

/// A start point is either a coordinate list or the name of a point
/// declared in the scenario file.
fn resolve_point(scenario: &ScenarioFile, text: &str) -> Result<nalgebra::DVector<f64>, CliError> {
    if text.contains(',') || text.parse::<f64>().is_ok() {
        parse_point(text, scenario.dim)
    } else {
        scenario.point(text)
    }
}

fn write_cloud(cloud: &PointCloud, out: &Path) -> Result<(), CliError> {
    let extension = out
        .extension()
        .and_then(|e| e.to_str())
        .map(str::to_ascii_lowercase);
    let mut buffer = Vec::new();
    match extension.as_deref() {
        Some("csv") => cloud.write_csv(&mut buffer).expect("vec write"),
        Some("ply") => cloud
            .write_ply(&mut buffer)
            .map_err(|e| CliError::Data(e.to_string()))?,
        _ => {
            return Err(CliError::Data(format!(
                "unsupported output format `{}` (use .csv or .ply)",
                out.display()
            )))
        }
    }
    write_bytes(out, &buffer)
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let mut file = std::fs::File::create(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })?;
    file.write_all(bytes).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}
