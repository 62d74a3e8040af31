//! `polyrad`: norms, numerical radii, range clouds and index bounds for
//! homogeneous polynomials stored as JSON files.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use polyrad::cases::{case_catalog, run_case, CaseReport};
use polyrad::index::index_upper_bound;
use polyrad::optim::{poly_norm, OptimConfig};
use polyrad::poly::HomPoly;
use polyrad::range::{RadiusConfig, RadiusEngine, RadiusEstimate};
use polyrad::Error;
use serde::{Deserialize, Serialize};

/// Allowed deviation of `‖Q‖` from 1 for commands that need a norm-one `Q`.
const UNIT_TOL: f64 = 1e-4;

#[derive(Parser)]
#[command(name = "polyrad", version, about = "Numerical radii of homogeneous polynomials between lp spaces")]
struct Cli {
    /// RunConfig JSON file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate ‖P‖.
    Norm { poly: PathBuf },
    /// Numerical radius of P relative to a norm-one Q.
    Radius {
        p: PathBuf,
        q: PathBuf,
        #[arg(long, value_enum, default_value_t = MethodArg::All)]
        method: MethodArg,
    },
    /// Points of the δ-slice numerical range.
    Range {
        p: PathBuf,
        q: PathBuf,
        #[arg(long)]
        delta: f64,
        #[arg(long, default_value_t = 1000)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
    /// Upper bound on the polynomial numerical index relative to Q.
    Index {
        q: PathBuf,
        #[arg(long, default_value_t = 32)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Run catalogue cases.
    Case {
        name: Option<String>,
        #[arg(long, conflicts_with = "name")]
        all: bool,
        /// List case names.
        #[arg(long, conflicts_with_all = ["name", "all"])]
        list: bool,
        /// Include wall times in the report instead of printing them to stderr.
        #[arg(long)]
        timings: bool,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum MethodArg {
    Attain,
    Ladder,
    Limit,
    All,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RunConfig {
    optim: OptimConfig,
    eta: f64,
    cross_tol: f64,
    delta_ladder: Vec<f64>,
    theta_points: usize,
    output: Option<PathBuf>,
    format: Option<Format>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let r = RadiusConfig::default();
        RunConfig {
            optim: r.optim,
            eta: r.eta,
            cross_tol: r.cross_tol,
            delta_ladder: r.delta_ladder,
            theta_points: r.theta_points,
            output: None,
            format: None,
        }
    }
}

impl RunConfig {
    fn radius(&self) -> RadiusConfig {
        RadiusConfig {
            optim: self.optim.clone(),
            eta: self.eta,
            cross_tol: self.cross_tol,
            delta_ladder: self.delta_ladder.clone(),
            theta_points: self.theta_points,
        }
    }
}

enum Failure {
    Input(String),
    Compute(String),
    Precondition(String),
    CaseFailed(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Input(_) => 2,
            Failure::Compute(_) | Failure::CaseFailed(_) => 3,
            Failure::Precondition(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Input(m) | Failure::Compute(m) | Failure::Precondition(m) | Failure::CaseFailed(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let msg = e.to_string();
        match e {
            Error::DimensionMismatch { .. }
            | Error::NonFinite { .. }
            | Error::InvalidSpace(_)
            | Error::FieldMismatch(_)
            | Error::ZeroVector
            | Error::CapTooLarge(_)
            | Error::InvalidPoly(_)
            | Error::InvalidArgument(_)
            | Error::UnknownCase(_)
            | Error::Json(_) => Failure::Input(msg),
            Error::NonFiniteObjective { .. }
            | Error::NoAttainment { .. }
            | Error::EmptySlice { .. }
            | Error::Inconsistent { .. }
            | Error::DegenerateComposition { .. } => Failure::Compute(msg),
        }
    }
}

type Outcome = Result<String, Failure>;

fn read_poly(path: &Path) -> Result<HomPoly, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::Input(format!("cannot read {}: {e}", path.display())))?;
    HomPoly::from_json(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn read_config(path: Option<&Path>) -> Result<RunConfig, Failure> {
    let Some(path) = path else {
        return Ok(RunConfig::default());
    };
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::Input(format!("cannot read {}: {e}", path.display())))?;
    let cfg: RunConfig = serde_json::from_str(&text)
        .map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    cfg.radius().validate()?;
    Ok(cfg)
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("reports serialize")
}

fn engine_for_unit(q: &HomPoly, cfg: &RadiusConfig) -> Result<RadiusEngine, Failure> {
    let engine = RadiusEngine::new(q, cfg)?;
    let n = engine.q_norm().value;
    if (n - 1.0).abs() > UNIT_TOL {
        return Err(Failure::Precondition(format!(
            "Q not norm-one: estimated norm {n} (tolerance {UNIT_TOL})"
        )));
    }
    Ok(engine)
}

#[derive(Serialize)]
struct Agreement {
    attainment_vs_ladder: f64,
    attainment_vs_limit: f64,
    max: f64,
}

#[derive(Serialize)]
struct AllMethods {
    attainment: RadiusEstimate,
    delta_ladder: RadiusEstimate,
    limit: RadiusEstimate,
    agreement: Agreement,
}

fn cmd_radius(p: &Path, q: &Path, method: MethodArg, cfg: &RadiusConfig) -> Outcome {
    let p = read_poly(p)?;
    let q = read_poly(q)?;
    let engine = engine_for_unit(&q, cfg)?;
    Ok(match method {
        MethodArg::Attain => to_json(&engine.attainment(&p)?),
        MethodArg::Ladder => to_json(&engine.delta_ladder(&p)?),
        MethodArg::Limit => to_json(&engine.limit(&p)?),
        MethodArg::All => {
            let attainment = engine.attainment(&p)?;
            let delta_ladder = engine.delta_ladder(&p)?;
            let limit = engine.limit(&p)?;
            let a = (attainment.value - delta_ladder.value).abs();
            let b = (attainment.value - limit.value).abs();
            to_json(&AllMethods {
                attainment,
                delta_ladder,
                limit,
                agreement: Agreement {
                    attainment_vs_ladder: a,
                    attainment_vs_limit: b,
                    max: a.max(b),
                },
            })
        }
    })
}

fn cmd_range(p: &Path, q: &Path, delta: f64, count: usize, seed: u64, format: Format, cfg: &RadiusConfig) -> Outcome {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Failure::Input(format!("--delta {delta} must lie in (0, 1)")));
    }
    if count == 0 {
        return Err(Failure::Input("--count must be at least 1".into()));
    }
    let p = read_poly(p)?;
    let q = read_poly(q)?;
    let engine = RadiusEngine::new(&q, cfg)?;
    let cloud = engine.range_cloud(&p, delta, count, seed)?;
    Ok(match format {
        Format::Csv => cloud.to_csv(),
        Format::Json => cloud.to_json(),
    })
}

fn cmd_index(q: &Path, samples: usize, seed: u64, cfg: &RadiusConfig) -> Outcome {
    let q = read_poly(q)?;
    engine_for_unit(&q, cfg)?;
    Ok(to_json(&index_upper_bound(&q, samples, seed, cfg)?))
}

/// The report text, plus a failure to raise once it has been written.
fn cmd_case(
    name: Option<&str>,
    all: bool,
    list: bool,
    timings: bool,
    cfg: &RadiusConfig,
) -> Result<(String, Option<Failure>), Failure> {
    if list {
        let names: Vec<&str> = case_catalog().iter().map(|c| c.name).collect();
        return Ok((names.join("\n"), None));
    }
    let names: Vec<String> = match (name, all) {
        (Some(n), false) => vec![n.to_string()],
        (None, true) => case_catalog().iter().map(|c| c.name.to_string()).collect(),
        _ => return Err(Failure::Input("give a case name, --all or --list".into())),
    };
    // reject unknown names before running anything
    for n in &names {
        if !case_catalog().iter().any(|c| c.name == n) {
            return Err(Error::UnknownCase(n.clone()).into());
        }
    }
    let mut reports: Vec<CaseReport> = Vec::new();
    for n in &names {
        let mut report = run_case(n, cfg)?;
        if !timings {
            if let Some(t) = report.wall_time_s.take() {
                eprintln!("case {n}: {t:.2}s");
            }
        }
        reports.push(report);
    }
    let text = if all { to_json(&reports) } else { to_json(&reports[0]) };
    let failed: Vec<&str> = reports.iter().filter(|r| !r.pass).map(|r| r.name.as_str()).collect();
    let failure = (!failed.is_empty())
        .then(|| Failure::CaseFailed(format!("failed cases: {}", failed.join(", "))));
    Ok((text, failure))
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(v) = std::env::var("POLYRAD_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::Input(format!("POLYRAD_THREADS={v} is not a positive integer")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Input(format!("cannot size the worker pool: {e}")))
}

fn run(cli: Cli) -> Result<(), Failure> {
    configure_threads()?;
    let run_cfg = read_config(cli.config.as_deref())?;
    let cfg = run_cfg.radius();
    let mut deferred = None;
    let text = match &cli.command {
        Command::Norm { poly } => {
            let p = read_poly(poly)?;
            to_json(&poly_norm(&p, &cfg.optim)?)
        }
        Command::Radius { p, q, method } => cmd_radius(p, q, *method, &cfg)?,
        Command::Range { p, q, delta, count, seed, format } => {
            let format = format.or(run_cfg.format).unwrap_or(Format::Csv);
            cmd_range(p, q, *delta, *count, *seed, format, &cfg)?
        }
        Command::Index { q, samples, seed } => cmd_index(q, *samples, *seed, &cfg)?,
        Command::Case { name, all, list, timings } => {
            let (text, failure) = cmd_case(name.as_deref(), *all, *list, *timings, &cfg)?;
            deferred = failure;
            text
        }
    };
    emit(text, cli.output.or(run_cfg.output))?;
    deferred.map_or(Ok(()), Err)
}

fn emit(mut text: String, output: Option<PathBuf>) -> Result<(), Failure> {
    if !text.ends_with('\n') {
        text.push('\n');
    }
    match output {
        Some(path) => fs::write(&path, text)
            .map_err(|e| Failure::Input(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
