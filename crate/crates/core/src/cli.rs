//! Command-line front end.
//!
//! Exit codes: 0 success, 2 a check or hypothesis failed, 3 no convergence,
//! 64 bad arguments, 65 invalid input, 70 internal error.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::axioms::{
    check_all, check_partial_metric_axioms, classify, metric_type_report, AxiomReport, ChainMode, CheckConfig,
    ClassLabel,
};
use crate::error::{Error, Result};
use crate::fixtures::{get_fixture, list_fixtures, run_fixture};
use crate::series::{
    certify_alpha_series, check_relaxed_hypotheses, kannan_rate_terms, RateSequence, DEFAULT_GRID,
};
use crate::solvers::{
    solve_admissible, solve_family, solve_pair_banach, solve_pair_kannan, solve_pair_power, AdmissibilityConfig,
    FamilyConfig, FixedPointReport, Gate, PhiFunction, Scheme, SolverConfig, StopReason,
};
use crate::spaces::{MapFamily, Point, Sampler, SelfMap, SpaceDescriptor, DEFAULT_TOL};
use crate::transforms::{TransformKind, TransformSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 2;
pub const EXIT_NOT_CONVERGED: i32 = 3;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_INPUT: i32 = 65;
pub const EXIT_INTERNAL: i32 = 70;

#[derive(Parser, Debug)]
#[command(name = "pmt", version, about = "Partial metric type spaces: axioms, transforms, series and fixed points")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Sampling seed. Falls back to PMT_SEED, then 0.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Absolute comparison tolerance.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Where to write the JSON report.
    #[arg(long, global = true)]
    report_out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample the axioms of a space.
    Check {
        #[arg(long)]
        space: PathBuf,
        /// Tuples per sampling stream.
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long, default_value = "exact")]
        chain_mode: String,
        /// Which axioms: pm, metric-type or all.
        #[arg(long, default_value = "pm")]
        axioms: String,
        /// Also report the class labels the space earns.
        #[arg(long)]
        classify: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Build a new space from an existing one.
    Transform {
        #[arg(long)]
        space: PathBuf,
        /// pt, basepoint, dp, power or sum.
        #[arg(long)]
        kind: String,
        /// Basepoint coordinates, comma separated.
        #[arg(long)]
        x0: Option<String>,
        /// Exponent for `power`.
        #[arg(long)]
        q: Option<f64>,
        /// Second space for `sum`.
        #[arg(long)]
        second: Option<PathBuf>,
        #[arg(long)]
        samples: Option<usize>,
        /// Where to write the constructed space.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Certify a rate sequence as an α-series, or check the relaxed conditions.
    Series {
        /// CSV with a single `a_i` column.
        #[arg(long, conflicts_with = "fixture")]
        rates: Option<PathBuf>,
        /// Take coefficients from a family fixture.
        #[arg(long)]
        fixture: Option<String>,
        /// Comma separated λ grid.
        #[arg(long)]
        grid: Option<String>,
        #[arg(long)]
        horizon: Option<usize>,
        #[arg(long)]
        with_2s_factor: bool,
        /// Check limsup and Σ C_n instead of the α-series window.
        #[arg(long, requires = "fixture")]
        relaxed: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Run a fixed-point solver.
    Solve {
        /// Space document; optional when the config names a fixture.
        #[arg(long)]
        space: Option<PathBuf>,
        /// banach-pair, kannan-pair, admissible or family.
        #[arg(long)]
        scheme: String,
        #[arg(long)]
        config: PathBuf,
        /// Starting point, comma separated.
        #[arg(long)]
        x0: Option<String>,
        #[arg(long)]
        trace_out: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// The example catalog.
    Fixtures {
        #[command(subcommand)]
        action: FixtureAction,
    },
}

#[derive(Subcommand, Debug)]
enum FixtureAction {
    List,
    Run {
        name: String,
        /// Directory for `<name>.json` and `<name>.trace.csv`.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
}

/// Parses `argv` (program name first), runs the command and returns the
/// process exit code.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Run(e)) => {
            eprintln!("error: {e}");
            if e.is_validation() {
                EXIT_INPUT
            } else {
                EXIT_INTERNAL
            }
        }
    }
}

enum Failure {
    Usage(String),
    Run(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Run(e)
    }
}

type Outcome = std::result::Result<i32, Failure>;

fn resolve_seed(flag: Option<u64>) -> std::result::Result<u64, Failure> {
    if let Some(s) = flag {
        return Ok(s);
    }
    match std::env::var("PMT_SEED") {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Failure::Usage(format!("PMT_SEED `{v}` is not an unsigned integer"))),
        Err(_) => Ok(0),
    }
}

fn parse_point(text: &str) -> std::result::Result<Point, Failure> {
    let coords = text
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|_| Failure::Usage(format!("`{text}` is not a comma separated list of numbers")))?;
    Ok(Point::new(coords)?)
}

fn parse_list(text: &str) -> std::result::Result<Vec<f64>, Failure> {
    text.split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|_| Failure::Usage(format!("`{text}` is not a comma separated list of numbers")))
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::rejected(format!("cannot read {}: {e}", path.display())))
}

fn read_space(path: &Path) -> Result<SpaceDescriptor> {
    SpaceDescriptor::from_json(&read_text(path)?)
        .map_err(|e| Error::rejected(format!("{}: {e}", path.display())))
}

/// Fails early when an output file could not be created.
fn check_output(path: &Option<PathBuf>) -> Result<()> {
    if let Some(p) = path {
        let dir = parent_dir(p);
        if !dir.is_dir() {
            return Err(Error::rejected(format!("output directory {} does not exist", dir.display())));
        }
        if p.is_dir() {
            return Err(Error::rejected(format!("{} is a directory", p.display())));
        }
    }
    Ok(())
}

fn parent_dir(p: &Path) -> &Path {
    match p.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    }
}

/// Writes through a temporary file in the target directory and renames it into place.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut tmp = tempfile::NamedTempFile::new_in(parent_dir(path))?;
    tmp.write_all(bytes)?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

#[derive(Serialize)]
struct AssumptionFlags {
    complete: bool,
    hausdorff: bool,
}

/// Wrapper written around every report.
#[derive(Serialize)]
struct Envelope<'a, T: Serialize> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    seed: u64,
    tol: f64,
    assumptions: AssumptionFlags,
    report: &'a T,
}

/// `space` is absent for reports that involve no space; both flags are then false.
fn envelope_json<T: Serialize>(
    command: &str,
    seed: u64,
    tol: f64,
    space: Option<&SpaceDescriptor>,
    report: &T,
) -> Result<String> {
    let env = Envelope {
        tool: "pmt",
        version: env!("CARGO_PKG_VERSION"),
        command,
        seed,
        tol,
        assumptions: AssumptionFlags {
            complete: space.is_some_and(|s| s.complete_asserted()),
            hausdorff: space.is_some_and(|s| s.hausdorff_asserted()),
        },
        report,
    };
    let mut text = serde_json::to_string_pretty(&env)?;
    text.push('\n');
    Ok(text)
}

fn emit<T: Serialize>(
    common: &Common,
    command: &str,
    seed: u64,
    tol: f64,
    space: &SpaceDescriptor,
    report: &T,
) -> Result<()> {
    if let Some(path) = &common.report_out {
        write_atomic(path, envelope_json(command, seed, tol, Some(space), report)?.as_bytes())?;
    }
    Ok(())
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Check {
            space,
            samples,
            chain_mode,
            axioms,
            classify: want_classes,
            common,
        } => cmd_check(&space, samples, &chain_mode, &axioms, want_classes, &common),
        Command::Transform {
            space,
            kind,
            x0,
            q,
            second,
            samples,
            out,
            common,
        } => cmd_transform(&space, &kind, x0.as_deref(), q, second.as_deref(), samples, &out, &common),
        Command::Series {
            rates,
            fixture,
            grid,
            horizon,
            with_2s_factor,
            relaxed,
            common,
        } => cmd_series(rates.as_deref(), fixture.as_deref(), grid.as_deref(), horizon, with_2s_factor, relaxed, &common),
        Command::Solve {
            space,
            scheme,
            config,
            x0,
            trace_out,
            common,
        } => cmd_solve(space.as_deref(), &scheme, &config, x0.as_deref(), &trace_out, &common),
        Command::Fixtures { action } => match action {
            FixtureAction::List => {
                for f in list_fixtures()? {
                    println!("{:<22} {}", f.name, f.description);
                }
                Ok(EXIT_OK)
            }
            FixtureAction::Run { name, out, common } => cmd_fixture_run(&name, out.as_deref(), &common),
        },
    }
}

fn check_config(tol: Option<f64>, chain_mode: &str) -> std::result::Result<CheckConfig, Failure> {
    let mode: ChainMode = chain_mode
        .parse()
        .map_err(|_| Failure::Usage(format!("--chain-mode must be exact or upto, not `{chain_mode}`")))?;
    let tol = tol.unwrap_or(DEFAULT_TOL);
    if !(tol >= 0.0 && tol.is_finite()) {
        return Err(Failure::Run(Error::rejected(format!("tolerance {tol} must be non-negative"))));
    }
    Ok(CheckConfig {
        tol,
        chain_mode: mode,
        ..CheckConfig::default()
    })
}

fn sampler_for(space: &SpaceDescriptor, seed: u64, samples: Option<usize>) -> Sampler {
    let s = Sampler::new(seed, space.domain().clone());
    match samples {
        Some(n) => s.with_budget(n),
        None => s,
    }
}

#[derive(Serialize)]
struct CheckReport {
    #[serde(flatten)]
    axioms: AxiomReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    classes: Option<Vec<ClassLabel>>,
}

fn cmd_check(
    space: &Path,
    samples: Option<usize>,
    chain_mode: &str,
    which: &str,
    want_classes: bool,
    common: &Common,
) -> Outcome {
    let seed = resolve_seed(common.seed)?;
    let cfg = check_config(common.tol, chain_mode)?;
    check_output(&common.report_out)?;
    let space = read_space(space)?;
    let sampler = sampler_for(&space, seed, samples);
    let axioms = match which {
        "pm" => check_partial_metric_axioms(&space, &sampler, &cfg)?,
        "metric-type" => metric_type_report(&space, &sampler, &cfg)?,
        "all" => check_all(&space, &sampler, &cfg)?,
        other => return Err(Failure::Usage(format!("--axioms must be pm, metric-type or all, not `{other}`"))),
    };
    let classes = if want_classes {
        Some(classify(&space, &sampler, &cfg)?)
    } else {
        None
    };
    let ok = axioms.per_axiom.values().all(|v| *v == crate::axioms::Verdict::Pass);
    let summary: Vec<String> = axioms.per_axiom.iter().map(|(a, v)| format!("{a}={v:?}")).collect();
    println!(
        "check: {} (K={}, n={}, {} samples)",
        summary.join(" "),
        axioms.coeff_k,
        axioms.n,
        axioms.samples_checked
    );
    let report = CheckReport { axioms, classes };
    emit(common, "check", seed, cfg.tol, &space, &report)?;
    Ok(if ok { EXIT_OK } else { EXIT_CHECK_FAILED })
}

#[allow(clippy::too_many_arguments)]
fn cmd_transform(
    space: &Path,
    kind: &str,
    x0: Option<&str>,
    q: Option<f64>,
    second: Option<&Path>,
    samples: Option<usize>,
    out: &Option<PathBuf>,
    common: &Common,
) -> Outcome {
    let seed = resolve_seed(common.seed)?;
    let cfg = check_config(common.tol, "exact")?;
    let kind: TransformKind = kind.parse().map_err(|e: Error| Failure::Usage(e.to_string()))?;
    check_output(out)?;
    check_output(&common.report_out)?;
    let input = read_space(space)?;
    let mut spec = TransformSpec::new(kind);
    if let Some(x) = x0 {
        spec = spec.with_x0(parse_point(x)?);
    }
    if let Some(q) = q {
        spec = spec.with_q(q);
    }
    if let Some(p) = second {
        spec = spec.with_second(read_space(p)?);
    }
    spec.validate()?;
    let sampler = sampler_for(&input, seed, samples);
    let outcome = spec.apply(&input, &sampler, &cfg)?;
    let ok = outcome.checks.iter().all(|c| c.check.passed()) && outcome.warnings.is_empty();
    println!(
        "transform {}: K={}, n={}, {} checks, {} warnings",
        kind.name(),
        outcome.space.coeff_k(),
        outcome.space.polygon_order(),
        outcome.checks.len(),
        outcome.warnings.len()
    );
    if let Some(path) = out {
        let mut text = outcome.space.to_json()?;
        text.push('\n');
        write_atomic(path, text.as_bytes())?;
    }
    emit(common, "transform", seed, cfg.tol, &outcome.space, &outcome)?;
    Ok(if ok { EXIT_OK } else { EXIT_CHECK_FAILED })
}

#[derive(Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
enum SeriesReport {
    AlphaSeries {
        terms_source: String,
        certificate: crate::series::AlphaSeriesCertificate,
    },
    Relaxed {
        terms_source: String,
        report: crate::series::RelaxedReport,
    },
}

#[allow(clippy::too_many_arguments)]
fn cmd_series(
    rates: Option<&Path>,
    fixture: Option<&str>,
    grid: Option<&str>,
    horizon: Option<usize>,
    with_2s_factor: bool,
    relaxed: bool,
    common: &Common,
) -> Outcome {
    let seed = resolve_seed(common.seed)?;
    let tol = common.tol.unwrap_or(DEFAULT_TOL);
    let grid = match grid {
        Some(g) => parse_list(g)?,
        None => DEFAULT_GRID.to_vec(),
    };
    check_output(&common.report_out)?;
    let (report, ok, space) = match (rates, fixture) {
        (Some(path), None) => {
            let seq = RateSequence::from_csv(read_text(path)?.as_bytes())?;
            let seq = match horizon {
                Some(h) if h < seq.horizon() => RateSequence::new(seq.terms()[..h].to_vec())?,
                _ => seq,
            };
            let cert = certify_alpha_series(&seq, &grid)?;
            println!(
                "series: {:?} λ={} n(λ)={} over {} terms",
                cert.status, cert.lambda, cert.n_lambda, cert.horizon_checked
            );
            let ok = cert.is_certified();
            let report = SeriesReport::AlphaSeries {
                terms_source: path.display().to_string(),
                certificate: cert,
            };
            (report, ok, None)
        }
        (None, Some(name)) => {
            let fx = get_fixture(name)?;
            let run = fx
                .scheme_config
                .ok_or_else(|| Error::rejected(format!("fixture {name} has no coefficient matrix")))?;
            let s = run.config.phi.degree();
            let default_h = match &run.config.gate {
                Gate::AlphaSeries { horizon, .. } | Gate::RelaxedCn { horizon } => *horizon,
            };
            let h = horizon.unwrap_or(default_h);
            let source = format!("{name}: δ = {}, s = {s}", run.config.deltas.label());
            if relaxed {
                let r = check_relaxed_hypotheses(&run.config.deltas, s, h)?;
                println!(
                    "series: relaxed limsup={} ({}), Σ C_n {:?}",
                    r.worst_limsup,
                    if r.limsup_ok { "< 1" } else { ">= 1" },
                    r.cn_summable
                );
                let ok = r.passed();
                (SeriesReport::Relaxed { terms_source: source, report: r }, ok, Some(fx.space))
            } else {
                let seq = kannan_rate_terms(&run.config.deltas.superdiagonal(h), s, with_2s_factor)?;
                let cert = certify_alpha_series(&seq, &grid)?;
                println!(
                    "series: {:?} λ={} n(λ)={} over {} terms",
                    cert.status, cert.lambda, cert.n_lambda, cert.horizon_checked
                );
                let ok = cert.is_certified();
                (
                    SeriesReport::AlphaSeries {
                        terms_source: source,
                        certificate: cert,
                    },
                    ok,
                    Some(fx.space),
                )
            }
        }
        _ => return Err(Failure::Usage("series needs exactly one of --rates or --fixture".into())),
    };
    if let Some(path) = &common.report_out {
        write_atomic(path, envelope_json("series", seed, tol, space.as_ref(), &report)?.as_bytes())?;
    }
    Ok(if ok { EXIT_OK } else { EXIT_CHECK_FAILED })
}

/// A self-map written in a config file.
#[derive(Clone, Debug, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
enum MapSpec {
    Identity,
    DivideBy(f64),
    Affine { scale: f64, shift: f64 },
    Constant(Vec<f64>),
}

impl MapSpec {
    fn build(&self) -> Result<SelfMap> {
        Ok(match self {
            MapSpec::Identity => SelfMap::identity(),
            MapSpec::DivideBy(d) => {
                if *d == 0.0 {
                    return Err(Error::rejected("divide_by needs a nonzero divisor"));
                }
                SelfMap::divide_by(*d)
            }
            MapSpec::Affine { scale, shift } => SelfMap::affine(*scale, *shift),
            MapSpec::Constant(c) => SelfMap::constant(Point::new(c.clone())?),
        })
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
enum FamilySpec {
    GeometricDivisor(f64),
    Constant(Vec<f64>),
    Repeated(MapSpec),
}

#[derive(Clone, Debug, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
enum DeltaSpec {
    Constant(f64),
}

/// Solver parameters read from `--config`. Fields unused by the chosen
/// scheme are rejected.
#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SolveConfig {
    k: Option<f64>,
    t1: Option<MapSpec>,
    t2: Option<MapSpec>,
    r1: Option<u32>,
    r2: Option<u32>,
    f: Option<MapSpec>,
    alpha: Option<f64>,
    beta: Option<f64>,
    c_alpha: Option<f64>,
    c_beta: Option<f64>,
    fixture: Option<String>,
    family: Option<FamilySpec>,
    deltas: Option<DeltaSpec>,
    phi: Option<String>,
    family_scheme: Option<Scheme>,
    gate: Option<Gate>,
    r: Option<u32>,
    probes: Option<Vec<u64>>,
    x0: Option<Vec<f64>>,
    solver: Option<SolverConfig>,
}

fn need<T: Clone>(v: &Option<T>, name: &str, scheme: &str) -> Result<T> {
    v.clone()
        .ok_or_else(|| Error::rejected(format!("scheme {scheme} needs `{name}` in the config")))
}

fn forbid(present: &[(&str, bool)], scheme: &str) -> Result<()> {
    match present.iter().find(|(_, p)| *p) {
        Some((name, _)) => Err(Error::rejected(format!("`{name}` is not used by scheme {scheme}"))),
        None => Ok(()),
    }
}

fn cmd_solve(
    space: Option<&Path>,
    scheme: &str,
    config: &Path,
    x0: Option<&str>,
    trace_out: &Option<PathBuf>,
    common: &Common,
) -> Outcome {
    let seed = resolve_seed(common.seed)?;
    if !matches!(scheme, "banach-pair" | "kannan-pair" | "admissible" | "family") {
        return Err(Failure::Usage(format!(
            "--scheme must be banach-pair, kannan-pair, admissible or family, not `{scheme}`"
        )));
    }
    check_output(trace_out)?;
    check_output(&common.report_out)?;
    let cfg: SolveConfig = serde_json::from_str(&read_text(config)?)
        .map_err(|e| Error::rejected(format!("{}: {e}", config.display())))?;
    let fixture = match &cfg.fixture {
        Some(name) => Some(get_fixture(name)?),
        None => None,
    };
    let space = match (space, &fixture) {
        (Some(p), _) => read_space(p)?,
        (None, Some(fx)) => fx.space.clone(),
        (None, None) => return Err(Failure::Usage("--space is required unless the config names a fixture".into())),
    };
    let mut solver = cfg
        .solver
        .clone()
        .or_else(|| fixture.as_ref().and_then(|f| f.scheme_config.as_ref()).map(|r| r.solver.clone()))
        .unwrap_or_default();
    if let Some(t) = common.tol {
        solver.tol = t;
    }
    let start = match (x0, &cfg.x0, fixture.as_ref().and_then(|f| f.scheme_config.as_ref())) {
        (Some(t), _, _) => parse_point(t)?,
        (None, Some(c), _) => Point::new(c.clone())?,
        (None, None, Some(run)) => run.x0.clone(),
        _ => return Err(Failure::Usage("a starting point is needed: pass --x0 or set x0 in the config".into())),
    };

    let pair_only = [
        ("t1", cfg.t1.is_some()),
        ("t2", cfg.t2.is_some()),
        ("r1", cfg.r1.is_some()),
        ("r2", cfg.r2.is_some()),
        ("k", cfg.k.is_some()),
    ];
    let adm_only = [
        ("f", cfg.f.is_some()),
        ("alpha", cfg.alpha.is_some()),
        ("beta", cfg.beta.is_some()),
        ("c_alpha", cfg.c_alpha.is_some()),
        ("c_beta", cfg.c_beta.is_some()),
    ];
    let family_only = [
        ("fixture", cfg.fixture.is_some()),
        ("family", cfg.family.is_some()),
        ("deltas", cfg.deltas.is_some()),
        ("phi", cfg.phi.is_some()),
        ("family_scheme", cfg.family_scheme.is_some()),
        ("gate", cfg.gate.is_some()),
        ("r", cfg.r.is_some()),
        ("probes", cfg.probes.is_some()),
    ];

    let report: FixedPointReport = match scheme {
        "banach-pair" | "kannan-pair" => {
            forbid(&adm_only, scheme)?;
            forbid(&family_only, scheme)?;
            let t1 = need(&cfg.t1, "t1", scheme)?.build()?;
            let t2 = need(&cfg.t2, "t2", scheme)?.build()?;
            let k = need(&cfg.k, "k", scheme)?;
            if scheme == "kannan-pair" {
                forbid(&[("r1", cfg.r1.is_some()), ("r2", cfg.r2.is_some())], scheme)?;
                solve_pair_kannan(&space, &t1, &t2, k, &start, &solver)?
            } else if cfg.r1.is_some() || cfg.r2.is_some() {
                let (r1, r2) = (cfg.r1.unwrap_or(1), cfg.r2.unwrap_or(1));
                solve_pair_power(&space, &t1, &t2, r1, r2, k, &start, &solver)?
            } else {
                solve_pair_banach(&space, &t1, &t2, k, &start, &solver)?
            }
        }
        "admissible" => {
            forbid(&pair_only, scheme)?;
            forbid(&family_only, scheme)?;
            let f = need(&cfg.f, "f", scheme)?.build()?;
            let adm = AdmissibilityConfig::constant(
                need(&cfg.alpha, "alpha", scheme)?,
                need(&cfg.beta, "beta", scheme)?,
                need(&cfg.c_alpha, "c_alpha", scheme)?,
                need(&cfg.c_beta, "c_beta", scheme)?,
            );
            solve_admissible(&space, &f, &adm, &start, &solver)?
        }
        _ => {
            forbid(&pair_only, scheme)?;
            forbid(&adm_only, scheme)?;
            let (family, base) = match &fixture {
                Some(fx) => {
                    let run = fx
                        .scheme_config
                        .clone()
                        .ok_or_else(|| Error::rejected(format!("fixture {} has no map family", fx.name)))?;
                    (fx.maps.clone().expect("family fixtures carry maps"), Some(run.config))
                }
                None => {
                    let fam = match need(&cfg.family, "family", scheme)? {
                        FamilySpec::GeometricDivisor(b) => MapFamily::geometric_divisor(b),
                        FamilySpec::Constant(c) => MapFamily::constant(Point::new(c)?),
                        FamilySpec::Repeated(m) => MapFamily::repeated(m.build()?),
                    };
                    (fam, None)
                }
            };
            let mut fc = match base {
                Some(b) => b,
                None => {
                    let DeltaSpec::Constant(d) = need(&cfg.deltas, "deltas", scheme)?;
                    FamilyConfig::new(
                        crate::series::DeltaMatrix::constant(d),
                        PhiFunction::identity(),
                        need(&cfg.family_scheme, "family_scheme", scheme)?,
                        Gate::relaxed(),
                    )
                }
            };
            if let Some(DeltaSpec::Constant(d)) = &cfg.deltas {
                fc.deltas = crate::series::DeltaMatrix::constant(*d);
            }
            if let Some(p) = &cfg.phi {
                fc.phi = PhiFunction::from_name(p)?;
            }
            if let Some(s) = cfg.family_scheme {
                fc.scheme = s;
            }
            if let Some(g) = &cfg.gate {
                fc.gate = g.clone();
            }
            if let Some(r) = cfg.r {
                fc.r = r;
            }
            if let Some(p) = &cfg.probes {
                fc.probes = p.clone();
            }
            solve_family(&space, &family, &fc, &start, &solver)?
        }
    };

    println!(
        "solve {scheme}: x* = {} after {} steps, {:?}{}",
        report.point,
        report.trace.steps(),
        report.trace.stop_reason,
        if report.failed_checks.is_empty() {
            String::new()
        } else {
            format!(", failed: {}", report.failed_checks.join(", "))
        }
    );
    if let Some(path) = trace_out {
        let mut buf = Vec::new();
        report.trace.write_csv(&mut buf)?;
        write_atomic(path, &buf)?;
    }
    emit(common, "solve", seed, solver.tol, &space, &report)?;
    Ok(solver_exit_code(&report))
}

/// Exit code for a solver report.
pub fn solver_exit_code(report: &FixedPointReport) -> i32 {
    match report.trace.stop_reason {
        StopReason::HypothesisViolated => EXIT_CHECK_FAILED,
        StopReason::MaxIter => EXIT_NOT_CONVERGED,
        _ if report.all_checks_passed() => EXIT_OK,
        _ => EXIT_CHECK_FAILED,
    }
}

fn cmd_fixture_run(name: &str, out: Option<&Path>, common: &Common) -> Outcome {
    let seed = resolve_seed(common.seed)?;
    let tol = common.tol.unwrap_or(DEFAULT_TOL);
    check_output(&common.report_out)?;
    if let Some(dir) = out {
        fs::create_dir_all(dir).map_err(Error::from)?;
    }
    let fx = get_fixture(name)?;
    let report = run_fixture(name, seed)?;
    let failed: Vec<&str> = report
        .expectations
        .iter()
        .filter(|e| !e.pass)
        .map(|e| e.name.as_str())
        .collect();
    let fixed = report
        .solver
        .as_ref()
        .map(|s| format!(", fixed_point = {}", s.point))
        .unwrap_or_default();
    println!(
        "fixture {name}: {}/{} expectations met{fixed}{}",
        report.expectations.len() - failed.len(),
        report.expectations.len(),
        if failed.is_empty() {
            String::new()
        } else {
            format!(", failed: {}", failed.join(", "))
        }
    );
    let text = envelope_json("fixtures run", seed, tol, Some(&fx.space), &report)?;
    if let Some(path) = &common.report_out {
        write_atomic(path, text.as_bytes())?;
    }
    if let Some(dir) = out {
        write_atomic(&dir.join(format!("{name}.json")), text.as_bytes())?;
        if let Some(s) = &report.solver {
            let mut buf = Vec::new();
            s.trace.write_csv(&mut buf)?;
            write_atomic(&dir.join(format!("{name}.trace.csv")), &buf)?;
        }
    }
    Ok(if failed.is_empty() { EXIT_OK } else { EXIT_CHECK_FAILED })
}
