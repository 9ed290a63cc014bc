//! Batch driver: secrecy-rate curves, the certification corpus and the
//! second-order table, written as CSV.

pub mod config;

use clap::{Args, Parser, Subcommand};
use config::{ConfigError, ScenarioConfig};
use std::io::Write;
use std::path::{Path, PathBuf};
use wtc_core::achievability::achievability_rates;
use wtc_core::asymptotics::{dmc_terms, gauss_terms, SecondOrderTerms};
use wtc_core::bound::{BoundId, BoundPoint, Diagnostics, Scenario, SearchOptions, Status};
use wtc_core::converse::converse_rates;
use wtc_core::smallscale::{certify, CertificationReport};
use wtc_core::Exec;

pub const CSV_HEADER: [&str; 9] = ["n", "bound_id", "rate_bits", "gamma_star", "tau_star", "k_star", "mk_star", "mc_stderr", "status"];

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "wtc", version, about = "Finite-blocklength secrecy-rate bounds for wiretap channels")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args, Default, Clone)]
pub struct Common {
    /// Scenario config (TOML)
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Master seed for every random stream
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Monte Carlo samples per estimate
    #[arg(long, global = true)]
    pub mc_samples: Option<usize>,
    /// Output file (stdout if absent)
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Exit with status 1 if any point is infeasible
    #[arg(long, global = true)]
    pub strict: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate the configured bounds over the blocklength grid
    Curve,
    /// Run the exhaustive certification corpus
    Verify {
        /// Number of random tiny instances
        #[arg(long, default_value_t = 100)]
        count: usize,
    },
    /// Second-order constants and normal approximations
    Asymptotic,
}

#[derive(Debug)]
pub enum CliError {
    Config(ConfigError),
    Compute(wtc_core::Error),
    Io(std::io::Error),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(e) => write!(f, "{e}"),
            CliError::Compute(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "i/o error: {e}"),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use wtc_core::Error as E;
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            // resource limits are computational failures, the rest is bad input
            CliError::Compute(E::LatticeOverflow { .. } | E::SizeCap { .. }) => EXIT_FAILED,
            CliError::Compute(_) => EXIT_CONFIG,
            CliError::Io(_) => EXIT_FAILED,
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e)
    }
}

impl From<wtc_core::Error> for CliError {
    fn from(e: wtc_core::Error) -> Self {
        CliError::Compute(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(e.into())
    }
}

/// Load the config and apply command-line overrides.
pub fn resolve_config(common: &Common) -> Result<ScenarioConfig, CliError> {
    let path = common.config.as_deref().ok_or_else(|| ConfigError("--config is required".into()))?;
    let mut cfg = ScenarioConfig::load(path)?;
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    if let Some(m) = common.mc_samples {
        if m == 0 {
            return Err(ConfigError("--mc-samples must be positive".into()).into());
        }
        cfg.mc_samples = m;
    }
    if let Some(o) = &common.out {
        cfg.out = Some(o.clone());
    }
    Ok(cfg)
}

pub fn search_options(cfg: &ScenarioConfig, exec: Exec) -> SearchOptions {
    SearchOptions { mc_samples: cfg.mc_samples, seed: cfg.seed, exec, ..SearchOptions::default() }
}

fn second_order_terms(scenario: &Scenario) -> Result<SecondOrderTerms, CliError> {
    Ok(match scenario {
        Scenario::Gaussian(g) => gauss_terms(g),
        Scenario::Dmc(d) => dmc_terms(&d.channel)?.0,
    })
}

fn normal_points(n: u64, cfg: &ScenarioConfig, terms: &SecondOrderTerms) -> Result<[BoundPoint; 2], CliError> {
    let so = terms.evaluate(n, cfg.epsilon, cfg.delta)?;
    let mk = |id, rate: f64| {
        let status = if rate > 0.0 { Status::Ok } else { Status::Infeasible };
        BoundPoint::new(n, id, rate * n as f64, Diagnostics::default(), status)
    };
    Ok([mk(BoundId::NaAch, so.ach), mk(BoundId::NaConv, so.conv)])
}

/// All requested points, sorted by (n, bound).
pub fn curve_points(cfg: &ScenarioConfig, exec: Exec) -> Result<Vec<BoundPoint>, CliError> {
    let opts = search_options(cfg, exec);
    let wants = |ids: &[BoundId]| ids.iter().any(|b| cfg.bounds.contains(b));
    let terms = if wants(&[BoundId::NaAch, BoundId::NaConv]) { Some(second_order_terms(&cfg.scenario)?) } else { None };
    let per_n = exec.map(&cfg.n_grid, |&n| -> Result<Vec<BoundPoint>, CliError> {
        let mut pts = Vec::new();
        if wants(&[BoundId::Thm1, BoundId::Wh]) {
            pts.extend(achievability_rates(n, cfg.epsilon, cfg.delta, &cfg.scenario, &opts)?);
        }
        if wants(&[BoundId::Thm3, BoundId::Hayashi]) {
            pts.extend(converse_rates(n, cfg.epsilon, cfg.delta, &cfg.scenario, &opts)?);
        }
        if let Some(t) = &terms {
            pts.extend(normal_points(n, cfg, t)?);
        }
        Ok(pts)
    });
    let mut all = Vec::new();
    for r in per_n {
        all.extend(r?.into_iter().filter(|p| cfg.bounds.contains(&p.bound)));
    }
    all.sort_by_key(|p| (p.n, p.bound));
    Ok(all)
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// The nine-column CSV: sizes (γ*, K*, MK*) as base-2 logarithms, absent
/// diagnostics as empty fields.
pub fn write_points<W: Write>(points: &[BoundPoint], out: W) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for p in points {
        let d = &p.diag;
        w.write_record([
            p.n.to_string(),
            p.bound.as_str().to_string(),
            p.rate_bits.to_string(),
            opt(d.log2_gamma),
            opt(d.tau),
            opt(d.log2_k),
            opt(d.log2_mk),
            opt(d.mc_stderr),
            p.status.as_str().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_report<W: Write>(report: &CertificationReport, out: W) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["family", "checks", "violations", "min_slack", "status"])?;
    for f in &report.families {
        w.write_record([
            f.family.as_str().to_string(),
            f.checks.to_string(),
            f.violations.to_string(),
            f.min_slack.to_string(),
            if f.passed() { "pass" } else { "fail" }.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn with_output(path: Option<&Path>, f: impl FnOnce(&mut dyn Write) -> Result<(), CliError>) -> Result<(), CliError> {
    match path {
        Some(p) => {
            let mut file = std::io::BufWriter::new(std::fs::File::create(p)?);
            f(&mut file)?;
            file.flush()?;
            Ok(())
        }
        None => f(&mut std::io::stdout().lock()),
    }
}

pub fn run_curve(common: &Common, exec: Exec) -> Result<i32, CliError> {
    let cfg = resolve_config(common)?;
    let points = curve_points(&cfg, exec)?;
    with_output(cfg.out.as_deref(), |w| write_points(&points, w))?;
    let infeasible = points.iter().filter(|p| p.status == Status::Infeasible).count();
    if infeasible > 0 {
        eprintln!("{infeasible} infeasible point(s)");
        if common.strict {
            return Ok(EXIT_FAILED);
        }
    }
    Ok(EXIT_OK)
}

pub fn run_verify(common: &Common, count: usize, exec: Exec) -> Result<i32, CliError> {
    if count == 0 {
        return Err(ConfigError("--count must be at least 1".into()).into());
    }
    // a config is optional here; if given it must be valid
    let mut seed = common.seed;
    if common.config.is_some() {
        let cfg = resolve_config(common)?;
        seed = Some(cfg.seed);
    }
    let report = certify(count, seed.unwrap_or(config::DEFAULT_SEED), exec)?;
    with_output(common.out.as_deref(), |w| write_report(&report, w))?;
    Ok(if report.passed() { EXIT_OK } else { EXIT_FAILED })
}

pub fn run_asymptotic(common: &Common) -> Result<i32, CliError> {
    let cfg = resolve_config(common)?;
    let terms = second_order_terms(&cfg.scenario)?;
    let b = std::f64::consts::LN_2;
    let mut stdout = std::io::stdout().lock();
    writeln!(stdout, "quantity,value")?;
    for (name, v) in [
        ("cs_bits", terms.cs / b),
        ("cs_upper_bits", terms.cs_upper / b),
        ("v1_bits2", terms.v1 / (b * b)),
        ("v2_bits2", terms.v2 / (b * b)),
        ("vc_bits2", terms.vc / (b * b)),
    ] {
        writeln!(stdout, "{name},{v}")?;
    }
    if cfg.out.is_none() {
        writeln!(stdout)?;
    }
    drop(stdout);
    let mut points = Vec::with_capacity(2 * cfg.n_grid.len());
    for &n in &cfg.n_grid {
        points.extend(normal_points(n, &cfg, &terms)?);
    }
    with_output(cfg.out.as_deref(), |w| write_points(&points, w))?;
    Ok(EXIT_OK)
}

/// Run a parsed command line; returns the process exit code.
pub fn run(cli: &Cli) -> i32 {
    let exec = Exec::default();
    let result = match cli.command {
        Command::Curve => run_curve(&cli.common, exec),
        Command::Verify { count } => run_verify(&cli.common, count, exec),
        Command::Asymptotic => run_asymptotic(&cli.common),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
