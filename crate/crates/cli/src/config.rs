//! Scenario configuration files.
//!
//! TOML with three sections:
//!
//! ```toml
//! [scenario]
//! kind = "gaussian"        # or "bsc_pair", "dmc"
//! snr_legit_db = 3.0
//! snr_eve_db = -3.0
//!
//! [curve]
//! n_grid = { start = 100, stop = 3000, step = 100 }   # or [100, 200, 500]
//! epsilon = 1e-3
//! delta = 1e-3
//! bounds = ["thm1", "wh", "thm3", "hayashi", "na_ach", "na_conv"]
//!
//! [run]
//! seed = 1
//! mc_samples = 100000
//! out = "fig1.csv"
//! ```
//!
//! SNRs are converted at parse time with the power normalized to 1. A `dmc`
//! scenario names a tensor file (relative paths resolve against the config's
//! directory): the sizes `|X| |Y| |Z|`, then the entries P(y,z|x) with x
//! slowest and z fastest, whitespace separated, `#` starting a comment.

use serde::Deserialize;
use std::fmt;
use std::path::{Path, PathBuf};
use wtc_core::bound::{BoundId, DmcScenario, Scenario};
use wtc_core::channels::{DMWiretap, GaussianWiretap};
use wtc_core::metrics::FiniteDist;

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn err<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

impl From<wtc_core::Error> for ConfigError {
    fn from(e: wtc_core::Error) -> Self {
        ConfigError(e.to_string())
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    scenario: RawScenario,
    #[serde(default)]
    curve: RawCurve,
    #[serde(default)]
    run: RawRun,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum RawScenario {
    Gaussian { snr_legit_db: f64, snr_eve_db: f64 },
    BscPair { p_legit: f64, p_eve: f64 },
    Dmc { tensor: PathBuf, input: Option<Vec<f64>>, q_z: Option<Vec<f64>> },
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawGrid {
    List(Vec<u64>),
    Range { start: u64, stop: u64, step: u64 },
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCurve {
    n_grid: Option<RawGrid>,
    epsilon: Option<f64>,
    delta: Option<f64>,
    bounds: Option<Vec<String>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRun {
    seed: Option<u64>,
    mc_samples: Option<usize>,
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    pub n_grid: Vec<u64>,
    pub epsilon: f64,
    pub delta: f64,
    /// Requested bounds in canonical order, without repeats.
    pub bounds: Vec<BoundId>,
    pub seed: u64,
    pub mc_samples: usize,
    pub out: Option<PathBuf>,
}

pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_MC_SAMPLES: usize = 100_000;

impl ScenarioConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
        Self::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }

    /// Parse config text; relative file names resolve against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self, ConfigError> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| ConfigError(e.to_string()))?;
        let scenario = match raw.scenario {
            RawScenario::Gaussian { snr_legit_db, snr_eve_db } => {
                if !(snr_legit_db.is_finite() && snr_eve_db.is_finite()) {
                    return err("SNRs must be finite");
                }
                if snr_eve_db >= snr_legit_db {
                    return err(format!("eavesdropper SNR ({snr_eve_db} dB) must be below the legitimate SNR ({snr_legit_db} dB)"));
                }
                Scenario::Gaussian(GaussianWiretap::from_snr_db(snr_legit_db, snr_eve_db)?)
            }
            RawScenario::BscPair { p_legit, p_eve } => Scenario::Dmc(DmcScenario {
                channel: DMWiretap::bsc_pair(p_legit, p_eve)?,
                input: FiniteDist::uniform(2),
                q_z: None,
            }),
            RawScenario::Dmc { tensor, input, q_z } => {
                let path = if tensor.is_absolute() { tensor } else { base.join(tensor) };
                let channel = read_tensor(&path)?;
                let (nx, _, nz) = channel.sizes();
                let input = match input {
                    Some(p) if p.len() != nx => return err(format!("input law has {} entries, channel has {nx} inputs", p.len())),
                    Some(p) => FiniteDist::new(p)?,
                    None => FiniteDist::uniform(nx),
                };
                let q_z = match q_z {
                    Some(q) if q.len() != nz => return err(format!("q_z has {} entries, channel has {nz} outputs", q.len())),
                    Some(q) => Some(FiniteDist::new(q)?),
                    None => None,
                };
                Scenario::Dmc(DmcScenario { channel, input, q_z })
            }
        };

        let c = raw.curve;
        let n_grid = match c.n_grid {
            None => (1..=30).map(|i| 100 * i).collect(),
            Some(RawGrid::List(v)) => v,
            Some(RawGrid::Range { start, stop, step }) => {
                if step == 0 || start > stop {
                    return err("n_grid range needs step > 0 and start <= stop");
                }
                (start..=stop).step_by(step as usize).collect()
            }
        };
        if n_grid.is_empty() || n_grid[0] == 0 || n_grid.windows(2).any(|w| w[0] >= w[1]) {
            return err("n_grid must be strictly ascending positive blocklengths");
        }
        let epsilon = c.epsilon.unwrap_or(1e-3);
        let delta = c.delta.unwrap_or(1e-3);
        if !(epsilon > 0.0 && epsilon < 1.0 && delta > 0.0 && delta < 1.0) {
            return err(format!("epsilon and delta must lie in (0,1), got {epsilon}, {delta}"));
        }
        if !(epsilon + delta < 1.0) {
            return err(format!("need epsilon + delta < 1, got {}", epsilon + delta));
        }
        let bounds = match c.bounds {
            None => BoundId::ALL.to_vec(),
            Some(names) => {
                let mut ids = Vec::with_capacity(names.len());
                for s in &names {
                    match BoundId::parse(s) {
                        Some(b) => ids.push(b),
                        None => return err(format!("unknown bound '{s}'")),
                    }
                }
                ids.sort();
                ids.dedup();
                if ids.is_empty() {
                    return err("bounds must not be empty");
                }
                ids
            }
        };
        let mc_samples = raw.run.mc_samples.unwrap_or(DEFAULT_MC_SAMPLES);
        if mc_samples == 0 {
            return err("mc_samples must be positive");
        }
        let out = raw.run.out.map(|p| if p.is_absolute() { p } else { base.join(p) });
        Ok(Self { scenario, n_grid, epsilon, delta, bounds, seed: raw.run.seed.unwrap_or(DEFAULT_SEED), mc_samples, out })
    }
}

/// Read a `|X| |Y| |Z|` header followed by the P(y,z|x) entries.
pub fn read_tensor(path: &Path) -> Result<DMWiretap, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
    parse_tensor(&text).map_err(|e| ConfigError(format!("{}: {}", path.display(), e.0)))
}

pub fn parse_tensor(text: &str) -> Result<DMWiretap, ConfigError> {
    let mut tokens = text.lines().map(|l| l.split('#').next().unwrap_or("")).flat_map(str::split_whitespace);
    let mut size = || -> Result<usize, ConfigError> {
        let t = tokens.next().ok_or_else(|| ConfigError("missing tensor sizes".into()))?;
        t.parse().map_err(|_| ConfigError(format!("bad tensor size '{t}'")))
    };
    let (nx, ny, nz) = (size()?, size()?, size()?);
    let vals = tokens
        .map(|t| t.parse::<f64>().map_err(|_| ConfigError(format!("bad tensor entry '{t}'"))))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(DMWiretap::new(nx, ny, nz, vals)?)
}
