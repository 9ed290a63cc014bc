//! Scenarios, bound identifiers and the reported bound points.

use crate::channels::{DMWiretap, GaussianWiretap};
use crate::exec::Exec;
use crate::metrics::FiniteDist;
use crate::probkit::MAX_BINS;
use std::fmt;

/// Discrete memoryless scenario: channel, i.i.d. input law, and optionally the
/// eavesdropper reference output Q_Z (default: the output induced by the input).
#[derive(Debug, Clone, PartialEq)]
pub struct DmcScenario {
    pub channel: DMWiretap,
    pub input: FiniteDist,
    pub q_z: Option<FiniteDist>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Scenario {
    Gaussian(GaussianWiretap),
    Dmc(DmcScenario),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BoundId {
    Thm1,
    Wh,
    Thm3,
    Hayashi,
    NaAch,
    NaConv,
}

impl BoundId {
    pub const ALL: [BoundId; 6] = [BoundId::Thm1, BoundId::Wh, BoundId::Thm3, BoundId::Hayashi, BoundId::NaAch, BoundId::NaConv];

    pub fn as_str(self) -> &'static str {
        match self {
            BoundId::Thm1 => "thm1",
            BoundId::Wh => "wh",
            BoundId::Thm3 => "thm3",
            BoundId::Hayashi => "hayashi",
            BoundId::NaAch => "na_ach",
            BoundId::NaConv => "na_conv",
        }
    }

    pub fn parse(s: &str) -> Option<BoundId> {
        BoundId::ALL.into_iter().find(|b| b.as_str() == s)
    }

    /// Stable per-bound label for RNG stream derivation.
    pub fn tag(self) -> u64 {
        self as u64 + 1
    }
}

impl fmt::Display for BoundId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    /// No code size meets the constraints; rate reported as 0.
    Infeasible,
    /// Bound exceeded the search ceiling; rate reported as the ceiling.
    Capped,
    /// Evaluated with a documented relaxation (e.g. sup over a candidate set).
    Approx,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Ok => "ok",
            Status::Infeasible => "infeasible",
            Status::Capped => "capped",
            Status::Approx => "approx",
        }
    }
}

/// Optimizer diagnostics. Sizes are reported as base-2 logarithms
/// (γ*, K*, MK* can be astronomically large).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Diagnostics {
    pub log2_gamma: Option<f64>,
    pub tau: Option<f64>,
    pub log2_k: Option<f64>,
    pub log2_mk: Option<f64>,
    pub mc_stderr: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundPoint {
    pub n: u64,
    pub bound: BoundId,
    /// bits per channel use
    pub rate_bits: f64,
    pub diag: Diagnostics,
    pub status: Status,
}

impl BoundPoint {
    pub fn new(n: u64, bound: BoundId, ln_m: f64, diag: Diagnostics, status: Status) -> Self {
        let rate_bits = (ln_m / (n as f64 * std::f64::consts::LN_2)).max(0.0);
        Self { n, bound, rate_bits, diag, status }
    }

    pub fn infeasible(n: u64, bound: BoundId, diag: Diagnostics) -> Self {
        Self { n, bound, rate_bits: 0.0, diag, status: Status::Infeasible }
    }
}

/// Knobs shared by the numerical bound searches.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchOptions {
    pub mc_samples: usize,
    pub seed: u64,
    pub exec: Exec,
    /// Target lattice length for n-letter spectra (the step is chosen from it).
    pub target_bins: usize,
    /// Hard cap on lattice length.
    pub max_bins: usize,
    pub grid_points: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self { mc_samples: 100_000, seed: 1, exec: Exec::default(), target_bins: 1 << 16, max_bins: MAX_BINS, grid_points: 64 }
    }
}
