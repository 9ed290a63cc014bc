//! Privacy-amplification achievability: the δ-bound on a hashed codebook, the
//! weakened baseline, RCU/DT reliability bounds and the secret-rate search.

use crate::bound::{BoundId, BoundPoint, Diagnostics, DmcScenario, Scenario, SearchOptions, Status};
use crate::channels::{
    dmc_llr_atoms, gauss_eve_llr, llr_law_is_input_invariant, nfold_spectrum, GaussianWiretap, Kernel, Measure,
};
use crate::error::{domain, Error, Result};
use crate::exec::derive_seed;
use crate::metrics::FiniteDist;
use crate::probkit::special::{ln_reg_inc_beta, log1m_exp};
use crate::probkit::{LogSpectrum, NoncentralChi2, SpectrumTails};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};
use std::f64::consts::LN_2;

/// Threshold queries on the law of an LLR `L = ln dP/dQ` under `P`.
pub trait LlrLaw {
    /// P[L ≥ t]
    fn p_tail(&self, t: f64) -> f64;
    /// e^t·Q[L ≥ t] = E_P[e^{−(L−t)} 1{L ≥ t}]
    fn scaled_q_tail(&self, t: f64) -> f64;
    /// E_P[e^{L−t} 1{L < t}]
    fn scaled_lower(&self, t: f64) -> f64;
    fn mean(&self) -> f64;
    fn sd(&self) -> f64;

    /// E_γ(P, Q) at γ = e^t.
    fn e_gamma(&self, t: f64) -> f64 {
        (self.p_tail(t) - self.scaled_q_tail(t)).clamp(0.0, 1.0)
    }

    /// E_P[e^{−|L − t|}]
    fn two_sided(&self, t: f64) -> f64 {
        self.scaled_q_tail(t) + self.scaled_lower(t)
    }
}

impl LlrLaw for SpectrumTails<'_> {
    fn p_tail(&self, t: f64) -> f64 {
        SpectrumTails::p_tail(self, t)
    }
    fn scaled_q_tail(&self, t: f64) -> f64 {
        SpectrumTails::scaled_q_tail(self, t)
    }
    fn scaled_lower(&self, t: f64) -> f64 {
        SpectrumTails::scaled_lower(self, t)
    }
    fn mean(&self) -> f64 {
        self.spectrum().mean()
    }
    fn sd(&self) -> f64 {
        self.spectrum().variance().sqrt()
    }
}

/// Continuous law; both change-of-measure tails are exponential tilts of the
/// same family.
impl LlrLaw for NoncentralChi2 {
    fn p_tail(&self, t: f64) -> f64 {
        self.sf(t)
    }
    fn scaled_q_tail(&self, t: f64) -> f64 {
        match self.tilted(-1.0) {
            Some((d, ln_m)) => (t + ln_m + d.ln_sf(t)).exp(),
            None => f64::INFINITY,
        }
    }
    fn scaled_lower(&self, t: f64) -> f64 {
        match self.tilted(1.0) {
            Some((d, ln_m)) => (-t + ln_m + d.ln_cdf(t)).exp(),
            None => f64::INFINITY,
        }
    }
    fn mean(&self) -> f64 {
        NoncentralChi2::mean(self)
    }
    fn sd(&self) -> f64 {
        self.variance().sqrt()
    }
}

fn check_k_gamma(k: f64, gamma: f64) -> Result<()> {
    if !(k >= 1.0) {
        return domain(format!("bin size K must be at least 1, got {k}"));
    }
    if !(gamma > 0.0) {
        return domain(format!("gamma must be positive, got {gamma}"));
    }
    Ok(())
}

/// Leakage bound of a hashed codebook with bins of size K at threshold γ:
/// E_γ + ½·√(γ/K · E[e^{−|ı − ln γ|}]).
pub fn lemma1_delta<L: LlrLaw + ?Sized>(law: &L, k: f64, gamma: f64) -> Result<f64> {
    check_k_gamma(k, gamma)?;
    Ok(delta_ln(law, k.ln(), gamma.ln(), false))
}

/// As [`lemma1_delta`] with the expectation replaced by 1.
pub fn wh_baseline_delta<L: LlrLaw + ?Sized>(law: &L, k: f64, gamma: f64) -> Result<f64> {
    check_k_gamma(k, gamma)?;
    Ok(delta_ln(law, k.ln(), gamma.ln(), true))
}

fn delta_ln<L: LlrLaw + ?Sized>(law: &L, ln_k: f64, t: f64, weak: bool) -> f64 {
    let b = if weak { 1.0 } else { law.two_sided(t) };
    law.e_gamma(t) + 0.5 * (0.5 * (t - ln_k + b.ln())).exp()
}

/// Minimize the leakage bound over γ for a fixed K; returns (δ, ln γ).
pub fn optimize_gamma<L: LlrLaw + ?Sized>(law: &L, k: f64, weak: bool, grid: usize) -> Result<(f64, f64)> {
    check_k_gamma(k, 1.0)?;
    let ln_k = k.ln();
    let f = |t: f64| delta_ln(law, ln_k, t, weak);
    let (lo, hi) = gamma_window(law);
    Ok(extend_outward(lo, hi, grid_then_golden(lo, hi, grid, &f), &f))
}

/// Probe geometrically outside [lo, hi] (the optimum can leave the bulk window
/// when δ is close to 1) and refine around any probe that improves on `best`.
fn extend_outward(lo: f64, hi: f64, mut best: (f64, f64), f: &dyn Fn(f64) -> f64) -> (f64, f64) {
    for dir in [-1.0, 1.0] {
        let edge = if dir < 0.0 { lo } else { hi };
        let probe = |j: i32| edge + dir * if j < 0 { 0.0 } else { 2f64.powi(j) };
        let mut found = None;
        for j in 0..10 {
            let v = f(probe(j));
            if v < best.0 {
                best = (v, probe(j));
                found = Some(j);
            }
        }
        if let Some(j) = found {
            let (a, b) = (probe(j - 1), probe(j + 1));
            let g = golden_min(a.min(b), a.max(b), 48, f);
            if g.0 < best.0 {
                best = g;
            }
        }
    }
    best
}

/// Search window for ln γ: the law's mean ± 6 standard deviations.
fn gamma_window<L: LlrLaw + ?Sized>(law: &L) -> (f64, f64) {
    let m = law.mean();
    let s = law.sd().max(0.5);
    (m - 6.0 * s, m + 6.0 * s)
}

/// Minimize `f` on a uniform grid over [lo, hi], then refine around the best
/// grid point by golden section. Returns (min value, argmin).
fn grid_then_golden(lo: f64, hi: f64, points: usize, f: &dyn Fn(f64) -> f64) -> (f64, f64) {
    let points = points.max(3);
    let h = (hi - lo) / (points - 1) as f64;
    let mut best = (f64::INFINITY, lo);
    let mut best_i = 0;
    for i in 0..points {
        let t = lo + i as f64 * h;
        let v = f(t);
        if v < best.0 {
            best = (v, t);
            best_i = i;
        }
    }
    if !best.0.is_finite() {
        return best;
    }
    let a = lo + best_i.saturating_sub(1) as f64 * h;
    let b = lo + (best_i + 1).min(points - 1) as f64 * h;
    let g = golden_min(a, b, 48, f);
    if g.0 < best.0 {
        g
    } else {
        best
    }
}

pub(crate) fn golden_min(mut a: f64, mut b: f64, iters: usize, f: &dyn Fn(f64) -> f64) -> (f64, f64) {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..iters {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
    }
    if fc <= fd {
        (fc, c)
    } else {
        (fd, d)
    }
}

/// Smallest bin size, as (ln K, ln γ), for which the leakage bound meets δ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinChoice {
    pub ln_k: f64,
    pub ln_gamma: Option<f64>,
}

/// ln of the real K at which the bound equals δ for threshold e^t (∞ when the
/// E_γ term alone exceeds δ).
fn ln_k_required<L: LlrLaw + ?Sized>(law: &L, t: f64, delta: f64, weak: bool) -> f64 {
    let gap = delta - law.e_gamma(t);
    if !(gap > 0.0) {
        return f64::INFINITY;
    }
    let b = if weak { 1.0 } else { law.two_sided(t) };
    t + b.ln() - 4f64.ln() - 2.0 * gap.ln()
}

/// Jointly search (K, γ) so that the leakage bound meets δ; K is real here
/// (rounded up to a power of two by the caller). `seeds` are extra thresholds
/// evaluated alongside the search. `None` if no γ works.
pub fn min_bin_size<L: LlrLaw + ?Sized>(
    law: &L,
    delta: f64,
    weak: bool,
    grid: usize,
    seeds: &[f64],
) -> Option<BinChoice> {
    if delta >= 1.0 {
        // Total variation never exceeds 1: no hashing needed.
        return Some(BinChoice { ln_k: 0.0, ln_gamma: None });
    }
    let f = |t: f64| ln_k_required(law, t, delta, weak);
    let (lo, hi) = gamma_window(law);
    let mut best = grid_then_golden(lo, hi, grid, &f);
    // The E_γ term decays in γ: widen upwards if nothing in the window works.
    let mut span = hi - lo;
    let mut start = hi;
    while !best.0.is_finite() && span < 1e6 {
        best = grid_then_golden(start, start + 2.0 * span, grid, &f);
        start += 2.0 * span;
        span *= 2.0;
    }
    for &t in seeds {
        let v = f(t);
        if v < best.0 {
            best = (v, t);
        }
    }
    best.0.is_finite().then(|| BinChoice { ln_k: best.0.max(0.0), ln_gamma: Some(best.1) })
}

/// ε_DT(a) = 1 − E_a(P_XY, P_X P_Y) from the law of i(X;Y) under P_XY.
pub fn dt_bound(l_xy: &LogSpectrum, a: f64) -> Result<f64> {
    if !(a >= 0.0) {
        return domain(format!("DT argument must be nonnegative, got {a}"));
    }
    if a == 0.0 {
        return Ok(0.0);
    }
    Ok(dt_ln(&l_xy.tails(), a.ln()))
}

fn dt_ln(t: &SpectrumTails<'_>, ln_a: f64) -> f64 {
    (1.0 - (t.p_tail(ln_a) - t.scaled_q_tail(ln_a))).clamp(0.0, 1.0)
}

/// RCU via the spectrum: exact when the law of i(X̄; y) under X̄ ~ P_X does not
/// depend on y, so the inner probability is Q[L ≥ ℓ].
pub fn rcu_spectrum(l_xy: &LogSpectrum, a: f64) -> Result<f64> {
    if !(a >= 1.0) {
        return domain(format!("codebook size must be at least 1, got {a}"));
    }
    Ok(rcu_spectrum_ln(l_xy, &l_xy.tails(), ln_minus_one(a.ln())))
}

fn rcu_spectrum_ln(s: &LogSpectrum, tails: &SpectrumTails<'_>, ln_am1: f64) -> f64 {
    let mut acc = 0.0;
    for (v, w) in s.atoms() {
        acc += w * (ln_am1 + tails.ln_q_tail(v)).min(0.0).exp();
    }
    acc.min(1.0)
}

/// ln(e^x − 1) for x ≥ 0.
fn ln_minus_one(ln_a: f64) -> f64 {
    if ln_a <= 0.0 {
        f64::NEG_INFINITY
    } else {
        ln_a + log1m_exp(-ln_a)
    }
}

/// Monte Carlo mean with standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub std_err: f64,
}

impl McEstimate {
    /// Conservative value: estimate + 3·SE.
    pub fn upper(&self) -> f64 {
        self.mean + 3.0 * self.std_err
    }
}

const RCU_CHUNK: usize = 4096;
const RCU_TAG: u64 = 0x52_43_55;

/// ln of the fraction of the unit sphere in ℝⁿ within angle arccos(ρ) of a
/// fixed direction, given 1 − ρ² and the sign of ρ.
pub fn ln_cap_fraction(n: u64, one_minus_rho2: f64, rho_nonneg: bool) -> f64 {
    let x = one_minus_rho2.clamp(0.0, 1.0);
    let ln_i = ln_reg_inc_beta(x, 0.5 * (n as f64 - 1.0), 0.5).unwrap_or(f64::NEG_INFINITY);
    if rho_nonneg {
        ln_i - LN_2
    } else {
        (1.0 - 0.5 * ln_i.exp()).ln()
    }
}

/// Monte Carlo sample of the RCU inner probability for codewords uniform on the
/// power sphere: stores ln of the cap fraction beaten by an independent codeword.
#[derive(Debug, Clone)]
pub struct RcuSphere {
    pub n: u64,
    ln_caps: Vec<f64>,
}

impl RcuSphere {
    pub fn sample(g: &GaussianWiretap, n: u64, samples: usize, seed: u64, exec: crate::Exec) -> Result<Self> {
        if n < 2 {
            return domain("RCU on the sphere needs n >= 2");
        }
        if samples == 0 {
            return domain("need at least one Monte Carlo sample");
        }
        let nf = n as f64;
        let (p, n1) = (g.p, g.n1);
        let chi = ChiSquared::new(nf - 1.0).map_err(|e| Error::Domain(e.to_string()))?;
        let chunks = samples.div_ceil(RCU_CHUNK);
        let parts = exec.map_range(chunks, |c| {
            let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[n, RCU_TAG, c as u64]));
            let len = RCU_CHUNK.min(samples - c * RCU_CHUNK);
            let mut out = Vec::with_capacity(len);
            for _ in 0..len {
                // Codeword √P·1; S = ΣU_i, R = Σ(U_i − Ū)².
                let z: f64 = StandardNormal.sample(&mut rng);
                let s = (nf * n1).sqrt() * z;
                let r = n1 * chi.sample(&mut rng);
                let inner = nf * p + p.sqrt() * s;
                let norm2 = nf * p + 2.0 * p.sqrt() * s + r + s * s / nf;
                out.push(ln_cap_fraction(n, r / norm2, inner >= 0.0));
            }
            out
        });
        Ok(Self { n, ln_caps: parts.concat() })
    }

    pub fn len(&self) -> usize {
        self.ln_caps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ln_caps.is_empty()
    }

    /// RCU estimate for a codebook of size e^{ln_a}.
    pub fn estimate_ln(&self, ln_a: f64) -> McEstimate {
        let ln_am1 = ln_minus_one(ln_a);
        let m = self.ln_caps.len() as f64;
        let (mut s1, mut s2) = (0.0, 0.0);
        for &c in &self.ln_caps {
            let v = (ln_am1 + c).min(0.0).exp();
            s1 += v;
            s2 += v * v;
        }
        let mean = s1 / m;
        let var = if m > 1.0 { ((s2 - m * mean * mean) / (m - 1.0)).max(0.0) } else { 0.0 };
        McEstimate { mean, std_err: (var / m).sqrt() }
    }

    pub fn estimate(&self, a: f64) -> McEstimate {
        self.estimate_ln(a.max(1.0).ln())
    }

    /// Largest ln a whose conservative RCU value is ≤ ε (0 if only a = 1 works).
    pub fn max_ln_size(&self, eps: f64) -> f64 {
        let hi0 = self.ln_caps.iter().map(|c| -c).fold(0.0, f64::max) + 1.0;
        largest_where(0.0, hi0, |x| self.estimate_ln(x).upper() <= eps)
    }
}

/// RCU on the power sphere at codebook size a.
pub fn rcu_sphere(n: u64, a: f64, g: &GaussianWiretap, mc_samples: usize, seed: u64) -> Result<McEstimate> {
    if !(a >= 1.0) {
        return domain(format!("codebook size must be at least 1, got {a}"));
    }
    Ok(RcuSphere::sample(g, n, mc_samples, seed, crate::Exec::default())?.estimate(a))
}

/// Bisection for the largest x in [lo, hi] with `ok(x)`, assuming `ok` is
/// monotone and `ok(lo)` holds.
fn largest_where(lo: f64, mut hi: f64, ok: impl Fn(f64) -> bool) -> f64 {
    let mut lo = lo;
    let mut guard = 0;
    while ok(hi) && guard < 64 {
        lo = hi;
        hi *= 2.0;
        guard += 1;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if ok(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-12 * (1.0 + lo.abs()) {
            break;
        }
    }
    lo
}

/// Reliability side of the search: the largest total codebook size.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Reliability {
    ln_mk: f64,
    stderr: Option<f64>,
}

/// Convert (ln of the largest admissible MK, ln K_required) into the
/// reported point. K is rounded up to a power of two; M = ⌊MK/K⌋.
fn finish(
    n: u64,
    id: BoundId,
    rel: Reliability,
    bins: Option<BinChoice>,
    stderr_at: impl Fn(f64) -> Option<f64>,
) -> BoundPoint {
    let mut diag = Diagnostics { log2_mk: Some(rel.ln_mk / LN_2), ..Default::default() };
    let Some(bins) = bins else {
        return BoundPoint::infeasible(n, id, diag);
    };
    let k_bits = (bins.ln_k / LN_2).ceil().max(0.0);
    diag.log2_k = Some(k_bits);
    diag.log2_gamma = bins.ln_gamma.map(|t| t / LN_2);
    let ln_m = if rel.ln_mk < 40.0 && k_bits < 60.0 {
        let mk = rel.ln_mk.exp().floor();
        let m = (mk / 2f64.powf(k_bits)).floor();
        if m < 1.0 {
            f64::NEG_INFINITY
        } else {
            m.ln()
        }
    } else {
        let c = rel.ln_mk - k_bits * LN_2;
        if c < 0.0 {
            f64::NEG_INFINITY
        } else if c < 40.0 {
            c.exp().floor().max(1.0).ln()
        } else {
            c
        }
    };
    if !ln_m.is_finite() {
        diag.mc_stderr = rel.stderr;
        return BoundPoint::infeasible(n, id, diag);
    }
    let ln_code = ln_m + k_bits * LN_2;
    diag.log2_mk = Some(ln_code / LN_2);
    diag.mc_stderr = stderr_at(ln_code).or(rel.stderr);
    BoundPoint::new(n, id, ln_m, diag, Status::Ok)
}

fn check_eps_delta(eps: f64, delta: f64) -> Result<()> {
    if !(eps > 0.0 && eps < 1.0) {
        return domain(format!("epsilon must lie in (0,1), got {eps}"));
    }
    if !(delta > 0.0 && delta <= 1.0) {
        return domain(format!("delta must lie in (0,1], got {delta}"));
    }
    Ok(())
}

/// Both privacy-amplification achievability points at blocklength n:
/// `[thm1, wh]`. The two share the reliability computation (and its Monte Carlo
/// stream), and the sharper bound is also tried at the baseline's optimal γ,
/// so thm1 ≥ wh holds exactly.
pub fn achievability_rates(n: u64, eps: f64, delta: f64, scenario: &Scenario, opts: &SearchOptions) -> Result<[BoundPoint; 2]> {
    check_eps_delta(eps, delta)?;
    if n == 0 {
        return domain("blocklength must be positive");
    }
    match scenario {
        Scenario::Gaussian(g) => {
            let rcu = RcuSphere::sample(g, n, opts.mc_samples, derive_seed(opts.seed, &[n, BoundId::Thm1.tag()]), opts.exec)?;
            let ln_mk = rcu.max_ln_size(eps);
            let rel = Reliability { ln_mk, stderr: Some(rcu.estimate_ln(ln_mk).std_err) };
            let law = gauss_eve_llr(g, n, Measure::Signal)?;
            Ok(finish_pair(n, rel, &law, delta, opts.grid_points, |ln_code| Some(rcu.estimate_ln(ln_code).std_err)))
        }
        Scenario::Dmc(d) => {
            let ctx = DmcAchievability::new(d, n, opts)?;
            let rel = Reliability { ln_mk: ctx.max_ln_size(eps), stderr: None };
            let tails = ctx.eve.tails();
            Ok(finish_pair(n, rel, &tails, delta, opts.grid_points, |_| None))
        }
    }
}

fn finish_pair<L: LlrLaw + ?Sized>(
    n: u64,
    rel: Reliability,
    law: &L,
    delta: f64,
    grid: usize,
    stderr_at: impl Fn(f64) -> Option<f64> + Copy,
) -> [BoundPoint; 2] {
    let wh = min_bin_size(law, delta, true, grid, &[]);
    let seeds: Vec<f64> = wh.and_then(|b| b.ln_gamma).into_iter().collect();
    let thm1 = min_bin_size(law, delta, false, grid, &seeds);
    [finish(n, BoundId::Thm1, rel, thm1, stderr_at), finish(n, BoundId::Wh, rel, wh, stderr_at)]
}

pub fn thm1_rate(n: u64, eps: f64, delta: f64, scenario: &Scenario, opts: &SearchOptions) -> Result<BoundPoint> {
    Ok(achievability_rates(n, eps, delta, scenario, opts)?[0])
}

pub fn wh_rate(n: u64, eps: f64, delta: f64, scenario: &Scenario, opts: &SearchOptions) -> Result<BoundPoint> {
    Ok(achievability_rates(n, eps, delta, scenario, opts)?[1])
}

/// n-letter spectra for the discrete memoryless achievability bounds.
#[derive(Debug, Clone)]
pub struct DmcAchievability {
    /// i(Xⁿ;Yⁿ) under P_XY
    pub legit: LogSpectrum,
    /// ı(xⁿ;Zⁿ) w.r.t. Q_Zⁿ under P_{Z|X=x}ⁿ (the same for every codeword)
    pub eve: LogSpectrum,
    /// Whether the RCU inner probability reduces to a spectrum tail.
    pub rcu_exact: bool,
}

impl DmcAchievability {
    pub fn new(d: &DmcScenario, n: u64, opts: &SearchOptions) -> Result<Self> {
        let py_x = d.channel.py_x();
        let pz_x = d.channel.pz_x();
        let py = py_x.output(&d.input)?;
        let q_z = match &d.q_z {
            Some(q) => q.clone(),
            None => pz_x.output(&d.input)?,
        };
        let support: Vec<usize> = (0..d.input.len()).filter(|&x| d.input[x] > 0.0).collect();
        if !llr_law_is_input_invariant(pz_x, &q_z, &support)? {
            return Err(Error::Unsupported(
                "eavesdropper information density law depends on the input letter; the worst-codeword term needs an input-invariant law".into(),
            ));
        }
        let legit_atoms = dmc_llr_atoms(&d.input, py_x, &py)?;
        let eve_atoms = dmc_llr_atoms(&FiniteDist::point(d.input.len(), support[0]), pz_x, &q_z)?;
        Ok(Self {
            legit: nfold_spectrum(&legit_atoms, n, opts.target_bins, opts.max_bins)?,
            eve: nfold_spectrum(&eve_atoms, n, opts.target_bins, opts.max_bins)?,
            rcu_exact: is_output_symmetric(&d.input, py_x, &py),
        })
    }

    /// min{RCU(MK), DT((MK−1)/2)} at MK = e^{ln_mk}.
    pub fn eps_bound_ln(&self, ln_mk: f64) -> f64 {
        let tails = self.legit.tails();
        self.eps_with(&tails, ln_mk)
    }

    fn eps_with(&self, tails: &SpectrumTails<'_>, ln_mk: f64) -> f64 {
        let ln_dt = ln_minus_one(ln_mk) - LN_2;
        let dt = if ln_dt == f64::NEG_INFINITY { 0.0 } else { dt_ln(tails, ln_dt) };
        if self.rcu_exact {
            dt.min(rcu_spectrum_ln(&self.legit, tails, ln_minus_one(ln_mk)))
        } else {
            dt
        }
    }

    pub fn max_ln_size(&self, eps: f64) -> f64 {
        let tails = self.legit.tails();
        let hi = (self.legit.mean() + 10.0 * self.legit.variance().sqrt()).max(1.0);
        largest_where(0.0, hi, |x| self.eps_with(&tails, x) <= eps)
    }
}

/// True when, for every output y, the multiset {(i(x;y), P_X(x))} is the same.
fn is_output_symmetric(px: &FiniteDist, w: &Kernel, py: &FiniteDist) -> bool {
    let mut reference: Option<Vec<(f64, f64)>> = None;
    for y in 0..w.outputs() {
        if py[y] <= 0.0 {
            continue;
        }
        let mut v: Vec<(f64, f64)> = (0..w.inputs())
            .filter(|&x| px[x] > 0.0)
            .map(|x| {
                let p = w.row(x)[y];
                (if p > 0.0 { (p / py[y]).ln() } else { f64::NEG_INFINITY }, px[x])
            })
            .collect();
        v.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        match &reference {
            None => reference = Some(v),
            Some(r) => {
                let same = r.len() == v.len()
                    && r.iter().zip(&v).all(|(a, b)| {
                        (a.0 == b.0 || (a.0 - b.0).abs() <= 1e-10 * (1.0 + a.0.abs())) && (a.1 - b.1).abs() <= 1e-12
                    });
                if !same {
                    return false;
                }
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::DMWiretap;

    fn fig1() -> GaussianWiretap {
        GaussianWiretap::from_snr_db(3.0, -3.0).unwrap()
    }

    #[test]
    fn degenerate_eavesdropper() {
        let law = LogSpectrum::point_mass(0.0, 0.1).unwrap();
        let t = law.tails();
        assert!((lemma1_delta(&t, 4.0, 1.0).unwrap() - 0.25).abs() < 1e-15);
        assert!((wh_baseline_delta(&t, 100.0, 1.0).unwrap() - 0.05).abs() < 1e-15);
        assert!(lemma1_delta(&t, 0.5, 1.0).is_err());
        assert!(lemma1_delta(&t, 2.0, 0.0).is_err());
    }

    #[test]
    fn continuous_tails_match_change_of_measure() {
        let g = fig1();
        let p = gauss_eve_llr(&g, 40, Measure::Signal).unwrap();
        let q = gauss_eve_llr(&g, 40, Measure::Noise).unwrap();
        for t in [-10.0f64, 0.0, 5.0, 14.0, 30.0] {
            let direct = t.exp() * q.sf(t);
            assert!((p.scaled_q_tail(t) - direct).abs() <= 1e-10 * (1.0 + direct), "t={t}");
        }
        // E_P[e^{L−t}1{L<t}] by quadrature over the density
        let t = 12.0;
        let lo = p.lower_quantile(-60.0);
        let r = crate::probkit::quad::Rule::composite(lo, t, 400, 10);
        let direct = r.integrate(|x| (x - t).exp() * p.pdf(x));
        assert!((p.scaled_lower(t) - direct).abs() < 1e-10);
    }

    #[test]
    fn weakened_baseline_dominates() {
        let law = gauss_eve_llr(&fig1(), 500, Measure::Signal).unwrap();
        for (k, g) in [(2f64.powi(40), 1e20), (1e30, 1e25), (8.0, 2.0)] {
            let a = lemma1_delta(&law, k, g).unwrap();
            let b = wh_baseline_delta(&law, k, g).unwrap();
            assert!(a <= b);
        }
        let k = 2f64.powi(60);
        let (d, t) = optimize_gamma(&law, k, false, 64).unwrap();
        let (dw, _) = optimize_gamma(&law, k, true, 64).unwrap();
        assert!(d < dw);
        assert!(d <= lemma1_delta(&law, k, t.exp()).unwrap() + 1e-15);
    }

    #[test]
    fn cap_fraction_limits() {
        assert!((ln_cap_fraction(10, 1.0, true) - 0.5f64.ln()).abs() < 1e-14);
        assert!(ln_cap_fraction(10, 0.0, false).abs() < 1e-14);
        assert_eq!(ln_cap_fraction(10, 0.0, true), f64::NEG_INFINITY);
    }

    #[test]
    fn rcu_single_codeword_is_zero() {
        let e = rcu_sphere(10, 1.0, &fig1(), 1000, 3).unwrap();
        assert_eq!(e.mean, 0.0);
    }

    #[test]
    fn bin_choice_meets_delta() {
        let law = gauss_eve_llr(&fig1(), 300, Measure::Signal).unwrap();
        let c = min_bin_size(&law, 1e-3, false, 64, &[]).unwrap();
        let k = (c.ln_k / LN_2).ceil().exp2();
        assert!(lemma1_delta(&law, k, c.ln_gamma.unwrap().exp()).unwrap() <= 1e-3 * (1.0 + 1e-9));
        assert_eq!(min_bin_size(&law, 1.0, false, 64, &[]).unwrap().ln_k, 0.0);
    }

    #[test]
    fn bsc_spectra_are_exact_lattices() {
        let d = DmcScenario { channel: DMWiretap::bsc_pair(0.05, 0.2).unwrap(), input: FiniteDist::uniform(2), q_z: None };
        let ctx = DmcAchievability::new(&d, 20, &SearchOptions::default()).unwrap();
        assert!(ctx.rcu_exact);
        // i(X;Y) for BSC: ln 2(1−p) per agreement, ln 2p per flip.
        let (a, b) = ((2.0 * 0.95f64).ln(), (0.1f64).ln());
        let w = ctx.legit.tails();
        let t = 17.0 * a + 3.0 * b;
        let mut exact = 0.0;
        for k in 0..=3u32 {
            let c = (0..k).fold(1.0, |acc, j| acc * (20 - j) as f64 / (j + 1) as f64);
            exact += c * 0.05f64.powi(k as i32) * 0.95f64.powi(20 - k as i32);
        }
        assert!((w.p_tail(t - 1e-9) - exact).abs() < 1e-12);
    }

    #[test]
    fn gaussian_rates_are_ordered() {
        let opts = SearchOptions { mc_samples: 20_000, ..Default::default() };
        let [t, w] = achievability_rates(500, 1e-3, 1e-3, &Scenario::Gaussian(fig1()), &opts).unwrap();
        assert_eq!(t.status, Status::Ok);
        assert!(t.rate_bits >= w.rate_bits);
        assert!(t.rate_bits > 0.0 && t.rate_bits < 0.4983);
    }
}
