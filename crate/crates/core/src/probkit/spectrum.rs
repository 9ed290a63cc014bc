//! Lattice-quantized laws of log-likelihood ratios.
//!
//! A [`LogSpectrum`] stores the law of `L = ln dP/dQ` under `P` on the lattice
//! `offset + k·step`. Alongside the P-masses it keeps the Q-masses, stored as
//! `Q(site)·e^{site}`: that array convolves exactly like the P-masses (the
//! exponent is additive) and stays O(1) in magnitude, so Q-tails far above the
//! bulk are recovered without ever forming `e^{-L}` for large `L`.

use super::special::log_add_exp;
use crate::error::{domain, Error, Result};
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

/// Default cap on lattice length.
pub const MAX_BINS: usize = 1 << 22;

/// Entries below this fraction of the array maximum (times log2 of the FFT
/// size) are FFT round-off and are cleared before edge trimming.
const NOISE_FLOOR: f64 = 1e-14;
/// Below this size direct convolution is cheaper and exact.
const DIRECT_LIMIT: usize = 64;
/// Sparse direct convolution is used while nnz(a)·nnz(b) stays below this.
const SPARSE_WORK: usize = 1 << 25;
const SNAP: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct LogSpectrum {
    offset: f64,
    step: f64,
    weights: Vec<f64>,
    tilted: Vec<f64>,
    neg_inf: f64,
    pos_inf: f64,
}

impl LogSpectrum {
    /// Build from atoms `(value, P-mass)`; the Q-mass of each atom is
    /// `P-mass·e^{−value}`. `+∞` atoms have no Q-mass; `−∞` atoms have no P-mass
    /// in a genuine likelihood-ratio law but are carried if given.
    pub fn from_atoms(atoms: &[(f64, f64)], step: f64) -> Result<Self> {
        if !(step > 0.0 && step.is_finite()) {
            return domain(format!("lattice step must be positive, got {step}"));
        }
        let mut total = 0.0;
        for &(v, p) in atoms {
            if !(p >= 0.0) || !p.is_finite() || v.is_nan() {
                return Err(Error::InvalidDistribution(format!("bad atom ({v}, {p})")));
            }
            total += p;
        }
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidDistribution(format!("atom masses sum to {total}")));
        }
        let finite = atoms.iter().filter(|a| a.0.is_finite() && a.1 > 0.0);
        let lo = finite.clone().map(|a| a.0).fold(f64::INFINITY, f64::min);
        let hi = finite.map(|a| a.0).fold(f64::NEG_INFINITY, f64::max);
        let mut neg_inf = 0.0;
        let mut pos_inf = 0.0;
        for &(v, p) in atoms {
            if v == f64::INFINITY {
                pos_inf += p / total;
            } else if v == f64::NEG_INFINITY {
                neg_inf += p / total;
            }
        }
        if lo > hi {
            // Only infinite atoms.
            return Ok(Self { offset: 0.0, step, weights: vec![0.0], tilted: vec![0.0], neg_inf, pos_inf });
        }
        let len = ((hi - lo) / step + SNAP).floor() as usize + 2;
        if len > MAX_BINS {
            return Err(Error::LatticeOverflow { needed: len, cap: MAX_BINS });
        }
        let mut weights = vec![0.0; len];
        let mut tilted = vec![0.0; len];
        for &(v, p) in atoms {
            if !v.is_finite() || p == 0.0 {
                continue;
            }
            let p = p / total;
            let u = (v - lo) / step;
            let mut k = u.floor() as usize;
            let mut f = u - k as f64;
            if f < SNAP {
                f = 0.0;
            } else if f > 1.0 - SNAP {
                k += 1;
                f = 0.0;
            }
            let site = |k: usize| lo + k as f64 * step;
            weights[k] += p * (1.0 - f);
            tilted[k] += p * (1.0 - f) * (site(k) - v).exp();
            if f > 0.0 {
                weights[k + 1] += p * f;
                tilted[k + 1] += p * f * (site(k + 1) - v).exp();
            }
        }
        let mut s = Self { offset: lo, step, weights, tilted, neg_inf, pos_inf };
        s.trim_edges();
        Ok(s)
    }

    /// A single atom at `value`.
    pub fn point_mass(value: f64, step: f64) -> Result<Self> {
        Self::from_atoms(&[(value, 1.0)], step)
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }
    pub fn step(&self) -> f64 {
        self.step
    }
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
    pub fn len(&self) -> usize {
        self.weights.len()
    }
    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
    pub fn neg_inf_mass(&self) -> f64 {
        self.neg_inf
    }
    pub fn pos_inf_mass(&self) -> f64 {
        self.pos_inf
    }
    pub fn site(&self, k: usize) -> f64 {
        self.offset + k as f64 * self.step
    }
    /// Q-mass at lattice site k.
    pub fn q_mass(&self, k: usize) -> f64 {
        self.tilted[k] * (-self.site(k)).exp()
    }

    /// Total mass (finite sites plus both infinite atoms).
    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum::<f64>() + self.neg_inf + self.pos_inf
    }

    /// Total Q-mass on the finite sites.
    pub fn q_total(&self) -> f64 {
        self.tail_scaled_q_all().0
    }

    fn tail_scaled_q_all(&self) -> (f64, f64) {
        let mut acc = 0.0;
        let decay = (-self.step).exp();
        for &q in self.tilted.iter().rev() {
            acc = q + decay * acc;
        }
        (acc * (-self.offset).exp(), acc)
    }

    pub fn mean(&self) -> f64 {
        if self.pos_inf > 0.0 && self.neg_inf > 0.0 {
            return f64::NAN;
        }
        if self.pos_inf > 0.0 {
            return f64::INFINITY;
        }
        if self.neg_inf > 0.0 {
            return f64::NEG_INFINITY;
        }
        self.weights.iter().enumerate().map(|(k, w)| w * self.site(k)).sum()
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        if !m.is_finite() {
            return f64::INFINITY;
        }
        self.weights.iter().enumerate().map(|(k, w)| w * (self.site(k) - m).powi(2)).sum()
    }

    /// Finite lattice atoms `(site, P-mass)` with positive mass.
    pub fn atoms(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.weights.iter().enumerate().filter(|(_, &w)| w > 0.0).map(|(k, &w)| (self.site(k), w))
    }

    fn trim_edges(&mut self) {
        let keep = |w: f64, q: f64| w > 0.0 || q > 0.0;
        let first = (0..self.len()).find(|&k| keep(self.weights[k], self.tilted[k]));
        let Some(first) = first else {
            self.weights.truncate(1);
            self.tilted.truncate(1);
            return;
        };
        let last = (0..self.len()).rev().find(|&k| keep(self.weights[k], self.tilted[k])).unwrap();
        if first > 0 || last + 1 < self.len() {
            self.weights = self.weights[first..=last].to_vec();
            self.tilted = self.tilted[first..=last].to_vec();
            self.offset += first as f64 * self.step;
        }
    }

    /// Law of the sum of independent variables with laws `self` and `other`.
    pub fn convolve(&self, other: &LogSpectrum, max_bins: usize) -> Result<LogSpectrum> {
        if ((self.step - other.step) / self.step).abs() > 1e-12 {
            return domain(format!("lattice steps differ: {} vs {}", self.step, other.step));
        }
        let has_neg = self.neg_inf > 0.0 || other.neg_inf > 0.0;
        let has_pos = self.pos_inf > 0.0 || other.pos_inf > 0.0;
        if has_neg && has_pos {
            return domain("sum of +inf and -inf atoms is undefined");
        }
        let needed = self.len() + other.len() - 1;
        if needed > max_bins {
            return Err(Error::LatticeOverflow { needed, cap: max_bins });
        }
        let fin_a = 1.0 - self.neg_inf - self.pos_inf;
        let fin_b = 1.0 - other.neg_inf - other.pos_inf;
        let q_target = self.q_total() * other.q_total();
        let (mut w, mut q, fft_size) = convolve_pair(&self.weights, &self.tilted, &other.weights, &other.tilted);
        for arr in [&mut w, &mut q] {
            let max = arr.iter().cloned().fold(0.0, f64::max);
            let floor = match fft_size {
                Some(size) => max * NOISE_FLOOR * (size as f64).log2(),
                None => 0.0,
            };
            for v in arr.iter_mut() {
                if *v <= floor {
                    *v = 0.0;
                }
            }
        }
        let mut out = LogSpectrum {
            offset: self.offset + other.offset,
            step: self.step,
            weights: w,
            tilted: q,
            neg_inf: 1.0 - (1.0 - self.neg_inf) * (1.0 - other.neg_inf),
            pos_inf: 1.0 - (1.0 - self.pos_inf) * (1.0 - other.pos_inf),
        };
        out.trim_edges();
        let w_sum: f64 = out.weights.iter().sum();
        if w_sum > 0.0 {
            let c = fin_a * fin_b / w_sum;
            out.weights.iter_mut().for_each(|v| *v *= c);
        }
        // Only a round-off correction: a large discrepancy means Q-mass was
        // legitimately cleared with the noise, and rescaling would smear it.
        let q_sum = out.q_total();
        if q_sum > 0.0 && q_target > 0.0 {
            let c = q_target / q_sum;
            if (c - 1.0).abs() < 1e-6 {
                out.tilted.iter_mut().for_each(|v| *v *= c);
            }
        }
        Ok(out)
    }

    /// Law of the sum of `n` i.i.d. copies, by exponentiation by squaring.
    pub fn self_convolve(&self, n: u64, max_bins: usize) -> Result<LogSpectrum> {
        if n == 0 {
            return domain("self_convolve needs n >= 1");
        }
        let mut result: Option<LogSpectrum> = None;
        let mut base = self.clone();
        let mut m = n;
        loop {
            if m & 1 == 1 {
                result = Some(match result {
                    None => base.clone(),
                    Some(r) => r.convolve(&base, max_bins)?,
                });
            }
            m >>= 1;
            if m == 0 {
                break;
            }
            base = base.convolve(&base, max_bins)?;
        }
        Ok(result.unwrap())
    }

    /// Precomputed cumulative sums for threshold queries.
    pub fn tails(&self) -> SpectrumTails<'_> {
        SpectrumTails::new(self)
    }
}

/// Convolve two (P, tilted-Q) array pairs. Returns the FFT size when the
/// result carries round-off (None when it was computed exactly).
fn convolve_pair(aw: &[f64], aq: &[f64], bw: &[f64], bq: &[f64]) -> (Vec<f64>, Vec<f64>, Option<usize>) {
    let out_len = aw.len() + bw.len() - 1;
    let nz = |w: &[f64], q: &[f64]| (0..w.len()).filter(|&k| w[k] != 0.0 || q[k] != 0.0).collect::<Vec<_>>();
    let (na, nb) = (nz(aw, aq), nz(bw, bq));
    if aw.len().min(bw.len()) <= DIRECT_LIMIT || na.len().saturating_mul(nb.len()) <= SPARSE_WORK {
        let mut w = vec![0.0; out_len];
        let mut q = vec![0.0; out_len];
        for &i in &na {
            for &j in &nb {
                w[i + j] += aw[i] * bw[j];
                q[i + j] += aq[i] * bq[j];
            }
        }
        return (w, q, None);
    }
    let size = out_len.next_power_of_two();
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(size);
    let inv = planner.plan_fft_inverse(size);
    // The two arrays are transformed separately: packing them as real and
    // imaginary parts leaks round-off of the larger one into the smaller.
    let transform = |x: &[f64]| {
        let mut z = vec![Complex::new(0.0, 0.0); size];
        for (k, &v) in x.iter().enumerate() {
            z[k] = Complex::new(v, 0.0);
        }
        fwd.process(&mut z);
        z
    };
    let product = |a: &[f64], b: &[f64]| {
        let fa = transform(a);
        let mut z: Vec<Complex<f64>> =
            if std::ptr::eq(a, b) { fa.iter().map(|c| c * c).collect() } else { fa.iter().zip(transform(b)).map(|(x, y)| x * y).collect() };
        inv.process(&mut z);
        let norm = 1.0 / size as f64;
        z[..out_len].iter().map(|c| (c.re * norm).max(0.0)).collect::<Vec<f64>>()
    };
    (product(aw, bw), product(aq, bq), Some(size))
}

/// Threshold queries on a spectrum: P-tails, Q-tails by change of measure, and
/// the lower exponential moment used by the privacy-amplification bound.
#[derive(Debug, Clone)]
pub struct SpectrumTails<'a> {
    spec: &'a LogSpectrum,
    /// Σ_{j≥k} w_j
    p_upper: Vec<f64>,
    /// Σ_{j≥k} q̃_j e^{−(ℓ_j − ℓ_k)}; Q[L ≥ ℓ_k] = e^{−ℓ_k}·this
    q_upper: Vec<f64>,
    /// Σ_{j<k} w_j e^{ℓ_j − ℓ_k}, length len+1
    lower: Vec<f64>,
}

impl<'a> SpectrumTails<'a> {
    fn new(spec: &'a LogSpectrum) -> Self {
        let n = spec.len();
        let decay = (-spec.step).exp();
        let mut p_upper = vec![0.0; n + 1];
        let mut q_upper = vec![0.0; n + 1];
        for k in (0..n).rev() {
            p_upper[k] = p_upper[k + 1] + spec.weights[k];
            q_upper[k] = spec.tilted[k] + decay * q_upper[k + 1];
        }
        let mut lower = vec![0.0; n + 1];
        for k in 1..=n {
            lower[k] = decay * (lower[k - 1] + spec.weights[k - 1]);
        }
        Self { spec, p_upper, q_upper, lower }
    }

    pub fn spectrum(&self) -> &LogSpectrum {
        self.spec
    }

    /// First site index with ℓ_k ≥ t, clamped to [0, len].
    fn index(&self, t: f64) -> usize {
        let u = (t - self.spec.offset) / self.spec.step;
        if u <= 0.0 {
            0
        } else {
            ((u - SNAP).ceil().max(0.0) as usize).min(self.spec.len())
        }
    }

    /// P[L ≥ t].
    pub fn p_tail(&self, t: f64) -> f64 {
        (self.p_upper[self.index(t)] + self.spec.pos_inf).min(1.0)
    }

    /// e^t·Q[L ≥ t] = E_P[e^{−(L−t)} 1{L ≥ t}].
    pub fn scaled_q_tail(&self, t: f64) -> f64 {
        let k = self.index(t);
        if k >= self.spec.len() {
            return 0.0;
        }
        (t - self.spec.site(k)).exp() * self.q_upper[k]
    }

    /// ln Q[L ≥ t].
    pub fn ln_q_tail(&self, t: f64) -> f64 {
        let k = self.index(t);
        if k >= self.spec.len() {
            return f64::NEG_INFINITY;
        }
        self.q_upper[k].ln() - self.spec.site(k)
    }

    /// E_P[e^{L−t} 1{L < t}].
    pub fn scaled_lower(&self, t: f64) -> f64 {
        let k = self.index(t);
        (self.spec.site(k) - t).exp() * self.lower[k]
    }

    /// ln β_α: Q-mass of the optimal randomized test of level α under P.
    pub fn ln_beta(&self, alpha: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&alpha) {
            return domain(format!("alpha must lie in [0,1], got {alpha}"));
        }
        let s = self.spec;
        let pos = s.pos_inf;
        if alpha <= pos {
            return Ok(f64::NEG_INFINITY);
        }
        let n = s.len();
        // Largest k with p_upper[k] + pos ≥ α.
        let mut lo = 0usize;
        let mut hi = n;
        if self.p_upper[0] + pos < alpha {
            // Whole finite lattice accepted (α = 1 up to rounding).
            return Ok(self.q_upper[0].ln() - s.offset);
        }
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if self.p_upper[mid] + pos >= alpha {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let k = lo;
        let above_p = self.p_upper[k + 1] + pos;
        let frac = if s.weights[k] > 0.0 { ((alpha - above_p) / s.weights[k]).clamp(0.0, 1.0) } else { 0.0 };
        let ln_above = if k + 1 < n && self.q_upper[k + 1] > 0.0 {
            self.q_upper[k + 1].ln() - s.site(k + 1)
        } else {
            f64::NEG_INFINITY
        };
        let ln_edge = if frac > 0.0 && s.tilted[k] > 0.0 {
            (frac * s.tilted[k]).ln() - s.site(k)
        } else {
            f64::NEG_INFINITY
        };
        Ok(log_add_exp(ln_above, ln_edge))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn binomial_two_point() {
        let s = LogSpectrum::from_atoms(&[(0.0, 0.5), (1.0, 0.5)], 1.0).unwrap();
        let s2 = s.self_convolve(2, MAX_BINS).unwrap();
        let w = s2.weights();
        assert_eq!(w.len(), 3);
        assert!((w[0] - 0.25).abs() < 1e-15 && (w[1] - 0.5).abs() < 1e-15 && (w[2] - 0.25).abs() < 1e-15);
        assert_eq!(s2.offset(), 0.0);
        assert_eq!(s.self_convolve(1, MAX_BINS).unwrap(), s);
    }

    #[test]
    fn split_preserves_mean_and_q_mass() {
        let atoms = [(-0.37, 0.2), (0.1234, 0.5), (0.9, 0.3)];
        let s = LogSpectrum::from_atoms(&atoms, 0.05).unwrap();
        let mean: f64 = atoms.iter().map(|a| a.0 * a.1).sum();
        assert_relative_eq!(s.mean(), mean, epsilon = 1e-14);
        let q: f64 = atoms.iter().map(|a| a.1 * (-a.0).exp()).sum();
        assert_relative_eq!(s.q_total(), q, epsilon = 1e-14);
    }

    #[test]
    fn fft_path_matches_direct_binomial() {
        // Two-point law {0: 1−p, 1: p}; n-fold sum is Binomial(n, p).
        let p = 0.3;
        let s = LogSpectrum::from_atoms(&[(0.0, 1.0 - p), (1.0, p)], 1.0).unwrap();
        let n = 300u64;
        let sn = s.self_convolve(n, MAX_BINS).unwrap();
        let mut ln_c = 0.0f64;
        for k in 0..=n as usize {
            if k > 0 {
                ln_c += ((n as usize - k + 1) as f64 / k as f64).ln();
            }
            let exact = (ln_c + k as f64 * p.ln() + (n as usize - k) as f64 * (1.0 - p).ln()).exp();
            let idx = ((k as f64 - sn.offset()) / sn.step()).round();
            let got = if idx >= 0.0 && (idx as usize) < sn.len() { sn.weights()[idx as usize] } else { 0.0 };
            assert!((got - exact).abs() < 1e-13, "k={k}: {got} vs {exact}");
        }
        assert!((sn.total_mass() - 1.0).abs() < 1e-12);
        assert_relative_eq!(sn.mean(), n as f64 * p, epsilon = 1e-9);
    }

    #[test]
    fn tails_and_beta_on_two_point_llr() {
        // P = (.7,.3), Q = (.5,.5): L ∈ {ln 1.4, ln 0.6}
        let s = LogSpectrum::from_atoms(&[(1.4f64.ln(), 0.7), (0.6f64.ln(), 0.3)], 1e-3).unwrap();
        let t = s.tails();
        let g: f64 = 1.2;
        let e = t.p_tail(g.ln()) - t.scaled_q_tail(g.ln());
        assert!((e - 0.1).abs() < 1e-12);
        let b = t.ln_beta(0.9).unwrap().exp();
        // accept outcome 0 fully (P .7, Q .5), then 2/3 of outcome 1 (Q .5·2/3)
        assert!((b - (0.5 + 0.5 * 0.2 / 0.3)).abs() < 1e-12);
        assert!((t.ln_beta(1.0).unwrap().exp() - 1.0).abs() < 1e-12);
        assert_eq!(t.ln_beta(0.0).unwrap(), f64::NEG_INFINITY);
        assert!(t.ln_beta(1.5).is_err());
    }

    #[test]
    fn infinite_atoms() {
        let s = LogSpectrum::from_atoms(&[(f64::INFINITY, 0.25), (0.0, 0.75)], 0.1).unwrap();
        let t = s.tails();
        assert_eq!(t.p_tail(100.0), 0.25);
        assert_eq!(t.ln_beta(0.25).unwrap(), f64::NEG_INFINITY);
        let s2 = s.self_convolve(2, MAX_BINS).unwrap();
        assert!((s2.pos_inf_mass() - (1.0 - 0.75 * 0.75)).abs() < 1e-15);
        assert!((s2.total_mass() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn overflow_is_reported() {
        let s = LogSpectrum::from_atoms(&[(0.0, 0.5), (1.0, 0.5)], 0.001).unwrap();
        assert!(matches!(s.self_convolve(64, 10_000), Err(Error::LatticeOverflow { .. })));
        assert!(s.self_convolve(0, MAX_BINS).is_err());
    }
}
