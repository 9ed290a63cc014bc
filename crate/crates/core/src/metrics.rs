//! Total variation, the E_γ metric and the Neyman–Pearson β_α, exactly on finite
//! supports and by change of measure on lattice spectra.

use crate::error::{domain, Error, Result};
use crate::probkit::LogSpectrum;

const SUM_TOL: f64 = 1e-12;

/// A probability mass function on `0..len`.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteDist(Vec<f64>);

impl FiniteDist {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidDistribution("empty support".into()));
        }
        if probs.iter().any(|p| !(*p >= 0.0) || !p.is_finite()) {
            return Err(Error::InvalidDistribution("negative or non-finite mass".into()));
        }
        let s: f64 = probs.iter().sum();
        if (s - 1.0).abs() > SUM_TOL * probs.len().max(1) as f64 {
            return Err(Error::InvalidDistribution(format!("masses sum to {s}")));
        }
        Ok(Self(probs))
    }

    /// Normalize nonnegative weights.
    pub fn normalized(weights: Vec<f64>) -> Result<Self> {
        let s: f64 = weights.iter().sum();
        if weights.iter().any(|p| !(*p >= 0.0) || !p.is_finite()) || !(s > 0.0) {
            return Err(Error::InvalidDistribution("weights must be nonnegative with positive sum".into()));
        }
        Ok(Self(weights.into_iter().map(|w| w / s).collect()))
    }

    pub fn uniform(n: usize) -> Self {
        Self(vec![1.0 / n as f64; n])
    }

    pub fn point(n: usize, at: usize) -> Self {
        let mut v = vec![0.0; n];
        v[at] = 1.0;
        Self(v)
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Product law on `0..self.len()*other.len()`, index `i*other.len() + j`.
    pub fn product(&self, other: &FiniteDist) -> FiniteDist {
        let mut v = Vec::with_capacity(self.len() * other.len());
        for a in &self.0 {
            for b in &other.0 {
                v.push(a * b);
            }
        }
        Self(v)
    }
}

impl std::ops::Index<usize> for FiniteDist {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

fn same_support(p: &FiniteDist, q: &FiniteDist) -> Result<()> {
    if p.len() != q.len() {
        return Err(Error::SupportMismatch { left: p.len(), right: q.len() });
    }
    Ok(())
}

pub fn total_variation(p: &FiniteDist, q: &FiniteDist) -> Result<f64> {
    same_support(p, q)?;
    Ok(0.5 * p.0.iter().zip(&q.0).map(|(a, b)| (a - b).abs()).sum::<f64>())
}

/// E_γ(P, Q) = Σ max{P − γQ, 0}.
pub fn e_gamma(p: &FiniteDist, q: &FiniteDist, gamma: f64) -> Result<f64> {
    same_support(p, q)?;
    e_gamma_raw(p.probs(), q.probs(), gamma)
}

/// E_γ on raw (not necessarily normalized) mass vectors.
pub fn e_gamma_raw(p: &[f64], q: &[f64], gamma: f64) -> Result<f64> {
    if !(gamma > 0.0) {
        return domain(format!("gamma must be positive, got {gamma}"));
    }
    Ok(p.iter().zip(q).map(|(a, b)| (a - gamma * b).max(0.0)).sum())
}

/// β_α(P, Q): minimum Q-mass of a randomized test with P-mass α.
pub fn beta_alpha(p: &FiniteDist, q: &FiniteDist, alpha: f64) -> Result<f64> {
    same_support(p, q)?;
    beta_alpha_raw(p.probs(), q.probs(), alpha)
}

/// β_α on raw mass vectors (P need not sum exactly to one).
pub fn beta_alpha_raw(p: &[f64], q: &[f64], alpha: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&alpha) {
        return domain(format!("alpha must lie in [0,1], got {alpha}"));
    }
    if alpha == 0.0 {
        return Ok(0.0);
    }
    let mut idx: Vec<usize> = (0..p.len()).filter(|&i| p[i] > 0.0).collect();
    // Descending likelihood ratio, Q = 0 atoms (ratio ∞) first. The ratio is a
    // per-atom key, so the order stays total even when masses are tiny.
    let ratio = |i: usize| if q[i] > 0.0 { p[i] / q[i] } else { f64::INFINITY };
    idx.sort_by(|&i, &j| ratio(j).total_cmp(&ratio(i)));
    let mut acc_p = 0.0;
    let mut beta = 0.0;
    for &i in &idx {
        if acc_p + p[i] >= alpha {
            return Ok(beta + q[i] * (alpha - acc_p) / p[i]);
        }
        acc_p += p[i];
        beta += q[i];
    }
    // α exceeds the P-mass by rounding: accept everything with P > 0.
    Ok(beta)
}

/// E_γ from the law of ln dP/dQ under P.
pub fn e_gamma_spectrum(l: &LogSpectrum, gamma: f64) -> Result<f64> {
    if !(gamma > 0.0) {
        return domain(format!("gamma must be positive, got {gamma}"));
    }
    let t = l.tails();
    let lg = gamma.ln();
    Ok((t.p_tail(lg) - t.scaled_q_tail(lg)).max(0.0))
}

/// β_α from the law of ln dP/dQ under P.
pub fn beta_alpha_spectrum(l: &LogSpectrum, alpha: f64) -> Result<f64> {
    Ok(l.tails().ln_beta(alpha)?.exp())
}
