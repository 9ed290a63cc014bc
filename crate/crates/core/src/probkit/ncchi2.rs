//! Noncentral chi-square laws, evaluated as Poisson mixtures of incomplete
//! gamma functions in the log domain.

use super::special::{ln_dpois_raw, ln_gamma_density, ln_inc_gamma_pq, log1m_exp, log_add_exp};
use crate::error::{domain, Result};

/// Terms further than this many nats below the running sum are dropped.
const DROP: f64 = 45.0;

/// Law of `shift + scale·W` with `W ~ χ²(dof, noncentrality)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoncentralChi2 {
    pub dof: u64,
    pub noncentrality: f64,
    pub scale: f64,
    pub shift: f64,
}

/// Index range of the Poisson(mu) weights that carry all but e^{-DROP} of the mass.
fn poisson_window(mu: f64) -> (u64, u64) {
    if mu <= 0.0 {
        return (0, 0);
    }
    let mode = mu.floor();
    let peak = ln_dpois_raw(mode, mu);
    let mut lo = mode;
    let width = (mu.sqrt() * 10.0).max(10.0);
    // Coarse outward search, then refine: ln pois is concave in j.
    let mut step = width;
    while lo > 0.0 {
        let cand = (lo - step).max(0.0);
        if ln_dpois_raw(cand, mu) < peak - DROP {
            if step <= 1.0 {
                break;
            }
            step = (step / 2.0).floor().max(1.0);
        } else {
            lo = cand;
        }
    }
    let mut hi = mode;
    let mut step = width;
    loop {
        let cand = hi + step;
        if ln_dpois_raw(cand, mu) < peak - DROP {
            if step <= 1.0 {
                hi = cand;
                break;
            }
            step = (step / 2.0).floor().max(1.0);
        } else {
            hi = cand;
        }
    }
    (lo as u64, hi as u64)
}

/// ln P[W ≤ w] for W ~ χ²(k, lambda).
pub fn ln_cdf_std(w: f64, k: f64, lambda: f64) -> f64 {
    if w <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if w.is_infinite() {
        return 0.0;
    }
    let y = w / 2.0;
    let a0 = k / 2.0;
    let mu = lambda / 2.0;
    if mu == 0.0 {
        return ln_inc_gamma_pq(a0, y).0;
    }
    let (_, j_hi) = poisson_window(mu);
    let mode = mu.floor() as u64;
    // Downward recurrence P(a) = P(a+1) + dpois_raw(a, y) is stable.
    let mut ln_p = ln_inc_gamma_pq(a0 + j_hi as f64, y).0;
    let mut ln_pois = ln_dpois_raw(j_hi as f64, mu);
    let mut sum = ln_pois + ln_p;
    let mut ln_d = ln_dpois_raw(a0 + j_hi as f64 - 1.0, y);
    let mut j = j_hi;
    while j > 0 {
        j -= 1;
        let a = a0 + j as f64;
        // ln_d currently holds ln dpois_raw(a, y).
        ln_p = log_add_exp(ln_p, ln_d);
        ln_pois += ((j + 1) as f64 / mu).ln();
        sum = log_add_exp(sum, ln_pois + ln_p);
        ln_d += (a / y).ln();
        if j < mode && ln_pois < sum - DROP {
            break;
        }
    }
    sum.min(0.0)
}

/// ln P[W > w] for W ~ χ²(k, lambda).
pub fn ln_sf_std(w: f64, k: f64, lambda: f64) -> f64 {
    if w <= 0.0 {
        return 0.0;
    }
    if w.is_infinite() {
        return f64::NEG_INFINITY;
    }
    let y = w / 2.0;
    let a0 = k / 2.0;
    let mu = lambda / 2.0;
    if mu == 0.0 {
        return ln_inc_gamma_pq(a0, y).1;
    }
    let (j_lo, _) = poisson_window(mu);
    let mode = mu.floor() as u64;
    // Upward recurrence Q(a+1) = Q(a) + dpois_raw(a, y) is stable.
    let mut ln_q = ln_inc_gamma_pq(a0 + j_lo as f64, y).1;
    let mut ln_pois = ln_dpois_raw(j_lo as f64, mu);
    let mut sum = ln_pois + ln_q;
    let mut ln_d = ln_dpois_raw(a0 + j_lo as f64, y);
    let mut j = j_lo;
    loop {
        j += 1;
        ln_q = log_add_exp(ln_q, ln_d);
        ln_pois += (mu / j as f64).ln();
        sum = log_add_exp(sum, ln_pois + ln_q);
        ln_d += (y / (a0 + j as f64)).ln();
        if j > mode && ln_pois < sum - DROP {
            break;
        }
    }
    sum.min(0.0)
}

/// ln density of W ~ χ²(k, lambda) at w.
pub fn ln_pdf_std(w: f64, k: f64, lambda: f64) -> f64 {
    if w <= 0.0 {
        if w == 0.0 && lambda == 0.0 {
            return ln_gamma_density(k / 2.0, 0.0) - std::f64::consts::LN_2;
        }
        return if w == 0.0 && k < 2.0 { f64::INFINITY } else { f64::NEG_INFINITY };
    }
    let y = w / 2.0;
    let a0 = k / 2.0;
    let mu = lambda / 2.0;
    let term = |j: f64| -> f64 {
        let lp = if mu == 0.0 { 0.0 } else { ln_dpois_raw(j, mu) };
        lp + ln_gamma_density(a0 + j, y)
    };
    if mu == 0.0 {
        return term(0.0) - std::f64::consts::LN_2;
    }
    // Terms are log-concave in j; start from the stationary point.
    let disc = (a0 + 1.0) * (a0 + 1.0) - 4.0 * (a0 - mu * y);
    let jstar = if disc > 0.0 { ((-(a0 + 1.0) + disc.sqrt()) / 2.0).max(0.0).floor() } else { 0.0 };
    let peak = term(jstar);
    let mut acc = 1.0;
    let mut r = 1.0;
    let mut j = jstar;
    loop {
        r *= mu * y / ((j + 1.0) * (a0 + j));
        j += 1.0;
        acc += r;
        if r < 1e-18 * acc {
            break;
        }
    }
    let mut r = 1.0;
    let mut j = jstar;
    while j > 0.0 {
        r *= j * (a0 + j - 1.0) / (mu * y);
        j -= 1.0;
        acc += r;
        if r < 1e-18 * acc {
            break;
        }
    }
    peak + acc.ln() - std::f64::consts::LN_2
}

impl NoncentralChi2 {
    pub fn new(dof: u64, noncentrality: f64, scale: f64, shift: f64) -> Result<Self> {
        if dof == 0 || !(noncentrality >= 0.0) || !noncentrality.is_finite() {
            return domain(format!("invalid noncentral chi2: dof={dof}, lambda={noncentrality}"));
        }
        if !scale.is_finite() || !shift.is_finite() {
            return domain("noncentral chi2 scale/shift must be finite");
        }
        Ok(Self { dof, noncentrality, scale, shift })
    }

    /// Standard law (scale 1, shift 0).
    pub fn standard(dof: u64, noncentrality: f64) -> Result<Self> {
        Self::new(dof, noncentrality, 1.0, 0.0)
    }

    fn k(&self) -> f64 {
        self.dof as f64
    }

    pub fn mean(&self) -> f64 {
        self.shift + self.scale * (self.k() + self.noncentrality)
    }

    pub fn variance(&self) -> f64 {
        self.scale * self.scale * 2.0 * (self.k() + 2.0 * self.noncentrality)
    }

    /// Returns (ln P[X ≤ x], ln P[X > x]) with the smaller side computed directly.
    pub fn ln_cdf_sf(&self, x: f64) -> (f64, f64) {
        if self.scale == 0.0 {
            return if x >= self.shift { (0.0, f64::NEG_INFINITY) } else { (f64::NEG_INFINITY, 0.0) };
        }
        let (k, l) = (self.k(), self.noncentrality);
        let w = (x - self.shift) / self.scale;
        let mean_w = k + l;
        // P[X ≤ x] = P[W ≤ w] for positive scale, P[W ≥ w] by reflection otherwise.
        let (lower_w, upper_w) = if w < mean_w {
            let lc = ln_cdf_std(w, k, l);
            (lc, log1m_exp(lc))
        } else {
            let ls = ln_sf_std(w, k, l);
            (log1m_exp(ls), ls)
        };
        if self.scale > 0.0 {
            (lower_w, upper_w)
        } else {
            (upper_w, lower_w)
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        self.ln_cdf_sf(x).0.exp()
    }

    pub fn sf(&self, x: f64) -> f64 {
        self.ln_cdf_sf(x).1.exp()
    }

    pub fn ln_cdf(&self, x: f64) -> f64 {
        self.ln_cdf_sf(x).0
    }

    pub fn ln_sf(&self, x: f64) -> f64 {
        self.ln_cdf_sf(x).1
    }

    pub fn ln_pdf(&self, x: f64) -> f64 {
        if self.scale == 0.0 {
            return if x == self.shift { f64::INFINITY } else { f64::NEG_INFINITY };
        }
        let w = (x - self.shift) / self.scale;
        ln_pdf_std(w, self.k(), self.noncentrality) - self.scale.abs().ln()
    }

    pub fn pdf(&self, x: f64) -> f64 {
        self.ln_pdf(x).exp()
    }

    /// ln E[e^{θX}], or `None` when the moment does not exist.
    pub fn ln_mgf(&self, theta: f64) -> Option<f64> {
        let t = theta * self.scale;
        if t >= 0.5 {
            return None;
        }
        let d = 1.0 - 2.0 * t;
        Some(theta * self.shift - 0.5 * self.k() * d.ln() + self.noncentrality * t / d)
    }

    /// Exponential tilt: the law of X under e^{θX}·P / E[e^{θX}], with ln E[e^{θX}].
    pub fn tilted(&self, theta: f64) -> Option<(NoncentralChi2, f64)> {
        let ln_m = self.ln_mgf(theta)?;
        let d = 1.0 - 2.0 * theta * self.scale;
        Some((
            NoncentralChi2 {
                dof: self.dof,
                noncentrality: self.noncentrality / d,
                scale: self.scale / d,
                shift: self.shift,
            },
            ln_m,
        ))
    }

    /// Smallest x with cdf(x) ≥ p, by bisection.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return domain(format!("quantile needs p in (0,1), got {p}"));
        }
        if self.scale == 0.0 {
            return Ok(self.shift);
        }
        let sd = self.variance().sqrt();
        let mut lo = self.mean() - 10.0 * sd;
        let mut hi = self.mean() + 10.0 * sd;
        while self.cdf(lo) > p {
            lo -= (hi - lo) * 2.0;
        }
        while self.cdf(hi) < p {
            hi += (hi - lo) * 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.cdf(mid) < p {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-13 * (1.0 + mid.abs()) {
                break;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// Upper quantile computed from the survival side (usable for p ≪ 1e-16).
    pub fn upper_quantile(&self, ln_p: f64) -> f64 {
        let sd = self.variance().sqrt().max(1e-300);
        let mut lo = self.mean();
        let mut hi = self.mean() + 10.0 * sd;
        while self.ln_sf(hi) > ln_p {
            let w = hi - lo;
            lo = hi;
            hi += 2.0 * w;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.ln_sf(mid) > ln_p {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-12 * (1.0 + mid.abs()) {
                break;
            }
        }
        0.5 * (lo + hi)
    }

    /// Lower quantile computed from the CDF side in log form.
    pub fn lower_quantile(&self, ln_p: f64) -> f64 {
        let sd = self.variance().sqrt().max(1e-300);
        let mut hi = self.mean();
        let mut lo = self.mean() - 10.0 * sd;
        while self.ln_cdf(lo) > ln_p {
            let w = hi - lo;
            hi = lo;
            lo -= 2.0 * w;
            if self.scale > 0.0 && lo <= self.shift {
                lo = self.shift;
                break;
            }
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.ln_cdf(mid) > ln_p {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo <= 1e-12 * (1.0 + mid.abs()) {
                break;
            }
        }
        0.5 * (lo + hi)
    }
}

/// CDF of a noncentral chi-square law at x.
pub fn nc_chi2_cdf(x: f64, d: &NoncentralChi2) -> f64 {
    d.cdf(x)
}
