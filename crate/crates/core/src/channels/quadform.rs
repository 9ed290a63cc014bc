//! Laws of the form `constant + Σ λ_j·χ²(dof_j, ν_j)` with independent terms.
//!
//! Two-term CDFs are computed by integrating the outer term's density against
//! the inner term's CDF. [`QuadFormTable`] additionally tabulates the inner
//! functions once so that the many threshold queries of a converse search are
//! cheap.

use crate::error::{domain, Error, Result};
use crate::probkit::quad::Rule;
use crate::probkit::NoncentralChi2;

/// Outer-mass truncation (each side).
const LN_TRUNC: f64 = -46.0;
const ORDER: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadTerm {
    pub eigenvalue: f64,
    pub dof: u64,
    pub noncentrality: f64,
}

impl QuadTerm {
    fn law(&self, shift: f64) -> Result<NoncentralChi2> {
        NoncentralChi2::new(self.dof, self.noncentrality, self.eigenvalue, shift)
    }
    fn standard(&self) -> Result<NoncentralChi2> {
        NoncentralChi2::standard(self.dof, self.noncentrality)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadFormLLR {
    pub constant: f64,
    pub terms: Vec<QuadTerm>,
}

impl QuadFormLLR {
    pub fn mean(&self) -> f64 {
        self.constant + self.terms.iter().map(|t| t.eigenvalue * (t.dof as f64 + t.noncentrality)).sum::<f64>()
    }

    pub fn variance(&self) -> f64 {
        self.terms
            .iter()
            .map(|t| 2.0 * t.eigenvalue * t.eigenvalue * (t.dof as f64 + 2.0 * t.noncentrality))
            .sum()
    }
}

/// Quadrature rule covering all but ~e^{-46} of the mass of a standard
/// noncentral χ², with panels no wider than `h`, split at `kink` if given.
fn outer_rule(law: &NoncentralChi2, h: f64, kink: Option<f64>) -> Rule {
    let hi = law.upper_quantile(LN_TRUNC);
    let lo = law.lower_quantile(LN_TRUNC).max(0.0);
    // The density has a power-type singularity at the origin for small dof.
    let origin = law.dof < 20 && lo < h;
    let lo = if origin { 0.0 } else { lo };
    match kink {
        Some(k) if k > lo && k < hi => {
            let mut r = Rule::graded(lo, k, h, origin, true, ORDER);
            r.append(Rule::graded(k, hi, h, true, false, ORDER));
            r
        }
        _ => Rule::graded(lo, hi, h, origin, false, ORDER),
    }
}

/// Outer/inner split for a two-term form: integrate over the term with the
/// larger spread, evaluate the other's CDF at each node.
fn split(q: &QuadFormLLR) -> (QuadTerm, QuadTerm) {
    let spread = |t: &QuadTerm| t.eigenvalue.abs() * (2.0 * (t.dof as f64 + 2.0 * t.noncentrality)).sqrt();
    let (a, b) = (q.terms[0], q.terms[1]);
    if spread(&a) >= spread(&b) {
        (a, b)
    } else {
        (b, a)
    }
}

fn outer_step(outer: &QuadTerm, inner: &QuadTerm) -> f64 {
    let sd = |t: &QuadTerm| (2.0 * (t.dof as f64 + 2.0 * t.noncentrality)).sqrt();
    let inner_in_outer_units = inner.eigenvalue.abs() * sd(inner) / outer.eigenvalue.abs();
    0.5 * sd(outer).min(inner_in_outer_units).max(1e-3)
}

/// P[constant + Σ λ_j χ²_j ≤ x] for at most two terms.
pub fn quadform_cdf(q: &QuadFormLLR, x: f64) -> Result<f64> {
    match q.terms.len() {
        0 => Ok(if x >= q.constant { 1.0 } else { 0.0 }),
        1 => Ok(q.terms[0].law(q.constant)?.cdf(x)),
        2 => {
            let (outer, inner) = split(q);
            // The inner CDF has a power-type kink where its argument crosses 0.
            let kink = (x - q.constant) / outer.eigenvalue;
            let rule = outer_rule(&outer.standard()?, outer_step(&outer, &inner), Some(kink));
            let std = outer.standard()?;
            let mut acc = 0.0;
            for (&w, &wt) in rule.nodes.iter().zip(&rule.weights) {
                let f = std.pdf(w);
                if f == 0.0 {
                    continue;
                }
                let inner_law = inner.law(q.constant + outer.eigenvalue * w)?;
                acc += wt * f * inner_law.cdf(x);
            }
            Ok(acc.clamp(0.0, 1.0))
        }
        k => Err(Error::Unsupported(format!("CDF of a {k}-term quadratic form"))),
    }
}

/// Cubic Hermite table of a function and its derivative on a uniform grid.
#[derive(Debug, Clone)]
struct Hermite {
    lo: f64,
    h: f64,
    f: Vec<f64>,
    df: Vec<f64>,
}

impl Hermite {
    fn eval(&self, s: f64) -> f64 {
        let u = (s - self.lo) / self.h;
        let i = (u.floor() as isize).clamp(0, self.f.len() as isize - 2) as usize;
        let t = u - i as f64;
        let (t2, t3) = (t * t, t * t * t);
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * self.f[i] + h10 * self.h * self.df[i] + h01 * self.f[i + 1] + h11 * self.h * self.df[i + 1]
    }
}

/// Fast threshold queries for an LLR law `c + λ·W₊ − μ·W₋` (λ > 0, 0 < μ < ½)
/// under the null: P[L ≥ x] and the change-of-measure Q-tail.
#[derive(Debug, Clone)]
pub struct QuadFormTable {
    constant: f64,
    lam: f64,
    mu: f64,
    nodes: Vec<f64>,
    /// quadrature weight × outer density
    mass: Vec<f64>,
    s_lo: f64,
    s_hi: f64,
    ln_mgf_mu: f64,
    cdf: Hermite,
    /// G(s) = E[e^{−μ(s−W₋)} 1{W₋ ≤ s}]
    g: Hermite,
    mean: f64,
    sd: f64,
}

impl QuadFormTable {
    pub fn new(q: &QuadFormLLR) -> Result<Self> {
        if q.terms.len() != 2 {
            return Err(Error::Unsupported("table needs exactly two terms".into()));
        }
        let (pos, neg) = if q.terms[0].eigenvalue > 0.0 { (q.terms[0], q.terms[1]) } else { (q.terms[1], q.terms[0]) };
        if !(pos.eigenvalue > 0.0 && neg.eigenvalue < 0.0 && neg.eigenvalue > -0.5) {
            return Err(Error::Unsupported("table needs one positive and one negative eigenvalue above -1/2".into()));
        }
        let mu = -neg.eigenvalue;
        let wneg = neg.standard()?;
        let (tilted, ln_mgf_mu) = wneg.tilted(mu).ok_or_else(|| Error::Domain("tilt does not exist".into()))?;
        let sd_n = wneg.variance().sqrt();
        let sd_t = tilted.variance().sqrt();
        let s_lo = wneg.lower_quantile(LN_TRUNC).min(tilted.lower_quantile(LN_TRUNC)).max(0.0);
        let s_hi = wneg.upper_quantile(LN_TRUNC).max(tilted.upper_quantile(LN_TRUNC));
        let h = sd_n.min(sd_t) / 48.0;
        let count = (((s_hi - s_lo) / h).ceil() as usize + 1).max(2);
        let h = (s_hi - s_lo) / (count - 1) as f64;
        let mut cdf = Hermite { lo: s_lo, h, f: Vec::with_capacity(count), df: Vec::with_capacity(count) };
        let mut g = Hermite { lo: s_lo, h, f: Vec::with_capacity(count), df: Vec::with_capacity(count) };
        for i in 0..count {
            let s = s_lo + i as f64 * h;
            let f = if s > 0.0 { wneg.pdf(s) } else { 0.0 };
            let c = wneg.cdf(s);
            let gv = (-mu * s + ln_mgf_mu + tilted.ln_cdf(s)).exp();
            cdf.f.push(c);
            cdf.df.push(f);
            g.f.push(gv);
            g.df.push(f - mu * gv);
        }
        let wpos = pos.standard()?;
        let rule = outer_rule(&wpos, outer_step(&pos, &neg), None);
        let mut nodes = Vec::with_capacity(rule.nodes.len());
        let mut mass = Vec::with_capacity(rule.nodes.len());
        for (&w, &wt) in rule.nodes.iter().zip(&rule.weights) {
            let m = wt * wpos.pdf(w);
            if m > 0.0 {
                nodes.push(w);
                mass.push(m);
            }
        }
        Ok(Self {
            constant: q.constant,
            lam: pos.eigenvalue,
            mu,
            nodes,
            mass,
            s_lo,
            s_hi,
            ln_mgf_mu,
            cdf,
            g,
            mean: q.mean(),
            sd: q.variance().sqrt(),
        })
    }

    fn s_of(&self, w: f64, x: f64) -> f64 {
        (self.constant + self.lam * w - x) / self.mu
    }

    /// P[L ≥ x].
    pub fn p_tail(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        for (&w, &m) in self.nodes.iter().zip(&self.mass) {
            let s = self.s_of(w, x);
            let c = if s <= self.s_lo {
                0.0
            } else if s >= self.s_hi {
                1.0
            } else {
                self.cdf.eval(s).clamp(0.0, 1.0)
            };
            acc += m * c;
        }
        acc.clamp(0.0, 1.0)
    }

    /// e^{x}·Q[L ≥ x] = E_P[e^{−(L−x)} 1{L ≥ x}].
    pub fn scaled_q_tail(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        for (&w, &m) in self.nodes.iter().zip(&self.mass) {
            let s = self.s_of(w, x);
            let gv = if s <= self.s_lo {
                0.0
            } else if s >= self.s_hi {
                (-self.mu * s + self.ln_mgf_mu).exp()
            } else {
                self.g.eval(s).max(0.0)
            };
            acc += m * gv;
        }
        acc
    }

    /// Threshold x with P[L ≥ x] = α, for α in (0, 1).
    pub fn threshold(&self, alpha: f64) -> Result<f64> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return domain(format!("level must lie in (0,1), got {alpha}"));
        }
        let mut lo = self.mean - 10.0 * self.sd;
        let mut hi = self.mean + 10.0 * self.sd;
        let mut guard = 0;
        while self.p_tail(lo) < alpha && guard < 60 {
            lo -= 10.0 * self.sd;
            guard += 1;
        }
        while self.p_tail(hi) > alpha && guard < 120 {
            hi += 10.0 * self.sd;
            guard += 1;
        }
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if self.p_tail(mid) >= alpha {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-12 * (1.0 + mid.abs()) {
                break;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// ln β_α of the LLR test: returns (ln β, threshold).
    pub fn ln_beta(&self, alpha: f64) -> Result<(f64, f64)> {
        let x = self.threshold(alpha)?;
        Ok((self.scaled_q_tail(x).ln() - x, x))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::gaussian::{gauss_conv_llr, GaussianWiretap};

    #[test]
    fn single_term_reduces() {
        let q = QuadFormLLR { constant: 1.5, terms: vec![QuadTerm { eigenvalue: -0.3, dof: 7, noncentrality: 2.0 }] };
        let d = NoncentralChi2::new(7, 2.0, -0.3, 1.5).unwrap();
        for x in [-5.0, -1.0, 0.0, 1.0] {
            assert_eq!(quadform_cdf(&q, x).unwrap(), d.cdf(x));
        }
    }

    #[test]
    fn two_equal_scale_terms_add_up() {
        // λχ²(a, ν1) + λχ²(b, ν2) = λχ²(a+b, ν1+ν2)
        let q = QuadFormLLR {
            constant: 0.0,
            terms: vec![
                QuadTerm { eigenvalue: 0.7, dof: 3, noncentrality: 1.0 },
                QuadTerm { eigenvalue: 0.7, dof: 5, noncentrality: 2.5 },
            ],
        };
        let d = NoncentralChi2::new(8, 3.5, 0.7, 0.0).unwrap();
        for x in [0.5, 3.0, 8.0, 15.0, 30.0] {
            let got = quadform_cdf(&q, x).unwrap();
            assert!((got - d.cdf(x)).abs() < 1e-9, "x={x}: {got} vs {}", d.cdf(x));
        }
    }

    #[test]
    fn median_bracket() {
        let g = GaussianWiretap::from_snr_db(3.0, -3.0).unwrap();
        let q = gauss_conv_llr(&g, 40).unwrap();
        let c = quadform_cdf(&q, q.mean()).unwrap();
        assert!(c > 0.3 && c < 0.7);
    }

    #[test]
    fn table_matches_direct() {
        let g = GaussianWiretap::from_snr_db(3.0, -3.0).unwrap();
        let q = gauss_conv_llr(&g, 200).unwrap();
        let t = QuadFormTable::new(&q).unwrap();
        let sd = q.variance().sqrt();
        for z in [-4.0, -2.0, 0.0, 1.0, 3.0] {
            let x = q.mean() + z * sd;
            let direct = 1.0 - quadform_cdf(&q, x).unwrap();
            assert!((t.p_tail(x) - direct).abs() < 1e-8, "z={z}: {} vs {direct}", t.p_tail(x));
        }
        // Change of measure: E_P[e^{-(L-x)}1{L≥x}] ≤ P[L≥x]; at x → -∞ it tends to E_P[e^{-L}]e^{x}.
        let x = q.mean();
        assert!(t.scaled_q_tail(x) < t.p_tail(x));
        let (lb, thr) = t.ln_beta(0.9).unwrap();
        assert!((t.p_tail(thr) - 0.9).abs() < 1e-9);
        assert!(lb < 0.0);
    }
}
