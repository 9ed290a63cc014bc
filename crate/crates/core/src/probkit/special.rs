//! Scalar special functions: Gaussian tail, regularized incomplete beta and
//! gamma (in log form), Poisson-type log densities, and log-sum helpers.

use crate::error::{domain, Result};
use libm::{erfc, lgamma as ln_gamma};

pub const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;
const FPMIN: f64 = 1e-300;
const EPS: f64 = 1e-16;

/// ln(e^a + e^b) without overflow.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// ln(1 - e^x) for x ≤ 0.
pub fn log1m_exp(x: f64) -> f64 {
    if x > -std::f64::consts::LN_2 {
        (-x.exp_m1()).ln()
    } else {
        (-x.exp()).ln_1p()
    }
}

/// ln Σ exp(xs).
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY || m == f64::INFINITY {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Standard normal density.
pub fn phi(x: f64) -> f64 {
    (-0.5 * x * x - LN_SQRT_2PI).exp()
}

/// Gaussian upper tail Q(x) = P[N(0,1) > x].
pub fn q_func(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

/// ln Q(x), accurate far into the upper tail.
pub fn ln_q_func(x: f64) -> f64 {
    if x < 5.0 {
        return q_func(x).ln();
    }
    // Mills ratio continued fraction: Q(x) = φ(x) / (x + 1/(x + 2/(x + ...))).
    let mut f = x;
    let mut c = x;
    let mut d = 0.0;
    for k in 1..500 {
        let a = k as f64;
        d = x + a * d;
        d = if d.abs() < FPMIN { FPMIN } else { d };
        c = x + a / c;
        c = if c.abs() < FPMIN { FPMIN } else { c };
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < EPS {
            break;
        }
    }
    -0.5 * x * x - LN_SQRT_2PI - f.ln()
}

/// Inverse of [`q_func`] on (0, 1).
pub fn q_inv(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return domain(format!("q_inv needs p in (0,1), got {p}"));
    }
    if p > 0.5 {
        // 1 - p is exact here.
        return Ok(-q_inv(1.0 - p)?);
    }
    if p == 0.5 {
        return Ok(0.0);
    }
    // Rational starting point (|error| < 5e-4), then Newton.
    let t = (-2.0 * p.ln()).sqrt();
    let mut x = t - (2.515_517 + 0.802_853 * t + 0.010_328 * t * t)
        / (1.0 + 1.432_788 * t + 0.189_269 * t * t + 0.001_308 * t * t * t);
    let lp = p.ln();
    // Newton on ln Q keeps relative accuracy for tiny p.
    for _ in 0..20 {
        let lq = ln_q_func(x);
        let step = (lq - lp) * (lq - (-0.5 * x * x - LN_SQRT_2PI)).exp();
        x += step;
        if step.abs() < 1e-15 * x.abs().max(1.0) {
            break;
        }
    }
    Ok(x)
}

/// Continued fraction for the incomplete beta (modified Lentz).
fn betacf(x: f64, a: f64, b: f64) -> f64 {
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < FPMIN {
        d = FPMIN;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..100_000 {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = 1.0 + aa / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = 1.0 + aa / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

fn ln_beta_fn(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

/// ln I_x(a, b) computed directly (no symmetry swap).
fn ln_inc_beta_direct(x: f64, a: f64, b: f64) -> f64 {
    a * x.ln() + b * (-x).ln_1p() - a.ln() - ln_beta_fn(a, b) + betacf(x, a, b).ln()
}

/// Returns (ln I_x(a,b), ln(1 - I_x(a,b))).
pub fn ln_reg_inc_beta_pair(x: f64, a: f64, b: f64) -> Result<(f64, f64)> {
    if !(a > 0.0 && b > 0.0) || !(0.0..=1.0).contains(&x) {
        return domain(format!("reg_inc_beta needs x in [0,1], a,b > 0; got x={x}, a={a}, b={b}"));
    }
    if x == 0.0 {
        return Ok((f64::NEG_INFINITY, 0.0));
    }
    if x == 1.0 {
        return Ok((0.0, f64::NEG_INFINITY));
    }
    if x < (a + 1.0) / (a + b + 2.0) {
        let l = ln_inc_beta_direct(x, a, b);
        Ok((l, log1m_exp(l)))
    } else {
        let l = ln_inc_beta_direct(1.0 - x, b, a);
        Ok((log1m_exp(l), l))
    }
}

/// Regularized incomplete beta I_x(a, b).
pub fn reg_inc_beta(x: f64, a: f64, b: f64) -> Result<f64> {
    Ok(ln_reg_inc_beta_pair(x, a, b)?.0.exp())
}

/// ln I_x(a, b).
pub fn ln_reg_inc_beta(x: f64, a: f64, b: f64) -> Result<f64> {
    Ok(ln_reg_inc_beta_pair(x, a, b)?.0)
}

/// Stirling remainder: ln Γ(x+1) − (x+½)ln x + x − ln√(2π).
pub fn stirlerr(x: f64) -> f64 {
    const S0: f64 = 1.0 / 12.0;
    const S1: f64 = 1.0 / 360.0;
    const S2: f64 = 1.0 / 1260.0;
    const S3: f64 = 1.0 / 1680.0;
    const S4: f64 = 1.0 / 1188.0;
    if x <= 15.0 {
        return ln_gamma(x + 1.0) - (x + 0.5) * x.ln() + x - LN_SQRT_2PI;
    }
    let nn = x * x;
    if x > 500.0 {
        (S0 - S1 / nn) / x
    } else if x > 80.0 {
        (S0 - (S1 - S2 / nn) / nn) / x
    } else if x > 35.0 {
        (S0 - (S1 - (S2 - S3 / nn) / nn) / nn) / x
    } else {
        (S0 - (S1 - (S2 - (S3 - S4 / nn) / nn) / nn) / nn) / x
    }
}

/// Deviance term x ln(x/m) + m − x, computed without cancellation.
pub fn bd0(x: f64, m: f64) -> f64 {
    if (x - m).abs() < 0.1 * (x + m) {
        let mut v = (x - m) / (x + m);
        let mut s = (x - m) * v;
        let mut ej = 2.0 * x * v;
        v *= v;
        for j in 1..1000 {
            ej *= v;
            let s1 = s + ej / (2 * j + 1) as f64;
            if s1 == s {
                return s1;
            }
            s = s1;
        }
        s
    } else {
        x * (x / m).ln() + m - x
    }
}

/// ln( m^x e^{−m} / Γ(x+1) ) for real x ≥ 0, m ≥ 0.
pub fn ln_dpois_raw(x: f64, m: f64) -> f64 {
    if m == 0.0 {
        return if x == 0.0 { 0.0 } else { f64::NEG_INFINITY };
    }
    if x < 0.0 {
        return f64::NEG_INFINITY;
    }
    if x == 0.0 {
        return -m;
    }
    if !m.is_finite() {
        return f64::NEG_INFINITY;
    }
    -stirlerr(x) - bd0(x, m) - LN_SQRT_2PI - 0.5 * x.ln()
}

/// ln of the Gamma(a, 1) density at y > 0.
pub fn ln_gamma_density(a: f64, y: f64) -> f64 {
    if y <= 0.0 {
        return if y == 0.0 && a < 1.0 {
            f64::INFINITY
        } else if y == 0.0 && a == 1.0 {
            0.0
        } else {
            f64::NEG_INFINITY
        };
    }
    ln_dpois_raw(a, y) + (a / y).ln()
}

/// Regularized incomplete gamma: returns (ln P(a, y), ln Q(a, y)).
pub fn ln_inc_gamma_pq(a: f64, y: f64) -> (f64, f64) {
    if y <= 0.0 {
        return (f64::NEG_INFINITY, 0.0);
    }
    if y.is_infinite() {
        return (0.0, f64::NEG_INFINITY);
    }
    let lead = ln_dpois_raw(a, y);
    if y < a + 1.0 {
        let mut sum = 1.0;
        let mut term = 1.0;
        let mut k = 1.0;
        loop {
            term *= y / (a + k);
            sum += term;
            if term < sum * 1e-17 || k > 1e6 {
                break;
            }
            k += 1.0;
        }
        let lp = lead + sum.ln();
        (lp, log1m_exp(lp.min(0.0)))
    } else {
        let mut b = y + 1.0 - a;
        let mut c = 1.0 / FPMIN;
        let mut d = 1.0 / b;
        let mut h = d;
        let mut i = 1.0;
        while i < 1e6 {
            let an = -i * (i - a);
            b += 2.0;
            d = an * d + b;
            if d.abs() < FPMIN {
                d = FPMIN;
            }
            c = b + an / c;
            if c.abs() < FPMIN {
                c = FPMIN;
            }
            d = 1.0 / d;
            let del = d * c;
            h *= del;
            if (del - 1.0).abs() < EPS {
                break;
            }
            i += 1.0;
        }
        let lq = lead + a.ln() + h.ln();
        (log1m_exp(lq.min(0.0)), lq)
    }
}
