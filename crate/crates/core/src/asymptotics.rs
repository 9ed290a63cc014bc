//! Second-order (dispersion) approximations and the information quantities
//! behind them. All values in nats.

use crate::channels::{DMWiretap, GaussianWiretap, Kernel};
use crate::error::{domain, Error, Result};
use crate::metrics::FiniteDist;
use crate::probkit::q_inv;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecondOrderTerms {
    pub cs: f64,
    pub cs_upper: f64,
    pub v1: f64,
    pub v2: f64,
    pub vc: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecondOrder {
    /// C_S − √(V1/n)Q⁻¹(ε) − √(V2/n)Q⁻¹(δ)
    pub ach: f64,
    /// C_S^u − √(V_c/n)Q⁻¹(ε+δ)
    pub conv: f64,
    pub terms: SecondOrderTerms,
}

impl SecondOrderTerms {
    pub fn evaluate(&self, n: u64, eps: f64, delta: f64) -> Result<SecondOrder> {
        check(n, eps, delta)?;
        let nf = n as f64;
        let ach = self.cs - (self.v1 / nf).sqrt() * q_inv(eps)? - (self.v2 / nf).sqrt() * q_inv(delta)?;
        let conv = self.cs_upper - (self.vc / nf).sqrt() * q_inv(eps + delta)?;
        Ok(SecondOrder { ach, conv, terms: *self })
    }
}

fn check(n: u64, eps: f64, delta: f64) -> Result<()> {
    if n == 0 {
        return domain("blocklength must be positive");
    }
    if !(eps > 0.0 && delta > 0.0 && eps + delta < 1.0) {
        return domain(format!("need epsilon, delta > 0 and epsilon + delta < 1, got {eps}, {delta}"));
    }
    Ok(())
}

pub fn gauss_terms(g: &GaussianWiretap) -> SecondOrderTerms {
    let cs = g.secrecy_capacity();
    SecondOrderTerms { cs, cs_upper: cs, v1: g.v1(), v2: g.v2(), vc: g.vc() }
}

pub fn gauss_second_order(g: &GaussianWiretap, n: u64, eps: f64, delta: f64) -> Result<SecondOrder> {
    gauss_terms(g).evaluate(n, eps, delta)
}

/// I(X;Y), its dispersion V, and the conditional versions Ĩ = I(X;Y|Z), Ṽ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InfoQuantities {
    pub i: f64,
    pub v: f64,
    pub i_tilde: f64,
    pub v_tilde: f64,
}

/// Mutual information and conditional information variance of P_X through W.
pub fn mutual_info(px: &FiniteDist, w: &Kernel) -> Result<(f64, f64)> {
    if px.len() != w.inputs() {
        return Err(Error::SupportMismatch { left: px.len(), right: w.inputs() });
    }
    let py = w.output(px)?;
    let (mut i, mut v) = (0.0, 0.0);
    for x in 0..w.inputs() {
        if px[x] <= 0.0 {
            continue;
        }
        let (mut m1, mut m2) = (0.0, 0.0);
        for (y, &p) in w.row(x).iter().enumerate() {
            if p > 0.0 {
                let l = (p / py[y]).ln();
                m1 += p * l;
                m2 += p * l * l;
            }
        }
        i += px[x] * m1;
        v += px[x] * (m2 - m1 * m1);
    }
    Ok((i, v.max(0.0)))
}

pub fn dmc_info_quantities(px: &FiniteDist, ch: &DMWiretap) -> Result<InfoQuantities> {
    let (nx, ny, nz) = ch.sizes();
    if px.len() != nx {
        return Err(Error::SupportMismatch { left: px.len(), right: nx });
    }
    let (i, v) = mutual_info(px, ch.py_x())?;
    let mut pyz = vec![0.0; ny * nz];
    let mut pz = vec![0.0; nz];
    for x in 0..nx {
        for y in 0..ny {
            for z in 0..nz {
                pyz[y * nz + z] += px[x] * ch.p(x, y, z);
                pz[z] += px[x] * ch.p(x, y, z);
            }
        }
    }
    let (mut it, mut vt) = (0.0, 0.0);
    for x in 0..nx {
        if px[x] <= 0.0 {
            continue;
        }
        let pzx = ch.pz_x().row(x);
        let (mut m1, mut m2) = (0.0, 0.0);
        for y in 0..ny {
            for z in 0..nz {
                let p = ch.p(x, y, z);
                if p > 0.0 {
                    // ln P(y,z|x) / (P(z|x) P(y|z))
                    let l = (p * pz[z] / (pzx[z] * pyz[y * nz + z])).ln();
                    m1 += p * l;
                    m2 += p * l * l;
                }
            }
        }
        it += px[x] * m1;
        vt += px[x] * (m2 - m1 * m1);
    }
    Ok(InfoQuantities { i, v, i_tilde: it, v_tilde: vt.max(0.0) })
}

const BINARY_GRID: usize = 10_000;
const STARTS: usize = 20;

/// Maximize a function of P_X over the simplex (|X| ≤ 3), checking that the
/// maximizer is unique.
pub fn maximize_on_simplex(k: usize, f: &dyn Fn(&FiniteDist) -> f64) -> Result<(f64, FiniteDist)> {
    match k {
        1 => {
            let p = FiniteDist::uniform(1);
            Ok((f(&p), p))
        }
        2 => maximize_binary(f),
        3 => maximize_ternary(f),
        _ => Err(Error::Unsupported(format!("input alphabets larger than 3 ({k})"))),
    }
}

fn binary(p: f64) -> FiniteDist {
    FiniteDist::new(vec![p, 1.0 - p]).expect("valid binary law")
}

fn maximize_binary(f: &dyn Fn(&FiniteDist) -> f64) -> Result<(f64, FiniteDist)> {
    let h = 1.0 / BINARY_GRID as f64;
    let vals: Vec<f64> = (0..=BINARY_GRID).map(|i| f(&binary(i as f64 * h))).collect();
    let (bi, &bv) = vals.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1).then(b.0.cmp(&a.0))).unwrap();
    // Near-ties far from the best grid point mean a flat or multimodal objective.
    let tol = 1e-9 * (1.0 + bv.abs());
    if vals.iter().enumerate().any(|(i, &v)| v >= bv - tol && (i as f64 - bi as f64).abs() * h > 0.01) {
        return Err(Error::NonUniqueMaximizer(format!("objective within {tol:.1e} of its maximum far from p = {}", bi as f64 * h)));
    }
    let a = (bi.saturating_sub(1)) as f64 * h;
    let b = ((bi + 1).min(BINARY_GRID)) as f64 * h;
    let g = |p: f64| -f(&binary(p));
    let (nv, p) = crate::achievability::golden_min(a, b, 60, &g);
    if -nv > bv {
        Ok((-nv, binary(p)))
    } else {
        Ok((bv, binary(bi as f64 * h)))
    }
}

/// Euclidean projection onto the probability simplex.
fn project_simplex(v: &[f64]) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut css = 0.0;
    let mut theta = 0.0;
    for (j, &x) in u.iter().enumerate() {
        css += x;
        let t = (css - 1.0) / (j + 1) as f64;
        if x - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|x| (x - theta).max(0.0)).collect()
}

fn maximize_ternary(f: &dyn Fn(&FiniteDist) -> f64) -> Result<(f64, FiniteDist)> {
    let eval = |p: &[f64]| f(&FiniteDist::normalized(p.to_vec()).expect("simplex point"));
    let mut hits = Vec::with_capacity(STARTS);
    for s in 0..STARTS {
        // Deterministic, well-spread starting points.
        let a = ((s as f64 + 0.5) * 0.618_033_988_75).fract();
        let b = ((s as f64 + 0.5) * 0.754_877_666_25).fract();
        let (r1, r2) = if a + b > 1.0 { (1.0 - a, 1.0 - b) } else { (a, b) };
        let mut p = vec![r1, r2, 1.0 - r1 - r2];
        let mut val = eval(&p);
        let mut step = 0.1;
        for _ in 0..400 {
            let hstep = 1e-6;
            let mut grad = [0.0; 3];
            for (i, gi) in grad.iter_mut().enumerate() {
                let mut up = p.clone();
                let mut dn = p.clone();
                up[i] += hstep;
                dn[i] -= hstep;
                *gi = (eval(&project_simplex(&up)) - eval(&project_simplex(&dn))) / (2.0 * hstep);
            }
            let mean = grad.iter().sum::<f64>() / 3.0;
            let dir: Vec<f64> = grad.iter().map(|g| g - mean).collect();
            let mut moved = false;
            while step > 1e-12 {
                let cand = project_simplex(&p.iter().zip(&dir).map(|(x, d)| x + step * d).collect::<Vec<_>>());
                let cv = eval(&cand);
                if cv > val {
                    p = cand;
                    val = cv;
                    moved = true;
                    step *= 1.5;
                    break;
                }
                step *= 0.5;
            }
            if !moved {
                break;
            }
        }
        hits.push((val, p));
    }
    hits.sort_by(|a, b| b.0.total_cmp(&a.0));
    let (bv, bp) = hits[0].clone();
    let tol = 1e-8 * (1.0 + bv.abs());
    for (v, p) in &hits[1..] {
        let dist = p.iter().zip(&bp).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        if *v >= bv - tol && dist > 0.02 {
            return Err(Error::NonUniqueMaximizer(format!("distinct near-optimal inputs {bp:?} and {p:?}")));
        }
    }
    Ok((bv, FiniteDist::normalized(bp)?))
}

/// C_S^u = max_{P_X} I(X;Y|Z) and its maximizer.
pub fn cs_upper_maximizer(ch: &DMWiretap) -> Result<(f64, FiniteDist)> {
    let f = |p: &FiniteDist| dmc_info_quantities(p, ch).map(|q| q.i_tilde).unwrap_or(f64::NEG_INFINITY);
    maximize_on_simplex(ch.sizes().0, &f)
}

/// I(X;Y) − I(X;Z) at P_X.
pub fn secrecy_difference(px: &FiniteDist, ch: &DMWiretap) -> Result<f64> {
    Ok(mutual_info(px, ch.py_x())?.0 - mutual_info(px, ch.pz_x())?.0)
}

/// Whether the eavesdropper is less capable: I(X;Y) ≥ I(X;Z) for every P_X,
/// checked on a simplex grid (exact for physically degraded channels).
pub fn is_less_capable(ch: &DMWiretap) -> Result<bool> {
    if ch.is_physically_degraded() {
        return Ok(true);
    }
    let k = ch.sizes().0;
    let steps = match k {
        1 | 2 => 1000,
        3 => 60,
        _ => return Err(Error::Unsupported(format!("input alphabets larger than 3 ({k})"))),
    };
    let mut pts: Vec<Vec<f64>> = Vec::new();
    if k == 1 {
        pts.push(vec![1.0]);
    } else if k == 2 {
        pts.extend((0..=steps).map(|i| vec![i as f64 / steps as f64, 1.0 - i as f64 / steps as f64]));
    } else {
        for i in 0..=steps {
            for j in 0..=steps - i {
                let (a, b) = (i as f64 / steps as f64, j as f64 / steps as f64);
                pts.push(vec![a, b, (1.0 - a - b).max(0.0)]);
            }
        }
    }
    for p in pts {
        if secrecy_difference(&FiniteDist::normalized(p)?, ch)? < -1e-12 {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Second-order constants of a less-capable DM-WTC (auxiliary V = X).
pub fn dmc_terms(ch: &DMWiretap) -> Result<(SecondOrderTerms, FiniteDist, FiniteDist)> {
    if !is_less_capable(ch)? {
        return Err(Error::Unsupported(
            "eavesdropper is not less capable than the legitimate receiver; the auxiliary-variable optimization is not implemented".into(),
        ));
    }
    let k = ch.sizes().0;
    let f = |p: &FiniteDist| secrecy_difference(p, ch).unwrap_or(f64::NEG_INFINITY);
    let (cs, p_star) = maximize_on_simplex(k, &f)?;
    let (cs_upper, p_tilde) = cs_upper_maximizer(ch)?;
    let v1 = mutual_info(&p_star, ch.py_x())?.1;
    let v2 = mutual_info(&p_star, ch.pz_x())?.1;
    let vc = dmc_info_quantities(&p_tilde, ch)?.v_tilde;
    Ok((SecondOrderTerms { cs, cs_upper, v1, v2, vc }, p_star, p_tilde))
}

pub fn dmc_second_order(ch: &DMWiretap, n: u64, eps: f64, delta: f64) -> Result<SecondOrder> {
    check(n, eps, delta)?;
    dmc_terms(ch)?.0.evaluate(n, eps, delta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::bsc;

    fn h(p: f64) -> f64 {
        -p * p.ln() - (1.0 - p) * (1.0 - p).ln()
    }

    #[test]
    fn bsc_capacity_and_dispersion() {
        let p = 0.11;
        let (i, v) = mutual_info(&FiniteDist::uniform(2), &bsc(p).unwrap()).unwrap();
        assert!((i - (2f64.ln() - h(p))).abs() < 1e-15);
        assert!((v - p * (1.0 - p) * ((1.0 - p) / p).ln().powi(2)).abs() < 1e-14);
    }

    #[test]
    fn degraded_pair_terms() {
        let ch = DMWiretap::bsc_pair(0.05, 0.2).unwrap();
        let (t, ps, pt) = dmc_terms(&ch).unwrap();
        assert!((ps[0] - 0.5).abs() < 1e-6 && (pt[0] - 0.5).abs() < 1e-6);
        assert!((t.cs - (h(0.2) - h(0.05))).abs() < 1e-12);
        assert!((t.cs - t.cs_upper).abs() < 1e-12);
        let q = t.evaluate(10_000, 1e-3, 1e-3).unwrap();
        assert!(q.ach < q.conv);
    }

    #[test]
    fn flat_objective_is_refused() {
        let ch = DMWiretap::degraded(&bsc(0.1).unwrap(), &bsc(0.0).unwrap()).unwrap();
        assert!(matches!(cs_upper_maximizer(&ch), Err(Error::NonUniqueMaximizer(_))));
    }

    #[test]
    fn half_probabilities_give_capacities() {
        let g = GaussianWiretap::from_snr_db(3.0, -3.0).unwrap();
        let s = gauss_second_order(&g, 100, 0.25, 0.25).unwrap();
        assert!((s.conv - g.secrecy_capacity()).abs() < 1e-15);
        assert!(gauss_second_order(&g, 100, 0.5, 0.5).is_err());
    }

    #[test]
    fn ternary_search_finds_interior_optimum() {
        // Concave objective with a unique interior maximum.
        let target = [0.2, 0.5, 0.3];
        let f = |p: &FiniteDist| -(0..3).map(|i| (p[i] - target[i]).powi(2)).sum::<f64>();
        let (_, p) = maximize_on_simplex(3, &f).unwrap();
        for i in 0..3 {
            assert!((p[i] - target[i]).abs() < 1e-4);
        }
    }
}
