//! Gaussian wiretap channel Y = X + U, Z = X + Ũ under an equal-power
//! (sphere) constraint, and the exact laws of its log-likelihood ratios.
//!
//! Everything is evaluated at the codeword x̄ = (√P, …, √P); by spherical
//! symmetry this is lossless for codewords on the power sphere.

use super::quadform::{QuadFormLLR, QuadTerm};
use crate::error::{Error, Result};
use crate::probkit::NoncentralChi2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianWiretap {
    pub p: f64,
    pub n1: f64,
    pub n2: f64,
}

/// Measure under which the eavesdropper's output is drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Measure {
    /// Z = x̄ + Ũ
    Signal,
    /// Z ~ N(0, (P+N2) I)
    Noise,
}

impl GaussianWiretap {
    pub fn new(p: f64, n1: f64, n2: f64) -> Result<Self> {
        if !(p > 0.0 && p.is_finite() && n1 > 0.0 && n2 > n1 && n2.is_finite()) {
            return Err(Error::InvalidChannel(format!("need P > 0 and 0 < N1 < N2, got P={p}, N1={n1}, N2={n2}")));
        }
        Ok(Self { p, n1, n2 })
    }

    /// Power normalized to 1; SNRs P/N1 and P/N2 in dB.
    pub fn from_snr_db(legit_db: f64, eve_db: f64) -> Result<Self> {
        let n1 = 10f64.powf(-legit_db / 10.0);
        let n2 = 10f64.powf(-eve_db / 10.0);
        Self::new(1.0, n1, n2)
    }

    /// C_S = ½ln(1+P/N1) − ½ln(1+P/N2), nats.
    pub fn secrecy_capacity(&self) -> f64 {
        0.5 * (self.p / self.n1).ln_1p() - 0.5 * (self.p / self.n2).ln_1p()
    }

    fn dispersion(&self, n: f64) -> f64 {
        let p = self.p;
        (p * p + 2.0 * p * n) / (2.0 * (p + n) * (p + n))
    }

    /// Legitimate-channel dispersion, nats².
    pub fn v1(&self) -> f64 {
        self.dispersion(self.n1)
    }

    /// Eavesdropper-channel dispersion, nats².
    pub fn v2(&self) -> f64 {
        self.dispersion(self.n2)
    }

    /// Converse dispersion V_c, nats².
    pub fn vc(&self) -> f64 {
        let (p, n1, n2) = (self.p, self.n1, self.n2);
        self.v1() + self.v2() - p * n1 / (p + n1) * (1.0 / n2 + 1.0 / (p + n2))
    }
}

/// Exact law of ı(x̄; Zⁿ) = ln dP_{Zⁿ|Xⁿ=x̄}/dN(0,(P+N2)I) under the chosen measure.
///
/// Per letter, ı is quadratic in one Gaussian; completing the square gives
/// `shift + scale·χ²(n, λ)` with shift = (n/2)(ln(1+P/N2) + 1) under both measures.
pub fn gauss_eve_llr(g: &GaussianWiretap, n: u64, under: Measure) -> Result<NoncentralChi2> {
    if n == 0 {
        return Err(Error::Domain("blocklength must be positive".into()));
    }
    let nf = n as f64;
    let (p, n2) = (g.p, g.n2);
    let shift = 0.5 * nf * ((p / n2).ln_1p() + 1.0);
    match under {
        Measure::Signal => NoncentralChi2::new(n, nf * n2 / p, -p / (2.0 * (p + n2)), shift),
        Measure::Noise => NoncentralChi2::new(n, nf * (p + n2) / p, -p / (2.0 * n2), shift),
    }
}

/// Law of ln dP_{YⁿZⁿ|Xⁿ=x̄}/d(P_{Zⁿ|Xⁿ=x̄} Q_{Yⁿ|Zⁿ}) under P, with Q_{Y|Z} the
/// conditional law induced by a Gaussian input; two scaled noncentral χ²(n) terms.
pub fn gauss_conv_llr(g: &GaussianWiretap, n: u64) -> Result<QuadFormLLR> {
    if n == 0 {
        return Err(Error::Domain("blocklength must be positive".into()));
    }
    let (p, n1, n2) = (g.p, g.n1, g.n2);
    let sp = p.sqrt();
    // U = s1·g1, Ū = s2·g2 with g standard normal.
    let s1 = n1.sqrt();
    let s2 = (n2 - n1).sqrt();
    // Per-letter ½[(U+Ū)²/N2 − U²/N1 + (√P+U)²/(P+N1) − (√P+U+Ū)²/(P+N2)]
    // written as gᵀAg + bᵀg + c0.
    let k = 1.0 / n2 - 1.0 / (p + n2);
    let a11 = 0.5 * (k * s1 * s1 - 1.0 + s1 * s1 / (p + n1));
    let a12 = 0.5 * k * s1 * s2;
    let a22 = 0.5 * k * s2 * s2;
    let b1 = 0.5 * (2.0 * sp * s1 / (p + n1) - 2.0 * sp * s1 / (p + n2));
    let b2 = 0.5 * (-2.0 * sp * s2 / (p + n2));
    let c0 = 0.5 * (p / (p + n1) - p / (p + n2));

    let (eig, vecs) = sym_eigen_2x2(a11, a12, a22);
    let nf = n as f64;
    let mut constant = nf * (g.secrecy_capacity() + c0);
    let mut terms = Vec::with_capacity(2);
    for (lam, v) in eig.into_iter().zip(vecs) {
        let beta = v[0] * b1 + v[1] * b2;
        let scale = a11.abs() + a12.abs() + a22.abs();
        if lam.abs() <= 1e-14 * scale {
            if beta.abs() > 1e-14 {
                return Err(Error::Unsupported("degenerate quadratic form with a linear Gaussian part".into()));
            }
            continue;
        }
        // λh² + βh = λ(h + β/2λ)² − β²/4λ
        constant -= nf * beta * beta / (4.0 * lam);
        terms.push(QuadTerm { eigenvalue: lam, dof: n, noncentrality: nf * beta * beta / (4.0 * lam * lam) });
    }
    Ok(QuadFormLLR { constant, terms })
}

/// Eigenvalues and orthonormal eigenvectors of [[a, b], [b, c]].
fn sym_eigen_2x2(a: f64, b: f64, c: f64) -> ([f64; 2], [[f64; 2]; 2]) {
    let mid = 0.5 * (a + c);
    let rad = (0.25 * (a - c) * (a - c) + b * b).sqrt();
    let l = [mid + rad, mid - rad];
    if b == 0.0 {
        return if a >= c { (l, [[1.0, 0.0], [0.0, 1.0]]) } else { (l, [[0.0, 1.0], [1.0, 0.0]]) };
    }
    let vec_for = |lam: f64| {
        let (u1, u2) = ((b, lam - a), (lam - c, b));
        let n1 = (u1.0 * u1.0 + u1.1 * u1.1).sqrt();
        let n2 = (u2.0 * u2.0 + u2.1 * u2.1).sqrt();
        if n1 >= n2 {
            [u1.0 / n1, u1.1 / n1]
        } else {
            [u2.0 / n2, u2.1 / n2]
        }
    };
    (l, [vec_for(l[0]), vec_for(l[1])])
}
