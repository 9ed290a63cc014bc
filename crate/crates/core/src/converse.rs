//! Converse bounds: the hypothesis-testing secrecy converse and the Hayashi et
//! al. comparison bound at curve scale, plus converses evaluated exactly on
//! explicit small codes.

use crate::achievability::golden_min;
use crate::asymptotics::cs_upper_maximizer;
use crate::bound::{BoundId, BoundPoint, Diagnostics, DmcScenario, Scenario, SearchOptions, Status};
use crate::channels::{gauss_conv_llr, lattice_step, DMWiretap, GaussianWiretap, Kernel, QuadFormTable};
use crate::error::{domain, Error, Result};
use crate::metrics::{beta_alpha_raw, e_gamma_raw, FiniteDist};
use crate::probkit::{LogSpectrum, SpectrumTails};
use std::f64::consts::LN_2;

/// Rates above this (bits/use) are reported as capped.
pub const RATE_CEILING_BITS: f64 = 64.0;
/// Cap on |W|·|X|·|Y|·|Z| for exact small-code evaluations.
pub const ENUM_CAP: usize = 1_000_000;

const TAU_MIN: f64 = 1e-4;

fn window(eps: f64, delta: f64) -> Result<f64> {
    if !(eps > 0.0 && eps < 1.0 && delta > 0.0 && delta < 1.0) {
        return domain(format!("epsilon and delta must lie in (0,1), got {eps}, {delta}"));
    }
    let c = 1.0 - eps - delta;
    if !(c > 0.0) {
        return domain(format!("need epsilon + delta < 1, got {}", eps + delta));
    }
    Ok(c)
}

/// The objective minimized over τ for each converse flavour, given ln β.
fn objective(id: BoundId, tau: f64, delta: f64, ln_beta: f64) -> f64 {
    match id {
        BoundId::Hayashi => -2.0 * tau.ln() - ln_beta,
        _ => (tau + delta).ln() - tau.ln() - ln_beta,
    }
}

fn point(n: u64, id: BoundId, ln_m: f64, mut diag: Diagnostics) -> BoundPoint {
    let ceiling = n as f64 * RATE_CEILING_BITS * LN_2;
    if !(ln_m < ceiling) {
        diag.tau = diag.tau.filter(|t| t.is_finite());
        let mut p = BoundPoint::new(n, id, ceiling, diag, Status::Capped);
        p.rate_bits = RATE_CEILING_BITS;
        return p;
    }
    BoundPoint::new(n, id, ln_m, diag, Status::Ok)
}

/// Both curve-scale converse points at blocklength n: `[thm3, hayashi]`.
/// Each objective is also evaluated at the other's optimal τ, so
/// thm3 ≤ hayashi holds exactly.
pub fn converse_rates(n: u64, eps: f64, delta: f64, scenario: &Scenario, opts: &SearchOptions) -> Result<[BoundPoint; 2]> {
    match scenario {
        Scenario::Gaussian(g) => gaussian_converse(n, eps, delta, g, opts),
        Scenario::Dmc(d) => dmc_converse(n, eps, delta, d, opts, true),
    }
}

pub fn thm3_rate(n: u64, eps: f64, delta: f64, scenario: &Scenario, opts: &SearchOptions) -> Result<BoundPoint> {
    Ok(converse_rates(n, eps, delta, scenario, opts)?[0])
}

pub fn hayashi_rate(n: u64, eps: f64, delta: f64, scenario: &Scenario, opts: &SearchOptions) -> Result<BoundPoint> {
    Ok(converse_rates(n, eps, delta, scenario, opts)?[1])
}

/// Logarithmic τ grid over [10⁻⁴, c(1 − 10⁻⁴)] followed by golden-section
/// refinement in ln τ. Returns (min, argmin τ).
fn minimize_tau(c: f64, points: usize, f: &dyn Fn(f64) -> f64) -> (f64, f64) {
    let hi = c * (1.0 - 1e-4);
    let lo = TAU_MIN.min(hi * 1e-4);
    let (ulo, uhi) = (lo.ln(), hi.ln());
    let points = points.max(3);
    let h = (uhi - ulo) / (points - 1) as f64;
    let g = |u: f64| f(u.exp());
    let mut best = (f64::INFINITY, ulo);
    let mut best_i = 0;
    for i in 0..points {
        let u = ulo + i as f64 * h;
        let v = g(u);
        if v < best.0 {
            best = (v, u);
            best_i = i;
        }
    }
    if best.0.is_finite() {
        let a = ulo + best_i.saturating_sub(1) as f64 * h;
        let b = ulo + (best_i + 1).min(points - 1) as f64 * h;
        let r = golden_min(a, b, 48, &g);
        if r.0 < best.0 {
            best = r;
        }
    }
    (best.0, best.1.exp())
}

fn gaussian_converse(n: u64, eps: f64, delta: f64, g: &GaussianWiretap, opts: &SearchOptions) -> Result<[BoundPoint; 2]> {
    let c = window(eps, delta)?;
    let table = QuadFormTable::new(&gauss_conv_llr(g, n)?)?;
    let ln_beta = |tau: f64| -> f64 {
        let alpha = c - tau;
        if !(alpha > 0.0) {
            return f64::NEG_INFINITY;
        }
        table.ln_beta(alpha).map(|r| r.0).unwrap_or(f64::NEG_INFINITY)
    };
    let thm3 = |tau: f64| objective(BoundId::Thm3, tau, delta, ln_beta(tau));
    let hay = |tau: f64| objective(BoundId::Hayashi, tau, delta, ln_beta(tau));
    let (mut v3, mut t3) = minimize_tau(c, opts.grid_points, &thm3);
    let (mut vh, mut th) = minimize_tau(c, opts.grid_points, &hay);
    let cross3 = thm3(th);
    if cross3 < v3 {
        (v3, t3) = (cross3, th);
    }
    let crossh = hay(t3);
    if crossh < vh {
        (vh, th) = (crossh, t3);
    }
    let diag = |tau: f64| Diagnostics { tau: Some(tau), ..Default::default() };
    Ok([point(n, BoundId::Thm3, v3, diag(t3)), point(n, BoundId::Hayashi, vh, diag(th))])
}

/// Nearest n-type to `p` (largest-remainder rounding).
pub fn nearest_type(p: &FiniteDist, n: u64) -> Vec<u64> {
    let raw: Vec<f64> = p.probs().iter().map(|q| q * n as f64).collect();
    let mut counts: Vec<u64> = raw.iter().map(|r| r.floor() as u64).collect();
    let mut left = n - counts.iter().sum::<u64>();
    let mut order: Vec<usize> = (0..raw.len()).collect();
    order.sort_by(|&a, &b| (raw[b] - raw[b].floor()).total_cmp(&(raw[a] - raw[a].floor())).then(a.cmp(&b)));
    for &i in order.iter().cycle() {
        if left == 0 {
            break;
        }
        counts[i] += 1;
        left -= 1;
    }
    counts
}

/// The type and its neighbours obtained by moving one letter between two
/// coordinates.
fn type_neighbourhood(t: &[u64]) -> Vec<Vec<u64>> {
    let mut out = vec![t.to_vec()];
    for i in 0..t.len() {
        for j in 0..t.len() {
            if i != j && t[i] > 0 {
                let mut s = t.to_vec();
                s[i] -= 1;
                s[j] += 1;
                out.push(s);
            }
        }
    }
    out
}

/// Conditional law Q_{Y|Z} induced by the input law `px` through the channel,
/// as a kernel from Z to Y (rows with P_Z = 0 are uniform).
pub fn induced_y_given_z(ch: &DMWiretap, px: &FiniteDist) -> Result<Kernel> {
    let (nx, ny, nz) = ch.sizes();
    let mut rows = vec![vec![0.0; ny]; nz];
    for x in 0..nx {
        for y in 0..ny {
            for z in 0..nz {
                rows[z][y] += px[x] * ch.p(x, y, z);
            }
        }
    }
    for row in &mut rows {
        let s: f64 = row.iter().sum();
        if s > 0.0 {
            row.iter_mut().for_each(|v| *v /= s);
        } else {
            row.iter_mut().for_each(|v| *v = 1.0 / ny as f64);
        }
    }
    Kernel::new(rows)
}

/// Per-letter atoms of ln P_{YZ|X}(y,z|x)/(P_{Z|X}(z|x)·Q(y|z)) under P_{YZ|X=x}.
fn conv_atoms(ch: &DMWiretap, x: usize, q_yz: &Kernel) -> Vec<(f64, f64)> {
    let (_, ny, nz) = ch.sizes();
    let pz = ch.pz_x().row(x);
    let mut atoms = Vec::new();
    for y in 0..ny {
        for z in 0..nz {
            let p = ch.p(x, y, z);
            if p <= 0.0 {
                continue;
            }
            let q = q_yz.row(z)[y];
            let v = if q > 0.0 { (p / (pz[z] * q)).ln() } else { f64::INFINITY };
            atoms.push((v, p));
        }
    }
    atoms
}

/// Law of the n-letter converse information density for a sequence of type
/// `counts`, with the product kernel induced by that type.
fn type_spectrum(ch: &DMWiretap, counts: &[u64], opts: &SearchOptions) -> Result<LogSpectrum> {
    let n: u64 = counts.iter().sum();
    let px = FiniteDist::normalized(counts.iter().map(|&c| c as f64).collect())?;
    let q = induced_y_given_z(ch, &px)?;
    let per_letter: Vec<Vec<(f64, f64)>> = (0..counts.len()).map(|x| conv_atoms(ch, x, &q)).collect();
    let union: Vec<(f64, f64)> = per_letter
        .iter()
        .zip(counts)
        .flat_map(|(a, &c)| a.iter().map(move |&(v, p)| (v, p * c as f64 / n as f64)))
        .collect();
    let mut step = lattice_step(&union, n, opts.target_bins);
    'retry: for _ in 0..16 {
        let mut acc: Option<LogSpectrum> = None;
        for (atoms, &c) in per_letter.iter().zip(counts) {
            if c == 0 {
                continue;
            }
            let part = match LogSpectrum::from_atoms(atoms, step)?.self_convolve(c, opts.max_bins) {
                Err(Error::LatticeOverflow { .. }) => {
                    step *= 2.0;
                    continue 'retry;
                }
                other => other?,
            };
            acc = Some(match acc {
                None => part,
                Some(a) => match a.convolve(&part, opts.max_bins) {
                    Err(Error::LatticeOverflow { .. }) => {
                        step *= 2.0;
                        continue 'retry;
                    }
                    other => other?,
                },
            });
        }
        return acc.ok_or_else(|| Error::Domain("empty type".into()));
    }
    Err(Error::LatticeOverflow { needed: opts.max_bins.saturating_mul(2), cap: opts.max_bins })
}

/// Discrete memoryless converse. β is lower-bounded through the information
/// spectrum, β_α ≥ e^{−γ}(α − P[S ≥ γ]), with the type-mixture kernel costing
/// |X|·ln(n+1) nats (`penalty`). The supremum over codeword types is taken over
/// the n-type nearest to the maximizer of I(X;Y|Z) and its neighbours, so the
/// points carry status `approx`.
pub fn dmc_converse(
    n: u64,
    eps: f64,
    delta: f64,
    d: &DmcScenario,
    opts: &SearchOptions,
    penalty: bool,
) -> Result<[BoundPoint; 2]> {
    let c = window(eps, delta)?;
    if n == 0 {
        return domain("blocklength must be positive");
    }
    let (_, star) = cs_upper_maximizer(&d.channel)?;
    let centre = nearest_type(&star, n);
    let spectra: Vec<LogSpectrum> =
        type_neighbourhood(&centre).iter().map(|t| type_spectrum(&d.channel, t, opts)).collect::<Result<_>>()?;
    let tails: Vec<SpectrumTails<'_>> = spectra.iter().map(|s| s.tails()).collect();
    let pen = if penalty { d.channel.sizes().0 as f64 * (n as f64 + 1.0).ln() } else { 0.0 };
    let base = &spectra[0];
    let p_sup = |s: f64| tails.iter().map(|t| t.p_tail(s)).fold(0.0, f64::max);

    let mut best = [(f64::INFINITY, 0.0, 0.0); 2];
    let sites = (0..=base.len()).map(|k| base.offset() + k as f64 * base.step());
    for s in sites {
        let a = c - p_sup(s);
        if !(a > 0.0) {
            continue;
        }
        let gamma = s + pen;
        // Closed-form optimal τ of each objective for fixed γ.
        let t3 = -delta + (delta * delta + delta * a).sqrt();
        let th = 2.0 * a / 3.0;
        let v3 = gamma - (a - t3).ln() + ((t3 + delta) / t3).ln();
        let vh = gamma - (a - th).ln() - 2.0 * th.ln();
        if v3 < best[0].0 {
            best[0] = (v3, t3, gamma);
        }
        if vh < best[1].0 {
            best[1] = (vh, th, gamma);
        }
    }
    let mk = |id: BoundId, (v, tau, gamma): (f64, f64, f64)| {
        let diag = Diagnostics { tau: v.is_finite().then_some(tau), log2_gamma: v.is_finite().then_some(gamma / LN_2), ..Default::default() };
        let mut p = point(n, id, v, diag);
        if p.status == Status::Ok {
            p.status = Status::Approx;
        }
        p
    };
    Ok([mk(BoundId::Thm3, best[0]), mk(BoundId::Hayashi, best[1])])
}

// ---------------------------------------------------------------------------
// Explicit small codes

/// Per-use kernels of a wiretap channel seen by explicit codes (the input
/// alphabet may itself be a product alphabet).
#[derive(Debug, Clone, PartialEq)]
pub struct CodebookChannel {
    pub py_x: Kernel,
    pub pz_x: Kernel,
}

impl CodebookChannel {
    pub fn new(py_x: Kernel, pz_x: Kernel) -> Result<Self> {
        if py_x.inputs() != pz_x.inputs() {
            return Err(Error::SupportMismatch { left: py_x.inputs(), right: pz_x.inputs() });
        }
        Ok(Self { py_x, pz_x })
    }
    pub fn inputs(&self) -> usize {
        self.py_x.inputs()
    }
}

/// General stochastic encoder: row m is P_{X|W=m} over the input alphabet.
#[derive(Debug, Clone, PartialEq)]
pub struct SecrecyCode {
    pub encoder: Vec<FiniteDist>,
}

impl SecrecyCode {
    pub fn messages(&self) -> usize {
        self.encoder.len()
    }

    fn check(&self, ch: &CodebookChannel, outputs: usize) -> Result<()> {
        let size = self.messages() * ch.inputs() * outputs.max(1);
        if size > ENUM_CAP {
            return Err(Error::SizeCap { size, cap: ENUM_CAP });
        }
        if self.encoder.iter().any(|r| r.len() != ch.inputs()) {
            return Err(Error::SupportMismatch { left: self.encoder[0].len(), right: ch.inputs() });
        }
        Ok(())
    }

    /// Joint P_{W,O} (row-major M × |O|) for equiprobable W through `w`.
    pub fn joint_out(&self, w: &Kernel) -> Vec<f64> {
        let m = self.messages() as f64;
        let no = w.outputs();
        let mut out = vec![0.0; self.messages() * no];
        for (i, enc) in self.encoder.iter().enumerate() {
            for x in 0..w.inputs() {
                if enc[x] == 0.0 {
                    continue;
                }
                for (o, &p) in w.row(x).iter().enumerate() {
                    out[i * no + o] += enc[x] * p / m;
                }
            }
        }
        out
    }

    /// Error probability of the MAP message decoder at the legitimate receiver.
    pub fn map_error(&self, ch: &CodebookChannel) -> f64 {
        let j = self.joint_out(&ch.py_x);
        map_error(&j, self.messages(), ch.py_x.outputs())
    }

    /// d(P_WZ, P_W P_Z).
    pub fn leakage(&self, ch: &CodebookChannel) -> f64 {
        let j = self.joint_out(&ch.pz_x);
        let prod = product_of_marginals(&j, self.messages(), ch.pz_x.outputs());
        0.5 * j.iter().zip(&prod).map(|(a, b)| (a - b).abs()).sum::<f64>()
    }
}

/// 1 − Σ_o max_i P(i, o) for a joint laid out rows × cols.
fn map_error(joint: &[f64], rows: usize, cols: usize) -> f64 {
    let mut correct = 0.0;
    for o in 0..cols {
        correct += (0..rows).map(|i| joint[i * cols + o]).fold(0.0, f64::max);
    }
    (1.0 - correct).max(0.0)
}

fn product_of_marginals(joint: &[f64], rows: usize, cols: usize) -> Vec<f64> {
    let mut pr = vec![0.0; rows];
    let mut pc = vec![0.0; cols];
    for i in 0..rows {
        for o in 0..cols {
            pr[i] += joint[i * cols + o];
            pc[o] += joint[i * cols + o];
        }
    }
    let mut out = Vec::with_capacity(rows * cols);
    for &a in &pr {
        out.extend(pc.iter().map(|b| a * b));
    }
    out
}

/// Partition code: codebook (input letters, repeats allowed), cell of every
/// codeword, and the within-cell encoder weights.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionCode {
    codebook: Vec<usize>,
    cell: Vec<usize>,
    weight: Vec<f64>,
    messages: usize,
}

impl PartitionCode {
    pub fn new(codebook: Vec<usize>, cell: Vec<usize>, weight: Vec<f64>, messages: usize) -> Result<Self> {
        let n = codebook.len();
        if n == 0 || cell.len() != n || weight.len() != n || messages == 0 || messages > n {
            return domain("partition code: inconsistent sizes");
        }
        let mut sums = vec![0.0; messages];
        let mut used = vec![false; messages];
        for i in 0..n {
            if cell[i] >= messages || !(weight[i] >= 0.0) {
                return domain(format!("partition code: bad cell or weight at codeword {i}"));
            }
            sums[cell[i]] += weight[i];
            used[cell[i]] = true;
        }
        if used.iter().any(|u| !u) || sums.iter().any(|s| (s - 1.0).abs() > 1e-12) {
            return domain("partition code: every cell must be nonempty with encoder weights summing to 1");
        }
        Ok(Self { codebook, cell, weight, messages })
    }

    /// Uniform encoder within each cell.
    pub fn uniform(codebook: Vec<usize>, cell: Vec<usize>, messages: usize) -> Result<Self> {
        let mut sizes = vec![0usize; messages];
        for &c in &cell {
            if c >= messages {
                return domain("partition code: cell index out of range");
            }
            sizes[c] += 1;
        }
        let weight = cell.iter().map(|&c| 1.0 / sizes[c] as f64).collect();
        Self::new(codebook, cell, weight, messages)
    }

    pub fn codebook(&self) -> &[usize] {
        &self.codebook
    }
    pub fn cells(&self) -> &[usize] {
        &self.cell
    }
    pub fn len(&self) -> usize {
        self.codebook.len()
    }
    pub fn is_empty(&self) -> bool {
        self.codebook.is_empty()
    }
    pub fn messages(&self) -> usize {
        self.messages
    }

    /// Equal cells and uniform encoders.
    pub fn is_uniform_partition(&self) -> bool {
        let k = self.len() / self.messages;
        let mut sizes = vec![0usize; self.messages];
        self.cell.iter().for_each(|&c| sizes[c] += 1);
        sizes.iter().all(|&s| s == k) && self.weight.iter().all(|&w| (w - 1.0 / k as f64).abs() < 1e-12)
    }

    /// P_X over codeword indices.
    pub fn codeword_probs(&self) -> Vec<f64> {
        self.weight.iter().map(|w| w / self.messages as f64).collect()
    }

    pub fn to_secrecy_code(&self, inputs: usize) -> SecrecyCode {
        let mut rows = vec![vec![0.0; inputs]; self.messages];
        for i in 0..self.len() {
            rows[self.cell[i]][self.codebook[i]] += self.weight[i];
        }
        SecrecyCode { encoder: rows.into_iter().map(FiniteDist::new).collect::<Result<_>>().expect("cells sum to one") }
    }

    fn check(&self, ch: &CodebookChannel) -> Result<()> {
        if let Some(&x) = self.codebook.iter().find(|&&x| x >= ch.inputs()) {
            return domain(format!("codeword letter {x} outside the input alphabet"));
        }
        let size = self.messages * self.len() * ch.py_x.outputs().max(ch.pz_x.outputs());
        if size > ENUM_CAP {
            return Err(Error::SizeCap { size, cap: ENUM_CAP });
        }
        Ok(())
    }

    /// Joint over (codeword index, output) through `w`, with X ~ code law.
    pub fn joint_x_out(&self, w: &Kernel) -> Vec<f64> {
        let px = self.codeword_probs();
        let no = w.outputs();
        let mut out = Vec::with_capacity(self.len() * no);
        for (i, &x) in self.codebook.iter().enumerate() {
            out.extend(w.row(x).iter().map(|p| px[i] * p));
        }
        out
    }

    /// Uniform-codeword reference P_X^unif × Q.
    fn unif_times(&self, q: &[f64]) -> Vec<f64> {
        let u = 1.0 / self.len() as f64;
        let mut out = Vec::with_capacity(self.len() * q.len());
        for _ in 0..self.len() {
            out.extend(q.iter().map(|v| u * v));
        }
        out
    }

    /// Error probability of the MAP codeword decoder g_le: Y → C.
    pub fn codeword_error(&self, ch: &CodebookChannel) -> f64 {
        map_error(&self.joint_x_out(&ch.py_x), self.len(), ch.py_x.outputs())
    }

    /// Output law of Z.
    pub fn pz(&self, ch: &CodebookChannel) -> Vec<f64> {
        let j = self.joint_x_out(&ch.pz_x);
        let nz = ch.pz_x.outputs();
        (0..nz).map(|z| (0..self.len()).map(|i| j[i * nz + z]).sum()).collect()
    }

    /// Exact d(P_WZ, P_W Q_Z); Q_Z = P_Z when `q_z` is None.
    pub fn leakage_against(&self, ch: &CodebookChannel, q_z: Option<&[f64]>) -> f64 {
        let nz = ch.pz_x.outputs();
        let mut pwz = vec![0.0; self.messages * nz];
        for (i, &x) in self.codebook.iter().enumerate() {
            let w = self.weight[i] / self.messages as f64;
            for (z, p) in ch.pz_x.row(x).iter().enumerate() {
                pwz[self.cell[i] * nz + z] += w * p;
            }
        }
        let pz_own;
        let q = match q_z {
            Some(q) => q,
            None => {
                pz_own = self.pz(ch);
                &pz_own
            }
        };
        let pw = 1.0 / self.messages as f64;
        let mut tv = 0.0;
        for m in 0..self.messages {
            for z in 0..nz {
                tv += (pwz[m * nz + z] - pw * q[z]).abs();
            }
        }
        0.5 * tv
    }
}

fn check_tau(tau: f64, delta: f64) -> Result<()> {
    if !(tau > 0.0 && tau < 1.0 - delta) {
        return domain(format!("tau must lie in (0, 1 - delta) = (0, {}), got {tau}", 1.0 - delta));
    }
    Ok(())
}

fn ratio_bound(num: f64, tau: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / (tau * den)
    } else {
        f64::INFINITY
    }
}

/// General converse for a given encoder:
/// β_{δ+τ}(P_WZ, P_W P_Z) / (τ·β_{1−ε}(P_WY, P_W Q_Y)), with ε the MAP error and
/// δ the exact leakage of the code.
pub fn thm2_smallscale(code: &SecrecyCode, ch: &CodebookChannel, q_y: &FiniteDist, tau: f64) -> Result<f64> {
    code.check(ch, ch.py_x.outputs().max(ch.pz_x.outputs()))?;
    if q_y.len() != ch.py_x.outputs() {
        return Err(Error::SupportMismatch { left: q_y.len(), right: ch.py_x.outputs() });
    }
    let m = code.messages();
    let delta = code.leakage(ch);
    check_tau(tau, delta)?;
    let eps = code.map_error(ch);
    let pwz = code.joint_out(&ch.pz_x);
    let ref_z = product_of_marginals(&pwz, m, ch.pz_x.outputs());
    let num = beta_alpha_raw(&pwz, &ref_z, (delta + tau).min(1.0))?;
    let pwy = code.joint_out(&ch.py_x);
    let ref_y: Vec<f64> = (0..m).flat_map(|_| q_y.probs().iter().map(move |q| q / m as f64)).collect();
    let den = beta_alpha_raw(&pwy, &ref_y, 1.0 - eps)?;
    Ok(ratio_bound(num, tau, den))
}

/// Leakage lower bound E_{N/M}(P_XZ, P_X^unif Q_Z) for a partition code.
pub fn lemma4_leakage_lb(code: &PartitionCode, ch: &CodebookChannel, q_z: &FiniteDist) -> Result<f64> {
    code.check(ch)?;
    if q_z.len() != ch.pz_x.outputs() {
        return Err(Error::SupportMismatch { left: q_z.len(), right: ch.pz_x.outputs() });
    }
    let pxz = code.joint_x_out(&ch.pz_x);
    let reference = code.unif_times(q_z.probs());
    e_gamma_raw(&pxz, &reference, code.len() as f64 / code.messages() as f64)
}

/// Resolvability converse: d(P_{Y|C}, Q_Y) ≥ E_N(P_X^unif P_{Y|X}, P_X^unif Q_Y).
pub fn resolvability_lb(codebook: &[usize], py_x: &Kernel, q_y: &FiniteDist) -> Result<f64> {
    let n = codebook.len();
    if n == 0 {
        return domain("empty codebook");
    }
    if q_y.len() != py_x.outputs() {
        return Err(Error::SupportMismatch { left: q_y.len(), right: py_x.outputs() });
    }
    if let Some(&x) = codebook.iter().find(|&&x| x >= py_x.inputs()) {
        return domain(format!("codeword letter {x} outside the input alphabet"));
    }
    let size = n * py_x.outputs();
    if size > ENUM_CAP {
        return Err(Error::SizeCap { size, cap: ENUM_CAP });
    }
    let u = 1.0 / n as f64;
    let mut p = Vec::with_capacity(size);
    let mut q = Vec::with_capacity(size);
    for &x in codebook {
        p.extend(py_x.row(x).iter().map(|v| u * v));
        q.extend(q_y.probs().iter().map(|v| u * v));
    }
    e_gamma_raw(&p, &q, n as f64)
}

/// d(P_{Y|C}, Q_Y) for the uniform mixture of codeword outputs.
pub fn resolvability_distance(codebook: &[usize], py_x: &Kernel, q_y: &FiniteDist) -> Result<f64> {
    if codebook.is_empty() {
        return domain("empty codebook");
    }
    let mut mix = vec![0.0; py_x.outputs()];
    for &x in codebook {
        for (y, v) in py_x.row(x).iter().enumerate() {
            mix[y] += v / codebook.len() as f64;
        }
    }
    Ok(0.5 * mix.iter().zip(q_y.probs()).map(|(a, b)| (a - b).abs()).sum::<f64>())
}

/// Partition-code converse: minimum over τ ∈ `taus` and Q_Y ∈ {induced output}
/// ∪ `extra_q_y` of β_{δ+τ}(P_XZ, P_X^unif P_Z)/(τ·β_{1−ε}(P_XY, P_X^unif Q_Y)),
/// with ε the MAP codeword error and δ the exact leakage.
pub fn thm4_smallscale(code: &PartitionCode, ch: &CodebookChannel, taus: &[f64], extra_q_y: &[FiniteDist]) -> Result<f64> {
    code.check(ch)?;
    let delta = code.leakage_against(ch, None);
    let eps = code.codeword_error(ch);
    let pxz = code.joint_x_out(&ch.pz_x);
    let ref_z = code.unif_times(&code.pz(ch));
    let pxy = code.joint_x_out(&ch.py_x);
    let ny = ch.py_x.outputs();
    let induced: Vec<f64> = (0..ny).map(|y| (0..code.len()).map(|i| pxy[i * ny + y]).sum()).collect();
    let mut qs = vec![induced];
    for q in extra_q_y {
        if q.len() != ny {
            return Err(Error::SupportMismatch { left: q.len(), right: ny });
        }
        qs.push(q.probs().to_vec());
    }
    let mut best_den: f64 = 0.0;
    for q in &qs {
        best_den = best_den.max(beta_alpha_raw(&pxy, &code.unif_times(q), 1.0 - eps)?);
    }
    let mut best = f64::INFINITY;
    for &tau in taus {
        check_tau(tau, delta)?;
        let num = beta_alpha_raw(&pxz, &ref_z, (delta + tau).min(1.0))?;
        best = best.min(ratio_bound(num, tau, best_den));
    }
    Ok(best)
}

/// Eavesdropper list-decoding converse: d(P_WZ, P_W Q_Z) ≥ 1 − ε_ld − L/M.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ListBound {
    pub list_size: usize,
    pub eps_ld: f64,
    pub bound: f64,
}

/// `lists[z]` holds the codeword indices output for observation z.
pub fn thm5_list_lb(code: &PartitionCode, ch: &CodebookChannel, lists: &[Vec<usize>]) -> Result<ListBound> {
    code.check(ch)?;
    let nz = ch.pz_x.outputs();
    if lists.len() != nz {
        return Err(Error::SupportMismatch { left: lists.len(), right: nz });
    }
    let pxz = code.joint_x_out(&ch.pz_x);
    let mut hit = 0.0;
    let mut l = 0;
    for (z, list) in lists.iter().enumerate() {
        l = l.max(list.len());
        for &i in list {
            if i >= code.len() {
                return domain(format!("list entry {i} outside the codebook"));
            }
            hit += pxz[i * nz + z];
        }
    }
    let eps_ld = (1.0 - hit).max(0.0);
    Ok(ListBound { list_size: l, eps_ld, bound: 1.0 - eps_ld - l as f64 / code.messages() as f64 })
}
