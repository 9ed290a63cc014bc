//! Exhaustive-enumeration oracles on tiny instances, and the certification
//! corpus that checks the analytic bounds against them.

use crate::bound::{BoundId, DmcScenario, Scenario, SearchOptions};
use crate::channels::{DMWiretap, Kernel};
use crate::converse::{
    lemma4_leakage_lb, resolvability_distance, resolvability_lb, thm2_smallscale, thm4_smallscale, thm5_list_lb,
    CodebookChannel, ListBound, PartitionCode,
};
use crate::error::{domain, Error, Result};
use crate::exec::{derive_seed, Exec};
use crate::metrics::FiniteDist;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Largest support handled by the subset / vertex enumerations.
pub const MAX_SUPPORT: usize = 12;
/// Largest codebook of a tiny instance.
pub const MAX_CODEBOOK: usize = 12;

/// A codebook of input letters through a wiretap channel, to be split into
/// `messages` equal cells of size K = |C|/M.
#[derive(Debug, Clone, PartialEq)]
pub struct TinyInstance {
    pub codebook: Vec<usize>,
    pub channel: CodebookChannel,
    pub messages: usize,
}

impl TinyInstance {
    pub fn new(codebook: Vec<usize>, channel: CodebookChannel, messages: usize) -> Result<Self> {
        if codebook.is_empty() || codebook.len() > MAX_CODEBOOK {
            return Err(Error::SizeCap { size: codebook.len(), cap: MAX_CODEBOOK });
        }
        if messages == 0 || codebook.len() % messages != 0 {
            return domain(format!("{messages} messages do not divide a codebook of {}", codebook.len()));
        }
        if let Some(&x) = codebook.iter().find(|&&x| x >= channel.inputs()) {
            return domain(format!("codeword letter {x} outside the input alphabet"));
        }
        Ok(Self { codebook, channel, messages })
    }

    pub fn bin_size(&self) -> usize {
        self.codebook.len() / self.messages
    }

    /// Random instance: |X|, |Y|, |Z| in 2..=4, M in 1..=4, |C| = MK ≤ 12.
    pub fn random<R: Rng>(rng: &mut R) -> Self {
        let nx = rng.random_range(2..=4);
        let ny = rng.random_range(2..=4);
        let nz = rng.random_range(2..=4);
        let messages = rng.random_range(1..=4);
        let k = rng.random_range(1..=MAX_CODEBOOK / messages);
        let codebook = (0..messages * k).map(|_| rng.random_range(0..nx)).collect();
        let channel = CodebookChannel::new(random_kernel(rng, nx, ny), random_kernel(rng, nx, nz)).expect("same input alphabet");
        Self { codebook, channel, messages }
    }

    pub fn code(&self, cells: &[usize]) -> Result<PartitionCode> {
        PartitionCode::uniform(self.codebook.clone(), cells.to_vec(), self.messages)
    }
}

/// Random stochastic matrix; about a quarter of the entries are zero.
pub fn random_kernel<R: Rng>(rng: &mut R, inputs: usize, outputs: usize) -> Kernel {
    let rows = (0..inputs)
        .map(|_| {
            let mut row: Vec<f64> = (0..outputs)
                .map(|_| if rng.random_bool(0.25) { 0.0 } else { -rng.random::<f64>().max(1e-300).ln() })
                .collect();
            if row.iter().all(|&v| v == 0.0) {
                row[rng.random_range(0..outputs)] = 1.0;
            }
            let s: f64 = row.iter().sum();
            row.iter_mut().for_each(|v| *v /= s);
            row
        })
        .collect();
    Kernel::new(rows).expect("rows normalized")
}

pub fn random_dist<R: Rng>(rng: &mut R, n: usize) -> FiniteDist {
    FiniteDist::normalized((0..n).map(|_| -rng.random::<f64>().max(1e-300).ln()).collect()).expect("positive weights")
}

/// All partitions of `0..n` into `m` cells of equal size, each listed once:
/// cells are numbered in order of their smallest element.
pub fn balanced_partitions(n: usize, m: usize) -> Result<Vec<Vec<usize>>> {
    if m == 0 || n % m != 0 {
        return domain(format!("{m} cells do not divide {n} elements"));
    }
    if n > MAX_CODEBOOK {
        return Err(Error::SizeCap { size: n, cap: MAX_CODEBOOK });
    }
    let k = n / m;
    let mut out = Vec::new();
    let mut cells = vec![0usize; n];
    let mut sizes = vec![0usize; m];
    fn rec(i: usize, opened: usize, k: usize, cells: &mut Vec<usize>, sizes: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if i == cells.len() {
            out.push(cells.clone());
            return;
        }
        for c in 0..(opened + 1).min(sizes.len()) {
            if sizes[c] < k {
                cells[i] = c;
                sizes[c] += 1;
                rec(i + 1, opened.max(c + 1), k, cells, sizes, out);
                sizes[c] -= 1;
            }
        }
    }
    rec(0, 0, k, &mut cells, &mut sizes, &mut out);
    Ok(out)
}

/// Exact leakage d(P_WZ, P_W P_Z) of a partition code.
pub fn exhaustive_leakage(code: &PartitionCode, ch: &CodebookChannel) -> Result<f64> {
    check_enumerable(code, ch)?;
    Ok(code.leakage_against(ch, None))
}

fn check_enumerable(code: &PartitionCode, ch: &CodebookChannel) -> Result<()> {
    if let Some(&x) = code.codebook().iter().find(|&&x| x >= ch.inputs()) {
        return domain(format!("codeword letter {x} outside the input alphabet"));
    }
    let size = code.messages() * code.len() * ch.pz_x.outputs().max(ch.py_x.outputs());
    if size > crate::converse::ENUM_CAP {
        return Err(Error::SizeCap { size, cap: crate::converse::ENUM_CAP });
    }
    Ok(())
}

/// Minimum leakage over all balanced uniform partitions, with a minimizing cell map.
pub fn min_partition_leakage_with(t: &TinyInstance) -> Result<(f64, Vec<usize>)> {
    let mut best = (f64::INFINITY, Vec::new());
    for cells in balanced_partitions(t.codebook.len(), t.messages)? {
        let d = exhaustive_leakage(&t.code(&cells)?, &t.channel)?;
        if d < best.0 {
            best = (d, cells);
        }
    }
    Ok(best)
}

pub fn min_partition_leakage(t: &TinyInstance) -> Result<f64> {
    Ok(min_partition_leakage_with(t)?.0)
}

/// Privacy-amplification bound for a uniform codebook of size KM, evaluated
/// exactly: E_γ(P_XZ, P_X Q_Z) + ½√(γ/K · E[exp(−|ı(X;Z) − ln γ|)]).
pub fn lemma1_rhs(codebook: &[usize], pz_x: &Kernel, q_z: &FiniteDist, k: usize, gamma: f64) -> Result<f64> {
    if !(gamma > 0.0) || k == 0 {
        return domain("lemma1_rhs needs gamma > 0 and K >= 1");
    }
    if q_z.len() != pz_x.outputs() {
        return Err(Error::SupportMismatch { left: q_z.len(), right: pz_x.outputs() });
    }
    let u = 1.0 / codebook.len() as f64;
    let ln_g = gamma.ln();
    let mut e = 0.0;
    let mut moment = 0.0;
    for &x in codebook {
        for (z, &p) in pz_x.row(x).iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let q = q_z.probs()[z];
            e += (u * p - gamma * u * q).max(0.0);
            if q > 0.0 {
                moment += u * p * (-((p / q).ln() - ln_g).abs()).exp();
            }
        }
    }
    Ok(e + 0.5 * (gamma / k as f64 * moment).sqrt())
}

/// Brute-force E_γ: max over all events of P(E) − γQ(E).
pub fn brute_e_gamma(p: &[f64], q: &[f64], gamma: f64) -> Result<f64> {
    check_pair(p, q)?;
    let mut best = 0.0f64;
    for mask in 0u32..(1 << p.len()) {
        let (mut a, mut b) = (0.0, 0.0);
        for i in 0..p.len() {
            if mask >> i & 1 == 1 {
                a += p[i];
                b += q[i];
            }
        }
        best = best.max(a - gamma * b);
    }
    Ok(best)
}

fn check_pair(p: &[f64], q: &[f64]) -> Result<()> {
    if p.len() != q.len() {
        return Err(Error::SupportMismatch { left: p.len(), right: q.len() });
    }
    if p.len() > MAX_SUPPORT {
        return Err(Error::SizeCap { size: p.len(), cap: MAX_SUPPORT });
    }
    Ok(())
}

/// β_α(P, Q) as the linear program min Σ Q φ s.t. Σ P φ ≥ α, 0 ≤ φ ≤ 1, solved by
/// enumerating its vertices (at most one fractional coordinate).
pub fn brute_beta(p: &FiniteDist, q: &FiniteDist, alpha: f64) -> Result<f64> {
    brute_beta_raw(p.probs(), q.probs(), alpha)
}

pub fn brute_beta_raw(p: &[f64], q: &[f64], alpha: f64) -> Result<f64> {
    check_pair(p, q)?;
    if !(0.0..=1.0).contains(&alpha) {
        return domain(format!("alpha must lie in [0, 1], got {alpha}"));
    }
    let n = p.len();
    let mut best = f64::INFINITY;
    for mask in 0u32..(1 << n) {
        let (mut ps, mut qs) = (0.0, 0.0);
        for i in 0..n {
            if mask >> i & 1 == 1 {
                ps += p[i];
                qs += q[i];
            }
        }
        if ps >= alpha {
            best = best.min(qs);
            continue;
        }
        for j in (0..n).filter(|&j| mask >> j & 1 == 0 && p[j] > 0.0) {
            let t = (alpha - ps) / p[j];
            if t <= 1.0 {
                best = best.min(qs + t * q[j]);
            }
        }
    }
    Ok(best.min(1.0))
}

/// Outcome of the exhaustive fixed-size list decoder at the eavesdropper.
#[derive(Debug, Clone, PartialEq)]
pub struct ListDecoding {
    pub lists: Vec<Vec<usize>>,
    pub bound: ListBound,
}

/// For each z, list the `l` a-posteriori most likely codewords (ties to the
/// lowest index) and evaluate 1 − ε_ld − L/M.
pub fn exhaustive_list_decoder(code: &PartitionCode, ch: &CodebookChannel, l: usize) -> Result<ListDecoding> {
    if l > code.len() {
        return domain(format!("list size {l} exceeds the codebook size {}", code.len()));
    }
    check_enumerable(code, ch)?;
    let nz = ch.pz_x.outputs();
    let pxz = code.joint_x_out(&ch.pz_x);
    let lists: Vec<Vec<usize>> = (0..nz)
        .map(|z| {
            let mut idx: Vec<usize> = (0..code.len()).collect();
            idx.sort_by(|&a, &b| pxz[b * nz + z].total_cmp(&pxz[a * nz + z]).then(a.cmp(&b)));
            idx.truncate(l);
            idx
        })
        .collect();
    let bound = thm5_list_lb(code, ch, &lists)?;
    Ok(ListDecoding { lists, bound })
}

// ---------------------------------------------------------------------------
// Certification corpus

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Family {
    Lemma1,
    Lemma4,
    Thm4,
    Thm2,
    Thm5,
    Resolvability,
}

impl Family {
    pub const ALL: [Family; 6] = [Family::Lemma1, Family::Lemma4, Family::Thm4, Family::Thm2, Family::Thm5, Family::Resolvability];

    pub fn as_str(self) -> &'static str {
        match self {
            Family::Lemma1 => "lemma1",
            Family::Lemma4 => "lemma4",
            Family::Thm4 => "thm4",
            Family::Thm2 => "thm2",
            Family::Thm5 => "thm5",
            Family::Resolvability => "resolvability",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FamilyReport {
    pub family: Family,
    pub checks: usize,
    pub violations: usize,
    /// Smallest slack (bound side minus exact side, oriented so ≥ 0 is sound).
    pub min_slack: f64,
}

impl FamilyReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CertificationReport {
    pub instances: usize,
    pub seed: u64,
    pub families: Vec<FamilyReport>,
}

impl CertificationReport {
    pub fn passed(&self) -> bool {
        self.families.iter().all(FamilyReport::passed)
    }
}

/// Slack below this is round-off, not a violation.
const SLACK_TOL: f64 = 1e-9;
const GAMMA_POINTS: usize = 32;
const TAU_POINTS: usize = 16;

#[derive(Default, Clone)]
struct Tally {
    checks: usize,
    violations: usize,
    min_slack: f64,
}

impl Tally {
    fn record(&mut self, slack: f64) {
        if self.checks == 0 || slack < self.min_slack {
            self.min_slack = slack;
        }
        self.checks += 1;
        if !(slack >= -SLACK_TOL) {
            self.violations += 1;
        }
    }
    fn merge(&mut self, o: &Tally) {
        if o.checks == 0 {
            return;
        }
        if self.checks == 0 || o.min_slack < self.min_slack {
            self.min_slack = o.min_slack;
        }
        self.checks += o.checks;
        self.violations += o.violations;
    }
}

/// Run every certification family on `count` random tiny instances.
pub fn certify(count: usize, seed: u64, exec: Exec) -> Result<CertificationReport> {
    if count == 0 {
        return domain("certification needs at least one instance");
    }
    let per = exec.map_range(count, |i| {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[i as u64]));
        let t = TinyInstance::random(&mut rng);
        certify_instance(&t, &mut rng)
    });
    let mut totals = vec![Tally::default(); Family::ALL.len()];
    for r in per {
        for (acc, t) in totals.iter_mut().zip(r?) {
            acc.merge(&t);
        }
    }
    let families = Family::ALL
        .iter()
        .zip(totals)
        .map(|(&family, t)| FamilyReport { family, checks: t.checks, violations: t.violations, min_slack: t.min_slack })
        .collect();
    Ok(CertificationReport { instances: count, seed, families })
}

fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    (0..points).map(|i| (lo.ln() + (hi / lo).ln() * i as f64 / (points - 1) as f64).exp()).collect()
}

fn certify_instance<R: Rng>(t: &TinyInstance, rng: &mut R) -> Result<Vec<Tally>> {
    let mut tally = vec![Tally::default(); Family::ALL.len()];
    let ch = &t.channel;
    let nz = ch.pz_x.outputs();
    let ny = ch.py_x.outputs();
    let m = t.messages;

    // Hashing bound: the best balanced partition beats it at every (γ, Q_Z).
    let (best, cells) = min_partition_leakage_with(t)?;
    let best_code = t.code(&cells)?;
    let pz = FiniteDist::normalized(best_code.pz(ch))?;
    for q_z in [pz.clone(), FiniteDist::uniform(nz)] {
        for gamma in log_grid(1e-2, 1e2 * t.codebook.len() as f64, GAMMA_POINTS) {
            let rhs = lemma1_rhs(&t.codebook, &ch.pz_x, &q_z, t.bin_size(), gamma)?;
            tally[0].record(rhs - best);
        }
    }

    // A second, generally non-uniform partition code on the same codebook.
    let n = t.codebook.len();
    let mut cell: Vec<usize> = (0..n).map(|i| if i < m { i } else { rng.random_range(0..m) }).collect();
    cell.rotate_left(rng.random_range(0..n));
    let mut weight: Vec<f64> = (0..n).map(|_| rng.random::<f64>() + 0.05).collect();
    let mut sums = vec![0.0; m];
    for i in 0..n {
        sums[cell[i]] += weight[i];
    }
    for i in 0..n {
        weight[i] /= sums[cell[i]];
    }
    let general = PartitionCode::new(t.codebook.clone(), cell, weight, m)?;

    for code in [&best_code, &general] {
        let own_pz = FiniteDist::normalized(code.pz(ch))?;
        let mut q_zs = vec![own_pz.clone(), FiniteDist::uniform(nz)];
        q_zs.push(random_dist(rng, nz));
        let leak: Vec<f64> = q_zs
            .iter()
            .enumerate()
            .map(|(j, q)| if j == 0 { code.leakage_against(ch, None) } else { code.leakage_against(ch, Some(q.probs())) })
            .collect();

        // Exact leakage against Q_Z dominates the E_{N/M} bound.
        for (q, &d) in q_zs.iter().zip(&leak) {
            tally[1].record(d - lemma4_leakage_lb(code, ch, q)?);
        }

        // Partition-code and general converses never exclude the code itself.
        let delta = leak[0];
        if delta < 1.0 - 1e-6 {
            let taus = log_grid(1e-3, (1.0 - delta) * (1.0 - 1e-3), TAU_POINTS);
            let extra = [FiniteDist::uniform(ny), random_dist(rng, ny)];
            let b4 = thm4_smallscale(code, ch, &taus, &extra)?;
            tally[2].record(b4 / m as f64 - 1.0);
            let sc = code.to_secrecy_code(ch.inputs());
            let induced = FiniteDist::normalized(sc.joint_out(&ch.py_x).chunks(ny).fold(vec![0.0; ny], |mut acc, row| {
                acc.iter_mut().zip(row).for_each(|(a, b)| *a += b);
                acc
            }))?;
            for q_y in [induced, FiniteDist::uniform(ny)] {
                let b2 = taus.iter().map(|&tau| thm2_smallscale(&sc, ch, &q_y, tau)).collect::<Result<Vec<_>>>()?;
                tally[3].record(b2.into_iter().fold(f64::INFINITY, f64::min) / m as f64 - 1.0);
            }
        }

        // List-decoding bound: every list size, against every tested Q_Z.
        let floor = leak.iter().cloned().fold(f64::INFINITY, f64::min);
        for l in 0..=code.len() {
            let lb = exhaustive_list_decoder(code, ch, l)?.bound.bound;
            tally[4].record(floor - lb);
        }
    }

    // Resolvability: the codebook's output mixture against several Q_Y.
    let mix = FiniteDist::normalized(best_code.joint_x_out(&ch.py_x).chunks(ny).fold(vec![0.0; ny], |mut acc, row| {
        acc.iter_mut().zip(row).for_each(|(a, b)| *a += b);
        acc
    }))?;
    for q_y in [mix, FiniteDist::uniform(ny), random_dist(rng, ny)] {
        let d = resolvability_distance(&t.codebook, &ch.py_x, &q_y)?;
        tally[5].record(d - resolvability_lb(&t.codebook, &ch.py_x, &q_y)?);
    }
    Ok(tally)
}

// ---------------------------------------------------------------------------
// Existence witness for the achievability bound on short binary blocks

/// A uniform-partition code over n uses of a BSC wiretap pair, with its exact
/// message error and leakage.
#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub n: u32,
    pub messages: usize,
    pub bin_size: usize,
    /// Codewords as n-bit integers; cell m holds codewords m·K .. (m+1)·K.
    pub codebook: Vec<u32>,
    pub error: f64,
    pub leakage: f64,
}

/// Exact MAP message error and leakage d(P_WZ, P_W P_Z) of the code whose cell
/// m is `codebook[m·K..(m+1)·K]`, with uniform encoding inside cells.
pub fn bsc_code_performance(n: u32, codebook: &[u32], messages: usize, p_legit: f64, p_eve: f64) -> Result<(f64, f64)> {
    if n == 0 || n > 12 || messages == 0 || codebook.len() % messages != 0 {
        return domain("bsc code: need 1 ≤ n ≤ 12 and M dividing the codebook size");
    }
    if codebook.iter().any(|&c| c >> n != 0) {
        return domain("bsc code: codeword wider than n bits");
    }
    let k = codebook.len() / messages;
    let outs = 1usize << n;
    let joint = |p: f64| -> Vec<f64> {
        let w = 1.0 / codebook.len() as f64;
        let pow: Vec<f64> = (0..=n).map(|d| p.powi(d as i32) * (1.0 - p).powi((n - d) as i32)).collect();
        let mut j = vec![0.0; messages * outs];
        for (i, &c) in codebook.iter().enumerate() {
            let m = i / k;
            for o in 0..outs {
                j[m * outs + o] += w * pow[(c ^ o as u32).count_ones() as usize];
            }
        }
        j
    };
    let jy = joint(p_legit);
    let correct: f64 = (0..outs).map(|o| (0..messages).map(|m| jy[m * outs + o]).fold(0.0, f64::max)).sum();
    let jz = joint(p_eve);
    let pw = 1.0 / messages as f64;
    let mut leak = 0.0;
    for o in 0..outs {
        let pz: f64 = (0..messages).map(|m| jz[m * outs + o]).sum();
        leak += (0..messages).map(|m| (jz[m * outs + o] - pw * pz).abs()).sum::<f64>();
    }
    Ok(((1.0 - correct).max(0.0), 0.5 * leak))
}

/// Find a code meeting (ε, δ) at the sizes certified by the achievability bound
/// for the BSC pair with uniform input, by sampling random codebooks.
/// Returns `Ok(None)` if none of `tries` candidates qualifies.
pub fn bsc_existence_witness(
    n: u32,
    eps: f64,
    delta: f64,
    p_legit: f64,
    p_eve: f64,
    tries: usize,
    opts: &SearchOptions,
) -> Result<Option<Witness>> {
    if n == 0 || n > 10 {
        return domain("existence witness is limited to 1 ≤ n ≤ 10");
    }
    let scenario = Scenario::Dmc(DmcScenario {
        channel: DMWiretap::bsc_pair(p_legit, p_eve)?,
        input: FiniteDist::uniform(2),
        q_z: None,
    });
    let point = crate::achievability::thm1_rate(n as u64, eps, delta, &scenario, opts)?;
    debug_assert_eq!(point.bound, BoundId::Thm1);
    let messages = (point.rate_bits * n as f64).exp2().round().max(1.0) as usize;
    let bin_size = point.diag.log2_k.map_or(1.0, |l| l.exp2().round().max(1.0)) as usize;
    let size = messages * bin_size;
    if size > 1 << 12 {
        return Err(Error::SizeCap { size, cap: 1 << 12 });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(opts.seed, &[n as u64, 0x5749_544e]));
    for _ in 0..tries.max(1) {
        let codebook: Vec<u32> = (0..size).map(|_| rng.random_range(0..1u32 << n)).collect();
        let (error, leakage) = bsc_code_performance(n, &codebook, messages, p_legit, p_eve)?;
        if error <= eps && leakage <= delta {
            return Ok(Some(Witness { n, messages, bin_size, codebook, error, leakage }));
        }
    }
    Ok(None)
}
