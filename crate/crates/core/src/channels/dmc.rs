//! Discrete memoryless wiretap channels and per-letter log-ratio spectra.

use crate::error::{Error, Result};
use crate::metrics::FiniteDist;
use crate::probkit::LogSpectrum;

const ROW_TOL: f64 = 1e-12;

/// A stochastic matrix: one output distribution per input letter.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    rows: Vec<Vec<f64>>,
}

impl Kernel {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self> {
        let Some(first) = rows.first() else {
            return Err(Error::InvalidChannel("kernel has no rows".into()));
        };
        let width = first.len();
        for (x, r) in rows.iter().enumerate() {
            if r.len() != width || width == 0 {
                return Err(Error::InvalidChannel(format!("row {x} has {} entries, expected {width}", r.len())));
            }
            if r.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
                return Err(Error::InvalidChannel(format!("row {x} has a negative or non-finite entry")));
            }
            let s: f64 = r.iter().sum();
            if (s - 1.0).abs() > ROW_TOL * width as f64 {
                return Err(Error::InvalidChannel(format!("row {x} sums to {s}")));
            }
        }
        Ok(Self { rows })
    }

    pub fn inputs(&self) -> usize {
        self.rows.len()
    }
    pub fn outputs(&self) -> usize {
        self.rows[0].len()
    }
    pub fn row(&self, x: usize) -> &[f64] {
        &self.rows[x]
    }
    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    /// Output law induced by the input law `px`.
    pub fn output(&self, px: &FiniteDist) -> Result<FiniteDist> {
        if px.len() != self.inputs() {
            return Err(Error::SupportMismatch { left: px.len(), right: self.inputs() });
        }
        let mut out = vec![0.0; self.outputs()];
        for (x, r) in self.rows.iter().enumerate() {
            for (o, v) in r.iter().enumerate() {
                out[o] += px[x] * v;
            }
        }
        FiniteDist::normalized(out)
    }

    /// Cascade: self followed by `next`.
    pub fn then(&self, next: &Kernel) -> Result<Kernel> {
        if next.inputs() != self.outputs() {
            return Err(Error::SupportMismatch { left: self.outputs(), right: next.inputs() });
        }
        let rows = self
            .rows
            .iter()
            .map(|r| (0..next.outputs()).map(|z| r.iter().enumerate().map(|(y, p)| p * next.rows[y][z]).sum()).collect())
            .collect();
        Ok(Kernel { rows })
    }
}

/// Binary symmetric channel with crossover `p`.
pub fn bsc(p: f64) -> Result<Kernel> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidChannel(format!("crossover {p} outside [0,1]")));
    }
    Kernel::new(vec![vec![1.0 - p, p], vec![p, 1.0 - p]])
}

/// Wiretap channel given by the joint transition tensor P_{YZ|X}.
#[derive(Debug, Clone, PartialEq)]
pub struct DMWiretap {
    nx: usize,
    ny: usize,
    nz: usize,
    /// P(y,z|x) at index (x·ny + y)·nz + z
    joint: Vec<f64>,
    py_x: Kernel,
    pz_x: Kernel,
}

impl DMWiretap {
    pub fn new(nx: usize, ny: usize, nz: usize, joint: Vec<f64>) -> Result<Self> {
        if nx == 0 || ny == 0 || nz == 0 || joint.len() != nx * ny * nz {
            return Err(Error::InvalidChannel(format!(
                "tensor of {} entries does not match sizes {nx}x{ny}x{nz}",
                joint.len()
            )));
        }
        let mut py = vec![vec![0.0; ny]; nx];
        let mut pz = vec![vec![0.0; nz]; nx];
        for x in 0..nx {
            for y in 0..ny {
                for z in 0..nz {
                    let v = joint[(x * ny + y) * nz + z];
                    if !(v >= 0.0) || !v.is_finite() {
                        return Err(Error::InvalidChannel(format!("entry ({x},{y},{z}) is {v}")));
                    }
                    py[x][y] += v;
                    pz[x][z] += v;
                }
            }
            let s: f64 = py[x].iter().sum();
            if (s - 1.0).abs() > ROW_TOL * (ny * nz) as f64 {
                return Err(Error::InvalidChannel(format!("P(.,.|x={x}) sums to {s}")));
            }
        }
        Ok(Self { nx, ny, nz, joint, py_x: Kernel::new(py)?, pz_x: Kernel::new(pz)? })
    }

    /// Physically degraded channel X → Y → Z.
    pub fn degraded(py_x: &Kernel, pz_y: &Kernel) -> Result<Self> {
        if pz_y.inputs() != py_x.outputs() {
            return Err(Error::SupportMismatch { left: py_x.outputs(), right: pz_y.inputs() });
        }
        let (nx, ny, nz) = (py_x.inputs(), py_x.outputs(), pz_y.outputs());
        let mut joint = Vec::with_capacity(nx * ny * nz);
        for x in 0..nx {
            for y in 0..ny {
                for z in 0..nz {
                    joint.push(py_x.row(x)[y] * pz_y.row(y)[z]);
                }
            }
        }
        Self::new(nx, ny, nz, joint)
    }

    /// Degraded pair of binary symmetric channels, crossovers p1 < p2 ≤ 1/2.
    pub fn bsc_pair(p1: f64, p2: f64) -> Result<Self> {
        if !(0.0 <= p1 && p1 < p2 && p2 <= 0.5) {
            return Err(Error::InvalidChannel(format!("need 0 <= p1 < p2 <= 1/2, got {p1}, {p2}")));
        }
        // BSC(p1) followed by BSC(q) is BSC(p1 + q − 2 p1 q).
        let q = (p2 - p1) / (1.0 - 2.0 * p1);
        Self::degraded(&bsc(p1)?, &bsc(q)?)
    }

    pub fn sizes(&self) -> (usize, usize, usize) {
        (self.nx, self.ny, self.nz)
    }
    pub fn p(&self, x: usize, y: usize, z: usize) -> f64 {
        self.joint[(x * self.ny + y) * self.nz + z]
    }
    pub fn py_x(&self) -> &Kernel {
        &self.py_x
    }
    pub fn pz_x(&self) -> &Kernel {
        &self.pz_x
    }

    /// Joint output (Y,Z) as a kernel over the flattened index y·nz + z.
    pub fn pyz_x(&self) -> Kernel {
        let rows = (0..self.nx).map(|x| self.joint[x * self.ny * self.nz..(x + 1) * self.ny * self.nz].to_vec()).collect();
        Kernel { rows }
    }

    /// True when P(z|x,y) does not depend on x, i.e. X → Y → Z.
    pub fn is_physically_degraded(&self) -> bool {
        for y in 0..self.ny {
            let mut reference: Option<Vec<f64>> = None;
            for x in 0..self.nx {
                let py = self.py_x.row(x)[y];
                if py <= 0.0 {
                    continue;
                }
                let cond: Vec<f64> = (0..self.nz).map(|z| self.p(x, y, z) / py).collect();
                match &reference {
                    None => reference = Some(cond),
                    Some(r) => {
                        if r.iter().zip(&cond).any(|(a, b)| (a - b).abs() > 1e-10) {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }
}

/// Per-letter atoms (ln W(o|x)/Q(o), P_X(x)·W(o|x)) of the log ratio under P_X·W.
pub fn dmc_llr_atoms(px: &FiniteDist, w: &Kernel, q_out: &FiniteDist) -> Result<Vec<(f64, f64)>> {
    if px.len() != w.inputs() {
        return Err(Error::SupportMismatch { left: px.len(), right: w.inputs() });
    }
    if q_out.len() != w.outputs() {
        return Err(Error::SupportMismatch { left: q_out.len(), right: w.outputs() });
    }
    let mut atoms = Vec::new();
    for x in 0..w.inputs() {
        for (o, &p) in w.row(x).iter().enumerate() {
            let mass = px[x] * p;
            if mass <= 0.0 {
                continue;
            }
            let v = if q_out[o] > 0.0 { (p / q_out[o]).ln() } else { f64::INFINITY };
            atoms.push((v, mass));
        }
    }
    Ok(atoms)
}

/// Lattice law of ln W(o|x)/Q_out(o) under P_X·W. Outputs with Q_out = 0 but
/// positive mass become a +∞ atom.
pub fn dmc_llr_spectrum(px: &FiniteDist, w: &Kernel, q_out: &FiniteDist, step: f64) -> Result<LogSpectrum> {
    LogSpectrum::from_atoms(&dmc_llr_atoms(px, w, q_out)?, step)
}

/// Lattice step for the n-fold sum of i.i.d. copies of the atom law: about
/// `target_bins` sites across the bulk (±20σ√n, capped by the full support),
/// adjusted so the extreme atoms fall exactly on the lattice.
pub fn lattice_step(atoms: &[(f64, f64)], n: u64, target_bins: usize) -> f64 {
    let finite: Vec<(f64, f64)> = atoms.iter().copied().filter(|a| a.0.is_finite() && a.1 > 0.0).collect();
    let lo = finite.iter().map(|a| a.0).fold(f64::INFINITY, f64::min);
    let hi = finite.iter().map(|a| a.0).fold(f64::NEG_INFINITY, f64::max);
    let r = hi - lo;
    if !(r > 0.0) {
        return 1.0;
    }
    let mass: f64 = finite.iter().map(|a| a.1).sum();
    let mean = finite.iter().map(|a| a.0 * a.1).sum::<f64>() / mass;
    let sd = (finite.iter().map(|a| a.1 * (a.0 - mean).powi(2)).sum::<f64>() / mass).sqrt();
    let nf = n as f64;
    let width = (nf * r).min(40.0 * sd * nf.sqrt() + 2.0 * r);
    let raw = width / target_bins.max(1) as f64;
    r / (r / raw).ceil()
}

/// Law of the sum of n i.i.d. copies of the atom law, doubling the lattice
/// step until it fits in `max_bins`.
pub fn nfold_spectrum(atoms: &[(f64, f64)], n: u64, target_bins: usize, max_bins: usize) -> Result<LogSpectrum> {
    let mut step = lattice_step(atoms, n, target_bins);
    for _ in 0..16 {
        match LogSpectrum::from_atoms(atoms, step)?.self_convolve(n, max_bins) {
            Err(Error::LatticeOverflow { .. }) => step *= 2.0,
            other => return other,
        }
    }
    Err(Error::LatticeOverflow { needed: max_bins.saturating_mul(2), cap: max_bins })
}

/// Whether the law of ln W(·|x)/Q_out under W(·|x) is the same for every x in
/// `support` (as a multiset of atoms).
pub fn llr_law_is_input_invariant(w: &Kernel, q_out: &FiniteDist, support: &[usize]) -> Result<bool> {
    let mut reference: Option<Vec<(f64, f64)>> = None;
    for &x in support {
        let mut atoms = dmc_llr_atoms(&FiniteDist::point(w.inputs(), x), w, q_out)?;
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        // merge equal values
        let mut merged: Vec<(f64, f64)> = Vec::new();
        for (v, p) in atoms {
            match merged.last_mut() {
                Some(last) if (last.0 - v).abs() <= 1e-12 * (1.0 + v.abs()) || last.0 == v => last.1 += p,
                _ => merged.push((v, p)),
            }
        }
        match &reference {
            None => reference = Some(merged),
            Some(r) => {
                if r.len() != merged.len()
                    || r.iter().zip(&merged).any(|(a, b)| {
                        !(a.0 == b.0 || (a.0 - b.0).abs() <= 1e-10 * (1.0 + a.0.abs())) || (a.1 - b.1).abs() > 1e-12
                    })
                {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}
