//! Acceptance suite. Every criterion prints exactly one `PASS`/`FAIL` line;
//! run with `cargo test --release -p wtc-cli --test acceptance -- --nocapture`.
//!
//! Oracles here are independent of the library: Monte Carlo straight from the
//! channel model, subset/LP brute force, product-space enumeration, quadrature.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::OnceLock;
use std::time::{Duration, Instant};
use wtc_cli::config::ScenarioConfig;
use wtc_cli::curve_points;
use wtc_core::asymptotics::gauss_terms;
use wtc_core::bound::{BoundId, BoundPoint};
use wtc_core::channels::{dmc_llr_atoms, gauss_conv_llr, gauss_eve_llr, quadform_cdf, GaussianWiretap, Kernel, Measure};
use wtc_core::metrics::{beta_alpha, beta_alpha_raw, beta_alpha_spectrum, e_gamma, e_gamma_raw, e_gamma_spectrum, total_variation, FiniteDist};
use wtc_core::probkit::{nc_chi2_cdf, LogSpectrum, NoncentralChi2};
use wtc_core::smallscale::{brute_beta, brute_e_gamma, certify, random_kernel};
use wtc_core::Exec;

// pinned tolerances
const CS_BITS: f64 = 0.49879;
const V1_BITS2: f64 = 0.92469;
const V2_BITS2: f64 = 0.57889;
const CONST_TOL: f64 = 1e-4;
const VC_MC_SAMPLES: usize = 10_000_000;
const SIGMAS: f64 = 3.0;
const METRIC_PAIRS: usize = 1000;
const METRIC_TOL: f64 = 1e-12;
const SPECTRUM_STEP: f64 = 1e-4;
const SPECTRUM_TOL: f64 = 1e-6;
const CERT_INSTANCES: usize = 100;
const LLR_MC_SAMPLES: usize = 1_000_000;
const LLR_PARAM_SETS: usize = 10;
const QUANTILES: usize = 20;
const COM_TOL: f64 = 1e-6;
const BRACKET_FROM: u64 = 2000;
const TAIL_POINTS: usize = 5;

fn report(criterion: u32, ok: bool, detail: &str) {
    println!("criterion {criterion}: {} — {detail}", if ok { "PASS" } else { "FAIL" });
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn z(rng: &mut ChaCha8Rng) -> f64 {
    <StandardNormal as Distribution<f64>>::sample(&StandardNormal, rng)
}

/// One letter of the converse information density, simulated from the noises.
fn conv_letter(rng: &mut ChaCha8Rng, g: &GaussianWiretap) -> f64 {
    let (p, n1, n2) = (g.p, g.n1, g.n2);
    let u = n1.sqrt() * z(rng);
    let ub = (n2 - n1).sqrt() * z(rng);
    g.secrecy_capacity()
        + 0.5 * ((u + ub).powi(2) / n2 - u * u / n1 + (p.sqrt() + u).powi(2) / (p + n1) - (p.sqrt() + u + ub).powi(2) / (p + n2))
}

#[test]
fn criterion_1_closed_form_constants() {
    let t0 = Instant::now();
    let g = GaussianWiretap::from_snr_db(3.0, -3.0).unwrap();
    let terms = gauss_terms(&g);
    let b = std::f64::consts::LN_2;
    let (cs, v1, v2, vc) = (terms.cs / b, terms.v1 / (b * b), terms.v2 / (b * b), terms.vc / (b * b));

    // sample variance of the per-letter term and its standard error
    let mut rng = ChaCha8Rng::seed_from_u64(7001);
    let mut s = [0.0f64; 4];
    for _ in 0..VC_MC_SAMPLES {
        let d = conv_letter(&mut rng, &g) - terms.cs;
        let d2 = d * d;
        s[0] += d;
        s[1] += d2;
        s[2] += d2 * d;
        s[3] += d2 * d2;
    }
    let m = VC_MC_SAMPLES as f64;
    let [e1, e2, e3, e4] = s.map(|x| x / m);
    let var = e2 - e1 * e1;
    let mu4 = e4 - 4.0 * e3 * e1 + 6.0 * e2 * e1 * e1 - 3.0 * e1.powi(4);
    let se = ((mu4 - var * var) / m).sqrt();
    let elapsed = t0.elapsed();

    let checks = [
        ("C_S", (cs - CS_BITS).abs() <= CONST_TOL),
        ("V1", (v1 - V1_BITS2).abs() <= CONST_TOL),
        ("V2", (v2 - V2_BITS2).abs() <= CONST_TOL),
        ("V_c vs MC", (terms.vc - var).abs() <= SIGMAS * se),
        ("runtime", elapsed < Duration::from_secs(60)),
    ];
    let ok = checks.iter().all(|c| c.1);
    let failed: Vec<&str> = checks.iter().filter(|c| !c.1).map(|c| c.0).collect();
    report(
        1,
        ok,
        &format!(
            "C_S {cs:.6} (target {CS_BITS}), V1 {v1:.6} (target {V1_BITS2}), V2 {v2:.6} (target {V2_BITS2}) bits; \
             V_c {vc:.6} bits², MC {:.6} ± {:.6}; {:.1}s; failing: {failed:?}",
            var / (b * b),
            se / (b * b),
            elapsed.as_secs_f64()
        ),
    );
    assert!(ok, "failing checks: {failed:?}");
}

struct Curve {
    rates: BTreeMap<(u64, BoundId), f64>,
    grid: Vec<u64>,
    elapsed: Duration,
}

fn run_curve(name: &str) -> Curve {
    let cfg = ScenarioConfig::load(&configs().join(name)).unwrap();
    let t0 = Instant::now();
    let pts: Vec<BoundPoint> = curve_points(&cfg, Exec::default()).unwrap();
    Curve { rates: pts.iter().map(|p| ((p.n, p.bound), p.rate_bits)).collect(), grid: cfg.n_grid.clone(), elapsed: t0.elapsed() }
}

fn gaussian_curve() -> &'static Curve {
    static C: OnceLock<Curve> = OnceLock::new();
    C.get_or_init(|| run_curve("fig1.toml"))
}

fn bsc_curve() -> &'static Curve {
    static C: OnceLock<Curve> = OnceLock::new();
    C.get_or_init(|| run_curve("bsc_pair.toml"))
}

#[test]
fn criterion_2_dominance_over_prior_bounds() {
    let c = gaussian_curve();
    let r = |n, b| c.rates[&(n, b)];
    let mut bad = Vec::new();
    for &n in &c.grid {
        if r(n, BoundId::Thm1) < r(n, BoundId::Wh) {
            bad.push(format!("n={n}: thm1 {} < wh {}", r(n, BoundId::Thm1), r(n, BoundId::Wh)));
        }
        if r(n, BoundId::Thm3) > r(n, BoundId::Hayashi) {
            bad.push(format!("n={n}: thm3 {} > hayashi {}", r(n, BoundId::Thm3), r(n, BoundId::Hayashi)));
        }
    }
    let timely = c.elapsed < Duration::from_secs(600);
    let ok = bad.is_empty() && timely;
    report(2, ok, &format!("{} grid points, {} exceptions, {:.1}s {bad:?}", c.grid.len(), bad.len(), c.elapsed.as_secs_f64()));
    assert!(ok);
}

/// Distance of `v` outside [lo, hi].
fn outside(v: f64, lo: f64, hi: f64) -> f64 {
    (lo - v).max(v - hi).max(0.0)
}

#[test]
fn criterion_3_bracket_consistency() {
    let mut ok = true;
    let mut notes = Vec::new();
    for (name, c) in [("gaussian", gaussian_curve()), ("bsc", bsc_curve())] {
        let r = |n, b| c.rates[&(n, b)];
        let crossed: Vec<u64> = c.grid.iter().copied().filter(|&n| r(n, BoundId::Thm1) > r(n, BoundId::Thm3)).collect();
        if !crossed.is_empty() {
            ok = false;
            notes.push(format!("{name}: thm1 > thm3 at {crossed:?}"));
        }
        for na in [BoundId::NaAch, BoundId::NaConv] {
            let dev: Vec<(u64, f64)> = c
                .grid
                .iter()
                .filter(|&&n| n >= BRACKET_FROM)
                .map(|&n| (n, outside(r(n, na), r(n, BoundId::Thm1), r(n, BoundId::Thm3))))
                .collect();
            if dev.iter().all(|d| d.1 == 0.0) {
                notes.push(format!("{name}/{}: inside", na.as_str()));
                continue;
            }
            let tail: Vec<f64> = c.grid[c.grid.len().saturating_sub(TAIL_POINTS)..]
                .iter()
                .map(|&n| outside(r(n, na), r(n, BoundId::Thm1), r(n, BoundId::Thm3)))
                .collect();
            let shrinking = tail.windows(2).all(|w| w[1] < w[0]);
            ok &= shrinking;
            let shown: Vec<String> = dev.iter().map(|(n, d)| format!("{n}:{d:.5}")).collect();
            notes.push(format!(
                "{name}/{}: outside by [{}] bits, last {TAIL_POINTS} {}",
                na.as_str(),
                shown.join(" "),
                if shrinking { "shrinking" } else { "not monotone" }
            ));
        }
    }
    report(3, ok, &notes.join("; "));
    assert!(ok);
}

fn random_pair(rng: &mut ChaCha8Rng) -> (FiniteDist, FiniteDist) {
    let n = rng.random_range(1..=12);
    let mut draw = || {
        let mut v: Vec<f64> = (0..n).map(|_| if rng.random_bool(0.15) { 0.0 } else { rng.random::<f64>() }).collect();
        if v.iter().all(|&x| x == 0.0) {
            v[0] = 1.0;
        }
        FiniteDist::normalized(v).unwrap()
    };
    (draw(), draw())
}

/// P- and Q-masses of every n-letter sequence of per-letter (llr, P-mass) atoms.
fn product_space(atoms: &[(f64, f64)], n: u32) -> (Vec<f64>, Vec<f64>) {
    let mut cur = vec![(1.0, 0.0)];
    for _ in 0..n {
        cur = cur.iter().flat_map(|&(m, l)| atoms.iter().map(move |&(v, a)| (m * a, l + v))).collect();
    }
    cur.iter().map(|&(m, l)| (m, m * (-l).exp())).unzip()
}

#[test]
fn criterion_4_oracle_equivalence() {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(7004);
    let mut exact: f64 = 0.0;
    for _ in 0..METRIC_PAIRS {
        let (p, q) = random_pair(&mut rng);
        exact = exact.max((total_variation(&p, &q).unwrap() - brute_e_gamma(p.probs(), q.probs(), 1.0).unwrap()).abs());
        let gamma = (rng.random::<f64>() * 6.0 - 3.0).exp();
        exact = exact.max((e_gamma(&p, &q, gamma).unwrap() - brute_e_gamma(p.probs(), q.probs(), gamma).unwrap()).abs());
        let alpha = rng.random::<f64>();
        exact = exact.max((beta_alpha(&p, &q, alpha).unwrap() - brute_beta(&p, &q, alpha).unwrap()).abs());
    }

    let mut lattice: f64 = 0.0;
    for case in 0..6 {
        let (nx, n) = if case % 2 == 0 { (2, 8) } else { (3, 6) };
        let w = random_kernel(&mut rng, nx, nx);
        let rows = w
            .rows()
            .iter()
            .map(|r| FiniteDist::normalized(r.iter().map(|v| v + 0.02).collect()).unwrap().probs().to_vec())
            .collect();
        let w = Kernel::new(rows).unwrap();
        let px = FiniteDist::normalized((0..nx).map(|_| rng.random::<f64>() + 0.1).collect()).unwrap();
        let qz = FiniteDist::normalized((0..nx).map(|_| rng.random::<f64>() + 0.1).collect()).unwrap();
        let atoms = dmc_llr_atoms(&px, &w, &qz).unwrap();
        let (p, q) = product_space(&atoms, n);
        let spec = LogSpectrum::from_atoms(&atoms, SPECTRUM_STEP).unwrap().self_convolve(n as u64, 1 << 22).unwrap();
        let mean = n as f64 * atoms.iter().map(|a| a.0 * a.1).sum::<f64>();
        for k in 0..5 {
            let gamma = (mean + (k as f64 - 2.0) * 0.7).exp();
            lattice = lattice.max((e_gamma_spectrum(&spec, gamma).unwrap() - e_gamma_raw(&p, &q, gamma).unwrap()).abs());
            let alpha = 0.1 + 0.2 * k as f64;
            lattice = lattice.max((beta_alpha_spectrum(&spec, alpha).unwrap() - beta_alpha_raw(&p, &q, alpha).unwrap()).abs());
        }
    }
    let elapsed = t0.elapsed();
    let ok = exact <= METRIC_TOL && lattice <= SPECTRUM_TOL && elapsed < Duration::from_secs(120);
    report(
        4,
        ok,
        &format!("exact metrics worst {exact:.2e} on {METRIC_PAIRS} pairs, spectrum worst {lattice:.2e}; {:.1}s", elapsed.as_secs_f64()),
    );
    assert!(ok);
}

#[test]
fn criterion_5_certification() {
    let t0 = Instant::now();
    let rep = certify(CERT_INSTANCES, 1, Exec::default()).unwrap();
    let elapsed = t0.elapsed();
    let ok = rep.passed() && rep.families.iter().all(|f| f.checks > 0) && elapsed < Duration::from_secs(300);
    let per: Vec<String> =
        rep.families.iter().map(|f| format!("{} {}/{} (min slack {:.3e})", f.family.as_str(), f.violations, f.checks, f.min_slack)).collect();
    report(5, ok, &format!("{} instances, violations/checks: {}; {:.1}s", rep.instances, per.join(", "), elapsed.as_secs_f64()));
    assert!(ok);
}

/// Sample quantiles at (j − ½)/20 checked against a model CDF; returns the
/// number of points outside 3σ and the worst deviation in σ units.
fn quantile_check(mut xs: Vec<f64>, cdf: impl Fn(f64) -> f64) -> (usize, f64) {
    xs.sort_by(f64::total_cmp);
    let m = xs.len() as f64;
    let (mut misses, mut worst) = (0, 0.0f64);
    for j in 1..=QUANTILES {
        let x = xs[((j as f64 - 0.5) / QUANTILES as f64 * m) as usize];
        let emp = xs.partition_point(|&v| v <= x) as f64 / m;
        let f = cdf(x);
        let z = (emp - f).abs() / (f * (1.0 - f) / m).sqrt();
        worst = worst.max(z);
        misses += usize::from(z > SIGMAS);
    }
    (misses, worst)
}

/// ∫_{L ≥ t} e^{−L} dP_signal by Simpson in u = √W.
fn signal_tilted_tail(d: &NoncentralChi2, t: f64) -> f64 {
    let w_max = (t - d.shift) / d.scale;
    if w_max <= 0.0 {
        return 0.0;
    }
    let panels = 40_000;
    let h = w_max.sqrt() / panels as f64;
    let w_law = NoncentralChi2::standard(d.dof, d.noncentrality).unwrap();
    let f = |u: f64| {
        let u = u.max(1e-12 * h);
        (w_law.ln_pdf(u * u) - (d.shift + d.scale * u * u) + (2.0 * u).ln()).exp()
    };
    let mut acc = f(0.0) + f(w_max.sqrt());
    for i in 1..panels {
        acc += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    acc * h / 3.0
}

#[test]
fn criterion_6_gaussian_llr_laws() {
    let mut rng = ChaCha8Rng::seed_from_u64(7006);
    let mut notes = Vec::new();
    let mut ok = true;

    let (mut misses, mut worst) = (0, 0.0f64);
    for _ in 0..LLR_PARAM_SETS {
        let dof = rng.random_range(1..=40u64);
        let lam = rng.random::<f64>() * 30.0;
        let scale = (rng.random::<f64>() * 2.0 - 1.0).exp() * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        let shift = rng.random::<f64>() * 10.0 - 5.0;
        let d = NoncentralChi2::new(dof, lam, scale, shift).unwrap();
        let xs: Vec<f64> = (0..LLR_MC_SAMPLES)
            .map(|_| {
                let mut w = (z(&mut rng) + lam.sqrt()).powi(2);
                for _ in 1..dof {
                    w += z(&mut rng).powi(2);
                }
                shift + scale * w
            })
            .collect();
        let (m, w) = quantile_check(xs, |x| nc_chi2_cdf(x, &d));
        misses += m;
        worst = worst.max(w);
    }
    ok &= misses == 0;
    notes.push(format!("nc_chi2_cdf {misses} misses, worst {worst:.2}σ"));

    let (mut misses, mut worst) = (0, 0.0f64);
    for _ in 0..LLR_PARAM_SETS {
        let p = (rng.random::<f64>() * 4.0 - 2.0).exp();
        let n1 = (rng.random::<f64>() * 2.0 - 1.0).exp();
        let n2 = n1 * (1.0 + (rng.random::<f64>() * 4.0 - 2.0).exp());
        let n = rng.random_range(1..=20u64);
        let g = GaussianWiretap::new(p, n1, n2).unwrap();
        let q = gauss_conv_llr(&g, n).unwrap();
        let xs: Vec<f64> = (0..LLR_MC_SAMPLES).map(|_| (0..n).map(|_| conv_letter(&mut rng, &g)).sum()).collect();
        let (m, w) = quantile_check(xs, |x| quadform_cdf(&q, x).unwrap());
        misses += m;
        worst = worst.max(w);
    }
    ok &= misses == 0;
    notes.push(format!("quadform_cdf {misses} misses, worst {worst:.2}σ"));

    let g = GaussianWiretap::from_snr_db(3.0, -3.0).unwrap();
    let mut rel: f64 = 0.0;
    for n in [1u64, 100, 1000] {
        let sig = gauss_eve_llr(&g, n, Measure::Signal).unwrap();
        let noise = gauss_eve_llr(&g, n, Measure::Noise).unwrap();
        for j in 1..=QUANTILES {
            let t = sig.quantile(j as f64 / (QUANTILES + 1) as f64).unwrap();
            let lhs = noise.sf(t);
            rel = rel.max((lhs - signal_tilted_tail(&sig, t)).abs() / lhs);
        }
    }
    ok &= rel <= COM_TOL;
    notes.push(format!("change of measure worst relative gap {rel:.2e}"));

    report(6, ok, &format!("{} sets × {QUANTILES} quantiles at {LLR_MC_SAMPLES} samples: {}", LLR_PARAM_SETS, notes.join(", ")));
    assert!(ok);
}

#[test]
fn criterion_7_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("fig1.toml");
    let run = |out: &Path| {
        let status = std::process::Command::new(env!("CARGO_BIN_EXE_wtc"))
            .args(["curve", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()])
            .status()
            .unwrap();
        assert!(status.success());
        std::fs::read(out).unwrap()
    };
    let a = run(&dir.path().join("a.csv"));
    let b = run(&dir.path().join("b.csv"));
    let ok = a == b && !a.is_empty();
    report(7, ok, &format!("two fig1 curve runs, {} vs {} bytes, identical: {}", a.len(), b.len(), a == b));
    assert!(ok);
}
