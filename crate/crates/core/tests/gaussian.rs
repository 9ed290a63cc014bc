//! Gaussian LLR laws against direct simulation of the channel and against
//! one-dimensional quadrature.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use wtc_core::channels::{gauss_conv_llr, gauss_eve_llr, quadform_cdf, GaussianWiretap, Measure, QuadFormLLR, QuadTerm};
use wtc_core::probkit::{nc_chi2_cdf, NoncentralChi2};

fn z(rng: &mut ChaCha8Rng) -> f64 {
    <StandardNormal as Distribution<f64>>::sample(&StandardNormal, rng)
}

/// shift + scale·Σ(Zᵢ + μᵢ)² with the whole noncentrality on the first coordinate.
fn sample_ncchi2(rng: &mut ChaCha8Rng, d: &NoncentralChi2) -> f64 {
    let mut w = (z(rng) + d.noncentrality.sqrt()).powi(2);
    for _ in 1..d.dof {
        w += z(rng).powi(2);
    }
    d.shift + d.scale * w
}

/// One draw of the converse information density of n letters, simulated
/// straight from the channel noises.
fn sample_conv_density(rng: &mut ChaCha8Rng, g: &GaussianWiretap, n: u64) -> f64 {
    let (p, n1, n2) = (g.p, g.n1, g.n2);
    let mut acc = n as f64 * g.secrecy_capacity();
    for _ in 0..n {
        let u = n1.sqrt() * z(rng);
        let ub = (n2 - n1).sqrt() * z(rng);
        acc += 0.5 * ((u + ub).powi(2) / n2 - u * u / n1 + (p.sqrt() + u).powi(2) / (p + n1) - (p.sqrt() + u + ub).powi(2) / (p + n2));
    }
    acc
}

/// Checks a model CDF against an empirical sample at 20 sample quantiles.
fn check_quantiles(mut xs: Vec<f64>, cdf: impl Fn(f64) -> f64) -> Result<(), String> {
    xs.sort_by(f64::total_cmp);
    let m = xs.len() as f64;
    for j in 1..=20 {
        let x = xs[((j as f64 - 0.5) / 20.0 * m) as usize];
        let emp = xs.partition_point(|&v| v <= x) as f64 / m;
        let f = cdf(x);
        let sigma = (f * (1.0 - f) / m).sqrt();
        if (emp - f).abs() > 3.0 * sigma {
            return Err(format!("x={x}: model {f} vs empirical {emp} (σ {sigma:e})"));
        }
    }
    Ok(())
}

#[test]
fn square_of_a_standard_normal() {
    let d = NoncentralChi2::standard(1, 0.0).unwrap();
    assert!((nc_chi2_cdf(1.0, &d) - 0.682_689_492_137_085_9).abs() < 1e-10);
}

#[test]
fn ncchi2_matches_simulation() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let d = NoncentralChi2::standard(8, 3.2).unwrap();
    let m = 1_000_000;
    let hits = (0..m).filter(|_| sample_ncchi2(&mut rng, &d) <= 12.5).count() as f64 / m as f64;
    let f = d.cdf(12.5);
    assert!((hits - f).abs() <= 3.0 * (f * (1.0 - f) / m as f64).sqrt(), "{hits} vs {f}");

    for (dof, lam, scale, shift) in [(3, 0.0, 1.0, 0.0), (40, 12.0, -0.3, 5.0), (2, 50.0, 2.0, -1.0)] {
        let d = NoncentralChi2::new(dof, lam, scale, shift).unwrap();
        let xs: Vec<f64> = (0..200_000).map(|_| sample_ncchi2(&mut rng, &d)).collect();
        check_quantiles(xs, |x| d.cdf(x)).unwrap();
    }
}

#[test]
fn eve_llr_mean_matches_simulation() {
    let g = GaussianWiretap::from_snr_db(3.0, -3.0).unwrap();
    let (p, n2) = (g.p, g.n2);
    let n = 4u64;
    let law = gauss_eve_llr(&g, n, Measure::Signal).unwrap();
    // ln N(z; √P, N2) − ln N(z; 0, P+N2) at z = √P + Ũ
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let m = 1_000_000;
    let (mut s, mut s2) = (0.0, 0.0);
    for _ in 0..m {
        let mut l = 0.0;
        for _ in 0..n {
            let u = n2.sqrt() * z(&mut rng);
            let zz = p.sqrt() + u;
            l += 0.5 * ((p + n2) / n2).ln() - u * u / (2.0 * n2) + zz * zz / (2.0 * (p + n2));
        }
        s += l;
        s2 += l * l;
    }
    let mean = s / m as f64;
    let se = ((s2 / m as f64 - mean * mean) / m as f64).sqrt();
    assert!((law.mean() - mean).abs() <= 3.0 * se, "{} vs {mean} ± {se}", law.mean());
    // per-letter divergence D(N(√P,N2) ‖ N(0,P+N2)) in closed form
    let d = 0.5 * ((p + n2) / n2).ln() + (n2 + p) / (2.0 * (p + n2)) - 0.5;
    assert!((law.mean() - n as f64 * d).abs() < 1e-12);
}

#[test]
fn eve_llr_vanishes_without_power() {
    let g = GaussianWiretap::new(1e-12, 1.0, 2.0).unwrap();
    let law = gauss_eve_llr(&g, 10, Measure::Signal).unwrap();
    assert!(law.mean().abs() < 1e-9 && law.variance() < 1e-9);
}

/// ∫_{L ≥ t} e^{−L} dP_signal by composite Simpson in u = √W (removes the
/// density singularity at the origin), evaluated in the log domain.
fn signal_tilted_tail(d: &NoncentralChi2, t: f64) -> f64 {
    assert!(d.scale < 0.0);
    let w_max = (t - d.shift) / d.scale;
    if w_max <= 0.0 {
        return 0.0;
    }
    let panels = 40_000;
    let h = w_max.sqrt() / panels as f64;
    let w_law = NoncentralChi2::standard(d.dof, d.noncentrality).unwrap();
    let f = |u: f64| {
        // one degree of freedom leaves a finite nonzero limit at u = 0
        let u = u.max(1e-12 * h);
        let l = d.shift + d.scale * u * u;
        // density of W at u², times dW/du = 2u
        (w_law.ln_pdf(u * u) - l + (2.0 * u).ln()).exp()
    };
    let mut acc = f(0.0) + f(w_max.sqrt());
    for i in 1..panels {
        acc += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    acc * h / 3.0
}

#[test]
fn change_of_measure_between_signal_and_noise_laws() {
    let g = GaussianWiretap::from_snr_db(3.0, -3.0).unwrap();
    for n in [1u64, 2, 10, 100, 500] {
        let sig = gauss_eve_llr(&g, n, Measure::Signal).unwrap();
        let noise = gauss_eve_llr(&g, n, Measure::Noise).unwrap();
        for j in 1..=20 {
            let t = sig.quantile(j as f64 / 21.0).unwrap();
            let lhs = noise.sf(t);
            let rhs = signal_tilted_tail(&sig, t);
            assert!((lhs - rhs).abs() <= 1e-6 * lhs, "n={n} t={t}: {lhs} vs {rhs}");
        }
    }
}

#[test]
fn conv_llr_moments_match_closed_forms() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..10 {
        let p = (rng.random::<f64>() * 6.0 - 3.0).exp();
        let n1 = (rng.random::<f64>() * 4.0 - 2.0).exp();
        let n2 = n1 * (1.0 + (rng.random::<f64>() * 6.0 - 4.0).exp());
        let g = GaussianWiretap::new(p, n1, n2).unwrap();
        let n = rng.random_range(1..2000u64);
        let q = gauss_conv_llr(&g, n).unwrap();
        let nf = n as f64;
        assert!((q.mean() / nf - g.secrecy_capacity()).abs() <= 1e-9 * (1.0 + g.secrecy_capacity()));
        assert!((q.variance() / nf - g.vc()).abs() <= 1e-9 * (1.0 + g.vc()));
    }
    // channels coinciding: no secrecy and no spread
    let g = GaussianWiretap::new(1.0, 1.0, 1.0 + 1e-9).unwrap();
    assert!(g.secrecy_capacity() < 1e-9 && g.vc() < 1e-8);
}

#[test]
fn conv_llr_cdf_matches_simulation() {
    let g = GaussianWiretap::from_snr_db(3.0, -3.0).unwrap();
    let n = 50;
    let q = gauss_conv_llr(&g, n).unwrap();
    let x = n as f64 * g.secrecy_capacity() - 2.0 * (n as f64 * g.vc()).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let m = 200_000;
    let xs: Vec<f64> = (0..m).map(|_| sample_conv_density(&mut rng, &g, n)).collect();
    let emp = xs.iter().filter(|&&v| v <= x).count() as f64 / m as f64;
    let f = quadform_cdf(&q, x).unwrap();
    assert!((emp - f).abs() <= 3.0 * (f * (1.0 - f) / m as f64).sqrt(), "{emp} vs {f}");
    check_quantiles(xs, |x| quadform_cdf(&q, x).unwrap()).unwrap();
}

#[test]
fn quadform_reductions_and_centre() {
    let single = QuadFormLLR { constant: 1.5, terms: vec![QuadTerm { eigenvalue: -0.7, dof: 5, noncentrality: 2.0 }] };
    let d = NoncentralChi2::new(5, 2.0, -0.7, 1.5).unwrap();
    for x in [-6.0, -3.0, 0.0, 1.0] {
        assert_eq!(quadform_cdf(&single, x).unwrap(), d.cdf(x));
    }
    let g = GaussianWiretap::from_snr_db(3.0, -3.0).unwrap();
    for n in [30u64, 100, 1000] {
        let q = gauss_conv_llr(&g, n).unwrap();
        let c = quadform_cdf(&q, q.mean()).unwrap();
        assert!((0.3..=0.7).contains(&c), "n={n}: {c}");
    }
}
