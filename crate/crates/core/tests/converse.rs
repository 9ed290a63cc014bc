//! Converse bounds: orderings, the type-mixture penalty, the Gaussian β
//! computation against a CDF-based oracle, and soundness on explicit codes.

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wtc_core::achievability::thm1_rate;
use wtc_core::bound::{DmcScenario, Scenario, SearchOptions};
use wtc_core::channels::{gauss_conv_llr, quadform_cdf, DMWiretap, GaussianWiretap, QuadFormTable};
use wtc_core::converse::{converse_rates, dmc_converse, nearest_type, thm2_smallscale, CodebookChannel, SecrecyCode};
use wtc_core::metrics::FiniteDist;
use wtc_core::smallscale::{random_dist, random_kernel};

fn gauss() -> Scenario {
    Scenario::Gaussian(GaussianWiretap::from_snr_db(3.0, -3.0).unwrap())
}

fn bsc_pair() -> DmcScenario {
    DmcScenario { channel: DMWiretap::bsc_pair(0.05, 0.2).unwrap(), input: FiniteDist::uniform(2), q_z: None }
}

#[test]
fn converse_below_comparison_and_above_achievability() {
    let opts = SearchOptions::default();
    for s in [gauss(), Scenario::Dmc(bsc_pair())] {
        for n in [100u64, 700, 1500] {
            let [t3, hay] = converse_rates(n, 1e-3, 1e-3, &s, &opts).unwrap();
            let t1 = thm1_rate(n, 1e-3, 1e-3, &s, &opts).unwrap();
            assert!(t3.rate_bits <= hay.rate_bits, "n={n}: {t3:?} vs {hay:?}");
            assert!(t1.rate_bits <= t3.rate_bits, "n={n}: {t1:?} vs {t3:?}");
        }
    }
}

#[test]
fn type_penalty_only_loosens() {
    let opts = SearchOptions::default();
    let d = bsc_pair();
    for n in [50u64, 400] {
        let with = dmc_converse(n, 1e-2, 1e-2, &d, &opts, true).unwrap();
        let without = dmc_converse(n, 1e-2, 1e-2, &d, &opts, false).unwrap();
        for (a, b) in with.iter().zip(&without) {
            assert!(b.rate_bits <= a.rate_bits);
            // |X|·ln(n+1) nats exactly, unless a rate hits zero
            let shift = 2.0 * ((n + 1) as f64).log2() / n as f64;
            if b.rate_bits > 0.0 {
                assert!((a.rate_bits - b.rate_bits - shift).abs() < 1e-9, "{a:?} {b:?}");
            }
        }
    }
}

#[test]
fn nearest_type_rounding() {
    let p = FiniteDist::new(vec![0.5, 0.3, 0.2]).unwrap();
    assert_eq!(nearest_type(&p, 10), vec![5, 3, 2]);
    assert_eq!(nearest_type(&p, 7).iter().sum::<u64>(), 7);
    assert_eq!(nearest_type(&FiniteDist::uniform(3), 1).iter().sum::<u64>(), 1);
}

#[test]
fn gaussian_beta_matches_cdf_integration() {
    let g = GaussianWiretap::from_snr_db(3.0, -3.0).unwrap();
    let q = gauss_conv_llr(&g, 100).unwrap();
    let table = QuadFormTable::new(&q).unwrap();
    for alpha in [0.05, 0.3, 0.7, 0.99] {
        let (ln_beta, t) = table.ln_beta(alpha).unwrap();
        assert!((1.0 - quadform_cdf(&q, t).unwrap() - alpha).abs() < 1e-8);
        // β = ∫_{l ≥ t} e^{−l} dF(l), with F linear inside each cell; mass
        // beyond t + 30 is weighted by less than e^{−30}
        let h = 0.05;
        let mut acc = 0.0;
        let mut prev = quadform_cdf(&q, t).unwrap();
        for i in 0..600 {
            let a = i as f64 * h;
            let next = quadform_cdf(&q, t + a + h).unwrap();
            acc += (next - prev) * ((-a).exp() - (-(a + h)).exp()) / h;
            prev = next;
        }
        let oracle = acc.ln() - t;
        assert!((ln_beta - oracle).abs() < 1e-4, "α={alpha}: {ln_beta} vs {oracle}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    /// Any stochastic encoder satisfies M ≤ β_{δ+τ}/(τ·β_{1−ε}) at its own
    /// (ε, δ), whatever Q_Y.
    #[test]
    fn general_converse_is_sound(seed in any::<u64>(), frac in 0.01f64..0.99) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (nx, ny, nz) = (rng.random_range(2..=4), rng.random_range(2..=4), rng.random_range(2..=4));
        let ch = CodebookChannel::new(random_kernel(&mut rng, nx, ny), random_kernel(&mut rng, nx, nz)).unwrap();
        let m = rng.random_range(1..=4);
        let code = SecrecyCode { encoder: (0..m).map(|_| random_dist(&mut rng, nx)).collect() };
        let q_y = random_dist(&mut rng, ny);
        let delta = code.leakage(&ch);
        prop_assume!(delta < 1.0 - 1e-9);
        let tau = frac * (1.0 - delta);
        let b = thm2_smallscale(&code, &ch, &q_y, tau).unwrap();
        prop_assert!(m as f64 <= b * (1.0 + 1e-9), "M={m} bound {b}");
    }
}
