//! Sequential vs data-parallel execution of the two batch workloads: the
//! certification corpus and a short achievability curve.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;
use wtc_core::achievability::achievability_rates;
use wtc_core::bound::{Scenario, SearchOptions};
use wtc_core::channels::GaussianWiretap;
use wtc_core::smallscale::certify;
use wtc_core::Exec;

const POLICIES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn certification(c: &mut Criterion) {
    let mut g = c.benchmark_group("certify_32");
    g.sample_size(10);
    for (name, exec) in POLICIES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| b.iter(|| certify(black_box(32), 1, exec).unwrap()));
    }
    g.finish();
}

fn curve(c: &mut Criterion) {
    let scenario = Scenario::Gaussian(GaussianWiretap::from_snr_db(3.0, -3.0).unwrap());
    let grid = [500u64, 1000, 1500, 2000];
    let mut g = c.benchmark_group("gaussian_achievability_curve");
    g.sample_size(10);
    for (name, exec) in POLICIES {
        let opts = SearchOptions { mc_samples: 5_000, exec, ..SearchOptions::default() };
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| exec.map(&grid, |&n| achievability_rates(n, 1e-3, 1e-3, &scenario, &opts).unwrap()))
        });
    }
    g.finish();
}

criterion_group!(benches, certification, curve);
criterion_main!(benches);
