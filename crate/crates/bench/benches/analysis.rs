use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use geomsum::bounds::{self, BoundsOptions};
use geomsum::dist::geometric_compound;
use geomsum::greedy::greedy_dual_row;
use geomsum::hitting::hitting_time_dist;
use geomsum::sim::{sample_hitting_time, sample_many, SimConfig};
use geomsum::sst::fastest_sst_restricted;
use geomsum::{fixtures, MarkovChain};

fn chains() -> Vec<(usize, MarkovChain)> {
    [4, 16, 50]
        .into_iter()
        .map(|n| (n, fixtures::birth_death(n, 0.3, 0.3).unwrap()))
        .collect()
}

fn laws(c: &mut Criterion) {
    let mut g = c.benchmark_group("laws");
    for (n, chain) in chains() {
        let j = n / 2;
        g.bench_with_input(BenchmarkId::new("stationary", n), &chain, |b, ch| {
            b.iter(|| MarkovChain::from_rows(ch.rows()).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("hitting_time", n), &chain, |b, ch| {
            b.iter(|| hitting_time_dist(ch, j, 1e-10).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("fastest_sst", n), &chain, |b, ch| {
            b.iter(|| fastest_sst_restricted(ch, j, 1e-10).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("greedy_dual", n), &chain, |b, ch| {
            b.iter(|| greedy_dual_row(ch, j).unwrap())
        });
        let sst = fastest_sst_restricted(&chain, j, 1e-10).unwrap();
        g.bench_with_input(BenchmarkId::new("compound", n), &sst, |b, t| {
            b.iter(|| geometric_compound(chain.pi(j), &t.dist, 1e-10).unwrap())
        });
    }
    g.finish();
}

fn reports(c: &mut Criterion) {
    let opts = BoundsOptions::default();
    let mut g = c.benchmark_group("reports");
    g.sample_size(20);
    for (n, chain) in chains() {
        g.bench_with_input(BenchmarkId::new("fastest_report", n), &chain, |b, ch| {
            b.iter(|| bounds::fastest_report(ch, n / 2, &opts).unwrap())
        });
    }
    g.finish();
}

fn simulation(c: &mut Criterion) {
    let chain = fixtures::two_state(0.25).unwrap();
    let pi = chain.stationary().clone();
    let cfg = SimConfig::new(1, 8, 100_000).unwrap();
    let mut g = c.benchmark_group("simulation");
    g.sample_size(10);
    g.bench_function("hitting_time_100k", |b| {
        b.iter(|| sample_many(&cfg, |rng| sample_hitting_time(&chain, 1, &pi, rng)).unwrap())
    });
    g.finish();
}

criterion_group!(benches, laws, reports, simulation);
criterion_main!(benches);
