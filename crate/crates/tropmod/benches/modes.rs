//! Sequential vs parallel throughput on the two batch workloads that
//! dominate `tropmod verify`: the Hasse-polynomial sweep and brute-force
//! orbit tables.  On a multi-core host the parallel mode should win
//! roughly linearly; on one core the two coincide.

use criterion::{criterion_group, criterion_main, Criterion};
use tropmod::cosets::{borel_double_cosets_bruteforce, CurveFamily};
use tropmod::exec::{map_cells, ExecMode};
use tropmod::rings::is_prime;
use tropmod::skeleton::{supersingular_count, supersingular_count_oracle};

fn oracle_sweep(c: &mut Criterion) {
    let mut group = c.benchmark_group("hasse-oracle-sweep");
    group.sample_size(10);
    for (label, mode) in [("sequential", ExecMode::Sequential), ("parallel", ExecMode::Parallel)] {
        group.bench_function(label, |b| {
            b.iter(|| {
                let primes: Vec<u64> = (5..120).filter(|&p| is_prime(p)).collect();
                let counts = map_cells(mode, primes.clone(), |p| {
                    supersingular_count_oracle(p, 50_000).unwrap()
                });
                let closed: Vec<u64> =
                    primes.iter().map(|&p| supersingular_count(p).unwrap()).collect();
                assert_eq!(counts, closed);
            })
        });
    }
    group.finish();
}

fn orbit_tables(c: &mut Criterion) {
    let mut group = c.benchmark_group("brute-force-tables");
    group.sample_size(10);
    let cells: Vec<(CurveFamily, u64, u32)> = CurveFamily::ALL
        .into_iter()
        .flat_map(|f| [(f, 7u64, 2u32), (f, 11, 2)])
        .collect();
    for (label, mode) in [("sequential", ExecMode::Sequential), ("parallel", ExecMode::Parallel)] {
        group.bench_function(label, |b| {
            b.iter(|| {
                let tables = map_cells(mode, cells.clone(), |(f, p, n)| {
                    borel_double_cosets_bruteforce(f, p, n, 1 << 22).unwrap()
                });
                assert_eq!(tables.len(), cells.len());
            })
        });
    }
    group.finish();
}

criterion_group!(benches, oracle_sweep, orbit_tables);
criterion_main!(benches);
