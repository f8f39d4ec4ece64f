use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use mulsets::ek;
use mulsets::par::Exec;
use mulsets::races;
use mulsets::setspec::builtin;
use mulsets::sieve::{self, DEFAULT_SEGMENT};
use mulsets::tau;

const POLICIES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn prime_sieve(c: &mut Criterion) {
    let mut g = c.benchmark_group("prime_sieve");
    g.sample_size(10);
    for n in [1_000_000u64, 20_000_000] {
        for (name, exec) in POLICIES {
            g.bench_with_input(BenchmarkId::new(name, n), &n, |b, &n| {
                b.iter(|| sieve::primes_up_to_with(n, exec, DEFAULT_SEGMENT).unwrap())
            });
        }
    }
    g.finish();
}

fn char_table(c: &mut Criterion) {
    let mut g = c.benchmark_group("char_table");
    g.sample_size(10);
    let n = 10_000_000;
    for set in ["sum2sq", "quadsem:-23", "phi-nondiv:5"] {
        let d = builtin(set, None).unwrap();
        for (name, exec) in POLICIES {
            g.bench_function(BenchmarkId::new(name, set), |b| {
                b.iter(|| sieve::build_char_table_with(&d, n, exec, DEFAULT_SEGMENT).unwrap())
            });
        }
    }
    g.finish();
}

fn tau_tables(c: &mut Criterion) {
    let mut g = c.benchmark_group("tau_mod_many");
    g.sample_size(10);
    let n = 1_000_000;
    for (name, exec) in POLICIES {
        g.bench_function(name, |b| b.iter(|| tau::tau_mod_many(&tau::CLASSICAL_MODULI, n, exec).unwrap()));
    }
    g.finish();
}

fn partial_sum(c: &mut Criterion) {
    let mut g = c.benchmark_group("ek_partial_sum");
    g.sample_size(10);
    let x = 10_000_000;
    let primes = sieve::primes_up_to(x).unwrap();
    for set in ["quadsem:-4", "progsem:3:1"] {
        let d = builtin(set, None).unwrap();
        for (name, exec) in POLICIES {
            g.bench_function(BenchmarkId::new(name, set), |b| {
                b.iter(|| ek::ek_partial_sum_with(&d, x, &primes, exec).unwrap())
            });
        }
    }
    g.finish();
}

fn race(c: &mut Criterion) {
    let mut g = c.benchmark_group("race");
    g.sample_size(10);
    let (a, b) = (builtin("sum2sq", None).unwrap(), builtin("hex", None).unwrap());
    for (name, exec) in POLICIES {
        g.bench_function(name, |bch| bch.iter(|| races::race_with(&a, &b, 5_000_000, exec).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, prime_sieve, char_table, tau_tables, partial_sum, race);
criterion_main!(benches);
