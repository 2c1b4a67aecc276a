use biocirc::associated::{self, Hat};
use biocirc::determinants::{self, master_window};
use biocirc::oracle::Oracle;
use biocirc::weights::MomentTable;
use biocirc::{kernels, recurrences, Kind, Weight};
use biocirc_bench::{exp, points, random};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

fn determinants(c: &mut Criterion) {
    let table = MomentTable::new(&Weight::ExpLinear, -40, 40).unwrap();
    let mut g = c.benchmark_group("determinant");
    for n in [4usize, 8, 12] {
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| {
            b.iter(|| determinants::build(Kind::TwoJK, 2, black_box(n), &table).unwrap().det())
        });
    }
    g.finish();
    let [z, zeta] = points();
    let (lo, hi) = master_window(Kind::TwoJK, 1, 4);
    let table = random(1).moments(lo, hi).unwrap();
    c.bench_function("dodgson n=4", |b| {
        b.iter(|| determinants::dodgson_residual(Kind::TwoJK, 1, 4, z, zeta, (0, 6), (1, 5), &table).unwrap())
    });
}

fn systems(c: &mut Criterion) {
    let mut g = c.benchmark_group("system build");
    for n in [4usize, 8] {
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| {
            b.iter(|| random(2).system(Kind::JTwoK, 1, black_box(n)).unwrap().norm(n).unwrap())
        });
    }
    g.finish();
    let sys = exp();
    sys.system(Kind::TwoJK, 3, 8).unwrap();
    let [z, _] = points();
    c.bench_function("degree recurrence residual", |b| {
        b.iter(|| recurrences::degree_residual(&sys, recurrences::Family::P, black_box(4), 3, z).unwrap())
    });
}

fn kernels(c: &mut Criterion) {
    let sys = random(3);
    let [x, y] = points();
    let mut g = c.benchmark_group("kernel n=5");
    for m in [kernels::Method::Sum, kernels::Method::MasterDet, kernels::Method::Cd] {
        g.bench_function(m.to_string(), |b| b.iter(|| kernels::kernel(&sys, m, Kind::TwoJK, 5, 0, black_box(x), y).unwrap()));
    }
    g.finish();
    c.bench_function("P hat n=4", |b| b.iter(|| associated::hat(&sys, Hat::P, 4, 0, black_box(x)).unwrap()));
}

fn oracle(c: &mut Criterion) {
    let orc = Oracle::new(&Weight::ExpLinear).unwrap();
    let mut g = c.benchmark_group("oracle determinant");
    g.sample_size(10);
    for n in [1usize, 2, 3] {
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| b.iter(|| orc.det(Kind::TwoJK, black_box(n), 1).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, determinants, systems, kernels, oracle);
criterion_main!(benches);
