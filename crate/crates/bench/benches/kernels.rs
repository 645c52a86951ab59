use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use resoshift::cavity2d::{disk_modes, shift_matrix, Parity};
use resoshift::multipole::{two_disk_block_root_auto, BlockDeterminant, Truncation};
use resoshift::polarization::{pt_numeric, BoundaryCurve};
use resoshift::slab1d::{slab_perturbed_exact, slab_resonances, SlabCavity, SlabParticle};
use resoshift::specfun::{bessel_j_seq, hankel1_seq};
use resoshift::{ComplexBox, Medium, C64};
use resoshift_bench::{cavity_medium, geometry, mode_pair, particle, OMEGA0};

fn special_functions(c: &mut Criterion) {
    let mut g = c.benchmark_group("specfun");
    let z = C64::new(12.5, -3.0);
    for n in [10usize, 50, 150] {
        g.bench_with_input(BenchmarkId::new("bessel_j_seq", n), &n, |b, &n| b.iter(|| bessel_j_seq(n, black_box(z))));
        g.bench_with_input(BenchmarkId::new("hankel1_seq", n), &n, |b, &n| b.iter(|| hankel1_seq(n, black_box(z))));
    }
    g.finish();
}

fn mode_search(c: &mut Criterion) {
    let mut g = c.benchmark_group("modes");
    g.sample_size(20);
    let b2 = ComplexBox::new(3.5, 5.0, -2.0, -1.0);
    g.bench_function("disk_m1_box", |b| b.iter(|| disk_modes(1, cavity_medium(), 1.0, black_box(&b2))));
    let slab = SlabCavity::new(-1.0, 1.0, Medium::real(4.0, 1.0)).unwrap();
    let b1 = ComplexBox::new(0.1, 3.0, -1.0, -0.01);
    g.bench_function("slab_box", |b| b.iter(|| slab_resonances(&slab, black_box(&b1))));
    let w0 = slab_resonances(&slab, &b1).unwrap()[1].omega0;
    let p = SlabParticle { x0: 0.0, delta: 0.01, material: Medium::real(2.0, 1.0) };
    g.bench_function("slab_exact_root", |b| b.iter(|| slab_perturbed_exact(&slab, &p, black_box(w0))));
    g.finish();
}

fn asymptotics(c: &mut Criterion) {
    let modes = mode_pair();
    let scn = [particle(0.01)];
    c.bench_function("shift_matrix_disk_pair", |b| b.iter(|| shift_matrix(black_box(&modes), black_box(&scn))));
    let mut g = c.benchmark_group("pt_numeric");
    g.sample_size(20);
    for n in [64usize, 256] {
        let kite = BoundaryCurve::kite(n);
        g.bench_with_input(BenchmarkId::new("kite", n), &kite, |b, k| b.iter(|| pt_numeric(k, black_box(C64::new(5.0, 0.0)))));
    }
    g.finish();
}

fn oracle(c: &mut Criterion) {
    let mut g = c.benchmark_group("two_disk");
    g.sample_size(10);
    for delta in [1e-1, 1e-2] {
        let geom = geometry(delta);
        let trunc = Truncation::for_geometry(1, &geom);
        let det = BlockDeterminant::new(geom, trunc, Parity::Cos, OMEGA0).unwrap();
        g.bench_with_input(BenchmarkId::new("block_determinant", trunc.n1), &det, |b, d| b.iter(|| d.eval(black_box(OMEGA0))));
        g.bench_with_input(BenchmarkId::new("auto_root", delta), &geom, |b, geom| {
            b.iter(|| two_disk_block_root_auto(geom, Parity::Cos, black_box(OMEGA0), 1))
        });
    }
    g.finish();
}

criterion_group!(benches, special_functions, mode_search, asymptotics, oracle);
criterion_main!(benches);
