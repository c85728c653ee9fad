use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use isosceles::brake;
use isosceles::convexity;
use isosceles::euler;
use isosceles::limitsys;
use isosceles::paramspace::ReducedParams;
use isosceles::section::{Section, SectionPoint};

fn kernels(c: &mut Criterion) {
    let p = ReducedParams::new(0.6, 0.6).unwrap();
    c.bench_function("euler_rotation_number", |b| b.iter(|| euler::rotation_number_euler(black_box(p)).unwrap()));
    c.bench_function("euler_classify", |b| b.iter(|| euler::stability_classify(black_box(p)).unwrap()));
    c.bench_function("t_infinity", |b| b.iter(|| limitsys::t_infinity(black_box(0.7), 4.0).unwrap()));
    c.bench_function("eps_conv_root", |b| b.iter(|| convexity::eps_conv_root(black_box(0.4)).unwrap()));

    let sec = Section::new(p).unwrap();
    let q = SectionPoint::new(0.0, 0.5 * (p.r_min() + p.r_max()));
    c.bench_function("return_map_step", |b| b.iter(|| sec.gcheck(black_box(&q)).unwrap()));

    let mut slow = c.benchmark_group("slow");
    slow.sample_size(10);
    slow.bench_function("shoot_z_symmetric", |b| b.iter(|| brake::shoot_z_symmetric(black_box(p)).unwrap()));
    slow.finish();
}

criterion_group!(benches, kernels);
criterion_main!(benches);
