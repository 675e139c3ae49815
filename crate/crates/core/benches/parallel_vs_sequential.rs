use bblab_core::convex::SolveConfig;
use bblab_core::interp::dyadic_splits;
use bblab_core::pipeline::per_xi_lift;
use bblab_core::strip::LineFunction;
use bblab_core::symbols::{check_bb_symbol_with, Builtin};
use bblab_core::{Couple, Exec, Shape, SpaceNorm, TorusField, VectorField};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const POLICIES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn config(exec: Exec) -> SolveConfig {
    SolveConfig {
        oversample: 2,
        exec,
        ..Default::default()
    }
}

fn splits(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let f = TorusField::random(Shape::new(2, 4), true, &mut rng);
    let couple = Couple::linf_sobolev(2);
    let mut g = c.benchmark_group("dyadic_splits");
    g.sample_size(10);
    for (name, exec) in POLICIES {
        g.bench_function(BenchmarkId::new(name, 4), |b| {
            b.iter(|| dyadic_splits(&f, &couple, 4, &config(exec)).unwrap())
        });
    }
    g.finish();
}

fn lift(c: &mut Criterion) {
    let shape = Shape::new(2, 4);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let v = VectorField::random(shape, true, &mut rng);
    let g = LineFunction::from_fn(2.0, 0.125, shape, 2, SpaceNorm::Lp(2.0), |t| {
        v.scale(num_complex::Complex64::new((-t * t).exp(), 0.0)).into_components()
    })
    .unwrap();
    let mut grp = c.benchmark_group("per_xi_lift");
    grp.sample_size(10);
    for (name, exec) in POLICIES {
        grp.bench_function(BenchmarkId::new(name, g.count()), |b| {
            b.iter(|| per_xi_lift(&g, &SpaceNorm::Hs(1.0), &config(exec), 0.0).unwrap())
        });
    }
    grp.finish();
}

fn symbols(c: &mut Criterion) {
    let m = Builtin::N1OverCube.grid(128).unwrap();
    let mut g = c.benchmark_group("check_bb_symbol");
    g.sample_size(10);
    for (name, exec) in POLICIES {
        g.bench_function(BenchmarkId::new(name, 128), |b| b.iter(|| check_bb_symbol_with(&m, exec).unwrap()));
    }
    g.finish();
}

criterion_group!(benches, splits, lift, symbols);
criterion_main!(benches);
