use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;
use stit_core::datasets::DensityModel;
use stit_core::measure::three_direction_example;
use stit_core::special::exp_integral_e1;
use stit_core::{DensityForest, DirectionalDistribution, KernelSpec, LifetimeDistribution, Polytope, RandomFeatureSet, TessellationTree};

fn sampling(c: &mut Criterion) {
    let window = Polytope::unit_cube(2);
    let measures = [
        ("mondrian", DirectionalDistribution::mondrian(2).unwrap()),
        ("isotropic", DirectionalDistribution::isotropic(2).unwrap()),
        ("three-direction", three_direction_example()),
    ];
    let mut g = c.benchmark_group("sample_tree");
    for (name, m) in &measures {
        for lifetime in [4.0, 16.0] {
            g.bench_with_input(BenchmarkId::new(*name, lifetime), &lifetime, |b, &l| {
                let mut seed = 0;
                b.iter(|| {
                    seed += 1;
                    TessellationTree::sample(m, l, &window, seed).unwrap()
                })
            });
        }
    }
    g.finish();
    let m3 = DirectionalDistribution::isotropic(3).unwrap();
    let cube = Polytope::unit_cube(3);
    c.bench_function("sample_tree/isotropic-3d/4", |b| b.iter(|| TessellationTree::sample(&m3, 4.0, &cube, 7).unwrap()));
}

fn features(c: &mut Criterion) {
    let spec = KernelSpec::new(DirectionalDistribution::mondrian(2).unwrap(), LifetimeDistribution::Fixed(1.0)).unwrap();
    let window = Polytope::unit_cube(2);
    c.bench_function("feature_set/mondrian/1000", |b| b.iter(|| RandomFeatureSet::build(&spec, 1000, &window, 3).unwrap()));
    let set = RandomFeatureSet::build(&spec, 1000, &window, 3).unwrap();
    c.bench_function("feature_set/lookup", |b| b.iter(|| set.features(black_box(&[0.3, 0.7])).unwrap()));
}

fn forests(c: &mut Criterion) {
    let window = Polytope::cuboid(&[-6.0], &[6.0]).unwrap();
    let data = DensityModel::Gaussian.sample(1000, &window, 1).unwrap();
    let m = DirectionalDistribution::mondrian(1).unwrap();
    c.bench_function("density_forest/fit/50x1000", |b| b.iter(|| DensityForest::fit(&m, 10.0, 50, &window, &data, 2).unwrap()));
    let f = DensityForest::fit(&m, 10.0, 50, &window, &data, 2).unwrap();
    c.bench_function("density_forest/evaluate", |b| b.iter(|| f.forest_density(black_box(&[0.4])).unwrap()));
}

fn special(c: &mut Criterion) {
    c.bench_function("e1", |b| b.iter(|| exp_integral_e1(black_box(2.5)).unwrap()));
}

criterion_group!(benches, sampling, features, forests, special);
criterion_main!(benches);
