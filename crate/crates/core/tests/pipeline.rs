use stit_core::datasets::{DensityModel, SineRegression};
use stit_core::forest::{ideal_mondrian_density, l1_error, l2_error};
use stit_core::{
    DensityForest, Estimate, KernelSpec, LifetimeDistribution, MeasureSpec, Polytope, QuadratureGrid,
    RandomFeatureSet, RegressionForest,
};

#[test]
fn features_from_a_json_measure_are_unbiased() {
    let spec: MeasureSpec = serde_json::from_str(r#"{"kind":"directions","vectors":[[1,0],[0,1],[1,1]]}"#).unwrap();
    let kernel = KernelSpec::new(spec.build().unwrap(), LifetimeDistribution::Fixed(2.0)).unwrap();
    let w = Polytope::unit_cube(2);
    let (x, y) = ([0.2, 0.7], [0.45, 0.5]);
    let builds: Vec<f64> = (0..200)
        .map(|b| RandomFeatureSet::build(&kernel, 25, &w, b).unwrap().km(&x, &y).unwrap())
        .collect();
    let e = Estimate::from_samples(&builds);
    let target = kernel.evaluate(&x, &y);
    assert!((e.value - target).abs() < 3.5 * e.std_error, "{e:?} vs {target}");
}

#[test]
fn random_lifetime_frequencies_match_laplace_transforms() {
    let m = stit_core::DirectionalDistribution::mondrian(2).unwrap();
    let w = Polytope::unit_cube(2);
    let (x, y) = ([0.0, 0.0], [0.3, 0.4]);
    for law in [LifetimeDistribution::Gamma { shape: 2.0, rate: 3.0 }, LifetimeDistribution::UniformInterval { a: 1.0, b: 2.0 }] {
        let spec = KernelSpec::new(m.clone(), law).unwrap();
        let f = RandomFeatureSet::build(&spec, 5000, &w, 8).unwrap();
        let p = f.km(&x, &y).unwrap();
        let target = spec.evaluate(&x, &y);
        let se = (target * (1.0 - target) / 5000.0).sqrt();
        assert!((p - target).abs() < 3.5 * se, "{law:?}: {p} vs {target}");
    }
}

#[test]
fn density_error_shrinks_with_more_trees() {
    let w = Polytope::cuboid(&[-6.0], &[6.0]).unwrap();
    let data = DensityModel::Gaussian.sample(1000, &w, 3).unwrap();
    let m = stit_core::DirectionalDistribution::mondrian(1).unwrap();
    let lambda = 10.0;
    let grid = QuadratureGrid::midpoint(&[-6.0], &[6.0], 400).unwrap().interior(&[-6.0], &[6.0], 5.0 / lambda);
    let ideal: Vec<f64> = grid.points.iter().map(|p| ideal_mondrian_density(&data, lambda, p).unwrap()).collect();
    let err = |trees: usize| {
        let f = DensityForest::fit(&m, lambda, trees, &w, &data, 17).unwrap();
        let est = f.forest_densities(&grid.points).unwrap();
        l1_error(&grid, &est, &ideal).unwrap()
    };
    let (a, b) = (err(25), err(400));
    assert!(b < a, "{a} {b}");
}

#[test]
fn regression_recovers_a_sine() {
    let w = Polytope::unit_cube(1);
    let (xs, ys) = SineRegression { sigma: 0.1 }.sample(4000, &w, 5).unwrap();
    let m = stit_core::DirectionalDistribution::mondrian(1).unwrap();
    let r = RegressionForest::fit(&m, 16.0, 50, &w, &xs, &ys, 6).unwrap();
    let grid = QuadratureGrid::midpoint(&[0.0], &[1.0], 200).unwrap();
    let pred = r.predict_many(&grid.points).unwrap();
    let truth: Vec<f64> = grid.points.iter().map(|p| SineRegression::truth(p)).collect();
    assert!(l2_error(&grid, &pred, &truth).unwrap() < 0.15);
}
