use rayon::prelude::*;
use stit_core::measure::three_direction_example;
use stit_core::rng::derive;
use stit_core::{DirectionalDistribution, Estimate, Polytope, TessellationTree};

fn same_cell_rate(m: &DirectionalDistribution, lifetime: f64, w: &Polytope, x: &[f64], y: &[f64], trees: u64, seed: u64) -> Estimate {
    let hits = (0..trees)
        .into_par_iter()
        .filter(|&i| {
            let (px, _) = TessellationTree::cell_at(m, lifetime, w, x, derive(seed, i)).unwrap();
            let (py, _) = TessellationTree::cell_at(m, lifetime, w, y, derive(seed, i)).unwrap();
            px == py
        })
        .count();
    Estimate::proportion(hits, trees as usize)
}

fn gaussian_directions(k: usize, seed: u64) -> DirectionalDistribution {
    use rand::Rng;
    let mut s = stit_core::rng::stream(seed);
    let rows: Vec<Vec<f64>> = (0..k)
        .map(|_| {
            let v: [f64; 2] = [s.sample(rand_distr::StandardNormal), s.sample(rand_distr::StandardNormal)];
            let n = v[0].hypot(v[1]);
            vec![v[0] / n, v[1] / n]
        })
        .collect();
    DirectionalDistribution::from_directions(&rows).unwrap()
}

#[test]
fn capacity_functional_for_planar_measures() {
    let w = Polytope::centered_cube(2, 0.5).unwrap();
    let measures = [
        DirectionalDistribution::mondrian(2).unwrap(),
        DirectionalDistribution::isotropic(2).unwrap(),
        three_direction_example(),
        gaussian_directions(10, 4),
    ];
    let pairs = [([-0.2, 0.1], [0.25, -0.1], 1.5), ([0.0, 0.0], [0.1, 0.3], 3.0)];
    for (k, m) in measures.iter().enumerate() {
        for (j, (x, y, lifetime)) in pairs.iter().enumerate() {
            let e = same_cell_rate(m, *lifetime, &w, x, y, 4000, 10 * k as u64 + j as u64);
            let target = (-lifetime * m.lambda_segment(x, y)).exp();
            assert!((e.value - target).abs() < 3.5 * e.std_error.max(1e-3), "measure {k} pair {j}: {e:?} vs {target}");
        }
    }
}

#[test]
fn capacity_functional_in_three_dimensions() {
    let w = Polytope::centered_cube(3, 0.5).unwrap();
    let (x, y) = ([0.1, -0.1, 0.0], [-0.1, 0.2, 0.15]);
    for m in [DirectionalDistribution::mondrian(3).unwrap(), DirectionalDistribution::isotropic(3).unwrap()] {
        let e = same_cell_rate(&m, 2.0, &w, &x, &y, 1500, 77);
        let target = (-2.0 * m.lambda_segment(&x, &y)).exp();
        assert!((e.value - target).abs() < 3.5 * e.std_error, "{e:?} vs {target}");
    }
}

#[test]
fn lifetime_and_space_scale_together() {
    let m = three_direction_example();
    let (x, y) = ([0.05, 0.0], [0.0, 0.1]);
    let c = 3.0;
    let big = Polytope::centered_cube(2, 0.5 * c).unwrap();
    let small = Polytope::centered_cube(2, 0.5).unwrap();
    let a = same_cell_rate(&m, c, &small, &x, &y, 5000, 1);
    let b = same_cell_rate(&m, 1.0, &big, &[c * x[0], c * x[1]], &[c * y[0], c * y[1]], 5000, 2);
    let z = (a.value - b.value) / (a.std_error.powi(2) + b.std_error.powi(2)).sqrt();
    assert!(z.abs() < 3.5, "{a:?} {b:?}");
}
