//! Forest density and regression estimators.
//!
//! Trees are grown with lifetime `lambda * d`, where `lambda` is the
//! bandwidth inverse, so that for the Mondrian measure the expected forest
//! density is the kernel density estimator with kernel
//! `K0(x) = exp(-|x|_1) prod_j h(|x_j|)` at bandwidth `1/lambda`.
//! Cell volumes are those of the cells clipped to the window.

use crate::engine::TessellationTree;
use crate::error::{Result, StitError};
use crate::geom::Polytope;
use crate::measure::DirectionalDistribution;
use crate::rng;
use crate::special::h_nonneg;
use rayon::prelude::*;
use serde::Serialize;

/// A Monte Carlo statistic with its standard error and sample size.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
    pub n: usize,
}

impl Estimate {
    /// Sample mean and standard error of the mean.
    pub fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = if n > 1 { xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64 } else { 0.0 };
        Self { value: mean, std_error: (var / n as f64).sqrt(), n }
    }

    /// Binomial proportion `k / n`.
    pub fn proportion(k: usize, n: usize) -> Self {
        let p = k as f64 / n as f64;
        Self { value: p, std_error: (p * (1.0 - p) / n as f64).sqrt(), n }
    }
}

/// Infinite Mondrian forest kernel `K0(x) = exp(-|x|_1) prod_j h(|x_j|)`.
pub fn mondrian_k0(x: &[f64]) -> f64 {
    x.iter().map(|&t| (-t.abs()).exp() * h_nonneg(t.abs())).product()
}

fn check_data(data: &[Vec<f64>], x: &[f64], lambda: f64) -> Result<()> {
    if data.is_empty() {
        return Err(StitError::EmptyData);
    }
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(StitError::InvalidParameter(format!("bandwidth inverse {lambda} must be positive")));
    }
    match data.iter().find(|p| p.len() != x.len()) {
        Some(p) => Err(StitError::DimensionMismatch { expected: x.len(), got: p.len() }),
        None => Ok(()),
    }
}

/// `lambda^d / n * sum_i K0(lambda (x - X_i))`, the infinite-forest density.
pub fn ideal_mondrian_density(data: &[Vec<f64>], lambda: f64, x: &[f64]) -> Result<f64> {
    check_data(data, x, lambda)?;
    let d = x.len() as i32;
    let sum: f64 = data
        .iter()
        .map(|p| x.iter().zip(p).map(|(a, b)| kernel_1d(lambda * (a - b))).product::<f64>())
        .sum();
    Ok(lambda.powi(d) * sum / data.len() as f64)
}

fn kernel_1d(t: f64) -> f64 {
    let a = t.abs();
    (-a).exp() * h_nonneg(a)
}

/// Product-Laplace kernel density estimate `(1/n) (lambda/2)^d sum_i exp(-lambda |x - X_i|_1)`.
pub fn laplace_kde(data: &[Vec<f64>], lambda: f64, x: &[f64]) -> Result<f64> {
    check_data(data, x, lambda)?;
    let d = x.len() as i32;
    let sum: f64 = data
        .iter()
        .map(|p| (-lambda * x.iter().zip(p).map(|(a, b)| (a - b).abs()).sum::<f64>()).exp())
        .sum();
    Ok((0.5 * lambda).powi(d) * sum / data.len() as f64)
}

/// Per-tree leaf tables shared by both estimators.
#[derive(Clone, Debug)]
struct FittedTree {
    tree: TessellationTree,
    counts: Vec<usize>,
    /// Clipped leaf volumes; zero for flat cells.
    volumes: Vec<f64>,
    sums: Vec<f64>,
}

fn fit_trees(
    measure: &DirectionalDistribution,
    bandwidth_inverse: f64,
    trees: usize,
    window: &Polytope,
    points: &[Vec<f64>],
    responses: Option<&[f64]>,
    seed: u64,
) -> Result<Vec<FittedTree>> {
    if trees == 0 {
        return Err(StitError::InvalidParameter("at least one tree required".into()));
    }
    if !(bandwidth_inverse > 0.0 && bandwidth_inverse.is_finite()) {
        return Err(StitError::InvalidParameter(format!("bandwidth inverse {bandwidth_inverse} must be positive")));
    }
    if points.is_empty() {
        return Err(StitError::EmptyData);
    }
    if let Some(p) = points.iter().find(|p| p.len() != window.dim()) {
        return Err(StitError::DimensionMismatch { expected: window.dim(), got: p.len() });
    }
    if points.iter().any(|p| !window.contains(p)) {
        return Err(StitError::OutOfWindow);
    }
    let lifetime = bandwidth_inverse * window.dim() as f64;
    (0..trees as u64)
        .into_par_iter()
        .map(|m| {
            let tree = TessellationTree::sample(measure, lifetime, window, rng::derive(seed, m))?;
            let k = tree.leaf_count();
            let mut counts = vec![0; k];
            let mut sums = vec![0.0; k];
            for (i, p) in points.iter().enumerate() {
                let leaf = tree.leaf_index_unchecked(p);
                counts[leaf] += 1;
                if let Some(y) = responses {
                    sums[leaf] += y[i];
                }
            }
            let volumes = tree
                .leaves()
                .map(|l| l.cell.volume().map(|v| if v.degenerate { 0.0 } else { v.value }))
                .collect::<Result<Vec<_>>>()?;
            Ok(FittedTree { tree, counts, volumes, sums })
        })
        .collect()
}

/// Average of `M` tree histograms `count(cell of x) / (n V(cell of x))`.
#[derive(Clone, Debug)]
pub struct DensityForest {
    trees: Vec<FittedTree>,
    window: Polytope,
    bandwidth_inverse: f64,
    n: usize,
}

impl DensityForest {
    pub fn fit(
        measure: &DirectionalDistribution,
        bandwidth_inverse: f64,
        trees: usize,
        window: &Polytope,
        data: &[Vec<f64>],
        seed: u64,
    ) -> Result<Self> {
        let trees = fit_trees(measure, bandwidth_inverse, trees, window, data, None, seed)?;
        Ok(Self { trees, window: window.clone(), bandwidth_inverse, n: data.len() })
    }

    pub fn len(&self) -> usize {
        self.trees.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trees.is_empty()
    }

    pub fn bandwidth_inverse(&self) -> f64 {
        self.bandwidth_inverse
    }

    pub fn tree(&self, m: usize) -> &TessellationTree {
        &self.trees[m].tree
    }

    /// Data count per leaf of tree `m`.
    pub fn leaf_counts(&self, m: usize) -> &[usize] {
        &self.trees[m].counts
    }

    fn cell(&self, m: usize, x: &[f64]) -> (usize, f64) {
        let t = &self.trees[m];
        let leaf = t.tree.leaf_index_unchecked(x);
        (t.counts[leaf], t.volumes[leaf])
    }

    fn check(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.window.dim() {
            return Err(StitError::DimensionMismatch { expected: self.window.dim(), got: x.len() });
        }
        if !self.window.contains(x) {
            return Err(StitError::OutOfWindow);
        }
        Ok(())
    }

    /// Density of tree `m` alone.
    pub fn tree_density(&self, m: usize, x: &[f64]) -> Result<f64> {
        self.check(x)?;
        let (count, volume) = self.cell(m, x);
        if volume == 0.0 {
            return Err(StitError::DegenerateCell);
        }
        Ok(count as f64 / (self.n as f64 * volume))
    }

    pub fn forest_density(&self, x: &[f64]) -> Result<f64> {
        self.check(x)?;
        let mut sum = 0.0;
        for m in 0..self.trees.len() {
            let (count, volume) = self.cell(m, x);
            if volume == 0.0 {
                return Err(StitError::DegenerateCell);
            }
            sum += count as f64 / volume;
        }
        Ok(sum / (self.n as f64 * self.trees.len() as f64))
    }

    /// `(mean count / n) / mean volume` of the cells of `x`; for the
    /// Mondrian measure this tends to the Laplace kernel estimate.
    pub fn ratio_density(&self, x: &[f64]) -> Result<f64> {
        self.check(x)?;
        let (mut counts, mut volumes) = (0usize, 0.0);
        for m in 0..self.trees.len() {
            let (count, volume) = self.cell(m, x);
            if volume == 0.0 {
                return Err(StitError::DegenerateCell);
            }
            counts += count;
            volumes += volume;
        }
        Ok(counts as f64 / (self.n as f64 * volumes))
    }

    pub fn forest_densities(&self, points: &[Vec<f64>]) -> Result<Vec<f64>> {
        points.par_iter().map(|x| self.forest_density(x)).collect()
    }

    pub fn ratio_densities(&self, points: &[Vec<f64>]) -> Result<Vec<f64>> {
        points.par_iter().map(|x| self.ratio_density(x)).collect()
    }

    /// Exact integral of the forest density over the window, summed leaf by
    /// leaf.
    pub fn window_integral(&self) -> f64 {
        let per_tree: f64 = self
            .trees
            .iter()
            .map(|t| {
                t.counts
                    .iter()
                    .zip(&t.volumes)
                    .filter(|(_, v)| **v > 0.0)
                    .map(|(&c, &v)| c as f64 / (self.n as f64 * v) * v)
                    .sum::<f64>()
            })
            .sum();
        per_tree / self.trees.len() as f64
    }
}

/// Average over trees of the mean response in the cell of `x`. A tree whose
/// cell at `x` holds no data contributes the global response mean.
#[derive(Clone, Debug)]
pub struct RegressionForest {
    trees: Vec<FittedTree>,
    window: Polytope,
    global_mean: f64,
}

impl RegressionForest {
    pub fn fit(
        measure: &DirectionalDistribution,
        bandwidth_inverse: f64,
        trees: usize,
        window: &Polytope,
        points: &[Vec<f64>],
        responses: &[f64],
        seed: u64,
    ) -> Result<Self> {
        if points.len() != responses.len() {
            return Err(StitError::DimensionMismatch { expected: points.len(), got: responses.len() });
        }
        if responses.iter().any(|y| !y.is_finite()) {
            return Err(StitError::InvalidParameter("responses must be finite".into()));
        }
        let trees = fit_trees(measure, bandwidth_inverse, trees, window, points, Some(responses), seed)?;
        let global_mean = responses.iter().sum::<f64>() / responses.len() as f64;
        Ok(Self { trees, window: window.clone(), global_mean })
    }

    pub fn global_mean(&self) -> f64 {
        self.global_mean
    }

    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.window.dim() {
            return Err(StitError::DimensionMismatch { expected: self.window.dim(), got: x.len() });
        }
        if !self.window.contains(x) {
            return Err(StitError::OutOfWindow);
        }
        let sum: f64 = self
            .trees
            .iter()
            .map(|t| {
                let leaf = t.tree.leaf_index_unchecked(x);
                match t.counts[leaf] {
                    0 => self.global_mean,
                    c => t.sums[leaf] / c as f64,
                }
            })
            .sum();
        Ok(sum / self.trees.len() as f64)
    }

    pub fn predict_many(&self, points: &[Vec<f64>]) -> Result<Vec<f64>> {
        points.par_iter().map(|x| self.predict(x)).collect()
    }
}

/// Monte Carlo estimate of `K_{0,Lambda}(x) = E[1{x in Z0} / V(Z0)]`, with
/// `Z0` the cell of the origin in `Y(d)` clipped to `[-half_side, half_side]^2`.
/// Only planar discrete measures are supported. Clipping biases the result
/// when `half_side` is comparable to typical cell sizes.
pub fn k0_lambda_monte_carlo(
    measure: &DirectionalDistribution,
    x: &[f64],
    half_side: f64,
    draws: usize,
    seed: u64,
) -> Result<Estimate> {
    if measure.dim() != 2 || measure.is_isotropic() {
        return Err(StitError::InvalidParameter("K0 estimator needs a discrete planar measure".into()));
    }
    if x.len() != 2 {
        return Err(StitError::DimensionMismatch { expected: 2, got: x.len() });
    }
    if draws < 2 {
        return Err(StitError::InvalidParameter("at least two draws required".into()));
    }
    let window = Polytope::centered_cube(2, half_side)?;
    if !window.contains(x) {
        return Err(StitError::OutOfWindow);
    }
    let samples = (0..draws as u64)
        .into_par_iter()
        .map(|i| {
            let (_, cell) = TessellationTree::cell_at(measure, 2.0, &window, &[0.0, 0.0], rng::derive(seed, i))?;
            if !cell.contains(x) {
                return Ok(0.0);
            }
            let v = cell.volume()?;
            if v.degenerate {
                return Err(StitError::DegenerateCell);
            }
            Ok(1.0 / v.value)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(Estimate::from_samples(&samples))
}

/// Midpoint rule on a regular grid over an axis-aligned box.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadratureGrid {
    pub points: Vec<Vec<f64>>,
    /// Weight of every node (the volume of its grid cell).
    pub weight: f64,
}

impl QuadratureGrid {
    pub fn midpoint(lo: &[f64], hi: &[f64], per_axis: usize) -> Result<Self> {
        if per_axis == 0 || lo.is_empty() || lo.len() != hi.len() || lo.iter().zip(hi).any(|(l, h)| !(l < h)) {
            return Err(StitError::InvalidParameter("grid needs lo < hi and at least one node per axis".into()));
        }
        let weight = lo.iter().zip(hi).map(|(l, h)| (h - l) / per_axis as f64).product();
        Ok(Self { points: crate::kernel::box_grid(lo, hi, per_axis), weight })
    }

    /// Nodes at least `margin` away from every face of `[lo, hi]`.
    pub fn interior(&self, lo: &[f64], hi: &[f64], margin: f64) -> Self {
        let points = self
            .points
            .iter()
            .filter(|p| p.iter().enumerate().all(|(j, v)| v - lo[j] >= margin && hi[j] - v >= margin))
            .cloned()
            .collect();
        Self { points, weight: self.weight }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Total measure of the nodes' cells.
    pub fn measure(&self) -> f64 {
        self.weight * self.points.len() as f64
    }

    pub fn integrate(&self, values: &[f64]) -> f64 {
        self.weight * values.iter().sum::<f64>()
    }
}

fn check_grid(grid: &QuadratureGrid, est: &[f64], truth: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(StitError::InvalidParameter("empty grid".into()));
    }
    if est.len() != grid.len() || truth.len() != grid.len() {
        return Err(StitError::DimensionMismatch { expected: grid.len(), got: est.len().min(truth.len()) });
    }
    Ok(())
}

/// Grid approximation of `integral |est - truth|`.
pub fn l1_error(grid: &QuadratureGrid, est: &[f64], truth: &[f64]) -> Result<f64> {
    check_grid(grid, est, truth)?;
    Ok(grid.weight * est.iter().zip(truth).map(|(a, b)| (a - b).abs()).sum::<f64>())
}

/// Grid approximation of `(integral (est - truth)^2)^(1/2)`.
pub fn l2_error(grid: &QuadratureGrid, est: &[f64], truth: &[f64]) -> Result<f64> {
    check_grid(grid, est, truth)?;
    Ok((grid.weight * est.iter().zip(truth).map(|(a, b)| (a - b).powi(2)).sum::<f64>()).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::mondrian_cell_at;
    use crate::measure::three_direction_example;
    use crate::rng::stream;
    use rand::Rng;

    fn line(a: f64, b: f64) -> Polytope {
        Polytope::cuboid(&[a], &[b]).unwrap()
    }

    #[test]
    fn k0_examples() {
        assert_eq!(mondrian_k0(&[0.0, 0.0]), 1.0);
        let k = mondrian_k0(&[0.5, -0.3]);
        assert!((k - mondrian_k0(&[0.5]) * mondrian_k0(&[-0.3])).abs() < 1e-15);
        for x in [[0.1, 0.2], [1.0, -2.0], [3.0, 0.0]] {
            assert!(mondrian_k0(&x) < (-x[0].abs() - x[1].abs()).exp());
        }
        let v = ideal_mondrian_density(&[vec![0.0]], 1.0, &[1.0]).unwrap();
        assert!((v - (-1.0f64).exp() * 0.403_652_637_676_8).abs() < 1e-9);
        assert!((v - 0.148_495_5).abs() < 1e-6);
        assert_eq!(ideal_mondrian_density(&[vec![0.2, 0.1]], 3.0, &[0.2, 0.1]).unwrap(), 9.0);
        assert_eq!(laplace_kde(&[vec![0.4]], 2.0, &[0.4]).unwrap(), 1.0);
        assert_eq!(laplace_kde(&[], 2.0, &[0.4]), Err(StitError::EmptyData));
        assert_eq!(ideal_mondrian_density(&[], 2.0, &[0.4]), Err(StitError::EmptyData));
    }

    #[test]
    fn k0_matches_zero_cell_oracle() {
        let x = [0.5, 0.5];
        let mut s = stream(21);
        let n = 400_000;
        let samples: Vec<f64> = (0..n)
            .map(|_| {
                let c = mondrian_cell_at(&[0.0, 0.0], 1.0, &mut s).unwrap();
                if c.contains(&x) {
                    1.0 / c.volume().unwrap().value
                } else {
                    0.0
                }
            })
            .collect();
        let e = Estimate::from_samples(&samples);
        assert!((e.value - mondrian_k0(&x)).abs() < 3.5 * e.std_error, "{e:?} vs {}", mondrian_k0(&x));
    }

    #[test]
    fn general_k0_estimator_agrees_for_mondrian() {
        let m = DirectionalDistribution::mondrian(2).unwrap();
        let x = [0.5, -0.4];
        let e = k0_lambda_monte_carlo(&m, &x, 8.0, 40_000, 3).unwrap();
        assert!((e.value - mondrian_k0(&x)).abs() < 4.0 * e.std_error, "{e:?}");
        let ex = k0_lambda_monte_carlo(&three_direction_example(), &[0.3, 0.3], 8.0, 2000, 1).unwrap();
        assert!(ex.value > 0.0 && ex.value.is_finite());
        assert!(k0_lambda_monte_carlo(&DirectionalDistribution::isotropic(2).unwrap(), &x, 8.0, 10, 0).is_err());
    }

    #[test]
    fn uncut_tree_is_uniform() {
        let w = Polytope::unit_cube(2);
        let data = vec![vec![0.2, 0.3], vec![0.9, 0.9], vec![0.5, 0.1]];
        let f = DensityForest::fit(&DirectionalDistribution::mondrian(2).unwrap(), 1e-12, 1, &w, &data, 0).unwrap();
        assert_eq!(f.forest_density(&[0.7, 0.7]).unwrap(), 1.0);
        assert_eq!(f.ratio_density(&[0.7, 0.7]).unwrap(), 1.0);
        let r = RegressionForest::fit(
            &DirectionalDistribution::mondrian(2).unwrap(),
            1e-12,
            1,
            &w,
            &data,
            &[1.0, 2.0, 6.0],
            0,
        )
        .unwrap();
        assert_eq!(r.predict(&[0.5, 0.5]).unwrap(), 3.0);
    }

    #[test]
    fn normalization_and_invariants() {
        let w = Polytope::centered_cube(2, 1.0).unwrap();
        let mut s = stream(3);
        let data: Vec<Vec<f64>> = (0..200).map(|_| vec![s.random::<f64>() * 2.0 - 1.0, s.random::<f64>() - 0.5]).collect();
        for m in [DirectionalDistribution::mondrian(2).unwrap(), DirectionalDistribution::isotropic(2).unwrap(), three_direction_example()] {
            let f = DensityForest::fit(&m, 3.0, 20, &w, &data, 7).unwrap();
            assert!((f.window_integral() - 1.0).abs() < 1e-9);
            for t in 0..f.len() {
                assert_eq!(f.leaf_counts(t).iter().sum::<usize>(), 200);
                let total: f64 = f.tree(t).leaves().map(|l| l.cell.volume().unwrap().value).sum();
                assert!((total - 4.0).abs() < 1e-9);
            }
            assert!(f.forest_density(&[0.1, 0.1]).unwrap() >= 0.0);
        }
        let m = DirectionalDistribution::mondrian(2).unwrap();
        assert_eq!(DensityForest::fit(&m, 1.0, 2, &w, &[vec![3.0, 0.0]], 0).err(), Some(StitError::OutOfWindow));
        assert_eq!(DensityForest::fit(&m, 1.0, 2, &w, &[], 0).err(), Some(StitError::EmptyData));
    }

    #[test]
    fn single_point_ratio_is_inverse_mean_volume() {
        let w = line(-3.0, 3.0);
        let m = DirectionalDistribution::mondrian(1).unwrap();
        let f = DensityForest::fit(&m, 2.0, 30, &w, &[vec![0.25]], 5).unwrap();
        let mean_volume: f64 = (0..30)
            .map(|t| {
                let tree = f.tree(t);
                tree.leaf_cell(tree.leaf_index(&[0.25]).unwrap()).volume().unwrap().value
            })
            .sum::<f64>()
            / 30.0;
        assert!((f.ratio_density(&[0.25]).unwrap() - 1.0 / mean_volume).abs() < 1e-12);
        let g = DensityForest::fit(&m, 2.0, 1, &w, &[vec![0.25]], 5).unwrap();
        assert_eq!(g.ratio_density(&[1.0]).unwrap(), g.forest_density(&[1.0]).unwrap());
    }

    #[test]
    fn forest_density_is_unbiased_for_ideal() {
        let w = line(-4.0, 4.0);
        let m = DirectionalDistribution::mondrian(1).unwrap();
        let data = vec![vec![-0.3], vec![0.1], vec![0.5]];
        let lambda = 3.0;
        let x = [0.2];
        let reps: Vec<f64> = (0..400)
            .map(|r| DensityForest::fit(&m, lambda, 20, &w, &data, 100 + r).unwrap().forest_density(&x).unwrap())
            .collect();
        let e = Estimate::from_samples(&reps);
        let ideal = ideal_mondrian_density(&data, lambda, &x).unwrap();
        assert!((e.value - ideal).abs() < 3.5 * e.std_error, "{e:?} vs {ideal}");
    }

    #[test]
    fn regression_conventions() {
        let w = Polytope::unit_cube(1);
        let m = DirectionalDistribution::mondrian(1).unwrap();
        let xs: Vec<Vec<f64>> = (0..50).map(|i| vec![i as f64 / 50.0]).collect();
        let r = RegressionForest::fit(&m, 5.0, 10, &w, &xs, &[2.5; 50], 1).unwrap();
        for x in [0.0, 0.33, 1.0] {
            assert_eq!(r.predict(&[x]).unwrap(), 2.5);
        }
        let ys: Vec<f64> = xs.iter().map(|p| p[0] * p[0]).collect();
        let r = RegressionForest::fit(&m, 5.0, 10, &w, &xs, &ys, 1).unwrap();
        for x in [0.1, 0.5, 0.9] {
            let v = r.predict(&[x]).unwrap();
            assert!((0.0..=ys[49]).contains(&v));
        }
        assert!(RegressionForest::fit(&m, 5.0, 10, &w, &xs, &[1.0], 1).is_err());
        let mut bad = ys.clone();
        bad[3] = f64::NAN;
        assert!(RegressionForest::fit(&m, 5.0, 10, &w, &xs, &bad, 1).is_err());
    }

    #[test]
    fn empty_cells_use_global_mean() {
        let w = Polytope::unit_cube(1);
        let m = DirectionalDistribution::mondrian(1).unwrap();
        let r = RegressionForest::fit(&m, 200.0, 5, &w, &[vec![0.01], vec![0.02]], &[1.0, 3.0], 2).unwrap();
        assert_eq!(r.global_mean(), 2.0);
        assert_eq!(r.predict(&[0.9]).unwrap(), 2.0);
    }

    #[test]
    fn errors_on_grids() {
        let g = QuadratureGrid::midpoint(&[0.0], &[2.0], 100).unwrap();
        let truth: Vec<f64> = g.points.iter().map(|p| p[0]).collect();
        assert_eq!(l1_error(&g, &truth, &truth).unwrap(), 0.0);
        assert_eq!(l2_error(&g, &truth, &truth).unwrap(), 0.0);
        let shifted: Vec<f64> = truth.iter().map(|t| t + 0.3).collect();
        assert!((l1_error(&g, &shifted, &truth).unwrap() - 0.3 * g.measure()).abs() < 1e-12);
        assert!((l2_error(&g, &shifted, &truth).unwrap() - 0.3 * g.measure().sqrt()).abs() < 1e-12);
        assert!((g.integrate(&truth) - 2.0).abs() < 1e-12);
        let inner = g.interior(&[0.0], &[2.0], 0.5);
        assert_eq!(inner.len(), 50);
        assert!(l1_error(&g, &truth[..3], &truth).is_err());
        assert!(QuadratureGrid::midpoint(&[1.0], &[0.0], 3).is_err());
    }

    #[test]
    fn closed_form_estimators_integrate_to_one() {
        let data = vec![vec![-0.4], vec![0.0], vec![1.3]];
        let g = QuadratureGrid::midpoint(&[-30.0], &[30.0], 600_000).unwrap();
        for lambda in [0.8, 4.0] {
            let ideal: Vec<f64> = g.points.iter().map(|p| ideal_mondrian_density(&data, lambda, p).unwrap()).collect();
            let lap: Vec<f64> = g.points.iter().map(|p| laplace_kde(&data, lambda, p).unwrap()).collect();
            assert!((g.integrate(&ideal) - 1.0).abs() < 1e-6);
            assert!((g.integrate(&lap) - 1.0).abs() < 1e-6);
        }
    }
}
