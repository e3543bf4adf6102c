//! The release gate: twelve seeded checks of the simulation, kernel and
//! forest code against closed forms and independent oracles.
//!
//! Every criterion is a pure function of its seed and the scale. With
//! `quick`, Monte Carlo sample sizes are divided by 10 and absolute
//! tolerances widened by `sqrt(10)`; tolerances stated in standard errors
//! and trend checks are unchanged.

use crate::commands::density::replicate_seeds;
use crate::commands::kernel::sup_error_sweep;
use crate::commands::project::{compare, pair_grid};
use crate::error::CliResult;
use crate::oracle::{e1_by_quadrature, integrate, median, median_of_means};
use crate::report::Metric;
use rand::SeedableRng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;
use serde::Serialize;
use std::collections::BTreeMap;
use std::time::Instant;
use stit_core::datasets::{DensityModel, SineRegression};
use stit_core::forest::{ideal_mondrian_density, l1_error, l2_error, laplace_kde, mondrian_k0};
use stit_core::kernel::box_grid;
use stit_core::measure::three_direction_rows;
use stit_core::rng::{derive, Stream};
use stit_core::special::{exp_integral_e1, h_fn};
use stit_core::{
    DensityForest, DirectionalDistribution, Estimate, KernelSpec, LifetimeDistribution, Polytope, QuadratureGrid,
    RandomFeatureSet, RegressionForest,
};

/// Base seed of the suite.
pub const DEFAULT_SEED: u64 = 0x5717_2024;

#[derive(Clone, Copy, Debug)]
pub struct Scale {
    pub quick: bool,
}

impl Scale {
    pub fn full() -> Self {
        Self { quick: false }
    }

    /// Monte Carlo sample size.
    pub fn n(&self, full: usize) -> usize {
        if self.quick {
            (full / 10).max(1)
        } else {
            full
        }
    }

    /// Absolute tolerance on a Monte Carlo quantity.
    pub fn tol(&self, full: f64) -> f64 {
        if self.quick {
            full * 10f64.sqrt()
        } else {
            full
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    /// `value <= bound`, `value < bound`, or `value == bound`.
    pub relation: &'static str,
    pub bound: f64,
    pub passed: bool,
}

impl Check {
    pub fn at_most(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self { name: name.into(), value, relation: "<=", bound, passed: value <= bound }
    }

    pub fn below(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self { name: name.into(), value, relation: "<", bound, passed: value < bound }
    }

    pub fn equals(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self { name: name.into(), value, relation: "==", bound, passed: value == bound }
    }

    pub fn at_least(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self { name: name.into(), value, relation: ">=", bound, passed: value >= bound }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CriterionResult {
    pub id: String,
    pub title: String,
    pub passed: bool,
    pub checks: Vec<Check>,
    pub metrics: BTreeMap<String, Metric>,
}

impl CriterionResult {
    fn new(id: &str, title: &str, checks: Vec<Check>, metrics: Vec<(String, Metric)>) -> Self {
        Self {
            id: id.into(),
            title: title.into(),
            passed: checks.iter().all(|c| c.passed),
            checks,
            metrics: metrics.into_iter().collect(),
        }
    }

    /// One-line summary: verdict, title and the first failing (or last) check.
    pub fn summary(&self) -> String {
        let c = self.checks.iter().find(|c| !c.passed).or(self.checks.last());
        let detail = c.map_or(String::new(), |c| format!(" [{} = {:.4e} {} {:.4e}]", c.name, c.value, c.relation, c.bound));
        format!("{} {} {}{}", self.id, if self.passed { "PASS" } else { "FAIL" }, self.title, detail)
    }
}

pub struct Criterion {
    pub id: &'static str,
    pub title: &'static str,
    /// Wall-time budget in seconds, where one is stated.
    pub budget_s: Option<f64>,
    pub run: fn(Scale, u64) -> CliResult<CriterionResult>,
}

pub fn criteria() -> Vec<Criterion> {
    vec![
        Criterion { id: "A1", title: "capacity functional (Mondrian)", budget_s: Some(30.0), run: a1 },
        Criterion { id: "A2", title: "isotropic limit kernel", budget_s: Some(60.0), run: a2 },
        Criterion { id: "A3", title: "projection theorem", budget_s: Some(180.0), run: a3 },
        Criterion { id: "A4", title: "kernel uniform convergence", budget_s: Some(300.0), run: a4 },
        Criterion { id: "A5", title: "special functions", budget_s: Some(10.0), run: a5 },
        Criterion { id: "A6", title: "infinite-forest kernel oracle", budget_s: Some(120.0), run: a6 },
        Criterion { id: "A7", title: "forest density normalization", budget_s: None, run: a7 },
        Criterion { id: "A8", title: "forest density to ideal kernel", budget_s: Some(180.0), run: a8 },
        Criterion { id: "A9", title: "ratio estimator to Laplace KDE", budget_s: Some(180.0), run: a9 },
        Criterion { id: "A10", title: "consistency trends", budget_s: Some(600.0), run: a10 },
        Criterion { id: "A11", title: "mixture kernels", budget_s: Some(120.0), run: a11 },
    ]
}

fn metric(name: &str, m: impl Into<Metric>) -> (String, Metric) {
    (name.into(), m.into())
}

/// Same-cell frequency of `(x, y)` over `trees` independent tessellations.
fn same_cell_frequency(spec: &KernelSpec, window: &Polytope, x: &[f64], y: &[f64], trees: usize, seed: u64) -> CliResult<Estimate> {
    let f = RandomFeatureSet::build(spec, trees, window, seed)?;
    let (fx, fy) = (f.features(x)?, f.features(y)?);
    Ok(Estimate::proportion(fx.iter().zip(&fy).filter(|(a, b)| a == b).count(), trees))
}

#[allow(clippy::too_many_arguments)]
fn capacity_check(
    id: &str,
    title: &str,
    spec: KernelSpec,
    x: &[f64],
    y: &[f64],
    target: f64,
    trees: usize,
    tol: f64,
    seed: u64,
) -> CliResult<CriterionResult> {
    let e = same_cell_frequency(&spec, &Polytope::unit_cube(2), x, y, trees, seed)?;
    Ok(CriterionResult::new(
        id,
        title,
        vec![Check::at_most("|frequency - target|", (e.value - target).abs(), tol)],
        vec![metric("frequency", e), metric("target", Metric::exact(target, 1))],
    ))
}

fn a1(s: Scale, seed: u64) -> CliResult<CriterionResult> {
    let spec = KernelSpec::new(DirectionalDistribution::mondrian(2)?, LifetimeDistribution::Fixed(1.0))?;
    capacity_check("A1", "capacity functional (Mondrian)", spec, &[0.0, 0.0], &[0.3, 0.4], (-0.35f64).exp(), s.n(20_000), s.tol(0.010), seed)
}

fn a2(s: Scale, seed: u64) -> CliResult<CriterionResult> {
    let spec = KernelSpec::new(DirectionalDistribution::isotropic(2)?, LifetimeDistribution::Fixed(1.0))?;
    let target = (-1.0 / std::f64::consts::PI).exp();
    capacity_check("A2", "isotropic limit kernel", spec, &[0.2, 0.3], &[0.5, 0.7], target, s.n(20_000), s.tol(0.010), seed)
}

fn a3(s: Scale, seed: u64) -> CliResult<CriterionResult> {
    let window = Polytope::centered_cube(2, 0.5)?;
    let pairs = pair_grid(&[-0.5, -0.5], &[0.5, 0.5]);
    let o = compare(&three_direction_rows(), 2.0, &window, &pairs, s.n(20_000), seed)?;
    let n = pairs.len();
    Ok(CriterionResult::new(
        "A3",
        "projection theorem",
        vec![
            Check::at_most("max |two-sample z| (Bonferroni, 1%)", o.max_abs_z, o.z_critical),
            Check::at_most("max |estimate - closed form| / sd", o.max_abs_z_target, 3.0),
            Check::at_most("max |direct - lifted|", o.max_abs_diff, s.tol(0.015)),
        ],
        vec![
            metric("max_abs_z", Metric::exact(o.max_abs_z, n)),
            metric("max_abs_z_target", Metric::exact(o.max_abs_z_target, 2 * n)),
            metric("max_abs_diff", Metric::exact(o.max_abs_diff, n)),
            metric("trees_per_simulator", Metric::exact(o.trees as f64, 1)),
        ],
    ))
}

fn a4(s: Scale, seed: u64) -> CliResult<CriterionResult> {
    let spec = KernelSpec::new(DirectionalDistribution::mondrian(2)?, LifetimeDistribution::Fixed(1.0))?;
    let grid = box_grid(&[0.0, 0.0], &[1.0, 1.0], 10);
    let counts: Vec<usize> = [10, 100, 1000].iter().map(|&m| s.n(m)).collect();
    let builds = 20;
    let sweep = sup_error_sweep(&spec, &Polytope::unit_cube(2), &grid, &counts, builds, seed)?;
    let medians: Vec<f64> = sweep.iter().map(|e| median(e)).collect();
    let last = sweep.last().expect("three tree counts");
    let bound = s.tol(0.1);
    let share = last.iter().filter(|&&e| e <= bound).count() as f64 / builds as f64;
    let mut checks = Vec::new();
    for k in 1..medians.len() {
        checks.push(Check::below(format!("median sup error at M={} vs M={}", counts[k], counts[k - 1]), medians[k], medians[k - 1]));
    }
    checks.push(Check::at_least(format!("share of builds with sup error <= {bound:.3} at M={}", counts[2]), share, 0.95));
    let mut metrics: Vec<(String, Metric)> =
        counts.iter().zip(&medians).map(|(m, v)| (format!("median_sup_error_M{m}"), Metric::exact(*v, builds))).collect();
    metrics.push(metric("share_within_bound", Metric::exact(share, builds)));
    Ok(CriterionResult::new("A4", "kernel uniform convergence", checks, metrics))
}

fn a5(_: Scale, _: u64) -> CliResult<CriterionResult> {
    Ok(a5_with(&|t| exp_integral_e1(t).map_err(Into::into)))
}

/// A5 against an arbitrary `E1` implementation.
pub fn a5_with(e1: &dyn Fn(f64) -> CliResult<f64>) -> CriterionResult {
    let points = 241;
    let (lo, hi) = (1e-6f64.ln(), 50f64.ln());
    let mut worst: f64 = 0.0;
    for k in 0..points {
        let t = (lo + (hi - lo) * k as f64 / (points - 1) as f64).exp();
        let rel = match e1(t) {
            Ok(v) => (v / e1_by_quadrature(t) - 1.0).abs(),
            Err(_) => f64::INFINITY,
        };
        worst = worst.max(rel);
    }
    let h0 = h_fn(0.0).unwrap_or(f64::NAN);
    // Both integrands vanish beyond t = 60 to far below the tolerance.
    let kernel_mass = 2.0 * integrate(&|t: f64| (-t).exp() * h_fn(t).unwrap_or(f64::NAN), 0.0, 60.0, 1e-13);
    let laplace_mass = 2.0 * integrate(&|t: f64| (-t).exp(), 0.0, 60.0, 1e-13);
    let e1_moment = 2.0 * integrate(&|t: f64| t * e1(t).unwrap_or(f64::NAN), 0.0, 60.0, 1e-13);
    CriterionResult::new(
        "A5",
        "special functions",
        vec![
            Check::at_most("max relative error of E1 on [1e-6, 50]", worst, 1e-12),
            Check::equals("h(0)", h0, 1.0),
            Check::at_most("|integral e^-|t| h(|t|) dt - 1|", (kernel_mass - 1.0).abs(), 1e-8),
            Check::at_most("|integral e^-|t| dt - 2|", (laplace_mass - 2.0).abs(), 1e-8),
            Check::at_most("|integral |t| E1(|t|) dt - 1|", (e1_moment - 1.0).abs(), 1e-8),
        ],
        vec![
            metric("e1_max_relative_error", Metric::exact(worst, points)),
            metric("kernel_mass", Metric::exact(kernel_mass, 1)),
        ],
    )
}

/// Off-axis test points, `|x_j| >= 0.25`.
pub const A6_POINTS: [&[f64]; 10] = [
    &[0.25],
    &[-0.6],
    &[1.2],
    &[0.5, 0.5],
    &[-0.25, 0.75],
    &[1.0, -1.0],
    &[0.3, -0.6],
    &[-0.8, -0.4],
    &[1.5, 0.25],
    &[-0.35, 1.1],
];

/// Mean of `1{x in Z0} / V(Z0)` with `Z0 = prod_j [-T_j0, T_j1]`, i.i.d.
/// standard exponentials, computed blockwise from independent streams.
fn zero_cell_oracle(x: &[f64], draws: usize, blocks: usize, seed: u64) -> (f64, f64) {
    let per_block = draws / blocks;
    let samples: Vec<f64> = (0..blocks as u64)
        .into_par_iter()
        .flat_map_iter(|b| {
            let mut s = Stream::seed_from_u64(derive(seed, b));
            (0..per_block)
                .map(|_| {
                    let mut volume = 1.0;
                    let mut inside = true;
                    for &xj in x {
                        let t0: f64 = Exp1.sample(&mut s);
                        let t1: f64 = Exp1.sample(&mut s);
                        volume *= t0 + t1;
                        inside &= -t0 <= xj && xj <= t1;
                    }
                    if inside {
                        1.0 / volume
                    } else {
                        0.0
                    }
                })
                .collect::<Vec<_>>()
        })
        .collect();
    median_of_means(&samples, blocks)
}

fn a6(s: Scale, seed: u64) -> CliResult<CriterionResult> {
    let draws = s.n(1_000_000);
    let mut checks = Vec::new();
    let mut metrics = Vec::new();
    for (i, x) in A6_POINTS.iter().enumerate() {
        let (est, se) = zero_cell_oracle(x, draws, 20, derive(seed, i as u64));
        let k0 = mondrian_k0(x);
        checks.push(Check::at_most(format!("|K0 - oracle| / se at {x:?}"), (k0 - est).abs() / se, 3.0));
        metrics.push((format!("oracle_{i}"), Metric { value: est, std_error: se, n: draws }));
        metrics.push((format!("k0_{i}"), Metric::exact(k0, 1)));
    }
    Ok(CriterionResult::new("A6", "infinite-forest kernel oracle", checks, metrics))
}

fn a7(_: Scale, seed: u64) -> CliResult<CriterionResult> {
    let window = Polytope::centered_cube(2, 3.0)?;
    let data = DensityModel::Gaussian.sample(200, &window, derive(seed, 0))?;
    let measures = [
        ("mondrian", DirectionalDistribution::mondrian(2)?),
        ("isotropic", DirectionalDistribution::isotropic(2)?),
        ("three-direction", DirectionalDistribution::from_directions(&three_direction_rows())?),
    ];
    let mut checks = Vec::new();
    let mut metrics = Vec::new();
    for (k, (name, m)) in measures.iter().enumerate() {
        let f = DensityForest::fit(m, 2.0, 50, &window, &data, derive(seed, 1 + k as u64))?;
        let integral = f.window_integral();
        checks.push(Check::at_most(format!("|window integral - 1| ({name})"), (integral - 1.0).abs(), 1e-9));
        let mut worst_volume: f64 = 0.0;
        let mut counts_ok = true;
        for t in 0..f.len() {
            let total: f64 = f.tree(t).leaves().map(|l| l.cell.volume().map(|v| v.value)).sum::<Result<f64, _>>()?;
            worst_volume = worst_volume.max((total / 36.0 - 1.0).abs());
            counts_ok &= f.leaf_counts(t).iter().sum::<usize>() == data.len();
        }
        checks.push(Check::at_most(format!("max relative leaf-volume deficit ({name})"), worst_volume, 1e-9));
        checks.push(Check::equals(format!("per-tree counts sum to n ({name})"), f64::from(u8::from(counts_ok)), 1.0));
        metrics.push((format!("integral_{name}"), Metric::exact(integral, f.len())));
    }
    Ok(CriterionResult::new("A7", "forest density normalization", checks, metrics))
}

/// Interior nodes of the d = 1 density grid on `[-6, 6]`.
fn interior_grid(lambda: f64) -> CliResult<QuadratureGrid> {
    Ok(QuadratureGrid::midpoint(&[-6.0], &[6.0], 600)?.interior(&[-6.0], &[6.0], 5.0 / lambda))
}

type ForestEstimate = fn(&DensityForest, &[Vec<f64>]) -> stit_core::Result<Vec<f64>>;
type LimitDensity = fn(&[Vec<f64>], f64, &[f64]) -> stit_core::Result<f64>;

/// Mean over seeds of the grid-mean absolute deviation between a forest
/// estimator and its limit, for each forest size. Forests of one seed are
/// nested: the first trees of the larger forest are the smaller forest.
fn forest_deviation(
    s: Scale,
    seed: u64,
    sizes: &[usize],
    estimate: ForestEstimate,
    limit: LimitDensity,
) -> CliResult<Vec<Vec<f64>>> {
    let lambda = 10.0;
    let window = Polytope::cuboid(&[-6.0], &[6.0])?;
    let grid = interior_grid(lambda)?;
    let m = DirectionalDistribution::mondrian(1)?;
    let mut out = vec![Vec::new(); sizes.len()];
    for r in 0..3 {
        let (data_seed, forest_seed) = replicate_seeds(seed, 1000, r);
        let data = DensityModel::Gaussian.sample(1000, &window, data_seed)?;
        let target: Vec<f64> = grid.points.iter().map(|x| limit(&data, lambda, x)).collect::<Result<_, _>>()?;
        for (k, &size) in sizes.iter().enumerate() {
            let f = DensityForest::fit(&m, lambda, s.n(size), &window, &data, forest_seed)?;
            let est = estimate(&f, &grid.points)?;
            out[k].push(est.iter().zip(&target).map(|(a, b)| (a - b).abs()).sum::<f64>() / grid.len() as f64);
        }
    }
    Ok(out)
}

fn trend_result(id: &str, title: &str, label: &str, sizes: &[usize], devs: Vec<Vec<f64>>) -> CriterionResult {
    let means: Vec<f64> = devs.iter().map(|d| d.iter().sum::<f64>() / d.len() as f64).collect();
    let checks = (1..sizes.len())
        .map(|k| Check::below(format!("{label} at {} vs {}", sizes[k], sizes[k - 1]), means[k], means[k - 1]))
        .collect();
    let metrics = sizes.iter().zip(&devs).map(|(n, d)| (format!("{label}_{n}"), Metric::mean_of(d))).collect();
    CriterionResult::new(id, title, checks, metrics)
}

fn a8(s: Scale, seed: u64) -> CliResult<CriterionResult> {
    let sizes = [100, 400];
    let devs = forest_deviation(s, seed, &sizes, DensityForest::forest_densities, ideal_mondrian_density)?;
    let sizes: Vec<usize> = sizes.iter().map(|&m| s.n(m)).collect();
    Ok(trend_result("A8", "forest density to ideal kernel", "mean_abs_dev_M", &sizes, devs))
}

fn a9(s: Scale, seed: u64) -> CliResult<CriterionResult> {
    let sizes = [100, 1000];
    let devs = forest_deviation(s, seed, &sizes, DensityForest::ratio_densities, laplace_kde)?;
    let sizes: Vec<usize> = sizes.iter().map(|&m| s.n(m)).collect();
    Ok(trend_result("A9", "ratio estimator to Laplace KDE", "mean_abs_dev_M", &sizes, devs))
}

fn a10(s: Scale, seed: u64) -> CliResult<CriterionResult> {
    let sizes = [100usize, 1000, 10_000];
    let trees = s.n(50);
    let dwin = Polytope::cuboid(&[-6.0], &[6.0])?;
    let dgrid = QuadratureGrid::midpoint(&[-6.0], &[6.0], 1200)?;
    let truth_fn = DensityModel::Gaussian.truth(&dwin)?;
    let truth: Vec<f64> = dgrid.points.iter().map(|p| truth_fn.density(p)).collect();
    let rwin = Polytope::unit_cube(1);
    let rgrid = QuadratureGrid::midpoint(&[0.0], &[1.0], 400)?;
    let rtruth: Vec<f64> = rgrid.points.iter().map(|p| SineRegression::truth(p)).collect();
    let m = DirectionalDistribution::mondrian(1)?;
    let dseed = derive(seed, 1);
    let rseed = derive(seed, 2);
    let mut l1 = Vec::new();
    let mut l2 = Vec::new();
    for &n in &sizes {
        let lambda = (n as f64).cbrt();
        let mut a = Vec::new();
        let mut b = Vec::new();
        for r in 0..3 {
            let (ds, fs) = replicate_seeds(dseed, n, r);
            let data = DensityModel::Gaussian.sample(n, &dwin, ds)?;
            let f = DensityForest::fit(&m, lambda, trees, &dwin, &data, fs)?;
            a.push(l1_error(&dgrid, &f.forest_densities(&dgrid.points)?, &truth)?);
            let (ds, fs) = replicate_seeds(rseed, n, r);
            let (xs, ys) = SineRegression { sigma: 0.1 }.sample(n, &rwin, ds)?;
            let g = RegressionForest::fit(&m, lambda, trees, &rwin, &xs, &ys, fs)?;
            b.push(l2_error(&rgrid, &g.predict_many(&rgrid.points)?, &rtruth)?);
        }
        l1.push(a);
        l2.push(b);
    }
    let density = trend_result("A10", "", "density_l1_n", &sizes, l1);
    let regression = trend_result("A10", "", "regression_l2_n", &sizes, l2);
    let checks = density.checks.into_iter().chain(regression.checks).collect();
    let metrics = density.metrics.into_iter().chain(regression.metrics).collect();
    Ok(CriterionResult::new("A10", "consistency trends", checks, metrics))
}

fn a11(s: Scale, seed: u64) -> CliResult<CriterionResult> {
    let m = DirectionalDistribution::mondrian(2)?;
    let (x, y) = ([0.0, 0.0], [0.3, 0.4]);
    let laws = [
        ("gamma", LifetimeDistribution::Gamma { shape: 2.0, rate: 3.0 }, (3.0f64 / 3.35).powi(2)),
        ("uniform", LifetimeDistribution::UniformInterval { a: 1.0, b: 2.0 }, ((-0.35f64).exp() - (-0.7f64).exp()) / 0.35),
    ];
    let mut checks = Vec::new();
    let mut metrics = Vec::new();
    for (k, (name, law, target)) in laws.iter().enumerate() {
        let spec = KernelSpec::new(m.clone(), *law)?;
        let e = same_cell_frequency(&spec, &Polytope::unit_cube(2), &x, &y, s.n(20_000), derive(seed, k as u64))?;
        checks.push(Check::at_most(format!("|frequency - target| ({name})"), (e.value - target).abs(), s.tol(0.015)));
        checks.push(Check::at_most(format!("|closed form - Laplace transform| ({name})"), (spec.evaluate(&x, &y) - target).abs(), 1e-15));
        metrics.push((format!("frequency_{name}"), e.into()));
        metrics.push((format!("target_{name}"), Metric::exact(*target, 1)));
    }
    Ok(CriterionResult::new("A11", "mixture kernels", checks, metrics))
}

/// A criterion's result with its wall time.
#[derive(Clone, Debug)]
pub struct Timed {
    pub result: CriterionResult,
    pub seconds: f64,
    pub budget_s: Option<f64>,
}

impl Timed {
    pub fn within_budget(&self) -> bool {
        self.budget_s.is_none_or(|b| self.seconds <= b)
    }

    pub fn passed(&self) -> bool {
        self.result.passed && self.within_budget()
    }

    pub fn line(&self) -> String {
        let budget = match self.budget_s {
            Some(b) if self.seconds > b => format!(", over the {b:.0} s budget"),
            Some(b) => format!(" of {b:.0} s"),
            None => String::new(),
        };
        let mut s = self.result.summary();
        if self.result.passed && !self.within_budget() {
            s = s.replacen(" PASS ", " FAIL ", 1);
        }
        format!("{s} ({:.1} s{budget})", self.seconds)
    }
}

fn run_one(c: &Criterion, scale: Scale, seed: u64) -> CliResult<Timed> {
    let start = Instant::now();
    let result = (c.run)(scale, seed)?;
    Ok(Timed { result, seconds: start.elapsed().as_secs_f64(), budget_s: c.budget_s })
}

/// Runs A1 to A11, calling `progress` after each, then repeats them all and
/// reports byte-level agreement of the serialized results as A12.
pub fn run_suite(scale: Scale, seed: u64, progress: &mut dyn FnMut(&Timed)) -> CliResult<Vec<Timed>> {
    let list = criteria();
    let mut first = Vec::new();
    for (i, c) in list.iter().enumerate() {
        let t = run_one(c, scale, derive(seed, i as u64))?;
        progress(&t);
        first.push(t);
    }
    let start = Instant::now();
    let mut mismatched = Vec::new();
    for (i, c) in list.iter().enumerate() {
        let again = (c.run)(scale, derive(seed, i as u64))?;
        if serde_json::to_vec(&again)? != serde_json::to_vec(&first[i].result)? {
            mismatched.push(c.id);
        }
    }
    let a12 = CriterionResult::new(
        "A12",
        "determinism",
        vec![Check::equals("criteria whose rerun differs byte-wise", mismatched.len() as f64, 0.0)],
        vec![metric("criteria_compared", Metric::exact(list.len() as f64, 1))],
    );
    let t = Timed { result: a12, seconds: start.elapsed().as_secs_f64(), budget_s: None };
    progress(&t);
    first.push(t);
    Ok(first)
}

#[derive(Serialize)]
struct SuiteFile<'a> {
    seed: u64,
    quick: bool,
    passed: bool,
    criteria: Vec<&'a CriterionResult>,
}

#[derive(Serialize)]
struct TimingRow<'a> {
    id: &'a str,
    seconds: f64,
    budget_s: Option<f64>,
    within_budget: bool,
}

/// The `acceptance` command: runs the suite, printing one line per
/// criterion, and writes `acceptance.json` (deterministic) and
/// `acceptance_timing.json`.
pub fn run(config: &crate::config::ExperimentConfig, quick: bool, out: &mut crate::report::OutDir) -> CliResult<crate::report::RunReport> {
    let mut cfg = config.clone();
    let seed = *cfg.seed.get_or_insert(DEFAULT_SEED);
    let results = run_suite(Scale { quick }, seed, &mut |t| println!("{}", t.line()))?;
    let passed = results.iter().all(Timed::passed);
    out.json(
        "acceptance.json",
        &SuiteFile { seed, quick, passed: results.iter().all(|t| t.result.passed), criteria: results.iter().map(|t| &t.result).collect() },
    )?;
    let timing: Vec<TimingRow> = results
        .iter()
        .map(|t| TimingRow { id: &t.result.id, seconds: t.seconds, budget_s: t.budget_s, within_budget: t.within_budget() })
        .collect();
    out.json("acceptance_timing.json", &timing)?;
    let mut report = crate::report::RunReport::new("acceptance", cfg);
    for t in &results {
        report.metric(format!("{}_passed", t.result.id), Metric::exact(f64::from(u8::from(t.passed())), 1));
    }
    report.passed = Some(passed);
    Ok(report)
}
