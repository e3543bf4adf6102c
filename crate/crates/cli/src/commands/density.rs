use super::{cube_root_bandwidth, read_points};
use crate::config::{ExperimentConfig, Generator, WindowSpec};
use crate::error::{CliError, CliResult};
use crate::report::{f, Metric, OutDir, RunReport};
use rayon::prelude::*;
use stit_core::datasets::{DensityModel, TruthDensity};
use stit_core::forest::{ideal_mondrian_density, l1_error, laplace_kde};
use stit_core::rng::derive;
use stit_core::{DensityForest, DirectionalDistribution, MeasureSpec, Polytope, QuadratureGrid};

/// Estimates of one fitted forest on a grid.
#[derive(Clone, Debug)]
pub struct Overlay {
    pub forest: Vec<f64>,
    pub ideal: Vec<f64>,
    pub laplace: Vec<f64>,
    pub ratio: Vec<f64>,
}

impl Overlay {
    pub fn compute(forest: &DensityForest, data: &[Vec<f64>], lambda: f64, grid: &QuadratureGrid) -> CliResult<Self> {
        let pts = &grid.points;
        Ok(Self {
            forest: forest.forest_densities(pts)?,
            ratio: forest.ratio_densities(pts)?,
            ideal: pts.par_iter().map(|x| ideal_mondrian_density(data, lambda, x)).collect::<Result<_, _>>()?,
            laplace: pts.par_iter().map(|x| laplace_kde(data, lambda, x)).collect::<Result<_, _>>()?,
        })
    }
}

/// Seeds of replicate `r` at sample size `n`: (data, forest).
pub fn replicate_seeds(seed: u64, n: usize, r: usize) -> (u64, u64) {
    let key = derive(derive(seed, n as u64), r as u64);
    (derive(key, 0), derive(key, 1))
}

pub fn model_of(g: Generator) -> CliResult<DensityModel> {
    match g {
        Generator::Gaussian => Ok(DensityModel::Gaussian),
        Generator::Mixture => Ok(DensityModel::Mixture),
        Generator::SineRegression => Err(CliError::Validation("`density` needs a density generator".into())),
    }
}

/// L1 error against the truth of one replicate, with its overlay.
#[allow(clippy::too_many_arguments)]
pub fn l1_replicate(
    model: DensityModel,
    measure: &DirectionalDistribution,
    window: &Polytope,
    grid: &QuadratureGrid,
    truth: &[f64],
    n: usize,
    lambda: f64,
    trees: usize,
    seeds: (u64, u64),
) -> CliResult<(f64, Vec<Vec<f64>>, Overlay)> {
    let data = model.sample(n, window, seeds.0)?;
    let forest = DensityForest::fit(measure, lambda, trees, window, &data, seeds.1)?;
    let overlay = Overlay::compute(&forest, &data, lambda, grid)?;
    Ok((l1_error(grid, &overlay.forest, truth)?, data, overlay))
}

fn coord_header(d: usize) -> Vec<String> {
    (1..=d).map(|j| format!("x{j}")).collect()
}

pub fn run(config: &ExperimentConfig, out: &mut OutDir) -> CliResult<RunReport> {
    let mut cfg = config.clone();
    let seed = cfg.seed()?;
    let d = cfg.window.as_ref().map(|w| w.lo.len()).or(cfg.measure.as_ref().map(MeasureSpec::dim)).unwrap_or(1);
    let spec = cfg.measure.get_or_insert(MeasureSpec::Mondrian { d }).clone();
    let w = cfg.window.get_or_insert_with(|| WindowSpec::cube(d, -6.0, 6.0)).clone();
    let trees = *cfg.trees.get_or_insert(50);
    let per_axis = *cfg.grid.get_or_insert(if d == 1 { 600 } else { 60 });
    cfg.validate()?;
    let measure = spec.build()?;
    let window = w.polytope()?;
    let grid = QuadratureGrid::midpoint(&w.lo, &w.hi, per_axis)?;
    let mut report_metrics: Vec<(String, Metric)> = Vec::new();
    let mut header = coord_header(d);

    if let Some(path) = cfg.data.clone() {
        let data = read_points(&path)?;
        if data[0].len() != d {
            return Err(CliError::Validation(format!("data has {} columns, window dimension is {d}", data[0].len())));
        }
        let lambda = cfg.bandwidth.unwrap_or_else(|| cube_root_bandwidth(data.len()));
        let forest = DensityForest::fit(&measure, lambda, trees, &window, &data, derive(seed, 1))?;
        let o = Overlay::compute(&forest, &data, lambda, &grid)?;
        header.extend(["forest", "ideal", "laplace", "ratio"].map(String::from));
        let rows = (0..grid.len()).map(|i| {
            let mut r: Vec<String> = grid.points[i].iter().map(|v| f(*v)).collect();
            r.extend([f(o.forest[i]), f(o.ideal[i]), f(o.laplace[i]), f(o.ratio[i])]);
            r
        });
        out.csv("density_grid.csv", &header.iter().map(String::as_str).collect::<Vec<_>>(), rows)?;
        report_metrics.push(("n".into(), Metric::exact(data.len() as f64, 1)));
        report_metrics.push(("forest_window_integral".into(), Metric::exact(forest.window_integral(), trees)));
    } else {
        let model = model_of(*cfg.generator.get_or_insert(Generator::Gaussian))?;
        let sizes = cfg.sample_sizes.get_or_insert_with(|| vec![10, 1000]).clone();
        let replicates = *cfg.replicates.get_or_insert(3);
        let truth_fn: TruthDensity = model.truth(&window)?;
        let truth: Vec<f64> = grid.points.iter().map(|p| truth_fn.density(p)).collect();
        report_metrics.push(("truth_grid_integral".into(), Metric::exact(grid.integrate(&truth), grid.len())));
        header.extend(["forest", "ideal", "laplace", "ratio", "truth"].map(String::from));
        let header: Vec<&str> = header.iter().map(String::as_str).collect();
        let mut trend = Vec::new();
        for &n in &sizes {
            let lambda = cfg.bandwidth.unwrap_or_else(|| cube_root_bandwidth(n));
            let mut l1s = Vec::new();
            for r in 0..replicates {
                let (l1, data, o) =
                    l1_replicate(model, &measure, &window, &grid, &truth, n, lambda, trees, replicate_seeds(seed, n, r))?;
                let l1_ideal = l1_error(&grid, &o.ideal, &truth)?;
                let l1_laplace = l1_error(&grid, &o.laplace, &truth)?;
                let l1_ratio = l1_error(&grid, &o.ratio, &truth)?;
                trend.push(vec![n.to_string(), r.to_string(), f(lambda), f(l1), f(l1_ideal), f(l1_laplace), f(l1_ratio)]);
                l1s.push(l1);
                if r == 0 {
                    let rows = (0..grid.len()).map(|i| {
                        let mut row: Vec<String> = grid.points[i].iter().map(|v| f(*v)).collect();
                        row.extend([f(o.forest[i]), f(o.ideal[i]), f(o.laplace[i]), f(o.ratio[i]), f(truth[i])]);
                        row
                    });
                    out.csv(&format!("density_n{n}.csv"), &header, rows)?;
                    let coords = coord_header(d);
                    out.csv(
                        &format!("density_data_n{n}.csv"),
                        &coords.iter().map(String::as_str).collect::<Vec<_>>(),
                        data.iter().map(|p| p.iter().map(|v| f(*v)).collect()),
                    )?;
                }
            }
            report_metrics.push((format!("l1_forest_n{n}"), Metric::mean_of(&l1s)));
        }
        out.csv(
            "density_trend.csv",
            &["n", "replicate", "bandwidth_inverse", "l1_forest", "l1_ideal", "l1_laplace", "l1_ratio"],
            trend,
        )?;
    }
    let mut report = RunReport::new("density", cfg);
    for (k, v) in report_metrics {
        report.metric(k, v);
    }
    Ok(report)
}
