use super::{cube_root_bandwidth, read_points};
use crate::config::{ExperimentConfig, Generator, WindowSpec};
use crate::error::{CliError, CliResult};
use crate::report::{f, Metric, OutDir, RunReport};
use stit_core::datasets::SineRegression;
use stit_core::forest::l2_error;
use stit_core::rng::derive;
use stit_core::{DirectionalDistribution, MeasureSpec, Polytope, QuadratureGrid, RegressionForest};

/// L2 error of one replicate of the sine-regression experiment, with the
/// fitted values on the grid.
#[allow(clippy::too_many_arguments)]
pub fn l2_replicate(
    noise: f64,
    measure: &DirectionalDistribution,
    window: &Polytope,
    grid: &QuadratureGrid,
    n: usize,
    lambda: f64,
    trees: usize,
    seeds: (u64, u64),
) -> CliResult<(f64, Vec<f64>)> {
    let (xs, ys) = SineRegression { sigma: noise }.sample(n, window, seeds.0)?;
    let forest = RegressionForest::fit(measure, lambda, trees, window, &xs, &ys, seeds.1)?;
    let pred = forest.predict_many(&grid.points)?;
    let truth: Vec<f64> = grid.points.iter().map(|p| SineRegression::truth(p)).collect();
    Ok((l2_error(grid, &pred, &truth)?, pred))
}

pub fn run(config: &ExperimentConfig, out: &mut OutDir) -> CliResult<RunReport> {
    let mut cfg = config.clone();
    let seed = cfg.seed()?;
    let d = cfg.window.as_ref().map(|w| w.lo.len()).or(cfg.measure.as_ref().map(MeasureSpec::dim)).unwrap_or(1);
    let spec = cfg.measure.get_or_insert(MeasureSpec::Mondrian { d }).clone();
    let w = cfg.window.get_or_insert_with(|| WindowSpec::cube(d, 0.0, 1.0)).clone();
    let trees = *cfg.trees.get_or_insert(50);
    let per_axis = *cfg.grid.get_or_insert(if d == 1 { 200 } else { 40 });
    cfg.validate()?;
    let measure = spec.build()?;
    let window = w.polytope()?;
    let grid = QuadratureGrid::midpoint(&w.lo, &w.hi, per_axis)?;
    let mut header: Vec<String> = (1..=d).map(|j| format!("x{j}")).collect();
    let mut metrics = Vec::new();

    if let Some(path) = cfg.data.clone() {
        let rows = read_points(&path)?;
        if rows[0].len() != d + 1 {
            return Err(CliError::Validation(format!(
                "data has {} columns, expected {} coordinates and a response",
                rows[0].len(),
                d
            )));
        }
        let xs: Vec<Vec<f64>> = rows.iter().map(|r| r[..d].to_vec()).collect();
        let ys: Vec<f64> = rows.iter().map(|r| r[d]).collect();
        let lambda = cfg.bandwidth.unwrap_or_else(|| cube_root_bandwidth(xs.len()));
        let forest = RegressionForest::fit(&measure, lambda, trees, &window, &xs, &ys, derive(seed, 1))?;
        let pred = forest.predict_many(&grid.points)?;
        header.push("forest".into());
        let out_rows = grid.points.iter().zip(&pred).map(|(p, v)| {
            let mut r: Vec<String> = p.iter().map(|c| f(*c)).collect();
            r.push(f(*v));
            r
        });
        out.csv("regress_grid.csv", &header.iter().map(String::as_str).collect::<Vec<_>>(), out_rows)?;
        metrics.push(("n".to_string(), Metric::exact(xs.len() as f64, 1)));
    } else {
        if *cfg.generator.get_or_insert(Generator::SineRegression) != Generator::SineRegression {
            return Err(CliError::Validation("`regress` needs the sine-regression generator".into()));
        }
        let noise = *cfg.noise.get_or_insert(0.1);
        let sizes = cfg.sample_sizes.get_or_insert_with(|| vec![100, 1000, 10_000]).clone();
        let replicates = *cfg.replicates.get_or_insert(3);
        header.extend(["forest", "truth"].map(String::from));
        let header: Vec<&str> = header.iter().map(String::as_str).collect();
        let mut trend = Vec::new();
        for &n in &sizes {
            let lambda = cfg.bandwidth.unwrap_or_else(|| cube_root_bandwidth(n));
            let mut l2s = Vec::new();
            for r in 0..replicates {
                let seeds = super::density::replicate_seeds(seed, n, r);
                let (l2, pred) = l2_replicate(noise, &measure, &window, &grid, n, lambda, trees, seeds)?;
                trend.push(vec![n.to_string(), r.to_string(), f(lambda), f(l2)]);
                l2s.push(l2);
                if r == 0 {
                    let rows = grid.points.iter().zip(&pred).map(|(p, v)| {
                        let mut row: Vec<String> = p.iter().map(|c| f(*c)).collect();
                        row.extend([f(*v), f(SineRegression::truth(p))]);
                        row
                    });
                    out.csv(&format!("regress_n{n}.csv"), &header, rows)?;
                }
            }
            metrics.push((format!("l2_forest_n{n}"), Metric::mean_of(&l2s)));
        }
        out.csv("regress_trend.csv", &["n", "replicate", "bandwidth_inverse", "l2_forest"], trend)?;
    }
    let mut report = RunReport::new("regress", cfg);
    for (k, v) in metrics {
        report.metric(k, v);
    }
    Ok(report)
}
