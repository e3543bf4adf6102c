use super::{measure_and_window, three_direction_spec};
use crate::config::{ExperimentConfig, WindowSpec};
use crate::error::CliResult;
use crate::oracle::median;
use crate::report::{f, Metric, OutDir, RunReport};
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use stit_core::kernel::box_grid;
use stit_core::rng::{derive, stream};
use stit_core::{DirectionalDistribution, KernelSpec, LifetimeDistribution, MeasureSpec, RandomFeatureSet};

/// Which outputs of the kernel command to produce.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Converge,
    Grid,
    Both,
}

/// Sub-seed of the random-direction panel.
const GAUSSIAN_PANEL_TAG: u64 = 0x4741_5553;
/// Nodes per axis of the contour grid on `[-1, 1]^2`.
const CONTOUR_NODES: usize = 41;

/// `k` directions drawn from the standard Gaussian in `R^d`, normalized.
pub fn gaussian_directions(k: usize, d: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut s = stream(seed);
    (0..k)
        .map(|_| {
            let v: Vec<f64> = (0..d).map(|_| s.sample::<f64, _>(StandardNormal)).collect();
            let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            v.iter().map(|x| x / n).collect()
        })
        .collect()
}

fn lifetime_law(cfg: &mut ExperimentConfig, default: f64) -> LifetimeDistribution {
    match cfg.lifetime_law {
        Some(l) => l.law(),
        None => LifetimeDistribution::Fixed(*cfg.lifetime.get_or_insert(default)),
    }
}

/// Sup error of `K_M` over all grid pairs, for each `M` and build.
pub fn sup_error_sweep(
    spec: &KernelSpec,
    window: &stit_core::Polytope,
    grid: &[Vec<f64>],
    tree_counts: &[usize],
    builds: usize,
    seed: u64,
) -> CliResult<Vec<Vec<f64>>> {
    tree_counts
        .iter()
        .map(|&m| {
            (0..builds)
                .map(|b| {
                    let f = RandomFeatureSet::build(spec, m, window, derive(derive(seed, b as u64), m as u64))?;
                    Ok(f.sup_error(spec, grid)?)
                })
                .collect()
        })
        .collect()
}

pub fn run(config: &ExperimentConfig, out: &mut OutDir, mode: Mode) -> CliResult<RunReport> {
    let mut cfg = config.clone();
    let seed = cfg.seed()?;
    let (measure, window) =
        measure_and_window(&mut cfg, MeasureSpec::Mondrian { d: 2 }, |d| WindowSpec::cube(d, 0.0, 1.0))?;
    let law = lifetime_law(&mut cfg, 1.0);
    let spec = KernelSpec::new(measure.clone(), law)?;
    let mut report_metrics = Vec::new();

    if mode != Mode::Grid {
        let counts = cfg.tree_counts.get_or_insert_with(|| vec![10, 100, 1000]).clone();
        let builds = *cfg.builds.get_or_insert(1);
        let per_axis = *cfg.grid.get_or_insert(10);
        cfg.validate()?;
        let w = cfg.window.clone().expect("resolved above");
        let grid = box_grid(&w.lo, &w.hi, per_axis);
        // Pair table for the first build.
        let mut rows = Vec::new();
        for &m in &counts {
            let set = RandomFeatureSet::build(&spec, m, &window, derive(derive(seed, 0), m as u64))?;
            let feats = grid.iter().map(|p| set.features(p)).collect::<Result<Vec<_>, _>>()?;
            let mut id = 0usize;
            for i in 0..grid.len() {
                for j in i + 1..grid.len() {
                    let km = feats[i].iter().zip(&feats[j]).filter(|(a, b)| a == b).count() as f64 / m as f64;
                    let kinf = spec.evaluate(&grid[i], &grid[j]);
                    rows.push(vec![m.to_string(), id.to_string(), f(km), f(kinf), f((km - kinf).abs())]);
                    id += 1;
                }
            }
        }
        out.csv("kernel_convergence.csv", &["M", "grid_pair_id", "km", "kinf", "abs_err"], rows)?;
        let sweep = sup_error_sweep(&spec, &window, &grid, &counts, builds, seed)?;
        let mut rows = Vec::new();
        for (m, errs) in counts.iter().zip(&sweep) {
            for (b, e) in errs.iter().enumerate() {
                rows.push(vec![m.to_string(), b.to_string(), f(*e)]);
            }
            report_metrics.push((format!("sup_error_mean_M{m}"), Metric::mean_of(errs)));
            report_metrics.push((format!("sup_error_median_M{m}"), Metric::exact(median(errs), errs.len())));
        }
        out.csv("kernel_sup_error.csv", &["M", "build", "sup_error"], rows)?;
    }

    if mode != Mode::Converge {
        cfg.validate()?;
        let lifetime_law = spec.lifetime;
        let gaussian_rows = gaussian_directions(10, 2, derive(seed, GAUSSIAN_PANEL_TAG));
        out.json("kernel_gaussian_directions.json", &gaussian_rows)?;
        let panels: Vec<(&str, DirectionalDistribution)> = vec![
            ("mondrian", DirectionalDistribution::mondrian(2)?),
            ("isotropic", DirectionalDistribution::isotropic(2)?),
            ("three-direction", three_direction_spec().build()?),
            ("gaussian-10", DirectionalDistribution::from_directions(&gaussian_rows)?),
        ];
        let contour = box_grid(&[-1.0 - 1.0 / 40.0; 2], &[1.0 + 1.0 / 40.0; 2], CONTOUR_NODES);
        let origin = [0.0, 0.0];
        let mut rows = Vec::new();
        let mut mondrian_dev: f64 = 0.0;
        let mut radial_dev: f64 = 0.0;
        for (name, m) in &panels {
            let ks = KernelSpec::new(m.clone(), lifetime_law)?;
            let values: Vec<f64> = contour.par_iter().map(|x| ks.evaluate(&origin, x)).collect();
            for (x, v) in contour.iter().zip(&values) {
                rows.push(vec![name.to_string(), f(x[0]), f(x[1]), f(*v)]);
                match *name {
                    "mondrian" => {
                        let closed = lifetime_law.laplace_transform((x[0].abs() + x[1].abs()) / 2.0);
                        mondrian_dev = mondrian_dev.max((v - closed).abs());
                    }
                    "isotropic" => {
                        let r = x[0].hypot(x[1]);
                        for k in 1..8 {
                            let t = k as f64 * std::f64::consts::PI / 8.0;
                            let rotated = [r * t.cos(), r * t.sin()];
                            radial_dev = radial_dev.max((ks.evaluate(&origin, &rotated) - v).abs());
                        }
                    }
                    _ => {}
                }
            }
        }
        out.csv("kernel_grid.csv", &["measure", "x1", "x2", "kinf"], rows)?;
        report_metrics.push(("mondrian_closed_form_max_dev".into(), Metric::exact(mondrian_dev, contour.len())));
        report_metrics.push(("isotropic_rotation_max_dev".into(), Metric::exact(radial_dev, contour.len())));
    }

    let mut report = RunReport::new(
        match mode {
            Mode::Converge => "kernel-converge",
            Mode::Grid => "kernel-grid",
            Mode::Both => "kernel",
        },
        cfg,
    );
    for (k, v) in report_metrics {
        report.metric(k, v);
    }
    Ok(report)
}
