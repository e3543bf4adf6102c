use super::{measure_and_window, three_direction_spec};
use crate::config::{ExperimentConfig, WindowSpec};
use crate::error::CliResult;
use crate::report::{f, Metric, OutDir, RunReport};
use stit_core::TessellationTree;

/// Samples one tessellation. Defaults to the three-direction measure on
/// `[-0.5, 0.5]^2` up to lifetime 9.
pub fn run(config: &ExperimentConfig, out: &mut OutDir) -> CliResult<RunReport> {
    let mut cfg = config.clone();
    let seed = cfg.seed()?;
    let (measure, window) = measure_and_window(&mut cfg, three_direction_spec(), |d| WindowSpec::cube(d, -0.5, 0.5))?;
    let lifetime = *cfg.lifetime.get_or_insert(9.0);
    cfg.validate()?;
    let tree = TessellationTree::sample(&measure, lifetime, &window, seed)?;
    out.json("tessellation.json", &tree.dump())?;
    let mut rows = Vec::new();
    let mut total = 0.0;
    let mut total_var = 0.0;
    for leaf in tree.leaves() {
        let v = leaf.cell.volume()?;
        total += v.value;
        total_var += v.std_error * v.std_error;
        rows.push(vec![
            leaf.index.to_string(),
            f(v.value),
            f(v.std_error),
            leaf.cell.vertices().len().to_string(),
            f(leaf.birth),
        ]);
    }
    out.csv("leaves.csv", &["leaf", "volume", "volume_std_error", "vertex_count", "birth"], rows)?;
    let mut report = RunReport::new("tessellate", cfg);
    report.metric("leaf_count", Metric::exact(tree.leaf_count() as f64, 1));
    report.metric("cut_count", Metric::exact(tree.cut_count() as f64, 1));
    report.metric(
        "leaf_volume_sum",
        Metric { value: total, std_error: total_var.sqrt(), n: tree.leaf_count() },
    );
    report.metric("window_rate", Metric::exact(measure.lambda_hit(&window), 1));
    Ok(report)
}
