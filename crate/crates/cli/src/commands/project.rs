use super::{measure_and_window, three_direction_spec};
use crate::config::{ExperimentConfig, WindowSpec};
use crate::error::{CliError, CliResult};
use crate::oracle::{bonferroni_z, two_proportion_z};
use crate::report::{f, Metric, OutDir, RunReport};
use rayon::prelude::*;
use serde::Serialize;
use stit_core::kernel::box_grid;
use stit_core::rng::derive;
use stit_core::{DirectionalDistribution, LiftedTessellation, MeasureSpec, Polytope, TessellationTree};

/// Family-wise level of the two-sample tests.
pub const FAMILY_ALPHA: f64 = 0.01;

#[derive(Clone, Debug, Serialize)]
pub struct PairResult {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub direct: Metric,
    pub lifted: Metric,
    pub target: f64,
    pub z_two_sample: f64,
    /// Distance of each estimate from the closed form in units of the
    /// binomial standard deviation at the target.
    pub z_direct: f64,
    pub z_lifted: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ProjectionOutcome {
    pub trees: usize,
    pub z_critical: f64,
    pub max_abs_diff: f64,
    pub max_abs_z: f64,
    pub max_abs_z_target: f64,
    pub pairs: Vec<PairResult>,
}

impl ProjectionOutcome {
    /// All Bonferroni-corrected two-sample tests accept.
    pub fn tests_accept(&self) -> bool {
        self.max_abs_z <= self.z_critical
    }
}

/// Pairs: every node of the 5-per-axis cell-center grid of the window,
/// each paired with a fixed anchor slightly off the center.
pub fn pair_grid(lo: &[f64], hi: &[f64]) -> Vec<(Vec<f64>, Vec<f64>)> {
    const OFFSETS: [f64; 3] = [0.05, -0.07, 0.03];
    let anchor: Vec<f64> =
        (0..lo.len()).map(|j| 0.5 * (lo[j] + hi[j]) + OFFSETS[j % 3] * (hi[j] - lo[j])).collect();
    box_grid(lo, hi, 5).into_iter().map(|x| (x, anchor.clone())).collect()
}

/// Runs the direct and lifted simulators on the same pairs.
pub fn compare(
    rows: &[Vec<f64>],
    lifetime: f64,
    window: &Polytope,
    pairs: &[(Vec<f64>, Vec<f64>)],
    trees: usize,
    seed: u64,
) -> CliResult<ProjectionOutcome> {
    let measure = DirectionalDistribution::from_directions(rows)?;
    let count = |lifted: bool| -> CliResult<Vec<usize>> {
        let base = derive(seed, if lifted { 2 } else { 1 });
        (0..trees as u64)
            .into_par_iter()
            .map(|i| -> CliResult<Vec<usize>> {
                let key = derive(base, i);
                if lifted {
                    let t = LiftedTessellation::sample(rows, lifetime, window, key)?;
                    pairs.iter().map(|(x, y)| Ok(usize::from(t.same_cell(x, y)?))).collect()
                } else {
                    let t = TessellationTree::sample(&measure, lifetime, window, key)?;
                    pairs.iter().map(|(x, y)| Ok(usize::from(t.same_cell(x, y)?))).collect()
                }
            })
            .try_reduce(|| vec![0; pairs.len()], |a, b| Ok(a.iter().zip(&b).map(|(p, q)| p + q).collect()))
    };
    let direct = count(false)?;
    let lifted = count(true)?;
    let n = trees;
    let z_critical = bonferroni_z(FAMILY_ALPHA, pairs.len());
    let mut out = Vec::new();
    for (i, (x, y)) in pairs.iter().enumerate() {
        let target = (-lifetime * measure.lambda_segment(x, y)).exp();
        let sd = (target * (1.0 - target) / n as f64).sqrt();
        let d = stit_core::Estimate::proportion(direct[i], n);
        let l = stit_core::Estimate::proportion(lifted[i], n);
        let z_of = |p: f64| if sd > 0.0 { (p - target) / sd } else if p == target { 0.0 } else { f64::INFINITY };
        out.push(PairResult {
            x: x.clone(),
            y: y.clone(),
            direct: d.into(),
            lifted: l.into(),
            target,
            z_two_sample: two_proportion_z(direct[i], n, lifted[i], n),
            z_direct: z_of(d.value),
            z_lifted: z_of(l.value),
        });
    }
    let max_of = |g: &dyn Fn(&PairResult) -> f64| out.iter().map(g).fold(0.0, f64::max);
    Ok(ProjectionOutcome {
        trees,
        z_critical,
        max_abs_diff: max_of(&|p| (p.direct.value - p.lifted.value).abs()),
        max_abs_z: max_of(&|p| p.z_two_sample.abs()),
        max_abs_z_target: max_of(&|p| p.z_direct.abs().max(p.z_lifted.abs())),
        pairs: out,
    })
}

pub fn discrete_rows(spec: &MeasureSpec) -> CliResult<Vec<Vec<f64>>> {
    match spec {
        MeasureSpec::Mondrian { d } => Ok((0..*d).map(|i| (0..*d).map(|j| f64::from(u8::from(i == j))).collect()).collect()),
        MeasureSpec::Directions { vectors, weights } => {
            if let Some(w) = weights {
                if w.iter().any(|x| (x - w[0]).abs() > 1e-12) {
                    return Err(CliError::Validation("the lifted simulator needs uniform weights".into()));
                }
            }
            Ok(vectors
                .iter()
                .map(|v| {
                    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                    v.iter().map(|x| x / n).collect()
                })
                .collect())
        }
        MeasureSpec::Isotropic { .. } => Err(CliError::Validation("project-verify needs a discrete measure".into())),
    }
}

/// Compares direct simulation with the lifted Mondrian. Fails with a
/// criterion error when a corrected test rejects.
pub fn run(config: &ExperimentConfig, out: &mut OutDir) -> CliResult<RunReport> {
    let mut cfg = config.clone();
    let seed = cfg.seed()?;
    let (_, window) = measure_and_window(&mut cfg, three_direction_spec(), |d| WindowSpec::cube(d, -0.5, 0.5))?;
    let lifetime = *cfg.lifetime.get_or_insert(2.0);
    let trees = *cfg.trees.get_or_insert(20_000);
    cfg.validate()?;
    let rows = discrete_rows(cfg.measure.as_ref().expect("resolved above"))?;
    let w = cfg.window.clone().expect("resolved above");
    let pairs = pair_grid(&w.lo, &w.hi);
    let outcome = compare(&rows, lifetime, &window, &pairs, trees, seed)?;
    let d = w.lo.len();
    let mut header: Vec<String> = (1..=d).map(|j| format!("x{j}")).collect();
    header.extend((1..=d).map(|j| format!("y{j}")));
    for h in ["direct_p", "direct_se", "lifted_p", "lifted_se", "n", "target", "z_two_sample", "z_direct", "z_lifted"] {
        header.push(h.into());
    }
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let csv_rows = outcome.pairs.iter().map(|p| {
        let mut r: Vec<String> = p.x.iter().chain(&p.y).map(|v| f(*v)).collect();
        r.extend([
            f(p.direct.value),
            f(p.direct.std_error),
            f(p.lifted.value),
            f(p.lifted.std_error),
            trees.to_string(),
            f(p.target),
            f(p.z_two_sample),
            f(p.z_direct),
            f(p.z_lifted),
        ]);
        r
    });
    out.csv("projection_pairs.csv", &header, csv_rows)?;
    let mut report = RunReport::new("project-verify", cfg);
    report.metric("max_abs_diff", Metric::exact(outcome.max_abs_diff, pairs.len()));
    report.metric("max_abs_z", Metric::exact(outcome.max_abs_z, pairs.len()));
    report.metric("z_critical", Metric::exact(outcome.z_critical, pairs.len()));
    report.metric("max_abs_z_target", Metric::exact(outcome.max_abs_z_target, 2 * pairs.len()));
    report.passed = Some(outcome.tests_accept());
    Ok(report)
}
