//! Experiment configuration. Every field is optional in the file; each
//! command fills in its own defaults and echoes the resolved values in its
//! report, so feeding the echoed config back reproduces the run.

use crate::error::{CliError, CliResult};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};
use stit_core::{LifetimeDistribution, MeasureSpec, Polytope};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub measure: Option<MeasureSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window: Option<WindowSpec>,
    /// Kernel and tessellation lifetime.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lifetime: Option<f64>,
    /// Random lifetime law for mixture kernels; overrides `lifetime`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lifetime_law: Option<LifetimeSpec>,
    /// Forest bandwidth inverse; absent means `n^(1/3)`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bandwidth: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trees: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tree_counts: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub builds: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sample_sizes: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub replicates: Option<usize>,
    /// Grid nodes per axis.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generator: Option<Generator>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise: Option<f64>,
    /// CSV file of observations, used instead of a generator.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub data: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowSpec {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl WindowSpec {
    pub fn cube(d: usize, lo: f64, hi: f64) -> Self {
        Self { lo: vec![lo; d], hi: vec![hi; d] }
    }

    pub fn polytope(&self) -> CliResult<Polytope> {
        Ok(Polytope::cuboid(&self.lo, &self.hi)?)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum LifetimeSpec {
    Fixed { value: f64 },
    Gamma { shape: f64, rate: f64 },
    Uniform { a: f64, b: f64 },
}

impl LifetimeSpec {
    pub fn law(&self) -> LifetimeDistribution {
        match *self {
            Self::Fixed { value } => LifetimeDistribution::Fixed(value),
            Self::Gamma { shape, rate } => LifetimeDistribution::Gamma { shape, rate },
            Self::Uniform { a, b } => LifetimeDistribution::UniformInterval { a, b },
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Generator {
    Gaussian,
    Mixture,
    SineRegression,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
    }

    pub fn seed(&self) -> CliResult<u64> {
        self.seed.ok_or_else(|| CliError::Validation("a seed is required (config `seed` or --seed)".into()))
    }

    /// Checks the fields that are present: counts and scales must be
    /// positive, and the lifetime nonnegative.
    pub fn validate(&self) -> CliResult<()> {
        self.seed()?;
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(CliError::Validation(format!("`{name}` must be positive, got {v}")))
            }
        };
        if let Some(l) = self.lifetime {
            if !(l >= 0.0 && l.is_finite()) {
                return Err(CliError::Validation(format!("`lifetime` must be finite and >= 0, got {l}")));
            }
        }
        if let Some(law) = self.lifetime_law {
            law.law().validate()?;
        }
        if let Some(b) = self.bandwidth {
            positive("bandwidth", b)?;
        }
        if let Some(s) = self.noise {
            if !(s >= 0.0 && s.is_finite()) {
                return Err(CliError::Validation(format!("`noise` must be finite and >= 0, got {s}")));
            }
        }
        for (name, v) in [("trees", self.trees), ("builds", self.builds), ("replicates", self.replicates), ("grid", self.grid)] {
            if v == Some(0) {
                return Err(CliError::Validation(format!("`{name}` must be positive")));
            }
        }
        for (name, v) in [("tree_counts", &self.tree_counts), ("sample_sizes", &self.sample_sizes)] {
            if let Some(v) = v {
                if v.is_empty() || v.contains(&0) {
                    return Err(CliError::Validation(format!("`{name}` must be a nonempty list of positive counts")));
                }
            }
        }
        if let Some(w) = &self.window {
            w.polytope()?;
            if let Some(m) = &self.measure {
                if m.dim() != w.lo.len() {
                    return Err(CliError::Validation(format!(
                        "window has dimension {} but the measure has {}",
                        w.lo.len(),
                        m.dim()
                    )));
                }
            }
        }
        if let Some(m) = &self.measure {
            m.build()?;
        }
        Ok(())
    }
}
