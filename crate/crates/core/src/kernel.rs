//! Random-feature kernels from tessellation ensembles.
//!
//! Each tree maps a point to the index of its leaf (a one-hot feature that
//! is never materialized). `K_M(x, y)` is the fraction of trees in which
//! `x` and `y` share a leaf; its almost-sure limit is
//! `K_inf(x, y) = E[exp(-xi * Lambda([[x, y]]))]`, where `xi` is the
//! lifetime (fixed or random).

use crate::engine::TessellationTree;
use crate::error::{Result, StitError};
use crate::geom::Polytope;
use crate::measure::DirectionalDistribution;
use crate::rng::{self, TAG_LIFETIME};
use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution, Gamma};
use rayon::prelude::*;

/// Law of the lifetime parameter.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LifetimeDistribution {
    Fixed(f64),
    /// Gamma with `shape` and `rate`.
    Gamma { shape: f64, rate: f64 },
    /// Uniform on `[a, b]`, `0 < a < b`.
    UniformInterval { a: f64, b: f64 },
}

impl LifetimeDistribution {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Self::Fixed(l) => l > 0.0 && l.is_finite(),
            Self::Gamma { shape, rate } => shape > 0.0 && rate > 0.0 && shape.is_finite() && rate.is_finite(),
            Self::UniformInterval { a, b } => a > 0.0 && a < b && b.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(StitError::InvalidParameter(format!("invalid lifetime law {self:?}")))
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Self::Fixed(l) => l,
            Self::Gamma { shape, rate } => {
                Gamma::new(shape, 1.0 / rate).expect("validated parameters").sample(rng)
            }
            Self::UniformInterval { a, b } => a + (b - a) * rng.random::<f64>(),
        }
    }

    /// Laplace transform `E[exp(-s xi)]`, `s >= 0`.
    pub fn laplace_transform(&self, s: f64) -> f64 {
        match *self {
            Self::Fixed(l) => (-l * s).exp(),
            Self::Gamma { shape, rate } => (rate / (rate + s)).powf(shape),
            Self::UniformInterval { a, b } => {
                if s == 0.0 {
                    1.0
                } else {
                    // (e^{-sa} - e^{-sb}) / (s (b - a)) without cancellation.
                    -(-s * a).exp() * (-s * (b - a)).exp_m1() / (s * (b - a))
                }
            }
        }
    }
}

/// A measure together with a lifetime law.
#[derive(Clone, Debug)]
pub struct KernelSpec {
    pub measure: DirectionalDistribution,
    pub lifetime: LifetimeDistribution,
}

impl KernelSpec {
    pub fn new(measure: DirectionalDistribution, lifetime: LifetimeDistribution) -> Result<Self> {
        lifetime.validate()?;
        Ok(Self { measure, lifetime })
    }

    /// Limit kernel for any lifetime law.
    pub fn evaluate(&self, x: &[f64], y: &[f64]) -> f64 {
        self.lifetime.laplace_transform(self.measure.lambda_segment(x, y))
    }
}

/// `exp(-lifetime * Lambda([[x, y]]))` for a fixed lifetime.
pub fn kinf(spec: &KernelSpec, x: &[f64], y: &[f64]) -> Result<f64> {
    match spec.lifetime {
        LifetimeDistribution::Fixed(_) => Ok(spec.evaluate(x, y)),
        _ => Err(StitError::InvalidParameter("kinf needs a fixed lifetime; use kinf_mixture".into())),
    }
}

/// Laplace transform of a random lifetime at `Lambda([[x, y]])`.
pub fn kinf_mixture(spec: &KernelSpec, x: &[f64], y: &[f64]) -> Result<f64> {
    match spec.lifetime {
        LifetimeDistribution::Fixed(_) => {
            Err(StitError::InvalidParameter("kinf_mixture needs a random lifetime; use kinf".into()))
        }
        _ => Ok(spec.evaluate(x, y)),
    }
}

/// `M` i.i.d. tessellations of a shared window.
#[derive(Clone, Debug)]
pub struct RandomFeatureSet {
    trees: Vec<TessellationTree>,
    window: Polytope,
}

impl RandomFeatureSet {
    /// Builds `m` trees in parallel. Tree `i` uses the stream
    /// `derive(seed, i)`; a random lifetime is drawn from that tree's own
    /// sub-stream before simulating.
    pub fn build(spec: &KernelSpec, m: usize, window: &Polytope, seed: u64) -> Result<Self> {
        if m == 0 {
            return Err(StitError::InvalidParameter("at least one tree required".into()));
        }
        spec.lifetime.validate()?;
        let trees = (0..m as u64)
            .into_par_iter()
            .map(|i| {
                let key = rng::derive(seed, i);
                let lifetime = spec.lifetime.sample(&mut rng::stream(rng::derive(key, TAG_LIFETIME)));
                TessellationTree::sample(&spec.measure, lifetime, window, key)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { trees, window: window.clone() })
    }

    pub fn trees(&self) -> &[TessellationTree] {
        &self.trees
    }

    pub fn len(&self) -> usize {
        self.trees.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trees.is_empty()
    }

    /// Feature dimension of each tree (its leaf count).
    pub fn feature_dims(&self) -> Vec<usize> {
        self.trees.iter().map(TessellationTree::leaf_count).collect()
    }

    /// Leaf index of `x` in every tree.
    pub fn features(&self, x: &[f64]) -> Result<Vec<usize>> {
        if !self.window.contains(x) {
            return Err(StitError::OutOfWindow);
        }
        Ok(self.trees.iter().map(|t| t.leaf_index_unchecked(x)).collect())
    }

    pub fn km(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        let (fx, fy) = (self.features(x)?, self.features(y)?);
        Ok(agreement(&fx, &fy))
    }

    /// `G_ij = K_M(x_i, x_j)`.
    pub fn gram(&self, points: &[Vec<f64>]) -> Result<DMatrix<f64>> {
        let feats = points.iter().map(|p| self.features(p)).collect::<Result<Vec<_>>>()?;
        let n = points.len();
        let mut g = DMatrix::from_element(n, n, 1.0);
        for i in 0..n {
            for j in i + 1..n {
                let v = agreement(&feats[i], &feats[j]);
                g[(i, j)] = v;
                g[(j, i)] = v;
            }
        }
        Ok(g)
    }

    /// `max |K_M - K_inf|` over all pairs of grid points.
    pub fn sup_error(&self, spec: &KernelSpec, grid: &[Vec<f64>]) -> Result<f64> {
        let feats = grid.iter().map(|p| self.features(p)).collect::<Result<Vec<_>>>()?;
        let worst = (0..grid.len())
            .into_par_iter()
            .map(|i| {
                (i + 1..grid.len())
                    .map(|j| (agreement(&feats[i], &feats[j]) - spec.evaluate(&grid[i], &grid[j])).abs())
                    .fold(0.0, f64::max)
            })
            .reduce(|| 0.0, f64::max);
        Ok(worst)
    }
}

fn agreement(a: &[usize], b: &[usize]) -> f64 {
    a.iter().zip(b).filter(|(p, q)| p == q).count() as f64 / a.len() as f64
}

/// Regular grid of `n^d` cell-center points in an axis-aligned box.
pub fn box_grid(lo: &[f64], hi: &[f64], n: usize) -> Vec<Vec<f64>> {
    let d = lo.len();
    let total = n.pow(d as u32);
    (0..total)
        .map(|mut k| {
            (0..d)
                .map(|j| {
                    let i = k % n;
                    k /= n;
                    lo[j] + (hi[j] - lo[j]) * (i as f64 + 0.5) / n as f64
                })
                .collect()
        })
        .collect()
}
