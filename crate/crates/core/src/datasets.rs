//! Synthetic data with known truth, truncated to a box window.

use crate::error::{Result, StitError};
use crate::geom::Polytope;
use crate::rng;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use statrs::distribution::{Continuous, ContinuousCDF, Normal};

const MAX_REJECTION_FACTOR: usize = 10_000;

/// Density models. Points falling outside the window are redrawn, so the
/// truth is the model density renormalized to the window.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DensityModel {
    /// Standard Gaussian in every coordinate.
    Gaussian,
    /// Equal mixture of `N(-1.5, 0.5^2)` and `N(1.5, 0.5^2)` in every coordinate.
    Mixture,
}

struct Component {
    weight: f64,
    mean: f64,
    sd: f64,
}

impl DensityModel {
    fn components(&self) -> Vec<Component> {
        match self {
            Self::Gaussian => vec![Component { weight: 1.0, mean: 0.0, sd: 1.0 }],
            Self::Mixture => vec![
                Component { weight: 0.5, mean: -1.5, sd: 0.5 },
                Component { weight: 0.5, mean: 1.5, sd: 0.5 },
            ],
        }
    }

    /// `n` points from the model conditioned on the window (a box).
    pub fn sample(&self, n: usize, window: &Polytope, seed: u64) -> Result<Vec<Vec<f64>>> {
        let (lo, hi) = box_of(window)?;
        let comps = self.components();
        let mut s = rng::stream(seed);
        let mut out = Vec::with_capacity(n);
        let mut attempts = 0usize;
        while out.len() < n {
            attempts += 1;
            if attempts > MAX_REJECTION_FACTOR * n.max(1) {
                return Err(StitError::SamplingFailure { proposals: attempts });
            }
            let u: f64 = s.random();
            let mut acc = 0.0;
            let c = comps
                .iter()
                .find(|c| {
                    acc += c.weight;
                    u < acc
                })
                .unwrap_or(&comps[comps.len() - 1]);
            let p: Vec<f64> = (0..lo.len())
                .map(|_| c.mean + c.sd * s.sample::<f64, _>(StandardNormal))
                .collect();
            if p.iter().enumerate().all(|(j, v)| (lo[j]..=hi[j]).contains(v)) {
                out.push(p);
            }
        }
        Ok(out)
    }

    /// Truth density on the window.
    pub fn truth(&self, window: &Polytope) -> Result<TruthDensity> {
        let (lo, hi) = box_of(window)?;
        let comps = self.components();
        let mass = comps
            .iter()
            .map(|c| {
                let nd = normal(c);
                c.weight * lo.iter().zip(&hi).map(|(l, h)| nd.cdf(*h) - nd.cdf(*l)).product::<f64>()
            })
            .sum();
        Ok(TruthDensity { model: *self, lo, hi, mass })
    }
}

fn normal(c: &Component) -> Normal {
    Normal::new(c.mean, c.sd).expect("fixed valid parameters")
}

fn box_of(window: &Polytope) -> Result<(Vec<f64>, Vec<f64>)> {
    window
        .box_bounds()
        .map(|(l, h)| (l.to_vec(), h.to_vec()))
        .ok_or_else(|| StitError::InvalidParameter("data generators need a box window".into()))
}

#[derive(Clone, Debug)]
pub struct TruthDensity {
    model: DensityModel,
    lo: Vec<f64>,
    hi: Vec<f64>,
    mass: f64,
}

impl TruthDensity {
    /// Probability mass of the untruncated model inside the window.
    pub fn window_mass(&self) -> f64 {
        self.mass
    }

    pub fn density(&self, x: &[f64]) -> f64 {
        if x.iter().enumerate().any(|(j, v)| *v < self.lo[j] || *v > self.hi[j]) {
            return 0.0;
        }
        let raw: f64 = self
            .model
            .components()
            .iter()
            .map(|c| {
                let nd = normal(c);
                c.weight * x.iter().map(|v| nd.pdf(*v)).product::<f64>()
            })
            .sum();
        raw / self.mass
    }
}

/// `Y = sin(2 pi X_1) + sigma * eps` with `X` uniform on a box window.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SineRegression {
    pub sigma: f64,
}

impl SineRegression {
    pub fn sample(&self, n: usize, window: &Polytope, seed: u64) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(StitError::InvalidParameter("noise level must be finite and >= 0".into()));
        }
        let (lo, hi) = box_of(window)?;
        let mut s = rng::stream(seed);
        let mut xs = Vec::with_capacity(n);
        let mut ys = Vec::with_capacity(n);
        for _ in 0..n {
            let p: Vec<f64> = lo.iter().zip(&hi).map(|(l, h)| l + (h - l) * s.random::<f64>()).collect();
            let eps: f64 = s.sample(StandardNormal);
            ys.push(Self::truth(&p) + self.sigma * eps);
            xs.push(p);
        }
        Ok((xs, ys))
    }

    pub fn truth(x: &[f64]) -> f64 {
        (2.0 * std::f64::consts::PI * x[0]).sin()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forest::QuadratureGrid;

    #[test]
    fn samples_stay_in_window_and_are_seeded() {
        let w = Polytope::cuboid(&[-1.0, 0.0], &[2.0, 1.0]).unwrap();
        for model in [DensityModel::Gaussian, DensityModel::Mixture] {
            let a = model.sample(500, &w, 4).unwrap();
            assert_eq!(a, model.sample(500, &w, 4).unwrap());
            assert!(a.iter().all(|p| w.contains(p)));
        }
        assert!(DensityModel::Gaussian.sample(3, &Polytope::convex_polygon(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]).unwrap(), 1).is_err());
    }

    #[test]
    fn truth_integrates_to_one() {
        for (lo, hi) in [(-6.0, 6.0), (-1.0, 0.5)] {
            let w = Polytope::cuboid(&[lo], &[hi]).unwrap();
            let g = QuadratureGrid::midpoint(&[lo], &[hi], 20_000).unwrap();
            for model in [DensityModel::Gaussian, DensityModel::Mixture] {
                let t = model.truth(&w).unwrap();
                let vals: Vec<f64> = g.points.iter().map(|p| t.density(p)).collect();
                assert!((g.integrate(&vals) - 1.0).abs() < 1e-7);
            }
        }
        let t = DensityModel::Gaussian.truth(&Polytope::cuboid(&[-6.0], &[6.0]).unwrap()).unwrap();
        assert!((t.window_mass() - 1.0).abs() < 1e-8);
        assert!((t.density(&[0.0]) - 0.398_942_280_401_432_7).abs() < 1e-8);
        assert_eq!(t.density(&[7.0]), 0.0);
    }

    #[test]
    fn sample_moments() {
        let w = Polytope::cuboid(&[-8.0], &[8.0]).unwrap();
        let xs = DensityModel::Gaussian.sample(20_000, &w, 9).unwrap();
        let mean = xs.iter().map(|p| p[0]).sum::<f64>() / 2e4;
        let var = xs.iter().map(|p| (p[0] - mean).powi(2)).sum::<f64>() / 2e4;
        assert!(mean.abs() < 4.0 / 2e4f64.sqrt());
        assert!((var - 1.0).abs() < 0.05);
    }

    #[test]
    fn sine_regression() {
        let w = Polytope::unit_cube(1);
        let (xs, ys) = SineRegression { sigma: 0.0 }.sample(100, &w, 1).unwrap();
        for (x, y) in xs.iter().zip(&ys) {
            assert_eq!(*y, SineRegression::truth(x));
        }
        let (_, noisy) = SineRegression { sigma: 0.1 }.sample(100, &w, 1).unwrap();
        assert_ne!(noisy, ys);
        assert!(SineRegression { sigma: -1.0 }.sample(1, &w, 1).is_err());
    }
}
