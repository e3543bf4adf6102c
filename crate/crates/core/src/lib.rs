//! Simulation and estimation with STIT tessellations.
//!
//! The crate covers convex cells and their splits ([`geom`]), directional
//! distributions and the hyperplane measure `Lambda` ([`measure`]),
//! simulation of tessellations of a bounded window ([`engine`]), random
//! feature kernels ([`kernel`]), and forest estimators of densities and
//! regression functions ([`forest`]).
//!
//! ```
//! use stit_core::{DirectionalDistribution, Polytope, TessellationTree};
//!
//! let measure = DirectionalDistribution::mondrian(2).unwrap();
//! let tree = TessellationTree::sample(&measure, 3.0, &Polytope::unit_cube(2), 7).unwrap();
//! let area: f64 = tree.leaves().map(|l| l.cell.volume().unwrap().value).sum();
//! assert!((area - 1.0).abs() < 1e-12);
//! ```

pub mod datasets;
pub mod engine;
pub mod error;
pub mod forest;
pub mod geom;
pub mod kernel;
pub mod measure;
pub mod rng;
pub mod special;

pub use engine::{CellRef, LiftedTessellation, Side, TessellationTree};
pub use error::{Result, StitError};
pub use forest::{DensityForest, Estimate, QuadratureGrid, RegressionForest};
pub use geom::{ConvexBody, Direction, Hyperplane, Polytope};
pub use kernel::{KernelSpec, LifetimeDistribution, RandomFeatureSet};
pub use measure::{DirectionalDistribution, MeasureSpec};
