//! Stationary hyperplane measures.
//!
//! A measure is fixed by a probability distribution `phi` on the unit
//! sphere; the mass of hyperplanes hitting a convex body `C` is
//! `Lambda([C]) = integral of width(C, u) d phi(u)`. With this normalization
//! every ball of diameter one has mass one.
//!
//! Two families are provided: finitely many weighted directions (the
//! Mondrian measure is the special case of the coordinate axes) and the
//! isotropic measure.

use crate::error::{Result, StitError};
use crate::geom::{norm, ConvexBody, Direction, Hyperplane, Polytope, TOL};
use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::Arc;

/// Isotropic measures are supported up to this dimension; beyond it the
/// tensor quadrature for `Lambda([C])` gets too coarse.
pub const MAX_ISOTROPIC_DIM: usize = 4;

const MAX_REJECTIONS: usize = 1_000_000;

/// One weighted direction of a discrete measure.
#[derive(Clone, Debug, PartialEq)]
pub struct Atom {
    pub direction: Direction,
    pub weight: f64,
}

#[derive(Clone, Debug)]
enum Kind {
    Discrete(Vec<Atom>),
    Isotropic(Arc<SphereRule>),
}

/// The directional distribution `phi` of a stationary hyperplane measure.
#[derive(Clone, Debug)]
pub struct DirectionalDistribution {
    dim: usize,
    kind: Kind,
}

/// Volume of the unit ball in R^d.
pub fn unit_ball_volume(d: usize) -> f64 {
    match d {
        0 => 1.0,
        1 => 2.0,
        _ => unit_ball_volume(d - 2) * 2.0 * PI / d as f64,
    }
}

/// `2 kappa_{d-1} / (d kappa_d)`: the mean of `|<u, v>|` over the uniform
/// sphere for a unit vector `v`.
pub fn isotropic_segment_constant(d: usize) -> f64 {
    2.0 * unit_ball_volume(d - 1) / (d as f64 * unit_ball_volume(d))
}

impl DirectionalDistribution {
    /// Uniform weights on the coordinate axes.
    pub fn mondrian(dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(StitError::InvalidMeasure("dimension must be positive".into()));
        }
        let w = 1.0 / dim as f64;
        let atoms = (0..dim).map(|i| Atom { direction: Direction::axis(dim, i), weight: w }).collect();
        Ok(Self { dim, kind: Kind::Discrete(atoms) })
    }

    /// Normalized spherical Lebesgue measure.
    pub fn isotropic(dim: usize) -> Result<Self> {
        if dim == 0 || dim > MAX_ISOTROPIC_DIM {
            return Err(StitError::InvalidMeasure(format!(
                "isotropic measure supported for 1 <= d <= {MAX_ISOTROPIC_DIM}, got {dim}"
            )));
        }
        Ok(Self { dim, kind: Kind::Isotropic(Arc::new(SphereRule::new(dim))) })
    }

    /// Uniform weights `1/n` on the rows of `U`. Rows must be unit vectors
    /// spanning R^d.
    pub fn from_directions(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        Self::weighted(rows, &vec![1.0 / n.max(1) as f64; n])
    }

    /// Arbitrary positive weights summing to one.
    pub fn weighted(rows: &[Vec<f64>], weights: &[f64]) -> Result<Self> {
        let Some(first) = rows.first() else {
            return Err(StitError::InvalidMeasure("no directions".into()));
        };
        let dim = first.len();
        if dim == 0 || rows.iter().any(|r| r.len() != dim) {
            return Err(StitError::InvalidMeasure("directions must share a positive dimension".into()));
        }
        if weights.len() != rows.len() {
            return Err(StitError::InvalidMeasure("one weight per direction required".into()));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(StitError::InvalidMeasure("weights must be positive".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(StitError::InvalidMeasure(format!("weights sum to {total}, expected 1")));
        }
        let atoms = rows
            .iter()
            .zip(weights)
            .map(|(r, &w)| {
                Direction::from_unit(r.clone())
                    .map(|direction| Atom { direction, weight: w })
                    .map_err(|e| StitError::InvalidMeasure(e.to_string()))
            })
            .collect::<Result<Vec<_>>>()?;
        let m = DMatrix::from_fn(rows.len(), dim, |i, j| rows[i][j]);
        if m.rank(1e-10) < dim {
            return Err(StitError::InvalidMeasure("directions do not span the space".into()));
        }
        Ok(Self { dim, kind: Kind::Discrete(atoms) })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Atoms of a discrete measure; `None` for the isotropic one.
    pub fn atoms(&self) -> Option<&[Atom]> {
        match &self.kind {
            Kind::Discrete(a) => Some(a),
            Kind::Isotropic(_) => None,
        }
    }

    pub fn is_isotropic(&self) -> bool {
        matches!(self.kind, Kind::Isotropic(_))
    }

    /// `Lambda([C])`, the cutting rate of a cell.
    pub fn lambda_hit<B: ConvexBody + ?Sized>(&self, body: &B) -> f64 {
        match &self.kind {
            Kind::Discrete(atoms) => {
                atoms.iter().map(|a| a.weight * body.width(a.direction.coords())).sum()
            }
            Kind::Isotropic(rule) => match (self.dim, body.perimeter()) {
                (1, _) => body.width(&[1.0]),
                // Cauchy: the mean width of a planar convex body is its perimeter / pi.
                (2, Some(p)) => p / PI,
                (3, _) => body.mean_width().unwrap_or_else(|| rule.mean(|u| body.width(u))),
                _ => rule.mean(|u| body.width(u)),
            },
        }
    }

    /// `Lambda([[x, y]])`, the mass of hyperplanes separating `x` and `y`.
    pub fn lambda_segment(&self, x: &[f64], y: &[f64]) -> f64 {
        let v: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
        self.segment_functional(&v)
    }

    /// `integral |<u, v>| d phi(u)`.
    pub fn segment_functional(&self, v: &[f64]) -> f64 {
        match &self.kind {
            Kind::Discrete(atoms) => atoms.iter().map(|a| a.weight * a.direction.dot(v).abs()).sum(),
            Kind::Isotropic(_) => isotropic_segment_constant(self.dim) * norm(v),
        }
    }

    /// Draws a hyperplane hitting `body` from the restriction of the measure
    /// to the hyperplanes hitting it.
    pub fn sample_cut<R: Rng + ?Sized>(&self, body: &Polytope, rng: &mut R) -> Result<Hyperplane> {
        if body.dim() != self.dim {
            return Err(StitError::DimensionMismatch { expected: self.dim, got: body.dim() });
        }
        let direction = match &self.kind {
            Kind::Discrete(atoms) => {
                let rates: Vec<f64> =
                    atoms.iter().map(|a| a.weight * body.width(a.direction.coords())).collect();
                let total: f64 = rates.iter().sum();
                if !(total > 0.0 && total.is_finite()) {
                    return Err(StitError::NonFiniteRate(total));
                }
                let mut target = rng.random::<f64>() * total;
                let mut pick = atoms.len() - 1;
                for (i, r) in rates.iter().enumerate() {
                    if target < *r {
                        pick = i;
                        break;
                    }
                    target -= r;
                }
                atoms[pick].direction.clone()
            }
            Kind::Isotropic(_) if self.dim == 1 => Direction::axis(1, 0),
            Kind::Isotropic(_) => {
                let diam = body.diameter();
                let mut accepted = None;
                for _ in 0..MAX_REJECTIONS {
                    let u = random_unit(self.dim, rng);
                    if rng.random::<f64>() * diam < body.width(u.coords()) {
                        accepted = Some(u);
                        break;
                    }
                }
                accepted.ok_or(StitError::SamplingFailure { proposals: MAX_REJECTIONS })?
            }
        };
        let (lo, hi) = body.extent(direction.coords());
        if hi - lo <= 2.0 * TOL {
            return Err(StitError::SamplingFailure { proposals: 0 });
        }
        // Displacements within TOL of the boundary would produce a sliver that
        // the split refuses; they have probability ~1e-9 and are redrawn.
        loop {
            let t = lo + (hi - lo) * rng.random::<f64>();
            if t > lo + TOL && t < hi - TOL {
                return Ok(Hyperplane::new(direction, t));
            }
        }
    }

    /// Support function summary of the associated zonoid of `lifetime * Lambda`.
    pub fn zonoid(&self, lifetime: f64) -> Result<ZonoidSummary> {
        if !(lifetime > 0.0 && lifetime.is_finite()) {
            return Err(StitError::InvalidParameter("lifetime must be positive".into()));
        }
        let f = |v: &[f64]| self.segment_functional(v);
        let (lo, hi) = match (&self.kind, self.dim) {
            (Kind::Isotropic(_), _) | (_, 1) => {
                let c = f(Direction::axis(self.dim, 0).coords());
                (c, c)
            }
            (Kind::Discrete(atoms), 2) => extremes_planar(&f, atoms),
            _ => extremes_sphere(&f, self.dim),
        };
        Ok(ZonoidSummary {
            hmin: 0.5 * lifetime * lo,
            hmax: 0.5 * lifetime * hi,
            lifetime,
            measure: self.clone(),
        })
    }
}

/// Associated zonoid of `lifetime * Lambda`, with support function
/// `v -> (lifetime / 2) Lambda([[0, v]])`.
#[derive(Clone, Debug)]
pub struct ZonoidSummary {
    /// Estimated minimum of the support function over the unit sphere.
    pub hmin: f64,
    /// Estimated maximum of the support function over the unit sphere.
    pub hmax: f64,
    pub lifetime: f64,
    measure: DirectionalDistribution,
}

impl ZonoidSummary {
    pub fn evaluate(&self, v: &[f64]) -> f64 {
        0.5 * self.lifetime * self.measure.segment_functional(v)
    }
}

fn random_unit<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Direction {
    if dim == 2 {
        let th = 2.0 * PI * rng.random::<f64>();
        return Direction::from_unit(vec![th.cos(), th.sin()]).unwrap_or_else(|_| Direction::axis(2, 0));
    }
    loop {
        let g: Vec<f64> = (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        if norm(&g) > 1e-12 {
            return Direction::new(g).expect("nonzero");
        }
    }
}

/// Planar extremes: the minimum of a sum of `|cos|` terms sits at a kink
/// (a direction orthogonal to an atom); the maximum is refined from a dense
/// scan by golden-section search.
fn extremes_planar(f: &dyn Fn(&[f64]) -> f64, atoms: &[Atom]) -> (f64, f64) {
    let at = |th: f64| f(&[th.cos(), th.sin()]);
    let mut lo = f64::INFINITY;
    for a in atoms {
        let c = a.direction.coords();
        lo = lo.min(f(&[-c[1], c[0]]));
    }
    let n = 3600;
    let step = PI / n as f64;
    let (mut best_th, mut hi) = (0.0, f64::NEG_INFINITY);
    for k in 0..n {
        let th = k as f64 * step;
        let v = at(th);
        lo = lo.min(v);
        if v > hi {
            hi = v;
            best_th = th;
        }
    }
    let (mut a, mut b) = (best_th - step, best_th + step);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..80 {
        let (c, d) = (b - g * (b - a), a + g * (b - a));
        if at(c) > at(d) {
            b = d;
        } else {
            a = c;
        }
    }
    (lo, hi.max(at(0.5 * (a + b))))
}

/// Extremes over S^{d-1} for d >= 3: a spherical-Fibonacci-style scan
/// followed by shrinking local search around the best candidates.
fn extremes_sphere(f: &dyn Fn(&[f64]) -> f64, dim: usize) -> (f64, f64) {
    let mut rng = crate::rng::stream(0x5A4F_4E4F_4944);
    let starts: Vec<Direction> = (0..20_000).map(|_| random_unit(dim, &mut rng)).collect();
    let refine = |sign: f64, rng: &mut crate::rng::Stream| {
        let mut best = starts
            .iter()
            .max_by(|a, b| (sign * f(a.coords())).total_cmp(&(sign * f(b.coords()))))
            .expect("nonempty")
            .clone();
        let mut val = sign * f(best.coords());
        let mut radius = 0.05;
        while radius > 1e-9 {
            let mut improved = false;
            for _ in 0..64 {
                let step = random_unit(dim, rng);
                let cand: Vec<f64> =
                    best.coords().iter().zip(step.coords()).map(|(a, b)| a + radius * b).collect();
                let cand = Direction::new(cand).expect("nonzero");
                let v = sign * f(cand.coords());
                if v > val {
                    val = v;
                    best = cand;
                    improved = true;
                }
            }
            if !improved {
                radius *= 0.5;
            }
        }
        sign * val
    };
    let hi = refine(1.0, &mut rng);
    let lo = refine(-1.0, &mut rng);
    (lo, hi)
}

/// Product quadrature for the normalized measure on S^{d-1}, d >= 2.
///
/// Built recursively from `u = (cos t, sin t * w)`, `w` on S^{d-2`, with
/// density proportional to `sin^{d-2} t`. Polar angles use composite
/// 4-point Gauss-Legendre panels (robust to the kinks of a width function);
/// the last circle uses the trapezoid rule. Weights sum to one.
#[derive(Debug)]
pub struct SphereRule {
    nodes: Vec<Vec<f64>>,
    weights: Vec<f64>,
}

impl SphereRule {
    fn new(dim: usize) -> Self {
        let (panels, circle) = match dim {
            0..=2 => (0, 4096),
            3 => (64, 512),
            _ => (20, 160),
        };
        let mut nodes: Vec<Vec<f64>> = Vec::new();
        let mut weights: Vec<f64> = Vec::new();
        if dim >= 2 {
            for k in 0..circle {
                let th = 2.0 * PI * k as f64 / circle as f64;
                nodes.push(vec![th.cos(), th.sin()]);
                weights.push(1.0);
            }
        }
        for level in 3..=dim {
            let polar = composite_gauss_legendre(0.0, PI, panels);
            let mut next_nodes = Vec::with_capacity(nodes.len() * polar.len());
            let mut next_weights = Vec::with_capacity(nodes.len() * polar.len());
            for (t, wt) in &polar {
                let (c, s) = (t.cos(), t.sin());
                let jac = wt * s.powi(level as i32 - 2);
                for (w, ww) in nodes.iter().zip(&weights) {
                    let mut u = Vec::with_capacity(level);
                    u.push(c);
                    u.extend(w.iter().map(|x| s * x));
                    next_nodes.push(u);
                    next_weights.push(jac * ww);
                }
            }
            nodes = next_nodes;
            weights = next_weights;
        }
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);
        Self { nodes, weights }
    }

    /// Mean of `f` under the normalized spherical measure.
    pub fn mean(&self, f: impl Fn(&[f64]) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(u, w)| w * f(u)).sum()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

fn composite_gauss_legendre(a: f64, b: f64, panels: usize) -> Vec<(f64, f64)> {
    // 4-point Gauss-Legendre on [-1, 1].
    let x1 = (3.0 / 7.0 - 2.0 / 7.0 * (6.0f64 / 5.0).sqrt()).sqrt();
    let x2 = (3.0 / 7.0 + 2.0 / 7.0 * (6.0f64 / 5.0).sqrt()).sqrt();
    let w1 = (18.0 + 30f64.sqrt()) / 36.0;
    let w2 = (18.0 - 30f64.sqrt()) / 36.0;
    let base = [(-x2, w2), (-x1, w1), (x1, w1), (x2, w2)];
    let h = (b - a) / panels as f64;
    (0..panels)
        .flat_map(|p| {
            let mid = a + (p as f64 + 0.5) * h;
            base.iter().map(move |(x, w)| (mid + 0.5 * h * x, 0.5 * h * w))
        })
        .collect()
}

/// JSON measure description accepted by the command line tools.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum MeasureSpec {
    Mondrian { d: usize },
    Isotropic { d: usize },
    /// Rows are normalized on load; weights default to uniform.
    Directions {
        vectors: Vec<Vec<f64>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        weights: Option<Vec<f64>>,
    },
}

impl MeasureSpec {
    pub fn dim(&self) -> usize {
        match self {
            Self::Mondrian { d } | Self::Isotropic { d } => *d,
            Self::Directions { vectors, .. } => vectors.first().map_or(0, Vec::len),
        }
    }

    pub fn build(&self) -> Result<DirectionalDistribution> {
        match self {
            Self::Mondrian { d } => DirectionalDistribution::mondrian(*d),
            Self::Isotropic { d } => DirectionalDistribution::isotropic(*d),
            Self::Directions { vectors, weights } => {
                let rows = vectors
                    .iter()
                    .map(|v| Direction::new(v.clone()).map(Vec::from))
                    .collect::<Result<Vec<_>>>()
                    .map_err(|e| StitError::InvalidMeasure(e.to_string()))?;
                match weights {
                    None => DirectionalDistribution::from_directions(&rows),
                    Some(w) => DirectionalDistribution::weighted(&rows, w),
                }
            }
        }
    }
}

/// The three-direction planar measure with `u1 = e1`, `u2 = e2` and
/// `u3 = (1, 1)/sqrt 2`, uniform weights.
pub fn three_direction_example() -> DirectionalDistribution {
    DirectionalDistribution::from_directions(&three_direction_rows()).expect("valid rows")
}

/// Rows of the three-direction example.
pub fn three_direction_rows() -> Vec<Vec<f64>> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    vec![vec![1.0, 0.0], vec![0.0, 1.0], vec![s, s]]
}
