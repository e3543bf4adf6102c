//! Exact convex geometry for tessellation cells.
//!
//! A [`Polytope`] carries both its halfspace list (`<u, x> <= c`) and its
//! vertex list. Support functions and displacement sampling read the
//! vertices; point location reads the halfspaces. Splits update both.
//!
//! Conventions
//! - On-hyperplane classification uses [`TOL`]. Points within tolerance of a
//!   cutting hyperplane belong to the positive side (`<u, x> >= t`).
//! - In d = 2 vertices are stored counterclockwise.
//! - Axis-aligned boxes keep their bounds and stay boxes under axis cuts.

use crate::error::{Result, StitError};
use crate::rng;
use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Tolerance for on-hyperplane and membership tests.
pub const TOL: f64 = 1e-9;

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// A unit vector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Direction(Vec<f64>);

impl Direction {
    /// Normalizes a nonzero vector.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        let n = norm(&coords);
        if coords.is_empty() || !n.is_finite() || n == 0.0 {
            return Err(StitError::InvalidParameter(
                "direction must be a finite nonzero vector".into(),
            ));
        }
        Ok(Self(coords.into_iter().map(|c| c / n).collect()))
    }

    /// Accepts a vector that is already of unit length (within 1e-12).
    pub fn from_unit(coords: Vec<f64>) -> Result<Self> {
        let n = norm(&coords);
        if coords.is_empty() || (n - 1.0).abs() > 1e-12 {
            return Err(StitError::InvalidParameter(format!(
                "direction has norm {n}, expected 1"
            )));
        }
        Ok(Self(coords))
    }

    /// The `i`-th standard basis vector of R^dim.
    pub fn axis(dim: usize, i: usize) -> Self {
        let mut c = vec![0.0; dim];
        c[i] = 1.0;
        Self(c)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn neg(&self) -> Self {
        Self(self.0.iter().map(|c| -c).collect())
    }

    #[inline]
    pub fn dot(&self, x: &[f64]) -> f64 {
        dot(&self.0, x)
    }

    /// Index of the single nonzero coordinate, if the direction is a signed axis.
    fn axis_index(&self) -> Option<(usize, f64)> {
        let mut found = None;
        for (i, &c) in self.0.iter().enumerate() {
            if c != 0.0 {
                if found.is_some() {
                    return None;
                }
                found = Some((i, c.signum()));
            }
        }
        found
    }
}

impl TryFrom<Vec<f64>> for Direction {
    type Error = StitError;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Direction::new(v)
    }
}

impl From<Direction> for Vec<f64> {
    fn from(d: Direction) -> Self {
        d.0
    }
}

impl AsRef<[f64]> for Direction {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

/// The hyperplane `{x : <x, normal> = offset}`.
///
/// `(u, t)` and `(-u, -t)` describe the same set; equality compares the
/// canonical forms, in which the first nonzero normal coordinate is positive.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Hyperplane {
    normal: Direction,
    offset: f64,
}

impl Hyperplane {
    pub fn new(normal: Direction, offset: f64) -> Self {
        Self { normal, offset }
    }

    pub fn normal(&self) -> &Direction {
        &self.normal
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// `<x, u> - t`; positive on the positive side.
    #[inline]
    pub fn signed_distance(&self, x: &[f64]) -> f64 {
        self.normal.dot(x) - self.offset
    }

    pub fn canonical(&self) -> Self {
        let flip = self
            .normal
            .coords()
            .iter()
            .find(|c| **c != 0.0)
            .is_some_and(|c| *c < 0.0);
        if flip {
            Self::new(self.normal.neg(), -self.offset)
        } else {
            self.clone()
        }
    }
}

impl PartialEq for Hyperplane {
    fn eq(&self, other: &Self) -> bool {
        let (a, b) = (self.canonical(), other.canonical());
        a.normal == b.normal && a.offset == b.offset
    }
}

/// The closed halfspace `<x, normal> <= offset`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Halfspace {
    pub normal: Direction,
    pub offset: f64,
}

impl Halfspace {
    #[inline]
    pub fn slack(&self, x: &[f64]) -> f64 {
        self.offset - self.normal.dot(x)
    }
}

/// Anything with a support function.
pub trait ConvexBody {
    fn dim(&self) -> usize;

    /// `(min <u, x>, max <u, x>)` over the body, i.e. `(-h(-u), h(u))`.
    fn extent(&self, u: &[f64]) -> (f64, f64);

    /// Support function `h(u) = sup <u, x>`.
    fn support(&self, u: &[f64]) -> f64 {
        self.extent(u).1
    }

    /// `h(u) + h(-u)`.
    fn width(&self, u: &[f64]) -> f64 {
        let (lo, hi) = self.extent(u);
        hi - lo
    }

    /// Boundary length, for planar bodies where it is known in closed form.
    fn perimeter(&self) -> Option<f64> {
        None
    }

    /// Width averaged over the unit sphere, where known in closed form.
    fn mean_width(&self) -> Option<f64> {
        None
    }
}

/// Line segment `[a, b]`; `a == b` is allowed.
#[derive(Clone, Debug, PartialEq)]
pub struct Segment {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

impl Segment {
    pub fn new(a: Vec<f64>, b: Vec<f64>) -> Self {
        assert_eq!(a.len(), b.len(), "segment endpoints differ in dimension");
        Self { a, b }
    }
}

impl ConvexBody for Segment {
    fn dim(&self) -> usize {
        self.a.len()
    }

    fn extent(&self, u: &[f64]) -> (f64, f64) {
        let (p, q) = (dot(u, &self.a), dot(u, &self.b));
        (p.min(q), p.max(q))
    }

    fn perimeter(&self) -> Option<f64> {
        (self.dim() == 2).then(|| 2.0 * norm(&sub(&self.b, &self.a)))
    }
}

/// Euclidean ball.
#[derive(Clone, Debug, PartialEq)]
pub struct Ball {
    pub center: Vec<f64>,
    pub radius: f64,
}

impl ConvexBody for Ball {
    fn dim(&self) -> usize {
        self.center.len()
    }

    fn extent(&self, u: &[f64]) -> (f64, f64) {
        let c = dot(u, &self.center);
        let r = self.radius * norm(u);
        (c - r, c + r)
    }

    fn perimeter(&self) -> Option<f64> {
        (self.dim() == 2).then_some(2.0 * PI * self.radius)
    }

    fn mean_width(&self) -> Option<f64> {
        Some(2.0 * self.radius)
    }
}

/// Volume of a cell, with its provenance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VolumeEstimate {
    pub value: f64,
    /// Zero for exact volumes.
    pub std_error: f64,
    pub exact: bool,
    /// The body is flat (zero volume within tolerance).
    pub degenerate: bool,
}

#[derive(Clone, Debug, PartialEq)]
struct AxisBox {
    lo: Vec<f64>,
    hi: Vec<f64>,
}

/// Bounded, nonempty convex polytope.
#[derive(Clone, Debug, PartialEq)]
pub struct Polytope {
    dim: usize,
    halfspaces: Vec<Halfspace>,
    vertices: Vec<Vec<f64>>,
    bounds: Option<AxisBox>,
}

impl Polytope {
    /// Axis-aligned box `prod [lo_i, hi_i]`.
    pub fn cuboid(lo: &[f64], hi: &[f64]) -> Result<Self> {
        if lo.is_empty() || lo.len() != hi.len() {
            return Err(StitError::InvalidBody("box bounds must be nonempty and match".into()));
        }
        if lo.iter().zip(hi).any(|(l, h)| !(l.is_finite() && h.is_finite() && l < h)) {
            return Err(StitError::InvalidBody("box requires finite lo < hi".into()));
        }
        Ok(Self::from_box(AxisBox { lo: lo.to_vec(), hi: hi.to_vec() }))
    }

    /// `[0, 1]^d`.
    pub fn unit_cube(dim: usize) -> Self {
        Self::cuboid(&vec![0.0; dim], &vec![1.0; dim]).expect("dim >= 1")
    }

    /// `[-r, r]^d`.
    pub fn centered_cube(dim: usize, half_side: f64) -> Result<Self> {
        Self::cuboid(&vec![-half_side; dim], &vec![half_side; dim])
    }

    fn from_box(b: AxisBox) -> Self {
        let dim = b.lo.len();
        let mut halfspaces = Vec::with_capacity(2 * dim);
        for i in 0..dim {
            let e = Direction::axis(dim, i);
            halfspaces.push(Halfspace { normal: e.neg(), offset: -b.lo[i] });
            halfspaces.push(Halfspace { normal: e, offset: b.hi[i] });
        }
        let vertices = if dim == 2 {
            vec![
                vec![b.lo[0], b.lo[1]],
                vec![b.hi[0], b.lo[1]],
                vec![b.hi[0], b.hi[1]],
                vec![b.lo[0], b.hi[1]],
            ]
        } else {
            (0..1usize << dim)
                .map(|mask| {
                    (0..dim)
                        .map(|i| if mask >> i & 1 == 1 { b.hi[i] } else { b.lo[i] })
                        .collect()
                })
                .collect()
        };
        Self { dim, halfspaces, vertices, bounds: Some(b) }
    }

    /// Convex hull of planar points (counterclockwise, collinear points dropped).
    pub fn convex_polygon(points: &[[f64; 2]]) -> Result<Self> {
        let mut pts: Vec<[f64; 2]> = points.to_vec();
        if pts.iter().any(|p| !(p[0].is_finite() && p[1].is_finite())) {
            return Err(StitError::InvalidBody("non-finite polygon point".into()));
        }
        pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
        pts.dedup();
        // Sine of the turn angle, so the collinearity test is scale free.
        let cross = |o: [f64; 2], a: [f64; 2], b: [f64; 2]| {
            let (u, v) = ([a[0] - o[0], a[1] - o[1]], [b[0] - o[0], b[1] - o[1]]);
            (u[0] * v[1] - u[1] * v[0]) / (u[0].hypot(u[1]) * v[0].hypot(v[1]))
        };
        let mut hull: Vec<[f64; 2]> = Vec::with_capacity(2 * pts.len());
        for pass in 0..2 {
            let start = hull.len();
            let iter: Box<dyn Iterator<Item = &[f64; 2]>> =
                if pass == 0 { Box::new(pts.iter()) } else { Box::new(pts.iter().rev()) };
            for &p in iter {
                while hull.len() >= start + 2
                    && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= TOL
                {
                    hull.pop();
                }
                hull.push(p);
            }
            hull.pop();
        }
        if hull.len() < 3 {
            return Err(StitError::InvalidBody("polygon needs three non-collinear points".into()));
        }
        let vertices: Vec<Vec<f64>> = hull.iter().map(|p| p.to_vec()).collect();
        let halfspaces = polygon_halfspaces(&vertices)?;
        Ok(Self { dim: 2, halfspaces, vertices, bounds: None })
    }

    /// Builds a polytope from both representations, checking that every
    /// vertex satisfies every halfspace. Planar vertices are reordered
    /// counterclockwise.
    pub fn from_parts(
        dim: usize,
        halfspaces: Vec<Halfspace>,
        mut vertices: Vec<Vec<f64>>,
    ) -> Result<Self> {
        if vertices.is_empty() {
            return Err(StitError::InvalidBody("empty vertex list".into()));
        }
        if vertices.iter().any(|v| v.len() != dim || v.iter().any(|c| !c.is_finite()))
            || halfspaces.iter().any(|h| h.normal.dim() != dim)
        {
            return Err(StitError::InvalidBody("inconsistent dimensions".into()));
        }
        for v in &vertices {
            if halfspaces.iter().any(|h| h.slack(v) < -TOL) {
                return Err(StitError::InvalidBody("vertex violates a halfspace".into()));
            }
        }
        if dim == 2 {
            sort_ccw(&mut vertices);
        }
        Ok(Self { dim, halfspaces, vertices, bounds: None })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[Vec<f64>] {
        &self.vertices
    }

    pub fn halfspaces(&self) -> &[Halfspace] {
        &self.halfspaces
    }

    pub fn is_box(&self) -> bool {
        self.bounds.is_some()
    }

    /// `(lo, hi)` for axis-aligned boxes.
    pub fn box_bounds(&self) -> Option<(&[f64], &[f64])> {
        self.bounds.as_ref().map(|b| (b.lo.as_slice(), b.hi.as_slice()))
    }

    /// Smallest axis-aligned box containing the vertices.
    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        let mut lo = vec![f64::INFINITY; self.dim];
        let mut hi = vec![f64::NEG_INFINITY; self.dim];
        for v in &self.vertices {
            for i in 0..self.dim {
                lo[i] = lo[i].min(v[i]);
                hi[i] = hi[i].max(v[i]);
            }
        }
        (lo, hi)
    }

    /// Largest distance between two vertices.
    pub fn diameter(&self) -> f64 {
        if let Some(b) = &self.bounds {
            return norm(&sub(&b.hi, &b.lo));
        }
        let mut best = 0.0f64;
        for (i, a) in self.vertices.iter().enumerate() {
            for b in &self.vertices[i + 1..] {
                best = best.max(norm(&sub(a, b)));
            }
        }
        best
    }

    /// Membership, with every halfspace relaxed by [`TOL`].
    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim && self.halfspaces.iter().all(|h| h.slack(x) >= -TOL)
    }

    /// Translate by `z`.
    pub fn translate(&self, z: &[f64]) -> Self {
        let shift = |v: &Vec<f64>| v.iter().zip(z).map(|(a, b)| a + b).collect::<Vec<_>>();
        Self {
            dim: self.dim,
            halfspaces: self
                .halfspaces
                .iter()
                .map(|h| Halfspace { normal: h.normal.clone(), offset: h.offset + h.normal.dot(z) })
                .collect(),
            vertices: self.vertices.iter().map(shift).collect(),
            bounds: self.bounds.as_ref().map(|b| AxisBox { lo: shift(&b.lo), hi: shift(&b.hi) }),
        }
    }

    /// Splits along `plane` into `(negative side, positive side)`, i.e.
    /// `(<x,u> <= t, <x,u> >= t)`.
    pub fn split(&self, plane: &Hyperplane) -> Result<(Polytope, Polytope)> {
        if plane.normal.dim() != self.dim {
            return Err(StitError::DimensionMismatch { expected: self.dim, got: plane.normal.dim() });
        }
        if let (Some(b), Some((axis, sign))) = (&self.bounds, plane.normal.axis_index()) {
            return split_box(b, axis, sign * plane.offset, sign > 0.0);
        }
        let s: Vec<f64> = self.vertices.iter().map(|v| plane.signed_distance(v)).collect();
        let has_neg = s.iter().any(|&v| v < -TOL);
        let has_pos = s.iter().any(|&v| v > TOL);
        if !(has_neg && has_pos) {
            return Err(StitError::NoSplit);
        }
        let lower = Halfspace { normal: plane.normal.clone(), offset: plane.offset };
        let upper = Halfspace { normal: plane.normal.neg(), offset: -plane.offset };
        if self.dim == 2 {
            let left = clip_polygon(&self.vertices, &s, 1.0);
            let right = clip_polygon(&self.vertices, &s, -1.0);
            Ok((self.child(left, lower), self.child(right, upper)))
        } else {
            let crossings = self.edge_crossings(&s);
            let pick = |sign: f64| -> Vec<Vec<f64>> {
                self.vertices
                    .iter()
                    .zip(&s)
                    .filter(|(_, &sv)| sign * sv <= TOL)
                    .map(|(v, _)| v.clone())
                    .chain(crossings.iter().cloned())
                    .collect()
            };
            Ok((self.child(pick(1.0), lower), self.child(pick(-1.0), upper)))
        }
    }

    fn child(&self, vertices: Vec<Vec<f64>>, cut: Halfspace) -> Polytope {
        let mut halfspaces: Vec<Halfspace> = self.halfspaces.clone();
        halfspaces.push(cut);
        // A facet has at least `dim` vertices on it; anything else is redundant.
        halfspaces.retain(|h| {
            vertices.iter().filter(|v| h.slack(v).abs() <= TOL).count() >= self.dim
        });
        Polytope { dim: self.dim, halfspaces, vertices, bounds: None }
    }

    /// Intersections of the plane with edges whose endpoints lie strictly on
    /// opposite sides. Two vertices span an edge iff the normals of their
    /// common active constraints have rank `dim - 1`.
    fn edge_crossings(&self, s: &[f64]) -> Vec<Vec<f64>> {
        let active: Vec<Vec<usize>> = self
            .vertices
            .iter()
            .map(|v| {
                (0..self.halfspaces.len())
                    .filter(|&k| self.halfspaces[k].slack(v).abs() <= TOL)
                    .collect()
            })
            .collect();
        let mut out: Vec<Vec<f64>> = Vec::new();
        for (i, a) in self.vertices.iter().enumerate() {
            if s[i] >= -TOL {
                continue;
            }
            for (j, b) in self.vertices.iter().enumerate() {
                if s[j] <= TOL {
                    continue;
                }
                let common: Vec<usize> =
                    active[i].iter().copied().filter(|k| active[j].contains(k)).collect();
                if common.len() + 1 < self.dim {
                    continue;
                }
                let m = DMatrix::from_fn(common.len(), self.dim, |r, c| {
                    self.halfspaces[common[r]].normal.coords()[c]
                });
                if m.rank(1e-10) + 1 != self.dim {
                    continue;
                }
                let lam = s[i] / (s[i] - s[j]);
                let p: Vec<f64> = a.iter().zip(b).map(|(x, y)| x + lam * (y - x)).collect();
                if !out.iter().any(|q| norm(&sub(q, &p)) <= TOL) {
                    out.push(p);
                }
            }
        }
        out
    }

    /// Volume: exact for boxes and polygons, Monte Carlo otherwise.
    pub fn volume(&self) -> Result<VolumeEstimate> {
        if self.vertices.is_empty() || self.vertices.iter().flatten().any(|c| !c.is_finite()) {
            return Err(StitError::InvalidBody("body has no finite vertices".into()));
        }
        let (lo, hi) = self.bounding_box();
        let scale = norm(&sub(&hi, &lo)).max(f64::MIN_POSITIVE);
        let flat_threshold = TOL * scale.powi(self.dim as i32 - 1);
        let exact = |value: f64| {
            let degenerate = value <= flat_threshold;
            VolumeEstimate { value: if degenerate { 0.0 } else { value }, std_error: 0.0, exact: true, degenerate }
        };
        if let Some(b) = &self.bounds {
            return Ok(exact(b.lo.iter().zip(&b.hi).map(|(l, h)| h - l).product()));
        }
        match self.dim {
            1 => Ok(exact(hi[0] - lo[0])),
            2 => Ok(exact(shoelace(&self.vertices))),
            _ => Ok(self.monte_carlo_volume(&lo, &hi, flat_threshold)),
        }
    }

    /// Rejection estimate over the bounding box, stopping once the standard
    /// error falls to 0.5% of the estimate. Seeded from the vertex bits.
    fn monte_carlo_volume(&self, lo: &[f64], hi: &[f64], flat_threshold: f64) -> VolumeEstimate {
        const BATCH: usize = 10_000;
        const CAP: usize = 10_000_000;
        let box_vol: f64 = lo.iter().zip(hi).map(|(l, h)| h - l).product();
        if box_vol <= flat_threshold {
            return VolumeEstimate { value: 0.0, std_error: 0.0, exact: false, degenerate: true };
        }
        let key = self
            .vertices
            .iter()
            .flatten()
            .fold(0x564F_4C55_4D45u64, |k, c| rng::derive(k, c.to_bits()));
        let mut stream = rng::stream(key);
        let mut x = vec![0.0; self.dim];
        let (mut hits, mut total) = (0usize, 0usize);
        loop {
            for _ in 0..BATCH {
                for i in 0..self.dim {
                    x[i] = lo[i] + (hi[i] - lo[i]) * stream.random::<f64>();
                }
                if self.halfspaces.iter().all(|h| h.slack(&x) >= 0.0) {
                    hits += 1;
                }
            }
            total += BATCH;
            let p = hits as f64 / total as f64;
            let value = box_vol * p;
            let std_error = box_vol * (p * (1.0 - p) / total as f64).sqrt();
            if (hits > 0 && std_error <= 0.005 * value) || total >= CAP {
                return VolumeEstimate {
                    value,
                    std_error,
                    exact: false,
                    degenerate: value <= flat_threshold,
                };
            }
        }
    }
}

impl ConvexBody for Polytope {
    fn dim(&self) -> usize {
        self.dim
    }

    fn extent(&self, u: &[f64]) -> (f64, f64) {
        if let Some(b) = &self.bounds {
            let (mut lo, mut hi) = (0.0, 0.0);
            for i in 0..self.dim {
                let (p, q) = (u[i] * b.lo[i], u[i] * b.hi[i]);
                lo += p.min(q);
                hi += p.max(q);
            }
            return (lo, hi);
        }
        self.vertices.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            let p = dot(u, v);
            (lo.min(p), hi.max(p))
        })
    }

    fn perimeter(&self) -> Option<f64> {
        if self.dim != 2 {
            return None;
        }
        let n = self.vertices.len();
        Some((0..n).map(|i| norm(&sub(&self.vertices[(i + 1) % n], &self.vertices[i]))).sum())
    }

    /// In three dimensions, `(1 / 4 pi) sum_e length(e) * angle(e)` over the
    /// edges, with `angle(e)` the angle between the outer normals of the two
    /// facets meeting at `e`.
    fn mean_width(&self) -> Option<f64> {
        if self.dim != 3 {
            return None;
        }
        let on: Vec<Vec<usize>> = self
            .halfspaces
            .iter()
            .map(|h| (0..self.vertices.len()).filter(|&k| h.slack(&self.vertices[k]).abs() <= TOL).collect())
            .collect();
        let mut total = 0.0;
        for i in 0..self.halfspaces.len() {
            for j in i + 1..self.halfspaces.len() {
                let shared: Vec<usize> = on[i].iter().copied().filter(|k| on[j].contains(k)).collect();
                if shared.len() < 2 {
                    continue;
                }
                let mut length: f64 = 0.0;
                for (a, &p) in shared.iter().enumerate() {
                    for &q in &shared[a + 1..] {
                        length = length.max(norm(&sub(&self.vertices[p], &self.vertices[q])));
                    }
                }
                // Halfspaces are `<n, x> <= c`, so `n` is the outer normal.
                let cos = dot(self.halfspaces[i].normal.coords(), self.halfspaces[j].normal.coords()).clamp(-1.0, 1.0);
                total += length * cos.acos();
            }
        }
        Some(total / (4.0 * PI))
    }
}

fn split_box(b: &AxisBox, axis: usize, cut: f64, positive_normal: bool) -> Result<(Polytope, Polytope)> {
    if !(cut > b.lo[axis] + TOL && cut < b.hi[axis] - TOL) {
        return Err(StitError::NoSplit);
    }
    let mut below = b.clone();
    below.hi[axis] = cut;
    let mut above = b.clone();
    above.lo[axis] = cut;
    let (below, above) = (Polytope::from_box(below), Polytope::from_box(above));
    // `<x, -e> <= t` is the upper part of the axis.
    Ok(if positive_normal { (below, above) } else { (above, below) })
}

/// Sutherland-Hodgman against one line, keeping `sign * s <= TOL`.
fn clip_polygon(vertices: &[Vec<f64>], s: &[f64], sign: f64) -> Vec<Vec<f64>> {
    let n = vertices.len();
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(n + 2);
    for i in 0..n {
        let j = (i + 1) % n;
        let (sa, sb) = (sign * s[i], sign * s[j]);
        if sa <= TOL {
            out.push(vertices[i].clone());
        }
        if (sa < -TOL && sb > TOL) || (sa > TOL && sb < -TOL) {
            let lam = s[i] / (s[i] - s[j]);
            let (a, b) = (&vertices[i], &vertices[j]);
            out.push(vec![a[0] + lam * (b[0] - a[0]), a[1] + lam * (b[1] - a[1])]);
        }
    }
    out.dedup_by(|a, b| norm(&sub(a, b)) <= TOL);
    if out.len() > 1 && norm(&sub(&out[0], &out[out.len() - 1])) <= TOL {
        out.pop();
    }
    out
}

fn shoelace(vertices: &[Vec<f64>]) -> f64 {
    let n = vertices.len();
    let twice: f64 = (0..n)
        .map(|i| {
            let (a, b) = (&vertices[i], &vertices[(i + 1) % n]);
            a[0] * b[1] - a[1] * b[0]
        })
        .sum();
    0.5 * twice.abs()
}

fn sort_ccw(vertices: &mut [Vec<f64>]) {
    let n = vertices.len() as f64;
    let cx = vertices.iter().map(|v| v[0]).sum::<f64>() / n;
    let cy = vertices.iter().map(|v| v[1]).sum::<f64>() / n;
    vertices.sort_by(|a, b| {
        let ta = (a[1] - cy).atan2(a[0] - cx);
        let tb = (b[1] - cy).atan2(b[0] - cx);
        ta.total_cmp(&tb)
    });
}

fn polygon_halfspaces(ccw: &[Vec<f64>]) -> Result<Vec<Halfspace>> {
    let n = ccw.len();
    (0..n)
        .map(|i| {
            let (a, b) = (&ccw[i], &ccw[(i + 1) % n]);
            // Outward normal of a counterclockwise edge.
            let normal = Direction::new(vec![b[1] - a[1], a[0] - b[0]])?;
            let offset = normal.dot(a);
            Ok(Halfspace { normal, offset })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    const S: f64 = std::f64::consts::FRAC_1_SQRT_2;

    fn square() -> Polytope {
        Polytope::centered_cube(2, 0.5).unwrap()
    }

    fn diag() -> Direction {
        Direction::from_unit(vec![S, S]).unwrap()
    }

    #[test]
    fn support_and_width_of_square() {
        let sq = square();
        assert_eq!(sq.support(&[1.0, 0.0]), 0.5);
        assert!((sq.support(diag().coords()) - S).abs() < 1e-15);
        assert_eq!(Polytope::unit_cube(2).width(&[0.0, 1.0]), 1.0);
        assert!((sq.width(diag().coords()) - 2f64.sqrt()).abs() < 1e-15);
        let ball = Ball { center: vec![0.3, -2.0], radius: 0.5 };
        for th in [0.0, 0.4, 2.0] {
            assert!((ball.width(&[f64::cos(th), f64::sin(th)]) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn support_is_translation_equivariant() {
        let poly = Polytope::convex_polygon(&[[0.0, 0.0], [2.0, 0.3], [1.0, 1.7], [-0.4, 1.0]]).unwrap();
        let z = [0.7, -1.3];
        let moved = poly.translate(&z);
        for th in [0.1, 1.0, 2.5, 4.0] {
            let u = [f64::cos(th), f64::sin(th)];
            assert!((moved.support(&u) - poly.support(&u) - dot(&u, &z)).abs() < 1e-12);
        }
    }

    #[test]
    fn empty_vertex_list_is_invalid() {
        assert!(matches!(Polytope::from_parts(2, vec![], vec![]), Err(StitError::InvalidBody(_))));
    }

    #[test]
    fn hyperplane_canonical_equality() {
        let h = Hyperplane::new(diag(), 0.2);
        let g = Hyperplane::new(diag().neg(), -0.2);
        assert_eq!(h, g);
        assert_ne!(h, Hyperplane::new(diag(), -0.2));
    }

    #[test]
    fn box_round_trips() {
        let b = Polytope::cuboid(&[0.0, -1.0, 2.0], &[1.0, 1.0, 5.0]).unwrap();
        assert_eq!(b.halfspaces().len(), 6);
        assert_eq!(b.vertices().len(), 8);
        for v in b.vertices() {
            assert!(b.contains(v));
        }
        let (lo, hi) = b.bounding_box();
        assert_eq!(lo, vec![0.0, -1.0, 2.0]);
        assert_eq!(hi, vec![1.0, 1.0, 5.0]);
        assert_eq!(b.volume().unwrap().value, 6.0);
    }

    #[test]
    fn split_square_by_axis_and_diagonal() {
        let sq = square();
        let (l, r) = sq.split(&Hyperplane::new(Direction::axis(2, 0), 0.0)).unwrap();
        assert_eq!(l.volume().unwrap().value, 0.5);
        assert_eq!(r.volume().unwrap().value, 0.5);
        assert!(l.is_box() && r.is_box());
        let (l, r) = sq.split(&Hyperplane::new(diag(), 0.0)).unwrap();
        assert_eq!(l.vertices().len(), 3);
        assert_eq!(r.vertices().len(), 3);
        assert!((l.volume().unwrap().value - 0.5).abs() < 1e-15);
        assert!((r.volume().unwrap().value - 0.5).abs() < 1e-15);
        assert!(l.contains(&[-0.3, -0.3]) && !l.contains(&[0.3, 0.3]));
    }

    #[test]
    fn split_through_vertex_keeps_vertex_on_both_sides() {
        let sq = square();
        let anti = Direction::from_unit(vec![S, -S]).unwrap();
        let (l, r) = sq.split(&Hyperplane::new(anti, 0.0)).unwrap();
        assert_eq!(l.vertices().len(), 3);
        assert_eq!(r.vertices().len(), 3);
    }

    #[test]
    fn negative_axis_normal_orders_children() {
        let sq = Polytope::unit_cube(2);
        let (l, r) = sq.split(&Hyperplane::new(Direction::axis(2, 1).neg(), -0.25)).unwrap();
        // l: -y <= -0.25, i.e. y >= 0.25.
        assert!(l.contains(&[0.5, 0.9]) && !l.contains(&[0.5, 0.1]));
        assert!((l.volume().unwrap().value - 0.75).abs() < 1e-15);
        assert!((r.volume().unwrap().value - 0.25).abs() < 1e-15);
    }

    #[test]
    fn missing_hyperplane_is_no_split() {
        let sq = square();
        assert_eq!(sq.split(&Hyperplane::new(Direction::axis(2, 0), 0.7)), Err(StitError::NoSplit));
        assert_eq!(sq.split(&Hyperplane::new(diag(), S)), Err(StitError::NoSplit));
        assert_eq!(sq.split(&Hyperplane::new(Direction::axis(2, 0), 0.5)), Err(StitError::NoSplit));
    }

    #[test]
    fn volume_of_triangle_and_box() {
        let tri = Polytope::convex_polygon(&[[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]).unwrap();
        assert!((tri.volume().unwrap().value - 0.5).abs() < 1e-15);
        let b = Polytope::cuboid(&[0.0, 0.0], &[2.0, 1.0]).unwrap();
        assert_eq!(b.volume().unwrap().value, 2.0);
    }

    #[test]
    fn contains_square() {
        let sq = square();
        assert!(sq.contains(&[0.0, 0.0]));
        assert!(!sq.contains(&[0.6, 0.0]));
        assert!(sq.contains(&[0.5, 0.5]));
    }

    #[test]
    fn oblique_split_in_three_dimensions() {
        let cube = Polytope::unit_cube(3);
        let u = Direction::new(vec![1.0, 1.0, 1.0]).unwrap();
        let t = 1.5 / 3f64.sqrt();
        let (l, r) = cube.split(&Hyperplane::new(u.clone(), t)).unwrap();
        // The plane x+y+z = 1.5 cuts a regular hexagon.
        assert_eq!(l.vertices().len(), 4 + 6);
        assert_eq!(r.vertices().len(), 4 + 6);
        let (vl, vr) = (l.volume().unwrap(), r.volume().unwrap());
        assert!(!vl.exact);
        assert!((vl.value - 0.5).abs() < 3.0 * vl.std_error + 1e-12);
        assert!((vr.value - 0.5).abs() < 3.0 * vr.std_error + 1e-12);
        // Corner tetrahedron x+y+z <= 0.5 has volume 0.5^3/6.
        let (tet, _) = cube.split(&Hyperplane::new(u, 0.5 / 3f64.sqrt())).unwrap();
        assert_eq!(tet.vertices().len(), 4);
        let v = tet.volume().unwrap();
        assert!((v.value - 0.125 / 6.0).abs() < 3.0 * v.std_error);
        assert!(v.std_error <= 0.005 * v.value);
    }

    #[test]
    fn flat_polygon_is_degenerate() {
        let thin = Polytope::from_parts(
            2,
            vec![],
            vec![vec![0.0, 0.0], vec![1.0, 0.0], vec![0.5, 0.0]],
        )
        .unwrap();
        let v = thin.volume().unwrap();
        assert!(v.degenerate);
        assert_eq!(v.value, 0.0);
    }

    /// Polygon split whose child areas are checked against a rejection
    /// estimate of the parent with 10^6 points.
    #[test]
    fn random_cut_children_match_monte_carlo_area() {
        let mut stream = rng::stream(11);
        let pts: Vec<[f64; 2]> =
            (0..12).map(|_| [stream.random::<f64>(), stream.random::<f64>()]).collect();
        let poly = Polytope::convex_polygon(&pts).unwrap();
        let u = Direction::new(vec![0.3, 1.0]).unwrap();
        let (lo, hi) = poly.extent(u.coords());
        let plane = Hyperplane::new(u, 0.5 * (lo + hi));
        let (l, r) = poly.split(&plane).unwrap();
        let (vl, vr) = (l.volume().unwrap().value, r.volume().unwrap().value);
        let n = 1_000_000;
        let mut hits = 0usize;
        for _ in 0..n {
            let x = [stream.random::<f64>(), stream.random::<f64>()];
            // Membership from the hull's defining halfspaces only.
            if poly.halfspaces().iter().all(|h| h.slack(&x) >= 0.0) {
                hits += 1;
            }
        }
        let p = hits as f64 / n as f64;
        let se = (p * (1.0 - p) / n as f64).sqrt();
        assert!((vl + vr - p).abs() < 4.0 * se, "{} vs {p}", vl + vr);
        assert!((vl + vr - poly.volume().unwrap().value).abs() < 1e-12);
    }

    fn arb_cut() -> impl Strategy<Value = (f64, f64)> {
        (0.0..std::f64::consts::PI, 0.02..0.98f64)
    }

    proptest! {
        #[test]
        fn splits_conserve_area_and_partition_points(
            cuts in proptest::collection::vec(arb_cut(), 1..8),
            probes in proptest::collection::vec((0.0..1.0f64, 0.0..1.0f64), 20),
        ) {
            let window = Polytope::unit_cube(2);
            let mut leaves = vec![window];
            for (k, (angle, frac)) in cuts.iter().enumerate() {
                let idx = k % leaves.len();
                let cell = leaves.swap_remove(idx);
                let u = Direction::new(vec![angle.cos(), angle.sin()]).unwrap();
                let (lo, hi) = cell.extent(u.coords());
                let plane = Hyperplane::new(u, lo + frac * (hi - lo));
                match cell.split(&plane) {
                    Ok((a, b)) => {
                        for p in &probes {
                            let x = [p.0, p.1];
                            if cell.contains(&x) && plane.signed_distance(&x).abs() > 1e-7 {
                                prop_assert!(a.contains(&x) ^ b.contains(&x));
                            }
                        }
                        leaves.push(a);
                        leaves.push(b);
                    }
                    Err(_) => leaves.push(cell),
                }
            }
            let total: f64 = leaves.iter().map(|c| c.volume().unwrap().value).sum();
            prop_assert!((total - 1.0).abs() < 1e-9);
            for c in &leaves {
                for v in c.vertices() {
                    prop_assert!(c.contains(v));
                }
            }
        }

        #[test]
        fn support_is_sublinear(a in 0.0..6.3f64, b in 0.0..6.3f64, sa in 0.1..3.0f64, sb in 0.1..3.0f64) {
            let poly = Polytope::convex_polygon(&[[0.0, 0.0], [2.0, 0.3], [1.0, 1.7], [-0.4, 1.0]]).unwrap();
            let x = [sa * a.cos(), sa * a.sin()];
            let y = [sb * b.cos(), sb * b.sin()];
            let xy = [x[0] + y[0], x[1] + y[1]];
            prop_assert!(poly.support(&xy) <= poly.support(&x) + poly.support(&y) + 1e-12);
            let scaled = [2.5 * x[0], 2.5 * x[1]];
            prop_assert!((poly.support(&scaled) - 2.5 * poly.support(&x)).abs() < 1e-12);
            let neg = [-x[0], -x[1]];
            prop_assert!((poly.width(&x) - poly.width(&neg)).abs() < 1e-12);
        }
    }
}
