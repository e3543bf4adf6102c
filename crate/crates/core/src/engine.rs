//! STIT tessellations of a bounded window.
//!
//! A cell born at time `b` waits an exponential time with rate
//! `Lambda([C])`; if the clock rings before the lifetime it is cut by a
//! hyperplane drawn from the measure restricted to hyperplanes hitting it,
//! and both halves continue independently. Each node owns a random stream
//! keyed by `(seed, path)`, so a tree is a pure function of its inputs.

use crate::error::{Result, StitError};
use crate::geom::{Direction, Hyperplane, Polytope};
use crate::measure::DirectionalDistribution;
use crate::rng::{self, TAG_LEFT, TAG_RIGHT, TAG_ROOT};
use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::Exp1;
use serde::Serialize;

/// Side of a cut; `Right` is the positive side `<x, u> >= t`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Side {
    Left,
    Right,
}

/// Path from the root to a leaf.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct CellRef {
    pub path: Vec<Side>,
}

/// A timed hyperplane cut.
#[derive(Clone, Debug)]
pub struct Cut {
    pub hyperplane: Hyperplane,
    pub time: f64,
}

#[derive(Clone, Debug)]
enum Node {
    Internal { cut: Cut, left: usize, right: usize },
    Leaf { cell: Polytope, birth: f64, index: usize },
}

/// A leaf cell with its birth time.
#[derive(Clone, Copy, Debug)]
pub struct Leaf<'a> {
    pub index: usize,
    pub cell: &'a Polytope,
    pub birth: f64,
}

/// Realization of `Y(lifetime, window)`.
#[derive(Clone, Debug)]
pub struct TessellationTree {
    window: Polytope,
    lifetime: f64,
    measure: DirectionalDistribution,
    seed: u64,
    nodes: Vec<Node>,
    leaves: Vec<usize>,
}

impl TessellationTree {
    /// Simulates the tessellation up to `lifetime` (`0` gives the bare window).
    pub fn sample(
        measure: &DirectionalDistribution,
        lifetime: f64,
        window: &Polytope,
        seed: u64,
    ) -> Result<Self> {
        if !(lifetime >= 0.0 && lifetime.is_finite()) {
            return Err(StitError::InvalidParameter(format!("lifetime {lifetime} must be finite and >= 0")));
        }
        if window.dim() != measure.dim() {
            return Err(StitError::DimensionMismatch { expected: measure.dim(), got: window.dim() });
        }
        let mut tree = Self {
            window: window.clone(),
            lifetime,
            measure: measure.clone(),
            seed,
            nodes: Vec::new(),
            leaves: Vec::new(),
        };
        tree.grow(window.clone(), 0.0, rng::derive(seed, TAG_ROOT))?;
        Ok(tree)
    }

    fn grow(&mut self, cell: Polytope, birth: f64, key: u64) -> Result<usize> {
        let mut stream = rng::stream(key);
        let rate = self.measure.lambda_hit(&cell);
        if !rate.is_finite() || rate < 0.0 {
            return Err(StitError::NonFiniteRate(rate));
        }
        let wait: f64 = stream.sample(Exp1);
        let time = birth + wait / rate;
        if rate == 0.0 || time > self.lifetime {
            let index = self.leaves.len();
            self.nodes.push(Node::Leaf { cell, birth, index });
            self.leaves.push(self.nodes.len() - 1);
            return Ok(self.nodes.len() - 1);
        }
        let hyperplane = self.measure.sample_cut(&cell, &mut stream)?;
        let (lo, hi) = cell.split(&hyperplane)?;
        drop(cell);
        let id = self.nodes.len();
        self.nodes.push(Node::Internal {
            cut: Cut { hyperplane, time },
            left: usize::MAX,
            right: usize::MAX,
        });
        let left = self.grow(lo, time, rng::derive(key, TAG_LEFT))?;
        let right = self.grow(hi, time, rng::derive(key, TAG_RIGHT))?;
        if let Node::Internal { left: l, right: r, .. } = &mut self.nodes[id] {
            *l = left;
            *r = right;
        }
        Ok(id)
    }

    pub fn window(&self) -> &Polytope {
        &self.window
    }

    pub fn lifetime(&self) -> f64 {
        self.lifetime
    }

    pub fn measure(&self) -> &DirectionalDistribution {
        &self.measure
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn leaf_count(&self) -> usize {
        self.leaves.len()
    }

    pub fn cut_count(&self) -> usize {
        self.nodes.len() - self.leaves.len()
    }

    /// Leaves in depth-first (left before right) order.
    pub fn leaves(&self) -> impl Iterator<Item = Leaf<'_>> + '_ {
        self.leaves.iter().map(|&id| match &self.nodes[id] {
            Node::Leaf { cell, birth, index } => Leaf { index: *index, cell, birth: *birth },
            Node::Internal { .. } => unreachable!("leaf table points at a leaf"),
        })
    }

    /// All cuts with their depth, in depth-first order.
    pub fn cuts(&self) -> Vec<(usize, &Cut)> {
        let mut out = Vec::new();
        let mut stack = vec![(0usize, 0usize)];
        while let Some((id, depth)) = stack.pop() {
            if let Node::Internal { cut, left, right } = &self.nodes[id] {
                out.push((depth, cut));
                stack.push((*right, depth + 1));
                stack.push((*left, depth + 1));
            }
        }
        out
    }

    /// Cut times along every root-to-leaf path.
    pub fn paths_cut_times(&self) -> Vec<Vec<f64>> {
        let mut out = Vec::new();
        let mut stack = vec![(0usize, Vec::new())];
        while let Some((id, times)) = stack.pop() {
            match &self.nodes[id] {
                Node::Leaf { .. } => out.push(times),
                Node::Internal { cut, left, right } => {
                    let mut t = times;
                    t.push(cut.time);
                    stack.push((*right, t.clone()));
                    stack.push((*left, t));
                }
            }
        }
        out
    }

    /// Leaf index of `x`, without allocating a path. `x` is not checked
    /// against the window.
    #[inline]
    pub fn leaf_index_unchecked(&self, x: &[f64]) -> usize {
        let mut id = 0;
        loop {
            match &self.nodes[id] {
                Node::Leaf { index, .. } => return *index,
                Node::Internal { cut, left, right } => {
                    id = if cut.hyperplane.signed_distance(x) >= -crate::geom::TOL { *right } else { *left };
                }
            }
        }
    }

    /// Leaf index of `x`.
    pub fn leaf_index(&self, x: &[f64]) -> Result<usize> {
        if !self.window.contains(x) {
            return Err(StitError::OutOfWindow);
        }
        Ok(self.leaf_index_unchecked(x))
    }

    /// Path to the leaf containing `x`; on-plane points go right.
    pub fn locate(&self, x: &[f64]) -> Result<CellRef> {
        if !self.window.contains(x) {
            return Err(StitError::OutOfWindow);
        }
        let mut path = Vec::new();
        let mut id = 0;
        while let Node::Internal { cut, left, right } = &self.nodes[id] {
            if cut.hyperplane.signed_distance(x) >= -crate::geom::TOL {
                path.push(Side::Right);
                id = *right;
            } else {
                path.push(Side::Left);
                id = *left;
            }
        }
        Ok(CellRef { path })
    }

    pub fn same_cell(&self, x: &[f64], y: &[f64]) -> Result<bool> {
        Ok(self.leaf_index(x)? == self.leaf_index(y)?)
    }

    /// The polytope stored at the leaf addressed by `cell`.
    pub fn cell_polytope(&self, cell: &CellRef) -> Result<&Polytope> {
        let mut id = 0;
        for side in &cell.path {
            match &self.nodes[id] {
                Node::Internal { left, right, .. } => {
                    id = if *side == Side::Left { *left } else { *right };
                }
                Node::Leaf { .. } => return Err(StitError::InvalidPath),
            }
        }
        match &self.nodes[id] {
            Node::Leaf { cell, .. } => Ok(cell),
            Node::Internal { .. } => Err(StitError::InvalidPath),
        }
    }

    pub fn leaf_cell(&self, index: usize) -> &Polytope {
        match &self.nodes[self.leaves[index]] {
            Node::Leaf { cell, .. } => cell,
            Node::Internal { .. } => unreachable!("leaf table points at a leaf"),
        }
    }

    /// Simulates only the branch leading to `x`. Uses the same streams as
    /// [`TessellationTree::sample`], so the result is the cell of `x` in the
    /// full tree with the same arguments.
    pub fn cell_at(
        measure: &DirectionalDistribution,
        lifetime: f64,
        window: &Polytope,
        x: &[f64],
        seed: u64,
    ) -> Result<(CellRef, Polytope)> {
        if !(lifetime >= 0.0 && lifetime.is_finite()) {
            return Err(StitError::InvalidParameter(format!("lifetime {lifetime} must be finite and >= 0")));
        }
        if window.dim() != measure.dim() {
            return Err(StitError::DimensionMismatch { expected: measure.dim(), got: window.dim() });
        }
        if !window.contains(x) {
            return Err(StitError::OutOfWindow);
        }
        let mut cell = window.clone();
        let mut birth = 0.0;
        let mut key = rng::derive(seed, TAG_ROOT);
        let mut path = Vec::new();
        loop {
            let mut stream = rng::stream(key);
            let rate = measure.lambda_hit(&cell);
            if !rate.is_finite() || rate < 0.0 {
                return Err(StitError::NonFiniteRate(rate));
            }
            let wait: f64 = stream.sample(Exp1);
            let time = birth + wait / rate;
            if rate == 0.0 || time > lifetime {
                return Ok((CellRef { path }, cell));
            }
            let hyperplane = measure.sample_cut(&cell, &mut stream)?;
            let (lo, hi) = cell.split(&hyperplane)?;
            birth = time;
            if hyperplane.signed_distance(x) >= -crate::geom::TOL {
                path.push(Side::Right);
                cell = hi;
                key = rng::derive(key, TAG_RIGHT);
            } else {
                path.push(Side::Left);
                cell = lo;
                key = rng::derive(key, TAG_LEFT);
            }
        }
    }

    /// Serializable tree for the `tessellate` dump.
    pub fn dump(&self) -> DumpNode {
        self.dump_node(0)
    }

    fn dump_node(&self, id: usize) -> DumpNode {
        match &self.nodes[id] {
            Node::Leaf { cell, birth, .. } => DumpNode::Leaf(LeafDump {
                vertices: cell.vertices().to_vec(),
                birth: *birth,
            }),
            Node::Internal { cut, left, right } => DumpNode::Split(Box::new(SplitDump {
                cut: CutDump {
                    normal: cut.hyperplane.normal().coords().to_vec(),
                    displacement: cut.hyperplane.offset(),
                    time: cut.time,
                },
                left: self.dump_node(*left),
                right: self.dump_node(*right),
            })),
        }
    }
}

/// Dump of one node: `{cut, left, right}` or `{vertices, birth}`.
#[derive(Clone, Debug, Serialize)]
#[serde(untagged)]
pub enum DumpNode {
    Split(Box<SplitDump>),
    Leaf(LeafDump),
}

#[derive(Clone, Debug, Serialize)]
pub struct SplitDump {
    pub cut: CutDump,
    pub left: DumpNode,
    pub right: DumpNode,
}

#[derive(Clone, Debug, Serialize)]
pub struct CutDump {
    pub normal: Vec<f64>,
    pub displacement: f64,
    pub time: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct LeafDump {
    pub vertices: Vec<Vec<f64>>,
    pub birth: f64,
}

/// Finite-direction STIT realized as a Mondrian process in R^n restricted to
/// the image `U(W)` of the window.
#[derive(Clone, Debug)]
pub struct LiftedTessellation {
    lift: DMatrix<f64>,
    inner: TessellationTree,
    window: Polytope,
}

impl LiftedTessellation {
    /// `rows` are the unit directions `u_1..u_n` (rows of `U`).
    pub fn sample(rows: &[Vec<f64>], lifetime: f64, window: &Polytope, seed: u64) -> Result<Self> {
        // Validates unit rows spanning R^d.
        DirectionalDistribution::from_directions(rows)?;
        let d = window.dim();
        if rows[0].len() != d {
            return Err(StitError::DimensionMismatch { expected: d, got: rows[0].len() });
        }
        let n = rows.len();
        let lift = DMatrix::from_fn(n, d, |i, j| rows[i][j]);
        let mut lo = vec![f64::INFINITY; n];
        let mut hi = vec![f64::NEG_INFINITY; n];
        for v in window.vertices() {
            for i in 0..n {
                let p = crate::geom::dot(&rows[i], v);
                lo[i] = lo[i].min(p);
                hi[i] = hi[i].max(p);
            }
        }
        lo.iter_mut().for_each(|l| *l -= 1e-9);
        hi.iter_mut().for_each(|h| *h += 1e-9);
        let bbox = Polytope::cuboid(&lo, &hi)?;
        let inner = TessellationTree::sample(&DirectionalDistribution::mondrian(n)?, lifetime, &bbox, seed)?;
        Ok(Self { lift, inner, window: window.clone() })
    }

    pub fn inner(&self) -> &TessellationTree {
        &self.inner
    }

    /// `U x`.
    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        (0..self.lift.nrows())
            .map(|i| (0..self.lift.ncols()).map(|j| self.lift[(i, j)] * x[j]).sum())
            .collect()
    }

    pub fn leaf_index(&self, x: &[f64]) -> Result<usize> {
        if !self.window.contains(x) {
            return Err(StitError::OutOfWindow);
        }
        Ok(self.inner.leaf_index_unchecked(&self.project(x)))
    }

    pub fn same_cell(&self, x: &[f64], y: &[f64]) -> Result<bool> {
        Ok(self.leaf_index(x)? == self.leaf_index(y)?)
    }
}

/// Cell containing `x` of a Mondrian `Y(lifetime * d)` on all of R^d:
/// `x + (1/lifetime) prod_j [-T_j0, T_j1]` with i.i.d. standard exponentials.
pub fn mondrian_cell_at<R: Rng + ?Sized>(x: &[f64], lifetime: f64, rng: &mut R) -> Result<Polytope> {
    if !(lifetime > 0.0 && lifetime.is_finite()) {
        return Err(StitError::InvalidParameter("lifetime must be positive".into()));
    }
    let mut lo = Vec::with_capacity(x.len());
    let mut hi = Vec::with_capacity(x.len());
    for &xj in x {
        let t0: f64 = rng.sample(Exp1);
        let t1: f64 = rng.sample(Exp1);
        lo.push(xj - t0 / lifetime);
        hi.push(xj + t1 / lifetime);
    }
    Polytope::cuboid(&lo, &hi)
}

/// Unit direction helper for callers building hyperplanes by hand.
pub fn axis_cut(dim: usize, axis: usize, offset: f64) -> Hyperplane {
    Hyperplane::new(Direction::axis(dim, axis), offset)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::ConvexBody;
    use crate::measure::{three_direction_example, three_direction_rows};
    use crate::rng::stream;

    fn square() -> Polytope {
        Polytope::centered_cube(2, 0.5).unwrap()
    }

    #[test]
    fn zero_lifetime_is_single_leaf() {
        let m = three_direction_example();
        let t = TessellationTree::sample(&m, 0.0, &square(), 1).unwrap();
        assert_eq!(t.leaf_count(), 1);
        assert_eq!(t.locate(&[0.1, 0.2]).unwrap(), CellRef::default());
        assert_eq!(t.cell_polytope(&CellRef::default()).unwrap(), &square());
        assert!(TessellationTree::sample(&m, -1.0, &square(), 1).is_err());
    }

    #[test]
    fn tree_invariants() {
        for m in [three_direction_example(), DirectionalDistribution::isotropic(2).unwrap()] {
            for seed in 0..20 {
                let t = TessellationTree::sample(&m, 9.0, &square(), seed).unwrap();
                let total: f64 = t.leaves().map(|l| l.cell.volume().unwrap().value).sum();
                assert!((total - 1.0).abs() < 1e-9);
                for times in t.paths_cut_times() {
                    assert!(times.windows(2).all(|w| w[0] < w[1]));
                    assert!(times.iter().all(|&s| s > 0.0 && s <= 9.0));
                }
                for leaf in t.leaves() {
                    assert!(leaf.birth < 9.0);
                }
            }
        }
    }

    #[test]
    fn locate_is_coherent() {
        let m = three_direction_example();
        let t = TessellationTree::sample(&m, 9.0, &square(), 3).unwrap();
        assert!(t.leaf_count() > 3);
        let mut s = stream(1);
        for _ in 0..1000 {
            let x = [s.random::<f64>() - 0.5, s.random::<f64>() - 0.5];
            let r = t.locate(&x).unwrap();
            let cell = t.cell_polytope(&r).unwrap();
            assert!(cell.contains(&x));
            // Interior points are in exactly one leaf.
            let owners = t.leaves().filter(|l| l.cell.contains(&x)).count();
            assert!(owners >= 1);
            assert_eq!(t.leaf_cell(t.leaf_index(&x).unwrap()), cell);
        }
        assert_eq!(t.locate(&[0.7, 0.0]), Err(StitError::OutOfWindow));
        assert_eq!(t.cell_polytope(&CellRef { path: vec![Side::Left; 200] }), Err(StitError::InvalidPath));
    }

    #[test]
    fn single_branch_matches_full_tree() {
        let mut s = stream(5);
        for m in [three_direction_example(), DirectionalDistribution::isotropic(2).unwrap()] {
            for seed in 0..10 {
                let t = TessellationTree::sample(&m, 8.0, &square(), seed).unwrap();
                for _ in 0..20 {
                    let x = [s.random::<f64>() - 0.5, s.random::<f64>() - 0.5];
                    let (path, cell) = TessellationTree::cell_at(&m, 8.0, &square(), &x, seed).unwrap();
                    assert_eq!(path, t.locate(&x).unwrap());
                    assert_eq!(&cell, t.cell_polytope(&path).unwrap());
                }
            }
        }
        assert!(TessellationTree::cell_at(&three_direction_example(), 1.0, &square(), &[0.9, 0.0], 0).is_err());
    }

    #[test]
    fn locate_is_constant_within_a_leaf() {
        let m = DirectionalDistribution::isotropic(2).unwrap();
        let t = TessellationTree::sample(&m, 6.0, &square(), 4).unwrap();
        let mut s = stream(2);
        for leaf in t.leaves() {
            let (lo, hi) = leaf.cell.bounding_box();
            let mut inside = Vec::new();
            for _ in 0..200 {
                let x = [lo[0] + (hi[0] - lo[0]) * s.random::<f64>(), lo[1] + (hi[1] - lo[1]) * s.random::<f64>()];
                if leaf.cell.halfspaces().iter().all(|h| h.slack(&x) > 1e-7) {
                    inside.push(x);
                }
            }
            for x in &inside {
                assert_eq!(t.leaf_index(x).unwrap(), leaf.index);
            }
        }
    }

    #[test]
    fn determinism() {
        let m = three_direction_example();
        let a = TessellationTree::sample(&m, 9.0, &square(), 77).unwrap();
        let b = TessellationTree::sample(&m, 9.0, &square(), 77).unwrap();
        let ja = serde_json::to_string(&a.dump()).unwrap();
        let jb = serde_json::to_string(&b.dump()).unwrap();
        assert_eq!(ja, jb);
        let c = TessellationTree::sample(&m, 9.0, &square(), 78).unwrap();
        assert_ne!(ja, serde_json::to_string(&c.dump()).unwrap());
    }

    #[test]
    fn dump_shape() {
        let m = DirectionalDistribution::mondrian(2).unwrap();
        let t = TessellationTree::sample(&m, 3.0, &Polytope::unit_cube(2), 5).unwrap();
        let v = serde_json::to_value(t.dump()).unwrap();
        assert!(v.get("cut").is_some());
        let cut = &v["cut"];
        assert!(cut.get("normal").is_some() && cut.get("displacement").is_some() && cut.get("time").is_some());
        let text = serde_json::to_string(&t.dump()).unwrap();
        assert!(text.starts_with(r#"{"cut":{"normal":"#));
    }

    /// One-dimensional Mondrian on [0, 1]: the cut count is Poisson(lifetime).
    #[test]
    fn one_dimensional_cut_count_is_poisson() {
        let m = DirectionalDistribution::mondrian(1).unwrap();
        let w = Polytope::unit_cube(1);
        let lifetime = 3.0;
        let runs = 10_000;
        let counts: Vec<f64> = (0..runs)
            .map(|s| TessellationTree::sample(&m, lifetime, &w, s).unwrap().cut_count() as f64)
            .collect();
        let mean = counts.iter().sum::<f64>() / runs as f64;
        let var = counts.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (runs - 1) as f64;
        assert!((mean - lifetime).abs() < 3.0 * (lifetime / runs as f64).sqrt(), "{mean}");
        assert!((var / lifetime - 1.0).abs() < 0.1, "{var}");
    }

    #[test]
    fn lifted_identity_matches_direct_mondrian() {
        let rows = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let w = Polytope::unit_cube(2);
        let lifted = LiftedTessellation::sample(&rows, 2.0, &w, 9).unwrap();
        assert_eq!(lifted.project(&[0.3, 0.7]), vec![0.3, 0.7]);
        let mut s = stream(6);
        for _ in 0..100 {
            let x = [s.random::<f64>(), s.random::<f64>()];
            assert!(lifted.same_cell(&x, &x).unwrap());
        }
        assert_eq!(lifted.inner().measure().atoms().unwrap().len(), 2);
    }

    #[test]
    fn lifted_box_contains_window_image() {
        let w = square();
        let lifted = LiftedTessellation::sample(&three_direction_rows(), 2.0, &w, 1).unwrap();
        for v in w.vertices() {
            assert!(lifted.inner().window().contains(&lifted.project(v)));
        }
        assert_eq!(lifted.inner().window().dim(), 3);
    }

    #[test]
    fn mondrian_zero_cell() {
        let mut s = stream(12);
        let lifetime = 2.0;
        let n = 100_000;
        let x = [0.3, -1.0];
        let mut side_sum = 0.0;
        let mut tail = 0usize;
        for _ in 0..n {
            let c = mondrian_cell_at(&x, lifetime, &mut s).unwrap();
            assert!(c.contains(&x));
            let (lo, hi) = c.box_bounds().unwrap();
            side_sum += hi[0] - lo[0];
            if hi[1] - x[1] >= 0.5 {
                tail += 1;
            }
        }
        let mean = side_sum / n as f64;
        // Side length is (T0 + T1)/lifetime: mean 2/lifetime, sd sqrt(2)/lifetime.
        assert!((mean - 1.0).abs() < 3.0 * 2f64.sqrt() / lifetime / (n as f64).sqrt());
        let p = tail as f64 / n as f64;
        let expect = (-lifetime * 0.5f64).exp();
        assert!((p - expect).abs() < 3.0 * (expect * (1.0 - expect) / n as f64).sqrt());
    }

    #[test]
    fn window_extent_drives_rate() {
        let m = DirectionalDistribution::mondrian(2).unwrap();
        let w = Polytope::unit_cube(2);
        assert_eq!(m.lambda_hit(&w), 1.0);
        assert_eq!(w.width(&[1.0, 0.0]), 1.0);
    }
}
