//! Finite quasi-metric measure spaces.
//!
//! A [`FiniteSpace`] is a finite point set `0..N` with positive masses and a
//! symmetric distance matrix. Balls are open: `B(x, r) = {y : d(x, y) < r}`.
//! Every supremum over radii is a finite maximum, because ball membership
//! only changes at the distances `d(x, y)`.

use std::collections::HashSet;
use std::hash::{Hash, Hasher};
use std::sync::{Arc, OnceLock};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Nested list description of a tree: a leaf is a point index, a node is a
/// list of subtrees.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Nested {
    Leaf(usize),
    Node(Vec<Nested>),
}

#[derive(Debug, Clone, Serialize)]
pub struct TreeNode {
    pub parent: Option<usize>,
    pub children: Vec<usize>,
    /// Point index when the node is a leaf.
    pub leaf: Option<usize>,
    pub mass: f64,
    pub depth: usize,
    /// Leaves below this node in ascending point order.
    pub points: Vec<usize>,
}

/// Rooted tree whose leaves are the points of a space.
#[derive(Debug, Clone, Serialize)]
pub struct DyadicTree {
    pub nodes: Vec<TreeNode>,
    pub root: usize,
    /// Node index of each point's leaf.
    pub leaf_of: Vec<usize>,
}

impl DyadicTree {
    /// Builds a tree from a nested description and per-point masses.
    pub fn from_nested(shape: &Nested, masses: &[f64]) -> Result<Self> {
        let n = masses.len();
        let mut nodes = Vec::new();
        let mut leaf_of = vec![usize::MAX; n];
        fn build(
            s: &Nested,
            parent: Option<usize>,
            depth: usize,
            masses: &[f64],
            nodes: &mut Vec<TreeNode>,
            leaf_of: &mut [usize],
        ) -> Result<usize> {
            let id = nodes.len();
            nodes.push(TreeNode {
                parent,
                children: Vec::new(),
                leaf: None,
                mass: 0.0,
                depth,
                points: Vec::new(),
            });
            match s {
                Nested::Leaf(p) => {
                    let p = *p;
                    if p >= masses.len() {
                        return Err(Error::InvalidArgument(format!("leaf {p} out of range")));
                    }
                    if leaf_of[p] != usize::MAX {
                        return Err(Error::InvalidArgument(format!("leaf {p} repeated")));
                    }
                    if !(masses[p] > 0.0) || !masses[p].is_finite() {
                        return Err(Error::InvalidArgument(format!("mass of {p} not positive")));
                    }
                    leaf_of[p] = id;
                    nodes[id].leaf = Some(p);
                    nodes[id].mass = masses[p];
                    nodes[id].points = vec![p];
                }
                Nested::Node(kids) => {
                    if kids.len() < 2 {
                        return Err(Error::InvalidArgument(
                            "internal tree nodes need at least two children".into(),
                        ));
                    }
                    let mut ch = Vec::with_capacity(kids.len());
                    for k in kids {
                        ch.push(build(k, Some(id), depth + 1, masses, nodes, leaf_of)?);
                    }
                    let mut mass = 0.0;
                    let mut pts = Vec::new();
                    for &c in &ch {
                        mass += nodes[c].mass;
                        pts.extend_from_slice(&nodes[c].points);
                    }
                    pts.sort_unstable();
                    nodes[id].children = ch;
                    nodes[id].mass = mass;
                    nodes[id].points = pts;
                }
            }
            Ok(id)
        }
        let root = build(shape, None, 0, masses, &mut nodes, &mut leaf_of)?;
        if let Some(p) = leaf_of.iter().position(|&l| l == usize::MAX) {
            return Err(Error::InvalidArgument(format!("point {p} is not a leaf")));
        }
        Ok(DyadicTree { nodes, root, leaf_of })
    }

    /// Complete `arity`-ary tree of the given depth with unit leaf masses.
    pub fn uniform(arity: usize, depth: usize) -> Self {
        let leaves = arity.pow(depth as u32);
        let mut next = 0usize;
        fn shape(arity: usize, depth: usize, next: &mut usize) -> Nested {
            if depth == 0 {
                let p = *next;
                *next += 1;
                Nested::Leaf(p)
            } else {
                Nested::Node((0..arity).map(|_| shape(arity, depth - 1, next)).collect())
            }
        }
        let s = shape(arity, depth, &mut next);
        DyadicTree::from_nested(&s, &vec![1.0; leaves]).expect("uniform tree is valid")
    }

    /// Random tree with `leaves` leaves, arities in `2..=max_arity`, leaves
    /// numbered left to right. Masses are uniform in `[0.5, 2]` when
    /// `random_mass` is set, otherwise 1.
    pub fn random(leaves: usize, max_arity: usize, random_mass: bool, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut next = 0usize;
        fn split(k: usize, max_arity: usize, rng: &mut ChaCha8Rng, next: &mut usize) -> Nested {
            if k == 1 {
                let p = *next;
                *next += 1;
                return Nested::Leaf(p);
            }
            let m = rng.gen_range(2..=max_arity.max(2).min(k));
            // random composition of k into m positive parts
            let mut cuts: Vec<usize> = (1..k).collect();
            cuts.shuffle(rng);
            let mut cuts: Vec<usize> = cuts.into_iter().take(m - 1).collect();
            cuts.sort_unstable();
            let mut parts = Vec::with_capacity(m);
            let mut prev = 0;
            for c in cuts {
                parts.push(c - prev);
                prev = c;
            }
            parts.push(k - prev);
            Nested::Node(parts.into_iter().map(|p| split(p, max_arity, rng, next)).collect())
        }
        let s = split(leaves.max(1), max_arity, &mut rng, &mut next);
        let masses: Vec<f64> = (0..leaves.max(1))
            .map(|_| if random_mass { rng.gen_range(0.5..2.0) } else { 1.0 })
            .collect();
        DyadicTree::from_nested(&s, &masses).expect("random tree is valid")
    }

    pub fn num_points(&self) -> usize {
        self.leaf_of.len()
    }

    /// Lowest common ancestor of two nodes.
    pub fn lca(&self, mut a: usize, mut b: usize) -> usize {
        while self.nodes[a].depth > self.nodes[b].depth {
            a = self.nodes[a].parent.unwrap();
        }
        while self.nodes[b].depth > self.nodes[a].depth {
            b = self.nodes[b].parent.unwrap();
        }
        while a != b {
            a = self.nodes[a].parent.unwrap();
            b = self.nodes[b].parent.unwrap();
        }
        a
    }

    /// Smallest node containing both points.
    pub fn smallest_common(&self, x: usize, y: usize) -> usize {
        self.lca(self.leaf_of[x], self.leaf_of[y])
    }
}

/// An open ball together with its member set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Ball {
    pub center: usize,
    pub radius: f64,
    pub members: Vec<usize>,
    pub measure: f64,
}

impl Ball {
    pub fn contains(&self, x: usize) -> bool {
        self.members.binary_search(&x).is_ok()
    }
}

/// Finite quasi-metric measure space.
#[derive(Debug)]
pub struct FiniteSpace {
    mass: Vec<f64>,
    dist: Vec<f64>,
    n: usize,
    tree: Option<Arc<DyadicTree>>,
    cd: OnceLock<f64>,
    order: OnceLock<Vec<Vec<usize>>>,
    balls: OnceLock<Vec<Ball>>,
    chains: OnceLock<Option<Vec<Vec<usize>>>>,
}

impl Clone for FiniteSpace {
    fn clone(&self) -> Self {
        FiniteSpace {
            mass: self.mass.clone(),
            dist: self.dist.clone(),
            n: self.n,
            tree: self.tree.clone(),
            cd: self.cd.clone(),
            order: OnceLock::new(),
            balls: OnceLock::new(),
            chains: OnceLock::new(),
        }
    }
}

impl FiniteSpace {
    /// Builds a space from masses and a row-major distance matrix.
    pub fn new(mass: Vec<f64>, dist: Vec<f64>) -> Result<Self> {
        let n = mass.len();
        if n == 0 {
            return Err(Error::InvalidArgument("empty space".into()));
        }
        if dist.len() != n * n {
            return Err(Error::InvalidArgument(format!(
                "distance matrix has {} entries, expected {}",
                dist.len(),
                n * n
            )));
        }
        for (x, &m) in mass.iter().enumerate() {
            if !(m > 0.0) || !m.is_finite() {
                return Err(Error::InvalidArgument(format!("mass of point {x} is not positive")));
            }
        }
        check_distances(n, &dist)?;
        Ok(FiniteSpace {
            mass,
            dist,
            n,
            tree: None,
            cd: OnceLock::new(),
            order: OnceLock::new(),
            balls: OnceLock::new(),
            chains: OnceLock::new(),
        })
    }

    /// Points on the real line with Euclidean distance.
    pub fn from_line(coords: &[f64], mass: Vec<f64>) -> Result<Self> {
        let n = coords.len();
        if mass.len() != n {
            return Err(Error::InvalidArgument("coordinate/mass length mismatch".into()));
        }
        let mut dist = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                dist[i * n + j] = (coords[i] - coords[j]).abs();
            }
        }
        FiniteSpace::new(mass, dist)
    }

    /// `n` unit-mass points at `0, 1, ..., n-1`.
    pub fn uniform_line(n: usize) -> Self {
        let coords: Vec<f64> = (0..n).map(|i| i as f64).collect();
        FiniteSpace::from_line(&coords, vec![1.0; n]).expect("uniform line is valid")
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn mass(&self, x: usize) -> f64 {
        self.mass[x]
    }

    pub fn masses(&self) -> &[f64] {
        &self.mass
    }

    pub fn dist(&self, x: usize, y: usize) -> f64 {
        self.dist[x * self.n + y]
    }

    pub fn row(&self, x: usize) -> &[f64] {
        &self.dist[x * self.n..(x + 1) * self.n]
    }

    pub fn total_mass(&self) -> f64 {
        self.mass.iter().sum()
    }

    pub fn measure(&self, set: &[usize]) -> f64 {
        set.iter().map(|&x| self.mass[x]).sum()
    }

    pub fn tree(&self) -> Option<&DyadicTree> {
        self.tree.as_deref()
    }

    pub fn diameter(&self) -> f64 {
        self.dist.iter().cloned().fold(0.0, f64::max)
    }

    /// Exact quasi-triangle constant, cached.
    pub fn quasi_triangle_constant(&self) -> f64 {
        *self
            .cd
            .get_or_init(|| quasi_triangle_constant(self.n, &self.dist).expect("validated space"))
    }

    /// `(c_mu, D_mu)`: the exact doubling constant over all centers and
    /// critical radii, and its base-2 logarithm.
    pub fn doubling_constants(&self) -> (f64, f64) {
        let mut c: f64 = 1.0;
        for x in 0..self.n {
            let order = &self.sorted_order()[x];
            let d: Vec<f64> = order.iter().map(|&y| self.dist(x, y)).collect();
            let mut prefix = Vec::with_capacity(self.n + 1);
            prefix.push(0.0);
            let mut acc = 0.0;
            for &y in order {
                acc += self.mass[y];
                prefix.push(acc);
            }
            let open = |r: f64| prefix[d.partition_point(|&t| t < r)];
            let closed = |r: f64| prefix[d.partition_point(|&t| t <= r)];
            for &rho in d.iter().filter(|&&t| t > 0.0) {
                c = c.max(open(2.0 * rho) / open(rho));
                // rho just above a distance: both balls become closed
                c = c.max(closed(2.0 * rho) / closed(rho));
            }
        }
        (c, c.log2())
    }

    /// Open ball `B(center, radius)`.
    pub fn ball(&self, center: usize, radius: f64) -> Ball {
        let members: Vec<usize> = (0..self.n).filter(|&y| self.dist(center, y) < radius).collect();
        let measure = self.measure(&members);
        Ball { center, radius, members, measure }
    }

    /// For each point, all points sorted by distance (ties by index).
    pub fn sorted_order(&self) -> &[Vec<usize>] {
        self.order.get_or_init(|| {
            (0..self.n)
                .map(|x| {
                    let mut o: Vec<usize> = (0..self.n).collect();
                    let row = self.row(x);
                    o.sort_by(|&a, &b| row[a].total_cmp(&row[b]).then(a.cmp(&b)));
                    o
                })
                .collect()
        })
    }

    /// Distinct radii at which balls around `x` change, ascending, with the
    /// number of points strictly closer than each.
    pub fn critical_radii(&self, x: usize) -> Vec<(f64, usize)> {
        let order = &self.sorted_order()[x];
        let mut out = Vec::new();
        for (i, &y) in order.iter().enumerate() {
            let d = self.dist(x, y);
            if d > 0.0 && out.last().map_or(true, |&(r, _)| r < d) {
                out.push((d, i));
            }
        }
        out
    }

    /// Every distinct ball of the space (as a point set), with a
    /// representative center and radius. Sorted members.
    pub fn balls(&self) -> &[Ball] {
        self.balls.get_or_init(|| {
            let mut seen: HashSet<(u64, usize, usize)> = HashSet::new();
            let mut out = Vec::new();
            let big = 2.0 * self.diameter() + 1.0;
            for x in 0..self.n {
                let order = &self.sorted_order()[x];
                let radii = self.critical_radii(x);
                // prefix ending before each critical radius, then everything
                let mut cuts: Vec<(usize, f64)> = radii.iter().map(|&(r, i)| (i, r)).collect();
                cuts.push((self.n, big));
                for (len, r) in cuts {
                    let mut members: Vec<usize> = order[..len].to_vec();
                    members.sort_unstable();
                    let key = set_key(&members);
                    if seen.insert(key) {
                        let measure = self.measure(&members);
                        out.push(Ball { center: x, radius: r, members, measure });
                    }
                }
            }
            out
        })
    }

    /// When the distinct balls are nested or disjoint, the indices (into
    /// [`FiniteSpace::balls`]) of the balls containing each point, smallest
    /// first. `None` for non-laminar ball families.
    pub fn ball_chains(&self) -> Option<&[Vec<usize>]> {
        self.chains
            .get_or_init(|| {
                let balls = self.balls();
                let mut chains = vec![Vec::new(); self.n];
                for (i, b) in balls.iter().enumerate() {
                    for &x in &b.members {
                        chains[x].push(i);
                    }
                }
                for c in chains.iter_mut() {
                    c.sort_by_key(|&i| balls[i].members.len());
                    for w in c.windows(2) {
                        let (a, b) = (&balls[w[0]], &balls[w[1]]);
                        if a.members.len() == b.members.len() || !a.members.iter().all(|x| b.contains(*x)) {
                            return None;
                        }
                    }
                }
                Some(chains)
            })
            .as_deref()
    }

    /// Exhaustive ultrametric check.
    pub fn is_ultrametric(&self) -> bool {
        for x in 0..self.n {
            for y in 0..self.n {
                for z in 0..self.n {
                    if self.dist(x, z) > self.dist(x, y).max(self.dist(y, z)) {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Random points in the unit square with Euclidean distance raised to
    /// `power` (a quasi-metric for `power > 1`) and masses in `[0.5, 2]`.
    pub fn random_planar(n: usize, power: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pts: Vec<(f64, f64)> = (0..n).map(|_| (rng.gen::<f64>(), rng.gen::<f64>())).collect();
        let mass: Vec<f64> = (0..n).map(|_| rng.gen_range(0.5..2.0)).collect();
        let mut dist = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    let d = ((pts[i].0 - pts[j].0).powi(2) + (pts[i].1 - pts[j].1).powi(2)).sqrt();
                    dist[i * n + j] = d.max(1e-9).powf(power);
                }
            }
        }
        FiniteSpace::new(mass, dist).expect("random planar space is valid")
    }
}

/// Hash key of a sorted point set.
pub(crate) fn set_key(members: &[usize]) -> (u64, usize, usize) {
    let mut h = std::collections::hash_map::DefaultHasher::new();
    members.hash(&mut h);
    (h.finish(), members.len(), members.first().copied().unwrap_or(usize::MAX))
}

fn check_distances(n: usize, dist: &[f64]) -> Result<()> {
    for x in 0..n {
        if dist[x * n + x] != 0.0 {
            return Err(Error::MetricViolation { x, y: x, reason: "nonzero diagonal".into() });
        }
        for y in 0..n {
            let d = dist[x * n + y];
            if !d.is_finite() || d < 0.0 {
                return Err(Error::MetricViolation { x, y, reason: "negative or non-finite".into() });
            }
            if d != dist[y * n + x] {
                return Err(Error::MetricViolation { x, y, reason: "not symmetric".into() });
            }
            if x != y && d == 0.0 {
                return Err(Error::MetricViolation { x, y, reason: "zero distance".into() });
            }
        }
    }
    Ok(())
}

/// Minimal `c >= 1` with `d(x,y) <= c (d(x,z) + d(z,y))` over all triples of
/// a raw row-major distance matrix.
pub fn quasi_triangle_constant(n: usize, dist: &[f64]) -> Result<f64> {
    for x in 0..n {
        for y in 0..n {
            if x != y && dist[x * n + y] == 0.0 {
                return Err(Error::MetricViolation { x, y, reason: "zero distance".into() });
            }
        }
    }
    let mut c: f64 = 1.0;
    for x in 0..n {
        let rx = &dist[x * n..(x + 1) * n];
        for y in (x + 1)..n {
            let ry = &dist[y * n..(y + 1) * n];
            let dxy = rx[y];
            let mut best = f64::INFINITY;
            for z in 0..n {
                let s = rx[z] + ry[z];
                if s < best {
                    best = s;
                }
            }
            c = c.max(dxy / best);
        }
    }
    Ok(c)
}

/// The dyadic ultrametric of a tree: the mass of the smallest node holding
/// both points.
pub fn dyadic_metric(tree: &DyadicTree) -> FiniteSpace {
    let n = tree.num_points();
    let mass: Vec<f64> = (0..n).map(|p| tree.nodes[tree.leaf_of[p]].mass).collect();
    let mut dist = vec![0.0; n * n];
    for x in 0..n {
        for y in (x + 1)..n {
            let m = tree.nodes[tree.smallest_common(x, y)].mass;
            dist[x * n + y] = m;
            dist[y * n + x] = m;
        }
    }
    let space = FiniteSpace {
        mass,
        dist,
        n,
        tree: Some(Arc::new(tree.clone())),
        cd: OnceLock::new(),
        order: OnceLock::new(),
        balls: OnceLock::new(),
        chains: OnceLock::new(),
    };
    let _ = space.cd.set(1.0);
    space
}
