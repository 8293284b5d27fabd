//! Dyadic systems on finite spaces.
//!
//! A [`DyadicSystem`] stores the distinct cubes of a leveled family of nested
//! partitions. A cube that survives several levels unchanged is stored once,
//! with the range `level..=last_level` of generations at which it appears;
//! its side length is `delta^level`. Internal cubes therefore always have at
//! least two children.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::space::{Ball, FiniteSpace};

#[derive(Debug, Clone, Serialize)]
pub struct Cube {
    pub id: usize,
    pub center: usize,
    /// Coarsest generation of the cube.
    pub level: i32,
    /// Finest generation before the cube splits (or the last level).
    pub last_level: i32,
    pub members: Vec<usize>,
    pub measure: f64,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
    pub depth: usize,
}

impl Cube {
    pub fn is_singleton(&self) -> bool {
        self.members.len() == 1
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DyadicSystem {
    pub c0: f64,
    #[serde(rename = "C0")]
    pub big_c0: f64,
    pub delta: f64,
    pub k_min: i32,
    pub k_max: i32,
    pub cubes: Vec<Cube>,
    pub root: usize,
    /// Singleton cube of each point.
    pub leaf_of: Vec<usize>,
    pub tree_backed: bool,
}

impl DyadicSystem {
    pub fn cube(&self, id: usize) -> &Cube {
        &self.cubes[id]
    }

    pub fn len(&self) -> usize {
        self.cubes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cubes.is_empty()
    }

    pub fn side(&self, id: usize) -> f64 {
        self.delta.powi(self.cubes[id].level)
    }

    /// Cubes of generation `k`.
    pub fn level(&self, k: i32) -> Vec<usize> {
        self.cubes
            .iter()
            .filter(|c| c.level <= k && k <= c.last_level)
            .map(|c| c.id)
            .collect()
    }

    pub fn levels(&self) -> std::ops::RangeInclusive<i32> {
        self.k_min..=self.k_max
    }

    /// `true` when `a` is `b` or one of its ancestors, i.e. `b ⊆ a`.
    pub fn is_ancestor_or_self(&self, a: usize, mut b: usize) -> bool {
        loop {
            if a == b {
                return true;
            }
            if self.cubes[b].depth <= self.cubes[a].depth {
                return false;
            }
            match self.cubes[b].parent {
                Some(p) => b = p,
                None => return false,
            }
        }
    }

    pub fn contains(&self, cube: usize, x: usize) -> bool {
        self.is_ancestor_or_self(cube, self.leaf_of[x])
    }

    /// Chain of cubes containing `x`, from its singleton up to the root.
    pub fn chain(&self, x: usize) -> Vec<usize> {
        let mut out = vec![self.leaf_of[x]];
        while let Some(p) = self.cubes[*out.last().unwrap()].parent {
            out.push(p);
        }
        out
    }

    /// All cubes inside `q`, `q` first, in depth-first order.
    pub fn subcubes(&self, q: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![q];
        while let Some(c) = stack.pop() {
            out.push(c);
            for &ch in self.cubes[c].children.iter().rev() {
                stack.push(ch);
            }
        }
        out
    }

    /// Smallest cube containing every point of `set`.
    pub fn smallest_containing(&self, set: &[usize]) -> usize {
        let mut c = self.leaf_of[set[0]];
        for &x in &set[1..] {
            let mut b = self.leaf_of[x];
            while !self.is_ancestor_or_self(c, b) {
                c = self.cubes[c].parent.expect("root contains everything");
                b = self.leaf_of[x];
            }
        }
        c
    }

    /// The ball `alpha Q = B(z, alpha C0 delta^k)`.
    pub fn dilate(&self, space: &FiniteSpace, cube: usize, alpha: f64) -> Ball {
        let c = &self.cubes[cube];
        space.ball(c.center, alpha * self.big_c0 * self.side(cube))
    }

    /// Exhaustive check of the three defining properties: partitions,
    /// nestedness and the ball sandwich at every generation.
    pub fn validate(&self, space: &FiniteSpace) -> Result<()> {
        let n = space.len();
        for k in self.levels() {
            let mut seen = vec![false; n];
            for id in self.level(k) {
                for &x in &self.cubes[id].members {
                    if seen[x] {
                        return Err(Error::ConstructionFailed {
                            cube: id,
                            reason: format!("level {k} is not a partition"),
                        });
                    }
                    seen[x] = true;
                }
            }
            if seen.iter().any(|s| !s) {
                return Err(Error::ConstructionFailed {
                    cube: self.root,
                    reason: format!("level {k} does not cover the space"),
                });
            }
        }
        for c in &self.cubes {
            if let Some(p) = c.parent {
                let parent = &self.cubes[p];
                if parent.last_level + 1 != c.level {
                    return Err(Error::ConstructionFailed {
                        cube: c.id,
                        reason: "generation gap between parent and child".into(),
                    });
                }
                if !c.members.iter().all(|x| parent.members.binary_search(x).is_ok()) {
                    return Err(Error::ConstructionFailed {
                        cube: c.id,
                        reason: "not nested in its parent".into(),
                    });
                }
            }
            if c.members.binary_search(&c.center).is_err() {
                return Err(Error::ConstructionFailed {
                    cube: c.id,
                    reason: "center outside cube".into(),
                });
            }
            for k in c.level..=c.last_level {
                let side = self.delta.powi(k);
                let inner = space.ball(c.center, self.c0 * side);
                let outer = space.ball(c.center, self.big_c0 * side);
                let inside = |b: &Ball, set: &[usize]| b.members.iter().all(|x| set.binary_search(x).is_ok());
                if !inside(&inner, &c.members) || !c.members.iter().all(|&x| outer.contains(x)) {
                    return Err(Error::ConstructionFailed {
                        cube: c.id,
                        reason: format!("ball sandwich fails at generation {k}"),
                    });
                }
            }
        }
        Ok(())
    }

    /// Diameter of every cube.
    pub fn diameters(&self, space: &FiniteSpace) -> Vec<f64> {
        self.cubes
            .iter()
            .map(|c| {
                let mut d: f64 = 0.0;
                for &x in &c.members {
                    for &y in &c.members {
                        d = d.max(space.dist(x, y));
                    }
                }
                d
            })
            .collect()
    }
}

/// Builds a dyadic system.
///
/// Tree-backed spaces use the tree's own nodes (generation = depth). Other
/// spaces use greedy maximal `delta^k`-nets from coarse to fine; points are
/// scanned in index order when `seed == 0`, otherwise in a seeded random
/// order. `(c0, C0)` are measured and the result is validated exhaustively.
pub fn build_dyadic_system(space: &FiniteSpace, delta: f64, seed: u64) -> Result<DyadicSystem> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidArgument(format!("delta = {delta} not in (0,1)")));
    }
    let sys = if let Some(tree) = space.tree() {
        from_tree(space, tree)
    } else {
        let mut order: Vec<usize> = (0..space.len()).collect();
        if seed != 0 {
            order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        }
        from_nets(space, delta, &order)
    };
    let sys = measure_constants(space, sys)?;
    sys.validate(space)?;
    Ok(sys)
}

struct RawCube {
    center: usize,
    level: i32,
    last_level: i32,
    members: Vec<usize>,
    parent: Option<usize>,
}

fn assemble(space: &FiniteSpace, raw: Vec<RawCube>, delta: f64, k_min: i32, k_max: i32, tree_backed: bool) -> DyadicSystem {
    let mut cubes: Vec<Cube> = raw
        .into_iter()
        .enumerate()
        .map(|(id, r)| {
            let measure = space.measure(&r.members);
            Cube {
                id,
                center: r.center,
                level: r.level,
                last_level: r.last_level,
                members: r.members,
                measure,
                parent: r.parent,
                children: Vec::new(),
                depth: 0,
            }
        })
        .collect();
    for i in 0..cubes.len() {
        if let Some(p) = cubes[i].parent {
            cubes[p].children.push(i);
            cubes[i].depth = cubes[p].depth + 1;
        }
    }
    // children ordered by their smallest point
    for i in 0..cubes.len() {
        let mut ch = std::mem::take(&mut cubes[i].children);
        ch.sort_by_key(|&c| cubes[c].members[0]);
        cubes[i].children = ch;
    }
    let mut leaf_of = vec![usize::MAX; space.len()];
    for c in &cubes {
        if c.children.is_empty() {
            for &x in &c.members {
                leaf_of[x] = c.id;
            }
        }
    }
    DyadicSystem {
        c0: 0.0,
        big_c0: 0.0,
        delta,
        k_min,
        k_max,
        cubes,
        root: 0,
        leaf_of,
        tree_backed,
    }
}

fn from_tree(space: &FiniteSpace, tree: &crate::space::DyadicTree) -> DyadicSystem {
    let mut delta: f64 = 0.0;
    let mut max_depth = 0;
    for n in &tree.nodes {
        max_depth = max_depth.max(n.depth);
        if let Some(p) = n.parent {
            delta = delta.max(0.0);
            let r = n.mass / tree.nodes[p].mass;
            if delta == 0.0 || r < delta {
                delta = r;
            }
        }
    }
    if delta == 0.0 {
        delta = 0.5;
    }
    // breadth-first so that parents precede children
    let mut raw = Vec::new();
    let mut map = vec![usize::MAX; tree.nodes.len()];
    let mut queue = std::collections::VecDeque::from([tree.root]);
    while let Some(v) = queue.pop_front() {
        let node = &tree.nodes[v];
        map[v] = raw.len();
        let last = if node.leaf.is_some() { max_depth as i32 } else { node.depth as i32 };
        raw.push(RawCube {
            center: node.points[0],
            level: node.depth as i32,
            last_level: last,
            members: node.points.clone(),
            parent: node.parent.map(|p| map[p]),
        });
        queue.extend(node.children.iter().copied());
    }
    assemble(space, raw, delta, 0, max_depth as i32, true)
}

fn from_nets(space: &FiniteSpace, delta: f64, order: &[usize]) -> DyadicSystem {
    let n = space.len();
    let z0 = order[0];
    if n == 1 {
        let raw = vec![RawCube { center: 0, level: 0, last_level: 0, members: vec![0], parent: None }];
        return assemble(space, raw, delta, 0, 0, false);
    }
    let reach = (0..n).map(|x| space.dist(z0, x)).fold(0.0, f64::max);
    let mut dmin = f64::INFINITY;
    for x in 0..n {
        for y in 0..n {
            if x != y {
                dmin = dmin.min(space.dist(x, y));
            }
        }
    }
    // coarsest level: largest k with delta^k > reach
    let mut k_min = (reach.ln() / delta.ln()).floor() as i32;
    while delta.powi(k_min) <= reach {
        k_min -= 1;
    }
    while delta.powi(k_min + 1) > reach {
        k_min += 1;
    }
    // finest level: smallest k with delta^k <= dmin
    let mut k_max = (dmin.ln() / delta.ln()).ceil() as i32;
    while delta.powi(k_max) > dmin {
        k_max += 1;
    }
    while k_max > k_min && delta.powi(k_max - 1) <= dmin {
        k_max -= 1;
    }
    let levels = (k_max - k_min + 1) as usize;

    // nets and parent links
    let mut centers: Vec<Vec<usize>> = Vec::with_capacity(levels);
    let mut parent: Vec<Vec<usize>> = Vec::with_capacity(levels);
    centers.push(vec![z0]);
    parent.push(vec![usize::MAX; n]);
    parent[0][z0] = z0;
    let mut is_center = vec![false; n];
    is_center[z0] = true;
    for li in 1..levels {
        let side = delta.powi(k_min + li as i32);
        let prev = centers[li - 1].clone();
        let mut cur = prev.clone();
        for &x in order {
            if is_center[x] {
                continue;
            }
            if cur.iter().all(|&z| space.dist(z, x) >= side) {
                cur.push(x);
                is_center[x] = true;
            }
        }
        let mut par = vec![usize::MAX; n];
        for &z in &prev {
            par[z] = z;
        }
        for &z in &cur {
            if par[z] == usize::MAX {
                let mut best = prev[0];
                for &p in &prev {
                    let (dp, db) = (space.dist(z, p), space.dist(z, best));
                    if dp < db || (dp == db && p < best) {
                        best = p;
                    }
                }
                par[z] = best;
            }
        }
        centers.push(cur);
        parent.push(par);
    }
    debug_assert_eq!(centers[levels - 1].len(), n);

    // ancestors at each level, finest first
    let mut anc = vec![vec![0usize; n]; levels];
    anc[levels - 1] = (0..n).collect();
    for li in (0..levels - 1).rev() {
        for x in 0..n {
            anc[li][x] = parent[li + 1][anc[li + 1][x]];
        }
    }

    let mut raw: Vec<RawCube> = Vec::new();
    let mut cube_at: Vec<usize> = vec![usize::MAX; n];
    raw.push(RawCube { center: z0, level: k_min, last_level: k_min, members: (0..n).collect(), parent: None });
    cube_at[z0] = 0;
    for li in 1..levels {
        let k = k_min + li as i32;
        let mut count = vec![0usize; n];
        for &c in &centers[li] {
            count[parent[li][c]] += 1;
        }
        let mut next_at = vec![usize::MAX; n];
        for &c in &centers[li] {
            let p = parent[li][c];
            let pc = cube_at[p];
            if count[p] == 1 {
                raw[pc].last_level = k;
                next_at[c] = pc;
            } else {
                let members: Vec<usize> = (0..n).filter(|&x| anc[li][x] == c).collect();
                next_at[c] = raw.len();
                raw.push(RawCube { center: c, level: k, last_level: k, members, parent: Some(pc) });
            }
        }
        cube_at = next_at;
    }
    assemble(space, raw, delta, k_min, k_max, false)
}

/// Measures the sandwich constants over every (cube, generation) pair.
fn measure_constants(space: &FiniteSpace, mut sys: DyadicSystem) -> Result<DyadicSystem> {
    let mut inner_max: f64 = 0.0;
    let mut outer_min = f64::INFINITY;
    for c in &sys.cubes {
        let z = c.center;
        let reach = c.members.iter().map(|&x| space.dist(z, x)).fold(0.0, f64::max);
        inner_max = inner_max.max(reach / sys.delta.powi(c.last_level));
        if c.members.len() < space.len() {
            let mut gap = f64::INFINITY;
            for y in 0..space.len() {
                if c.members.binary_search(&y).is_err() {
                    gap = gap.min(space.dist(z, y));
                }
            }
            outer_min = outer_min.min(gap / sys.delta.powi(c.level));
        }
    }
    let mut big = inner_max * (1.0 + 1e-9);
    let mut small = outer_min * (1.0 - 1e-9);
    if !outer_min.is_finite() {
        small = if big > 0.0 { big } else { 1.0 };
    }
    if big <= 0.0 {
        big = small;
    }
    if small >= big {
        big = small;
    }
    if !(small > 0.0) {
        return Err(Error::ConstructionFailed { cube: sys.root, reason: "no positive c0".into() });
    }
    sys.c0 = small;
    sys.big_c0 = big;
    Ok(sys)
}

/// Partition of the space into cubes `Q` with `E ⊆ αQ`, refined top-down:
/// a cube is replaced by its children only when every child qualifies.
pub fn covering_partition(sys: &DyadicSystem, space: &FiniteSpace, e: &[usize], alpha: f64) -> Result<Vec<usize>> {
    if e.is_empty() {
        return Err(Error::InvalidArgument("empty set to cover".into()));
    }
    let cd = space.quasi_triangle_constant();
    if alpha < 3.0 * cd * cd / sys.delta * (1.0 - 1e-12) {
        return Err(Error::PreconditionViolated(format!(
            "alpha = {alpha} below 3 c_d^2 / delta = {}",
            3.0 * cd * cd / sys.delta
        )));
    }
    let covers = |q: usize| {
        let b = sys.dilate(space, q, alpha);
        e.iter().all(|&x| b.contains(x))
    };
    let mut out = Vec::new();
    let mut stack = vec![sys.root];
    while let Some(q) = stack.pop() {
        let ch = &sys.cubes[q].children;
        if !ch.is_empty() && ch.iter().all(|&c| covers(c)) {
            stack.extend(ch.iter().rev().copied());
        } else {
            out.push(q);
        }
    }
    Ok(out)
}

/// Finite set of dyadic systems with the ball covering property.
#[derive(Debug, Clone)]
pub struct AdjacentFamily {
    pub systems: Vec<DyadicSystem>,
    pub gamma: f64,
}

impl AdjacentFamily {
    pub fn m(&self) -> usize {
        self.systems.len()
    }
}

/// Adds seeded systems until every critical ball `B(s, ρ)` lies in a cube
/// `Q` of some system with `diam(Q) <= γ ρ` and `γ <= gamma_max`.
pub fn build_adjacent_family(
    space: &FiniteSpace,
    delta: f64,
    m_max: usize,
    gamma_max: f64,
    seed: u64,
) -> Result<AdjacentFamily> {
    let mut systems: Vec<DyadicSystem> = Vec::new();
    let mut diams: Vec<Vec<f64>> = Vec::new();
    for j in 0..m_max {
        let s = if j == 0 { 0 } else { seed.wrapping_mul(1_000_003).wrapping_add(j as u64) | 1 };
        let sys = build_dyadic_system(space, delta, s)?;
        diams.push(sys.diameters(space));
        systems.push(sys);
        if space.tree().is_some() {
            // balls of a dyadic metric are cubes
            let g = covering_gamma(space, &systems, &diams);
            return Ok(AdjacentFamily { systems, gamma: g });
        }
        let g = covering_gamma(space, &systems, &diams);
        if g <= gamma_max {
            return Ok(AdjacentFamily { systems, gamma: g });
        }
    }
    Err(Error::CoverageFailed { m_max })
}

/// Achieved covering ratio `max_B min_{Q ⊇ B} diam(Q)/ρ` over closed balls
/// at every positive distance.
pub fn covering_gamma(space: &FiniteSpace, systems: &[DyadicSystem], diams: &[Vec<f64>]) -> f64 {
    let mut gamma: f64 = 1.0;
    for s in 0..space.len() {
        let order = &space.sorted_order()[s];
        for (i, &y) in order.iter().enumerate() {
            let rho = space.dist(s, y);
            if rho == 0.0 {
                continue;
            }
            if i + 1 < order.len() && space.dist(s, order[i + 1]) == rho {
                continue;
            }
            let ball = &order[..=i];
            let mut best = f64::INFINITY;
            for (sys, dm) in systems.iter().zip(diams) {
                let q = sys.smallest_containing(ball);
                best = best.min(dm[q] / rho);
            }
            gamma = gamma.max(best);
        }
    }
    gamma
}

/// A (multi)set of cubes of one system.
#[derive(Debug, Clone, Default, Serialize)]
pub struct CubeFamily {
    pub cubes: Vec<usize>,
}

impl CubeFamily {
    pub fn new(cubes: Vec<usize>) -> Self {
        CubeFamily { cubes }
    }
}

/// Outcome of the sparseness decision.
#[derive(Debug, Clone, Serialize)]
pub enum SparseCertificate {
    /// Disjoint witness sets, as point masses assigned to each family entry.
    Sparse { eta: f64, witnesses: Vec<Vec<(usize, f64)>> },
    /// Maximum flow falls short of the total demand.
    NotSparse { eta: f64, max_flow: f64, demand: f64 },
}

impl SparseCertificate {
    pub fn is_sparse(&self) -> bool {
        matches!(self, SparseCertificate::Sparse { .. })
    }
}

/// Relative slack of the flow and Carleson comparisons.
pub const SPARSE_REL_TOL: f64 = 1e-9;

/// Decides η-sparseness by maximum flow: every point supplies its mass,
/// every family entry demands `η μ(Q)` from its own members.
pub fn certify_sparse(sys: &DyadicSystem, space: &FiniteSpace, family: &CubeFamily, eta: f64) -> SparseCertificate {
    let n = space.len();
    let f = family.cubes.len();
    let source = n + f;
    let sink = source + 1;
    let mut g = flow::Network::new(n + f + 2);
    for x in 0..n {
        g.add_edge(source, x, space.mass(x));
    }
    let mut point_edges = Vec::with_capacity(f);
    let mut demand = 0.0;
    for (i, &q) in family.cubes.iter().enumerate() {
        let c = &sys.cubes[q];
        let mut es = Vec::with_capacity(c.members.len());
        for &x in &c.members {
            es.push((x, g.add_edge(x, n + i, f64::INFINITY)));
        }
        point_edges.push(es);
        let d = eta * c.measure;
        demand += d;
        g.add_edge(n + i, sink, d);
    }
    let max_flow = g.max_flow(source, sink);
    if max_flow >= demand * (1.0 - SPARSE_REL_TOL) {
        let witnesses = point_edges
            .iter()
            .map(|es| {
                es.iter()
                    .filter_map(|&(x, e)| {
                        let fl = g.flow(e);
                        (fl > 0.0).then_some((x, fl))
                    })
                    .collect()
            })
            .collect();
        SparseCertificate::Sparse { eta, witnesses }
    } else {
        SparseCertificate::NotSparse { eta, max_flow, demand }
    }
}

/// Exact Carleson constant `max_Q Σ_{P ⊆ Q} μ(P) / μ(Q)` of a family.
pub fn carleson_constant(sys: &DyadicSystem, family: &CubeFamily) -> f64 {
    if family.cubes.is_empty() {
        return 0.0;
    }
    let mut in_family = vec![false; sys.len()];
    for &q in &family.cubes {
        in_family[q] = true;
    }
    let mut acc = vec![0.0; sys.len()];
    for &p in &family.cubes {
        let m = sys.cubes[p].measure;
        let mut c = Some(p);
        while let Some(q) = c {
            if in_family[q] {
                acc[q] += m;
            }
            c = sys.cubes[q].parent;
        }
    }
    family
        .cubes
        .iter()
        .map(|&q| acc[q] / sys.cubes[q].measure)
        .fold(0.0, f64::max)
}

/// `true` when the Carleson constant is at most `1/η` up to [`SPARSE_REL_TOL`].
pub fn is_carleson(sys: &DyadicSystem, family: &CubeFamily, eta: f64) -> bool {
    carleson_constant(sys, family) <= (1.0 / eta) * (1.0 + SPARSE_REL_TOL)
}

mod flow {
    //! Dinic maximum flow on real capacities.

    use std::collections::VecDeque;

    struct Edge {
        to: usize,
        cap: f64,
        flow: f64,
    }

    pub struct Network {
        edges: Vec<Edge>,
        adj: Vec<Vec<usize>>,
        level: Vec<i32>,
        it: Vec<usize>,
    }

    const EPS: f64 = 1e-15;

    impl Network {
        pub fn new(n: usize) -> Self {
            Network { edges: Vec::new(), adj: vec![Vec::new(); n], level: vec![0; n], it: vec![0; n] }
        }

        pub fn add_edge(&mut self, a: usize, b: usize, cap: f64) -> usize {
            let id = self.edges.len();
            self.edges.push(Edge { to: b, cap, flow: 0.0 });
            self.edges.push(Edge { to: a, cap: 0.0, flow: 0.0 });
            self.adj[a].push(id);
            self.adj[b].push(id + 1);
            id
        }

        pub fn flow(&self, e: usize) -> f64 {
            self.edges[e].flow
        }

        fn residual(&self, e: usize) -> f64 {
            self.edges[e].cap - self.edges[e].flow
        }

        fn bfs(&mut self, s: usize, t: usize) -> bool {
            self.level.iter_mut().for_each(|l| *l = -1);
            self.level[s] = 0;
            let mut q = VecDeque::from([s]);
            while let Some(v) = q.pop_front() {
                for &e in &self.adj[v] {
                    let to = self.edges[e].to;
                    if self.level[to] < 0 && self.residual(e) > EPS {
                        self.level[to] = self.level[v] + 1;
                        q.push_back(to);
                    }
                }
            }
            self.level[t] >= 0
        }

        fn dfs(&mut self, v: usize, t: usize, pushed: f64) -> f64 {
            if v == t {
                return pushed;
            }
            while self.it[v] < self.adj[v].len() {
                let e = self.adj[v][self.it[v]];
                let to = self.edges[e].to;
                let r = self.residual(e);
                if r > EPS && self.level[to] == self.level[v] + 1 {
                    let got = self.dfs(to, t, pushed.min(r));
                    if got > 0.0 {
                        self.edges[e].flow += got;
                        self.edges[e ^ 1].flow -= got;
                        return got;
                    }
                }
                self.it[v] += 1;
            }
            0.0
        }

        pub fn max_flow(&mut self, s: usize, t: usize) -> f64 {
            let mut total = 0.0;
            while self.bfs(s, t) {
                self.it.iter_mut().for_each(|i| *i = 0);
                loop {
                    let f = self.dfs(s, t, f64::INFINITY);
                    if f <= 0.0 {
                        break;
                    }
                    total += f;
                }
            }
            total
        }
    }
}
