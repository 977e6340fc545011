//! Spanning trees of dual graphs: uniform sampling, enumeration, counting.

use std::collections::VecDeque;

use num_bigint::{BigInt, BigUint, Sign};
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::complex::DualGraph;
use crate::error::{Error, Result};

/// The generator used everywhere a seed is accepted.
pub type SeededRng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A rooted spanning tree. `parent[v]` is the arc from `v` towards the root.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpanningTree {
    root: usize,
    arcs: Vec<usize>,
    parent: Vec<Option<usize>>,
}

impl SpanningTree {
    /// Validates `arcs` as a spanning tree of `g` and orients it at `root`.
    pub fn from_arcs(g: &DualGraph, root: usize, arcs: &[usize]) -> Result<Self> {
        let n = g.node_count();
        if root >= n {
            return Err(Error::TreeMismatch(format!("root {root} out of range ({n} nodes)")));
        }
        if arcs.len() + 1 != n {
            return Err(Error::TreeMismatch(format!(
                "{} arcs given, a spanning tree of {n} nodes has {}",
                arcs.len(),
                n.saturating_sub(1)
            )));
        }
        let mut in_tree = vec![false; g.arc_count()];
        for &a in arcs {
            if a >= g.arc_count() {
                return Err(Error::TreeMismatch(format!("arc {a} out of range")));
            }
            if std::mem::replace(&mut in_tree[a], true) {
                return Err(Error::TreeMismatch(format!("arc {a} listed twice")));
            }
        }
        let mut parent = vec![None; n];
        let mut seen = vec![false; n];
        seen[root] = true;
        let mut queue = VecDeque::from([root]);
        let mut reached = 1;
        while let Some(u) = queue.pop_front() {
            for &(w, a) in g.neighbours(u) {
                if in_tree[a] && !seen[w] {
                    seen[w] = true;
                    parent[w] = Some(a);
                    reached += 1;
                    queue.push_back(w);
                }
            }
        }
        if reached != n {
            return Err(Error::TreeMismatch("arcs do not connect all nodes".into()));
        }
        let mut arcs = arcs.to_vec();
        arcs.sort_unstable();
        Ok(SpanningTree { root, arcs, parent })
    }

    pub fn root(&self) -> usize {
        self.root
    }

    /// Tree arcs, ascending.
    pub fn arcs(&self) -> &[usize] {
        &self.arcs
    }

    pub fn parent_arc(&self, node: usize) -> Option<usize> {
        self.parent[node]
    }

    pub fn node_count(&self) -> usize {
        self.parent.len()
    }

    /// Same arc set, oriented towards a different root.
    pub fn reroot(&self, g: &DualGraph, root: usize) -> Result<Self> {
        SpanningTree::from_arcs(g, root, &self.arcs)
    }

    /// Nodes in breadth-first order from the root; parents precede children.
    pub fn top_down_order(&self, g: &DualGraph) -> Vec<usize> {
        let mut order = Vec::with_capacity(self.parent.len());
        order.push(self.root);
        let mut i = 0;
        while i < order.len() {
            let u = order[i];
            for &(w, a) in g.neighbours(u) {
                if self.parent[w] == Some(a) && w != self.root {
                    order.push(w);
                }
            }
            i += 1;
        }
        order
    }
}

/// Reusable buffers for Wilson's algorithm.
#[derive(Clone, Debug, Default)]
pub struct WilsonSampler {
    in_tree: Vec<bool>,
    next_arc: Vec<usize>,
    next_node: Vec<usize>,
    parent: Vec<usize>,
}

impl WilsonSampler {
    pub const NO_ARC: usize = usize::MAX;

    /// Samples a uniform spanning tree into the internal buffers and returns
    /// the root. Afterwards [`Self::parent_arcs`] holds one arc per non-root
    /// node. The graph must be connected.
    pub fn sample<R: Rng + ?Sized>(&mut self, g: &DualGraph, rng: &mut R) -> usize {
        let n = g.node_count();
        self.in_tree.clear();
        self.in_tree.resize(n, false);
        self.next_arc.resize(n, Self::NO_ARC);
        self.next_node.resize(n, 0);
        self.parent.clear();
        self.parent.resize(n, Self::NO_ARC);

        let root = rng.random_range(0..n);
        self.in_tree[root] = true;
        for start in 0..n {
            // random walk until the tree is hit; overwriting next_* erases loops
            let mut u = start;
            while !self.in_tree[u] {
                let nbrs = g.neighbours(u);
                let (w, a) = nbrs[rng.random_range(0..nbrs.len())];
                self.next_arc[u] = a;
                self.next_node[u] = w;
                u = w;
            }
            let mut u = start;
            while !self.in_tree[u] {
                self.in_tree[u] = true;
                self.parent[u] = self.next_arc[u];
                u = self.next_node[u];
            }
        }
        root
    }

    /// Per-node arc towards the root after [`Self::sample`]; `NO_ARC` at the root.
    pub fn parent_arcs(&self) -> &[usize] {
        &self.parent
    }
}

/// Samples a uniform spanning tree with a fresh generator seeded by `seed`.
pub fn wilson_sample(g: &DualGraph, seed: u64) -> Result<SpanningTree> {
    wilson_sample_with(g, &mut seeded_rng(seed))
}

pub fn wilson_sample_with<R: Rng + ?Sized>(g: &DualGraph, rng: &mut R) -> Result<SpanningTree> {
    if !g.is_connected() {
        return Err(Error::DisconnectedGraph);
    }
    let mut sampler = WilsonSampler::default();
    let root = sampler.sample(g, rng);
    let parent: Vec<Option<usize>> = sampler
        .parent_arcs()
        .iter()
        .map(|&a| (a != WilsonSampler::NO_ARC).then_some(a))
        .collect();
    let mut arcs: Vec<usize> = parent.iter().flatten().copied().collect();
    arcs.sort_unstable();
    Ok(SpanningTree { root, arcs, parent })
}

/// Exact spanning-tree count by the matrix-tree theorem.
///
/// Fraction-free (Bareiss) elimination on the reduced Laplacian; parallel
/// arcs add up, loops are ignored.
pub fn count_spanning_trees(g: &DualGraph) -> BigUint {
    let n = g.node_count();
    if n == 0 {
        return BigUint::zero();
    }
    if n == 1 {
        return BigUint::one();
    }
    let m = n - 1;
    let mut lap = vec![vec![BigInt::zero(); m]; m];
    for arc in g.arcs() {
        let (a, b) = (arc.a, arc.b);
        if a == b {
            continue;
        }
        for &x in &[a, b] {
            if x < m {
                lap[x][x] += 1;
            }
        }
        if a < m && b < m {
            lap[a][b] -= 1;
            lap[b][a] -= 1;
        }
    }

    let mut sign = 1i32;
    let mut prev = BigInt::one();
    for k in 0..m {
        if lap[k][k].is_zero() {
            let Some(p) = (k + 1..m).find(|&r| !lap[r][k].is_zero()) else {
                return BigUint::zero();
            };
            lap.swap(k, p);
            sign = -sign;
        }
        for i in k + 1..m {
            for j in k + 1..m {
                let v = (&lap[i][j] * &lap[k][k] - &lap[i][k] * &lap[k][j]) / &prev;
                lap[i][j] = v;
            }
            lap[i][k] = BigInt::zero();
        }
        prev = lap[k][k].clone();
    }
    let det = if sign < 0 { -prev } else { prev };
    match det.sign() {
        Sign::Minus => panic!("negative Laplacian minor"),
        _ => det.magnitude().clone(),
    }
}

/// Upper bound (9/2)(27/8)^n on the spanning-tree count of an n-node
/// 4-regular graph, as a float.
pub fn regular_tree_count_bound(n: usize) -> f64 {
    4.5 * (27.0f64 / 8.0).powi(n as i32)
}

/// Calls `visit` with the ascending arc list of every spanning tree, once each.
///
/// Contraction/deletion on the lowest-indexed undecided arc: the include
/// branch is explored before the exclude branch, which gives a deterministic
/// order. A deletion is only explored if the remaining graph stays
/// connected, so every branch ends in at least one tree.
pub fn for_each_spanning_tree<F: FnMut(&[usize])>(
    g: &DualGraph,
    limit: u64,
    mut visit: F,
) -> Result<u64> {
    if !g.is_connected() {
        return Err(Error::DisconnectedGraph);
    }
    let count = count_spanning_trees(g);
    if count > BigUint::from(limit) {
        return Err(Error::TooManyTrees { count, limit });
    }
    let mut state = Enumeration {
        g,
        excluded: vec![false; g.arc_count()],
        chosen: Vec::with_capacity(g.node_count()),
        component: (0..g.node_count()).collect(),
        visited: 0,
    };
    state.recurse(0, &mut visit);
    debug_assert_eq!(Some(state.visited), count.to_u64());
    Ok(state.visited)
}

/// Collects every spanning tree, rooted at node 0.
pub fn enumerate_spanning_trees(g: &DualGraph, limit: u64) -> Result<Vec<SpanningTree>> {
    let mut out = Vec::new();
    for_each_spanning_tree(g, limit, |arcs| {
        out.push(SpanningTree::from_arcs(g, 0, arcs).expect("enumerated arcs form a tree"));
    })?;
    Ok(out)
}

struct Enumeration<'a> {
    g: &'a DualGraph,
    excluded: Vec<bool>,
    chosen: Vec<usize>,
    /// component label of each node under the chosen arcs
    component: Vec<usize>,
    visited: u64,
}

impl Enumeration<'_> {
    fn recurse<F: FnMut(&[usize])>(&mut self, next: usize, visit: &mut F) {
        if self.chosen.len() + 1 == self.g.node_count() {
            self.visited += 1;
            visit(&self.chosen);
            return;
        }
        // lowest undecided arc joining two different components
        let mut arc = next;
        while arc < self.g.arc_count() {
            let DualArcEnds(a, b) = self.ends(arc);
            if self.component[a] != self.component[b] {
                break;
            }
            arc += 1;
        }
        if arc == self.g.arc_count() {
            return;
        }

        let DualArcEnds(a, b) = self.ends(arc);
        let (keep, gone) = (self.component[a], self.component[b]);
        let saved = self.component.clone();
        for c in self.component.iter_mut() {
            if *c == gone {
                *c = keep;
            }
        }
        self.chosen.push(arc);
        self.recurse(arc + 1, visit);
        self.chosen.pop();
        self.component = saved;

        self.excluded[arc] = true;
        if self.still_connected() {
            self.recurse(arc + 1, visit);
        }
        self.excluded[arc] = false;
    }

    fn ends(&self, arc: usize) -> DualArcEnds {
        let a = self.g.arc(arc);
        DualArcEnds(a.a, a.b)
    }

    fn still_connected(&self) -> bool {
        let n = self.g.node_count();
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        let mut reached = 1;
        while let Some(u) = stack.pop() {
            for &(w, a) in self.g.neighbours(u) {
                if !self.excluded[a] && !seen[w] {
                    seen[w] = true;
                    reached += 1;
                    stack.push(w);
                }
            }
        }
        reached == n
    }
}

struct DualArcEnds(usize, usize);
