//! Collapsing 3-spheres along dual spanning trees and greedy collapse of
//! the resulting 2-complexes.

use std::sync::Arc;

use rand::Rng;
use serde::Serialize;

use crate::complex::{Complex3, DualGraph, Edge, Simplicial, Triangle, Vertex};
use crate::error::{Error, Result};
use crate::spanning::{seeded_rng, SpanningTree, WilsonSampler};

/// Static incidence structure shared by every [`TwoComplex`] built on the
/// same triangle set. Vertices, edges and triangles are indexed in
/// lexicographic order of their labels.
#[derive(Debug)]
pub struct Skeleton {
    vertices: Vec<Vertex>,
    edges: Vec<[u32; 2]>,
    triangles: Vec<[u32; 3]>,
    triangle_edges: Vec<[u32; 3]>,
    edge_triangles: Csr,
    vertex_edges: Csr,
}

#[derive(Debug)]
struct Csr {
    offsets: Vec<u32>,
    items: Vec<u32>,
}

impl Csr {
    fn build(n: usize, pairs: impl Iterator<Item = (usize, u32)> + Clone) -> Self {
        let mut offsets = vec![0u32; n + 1];
        for (k, _) in pairs.clone() {
            offsets[k + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        let mut fill = offsets.clone();
        let mut items = vec![0u32; offsets[n] as usize];
        for (k, x) in pairs {
            items[fill[k] as usize] = x;
            fill[k] += 1;
        }
        Csr { offsets, items }
    }

    fn get(&self, k: usize) -> &[u32] {
        &self.items[self.offsets[k] as usize..self.offsets[k + 1] as usize]
    }
}

impl Skeleton {
    /// 2-skeleton (all triangles, edges and vertices) of a 3-complex. Triangle
    /// ids match the dual-graph arc ids.
    pub fn of_complex(c: &Complex3) -> Self {
        Self::from_triangles(&c.triangles())
    }

    /// Skeleton spanned by a triangle list with arbitrary labels.
    pub fn from_triangles(triangles: &[Triangle]) -> Self {
        let mut tris: Vec<Triangle> = triangles.iter().map(|&t| crate::complex::sorted3(t)).collect();
        tris.sort_unstable();
        tris.dedup();
        let mut vertices: Vec<Vertex> = tris.iter().flatten().copied().collect();
        vertices.sort_unstable();
        vertices.dedup();
        let vidx = |l: Vertex| vertices.binary_search(&l).unwrap() as u32;

        let mut edges: Vec<[u32; 2]> = tris
            .iter()
            .flat_map(|t| [[t[0], t[1]], [t[0], t[2]], [t[1], t[2]]])
            .map(|e| [vidx(e[0]), vidx(e[1])])
            .collect();
        edges.sort_unstable();
        edges.dedup();
        let eidx = |a: u32, b: u32| edges.binary_search(&[a, b]).unwrap() as u32;

        let tri_v: Vec<[u32; 3]> = tris.iter().map(|t| t.map(vidx)).collect();
        let triangle_edges: Vec<[u32; 3]> = tri_v
            .iter()
            .map(|t| [eidx(t[0], t[1]), eidx(t[0], t[2]), eidx(t[1], t[2])])
            .collect();

        let edge_triangles = Csr::build(
            edges.len(),
            triangle_edges
                .iter()
                .enumerate()
                .flat_map(|(t, es)| es.iter().map(move |&e| (e as usize, t as u32))),
        );
        let vertex_edges = Csr::build(
            vertices.len(),
            edges
                .iter()
                .enumerate()
                .flat_map(|(e, vs)| vs.iter().map(move |&v| (v as usize, e as u32))),
        );

        Skeleton { vertices, edges, triangles: tri_v, triangle_edges, edge_triangles, vertex_edges }
    }

    pub fn triangle_count(&self) -> usize {
        self.triangles.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_labels(&self, e: usize) -> Edge {
        self.edges[e].map(|v| self.vertices[v as usize])
    }

    pub fn triangle_labels(&self, t: usize) -> Triangle {
        self.triangles[t].map(|v| self.vertices[v as usize])
    }

    pub fn edge_index(&self, e: Edge) -> Option<usize> {
        let e = crate::complex::sorted2(e);
        let a = self.vertices.binary_search(&e[0]).ok()? as u32;
        let b = self.vertices.binary_search(&e[1]).ok()? as u32;
        self.edges.binary_search(&[a, b]).ok()
    }

    pub fn triangle_index(&self, t: Triangle) -> Option<usize> {
        let t = crate::complex::sorted3(t);
        let mut v = [0u32; 3];
        for i in 0..3 {
            v[i] = self.vertices.binary_search(&t[i]).ok()? as u32;
        }
        self.triangles.binary_search(&v).ok()
    }
}

/// Mutable 2-complex over a shared [`Skeleton`].
///
/// `edge_incidence[e]` counts alive triangles on `e` and `vertex_incidence[v]`
/// counts alive edges on `v`; both are maintained by every mutation.
#[derive(Clone, Debug)]
pub struct TwoComplex {
    skeleton: Arc<Skeleton>,
    triangle_alive: Vec<bool>,
    edge_alive: Vec<bool>,
    vertex_alive: Vec<bool>,
    edge_incidence: Vec<u32>,
    vertex_incidence: Vec<u32>,
    alive: [usize; 3],
}

impl TwoComplex {
    /// Every face of the skeleton alive.
    pub fn full(skeleton: Arc<Skeleton>) -> Self {
        let mut tc = TwoComplex {
            triangle_alive: Vec::new(),
            edge_alive: Vec::new(),
            vertex_alive: Vec::new(),
            edge_incidence: Vec::new(),
            vertex_incidence: Vec::new(),
            alive: [0; 3],
            skeleton,
        };
        tc.reset();
        tc
    }

    pub fn from_triangles(triangles: &[Triangle]) -> Self {
        Self::full(Arc::new(Skeleton::from_triangles(triangles)))
    }

    /// Restores every face without reallocating.
    pub fn reset(&mut self) {
        let s = &*self.skeleton;
        self.triangle_alive.clear();
        self.triangle_alive.resize(s.triangles.len(), true);
        self.edge_alive.clear();
        self.edge_alive.resize(s.edges.len(), true);
        self.vertex_alive.clear();
        self.vertex_alive.resize(s.vertices.len(), true);
        self.edge_incidence.clear();
        self.edge_incidence
            .extend((0..s.edges.len()).map(|e| s.edge_triangles.get(e).len() as u32));
        self.vertex_incidence.clear();
        self.vertex_incidence
            .extend((0..s.vertices.len()).map(|v| s.vertex_edges.get(v).len() as u32));
        self.alive = [s.vertices.len(), s.edges.len(), s.triangles.len()];
    }

    pub fn skeleton(&self) -> &Arc<Skeleton> {
        &self.skeleton
    }

    /// Alive (vertices, edges, triangles).
    pub fn f_vector(&self) -> [usize; 3] {
        self.alive
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.alive[0] as i64 - self.alive[1] as i64 + self.alive[2] as i64
    }

    pub fn is_empty(&self) -> bool {
        self.alive == [0, 0, 0]
    }

    pub fn triangle_alive(&self, t: usize) -> bool {
        self.triangle_alive[t]
    }

    pub fn edge_alive(&self, e: usize) -> bool {
        self.edge_alive[e]
    }

    pub fn edge_incidence(&self, e: usize) -> u32 {
        self.edge_incidence[e]
    }

    pub fn vertex_incidence(&self, v: usize) -> u32 {
        self.vertex_incidence[v]
    }

    /// Alive triangles by label.
    pub fn triangles(&self) -> Vec<Triangle> {
        (0..self.triangle_alive.len())
            .filter(|&t| self.triangle_alive[t])
            .map(|t| self.skeleton.triangle_labels(t))
            .collect()
    }

    /// Alive edges by label.
    pub fn edges(&self) -> Vec<Edge> {
        (0..self.edge_alive.len())
            .filter(|&e| self.edge_alive[e])
            .map(|e| self.skeleton.edge_labels(e))
            .collect()
    }

    pub fn vertices(&self) -> Vec<Vertex> {
        (0..self.vertex_alive.len())
            .filter(|&v| self.vertex_alive[v])
            .map(|v| self.skeleton.vertices[v])
            .collect()
    }

    /// Alive edges contained in exactly one alive triangle.
    pub fn free_edges(&self) -> Vec<usize> {
        (0..self.edge_alive.len())
            .filter(|&e| self.edge_alive[e] && self.edge_incidence[e] == 1)
            .collect()
    }

    /// Degree of every alive edge, keyed by label.
    pub fn edge_degrees(&self) -> Vec<(Edge, u32)> {
        (0..self.edge_alive.len())
            .filter(|&e| self.edge_alive[e])
            .map(|e| (self.skeleton.edge_labels(e), self.edge_incidence[e]))
            .collect()
    }

    /// Removes a triangle, leaving its edges in place.
    pub fn remove_triangle(&mut self, t: usize) {
        if !std::mem::replace(&mut self.triangle_alive[t], false) {
            return;
        }
        self.alive[2] -= 1;
        for &e in &self.skeleton.triangle_edges[t] {
            self.edge_incidence[e as usize] -= 1;
        }
    }

    /// Removes an edge; it must not lie in an alive triangle.
    pub fn remove_edge(&mut self, e: usize) {
        debug_assert_eq!(self.edge_incidence[e], 0);
        if !std::mem::replace(&mut self.edge_alive[e], false) {
            return;
        }
        self.alive[1] -= 1;
        for &v in &self.skeleton.edges[e] {
            self.vertex_incidence[v as usize] -= 1;
        }
    }

    pub fn remove_vertex(&mut self, v: usize) {
        debug_assert_eq!(self.vertex_incidence[v], 0);
        if std::mem::replace(&mut self.vertex_alive[v], false) {
            self.alive[0] -= 1;
        }
    }

    /// Recounts every incidence from scratch and compares.
    pub fn is_consistent(&self) -> bool {
        let s = &*self.skeleton;
        let edges_ok = (0..s.edges.len()).all(|e| {
            let n = s
                .edge_triangles
                .get(e)
                .iter()
                .filter(|&&t| self.triangle_alive[t as usize])
                .count() as u32;
            n == self.edge_incidence[e] && (n == 0 || self.edge_alive[e])
        });
        let verts_ok = (0..s.vertices.len()).all(|v| {
            let n = s
                .vertex_edges
                .get(v)
                .iter()
                .filter(|&&e| self.edge_alive[e as usize])
                .count() as u32;
            n == self.vertex_incidence[v] && (n == 0 || self.vertex_alive[v])
        });
        let counts = [
            self.vertex_alive.iter().filter(|&&b| b).count(),
            self.edge_alive.iter().filter(|&&b| b).count(),
            self.triangle_alive.iter().filter(|&&b| b).count(),
        ];
        edges_ok && verts_ok && counts == self.alive
    }

    /// Connected components of the alive part.
    pub fn component_count(&self) -> usize {
        let s = &*self.skeleton;
        let mut seen = vec![false; s.vertices.len()];
        let mut components = 0;
        for start in 0..s.vertices.len() {
            if !self.vertex_alive[start] || seen[start] {
                continue;
            }
            components += 1;
            seen[start] = true;
            let mut stack = vec![start];
            while let Some(v) = stack.pop() {
                for &e in s.vertex_edges.get(v) {
                    if !self.edge_alive[e as usize] {
                        continue;
                    }
                    for &w in &s.edges[e as usize] {
                        if !seen[w as usize] {
                            seen[w as usize] = true;
                            stack.push(w as usize);
                        }
                    }
                }
            }
        }
        components
    }
}

impl Simplicial for TwoComplex {
    fn generators(&self) -> Vec<Vec<Vertex>> {
        let mut g: Vec<Vec<Vertex>> = self.triangles().into_iter().map(|t| t.to_vec()).collect();
        g.extend(self.edges().into_iter().map(|e| e.to_vec()));
        g.extend(self.vertices().into_iter().map(|v| vec![v]));
        g
    }
}

/// One elementary collapse: `face` is free and `coface` its unique coface.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Removal {
    pub face: Vec<Vertex>,
    pub coface: Vec<Vertex>,
}

/// Result of [`greedy_collapse`].
#[derive(Clone, Debug)]
pub struct CollapseOutcome {
    pub collapsed_to_point: bool,
    /// What is left (empty when collapsed to a point).
    pub remainder: TwoComplex,
    pub removal_log: Vec<Removal>,
    /// Set when the input was not a connected complex of Euler characteristic 1.
    pub contract_note: Option<String>,
}

impl CollapseOutcome {
    /// The removal log as JSON lines `{"step":..,"face":[..],"coface":[..]}`.
    pub fn log_json_lines(&self) -> String {
        removal_log_json_lines(&self.removal_log)
    }
}

pub fn removal_log_json_lines(log: &[Removal]) -> String {
    #[derive(Serialize)]
    struct Line<'a> {
        step: usize,
        face: &'a [Vertex],
        coface: &'a [Vertex],
    }
    let mut out = String::new();
    for (step, r) in log.iter().enumerate() {
        out.push_str(
            &serde_json::to_string(&Line { step, face: &r.face, coface: &r.coface })
                .expect("log line serializes"),
        );
        out.push('\n');
    }
    out
}

/// Scratch space for the greedy procedure.
#[derive(Clone, Debug, Default)]
pub struct CollapseScratch {
    pending: Vec<u32>,
}

/// Greedy collapse in place. Phase 1 removes (free edge, triangle) pairs in a
/// random order drawn from `rng`; if no triangle is left, phase 2 removes
/// (free vertex, edge) pairs. Returns whether a single vertex remains.
pub fn collapse_in_place<R: Rng + ?Sized>(
    tc: &mut TwoComplex,
    rng: &mut R,
    scratch: &mut CollapseScratch,
    mut log: Option<&mut Vec<Removal>>,
) -> bool {
    let skeleton = Arc::clone(&tc.skeleton);
    let s = &*skeleton;
    let pending = &mut scratch.pending;

    pending.clear();
    pending.extend(
        (0..s.edges.len() as u32).filter(|&e| tc.edge_alive[e as usize] && tc.edge_incidence[e as usize] == 1),
    );
    while !pending.is_empty() {
        let i = rng.random_range(0..pending.len());
        let e = pending.swap_remove(i) as usize;
        if !tc.edge_alive[e] || tc.edge_incidence[e] != 1 {
            continue;
        }
        let t = s
            .edge_triangles
            .get(e)
            .iter()
            .map(|&t| t as usize)
            .find(|&t| tc.triangle_alive[t])
            .expect("free edge has an alive triangle");
        if let Some(log) = log.as_deref_mut() {
            log.push(Removal {
                face: s.edge_labels(e).to_vec(),
                coface: s.triangle_labels(t).to_vec(),
            });
        }
        tc.remove_triangle(t);
        tc.remove_edge(e);
        for &f in &s.triangle_edges[t] {
            if tc.edge_incidence[f as usize] == 1 && tc.edge_alive[f as usize] {
                pending.push(f);
            }
        }
    }
    if tc.alive[2] > 0 {
        return false;
    }

    pending.clear();
    pending.extend(
        (0..s.vertices.len() as u32)
            .filter(|&v| tc.vertex_alive[v as usize] && tc.vertex_incidence[v as usize] == 1),
    );
    while !pending.is_empty() {
        let i = rng.random_range(0..pending.len());
        let v = pending.swap_remove(i) as usize;
        if !tc.vertex_alive[v] || tc.vertex_incidence[v] != 1 {
            continue;
        }
        let e = s
            .vertex_edges
            .get(v)
            .iter()
            .map(|&e| e as usize)
            .find(|&e| tc.edge_alive[e])
            .expect("free vertex has an alive edge");
        if let Some(log) = log.as_deref_mut() {
            log.push(Removal {
                face: vec![s.vertices[v]],
                coface: s.edge_labels(e).to_vec(),
            });
        }
        tc.remove_edge(e);
        tc.remove_vertex(v);
        let w = s.edges[e].iter().copied().find(|&w| w as usize != v).unwrap() as usize;
        if tc.vertex_incidence[w] == 1 {
            pending.push(w as u32);
        }
    }
    tc.alive == [1, 0, 0]
}

/// Runs the greedy procedure on a copy of `tc` with order seed `order_seed`.
///
/// For connected inputs with Euler characteristic 1 the answer does not
/// depend on the seed; for other inputs it reports this particular run and
/// sets `contract_note`.
pub fn greedy_collapse(tc: &TwoComplex, order_seed: u64) -> CollapseOutcome {
    let contract_note = {
        let chi = tc.euler_characteristic();
        let comps = tc.component_count();
        (chi != 1 || comps != 1).then(|| {
            format!(
                "input has Euler characteristic {chi} and {comps} component(s); \
                 result describes one greedy run only"
            )
        })
    };
    let mut work = tc.clone();
    let mut log = Vec::new();
    let collapsed = collapse_in_place(
        &mut work,
        &mut seeded_rng(order_seed),
        &mut CollapseScratch::default(),
        Some(&mut log),
    );
    if collapsed {
        // the last vertex goes too, leaving the empty complex
        let v = (0..work.vertex_alive.len()).find(|&v| work.vertex_alive[v]).unwrap();
        work.remove_vertex(v);
    }
    CollapseOutcome { collapsed_to_point: collapsed, remainder: work, removal_log: log, contract_note }
}

/// Edges of the 2-complex that are free, by skeleton edge id.
pub fn free_edges(tc: &TwoComplex) -> Vec<usize> {
    tc.free_edges()
}

/// Removes the 3-cells of a closed 3-manifold along a spanning tree of its
/// dual graph: the root facet, then each remaining facet through the
/// triangle of its parent arc. What remains are the `n + 1` triangles not
/// crossed by the tree together with the full 1-skeleton.
pub fn collapse_along_tree(c: &Complex3, t: &SpanningTree) -> Result<TwoComplex> {
    let g = c.dual_graph()?;
    let skeleton = Arc::new(Skeleton::of_complex(c));
    collapse_along_tree_with(&g, &skeleton, t)
}

pub fn collapse_along_tree_with(
    g: &DualGraph,
    skeleton: &Arc<Skeleton>,
    t: &SpanningTree,
) -> Result<TwoComplex> {
    check_tree(g, t)?;
    let mut tc = TwoComplex::full(Arc::clone(skeleton));
    for &a in t.arcs() {
        tc.remove_triangle(g.arc(a).triangle);
    }
    Ok(tc)
}

fn check_tree(g: &DualGraph, t: &SpanningTree) -> Result<()> {
    if t.node_count() != g.node_count() {
        return Err(Error::TreeMismatch(format!(
            "tree covers {} nodes, dual graph has {}",
            t.node_count(),
            g.node_count()
        )));
    }
    if t.arcs().iter().any(|&a| a >= g.arc_count()) {
        return Err(Error::TreeMismatch("tree uses arcs not in the dual graph".into()));
    }
    SpanningTree::from_arcs(g, t.root(), t.arcs()).map(|_| ())
}

/// The 3-dimensional part of the collapse as `(triangle, facet)` pairs.
///
/// The root facet is removed first (not an elementary collapse, so it is not
/// listed); every later facet is removed through the triangle shared with
/// its tree parent, which is free at that moment because the parent is gone.
pub fn tree_collapse_sequence(c: &Complex3, t: &SpanningTree) -> Result<Vec<Removal>> {
    let g = c.dual_graph()?;
    check_tree(&g, t)?;
    let triangles = c.triangles();
    Ok(t.top_down_order(&g)
        .into_iter()
        .skip(1)
        .map(|node| {
            let arc = g.arc(t.parent_arc(node).unwrap());
            Removal {
                face: triangles[arc.triangle].to_vec(),
                coface: c.facets()[node].to_vec(),
            }
        })
        .collect())
}

/// Precomputed data for repeated trials on one complex.
#[derive(Clone, Debug)]
pub struct TrialContext {
    graph: DualGraph,
    skeleton: Arc<Skeleton>,
}

impl TrialContext {
    /// Validates `c` as a connected closed 3-manifold.
    pub fn new(c: &Complex3) -> Result<Self> {
        c.validate()?;
        let graph = c.dual_graph()?;
        let skeleton = Arc::new(Skeleton::of_complex(c));
        Ok(TrialContext { graph, skeleton })
    }

    pub fn graph(&self) -> &DualGraph {
        &self.graph
    }

    pub fn skeleton(&self) -> &Arc<Skeleton> {
        &self.skeleton
    }

    pub fn workspace(&self) -> TrialWorkspace {
        TrialWorkspace {
            sampler: WilsonSampler::default(),
            complex: TwoComplex::full(Arc::clone(&self.skeleton)),
            scratch: CollapseScratch::default(),
        }
    }

    /// Fills `ws.complex` with the collapse of a freshly sampled tree.
    pub fn sample_two_complex<R: Rng + ?Sized>(&self, ws: &mut TrialWorkspace, rng: &mut R) {
        ws.sampler.sample(&self.graph, rng);
        ws.complex.reset();
        for &a in ws.sampler.parent_arcs() {
            if a != WilsonSampler::NO_ARC {
                ws.complex.remove_triangle(self.graph.arc(a).triangle);
            }
        }
    }

    /// The 2-complex left after collapsing along `arcs` (a tree given by arc ids).
    pub fn two_complex_for_arcs(&self, ws: &mut TrialWorkspace, arcs: &[usize]) {
        ws.complex.reset();
        for &a in arcs {
            ws.complex.remove_triangle(self.graph.arc(a).triangle);
        }
    }

    /// One Bernoulli draw: sample, collapse along the tree, collapse greedily.
    pub fn run_trial<R: Rng + ?Sized>(&self, ws: &mut TrialWorkspace, rng: &mut R) -> bool {
        self.sample_two_complex(ws, rng);
        collapse_in_place(&mut ws.complex, rng, &mut ws.scratch, None)
    }
}

/// Per-worker buffers reused across trials.
#[derive(Clone, Debug)]
pub struct TrialWorkspace {
    sampler: WilsonSampler,
    pub(crate) complex: TwoComplex,
    pub(crate) scratch: CollapseScratch,
}

impl TrialWorkspace {
    pub fn complex(&self) -> &TwoComplex {
        &self.complex
    }
}

/// One trial with a generator seeded by `seed`.
pub fn trial(c: &Complex3, seed: u64) -> Result<bool> {
    let ctx = TrialContext::new(c)?;
    let mut ws = ctx.workspace();
    Ok(ctx.run_trial(&mut ws, &mut seeded_rng(seed)))
}
