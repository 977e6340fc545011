//! Pure 3-dimensional simplicial complexes given by facet lists.
//!
//! A [`Complex3`] is immutable once built. Vertex labels are compressed to
//! the contiguous range `1..=v` on construction (order preserving), each
//! facet is stored with its vertices sorted, and the facet order of the input
//! is kept. Edges and triangles are indexed lexicographically by their sorted
//! vertex tuples, so ids are stable across runs.

mod canonical;
mod manifold;
mod parse;

pub use canonical::{canonical_form, canonical_form_with_bound, CanonicalForm, DEFAULT_CANONICAL_BOUND};
pub use manifold::{ManifoldDefect, ManifoldReport};
pub use parse::{parse_facets, parse_facet_lists};

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vertex = u32;
pub type Edge = [Vertex; 2];
pub type Triangle = [Vertex; 3];
pub type Facet = [Vertex; 4];

/// Anything that can be described by a list of generating simplices.
///
/// The generators need not be maximal; every subset of a generator is a face.
pub trait Simplicial {
    fn generators(&self) -> Vec<Vec<Vertex>>;
}

impl Simplicial for [Vec<Vertex>] {
    fn generators(&self) -> Vec<Vec<Vertex>> {
        self.to_vec()
    }
}

impl Simplicial for Vec<Vec<Vertex>> {
    fn generators(&self) -> Vec<Vec<Vertex>> {
        self.clone()
    }
}

/// All faces of a simplicial complex grouped by dimension, each level sorted.
pub fn faces_by_dimension<S: Simplicial + ?Sized>(s: &S) -> Vec<Vec<Vec<Vertex>>> {
    let gens = s.generators();
    let top = gens.iter().map(|g| g.len()).max().unwrap_or(0);
    let mut levels: Vec<std::collections::BTreeSet<Vec<Vertex>>> =
        vec![Default::default(); top];
    for g in gens {
        let mut g = g.clone();
        g.sort_unstable();
        g.dedup();
        let k = g.len();
        for mask in 1u32..(1 << k) {
            let face: Vec<Vertex> = (0..k).filter(|i| mask >> i & 1 == 1).map(|i| g[i]).collect();
            levels[face.len() - 1].insert(face);
        }
    }
    levels.into_iter().map(|l| l.into_iter().collect()).collect()
}

/// Face counts by dimension.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FVector {
    pub f0: usize,
    pub f1: usize,
    pub f2: usize,
    pub f3: usize,
}

impl FVector {
    pub fn euler_characteristic(&self) -> i64 {
        self.f0 as i64 - self.f1 as i64 + self.f2 as i64 - self.f3 as i64
    }

    pub fn as_array(&self) -> [usize; 4] {
        [self.f0, self.f1, self.f2, self.f3]
    }
}

impl std::fmt::Display for FVector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {}, {}, {})", self.f0, self.f1, self.f2, self.f3)
    }
}

/// Edges of a complex with their tetrahedron-incidence degree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeTable {
    pub edges: Vec<Edge>,
    pub degree: Vec<u32>,
}

impl EdgeTable {
    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn index_of(&self, edge: Edge) -> Option<usize> {
        let key = sorted2(edge);
        self.edges.binary_search(&key).ok()
    }

    pub fn degree_sum(&self) -> u64 {
        self.degree.iter().map(|&d| d as u64).sum()
    }

    pub fn histogram(&self) -> BTreeMap<u32, usize> {
        let mut h = BTreeMap::new();
        for &d in &self.degree {
            *h.entry(d).or_insert(0) += 1;
        }
        h
    }
}

/// One arc of the dual graph: two facets glued along a triangle.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DualArc {
    pub a: usize,
    pub b: usize,
    pub triangle: usize,
}

/// Face-pairing graph. Nodes are facets, arcs are shared triangles.
///
/// For a closed 3-manifold arc `i` is glued along triangle `i` of the
/// lexicographic triangle table, so arc ids and triangle ids coincide.
/// Parallel arcs are kept.
#[derive(Clone, Debug)]
pub struct DualGraph {
    node_count: usize,
    arcs: Vec<DualArc>,
    adjacency: Vec<Vec<(usize, usize)>>,
}

impl DualGraph {
    /// Builds a graph from an arbitrary arc list; arc `i` gets triangle id `i`.
    pub fn from_arcs(node_count: usize, arcs: &[(usize, usize)]) -> Result<Self> {
        let arcs = arcs
            .iter()
            .enumerate()
            .map(|(i, &(a, b))| {
                if a >= node_count || b >= node_count {
                    return Err(Error::Domain(format!("arc {i} ({a}, {b}) out of range")));
                }
                if a == b {
                    return Err(Error::Domain(format!("arc {i} is a loop")));
                }
                Ok(DualArc { a, b, triangle: i })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::build(node_count, arcs))
    }

    fn build(node_count: usize, arcs: Vec<DualArc>) -> Self {
        let mut adjacency = vec![Vec::new(); node_count];
        for (i, arc) in arcs.iter().enumerate() {
            adjacency[arc.a].push((arc.b, i));
            adjacency[arc.b].push((arc.a, i));
        }
        DualGraph { node_count, arcs, adjacency }
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn arc_count(&self) -> usize {
        self.arcs.len()
    }

    pub fn arcs(&self) -> &[DualArc] {
        &self.arcs
    }

    pub fn arc(&self, id: usize) -> DualArc {
        self.arcs[id]
    }

    /// `(neighbour, arc id)` pairs of a node.
    pub fn neighbours(&self, node: usize) -> &[(usize, usize)] {
        &self.adjacency[node]
    }

    pub fn degree(&self, node: usize) -> usize {
        self.adjacency[node].len()
    }

    pub fn is_connected(&self) -> bool {
        if self.node_count == 0 {
            return false;
        }
        let mut seen = vec![false; self.node_count];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = stack.pop() {
            for &(w, _) in &self.adjacency[u] {
                if !seen[w] {
                    seen[w] = true;
                    count += 1;
                    stack.push(w);
                }
            }
        }
        count == self.node_count
    }
}

/// Immutable pure 3-dimensional simplicial complex.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Complex3 {
    facets: Vec<Facet>,
    vertex_count: usize,
}

impl Complex3 {
    /// Builds a complex from facets with arbitrary positive labels.
    ///
    /// Labels are compressed to `1..=v` keeping their relative order; facets
    /// keep their input order.
    pub fn new(facets: Vec<Facet>) -> Result<Self> {
        if facets.is_empty() {
            return Err(Error::Empty);
        }
        let mut labels: Vec<Vertex> = facets.iter().flatten().copied().collect();
        labels.sort_unstable();
        labels.dedup();
        let relabel: HashMap<Vertex, Vertex> =
            labels.iter().enumerate().map(|(i, &l)| (l, i as Vertex + 1)).collect();

        let mut seen = std::collections::HashSet::with_capacity(facets.len());
        let mut out = Vec::with_capacity(facets.len());
        for f in facets {
            let mut g = f.map(|x| relabel[&x]);
            g.sort_unstable();
            if g.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::Domain(format!("facet {f:?} repeats a vertex")));
            }
            if !seen.insert(g) {
                return Err(Error::DuplicateFacet(f.to_vec()));
            }
            out.push(g);
        }
        Ok(Complex3 { facets: out, vertex_count: labels.len() })
    }

    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    pub fn facet_count(&self) -> usize {
        self.facets.len()
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    /// Distinct edges, lexicographic.
    pub fn edges(&self) -> Vec<Edge> {
        let mut e: Vec<Edge> = self.facets.iter().flat_map(facet_edges).collect();
        e.sort_unstable();
        e.dedup();
        e
    }

    /// Distinct triangles, lexicographic.
    pub fn triangles(&self) -> Vec<Triangle> {
        let mut t: Vec<Triangle> = self.facets.iter().flat_map(facet_triangles).collect();
        t.sort_unstable();
        t.dedup();
        t
    }

    pub fn f_vector(&self) -> FVector {
        FVector {
            f0: self.vertex_count,
            f1: self.edges().len(),
            f2: self.triangles().len(),
            f3: self.facets.len(),
        }
    }

    pub fn edge_table(&self) -> EdgeTable {
        let mut all: Vec<Edge> = self.facets.iter().flat_map(facet_edges).collect();
        all.sort_unstable();
        let mut edges: Vec<Edge> = Vec::new();
        let mut degree: Vec<u32> = Vec::new();
        for e in all {
            if edges.last() == Some(&e) {
                *degree.last_mut().unwrap() += 1;
            } else {
                edges.push(e);
                degree.push(1);
            }
        }
        EdgeTable { edges, degree }
    }

    /// `(triangle, facets containing it)` for every triangle, lexicographic.
    pub fn triangle_incidence(&self) -> Vec<(Triangle, Vec<usize>)> {
        let mut pairs: Vec<(Triangle, usize)> = self
            .facets
            .iter()
            .enumerate()
            .flat_map(|(i, f)| facet_triangles(f).into_iter().map(move |t| (t, i)))
            .collect();
        pairs.sort_unstable();
        let mut out: Vec<(Triangle, Vec<usize>)> = Vec::new();
        for (t, i) in pairs {
            match out.last_mut() {
                Some((last, list)) if *last == t => list.push(i),
                _ => out.push((t, vec![i])),
            }
        }
        out
    }

    /// Face-pairing graph; fails if some triangle is not in exactly two facets.
    pub fn dual_graph(&self) -> Result<DualGraph> {
        let incidence = self.triangle_incidence();
        let mut arcs = Vec::with_capacity(incidence.len());
        for (id, (t, fs)) in incidence.into_iter().enumerate() {
            if fs.len() != 2 {
                return Err(Error::NotClosed { triangle: t, facets: fs.len() });
            }
            arcs.push(DualArc { a: fs[0], b: fs[1], triangle: id });
        }
        Ok(DualGraph::build(self.facets.len(), arcs))
    }

    /// Number of connected components of the underlying space.
    pub fn component_count(&self) -> usize {
        let mut parent: Vec<usize> = (0..=self.vertex_count).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for f in &self.facets {
            let r = find(&mut parent, f[0] as usize);
            for &v in &f[1..] {
                let s = find(&mut parent, v as usize);
                parent[s] = r;
            }
        }
        (1..=self.vertex_count)
            .filter(|&v| find(&mut parent, v) == v)
            .count()
    }

    pub fn is_connected(&self) -> bool {
        self.component_count() == 1
    }

    /// Link-condition report; see [`ManifoldReport`].
    pub fn manifold_report(&self) -> ManifoldReport {
        manifold::check(self)
    }

    pub fn is_closed_3_manifold(&self) -> bool {
        self.manifold_report().passed()
    }

    /// Errors unless the complex is a connected closed 3-manifold.
    pub fn validate(&self) -> Result<()> {
        let report = self.manifold_report();
        match report.first_failure() {
            None => Ok(()),
            Some(ManifoldDefect::Disconnected { components }) => {
                Err(Error::Disconnected(*components))
            }
            Some(ManifoldDefect::TriangleDegree { triangle, facets }) => {
                Err(Error::NotClosed { triangle: *triangle, facets: *facets })
            }
            Some(d) => Err(Error::InvalidManifold(d.to_string())),
        }
    }

    /// Applies `perm`, where `perm[i]` is the new label of vertex `i + 1`.
    pub fn relabel(&self, perm: &[Vertex]) -> Result<Self> {
        if perm.len() != self.vertex_count {
            return Err(Error::Domain(format!(
                "permutation has {} entries for {} vertices",
                perm.len(),
                self.vertex_count
            )));
        }
        Complex3::new(
            self.facets
                .iter()
                .map(|f| f.map(|v| perm[v as usize - 1]))
                .collect(),
        )
    }

    /// Disjoint union with labels of `other` shifted past ours.
    pub fn disjoint_union(&self, other: &Complex3) -> Result<Self> {
        let shift = self.vertex_count as Vertex;
        let mut facets = self.facets.clone();
        facets.extend(other.facets.iter().map(|f| f.map(|v| v + shift)));
        Complex3::new(facets)
    }

    pub fn facet_lists(&self) -> Vec<Vec<Vertex>> {
        self.facets.iter().map(|f| f.to_vec()).collect()
    }

    /// Facet-list text, one facet per line.
    pub fn to_text(&self) -> String {
        let mut s = String::with_capacity(self.facets.len() * 12);
        for f in &self.facets {
            s.push_str(&format!("{} {} {} {}\n", f[0], f[1], f[2], f[3]));
        }
        s
    }

    /// `{"facets": [[a,b,c,d], ...]}`.
    pub fn to_json(&self) -> String {
        serde_json::to_string(&FacetDocument { facets: self.facet_lists() })
            .expect("facet lists serialize")
    }

    pub fn canonical_form(&self) -> Result<CanonicalForm> {
        canonical_form(self)
    }
}

impl Simplicial for Complex3 {
    fn generators(&self) -> Vec<Vec<Vertex>> {
        self.facet_lists()
    }
}

#[derive(Serialize, Deserialize)]
pub(crate) struct FacetDocument {
    pub facets: Vec<Vec<Vertex>>,
}

pub fn sorted2(e: Edge) -> Edge {
    if e[0] <= e[1] {
        e
    } else {
        [e[1], e[0]]
    }
}

pub fn sorted3(mut t: Triangle) -> Triangle {
    t.sort_unstable();
    t
}

pub(crate) fn facet_edges(f: &Facet) -> [Edge; 6] {
    [
        [f[0], f[1]],
        [f[0], f[2]],
        [f[0], f[3]],
        [f[1], f[2]],
        [f[1], f[3]],
        [f[2], f[3]],
    ]
}

/// Triangles of a sorted facet; triangle `i` omits vertex `3 - i`.
pub(crate) fn facet_triangles(f: &Facet) -> [Triangle; 4] {
    [
        [f[0], f[1], f[2]],
        [f[0], f[1], f[3]],
        [f[0], f[2], f[3]],
        [f[1], f[2], f[3]],
    ]
}

/// The boundary of the 4-simplex, the smallest 3-sphere.
pub fn boundary_of_4_simplex() -> Complex3 {
    Complex3::new(vec![
        [1, 2, 3, 4],
        [1, 2, 3, 5],
        [1, 2, 4, 5],
        [1, 3, 4, 5],
        [2, 3, 4, 5],
    ])
    .expect("static facets")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn boundary_of_4_simplex_counts() {
        let c = boundary_of_4_simplex();
        assert_eq!(c.f_vector().as_array(), [5, 10, 10, 5]);
        let et = c.edge_table();
        assert_eq!(et.len(), 10);
        assert!(et.degree.iter().all(|&d| d == 3));
        let g = c.dual_graph().unwrap();
        assert_eq!(g.arc_count(), 10);
        // complete graph: every pair of nodes joined exactly once
        let mut pairs: Vec<(usize, usize)> =
            g.arcs().iter().map(|a| (a.a.min(a.b), a.a.max(a.b))).collect();
        pairs.sort();
        pairs.dedup();
        assert_eq!(pairs.len(), 10);
        assert!((0..5).all(|v| g.degree(v) == 4));
    }

    #[test]
    fn single_tetrahedron() {
        let c = Complex3::new(vec![[1, 2, 3, 4]]).unwrap();
        assert_eq!(c.f_vector().as_array(), [4, 6, 4, 1]);
        assert!(c.edge_table().degree.iter().all(|&d| d == 1));
        match c.dual_graph() {
            Err(Error::NotClosed { facets: 1, .. }) => {}
            other => panic!("expected not-closed error, got {other:?}"),
        }
        assert!(!c.is_closed_3_manifold());
    }

    #[test]
    fn labels_are_compressed_in_order() {
        let c = Complex3::new(vec![[10, 20, 30, 40], [10, 20, 30, 50]]).unwrap();
        assert_eq!(c.facets(), &[[1, 2, 3, 4], [1, 2, 3, 5]]);
        assert_eq!(c.vertex_count(), 5);
    }

    #[test]
    fn duplicate_facets_rejected() {
        assert!(matches!(
            Complex3::new(vec![[1, 2, 3, 4], [4, 3, 2, 1]]),
            Err(Error::DuplicateFacet(_))
        ));
    }

    #[test]
    fn disjoint_union_is_rejected_by_validation() {
        let s = boundary_of_4_simplex();
        let two = s.disjoint_union(&s).unwrap();
        let report = two.manifold_report();
        assert!(report.links_ok());
        assert!(!report.passed());
        assert!(matches!(two.validate(), Err(Error::Disconnected(2))));
    }

    #[test]
    fn edge_lookup() {
        let et = boundary_of_4_simplex().edge_table();
        assert_eq!(et.index_of([1, 2]), Some(0));
        assert_eq!(et.index_of([5, 4]), Some(9));
        assert_eq!(et.index_of([1, 6]), None);
    }
}
