use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::Serialize;

use crate::complex::{facet_edges, Complex3, Edge, Triangle, Vertex};

/// A single failed condition of the closed 3-manifold test.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum ManifoldDefect {
    /// A triangle not contained in exactly two facets.
    TriangleDegree { triangle: Triangle, facets: usize },
    /// An edge whose link is not a single cycle.
    EdgeLink { edge: Edge, reason: String },
    /// A vertex whose link is not a connected closed surface of Euler characteristic 2.
    VertexLink { vertex: Vertex, reason: String },
    Disconnected { components: usize },
}

impl fmt::Display for ManifoldDefect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ManifoldDefect::TriangleDegree { triangle, facets } => {
                write!(f, "triangle {triangle:?} lies in {facets} facet(s)")
            }
            ManifoldDefect::EdgeLink { edge, reason } => write!(f, "link of edge {edge:?}: {reason}"),
            ManifoldDefect::VertexLink { vertex, reason } => {
                write!(f, "link of vertex {vertex}: {reason}")
            }
            ManifoldDefect::Disconnected { components } => {
                write!(f, "complex has {components} components")
            }
        }
    }
}

/// Outcome of the closed-manifold test, in check order.
#[derive(Clone, Debug, Default, Serialize)]
pub struct ManifoldReport {
    pub defects: Vec<ManifoldDefect>,
}

impl ManifoldReport {
    pub fn passed(&self) -> bool {
        self.defects.is_empty()
    }

    /// True when all local (link) conditions hold, ignoring connectivity.
    pub fn links_ok(&self) -> bool {
        self.defects
            .iter()
            .all(|d| matches!(d, ManifoldDefect::Disconnected { .. }))
    }

    pub fn first_failure(&self) -> Option<&ManifoldDefect> {
        self.defects.first()
    }
}

pub(super) fn check(c: &Complex3) -> ManifoldReport {
    let mut report = ManifoldReport::default();

    for (t, fs) in c.triangle_incidence() {
        if fs.len() != 2 {
            report.defects.push(ManifoldDefect::TriangleDegree { triangle: t, facets: fs.len() });
            // link checks below assume a pseudomanifold
            return report;
        }
    }

    let mut edge_links: BTreeMap<Edge, Vec<Edge>> = BTreeMap::new();
    let mut vertex_links: BTreeMap<Vertex, Vec<Triangle>> = BTreeMap::new();
    for f in c.facets() {
        for e in facet_edges(f) {
            let rest: Vec<Vertex> = f.iter().copied().filter(|v| !e.contains(v)).collect();
            edge_links.entry(e).or_default().push([rest[0], rest[1]]);
        }
        for (i, &v) in f.iter().enumerate() {
            let mut t = [0; 3];
            let mut k = 0;
            for (j, &w) in f.iter().enumerate() {
                if j != i {
                    t[k] = w;
                    k += 1;
                }
            }
            vertex_links.entry(v).or_default().push(t);
        }
    }

    for (e, link) in &edge_links {
        if let Some(reason) = single_cycle_defect(link) {
            report.defects.push(ManifoldDefect::EdgeLink { edge: *e, reason });
        }
    }

    for (v, link) in &vertex_links {
        if let Some(reason) = sphere_defect(link) {
            report.defects.push(ManifoldDefect::VertexLink { vertex: *v, reason });
        }
    }

    let components = c.component_count();
    if components != 1 {
        report.defects.push(ManifoldDefect::Disconnected { components });
    }
    report
}

/// `None` iff the edges form one cycle.
fn single_cycle_defect(edges: &[Edge]) -> Option<String> {
    let mut adj: HashMap<Vertex, Vec<Vertex>> = HashMap::new();
    for e in edges {
        adj.entry(e[0]).or_default().push(e[1]);
        adj.entry(e[1]).or_default().push(e[0]);
    }
    if let Some((v, n)) = adj.iter().find(|(_, n)| n.len() != 2) {
        return Some(format!("vertex {v} has link degree {}", n.len()));
    }
    let start = edges[0][0];
    let (mut prev, mut cur) = (start, edges[0][1]);
    let mut length = 1;
    while cur != start {
        let n = &adj[&cur];
        let next = if n[0] == prev { n[1] } else { n[0] };
        prev = cur;
        cur = next;
        length += 1;
    }
    if length != edges.len() {
        return Some(format!("link splits into several cycles ({} of {} edges)", length, edges.len()));
    }
    None
}

/// `None` iff the triangles form a connected closed surface with χ = 2.
fn sphere_defect(triangles: &[Triangle]) -> Option<String> {
    let mut edge_count: HashMap<Edge, usize> = HashMap::new();
    let mut vertices: Vec<Vertex> = Vec::new();
    for t in triangles {
        for e in [[t[0], t[1]], [t[0], t[2]], [t[1], t[2]]] {
            *edge_count.entry(e).or_insert(0) += 1;
        }
        vertices.extend_from_slice(t);
    }
    vertices.sort_unstable();
    vertices.dedup();
    if let Some((e, k)) = edge_count.iter().find(|(_, &k)| k != 2) {
        return Some(format!("edge {e:?} lies in {k} link triangles"));
    }

    let index: HashMap<Vertex, usize> = vertices.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut parent: Vec<usize> = (0..vertices.len()).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for e in edge_count.keys() {
        let (a, b) = (find(&mut parent, index[&e[0]]), find(&mut parent, index[&e[1]]));
        parent[a] = b;
    }
    let roots = (0..vertices.len()).filter(|&i| find(&mut parent, i) == i).count();
    if roots != 1 {
        return Some(format!("link has {roots} components"));
    }
    let chi = vertices.len() as i64 - edge_count.len() as i64 + triangles.len() as i64;
    if chi != 2 {
        return Some(format!("link has Euler characteristic {chi}"));
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::boundary_of_4_simplex;

    #[test]
    fn sphere_passes() {
        assert!(boundary_of_4_simplex().manifold_report().passed());
    }

    #[test]
    fn pinched_vertex_fails() {
        // two copies of the 4-simplex boundary glued at vertex 1
        let mut f: Vec<[u32; 4]> = boundary_of_4_simplex().facets().to_vec();
        f.extend([[1, 6, 7, 8], [1, 6, 7, 9], [1, 6, 8, 9], [1, 7, 8, 9], [6, 7, 8, 9]]);
        let c = Complex3::new(f).unwrap();
        let report = c.manifold_report();
        assert!(!report.passed());
        assert!(matches!(
            report.first_failure(),
            Some(ManifoldDefect::VertexLink { vertex: 1, .. })
        ));
    }

    #[test]
    fn open_complex_reports_triangle() {
        let c = Complex3::new(vec![[1, 2, 3, 4], [1, 2, 3, 5]]).unwrap();
        assert!(matches!(
            c.manifold_report().first_failure(),
            Some(ManifoldDefect::TriangleDegree { facets: 1, .. })
        ));
    }

    #[test]
    fn cycle_detection() {
        assert!(single_cycle_defect(&[[1, 2], [2, 3], [1, 3]]).is_none());
        assert!(single_cycle_defect(&[[1, 2], [2, 3], [1, 3], [4, 5], [5, 6], [4, 6]]).is_some());
        assert!(single_cycle_defect(&[[1, 2], [2, 3]]).is_some());
    }
}
