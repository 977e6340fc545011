//! Shipped obstruction complexes and the search for them inside sphere skeleta.
//!
//! The obstructions are the contractible, non-collapsible 2-complexes with 8
//! vertices and 18 triangles. Finding none of them (and none smaller) in the
//! 2-skeleton of a sphere certifies that the sphere minus a facet collapses
//! along every spanning tree.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::ops::ControlFlow;
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use crate::collapse::{greedy_collapse, TwoComplex};
use crate::complex::{canonical_form, parse_facet_lists, parse_facets, sorted3, Complex3, Triangle, Vertex};
use crate::error::{Error, Result};
use crate::estimate::trial_seed;
use crate::invariants::{f2_homology, obstruction_size_bounds, ObstructionBounds};

pub const OBSTRUCTIONS_18: &str = include_str!("../fixtures/obstructions18.txt");
pub const S15_FACETS: &str = include_str!("../fixtures/s15.facets");
pub const BOUNDARY_4_SIMPLEX_FACETS: &str = include_str!("../fixtures/boundary4simplex.facets");

/// Greedy orders tried before declaring a complex non-collapsible.
pub const VERIFY_ORDERS: u64 = 1000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    DunceHat,
    SawBlade2,
    SawBlade3,
    SawBlade4,
    Unknown,
}

impl Family {
    fn from_name(name: &str) -> Self {
        // Type I/II/III listings carry four/three/two blades
        if name.starts_with("duncehat") {
            Family::DunceHat
        } else if name.starts_with("sawblade-III-") {
            Family::SawBlade2
        } else if name.starts_with("sawblade-II-") {
            Family::SawBlade3
        } else if name.starts_with("sawblade-I-") {
            Family::SawBlade4
        } else {
            Family::Unknown
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ObstructionEntry {
    pub name: String,
    pub family: Family,
    pub triangles: Vec<Triangle>,
}

impl ObstructionEntry {
    pub fn two_complex(&self) -> TwoComplex {
        TwoComplex::from_triangles(&self.triangles)
    }

    pub fn vertex_count(&self) -> usize {
        self.triangles.iter().flatten().collect::<BTreeSet<_>>().len()
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("# {}\n", self.name);
        for t in &self.triangles {
            out.push_str(&format!("{} {} {}\n", t[0], t[1], t[2]));
        }
        out
    }
}

/// Parses `# name` headed blocks of triangle lines.
pub fn parse_blocks(text: &str) -> Result<Vec<ObstructionEntry>> {
    let mut entries: Vec<ObstructionEntry> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if let Some(name) = line.strip_prefix('#') {
            let name = name.trim().to_string();
            entries.push(ObstructionEntry { family: Family::from_name(&name), name, triangles: Vec::new() });
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let Some(entry) = entries.last_mut() else {
            return Err(Error::Parse { line: i + 1, message: "triangle before any block header".into() });
        };
        let parsed = parse_facet_lists(line).map_err(|e| match e {
            Error::Parse { message, .. } => Error::Parse { line: i + 1, message },
            other => other,
        })?;
        for (_, t) in parsed {
            if t.len() != 3 {
                return Err(Error::Parse { line: i + 1, message: format!("expected 3 vertices, found {}", t.len()) });
            }
            entry.triangles.push(sorted3([t[0], t[1], t[2]]));
        }
    }
    Ok(entries)
}

/// Every block of the shipped listing, in file order, duplicates included.
pub fn transcribed_blocks() -> Vec<ObstructionEntry> {
    parse_blocks(OBSTRUCTIONS_18).expect("shipped obstruction listing parses")
}

/// The shipped obstructions, one per isomorphism class, in file order.
pub fn load_catalog() -> Vec<ObstructionEntry> {
    let mut seen = HashSet::new();
    transcribed_blocks()
        .into_iter()
        .filter(|e| {
            let tris: Vec<Vec<Vertex>> = e.triangles.iter().map(|t| t.to_vec()).collect();
            seen.insert(canonical_form(&tris).expect("catalog entries have 8 vertices"))
        })
        .collect()
}

/// The 15-vertex, 90-facet sphere with a low collapsing probability.
pub fn s15() -> Complex3 {
    parse_facets(S15_FACETS).expect("shipped sphere parses")
}

pub fn boundary_of_4_simplex() -> Complex3 {
    parse_facets(BOUNDARY_4_SIMPLEX_FACETS).expect("shipped sphere parses")
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub euler_characteristic: i64,
    pub betti: Vec<usize>,
    pub collapsed_orders: u64,
    pub orders_tried: u64,
    pub degree_histogram: BTreeMap<u32, usize>,
    pub size_bounds: ObstructionBounds,
    pub checks: Vec<Check>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

/// Checks the properties every shipped obstruction must have.
pub fn verify_obstruction(tc: &TwoComplex) -> VerificationReport {
    let chi = tc.euler_characteristic();
    let homology = f2_homology(tc);
    let collapsed = (0..VERIFY_ORDERS)
        .filter(|&i| greedy_collapse(tc, trial_seed(0, i)).collapsed_to_point)
        .count() as u64;
    let degrees = tc.edge_degrees();
    let mut histogram = BTreeMap::new();
    for &(_, d) in &degrees {
        *histogram.entry(d).or_insert(0) += 1;
    }
    let cycle_edges: Vec<[Vertex; 2]> = degrees.iter().filter(|&&(_, d)| d == 3).map(|&(e, _)| e).collect();
    let bounds = obstruction_size_bounds(tc);

    let checks = vec![
        Check { name: "euler-characteristic", passed: chi == 1, detail: format!("chi = {chi}") },
        Check {
            name: "f2-homology",
            passed: homology.betti == [1, 0, 0],
            detail: format!("betti = {:?}", homology.betti),
        },
        Check {
            name: "non-collapsible",
            passed: collapsed == 0,
            detail: format!("{collapsed} of {VERIFY_ORDERS} greedy orders collapsed"),
        },
        Check {
            name: "degree-histogram",
            passed: histogram == BTreeMap::from([(2, 21), (3, 4)]),
            detail: format!("{histogram:?}"),
        },
        Check {
            name: "degree-3-cycle",
            passed: is_single_cycle(&cycle_edges, 4),
            detail: format!("{cycle_edges:?}"),
        },
        Check {
            name: "size-bounds",
            passed: bounds.could_be_obstruction(),
            detail: format!("f = ({}, {}, {})", bounds.f0, bounds.f1, bounds.f2),
        },
    ];
    VerificationReport {
        euler_characteristic: chi,
        betti: homology.betti,
        collapsed_orders: collapsed,
        orders_tried: VERIFY_ORDERS,
        degree_histogram: histogram,
        size_bounds: bounds,
        checks,
    }
}

/// True iff `edges` form one simple cycle of length `len`.
fn is_single_cycle(edges: &[[Vertex; 2]], len: usize) -> bool {
    if edges.len() != len || len < 3 {
        return false;
    }
    let mut nbrs: BTreeMap<Vertex, Vec<Vertex>> = BTreeMap::new();
    for &[a, b] in edges {
        nbrs.entry(a).or_default().push(b);
        nbrs.entry(b).or_default().push(a);
    }
    if nbrs.len() != len || nbrs.values().any(|n| n.len() != 2) {
        return false;
    }
    let start = *nbrs.keys().next().unwrap();
    let (mut prev, mut cur, mut steps) = (start, nbrs[&start][0], 1);
    while cur != start {
        let next = if nbrs[&cur][0] == prev { nbrs[&cur][1] } else { nbrs[&cur][0] };
        prev = cur;
        cur = next;
        steps += 1;
    }
    steps == len
}

/// Verifies every catalog entry, in parallel.
pub fn verify_catalog(entries: &[ObstructionEntry]) -> Vec<(String, VerificationReport)> {
    entries
        .par_iter()
        .map(|e| (e.name.clone(), verify_obstruction(&e.two_complex())))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EmbeddingResult {
    pub found: bool,
    /// Pattern vertex to host vertex, when found.
    pub vertex_map: Option<BTreeMap<Vertex, Vertex>>,
}

/// Host 2-skeleton prepared for repeated searches.
pub struct Host {
    labels: Vec<Vertex>,
    adjacency: Vec<Vec<u64>>,
    degree: Vec<usize>,
    triangle_degree: Vec<usize>,
    triangles: HashSet<[u32; 3]>,
}

impl Host {
    pub fn of_complex(c: &Complex3) -> Self {
        Self::from_triangles(&c.triangles())
    }

    pub fn from_triangles(triangles: &[Triangle]) -> Self {
        let labels: Vec<Vertex> = triangles.iter().flatten().copied().collect::<BTreeSet<_>>().into_iter().collect();
        let index: BTreeMap<Vertex, u32> = labels.iter().enumerate().map(|(i, &l)| (l, i as u32)).collect();
        let n = labels.len();
        let words = n.div_ceil(64);
        let mut adjacency = vec![vec![0u64; words]; n];
        let mut triangle_degree = vec![0; n];
        let mut set = HashSet::new();
        for t in triangles {
            let t = sorted3([index[&t[0]], index[&t[1]], index[&t[2]]]);
            if !set.insert(t) {
                continue;
            }
            for (a, b) in [(t[0], t[1]), (t[0], t[2]), (t[1], t[2])] {
                adjacency[a as usize][b as usize / 64] |= 1 << (b % 64);
                adjacency[b as usize][a as usize / 64] |= 1 << (a % 64);
            }
            for v in t {
                triangle_degree[v as usize] += 1;
            }
        }
        let degree = adjacency.iter().map(|row| row.iter().map(|w| w.count_ones() as usize).sum()).collect();
        Host { labels, adjacency, degree, triangle_degree, triangles: set }
    }

    pub fn vertex_count(&self) -> usize {
        self.labels.len()
    }

    fn adjacent(&self, a: usize, b: usize) -> bool {
        self.adjacency[a][b / 64] >> (b % 64) & 1 == 1
    }

    pub fn has_triangle(&self, t: Triangle) -> bool {
        let idx = |l: Vertex| self.labels.binary_search(&l).ok().map(|i| i as u32);
        match (idx(t[0]), idx(t[1]), idx(t[2])) {
            (Some(a), Some(b), Some(c)) => self.triangles.contains(&sorted3([a, b, c])),
            _ => false,
        }
    }
}

/// Search order over pattern vertices with the checks due at each step.
struct Plan {
    labels: Vec<Vertex>,
    /// pattern vertex placed at each depth
    order: Vec<usize>,
    degree: Vec<usize>,
    triangle_degree: Vec<usize>,
    /// depths of earlier neighbours, per depth
    back_edges: Vec<Vec<usize>>,
    /// triangles completed at each depth, as the two earlier depths
    back_triangles: Vec<Vec<[usize; 2]>>,
}

impl Plan {
    fn new(triangles: &[Triangle]) -> Self {
        let labels: Vec<Vertex> = triangles.iter().flatten().copied().collect::<BTreeSet<_>>().into_iter().collect();
        let n = labels.len();
        let index = |l: Vertex| labels.binary_search(&l).unwrap();
        let tris: BTreeSet<[usize; 3]> = triangles
            .iter()
            .map(|t| {
                let mut t = [index(t[0]), index(t[1]), index(t[2])];
                t.sort_unstable();
                t
            })
            .collect();
        let mut nbrs = vec![BTreeSet::new(); n];
        let mut triangle_degree = vec![0; n];
        for t in &tris {
            for &a in t {
                triangle_degree[a] += 1;
                for &b in t {
                    if a != b {
                        nbrs[a].insert(b);
                    }
                }
            }
        }
        let degree: Vec<usize> = nbrs.iter().map(|s| s.len()).collect();

        // most constrained first: many placed neighbours, then high degree
        let mut order: Vec<usize> = Vec::with_capacity(n);
        let mut placed = vec![false; n];
        for _ in 0..n {
            let next = (0..n)
                .filter(|&x| !placed[x])
                .max_by_key(|&x| {
                    let back = nbrs[x].iter().filter(|&&y| placed[y]).count();
                    (back, degree[x], std::cmp::Reverse(x))
                })
                .unwrap();
            placed[next] = true;
            order.push(next);
        }
        let mut depth_of = vec![0; n];
        for (d, &x) in order.iter().enumerate() {
            depth_of[x] = d;
        }
        let back_edges = order
            .iter()
            .enumerate()
            .map(|(d, &x)| nbrs[x].iter().map(|&y| depth_of[y]).filter(|&dy| dy < d).collect())
            .collect();
        let mut back_triangles = vec![Vec::new(); n];
        for t in &tris {
            let mut ds = t.map(|x| depth_of[x]);
            ds.sort_unstable();
            back_triangles[ds[2]].push([ds[0], ds[1]]);
        }
        Plan { labels, order, degree, triangle_degree, back_edges, back_triangles }
    }
}

/// Backtracking search over injective maps; `visit` receives each complete
/// map as host indices by depth.
fn search<F>(plan: &Plan, host: &Host, visit: &mut F)
where
    F: FnMut(&[usize]) -> ControlFlow<()>,
{
    let n = plan.order.len();
    if n > host.vertex_count() {
        return;
    }
    let mut image = vec![usize::MAX; n];
    let mut used = vec![false; host.vertex_count()];
    let _ = extend(plan, host, 0, &mut image, &mut used, visit);
}

fn extend<F>(
    plan: &Plan,
    host: &Host,
    depth: usize,
    image: &mut [usize],
    used: &mut [bool],
    visit: &mut F,
) -> ControlFlow<()>
where
    F: FnMut(&[usize]) -> ControlFlow<()>,
{
    if depth == plan.order.len() {
        return visit(image);
    }
    let x = plan.order[depth];
    for h in 0..host.vertex_count() {
        if used[h] || host.degree[h] < plan.degree[x] || host.triangle_degree[h] < plan.triangle_degree[x] {
            continue;
        }
        if !plan.back_edges[depth].iter().all(|&d| host.adjacent(image[d], h)) {
            continue;
        }
        let triangles_ok = plan.back_triangles[depth].iter().all(|&[a, b]| {
            host.triangles.contains(&sorted3([image[a] as u32, image[b] as u32, h as u32]))
        });
        if !triangles_ok {
            continue;
        }
        image[depth] = h;
        used[h] = true;
        let flow = extend(plan, host, depth + 1, image, used, visit);
        used[h] = false;
        flow?;
    }
    ControlFlow::Continue(())
}

fn to_label_map(plan: &Plan, host: &Host, image: &[usize]) -> BTreeMap<Vertex, Vertex> {
    plan.order
        .iter()
        .zip(image)
        .map(|(&x, &h)| (plan.labels[x], host.labels[h]))
        .collect()
}

/// First embedding of the pattern's triangles into the host's 2-skeleton.
pub fn find_embedding(pattern: &TwoComplex, host: &Complex3) -> EmbeddingResult {
    find_embedding_in(&pattern.triangles(), &Host::of_complex(host))
}

pub fn find_embedding_in(pattern: &[Triangle], host: &Host) -> EmbeddingResult {
    let plan = Plan::new(pattern);
    let mut found = None;
    search(&plan, host, &mut |image| {
        found = Some(to_label_map(&plan, host, image));
        ControlFlow::Break(())
    });
    if let Some(map) = &found {
        assert!(replays(pattern, host, map), "embedding must map every triangle into the host");
    }
    EmbeddingResult { found: found.is_some(), vertex_map: found }
}

/// Every embedding, in search order.
pub fn all_embeddings(pattern: &[Triangle], host: &Host) -> Vec<BTreeMap<Vertex, Vertex>> {
    let plan = Plan::new(pattern);
    let mut out = Vec::new();
    search(&plan, host, &mut |image| {
        out.push(to_label_map(&plan, host, image));
        ControlFlow::Continue(())
    });
    out
}

/// Whether `map` sends every pattern triangle to a host triangle.
pub fn replays(pattern: &[Triangle], host: &Host, map: &BTreeMap<Vertex, Vertex>) -> bool {
    let injective = map.values().collect::<BTreeSet<_>>().len() == map.len();
    injective
        && pattern.iter().all(|t| match (map.get(&t[0]), map.get(&t[1]), map.get(&t[2])) {
            (Some(&a), Some(&b), Some(&c)) => host.has_triangle([a, b, c]),
            _ => false,
        })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ScanHit {
    pub entry: String,
    pub found: bool,
    pub map: Option<BTreeMap<Vertex, Vertex>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum Certificate {
    /// Every ball obtained by removing a facet is extendably collapsible.
    ExtendablyCollapsible { reason: String },
    /// At least one obstruction sits in the 2-skeleton.
    ObstructionPresent { entries: Vec<String> },
    /// Nothing found, but the catalog does not cover every size that matters.
    NotCertified { reason: String },
}

#[derive(Clone, Debug, Serialize)]
pub struct ScanReport {
    pub vertices: usize,
    pub facets: usize,
    pub hits: Vec<ScanHit>,
    pub certificate: Certificate,
}

/// Searches the host's 2-skeleton for every catalog entry.
pub fn scan_for_obstructions(host: &Complex3) -> ScanReport {
    scan_with_catalog(host, &load_catalog())
}

pub fn scan_with_catalog(host: &Complex3, catalog: &[ObstructionEntry]) -> ScanReport {
    let prepared = Host::of_complex(host);
    let hits: Vec<ScanHit> = catalog
        .par_iter()
        .map(|e| {
            let r = find_embedding_in(&e.triangles, &prepared);
            ScanHit { entry: e.name.clone(), found: r.found, map: r.vertex_map }
        })
        .collect();
    let v = host.vertex_count();
    let n = host.facet_count();
    let present: Vec<String> = hits.iter().filter(|h| h.found).map(|h| h.entry.clone()).collect();
    let certificate = if v < 8 || n < 16 {
        // the remaining 2-complex has n + 1 triangles on v vertices, too few
        // for any contractible non-collapsible complex
        Certificate::ExtendablyCollapsible { reason: format!("v = {v} < 8 or n = {n} < 16") }
    } else if !present.is_empty() {
        Certificate::ObstructionPresent { entries: present }
    } else {
        Certificate::NotCertified {
            reason: format!(
                "no 18-triangle obstruction found; n = {n} needs every obstruction with at most {} \
                 triangles, and the 17-triangle dunce hats are not in the catalog",
                n + 1
            ),
        }
    };
    ScanReport { vertices: v, facets: n, hits, certificate }
}

/// Writes one `<name>.facets` triangle file per entry.
pub fn export_catalog(entries: &[ObstructionEntry], dir: &Path) -> Result<Vec<std::path::PathBuf>> {
    std::fs::create_dir_all(dir)?;
    entries
        .iter()
        .map(|e| {
            let path = dir.join(format!("{}.facets", e.name));
            std::fs::write(&path, e.to_text())?;
            Ok(path)
        })
        .collect()
}
