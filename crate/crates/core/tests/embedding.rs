mod common;

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use collapsar::catalog::{all_embeddings, find_embedding, find_embedding_in, load_catalog, replays, s15, scan_for_obstructions, Certificate, Host};
use collapsar::collapse::TwoComplex;
use collapsar::complex::{sorted3, Complex3, Triangle};
use collapsar::spanning::seeded_rng;
use rand::Rng;

/// Counts every injective vertex map sending all pattern triangles to host
/// triangles, with no pruning at all.
fn brute_force_count(pattern: &[Triangle], host: &Complex3) -> usize {
    let pv: Vec<u32> = pattern.iter().flatten().copied().collect::<BTreeSet<_>>().into_iter().collect();
    let hv: Vec<u32> = (1..=host.vertex_count() as u32).collect();
    let host_tris: HashSet<Triangle> = host.triangles().into_iter().collect();
    let mut image = vec![0u32; pv.len()];
    let mut used = vec![false; hv.len() + 1];
    let mut count = 0;
    #[allow(clippy::too_many_arguments)]
    fn go(
        depth: usize,
        pv: &[u32],
        hv: &[u32],
        image: &mut [u32],
        used: &mut [bool],
        pattern: &[Triangle],
        host_tris: &HashSet<Triangle>,
        count: &mut usize,
    ) {
        if depth == pv.len() {
            let at = |v: u32| image[pv.binary_search(&v).unwrap()];
            if pattern.iter().all(|t| host_tris.contains(&sorted3([at(t[0]), at(t[1]), at(t[2])]))) {
                *count += 1;
            }
            return;
        }
        for &h in hv {
            if !used[h as usize] {
                used[h as usize] = true;
                image[depth] = h;
                go(depth + 1, pv, hv, image, used, pattern, host_tris, count);
                used[h as usize] = false;
            }
        }
    }
    go(0, &pv, &hv, &mut image, &mut used, pattern, &host_tris, &mut count);
    count
}

/// Independent existence check: assigns pattern triangles one at a time to
/// host triangles, keeping the partial vertex map injective and consistent.
/// Candidates come from the host triangles on an already mapped edge or vertex.
fn triangle_search(pattern: &[Triangle], host: &Complex3) -> Option<BTreeMap<u32, u32>> {
    let host_tris = host.triangles();
    let mut by_vertex: HashMap<u32, Vec<Triangle>> = HashMap::new();
    let mut by_edge: HashMap<(u32, u32), Vec<Triangle>> = HashMap::new();
    for t in &host_tris {
        for i in 0..3 {
            by_vertex.entry(t[i]).or_default().push(*t);
            for j in i + 1..3 {
                by_edge.entry((t[i], t[j])).or_default().push(*t);
            }
        }
    }
    // order pattern triangles so each shares as many vertices as possible with earlier ones
    let mut order: Vec<Triangle> = Vec::new();
    let mut rest: Vec<Triangle> = pattern.to_vec();
    while !rest.is_empty() {
        let seen: BTreeSet<u32> = order.iter().flatten().copied().collect();
        let (i, _) = rest
            .iter()
            .enumerate()
            .max_by_key(|(_, t)| t.iter().filter(|v| seen.contains(v)).count())
            .unwrap();
        order.push(rest.remove(i));
    }
    const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    struct Search<'a> {
        order: &'a [Triangle],
        all: &'a [Triangle],
        by_vertex: &'a HashMap<u32, Vec<Triangle>>,
        by_edge: &'a HashMap<(u32, u32), Vec<Triangle>>,
        map: BTreeMap<u32, u32>,
        inverse: BTreeMap<u32, u32>,
    }
    impl Search<'_> {
        fn candidates(&self, t: Triangle) -> &[Triangle] {
            let mapped: Vec<u32> = t.iter().filter_map(|v| self.map.get(v)).copied().collect();
            match mapped.len() {
                0 => self.all,
                1 => self.by_vertex.get(&mapped[0]).map_or(&[], |v| v),
                _ => {
                    let (a, b) = (mapped[0].min(mapped[1]), mapped[0].max(mapped[1]));
                    self.by_edge.get(&(a, b)).map_or(&[], |v| v)
                }
            }
        }
        fn go(&mut self, k: usize) -> bool {
            if k == self.order.len() {
                return true;
            }
            let t = self.order[k];
            for h in self.candidates(t).to_vec() {
                for p in PERMS {
                    let target = [h[p[0]], h[p[1]], h[p[2]]];
                    let mut added = Vec::new();
                    let mut ok = true;
                    for (&x, &y) in t.iter().zip(&target) {
                        match (self.map.get(&x), self.inverse.get(&y)) {
                            (Some(&m), _) if m == y => {}
                            (None, None) => {
                                self.map.insert(x, y);
                                self.inverse.insert(y, x);
                                added.push(x);
                            }
                            _ => {
                                ok = false;
                                break;
                            }
                        }
                    }
                    if ok && self.go(k + 1) {
                        return true;
                    }
                    for x in added {
                        let y = self.map.remove(&x).unwrap();
                        self.inverse.remove(&y);
                    }
                }
            }
            false
        }
    }
    let mut s = Search {
        order: &order,
        all: &host_tris,
        by_vertex: &by_vertex,
        by_edge: &by_edge,
        map: BTreeMap::new(),
        inverse: BTreeMap::new(),
    };
    s.go(0).then_some(s.map)
}

/// A connected set of up to `size` host triangles, relabelled onto 1..k.
fn random_pattern(host: &Complex3, size: usize, seed: u64) -> Vec<Triangle> {
    let mut rng = seeded_rng(seed);
    let tris = host.triangles();
    let mut chosen = vec![tris[rng.random_range(0..tris.len())]];
    while chosen.len() < size {
        let verts: BTreeSet<u32> = chosen.iter().flatten().copied().collect();
        let touching: Vec<Triangle> = tris
            .iter()
            .filter(|t| !chosen.contains(t) && t.iter().filter(|v| verts.contains(v)).count() >= 2)
            .copied()
            .collect();
        if touching.is_empty() {
            break;
        }
        chosen.push(touching[rng.random_range(0..touching.len())]);
    }
    let labels: Vec<u32> = chosen.iter().flatten().copied().collect::<BTreeSet<_>>().into_iter().collect();
    let shift = 100 + rng.random_range(0..50u32);
    chosen
        .iter()
        .map(|t| sorted3(t.map(|v| labels.binary_search(&v).unwrap() as u32 * 3 + shift)))
        .collect()
}

#[test]
fn agrees_with_brute_force_on_small_hosts() {
    let catalog = load_catalog();
    let mut positives = 0;
    for seed in 0..8 {
        let host = common::random_sphere(seed, 40, 8 + (seed as usize % 3));
        assert!(host.vertex_count() <= 10);
        let prepared = Host::of_complex(&host);
        let mut patterns: Vec<Vec<Triangle>> = (0..6).map(|k| random_pattern(&host, 2 + k, seed * 31 + k as u64)).collect();
        patterns.push(catalog[seed as usize * 9].triangles.clone());
        for pattern in patterns {
            let all = all_embeddings(&pattern, &prepared);
            let expected = brute_force_count(&pattern, &host);
            assert_eq!(all.len(), expected, "host {seed}, pattern {pattern:?}");
            assert!(all.iter().all(|m| replays(&pattern, &prepared, m)));
            let first = find_embedding_in(&pattern, &prepared);
            assert_eq!(first.found, expected > 0);
            assert_eq!(triangle_search(&pattern, &host).is_some(), expected > 0);
            assert_eq!(first.vertex_map.as_ref(), all.first());
            positives += (expected > 0) as usize;
        }
    }
    assert!(positives >= 40, "only {positives} positive cases");
}

#[test]
fn pattern_larger_than_host_is_rejected() {
    let host = common::stellar_spheres(1).remove(0);
    let pattern = &load_catalog()[0];
    assert!(pattern.vertex_count() > host.vertex_count());
    assert!(!find_embedding(&pattern.two_complex(), &host).found);
}

#[test]
fn first_result_is_deterministic() {
    let host = s15();
    let pattern = random_pattern(&host, 12, 5);
    let a = find_embedding(&TwoComplex::from_triangles(&pattern), &host);
    let b = find_embedding(&TwoComplex::from_triangles(&pattern), &host);
    assert!(a.found);
    assert_eq!(a, b);
    assert!(triangle_search(&pattern, &host).is_some());
}

/// No shipped obstruction sits in the 2-skeleton of the 15-vertex sphere.
/// Frozen from the triangle-to-triangle search above.
const S15_HITS: [&str; 0] = [];

#[test]
fn s15_golden_values() {
    let host = s15();
    let catalog = load_catalog();
    let oracle: Vec<&str> = catalog
        .iter()
        .filter(|e| triangle_search(&e.triangles, &host).is_some())
        .map(|e| e.name.as_str())
        .collect();
    assert_eq!(oracle, S15_HITS);

    let report = scan_for_obstructions(&host);
    let found: Vec<&str> = report.hits.iter().filter(|h| h.found).map(|h| h.entry.as_str()).collect();
    assert_eq!(found, S15_HITS);
    assert_eq!(report.hits.len(), catalog.len());
    assert!(matches!(report.certificate, Certificate::NotCertified { .. }));
}

#[test]
fn seven_vertex_spheres_have_no_hits() {
    for c in common::stellar_spheres(2) {
        if c.vertex_count() == 7 {
            let r = scan_for_obstructions(&c);
            assert!(r.hits.iter().all(|h| !h.found));
            assert!(matches!(r.certificate, Certificate::ExtendablyCollapsible { .. }));
        }
    }
}
