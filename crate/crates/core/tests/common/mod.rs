#![allow(dead_code)]

use std::collections::BTreeSet;

use collapsar::anneal::{MoveKind, MoveSpec, Triangulation};
use collapsar::complex::{boundary_of_4_simplex, CanonicalForm, Complex3};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Every sphere reachable from the boundary of the 4-simplex by `1..=moves`
/// 1-4 moves, one per isomorphism class, smallest first.
pub fn stellar_spheres(moves: usize) -> Vec<Complex3> {
    let mut seen: BTreeSet<CanonicalForm> = BTreeSet::new();
    let mut frontier = vec![boundary_of_4_simplex()];
    let mut out = Vec::new();
    for _ in 0..moves {
        let mut next = Vec::new();
        for c in &frontier {
            for f in c.facets() {
                let m = MoveSpec::new(MoveKind::Move14, f.to_vec());
                let d = collapsar::anneal::apply_move(c, &m).unwrap();
                if seen.insert(d.canonical_form().unwrap()) {
                    next.push(d.clone());
                    out.push(d);
                }
            }
        }
        frontier = next;
    }
    out
}

/// A random walk of `steps` legal moves from the boundary of the 4-simplex,
/// staying at or below `max_vertices`.
pub fn random_sphere(seed: u64, steps: usize, max_vertices: usize) -> Complex3 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = Triangulation::new(&boundary_of_4_simplex());
    for _ in 0..steps {
        let moves: Vec<MoveSpec> = t
            .legal_moves()
            .into_iter()
            .filter(|m| m.kind != MoveKind::Move14 || t.vertex_count() < max_vertices)
            .collect();
        let m = &moves[rng.random_range(0..moves.len())];
        t.apply(m).unwrap();
    }
    t.to_complex()
}

/// A uniformly random permutation of 1..=n.
pub fn permutation(rng: &mut impl Rng, n: usize) -> Vec<u32> {
    let mut p: Vec<u32> = (1..=n as u32).collect();
    p.shuffle(rng);
    p
}
