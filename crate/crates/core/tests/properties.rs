mod common;

use std::sync::OnceLock;

use collapsar::catalog::load_catalog;
use collapsar::collapse::{collapse_along_tree, greedy_collapse, tree_collapse_sequence, TrialContext, TwoComplex};
use collapsar::complex::{boundary_of_4_simplex, canonical_form, parse_facets, Complex3};
use collapsar::estimate::{free_edge_lower_bound, run_trials};
use collapsar::invariants::{edge_variance, euler_characteristic, f2_homology, variance_from_histogram};
use collapsar::spanning::{seeded_rng, wilson_sample};
use num_rational::BigRational;
use proptest::prelude::*;
use rand::Rng;

fn spheres() -> &'static [Complex3] {
    static POOL: OnceLock<Vec<Complex3>> = OnceLock::new();
    POOL.get_or_init(|| {
        let mut pool = vec![boundary_of_4_simplex()];
        pool.extend(common::stellar_spheres(2));
        pool.extend((0..10).map(|s| common::random_sphere(s, 25, 10)));
        pool
    })
}

/// A random sub-2-complex of a sphere's 2-skeleton.
fn random_subcomplex(c: &Complex3, seed: u64) -> TwoComplex {
    let mut rng = seeded_rng(seed);
    let triangles = c.triangles();
    let keep: Vec<_> = triangles.iter().filter(|_| rng.random_bool(0.5)).copied().collect();
    let keep = if keep.is_empty() { vec![triangles[0]] } else { keep };
    TwoComplex::from_triangles(&keep)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn canonical_form_ignores_labels(i in 0usize..64, seed: u64) {
        let c = &spheres()[i % spheres().len()];
        let perm = common::permutation(&mut seeded_rng(seed), c.vertex_count());
        let relabelled = c.relabel(&perm).unwrap();
        prop_assert_eq!(canonical_form(c).unwrap(), canonical_form(&relabelled).unwrap());
    }

    #[test]
    fn catalog_canonical_form_ignores_labels(i in 0usize..80, seed: u64) {
        let entry = &load_catalog()[i % 80];
        let perm = common::permutation(&mut seeded_rng(seed), 8);
        let original: Vec<Vec<u32>> = entry.triangles.iter().map(|t| t.to_vec()).collect();
        let relabelled: Vec<Vec<u32>> =
            entry.triangles.iter().map(|t| t.iter().map(|&v| perm[v as usize - 1]).collect()).collect();
        prop_assert_eq!(canonical_form(&original).unwrap(), canonical_form(&relabelled).unwrap());
    }

    #[test]
    fn variance_ignores_labels(i in 0usize..64, seed: u64) {
        let c = &spheres()[i % spheres().len()];
        let perm = common::permutation(&mut seeded_rng(seed), c.vertex_count());
        let a = edge_variance(c);
        let b = edge_variance(&c.relabel(&perm).unwrap());
        prop_assert_eq!(&a, &b);
        prop_assert_eq!(a.variance, variance_from_histogram(&a.degree_histogram));
    }

    #[test]
    fn text_and_json_round_trip(i in 0usize..64) {
        let c = &spheres()[i % spheres().len()];
        prop_assert_eq!(&parse_facets(&c.to_text()).unwrap(), c);
        prop_assert_eq!(&parse_facets(&c.to_json()).unwrap(), c);
    }

    #[test]
    fn homology_matches_euler_characteristic(i in 0usize..64, seed: u64) {
        let tc = random_subcomplex(&spheres()[i % spheres().len()], seed);
        let h = f2_homology(&tc);
        prop_assert_eq!(h.euler_characteristic(), euler_characteristic(&tc));
        prop_assert_eq!(h.euler_characteristic(), tc.euler_characteristic());
    }

    #[test]
    fn greedy_verdict_ignores_order(i in 0usize..64, seed: u64, a: u64, b: u64) {
        let tc = random_subcomplex(&spheres()[i % spheres().len()], seed);
        let x = greedy_collapse(&tc, a);
        let y = greedy_collapse(&tc, b);
        prop_assert_eq!(x.collapsed_to_point, y.collapsed_to_point);
        // the leftover graph depends on the order, its Euler characteristic does not
        prop_assert_eq!(x.remainder.euler_characteristic(), y.remainder.euler_characteristic());
        prop_assert!(x.remainder.is_consistent());
    }

    #[test]
    fn tree_collapse_ignores_root(i in 0usize..64, seed: u64, root_pick: usize) {
        let c = &spheres()[i % spheres().len()];
        let g = c.dual_graph().unwrap();
        let t = wilson_sample(&g, seed).unwrap();
        let other = t.reroot(&g, root_pick % g.node_count()).unwrap();
        let a = collapse_along_tree(c, &t).unwrap();
        let b = collapse_along_tree(c, &other).unwrap();
        prop_assert_eq!(a.triangles(), b.triangles());
        prop_assert_eq!(a.f_vector(), [c.vertex_count(), c.edges().len(), c.facet_count() + 1]);
        prop_assert_eq!(a.euler_characteristic(), 1);
        prop_assert_eq!(tree_collapse_sequence(c, &other).unwrap().len(), c.facet_count() - 1);
    }

    #[test]
    fn split_runs_merge(split in 1u64..2000, seed: u64) {
        let ctx = TrialContext::new(&spheres()[3]).unwrap();
        let whole = run_trials(&ctx, 0..2000, seed, None).unwrap();
        let left = run_trials(&ctx, 0..split, seed, None).unwrap();
        let right = run_trials(&ctx, split..2000, seed, None).unwrap();
        prop_assert_eq!(left.merge(&right).unwrap(), whole);
    }
}

#[test]
fn free_edge_bound_decreases() {
    let bounds: Vec<BigRational> = (2..12).map(|k| free_edge_lower_bound(k).unwrap()).collect();
    assert_eq!(bounds[0], BigRational::new(4.into(), 7.into()));
    assert_eq!(bounds[1], BigRational::new(16.into(), 91.into()));
    assert!(bounds.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn every_sphere_in_pool_is_valid() {
    for c in spheres() {
        assert!(c.is_closed_3_manifold());
        assert_eq!(c.f_vector().euler_characteristic(), 0);
        assert_eq!(f2_homology(c).betti, vec![1, 0, 0, 1]);
    }
}
