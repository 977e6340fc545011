mod common;

use collapsar::anneal::{anneal_edge_variance, AnnealConfig, Direction, MoveSet, Triangulation};
use collapsar::catalog::s15;
use collapsar::invariants::{edge_variance, f2_homology, to_f64};

fn config(direction: Direction, seed: u64, max_moves: u64) -> AnnealConfig {
    AnnealConfig { direction, seed, max_moves, ..AnnealConfig::default() }
}

#[test]
fn trace_is_monotone_and_log_replays() {
    for seed in 0..20 {
        let start = common::random_sphere(seed, 30, 11);
        let direction = if seed % 2 == 0 { Direction::Minimize } else { Direction::Maximize };
        let r = anneal_edge_variance(&start, &config(direction, seed, 400)).unwrap();
        assert_eq!(r.variance_trace.len(), 400);
        assert!(r.variance_trace.windows(2).all(|w| match direction {
            Direction::Minimize => w[1] <= w[0],
            Direction::Maximize => w[1] >= w[0],
        }));
        assert_eq!(*r.variance_trace.last().unwrap(), r.best_variance);
        assert_eq!(edge_variance(&r.best_complex).variance, r.best_variance);
        assert_eq!(r.initial_variance, edge_variance(&start).variance);
        assert!(r.best_complex.is_closed_3_manifold());
        assert_eq!(f2_homology(&r.best_complex).betti, vec![1, 0, 0, 1]);

        // every logged move is legal in sequence and lands on the logged variance
        let mut t = Triangulation::new(&start);
        for m in &r.move_log {
            t.apply(&m.spec).unwrap();
            assert_eq!(edge_variance(&t.to_complex()).variance, m.variance, "seed {seed}, step {}", m.step);
        }
    }
}

#[test]
fn same_seed_same_run() {
    let start = common::random_sphere(3, 40, 12);
    let a = anneal_edge_variance(&start, &config(Direction::Minimize, 77, 500)).unwrap();
    let b = anneal_edge_variance(&start, &config(Direction::Minimize, 77, 500)).unwrap();
    assert_eq!(a.move_log_csv(), b.move_log_csv());
    assert_eq!(a.best_complex, b.best_complex);
    let c = anneal_edge_variance(&start, &config(Direction::Minimize, 78, 500)).unwrap();
    assert_ne!(a.move_log_csv(), c.move_log_csv());
}

#[test]
fn edge_flips_keep_vertex_count() {
    let start = s15();
    let cfg = AnnealConfig { moves: MoveSet::EdgeFlips, ..config(Direction::Maximize, 5, 300) };
    let r = anneal_edge_variance(&start, &cfg).unwrap();
    assert!(!r.move_log.is_empty());
    assert!(r.move_log.iter().all(|m| cfg.moves.allows(m.spec.kind)));
    assert_eq!(r.best_complex.vertex_count(), 15);
    assert!(r.best_variance >= r.initial_variance);
}

/// Pushing the variance of the 15-vertex sphere upward. Reported, not asserted:
/// the schedule is heuristic and the printed values are for inspection.
#[test]
fn s15_maximize_report() {
    let start = s15();
    let r = anneal_edge_variance(&start, &config(Direction::Maximize, 1, 1000)).unwrap();
    println!(
        "s15 maximize: variance {:.5} -> {:.5}, f-vector {:?}, {} accepted moves",
        to_f64(&r.initial_variance),
        to_f64(&r.best_variance),
        r.best_complex.f_vector().as_array(),
        r.move_log.len()
    );
    assert!(r.best_variance >= r.initial_variance);
}
