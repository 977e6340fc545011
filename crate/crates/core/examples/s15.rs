//! Estimates the collapsing probability of the shipped 15-vertex sphere and
//! prints the mean free-edge frequency per edge degree.
//!
//!     cargo run --release --example s15 -- 100000

use collapsar::catalog::s15;
use collapsar::estimate::{edge_free_frequencies, estimate_collapsing_probability};
use collapsar::invariants::edge_variance;

fn main() -> collapsar::Result<()> {
    let samples: u64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(100_000);
    let sphere = s15();
    println!("f-vector {}", sphere.f_vector());
    println!("edge variance {}", edge_variance(&sphere).variance);

    let est = estimate_collapsing_probability(&sphere, samples, 7)?;
    let report = est.report(0.005, 1e-4)?;
    println!(
        "p_hat = {:.6} +/- {:.6} ({} samples)",
        report.p_hat, report.normal_approximation.half_width, samples
    );

    let stats = edge_free_frequencies(&sphere, samples, 7, None)?;
    for (degree, mean) in stats.mean_by_degree() {
        println!("degree {degree}: free in {:.4} of trees (2^(2-deg) = {:.4})", mean, 2f64.powi(2 - degree as i32));
    }
    Ok(())
}
