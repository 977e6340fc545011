//! Monte Carlo and exact collapsing probabilities, per-edge free-edge
//! frequencies, and the deviation bounds that go with them.
//!
//! Trial `i` of a run with base seed `s` draws all its randomness from a
//! ChaCha8 generator seeded with [`trial_seed`]`(s, i)`. Results therefore do
//! not depend on how trials are spread over worker threads.

use std::ops::Range;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::collapse::{collapse_in_place, TrialContext};
use crate::complex::{Complex3, Edge};
use crate::error::{Error, Result};
use crate::spanning::{for_each_spanning_tree, seeded_rng};

/// Trials handed to a worker at a time.
const CHUNK: u64 = 2048;

/// SplitMix64 finaliser.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of trial `index` in a run with `base_seed`:
/// `splitmix64(base_seed ^ splitmix64(index))`.
pub fn trial_seed(base_seed: u64, index: u64) -> u64 {
    splitmix64(base_seed ^ splitmix64(index))
}

/// Outcome of a Monte Carlo run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Estimate {
    pub successes: u64,
    pub samples: u64,
    pub base_seed: u64,
}

impl Estimate {
    pub fn p_hat(&self) -> f64 {
        self.successes as f64 / self.samples as f64
    }

    /// Pools two runs over disjoint trial ranges of the same seed.
    pub fn merge(&self, other: &Estimate) -> Result<Estimate> {
        if self.base_seed != other.base_seed {
            return Err(Error::Domain("cannot merge runs with different seeds".into()));
        }
        Ok(Estimate {
            successes: self.successes + other.successes,
            samples: self.samples + other.samples,
            base_seed: self.base_seed,
        })
    }

    /// Upper bound on P(|p̂ − p| ≥ ε) from Chebyshev's inequality.
    pub fn chebyshev_bound(&self, epsilon: f64) -> Result<f64> {
        chebyshev_deviation_bound(self.samples, epsilon)
    }

    /// Normal-approximation half width at two-sided error probability `alpha`.
    pub fn normal_half_width(&self, alpha: f64) -> Result<f64> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::Domain(format!("error probability {alpha} not in (0, 1)")));
        }
        let z = Normal::standard().inverse_cdf(1.0 - alpha / 2.0);
        let p = self.p_hat();
        Ok(z * (p * (1.0 - p) / self.samples as f64).sqrt())
    }

    /// Standard error sqrt(p̂(1 − p̂)/N).
    pub fn standard_error(&self) -> f64 {
        let p = self.p_hat();
        (p * (1.0 - p) / self.samples as f64).sqrt()
    }

    pub fn report(&self, epsilon: f64, alpha: f64) -> Result<EstimateReport> {
        Ok(EstimateReport {
            p_hat: self.p_hat(),
            p_hat_5: format!("{:.5}", self.p_hat()),
            successes: self.successes,
            samples: self.samples,
            seed: self.base_seed,
            chebyshev: ChebyshevReport { epsilon, bound: self.chebyshev_bound(epsilon)? },
            normal_approximation: NormalReport {
                error_probability: alpha,
                half_width: self.normal_half_width(alpha)?,
            },
        })
    }
}

/// JSON shape of an estimate.
#[derive(Clone, Debug, Serialize)]
pub struct EstimateReport {
    pub p_hat: f64,
    pub p_hat_5: String,
    pub successes: u64,
    pub samples: u64,
    pub seed: u64,
    pub chebyshev: ChebyshevReport,
    pub normal_approximation: NormalReport,
}

#[derive(Clone, Debug, Serialize)]
pub struct ChebyshevReport {
    pub epsilon: f64,
    pub bound: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct NormalReport {
    pub error_probability: f64,
    pub half_width: f64,
}

/// `min(1, 1/(4 N ε²))`, the worst case (p(1 − p) ≤ 1/4) of Chebyshev's
/// bound on P(|p̂ − p| ≥ ε).
pub fn chebyshev_deviation_bound(samples: u64, epsilon: f64) -> Result<f64> {
    if samples == 0 {
        return Err(Error::Domain("sample count must be positive".into()));
    }
    if epsilon.is_nan() || epsilon <= 0.0 || !epsilon.is_finite() {
        return Err(Error::Domain(format!("epsilon must be positive, got {epsilon}")));
    }
    Ok((1.0 / (4.0 * samples as f64 * epsilon * epsilon)).min(1.0))
}

/// Lower bound (4/7)(4/13)^(k−2) on the fraction of spanning trees that
/// leave an edge of degree `k` free.
pub fn free_edge_lower_bound(k: u32) -> Result<BigRational> {
    if k < 2 {
        return Err(Error::Domain(format!("edge degree must be at least 2, got {k}")));
    }
    let num = BigInt::from(4u32).pow(k - 1);
    let den = BigInt::from(7u32) * BigInt::from(13u32).pow(k - 2);
    Ok(BigRational::new(num, den))
}

fn rational_to_f64(r: &BigRational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or(0.0)
}

fn pool(workers: Option<usize>) -> Result<Option<rayon::ThreadPool>> {
    match workers {
        None => Ok(None),
        Some(0) => Err(Error::Domain("worker count must be positive".into())),
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .map(Some)
            .map_err(|e| Error::Domain(e.to_string())),
    }
}

fn chunks(range: Range<u64>) -> Vec<Range<u64>> {
    let mut out = Vec::new();
    let mut s = range.start;
    while s < range.end {
        let e = (s + CHUNK).min(range.end);
        out.push(s..e);
        s = e;
    }
    out
}

/// Runs trials `range` of the run with `base_seed`.
pub fn run_trials(
    ctx: &TrialContext,
    range: Range<u64>,
    base_seed: u64,
    workers: Option<usize>,
) -> Result<Estimate> {
    let samples = range.end.saturating_sub(range.start);
    let work = || -> u64 {
        chunks(range.clone())
            .into_par_iter()
            .map_init(
                || ctx.workspace(),
                |ws, chunk| {
                    chunk
                        .filter(|&i| ctx.run_trial(ws, &mut seeded_rng(trial_seed(base_seed, i))))
                        .count() as u64
                },
            )
            .sum()
    };
    let successes = match pool(workers)? {
        Some(p) => p.install(work),
        None => work(),
    };
    Ok(Estimate { successes, samples, base_seed })
}

pub fn estimate_collapsing_probability(c: &Complex3, samples: u64, base_seed: u64) -> Result<Estimate> {
    estimate_with_workers(c, samples, base_seed, None)
}

/// As [`estimate_collapsing_probability`] on a dedicated pool of `workers`
/// threads (`None` uses the global pool).
pub fn estimate_with_workers(
    c: &Complex3,
    samples: u64,
    base_seed: u64,
    workers: Option<usize>,
) -> Result<Estimate> {
    if samples == 0 {
        return Err(Error::Domain("sample count must be positive".into()));
    }
    let ctx = TrialContext::new(c)?;
    run_trials(&ctx, 0..samples, base_seed, workers)
}

/// Collapsing spanning trees over all spanning trees.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactProbability {
    pub numerator: BigUint,
    pub denominator: BigUint,
}

impl ExactProbability {
    pub fn value(&self) -> f64 {
        rational_to_f64(&BigRational::new(
            BigInt::from(self.numerator.clone()),
            BigInt::from(self.denominator.clone()),
        ))
    }
}

impl std::fmt::Display for ExactProbability {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}/{}", self.numerator, self.denominator)
    }
}

/// Enumerates every spanning tree and counts those whose 2-complex collapses.
pub fn exact_collapsing_probability(c: &Complex3, tree_limit: u64) -> Result<ExactProbability> {
    let ctx = TrialContext::new(c)?;
    let mut ws = ctx.workspace();
    // the greedy answer is order independent; a fixed order seed suffices
    let mut rng = seeded_rng(0);
    let mut good = 0u64;
    let total = for_each_spanning_tree(ctx.graph(), tree_limit, |arcs| {
        ctx.two_complex_for_arcs(&mut ws, arcs);
        if collapse_in_place(&mut ws.complex, &mut rng, &mut ws.scratch, None) {
            good += 1;
        }
    })?;
    Ok(ExactProbability { numerator: good.into(), denominator: total.into() })
}

/// Per-edge counts of how often an edge is free after the tree collapse.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeFreeStats {
    pub edges: Vec<Edge>,
    pub degree: Vec<u32>,
    pub free_count: Vec<u64>,
    pub samples: u64,
}

impl EdgeFreeStats {
    pub fn frequency(&self, e: usize) -> f64 {
        self.free_count[e] as f64 / self.samples as f64
    }

    /// Binomial standard deviation of the frequency estimate, at `p`.
    pub fn binomial_sigma(&self, p: f64) -> f64 {
        (p * (1.0 - p) / self.samples as f64).sqrt()
    }

    /// Mean frequency per edge degree.
    pub fn mean_by_degree(&self) -> std::collections::BTreeMap<u32, f64> {
        let mut acc: std::collections::BTreeMap<u32, (f64, usize)> = Default::default();
        for e in 0..self.edges.len() {
            let entry = acc.entry(self.degree[e]).or_insert((0.0, 0));
            entry.0 += self.frequency(e);
            entry.1 += 1;
        }
        acc.into_iter().map(|(d, (s, n))| (d, s / n as f64)).collect()
    }

    /// CSV with header
    /// `edge_id,v1,v2,degree,free_count,samples,frequency,theorem_bound`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("edge_id,v1,v2,degree,free_count,samples,frequency,theorem_bound\n");
        for e in 0..self.edges.len() {
            let bound = free_edge_lower_bound(self.degree[e])
                .map(|b| format!("{:.5}", rational_to_f64(&b)))
                .unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{},{},{:.5},{}\n",
                e,
                self.edges[e][0],
                self.edges[e][1],
                self.degree[e],
                self.free_count[e],
                self.samples,
                self.frequency(e),
                bound
            ));
        }
        out
    }

    fn empty(c: &Complex3) -> Self {
        let table = c.edge_table();
        let n = table.len();
        EdgeFreeStats { edges: table.edges, degree: table.degree, free_count: vec![0; n], samples: 0 }
    }
}

/// Samples `samples` trees and counts, per edge, how often it is free.
///
/// The skeleton edge order equals the [`crate::complex::EdgeTable`] order, so
/// counters line up with edge ids.
pub fn edge_free_frequencies(
    c: &Complex3,
    samples: u64,
    base_seed: u64,
    workers: Option<usize>,
) -> Result<EdgeFreeStats> {
    if samples == 0 {
        return Err(Error::Domain("sample count must be positive".into()));
    }
    let ctx = TrialContext::new(c)?;
    let mut stats = EdgeFreeStats::empty(c);
    let n = stats.edges.len();
    let work = || -> Vec<u64> {
        chunks(0..samples)
            .into_par_iter()
            .map_init(
                || ctx.workspace(),
                |ws, chunk| {
                    let mut counts = vec![0u64; n];
                    for i in chunk {
                        ctx.sample_two_complex(ws, &mut seeded_rng(trial_seed(base_seed, i)));
                        for e in ws.complex.free_edges() {
                            counts[e] += 1;
                        }
                    }
                    counts
                },
            )
            .reduce(
                || vec![0u64; n],
                |mut a, b| {
                    a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                    a
                },
            )
    };
    stats.free_count = match pool(workers)? {
        Some(p) => p.install(work),
        None => work(),
    };
    stats.samples = samples;
    Ok(stats)
}

/// Exact per-edge free counts over every spanning tree.
pub fn exact_edge_free_frequencies(c: &Complex3, tree_limit: u64) -> Result<EdgeFreeStats> {
    let ctx = TrialContext::new(c)?;
    let mut ws = ctx.workspace();
    let mut stats = EdgeFreeStats::empty(c);
    let total = for_each_spanning_tree(ctx.graph(), tree_limit, |arcs| {
        ctx.two_complex_for_arcs(&mut ws, arcs);
        for e in ws.complex.free_edges() {
            stats.free_count[e] += 1;
        }
    })?;
    stats.samples = total;
    Ok(stats)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::boundary_of_4_simplex;

    #[test]
    fn bound_values() {
        assert_eq!(free_edge_lower_bound(2).unwrap(), BigRational::new(4.into(), 7.into()));
        assert_eq!(free_edge_lower_bound(3).unwrap(), BigRational::new(16.into(), 91.into()));
        assert!(free_edge_lower_bound(1).is_err());
    }

    #[test]
    fn chebyshev_values() {
        assert!((chebyshev_deviation_bound(1_000_000, 0.005).unwrap() - 0.01).abs() < 1e-15);
        assert!((chebyshev_deviation_bound(1, 10.0).unwrap() - 1.0 / 400.0).abs() < 1e-15);
        assert_eq!(chebyshev_deviation_bound(1, 0.01).unwrap(), 1.0);
        assert!(chebyshev_deviation_bound(10, 0.0).is_err());
        assert!(chebyshev_deviation_bound(10, -1.0).is_err());
        assert!(chebyshev_deviation_bound(0, 0.1).is_err());
    }

    #[test]
    fn normal_width_matches_reference() {
        // p = 0.025903, N = 10^6 at error probability 10^-4 gives ±0.000618
        let e = Estimate { successes: 25_903, samples: 1_000_000, base_seed: 0 };
        let w = e.normal_half_width(1e-4).unwrap();
        assert!((w - 0.000618).abs() < 5e-7, "{w}");
    }

    #[test]
    fn minimal_sphere_always_collapses() {
        let c = boundary_of_4_simplex();
        let e = estimate_collapsing_probability(&c, 2000, 7).unwrap();
        assert_eq!(e.successes, 2000);
        assert!(estimate_collapsing_probability(&c, 0, 7).is_err());
    }

    #[test]
    fn prefix_runs_pool() {
        let c = boundary_of_4_simplex();
        let ctx = TrialContext::new(&c).unwrap();
        let a = run_trials(&ctx, 0..300, 11, Some(2)).unwrap();
        let b = run_trials(&ctx, 300..1000, 11, Some(3)).unwrap();
        let all = run_trials(&ctx, 0..1000, 11, Some(1)).unwrap();
        assert_eq!(a.merge(&b).unwrap(), all);
    }

    #[test]
    fn exact_minimal_sphere() {
        let p = exact_collapsing_probability(&boundary_of_4_simplex(), 1_000_000).unwrap();
        assert_eq!(p.to_string(), "125/125");
        assert_eq!(p.value(), 1.0);
    }

    #[test]
    fn csv_header_and_rows() {
        let stats = edge_free_frequencies(&boundary_of_4_simplex(), 100, 1, None).unwrap();
        let csv = stats.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "edge_id,v1,v2,degree,free_count,samples,frequency,theorem_bound");
        assert_eq!(lines.count(), 10);
        assert!(csv.contains("0,1,2,3,"));
    }

    #[test]
    fn seed_mixing_is_stable() {
        // frozen to detect accidental changes to the seed derivation
        assert_eq!(splitmix64(0), 0xE220_A839_7B1D_CDAF);
        assert_ne!(trial_seed(1, 0), trial_seed(0, 1));
    }
}
