//! Combinatorial and homological invariants, in exact arithmetic.

use std::collections::BTreeMap;

use num_rational::Ratio;
use serde::Serialize;

use crate::collapse::TwoComplex;
use crate::complex::{faces_by_dimension, Complex3, Simplicial};
use crate::error::{Error, Result};

pub type Rational = Ratio<i128>;

/// Average edge degree 6n / f1 (equal to 6n/(n+v) on closed 3-manifolds).
pub fn average_edge_degree(c: &Complex3) -> Rational {
    Rational::new(6 * c.facet_count() as i128, c.edges().len() as i128)
}

/// Edge-degree statistics of a 3-complex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VarianceReport {
    pub average_degree: Rational,
    pub variance: Rational,
    pub degree_histogram: BTreeMap<u32, usize>,
}

impl VarianceReport {
    pub fn to_json(&self) -> serde_json::Value {
        #[derive(Serialize)]
        struct Exact {
            numerator: String,
            denominator: String,
            decimal: String,
        }
        let exact = |r: &Rational| Exact {
            numerator: r.numer().to_string(),
            denominator: r.denom().to_string(),
            decimal: format!("{:.5}", to_f64(r)),
        };
        serde_json::json!({
            "average_degree": exact(&self.average_degree),
            "variance": exact(&self.variance),
            "degree_histogram": self.degree_histogram.iter()
                .map(|(d, n)| (d.to_string(), *n))
                .collect::<BTreeMap<String, usize>>(),
        })
    }
}

pub fn to_f64(r: &Rational) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Mean squared deviation of edge degrees from their average.
pub fn edge_variance(c: &Complex3) -> VarianceReport {
    let table = c.edge_table();
    let avg = average_edge_degree(c);
    let mut sum = Rational::from_integer(0);
    for &d in &table.degree {
        let dev = avg - Rational::from_integer(d as i128);
        sum += dev * dev;
    }
    VarianceReport {
        average_degree: avg,
        variance: sum / Rational::from_integer(table.len() as i128),
        degree_histogram: table.histogram(),
    }
}

/// Variance computed from a degree histogram alone.
pub fn variance_from_histogram(histogram: &BTreeMap<u32, usize>) -> Rational {
    let count: i128 = histogram.values().map(|&n| n as i128).sum();
    let total: i128 = histogram.iter().map(|(&d, &n)| d as i128 * n as i128).sum();
    let squares: i128 = histogram.iter().map(|(&d, &n)| (d as i128).pow(2) * n as i128).sum();
    variance_from_sums(count, total, squares)
}

/// `(E·Σd² − (Σd)²) / E²` for `E` edges.
pub fn variance_from_sums(edges: i128, degree_sum: i128, degree_square_sum: i128) -> Rational {
    Rational::new(edges * degree_square_sum - degree_sum * degree_sum, edges * edges)
}

/// Alternating face count.
pub fn euler_characteristic<S: Simplicial + ?Sized>(s: &S) -> i64 {
    faces_by_dimension(s)
        .iter()
        .enumerate()
        .map(|(k, faces)| if k % 2 == 0 { faces.len() as i64 } else { -(faces.len() as i64) })
        .sum()
}

/// Betti numbers over the two-element field.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct F2Homology {
    pub betti: Vec<usize>,
}

impl F2Homology {
    pub fn euler_characteristic(&self) -> i64 {
        self.betti
            .iter()
            .enumerate()
            .map(|(k, &b)| if k % 2 == 0 { b as i64 } else { -(b as i64) })
            .sum()
    }

    /// (1, 0, 0, ...): the homology a contractible complex would have.
    pub fn is_acyclic(&self) -> bool {
        self.betti.first() == Some(&1) && self.betti[1..].iter().all(|&b| b == 0)
    }
}

/// `betti_k = dim C_k − rank ∂_k − rank ∂_{k+1}` over F2.
pub fn f2_homology<S: Simplicial + ?Sized>(s: &S) -> F2Homology {
    let levels = faces_by_dimension(s);
    let mut ranks = vec![0usize; levels.len() + 1];
    for k in 1..levels.len() {
        let index: BTreeMap<&Vec<u32>, usize> =
            levels[k - 1].iter().enumerate().map(|(i, f)| (f, i)).collect();
        let rows: Vec<BitRow> = levels[k]
            .iter()
            .map(|face| {
                let mut row = BitRow::zeros(levels[k - 1].len());
                for skip in 0..face.len() {
                    let sub: Vec<u32> = face
                        .iter()
                        .enumerate()
                        .filter(|&(i, _)| i != skip)
                        .map(|(_, &v)| v)
                        .collect();
                    row.flip(index[&sub]);
                }
                row
            })
            .collect();
        ranks[k] = f2_rank(rows);
    }
    let betti = (0..levels.len())
        .map(|k| levels[k].len() - ranks[k] - ranks[k + 1])
        .collect();
    F2Homology { betti }
}

#[derive(Clone)]
struct BitRow(Vec<u64>);

impl BitRow {
    fn zeros(n: usize) -> Self {
        BitRow(vec![0; n.div_ceil(64)])
    }

    fn flip(&mut self, i: usize) {
        self.0[i / 64] ^= 1 << (i % 64);
    }

    fn leading(&self) -> Option<usize> {
        self.0
            .iter()
            .enumerate()
            .find(|(_, &w)| w != 0)
            .map(|(i, w)| i * 64 + w.trailing_zeros() as usize)
    }

    fn xor(&mut self, other: &BitRow) {
        self.0.iter_mut().zip(&other.0).for_each(|(a, b)| *a ^= b);
    }
}

/// Rank by elimination on dense bit rows.
fn f2_rank(rows: Vec<BitRow>) -> usize {
    let mut pivots: BTreeMap<usize, BitRow> = BTreeMap::new();
    for mut row in rows {
        while let Some(lead) = row.leading() {
            match pivots.get(&lead) {
                Some(p) => row.xor(p),
                None => {
                    pivots.insert(lead, row);
                    break;
                }
            }
        }
    }
    pivots.len()
}

/// True iff every `k`-subset of vertices spans a face (`k` ∈ {2, 3}).
pub fn is_k_neighbourly(c: &Complex3, k: u32) -> Result<bool> {
    let v = c.vertex_count() as u64;
    match k {
        2 => Ok(c.edges().len() as u64 == v * (v - 1) / 2),
        3 => Ok(c.triangles().len() as u64 == v * (v - 1) * (v - 2) / 6),
        _ => Err(Error::Domain(format!("neighbourliness is defined here for k = 2, 3; got {k}"))),
    }
}

/// Necessary size conditions on a minimal contractible non-collapsible
/// 2-complex: `f2 ≥ (2/3)·f1 + 1` and `f2 ≥ 2·f0 + 1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ObstructionBounds {
    pub f0: usize,
    pub f1: usize,
    pub f2: usize,
    pub triangles_vs_edges: bool,
    pub triangles_vs_vertices: bool,
}

impl ObstructionBounds {
    pub fn could_be_obstruction(&self) -> bool {
        self.triangles_vs_edges && self.triangles_vs_vertices
    }
}

pub fn obstruction_size_bounds(tc: &TwoComplex) -> ObstructionBounds {
    let [f0, f1, f2] = tc.f_vector();
    ObstructionBounds {
        f0,
        f1,
        f2,
        triangles_vs_edges: 3 * f2 >= 2 * f1 + 3,
        triangles_vs_vertices: f2 > 2 * f0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::boundary_of_4_simplex;

    #[test]
    fn minimal_sphere() {
        let c = boundary_of_4_simplex();
        assert_eq!(average_edge_degree(&c), Rational::from_integer(3));
        let r = edge_variance(&c);
        assert_eq!(r.variance, Rational::from_integer(0));
        assert_eq!(r.degree_histogram, BTreeMap::from([(3, 10)]));
        assert_eq!(euler_characteristic(&c), 0);
        assert_eq!(f2_homology(&c).betti, vec![1, 0, 0, 1]);
        assert!(is_k_neighbourly(&c, 2).unwrap());
        assert!(is_k_neighbourly(&c, 3).unwrap());
        assert!(is_k_neighbourly(&c, 4).is_err());
    }

    #[test]
    fn two_sphere() {
        let s: Vec<Vec<u32>> = vec![vec![1, 2, 3], vec![1, 2, 4], vec![1, 3, 4], vec![2, 3, 4]];
        assert_eq!(euler_characteristic(&s), 2);
        assert_eq!(f2_homology(&s).betti, vec![1, 0, 1]);
    }

    #[test]
    fn histogram_route_table_shape() {
        // 3^10 5^30: 40 edges, degree sum 180 = 6·30
        let h = BTreeMap::from([(3, 10), (5, 30)]);
        assert_eq!(variance_from_histogram(&h), Rational::new(3, 4));
    }

    #[test]
    fn projective_plane_has_f2_classes() {
        // 6-vertex real projective plane
        let rp2: Vec<Vec<u32>> = [
            [1, 2, 3], [1, 3, 4], [1, 4, 5], [1, 5, 6], [1, 2, 6],
            [2, 3, 5], [3, 4, 6], [4, 5, 2], [5, 6, 3], [6, 2, 4],
        ]
        .iter()
        .map(|t| t.to_vec())
        .collect();
        let h = f2_homology(&rp2);
        assert_eq!(h.betti, vec![1, 1, 1]);
        assert_eq!(h.euler_characteristic(), euler_characteristic(&rp2));
    }

    #[test]
    fn obstruction_bounds() {
        let single = TwoComplex::from_triangles(&[[1, 2, 3]]);
        assert!(!obstruction_size_bounds(&single).could_be_obstruction());
    }
}
