//! Canonical labelling for isomorph rejection on small complexes.
//!
//! The canonical form is the least facet list, in colexicographic order,
//! among all labellings that assign smaller labels to vertices with larger
//! invariants (facet degree, then number of neighbours). Restricting to
//! invariant-sorted labellings keeps the form an isomorphism invariant while
//! pruning the search. Colex order makes the facets spanned by the first `k`
//! labels a prefix of the list, so partial labellings can be compared against
//! the incumbent and discarded early.

use std::cmp::Ordering;
use std::collections::HashMap;

use serde::Serialize;

use crate::complex::{Simplicial, Vertex};
use crate::error::{Error, Result};

pub const DEFAULT_CANONICAL_BOUND: usize = 12;

/// Canonical facet list; facets ascending internally, list in colex order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct CanonicalForm {
    pub vertex_count: usize,
    pub facets: Vec<Vec<Vertex>>,
}

pub fn canonical_form<S: Simplicial + ?Sized>(s: &S) -> Result<CanonicalForm> {
    canonical_form_with_bound(s, DEFAULT_CANONICAL_BOUND)
}

pub fn canonical_form_with_bound<S: Simplicial + ?Sized>(
    s: &S,
    bound: usize,
) -> Result<CanonicalForm> {
    let gens = s.generators();
    let mut labels: Vec<Vertex> = gens.iter().flatten().copied().collect();
    labels.sort_unstable();
    labels.dedup();
    let v = labels.len();
    if v > bound {
        return Err(Error::TooManyVertices { vertices: v, bound });
    }
    if v > 32 {
        return Err(Error::TooManyVertices { vertices: v, bound: 32 });
    }
    let index: HashMap<Vertex, usize> = labels.iter().enumerate().map(|(i, &l)| (l, i)).collect();

    let mut facets: Vec<u32> = gens
        .iter()
        .map(|g| g.iter().fold(0u32, |m, x| m | 1 << index[x]))
        .collect();
    facets.sort_unstable();
    facets.dedup();

    // invariant-sorted classes
    let mut invariant: Vec<(usize, usize)> = vec![(0, 0); v];
    for (i, inv) in invariant.iter_mut().enumerate() {
        let containing = facets.iter().filter(|&&m| m >> i & 1 == 1);
        let degree = containing.clone().count();
        let nbrs = containing.fold(0u32, |a, &m| a | m) & !(1 << i);
        *inv = (degree, nbrs.count_ones() as usize);
    }
    let mut order: Vec<usize> = (0..v).collect();
    order.sort_by(|&a, &b| invariant[b].cmp(&invariant[a]));
    // slot_class[k] = invariant required at label position k
    let slot_class: Vec<(usize, usize)> = order.iter().map(|&i| invariant[i]).collect();

    let mut incident: Vec<Vec<u32>> = vec![Vec::new(); v];
    for &m in &facets {
        for (i, list) in incident.iter_mut().enumerate() {
            if m >> i & 1 == 1 {
                list.push(m);
            }
        }
    }

    let mut search = Search {
        invariant: &invariant,
        slot_class: &slot_class,
        incident: &incident,
        label_of: vec![usize::MAX; v],
        assigned_mask: 0,
        path: Vec::with_capacity(v),
        best: None,
    };
    search.descend(0);

    let blocks = search.best.unwrap_or_default();
    let facets = blocks
        .into_iter()
        .flatten()
        .map(|key| {
            let mut f: Vec<Vertex> = key.into_iter().map(|l| l as Vertex + 1).collect();
            f.reverse();
            f
        })
        .collect();
    Ok(CanonicalForm { vertex_count: v, facets })
}

/// A facet keyed by its labels in decreasing order.
type Key = Vec<usize>;

struct Search<'a> {
    invariant: &'a [(usize, usize)],
    slot_class: &'a [(usize, usize)],
    incident: &'a [Vec<u32>],
    label_of: Vec<usize>,
    assigned_mask: u32,
    /// path[k] = facets completed when label k was assigned, colex sorted
    path: Vec<Vec<Key>>,
    best: Option<Vec<Vec<Key>>>,
}

impl Search<'_> {
    fn descend(&mut self, depth: usize) {
        let v = self.label_of.len();
        if depth == v {
            if self.best.is_none() || compare_blocks(&self.path, self.best.as_ref().unwrap()) == Ordering::Less {
                self.best = Some(self.path.clone());
            }
            return;
        }
        for x in 0..v {
            if self.assigned_mask >> x & 1 == 1 || self.invariant[x] != self.slot_class[depth] {
                continue;
            }
            self.label_of[x] = depth;
            self.assigned_mask |= 1 << x;

            let mut block: Vec<Key> = self.incident[x]
                .iter()
                .filter(|&&m| m & !self.assigned_mask == 0)
                .map(|&m| {
                    let mut key: Key = (0..32)
                        .filter(|i| m >> i & 1 == 1)
                        .map(|i| self.label_of[i])
                        .collect();
                    key.sort_unstable_by(|a, b| b.cmp(a));
                    key
                })
                .collect();
            block.sort_unstable();
            self.path.push(block);

            let keep = match &self.best {
                None => true,
                Some(best) => compare_blocks(&self.path, best) != Ordering::Greater,
            };
            if keep {
                self.descend(depth + 1);
            }

            self.path.pop();
            self.assigned_mask &= !(1 << x);
            self.label_of[x] = usize::MAX;
        }
    }
}

/// Compares the prefix `path` against the matching prefix of `best`.
///
/// Less means `path` leads to a colex-smaller facet list. Within a block the
/// first differing key decides; a block that runs out first lacks a facet the
/// other has, and lacking it is worse.
fn compare_blocks(path: &[Vec<Key>], best: &[Vec<Key>]) -> Ordering {
    for (a, b) in path.iter().zip(best) {
        for (x, y) in a.iter().zip(b) {
            match x.cmp(y) {
                Ordering::Equal => {}
                o => return o,
            }
        }
        match a.len().cmp(&b.len()) {
            Ordering::Equal => {}
            Ordering::Greater => return Ordering::Less,
            Ordering::Less => return Ordering::Greater,
        }
    }
    Ordering::Equal
}
