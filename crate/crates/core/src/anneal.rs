//! Bistellar moves and simulated annealing on the edge variance.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::complex::{sorted2, sorted3, Complex3, Edge, Facet, Triangle, Vertex};
use crate::error::{Error, Result};
use crate::invariants::{to_f64, variance_from_sums, Rational};
use crate::spanning::seeded_rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MoveKind {
    #[serde(rename = "1-4")]
    Move14,
    #[serde(rename = "2-3")]
    Move23,
    #[serde(rename = "3-2")]
    Move32,
    #[serde(rename = "4-1")]
    Move41,
}

impl MoveKind {
    pub fn inverse(self) -> Self {
        match self {
            MoveKind::Move14 => MoveKind::Move41,
            MoveKind::Move23 => MoveKind::Move32,
            MoveKind::Move32 => MoveKind::Move23,
            MoveKind::Move41 => MoveKind::Move14,
        }
    }

    /// Number of vertices of the location simplex.
    fn location_size(self) -> usize {
        match self {
            MoveKind::Move14 => 4,
            MoveKind::Move23 => 3,
            MoveKind::Move32 => 2,
            MoveKind::Move41 => 1,
        }
    }
}

impl fmt::Display for MoveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MoveKind::Move14 => "1-4",
            MoveKind::Move23 => "2-3",
            MoveKind::Move32 => "3-2",
            MoveKind::Move41 => "4-1",
        })
    }
}

/// A move and the simplex it acts on: facet, triangle, edge or vertex.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MoveSpec {
    pub kind: MoveKind,
    pub location: Vec<Vertex>,
}

impl MoveSpec {
    pub fn new(kind: MoveKind, mut location: Vec<Vertex>) -> Self {
        location.sort_unstable();
        MoveSpec { kind, location }
    }
}

impl fmt::Display for MoveSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let loc: Vec<String> = self.location.iter().map(|v| v.to_string()).collect();
        write!(f, "{}@{}", self.kind, loc.join("-"))
    }
}

/// Facets removed and added by one move.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Flip {
    pub removed: Vec<Facet>,
    pub added: Vec<Facet>,
    /// The simplex whose star the move creates (the inverse move's location).
    pub created: Vec<Vertex>,
}

/// Mutable closed 3-manifold supporting local moves with incremental
/// edge-degree bookkeeping.
#[derive(Clone, Debug)]
pub struct Triangulation {
    facets: BTreeSet<Facet>,
    star: HashMap<Vertex, BTreeSet<Facet>>,
    edge_degree: HashMap<Edge, u32>,
    triangles: HashMap<Triangle, u32>,
    degree_square_sum: i128,
    next_label: Vertex,
}

impl Triangulation {
    pub fn new(c: &Complex3) -> Self {
        let mut t = Triangulation {
            facets: BTreeSet::new(),
            star: HashMap::new(),
            edge_degree: HashMap::new(),
            triangles: HashMap::new(),
            degree_square_sum: 0,
            next_label: c.vertex_count() as Vertex + 1,
        };
        for &f in c.facets() {
            t.insert(f);
        }
        t
    }

    pub fn facet_count(&self) -> usize {
        self.facets.len()
    }

    pub fn vertex_count(&self) -> usize {
        self.star.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_degree.len()
    }

    pub fn f_vector(&self) -> [usize; 4] {
        [self.vertex_count(), self.edge_count(), self.triangles.len(), self.facet_count()]
    }

    pub fn facets(&self) -> impl Iterator<Item = &Facet> {
        self.facets.iter()
    }

    /// Compressed copy; labels above a removed vertex shift down.
    pub fn to_complex(&self) -> Complex3 {
        Complex3::new(self.facets.iter().copied().collect()).expect("moves keep facets distinct")
    }

    pub fn edge_variance(&self) -> Rational {
        let e = self.edge_count() as i128;
        variance_from_sums(e, 6 * self.facet_count() as i128, self.degree_square_sum)
    }

    fn insert(&mut self, f: Facet) {
        self.facets.insert(f);
        for v in f {
            self.star.entry(v).or_default().insert(f);
        }
        for e in facet_edges(f) {
            let d = self.edge_degree.entry(e).or_insert(0);
            self.degree_square_sum += 2 * *d as i128 + 1;
            *d += 1;
        }
        for t in facet_triangles(f) {
            *self.triangles.entry(t).or_insert(0) += 1;
        }
    }

    fn remove(&mut self, f: Facet) {
        self.facets.remove(&f);
        for v in f {
            let s = self.star.get_mut(&v).unwrap();
            s.remove(&f);
            if s.is_empty() {
                self.star.remove(&v);
            }
        }
        for e in facet_edges(f) {
            let d = self.edge_degree.get_mut(&e).unwrap();
            *d -= 1;
            self.degree_square_sum -= 2 * *d as i128 + 1;
            if *d == 0 {
                self.edge_degree.remove(&e);
            }
        }
        for t in facet_triangles(f) {
            let n = self.triangles.get_mut(&t).unwrap();
            *n -= 1;
            if *n == 0 {
                self.triangles.remove(&t);
            }
        }
    }

    fn facets_containing(&self, simplex: &[Vertex]) -> Vec<Facet> {
        match self.star.get(&simplex[0]) {
            None => Vec::new(),
            Some(s) => s.iter().filter(|f| simplex.iter().all(|v| f.contains(v))).copied().collect(),
        }
    }

    /// Link vertices of `simplex` (union of its facets minus itself).
    fn link_vertices(facets: &[Facet], simplex: &[Vertex]) -> Vec<Vertex> {
        let set: BTreeSet<Vertex> = facets.iter().flatten().filter(|v| !simplex.contains(v)).copied().collect();
        set.into_iter().collect()
    }

    fn has_face(&self, face: &[Vertex]) -> bool {
        match face.len() {
            2 => self.edge_degree.contains_key(&sorted2([face[0], face[1]])),
            3 => self.triangles.contains_key(&sorted3([face[0], face[1], face[2]])),
            4 => self.facets.contains(&sorted4([face[0], face[1], face[2], face[3]])),
            _ => false,
        }
    }

    /// Checks legality and returns the flip without applying it.
    pub fn plan(&self, m: &MoveSpec) -> Result<Flip> {
        let a = &m.location;
        if a.len() != m.kind.location_size() {
            return Err(Error::IllegalMove(format!(
                "{} move needs a location of {} vertices",
                m.kind,
                m.kind.location_size()
            )));
        }
        let star = self.facets_containing(a);
        let expected = 5 - a.len();
        if star.len() != expected {
            return Err(Error::IllegalMove(match m.kind {
                MoveKind::Move14 => "facet not present".to_string(),
                MoveKind::Move23 => format!("triangle lies in {} facets, not 2", star.len()),
                MoveKind::Move32 => format!("edge degree is {}, not 3", star.len()),
                MoveKind::Move41 => format!("vertex lies in {} facets, not 4", star.len()),
            }));
        }
        let b: Vec<Vertex> = if m.kind == MoveKind::Move14 {
            vec![self.next_label]
        } else {
            Self::link_vertices(&star, a)
        };
        if b.len() != 5 - a.len() {
            return Err(Error::IllegalMove("link is not the boundary of a simplex".into()));
        }
        match m.kind {
            MoveKind::Move23 if self.has_face(&b) => return Err(Error::IllegalMove("edge already present".into())),
            MoveKind::Move32 if self.has_face(&b) => {
                return Err(Error::IllegalMove("triangle already present".into()))
            }
            MoveKind::Move41 if self.has_face(&b) => return Err(Error::IllegalMove("facet already present".into())),
            MoveKind::Move41 if self.vertex_count() <= 5 => {
                return Err(Error::IllegalMove("result would have fewer than 5 vertices".into()))
            }
            _ => {}
        }
        // star(a) = a * boundary(b) becomes boundary(a) * b
        let added: Vec<Facet> = (0..a.len())
            .map(|skip| {
                let mut f: Vec<Vertex> = b.clone();
                f.extend(a.iter().enumerate().filter(|&(i, _)| i != skip).map(|(_, &v)| v));
                sorted4([f[0], f[1], f[2], f[3]])
            })
            .collect();
        let mut created = b;
        created.sort_unstable();
        Ok(Flip { removed: star, added, created })
    }

    /// Applies a move, returning the flip performed.
    pub fn apply(&mut self, m: &MoveSpec) -> Result<Flip> {
        let flip = self.plan(m)?;
        for &f in &flip.removed {
            self.remove(f);
        }
        for &f in &flip.added {
            self.insert(f);
        }
        if m.kind == MoveKind::Move14 {
            self.next_label += 1;
        }
        Ok(flip)
    }

    /// Edge variance after `flip`, without applying it.
    pub fn variance_after(&self, flip: &Flip) -> Rational {
        let mut change: HashMap<Edge, i64> = HashMap::new();
        for &f in &flip.removed {
            for e in facet_edges(f) {
                *change.entry(e).or_insert(0) -= 1;
            }
        }
        for &f in &flip.added {
            for e in facet_edges(f) {
                *change.entry(e).or_insert(0) += 1;
            }
        }
        let mut edges = self.edge_count() as i128;
        let mut squares = self.degree_square_sum;
        for (e, delta) in change {
            let old = self.edge_degree.get(&e).copied().unwrap_or(0) as i128;
            let new = old + delta as i128;
            squares += new * new - old * old;
            edges += (new > 0) as i128 - (old > 0) as i128;
        }
        let facets = self.facet_count() as i128 + flip.added.len() as i128 - flip.removed.len() as i128;
        variance_from_sums(edges, 6 * facets, squares)
    }

    /// Every legal move, in a deterministic order.
    pub fn legal_moves(&self) -> Vec<MoveSpec> {
        let mut moves: Vec<MoveSpec> = self.facets.iter().map(|f| MoveSpec::new(MoveKind::Move14, f.to_vec())).collect();
        let mut candidates: BTreeSet<MoveSpec> = BTreeSet::new();
        for t in self.triangles.keys() {
            candidates.insert(MoveSpec::new(MoveKind::Move23, t.to_vec()));
        }
        for (e, &d) in &self.edge_degree {
            if d == 3 {
                candidates.insert(MoveSpec::new(MoveKind::Move32, e.to_vec()));
            }
        }
        for (v, s) in &self.star {
            if s.len() == 4 {
                candidates.insert(MoveSpec::new(MoveKind::Move41, vec![*v]));
            }
        }
        moves.extend(candidates.into_iter().filter(|m| self.plan(m).is_ok()));
        moves
    }
}

fn sorted4(mut f: Facet) -> Facet {
    f.sort_unstable();
    f
}

fn facet_edges(f: Facet) -> [Edge; 6] {
    [[f[0], f[1]], [f[0], f[2]], [f[0], f[3]], [f[1], f[2]], [f[1], f[3]], [f[2], f[3]]]
}

fn facet_triangles(f: Facet) -> [Triangle; 4] {
    [[f[1], f[2], f[3]], [f[0], f[2], f[3]], [f[0], f[1], f[3]], [f[0], f[1], f[2]]]
}

pub fn legal_moves(c: &Complex3) -> Vec<MoveSpec> {
    Triangulation::new(c).legal_moves()
}

/// Applies one move. A 1-4 move introduces vertex `v + 1`; a 4-1 move
/// compresses the labels above the removed vertex.
pub fn apply_move(c: &Complex3, m: &MoveSpec) -> Result<Complex3> {
    let mut t = Triangulation::new(c);
    t.apply(m)?;
    Ok(t.to_complex())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Minimize,
    Maximize,
}

/// Moves the walk may propose.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MoveSet {
    /// 1-4, 2-3, 3-2 and 4-1.
    All,
    /// 2-3 and 3-2 only; the vertex set never changes.
    EdgeFlips,
}

impl MoveSet {
    pub fn allows(self, kind: MoveKind) -> bool {
        match self {
            MoveSet::All => true,
            MoveSet::EdgeFlips => matches!(kind, MoveKind::Move23 | MoveKind::Move32),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnnealConfig {
    pub direction: Direction,
    pub max_moves: u64,
    pub initial_temperature: f64,
    pub cooling_factor: f64,
    /// Accepted moves between reheats.
    pub reheat_period: u64,
    pub seed: u64,
    pub moves: MoveSet,
}

impl Default for AnnealConfig {
    fn default() -> Self {
        AnnealConfig {
            direction: Direction::Minimize,
            max_moves: 10_000,
            initial_temperature: 1.0,
            cooling_factor: 0.99,
            reheat_period: 500,
            seed: 0,
            moves: MoveSet::All,
        }
    }
}

impl AnnealConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.cooling_factor > 0.0 && self.cooling_factor < 1.0) {
            return Err(Error::Domain(format!("cooling factor must lie in (0, 1), got {}", self.cooling_factor)));
        }
        if self.max_moves == 0 {
            return Err(Error::Domain("max_moves must be at least 1".into()));
        }
        if !(self.initial_temperature > 0.0 && self.initial_temperature.is_finite()) {
            return Err(Error::Domain(format!("initial temperature must be positive, got {}", self.initial_temperature)));
        }
        if self.reheat_period == 0 {
            return Err(Error::Domain("reheat period must be at least 1".into()));
        }
        Ok(())
    }
}

/// Locations use the walk's own labels, which are never compressed or reused;
/// replay a log with [`Triangulation::apply`], not [`apply_move`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AcceptedMove {
    pub step: u64,
    pub spec: MoveSpec,
    pub variance: Rational,
}

#[derive(Clone, Debug)]
pub struct AnnealResult {
    pub initial_variance: Rational,
    pub best_complex: Complex3,
    pub best_variance: Rational,
    pub move_log: Vec<AcceptedMove>,
    /// Best-so-far variance after each step.
    pub variance_trace: Vec<Rational>,
}

impl AnnealResult {
    /// `step,kind,location,variance_num,variance_den`, one row per accepted move.
    pub fn move_log_csv(&self) -> String {
        let mut out = String::from("step,kind,location,variance_num,variance_den\n");
        for m in &self.move_log {
            let loc: Vec<String> = m.spec.location.iter().map(|v| v.to_string()).collect();
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                m.step,
                m.spec.kind,
                loc.join(" "),
                m.variance.numer(),
                m.variance.denom()
            ));
        }
        out
    }

    /// Same columns, one row per step, holding the best-so-far variance.
    pub fn trace_csv(&self) -> String {
        let mut out = String::from("step,kind,location,variance_num,variance_den\n");
        for (step, v) in self.variance_trace.iter().enumerate() {
            out.push_str(&format!("{},best,,{},{}\n", step, v.numer(), v.denom()));
        }
        out
    }
}

/// Metropolis walk over uniformly chosen legal moves.
pub fn anneal_edge_variance(c: &Complex3, cfg: &AnnealConfig) -> Result<AnnealResult> {
    cfg.validate()?;
    c.validate()?;
    let sign = match cfg.direction {
        Direction::Minimize => Rational::from_integer(1),
        Direction::Maximize => Rational::from_integer(-1),
    };
    let mut rng = seeded_rng(cfg.seed);
    let mut state = Triangulation::new(c);
    let initial = state.edge_variance();
    let mut current = initial;
    let mut best = initial;
    let mut best_facets: Vec<Facet> = state.facets.iter().copied().collect();
    let mut temperature = cfg.initial_temperature;
    let mut accepted_since_reheat = 0;
    let mut log = Vec::new();
    let mut trace = Vec::with_capacity(cfg.max_moves as usize);

    for step in 0..cfg.max_moves {
        let mut moves = state.legal_moves();
        moves.retain(|m| cfg.moves.allows(m.kind));
        if moves.is_empty() {
            trace.push(best);
            continue;
        }
        let m = &moves[rng.random_range(0..moves.len())];
        let flip = state.plan(m).expect("listed moves are legal");
        let next = state.variance_after(&flip);
        let delta = to_f64(&(sign * (next - current)));
        let accept = delta <= 0.0 || rng.random::<f64>() < (-delta / temperature).exp();
        if accept {
            state.apply(m).expect("listed moves are legal");
            debug_assert_eq!(state.edge_variance(), next);
            current = next;
            if cfg!(debug_assertions) || log.len() % 100 == 0 {
                assert!(state.to_complex().is_closed_3_manifold(), "move {m} broke the manifold");
            }
            log.push(AcceptedMove { step, spec: m.clone(), variance: current });
            if sign * (current - best) < Rational::from_integer(0) {
                best = current;
                best_facets = state.facets.iter().copied().collect();
            }
            accepted_since_reheat += 1;
            if accepted_since_reheat == cfg.reheat_period {
                accepted_since_reheat = 0;
                temperature = cfg.initial_temperature;
            }
        }
        temperature *= cfg.cooling_factor;
        trace.push(best);
    }
    Ok(AnnealResult {
        initial_variance: initial,
        best_complex: Complex3::new(best_facets)?,
        best_variance: best,
        move_log: log,
        variance_trace: trace,
    })
}

/// Degree histogram of the edges of a triangulation.
pub fn degree_histogram(t: &Triangulation) -> BTreeMap<u32, usize> {
    let mut h = BTreeMap::new();
    for &d in t.edge_degree.values() {
        *h.entry(d).or_insert(0) += 1;
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::boundary_of_4_simplex;
    use crate::invariants::edge_variance;

    #[test]
    fn moves_on_minimal_sphere() {
        let c = boundary_of_4_simplex();
        let moves = legal_moves(&c);
        assert_eq!(moves.len(), 5);
        assert!(moves.iter().all(|m| m.kind == MoveKind::Move14));
        let err = apply_move(&c, &MoveSpec::new(MoveKind::Move23, vec![1, 2, 3])).unwrap_err();
        assert!(err.to_string().contains("edge already present"), "{err}");
        let err = apply_move(&c, &MoveSpec::new(MoveKind::Move41, vec![1])).unwrap_err();
        assert!(err.to_string().contains("facet already present"), "{err}");
    }

    #[test]
    fn one_four_and_back() {
        let c = boundary_of_4_simplex();
        let d = apply_move(&c, &MoveSpec::new(MoveKind::Move14, vec![1, 2, 3, 4])).unwrap();
        assert_eq!(d.f_vector().as_array(), [6, 14, 16, 8]);
        assert!(d.is_closed_3_manifold());
        let inverse: Vec<MoveSpec> = legal_moves(&d).into_iter().filter(|m| m.kind == MoveKind::Move41).collect();
        // the old vertex 5 now has a 4-facet star whose link facet was removed
        assert_eq!(inverse, vec![MoveSpec::new(MoveKind::Move41, vec![5]), MoveSpec::new(MoveKind::Move41, vec![6])]);
        let back = apply_move(&d, &inverse[1]).unwrap();
        assert_eq!(back.canonical_form().unwrap(), c.canonical_form().unwrap());
    }

    #[test]
    fn two_three_and_back() {
        let c = apply_move(&boundary_of_4_simplex(), &MoveSpec::new(MoveKind::Move14, vec![1, 2, 3, 4])).unwrap();
        let mut t = Triangulation::new(&c);
        let m = t.legal_moves().into_iter().find(|m| m.kind == MoveKind::Move23).unwrap();
        let before = t.f_vector();
        let flip = t.apply(&m).unwrap();
        let after = t.f_vector();
        assert_eq!([after[0] - before[0], after[1] - before[1], after[2] - before[2], after[3] - before[3]], [0, 1, 2, 1]);
        assert!(t.to_complex().is_closed_3_manifold());
        t.apply(&MoveSpec::new(MoveKind::Move32, flip.created)).unwrap();
        assert_eq!(t.to_complex().canonical_form().unwrap(), c.canonical_form().unwrap());
    }

    #[test]
    fn incremental_variance_matches() {
        let mut t = Triangulation::new(&boundary_of_4_simplex());
        let mut rng = seeded_rng(3);
        for _ in 0..40 {
            let moves = t.legal_moves();
            let m = &moves[rng.random_range(0..moves.len())];
            let flip = t.plan(m).unwrap();
            let predicted = t.variance_after(&flip);
            t.apply(m).unwrap();
            assert_eq!(predicted, t.edge_variance());
            assert_eq!(t.edge_variance(), edge_variance(&t.to_complex()).variance);
        }
    }

    #[test]
    fn minimal_sphere_is_already_optimal() {
        let cfg = AnnealConfig { max_moves: 200, seed: 5, ..Default::default() };
        let r = anneal_edge_variance(&boundary_of_4_simplex(), &cfg).unwrap();
        assert_eq!(r.best_variance, Rational::from_integer(0));
        assert_eq!(r.best_complex.f_vector().as_array(), [5, 10, 10, 5]);
        assert_eq!(r.variance_trace.len(), 200);
    }

    #[test]
    fn config_validation() {
        let bad = AnnealConfig { cooling_factor: 1.0, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = AnnealConfig { max_moves: 0, ..Default::default() };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn csv_header() {
        let cfg = AnnealConfig { max_moves: 10, seed: 1, direction: Direction::Maximize, ..Default::default() };
        let r = anneal_edge_variance(&boundary_of_4_simplex(), &cfg).unwrap();
        assert!(r.move_log_csv().starts_with("step,kind,location,variance_num,variance_den\n"));
        assert_eq!(r.trace_csv().lines().count(), 11);
    }
}
