//! Graph maps of the rose R_r: edge images, derivatives, turns, gates,
//! Whitehead graphs and transition matrices.
//!
//! A RoseMap stores the image of each a_i as a word. Compositions of long
//! admissible sequences are too large to store, so the sequence-level
//! helpers below work from the factorization instead (turn recursion,
//! composed derivatives), and `FactoredMap` answers position queries on
//! images without expanding them.
//!
//! Text format:
//! ```text
//! rank 3
//! a1 -> a2a1
//! a2 -> a2
//! a3 -> a3
//! ```

mod inp;
mod lazy;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Serialize, Serializer};

use crate::error::{check_rank, Error, Result};
use crate::free_group::{directions, format_letters, parse_letters, Letter, Word};
use crate::nielsen::{NielsenAuto, NielsenSequence};
use crate::spectral::Matrix;

pub use inp::{find_inp, find_pinp, search_inp, search_pinp, verify_inp, Inp, InpSearch, PathEnd, DEFAULT_INP_CAP};
pub use lazy::{Divergence, FactoredMap, Substitution};

/// An unordered pair of directions, stored with the smaller index first.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Turn {
    a: Letter,
    b: Letter,
}

impl Turn {
    pub fn new(d1: Letter, d2: Letter) -> Turn {
        if d1 <= d2 {
            Turn { a: d1, b: d2 }
        } else {
            Turn { a: d2, b: d1 }
        }
    }

    pub fn d1(&self) -> Letter {
        self.a
    }

    pub fn d2(&self) -> Letter {
        self.b
    }

    pub fn is_degenerate(&self) -> bool {
        self.a == self.b
    }

    pub fn contains(&self, d: Letter) -> bool {
        self.a == d || self.b == d
    }

    pub fn map(&self, d: &DirectionMap) -> Turn {
        Turn::new(d.apply(self.a), d.apply(self.b))
    }
}

impl fmt::Display for Turn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{},{}}}", self.a, self.b)
    }
}

impl Serialize for Turn {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// A self-map of the 2r directions, indexed by `Letter::index`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct DirectionMap {
    img: Vec<Letter>,
}

impl DirectionMap {
    pub fn identity(rank: usize) -> DirectionMap {
        DirectionMap { img: directions(rank) }
    }

    pub fn of_nielsen(t: &NielsenAuto) -> DirectionMap {
        DirectionMap { img: directions(t.rank()).into_iter().map(|d| t.derivative(d)).collect() }
    }

    pub(crate) fn from_images(img: Vec<Letter>) -> DirectionMap {
        DirectionMap { img }
    }

    pub fn rank(&self) -> usize {
        self.img.len() / 2
    }

    pub fn apply(&self, d: Letter) -> Letter {
        self.img[d.index()]
    }

    /// `outer ∘ self`.
    pub fn then(&self, outer: &DirectionMap) -> DirectionMap {
        DirectionMap { img: self.img.iter().map(|&d| outer.apply(d)).collect() }
    }

    pub fn power(&self, k: usize) -> DirectionMap {
        let mut out = DirectionMap::identity(self.rank());
        for _ in 0..k {
            out = out.then(self);
        }
        out
    }

    pub fn image_set(&self) -> BTreeSet<Letter> {
        self.img.iter().copied().collect()
    }

    /// D^{2r}; the identifications made by iterates of D are stable by then.
    fn stable(&self) -> DirectionMap {
        self.power(self.img.len())
    }

    /// Classes of directions identified by some iterate of D.
    pub fn gates(&self) -> Vec<Vec<Letter>> {
        let st = self.stable();
        let mut classes: BTreeMap<Letter, Vec<Letter>> = BTreeMap::new();
        for d in directions(self.rank()) {
            classes.entry(st.apply(d)).or_default().push(d);
        }
        let mut out: Vec<Vec<Letter>> = classes.into_values().collect();
        out.sort();
        out
    }

    /// Nondegenerate turns inside a gate.
    pub fn illegal_turns(&self) -> BTreeSet<Turn> {
        let mut out = BTreeSet::new();
        for g in self.gates() {
            for (i, &a) in g.iter().enumerate() {
                for &b in &g[i + 1..] {
                    out.insert(Turn::new(a, b));
                }
            }
        }
        out
    }

    pub fn is_legal(&self, t: &Turn) -> bool {
        let st = self.stable();
        t.is_degenerate() || st.apply(t.d1()) != st.apply(t.d2())
    }

    /// Directions fixed by some iterate of D; exactly one per gate.
    pub fn periodic_directions(&self) -> BTreeSet<Letter> {
        self.stable().image_set()
    }
}

/// A simple graph on a set of directions.
#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct WhGraph {
    rank: usize,
    vertices: BTreeSet<Letter>,
    edges: BTreeSet<Turn>,
}

impl WhGraph {
    pub fn empty(rank: usize) -> WhGraph {
        WhGraph { rank, vertices: directions(rank).into_iter().collect(), edges: BTreeSet::new() }
    }

    /// Graph on all 2r directions; degenerate turns are dropped.
    pub fn from_turns(rank: usize, turns: impl IntoIterator<Item = Turn>) -> WhGraph {
        let mut g = WhGraph::empty(rank);
        for t in turns {
            if !t.is_degenerate() {
                g.edges.insert(t);
            }
        }
        g
    }

    /// Υ_r[x, y]: complete on the directions other than x, plus the edge from x to y⁻¹.
    pub fn upsilon(rank: usize, x: Letter, y: Letter) -> WhGraph {
        let rest: Vec<Letter> = directions(rank).into_iter().filter(|&d| d != x).collect();
        let mut g = WhGraph::empty(rank);
        for (i, &a) in rest.iter().enumerate() {
            for &b in &rest[i + 1..] {
                g.edges.insert(Turn::new(a, b));
            }
        }
        g.edges.insert(Turn::new(x, y.inverse()));
        g
    }

    pub fn complete(rank: usize, vertices: &BTreeSet<Letter>) -> WhGraph {
        let v: Vec<Letter> = vertices.iter().copied().collect();
        let mut edges = BTreeSet::new();
        for (i, &a) in v.iter().enumerate() {
            for &b in &v[i + 1..] {
                edges.insert(Turn::new(a, b));
            }
        }
        WhGraph { rank, vertices: vertices.clone(), edges }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn vertices(&self) -> &BTreeSet<Letter> {
        &self.vertices
    }

    pub fn edges(&self) -> &BTreeSet<Turn> {
        &self.edges
    }

    pub fn has_edge(&self, a: Letter, b: Letter) -> bool {
        self.edges.contains(&Turn::new(a, b))
    }

    pub fn degree(&self, d: Letter) -> usize {
        self.edges.iter().filter(|t| t.contains(d)).count()
    }

    /// Literal equality with Υ_r[x, y].
    pub fn is_upsilon(&self, x: Letter, y: Letter) -> bool {
        x.generator() != y.generator() && *self == WhGraph::upsilon(self.rank, x, y)
    }

    /// Returns (x, y) if the graph is Υ_r[x, y] up to the labels: a unique
    /// degree-one vertex x whose neighbour is y⁻¹, the rest complete.
    pub fn upsilon_labels(&self) -> Option<(Letter, Letter)> {
        let ones: Vec<Letter> = self.vertices.iter().copied().filter(|&d| self.degree(d) == 1).collect();
        if ones.len() != 1 {
            return None;
        }
        let x = ones[0];
        let nb = self.edges.iter().find(|t| t.contains(x))?;
        let other = if nb.d1() == x { nb.d2() } else { nb.d1() };
        let y = other.inverse();
        (x.generator() != y.generator() && self.is_upsilon(x, y)).then_some((x, y))
    }

    fn components(&self, skip: Option<Letter>) -> usize {
        let verts: Vec<Letter> = self.vertices.iter().copied().filter(|&v| Some(v) != skip).collect();
        let mut seen: BTreeSet<Letter> = BTreeSet::new();
        let mut count = 0;
        for &v in &verts {
            if !seen.insert(v) {
                continue;
            }
            count += 1;
            let mut stack = vec![v];
            while let Some(u) = stack.pop() {
                for t in &self.edges {
                    if !t.contains(u) {
                        continue;
                    }
                    let w = if t.d1() == u { t.d2() } else { t.d1() };
                    if Some(w) != skip && self.vertices.contains(&w) && seen.insert(w) {
                        stack.push(w);
                    }
                }
            }
        }
        count
    }

    pub fn is_connected(&self) -> bool {
        self.components(None) <= 1
    }

    pub fn is_complete(&self) -> bool {
        let n = self.vertices.len();
        self.edges.len() == n * n.saturating_sub(1) / 2
    }

    /// True if deleting some vertex increases the number of components.
    pub fn has_cut_vertex(&self) -> bool {
        let base = self.components(None);
        self.vertices.iter().any(|&v| {
            let isolated = self.degree(v) == 0;
            let after = self.components(Some(v));
            after > base - usize::from(isolated)
        })
    }

    /// Induced subgraph on `keep`.
    pub fn restrict(&self, keep: &BTreeSet<Letter>) -> WhGraph {
        let vertices: BTreeSet<Letter> = self.vertices.intersection(keep).copied().collect();
        let edges = self
            .edges
            .iter()
            .filter(|t| vertices.contains(&t.d1()) && vertices.contains(&t.d2()))
            .copied()
            .collect();
        WhGraph { rank: self.rank, vertices, edges }
    }
}

/// T(θ_m) ∪ Dθ_m(T): one step of the taken-turn recursion.
pub fn extend_turns(turns: &BTreeSet<Turn>, t: &NielsenAuto) -> BTreeSet<Turn> {
    let d = DirectionMap::of_nielsen(t);
    let mut out: BTreeSet<Turn> = turns.iter().map(|x| x.map(&d)).collect();
    out.insert(t.taken_turn());
    out
}

/// T(g_m) for every prefix length m = 1..n, by the taken-turn recursion.
pub fn turn_recursion(seq: &[NielsenAuto]) -> Vec<BTreeSet<Turn>> {
    let mut out = Vec::with_capacity(seq.len());
    let mut cur = BTreeSet::new();
    for t in seq {
        cur = extend_turns(&cur, t);
        out.push(cur.clone());
    }
    out
}

pub fn sequence_taken_turns(seq: &[NielsenAuto]) -> BTreeSet<Turn> {
    seq.iter().fold(BTreeSet::new(), |acc, t| extend_turns(&acc, t))
}

/// D(g_n) = Dθ_n ∘ ... ∘ Dθ_1.
pub fn sequence_derivative(seq: &[NielsenAuto], rank: usize) -> DirectionMap {
    seq.iter()
        .fold(DirectionMap::identity(rank), |acc, t| acc.then(&DirectionMap::of_nielsen(t)))
}

/// Closure of `taken` under D: the turns taken by some iterate of the map.
pub fn stable_turns(taken: &BTreeSet<Turn>, d: &DirectionMap, cap: usize) -> Result<BTreeSet<Turn>> {
    let mut all: BTreeSet<Turn> = taken.iter().copied().filter(|t| !t.is_degenerate()).collect();
    let mut frontier: BTreeSet<Turn> = all.clone();
    for _ in 0..cap {
        let next: BTreeSet<Turn> = frontier
            .iter()
            .map(|t| t.map(d))
            .filter(|t| !t.is_degenerate() && !all.contains(t))
            .collect();
        if next.is_empty() {
            return Ok(all);
        }
        all.extend(next.iter().copied());
        frontier = next;
    }
    Err(Error::CapExceeded(cap))
}

/// Default bound on the number of letters a materialized RoseMap may hold.
pub const DEFAULT_SIZE_CAP: usize = 1 << 22;

/// A graph map of the rose, stored as the images of a1..ar.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RoseMap {
    rank: usize,
    images: Vec<Word>,
    regular: bool,
}

impl RoseMap {
    pub fn new(images: Vec<Word>) -> Result<RoseMap> {
        let rank = images.len();
        if rank < 2 {
            return Err(Error::InvalidRank(rank));
        }
        for w in &images {
            check_rank(rank, w.rank())?;
            if w.is_empty() {
                return Err(Error::Malformed("edge image is empty".into()));
            }
        }
        Ok(RoseMap { rank, images, regular: true })
    }

    pub fn identity(rank: usize) -> RoseMap {
        let images = (1..=rank).map(|g| Word::from_reduced(vec![Letter::new(g, false)], rank)).collect();
        RoseMap { rank, images, regular: true }
    }

    pub fn from_nielsen(t: &NielsenAuto) -> RoseMap {
        let r = t.rank();
        let images = (1..=r)
            .map(|g| Word::from_reduced(t.image(Letter::new(g, false)), r))
            .collect();
        RoseMap { rank: r, images, regular: true }
    }

    /// g_𝔱 = g_{θ_n} ∘ ... ∘ g_{θ_1}.
    pub fn from_sequence(seq: &NielsenSequence) -> Result<RoseMap> {
        RoseMap::from_sequence_capped(seq, DEFAULT_SIZE_CAP)
    }

    pub fn from_sequence_capped(seq: &NielsenSequence, cap: usize) -> Result<RoseMap> {
        let mut f = RoseMap::identity(seq.rank());
        if seq.is_empty() {
            return Err(Error::Precondition("empty sequence".into()));
        }
        for t in seq.items() {
            f = RoseMap::from_nielsen(t).compose_capped(&f, cap)?;
        }
        Ok(f)
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn images(&self) -> &[Word] {
        &self.images
    }

    pub fn is_regular(&self) -> bool {
        self.regular
    }

    /// Image of a direction; for a⁻¹ this is the inverse of the image of a.
    pub fn image(&self, d: Letter) -> Vec<Letter> {
        let w = &self.images[d.generator() - 1];
        if d.is_inverse() {
            w.inverse().into_letters()
        } else {
            w.letters().to_vec()
        }
    }

    /// c(f) = Σ |f(a_i)|.
    pub fn complexity(&self) -> usize {
        self.images.iter().map(|w| w.len()).sum()
    }

    /// `outer ∘ inner`; the result is flagged irregular if any image cancels.
    pub fn compose(outer: &RoseMap, inner: &RoseMap) -> Result<RoseMap> {
        outer.compose_capped(inner, usize::MAX)
    }

    fn compose_capped(&self, inner: &RoseMap, cap: usize) -> Result<RoseMap> {
        check_rank(self.rank, inner.rank)?;
        let mut regular = self.regular && inner.regular;
        let mut images = Vec::with_capacity(self.rank);
        let mut total = 0usize;
        for w in &inner.images {
            let mut raw = Vec::new();
            for &l in w.letters() {
                raw.extend(self.image(l));
            }
            let red = Word::reduce(&raw, self.rank)?;
            if red.len() != raw.len() {
                regular = false;
            }
            if red.is_empty() {
                return Err(Error::Precondition("composition collapses an edge".into()));
            }
            total = total.saturating_add(red.len());
            if total > cap {
                return Err(Error::Precondition(format!("edge images exceed {cap} letters")));
            }
            images.push(red);
        }
        Ok(RoseMap { rank: self.rank, images, regular })
    }

    pub fn power(&self, k: usize) -> Result<RoseMap> {
        let mut out = RoseMap::identity(self.rank);
        for _ in 0..k {
            out = RoseMap::compose(self, &out)?;
        }
        Ok(out)
    }

    fn require_regular(&self) -> Result<()> {
        if self.regular {
            Ok(())
        } else {
            Err(Error::Precondition("map is not regular".into()))
        }
    }

    /// Df(d) = first letter of the image of d.
    pub fn derivative(&self) -> Result<DirectionMap> {
        self.require_regular()?;
        Ok(DirectionMap::from_images(directions(self.rank).into_iter().map(|d| self.image(d)[0]).collect()))
    }

    /// Turns {ē_i, e_{i+1}} crossed inside the edge images.
    pub fn taken_turns(&self) -> BTreeSet<Turn> {
        let mut out = BTreeSet::new();
        for w in &self.images {
            for p in w.letters().windows(2) {
                out.insert(Turn::new(p[0].inverse(), p[1]));
            }
        }
        out
    }

    pub fn gates(&self) -> Result<Vec<Vec<Letter>>> {
        Ok(self.derivative()?.gates())
    }

    pub fn illegal_turns(&self) -> Result<BTreeSet<Turn>> {
        Ok(self.derivative()?.illegal_turns())
    }

    /// Train track test: a regular homotopy equivalence whose taken turns are
    /// all legal. `iterate_cap` bounds the gate computation and must be at
    /// least 2r.
    pub fn is_train_track(&self, iterate_cap: usize) -> Result<bool> {
        if iterate_cap < 2 * self.rank {
            return Err(Error::CapExceeded(iterate_cap));
        }
        if !self.regular {
            return Ok(false);
        }
        if !crate::folds::is_homotopy_equivalence(self) {
            return Err(Error::Precondition("map is not a homotopy equivalence".into()));
        }
        let d = self.derivative()?;
        Ok(self.taken_turns().iter().all(|t| d.is_legal(t)))
    }

    pub fn limited_whitehead_graph(&self) -> Result<WhGraph> {
        self.require_regular()?;
        Ok(WhGraph::from_turns(self.rank, self.taken_turns()))
    }

    pub fn whitehead_graph(&self, cap: usize) -> Result<WhGraph> {
        let t = stable_turns(&self.taken_turns(), &self.derivative()?, cap)?;
        Ok(WhGraph::from_turns(self.rank, t))
    }

    /// m_ij = number of a_i^{±1} in the image of a_j.
    pub fn transition_matrix(&self) -> Matrix {
        let mut m = Matrix::zero(self.rank);
        for (j, w) in self.images.iter().enumerate() {
            for l in w.letters() {
                m.add_one(l.generator() - 1, j);
            }
        }
        m
    }

    pub fn parse(text: &str) -> Result<RoseMap> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines.next().ok_or_else(|| Error::Malformed("empty map text".into()))?;
        let rank: usize = header
            .strip_prefix("rank")
            .map(str::trim)
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::Malformed(format!("expected 'rank r', got {header:?}")))?;
        let mut images: Vec<Option<Word>> = vec![None; rank];
        for line in lines {
            let (lhs, rhs) = line
                .split_once("->")
                .ok_or_else(|| Error::Malformed(format!("expected 'a1 -> w', got {line:?}")))?;
            let l = parse_letters(lhs)?;
            if l.len() != 1 || l[0].is_inverse() {
                return Err(Error::Malformed(format!("left side must be a generator: {line:?}")));
            }
            l[0].check(rank)?;
            let slot = &mut images[l[0].generator() - 1];
            if slot.is_some() {
                return Err(Error::Malformed(format!("edge {} given twice", l[0])));
            }
            *slot = Some(Word::parse(rhs, rank)?);
        }
        let images = images
            .into_iter()
            .enumerate()
            .map(|(i, w)| w.ok_or_else(|| Error::Malformed(format!("missing image of a{}", i + 1))))
            .collect::<Result<Vec<_>>>()?;
        RoseMap::new(images)
    }
}

impl fmt::Display for RoseMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "rank {}", self.rank)?;
        for (i, w) in self.images.iter().enumerate() {
            writeln!(f, "a{} -> {}", i + 1, format_letters(w.letters(), ""))?;
        }
        Ok(())
    }
}
