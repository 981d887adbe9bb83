//! Elementary Nielsen automorphisms [x->yx], admissible sequences, pINP
//! prevention blocks and the seed sequence.
//!
//! Text format: `[a1->a2a1]` is the automorphism sending a1 to a2a1; a
//! sequence is a whitespace separated list of such tokens, innermost first.

use std::collections::{BTreeMap, HashSet, VecDeque};
use std::fmt;

use serde::{Serialize, Serializer};

use crate::error::{check_rank, Error, Result};
use crate::free_group::{directions, parse_letters, Letter};
use crate::rose_map::{self, Turn, WhGraph};
use crate::spectral::Matrix;

/// θ = [x -> yx]: x ↦ yx, x⁻¹ ↦ x⁻¹y⁻¹, every other letter fixed.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct NielsenAuto {
    x: Letter,
    y: Letter,
    rank: usize,
}

impl NielsenAuto {
    pub fn new(x: Letter, y: Letter, rank: usize) -> Result<NielsenAuto> {
        if rank < 2 {
            return Err(Error::InvalidRank(rank));
        }
        x.check(rank)?;
        y.check(rank)?;
        if x.generator() == y.generator() {
            return Err(Error::Malformed(format!("[{x}->{y}{x}] is not an automorphism")));
        }
        Ok(NielsenAuto { x, y, rank })
    }

    pub fn x(&self) -> Letter {
        self.x
    }

    pub fn y(&self) -> Letter {
        self.y
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// [x -> y⁻¹x]
    pub fn inverse(&self) -> NielsenAuto {
        NielsenAuto { x: self.x, y: self.y.inverse(), rank: self.rank }
    }

    pub fn image(&self, l: Letter) -> Vec<Letter> {
        match self.image_pair(l) {
            (a, Some(b)) => vec![a, b],
            (a, None) => vec![a],
        }
    }

    pub(crate) fn image_pair(&self, l: Letter) -> (Letter, Option<Letter>) {
        if l == self.x {
            (self.y, Some(self.x))
        } else if l == self.x.inverse() {
            (l, Some(self.y.inverse()))
        } else {
            (l, None)
        }
    }

    /// Dθ: x goes to y, everything else is fixed.
    pub fn derivative(&self, d: Letter) -> Letter {
        if d == self.x {
            self.y
        } else {
            d
        }
    }

    pub fn illegal_turn(&self) -> Turn {
        Turn::new(self.x, self.y)
    }

    pub fn taken_turn(&self) -> Turn {
        Turn::new(self.y.inverse(), self.x)
    }

    pub fn parse(s: &str, rank: usize) -> Result<NielsenAuto> {
        let t = s.trim();
        let inner = t
            .strip_prefix('[')
            .and_then(|t| t.strip_suffix(']'))
            .ok_or_else(|| Error::Malformed(format!("expected [x->yx], got {s:?}")))?;
        let (lhs, rhs) = inner
            .split_once("->")
            .ok_or_else(|| Error::Malformed(format!("missing '->' in {s:?}")))?;
        let lhs = parse_letters(lhs)?;
        let rhs = parse_letters(rhs)?;
        if lhs.len() != 1 || rhs.len() != 2 || rhs[1] != lhs[0] {
            return Err(Error::Malformed(format!("{s:?} is not of the form [x->yx]")));
        }
        NielsenAuto::new(lhs[0], rhs[0], rank)
    }

    fn key(&self) -> (usize, usize) {
        (self.x.index(), self.y.index())
    }
}

impl Ord for NielsenAuto {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.rank, self.key()).cmp(&(other.rank, other.key()))
    }
}

impl PartialOrd for NielsenAuto {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for NielsenAuto {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}->{}{}]", self.x, self.y, self.x)
    }
}

impl Serialize for NielsenAuto {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// θ_1, ..., θ_n applied in that order, i.e. the composition θ_n ∘ ... ∘ θ_1.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct NielsenSequence {
    items: Vec<NielsenAuto>,
    rank: usize,
}

impl NielsenSequence {
    pub fn new(items: Vec<NielsenAuto>, rank: usize) -> Result<NielsenSequence> {
        for t in &items {
            check_rank(rank, t.rank)?;
        }
        Ok(NielsenSequence { items, rank })
    }

    pub fn parse(s: &str, rank: usize) -> Result<NielsenSequence> {
        let mut items = Vec::new();
        let mut rest = s.trim();
        while !rest.is_empty() {
            if !rest.starts_with('[') {
                return Err(Error::Malformed(format!("expected '[' at {rest:?}")));
            }
            let end = rest
                .find(']')
                .ok_or_else(|| Error::Malformed(format!("unterminated token in {s:?}")))?;
            items.push(NielsenAuto::parse(&rest[..=end], rank)?);
            rest = rest[end + 1..].trim_start();
        }
        NielsenSequence::new(items, rank)
    }

    pub fn items(&self) -> &[NielsenAuto] {
        &self.items
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn first(&self) -> Option<&NielsenAuto> {
        self.items.first()
    }

    pub fn last(&self) -> Option<&NielsenAuto> {
        self.items.last()
    }

    pub fn prefix(&self, n: usize) -> NielsenSequence {
        NielsenSequence { items: self.items[..n].to_vec(), rank: self.rank }
    }

    /// Cyclic permutation starting at item `k`.
    pub fn rotate(&self, k: usize) -> NielsenSequence {
        let mut items = self.items.clone();
        if !items.is_empty() {
            let len = items.len();
            items.rotate_left(k % len);
        }
        NielsenSequence { items, rank: self.rank }
    }

    pub fn power(&self, k: usize) -> NielsenSequence {
        let mut items = Vec::with_capacity(self.items.len() * k);
        for _ in 0..k {
            items.extend_from_slice(&self.items);
        }
        NielsenSequence { items, rank: self.rank }
    }

    pub fn concat(&self, other: &NielsenSequence) -> Result<NielsenSequence> {
        check_rank(self.rank, other.rank)?;
        let mut items = self.items.clone();
        items.extend_from_slice(&other.items);
        Ok(NielsenSequence { items, rank: self.rank })
    }

    /// Inverse sequence θ_n⁻¹, ..., θ_1⁻¹ (the right walk convention).
    pub fn inverse(&self) -> NielsenSequence {
        let items = self.items.iter().rev().map(|t| t.inverse()).collect();
        NielsenSequence { items, rank: self.rank }
    }

    pub fn starts_with(&self, block: &[NielsenAuto]) -> bool {
        self.items.starts_with(block)
    }

    /// First start index i such that rotating by i puts `block` in front.
    pub fn find_cyclic(&self, block: &[NielsenAuto]) -> Option<usize> {
        let n = self.items.len();
        if block.is_empty() || block.len() > n {
            return None;
        }
        (0..n).find(|&i| (0..block.len()).all(|j| self.items[(i + j) % n] == block[j]))
    }

    pub fn is_admissible(&self) -> Result<bool> {
        is_admissible(&self.items)
    }

    pub fn is_cyclically_admissible(&self) -> Result<bool> {
        is_cyclically_admissible(&self.items)
    }
}

impl fmt::Display for NielsenSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.items.iter().map(|t| t.to_string()).collect();
        f.write_str(&parts.join(" "))
    }
}

impl Serialize for NielsenSequence {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// The generating set S in lexicographic (x, y) order; |S| = 4r(r-1).
pub fn enumerate_s(rank: usize) -> Result<Vec<NielsenAuto>> {
    if rank < 2 {
        return Err(Error::InvalidRank(rank));
    }
    let dirs = directions(rank);
    let mut out = Vec::with_capacity(4 * rank * (rank - 1));
    for &x in &dirs {
        for &y in &dirs {
            if x.generator() != y.generator() {
                out.push(NielsenAuto { x, y, rank });
            }
        }
    }
    Ok(out)
}

pub fn is_admissible_pair(a: &NielsenAuto, b: &NielsenAuto) -> Result<bool> {
    check_rank(a.rank, b.rank)?;
    Ok(admissible(a, b))
}

pub(crate) fn admissible(a: &NielsenAuto, b: &NielsenAuto) -> bool {
    (b.x == a.x && b.y != a.y.inverse()) || (b.y == a.x && b.x != a.y.inverse())
}

/// S₊(θ): all θ' with (θ, θ') admissible.
pub fn successors(t: &NielsenAuto) -> Vec<NielsenAuto> {
    enumerate_s(t.rank)
        .expect("valid rank")
        .into_iter()
        .filter(|u| admissible(t, u))
        .collect()
}

/// S₋(θ): all θ' with (θ', θ) admissible.
pub fn predecessors(t: &NielsenAuto) -> Vec<NielsenAuto> {
    enumerate_s(t.rank)
        .expect("valid rank")
        .into_iter()
        .filter(|u| admissible(u, t))
        .collect()
}

pub fn is_admissible(seq: &[NielsenAuto]) -> Result<bool> {
    let first = seq.first().ok_or_else(|| Error::Precondition("empty sequence".into()))?;
    for t in seq {
        check_rank(first.rank, t.rank)?;
    }
    Ok(seq.windows(2).all(|p| admissible(&p[0], &p[1])))
}

pub fn is_cyclically_admissible(seq: &[NielsenAuto]) -> Result<bool> {
    Ok(is_admissible(seq)? && admissible(&seq[seq.len() - 1], &seq[0]))
}

fn distinct_non_inverse(letters: &[Letter]) -> bool {
    letters
        .iter()
        .enumerate()
        .all(|(i, a)| letters[i + 1..].iter().all(|b| a.generator() != b.generator()))
}

/// The pINP prevention block on the given letters.
///
/// Four letters (x, w, y, z) give the six-term block
/// [z->xz] [w->zw] [y->y w̄] [y->y x̄] [y->y w̄] [y->y x̄] (needs r ≥ 4), where the
/// right multiplications are written in the left form [ȳ->w ȳ]. Three
/// letters (a, b, c) give the eight-term block (r ≥ 3).
pub fn prevention_block(rank: usize, letters: &[Letter]) -> Result<NielsenSequence> {
    if rank < 3 {
        return Err(Error::InvalidRank(rank));
    }
    for l in letters {
        l.check(rank)?;
    }
    if !distinct_non_inverse(letters) {
        return Err(Error::Precondition(
            "block letters must be distinct and pairwise non-inverse".into(),
        ));
    }
    let n = |x: Letter, y: Letter| NielsenAuto { x, y, rank };
    let items = match *letters {
        [x, w, y, z] => {
            if rank < 4 {
                return Err(Error::Precondition("the six-term block needs rank at least 4".into()));
            }
            let yb = y.inverse();
            vec![n(z, x), n(w, z), n(yb, w), n(yb, x), n(yb, w), n(yb, x)]
        }
        [a, b, c] => {
            let bb = b.inverse();
            vec![n(a, c), n(bb, a), n(bb, c.inverse()), n(a, bb), n(a, c), n(a, b), n(a, c), n(a, c)]
        }
        _ => {
            return Err(Error::Precondition(format!(
                "prevention block takes 3 or 4 letters, got {}",
                letters.len()
            )))
        }
    };
    NielsenSequence::new(items, rank)
}

/// Block on the first basis letters: (a1,a2,a3) for r = 3, (a1,a2,a3,a4) otherwise.
pub fn default_prevention_block(rank: usize) -> Result<NielsenSequence> {
    let k = if rank == 3 { 3 } else { 4 };
    let letters: Vec<Letter> = (1..=k).map(|g| Letter::new(g, false)).collect();
    prevention_block(rank, &letters)
}

/// Every prevention block of the rank, over all admissible letter choices.
pub fn all_prevention_blocks(rank: usize) -> Result<HashSet<Vec<NielsenAuto>>> {
    if rank < 3 {
        return Err(Error::InvalidRank(rank));
    }
    let dirs = directions(rank);
    let mut out = HashSet::new();
    let mut pick = |k: usize| -> Result<()> {
        let mut stack: Vec<Vec<Letter>> = vec![vec![]];
        while let Some(cur) = stack.pop() {
            if cur.len() == k {
                out.insert(prevention_block(rank, &cur)?.items);
                continue;
            }
            for &d in &dirs {
                if cur.iter().all(|c| c.generator() != d.generator()) {
                    let mut next = cur.clone();
                    next.push(d);
                    stack.push(next);
                }
            }
        }
        Ok(())
    };
    pick(3)?;
    if rank >= 4 {
        pick(4)?;
    }
    Ok(out)
}

/// Start index of the first cyclic occurrence of any prevention block.
pub fn find_prevention_block(seq: &NielsenSequence) -> Result<Option<usize>> {
    let blocks = all_prevention_blocks(seq.rank)?;
    let n = seq.len();
    for i in 0..n {
        for k in [6usize, 8] {
            if k > n {
                continue;
            }
            let window: Vec<NielsenAuto> = (0..k).map(|j| seq.items[(i + j) % n]).collect();
            if blocks.contains(&window) {
                return Ok(Some(i));
            }
        }
    }
    Ok(None)
}

const SEED_BEAM_WIDTH: usize = 48;

/// Searches for a seed sequence: cyclically admissible, starting with the
/// default prevention block, with M > 0 and Wh_L equal to Υ_r[x_q, y_q].
///
/// Beam search over successor extensions ranked by the number of taken turns,
/// then a shortest admissible path back to the first term. `budget` bounds the
/// number of successor evaluations.
pub fn find_seed_sequence(rank: usize, budget: usize) -> Result<NielsenSequence> {
    let block = default_prevention_block(rank)?;
    let first = block.items[0];
    let mut spent = 0usize;
    let mut beam = vec![(block.items.clone(), rose_map::sequence_taken_turns(&block.items))];
    loop {
        for (seq, turns) in &beam {
            let last = seq[seq.len() - 1];
            if !WhGraph::from_turns(rank, turns.iter().copied()).is_upsilon(last.x, last.y) {
                continue;
            }
            if let Some(tail) = shortest_closing_path(&last, &first) {
                let mut items = seq.clone();
                items.extend(tail);
                let s = NielsenSequence { items, rank };
                let m = Matrix::of_sequence(&s);
                let mut pw = m.clone();
                for k in 1..=4 {
                    if pw.is_positive() {
                        return Ok(s.power(k));
                    }
                    pw = pw.mul(&m);
                }
            }
        }
        let mut next: BTreeMap<(NielsenAuto, Vec<Turn>), Vec<NielsenAuto>> = BTreeMap::new();
        for (seq, turns) in &beam {
            for u in successors(&seq[seq.len() - 1]) {
                spent += 1;
                if spent > budget {
                    return Err(Error::SearchExhausted(budget));
                }
                let t2: Vec<Turn> = rose_map::extend_turns(turns, &u).into_iter().collect();
                next.entry((u, t2)).or_insert_with(|| {
                    let mut s = seq.clone();
                    s.push(u);
                    s
                });
            }
        }
        let mut cands: Vec<(Vec<NielsenAuto>, Vec<Turn>)> =
            next.into_iter().map(|((_, t), s)| (s, t)).collect();
        cands.sort_by(|a, b| b.1.len().cmp(&a.1.len()).then_with(|| a.0.cmp(&b.0)));
        cands.truncate(SEED_BEAM_WIDTH);
        beam = cands.into_iter().map(|(s, t)| (s, t.into_iter().collect())).collect();
    }
}

/// Shortest admissible path t_1..t_k after `from` with (t_k, to) admissible.
fn shortest_closing_path(from: &NielsenAuto, to: &NielsenAuto) -> Option<Vec<NielsenAuto>> {
    if admissible(from, to) {
        return Some(Vec::new());
    }
    let mut prev: BTreeMap<NielsenAuto, NielsenAuto> = BTreeMap::new();
    let mut queue = VecDeque::from([*from]);
    while let Some(cur) = queue.pop_front() {
        for u in successors(&cur) {
            if u == *from || prev.contains_key(&u) {
                continue;
            }
            prev.insert(u, cur);
            if admissible(&u, to) {
                let mut path = vec![u];
                let mut c = u;
                while let Some(&p) = prev.get(&c) {
                    if p == *from {
                        break;
                    }
                    path.push(p);
                    c = p;
                }
                path.reverse();
                return Some(path);
            }
            queue.push_back(u);
        }
    }
    None
}

const SEED_FIXTURE: &str = include_str!("../fixtures/seeds.txt");

/// Parses the seed fixture: one `rank: sequence` line per rank, `#` comments.
pub fn parse_seed_fixture(text: &str) -> Result<BTreeMap<usize, NielsenSequence>> {
    let mut out = BTreeMap::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (r, seq) = line
            .split_once(':')
            .ok_or_else(|| Error::Malformed(format!("fixture line without ':' {line:?}")))?;
        let r: usize = r
            .trim()
            .parse()
            .map_err(|_| Error::Malformed(format!("bad rank in {line:?}")))?;
        out.insert(r, NielsenSequence::parse(seq, r)?);
    }
    Ok(out)
}

pub fn format_seed_fixture(seeds: &BTreeMap<usize, NielsenSequence>) -> String {
    let mut s = String::from("# rank: seed sequence (innermost first)\n");
    for (r, seq) in seeds {
        s.push_str(&format!("{r}: {seq}\n"));
    }
    s
}

/// Default search budget used when the fixture has no entry for a rank.
pub const DEFAULT_SEED_BUDGET: usize = 2_000_000;

/// The seed sequence for `rank` from the bundled fixture, if present.
pub fn cached_seed(rank: usize) -> Option<NielsenSequence> {
    parse_seed_fixture(SEED_FIXTURE).ok()?.remove(&rank)
}

/// The cached seed sequence for `rank`, searched for if the fixture lacks it.
pub fn seed_sequence(rank: usize) -> Result<NielsenSequence> {
    match cached_seed(rank) {
        Some(s) => Ok(s),
        None => find_seed_sequence(rank, DEFAULT_SEED_BUDGET),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::free_group::{apply_nielsen, Word};

    fn l(s: &str) -> Letter {
        parse_letters(s).unwrap()[0]
    }

    fn t(s: &str, r: usize) -> NielsenAuto {
        NielsenAuto::parse(s, r).unwrap()
    }

    #[test]
    fn parse_and_display() {
        let th = t("[a1->a2a1]", 3);
        assert_eq!(th.x(), l("a1"));
        assert_eq!(th.y(), l("a2"));
        assert_eq!(th.to_string(), "[a1->a2a1]");
        assert!(NielsenAuto::parse("[a1->a1a1]", 3).is_err());
        assert!(NielsenAuto::parse("[a1->A1a1]", 3).is_err());
        assert!(NielsenAuto::parse("[a1->a1a2]", 3).is_err());
        assert!(NielsenAuto::parse("[a1->a4a1]", 3).is_err());
        let seq = NielsenSequence::parse("[a1->a2a1] [A3->a1A3]", 3).unwrap();
        assert_eq!(seq.len(), 2);
        assert_eq!(NielsenSequence::parse(&seq.to_string(), 3).unwrap(), seq);
    }

    #[test]
    fn apply_examples() {
        let th = t("[a1->a2a1]", 3);
        let ap = |s: &str| apply_nielsen(&th, &Word::parse(s, 3).unwrap()).unwrap().to_string();
        assert_eq!(ap("a1"), "a2 a1");
        assert_eq!(ap("A1"), "A1 A2");
        assert_eq!(ap("a3"), "a3");
        let back = apply_nielsen(&th.inverse(), &Word::parse("a2 a1", 3).unwrap()).unwrap();
        assert_eq!(back.to_string(), "a1");
    }

    #[test]
    fn enumerate_counts() {
        assert!(matches!(enumerate_s(1), Err(Error::InvalidRank(1))));
        assert_eq!(enumerate_s(2).unwrap().len(), 8);
        let s3 = enumerate_s(3).unwrap();
        assert_eq!(s3.len(), 24);
        assert!(s3.contains(&t("[a1->a2a1]", 3)));
        assert!(s3.windows(2).all(|p| p[0] < p[1]));
    }

    #[test]
    fn admissibility_examples() {
        let a = t("[a1->a2a1]", 3);
        assert!(is_admissible_pair(&a, &t("[a1->a3a1]", 3)).unwrap());
        assert!(!is_admissible_pair(&a, &t("[a1->A2a1]", 3)).unwrap());
        for th in enumerate_s(4).unwrap() {
            assert!(is_admissible_pair(&th, &th).unwrap());
            assert!(is_cyclically_admissible(&[th]).unwrap());
            assert!(is_cyclically_admissible(&[th, th]).unwrap());
        }
        assert!(is_admissible_pair(&a, &t("[a1->a2a1]", 4)).is_err());
        assert!(is_admissible(&[]).is_err());
    }

    #[test]
    fn successor_counts() {
        for r in 2..=6 {
            for th in enumerate_s(r).unwrap() {
                let s = successors(&th);
                assert_eq!(s.len(), 4 * r - 6);
                assert_eq!(predecessors(&th).len(), 4 * r - 6);
                assert!(s.contains(&th));
                let same_x = s.iter().filter(|u| u.x == th.x).count();
                let y_is_x = s.iter().filter(|u| u.y == th.x).count();
                assert_eq!(same_x + y_is_x, s.len());
            }
        }
    }

    #[test]
    fn prevention_block_r3() {
        let p = default_prevention_block(3).unwrap();
        let want = "[a1->a3a1] [A2->a1A2] [A2->A3A2] [a1->A2a1] [a1->a3a1] [a1->a2a1] [a1->a3a1] [a1->a3a1]";
        assert_eq!(p.to_string(), want);
        assert!(p.is_admissible().unwrap());
    }

    #[test]
    fn prevention_block_r4() {
        let p = default_prevention_block(4).unwrap();
        let want = "[a4->a1a4] [a2->a4a2] [A3->a2A3] [A3->a1A3] [A3->a2A3] [A3->a1A3]";
        assert_eq!(p.to_string(), want);
        assert!(p.is_admissible().unwrap());
        assert!(prevention_block(4, &[l("a1"), l("A1"), l("a2"), l("a3")]).is_err());
        assert!(prevention_block(3, &[l("a1"), l("a2"), l("a3"), l("a1")]).is_err());
    }

    #[test]
    fn all_blocks_are_admissible() {
        for r in 3..=4 {
            let blocks = all_prevention_blocks(r).unwrap();
            assert_eq!(blocks.len(), if r == 3 { 48 } else { 192 + 384 });
            for b in blocks {
                assert!(is_admissible(&b).unwrap());
            }
        }
    }

    #[test]
    fn rotation_and_block_search() {
        let p = default_prevention_block(3).unwrap();
        let pre = NielsenSequence::parse("[a1->a3a1] [a1->a3a1]", 3).unwrap();
        let s = pre.concat(&p).unwrap();
        assert_eq!(s.find_cyclic(p.items()), Some(2));
        assert!(s.rotate(2).starts_with(p.items()));
        assert_eq!(find_prevention_block(&s).unwrap(), Some(2));
        assert_eq!(find_prevention_block(&pre).unwrap(), None);
    }

    #[test]
    fn closing_path_reaches_predecessor() {
        let s = enumerate_s(3).unwrap();
        for a in &s {
            for b in &s {
                let path = shortest_closing_path(a, b).unwrap();
                let mut full = vec![*a];
                full.extend(path);
                full.push(*b);
                assert!(is_admissible(&full).unwrap());
            }
        }
    }
}
