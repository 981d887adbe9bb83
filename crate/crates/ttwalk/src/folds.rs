//! Stallings folds on the rose: homotopy equivalence test, fold
//! decomposition of maps with at most one foldable turn, and realization of
//! powers of one-illegal-turn train track maps as admissible compositions.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use num_integer::Integer;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::free_group::{directions, Letter, Word};
use crate::nielsen::{NielsenAuto, NielsenSequence};
use crate::rose_map::{RoseMap, Turn};

/// Ψ(a_i) = a_{σ(i)}^{ε_i}.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct PermAuto {
    // images of a1..ar
    img: Vec<Letter>,
}

impl PermAuto {
    pub fn identity(rank: usize) -> PermAuto {
        PermAuto { img: (1..=rank).map(|g| Letter::new(g, false)).collect() }
    }

    /// `sigma` is 1-based; `inverted[i]` flips the sign of a_{σ(i)}.
    pub fn new(sigma: &[usize], inverted: &[bool]) -> Result<PermAuto> {
        let r = sigma.len();
        if inverted.len() != r {
            return Err(Error::Malformed("sign list has the wrong length".into()));
        }
        let mut seen = vec![false; r + 1];
        for &s in sigma {
            if s == 0 || s > r || std::mem::replace(&mut seen[s], true) {
                return Err(Error::Malformed(format!("{sigma:?} is not a permutation")));
            }
        }
        Ok(PermAuto { img: sigma.iter().zip(inverted).map(|(&s, &e)| Letter::new(s, e)).collect() })
    }

    pub fn rank(&self) -> usize {
        self.img.len()
    }

    pub fn apply(&self, d: Letter) -> Letter {
        let l = self.img[d.generator() - 1];
        if d.is_inverse() {
            l.inverse()
        } else {
            l
        }
    }

    pub fn is_identity(&self) -> bool {
        *self == PermAuto::identity(self.rank())
    }

    /// `outer ∘ self`.
    pub fn then(&self, outer: &PermAuto) -> PermAuto {
        PermAuto { img: self.img.iter().map(|&l| outer.apply(l)).collect() }
    }

    /// Order in Aut(F_r): a cycle of length ℓ has order ℓ, or 2ℓ when an odd
    /// number of its letters are inverted.
    pub fn order(&self) -> usize {
        let r = self.rank();
        let mut seen = vec![false; r];
        let mut ord = 1usize;
        for start in 0..r {
            if seen[start] {
                continue;
            }
            let (mut len, mut flips, mut i) = (0, 0, start);
            while !seen[i] {
                seen[i] = true;
                len += 1;
                flips += usize::from(self.img[i].is_inverse());
                i = self.img[i].generator() - 1;
            }
            let o = if flips % 2 == 1 { 2 * len } else { len };
            ord = ord.lcm(&o);
        }
        ord
    }

    pub fn to_rose_map(&self) -> RoseMap {
        let r = self.rank();
        RoseMap::new(self.img.iter().map(|&l| Word::from_reduced(vec![l], r)).collect())
            .expect("permutation images are single letters")
    }
}

impl fmt::Display for PermAuto {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.img.iter().enumerate().map(|(i, l)| format!("a{}->{}", i + 1, l)).collect();
        write!(f, "{}", parts.join(" "))
    }
}

impl Serialize for PermAuto {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// f = g_Ψ ∘ g_{θ_m} ∘ ... ∘ g_{θ_1}.
#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct FoldDecomposition {
    pub nielsen_part: Vec<NielsenAuto>,
    pub perm_part: PermAuto,
}

impl FoldDecomposition {
    pub fn recompose(&self) -> Result<RoseMap> {
        let mut f = RoseMap::identity(self.perm_part.rank());
        for t in &self.nielsen_part {
            f = RoseMap::compose(&RoseMap::from_nielsen(t), &f)?;
        }
        RoseMap::compose(&self.perm_part.to_rose_map(), &f)
    }
}

/// Nondegenerate turns that Df sends to degenerate ones.
pub fn foldable_turns(f: &RoseMap) -> Result<BTreeSet<Turn>> {
    let d = f.derivative()?;
    let dirs = directions(f.rank());
    let mut out = BTreeSet::new();
    for (i, &a) in dirs.iter().enumerate() {
        for &b in &dirs[i + 1..] {
            if d.apply(a) == d.apply(b) {
                out.insert(Turn::new(a, b));
            }
        }
    }
    Ok(out)
}

fn set_image(images: &mut [Vec<Letter>], d: Letter, w: Vec<Letter>) {
    images[d.generator() - 1] = if d.is_inverse() { w.iter().rev().map(|l| l.inverse()).collect() } else { w };
}

fn image_of(images: &[Vec<Letter>], d: Letter) -> Vec<Letter> {
    let w = &images[d.generator() - 1];
    if d.is_inverse() {
        w.iter().rev().map(|l| l.inverse()).collect()
    } else {
        w.clone()
    }
}

/// Peels proper full folds off the inner side until a graph isomorphism is
/// left. Each peel removes f(y) from the front of f(x), writing f = h ∘ g_θ
/// with θ = [x ↦ yx] and c(h) < c(f).
pub fn fold_decomposition(f: &RoseMap) -> Result<FoldDecomposition> {
    if !f.is_regular() {
        return Err(Error::Precondition("map is not regular".into()));
    }
    let r = f.rank();
    let mut images: Vec<Vec<Letter>> = f.images().iter().map(|w| w.letters().to_vec()).collect();
    let mut peeled = Vec::new();
    loop {
        let h = RoseMap::new(images.iter().map(|w| Word::from_reduced(w.clone(), r)).collect())?;
        let turns = foldable_turns(&h)?;
        if turns.len() > 1 {
            return Err(Error::Precondition(format!("{} foldable turns", turns.len())));
        }
        let Some(turn) = turns.into_iter().next() else {
            break;
        };
        let (a, b) = (turn.d1(), turn.d2());
        if a.generator() == b.generator() {
            return Err(Error::FoldContradiction(format!("turn {turn} folds an edge onto itself")));
        }
        let (ia, ib) = (image_of(&images, a), image_of(&images, b));
        let (x, y, ix, iy) = if ib.len() < ia.len() && ia.starts_with(&ib) {
            (a, b, ia, ib)
        } else if ia.len() < ib.len() && ib.starts_with(&ia) {
            (b, a, ib, ia)
        } else {
            return Err(Error::FoldContradiction(format!("partial fold at turn {turn}")));
        };
        set_image(&mut images, x, ix[iy.len()..].to_vec());
        peeled.push(NielsenAuto::new(x, y, r)?);
    }
    let mut sigma = Vec::with_capacity(r);
    let mut inverted = Vec::with_capacity(r);
    for w in &images {
        if w.len() != 1 {
            return Err(Error::FoldContradiction("no foldable turn but the map is not an isomorphism".into()));
        }
        sigma.push(w[0].generator());
        inverted.push(w[0].is_inverse());
    }
    let perm = PermAuto::new(&sigma, &inverted).map_err(|_| Error::FoldContradiction("remainder is not a bijection".into()))?;
    Ok(FoldDecomposition { nielsen_part: peeled, perm_part: perm })
}

/// θ' = [Ψ(x) ↦ Ψ(y)Ψ(x)], so that g_Ψ ∘ g_θ = g_θ' ∘ g_Ψ.
pub fn conjugate_by_perm(psi: &PermAuto, t: &NielsenAuto) -> NielsenAuto {
    NielsenAuto::new(psi.apply(t.x()), psi.apply(t.y()), t.rank()).expect("Ψ preserves distinct generators")
}

/// For f = g_Ψ ∘ T with Ψ of order p, returns p and a cyclically admissible
/// sequence whose composition is f^p. Since Ψ ∘ T = T^Ψ ∘ Ψ,
/// f^p = T^Ψ ∘ T^{Ψ²} ∘ ... ∘ T^{Ψ^p}, innermost factor T.
pub fn realize_power(f: &RoseMap) -> Result<(usize, NielsenSequence)> {
    if !f.is_train_track(2 * f.rank())? {
        return Err(Error::Precondition("map is not a train track map".into()));
    }
    let n = f.illegal_turns()?.len();
    if n != 1 {
        return Err(Error::Precondition(format!("expected one illegal turn, found {n}")));
    }
    let dec = fold_decomposition(f)?;
    if dec.nielsen_part.is_empty() {
        return Err(Error::Precondition("map is a graph isomorphism".into()));
    }
    let p = dec.perm_part.order();
    let mut items = Vec::with_capacity(p * dec.nielsen_part.len());
    let mut powers = vec![PermAuto::identity(f.rank())];
    for _ in 1..p {
        let last = powers.last().unwrap().then(&dec.perm_part);
        powers.push(last);
    }
    // Ψ^p = identity, then Ψ^{p-1}, ..., Ψ^1
    for j in (1..=p).rev() {
        let psi_j = &powers[j % p];
        items.extend(dec.nielsen_part.iter().map(|t| conjugate_by_perm(psi_j, t)));
    }
    let seq = NielsenSequence::new(items, f.rank())?;
    if !seq.is_cyclically_admissible()? {
        return Err(Error::FoldContradiction("realized sequence is not cyclically admissible".into()));
    }
    Ok((p, seq))
}

/// Stallings folding of the wedge of the edge images: f is a homotopy
/// equivalence iff the images generate F_r, i.e. everything folds to the
/// rose itself.
pub fn is_homotopy_equivalence(f: &RoseMap) -> bool {
    let r = f.rank();
    let mut g = Folder::default();
    let base = g.vertex();
    for w in f.images() {
        let mut cur = base;
        let n = w.len();
        for (i, &l) in w.letters().iter().enumerate() {
            let next = if i + 1 == n { base } else { g.vertex() };
            g.edge(cur, l, next);
            cur = next;
        }
    }
    g.fold();
    let root = g.find(base);
    let roots: BTreeSet<usize> = (0..g.parent.len()).map(|v| g.find(v)).collect();
    roots.len() == 1 && g.out[root].len() == 2 * r
}

#[derive(Default)]
struct Folder {
    parent: Vec<usize>,
    out: Vec<HashMap<i32, usize>>,
    pending: Vec<(usize, usize)>,
}

impl Folder {
    fn vertex(&mut self) -> usize {
        self.parent.push(self.parent.len());
        self.out.push(HashMap::new());
        self.parent.len() - 1
    }

    fn find(&mut self, v: usize) -> usize {
        let mut r = v;
        while self.parent[r] != r {
            r = self.parent[r];
        }
        let mut v = v;
        while self.parent[v] != r {
            let next = self.parent[v];
            self.parent[v] = r;
            v = next;
        }
        r
    }

    fn half_edge(&mut self, u: usize, label: i32, v: usize) {
        match self.out[u].get(&label) {
            Some(&w) => self.pending.push((w, v)),
            None => {
                self.out[u].insert(label, v);
            }
        }
    }

    fn edge(&mut self, u: usize, l: Letter, v: usize) {
        self.half_edge(u, l.signed(), v);
        self.half_edge(v, -l.signed(), u);
    }

    fn fold(&mut self) {
        while let Some((a, b)) = self.pending.pop() {
            let (a, b) = (self.find(a), self.find(b));
            if a == b {
                continue;
            }
            let (big, small) = if self.out[a].len() >= self.out[b].len() { (a, b) } else { (b, a) };
            self.parent[small] = big;
            let moved = std::mem::take(&mut self.out[small]);
            for (label, t) in moved {
                self.half_edge(big, label, t);
            }
        }
    }
}
