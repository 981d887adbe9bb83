//! Lazily evaluated compositions of rose maps.
//!
//! Images of long compositions are astronomically long, but every query the
//! INP search needs (length of an image, the letter at a position, the first
//! place two images differ) can be answered by walking down the factors.

use std::cmp::Ordering;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use super::{DirectionMap, RoseMap};
use crate::error::{check_rank, Error, Result};
use crate::free_group::{directions, Letter};
use crate::nielsen::{NielsenAuto, NielsenSequence};

/// A letterwise substitution on directions whose images are reduced and
/// compose without cancellation.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Substitution {
    rank: usize,
    img: Vec<Vec<Letter>>,
}

impl Substitution {
    pub fn from_nielsen(t: &NielsenAuto) -> Substitution {
        let img = directions(t.rank()).into_iter().map(|d| t.image(d)).collect();
        Substitution { rank: t.rank(), img }
    }

    pub fn from_rose_map(f: &RoseMap) -> Result<Substitution> {
        if !f.is_regular() {
            return Err(Error::Precondition("map is not regular".into()));
        }
        let img = directions(f.rank()).into_iter().map(|d| f.image(d)).collect();
        Ok(Substitution { rank: f.rank(), img })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn image(&self, d: Letter) -> &[Letter] {
        &self.img[d.index()]
    }
}

/// Result of comparing the images of two paths letter by letter.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Divergence {
    /// The images agree on `common` letters and then read `left` and `right`.
    At { common: BigUint, left: Letter, right: Letter },
    /// The left image is a proper prefix of the right one.
    LeftPrefix { common: BigUint },
    /// The right image is a proper prefix of the left one.
    RightPrefix { common: BigUint },
    Equal,
}

/// g = s_{n-1} ∘ ... ∘ s_0 stored by its factors, innermost first.
#[derive(Clone, Debug)]
pub struct FactoredMap {
    rank: usize,
    factors: Vec<Substitution>,
    // lens[k][d] = |s_{n-1} ∘ ... ∘ s_k (d)|
    lens: Vec<Vec<BigUint>>,
    // firsts[k][d] = first letter of s_{n-1} ∘ ... ∘ s_k (d)
    firsts: Vec<Vec<Letter>>,
}

impl FactoredMap {
    pub fn new(rank: usize, factors: Vec<Substitution>) -> Result<FactoredMap> {
        if factors.is_empty() {
            return Err(Error::Precondition("no factors".into()));
        }
        for s in &factors {
            check_rank(rank, s.rank)?;
        }
        let n = factors.len();
        let dirs = directions(rank);
        let mut lens = vec![vec![BigUint::one(); 2 * rank]; n + 1];
        let mut firsts = vec![dirs.clone(); n + 1];
        for k in (0..n).rev() {
            for &d in &dirs {
                let img = factors[k].image(d);
                let mut total = BigUint::zero();
                for m in img {
                    total += &lens[k + 1][m.index()];
                }
                lens[k][d.index()] = total;
                firsts[k][d.index()] = firsts[k + 1][img[0].index()];
            }
        }
        Ok(FactoredMap { rank, factors, lens, firsts })
    }

    pub fn from_sequence(seq: &NielsenSequence) -> Result<FactoredMap> {
        FactoredMap::new(seq.rank(), seq.items().iter().map(Substitution::from_nielsen).collect())
    }

    pub fn from_rose_map(f: &RoseMap) -> Result<FactoredMap> {
        FactoredMap::new(f.rank(), vec![Substitution::from_rose_map(f)?])
    }

    /// The k-th iterate, sharing factors.
    pub fn power(&self, k: usize) -> Result<FactoredMap> {
        let mut factors = Vec::with_capacity(self.factors.len() * k);
        for _ in 0..k {
            factors.extend(self.factors.iter().cloned());
        }
        FactoredMap::new(self.rank, factors)
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn depth(&self) -> usize {
        self.factors.len()
    }

    pub fn derivative(&self) -> DirectionMap {
        DirectionMap::from_images(self.firsts[0].clone())
    }

    pub fn edge_len(&self, d: Letter) -> &BigUint {
        &self.lens[0][d.index()]
    }

    pub fn image_len(&self, path: &[Letter]) -> BigUint {
        path.iter().map(|d| &self.lens[0][d.index()]).sum()
    }

    /// Letter at 0-based position `pos` of the image of `path`.
    pub fn letter_at(&self, path: &[Letter], pos: &BigUint) -> Option<Letter> {
        let mut pos = pos.clone();
        let mut cur = None;
        for &d in path {
            let l = &self.lens[0][d.index()];
            if pos < *l {
                cur = Some(d);
                break;
            }
            pos -= l;
        }
        let mut d = cur?;
        for k in 0..self.factors.len() {
            for &m in self.factors[k].image(d) {
                let l = &self.lens[k + 1][m.index()];
                if pos < *l {
                    d = m;
                    break;
                }
                pos -= l;
            }
        }
        Some(d)
    }

    /// Explicit image of `path`; only for short images.
    pub fn expand(&self, path: &[Letter], cap: usize) -> Result<Vec<Letter>> {
        let total = self.image_len(path);
        if total > BigUint::from(cap) {
            return Err(Error::CapExceeded(cap));
        }
        let mut out = Vec::new();
        let mut stack: Vec<(usize, Letter)> = path.iter().rev().map(|&d| (0, d)).collect();
        while let Some((k, d)) = stack.pop() {
            if k == self.factors.len() {
                out.push(d);
            } else {
                stack.extend(self.factors[k].image(d).iter().rev().map(|&m| (k + 1, m)));
            }
        }
        Ok(out)
    }

    /// Compares the images of `u` and `w` without expanding either.
    pub fn divergence(&self, u: &[Letter], w: &[Letter]) -> Divergence {
        let n = self.factors.len();
        let mut su: Vec<(usize, Letter)> = u.iter().rev().map(|&d| (0, d)).collect();
        let mut sw: Vec<(usize, Letter)> = w.iter().rev().map(|&d| (0, d)).collect();
        let mut common = BigUint::zero();
        loop {
            let (a, b) = match (su.last().copied(), sw.last().copied()) {
                (None, None) => return Divergence::Equal,
                (None, Some(_)) => return Divergence::LeftPrefix { common },
                (Some(_), None) => return Divergence::RightPrefix { common },
                (Some(a), Some(b)) => (a, b),
            };
            match a.0.cmp(&b.0) {
                Ordering::Equal => {
                    let k = a.0;
                    if a.1 == b.1 {
                        common += &self.lens[k][a.1.index()];
                        su.pop();
                        sw.pop();
                    } else if k == n {
                        return Divergence::At { common, left: a.1, right: b.1 };
                    } else {
                        let (fa, fb) = (self.firsts[k][a.1.index()], self.firsts[k][b.1.index()]);
                        if fa != fb {
                            return Divergence::At { common, left: fa, right: fb };
                        }
                        su.pop();
                        sw.pop();
                        su.extend(self.factors[k].image(a.1).iter().rev().map(|&m| (k + 1, m)));
                        sw.extend(self.factors[k].image(b.1).iter().rev().map(|&m| (k + 1, m)));
                    }
                }
                Ordering::Less => {
                    su.pop();
                    su.extend(self.factors[a.0].image(a.1).iter().rev().map(|&m| (a.0 + 1, m)));
                }
                Ordering::Greater => {
                    sw.pop();
                    sw.extend(self.factors[b.0].image(b.1).iter().rev().map(|&m| (b.0 + 1, m)));
                }
            }
        }
    }
}
