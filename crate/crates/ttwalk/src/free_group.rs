//! Words in the free group F_r over the basis a1..ar.
//!
//! Text format: `a3` is the generator a_3, `A3` its inverse. Letters may be
//! separated by whitespace or written back to back (`a2a1`). The identity is
//! the empty string or `1`.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{check_rank, Error, Result};
use crate::nielsen::NielsenAuto;

/// A basis letter a_i^{±1}, stored as the signed integer ±i.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Letter(i32);

impl Letter {
    pub fn new(generator: usize, inverse: bool) -> Letter {
        assert!(generator >= 1, "generators are numbered from 1");
        let g = generator as i32;
        Letter(if inverse { -g } else { g })
    }

    pub fn from_signed(v: i32) -> Result<Letter> {
        if v == 0 {
            return Err(Error::Malformed("letter 0".into()));
        }
        Ok(Letter(v))
    }

    pub fn signed(self) -> i32 {
        self.0
    }

    pub fn generator(self) -> usize {
        self.0.unsigned_abs() as usize
    }

    pub fn is_inverse(self) -> bool {
        self.0 < 0
    }

    pub fn inverse(self) -> Letter {
        Letter(-self.0)
    }

    /// Position in the direction order a1, A1, a2, A2, ...
    pub fn index(self) -> usize {
        2 * (self.generator() - 1) + usize::from(self.is_inverse())
    }

    pub fn from_index(i: usize) -> Letter {
        Letter::new(i / 2 + 1, i % 2 == 1)
    }

    pub fn check(self, rank: usize) -> Result<()> {
        if self.generator() > rank {
            Err(Error::Malformed(format!("letter {self} outside rank {rank}")))
        } else {
            Ok(())
        }
    }
}

impl Ord for Letter {
    fn cmp(&self, other: &Self) -> Ordering {
        self.index().cmp(&other.index())
    }
}

impl PartialOrd for Letter {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = if self.is_inverse() { 'A' } else { 'a' };
        write!(f, "{}{}", c, self.generator())
    }
}

/// All 2r directions in index order.
pub fn directions(rank: usize) -> Vec<Letter> {
    (0..2 * rank).map(Letter::from_index).collect()
}

/// Parses a run of letters such as `a1 A2` or `a2a1` without a rank check.
pub fn parse_letters(s: &str) -> Result<Vec<Letter>> {
    let t = s.trim();
    if t.is_empty() || t == "1" {
        return Ok(Vec::new());
    }
    let bytes = t.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let inverse = match c {
            b'a' => false,
            b'A' => true,
            _ => return Err(Error::Malformed(format!("unexpected '{}' in word {s:?}", c as char))),
        };
        let start = i + 1;
        let mut end = start;
        while end < bytes.len() && bytes[end].is_ascii_digit() {
            end += 1;
        }
        if end == start {
            return Err(Error::Malformed(format!("letter without index in {s:?}")));
        }
        let g: usize = t[start..end]
            .parse()
            .map_err(|_| Error::Malformed(format!("bad index in {s:?}")))?;
        if g == 0 || g > i32::MAX as usize {
            return Err(Error::Malformed(format!("generator index {g} in {s:?}")));
        }
        out.push(Letter::new(g, inverse));
        i = end;
    }
    Ok(out)
}

pub fn format_letters(letters: &[Letter], sep: &str) -> String {
    if letters.is_empty() {
        return "1".to_string();
    }
    letters.iter().map(|l| l.to_string()).collect::<Vec<_>>().join(sep)
}

/// A freely reduced word carrying its ambient rank.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub struct Word {
    letters: Vec<Letter>,
    rank: usize,
}

impl Word {
    pub fn identity(rank: usize) -> Word {
        Word { letters: Vec::new(), rank }
    }

    pub fn reduce(raw: &[Letter], rank: usize) -> Result<Word> {
        let mut stack: Vec<Letter> = Vec::with_capacity(raw.len());
        for &l in raw {
            l.check(rank)?;
            if stack.last() == Some(&l.inverse()) {
                stack.pop();
            } else {
                stack.push(l);
            }
        }
        Ok(Word { letters: stack, rank })
    }

    pub fn parse(s: &str, rank: usize) -> Result<Word> {
        Word::reduce(&parse_letters(s)?, rank)
    }

    /// Wraps letters that are already known to be reduced.
    pub(crate) fn from_reduced(letters: Vec<Letter>, rank: usize) -> Word {
        debug_assert!(letters.windows(2).all(|p| p[0] != p[1].inverse()));
        Word { letters, rank }
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn into_letters(self) -> Vec<Letter> {
        self.letters
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn inverse(&self) -> Word {
        let letters = self.letters.iter().rev().map(|l| l.inverse()).collect();
        Word { letters, rank: self.rank }
    }

    pub fn concat(&self, other: &Word) -> Result<Word> {
        check_rank(self.rank, other.rank)?;
        let mut raw = self.letters.clone();
        raw.extend_from_slice(&other.letters);
        Word::reduce(&raw, self.rank)
    }

    /// Shortest word in the conjugacy class; its length is ||w||_A.
    pub fn cyclic_reduce(&self) -> Word {
        let l = &self.letters;
        let (mut i, mut j) = (0, l.len());
        while j - i >= 2 && l[i] == l[j - 1].inverse() {
            i += 1;
            j -= 1;
        }
        Word { letters: l[i..j].to_vec(), rank: self.rank }
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_letters(&self.letters, " "))
    }
}

/// θ(w): letterwise substitution followed by free reduction.
pub fn apply_nielsen(theta: &NielsenAuto, w: &Word) -> Result<Word> {
    check_rank(theta.rank(), w.rank())?;
    let mut raw = Vec::with_capacity(w.len() + 4);
    for &l in w.letters() {
        raw.extend_from_slice(&theta.image(l));
    }
    Word::reduce(&raw, w.rank())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn w(s: &str) -> Word {
        Word::parse(s, 3).unwrap()
    }

    fn naive_reduce(raw: &[Letter]) -> Vec<Letter> {
        let mut v = raw.to_vec();
        loop {
            let pos = v.windows(2).position(|p| p[0] == p[1].inverse());
            match pos {
                Some(i) => {
                    v.drain(i..i + 2);
                }
                None => return v,
            }
        }
    }

    #[test]
    fn reduce_examples() {
        assert!(w("a1 A1").is_empty());
        assert_eq!(w("a1 a2 A2 a1"), w("a1 a1"));
        assert_eq!(w("a1 A2 a2 A1 a3"), w("a3"));
    }

    #[test]
    fn reduce_rejects_out_of_range() {
        assert!(matches!(Word::parse("a4", 3), Err(Error::Malformed(_))));
        assert!(parse_letters("b1").is_err());
        assert!(parse_letters("a").is_err());
        assert!(parse_letters("a0").is_err());
    }

    #[test]
    fn parse_forms() {
        assert_eq!(w("a2a1"), w("a2 a1"));
        assert_eq!(w("1"), Word::identity(3));
        let long = parse_letters("a10A3").unwrap();
        assert_eq!(long, vec![Letter::new(10, false), Letter::new(3, true)]);
    }

    #[test]
    fn cyclic_reduce_examples() {
        assert_eq!(w("a1 a2 A1").cyclic_reduce(), w("a2"));
        assert!(Word::identity(3).cyclic_reduce().is_empty());
        assert_eq!(w("A1 a2 a3 a2 a1").cyclic_reduce(), w("a2 a3 a2"));
    }

    #[test]
    fn display_round_trip() {
        let x = w("a1 A2 a3 A3 a3");
        assert_eq!(x.to_string(), "a1 A2 a3");
        assert_eq!(Word::parse(&x.to_string(), 3).unwrap(), x);
    }

    #[test]
    fn stack_matches_pair_deletion_exhaustively() {
        let alphabet = directions(2);
        for len in 0..=8u32 {
            for code in 0..4usize.pow(len) {
                let mut c = code;
                let raw: Vec<Letter> = (0..len)
                    .map(|_| {
                        let l = alphabet[c % 4];
                        c /= 4;
                        l
                    })
                    .collect();
                assert_eq!(Word::reduce(&raw, 2).unwrap().letters(), &naive_reduce(&raw)[..]);
            }
        }
    }

    fn arb_raw(rank: usize, max: usize) -> impl Strategy<Value = Vec<Letter>> {
        proptest::collection::vec(0..2 * rank, 0..=max).prop_map(|v| v.into_iter().map(Letter::from_index).collect())
    }

    fn arb_word(rank: usize) -> impl Strategy<Value = Word> {
        arb_raw(rank, 30).prop_map(move |v| Word::reduce(&v, rank).unwrap())
    }

    proptest! {
        #[test]
        fn reduce_is_idempotent_and_shortening(r in 2usize..=4, raw in arb_raw(4, 20)) {
            let raw: Vec<Letter> = raw.into_iter().filter(|l| l.generator() <= r).collect();
            let w = Word::reduce(&raw, r).unwrap();
            prop_assert!(w.len() <= raw.len());
            prop_assert_eq!(Word::reduce(w.letters(), r).unwrap(), w.clone());
            prop_assert_eq!(w.letters(), &naive_reduce(&raw)[..]);
        }

        #[test]
        fn nielsen_inverse_undoes(i in 0usize..24, w in arb_word(3)) {
            let t = crate::nielsen::enumerate_s(3).unwrap()[i];
            let back = apply_nielsen(&t.inverse(), &apply_nielsen(&t, &w).unwrap()).unwrap();
            prop_assert_eq!(back, w);
        }

        #[test]
        fn nielsen_is_multiplicative(i in 0usize..24, u in arb_word(3), v in arb_word(3)) {
            let t = crate::nielsen::enumerate_s(3).unwrap()[i];
            let lhs = apply_nielsen(&t, &u.concat(&v).unwrap()).unwrap();
            let rhs = apply_nielsen(&t, &u).unwrap().concat(&apply_nielsen(&t, &v).unwrap()).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn cyclic_length_is_rotation_invariant(w in arb_word(3), k in 0usize..40) {
            let c = w.cyclic_reduce();
            if !c.is_empty() {
                let mut rot = c.letters().to_vec();
                let n = rot.len();
                rot.rotate_left(k % n);
                let rw = Word::reduce(&rot, 3).unwrap();
                prop_assert_eq!(rw.cyclic_reduce().len(), c.len());
            }
            let mut raw = w.letters().to_vec();
            if !raw.is_empty() {
                let n = raw.len();
                raw.rotate_left(k % n);
            }
            prop_assert_eq!(Word::reduce(&raw, 3).unwrap().cyclic_reduce().len(), c.len());
        }
    }

    #[test]
    fn letter_order_and_index() {
        let d = directions(3);
        assert_eq!(format_letters(&d, " "), "a1 A1 a2 A2 a3 A3");
        for (i, l) in d.iter().enumerate() {
            assert_eq!(l.index(), i);
            assert_eq!(l.inverse().inverse(), *l);
            assert_ne!(l.inverse(), *l);
        }
    }
}
