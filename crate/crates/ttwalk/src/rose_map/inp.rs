//! Bounded search for indivisible Nielsen paths of one-illegal-turn train
//! track maps on the rose.
//!
//! An INP has the form ρ1⁻¹ρ2 with ρ1, ρ2 legal and the turn between them the
//! unique illegal turn {d1, d2}. Writing c for the number of letters that
//! cancel in f(ρ1)⁻¹f(ρ2), the path is Nielsen iff f(ρi) = γ·ρi with |γ| = c
//! for both i, up to a fixed point inside the last edge. The search grows
//! both paths edge by edge and prunes as soon as the images disagree.

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::Serialize;

use super::lazy::{Divergence, FactoredMap};
use super::{RoseMap, Turn};
use crate::error::{Error, Result};
use crate::free_group::{directions, format_letters, Letter};

pub const DEFAULT_INP_CAP: usize = 64;
const NODE_BUDGET: usize = 200_000;

/// Where a side of an INP stops inside its last edge.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum PathEnd {
    Vertex,
    /// The unique interior fixed point, at parameter numer/denom along the edge.
    Interior { numer: BigUint, denom: BigUint },
}

impl Serialize for PathEnd {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            PathEnd::Vertex => s.serialize_str("vertex"),
            PathEnd::Interior { numer, denom } => s.collect_str(&format_args!("{numer}/{denom}")),
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Inp {
    pub period: usize,
    pub rho1: Vec<Letter>,
    pub rho2: Vec<Letter>,
    pub end1: PathEnd,
    pub end2: PathEnd,
    /// Number of letters that cancel in f^period(ρ1)⁻¹ f^period(ρ2).
    pub cancelled: BigUint,
}

impl Serialize for Inp {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("Inp", 6)?;
        st.serialize_field("period", &self.period)?;
        st.serialize_field("rho1", &format_letters(&self.rho1, " "))?;
        st.serialize_field("rho2", &format_letters(&self.rho2, " "))?;
        st.serialize_field("end1", &self.end1)?;
        st.serialize_field("end2", &self.end2)?;
        st.serialize_field("cancelled", &self.cancelled.to_string())?;
        st.end()
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum InpSearch {
    Found(Inp),
    NoInp,
    Inconclusive,
}

enum Side {
    Dead,
    Open,
    Closed,
}

fn side_status(fm: &FactoredMap, p: &[Letter], c: &BigUint) -> Side {
    let len = fm.image_len(p);
    let k = p.len();
    for (j, &want) in p.iter().enumerate() {
        let pos = c + BigUint::from(j);
        if pos >= len {
            return Side::Open;
        }
        if fm.letter_at(p, &pos) != Some(want) {
            return Side::Dead;
        }
    }
    debug_assert!(len >= c + BigUint::from(k));
    Side::Closed
}

fn path_end(fm: &FactoredMap, p: &[Letter], c: &BigUint) -> PathEnd {
    let k = p.len();
    let m = fm.image_len(&p[..k - 1]);
    let n = fm.edge_len(p[k - 1]);
    let numer = BigUint::from(k - 1) + c - m;
    let denom = n - BigUint::one();
    if numer == denom {
        PathEnd::Vertex
    } else {
        PathEnd::Interior { numer, denom }
    }
}

fn legal_extensions(p: &[Letter], illegal: &Turn, rank: usize) -> Vec<Vec<Letter>> {
    let last = p[p.len() - 1];
    directions(rank)
        .into_iter()
        .filter(|&e| e != last.inverse() && Turn::new(last.inverse(), e) != *illegal)
        .map(|e| {
            let mut q = p.to_vec();
            q.push(e);
            q
        })
        .collect()
}

/// Searches for an INP of the map represented by `fm`. `fm` must be an
/// expanding train track map with exactly one nondegenerate illegal turn;
/// only the latter is checked here.
pub fn search_inp(fm: &FactoredMap, step_cap: usize, period: usize) -> Result<InpSearch> {
    let illegal = fm.derivative().illegal_turns();
    if illegal.len() != 1 {
        return Err(Error::Precondition(format!(
            "expected one illegal turn, found {}",
            illegal.len()
        )));
    }
    let turn = *illegal.iter().next().unwrap();
    let (d1, d2) = (turn.d1(), turn.d2());
    let rank = fm.rank();
    let mut stack = vec![(vec![d1], vec![d2])];
    let mut nodes = 0usize;
    let mut capped = false;
    while let Some((p1, p2)) = stack.pop() {
        nodes += 1;
        if nodes > NODE_BUDGET {
            return Ok(InpSearch::Inconclusive);
        }
        let grow_left = match fm.divergence(&p1, &p2) {
            Divergence::Equal => continue,
            Divergence::LeftPrefix { .. } => true,
            Divergence::RightPrefix { .. } => false,
            Divergence::At { common, left, right } => {
                if (left, right) != (d1, d2) {
                    continue;
                }
                let s1 = side_status(fm, &p1, &common);
                let s2 = side_status(fm, &p2, &common);
                match (s1, s2) {
                    (Side::Dead, _) | (_, Side::Dead) => continue,
                    (Side::Closed, Side::Closed) => {
                        let inp = Inp {
                            period,
                            end1: path_end(fm, &p1, &common),
                            end2: path_end(fm, &p2, &common),
                            rho1: p1,
                            rho2: p2,
                            cancelled: common,
                        };
                        return Ok(InpSearch::Found(inp));
                    }
                    (Side::Open, _) => true,
                    (Side::Closed, Side::Open) => false,
                }
            }
        };
        if p1.len() + p2.len() - 2 >= step_cap {
            capped = true;
            continue;
        }
        let children = if grow_left {
            legal_extensions(&p1, &turn, rank).into_iter().map(|q| (q, p2.clone())).collect::<Vec<_>>()
        } else {
            legal_extensions(&p2, &turn, rank).into_iter().map(|q| (p1.clone(), q)).collect()
        };
        stack.extend(children.into_iter().rev());
    }
    Ok(if capped { InpSearch::Inconclusive } else { InpSearch::NoInp })
}

/// Searches f^p for p = 1..=period_cap; returns the first INP found. The
/// result is NoInp only if every period is ruled out.
pub fn search_pinp(fm: &FactoredMap, step_cap: usize, period_cap: usize) -> Result<InpSearch> {
    let mut inconclusive = false;
    for p in 1..=period_cap {
        let fp = if p == 1 { fm.clone() } else { fm.power(p)? };
        match search_inp(&fp, step_cap, p)? {
            InpSearch::Found(inp) => return Ok(InpSearch::Found(inp)),
            InpSearch::Inconclusive => inconclusive = true,
            InpSearch::NoInp => {}
        }
    }
    Ok(if inconclusive { InpSearch::Inconclusive } else { InpSearch::NoInp })
}

/// Bounded search for a periodic INP of an explicit map, over periods 1 and 2.
pub fn find_inp(f: &RoseMap, step_cap: usize) -> Result<InpSearch> {
    find_pinp(f, step_cap, 2)
}

pub fn find_pinp(f: &RoseMap, step_cap: usize, period_cap: usize) -> Result<InpSearch> {
    if !f.is_train_track(2 * f.rank())? {
        return Err(Error::Precondition("map is not a train track map".into()));
    }
    let n = f.illegal_turns()?.len();
    if n != 1 {
        return Err(Error::Precondition(format!("expected one illegal turn, found {n}")));
    }
    if f.transition_matrix() == crate::spectral::Matrix::identity(f.rank()) || f.complexity() == f.rank() {
        return Err(Error::Precondition("map is not expanding".into()));
    }
    search_pinp(&FactoredMap::from_rose_map(f)?, step_cap, period_cap)
}

/// Checks a claimed INP against an explicit expansion of f^period: the image
/// of each side, with the first `cancelled` letters removed, starts with the
/// side itself and ends inside its last edge at the recorded parameter.
pub fn verify_inp(fm: &FactoredMap, inp: &Inp, cap: usize) -> Result<bool> {
    let fp = fm.power(inp.period)?;
    let c: usize = inp
        .cancelled
        .clone()
        .try_into()
        .map_err(|_| Error::CapExceeded(cap))?;
    let i1 = fp.expand(&inp.rho1, cap)?;
    let i2 = fp.expand(&inp.rho2, cap)?;
    if i1.len() < c || i2.len() < c || i1[..c] != i2[..c] {
        return Ok(false);
    }
    if c < i1.len().min(i2.len()) && i1[c] == i2[c] {
        return Ok(false);
    }
    for (img, rho, end) in [(&i1, &inp.rho1, &inp.end1), (&i2, &inp.rho2, &inp.end2)] {
        let k = rho.len();
        if img.len() < c + k || img[c..c + k] != rho[..] {
            return Ok(false);
        }
        let m = fp.expand(&rho[..k - 1], cap)?.len();
        let n = img.len() - m;
        let want = match end {
            PathEnd::Vertex => img.len() == c + k,
            PathEnd::Interior { numer, denom } => {
                let numer: usize = numer.clone().try_into().map_err(|_| Error::CapExceeded(cap))?;
                let denom: usize = denom.clone().try_into().map_err(|_| Error::CapExceeded(cap))?;
                numer == k - 1 + c - m && denom == n - 1 && numer < denom && numer > 0
            }
        };
        if !want {
            return Ok(false);
        }
    }
    let zero = BigUint::zero();
    Ok(inp.cancelled > zero)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nielsen::{default_prevention_block, NielsenSequence};

    fn fib() -> RoseMap {
        RoseMap::parse("rank 2\na1 -> a1a2\na2 -> a1\n").unwrap()
    }

    #[test]
    fn fibonacci_has_period_two_inp() {
        let f = fib();
        let fm = FactoredMap::from_rose_map(&f).unwrap();
        assert_eq!(search_inp(&fm, 64, 1).unwrap(), InpSearch::NoInp);
        let InpSearch::Found(inp) = find_inp(&f, 64).unwrap() else {
            panic!("expected an INP");
        };
        assert_eq!(inp.period, 2);
        assert_eq!(format_letters(&inp.rho1, ""), "a1a2");
        assert_eq!(format_letters(&inp.rho2, ""), "a2a1");
        assert_eq!(inp.end1, PathEnd::Vertex);
        assert_eq!(inp.cancelled, BigUint::from(3u32));
        assert!(verify_inp(&fm, &inp, 1000).unwrap());
    }

    #[test]
    fn prevention_block_maps_have_none() {
        let p = default_prevention_block(3).unwrap();
        let s = p.concat(&NielsenSequence::parse("[a1->a3a1] [a1->a3a1]", 3).unwrap()).unwrap();
        let fm = FactoredMap::from_sequence(&s).unwrap();
        assert_eq!(search_pinp(&fm, 64, 2).unwrap(), InpSearch::NoInp);
    }

    #[test]
    fn rejects_identity() {
        assert!(find_inp(&RoseMap::identity(3), 64).is_err());
    }

    #[test]
    fn interior_endpoint_witness() {
        // whatever the search returns here must pass the explicit check
        let f = RoseMap::parse("rank 2\na1 -> a1a2a1\na2 -> a1a2\n").unwrap();
        if let Ok(InpSearch::Found(inp)) = find_pinp(&f, 64, 2) {
            let fm = FactoredMap::from_rose_map(&f).unwrap();
            assert!(verify_inp(&fm, &inp, 100_000).unwrap());
        }
    }
}
