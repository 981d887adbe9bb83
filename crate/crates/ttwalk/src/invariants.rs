//! Index, ideal Whitehead graph and the property (𝒢) certificate for
//! one-illegal-turn train track maps on the rose.

use std::collections::HashSet;

use num_rational::Ratio;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::nielsen::{all_prevention_blocks, cached_seed, NielsenAuto, NielsenSequence};
use crate::rose_map::{
    find_pinp, search_pinp, sequence_derivative, sequence_taken_turns, stable_turns, DirectionMap, FactoredMap,
    Inp, InpSearch, RoseMap, Turn, WhGraph, DEFAULT_INP_CAP,
};
use crate::spectral::Matrix;

pub fn ser_ratio<S: Serializer>(r: &Ratio<i64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(&format_args!("{}/{}", r.numer(), r.denom()))
}

fn ser_ratios<S: Serializer>(v: &[Ratio<i64>], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|r| format!("{}/{}", r.numer(), r.denom())))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PinpStatus {
    /// A prevention block is a prefix of the sequence.
    Certified,
    /// The bounded search ruled out pINPs of every period up to the cap.
    SearchNegative,
    Inconclusive,
    Found,
}

impl PinpStatus {
    pub fn is_free(self) -> bool {
        matches!(self, PinpStatus::Certified | PinpStatus::SearchNegative)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Caps {
    pub inp_cap: usize,
    pub whitehead_cap: usize,
    pub power_k_cap: usize,
    pub period_cap: usize,
}

impl Default for Caps {
    fn default() -> Caps {
        Caps { inp_cap: DEFAULT_INP_CAP, whitehead_cap: 64, power_k_cap: 64, period_cap: 2 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IndexReport {
    pub gate_count: usize,
    #[serde(serialize_with = "ser_ratios")]
    pub index_list: Vec<Ratio<i64>>,
    #[serde(serialize_with = "ser_ratio")]
    pub rotationless_index: Ratio<i64>,
    #[serde(serialize_with = "ser_ratio")]
    pub geometric_index: Ratio<i64>,
    pub iw_vertices: usize,
    pub iw_is_complete: bool,
}

/// Index data at the single vertex, for a pINP-free map with derivative `d`
/// and local Whitehead graph `wh`.
pub fn index_from_parts(d: &DirectionMap, wh: &WhGraph, pinp: PinpStatus) -> Result<IndexReport> {
    if !pinp.is_free() {
        return Err(Error::Precondition("map is not certified free of pINPs".into()));
    }
    let gate_count = d.gates().len();
    let index_list = if gate_count >= 3 { vec![Ratio::new(2 - gate_count as i64, 2)] } else { Vec::new() };
    let rotationless_index: Ratio<i64> = index_list.iter().sum();
    let iw = ideal_from_parts(d, wh);
    Ok(IndexReport {
        gate_count,
        index_list,
        rotationless_index,
        geometric_index: rotationless_index * -2,
        iw_vertices: iw.vertices().len(),
        iw_is_complete: iw.is_complete(),
    })
}

/// Stable Whitehead graph restricted to the periodic directions.
pub fn ideal_from_parts(d: &DirectionMap, wh: &WhGraph) -> WhGraph {
    wh.restrict(&d.periodic_directions())
}

fn explicit_parts(f: &RoseMap, caps: &Caps) -> Result<(DirectionMap, WhGraph, PinpStatus)> {
    let status = match find_pinp(f, caps.inp_cap, caps.period_cap)? {
        InpSearch::Found(_) => PinpStatus::Found,
        InpSearch::NoInp => PinpStatus::SearchNegative,
        InpSearch::Inconclusive => PinpStatus::Inconclusive,
    };
    Ok((f.derivative()?, f.whitehead_graph(caps.whitehead_cap)?, status))
}

pub fn index_report(f: &RoseMap, caps: &Caps) -> Result<IndexReport> {
    let (d, wh, status) = explicit_parts(f, caps)?;
    index_from_parts(&d, &wh, status)
}

pub fn ideal_whitehead_graph(f: &RoseMap, caps: &Caps) -> Result<WhGraph> {
    let (d, wh, status) = explicit_parts(f, caps)?;
    if !status.is_free() {
        return Err(Error::Precondition("map is not certified free of pINPs".into()));
    }
    Ok(ideal_from_parts(&d, &wh))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GReport {
    pub rank: usize,
    pub length: usize,
    /// Offset of the cyclic rotation that was analysed.
    pub rotation: usize,
    pub seed_prefix: bool,
    pub prevention_prefix: bool,
    pub train_track: bool,
    pub single_illegal_turn: bool,
    pub illegal_turn: Option<Turn>,
    pub positive_power: Option<usize>,
    pub wh_connected: bool,
    pub wh_upsilon: bool,
    pub no_pinp: PinpStatus,
    pub pinp_witness: Option<Inp>,
    pub index: Option<IndexReport>,
    pub fully_irreducible_certified: bool,
    pub ageometric_certified: bool,
    pub iw_complete_2r_minus_1: bool,
    pub lone_axis: bool,
}

impl GReport {
    /// Every item of property (𝒢) certified.
    pub fn is_full(&self) -> bool {
        self.fully_irreducible_certified
            && self.ageometric_certified
            && self.single_illegal_turn
            && self.no_pinp.is_free()
            && self.iw_complete_2r_minus_1
            && self.lone_axis
    }
}

/// Prevention blocks of a rank, for repeated prefix tests.
pub struct BlockTable {
    blocks: HashSet<Vec<NielsenAuto>>,
    seed: Option<NielsenSequence>,
}

impl BlockTable {
    pub fn new(rank: usize) -> BlockTable {
        let blocks = if rank >= 3 { all_prevention_blocks(rank).unwrap_or_default() } else { HashSet::new() };
        BlockTable { blocks, seed: cached_seed(rank) }
    }

    pub fn with_seed(rank: usize, seed: Option<NielsenSequence>) -> BlockTable {
        BlockTable { seed, ..BlockTable::new(rank) }
    }

    pub fn seed(&self) -> Option<&NielsenSequence> {
        self.seed.as_ref()
    }

    fn has_prefix(&self, items: &[NielsenAuto]) -> bool {
        [6usize, 8].iter().any(|&k| items.len() >= k && self.blocks.contains(&items[..k]))
    }

    fn find_cyclic(&self, seq: &NielsenSequence) -> Option<usize> {
        let n = seq.len();
        (0..n).find(|&i| {
            [6usize, 8].iter().any(|&k| {
                k <= n && {
                    let w: Vec<NielsenAuto> = (0..k).map(|j| seq.items()[(i + j) % n]).collect();
                    self.blocks.contains(&w)
                }
            })
        })
    }
}

pub fn check_property_g(seq: &NielsenSequence, caps: &Caps) -> Result<GReport> {
    check_property_g_with(seq, caps, &BlockTable::new(seq.rank()))
}

/// As `check_property_g`, reusing a precomputed block table.
pub fn check_property_g_with(seq: &NielsenSequence, caps: &Caps, table: &BlockTable) -> Result<GReport> {
    if seq.is_empty() || !seq.is_cyclically_admissible()? {
        return Err(Error::Precondition("sequence is not cyclically admissible".into()));
    }
    let r = seq.rank();
    let seed_at = table.seed.as_ref().and_then(|s| seq.find_cyclic(s.items()));
    let rotation = seed_at.or_else(|| table.find_cyclic(seq)).unwrap_or(0);
    let rotated = seq.rotate(rotation);
    let items = rotated.items();

    let d = sequence_derivative(items, r);
    let taken = sequence_taken_turns(items);
    let illegal = d.illegal_turns();
    let single = illegal.len() == 1;
    let train_track = taken.iter().all(|t| d.is_legal(t));
    let positive_power = Matrix::of_sequence(&rotated).positive_power(caps.power_k_cap);
    let wh = WhGraph::from_turns(r, stable_turns(&taken, &d, caps.whitehead_cap)?);
    let last = items[items.len() - 1];
    let wh_upsilon = wh.is_upsilon(last.x(), last.y());

    let prevention_prefix = table.has_prefix(items);
    let mut witness = None;
    let no_pinp = if prevention_prefix {
        PinpStatus::Certified
    } else if !single || !train_track || positive_power.is_none() {
        PinpStatus::Inconclusive
    } else {
        match search_pinp(&FactoredMap::from_sequence(&rotated)?, caps.inp_cap, caps.period_cap)? {
            InpSearch::Found(inp) => {
                witness = Some(inp);
                PinpStatus::Found
            }
            InpSearch::NoInp => PinpStatus::SearchNegative,
            InpSearch::Inconclusive => PinpStatus::Inconclusive,
        }
    };

    let fully_irreducible = train_track && positive_power.is_some() && wh.is_connected() && no_pinp.is_free();
    let ageometric = fully_irreducible && no_pinp.is_free();
    let index = if single && no_pinp.is_free() { Some(index_from_parts(&d, &wh, no_pinp)?) } else { None };
    let iw = ideal_from_parts(&d, &wh);
    let iw_complete = index.as_ref().is_some_and(|ix| ix.iw_vertices == 2 * r - 1 && ix.iw_is_complete);
    let target = Ratio::new(3 - 2 * r as i64, 2);
    let lone_axis = fully_irreducible
        && ageometric
        && index.as_ref().is_some_and(|ix| ix.rotationless_index == target)
        && !iw.has_cut_vertex();

    Ok(GReport {
        rank: r,
        length: seq.len(),
        rotation,
        seed_prefix: seed_at.is_some(),
        prevention_prefix,
        train_track,
        single_illegal_turn: single,
        illegal_turn: if single { illegal.iter().next().copied() } else { None },
        positive_power,
        wh_connected: wh.is_connected(),
        wh_upsilon,
        no_pinp,
        pinp_witness: witness,
        index,
        fully_irreducible_certified: fully_irreducible,
        ageometric_certified: ageometric,
        iw_complete_2r_minus_1: iw_complete,
        lone_axis,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nielsen::default_prevention_block;

    #[test]
    fn square_of_one_generator() {
        let s = NielsenSequence::parse("[a1->a2a1] [a1->a2a1]", 3).unwrap();
        let g = check_property_g(&s, &Caps::default()).unwrap();
        assert!(g.single_illegal_turn);
        assert!(!g.fully_irreducible_certified);
        assert_eq!(g.positive_power, None);
        assert!(!g.is_full());
    }

    #[test]
    fn rejects_non_cyclic() {
        let s = NielsenSequence::parse("[a1->a2a1] [a2->a3a2]", 3).unwrap();
        assert!(!s.is_cyclically_admissible().unwrap());
        assert!(check_property_g(&s, &Caps::default()).is_err());
    }

    #[test]
    fn index_needs_certificate() {
        let d = DirectionMap::identity(3);
        let wh = WhGraph::empty(3);
        assert!(index_from_parts(&d, &wh, PinpStatus::Inconclusive).is_err());
        assert!(index_from_parts(&d, &wh, PinpStatus::Found).is_err());
        let ix = index_from_parts(&d, &wh, PinpStatus::Certified).unwrap();
        assert_eq!(ix.gate_count, 6);
        assert_eq!(ix.rotationless_index, Ratio::new(-2, 1));
        assert_eq!(ix.geometric_index, Ratio::new(4, 1));
    }

    #[test]
    fn prevention_prefix_is_certified() {
        let p = default_prevention_block(3).unwrap();
        let s = p.concat(&NielsenSequence::parse("[a1->a3a1] [a1->a3a1]", 3).unwrap()).unwrap();
        assert!(s.is_cyclically_admissible().unwrap());
        let g = check_property_g(&s.rotate(3), &Caps::default()).unwrap();
        assert_eq!(g.rotation, 7);
        assert!(g.prevention_prefix);
        assert_eq!(g.no_pinp, PinpStatus::Certified);
    }

    #[test]
    fn ratios_serialize_as_fractions() {
        let d = DirectionMap::identity(3);
        let ix = index_from_parts(&d, &WhGraph::empty(3), PinpStatus::Certified).unwrap();
        let v = serde_json::to_value(&ix).unwrap();
        assert_eq!(v["rotationless_index"], "-2/1");
        assert_eq!(v["index_list"][0], "-2/1");
        assert_eq!(serde_json::to_value(PinpStatus::SearchNegative).unwrap(), "search-negative");
    }
}
