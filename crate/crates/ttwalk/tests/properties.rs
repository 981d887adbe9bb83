mod common;

use std::collections::BTreeSet;

use num_rational::Ratio;
use proptest::prelude::*;
use rand::Rng;
use ttwalk::folds::{fold_decomposition, realize_power, PermAuto};
use ttwalk::invariants::{check_property_g, check_property_g_with, BlockTable, Caps, PinpStatus};
use ttwalk::nielsen::{default_prevention_block, enumerate_s, successors, NielsenSequence};
use ttwalk::rose_map::{sequence_derivative, sequence_taken_turns, RoseMap, WhGraph};
use ttwalk::spectral::Matrix;

use common::{close, random_cyclic, rng, walk};

#[test]
fn admissibility_branches_are_disjoint() {
    for r in 2..=6 {
        for t in enumerate_s(r).unwrap() {
            let succ = successors(&t);
            let same_x: BTreeSet<_> = succ.iter().filter(|u| u.x() == t.x()).collect();
            let y_is_x: BTreeSet<_> = succ.iter().filter(|u| u.y() == t.x()).collect();
            assert!(same_x.is_disjoint(&y_is_x));
            assert_eq!(same_x.len() + y_is_x.len(), 4 * r - 6);
        }
    }
}

#[test]
fn l_infinity_norm_never_drops_below_one() {
    let mut g = rng(11);
    for r in 2..=4 {
        for _ in 0..50 {
            let items = common::random_walk(r, 20, &mut g);
            let mut m = Matrix::identity(r);
            for t in &items {
                m.left_mul_elementary(t);
                assert!(m.norm_inf() >= 1u32.into());
            }
        }
    }
}

#[test]
fn peels_strictly_reduce_complexity() {
    let mut g = rng(5);
    for _ in 0..100 {
        let items = common::random_walk(3, 12, &mut g);
        let seq = NielsenSequence::new(items, 3).unwrap();
        let f = RoseMap::from_sequence(&seq).unwrap();
        let dec = fold_decomposition(&f).unwrap();
        assert!(dec.nielsen_part.len() <= f.complexity() - 3);
        let mut last = f.complexity();
        for i in 1..=dec.nielsen_part.len() {
            let mut h = dec.perm_part.to_rose_map();
            if i < dec.nielsen_part.len() {
                let rest = NielsenSequence::new(dec.nielsen_part[i..].to_vec(), 3).unwrap();
                h = RoseMap::compose(&h, &RoseMap::from_sequence(&rest).unwrap()).unwrap();
            }
            assert!(h.complexity() < last);
            last = h.complexity();
        }
        assert_eq!(dec.recompose().unwrap(), f);
    }
}

fn all_signed_perms(r: usize) -> Vec<PermAuto> {
    fn perms(k: usize, used: &mut Vec<bool>, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in 0..k {
            if !used[i] {
                used[i] = true;
                cur.push(i + 1);
                perms(k, used, cur, out);
                cur.pop();
                used[i] = false;
            }
        }
    }
    let mut ps = Vec::new();
    perms(r, &mut vec![false; r], &mut Vec::new(), &mut ps);
    let mut out = Vec::new();
    for p in ps {
        for mask in 0..(1u32 << r) {
            let inv: Vec<bool> = (0..r).map(|i| mask >> i & 1 == 1).collect();
            out.push(PermAuto::new(&p, &inv).unwrap());
        }
    }
    out
}

#[test]
fn uniform_exponent_kills_every_signed_permutation() {
    for r in 2..=5 {
        let lcm = (1..=r).fold(1, num_integer::lcm);
        for psi in all_signed_perms(r) {
            let p = psi.order();
            assert_eq!((2 * lcm) % p, 0, "{psi}");
            let mut q = PermAuto::identity(r);
            for k in 1..=p {
                q = q.then(&psi);
                assert_eq!(q.is_identity(), k == p, "{psi}");
            }
        }
    }
}

#[test]
fn uniform_exponent_realizes_power() {
    let mut g = rng(8);
    let r = 3;
    let uniform = 2 * (1..=r).fold(1, num_integer::lcm);
    let perms = all_signed_perms(r);
    let mut checked = 0;
    for _ in 0..200 {
        let seq = random_cyclic(r, 4, &mut g);
        let psi = &perms[g.random_range(0..perms.len())];
        let t = RoseMap::from_sequence(&seq).unwrap();
        let f = RoseMap::compose(&psi.to_rose_map(), &t).unwrap();
        let Ok((p, realized)) = realize_power(&f) else { continue };
        let long = realized.power(uniform / p);
        assert!(long.is_cyclically_admissible().unwrap());
        if let Ok(explicit) = RoseMap::from_sequence_capped(&long, 1 << 16) {
            if let Ok(fp) = f.power(uniform) {
                assert_eq!(explicit, fp);
                checked += 1;
            }
        }
    }
    assert!(checked > 0);
}

#[test]
fn seed_sequences_yield_full_reports() {
    let caps = Caps::default();
    let mut g = rng(21);
    for r in [3, 4] {
        let table = BlockTable::new(r);
        let seed = table.seed().unwrap().clone();
        for _ in 0..10 {
            let mut items = seed.items().to_vec();
            let tail = common::random_walk(r, 10, &mut g);
            items.extend(common::bridge(items.last().unwrap(), &tail[0]));
            items.extend(tail);
            let seq = close(r, items);
            let k = g.random_range(0..seq.len());
            let rep = check_property_g_with(&seq.rotate(k), &caps, &table).unwrap();
            assert!(rep.is_full(), "{rep:?}");
            let idx = rep.index.unwrap();
            assert_eq!(idx.gate_count, 2 * r - 1);
            assert_eq!(idx.index_list, vec![Ratio::new(3 - 2 * r as i64, 2)]);
            assert_eq!(idx.geometric_index, Ratio::from_integer(2 * r as i64 - 3));
            assert_eq!(idx.iw_vertices, 2 * r - 1);
            assert!(idx.iw_is_complete);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rotations_stay_cyclically_admissible(start in 0usize..24, choices in proptest::collection::vec(0usize..6, 0..20), k in 0usize..64) {
        let seq = close(3, walk(3, start, &choices));
        prop_assert!(seq.rotate(k % seq.len()).is_cyclically_admissible().unwrap());
    }

    #[test]
    fn taken_turns_lie_in_pushed_forward_basic_turns(
        r in 3usize..=4,
        start in 0usize..48,
        choices in proptest::collection::vec(0usize..10, 0..14),
        k in 0usize..15,
    ) {
        let items = walk(r, start, &choices);
        let m = items.len();
        let k = k % m;
        let g = RoseMap::from_sequence(&NielsenSequence::new(items[k..].to_vec(), r).unwrap()).unwrap();
        let allowed: BTreeSet<_> = (k..m)
            .map(|j| items[j].taken_turn().map(&sequence_derivative(&items[j + 1..], r)))
            .collect();
        prop_assert!(g.taken_turns().is_subset(&allowed));
        prop_assert_eq!(sequence_taken_turns(&items[k..]), g.taken_turns());
    }

    #[test]
    fn limited_graph_connectivity_propagates(
        r in 3usize..=5,
        start in 0usize..80,
        choices in proptest::collection::vec(0usize..14, 1..30),
    ) {
        let items = walk(r, start, &choices);
        for m in 2..=items.len() {
            let before = WhGraph::from_turns(r, sequence_taken_turns(&items[..m - 1]));
            let after = WhGraph::from_turns(r, sequence_taken_turns(&items[..m]));
            if before.is_connected() {
                prop_assert!(after.is_connected());
            }
        }
    }

    #[test]
    fn derivative_image_misses_last_x(
        r in 2usize..=5,
        start in 0usize..80,
        choices in proptest::collection::vec(0usize..14, 0..30),
    ) {
        let items = walk(r, start, &choices);
        let img = sequence_derivative(&items, r).image_set();
        prop_assert_eq!(img.len(), 2 * r - 1);
        prop_assert!(!img.contains(&items.last().unwrap().x()));
    }

    #[test]
    fn matrix_of_power_is_power_of_matrix(start in 0usize..24, choices in proptest::collection::vec(0usize..6, 0..6), k in 1usize..=5) {
        let seq = close(3, walk(3, start, &choices));
        let f = RoseMap::from_sequence(&seq).unwrap();
        let fk = f.power(k).unwrap();
        prop_assert!(fk.is_regular());
        prop_assert_eq!(fk.transition_matrix(), f.transition_matrix().pow(k));
        prop_assert_eq!(Matrix::of_sequence(&seq.power(k)), Matrix::of_sequence(&seq).pow(k));
    }

    #[test]
    fn positive_stays_positive_after_composition(r in 3usize..=4, choices in proptest::collection::vec(0usize..10, 1..20), pick in 0usize..10) {
        let seed = BlockTable::new(r).seed().unwrap().clone();
        let m_f = Matrix::of_sequence(&seed);
        prop_assert!(m_f.is_positive());
        let next = successors(seed.last().unwrap());
        let first = next[pick % next.len()];
        let start = enumerate_s(r).unwrap().iter().position(|t| *t == first).unwrap();
        let g = NielsenSequence::new(walk(r, start, &choices), r).unwrap();
        let gf = seed.concat(&g).unwrap();
        prop_assert!(gf.is_admissible().unwrap());
        let m = Matrix::of_sequence(&gf);
        prop_assert_eq!(&m, &Matrix::of_sequence(&g).mul(&m_f));
        prop_assert!(m.is_positive());
    }

    #[test]
    fn report_indices_are_consistent(seed in any::<u64>()) {
        let mut g = rng(seed);
        let seq = random_cyclic(3, 8, &mut g);
        let rep = check_property_g(&seq, &Caps::default()).unwrap();
        if rep.prevention_prefix {
            prop_assert_eq!(rep.no_pinp, PinpStatus::Certified);
        }
        if let Some(idx) = rep.index {
            prop_assert_eq!(idx.geometric_index, idx.rotationless_index * -2);
            for i in &idx.index_list {
                prop_assert!(*i < Ratio::from_integer(0));
                prop_assert!(*i >= Ratio::from_integer(1 - 3));
            }
        }
    }

    #[test]
    fn prevention_prefix_is_always_certified(choices in proptest::collection::vec(0usize..6, 0..12), k in 0usize..64) {
        let block = default_prevention_block(3).unwrap();
        let mut items = block.items().to_vec();
        let last = *items.last().unwrap();
        let start = enumerate_s(3).unwrap().iter().position(|t| *t == successors(&last)[0]).unwrap();
        items.extend(walk(3, start, &choices));
        let seq = close(3, items);
        let rep = check_property_g(&seq.rotate(k % seq.len()), &Caps::default()).unwrap();
        prop_assert!(rep.prevention_prefix);
        prop_assert_eq!(rep.no_pinp, PinpStatus::Certified);
    }
}

#[test]
fn rank_two_maps_always_have_a_pinp() {
    use ttwalk::rose_map::{search_pinp, FactoredMap, InpSearch};
    let mut g = rng(2);
    let (mut found, mut other) = (0, Vec::new());
    for _ in 0..300 {
        let seq = random_cyclic(2, g.random_range(1..20), &mut g);
        let fm = FactoredMap::from_sequence(&seq).unwrap();
        match search_pinp(&fm, 64, 2).unwrap() {
            InpSearch::Found(_) => found += 1,
            r => other.push((seq.to_string(), format!("{r:?}"))),
        }
    }
    assert!(other.is_empty(), "{found} found; misses: {:?}", &other[..other.len().min(5)]);
}

#[test]
fn longer_periods_find_nothing_new() {
    use ttwalk::rose_map::{search_pinp, FactoredMap, InpSearch};
    let mut g = rng(26);
    for i in 0..60 {
        let r = 2 + i % 3;
        let seq = random_cyclic(r, g.random_range(1..8), &mut g);
        let fm = FactoredMap::from_sequence(&seq).unwrap();
        let short = search_pinp(&fm, 64, 2).unwrap();
        let long = search_pinp(&fm, 64, 6).unwrap();
        match (&short, &long) {
            (InpSearch::Found(a), InpSearch::Found(b)) => assert_eq!(a, b),
            (InpSearch::NoInp, InpSearch::NoInp) => {}
            _ => panic!("{seq}: {short:?} vs {long:?}"),
        }
    }
}
