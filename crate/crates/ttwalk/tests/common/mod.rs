#![allow(dead_code)]

use std::collections::{BTreeMap, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ttwalk::nielsen::{enumerate_s, successors, NielsenAuto, NielsenSequence};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Admissible walk driven by explicit choices.
pub fn walk(rank: usize, start: usize, choices: &[usize]) -> Vec<NielsenAuto> {
    let s = enumerate_s(rank).unwrap();
    let mut cur = s[start % s.len()];
    let mut items = vec![cur];
    for &c in choices {
        let succ = successors(&cur);
        cur = succ[c % succ.len()];
        items.push(cur);
    }
    items
}

pub fn random_walk(rank: usize, len: usize, rng: &mut ChaCha8Rng) -> Vec<NielsenAuto> {
    let choices: Vec<usize> = (1..len).map(|_| rng.random_range(0..4 * rank)).collect();
    walk(rank, rng.random_range(0..4 * rank * (rank - 1)), &choices)
}

/// Shortest path p with [from, p.., to] admissible.
pub fn bridge(from: &NielsenAuto, to: &NielsenAuto) -> Vec<NielsenAuto> {
    let mut prev: BTreeMap<NielsenAuto, NielsenAuto> = BTreeMap::new();
    let mut queue = VecDeque::from([*from]);
    while let Some(cur) = queue.pop_front() {
        for next in successors(&cur) {
            if next == *to {
                let mut path = Vec::new();
                let mut at = cur;
                while at != *from {
                    path.push(at);
                    at = prev[&at];
                }
                path.reverse();
                return path;
            }
            if next != *from && !prev.contains_key(&next) {
                prev.insert(next, cur);
                queue.push_back(next);
            }
        }
    }
    unreachable!("admissibility digraph is strongly connected")
}

/// Closes an admissible walk into a cyclically admissible sequence.
pub fn close(rank: usize, mut items: Vec<NielsenAuto>) -> NielsenSequence {
    let tail = bridge(items.last().unwrap(), &items[0]);
    items.extend(tail);
    let seq = NielsenSequence::new(items, rank).unwrap();
    assert!(seq.is_cyclically_admissible().unwrap());
    seq
}

pub fn random_cyclic(rank: usize, len: usize, rng: &mut ChaCha8Rng) -> NielsenSequence {
    close(rank, random_walk(rank, len, rng))
}
