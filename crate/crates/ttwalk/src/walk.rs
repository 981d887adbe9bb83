//! The Markov chain on S with uniform transitions to admissible successors,
//! trajectory sampling, and the statistics built on it.

use std::collections::HashMap;

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{check_rank, Error, Result};
use crate::nielsen::{admissible, enumerate_s, NielsenAuto, NielsenSequence};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct WalkConfig {
    pub rank: usize,
    pub seed: u64,
    pub length: usize,
    pub trials: usize,
}

impl WalkConfig {
    pub fn new(rank: usize, seed: u64, length: usize, trials: usize) -> Result<WalkConfig> {
        if rank < 3 {
            return Err(Error::InvalidRank(rank));
        }
        if length == 0 || trials == 0 {
            return Err(Error::Precondition("length and trials must be positive".into()));
        }
        Ok(WalkConfig { rank, seed, length, trials })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Trajectory {
    pub items: Vec<NielsenAuto>,
    pub config: WalkConfig,
    pub trial_index: u64,
}

impl Trajectory {
    pub fn sequence(&self) -> NielsenSequence {
        NielsenSequence::new(self.items.clone(), self.config.rank).expect("trajectory is nonempty")
    }

    pub fn prefix(&self, n: usize) -> &[NielsenAuto] {
        &self.items[..n.min(self.items.len())]
    }
}

/// S with successor lists by index, for sampling without re-deriving them.
#[derive(Clone, Debug)]
pub struct Chain {
    states: Vec<NielsenAuto>,
    succ: Vec<Vec<usize>>,
}

impl Chain {
    pub fn new(rank: usize) -> Result<Chain> {
        let states = enumerate_s(rank)?;
        let index: HashMap<NielsenAuto, usize> = states.iter().enumerate().map(|(i, &t)| (t, i)).collect();
        let succ = states
            .iter()
            .map(|a| states.iter().filter(|b| admissible(a, b)).map(|b| index[b]).collect())
            .collect();
        Ok(Chain { states, succ })
    }

    pub fn states(&self) -> &[NielsenAuto] {
        &self.states
    }

    pub fn successors(&self, i: usize) -> &[usize] {
        &self.succ[i]
    }

    fn sample_indices(&self, rng: &mut ChaCha8Rng, n: usize) -> Vec<usize> {
        let mut out = Vec::with_capacity(n);
        let mut cur = rng.random_range(0..self.states.len());
        out.push(cur);
        for _ in 1..n {
            let s = &self.succ[cur];
            cur = s[rng.random_range(0..s.len())];
            out.push(cur);
        }
        out
    }
}

/// P(θ'|θ): 1/(4r−6) on admissible pairs, 0 otherwise.
pub fn transition_prob(a: &NielsenAuto, b: &NielsenAuto) -> Result<Ratio<i64>> {
    check_rank(a.rank(), b.rank())?;
    let r = a.rank() as i64;
    Ok(if admissible(a, b) { Ratio::new(1, 4 * r - 6) } else { Ratio::from_integer(0) })
}

/// Exact check that the uniform distribution is stationary.
pub fn is_uniform_stationary(rank: usize) -> Result<bool> {
    let s = enumerate_s(rank)?;
    let mu = Ratio::new(1, s.len() as i64);
    for b in &s {
        let mut mass = Ratio::from_integer(0);
        for a in &s {
            mass += mu * transition_prob(a, b)?;
        }
        if mass != mu {
            return Ok(false);
        }
    }
    for a in &s {
        let mut row = Ratio::from_integer(0);
        for b in &s {
            row += transition_prob(a, b)?;
        }
        if row != Ratio::from_integer(1) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Every state reaches every other along admissible transitions.
pub fn is_strongly_connected(rank: usize) -> Result<bool> {
    let c = Chain::new(rank)?;
    let n = c.states.len();
    let reach_all = |adj: &dyn Fn(usize) -> Vec<usize>| {
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(u) = stack.pop() {
            for v in adj(u) {
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
        seen.iter().all(|&b| b)
    };
    let mut pred: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (u, s) in c.succ.iter().enumerate() {
        for &v in s {
            pred[v].push(u);
        }
    }
    Ok(reach_all(&|u| c.succ[u].clone()) && reach_all(&|u| pred[u].clone()))
}

/// Period 1: for an irreducible chain a single self-loop suffices.
pub fn is_aperiodic(rank: usize) -> Result<bool> {
    let c = Chain::new(rank)?;
    Ok(c.succ.iter().enumerate().any(|(i, s)| s.contains(&i)))
}

/// Uniform stationarity, irreducibility and aperiodicity together.
pub fn stationary_check(rank: usize) -> Result<bool> {
    Ok(is_uniform_stationary(rank)? && is_strongly_connected(rank)? && is_aperiodic(rank)?)
}

/// Generator for a trial: ChaCha8 keyed by the seed, stream = trial index.
pub fn trial_rng(seed: u64, trial_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial_index);
    rng
}

pub fn sample_trajectory(config: &WalkConfig, trial_index: u64) -> Result<Trajectory> {
    let chain = Chain::new(config.rank)?;
    Ok(sample_with_chain(&chain, config, trial_index))
}

pub fn sample_with_chain(chain: &Chain, config: &WalkConfig, trial_index: u64) -> Trajectory {
    let mut rng = trial_rng(config.seed, trial_index);
    let idx = chain.sample_indices(&mut rng, config.length);
    Trajectory { items: idx.into_iter().map(|i| chain.states[i]).collect(), config: *config, trial_index }
}

/// E_n: the prefix is cyclically admissible. Its consecutive pairs are
/// admissible by construction, so only the wrap-around pair is checked.
pub fn is_e_n(prefix: &[NielsenAuto]) -> bool {
    match (prefix.first(), prefix.last()) {
        (Some(a), Some(b)) => admissible(b, a),
        _ => false,
    }
}

/// lim Pr(E_n) = (2r−3) / (2r(r−1)).
pub fn e_n_limit(rank: usize) -> Ratio<i64> {
    let r = rank as i64;
    Ratio::new(2 * r - 3, 2 * r * (r - 1))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnEstimate {
    pub estimate: f64,
    pub stderr: f64,
    pub hits: usize,
    pub trials: usize,
    #[serde(serialize_with = "crate::invariants::ser_ratio")]
    pub theoretical_limit: Ratio<i64>,
}

pub fn estimate_e_n_prob(config: &WalkConfig) -> Result<EnEstimate> {
    let chain = Chain::new(config.rank)?;
    let mut hits = 0usize;
    for t in 0..config.trials {
        let mut rng = trial_rng(config.seed, t as u64);
        let idx = chain.sample_indices(&mut rng, config.length);
        let (a, b) = (chain.states[idx[0]], chain.states[idx[idx.len() - 1]]);
        if admissible(&b, &a) {
            hits += 1;
        }
    }
    let p = hits as f64 / config.trials as f64;
    let se = (p * (1.0 - p) / config.trials as f64).sqrt();
    Ok(EnEstimate { estimate: p, stderr: se, hits, trials: config.trials, theoretical_limit: e_n_limit(config.rank) })
}

/// Number of (possibly overlapping) occurrences of `block` as a substring.
pub fn count_occurrences(items: &[NielsenAuto], block: &[NielsenAuto]) -> usize {
    if block.is_empty() || block.len() > items.len() {
        return 0;
    }
    items.windows(block.len()).filter(|w| *w == block).count()
}

/// Least n such that the length-n prefix ends with `block`.
pub fn first_prefix_ending_with(items: &[NielsenAuto], block: &[NielsenAuto]) -> Option<usize> {
    if block.is_empty() {
        return None;
    }
    items.windows(block.len()).position(|w| w == block).map(|i| i + block.len())
}
