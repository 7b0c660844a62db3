//! Randomized connected expansion from a start node.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::graph::SocialGraph;

use super::ce::ProbVec;

/// Floor applied to selection weights so every frontier node stays
/// selectable even after its weight has decayed to zero.
pub const WEIGHT_FLOOR: f64 = 1e-12;

/// One expansion run: members in addition order plus the utility of every
/// prefix. `members[..k]` is the size-`k` sample and `utilities[k - 1]` its
/// utility. Runs stop early when the start node's component is exhausted,
/// so the vectors may be shorter than the requested size.
#[derive(Debug, Clone)]
pub struct RunSample {
    pub members: Vec<u32>,
    pub utilities: Vec<f64>,
}

/// Reusable per-worker buffers for expansion runs. Membership flags are
/// epoch-stamped so consecutive runs skip the O(n) clear.
pub(crate) struct ExpandScratch {
    epoch: u64,
    in_group: Vec<u64>,
    in_frontier: Vec<u64>,
    frontier: Vec<u32>,
    weights: Vec<f64>,
}

impl ExpandScratch {
    pub(crate) fn new(n: usize) -> Self {
        ExpandScratch {
            epoch: 0,
            in_group: vec![0; n],
            in_frontier: vec![0; n],
            frontier: Vec::new(),
            weights: Vec::new(),
        }
    }
}

/// Grows a connected group from `start` towards `target_len` members.
///
/// Each step draws the next member from the current frontier (neighbours of
/// the group, minus the group) with probability proportional to
/// `max(WEIGHT_FLOOR, weight)`, where the weights come from `probs[s - 1]`
/// for a group currently holding `s` members. `size_cost[k]` must hold the
/// priced cost of size `k` (beta included) for every `k <= target_len`.
///
/// Exactly one random draw is consumed per added member, so a given
/// `(seed, stream)` pair reproduces the run bit for bit.
pub fn expand_run(
    g: &SocialGraph,
    lambda: f64,
    size_cost: &[f64],
    start: u32,
    target_len: usize,
    probs: &[ProbVec],
    rng: &mut ChaCha8Rng,
) -> RunSample {
    let mut scratch = ExpandScratch::new(g.node_count());
    expand_run_scratch(g, lambda, size_cost, start, target_len, probs, rng, &mut scratch)
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn expand_run_scratch(
    g: &SocialGraph,
    lambda: f64,
    size_cost: &[f64],
    start: u32,
    target_len: usize,
    probs: &[ProbVec],
    rng: &mut ChaCha8Rng,
    scratch: &mut ExpandScratch,
) -> RunSample {
    debug_assert!(target_len >= 1);
    debug_assert!(size_cost.len() > target_len);
    debug_assert!(probs.len() >= target_len.saturating_sub(1));
    debug_assert!((start as usize) < g.node_count());

    scratch.epoch += 1;
    let epoch = scratch.epoch;
    scratch.frontier.clear();

    let mut members = Vec::with_capacity(target_len);
    let mut utilities = Vec::with_capacity(target_len);
    let mut preference = g.interest(start);
    members.push(start);
    utilities.push(preference - size_cost[1]);
    scratch.in_group[start as usize] = epoch;
    for &(v, _) in g.neighbors(start) {
        scratch.in_frontier[v as usize] = epoch;
        scratch.frontier.push(v);
    }

    while members.len() < target_len && !scratch.frontier.is_empty() {
        let pv = &probs[members.len() - 1];
        scratch.weights.clear();
        let mut total = 0.0;
        for &v in &scratch.frontier {
            let w = pv.get(v).max(WEIGHT_FLOOR);
            scratch.weights.push(w);
            total += w;
        }
        debug_assert!(total > 0.0);

        let mut u = rng.random::<f64>() * total;
        let mut pick = scratch.frontier.len() - 1;
        for (i, &w) in scratch.weights.iter().enumerate() {
            if u < w {
                pick = i;
                break;
            }
            u -= w;
        }
        let v = scratch.frontier.swap_remove(pick);

        let mut ties = 0.0;
        for &(nb, t) in g.neighbors(v) {
            if scratch.in_group[nb as usize] == epoch {
                ties += t;
            }
        }
        preference += g.interest(v) + lambda * ties;
        members.push(v);
        utilities.push(preference - size_cost[members.len()]);
        scratch.in_group[v as usize] = epoch;
        for &(nb, _) in g.neighbors(v) {
            if scratch.in_group[nb as usize] != epoch && scratch.in_frontier[nb as usize] != epoch {
                scratch.in_frontier[nb as usize] = epoch;
                scratch.frontier.push(nb);
            }
        }
    }

    RunSample { members, utilities }
}
