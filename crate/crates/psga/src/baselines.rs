//! Greedy reference solvers: a deterministic steepest-ascent expansion and
//! a randomized multi-start variant that spends the same run budget as the
//! staged solver but never adapts.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::bargs::{select_start_nodes, SolveError};
use crate::exec;
use crate::graph::{
    evaluate_utility, CostError, CostFunction, GroupSelection, ParamsError, SocialGraph,
    UtilityParams,
};

/// Weight floor keeping zero- and negative-increment frontier nodes
/// selectable in the randomized baseline.
const INCREMENT_FLOOR: f64 = 1e-9;

/// Errors from baseline input validation.
#[derive(Debug, Error, PartialEq)]
pub enum BaselineError {
    #[error(transparent)]
    Params(#[from] ParamsError),
    #[error(transparent)]
    Cost(#[from] CostError),
    #[error(transparent)]
    Starts(#[from] SolveError),
    #[error("graph has no nodes")]
    EmptyGraph,
    #[error("run budget {0} is below the start-node count {1}")]
    BudgetBelowStarts(usize, usize),
}

/// Configuration for the randomized baseline.
#[derive(Debug, Clone)]
pub struct RandomGreedyConfig {
    /// Total number of expansion runs; must cover every start node at least
    /// once.
    pub total_budget: usize,
    /// Start-node count; defaults to `ceil(n / k_max)`.
    pub start_nodes: Option<usize>,
    pub seed: u64,
}

/// Shared expansion state: members, a frontier in discovery order, and the
/// running preference sum.
struct Growth<'a> {
    g: &'a SocialGraph,
    lambda: f64,
    members: Vec<u32>,
    in_group: Vec<bool>,
    in_frontier: Vec<bool>,
    frontier: Vec<u32>,
    preference: f64,
}

impl<'a> Growth<'a> {
    fn start(g: &'a SocialGraph, lambda: f64, start: u32) -> Self {
        let n = g.node_count();
        let mut grow = Growth {
            g,
            lambda,
            members: Vec::new(),
            in_group: vec![false; n],
            in_frontier: vec![false; n],
            frontier: Vec::new(),
            preference: 0.0,
        };
        grow.members.push(start);
        grow.in_group[start as usize] = true;
        grow.preference = g.interest(start);
        for &(v, _) in g.neighbors(start) {
            grow.in_frontier[v as usize] = true;
            grow.frontier.push(v);
        }
        grow
    }

    /// Preference gain from adding `v` to the current members.
    fn increment(&self, v: u32) -> f64 {
        let mut ties = 0.0;
        for &(nb, t) in self.g.neighbors(v) {
            if self.in_group[nb as usize] {
                ties += t;
            }
        }
        self.g.interest(v) + self.lambda * ties
    }

    /// Moves `frontier[idx]` into the group and extends the frontier.
    fn add(&mut self, idx: usize, increment: f64) {
        let v = self.frontier.swap_remove(idx);
        self.preference += increment;
        self.members.push(v);
        self.in_group[v as usize] = true;
        for &(nb, _) in self.g.neighbors(v) {
            if !self.in_group[nb as usize] && !self.in_frontier[nb as usize] {
                self.in_frontier[nb as usize] = true;
                self.frontier.push(nb);
            }
        }
    }
}

/// Deterministic greedy: start from the highest-interest node, repeatedly
/// add the frontier node with the largest preference gain (ties to the
/// lower id), and return the best-scoring prefix. Ties between prefixes go
/// to the smaller group.
pub fn dgreedy_solve(
    g: &SocialGraph,
    cost: &CostFunction,
    params: &UtilityParams,
) -> Result<GroupSelection, BaselineError> {
    if g.node_count() == 0 {
        return Err(BaselineError::EmptyGraph);
    }
    params.validate(g, cost)?;

    let mut start = 0u32;
    for v in 1..g.node_count() as u32 {
        if g.interest(v) > g.interest(start) {
            start = v;
        }
    }

    let mut grow = Growth::start(g, params.lambda, start);
    let mut best_len = 1;
    let mut best_utility = grow.preference - params.beta * cost.eval(1)?;
    while grow.members.len() < params.k_max && !grow.frontier.is_empty() {
        let mut pick = 0;
        let mut pick_inc = f64::NEG_INFINITY;
        for (i, &v) in grow.frontier.iter().enumerate() {
            let inc = grow.increment(v);
            if inc > pick_inc || (inc == pick_inc && v < grow.frontier[pick]) {
                pick = i;
                pick_inc = inc;
            }
        }
        grow.add(pick, pick_inc);
        let utility = grow.preference - params.beta * cost.eval(grow.members.len())?;
        if utility > best_utility {
            best_utility = utility;
            best_len = grow.members.len();
        }
    }
    Ok(evaluate_utility(g, cost, params, &grow.members[..best_len])?)
}

/// Randomized greedy: same start nodes as the staged solver, the run budget
/// split evenly over them (remainder to the better-ranked), every expansion
/// step drawing from the frontier in proportion to the preference gain
/// (floored at a small positive weight). Every prefix of every run competes;
/// ties keep the earliest find.
pub fn rgreedy_solve(
    g: &SocialGraph,
    cost: &CostFunction,
    params: &UtilityParams,
    cfg: &RandomGreedyConfig,
) -> Result<GroupSelection, BaselineError> {
    let n = g.node_count();
    if n == 0 {
        return Err(BaselineError::EmptyGraph);
    }
    params.validate(g, cost)?;
    let m = cfg.start_nodes.unwrap_or_else(|| n.div_ceil(params.k_max));
    let starts = select_start_nodes(g, m, params.lambda)?;
    if cfg.total_budget < m {
        return Err(BaselineError::BudgetBelowStarts(cfg.total_budget, m));
    }

    let size_cost: Vec<f64> = (0..=params.k_max)
        .map(|k| params.beta * cost.eval(k).expect("validated size domain"))
        .collect();
    let base = cfg.total_budget / m;
    let rem = cfg.total_budget % m;
    let run_start: Vec<u32> = (0..m)
        .flat_map(|pos| {
            let runs = base + usize::from(pos < rem);
            std::iter::repeat_n(starts[pos], runs)
        })
        .collect();

    let seed = cfg.seed;
    let lambda = params.lambda;
    let k_max = params.k_max;
    let run_start_ref = &run_start;
    let size_cost_ref = &size_cost;
    // (best utility, prefix length, members in addition order) per run.
    let per_run: Vec<(f64, usize, Vec<u32>)> = exec::map_indexed(cfg.total_budget, move |i| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        let mut grow = Growth::start(g, lambda, run_start_ref[i]);
        let mut best_len = 1;
        let mut best_utility = grow.preference - size_cost_ref[1];
        let mut weights: Vec<f64> = Vec::new();
        while grow.members.len() < k_max && !grow.frontier.is_empty() {
            weights.clear();
            let mut total = 0.0;
            for &v in &grow.frontier {
                let w = grow.increment(v).max(INCREMENT_FLOOR);
                weights.push(w);
                total += w;
            }
            debug_assert!(
                (weights.iter().map(|w| w / total).sum::<f64>() - 1.0).abs() < 1e-9,
                "frontier draw weights must normalize"
            );
            let mut u = rng.random::<f64>() * total;
            let mut pick = grow.frontier.len() - 1;
            for (j, &w) in weights.iter().enumerate() {
                if u < w {
                    pick = j;
                    break;
                }
                u -= w;
            }
            let inc = grow.increment(grow.frontier[pick]);
            grow.add(pick, inc);
            let utility = grow.preference - size_cost_ref[grow.members.len()];
            if utility > best_utility {
                best_utility = utility;
                best_len = grow.members.len();
            }
        }
        grow.members.truncate(best_len);
        (best_utility, best_len, grow.members)
    });

    let (mut best_utility, mut best_members) = (f64::NEG_INFINITY, Vec::new());
    for (utility, _, members) in per_run {
        if utility > best_utility {
            best_utility = utility;
            best_members = members;
        }
    }
    let selection = evaluate_utility(g, cost, params, &best_members)?;
    debug_assert!((selection.utility - best_utility).abs() <= 1e-9 * best_utility.abs().max(1.0));
    Ok(selection)
}
