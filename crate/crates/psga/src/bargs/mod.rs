//! Staged randomized search with budget allocation across start nodes and
//! group sizes.
//!
//! A budget of expansion runs is split into equal stages. Stage 1 spreads
//! runs uniformly over the highest-scoring start nodes, always expanding to
//! the size limit. Every later stage scores each (start node, size) cell by
//! its chance of overtaking the incumbent cell, converts those scores into
//! integer run budgets, covers several sizes with one run by scoring its
//! prefixes, and refits per-cell node-selection weights from elite samples.
//! Start nodes whose budget rounds to zero drop out for good.
//!
//! Runs are index-addressed: each derives its randomness from (seed, stage,
//! start position, slot), so results are identical on any worker count.

pub mod bounds;
mod ce;
mod expand;
mod plan;
mod pool;

pub use ce::{ce_update, ProbVec, StoredSample};
pub use expand::{expand_run, RunSample, WEIGHT_FLOOR};
pub use plan::{
    allocate_node_budgets, allocate_size_budgets, compute_stage_plan, largest_remainder,
    reallocate_fresh_runs, win_probability, StagePlan,
};
pub use pool::{CellStats, PoolCellSummary, SamplePool};

use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::exec;
use crate::graph::{
    evaluate_utility, CostError, CostFunction, GroupSelection, ParamsError, SocialGraph,
    UtilityParams,
};

use expand::ExpandScratch;

/// Errors from solver input validation.
#[derive(Debug, Error, PartialEq)]
pub enum SolveError {
    #[error(transparent)]
    Params(#[from] ParamsError),
    #[error(transparent)]
    Cost(#[from] CostError),
    #[error("graph has no nodes")]
    EmptyGraph,
    #[error("run budget must be at least 1")]
    ZeroBudget,
    #[error("start-node count must be at least 1")]
    ZeroStarts,
    #[error("start-node count {0} exceeds node count {1}")]
    TooManyStarts(usize, usize),
    #[error("{name} must lie in {range}, got {value}")]
    BadParameter {
        name: &'static str,
        range: &'static str,
        value: f64,
    },
}

/// Solver configuration. `Default` gives the standard control settings with
/// a placeholder budget; set `total_budget` to something meaningful for the
/// instance size.
#[derive(Debug, Clone)]
pub struct BargsConfig {
    /// Total number of expansion runs to spend.
    pub total_budget: usize,
    /// Start-node count; defaults to `ceil(n / k_max)`.
    pub start_nodes: Option<usize>,
    /// Closeness ratio in (0, 1) used by stage planning: smaller values plan
    /// shorter stages.
    pub alpha: f64,
    /// Elite fraction in (0, 1) for the selection-weight refit.
    pub rho: f64,
    /// Target confidence in (0, 1) that the final incumbent start node is
    /// the true best.
    pub p_cs: f64,
    /// Weight in [0, 1] on freshly fitted selection weights; the remainder
    /// stays on the previous weights.
    pub smoothing: f64,
    /// Seed for all randomness.
    pub seed: u64,
    /// Keep every recorded sample in the result. Memory grows with the
    /// budget; meant for diagnostics and tests.
    pub keep_samples: bool,
}

impl Default for BargsConfig {
    fn default() -> Self {
        BargsConfig {
            total_budget: 1000,
            start_nodes: None,
            alpha: 0.99,
            rho: 0.3,
            p_cs: 0.7,
            smoothing: 0.7,
            seed: 0,
            keep_samples: false,
        }
    }
}

/// Per-stage allocation record. Rows in the vectors are aligned: entry `i`
/// everywhere describes the same surviving start position. Per-size vectors
/// are indexed by `size - 1`.
#[derive(Debug, Clone)]
pub struct StageSummary {
    /// 1-based stage number.
    pub stage: usize,
    /// Runs assigned to each surviving start position.
    pub node_budgets: Vec<(usize, usize)>,
    /// Per-size sample targets. Stage 1 plans whole runs only, shown as a
    /// target at the size limit.
    pub size_targets: Vec<(usize, Vec<usize>)>,
    /// Fresh full-length runs launched per size.
    pub fresh_runs: Vec<(usize, Vec<usize>)>,
    /// Samples actually recorded per size, prefix reuse included.
    pub realized: Vec<(usize, Vec<usize>)>,
    /// (start position, size) of the incumbent cell the stage's allocation
    /// compared against; `None` in stage 1.
    pub incumbent: Option<(usize, usize)>,
    /// Best utility seen anywhere up to and including this stage.
    pub best_utility: f64,
}

/// Conditions worth surfacing that are not errors.
#[derive(Debug, Clone, Default)]
pub struct Diagnostics {
    /// Stage planning degenerated and everything ran in a single stage.
    pub stage_plan_fallback: bool,
    /// Stages whose incumbent cell had a collapsed utility range, making
    /// overtake chances step functions.
    pub degenerate_incumbent_stages: Vec<usize>,
}

/// One recorded sample, kept only with [`BargsConfig::keep_samples`].
#[derive(Debug, Clone)]
pub struct RecordedSample {
    pub stage: usize,
    /// Start node id (not position).
    pub start: u32,
    /// Sorted member ids.
    pub members: Vec<u32>,
    pub utility: f64,
}

/// Solver output.
#[derive(Debug, Clone)]
pub struct BargsResult {
    pub best: GroupSelection,
    /// Best utility after each stage; non-decreasing.
    pub trace: Vec<f64>,
    pub plan: StagePlan,
    /// Chosen start nodes in score order.
    pub start_nodes: Vec<u32>,
    pub stages: Vec<StageSummary>,
    /// Final per-cell sample statistics.
    pub pool: Vec<PoolCellSummary>,
    pub diagnostics: Diagnostics,
    pub runtime: Duration,
    pub samples: Option<Vec<RecordedSample>>,
}

/// Picks the `m` start nodes with the highest `interest + lambda * sum of
/// incident tightness`, ordered best first, ties to the lower id.
pub fn select_start_nodes(g: &SocialGraph, m: usize, lambda: f64) -> Result<Vec<u32>, SolveError> {
    let n = g.node_count();
    if n == 0 {
        return Err(SolveError::EmptyGraph);
    }
    if m == 0 {
        return Err(SolveError::ZeroStarts);
    }
    if m > n {
        return Err(SolveError::TooManyStarts(m, n));
    }
    let score = |u: usize| {
        let ties: f64 = g.neighbors(u as u32).iter().map(|&(_, t)| t).sum();
        g.interest(u as u32) + lambda * ties
    };
    let mut order: Vec<u32> = (0..n as u32).collect();
    order.sort_by(|&a, &b| {
        score(b as usize)
            .total_cmp(&score(a as usize))
            .then(a.cmp(&b))
    });
    order.truncate(m);
    Ok(order)
}

/// (seed stream) layout: stage | start position | run slot. Field widths
/// bound how large a solve can get before streams would collide; the
/// asserts below fire long before that.
fn pack_stream(stage: usize, pos: usize, slot: u32) -> u64 {
    debug_assert!(stage < (1 << 20));
    debug_assert!(pos < (1 << 22));
    debug_assert!((slot as u64) < (1 << 22));
    ((stage as u64) << 44) | ((pos as u64) << 22) | slot as u64
}

struct RunSpec {
    /// Row into the stage's aligned bookkeeping vectors.
    row: usize,
    pos: usize,
    target: usize,
    slot: u32,
}

fn check_unit_interval(name: &'static str, value: f64, open: bool) -> Result<(), SolveError> {
    let ok = if open {
        value > 0.0 && value < 1.0
    } else {
        (0.0..=1.0).contains(&value)
    };
    if ok {
        Ok(())
    } else {
        Err(SolveError::BadParameter {
            name,
            range: if open { "(0, 1)" } else { "[0, 1]" },
            value,
        })
    }
}

/// Runs the staged search and returns the best group found, canonically
/// re-evaluated, together with the full allocation trace.
pub fn solve(
    g: &SocialGraph,
    cost: &CostFunction,
    params: &UtilityParams,
    cfg: &BargsConfig,
) -> Result<BargsResult, SolveError> {
    let t0 = Instant::now();
    let n = g.node_count();
    if n == 0 {
        return Err(SolveError::EmptyGraph);
    }
    params.validate(g, cost)?;
    if cfg.total_budget == 0 {
        return Err(SolveError::ZeroBudget);
    }
    check_unit_interval("alpha", cfg.alpha, true)?;
    check_unit_interval("rho", cfg.rho, true)?;
    check_unit_interval("p_cs", cfg.p_cs, true)?;
    check_unit_interval("smoothing", cfg.smoothing, false)?;

    let k_max = params.k_max;
    let m = cfg.start_nodes.unwrap_or_else(|| n.div_ceil(k_max));
    let starts = select_start_nodes(g, m, params.lambda)?;
    let plan = compute_stage_plan(cfg.total_budget, m, cfg.p_cs, cfg.alpha);
    let size_cost: Vec<f64> = (0..=k_max)
        .map(|k| params.beta * cost.eval(k).expect("validated size domain"))
        .collect();

    let mut pool = SamplePool::new(m, k_max);
    let mut probs: Vec<Vec<ProbVec>> = vec![vec![ProbVec::uniform(n); k_max]; m];
    let mut gammas = vec![vec![f64::NEG_INFINITY; k_max]; m];
    let mut alive = vec![true; m];
    let mut best: Option<(f64, Vec<u32>)> = None;
    let mut trace = Vec::with_capacity(plan.stages);
    let mut summaries: Vec<StageSummary> = Vec::with_capacity(plan.stages);
    let mut diagnostics = Diagnostics {
        stage_plan_fallback: plan.fallback,
        ..Diagnostics::default()
    };
    let mut recorded: Option<Vec<RecordedSample>> = cfg.keep_samples.then(Vec::new);

    for stage in 1..=plan.stages {
        let mut node_budgets: Vec<(usize, usize)> = Vec::new();
        let mut size_targets: Vec<(usize, Vec<usize>)> = Vec::new();
        let mut fresh: Vec<(usize, Vec<usize>)> = Vec::new();
        let mut incumbent = None;

        if stage == 1 {
            let base = plan.stage_budget / m;
            let rem = plan.stage_budget % m;
            for pos in 0..m {
                let runs = base + usize::from(pos < rem);
                if runs == 0 {
                    alive[pos] = false;
                    continue;
                }
                let mut per_size = vec![0usize; k_max];
                per_size[k_max - 1] = runs;
                node_budgets.push((pos, runs));
                size_targets.push((pos, per_size.clone()));
                fresh.push((pos, per_size));
            }
        } else {
            // Incumbent: the competing cell with the highest utility seen.
            let mut inc: Option<(usize, usize, CellStats)> = None;
            for pos in (0..m).filter(|&p| alive[p]) {
                for size in 1..=k_max {
                    if let Some(st) = pool.stats(pos, size) {
                        if inc.is_none_or(|(_, _, cur)| st.max_utility > cur.max_utility) {
                            inc = Some((pos, size, st));
                        }
                    }
                }
            }
            let (b_pos, b_size, b_stats) = inc.expect("a surviving cell has samples");
            if b_stats.max_utility <= b_stats.min_utility {
                diagnostics.degenerate_incumbent_stages.push(stage);
            }
            incumbent = Some((b_pos, b_size));

            let alive_pos: Vec<usize> = (0..m).filter(|&p| alive[p]).collect();
            let cell_weights: Vec<Vec<f64>> = alive_pos
                .iter()
                .map(|&pos| {
                    (1..=k_max)
                        .map(|size| {
                            if (pos, size) == (b_pos, b_size) {
                                return 1.0;
                            }
                            match pool.stats(pos, size) {
                                None => 0.0,
                                Some(st) => win_probability(
                                    st.max_utility,
                                    b_stats.min_utility,
                                    b_stats.max_utility,
                                    st.samples,
                                ),
                            }
                        })
                        .collect()
                })
                .collect();
            let scores: Vec<f64> = cell_weights.iter().map(|w| w.iter().sum()).collect();
            let budgets = allocate_node_budgets(&scores, plan.stage_budget);

            for (i, &pos) in alive_pos.iter().enumerate() {
                if budgets[i] == 0 {
                    alive[pos] = false;
                    continue;
                }
                let targets = allocate_size_budgets(&cell_weights[i], budgets[i]);
                let fr = reallocate_fresh_runs(&targets);
                node_budgets.push((pos, budgets[i]));
                size_targets.push((pos, targets));
                fresh.push((pos, fr));
            }
        }
        debug_assert_eq!(
            node_budgets.iter().map(|&(_, b)| b).sum::<usize>(),
            plan.stage_budget
        );

        let mut specs: Vec<RunSpec> = Vec::new();
        for (row, (pos, per_size)) in fresh.iter().enumerate() {
            let mut slot = 0u32;
            for size in (1..=k_max).rev() {
                for _ in 0..per_size[size - 1] {
                    specs.push(RunSpec { row, pos: *pos, target: size, slot });
                    slot += 1;
                }
            }
        }

        let seed = cfg.seed;
        let lambda = params.lambda;
        let probs_ref = &probs;
        let starts_ref = &starts;
        let size_cost_ref = &size_cost;
        let specs_ref = &specs;
        let results: Vec<RunSample> = exec::map_indexed_init(
            specs.len(),
            || ExpandScratch::new(n),
            move |scratch, i| {
                let sp = &specs_ref[i];
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(pack_stream(stage, sp.pos, sp.slot));
                expand::expand_run_scratch(
                    g,
                    lambda,
                    size_cost_ref,
                    starts_ref[sp.pos],
                    sp.target,
                    &probs_ref[sp.pos],
                    &mut rng,
                    scratch,
                )
            },
        );

        // Merge in spec order: everything downstream of this loop is
        // independent of the worker count.
        let mut realized: Vec<(usize, Vec<usize>)> = fresh
            .iter()
            .map(|(pos, _)| (*pos, vec![0usize; k_max]))
            .collect();
        for (sp, run) in specs.iter().zip(&results) {
            debug_assert_eq!(run.members[0], starts[sp.pos]);
            debug_assert!(run.members.len() <= sp.target);
            for s in 1..=run.members.len() {
                let mut members = run.members[..s].to_vec();
                members.sort_unstable();
                let utility = run.utilities[s - 1];
                debug_assert!(crate::graph::is_connected(g, &members));
                realized[sp.row].1[s - 1] += 1;
                if let Some(rec) = &mut recorded {
                    rec.push(RecordedSample {
                        stage,
                        start: starts[sp.pos],
                        members: members.clone(),
                        utility,
                    });
                }
                let better = match &best {
                    None => true,
                    Some((bu, bm)) => {
                        utility > *bu
                            || (utility == *bu
                                && (members.len() < bm.len()
                                    || (members.len() == bm.len() && members < *bm)))
                    }
                };
                if better {
                    best = Some((utility, members.clone()));
                }
                pool.record(sp.pos, s, StoredSample { members, utility });
            }
        }

        #[cfg(debug_assertions)]
        if stage > 1 {
            // Fresh runs at stage two onward only target sizes already seen
            // to be reachable, so prefix accounting is exact.
            for (row, (_, targets)) in size_targets.iter().enumerate() {
                for k in 1..=k_max {
                    let planned: usize = fresh[row].1[k - 1..].iter().sum();
                    debug_assert_eq!(realized[row].1[k - 1], planned);
                    debug_assert!(realized[row].1[k - 1] >= targets[k - 1]);
                }
            }
        }

        let best_utility = best.as_ref().expect("at least one run per stage").0;
        trace.push(best_utility);
        summaries.push(StageSummary {
            stage,
            node_budgets,
            size_targets,
            fresh_runs: fresh,
            realized,
            incumbent,
            best_utility,
        });

        for pos in 0..m {
            for size in 1..=k_max {
                let stage_samples = pool.stage_samples(pos, size);
                if stage_samples.is_empty() {
                    continue;
                }
                let (next, gamma) = ce_update(
                    stage_samples,
                    cfg.rho,
                    gammas[pos][size - 1],
                    cfg.smoothing,
                    &probs[pos][size - 1],
                );
                debug_assert!(gamma >= gammas[pos][size - 1]);
                probs[pos][size - 1] = next;
                gammas[pos][size - 1] = gamma;
            }
        }
        pool.clear_stage();
    }

    let (raw_utility, members) = best.expect("budget of at least one run");
    let selection = evaluate_utility(g, cost, params, &members)?;
    debug_assert!(selection.connected);
    debug_assert!((selection.utility - raw_utility).abs() <= 1e-9 * raw_utility.abs().max(1.0));

    let pool_summaries = pool.summaries(&starts);
    Ok(BargsResult {
        best: selection,
        trace,
        plan,
        start_nodes: starts,
        stages: summaries,
        pool: pool_summaries,
        diagnostics,
        runtime: t0.elapsed(),
        samples: recorded,
    })
}
