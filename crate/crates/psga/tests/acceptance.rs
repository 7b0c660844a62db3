//! Release gate for the solver stack. Every test below checks one shipping
//! requirement end to end and prints a single PASS or FAIL line; tolerances
//! and experiment configurations are pinned here, not in the library.
//!
//! The timed checks share one global lock so wall-clock measurements never
//! overlap with other work in this binary.

use std::sync::{Mutex, MutexGuard};
use std::time::Instant;

use psga::bargs::{
    ce_update, compute_stage_plan, largest_remainder, solve, win_probability, BargsConfig,
    BargsResult, ProbVec, StoredSample,
};
use psga::baselines::{dgreedy_solve, rgreedy_solve, RandomGreedyConfig};
use psga::data_io::{gen_synthetic, write_results, EdgeModel, ResultRow, SynthConfig};
use psga::graph::{evaluate_utility, is_connected};
use psga::oracle::{exact_solve, DEFAULT_ENUMERATION_CAP};
use psga::{CostFunction, CostSegment, SocialGraph, UtilityParams};

const FORMULA_TOL: f64 = 1e-9;
const ORACLE_TOL: f64 = 1e-9;
const ORACLE_MATCH_RATE: f64 = 0.9;
const FIT_RESIDUAL_LIMIT: f64 = 0.25;
const SPEEDUP_BAR: f64 = 3.0;

static GATE: Mutex<()> = Mutex::new(());

fn gate() -> MutexGuard<'static, ()> {
    match GATE.lock() {
        Ok(g) => g,
        Err(poisoned) => poisoned.into_inner(),
    }
}

/// Scale-free test instance: 2,000 nodes, five edges per arrival (mean
/// degree 10), a fifth of the edges flipped negative.
fn desk_graph(seed: u64) -> SocialGraph {
    gen_synthetic(&SynthConfig {
        n: 2000,
        model: EdgeModel::PreferentialAttachment { edges_per_node: 5 },
        negative_edge_prob: 0.2,
        seed,
        ..SynthConfig::default()
    })
}

fn linear_cost(n: usize) -> CostFunction {
    CostFunction::new(vec![CostSegment { k_lo: 1, k_hi: n, intercept: 0.0, slope: 0.05 }])
        .unwrap()
}

fn desk_params() -> UtilityParams {
    UtilityParams { beta: 1.0, lambda: 1.0, k_max: 4 }
}

/// Solver settings for the desk-scale experiments. 120 starts is well under
/// the n/k_max ceiling (more buys nothing but scouting overhead), and alpha
/// is set so the planner yields eight stages of 250 runs at the 2,000-run
/// budget, leaving seven refit rounds after the scouting stage.
fn tuned_solve(g: &SocialGraph, budget: usize, seed: u64) -> BargsResult {
    let cfg = BargsConfig {
        total_budget: budget,
        start_nodes: Some(120),
        alpha: 0.0789,
        seed,
        ..BargsConfig::default()
    };
    solve(g, &linear_cost(g.node_count()), &desk_params(), &cfg).unwrap()
}

#[test]
fn formula_fidelity() {
    let _g = gate();
    let win = win_probability(1.1, -1.3, 1.6, 5);
    let want = (2.4f64 / 2.9).powi(5);
    assert!((win - want).abs() < FORMULA_TOL, "win weight {win} vs {want}");

    assert_eq!(largest_remainder(10, &[1.39, 0.32]), vec![8, 2]);

    let plan = compute_stage_plan(20, 2, 0.7, 0.9);
    assert_eq!(
        (plan.stage_budget, plan.stages, plan.fallback),
        (10, 2, false),
        "stage plan {plan:?}"
    );

    // Elite refit: with full weight on the refit, a node present in two of
    // the three elite samples must come out at exactly 2/3.
    let samples = vec![
        StoredSample { members: vec![0, 1], utility: 4.0 },
        StoredSample { members: vec![1, 2], utility: 3.0 },
        StoredSample { members: vec![2, 3], utility: 2.0 },
        StoredSample { members: vec![3], utility: 1.0 },
    ];
    let (probs, gamma) = ce_update(&samples, 0.75, f64::NEG_INFINITY, 1.0, &ProbVec::uniform(4));
    assert!((gamma - 2.0).abs() < FORMULA_TOL);
    assert!((probs.get(1) - 2.0 / 3.0).abs() < FORMULA_TOL, "refit weight {}", probs.get(1));

    println!("acceptance: formula fidelity PASS (win weight, budget split, stage plan, elite refit all within {FORMULA_TOL})");
}

#[test]
fn matches_exhaustive_search_on_small_instances() {
    let _g = gate();
    let betas = [0.0, 0.5, 1.0];
    let mut matches = 0usize;
    let total = 200usize;
    for i in 0..total {
        let n = 4 + i % 9;
        let k_max = (2 + i % 5).min(n);
        let beta = betas[i % 3];
        let mean_degree = 2.5 + (i / 3 % 3) as f64 * 1.5;
        let g = gen_synthetic(&SynthConfig {
            n,
            model: EdgeModel::Random { mean_degree },
            seed: 1000 + i as u64,
            ..SynthConfig::default()
        });
        // Two falling price segments with a step up between them.
        let split = 1 + i % 11;
        let lo = 0.2 + 0.05 * (i % 7) as f64;
        let hi = lo + 0.3 + 0.1 * (i % 4) as f64;
        let cost = CostFunction::new(vec![
            CostSegment { k_lo: 1, k_hi: split, intercept: lo, slope: -lo / 24.0 },
            CostSegment { k_lo: split + 1, k_hi: 12, intercept: hi, slope: -hi / 48.0 },
        ])
        .unwrap();
        let params = UtilityParams { beta, lambda: 1.0, k_max };

        let exact = exact_solve(&g, &cost, &params, DEFAULT_ENUMERATION_CAP).unwrap();
        let cfg = BargsConfig { total_budget: 500, seed: 1000 + i as u64, ..BargsConfig::default() };
        let got = solve(&g, &cost, &params, &cfg).unwrap();
        assert!(
            got.best.utility <= exact.best.utility + ORACLE_TOL,
            "instance {i}: sampled {} above exhaustive {}",
            got.best.utility,
            exact.best.utility
        );
        let greedy = dgreedy_solve(&g, &cost, &params).unwrap();
        assert!(
            greedy.utility <= exact.best.utility + ORACLE_TOL,
            "instance {i}: greedy {} above exhaustive {}",
            greedy.utility,
            exact.best.utility
        );
        if exact.best.utility - got.best.utility <= ORACLE_TOL {
            matches += 1;
        }
    }
    let rate = matches as f64 / total as f64;
    assert!(
        rate >= ORACLE_MATCH_RATE,
        "only {matches}/{total} instances matched the exhaustive optimum"
    );
    println!(
        "acceptance: exhaustive-search agreement PASS ({matches}/{total} optima matched, never exceeded, greedy never exceeded)"
    );
}

#[test]
fn beats_greedy_baselines_at_equal_budget() {
    let _g = gate();
    let budget = 2000usize;
    let seeds = 20u64;
    let (mut sum_b, mut sum_r, mut sum_d) = (0.0, 0.0, 0.0);
    for seed in 0..seeds {
        let g = desk_graph(seed);
        let cost = linear_cost(g.node_count());
        let params = desk_params();
        sum_d += dgreedy_solve(&g, &cost, &params).unwrap().utility;
        let rg = RandomGreedyConfig { total_budget: budget, start_nodes: None, seed };
        sum_r += rgreedy_solve(&g, &cost, &params, &rg).unwrap().utility;
        sum_b += tuned_solve(&g, budget, seed).best.utility;
    }
    let (mean_b, mean_r, mean_d) =
        (sum_b / seeds as f64, sum_r / seeds as f64, sum_d / seeds as f64);
    assert!(
        mean_b > mean_r && mean_r > mean_d,
        "mean utilities out of order: staged {mean_b}, restarted greedy {mean_r}, greedy {mean_d}"
    );
    println!(
        "acceptance: quality ordering PASS (mean utility over {seeds} graphs: staged {mean_b:.3} > restarted greedy {mean_r:.3} > greedy {mean_d:.3})"
    );
}

#[test]
fn more_budget_never_hurts() {
    let _g = gate();
    let budgets = [250usize, 500, 1000, 2000];
    let seeds = 10u64;
    let g = desk_graph(100);
    let mut means = Vec::new();
    let mut variances = Vec::new();
    for &budget in &budgets {
        let utilities: Vec<f64> =
            (0..seeds).map(|seed| tuned_solve(&g, budget, seed).best.utility).collect();
        let mean = utilities.iter().sum::<f64>() / seeds as f64;
        let var = utilities.iter().map(|u| (u - mean).powi(2)).sum::<f64>() / (seeds - 1) as f64;
        means.push(mean);
        variances.push(var);
    }
    // One pooled standard error: average the per-budget variances, divide by
    // the per-budget sample count.
    let pooled_se = (variances.iter().sum::<f64>() / variances.len() as f64 / seeds as f64).sqrt();
    for w in means.windows(2) {
        assert!(
            w[1] >= w[0] - pooled_se,
            "mean utility dropped from {} to {} (allowed slack {pooled_se})",
            w[0],
            w[1]
        );
    }
    println!(
        "acceptance: budget monotonicity PASS (means {:?} non-decreasing within one pooled SE {pooled_se:.4})",
        means.iter().map(|m| (m * 1000.0).round() / 1000.0).collect::<Vec<_>>()
    );
}

#[test]
fn assertions_active_in_test_builds() {
    let _g = gate();
    assert!(
        cfg!(debug_assertions),
        "test profile must compile with debug assertions so the solver's \
         internal audits (budget conservation, fresh-run accounting, \
         connectivity, threshold monotonicity, weight normalization) are live"
    );
    // Drive the solver with sample retention on and audit what it kept.
    let g = desk_graph(31);
    let cost = linear_cost(g.node_count());
    let params = desk_params();
    let cfg = BargsConfig {
        total_budget: 600,
        start_nodes: Some(60),
        alpha: 0.0789,
        seed: 31,
        keep_samples: true,
        ..BargsConfig::default()
    };
    let res = solve(&g, &cost, &params, &cfg).unwrap();
    assert!(res.trace.windows(2).all(|w| w[0] <= w[1]), "best-so-far trace decreased");
    let samples = res.samples.as_ref().unwrap();
    assert!(!samples.is_empty());
    for s in samples {
        assert!(is_connected(&g, &s.members), "disconnected sample {:?}", s.members);
        let check = evaluate_utility(&g, &cost, &params, &s.members).unwrap();
        assert!(
            (check.utility - s.utility).abs() <= 1e-9,
            "stored utility {} disagrees with recomputation {}",
            s.utility,
            check.utility
        );
    }
    println!(
        "acceptance: invariant suite PASS (debug assertions live; {} retained samples all connected and re-scored)",
        samples.len()
    );
}

#[test]
fn identical_results_across_worker_counts() {
    let _g = gate();
    let g = desk_graph(7);
    let dir = tempfile::tempdir().unwrap();
    let mut outputs = Vec::new();
    for &workers in &[1usize, 4, 8] {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build().unwrap();
        let (res, elapsed) = pool.install(|| {
            let start = Instant::now();
            let res = tuned_solve(&g, 2000, 7);
            (res, start.elapsed())
        });
        let row = ResultRow {
            algorithm: "bargs".into(),
            n: g.node_count(),
            m: 120,
            k_max: 4,
            budget: 2000,
            seed: 7,
            best_size: res.best.members.len(),
            utility: res.best.utility,
            preference: res.best.preference,
            cost: res.best.cost,
            wall_clock_ms: elapsed.as_secs_f64() * 1e3,
            threads: workers,
        };
        let path = dir.path().join(format!("rows-{workers}.csv"));
        write_results(&path, &[row]).unwrap();
        outputs.push((workers, res.best.members.clone(), res.best.utility, path));
    }
    // The wall-clock cell varies run to run and the thread-count cell is the
    // quantity this experiment varies; everything else must match to the
    // byte.
    let masked: Vec<String> = outputs
        .iter()
        .map(|(_, _, _, path)| {
            let text = std::fs::read_to_string(path).unwrap();
            text.lines()
                .map(|line| {
                    let mut cells: Vec<&str> = line.split(',').collect();
                    if cells.len() >= 12 && cells[10] != "wall_clock_ms" {
                        cells[10] = "*";
                        cells[11] = "*";
                    }
                    cells.join(",")
                })
                .collect::<Vec<_>>()
                .join("\n")
        })
        .collect();
    for (workers, members, utility, _) in &outputs[1..] {
        assert_eq!(members, &outputs[0].1, "member set diverged at {workers} workers");
        assert_eq!(utility.to_bits(), outputs[0].2.to_bits(), "utility diverged at {workers} workers");
    }
    assert!(
        masked.iter().all(|m| m == &masked[0]),
        "result rows diverged beyond the wall-clock and thread-count cells"
    );
    println!(
        "acceptance: worker-count determinism PASS (1, 4, and 8 workers, identical rows modulo wall-clock and the varied thread-count cell)"
    );
}

/// Times one solve on the 10,000-node instance. The planner settings give
/// whole 125-run stages at every budget in the sweep, so the mix of
/// scouting and refit stages (and with it the cost of an average run) stays
/// comparable as the budget grows.
fn timed_solve(g: &SocialGraph, cost: &CostFunction, budget: usize) -> f64 {
    let cfg = BargsConfig {
        total_budget: budget,
        start_nodes: Some(100),
        alpha: 0.0168,
        seed: 0,
        ..BargsConfig::default()
    };
    let params = UtilityParams { beta: 1.0, lambda: 1.0, k_max: 20 };
    let once = || {
        let start = Instant::now();
        let res = solve(g, cost, &params, &cfg).unwrap();
        let dt = start.elapsed().as_secs_f64();
        assert_eq!(res.plan.stage_budget, 125, "unexpected stage plan {:?}", res.plan);
        assert!(res.best.utility.is_finite());
        dt
    };
    once();
    let mut runs: Vec<f64> = (0..5).map(|_| once()).collect();
    runs.sort_by(f64::total_cmp);
    runs[2]
}

/// Flat random graph for the timing checks: without hub nodes the frontier
/// stays small and uniform, so wall clock tracks the run count instead of
/// where the walks happen to concentrate.
fn big_graph() -> SocialGraph {
    gen_synthetic(&SynthConfig {
        n: 10_000,
        model: EdgeModel::Random { mean_degree: 10.0 },
        negative_edge_prob: 0.2,
        seed: 500,
        ..SynthConfig::default()
    })
}

#[test]
fn runtime_linear_in_budget() {
    let _g = gate();
    let g = big_graph();
    let cost = linear_cost(g.node_count());
    let budgets = [1000usize, 2000, 4000, 8000];
    let medians: Vec<f64> = budgets.iter().map(|&t| timed_solve(&g, &cost, t)).collect();

    // Least-squares line through (budget, time); every point must sit within
    // FIT_RESIDUAL_LIMIT of its fitted value.
    let xs: Vec<f64> = budgets.iter().map(|&t| t as f64).collect();
    let x_bar = xs.iter().sum::<f64>() / xs.len() as f64;
    let y_bar = medians.iter().sum::<f64>() / medians.len() as f64;
    let slope = xs
        .iter()
        .zip(&medians)
        .map(|(x, y)| (x - x_bar) * (y - y_bar))
        .sum::<f64>()
        / xs.iter().map(|x| (x - x_bar).powi(2)).sum::<f64>();
    let intercept = y_bar - slope * x_bar;
    let mut worst = 0.0f64;
    for (x, y) in xs.iter().zip(&medians) {
        let fitted = intercept + slope * x;
        worst = worst.max((y - fitted).abs() / fitted);
    }
    assert!(slope > 0.0, "wall clock did not grow with the budget: {medians:?}");
    assert!(
        worst <= FIT_RESIDUAL_LIMIT,
        "wall clock deviates from a line in the budget by {:.1}% (medians {medians:?})",
        worst * 100.0
    );
    println!(
        "acceptance: runtime scaling PASS (budget sweep {budgets:?} -> median seconds {:?}, worst linear-fit residual {:.1}%)",
        medians.iter().map(|m| (m * 1000.0).round() / 1000.0).collect::<Vec<_>>(),
        worst * 100.0
    );
}

#[test]
fn eight_worker_speedup() {
    let _g = gate();
    let g = big_graph();
    let cost = linear_cost(g.node_count());
    let time_with = |workers: usize| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(workers).build().unwrap();
        pool.install(|| timed_solve(&g, &cost, 8000))
    };
    let t1 = time_with(1);
    let t8 = time_with(8);
    let speedup = t1 / t8;
    let hardware = std::thread::available_parallelism().map(|p| p.get()).unwrap_or(1);
    let verdict = if speedup >= SPEEDUP_BAR { "PASS" } else { "FAIL" };
    println!(
        "acceptance: parallel speedup {verdict} (8 workers vs 1: {speedup:.2}x, bar {SPEEDUP_BAR}x, 1 worker {t1:.2}s, 8 workers {t8:.2}s, {hardware} hardware threads)"
    );
    // This is the multicore performance contract; a host with fewer
    // hardware threads than workers cannot meet it, and the measured
    // numbers above say why.
    assert!(
        speedup >= SPEEDUP_BAR,
        "8-worker speedup {speedup:.2}x below the {SPEEDUP_BAR}x bar ({hardware} hardware threads available)"
    );
}
