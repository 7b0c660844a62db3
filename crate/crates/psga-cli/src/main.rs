use std::path::PathBuf;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use psga::bargs::{self, bounds, BargsConfig};
use psga::baselines::{dgreedy_solve, rgreedy_solve, RandomGreedyConfig};
use psga::data_io::{
    gen_synthetic, load_cost, load_graph, write_graph, write_results, EdgeModel, ResultRow,
    SynthConfig,
};
use psga::oracle::exact_solve;
use psga::{CostFunction, GroupSelection, SocialGraph, UtilityParams};

#[derive(Parser)]
#[command(
    name = "psga",
    version,
    about = "Choose a connected activity group that balances member interest, \
             pairwise social tightness, and a size-dependent venue cost"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a synthetic instance (node and edge files)
    Gen(GenArgs),
    /// Run a solver on an instance
    Solve(SolveArgs),
    /// Exhaustively enumerate connected groups (small instances only)
    Exact(ExactArgs),
    /// Print a-priori selection-confidence and quality bounds
    Bounds(BoundsArgs),
    /// Sweep one parameter over synthetic instances, appending result rows
    Bench(BenchArgs),
}

#[derive(Args)]
struct GenArgs {
    /// Number of nodes
    #[arg(long)]
    n: usize,
    /// Edge model: `random:<mean_degree>` or `pa:<edges_per_node>`
    #[arg(long)]
    model: String,
    /// Power-law exponent of the interest distribution
    #[arg(long, default_value_t = 2.5)]
    exponent: f64,
    /// Probability of flipping an edge's tightness negative
    #[arg(long, default_value_t = 0.0)]
    neg_prob: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output node file
    #[arg(long)]
    out_nodes: PathBuf,
    /// Output edge file
    #[arg(long)]
    out_edges: PathBuf,
}

#[derive(Args)]
struct InstanceArgs {
    /// Node file: `id<TAB>interest` per line
    #[arg(long)]
    nodes: PathBuf,
    /// Edge file: `u<TAB>v<TAB>tightness` per line
    #[arg(long)]
    edges: PathBuf,
    /// Cost file: `k_lo k_hi intercept slope` per line
    #[arg(long)]
    cost: PathBuf,
    /// Cost weight
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    /// Tightness weight
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    /// Maximum group size
    #[arg(long)]
    kmax: usize,
}

#[derive(Args)]
struct ControlArgs {
    /// Start-node count; default rounds n / kmax up
    #[arg(long)]
    m: Option<usize>,
    /// Stage-planning closeness ratio in (0, 1)
    #[arg(long, default_value_t = 0.99)]
    alpha: f64,
    /// Elite fraction in (0, 1)
    #[arg(long, default_value_t = 0.3)]
    rho: f64,
    /// Start-node selection confidence target in (0, 1)
    #[arg(long, default_value_t = 0.7)]
    pcs: f64,
    /// Weight on freshly fitted selection probabilities in [0, 1]
    #[arg(long, default_value_t = 0.7)]
    smooth: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads; 0 uses all available cores
    #[arg(long, default_value_t = 1)]
    threads: usize,
}

#[derive(Args)]
struct SolveArgs {
    /// Solver to run
    #[arg(long, value_enum)]
    algo: Algo,
    #[command(flatten)]
    instance: InstanceArgs,
    /// Total expansion-run budget (bargs and rgreedy)
    #[arg(long)]
    budget: Option<usize>,
    #[command(flatten)]
    control: ControlArgs,
    /// Results CSV to append a row to
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExactArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    /// Abort after enumerating this many connected sets
    #[arg(long, default_value_t = psga::oracle::DEFAULT_ENUMERATION_CAP)]
    cap: u64,
}

#[derive(Args)]
struct BoundsArgs {
    /// Start-node count
    #[arg(long)]
    m: usize,
    /// Maximum group size
    #[arg(long)]
    kmax: usize,
    /// Total run budget
    #[arg(long)]
    budget: usize,
    /// Stage count
    #[arg(long)]
    r: usize,
    /// Closeness ratio in (0, 1)
    #[arg(long)]
    alpha: f64,
}

#[derive(Args)]
struct BenchArgs {
    /// Parameter to sweep
    #[arg(long, value_enum)]
    sweep: SweepKind,
    /// Values the swept parameter takes
    #[arg(long, num_args = 1.., required = true)]
    values: Vec<usize>,
    /// Repeats per value, varying the seed
    #[arg(long, default_value_t = 1)]
    repeats: usize,
    /// Solvers to run
    #[arg(long, value_enum, default_value = "all")]
    algo: BenchAlgo,
    /// Base node count (swept values override under `--sweep n`)
    #[arg(long, default_value_t = 2000)]
    n: usize,
    /// Edge model: `random:<mean_degree>` or `pa:<edges_per_node>`
    #[arg(long, default_value = "pa:5")]
    model: String,
    #[arg(long, default_value_t = 2.5)]
    exponent: f64,
    #[arg(long, default_value_t = 0.0)]
    neg_prob: f64,
    /// Cost file applied to every instance
    #[arg(long)]
    cost: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    #[arg(long)]
    kmax: usize,
    /// Base run budget (swept values override under `--sweep budget`)
    #[arg(long, default_value_t = 1000)]
    budget: usize,
    #[command(flatten)]
    control: ControlArgs,
    /// Results CSV to append to
    #[arg(long)]
    out: PathBuf,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum Algo {
    Bargs,
    Dgreedy,
    Rgreedy,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum BenchAlgo {
    Bargs,
    Dgreedy,
    Rgreedy,
    All,
}

#[derive(Copy, Clone, PartialEq, Eq, ValueEnum)]
enum SweepKind {
    Budget,
    N,
    M,
}

fn main() -> Result<()> {
    match Cli::parse().cmd {
        Cmd::Gen(args) => gen(args),
        Cmd::Solve(args) => solve(args),
        Cmd::Exact(args) => exact(args),
        Cmd::Bounds(args) => print_bounds(args),
        Cmd::Bench(args) => bench(args),
    }
}

fn parse_model(s: &str) -> Result<EdgeModel> {
    let (kind, value) = s
        .split_once(':')
        .context("model must be `random:<mean_degree>` or `pa:<edges_per_node>`")?;
    match kind {
        "random" => Ok(EdgeModel::Random {
            mean_degree: value.parse().context("bad mean degree")?,
        }),
        "pa" => Ok(EdgeModel::PreferentialAttachment {
            edges_per_node: value.parse().context("bad edges-per-node")?,
        }),
        other => bail!("unknown edge model `{other}`"),
    }
}

fn gen(args: GenArgs) -> Result<()> {
    let cfg = SynthConfig {
        n: args.n,
        model: parse_model(&args.model)?,
        exponent: args.exponent,
        interest_scale: 1.0,
        negative_edge_prob: args.neg_prob,
        seed: args.seed,
    };
    anyhow::ensure!(cfg.n >= 2, "--n must be at least 2");
    anyhow::ensure!(
        (0.0..1.0).contains(&cfg.negative_edge_prob),
        "--neg-prob must lie in [0, 1)"
    );
    let g = gen_synthetic(&cfg);
    let ids: Vec<u32> = (0..g.node_count() as u32).collect();
    write_graph(&args.out_nodes, &args.out_edges, &g, &ids)?;
    println!(
        "wrote {} nodes to {} and {} edges to {}",
        g.node_count(),
        args.out_nodes.display(),
        g.edge_count(),
        args.out_edges.display()
    );
    Ok(())
}

fn load_instance(args: &InstanceArgs) -> Result<(SocialGraph, Vec<u32>, CostFunction, UtilityParams)> {
    let (g, ids) = load_graph(&args.nodes, &args.edges)?;
    let cost = load_cost(&args.cost)?;
    let params = UtilityParams {
        beta: args.beta,
        lambda: args.lambda,
        k_max: args.kmax,
    };
    Ok((g, ids, cost, params))
}

fn thread_pool(threads: usize) -> Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if threads > 0 {
        builder = builder.num_threads(threads);
    }
    builder.build().context("building the worker pool")
}

fn members_in_original_ids(sel: &GroupSelection, ids: &[u32]) -> Vec<u32> {
    sel.members.iter().map(|&v| ids[v as usize]).collect()
}

fn print_selection(label: &str, sel: &GroupSelection, ids: &[u32]) {
    let members: Vec<String> = members_in_original_ids(sel, ids)
        .iter()
        .map(|id| id.to_string())
        .collect();
    println!("{label} members: {{{}}}", members.join(", "));
    println!(
        "size: {}  utility: {}  preference: {}  cost: {}",
        sel.members.len(),
        sel.utility,
        sel.preference,
        sel.cost
    );
}

struct SolverRun {
    selection: GroupSelection,
    m: usize,
    budget: usize,
    wall_clock_ms: f64,
}

fn run_algo(
    algo: Algo,
    g: &SocialGraph,
    cost: &CostFunction,
    params: &UtilityParams,
    budget: Option<usize>,
    control: &ControlArgs,
    pool: &rayon::ThreadPool,
) -> Result<SolverRun> {
    let t0 = Instant::now();
    let (selection, m, budget) = match algo {
        Algo::Bargs => {
            let cfg = BargsConfig {
                total_budget: budget.context("--budget is required for bargs")?,
                start_nodes: control.m,
                alpha: control.alpha,
                rho: control.rho,
                p_cs: control.pcs,
                smoothing: control.smooth,
                seed: control.seed,
                keep_samples: false,
            };
            let res = pool.install(|| bargs::solve(g, cost, params, &cfg))?;
            (res.best, res.start_nodes.len(), cfg.total_budget)
        }
        Algo::Dgreedy => (dgreedy_solve(g, cost, params)?, 0, 0),
        Algo::Rgreedy => {
            let cfg = RandomGreedyConfig {
                total_budget: budget.context("--budget is required for rgreedy")?,
                start_nodes: control.m,
                seed: control.seed,
            };
            let sel = pool.install(|| rgreedy_solve(g, cost, params, &cfg))?;
            let m = control.m.unwrap_or_else(|| g.node_count().div_ceil(params.k_max));
            (sel, m, cfg.total_budget)
        }
    };
    Ok(SolverRun {
        selection,
        m,
        budget,
        wall_clock_ms: t0.elapsed().as_secs_f64() * 1e3,
    })
}

fn algo_name(algo: Algo) -> &'static str {
    match algo {
        Algo::Bargs => "bargs",
        Algo::Dgreedy => "dgreedy",
        Algo::Rgreedy => "rgreedy",
    }
}

fn result_row(
    algo: Algo,
    run: &SolverRun,
    g: &SocialGraph,
    params: &UtilityParams,
    seed: u64,
    threads: usize,
) -> ResultRow {
    ResultRow {
        algorithm: algo_name(algo).to_string(),
        n: g.node_count(),
        m: run.m,
        k_max: params.k_max,
        budget: run.budget,
        seed,
        best_size: run.selection.members.len(),
        utility: run.selection.utility,
        preference: run.selection.preference,
        cost: run.selection.cost,
        wall_clock_ms: run.wall_clock_ms,
        threads,
    }
}

fn solve(args: SolveArgs) -> Result<()> {
    let (g, ids, cost, params) = load_instance(&args.instance)?;
    let pool = thread_pool(args.control.threads)?;
    let threads = pool.current_num_threads();
    let run = run_algo(args.algo, &g, &cost, &params, args.budget, &args.control, &pool)?;
    print_selection(algo_name(args.algo), &run.selection, &ids);
    if let Some(out) = &args.out {
        let row = result_row(args.algo, &run, &g, &params, args.control.seed, threads);
        write_results(out, &[row])?;
        println!("appended a result row to {}", out.display());
    }
    Ok(())
}

fn exact(args: ExactArgs) -> Result<()> {
    let (g, ids, cost, params) = load_instance(&args.instance)?;
    let t0 = Instant::now();
    let res = exact_solve(&g, &cost, &params, args.cap)?;
    print_selection("exact", &res.best, &ids);
    println!(
        "enumerated {} connected sets in {:.1} ms",
        res.enumerated,
        t0.elapsed().as_secs_f64() * 1e3
    );
    for (size, utility) in &res.per_size_best {
        println!("best at size {size}: {utility}");
    }
    Ok(())
}

fn print_bounds(args: BoundsArgs) -> Result<()> {
    anyhow::ensure!(args.m >= 1 && args.kmax >= 1 && args.r >= 1 && args.budget >= 1);
    anyhow::ensure!(
        args.alpha > 0.0 && args.alpha < 1.0,
        "--alpha must lie in (0, 1)"
    );
    let conf = bounds::selection_confidence_bound(args.m, args.kmax, args.budget, args.r, args.alpha);
    let quality = bounds::expected_quality_bound(args.m, args.kmax, args.budget, args.r);
    println!("selection confidence bound: {conf:.4}");
    println!("incumbent sample estimate: {}", quality.incumbent_samples);
    println!("expected quality ratio: {:.4}", quality.ratio);
    Ok(())
}

fn bench(args: BenchArgs) -> Result<()> {
    let model = parse_model(&args.model)?;
    let cost = load_cost(&args.cost)?;
    let pool = thread_pool(args.control.threads)?;
    let threads = pool.current_num_threads();
    let algos: &[Algo] = match args.algo {
        BenchAlgo::Bargs => &[Algo::Bargs],
        BenchAlgo::Dgreedy => &[Algo::Dgreedy],
        BenchAlgo::Rgreedy => &[Algo::Rgreedy],
        BenchAlgo::All => &[Algo::Bargs, Algo::Rgreedy, Algo::Dgreedy],
    };
    anyhow::ensure!(args.repeats >= 1, "--repeats must be at least 1");

    for &value in &args.values {
        for rep in 0..args.repeats {
            let seed = args.control.seed + rep as u64;
            let n = if args.sweep == SweepKind::N { value } else { args.n };
            let g = gen_synthetic(&SynthConfig {
                n,
                model,
                exponent: args.exponent,
                interest_scale: 1.0,
                negative_edge_prob: args.neg_prob,
                seed,
            });
            let params = UtilityParams {
                beta: args.beta,
                lambda: args.lambda,
                k_max: args.kmax,
            };
            let budget = if args.sweep == SweepKind::Budget { value } else { args.budget };
            let control = ControlArgs {
                m: if args.sweep == SweepKind::M { Some(value) } else { args.control.m },
                seed,
                ..args.control
            };
            for &algo in algos {
                let run = run_algo(algo, &g, &cost, &params, Some(budget), &control, &pool)?;
                let row = result_row(algo, &run, &g, &params, seed, threads);
                println!(
                    "sweep value {value} repeat {rep} {}: utility {} in {:.1} ms",
                    row.algorithm, row.utility, row.wall_clock_ms
                );
                write_results(&args.out, &[row])?;
            }
        }
    }
    println!("results appended to {}", args.out.display());
    Ok(())
}
