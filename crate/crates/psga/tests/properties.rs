//! Cross-module checks on randomized instances: the solvers against the
//! exhaustive oracle, the enumerator against brute force, and the solver's
//! externally visible bookkeeping.

use std::collections::BTreeSet;

use proptest::prelude::*;

use psga::bargs::{ce_update, solve, BargsConfig, ProbVec, StoredSample};
use psga::baselines::{dgreedy_solve, rgreedy_solve, RandomGreedyConfig};
use psga::data_io::{gen_synthetic, EdgeModel, SynthConfig};
use psga::graph::{evaluate_utility, is_connected};
use psga::oracle::{enumerate_connected, exact_solve, DEFAULT_ENUMERATION_CAP};
use psga::{CostFunction, CostSegment, SocialGraph, UtilityParams};

/// Plain disjoint-set union, kept separate from the library's traversal so
/// the two connectivity answers are independent.
struct Dsu(Vec<usize>);

impl Dsu {
    fn new(n: usize) -> Self {
        Dsu((0..n).collect())
    }

    fn find(&mut self, x: usize) -> usize {
        if self.0[x] != x {
            let root = self.find(self.0[x]);
            self.0[x] = root;
        }
        self.0[x]
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        self.0[ra] = rb;
    }
}

fn connected_by_dsu(edges: &[(u32, u32)], members: &[u32]) -> bool {
    if members.is_empty() {
        return false;
    }
    let index = |v: u32| members.iter().position(|&u| u == v);
    let mut dsu = Dsu::new(members.len());
    for &(u, v) in edges {
        if let (Some(a), Some(b)) = (index(u), index(v)) {
            dsu.union(a, b);
        }
    }
    let root = dsu.find(0);
    (1..members.len()).all(|i| dsu.find(i) == root)
}

/// Builds a graph over `n` nodes from an edge bitmask laid out pair by pair
/// in (u, v) order with u < v.
fn graph_from_mask(n: usize, mask: u64, weights: &[f64]) -> (SocialGraph, Vec<(u32, u32)>) {
    let mut edges = Vec::new();
    let mut bit = 0u32;
    for u in 0..n as u32 {
        for v in u + 1..n as u32 {
            if mask >> bit & 1 == 1 {
                let w = weights[bit as usize % weights.len()];
                edges.push((u, v, w));
            }
            bit += 1;
        }
    }
    let interests: Vec<f64> = (0..n).map(|i| 0.1 + 0.07 * i as f64).collect();
    let pairs = edges.iter().map(|&(u, v, _)| (u, v)).collect();
    (SocialGraph::new(interests, &edges).unwrap(), pairs)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// Library connectivity agrees with disjoint-set union on arbitrary
    /// member subsets of arbitrary graphs.
    #[test]
    fn connectivity_matches_disjoint_sets(
        n in 2usize..10,
        mask in any::<u64>(),
        subset in any::<u32>(),
    ) {
        let (g, pairs) = graph_from_mask(n, mask, &[0.3, -0.2, 0.8]);
        let members: Vec<u32> = (0..n as u32).filter(|v| subset >> v & 1 == 1).collect();
        prop_assume!(!members.is_empty());
        prop_assert_eq!(is_connected(&g, &members), connected_by_dsu(&pairs, &members));
    }

    /// The connected-set enumerator visits exactly the sets a brute-force
    /// pass over all subsets accepts, each of them once.
    #[test]
    fn enumeration_is_complete_and_duplicate_free(
        n in 2usize..8,
        mask in any::<u64>(),
    ) {
        let (g, pairs) = graph_from_mask(n, mask, &[1.0]);
        let mut seen: BTreeSet<Vec<u32>> = BTreeSet::new();
        let mut duplicated = false;
        let count = enumerate_connected(&g, n, |set| {
            let mut sorted = set.to_vec();
            sorted.sort_unstable();
            duplicated |= !seen.insert(sorted);
        });
        prop_assert!(!duplicated, "a set was visited twice");
        let mut expected: BTreeSet<Vec<u32>> = BTreeSet::new();
        for subset in 1u32..1 << n {
            let members: Vec<u32> = (0..n as u32).filter(|v| subset >> v & 1 == 1).collect();
            if connected_by_dsu(&pairs, &members) {
                expected.insert(members);
            }
        }
        prop_assert_eq!(count as usize, expected.len());
        prop_assert_eq!(seen, expected);
    }

    /// No solver returns a utility above the exhaustive optimum, and every
    /// returned group is connected, within the size limit, and scored
    /// consistently with a from-scratch evaluation.
    #[test]
    fn solvers_never_beat_exhaustive_search(
        n in 5usize..10,
        mask in any::<u64>(),
        beta in prop_oneof![Just(0.0), Just(0.6), Just(1.0)],
        seed in any::<u64>(),
    ) {
        let (g, _) = graph_from_mask(n, mask, &[0.4, -0.3, 0.9, 0.2]);
        let cost = CostFunction::new(vec![
            CostSegment { k_lo: 1, k_hi: 3, intercept: 0.1, slope: 0.05 },
            CostSegment { k_lo: 4, k_hi: 10, intercept: 0.8, slope: 0.01 },
        ]).unwrap();
        let params = UtilityParams { beta, lambda: 1.0, k_max: 5.min(n) };
        let exact = exact_solve(&g, &cost, &params, DEFAULT_ENUMERATION_CAP).unwrap();

        let mut found = vec![dgreedy_solve(&g, &cost, &params).unwrap()];
        let rg = RandomGreedyConfig { total_budget: 60, start_nodes: None, seed };
        found.push(rgreedy_solve(&g, &cost, &params, &rg).unwrap());
        let cfg = BargsConfig { total_budget: 120, seed, ..BargsConfig::default() };
        found.push(solve(&g, &cost, &params, &cfg).unwrap().best);

        for sel in found {
            prop_assert!(sel.utility <= exact.best.utility + 1e-9);
            prop_assert!(!sel.members.is_empty() && sel.members.len() <= params.k_max);
            prop_assert!(is_connected(&g, &sel.members));
            let check = evaluate_utility(&g, &cost, &params, &sel.members).unwrap();
            prop_assert!((check.utility - sel.utility).abs() <= 1e-9);
        }
    }

    /// The elite-refit threshold never falls across chained updates, and
    /// with full weight on the refit the new weights are exactly the elite
    /// membership frequencies.
    #[test]
    fn refit_threshold_is_monotone(
        utilities in prop::collection::vec(-5.0f64..5.0, 3..20),
        rho in 0.1f64..0.9,
    ) {
        let samples: Vec<StoredSample> = utilities
            .iter()
            .enumerate()
            .map(|(i, &u)| StoredSample { members: vec![i as u32 % 5], utility: u })
            .collect();
        let probs = ProbVec::uniform(5);
        let (probs, gamma1) = ce_update(&samples, rho, f64::NEG_INFINITY, 1.0, &probs);
        let (_, gamma2) = ce_update(&samples, rho, gamma1, 1.0, &probs);
        prop_assert!(gamma2 >= gamma1);

        let elite: Vec<&StoredSample> =
            samples.iter().filter(|s| s.utility >= gamma1).collect();
        if !elite.is_empty() {
            for v in 0..5u32 {
                let freq = elite.iter().filter(|s| s.members.contains(&v)).count() as f64
                    / elite.len() as f64;
                prop_assert!((probs.get(v) - freq).abs() <= 1e-12);
            }
        }
    }
}

/// The solver's published per-stage records stay consistent on a real
/// instance: spent budgets match the plan, pruned starts never come back,
/// realized sample counts cover their targets, and the best-so-far trace
/// never falls.
#[test]
fn stage_records_stay_consistent() {
    let g = gen_synthetic(&SynthConfig {
        n: 600,
        model: EdgeModel::PreferentialAttachment { edges_per_node: 5 },
        negative_edge_prob: 0.2,
        seed: 9,
        ..SynthConfig::default()
    });
    let cost = CostFunction::new(vec![CostSegment {
        k_lo: 1,
        k_hi: 600,
        intercept: 0.0,
        slope: 0.05,
    }])
    .unwrap();
    let params = UtilityParams { beta: 1.0, lambda: 1.0, k_max: 5 };
    let cfg = BargsConfig {
        total_budget: 900,
        start_nodes: Some(40),
        alpha: 0.15,
        seed: 9,
        ..BargsConfig::default()
    };
    let res = solve(&g, &cost, &params, &cfg).unwrap();
    assert!(res.plan.stages >= 3, "wanted a multi-stage plan, got {:?}", res.plan);
    assert_eq!(res.trace.len(), res.plan.stages);
    assert!(res.trace.windows(2).all(|w| w[0] <= w[1]));

    let mut prev_alive: Option<BTreeSet<usize>> = None;
    for st in &res.stages {
        let spent: usize = st.node_budgets.iter().map(|&(_, b)| b).sum();
        assert_eq!(spent, res.plan.stage_budget, "stage {} spend", st.stage);
        let alive: BTreeSet<usize> = st.node_budgets.iter().map(|&(p, _)| p).collect();
        if let Some(prev) = prev_alive.replace(alive.clone()) {
            assert!(alive.is_subset(&prev), "stage {} revived a pruned start", st.stage);
        }
        for (row, (pos, targets)) in st.size_targets.iter().enumerate() {
            assert_eq!(*pos, st.node_budgets[row].0);
            let planned: usize = targets.iter().sum();
            assert_eq!(planned, st.node_budgets[row].1, "stage {} row {row}", st.stage);
            for (k, (&target, &got)) in
                targets.iter().zip(&st.realized[row].1).enumerate()
            {
                assert!(
                    got >= target,
                    "stage {} start {pos} size {}: realized {got} under target {target}",
                    st.stage,
                    k + 1
                );
            }
        }
    }
    let best_recomputed = evaluate_utility(&g, &cost, &params, &res.best.members).unwrap();
    assert!((best_recomputed.utility - res.best.utility).abs() <= 1e-9);
}

/// Generated interests follow the intended heavy-tailed shape: level 1 is
/// the most common, and the level-1 to level-2 frequency ratio sits near
/// 2^2.5. Regeneration with the same seed is identical, with another seed
/// different.
#[test]
fn interest_distribution_shape_and_determinism() {
    let cfg = SynthConfig {
        n: 20_000,
        model: EdgeModel::Random { mean_degree: 4.0 },
        seed: 77,
        ..SynthConfig::default()
    };
    let g = gen_synthetic(&cfg);
    let interests: Vec<f64> = (0..g.node_count() as u32).map(|v| g.interest(v)).collect();
    let level = |x: f64| (x * 1000.0).round() as u32;
    let ones = interests.iter().filter(|&&x| level(x) == 1).count() as f64;
    let twos = interests.iter().filter(|&&x| level(x) == 2).count() as f64;
    let ratio = ones / twos;
    let want = 2f64.powf(2.5);
    assert!(
        (ratio - want).abs() < 1.2,
        "level-1/level-2 ratio {ratio:.2}, expected near {want:.2}"
    );
    assert!(interests.iter().all(|&x| x > 0.0 && x <= 1.0));

    let again = gen_synthetic(&cfg);
    let reread: Vec<f64> = (0..again.node_count() as u32).map(|v| again.interest(v)).collect();
    assert_eq!(
        interests.iter().map(|x| x.to_bits()).collect::<Vec<_>>(),
        reread.iter().map(|x| x.to_bits()).collect::<Vec<_>>()
    );
    let other = gen_synthetic(&SynthConfig { seed: 78, ..cfg });
    let shifted: Vec<f64> = (0..other.node_count() as u32).map(|v| other.interest(v)).collect();
    assert_ne!(
        interests.iter().map(|x| x.to_bits()).collect::<Vec<_>>(),
        shifted.iter().map(|x| x.to_bits()).collect::<Vec<_>>()
    );
}
