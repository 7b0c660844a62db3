//! Stage planning and integer budget allocation.

/// Outcome of stage planning.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StagePlan {
    /// Runs available to each stage.
    pub stage_budget: usize,
    /// Number of stages.
    pub stages: usize,
    /// True when the planning formula degenerated and the solver fell back
    /// to a single stage.
    pub fallback: bool,
}

/// Splits a total run budget into equally sized stages.
///
/// The per-stage budget grows with the start-node count `m` and with how
/// close to 1 the confidence target `p_cs` and closeness ratio `alpha` sit.
/// A single node, a budget below one stage, or a degenerate formula input
/// all collapse to one stage spending everything.
pub fn compute_stage_plan(total_budget: usize, m: usize, p_cs: f64, alpha: f64) -> StagePlan {
    debug_assert!(total_budget >= 1 && m >= 1);
    debug_assert!(p_cs > 0.0 && p_cs < 1.0);
    debug_assert!(alpha > 0.0 && alpha < 1.0);
    let single = |fallback| StagePlan {
        stage_budget: total_budget,
        stages: 1,
        fallback,
    };
    if m == 1 {
        return single(false);
    }
    let ratio = 2.0 * (1.0 - p_cs) / (m as f64 - 1.0);
    if ratio >= 1.0 {
        // ln(ratio) would be non-negative against ln(alpha) < 0; no positive
        // stage budget exists.
        return single(true);
    }
    let stage_budget = (m as f64 * ratio.ln() / alpha.ln()).ceil() as usize;
    if stage_budget >= total_budget {
        return single(false);
    }
    StagePlan {
        stage_budget,
        stages: total_budget / stage_budget,
        fallback: false,
    }
}

/// Chance that cell `(i, k)` with utility range maximum `d_ik` and `n_ik`
/// samples eventually beats the incumbent cell spanning `[c_b, d_b]`.
///
/// Zero when the cell tops out below the incumbent's minimum; otherwise the
/// range ratio raised to the sample count, clamped to `[0, 1]`. Callers score
/// the incumbent cell itself as 1 directly. A collapsed incumbent range turns
/// this into a step function at `c_b`.
pub fn win_probability(d_ik: f64, c_b: f64, d_b: f64, n_ik: u64) -> f64 {
    debug_assert!(d_b >= c_b);
    if d_ik <= c_b {
        return 0.0;
    }
    if d_b <= c_b {
        return 1.0;
    }
    let ratio = (d_ik - c_b) / (d_b - c_b);
    ratio.powf(n_ik as f64).clamp(0.0, 1.0)
}

/// Largest-remainder rounding of `total * w_i / sum(w)` into integers that
/// sum to exactly `total`. Zero-weight entries always receive zero; leftover
/// units go to the largest fractional parts, earlier index first on ties.
pub fn largest_remainder(total: usize, weights: &[f64]) -> Vec<usize> {
    assert!(!weights.is_empty(), "allocation needs at least one weight");
    assert!(
        weights.iter().all(|w| w.is_finite() && *w >= 0.0),
        "allocation weights must be finite and non-negative"
    );
    let sum: f64 = weights.iter().sum();
    assert!(sum > 0.0, "allocation weights must not all be zero");
    let shares: Vec<f64> = weights
        .iter()
        .map(|w| total as f64 * w / sum)
        .collect();
    let mut out: Vec<usize> = shares.iter().map(|s| s.floor() as usize).collect();
    let assigned: usize = out.iter().sum();
    let leftover = total.saturating_sub(assigned);
    if leftover > 0 {
        let mut order: Vec<usize> = (0..weights.len()).filter(|&i| weights[i] > 0.0).collect();
        order.sort_by(|&a, &b| {
            let fa = shares[a] - shares[a].floor();
            let fb = shares[b] - shares[b].floor();
            fb.total_cmp(&fa).then(a.cmp(&b))
        });
        assert!(leftover <= order.len(), "more leftover units than recipients");
        for &i in order.iter().take(leftover) {
            out[i] += 1;
        }
    }
    debug_assert_eq!(out.iter().sum::<usize>(), total);
    out
}

/// Splits a stage budget over start nodes in proportion to their scores.
pub fn allocate_node_budgets(scores: &[f64], stage_budget: usize) -> Vec<usize> {
    largest_remainder(stage_budget, scores)
}

/// Splits one node's budget over group sizes in proportion to the per-size
/// win probabilities.
pub fn allocate_size_budgets(win_probs: &[f64], node_budget: usize) -> Vec<usize> {
    largest_remainder(node_budget, win_probs)
}

/// Converts per-size sample targets into fresh full-length runs, exploiting
/// that a run to size `l` yields one sample at every size up to `l`.
/// Processed from the largest size down; entry `k - 1` holds size `k`.
pub fn reallocate_fresh_runs(size_targets: &[usize]) -> Vec<usize> {
    let mut fresh = vec![0usize; size_targets.len()];
    let mut tail = 0usize;
    for k in (0..size_targets.len()).rev() {
        fresh[k] = size_targets[k].saturating_sub(tail);
        tail += fresh[k];
    }
    fresh
}
