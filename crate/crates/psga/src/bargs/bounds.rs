//! A-priori guarantees for a staged allocation, useful for sizing budgets
//! before running anything.

/// Lower bound on the probability that the cell holding the final incumbent
/// really is the best (start node, size) pair.
///
/// Grows towards 1 as the total budget grows and shrinks as more cells
/// compete. Small budgets can make the bound vacuous (negative); the raw
/// value is returned either way so callers can see how far off they are.
pub fn selection_confidence_bound(
    m: usize,
    k_max: usize,
    total_budget: usize,
    stages: usize,
    alpha: f64,
) -> f64 {
    debug_assert!(m >= 1 && k_max >= 1 && stages >= 1);
    debug_assert!(alpha > 0.0 && alpha < 1.0);
    let exponent = total_budget as f64 / (stages * m * k_max) as f64;
    1.0 - 0.5 * (k_max + m - 2) as f64 * alpha.powf(exponent)
}

/// Expected solution-quality ratio bound plus the incumbent sample estimate
/// it is built on.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QualityBound {
    /// Estimated number of samples the incumbent cell accumulates.
    pub incumbent_samples: f64,
    /// Expected ratio of the reported best utility to the true optimum,
    /// in (0, 1).
    pub ratio: f64,
}

/// Bounds the expected quality of the returned group relative to the true
/// optimum, assuming the incumbent cell keeps attracting the budget share
/// the allocation rule gives it.
pub fn expected_quality_bound(
    m: usize,
    k_max: usize,
    total_budget: usize,
    stages: usize,
) -> QualityBound {
    debug_assert!(m >= 1 && k_max >= 1 && stages >= 1 && total_budget >= 1);
    let r = stages as f64;
    let cells = (m * k_max) as f64;
    let incumbent_samples = (4.0 + cells * (r - 1.0)) / (4.0 * r * cells) * total_budget as f64;
    let ratio = incumbent_samples * (1.0 / (incumbent_samples + 1.0)).powf(1.0 + 1.0 / incumbent_samples);
    QualityBound { incumbent_samples, ratio }
}
