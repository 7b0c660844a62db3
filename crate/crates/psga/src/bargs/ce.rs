//! Cross-entropy refit of node-selection weights from elite samples.

use std::collections::HashMap;

/// Sparse selection weights over nodes: one shared default plus per-node
/// overrides. Starts uniform; refits touch only nodes that have appeared in
/// an elite sample, so memory stays proportional to what was actually seen.
#[derive(Debug, Clone)]
pub struct ProbVec {
    default: f64,
    overrides: HashMap<u32, f64>,
}

impl ProbVec {
    /// Uniform weights over `n` nodes.
    pub fn uniform(n: usize) -> Self {
        assert!(n > 0);
        ProbVec { default: 1.0 / n as f64, overrides: HashMap::new() }
    }

    /// Weight of node `v`.
    pub fn get(&self, v: u32) -> f64 {
        self.overrides.get(&v).copied().unwrap_or(self.default)
    }

    /// Weight of every node not individually overridden.
    pub fn default_weight(&self) -> f64 {
        self.default
    }

    /// Number of per-node overrides.
    pub fn override_count(&self) -> usize {
        self.overrides.len()
    }
}

/// One recorded group sample: member ids (sorted) and the group's utility.
#[derive(Debug, Clone)]
pub struct StoredSample {
    pub members: Vec<u32>,
    pub utility: f64,
}

/// Refits selection weights from one cell's stage samples.
///
/// Samples are ranked by utility (ties keep their original order) and the
/// elite threshold is the utility at rank `ceil(rho * count)`, never allowed
/// to drop below `gamma_prev`. Elite membership frequencies are blended into
/// the previous weights with smoothing weight `w` on the fresh frequencies.
/// When no sample reaches the threshold, weights and threshold both carry
/// over unchanged.
///
/// Returns the next weights and threshold.
pub fn ce_update(
    samples: &[StoredSample],
    rho: f64,
    gamma_prev: f64,
    w: f64,
    probs_prev: &ProbVec,
) -> (ProbVec, f64) {
    assert!(!samples.is_empty(), "refit needs at least one sample");
    debug_assert!(rho > 0.0 && rho < 1.0);
    debug_assert!((0.0..=1.0).contains(&w));

    let mut order: Vec<usize> = (0..samples.len()).collect();
    order.sort_by(|&a, &b| samples[b].utility.total_cmp(&samples[a].utility).then(a.cmp(&b)));
    let rank = ((rho * samples.len() as f64).ceil() as usize).clamp(1, samples.len());
    let candidate = samples[order[rank - 1]].utility;
    let gamma_next = if candidate > gamma_prev { candidate } else { gamma_prev };

    let elite: Vec<&StoredSample> = samples.iter().filter(|s| s.utility >= gamma_next).collect();
    if elite.is_empty() {
        return (probs_prev.clone(), gamma_prev);
    }

    let e = elite.len() as f64;
    let mut counts: HashMap<u32, u32> = HashMap::new();
    for s in &elite {
        for &v in &s.members {
            *counts.entry(v).or_insert(0) += 1;
        }
    }

    let keep = 1.0 - w;
    let mut overrides: HashMap<u32, f64> = HashMap::with_capacity(counts.len());
    for (&v, &c) in &counts {
        overrides.insert(v, w * (c as f64 / e) + keep * probs_prev.get(v));
    }
    // Nodes previously overridden but absent from every elite sample decay
    // towards zero frequency.
    for (&v, &p) in &probs_prev.overrides {
        overrides.entry(v).or_insert(keep * p);
    }

    let next = ProbVec { default: keep * probs_prev.default, overrides };
    (next, gamma_next)
}
