//! Exact ground truth by enumeration of connected induced subgraphs.
//!
//! Enumeration is rooted: for each root in increasing id order it grows the
//! sets whose minimum id is that root, extending only through frontier
//! neighbors with larger ids and consuming candidates left to right so every
//! set appears exactly once. Intended for desk-scale instances; a cap bounds
//! the number of visited sets.

use std::collections::BTreeMap;
use std::ops::ControlFlow;

use thiserror::Error;

use crate::graph::{
    evaluate_utility, CostError, CostFunction, GroupSelection, ParamsError, SocialGraph,
    UtilityParams,
};

/// Default bound on enumerated sets before [`exact_solve`] gives up.
pub const DEFAULT_ENUMERATION_CAP: u64 = 50_000_000;

/// Errors from exact solving.
#[derive(Debug, Error)]
pub enum OracleError {
    #[error("enumeration exceeded the cap of {0} sets; raise the cap or shrink the instance")]
    CapExceeded(u64),
    #[error(transparent)]
    Params(#[from] ParamsError),
    #[error(transparent)]
    Cost(#[from] CostError),
}

/// Result of an exhaustive search.
#[derive(Debug, Clone)]
pub struct OracleResult {
    /// The best group; ties go to the smaller size, then the
    /// lexicographically smallest member set.
    pub best: GroupSelection,
    /// Best utility among connected sets of each exact size that admits one.
    pub per_size_best: BTreeMap<usize, f64>,
    /// Number of sets enumerated.
    pub enumerated: u64,
}

/// Visits every connected induced subgraph with `1..=k_max` nodes exactly
/// once and returns how many there are. Member slices arrive in discovery
/// order, not sorted.
pub fn enumerate_connected(
    g: &SocialGraph,
    k_max: usize,
    mut visit: impl FnMut(&[u32]),
) -> u64 {
    let mut count = 0u64;
    let _ = try_enumerate_connected(g, k_max, |set| {
        count += 1;
        visit(set);
        ControlFlow::Continue(())
    });
    count
}

/// Like [`enumerate_connected`] but the callback can stop the walk early.
pub fn try_enumerate_connected(
    g: &SocialGraph,
    k_max: usize,
    mut visit: impl FnMut(&[u32]) -> ControlFlow<()>,
) -> ControlFlow<()> {
    if k_max == 0 {
        return ControlFlow::Continue(());
    }
    let n = g.node_count();
    // visited = current set plus every candidate offered on the path so far;
    // consumed candidates stay marked, which is what prevents duplicates.
    let mut visited = vec![false; n];
    let mut p: Vec<u32> = Vec::with_capacity(k_max);
    for root in 0..n as u32 {
        p.push(root);
        visited[root as usize] = true;
        let cands: Vec<u32> = g
            .neighbors(root)
            .iter()
            .map(|&(v, _)| v)
            .filter(|&v| v > root)
            .collect();
        for &c in &cands {
            visited[c as usize] = true;
        }
        let flow = extend(g, k_max, root, &mut p, &cands, &mut visited, &mut visit);
        for &c in &cands {
            visited[c as usize] = false;
        }
        visited[root as usize] = false;
        p.pop();
        flow?;
    }
    ControlFlow::Continue(())
}

fn extend(
    g: &SocialGraph,
    k_max: usize,
    root: u32,
    p: &mut Vec<u32>,
    cands: &[u32],
    visited: &mut [bool],
    visit: &mut impl FnMut(&[u32]) -> ControlFlow<()>,
) -> ControlFlow<()> {
    visit(p)?;
    if p.len() == k_max {
        return ControlFlow::Continue(());
    }
    for i in 0..cands.len() {
        let u = cands[i];
        p.push(u);
        // Children extend through the remaining siblings plus u's unseen
        // neighbors; earlier siblings stay blocked via `visited`.
        let mut child: Vec<u32> = cands[i + 1..].to_vec();
        let fresh_from = child.len();
        for &(w, _) in g.neighbors(u) {
            if w > root && !visited[w as usize] {
                visited[w as usize] = true;
                child.push(w);
            }
        }
        let flow = extend(g, k_max, root, p, &child, visited, visit);
        for &w in &child[fresh_from..] {
            visited[w as usize] = false;
        }
        p.pop();
        flow?;
    }
    ControlFlow::Continue(())
}

/// Finds the utility-optimal connected group of size at most `params.k_max`
/// by exhaustive enumeration, bounded by `cap` visited sets.
pub fn exact_solve(
    g: &SocialGraph,
    cost: &CostFunction,
    params: &UtilityParams,
    cap: u64,
) -> Result<OracleResult, OracleError> {
    params.validate(g, cost)?;
    let mut enumerated = 0u64;
    let mut capped = false;
    let mut best: Option<GroupSelection> = None;
    let mut per_size_best: BTreeMap<usize, f64> = BTreeMap::new();
    let _ = try_enumerate_connected(g, params.k_max, |set| {
        enumerated += 1;
        if enumerated > cap {
            capped = true;
            return ControlFlow::Break(());
        }
        let sel = evaluate_utility(g, cost, params, set).expect("size within validated domain");
        debug_assert!(sel.connected, "enumerated set must be connected");
        per_size_best
            .entry(sel.members.len())
            .and_modify(|u| *u = u.max(sel.utility))
            .or_insert(sel.utility);
        let better = match &best {
            None => true,
            Some(b) => {
                sel.utility > b.utility
                    || (sel.utility == b.utility
                        && (sel.members.len() < b.members.len()
                            || (sel.members.len() == b.members.len()
                                && sel.members < b.members)))
            }
        };
        if better {
            best = Some(sel);
        }
        ControlFlow::Continue(())
    });
    if capped {
        return Err(OracleError::CapExceeded(cap));
    }
    let best = best.expect("validated k_max >= 1 guarantees singleton candidates");
    Ok(OracleResult {
        best,
        per_size_best,
        enumerated,
    })
}
