//! A small hand-built instance used across tests, docs, and examples.
//!
//! Six nodes with a mix of positive and negative ties. Node 4 holds the top
//! interest score (0.7); node 1 has the highest combined interest-plus-ties
//! score (2.2) and node 5 the second highest (1.8). With `beta = 0.01` and
//! the two-segment cost below, the best group of size at most 4 is
//! `{0, 1, 3}` with utility 1.6, while a deterministic greedy walk from
//! node 4 peaks at size 3 with utility 0.5.

use crate::graph::{CostFunction, CostSegment, SocialGraph, UtilityParams};

/// The 6-node demo graph.
pub fn demo_graph() -> SocialGraph {
    SocialGraph::new(
        vec![0.6, 0.6, 0.2, 0.6, 0.7, 0.6],
        &[
            (0, 1, 0.7),
            (0, 2, -0.5),
            (0, 3, 0.5),
            (1, 2, 0.9),
            (1, 3, 0.6),
            (1, 4, -0.6),
            (2, 3, -0.3),
            (2, 4, -0.3),
            (2, 5, 0.7),
            (3, 4, 0.1),
            (4, 5, 0.5),
        ],
    )
    .expect("demo graph is valid")
}

/// Cost table for the demo: 400, 300, 200 then 350, 500, 650.
pub fn demo_cost() -> CostFunction {
    CostFunction::new(vec![
        CostSegment { k_lo: 1, k_hi: 3, intercept: 500.0, slope: -100.0 },
        CostSegment { k_lo: 4, k_hi: 6, intercept: -250.0, slope: 150.0 },
    ])
    .expect("demo cost is valid")
}

/// Demo utility weights: `beta = 0.01`, `lambda = 1`, groups up to 4.
pub fn demo_params() -> UtilityParams {
    UtilityParams { beta: 0.01, lambda: 1.0, k_max: 4 }
}
