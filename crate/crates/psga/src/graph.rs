//! Social graph, activity cost, and group utility evaluation.
//!
//! Nodes carry interest scores and edges carry social tightness; negative
//! ties are allowed. A group's preference is the sum of member interests plus
//! `lambda` times the tightness of every internal edge, each edge counted
//! once. Utility subtracts `beta` times a piecewise-linear size cost.

use thiserror::Error;

/// Errors from graph construction.
#[derive(Debug, Error, PartialEq)]
pub enum GraphError {
    #[error("edge endpoint {0} out of range for {1} nodes")]
    EndpointOutOfRange(u32, usize),
    #[error("self-loop on node {0}")]
    SelfLoop(u32),
    #[error("duplicate edge between {0} and {1}")]
    DuplicateEdge(u32, u32),
    #[error("interest score at node {0} is not finite")]
    NonFiniteInterest(u32),
    #[error("tightness on edge ({0}, {1}) is not finite")]
    NonFiniteTightness(u32, u32),
}

/// Errors from cost-function construction and evaluation.
#[derive(Debug, Error, PartialEq)]
pub enum CostError {
    #[error("cost function has no segments")]
    Empty,
    #[error("segment {index} covers {lo}..={hi}, expected it to start at {expected}")]
    NotContiguous {
        index: usize,
        lo: usize,
        hi: usize,
        expected: usize,
    },
    #[error("cost is negative ({value}) at group size {size}")]
    Negative { size: usize, value: f64 },
    #[error("cost coefficient in segment {0} is not finite")]
    NonFinite(usize),
    #[error("group size {0} outside the cost domain 0..={1}")]
    OutOfDomain(usize, usize),
}

/// Errors from utility-parameter validation.
#[derive(Debug, Error, PartialEq)]
pub enum ParamsError {
    #[error("beta must be finite and non-negative, got {0}")]
    BadBeta(f64),
    #[error("lambda must be finite and non-negative, got {0}")]
    BadLambda(f64),
    #[error("k_max must be at least 1")]
    ZeroKMax,
    #[error("k_max {0} exceeds node count {1}")]
    KMaxExceedsNodes(usize, usize),
    #[error("k_max {0} exceeds cost domain {1}")]
    KMaxExceedsCostDomain(usize, usize),
}

/// Undirected social graph with dense node ids `0..n`.
///
/// At most one edge per pair and no self-loops. Adjacency is stored in CSR
/// form, sorted by neighbor id within each node's slice.
#[derive(Debug, Clone)]
pub struct SocialGraph {
    interests: Vec<f64>,
    offsets: Vec<usize>,
    adj: Vec<(u32, f64)>,
    edge_count: usize,
}

impl SocialGraph {
    /// Builds a graph from interest scores and an undirected edge list.
    pub fn new(interests: Vec<f64>, edges: &[(u32, u32, f64)]) -> Result<Self, GraphError> {
        let n = interests.len();
        for (i, &s) in interests.iter().enumerate() {
            if !s.is_finite() {
                return Err(GraphError::NonFiniteInterest(i as u32));
            }
        }
        let mut degree = vec![0usize; n];
        for &(u, v, t) in edges {
            for e in [u, v] {
                if e as usize >= n {
                    return Err(GraphError::EndpointOutOfRange(e, n));
                }
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            if !t.is_finite() {
                return Err(GraphError::NonFiniteTightness(u, v));
            }
            degree[u as usize] += 1;
            degree[v as usize] += 1;
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0usize);
        for d in &degree {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut adj = vec![(0u32, 0f64); offsets[n]];
        let mut cursor = offsets[..n].to_vec();
        for &(u, v, t) in edges {
            adj[cursor[u as usize]] = (v, t);
            cursor[u as usize] += 1;
            adj[cursor[v as usize]] = (u, t);
            cursor[v as usize] += 1;
        }
        for u in 0..n {
            let slice = &mut adj[offsets[u]..offsets[u + 1]];
            slice.sort_unstable_by_key(|&(v, _)| v);
            for w in slice.windows(2) {
                if w[0].0 == w[1].0 {
                    let (a, b) = (u as u32, w[0].0);
                    return Err(GraphError::DuplicateEdge(a.min(b), a.max(b)));
                }
            }
        }
        Ok(Self {
            interests,
            offsets,
            adj,
            edge_count: edges.len(),
        })
    }

    /// Number of nodes.
    pub fn node_count(&self) -> usize {
        self.interests.len()
    }

    /// Number of undirected edges.
    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    /// Interest score of node `u`.
    pub fn interest(&self, u: u32) -> f64 {
        self.interests[u as usize]
    }

    /// Neighbors of `u` with tightness, sorted by neighbor id.
    pub fn neighbors(&self, u: u32) -> &[(u32, f64)] {
        &self.adj[self.offsets[u as usize]..self.offsets[u as usize + 1]]
    }

    /// Degree of node `u`.
    pub fn degree(&self, u: u32) -> usize {
        self.neighbors(u).len()
    }

    /// Tightness of edge `(u, v)`, or `None` when absent.
    pub fn tightness(&self, u: u32, v: u32) -> Option<f64> {
        let nbrs = self.neighbors(u);
        nbrs.binary_search_by_key(&v, |&(w, _)| w)
            .ok()
            .map(|i| nbrs[i].1)
    }

    /// Each undirected edge once, as `(u, v, tightness)` with `u < v`.
    pub fn edges(&self) -> impl Iterator<Item = (u32, u32, f64)> + '_ {
        (0..self.node_count() as u32).flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .filter(move |&&(v, _)| u < v)
                .map(move |&(v, t)| (u, v, t))
        })
    }
}

/// One linear piece of the activity cost: `intercept + slope * k` on `k_lo..=k_hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostSegment {
    pub k_lo: usize,
    pub k_hi: usize,
    pub intercept: f64,
    pub slope: f64,
}

/// Piecewise-linear group-size cost over a contiguous domain starting at 1.
///
/// `eval(0)` is 0 by convention. The cost is validated non-negative over the
/// whole domain at construction.
#[derive(Debug, Clone, PartialEq)]
pub struct CostFunction {
    segments: Vec<CostSegment>,
}

impl CostFunction {
    /// Builds a cost function, checking contiguity and non-negativity.
    pub fn new(segments: Vec<CostSegment>) -> Result<Self, CostError> {
        if segments.is_empty() {
            return Err(CostError::Empty);
        }
        let mut expected = 1usize;
        for (index, seg) in segments.iter().enumerate() {
            if seg.k_lo != expected || seg.k_hi < seg.k_lo {
                return Err(CostError::NotContiguous {
                    index,
                    lo: seg.k_lo,
                    hi: seg.k_hi,
                    expected,
                });
            }
            if !seg.intercept.is_finite() || !seg.slope.is_finite() {
                return Err(CostError::NonFinite(index));
            }
            // Linear on the segment, so the minimum sits at an endpoint.
            for size in [seg.k_lo, seg.k_hi] {
                let value = seg.intercept + seg.slope * size as f64;
                if value < 0.0 {
                    return Err(CostError::Negative { size, value });
                }
            }
            expected = seg.k_hi + 1;
        }
        Ok(Self { segments })
    }

    /// A constant-zero cost over `1..=k_max`.
    pub fn zero(k_max: usize) -> Self {
        Self::new(vec![CostSegment {
            k_lo: 1,
            k_hi: k_max.max(1),
            intercept: 0.0,
            slope: 0.0,
        }])
        .expect("zero cost is valid")
    }

    /// Largest group size the cost is defined for.
    pub fn max_size(&self) -> usize {
        self.segments.last().expect("non-empty").k_hi
    }

    /// The segments, in domain order.
    pub fn segments(&self) -> &[CostSegment] {
        &self.segments
    }

    /// Unscaled cost of a group of `k` members; `k = 0` costs nothing.
    pub fn eval(&self, k: usize) -> Result<f64, CostError> {
        if k == 0 {
            return Ok(0.0);
        }
        if k > self.max_size() {
            return Err(CostError::OutOfDomain(k, self.max_size()));
        }
        let idx = self
            .segments
            .partition_point(|seg| seg.k_hi < k);
        let seg = &self.segments[idx];
        debug_assert!(seg.k_lo <= k && k <= seg.k_hi);
        Ok(seg.intercept + seg.slope * k as f64)
    }
}

/// Weights of the utility objective and the group-size limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UtilityParams {
    /// Cost weight, non-negative.
    pub beta: f64,
    /// Tightness weight, non-negative.
    pub lambda: f64,
    /// Largest admissible group size.
    pub k_max: usize,
}

impl UtilityParams {
    /// Checks the parameters against a graph and cost function.
    pub fn validate(&self, g: &SocialGraph, cost: &CostFunction) -> Result<(), ParamsError> {
        if !self.beta.is_finite() || self.beta < 0.0 {
            return Err(ParamsError::BadBeta(self.beta));
        }
        if !self.lambda.is_finite() || self.lambda < 0.0 {
            return Err(ParamsError::BadLambda(self.lambda));
        }
        if self.k_max == 0 {
            return Err(ParamsError::ZeroKMax);
        }
        if self.k_max > g.node_count() {
            return Err(ParamsError::KMaxExceedsNodes(self.k_max, g.node_count()));
        }
        if self.k_max > cost.max_size() {
            return Err(ParamsError::KMaxExceedsCostDomain(
                self.k_max,
                cost.max_size(),
            ));
        }
        Ok(())
    }
}

/// A selected group with its canonical evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupSelection {
    /// Member ids, ascending.
    pub members: Vec<u32>,
    /// Interest plus weighted internal tightness.
    pub preference: f64,
    /// `beta` times the size cost, so `utility = preference - cost` exactly.
    pub cost: f64,
    /// Preference minus cost.
    pub utility: f64,
    /// Whether the members induce a connected subgraph.
    pub connected: bool,
}

/// Total preference of a member set: interests plus `lambda` times the
/// tightness of internal edges, each edge counted once.
///
/// Members are processed in ascending id order so equal sets produce
/// bit-identical sums regardless of input order.
pub fn evaluate_preference(g: &SocialGraph, members: &[u32], lambda: f64) -> f64 {
    let mut sorted: Vec<u32> = members.to_vec();
    sorted.sort_unstable();
    debug_assert!(sorted.windows(2).all(|w| w[0] != w[1]), "members repeat");
    let mut interest = 0.0;
    let mut ties = 0.0;
    for &u in &sorted {
        interest += g.interest(u);
        for &(v, t) in g.neighbors(u) {
            // u < v keeps each internal edge in the sum exactly once.
            if u < v && sorted.binary_search(&v).is_ok() {
                ties += t;
            }
        }
    }
    interest + lambda * ties
}

/// Evaluates a member set into a [`GroupSelection`], including a
/// connectivity check. Fails when the size falls outside the cost domain.
pub fn evaluate_utility(
    g: &SocialGraph,
    cost: &CostFunction,
    params: &UtilityParams,
    members: &[u32],
) -> Result<GroupSelection, CostError> {
    let mut sorted: Vec<u32> = members.to_vec();
    sorted.sort_unstable();
    let preference = evaluate_preference(g, &sorted, params.lambda);
    let charged = params.beta * cost.eval(sorted.len())?;
    let connected = is_connected(g, &sorted);
    Ok(GroupSelection {
        utility: preference - charged,
        preference,
        cost: charged,
        members: sorted,
        connected,
    })
}

/// Whether `members` induce a connected subgraph. The empty set counts as
/// connected.
pub fn is_connected(g: &SocialGraph, members: &[u32]) -> bool {
    if members.len() <= 1 {
        return true;
    }
    let mut sorted: Vec<u32> = members.to_vec();
    sorted.sort_unstable();
    let mut seen = vec![false; sorted.len()];
    let mut queue = vec![0usize];
    seen[0] = true;
    let mut reached = 1usize;
    while let Some(idx) = queue.pop() {
        for &(v, _) in g.neighbors(sorted[idx]) {
            if let Ok(j) = sorted.binary_search(&v) {
                if !seen[j] {
                    seen[j] = true;
                    reached += 1;
                    queue.push(j);
                }
            }
        }
    }
    reached == sorted.len()
}

/// Returns a copy of the graph plus a virtual hub node (id `n`) with zero
/// interest and zero-tightness edges to every original node, making any
/// member set connectable through the hub without changing preferences.
pub fn virtualize_connectivity(g: &SocialGraph) -> SocialGraph {
    let n = g.node_count();
    let mut interests = Vec::with_capacity(n + 1);
    for u in 0..n as u32 {
        interests.push(g.interest(u));
    }
    interests.push(0.0);
    let mut edges: Vec<(u32, u32, f64)> = g.edges().collect();
    edges.extend((0..n as u32).map(|u| (u, n as u32, 0.0)));
    SocialGraph::new(interests, &edges).expect("hub edges are fresh and valid")
}
