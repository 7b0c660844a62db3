//! Instance files, synthetic instance generation, and result serialization.
//!
//! All files are UTF-8 text with `\n` line endings; lines starting with `#`
//! are comments. Node files hold `id<TAB>interest`, edge files
//! `u<TAB>v<TAB>tightness`, cost files `k_lo k_hi intercept slope`
//! (whitespace separated). Node ids in files may be sparse; loading remaps
//! them to dense 0..n-1 in first-seen order and returns the mapping.

use std::collections::{HashMap, HashSet};
use std::fs::{self, OpenOptions};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{CostError, CostFunction, CostSegment, GraphError, SocialGraph};

#[derive(Debug, Error)]
pub enum DataError {
    #[error("{file}: {source}")]
    File { file: String, source: std::io::Error },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("{file}:{line}: {what}")]
    Parse { file: String, line: usize, what: String },
    #[error("{file}:{line}: edge endpoint {id} is not a declared node")]
    DanglingEndpoint { file: String, line: usize, id: u32 },
    #[error("{file}:{line}: duplicate edge ({u}, {v})")]
    DuplicateEdge { file: String, line: usize, u: u32, v: u32 },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Cost(#[from] CostError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Comment-and-blank-skipping line iterator with 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn with_path<T>(r: std::io::Result<T>, path: &Path) -> Result<T, DataError> {
    r.map_err(|source| DataError::File { file: path.display().to_string(), source })
}

fn parse_err(file: &Path, line: usize, what: impl Into<String>) -> DataError {
    DataError::Parse {
        file: file.display().to_string(),
        line,
        what: what.into(),
    }
}

/// Loads a graph from a node file and an edge file. Returns the graph plus
/// the original id of each dense node index.
pub fn load_graph(
    nodes_path: impl AsRef<Path>,
    edges_path: impl AsRef<Path>,
) -> Result<(SocialGraph, Vec<u32>), DataError> {
    let nodes_path = nodes_path.as_ref();
    let edges_path = edges_path.as_ref();

    let mut ids: Vec<u32> = Vec::new();
    let mut interests: Vec<f64> = Vec::new();
    let mut dense: HashMap<u32, u32> = HashMap::new();
    let text = with_path(fs::read_to_string(nodes_path), nodes_path)?;
    for (lineno, line) in content_lines(&text) {
        let mut parts = line.split('\t');
        let (id, interest) = match (parts.next(), parts.next(), parts.next()) {
            (Some(a), Some(b), None) => (a, b),
            _ => return Err(parse_err(nodes_path, lineno, "expected `id<TAB>interest`")),
        };
        let id: u32 = id
            .parse()
            .map_err(|_| parse_err(nodes_path, lineno, format!("bad node id `{id}`")))?;
        let interest: f64 = interest
            .parse()
            .map_err(|_| parse_err(nodes_path, lineno, format!("bad interest `{interest}`")))?;
        if dense.insert(id, ids.len() as u32).is_some() {
            return Err(parse_err(nodes_path, lineno, format!("duplicate node id {id}")));
        }
        ids.push(id);
        interests.push(interest);
    }

    let mut edges: Vec<(u32, u32, f64)> = Vec::new();
    let mut seen: HashSet<(u32, u32)> = HashSet::new();
    let text = with_path(fs::read_to_string(edges_path), edges_path)?;
    for (lineno, line) in content_lines(&text) {
        let mut parts = line.split('\t');
        let (u, v, t) = match (parts.next(), parts.next(), parts.next(), parts.next()) {
            (Some(a), Some(b), Some(c), None) => (a, b, c),
            _ => {
                return Err(parse_err(
                    edges_path,
                    lineno,
                    "expected `u<TAB>v<TAB>tightness`",
                ))
            }
        };
        let u: u32 = u
            .parse()
            .map_err(|_| parse_err(edges_path, lineno, format!("bad endpoint `{u}`")))?;
        let v: u32 = v
            .parse()
            .map_err(|_| parse_err(edges_path, lineno, format!("bad endpoint `{v}`")))?;
        let t: f64 = t
            .parse()
            .map_err(|_| parse_err(edges_path, lineno, format!("bad tightness `{t}`")))?;
        let dangling = |id| DataError::DanglingEndpoint {
            file: edges_path.display().to_string(),
            line: lineno,
            id,
        };
        let du = *dense.get(&u).ok_or_else(|| dangling(u))?;
        let dv = *dense.get(&v).ok_or_else(|| dangling(v))?;
        if !seen.insert((du.min(dv), du.max(dv))) {
            return Err(DataError::DuplicateEdge {
                file: edges_path.display().to_string(),
                line: lineno,
                u,
                v,
            });
        }
        edges.push((du, dv, t));
    }

    let g = SocialGraph::new(interests, &edges)?;
    Ok((g, ids))
}

/// Writes a graph as a node file and an edge file, using `ids[i]` as the
/// external id of node `i`. Floats are printed in shortest round-trip form,
/// so a reload reproduces the graph exactly.
pub fn write_graph(
    nodes_path: impl AsRef<Path>,
    edges_path: impl AsRef<Path>,
    g: &SocialGraph,
    ids: &[u32],
) -> Result<(), DataError> {
    assert_eq!(ids.len(), g.node_count());
    let nodes_path = nodes_path.as_ref();
    let edges_path = edges_path.as_ref();
    let mut nodes = String::from("# node_id\tinterest\n");
    for v in 0..g.node_count() as u32 {
        nodes.push_str(&format!("{}\t{}\n", ids[v as usize], g.interest(v)));
    }
    with_path(fs::write(nodes_path, nodes), nodes_path)?;

    let mut edges = String::from("# u\tv\ttightness\n");
    for (u, v, t) in g.edges() {
        edges.push_str(&format!("{}\t{}\t{}\n", ids[u as usize], ids[v as usize], t));
    }
    with_path(fs::write(edges_path, edges), edges_path)?;
    Ok(())
}

/// Loads a piecewise-linear cost function from lines of
/// `k_lo k_hi intercept slope`.
pub fn load_cost(path: impl AsRef<Path>) -> Result<CostFunction, DataError> {
    let path = path.as_ref();
    let text = with_path(fs::read_to_string(path), path)?;
    let mut segments = Vec::new();
    for (lineno, line) in content_lines(&text) {
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 4 {
            return Err(parse_err(path, lineno, "expected `k_lo k_hi intercept slope`"));
        }
        let k_lo: usize = fields[0]
            .parse()
            .map_err(|_| parse_err(path, lineno, format!("bad k_lo `{}`", fields[0])))?;
        let k_hi: usize = fields[1]
            .parse()
            .map_err(|_| parse_err(path, lineno, format!("bad k_hi `{}`", fields[1])))?;
        let intercept: f64 = fields[2]
            .parse()
            .map_err(|_| parse_err(path, lineno, format!("bad intercept `{}`", fields[2])))?;
        let slope: f64 = fields[3]
            .parse()
            .map_err(|_| parse_err(path, lineno, format!("bad slope `{}`", fields[3])))?;
        segments.push(CostSegment { k_lo, k_hi, intercept, slope });
    }
    Ok(CostFunction::new(segments)?)
}

/// Edge-generation model for synthetic instances.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EdgeModel {
    /// Every pair independently with probability `mean_degree / (n - 1)`.
    Random { mean_degree: f64 },
    /// Preferential attachment: a seed clique of `edges_per_node` nodes,
    /// then each new node links to that many distinct existing nodes with
    /// probability proportional to degree.
    PreferentialAttachment { edges_per_node: usize },
}

/// Synthetic instance settings.
#[derive(Debug, Clone)]
pub struct SynthConfig {
    pub n: usize,
    pub model: EdgeModel,
    /// Power-law exponent of the interest distribution.
    pub exponent: f64,
    /// Interests land in `(0, interest_scale]`.
    pub interest_scale: f64,
    /// Probability that an edge's tightness is flipped negative.
    pub negative_edge_prob: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n: 2,
            model: EdgeModel::Random { mean_degree: 4.0 },
            exponent: 2.5,
            interest_scale: 1.0,
            negative_edge_prob: 0.0,
            seed: 0,
        }
    }
}

/// Resolution of the discretized power law behind interest sampling.
const INTEREST_LEVELS: u32 = 1000;

/// Generates a synthetic instance. Interests follow a discrete power law
/// over `INTEREST_LEVELS` levels rescaled to `(0, interest_scale]`;
/// tightness is each edge's common-neighbour count normalized so the
/// largest count maps to 1 (all zero when no edge has common neighbours),
/// then sign-flipped with the configured probability. Equal seeds give
/// bit-identical graphs.
pub fn gen_synthetic(cfg: &SynthConfig) -> SocialGraph {
    assert!(cfg.n >= 2, "need at least two nodes");
    assert!(cfg.exponent > 0.0 && cfg.exponent.is_finite());
    assert!(cfg.interest_scale > 0.0 && cfg.interest_scale.is_finite());
    assert!((0.0..1.0).contains(&cfg.negative_edge_prob));

    // Independent streams per phase keep the draws decoupled.
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(0);
    let cumulative: Vec<f64> = {
        let mut acc = 0.0;
        (1..=INTEREST_LEVELS)
            .map(|z| {
                acc += (z as f64).powf(-cfg.exponent);
                acc
            })
            .collect()
    };
    let total = *cumulative.last().unwrap();
    let interests: Vec<f64> = (0..cfg.n)
        .map(|_| {
            let u = rng.random::<f64>() * total;
            let z = cumulative.partition_point(|&c| c <= u) + 1;
            cfg.interest_scale * (z.min(INTEREST_LEVELS as usize) as f64)
                / INTEREST_LEVELS as f64
        })
        .collect();

    rng.set_stream(1);
    let mut edges: Vec<(u32, u32)> = match cfg.model {
        EdgeModel::Random { mean_degree } => {
            assert!(mean_degree >= 0.0);
            let p = (mean_degree / (cfg.n - 1) as f64).clamp(0.0, 1.0);
            let mut edges = Vec::new();
            for u in 0..cfg.n as u32 {
                for v in u + 1..cfg.n as u32 {
                    if rng.random_bool(p) {
                        edges.push((u, v));
                    }
                }
            }
            edges
        }
        EdgeModel::PreferentialAttachment { edges_per_node } => {
            assert!(edges_per_node >= 1 && edges_per_node < cfg.n);
            let a = edges_per_node;
            let mut edges = Vec::new();
            // Endpoint multiset: picking a uniform entry picks a node with
            // probability proportional to its degree.
            let mut endpoints: Vec<u32> = Vec::new();
            for u in 0..a as u32 {
                for v in u + 1..a as u32 {
                    edges.push((u, v));
                    endpoints.push(u);
                    endpoints.push(v);
                }
            }
            for t in a..cfg.n {
                let mut chosen: Vec<u32> = Vec::with_capacity(a);
                while chosen.len() < a {
                    let cand = if endpoints.is_empty() {
                        rng.random_range(0..t as u32)
                    } else {
                        endpoints[rng.random_range(0..endpoints.len())]
                    };
                    if !chosen.contains(&cand) {
                        chosen.push(cand);
                    }
                }
                for &v in &chosen {
                    edges.push((v.min(t as u32), v.max(t as u32)));
                    endpoints.push(v);
                    endpoints.push(t as u32);
                }
            }
            edges
        }
    };
    edges.sort_unstable();

    // Tightness from common-neighbour counts.
    let mut adj: Vec<Vec<u32>> = vec![Vec::new(); cfg.n];
    for &(u, v) in &edges {
        adj[u as usize].push(v);
        adj[v as usize].push(u);
    }
    for nb in &mut adj {
        nb.sort_unstable();
    }
    let common = |u: u32, v: u32| {
        let (a, b) = (&adj[u as usize], &adj[v as usize]);
        let (mut i, mut j, mut c) = (0, 0, 0u32);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    c += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
        c
    };
    let counts: Vec<u32> = edges.iter().map(|&(u, v)| common(u, v)).collect();
    let max_count = counts.iter().copied().max().unwrap_or(0);

    rng.set_stream(2);
    let weighted: Vec<(u32, u32, f64)> = edges
        .iter()
        .zip(&counts)
        .map(|(&(u, v), &c)| {
            let mut t = if max_count == 0 { 0.0 } else { c as f64 / max_count as f64 };
            if cfg.negative_edge_prob > 0.0 && rng.random_bool(cfg.negative_edge_prob) {
                t = -t;
            }
            (u, v, t)
        })
        .collect();

    SocialGraph::new(interests, &weighted).expect("generated edges are valid")
}

/// One benchmark record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub algorithm: String,
    pub n: usize,
    /// Start-node count; 0 for solvers without one.
    pub m: usize,
    pub k_max: usize,
    /// Run budget; 0 for solvers without one.
    pub budget: usize,
    pub seed: u64,
    pub best_size: usize,
    pub utility: f64,
    pub preference: f64,
    pub cost: f64,
    pub wall_clock_ms: f64,
    pub threads: usize,
}

/// Appends rows to a results CSV, writing the header only when the file is
/// new or empty.
pub fn write_results(path: impl AsRef<Path>, rows: &[ResultRow]) -> Result<(), DataError> {
    assert!(!rows.is_empty(), "refusing to write an empty result set");
    for row in rows {
        debug_assert!((row.utility - (row.preference - row.cost)).abs() <= 1e-9);
    }
    let file = with_path(
        OpenOptions::new().create(true).append(true).open(path.as_ref()),
        path.as_ref(),
    )?;
    let need_header = file.metadata()?.len() == 0;
    let mut w = csv::WriterBuilder::new()
        .has_headers(need_header)
        .from_writer(file);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads back a results CSV written by [`write_results`].
pub fn read_results(path: impl AsRef<Path>) -> Result<Vec<ResultRow>, DataError> {
    let mut r = csv::Reader::from_path(path.as_ref())?;
    let mut rows = Vec::new();
    for row in r.deserialize() {
        rows.push(row?);
    }
    Ok(rows)
}
