//! Per-cell sample bookkeeping. A cell is one (start position, group size)
//! pair; cumulative utility-range statistics live for the whole solve while
//! raw samples are only buffered for the current stage's refit.

use super::ce::StoredSample;

/// Cumulative utility statistics of one cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellStats {
    pub min_utility: f64,
    pub max_utility: f64,
    /// Number of samples recorded so far.
    pub samples: u64,
}

/// Exported snapshot of one cell, keyed by the actual start node id.
#[derive(Debug, Clone, PartialEq)]
pub struct PoolCellSummary {
    pub start: u32,
    pub size: usize,
    pub min_utility: f64,
    pub max_utility: f64,
    pub samples: u64,
}

pub struct SamplePool {
    k_max: usize,
    cells: Vec<Option<CellStats>>,
    stage: Vec<Vec<StoredSample>>,
}

impl SamplePool {
    pub fn new(m: usize, k_max: usize) -> Self {
        assert!(m >= 1 && k_max >= 1);
        SamplePool {
            k_max,
            cells: vec![None; m * k_max],
            stage: vec![Vec::new(); m * k_max],
        }
    }

    fn idx(&self, pos: usize, size: usize) -> usize {
        debug_assert!(size >= 1 && size <= self.k_max);
        pos * self.k_max + (size - 1)
    }

    /// Records one sample: updates the cell's running range and count and
    /// buffers the sample for the stage's refit.
    pub fn record(&mut self, pos: usize, size: usize, sample: StoredSample) {
        debug_assert!(sample.utility.is_finite());
        debug_assert_eq!(sample.members.len(), size);
        let i = self.idx(pos, size);
        let u = sample.utility;
        self.cells[i] = Some(match self.cells[i] {
            None => CellStats { min_utility: u, max_utility: u, samples: 1 },
            Some(c) => CellStats {
                min_utility: c.min_utility.min(u),
                max_utility: c.max_utility.max(u),
                samples: c.samples + 1,
            },
        });
        self.stage[i].push(sample);
    }

    /// Cumulative statistics, `None` while the cell has no samples.
    pub fn stats(&self, pos: usize, size: usize) -> Option<CellStats> {
        self.cells[self.idx(pos, size)]
    }

    /// Samples recorded since the last [`clear_stage`](Self::clear_stage).
    pub fn stage_samples(&self, pos: usize, size: usize) -> &[StoredSample] {
        &self.stage[self.idx(pos, size)]
    }

    /// Drops the stage buffers; cumulative statistics stay.
    pub fn clear_stage(&mut self) {
        for buf in &mut self.stage {
            buf.clear();
        }
    }

    /// Snapshot of every non-empty cell, ordered by start position then
    /// size. `starts` maps positions back to node ids.
    pub fn summaries(&self, starts: &[u32]) -> Vec<PoolCellSummary> {
        let mut out = Vec::new();
        for pos in 0..starts.len() {
            for size in 1..=self.k_max {
                if let Some(c) = self.stats(pos, size) {
                    out.push(PoolCellSummary {
                        start: starts[pos],
                        size,
                        min_utility: c.min_utility,
                        max_utility: c.max_utility,
                        samples: c.samples,
                    });
                }
            }
        }
        out
    }
}
