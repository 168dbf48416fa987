//! Alternating traversal directions for in-place (Gauss-Seidel) grid sweeps.
//!
//! In-place value updating converges faster when successive sweeps traverse
//! the grid in different directions. Every solve cycles through a fixed
//! schedule of 8 orderings: all 2^dims sign patterns for grids of 1 or 2
//! dimensions (repeated to length 8), and the 2^3 sign patterns applied to
//! the first three dimensions otherwise.

/// Per-dimension traversal directions for one sweep.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SweepOrdering {
    backward: Vec<bool>,
}

impl SweepOrdering {
    pub fn forward(dims: usize) -> Self {
        Self {
            backward: vec![false; dims],
        }
    }

    pub fn from_flags(backward: Vec<bool>) -> Self {
        Self { backward }
    }

    pub fn is_backward(&self, dim: usize) -> bool {
        self.backward[dim]
    }
}

/// Which schedule a sweeping solve cycles through.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SweepSchedule {
    /// The 8-ordering alternating schedule.
    #[default]
    Alternating,
    /// All-forward sweeps only, for convergence comparisons.
    Fixed,
}

impl SweepSchedule {
    pub fn orderings(self, dims: usize) -> Vec<SweepOrdering> {
        match self {
            SweepSchedule::Fixed => vec![SweepOrdering::forward(dims)],
            SweepSchedule::Alternating => alternating_schedule(dims),
        }
    }
}

/// The 8-entry alternating schedule; consecutive entries always differ.
pub fn alternating_schedule(dims: usize) -> Vec<SweepOrdering> {
    let flipped = dims.min(3);
    let distinct = 1usize << flipped;
    (0..8)
        .map(|k| {
            let pattern = k % distinct;
            let backward = (0..dims)
                .map(|d| d < flipped && pattern >> d & 1 == 1)
                .collect();
            SweepOrdering::from_flags(backward)
        })
        .collect()
}

/// Visits every multi-index of `counts` in the given ordering, with the
/// highest dimension innermost so forward sweeps walk memory linearly.
pub fn for_each_node(counts: &[usize], ordering: &SweepOrdering, mut f: impl FnMut(&[usize])) {
    let dims = counts.len();
    let mut pos = vec![0usize; dims];
    let mut idx = vec![0usize; dims];
    loop {
        for d in 0..dims {
            idx[d] = if ordering.is_backward(d) {
                counts[d] - 1 - pos[d]
            } else {
                pos[d]
            };
        }
        f(&idx);
        let mut d = dims;
        loop {
            if d == 0 {
                return;
            }
            d -= 1;
            pos[d] += 1;
            if pos[d] < counts[d] {
                break;
            }
            pos[d] = 0;
        }
    }
}
