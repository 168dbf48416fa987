//! Cartesian grid construction, index/coordinate mapping, periodic wrapping,
//! and ghost-cell extrapolation at non-periodic boundaries.
//!
//! Storage is row-major with dimension 0 outermost; nested iteration puts the
//! highest dimension innermost so walks follow the linear memory layout.
//! Periodic dimensions exclude the upper endpoint (it aliases the lower one);
//! non-periodic dimensions include both endpoints.

use crate::error::{Error, Result};
use crate::field::ValueField;

/// Maximum number of grid dimensions supported.
pub const MAX_DIMS: usize = 6;

/// User-facing description of a Cartesian grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub dims: usize,
    pub mins: Vec<f64>,
    pub maxs: Vec<f64>,
    pub counts: Vec<usize>,
    pub periodic: Vec<bool>,
}

impl GridSpec {
    pub fn new(mins: Vec<f64>, maxs: Vec<f64>, counts: Vec<usize>, periodic: Vec<bool>) -> Self {
        let dims = counts.len();
        Self {
            dims,
            mins,
            maxs,
            counts,
            periodic,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(1..=MAX_DIMS).contains(&self.dims) {
            return Err(Error::InvalidGrid(format!(
                "dims must be in 1..={MAX_DIMS}, got {}",
                self.dims
            )));
        }
        for (name, len) in [
            ("mins", self.mins.len()),
            ("maxs", self.maxs.len()),
            ("counts", self.counts.len()),
            ("periodic", self.periodic.len()),
        ] {
            if len != self.dims {
                return Err(Error::InvalidGrid(format!(
                    "{name} has {len} entries, expected {}",
                    self.dims
                )));
            }
        }
        for d in 0..self.dims {
            if !(self.mins[d] < self.maxs[d]) {
                return Err(Error::InvalidGrid(format!(
                    "dim {d}: min ({}) must be < max ({})",
                    self.mins[d], self.maxs[d]
                )));
            }
            if self.counts[d] < 3 {
                return Err(Error::InvalidGrid(format!(
                    "dim {d}: counts must be >= 3 (stencils need two neighbors), got {}",
                    self.counts[d]
                )));
            }
        }
        Ok(())
    }
}

/// A constructed grid: node coordinates, spacings, and flat-index strides.
#[derive(Debug, Clone)]
pub struct GridAxes {
    spec: GridSpec,
    spacing: Vec<f64>,
    coords: Vec<Vec<f64>>,
    strides: Vec<usize>,
    total: usize,
}

/// Builds the coordinate vectors and spacings for a grid specification.
///
/// Non-periodic dimensions span `[min, max]` inclusive with spacing
/// `(max - min) / (count - 1)`; periodic dimensions exclude the upper
/// endpoint and use spacing `(max - min) / count`.
pub fn build_grid(spec: GridSpec) -> Result<GridAxes> {
    spec.validate()?;
    let mut spacing = Vec::with_capacity(spec.dims);
    let mut coords = Vec::with_capacity(spec.dims);
    for d in 0..spec.dims {
        let n = spec.counts[d];
        let h = if spec.periodic[d] {
            (spec.maxs[d] - spec.mins[d]) / n as f64
        } else {
            (spec.maxs[d] - spec.mins[d]) / (n - 1) as f64
        };
        let mut axis: Vec<f64> = (0..n).map(|i| spec.mins[d] + i as f64 * h).collect();
        if !spec.periodic[d] {
            // Pin the last node to the stated bound so the inclusive-endpoint
            // invariant holds exactly.
            axis[n - 1] = spec.maxs[d];
        }
        spacing.push(h);
        coords.push(axis);
    }
    let (strides, total) = row_major_strides(&spec.counts);
    Ok(GridAxes {
        spec,
        spacing,
        coords,
        strides,
        total,
    })
}

/// Builds a non-periodic box of nodes for discretized action spaces.
///
/// Unlike state grids, action boxes are never differenced, so any positive
/// node count is allowed: a single node sits at the box midpoint, two or
/// more span `[min, max]` inclusive.
pub fn action_box(mins: Vec<f64>, maxs: Vec<f64>, counts: Vec<usize>) -> Result<GridAxes> {
    let dims = counts.len();
    if !(1..=MAX_DIMS).contains(&dims) {
        return Err(Error::InvalidGrid(format!(
            "action box dims must be in 1..={MAX_DIMS}, got {dims}"
        )));
    }
    if mins.len() != dims || maxs.len() != dims {
        return Err(Error::InvalidGrid(format!(
            "action box mins/maxs must have {dims} entries"
        )));
    }
    let mut spacing = Vec::with_capacity(dims);
    let mut coords = Vec::with_capacity(dims);
    for d in 0..dims {
        let n = counts[d];
        if n == 0 {
            return Err(Error::InvalidGrid(format!(
                "action box dim {d}: counts must be >= 1"
            )));
        }
        if mins[d] > maxs[d] || (n > 1 && mins[d] >= maxs[d]) {
            return Err(Error::InvalidGrid(format!(
                "action box dim {d}: min ({}) must be < max ({})",
                mins[d], maxs[d]
            )));
        }
        if n == 1 {
            spacing.push(maxs[d] - mins[d]);
            coords.push(vec![0.5 * (mins[d] + maxs[d])]);
        } else {
            let h = (maxs[d] - mins[d]) / (n - 1) as f64;
            let mut axis: Vec<f64> = (0..n).map(|i| mins[d] + i as f64 * h).collect();
            axis[n - 1] = maxs[d];
            spacing.push(h);
            coords.push(axis);
        }
    }
    let (strides, total) = row_major_strides(&counts);
    let spec = GridSpec {
        dims,
        mins,
        maxs,
        counts,
        periodic: vec![false; dims],
    };
    Ok(GridAxes {
        spec,
        spacing,
        coords,
        strides,
        total,
    })
}

fn row_major_strides(counts: &[usize]) -> (Vec<usize>, usize) {
    let dims = counts.len();
    let mut strides = vec![0usize; dims];
    let mut acc = 1usize;
    for d in (0..dims).rev() {
        strides[d] = acc;
        acc *= counts[d];
    }
    (strides, acc)
}

impl GridAxes {
    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn dims(&self) -> usize {
        self.spec.dims
    }

    pub fn counts(&self) -> &[usize] {
        &self.spec.counts
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing
    }

    pub fn coords(&self, dim: usize) -> &[f64] {
        &self.coords[dim]
    }

    pub fn is_periodic(&self, dim: usize) -> bool {
        self.spec.periodic[dim]
    }

    /// Total number of grid nodes.
    pub fn total_nodes(&self) -> usize {
        self.total
    }

    /// Row-major strides (dim 0 outermost, last dim contiguous).
    pub fn strides(&self) -> &[usize] {
        &self.strides
    }

    /// Flat offset of a multi-index.
    pub fn flat_index(&self, index: &[usize]) -> usize {
        debug_assert_eq!(index.len(), self.dims());
        index.iter().zip(&self.strides).map(|(i, s)| i * s).sum()
    }

    /// Multi-index of a flat offset.
    pub fn multi_index(&self, mut flat: usize, out: &mut [usize]) {
        for (o, stride) in out.iter_mut().zip(&self.strides) {
            *o = flat / stride;
            flat %= stride;
        }
    }

    /// Writes the physical coordinates of a node into `out`.
    pub fn node_coords(&self, index: &[usize], out: &mut [f64]) {
        for ((o, axis), i) in out.iter_mut().zip(&self.coords).zip(index) {
            *o = axis[*i];
        }
    }
}

/// Value of `field` at `offset` nodes from `index` along `dim`, with periodic
/// wrapping or ghost-cell extrapolation when the target lies outside the grid.
///
/// The extrapolated ghost value one step past the edge is
/// `v_edge + |v_edge - v_inner| * sign(v_edge)` (sign(0) = +1), which always
/// points away from the zero level set; `k` steps out scale the slope by `k`.
pub fn neighbor_value(
    field: &ValueField,
    axes: &GridAxes,
    dim: usize,
    index: &[usize],
    offset: isize,
) -> f64 {
    debug_assert!(offset != 0 && offset.unsigned_abs() <= 2);
    let flat = axes.flat_index(index);
    sample(field.data(), axes, flat, index[dim], dim, offset)
}

/// Core neighbor lookup used by the stencil code: `flat` is the node's flat
/// offset and `pos` its index along `dim`.
#[inline]
pub(crate) fn sample(
    data: &[f64],
    axes: &GridAxes,
    flat: usize,
    pos: usize,
    dim: usize,
    offset: isize,
) -> f64 {
    let n = axes.spec.counts[dim];
    let stride = axes.strides[dim];
    let target = pos as isize + offset;
    if target >= 0 && (target as usize) < n {
        return data[(flat as isize + offset * stride as isize) as usize];
    }
    if axes.spec.periodic[dim] {
        let wrapped = target.rem_euclid(n as isize) as usize;
        let base = flat - pos * stride;
        return data[base + wrapped * stride];
    }
    // Ghost extrapolation past a non-periodic face.
    let base = flat - pos * stride;
    let (edge, inner, steps_out) = if target < 0 {
        (base, base + stride, (-target) as f64)
    } else {
        (
            base + (n - 1) * stride,
            base + (n - 2) * stride,
            (target as usize - (n - 1)) as f64,
        )
    };
    let v_edge = data[edge];
    let v_inner = data[inner];
    let slope = (v_edge - v_inner).abs() * sign_pos(v_edge);
    v_edge + steps_out * slope
}

/// Sign with the tie-break `sign(0) = +1`.
#[inline]
pub fn sign_pos(x: f64) -> f64 {
    if x >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

/// Grid node nearest to a continuous point: per dimension the point is
/// clamped (non-periodic) or wrapped (periodic), then rounded to the nearest
/// node with ties rounding toward the larger index.
pub fn nearest_index(axes: &GridAxes, point: &[f64], out: &mut [usize]) {
    debug_assert_eq!(point.len(), axes.dims());
    for d in 0..axes.dims() {
        let n = axes.spec.counts[d];
        let h = axes.spacing[d];
        let min = axes.spec.mins[d];
        let i = if axes.spec.periodic[d] {
            let period = axes.spec.maxs[d] - min;
            let wrapped = (point[d] - min).rem_euclid(period);
            let i = (wrapped / h + 0.5).floor() as usize;
            // Points near the period's end round up to the aliased first node.
            i % n
        } else {
            let clamped = point[d].clamp(min, axes.spec.maxs[d]);
            let i = ((clamped - min) / h + 0.5).floor() as usize;
            i.min(n - 1)
        };
        out[d] = i;
    }
}
