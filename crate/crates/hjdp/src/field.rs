//! N-dimensional scalar fields stored flat in row-major order.

use crate::error::{Error, Result};
use crate::grid::GridAxes;

/// A scalar value function sampled on every grid node, with the solver time
/// it corresponds to (0 at initialization, growing toward the horizon).
#[derive(Debug, Clone, PartialEq)]
pub struct ValueField {
    data: Vec<f64>,
    shape: Vec<usize>,
    time: f64,
}

impl ValueField {
    pub fn zeros(axes: &GridAxes) -> Self {
        Self {
            data: vec![0.0; axes.total_nodes()],
            shape: axes.counts().to_vec(),
            time: 0.0,
        }
    }

    /// Builds a field by evaluating `f` at every node's coordinates.
    pub fn from_fn(axes: &GridAxes, f: impl Fn(&[f64]) -> f64) -> Self {
        let dims = axes.dims();
        let mut idx = vec![0usize; dims];
        let mut pt = vec![0.0f64; dims];
        let mut data = Vec::with_capacity(axes.total_nodes());
        for flat in 0..axes.total_nodes() {
            axes.multi_index(flat, &mut idx);
            axes.node_coords(&idx, &mut pt);
            data.push(f(&pt));
        }
        Self {
            data,
            shape: axes.counts().to_vec(),
            time: 0.0,
        }
    }

    /// Reassembles a field from raw parts; `data.len()` must match the shape.
    pub fn from_parts(data: Vec<f64>, shape: Vec<usize>, time: f64) -> Result<Self> {
        let expected: usize = shape.iter().product();
        if data.len() != expected {
            return Err(Error::ShapeMismatch(format!(
                "data has {} entries, shape {:?} needs {}",
                data.len(),
                shape,
                expected
            )));
        }
        Ok(Self { data, shape, time })
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn set_time(&mut self, time: f64) {
        self.time = time;
    }

    /// True when every entry is finite (no NaN or infinity).
    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Checks that this field is defined on `axes`.
    pub fn check_matches(&self, axes: &GridAxes) -> Result<()> {
        if self.shape != axes.counts() {
            return Err(Error::ShapeMismatch(format!(
                "field shape {:?} does not match grid counts {:?}",
                self.shape,
                axes.counts()
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_grid, GridSpec};

    #[test]
    fn from_fn_visits_nodes_row_major() {
        let axes = build_grid(GridSpec::new(
            vec![0.0, 0.0],
            vec![1.0, 2.0],
            vec![3, 5],
            vec![false, false],
        ))
        .unwrap();
        let field = ValueField::from_fn(&axes, |x| x[0] * 10.0 + x[1]);
        assert_eq!(field.len(), 15);
        // Node (1, 2) sits at flat 1*5 + 2.
        assert_eq!(field.data()[7], 0.5 * 10.0 + 1.0);
        assert!(field.is_finite());
    }

    #[test]
    fn from_parts_checks_length() {
        assert!(ValueField::from_parts(vec![0.0; 6], vec![2, 3], 0.0).is_ok());
        assert!(ValueField::from_parts(vec![0.0; 5], vec![2, 3], 0.0).is_err());
    }
}
