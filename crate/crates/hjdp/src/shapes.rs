//! Signed-distance initial conditions and pointwise set operations.
//!
//! All constructors follow the negative-inside convention: the represented
//! set is the sub-zero level set of the returned field.

use crate::error::{Error, Result};
use crate::field::ValueField;
use crate::grid::GridAxes;

/// Signed distance to a sphere: `|x - center| - radius`.
pub fn sphere_sdf(axes: &GridAxes, center: &[f64], radius: f64) -> Result<ValueField> {
    if radius <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "sphere radius must be > 0, got {radius}"
        )));
    }
    if center.len() != axes.dims() {
        return Err(Error::InvalidArgument(format!(
            "sphere center has {} entries, grid has {} dims",
            center.len(),
            axes.dims()
        )));
    }
    Ok(ValueField::from_fn(axes, |x| {
        let sq: f64 = x.iter().zip(center).map(|(a, c)| (a - c) * (a - c)).sum();
        sq.sqrt() - radius
    }))
}

/// Signed distance to an axis-aligned cylinder: Euclidean distance over the
/// dims not listed in `ignore_dims`, minus `radius`. `center` has one entry
/// per kept dim, in increasing dim order.
pub fn cylinder_sdf(
    axes: &GridAxes,
    ignore_dims: &[usize],
    center: &[f64],
    radius: f64,
) -> Result<ValueField> {
    if radius <= 0.0 {
        return Err(Error::InvalidArgument(format!(
            "cylinder radius must be > 0, got {radius}"
        )));
    }
    for &d in ignore_dims {
        if d >= axes.dims() {
            return Err(Error::InvalidArgument(format!(
                "ignored dim {d} out of range for a {}-dim grid",
                axes.dims()
            )));
        }
    }
    let kept: Vec<usize> = (0..axes.dims())
        .filter(|d| !ignore_dims.contains(d))
        .collect();
    if kept.is_empty() {
        return Err(Error::InvalidArgument(
            "cylinder must keep at least one dim".into(),
        ));
    }
    if center.len() != kept.len() {
        return Err(Error::InvalidArgument(format!(
            "cylinder center has {} entries, expected one per kept dim ({})",
            center.len(),
            kept.len()
        )));
    }
    Ok(ValueField::from_fn(axes, |x| {
        let sq: f64 = kept
            .iter()
            .zip(center)
            .map(|(&d, c)| (x[d] - c) * (x[d] - c))
            .sum();
        sq.sqrt() - radius
    }))
}

/// Which side of a halfspace plane is inside (negative).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HalfspaceSide {
    /// Negative below the threshold: value = coord - threshold.
    Lower,
    /// Negative above the threshold: value = threshold - coord.
    Upper,
}

/// Signed distance to an axis-aligned plane.
pub fn halfspace_sdf(
    axes: &GridAxes,
    dim: usize,
    threshold: f64,
    side: HalfspaceSide,
) -> Result<ValueField> {
    if dim >= axes.dims() {
        return Err(Error::InvalidArgument(format!(
            "halfspace dim {dim} out of range for a {}-dim grid",
            axes.dims()
        )));
    }
    Ok(ValueField::from_fn(axes, |x| match side {
        HalfspaceSide::Lower => x[dim] - threshold,
        HalfspaceSide::Upper => threshold - x[dim],
    }))
}

/// Set union: pointwise minimum.
pub fn union_fields(a: &ValueField, b: &ValueField) -> Result<ValueField> {
    combine(a, b, f64::min)
}

/// Set intersection: pointwise maximum.
pub fn intersect_fields(a: &ValueField, b: &ValueField) -> Result<ValueField> {
    combine(a, b, f64::max)
}

fn combine(a: &ValueField, b: &ValueField, op: fn(f64, f64) -> f64) -> Result<ValueField> {
    if a.shape() != b.shape() {
        return Err(Error::ShapeMismatch(format!(
            "cannot combine fields of shapes {:?} and {:?}",
            a.shape(),
            b.shape()
        )));
    }
    let data: Vec<f64> = a
        .data()
        .iter()
        .zip(b.data())
        .map(|(&x, &y)| op(x, y))
        .collect();
    ValueField::from_parts(data, a.shape().to_vec(), a.time())
}
