//! VTK and CSV export of (slices of) value fields for external viewers.

use std::io::Write;

use crate::error::{Error, Result};
use crate::field::ValueField;
use crate::grid::GridAxes;

/// The dims left free after pinning, in increasing order, with the pinned
/// index per pinned dim.
fn split_dims(
    axes: &GridAxes,
    fixed: &[(usize, usize)],
    max_free: usize,
    what: &str,
) -> Result<Vec<usize>> {
    let dims = axes.dims();
    let mut pinned = vec![None; dims];
    for &(d, i) in fixed {
        if d >= dims {
            return Err(Error::InvalidArgument(format!(
                "slice dim {d} out of range for a {dims}-dim field"
            )));
        }
        if i >= axes.counts()[d] {
            return Err(Error::InvalidArgument(format!(
                "slice index {i} out of range for dim {d} ({} nodes)",
                axes.counts()[d]
            )));
        }
        if pinned[d].replace(i).is_some() {
            return Err(Error::InvalidArgument(format!("dim {d} pinned twice")));
        }
    }
    let free: Vec<usize> = (0..dims).filter(|&d| pinned[d].is_none()).collect();
    if free.is_empty() || free.len() > max_free {
        return Err(Error::InvalidArgument(format!(
            "{what} export needs 1..={max_free} free dims, got {} (pin more indices)",
            free.len()
        )));
    }
    Ok(free)
}

fn base_offset(axes: &GridAxes, fixed: &[(usize, usize)]) -> usize {
    fixed.iter().map(|&(d, i)| i * axes.strides()[d]).sum()
}

/// Writes a legacy VTK structured-points file of the field (or a slice of a
/// higher-dimensional field with all but at most three dims pinned).
///
/// Free dims map to VTK x/y/z in increasing dim order; the payload is
/// `double` scalars, big-endian in binary mode, with x varying fastest.
pub fn export_vtk<W: Write>(
    w: &mut W,
    axes: &GridAxes,
    field: &ValueField,
    fixed: &[(usize, usize)],
    ascii: bool,
) -> Result<()> {
    field.check_matches(axes)?;
    let free = split_dims(axes, fixed, 3, "vtk")?;
    let base = base_offset(axes, fixed);

    let mut counts = [1usize; 3];
    let mut origin = [0.0f64; 3];
    let mut spacing = [1.0f64; 3];
    for (k, &d) in free.iter().enumerate() {
        counts[k] = axes.counts()[d];
        origin[k] = axes.coords(d)[0];
        spacing[k] = axes.spacing()[d];
    }
    let total: usize = counts.iter().product();

    writeln!(w, "# vtk DataFile Version 3.0")?;
    writeln!(w, "hjdp field time={}", field.time())?;
    writeln!(w, "{}", if ascii { "ASCII" } else { "BINARY" })?;
    writeln!(w, "DATASET STRUCTURED_POINTS")?;
    writeln!(w, "DIMENSIONS {} {} {}", counts[0], counts[1], counts[2])?;
    writeln!(w, "ORIGIN {} {} {}", origin[0], origin[1], origin[2])?;
    writeln!(w, "SPACING {} {} {}", spacing[0], spacing[1], spacing[2])?;
    writeln!(w, "POINT_DATA {total}")?;
    writeln!(w, "SCALARS value double 1")?;
    writeln!(w, "LOOKUP_TABLE default")?;

    // VTK point order: x fastest, z slowest.
    let data = field.data();
    let stride_of = |k: usize| free.get(k).map(|&d| axes.strides()[d]).unwrap_or(0);
    let (sx, sy, sz) = (stride_of(0), stride_of(1), stride_of(2));
    for iz in 0..counts[2] {
        for iy in 0..counts[1] {
            for ix in 0..counts[0] {
                let v = data[base + ix * sx + iy * sy + iz * sz];
                if ascii {
                    writeln!(w, "{v}")?;
                } else {
                    w.write_all(&v.to_be_bytes())?;
                }
            }
        }
    }
    if !ascii {
        writeln!(w)?;
    }
    Ok(())
}

/// Writes a CSV slice: one coordinate column per free dim (header `x<dim>`)
/// plus a `value` column, rows in row-major order of the free dims.
pub fn export_csv_slice<W: Write>(
    w: &mut W,
    axes: &GridAxes,
    field: &ValueField,
    fixed: &[(usize, usize)],
) -> Result<()> {
    field.check_matches(axes)?;
    let free = split_dims(axes, fixed, 3, "csv")?;
    let base = base_offset(axes, fixed);

    let header: Vec<String> = free.iter().map(|d| format!("x{d}")).collect();
    writeln!(w, "{},value", header.join(","))?;

    let data = field.data();
    let mut idx = vec![0usize; free.len()];
    loop {
        let mut flat = base;
        for (k, &d) in free.iter().enumerate() {
            flat += idx[k] * axes.strides()[d];
        }
        for (k, &d) in free.iter().enumerate() {
            write!(w, "{},", axes.coords(d)[idx[k]])?;
        }
        writeln!(w, "{}", data[flat])?;

        let mut k = free.len();
        loop {
            if k == 0 {
                return Ok(());
            }
            k -= 1;
            idx[k] += 1;
            if idx[k] < axes.counts()[free[k]] {
                break;
            }
            idx[k] = 0;
        }
    }
}
