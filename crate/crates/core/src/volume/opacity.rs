//! Iso-value opacity transfer function.
//!
//! Opacity peaks on the iso-surface `f = iso_value` where the gradient is
//! strong and fades linearly over a band whose width scales with the local
//! gradient magnitude, so weak-contrast interfaces keep a visible ridge while
//! flat regions and far-off intensities drop to zero.

use serde::{Deserialize, Serialize};

use super::{Vec3, Volume};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OpacityParams {
    /// Target boundary intensity (HU).
    pub iso_value: f64,
    /// Band half-width in HU per unit gradient magnitude (HU/mm).
    pub transition_width: f64,
    /// Opacity on the iso-surface, in (0, 1].
    pub max_opacity: f64,
    /// Gradient magnitudes (HU/mm) at or below this count as flat.
    pub gradient_floor: f64,
}

impl Default for OpacityParams {
    fn default() -> Self {
        OpacityParams {
            iso_value: 60.0,
            transition_width: 2.0,
            max_opacity: 1.0,
            gradient_floor: 1.0,
        }
    }
}

impl OpacityParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.transition_width > 0.0) {
            return Err(Error::InvalidParam(
                "opacity transition_width must be > 0".into(),
            ));
        }
        if !(self.max_opacity > 0.0 && self.max_opacity <= 1.0) {
            return Err(Error::InvalidParam(
                "opacity max_opacity must lie in (0, 1]".into(),
            ));
        }
        if !(self.gradient_floor >= 0.0) {
            return Err(Error::InvalidParam(
                "opacity gradient_floor must be >= 0".into(),
            ));
        }
        if !self.iso_value.is_finite() {
            return Err(Error::InvalidParam("opacity iso_value must be finite".into()));
        }
        Ok(())
    }
}

/// Opacity for an intensity `f` (HU) and gradient magnitude `g` (HU/mm).
pub fn opacity_from(f: f64, g: f64, op: &OpacityParams) -> f64 {
    let dev = (op.iso_value - f).abs();
    if g <= op.gradient_floor {
        return if dev == 0.0 { op.max_opacity } else { 0.0 };
    }
    op.max_opacity * (1.0 - dev / (op.transition_width * g)).max(0.0)
}

pub fn opacity_at(vol: &Volume, p: &Vec3, op: &OpacityParams) -> Result<f64> {
    let (f, g) = vol.value_and_gradient_norm(p)?;
    Ok(opacity_from(f, g, op))
}

/// Materialize the opacity of one axis-aligned slice, row-major in the two
/// remaining axes (lower axis fastest). Border voxels where the gradient is
/// undefined are reported as 0.
pub fn opacity_slice(
    vol: &Volume,
    axis: usize,
    index: usize,
    op: &OpacityParams,
) -> Result<(usize, usize, Vec<f64>)> {
    let grid = vol.grid();
    if axis > 2 {
        return Err(Error::InvalidParam(format!("axis {axis} is not 0, 1 or 2")));
    }
    if index >= grid.dims[axis] {
        return Err(Error::SliceOutOfRange {
            index,
            len: grid.dims[axis],
        });
    }
    let (a, b) = match axis {
        0 => (1, 2),
        1 => (0, 2),
        _ => (0, 1),
    };
    let (w, h) = (grid.dims[a], grid.dims[b]);
    let mut out = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            let mut ijk = [0usize; 3];
            ijk[axis] = index;
            ijk[a] = x;
            ijk[b] = y;
            out.push(opacity_at(vol, &grid.world(ijk), op).unwrap_or(0.0));
        }
    }
    Ok((w, h, out))
}
