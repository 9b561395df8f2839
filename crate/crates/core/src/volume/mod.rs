//! Scalar CT volumes, interpolation and the derived quantities the contour
//! models consume (gradients, opacity, Gaussian-derivative kernels).
//!
//! World coordinates follow the voxel-center convention:
//! `world = origin + index * spacing`, and sampling is valid on
//! `[0, dim - 1]` per axis in index space.

mod kernel;
mod opacity;

pub use kernel::DerivKernel;
pub use opacity::{opacity_at, opacity_from, opacity_slice, OpacityParams};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Vec3 = nalgebra::Vector3<f64>;

/// Slack allowed when testing whether a continuous index lies on the grid.
const INDEX_EPS: f64 = 1e-9;

/// Voxel grid geometry shared by volumes and masks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub dims: [usize; 3],
    pub spacing: [f64; 3],
    pub origin: [f64; 3],
}

impl Grid {
    pub fn new(dims: [usize; 3], spacing: [f64; 3], origin: [f64; 3]) -> Result<Self> {
        let grid = Grid {
            dims,
            spacing,
            origin,
        };
        grid.validate()?;
        Ok(grid)
    }

    pub fn isotropic(dims: [usize; 3], spacing: f64) -> Self {
        Grid {
            dims,
            spacing: [spacing; 3],
            origin: [0.0; 3],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dims.iter().any(|&d| d == 0) {
            return Err(Error::InvalidParam(format!(
                "grid dims must be >= 1, got {:?}",
                self.dims
            )));
        }
        if self.spacing.iter().any(|&s| !(s > 0.0 && s.is_finite())) {
            return Err(Error::InvalidParam(format!(
                "grid spacing must be > 0, got {:?}",
                self.spacing
            )));
        }
        if self.origin.iter().any(|o| !o.is_finite()) {
            return Err(Error::InvalidParam("grid origin must be finite".into()));
        }
        Ok(())
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.dims[0] * self.dims[1] * self.dims[2]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Linear offset of voxel `(i, j, k)`, x fastest.
    #[inline]
    pub fn offset(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.dims[0] * (j + self.dims[1] * k)
    }

    #[inline]
    pub fn ijk(&self, offset: usize) -> [usize; 3] {
        let nx = self.dims[0];
        let ny = self.dims[1];
        [offset % nx, (offset / nx) % ny, offset / (nx * ny)]
    }

    #[inline]
    pub fn world(&self, ijk: [usize; 3]) -> Vec3 {
        Vec3::new(
            self.origin[0] + ijk[0] as f64 * self.spacing[0],
            self.origin[1] + ijk[1] as f64 * self.spacing[1],
            self.origin[2] + ijk[2] as f64 * self.spacing[2],
        )
    }

    /// Continuous index-space coordinates of a world point.
    #[inline]
    pub fn to_index(&self, p: &Vec3) -> [f64; 3] {
        [
            (p.x - self.origin[0]) / self.spacing[0],
            (p.y - self.origin[1]) / self.spacing[1],
            (p.z - self.origin[2]) / self.spacing[2],
        ]
    }

    /// Nearest voxel to a world point, if it lies on the grid.
    pub fn nearest_voxel(&self, p: &Vec3) -> Option<[usize; 3]> {
        let q = self.to_index(p);
        let mut out = [0usize; 3];
        for a in 0..3 {
            let r = q[a].round();
            if !(r >= 0.0 && r <= (self.dims[a] - 1) as f64) {
                return None;
            }
            out[a] = r as usize;
        }
        Some(out)
    }

    pub fn voxel_volume(&self) -> f64 {
        self.spacing.iter().product()
    }

    /// Whether a world point lies inside the sampleable region, with every
    /// axis at least `margin` voxels away from the border.
    pub fn is_interior(&self, p: &Vec3, margin: f64) -> bool {
        let q = self.to_index(p);
        (0..3).all(|a| {
            let hi = (self.dims[a] - 1) as f64;
            q[a] >= margin - INDEX_EPS && q[a] <= hi - margin + INDEX_EPS
        })
    }
}

/// Immutable scalar volume in Hounsfield units.
#[derive(Debug, Clone, PartialEq)]
pub struct Volume {
    grid: Grid,
    data: Vec<f64>,
}

impl Volume {
    pub fn new(grid: Grid, data: Vec<f64>) -> Result<Self> {
        grid.validate()?;
        if data.len() != grid.len() {
            return Err(Error::InvalidParam(format!(
                "data length {} does not match dims {:?}",
                data.len(),
                grid.dims
            )));
        }
        Ok(Volume { grid, data })
    }

    pub fn filled(grid: Grid, value: f64) -> Result<Self> {
        Volume::new(grid, vec![value; grid.len()])
    }

    /// Build a volume by evaluating `f` at every voxel center (world mm).
    pub fn from_fn(grid: Grid, mut f: impl FnMut(Vec3) -> f64) -> Result<Self> {
        grid.validate()?;
        let data = (0..grid.len())
            .map(|o| f(grid.world(grid.ijk(o))))
            .collect();
        Volume::new(grid, data)
    }

    #[inline]
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    #[inline]
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.data[self.grid.offset(i, j, k)]
    }

    /// Trilinear interpolation at a world point.
    pub fn trilinear_sample(&self, p: &Vec3) -> Result<f64> {
        self.sample_index(self.grid.to_index(p))
            .ok_or(Error::OutOfBounds(p.x, p.y, p.z))
    }

    fn sample_index(&self, q: [f64; 3]) -> Option<f64> {
        let mut base = [0usize; 3];
        let mut frac = [0.0f64; 3];
        let mut stride = [0usize; 3];
        let strides = [1, self.grid.dims[0], self.grid.dims[0] * self.grid.dims[1]];
        for a in 0..3 {
            let n = self.grid.dims[a];
            let hi = (n - 1) as f64;
            let x = q[a];
            if !(x >= -INDEX_EPS && x <= hi + INDEX_EPS) {
                return None;
            }
            if n > 1 {
                let x = x.clamp(0.0, hi);
                let b = (x.floor() as usize).min(n - 2);
                base[a] = b;
                frac[a] = x - b as f64;
                stride[a] = strides[a];
            }
        }
        let o = self.grid.offset(base[0], base[1], base[2]);
        let d = &self.data;
        let v = |off: usize| d[off];
        let [fx, fy, fz] = frac;
        let [sx, sy, sz] = stride;
        let c00 = v(o) * (1.0 - fx) + v(o + sx) * fx;
        let c10 = v(o + sy) * (1.0 - fx) + v(o + sy + sx) * fx;
        let c01 = v(o + sz) * (1.0 - fx) + v(o + sz + sx) * fx;
        let c11 = v(o + sz + sy) * (1.0 - fx) + v(o + sz + sy + sx) * fx;
        let c0 = c00 * (1.0 - fy) + c10 * fy;
        let c1 = c01 * (1.0 - fy) + c11 * fy;
        Some(c0 * (1.0 - fz) + c1 * fz)
    }

    /// Central-difference gradient (HU/mm) with a one-voxel step per axis.
    pub fn gradient_at(&self, p: &Vec3) -> Result<Vec3> {
        let q = self.grid.to_index(p);
        let mut g = Vec3::zeros();
        for a in 0..3 {
            let mut lo = q;
            let mut hi = q;
            lo[a] -= 1.0;
            hi[a] += 1.0;
            let (Some(f_lo), Some(f_hi)) = (self.sample_index(lo), self.sample_index(hi)) else {
                return Err(Error::OutOfBounds(p.x, p.y, p.z));
            };
            g[a] = (f_hi - f_lo) / (2.0 * self.grid.spacing[a]);
        }
        Ok(g)
    }

    /// Intensity and gradient magnitude at `p` in one call.
    pub(crate) fn value_and_gradient_norm(&self, p: &Vec3) -> Result<(f64, f64)> {
        let f = self.trilinear_sample(p)?;
        let g = self.gradient_at(p)?;
        Ok((f, g.norm()))
    }
}
