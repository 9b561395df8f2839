//! Radial contours on centerline-orthogonal planes.
//!
//! A contour is a star-shaped polygon around a centerline point: vertex `k`
//! sits at `center + radii[k] * (cos(k δ) u + sin(k δ) v)` with
//! `δ = 2π / n_rays`. Stacking one contour per centerline point gives a
//! radius field over the (slice, ray) grid, which is what the active contour
//! models evolve.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::centerline::Centerline;
use crate::error::{Error, Result};
use crate::volume::Vec3;

/// Why a ray stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RayStop {
    ThresholdHit,
    RMax,
    OutOfVolume,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialContour {
    pub center: Vec3,
    pub u: Vec3,
    pub v: Vec3,
    pub radii: Vec<f64>,
    pub flags: Vec<RayStop>,
}

impl RadialContour {
    pub fn circle(center: Vec3, u: Vec3, v: Vec3, n_rays: usize, radius: f64) -> Self {
        RadialContour {
            center,
            u,
            v,
            radii: vec![radius; n_rays],
            flags: vec![RayStop::ThresholdHit; n_rays],
        }
    }

    #[inline]
    pub fn n_rays(&self) -> usize {
        self.radii.len()
    }

    pub fn angle_step(&self) -> f64 {
        TAU / self.n_rays() as f64
    }

    #[inline]
    pub fn ray_dir(&self, k: usize) -> Vec3 {
        ray_direction(&self.u, &self.v, k, self.n_rays())
    }

    #[inline]
    pub fn vertex(&self, k: usize) -> Vec3 {
        self.center + self.radii[k] * self.ray_dir(k)
    }

    pub fn vertices(&self) -> Vec<Vec3> {
        (0..self.n_rays()).map(|k| self.vertex(k)).collect()
    }

    /// In-plane vertex coordinates along (u, v), in mm.
    pub fn planar(&self) -> Vec<[f64; 2]> {
        let d = self.angle_step();
        self.radii
            .iter()
            .enumerate()
            .map(|(k, r)| {
                let a = k as f64 * d;
                [r * a.cos(), r * a.sin()]
            })
            .collect()
    }
}

#[inline]
pub fn ray_direction(u: &Vec3, v: &Vec3, k: usize, n_rays: usize) -> Vec3 {
    let a = TAU * k as f64 / n_rays as f64;
    a.cos() * u + a.sin() * v
}

/// Ordered contours along a centerline with a shared ray count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContourStack {
    pub n_rays: usize,
    pub contours: Vec<RadialContour>,
}

impl ContourStack {
    pub fn new(contours: Vec<RadialContour>) -> Result<Self> {
        let n_rays = contours.first().map_or(0, RadialContour::n_rays);
        let stack = ContourStack { n_rays, contours };
        stack.validate()?;
        Ok(stack)
    }

    /// Circular contours of one radius on every plane of a centerline.
    pub fn circles(centerline: &Centerline, n_rays: usize, radius: f64) -> Self {
        let contours = (0..centerline.len())
            .map(|i| {
                let f = centerline.frames[i];
                RadialContour::circle(centerline.points[i], f.u, f.v, n_rays, radius)
            })
            .collect();
        ContourStack { n_rays, contours }
    }

    pub fn validate(&self) -> Result<()> {
        for (i, c) in self.contours.iter().enumerate() {
            if c.n_rays() != self.n_rays || c.flags.len() != self.n_rays {
                return Err(Error::GeometryMismatch(format!(
                    "contour {i} has {} radii / {} flags, stack uses {} rays",
                    c.n_rays(),
                    c.flags.len(),
                    self.n_rays
                )));
            }
        }
        Ok(())
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.contours.len()
    }

    pub fn is_empty(&self) -> bool {
        self.contours.is_empty()
    }

    /// Radius field as `[slice][ray]`.
    pub fn radii(&self) -> Vec<Vec<f64>> {
        self.contours.iter().map(|c| c.radii.clone()).collect()
    }

    pub fn set_radii(&mut self, radii: &[Vec<f64>]) {
        for (c, r) in self.contours.iter_mut().zip(radii) {
            c.radii.copy_from_slice(r);
        }
    }

    /// Errors unless `other` has the same slice count, ray count, centers and
    /// frames.
    pub fn check_same_geometry(&self, other: &ContourStack) -> Result<()> {
        if self.n_rays != other.n_rays {
            return Err(Error::GeometryMismatch(format!(
                "{} rays vs {} rays",
                self.n_rays, other.n_rays
            )));
        }
        if self.len() != other.len() {
            return Err(Error::GeometryMismatch(format!(
                "{} slices vs {} slices",
                self.len(),
                other.len()
            )));
        }
        for (i, (a, b)) in self.contours.iter().zip(&other.contours).enumerate() {
            let same = (a.center - b.center).norm() < 1e-9
                && (a.u - b.u).norm() < 1e-9
                && (a.v - b.v).norm() < 1e-9;
            if !same {
                return Err(Error::GeometryMismatch(format!(
                    "slice {i} has a different center or frame"
                )));
            }
        }
        Ok(())
    }

    /// Rotate ray indexing by `shift` on every contour: new ray `k` is old
    /// ray `k + shift`, and frames rotate so vertex positions are unchanged.
    pub fn rotate_rays(&self, shift: usize) -> ContourStack {
        let n = self.n_rays;
        let contours = self
            .contours
            .iter()
            .map(|c| {
                let u = ray_direction(&c.u, &c.v, shift % n, n);
                let a = TAU * (shift % n) as f64 / n as f64;
                let v = -a.sin() * c.u + a.cos() * c.v;
                RadialContour {
                    center: c.center,
                    u,
                    v,
                    radii: (0..n).map(|k| c.radii[(k + shift) % n]).collect(),
                    flags: (0..n).map(|k| c.flags[(k + shift) % n]).collect(),
                }
            })
            .collect();
        ContourStack {
            n_rays: n,
            contours,
        }
    }
}

/// `r[i][k-1] + r[i][k+1] - 2 r[i][k]`, ray index wrapping.
#[inline]
pub fn angular_laplacian(r: &[Vec<f64>], i: usize, k: usize) -> f64 {
    let n = r[i].len();
    r[i][(k + n - 1) % n] + r[i][(k + 1) % n] - 2.0 * r[i][k]
}

/// `r[i-1][k] + r[i+1][k] - 2 r[i][k]`, slice index clamped at the ends.
#[inline]
pub fn longitudinal_laplacian(r: &[Vec<f64>], i: usize, k: usize) -> f64 {
    let lo = i.saturating_sub(1);
    let hi = (i + 1).min(r.len() - 1);
    r[lo][k] + r[hi][k] - 2.0 * r[i][k]
}
