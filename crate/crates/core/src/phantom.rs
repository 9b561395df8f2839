//! Synthetic CT angiography volumes with analytic ground truth.
//!
//! Every voxel is classified by its closest-point distance to an axis curve:
//! inside the lumen radius it is contrast-filled lumen, inside the outer
//! radius it is thrombus, otherwise background. Stent markers and endoleak
//! spheres are stamped on top, and Gaussian noise is added last so the
//! reference masks stay exact.

use std::f64::consts::PI;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::BinaryMask;
use crate::volume::{Grid, Vec3, Volume};

/// Axis curve parameterized by arc length `t` in `[0, length]` mm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AxisCurve {
    Line {
        start: [f64; 3],
        direction: [f64; 3],
        length: f64,
    },
    /// Circular arc in the plane spanned by `u` and `v` (orthonormal).
    Arc {
        center: [f64; 3],
        radius: f64,
        u: [f64; 3],
        v: [f64; 3],
        start_angle: f64,
        length: f64,
    },
}

impl AxisCurve {
    pub fn length(&self) -> f64 {
        match self {
            AxisCurve::Line { length, .. } | AxisCurve::Arc { length, .. } => *length,
        }
    }

    pub fn point(&self, t: f64) -> Vec3 {
        match self {
            AxisCurve::Line { start, direction, .. } => {
                Vec3::from(*start) + t * Vec3::from(*direction).normalize()
            }
            AxisCurve::Arc { center, radius, u, v, start_angle, .. } => {
                let a = start_angle + t / radius;
                Vec3::from(*center) + *radius * (a.cos() * Vec3::from(*u) + a.sin() * Vec3::from(*v))
            }
        }
    }

    pub fn tangent(&self, t: f64) -> Vec3 {
        match self {
            AxisCurve::Line { direction, .. } => Vec3::from(*direction).normalize(),
            AxisCurve::Arc { radius, u, v, start_angle, .. } => {
                let a = start_angle + t / radius;
                -a.sin() * Vec3::from(*u) + a.cos() * Vec3::from(*v)
            }
        }
    }

    /// Reference direction perpendicular to the tangent, used to place
    /// markers and leaks by angle.
    pub fn normal(&self, t: f64) -> Vec3 {
        match self {
            AxisCurve::Line { direction, .. } => {
                let d = Vec3::from(*direction).normalize();
                let axis = [Vec3::x(), Vec3::y(), Vec3::z()]
                    .into_iter()
                    .min_by(|a, b| a.dot(&d).abs().total_cmp(&b.dot(&d).abs()))
                    .unwrap();
                (axis - axis.dot(&d) * d).normalize()
            }
            AxisCurve::Arc { center, .. } => (Vec3::from(*center) - self.point(t)).normalize(),
        }
    }

    /// Direction at `angle` around the axis at `t`.
    pub fn radial(&self, t: f64, angle: f64) -> Vec3 {
        let n = self.normal(t);
        let b = self.tangent(t).cross(&n);
        angle.cos() * n + angle.sin() * b
    }

    /// Parameter of the closest point and its distance.
    pub fn closest(&self, p: &Vec3) -> (f64, f64) {
        let t = match self {
            AxisCurve::Line { start, direction, length } => {
                let d = Vec3::from(*direction).normalize();
                (p - Vec3::from(*start)).dot(&d).clamp(0.0, *length)
            }
            AxisCurve::Arc { center, radius, u, v, start_angle, length } => {
                let w = p - Vec3::from(*center);
                let a = w.dot(&Vec3::from(*v)).atan2(w.dot(&Vec3::from(*u)));
                let span = length / radius;
                let rel = (a - start_angle).rem_euclid(2.0 * PI);
                if rel <= span {
                    rel * radius
                } else {
                    // outside the arc: nearer endpoint
                    let d0 = (p - self.point(0.0)).norm();
                    let d1 = (p - self.point(*length)).norm();
                    if d0 <= d1 { 0.0 } else { *length }
                }
            }
        };
        (t, (p - self.point(t)).norm())
    }
}

/// Radius along the axis: a constant plus an optional raised-cosine bump.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadiusProfile {
    pub base: f64,
    #[serde(default)]
    pub bump: Option<Bump>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub amplitude: f64,
    pub center_t: f64,
    pub half_width: f64,
}

impl RadiusProfile {
    pub fn constant(r: f64) -> Self {
        RadiusProfile { base: r, bump: None }
    }

    pub fn at(&self, t: f64) -> f64 {
        match self.bump {
            Some(b) if (t - b.center_t).abs() < b.half_width => {
                self.base + b.amplitude * 0.5 * (1.0 + (PI * (t - b.center_t) / b.half_width).cos())
            }
            _ => self.base,
        }
    }

    /// Maximum radius over `[0, length]` and where it is reached.
    pub fn max_on(&self, length: f64) -> (f64, f64) {
        match self.bump {
            Some(b) if b.amplitude > 0.0 => {
                let t = b.center_t.clamp(0.0, length);
                (self.at(t), t)
            }
            _ => (self.base, 0.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StentMarker {
    pub t: f64,
    pub angle: f64,
    /// Distance of the marker center from the axis (mm).
    pub radius: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LeakSphere {
    pub t: f64,
    pub angle: f64,
    /// Distance of the sphere center from the axis (mm).
    pub offset: f64,
    pub radius: f64,
    pub hu: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HuLevels {
    pub background: f64,
    pub thrombus: f64,
    pub lumen: f64,
    pub metal: f64,
}

impl Default for HuLevels {
    fn default() -> Self {
        HuLevels {
            background: -50.0,
            thrombus: 40.0,
            lumen: 300.0,
            metal: 2000.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhantomSpec {
    pub grid: Grid,
    pub axis: AxisCurve,
    pub lumen_radius: RadiusProfile,
    pub outer_radius: RadiusProfile,
    pub min_gap: f64,
    pub hu: HuLevels,
    pub stent_markers: Vec<StentMarker>,
    pub leaks: Vec<LeakSphere>,
    pub noise_sigma: f64,
    pub rng_seed: u64,
}

impl Default for PhantomSpec {
    /// A 128³ fusiform aneurysm along z with a stent ring and two endoleaks.
    fn default() -> Self {
        let mut markers = Vec::new();
        for z in [30.0, 64.0, 98.0] {
            for m in 0..6 {
                markers.push(StentMarker {
                    t: z + 20.0,
                    angle: (m as f64 + 0.5) * PI / 3.0,
                    radius: 10.0,
                });
            }
        }
        PhantomSpec {
            grid: Grid::isotropic([128, 128, 128], 1.0),
            axis: AxisCurve::Line {
                start: [63.6, 64.3, -20.0],
                direction: [0.0, 0.0, 1.0],
                length: 168.0,
            },
            lumen_radius: RadiusProfile::constant(10.0),
            outer_radius: RadiusProfile {
                base: 16.0,
                bump: Some(Bump {
                    amplitude: 10.0,
                    center_t: 84.0,
                    half_width: 40.0,
                }),
            },
            min_gap: 2.0,
            hu: HuLevels::default(),
            stent_markers: markers,
            leaks: vec![
                LeakSphere { t: 74.3, angle: 0.8, offset: 17.6, radius: 4.0, hu: 250.0 },
                LeakSphere { t: 96.6, angle: 3.9, offset: 17.2, radius: 3.5, hu: 250.0 },
            ],
            noise_sigma: 15.0,
            rng_seed: 20080301,
        }
    }
}

impl PhantomSpec {
    /// Straight tube along z through the middle of an isotropic grid with
    /// constant radii and no markers, leaks or noise.
    pub fn straight_tube(dims: [usize; 3], spacing: f64, lumen: f64, outer: f64) -> Self {
        let g = Grid::isotropic(dims, spacing);
        let cx = (dims[0] - 1) as f64 * spacing / 2.0;
        let cy = (dims[1] - 1) as f64 * spacing / 2.0;
        let len = dims[2] as f64 * spacing;
        PhantomSpec {
            grid: g,
            axis: AxisCurve::Line {
                start: [cx, cy, -len / 2.0],
                direction: [0.0, 0.0, 1.0],
                length: 2.0 * len,
            },
            lumen_radius: RadiusProfile::constant(lumen),
            outer_radius: RadiusProfile::constant(outer),
            min_gap: 0.5,
            hu: HuLevels::default(),
            stent_markers: Vec::new(),
            leaks: Vec::new(),
            noise_sigma: 0.0,
            rng_seed: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::SpecInvalid(m));
        if let Err(e) = self.grid.validate() {
            return bad(e.to_string());
        }
        let len = self.axis.length();
        if !(len > 0.0) {
            return bad("axis length must be > 0".into());
        }
        if let AxisCurve::Arc { radius, .. } = self.axis {
            if !(radius > 0.0) {
                return bad("arc radius must be > 0".into());
            }
        }
        if !(self.min_gap >= 0.0) || !(self.noise_sigma >= 0.0) {
            return bad("min_gap and noise_sigma must be >= 0".into());
        }
        let h = self.hu;
        if !(h.lumen > h.thrombus) {
            return bad("lumen HU must exceed thrombus HU".into());
        }
        if !(h.metal > h.lumen) {
            return bad("metal HU must exceed lumen HU".into());
        }
        for (i, l) in self.leaks.iter().enumerate() {
            if !(l.hu > h.thrombus) {
                return bad(format!("leak {i} HU must exceed thrombus HU"));
            }
            if !(l.radius > 0.0) {
                return bad(format!("leak {i} radius must be > 0"));
            }
        }
        let samples = 2000;
        let min_spacing = self.grid.spacing.iter().cloned().fold(f64::INFINITY, f64::min);
        for s in 0..=samples {
            let t = len * s as f64 / samples as f64;
            let (ri, ro) = (self.lumen_radius.at(t), self.outer_radius.at(t));
            if !(ri > 0.0) {
                return bad(format!("lumen radius must be > 0 (t = {t:.2})"));
            }
            if ro < ri + self.min_gap {
                return bad(format!(
                    "outer radius {ro:.3} < lumen radius {ri:.3} + min_gap at t = {t:.2}"
                ));
            }
            let p = self.axis.point(t);
            if self.grid.is_interior(&p, 0.0) {
                for k in 0..16 {
                    let dir = self.axis.radial(t, k as f64 * PI / 8.0);
                    if !self.grid.is_interior(&(p + (ro + 2.0 * min_spacing) * dir), 0.0) {
                        return bad(format!(
                            "outer surface plus 2 voxels leaves the grid at t = {t:.2}"
                        ));
                    }
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AxisSample {
    pub t: f64,
    pub point: Vec3,
    pub tangent: Vec3,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub lumen_mask: BinaryMask,
    pub aneurysm_mask: BinaryMask,
    pub leak_masks: Vec<BinaryMask>,
    pub axis_samples: Vec<AxisSample>,
}

impl GroundTruth {
    pub fn thrombus_mask(&self) -> BinaryMask {
        self.aneurysm_mask.and_not(&self.lumen_mask).expect("same grid")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeakTruth {
    pub center: Vec3,
    pub radius: f64,
    pub analytic_volume_mm3: f64,
    pub voxel_volume_mm3: f64,
}

/// JSON summary of a phantom's analytic ground truth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthManifest {
    pub spec: PhantomSpec,
    pub axis_samples: Vec<AxisSample>,
    pub d_max_mm: f64,
    pub d_max_t: f64,
    pub d_max_point: Vec3,
    pub leaks: Vec<LeakTruth>,
}

impl GroundTruthManifest {
    pub fn new(spec: &PhantomSpec, truth: &GroundTruth) -> Self {
        let (r, t) = spec.outer_radius.max_on(spec.axis.length());
        let leaks = spec
            .leaks
            .iter()
            .zip(&truth.leak_masks)
            .map(|(l, m)| LeakTruth {
                center: leak_center(spec, l),
                radius: l.radius,
                analytic_volume_mm3: 4.0 / 3.0 * PI * l.radius.powi(3),
                voxel_volume_mm3: m.volume_mm3(),
            })
            .collect();
        GroundTruthManifest {
            spec: spec.clone(),
            axis_samples: truth.axis_samples.clone(),
            d_max_mm: 2.0 * r,
            d_max_t: t,
            d_max_point: spec.axis.point(t),
            leaks,
        }
    }
}

pub fn leak_center(spec: &PhantomSpec, l: &LeakSphere) -> Vec3 {
    spec.axis.point(l.t) + l.offset * spec.axis.radial(l.t, l.angle)
}

pub fn marker_center(spec: &PhantomSpec, m: &StentMarker) -> Vec3 {
    spec.axis.point(m.t) + m.radius * spec.axis.radial(m.t, m.angle)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Class {
    Background,
    Thrombus,
    Lumen,
}

pub fn generate(spec: &PhantomSpec) -> Result<(Volume, GroundTruth)> {
    spec.validate()?;
    let grid = spec.grid;
    let classes: Vec<Class> = (0..grid.len())
        .into_par_iter()
        .map(|o| {
            let p = grid.world(grid.ijk(o));
            let (t, d) = spec.axis.closest(&p);
            if d < spec.lumen_radius.at(t) {
                Class::Lumen
            } else if d < spec.outer_radius.at(t) {
                Class::Thrombus
            } else {
                Class::Background
            }
        })
        .collect();

    let lumen_mask = BinaryMask::from_bits(grid, classes.iter().map(|&c| c == Class::Lumen).collect())?;
    let aneurysm_mask =
        BinaryMask::from_bits(grid, classes.iter().map(|&c| c != Class::Background).collect())?;

    let mut data: Vec<f64> = classes
        .iter()
        .map(|c| match c {
            Class::Background => spec.hu.background,
            Class::Thrombus => spec.hu.thrombus,
            Class::Lumen => spec.hu.lumen,
        })
        .collect();

    let mut leak_masks = Vec::with_capacity(spec.leaks.len());
    for l in &spec.leaks {
        let c = leak_center(spec, l);
        let mut m = BinaryMask::empty(grid);
        stamp_sphere(&grid, &c, l.radius, |o| {
            if classes[o] == Class::Thrombus {
                data[o] = l.hu;
                m.set_offset(o);
            }
        });
        leak_masks.push(m);
    }

    let marker_r = grid.spacing.iter().cloned().fold(f64::INFINITY, f64::min);
    for m in &spec.stent_markers {
        let c = marker_center(spec, m);
        stamp_sphere(&grid, &c, marker_r, |o| data[o] = spec.hu.metal);
    }

    if spec.noise_sigma > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.rng_seed);
        let normal = Normal::new(0.0, spec.noise_sigma)
            .map_err(|e| Error::SpecInvalid(e.to_string()))?;
        for v in &mut data {
            *v += normal.sample(&mut rng);
        }
    }
    for v in &mut data {
        *v = v.round();
    }

    let n = (spec.axis.length().floor() as usize).max(1);
    let axis_samples = (0..=n)
        .map(|i| {
            let t = spec.axis.length() * i as f64 / n as f64;
            AxisSample {
                t,
                point: spec.axis.point(t),
                tangent: spec.axis.tangent(t),
            }
        })
        .collect();

    Ok((
        Volume::new(grid, data)?,
        GroundTruth {
            lumen_mask,
            aneurysm_mask,
            leak_masks,
            axis_samples,
        },
    ))
}

/// Visit every voxel whose center lies strictly within `radius` of `c`.
fn stamp_sphere(grid: &Grid, c: &Vec3, radius: f64, mut f: impl FnMut(usize)) {
    let q = grid.to_index(c);
    let mut lo = [0usize; 3];
    let mut hi = [0usize; 3];
    for a in 0..3 {
        let ext = radius / grid.spacing[a];
        let l = (q[a] - ext).floor().max(0.0);
        let h = (q[a] + ext).ceil().min((grid.dims[a] - 1) as f64);
        if l > h {
            return;
        }
        lo[a] = l as usize;
        hi[a] = h as usize;
    }
    for k in lo[2]..=hi[2] {
        for j in lo[1]..=hi[1] {
            for i in lo[0]..=hi[0] {
                if (grid.world([i, j, k]) - c).norm() < radius {
                    f(grid.offset(i, j, k));
                }
            }
        }
    }
}

impl BinaryMask {
    pub(crate) fn set_offset(&mut self, o: usize) {
        let [i, j, k] = self.grid().ijk(o);
        self.set(i, j, k, true);
    }
}
