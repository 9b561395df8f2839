//! Outer (thrombus) boundary: a coupled multi-scale active contour.
//!
//! The outer stack starts as a dilation of the inner stack and moves each
//! vertex along its own ray under
//!
//! * an image force: the Gaussian-derivative convolution of the opacity
//!   image along the ray, pulling vertices onto opacity ridges,
//! * a constraint force `w_con (d_min - mean_N) n` that keeps the local
//!   thrombus thickness consistent with its neighborhood,
//! * membrane smoothing over the (slice, ray) radius grid,
//!
//! with a hard clamp keeping every outer vertex at least `min_gap` outside
//! its inner partner. The kernel scale is reduced on a coarse-to-fine
//! schedule.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::contour::{angular_laplacian, longitudinal_laplacian, ContourStack};
use crate::error::{Error, Result};
use crate::lumen::max_abs_delta;
use crate::volume::{opacity_at, DerivKernel, OpacityParams, Vec3, Volume};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ThrombusParams {
    /// Dilation of the inner contours used as initialization (mm).
    pub init_offset: f64,
    /// Kernel standard deviations, strictly decreasing (mm).
    pub sigma_schedule: Vec<f64>,
    pub iterations_per_scale: usize,
    /// Step size (mm per unit force).
    pub tau: f64,
    pub w_img: f64,
    pub w_int_t: f64,
    pub w_int_r: f64,
    pub w_con: f64,
    /// Half-widths (slices, rays) of the thickness-averaging window.
    pub neighborhood: (usize, usize),
    /// Minimum outer-inner separation along every ray (mm).
    pub min_gap: f64,
    pub epsilon: f64,
    pub r_max: f64,
    /// Sample spacing of the kernel along the ray (mm).
    pub kernel_step: f64,
    pub opacity: OpacityParams,
}

impl Default for ThrombusParams {
    fn default() -> Self {
        ThrombusParams {
            init_offset: 3.0,
            sigma_schedule: vec![4.0, 2.0, 1.0],
            iterations_per_scale: 100,
            tau: 0.2,
            w_img: 40.0,
            w_int_t: 0.5,
            w_int_r: 0.5,
            w_con: 0.5,
            neighborhood: (2, 2),
            min_gap: 0.5,
            epsilon: 0.01,
            r_max: 40.0,
            kernel_step: 0.5,
            opacity: OpacityParams::default(),
        }
    }
}

impl ThrombusParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParam(m));
        if self.sigma_schedule.is_empty() {
            return bad("sigma_schedule must not be empty".into());
        }
        if self.sigma_schedule.iter().any(|&s| !(s > 0.0)) {
            return bad("sigma_schedule entries must be > 0".into());
        }
        if let Some(w) = self.sigma_schedule.windows(2).find(|w| !(w[1] < w[0])) {
            return bad(format!(
                "sigma_schedule must be strictly decreasing ({} then {})",
                w[0], w[1]
            ));
        }
        if !(self.min_gap > 0.0) {
            return bad("min_gap must be > 0".into());
        }
        if !(self.w_con >= 0.0) {
            return bad("w_con must be >= 0".into());
        }
        if !(self.tau > 0.0 && self.epsilon > 0.0 && self.kernel_step > 0.0) {
            return bad("tau, epsilon and kernel_step must be > 0".into());
        }
        if !(self.w_img >= 0.0 && self.w_int_t >= 0.0 && self.w_int_r >= 0.0) {
            return bad("force weights must be >= 0".into());
        }
        if !(self.r_max > self.min_gap) {
            return bad("r_max must exceed min_gap".into());
        }
        if !(self.init_offset >= 0.0) {
            return bad("init_offset must be >= 0".into());
        }
        if let Some(&s) = self.sigma_schedule.iter().find(|&&s| s < self.kernel_step / 2.0) {
            return bad(format!("sigma {s} is below half the kernel step"));
        }
        self.opacity.validate()
    }
}

/// Outer initialization: every inner radius grown by `offset`.
pub fn init_outer(inner: &ContourStack, offset: f64) -> ContourStack {
    let mut out = inner.clone();
    for c in &mut out.contours {
        for r in &mut c.radii {
            *r += offset;
        }
    }
    out
}

/// Directional derivative of the smoothed opacity along `ray_dir` at
/// `vertex`. Samples outside the volume take the nearest in-range value.
pub fn image_force(vol: &Volume, vertex: &Vec3, ray_dir: &Vec3, kernel: &DerivKernel, op: &OpacityParams) -> f64 {
    kernel.convolve(|s| opacity_at(vol, &(vertex + s * ray_dir), op).ok())
}

/// Constraint force at one outer vertex.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstraintForce {
    pub vector: Vec3,
    /// Projection onto the outward ray direction.
    pub radial: f64,
    pub d_min: f64,
    pub d_mean: f64,
}

/// Inner vertices of every slice, precomputed.
struct InnerCache {
    vertices: Vec<Vec<Vec3>>,
}

impl InnerCache {
    fn new(inner: &ContourStack) -> Self {
        InnerCache {
            vertices: inner.contours.iter().map(|c| c.vertices()).collect(),
        }
    }

    /// Shortest distance from `p` to the inner vertices of slices
    /// `i-1..=i+1`.
    fn d_min(&self, i: usize, p: &Vec3) -> f64 {
        let lo = i.saturating_sub(1);
        let hi = (i + 1).min(self.vertices.len() - 1);
        self.vertices[lo..=hi]
            .iter()
            .flatten()
            .map(|q| (p - q).norm_squared())
            .fold(f64::INFINITY, f64::min)
            .sqrt()
    }
}

/// Mean ray-wise separation `outer - inner` over the window around
/// `(i, k)`; rays wrap, slices clamp.
fn mean_separation(outer: &[Vec<f64>], inner: &[Vec<f64>], i: usize, k: usize, n: (usize, usize)) -> f64 {
    let m = outer.len() as isize;
    let rays = outer[i].len() as isize;
    let (a, b) = (n.0 as isize, n.1 as isize);
    let mut sum = 0.0;
    for di in -a..=a {
        let s = (i as isize + di).clamp(0, m - 1) as usize;
        for dk in -b..=b {
            let r = (k as isize + dk).rem_euclid(rays) as usize;
            sum += outer[s][r] - inner[s][r];
        }
    }
    sum / ((2 * a + 1) * (2 * b + 1)) as f64
}

pub fn constraint_force(
    outer: &ContourStack,
    inner: &ContourStack,
    i: usize,
    k: usize,
    tp: &ThrombusParams,
) -> Result<ConstraintForce> {
    outer.check_same_geometry(inner)?;
    if i >= outer.len() || k >= outer.n_rays {
        return Err(Error::InvalidParam(format!("vertex ({i}, {k}) outside the stack")));
    }
    let cache = InnerCache::new(inner);
    Ok(constraint_at(&cache, outer, &outer.radii(), &inner.radii(), i, k, tp))
}

/// `w_con (d_min - d_mean)` along the inward ray direction.
pub fn constraint_vector(w_con: f64, d_min: f64, d_mean: f64, ray_dir: &Vec3) -> Vec3 {
    w_con * (d_min - d_mean) * -ray_dir
}

fn constraint_at(
    cache: &InnerCache,
    outer: &ContourStack,
    r_out: &[Vec<f64>],
    r_in: &[Vec<f64>],
    i: usize,
    k: usize,
    tp: &ThrombusParams,
) -> ConstraintForce {
    let c = &outer.contours[i];
    let dir = c.ray_dir(k);
    let p = c.center + r_out[i][k] * dir;
    let d_min = cache.d_min(i, &p);
    let d_mean = mean_separation(r_out, r_in, i, k, tp.neighborhood);
    ConstraintForce {
        vector: constraint_vector(tp.w_con, d_min, d_mean, &dir),
        radial: -tp.w_con * (d_min - d_mean),
        d_min,
        d_mean,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleReport {
    pub sigma: f64,
    pub iterations: usize,
    pub converged: bool,
    pub final_max_delta: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DeformReport {
    pub scales: Vec<ScaleReport>,
}

/// Evolve the outer stack with an arbitrary radial image force.
///
/// `image(i, k, r, kernel)` returns the radial image force at slice `i`, ray
/// `k`, radius `r`; `observe` sees the radius grid after every clamped
/// iteration.
pub fn deform_with<F, O>(
    outer: &ContourStack,
    inner: &ContourStack,
    tp: &ThrombusParams,
    image: F,
    mut observe: O,
) -> Result<(ContourStack, DeformReport)>
where
    F: Fn(usize, usize, f64, &DerivKernel) -> f64 + Sync,
    O: FnMut(&[Vec<f64>]),
{
    tp.validate()?;
    outer.check_same_geometry(inner)?;
    let mut result = outer.clone();
    let mut report = DeformReport::default();
    if outer.is_empty() {
        return Ok((result, report));
    }
    let cache = InnerCache::new(inner);
    let r_in = inner.radii();
    let clamp = |i: usize, k: usize, r: f64| r.min(tp.r_max).max(r_in[i][k] + tp.min_gap);
    let mut r: Vec<Vec<f64>> = outer
        .radii()
        .iter()
        .enumerate()
        .map(|(i, row)| row.iter().enumerate().map(|(k, &x)| clamp(i, k, x)).collect())
        .collect();

    for &sigma in &tp.sigma_schedule {
        let kernel = DerivKernel::new(sigma, tp.kernel_step)?;
        let mut scale = ScaleReport {
            sigma,
            iterations: 0,
            converged: false,
            final_max_delta: 0.0,
        };
        for it in 1..=tp.iterations_per_scale {
            let next: Vec<Vec<f64>> = (0..r.len())
                .into_par_iter()
                .map(|i| {
                    (0..r[i].len())
                        .map(|k| {
                            let f_img = if tp.w_img != 0.0 { image(i, k, r[i][k], &kernel) } else { 0.0 };
                            let f_con = if tp.w_con != 0.0 {
                                constraint_at(&cache, outer, &r, &r_in, i, k, tp).radial
                            } else {
                                0.0
                            };
                            let f = tp.w_img * f_img
                                + tp.w_int_t * angular_laplacian(&r, i, k)
                                + tp.w_int_r * longitudinal_laplacian(&r, i, k)
                                + f_con;
                            clamp(i, k, r[i][k] + tp.tau * f)
                        })
                        .collect()
                })
                .collect();
            let delta = max_abs_delta(&r, &next);
            r = next;
            observe(&r);
            scale.iterations = it;
            scale.final_max_delta = delta;
            if delta < tp.epsilon {
                scale.converged = true;
                break;
            }
        }
        report.scales.push(scale);
    }
    result.set_radii(&r);
    Ok((result, report))
}

/// Deform the outer stack against the opacity image of `vol`.
pub fn deform(
    outer: &ContourStack,
    inner: &ContourStack,
    vol: &Volume,
    tp: &ThrombusParams,
) -> Result<(ContourStack, DeformReport)> {
    deform_with(
        outer,
        inner,
        tp,
        |i, k, r, kernel| {
            let c = &outer.contours[i];
            let dir = c.ray_dir(k);
            image_force(vol, &(c.center + r * dir), &dir, kernel, &tp.opacity)
        },
        |_| {},
    )
}

/// Initialize from the inner stack and deform.
pub fn segment_thrombus(
    inner: &ContourStack,
    vol: &Volume,
    tp: &ThrombusParams,
) -> Result<(ContourStack, DeformReport)> {
    let outer = init_outer(inner, tp.init_offset);
    deform(&outer, inner, vol, tp)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contour::RadialContour;
    use crate::volume::Grid;

    fn stack(slices: usize, n_rays: usize, r: f64) -> ContourStack {
        let contours = (0..slices)
            .map(|i| RadialContour::circle(Vec3::new(0.0, 0.0, 2.0 * i as f64), Vec3::x(), Vec3::y(), n_rays, r))
            .collect();
        ContourStack::new(contours).unwrap()
    }

    #[test]
    fn init_shifts_radii() {
        let mut inner = stack(3, 12, 8.0);
        assert!(init_outer(&inner, 3.0).contours.iter().flat_map(|c| &c.radii).all(|&r| r == 11.0));
        assert_eq!(init_outer(&inner, 0.0), inner);
        inner.contours[1].radii[4] = 6.5;
        let outer = init_outer(&inner, 2.0);
        for (a, b) in outer.contours.iter().zip(&inner.contours) {
            for (x, y) in a.radii.iter().zip(&b.radii) {
                assert!((x - y - 2.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn constant_opacity_gives_zero_force() {
        let vol = Volume::filled(Grid::isotropic([30, 30, 30], 1.0), 60.0).unwrap();
        let k = DerivKernel::new(2.0, 0.5).unwrap();
        let f = image_force(&vol, &Vec3::new(15.0, 15.0, 15.0), &Vec3::x(), &k, &OpacityParams::default());
        assert!(f.abs() < 1e-12);
    }

    #[test]
    fn concentric_stacks_have_no_constraint_force() {
        let inner = stack(5, 36, 8.0);
        let outer = init_outer(&inner, 4.0);
        let tp = ThrombusParams::default();
        for i in 0..5 {
            for k in 0..36 {
                let f = constraint_force(&outer, &inner, i, k, &tp).unwrap();
                assert!(f.vector.norm() <= 1e-12, "{:?}", f);
            }
        }
    }

    #[test]
    fn constraint_sign_opposes_perturbation() {
        let inner = stack(5, 36, 8.0);
        let mut outer = init_outer(&inner, 4.0);
        outer.contours[2].radii[7] += 1.5;
        let tp = ThrombusParams::default();
        let f = constraint_force(&outer, &inner, 2, 7, &tp).unwrap();
        assert!(f.radial < 0.0);
        outer.contours[2].radii[7] -= 3.0;
        let f = constraint_force(&outer, &inner, 2, 7, &tp).unwrap();
        assert!(f.radial > 0.0);
    }

    #[test]
    fn constraint_geometry_mismatch() {
        let inner = stack(5, 36, 8.0);
        let outer = stack(4, 36, 10.0);
        let tp = ThrombusParams::default();
        assert!(matches!(constraint_force(&outer, &inner, 0, 0, &tp), Err(Error::GeometryMismatch(_))));
        let outer = stack(5, 24, 10.0);
        assert!(matches!(
            deform_with(&outer, &inner, &tp, |_, _, _, _| 0.0, |_| {}),
            Err(Error::GeometryMismatch(_))
        ));
    }

    #[test]
    fn zero_offset_is_separated_on_first_step() {
        let inner = stack(4, 16, 6.0);
        let outer = init_outer(&inner, 0.0);
        let tp = ThrombusParams { sigma_schedule: vec![1.0], iterations_per_scale: 1, ..Default::default() };
        let (out, _) = deform_with(&outer, &inner, &tp, |_, _, _, _| -5.0, |_| {}).unwrap();
        for (a, b) in out.contours.iter().zip(&inner.contours) {
            for (x, y) in a.radii.iter().zip(&b.radii) {
                assert!(x - y >= tp.min_gap - 1e-12);
            }
        }
    }

    #[test]
    fn perturbed_vertex_relaxes_to_uniform_offset() {
        let inner = stack(9, 36, 8.0);
        let offset = 3.0;
        let mut outer = init_outer(&inner, offset);
        outer.contours[4].radii[10] += 1.0;
        let tp = ThrombusParams {
            w_img: 0.0,
            iterations_per_scale: 2000,
            sigma_schedule: vec![1.0],
            ..Default::default()
        };
        let (out, rep) = deform_with(&outer, &inner, &tp, |_, _, _, _| 0.0, |_| {}).unwrap();
        assert!(rep.scales[0].converged);
        let worst = out
            .contours
            .iter()
            .zip(&inner.contours)
            .flat_map(|(a, b)| a.radii.iter().zip(&b.radii).map(|(x, y)| (x - y - offset).abs()))
            .fold(0.0, f64::max);
        assert!(worst < tp.epsilon * 10.0, "{worst}");
    }

    #[test]
    fn schedule_must_decrease() {
        let tp = ThrombusParams { sigma_schedule: vec![1.0, 2.0], ..Default::default() };
        assert!(matches!(tp.validate(), Err(Error::InvalidParam(_))));
        let tp = ThrombusParams { sigma_schedule: vec![2.0, 2.0], ..Default::default() };
        assert!(tp.validate().is_err());
    }
}
