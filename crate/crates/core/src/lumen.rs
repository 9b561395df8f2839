//! Inner (lumen) boundary: radial ray casting against a lower threshold on
//! every centerline plane, then a threshold-driven active contour over the
//! whole stack.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::centerline::{Centerline, Frame};
use crate::contour::{angular_laplacian, longitudinal_laplacian, ContourStack, RadialContour, RayStop};
use crate::error::{Error, Result};
use crate::volume::{Vec3, Volume};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LumenParams {
    /// Lower lumen threshold (HU).
    pub theta1: f64,
    /// Upper auxiliary threshold (HU), diagnostics only.
    pub theta2: f64,
    /// Metal threshold (HU); brighter samples count as lumen interior.
    pub theta_s: f64,
    pub n_rays: usize,
    pub ray_step: f64,
    pub r_max: f64,
    pub tension: f64,
    pub rigidity: f64,
    pub tau: f64,
    pub max_iterations: usize,
    pub epsilon: f64,
}

impl Default for LumenParams {
    fn default() -> Self {
        LumenParams {
            theta1: 150.0,
            theta2: 800.0,
            theta_s: 1500.0,
            n_rays: 72,
            ray_step: 0.25,
            r_max: 40.0,
            tension: 1.0,
            rigidity: 0.5,
            tau: 0.2,
            max_iterations: 200,
            epsilon: 0.01,
        }
    }
}

impl LumenParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParam(m.to_string()));
        if !(self.theta1 < self.theta2 && self.theta2 < self.theta_s) {
            return bad("lumen thresholds must satisfy theta1 < theta2 < theta_s");
        }
        if self.n_rays < 8 {
            return bad("n_rays must be >= 8");
        }
        if !(self.ray_step > 0.0) {
            return bad("ray_step must be > 0");
        }
        if !(self.r_max > self.ray_step) {
            return bad("r_max must exceed ray_step");
        }
        if !(self.tau > 0.0 && self.epsilon > 0.0) {
            return bad("tau and epsilon must be > 0");
        }
        if !(self.tension >= 0.0 && self.rigidity >= 0.0) {
            return bad("ACM weights must be >= 0");
        }
        Ok(())
    }
}

/// Convergence record of one active contour run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AcmReport {
    pub iterations: usize,
    pub converged: bool,
    pub final_max_delta: f64,
}

/// Cast `lp.n_rays` rays in the plane `(frame.u, frame.v)` around `center`.
///
/// A ray stops at the first sample below `theta1`; the radius is refined by
/// linear interpolation between the bracketing samples. Samples above
/// `theta_s` (stent metal) are capped at `theta_s` and count as interior.
pub fn cast_lumen_contour(vol: &Volume, center: &Vec3, frame: &Frame, lp: &LumenParams) -> Result<RadialContour> {
    let hu0 = vol.trilinear_sample(center)?;
    if hu0 < lp.theta1 {
        return Err(Error::CenterBelowThreshold {
            hu: hu0,
            threshold: lp.theta1,
        });
    }
    let n = lp.n_rays;
    let steps = (lp.r_max / lp.ray_step).ceil() as usize;
    let mut radii = Vec::with_capacity(n);
    let mut flags = Vec::with_capacity(n);
    for k in 0..n {
        let dir = crate::contour::ray_direction(&frame.u, &frame.v, k, n);
        let mut prev_s: f64 = 0.0;
        let mut prev_hu = hu0.min(lp.theta_s);
        let mut hit = None;
        for step in 1..=steps {
            let s = (step as f64 * lp.ray_step).min(lp.r_max);
            let Ok(hu) = vol.trilinear_sample(&(center + s * dir)) else {
                hit = Some((prev_s.max(lp.ray_step), RayStop::OutOfVolume));
                break;
            };
            if hu < lp.theta1 {
                let frac = (prev_hu - lp.theta1) / (prev_hu - hu);
                let r = prev_s + frac * (s - prev_s);
                hit = Some((r.max(f64::MIN_POSITIVE), RayStop::ThresholdHit));
                break;
            }
            prev_s = s;
            prev_hu = hu.min(lp.theta_s);
        }
        let (r, flag) = hit.unwrap_or((lp.r_max, RayStop::RMax));
        radii.push(r.min(lp.r_max));
        flags.push(flag);
    }
    Ok(RadialContour {
        center: *center,
        u: frame.u,
        v: frame.v,
        radii,
        flags,
    })
}

/// Unit balloon force pointing toward the threshold crossing along the ray,
/// zero once the crossing lies within one ray step of the vertex.
pub fn threshold_force(vol: &Volume, c: &RadialContour, k: usize, r: f64, lp: &LumenParams) -> f64 {
    let dir = c.ray_dir(k);
    let h = lp.ray_step;
    let inside = |s: f64| {
        vol.trilinear_sample(&(c.center + s.max(0.0) * dir))
            .map(|hu| hu >= lp.theta1)
            .unwrap_or(false)
    };
    match (inside(r - h), inside(r + h)) {
        (true, true) => 1.0,
        (false, false) => -1.0,
        (true, false) => 0.0,
        (false, true) => {
            if inside(r) {
                1.0
            } else {
                -1.0
            }
        }
    }
}

/// Explicit (Jacobi) radial evolution
/// `r <- r + tau (w_t L_angle(r) + w_r L_slice(r) + F(i, k, r))`, radii
/// clamped to `[ray_step, r_max]`.
pub fn evolve_lumen<F>(stack: &ContourStack, lp: &LumenParams, force: F) -> Result<(ContourStack, AcmReport)>
where
    F: Fn(usize, usize, f64) -> f64 + Sync,
{
    lp.validate()?;
    stack.validate()?;
    let mut out = stack.clone();
    if stack.is_empty() {
        return Ok((out, AcmReport { converged: true, ..Default::default() }));
    }
    let mut r = stack.radii();
    let mut report = AcmReport::default();
    for it in 1..=lp.max_iterations {
        let next: Vec<Vec<f64>> = (0..r.len())
            .into_par_iter()
            .map(|i| {
                (0..r[i].len())
                    .map(|k| {
                        let f = lp.tension * angular_laplacian(&r, i, k)
                            + lp.rigidity * longitudinal_laplacian(&r, i, k)
                            + force(i, k, r[i][k]);
                        (r[i][k] + lp.tau * f).clamp(lp.ray_step, lp.r_max)
                    })
                    .collect()
            })
            .collect();
        let delta = max_abs_delta(&r, &next);
        r = next;
        report.iterations = it;
        report.final_max_delta = delta;
        if delta < lp.epsilon {
            report.converged = true;
            break;
        }
    }
    out.set_radii(&r);
    Ok((out, report))
}

pub(crate) fn max_abs_delta(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    a.iter()
        .zip(b)
        .flat_map(|(x, y)| x.iter().zip(y).map(|(p, q)| (p - q).abs()))
        .fold(0.0, f64::max)
}

/// Threshold-based 3D active contour regularization of a cast stack.
pub fn regularize_lumen(stack: &ContourStack, vol: &Volume, lp: &LumenParams) -> Result<(ContourStack, AcmReport)> {
    evolve_lumen(stack, lp, |i, k, r| threshold_force(vol, &stack.contours[i], k, r, lp))
}

/// Per-slice count of rays whose last interior sample lies in
/// `[theta1, theta2]`, i.e. where the lumen edge is weakly contrasted.
pub fn weak_edge_counts(vol: &Volume, stack: &ContourStack, lp: &LumenParams) -> Vec<usize> {
    stack
        .contours
        .iter()
        .map(|c| {
            (0..c.n_rays())
                .filter(|&k| c.flags[k] == RayStop::ThresholdHit)
                .filter(|&k| {
                    let s = (c.radii[k] - lp.ray_step).max(0.0);
                    vol.trilinear_sample(&(c.center + s * c.ray_dir(k)))
                        .map(|hu| hu >= lp.theta1 && hu <= lp.theta2)
                        .unwrap_or(false)
                })
                .count()
        })
        .collect()
}

/// Cast one contour per centerline point and regularize the stack.
pub fn segment_lumen(vol: &Volume, centerline: &Centerline, lp: &LumenParams) -> Result<(ContourStack, AcmReport)> {
    lp.validate()?;
    let contours = (0..centerline.len())
        .into_par_iter()
        .map(|i| cast_lumen_contour(vol, &centerline.points[i], &centerline.frames[i], lp))
        .collect::<Result<Vec<_>>>()?;
    let stack = ContourStack::new(contours)?;
    regularize_lumen(&stack, vol, lp)
}
