//! Lumen centerline: minimum-cost voxel path between two seeds, equidistant
//! resampling, tangents, and minimally rotating plane frames.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::volume::{Vec3, Volume};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PathCostParams {
    /// Lower lumen threshold (HU).
    pub lumen_floor: f64,
    /// Intensity above which the cost stops decreasing (HU).
    pub soft_cap: f64,
    /// Penalty scale for dark voxels.
    pub kappa: f64,
}

impl Default for PathCostParams {
    fn default() -> Self {
        PathCostParams {
            lumen_floor: 150.0,
            soft_cap: 400.0,
            kappa: 100.0,
        }
    }
}

impl PathCostParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.soft_cap > self.lumen_floor) {
            return Err(Error::InvalidParam(format!(
                "soft_cap {} must exceed lumen_floor {}",
                self.soft_cap, self.lumen_floor
            )));
        }
        if !(self.kappa >= 0.0) {
            return Err(Error::InvalidParam("kappa must be >= 0".into()));
        }
        Ok(())
    }

    /// Cost per mm of entering a voxel with intensity `hu`.
    #[inline]
    pub fn unit_cost(&self, hu: f64) -> f64 {
        1.0 + self.kappa / (1.0 + (hu.min(self.soft_cap) - self.lumen_floor).max(0.0))
    }
}

/// 26-neighborhood in lexicographic (di, dj, dk) order.
fn neighbor_offsets() -> Vec<[isize; 3]> {
    let mut out = Vec::with_capacity(26);
    for di in -1..=1 {
        for dj in -1..=1 {
            for dk in -1..=1 {
                if (di, dj, dk) != (0, 0, 0) {
                    out.push([di, dj, dk]);
                }
            }
        }
    }
    out
}

/// Cost of the edge from voxel `from` to its neighbor `to`.
pub fn edge_cost(vol: &Volume, from: [usize; 3], to: [usize; 3], pc: &PathCostParams) -> f64 {
    let s = vol.grid().spacing;
    let len = (0..3)
        .map(|a| ((to[a] as f64 - from[a] as f64) * s[a]).powi(2))
        .sum::<f64>()
        .sqrt();
    len * pc.unit_cost(vol.get(to[0], to[1], to[2]))
}

/// Total cost of a voxel path.
pub fn path_cost(vol: &Volume, path: &[[usize; 3]], pc: &PathCostParams) -> f64 {
    path.windows(2).map(|w| edge_cost(vol, w[0], w[1], pc)).sum()
}

#[derive(PartialEq)]
struct Entry {
    cost: f64,
    node: usize,
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on cost, then on node index
        other
            .cost
            .total_cmp(&self.cost)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Minimum-cost 26-connected voxel path from `start` to `end` (inclusive).
pub fn extract_path(
    vol: &Volume,
    start: [usize; 3],
    end: [usize; 3],
    pc: &PathCostParams,
) -> Result<Vec<[usize; 3]>> {
    pc.validate()?;
    let grid = *vol.grid();
    for seed in [start, end] {
        if (0..3).any(|a| seed[a] >= grid.dims[a]) {
            return Err(Error::InvalidParam(format!("seed {seed:?} outside dims {:?}", grid.dims)));
        }
        let hu = vol.get(seed[0], seed[1], seed[2]);
        if hu < pc.lumen_floor {
            return Err(Error::SeedBelowThreshold {
                index: seed,
                hu,
                threshold: pc.lumen_floor,
            });
        }
    }
    let src = grid.offset(start[0], start[1], start[2]);
    let dst = grid.offset(end[0], end[1], end[2]);
    let n = grid.len();
    let mut dist = vec![f64::INFINITY; n];
    let mut prev = vec![usize::MAX; n];
    let mut done = vec![false; n];
    let offsets = neighbor_offsets();
    let s = grid.spacing;
    let step_len: Vec<f64> = offsets
        .iter()
        .map(|o| (0..3).map(|a| (o[a] as f64 * s[a]).powi(2)).sum::<f64>().sqrt())
        .collect();
    let dims = grid.dims.map(|d| d as isize);

    dist[src] = 0.0;
    let mut heap = BinaryHeap::new();
    heap.push(Entry { cost: 0.0, node: src });
    while let Some(Entry { cost, node }) = heap.pop() {
        if done[node] {
            continue;
        }
        done[node] = true;
        if node == dst {
            break;
        }
        let [i, j, k] = grid.ijk(node).map(|c| c as isize);
        for (o, len) in offsets.iter().zip(&step_len) {
            let (x, y, z) = (i + o[0], j + o[1], k + o[2]);
            if x < 0 || y < 0 || z < 0 || x >= dims[0] || y >= dims[1] || z >= dims[2] {
                continue;
            }
            let next = grid.offset(x as usize, y as usize, z as usize);
            if done[next] {
                continue;
            }
            let c = cost + len * pc.unit_cost(vol.data()[next]);
            if c < dist[next] {
                dist[next] = c;
                prev[next] = node;
                heap.push(Entry { cost: c, node: next });
            }
        }
    }
    if !dist[dst].is_finite() {
        return Err(Error::NoPath);
    }
    let mut path = vec![grid.ijk(dst)];
    let mut cur = dst;
    while cur != src {
        cur = prev[cur];
        path.push(grid.ijk(cur));
    }
    path.reverse();
    Ok(path)
}

/// Walk a polyline placing points at straight-line distance `step` from
/// each other; the last original endpoint is always kept, so the final gap
/// may be shorter.
pub fn resample(polyline: &[Vec3], step: f64) -> Result<Vec<Vec3>> {
    if !(step > 0.0) {
        return Err(Error::InvalidParam(format!("step must be > 0, got {step}")));
    }
    let length: f64 = polyline.windows(2).map(|w| (w[1] - w[0]).norm()).sum();
    if polyline.len() < 2 || length < step {
        return Err(Error::TooShort { length, step });
    }
    let mut out = vec![polyline[0]];
    let mut seg = 0;
    let mut t0 = 0.0;
    let r2 = step * step;
    'walk: loop {
        let p = *out.last().unwrap();
        while seg + 1 < polyline.len() {
            let a = polyline[seg];
            let d = polyline[seg + 1] - a;
            let dd = d.norm_squared();
            if dd > 0.0 {
                // |a + t d - p|^2 = step^2, take the root leaving the ball
                let w = a - p;
                let b = w.dot(&d);
                let c = w.norm_squared() - r2;
                let disc = b * b - dd * c;
                if disc >= 0.0 {
                    let t = (-b + disc.sqrt()) / dd;
                    if t >= t0 && t <= 1.0 {
                        out.push(a + t * d);
                        t0 = t;
                        continue 'walk;
                    }
                }
            }
            seg += 1;
            t0 = 0.0;
        }
        break;
    }
    let end = *polyline.last().unwrap();
    if (end - *out.last().unwrap()).norm() > 1e-9 * step {
        out.push(end);
    }
    Ok(out)
}

/// In-plane orthonormal axes of a centerline-orthogonal plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    pub u: Vec3,
    pub v: Vec3,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Centerline {
    pub step_mm: f64,
    pub points: Vec<Vec3>,
    pub tangents: Vec<Vec3>,
    pub frames: Vec<Frame>,
}

impl Centerline {
    pub fn from_points(points: Vec<Vec3>, step_mm: f64) -> Result<Self> {
        let (tangents, frames) = build_frames(&points)?;
        Ok(Centerline {
            step_mm,
            points,
            tangents,
            frames,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Cumulative polyline length at each point (mm).
    pub fn arc_lengths(&self) -> Vec<f64> {
        let mut acc = 0.0;
        let mut out = Vec::with_capacity(self.len());
        for (i, p) in self.points.iter().enumerate() {
            if i > 0 {
                acc += (p - self.points[i - 1]).norm();
            }
            out.push(acc);
        }
        out
    }
}

/// Trace, resample and frame a centerline between two seed voxels.
pub fn extract_centerline(
    vol: &Volume,
    start: [usize; 3],
    end: [usize; 3],
    pc: &PathCostParams,
    step_mm: f64,
) -> Result<Centerline> {
    let path = extract_path(vol, start, end, pc)?;
    let world: Vec<Vec3> = path.iter().map(|&ijk| vol.grid().world(ijk)).collect();
    let points = resample(&world, step_mm)?;
    Centerline::from_points(points, step_mm)
}

/// Rotate `x` by the minimal rotation taking unit `from` onto unit `to`.
fn minimal_rotation(x: &Vec3, from: &Vec3, to: &Vec3) -> Vec3 {
    let axis = from.cross(to);
    let s = axis.norm();
    let c = from.dot(to);
    if s < 1e-15 {
        // parallel; antiparallel tangents do not occur on resampled paths
        return *x;
    }
    let k = axis / s;
    x * c + k.cross(x) * s + k * k.dot(x) * (1.0 - c)
}

/// Unit tangents by central differences (one-sided at the ends) and plane
/// frames propagated by minimal rotation. `v = tangent x u`.
pub fn build_frames(points: &[Vec3]) -> Result<(Vec<Vec3>, Vec<Frame>)> {
    let n = points.len();
    if n < 2 {
        return Err(Error::DegeneratePath(0));
    }
    if let Some(i) = points.windows(2).position(|w| (w[1] - w[0]).norm() < 1e-12) {
        return Err(Error::DegeneratePath(i));
    }
    let mut tangents = Vec::with_capacity(n);
    for i in 0..n {
        let d = points[(i + 1).min(n - 1)] - points[i.saturating_sub(1)];
        let norm = d.norm();
        if norm < 1e-12 {
            return Err(Error::DegeneratePath(i));
        }
        tangents.push(d / norm);
    }
    let t0 = tangents[0];
    // least aligned coordinate axis seeds the first frame
    let axis = [Vec3::x(), Vec3::y(), Vec3::z()]
        .into_iter()
        .min_by(|a, b| a.dot(&t0).abs().total_cmp(&b.dot(&t0).abs()))
        .unwrap();
    let mut u = (axis - axis.dot(&t0) * t0).normalize();
    let mut frames = Vec::with_capacity(n);
    for i in 0..n {
        let t = tangents[i];
        if i > 0 {
            u = minimal_rotation(&u, &tangents[i - 1], &t);
        }
        u = (u - u.dot(&t) * t).normalize();
        let v = t.cross(&u);
        frames.push(Frame { u, v });
    }
    Ok((tangents, frames))
}
