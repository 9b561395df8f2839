//! Endoleak detection: contrast-bright voxel clusters inside the thrombus,
//! after removing stent metal and partial-volume voxels.

use std::collections::VecDeque;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{dilate, BinaryMask};
use crate::io::write_ppm;
use crate::volume::{Vec3, Volume};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LeakParams {
    /// Endoleak intensity threshold (HU).
    pub theta: f64,
    /// Metal threshold (HU).
    pub theta_s: f64,
    /// Dilation of the stent mask (mm).
    pub pve_dilation: f64,
    /// Width of the excluded thrombus rim (mm).
    pub boundary_erosion: f64,
    /// Exclude the thrombus rim at all.
    pub rim_guard: bool,
    /// Smallest reported cluster (mm³).
    pub min_cluster: f64,
}

impl Default for LeakParams {
    fn default() -> Self {
        LeakParams {
            theta: 150.0,
            theta_s: 1500.0,
            pve_dilation: 2.0,
            boundary_erosion: 1.0,
            rim_guard: true,
            min_cluster: 20.0,
        }
    }
}

impl LeakParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.theta < self.theta_s) {
            return Err(Error::InvalidParam("endoleak theta must be below theta_s".into()));
        }
        if !(self.pve_dilation >= 0.0 && self.boundary_erosion >= 0.0 && self.min_cluster >= 0.0) {
            return Err(Error::InvalidParam(
                "endoleak radii and volumes must be >= 0".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EndoleakCluster {
    pub voxel_count: usize,
    pub volume_mm3: f64,
    pub centroid: Vec3,
    pub bbox_min: [usize; 3],
    pub bbox_max: [usize; 3],
    pub peak_hu: f64,
    #[serde(skip)]
    pub voxels: Vec<[usize; 3]>,
}

/// Aneurysm minus lumen.
pub fn build_thrombus_mask(aneurysm: &BinaryMask, lumen: &BinaryMask) -> Result<BinaryMask> {
    aneurysm.and_not(lumen)
}

/// Lumen voxels lying outside the aneurysm mask (expected to be zero).
pub fn lumen_outside_aneurysm(aneurysm: &BinaryMask, lumen: &BinaryMask) -> Result<usize> {
    Ok(lumen.and_not(aneurysm)?.count())
}

/// Metal voxels (at or above `theta_s`) dilated by `pve_dilation`.
pub fn build_exclusion_mask(vol: &Volume, lp: &LeakParams) -> BinaryMask {
    dilate(&BinaryMask::threshold(vol, lp.theta_s), lp.pve_dilation)
}

/// Thrombus voxels within `boundary_erosion` of a non-thrombus voxel.
pub fn rim_band(thrombus: &BinaryMask, lp: &LeakParams) -> BinaryMask {
    if !lp.rim_guard || lp.boundary_erosion <= 0.0 {
        return BinaryMask::empty(*thrombus.grid());
    }
    let outside = dilate(&thrombus.not(), lp.boundary_erosion);
    thrombus.and(&outside).expect("same grid")
}

/// Voxels that may belong to an endoleak: thrombus, not excluded metal, not
/// rim, and at or above `theta`.
pub fn candidate_mask(vol: &Volume, thrombus: &BinaryMask, lp: &LeakParams) -> Result<BinaryMask> {
    lp.validate()?;
    if vol.grid() != thrombus.grid() {
        return Err(Error::GridMismatch);
    }
    let exclusion = build_exclusion_mask(vol, lp);
    let rim = rim_band(thrombus, lp);
    let bright = BinaryMask::threshold(vol, lp.theta);
    thrombus.and_not(&exclusion)?.and_not(&rim)?.and(&bright)
}

/// 26-connected components, labelled 1.. in scan order; 0 is background.
pub fn label_components(mask: &BinaryMask) -> (Vec<u32>, u32) {
    let grid = *mask.grid();
    let dims = grid.dims.map(|d| d as isize);
    let mut labels = vec![0u32; grid.len()];
    let mut next = 0u32;
    let mut queue = VecDeque::new();
    for seed in mask.occupied() {
        if labels[seed] != 0 {
            continue;
        }
        next += 1;
        labels[seed] = next;
        queue.push_back(seed);
        while let Some(o) = queue.pop_front() {
            let [i, j, k] = grid.ijk(o).map(|c| c as isize);
            for dk in -1..=1 {
                for dj in -1..=1 {
                    for di in -1..=1 {
                        let (x, y, z) = (i + di, j + dj, k + dk);
                        if x < 0 || y < 0 || z < 0 || x >= dims[0] || y >= dims[1] || z >= dims[2] {
                            continue;
                        }
                        let n = grid.offset(x as usize, y as usize, z as usize);
                        if mask.bits()[n] && labels[n] == 0 {
                            labels[n] = next;
                            queue.push_back(n);
                        }
                    }
                }
            }
        }
    }
    (labels, next)
}

/// Endoleak clusters of at least `min_cluster` mm³, largest first.
pub fn detect(vol: &Volume, thrombus: &BinaryMask, lp: &LeakParams) -> Result<Vec<EndoleakCluster>> {
    let cand = candidate_mask(vol, thrombus, lp)?;
    let grid = *vol.grid();
    let (labels, n) = label_components(&cand);
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); n as usize];
    for (o, &l) in labels.iter().enumerate() {
        if l > 0 {
            members[l as usize - 1].push(o);
        }
    }
    let vv = grid.voxel_volume();
    let mut clusters: Vec<EndoleakCluster> = members
        .into_iter()
        .filter(|m| m.len() as f64 * vv >= lp.min_cluster)
        .map(|m| {
            let voxels: Vec<[usize; 3]> = m.iter().map(|&o| grid.ijk(o)).collect();
            let centroid = voxels.iter().map(|&v| grid.world(v)).sum::<Vec3>() / voxels.len() as f64;
            let mut lo = voxels[0];
            let mut hi = voxels[0];
            for v in &voxels {
                for a in 0..3 {
                    lo[a] = lo[a].min(v[a]);
                    hi[a] = hi[a].max(v[a]);
                }
            }
            EndoleakCluster {
                voxel_count: voxels.len(),
                volume_mm3: voxels.len() as f64 * vv,
                centroid,
                bbox_min: lo,
                bbox_max: hi,
                peak_hu: m.iter().map(|&o| vol.data()[o]).fold(f64::MIN, f64::max),
                voxels,
            }
        })
        .collect();
    // stable: equal volumes keep scan order
    clusters.sort_by(|a, b| b.voxel_count.cmp(&a.voxel_count));
    Ok(clusters)
}

/// Display window in HU.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub center: f64,
    pub width: f64,
}

impl Default for Window {
    fn default() -> Self {
        Window {
            center: 100.0,
            width: 700.0,
        }
    }
}

impl Window {
    pub fn gray(&self, hu: f64) -> u8 {
        let lo = self.center - self.width / 2.0;
        ((hu - lo) / self.width * 255.0).round().clamp(0.0, 255.0) as u8
    }
}

pub const OVERLAY_COLOR: [u8; 3] = [255, 0, 0];

#[derive(Debug, Clone, PartialEq)]
pub struct Overlay {
    pub width: usize,
    pub height: usize,
    pub rgb: Vec<[u8; 3]>,
}

impl Overlay {
    pub fn write_ppm(&self, path: impl AsRef<Path>) -> Result<()> {
        write_ppm(path, self.width, self.height, &self.rgb)
    }
}

/// Windowed slice perpendicular to `axis` with cluster voxels painted in
/// [`OVERLAY_COLOR`]. Pixel `(x, y)` runs over the two remaining axes in
/// ascending order.
pub fn render_overlay(
    vol: &Volume,
    clusters: &[EndoleakCluster],
    axis: usize,
    index: usize,
    window: Window,
) -> Result<Overlay> {
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
    let mut rgb = Vec::with_capacity(w * h);
    for y in 0..h {
        for x in 0..w {
            let mut ijk = [0; 3];
            ijk[axis] = index;
            ijk[a] = x;
            ijk[b] = y;
            let g = window.gray(vol.get(ijk[0], ijk[1], ijk[2]));
            rgb.push([g, g, g]);
        }
    }
    for c in clusters {
        for v in c.voxels.iter().filter(|v| v[axis] == index) {
            rgb[v[a] + w * v[b]] = OVERLAY_COLOR;
        }
    }
    Ok(Overlay { width: w, height: h, rgb })
}
