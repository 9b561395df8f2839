//! Segmentation quality: Dice overlap and one-directional surface distance
//! from a test mesh to a reference mask.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::contour::ContourStack;
use crate::error::{Error, Result};
use crate::geometry::{distance_map, triangulate, voxelize, BinaryMask, TriMesh};
use crate::volume::{Grid, Vec3};

/// `2|a∩b| / (|a|+|b|)`.
pub fn dice(a: &BinaryMask, b: &BinaryMask) -> Result<f64> {
    a.check_same_grid(b)?;
    let (na, nb) = (a.count(), b.count());
    if na + nb == 0 {
        return Err(Error::BothEmpty);
    }
    let both = a.bits().iter().zip(b.bits()).filter(|(x, y)| **x && **y).count();
    Ok(2.0 * both as f64 / (na + nb) as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SurfaceStats {
    #[serde(rename = "mean_segmentation_error_mm")]
    pub mean: f64,
    #[serde(rename = "std_segmentation_error_mm")]
    pub std: f64,
    #[serde(rename = "maximum_distance_mm")]
    pub max: f64,
    #[serde(rename = "vertices_under_1mm_pct")]
    pub pct_under_1mm: f64,
    #[serde(rename = "vertices_under_2mm_pct")]
    pub pct_under_2mm: f64,
    pub vertex_count: usize,
}

/// Distance from each test vertex to the reference surface (mask voxels with
/// a background face neighbor), read from the surface distance map by
/// trilinear interpolation.
pub fn surface_distances(test: &TriMesh, reference: &BinaryMask) -> Result<Vec<f64>> {
    point_distances(test.vertices(), reference)
}

/// As [`surface_distances`] for bare points.
pub fn point_distances(points: &[Vec3], reference: &BinaryMask) -> Result<Vec<f64>> {
    if reference.is_empty() {
        return Err(Error::EmptyReference);
    }
    let map = distance_map(&reference.surface())?;
    points.par_iter().map(|p| map.trilinear_sample(p)).collect()
}

pub fn surface_distance_stats(test: &TriMesh, reference: &BinaryMask) -> Result<SurfaceStats> {
    Ok(summarize(&surface_distances(test, reference)?))
}

pub fn point_distance_stats(points: &[Vec3], reference: &BinaryMask) -> Result<SurfaceStats> {
    Ok(summarize(&point_distances(points, reference)?))
}

fn summarize(d: &[f64]) -> SurfaceStats {
    let n = d.len().max(1) as f64;
    let mean = d.iter().sum::<f64>() / n;
    let var = d.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    let pct = |lim: f64| 100.0 * d.iter().filter(|&&x| x < lim).count() as f64 / n;
    SurfaceStats {
        mean,
        std: var.sqrt(),
        max: d.iter().cloned().fold(0.0, f64::max),
        pct_under_1mm: pct(1.0),
        pct_under_2mm: pct(2.0),
        vertex_count: d.len(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub dsc: f64,
    #[serde(flatten)]
    pub surface: SurfaceStats,
}

/// Triangulate and voxelize `test`, then compare with `truth`.
pub fn evaluate_pair(test: &ContourStack, truth: &BinaryMask, grid: &Grid) -> Result<EvalReport> {
    if truth.grid() != grid {
        return Err(Error::GridMismatch);
    }
    let mesh = triangulate(test)?;
    let mask = voxelize(&mesh, grid)?;
    evaluate_mesh(&mesh, &mask, truth)
}

/// As [`evaluate_pair`] for an already voxelized mesh.
pub fn evaluate_mesh(mesh: &TriMesh, mask: &BinaryMask, truth: &BinaryMask) -> Result<EvalReport> {
    let dsc = dice(mask, truth)?;
    let surface = surface_distance_stats(mesh, truth)?;
    Ok(EvalReport { dsc, surface })
}
