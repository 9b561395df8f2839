//! Aneurysm size on every centerline-orthogonal plane: maximum diameter and
//! cross-sectional area of the outer contour, and their stack-wide maxima.

use serde::{Deserialize, Serialize};

use crate::centerline::Centerline;
use crate::contour::{ContourStack, RadialContour};
use crate::error::{Error, Result};

/// Longest chord between two contour vertices.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Diameter {
    pub length: f64,
    /// Ray indices of the two vertices.
    pub pair: (usize, usize),
}

/// Maximum pairwise in-plane distance between contour vertices.
pub fn contour_diameter(c: &RadialContour) -> Diameter {
    let pts = c.planar();
    let mut best = Diameter {
        length: 0.0,
        pair: (0, 0),
    };
    let mut best2 = 0.0;
    for a in 0..pts.len() {
        for b in a + 1..pts.len() {
            let d2 = (pts[a][0] - pts[b][0]).powi(2) + (pts[a][1] - pts[b][1]).powi(2);
            if d2 > best2 {
                best2 = d2;
                best.pair = (a, b);
            }
        }
    }
    best.length = best2.sqrt();
    best
}

/// Absolute shoelace area of a planar polygon.
pub fn polygon_area(pts: &[[f64; 2]]) -> f64 {
    let n = pts.len();
    let twice: f64 = (0..n)
        .map(|i| {
            let (p, q) = (pts[i], pts[(i + 1) % n]);
            p[0] * q[1] - q[0] * p[1]
        })
        .sum();
    twice.abs() / 2.0
}

pub fn contour_area(c: &RadialContour) -> f64 {
    polygon_area(&c.planar())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliceSize {
    pub slice: usize,
    pub arc_length_mm: f64,
    pub diameter_mm: f64,
    pub area_mm2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizeProfile {
    pub slices: Vec<SliceSize>,
    pub d_max_mm: f64,
    pub d_max_slice: usize,
    pub d_max_arc_length_mm: f64,
    pub a_max_mm2: f64,
    pub a_max_slice: usize,
    pub a_max_arc_length_mm: f64,
}

pub fn size_profile(stack: &ContourStack, centerline: &Centerline) -> Result<SizeProfile> {
    if stack.is_empty() || stack.len() != centerline.len() {
        return Err(Error::LengthMismatch(format!(
            "{} contours for {} centerline points",
            stack.len(),
            centerline.len()
        )));
    }
    let s = centerline.arc_lengths();
    let slices: Vec<SliceSize> = stack
        .contours
        .iter()
        .enumerate()
        .map(|(i, c)| SliceSize {
            slice: i,
            arc_length_mm: s[i],
            diameter_mm: contour_diameter(c).length,
            area_mm2: contour_area(c),
        })
        .collect();
    // first index wins ties
    let argmax = |f: fn(&SliceSize) -> f64| {
        slices
            .iter()
            .fold(0, |best, x| if f(x) > f(&slices[best]) { x.slice } else { best })
    };
    let d = argmax(|x| x.diameter_mm);
    let a = argmax(|x| x.area_mm2);
    Ok(SizeProfile {
        d_max_mm: slices[d].diameter_mm,
        d_max_slice: d,
        d_max_arc_length_mm: s[d],
        a_max_mm2: slices[a].area_mm2,
        a_max_slice: a,
        a_max_arc_length_mm: s[a],
        slices,
    })
}

impl SizeProfile {
    /// CSV with columns `slice,arc_length_mm,diameter_mm,area_mm2`.
    pub fn write_csv(&self, w: impl std::io::Write) -> std::result::Result<(), csv::Error> {
        let mut out = csv::Writer::from_writer(w);
        for s in &self.slices {
            out.serialize(s)?;
        }
        out.flush()?;
        Ok(())
    }
}
