//! Point-in-mesh rasterization by ray parity along +x.
//!
//! Each voxel row `(j, k)` is a ray parallel to x. Triangles are projected
//! onto the (y, z) plane; a row is covered by a triangle when its (y, z)
//! point falls inside the projection under a top-left rule, so a row hitting
//! an edge or vertex shared by several triangles is counted exactly once.

use crate::error::Result;
use crate::volume::Grid;

use super::{BinaryMask, TriMesh};

/// 2D edge function of `p` against the directed edge `a -> b`, evaluated
/// from a canonical endpoint order so that `edge(a, b, p) == -edge(b, a, p)`
/// holds bit for bit.
#[inline]
fn edge(a: [f64; 2], b: [f64; 2], p: [f64; 2]) -> f64 {
    let f = |a: [f64; 2], b: [f64; 2]| (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]);
    if (a[0], a[1]) <= (b[0], b[1]) {
        f(a, b)
    } else {
        -f(b, a)
    }
}

/// Whether a zero edge function value counts as inside, for a
/// counter-clockwise triangle. Exactly one of `a -> b` and `b -> a` qualifies.
#[inline]
fn top_left(a: [f64; 2], b: [f64; 2]) -> bool {
    let d = [b[0] - a[0], b[1] - a[1]];
    d[1] < 0.0 || (d[1] == 0.0 && d[0] > 0.0)
}

/// Voxelize a watertight mesh: a voxel is occupied iff its center is inside.
pub fn voxelize(mesh: &TriMesh, grid: &Grid) -> Result<BinaryMask> {
    mesh.check_watertight()?;
    let [nx, ny, nz] = grid.dims;
    let mut crossings: Vec<Vec<f64>> = vec![Vec::new(); ny * nz];

    for t in 0..mesh.triangles().len() {
        let tri = mesh.triangle(t);
        // index-space coordinates
        let q = tri.map(|p| grid.to_index(&p));
        let mut a = [q[0][1], q[0][2]];
        let mut b = [q[1][1], q[1][2]];
        let c = [q[2][1], q[2][2]];
        let (mut xa, mut xb, xc) = (q[0][0], q[1][0], q[2][0]);
        let mut area = edge(a, b, c);
        if area == 0.0 {
            continue;
        }
        if area < 0.0 {
            std::mem::swap(&mut a, &mut b);
            std::mem::swap(&mut xa, &mut xb);
            area = -area;
        }
        let lo_y = a[0].min(b[0]).min(c[0]).ceil().max(0.0);
        let hi_y = a[0].max(b[0]).max(c[0]).floor().min((ny - 1) as f64);
        let lo_z = a[1].min(b[1]).min(c[1]).ceil().max(0.0);
        let hi_z = a[1].max(b[1]).max(c[1]).floor().min((nz - 1) as f64);
        if lo_y > hi_y || lo_z > hi_z {
            continue;
        }
        let (tl_ab, tl_bc, tl_ca) = (top_left(a, b), top_left(b, c), top_left(c, a));
        for k in lo_z as usize..=hi_z as usize {
            for j in lo_y as usize..=hi_y as usize {
                let p = [j as f64, k as f64];
                let w_c = edge(a, b, p);
                let w_a = edge(b, c, p);
                let w_b = edge(c, a, p);
                let inside = |w: f64, tl: bool| w > 0.0 || (w == 0.0 && tl);
                if inside(w_c, tl_ab) && inside(w_a, tl_bc) && inside(w_b, tl_ca) {
                    let x = (w_a * xa + w_b * xb + w_c * xc) / area;
                    crossings[j + ny * k].push(x);
                }
            }
        }
    }

    let mut mask = BinaryMask::empty(*grid);
    for k in 0..nz {
        for j in 0..ny {
            let row = &mut crossings[j + ny * k];
            if row.is_empty() {
                continue;
            }
            row.sort_by(f64::total_cmp);
            for i in 0..nx {
                let x = i as f64;
                let beyond = row.len() - row.partition_point(|&c| c <= x);
                if beyond % 2 == 1 {
                    mask.set(i, j, k, true);
                }
            }
        }
    }
    Ok(mask)
}
