use std::collections::HashMap;

use crate::contour::ContourStack;
use crate::error::{Error, Result};
use crate::volume::Vec3;

/// Indexed triangle mesh in world mm.
#[derive(Debug, Clone, PartialEq)]
pub struct TriMesh {
    vertices: Vec<Vec3>,
    triangles: Vec<[usize; 3]>,
}

impl TriMesh {
    pub fn new(vertices: Vec<Vec3>, triangles: Vec<[usize; 3]>) -> Result<Self> {
        if let Some(t) = triangles.iter().find(|t| t.iter().any(|&i| i >= vertices.len())) {
            return Err(Error::InvalidParam(format!(
                "triangle {t:?} references a missing vertex"
            )));
        }
        Ok(TriMesh { vertices, triangles })
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn triangle(&self, t: usize) -> [Vec3; 3] {
        self.triangles[t].map(|i| self.vertices[i])
    }

    /// Undirected edge count.
    pub fn edge_count(&self) -> usize {
        self.edge_uses().len()
    }

    fn edge_uses(&self) -> HashMap<(usize, usize), (usize, usize)> {
        // (lo, hi) -> (uses as lo->hi, uses as hi->lo)
        let mut edges: HashMap<(usize, usize), (usize, usize)> = HashMap::new();
        for t in &self.triangles {
            for e in 0..3 {
                let (a, b) = (t[e], t[(e + 1) % 3]);
                let entry = edges.entry((a.min(b), a.max(b))).or_default();
                if a < b {
                    entry.0 += 1;
                } else {
                    entry.1 += 1;
                }
            }
        }
        edges
    }

    /// Every edge shared by exactly two triangles that traverse it in
    /// opposite directions.
    pub fn check_watertight(&self) -> Result<()> {
        if self.triangles.is_empty() {
            return Err(Error::NonWatertight("mesh has no triangles".into()));
        }
        let mut bad: Vec<_> = self
            .edge_uses()
            .into_iter()
            .filter(|(_, uses)| *uses != (1, 1))
            .collect();
        if bad.is_empty() {
            return Ok(());
        }
        bad.sort();
        let ((a, b), (f, r)) = bad[0];
        Err(Error::NonWatertight(format!(
            "{} bad edges, e.g. ({a}, {b}) used {f}x forward and {r}x backward",
            bad.len()
        )))
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.vertices.len() as i64 - self.edge_count() as i64 + self.triangles.len() as i64
    }

    /// Enclosed volume by the divergence theorem; positive for outward
    /// orientation.
    pub fn signed_volume(&self) -> f64 {
        self.triangles
            .iter()
            .map(|t| {
                let [a, b, c] = t.map(|i| self.vertices[i]);
                a.dot(&b.cross(&c))
            })
            .sum::<f64>()
            / 6.0
    }

    fn flip(&mut self) {
        for t in &mut self.triangles {
            t.swap(1, 2);
        }
    }
}

/// Close a contour stack into a tube: quad strips between consecutive
/// contours and triangle fans to each end contour's centroid.
pub fn triangulate(stack: &ContourStack) -> Result<TriMesh> {
    let n = stack.n_rays;
    let m = stack.len();
    if m < 2 {
        return Err(Error::DegenerateStack(format!("{m} contours, need at least 2")));
    }
    if n < 3 {
        return Err(Error::DegenerateStack(format!("{n} rays, need at least 3")));
    }
    stack
        .validate()
        .map_err(|e| Error::DegenerateStack(e.to_string()))?;

    let mut vertices: Vec<Vec3> = stack.contours.iter().flat_map(|c| c.vertices()).collect();
    let centroid = |ring: &[Vec3]| ring.iter().sum::<Vec3>() / ring.len() as f64;
    let first = vertices.len();
    vertices.push(centroid(&vertices[..n]));
    let last = vertices.len();
    vertices.push(centroid(&vertices[(m - 1) * n..m * n]));

    let id = |i: usize, k: usize| i * n + k % n;
    let mut triangles = Vec::with_capacity(2 * n * m);
    for i in 0..m - 1 {
        for k in 0..n {
            triangles.push([id(i, k), id(i, k + 1), id(i + 1, k + 1)]);
            triangles.push([id(i, k), id(i + 1, k + 1), id(i + 1, k)]);
        }
    }
    for k in 0..n {
        triangles.push([first, id(0, k + 1), id(0, k)]);
        triangles.push([last, id(m - 1, k), id(m - 1, k + 1)]);
    }
    let mut mesh = TriMesh { vertices, triangles };
    let vol = mesh.signed_volume();
    if vol < 0.0 {
        mesh.flip();
    } else if vol == 0.0 {
        return Err(Error::DegenerateStack("stack encloses zero volume".into()));
    }
    Ok(mesh)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contour::{RadialContour, RayStop};
    use std::f64::consts::PI;

    fn cylinder(n_rays: usize, slices: usize, dz: f64, r: f64) -> ContourStack {
        let contours = (0..slices)
            .map(|i| RadialContour::circle(Vec3::new(0.0, 0.0, i as f64 * dz), Vec3::x(), Vec3::y(), n_rays, r))
            .collect();
        ContourStack::new(contours).unwrap()
    }

    #[test]
    fn two_triangles_counting() {
        let mesh = triangulate(&cylinder(3, 2, 1.0, 1.0)).unwrap();
        assert_eq!(mesh.vertices().len(), 8);
        assert_eq!(mesh.triangles().len(), 12);
        assert_eq!(mesh.edge_count(), 18);
        assert_eq!(mesh.euler_characteristic(), 2);
        mesh.check_watertight().unwrap();
    }

    #[test]
    fn cylinder_volume() {
        let mesh = triangulate(&cylinder(72, 21, 1.0, 10.0)).unwrap();
        let expect = PI * 100.0 * 20.0;
        assert!((mesh.signed_volume() - expect).abs() / expect < 0.01);
    }

    #[test]
    fn orientation_is_outward_for_either_frame_handedness() {
        let mut s = cylinder(16, 4, 2.0, 5.0);
        for c in &mut s.contours {
            c.v = -c.v;
        }
        let mesh = triangulate(&s).unwrap();
        assert!(mesh.signed_volume() > 0.0);
        mesh.check_watertight().unwrap();
    }

    #[test]
    fn degenerate_stacks() {
        assert!(matches!(triangulate(&cylinder(8, 1, 1.0, 1.0)), Err(Error::DegenerateStack(_))));
        let s = ContourStack {
            n_rays: 2,
            contours: vec![
                RadialContour { center: Vec3::zeros(), u: Vec3::x(), v: Vec3::y(), radii: vec![1.0; 2], flags: vec![RayStop::RMax; 2] };
                2
            ],
        };
        assert!(triangulate(&s).is_err());
    }

    #[test]
    fn detects_holes() {
        let mesh = triangulate(&cylinder(6, 3, 1.0, 1.0)).unwrap();
        let mut tris = mesh.triangles().to_vec();
        tris.pop();
        let open = TriMesh::new(mesh.vertices().to_vec(), tris).unwrap();
        assert!(matches!(open.check_watertight(), Err(Error::NonWatertight(_))));
    }
}
