//! Exact Euclidean distance transform by separable lower envelopes of
//! parabolas, one axis at a time, with physical voxel spacing.

use crate::error::{Error, Result};
use crate::volume::Volume;

use super::BinaryMask;

/// 1D squared distance transform of `f` on sites spaced `s` apart.
fn envelope_1d(f: &[f64], s: f64, out: &mut [f64], sites: &mut Vec<usize>, bounds: &mut Vec<f64>) {
    sites.clear();
    bounds.clear();
    let key = |q: usize| f[q] + (q as f64 * s).powi(2);
    for q in 0..f.len() {
        if !f[q].is_finite() {
            continue;
        }
        loop {
            let Some(&v) = sites.last() else {
                sites.push(q);
                bounds.push(f64::NEG_INFINITY);
                break;
            };
            let x = (key(q) - key(v)) / (2.0 * s * (q as f64 - v as f64));
            if x <= *bounds.last().unwrap() {
                sites.pop();
                bounds.pop();
            } else {
                sites.push(q);
                bounds.push(x);
                break;
            }
        }
    }
    if sites.is_empty() {
        out.iter_mut().for_each(|o| *o = f64::INFINITY);
        return;
    }
    let mut j = 0;
    for (p, o) in out.iter_mut().enumerate() {
        let x = p as f64 * s;
        while j + 1 < sites.len() && bounds[j + 1] < x {
            j += 1;
        }
        let d = (p as f64 - sites[j] as f64) * s;
        *o = f[sites[j]] + d * d;
    }
}

/// Squared distance (mm²) from every voxel center to the nearest occupied
/// voxel center, x fastest.
pub fn squared_distance_map(mask: &BinaryMask) -> Result<Vec<f64>> {
    if mask.is_empty() {
        return Err(Error::EmptyMask);
    }
    let grid = *mask.grid();
    let [nx, ny, nz] = grid.dims;
    let mut d: Vec<f64> = mask
        .bits()
        .iter()
        .map(|&b| if b { 0.0 } else { f64::INFINITY })
        .collect();
    let n_max = nx.max(ny).max(nz);
    let mut line = vec![0.0; n_max];
    let mut out = vec![0.0; n_max];
    let mut sites = Vec::with_capacity(n_max);
    let mut bounds = Vec::with_capacity(n_max);
    let strides = [1, nx, nx * ny];
    for axis in 0..3 {
        let n = grid.dims[axis];
        let stride = strides[axis];
        let s = grid.spacing[axis];
        let (a, b) = match axis {
            0 => (1, 2),
            1 => (0, 2),
            _ => (0, 1),
        };
        for y in 0..grid.dims[b] {
            for x in 0..grid.dims[a] {
                let start = x * strides[a] + y * strides[b];
                for q in 0..n {
                    line[q] = d[start + q * stride];
                }
                envelope_1d(&line[..n], s, &mut out[..n], &mut sites, &mut bounds);
                for q in 0..n {
                    d[start + q * stride] = out[q];
                }
            }
        }
    }
    Ok(d)
}

/// Euclidean distance map (mm) to the nearest occupied voxel center, as a
/// scalar volume on the mask's grid.
pub fn distance_map(mask: &BinaryMask) -> Result<Volume> {
    let d2 = squared_distance_map(mask)?;
    Volume::new(*mask.grid(), d2.into_iter().map(f64::sqrt).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::volume::Grid;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn single_voxel_neighbors() {
        let grid = Grid::isotropic([3, 3, 3], 1.0);
        let mut m = BinaryMask::empty(grid);
        m.set(1, 1, 1, true);
        let d = distance_map(&m).unwrap();
        assert_eq!(d.get(1, 1, 1), 0.0);
        assert!((d.get(2, 1, 1) - 1.0).abs() < 1e-9);
        assert!((d.get(2, 2, 1) - 2f64.sqrt()).abs() < 1e-9);
        assert!((d.get(0, 0, 0) - 3f64.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn empty_mask_errors() {
        let m = BinaryMask::empty(Grid::isotropic([2, 2, 2], 1.0));
        assert!(matches!(distance_map(&m), Err(Error::EmptyMask)));
    }

    #[test]
    fn matches_brute_force_anisotropic() {
        let grid = Grid::new([9, 7, 6], [0.5, 1.0, 2.0], [0.0; 3]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let m = BinaryMask::from_fn(grid, |_| rng.random::<f64>() < 0.05);
        let d2 = squared_distance_map(&m).unwrap();
        let occ: Vec<_> = m.occupied().map(|o| grid.world(grid.ijk(o))).collect();
        for o in 0..grid.len() {
            let p = grid.world(grid.ijk(o));
            let best = occ.iter().map(|q| (p - q).norm_squared()).fold(f64::INFINITY, f64::min);
            assert!((d2[o] - best).abs() < 1e-9);
        }
    }

    #[test]
    fn lipschitz_across_face_neighbors() {
        let grid = Grid::isotropic([16, 16, 16], 1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let m = BinaryMask::from_fn(grid, |_| rng.random::<f64>() < 0.01);
        let d = distance_map(&m).unwrap();
        for k in 0..16 {
            for j in 0..16 {
                for i in 0..15 {
                    assert!((d.get(i, j, k) - d.get(i + 1, j, k)).abs() <= 1.0 + 1e-12);
                    assert!((d.get(j, i, k) - d.get(j, i + 1, k)).abs() <= 1.0 + 1e-12);
                    assert!((d.get(j, k, i) - d.get(j, k, i + 1)).abs() <= 1.0 + 1e-12);
                }
            }
        }
    }
}
