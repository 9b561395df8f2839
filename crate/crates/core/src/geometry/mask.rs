use crate::error::{Error, Result};
use crate::volume::{Grid, Volume};

/// Voxel occupancy on a grid, x fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryMask {
    grid: Grid,
    bits: Vec<bool>,
}

impl BinaryMask {
    pub fn empty(grid: Grid) -> Self {
        BinaryMask {
            grid,
            bits: vec![false; grid.len()],
        }
    }

    pub fn from_bits(grid: Grid, bits: Vec<bool>) -> Result<Self> {
        grid.validate()?;
        if bits.len() != grid.len() {
            return Err(Error::InvalidParam(format!(
                "mask has {} voxels, grid needs {}",
                bits.len(),
                grid.len()
            )));
        }
        Ok(BinaryMask { grid, bits })
    }

    pub fn from_fn(grid: Grid, mut f: impl FnMut([usize; 3]) -> bool) -> Self {
        let bits = (0..grid.len()).map(|o| f(grid.ijk(o))).collect();
        BinaryMask { grid, bits }
    }

    /// Voxels with intensity at or above `level`.
    pub fn threshold(vol: &Volume, level: f64) -> Self {
        BinaryMask {
            grid: *vol.grid(),
            bits: vol.data().iter().map(|&v| v >= level).collect(),
        }
    }

    #[inline]
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    #[inline]
    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> bool {
        self.bits[self.grid.offset(i, j, k)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, k: usize, value: bool) {
        let o = self.grid.offset(i, j, k);
        self.bits[o] = value;
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    pub fn volume_mm3(&self) -> f64 {
        self.count() as f64 * self.grid.voxel_volume()
    }

    /// Occupied voxel offsets in ascending order.
    pub fn occupied(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.iter().enumerate().filter(|(_, &b)| b).map(|(o, _)| o)
    }

    pub fn check_same_grid(&self, other: &BinaryMask) -> Result<()> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    fn zip_with(&self, other: &BinaryMask, f: impl Fn(bool, bool) -> bool) -> Result<BinaryMask> {
        self.check_same_grid(other)?;
        Ok(BinaryMask {
            grid: self.grid,
            bits: self.bits.iter().zip(&other.bits).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    pub fn and(&self, other: &BinaryMask) -> Result<BinaryMask> {
        self.zip_with(other, |a, b| a && b)
    }

    pub fn or(&self, other: &BinaryMask) -> Result<BinaryMask> {
        self.zip_with(other, |a, b| a || b)
    }

    pub fn and_not(&self, other: &BinaryMask) -> Result<BinaryMask> {
        self.zip_with(other, |a, b| a && !b)
    }

    pub fn not(&self) -> BinaryMask {
        BinaryMask {
            grid: self.grid,
            bits: self.bits.iter().map(|b| !b).collect(),
        }
    }

    /// True when every occupied voxel of `self` is occupied in `other`.
    pub fn is_subset_of(&self, other: &BinaryMask) -> Result<bool> {
        self.check_same_grid(other)?;
        Ok(self.bits.iter().zip(&other.bits).all(|(&a, &b)| !a || b))
    }

    /// Occupied voxels with at least one face neighbor that is background or
    /// outside the grid.
    pub fn surface(&self) -> BinaryMask {
        let [nx, ny, nz] = self.grid.dims;
        BinaryMask::from_fn(self.grid, |[i, j, k]| {
            if !self.get(i, j, k) {
                return false;
            }
            i == 0
                || j == 0
                || k == 0
                || i + 1 == nx
                || j + 1 == ny
                || k + 1 == nz
                || !self.get(i - 1, j, k)
                || !self.get(i + 1, j, k)
                || !self.get(i, j - 1, k)
                || !self.get(i, j + 1, k)
                || !self.get(i, j, k - 1)
                || !self.get(i, j, k + 1)
        })
    }
}

/// Integer voxel offsets whose physical length is at most `radius` mm.
pub(crate) fn ball_offsets(grid: &Grid, radius: f64) -> Vec<[isize; 3]> {
    let [sx, sy, sz] = grid.spacing;
    let r2 = radius * radius * (1.0 + 1e-12);
    let ext = |s: f64| (radius / s).floor() as isize;
    let (ex, ey, ez) = (ext(sx), ext(sy), ext(sz));
    let mut out = Vec::new();
    for dk in -ez..=ez {
        for dj in -ey..=ey {
            for di in -ex..=ex {
                let d2 = (di as f64 * sx).powi(2) + (dj as f64 * sy).powi(2) + (dk as f64 * sz).powi(2);
                if d2 <= r2 {
                    out.push([di, dj, dk]);
                }
            }
        }
    }
    out
}

/// Morphological dilation with a Euclidean ball of `radius` mm.
pub fn dilate(mask: &BinaryMask, radius: f64) -> BinaryMask {
    if radius <= 0.0 {
        return mask.clone();
    }
    let grid = mask.grid;
    let [nx, ny, nz] = grid.dims.map(|d| d as isize);
    let ball = ball_offsets(&grid, radius);
    let mut out = mask.clone();
    for o in mask.occupied() {
        let [i, j, k] = grid.ijk(o).map(|c| c as isize);
        for [di, dj, dk] in &ball {
            let (x, y, z) = (i + di, j + dj, k + dk);
            if x >= 0 && y >= 0 && z >= 0 && x < nx && y < ny && z < nz {
                out.bits[grid.offset(x as usize, y as usize, z as usize)] = true;
            }
        }
    }
    out
}

/// `a AND NOT b`.
pub fn subtract(a: &BinaryMask, b: &BinaryMask) -> Result<BinaryMask> {
    a.and_not(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_mask(grid: Grid, density: f64, seed: u64) -> BinaryMask {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        BinaryMask::from_fn(grid, |_| rng.random::<f64>() < density)
    }

    #[test]
    fn zero_radius_is_identity() {
        let m = random_mask(Grid::isotropic([6, 6, 6], 1.0), 0.1, 1);
        assert_eq!(dilate(&m, 0.0), m);
    }

    #[test]
    fn unit_ball_has_seven_voxels() {
        let grid = Grid::isotropic([5, 5, 5], 1.0);
        let mut m = BinaryMask::empty(grid);
        m.set(2, 2, 2, true);
        assert_eq!(dilate(&m, 1.0).count(), 7);
    }

    #[test]
    fn dilation_matches_brute_force() {
        let grid = Grid::new([32, 32, 32], [1.0, 0.8, 1.25], [0.0; 3]).unwrap();
        for seed in 0..3 {
            let m = random_mask(grid, 0.002, seed);
            let d = dilate(&m, 2.0);
            let occ: Vec<_> = m.occupied().map(|o| grid.world(grid.ijk(o))).collect();
            for o in 0..grid.len() {
                let p = grid.world(grid.ijk(o));
                let expect = occ.iter().any(|q| (p - q).norm() <= 2.0 + 1e-9);
                assert_eq!(d.bits()[o], expect, "voxel {:?}", grid.ijk(o));
            }
        }
    }

    #[test]
    fn subtract_cases() {
        let grid = Grid::isotropic([8, 8, 8], 1.0);
        let a = random_mask(grid, 0.4, 3);
        let b = random_mask(grid, 0.4, 4);
        assert_eq!(subtract(&a, &BinaryMask::empty(grid)).unwrap(), a);
        assert!(subtract(&a, &a.or(&b).unwrap()).unwrap().is_empty());
        let inter = a.and(&b).unwrap().count();
        assert_eq!(subtract(&a, &b).unwrap().count(), a.count() - inter);
        let other = BinaryMask::empty(Grid::isotropic([8, 8, 7], 1.0));
        assert!(matches!(subtract(&a, &other), Err(Error::GridMismatch)));
    }

    #[test]
    fn surface_of_block() {
        let grid = Grid::isotropic([7, 7, 7], 1.0);
        let m = BinaryMask::from_fn(grid, |[i, j, k]| (1..6).contains(&i) && (1..6).contains(&j) && (1..6).contains(&k));
        assert_eq!(m.surface().count(), 125 - 27);
    }

    proptest! {
        #[test]
        fn dilation_is_extensive_increasing_and_translation_equivariant(
            seed in 0u64..1000, r1 in 0.0f64..2.5, dr in 0.0f64..1.5,
        ) {
            let grid = Grid::isotropic([12, 12, 12], 1.0);
            // keep occupied voxels away from the border so a shift does not clip
            let m = BinaryMask::from_fn(grid, {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                move |[i, j, k]| {
                    let inner = (4..7).contains(&i) && (4..7).contains(&j) && (4..7).contains(&k);
                    inner && rng.random::<f64>() < 0.3
                }
            });
            let a = dilate(&m, r1);
            let b = dilate(&m, r1 + dr);
            prop_assert!(m.is_subset_of(&a).unwrap());
            prop_assert!(a.is_subset_of(&b).unwrap());
            let shift = |x: &BinaryMask| BinaryMask::from_fn(grid, |[i, j, k]| i >= 1 && x.get(i - 1, j, k));
            prop_assert_eq!(dilate(&shift(&m), r1), shift(&a));
        }
    }
}
