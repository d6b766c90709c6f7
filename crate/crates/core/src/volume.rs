//! Voxel grids and voxel subsets.
//!
//! Flat indices are row-major with x fastest: `x + nx * (y + ny * z)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Dims = [usize; 3];

pub fn voxel_count(dims: Dims) -> usize {
    dims[0] * dims[1] * dims[2]
}

pub fn flat_index(dims: Dims, [x, y, z]: [usize; 3]) -> usize {
    x + dims[0] * (y + dims[1] * z)
}

pub fn coords(dims: Dims, index: usize) -> [usize; 3] {
    let x = index % dims[0];
    let rest = index / dims[0];
    [x, rest % dims[1], rest / dims[1]]
}

/// A non-negative, nonzero image on a regular 3-d grid.
///
/// Values are held as `f64` regardless of the on-disk precision.
#[derive(Clone, Debug, PartialEq)]
pub struct ImageVolume {
    dims: Dims,
    spacing_mm: [f64; 3],
    axial_axis: usize,
    data: Vec<f64>,
}

impl ImageVolume {
    pub fn new(dims: Dims, spacing_mm: [f64; 3], data: Vec<f64>) -> Result<Self> {
        Self::with_axial_axis(dims, spacing_mm, 2, data)
    }

    pub fn with_axial_axis(dims: Dims, spacing_mm: [f64; 3], axial_axis: usize, data: Vec<f64>) -> Result<Self> {
        check_grid(dims, spacing_mm, axial_axis, data.len())?;
        if let Some(bad) = data.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::InvalidVolume(format!(
                "voxel value {bad} is negative or not finite"
            )));
        }
        if !data.iter().any(|&v| v > 0.0) {
            return Err(Error::InvalidVolume("all voxels are zero".into()));
        }
        Ok(ImageVolume {
            dims,
            spacing_mm,
            axial_axis,
            data,
        })
    }

    /// Unit spacing, axial axis 2. Handy for small hand-built examples.
    pub fn from_values(dims: Dims, data: Vec<f64>) -> Result<Self> {
        Self::new(dims, [1.0; 3], data)
    }

    /// A 1 x 1 x d volume.
    pub fn from_vec(data: Vec<f64>) -> Result<Self> {
        let d = data.len();
        Self::from_values([d.max(1), 1, 1], data)
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn spacing_mm(&self) -> [f64; 3] {
        self.spacing_mm
    }

    pub fn axial_axis(&self) -> usize {
        self.axial_axis
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn get(&self, xyz: [usize; 3]) -> f64 {
        self.data[flat_index(self.dims, xyz)]
    }

    /// Same grid, new values (validated).
    pub fn with_data(&self, data: Vec<f64>) -> Result<Self> {
        Self::with_axial_axis(self.dims, self.spacing_mm, self.axial_axis, data)
    }

    /// `alpha * self`; `alpha` must be positive and finite.
    pub fn scaled(&self, alpha: f64) -> Result<Self> {
        if !(alpha.is_finite() && alpha > 0.0) {
            return Err(Error::InvalidVolume(format!("scale {alpha} is not positive")));
        }
        self.with_data(self.data.iter().map(|v| v * alpha).collect())
    }

    pub fn mean_over(&self, mask: &RegionMask) -> f64 {
        mask.indices().iter().map(|&i| self.data[i]).sum::<f64>() / mask.len() as f64
    }

    /// Values at the mask's indices, in index order.
    pub fn gather(&self, mask: &RegionMask) -> Vec<f64> {
        mask.indices().iter().map(|&i| self.data[i]).collect()
    }
}

fn check_grid(dims: Dims, spacing_mm: [f64; 3], axial_axis: usize, len: usize) -> Result<()> {
    if dims.iter().any(|&n| n == 0) {
        return Err(Error::InvalidVolume(format!("dims {dims:?} contain zero")));
    }
    if spacing_mm.iter().any(|s| !(s.is_finite() && *s > 0.0)) {
        return Err(Error::InvalidVolume(format!("spacing {spacing_mm:?} must be positive")));
    }
    if axial_axis > 2 {
        return Err(Error::InvalidVolume(format!("axial axis {axial_axis} out of range")));
    }
    if len != voxel_count(dims) {
        return Err(Error::InvalidVolume(format!(
            "data length {len} does not match dims {dims:?}"
        )));
    }
    Ok(())
}

/// A signed scalar field on a grid, e.g. classifier weights scattered back to voxels.
/// Unlike [`ImageVolume`] it may be negative or identically zero.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightMap {
    pub dims: Dims,
    pub spacing_mm: [f64; 3],
    pub data: Vec<f64>,
}

impl WeightMap {
    pub fn zeros(dims: Dims, spacing_mm: [f64; 3]) -> Self {
        WeightMap {
            dims,
            spacing_mm,
            data: vec![0.0; voxel_count(dims)],
        }
    }
}

/// A nonempty set of voxels of a grid, stored as sorted unique flat indices.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "MaskFile", into = "MaskFile")]
pub struct RegionMask {
    dims: Dims,
    indices: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct MaskFile {
    dims: Dims,
    indices: Vec<usize>,
}

impl TryFrom<MaskFile> for RegionMask {
    type Error = Error;

    fn try_from(file: MaskFile) -> Result<Self> {
        if file.indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidMask("indices must be sorted and unique".into()));
        }
        RegionMask::new(file.dims, file.indices)
    }
}

impl From<RegionMask> for MaskFile {
    fn from(mask: RegionMask) -> Self {
        MaskFile {
            dims: mask.dims,
            indices: mask.indices,
        }
    }
}

impl RegionMask {
    /// Sorts and deduplicates `indices`; fails if empty or out of range.
    pub fn new(dims: Dims, mut indices: Vec<usize>) -> Result<Self> {
        indices.sort_unstable();
        indices.dedup();
        let d = voxel_count(dims);
        if d == 0 {
            return Err(Error::InvalidMask(format!("dims {dims:?} contain zero")));
        }
        if indices.is_empty() {
            return Err(Error::InvalidMask("mask is empty".into()));
        }
        if let Some(&last) = indices.last() {
            if last >= d {
                return Err(Error::InvalidMask(format!("index {last} outside volume of {d} voxels")));
            }
        }
        Ok(RegionMask { dims, indices })
    }

    pub fn from_predicate(dims: Dims, mut keep: impl FnMut([usize; 3]) -> bool) -> Result<Self> {
        let indices = (0..voxel_count(dims)).filter(|&i| keep(coords(dims, i))).collect();
        Self::new(dims, indices)
    }

    pub fn full(dims: Dims) -> Result<Self> {
        Self::new(dims, (0..voxel_count(dims)).collect())
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn voxel_count(&self) -> usize {
        voxel_count(self.dims)
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn contains(&self, index: usize) -> bool {
        self.indices.binary_search(&index).is_ok()
    }

    pub fn is_disjoint(&self, other: &RegionMask) -> bool {
        let (mut i, mut j) = (0, 0);
        while i < self.indices.len() && j < other.indices.len() {
            match self.indices[i].cmp(&other.indices[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => return false,
            }
        }
        true
    }

    pub fn union(&self, other: &RegionMask) -> Result<RegionMask> {
        self.check_same_grid(other)?;
        let mut all = self.indices.clone();
        all.extend_from_slice(&other.indices);
        RegionMask::new(self.dims, all)
    }

    /// Fails if the intersection is empty.
    pub fn intersection(&self, other: &RegionMask) -> Result<RegionMask> {
        self.check_same_grid(other)?;
        let kept = self.indices.iter().copied().filter(|&i| other.contains(i)).collect();
        RegionMask::new(self.dims, kept)
    }

    /// Keeps the indices for which `keep` holds; fails if none remain.
    pub fn filter(&self, mut keep: impl FnMut(usize) -> bool) -> Result<RegionMask> {
        let kept = self.indices.iter().copied().filter(|&i| keep(i)).collect();
        RegionMask::new(self.dims, kept)
    }

    /// Position of each voxel of `self` inside `space`, which must contain it.
    pub fn positions_in(&self, space: &RegionMask) -> Result<Vec<usize>> {
        self.indices
            .iter()
            .map(|i| {
                space
                    .indices
                    .binary_search(i)
                    .map_err(|_| Error::InvalidMask(format!("voxel {i} not contained in the feature region")))
            })
            .collect()
    }

    pub fn check_same_grid(&self, other: &RegionMask) -> Result<()> {
        if self.dims != other.dims {
            return Err(Error::InvalidMask(format!(
                "grid mismatch: {:?} vs {:?}",
                self.dims, other.dims
            )));
        }
        Ok(())
    }

    pub fn check_fits(&self, volume: &ImageVolume) -> Result<()> {
        if self.dims != volume.dims() {
            return Err(Error::InvalidMask(format!(
                "mask grid {:?} does not match volume grid {:?}",
                self.dims,
                volume.dims()
            )));
        }
        Ok(())
    }
}
