use crate::error::{Error, Result};
use crate::geometry::{bp_values, normalize, sphere_project};
use crate::volume::{ImageVolume, RegionMask};

use super::Strategy;

/// Samples by features, row-major, with `+1 / -1` labels.
#[derive(Clone, Debug, PartialEq)]
pub struct DesignMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
    labels: Vec<f64>,
    strategy: Strategy,
}

impl DesignMatrix {
    pub fn new(rows: Vec<Vec<f64>>, labels: Vec<f64>, strategy: Strategy) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::InvalidDesign("ragged rows".into()));
        }
        let n = rows.len();
        Self::from_flat(n, cols, rows.into_iter().flatten().collect(), labels, strategy)
    }

    pub fn from_flat(rows: usize, cols: usize, data: Vec<f64>, labels: Vec<f64>, strategy: Strategy) -> Result<Self> {
        if rows == 0 || cols == 0 || data.len() != rows * cols {
            return Err(Error::InvalidDesign(format!(
                "{} values do not form a nonempty {rows} x {cols} matrix",
                data.len()
            )));
        }
        if labels.len() != rows {
            return Err(Error::InvalidDesign(format!("{} labels for {rows} rows", labels.len())));
        }
        if labels.iter().any(|&y| y != 1.0 && y != -1.0) {
            return Err(Error::InvalidDesign("labels must be +1 or -1".into()));
        }
        if !(labels.contains(&1.0) && labels.contains(&-1.0)) {
            return Err(Error::InvalidDesign("both classes must be present".into()));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidDesign("non-finite feature value".into()));
        }
        Ok(DesignMatrix {
            rows,
            cols,
            data,
            labels,
            strategy,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn labels(&self) -> &[f64] {
        &self.labels
    }

    pub fn strategy(&self) -> Strategy {
        self.strategy
    }

    /// The given columns, in that order.
    pub fn columns(&self, columns: &[usize]) -> Result<DesignMatrix> {
        let mut data = Vec::with_capacity(self.rows * columns.len());
        for i in 0..self.rows {
            let row = self.row(i);
            data.extend(columns.iter().map(|&j| row[j]));
        }
        DesignMatrix::from_flat(self.rows, columns.len(), data, self.labels.clone(), self.strategy)
    }

    /// Rows at `indices`, in that order. Fails if only one class remains.
    pub fn subset(&self, indices: &[usize]) -> Result<DesignMatrix> {
        let mut data = Vec::with_capacity(indices.len() * self.cols);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        let labels = indices.iter().map(|&i| self.labels[i]).collect();
        DesignMatrix::from_flat(indices.len(), self.cols, data, labels, self.strategy)
    }
}

/// One image and its class for featurization.
#[derive(Clone, Copy, Debug)]
pub struct LabeledImage<'a> {
    pub id: &'a str,
    pub volume: &'a ImageVolume,
    /// `+1` or `-1`.
    pub label: f64,
}

/// Voxels that become features, in feature order.
pub fn feature_region(strategy: Strategy, striatum: &RegionMask, occipital: &RegionMask) -> Result<RegionMask> {
    match strategy {
        Strategy::Sbr | Strategy::Striatum => Ok(striatum.clone()),
        Strategy::StriatumOccipital => striatum.union(occipital),
    }
}

fn feature_row(
    volume: &ImageVolume,
    strategy: Strategy,
    striatum: &RegionMask,
    occipital: &RegionMask,
    region: &RegionMask,
) -> Result<Vec<f64>> {
    match strategy {
        Strategy::Sbr => {
            let normalized = normalize(volume, occipital)?;
            Ok(bp_values(&normalized.gather(striatum)))
        }
        Strategy::StriatumOccipital | Strategy::Striatum => sphere_project(volume.data(), region),
    }
}

/// Rounds a feature to single precision, the precision of the input images.
///
/// Rescaling an image perturbs its normalized values by a few ulps of f64; rounding
/// absorbs that, so rescaled cohorts give bit-identical rows and therefore identical
/// models, instead of models that differ wherever the solver's path is sensitive.
#[inline]
pub fn quantize(v: f64) -> f64 {
    v as f32 as f64
}

/// Builds the design matrix for one normalization strategy. Values are rounded with
/// [`quantize`].
pub fn featurize(
    samples: &[LabeledImage<'_>],
    strategy: Strategy,
    striatum: &RegionMask,
    occipital: &RegionMask,
) -> Result<DesignMatrix> {
    if !striatum.is_disjoint(occipital) {
        return Err(Error::OverlappingRegions);
    }
    let region = feature_region(strategy, striatum, occipital)?;
    let mut data = Vec::with_capacity(samples.len() * region.len());
    for sample in samples {
        striatum.check_fits(sample.volume)?;
        let row = feature_row(sample.volume, strategy, striatum, occipital, &region).map_err(|e| Error::Sample {
            sample: sample.id.to_string(),
            source: Box::new(e),
        })?;
        data.extend(row.into_iter().map(quantize));
    }
    let labels = samples.iter().map(|s| s.label).collect();
    DesignMatrix::from_flat(samples.len(), region.len(), data, labels, strategy)
}
