//! Cohort to design matrix: masks, classification task, mid-plane flip.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::analysis::feature_positions;
use crate::classifiers::{feature_region, featurize, DesignMatrix, LabeledImage, Strategy};
use crate::error::{Error, Result};
use crate::masks::{build_striatum_mask, flip_midplane_if_needed, restrict_slices, DEFAULT_OTSU_BINS};
use crate::phantom::{ClassLabel, Cohort, Region};
use crate::volume::{ImageVolume, RegionMask};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Task {
    /// Controls (`-1`) against PD at baseline (`+1`).
    #[default]
    #[serde(rename = "hc-vs-pd")]
    HcVsPd,
    /// PD at baseline (`-1`) against the same subjects at year 4 (`+1`).
    #[serde(rename = "bl-vs-y4")]
    BlVsY4,
}

impl Task {
    pub const ALL: [Task; 2] = [Task::HcVsPd, Task::BlVsY4];

    pub fn as_str(self) -> &'static str {
        match self {
            Task::HcVsPd => "hc-vs-pd",
            Task::BlVsY4 => "bl-vs-y4",
        }
    }

    /// `(negative, positive)` classes.
    pub fn classes(self) -> (ClassLabel, ClassLabel) {
        match self {
            Task::HcVsPd => (ClassLabel::Hc, ClassLabel::PdBaseline),
            Task::BlVsY4 => (ClassLabel::PdBaseline, ClassLabel::PdYear4),
        }
    }

    pub fn label(self, class: ClassLabel) -> Option<f64> {
        let (neg, pos) = self.classes();
        if class == neg {
            Some(-1.0)
        } else if class == pos {
            Some(1.0)
        } else {
            None
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Task {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Task::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| Error::InvalidProtocol(format!("unknown task {s:?} (expected hc-vs-pd or bl-vs-y4)")))
    }
}

/// Masks used by featurization, flipping and the contribution analysis.
#[derive(Clone, Debug, PartialEq)]
pub struct PipelineMasks {
    pub striatum: RegionMask,
    pub occipital: RegionMask,
    /// LC, RC, LP, RP in that order.
    pub structures: Vec<(Region, RegionMask)>,
}

impl PipelineMasks {
    pub fn structure(&self, region: Region) -> Option<&RegionMask> {
        self.structures.iter().find(|(r, _)| *r == region).map(|(_, m)| m)
    }

    /// Flat voxel index of each feature, in feature order.
    pub fn feature_voxels(&self, strategy: Strategy) -> Result<Vec<usize>> {
        Ok(feature_region(strategy, &self.striatum, &self.occipital)?
            .indices()
            .to_vec())
    }

    /// Feature positions of each striatal structure. Structures are intersected with
    /// the feature region, since the Otsu striatum need not cover them exactly.
    pub fn structure_positions(&self, strategy: Strategy) -> Result<Vec<(Region, Vec<usize>)>> {
        let region = feature_region(strategy, &self.striatum, &self.occipital)?;
        self.structures
            .iter()
            .map(|(r, m)| Ok((*r, feature_positions(&region, m)?)))
            .collect()
    }
}

/// Otsu striatum from the mean control image, optionally limited to 1-based inclusive
/// axial slices; occipital lobe and striatal structures from the cohort's region masks.
pub fn masks_from_cohort(cohort: &Cohort, slices: Option<[usize; 2]>) -> Result<PipelineMasks> {
    let mean = cohort.mean_hc()?;
    let mut striatum = build_striatum_mask(&mean, DEFAULT_OTSU_BINS)?.mask;
    if let Some([lo, hi]) = slices {
        striatum = restrict_slices(&striatum, lo, hi, mean.axial_axis())?;
    }
    let occipital = cohort.regions.get(Region::Occipital).clone();
    if !striatum.is_disjoint(&occipital) {
        return Err(Error::OverlappingRegions);
    }
    let structures = Region::STRIATAL
        .into_iter()
        .map(|r| (r, cohort.regions.get(r).clone()))
        .collect();
    Ok(PipelineMasks {
        striatum,
        occipital,
        structures,
    })
}

/// Images of one task after the mid-plane flip, with their `+-1` labels.
#[derive(Clone, Debug)]
pub struct TaskImages {
    pub ids: Vec<String>,
    pub volumes: Vec<ImageVolume>,
    pub labels: Vec<f64>,
    pub flipped: Vec<bool>,
}

impl TaskImages {
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn featurize(&self, strategy: Strategy, masks: &PipelineMasks) -> Result<DesignMatrix> {
        let samples: Vec<LabeledImage<'_>> = self
            .ids
            .iter()
            .zip(&self.volumes)
            .zip(&self.labels)
            .map(|((id, volume), &label)| LabeledImage { id, volume, label })
            .collect();
        featurize(&samples, strategy, &masks.striatum, &masks.occipital)
    }
}

/// Selects the task's scans in cohort order and flips each so that its dimmer putamen
/// is on the right.
pub fn task_images(cohort: &Cohort, task: Task, masks: &PipelineMasks) -> Result<TaskImages> {
    let left = masks
        .structure(Region::LeftPutamen)
        .ok_or_else(|| Error::InvalidMask("left putamen mask missing".into()))?;
    let right = masks
        .structure(Region::RightPutamen)
        .ok_or_else(|| Error::InvalidMask("right putamen mask missing".into()))?;
    let mut out = TaskImages {
        ids: Vec::new(),
        volumes: Vec::new(),
        labels: Vec::new(),
        flipped: Vec::new(),
    };
    for scan in &cohort.scans {
        let Some(label) = task.label(scan.label) else {
            continue;
        };
        let (volume, flipped) = flip_midplane_if_needed(&scan.volume, left, right)?;
        out.ids.push(format!("{}/{}", scan.subject_id, scan.label));
        out.volumes.push(volume);
        out.labels.push(label);
        out.flipped.push(flipped);
    }
    let (neg, pos) = task.classes();
    for (class, y) in [(neg, -1.0), (pos, 1.0)] {
        if !out.labels.contains(&y) {
            return Err(Error::InsufficientSamples(format!("task {task} has no {class} images")));
        }
    }
    Ok(out)
}
