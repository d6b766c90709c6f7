//! Synthetic DaTscan-like cohorts with known ground truth.
//!
//! Every image is `alpha * template * (1 + noise)`, clamped at zero and rounded to
//! `f32` so that export and re-import are bit-exact. The template has a background,
//! a head of nonspecific uptake, an occipital slab, and four striatal ellipsoids whose
//! levels carry the class-specific deficits. Right-hemisphere structures are the
//! mirror images of the left ones along axis 0.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io;
use crate::masks::mirror_mask;
use crate::volume::{coords, voxel_count, Dims, ImageVolume, RegionMask};

/// Axis-aligned ellipsoid in normalized coordinates (`[0, 1]` along each axis).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ellipsoid {
    pub center: [f64; 3],
    pub radii: [f64; 3],
}

impl Ellipsoid {
    fn contains(&self, p: [f64; 3]) -> bool {
        (0..3)
            .map(|a| ((p[a] - self.center[a]) / self.radii[a]).powi(2))
            .sum::<f64>()
            <= 1.0
    }
}

/// Axis-aligned box in normalized coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Slab {
    pub lo: [f64; 3],
    pub hi: [f64; 3],
}

impl Slab {
    fn contains(&self, p: [f64; 3]) -> bool {
        (0..3).all(|a| p[a] >= self.lo[a] && p[a] <= self.hi[a])
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionGeometry {
    pub head: Ellipsoid,
    /// Left caudate; the right one is its mirror image.
    pub caudate: Ellipsoid,
    /// Left putamen; the right one is its mirror image.
    pub putamen: Ellipsoid,
    /// Occipital slab, intersected with the head.
    pub occipital: Slab,
}

impl Default for RegionGeometry {
    fn default() -> Self {
        RegionGeometry {
            head: Ellipsoid {
                center: [0.5, 0.5, 0.5],
                radii: [0.42, 0.46, 0.46],
            },
            caudate: Ellipsoid {
                center: [0.40, 0.64, 0.55],
                radii: [0.06, 0.10, 0.16],
            },
            putamen: Ellipsoid {
                center: [0.30, 0.52, 0.50],
                radii: [0.06, 0.12, 0.19],
            },
            occipital: Slab {
                lo: [0.25, 0.04, 0.30],
                hi: [0.75, 0.18, 0.70],
            },
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntensityLevels {
    pub background: f64,
    pub nonspecific: f64,
    pub striatal: f64,
}

impl Default for IntensityLevels {
    fn default() -> Self {
        IntensityLevels {
            background: 0.05,
            nonspecific: 1.0,
            striatal: 3.0,
        }
    }
}

/// Multiplicative signal factors in `(0, 1]`; `1` means no loss.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeficitFactors {
    pub affected_putamen: f64,
    pub other_putamen: f64,
    pub affected_caudate: f64,
    pub other_caudate: f64,
}

impl DeficitFactors {
    pub const NONE: DeficitFactors = DeficitFactors {
        affected_putamen: 1.0,
        other_putamen: 1.0,
        affected_caudate: 1.0,
        other_caudate: 1.0,
    };

    fn values(&self) -> [f64; 4] {
        [
            self.affected_putamen,
            self.other_putamen,
            self.affected_caudate,
            self.other_caudate,
        ]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn opposite(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }
}

/// Which hemisphere the disease starts in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SidePolicy {
    Random,
    Left,
    Right,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PhantomSpec {
    pub dims: Dims,
    pub spacing_mm: [f64; 3],
    pub geometry: RegionGeometry,
    pub levels: IntensityLevels,
    pub baseline: DeficitFactors,
    pub year4: DeficitFactors,
    pub affected_side: SidePolicy,
    /// Global per-image factor is drawn log-uniformly from this range.
    pub scale_range: [f64; 2],
    /// Standard deviation of the per-voxel multiplicative Gaussian noise.
    pub noise: f64,
    /// Standard deviation of a per-subject, per-structure multiplicative factor.
    pub subject_variability: f64,
    /// Standard deviation of a per-subject factor shared by all four striatal structures.
    pub striatal_variability: f64,
    /// Probability that a PD subject's scans show no deficit at all.
    pub unaffected_fraction: f64,
    pub seed: u64,
}

impl Default for PhantomSpec {
    fn default() -> Self {
        PhantomSpec {
            dims: [32, 32, 16],
            spacing_mm: [6.0, 6.0, 6.0],
            geometry: RegionGeometry::default(),
            levels: IntensityLevels::default(),
            baseline: DeficitFactors {
                affected_putamen: 0.45,
                other_putamen: 0.70,
                affected_caudate: 0.75,
                other_caudate: 0.85,
            },
            year4: DeficitFactors {
                affected_putamen: 0.40,
                other_putamen: 0.50,
                affected_caudate: 0.70,
                other_caudate: 0.80,
            },
            affected_side: SidePolicy::Random,
            scale_range: [0.5, 2.0],
            noise: 0.10,
            subject_variability: 0.02,
            striatal_variability: 0.03,
            unaffected_fraction: 0.06,
            seed: 0,
        }
    }
}

impl PhantomSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidSpec(msg));
        if self.dims.iter().any(|&n| n < 2) {
            return bad(format!("dims {:?} too small", self.dims));
        }
        let l = self.levels;
        if !(l.background > 0.0 && l.nonspecific > 0.0 && l.striatal > 0.0) {
            return bad("intensity levels must be positive".into());
        }
        for (name, f) in [("baseline", self.baseline), ("year4", self.year4)] {
            if f.values().iter().any(|v| !(*v > 0.0 && *v <= 1.0)) {
                return bad(format!("{name} deficit factors must lie in (0, 1]"));
            }
        }
        if self.year4.affected_putamen > self.baseline.affected_putamen
            || self.year4.other_putamen > self.baseline.other_putamen
        {
            return bad("year-4 putamen signal must not exceed baseline".into());
        }
        let [lo, hi] = self.scale_range;
        if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
            return bad(format!("scale range {:?} invalid", self.scale_range));
        }
        if !(self.unaffected_fraction >= 0.0 && self.unaffected_fraction <= 1.0) {
            return bad(format!(
                "unaffected fraction {} not in [0, 1]",
                self.unaffected_fraction
            ));
        }
        if !(self.noise >= 0.0 && self.subject_variability >= 0.0 && self.striatal_variability >= 0.0) {
            return bad("noise levels must be non-negative".into());
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ClassLabel {
    #[serde(rename = "HC")]
    Hc,
    #[serde(rename = "PD-BL")]
    PdBaseline,
    #[serde(rename = "PD-Y4")]
    PdYear4,
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ClassLabel::Hc => "HC",
            ClassLabel::PdBaseline => "PD-BL",
            ClassLabel::PdYear4 => "PD-Y4",
        })
    }
}

/// Named regions of the phantom.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Region {
    LeftCaudate,
    RightCaudate,
    LeftPutamen,
    RightPutamen,
    Occipital,
    Striatum,
}

impl Region {
    pub const ALL: [Region; 6] = [
        Region::LeftCaudate,
        Region::RightCaudate,
        Region::LeftPutamen,
        Region::RightPutamen,
        Region::Occipital,
        Region::Striatum,
    ];

    /// LC, RC, LP, RP.
    pub const STRIATAL: [Region; 4] = [
        Region::LeftCaudate,
        Region::RightCaudate,
        Region::LeftPutamen,
        Region::RightPutamen,
    ];

    pub fn file_stem(self) -> &'static str {
        match self {
            Region::LeftCaudate => "left_caudate",
            Region::RightCaudate => "right_caudate",
            Region::LeftPutamen => "left_putamen",
            Region::RightPutamen => "right_putamen",
            Region::Occipital => "occipital",
            Region::Striatum => "striatum",
        }
    }

    /// LC / RC / LP / RP for the four striatal structures.
    pub fn short_name(self) -> &'static str {
        match self {
            Region::LeftCaudate => "LC",
            Region::RightCaudate => "RC",
            Region::LeftPutamen => "LP",
            Region::RightPutamen => "RP",
            Region::Occipital => "OCC",
            Region::Striatum => "STR",
        }
    }
}

impl FromStr for Region {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Region::ALL
            .into_iter()
            .find(|r| r.file_stem() == s || r.short_name() == s)
            .ok_or_else(|| Error::InvalidSpec(format!("unknown region {s:?}")))
    }
}

/// Ground-truth region masks of a phantom grid.
#[derive(Clone, Debug, PartialEq)]
pub struct RegionSet {
    pub masks: BTreeMap<Region, RegionMask>,
}

impl RegionSet {
    pub fn build(dims: Dims, geometry: &RegionGeometry) -> Result<Self> {
        let centre = |xyz: [usize; 3]| -> [f64; 3] { [0, 1, 2].map(|a| (xyz[a] as f64 + 0.5) / dims[a] as f64) };
        let named = |what: &str, r: Result<RegionMask>| {
            r.map_err(|_| Error::InvalidSpec(format!("{what} covers no voxel at dims {dims:?}")))
        };
        let left_caudate = named(
            "caudate",
            RegionMask::from_predicate(dims, |p| geometry.caudate.contains(centre(p))),
        )?;
        let left_putamen = named(
            "putamen",
            RegionMask::from_predicate(dims, |p| geometry.putamen.contains(centre(p))),
        )?;
        let right_caudate = mirror_mask(&left_caudate);
        let right_putamen = mirror_mask(&left_putamen);
        let striatum = left_caudate
            .union(&right_caudate)?
            .union(&left_putamen)?
            .union(&right_putamen)?;
        if striatum.len() != left_caudate.len() * 2 + left_putamen.len() * 2 {
            return Err(Error::InvalidSpec("striatal structures overlap".into()));
        }
        let occipital = named(
            "occipital slab",
            RegionMask::from_predicate(dims, |p| {
                let c = centre(p);
                geometry.occipital.contains(c) && geometry.head.contains(c)
            }),
        )?;
        if !occipital.is_disjoint(&striatum) {
            return Err(Error::InvalidSpec("occipital slab overlaps the striatum".into()));
        }
        let masks = BTreeMap::from([
            (Region::LeftCaudate, left_caudate),
            (Region::RightCaudate, right_caudate),
            (Region::LeftPutamen, left_putamen),
            (Region::RightPutamen, right_putamen),
            (Region::Occipital, occipital),
            (Region::Striatum, striatum),
        ]);
        Ok(RegionSet { masks })
    }

    pub fn get(&self, region: Region) -> &RegionMask {
        &self.masks[&region]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scan {
    pub subject_id: String,
    pub label: ClassLabel,
    /// Ground-truth global factor `alpha`.
    pub scale: f64,
    /// Hemisphere of disease onset; `None` for controls.
    pub affected_side: Option<Side>,
    pub volume: ImageVolume,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Cohort {
    pub dims: Dims,
    pub spacing_mm: [f64; 3],
    pub scans: Vec<Scan>,
    pub regions: RegionSet,
}

impl Cohort {
    pub fn count(&self, label: ClassLabel) -> usize {
        self.scans.iter().filter(|s| s.label == label).count()
    }

    pub fn scans_with(&self, label: ClassLabel) -> impl Iterator<Item = &Scan> {
        self.scans.iter().filter(move |s| s.label == label)
    }

    /// Voxelwise mean of the control images.
    pub fn mean_hc(&self) -> Result<ImageVolume> {
        let hc: Vec<&Scan> = self.scans_with(ClassLabel::Hc).collect();
        let first = hc
            .first()
            .ok_or_else(|| Error::InsufficientSamples("cohort has no HC images".into()))?;
        let mut sum = vec![0.0; first.volume.len()];
        for scan in &hc {
            for (s, v) in sum.iter_mut().zip(scan.volume.data()) {
                *s += v;
            }
        }
        let n = hc.len() as f64;
        first.volume.with_data(sum.into_iter().map(|s| s / n).collect())
    }
}

fn stream_rng(seed: u64, subject: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(subject * 4 + stream);
    rng
}

/// The noise-free template for one class and side, before subject variability.
struct Template {
    levels: Vec<f64>,
    /// For each voxel: which of LC, RC, LP, RP it belongs to (for subject variability).
    structure: Vec<Option<usize>>,
}

const STRUCTURES: [Region; 4] = Region::STRIATAL;

fn base_template(spec: &PhantomSpec, regions: &RegionSet) -> Template {
    let dims = spec.dims;
    let d = voxel_count(dims);
    let mut levels = vec![spec.levels.background; d];
    for (i, level) in levels.iter_mut().enumerate() {
        let xyz = coords(dims, i);
        let p = [0, 1, 2].map(|a| (xyz[a] as f64 + 0.5) / dims[a] as f64);
        if spec.geometry.head.contains(p) {
            *level = spec.levels.nonspecific;
        }
    }
    let mut structure = vec![None; d];
    for (k, region) in STRUCTURES.iter().enumerate() {
        for &i in regions.get(*region).indices() {
            levels[i] = spec.levels.striatal;
            structure[i] = Some(k);
        }
    }
    Template { levels, structure }
}

/// Per-structure factors (LC, RC, LP, RP) for a class with disease on `side`.
fn structure_factors(deficits: &DeficitFactors, side: Side) -> [f64; 4] {
    let (left, right) = match side {
        Side::Left => (
            (deficits.affected_caudate, deficits.affected_putamen),
            (deficits.other_caudate, deficits.other_putamen),
        ),
        Side::Right => (
            (deficits.other_caudate, deficits.other_putamen),
            (deficits.affected_caudate, deficits.affected_putamen),
        ),
    };
    [left.0, right.0, left.1, right.1]
}

fn render(
    spec: &PhantomSpec,
    template: &Template,
    factors: [f64; 4],
    rng: &mut ChaCha8Rng,
) -> Result<(f64, ImageVolume)> {
    let [lo, hi] = spec.scale_range;
    let alpha = if lo == hi {
        lo
    } else {
        rng.gen_range(lo.ln()..=hi.ln()).exp()
    };
    let data = template
        .levels
        .iter()
        .zip(&template.structure)
        .map(|(&level, structure)| {
            let factor = structure.map_or(1.0, |k| factors[k]);
            let z: f64 = if spec.noise > 0.0 {
                rng.sample(StandardNormal)
            } else {
                0.0
            };
            let value = (alpha * level * factor * (1.0 + spec.noise * z)).max(0.0);
            value as f32 as f64
        })
        .collect();
    let volume = ImageVolume::with_axial_axis(spec.dims, spec.spacing_mm, 2, data)?;
    Ok((alpha, volume))
}

/// Deterministic synthetic cohort: `n_hc` controls then `n_pd` patients, each patient
/// followed by a year-4 scan when `paired_y4` is set.
///
/// Each subject draws from its own stream of the seeded generator, so the result does
/// not depend on how subjects are scheduled across threads.
pub fn generate_cohort(spec: &PhantomSpec, n_hc: usize, n_pd: usize, paired_y4: bool) -> Result<Cohort> {
    spec.validate()?;
    if n_hc == 0 || n_pd == 0 {
        return Err(Error::InvalidSpec("cohort counts must be at least 1".into()));
    }
    let regions = RegionSet::build(spec.dims, &spec.geometry)?;
    let template = base_template(spec, &regions);

    let subjects: Vec<Result<Vec<Scan>>> = (0..n_hc + n_pd)
        .into_par_iter()
        .map(|subject| {
            let is_pd = subject >= n_hc;
            let mut rng = stream_rng(spec.seed, subject as u64, 0);
            let jitter: [f64; 4] = std::array::from_fn(|_| {
                if spec.subject_variability > 0.0 {
                    let z: f64 = rng.sample(StandardNormal);
                    (1.0 + spec.subject_variability * z).max(0.05)
                } else {
                    1.0
                }
            });
            let side = match spec.affected_side {
                SidePolicy::Left => Side::Left,
                SidePolicy::Right => Side::Right,
                SidePolicy::Random => {
                    if rng.gen::<bool>() {
                        Side::Left
                    } else {
                        Side::Right
                    }
                }
            };
            let common = if spec.striatal_variability > 0.0 {
                let z: f64 = rng.sample(StandardNormal);
                (1.0 + spec.striatal_variability * z).max(0.05)
            } else {
                1.0
            };
            let unaffected = is_pd && spec.unaffected_fraction > 0.0 && rng.gen::<f64>() < spec.unaffected_fraction;
            let with_jitter = |f: [f64; 4]| std::array::from_fn(|k| f[k] * jitter[k] * common);

            let mut scans = Vec::new();
            if !is_pd {
                let mut image_rng = stream_rng(spec.seed, subject as u64, 1);
                let (scale, volume) = render(spec, &template, with_jitter([1.0; 4]), &mut image_rng)?;
                scans.push(Scan {
                    subject_id: format!("hc-{subject:04}"),
                    label: ClassLabel::Hc,
                    scale,
                    affected_side: None,
                    volume,
                });
            } else {
                let id = format!("pd-{:04}", subject - n_hc);
                let mut visits = vec![(ClassLabel::PdBaseline, spec.baseline, 1)];
                if paired_y4 {
                    visits.push((ClassLabel::PdYear4, spec.year4, 2));
                }
                for (label, deficits, stream) in visits {
                    let mut image_rng = stream_rng(spec.seed, subject as u64, stream);
                    let deficits = if unaffected { DeficitFactors::NONE } else { deficits };
                    let factors = with_jitter(structure_factors(&deficits, side));
                    let (scale, volume) = render(spec, &template, factors, &mut image_rng)?;
                    scans.push(Scan {
                        subject_id: id.clone(),
                        label,
                        scale,
                        affected_side: Some(side),
                        volume,
                    });
                }
            }
            Ok(scans)
        })
        .collect();

    let mut scans = Vec::new();
    for subject in subjects {
        scans.extend(subject?);
    }
    Ok(Cohort {
        dims: spec.dims,
        spacing_mm: spec.spacing_mm,
        scans,
        regions,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub file: String,
    pub subject_id: String,
    pub label: ClassLabel,
    pub scale: f64,
    pub affected_side: Option<Side>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format_version: u32,
    pub dims: Dims,
    pub spacing_mm: [f64; 3],
    pub label_counts: BTreeMap<ClassLabel, usize>,
    pub scans: Vec<ManifestEntry>,
    /// Region name to mask file, relative to the manifest.
    pub masks: BTreeMap<String, String>,
}

pub const MANIFEST_FILE: &str = "manifest.json";

fn scan_file_name(scan: &Scan) -> String {
    let visit = match scan.label {
        ClassLabel::Hc => "hc",
        ClassLabel::PdBaseline => "bl",
        ClassLabel::PdYear4 => "y4",
    };
    format!("volumes/{}_{visit}.vol", scan.subject_id)
}

/// Writes volumes, ground-truth masks and `manifest.json` under `dir`.
pub fn export_cohort(cohort: &Cohort, dir: &Path) -> Result<Manifest> {
    if cohort.scans.is_empty() {
        return Err(Error::InsufficientSamples("cohort is empty".into()));
    }
    let mut scans = Vec::with_capacity(cohort.scans.len());
    for scan in &cohort.scans {
        let file = scan_file_name(scan);
        io::write_volume(
            &dir.join(&file),
            &scan.volume,
            &format!("phantom {} {}", scan.subject_id, scan.label),
        )?;
        scans.push(ManifestEntry {
            file,
            subject_id: scan.subject_id.clone(),
            label: scan.label,
            scale: scan.scale,
            affected_side: scan.affected_side,
        });
    }
    let mut masks = BTreeMap::new();
    for (region, mask) in &cohort.regions.masks {
        let file = format!("masks/{}.json", region.file_stem());
        io::write_mask(&dir.join(&file), mask)?;
        masks.insert(region.file_stem().to_string(), file);
    }
    let mut label_counts = BTreeMap::new();
    for scan in &cohort.scans {
        *label_counts.entry(scan.label).or_insert(0) += 1;
    }
    let manifest = Manifest {
        format_version: 1,
        dims: cohort.dims,
        spacing_mm: cohort.spacing_mm,
        label_counts,
        scans,
        masks,
    };
    io::write_json(&dir.join(MANIFEST_FILE), &manifest)?;
    Ok(manifest)
}

pub fn manifest_path(dir: &Path) -> PathBuf {
    dir.join(MANIFEST_FILE)
}

/// Reads a cohort written by [`export_cohort`] (or converted into the same layout).
pub fn import_cohort(dir: &Path) -> Result<Cohort> {
    let manifest: Manifest = io::read_json(&manifest_path(dir))?;
    let scans = manifest
        .scans
        .par_iter()
        .map(|entry| {
            let volume = io::read_volume(&dir.join(&entry.file))?;
            if volume.dims() != manifest.dims {
                return Err(Error::format(dir.join(&entry.file), "dims differ from manifest"));
            }
            Ok(Scan {
                subject_id: entry.subject_id.clone(),
                label: entry.label,
                scale: entry.scale,
                affected_side: entry.affected_side,
                volume,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut masks = BTreeMap::new();
    for (name, file) in &manifest.masks {
        masks.insert(name.parse::<Region>()?, io::read_mask(&dir.join(file))?);
    }
    Ok(Cohort {
        dims: manifest.dims,
        spacing_mm: manifest.spacing_mm,
        scans,
        regions: RegionSet { masks },
    })
}
