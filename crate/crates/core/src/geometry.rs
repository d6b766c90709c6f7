//! Half-ray geometry of normalized and self-normalized linear classification.
//!
//! An image `I` and every positive multiple `alpha * I` form one half-ray. Dividing by
//! the mean over a normalization region `N` picks the point of the ray on the affine
//! slice `{x : 1_N . x = 1}`; a linear rule `w . I~ - b` on that slice is the same as
//! the homogeneous rule `(w - b 1_N) . I` on rays. Projecting onto a sphere picks a
//! different point of the same ray and needs no normalization region at all.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::volume::{ImageVolume, RegionMask};

/// Tolerance for algebraic identities on doubles.
pub const IDENTITY_TOL: f64 = 1e-10;
/// Margins smaller than this are treated as boundary ties in randomized checks.
pub const MARGIN_EXCLUSION: f64 = 1e-9;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `1_N`: `1/|N|` on the region, zero elsewhere.
pub fn indicator_mean_vector(region: &[usize], d: usize) -> Result<Vec<f64>> {
    if region.is_empty() {
        return Err(Error::EmptyRegion);
    }
    let weight = 1.0 / region.len() as f64;
    let mut out = vec![0.0; d];
    for &i in region {
        if i >= d {
            return Err(Error::InvalidMask(format!("index {i} outside {d} voxels")));
        }
        out[i] = weight;
    }
    Ok(out)
}

/// `I / (1_N . I)`, the point where the half-ray of `I` meets `1_N . x = 1`.
pub fn normalize(image: &ImageVolume, region_n: &RegionMask) -> Result<ImageVolume> {
    region_n.check_fits(image)?;
    let mean = image.mean_over(region_n);
    if !(mean > 0.0) {
        return Err(Error::DegenerateNormalization);
    }
    image.with_data(image.data().iter().map(|v| v / mean).collect())
}

/// Binding potential `I~ - 1` of an already normalized image.
pub fn bp_values(normalized: &[f64]) -> Vec<f64> {
    normalized.iter().map(|v| v - 1.0).collect()
}

/// Restricts `x` to the mask and scales it onto the sphere of radius `sqrt(|mask|)`.
pub fn sphere_project(x: &[f64], restrict: &RegionMask) -> Result<Vec<f64>> {
    if x.len() != restrict.voxel_count() {
        return Err(Error::InvalidMask(format!(
            "mask covers {} voxels but vector has {}",
            restrict.voxel_count(),
            x.len()
        )));
    }
    let restricted: Vec<f64> = restrict.indices().iter().map(|&i| x[i]).collect();
    project_onto_sphere(&restricted)
}

/// Sphere projection of an already restricted vector.
pub fn project_onto_sphere(restricted: &[f64]) -> Result<Vec<f64>> {
    let length = norm(restricted);
    if !(length > 0.0 && length.is_finite()) {
        return Err(Error::ZeroVector);
    }
    let factor = (restricted.len() as f64).sqrt() / length;
    Ok(restricted.iter().map(|v| v * factor).collect())
}

/// The multiplicative-equivalence class `{alpha I : alpha > 0}`.
#[derive(Clone, Debug)]
pub struct HalfRay {
    representative: ImageVolume,
}

impl HalfRay {
    pub fn new(representative: ImageVolume) -> Self {
        HalfRay { representative }
    }

    pub fn representative(&self) -> &ImageVolume {
        &self.representative
    }

    /// Cosine distance between representatives; zero iff the rays coincide.
    pub fn cosine_distance(&self, other: &HalfRay) -> f64 {
        let a = self.representative.data();
        let b = other.representative.data();
        if a.len() != b.len() {
            return f64::INFINITY;
        }
        1.0 - dot(a, b) / (norm(a) * norm(b))
    }

    pub fn same_ray(&self, other: &HalfRay) -> bool {
        self.cosine_distance(other) < IDENTITY_TOL
    }

    /// Point of the ray on the sphere of radius `sqrt(d)`.
    pub fn sphere_point(&self) -> Vec<f64> {
        project_onto_sphere(self.representative.data()).expect("half-ray representatives are nonzero")
    }
}

/// `w . I~ - b = 0` with unit `w` supported on the classification region.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearBoundary {
    w: Vec<f64>,
    b: f64,
    region_c: RegionMask,
    region_n: RegionMask,
}

impl LinearBoundary {
    pub fn new(w: Vec<f64>, b: f64, region_c: RegionMask, region_n: RegionMask) -> Result<Self> {
        region_c.check_same_grid(&region_n)?;
        if !region_c.is_disjoint(&region_n) {
            return Err(Error::OverlappingRegions);
        }
        let d = region_c.voxel_count();
        if w.len() != d {
            return Err(Error::InvalidBoundary(format!(
                "w has {} entries, grid has {d}",
                w.len()
            )));
        }
        if !b.is_finite() || w.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidBoundary("non-finite coefficients".into()));
        }
        if let Some(i) = (0..d).find(|&i| w[i] != 0.0 && !region_c.contains(i)) {
            return Err(Error::InvalidBoundary(format!(
                "w is nonzero at voxel {i} outside the classification region"
            )));
        }
        let length = norm(&w);
        if (length - 1.0).abs() > IDENTITY_TOL {
            return Err(Error::InvalidBoundary(format!("|w| = {length}, expected 1")));
        }
        let ones_n = indicator_mean_vector(region_n.indices(), d)?;
        // disjoint supports: every product is an exact zero
        assert_eq!(dot(&w, &ones_n), 0.0, "w and 1_N must be orthogonal");
        Ok(LinearBoundary {
            w,
            b,
            region_c,
            region_n,
        })
    }

    /// Rescales `(w, b)` jointly so that `w` has unit norm; the boundary is unchanged.
    pub fn from_unnormalized(w: Vec<f64>, b: f64, region_c: RegionMask, region_n: RegionMask) -> Result<Self> {
        let length = norm(&w);
        if !(length > 0.0) {
            return Err(Error::InvalidBoundary("w is zero".into()));
        }
        let w = w.into_iter().map(|v| v / length).collect();
        Self::new(w, b / length, region_c, region_n)
    }

    pub fn w(&self) -> &[f64] {
        &self.w
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn region_c(&self) -> &RegionMask {
        &self.region_c
    }

    pub fn region_n(&self) -> &RegionMask {
        &self.region_n
    }
}

/// The subspace `{x : normal . x = 0}` with `normal = w - b 1_N`.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassificationSubspace {
    normal: Vec<f64>,
}

impl ClassificationSubspace {
    pub fn from_normal(normal: Vec<f64>) -> Result<Self> {
        if !(norm(&normal) > 0.0) {
            return Err(Error::InvalidBoundary("subspace normal is zero".into()));
        }
        Ok(ClassificationSubspace { normal })
    }

    pub fn normal(&self) -> &[f64] {
        &self.normal
    }

    /// Signed cosine between the two normals.
    pub fn cosine(&self, other: &ClassificationSubspace) -> f64 {
        dot(&self.normal, &other.normal) / (norm(&self.normal) * norm(&other.normal))
    }
}

pub fn classification_subspace(boundary: &LinearBoundary) -> ClassificationSubspace {
    let d = boundary.w.len();
    let ones_n =
        indicator_mean_vector(boundary.region_n.indices(), d).expect("boundary regions are validated at construction");
    let normal: Vec<f64> = boundary
        .w
        .iter()
        .zip(&ones_n)
        .map(|(w, n)| w - boundary.b * n)
        .collect();
    // w is a unit vector orthogonal to 1_N, so this cannot be zero
    debug_assert!(norm(&normal) > 0.0);
    ClassificationSubspace { normal }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Label {
    Positive,
    Negative,
    OnBoundary,
}

impl Label {
    pub fn from_margin(margin: f64) -> Label {
        if margin > 0.0 {
            Label::Positive
        } else if margin < 0.0 {
            Label::Negative
        } else {
            Label::OnBoundary
        }
    }

    /// `+1`, `-1`, or `0` on the boundary.
    pub fn sign(self) -> f64 {
        match self {
            Label::Positive => 1.0,
            Label::Negative => -1.0,
            Label::OnBoundary => 0.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Decision {
    pub label: Label,
    pub margin: f64,
}

impl Decision {
    fn from_margin(margin: f64) -> Self {
        Decision {
            label: Label::from_margin(margin),
            margin,
        }
    }
}

/// Normalize by the boundary's region, then evaluate `w . I~ - b`.
pub fn classify_normalized(image: &ImageVolume, boundary: &LinearBoundary) -> Result<Decision> {
    let normalized = normalize(image, &boundary.region_n)?;
    let score: f64 = boundary
        .region_c
        .indices()
        .iter()
        .map(|&i| boundary.w[i] * normalized.data()[i])
        .sum();
    Ok(Decision::from_margin(score - boundary.b))
}

/// Side of the classification subspace the half-ray of `image` lies on.
pub fn classify_halfray(image: &ImageVolume, subspace: &ClassificationSubspace) -> Decision {
    Decision::from_margin(dot(&subspace.normal, image.data()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Claim2Outcome {
    Agree,
    Disagree,
    /// `|margin|` below [`MARGIN_EXCLUSION`]; not counted either way.
    Excluded,
}

/// Compares the normalized rule on `image` with the subspace rule on `alpha * image`.
pub fn check_claim2_instance(
    image: &ImageVolume,
    alpha: f64,
    boundary: &LinearBoundary,
    subspace: &ClassificationSubspace,
) -> Result<Claim2Outcome> {
    let normalized = classify_normalized(image, boundary)?;
    if normalized.margin.abs() < MARGIN_EXCLUSION {
        return Ok(Claim2Outcome::Excluded);
    }
    let ray = classify_halfray(&image.scaled(alpha)?, subspace);
    Ok(if ray.label == normalized.label {
        Claim2Outcome::Agree
    } else {
        Claim2Outcome::Disagree
    })
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Claim2Report {
    pub dimension: usize,
    pub trials: usize,
    pub agreements: usize,
    pub disagreements: usize,
    pub excluded: usize,
}

impl Claim2Report {
    pub fn passed(&self) -> bool {
        self.disagreements == 0 && self.agreements + self.excluded == self.trials
    }
}

/// Disjoint random `N` and `C`, each covering at least 10% of `d` voxels.
pub fn random_disjoint_regions(d: usize, rng: &mut impl Rng) -> (Vec<usize>, Vec<usize>) {
    assert!(d >= 2, "need at least two voxels");
    let mut order: Vec<usize> = (0..d).collect();
    order.shuffle(rng);
    let min_size = ((d as f64 * 0.1).ceil() as usize).max(1);
    let max_size = (d / 2).max(min_size);
    let n_size = rng.gen_range(min_size..=max_size);
    let c_size = rng.gen_range(min_size..=max_size.min(d - n_size));
    let mut region_n = order[..n_size].to_vec();
    let mut region_c = order[n_size..n_size + c_size].to_vec();
    region_n.sort_unstable();
    region_c.sort_unstable();
    (region_n, region_c)
}

/// Random unit vector supported on `region`.
pub fn random_unit_on(region: &[usize], d: usize, rng: &mut impl Rng) -> Vec<f64> {
    loop {
        let mut w = vec![0.0; d];
        for &i in region {
            w[i] = rng.sample(StandardNormal);
        }
        let length = norm(&w);
        if length > 1e-6 {
            w.iter_mut().for_each(|v| *v /= length);
            return w;
        }
    }
}

fn random_image(d: usize, rng: &mut impl Rng) -> ImageVolume {
    loop {
        let data: Vec<f64> = (0..d).map(|_| rng.gen::<f64>()).collect();
        if let Ok(v) = ImageVolume::from_vec(data) {
            return v;
        }
    }
}

fn log_uniform(rng: &mut impl Rng, lo: f64, hi: f64) -> f64 {
    (rng.gen_range(lo.ln()..=hi.ln())).exp()
}

/// Randomized equivalence check between normalized and half-ray classification.
///
/// `perturb` adds uniform noise of that amplitude to every subspace normal; zero for
/// the real check, nonzero to confirm that the harness can detect a broken normal.
pub fn verify_claim2(trials: usize, d: usize, seed: u64, perturb: f64) -> Result<Claim2Report> {
    if d < 3 {
        return Err(Error::InvalidBoundary(format!("dimension {d} < 3")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = Claim2Report {
        dimension: d,
        trials,
        ..Claim2Report::default()
    };
    let dims = [d, 1, 1];
    let mut remaining = trials;
    while remaining > 0 {
        // a fresh boundary every few trials keeps both regions and weights varied
        let (n_idx, c_idx) = random_disjoint_regions(d, &mut rng);
        let region_n = RegionMask::new(dims, n_idx)?;
        let region_c = RegionMask::new(dims, c_idx)?;
        let w = random_unit_on(region_c.indices(), d, &mut rng);
        // offset taken from a reference image so margins straddle zero
        let reference = normalize(&random_image(d, &mut rng), &region_n)?;
        let b = dot(&w, reference.data());
        let boundary = LinearBoundary::new(w, b, region_c, region_n)?;
        let mut subspace = classification_subspace(&boundary);
        if perturb != 0.0 {
            subspace
                .normal
                .iter_mut()
                .for_each(|v| *v += perturb * rng.gen_range(-1.0..=1.0));
        }
        for _ in 0..remaining.min(16) {
            let image = random_image(d, &mut rng);
            let alpha = log_uniform(&mut rng, 1e-3, 1e3);
            match check_claim2_instance(&image, alpha, &boundary, &subspace)? {
                Claim2Outcome::Agree => report.agreements += 1,
                Claim2Outcome::Disagree => report.disagreements += 1,
                Claim2Outcome::Excluded => report.excluded += 1,
            }
            remaining -= 1;
        }
    }
    Ok(report)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SubspaceVerdict {
    SameSubspace,
    DifferentSubspace,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SubspaceComparison {
    pub verdict: SubspaceVerdict,
    /// Signed cosine of the two normals. A value near `-1` is the same set of
    /// points with the two sides swapped, as happens for `(w, b)` versus `(-w, -b)`.
    pub cosine: f64,
}

/// Whether two normalized-classification boundaries induce the same subspace.
pub fn verify_claim3_claim4(first: &LinearBoundary, second: &LinearBoundary) -> Result<SubspaceComparison> {
    first.region_c.check_same_grid(&second.region_c)?;
    if !first.region_n.is_disjoint(&second.region_c) || !second.region_n.is_disjoint(&first.region_c) {
        return Err(Error::OverlappingRegions);
    }
    let cosine = classification_subspace(first).cosine(&classification_subspace(second));
    let verdict = if cosine.abs() > 1.0 - IDENTITY_TOL {
        SubspaceVerdict::SameSubspace
    } else {
        SubspaceVerdict::DifferentSubspace
    };
    Ok(SubspaceComparison { verdict, cosine })
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct BatteryReport {
    pub name: String,
    pub cases: usize,
    pub failures: usize,
    /// Largest `|cosine|` seen among pairs expected to differ.
    pub max_abs_cosine_distinct: f64,
}

impl BatteryReport {
    pub fn passed(&self) -> bool {
        self.cases > 0 && self.failures == 0
    }
}

/// Random constructions with `N != N'` sharing `C`: only `w = w'`, `b = b' = 0` may
/// yield the same subspace.
pub fn claim4_battery(constructions: usize, d: usize, seed: u64) -> Result<BatteryReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dims = [d, 1, 1];
    let mut report = BatteryReport {
        name: "claim4".into(),
        ..BatteryReport::default()
    };
    for _ in 0..constructions {
        let (n_idx, c_idx) = random_disjoint_regions(d, &mut rng);
        let region_c = RegionMask::new(dims, c_idx)?;
        let region_n = RegionMask::new(dims, n_idx)?;
        // second normalization region: another random subset outside C, different from N
        let outside_c: Vec<usize> = (0..d).filter(|&i| !region_c.contains(i)).collect();
        let region_n2 = loop {
            let size = rng.gen_range(1..=outside_c.len());
            let pick: Vec<usize> = outside_c.choose_multiple(&mut rng, size).copied().collect();
            let candidate = RegionMask::new(dims, pick)?;
            if candidate != region_n {
                break candidate;
            }
        };
        let w = random_unit_on(region_c.indices(), d, &mut rng);
        let w_other = random_unit_on(region_c.indices(), d, &mut rng);
        let b = rng.gen_range(0.1..3.0) * if rng.gen() { 1.0 } else { -1.0 };
        let b_other = rng.gen_range(0.1..3.0);

        let cases: [(Vec<f64>, f64, Vec<f64>, f64, bool); 5] = [
            (w.clone(), 0.0, w.clone(), 0.0, true),
            (w.clone(), b, w.clone(), b, false),
            (w.clone(), b, w.clone(), 0.0, false),
            (w.clone(), b, w.clone(), b_other, false),
            (w.clone(), 0.0, w_other.clone(), 0.0, false),
        ];
        for (w1, b1, w2, b2, expect_same) in cases {
            let first = LinearBoundary::new(w1, b1, region_c.clone(), region_n.clone())?;
            let second = LinearBoundary::new(w2, b2, region_c.clone(), region_n2.clone())?;
            let cmp = verify_claim3_claim4(&first, &second)?;
            let same = cmp.verdict == SubspaceVerdict::SameSubspace;
            if !expect_same {
                report.max_abs_cosine_distinct = report.max_abs_cosine_distinct.max(cmp.cosine.abs());
            }
            report.cases += 1;
            if same != expect_same {
                report.failures += 1;
            }
        }
    }
    Ok(report)
}

/// Random distinct `(w, b)` pairs over one fixed `N`, `C`: normals must never be parallel.
/// Pairs sharing `w` or sharing `b` are mixed in since they are the closest calls.
pub fn claim3_uniqueness(pairs: usize, d: usize, seed: u64) -> Result<BatteryReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dims = [d, 1, 1];
    let (n_idx, c_idx) = random_disjoint_regions(d, &mut rng);
    let region_c = RegionMask::new(dims, c_idx)?;
    let region_n = RegionMask::new(dims, n_idx)?;
    let mut report = BatteryReport {
        name: "claim3".into(),
        ..BatteryReport::default()
    };
    for k in 0..pairs {
        let w = random_unit_on(region_c.indices(), d, &mut rng);
        let b = rng.gen_range(-3.0..3.0);
        let (w2, b2) = match k % 3 {
            0 => (
                w.clone(),
                loop {
                    let b2 = rng.gen_range(-3.0..3.0);
                    if b2 != b {
                        break b2;
                    }
                },
            ),
            1 => (random_unit_on(region_c.indices(), d, &mut rng), b),
            _ => (
                random_unit_on(region_c.indices(), d, &mut rng),
                rng.gen_range(-3.0..3.0),
            ),
        };
        let first = LinearBoundary::new(w, b, region_c.clone(), region_n.clone())?;
        let second = LinearBoundary::new(w2, b2, region_c.clone(), region_n.clone())?;
        let cosine = classification_subspace(&first)
            .cosine(&classification_subspace(&second))
            .abs();
        report.max_abs_cosine_distinct = report.max_abs_cosine_distinct.max(cosine);
        report.cases += 1;
        if cosine >= 1.0 - MARGIN_EXCLUSION {
            report.failures += 1;
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::Rng;

    fn mask(d: usize, idx: &[usize]) -> RegionMask {
        RegionMask::new([d, 1, 1], idx.to_vec()).unwrap()
    }

    fn vol(v: &[f64]) -> ImageVolume {
        ImageVolume::from_vec(v.to_vec()).unwrap()
    }

    #[test]
    fn indicator_examples() {
        assert_eq!(indicator_mean_vector(&[0, 1], 3).unwrap(), vec![0.5, 0.5, 0.0]);
        assert_eq!(indicator_mean_vector(&[2], 3).unwrap(), vec![0.0, 0.0, 1.0]);
        let uniform = indicator_mean_vector(&[0, 1, 2, 3], 4).unwrap();
        assert_eq!(uniform, vec![0.25; 4]);
        assert_eq!(uniform.iter().sum::<f64>(), 1.0);
        assert!(matches!(indicator_mean_vector(&[], 3), Err(Error::EmptyRegion)));
        assert_eq!(Error::EmptyRegion.to_string(), "empty normalization region");
    }

    #[test]
    fn normalize_examples() {
        let n = mask(3, &[0, 1]);
        let out = normalize(&vol(&[2.0, 4.0, 6.0]), &n).unwrap();
        let expected = [2.0 / 3.0, 4.0 / 3.0, 2.0];
        for (a, b) in out.data().iter().zip(expected) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-15);
        }
        let constant = normalize(&vol(&[5.0; 3]), &mask(3, &[0, 1, 2])).unwrap();
        assert_eq!(constant.data(), &[1.0; 3]);
        let scaled = normalize(&vol(&[20.0, 40.0, 60.0]), &n).unwrap();
        for (a, b) in out.data().iter().zip(scaled.data()) {
            assert_abs_diff_eq!(*a, *b, epsilon = 1e-10);
        }
    }

    #[test]
    fn normalize_rejects_zero_region_mean() {
        let err = normalize(&vol(&[0.0, 0.0, 3.0]), &mask(3, &[0, 1])).unwrap_err();
        assert_eq!(err.to_string(), "degenerate normalization region");
    }

    #[test]
    fn bp_examples() {
        assert_eq!(bp_values(&[1.0, 1.0, 1.0]), vec![0.0; 3]);
        let bp = bp_values(&[2.0 / 3.0, 4.0 / 3.0, 2.0]);
        assert_abs_diff_eq!(bp[0], -1.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(bp[1], 1.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(bp[2], 1.0, epsilon = 1e-15);
        assert_eq!(bp_values(&[1.5]), vec![0.5]);
    }

    #[test]
    fn sphere_examples() {
        let p = sphere_project(&[3.0, 0.0, 0.0, 7.0], &mask(4, &[0, 1, 2])).unwrap();
        assert_abs_diff_eq!(p[0], 3f64.sqrt(), epsilon = 1e-15);
        assert_eq!(&p[1..], &[0.0, 0.0]);
        let p = sphere_project(&[1.0; 4], &mask(4, &[0, 1, 2, 3])).unwrap();
        assert_eq!(p, vec![1.0; 4]);
        let p = sphere_project(&[2.0, 4.0], &mask(2, &[0, 1])).unwrap();
        assert_abs_diff_eq!(p[0], 0.6325, epsilon = 1e-4);
        assert_abs_diff_eq!(p[1], 1.2649, epsilon = 1e-4);
        let err = sphere_project(&[0.0, 0.0, 5.0], &mask(3, &[0, 1])).unwrap_err();
        assert_eq!(err.to_string(), "zero vector on classification region");
    }

    fn boundary(w: &[f64], b: f64, c: &[usize], n: &[usize]) -> LinearBoundary {
        let d = w.len();
        LinearBoundary::new(w.to_vec(), b, mask(d, c), mask(d, n)).unwrap()
    }

    #[test]
    fn subspace_examples() {
        let s = classification_subspace(&boundary(&[0.0, 0.0, 1.0], 1.0, &[2], &[0, 1]));
        assert_eq!(s.normal(), &[-0.5, -0.5, 1.0]);
        let s = classification_subspace(&boundary(&[0.0, 0.0, 1.0], 0.0, &[2], &[0, 1]));
        assert_eq!(s.normal(), &[0.0, 0.0, 1.0]);
        let s = classification_subspace(&boundary(&[0.0, 0.0, 1.0], -2.0, &[2], &[0, 1]));
        assert_eq!(s.normal(), &[1.0, 1.0, 1.0]);
    }

    #[test]
    fn boundary_validation() {
        let d = 3;
        assert!(matches!(
            LinearBoundary::new(vec![0.0, 0.0, 1.0], 0.0, mask(d, &[1, 2]), mask(d, &[0, 1])),
            Err(Error::OverlappingRegions)
        ));
        assert!(LinearBoundary::new(vec![0.0, 0.0, 2.0], 0.0, mask(d, &[2]), mask(d, &[0])).is_err());
        assert!(LinearBoundary::new(vec![0.0, 1.0, 0.0], 0.0, mask(d, &[2]), mask(d, &[0])).is_err());
        let b = LinearBoundary::from_unnormalized(vec![0.0, 0.0, 2.0], 4.0, mask(d, &[2]), mask(d, &[0])).unwrap();
        assert_eq!(b.w(), &[0.0, 0.0, 1.0]);
        assert_eq!(b.b(), 2.0);
    }

    #[test]
    fn classify_normalized_examples() {
        let image = vol(&[2.0, 4.0, 6.0]);
        let d = classify_normalized(&image, &boundary(&[0.0, 0.0, 1.0], 1.0, &[2], &[0, 1])).unwrap();
        assert_abs_diff_eq!(d.margin, 1.0, epsilon = 1e-15);
        assert_eq!(d.label, Label::Positive);
        let d = classify_normalized(&image, &boundary(&[0.0, 0.0, 1.0], 2.0, &[2], &[0, 1])).unwrap();
        assert_eq!(d.margin, 0.0);
        assert_eq!(d.label, Label::OnBoundary);
        let zero_b = boundary(&[0.0, 0.0, 1.0], 0.0, &[2], &[0, 1]);
        for third in [0.0, 0.5, 3.0] {
            let d = classify_normalized(&vol(&[1.0, 1.0, third]), &zero_b).unwrap();
            assert_eq!(d.label == Label::Positive, third > 0.0);
        }
    }

    #[test]
    fn classify_halfray_examples() {
        let image = vol(&[2.0, 4.0, 6.0]);
        let b = boundary(&[0.0, 0.0, 1.0], 1.0, &[2], &[0, 1]);
        let s = classification_subspace(&b);
        let d = classify_halfray(&image, &s);
        assert_eq!(d.margin, 3.0);
        assert_eq!(d.label, Label::Positive);
        assert_eq!(classify_halfray(&image.scaled(10.0).unwrap(), &s).label, d.label);
        let zero_b = boundary(&[0.0, 0.0, 1.0], 0.0, &[2], &[0, 1]);
        let s0 = classification_subspace(&zero_b);
        assert_eq!(s0.normal(), zero_b.w());
        for v in [[1.0, 2.0, 0.0], [0.5, 0.5, 7.0]] {
            let image = vol(&v);
            assert_eq!(
                classify_halfray(&image, &s0).label,
                classify_normalized(&image, &zero_b).unwrap().label
            );
        }
    }

    #[test]
    fn boundary_image_is_excluded() {
        let b = boundary(&[0.0, 0.0, 1.0], 2.0, &[2], &[0, 1]);
        let s = classification_subspace(&b);
        let outcome = check_claim2_instance(&vol(&[2.0, 4.0, 6.0]), 3.0, &b, &s).unwrap();
        assert_eq!(outcome, Claim2Outcome::Excluded);
    }

    #[test]
    fn claim2_small_battery() {
        let report = verify_claim2(1000, 3, 11, 0.0).unwrap();
        assert!(report.passed(), "{report:?}");
        assert_eq!(report.trials, 1000);
        let report = verify_claim2(2000, 50, 12, 0.0).unwrap();
        assert!(report.passed(), "{report:?}");
    }

    #[test]
    fn claim2_detects_perturbed_normal() {
        let report = verify_claim2(10_000, 50, 5, 1e-3).unwrap();
        assert!(report.disagreements > 0, "{report:?}");
    }

    #[test]
    fn claim34_examples() {
        let d = 4;
        let c = [3];
        let w = [0.0, 0.0, 0.0, 1.0];
        let same = verify_claim3_claim4(&boundary(&w, 0.0, &c, &[0]), &boundary(&w, 0.0, &c, &[1])).unwrap();
        assert_eq!(same.verdict, SubspaceVerdict::SameSubspace);
        let diff = verify_claim3_claim4(&boundary(&w, 1.0, &c, &[0]), &boundary(&w, 1.0, &c, &[1])).unwrap();
        assert_eq!(diff.verdict, SubspaceVerdict::DifferentSubspace);
        let ident = verify_claim3_claim4(&boundary(&w, 0.7, &c, &[0, 1]), &boundary(&w, 0.7, &c, &[0, 1])).unwrap();
        assert_eq!(ident.verdict, SubspaceVerdict::SameSubspace);
        // N' overlapping the other boundary's C
        let other = LinearBoundary::new(vec![0.0, 0.0, 1.0, 0.0], 0.0, mask(d, &[2]), mask(d, &[3])).unwrap();
        assert!(verify_claim3_claim4(&boundary(&w, 0.0, &c, &[0]), &other).is_err());
    }

    #[test]
    fn opposite_orientation_is_the_same_point_set() {
        // (w, b) and (-w, -b) swap the sides of one subspace
        let w = [0.0, 0.6, 0.8];
        let neg = [0.0, -0.6, -0.8];
        let cmp =
            verify_claim3_claim4(&boundary(&w, 1.5, &[1, 2], &[0]), &boundary(&neg, -1.5, &[1, 2], &[0])).unwrap();
        assert_eq!(cmp.verdict, SubspaceVerdict::SameSubspace);
        assert!(cmp.cosine < 0.0);
    }

    #[test]
    fn batteries_pass() {
        assert!(claim4_battery(20, 12, 3).unwrap().passed());
        assert!(claim3_uniqueness(200, 12, 4).unwrap().passed());
    }

    #[test]
    fn halfray_equality() {
        let a = HalfRay::new(vol(&[1.0, 2.0, 3.0]));
        let b = HalfRay::new(vol(&[2.5, 5.0, 7.5]));
        let c = HalfRay::new(vol(&[1.0, 2.0, 3.1]));
        assert!(a.same_ray(&b));
        assert!(!a.same_ray(&c));
        let p = a.sphere_point();
        let q = b.sphere_point();
        for (x, y) in p.iter().zip(&q) {
            assert_abs_diff_eq!(*x, *y, epsilon = 1e-12);
        }
    }

    proptest! {
        #[test]
        fn sphere_radius_and_idempotence(x in prop::collection::vec(0.0f64..100.0, 2..64), alpha in 1e-3f64..1e3) {
            prop_assume!(x.iter().any(|&v| v > 1e-6));
            let d = x.len();
            let full = RegionMask::full([d, 1, 1]).unwrap();
            let p = sphere_project(&x, &full).unwrap();
            let radius = norm(&p);
            prop_assert!((radius - (d as f64).sqrt()).abs() <= 1e-8 * (d as f64).sqrt());
            let twice = sphere_project(&p, &full).unwrap();
            for (a, b) in p.iter().zip(&twice) {
                prop_assert!((a - b).abs() <= 1e-10);
            }
            let scaled: Vec<f64> = x.iter().map(|v| v * alpha).collect();
            let ps = sphere_project(&scaled, &full).unwrap();
            for (a, b) in p.iter().zip(&ps) {
                prop_assert!((a - b).abs() <= 1e-10);
            }
        }

        #[test]
        fn normalized_images_lie_on_the_affine_slice(
            x in prop::collection::vec(0.01f64..50.0, 3..40),
            split in 1usize..3,
        ) {
            let d = x.len();
            let n = RegionMask::new([d, 1, 1], (0..split.min(d - 1)).collect()).unwrap();
            let out = normalize(&ImageVolume::from_vec(x).unwrap(), &n).unwrap();
            let ones = indicator_mean_vector(n.indices(), d).unwrap();
            prop_assert!((dot(&ones, out.data()) - 1.0).abs() < 1e-10);
        }

        #[test]
        fn halfray_label_ignores_positive_scale(
            x in prop::collection::vec(0.0f64..10.0, 4..30),
            alpha in 1e-4f64..1e4,
            seed in any::<u64>(),
        ) {
            prop_assume!(x.iter().any(|&v| v > 0.0));
            let d = x.len();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (n, c) = random_disjoint_regions(d, &mut rng);
            let w = random_unit_on(&c, d, &mut rng);
            let b = LinearBoundary::new(w, rng.gen_range(-2.0..2.0), mask(d, &c), mask(d, &n)).unwrap();
            let s = classification_subspace(&b);
            let image = ImageVolume::from_vec(x).unwrap();
            let plain = classify_halfray(&image, &s);
            prop_assume!(plain.margin.abs() > 1e-12);
            prop_assert_eq!(plain.label, classify_halfray(&image.scaled(alpha).unwrap(), &s).label);
        }
    }
}
