//! Preprocessing masks: two-pass Otsu striatum segmentation, axial slice
//! restriction and left/right mirroring.

use crate::error::{Error, Result};
use crate::volume::{coords, flat_index, ImageVolume, RegionMask};

pub const DEFAULT_OTSU_BINS: usize = 256;

#[derive(Clone, Debug, PartialEq)]
pub struct Histogram {
    bin_edges: Vec<f64>,
    counts: Vec<u64>,
}

impl Histogram {
    pub fn new(bin_edges: Vec<f64>, counts: Vec<u64>) -> Result<Self> {
        if counts.is_empty() || bin_edges.len() != counts.len() + 1 {
            return Err(Error::DegenerateHistogram);
        }
        if bin_edges.windows(2).any(|e| !(e[0] < e[1])) {
            return Err(Error::DegenerateHistogram);
        }
        if counts.iter().sum::<u64>() < 2 {
            return Err(Error::DegenerateHistogram);
        }
        Ok(Histogram { bin_edges, counts })
    }

    /// `bins` equal-width bins spanning `[min, max]` of the values.
    pub fn uniform(values: &[f64], bins: usize) -> Result<Self> {
        let (lo, hi) = value_range(values).ok_or(Error::DegenerateHistogram)?;
        if bins < 2 || !(hi > lo) {
            return Err(Error::DegenerateHistogram);
        }
        let width = (hi - lo) / bins as f64;
        let mut edges: Vec<f64> = (0..bins).map(|k| lo + k as f64 * width).collect();
        edges.push(hi);
        let mut counts = vec![0u64; bins];
        for &v in values {
            counts[uniform_bin(v, lo, hi, bins)] += 1;
        }
        Histogram::new(edges, counts)
    }

    pub fn bin_edges(&self) -> &[f64] {
        &self.bin_edges
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn bins(&self) -> usize {
        self.counts.len()
    }
}

fn value_range(values: &[f64]) -> Option<(f64, f64)> {
    let mut it = values.iter().copied();
    let first = it.next()?;
    Some(it.fold((first, first), |(lo, hi), v| (lo.min(v), hi.max(v))))
}

fn uniform_bin(v: f64, lo: f64, hi: f64, bins: usize) -> usize {
    let pos = ((v - lo) / (hi - lo) * bins as f64).floor();
    (pos.max(0.0) as usize).min(bins - 1)
}

/// Index `k` of the edge that best splits the histogram into bins `[0, k)` and `[k, n)`.
///
/// Between-class variance uses bin centres as class values. Near-ties within `1e-12`
/// (relative) go to the lowest edge.
pub fn otsu_split(h: &Histogram) -> Result<usize> {
    if h.counts.iter().filter(|&&c| c > 0).count() < 2 {
        return Err(Error::DegenerateHistogram);
    }
    let centres: Vec<f64> = h.bin_edges.windows(2).map(|e| 0.5 * (e[0] + e[1])).collect();
    let total_count: f64 = h.counts.iter().map(|&c| c as f64).sum();
    let total_sum: f64 = h.counts.iter().zip(&centres).map(|(&c, m)| c as f64 * m).sum();

    let mut scores = Vec::with_capacity(h.bins() - 1);
    let (mut below_count, mut below_sum) = (0.0, 0.0);
    for k in 1..h.bins() {
        below_count += h.counts[k - 1] as f64;
        below_sum += h.counts[k - 1] as f64 * centres[k - 1];
        let above_count = total_count - below_count;
        let score = if below_count == 0.0 || above_count == 0.0 {
            0.0
        } else {
            let diff = below_sum / below_count - (total_sum - below_sum) / above_count;
            (below_count / total_count) * (above_count / total_count) * diff * diff
        };
        scores.push(score);
    }
    let best = scores.iter().copied().fold(0.0, f64::max);
    let k = scores
        .iter()
        .position(|&s| s >= best - 1e-12 * best)
        .expect("at least one candidate edge");
    Ok(k + 1)
}

/// Otsu threshold: the bin edge maximizing between-class variance.
pub fn otsu_threshold(h: &Histogram) -> Result<f64> {
    otsu_split(h).map(|k| h.bin_edges[k])
}

#[derive(Clone, Debug)]
pub struct StriatumMask {
    pub mask: RegionMask,
    /// Background cut from the first pass.
    pub first_threshold: f64,
    /// Nonspecific-binding cut from the second pass over the survivors.
    pub second_threshold: f64,
}

/// Voxels of `candidates` at or above the Otsu edge of their own histogram.
fn otsu_pass(volume: &ImageVolume, candidates: &[usize], bins: usize) -> Result<(Vec<usize>, f64)> {
    let values: Vec<f64> = candidates.iter().map(|&i| volume.data()[i]).collect();
    let hist = Histogram::uniform(&values, bins)?;
    let k = otsu_split(&hist)?;
    let (lo, hi) = value_range(&values).expect("nonempty");
    let kept = candidates
        .iter()
        .zip(&values)
        .filter(|(_, &v)| uniform_bin(v, lo, hi, bins) >= k)
        .map(|(&i, _)| i)
        .collect();
    Ok((kept, hist.bin_edges[k]))
}

/// Two Otsu passes on the mean control image: the first removes background, the
/// second (with a histogram rebuilt over the survivors) removes nonspecific uptake.
pub fn build_striatum_mask(mean_hc: &ImageVolume, bins: usize) -> Result<StriatumMask> {
    let all: Vec<usize> = (0..mean_hc.len()).collect();
    let (foreground, first_threshold) = otsu_pass(mean_hc, &all, bins)?;
    let (striatum, second_threshold) = otsu_pass(mean_hc, &foreground, bins)?;
    debug_assert!(second_threshold >= first_threshold);
    Ok(StriatumMask {
        mask: RegionMask::new(mean_hc.dims(), striatum)?,
        first_threshold,
        second_threshold,
    })
}

/// Keeps voxels whose coordinate along `axis` lies in the 1-based inclusive range `[lo, hi]`.
pub fn restrict_slices(mask: &RegionMask, lo: usize, hi: usize, axis: usize) -> Result<RegionMask> {
    let dims = mask.dims();
    if axis > 2 {
        return Err(Error::InvalidMask(format!("axis {axis} out of range")));
    }
    if lo == 0 || lo > hi || hi > dims[axis] {
        return Err(Error::InvalidMask(format!(
            "slice range {lo}..={hi} invalid for {} slices",
            dims[axis]
        )));
    }
    mask.filter(|i| {
        let c = coords(dims, i)[axis] + 1;
        (lo..=hi).contains(&c)
    })
    .map_err(|_| Error::EmptyAfterRestriction)
}

/// Mirror along axis 0: `x -> nx - 1 - x`.
pub fn mirror_volume(volume: &ImageVolume) -> ImageVolume {
    let dims = volume.dims();
    let src = volume.data();
    let data = (0..src.len()).map(|i| src[mirror_index(dims, i)]).collect();
    volume.with_data(data).expect("mirroring preserves volume invariants")
}

pub fn mirror_mask(mask: &RegionMask) -> RegionMask {
    let dims = mask.dims();
    RegionMask::new(dims, mask.indices().iter().map(|&i| mirror_index(dims, i)).collect())
        .expect("mirroring preserves mask invariants")
}

fn mirror_index(dims: [usize; 3], i: usize) -> usize {
    let [x, y, z] = coords(dims, i);
    flat_index(dims, [dims[0] - 1 - x, y, z])
}

/// Mirrors the volume when the right putamen is brighter than the left, so that the
/// more affected (dimmer) side always ends up on the right. Returns whether it flipped.
pub fn flip_midplane_if_needed(
    volume: &ImageVolume,
    left_putamen: &RegionMask,
    right_putamen: &RegionMask,
) -> Result<(ImageVolume, bool)> {
    left_putamen.check_fits(volume)?;
    right_putamen.check_fits(volume)?;
    if &mirror_mask(left_putamen) != right_putamen {
        return Err(Error::InvalidMask(
            "left and right putamen masks are not mirror images".into(),
        ));
    }
    let left = volume.mean_over(left_putamen);
    let right = volume.mean_over(right_putamen);
    if right - left > 1e-12 * left.abs().max(right.abs()) {
        Ok((mirror_volume(volume), true))
    } else {
        Ok((volume.clone(), false))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn two_spikes() {
        let mut values = vec![0.0; 50];
        values.extend(vec![10.0; 50]);
        let t = otsu_threshold(&Histogram::uniform(&values, 256).unwrap()).unwrap();
        assert!(t > 0.0 && t < 10.0);
    }

    #[test]
    fn separated_clusters() {
        let values = [1.0, 2.0, 3.0, 100.0, 101.0, 102.0];
        let h = Histogram::uniform(&values, 256).unwrap();
        let t = otsu_threshold(&h).unwrap();
        assert!(t > 3.0 && t < 100.0, "{t}");
        assert_eq!(Some(t), rayclass_oracles::otsu_exhaustive(h.bin_edges(), h.counts()));
    }

    #[test]
    fn adjacent_bins() {
        let edges: Vec<f64> = (0..=10).map(f64::from).collect();
        let mut counts = vec![0; 10];
        counts[5] = 7;
        counts[6] = 3;
        let h = Histogram::new(edges, counts).unwrap();
        let t = otsu_threshold(&h).unwrap();
        assert_eq!(t, 6.0);
        assert_eq!(Some(t), rayclass_oracles::otsu_exhaustive(h.bin_edges(), h.counts()));
    }

    #[test]
    fn degenerate_histograms() {
        assert!(matches!(
            Histogram::uniform(&[3.0; 10], 256),
            Err(Error::DegenerateHistogram)
        ));
        let h = Histogram::new(vec![0.0, 1.0, 2.0], vec![0, 9]).unwrap();
        assert!(matches!(otsu_threshold(&h), Err(Error::DegenerateHistogram)));
        assert!(Histogram::new(vec![0.0, 1.0, 1.0], vec![1, 1]).is_err());
    }

    proptest! {
        #[test]
        fn matches_exhaustive_search(counts in prop::collection::vec(0u64..50, 2..64), seed in any::<u64>()) {
            prop_assume!(counts.iter().filter(|&&c| c > 0).count() >= 2);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut edges = vec![rng.gen_range(-5.0..5.0)];
            for _ in 0..counts.len() {
                let last = *edges.last().unwrap();
                edges.push(last + rng.gen_range(0.1..2.0));
            }
            let h = Histogram::new(edges, counts).unwrap();
            prop_assert_eq!(Some(otsu_threshold(&h).unwrap()),
                rayclass_oracles::otsu_exhaustive(h.bin_edges(), h.counts()));
        }
    }

    /// 20 x 20 x 10 grid: background 0.1 in the top half, nonspecific 1.0 in the bottom
    /// half, a 3 x 3 x 3 block of striatum at 5.0.
    fn three_level(noise: f64, seed: u64) -> (ImageVolume, Vec<usize>) {
        let dims = [20, 20, 10];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut truth = Vec::new();
        let data = (0..4000)
            .map(|i| {
                let [x, y, z] = coords(dims, i);
                let level = if z >= 5 {
                    0.1
                } else if (8..11).contains(&x) && (8..11).contains(&y) && (1..4).contains(&z) {
                    truth.push(i);
                    5.0
                } else {
                    1.0
                };
                level * (1.0 + noise * rng.gen_range(-1.0..1.0))
            })
            .collect();
        (ImageVolume::from_values(dims, data).unwrap(), truth)
    }

    #[test]
    fn striatum_recovered_from_three_levels() {
        let (volume, truth) = three_level(0.05, 1);
        let result = build_striatum_mask(&volume, 256).unwrap();
        assert_eq!(result.mask.indices(), truth.as_slice());
        assert!(result.second_threshold >= result.first_threshold);
    }

    #[test]
    fn constant_and_two_level_images_fail() {
        let flat = ImageVolume::from_values([4, 4, 4], vec![2.0; 64]).unwrap();
        assert!(matches!(
            build_striatum_mask(&flat, 256),
            Err(Error::DegenerateHistogram)
        ));
        let two: Vec<f64> = (0..64).map(|i| if i < 32 { 0.1 } else { 1.0 }).collect();
        let two = ImageVolume::from_values([4, 4, 4], two).unwrap();
        assert!(matches!(
            build_striatum_mask(&two, 256),
            Err(Error::DegenerateHistogram)
        ));
    }

    #[test]
    fn slice_restriction() {
        let full = RegionMask::full([4, 4, 4]).unwrap();
        let mid = restrict_slices(&full, 2, 3, 2).unwrap();
        assert_eq!(mid.len(), 32);
        assert_eq!(restrict_slices(&mid, 2, 3, 2).unwrap(), mid);
        assert_eq!(restrict_slices(&full, 1, 4, 2).unwrap(), full);
        let corner = RegionMask::new([4, 4, 4], vec![0]).unwrap();
        assert!(matches!(
            restrict_slices(&corner, 2, 4, 2),
            Err(Error::EmptyAfterRestriction)
        ));
        assert!(restrict_slices(&full, 0, 2, 2).is_err());
        assert!(restrict_slices(&full, 3, 2, 2).is_err());
        assert!(restrict_slices(&full, 1, 5, 2).is_err());
    }

    fn putamen_pair() -> (RegionMask, RegionMask) {
        let dims = [6, 2, 1];
        let left = RegionMask::new(dims, vec![flat_index(dims, [1, 0, 0]), flat_index(dims, [1, 1, 0])]).unwrap();
        let right = mirror_mask(&left);
        (left, right)
    }

    #[test]
    fn flip_moves_deficit_right() {
        let (left, right) = putamen_pair();
        let mut data = vec![1.0; 12];
        for &i in left.indices() {
            data[i] = 0.5;
        }
        let deficit_left = ImageVolume::from_values([6, 2, 1], data).unwrap();
        let (out, flipped) = flip_midplane_if_needed(&deficit_left, &left, &right).unwrap();
        assert!(flipped);
        assert!(out.mean_over(&right) <= out.mean_over(&left));

        let (again, flipped) = flip_midplane_if_needed(&out, &left, &right).unwrap();
        assert!(!flipped);
        assert_eq!(again, out);

        let symmetric = ImageVolume::from_values([6, 2, 1], vec![1.0; 12]).unwrap();
        let (same, flipped) = flip_midplane_if_needed(&symmetric, &left, &right).unwrap();
        assert!(!flipped);
        assert_eq!(same, symmetric);

        assert!(flip_midplane_if_needed(&symmetric, &left, &left).is_err());
    }

    proptest! {
        #[test]
        fn mirror_is_an_involution(data in prop::collection::vec(0.0f64..5.0, 60)) {
            prop_assume!(data.iter().any(|&v| v > 0.0));
            let v = ImageVolume::from_values([5, 4, 3], data).unwrap();
            prop_assert_eq!(mirror_volume(&mirror_volume(&v)), v);
        }
    }
}
