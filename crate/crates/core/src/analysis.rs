//! Strategy comparison, weight maps and region contributions.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use statrs::function::beta::beta_reg;

use crate::classifiers::{Classifier, DesignMatrix, LinearModel, RunResult, Strategy};
use crate::error::{Error, Result};
use crate::phantom::Region;
use crate::volume::{coords, voxel_count, Dims, RegionMask, WeightMap};

/// Per-run accuracies of one (strategy, classifier) cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AccuracySample {
    pub strategy: Strategy,
    pub classifier: Classifier,
    pub accuracies: Vec<f64>,
}

impl AccuracySample {
    pub fn new(strategy: Strategy, classifier: Classifier, accuracies: Vec<f64>) -> Result<Self> {
        if accuracies.is_empty() {
            return Err(Error::InsufficientSamples("empty accuracy sample".into()));
        }
        if let Some(a) = accuracies.iter().find(|a| !(0.0..=1.0).contains(*a)) {
            return Err(Error::InvalidDesign(format!("accuracy {a} outside [0, 1]")));
        }
        Ok(AccuracySample {
            strategy,
            classifier,
            accuracies,
        })
    }

    /// Test accuracies of the given runs, ordered by run index.
    pub fn from_results(results: &[RunResult]) -> Result<Self> {
        let first = results
            .first()
            .ok_or_else(|| Error::InsufficientSamples("no runs".into()))?;
        if results
            .iter()
            .any(|r| r.strategy != first.strategy || r.classifier != first.classifier)
        {
            return Err(Error::InvalidDesign("runs from more than one cell".into()));
        }
        let mut sorted: Vec<&RunResult> = results.iter().collect();
        sorted.sort_by_key(|r| r.run);
        Self::new(
            first.strategy,
            first.classifier,
            sorted.iter().map(|r| r.test_acc).collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.accuracies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.accuracies.is_empty()
    }

    pub fn mean(&self) -> f64 {
        mean(&self.accuracies)
    }

    /// Sample standard deviation; zero for a single run.
    pub fn std(&self) -> f64 {
        sample_variance(&self.accuracies).sqrt()
    }
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

fn sample_variance(x: &[f64]) -> f64 {
    if x.len() < 2 {
        return 0.0;
    }
    let m = mean(x);
    x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (x.len() - 1) as f64
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestMode {
    /// Unpaired, unequal variances.
    #[default]
    Welch,
    /// Paired by run index.
    Paired,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TTest {
    pub t: f64,
    pub df: f64,
    /// Two-sided.
    pub p: f64,
}

/// Two-sided tail probability `P(|T| >= |t|)` of Student's t with `df` degrees of freedom.
pub fn student_t_two_sided_p(t: f64, df: f64) -> f64 {
    if t.is_infinite() {
        return 0.0;
    }
    if t == 0.0 {
        return 1.0;
    }
    beta_reg(df / 2.0, 0.5, df / (df + t * t)).clamp(0.0, 1.0)
}

/// Outcome when both samples have zero spread.
fn degenerate(diff: f64, df: f64) -> TTest {
    if diff == 0.0 {
        TTest { t: 0.0, df, p: 1.0 }
    } else {
        TTest {
            t: diff.signum() * f64::INFINITY,
            df,
            p: 0.0,
        }
    }
}

/// Welch's unequal-variance two-sample test on raw values.
pub fn welch(a: &[f64], b: &[f64]) -> Result<TTest> {
    if a.len() < 2 || b.len() < 2 {
        return Err(Error::InsufficientSamples(format!(
            "t-test needs at least 2 values per sample, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let diff = mean(a) - mean(b);
    let sa = sample_variance(a) / na;
    let sb = sample_variance(b) / nb;
    if sa + sb == 0.0 {
        return Ok(degenerate(diff, na + nb - 2.0));
    }
    let t = diff / (sa + sb).sqrt();
    let df = (sa + sb) * (sa + sb) / (sa * sa / (na - 1.0) + sb * sb / (nb - 1.0));
    Ok(TTest {
        t,
        df,
        p: student_t_two_sided_p(t, df),
    })
}

/// Paired test on `a[i] - b[i]`.
pub fn paired(a: &[f64], b: &[f64]) -> Result<TTest> {
    if a.len() != b.len() {
        return Err(Error::MismatchedRuns(format!(
            "paired test needs equal lengths, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    if a.len() < 2 {
        return Err(Error::InsufficientSamples("t-test needs at least 2 pairs".into()));
    }
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let n = d.len() as f64;
    let df = n - 1.0;
    let se2 = sample_variance(&d) / n;
    if se2 == 0.0 {
        return Ok(degenerate(mean(&d), df));
    }
    let t = mean(&d) / se2.sqrt();
    Ok(TTest {
        t,
        df,
        p: student_t_two_sided_p(t, df),
    })
}

pub fn welch_t_test(a: &AccuracySample, b: &AccuracySample) -> Result<TTest> {
    welch(&a.accuracies, &b.accuracies)
}

pub fn t_test(a: &AccuracySample, b: &AccuracySample, mode: TestMode) -> Result<TTest> {
    match mode {
        TestMode::Welch => welch(&a.accuracies, &b.accuracies),
        TestMode::Paired => paired(&a.accuracies, &b.accuracies),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegionContribution {
    pub region: Region,
    pub mean_positive: f64,
    pub std_positive: f64,
    pub mean_negative: f64,
    pub std_negative: f64,
    /// `mean_positive - mean_negative`.
    pub net_change: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContributionReport {
    pub strategy: Strategy,
    /// False for SBR features, where the analysis runs on normalized rather than
    /// self-normalized images.
    pub self_normalized: bool,
    pub contributions: Vec<RegionContribution>,
    /// Largest `|sum of region scores + remainder - w.x|` over the samples.
    pub additivity_error: f64,
}

impl ContributionReport {
    /// Region with the largest `|net_change|`; the first listed wins ties.
    pub fn dominant(&self) -> Option<Region> {
        let mut best: Option<&RegionContribution> = None;
        for c in &self.contributions {
            if best.map_or(true, |b| c.net_change.abs() > b.net_change.abs()) {
                best = Some(c);
            }
        }
        best.map(|c| c.region)
    }

    pub fn get(&self, region: Region) -> Option<&RegionContribution> {
        self.contributions.iter().find(|c| c.region == region)
    }
}

/// Positions in the feature vector of the voxels of `region` that are features.
pub fn feature_positions(feature_region: &RegionMask, region: &RegionMask) -> Result<Vec<usize>> {
    feature_region.check_same_grid(region)?;
    let positions: Vec<usize> = region
        .indices()
        .iter()
        .filter_map(|v| feature_region.indices().binary_search(v).ok())
        .collect();
    if positions.is_empty() {
        return Err(Error::InvalidMask("region has no voxel in the feature region".into()));
    }
    Ok(positions)
}

/// Scores each sample restricted to each region, `sum_{i in R} w_i x_i`, and compares
/// the classes. Positions index the feature vector and must not overlap.
pub fn region_contribution(
    model: &LinearModel,
    x: &DesignMatrix,
    regions: &[(Region, Vec<usize>)],
) -> Result<ContributionReport> {
    let size = x.cols();
    if model.weights.len() != size {
        return Err(Error::InvalidDesign(format!(
            "model has {} weights for {size} features",
            model.weights.len()
        )));
    }
    let mut owner = vec![false; size];
    for (_, positions) in regions {
        for &index in positions {
            if index >= size {
                return Err(Error::RegionOutOfRange { index, size });
            }
            if owner[index] {
                return Err(Error::OverlappingRegions);
            }
            owner[index] = true;
        }
    }
    let w = &model.weights;
    let mut scores = vec![Vec::with_capacity(x.rows()); regions.len()];
    let mut additivity_error: f64 = 0.0;
    for i in 0..x.rows() {
        let row = x.row(i);
        let mut parts = 0.0;
        for (k, (_, positions)) in regions.iter().enumerate() {
            let s: f64 = positions.iter().map(|&j| w[j] * row[j]).sum();
            scores[k].push(s);
            parts += s;
        }
        let rest: f64 = (0..size).filter(|&j| !owner[j]).map(|j| w[j] * row[j]).sum();
        let full: f64 = w.iter().zip(row).map(|(a, b)| a * b).sum();
        additivity_error = additivity_error.max((parts + rest - full).abs());
    }
    let labels = x.labels();
    let contributions = regions
        .iter()
        .zip(&scores)
        .map(|((region, _), s)| {
            let pos: Vec<f64> = s
                .iter()
                .zip(labels)
                .filter(|(_, &y)| y > 0.0)
                .map(|(v, _)| *v)
                .collect();
            let neg: Vec<f64> = s
                .iter()
                .zip(labels)
                .filter(|(_, &y)| y < 0.0)
                .map(|(v, _)| *v)
                .collect();
            RegionContribution {
                region: *region,
                mean_positive: mean(&pos),
                std_positive: sample_variance(&pos).sqrt(),
                mean_negative: mean(&neg),
                std_negative: sample_variance(&neg).sqrt(),
                net_change: mean(&pos) - mean(&neg),
            }
        })
        .collect();
    Ok(ContributionReport {
        strategy: x.strategy(),
        self_normalized: x.strategy().is_self_normalized(),
        contributions,
        additivity_error,
    })
}

/// Slices `lo..=hi` (1-based) along `axis`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SliceRange {
    pub lo: usize,
    pub hi: usize,
    pub axis: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightEntry {
    pub voxel: usize,
    pub x: usize,
    pub y: usize,
    pub z: usize,
    pub weight: f64,
}

/// Scatters model weights to their voxels. With `slices`, voxels outside the range are
/// left at zero and omitted from the entry list.
pub fn export_weight_map(
    model: &LinearModel,
    feature_to_voxel: &[usize],
    dims: Dims,
    spacing_mm: [f64; 3],
    slices: Option<SliceRange>,
) -> Result<(WeightMap, Vec<WeightEntry>)> {
    if feature_to_voxel.len() != model.weights.len() {
        return Err(Error::InvalidDesign(format!(
            "{} voxels mapped for {} weights",
            feature_to_voxel.len(),
            model.weights.len()
        )));
    }
    if let Some(r) = slices {
        if r.axis > 2 || r.lo == 0 || r.lo > r.hi || r.hi > dims[r.axis] {
            return Err(Error::InvalidMask(format!(
                "slices {}..={} outside 1..={} on axis {}",
                r.lo,
                r.hi,
                dims.get(r.axis).copied().unwrap_or(0),
                r.axis
            )));
        }
    }
    let size = voxel_count(dims);
    let mut map = WeightMap::zeros(dims, spacing_mm);
    let mut used = vec![false; size];
    let mut entries = Vec::new();
    for (&voxel, &weight) in feature_to_voxel.iter().zip(&model.weights) {
        if voxel >= size {
            return Err(Error::RegionOutOfRange { index: voxel, size });
        }
        if used[voxel] {
            return Err(Error::MapCollision(voxel));
        }
        used[voxel] = true;
        let [x, y, z] = coords(dims, voxel);
        if let Some(r) = slices {
            let s = [x, y, z][r.axis] + 1;
            if s < r.lo || s > r.hi {
                continue;
            }
        }
        map.data[voxel] = weight;
        if weight != 0.0 {
            entries.push(WeightEntry { voxel, x, y, z, weight });
        }
    }
    entries.sort_by_key(|e| e.voxel);
    Ok((map, entries))
}

/// Reads the weights back out of a map, in feature order.
pub fn gather_weights(map: &WeightMap, feature_to_voxel: &[usize]) -> Vec<f64> {
    feature_to_voxel.iter().map(|&v| map.data[v]).collect()
}

fn csv_bytes<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>) -> Result<Vec<u8>> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    for row in rows {
        writer.serialize(row).map_err(|e| Error::format(path, e.to_string()))?;
    }
    writer.into_inner().map_err(|e| Error::format(path, e.to_string()))
}

/// Columns: voxel, x, y, z, weight.
pub fn write_weight_csv(path: &Path, entries: &[WeightEntry]) -> Result<()> {
    let bytes = if entries.is_empty() {
        b"voxel,x,y,z,weight\n".to_vec()
    } else {
        csv_bytes(path, entries)?
    };
    crate::io::write_atomic(path, &bytes)
}

/// Columns: region, mean_positive, std_positive, mean_negative, std_negative, net_change.
pub fn write_contributions_csv(path: &Path, contributions: &[RegionContribution]) -> Result<()> {
    #[derive(Serialize)]
    struct Row<'a> {
        region: &'a str,
        mean_positive: f64,
        std_positive: f64,
        mean_negative: f64,
        std_negative: f64,
        net_change: f64,
    }
    let rows = contributions.iter().map(|c| Row {
        region: c.region.short_name(),
        mean_positive: c.mean_positive,
        std_positive: c.std_positive,
        mean_negative: c.mean_negative,
        std_negative: c.std_negative,
        net_change: c.net_change,
    });
    crate::io::write_atomic(path, &csv_bytes(path, rows)?)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableCell {
    pub strategy: Strategy,
    pub n_runs: usize,
    /// Percent.
    pub mean: f64,
    /// Percent, sample standard deviation.
    pub std: f64,
    /// Against SBR of the same classifier; absent for SBR itself or without an SBR cell.
    pub vs_sbr: Option<TTest>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub classifier: Classifier,
    pub cells: Vec<TableCell>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryTable {
    pub mode: TestMode,
    pub rows: Vec<TableRow>,
}

/// Mean (std) test accuracy per classifier and strategy, with t-tests of each
/// self-normalized strategy against SBR.
pub fn summarize_tables(results: &[RunResult], mode: TestMode) -> Result<SummaryTable> {
    let mut cells: BTreeMap<(Classifier, Strategy), Vec<RunResult>> = BTreeMap::new();
    for r in results {
        cells.entry((r.classifier, r.strategy)).or_default().push(r.clone());
    }
    if cells.is_empty() {
        return Err(Error::InsufficientSamples("no run results".into()));
    }
    let mut n_runs = None;
    let mut samples = BTreeMap::new();
    for (key, runs) in &cells {
        let mut ids: Vec<usize> = runs.iter().map(|r| r.run).collect();
        ids.sort_unstable();
        match &n_runs {
            None => n_runs = Some(ids.clone()),
            Some(expected) if *expected != ids => {
                return Err(Error::MismatchedRuns(format!(
                    "{} {} has runs {:?}, expected {:?}",
                    key.0,
                    key.1,
                    summarize_ids(&ids),
                    summarize_ids(expected)
                )))
            }
            _ => {}
        }
        if ids.len() < 2 {
            return Err(Error::InsufficientSamples(format!(
                "{} {} has {} run; t-tests need at least 2",
                key.0,
                key.1,
                ids.len()
            )));
        }
        samples.insert(*key, AccuracySample::from_results(runs)?);
    }
    let mut rows = Vec::new();
    for classifier in Classifier::ALL {
        let sbr = samples.get(&(classifier, Strategy::Sbr));
        let mut row = TableRow {
            classifier,
            cells: Vec::new(),
        };
        for strategy in Strategy::ALL {
            let Some(sample) = samples.get(&(classifier, strategy)) else {
                continue;
            };
            let vs_sbr = match sbr {
                Some(base) if strategy != Strategy::Sbr => Some(t_test(sample, base, mode)?),
                _ => None,
            };
            row.cells.push(TableCell {
                strategy,
                n_runs: sample.len(),
                mean: 100.0 * sample.mean(),
                std: 100.0 * sample.std(),
                vs_sbr,
            });
        }
        if !row.cells.is_empty() {
            rows.push(row);
        }
    }
    Ok(SummaryTable { mode, rows })
}

fn summarize_ids(ids: &[usize]) -> String {
    match (ids.first(), ids.last()) {
        (Some(a), Some(b)) => format!("{} runs, {a}..={b}", ids.len()),
        _ => "no runs".into(),
    }
}

impl SummaryTable {
    /// Columns: classifier, strategy, n_runs, mean_pct, std_pct, t_vs_sbr, df_vs_sbr, p_vs_sbr.
    pub fn to_csv(&self) -> Result<String> {
        #[derive(Serialize)]
        struct Row {
            classifier: Classifier,
            strategy: Strategy,
            n_runs: usize,
            mean_pct: f64,
            std_pct: f64,
            t_vs_sbr: Option<f64>,
            df_vs_sbr: Option<f64>,
            p_vs_sbr: Option<f64>,
        }
        let rows = self.rows.iter().flat_map(|r| {
            r.cells.iter().map(move |c| Row {
                classifier: r.classifier,
                strategy: c.strategy,
                n_runs: c.n_runs,
                mean_pct: c.mean,
                std_pct: c.std,
                t_vs_sbr: c.vs_sbr.map(|t| t.t),
                df_vs_sbr: c.vs_sbr.map(|t| t.df),
                p_vs_sbr: c.vs_sbr.map(|t| t.p),
            })
        });
        let bytes = csv_bytes(Path::new("table.csv"), rows)?;
        Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
    }

    /// Mean (std) in percent per strategy, then the p-values against SBR.
    pub fn to_text(&self) -> String {
        let strategies: Vec<Strategy> = Strategy::ALL
            .into_iter()
            .filter(|s| self.rows.iter().any(|r| r.cells.iter().any(|c| c.strategy == *s)))
            .collect();
        let compared: Vec<Strategy> = strategies.iter().copied().filter(|s| *s != Strategy::Sbr).collect();
        let mut out = String::new();
        let _ = write!(out, "{:<6}", "");
        for s in &strategies {
            let _ = write!(out, "{:>16}", s.as_str());
        }
        for s in &compared {
            let _ = write!(out, "{:>12}", format!("p ({s})"));
        }
        out.push('\n');
        for row in &self.rows {
            let _ = write!(out, "{:<6}", row.classifier.as_str());
            for s in &strategies {
                let text = row
                    .cells
                    .iter()
                    .find(|c| c.strategy == *s)
                    .map_or("-".to_string(), |c| format!("{:.2} ({:.2})", c.mean, c.std));
                let _ = write!(out, "{text:>16}");
            }
            for s in &compared {
                let text = row
                    .cells
                    .iter()
                    .find(|c| c.strategy == *s)
                    .and_then(|c| c.vs_sbr)
                    .map_or("-".to_string(), |t| format!("{:.4}", t.p));
                let _ = write!(out, "{text:>12}");
            }
            out.push('\n');
        }
        out
    }
}
