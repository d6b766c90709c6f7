use std::fs;
use std::path::{Path, PathBuf};

use rayclass_core::analysis::{
    export_weight_map, region_contribution, summarize_tables, write_contributions_csv, write_weight_csv, SliceRange,
    SummaryTable, TestMode,
};
use rayclass_core::classifiers::{
    evaluate_run, read_run_results, repeated_split_evaluate, write_run_results, Classifier, DesignMatrix, RunResult,
    Strategy,
};
use rayclass_core::io::{read_json, read_mask, write_atomic, write_json, write_mask, write_weight_map};
use rayclass_core::phantom::{
    export_cohort, generate_cohort, import_cohort, manifest_path, ClassLabel, Cohort, Region,
};
use rayclass_core::pipeline::{masks_from_cohort, task_images, PipelineMasks};
use rayclass_core::verify::{run_battery, VerifyReport};
use rayclass_core::RegionMask;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::PipelineConfig;
use crate::CliError;

fn create_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    Ok(write_atomic(path, text.as_bytes())?)
}

/// Generates the phantom cohort and returns the manifest path.
pub fn cmd_generate(cfg: &PipelineConfig) -> Result<PathBuf, CliError> {
    let mut cfg = cfg.clone();
    cfg.seed()?;
    cfg.validate()?;
    let out = cfg.out_dir()?;
    let size = cfg.cohort;
    let cohort = generate_cohort(&cfg.phantom, size.n_hc, size.n_pd, size.paired_y4)?;
    create_dir(out)?;
    export_cohort(&cohort, out)?;
    Ok(manifest_path(out))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaskSummary {
    pub striatum_voxels: usize,
    pub occipital_voxels: usize,
    pub slices: Option<[usize; 2]>,
    /// Against the cohort's ground-truth striatum, when it has one.
    pub dice: Option<f64>,
    pub files: Vec<String>,
}

const REQUIRED_REGIONS: [Region; 5] = [
    Region::LeftCaudate,
    Region::RightCaudate,
    Region::LeftPutamen,
    Region::RightPutamen,
    Region::Occipital,
];

fn build_masks(cfg: &PipelineConfig, cohort: &Cohort) -> Result<PipelineMasks, CliError> {
    if cohort.count(ClassLabel::Hc) == 0 {
        return Err(CliError::Usage(
            "cohort has no HC images; the striatum mask needs their mean".into(),
        ));
    }
    if let Some(missing) = REQUIRED_REGIONS.iter().find(|r| !cohort.regions.masks.contains_key(r)) {
        return Err(CliError::Usage(format!("cohort has no {} mask", missing.file_stem())));
    }
    let mut masks = masks_from_cohort(cohort, cfg.slices)?;
    if let Some(path) = &cfg.paths.occipital_mask {
        let occipital = read_mask(path)?;
        if occipital.dims() != cohort.dims {
            return Err(CliError::Usage(format!(
                "{}: mask grid differs from the cohort",
                path.display()
            )));
        }
        if !occipital.is_disjoint(&masks.striatum) {
            return Err(CliError::Usage(format!(
                "{}: occipital mask overlaps the striatum",
                path.display()
            )));
        }
        masks.occipital = occipital;
    }
    Ok(masks)
}

fn mask_file(region: Region) -> String {
    format!("{}.json", region.file_stem())
}

fn write_masks(dir: &Path, masks: &PipelineMasks) -> Result<Vec<String>, CliError> {
    create_dir(dir)?;
    let mut files = Vec::new();
    let all = [
        (Region::Striatum, &masks.striatum),
        (Region::Occipital, &masks.occipital),
    ]
    .into_iter()
    .chain(masks.structures.iter().map(|(r, m)| (*r, m)));
    for (region, mask) in all {
        let name = mask_file(region);
        write_mask(&dir.join(&name), mask)?;
        files.push(name);
    }
    Ok(files)
}

/// Reads masks written by [`cmd_masks`].
pub fn load_masks(dir: &Path) -> Result<PipelineMasks, CliError> {
    let read = |r: Region| read_mask(&dir.join(mask_file(r)));
    let masks = PipelineMasks {
        striatum: read(Region::Striatum)?,
        occipital: read(Region::Occipital)?,
        structures: Region::STRIATAL
            .into_iter()
            .map(|r| Ok((r, read(r)?)))
            .collect::<Result<_, rayclass_core::Error>>()?,
    };
    if !masks.striatum.is_disjoint(&masks.occipital) {
        return Err(CliError::Usage(format!(
            "{}: striatum and occipital masks overlap",
            dir.display()
        )));
    }
    Ok(masks)
}

fn dice(a: &RegionMask, b: &RegionMask) -> f64 {
    let both = a.indices().iter().filter(|&&i| b.contains(i)).count();
    2.0 * both as f64 / (a.len() + b.len()) as f64
}

/// Striatum mask from the mean HC image plus the occipital and structure masks.
pub fn cmd_masks(cfg: &PipelineConfig) -> Result<MaskSummary, CliError> {
    cfg.validate()?;
    let cohort = import_cohort(cfg.cohort_dir()?)?;
    let masks = build_masks(cfg, &cohort)?;
    let out = cfg.out_dir()?;
    let files = write_masks(out, &masks)?;
    let summary = MaskSummary {
        striatum_voxels: masks.striatum.len(),
        occipital_voxels: masks.occipital.len(),
        slices: cfg.slices,
        dice: cohort
            .regions
            .masks
            .get(&Region::Striatum)
            .map(|truth| dice(&masks.striatum, truth)),
        files,
    };
    write_json(&out.join("masks.json"), &summary)?;
    Ok(summary)
}

/// The best run of one cell, refitted, with the mask its weights live on.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BestModel {
    pub strategy: Strategy,
    pub classifier: Classifier,
    pub run: usize,
    pub lambda: f64,
    pub train_acc: f64,
    pub test_acc: f64,
    /// Feature `j` is voxel `feature_mask.indices[j]`.
    pub feature_mask: String,
    pub intercept: f64,
    pub weights: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellFiles {
    pub strategy: Strategy,
    pub classifier: Classifier,
    pub best_run: usize,
    pub runs: String,
    pub model: String,
    pub weights_volume: String,
    pub weights_csv: String,
    pub contributions: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunIndex {
    pub task: String,
    pub seed: u64,
    pub n_runs: usize,
    pub images: usize,
    pub test_mode: TestMode,
    pub weight_slices: Option<SliceRange>,
    pub config: String,
    pub masks: Vec<String>,
    pub runs: String,
    pub table_csv: String,
    pub table_text: String,
    pub cells: Vec<CellFiles>,
}

#[derive(Clone, Debug)]
pub struct RunSummary {
    pub out: PathBuf,
    pub table: SummaryTable,
    /// Cells read back from shards of an earlier, identical run.
    pub resumed: Vec<(Strategy, Classifier)>,
}

fn cell_name(s: Strategy, c: Classifier) -> String {
    format!("{}_{}", s.slug(), c.slug())
}

fn shard_complete(path: &Path, s: Strategy, c: Classifier, n_runs: usize) -> Option<Vec<RunResult>> {
    let results = read_run_results(path).ok()?;
    let complete = results.len() == n_runs
        && results
            .iter()
            .enumerate()
            .all(|(i, r)| r.run == i && r.strategy == s && r.classifier == c);
    complete.then_some(results)
}

/// Clips the configured slices to the axial extent; `None` when the range misses the grid.
fn weight_slices(cfg: &PipelineConfig, dims: [usize; 3], axis: usize) -> Option<SliceRange> {
    let [lo, hi] = cfg.weight_slices?;
    (lo <= dims[axis]).then(|| SliceRange {
        lo,
        hi: hi.min(dims[axis]),
        axis,
    })
}

fn best_run(results: &[RunResult]) -> usize {
    results
        .iter()
        .fold(None::<&RunResult>, |best, r| match best {
            Some(b) if b.test_acc >= r.test_acc => Some(b),
            _ => Some(r),
        })
        .map(|r| r.run)
        .expect("cells hold at least one run")
}

/// Featurize, evaluate every (strategy, classifier) cell, tabulate, and export the
/// weights and region contributions of each cell's best run.
pub fn cmd_run(cfg: &PipelineConfig) -> Result<RunSummary, CliError> {
    let mut cfg = cfg.clone();
    let seed = cfg.seed()?;
    cfg.validate()?;
    let out = cfg.out_dir()?.to_path_buf();
    let cohort = import_cohort(cfg.cohort_dir()?)?;
    let masks = match &cfg.paths.masks {
        Some(dir) => load_masks(dir)?,
        None => build_masks(&cfg, &cohort)?,
    };
    if masks.striatum.dims() != cohort.dims {
        return Err(CliError::Usage("mask grid differs from the cohort".into()));
    }
    let images = task_images(&cohort, cfg.task, &masks)?;

    create_dir(&out)?;
    for sub in ["runs", "models", "weights", "contributions"] {
        create_dir(&out.join(sub))?;
    }
    // shards are reused only when every setting that shapes them is unchanged
    let mut fingerprint = cfg.clone();
    fingerprint.paths.out = None;
    let config_text = serde_json::to_string_pretty(&fingerprint).expect("config serializes") + "\n";
    let config_path = out.join("config.json");
    let resumable = fs::read_to_string(&config_path).is_ok_and(|old| old == config_text);
    write_text(&config_path, &config_text)?;

    let mut mask_files = write_masks(&out.join("masks"), &masks)?
        .into_iter()
        .map(|f| format!("masks/{f}"))
        .collect::<Vec<_>>();
    let mut designs: Vec<(Strategy, DesignMatrix)> = Vec::new();
    for &s in &cfg.strategies {
        if designs.iter().any(|(t, _)| *t == s) {
            continue;
        }
        let region = rayclass_core::classifiers::feature_region(s, &masks.striatum, &masks.occipital)?;
        let file = format!("masks/features_{}.json", s.slug());
        write_mask(&out.join(&file), &region)?;
        mask_files.push(file);
        designs.push((s, images.featurize(s, &masks)?));
    }
    let mut cells: Vec<(Strategy, Classifier)> = Vec::new();
    for (s, _) in &designs {
        for &c in &cfg.classifiers {
            if !cells.contains(&(*s, c)) {
                cells.push((*s, c));
            }
        }
    }
    let design = |s: Strategy| &designs.iter().find(|(t, _)| *t == s).expect("featurized").1;

    let outcomes: Vec<(Vec<RunResult>, bool)> = cells
        .par_iter()
        .map(|&(s, c)| -> Result<_, CliError> {
            let shard = out.join("runs").join(format!("{}.csv", cell_name(s, c)));
            if resumable {
                if let Some(results) = shard_complete(&shard, s, c, cfg.protocol.n_runs) {
                    return Ok((results, true));
                }
            }
            let results: Vec<RunResult> = repeated_split_evaluate(design(s), &cfg.protocol, c)?
                .into_iter()
                .map(|o| o.result)
                .collect();
            write_run_results(&shard, &results)?;
            Ok((results, false))
        })
        .collect::<Result<_, _>>()?;

    let all: Vec<RunResult> = outcomes.iter().flat_map(|(r, _)| r.iter().cloned()).collect();
    write_run_results(&out.join("runs.csv"), &all)?;
    let mode = if cfg.paired_test {
        TestMode::Paired
    } else {
        TestMode::Welch
    };
    let table = summarize_tables(&all, mode)?;
    write_text(&out.join("table.csv"), &table.to_csv()?)?;
    write_text(&out.join("table.txt"), &table.to_text())?;

    let slices = weight_slices(&cfg, cohort.dims, images.volumes[0].axial_axis());
    let cell_files = cells
        .par_iter()
        .zip(&outcomes)
        .map(|(&(s, c), (results, _))| -> Result<CellFiles, CliError> {
            let x = design(s);
            let best = best_run(results);
            let outcome = evaluate_run(x, &cfg.protocol, c, best)?;
            let model = &outcome.model;
            let name = cell_name(s, c);
            let files = CellFiles {
                strategy: s,
                classifier: c,
                best_run: best,
                runs: format!("runs/{name}.csv"),
                model: format!("models/{name}.json"),
                weights_volume: format!("weights/{name}.vol"),
                weights_csv: format!("weights/{name}.csv"),
                contributions: format!("contributions/{name}.csv"),
            };
            let feature_mask = format!("masks/features_{}.json", s.slug());
            write_json(
                &out.join(&files.model),
                &BestModel {
                    strategy: s,
                    classifier: c,
                    run: best,
                    lambda: model.lambda,
                    train_acc: outcome.result.train_acc,
                    test_acc: outcome.result.test_acc,
                    feature_mask,
                    intercept: model.intercept,
                    weights: model.weights.clone(),
                },
            )?;
            let voxels = masks.feature_voxels(s)?;
            let (map, entries) = export_weight_map(model, &voxels, cohort.dims, cohort.spacing_mm, slices)?;
            write_weight_map(
                &out.join(&files.weights_volume),
                &map,
                &format!("weights {s} {c} run {best}"),
            )?;
            write_weight_csv(&out.join(&files.weights_csv), &entries)?;
            let report = region_contribution(model, x, &masks.structure_positions(s)?)?;
            write_contributions_csv(&out.join(&files.contributions), &report.contributions)?;
            Ok(files)
        })
        .collect::<Result<Vec<_>, _>>()?;

    let index = RunIndex {
        task: cfg.task.to_string(),
        seed,
        n_runs: cfg.protocol.n_runs,
        images: images.len(),
        test_mode: mode,
        weight_slices: slices,
        config: "config.json".into(),
        masks: mask_files,
        runs: "runs.csv".into(),
        table_csv: "table.csv".into(),
        table_text: "table.txt".into(),
        cells: cell_files,
    };
    write_json(&out.join("index.json"), &index)?;
    let resumed = cells
        .iter()
        .zip(&outcomes)
        .filter(|(_, (_, r))| *r)
        .map(|(cell, _)| *cell)
        .collect();
    Ok(RunSummary { out, table, resumed })
}

/// Runs the property battery; writes `verify_report.txt` when an output directory is set.
/// A failed property is reported through the returned report, not as an error.
pub fn cmd_verify(cfg: &PipelineConfig) -> Result<VerifyReport, CliError> {
    let mut cfg = cfg.clone();
    cfg.seed()?;
    let report = run_battery(&cfg.verify)?;
    if let Some(out) = &cfg.paths.out {
        create_dir(out)?;
        write_text(&out.join("verify_report.txt"), &report.to_text())?;
    }
    Ok(report)
}

/// Re-tabulates `runs.csv` of a finished run directory.
pub fn cmd_report(cfg: &PipelineConfig) -> Result<SummaryTable, CliError> {
    let dir = cfg.out_dir()?;
    let index: RunIndex = read_json(&dir.join("index.json"))?;
    let results = read_run_results(&dir.join(&index.runs))?;
    let mode = if cfg.paired_test {
        TestMode::Paired
    } else {
        TestMode::Welch
    };
    let table = summarize_tables(&results, mode)?;
    let stem = match mode {
        TestMode::Welch => "table",
        TestMode::Paired => "table_paired",
    };
    write_text(&dir.join(format!("{stem}.csv")), &table.to_csv()?)?;
    write_text(&dir.join(format!("{stem}.txt")), &table.to_text())?;
    Ok(table)
}
