use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::solver::{train_warm, LinearModel, SolverSettings};
use super::{Classifier, DesignMatrix, Strategy};

/// Powers of two from `2^-20` to `2^-1`.
pub fn default_lambda_grid() -> Vec<f64> {
    (1..=20).rev().map(|k| 2f64.powi(-k)).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EvalProtocol {
    pub n_runs: usize,
    pub test_fraction: f64,
    pub cv_folds: usize,
    pub lambda_grid: Vec<f64>,
    pub seed: u64,
    pub solver: SolverSettings,
}

impl Default for EvalProtocol {
    fn default() -> Self {
        EvalProtocol {
            n_runs: 100,
            test_fraction: 0.2,
            cv_folds: 10,
            lambda_grid: default_lambda_grid(),
            seed: 0,
            solver: SolverSettings::default(),
        }
    }
}

impl EvalProtocol {
    pub fn validate(&self) -> Result<()> {
        if self.n_runs == 0 {
            return Err(Error::InvalidProtocol("n_runs must be positive".into()));
        }
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return Err(Error::InvalidProtocol(format!(
                "test_fraction {} is not in (0, 1)",
                self.test_fraction
            )));
        }
        if self.cv_folds < 2 {
            return Err(Error::InvalidProtocol("cv_folds must be at least 2".into()));
        }
        if self.lambda_grid.is_empty() {
            return Err(Error::InvalidProtocol("empty lambda grid".into()));
        }
        if let Some(l) = self.lambda_grid.iter().find(|l| !(l.is_finite() && **l > 0.0)) {
            return Err(Error::InvalidProtocol(format!("lambda {l} must be positive")));
        }
        Ok(())
    }

    /// Random source for one run, independent of every other run.
    pub fn run_rng(&self, run: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(run as u64);
        rng
    }

    /// Grid sorted from largest to smallest with duplicates removed.
    fn path(&self) -> Vec<f64> {
        let mut grid = self.lambda_grid.clone();
        grid.sort_by(|a, b| b.total_cmp(a));
        grid.dedup();
        grid
    }
}

fn class_indices(labels: &[f64], indices: &[usize]) -> [Vec<usize>; 2] {
    let pos = indices.iter().copied().filter(|&i| labels[i] > 0.0).collect();
    let neg = indices.iter().copied().filter(|&i| labels[i] < 0.0).collect();
    [pos, neg]
}

/// Per class, `round(fraction * n_class)` samples go to the test set (at least one, and at
/// least one left for training). Returns sorted `(train, test)` indices.
pub fn stratified_split(labels: &[f64], test_fraction: f64, rng: &mut ChaCha8Rng) -> Result<(Vec<usize>, Vec<usize>)> {
    let all: Vec<usize> = (0..labels.len()).collect();
    let mut train = Vec::new();
    let mut test = Vec::new();
    for mut class in class_indices(labels, &all) {
        if class.len() < 2 {
            return Err(Error::InsufficientSamples(format!(
                "a class with {} samples cannot be split",
                class.len()
            )));
        }
        class.shuffle(rng);
        let n_test = ((test_fraction * class.len() as f64).round() as usize).clamp(1, class.len() - 1);
        test.extend_from_slice(&class[..n_test]);
        train.extend_from_slice(&class[n_test..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok((train, test))
}

/// Deals each class round-robin into `k` folds; returned as positions into `labels`.
pub fn stratified_folds(labels: &[f64], k: usize, rng: &mut ChaCha8Rng) -> Result<Vec<Vec<usize>>> {
    if k < 2 {
        return Err(Error::InvalidProtocol("cv_folds must be at least 2".into()));
    }
    let all: Vec<usize> = (0..labels.len()).collect();
    let mut folds = vec![Vec::new(); k];
    let mut next = 0;
    for mut class in class_indices(labels, &all) {
        class.shuffle(rng);
        for i in class {
            folds[next % k].push(i);
            next += 1;
        }
    }
    for fold in &mut folds {
        fold.sort_unstable();
        let has_pos = fold.iter().any(|&i| labels[i] > 0.0);
        let has_neg = fold.iter().any(|&i| labels[i] < 0.0);
        if !(has_pos && has_neg) {
            return Err(Error::StratificationFailed);
        }
    }
    Ok(folds)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CvPoint {
    pub lambda: f64,
    pub mean_error: f64,
    /// Sample standard deviation across folds.
    pub std_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    pub best_lambda: f64,
    /// One point per distinct grid value, largest `lambda` first.
    pub curve: Vec<CvPoint>,
}

fn error_rate(model: &LinearModel, x: &DesignMatrix) -> f64 {
    1.0 - model.accuracy(x)
}

/// Trains along `path` (largest first), warm-starting each fit from the previous one.
fn fit_path(
    x: &DesignMatrix,
    classifier: Classifier,
    path: &[f64],
    settings: &SolverSettings,
) -> Result<Vec<LinearModel>> {
    let mut weights = vec![0.0; x.cols()];
    let mut intercept = classifier.loss().intercept_only_optimum(x.labels());
    let mut models = Vec::with_capacity(path.len());
    for &lambda in path {
        let model = train_warm(x, classifier, lambda, settings, &weights, intercept)?;
        weights.clone_from(&model.weights);
        intercept = model.intercept;
        models.push(model);
    }
    Ok(models)
}

/// k-fold selection of `lambda`; ties in mean error go to the larger `lambda`.
pub fn cross_validate_lambda(
    x: &DesignMatrix,
    protocol: &EvalProtocol,
    classifier: Classifier,
    rng: &mut ChaCha8Rng,
) -> Result<CvResult> {
    protocol.validate()?;
    let path = protocol.path();
    let folds = stratified_folds(x.labels(), protocol.cv_folds, rng)?;
    let mut errors = vec![Vec::with_capacity(folds.len()); path.len()];
    for (f, fold) in folds.iter().enumerate() {
        let train_idx: Vec<usize> = folds
            .iter()
            .enumerate()
            .filter(|&(g, _)| g != f)
            .flat_map(|(_, other)| other.iter().copied())
            .collect();
        let train = x.subset(&train_idx)?;
        let valid = x.subset(fold)?;
        for (p, model) in fit_path(&train, classifier, &path, &protocol.solver)?
            .iter()
            .enumerate()
        {
            errors[p].push(error_rate(model, &valid));
        }
    }
    let curve: Vec<CvPoint> = path
        .iter()
        .zip(&errors)
        .map(|(&lambda, errs)| {
            let k = errs.len() as f64;
            let mean = errs.iter().sum::<f64>() / k;
            let var = errs.iter().map(|e| (e - mean) * (e - mean)).sum::<f64>() / (k - 1.0);
            CvPoint {
                lambda,
                mean_error: mean,
                std_error: var.sqrt(),
            }
        })
        .collect();
    let mut best = curve[0];
    for point in &curve[1..] {
        if point.mean_error < best.mean_error {
            best = *point;
        }
    }
    Ok(CvResult {
        best_lambda: best.lambda,
        curve,
    })
}

/// One row of the per-run results table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub run: usize,
    pub strategy: Strategy,
    #[serde(rename = "loss")]
    pub classifier: Classifier,
    pub lambda: f64,
    pub train_acc: f64,
    pub test_acc: f64,
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub result: RunResult,
    pub model: LinearModel,
    pub test_indices: Vec<usize>,
    pub cv: CvResult,
}

/// Split, cross-validate on the training part, refit at the chosen `lambda`, score.
pub fn evaluate_run(
    x: &DesignMatrix,
    protocol: &EvalProtocol,
    classifier: Classifier,
    run: usize,
) -> Result<RunOutcome> {
    protocol.validate()?;
    let mut rng = protocol.run_rng(run);
    let (train_idx, test_idx) = stratified_split(x.labels(), protocol.test_fraction, &mut rng)?;
    let train = x.subset(&train_idx)?;
    let test = x.subset(&test_idx)?;
    let cv = cross_validate_lambda(&train, protocol, classifier, &mut rng)?;
    let path: Vec<f64> = protocol.path().into_iter().filter(|&l| l >= cv.best_lambda).collect();
    let model = fit_path(&train, classifier, &path, &protocol.solver)?
        .pop()
        .expect("path contains the selected lambda");
    Ok(RunOutcome {
        result: RunResult {
            run,
            strategy: x.strategy(),
            classifier,
            lambda: model.lambda,
            train_acc: model.accuracy(&train),
            test_acc: model.accuracy(&test),
        },
        model,
        test_indices: test_idx,
        cv,
    })
}

/// All runs of the protocol, in run order. Runs execute on the current rayon pool.
pub fn repeated_split_evaluate(
    x: &DesignMatrix,
    protocol: &EvalProtocol,
    classifier: Classifier,
) -> Result<Vec<RunOutcome>> {
    protocol.validate()?;
    (0..protocol.n_runs)
        .into_par_iter()
        .map(|run| evaluate_run(x, protocol, classifier, run))
        .collect()
}

pub fn write_run_results(path: &Path, results: &[RunResult]) -> Result<()> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    for r in results {
        writer.serialize(r).map_err(|e| Error::format(path, e.to_string()))?;
    }
    let bytes = writer.into_inner().map_err(|e| Error::format(path, e.to_string()))?;
    crate::io::write_atomic(path, &bytes)
}

pub fn read_run_results(path: &Path) -> Result<Vec<RunResult>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(source) => Error::io(path, source),
        other => Error::format(path, format!("{other:?}")),
    })?;
    reader
        .deserialize()
        .map(|row| row.map_err(|e| Error::format(path, e.to_string())))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn labels(pos: usize, neg: usize) -> Vec<f64> {
        let mut y = vec![1.0; pos];
        y.extend(vec![-1.0; neg]);
        y
    }

    #[test]
    fn grid_has_twenty_powers_of_two() {
        let g = default_lambda_grid();
        assert_eq!(g.len(), 20);
        assert_eq!(g[0], 2f64.powi(-20));
        assert_eq!(g[19], 0.5);
    }

    #[test]
    fn ten_samples_split_one_plus_one() {
        let y = labels(5, 5);
        let (train, test) = stratified_split(&y, 0.2, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        assert_eq!(test.len(), 2);
        assert_eq!(train.len(), 8);
        assert_eq!(test.iter().filter(|&&i| y[i] > 0.0).count(), 1);
    }

    #[test]
    fn folds_partition_and_stratify() {
        let y = labels(12, 30);
        let folds = stratified_folds(&y, 10, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        let mut all: Vec<usize> = folds.concat();
        all.sort_unstable();
        assert_eq!(all, (0..42).collect::<Vec<_>>());
        assert!(folds.iter().all(|f| f.len() >= 4));
    }

    #[test]
    fn too_few_of_a_class_fails_stratification() {
        let y = labels(3, 30);
        let err = stratified_folds(&y, 10, &mut ChaCha8Rng::seed_from_u64(1)).unwrap_err();
        assert_eq!(err.to_string(), "stratification failed");
    }

    #[test]
    fn protocol_validation() {
        let mut p = EvalProtocol::default();
        assert!(p.validate().is_ok());
        p.test_fraction = 1.0;
        assert!(p.validate().is_err());
        p = EvalProtocol {
            lambda_grid: vec![0.1, -1.0],
            ..EvalProtocol::default()
        };
        assert!(p.validate().is_err());
    }

    #[test]
    fn results_round_trip_through_csv() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("runs.csv");
        let rows = vec![RunResult {
            run: 0,
            strategy: Strategy::StriatumOccipital,
            classifier: Classifier::Svm,
            lambda: 2f64.powi(-7),
            train_acc: 0.9875,
            test_acc: 0.95,
        }];
        write_run_results(&path, &rows).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("run,strategy,loss,lambda,train_acc,test_acc\n0,S+O,SVM,"));
        assert_eq!(read_run_results(&path).unwrap(), rows);
    }
}
