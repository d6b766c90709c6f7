//! Executable property battery: the geometry claims plus the invariants of each module.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::analysis::{export_weight_map, gather_weights, region_contribution, welch};
use crate::classifiers::{
    kkt_residual, train, Classifier, DesignMatrix, LinearModel, SolverSettings, StopReason, Strategy, TrainReport,
};
use crate::error::Result;
use crate::geometry::{
    self, claim3_uniqueness, claim4_battery, classification_subspace, classify_halfray, normalize,
    random_disjoint_regions, random_unit_on, sphere_project, verify_claim2, LinearBoundary,
};
use crate::masks::{otsu_threshold, Histogram};
use crate::phantom::Region;
use crate::volume::{ImageVolume, RegionMask};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VerifySettings {
    pub seed: u64,
    pub claim2_trials: usize,
    pub claim2_dims: Vec<usize>,
    pub claim4_constructions: usize,
    pub claim3_pairs: usize,
    /// Dimension used for the claim 3 and claim 4 batteries.
    pub battery_dim: usize,
    /// Random cases per invariant check.
    pub invariant_trials: usize,
    pub otsu_histograms: usize,
    pub solver_problems: usize,
    /// Noise added to every subspace normal in the claim 2 battery. Nonzero only to
    /// confirm that the battery detects a broken normal.
    pub perturb_normal: f64,
}

impl Default for VerifySettings {
    fn default() -> Self {
        VerifySettings {
            seed: 0,
            claim2_trials: 10_000,
            claim2_dims: vec![3, 50, 1000],
            claim4_constructions: 100,
            claim3_pairs: 1000,
            battery_dim: 40,
            invariant_trials: 1000,
            otsu_histograms: 200,
            solver_problems: 10,
            perturb_normal: 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }

    fn push(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check {
            name: name.into(),
            passed,
            detail: detail.into(),
        });
    }

    pub fn to_text(&self) -> String {
        let width = self.checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
        let mut out = String::new();
        for c in &self.checks {
            let status = if c.passed { "PASS" } else { "FAIL" };
            let _ = writeln!(out, "{status}  {:<width$}  {}", c.name, c.detail);
        }
        let failed = self.failures().count();
        let _ = writeln!(out, "{} checks, {failed} failed", self.checks.len());
        out
    }
}

/// Runs every check. Each check draws from its own stream of `settings.seed`.
pub fn run_battery(settings: &VerifySettings) -> Result<VerifyReport> {
    let mut report = VerifyReport::default();
    let rng = |stream: u64| {
        let mut r = ChaCha8Rng::seed_from_u64(settings.seed);
        r.set_stream(stream);
        r
    };

    for &d in &settings.claim2_dims {
        let r = verify_claim2(settings.claim2_trials, d, settings.seed, settings.perturb_normal)?;
        report.push(
            format!("claim2 d={d}"),
            r.passed(),
            format!(
                "{} agree, {} disagree, {} excluded of {} trials",
                r.agreements, r.disagreements, r.excluded, r.trials
            ),
        );
    }

    let c4 = claim4_battery(settings.claim4_constructions, settings.battery_dim, settings.seed)?;
    report.push(
        "claim4",
        c4.passed(),
        format!(
            "{} cases, {} failures, max |cos| among distinct {:.12}",
            c4.cases, c4.failures, c4.max_abs_cosine_distinct
        ),
    );
    let c3 = claim3_uniqueness(settings.claim3_pairs, settings.battery_dim, settings.seed)?;
    report.push(
        "claim3",
        c3.passed(),
        format!(
            "{} pairs, {} parallel, max |cos| {:.12}",
            c3.cases, c3.failures, c3.max_abs_cosine_distinct
        ),
    );

    check_normalization(&mut report, settings.invariant_trials, &mut rng(1))?;
    check_sphere(&mut report, settings.invariant_trials, &mut rng(2))?;
    check_scale_invariance(&mut report, settings.invariant_trials, &mut rng(3))?;
    check_otsu(&mut report, settings.otsu_histograms, &mut rng(4))?;
    check_solver(&mut report, settings.solver_problems, &mut rng(5))?;
    check_analysis(&mut report, settings.invariant_trials, &mut rng(6))?;
    Ok(report)
}

fn random_image(d: usize, rng: &mut ChaCha8Rng) -> ImageVolume {
    loop {
        let data: Vec<f64> = (0..d).map(|_| rng.gen::<f64>() * 10.0).collect();
        if let Ok(v) = ImageVolume::from_vec(data) {
            return v;
        }
    }
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    rng.gen_range(lo.ln()..=hi.ln()).exp()
}

fn check_normalization(report: &mut VerifyReport, trials: usize, rng: &mut ChaCha8Rng) -> Result<()> {
    let (mut slice_err, mut scale_err): (f64, f64) = (0.0, 0.0);
    for _ in 0..trials {
        let d = rng.gen_range(3..=60);
        let (n_idx, _) = random_disjoint_regions(d, rng);
        let region = RegionMask::new([d, 1, 1], n_idx)?;
        let image = random_image(d, rng);
        let a = normalize(&image, &region)?;
        let b = normalize(&image.scaled(log_uniform(rng, 1e-3, 1e3))?, &region)?;
        slice_err = slice_err.max((a.mean_over(&region) - 1.0).abs());
        for (x, y) in a.data().iter().zip(b.data()) {
            scale_err = scale_err.max((x - y).abs());
        }
    }
    report.push(
        "normalize on affine slice",
        slice_err < geometry::IDENTITY_TOL,
        format!("max |1_N.I~ - 1| = {slice_err:.3e}"),
    );
    report.push(
        "normalize scale invariance",
        scale_err < geometry::IDENTITY_TOL,
        format!("max elementwise difference {scale_err:.3e}"),
    );
    Ok(())
}

fn check_sphere(report: &mut VerifyReport, trials: usize, rng: &mut ChaCha8Rng) -> Result<()> {
    let (mut radius_err, mut idem_err, mut scale_err): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for _ in 0..trials {
        let d = rng.gen_range(2..=200);
        let x: Vec<f64> = (0..d).map(|_| rng.gen_range(-5.0..5.0)).collect();
        let mask = RegionMask::full([d, 1, 1])?;
        let p = sphere_project(&x, &mask)?;
        let radius = (d as f64).sqrt();
        let length = p.iter().map(|v| v * v).sum::<f64>().sqrt();
        radius_err = radius_err.max((length - radius).abs() / radius);
        let again = sphere_project(&p, &mask)?;
        let alpha = log_uniform(rng, 1e-3, 1e3);
        let scaled: Vec<f64> = x.iter().map(|v| v * alpha).collect();
        let ps = sphere_project(&scaled, &mask)?;
        for i in 0..d {
            idem_err = idem_err.max((again[i] - p[i]).abs());
            scale_err = scale_err.max((ps[i] - p[i]).abs());
        }
    }
    report.push(
        "sphere radius",
        radius_err < 1e-8,
        format!("max relative radius error {radius_err:.3e}"),
    );
    report.push(
        "sphere projection idempotent",
        idem_err < geometry::IDENTITY_TOL,
        format!("max difference {idem_err:.3e}"),
    );
    report.push(
        "sphere projection scale invariance",
        scale_err < geometry::IDENTITY_TOL,
        format!("max difference {scale_err:.3e}"),
    );
    Ok(())
}

fn check_scale_invariance(report: &mut VerifyReport, trials: usize, rng: &mut ChaCha8Rng) -> Result<()> {
    let mut flips = 0;
    for _ in 0..trials {
        let d = rng.gen_range(3..=60);
        let dims = [d, 1, 1];
        let (n_idx, c_idx) = random_disjoint_regions(d, rng);
        let region_c = RegionMask::new(dims, c_idx)?;
        let w = random_unit_on(region_c.indices(), d, rng);
        let boundary = LinearBoundary::new(w, rng.gen_range(-2.0..2.0), region_c, RegionMask::new(dims, n_idx)?)?;
        let subspace = classification_subspace(&boundary);
        let image = random_image(d, rng);
        let base = classify_halfray(&image, &subspace).label;
        let scaled = classify_halfray(&image.scaled(log_uniform(rng, 1e-3, 1e3))?, &subspace).label;
        if base != scaled {
            flips += 1;
        }
    }
    report.push(
        "half-ray label scale invariance",
        flips == 0,
        format!("{flips} label changes in {trials} rescalings"),
    );
    Ok(())
}

/// Recomputes the between-class variance from scratch for every edge.
fn otsu_brute_force(h: &Histogram) -> f64 {
    let edges = h.bin_edges();
    let counts = h.counts();
    let centre = |k: usize| 0.5 * (edges[k] + edges[k + 1]);
    let class = |range: std::ops::Range<usize>| {
        let n: f64 = range.clone().map(|k| counts[k] as f64).sum();
        let s: f64 = range.map(|k| counts[k] as f64 * centre(k)).sum();
        (n, if n > 0.0 { s / n } else { 0.0 })
    };
    let total: f64 = counts.iter().map(|&c| c as f64).sum();
    let scores: Vec<f64> = (1..counts.len())
        .map(|k| {
            let (n0, m0) = class(0..k);
            let (n1, m1) = class(k..counts.len());
            (n0 / total) * (n1 / total) * (m0 - m1) * (m0 - m1)
        })
        .collect();
    let best = scores.iter().copied().fold(0.0, f64::max);
    let k = scores.iter().position(|&s| s >= best - 1e-12 * best).unwrap_or(0);
    edges[k + 1]
}

fn check_otsu(report: &mut VerifyReport, histograms: usize, rng: &mut ChaCha8Rng) -> Result<()> {
    let mut mismatches = 0;
    let mut tested = 0;
    for _ in 0..histograms {
        let bins = rng.gen_range(2..=64);
        let lo = rng.gen_range(-10.0..10.0);
        let width = rng.gen_range(0.01..5.0);
        let edges: Vec<f64> = (0..=bins).map(|k| lo + width * k as f64).collect();
        let counts: Vec<u64> = (0..bins)
            .map(|_| if rng.gen_bool(0.3) { 0 } else { rng.gen_range(0..1000) })
            .collect();
        // fewer than two occupied bins has no threshold
        let Ok(h) = Histogram::new(edges, counts) else { continue };
        let Ok(t) = otsu_threshold(&h) else { continue };
        tested += 1;
        if t != otsu_brute_force(&h) {
            mismatches += 1;
        }
    }
    report.push(
        "otsu matches exhaustive search",
        mismatches == 0 && tested > 0,
        format!("{mismatches} mismatches in {tested} histograms"),
    );
    Ok(())
}

fn random_problem(rng: &mut ChaCha8Rng) -> Result<DesignMatrix> {
    let n = rng.gen_range(8..=30);
    let d = rng.gen_range(2..=15);
    let mut labels: Vec<f64> = (0..n).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
    labels.rotate_left(rng.gen_range(0..n));
    let data = (0..n * d).map(|_| rng.gen_range(-2.0..2.0)).collect();
    DesignMatrix::from_flat(n, d, data, labels, Strategy::Striatum)
}

fn check_solver(report: &mut VerifyReport, problems: usize, rng: &mut ChaCha8Rng) -> Result<()> {
    let settings = SolverSettings::default();
    let (mut worst_kkt, mut worst_grad): (f64, f64) = (0.0, 0.0);
    for _ in 0..problems {
        let x = random_problem(rng)?;
        for classifier in Classifier::ALL {
            let loss = classifier.loss();
            let lambda = log_uniform(rng, 1e-3, 1e-1);
            let model = train(&x, classifier, lambda, &settings)?;
            let (gw, gb) = loss.gradient(&x, &model.weights, model.intercept);
            worst_kkt = worst_kkt.max(kkt_residual(&gw, gb, &model.weights, lambda));

            let w: Vec<f64> = (0..x.cols()).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let b = rng.gen_range(-1.0..1.0);
            let (gw, _) = loss.gradient(&x, &w, b);
            for j in 0..w.len() {
                let h = 1e-6 * (1.0 + w[j].abs());
                let mut up = w.clone();
                up[j] += h;
                let mut down = w.clone();
                down[j] -= h;
                let fd = (loss.data_term(&x, &up, b) - loss.data_term(&x, &down, b)) / (2.0 * h);
                worst_grad = worst_grad.max((fd - gw[j]).abs() / (1.0 + gw[j].abs()));
            }
        }
    }
    report.push(
        "solver KKT residual",
        worst_kkt < settings.kkt_tolerance,
        format!("max residual {worst_kkt:.3e} over {} fits", 2 * problems),
    );
    report.push(
        "gradient matches finite differences",
        worst_grad < 1e-6,
        format!("max relative error {worst_grad:.3e}"),
    );
    Ok(())
}

fn fixed_model(weights: Vec<f64>) -> LinearModel {
    LinearModel {
        strategy: Strategy::Striatum,
        classifier: Classifier::Logistic,
        lambda: 0.0,
        intercept: 0.0,
        weights,
        report: TrainReport {
            iterations: 0,
            evaluations: 0,
            kkt_residual: 0.0,
            objective: 0.0,
            stop: StopReason::Kkt,
            trace: Vec::new(),
        },
    }
}

fn check_analysis(report: &mut VerifyReport, trials: usize, rng: &mut ChaCha8Rng) -> Result<()> {
    let mut asymmetry: f64 = 0.0;
    for _ in 0..trials {
        let a: Vec<f64> = (0..rng.gen_range(2..20)).map(|_| rng.gen::<f64>()).collect();
        let b: Vec<f64> = (0..rng.gen_range(2..20)).map(|_| rng.gen::<f64>()).collect();
        let ab = welch(&a, &b)?;
        let ba = welch(&b, &a)?;
        asymmetry = asymmetry.max((ab.t + ba.t).abs()).max((ab.p - ba.p).abs());
    }
    report.push(
        "welch symmetric",
        asymmetry < 1e-12,
        format!("max |t + t'|, |p - p'| = {asymmetry:.3e}"),
    );

    let mut lossy = 0;
    let mut additivity: f64 = 0.0;
    for _ in 0..trials.min(200) {
        let side = rng.gen_range(2..8);
        let dims = [side, side, side];
        let voxels = side * side * side;
        let d = rng.gen_range(4..=voxels.min(40));
        let mut pool: Vec<usize> = (0..voxels).collect();
        rand::seq::SliceRandom::shuffle(pool.as_mut_slice(), rng);
        let feature_to_voxel = pool[..d].to_vec();
        let weights: Vec<f64> = (0..d)
            .map(|_| {
                if rng.gen_bool(0.3) {
                    rng.gen_range(-1.0..1.0)
                } else {
                    0.0
                }
            })
            .collect();
        let model = fixed_model(weights);
        let (map, _) = export_weight_map(&model, &feature_to_voxel, dims, [1.0; 3], None)?;
        if gather_weights(&map, &feature_to_voxel) != model.weights {
            lossy += 1;
        }

        let n = 6;
        let labels = vec![1.0, -1.0, 1.0, -1.0, 1.0, -1.0];
        let data = (0..n * d).map(|_| rng.gen_range(0.0..3.0)).collect();
        let x = DesignMatrix::from_flat(n, d, data, labels, Strategy::Striatum)?;
        let quarter = d / 4;
        let regions: Vec<(Region, Vec<usize>)> = Region::STRIATAL
            .into_iter()
            .enumerate()
            .map(|(k, r)| (r, (k * quarter..(k + 1) * quarter).collect()))
            .collect();
        additivity = additivity.max(region_contribution(&model, &x, &regions)?.additivity_error);
    }
    report.push(
        "weight map scatter/gather lossless",
        lossy == 0,
        format!("{lossy} lossy round trips"),
    );
    report.push(
        "region contributions additive",
        additivity < geometry::IDENTITY_TOL,
        format!("max additivity error {additivity:.3e}"),
    );
    Ok(())
}
