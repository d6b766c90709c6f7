use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayclass_core::analysis::region_contribution;
use rayclass_core::classifiers::{evaluate_run, train, Classifier, EvalProtocol, SolverSettings, Strategy};
use rayclass_core::geometry::{normalize, sphere_project};
use rayclass_core::masks::{build_striatum_mask, DEFAULT_OTSU_BINS};
use rayclass_core::phantom::{
    export_cohort, generate_cohort, import_cohort, Cohort, DeficitFactors, PhantomSpec, Region, SidePolicy,
};
use rayclass_core::pipeline::{masks_from_cohort, task_images, Task};
use rayclass_oracles::dice;

fn rescaled(cohort: &Cohort, seed: u64) -> Cohort {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = cohort.clone();
    for scan in &mut out.scans {
        let alpha = rng.gen_range(0.1f64.ln()..=10f64.ln()).exp();
        scan.volume = scan.volume.scaled(alpha).unwrap();
        scan.scale *= alpha;
    }
    out
}

#[test]
fn striatum_mask_matches_ground_truth() {
    let noiseless = PhantomSpec {
        noise: 0.0,
        subject_variability: 0.0,
        striatal_variability: 0.0,
        ..PhantomSpec::default()
    };
    for (spec, floor) in [(noiseless, 1.0), (PhantomSpec::default(), 0.95)] {
        let cohort = generate_cohort(&spec, 40, 60, false).unwrap();
        let mask = build_striatum_mask(&cohort.mean_hc().unwrap(), DEFAULT_OTSU_BINS).unwrap();
        let truth = cohort.regions.get(Region::Striatum);
        let overlap = dice(mask.mask.indices(), truth.indices());
        assert!(overlap >= floor, "Dice {overlap} below {floor}");
    }
}

#[test]
fn rescaling_images_changes_nothing_downstream() {
    let cohort = generate_cohort(&PhantomSpec::default(), 12, 18, false).unwrap();
    let scaled = rescaled(&cohort, 3);
    let masks = masks_from_cohort(&cohort, None).unwrap();
    let a = task_images(&cohort, Task::HcVsPd, &masks).unwrap();
    let b = task_images(&scaled, Task::HcVsPd, &masks).unwrap();
    assert_eq!(a.flipped, b.flipped);
    let protocol = EvalProtocol {
        n_runs: 2,
        cv_folds: 5,
        ..EvalProtocol::default()
    };
    for strategy in Strategy::ALL {
        let xa = a.featurize(strategy, &masks).unwrap();
        let xb = b.featurize(strategy, &masks).unwrap();
        let row_gap = xa
            .data()
            .iter()
            .zip(xb.data())
            .map(|(p, q)| (p - q).abs())
            .fold(0.0, f64::max);
        assert!(row_gap < 1e-8, "{strategy}: feature gap {row_gap:e}");
        for classifier in Classifier::ALL {
            let ma = train(&xa, classifier, 2f64.powi(-6), &SolverSettings::default()).unwrap();
            let mb = train(&xb, classifier, 2f64.powi(-6), &SolverSettings::default()).unwrap();
            let w_gap = ma
                .weights
                .iter()
                .zip(&mb.weights)
                .map(|(p, q)| (p - q).abs())
                .fold(0.0, f64::max);
            assert!(w_gap < 1e-8, "{strategy} {classifier}: weight gap {w_gap:e}");
            for run in 0..protocol.n_runs {
                let ra = evaluate_run(&xa, &protocol, classifier, run).unwrap().result;
                let rb = evaluate_run(&xb, &protocol, classifier, run).unwrap().result;
                assert_eq!(ra.lambda, rb.lambda);
                assert!((ra.test_acc - rb.test_acc).abs() < 1e-8);
                assert!((ra.train_acc - rb.train_acc).abs() < 1e-8);
            }
        }
    }
}

#[test]
fn exports_differing_only_in_scale_agree() {
    // powers of two scale f32 voxel values exactly, so the files differ only by the factor
    let at = |alpha: f64| {
        let spec = PhantomSpec {
            scale_range: [alpha, alpha],
            ..PhantomSpec::default()
        };
        let dir = tempfile::tempdir().unwrap();
        export_cohort(&generate_cohort(&spec, 2, 2, false).unwrap(), dir.path()).unwrap();
        import_cohort(dir.path()).unwrap()
    };
    let (small, large) = (at(0.25), at(8.0));
    let striatum = small.regions.get(Region::Striatum);
    let occipital = small.regions.get(Region::Occipital);
    for (p, q) in small.scans.iter().zip(&large.scans) {
        let sp = sphere_project(p.volume.data(), striatum).unwrap();
        let sq = sphere_project(q.volume.data(), striatum).unwrap();
        assert!(sp.iter().zip(&sq).all(|(a, b)| (a - b).abs() < 1e-8));
        let np = normalize(&p.volume, occipital).unwrap();
        let nq = normalize(&q.volume, occipital).unwrap();
        assert!(np.data().iter().zip(nq.data()).all(|(a, b)| (a - b).abs() < 1e-8));
    }
}

#[test]
fn noiseless_phantom_is_separable() {
    let spec = PhantomSpec {
        noise: 0.0,
        subject_variability: 0.0,
        striatal_variability: 0.0,
        unaffected_fraction: 0.0,
        ..PhantomSpec::default()
    };
    let cohort = generate_cohort(&spec, 10, 10, false).unwrap();
    let masks = masks_from_cohort(&cohort, None).unwrap();
    let images = task_images(&cohort, Task::HcVsPd, &masks).unwrap();
    let protocol = EvalProtocol {
        n_runs: 1,
        cv_folds: 4,
        ..EvalProtocol::default()
    };
    for strategy in Strategy::ALL {
        let x = images.featurize(strategy, &masks).unwrap();
        for classifier in Classifier::ALL {
            let outcome = evaluate_run(&x, &protocol, classifier, 0).unwrap();
            assert_eq!(outcome.result.test_acc, 1.0, "{strategy} {classifier}");
        }
    }
}

#[test]
fn right_putamen_deficit_dominates_contributions() {
    let spec = PhantomSpec {
        affected_side: SidePolicy::Right,
        baseline: DeficitFactors {
            affected_putamen: 0.45,
            other_putamen: 0.95,
            affected_caudate: 0.95,
            other_caudate: 1.0,
        },
        ..PhantomSpec::default()
    };
    let cohort = generate_cohort(&spec, 20, 30, false).unwrap();
    let masks = masks_from_cohort(&cohort, None).unwrap();
    let images = task_images(&cohort, Task::HcVsPd, &masks).unwrap();
    let x = images.featurize(Strategy::Striatum, &masks).unwrap();
    let regions = masks.structure_positions(Strategy::Striatum).unwrap();
    let protocol = EvalProtocol {
        n_runs: 5,
        ..EvalProtocol::default()
    };
    for run in 0..protocol.n_runs {
        let outcome = evaluate_run(&x, &protocol, Classifier::Logistic, run).unwrap();
        let report = region_contribution(&outcome.model, &x, &regions).unwrap();
        assert!(report.additivity_error < 1e-10);
        assert_eq!(report.dominant(), Some(Region::RightPutamen), "run {run}: {report:?}");
    }
}
