use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayclass_core::classifiers::{
    kkt_residual, lambda_max, train, Classifier, DesignMatrix, Loss, SolverSettings, Strategy,
};
use rayclass_oracles::{central_difference, coordinate_descent, objective, OracleLoss};

fn oracle_loss(c: Classifier) -> OracleLoss {
    match c.loss() {
        Loss::Logistic => OracleLoss::Logistic,
        Loss::SquaredHinge => OracleLoss::SquaredHinge,
    }
}

struct Problem {
    rows: Vec<Vec<f64>>,
    labels: Vec<f64>,
    x: DesignMatrix,
}

fn problem(rng: &mut ChaCha8Rng) -> Problem {
    let n = rng.gen_range(6..=30);
    let d = rng.gen_range(1..=15);
    let truth: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..d).map(|_| rng.gen_range(-2.0..2.0)).collect())
        .collect();
    let mut labels: Vec<f64> = rows
        .iter()
        .map(|r| {
            let z: f64 = r.iter().zip(&truth).map(|(a, b)| a * b).sum::<f64>() + rng.gen_range(-0.5..0.5);
            if z >= 0.0 {
                1.0
            } else {
                -1.0
            }
        })
        .collect();
    // both classes present
    labels[0] = 1.0;
    labels[1] = -1.0;
    let x = DesignMatrix::new(rows.clone(), labels.clone(), Strategy::Striatum).unwrap();
    Problem { rows, labels, x }
}

#[test]
fn matches_coordinate_descent_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    // A 1e-5 KKT stop can leave objective gaps well above 1e-6 relative on nearly
    // separable problems at small lambda, so the objective comparison asks for a tighter
    // stop and the iterations it takes.
    let settings = SolverSettings {
        kkt_tolerance: 1e-7,
        max_iterations: 50_000,
        ..SolverSettings::default()
    };
    for case in 0..50 {
        let p = problem(&mut rng);
        for classifier in Classifier::ALL {
            let top = lambda_max(&p.x, classifier.loss());
            let lambda = top * 10f64.powf(rng.gen_range(-3.0..0.0));
            let model = train(&p.x, classifier, lambda, &settings).unwrap();
            let ours = objective(
                &p.rows,
                &p.labels,
                &model.weights,
                model.intercept,
                lambda,
                oracle_loss(classifier),
            );
            let (w, b) = coordinate_descent(&p.rows, &p.labels, lambda, oracle_loss(classifier));
            let reference = objective(&p.rows, &p.labels, &w, b, lambda, oracle_loss(classifier));
            let rel = (ours - reference).abs() / reference.abs();
            assert!(
                rel < 1e-6,
                "case {case} {classifier}: objective {ours} vs oracle {reference} (rel {rel:e})"
            );
            let (gw, gb) = classifier.loss().gradient(&p.x, &model.weights, model.intercept);
            let kkt = kkt_residual(&gw, gb, &model.weights, lambda);
            assert!(kkt < 1e-5, "case {case} {classifier}: KKT {kkt:e}");
        }
    }
}

#[test]
fn default_stop_meets_kkt_tolerance() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let settings = SolverSettings::default();
    for _ in 0..50 {
        let p = problem(&mut rng);
        for classifier in Classifier::ALL {
            let lambda = lambda_max(&p.x, classifier.loss()) * 10f64.powf(rng.gen_range(-3.0..0.0));
            let model = train(&p.x, classifier, lambda, &settings).unwrap();
            let (gw, gb) = classifier.loss().gradient(&p.x, &model.weights, model.intercept);
            assert!(kkt_residual(&gw, gb, &model.weights, lambda) < settings.kkt_tolerance);
        }
    }
}

#[test]
fn gradient_matches_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..50 {
        let p = problem(&mut rng);
        let d = p.x.cols();
        for classifier in Classifier::ALL {
            let loss = classifier.loss();
            let point: Vec<f64> = (0..=d).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let (gw, gb) = loss.gradient(&p.x, &point[..d], point[d]);
            let f = |v: &[f64]| loss.data_term(&p.x, &v[..d], v[d]);
            let fd = central_difference(f, &point);
            for (j, g) in gw.iter().chain(std::iter::once(&gb)).enumerate() {
                let rel = (g - fd[j]).abs() / g.abs().max(1e-3);
                assert!(rel < 1e-6, "{classifier} coordinate {j}: {g} vs {}", fd[j]);
            }
        }
    }
}

#[test]
fn memory_one_trace_is_monotone() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let settings = SolverSettings {
        memory: 1,
        record_trace: true,
        ..SolverSettings::default()
    };
    for _ in 0..20 {
        let p = problem(&mut rng);
        for classifier in Classifier::ALL {
            let lambda = 0.05 * lambda_max(&p.x, classifier.loss());
            let model = train(&p.x, classifier, lambda, &settings).unwrap();
            for pair in model.report.trace.windows(2) {
                assert!(pair[1].0 <= pair[0].0, "objective rose: {:?}", pair);
            }
        }
    }
}

#[test]
fn support_shrinks_as_lambda_grows() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    let settings = SolverSettings::default();
    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for i in 0..60 {
        let y = if i % 2 == 0 { 1.0 } else { -1.0 };
        let row: Vec<f64> = (0..12)
            .map(|j| rng.gen_range(-1.0..1.0) + if j < 3 { 0.8 * y } else { 0.0 })
            .collect();
        rows.push(row);
        labels.push(y);
    }
    let x = DesignMatrix::new(rows, labels, Strategy::Striatum).unwrap();
    for classifier in Classifier::ALL {
        let top = lambda_max(&x, classifier.loss());
        let counts: Vec<usize> = [0.9, 0.5, 0.2, 0.05]
            .iter()
            .map(|f| train(&x, classifier, f * top, &settings).unwrap().nonzeros())
            .collect();
        assert!(counts.windows(2).all(|c| c[0] <= c[1]), "{classifier}: {counts:?}");
        assert_eq!(train(&x, classifier, top, &settings).unwrap().nonzeros(), 0);
    }
}
