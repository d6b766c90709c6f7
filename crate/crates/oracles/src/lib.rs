//! Reference implementations that the test suites compare the library against.
//!
//! Nothing here shares code with `rayclass-core`. Each routine is written the
//! slow, obvious way so that agreement with the optimized path means something.

mod welch_cases;

/// Welch t-test reference values computed at 50 digits by `scripts/welch_oracle.py`.
pub use welch_cases::WELCH_CASES;

/// Smooth data terms supported by the coordinate-descent oracle.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OracleLoss {
    Logistic,
    SquaredHinge,
}

impl OracleLoss {
    fn value(self, margin: f64) -> f64 {
        match self {
            OracleLoss::Logistic => {
                if margin > 0.0 {
                    (-margin).exp().ln_1p()
                } else {
                    -margin + margin.exp().ln_1p()
                }
            }
            OracleLoss::SquaredHinge => {
                let s = (1.0 - margin).max(0.0);
                s * s
            }
        }
    }

    /// d loss / d margin
    fn slope(self, margin: f64) -> f64 {
        match self {
            OracleLoss::Logistic => -1.0 / (1.0 + margin.exp()),
            OracleLoss::SquaredHinge => -2.0 * (1.0 - margin).max(0.0),
        }
    }
}

/// Objective `(1/n) sum loss(y_i (w.x_i + b)) + lambda ||w||_1`.
pub fn objective(
    rows: &[Vec<f64>],
    labels: &[f64],
    weights: &[f64],
    intercept: f64,
    lambda: f64,
    loss: OracleLoss,
) -> f64 {
    let n = rows.len() as f64;
    let data: f64 = rows
        .iter()
        .zip(labels)
        .map(|(row, &y)| {
            let z: f64 = row.iter().zip(weights).map(|(a, b)| a * b).sum::<f64>() + intercept;
            loss.value(y * z)
        })
        .sum::<f64>()
        / n;
    data + lambda * weights.iter().map(|w| w.abs()).sum::<f64>()
}

/// Cyclic coordinate descent with exact one-dimensional minimization.
///
/// Each coordinate subproblem is convex in one variable, so its subgradient is
/// monotone and the minimizer is found by bisection. Returns `(weights, intercept)`.
pub fn coordinate_descent(rows: &[Vec<f64>], labels: &[f64], lambda: f64, loss: OracleLoss) -> (Vec<f64>, f64) {
    let n = rows.len();
    let d = rows.first().map_or(0, |r| r.len());
    let mut w = vec![0.0; d];
    let mut b = 0.0;
    // margins m_i = y_i (w.x_i + b), kept in sync with every coordinate move
    let mut margins = vec![0.0; n];

    let deriv = |margins: &[f64], col: &dyn Fn(usize) -> f64, shift: f64| -> f64 {
        let mut acc = 0.0;
        for i in 0..n {
            let c = col(i);
            acc += loss.slope(margins[i] + shift * c) * c;
        }
        acc / n as f64
    };

    for _sweep in 0..20_000 {
        let mut biggest_move: f64 = 0.0;

        // intercept: root of the smooth derivative
        {
            let col = |i: usize| labels[i];
            let t = bisect_root(|t| deriv(&margins, &col, t));
            for i in 0..n {
                margins[i] += t * labels[i];
            }
            b += t;
            biggest_move = biggest_move.max(t.abs());
        }

        for j in 0..d {
            let col = |i: usize| labels[i] * rows[i][j];
            let current = w[j];
            // derivative of the smooth part as a function of the new value z
            let smooth = |z: f64| deriv(&margins, &col, z - current);
            let g0 = smooth(0.0);
            let target = if g0.abs() <= lambda {
                0.0
            } else if g0 > lambda {
                // minimizer is negative: solve smooth(z) - lambda = 0 on z < 0
                bisect_root_in(|z| smooth(z) - lambda, None, Some(0.0))
            } else {
                bisect_root_in(|z| smooth(z) + lambda, Some(0.0), None)
            };
            let step = target - current;
            if step != 0.0 {
                for i in 0..n {
                    margins[i] += step * col(i);
                }
                w[j] = target;
            }
            biggest_move = biggest_move.max(step.abs());
        }

        if biggest_move < 1e-13 {
            break;
        }
    }
    (w, b)
}

fn bisect_root(f: impl Fn(f64) -> f64) -> f64 {
    bisect_root_in(f, None, None)
}

/// Root of a non-decreasing function, optionally confined to `[lo, hi]`.
fn bisect_root_in(f: impl Fn(f64) -> f64, lo: Option<f64>, hi: Option<f64>) -> f64 {
    let mut a = lo.unwrap_or(-1.0);
    let mut b = hi.unwrap_or(1.0);
    if lo.is_none() {
        while f(a) > 0.0 {
            a *= 2.0;
            if a < -1e12 {
                break;
            }
        }
    }
    if hi.is_none() {
        while f(b) < 0.0 {
            b *= 2.0;
            if b > 1e12 {
                break;
            }
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        if mid == a || mid == b {
            break;
        }
        if f(mid) < 0.0 {
            a = mid;
        } else {
            b = mid;
        }
    }
    0.5 * (a + b)
}

/// Exhaustive Otsu search. Class values are bin centres; every interior edge
/// is tried and the between-class variance is recomputed from scratch.
/// Returns the lowest edge whose variance is within `1e-12` (relative) of the best.
pub fn otsu_exhaustive(edges: &[f64], counts: &[u64]) -> Option<f64> {
    let nbins = counts.len();
    let centre = |k: usize| 0.5 * (edges[k] + edges[k + 1]);
    let total: f64 = counts.iter().map(|&c| c as f64).sum();
    let mut scores = Vec::with_capacity(nbins.saturating_sub(1));
    for split in 1..nbins {
        let (mut n0, mut s0, mut n1, mut s1) = (0.0, 0.0, 0.0, 0.0);
        for (k, &c) in counts.iter().enumerate() {
            let c = c as f64;
            if k < split {
                n0 += c;
                s0 += c * centre(k);
            } else {
                n1 += c;
                s1 += c * centre(k);
            }
        }
        let score = if n0 == 0.0 || n1 == 0.0 {
            0.0
        } else {
            let (w0, w1) = (n0 / total, n1 / total);
            let diff = s0 / n0 - s1 / n1;
            w0 * w1 * diff * diff
        };
        scores.push(score);
    }
    let best = scores.iter().cloned().fold(0.0_f64, f64::max);
    if best <= 0.0 {
        return None;
    }
    scores
        .iter()
        .position(|&s| s >= best - 1e-12 * best)
        .map(|k| edges[k + 1])
}

/// Central finite-difference gradient with a relative step.
pub fn central_difference(f: impl Fn(&[f64]) -> f64, x: &[f64]) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|j| {
            let h = 1e-6 * x[j].abs().max(1.0);
            probe[j] = x[j] + h;
            let up = f(&probe);
            probe[j] = x[j] - h;
            let down = f(&probe);
            probe[j] = x[j];
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// Dice overlap of two index sets.
pub fn dice(a: &[usize], b: &[usize]) -> f64 {
    let set: std::collections::HashSet<_> = a.iter().collect();
    let common = b.iter().filter(|i| set.contains(i)).count();
    2.0 * common as f64 / (a.len() + b.len()) as f64
}
