use serde::{Deserialize, Serialize};

use super::DesignMatrix;

/// Smooth per-sample loss of the margin `m = y (w.x + b)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Loss {
    /// `log(1 + exp(-m))`
    Logistic,
    /// `max(0, 1 - m)^2`
    SquaredHinge,
}

impl Loss {
    #[inline]
    pub fn value(self, margin: f64) -> f64 {
        match self {
            Loss::Logistic => {
                if margin > 0.0 {
                    (-margin).exp().ln_1p()
                } else {
                    -margin + margin.exp().ln_1p()
                }
            }
            Loss::SquaredHinge => {
                let slack = 1.0 - margin;
                if slack > 0.0 {
                    slack * slack
                } else {
                    0.0
                }
            }
        }
    }

    /// Derivative with respect to the margin.
    #[inline]
    pub fn slope(self, margin: f64) -> f64 {
        match self {
            Loss::Logistic => -1.0 / (1.0 + margin.exp()),
            Loss::SquaredHinge => {
                let slack = 1.0 - margin;
                if slack > 0.0 {
                    -2.0 * slack
                } else {
                    0.0
                }
            }
        }
    }

    /// Intercept minimizing the data term when every weight is zero.
    pub fn intercept_only_optimum(self, labels: &[f64]) -> f64 {
        let pos = labels.iter().filter(|&&y| y > 0.0).count() as f64;
        let neg = labels.len() as f64 - pos;
        match self {
            Loss::Logistic => (pos / neg).ln(),
            Loss::SquaredHinge => (pos - neg) / (pos + neg),
        }
    }

    /// Mean data term `(1/n) sum loss(y_i (w.x_i + b))`.
    pub fn data_term(self, x: &DesignMatrix, weights: &[f64], intercept: f64) -> f64 {
        let total: f64 = (0..x.rows())
            .map(|i| {
                let z: f64 = x.row(i).iter().zip(weights).map(|(a, w)| a * w).sum::<f64>() + intercept;
                self.value(x.labels()[i] * z)
            })
            .sum();
        total / x.rows() as f64
    }

    /// Full objective including `lambda ||w||_1`.
    pub fn objective(self, x: &DesignMatrix, weights: &[f64], intercept: f64, lambda: f64) -> f64 {
        self.data_term(x, weights, intercept) + lambda * weights.iter().map(|w| w.abs()).sum::<f64>()
    }

    /// Gradient of the data term: `(d/dw, d/db)`.
    pub fn gradient(self, x: &DesignMatrix, weights: &[f64], intercept: f64) -> (Vec<f64>, f64) {
        let n = x.rows() as f64;
        let mut gw = vec![0.0; x.cols()];
        let mut gb = 0.0;
        for i in 0..x.rows() {
            let row = x.row(i);
            let y = x.labels()[i];
            let z: f64 = row.iter().zip(weights).map(|(a, w)| a * w).sum::<f64>() + intercept;
            let coef = self.slope(y * z) * y / n;
            gb += coef;
            for (g, a) in gw.iter_mut().zip(row) {
                *g += coef * a;
            }
        }
        (gw, gb)
    }
}
