//! L1-sparse linear classifiers and the repeated-split evaluation protocol.

mod features;
mod loss;
mod protocol;
mod solver;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

pub use features::{feature_region, featurize, quantize, DesignMatrix, LabeledImage};
pub use loss::Loss;
pub use protocol::{
    cross_validate_lambda, default_lambda_grid, evaluate_run, read_run_results, repeated_split_evaluate,
    stratified_folds, stratified_split, write_run_results, CvPoint, CvResult, EvalProtocol, RunOutcome, RunResult,
};
pub use solver::{
    kkt_residual, lambda_max, train, train_l1_logistic, train_l1_svm, train_warm, LinearModel, SolverSettings,
    StopReason, TrainReport,
};

/// How an image becomes a feature vector.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Strategy {
    /// Occipital normalization, binding potential on striatal voxels.
    #[serde(rename = "SBR")]
    Sbr,
    /// Sphere projection of striatal and occipital voxels together.
    #[serde(rename = "S+O")]
    StriatumOccipital,
    /// Sphere projection of striatal voxels only.
    #[serde(rename = "S")]
    Striatum,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [Strategy::Sbr, Strategy::StriatumOccipital, Strategy::Striatum];

    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::Sbr => "SBR",
            Strategy::StriatumOccipital => "S+O",
            Strategy::Striatum => "S",
        }
    }

    /// File-name friendly tag.
    pub fn slug(self) -> &'static str {
        match self {
            Strategy::Sbr => "sbr",
            Strategy::StriatumOccipital => "so",
            Strategy::Striatum => "s",
        }
    }

    pub fn is_self_normalized(self) -> bool {
        self != Strategy::Sbr
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.to_ascii_lowercase().as_str() {
            "sbr" => Ok(Strategy::Sbr),
            "s+o" | "so" => Ok(Strategy::StriatumOccipital),
            "s" => Ok(Strategy::Striatum),
            _ => Err(Error::InvalidProtocol(format!("unknown strategy {s:?}"))),
        }
    }
}

/// Linear classifier family; each maps to one smooth loss.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Classifier {
    #[serde(rename = "LR")]
    Logistic,
    #[serde(rename = "SVM")]
    Svm,
}

impl Classifier {
    pub const ALL: [Classifier; 2] = [Classifier::Logistic, Classifier::Svm];

    pub fn loss(self) -> Loss {
        match self {
            Classifier::Logistic => Loss::Logistic,
            Classifier::Svm => Loss::SquaredHinge,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Classifier::Logistic => "LR",
            Classifier::Svm => "SVM",
        }
    }

    pub fn slug(self) -> &'static str {
        match self {
            Classifier::Logistic => "lr",
            Classifier::Svm => "svm",
        }
    }
}

impl fmt::Display for Classifier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Classifier {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s.to_ascii_lowercase().as_str() {
            "lr" | "logistic" => Ok(Classifier::Logistic),
            "svm" => Ok(Classifier::Svm),
            _ => Err(Error::InvalidProtocol(format!("unknown classifier {s:?}"))),
        }
    }
}
