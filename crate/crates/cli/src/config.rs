//! Pipeline configuration: one TOML document, overridden field by field from flags.

use std::path::{Path, PathBuf};

use rayclass_core::classifiers::{Classifier, EvalProtocol, Strategy};
use rayclass_core::phantom::PhantomSpec;
use rayclass_core::pipeline::Task;
use rayclass_core::verify::VerifySettings;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    /// Cohort directory holding `manifest.json`.
    pub cohort: Option<PathBuf>,
    /// Directory written by `masks`; masks are rebuilt from the cohort when absent.
    pub masks: Option<PathBuf>,
    /// Externally supplied occipital mask (JSON). Defaults to the cohort's own.
    pub occipital_mask: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CohortSize {
    pub n_hc: usize,
    pub n_pd: usize,
    pub paired_y4: bool,
}

impl Default for CohortSize {
    fn default() -> Self {
        CohortSize {
            n_hc: 40,
            n_pd: 60,
            paired_y4: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Required. Feeds the phantom, the evaluation protocol and the verification battery.
    pub seed: Option<u64>,
    pub paths: Paths,
    pub task: Task,
    pub strategies: Vec<Strategy>,
    pub classifiers: Vec<Classifier>,
    /// Paired t-test across runs instead of Welch.
    pub paired_test: bool,
    /// 1-based inclusive axial slices kept in the striatum mask.
    pub slices: Option<[usize; 2]>,
    /// 1-based inclusive axial slices written to the weight maps, clipped to the grid.
    pub weight_slices: Option<[usize; 2]>,
    pub cohort: CohortSize,
    pub protocol: EvalProtocol,
    pub phantom: PhantomSpec,
    pub verify: VerifySettings,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            seed: None,
            paths: Paths::default(),
            task: Task::default(),
            strategies: Strategy::ALL.to_vec(),
            classifiers: Classifier::ALL.to_vec(),
            paired_test: false,
            slices: None,
            weight_slices: Some([40, 42]),
            cohort: CohortSize::default(),
            protocol: EvalProtocol::default(),
            phantom: PhantomSpec::default(),
            verify: VerifySettings::default(),
        }
    }
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Usage(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
    }

    /// Copies the seed into every seeded component.
    pub fn seed(&mut self) -> Result<u64, CliError> {
        let seed = self
            .seed
            .ok_or_else(|| CliError::Usage("a seed is required (--seed or `seed` in the config)".into()))?;
        self.phantom.seed = seed;
        self.protocol.seed = seed;
        self.verify.seed = seed;
        Ok(seed)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let usage = |e: rayclass_core::Error| CliError::Usage(e.to_string());
        self.protocol.validate().map_err(usage)?;
        self.phantom.validate().map_err(usage)?;
        if self.strategies.is_empty() || self.classifiers.is_empty() {
            return Err(CliError::Usage(
                "at least one strategy and one classifier are required".into(),
            ));
        }
        for (name, range) in [("slices", self.slices), ("weight_slices", self.weight_slices)] {
            if let Some([lo, hi]) = range {
                if lo == 0 || lo > hi {
                    return Err(CliError::Usage(format!("{name} [{lo}, {hi}] is not a 1-based range")));
                }
            }
        }
        for path in [&self.paths.cohort, &self.paths.masks, &self.paths.occipital_mask]
            .into_iter()
            .flatten()
        {
            if !path.exists() {
                return Err(CliError::Usage(format!("{} does not exist", path.display())));
            }
        }
        Ok(())
    }

    pub fn out_dir(&self) -> Result<&Path, CliError> {
        self.paths
            .out
            .as_deref()
            .ok_or_else(|| CliError::Usage("an output directory is required (--out)".into()))
    }

    pub fn cohort_dir(&self) -> Result<&Path, CliError> {
        self.paths
            .cohort
            .as_deref()
            .ok_or_else(|| CliError::Usage("a cohort directory is required (--cohort)".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_is_default() {
        assert_eq!(PipelineConfig::from_toml("").unwrap(), PipelineConfig::default());
    }

    #[test]
    fn nested_fields_parse() {
        let cfg = PipelineConfig::from_toml(
            r#"
            seed = 9
            task = "bl-vs-y4"
            strategies = ["S", "SBR"]
            classifiers = ["LR"]
            slices = [3, 12]
            [protocol]
            n_runs = 7
            [phantom]
            noise = 0.2
            [paths]
            out = "results"
            "#,
        )
        .unwrap();
        assert_eq!(cfg.seed, Some(9));
        assert_eq!(cfg.task, Task::BlVsY4);
        assert_eq!(cfg.strategies, vec![Strategy::Striatum, Strategy::Sbr]);
        assert_eq!(cfg.protocol.n_runs, 7);
        assert_eq!(cfg.protocol.cv_folds, 10);
        assert_eq!(cfg.phantom.noise, 0.2);
        assert_eq!(cfg.paths.out.as_deref(), Some(Path::new("results")));
    }

    #[test]
    fn unknown_keys_and_missing_seed_are_usage_errors() {
        assert!(matches!(PipelineConfig::from_toml("sead = 1"), Err(CliError::Usage(_))));
        let mut cfg = PipelineConfig::default();
        assert!(matches!(cfg.seed(), Err(CliError::Usage(_))));
        cfg.seed = Some(4);
        cfg.seed().unwrap();
        assert_eq!(cfg.protocol.seed, 4);
        assert_eq!(cfg.phantom.seed, 4);
    }
}
