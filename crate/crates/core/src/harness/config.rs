use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::continual::Toggles;
use crate::data::{StagePlan, SyntheticSpec};
use crate::error::{Error, Result};
use crate::model::ModelConfig;
use crate::numkit::{DistillLoss, NormKind};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSection {
    pub num_classes: usize,
    pub input_dim: usize,
    pub train_per_class: usize,
    pub test_per_class: usize,
    pub center_scale: f64,
    pub stddev: f64,
}

impl SyntheticSection {
    pub fn to_spec(&self, seed: u64) -> SyntheticSpec {
        SyntheticSpec {
            num_classes: self.num_classes,
            input_dim: self.input_dim,
            train_per_class: self.train_per_class,
            test_per_class: self.test_per_class,
            center_scale: self.center_scale,
            stddev: self.stddev,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CsvSection {
    pub train: PathBuf,
    pub test: PathBuf,
    #[serde(default)]
    pub has_header: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum DataSource {
    Synthetic(SyntheticSection),
    Csv(CsvSection),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    #[serde(default = "ModelSection::default_hidden")]
    pub hidden_dims: Vec<usize>,
    #[serde(default = "ModelSection::default_lr")]
    pub lr: f64,
    #[serde(default = "ModelSection::default_batch")]
    pub batch_size: usize,
    #[serde(default = "ModelSection::default_epochs")]
    pub epochs_per_stage: usize,
}

impl ModelSection {
    fn default_hidden() -> Vec<usize> {
        vec![64, 32]
    }
    fn default_lr() -> f64 {
        0.05
    }
    fn default_batch() -> usize {
        32
    }
    fn default_epochs() -> usize {
        30
    }

    pub fn to_model_config(&self, input_dim: usize) -> ModelConfig {
        ModelConfig {
            input_dim,
            hidden_dims: self.hidden_dims.clone(),
            learning_rate: self.lr,
            batch_size: self.batch_size,
            epochs_per_stage: self.epochs_per_stage,
        }
    }
}

impl Default for ModelSection {
    fn default() -> Self {
        Self {
            hidden_dims: Self::default_hidden(),
            lr: Self::default_lr(),
            batch_size: Self::default_batch(),
            epochs_per_stage: Self::default_epochs(),
        }
    }
}

/// Stage-update settings shared by every incremental stage of a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CcsSection {
    #[serde(default = "CcsSection::default_k")]
    pub k: usize,
    #[serde(default = "yes")]
    pub use_exemplars: bool,
    #[serde(default = "yes")]
    pub use_distillation: bool,
    #[serde(default = "yes")]
    pub use_weight_align: bool,
    #[serde(default)]
    pub distill_loss: DistillLoss,
    #[serde(default)]
    pub wa_norm: NormKind,
    #[serde(default)]
    pub alpha_override: Option<f64>,
}

fn yes() -> bool {
    true
}

impl CcsSection {
    pub const DEFAULT_K: usize = 10;

    fn default_k() -> usize {
        Self::DEFAULT_K
    }

    pub fn toggles(&self) -> Toggles {
        Toggles {
            use_exemplars: self.use_exemplars,
            use_distillation: self.use_distillation,
            use_weight_align: self.use_weight_align,
        }
    }

    pub fn set_toggles(&mut self, t: Toggles) {
        self.use_exemplars = t.use_exemplars;
        self.use_distillation = t.use_distillation;
        self.use_weight_align = t.use_weight_align;
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::Config("ccs.k must be at least 1".into()));
        }
        if let Some(a) = self.alpha_override {
            if !(0.0..1.0).contains(&a) {
                return Err(Error::Config(format!(
                    "ccs.alpha_override must lie in [0, 1), got {a}"
                )));
            }
        }
        Ok(())
    }
}

impl Default for CcsSection {
    fn default() -> Self {
        Self {
            k: Self::DEFAULT_K,
            use_exemplars: true,
            use_distillation: true,
            use_weight_align: true,
            distill_loss: DistillLoss::Mse,
            wa_norm: NormKind::L2,
            alpha_override: None,
        }
    }
}

/// Everything one scenario run needs. Parsed from JSON with unknown keys rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub seed: u64,
    pub data: DataSource,
    pub stages: Vec<Vec<usize>>,
    #[serde(default)]
    pub model: ModelSection,
    #[serde(default)]
    pub ccs: CcsSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

impl ScenarioConfig {
    /// The 55-class, 8-D synthetic scenario split 15/10/10/10/10 in the given user order (1-4).
    pub fn default_synthetic(seed: u64, user: usize) -> Result<Self> {
        let spec = SyntheticSpec::default_scenario(seed);
        Ok(Self {
            seed,
            data: DataSource::Synthetic(SyntheticSection {
                num_classes: spec.num_classes,
                input_dim: spec.input_dim,
                train_per_class: spec.train_per_class,
                test_per_class: spec.test_per_class,
                center_scale: spec.center_scale,
                stddev: spec.stddev,
            }),
            stages: StagePlan::user_sequence(user)?.groups().to_vec(),
            model: ModelSection::default(),
            ccs: CcsSection::default(),
            output_dir: None,
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let config: Self = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn plan(&self) -> Result<StagePlan> {
        StagePlan::new(self.stages.clone()).map_err(|e| Error::Config(e.to_string()))
    }

    /// Checks every field that can be checked without touching data.
    pub fn validate(&self) -> Result<()> {
        let plan = self.plan()?;
        let input_dim = match &self.data {
            DataSource::Synthetic(s) => {
                s.to_spec(self.seed).validate()?;
                let universe: Vec<usize> = (0..s.num_classes).collect();
                plan.check_covers(&universe)
                    .map_err(|e| Error::Config(e.to_string()))?;
                s.input_dim
            }
            DataSource::Csv(_) => 1,
        };
        self.model.to_model_config(input_dim).validate()?;
        self.ccs.validate()
    }
}
