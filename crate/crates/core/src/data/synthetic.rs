use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkit::{Matrix2D, SeededRng};

use super::LabeledDataset;

const CENTER_STREAM: u64 = 1;
const TRAIN_STREAM: u64 = 2;
const TEST_STREAM: u64 = 3;

/// Class-conditional isotropic Gaussian mixture.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSpec {
    pub num_classes: usize,
    pub input_dim: usize,
    pub train_per_class: usize,
    pub test_per_class: usize,
    pub center_scale: f64,
    pub stddev: f64,
    #[serde(default)]
    pub seed: u64,
}

impl SyntheticSpec {
    /// 55 classes in 8 dimensions with a center-scale to spread ratio of 10.
    pub fn default_scenario(seed: u64) -> Self {
        Self {
            num_classes: 55,
            input_dim: 8,
            train_per_class: 100,
            test_per_class: 20,
            center_scale: 10.0,
            stddev: 1.0,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let counts = [
            ("num_classes", self.num_classes),
            ("input_dim", self.input_dim),
            ("train_per_class", self.train_per_class),
            ("test_per_class", self.test_per_class),
        ];
        for (name, value) in counts {
            if value == 0 {
                return Err(Error::Config(format!("synthetic {name} must be at least 1")));
            }
        }
        if !(self.stddev > 0.0 && self.stddev.is_finite()) {
            return Err(Error::Config(format!(
                "synthetic stddev must be positive, got {}",
                self.stddev
            )));
        }
        if !(self.center_scale >= 0.0 && self.center_scale.is_finite()) {
            return Err(Error::Config(format!(
                "synthetic center_scale must be non-negative, got {}",
                self.center_scale
            )));
        }
        Ok(())
    }
}

fn draw(
    centers: &[Vec<f64>],
    per_class: usize,
    stddev: f64,
    rng: &mut SeededRng,
) -> Result<LabeledDataset> {
    let dim = centers[0].len();
    let mut data = Vec::with_capacity(centers.len() * per_class * dim);
    let mut labels = Vec::with_capacity(centers.len() * per_class);
    for (class, center) in centers.iter().enumerate() {
        for _ in 0..per_class {
            data.extend(center.iter().map(|c| c + stddev * rng.normal()));
            labels.push(class);
        }
    }
    LabeledDataset::new(Matrix2D::from_vec(labels.len(), dim, data)?, labels)
}

/// Draws class centers once, then disjoint train and test samples. Labels are `0..num_classes`.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<(LabeledDataset, LabeledDataset)> {
    spec.validate()?;
    let root = SeededRng::new(spec.seed);
    let mut center_rng = root.derive(CENTER_STREAM);
    let centers: Vec<Vec<f64>> = (0..spec.num_classes)
        .map(|_| {
            (0..spec.input_dim)
                .map(|_| spec.center_scale * center_rng.normal())
                .collect()
        })
        .collect();
    let train = draw(
        &centers,
        spec.train_per_class,
        spec.stddev,
        &mut root.derive(TRAIN_STREAM),
    )?;
    let test = draw(
        &centers,
        spec.test_per_class,
        spec.stddev,
        &mut root.derive(TEST_STREAM),
    )?;
    Ok((train, test))
}
