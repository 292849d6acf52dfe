use crate::data::LabeledDataset;
use crate::error::{Error, Result};
use crate::model::IncModel;

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    /// Sample-weighted accuracy over the union of all groups.
    pub overall: f64,
    pub per_group: Vec<f64>,
}

/// Argmax accuracy per test group and over all groups together.
pub fn evaluate(model: &IncModel, test_sets: &[&LabeledDataset]) -> Result<Evaluation> {
    let mut correct_total = 0usize;
    let mut total = 0usize;
    let mut per_group = Vec::with_capacity(test_sets.len());
    for (g, ds) in test_sets.iter().enumerate() {
        if ds.is_empty() {
            return Err(Error::Argument(format!("test group {g} has no samples")));
        }
        if let Some(&c) = ds.class_ids().iter().find(|&&c| c >= model.num_classes()) {
            return Err(Error::Mapping(format!(
                "test group {g} contains class {c}, but the model knows {} classes",
                model.num_classes()
            )));
        }
        let mut correct = 0usize;
        for (x, y) in ds.iter() {
            if model.predict(x)? == y {
                correct += 1;
            }
        }
        per_group.push(correct as f64 / ds.len() as f64);
        correct_total += correct;
        total += ds.len();
    }
    if total == 0 {
        return Err(Error::Argument("no test groups to evaluate".into()));
    }
    Ok(Evaluation {
        overall: correct_total as f64 / total as f64,
        per_group,
    })
}

/// Model value: recognizable class count times accuracy.
pub fn accn(n: usize, accuracy: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::Argument("ACCN needs N >= 1".into()));
    }
    if !(0.0..=1.0).contains(&accuracy) {
        return Err(Error::Argument(format!(
            "accuracy must lie in [0, 1], got {accuracy}"
        )));
    }
    Ok(n as f64 * accuracy)
}
