use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::data::LabeledDataset;
use crate::error::{Error, Result};
use crate::model::IncModel;

use super::herding_select;

/// Retained samples per class. Classes are only ever added, and their samples are frozen once chosen.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExemplarStore {
    capacity_per_class: usize,
    classes: BTreeMap<usize, Vec<Vec<f64>>>,
}

impl ExemplarStore {
    pub fn new(capacity_per_class: usize) -> Self {
        Self {
            capacity_per_class,
            classes: BTreeMap::new(),
        }
    }

    pub fn capacity_per_class(&self) -> usize {
        self.capacity_per_class
    }

    /// Total number of stored samples.
    pub fn len(&self) -> usize {
        self.classes.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn num_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn class_ids(&self) -> impl Iterator<Item = usize> + '_ {
        self.classes.keys().copied()
    }

    pub fn contains_class(&self, class: usize) -> bool {
        self.classes.contains_key(&class)
    }

    pub fn samples(&self, class: usize) -> Option<&[Vec<f64>]> {
        self.classes.get(&class).map(Vec::as_slice)
    }

    pub fn insert_class(&mut self, class: usize, samples: Vec<Vec<f64>>) -> Result<()> {
        if self.classes.contains_key(&class) {
            return Err(Error::Conflict(format!("class {class} already has exemplars")));
        }
        self.classes.insert(class, samples);
        Ok(())
    }

    /// All exemplars as one dataset, class by class in ascending id order.
    pub fn to_dataset(&self, dim: usize) -> Result<LabeledDataset> {
        let mut ds = LabeledDataset::empty(dim);
        for (&class, samples) in &self.classes {
            for x in samples {
                ds.push(x, class)?;
            }
        }
        Ok(ds)
    }
}

/// Runs herding over every class of `dataset` and adds the picks to a copy of `existing`.
pub fn build_exemplar_store(
    model: &IncModel,
    dataset: &LabeledDataset,
    k: usize,
    existing: Option<&ExemplarStore>,
) -> Result<ExemplarStore> {
    if k == 0 {
        return Err(Error::Argument("exemplar count K must be at least 1".into()));
    }
    let mut store = existing.cloned().unwrap_or_else(|| ExemplarStore::new(k));
    if let Some(&c) = dataset.class_ids().iter().find(|c| store.contains_class(**c)) {
        return Err(Error::Conflict(format!(
            "class {c} is already present in the exemplar store"
        )));
    }
    let picks = dataset
        .class_ids()
        .par_iter()
        .map(|&class| {
            let samples = dataset.class_samples(class);
            let chosen = herding_select(model, &samples, k)?;
            Ok((class, chosen.into_iter().map(|i| samples[i].to_vec()).collect()))
        })
        .collect::<Result<Vec<(usize, Vec<Vec<f64>>)>>>()?;
    for (class, samples) in picks {
        store.insert_class(class, samples)?;
    }
    Ok(store)
}
