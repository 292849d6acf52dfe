use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::LabeledDataset;

/// Ordered, disjoint class groups. Group 0 is the base service, later groups are increments.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct StagePlan {
    groups: Vec<Vec<usize>>,
}

/// The four incremental orders over a 55-class universe split 15/10/10/10/10.
/// Class ids are zero-based, so block `k` covers ids `15 + 10*(k-1) .. 15 + 10*k`.
const USER_BLOCK_ORDERS: [[usize; 4]; 4] = [[1, 2, 3, 4], [2, 4, 3, 1], [3, 4, 1, 2], [4, 1, 2, 3]];

impl StagePlan {
    pub fn new(groups: Vec<Vec<usize>>) -> Result<Self> {
        if groups.is_empty() {
            return Err(Error::Plan("plan has no stages".into()));
        }
        let mut seen = BTreeSet::new();
        for (g, group) in groups.iter().enumerate() {
            if group.is_empty() {
                return Err(Error::Plan(format!("stage {g} has no classes")));
            }
            for &c in group {
                if !seen.insert(c) {
                    return Err(Error::Plan(format!("class {c} appears more than once")));
                }
            }
        }
        Ok(Self { groups })
    }

    /// Base block of 15 classes followed by four blocks of 10, in the order used by `user` (1-4).
    pub fn user_sequence(user: usize) -> Result<Self> {
        let order = USER_BLOCK_ORDERS
            .get(user.wrapping_sub(1))
            .ok_or_else(|| Error::Plan(format!("user sequence must be 1-4, got {user}")))?;
        let mut groups = vec![(0..15).collect::<Vec<_>>()];
        for &block in order {
            let start = 15 + 10 * (block - 1);
            groups.push((start..start + 10).collect());
        }
        Self::new(groups)
    }

    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    pub fn num_stages(&self) -> usize {
        self.groups.len()
    }

    pub fn classes(&self) -> BTreeSet<usize> {
        self.groups.iter().flatten().copied().collect()
    }

    /// Cumulative class count after each stage.
    pub fn cumulative_counts(&self) -> Vec<usize> {
        self.groups
            .iter()
            .scan(0, |n, g| {
                *n += g.len();
                Some(*n)
            })
            .collect()
    }

    pub fn check_covers(&self, universe: &[usize]) -> Result<()> {
        let planned = self.classes();
        let actual: BTreeSet<usize> = universe.iter().copied().collect();
        if let Some(c) = actual.difference(&planned).next() {
            return Err(Error::Plan(format!("class {c} is not assigned to any stage")));
        }
        if let Some(c) = planned.difference(&actual).next() {
            return Err(Error::Plan(format!("class {c} is planned but has no data")));
        }
        Ok(())
    }
}

/// Bijection between original class ids and contiguous ids in stage-visit order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelMap {
    to_local: BTreeMap<usize, usize>,
    to_original: Vec<usize>,
}

impl LabelMap {
    pub fn from_plan(plan: &StagePlan) -> Self {
        let to_original: Vec<usize> = plan.groups().iter().flatten().copied().collect();
        let to_local = to_original.iter().enumerate().map(|(i, &c)| (c, i)).collect();
        Self {
            to_local,
            to_original,
        }
    }

    pub fn local(&self, original: usize) -> Result<usize> {
        self.to_local
            .get(&original)
            .copied()
            .ok_or_else(|| Error::Mapping(format!("class {original} is not in the stage plan")))
    }

    pub fn original(&self, local: usize) -> Option<usize> {
        self.to_original.get(local).copied()
    }

    pub fn len(&self) -> usize {
        self.to_original.len()
    }

    pub fn is_empty(&self) -> bool {
        self.to_original.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StageData {
    pub train: LabeledDataset,
    pub test: LabeledDataset,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StageSplit {
    pub stages: Vec<StageData>,
    pub label_map: LabelMap,
}

/// Partitions train and test pools by plan group and remaps labels to contiguous ids.
pub fn split_stages(
    train: &LabeledDataset,
    test: &LabeledDataset,
    plan: &StagePlan,
) -> Result<StageSplit> {
    plan.check_covers(train.class_ids())?;
    let label_map = LabelMap::from_plan(plan);
    for &c in test.class_ids() {
        label_map.local(c)?;
    }
    let mut stage_of = BTreeMap::new();
    for (s, group) in plan.groups().iter().enumerate() {
        for &c in group {
            stage_of.insert(c, s);
        }
    }
    let partition = |ds: &LabeledDataset| -> Result<Vec<LabeledDataset>> {
        let mut parts = vec![LabeledDataset::empty(ds.dim()); plan.num_stages()];
        for (x, y) in ds.iter() {
            parts[stage_of[&y]].push(x, label_map.local(y)?)?;
        }
        Ok(parts)
    };
    let stages = partition(train)?
        .into_iter()
        .zip(partition(test)?)
        .map(|(train, test)| StageData { train, test })
        .collect();
    Ok(StageSplit { stages, label_map })
}

/// Per-feature affine standardization. Statistics are fitted once and reused.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Standardizer {
    /// Population mean and standard deviation per column; constant columns get std 1.
    pub fn fit(ds: &LabeledDataset) -> Result<Self> {
        if ds.is_empty() {
            return Err(Error::EmptyInput("standardizer fit on empty dataset"));
        }
        let n = ds.len() as f64;
        let dim = ds.dim();
        let mut mean = vec![0.0; dim];
        for (x, _) in ds.iter() {
            for (m, v) in mean.iter_mut().zip(x) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= n);
        let mut var = vec![0.0; dim];
        for (x, _) in ds.iter() {
            for ((s, v), m) in var.iter_mut().zip(x).zip(&mean) {
                *s += (v - m) * (v - m);
            }
        }
        let std = var
            .into_iter()
            .map(|s| {
                let sd = (s / n).sqrt();
                if sd > 1e-12 {
                    sd
                } else {
                    1.0
                }
            })
            .collect();
        Ok(Self { mean, std })
    }

    pub fn apply(&self, ds: &LabeledDataset) -> Result<LabeledDataset> {
        if ds.dim() != self.mean.len() && !ds.is_empty() {
            return Err(Error::shape(
                format!("standardizer dim {}", self.mean.len()),
                format!("dataset dim {}", ds.dim()),
            ));
        }
        ds.map_features(|x| {
            x.iter()
                .zip(&self.mean)
                .zip(&self.std)
                .map(|((v, m), s)| (v - m) / s)
                .collect()
        })
    }
}
