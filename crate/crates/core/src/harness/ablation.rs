use std::collections::HashSet;
use std::path::Path;

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::continual::Toggles;
use crate::error::{Error, Result};
use crate::numkit::{DistillLoss, NormKind};

use super::report::{comparison_table, ComparisonRow, RunReport};
use super::runner::{prepare_data, run_prepared};
use super::{CcsSection, ScenarioConfig};

/// Stage-update fields a variant may change; unset fields keep the base value.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Variant {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub use_exemplars: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub use_distillation: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub use_weight_align: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub distill_loss: Option<DistillLoss>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wa_norm: Option<NormKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_override: Option<f64>,
}

impl Variant {
    pub fn toggles(t: Toggles) -> Self {
        Self {
            use_exemplars: Some(t.use_exemplars),
            use_distillation: Some(t.use_distillation),
            use_weight_align: Some(t.use_weight_align),
            ..Self::default()
        }
    }

    pub fn apply(&self, base: &CcsSection) -> CcsSection {
        let mut c = base.clone();
        if let Some(k) = self.k {
            c.k = k;
        }
        if let Some(b) = self.use_exemplars {
            c.use_exemplars = b;
        }
        if let Some(b) = self.use_distillation {
            c.use_distillation = b;
        }
        if let Some(b) = self.use_weight_align {
            c.use_weight_align = b;
        }
        if let Some(d) = self.distill_loss {
            c.distill_loss = d;
        }
        if let Some(n) = self.wa_norm {
            c.wa_norm = n;
        }
        if self.alpha_override.is_some() {
            c.alpha_override = self.alpha_override;
        }
        c
    }

    /// Explicit name, else the toggle label plus any non-default loss, norm, K or alpha.
    pub fn label(&self, base: &CcsSection) -> String {
        if let Some(n) = &self.name {
            return n.clone();
        }
        let c = self.apply(base);
        let mut label = c.toggles().label();
        if self.distill_loss.is_some() {
            label.push_str(&format!(" loss={}", c.distill_loss));
        }
        if self.wa_norm.is_some() {
            label.push_str(&format!(" norm={}", c.wa_norm));
        }
        if self.k.is_some() {
            label.push_str(&format!(" k={}", c.k));
        }
        if let Some(a) = self.alpha_override {
            label.push_str(&format!(" alpha={a}"));
        }
        label
    }
}

/// Named variant matrices.
pub fn preset(name: &str) -> Result<Vec<Variant>> {
    let t = |e, kd, wa| {
        Variant::toggles(Toggles {
            use_exemplars: e,
            use_distillation: kd,
            use_weight_align: wa,
        })
    };
    match name {
        "components" => Ok(vec![
            t(false, false, false),
            t(false, true, true),
            t(true, false, false),
            t(true, true, false),
            t(true, false, true),
            t(true, true, true),
        ]),
        "distill" => Ok([DistillLoss::Mse, DistillLoss::Kld, DistillLoss::L1]
            .into_iter()
            .map(|d| Variant {
                distill_loss: Some(d),
                ..t(true, true, true)
            })
            .collect()),
        "norm" => Ok([NormKind::L1, NormKind::L2]
            .into_iter()
            .map(|n| Variant {
                wa_norm: Some(n),
                ..t(true, true, true)
            })
            .collect()),
        other => Err(Error::Config(format!(
            "unknown ablation preset '{other}' (expected components, distill or norm)"
        ))),
    }
}

/// Reads a JSON array of variants.
pub fn load_matrix(path: impl AsRef<Path>) -> Result<Vec<Variant>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

#[derive(Debug, Clone)]
pub struct AblationResult {
    pub runs: Vec<RunReport>,
    pub table: Vec<ComparisonRow>,
}

/// Runs every distinct variant for seeds `base.seed .. base.seed + seeds`.
/// Runs are independent and execute in parallel; output order is variant-major.
pub fn run_ablation(base: &ScenarioConfig, matrix: &[Variant], seeds: usize) -> Result<AblationResult> {
    if matrix.is_empty() {
        return Err(Error::Argument("ablation matrix is empty".into()));
    }
    if seeds == 0 {
        return Err(Error::Argument("ablation needs at least one seed".into()));
    }
    base.validate()?;

    let mut seen = HashSet::new();
    let mut variants = Vec::new();
    for v in matrix {
        let ccs = v.apply(&base.ccs);
        ccs.validate()?;
        let label = v.label(&base.ccs);
        let key = serde_json::to_string(&ccs)?;
        if !seen.insert(key) {
            warn!("duplicate ablation variant '{label}' skipped");
            continue;
        }
        if variants.iter().any(|(l, _): &(String, CcsSection)| *l == label) {
            return Err(Error::Config(format!(
                "two different variants share the label '{label}'"
            )));
        }
        variants.push((label, ccs));
    }

    let seed_list: Vec<u64> = (0..seeds as u64).map(|i| base.seed + i).collect();
    let prepared = seed_list
        .par_iter()
        .map(|&seed| {
            let mut c = base.clone();
            c.seed = seed;
            prepare_data(&c)
        })
        .collect::<Result<Vec<_>>>()?;

    let jobs: Vec<(usize, usize)> = (0..variants.len())
        .flat_map(|v| (0..seed_list.len()).map(move |s| (v, s)))
        .collect();
    let runs = jobs
        .par_iter()
        .map(|&(v, s)| {
            let (label, ccs) = &variants[v];
            let mut config = base.clone();
            config.seed = seed_list[s];
            config.ccs = ccs.clone();
            let run_id = format!("{}-seed{}", label.replace(' ', "_"), config.seed);
            let mut report = run_prepared(&config, &prepared[s], &run_id)?;
            report.method = label.clone();
            Ok(report)
        })
        .collect::<Result<Vec<_>>>()?;

    let table = comparison_table(&runs);
    Ok(AblationResult { runs, table })
}
