use serde::{Deserialize, Serialize};

use crate::data::LabeledDataset;
use crate::error::{Error, Result};
use crate::model::{IncModel, ModelConfig, TeacherSnapshot};
use crate::numkit::{DistillLoss, NormKind, SeededRng};

use super::{build_exemplar_store, weight_align, ExemplarStore};

/// Which of exemplar replay, distillation and weight aligning a stage uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Toggles {
    pub use_exemplars: bool,
    pub use_distillation: bool,
    pub use_weight_align: bool,
}

impl Toggles {
    pub const ALL: Toggles = Toggles {
        use_exemplars: true,
        use_distillation: true,
        use_weight_align: true,
    };
    pub const NONE: Toggles = Toggles {
        use_exemplars: false,
        use_distillation: false,
        use_weight_align: false,
    };

    /// Short label such as `E+KD+WA`, or `baseline` when everything is off.
    pub fn label(&self) -> String {
        let parts: Vec<&str> = [
            (self.use_exemplars, "E"),
            (self.use_distillation, "KD"),
            (self.use_weight_align, "WA"),
        ]
        .into_iter()
        .filter_map(|(on, name)| on.then_some(name))
        .collect();
        if parts.is_empty() {
            "baseline".into()
        } else {
            parts.join("+")
        }
    }
}

/// Distillation weight for `u` old and `v` new classes: `0.1 * u / (u + v)`.
pub fn default_alpha(u: usize, v: usize) -> f64 {
    0.1 * u as f64 / (u + v) as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageContext {
    pub u: usize,
    pub v: usize,
    pub alpha: f64,
    pub toggles: Toggles,
    pub distill_loss: DistillLoss,
    pub wa_norm: NormKind,
    pub k: usize,
}

impl StageContext {
    pub fn new(
        u: usize,
        v: usize,
        toggles: Toggles,
        distill_loss: DistillLoss,
        wa_norm: NormKind,
        k: usize,
        alpha_override: Option<f64>,
    ) -> Result<Self> {
        if u == 0 || v == 0 {
            return Err(Error::Argument(format!(
                "a stage needs old and new classes, got u={u}, v={v}"
            )));
        }
        if k == 0 {
            return Err(Error::Config("exemplar count K must be at least 1".into()));
        }
        let alpha = match alpha_override {
            Some(a) if !(0.0..1.0).contains(&a) => {
                return Err(Error::Config(format!("alpha override must lie in [0, 1), got {a}")))
            }
            Some(a) => a,
            None => default_alpha(u, v),
        };
        Ok(Self {
            u,
            v,
            alpha,
            toggles,
            distill_loss,
            wa_norm,
            k,
        })
    }

    /// The distillation weight actually used for training.
    pub fn effective_alpha(&self) -> f64 {
        if self.toggles.use_distillation {
            self.alpha
        } else {
            0.0
        }
    }
}

/// Shuffled mini-batch SGD over `data` for `config.epochs_per_stage` epochs.
/// Returns the sample-weighted mean loss of each epoch.
pub fn train_epochs(
    model: &mut IncModel,
    data: &LabeledDataset,
    teacher: Option<&TeacherSnapshot>,
    alpha: f64,
    distill: DistillLoss,
    config: &ModelConfig,
    rng: &mut SeededRng,
) -> Result<Vec<f64>> {
    if data.is_empty() {
        return Err(Error::Argument("cannot train on an empty dataset".into()));
    }
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut log = Vec::with_capacity(config.epochs_per_stage);
    for _ in 0..config.epochs_per_stage {
        rng.shuffle(&mut order);
        let mut total = 0.0;
        for chunk in order.chunks(config.batch_size) {
            let inputs: Vec<&[f64]> = chunk.iter().map(|&i| data.sample(i).0).collect();
            let labels: Vec<usize> = chunk.iter().map(|&i| data.sample(i).1).collect();
            let loss = model.backward_and_step(
                &inputs,
                &labels,
                teacher,
                alpha,
                distill,
                config.learning_rate,
            )?;
            total += loss * chunk.len() as f64;
        }
        log.push(total / data.len() as f64);
    }
    Ok(log)
}

#[derive(Debug, Clone)]
pub struct StageOutcome {
    pub model: IncModel,
    pub store: ExemplarStore,
    pub epoch_losses: Vec<f64>,
}

/// One incremental update: copy the previous model, grow its head by `v`,
/// train on the new data (plus replayed exemplars) against the frozen
/// previous model, align the head, then pick exemplars for the new classes
/// with the updated model.
///
/// `new_data` must carry labels `u..u+v`.
pub fn ccs_stage_update(
    prev: &IncModel,
    new_data: &LabeledDataset,
    store: &ExemplarStore,
    ctx: &StageContext,
    config: &ModelConfig,
    rng: &mut SeededRng,
) -> Result<StageOutcome> {
    if new_data.is_empty() {
        return Err(Error::Argument("stage update needs new data".into()));
    }
    if prev.num_classes() != ctx.u {
        return Err(Error::shape(
            format!("previous model with {} classes", prev.num_classes()),
            format!("stage context u = {}", ctx.u),
        ));
    }
    if config.input_dim != prev.input_dim() || new_data.dim() != prev.input_dim() {
        return Err(Error::shape(
            format!("model input dim {}", prev.input_dim()),
            format!("config {} / data {}", config.input_dim, new_data.dim()),
        ));
    }
    if let Some(&c) = new_data.class_ids().iter().find(|&&c| c < ctx.u) {
        return Err(Error::Conflict(format!(
            "new data contains already-seen class {c}"
        )));
    }
    if let Some(c) = store.class_ids().find(|&c| c >= ctx.u) {
        return Err(Error::Conflict(format!(
            "exemplar store holds class {c}, which is not an old class"
        )));
    }
    let expected: Vec<usize> = (ctx.u..ctx.u + ctx.v).collect();
    if new_data.class_ids() != expected.as_slice() {
        return Err(Error::Argument(format!(
            "new data labels must be exactly {}..{}",
            ctx.u,
            ctx.u + ctx.v
        )));
    }

    let mut student = prev.clone();
    student.expand_head(ctx.v, rng)?;
    let alpha = ctx.effective_alpha();
    let teacher = (alpha > 0.0).then(|| prev.snapshot());

    let train_set = if ctx.toggles.use_exemplars && !store.is_empty() {
        let mut pool = new_data.clone();
        pool.extend(&store.to_dataset(new_data.dim())?)?;
        pool
    } else {
        new_data.clone()
    };

    let epoch_losses = train_epochs(
        &mut student,
        &train_set,
        teacher.as_ref(),
        alpha,
        ctx.distill_loss,
        config,
        rng,
    )?;

    if ctx.toggles.use_weight_align {
        let aligned = weight_align(student.head(), ctx.u, ctx.v, ctx.wa_norm)?;
        student.set_head(aligned)?;
    }

    let store = build_exemplar_store(&student, new_data, ctx.k, Some(store))?;
    Ok(StageOutcome {
        model: student,
        store,
        epoch_losses,
    })
}
