//! Exemplar herding, the incremental stage update with distillation, and weight aligning.

mod align;
mod herding;
mod stage;
mod store;

pub use align::{alignment_factor, weight_align};
pub use herding::{class_feature_center, herding_select};
pub use stage::{
    ccs_stage_update, default_alpha, train_epochs, StageContext, StageOutcome, Toggles,
};
pub use store::{build_exemplar_store, ExemplarStore};
