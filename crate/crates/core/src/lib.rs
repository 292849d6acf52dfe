//! Class-incremental learning engine.
//!
//! A small MLP with an expandable bias-free head is updated stage by stage as
//! new classes arrive. Forgetting of earlier classes is countered by replaying
//! herding-selected exemplars, distilling from the frozen previous model, and
//! aligning the norms of new head rows to the old ones. The [`harness`] module
//! runs staged scenarios and ablations and reports accuracy and ACCN
//! (seen-class count times accuracy).

pub mod continual;
pub mod data;
pub mod harness;
mod error;
pub mod model;
pub mod numkit;

pub use error::{Error, Result};
