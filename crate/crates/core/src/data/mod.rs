//! Datasets: synthetic Gaussian mixtures, CSV ingestion, stage partitioning and standardization.

mod csv_io;
mod dataset;
mod stages;
mod synthetic;

pub use csv_io::{load_csv, read_csv, write_csv};
pub use dataset::LabeledDataset;
pub use stages::{split_stages, LabelMap, StageData, StagePlan, StageSplit, Standardizer};
pub use synthetic::{generate_synthetic, SyntheticSpec};
