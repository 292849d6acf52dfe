//! Run reports: JSON per run and a flat CSV summary.
//!
//! JSON keys follow struct field order and every metric is written with six
//! decimals, so identical runs produce byte-identical files. Wall-clock time is
//! kept out of the JSON for the same reason.

use std::collections::BTreeMap;
use std::path::Path;

use serde::de::Error as _;
use serde::ser::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::value::RawValue;

use crate::error::{Error, Result};

use super::ScenarioConfig;

pub const TOOL_NAME: &str = "inkrementa";
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

pub(crate) mod fixed6 {
    use super::*;

    pub fn to_raw(v: f64) -> std::result::Result<Box<RawValue>, serde_json::Error> {
        RawValue::from_string(format!("{v:.6}"))
    }

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
        if !v.is_finite() {
            return Err(S::Error::custom(format!("non-finite metric {v}")));
        }
        to_raw(*v).map_err(S::Error::custom)?.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
        f64::deserialize(d)
    }

    pub mod vec {
        use super::*;

        pub fn serialize<S: Serializer>(v: &[f64], s: S) -> std::result::Result<S::Ok, S::Error> {
            let raws = v
                .iter()
                .map(|x| {
                    if x.is_finite() {
                        to_raw(*x).map_err(S::Error::custom)
                    } else {
                        Err(S::Error::custom(format!("non-finite metric {x}")))
                    }
                })
                .collect::<std::result::Result<Vec<_>, _>>()?;
            raws.serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<f64>, D::Error> {
            Vec::<f64>::deserialize(d).map_err(D::Error::custom)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageReport {
    pub stage: usize,
    /// Cumulative number of classes the model recognizes after this stage.
    pub n: usize,
    #[serde(with = "fixed6")]
    pub accuracy: f64,
    #[serde(with = "fixed6::vec")]
    pub per_group_accuracy: Vec<f64>,
    #[serde(with = "fixed6")]
    pub accn: f64,
    /// ACCN of a perfect model: `n`.
    #[serde(with = "fixed6")]
    pub ideal_accn: f64,
    #[serde(with = "fixed6::vec")]
    pub epoch_losses: Vec<f64>,
    #[serde(skip)]
    pub wall_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub final_stage: usize,
    pub n: usize,
    #[serde(with = "fixed6")]
    pub accuracy: f64,
    #[serde(with = "fixed6")]
    pub accn: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub tool: String,
    pub version: String,
    pub run_id: String,
    pub method: String,
    pub seed: u64,
    pub config: ScenarioConfig,
    pub stages: Vec<StageReport>,
    pub summary: SummaryRow,
}

impl RunReport {
    pub fn to_json(&self) -> Result<String> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        Ok(text)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text).map_err(|e| Error::Parse {
            line: 0,
            message: format!("{}: {e}", path.display()),
        })
    }

    pub fn final_stage(&self) -> &StageReport {
        self.stages.last().expect("a run has at least one stage")
    }
}

/// Mean and sample standard deviation of final-stage metrics for one method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub method: String,
    pub runs: usize,
    pub final_stage: usize,
    pub n: usize,
    #[serde(with = "fixed6")]
    pub accuracy_mean: f64,
    #[serde(with = "fixed6")]
    pub accuracy_std: f64,
    #[serde(with = "fixed6")]
    pub accn_mean: f64,
    #[serde(with = "fixed6")]
    pub accn_std: f64,
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// One row per method, in order of first appearance.
pub fn comparison_table(runs: &[RunReport]) -> Vec<ComparisonRow> {
    let mut order: Vec<&str> = Vec::new();
    let mut by_method: BTreeMap<&str, Vec<&RunReport>> = BTreeMap::new();
    for run in runs {
        if !by_method.contains_key(run.method.as_str()) {
            order.push(&run.method);
        }
        by_method.entry(&run.method).or_default().push(run);
    }
    order
        .into_iter()
        .map(|method| {
            let group = &by_method[method];
            let acc: Vec<f64> = group.iter().map(|r| r.final_stage().accuracy).collect();
            let accn: Vec<f64> = group.iter().map(|r| r.final_stage().accn).collect();
            let (accuracy_mean, accuracy_std) = mean_std(&acc);
            let (accn_mean, accn_std) = mean_std(&accn);
            let last = group[0].final_stage();
            ComparisonRow {
                method: method.to_string(),
                runs: group.len(),
                final_stage: last.stage,
                n: last.n,
                accuracy_mean,
                accuracy_std,
                accn_mean,
                accn_std,
            }
        })
        .collect()
}

const CSV_HEADER: [&str; 10] = [
    "run_id",
    "seed",
    "stage",
    "N",
    "accuracy",
    "accn",
    "ideal_accn",
    "method",
    "accuracy_std",
    "accn_std",
];

fn f6(v: f64) -> String {
    format!("{v:.6}")
}

/// Per-(run, stage) rows followed by one `seed = mean` row per method.
pub fn summary_csv(runs: &[RunReport], table: &[ComparisonRow]) -> Result<String> {
    let mut wtr = csv::Writer::from_writer(Vec::new());
    let csv_err = |e: csv::Error| Error::Argument(format!("csv encoding failed: {e}"));
    wtr.write_record(CSV_HEADER).map_err(csv_err)?;
    for run in runs {
        for st in &run.stages {
            wtr.write_record([
                run.run_id.clone(),
                run.seed.to_string(),
                st.stage.to_string(),
                st.n.to_string(),
                f6(st.accuracy),
                f6(st.accn),
                f6(st.ideal_accn),
                run.method.clone(),
                String::new(),
                String::new(),
            ])
            .map_err(csv_err)?;
        }
    }
    for row in table {
        wtr.write_record([
            row.method.clone(),
            "mean".to_string(),
            row.final_stage.to_string(),
            row.n.to_string(),
            f6(row.accuracy_mean),
            f6(row.accn_mean),
            f6(row.n as f64),
            row.method.clone(),
            f6(row.accuracy_std),
            f6(row.accn_std),
        ])
        .map_err(csv_err)?;
    }
    let bytes = wtr
        .into_inner()
        .map_err(|e| Error::Argument(format!("csv encoding failed: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn write_summary_csv(
    runs: &[RunReport],
    table: &[ComparisonRow],
    path: impl AsRef<Path>,
) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, summary_csv(runs, table)?).map_err(|e| Error::io(path, e))
}

/// Wall-clock seconds per (run, stage); kept apart from the deterministic reports.
pub fn timings_csv(runs: &[RunReport]) -> String {
    let mut out = String::from("run_id,stage,wall_seconds\n");
    for run in runs {
        for st in &run.stages {
            out.push_str(&format!("{},{},{:.3}\n", run.run_id, st.stage, st.wall_seconds));
        }
    }
    out
}
