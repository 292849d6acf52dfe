use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::info;

use inkrementa::data::write_csv;
use inkrementa::harness::{
    comparison_table, load_matrix, preset, run_ablation, run_scenario_with_model, timings_csv,
    write_summary_csv, DataSource, RunReport, ScenarioConfig,
};
use inkrementa::{Error, Result};

#[derive(Parser)]
#[command(name = "inkrementa", version, about = "Class-incremental learning scenarios and ablations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Scenario config (JSON). Without it the built-in 55-class synthetic scenario is used.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Stage order of the built-in scenario (1-4); ignored with --config.
    #[arg(long, default_value_t = 1)]
    user: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Write the synthetic train/test sets of a scenario as CSV.
    GenData {
        #[command(flatten)]
        common: Common,
    },
    /// Run one scenario and write its report.
    Run {
        #[command(flatten)]
        common: Common,
        /// Also write the final model, its input standardizer and class ids.
        #[arg(long)]
        save_model: bool,
    },
    /// Run a matrix of stage-update variants over several seeds.
    Ablate {
        #[command(flatten)]
        common: Common,
        /// JSON array of variants.
        #[arg(long, conflicts_with = "preset")]
        matrix: Option<PathBuf>,
        /// Built-in matrix: components, distill or norm.
        #[arg(long, default_value = "components")]
        preset: String,
        /// Number of seeds, starting at the config seed.
        #[arg(long, default_value_t = 3)]
        seeds: usize,
    },
    /// Merge run report JSON files into one summary CSV.
    Report {
        #[arg(required = true)]
        runs: Vec<PathBuf>,
        /// Output CSV path.
        #[arg(long, default_value = "summary.csv")]
        out: PathBuf,
    },
}

fn load_config(common: &Common) -> Result<ScenarioConfig> {
    let mut config = match &common.config {
        Some(path) => ScenarioConfig::load(path)?,
        None => ScenarioConfig::default_synthetic(common.seed.unwrap_or(0), common.user)
            .map_err(|e| Error::Config(e.to_string()))?,
    };
    if let Some(seed) = common.seed {
        config.seed = seed;
    }
    config.validate()?;
    Ok(config)
}

fn out_dir(common: &Common, config: &ScenarioConfig) -> Result<PathBuf> {
    let dir = common
        .out
        .clone()
        .or_else(|| config.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    Ok(dir)
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn write_runs(dir: &Path, runs: &[RunReport]) -> Result<()> {
    for run in runs {
        run.write(dir.join(format!("{}.json", run.run_id)))?;
    }
    let table = comparison_table(runs);
    write_summary_csv(runs, &table, dir.join("summary.csv"))?;
    write_text(&dir.join("timings.csv"), &timings_csv(runs))?;
    for row in &table {
        println!(
            "{:<24} runs={} N={} accuracy={:.4}±{:.4} ACCN={:.3}±{:.3}",
            row.method, row.runs, row.n, row.accuracy_mean, row.accuracy_std, row.accn_mean, row.accn_std
        );
    }
    Ok(())
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::GenData { common } => {
            let config = load_config(&common)?;
            let DataSource::Synthetic(s) = &config.data else {
                return Err(Error::Config("gen-data needs a synthetic data section".into()));
            };
            let (train, test) = inkrementa::data::generate_synthetic(&s.to_spec(config.seed))?;
            let dir = out_dir(&common, &config)?;
            write_csv(&train, dir.join("train.csv"), false)?;
            write_csv(&test, dir.join("test.csv"), false)?;
            info!("wrote {} train and {} test rows to {}", train.len(), test.len(), dir.display());
        }
        Command::Run { common, save_model } => {
            let config = load_config(&common)?;
            let dir = out_dir(&common, &config)?;
            let trained = run_scenario_with_model(&config)?;
            let report = trained.report;
            if save_model {
                let id = &report.run_id;
                trained.model.save(dir.join(format!("{id}.model.json")))?;
                let extras = serde_json::json!({
                    "standardizer": trained.standardizer,
                    "original_labels": trained.original_labels,
                });
                write_text(
                    &dir.join(format!("{id}.inputs.json")),
                    &serde_json::to_string_pretty(&extras)?,
                )?;
            }
            for st in &report.stages {
                println!(
                    "stage {} N={:<3} accuracy={:.4} ACCN={:.3} ideal={:.0}",
                    st.stage, st.n, st.accuracy, st.accn, st.ideal_accn
                );
            }
            write_runs(&dir, &[report])?;
        }
        Command::Ablate {
            common,
            matrix,
            preset: name,
            seeds,
        } => {
            let config = load_config(&common)?;
            let dir = out_dir(&common, &config)?;
            let variants = match matrix {
                Some(path) => load_matrix(path)?,
                None => preset(&name)?,
            };
            let result = run_ablation(&config, &variants, seeds)?;
            write_runs(&dir, &result.runs)?;
        }
        Command::Report { runs, out } => {
            let reports = runs
                .iter()
                .map(RunReport::load)
                .collect::<Result<Vec<_>>>()?;
            let table = comparison_table(&reports);
            write_summary_csv(&reports, &table, &out)?;
            info!("merged {} runs into {}", reports.len(), out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
