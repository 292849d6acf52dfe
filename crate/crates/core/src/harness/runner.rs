use std::time::Instant;

use log::info;

use crate::continual::{
    build_exemplar_store, ccs_stage_update, train_epochs, ExemplarStore, StageContext,
};
use crate::data::{generate_synthetic, load_csv, split_stages, LabeledDataset, StageSplit, Standardizer};
use crate::error::{Error, Result};
use crate::model::IncModel;
use crate::numkit::{DistillLoss, SeededRng};

use super::metrics::{accn, evaluate};
use super::report::{RunReport, StageReport, SummaryRow, TOOL_NAME, TOOL_VERSION};
use super::{DataSource, ScenarioConfig};

/// Split, remapped and standardized stage data for one run.
#[derive(Debug, Clone)]
pub struct PreparedData {
    pub split: StageSplit,
    pub standardizer: Standardizer,
}

impl PreparedData {
    pub fn input_dim(&self) -> usize {
        self.split.stages[0].train.dim()
    }
}

/// Loads or generates the data, splits it by the stage plan and standardizes
/// every split with statistics of the first stage's training pool.
pub fn prepare_data(config: &ScenarioConfig) -> Result<PreparedData> {
    config.validate()?;
    let (train, test) = match &config.data {
        DataSource::Synthetic(s) => generate_synthetic(&s.to_spec(config.seed))?,
        DataSource::Csv(c) => (
            load_csv(&c.train, c.has_header)?,
            load_csv(&c.test, c.has_header)?,
        ),
    };
    if train.dim() != test.dim() {
        return Err(Error::Parse {
            line: 0,
            message: format!(
                "train has {} features but test has {}",
                train.dim(),
                test.dim()
            ),
        });
    }
    let mut split = split_stages(&train, &test, &config.plan()?)?;
    let standardizer = Standardizer::fit(&split.stages[0].train)?;
    for st in &mut split.stages {
        st.train = standardizer.apply(&st.train)?;
        st.test = standardizer.apply(&st.test)?;
    }
    Ok(PreparedData {
        split,
        standardizer,
    })
}

fn stage_report(
    stage: usize,
    model: &IncModel,
    tests: &[&LabeledDataset],
    epoch_losses: Vec<f64>,
    started: Instant,
) -> Result<StageReport> {
    let eval = evaluate(model, tests)?;
    let n = model.num_classes();
    Ok(StageReport {
        stage,
        n,
        accuracy: eval.overall,
        per_group_accuracy: eval.per_group,
        accn: accn(n, eval.overall)?,
        ideal_accn: n as f64,
        epoch_losses,
        wall_seconds: started.elapsed().as_secs_f64(),
    })
}

/// Runs every stage of the scenario on already prepared data.
pub fn run_prepared(config: &ScenarioConfig, data: &PreparedData, run_id: &str) -> Result<RunReport> {
    run_stages(config, data, run_id).map(|(report, _)| report)
}

fn run_stages(config: &ScenarioConfig, data: &PreparedData, run_id: &str) -> Result<(RunReport, IncModel)> {
    let input_dim = data.input_dim();
    let model_config = config.model.to_model_config(input_dim);
    model_config.validate()?;
    let ccs = &config.ccs;
    let mut rng = SeededRng::new(config.seed).derive(10);
    let stages = &data.split.stages;
    let wrap = |stage: usize| move |e: Error| Error::Stage {
        stage,
        source: Box::new(e),
    };

    let started = Instant::now();
    let first = &stages[0];
    let (mut model, mut store, losses) = (|| {
        let mut model = IncModel::init(model_config.clone(), first.train.class_ids().len(), &mut rng)?;
        let losses = train_epochs(
            &mut model,
            &first.train,
            None,
            0.0,
            DistillLoss::Mse,
            &model_config,
            &mut rng,
        )?;
        let store = build_exemplar_store(&model, &first.train, ccs.k, None::<&ExemplarStore>)?;
        Ok::<_, Error>((model, store, losses))
    })()
    .map_err(wrap(0))?;
    let mut reports = vec![stage_report(0, &model, &[&first.test], losses, started).map_err(wrap(0))?];
    info!(
        "{run_id} stage 0: N={} accuracy={:.4}",
        reports[0].n, reports[0].accuracy
    );

    for (i, st) in stages.iter().enumerate().skip(1) {
        let started = Instant::now();
        let u = model.num_classes();
        let v = st.train.class_ids().len();
        let outcome = StageContext::new(
            u,
            v,
            ccs.toggles(),
            ccs.distill_loss,
            ccs.wa_norm,
            ccs.k,
            ccs.alpha_override,
        )
        .and_then(|ctx| ccs_stage_update(&model, &st.train, &store, &ctx, &model_config, &mut rng))
        .map_err(wrap(i))?;
        model = outcome.model;
        store = outcome.store;
        let tests: Vec<&LabeledDataset> = stages[..=i].iter().map(|s| &s.test).collect();
        let report = stage_report(i, &model, &tests, outcome.epoch_losses, started).map_err(wrap(i))?;
        info!("{run_id} stage {i}: N={} accuracy={:.4}", report.n, report.accuracy);
        reports.push(report);
    }

    let last = reports.last().expect("at least one stage");
    let summary = SummaryRow {
        final_stage: last.stage,
        n: last.n,
        accuracy: last.accuracy,
        accn: last.accn,
    };
    let report = RunReport {
        tool: TOOL_NAME.into(),
        version: TOOL_VERSION.into(),
        run_id: run_id.into(),
        method: ccs.toggles().label(),
        seed: config.seed,
        config: config.clone(),
        stages: reports,
        summary,
    };
    Ok((report, model))
}

/// Prepares data and runs all stages. The run id is `<method>-seed<seed>`.
pub fn run_scenario(config: &ScenarioConfig) -> Result<RunReport> {
    run_scenario_with_model(config).map(|t| t.report)
}

/// A finished run together with what is needed to use its model on raw inputs.
#[derive(Debug, Clone)]
pub struct TrainedRun {
    pub report: RunReport,
    /// Expects inputs transformed by `standardizer`; predicts local class ids.
    pub model: IncModel,
    pub standardizer: Standardizer,
    /// Original class id of each local class id.
    pub original_labels: Vec<usize>,
}

/// Like [`run_scenario`], also returning the final model.
pub fn run_scenario_with_model(config: &ScenarioConfig) -> Result<TrainedRun> {
    let data = prepare_data(config)?;
    let run_id = format!("{}-seed{}", config.ccs.toggles().label(), config.seed);
    let (report, model) = run_stages(config, &data, &run_id)?;
    let map = &data.split.label_map;
    let original_labels = (0..map.len())
        .map(|l| map.original(l).expect("local ids are contiguous"))
        .collect();
    Ok(TrainedRun {
        report,
        model,
        standardizer: data.standardizer,
        original_labels,
    })
}
