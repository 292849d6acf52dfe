//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits non-zero
//! if any criterion fails.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use inkrementa::continual::{
    alignment_factor, build_exemplar_store, ccs_stage_update, herding_select, train_epochs,
    weight_align, StageContext, Toggles,
};
use inkrementa::data::{generate_synthetic, split_stages, StagePlan, SyntheticSpec};
use inkrementa::harness::{accn, preset, run_ablation, run_scenario, RunReport, ScenarioConfig};
use inkrementa::model::{IncModel, ModelConfig};
use inkrementa::numkit::{vec_norm, DistillLoss, Matrix2D, NormKind, SeededRng};

const BASE_SEED: u64 = 0;
const SEEDS: usize = 3;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn within(elapsed: Duration, limit_secs: u64) -> bool {
    elapsed <= Duration::from_secs(limit_secs)
}

// gradients

fn gradient_oracle() -> Outcome {
    let started = Instant::now();
    let config = ModelConfig {
        input_dim: 6,
        hidden_dims: vec![5],
        learning_rate: 0.1,
        batch_size: 4,
        epochs_per_stage: 1,
    };
    let mut rng = SeededRng::new(2024);
    let old = IncModel::init(config, 3, &mut rng).unwrap();
    let teacher = old.snapshot();
    let mut student = old.clone();
    student.expand_head(2, &mut rng).unwrap();

    let xs: Vec<Vec<f64>> = (0..4).map(|_| (0..6).map(|_| rng.normal()).collect()).collect();
    let inputs: Vec<&[f64]> = xs.iter().map(|x| x.as_slice()).collect();
    let labels = [0usize, 4, 2, 3];
    let alpha = 0.1 * 15.0 / 25.0;
    let h = 1e-5;

    let cases: [(&str, f64, Option<DistillLoss>); 4] = [
        ("CE", 0.0, None),
        ("CE+MSE", alpha, Some(DistillLoss::Mse)),
        ("CE+KLD", alpha, Some(DistillLoss::Kld)),
        ("CE+L1", alpha, Some(DistillLoss::L1)),
    ];
    let mut worst = 0.0f64;
    let mut failures = Vec::new();
    for (name, a, loss) in cases {
        let t = loss.map(|_| &teacher);
        let d = loss.unwrap_or(DistillLoss::Mse);
        let (_, grads) = student.gradients(&inputs, &labels, t, a, d).unwrap();
        let analytic = grads.flatten();
        let base = student.parameters();
        let mut probe = student.clone();
        let mut case_worst = 0.0f64;
        for i in 0..base.len() {
            let mut p = base.clone();
            p[i] = base[i] + h;
            probe.set_parameters(&p).unwrap();
            let up = probe.batch_loss(&inputs, &labels, t, a, d).unwrap();
            p[i] = base[i] - h;
            probe.set_parameters(&p).unwrap();
            let down = probe.batch_loss(&inputs, &labels, t, a, d).unwrap();
            let numeric = (up - down) / (2.0 * h);
            let scale = analytic[i].abs().max(numeric.abs()).max(1e-7);
            case_worst = case_worst.max((analytic[i] - numeric).abs() / scale);
        }
        if case_worst > 1e-4 {
            failures.push(format!("{name} rel err {case_worst:.2e}"));
        }
        worst = worst.max(case_worst);
    }
    let elapsed = started.elapsed();
    outcome(
        failures.is_empty() && within(elapsed, 10),
        format!(
            "4 loss configs, alpha={alpha}, worst relative error {worst:.2e}, {:.2}s {}",
            elapsed.as_secs_f64(),
            failures.join("; ")
        ),
    )
}

// herding

fn manual_embedding(model: &IncModel, x: &[f64]) -> Vec<f64> {
    let mut a = x.to_vec();
    for layer in model.hidden_layers() {
        let w = layer.weights();
        a = (0..w.rows())
            .map(|o| {
                let z: f64 = w.row(o).iter().zip(&a).map(|(wi, ai)| wi * ai).sum::<f64>() + layer.bias()[o];
                z.max(0.0)
            })
            .collect();
    }
    a
}

fn brute_force_herding(model: &IncModel, samples: &[Vec<f64>], k: usize) -> Vec<usize> {
    let normalized: Vec<Vec<f64>> = samples
        .iter()
        .map(|x| {
            let e = manual_embedding(model, x);
            let n = e.iter().map(|v| v * v).sum::<f64>().sqrt();
            if n == 0.0 {
                e
            } else {
                e.iter().map(|v| v / n).collect()
            }
        })
        .collect();
    let dim = normalized[0].len();
    let mut center = vec![0.0; dim];
    for e in &normalized {
        for (c, v) in center.iter_mut().zip(e) {
            *c += v;
        }
    }
    for c in &mut center {
        *c /= normalized.len() as f64;
    }
    let mut scored: Vec<(f64, usize)> = normalized
        .iter()
        .enumerate()
        .map(|(i, e)| {
            let d = e.iter().zip(&center).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
            (d, i)
        })
        .collect();
    scored.sort_by(|a, b| a.partial_cmp(b).unwrap());
    scored.into_iter().take(k).map(|(_, i)| i).collect()
}

fn herding_oracle() -> Outcome {
    let started = Instant::now();
    let mut rng = SeededRng::new(77);
    let mut mismatches = 0;
    let mut total_samples = 0;
    for _ in 0..50 {
        let input_dim = 2 + rng.below(10);
        let depth = rng.below(3);
        let hidden_dims: Vec<usize> = (0..depth).map(|_| 2 + rng.below(24)).collect();
        let config = ModelConfig {
            input_dim,
            hidden_dims,
            learning_rate: 0.1,
            batch_size: 1,
            epochs_per_stage: 1,
        };
        let model = IncModel::init(config, 3, &mut rng).unwrap();
        let n = 1 + rng.below(500);
        total_samples += n;
        let shift: Vec<f64> = (0..input_dim).map(|_| 3.0 * rng.normal()).collect();
        let samples: Vec<Vec<f64>> = (0..n)
            .map(|_| shift.iter().map(|s| s + rng.normal()).collect())
            .collect();
        let k = 1 + rng.below(40);
        let refs: Vec<&[f64]> = samples.iter().map(|s| s.as_slice()).collect();
        if herding_select(&model, &refs, k).unwrap() != brute_force_herding(&model, &samples, k) {
            mismatches += 1;
        }
    }
    let elapsed = started.elapsed();
    outcome(
        mismatches == 0 && within(elapsed, 30),
        format!(
            "50 instances, {total_samples} samples, {mismatches} mismatches, {:.2}s",
            elapsed.as_secs_f64()
        ),
    )
}

// weight aligning

fn weight_align_posts() -> Outcome {
    let mut rng = SeededRng::new(5);
    let mut worst = 0.0f64;
    let mut old_rows_ok = true;
    for _ in 0..100 {
        let u = 1 + rng.below(30);
        let v = 1 + rng.below(30);
        let cols = 1 + rng.below(40);
        let new_scale = 0.2 + 4.0 * rng.next_f64();
        let data: Vec<f64> = (0..(u + v) * cols)
            .map(|i| rng.normal() * if i >= u * cols { new_scale } else { 1.0 })
            .collect();
        let head = Matrix2D::from_vec(u + v, cols, data).unwrap();
        let aligned = weight_align(&head, u, v, NormKind::L2).unwrap();
        let old_mean = (0..u).map(|r| vec_norm(aligned.row(r), NormKind::L2).unwrap()).sum::<f64>() / u as f64;
        let new_mean = (u..u + v).map(|r| vec_norm(aligned.row(r), NormKind::L2).unwrap()).sum::<f64>() / v as f64;
        worst = worst.max((old_mean - new_mean).abs());
        let old_bits = |m: &Matrix2D| m.data()[..u * cols].iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        old_rows_ok &= old_bits(&aligned) == old_bits(&head);
    }
    let hand = Matrix2D::from_rows(&[vec![2.0, 0.0], vec![0.0, 2.0], vec![4.0, 0.0], vec![0.0, 4.0]]).unwrap();
    let gamma = alignment_factor(&hand, 2, 2, NormKind::L2).unwrap();
    outcome(
        worst <= 1e-9 && old_rows_ok && gamma == 0.5,
        format!("100 heads, worst |mean old - mean new| {worst:.2e}, old rows identical: {old_rows_ok}, hand gamma {gamma}"),
    )
}

// reduction

fn reduction_to_baseline() -> Outcome {
    let spec = SyntheticSpec {
        num_classes: 8,
        input_dim: 5,
        train_per_class: 30,
        test_per_class: 5,
        center_scale: 6.0,
        stddev: 1.0,
        seed: 21,
    };
    let (train, test) = generate_synthetic(&spec).unwrap();
    let plan = StagePlan::new(vec![vec![0, 1, 2, 3, 4], vec![5, 6, 7]]).unwrap();
    let split = split_stages(&train, &test, &plan).unwrap();
    let (old, new) = (&split.stages[0].train, &split.stages[1].train);
    let config = ModelConfig {
        input_dim: 5,
        hidden_dims: vec![16, 8],
        learning_rate: 0.03,
        batch_size: 7,
        epochs_per_stage: 4,
    };
    let mut rng = SeededRng::new(1);
    let mut prev = IncModel::init(config.clone(), 5, &mut rng).unwrap();
    train_epochs(&mut prev, old, None, 0.0, DistillLoss::Mse, &config, &mut rng).unwrap();
    let store = build_exemplar_store(&prev, old, 3, None).unwrap();

    let ctx = StageContext::new(5, 3, Toggles::NONE, DistillLoss::Kld, NormKind::L2, 3, None).unwrap();
    let mut rng_a = SeededRng::new(99);
    let updated = ccs_stage_update(&prev, new, &store, &ctx, &config, &mut rng_a).unwrap().model;

    // Plain fine-tuning on new data only, stepping the flat parameter vector by hand.
    let mut rng_b = SeededRng::new(99);
    let mut plain = prev.clone();
    plain.expand_head(3, &mut rng_b).unwrap();
    let mut order: Vec<usize> = (0..new.len()).collect();
    for _ in 0..config.epochs_per_stage {
        rng_b.shuffle(&mut order);
        for batch in order.chunks(config.batch_size) {
            let xs: Vec<&[f64]> = batch.iter().map(|&i| new.sample(i).0).collect();
            let ys: Vec<usize> = batch.iter().map(|&i| new.sample(i).1).collect();
            let (_, g) = plain.gradients(&xs, &ys, None, 0.0, DistillLoss::Mse).unwrap();
            let stepped: Vec<f64> = plain
                .parameters()
                .iter()
                .zip(g.flatten())
                .map(|(p, g)| p - config.learning_rate * g)
                .collect();
            plain.set_parameters(&stepped).unwrap();
        }
    }
    let a: Vec<u64> = updated.parameters().iter().map(|x| x.to_bits()).collect();
    let b: Vec<u64> = plain.parameters().iter().map(|x| x.to_bits()).collect();
    let differing = a.iter().zip(&b).filter(|(x, y)| x != y).count();
    outcome(
        differing == 0,
        format!("{} parameters compared, {differing} differ", a.len()),
    )
}

// scenario criteria

fn final_group_accuracy(r: &RunReport, group: usize) -> f64 {
    r.final_stage().per_group_accuracy[group]
}

fn mean(xs: impl IntoIterator<Item = f64>) -> f64 {
    let v: Vec<f64> = xs.into_iter().collect();
    v.iter().sum::<f64>() / v.len() as f64
}

struct Scenario {
    by_method: BTreeMap<String, Vec<RunReport>>,
    elapsed: Duration,
}

impl Scenario {
    fn runs(&self, method: &str) -> &[RunReport] {
        &self.by_method[method]
    }

    fn mean_final(&self, method: &str) -> f64 {
        mean(self.runs(method).iter().map(|r| r.final_stage().accuracy))
    }
}

fn component_ablation() -> Scenario {
    let started = Instant::now();
    let base = ScenarioConfig::default_synthetic(BASE_SEED, 1).unwrap();
    let result = run_ablation(&base, &preset("components").unwrap(), SEEDS).unwrap();
    let mut by_method: BTreeMap<String, Vec<RunReport>> = BTreeMap::new();
    for r in result.runs {
        by_method.entry(r.method.clone()).or_default().push(r);
    }
    Scenario {
        by_method,
        elapsed: started.elapsed(),
    }
}

fn forgetting(s: &Scenario) -> Outcome {
    let chance = 1.0 / 55.0 + 0.15;
    let baseline = s.runs("baseline");
    let group0: Vec<f64> = baseline.iter().map(|r| final_group_accuracy(r, 0)).collect();
    let base_mean = s.mean_final("baseline");
    let full_mean = s.mean_final("E+KD+WA");
    let ns: Vec<usize> = baseline[0].stages.iter().map(|st| st.n).collect();
    // Baseline and full runs are two of the six variants timed together.
    let share = s.elapsed.mul_f64(2.0 / 6.0);
    let pass = group0.iter().all(|&a| a < chance)
        && full_mean >= 2.0 * base_mean
        && ns == [15, 25, 35, 45, 55]
        && within(share, 600);
    outcome(
        pass,
        format!(
            "baseline group-0 final acc {group0:.3?} (< {chance:.3}); final acc full {full_mean:.4} vs baseline {base_mean:.4} (ratio {:.2}); N {ns:?}; ~{:.0}s",
            full_mean / base_mean,
            share.as_secs_f64()
        ),
    )
}

fn ablation_ordering(s: &Scenario) -> Outcome {
    let full = s.mean_final("E+KD+WA");
    let partial = ["E+KD", "E+WA", "E"].map(|m| s.mean_final(m));
    let best_partial = partial.iter().copied().fold(f64::MIN, f64::max);
    let no_exemplars = s.mean_final("KD+WA");
    let exemplar_variants = ["E", "E+KD", "E+WA", "E+KD+WA"];
    let dominated = exemplar_variants.iter().all(|m| s.mean_final(m) >= no_exemplars + 0.05);
    let table: Vec<String> = s
        .by_method
        .keys()
        .map(|m| format!("{m}={:.4}", s.mean_final(m)))
        .collect();
    outcome(
        full >= best_partial - 0.02 && dominated,
        format!("3-seed mean final acc: {}", table.join(", ")),
    )
}

fn accn_trend(s: &Scenario) -> Outcome {
    let mut rising = true;
    let mut ideal_ok = true;
    let mut curves = Vec::new();
    for r in s.runs("E+KD+WA") {
        let curve: Vec<f64> = r.stages.iter().map(|st| st.accn).collect();
        rising &= curve.windows(2).all(|w| w[1] > w[0]);
        let mut cumulative = 0;
        for (st, group) in r.stages.iter().zip(&r.config.stages) {
            cumulative += group.len();
            ideal_ok &= st.ideal_accn == cumulative as f64 && st.n == cumulative;
        }
        curves.push(format!("seed {}: {curve:.2?}", r.seed));
    }
    outcome(rising && ideal_ok, format!("{}; ideal curve exact: {ideal_ok}", curves.join("; ")))
}

fn sequence_robustness(s: &Scenario) -> (Outcome, Vec<RunReport>) {
    let mut lines = Vec::new();
    let mut pass = true;
    let mut extra = Vec::new();
    for user in 1..=4 {
        let (full, base) = if user == 1 {
            (
                s.runs("E+KD+WA")[0].clone(),
                s.runs("baseline")[0].clone(),
            )
        } else {
            let mut c = ScenarioConfig::default_synthetic(BASE_SEED, user).unwrap();
            let full = run_scenario(&c);
            c.ccs.set_toggles(Toggles::NONE);
            let base = run_scenario(&c);
            match (full, base) {
                (Ok(f), Ok(b)) => (f, b),
                (f, b) => {
                    pass = false;
                    lines.push(format!("user{user}: run failed ({:?} / {:?})", f.err(), b.err()));
                    continue;
                }
            }
        };
        let (fa, ba) = (full.final_stage().accuracy, base.final_stage().accuracy);
        pass &= full.stages.len() == 5 && fa > ba;
        lines.push(format!("user{user}: full {fa:.4} vs baseline {ba:.4}"));
        extra.push(full);
        extra.push(base);
    }
    (outcome(pass, lines.join(", ")), extra)
}

fn determinism() -> Outcome {
    let mut config = ScenarioConfig::default_synthetic(7, 3).unwrap();
    config.model.epochs_per_stage = 10;
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    run_scenario(&config).unwrap().write(&a).unwrap();
    run_scenario(&config).unwrap().write(&b).unwrap();
    let (ba, bb) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    outcome(ba == bb, format!("two runs, {} and {} bytes, identical: {}", ba.len(), bb.len(), ba == bb))
}

fn accn_arithmetic<'a>(reports: impl Iterator<Item = &'a RunReport>) -> Outcome {
    let mut count = 0;
    let mut worst = 0.0f64;
    for r in reports {
        for st in &r.stages {
            count += 1;
            worst = worst.max((st.accn - st.n as f64 * st.accuracy).abs());
        }
    }
    let spot = accn(25, 0.5856).unwrap();
    outcome(
        worst <= 1e-12 && (spot - 14.64).abs() <= 1e-12,
        format!("{count} stage reports, worst |ACCN - N*acc| {worst:.1e}; accn(25, 0.5856) = {spot}"),
    )
}

fn main() {
    let mut results: Vec<(&str, Outcome)> = Vec::new();
    let report = |name: &'static str, o: Outcome, results: &mut Vec<(&str, Outcome)>| {
        println!("{} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        results.push((name, o));
    };

    report("gradient-oracle", gradient_oracle(), &mut results);
    report("herding-oracle", herding_oracle(), &mut results);
    report("weight-align-postconditions", weight_align_posts(), &mut results);
    report("reduction-to-baseline", reduction_to_baseline(), &mut results);

    let scenario = component_ablation();
    report("forgetting-reproduction", forgetting(&scenario), &mut results);
    report("ablation-ordering", ablation_ordering(&scenario), &mut results);
    report("accn-trend", accn_trend(&scenario), &mut results);
    let (seq, extra) = sequence_robustness(&scenario);
    report("sequence-robustness", seq, &mut results);
    report("determinism", determinism(), &mut results);
    let all_reports = scenario.by_method.values().flatten().chain(extra.iter());
    report("accn-arithmetic", accn_arithmetic(all_reports), &mut results);

    let failed: Vec<&str> = results.iter().filter(|(_, o)| !o.pass).map(|(n, _)| *n).collect();
    println!(
        "acceptance: {} passed, {} failed",
        results.len() - failed.len(),
        failed.len()
    );
    if !failed.is_empty() {
        eprintln!("failed criteria: {}", failed.join(", "));
        std::process::exit(1);
    }
}
