use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use eqnn::circuit::Rescale;
use eqnn::data::{self, Dataset, DatasetKind, Target};
use eqnn::optim::{initial_weights, minimize, OptimizerConfig, OptimizerKind, TrainTrace};
use eqnn::qnn::{
    accuracy, LossKind, ModelKind, Prediction, QnnModel, QnnObjective,
};

use crate::report::{
    to_json, DatasetInfo, GateCountTable, GateCounts, RunReport, SCHEMA_VERSION,
};
use crate::{write_atomic, CliError};

pub const DEFAULT_ITERS: usize = 100;
pub const DEFAULT_FIT_SAMPLES: usize = 200;
pub const DEFAULT_PER_CLASS: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Linear,
    Sigmoid,
    Tanh,
}

impl Activation {
    pub const ALL: [Activation; 3] = [Activation::Linear, Activation::Sigmoid, Activation::Tanh];

    pub fn name(self) -> &'static str {
        match self {
            Activation::Linear => "linear",
            Activation::Sigmoid => "sigmoid",
            Activation::Tanh => "tanh",
        }
    }

    pub fn dataset(self, n: usize, seed: u64) -> eqnn::Result<Dataset> {
        match self {
            Activation::Linear => data::gen_linear(n, seed),
            Activation::Sigmoid => data::gen_sigmoid(n, seed),
            Activation::Tanh => data::gen_tanh(n, seed),
        }
    }
}

/// Settings shared by `fit-activation`, `train` and `reproduce`.
#[derive(Debug, Clone, Copy)]
pub struct RunSettings {
    pub optimizer: OptimizerKind,
    pub iters: usize,
    pub seed: u64,
    pub rescale: Rescale,
    /// Sample this many measurement shots when scoring the trained model.
    pub shots: Option<u64>,
}

impl RunSettings {
    pub fn new(optimizer: OptimizerKind, seed: u64) -> Self {
        Self {
            optimizer,
            iters: DEFAULT_ITERS,
            seed,
            rescale: Rescale::Standard,
            shots: None,
        }
    }

    fn config(&self) -> OptimizerConfig {
        OptimizerConfig::new(self.optimizer)
            .max_iters(self.iters)
            .seed(self.seed)
    }
}

fn rescale_name(r: Rescale) -> &'static str {
    match r {
        Rescale::Standard => "paper",
        Rescale::Wide => "wide",
    }
}

/// Estimates `[P(even), P(odd)]` from `shots` draws.
fn sample_parity(exact: [f64; 2], shots: u64, rng: &mut ChaCha8Rng) -> [f64; 2] {
    let odd = (0..shots).filter(|_| rng.random::<f64>() < exact[1]).count() as f64;
    let n = shots as f64;
    [(n - odd) / n, odd / n]
}

fn parity_of(pred: Prediction) -> [f64; 2] {
    match pred {
        Prediction::Classes(p) => p,
        Prediction::Regression(y) => [(1.0 + y) / 2.0, (1.0 - y) / 2.0],
    }
}

/// Accuracy from sampled measurements instead of exact probabilities.
fn sampled_accuracy(
    model: &QnnModel,
    w: &[f64],
    dataset: &Dataset,
    shots: u64,
    seed: u64,
) -> eqnn::Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut correct = 0usize;
    for s in dataset.samples() {
        let p = sample_parity(parity_of(model.forward(&s.features, w)?), shots, &mut rng);
        let class = u8::from(p[1] > p[0]);
        if s.target == Target::Label(class) {
            correct += 1;
        }
    }
    Ok(correct as f64 / dataset.len() as f64)
}

fn score(model: &QnnModel, w: &[f64], dataset: &Dataset, settings: &RunSettings) -> eqnn::Result<f64> {
    match settings.shots {
        Some(shots) => sampled_accuracy(model, w, dataset, shots, settings.seed),
        None => accuracy(model, w, dataset),
    }
}

fn optimize(
    model: &QnnModel,
    dataset: &Dataset,
    loss: LossKind,
    settings: &RunSettings,
) -> Result<TrainTrace, CliError> {
    let objective = QnnObjective::new(model, dataset, loss)?;
    let w0 = initial_weights(model.n_weights(), settings.seed);
    Ok(minimize(&objective, &w0, &settings.config())?)
}

fn base_report(
    model_name: &str,
    model: &QnnModel,
    dataset: &Dataset,
    settings: &RunSettings,
    trace: TrainTrace,
    started: Instant,
) -> RunReport {
    RunReport {
        schema: SCHEMA_VERSION,
        model: model_name.to_string(),
        optimizer: settings.optimizer.name().to_string(),
        seed: settings.seed,
        target: None,
        dataset: DatasetInfo {
            generator: dataset.provenance().generator.clone(),
            seed: dataset.provenance().seed,
            samples: dataset.len(),
        },
        rescale: rescale_name(settings.rescale).to_string(),
        shots: settings.shots,
        gate_counts: GateCounts::of(model),
        iterations: trace.iterations(),
        evaluations: trace.evaluations,
        initial_loss: trace.initial_loss,
        final_loss: trace.final_loss(),
        accuracy: None,
        train_accuracy: None,
        loss_history: trace.losses,
        trained_weights: trace.final_weights,
        wall_time: started.elapsed().as_secs_f64(),
    }
}

pub struct FitOutcome {
    pub report: RunReport,
    /// `(x, y_true, y_pred)` sorted by `x`.
    pub curve: Vec<(f64, f64, f64)>,
}

impl FitOutcome {
    pub fn curve_csv(&self) -> String {
        let mut s = String::from("x,y_true,y_pred\n");
        for (x, y, p) in &self.curve {
            writeln!(s, "{x},{y},{p}").unwrap();
        }
        s
    }

    pub fn write(&self, prefix: &Path) -> std::io::Result<()> {
        write_atomic(&with_suffix(prefix, "_fit.csv"), self.curve_csv().as_bytes())?;
        write_atomic(&with_suffix(prefix, "_report.json"), to_json(&self.report).as_bytes())
    }
}

/// Trains the one-qubit model on an activation-function dataset.
pub fn fit_activation(
    target: Activation,
    samples: usize,
    settings: &RunSettings,
) -> Result<FitOutcome, CliError> {
    let started = Instant::now();
    let model = ModelKind::SingleQubit.build(settings.rescale)?;
    let dataset = target.dataset(samples, settings.seed)?;
    let trace = optimize(&model, &dataset, LossKind::SquaredError, settings)?;
    let w = trace.final_weights.clone();

    let mut rng = ChaCha8Rng::seed_from_u64(settings.seed);
    let mut curve = Vec::with_capacity(dataset.len());
    for s in dataset.samples() {
        let exact = parity_of(model.forward(&s.features, &w)?);
        let p = match settings.shots {
            Some(shots) => sample_parity(exact, shots, &mut rng),
            None => exact,
        };
        let Target::Value(y) = s.target else {
            unreachable!("activation datasets are regression sets")
        };
        curve.push((s.features[0], y, p[0] - p[1]));
    }
    curve.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut report = base_report(
        ModelKind::SingleQubit.name(),
        &model,
        &dataset,
        settings,
        trace,
        started,
    );
    report.target = Some(target.name().to_string());
    report.wall_time = started.elapsed().as_secs_f64();
    Ok(FitOutcome { report, curve })
}

/// Trains a two-qubit classifier with cross-entropy. With `split`, the model
/// is trained on that fraction of a seeded shuffle and `accuracy` is measured
/// on the remainder.
pub fn train(
    model_kind: ModelKind,
    dataset: &Dataset,
    settings: &RunSettings,
    split: Option<f64>,
) -> Result<RunReport, CliError> {
    let started = Instant::now();
    if dataset.kind() != DatasetKind::Classification {
        return Err(CliError::Usage(
            "train needs a two-class classification dataset".into(),
        ));
    }
    if dataset.n_features() != 2 {
        return Err(CliError::Usage(format!(
            "train needs 2 features per sample, the dataset has {}",
            dataset.n_features()
        )));
    }
    let model = model_kind.build(settings.rescale)?;
    let (train_set, held_out) = match split {
        Some(f) => {
            let (a, b) = dataset.shuffle_split(f, settings.seed)?;
            if a.is_empty() || b.is_empty() {
                return Err(CliError::Usage(format!(
                    "split {f} leaves an empty train or test set"
                )));
            }
            (a, Some(b))
        }
        None => (dataset.clone(), None),
    };
    let trace = optimize(&model, &train_set, LossKind::CrossEntropy, settings)?;
    let w = trace.final_weights.clone();
    let train_acc = score(&model, &w, &train_set, settings)?;
    let mut report = base_report(model_kind.name(), &model, &train_set, settings, trace, started);
    match held_out {
        Some(test) => {
            report.accuracy = Some(score(&model, &w, &test, settings)?);
            report.train_accuracy = Some(train_acc);
        }
        None => report.accuracy = Some(train_acc),
    }
    report.wall_time = started.elapsed().as_secs_f64();
    Ok(report)
}

pub fn loss_csv(report: &RunReport) -> String {
    let mut s = String::from("iteration,loss\n");
    for (i, l) in report.loss_history.iter().enumerate() {
        writeln!(s, "{},{l}", i + 1).unwrap();
    }
    s
}

pub fn write_train(report: &RunReport, prefix: &Path) -> std::io::Result<()> {
    write_atomic(&with_suffix(prefix, "_loss.csv"), loss_csv(report).as_bytes())?;
    write_atomic(&with_suffix(prefix, "_report.json"), to_json(report).as_bytes())
}

pub fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_os_string();
    s.push(suffix);
    PathBuf::from(s)
}

#[derive(Debug, Clone, Serialize)]
pub struct AccuracyEntry {
    pub model: String,
    pub optimizer: String,
    pub accuracy: f64,
    pub final_loss: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct AccuracyTable {
    pub schema: u32,
    pub seed: u64,
    pub iterations: usize,
    pub dataset: DatasetInfo,
    pub entries: Vec<AccuracyEntry>,
}

#[derive(Debug)]
pub struct Reproduction {
    pub gate_counts: GateCountTable,
    pub accuracy: AccuracyTable,
    pub fits: Vec<RunReport>,
    pub failures: Vec<String>,
}

fn summary_markdown(r: &Reproduction) -> String {
    let mut s = String::from("# Reproduction summary\n\n## Gate counts\n\n");
    s.push_str("| | ");
    s.push_str(
        &r.gate_counts
            .models
            .iter()
            .map(|m| m.model)
            .collect::<Vec<_>>()
            .join(" | "),
    );
    s.push_str(" |\n|---|");
    s.push_str(&"---|".repeat(r.gate_counts.models.len()));
    s.push('\n');
    type Pick = fn(&GateCounts) -> usize;
    let rows: [(&str, Pick); 3] = [
        ("feature map", |c| c.feature_map),
        ("variational", |c| c.variational),
        ("total", |c| c.total),
    ];
    for (label, pick) in rows {
        write!(s, "| {label} |").unwrap();
        for m in &r.gate_counts.models {
            write!(s, " {} |", pick(&m.counts)).unwrap();
        }
        s.push('\n');
    }

    writeln!(
        s,
        "\n## Accuracy ({} iterations, seed {}, {} samples)\n",
        r.accuracy.iterations, r.accuracy.seed, r.accuracy.dataset.samples
    )
    .unwrap();
    s.push_str("| optimizer |");
    for m in ModelKind::CLASSIFIERS {
        write!(s, " {} |", m.name()).unwrap();
    }
    s.push_str("\n|---|");
    s.push_str(&"---|".repeat(ModelKind::CLASSIFIERS.len()));
    s.push('\n');
    for opt in OptimizerKind::ALL {
        write!(s, "| {} |", opt.name()).unwrap();
        for m in ModelKind::CLASSIFIERS {
            let cell = r
                .accuracy
                .entries
                .iter()
                .find(|e| e.model == m.name() && e.optimizer == opt.name())
                .map_or("failed".to_string(), |e| format!("{:.1}%", 100.0 * e.accuracy));
            write!(s, " {cell} |").unwrap();
        }
        s.push('\n');
    }

    s.push_str("\n## Activation fits\n\n| target | optimizer | trained w | final MSE |\n|---|---|---|---|\n");
    for f in &r.fits {
        writeln!(
            s,
            "| {} | {} | {:.8} | {:.3e} |",
            f.target.as_deref().unwrap_or("?"),
            f.optimizer,
            f.trained_weights[0],
            f.final_loss
        )
        .unwrap();
    }
    if !r.failures.is_empty() {
        s.push_str("\n## Failures\n\n");
        for f in &r.failures {
            writeln!(s, "- {f}").unwrap();
        }
    }
    s
}

/// Runs the gate-count table, the 4 × 3 model/optimizer matrix and the three
/// activation fits, writing every artifact into `out_dir`. Matrix cells run
/// in parallel; each owns its model, dataset copy and seeded generators, so
/// results match a sequential run.
pub fn reproduce(seed: u64, iters: usize, out_dir: &Path) -> Result<Reproduction, CliError> {
    std::fs::create_dir_all(out_dir).map_err(|e| CliError::io(out_dir, e))?;

    let gate_counts = GateCountTable::new(&ModelKind::CLASSIFIERS)?;
    let p = out_dir.join("table2.json");
    write_atomic(&p, to_json(&gate_counts).as_bytes()).map_err(|e| CliError::io(&p, e))?;

    let dataset = data::gen_two_class_usage(DEFAULT_PER_CLASS, seed)?;
    let cells: Vec<(ModelKind, OptimizerKind)> = ModelKind::CLASSIFIERS
        .into_iter()
        .flat_map(|m| OptimizerKind::ALL.into_iter().map(move |o| (m, o)))
        .collect();

    let results: Vec<Result<RunReport, String>> = cells
        .par_iter()
        .map(|&(m, o)| {
            let local = dataset.clone();
            let settings = RunSettings {
                iters,
                ..RunSettings::new(o, seed)
            };
            let name = format!("{}_{}", m.name(), o.name());
            let report = train(m, &local, &settings, None).map_err(|e| format!("{name}: {e}"))?;
            let prefix = out_dir.join(&name);
            write_train(&report, &prefix).map_err(|e| format!("{name}: {e}"))?;
            Ok(report)
        })
        .collect();

    let mut failures = Vec::new();
    let mut entries = Vec::new();
    for r in results {
        match r {
            Ok(report) => entries.push(AccuracyEntry {
                model: report.model.clone(),
                optimizer: report.optimizer.clone(),
                accuracy: report.accuracy.unwrap_or(f64::NAN),
                final_loss: report.final_loss,
                iterations: report.iterations,
            }),
            Err(e) => failures.push(e),
        }
    }
    let accuracy = AccuracyTable {
        schema: SCHEMA_VERSION,
        seed,
        iterations: iters,
        dataset: DatasetInfo {
            generator: dataset.provenance().generator.clone(),
            seed: dataset.provenance().seed,
            samples: dataset.len(),
        },
        entries,
    };
    let p = out_dir.join("table3.json");
    write_atomic(&p, to_json(&accuracy).as_bytes()).map_err(|e| CliError::io(&p, e))?;

    let fit_results: Vec<Result<RunReport, String>> = Activation::ALL
        .par_iter()
        .map(|&a| {
            let settings = RunSettings {
                iters,
                ..RunSettings::new(OptimizerKind::Aqgd, seed)
            };
            let name = format!("fit_{}", a.name());
            let outcome = fit_activation(a, DEFAULT_FIT_SAMPLES, &settings)
                .map_err(|e| format!("{name}: {e}"))?;
            outcome
                .write(&out_dir.join(&name))
                .map_err(|e| format!("{name}: {e}"))?;
            Ok(outcome.report)
        })
        .collect();
    let mut fits = Vec::new();
    for r in fit_results {
        match r {
            Ok(rep) => fits.push(rep),
            Err(e) => failures.push(e),
        }
    }

    let reproduction = Reproduction {
        gate_counts,
        accuracy,
        fits,
        failures,
    };
    let p = out_dir.join("summary.md");
    write_atomic(&p, summary_markdown(&reproduction).as_bytes()).map_err(|e| CliError::io(&p, e))?;
    Ok(reproduction)
}
