use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use eqnn_cli::commands::{
    self, Activation, RunSettings, DEFAULT_FIT_SAMPLES, DEFAULT_ITERS, DEFAULT_PER_CLASS,
};
use eqnn_cli::dataset_csv;
use eqnn_cli::report::{to_json, CircuitJson, GateCountTable};
use eqnn_cli::{write_atomic, CliError};
use eqnn::circuit::Rescale;
use eqnn::data;
use eqnn::optim::OptimizerKind;
use eqnn::qnn::ModelKind;

#[derive(Parser)]
#[command(name = "eqnn", version, about = "Variational quantum neural network experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print feature-map, variational and total gate counts.
    GateCount {
        /// Model to count; all four classifiers when omitted.
        #[arg(long, value_enum)]
        model: Option<Model>,
        /// Print JSON instead of a table.
        #[arg(long)]
        json: bool,
        /// Also write the JSON table to this file.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = RescaleArg::Standard)]
        rescale: RescaleArg,
        /// Print each model's circuit as JSON and as a text diagram.
        #[arg(long)]
        dump_circuit: bool,
    },
    /// Fit the one-qubit model to an activation function.
    FitActivation {
        #[arg(long, value_enum)]
        target: Target,
        #[arg(long, default_value_t = DEFAULT_FIT_SAMPLES)]
        samples: usize,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Train a two-qubit classifier with cross-entropy.
    Train {
        #[arg(long, value_enum)]
        model: Model,
        /// Dataset CSV file.
        #[arg(long, conflicts_with = "gen", required_unless_present = "gen")]
        data: Option<PathBuf>,
        /// Generate the synthetic two-class usage set in-process.
        #[arg(long)]
        gen: bool,
        /// Write the dataset used to this CSV file.
        #[arg(long)]
        save_data: Option<PathBuf>,
        /// Train on this fraction of a seeded shuffle and report held-out accuracy.
        #[arg(long)]
        split: Option<f64>,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Run every table and curve: gate counts, the 4x3 accuracy matrix and the activation fits.
    Reproduce {
        #[arg(long, env = "EQNN_SEED", default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_ITERS)]
        iters: usize,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, value_enum, default_value_t = Optimizer::Aqgd)]
    optimizer: Optimizer,
    #[arg(long, default_value_t = DEFAULT_ITERS)]
    iters: usize,
    #[arg(long, env = "EQNN_SEED", default_value_t = 42)]
    seed: u64,
    /// Output prefix for the CSV and JSON files.
    #[arg(long)]
    out: PathBuf,
    /// Score the trained model from this many sampled shots instead of exact probabilities.
    #[arg(long)]
    shots: Option<u64>,
    #[arg(long, value_enum, default_value_t = RescaleArg::Standard)]
    rescale: RescaleArg,
    /// Print the trained model's circuit before running.
    #[arg(long)]
    dump_circuit: bool,
}

impl RunArgs {
    fn settings(&self) -> Result<RunSettings, CliError> {
        if self.iters == 0 {
            return Err(CliError::Usage("--iters must be at least 1".into()));
        }
        if self.shots == Some(0) {
            return Err(CliError::Usage("--shots must be at least 1".into()));
        }
        Ok(RunSettings {
            optimizer: self.optimizer.into(),
            iters: self.iters,
            seed: self.seed,
            rescale: self.rescale.into(),
            shots: self.shots,
        })
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Model {
    Benchmark,
    Eqnn1,
    Eqnn2,
    Eqnn3,
}

impl From<Model> for ModelKind {
    fn from(m: Model) -> Self {
        match m {
            Model::Benchmark => ModelKind::Benchmark,
            Model::Eqnn1 => ModelKind::Eqnn1,
            Model::Eqnn2 => ModelKind::Eqnn2,
            Model::Eqnn3 => ModelKind::Eqnn3,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Optimizer {
    Cobyla,
    Spsa,
    Aqgd,
}

impl From<Optimizer> for OptimizerKind {
    fn from(o: Optimizer) -> Self {
        match o {
            Optimizer::Cobyla => OptimizerKind::Cobyla,
            Optimizer::Spsa => OptimizerKind::Spsa,
            Optimizer::Aqgd => OptimizerKind::Aqgd,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Target {
    Linear,
    Sigmoid,
    Tanh,
}

impl From<Target> for Activation {
    fn from(t: Target) -> Self {
        match t {
            Target::Linear => Activation::Linear,
            Target::Sigmoid => Activation::Sigmoid,
            Target::Tanh => Activation::Tanh,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum RescaleArg {
    /// 2x - 1.5
    #[value(name = "paper")]
    Standard,
    /// 3x - 1.5
    Wide,
}

impl From<RescaleArg> for Rescale {
    fn from(r: RescaleArg) -> Self {
        match r {
            RescaleArg::Standard => Rescale::Standard,
            RescaleArg::Wide => Rescale::Wide,
        }
    }
}

fn dump_circuit(kind: ModelKind, rescale: Rescale) -> Result<(), CliError> {
    let model = kind.build(rescale)?;
    println!("{}:\n{}", kind.name(), model.circuit());
    print!("{}", to_json(&CircuitJson::from(model.circuit())));
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::GateCount {
            model,
            json,
            out,
            rescale,
            dump_circuit: dump,
        } => {
            let models: Vec<ModelKind> = match model {
                Some(m) => vec![m.into()],
                None => ModelKind::CLASSIFIERS.to_vec(),
            };
            if dump {
                for &m in &models {
                    dump_circuit(m, rescale.into())?;
                }
            }
            let table = GateCountTable::new(&models)?;
            let text = to_json(&table);
            if json {
                print!("{text}");
            } else {
                print!("{}", table.to_text());
            }
            if let Some(path) = out {
                write_atomic(&path, text.as_bytes()).map_err(|e| CliError::io(&path, e))?;
            }
        }
        Command::FitActivation {
            target,
            samples,
            run,
        } => {
            let settings = run.settings()?;
            if run.dump_circuit {
                dump_circuit(ModelKind::SingleQubit, settings.rescale)?;
            }
            let outcome = commands::fit_activation(target.into(), samples, &settings)?;
            outcome.write(&run.out).map_err(|e| CliError::io(&run.out, e))?;
            let r = &outcome.report;
            println!(
                "{} fit: w = {:.8}, final MSE = {:.6e} after {} iterations",
                r.target.as_deref().unwrap_or(""),
                r.trained_weights[0],
                r.final_loss,
                r.iterations
            );
        }
        Command::Train {
            model,
            data,
            gen,
            save_data,
            split,
            run,
        } => {
            let settings = run.settings()?;
            if run.dump_circuit {
                dump_circuit(model.into(), settings.rescale)?;
            }
            let dataset = match (data, gen) {
                (Some(path), _) => dataset_csv::load_csv(&path)?,
                (None, true) => data::gen_two_class_usage(DEFAULT_PER_CLASS, settings.seed)?,
                (None, false) => return Err(CliError::Usage("pass --data or --gen".into())),
            };
            if let Some(path) = save_data {
                dataset_csv::save_csv(&dataset, &path)?;
            }
            let report = commands::train(model.into(), &dataset, &settings, split)?;
            commands::write_train(&report, &run.out).map_err(|e| CliError::io(&run.out, e))?;
            println!(
                "{} + {}: accuracy {:.1}%, final loss {:.6} after {} iterations",
                report.model,
                report.optimizer,
                100.0 * report.accuracy.unwrap_or(f64::NAN),
                report.final_loss,
                report.iterations
            );
        }
        Command::Reproduce { seed, iters, out } => {
            if iters == 0 {
                return Err(CliError::Usage("--iters must be at least 1".into()));
            }
            let r = commands::reproduce(seed, iters, &out)?;
            print!("{}", r.gate_counts.to_text());
            for e in &r.accuracy.entries {
                println!("{:<10} {:<7} accuracy {:.1}%", e.model, e.optimizer, 100.0 * e.accuracy);
            }
            if !r.failures.is_empty() {
                return Err(CliError::Runtime(anyhow::anyhow!(
                    "{} run(s) failed: {}",
                    r.failures.len(),
                    r.failures.join("; ")
                )));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
