use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use labelnoise::harness::{self, ExperimentConfig, TransitionSource};
use labelnoise::nn::checkpoint;
use labelnoise::{data, estimate_transition, inject_noise, top1_accuracy, Correction, Error, PosteriorBatch, Preset};

/// Label-noise experiments: noise injection, backward loss correction and
/// anchor-point transition estimation.
#[derive(Parser, Debug)]
#[command(name = "labelnoise", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Default)]
struct Common {
    /// Flat key = value experiment config.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed (overrides the config).
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory (overrides the config).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone, Default)]
struct Overrides {
    /// Number of repetitions.
    #[arg(long)]
    reps: Option<usize>,
    /// Architecture preset: lenet5, alexnet-mini or tiny-cnn.
    #[arg(long)]
    arch: Option<Preset>,
    /// Loss correction: none or backward.
    #[arg(long)]
    correction: Option<Correction>,
    /// Correction matrix (file or builtin name); implies transition = provided.
    #[arg(long)]
    matrix: Option<String>,
    /// Run a single repetition with this exact seed (as printed in reports).
    #[arg(long)]
    run_seed: Option<u64>,
    /// Number of training epochs.
    #[arg(long)]
    epochs: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Corrupt the training labels of a dataset with a transition matrix.
    Inject {
        #[command(flatten)]
        common: Common,
        /// Transition matrix (file or builtin name).
        #[arg(long)]
        matrix: String,
    },
    /// Train per the config; writes a report and one checkpoint per run.
    Train {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Estimate the transition matrix from a posterior dump or a config.
    Estimate {
        #[command(flatten)]
        common: Common,
        /// Posterior dump (`C=<n>` header, then `id,p0,p1,...` lines).
        #[arg(long, conflicts_with = "config")]
        posteriors: Option<PathBuf>,
        /// Average the top-k candidates per class instead of the single argmax.
        #[arg(long)]
        top_k: Option<usize>,
    },
    /// Top-1 accuracy of a checkpoint on the config's clean test set.
    Eval {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        arch: Preset,
    },
    /// The four-row comparison: {lenet5, alexnet-mini} x {none, backward}.
    Bench {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        overrides: Overrides,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config_error() { 1 } else { 2 })
        }
    }
}

fn load_config(common: &Common) -> labelnoise::Result<ExperimentConfig> {
    let mut cfg = match &common.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &common.out {
        cfg.out = Some(out.clone());
    }
    Ok(cfg)
}

fn apply(cfg: &mut ExperimentConfig, o: &Overrides) {
    if let Some(r) = o.reps {
        cfg.repetitions = r;
        cfg.run_seeds = None;
    }
    if let Some(a) = o.arch {
        cfg.arch = a;
    }
    if let Some(c) = o.correction {
        cfg.correction = c;
    }
    if let Some(m) = &o.matrix {
        cfg.matrix = Some(m.clone());
        cfg.transition = TransitionSource::Provided;
    }
    if let Some(s) = o.run_seed {
        cfg.run_seeds = Some(vec![s]);
    }
    if let Some(e) = o.epochs {
        cfg.epochs = e;
    }
}

fn out_dir(cfg: &ExperimentConfig) -> PathBuf {
    cfg.out.clone().unwrap_or_else(|| PathBuf::from("labelnoise-out"))
}

fn run(command: Command) -> labelnoise::Result<()> {
    match command {
        Command::Inject { common, matrix } => {
            let cfg = load_config(&common)?;
            cfg.validate()?;
            let pool = harness::load_data(&cfg)?.train;
            let t = harness::resolve_matrix(&matrix, pool.num_classes)?;
            let noisy = inject_noise(&pool.labels, &t, cfg.seed)?;
            let path = out_dir(&cfg).join("noisy_labels.csv");
            if let Some(dir) = path.parent() {
                std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
            }
            data::write_label_csv(&path, &noisy)?;
            let flipped = noisy.iter().zip(&pool.labels).filter(|(a, b)| a != b).count();
            println!(
                "wrote {} labels ({} flipped, {:.4}) to {}",
                noisy.len(),
                flipped,
                flipped as f64 / noisy.len().max(1) as f64,
                path.display()
            );
        }
        Command::Train { common, overrides } => {
            let mut cfg = load_config(&common)?;
            apply(&mut cfg, &overrides);
            let (report, nets) = harness::run_experiment_with_models(&cfg)?;
            let dir = out_dir(&cfg);
            harness::write_outputs(&dir, "report", &report.to_json(), &report.to_table())?;
            for (run, net) in report.runs.iter().zip(&nets) {
                checkpoint::save(net, dir.join(format!("model-{}.bin", run.repetition)))?;
            }
            print!("{}", report.to_table());
        }
        Command::Estimate {
            common,
            posteriors,
            top_k,
        } => {
            let (t, dir) = match posteriors {
                Some(path) => {
                    let batch = PosteriorBatch::load(&path)?;
                    let t = estimate_transition(&batch, top_k.unwrap_or(1))?;
                    (t, common.out.clone().unwrap_or_else(|| PathBuf::from("labelnoise-out")))
                }
                None => {
                    let mut cfg = load_config(&common)?;
                    if let Some(k) = top_k {
                        cfg.anchor_top_k = k;
                    }
                    let (batch, t) = harness::estimate_from_config(&cfg)?;
                    let dir = out_dir(&cfg);
                    std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
                    batch.save(dir.join("posteriors.txt"))?;
                    (t, dir)
                }
            };
            std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
            t.save(dir.join("matrix.txt"))?;
            print!("{t}");
        }
        Command::Eval {
            common,
            checkpoint: ckpt,
            arch,
        } => {
            let mut cfg = load_config(&common)?;
            cfg.arch = arch;
            cfg.validate()?;
            if !ckpt.is_file() {
                return Err(Error::ConfigInvalid(format!(
                    "checkpoint not found: {}",
                    ckpt.display()
                )));
            }
            let test = harness::load_data(&cfg)?.test;
            let mut net = arch.build(test.image_shape[0], test.num_classes, 0)?;
            checkpoint::load(&mut net, &ckpt)?;
            let top1 = top1_accuracy(&labelnoise::nn::predict(&net, &test)?, &test.labels)?;
            println!("top1 {top1:.4}");
        }
        Command::Bench { common, overrides } => {
            let mut cfg = load_config(&common)?;
            apply(&mut cfg, &overrides);
            let report = harness::run_bench(&cfg)?;
            harness::write_outputs(&out_dir(&cfg), "bench", &report.to_json(), &report.to_table())?;
            print!("{}", report.to_table());
        }
    }
    Ok(())
}
