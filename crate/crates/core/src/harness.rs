//! Experiment orchestration: repeated noisy-label training runs with or
//! without backward correction, optional transition estimation, and
//! deterministic reports.
//!
//! Configuration is a flat `key = value` text file (`#` starts a comment).
//! See [`ExperimentConfig::KEYS`] for the accepted keys.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use serde::Serialize;

use crate::correction::Correction;
use crate::data::{self, LabelKind, LabeledDataset, SyntheticSpec};
use crate::error::{Error, Result};
use crate::estimator::{estimate_transition, estimation_error, max_abs_error, PosteriorBatch};
use crate::metrics::{aggregate, top1_accuracy, AggregateResult, RunResult};
use crate::nn::{self, Network, OptimizerConfig, Preset, TrainConfig};
use crate::noise::{inject_noise, TransitionMatrix};
use crate::rng::{derive_seed, stream};

pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Default learning rate for uncorrected runs.
pub const DEFAULT_LR: f64 = 0.1;
/// Default learning rate for backward-corrected runs, which need a smaller step.
pub const DEFAULT_LR_CORRECTED: f64 = 0.01;

/// Transition matrices that can be referenced by name instead of a path.
pub mod presets {
    /// Flip rate 0.6, symmetric.
    pub const FASHION_06: [[f64; 3]; 3] = [[0.4, 0.3, 0.3], [0.3, 0.4, 0.3], [0.3, 0.3, 0.4]];
    /// A malformed flip-rate-0.5 matrix: rows 1 and 2 sum to 1.1, so it
    /// fails validation.
    pub const FASHION_05_PRINTED: [[f64; 3]; 3] = [[0.5, 0.2, 0.3], [0.3, 0.5, 0.3], [0.3, 0.3, 0.5]];
    /// A row- and column-stochastic variant of the flip-rate-0.5 matrix
    /// (cyclic off-diagonal pattern). This is a repair guess, selected only
    /// by its explicit name.
    pub const FASHION_05_CYCLIC: [[f64; 3]; 3] = [[0.5, 0.2, 0.3], [0.3, 0.5, 0.2], [0.2, 0.3, 0.5]];
}

/// Resolves a matrix reference: `identity`, `fashion0.6`, `fashion0.5`,
/// `fashion0.5-cyclic`, or a path to a matrix text file.
pub fn resolve_matrix(reference: &str, num_classes: usize) -> Result<TransitionMatrix> {
    let grid = |m: [[f64; 3]; 3]| m.iter().map(|r| r.to_vec()).collect::<Vec<_>>();
    let result = match reference {
        "identity" => Ok(TransitionMatrix::identity(num_classes)),
        "fashion0.6" => TransitionMatrix::validate(&grid(presets::FASHION_06)),
        "fashion0.5" => TransitionMatrix::validate(&grid(presets::FASHION_05_PRINTED)),
        "fashion0.5-cyclic" => TransitionMatrix::validate(&grid(presets::FASHION_05_CYCLIC)),
        path => TransitionMatrix::load(path),
    };
    let t = result.map_err(|e| Error::ConfigInvalid(format!("matrix {reference}: {e}")))?;
    if t.num_classes() != num_classes {
        return Err(Error::ConfigInvalid(format!(
            "matrix {reference} is {0}x{0} but the dataset has {num_classes} classes",
            t.num_classes()
        )));
    }
    Ok(t)
}

#[derive(Clone, Debug, PartialEq)]
pub enum DataSource {
    Synthetic {
        num_classes: usize,
        per_class: usize,
        test_per_class: usize,
        size: usize,
        separation: f64,
        seed: u64,
    },
    Idx {
        train_images: PathBuf,
        train_labels: PathBuf,
        test_images: PathBuf,
        test_labels: PathBuf,
    },
    Cifar {
        train: Vec<PathBuf>,
        test: Vec<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TransitionSource {
    Provided,
    Estimate,
    Identity,
}

impl FromStr for TransitionSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "provided" => Ok(TransitionSource::Provided),
            "estimate" => Ok(TransitionSource::Estimate),
            "identity" => Ok(TransitionSource::Identity),
            other => Err(Error::ConfigInvalid(format!(
                "unknown transition source {other:?} (expected provided|estimate|identity)"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EstimationSplit {
    Train,
    Validation,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub source: DataSource,
    /// Subset of source classes, remapped to `0..k` in this order.
    pub classes: Option<Vec<usize>>,
    /// Replaces the training labels (already noisy).
    pub noisy_labels: Option<PathBuf>,
    pub arch: Preset,
    /// `None` picks [`DEFAULT_LR`] or [`DEFAULT_LR_CORRECTED`] by correction.
    pub learning_rate: Option<f64>,
    /// Per-correction overrides of `learning_rate`.
    pub learning_rate_none: Option<f64>,
    pub learning_rate_backward: Option<f64>,
    /// When non-empty, each repetition trains once per rate and keeps the
    /// one with the best validation accuracy.
    pub learning_rate_grid: Vec<f64>,
    pub momentum: f64,
    pub weight_decay: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub repetitions: usize,
    pub validation_fraction: f64,
    pub flip_probability: f64,
    /// Matrix used to corrupt clean training labels (`None`: labels kept).
    pub noise: Option<String>,
    pub transition: TransitionSource,
    /// Matrix for `transition = provided`; falls back to `noise`.
    pub matrix: Option<String>,
    pub correction: Correction,
    pub estimation_split: EstimationSplit,
    pub anchor_top_k: usize,
    pub seed: u64,
    /// Explicit per-repetition seeds; overrides derivation from `seed`.
    pub run_seeds: Option<Vec<u64>>,
    pub out: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let opt = OptimizerConfig::default();
        ExperimentConfig {
            source: DataSource::Synthetic {
                num_classes: 3,
                per_class: 600,
                test_per_class: 200,
                size: 28,
                separation: 1.0,
                seed: 0,
            },
            classes: None,
            noisy_labels: None,
            arch: Preset::Lenet5,
            learning_rate: None,
            learning_rate_none: None,
            learning_rate_backward: None,
            learning_rate_grid: Vec::new(),
            momentum: opt.momentum,
            weight_decay: opt.weight_decay,
            batch_size: opt.batch_size,
            epochs: 15,
            repetitions: 5,
            validation_fraction: 0.2,
            flip_probability: nn::DEFAULT_FLIP_PROBABILITY,
            noise: None,
            transition: TransitionSource::Provided,
            matrix: None,
            correction: Correction::None,
            estimation_split: EstimationSplit::Train,
            anchor_top_k: 1,
            seed: 0,
            run_seeds: None,
            out: None,
        }
    }
}

fn parse_value<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::ConfigInvalid(format!("{key}: cannot parse {value:?}")))
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_value(key, s))
        .collect()
}

impl ExperimentConfig {
    pub const KEYS: &'static [&'static str] = &[
        "dataset",
        "synthetic.classes",
        "synthetic.per_class",
        "synthetic.test_per_class",
        "synthetic.size",
        "synthetic.separation",
        "synthetic.seed",
        "train_images",
        "train_labels",
        "test_images",
        "test_labels",
        "cifar_train",
        "cifar_test",
        "classes",
        "noisy_labels",
        "arch",
        "learning_rate",
        "learning_rate.none",
        "learning_rate.backward",
        "learning_rate_grid",
        "momentum",
        "weight_decay",
        "batch_size",
        "epochs",
        "repetitions",
        "validation_fraction",
        "flip_probability",
        "noise",
        "transition",
        "matrix",
        "correction",
        "estimation_split",
        "anchor_top_k",
        "seed",
        "run_seeds",
        "out",
    ];

    /// Parses the flat key-value format. Relative paths are resolved against
    /// `base_dir`.
    pub fn parse(text: &str, base_dir: &Path) -> Result<Self> {
        let mut kv = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::ConfigInvalid(format!("line {}: expected key = value", lineno + 1)))?;
            let (k, v) = (k.trim().to_string(), v.trim().to_string());
            if !Self::KEYS.contains(&k.as_str()) {
                return Err(Error::ConfigInvalid(format!("line {}: unknown key {k:?}", lineno + 1)));
            }
            if kv.insert(k.clone(), v).is_some() {
                return Err(Error::ConfigInvalid(format!(
                    "line {}: duplicate key {k:?}",
                    lineno + 1
                )));
            }
        }
        Self::from_map(&kv, base_dir)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::ConfigInvalid(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text, path.parent().unwrap_or(Path::new(".")))
    }

    fn from_map(kv: &BTreeMap<String, String>, base: &Path) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        let get = |k: &str| kv.get(k).map(String::as_str);
        let path = |k: &str| -> Result<PathBuf> {
            let v = get(k).ok_or_else(|| Error::ConfigInvalid(format!("missing key {k:?}")))?;
            Ok(base.join(v))
        };
        let paths = |k: &str| -> Result<Vec<PathBuf>> {
            let v = get(k).ok_or_else(|| Error::ConfigInvalid(format!("missing key {k:?}")))?;
            Ok(v.split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(|s| base.join(s))
                .collect())
        };

        cfg.source = match get("dataset").unwrap_or("synthetic") {
            "synthetic" => {
                let DataSource::Synthetic {
                    num_classes,
                    per_class,
                    test_per_class,
                    size,
                    separation,
                    seed,
                } = cfg.source
                else {
                    unreachable!()
                };
                DataSource::Synthetic {
                    num_classes: get("synthetic.classes")
                        .map_or(Ok(num_classes), |v| parse_value("synthetic.classes", v))?,
                    per_class: get("synthetic.per_class")
                        .map_or(Ok(per_class), |v| parse_value("synthetic.per_class", v))?,
                    test_per_class: get("synthetic.test_per_class")
                        .map_or(Ok(test_per_class), |v| parse_value("synthetic.test_per_class", v))?,
                    size: get("synthetic.size").map_or(Ok(size), |v| parse_value("synthetic.size", v))?,
                    separation: get("synthetic.separation")
                        .map_or(Ok(separation), |v| parse_value("synthetic.separation", v))?,
                    seed: get("synthetic.seed").map_or(Ok(seed), |v| parse_value("synthetic.seed", v))?,
                }
            }
            "idx" => DataSource::Idx {
                train_images: path("train_images")?,
                train_labels: path("train_labels")?,
                test_images: path("test_images")?,
                test_labels: path("test_labels")?,
            },
            "cifar" => DataSource::Cifar {
                train: paths("cifar_train")?,
                test: paths("cifar_test")?,
            },
            other => return Err(Error::ConfigInvalid(format!("unknown dataset kind {other:?}"))),
        };

        if let Some(v) = get("classes") {
            cfg.classes = Some(parse_list("classes", v)?);
        }
        if get("noisy_labels").is_some() {
            cfg.noisy_labels = Some(path("noisy_labels")?);
        }
        if let Some(v) = get("arch") {
            cfg.arch = v.parse()?;
        }
        if let Some(v) = get("learning_rate") {
            cfg.learning_rate = Some(parse_value("learning_rate", v)?);
        }
        if let Some(v) = get("learning_rate.none") {
            cfg.learning_rate_none = Some(parse_value("learning_rate.none", v)?);
        }
        if let Some(v) = get("learning_rate.backward") {
            cfg.learning_rate_backward = Some(parse_value("learning_rate.backward", v)?);
        }
        if let Some(v) = get("learning_rate_grid") {
            cfg.learning_rate_grid = parse_list("learning_rate_grid", v)?;
        }
        macro_rules! scalar {
            ($($field:ident),*) => {$(
                if let Some(v) = get(stringify!($field)) {
                    cfg.$field = parse_value(stringify!($field), v)?;
                }
            )*};
        }
        scalar!(
            momentum,
            weight_decay,
            batch_size,
            epochs,
            repetitions,
            validation_fraction,
            flip_probability,
            anchor_top_k,
            seed
        );
        if let Some(v) = get("noise") {
            cfg.noise = (v != "none").then(|| resolve_ref(v, base));
        }
        if let Some(v) = get("transition") {
            cfg.transition = v.parse()?;
        }
        if let Some(v) = get("matrix") {
            cfg.matrix = Some(resolve_ref(v, base));
        }
        if let Some(v) = get("correction") {
            cfg.correction = v.parse()?;
        }
        if let Some(v) = get("estimation_split") {
            cfg.estimation_split = match v {
                "train" => EstimationSplit::Train,
                "validation" => EstimationSplit::Validation,
                other => return Err(Error::ConfigInvalid(format!("unknown estimation split {other:?}"))),
            };
        }
        if let Some(v) = get("run_seeds") {
            cfg.run_seeds = Some(parse_list("run_seeds", v)?);
        }
        if let Some(v) = get("out") {
            cfg.out = Some(base.join(v));
        }
        Ok(cfg)
    }

    pub fn optimizer(&self, learning_rate: f64) -> OptimizerConfig {
        OptimizerConfig {
            learning_rate,
            momentum: self.momentum,
            weight_decay: self.weight_decay,
            batch_size: self.batch_size,
        }
    }

    /// Learning rates tried per repetition. Precedence: grid, then the
    /// per-correction key, then `learning_rate`, then the default.
    pub fn learning_rates(&self) -> Vec<f64> {
        if !self.learning_rate_grid.is_empty() {
            return self.learning_rate_grid.clone();
        }
        let (specific, default) = match self.correction {
            Correction::None => (self.learning_rate_none, DEFAULT_LR),
            Correction::Backward => (self.learning_rate_backward, DEFAULT_LR_CORRECTED),
        };
        vec![specific.or(self.learning_rate).unwrap_or(default)]
    }

    /// Rate for the uncorrected model that produces posteriors for estimation.
    pub fn estimator_learning_rate(&self) -> f64 {
        self.learning_rate_none.or(self.learning_rate).unwrap_or(DEFAULT_LR)
    }

    pub fn num_repetitions(&self) -> usize {
        self.run_seeds.as_ref().map_or(self.repetitions, Vec::len)
    }

    /// Seed of repetition `r`: explicit, or derived from the master seed.
    pub fn run_seed(&self, r: usize) -> u64 {
        match &self.run_seeds {
            Some(seeds) => seeds[r],
            None => derive_seed(derive_seed(self.seed, stream::REPETITION), r as u64),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::ConfigInvalid(m));
        if self.num_repetitions() == 0 {
            return bad("repetitions must be at least 1".into());
        }
        if self.epochs == 0 {
            return bad("epochs must be at least 1".into());
        }
        if !(self.validation_fraction > 0.0 && self.validation_fraction < 1.0) {
            return bad(format!(
                "validation_fraction {} outside (0, 1)",
                self.validation_fraction
            ));
        }
        if !(0.0..=1.0).contains(&self.flip_probability) {
            return bad(format!("flip_probability {} outside [0, 1]", self.flip_probability));
        }
        if self.anchor_top_k == 0 {
            return bad("anchor_top_k must be at least 1".into());
        }
        for lr in self.learning_rates() {
            self.optimizer(lr).validate()?;
        }
        let mut files: Vec<&Path> = Vec::new();
        match &self.source {
            DataSource::Synthetic {
                num_classes,
                per_class,
                test_per_class,
                size,
                separation,
                ..
            } => {
                if *num_classes < 2 || *per_class == 0 || *test_per_class == 0 || *size == 0 {
                    return bad("synthetic dataset needs >= 2 classes and non-zero sizes".into());
                }
                if !(*separation > 0.0) {
                    return bad(format!("synthetic.separation {separation} must be positive"));
                }
            }
            DataSource::Idx {
                train_images,
                train_labels,
                test_images,
                test_labels,
            } => files.extend([train_images, train_labels, test_images, test_labels].map(PathBuf::as_path)),
            DataSource::Cifar { train, test } => {
                if train.is_empty() || test.is_empty() {
                    return bad("cifar_train and cifar_test must list at least one file".into());
                }
                files.extend(train.iter().chain(test).map(PathBuf::as_path));
            }
        }
        files.extend(self.noisy_labels.as_deref());
        for f in files {
            if !f.is_file() {
                return bad(format!("file not found: {}", f.display()));
            }
        }
        if self.transition == TransitionSource::Provided && self.matrix.is_none() && self.noise.is_none() {
            return bad("transition = provided needs `matrix` (or `noise`)".into());
        }
        Ok(())
    }

    /// Effective settings, excluding the output directory, in key order.
    pub fn echo(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        let mut put = |k: &str, v: String| {
            m.insert(k.to_string(), v);
        };
        match &self.source {
            DataSource::Synthetic {
                num_classes,
                per_class,
                test_per_class,
                size,
                separation,
                seed,
            } => {
                put("dataset", "synthetic".into());
                put("synthetic.classes", num_classes.to_string());
                put("synthetic.per_class", per_class.to_string());
                put("synthetic.test_per_class", test_per_class.to_string());
                put("synthetic.size", size.to_string());
                put("synthetic.separation", separation.to_string());
                put("synthetic.seed", seed.to_string());
            }
            DataSource::Idx {
                train_images,
                train_labels,
                test_images,
                test_labels,
            } => {
                put("dataset", "idx".into());
                put("train_images", train_images.display().to_string());
                put("train_labels", train_labels.display().to_string());
                put("test_images", test_images.display().to_string());
                put("test_labels", test_labels.display().to_string());
            }
            DataSource::Cifar { train, test } => {
                let join = |v: &[PathBuf]| v.iter().map(|p| p.display().to_string()).collect::<Vec<_>>().join(",");
                put("dataset", "cifar".into());
                put("cifar_train", join(train));
                put("cifar_test", join(test));
            }
        }
        let list = |v: &[usize]| v.iter().map(ToString::to_string).collect::<Vec<_>>().join(",");
        if let Some(c) = &self.classes {
            put("classes", list(c));
        }
        if let Some(p) = &self.noisy_labels {
            put("noisy_labels", p.display().to_string());
        }
        put("arch", self.arch.to_string());
        put(
            "learning_rates",
            self.learning_rates()
                .iter()
                .map(ToString::to_string)
                .collect::<Vec<_>>()
                .join(","),
        );
        put("momentum", self.momentum.to_string());
        put("weight_decay", self.weight_decay.to_string());
        put("batch_size", self.batch_size.to_string());
        put("epochs", self.epochs.to_string());
        put("repetitions", self.num_repetitions().to_string());
        put("validation_fraction", self.validation_fraction.to_string());
        put("flip_probability", self.flip_probability.to_string());
        put("noise", self.noise.clone().unwrap_or_else(|| "none".into()));
        put("transition", format!("{:?}", self.transition).to_lowercase());
        if let Some(m) = &self.matrix {
            put("matrix", m.clone());
        }
        put("correction", self.correction.to_string());
        put(
            "estimation_split",
            format!("{:?}", self.estimation_split).to_lowercase(),
        );
        put("anchor_top_k", self.anchor_top_k.to_string());
        put("seed", self.seed.to_string());
        m
    }
}

fn resolve_ref(v: &str, base: &Path) -> String {
    match v {
        "identity" | "fashion0.6" | "fashion0.5" | "fashion0.5-cyclic" => v.to_string(),
        path => base.join(path).display().to_string(),
    }
}

/// Training pool and clean test set, resized to the preset's input size.
#[derive(Clone, Debug)]
pub struct LoadedData {
    pub train: LabeledDataset,
    pub test: LabeledDataset,
}

pub fn load_data(cfg: &ExperimentConfig) -> Result<LoadedData> {
    let (mut train, mut test) = match &cfg.source {
        DataSource::Synthetic {
            num_classes,
            per_class,
            test_per_class,
            size,
            separation,
            seed,
        } => {
            let spec = SyntheticSpec {
                num_classes: *num_classes,
                per_class: *per_class,
                height: *size,
                width: *size,
                separation: *separation,
                seed: derive_seed(*seed, stream::SYNTHETIC),
            };
            let test_spec = SyntheticSpec {
                per_class: *test_per_class,
                seed: derive_seed(*seed, stream::SYNTHETIC_TEST),
                ..spec.clone()
            };
            (data::generate_synthetic(&spec)?, data::generate_synthetic(&test_spec)?)
        }
        DataSource::Idx {
            train_images,
            train_labels,
            test_images,
            test_labels,
        } => (
            data::load_idx(train_images, train_labels)?,
            data::load_idx(test_images, test_labels)?,
        ),
        DataSource::Cifar { train, test } => (data::load_cifar(train)?, data::load_cifar(test)?),
    };
    if let Some(classes) = &cfg.classes {
        train = train.select_classes(classes)?;
        test = test.select_classes(classes)?;
    } else {
        let c = train.num_classes.max(test.num_classes);
        train.num_classes = c;
        test.num_classes = c;
    }
    if let Some(path) = &cfg.noisy_labels {
        let labels = data::read_label_csv(path)?;
        train = train.with_labels(labels, LabelKind::Noisy)?;
    }
    let (h, w) = cfg.arch.input_size();
    Ok(LoadedData {
        train: data::resize(&train, h, w)?,
        test: data::resize(&test, h, w)?,
    })
}

/// One repetition in a report.
#[derive(Clone, Debug, Serialize)]
pub struct RunRecord {
    pub repetition: usize,
    #[serde(flatten)]
    pub result: RunResult,
    pub learning_rate: f64,
    /// Accuracy against the (noisy) validation labels.
    pub validation_top1: f64,
    /// Matrix whose inverse corrected the loss (identity when uncorrected).
    pub correction_matrix: Vec<Vec<f64>>,
    pub estimation_error: Option<Vec<Vec<f64>>>,
    pub max_abs_estimation_error: Option<f64>,
    pub final_train_objective: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExperimentReport {
    pub artifact_version: String,
    pub config: BTreeMap<String, String>,
    pub model: String,
    pub dataset: String,
    pub correction: Correction,
    /// Transition matrix of the configured source (provided or noise).
    pub true_matrix: Option<Vec<Vec<f64>>>,
    pub runs: Vec<RunRecord>,
    pub aggregate: AggregateResult,
    pub std_estimator: &'static str,
    #[serde(skip)]
    pub total_seconds: f64,
}

impl ExperimentReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    /// Aligned plain-text summary.
    pub fn to_table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "model: {}  dataset: {}  correction: {}",
            self.model, self.dataset, self.correction
        );
        let _ = writeln!(
            s,
            "{:>4}  {:>20}  {:>8}  {:>8}  {:>9}  {:>8}",
            "rep", "seed", "lr", "top1", "val_top1", "seconds"
        );
        for r in &self.runs {
            let _ = writeln!(
                s,
                "{:>4}  {:>20}  {:>8}  {:>8.2}  {:>9.2}  {:>8.1}",
                r.repetition,
                r.result.seed,
                r.learning_rate,
                r.result.top1,
                r.validation_top1,
                r.result.wall_clock_seconds
            );
        }
        let _ = writeln!(
            s,
            "mean top1 {:.2} (±{:.2}, sample std over {} runs)",
            self.aggregate.mean_top1, self.aggregate.std_top1, self.aggregate.runs
        );
        s
    }
}

/// A trained repetition: its record plus the final network.
pub struct TrainedRun {
    pub record: RunRecord,
    pub network: Network,
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    run_experiment_with_models(cfg).map(|(report, _)| report)
}

pub fn run_experiment_with_models(cfg: &ExperimentConfig) -> Result<(ExperimentReport, Vec<Network>)> {
    cfg.validate()?;
    let start = Instant::now();
    let data = load_data(cfg)?;
    let c = data.train.num_classes;

    let noise_t = cfg.noise.as_deref().map(|r| resolve_matrix(r, c)).transpose()?;
    let provided = match (cfg.transition, cfg.matrix.as_deref()) {
        (TransitionSource::Provided, Some(r)) => Some(resolve_matrix(r, c)?),
        (TransitionSource::Provided, None) => noise_t.clone(),
        _ => None,
    };
    let true_t = provided.clone().or_else(|| noise_t.clone());

    let mut records = Vec::new();
    let mut networks = Vec::new();
    for r in 0..cfg.num_repetitions() {
        let run = run_repetition(cfg, &data, r, noise_t.as_ref(), provided.as_ref(), true_t.as_ref())?;
        records.push(run.record);
        networks.push(run.network);
    }
    let results: Vec<RunResult> = records.iter().map(|r| r.result.clone()).collect();
    let report = ExperimentReport {
        artifact_version: ARTIFACT_VERSION.to_string(),
        config: cfg.echo(),
        model: cfg.arch.to_string(),
        dataset: data.train.name.clone(),
        correction: cfg.correction,
        true_matrix: true_t.as_ref().map(TransitionMatrix::to_rows),
        runs: records,
        aggregate: aggregate(&results)?,
        std_estimator: "sample (n-1)",
        total_seconds: start.elapsed().as_secs_f64(),
    };
    Ok((report, networks))
}

fn run_repetition(
    cfg: &ExperimentConfig,
    data: &LoadedData,
    r: usize,
    noise_t: Option<&TransitionMatrix>,
    provided: Option<&TransitionMatrix>,
    true_t: Option<&TransitionMatrix>,
) -> Result<TrainedRun> {
    let start = Instant::now();
    let seed = cfg.run_seed(r);
    let c = data.train.num_classes;
    let plan = data::split(&data.train, cfg.validation_fraction, seed)?;
    let pool = match noise_t {
        Some(t) => data.train.with_labels(
            inject_noise(&data.train.labels, t, derive_seed(seed, stream::NOISE))?,
            LabelKind::Noisy,
        )?,
        None => data.train.clone(),
    };
    let train = pool.subset(&plan.train);
    let validation = pool.subset(&plan.validation);
    let in_channels = data.train.image_shape[0];

    let mut estimated = None;
    let transition = match cfg.transition {
        TransitionSource::Identity => TransitionMatrix::identity(c),
        TransitionSource::Provided => provided.cloned().expect("validated"),
        TransitionSource::Estimate => {
            let lr = cfg.estimator_learning_rate();
            let (net, _) = train_model(
                cfg,
                &train,
                &TransitionMatrix::identity(c),
                lr,
                seed,
                stream::ESTIMATOR_MODEL,
                in_channels,
            )?;
            let source = match cfg.estimation_split {
                EstimationSplit::Train => &train,
                EstimationSplit::Validation => &validation,
            };
            let batch = PosteriorBatch::from_rows(c, nn::posteriors(&net, source)?)?;
            let t = estimate_transition(&batch, cfg.anchor_top_k)?;
            estimated = Some(t.clone());
            t
        }
    };
    let correction_t = match cfg.correction {
        Correction::None => TransitionMatrix::identity(c),
        Correction::Backward => transition.clone(),
    };

    let mut best: Option<(f64, f64, Network, f64)> = None;
    for lr in cfg.learning_rates() {
        let (net, objective) = train_model(cfg, &train, &correction_t, lr, seed, stream::TARGET_MODEL, in_channels)?;
        let val_acc = top1_accuracy(&nn::predict(&net, &validation)?, &validation.labels)?;
        if best.as_ref().is_none_or(|b| val_acc > b.1) {
            best = Some((lr, val_acc, net, objective));
        }
    }
    let (lr, val_acc, net, objective) = best.expect("at least one learning rate");
    let top1 = top1_accuracy(&nn::predict(&net, &data.test)?, &data.test.labels)?;

    let err = match (&estimated, true_t) {
        (Some(est), Some(t)) => Some(estimation_error(t, est)?),
        _ => None,
    };
    Ok(TrainedRun {
        record: RunRecord {
            repetition: r,
            result: RunResult {
                model: cfg.arch.to_string(),
                dataset: data.train.name.clone(),
                correction: cfg.correction,
                seed,
                top1,
                estimated_matrix: estimated.as_ref().map(TransitionMatrix::to_rows),
                wall_clock_seconds: start.elapsed().as_secs_f64(),
            },
            learning_rate: lr,
            validation_top1: val_acc,
            correction_matrix: correction_t.to_rows(),
            max_abs_estimation_error: err.as_ref().map(max_abs_error),
            estimation_error: err.map(|e| e.matrix().to_rows()),
            final_train_objective: objective,
        },
        network: net,
    })
}

fn train_model(
    cfg: &ExperimentConfig,
    train: &LabeledDataset,
    t: &TransitionMatrix,
    lr: f64,
    run_seed: u64,
    role: u64,
    in_channels: usize,
) -> Result<(Network, f64)> {
    let model_seed = derive_seed(run_seed, role);
    let mut net = cfg.arch.build(in_channels, train.num_classes, model_seed)?;
    let tc = TrainConfig {
        optimizer: cfg.optimizer(lr),
        epochs: cfg.epochs,
        flip_probability: cfg.flip_probability,
        seed: model_seed,
    };
    let history = nn::fit(&mut net, train, t, &tc)?;
    Ok((net, history.last().copied().unwrap_or(f64::NAN)))
}

/// Runs only the estimation half of the pipeline for repetition 0: trains an
/// uncorrected model and returns the posterior batch it produced together
/// with the estimated matrix.
pub fn estimate_from_config(cfg: &ExperimentConfig) -> Result<(PosteriorBatch, TransitionMatrix)> {
    let cfg = ExperimentConfig {
        transition: TransitionSource::Estimate,
        ..cfg.clone()
    };
    cfg.validate()?;
    let data = load_data(&cfg)?;
    let c = data.train.num_classes;
    let seed = cfg.run_seed(0);
    let plan = data::split(&data.train, cfg.validation_fraction, seed)?;
    let noise_t = cfg.noise.as_deref().map(|r| resolve_matrix(r, c)).transpose()?;
    let pool = match &noise_t {
        Some(t) => data.train.with_labels(
            inject_noise(&data.train.labels, t, derive_seed(seed, stream::NOISE))?,
            LabelKind::Noisy,
        )?,
        None => data.train.clone(),
    };
    let split_idx = match cfg.estimation_split {
        EstimationSplit::Train => &plan.train,
        EstimationSplit::Validation => &plan.validation,
    };
    let train = pool.subset(&plan.train);
    let lr = cfg.estimator_learning_rate();
    let (net, _) = train_model(
        &cfg,
        &train,
        &TransitionMatrix::identity(c),
        lr,
        seed,
        stream::ESTIMATOR_MODEL,
        data.train.image_shape[0],
    )?;
    let source = pool.subset(split_idx);
    let ids = split_idx.iter().map(|&i| i as u64).collect();
    let batch = PosteriorBatch::new(c, ids, nn::posteriors(&net, &source)?)?;
    let t = estimate_transition(&batch, cfg.anchor_top_k)?;
    Ok((batch, t))
}

/// The four-row comparison: {lenet5, alexnet-mini} × {none, backward}.
#[derive(Clone, Debug, Serialize)]
pub struct BenchReport {
    pub artifact_version: String,
    pub rows: Vec<ExperimentReport>,
}

pub const BENCH_ARCHS: [Preset; 2] = [Preset::Lenet5, Preset::AlexnetMini];

pub fn run_bench(cfg: &ExperimentConfig) -> Result<BenchReport> {
    let mut rows = Vec::new();
    for arch in BENCH_ARCHS {
        for correction in [Correction::None, Correction::Backward] {
            let row_cfg = ExperimentConfig {
                arch,
                correction,
                ..cfg.clone()
            };
            rows.push(run_experiment(&row_cfg)?);
        }
    }
    Ok(BenchReport {
        artifact_version: ARTIFACT_VERSION.to_string(),
        rows,
    })
}

impl BenchReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    /// Accuracy table: one row per model/correction, `mean(±std)`.
    pub fn to_table(&self) -> String {
        let dataset = self.rows.first().map_or("", |r| r.dataset.as_str());
        let mut s = String::new();
        let _ = writeln!(s, "Average test accuracy % with sample standard deviation");
        let _ = writeln!(s, "{:<24} | {}", "Model", dataset);
        let _ = writeln!(s, "{:-<24}-+-{:-<width$}", "", "", width = dataset.len().max(16));
        for row in &self.rows {
            let name = match row.correction {
                Correction::None => row.model.clone(),
                Correction::Backward => format!("{}-Backward", row.model),
            };
            let _ = writeln!(
                s,
                "{:<24} | {:.2}(±{:.2})",
                name, row.aggregate.mean_top1, row.aggregate.std_top1
            );
        }
        s
    }
}

/// Writes `<stem>.json` and `<stem>.txt` into `dir`.
pub fn write_outputs(dir: &Path, stem: &str, json: &str, table: &str) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for (ext, body) in [("json", json), ("txt", table)] {
        let p = dir.join(format!("{stem}.{ext}"));
        std::fs::write(&p, body).map_err(|e| Error::io(&p, e))?;
    }
    Ok(())
}
