//! Experiment configuration and the load, split, scale, train, evaluate,
//! report pipeline behind `windqnn run`.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::baselines::{CartModel, CartParams, KnnModel, OlsModel};
use crate::data::{
    self, generate_synthetic, load_csv, CsvSchema, Dataset, ScaledSet, ScalingSpec, SplitMode,
    DEFAULT_FEATURE_RANGE, FEATURE_NAMES, N_FEATURES, RNG_ALGORITHM,
};
use crate::error::{Error, Result};
use crate::evaluate::MetricPair;
use crate::optimizer::OptimizerOptions;
use crate::par;
use crate::qnn::{self, GradientMode, QnnConfigId, QnnModel, QnnSettings};
use crate::report::{
    write_run_artifact, ExperimentReport, MethodFailure, MethodResult, CLASSICAL_FEATURE_MAP,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DataSource {
    Synthetic,
    Csv,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataConfig {
    pub source: DataSource,
    pub csv_path: Option<PathBuf>,
    pub synthetic_rows: usize,
    pub synthetic_seed: u64,
    /// Must equal [`RNG_ALGORITHM`]; recorded so shuffles and synthetic data
    /// stay reproducible across implementations.
    pub rng: String,
    pub feature_min: f64,
    pub feature_max: f64,
}

impl Default for DataConfig {
    fn default() -> Self {
        DataConfig {
            source: DataSource::Synthetic,
            csv_path: None,
            synthetic_rows: 4464,
            synthetic_seed: 42,
            rng: RNG_ALGORITHM.into(),
            feature_min: DEFAULT_FEATURE_RANGE.0,
            feature_max: DEFAULT_FEATURE_RANGE.1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitKind {
    Shuffled,
    Chronological,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitConfig {
    pub fraction: f64,
    pub mode: SplitKind,
    pub seed: u64,
}

impl Default for SplitConfig {
    fn default() -> Self {
        SplitConfig {
            fraction: 0.8,
            mode: SplitKind::Shuffled,
            seed: 42,
        }
    }
}

impl SplitConfig {
    pub fn split_mode(&self) -> SplitMode {
        match self.mode {
            SplitKind::Shuffled => SplitMode::ShuffledSeeded(self.seed),
            SplitKind::Chronological => SplitMode::Chronological,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BaselineConfig {
    pub k: usize,
    /// Absent means unlimited depth.
    pub cart_max_depth: Option<usize>,
    pub cart_min_samples_split: usize,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        BaselineConfig {
            k: 5,
            cart_max_depth: None,
            cart_min_samples_split: 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub methods: Vec<String>,
    pub output_dir: PathBuf,
    pub run_id: String,
    /// Worker threads; absent means one per hardware thread.
    pub threads: Option<usize>,
    pub include_wall_time: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            methods: Method::all().iter().map(|m| m.id()).collect(),
            output_dir: PathBuf::from("runs"),
            run_id: "default".into(),
            threads: None,
            include_wall_time: false,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub data: DataConfig,
    pub columns: CsvSchema,
    pub split: SplitConfig,
    pub qnn: QnnSettings,
    pub optimizer: OptimizerOptions,
    pub baselines: BaselineConfig,
    pub run: RunConfig,
}

fn config_error(key: &str, msg: impl fmt::Display) -> Error {
    Error::Config(format!("{key}: {msg}"))
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let config: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let d = &self.data;
        if d.rng != RNG_ALGORITHM {
            return Err(config_error(
                "data.rng",
                format!(
                    "unsupported generator `{}`, expected `{RNG_ALGORITHM}`",
                    d.rng
                ),
            ));
        }
        match d.source {
            DataSource::Csv if d.csv_path.is_none() => {
                return Err(config_error(
                    "data.csv_path",
                    "required when source = \"csv\"",
                ));
            }
            DataSource::Synthetic if d.synthetic_rows == 0 => {
                return Err(config_error("data.synthetic_rows", "must be >= 1"));
            }
            _ => {}
        }
        if !(d.feature_min.is_finite()
            && d.feature_max.is_finite()
            && d.feature_min < d.feature_max)
        {
            return Err(config_error(
                "data.feature_max",
                format!(
                    "must exceed data.feature_min ({} vs {})",
                    d.feature_max, d.feature_min
                ),
            ));
        }
        let f = self.split.fraction;
        if !(f > 0.0 && f < 1.0) {
            return Err(config_error(
                "split.fraction",
                format!("must lie in (0, 1), got {f}"),
            ));
        }
        if self.qnn.feature_map_reps == 0 {
            return Err(config_error("qnn.feature_map_reps", "must be >= 1"));
        }
        if !(self.qnn.finite_difference_step > 0.0) {
            return Err(config_error("qnn.finite_difference_step", "must be > 0"));
        }
        self.optimizer
            .validate()
            .map_err(|e| config_error("optimizer", e))?;
        if self.baselines.k == 0 {
            return Err(config_error("baselines.k", "must be >= 1"));
        }
        if self.baselines.cart_min_samples_split < 2 {
            return Err(config_error(
                "baselines.cart_min_samples_split",
                "must be >= 2",
            ));
        }
        if self.baselines.cart_max_depth == Some(0) {
            return Err(config_error(
                "baselines.cart_max_depth",
                "must be >= 1 when set",
            ));
        }
        self.methods()?;
        let id = &self.run.run_id;
        if id.is_empty() || id.contains(['/', '\\']) || id == "." || id == ".." {
            return Err(config_error(
                "run.run_id",
                format!("`{id}` is not a plain directory name"),
            ));
        }
        if self.run.threads == Some(0) {
            return Err(config_error("run.threads", "must be >= 1 when set"));
        }
        Ok(())
    }

    /// Parsed `run.methods`, in the order given.
    pub fn methods(&self) -> Result<Vec<Method>> {
        if self.run.methods.is_empty() {
            return Err(config_error("run.methods", "select at least one method"));
        }
        let mut out: Vec<Method> = Vec::new();
        for name in &self.run.methods {
            let m: Method = name.parse().map_err(|e| config_error("run.methods", e))?;
            if out.contains(&m) {
                return Err(config_error(
                    "run.methods",
                    format!("`{name}` listed twice"),
                ));
            }
            out.push(m);
        }
        Ok(out)
    }

    pub fn run_dir(&self) -> PathBuf {
        self.run.output_dir.join(&self.run.run_id)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Qnn(QnnConfigId),
    DecisionTree,
    Knn,
    Ols,
}

impl Method {
    /// QNN-1..QNN-12 followed by the three baselines.
    pub fn all() -> Vec<Method> {
        QnnConfigId::all()
            .map(Method::Qnn)
            .chain([Method::DecisionTree, Method::Knn, Method::Ols])
            .collect()
    }

    pub fn id(self) -> String {
        match self {
            Method::Qnn(c) => c.to_string(),
            Method::DecisionTree => "dt".into(),
            Method::Knn => "knn".into(),
            Method::Ols => "ols".into(),
        }
    }

    fn columns(self) -> (String, String) {
        match self {
            Method::Qnn(c) => (c.feature_map().name().into(), c.ansatz().name().into()),
            Method::DecisionTree => (CLASSICAL_FEATURE_MAP.into(), "decision_tree".into()),
            Method::Knn => (CLASSICAL_FEATURE_MAP.into(), "k_nearest_neighbors".into()),
            Method::Ols => (CLASSICAL_FEATURE_MAP.into(), "linear_regression".into()),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dt" => Ok(Method::DecisionTree),
            "knn" => Ok(Method::Knn),
            "ols" => Ok(Method::Ols),
            _ => s.parse().map(Method::Qnn).map_err(|_| {
                Error::invalid(format!(
                    "unknown method `{s}`; valid: QNN-1..QNN-12, dt, knn, ols"
                ))
            }),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stage {
    Config,
    Load,
    Split,
    Scale,
    Train,
    Evaluate,
    Report,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::Config => "config",
            Stage::Load => "load",
            Stage::Split => "split",
            Stage::Scale => "scale",
            Stage::Train => "train",
            Stage::Evaluate => "evaluate",
            Stage::Report => "report",
        }
    }
}

#[derive(Debug, thiserror::Error)]
#[error("{} stage failed: {source}", stage.name())]
pub struct StageError {
    pub stage: Stage,
    #[source]
    pub source: Error,
}

impl StageError {
    fn at(stage: Stage) -> impl FnOnce(Error) -> StageError {
        move |source| StageError { stage, source }
    }
}

pub struct PreparedData {
    pub train: ScaledSet,
    pub test: ScaledSet,
    pub scaling: ScalingSpec,
    pub dropped_rows: usize,
    pub n_rows: usize,
}

/// Loads or generates the data, splits it, and fits the scaler on the
/// training part.
pub fn prepare_data(config: &ExperimentConfig) -> std::result::Result<PreparedData, StageError> {
    let (dataset, dropped_rows): (Dataset, usize) = match config.data.source {
        DataSource::Synthetic => (
            generate_synthetic(config.data.synthetic_rows, config.data.synthetic_seed)
                .map_err(StageError::at(Stage::Load))?,
            0,
        ),
        DataSource::Csv => {
            let path = config.data.csv_path.as_deref().ok_or_else(|| StageError {
                stage: Stage::Config,
                source: config_error("data.csv_path", "required when source = \"csv\""),
            })?;
            let loaded = load_csv(path, &config.columns).map_err(StageError::at(Stage::Load))?;
            (loaded.dataset, loaded.dropped)
        }
    };
    let n_rows = dataset.len();
    let (train, test) = data::split(&dataset, config.split.fraction, config.split.split_mode())
        .map_err(StageError::at(Stage::Split))?;
    if train.is_empty() || test.is_empty() {
        return Err(StageError {
            stage: Stage::Split,
            source: Error::invalid(format!(
                "{n_rows} rows give {} train / {} test rows; both must be non-empty",
                train.len(),
                test.len()
            )),
        });
    }
    let test_power = test.power();
    if test_power.iter().all(|p| *p == test_power[0]) {
        return Err(StageError {
            stage: Stage::Split,
            source: Error::UndefinedMetric("test-set power is constant, R2 is undefined".into()),
        });
    }
    let scaling = ScalingSpec::fit(&train, (config.data.feature_min, config.data.feature_max))
        .map_err(StageError::at(Stage::Scale))?;
    Ok(PreparedData {
        train: scaling.apply(&train),
        test: scaling.apply(&test),
        scaling,
        dropped_rows,
        n_rows,
    })
}

struct Fitted {
    predictions_kw: Vec<f64>,
    trace: Vec<crate::optimizer::TracePoint>,
    parameters: Vec<f64>,
    status: String,
    seed: u64,
}

fn fit_and_predict(
    method: Method,
    config: &ExperimentConfig,
    prep: &PreparedData,
) -> Result<Fitted> {
    let train = &prep.train;
    let test = &prep.test;
    let classical = |predict: &dyn Fn(&[f64]) -> Result<f64>| -> Result<Fitted> {
        let predictions_kw = test
            .features
            .iter()
            .map(|x| predict(x))
            .collect::<Result<Vec<_>>>()?;
        Ok(Fitted {
            predictions_kw,
            trace: Vec::new(),
            parameters: Vec::new(),
            status: "fitted".into(),
            seed: config.split.seed,
        })
    };
    match method {
        Method::Qnn(id) => {
            let mut model = QnnModel::for_config(id, N_FEATURES, &config.qnn)?
                .with_scaling(prep.scaling.clone());
            let result = qnn::train(
                &mut model,
                train,
                &config.optimizer,
                config.qnn.gradient_mode,
                config.qnn.finite_difference_step,
            )?;
            let predictions_kw = model
                .predict_batch_scaled(&test.features)?
                .into_iter()
                .map(|y| prep.scaling.invert_target(y))
                .collect();
            Ok(Fitted {
                predictions_kw,
                trace: result.trace,
                parameters: result.parameters,
                status: result.status.as_str().into(),
                seed: config.qnn.init_seed,
            })
        }
        Method::DecisionTree => {
            let params = CartParams {
                max_depth: config.baselines.cart_max_depth,
                min_samples_split: config.baselines.cart_min_samples_split,
            };
            let model = CartModel::fit(&train.features, &train.targets_kw, params)?;
            classical(&|x| model.predict(x))
        }
        Method::Knn => {
            let model = KnnModel::fit(&train.features, &train.targets_kw, config.baselines.k)?;
            classical(&|x| model.predict(x))
        }
        Method::Ols => {
            let model = OlsModel::fit_named(&train.features, &train.targets_kw, &FEATURE_NAMES)?;
            classical(&|x| model.predict(x))
        }
    }
}

fn run_method(
    method: Method,
    config: &ExperimentConfig,
    prep: &PreparedData,
) -> std::result::Result<MethodResult, StageError> {
    let start = Instant::now();
    let fitted = fit_and_predict(method, config, prep).map_err(StageError::at(Stage::Train))?;
    let wall_time_s = start.elapsed().as_secs_f64();
    let metrics = MetricPair::compute(&prep.test.targets_kw, &fitted.predictions_kw)
        .map_err(StageError::at(Stage::Evaluate))?;
    let (feature_map, ansatz) = method.columns();
    Ok(MethodResult {
        config_id: method.id(),
        feature_map,
        ansatz,
        r2: metrics.r2,
        mae: metrics.mae,
        wall_time_s,
        seed: fitted.seed,
        trace: fitted.trace,
        predictions: prep
            .test
            .targets_kw
            .iter()
            .copied()
            .zip(fitted.predictions_kw)
            .collect(),
        parameters: fitted.parameters,
        status: fitted.status,
    })
}

/// Trains and evaluates `methods` on prepared data. Methods are independent:
/// a failing one is recorded in `failures` and the rest still run.
pub fn run_methods(
    methods: &[Method],
    config: &ExperimentConfig,
    prep: &PreparedData,
) -> ExperimentReport {
    let outcomes = par::with_threads(config.run.threads, || {
        par::map_ordered(methods, |&m| run_method(m, config, prep))
    });
    let mut report = ExperimentReport {
        include_wall_time: config.run.include_wall_time,
        ..Default::default()
    };
    for (m, outcome) in methods.iter().zip(outcomes) {
        match outcome {
            Ok(r) => report.methods.push(r),
            Err(e) => report.failures.push(MethodFailure {
                config_id: m.id(),
                message: e.to_string(),
            }),
        }
    }
    report
}

pub struct RunOutcome {
    pub report: ExperimentReport,
    pub run_dir: PathBuf,
    pub dropped_rows: usize,
}

/// Full pipeline. Artifacts are written even when some methods fail; check
/// `report.failures`.
pub fn run_experiment(config: &ExperimentConfig) -> std::result::Result<RunOutcome, StageError> {
    config.validate().map_err(StageError::at(Stage::Config))?;
    let methods = config.methods().map_err(StageError::at(Stage::Config))?;
    let prep = prepare_data(config)?;
    let mut report = run_methods(&methods, config, &prep);
    report.notes = run_notes(config, &prep);
    let run_dir = config.run_dir();
    write_run_artifact(&report, &run_dir).map_err(StageError::at(Stage::Report))?;
    Ok(RunOutcome {
        report,
        run_dir,
        dropped_rows: prep.dropped_rows,
    })
}

fn run_notes(config: &ExperimentConfig, prep: &PreparedData) -> Vec<(String, String)> {
    let data = match config.data.source {
        DataSource::Synthetic => format!(
            "synthetic, {} rows, seed {}",
            config.data.synthetic_rows, config.data.synthetic_seed
        ),
        DataSource::Csv => format!(
            "{}, {} rows kept, {} dropped",
            config
                .data
                .csv_path
                .as_deref()
                .map(|p| p.display().to_string())
                .unwrap_or_default(),
            prep.n_rows,
            prep.dropped_rows
        ),
    };
    let split = match config.split.mode {
        SplitKind::Shuffled => format!("shuffled (seed {})", config.split.seed),
        SplitKind::Chronological => "chronological".into(),
    };
    vec![
        ("data".into(), data),
        (
            "split".into(),
            format!(
                "{split}, fraction {}, {} train / {} test",
                config.split.fraction,
                prep.train.len(),
                prep.test.len()
            ),
        ),
        ("rng".into(), config.data.rng.clone()),
        (
            "qnn".into(),
            format!(
                "feature map reps {}, ansatz reps {}, ZZ entanglement {}, init seed {}, {} gradient",
                config.qnn.feature_map_reps,
                config.qnn.ansatz_reps,
                config.qnn.zz_entanglement.name(),
                config.qnn.init_seed,
                match config.qnn.gradient_mode {
                    GradientMode::ParameterShift => "parameter-shift",
                    GradientMode::FiniteDifference => "finite-difference",
                }
            ),
        ),
        (
            "optimizer".into(),
            format!("L-BFGS, max {} iterations, memory {}", config.optimizer.max_iterations, config.optimizer.memory),
        ),
    ]
}
