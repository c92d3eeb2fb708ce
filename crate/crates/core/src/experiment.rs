//! Experiment recipes and the pipelines they drive.
//!
//! A recipe is a TOML document naming one pipeline plus the configuration of
//! every stage it touches:
//!
//! ```toml
//! pipeline = "regression-uq"
//! seed = 1
//!
//! [data]
//! kind = "xsinx"
//! n = 60
//! lo = -5.0
//! hi = 5.0
//! seed = 1
//!
//! [test]
//! kind = "xsinx"
//! n = 120
//! lo = -15.0
//! hi = 15.0
//! seed = 2
//! ```

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::eval::{self, LabeledSeries, RocCurve, ZNorm};
use crate::kernelfield::{Bandwidth, SampleSet};
use crate::nn::{train, MlpModel, OutputMode, TrainConfig};
use crate::qipf::{self, ModeConfig, ModeMatrix, DEFAULT_PSI_FLOOR};
use crate::uq::{self, argmax, McConfig, SurrogateConfig, UncertaintyReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Pipeline {
    GridStudy,
    Dominance,
    RegressionUq,
    ClassificationUq,
    CalibrationTable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DataSpec {
    Sine {
        freqs: Vec<f64>,
        fs: f64,
        n: usize,
    },
    Lorenz {
        n: usize,
        #[serde(default = "default_dt")]
        dt: f64,
        #[serde(default)]
        component: usize,
    },
    Xsinx {
        n: usize,
        lo: f64,
        hi: f64,
        seed: u64,
    },
    Twosine {
        #[serde(default = "default_left")]
        n_left: usize,
        #[serde(default = "default_right")]
        n_right: usize,
        #[serde(default = "default_noise")]
        noise_sd: f64,
        seed: u64,
    },
    TwosineUniform {
        n: usize,
        lo: f64,
        hi: f64,
        #[serde(default = "default_noise")]
        noise_sd: f64,
        seed: u64,
    },
    Blobs {
        n_per_class: usize,
        centers: Vec<Vec<f64>>,
        std: f64,
        seed: u64,
    },
    Csv {
        path: PathBuf,
    },
}

fn default_dt() -> f64 {
    0.01
}
fn default_left() -> usize {
    40
}
fn default_right() -> usize {
    10
}
fn default_noise() -> f64 {
    0.03
}

impl DataSpec {
    /// Input/target pairs. Scalar series become `(t, value)` pairs.
    pub fn labeled(&self, base: &Path) -> Result<LabeledSeries> {
        match self {
            DataSpec::Sine { freqs, fs, n } => {
                let v = eval::gen_sine(freqs, *fs, *n)?;
                LabeledSeries::new(
                    "sine",
                    (0..v.len()).map(|i| vec![i as f64 / fs]).collect(),
                    v.into_iter().map(|y| vec![y]).collect(),
                )
            }
            DataSpec::Lorenz { n, dt, component } => {
                let v = eval::gen_lorenz(*n, *dt, *component)?;
                LabeledSeries::new(
                    "lorenz",
                    (0..v.len()).map(|i| vec![i as f64 * dt]).collect(),
                    v.into_iter().map(|y| vec![y]).collect(),
                )
            }
            DataSpec::Xsinx { n, lo, hi, seed } => eval::gen_xsinx(*n, *lo, *hi, *seed),
            DataSpec::Twosine {
                n_left,
                n_right,
                noise_sd,
                seed,
            } => eval::gen_twosine(*n_left, *n_right, *noise_sd, *seed),
            DataSpec::TwosineUniform {
                n,
                lo,
                hi,
                noise_sd,
                seed,
            } => eval::gen_twosine_uniform(*n, *lo, *hi, *noise_sd, *seed),
            DataSpec::Blobs {
                n_per_class,
                centers,
                std,
                seed,
            } => eval::gen_blobs(*n_per_class, centers, *std, *seed),
            DataSpec::Csv { path } => {
                let p = resolve(base, path);
                let name = p.file_stem().map_or("csv".into(), |s| s.to_string_lossy().into_owned());
                LabeledSeries::read_csv(name, File::open(&p).map_err(|e| io_context(&p, e))?)
            }
        }
    }

    /// A scalar sample sequence: the series itself, or the last CSV column.
    pub fn series(&self, base: &Path) -> Result<Vec<f64>> {
        match self {
            DataSpec::Sine { freqs, fs, n } => eval::gen_sine(freqs, *fs, *n),
            DataSpec::Lorenz { n, dt, component } => eval::gen_lorenz(*n, *dt, *component),
            other => Ok(other
                .labeled(base)?
                .targets
                .into_iter()
                .map(|t| t[t.len() - 1])
                .collect()),
        }
    }
}

fn resolve(base: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

fn io_context(p: &Path, e: std::io::Error) -> Error {
    Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", p.display())))
}

/// Parses `lo:hi:step`.
pub fn parse_grid(spec: &str) -> Result<(f64, f64, f64)> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(invalid(format!("grid must be lo:hi:step, got {spec:?}")));
    }
    let num = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|_| invalid(format!("grid component {s:?} is not a number")))
    };
    let (lo, hi, step) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
    qipf::grid(lo, hi, step)?;
    Ok((lo, hi, step))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModesSection {
    pub num_modes: usize,
    pub sigmas: Vec<f64>,
    pub grid: String,
    /// Samples skipped before time-series evaluation starts.
    pub warmup: usize,
    pub psi_floor: f64,
    /// `|x|` beyond which grid points count as tails.
    pub tail: f64,
}

impl Default for ModesSection {
    fn default() -> Self {
        Self {
            num_modes: 6,
            sigmas: vec![1.2],
            grid: "-6:6:0.1".into(),
            warmup: 10,
            psi_floor: DEFAULT_PSI_FLOOR,
            tail: 5.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSection {
    pub hidden: Vec<usize>,
    /// z-normalize inputs (and regression targets) with training statistics.
    pub normalize: bool,
}

impl Default for ModelSection {
    fn default() -> Self {
        Self {
            hidden: vec![20, 20, 20],
            normalize: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CalibrationSection {
    pub splits: usize,
    pub test_fraction: f64,
    pub seed: u64,
}

impl Default for CalibrationSection {
    fn default() -> Self {
        Self {
            splits: 20,
            test_fraction: 0.1,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentRecipe {
    pub pipeline: Pipeline,
    /// Model initialization seed; MC-dropout masks use `seed + 1`.
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    pub data: DataSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub test: Option<DataSpec>,
    #[serde(default)]
    pub modes: ModesSection,
    #[serde(default)]
    pub model: ModelSection,
    #[serde(default)]
    pub train: TrainConfig,
    #[serde(default)]
    pub surrogate: SurrogateConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mc: Option<McConfig>,
    #[serde(default)]
    pub calibration: CalibrationSection,
}

impl ExperimentRecipe {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let p = path.as_ref();
        Self::from_toml(&std::fs::read_to_string(p).map_err(|e| io_context(p, e))?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridStudyResult {
    pub sigma: f64,
    pub matrix: ModeMatrix,
    /// IPF of the samples at each grid point.
    pub ipf: Vec<f64>,
    /// Dominant mode number (1-based) at each grid point.
    pub dominant: Vec<usize>,
    pub dominant_at_zero: usize,
    /// Most frequent dominant mode over points with `|x| >= tail`; ties go to
    /// the lower mode.
    pub tail_dominant: usize,
    /// Mean `|x|` of the grid points where each mode attains its minimum.
    pub minima_mean_abs: Vec<f64>,
    /// Spearman correlation between mode number and `minima_mean_abs`.
    pub minima_spearman: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominanceResult {
    pub matrix: ModeMatrix,
    pub histogram: Vec<usize>,
    pub entropy: f64,
    /// Number of modes holding at least 1% of the dominance counts.
    pub modes_over_one_percent: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegressionUqResult {
    pub inputs: Vec<Vec<f64>>,
    pub targets: Vec<Vec<f64>>,
    pub predictions: Vec<Vec<f64>>,
    pub abs_errors: Vec<f64>,
    pub qipf: UncertaintyReport,
    pub mc: Option<UncertaintyReport>,
    pub loss_history: Vec<f64>,
    #[serde(skip)]
    pub model: Option<MlpModel>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClassificationUqResult {
    pub labels: Vec<usize>,
    pub predicted: Vec<usize>,
    pub misclassified: Vec<bool>,
    pub qipf: UncertaintyReport,
    pub mc: UncertaintyReport,
    pub roc_qipf: RocCurve,
    pub roc_mc: RocCurve,
    pub loss_history: Vec<f64>,
    #[serde(skip)]
    pub model: Option<MlpModel>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationResult {
    pub dataset: String,
    pub n: usize,
    pub q: usize,
    pub mc_rmse: Vec<f64>,
    pub qipf_rmse: Vec<f64>,
}

fn mean_and_std(xs: &[f64]) -> (f64, f64) {
    (xs.iter().sum::<f64>() / xs.len() as f64, qipf::population_std(xs))
}

/// `mean +- std` to three decimals.
pub fn table_cell(values: &[f64]) -> String {
    let (m, s) = mean_and_std(values);
    format!("{m:.3} +- {s:.3}")
}

impl CalibrationResult {
    pub fn write_table<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        w.write_record(["dataset", "N", "Q", "mc_dropout", "qipf"])?;
        w.write_record([
            self.dataset.clone(),
            self.n.to_string(),
            self.q.to_string(),
            table_cell(&self.mc_rmse),
            table_cell(&self.qipf_rmse),
        ])?;
        w.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PipelineOutput {
    GridStudy(Vec<GridStudyResult>),
    Dominance(DominanceResult),
    RegressionUq(Box<RegressionUqResult>),
    ClassificationUq(Box<ClassificationUqResult>),
    CalibrationTable(CalibrationResult),
}

pub fn run_recipe(recipe: &ExperimentRecipe, base: &Path) -> Result<PipelineOutput> {
    Ok(match recipe.pipeline {
        Pipeline::GridStudy => PipelineOutput::GridStudy(grid_study(recipe, base)?),
        Pipeline::Dominance => PipelineOutput::Dominance(dominance(recipe, base)?),
        Pipeline::RegressionUq => PipelineOutput::RegressionUq(Box::new(regression_uq(recipe, base)?)),
        Pipeline::ClassificationUq => PipelineOutput::ClassificationUq(Box::new(classification_uq(recipe, base)?)),
        Pipeline::CalibrationTable => PipelineOutput::CalibrationTable(calibration_table(recipe, base)?),
    })
}

pub fn grid_study(recipe: &ExperimentRecipe, base: &Path) -> Result<Vec<GridStudyResult>> {
    let m = &recipe.modes;
    let series = recipe.data.series(base)?;
    let centers = SampleSet::from_scalars(&series)?;
    let (lo, hi, step) = parse_grid(&m.grid)?;
    let grid = qipf::grid(lo, hi, step)?;
    if m.sigmas.is_empty() {
        return Err(Error::Config("modes.sigmas must not be empty".into()));
    }
    m.sigmas
        .iter()
        .map(|&s| {
            let cfg = ModeConfig::with_floor(m.num_modes, Bandwidth::new(s)?, m.psi_floor)?;
            let matrix = qipf::qipf_modes(&centers, &cfg, &grid)?;
            summarize_grid(matrix, &centers, m.tail)
        })
        .collect()
}

fn summarize_grid(matrix: ModeMatrix, centers: &SampleSet, tail: f64) -> Result<GridStudyResult> {
    let xs: Vec<f64> = matrix.eval_points.as_flat().to_vec();
    let dominant: Vec<usize> = (0..xs.len()).map(|p| qipf::dominant_mode(&matrix, p) + 1).collect();
    let zero = xs
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
        .map(|(i, _)| i)
        .unwrap_or(0);
    let mut counts = vec![0usize; matrix.num_modes() + 1];
    for (x, d) in xs.iter().zip(&dominant) {
        if x.abs() >= tail - 1e-9 {
            counts[*d] += 1;
        }
    }
    let tail_dominant = if counts.iter().all(|c| *c == 0) {
        0
    } else {
        argmax_first(&counts)
    };
    let minima_mean_abs: Vec<f64> = matrix
        .values
        .iter()
        .map(|row| {
            let hi = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let tol = 1e-9 * hi.max(f64::MIN_POSITIVE);
            let at: Vec<f64> = row
                .iter()
                .zip(&xs)
                .filter(|(v, _)| **v <= tol)
                .map(|(_, x)| x.abs())
                .collect();
            at.iter().sum::<f64>() / at.len() as f64
        })
        .collect();
    let orders: Vec<f64> = (1..=matrix.num_modes()).map(|k| k as f64).collect();
    let minima_spearman = eval::spearman(&orders, &minima_mean_abs).unwrap_or(f64::NAN);
    let ipf = xs
        .iter()
        .map(|&x| crate::kernelfield::ipf(centers, matrix.sigma, &[x]))
        .collect::<Result<Vec<_>>>()?;
    Ok(GridStudyResult {
        sigma: matrix.sigma.value(),
        dominant_at_zero: dominant[zero],
        tail_dominant,
        dominant,
        minima_mean_abs,
        minima_spearman,
        ipf,
        matrix,
    })
}

fn argmax_first(counts: &[usize]) -> usize {
    let mut best = 0;
    for (i, c) in counts.iter().enumerate() {
        if *c > counts[best] {
            best = i;
        }
    }
    best
}

pub fn dominance(recipe: &ExperimentRecipe, base: &Path) -> Result<DominanceResult> {
    let m = &recipe.modes;
    let series = recipe.data.series(base)?;
    let sigma = *m
        .sigmas
        .first()
        .ok_or_else(|| Error::Config("modes.sigmas must not be empty".into()))?;
    let cfg = ModeConfig::with_floor(m.num_modes, Bandwidth::new(sigma)?, m.psi_floor)?;
    let matrix = qipf::timeseries_qipf(&series, &cfg, m.warmup)?;
    let histogram = qipf::dominance_histogram(&matrix);
    let total: usize = histogram.iter().sum();
    Ok(DominanceResult {
        entropy: eval::shannon_entropy(&histogram),
        modes_over_one_percent: histogram.iter().filter(|&&c| c as f64 >= 0.01 * total as f64).count(),
        histogram,
        matrix,
    })
}

/// A trained network with the normalizers fit on its training data.
#[derive(Debug, Clone, PartialEq)]
pub struct FittedModel {
    pub model: MlpModel,
    pub loss_history: Vec<f64>,
    pub xnorm: Option<ZNorm>,
    pub ynorm: Option<ZNorm>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Normalizers {
    inputs: Option<ZNorm>,
    targets: Option<ZNorm>,
}

impl FittedModel {
    /// Writes `model.json`, `normalization.json` and `loss.csv` into `dir`.
    pub fn save(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir).map_err(|e| io_context(dir, e))?;
        crate::nn::save_model(&self.model, dir.join("model.json"))?;
        let norms = Normalizers {
            inputs: self.xnorm.clone(),
            targets: self.ynorm.clone(),
        };
        let mut files = vec![dir.join("model.json"), write_json(dir, "normalization.json", &norms)?];
        let mut w = create(dir, "loss.csv")?;
        writeln!(w, "epoch,loss")?;
        for (i, l) in self.loss_history.iter().enumerate() {
            writeln!(w, "{},{l}", i + 1)?;
        }
        w.flush()?;
        files.push(dir.join("loss.csv"));
        Ok(files)
    }

    /// Reads what [`FittedModel::save`] wrote. A missing normalization file
    /// means the model takes raw inputs; the loss log is not read back.
    pub fn load(dir: &Path) -> Result<Self> {
        let model = crate::nn::load_model(dir.join("model.json"))?;
        let norm_path = dir.join("normalization.json");
        let norms = if norm_path.exists() {
            let text = std::fs::read_to_string(&norm_path).map_err(|e| io_context(&norm_path, e))?;
            serde_json::from_str(&text)?
        } else {
            Normalizers {
                inputs: None,
                targets: None,
            }
        };
        Ok(Self {
            model,
            loss_history: Vec::new(),
            xnorm: norms.inputs,
            ynorm: norms.targets,
        })
    }
}

fn pipeline_mode(p: Pipeline) -> OutputMode {
    match p {
        Pipeline::ClassificationUq => OutputMode::Classification,
        _ => OutputMode::Regression,
    }
}

/// Trains the recipe's network on its `[data]` section.
pub fn fit(recipe: &ExperimentRecipe, base: &Path) -> Result<FittedModel> {
    let train_set = recipe.data.labeled(base)?;
    fit_model(recipe, &train_set, pipeline_mode(recipe.pipeline), recipe.seed)
}

fn fit_model(recipe: &ExperimentRecipe, train_set: &LabeledSeries, mode: OutputMode, seed: u64) -> Result<FittedModel> {
    if train_set.is_empty() {
        return Err(invalid("training set is empty"));
    }
    let out_dim = match mode {
        OutputMode::Regression => train_set.target_dim(),
        OutputMode::Classification => 1 + train_set.targets.iter().map(|t| t[0] as usize).max().unwrap_or(0),
    };
    let mut sizes = vec![train_set.input_dim()];
    sizes.extend(&recipe.model.hidden);
    sizes.push(out_dim);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let init = MlpModel::init(&sizes, mode, &mut rng)?;
    let (xnorm, ynorm) = if recipe.model.normalize {
        let y = (mode == OutputMode::Regression)
            .then(|| ZNorm::fit(&train_set.targets))
            .transpose()?;
        (Some(ZNorm::fit(&train_set.inputs)?), y)
    } else {
        (None, None)
    };
    let xs = xnorm
        .as_ref()
        .map_or_else(|| train_set.inputs.clone(), |z| z.apply(&train_set.inputs));
    let ys = ynorm
        .as_ref()
        .map_or_else(|| train_set.targets.clone(), |z| z.apply(&train_set.targets));
    let out = train(&init, &xs, &ys, &recipe.train)?;
    Ok(FittedModel {
        model: out.model,
        loss_history: out.loss_history,
        xnorm,
        ynorm,
    })
}

impl FittedModel {
    fn inputs(&self, raw: &[Vec<f64>]) -> Vec<Vec<f64>> {
        self.xnorm.as_ref().map_or_else(|| raw.to_vec(), |z| z.apply(raw))
    }

    fn outputs(&self, raw: &[Vec<f64>]) -> Vec<Vec<f64>> {
        self.ynorm.as_ref().map_or_else(|| raw.to_vec(), |z| z.invert(raw))
    }

    /// Epistemic std rescaled to target units.
    fn rescale_mc(&self, report: &mut UncertaintyReport) {
        if let Some(z) = &self.ynorm {
            let s = z.std.iter().sum::<f64>() / z.std.len() as f64;
            for e in &mut report.entries {
                e.uncertainty *= s;
                e.prediction = z.invert(std::slice::from_ref(&e.prediction)).remove(0);
            }
        }
    }
}

/// Loads the `[test]` section, which uq pipelines require.
pub fn test_set(recipe: &ExperimentRecipe, base: &Path) -> Result<LabeledSeries> {
    recipe
        .test
        .as_ref()
        .ok_or_else(|| Error::Config("pipeline requires a [test] data section".into()))?
        .labeled(base)
}

fn abs_errors(pred: &[Vec<f64>], targets: &[Vec<f64>]) -> Vec<f64> {
    pred.iter()
        .zip(targets)
        .map(|(p, t)| p.iter().zip(t).map(|(a, b)| (a - b).abs()).sum::<f64>() / p.len() as f64)
        .collect()
}

pub fn regression_uq(recipe: &ExperimentRecipe, base: &Path) -> Result<RegressionUqResult> {
    let test = test_set(recipe, base)?;
    let prep = fit(recipe, base)?;
    regression_uq_with(recipe, test, prep)
}

/// Regression pipeline on an already trained model.
pub fn regression_uq_with(
    recipe: &ExperimentRecipe,
    test: LabeledSeries,
    prep: FittedModel,
) -> Result<RegressionUqResult> {
    if prep.model.output_mode() != OutputMode::Regression {
        return Err(invalid("regression pipeline needs a regression model"));
    }
    let xs = prep.inputs(&test.inputs);
    let qipf = uq::cross_qipf_report(&prep.model, &xs, &recipe.surrogate)?;
    let raw_pred: Vec<Vec<f64>> = qipf.entries.iter().map(|e| e.prediction.clone()).collect();
    let predictions = prep.outputs(&raw_pred);
    let mc = recipe
        .mc
        .as_ref()
        .map(|cfg| {
            let seed = recipe.seed.wrapping_add(1);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut rep = uq::mc_dropout_report(&prep.model, &xs, cfg, Some(seed), &mut rng)?;
            prep.rescale_mc(&mut rep);
            Ok::<_, Error>(rep)
        })
        .transpose()?;
    Ok(RegressionUqResult {
        abs_errors: abs_errors(&predictions, &test.targets),
        inputs: test.inputs,
        targets: test.targets,
        predictions,
        qipf,
        mc,
        loss_history: prep.loss_history,
        model: Some(prep.model),
    })
}

pub fn classification_uq(recipe: &ExperimentRecipe, base: &Path) -> Result<ClassificationUqResult> {
    let test = test_set(recipe, base)?;
    let prep = fit(recipe, base)?;
    classification_uq_with(recipe, test, prep)
}

/// Classification pipeline on an already trained model.
pub fn classification_uq_with(
    recipe: &ExperimentRecipe,
    test: LabeledSeries,
    prep: FittedModel,
) -> Result<ClassificationUqResult> {
    if prep.model.output_mode() != OutputMode::Classification {
        return Err(invalid("classification pipeline needs a softmax model"));
    }
    let xs = prep.inputs(&test.inputs);
    let qipf = uq::cross_qipf_report(&prep.model, &xs, &recipe.surrogate)?;
    let cfg = recipe.mc.unwrap_or_default();
    let seed = recipe.seed.wrapping_add(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mc = uq::mc_dropout_report(&prep.model, &xs, &cfg, Some(seed), &mut rng)?;
    let labels: Vec<usize> = test.targets.iter().map(|t| t[0] as usize).collect();
    let predicted: Vec<usize> = qipf.entries.iter().map(|e| argmax(&e.prediction)).collect();
    let misclassified: Vec<bool> = labels.iter().zip(&predicted).map(|(a, b)| a != b).collect();
    Ok(ClassificationUqResult {
        roc_qipf: eval::roc_auc(&qipf.uncertainties(), &misclassified)?,
        roc_mc: eval::roc_auc(&mc.uncertainties(), &misclassified)?,
        labels,
        predicted,
        misclassified,
        qipf,
        mc,
        loss_history: prep.loss_history,
        model: Some(prep.model),
    })
}

/// Seeded train/test splits; per split a fresh model (seed `seed + split`),
/// then calibration RMSE of the cross-QIPF and MC-dropout uncertainties
/// against absolute test errors.
pub fn calibration_table(recipe: &ExperimentRecipe, base: &Path) -> Result<CalibrationResult> {
    let data = recipe.data.labeled(base)?;
    let c = &recipe.calibration;
    let splits = eval::split_k(data.len(), c.splits, c.test_fraction, c.seed)?;
    let mc_cfg = recipe.mc.unwrap_or_default();
    let mut mc_rmse = Vec::with_capacity(splits.len());
    let mut qipf_rmse = Vec::with_capacity(splits.len());
    for (i, split) in splits.iter().enumerate() {
        let seed = recipe.seed.wrapping_add(i as u64);
        let train_set = data.subset(&split.train);
        let test = data.subset(&split.test);
        let prep = fit_model(recipe, &train_set, OutputMode::Regression, seed)?;
        let xs = prep.inputs(&test.inputs);
        let q = uq::cross_qipf_report(&prep.model, &xs, &recipe.surrogate)?;
        let raw_pred: Vec<Vec<f64>> = q.entries.iter().map(|e| e.prediction.clone()).collect();
        let err = abs_errors(&prep.outputs(&raw_pred), &test.targets);
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
        let mut mc = uq::mc_dropout_report(&prep.model, &xs, &mc_cfg, None, &mut rng)?;
        prep.rescale_mc(&mut mc);
        qipf_rmse.push(eval::calibration_rmse(&q.uncertainties(), &err)?);
        mc_rmse.push(eval::calibration_rmse(&mc.uncertainties(), &err)?);
        log::info!(
            "split {}/{}: qipf {:.3}, mc {:.3}",
            i + 1,
            splits.len(),
            qipf_rmse[i],
            mc_rmse[i]
        );
    }
    Ok(CalibrationResult {
        dataset: data.name.clone(),
        n: data.len(),
        q: data.input_dim(),
        mc_rmse,
        qipf_rmse,
    })
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    let p = dir.join(name);
    Ok(BufWriter::new(File::create(&p).map_err(|e| io_context(&p, e))?))
}

fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<PathBuf> {
    let mut w = create(dir, name)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(dir.join(name))
}

/// Long-format ROC points, `method,fpr,tpr`.
pub fn write_roc_csv<W: Write>(out: W, curves: &[(&str, &RocCurve)]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(["method", "fpr", "tpr"])?;
    for (name, c) in curves {
        for (x, y) in c.fpr.iter().zip(&c.tpr) {
            w.write_record([name.to_string(), x.to_string(), y.to_string()])?;
        }
    }
    w.flush()?;
    Ok(())
}

impl PipelineOutput {
    /// Writes result files into `dir` and returns their paths.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir).map_err(|e| io_context(dir, e))?;
        let mut files = Vec::new();
        match self {
            PipelineOutput::GridStudy(results) => {
                for r in results {
                    let stem = format!("modes_sigma{}", r.sigma);
                    let mut w = create(dir, &format!("{stem}.csv"))?;
                    r.matrix.write_csv(&mut w)?;
                    w.flush()?;
                    files.push(dir.join(format!("{stem}.csv")));
                    files.push(write_json(dir, &format!("{stem}.json"), &r.matrix)?);
                }
                let summary: Vec<_> = results
                    .iter()
                    .map(|r| {
                        serde_json::json!({
                            "sigma": r.sigma,
                            "dominant_at_zero": r.dominant_at_zero,
                            "tail_dominant": r.tail_dominant,
                            "minima_mean_abs": r.minima_mean_abs,
                            "minima_spearman": r.minima_spearman,
                        })
                    })
                    .collect();
                files.push(write_json(dir, "summary.json", &summary)?);
            }
            PipelineOutput::Dominance(r) => {
                let mut w = create(dir, "modes.csv")?;
                r.matrix.write_csv(&mut w)?;
                w.flush()?;
                files.push(dir.join("modes.csv"));
                let summary = serde_json::json!({
                    "histogram": r.histogram,
                    "entropy": r.entropy,
                    "modes_over_one_percent": r.modes_over_one_percent,
                });
                files.push(write_json(dir, "summary.json", &summary)?);
            }
            PipelineOutput::RegressionUq(r) => {
                let mut w = create(dir, "qipf.jsonl")?;
                r.qipf.write_jsonl(&mut w)?;
                w.flush()?;
                files.push(dir.join("qipf.jsonl"));
                if let Some(mc) = &r.mc {
                    let mut w = create(dir, "mc_dropout.jsonl")?;
                    mc.write_jsonl(&mut w)?;
                    w.flush()?;
                    files.push(dir.join("mc_dropout.jsonl"));
                }
                let mut w = csv::WriterBuilder::new()
                    .terminator(csv::Terminator::Any(b'\n'))
                    .from_writer(create(dir, "predictions.csv")?);
                w.write_record(["x", "y", "prediction", "abs_error", "qipf", "mc_dropout"])?;
                for i in 0..r.inputs.len() {
                    let mc =
                        r.mc.as_ref()
                            .map_or(String::new(), |m| m.entries[i].uncertainty.to_string());
                    w.write_record([
                        r.inputs[i][0].to_string(),
                        r.targets[i][0].to_string(),
                        r.predictions[i][0].to_string(),
                        r.abs_errors[i].to_string(),
                        r.qipf.entries[i].uncertainty.to_string(),
                        mc,
                    ])?;
                }
                w.flush()?;
                files.push(dir.join("predictions.csv"));
                if let Some(m) = &r.model {
                    crate::nn::save_model(m, dir.join("model.json"))?;
                    files.push(dir.join("model.json"));
                }
                let mut summary = serde_json::json!({
                    "test_points": r.inputs.len(),
                    "final_loss": r.loss_history.last(),
                    "qipf_calibration_rmse": eval::calibration_rmse(&r.qipf.uncertainties(), &r.abs_errors)?,
                });
                if let Some(mc) = &r.mc {
                    summary["mc_calibration_rmse"] = eval::calibration_rmse(&mc.uncertainties(), &r.abs_errors)?.into();
                }
                files.push(write_json(dir, "summary.json", &summary)?);
            }
            PipelineOutput::ClassificationUq(r) => {
                for (name, rep) in [("qipf.jsonl", &r.qipf), ("mc_dropout.jsonl", &r.mc)] {
                    let mut w = create(dir, name)?;
                    rep.write_jsonl(&mut w)?;
                    w.flush()?;
                    files.push(dir.join(name));
                }
                let w = create(dir, "roc.csv")?;
                write_roc_csv(w, &[("qipf", &r.roc_qipf), ("mc_dropout", &r.roc_mc)])?;
                files.push(dir.join("roc.csv"));
                let summary = serde_json::json!({
                    "test_points": r.labels.len(),
                    "misclassified": r.misclassified.iter().filter(|m| **m).count(),
                    "auc_qipf": r.roc_qipf.auc,
                    "auc_mc_dropout": r.roc_mc.auc,
                });
                files.push(write_json(dir, "summary.json", &summary)?);
            }
            PipelineOutput::CalibrationTable(r) => {
                let mut w = create(dir, "table.csv")?;
                r.write_table(&mut w)?;
                w.flush()?;
                files.push(dir.join("table.csv"));
                files.push(write_json(dir, "splits.json", r)?);
            }
        }
        Ok(files)
    }
}
