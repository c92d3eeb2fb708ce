//! Predictive uncertainty for a trained [`MlpModel`].
//!
//! The cross-QIPF surrogate treats one layer's scalar activations (or pooled
//! weights) as kernel centers, evaluates the Hermite modes of that field at a
//! scalar summary of the network output, and reports the spread of the mode
//! vector. It needs one deterministic forward pass per input. The MC-dropout
//! baseline needs `T` stochastic passes.

use std::io::Write;
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::kernelfield::{silverman_bandwidth, Bandwidth, SampleSet};
use crate::nn::{MlpModel, OutputMode};
use crate::qipf::{population_std, ModeEvaluator, DEFAULT_PSI_FLOOR};

pub const DEFAULT_TAU: f64 = 1e-2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LayerSelection {
    All,
    Indices(Vec<usize>),
}

impl LayerSelection {
    fn resolve(&self, available: usize, what: &str) -> Result<Vec<usize>> {
        match self {
            LayerSelection::All if available > 0 => Ok((0..available).collect()),
            LayerSelection::All => Err(invalid(format!("model has no {what}"))),
            LayerSelection::Indices(ix) if ix.is_empty() => Err(invalid("layer selection is empty")),
            LayerSelection::Indices(ix) => {
                if let Some(bad) = ix.iter().find(|&&i| i >= available) {
                    return Err(invalid(format!(
                        "{what} index {bad} out of range ({available} available)"
                    )));
                }
                Ok(ix.clone())
            }
        }
    }
}

/// How kernel widths are chosen per center population.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BandwidthRule {
    /// `σ = m · silverman(centers)` for each multiplier `m`.
    SilvermanMultiples(Vec<f64>),
    /// Fixed widths, independent of the centers.
    Fixed(Vec<f64>),
}

impl BandwidthRule {
    fn values(&self) -> &[f64] {
        match self {
            BandwidthRule::SilvermanMultiples(v) | BandwidthRule::Fixed(v) => v,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CenterSource {
    /// Hidden-layer post-activations of the current input.
    Activations,
    /// Layer weights, flattened row-major and averaged over non-overlapping
    /// windows.
    PooledWeights { window: usize },
}

/// Domain of the minimum that offsets each mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EkMode {
    /// Minimum over the whole test set.
    #[default]
    Batch,
    /// Minimum over the inputs processed so far.
    Running,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurrogateConfig {
    pub layers: LayerSelection,
    pub num_modes: usize,
    pub bandwidth: BandwidthRule,
    pub center_source: CenterSource,
    #[serde(default)]
    pub ek_mode: EkMode,
    #[serde(default = "default_psi_floor")]
    pub psi_floor: f64,
}

fn default_psi_floor() -> f64 {
    DEFAULT_PSI_FLOOR
}

impl Default for SurrogateConfig {
    fn default() -> Self {
        Self {
            layers: LayerSelection::All,
            num_modes: 5,
            bandwidth: BandwidthRule::SilvermanMultiples(vec![20.0]),
            center_source: CenterSource::Activations,
            ek_mode: EkMode::Batch,
            psi_floor: DEFAULT_PSI_FLOOR,
        }
    }
}

impl SurrogateConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_modes < 2 {
            return Err(invalid("the surrogate needs num_modes >= 2"));
        }
        if let LayerSelection::Indices(ix) = &self.layers {
            if ix.is_empty() {
                return Err(invalid("layer selection is empty"));
            }
        }
        let bw = self.bandwidth.values();
        if bw.is_empty() {
            return Err(invalid("at least one bandwidth is required"));
        }
        if let Some(b) = bw.iter().find(|b| !(b.is_finite() && **b > 0.0)) {
            return Err(invalid(format!("bandwidths must be positive, got {b}")));
        }
        if let CenterSource::PooledWeights { window: 0 } = self.center_source {
            return Err(invalid("pooling window must be >= 1"));
        }
        ModeEvaluator::new(self.num_modes, self.psi_floor)?;
        Ok(())
    }

    fn resolve_layers(&self, model: &MlpModel) -> Result<Vec<usize>> {
        match self.center_source {
            CenterSource::Activations => self.layers.resolve(model.num_hidden(), "hidden layer"),
            CenterSource::PooledWeights { .. } => self.layers.resolve(model.layers().len(), "layer"),
        }
    }
}

/// Concatenated weights of the selected layers, averaged over non-overlapping
/// windows. A trailing partial window is averaged over its own length.
pub fn weight_centers(model: &MlpModel, layers: &LayerSelection, window: usize) -> Result<SampleSet> {
    if window == 0 {
        return Err(invalid("pooling window must be >= 1"));
    }
    let flat: Vec<f64> = layers
        .resolve(model.layers().len(), "layer")?
        .into_iter()
        .flat_map(|i| model.layers()[i].weights.iter().copied())
        .collect();
    if window > flat.len() {
        return Err(invalid(format!(
            "pooling window {window} exceeds the {} selected weights",
            flat.len()
        )));
    }
    let pooled: Vec<f64> = flat
        .chunks(window)
        .map(|c| c.iter().sum::<f64>() / c.len() as f64)
        .collect();
    SampleSet::from_scalars(&pooled)
}

/// Scalar evaluation point: mean last-layer pre-activation for regression,
/// pre-softmax value of the predicted class for classification.
pub fn evaluation_point(mode: OutputMode, last_pre_activation: &[f64]) -> f64 {
    match mode {
        OutputMode::Regression => last_pre_activation.iter().sum::<f64>() / last_pre_activation.len() as f64,
        OutputMode::Classification => last_pre_activation[argmax(last_pre_activation)],
    }
}

pub(crate) fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate().skip(1) {
        if *x > v[best] {
            best = i;
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UqEntry {
    pub index: usize,
    pub prediction: Vec<f64>,
    /// Aggregate uncertainty (non-negative).
    pub uncertainty: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eval_point: Option<f64>,
    /// Pooled mode values, layer-major.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub modes: Vec<f64>,
    #[serde(default)]
    pub near_node: bool,
    #[serde(default)]
    pub far_field: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mc: Option<McEstimate>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum UqMethod {
    CrossQipf,
    McDropout,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub method: UqMethod,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub surrogate: Option<SurrogateConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mc: Option<McConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub forward_passes: usize,
    /// Wall-clock time; left out of serialized output so that reports are
    /// reproducible byte for byte.
    #[serde(skip)]
    pub elapsed_secs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UncertaintyReport {
    pub metadata: ReportMetadata,
    pub entries: Vec<UqEntry>,
}

impl UncertaintyReport {
    pub fn uncertainties(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.uncertainty).collect()
    }

    /// One JSON object per test point.
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> Result<()> {
        for e in &self.entries {
            serde_json::to_writer(&mut out, e)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn read_jsonl<R: std::io::BufRead>(input: R) -> Result<Vec<UqEntry>> {
        let mut entries = Vec::new();
        for line in input.lines() {
            let line = line?;
            if !line.trim().is_empty() {
                entries.push(serde_json::from_str(&line)?);
            }
        }
        Ok(entries)
    }

    pub fn write_summary_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        w.write_record(["index", "prediction", "uncertainty", "near_node"])?;
        for e in &self.entries {
            let pred = e.prediction.iter().map(f64::to_string).collect::<Vec<_>>().join(";");
            w.write_record([
                e.index.to_string(),
                pred,
                e.uncertainty.to_string(),
                e.near_node.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

struct RawPoint {
    prediction: Vec<f64>,
    eval_point: f64,
    /// `[layer][bandwidth][k]`.
    ratios: Vec<Vec<Vec<f64>>>,
    near_node: bool,
    far_field: bool,
}

struct Surrogate<'a> {
    model: &'a MlpModel,
    cfg: &'a SurrogateConfig,
    layers: Vec<usize>,
    evaluator: ModeEvaluator,
    static_centers: Option<Vec<SampleSet>>,
}

impl<'a> Surrogate<'a> {
    fn new(model: &'a MlpModel, cfg: &'a SurrogateConfig) -> Result<Self> {
        cfg.validate()?;
        let layers = cfg.resolve_layers(model)?;
        let static_centers = match cfg.center_source {
            CenterSource::Activations => None,
            CenterSource::PooledWeights { window } => Some(
                layers
                    .iter()
                    .map(|&l| weight_centers(model, &LayerSelection::Indices(vec![l]), window))
                    .collect::<Result<Vec<_>>>()?,
            ),
        };
        Ok(Self {
            model,
            cfg,
            layers,
            evaluator: ModeEvaluator::new(cfg.num_modes, cfg.psi_floor)?,
            static_centers,
        })
    }

    fn widths(&self, centers: &SampleSet, layer: usize) -> Result<Vec<Bandwidth>> {
        match &self.cfg.bandwidth {
            BandwidthRule::Fixed(v) => v.iter().map(|&s| Bandwidth::new(s)).collect(),
            BandwidthRule::SilvermanMultiples(m) => {
                let base = silverman_bandwidth(centers).map_err(|e| match e {
                    Error::DegenerateCenters(why) => Error::DegenerateCenters(format!("layer {layer}: {why}")),
                    other => other,
                })?;
                m.iter().map(|&c| base.scaled(c)).collect()
            }
        }
    }

    fn raw(&self, input: &[f64]) -> Result<RawPoint> {
        let (prediction, trace) = self.model.forward_capture(input)?;
        let l2 = evaluation_point(self.model.output_mode(), &trace.last_pre_activation);
        let mut near_node = false;
        let mut far_field = false;
        let mut ratios = Vec::with_capacity(self.layers.len());
        for (slot, &layer) in self.layers.iter().enumerate() {
            let owned;
            let centers = match &self.static_centers {
                Some(c) => &c[slot],
                None => {
                    owned = SampleSet::from_scalars(&trace.hidden[layer])?;
                    &owned
                }
            };
            let per_bw = self
                .widths(centers, layer)?
                .into_iter()
                .map(|sigma| {
                    let r = self.evaluator.ratios_at(centers, sigma, &[l2])?;
                    near_node |= r.near_node;
                    far_field |= r.far_field;
                    Ok(r.ratios)
                })
                .collect::<Result<Vec<_>>>()?;
            ratios.push(per_bw);
        }
        Ok(RawPoint {
            prediction,
            eval_point: l2,
            ratios,
            near_node,
            far_field,
        })
    }
}

/// Offsets, averages across bandwidths and concatenates across layers.
fn pooled_modes(raw: &RawPoint, minima: &[Vec<Vec<f64>>]) -> Vec<f64> {
    raw.ratios
        .iter()
        .zip(minima)
        .flat_map(|(per_bw, min_bw)| {
            let nb = per_bw.len() as f64;
            let k = per_bw[0].len();
            (0..k).map(move |j| per_bw.iter().zip(min_bw).map(|(r, m)| r[j] - m[j]).sum::<f64>() / nb)
        })
        .collect()
}

fn entry(index: usize, raw: RawPoint, modes: Vec<f64>) -> UqEntry {
    UqEntry {
        index,
        prediction: raw.prediction,
        uncertainty: population_std(&modes),
        eval_point: Some(raw.eval_point),
        modes,
        near_node: raw.near_node,
        far_field: raw.far_field,
        mc: None,
    }
}

fn update_min(minima: &mut [Vec<Vec<f64>>], raw: &RawPoint) {
    for (ml, rl) in minima.iter_mut().zip(&raw.ratios) {
        for (mb, rb) in ml.iter_mut().zip(rl) {
            for (m, r) in mb.iter_mut().zip(rb) {
                *m = m.min(*r);
            }
        }
    }
}

fn infinite_minima(raw: &RawPoint) -> Vec<Vec<Vec<f64>>> {
    raw.ratios
        .iter()
        .map(|l| l.iter().map(|b| vec![f64::INFINITY; b.len()]).collect())
        .collect()
}

/// Cross-QIPF uncertainty for every input, one forward pass each.
pub fn cross_qipf_report(model: &MlpModel, inputs: &[Vec<f64>], cfg: &SurrogateConfig) -> Result<UncertaintyReport> {
    if inputs.is_empty() {
        return Err(invalid("no test inputs"));
    }
    let start = Instant::now();
    let passes_before = model.forward_pass_count();
    let surrogate = Surrogate::new(model, cfg)?;
    let raws = inputs
        .par_iter()
        .map(|x| surrogate.raw(x))
        .collect::<Result<Vec<_>>>()?;
    let mut minima = infinite_minima(&raws[0]);
    let entries = match cfg.ek_mode {
        EkMode::Batch => {
            for r in &raws {
                update_min(&mut minima, r);
            }
            raws.into_iter()
                .enumerate()
                .map(|(i, r)| {
                    let modes = pooled_modes(&r, &minima);
                    entry(i, r, modes)
                })
                .collect()
        }
        EkMode::Running => raws
            .into_iter()
            .enumerate()
            .map(|(i, r)| {
                update_min(&mut minima, &r);
                let modes = pooled_modes(&r, &minima);
                entry(i, r, modes)
            })
            .collect(),
    };
    Ok(UncertaintyReport {
        metadata: ReportMetadata {
            method: UqMethod::CrossQipf,
            surrogate: Some(cfg.clone()),
            mc: None,
            seed: None,
            forward_passes: model.forward_pass_count() - passes_before,
            elapsed_secs: start.elapsed().as_secs_f64(),
        },
        entries,
    })
}

/// Streaming surrogate with a running minimum over the inputs pushed so far.
pub struct CrossQipfStream<'a> {
    surrogate: Surrogate<'a>,
    minima: Option<Vec<Vec<Vec<f64>>>>,
    next_index: usize,
}

impl<'a> CrossQipfStream<'a> {
    pub fn new(model: &'a MlpModel, cfg: &'a SurrogateConfig) -> Result<Self> {
        Ok(Self {
            surrogate: Surrogate::new(model, cfg)?,
            minima: None,
            next_index: 0,
        })
    }

    pub fn push(&mut self, input: &[f64]) -> Result<UqEntry> {
        let raw = self.surrogate.raw(input)?;
        let minima = self.minima.get_or_insert_with(|| infinite_minima(&raw));
        update_min(minima, &raw);
        let modes = pooled_modes(&raw, minima);
        let i = self.next_index;
        self.next_index += 1;
        Ok(entry(i, raw, modes))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McConfig {
    pub samples: usize,
    pub rate: f64,
    #[serde(default = "default_tau")]
    pub tau: f64,
}

fn default_tau() -> f64 {
    DEFAULT_TAU
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            samples: 100,
            rate: 0.2,
            tau: DEFAULT_TAU,
        }
    }
}

/// Moments of `T` dropout passes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: Vec<f64>,
    /// `√(τ⁻¹ + E[y²] - E[y]²)` per output.
    pub std: Vec<f64>,
    /// Spread of the passes alone, without the `τ⁻¹` term.
    pub epistemic_std: Vec<f64>,
}

pub fn mc_dropout_uncertainty<R: Rng + ?Sized>(
    model: &MlpModel,
    input: &[f64],
    samples: usize,
    rate: f64,
    tau: f64,
    rng: &mut R,
) -> Result<McEstimate> {
    if samples < 2 {
        return Err(invalid("MC dropout needs at least two samples"));
    }
    if !(tau.is_finite() && tau > 0.0) {
        return Err(invalid(format!("tau must be positive, got {tau}")));
    }
    if rate == 0.0 {
        log::warn!("dropout rate 0: all passes are identical, epistemic spread is zero");
    }
    let m = model.output_dim();
    let mut sum = vec![0.0; m];
    let mut sum2 = vec![0.0; m];
    for _ in 0..samples {
        let y = model.dropout_forward(input, rate, rng)?;
        for j in 0..m {
            sum[j] += y[j];
            sum2[j] += y[j] * y[j];
        }
    }
    let t = samples as f64;
    let mean: Vec<f64> = sum.iter().map(|s| s / t).collect();
    let var: Vec<f64> = sum2
        .iter()
        .zip(&mean)
        .map(|(s2, mu)| (s2 / t - mu * mu).max(0.0))
        .collect();
    Ok(McEstimate {
        std: var.iter().map(|v| (v + 1.0 / tau).sqrt()).collect(),
        epistemic_std: var.iter().map(|v| v.sqrt()).collect(),
        mean,
    })
}

/// Scalar score from an MC estimate: the epistemic std of the single output
/// for regression (mean over outputs if several), and of the predicted class
/// probability for classification.
pub fn mc_score(mode: OutputMode, est: &McEstimate) -> f64 {
    match mode {
        OutputMode::Regression => est.epistemic_std.iter().sum::<f64>() / est.epistemic_std.len() as f64,
        OutputMode::Classification => est.epistemic_std[argmax(&est.mean)],
    }
}

/// MC-dropout report over a test set, sequential so that one seeded stream
/// drives all masks.
pub fn mc_dropout_report<R: Rng + ?Sized>(
    model: &MlpModel,
    inputs: &[Vec<f64>],
    cfg: &McConfig,
    seed: Option<u64>,
    rng: &mut R,
) -> Result<UncertaintyReport> {
    if inputs.is_empty() {
        return Err(invalid("no test inputs"));
    }
    if !(0.0..1.0).contains(&cfg.rate) {
        return Err(invalid(format!("dropout rate must be in [0, 1), got {}", cfg.rate)));
    }
    let start = Instant::now();
    let passes_before = model.forward_pass_count();
    let entries = inputs
        .iter()
        .enumerate()
        .map(|(i, x)| {
            let est = mc_dropout_uncertainty(model, x, cfg.samples, cfg.rate, cfg.tau, rng)?;
            Ok(UqEntry {
                index: i,
                prediction: est.mean.clone(),
                uncertainty: mc_score(model.output_mode(), &est),
                eval_point: None,
                modes: Vec::new(),
                near_node: false,
                far_field: false,
                mc: Some(est),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(UncertaintyReport {
        metadata: ReportMetadata {
            method: UqMethod::McDropout,
            surrogate: None,
            mc: Some(*cfg),
            seed,
            forward_passes: model.forward_pass_count() - passes_before,
            elapsed_secs: start.elapsed().as_secs_f64(),
        },
        entries,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{Activation, Layer};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_model(sizes: &[usize], seed: u64) -> MlpModel {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        MlpModel::init(sizes, OutputMode::Regression, &mut rng).unwrap()
    }

    #[test]
    fn pooling_arithmetic() {
        let m = MlpModel::new(
            vec![Layer::new(2, 2, vec![1.0, 2.0, 3.0, 4.0], vec![0.0; 2], Activation::Identity).unwrap()],
            OutputMode::Regression,
        )
        .unwrap();
        let s = weight_centers(&m, &LayerSelection::All, 2).unwrap();
        assert_eq!(s.as_flat(), &[1.5, 3.5]);
        let s = weight_centers(&m, &LayerSelection::All, 1).unwrap();
        assert_eq!(s.as_flat(), &[1.0, 2.0, 3.0, 4.0]);
        assert!(weight_centers(&m, &LayerSelection::All, 5).is_err());
        assert!(weight_centers(&m, &LayerSelection::All, 0).is_err());
    }

    #[test]
    fn pooling_matches_flatten_and_chunk() {
        let m = random_model(&[3, 7, 5, 1], 11);
        let sel = LayerSelection::Indices(vec![0, 2]);
        let mut flat = m.layers()[0].weights.clone();
        flat.extend(&m.layers()[2].weights);
        for w in [1, 3, 4] {
            let want: Vec<f64> = flat.chunks(w).map(|c| c.iter().sum::<f64>() / c.len() as f64).collect();
            assert_eq!(weight_centers(&m, &sel, w).unwrap().as_flat(), &want[..]);
        }
    }

    #[test]
    fn config_checks() {
        let mut cfg = SurrogateConfig {
            num_modes: 1,
            ..SurrogateConfig::default()
        };
        assert!(cfg.validate().is_err());
        cfg.num_modes = 3;
        cfg.bandwidth = BandwidthRule::SilvermanMultiples(vec![0.0]);
        assert!(cfg.validate().is_err());
        cfg.bandwidth = BandwidthRule::Fixed(vec![]);
        assert!(cfg.validate().is_err());
        cfg.bandwidth = BandwidthRule::Fixed(vec![1.0]);
        cfg.layers = LayerSelection::Indices(vec![]);
        assert!(cfg.validate().is_err());
        cfg.layers = LayerSelection::Indices(vec![5]);
        let m = random_model(&[1, 4, 1], 0);
        assert!(cross_qipf_report(&m, &[vec![0.0]], &cfg).is_err());
    }

    #[test]
    fn one_pass_per_input_and_nonnegative() {
        let m = random_model(&[1, 16, 16, 1], 4);
        let xs: Vec<Vec<f64>> = (0..30).map(|i| vec![-3.05 + 0.2 * i as f64]).collect();
        let cfg = SurrogateConfig::default();
        m.reset_forward_pass_count();
        let rep = cross_qipf_report(&m, &xs, &cfg).unwrap();
        assert_eq!(m.forward_pass_count(), 30);
        assert_eq!(rep.metadata.forward_passes, 30);
        for e in &rep.entries {
            assert!(e.uncertainty >= 0.0 && e.uncertainty.is_finite());
            assert_eq!(e.modes.len(), 2 * cfg.num_modes);
            assert_eq!(e.uncertainty, population_std(&e.modes));
        }
        // Per-(layer, mode) minimum over the batch is zero.
        for j in 0..2 * cfg.num_modes {
            let min = rep.entries.iter().map(|e| e.modes[j]).fold(f64::INFINITY, f64::min);
            assert!(min.abs() < 1e-9, "{min}");
        }
    }

    #[test]
    fn stream_matches_running_report() {
        let m = random_model(&[2, 10, 1], 8);
        let xs: Vec<Vec<f64>> = (0..12).map(|i| vec![0.1 * i as f64 + 0.05, -0.3 * i as f64]).collect();
        let cfg = SurrogateConfig {
            ek_mode: EkMode::Running,
            bandwidth: BandwidthRule::SilvermanMultiples(vec![5.0, 10.0]),
            ..SurrogateConfig::default()
        };
        let rep = cross_qipf_report(&m, &xs, &cfg).unwrap();
        let mut stream = CrossQipfStream::new(&m, &cfg).unwrap();
        for (x, e) in xs.iter().zip(&rep.entries) {
            assert_eq!(&stream.push(x).unwrap(), e);
        }
        // The first input is its own minimum.
        assert!(rep.entries[0].modes.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn dead_layer_is_reported() {
        let m = MlpModel::new(
            vec![
                Layer::new(1, 3, vec![0.0; 3], vec![0.0; 3], Activation::Relu).unwrap(),
                Layer::new(3, 1, vec![1.0; 3], vec![0.5], Activation::Identity).unwrap(),
            ],
            OutputMode::Regression,
        )
        .unwrap();
        let err = cross_qipf_report(&m, &[vec![1.0]], &SurrogateConfig::default()).unwrap_err();
        assert!(
            matches!(&err, Error::DegenerateCenters(s) if s.contains("layer 0")),
            "{err}"
        );
    }

    #[test]
    fn mc_on_zero_network() {
        let m = MlpModel::new(
            vec![
                Layer::new(1, 4, vec![0.0; 4], vec![0.0; 4], Activation::Relu).unwrap(),
                Layer::new(4, 1, vec![0.0; 4], vec![0.0], Activation::Identity).unwrap(),
            ],
            OutputMode::Regression,
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let est = mc_dropout_uncertainty(&m, &[1.0], 10, 0.5, 1e-2, &mut rng).unwrap();
        assert_eq!(est.mean, vec![0.0]);
        assert_eq!(est.epistemic_std, vec![0.0]);
        assert!((est.std[0] * est.std[0] - 100.0).abs() < 1e-12);
        assert!(mc_dropout_uncertainty(&m, &[1.0], 1, 0.5, 1e-2, &mut rng).is_err());
        assert!(mc_dropout_uncertainty(&m, &[1.0], 5, 1.0, 1e-2, &mut rng).is_err());
        assert!(mc_dropout_uncertainty(&m, &[1.0], 5, 0.0, 1e-2, &mut rng).is_ok());
    }

    #[test]
    fn jsonl_round_trip() {
        let m = random_model(&[1, 8, 1], 2);
        let xs: Vec<Vec<f64>> = (0..5).map(|i| vec![i as f64 + 0.5]).collect();
        let rep = cross_qipf_report(&m, &xs, &SurrogateConfig::default()).unwrap();
        let mut buf = Vec::new();
        rep.write_jsonl(&mut buf).unwrap();
        assert_eq!(String::from_utf8_lossy(&buf).lines().count(), 5);
        let back = UncertaintyReport::read_jsonl(&buf[..]).unwrap();
        assert_eq!(back, rep.entries);
    }
}
