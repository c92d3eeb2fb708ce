//! Synthetic datasets, normalization and metrics for uncertainty quality.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::io::{Read, Write};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledSeries {
    pub name: String,
    pub params: BTreeMap<String, f64>,
    pub seed: Option<u64>,
    pub inputs: Vec<Vec<f64>>,
    pub targets: Vec<Vec<f64>>,
}

impl LabeledSeries {
    pub fn new(name: impl Into<String>, inputs: Vec<Vec<f64>>, targets: Vec<Vec<f64>>) -> Result<Self> {
        if inputs.len() != targets.len() {
            return Err(invalid(format!(
                "{} inputs but {} targets",
                inputs.len(),
                targets.len()
            )));
        }
        for rows in [&inputs, &targets] {
            if let Some(first) = rows.first() {
                if rows.iter().any(|r| r.len() != first.len()) {
                    return Err(invalid("ragged rows"));
                }
            }
            if rows.iter().flatten().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite("labeled series"));
            }
        }
        Ok(Self {
            name: name.into(),
            params: BTreeMap::new(),
            seed: None,
            inputs,
            targets,
        })
    }

    fn with_meta(mut self, params: &[(&str, f64)], seed: Option<u64>) -> Self {
        self.params = params.iter().map(|(k, v)| (k.to_string(), *v)).collect();
        self.seed = seed;
        self
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn input_dim(&self) -> usize {
        self.inputs.first().map_or(0, Vec::len)
    }

    pub fn target_dim(&self) -> usize {
        self.targets.first().map_or(0, Vec::len)
    }

    pub fn subset(&self, indices: &[usize]) -> Self {
        Self {
            name: self.name.clone(),
            params: self.params.clone(),
            seed: self.seed,
            inputs: indices.iter().map(|&i| self.inputs[i].clone()).collect(),
            targets: indices.iter().map(|&i| self.targets[i].clone()).collect(),
        }
    }

    /// Headered CSV with columns `x1..xd,y1..ym` (or `x,y` when both are
    /// scalar).
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        let (d, m) = (self.input_dim(), self.target_dim());
        let name = |p: &str, n: usize, i: usize| if n == 1 { p.to_string() } else { format!("{p}{}", i + 1) };
        let header: Vec<String> = (0..d)
            .map(|i| name("x", d, i))
            .chain((0..m).map(|i| name("y", m, i)))
            .collect();
        w.write_record(&header)?;
        for (x, y) in self.inputs.iter().zip(&self.targets) {
            w.write_record(x.iter().chain(y).map(f64::to_string))?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads a headered numeric CSV. Columns whose names start with `y` are
    /// targets; if none do, the last column is the target.
    pub fn read_csv<R: Read>(name: impl Into<String>, input: R) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
        let header = r.headers()?.clone();
        if header.is_empty() {
            return Err(invalid("CSV has no columns"));
        }
        let mut is_target: Vec<bool> = header.iter().map(|h| h.starts_with('y')).collect();
        if !is_target.contains(&true) {
            *is_target.last_mut().unwrap() = true;
        }
        if is_target.iter().all(|t| *t) {
            return Err(invalid("CSV needs at least one input column"));
        }
        let mut inputs = Vec::new();
        let mut targets = Vec::new();
        for (line, rec) in r.records().enumerate() {
            let rec = rec?;
            let mut x = Vec::new();
            let mut y = Vec::new();
            for (j, field) in rec.iter().enumerate() {
                let v: f64 = field
                    .parse()
                    .map_err(|_| invalid(format!("row {}: column {} is not a number: {field:?}", line + 2, j + 1)))?;
                if is_target[j] {
                    y.push(v);
                } else {
                    x.push(v);
                }
            }
            inputs.push(x);
            targets.push(y);
        }
        if inputs.is_empty() {
            return Err(invalid("CSV has no data rows"));
        }
        Self::new(name, inputs, targets)
    }
}

fn check_range(lo: f64, hi: f64) -> Result<()> {
    if lo.is_finite() && hi.is_finite() && lo < hi {
        Ok(())
    } else {
        Err(invalid(format!("invalid range ({lo}, {hi})")))
    }
}

/// `y = x sin x` with `x ~ U(lo, hi)`, noise-free.
pub fn gen_xsinx(n: usize, lo: f64, hi: f64, seed: u64) -> Result<LabeledSeries> {
    if n == 0 {
        return Err(invalid("n must be >= 1"));
    }
    check_range(lo, hi)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let xs: Vec<f64> = (0..n).map(|_| rng.random_range(lo..hi)).collect();
    let series = LabeledSeries::new(
        "xsinx",
        xs.iter().map(|&x| vec![x]).collect(),
        xs.iter().map(|&x| vec![x * x.sin()]).collect(),
    )?;
    Ok(series.with_meta(&[("n", n as f64), ("lo", lo), ("hi", hi)], Some(seed)))
}

pub const TWOSINE_ALPHA: f64 = 4.0;
pub const TWOSINE_BETA: f64 = 13.0;

/// `y = x + sin(α(x+w)) + sin(β(x+w)) + w` with `w ~ N(0, noise_sd²)`.
pub fn twosine(x: f64, w: f64) -> f64 {
    x + (TWOSINE_ALPHA * (x + w)).sin() + (TWOSINE_BETA * (x + w)).sin() + w
}

/// Two-sine data drawn from `U(-1, 0.2)` (`n_left` points) and `U(0.7, 1)`
/// (`n_right` points), leaving `(0.2, 0.7)` empty.
pub fn gen_twosine(n_left: usize, n_right: usize, noise_sd: f64, seed: u64) -> Result<LabeledSeries> {
    let regions = [(-1.0, 0.2, n_left), (0.7, 1.0, n_right)];
    let s = twosine_regions(&regions, noise_sd, seed)?;
    Ok(s.with_meta(
        &[
            ("n_left", n_left as f64),
            ("n_right", n_right as f64),
            ("noise_sd", noise_sd),
        ],
        Some(seed),
    ))
}

/// Two-sine data with `x ~ U(lo, hi)`, for test sets spanning the gap.
pub fn gen_twosine_uniform(n: usize, lo: f64, hi: f64, noise_sd: f64, seed: u64) -> Result<LabeledSeries> {
    check_range(lo, hi)?;
    let s = twosine_regions(&[(lo, hi, n)], noise_sd, seed)?;
    Ok(s.with_meta(
        &[("n", n as f64), ("lo", lo), ("hi", hi), ("noise_sd", noise_sd)],
        Some(seed),
    ))
}

fn twosine_regions(regions: &[(f64, f64, usize)], noise_sd: f64, seed: u64) -> Result<LabeledSeries> {
    if !(noise_sd.is_finite() && noise_sd >= 0.0) {
        return Err(invalid(format!("noise_sd must be >= 0, got {noise_sd}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, noise_sd).map_err(|e| invalid(e.to_string()))?;
    let mut inputs = Vec::new();
    let mut targets = Vec::new();
    for &(lo, hi, n) in regions {
        for _ in 0..n {
            let x = rng.random_range(lo..hi);
            let w = noise.sample(&mut rng);
            inputs.push(vec![x]);
            targets.push(vec![twosine(x, w)]);
        }
    }
    LabeledSeries::new("twosine", inputs, targets)
}

pub const LORENZ_INITIAL: [f64; 3] = [0.0, 1.0, 1.05];

fn lorenz_rhs(s: [f64; 3]) -> [f64; 3] {
    let (sigma, rho, beta) = (10.0, 28.0, 8.0 / 3.0);
    [
        sigma * (s[1] - s[0]),
        s[0] * (rho - s[2]) - s[1],
        s[0] * s[1] - beta * s[2],
    ]
}

/// Raw RK4 trajectory of the Lorenz system from [`LORENZ_INITIAL`].
pub fn lorenz_trajectory(n: usize, dt: f64) -> Result<Vec<[f64; 3]>> {
    if n == 0 {
        return Err(invalid("n must be >= 1"));
    }
    if !(dt.is_finite() && dt > 0.0) {
        return Err(invalid(format!("dt must be positive, got {dt}")));
    }
    let axpy = |s: [f64; 3], k: [f64; 3], h: f64| [s[0] + h * k[0], s[1] + h * k[1], s[2] + h * k[2]];
    let mut out = Vec::with_capacity(n);
    let mut s = LORENZ_INITIAL;
    out.push(s);
    for _ in 1..n {
        let k1 = lorenz_rhs(s);
        let k2 = lorenz_rhs(axpy(s, k1, dt / 2.0));
        let k3 = lorenz_rhs(axpy(s, k2, dt / 2.0));
        let k4 = lorenz_rhs(axpy(s, k3, dt));
        for i in 0..3 {
            s[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        if s.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("lorenz state"));
        }
        out.push(s);
    }
    Ok(out)
}

/// One z-normalized Lorenz component (0, 1 or 2). A single sample cannot be
/// normalized and is returned raw.
pub fn gen_lorenz(n: usize, dt: f64, component: usize) -> Result<Vec<f64>> {
    if component > 2 {
        return Err(invalid(format!("lorenz component must be 0, 1 or 2, got {component}")));
    }
    let raw: Vec<f64> = lorenz_trajectory(n, dt)?.iter().map(|s| s[component]).collect();
    if n == 1 {
        return Ok(raw);
    }
    znormalize(&raw)
}

/// Sum of unit-amplitude sines sampled at `fs`, z-normalized.
pub fn gen_sine(freqs: &[f64], fs: f64, n: usize) -> Result<Vec<f64>> {
    if n < 2 {
        return Err(invalid("sine length must be >= 2"));
    }
    if freqs.is_empty() || freqs.iter().any(|f| !(f.is_finite() && *f > 0.0)) {
        return Err(invalid("frequencies must be positive"));
    }
    let fmax = freqs.iter().copied().fold(0.0, f64::max);
    if !(fs.is_finite() && fs > 2.0 * fmax) {
        return Err(invalid(format!(
            "sampling rate {fs} does not exceed the Nyquist rate {}",
            2.0 * fmax
        )));
    }
    let raw: Vec<f64> = (0..n)
        .map(|i| freqs.iter().map(|f| (2.0 * PI * f * i as f64 / fs).sin()).sum())
        .collect();
    znormalize(&raw)
}

/// Isotropic Gaussian blobs; targets are class indices.
pub fn gen_blobs(n_per_class: usize, centers: &[Vec<f64>], std: f64, seed: u64) -> Result<LabeledSeries> {
    if n_per_class == 0 || centers.len() < 2 {
        return Err(invalid("need at least one point per class and two classes"));
    }
    let noise = Normal::new(0.0, std).map_err(|e| invalid(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut inputs = Vec::new();
    let mut targets = Vec::new();
    for _ in 0..n_per_class {
        for (c, mu) in centers.iter().enumerate() {
            inputs.push(mu.iter().map(|m| m + noise.sample(&mut rng)).collect());
            targets.push(vec![c as f64]);
        }
    }
    let s = LabeledSeries::new("blobs", inputs, targets)?;
    Ok(s.with_meta(
        &[
            ("n_per_class", n_per_class as f64),
            ("classes", centers.len() as f64),
            ("std", std),
        ],
        Some(seed),
    ))
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

pub fn znormalize(xs: &[f64]) -> Result<Vec<f64>> {
    let (mean, std) = mean_std(xs);
    if std.is_nan() || std <= 0.0 {
        return Err(invalid("cannot z-normalize a constant series"));
    }
    Ok(xs.iter().map(|x| (x - mean) / std).collect())
}

/// Per-column z-normalization. Constant columns keep unit scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZNorm {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl ZNorm {
    pub fn fit(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.first().ok_or(Error::EmptySampleSet)?.len();
        let (mean, std) = (0..d)
            .map(|j| {
                let col: Vec<f64> = rows.iter().map(|r| r[j]).collect();
                let (m, s) = mean_std(&col);
                (m, if s > 0.0 { s } else { 1.0 })
            })
            .unzip();
        Ok(Self { mean, std })
    }

    pub fn apply(&self, rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
        rows.iter()
            .map(|r| {
                r.iter()
                    .enumerate()
                    .map(|(j, v)| (v - self.mean[j]) / self.std[j])
                    .collect()
            })
            .collect()
    }

    pub fn invert(&self, rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
        rows.iter()
            .map(|r| {
                r.iter()
                    .enumerate()
                    .map(|(j, v)| v * self.std[j] + self.mean[j])
                    .collect()
            })
            .collect()
    }
}

/// RMS difference after scaling each series by its own maximum. A series
/// whose maximum is zero is left unscaled.
pub fn calibration_rmse(uncertainty: &[f64], abs_errors: &[f64]) -> Result<f64> {
    if uncertainty.is_empty() || uncertainty.len() != abs_errors.len() {
        return Err(invalid(format!(
            "series lengths must match and be non-zero ({} vs {})",
            uncertainty.len(),
            abs_errors.len()
        )));
    }
    let scale = |xs: &[f64]| -> Result<Vec<f64>> {
        if xs.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
            return Err(invalid("calibration inputs must be finite and non-negative"));
        }
        let max = xs.iter().copied().fold(0.0, f64::max);
        Ok(if max > 0.0 {
            xs.iter().map(|x| x / max).collect()
        } else {
            xs.to_vec()
        })
    };
    let (u, e) = (scale(uncertainty)?, scale(abs_errors)?);
    let ms = u.iter().zip(&e).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / u.len() as f64;
    Ok(ms.sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    pub fpr: Vec<f64>,
    pub tpr: Vec<f64>,
    /// Score threshold at each point after the origin (`score >= t` flags).
    pub thresholds: Vec<f64>,
    pub auc: f64,
}

/// ROC curve for detecting `true` labels by high scores. Equal scores enter
/// the curve together.
pub fn roc_auc(scores: &[f64], labels: &[bool]) -> Result<RocCurve> {
    if scores.len() != labels.len() {
        return Err(invalid("scores and labels differ in length"));
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::NonFinite("roc scores"));
    }
    let pos = labels.iter().filter(|l| **l).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(invalid("ROC needs both classes"));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    let (mut fpr, mut tpr, mut thresholds) = (vec![0.0], vec![0.0], Vec::new());
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut auc = 0.0;
    let mut i = 0;
    while i < order.len() {
        let t = scores[order[i]];
        while i < order.len() && scores[order[i]] == t {
            if labels[order[i]] {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        let (x, y) = (fp as f64 / neg as f64, tp as f64 / pos as f64);
        auc += (x - fpr[fpr.len() - 1]) * (y + tpr[tpr.len() - 1]) / 2.0;
        fpr.push(x);
        tpr.push(y);
        thresholds.push(t);
    }
    Ok(RocCurve {
        fpr,
        tpr,
        thresholds,
        auc,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

/// `n_splits` seeded random partitions with `round(n · test_fraction)` test
/// indices each.
pub fn split_k(n: usize, n_splits: usize, test_fraction: f64, seed: u64) -> Result<Vec<Split>> {
    if n_splits == 0 {
        return Err(invalid("n_splits must be >= 1"));
    }
    if !(test_fraction > 0.0 && test_fraction < 1.0) {
        return Err(invalid(format!("test_fraction must be in (0, 1), got {test_fraction}")));
    }
    let n_test = (n as f64 * test_fraction).round() as usize;
    if n_test == 0 || n_test >= n {
        return Err(invalid(format!(
            "split of {n} rows at {test_fraction} leaves an empty side"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..n_splits)
        .map(|_| {
            let mut idx: Vec<usize> = (0..n).collect();
            idx.shuffle(&mut rng);
            let mut test = idx[..n_test].to_vec();
            let mut train = idx[n_test..].to_vec();
            test.sort_unstable();
            train.sort_unstable();
            Split { train, test }
        })
        .collect())
}

pub fn pearson(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() || a.len() < 2 {
        return Err(invalid("pearson needs two equal-length series of length >= 2"));
    }
    let (ma, _) = mean_std(a);
    let (mb, _) = mean_std(b);
    let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = a.iter().map(|x| (x - ma) * (x - ma)).sum();
    let vb: f64 = b.iter().map(|y| (y - mb) * (y - mb)).sum();
    if va == 0.0 || vb == 0.0 {
        return Err(invalid("pearson is undefined for a constant series"));
    }
    Ok(cov / (va * vb).sqrt())
}

/// Ranks starting at 1, ties sharing their average rank.
pub fn average_ranks(xs: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut ranks = vec![0.0; xs.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && xs[order[j + 1]] == xs[order[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &o in &order[i..=j] {
            ranks[o] = r;
        }
        i = j + 1;
    }
    ranks
}

pub fn spearman(a: &[f64], b: &[f64]) -> Result<f64> {
    pearson(&average_ranks(a), &average_ranks(b))
}

/// Shannon entropy in nats of a count histogram.
pub fn shannon_entropy(counts: &[usize]) -> f64 {
    let total: usize = counts.iter().sum();
    if total == 0 {
        return 0.0;
    }
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / total as f64;
            -p * p.ln()
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn xsinx_values_and_determinism() {
        let a = gen_xsinx(60, -5.0, 5.0, 7).unwrap();
        assert_eq!(a, gen_xsinx(60, -5.0, 5.0, 7).unwrap());
        for (x, y) in a.inputs.iter().zip(&a.targets) {
            assert!(x[0] > -5.0 && x[0] < 5.0);
            assert_eq!(y[0], x[0] * x[0].sin());
        }
        assert!(gen_xsinx(10, 1.0, 1.0, 0).is_err());
        assert!(gen_xsinx(0, 0.0, 1.0, 0).is_err());
        let half_pi = PI / 2.0;
        assert_eq!(half_pi * half_pi.sin(), half_pi);
    }

    #[test]
    fn twosine_gap_and_formula() {
        let s = gen_twosine(40, 10, 0.03, 1).unwrap();
        assert_eq!(s.len(), 50);
        assert!(s.inputs.iter().all(|x| !(x[0] > 0.2 && x[0] < 0.7)));
        assert_eq!(twosine(0.0, 0.0), 0.0);
        assert_eq!(twosine(0.5, 0.0), 0.5 + 2f64.sin() + 6.5f64.sin());
        assert!(gen_twosine(1, 1, -0.1, 0).is_err());
        let clean = gen_twosine(5, 5, 0.0, 3).unwrap();
        for (x, y) in clean.inputs.iter().zip(&clean.targets) {
            assert_eq!(y[0], twosine(x[0], 0.0));
        }
    }

    #[test]
    fn lorenz_basics() {
        assert_eq!(gen_lorenz(1, 0.01, 2).unwrap(), vec![1.05]);
        let traj = lorenz_trajectory(3000, 0.01).unwrap();
        assert!(traj.iter().all(|s| s[0].abs() < 25.0));
        let z = gen_lorenz(3000, 0.01, 0).unwrap();
        let (m, s) = mean_std(&z);
        assert!(m.abs() < 1e-12 && (s - 1.0).abs() < 1e-12);
        assert!(gen_lorenz(10, 0.0, 0).is_err());
        assert!(gen_lorenz(10, 0.01, 3).is_err());
    }

    #[test]
    fn sine_checks() {
        assert!(gen_sine(&[50.0], 100.0, 10).is_err());
        assert!(gen_sine(&[50.0], 6000.0, 0).is_err());
        let s = gen_sine(&[50.0], 6000.0, 3000).unwrap();
        assert_eq!(s.len(), 3000);
        assert!((s[120] - s[0]).abs() < 1e-9);
    }

    #[test]
    fn calibration_examples() {
        assert_eq!(calibration_rmse(&[0.1, 0.4, 0.2], &[0.1, 0.4, 0.2]).unwrap(), 0.0);
        assert_eq!(calibration_rmse(&[0.0, 1.0], &[1.0, 0.0]).unwrap(), 1.0);
        assert_eq!(calibration_rmse(&[0.0, 0.0], &[0.0, 0.5]).unwrap(), (0.5f64).sqrt());
        assert!(calibration_rmse(&[1.0], &[1.0, 2.0]).is_err());
        assert!(calibration_rmse(&[-1.0], &[1.0]).is_err());
    }

    #[test]
    fn roc_extremes() {
        let r = roc_auc(&[0.9, 0.8, 0.2, 0.1], &[true, true, false, false]).unwrap();
        assert_eq!(r.auc, 1.0);
        assert_eq!((r.fpr[0], r.tpr[0]), (0.0, 0.0));
        assert_eq!((*r.fpr.last().unwrap(), *r.tpr.last().unwrap()), (1.0, 1.0));
        let r = roc_auc(&[1.0; 6], &[true, false, true, false, false, true]).unwrap();
        assert_eq!(r.auc, 0.5);
        assert_eq!(r.fpr.len(), 2);
        assert!(roc_auc(&[1.0, 2.0], &[true, true]).is_err());
    }

    #[test]
    fn splits() {
        let s = split_k(10, 3, 0.5, 4).unwrap();
        assert_eq!(s, split_k(10, 3, 0.5, 4).unwrap());
        for sp in &s {
            assert_eq!((sp.train.len(), sp.test.len()), (5, 5));
            assert!(sp.test.iter().all(|t| !sp.train.contains(t)));
        }
        assert!(split_k(10, 1, 0.01, 0).is_err());
        assert!(split_k(10, 0, 0.5, 0).is_err());
        assert!(split_k(10, 1, 1.0, 0).is_err());
    }

    #[test]
    fn correlations_and_entropy() {
        assert!((pearson(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(average_ranks(&[3.0, 1.0, 3.0, 2.0]), vec![3.5, 1.0, 3.5, 2.0]);
        assert!((spearman(&[1.0, 2.0, 3.0], &[1.0, 8.0, 27.0]).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(shannon_entropy(&[5, 0, 0]), 0.0);
        assert!((shannon_entropy(&[1, 1]) - std::f64::consts::LN_2).abs() < 1e-15);
    }

    #[test]
    fn znorm_round_trip() {
        let rows = vec![vec![1.0, 5.0], vec![3.0, 5.0], vec![5.0, 5.0]];
        let z = ZNorm::fit(&rows).unwrap();
        assert_eq!(z.std[1], 1.0);
        let back = z.invert(&z.apply(&rows));
        for (a, b) in rows.iter().flatten().zip(back.iter().flatten()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn csv_round_trip() {
        let s = gen_xsinx(5, -1.0, 1.0, 2).unwrap();
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        assert!(buf.starts_with(b"x,y\n"));
        let back = LabeledSeries::read_csv("xsinx", &buf[..]).unwrap();
        assert_eq!(back.inputs, s.inputs);
        assert_eq!(back.targets, s.targets);
        let plain = "a,b,c\n1,2,3\n4,5,6\n";
        let p = LabeledSeries::read_csv("t", plain.as_bytes()).unwrap();
        assert_eq!(p.inputs, vec![vec![1.0, 2.0], vec![4.0, 5.0]]);
        assert_eq!(p.targets, vec![vec![3.0], vec![6.0]]);
        assert!(LabeledSeries::read_csv("t", "a,b\n1,x\n".as_bytes()).is_err());
    }
}
