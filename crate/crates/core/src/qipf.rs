//! Quantum information potential field and its Hermite-projected modes.
//!
//! For a wave function `ψ = √ipf` the mode-`k` state is `ψ_k = H*_k(ψ)`, and
//! its potential is
//!
//! ```text
//! V_k(x) = E_k + (σ²/2) ∇²ψ_k(x) / ψ_k(x),     E_k = -min (σ²/2) ∇²ψ_k / ψ_k
//! ```
//!
//! with `∇²ψ_k = H*_k''(ψ) |∇ψ|² + H*_k'(ψ) ∇²ψ`. Modes are indexed from
//! `k = 1`; `H*_0` is constant so mode 0 would vanish identically.
//!
//! The minimum defining `E_k` is taken over the supplied evaluation set. For
//! time series it is a running minimum over the samples evaluated so far.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::hermite::{self, MAX_HERMITE_ORDER};
use crate::kernelfield::{self, Bandwidth, FieldEvaluation, SampleSet};

pub const DEFAULT_PSI_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeConfig {
    pub num_modes: usize,
    pub sigma: Bandwidth,
    pub psi_floor: f64,
}

impl ModeConfig {
    pub fn new(num_modes: usize, sigma: Bandwidth) -> Result<Self> {
        Self::with_floor(num_modes, sigma, DEFAULT_PSI_FLOOR)
    }

    pub fn with_floor(num_modes: usize, sigma: Bandwidth, psi_floor: f64) -> Result<Self> {
        let cfg = Self {
            num_modes,
            sigma,
            psi_floor,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_modes == 0 {
            return Err(invalid("num_modes must be >= 1"));
        }
        if self.num_modes > MAX_HERMITE_ORDER {
            return Err(Error::OrderTooLarge {
                order: self.num_modes,
                max: MAX_HERMITE_ORDER,
            });
        }
        if !(self.psi_floor.is_finite() && self.psi_floor > 0.0) {
            return Err(invalid(format!("psi_floor must be positive, got {}", self.psi_floor)));
        }
        Ok(())
    }
}

/// Un-offset mode ratios `r_k = (σ²/2) ∇²ψ_k / ψ_k` at one point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeRatios {
    /// `r_1 ..= r_K`.
    pub ratios: Vec<f64>,
    /// Wave function value at the point.
    pub psi: f64,
    /// Some `|ψ_k|` fell below the floor and its denominator was clamped.
    pub near_node: bool,
    pub far_field: bool,
}

/// Precomputed Hermite normalizers for a fixed number of modes.
#[derive(Debug, Clone)]
pub struct ModeEvaluator {
    num_modes: usize,
    psi_floor: f64,
    inv_norms: Vec<f64>,
}

impl ModeEvaluator {
    pub fn new(num_modes: usize, psi_floor: f64) -> Result<Self> {
        // Reuse ModeConfig validation with a placeholder width.
        ModeConfig::with_floor(num_modes, Bandwidth::new(1.0)?, psi_floor)?;
        Ok(Self {
            num_modes,
            psi_floor,
            inv_norms: hermite::inverse_norms(num_modes),
        })
    }

    pub fn num_modes(&self) -> usize {
        self.num_modes
    }

    /// Mode ratios from an already-evaluated wave function.
    pub fn ratios(&self, wave: &FieldEvaluation, sigma: Bandwidth) -> ModeRatios {
        let psi = wave.value;
        let grad2: f64 = wave.gradient.iter().map(|g| g * g).sum();
        let half_s2 = 0.5 * sigma.value() * sigma.value();
        let mut near_node = false;
        let ratios = hermite::normalized_triples(self.num_modes, psi, &self.inv_norms)
            .into_iter()
            .map(|h| {
                let lap = h.d2 * grad2 + h.d1 * wave.laplacian;
                let mut den = h.value;
                if den.abs() < self.psi_floor {
                    near_node = true;
                    den = if den < 0.0 { -self.psi_floor } else { self.psi_floor };
                }
                half_s2 * lap / den
            })
            .collect();
        ModeRatios {
            ratios,
            psi,
            near_node,
            far_field: wave.far_field,
        }
    }

    pub fn ratios_at(&self, centers: &SampleSet, sigma: Bandwidth, x: &[f64]) -> Result<ModeRatios> {
        let wave = kernelfield::wavefunction_derivatives(centers, sigma, x)?;
        Ok(self.ratios(&wave, sigma))
    }
}

/// Mode ratios at a single point.
pub fn mode_ratios(centers: &SampleSet, config: &ModeConfig, x: &[f64]) -> Result<ModeRatios> {
    ModeEvaluator::new(config.num_modes, config.psi_floor)?.ratios_at(centers, config.sigma, x)
}

/// `K × P` mode values with their offsets `E_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeMatrix {
    /// `values[k-1][p]` is `V_k` at evaluation point `p`.
    pub values: Vec<Vec<f64>>,
    pub eigenvalues: Vec<f64>,
    pub eval_points: SampleSet,
    pub sigma: Bandwidth,
    pub near_node: Vec<bool>,
    pub far_field: Vec<bool>,
    /// For time-series decompositions, the time index of the first column.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time_offset: Option<usize>,
}

impl ModeMatrix {
    pub fn num_modes(&self) -> usize {
        self.values.len()
    }

    pub fn num_points(&self) -> usize {
        self.eval_points.len()
    }

    /// Mode vector `(V_1, ..., V_K)` at point `p`.
    pub fn column(&self, p: usize) -> Vec<f64> {
        self.values.iter().map(|row| row[p]).collect()
    }

    /// CSV with the point coordinates followed by `v1..vK`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        let d = self.eval_points.dim();
        let mut header: Vec<String> = if d == 1 {
            vec!["x".into()]
        } else {
            (1..=d).map(|j| format!("x{j}")).collect()
        };
        header.extend((1..=self.num_modes()).map(|k| format!("v{k}")));
        w.write_record(&header)?;
        for (p, x) in self.eval_points.iter().enumerate() {
            let row: Vec<String> = x
                .iter()
                .copied()
                .chain(self.values.iter().map(|r| r[p]))
                .map(|v| v.to_string())
                .collect();
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Read back the CSV layout written by [`ModeMatrix::write_csv`].
    /// Offsets and flags are not part of the CSV and come back zeroed.
    pub fn read_csv<R: std::io::Read>(input: R, sigma: Bandwidth) -> Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        let headers = r.headers()?.clone();
        let d = headers.iter().filter(|h| h.starts_with('x')).count();
        let k = headers.iter().filter(|h| h.starts_with('v')).count();
        if d == 0 || k == 0 || d + k != headers.len() {
            return Err(invalid("mode matrix CSV needs x.. then v.. columns"));
        }
        let mut points = Vec::new();
        let mut values = vec![Vec::new(); k];
        for rec in r.records() {
            let rec = rec?;
            let nums = rec
                .iter()
                .map(|s| {
                    s.trim()
                        .parse::<f64>()
                        .map_err(|e| invalid(format!("bad number {s:?}: {e}")))
                })
                .collect::<Result<Vec<_>>>()?;
            points.extend_from_slice(&nums[..d]);
            for (row, v) in values.iter_mut().zip(&nums[d..]) {
                row.push(*v);
            }
        }
        let eval_points = SampleSet::from_flat(points, d)?;
        let p = eval_points.len();
        Ok(Self {
            values,
            eigenvalues: vec![0.0; k],
            eval_points,
            sigma,
            near_node: vec![false; p],
            far_field: vec![false; p],
            time_offset: None,
        })
    }
}

/// Offsets every mode by its minimum over the given ratio columns.
fn offset_by_min(per_point: &[ModeRatios], num_modes: usize) -> (Vec<Vec<f64>>, Vec<f64>) {
    let eigenvalues: Vec<f64> = (0..num_modes)
        .map(|k| -per_point.iter().map(|r| r.ratios[k]).fold(f64::INFINITY, f64::min))
        .collect();
    let values = (0..num_modes)
        .map(|k| per_point.iter().map(|r| eigenvalues[k] + r.ratios[k]).collect())
        .collect();
    (values, eigenvalues)
}

/// Decompose the field of `centers` into `K` modes over `eval_points`.
///
/// Two passes: ratios at every point (in parallel), then the per-mode
/// minimum and offset.
pub fn qipf_modes(centers: &SampleSet, config: &ModeConfig, eval_points: &SampleSet) -> Result<ModeMatrix> {
    config.validate()?;
    if eval_points.dim() != centers.dim() {
        return Err(Error::DimensionMismatch {
            expected: centers.dim(),
            got: eval_points.dim(),
        });
    }
    if eval_points.len() < 2 {
        return Err(invalid("qipf_modes needs at least two evaluation points"));
    }
    let eval = ModeEvaluator::new(config.num_modes, config.psi_floor)?;
    let points: Vec<&[f64]> = eval_points.iter().collect();
    let per_point = points
        .par_iter()
        .map(|x| eval.ratios_at(centers, config.sigma, x))
        .collect::<Result<Vec<_>>>()?;
    let (values, eigenvalues) = offset_by_min(&per_point, config.num_modes);
    Ok(ModeMatrix {
        values,
        eigenvalues,
        eval_points: eval_points.clone(),
        sigma: config.sigma,
        near_node: per_point.iter().map(|r| r.near_node).collect(),
        far_field: per_point.iter().map(|r| r.far_field).collect(),
        time_offset: None,
    })
}

/// Mode ratios of `signal[t]` in the field of `signal[..t]`, for
/// `t = warmup..len`.
pub fn timeseries_ratios(signal: &[f64], config: &ModeConfig, warmup: usize) -> Result<Vec<ModeRatios>> {
    config.validate()?;
    if warmup < 2 {
        return Err(invalid("warmup must be >= 2"));
    }
    if signal.len() <= warmup {
        return Err(invalid(format!(
            "signal length {} must exceed warmup {warmup}",
            signal.len()
        )));
    }
    if signal.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("signal"));
    }
    let eval = ModeEvaluator::new(config.num_modes, config.psi_floor)?;
    (warmup..signal.len())
        .into_par_iter()
        .map(|t| {
            let centers = SampleSet::from_scalars(&signal[..t])?;
            eval.ratios_at(&centers, config.sigma, &signal[t..=t])
        })
        .collect()
}

/// Sample-by-sample decomposition of a scalar series. Each sample is
/// evaluated in the field of all earlier samples, and `E_k` is the running
/// minimum of the ratios seen so far, so column `t` depends only on
/// `signal[..=t]`.
pub fn timeseries_qipf(signal: &[f64], config: &ModeConfig, warmup: usize) -> Result<ModeMatrix> {
    let per_point = timeseries_ratios(signal, config, warmup)?;
    let k = config.num_modes;
    let mut values = vec![Vec::with_capacity(per_point.len()); k];
    let mut running = vec![f64::INFINITY; k];
    for r in &per_point {
        for (m, row) in values.iter_mut().enumerate() {
            running[m] = running[m].min(r.ratios[m]);
            row.push(r.ratios[m] - running[m]);
        }
    }
    Ok(ModeMatrix {
        values,
        eigenvalues: running.iter().map(|m| -m).collect(),
        eval_points: SampleSet::from_scalars(&signal[warmup..])?,
        sigma: config.sigma,
        near_node: per_point.iter().map(|r| r.near_node).collect(),
        far_field: per_point.iter().map(|r| r.far_field).collect(),
        time_offset: Some(warmup),
    })
}

/// Per mode, the number of points where it holds the maximum value. Ties go
/// to the lowest mode index.
pub fn dominance_histogram(modes: &ModeMatrix) -> Vec<usize> {
    let k = modes.num_modes();
    let mut counts = vec![0; k];
    if k == 0 {
        return counts;
    }
    for p in 0..modes.num_points() {
        counts[dominant_mode(modes, p)] += 1;
    }
    counts
}

/// Zero-based index of the largest mode at point `p` (lowest index on ties).
pub fn dominant_mode(modes: &ModeMatrix, p: usize) -> usize {
    let mut best = 0;
    for k in 1..modes.num_modes() {
        if modes.values[k][p] > modes.values[best][p] {
            best = k;
        }
    }
    best
}

/// Population standard deviation.
pub fn population_std(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n).sqrt()
}

/// Population standard deviation of the mode vector at point `p`.
pub fn mode_std(modes: &ModeMatrix, point_index: usize) -> Result<f64> {
    if modes.num_modes() < 2 {
        return Err(invalid("mode_std needs at least two modes"));
    }
    if point_index >= modes.num_points() {
        return Err(invalid(format!(
            "point index {point_index} out of range ({} points)",
            modes.num_points()
        )));
    }
    Ok(population_std(&modes.column(point_index)))
}

/// Per-mode min-max scaling to `[0, 1]`, for display. Constant modes map to 0.
pub fn minmax_normalized(modes: &ModeMatrix) -> Vec<Vec<f64>> {
    modes
        .values
        .iter()
        .map(|row| {
            let lo = row.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let span = hi - lo;
            row.iter()
                .map(|v| if span > 0.0 { (v - lo) / span } else { 0.0 })
                .collect()
        })
        .collect()
}

/// Evenly spaced scalar grid `lo, lo+step, ...` up to `hi` inclusive
/// (within half a step).
pub fn grid(lo: f64, hi: f64, step: f64) -> Result<SampleSet> {
    if !(step.is_finite() && step > 0.0) {
        return Err(invalid(format!("grid step must be positive, got {step}")));
    }
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(invalid(format!("grid bounds must satisfy lo < hi, got {lo}:{hi}")));
    }
    let n = ((hi - lo) / step + 0.5).floor() as usize + 1;
    SampleSet::from_scalars(&(0..n).map(|i| lo + i as f64 * step).collect::<Vec<_>>())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bw(s: f64) -> Bandwidth {
        Bandwidth::new(s).unwrap()
    }

    fn matrix(values: Vec<Vec<f64>>) -> ModeMatrix {
        let p = values[0].len();
        ModeMatrix {
            eigenvalues: vec![0.0; values.len()],
            values,
            eval_points: SampleSet::from_scalars(&(0..p).map(|i| i as f64).collect::<Vec<_>>()).unwrap(),
            sigma: bw(1.0),
            near_node: vec![false; p],
            far_field: vec![false; p],
            time_offset: None,
        }
    }

    #[test]
    fn per_mode_minimum_is_zero() {
        let c = SampleSet::from_scalars(&[-1.2, -0.3, 0.1, 0.9, 1.4]).unwrap();
        let g = grid(-4.0, 4.0, 0.25).unwrap();
        let m = qipf_modes(&c, &ModeConfig::new(6, bw(0.7)).unwrap(), &g).unwrap();
        for row in &m.values {
            let min = row.iter().copied().fold(f64::INFINITY, f64::min);
            assert_eq!(min, 0.0);
        }
        assert!(m.eigenvalues.iter().all(|e| e.is_finite()));
    }

    #[test]
    fn dominance_examples() {
        let m = matrix(vec![vec![1.0, 5.0, 2.0], vec![3.0, 0.0, 9.0]]);
        assert_eq!(dominance_histogram(&m), vec![1, 2]);
        let m = matrix(vec![vec![1.0, 2.0, 3.0, 4.0]]);
        assert_eq!(dominance_histogram(&m), vec![4]);
        let tie = matrix(vec![vec![1.0], vec![1.0]]);
        assert_eq!(dominance_histogram(&tie), vec![1, 0]);
    }

    #[test]
    fn mode_std_examples() {
        let m = matrix(vec![vec![0.0, 3.0], vec![2.0, 3.0]]);
        assert_eq!(mode_std(&m, 0).unwrap(), 1.0);
        assert_eq!(mode_std(&m, 1).unwrap(), 0.0);
        assert!(mode_std(&matrix(vec![vec![1.0]]), 0).is_err());
        assert!(mode_std(&m, 2).is_err());
    }

    #[test]
    fn needs_two_points_and_matching_dims() {
        let c = SampleSet::from_scalars(&[0.0, 1.0]).unwrap();
        let cfg = ModeConfig::new(3, bw(1.0)).unwrap();
        assert!(qipf_modes(&c, &cfg, &SampleSet::from_scalars(&[0.5]).unwrap()).is_err());
        let two_d = SampleSet::new(vec![vec![0.0, 0.0], vec![1.0, 1.0]]).unwrap();
        assert!(qipf_modes(&c, &cfg, &two_d).is_err());
        assert!(ModeConfig::new(0, bw(1.0)).is_err());
        assert!(ModeConfig::new(65, bw(1.0)).is_err());
    }

    #[test]
    fn constant_signal_with_fixed_width_is_stationary() {
        let sig = vec![0.4; 30];
        let cfg = ModeConfig::new(4, bw(1.0)).unwrap();
        let r = timeseries_ratios(&sig, &cfg, 2).unwrap();
        for step in &r {
            assert_eq!(step.psi, 1.0);
            assert_eq!(step.ratios, r[0].ratios);
        }
        let m = timeseries_qipf(&sig, &cfg, 2).unwrap();
        assert!(m.values.iter().flatten().all(|&v| v == 0.0));
    }

    #[test]
    fn timeseries_argument_checks() {
        let cfg = ModeConfig::new(2, bw(1.0)).unwrap();
        assert!(timeseries_qipf(&[0.0, 1.0, 2.0], &cfg, 1).is_err());
        assert!(timeseries_qipf(&[0.0, 1.0, 2.0], &cfg, 3).is_err());
        assert!(timeseries_qipf(&[0.0, 1.0, 2.0], &cfg, 2).is_ok());
    }

    #[test]
    fn grid_counts() {
        assert_eq!(grid(-6.0, 6.0, 0.1).unwrap().len(), 121);
        assert!(grid(0.0, 1.0, 0.0).is_err());
        assert!(grid(0.0, 1.0, -0.1).is_err());
        assert!(grid(1.0, 0.0, 0.1).is_err());
    }

    #[test]
    fn near_node_is_flagged_not_dropped() {
        // H*_2 vanishes at ψ = 1/√2, i.e. ipf = 1/2.
        let c = SampleSet::from_scalars(&[0.0]).unwrap();
        let x = (2.0 * 2f64.ln()).sqrt(); // exp(-x²/2) = 1/2 at σ = 1
        let cfg = ModeConfig::with_floor(2, bw(1.0), 1e-6).unwrap();
        let r = mode_ratios(&c, &cfg, &[x]).unwrap();
        assert!(r.near_node);
        assert!(r.ratios.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn csv_layout() {
        let m = matrix(vec![vec![1.0, 0.0], vec![0.5, 2.0]]);
        let mut buf = Vec::new();
        m.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), "x,v1,v2\n0,1,0.5\n1,0,2\n");
        let back = ModeMatrix::read_csv(&buf[..], bw(1.0)).unwrap();
        assert_eq!(back.values, m.values);
    }
}
