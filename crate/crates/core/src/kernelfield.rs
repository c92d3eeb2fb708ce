//! Gaussian kernel fields over a set of centers.
//!
//! The kernel is the unnormalized Gaussian `exp(-|u-v|² / 2σ²)`, so the
//! information potential field (the mean of kernels centered at the samples)
//! lies in `(0, 1]`. The wave function is its square root.
//!
//! All functions here are pure; evaluation at many query points can be
//! parallelized freely by the caller.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Lower clamp applied to the field value before taking square roots or
/// dividing by it. Points where the raw sum falls below it are "far-field".
pub const IPF_FLOOR: f64 = 1e-300;

/// An ordered, non-empty set of `d`-dimensional points stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSet {
    data: Vec<f64>,
    dim: usize,
}

impl SampleSet {
    pub fn new(points: Vec<Vec<f64>>) -> Result<Self> {
        let dim = points.first().map(Vec::len).ok_or(Error::EmptySampleSet)?;
        if dim == 0 {
            return Err(invalid("points must have dimension >= 1"));
        }
        let mut data = Vec::with_capacity(points.len() * dim);
        for p in &points {
            if p.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: p.len(),
                });
            }
            data.extend_from_slice(p);
        }
        Self::from_flat(data, dim)
    }

    /// One-dimensional set from scalars.
    pub fn from_scalars(values: &[f64]) -> Result<Self> {
        Self::from_flat(values.to_vec(), 1)
    }

    pub fn from_flat(data: Vec<f64>, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("points must have dimension >= 1"));
        }
        if data.is_empty() {
            return Err(Error::EmptySampleSet);
        }
        if !data.len().is_multiple_of(dim) {
            return Err(invalid(format!(
                "flat buffer of length {} is not a multiple of dimension {dim}",
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("sample set"));
        }
        Ok(Self { data, dim })
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.dim)
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.data
    }

    /// Same points with every coordinate mapped through `f`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::from_flat(self.data.iter().map(|&v| f(v)).collect(), self.dim)
    }
}

/// Kernel width σ. Positive and finite.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Bandwidth(f64);

impl Bandwidth {
    pub fn new(sigma: f64) -> Result<Self> {
        if sigma.is_finite() && sigma > 0.0 {
            Ok(Self(sigma))
        } else {
            Err(Error::InvalidBandwidth(sigma))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// `c · σ`, for `c > 0`.
    pub fn scaled(self, c: f64) -> Result<Self> {
        Self::new(self.0 * c)
    }
}

impl TryFrom<f64> for Bandwidth {
    type Error = Error;

    fn try_from(v: f64) -> Result<Self> {
        Self::new(v)
    }
}

impl From<Bandwidth> for f64 {
    fn from(b: Bandwidth) -> f64 {
        b.0
    }
}

/// Value, gradient and Laplacian of a scalar field at one point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldEvaluation {
    pub value: f64,
    pub gradient: Vec<f64>,
    pub laplacian: f64,
    /// The underlying field sum underflowed below [`IPF_FLOOR`] (or the
    /// configured floor) and was clamped.
    pub far_field: bool,
}

fn check_query(centers: &SampleSet, x: &[f64]) -> Result<()> {
    if x.len() != centers.dim() {
        return Err(Error::DimensionMismatch {
            expected: centers.dim(),
            got: x.len(),
        });
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("query point"));
    }
    Ok(())
}

#[inline]
fn sq_dist(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| (a - b) * (a - b)).sum()
}

/// `exp(-|u-v|² / 2σ²)`.
pub fn gaussian_kernel(u: &[f64], v: &[f64], sigma: Bandwidth) -> Result<f64> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch {
            expected: u.len(),
            got: v.len(),
        });
    }
    if u.iter().chain(v).any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("kernel argument"));
    }
    let s = sigma.value();
    Ok((-sq_dist(u, v) / (2.0 * s * s)).exp())
}

/// Information potential field `(1/N) Σ_i G_σ(x - x_i)`, clamped below at
/// [`IPF_FLOOR`].
pub fn ipf(centers: &SampleSet, sigma: Bandwidth, x: &[f64]) -> Result<f64> {
    check_query(centers, x)?;
    let inv = 1.0 / (2.0 * sigma.value() * sigma.value());
    let sum: f64 = centers.iter().map(|c| (-sq_dist(x, c) * inv).exp()).sum();
    Ok((sum / centers.len() as f64).max(IPF_FLOOR))
}

/// IPF value with its analytic gradient and Laplacian.
///
/// For each center, `∂_j G = -(x_j - c_j)/σ² · G` and
/// `∇²G = (|x - c|²/σ⁴ - d/σ²) · G`.
pub fn ipf_derivatives(centers: &SampleSet, sigma: Bandwidth, x: &[f64]) -> Result<FieldEvaluation> {
    check_query(centers, x)?;
    let d = centers.dim();
    let s2 = sigma.value() * sigma.value();
    let inv2s2 = 1.0 / (2.0 * s2);
    let mut value = 0.0;
    let mut gradient = vec![0.0; d];
    let mut laplacian = 0.0;
    for c in centers.iter() {
        let r2 = sq_dist(x, c);
        let g = (-r2 * inv2s2).exp();
        value += g;
        for (gj, (xj, cj)) in gradient.iter_mut().zip(x.iter().zip(c)) {
            *gj -= (xj - cj) / s2 * g;
        }
        laplacian += (r2 / (s2 * s2) - d as f64 / s2) * g;
    }
    let n = centers.len() as f64;
    value /= n;
    gradient.iter_mut().for_each(|g| *g /= n);
    laplacian /= n;
    let far_field = value < IPF_FLOOR;
    Ok(FieldEvaluation {
        value: value.max(IPF_FLOOR),
        gradient,
        laplacian,
        far_field,
    })
}

/// Wave function `ψ = √ipf` with gradient and Laplacian, using the default
/// floor [`IPF_FLOOR`].
pub fn wavefunction_derivatives(centers: &SampleSet, sigma: Bandwidth, x: &[f64]) -> Result<FieldEvaluation> {
    wavefunction_derivatives_with_floor(centers, sigma, x, IPF_FLOOR)
}

/// As [`wavefunction_derivatives`] with an explicit floor on the IPF value.
///
/// With `p`, `g`, `L` the IPF value, gradient and Laplacian:
/// `ψ = √p`, `∇ψ = g / 2√p`, `∇²ψ = L / 2√p - |g|² / 4p^{3/2}`.
pub fn wavefunction_derivatives_with_floor(
    centers: &SampleSet,
    sigma: Bandwidth,
    x: &[f64],
    floor: f64,
) -> Result<FieldEvaluation> {
    if !(floor.is_finite() && floor > 0.0) {
        return Err(invalid(format!("ipf floor must be positive, got {floor}")));
    }
    let field = ipf_derivatives(centers, sigma, x)?;
    let far_field = field.far_field || field.value < floor;
    let p = field.value.max(floor);
    let sp = p.sqrt();
    // |g|/√p stays representable where p·√p would underflow.
    let q = field.gradient.iter().map(|g| g * g).sum::<f64>().sqrt() / sp;
    Ok(FieldEvaluation {
        value: sp,
        gradient: field.gradient.iter().map(|g| g / (2.0 * sp)).collect(),
        laplacian: (field.laplacian - 0.5 * q * q) / (2.0 * sp),
        far_field,
    })
}

/// Cross information potential: the field built from one population of
/// centers (e.g. a layer's activations) evaluated at a query from another.
pub fn cip(centers: &SampleSet, sigma: Bandwidth, l2: &[f64]) -> Result<f64> {
    ipf(centers, sigma, l2)
}

/// Information potential `(1/N²) Σ_i Σ_j G_{√2σ}(x_j - x_i)`, the integral of
/// the squared Parzen estimate.
pub fn information_potential(samples: &SampleSet, sigma: Bandwidth) -> Result<f64> {
    let width = sigma.scaled(std::f64::consts::SQRT_2)?.value();
    let inv = 1.0 / (2.0 * width * width);
    let mut sum = 0.0;
    for a in samples.iter() {
        for b in samples.iter() {
            sum += (-sq_dist(a, b) * inv).exp();
        }
    }
    let n = samples.len() as f64;
    Ok(sum / (n * n))
}

/// Silverman's rule of thumb `1.06 · s · N^{-1/5}` for scalar samples, with
/// `s` the unbiased sample standard deviation.
pub fn silverman_bandwidth(samples: &SampleSet) -> Result<Bandwidth> {
    if samples.dim() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: samples.dim(),
        });
    }
    let n = samples.len();
    if n < 2 {
        return Err(invalid("silverman bandwidth needs at least two samples"));
    }
    let xs = samples.as_flat();
    let mean = xs.iter().sum::<f64>() / n as f64;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64;
    let std = var.sqrt();
    // Identical values can leave rounding noise in the mean, hence relative.
    if std == 0.0 || std <= 1e-12 * mean.abs() {
        return Err(Error::DegenerateCenters("zero sample variance".into()));
    }
    Bandwidth::new(1.06 * std * (n as f64).powf(-0.2))
}
