//! Kernel-based uncertainty decomposition.
//!
//! Data are projected into a Gaussian RKHS as an information potential field
//! (IPF). The square root of the field is treated as the ground-state wave
//! function of a Schrödinger-type eigenvalue relation, which yields a quantum
//! information potential field (QIPF). Projecting the wave function through
//! normalized Hermite polynomials gives a family of higher-order uncertainty
//! modes that concentrate in the tails of the data density.
//!
//! The same machinery, applied to the activations (or weights) of a trained
//! feed-forward network and evaluated at the network's output, gives a
//! single-pass surrogate for predictive uncertainty. An MC-dropout baseline and
//! the evaluation metrics used to compare the two live alongside it.
//!
//! | Module | Contents |
//! |--------|----------|
//! | [`kernelfield`] | Gaussian kernel, IPF/CIP, wave function and analytic derivatives |
//! | [`hermite`] | Physicist's Hermite polynomials, derivatives, L² norms |
//! | [`qipf`] | Mode matrices over grids and time series, dominance statistics |
//! | [`nn`] | Small MLP with Adam training, dropout and activation capture |
//! | [`uq`] | Cross-QIPF surrogate and MC-dropout baseline |
//! | [`eval`] | Generators, normalization, calibration RMSE, ROC/AUC, splits |
//! | [`experiment`] | Recipe format and end-to-end pipelines |

pub mod error;
pub mod eval;
pub mod experiment;
pub mod hermite;
pub mod kernelfield;
pub mod nn;
pub mod qipf;
pub mod uq;

pub use error::{Error, Result};
pub use kernelfield::{Bandwidth, FieldEvaluation, SampleSet};
pub use qipf::{ModeConfig, ModeMatrix};
