//! Frequency-domain enhancement of grayscale MRI slices, a small
//! from-scratch convolutional network, and the confusion-matrix metrics used
//! to score four-class dementia staging.
//!
//! The crate is organised by capability:
//!
//! * [`image_io`] loads and saves grayscale grids and scans the four-class
//!   dataset layout.
//! * [`dft`] holds the 2D discrete Fourier transform (fast path for arbitrary
//!   sizes plus a direct-definition reference), magnitude, phase and
//!   quadrant centering.
//! * [`enhance`] builds low/high-pass masks and runs the enhancement chain
//!   (pre-smoothing, high-frequency emphasis, normalization, tonal stages).
//! * [`cnn`] is a desk-scale CNN with exact backpropagation.
//! * [`metrics`] computes accuracy, balanced accuracy, multiclass MCC,
//!   macro-F1 and one-vs-rest AUC.
//! * [`cli`] wires the above into the `spectra` command-line tool.

pub mod cli;
pub mod cnn;
pub mod dft;
pub mod enhance;
pub mod image_io;
pub mod metrics;

pub use dft::{dft_forward, dft_inverse, dft_naive, Spectrum};
pub use enhance::{enhance, EnhanceConfig, FilterKind, FilterMask};
pub use image_io::{ClassLabel, DatasetManifest, ImageGrid};
pub use metrics::{ConfusionMatrix, MetricsReport, PredictionRecord};

/// Version string recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
