//! Fault detection and diagnosis for motor-current signals.
//!
//! The pipeline runs in five stages, each in its own module:
//!
//! 1. [`preprocess`]: Savitzky-Golay denoising, a morphological-dilation
//!    envelope and median-threshold segmentation into motion cycles.
//! 2. [`scattering`]: a two-layer wavelet scattering network (Morlet filter
//!    banks, modulus, Gaussian low-pass) that maps each cycle to a fixed
//!    vector of time-averaged path energies.
//! 3. [`classify`]: six classical classifiers trained on those vectors.
//! 4. [`evaluate`]: confusion matrices, one-vs-rest metrics and repeated
//!    stratified k-fold cross-validation.
//! 5. [`synth`]: a synthetic motor-current generator with configurable fault
//!    signatures, used in place of recorded robot data.
//!
//! [`cli`] wires the stages together behind a configuration file.

pub mod classify;
pub mod cli;
pub mod config;
pub mod error;
pub mod evaluate;
pub mod io;
pub mod preprocess;
pub mod scattering;
pub mod signal;
pub mod synth;

pub use error::{Error, Result};
pub use signal::{LabeledDataset, MultiChannelRecord, Signal};
