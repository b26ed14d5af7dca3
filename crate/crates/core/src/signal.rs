//! Core data types shared by every stage of the pipeline.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// Metadata key holding the class label of a recording, when known.
pub const META_CLASS: &str = "class";
/// Metadata key holding the robot speed as a percentage of full speed.
pub const META_SPEED_PERCENT: &str = "speed_percent";
/// Metadata key naming the robot axis a recording was taken from.
pub const META_AXIS: &str = "axis";

/// A uniformly sampled, finite, non-empty real-valued series.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    samples: Vec<f64>,
    sample_rate_hz: f64,
}

impl Signal {
    pub fn new(samples: Vec<f64>, sample_rate_hz: f64) -> Result<Self> {
        if !(sample_rate_hz.is_finite() && sample_rate_hz > 0.0) {
            return Err(Error::param(format!(
                "sample rate must be positive and finite, got {sample_rate_hz}"
            )));
        }
        if samples.is_empty() {
            return Err(Error::data("signal has no samples"));
        }
        if let Some(i) = samples.iter().position(|x| !x.is_finite()) {
            return Err(Error::data(format!(
                "sample {i} is not finite ({})",
                samples[i]
            )));
        }
        Ok(Self {
            samples,
            sample_rate_hz,
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    /// Always false; kept for API symmetry with `len`.
    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate_hz
    }

    /// Same sample rate, new samples. Used by filters that preserve the rate.
    pub(crate) fn with_samples(&self, samples: Vec<f64>) -> Result<Self> {
        Signal::new(samples, self.sample_rate_hz)
    }

    /// Copy of `samples[start..end]` at the same rate.
    pub fn slice(&self, start: usize, end: usize) -> Result<Self> {
        if start >= end || end > self.samples.len() {
            return Err(Error::param(format!(
                "slice {start}..{end} out of bounds for a signal of length {}",
                self.samples.len()
            )));
        }
        self.with_samples(self.samples[start..end].to_vec())
    }
}

/// Several equally long channels recorded together, e.g. the phase currents
/// of one joint.
#[derive(Debug, Clone)]
pub struct MultiChannelRecord {
    channels: Vec<Signal>,
    channel_names: Vec<String>,
    pub metadata: BTreeMap<String, String>,
}

impl MultiChannelRecord {
    pub fn new(
        channels: Vec<Signal>,
        channel_names: Vec<String>,
        metadata: BTreeMap<String, String>,
    ) -> Result<Self> {
        if channels.is_empty() {
            return Err(Error::data("record has no channels"));
        }
        if channels.len() != channel_names.len() {
            return Err(Error::DimensionMismatch {
                expected: channels.len(),
                actual: channel_names.len(),
            });
        }
        let (len, rate) = (channels[0].len(), channels[0].sample_rate_hz());
        for (name, ch) in channel_names.iter().zip(&channels) {
            if ch.len() != len || ch.sample_rate_hz() != rate {
                return Err(Error::data(format!(
                    "channel {name:?} has {} samples at {} Hz, expected {len} at {rate} Hz",
                    ch.len(),
                    ch.sample_rate_hz()
                )));
            }
        }
        for (i, name) in channel_names.iter().enumerate() {
            if channel_names[..i].contains(name) {
                return Err(Error::data(format!("duplicate channel name {name:?}")));
            }
        }
        Ok(Self {
            channels,
            channel_names,
            metadata,
        })
    }

    pub fn channels(&self) -> &[Signal] {
        &self.channels
    }

    pub fn channel_names(&self) -> &[String] {
        &self.channel_names
    }

    pub fn channel(&self, name: &str) -> Option<&Signal> {
        self.channel_names
            .iter()
            .position(|n| n == name)
            .map(|i| &self.channels[i])
    }
}

/// N labelled feature rows of dimension D.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    features: Vec<Vec<f64>>,
    labels: Vec<usize>,
    class_names: Vec<String>,
    feature_names: Vec<String>,
}

impl LabeledDataset {
    pub fn new(
        features: Vec<Vec<f64>>,
        labels: Vec<usize>,
        class_names: Vec<String>,
        feature_names: Vec<String>,
    ) -> Result<Self> {
        if features.len() != labels.len() {
            return Err(Error::DimensionMismatch {
                expected: features.len(),
                actual: labels.len(),
            });
        }
        let dim = feature_names.len();
        for (i, row) in features.iter().enumerate() {
            if row.len() != dim {
                return Err(Error::data(format!(
                    "row {i} has {} features, expected {dim}",
                    row.len()
                )));
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::data(format!("row {i} contains a non-finite value")));
            }
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= class_names.len()) {
            return Err(Error::data(format!(
                "label {bad} out of range for {} classes",
                class_names.len()
            )));
        }
        Ok(Self {
            features,
            labels,
            class_names,
            feature_names,
        })
    }

    pub fn features(&self) -> &[Vec<f64>] {
        &self.features
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.feature_names.len()
    }

    pub fn n_classes(&self) -> usize {
        self.class_names.len()
    }

    /// Per-class sample counts, indexed by class.
    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.class_names.len()];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }

    /// Rows at `indices`, in that order, with the same class and feature names.
    pub fn subset(&self, indices: &[usize]) -> Self {
        Self {
            features: indices.iter().map(|&i| self.features[i].clone()).collect(),
            labels: indices.iter().map(|&i| self.labels[i]).collect(),
            class_names: self.class_names.clone(),
            feature_names: self.feature_names.clone(),
        }
    }

    /// Same rows with labels replaced; used for permutation tests.
    pub fn with_labels(&self, labels: Vec<usize>) -> Result<Self> {
        Self::new(
            self.features.clone(),
            labels,
            self.class_names.clone(),
            self.feature_names.clone(),
        )
    }
}
