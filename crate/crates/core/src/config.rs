//! TOML pipeline configuration.
//!
//! Every key is optional; missing keys take the defaults shown by
//! `PipelineConfig::default()`. Unknown keys are rejected.
//!
//! ```toml
//! seed = 7
//!
//! [preprocess]
//! sg_window = 31
//! threshold_mode = "median"   # or a fixed number
//!
//! [scattering]
//! invariance_scale_s = "auto" # or seconds
//! signal_length = 6554
//!
//! [classify]
//! kinds = ["svm_linear", "knn"]
//! [classify.hyperparams.knn]
//! k = 3
//!
//! [evaluate]
//! folds = 5
//! repeats = 10
//!
//! [synth]
//! classes = ["normal", "faulty"]
//! counts = [20, 20]
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;

use crate::classify::{ClassifierKind, ClassifierType};
use crate::error::{Error, Result};
use crate::io::ColumnSelector;
use crate::preprocess::{EnvelopeParams, SegmentationParams, ThresholdMode};
use crate::scattering::{invariance_scale, ScatteringConfig};
use crate::synth::{FaultClassSpec, RecordingSpec};

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum ThresholdSetting {
    Named(String),
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum ScaleSetting {
    Named(String),
    Seconds(f64),
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PreprocessSection {
    pub sg_window: usize,
    pub sg_order: usize,
    pub dilation_window: usize,
    pub smooth_envelope: bool,
    pub threshold_mode: ThresholdSetting,
    pub min_segment_len: usize,
    pub merge_gap: usize,
}

impl Default for PreprocessSection {
    fn default() -> Self {
        let env = EnvelopeParams::default();
        let seg = SegmentationParams::default();
        Self {
            sg_window: crate::preprocess::DEFAULT_SG_WINDOW,
            sg_order: crate::preprocess::DEFAULT_SG_ORDER,
            dilation_window: env.dilation_window(),
            smooth_envelope: env.smooth_after,
            threshold_mode: ThresholdSetting::Named("median".into()),
            min_segment_len: seg.min_segment_len,
            merge_gap: seg.merge_gap,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScatteringSection {
    pub invariance_scale_s: ScaleSetting,
    pub q_first: u32,
    pub q_second: u32,
    pub max_order: u32,
    pub signal_length: usize,
}

impl Default for ScatteringSection {
    fn default() -> Self {
        Self {
            invariance_scale_s: ScaleSetting::Named("auto".into()),
            q_first: 8,
            q_second: 1,
            max_order: 2,
            signal_length: 6554,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifySection {
    pub kinds: Vec<String>,
    /// Per-kind overrides, keyed by kind name.
    pub hyperparams: BTreeMap<String, BTreeMap<String, f64>>,
}

impl Default for ClassifySection {
    fn default() -> Self {
        Self {
            kinds: ClassifierType::ALL.iter().map(|k| k.name().to_string()).collect(),
            hyperparams: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvaluateSection {
    pub folds: usize,
    pub repeats: usize,
    /// Features exported for parallel-coordinate plots.
    pub top_features: usize,
}

impl Default for EvaluateSection {
    fn default() -> Self {
        Self {
            folds: 5,
            repeats: 10,
            top_features: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IoSection {
    pub sample_rate_hz: f64,
    /// Column index or header name of the channel to analyse.
    pub channel: String,
}

impl Default for IoSection {
    fn default() -> Self {
        Self {
            sample_rate_hz: 2048.0,
            channel: "0".into(),
        }
    }
}

/// A class definition overriding or extending the built-in ones.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassDefinition {
    pub name: String,
    /// Built-in class to start from; defaults to "normal".
    pub base: Option<String>,
    pub harmonic_gains: Option<Vec<(f64, f64)>>,
    pub impulse_rate_hz: Option<f64>,
    pub impulse_gain: Option<f64>,
    pub impulse_width_s: Option<f64>,
    pub impulse_gain_spread: Option<f64>,
    pub am_depth: Option<f64>,
    pub noise_gain: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthSection {
    pub classes: Vec<String>,
    pub counts: Vec<usize>,
    pub speed_range: (f64, f64),
    pub cycles: usize,
    pub cycle_duration_s: f64,
    pub silence_s: f64,
    pub noise_rms: f64,
    pub amplitude: f64,
    pub base_f0_hz: f64,
    pub class: Vec<ClassDefinition>,
}

impl Default for SynthSection {
    fn default() -> Self {
        let r = RecordingSpec::default();
        Self {
            classes: vec!["normal".into(), "faulty".into()],
            counts: vec![20, 20],
            speed_range: (10.0, 100.0),
            cycles: r.cycles,
            cycle_duration_s: r.cycle_duration_s,
            silence_s: r.silence_s,
            noise_rms: r.noise_rms,
            amplitude: r.amplitude,
            base_f0_hz: r.base_f0_hz,
            class: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Root of all randomness: recording `i` uses `seed + i`, repeat `r` of
    /// cross-validation uses `seed + r`.
    pub seed: u64,
    pub preprocess: PreprocessSection,
    pub scattering: ScatteringSection,
    pub classify: ClassifySection,
    pub evaluate: EvaluateSection,
    pub io: IoSection,
    pub synth: SynthSection,
}

impl PipelineConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    /// Checks every section by resolving it.
    pub fn validate(&self) -> Result<()> {
        let cfg = |e: Error| Error::Config(e.to_string());
        self.envelope_params().map_err(cfg)?;
        self.segmentation_params().map_err(cfg)?;
        self.scattering_config().map_err(cfg)?;
        self.classifier_kinds().map_err(cfg)?;
        self.class_specs().map_err(cfg)?;
        if self.preprocess.sg_window < 3 || self.preprocess.sg_window.is_multiple_of(2) {
            return Err(Error::Config("preprocess.sg_window must be odd and at least 3".into()));
        }
        if self.preprocess.sg_order >= self.preprocess.sg_window {
            return Err(Error::Config("preprocess.sg_order must be below sg_window".into()));
        }
        if self.evaluate.folds < 2 || self.evaluate.repeats == 0 {
            return Err(Error::Config("evaluate needs folds >= 2 and repeats >= 1".into()));
        }
        if !(self.io.sample_rate_hz.is_finite() && self.io.sample_rate_hz > 0.0) {
            return Err(Error::Config("io.sample_rate_hz must be positive".into()));
        }
        if self.synth.counts.len() != self.synth.classes.len() {
            return Err(Error::Config("synth.counts must have one entry per class".into()));
        }
        let (lo, hi) = self.synth.speed_range;
        if !(10.0 <= lo && lo <= hi && hi <= 100.0) {
            return Err(Error::Config("synth.speed_range must lie within [10, 100]".into()));
        }
        self.recording_template().validate().map_err(cfg)?;
        Ok(())
    }

    pub fn channel(&self) -> ColumnSelector {
        self.io.channel.parse().unwrap_or_default()
    }

    pub fn envelope_params(&self) -> Result<EnvelopeParams> {
        EnvelopeParams::new(self.preprocess.dilation_window, self.preprocess.smooth_envelope)
    }

    pub fn segmentation_params(&self) -> Result<SegmentationParams> {
        let threshold_mode = match &self.preprocess.threshold_mode {
            ThresholdSetting::Named(s) if s == "median" => ThresholdMode::Median,
            ThresholdSetting::Fixed(v) if v.is_finite() => ThresholdMode::Fixed(*v),
            other => {
                return Err(Error::param(format!(
                    "threshold_mode must be \"median\" or a number, got {other:?}"
                )))
            }
        };
        if self.preprocess.min_segment_len == 0 {
            return Err(Error::param("min_segment_len must be at least 1"));
        }
        Ok(SegmentationParams {
            threshold_mode,
            min_segment_len: self.preprocess.min_segment_len,
            merge_gap: self.preprocess.merge_gap,
        })
    }

    /// Resolves an "auto" invariance scale to half the segment duration.
    pub fn scattering_config(&self) -> Result<ScatteringConfig> {
        let s = &self.scattering;
        let fs = self.io.sample_rate_hz;
        let scale = match &s.invariance_scale_s {
            ScaleSetting::Named(n) if n == "auto" => invariance_scale(s.signal_length, fs),
            ScaleSetting::Seconds(v) => *v,
            ScaleSetting::Named(n) => {
                return Err(Error::param(format!(
                    "invariance_scale_s must be \"auto\" or seconds, got {n:?}"
                )))
            }
        };
        ScatteringConfig::new(fs, s.signal_length, scale, s.q_first, s.q_second, s.max_order)
    }

    pub fn classifier_kinds(&self) -> Result<Vec<ClassifierKind>> {
        if self.classify.kinds.is_empty() {
            return Err(Error::param("classify.kinds is empty"));
        }
        for name in self.classify.hyperparams.keys() {
            if !self.classify.kinds.contains(name) {
                return Err(Error::param(format!(
                    "hyperparameters given for {name:?}, which is not in classify.kinds"
                )));
            }
        }
        self.classify
            .kinds
            .iter()
            .map(|name| {
                let t: ClassifierType = name.parse()?;
                let overrides = self.classify.hyperparams.get(name).cloned().unwrap_or_default();
                ClassifierKind::new(t, &overrides)
            })
            .collect()
    }

    /// Class specs in `synth.classes` order, built-ins patched by any
    /// `[[synth.class]]` entry of the same name.
    pub fn class_specs(&self) -> Result<Vec<FaultClassSpec>> {
        if self.synth.classes.is_empty() {
            return Err(Error::param("synth.classes is empty"));
        }
        self.synth
            .classes
            .iter()
            .map(|name| {
                let def = self.synth.class.iter().find(|d| &d.name == name);
                let base = match def.and_then(|d| d.base.as_deref()) {
                    Some(b) => b,
                    None if def.is_some() && FaultClassSpec::builtin(name).is_none() => "normal",
                    None => name.as_str(),
                };
                let mut spec = FaultClassSpec::builtin(base).ok_or_else(|| {
                    Error::param(format!(
                        "class {base:?} is neither built in nor defined under [[synth.class]]"
                    ))
                })?;
                spec.name = name.clone();
                if let Some(d) = def {
                    if let Some(v) = &d.harmonic_gains {
                        spec.harmonic_gains = v.clone();
                    }
                    let fields = [
                        (d.impulse_rate_hz, &mut spec.impulse_rate_hz),
                        (d.impulse_gain, &mut spec.impulse_gain),
                        (d.impulse_width_s, &mut spec.impulse_width_s),
                        (d.impulse_gain_spread, &mut spec.impulse_gain_spread),
                        (d.am_depth, &mut spec.am_depth),
                        (d.noise_gain, &mut spec.noise_gain),
                    ];
                    for (value, slot) in fields {
                        if let Some(v) = value {
                            *slot = v;
                        }
                    }
                }
                spec.validate()?;
                Ok(spec)
            })
            .collect()
    }

    /// Recording settings shared by every generated sample; class, speed and
    /// seed are filled in per sample.
    pub fn recording_template(&self) -> RecordingSpec {
        let s = &self.synth;
        RecordingSpec {
            fs_hz: self.io.sample_rate_hz,
            cycles: s.cycles,
            speed_percent: s.speed_range.1,
            cycle_duration_s: s.cycle_duration_s,
            silence_s: s.silence_s,
            noise_rms: s.noise_rms,
            amplitude: s.amplitude,
            base_f0_hz: s.base_f0_hz,
            class_spec: FaultClassSpec::normal(),
            seed: self.seed,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        assert_eq!(PipelineConfig::from_toml_str("").unwrap(), PipelineConfig::default());
        let c = PipelineConfig::default().scattering_config().unwrap();
        assert!((c.invariance_scale_s - 1.6001).abs() < 1e-3);
    }

    #[test]
    fn parses_sections() {
        let text = r#"
seed = 3
[preprocess]
threshold_mode = 0.25
[scattering]
invariance_scale_s = 1.0
q_first = 4
[classify]
kinds = ["knn", "svm_linear"]
[classify.hyperparams.knn]
k = 3
[synth]
classes = ["normal", "faulty", "wobbly"]
counts = [100, 20, 15]
[[synth.class]]
name = "wobbly"
base = "faulty"
impulse_rate_hz = 7.0
"#;
        let c = PipelineConfig::from_toml_str(text).unwrap();
        assert_eq!(c.seed, 3);
        assert_eq!(c.segmentation_params().unwrap().threshold_mode, ThresholdMode::Fixed(0.25));
        assert_eq!(c.scattering_config().unwrap().q_first, 4);
        let kinds = c.classifier_kinds().unwrap();
        assert_eq!(kinds[0].hyperparams()["k"], 3.0);
        let specs = c.class_specs().unwrap();
        assert_eq!(specs[2].name, "wobbly");
        assert_eq!(specs[2].impulse_rate_hz, 7.0);
        assert_eq!(specs[2].impulse_gain, FaultClassSpec::faulty().impulse_gain);
    }

    #[test]
    fn rejects_bad_configs() {
        for text in [
            "bogus = 1",
            "[preprocess]\nsg_window = 30",
            "[preprocess]\nthreshold_mode = \"mean\"",
            "[scattering]\ninvariance_scale_s = \"never\"",
            "[scattering]\ninvariance_scale_s = 9.0",
            "[classify]\nkinds = [\"svm\"]",
            "[classify]\nkinds = [\"knn\"]\n[classify.hyperparams.knn]\nc = 1.0",
            "[classify]\nkinds = [\"knn\"]\n[classify.hyperparams.svm_linear]\nc = 1.0",
            "[evaluate]\nfolds = 1",
            "[synth]\nclasses = [\"normal\", \"weird\"]",
            "[synth]\ncounts = [1]",
            "[synth]\nspeed_range = [0.0, 100.0]",
        ] {
            let e = PipelineConfig::from_toml_str(text).unwrap_err();
            assert!(e.is_usage(), "{text}: {e}");
        }
    }
}
