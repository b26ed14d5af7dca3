//! Synthetic motor-current recordings with configurable fault signatures.
//!
//! A recording alternates rest and motion: `[silence, cycle] x cycles` then a
//! final silence. During a cycle the current is the motor fundamental under a
//! trapezoidal speed profile (ramp up, plateau, a dip where the joint
//! reverses, plateau, ramp down). Faults add harmonics of the fundamental and
//! periodic decaying impacts that modulate its amplitude. White noise covers
//! the whole recording.
//!
//! These signatures are a stand-in for real reducer faults, chosen to give
//! classifiers something plausible to find, not a physical model.

use std::f64::consts::PI;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::io::{csv_writer, finish, fmt_real};
use crate::signal::Signal;

/// Fraction of the cycle spent on each speed ramp.
const RAMP_FRACTION: f64 = 0.1;
/// Width of the reversal dip as a fraction of the cycle, and its depth.
const DIP_WIDTH: f64 = 0.1;
const DIP_LEVEL: f64 = 0.8;

#[derive(Debug, Clone, PartialEq)]
pub struct FaultClassSpec {
    pub name: String,
    /// (multiple of the fundamental, amplitude relative to it)
    pub harmonic_gains: Vec<(f64, f64)>,
    pub impulse_rate_hz: f64,
    /// Peak relative amplitude modulation caused by one impact.
    pub impulse_gain: f64,
    /// Decay time constant of one impact.
    pub impulse_width_s: f64,
    /// Each cycle scales `impulse_gain` by a uniform factor in `1 +- spread`.
    pub impulse_gain_spread: f64,
    /// Load modulation depth at a quarter of the fundamental.
    pub am_depth: f64,
    /// Multiplier on the recording's noise level.
    pub noise_gain: f64,
}

impl FaultClassSpec {
    pub fn normal() -> Self {
        Self {
            name: "normal".into(),
            harmonic_gains: Vec::new(),
            impulse_rate_hz: 0.0,
            impulse_gain: 0.0,
            impulse_width_s: 0.004,
            impulse_gain_spread: 0.0,
            am_depth: 0.1,
            noise_gain: 1.0,
        }
    }

    pub fn faulty() -> Self {
        Self {
            name: "faulty".into(),
            harmonic_gains: vec![(3.0, 0.05), (7.5, 0.02)],
            impulse_rate_hz: 20.0,
            impulse_gain: 0.3,
            impulse_width_s: 0.012,
            impulse_gain_spread: 0.4,
            am_depth: 0.1,
            noise_gain: 1.0,
        }
    }

    /// A worn-out reducer: no gear-mesh harmonics, and impacts that are
    /// weaker, sparser and erratic from cycle to cycle, so single cycles can
    /// pass for either neighbour class.
    pub fn faulty_aged() -> Self {
        Self {
            name: "faulty_aged".into(),
            harmonic_gains: Vec::new(),
            impulse_rate_hz: 12.0,
            impulse_gain: 0.15,
            impulse_width_s: 0.006,
            impulse_gain_spread: 1.0,
            am_depth: 0.1,
            noise_gain: 1.0,
        }
    }

    /// Looks up one of the three built-in classes by name.
    pub fn builtin(name: &str) -> Option<Self> {
        match name {
            "normal" => Some(Self::normal()),
            "faulty" => Some(Self::faulty()),
            "faulty_aged" => Some(Self::faulty_aged()),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite_nonneg = |v: f64| v.is_finite() && v >= 0.0;
        if self.name.is_empty() {
            return Err(Error::param("class name must not be empty"));
        }
        if !self
            .harmonic_gains
            .iter()
            .all(|&(m, g)| finite_nonneg(g) && m.is_finite() && m > 0.0)
        {
            return Err(Error::param(format!("{}: harmonic gains must be finite and >= 0", self.name)));
        }
        for (what, v) in [
            ("impulse_rate_hz", self.impulse_rate_hz),
            ("impulse_gain", self.impulse_gain),
            ("noise_gain", self.noise_gain),
        ] {
            if !finite_nonneg(v) {
                return Err(Error::param(format!("{}: {what} must be finite and >= 0", self.name)));
            }
        }
        if !(self.impulse_width_s.is_finite() && self.impulse_width_s > 0.0) {
            return Err(Error::param(format!("{}: impulse_width_s must be positive", self.name)));
        }
        if !(0.0..=1.0).contains(&self.am_depth) || !(0.0..=1.0).contains(&self.impulse_gain_spread) {
            return Err(Error::param(format!(
                "{}: am_depth and impulse_gain_spread must lie in [0, 1]",
                self.name
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RecordingSpec {
    pub fs_hz: f64,
    pub cycles: usize,
    pub speed_percent: f64,
    pub cycle_duration_s: f64,
    pub silence_s: f64,
    pub noise_rms: f64,
    /// Current amplitude on the plateau.
    pub amplitude: f64,
    /// Fundamental at 100 % speed.
    pub base_f0_hz: f64,
    pub class_spec: FaultClassSpec,
    pub seed: u64,
}

impl Default for RecordingSpec {
    fn default() -> Self {
        Self {
            fs_hz: 2048.0,
            cycles: 10,
            speed_percent: 100.0,
            cycle_duration_s: 3.0,
            silence_s: 2.5,
            noise_rms: 0.1,
            amplitude: 1.0,
            base_f0_hz: 50.0,
            class_spec: FaultClassSpec::normal(),
            seed: 0,
        }
    }
}

impl RecordingSpec {
    pub fn validate(&self) -> Result<()> {
        self.class_spec.validate()?;
        if !(self.fs_hz.is_finite() && self.fs_hz > 0.0) {
            return Err(Error::param("fs_hz must be positive"));
        }
        if self.cycles == 0 {
            return Err(Error::param("cycles must be at least 1"));
        }
        if !(10.0..=100.0).contains(&self.speed_percent) {
            return Err(Error::param(format!(
                "speed_percent must lie in [10, 100], got {}",
                self.speed_percent
            )));
        }
        for (what, v) in [
            ("noise_rms", self.noise_rms),
            ("amplitude", self.amplitude),
            ("base_f0_hz", self.base_f0_hz),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::param(format!("{what} must be finite and >= 0")));
            }
        }
        if self.cycle_samples() < 1 {
            return Err(Error::param("cycle_duration_s yields no samples"));
        }
        if !(self.silence_s.is_finite() && self.silence_s >= 0.0) || self.silence_samples() < 1 {
            return Err(Error::param("silence_s yields no samples"));
        }
        Ok(())
    }

    pub fn cycle_samples(&self) -> usize {
        (self.cycle_duration_s * self.fs_hz).round().max(0.0) as usize
    }

    pub fn silence_samples(&self) -> usize {
        (self.silence_s * self.fs_hz).round().max(0.0) as usize
    }

    pub fn fundamental_hz(&self) -> f64 {
        self.base_f0_hz * self.speed_percent / 100.0
    }
}

/// Speed profile over one cycle, `u` in `[0, 1)`.
pub fn motion_profile(u: f64) -> f64 {
    let ramp = if u < RAMP_FRACTION {
        u / RAMP_FRACTION
    } else if u > 1.0 - RAMP_FRACTION {
        (1.0 - u) / RAMP_FRACTION
    } else {
        1.0
    };
    let d = (u - 0.5).abs() / (DIP_WIDTH / 2.0);
    let dip = if d < 1.0 { 1.0 - (1.0 - DIP_LEVEL) * (1.0 - d) } else { 1.0 };
    ramp.min(dip)
}

#[derive(Debug, Clone)]
pub struct SyntheticRecording {
    pub signal: Signal,
    /// `[start, end)` sample range of every motion cycle.
    pub cycles: Vec<(usize, usize)>,
}

/// Noise-free current of one cycle, `n` samples long.
fn cycle_waveform(spec: &RecordingSpec, n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let cls = &spec.class_spec;
    let fs = spec.fs_hz;
    let f0 = spec.fundamental_hz();
    let impacts = cls.impulse_rate_hz > 0.0 && cls.impulse_gain > 0.0;
    let (gain, offset) = if impacts {
        let jitter = 1.0 + cls.impulse_gain_spread * rng.random_range(-1.0..=1.0);
        (cls.impulse_gain * jitter, rng.random_range(0.0..1.0 / cls.impulse_rate_hz))
    } else {
        (0.0, 0.0)
    };
    (0..n)
        .map(|i| {
            let t = i as f64 / fs;
            let mut impact = 0.0;
            if impacts {
                // only the latest impact matters once earlier ones have decayed
                let period = 1.0 / cls.impulse_rate_hz;
                let since = t - offset;
                if since >= 0.0 {
                    let mut age = since % period;
                    while age <= 10.0 * cls.impulse_width_s && age <= since {
                        impact += (-age / cls.impulse_width_s).exp();
                        age += period;
                    }
                }
            }
            let carrier = (2.0 * PI * f0 * t).sin()
                * (1.0 + gain * impact)
                * (1.0 + cls.am_depth * (2.0 * PI * f0 / 4.0 * t).sin());
            let harmonics: f64 = cls
                .harmonic_gains
                .iter()
                .map(|&(m, g)| g * (2.0 * PI * m * f0 * t).sin())
                .sum();
            spec.amplitude * motion_profile(i as f64 / n as f64) * (carrier + harmonics)
        })
        .collect()
}

pub fn generate_recording(spec: &RecordingSpec) -> Result<SyntheticRecording> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (nc, ns) = (spec.cycle_samples(), spec.silence_samples());
    let total = spec.cycles * (nc + ns) + ns;
    let mut x = Vec::with_capacity(total);
    let mut cycles = Vec::with_capacity(spec.cycles);
    for _ in 0..spec.cycles {
        x.resize(x.len() + ns, 0.0);
        let start = x.len();
        x.extend(cycle_waveform(spec, nc, &mut rng));
        cycles.push((start, x.len()));
    }
    x.resize(total, 0.0);
    let sigma = spec.noise_rms * spec.class_spec.noise_gain;
    if sigma > 0.0 {
        let noise = Normal::new(0.0, sigma).map_err(|e| Error::param(e.to_string()))?;
        x.iter_mut().for_each(|v| *v += noise.sample(&mut rng));
    }
    Ok(SyntheticRecording {
        signal: Signal::new(x, spec.fs_hz)?,
        cycles,
    })
}

#[derive(Debug, Clone)]
pub struct DatasetItem {
    pub recording: SyntheticRecording,
    pub class_index: usize,
    pub speed_percent: f64,
    pub seed: u64,
}

/// `counts[c]` recordings of each class, in class order. Sample `i` (counted
/// across all classes) uses seed `seed + i` for both its speed draw, uniform
/// in `speed_range`, and its waveform. Other settings come from `base`.
pub fn generate_dataset(
    class_specs: &[FaultClassSpec],
    counts: &[usize],
    speed_range: (f64, f64),
    base: &RecordingSpec,
    seed: u64,
) -> Result<Vec<DatasetItem>> {
    if class_specs.is_empty() {
        return Err(Error::param("no classes to generate"));
    }
    if class_specs.len() != counts.len() {
        return Err(Error::DimensionMismatch {
            expected: class_specs.len(),
            actual: counts.len(),
        });
    }
    let (lo, hi) = speed_range;
    if !(10.0 <= lo && lo <= hi && hi <= 100.0) {
        return Err(Error::param(format!("speed range ({lo}, {hi}) must lie within [10, 100]")));
    }
    let mut out = Vec::with_capacity(counts.iter().sum());
    let mut index = 0u64;
    for (c, (cls, &n)) in class_specs.iter().zip(counts).enumerate() {
        for _ in 0..n {
            let sample_seed = seed.wrapping_add(index);
            index += 1;
            let mut speed_rng = ChaCha8Rng::seed_from_u64(sample_seed);
            speed_rng.set_stream(1);
            let speed = if hi > lo { speed_rng.random_range(lo..=hi) } else { lo };
            let spec = RecordingSpec {
                speed_percent: speed,
                class_spec: cls.clone(),
                seed: sample_seed,
                ..base.clone()
            };
            out.push(DatasetItem {
                recording: generate_recording(&spec)?,
                class_index: c,
                speed_percent: speed,
                seed: sample_seed,
            });
        }
    }
    Ok(out)
}

/// One manifest line: recording file (relative to the manifest), class name,
/// speed and seed.
#[derive(Debug, Clone, PartialEq)]
pub struct ManifestRow {
    pub file: String,
    pub class: String,
    pub speed_percent: f64,
    pub seed: u64,
}

pub fn write_manifest(rows: &[ManifestRow], path: &Path) -> Result<()> {
    let mut w = csv_writer();
    let to_err = |e: csv::Error| Error::csv(path, e);
    w.write_record(["file", "class", "speed", "seed"]).map_err(to_err)?;
    for r in rows {
        w.write_record([r.file.clone(), r.class.clone(), fmt_real(r.speed_percent), r.seed.to_string()])
            .map_err(to_err)?;
    }
    finish(path, w)
}

pub fn read_manifest(path: &Path) -> Result<Vec<ManifestRow>> {
    let mut rdr = csv::ReaderBuilder::new()
        .from_path(path)
        .map_err(|e| Error::csv(path, e))?;
    let header = rdr.headers().map_err(|e| Error::csv(path, e))?.clone();
    let col = |name: &str| {
        header.iter().position(|h| h == name).ok_or_else(|| Error::Format {
            path: path.to_path_buf(),
            message: format!("manifest lacks a {name:?} column"),
        })
    };
    let (fi, ci) = (col("file")?, col("class")?);
    let (si, di) = (header.iter().position(|h| h == "speed"), header.iter().position(|h| h == "seed"));
    let mut rows = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::csv(path, e))?;
        let field = |j: usize| rec.get(j).unwrap_or("").to_string();
        let parse_err = |column: &str, value: String| Error::Parse {
            path: path.to_path_buf(),
            row: i + 2,
            column: column.to_string(),
            value,
        };
        let speed_percent = match si {
            Some(j) => field(j).parse::<f64>().map_err(|_| parse_err("speed", field(j)))?,
            None => f64::NAN,
        };
        let seed = match di {
            Some(j) => field(j).parse::<u64>().map_err(|_| parse_err("seed", field(j)))?,
            None => 0,
        };
        rows.push(ManifestRow {
            file: field(fi),
            class: field(ci),
            speed_percent,
            seed,
        });
    }
    Ok(rows)
}
