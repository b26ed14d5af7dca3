//! Two-layer wavelet scattering: filter banks, the U/S cascade and per-path
//! time-averaged features.

mod filters;
mod paths;
mod transform;

pub use filters::{build_filter_banks, FilterBankSet, ScalingFilter, WaveletFilter, SUPPORT_LEVEL};
pub use paths::{enumerate_paths, feature_vector, FeatureVector, ScatteringPath};
pub use transform::{scattering_transform, ScatteringNetwork, ScatteringResult};

use crate::error::{Error, Result};

/// Half the signal duration, `(N / fs) / 2`.
pub fn invariance_scale(signal_length: usize, sample_rate_hz: f64) -> f64 {
    signal_length as f64 / sample_rate_hz / 2.0
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScatteringConfig {
    pub sample_rate_hz: f64,
    pub signal_length: usize,
    pub invariance_scale_s: f64,
    /// Wavelets per octave in the first bank.
    pub q_first: u32,
    pub q_second: u32,
    /// 1 or 2.
    pub max_order: u32,
}

impl ScatteringConfig {
    pub fn new(
        sample_rate_hz: f64,
        signal_length: usize,
        invariance_scale_s: f64,
        q_first: u32,
        q_second: u32,
        max_order: u32,
    ) -> Result<Self> {
        let c = Self {
            sample_rate_hz,
            signal_length,
            invariance_scale_s,
            q_first,
            q_second,
            max_order,
        };
        c.validate()?;
        Ok(c)
    }

    /// Invariance scale derived from the signal length, Q = 8 then 1, two orders.
    pub fn with_auto_scale(sample_rate_hz: f64, signal_length: usize) -> Self {
        Self {
            sample_rate_hz,
            signal_length,
            invariance_scale_s: invariance_scale(signal_length, sample_rate_hz),
            q_first: 8,
            q_second: 1,
            max_order: 2,
        }
    }

    /// 2048 Hz, 6554-sample segments.
    pub fn paper_default() -> Self {
        Self::with_auto_scale(2048.0, 6554)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sample_rate_hz.is_finite() && self.sample_rate_hz > 0.0) {
            return Err(Error::param(format!(
                "sample rate must be positive, got {}",
                self.sample_rate_hz
            )));
        }
        if self.signal_length < 2 {
            return Err(Error::param("signal length must be at least 2"));
        }
        let duration = self.signal_length as f64 / self.sample_rate_hz;
        if !(self.invariance_scale_s.is_finite() && self.invariance_scale_s > 0.0) {
            return Err(Error::param(format!(
                "invariance scale must be positive, got {}",
                self.invariance_scale_s
            )));
        }
        if self.invariance_scale_s > duration * (1.0 + 1e-12) {
            return Err(Error::param(format!(
                "invariance scale {} s exceeds the signal duration {duration} s",
                self.invariance_scale_s
            )));
        }
        if self.q_first == 0 || self.q_second == 0 {
            return Err(Error::param("quality factors must be at least 1"));
        }
        if !(1..=2).contains(&self.max_order) {
            return Err(Error::param(format!(
                "max_order must be 1 or 2, got {}",
                self.max_order
            )));
        }
        Ok(())
    }

    /// FFT length: room for the signal plus a reflected margin of a quarter
    /// of its length on each side, rounded up to a 5-smooth multiple of the
    /// output decimation factor.
    pub fn transform_length(&self) -> usize {
        let k = filters::lowpass_decimation(filters::phi_sigma(self));
        let min = (3 * self.signal_length).div_ceil(2);
        k * next_5_smooth(min.div_ceil(k))
    }
}

fn next_5_smooth(n: usize) -> usize {
    (n.max(1)..)
        .find(|&m| {
            let mut r = m;
            for p in [2, 3, 5] {
                while r % p == 0 {
                    r /= p;
                }
            }
            r == 1
        })
        .expect("5-smooth numbers are unbounded")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn invariance_scale_examples() {
        assert!((invariance_scale(6554, 2048.0) - 1.6001).abs() < 1e-3);
        assert_eq!(invariance_scale(225280, 2048.0), 55.0);
        assert_eq!(invariance_scale(2048, 2048.0), 0.5);
    }

    #[test]
    fn smooth_sizes() {
        let got: Vec<usize> = [1, 7, 11, 154, 1025].iter().map(|&n| next_5_smooth(n)).collect();
        assert_eq!(got, vec![1, 8, 12, 160, 1080]);
    }

    #[test]
    fn config_validation() {
        assert!(ScatteringConfig::new(2048.0, 6554, 1.6, 8, 1, 2).is_ok());
        assert!(ScatteringConfig::new(2048.0, 6554, 3.3, 8, 1, 2).is_err());
        assert!(ScatteringConfig::new(2048.0, 6554, 1.6, 0, 1, 2).is_err());
        assert!(ScatteringConfig::new(2048.0, 6554, 1.6, 8, 0, 2).is_err());
        assert!(ScatteringConfig::new(2048.0, 6554, 1.6, 8, 1, 3).is_err());
        assert!(ScatteringConfig::new(2048.0, 6554, 1.6, 8, 1, 0).is_err());
        assert!(ScatteringConfig::new(-1.0, 6554, 1.6, 8, 1, 2).is_err());
        assert!(ScatteringConfig::new(2048.0, 6554, 0.0, 8, 1, 2).is_err());
        assert_eq!(ScatteringConfig::paper_default().transform_length(), 10240);
        assert_eq!(ScatteringConfig::with_auto_scale(2048.0, 2048).transform_length(), 3072);
    }
}
