//! Frequency-domain Morlet filter banks and the Gaussian scaling filter.
//!
//! Frequencies are handled internally in cycles per sample (Nyquist = 0.5)
//! and converted to Hz only at the public boundary.
//!
//! Layout of one bank with `Q` wavelets per octave:
//!
//! * the top wavelet sits just below Nyquist and neighbours are spaced by a
//!   factor `2^(1/Q)`, with widths chosen so adjacent responses cross at half
//!   power;
//! * once a wavelet would become narrower than the scaling filter (its time
//!   support longer than the invariance scale) the geometric ladder stops and
//!   the remaining gap down to the scaling filter's cutoff is tiled by
//!   linearly spaced wavelets of constant width.
//!
//! After construction every bank is scaled so that
//! `|phi|^2 + sum |psi|^2 <= 1` at every frequency bin, which keeps each
//! layer of the network non-expansive.

use std::f64::consts::{LN_2, PI};

use super::ScatteringConfig;
use crate::error::{Error, Result};

/// Relative amplitude that delimits the effective support of a Gaussian,
/// in time for the scaling filter and in frequency for wavelet bandwidths.
pub const SUPPORT_LEVEL: f64 = 1e-3;

/// The scaling filter's time support is where it exceeds machine epsilon
/// relative to its peak; that interval equals the invariance scale.
fn phi_sigma_time_samples(invariance_scale_samples: f64) -> f64 {
    invariance_scale_samples / (2.0 * (2.0 * (1.0 / f64::EPSILON).ln()).sqrt())
}

/// Half-width of a Gaussian of standard deviation `sigma` at [`SUPPORT_LEVEL`].
fn gaussian_half_width(sigma: f64) -> f64 {
    sigma * (2.0 * (1.0 / SUPPORT_LEVEL).ln()).sqrt()
}

/// Frequency of FFT bin `k` in cycles per sample, in `[-0.5, 0.5)`.
pub(crate) fn bin_frequency(k: usize, n: usize) -> f64 {
    if k < n.div_ceil(2) {
        k as f64 / n as f64
    } else {
        k as f64 / n as f64 - 1.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WaveletFilter {
    /// Peak of the frequency response.
    pub center_frequency_hz: f64,
    /// Full width of the band where the response exceeds [`SUPPORT_LEVEL`]
    /// of its peak; the modulus `|f * psi|` carries energy below this.
    pub bandwidth_hz: f64,
    /// Gaussian standard deviation of the response.
    pub sigma_hz: f64,
    /// Real, non-negative response on the FFT grid of the transform length.
    pub frequency_response: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingFilter {
    /// Half-power frequency.
    pub cutoff_hz: f64,
    pub sigma_hz: f64,
    pub frequency_response: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct FilterBankSet {
    pub phi: ScalingFilter,
    pub bank1: Vec<WaveletFilter>,
    pub bank2: Vec<WaveletFilter>,
    pub config: ScatteringConfig,
}

impl FilterBankSet {
    /// FFT length used for all convolutions.
    pub fn transform_length(&self) -> usize {
        self.phi.frequency_response.len()
    }

    /// `|phi|^2 + sum |psi|^2` per FFT bin for bank 1 or 2.
    pub fn littlewood_paley(&self, bank: usize) -> Vec<f64> {
        let filters = if bank == 1 { &self.bank1 } else { &self.bank2 };
        let mut lp: Vec<f64> = self.phi.frequency_response.iter().map(|p| p * p).collect();
        for f in filters {
            for (acc, r) in lp.iter_mut().zip(&f.frequency_response) {
                *acc += r * r;
            }
        }
        lp
    }
}

/// Unnormalised analytic Morlet: a Gaussian bump minus a scaled Gaussian at
/// DC so that the response vanishes at zero, and nothing at negative
/// frequencies. Written with `expm1` to avoid cancellation near DC.
fn morlet(nu: f64, xi: f64, sigma: f64) -> f64 {
    if nu <= 0.0 {
        return 0.0;
    }
    let s2 = sigma * sigma;
    let a = nu * xi / s2;
    if a > 1.0 {
        // the correction is at most exp(-1) of the bump here
        (-(nu - xi).powi(2) / (2.0 * s2)).exp() - (-(nu * nu + xi * xi) / (2.0 * s2)).exp()
    } else {
        (-(nu * nu + xi * xi) / (2.0 * s2)).exp() * a.exp_m1()
    }
}

/// Peak location of [`morlet`]; the DC correction pushes it above `xi`.
fn morlet_peak(xi: f64, sigma: f64) -> f64 {
    let (mut a, mut b) = (xi, xi + 3.0 * sigma);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..200 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if morlet(c, xi, sigma) >= morlet(d, xi, sigma) {
            b = d;
        } else {
            a = c;
        }
    }
    0.5 * (a + b)
}

/// (xi, sigma) pairs in cycles per sample, highest frequency first.
fn bank_layout(q: u32, sigma_phi: f64, cutoff_phi: f64) -> Vec<(f64, f64)> {
    let ratio = 2f64.powf(-1.0 / q as f64);
    let half_power = LN_2.sqrt();
    // sigma/xi such that neighbours cross at half power
    let width = (1.0 - ratio) / (1.0 + ratio) / half_power;
    let xi_max = (1.0 / (1.0 + 2f64.powf(3.0 / q as f64))).max(0.38);

    let mut out = Vec::new();
    let mut xi = xi_max;
    while width * xi >= sigma_phi && xi > cutoff_phi {
        out.push((xi, width * xi));
        xi *= ratio;
    }
    let lower_edge = match out.last() {
        Some(&(x, s)) => x - s * half_power,
        None => xi_max + width * xi_max * half_power,
    };
    let step = 2.0 * sigma_phi * half_power;
    let n_linear = ((lower_edge - cutoff_phi) / step - 1e-9).ceil().max(0.0) as usize;
    out.extend((0..n_linear).map(|i| (lower_edge - (i as f64 + 0.5) * step, sigma_phi)));
    out
}

fn build_bank(
    q: u32,
    sigma_phi: f64,
    cutoff_phi: f64,
    phi_sq: &[f64],
    fs: f64,
) -> Vec<WaveletFilter> {
    let p = phi_sq.len();
    let layout = bank_layout(q, sigma_phi, cutoff_phi);
    let mut responses: Vec<Vec<f64>> = layout
        .iter()
        .map(|&(xi, s)| (0..p).map(|k| morlet(bin_frequency(k, p), xi, s)).collect())
        .collect();

    // Largest common gain keeping |phi|^2 + gain^2 * sum|psi|^2 <= 1.
    let mut gain_sq = f64::INFINITY;
    for k in 0..p {
        let energy: f64 = responses.iter().map(|r| r[k] * r[k]).sum();
        if energy > 0.0 {
            let nu = bin_frequency(k, p);
            let room = -(-(nu * nu) / (sigma_phi * sigma_phi)).exp_m1();
            debug_assert!((room - (1.0 - phi_sq[k])).abs() < 1e-9);
            gain_sq = gain_sq.min(room / energy);
        }
    }
    let gain = if gain_sq.is_finite() { gain_sq.sqrt() } else { 1.0 };
    for r in &mut responses {
        r.iter_mut().for_each(|v| *v *= gain);
    }

    layout
        .into_iter()
        .zip(responses)
        .map(|((xi, s), response)| WaveletFilter {
            center_frequency_hz: morlet_peak(xi, s) * fs,
            bandwidth_hz: 2.0 * gaussian_half_width(s) * fs,
            sigma_hz: s * fs,
            frequency_response: response,
        })
        .collect()
}

/// Builds the scaling filter and both wavelet banks on the transform grid.
pub fn build_filter_banks(config: &ScatteringConfig) -> Result<FilterBankSet> {
    config.validate()?;
    let fs = config.sample_rate_hz;
    let p = config.transform_length();
    let sigma_phi = phi_sigma(config);
    let cutoff_phi = sigma_phi * LN_2.sqrt();
    if cutoff_phi >= 0.5 {
        return Err(Error::param(format!(
            "invariance scale {} s is too short for a {fs} Hz sample rate",
            config.invariance_scale_s
        )));
    }

    let phi_resp: Vec<f64> = (0..p)
        .map(|k| {
            let nu = bin_frequency(k, p);
            (-(nu * nu) / (2.0 * sigma_phi * sigma_phi)).exp()
        })
        .collect();
    let phi_sq: Vec<f64> = phi_resp.iter().map(|v| v * v).collect();

    let bank1 = build_bank(config.q_first, sigma_phi, cutoff_phi, &phi_sq, fs);
    let bank2 = if config.max_order >= 2 {
        build_bank(config.q_second, sigma_phi, cutoff_phi, &phi_sq, fs)
    } else {
        Vec::new()
    };

    Ok(FilterBankSet {
        phi: ScalingFilter {
            cutoff_hz: cutoff_phi * fs,
            sigma_hz: sigma_phi * fs,
            frequency_response: phi_resp,
        },
        bank1,
        bank2,
        config: config.clone(),
    })
}

/// Standard deviation of the scaling filter's response, cycles per sample.
pub(crate) fn phi_sigma(config: &ScatteringConfig) -> f64 {
    let t_samples = config.invariance_scale_s * config.sample_rate_hz;
    1.0 / (2.0 * PI * phi_sigma_time_samples(t_samples))
}

/// Decimation factor for low-passed outputs: the largest power of two that
/// keeps the rate at or above twice the scaling filter's effective band edge,
/// halved once for an oversampling factor of one.
pub(crate) fn lowpass_decimation(sigma_phi: f64) -> usize {
    let critical = (1.0 / (2.0 * gaussian_half_width(sigma_phi))).max(1.0);
    let k = 1usize << (critical.log2().floor() as u32);
    (k / 2).max(1)
}
