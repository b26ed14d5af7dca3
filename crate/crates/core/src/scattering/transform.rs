use std::collections::BTreeMap;
use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use super::filters::{lowpass_decimation, phi_sigma};
use super::paths::{enumerate_paths, feature_vector, FeatureVector, ScatteringPath};
use super::{FilterBankSet, ScatteringConfig};
use crate::error::{Error, Result};
use crate::signal::Signal;

type C64 = Complex<f64>;

/// Low-passed outputs per order, and optionally the modulus sequences that
/// fed them, all cropped back to the input extent.
///
/// `s0` is `f * phi` and carries the sign of the input; every other
/// sequence is non-negative.
#[derive(Debug, Clone)]
pub struct ScatteringResult {
    pub s0: Vec<f64>,
    pub s1: BTreeMap<ScatteringPath, Vec<f64>>,
    pub s2: BTreeMap<ScatteringPath, Vec<f64>>,
    pub u1: BTreeMap<ScatteringPath, Vec<f64>>,
    pub u2: BTreeMap<ScatteringPath, Vec<f64>>,
    pub config: ScatteringConfig,
}

/// Filter banks, admissible paths and FFT plans, reusable across signals and
/// threads.
pub struct ScatteringNetwork {
    banks: FilterBankSet,
    paths: Vec<ScatteringPath>,
    decimation: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    inverse_small: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for ScatteringNetwork {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ScatteringNetwork")
            .field("config", &self.banks.config)
            .field("paths", &self.paths.len())
            .field("decimation", &self.decimation)
            .finish()
    }
}

fn reflect(i: isize, len: usize) -> usize {
    let period = 2 * len as isize;
    let m = i.rem_euclid(period) as usize;
    if m < len {
        m
    } else {
        2 * len - 1 - m
    }
}

impl ScatteringNetwork {
    pub fn new(banks: FilterBankSet) -> Result<Self> {
        banks.config.validate()?;
        let p = banks.transform_length();
        if p != banks.config.transform_length()
            || banks
                .bank1
                .iter()
                .chain(&banks.bank2)
                .any(|w| w.frequency_response.len() != p)
        {
            return Err(Error::param("filter responses do not match the configured transform length"));
        }
        let paths = enumerate_paths(&banks);
        let decimation = lowpass_decimation(phi_sigma(&banks.config));
        if !p.is_multiple_of(decimation) {
            return Err(Error::param("transform length is not a multiple of the decimation factor"));
        }
        let mut planner = FftPlanner::new();
        Ok(Self {
            forward: planner.plan_fft_forward(p),
            inverse: planner.plan_fft_inverse(p),
            inverse_small: planner.plan_fft_inverse(p / decimation),
            banks,
            paths,
            decimation,
        })
    }

    pub fn banks(&self) -> &FilterBankSet {
        &self.banks
    }

    pub fn paths(&self) -> &[ScatteringPath] {
        &self.paths
    }

    /// Output sample spacing of the S sequences, in input samples.
    pub fn decimation(&self) -> usize {
        self.decimation
    }

    /// Runs the full cascade. Modulus sequences are returned only when
    /// `keep_modulus` is set.
    pub fn transform(&self, signal: &Signal, keep_modulus: bool) -> Result<ScatteringResult> {
        let cfg = &self.banks.config;
        if signal.sample_rate_hz() != cfg.sample_rate_hz {
            return Err(Error::param(format!(
                "signal sampled at {} Hz but the filter banks expect {} Hz",
                signal.sample_rate_hz(),
                cfg.sample_rate_hz
            )));
        }
        let len = signal.len();
        if len > cfg.signal_length {
            return Err(Error::param(format!(
                "signal has {len} samples, more than the configured {}",
                cfg.signal_length
            )));
        }
        let p = self.banks.transform_length();
        let offset = (p - len) / 2;
        let x = signal.samples();
        let mut spectrum: Vec<C64> = (0..p)
            .map(|k| C64::new(x[reflect(k as isize - offset as isize, len)], 0.0))
            .collect();
        self.forward.process(&mut spectrum);

        let crop = |v: Vec<f64>| v[offset..offset + len].to_vec();
        let (lo, hi) = self.decimated_range(offset, len);

        let mut result = ScatteringResult {
            s0: self.lowpass(&spectrum, lo, hi, false),
            s1: BTreeMap::new(),
            s2: BTreeMap::new(),
            u1: BTreeMap::new(),
            u2: BTreeMap::new(),
            config: cfg.clone(),
        };

        let u1: Vec<Vec<f64>> = self
            .banks
            .bank1
            .iter()
            .map(|w| self.modulus(&spectrum, &w.frequency_response))
            .collect();
        let u1_spec = self.forward_real(&u1);
        for (j1, spec) in u1_spec.iter().enumerate() {
            result.s1.insert(ScatteringPath::first(j1), self.lowpass(spec, lo, hi, true));
        }
        if keep_modulus {
            for (j1, u) in u1.into_iter().enumerate() {
                result.u1.insert(ScatteringPath::first(j1), crop(u));
            }
        }

        let second: Vec<ScatteringPath> = self.paths.iter().filter(|p| p.order == 2).copied().collect();
        for pair in second.chunks(2) {
            let u2: Vec<Vec<f64>> = pair
                .iter()
                .map(|p| {
                    let (j1, j2) = (p.j1.unwrap_or(0), p.j2.unwrap_or(0));
                    self.modulus(&u1_spec[j1], &self.banks.bank2[j2].frequency_response)
                })
                .collect();
            let u2_spec = self.forward_real(&u2);
            for ((path, spec), u) in pair.iter().zip(&u2_spec).zip(u2) {
                result.s2.insert(*path, self.lowpass(spec, lo, hi, true));
                if keep_modulus {
                    result.u2.insert(*path, crop(u));
                }
            }
        }
        Ok(result)
    }

    /// Time-averaged features in path order, without keeping modulus sequences.
    pub fn features(&self, signal: &Signal) -> Result<FeatureVector> {
        let result = self.transform(signal, false)?;
        feature_vector(&result, &self.paths)
    }

    /// Indices of decimated samples whose position falls inside the input.
    fn decimated_range(&self, offset: usize, len: usize) -> (usize, usize) {
        let k = self.decimation;
        let lo = offset.div_ceil(k);
        let hi = (offset + len).div_ceil(k);
        if hi > lo {
            (lo, hi)
        } else {
            let mid = (offset + len / 2) / k;
            (mid, mid + 1)
        }
    }

    /// Spectra of real sequences, two per complex FFT: with `z = a + i b`,
    /// `A[k] = (Z[k] + conj Z[-k]) / 2` and `B[k] = (Z[k] - conj Z[-k]) / 2i`.
    fn forward_real(&self, seqs: &[Vec<f64>]) -> Vec<Vec<C64>> {
        let mut out = Vec::with_capacity(seqs.len());
        for pair in seqs.chunks(2) {
            let mut z: Vec<C64> = match pair {
                [a, b] => a.iter().zip(b).map(|(&x, &y)| C64::new(x, y)).collect(),
                _ => pair[0].iter().map(|&x| C64::new(x, 0.0)).collect(),
            };
            self.forward.process(&mut z);
            if pair.len() == 1 {
                out.push(z);
                continue;
            }
            let p = z.len();
            let (mut a, mut b) = (Vec::with_capacity(p), Vec::with_capacity(p));
            for k in 0..p {
                let (zk, zc) = (z[k], z[(p - k) % p].conj());
                a.push((zk + zc) * 0.5);
                b.push((zk - zc) * C64::new(0.0, -0.5));
            }
            out.push(a);
            out.push(b);
        }
        out
    }

    /// `|ifft(spectrum * response)|` on the full padded grid.
    fn modulus(&self, spectrum: &[C64], response: &[f64]) -> Vec<f64> {
        let p = spectrum.len();
        let mut buf: Vec<C64> = spectrum.iter().zip(response).map(|(s, r)| s * *r).collect();
        self.inverse.process(&mut buf);
        let scale = 1.0 / p as f64;
        buf.iter().map(|c| c.norm() * scale).collect()
    }

    /// Low-pass by phi and decimate by folding the spectrum, keeping output
    /// samples `lo..hi`.
    fn lowpass(&self, spectrum: &[C64], lo: usize, hi: usize, non_negative: bool) -> Vec<f64> {
        let p = spectrum.len();
        let m = p / self.decimation;
        let phi = &self.banks.phi.frequency_response;
        let mut folded = vec![C64::new(0.0, 0.0); m];
        for (k, (s, r)) in spectrum.iter().zip(phi).enumerate() {
            folded[k % m] += s * *r;
        }
        self.inverse_small.process(&mut folded);
        let scale = 1.0 / p as f64;
        folded[lo..hi]
            .iter()
            .map(|c| {
                let v = c.re * scale;
                if non_negative {
                    v.max(0.0)
                } else {
                    v
                }
            })
            .collect()
    }
}

/// One-shot transform that keeps all intermediate modulus sequences.
pub fn scattering_transform(signal: &Signal, banks: &FilterBankSet) -> Result<ScatteringResult> {
    ScatteringNetwork::new(banks.clone())?.transform(signal, true)
}
