use std::collections::VecDeque;

use super::savgol::savitzky_golay;
use crate::error::{Error, Result};
use crate::signal::Signal;

/// Morphological envelope settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeParams {
    dilation_window: usize,
    pub smooth_after: bool,
}

impl EnvelopeParams {
    pub fn new(dilation_window: usize, smooth_after: bool) -> Result<Self> {
        if dilation_window < 3 || dilation_window.is_multiple_of(2) {
            return Err(Error::param(format!(
                "dilation window must be odd and >= 3, got {dilation_window}"
            )));
        }
        Ok(Self {
            dilation_window,
            smooth_after,
        })
    }

    pub fn dilation_window(&self) -> usize {
        self.dilation_window
    }
}

impl Default for EnvelopeParams {
    /// 0.25 s at 2048 Hz, longer than one period of a 5 Hz fundamental.
    fn default() -> Self {
        Self {
            dilation_window: 513,
            smooth_after: false,
        }
    }
}

/// Centred running maximum; windows are truncated at the ends.
pub fn sliding_max(x: &[f64], window: usize) -> Vec<f64> {
    let half = window / 2;
    let n = x.len();
    let mut out = Vec::with_capacity(n);
    // indices with strictly decreasing values
    let mut dq: VecDeque<usize> = VecDeque::new();
    let mut next = 0;
    for i in 0..n {
        let hi = (i + half).min(n - 1);
        while next <= hi {
            while dq.back().is_some_and(|&b| x[b] <= x[next]) {
                dq.pop_back();
            }
            dq.push_back(next);
            next += 1;
        }
        let lo = i.saturating_sub(half);
        while dq.front().is_some_and(|&f| f < lo) {
            dq.pop_front();
        }
        out.push(x[*dq.front().expect("window is never empty")]);
    }
    out
}

/// Grey-scale dilation of the rectified signal, optionally followed by a
/// second-order Savitzky-Golay pass over the same window.
pub fn dilate_envelope(signal: &Signal, params: &EnvelopeParams) -> Result<Signal> {
    let w = params.dilation_window;
    if w > signal.len() {
        return Err(Error::param(format!(
            "dilation window {w} exceeds signal length {}",
            signal.len()
        )));
    }
    let rectified: Vec<f64> = signal.samples().iter().map(|v| v.abs()).collect();
    let env = signal.with_samples(sliding_max(&rectified, w))?;
    if params.smooth_after {
        savitzky_golay(&env, w, 2)
    } else {
        Ok(env)
    }
}
