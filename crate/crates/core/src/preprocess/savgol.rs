use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::signal::Signal;

/// Least-squares smoothing weights for one window.
///
/// `left` and `right` are the number of samples before and after the
/// evaluation point. The polynomial order is capped at `left + right` so that
/// short boundary windows stay well posed.
pub fn savitzky_golay_weights(left: usize, right: usize, poly_order: usize) -> Vec<f64> {
    let len = left + right + 1;
    let order = poly_order.min(len - 1);
    let scale = left.max(right).max(1) as f64;
    let vander = DMatrix::from_fn(len, order + 1, |j, k| {
        ((j as f64 - left as f64) / scale).powi(k as i32)
    });
    // Row 0 of the pseudo-inverse: solve R^T v = e0, then w = Q v.
    let qr = vander.qr();
    let mut e0 = DVector::zeros(order + 1);
    e0[0] = 1.0;
    let v = qr
        .r()
        .transpose()
        .solve_lower_triangular(&e0)
        .expect("Vandermonde matrix on distinct nodes has full column rank");
    (qr.q() * v).iter().copied().collect()
}

/// Savitzky-Golay smoothing.
///
/// Interior samples use the centred window. Near the edges the window is
/// truncated to the samples that exist and the fit is evaluated at the edge
/// sample itself.
pub fn savitzky_golay(signal: &Signal, window_length: usize, poly_order: usize) -> Result<Signal> {
    if window_length < 3 || window_length.is_multiple_of(2) {
        return Err(Error::param(format!(
            "Savitzky-Golay window must be odd and >= 3, got {window_length}"
        )));
    }
    if poly_order >= window_length {
        return Err(Error::param(format!(
            "polynomial order {poly_order} must be below the window length {window_length}"
        )));
    }
    let x = signal.samples();
    let n = x.len();
    if n < window_length {
        return Err(Error::param(format!(
            "signal of {n} samples is shorter than the window ({window_length})"
        )));
    }
    let half = window_length / 2;
    let centre = savitzky_golay_weights(half, half, poly_order);
    let mut out = vec![0.0; n];
    for i in half..n - half {
        let win = &x[i - half..=i + half];
        out[i] = centre.iter().zip(win).map(|(w, v)| w * v).sum();
    }
    for i in 0..half {
        // left edge: `i` samples before, `half` after; right edge mirrors it
        let w = savitzky_golay_weights(i, half, poly_order);
        out[i] = w.iter().zip(&x[..=i + half]).map(|(w, v)| w * v).sum();
        let j = n - 1 - i;
        out[j] = w
            .iter()
            .rev()
            .zip(&x[j - half..])
            .map(|(w, v)| w * v)
            .sum();
    }
    signal.with_samples(out)
}
