//! Denoising, envelope detection and cycle segmentation of raw current
//! recordings.
//!
//! A recording is smoothed with a Savitzky-Golay filter, its rectified
//! amplitude is dilated into an envelope, and the envelope is compared against
//! a threshold (the envelope median by default). Contiguous supra-threshold
//! runs become motion cycles. Silent stretches fall below the threshold and
//! drop out without a separate pass.

mod envelope;
mod savgol;
mod segment;

pub use envelope::{dilate_envelope, sliding_max, EnvelopeParams};
pub use savgol::{savitzky_golay, savitzky_golay_weights};
pub use segment::{median, segment_cycles, CycleSegment, SegmentationParams, ThresholdMode};

use crate::error::Result;
use crate::signal::Signal;

pub const DEFAULT_SG_WINDOW: usize = 31;
pub const DEFAULT_SG_ORDER: usize = 3;

/// Smooth, build the envelope of the smoothed signal, then segment.
pub fn preprocess_pipeline(
    signal: &Signal,
    sg_window: usize,
    sg_order: usize,
    env: &EnvelopeParams,
    seg: &SegmentationParams,
) -> Result<Vec<CycleSegment>> {
    let smoothed = savitzky_golay(signal, sg_window, sg_order)?;
    let envelope = dilate_envelope(&smoothed, env)?;
    segment_cycles(&smoothed, &envelope, seg)
}
