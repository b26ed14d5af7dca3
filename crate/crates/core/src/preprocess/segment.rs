use crate::error::{Error, Result};
use crate::signal::Signal;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ThresholdMode {
    /// Median of the envelope.
    Median,
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentationParams {
    pub threshold_mode: ThresholdMode,
    /// Runs shorter than this (after merging) are dropped.
    pub min_segment_len: usize,
    /// Runs separated by at most this many sub-threshold samples are joined.
    pub merge_gap: usize,
}

impl Default for SegmentationParams {
    fn default() -> Self {
        Self {
            threshold_mode: ThresholdMode::Median,
            min_segment_len: 1024,
            merge_gap: 256,
        }
    }
}

/// One detected motion cycle, with its position in the parent recording.
#[derive(Debug, Clone, PartialEq)]
pub struct CycleSegment {
    pub signal: Signal,
    pub start_index: usize,
    pub end_index: usize,
}

impl CycleSegment {
    pub fn len(&self) -> usize {
        self.end_index - self.start_index
    }

    pub fn is_empty(&self) -> bool {
        self.end_index == self.start_index
    }
}

/// Median with the mean of the two middle values for even counts.
pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Splits `signal` wherever `envelope` is strictly above the threshold.
pub fn segment_cycles(
    signal: &Signal,
    envelope: &Signal,
    params: &SegmentationParams,
) -> Result<Vec<CycleSegment>> {
    if signal.len() != envelope.len() {
        return Err(Error::DimensionMismatch {
            expected: signal.len(),
            actual: envelope.len(),
        });
    }
    if params.min_segment_len == 0 {
        return Err(Error::param("min_segment_len must be at least 1"));
    }
    let env = envelope.samples();
    let threshold = match params.threshold_mode {
        ThresholdMode::Median => median(env),
        ThresholdMode::Fixed(t) => t,
    };

    let mut runs: Vec<(usize, usize)> = Vec::new();
    let mut start = None;
    for (i, &v) in env.iter().enumerate() {
        match (v > threshold, start) {
            (true, None) => start = Some(i),
            (false, Some(s)) => {
                runs.push((s, i));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        runs.push((s, env.len()));
    }

    let mut merged: Vec<(usize, usize)> = Vec::with_capacity(runs.len());
    for run in runs {
        match merged.last_mut() {
            Some(last) if run.0 - last.1 <= params.merge_gap => last.1 = run.1,
            _ => merged.push(run),
        }
    }

    merged
        .into_iter()
        .filter(|(s, e)| e - s >= params.min_segment_len)
        .map(|(s, e)| {
            Ok(CycleSegment {
                signal: signal.slice(s, e)?,
                start_index: s,
                end_index: e,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sig(x: Vec<f64>) -> Signal {
        Signal::new(x, 2048.0).unwrap()
    }

    fn fixed(t: f64) -> SegmentationParams {
        SegmentationParams {
            threshold_mode: ThresholdMode::Fixed(t),
            min_segment_len: 1,
            merge_gap: 0,
        }
    }

    #[test]
    fn whole_signal_above_threshold() {
        let s = sig(vec![1.0; 20]);
        let segs = segment_cycles(&s, &s, &fixed(0.0)).unwrap();
        assert_eq!(segs.len(), 1);
        assert_eq!((segs[0].start_index, segs[0].end_index), (0, 20));
    }

    #[test]
    fn nothing_above_threshold() {
        let s = sig(vec![1.0; 20]);
        assert!(segment_cycles(&s, &s, &fixed(1.0)).unwrap().is_empty());
        assert!(segment_cycles(&s, &s, &fixed(5.0)).unwrap().is_empty());
    }

    #[test]
    fn length_mismatch() {
        assert!(segment_cycles(&sig(vec![1.0; 3]), &sig(vec![1.0; 4]), &fixed(0.0)).is_err());
    }

    #[test]
    fn merge_then_drop_short() {
        let env = sig(vec![0., 1., 1., 0., 1., 1., 0., 0., 0., 1., 0.]);
        let p = SegmentationParams {
            threshold_mode: ThresholdMode::Fixed(0.5),
            min_segment_len: 2,
            merge_gap: 1,
        };
        let segs = segment_cycles(&env, &env, &p).unwrap();
        let bounds: Vec<_> = segs.iter().map(|s| (s.start_index, s.end_index)).collect();
        assert_eq!(bounds, vec![(1, 6)]);
        assert_eq!(segs[0].signal.len(), 5);
    }

    #[test]
    fn bursts_recovered_at_known_indices() {
        // 10 bursts of 200 samples separated by 300 samples of silence
        let mut x = vec![0.0; 300];
        let mut truth = Vec::new();
        for _ in 0..10 {
            let s = x.len();
            x.extend((0..200).map(|i| ((i as f64) * 0.7).sin() * 2.0));
            truth.push((s, s + 200));
            x.extend(std::iter::repeat_n(0.0, 300));
        }
        let s = sig(x);
        let env = crate::preprocess::dilate_envelope(&s, &crate::preprocess::EnvelopeParams::new(9, false).unwrap()).unwrap();
        let p = SegmentationParams {
            threshold_mode: ThresholdMode::Median,
            min_segment_len: 50,
            merge_gap: 5,
        };
        let segs = segment_cycles(&s, &env, &p).unwrap();
        assert_eq!(segs.len(), 10);
        for (seg, (ts, te)) in segs.iter().zip(truth) {
            let peak = ts + 100;
            assert!(seg.start_index <= peak && peak < seg.end_index);
            assert!(seg.start_index + 5 >= ts && seg.end_index <= te + 5);
        }
    }

    #[test]
    fn median_even_and_odd() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
    }

    proptest! {
        #[test]
        fn sorted_disjoint_and_within_parent(
            env in prop::collection::vec(0.0f64..4.0, 1..300),
            min_len in 1usize..10,
            gap in 0usize..6,
        ) {
            let s = sig(env.clone());
            let p = SegmentationParams { threshold_mode: ThresholdMode::Median, min_segment_len: min_len, merge_gap: gap };
            let segs = segment_cycles(&s, &s, &p).unwrap();
            let mut prev_end = 0;
            let mut total = 0;
            for seg in &segs {
                prop_assert!(seg.start_index >= prev_end);
                prop_assert!(seg.end_index > seg.start_index);
                prop_assert!(seg.end_index <= env.len());
                prop_assert_eq!(seg.signal.len(), seg.end_index - seg.start_index);
                prev_end = seg.end_index;
                total += seg.len();
            }
            prop_assert!(total <= env.len());
        }

        #[test]
        fn median_threshold_is_scale_invariant(
            env in prop::collection::vec(0.0f64..4.0, 1..300),
            c in 0.01f64..100.0,
        ) {
            let p = SegmentationParams { threshold_mode: ThresholdMode::Median, min_segment_len: 3, merge_gap: 2 };
            let a = sig(env.clone());
            let b = sig(env.iter().map(|v| v * c).collect());
            let sa: Vec<_> = segment_cycles(&a, &a, &p).unwrap().iter().map(|s| (s.start_index, s.end_index)).collect();
            let sb: Vec<_> = segment_cycles(&b, &b, &p).unwrap().iter().map(|s| (s.start_index, s.end_index)).collect();
            prop_assert_eq!(sa, sb);
        }
    }
}
