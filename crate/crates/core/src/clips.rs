//! Hysteresis clip formation: group high-probability frames into temporally
//! coherent intervals with minimum-length filtering and context padding.

use crate::error::Error;
use crate::extractor::FrameProbabilities;

/// Inclusive 1-based frame interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Clip {
    pub start: usize,
    pub end: usize,
}

impl Clip {
    pub fn len(&self) -> usize {
        self.end - self.start + 1
    }

    pub fn contains(&self, t: usize) -> bool {
        (self.start..=self.end).contains(&t)
    }
}

/// Disjoint, start-ordered set of clips.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ClipSet {
    pub clips: Vec<Clip>,
}

impl ClipSet {
    pub fn len(&self) -> usize {
        self.clips.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clips.is_empty()
    }
}

/// Default clip-formation parameters: open at 0.65, close below 0.5, minimum
/// raw length 8, context padding 4.
pub const DEFAULT_TAU_HIGH: f64 = 0.65;
pub const DEFAULT_TAU_LOW: f64 = 0.5;
pub const DEFAULT_L_MIN: usize = 8;
pub const DEFAULT_PADDING: usize = 4;

/// Forward state-machine pass:
/// - a clip opens at the first t with p_t >= tau_high while inactive,
/// - closes at the last t before p drops below tau_low (a clip still active
///   at t = T closes at T),
/// - raw clips shorter than l_min are discarded,
/// - survivors are padded by `padding` and clamped to [1, T],
/// - padded clips that overlap or touch are merged.
pub fn hysteresis_clips(
    probs: &FrameProbabilities,
    tau_high: f64,
    tau_low: f64,
    l_min: usize,
    padding: usize,
) -> Result<ClipSet, Error> {
    if !(tau_low > 0.0 && tau_low <= tau_high && tau_high < 1.0) {
        return Err(Error::InvalidThresholds(format!(
            "need 0 < tau_low <= tau_high < 1, got {} / {}",
            tau_low, tau_high
        )));
    }
    if l_min < 1 {
        return Err(Error::InvalidThresholds("l_min must be >= 1".into()));
    }
    let t_max = probs.len();
    let mut raw: Vec<Clip> = Vec::new();
    let mut active_start: Option<usize> = None;
    for &(t, p) in &probs.entries {
        match active_start {
            None if p >= tau_high => active_start = Some(t),
            Some(start) if p < tau_low => {
                raw.push(Clip { start, end: t - 1 });
                active_start = None;
            }
            _ => {}
        }
    }
    if let Some(start) = active_start {
        raw.push(Clip { start, end: t_max });
    }

    let mut padded: Vec<Clip> = raw
        .into_iter()
        .filter(|c| c.len() >= l_min)
        .map(|c| Clip {
            start: c.start.saturating_sub(padding).max(1),
            end: (c.end + padding).min(t_max),
        })
        .collect();

    // merge overlapping or touching intervals
    padded.sort();
    let mut merged: Vec<Clip> = Vec::new();
    for c in padded {
        match merged.last_mut() {
            Some(last) if c.start <= last.end + 1 => last.end = last.end.max(c.end),
            _ => merged.push(c),
        }
    }
    Ok(ClipSet { clips: merged })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn run(p: &[f64], th: f64, tl: f64, lm: usize, pad: usize) -> ClipSet {
        hysteresis_clips(&FrameProbabilities::from_values(p), th, tl, lm, pad).unwrap()
    }

    #[test]
    fn never_activates_below_high_threshold() {
        let out = run(&[0.4; 10], 0.65, 0.5, 8, 4);
        assert!(out.is_empty());
    }

    #[test]
    fn end_of_sequence_closure() {
        let out = run(&[0.7; 10], 0.65, 0.5, 8, 0);
        assert_eq!(out.clips, vec![Clip { start: 1, end: 10 }]);
    }

    #[test]
    fn short_raw_clip_discarded() {
        let mut p = vec![0.3; 10];
        p[0] = 0.7;
        p[1] = 0.7;
        p[2] = 0.7;
        let out = run(&p, 0.65, 0.5, 8, 4);
        assert!(out.is_empty());
    }

    #[test]
    fn padding_clamps_to_bounds() {
        // raw clip [9,17] of length 9, P = 4 -> [5, 20] on T = 20
        let mut p = vec![0.1; 20];
        for t in 9..=17 {
            p[t - 1] = 0.8;
        }
        let out = run(&p, 0.65, 0.5, 8, 4);
        assert_eq!(out.clips, vec![Clip { start: 5, end: 20 }]);
    }

    #[test]
    fn threshold_ordering_enforced() {
        let probs = FrameProbabilities::from_values(&[0.5; 4]);
        assert!(hysteresis_clips(&probs, 0.3, 0.6, 1, 0).is_err());
        assert!(hysteresis_clips(&probs, 0.6, 0.3, 0, 0).is_err());
    }

    #[test]
    fn raw_interior_satisfies_low_threshold() {
        let p = vec![0.2, 0.9, 0.6, 0.55, 0.7, 0.3, 0.1, 0.9, 0.9, 0.9];
        let out = run(&p, 0.65, 0.5, 2, 0);
        for c in &out.clips {
            assert!(p[c.start - 1] >= 0.65);
            for t in c.start..=c.end {
                assert!(p[t - 1] >= 0.5);
            }
        }
    }

    // Brute-force oracle: enumerate maximal runs under the same
    // open/close/length/padding/merge rules, built from scratch rather than
    // via the incremental state machine.
    pub(crate) fn oracle(
        p: &[f64],
        tau_high: f64,
        tau_low: f64,
        l_min: usize,
        padding: usize,
    ) -> Vec<Clip> {
        let t_max = p.len();
        let mut raw = Vec::new();
        let mut t = 1usize;
        while t <= t_max {
            if p[t - 1] >= tau_high {
                // run extends while p >= tau_low
                let start = t;
                let mut end = t;
                while end < t_max && p[end] >= tau_low {
                    end += 1;
                }
                raw.push(Clip { start, end });
                t = end + 1;
            } else {
                t += 1;
            }
        }
        let mut padded: Vec<Clip> = raw
            .into_iter()
            .filter(|c| c.len() >= l_min)
            .map(|c| Clip {
                start: c.start.saturating_sub(padding).max(1),
                end: (c.end + padding).min(t_max),
            })
            .collect();
        padded.sort();
        let mut merged: Vec<Clip> = Vec::new();
        for c in padded {
            match merged.last_mut() {
                Some(last) if c.start <= last.end + 1 => last.end = last.end.max(c.end),
                _ => merged.push(c),
            }
        }
        merged
    }

    proptest! {
        #[test]
        fn matches_brute_force_oracle(
            p in proptest::collection::vec(0.0f64..1.0, 1..64),
            tl in 0.1f64..0.8,
            spread in 0.0f64..0.19,
            lm in 1usize..10,
            pad in 0usize..6,
        ) {
            let th = tl + spread;
            let got = run(&p, th, tl, lm, pad);
            let want = oracle(&p, th, tl, lm, pad);
            prop_assert_eq!(got.clips, want);
        }

        #[test]
        fn raising_tau_high_shrinks_openings(
            p in proptest::collection::vec(0.0f64..1.0, 1..64),
        ) {
            // a run that opens at 0.8 also opens at 0.6 and closes at the
            // same tau_low, so every high-threshold clip must sit inside
            // some low-threshold clip
            let lo = run(&p, 0.6, 0.5, 1, 0);
            let hi = run(&p, 0.8, 0.5, 1, 0);
            for c in &hi.clips {
                prop_assert!(
                    lo.clips.iter().any(|l| l.start <= c.start && c.end <= l.end),
                    "{:?} not contained in {:?}", c, lo.clips
                );
            }
        }

        #[test]
        fn merged_set_disjoint_sorted_bounded(
            p in proptest::collection::vec(0.0f64..1.0, 1..64),
            pad in 0usize..8,
        ) {
            let out = run(&p, 0.65, 0.5, 2, pad);
            let mut covered = 0usize;
            let mut prev_end = 0usize;
            for c in &out.clips {
                prop_assert!(c.start >= 1 && c.end <= p.len() && c.start <= c.end);
                prop_assert!(c.start > prev_end);
                prev_end = c.end;
                covered += c.len();
            }
            prop_assert!(covered <= p.len());
        }
    }
}
