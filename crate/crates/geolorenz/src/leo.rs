//! Covering (locally-eventually-onto) verification by interval iteration.
//!
//! An open seed interval is pushed forward through the map; any component
//! straddling the singular point splits into its two branch images. The
//! check succeeds at the first k for which the accumulated cover contains
//! the right half `(0, 1)` of the interval. Image endpoints are padded
//! inward by `PAD` so that a positive answer is conservative with respect
//! to rounding; failure at the iteration cap is inconclusive, not a
//! disproof.

use crate::error::{Error, Result};
use crate::map::IntervalMap;

/// Inward padding applied to computed image endpoints.
const PAD: f64 = 1e-14;

/// Cap on the number of disjoint components tracked per cover.
const MAX_COMPONENTS: usize = 10_000;

/// A union of disjoint open subintervals of `[-1, 1]`, sorted by position.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalCover {
    intervals: Vec<(f64, f64)>,
}

impl IntervalCover {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "degenerate interval ({lo}, {hi})"
            )));
        }
        Ok(Self {
            intervals: vec![(lo, hi)],
        })
    }

    fn from_raw(mut raw: Vec<(f64, f64)>) -> Self {
        raw.retain(|(a, b)| b > a);
        raw.sort_by(|p, q| p.0.partial_cmp(&q.0).unwrap());
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(raw.len());
        for (a, b) in raw {
            match merged.last_mut() {
                // Open intervals only merge across a genuine overlap.
                Some(last) if a < last.1 => last.1 = last.1.max(b),
                _ => merged.push((a, b)),
            }
        }
        if merged.len() > MAX_COMPONENTS {
            // Keep the longest components; dropping some only shrinks the
            // cover, so coverage claims stay conservative.
            merged.sort_by(|p, q| (q.1 - q.0).partial_cmp(&(p.1 - p.0)).unwrap());
            merged.truncate(MAX_COMPONENTS);
            merged.sort_by(|p, q| p.0.partial_cmp(&q.0).unwrap());
        }
        Self { intervals: merged }
    }

    pub fn components(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn total_length(&self) -> f64 {
        self.intervals.iter().map(|(a, b)| b - a).sum()
    }

    /// Whether one component contains the open interval `(lo, hi)`.
    pub fn contains_interval(&self, lo: f64, hi: f64) -> bool {
        self.intervals.iter().any(|(a, b)| *a <= lo && hi <= *b)
    }

    /// One image step: split components at 0 and push each piece through
    /// its branch.
    fn advance(&self, map: &impl IntervalMap) -> Result<Self> {
        let mut raw = Vec::with_capacity(self.intervals.len() + 4);
        for &(a, b) in &self.intervals {
            let pieces: [(f64, f64); 2] = if a < 0.0 && b > 0.0 {
                [(a, 0.0), (0.0, b)]
            } else {
                [(a, b), (0.0, 0.0)]
            };
            for (u, v) in pieces {
                if v <= u {
                    continue;
                }
                let (mut lo, mut hi) = map.interval_image(u, v)?;
                // Inward padding; exact one-sided limits stay exact.
                if u != 0.0 && v != 0.0 && hi - lo > 10.0 * PAD {
                    lo += PAD;
                    hi -= PAD;
                }
                raw.push((lo, hi));
            }
        }
        Ok(Self::from_raw(raw))
    }
}

/// Outcome of the covering iteration.
#[derive(Debug, Clone)]
pub enum LeoOutcome {
    /// `(0,1)` is covered after `k` steps.
    Covered { k: usize, cover: IntervalCover },
    /// Not covered within the cap; says nothing either way.
    Inconclusive { cover: IntervalCover },
}

impl LeoOutcome {
    pub fn covered_at(&self) -> Option<usize> {
        match self {
            LeoOutcome::Covered { k, .. } => Some(*k),
            LeoOutcome::Inconclusive { .. } => None,
        }
    }

    pub fn cover(&self) -> &IntervalCover {
        match self {
            LeoOutcome::Covered { cover, .. } | LeoOutcome::Inconclusive { cover } => cover,
        }
    }
}

/// Iterate the open seed `(u_lo, u_hi)` forward and report the smallest
/// `k >= 0` with `(0,1)` contained in the k-th image cover.
///
/// The seed must avoid the singular point. `k = 0` counts: a seed already
/// containing `(0,1)` is covered by definition.
pub fn check_leo(
    map: &impl IntervalMap,
    seed: (f64, f64),
    k_max: usize,
) -> Result<LeoOutcome> {
    let (u_lo, u_hi) = seed;
    if !(u_lo < u_hi) {
        return Err(Error::InvalidParameter(format!(
            "empty seed interval ({u_lo}, {u_hi})"
        )));
    }
    if u_lo < -1.0 || u_hi > 1.0 {
        return Err(Error::Domain(format!(
            "seed ({u_lo}, {u_hi}) exceeds [-1, 1]"
        )));
    }
    if u_lo < 0.0 && u_hi > 0.0 {
        return Err(Error::SingularPoint(0.0));
    }
    let mut cover = IntervalCover::new(u_lo, u_hi)?;
    for k in 0..=k_max {
        if cover.contains_interval(0.0, 1.0) {
            return Ok(LeoOutcome::Covered { k, cover });
        }
        if k == k_max {
            break;
        }
        cover = cover.advance(map)?;
    }
    Ok(LeoOutcome::Inconclusive { cover })
}
