//! Percentile intervals from nearest-rank order statistics.

use serde::Serialize;

use crate::error::{Error, Result};

pub const MIN_INTERVAL_SAMPLES: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Interval {
    pub level: f64,
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

/// 1-based nearest rank `ceil(q N)`, clamped to `1..=N`. Products within
/// `1e-9` of an integer count as that integer so that `0.95 × 100` is rank
/// 95 despite rounding.
pub fn nearest_rank(q: f64, len: usize) -> usize {
    let x = q * len as f64;
    let r = if (x - x.round()).abs() < 1e-9 { x.round() } else { x.ceil() };
    (r as usize).clamp(1, len)
}

/// The `(α/2, 1 - α/2)` nearest-rank quantiles with `α = 1 - level`.
pub fn percentile_interval(samples: &[f64], level: f64) -> Result<Interval> {
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::invalid(format!("interval level must lie in (0, 1), got {level}")));
    }
    if samples.len() < MIN_INTERVAL_SAMPLES {
        return Err(Error::TooFewSamples {
            required: MIN_INTERVAL_SAMPLES,
            actual: samples.len(),
        });
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let alpha = 1.0 - level;
    let n = sorted.len();
    Ok(Interval {
        level,
        lo: sorted[nearest_rank(alpha / 2.0, n) - 1],
        hi: sorted[nearest_rank(1.0 - alpha / 2.0, n) - 1],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_ranks() {
        let xs: Vec<f64> = (1..=100).map(f64::from).collect();
        let iv = percentile_interval(&xs, 0.9).unwrap();
        assert_eq!((iv.lo, iv.hi), (5.0, 95.0));
        let iv = percentile_interval(&xs, 0.95).unwrap();
        assert_eq!((iv.lo, iv.hi), (3.0, 98.0));
        let c = percentile_interval(&[2.5; 12], 0.8).unwrap();
        assert_eq!((c.lo, c.hi), (2.5, 2.5));
        assert!(percentile_interval(&xs, 0.0).is_err());
        assert!(percentile_interval(&xs, 1.0).is_err());
        assert!(matches!(percentile_interval(&xs[..9], 0.9), Err(Error::TooFewSamples { .. })));
    }
}
