use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sets::IntervalSet;

/// `f(x) = Σ_k φ_k(x)^{2+ε}` with `φ_k(x) = |I_k| φ((x - a_k)/|I_k|)` and
/// `φ(x) = x(1-x)`, one bump per gap `I_k = (a_k, b_k)` of `E` in `[0, 1]`.
///
/// A gap touching `0` or `1` without the endpoint belonging to `E` is treated
/// as half of its mirror-image gap, so the bump stays comparable to the
/// distance to `E` there as well.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BumpFunction {
    /// Bump supports `(a_k, b_k)`; edge gaps appear with their virtual extent.
    pub gaps: Vec<(f64, f64)>,
    pub epsilon: f64,
}

impl BumpFunction {
    pub fn new(e: &IntervalSet, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0) {
            return Err(Error::Invalid(format!("epsilon {epsilon} must be positive")));
        }
        let (lo, hi) = e.hull();
        if lo < 0.0 || hi > 1.0 {
            return Err(Error::Invalid("bump sums live on [0, 1]".into()));
        }
        let mut gaps = Vec::with_capacity(e.len() + 1);
        if lo > 0.0 {
            gaps.push((-lo, lo));
        }
        gaps.extend(e.intervals().windows(2).map(|w| (w[0].1, w[1].0)));
        if hi < 1.0 {
            gaps.push((hi, 2.0 - hi));
        }
        Ok(BumpFunction { gaps, epsilon })
    }

    pub fn eval(&self, x: f64) -> f64 {
        let i = self.gaps.partition_point(|g| g.1 <= x);
        match self.gaps.get(i) {
            Some(&(a, b)) if a < x => {
                let len = b - a;
                let u = (x - a) / len;
                (len * u * (1.0 - u)).powf(2.0 + self.epsilon)
            }
            _ => 0.0,
        }
    }
}
