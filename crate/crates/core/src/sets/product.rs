use serde::{Deserialize, Serialize};
use std::collections::HashSet;

use super::IntervalSet;
use crate::error::{Error, Result};
use crate::fit::{linear_fit, LineFit};
use crate::geometry::{BallPoint, BoundarySampler, CurveChart};

/// `{(e^{is} cos x, sin x) : s ∈ base, x ∈ x_range}`, realized by sampling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProductBoundarySet {
    pub base: IntervalSet,
    pub x_range: (f64, f64),
    /// Samples per unit length in each parameter.
    pub resolution: usize,
}

impl ProductBoundarySet {
    pub fn new(base: IntervalSet, x_range: (f64, f64), resolution: usize) -> Result<Self> {
        if !(x_range.0 <= x_range.1 && x_range.0 >= -0.5 && x_range.1 <= 0.5) {
            return Err(Error::Invalid(format!("x range {x_range:?} must lie in [-1/2, 1/2]")));
        }
        Ok(ProductBoundarySet {
            base,
            x_range,
            resolution: resolution.max(1),
        })
    }

    fn x_samples(&self, resolution: usize) -> Vec<f64> {
        let (a, b) = self.x_range;
        if b == a {
            return vec![a];
        }
        let n = ((b - a) * resolution as f64).ceil().max(1.0) as usize;
        (0..=n).map(|i| a + (b - a) * i as f64 / n as f64).collect()
    }

    /// Sampled `(s, x)` parameter pairs.
    pub fn parameters(&self) -> Vec<(f64, f64)> {
        let ss = self.base.sample_parameters(1.0 / self.resolution as f64);
        let xs = self.x_samples(self.resolution);
        ss.iter().flat_map(|&s| xs.iter().map(move |&x| (s, x))).collect()
    }

    pub fn points(&self) -> Vec<BallPoint> {
        self.sample(self.resolution)
    }

    /// Minimal parameter distance `max(|s - s'|, |x - x'|)`-free shortcut
    /// used by band checks: distance from `(s, x)` to the parameter set.
    pub fn parameter_distance(&self, s: f64, x: f64) -> f64 {
        let dx = if x < self.x_range.0 {
            self.x_range.0 - x
        } else if x > self.x_range.1 {
            x - self.x_range.1
        } else {
            0.0
        };
        self.base.distance(s).hypot(dx)
    }
}

impl BoundarySampler for ProductBoundarySet {
    fn sample(&self, resolution: usize) -> Vec<BallPoint> {
        let ss = self.base.sample_parameters(1.0 / resolution.max(1) as f64);
        let xs = self.x_samples(resolution.max(1));
        ss.iter()
            .flat_map(|&s| xs.iter().map(move |&x| CurveChart::MsFamily.point_unchecked(&[s, x])))
            .collect()
    }
}

/// Number of occupied cubes of side `eps` in R^4, with the grid shifted by
/// `offset * eps` in every coordinate.
pub fn box_count(points: &[BallPoint], eps: f64, offset: f64) -> usize {
    let mut boxes = HashSet::with_capacity(points.len());
    for p in points {
        let key = [p.z1.re, p.z1.im, p.z2.re, p.z2.im].map(|c| ((c / eps) + offset).floor() as i64);
        boxes.insert(key);
    }
    boxes.len()
}

/// Box-counting dimension: slope of `log N(eps)` against `log(1/eps)` over
/// the given scales, each count averaged (geometrically) over four grid
/// offsets.
pub fn box_dimension(points: &[BallPoint], scales: &[f64]) -> Result<LineFit> {
    if scales.len() < 2 {
        return Err(Error::DegenerateGrid("need at least two box scales".into()));
    }
    let xs: Vec<f64> = scales.iter().map(|e| (1.0 / e).ln()).collect();
    let ys: Vec<f64> = scales
        .iter()
        .map(|&e| [0.0, 0.25, 0.5, 0.75].iter().map(|&o| (box_count(points, e, o) as f64).ln()).sum::<f64>() / 4.0)
        .collect();
    linear_fit(&xs, &ys).ok_or_else(|| Error::DegenerateGrid("box fit".into()))
}
