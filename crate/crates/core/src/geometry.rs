//! Korányi geometry of the unit sphere in C^2 and the model boundary curves.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::fit::{logspace, loglog_fit, LineFit};

const BALL_SLACK: f64 = 1e-12;

/// A point of the closed unit ball of C^2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BallPoint {
    pub z1: Complex64,
    pub z2: Complex64,
}

impl BallPoint {
    pub fn new(z1: Complex64, z2: Complex64) -> Result<Self> {
        let p = BallPoint { z1, z2 };
        let n = p.norm_sqr();
        if !(n <= 1.0 + BALL_SLACK) {
            return Err(Error::OutsideBall(n.sqrt()));
        }
        Ok(p)
    }

    /// Builds a point without the ball check (used for polydisc samples).
    pub const fn new_unchecked(z1: Complex64, z2: Complex64) -> Self {
        BallPoint { z1, z2 }
    }

    pub fn real(x1: f64, x2: f64) -> Result<Self> {
        Self::new(Complex64::new(x1, 0.0), Complex64::new(x2, 0.0))
    }

    pub const ORIGIN: BallPoint = BallPoint::new_unchecked(Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));

    pub fn norm_sqr(&self) -> f64 {
        self.z1.norm_sqr() + self.z2.norm_sqr()
    }

    /// Hermitian product `z1 conj(w1) + z2 conj(w2)`.
    pub fn inner(&self, w: &BallPoint) -> Complex64 {
        self.z1 * w.z1.conj() + self.z2 * w.z2.conj()
    }

    pub fn scale(&self, r: f64) -> BallPoint {
        BallPoint::new_unchecked(self.z1 * r, self.z2 * r)
    }

    pub fn sub(&self, w: &BallPoint) -> [Complex64; 2] {
        [self.z1 - w.z1, self.z2 - w.z2]
    }

    pub fn euclidean_distance(&self, w: &BallPoint) -> f64 {
        let [a, b] = self.sub(w);
        (a.norm_sqr() + b.norm_sqr()).sqrt()
    }
}

/// Korányi pseudodistance `|1 - <z, w>|`.
pub fn koranyi_distance(z: &BallPoint, w: &BallPoint) -> f64 {
    (Complex64::new(1.0, 0.0) - z.inner(w)).norm()
}

/// The closed-form model charts on the sphere.
///
/// * `TransversalCircle`: `s -> (e^{is}, 0)`
/// * `CtangentialCircle`: `t -> (cos t, sin t)`
/// * `MsFamily`: `(s, x) -> (e^{is} cos x, sin x)`; for fixed `s` the curve
///   `x -> (e^{is} cos x, sin x)` is complex tangential and meets the
///   transversal circle at `x = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveChart {
    TransversalCircle,
    CtangentialCircle,
    MsFamily,
}

impl CurveChart {
    pub fn dimension(&self) -> usize {
        match self {
            CurveChart::MsFamily => 2,
            _ => 1,
        }
    }

    /// Box of admissible parameters, one closed interval per coordinate.
    pub fn domain(&self) -> Vec<(f64, f64)> {
        match self {
            CurveChart::TransversalCircle | CurveChart::CtangentialCircle => vec![(-2.0 * PI, 2.0 * PI)],
            CurveChart::MsFamily => vec![(-2.0 * PI, 2.0 * PI), (-PI, PI)],
        }
    }

    pub fn point(&self, params: &[f64]) -> Result<BallPoint> {
        let dom = self.domain();
        if params.len() != dom.len() {
            return Err(Error::Invalid(format!(
                "chart {self:?} takes {} parameters, got {}",
                dom.len(),
                params.len()
            )));
        }
        for (p, (lo, hi)) in params.iter().zip(&dom) {
            if !(*p >= *lo && *p <= *hi) {
                return Err(Error::OutOfDomain(*p));
            }
        }
        Ok(self.point_unchecked(params))
    }

    pub(crate) fn point_unchecked(&self, params: &[f64]) -> BallPoint {
        match self {
            CurveChart::TransversalCircle => {
                BallPoint::new_unchecked(Complex64::from_polar(1.0, params[0]), Complex64::new(0.0, 0.0))
            }
            CurveChart::CtangentialCircle => BallPoint::new_unchecked(
                Complex64::new(params[0].cos(), 0.0),
                Complex64::new(params[0].sin(), 0.0),
            ),
            CurveChart::MsFamily => {
                let (s, x) = (params[0], params[1]);
                BallPoint::new_unchecked(Complex64::from_polar(x.cos(), s), Complex64::new(x.sin(), 0.0))
            }
        }
    }

    /// Central-difference tangent vector along parameter `which`.
    pub fn tangent(&self, params: &[f64], which: usize) -> [Complex64; 2] {
        let h = 1e-5;
        let mut p = params.to_vec();
        p[which] += h;
        let a = self.point_unchecked(&p);
        p[which] -= 2.0 * h;
        let b = self.point_unchecked(&p);
        let [d1, d2] = a.sub(&b);
        [d1 / (2.0 * h), d2 / (2.0 * h)]
    }
}

/// `<v, zeta>` for a tangent vector `v` at the sphere point `zeta`; zero means
/// `v` lies in the complex tangent space.
pub fn complex_normal_component(v: &[Complex64; 2], zeta: &BallPoint) -> Complex64 {
    v[0] * zeta.z1.conj() + v[1] * zeta.z2.conj()
}

/// Minimum Korányi distance from `z` to a finite sample.
pub fn koranyi_dist_to_points(z: &BallPoint, points: &[BallPoint]) -> Result<f64> {
    points
        .iter()
        .map(|w| koranyi_distance(z, w))
        .fold(None, |acc: Option<f64>, d| Some(acc.map_or(d, |a| a.min(d))))
        .ok_or(Error::EmptySet)
}

/// A boundary set that can be sampled at any resolution.
pub trait BoundarySampler {
    /// Sample points; larger `resolution` means a finer sample.
    fn sample(&self, resolution: usize) -> Vec<BallPoint>;
}

impl BoundarySampler for Vec<BallPoint> {
    fn sample(&self, _resolution: usize) -> Vec<BallPoint> {
        self.clone()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SetDistance {
    pub value: f64,
    /// Resolution of the sample that produced `value`.
    pub resolution: usize,
    /// Whether doubling changed the value by less than 1%.
    pub converged: bool,
}

/// Korányi distance from `z` to a sampled set, doubling the resolution until
/// the value changes by less than 1%.
pub fn koranyi_dist_to_set<S: BoundarySampler + ?Sized>(
    z: &BallPoint,
    set: &S,
    initial_resolution: usize,
    max_resolution: usize,
) -> Result<SetDistance> {
    let mut res = initial_resolution.max(1);
    let mut prev = koranyi_dist_to_points(z, &set.sample(res))?;
    while res < max_resolution {
        let next_res = (res * 2).min(max_resolution);
        let next = koranyi_dist_to_points(z, &set.sample(next_res))?;
        let change = (next - prev).abs();
        res = next_res;
        if change <= 0.01 * prev.max(next) {
            return Ok(SetDistance {
                value: next,
                resolution: res,
                converged: true,
            });
        }
        prev = next;
    }
    Ok(SetDistance {
        value: prev,
        resolution: res,
        converged: false,
    })
}

/// Fits `log d_K(gamma(p), gamma(p + u))` against `log u` for
/// `u in [1e-4, 1e-1]`. For `MsFamily` the transversal parameter is held at
/// `s = 0.7` and `x` varies.
pub fn distance_exponent_check(chart: CurveChart) -> Result<LineFit> {
    let us = logspace(1e-4, 1e-1, 31);
    let base: Vec<f64> = match chart {
        CurveChart::MsFamily => vec![0.7, 0.0],
        _ => vec![0.5],
    };
    let last = base.len() - 1;
    let z = chart.point(&base)?;
    let mut ds = Vec::with_capacity(us.len());
    for &u in &us {
        let mut p = base.clone();
        p[last] += u;
        ds.push(koranyi_distance(&z, &chart.point(&p)?));
    }
    loglog_fit(&us, &ds).ok_or_else(|| Error::DegenerateGrid("distance fit".into()))
}
