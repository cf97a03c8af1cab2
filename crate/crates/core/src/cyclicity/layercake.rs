use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quad::{integrate, QuadOptions};
use crate::sets::{Ambient, IntervalSet};

/// Both sides of `∫_𝕋 φ(dist(ζ, E)) |dζ| = ∫₀^π |φ'(t)| |E_t| dt + 2π φ(π)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LayerCake {
    pub lhs: f64,
    pub rhs: f64,
}

impl LayerCake {
    pub fn relative_gap(&self) -> f64 {
        (self.lhs - self.rhs).abs() / self.lhs.abs().max(self.rhs.abs()).max(f64::MIN_POSITIVE)
    }
}

/// `points` are angles of a finite set on the unit circle; `phi` must be
/// positive and decreasing on `[0, π]` with derivative `dphi`.
pub fn layer_cake_check(points: &[f64], phi: &dyn Fn(f64) -> f64, dphi: &dyn Fn(f64) -> f64) -> Result<LayerCake> {
    if points.is_empty() {
        return Err(Error::EmptySet);
    }
    for i in 0..=1000 {
        let t = PI * i as f64 / 1000.0;
        let dv = dphi(t);
        if dv > 0.0 {
            return Err(Error::NotDecreasing(dv, t));
        }
        if !(phi(t) > 0.0) {
            return Err(Error::Invalid(format!("phi({t}) is not positive")));
        }
    }
    let mut angles: Vec<f64> = points.iter().map(|p| p.rem_euclid(2.0 * PI)).collect();
    angles.sort_by(f64::total_cmp);
    angles.dedup();
    let e = IntervalSet::new(angles.iter().map(|&a| (a, a)).collect(), Ambient::Circle { period: 2.0 * PI })?;

    let opts = QuadOptions {
        rel_tol: 1e-13,
        ..QuadOptions::default()
    };
    let start = angles[0];
    let mut breaks = Vec::with_capacity(2 * angles.len() + 1);
    for (i, &a) in angles.iter().enumerate() {
        let next = angles.get(i + 1).copied().unwrap_or(start + 2.0 * PI);
        breaks.push(a);
        breaks.push(0.5 * (a + next));
    }
    breaks.push(start + 2.0 * PI);
    let lhs = integrate(|x| phi(e.distance(x)), &breaks, opts)?.value;

    let mut tb: Vec<f64> = e.gaps().iter().map(|g| 0.5 * g).filter(|&h| h < PI).collect();
    let wrap = 2.0 * PI - (angles[angles.len() - 1] - start);
    if 0.5 * wrap < PI {
        tb.push(0.5 * wrap);
    }
    tb.extend([0.0, PI]);
    tb.sort_by(f64::total_cmp);
    tb.dedup();
    let rhs = integrate(|t| dphi(t).abs() * e.neighborhood_measure(t), &tb, opts)?.value + 2.0 * PI * phi(PI);
    Ok(LayerCake { lhs, rhs })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_point() {
        let phi = |t: f64| (0.01 + t).powi(-2);
        let dphi = |t: f64| -2.0 * (0.01 + t).powi(-3);
        let r = layer_cake_check(&[0.0], &phi, &dphi).unwrap();
        assert!(r.relative_gap() < 1e-6, "{r:?}");
        // closed form: 2 ∫₀^π (0.01+t)^{-2} dt
        let exact = 2.0 * (1.0 / 0.01 - 1.0 / (0.01 + PI));
        assert!((r.lhs / exact - 1.0).abs() < 1e-9);
    }

    #[test]
    fn antipodal_linear_profile() {
        let phi = |t: f64| PI - t + 1.0;
        let r = layer_cake_check(&[0.0, PI], &phi, &|_| -1.0).unwrap();
        // dist runs over [0, π/2] four times
        let exact = 4.0 * ((PI + 1.0) * PI / 2.0 - PI * PI / 8.0);
        assert!((r.lhs - exact).abs() < 1e-9 * exact);
        assert!((r.rhs - exact).abs() < 1e-9 * exact);
    }

    #[test]
    fn constant_profile() {
        let r = layer_cake_check(&[0.3, 1.0, 4.0], &|_| 2.5, &|_| 0.0).unwrap();
        assert!((r.lhs - 5.0 * PI).abs() < 1e-12);
        assert!((r.rhs - 5.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn battery() {
        let sets: [&[f64]; 4] = [&[0.0], &[0.0, 0.1], &[0.5, 2.0, 2.2, 5.9], &[0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0]];
        let profiles: [(&dyn Fn(f64) -> f64, &dyn Fn(f64) -> f64); 3] = [
            (&|t: f64| (0.01 + t).powi(-2), &|t: f64| -2.0 * (0.01 + t).powi(-3)),
            (&|t: f64| (-t).exp(), &|t: f64| -(-t).exp()),
            (&|t: f64| (0.001 + t).powf(-0.5), &|t: f64| -0.5 * (0.001 + t).powf(-1.5)),
        ];
        for s in sets {
            for (phi, dphi) in profiles {
                let r = layer_cake_check(s, phi, dphi).unwrap();
                assert!(r.relative_gap() < 1e-6, "{s:?} {r:?}");
            }
        }
    }

    #[test]
    fn increasing_profile_rejected() {
        assert!(matches!(layer_cake_check(&[0.0], &|t| 1.0 + t, &|_| 1.0), Err(Error::NotDecreasing(..))));
    }
}
