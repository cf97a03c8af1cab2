use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Boundary modulus on the circle, optionally floored before taking logs.
pub struct OuterWeight<'a> {
    pub weight: &'a (dyn Fn(f64) -> f64 + Sync),
    pub floor: Option<f64>,
}

/// `exp((1/2π) ∫ (e^{iθ}+z)/(e^{iθ}-z) log w(θ) dθ)` by the `nodes`-point
/// midpoint rule `θ_j = 2π(j + 1/2)/nodes`.
pub fn outer_surrogate(w: &OuterWeight, z1: Complex64, nodes: usize) -> Result<Complex64> {
    if !(z1.norm() < 1.0) {
        return Err(Error::OutsideBall(z1.norm()));
    }
    if nodes == 0 {
        return Err(Error::Invalid("need at least one node".into()));
    }
    let h = 2.0 * PI / nodes as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..nodes {
        let theta = h * (j as f64 + 0.5);
        let mut v = (w.weight)(theta);
        if let Some(f) = w.floor {
            v = v.max(f);
        }
        if !(v > 0.0) {
            return Err(Error::ZeroWeight(theta));
        }
        let e = Complex64::from_polar(1.0, theta);
        acc += (e + z1) / (e - z1) * v.ln();
    }
    Ok((acc * (h / (2.0 * PI))).exp())
}
