use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::BallPoint;

/// Uniform points on the unit sphere of `ℂ²`.
pub fn sphere_samples(n: usize, seed: u64) -> Vec<BallPoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let v: [f64; 4] = std::array::from_fn(|_| StandardNormal.sample(&mut rng));
            let r = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            BallPoint::new_unchecked(Complex64::new(v[0] / r, v[1] / r), Complex64::new(v[2] / r, v[3] / r))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Bounded,
    Unbounded,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiplierReport {
    pub k: u32,
    pub deltas: Vec<f64>,
    /// `sup |R^k f|` over the samples on each shell `(1 - δ) ∂𝔹₂`.
    pub sups: Vec<f64>,
    pub verdict: Verdict,
}

const SHELLS: [f64; 4] = [1e-1, 1e-2, 1e-3, 1e-4];
const CONTOUR: usize = 32;

fn stirling2(k: u32) -> Vec<f64> {
    let k = k as usize;
    let mut s = vec![vec![0.0; k + 1]; k + 1];
    s[0][0] = 1.0;
    for n in 1..=k {
        for m in 1..=n {
            s[n][m] = m as f64 * s[n - 1][m] + s[n - 1][m - 1];
        }
    }
    s.pop().unwrap_or_default()
}

/// `R^k f(z)`: derivatives of `λ -> f(λ z)` at `λ = 1` from a Cauchy contour
/// of radius `ρ`, combined as `(λ d/dλ)^k = Σ_m S(k, m) λ^m (d/dλ)^m`.
fn radial_derivative_at(f: &(dyn Fn(&BallPoint) -> Complex64 + Sync), z: &BallPoint, rho: f64, stirling: &[f64]) -> Complex64 {
    let samples: Vec<(Complex64, Complex64)> = (0..CONTOUR)
        .map(|j| {
            let w = Complex64::from_polar(1.0, 2.0 * PI * j as f64 / CONTOUR as f64);
            let lam = 1.0 + rho * w;
            (w, f(&BallPoint::new_unchecked(lam * z.z1, lam * z.z2)))
        })
        .collect();
    let mut out = Complex64::new(0.0, 0.0);
    let mut fact = 1.0;
    for (m, &s) in stirling.iter().enumerate() {
        if m > 0 {
            fact *= m as f64;
        }
        if s == 0.0 {
            continue;
        }
        let sum: Complex64 = samples.iter().map(|(w, v)| v * w.powi(-(m as i32))).sum();
        out += s * fact / (CONTOUR as f64 * rho.powi(m as i32)) * sum;
    }
    out
}

/// Samples `|R^k f|` on the shells `δ ∈ {1e-1, ..., 1e-4}` over the given
/// sphere directions. Bounded when every shell sup is within a factor 2 of
/// the first; unbounded when the sups keep increasing past that factor.
pub fn multiplier_heuristic(f: &(dyn Fn(&BallPoint) -> Complex64 + Sync), k: u32, samples: &[BallPoint]) -> Result<MultiplierReport> {
    if k == 0 || k > 6 {
        return Err(Error::Invalid(format!("derivative order {k} outside 1..=6")));
    }
    if samples.is_empty() {
        return Err(Error::Invalid("no sample directions".into()));
    }
    let stirling = stirling2(k);
    let sups: Vec<f64> = SHELLS
        .iter()
        .map(|&delta| {
            let rho = 0.5 * delta;
            samples
                .iter()
                .map(|zeta| radial_derivative_at(f, &zeta.scale(1.0 - delta), rho, &stirling).norm())
                .fold(0.0, f64::max)
        })
        .collect();
    let first = sups[0];
    let verdict = if sups.iter().all(|&s| s <= 2.0 * first && s >= 0.5 * first) {
        Verdict::Bounded
    } else if sups.windows(2).all(|w| w[1] >= w[0]) && sups[sups.len() - 1] > 2.0 * first {
        Verdict::Unbounded
    } else {
        Verdict::Inconclusive
    };
    Ok(MultiplierReport {
        k,
        deltas: SHELLS.to_vec(),
        sups,
        verdict,
    })
}
