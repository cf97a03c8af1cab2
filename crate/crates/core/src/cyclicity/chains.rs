use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::capacity::CapacityCase;
use crate::error::{Error, Result};
use crate::fit::{loglog_fit, logspace, LineFit};
use crate::quad::{integrate_log, QuadOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChainCase {
    Transversal,
    Ctangential,
    TotallyReal,
}

impl ChainCase {
    pub const ALL: [ChainCase; 3] = [ChainCase::Transversal, ChainCase::Ctangential, ChainCase::TotallyReal];

    /// Threshold predicted for a set of dimension `d`.
    pub fn predicted_alpha_c(&self, d: f64) -> f64 {
        match self {
            ChainCase::Transversal => 2.0 - d,
            ChainCase::Ctangential => 2.0 - d / 2.0,
            ChainCase::TotallyReal => 1.5 - d,
        }
    }

    /// Asymptotic exponent of `J(u)` as `u -> 0`.
    pub fn predicted_slope(&self, d: f64, alpha: f64) -> f64 {
        self.predicted_alpha_c(d) - alpha
    }

    pub fn capacity_case(&self) -> CapacityCase {
        match self {
            ChainCase::Transversal => CapacityCase::Transversal,
            ChainCase::Ctangential => CapacityCase::Ctangential,
            ChainCase::TotallyReal => CapacityCase::Product,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ChainCase::Transversal => "transversal",
            ChainCase::Ctangential => "ctangential",
            ChainCase::TotallyReal => "totally_real",
        }
    }
}

/// Fit window `[1e-6, 1e-2]`, four points per decade.
pub fn default_u_grid() -> Vec<f64> {
    logspace(1e-6, 1e-2, 17)
}

/// The reduced integral at `u = 1 - r`:
///
/// * transversal: `u² ∫₀^π t^{1-d} (u+t)^{-(α+2)} dt`
/// * complex tangential: `u² ∫₀^1 t^{2-d} (u+t²)^{-(α+3/2)} dt`
/// * totally real: `u² ∫₀^1 t^{1-d} (u+t)^{-(α+5/2)} dt`
pub fn chain_value(case: ChainCase, d: f64, alpha: f64, u: f64, rel_tol: f64) -> Result<f64> {
    if !(d > 0.0 && d < 1.0) && d != 0.0 {
        return Err(Error::Invalid(format!("dimension {d} outside [0, 1)")));
    }
    if !(u > 0.0 && u < 1.0) {
        return Err(Error::Invalid(format!("u = {u} outside (0, 1)")));
    }
    let opts = QuadOptions { rel_tol, ..QuadOptions::default() };
    // below t = a the integrand is t^m u^{-p} to relative accuracy 1e-12
    let (m, p, upper, scale) = match case {
        ChainCase::Transversal => (1.0 - d, alpha + 2.0, PI, u),
        ChainCase::Ctangential => (2.0 - d, alpha + 1.5, 1.0, u.sqrt()),
        ChainCase::TotallyReal => (1.0 - d, alpha + 2.5, 1.0, u),
    };
    let a = 1e-12 * scale;
    let head = a.powf(m + 1.0) / (m + 1.0) * u.powf(-p);
    let body = match case {
        ChainCase::Ctangential => integrate_log(|t| t.powf(m) * (u + t * t).powf(-p), a, upper, opts)?,
        _ => integrate_log(|t| t.powf(m) * (u + t).powf(-p), a, upper, opts)?,
    };
    Ok(u * u * (head + body.value))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainReport {
    pub case: ChainCase,
    pub d: f64,
    pub alpha: f64,
    pub u_grid: Vec<f64>,
    pub values: Vec<f64>,
    /// Least-squares line through `(log u, log J)`.
    pub fit: LineFit,
    pub predicted_slope: f64,
}

impl ChainReport {
    pub fn fitted_exponent(&self) -> f64 {
        self.fit.slope
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("u,J\n");
        for (u, j) in self.u_grid.iter().zip(&self.values) {
            s.push_str(&format!("{u:e},{j:e}\n"));
        }
        s
    }
}

pub fn chain_verify(case: ChainCase, d: f64, alpha: f64, u_grid: &[f64], rel_tol: f64) -> Result<ChainReport> {
    if u_grid.len() < 2 || u_grid.iter().any(|&u| !(1e-6 * (1.0 - 1e-9)..=1e-1 * (1.0 + 1e-9)).contains(&u)) {
        return Err(Error::DegenerateGrid("u grid must hold two points within [1e-6, 1e-1]".into()));
    }
    let values = u_grid
        .iter()
        .map(|&u| chain_value(case, d, alpha, u, rel_tol))
        .collect::<Result<Vec<_>>>()?;
    let fit = loglog_fit(u_grid, &values).ok_or_else(|| Error::DegenerateGrid("chain values not positive".into()))?;
    Ok(ChainReport {
        case,
        d,
        alpha,
        u_grid: u_grid.to_vec(),
        values,
        fit,
        predicted_slope: case.predicted_slope(d, alpha),
    })
}

/// The `alpha` at which the fitted exponent crosses zero, by bisection on
/// `[0, 3]`.
pub fn chain_critical_alpha(case: ChainCase, d: f64, u_grid: &[f64]) -> Result<f64> {
    let slope = |alpha: f64| chain_verify(case, d, alpha, u_grid, 1e-10).map(|r| r.fit.slope);
    let (mut lo, mut hi) = (0.0, 3.0);
    if !(slope(lo)? > 0.0 && slope(hi)? < 0.0) {
        return Err(Error::TooCoarse("fitted exponent does not change sign on [0, 3]".into()));
    }
    while hi - lo > 1e-5 {
        let mid = 0.5 * (lo + hi);
        if slope(mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
