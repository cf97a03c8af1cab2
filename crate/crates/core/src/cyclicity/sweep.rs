use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fit::{loglog_fit, LineFit};
use crate::series::{PowerSeries, SpaceParams};

use super::multiplier::sphere_samples;

/// Radii, space index and truncation degree of a dilation sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DilationSweep {
    pub r_grid: Vec<f64>,
    pub alpha: f64,
    pub degree: usize,
}

impl DilationSweep {
    pub fn new(r_grid: Vec<f64>, alpha: f64, degree: usize) -> Result<Self> {
        if r_grid.is_empty() || r_grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::DegenerateGrid("radii must be strictly increasing".into()));
        }
        if !(r_grid[0] > 0.0 && r_grid[r_grid.len() - 1] < 1.0) {
            return Err(Error::DegenerateGrid("radii must lie in (0, 1)".into()));
        }
        if degree < 2 {
            return Err(Error::Invalid("truncation degree must be at least 2".into()));
        }
        Ok(DilationSweep { r_grid, alpha, degree })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub r: f64,
    /// `‖f/f_r‖_α`.
    pub quotient_norm: f64,
    /// `‖R(f/f_r)‖_{α-2}`.
    pub derivative_norm: f64,
    /// The same two norms at half the truncation degree.
    pub coarse_quotient_norm: f64,
    pub coarse_derivative_norm: f64,
    /// Degree `N` and `N/2` agree within 5%.
    pub stable: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub alpha: f64,
    pub degree: usize,
    pub rows: Vec<SweepRow>,
    /// Slope of `log ‖R(f/f_r)‖_{α-2}` against `log 1/(1-r)`; absent when a
    /// norm vanishes.
    pub slope: Option<LineFit>,
    pub truncation_stable: bool,
    /// Smallest `|f|` seen on a seeded sample of the ball of radius
    /// `max r`. Nonvanishing is only sampled, never proven.
    pub min_abs_sampled: f64,
}

impl SweepReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("r,quotient_norm,derivative_norm,coarse_quotient_norm,coarse_derivative_norm,stable\n");
        for w in &self.rows {
            s.push_str(&format!(
                "{},{:e},{:e},{:e},{:e},{}\n",
                w.r, w.quotient_norm, w.derivative_norm, w.coarse_quotient_norm, w.coarse_derivative_norm, w.stable
            ));
        }
        s
    }
}

fn norms(f: &PowerSeries, r: f64, n: usize, alpha: f64) -> Result<(f64, f64)> {
    let f = f.with_degree(n);
    let q = f.multiply(&f.dilate(r)?.reciprocal(n)?, n);
    Ok((
        q.dalpha_norm(SpaceParams::new(alpha)),
        q.radial_derivative(1).dalpha_norm(SpaceParams::new(alpha - 2.0)),
    ))
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 0.05 * a.abs().max(b.abs()) || a.max(b) < 1e-300
}

/// `‖f/f_r‖_α` and `‖R(f/f_r)‖_{α-2}` across the radii, with `f/f_r` formed
/// by series reciprocal and product at the truncation degree.
pub fn quotient_norm_sweep(f: &PowerSeries, sweep: &DilationSweep) -> Result<SweepReport> {
    if f.get(crate::series::MultiIndex::new(0, 0)).norm() == 0.0 {
        return Err(Error::NonInvertibleSeries);
    }
    let n = sweep.degree;
    let rows = sweep
        .r_grid
        .par_iter()
        .map(|&r| {
            let (qn, dn) = norms(f, r, n, sweep.alpha)?;
            let (cq, cd) = norms(f, r, n / 2, sweep.alpha)?;
            Ok(SweepRow {
                r,
                quotient_norm: qn,
                derivative_norm: dn,
                coarse_quotient_norm: cq,
                coarse_derivative_norm: cd,
                stable: close(qn, cq) && close(dn, cd),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let xs: Vec<f64> = rows.iter().map(|w| 1.0 / (1.0 - w.r)).collect();
    let ys: Vec<f64> = rows.iter().map(|w| w.derivative_norm).collect();
    let slope = if rows.len() >= 2 { loglog_fit(&xs, &ys) } else { None };

    let r_max = sweep.r_grid[sweep.r_grid.len() - 1];
    let fn_ = f.with_degree(n);
    let min_abs_sampled = sphere_samples(256, 0)
        .iter()
        .flat_map(|p| [0.25, 0.5, 0.75, 1.0].map(|s| p.scale(s * r_max)))
        .chain(std::iter::once(crate::geometry::BallPoint::ORIGIN))
        .map(|z| fn_.evaluate_unchecked(z.z1, z.z2).norm())
        .fold(f64::INFINITY, f64::min);
    Ok(SweepReport {
        alpha: sweep.alpha,
        degree: n,
        truncation_stable: rows.iter().all(|w| w.stable),
        rows,
        slope,
        min_abs_sampled,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn constant_function() {
        let sw = DilationSweep::new(vec![0.5, 0.9, 0.99], 0.7, 20).unwrap();
        let r = quotient_norm_sweep(&PowerSeries::constant(c(3.0), 0), &sw).unwrap();
        for w in &r.rows {
            assert!((w.quotient_norm - 2f64.powf(0.35)).abs() < 1e-14);
            assert_eq!(w.derivative_norm, 0.0);
        }
        assert!(r.slope.is_none() && r.truncation_stable);
    }

    #[test]
    fn smooth_nonvanishing_function_is_flat() {
        let f = PowerSeries::from_terms(1, &[(0, 0, c(1.0)), (1, 0, c(-0.5))]);
        let sw = DilationSweep::new(vec![0.9, 0.95, 0.98, 0.99, 0.995, 0.999], 1.0, 120).unwrap();
        let r = quotient_norm_sweep(&f, &sw).unwrap();
        let s = r.slope.unwrap().slope;
        assert!(s <= 0.1, "{r:?}");
        assert!(r.truncation_stable);
        assert!(r.rows.iter().all(|w| w.quotient_norm < 10.0));
        assert!(r.min_abs_sampled >= 1.0 - 0.5 * 0.999 && r.min_abs_sampled < 0.6);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(DilationSweep::new(vec![0.5, 0.4], 0.0, 10).is_err());
        assert!(DilationSweep::new(vec![0.5, 1.0], 0.0, 10).is_err());
        let sw = DilationSweep::new(vec![0.5], 0.0, 10).unwrap();
        let f = PowerSeries::monomial(1, 0, c(1.0), 1);
        assert_eq!(quotient_norm_sweep(&f, &sw), Err(Error::NonInvertibleSeries));
    }
}
