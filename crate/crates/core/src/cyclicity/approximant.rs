use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{PowerSeries, SpaceParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApproximantReport {
    pub alpha: f64,
    /// `dist_D = ‖p_D f - 1‖_α` for `D = 0, ..., max_degree`.
    pub distances: Vec<f64>,
    /// Condition number of the (diagonally scaled) Gram matrix per degree.
    pub conditioning: Vec<f64>,
    /// Degrees at which diagonal jitter was added.
    pub jittered: Vec<usize>,
}

impl ApproximantReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("degree,dist,conditioning\n");
        for (d, (x, c)) in self.distances.iter().zip(&self.conditioning).enumerate() {
            s.push_str(&format!("{d},{x:e},{c:e}\n"));
        }
        s
    }
}

const JITTER_ABOVE: f64 = 1e12;

/// Distance in `D_α` from `1` to `{p f : deg p <= D}` for each `D`, from the
/// normal equations over the monomials `z^j`.
pub fn opt_approximant_distance(f: &PowerSeries, alpha: f64, max_degree: usize) -> Result<ApproximantReport> {
    let sp = SpaceParams::new(alpha);
    let work = f.degree() + max_degree;
    let f = f.with_degree(work);
    let basis: Vec<PowerSeries> = (0..=max_degree)
        .flat_map(|d| (0..=d).map(move |k2| (d - k2, k2)))
        .map(|(k1, k2)| PowerSeries::monomial(k1, k2, Complex64::new(1.0, 0.0), work).multiply(&f, work))
        .collect();
    let one = PowerSeries::one(work);
    let n = basis.len();
    let gram = DMatrix::from_fn(n, n, |j, k| basis[k].dalpha_inner(&basis[j], sp));
    let rhs = DVector::from_fn(n, |j, _| one.dalpha_inner(&basis[j], sp));

    let mut report = ApproximantReport {
        alpha,
        distances: Vec::with_capacity(max_degree + 1),
        conditioning: Vec::with_capacity(max_degree + 1),
        jittered: Vec::new(),
    };
    for d in 0..=max_degree {
        let m = (d + 1) * (d + 2) / 2;
        let diag: Vec<f64> = (0..m).map(|i| gram[(i, i)].re).collect();
        if diag.iter().any(|&g| !(g > 0.0)) {
            return Err(Error::SingularGram(f64::INFINITY));
        }
        let s: Vec<f64> = diag.iter().map(|g| 1.0 / g.sqrt()).collect();
        let mut g = DMatrix::from_fn(m, m, |i, j| gram[(i, j)] * (s[i] * s[j]));
        let eig = SymmetricEigen::new(g.clone()).eigenvalues;
        let (lo, hi) = eig.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &e| (lo.min(e), hi.max(e)));
        let cond = if lo > 0.0 { hi / lo } else { f64::INFINITY };
        if cond > JITTER_ABOVE {
            for i in 0..m {
                g[(i, i)] += Complex64::new(1e-12, 0.0);
            }
            report.jittered.push(d);
        }
        let chol = Cholesky::new(g).ok_or(Error::SingularGram(cond))?;
        let b = DVector::from_fn(m, |i, _| rhs[i] * s[i]);
        let c = chol.solve(&b);
        let mut approx = PowerSeries::zeros(work);
        for i in 0..m {
            approx = approx.add(&basis[i].scale(c[i] * s[i]));
        }
        report.distances.push(approx.sub(&one).dalpha_norm(sp));
        report.conditioning.push(cond);
    }
    Ok(report)
}
