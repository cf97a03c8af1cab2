//! Truncated bivariate power series and the weighted Hilbert-space norms on them.
//!
//! Coefficients are stored densely in graded order: degree `d` occupies the
//! block `(d,0), (d-1,1), ..., (0,d)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quad::gauss_legendre_on;

/// Space index `alpha` and complex dimension `n` (always 2 in this crate, but
/// the weight formula keeps it symbolic).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpaceParams {
    pub alpha: f64,
    pub dimension: u32,
}

impl SpaceParams {
    pub fn new(alpha: f64) -> Self {
        SpaceParams { alpha, dimension: 2 }
    }

    pub fn with_alpha(&self, alpha: f64) -> Self {
        SpaceParams { alpha, ..*self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MultiIndex {
    pub k1: usize,
    pub k2: usize,
}

impl MultiIndex {
    pub const fn new(k1: usize, k2: usize) -> Self {
        MultiIndex { k1, k2 }
    }

    pub const fn total(&self) -> usize {
        self.k1 + self.k2
    }

    /// `k1! k2!` as a float (overflows to infinity past 170).
    pub fn factorial(&self) -> f64 {
        ln_factorial(self.k1).exp() * ln_factorial(self.k2).exp()
    }

    pub(crate) fn graded_index(&self) -> usize {
        let d = self.total();
        d * (d + 1) / 2 + self.k2
    }
}

fn ln_factorial(n: usize) -> f64 {
    if n <= 20 {
        (2..=n).fold(1.0f64, |acc, i| acc * i as f64).ln()
    } else {
        (2..=n).map(|i| (i as f64).ln()).sum()
    }
}

/// Squared norm of `z^k`: `(n+|k|)^alpha * k! (n-1)! / (n-1+|k|)!`.
///
/// With `alpha = 0` this is the Hardy-space norm `∫|ζ^k|² dσ` for the
/// normalized surface measure.
pub fn monomial_weight(k: MultiIndex, sp: SpaceParams) -> f64 {
    let n = sp.dimension as usize;
    let t = k.total();
    let ln = ln_factorial(k.k1) + ln_factorial(k.k2) + ln_factorial(n - 1) - ln_factorial(n - 1 + t);
    ((n + t) as f64).powf(sp.alpha) * ln.exp()
}

/// Weights for every stored index of a degree-`degree` series, in storage order.
pub fn weight_table(sp: SpaceParams, degree: usize) -> Vec<f64> {
    let n = sp.dimension as usize;
    let mut lnf = Vec::with_capacity(degree + n + 1);
    let mut acc = 0.0;
    lnf.push(0.0);
    for i in 1..=(degree + n) {
        acc += (i as f64).ln();
        lnf.push(acc);
    }
    let mut out = Vec::with_capacity(PowerSeries::len_for(degree));
    for d in 0..=degree {
        let radial = ((n + d) as f64).powf(sp.alpha);
        for k2 in 0..=d {
            let k1 = d - k2;
            out.push(radial * (lnf[k1] + lnf[k2] + lnf[n - 1] - lnf[n - 1 + d]).exp());
        }
    }
    out
}

/// A bivariate power series truncated at total degree `degree`.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerSeries {
    degree: usize,
    coeffs: Vec<Complex64>,
}

impl PowerSeries {
    pub const fn len_for(degree: usize) -> usize {
        (degree + 1) * (degree + 2) / 2
    }

    pub fn zeros(degree: usize) -> Self {
        PowerSeries {
            degree,
            coeffs: vec![Complex64::new(0.0, 0.0); Self::len_for(degree)],
        }
    }

    pub fn constant(c: Complex64, degree: usize) -> Self {
        let mut s = Self::zeros(degree);
        s.coeffs[0] = c;
        s
    }

    pub fn one(degree: usize) -> Self {
        Self::constant(Complex64::new(1.0, 0.0), degree)
    }

    /// `c z1^k1 z2^k2`, or zero if `k1 + k2 > degree`.
    pub fn monomial(k1: usize, k2: usize, c: Complex64, degree: usize) -> Self {
        let mut s = Self::zeros(degree);
        s.set(MultiIndex::new(k1, k2), c);
        s
    }

    /// Builds a series from `(k1, k2, coefficient)` triples; repeated indices add.
    pub fn from_terms(degree: usize, terms: &[(usize, usize, Complex64)]) -> Self {
        let mut s = Self::zeros(degree);
        for &(k1, k2, c) in terms {
            let k = MultiIndex::new(k1, k2);
            if k.total() <= degree {
                s.coeffs[k.graded_index()] += c;
            }
        }
        s
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn get(&self, k: MultiIndex) -> Complex64 {
        if k.total() > self.degree {
            Complex64::new(0.0, 0.0)
        } else {
            self.coeffs[k.graded_index()]
        }
    }

    /// Sets a coefficient; indices above the truncation degree are ignored.
    pub fn set(&mut self, k: MultiIndex, c: Complex64) {
        if k.total() <= self.degree {
            self.coeffs[k.graded_index()] = c;
        }
    }

    /// Iterates `(k, a_k)` in graded order.
    pub fn iter(&self) -> impl Iterator<Item = (MultiIndex, Complex64)> + '_ {
        (0..=self.degree)
            .flat_map(|d| (0..=d).map(move |k2| MultiIndex::new(d - k2, k2)))
            .zip(self.coeffs.iter().copied())
    }

    /// Re-truncates (or zero-extends) to a new degree.
    pub fn with_degree(&self, degree: usize) -> Self {
        let mut s = Self::zeros(degree);
        let n = Self::len_for(degree.min(self.degree));
        s.coeffs[..n].copy_from_slice(&self.coeffs[..n]);
        s
    }

    pub fn add(&self, other: &PowerSeries) -> Self {
        let mut s = self.with_degree(self.degree.max(other.degree));
        for (a, b) in s.coeffs.iter_mut().zip(&other.coeffs) {
            *a += b;
        }
        s
    }

    pub fn sub(&self, other: &PowerSeries) -> Self {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    pub fn scale(&self, c: Complex64) -> Self {
        PowerSeries {
            degree: self.degree,
            coeffs: self.coeffs.iter().map(|a| a * c).collect(),
        }
    }

    /// Largest coefficient modulus.
    pub fn sup_coeff(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Applies `R^order`: `a_k -> |k|^order a_k`.
    pub fn radial_derivative(&self, order: u32) -> Self {
        let mut s = self.clone();
        for d in 0..=self.degree {
            let f = (d as f64).powi(order as i32);
            let start = d * (d + 1) / 2;
            for c in &mut s.coeffs[start..=start + d] {
                *c *= f;
            }
        }
        s
    }

    /// `f_r(z) = f(r z)`.
    pub fn dilate(&self, r: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&r) {
            return Err(Error::BadRadius(r));
        }
        let mut s = self.clone();
        let mut rp = 1.0;
        for d in 0..=self.degree {
            let start = d * (d + 1) / 2;
            for c in &mut s.coeffs[start..=start + d] {
                *c *= rp;
            }
            rp *= r;
        }
        Ok(s)
    }

    /// Cauchy product truncated at `out_degree`.
    pub fn multiply(&self, other: &PowerSeries, out_degree: usize) -> Self {
        let mut out = Self::zeros(out_degree);
        for (i, a) in self.iter() {
            if a == Complex64::new(0.0, 0.0) || i.total() > out_degree {
                continue;
            }
            let room = out_degree - i.total();
            for (j, b) in other.iter() {
                if j.total() > room {
                    break;
                }
                let k = MultiIndex::new(i.k1 + j.k1, i.k2 + j.k2);
                out.coeffs[k.graded_index()] += a * b;
            }
        }
        out
    }

    /// Multiplicative inverse up to `out_degree`, layer by layer:
    /// `h_k = -(1/a_0) Σ_{0 < j <= k} a_j h_{k-j}`.
    pub fn reciprocal(&self, out_degree: usize) -> Result<Self> {
        let a0 = self.coeffs[0];
        if a0 == Complex64::new(0.0, 0.0) {
            return Err(Error::NonInvertibleSeries);
        }
        let inv = a0.inv();
        let mut h = Self::zeros(out_degree);
        h.coeffs[0] = inv;
        for d in 1..=out_degree {
            for k2 in 0..=d {
                let k1 = d - k2;
                let mut acc = Complex64::new(0.0, 0.0);
                for j2 in 0..=k2 {
                    for j1 in 0..=k1 {
                        let jd = j1 + j2;
                        if jd == 0 || jd > self.degree {
                            continue;
                        }
                        let a = self.coeffs[MultiIndex::new(j1, j2).graded_index()];
                        acc += a * h.coeffs[MultiIndex::new(k1 - j1, k2 - j2).graded_index()];
                    }
                }
                h.coeffs[MultiIndex::new(k1, k2).graded_index()] = -acc * inv;
            }
        }
        Ok(h)
    }

    /// `exp(f)` up to `out_degree`, from `R F = F R f`:
    /// `|k| F_k = Σ_{0 < i <= k} |i| f_i F_{k-i}`.
    pub fn exp(&self, out_degree: usize) -> Self {
        let mut out = Self::zeros(out_degree);
        out.coeffs[0] = self.coeffs[0].exp();
        for d in 1..=out_degree {
            for k2 in 0..=d {
                let k1 = d - k2;
                let mut acc = Complex64::new(0.0, 0.0);
                for i2 in 0..=k2 {
                    for i1 in 0..=k1 {
                        let id = i1 + i2;
                        if id == 0 || id > self.degree {
                            continue;
                        }
                        let a = self.coeffs[MultiIndex::new(i1, i2).graded_index()];
                        acc += a * (id as f64) * out.coeffs[MultiIndex::new(k1 - i1, k2 - i2).graded_index()];
                    }
                }
                out.coeffs[MultiIndex::new(k1, k2).graded_index()] = acc / d as f64;
            }
        }
        out
    }

    /// Evaluates at a point of the closed ball.
    pub fn evaluate(&self, z1: Complex64, z2: Complex64) -> Result<Complex64> {
        let n = (z1.norm_sqr() + z2.norm_sqr()).sqrt();
        if !(n <= 1.0 + 1e-12) {
            return Err(Error::OutsideBall(n));
        }
        Ok(self.evaluate_unchecked(z1, z2))
    }

    /// Evaluation without the ball check (the polynomial is entire).
    pub fn evaluate_unchecked(&self, z1: Complex64, z2: Complex64) -> Complex64 {
        let mut p1 = Vec::with_capacity(self.degree + 1);
        let mut p2 = Vec::with_capacity(self.degree + 1);
        let (mut a, mut b) = (Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0));
        for _ in 0..=self.degree {
            p1.push(a);
            p2.push(b);
            a *= z1;
            b *= z2;
        }
        self.iter().fold(Complex64::new(0.0, 0.0), |acc, (k, c)| acc + c * p1[k.k1] * p2[k.k2])
    }

    pub fn dalpha_norm(&self, sp: SpaceParams) -> f64 {
        let w = weight_table(sp, self.degree);
        self.coeffs
            .iter()
            .zip(&w)
            .map(|(c, w)| w * c.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// `Σ ω_k a_k conj(b_k)`.
    pub fn dalpha_inner(&self, other: &PowerSeries, sp: SpaceParams) -> Complex64 {
        let deg = self.degree.min(other.degree);
        let w = weight_table(sp, deg);
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .zip(&w)
            .map(|((a, b), w)| a * b.conj() * *w)
            .sum()
    }

    /// Weighted Bergman norm `(∫ (1-|z|²)^{-(alpha+1)} |f|² dv)^{1/2}` for
    /// `alpha < 0`, by tensor quadrature.
    ///
    /// Polar coordinates `z = √s ζ`, `ζ = (√u e^{iθ1}, √(1-u) e^{iθ2})` give
    /// `dv = ¼ s ds du dθ1 dθ2`. Gauss–Legendre with `nodes` points runs in the
    /// radial variable (after `v = (1-s)^{β+1}` to absorb a singular weight) and in
    /// `u`; the angles use `2 nodes + 1` trapezoid points, which is exact for
    /// degree below `nodes`.
    pub fn bergman_norm_quadrature(&self, sp: SpaceParams, nodes: usize) -> Result<f64> {
        if !(sp.alpha < 0.0) {
            return Err(Error::BergmanAlpha(sp.alpha));
        }
        let nodes = nodes.max(2);
        let beta = -(sp.alpha + 1.0);
        let radial: Vec<(f64, f64)> = if beta >= 0.0 {
            gauss_legendre_on(nodes, 0.0, 1.0)
                .into_iter()
                .map(|(s, w)| (s, w * (1.0 - s).powf(beta)))
                .collect()
        } else {
            // ∫ (1-s)^β g(s) ds = 1/(β+1) ∫_0^1 g(1 - v^{1/(β+1)}) dv
            let p = 1.0 / (beta + 1.0);
            gauss_legendre_on(nodes, 0.0, 1.0)
                .into_iter()
                .map(|(v, w)| (1.0 - v.powf(p), w * p))
                .collect()
        };
        let unodes = gauss_legendre_on(nodes, 0.0, 1.0);
        let m = 2 * nodes + 1;
        let tw: Vec<Complex64> = (0..m).map(|j| Complex64::from_polar(1.0, 2.0 * PI * j as f64 / m as f64)).collect();
        let deg = self.degree;
        let mut g = vec![Complex64::new(0.0, 0.0); deg + 1];
        let mut total = 0.0;
        for &(s, ws) in &radial {
            let rho = s.max(0.0).sqrt();
            for &(u, wu) in &unodes {
                let r1 = rho * u.sqrt();
                let r2 = rho * (1.0 - u).sqrt();
                let mut torus = 0.0;
                for j2 in 0..m {
                    // g[k1] = Σ_{k2} a_{k1,k2} r2^{k2} e^{i k2 θ2}
                    g.iter_mut().for_each(|x| *x = Complex64::new(0.0, 0.0));
                    for (k, c) in self.iter() {
                        g[k.k1] += c * r2.powi(k.k2 as i32) * tw[(k.k2 * j2) % m];
                    }
                    for j1 in 0..m {
                        let mut v = Complex64::new(0.0, 0.0);
                        let mut rp = 1.0;
                        for (k1, gk) in g.iter().enumerate() {
                            v += gk * rp * tw[(k1 * j1) % m];
                            rp *= r1;
                        }
                        torus += v.norm_sqr();
                    }
                }
                let ang = torus * (2.0 * PI / m as f64).powi(2);
                total += ws * s * wu * 0.25 * ang;
            }
        }
        Ok(total.sqrt())
    }

    /// Coefficients of a function holomorphic near the closed polydisc of
    /// radius `rho`, from a `grid x grid` discrete Fourier average on the
    /// polytorus, rescaled by `rho^{-|k|}`.
    pub fn coefficients_from_evaluator<F>(eval: F, degree: usize, rho: f64, grid: usize) -> Result<Self>
    where
        F: Fn(Complex64, Complex64) -> Complex64,
    {
        if !(rho > 0.0 && rho < 1.0) {
            return Err(Error::BadRadius(rho));
        }
        if grid < 2 * (degree + 1) || !grid.is_multiple_of(2) {
            return Err(Error::Invalid(format!(
                "grid must be even and at least {}, got {grid}",
                2 * (degree + 1)
            )));
        }
        let tw: Vec<Complex64> = (0..grid)
            .map(|j| Complex64::from_polar(1.0, 2.0 * PI * j as f64 / grid as f64))
            .collect();
        let pts: Vec<Complex64> = tw.iter().map(|t| t * rho).collect();
        // partial[j1][k2] = Σ_{j2} v(j1,j2) e^{-2πi k2 j2 / grid}
        let mut partial = vec![Complex64::new(0.0, 0.0); grid * (degree + 1)];
        let mut row = vec![Complex64::new(0.0, 0.0); grid];
        for j1 in 0..grid {
            for (j2, slot) in row.iter_mut().enumerate() {
                *slot = eval(pts[j1], pts[j2]);
            }
            for k2 in 0..=degree {
                let mut acc = Complex64::new(0.0, 0.0);
                for (j2, v) in row.iter().enumerate() {
                    acc += v * tw[(k2 * j2) % grid].conj();
                }
                partial[j1 * (degree + 1) + k2] = acc;
            }
        }
        let norm = (grid * grid) as f64;
        let mut out = Self::zeros(degree);
        let mut rp = vec![1.0; degree + 1];
        for d in 1..=degree {
            rp[d] = rp[d - 1] / rho;
        }
        for d in 0..=degree {
            for k2 in 0..=d {
                let k1 = d - k2;
                let mut acc = Complex64::new(0.0, 0.0);
                for j1 in 0..grid {
                    acc += partial[j1 * (degree + 1) + k2] * tw[(k1 * j1) % grid].conj();
                }
                out.coeffs[MultiIndex::new(k1, k2).graded_index()] = acc * (rp[d] / norm);
            }
        }
        Ok(out)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("series serialization cannot fail")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Invalid(e.to_string()))
    }
}

#[derive(Serialize, Deserialize)]
struct Entry {
    k1: usize,
    k2: usize,
    re: f64,
    im: f64,
}

#[derive(Serialize, Deserialize)]
struct SeriesRepr {
    degree: usize,
    entries: Vec<Entry>,
}

impl Serialize for PowerSeries {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        let entries = self
            .iter()
            .filter(|(_, c)| *c != Complex64::new(0.0, 0.0))
            .map(|(k, c)| Entry {
                k1: k.k1,
                k2: k.k2,
                re: c.re,
                im: c.im,
            })
            .collect();
        SeriesRepr {
            degree: self.degree,
            entries,
        }
        .serialize(ser)
    }
}

impl<'de> Deserialize<'de> for PowerSeries {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let repr = SeriesRepr::deserialize(de)?;
        let mut s = PowerSeries::zeros(repr.degree);
        for e in repr.entries {
            if e.k1 + e.k2 > repr.degree {
                return Err(serde::de::Error::custom(format!(
                    "entry ({}, {}) exceeds degree {}",
                    e.k1, e.k2, repr.degree
                )));
            }
            s.set(MultiIndex::new(e.k1, e.k2), Complex64::new(e.re, e.im));
        }
        Ok(s)
    }
}
