use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::BallPoint;
use crate::series::{MultiIndex, PowerSeries};
use crate::sets::{CantorSpec, IntervalSet};

/// `H(s, z) = 1 - e^{-2is} z1² - z2²`, which vanishes on the sphere exactly
/// on the circle `{(e^{is} cos x, sin x)}`.
pub fn surrogate_h(s: f64, z: &BallPoint) -> Complex64 {
    Complex64::new(1.0, 0.0) - Complex64::from_polar(1.0, -2.0 * s) * z.z1 * z.z1 - z.z2 * z.z2
}

/// Korányi distance from `z` to the circle `x -> (e^{is} cos x, sin x)`,
/// `x ∈ [-π, π]`: dense scan followed by golden-section refinement.
pub fn dist_to_ms(s: f64, z: &BallPoint) -> f64 {
    let a = z.z1 * Complex64::from_polar(1.0, -s);
    let b = z.z2;
    let g = |x: f64| (Complex64::new(1.0, 0.0) - a * x.cos() - b * x.sin()).norm();
    let n = 256;
    let h = 2.0 * PI / n as f64;
    let (mut best, mut bx) = (f64::INFINITY, 0.0);
    for i in 0..n {
        let x = -PI + h * i as f64;
        let v = g(x);
        if v < best {
            best = v;
            bx = x;
        }
    }
    let (mut lo, mut hi) = (bx - h, bx + h);
    let r = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..60 {
        let x1 = hi - r * (hi - lo);
        let x2 = lo + r * (hi - lo);
        if g(x1) < g(x2) {
            hi = x2;
        } else {
            lo = x1;
        }
    }
    best.min(g(0.5 * (lo + hi)))
}

/// One truncation level of `ψ`: scale `c_k = 2^{-k}` and the greedy cover.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsiLevel {
    pub k: u32,
    pub centers: Vec<f64>,
}

/// `ψ(z) = Σ_{k=1}^{K} Σ_j 2^{-k} / (2^{-k} + H(s_{jk}, z))`, where the
/// `s_{jk}` start the greedy cover of `Ẽ` by arcs of length `2^{-k}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsiSeries {
    pub levels: Vec<PsiLevel>,
    /// Parameters of the set the covers were built from.
    pub support: Vec<f64>,
    #[serde(skip)]
    rot: Vec<Vec<Complex64>>,
}

impl PsiSeries {
    pub fn from_set(e: &IntervalSet, k_max: u32) -> Result<Self> {
        if k_max == 0 {
            return Err(Error::Invalid("need at least one level".into()));
        }
        let levels: Vec<PsiLevel> = (1..=k_max)
            .map(|k| PsiLevel {
                k,
                centers: e.cover_starts(0.5f64.powi(k as i32)),
            })
            .collect();
        let support = e.intervals().iter().flat_map(|&(a, b)| if a == b { vec![a] } else { vec![a, b] }).collect();
        Ok(Self::with_levels(levels, support))
    }

    /// Uses the left endpoints of the depth-`depth` intervals as the set, so
    /// covers below the construction's resolution stay finite.
    pub fn from_cantor(spec: &CantorSpec, k_max: u32) -> Result<Self> {
        spec.validate()?;
        let pts: Vec<f64> = spec.level_intervals(spec.depth).into_iter().map(|iv| iv.0).collect();
        let e = IntervalSet::points(&pts, spec.base.0, spec.base.1)?;
        Self::from_set(&e, k_max)
    }

    fn with_levels(levels: Vec<PsiLevel>, support: Vec<f64>) -> Self {
        let rot = levels
            .iter()
            .map(|l| l.centers.iter().map(|&s| Complex64::from_polar(1.0, -2.0 * s)).collect())
            .collect();
        PsiSeries { levels, support, rot }
    }

    /// Restores the cached rotations after deserialization.
    pub fn rebuild(self) -> Self {
        Self::with_levels(self.levels, self.support)
    }

    pub fn k_max(&self) -> u32 {
        self.levels.len() as u32
    }

    /// Keeps the first `k` levels.
    pub fn truncated(&self, k: u32) -> Self {
        Self::with_levels(self.levels[..(k as usize).min(self.levels.len())].to_vec(), self.support.clone())
    }

    /// `N_k` for every level.
    pub fn counts(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.centers.len()).collect()
    }

    /// `Σ_{k >= k0} 2^{-k} N_k` over the stored levels.
    pub fn tail_sum(&self, k0: u32) -> f64 {
        self.levels
            .iter()
            .filter(|l| l.k >= k0)
            .map(|l| 0.5f64.powi(l.k as i32) * l.centers.len() as f64)
            .sum()
    }

    pub fn eval(&self, z: &BallPoint) -> Complex64 {
        let a = z.z1 * z.z1;
        let b = Complex64::new(1.0, 0.0) - z.z2 * z.z2;
        let mut total = Complex64::new(0.0, 0.0);
        for (l, rot) in self.levels.iter().zip(&self.rot) {
            let c = 0.5f64.powi(l.k as i32);
            let mut acc = Complex64::new(0.0, 0.0);
            for u in rot {
                acc += (b + c - u * a).inv();
            }
            total += acc * c;
        }
        total
    }

    /// `ψ`, its gradient and its Hessian in `(z1, z2)`.
    pub fn derivatives(&self, z: &BallPoint) -> (Complex64, [Complex64; 2], [[Complex64; 2]; 2]) {
        let zero = Complex64::new(0.0, 0.0);
        let (mut v, mut g, mut hs) = (zero, [zero; 2], [[zero; 2]; 2]);
        let a = z.z1 * z.z1;
        let b = Complex64::new(1.0, 0.0) - z.z2 * z.z2;
        for (l, rot) in self.levels.iter().zip(&self.rot) {
            let c = 0.5f64.powi(l.k as i32);
            for u in rot {
                let q = (b + c - u * a).inv();
                let dh = [-2.0 * u * z.z1, -2.0 * z.z2];
                let ddh = [[-2.0 * u, zero], [zero, Complex64::new(-2.0, 0.0)]];
                v += c * q;
                for i in 0..2 {
                    g[i] -= c * dh[i] * q * q;
                    for j in 0..2 {
                        hs[i][j] += 2.0 * c * dh[i] * dh[j] * q * q * q - c * ddh[i][j] * q * q;
                    }
                }
            }
        }
        (v, g, hs)
    }

    /// Korányi distance from `z` to the union of the circles `M_s` over the
    /// support.
    pub fn distance_to_support(&self, z: &BallPoint) -> f64 {
        self.support.iter().map(|&s| dist_to_ms(s, z)).fold(f64::INFINITY, f64::min)
    }

    /// Taylor coefficients up to total degree `degree`: the coefficient of
    /// `z1^{2a} z2^{2b}` is
    /// `Σ_k c_k binom(a+b, a) (1+c_k)^{-(a+b+1)} Σ_j e^{-2i a s_jk}`.
    pub fn taylor(&self, degree: usize) -> PowerSeries {
        let half = degree / 2;
        let mut out = PowerSeries::zeros(degree);
        for (l, rot) in self.levels.iter().zip(&self.rot) {
            let c = 0.5f64.powi(l.k as i32);
            let mut power_sums = vec![Complex64::new(0.0, 0.0); half + 1];
            for u in rot {
                let mut p = Complex64::new(1.0, 0.0);
                for ps in power_sums.iter_mut() {
                    *ps += p;
                    p *= u;
                }
            }
            for n in 0..=half {
                let scale = c * (1.0 + c).powi(-(n as i32 + 1));
                let mut binom = 1.0;
                for a in 0..=n {
                    let k = MultiIndex::new(2 * a, 2 * (n - a));
                    out.set(k, out.get(k) + power_sums[a] * (scale * binom));
                    binom = binom * (n - a) as f64 / (a + 1) as f64;
                }
            }
        }
        out
    }
}

/// `z -> exp(-β ψ(z))`.
pub fn f_exp(ps: &PsiSeries, beta: f64) -> Result<impl Fn(&BallPoint) -> Complex64 + '_> {
    if !(beta > 0.0) {
        return Err(Error::Invalid(format!("beta {beta} must be positive")));
    }
    Ok(move |z: &BallPoint| (-beta * ps.eval(z)).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivativeReport {
    /// `|D^β ψ(z)|`.
    pub derivative: f64,
    /// `d_K(z, E)` used for the scaling.
    pub distance: f64,
    /// `|D^β ψ(z)| d_K(z, E)^{|β|}`.
    pub scaled: f64,
}

/// `|D^β ψ(z)| d_K(z, E)^{|β|}` for `|β| ∈ {1, 2}`; `distance` is
/// `d_K(z, E)` (see [`PsiSeries::distance_to_support`]).
pub fn psi_derivative_bound(ps: &PsiSeries, z: &BallPoint, beta: [u32; 2], distance: f64) -> Result<DerivativeReport> {
    let order = beta[0] + beta[1];
    if !(1..=2).contains(&order) {
        return Err(Error::Invalid(format!("derivative order {order} must be 1 or 2")));
    }
    let (_, g, h) = ps.derivatives(z);
    let d = match beta {
        [1, 0] => g[0],
        [0, 1] => g[1],
        [2, 0] => h[0][0],
        [1, 1] => h[0][1],
        _ => h[1][1],
    };
    Ok(DerivativeReport {
        derivative: d.norm(),
        distance,
        scaled: d.norm() * distance.powi(order as i32),
    })
}

/// `Σ_{k = k0}^{k_max} 2^{-k} N_{2^{-k}}(E ∩ J)` for the arc `J = [a, a + 2^{-k0}]`.
pub fn local_covering_sum(e: &IntervalSet, a: f64, k0: u32, k_max: u32) -> f64 {
    let b = a + 0.5f64.powi(k0 as i32);
    match e.restrict(a, b) {
        None => 0.0,
        Some(part) => (k0..=k_max)
            .map(|k| {
                let eps = 0.5f64.powi(k as i32);
                eps * part.covering_number(eps) as f64
            })
            .sum(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{koranyi_distance, CurveChart};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn h_examples() {
        for (s, x) in [(0.3, 0.0), (1.0, 0.7), (-2.0, -2.5)] {
            let z = CurveChart::MsFamily.point(&[s, x]).unwrap();
            assert!(surrogate_h(s, &z).norm() < 1e-15);
            assert!(dist_to_ms(s, &z) < 1e-12);
        }
        assert_eq!(surrogate_h(0.4, &BallPoint::ORIGIN), c(1.0));
    }

    #[test]
    fn h_positive_real_part_inside() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10_000 {
            let v: [f64; 4] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
            let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            let r = rng.random_range(0.0..0.999_999) / n;
            let z = BallPoint::new(Complex64::new(v[0] * r, v[1] * r), Complex64::new(v[2] * r, v[3] * r)).unwrap();
            assert!(surrogate_h(rng.random_range(-3.0..3.0), &z).re > 0.0);
        }
    }

    #[test]
    fn single_point_value_at_origin() {
        let e = IntervalSet::points(&[0.2], 0.0, 1.0).unwrap();
        let ps = PsiSeries::from_set(&e, 40).unwrap();
        assert!(ps.counts().iter().all(|&n| n == 1));
        let v = ps.eval(&BallPoint::ORIGIN);
        let expect: f64 = (1..=40).map(|k| 0.5f64.powi(k) / (0.5f64.powi(k) + 1.0)).sum();
        assert!((v - c(expect)).norm() < 1e-15);
        assert!((v.re - 0.7645).abs() < 5e-5);
        let f = f_exp(&ps, 2.0).unwrap();
        assert!((f(&BallPoint::ORIGIN) - c((-2.0 * expect).exp())).norm() < 1e-15);
        assert!(f_exp(&ps, 0.0).is_err());
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let ps = PsiSeries::from_cantor(&CantorSpec::middle_thirds(4), 8).unwrap();
        let z = BallPoint::new(Complex64::new(0.5, 0.2), Complex64::new(-0.3, 0.4)).unwrap();
        let (_, g, h) = ps.derivatives(&z);
        let step = 1e-5;
        let shift = |i: usize, d: Complex64| {
            let mut w = z;
            if i == 0 { w.z1 += d } else { w.z2 += d }
            w
        };
        for i in 0..2 {
            let fd = (ps.eval(&shift(i, c(step))) - ps.eval(&shift(i, c(-step)))) / (2.0 * step);
            assert!((fd - g[i]).norm() < 1e-6 * g[i].norm().max(1.0));
            // holomorphic: the imaginary direction gives i times the derivative
            let fdi = (ps.eval(&shift(i, Complex64::new(0.0, step))) - ps.eval(&shift(i, Complex64::new(0.0, -step)))) / (2.0 * step);
            assert!((fdi - Complex64::new(0.0, 1.0) * g[i]).norm() < 1e-6 * g[i].norm().max(1.0));
            for j in 0..2 {
                let (_, gp, _) = ps.derivatives(&shift(j, c(step)));
                let (_, gm, _) = ps.derivatives(&shift(j, c(-step)));
                let fd = (gp[i] - gm[i]) / (2.0 * step);
                assert!((fd - h[i][j]).norm() < 1e-5 * h[i][j].norm().max(1.0));
            }
        }
        assert!(psi_derivative_bound(&ps, &z, [0, 0], 0.1).is_err());
        assert!(psi_derivative_bound(&ps, &z, [2, 1], 0.1).is_err());
    }

    #[test]
    fn taylor_matches_evaluation() {
        let ps = PsiSeries::from_cantor(&CantorSpec::middle_thirds(5), 10).unwrap();
        let n = 80;
        let t = ps.taylor(n);
        for (z1, z2) in [(0.3, 0.1), (-0.2, 0.35), (0.1, -0.4)] {
            let z = BallPoint::new(Complex64::new(z1, 0.1), Complex64::new(z2, -0.05)).unwrap();
            assert!((t.evaluate(z.z1, z.z2).unwrap() - ps.eval(&z)).norm() < 1e-10);
        }
        // odd-degree coefficients vanish
        assert!(t.iter().filter(|(k, _)| k.k1 % 2 == 1 || k.k2 % 2 == 1).all(|(_, v)| v.norm() == 0.0));
    }

    #[test]
    fn real_part_positive_and_f_bounded() {
        let ps = PsiSeries::from_cantor(&CantorSpec::middle_thirds(6), 20).unwrap();
        let f = f_exp(&ps, 2.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..2000 {
            let v: [f64; 4] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
            let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            let r = rng.random_range(0.0..0.9999) / n;
            let z = BallPoint::new(Complex64::new(v[0] * r, v[1] * r), Complex64::new(v[2] * r, v[3] * r)).unwrap();
            assert!(ps.eval(&z).re > 0.0);
            assert!(f(&z).norm() <= 1.0);
        }
    }

    #[test]
    fn f_vanishes_on_e() {
        let spec = CantorSpec::middle_thirds(8);
        let ps = PsiSeries::from_cantor(&spec, 24).unwrap();
        let f = f_exp(&ps, 2.0).unwrap();
        for s in [0.0, 2.0 / 3.0, 0.25] {
            let mut prev = f64::INFINITY;
            for delta in [1e-1, 1e-2, 1e-3, 1e-4] {
                let zeta = CurveChart::MsFamily.point(&[s, 0.3]).unwrap();
                let v = f(&zeta.scale(1.0 - delta)).norm();
                assert!(v < prev);
                prev = v;
            }
            assert!(prev < 1e-2);
        }
    }

    #[test]
    fn distance_to_support_is_radial_gap() {
        let ps = PsiSeries::from_cantor(&CantorSpec::middle_thirds(3), 4).unwrap();
        let zeta = CurveChart::MsFamily.point(&[ps.support[3], -0.2]).unwrap();
        let z = zeta.scale(0.99);
        assert!((ps.distance_to_support(&z) - 0.01).abs() < 1e-9);
        assert!((koranyi_distance(&z, &zeta) - 0.01).abs() < 1e-12);
    }

    #[test]
    fn h_band_near_circles() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (mut lo, mut hi, mut n) = (f64::INFINITY, 0.0f64, 0);
        while n < 10_000 {
            let s = rng.random_range(-3.0..3.0);
            let m = CurveChart::MsFamily.point(&[s, rng.random_range(-3.0..3.0)]).unwrap();
            let w: [f64; 4] = std::array::from_fn(|_| rng.random_range(-0.3..0.3));
            let z = BallPoint::new_unchecked(m.z1 + Complex64::new(w[0], w[1]), m.z2 + Complex64::new(w[2], w[3]));
            let d = dist_to_ms(s, &z);
            if z.norm_sqr() >= 1.0 || d > 0.3 || d == 0.0 {
                continue;
            }
            let r = surrogate_h(s, &z).norm() / d;
            lo = lo.min(r);
            hi = hi.max(r);
            n += 1;
        }
        assert!(hi / lo <= 8.0, "{lo} {hi}");
    }

    #[test]
    fn dist_to_circle_matches_dense_scan() {
        let z = BallPoint::new(Complex64::new(0.3, -0.2), Complex64::new(0.5, 0.1)).unwrap();
        let s = 0.8;
        let dense = (0..200_000)
            .map(|i| {
                let x = -PI + 2.0 * PI * i as f64 / 200_000.0;
                koranyi_distance(&z, &CurveChart::MsFamily.point(&[s, x]).unwrap())
            })
            .fold(f64::INFINITY, f64::min);
        let d = dist_to_ms(s, &z);
        assert!(d <= dense + 1e-12 && dense - d < 1e-9);
    }

    fn product_samples(ps: &PsiSeries) -> Vec<BallPoint> {
        (0..12)
            .map(|i| {
                let s = ps.support[(i * 97) % ps.support.len()];
                CurveChart::MsFamily.point(&[s, -0.5 + i as f64 / 12.0]).unwrap()
            })
            .collect()
    }

    #[test]
    fn log_band_on_product_set() {
        let ps = PsiSeries::from_cantor(&CantorSpec::middle_thirds(10), 30).unwrap();
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for zeta in product_samples(&ps) {
            for delta in [1e-1, 1e-2, 1e-3, 1e-4] {
                let r = ps.eval(&zeta.scale(1.0 - delta)).re / (1.0 / delta).ln();
                lo = lo.min(r);
                hi = hi.max(r);
            }
        }
        assert!(lo > 0.0 && hi / lo <= 10.0, "{lo} {hi}");
    }

    #[test]
    fn first_derivative_on_ray_to_single_point() {
        let e = IntervalSet::points(&[0.4], 0.0, 1.0).unwrap();
        let ps = PsiSeries::from_set(&e, 40).unwrap();
        let zeta = CurveChart::MsFamily.point(&[0.4, 0.2]).unwrap();
        let mut vals = Vec::new();
        for delta in [1e-1, 1e-2, 1e-3, 1e-4] {
            let z = zeta.scale(1.0 - delta);
            assert!((ps.distance_to_support(&z) - delta).abs() < 1e-9);
            for b in [[1, 0], [0, 1]] {
                vals.push(psi_derivative_bound(&ps, &z, b, delta).unwrap().scaled);
            }
        }
        let hi = vals.iter().cloned().fold(0.0, f64::max);
        let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(hi < 5.0 && lo > 0.05, "{vals:?}");
    }

    #[test]
    fn second_derivatives_stable_in_truncation() {
        let ps40 = PsiSeries::from_cantor(&CantorSpec::middle_thirds(10), 40).unwrap();
        let ps30 = ps40.truncated(30);
        let sup = |ps: &PsiSeries| {
            let mut m = 0.0f64;
            for zeta in product_samples(ps) {
                for delta in [1e-1, 1e-2, 1e-3, 1e-4] {
                    for b in [[2, 0], [1, 1], [0, 2]] {
                        m = m.max(psi_derivative_bound(ps, &zeta.scale(1.0 - delta), b, delta).unwrap().scaled);
                    }
                }
            }
            m
        };
        let (a, b) = (sup(&ps30), sup(&ps40));
        assert!(b < 10.0 && (a - b).abs() < 0.25 * b, "{a} {b}");
    }

    #[test]
    fn truncation_tail_decays_geometrically() {
        // the change from K to K + 5 shrinks by a fixed factor per step once
        // every cover point is isolated
        let ps = PsiSeries::from_cantor(&CantorSpec::middle_thirds(8), 45).unwrap();
        let z = CurveChart::MsFamily.point(&[ps.support[5], 0.1]).unwrap().scale(1.0 - 1e-3);
        let at = |k: u32| ps.truncated(k).eval(&z);
        let steps: Vec<f64> = [20, 25, 30, 35, 40].iter().map(|&k| (at(k + 5) - at(k)).norm()).collect();
        for w in steps.windows(2) {
            assert!((w[1] / w[0] - 1.0 / 32.0).abs() < 0.01 / 32.0, "{steps:?}");
        }
    }

    #[test]
    fn covering_counts_and_sums() {
        let spec = CantorSpec::middle_thirds(12);
        let e = spec.build().unwrap();
        let ps = PsiSeries::from_set(&e, 16).unwrap();
        for (l, n) in ps.levels.iter().zip(ps.counts()) {
            assert_eq!(n as u64, e.covering_number(0.5f64.powi(l.k as i32)));
        }
        // whole-set tails decay like 2^{-k0(1-d)}, slower than 2^{-k0}
        let ratio = |k0: u32| ps.tail_sum(k0) * 2f64.powi(k0 as i32);
        assert!(ratio(12) > 4.0 * ratio(4));
        // localized to an arc of length 2^{-k0} the bound is level independent
        let mut worst = Vec::new();
        for k0 in [3u32, 6, 9] {
            let len = 0.5f64.powi(k0 as i32);
            let m = (0..(1u32 << k0))
                .map(|j| local_covering_sum(&e, j as f64 * len, k0, k0 + 8) / len)
                .fold(0.0, f64::max);
            worst.push(m);
        }
        let hi = worst.iter().cloned().fold(0.0, f64::max);
        let lo = worst.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!(hi < 1.5 * lo && hi < 20.0, "{worst:?}");
    }
}
