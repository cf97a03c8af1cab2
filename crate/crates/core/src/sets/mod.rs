//! Parameter-space boundary sets: Cantor constructions, fattening measures,
//! covering numbers and the product sets realized through the `M_s` chart.

mod kset;
mod product;

pub use kset::{kset_check, KSetOptions, KSetReport};
pub use product::{box_count, box_dimension, ProductBoundarySet};

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::fit::{loglog_fit, LineFit};
use crate::geometry::{BallPoint, BoundarySampler, CurveChart};

/// Cantor set with constant dissection ratio `lambda` over the base arc `base`.
///
/// Generation `n` removes `2^{n-1}` centred gaps of length
/// `l_n = l_1 lambda^{n-1}`, with `l_1 = |E_0| (1 - 2 lambda)` so that the
/// full series of removed lengths sums to `|E_0|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CantorSpec {
    pub lambda: f64,
    pub depth: u32,
    pub base: (f64, f64),
}

impl CantorSpec {
    pub fn new(lambda: f64, depth: u32, base: (f64, f64)) -> Result<Self> {
        let s = CantorSpec { lambda, depth, base };
        s.validate()?;
        Ok(s)
    }

    pub fn middle_thirds(depth: u32) -> Self {
        CantorSpec {
            lambda: 1.0 / 3.0,
            depth,
            base: (0.0, 1.0),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda > 0.0 && self.lambda < 0.5) {
            return Err(Error::BadLambda(self.lambda));
        }
        if self.depth == 0 || self.depth > 30 {
            return Err(Error::Invalid(format!("depth {} outside 1..=30", self.depth)));
        }
        if !(self.base.1 > self.base.0) {
            return Err(Error::Invalid("empty base arc".into()));
        }
        Ok(())
    }

    pub fn base_length(&self) -> f64 {
        self.base.1 - self.base.0
    }

    pub fn first_gap(&self) -> f64 {
        self.base_length() * (1.0 - 2.0 * self.lambda)
    }

    /// `l_n`, the length of each generation-`n` gap.
    pub fn gap_length(&self, n: u32) -> f64 {
        self.first_gap() * self.lambda.powi(n as i32 - 1)
    }

    /// Length of each level-`n` interval, `lambda^n |E_0|`.
    pub fn level_length(&self, n: u32) -> f64 {
        self.base_length() * self.lambda.powi(n as i32)
    }

    /// `log 2 / log(1/lambda)`.
    pub fn dimension(&self) -> f64 {
        2f64.ln() / (1.0 / self.lambda).ln()
    }

    /// Total length removed through generation `depth`.
    pub fn removed_length(&self) -> f64 {
        (1..=self.depth).map(|n| 2f64.powi(n as i32 - 1) * self.gap_length(n)).sum()
    }

    /// Level-`level` intervals (`level <= depth`), left to right.
    pub fn level_intervals(&self, level: u32) -> Vec<(f64, f64)> {
        let len = self.level_length(level);
        let mut lefts = vec![self.base.0];
        for n in 1..=level {
            let shift = self.level_length(n - 1) - self.level_length(n);
            lefts = lefts.iter().flat_map(|&a| [a, a + shift]).collect();
        }
        lefts.into_iter().map(|a| (a, a + len)).collect()
    }

    /// The depth-`depth` interval set on the circle of length `2π`.
    pub fn build(&self) -> Result<IntervalSet> {
        self.validate()?;
        let ambient = if self.base_length() <= 2.0 * PI {
            Ambient::Circle { period: 2.0 * PI }
        } else {
            Ambient::Segment {
                lo: self.base.0,
                hi: self.base.1,
            }
        };
        IntervalSet::new(self.level_intervals(self.depth), ambient)
    }
}

/// Variable-ratio Cantor set on `base`: generation `n` removes a centred gap
/// of length `|base| 4^{-n}` from each of its `2^{n-1}` intervals. The limit
/// keeps half the length of `base`.
pub fn fat_cantor(depth: u32, base: (f64, f64)) -> Result<IntervalSet> {
    if depth == 0 || depth > 30 || !(base.1 > base.0) {
        return Err(Error::Invalid(format!("fat Cantor depth {depth} base {base:?}")));
    }
    let l = base.1 - base.0;
    let mut ivs = vec![base];
    for n in 1..=depth {
        let gap = l * 0.25f64.powi(n as i32);
        ivs = ivs
            .iter()
            .flat_map(|&(a, b)| {
                let m = 0.5 * (a + b);
                [(a, m - 0.5 * gap), (m + 0.5 * gap, b)]
            })
            .collect();
    }
    IntervalSet::on_segment(ivs, base.0, base.1)
}

/// The space the parameter intervals live in.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Ambient {
    Segment { lo: f64, hi: f64 },
    Circle { period: f64 },
}

impl Ambient {
    pub fn length(&self) -> f64 {
        match *self {
            Ambient::Segment { lo, hi } => hi - lo,
            Ambient::Circle { period } => period,
        }
    }
}

/// Sorted, pairwise disjoint closed intervals (degenerate ones allowed).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalSet {
    intervals: Vec<(f64, f64)>,
    ambient: Ambient,
}

impl IntervalSet {
    pub fn new(intervals: Vec<(f64, f64)>, ambient: Ambient) -> Result<Self> {
        if intervals.is_empty() {
            return Err(Error::EmptySet);
        }
        for (i, &(a, b)) in intervals.iter().enumerate() {
            if !(a <= b) || !a.is_finite() || !b.is_finite() {
                return Err(Error::Invalid(format!("interval {i} = [{a}, {b}] is not ordered")));
            }
            if i > 0 && !(a > intervals[i - 1].1) {
                return Err(Error::Invalid(format!("interval {i} overlaps or is out of order")));
            }
        }
        let span = intervals[intervals.len() - 1].1 - intervals[0].0;
        match ambient {
            Ambient::Segment { lo, hi } if intervals[0].0 < lo || intervals[intervals.len() - 1].1 > hi => {
                return Err(Error::Invalid("intervals leave the ambient segment".into()));
            }
            Ambient::Circle { period } if span > period => {
                return Err(Error::Invalid("intervals wrap past one period".into()));
            }
            _ => {}
        }
        Ok(IntervalSet { intervals, ambient })
    }

    /// Intervals on the segment `[lo, hi]`.
    pub fn on_segment(intervals: Vec<(f64, f64)>, lo: f64, hi: f64) -> Result<Self> {
        Self::new(intervals, Ambient::Segment { lo, hi })
    }

    /// Finite point set on the segment `[lo, hi]`.
    pub fn points(points: &[f64], lo: f64, hi: f64) -> Result<Self> {
        let mut p = points.to_vec();
        p.sort_by(f64::total_cmp);
        p.dedup();
        Self::on_segment(p.into_iter().map(|x| (x, x)).collect(), lo, hi)
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn ambient(&self) -> Ambient {
        self.ambient
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn hull(&self) -> (f64, f64) {
        (self.intervals[0].0, self.intervals[self.intervals.len() - 1].1)
    }

    pub fn total_length(&self) -> f64 {
        self.intervals.iter().map(|(a, b)| b - a).sum()
    }

    /// Lengths of the gaps between consecutive intervals.
    pub fn gaps(&self) -> Vec<f64> {
        self.intervals.windows(2).map(|w| w[1].0 - w[0].1).collect()
    }

    pub fn contains(&self, x: f64) -> bool {
        let i = self.intervals.partition_point(|iv| iv.1 < x);
        i < self.intervals.len() && self.intervals[i].0 <= x
    }

    /// Distance from a parameter to the set (periodic on a circle).
    pub fn distance(&self, x: f64) -> f64 {
        let direct = |x: f64| {
            let i = self.intervals.partition_point(|iv| iv.1 < x);
            let mut d = f64::INFINITY;
            if i < self.intervals.len() {
                d = d.min((self.intervals[i].0 - x).max(0.0));
            }
            if i > 0 {
                d = d.min(x - self.intervals[i - 1].1);
            }
            d
        };
        match self.ambient {
            Ambient::Segment { .. } => direct(x),
            Ambient::Circle { period } => {
                let (lo, _) = self.hull();
                let y = lo + (x - lo).rem_euclid(period);
                direct(y).min(direct(y - period))
            }
        }
    }

    /// Lebesgue measure of `{x : dist(x, E) <= t}` within the ambient space.
    pub fn neighborhood_measure(&self, t: f64) -> f64 {
        let mut total = self.total_length();
        for g in self.gaps() {
            total += g.min(2.0 * t);
        }
        let (lo, hi) = self.hull();
        match self.ambient {
            Ambient::Segment { lo: a, hi: b } => total + (lo - a).min(t) + (b - hi).min(t),
            Ambient::Circle { period } => total + (period - (hi - lo)).min(2.0 * t),
        }
    }

    /// Precomputed `t -> |E_t|` for repeated evaluation in `O(log K)`.
    pub fn fattening(&self) -> Fattening {
        let (lo, hi) = self.hull();
        let mut gaps = self.gaps();
        let (edge, edge_cap) = match self.ambient {
            Ambient::Segment { lo: a, hi: b } => (vec![lo - a, b - hi], 1.0),
            Ambient::Circle { period } => {
                gaps.push(period - (hi - lo));
                (Vec::new(), 2.0)
            }
        };
        gaps.sort_by(f64::total_cmp);
        let mut prefix = Vec::with_capacity(gaps.len() + 1);
        prefix.push(0.0);
        for g in &gaps {
            prefix.push(prefix[prefix.len() - 1] + g);
        }
        Fattening {
            base: self.total_length(),
            gaps,
            prefix,
            edge,
            edge_cap,
        }
    }

    /// `|E_t|` over a log-spaced grid together with the log-log slope.
    pub fn measure_profile(&self, t_grid: &[f64]) -> Result<MeasureProfile> {
        if t_grid.len() < 2 || t_grid.iter().any(|t| !(*t > 0.0)) || t_grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::DegenerateGrid("t grid must be positive, increasing, with >= 2 points".into()));
        }
        let values: Vec<f64> = t_grid.iter().map(|&t| self.neighborhood_measure(t)).collect();
        let fit = loglog_fit(t_grid, &values).ok_or_else(|| Error::DegenerateGrid("profile fit".into()))?;
        Ok(MeasureProfile {
            t: t_grid.to_vec(),
            values,
            fit,
        })
    }

    /// Minimal number of closed intervals of length `eps` covering the set,
    /// by the greedy left-to-right sweep.
    pub fn covering_number(&self, eps: f64) -> u64 {
        View::whole(&self.intervals).cover_count(eps)
    }

    /// Left endpoints of the arcs chosen by the greedy sweep at scale `eps`;
    /// every start lies in the set.
    pub fn cover_starts(&self, eps: f64) -> Vec<f64> {
        View::whole(&self.intervals).cover_starts(eps)
    }

    /// `E ∩ [a, b]`, or `None` when empty.
    pub fn restrict(&self, a: f64, b: f64) -> Option<IntervalSet> {
        let ivs: Vec<(f64, f64)> = self
            .intervals
            .iter()
            .filter(|iv| iv.1 >= a && iv.0 <= b)
            .map(|&(x, y)| (x.max(a), y.min(b)))
            .collect();
        (!ivs.is_empty()).then_some(IntervalSet {
            intervals: ivs,
            ambient: self.ambient,
        })
    }

    /// Points of the set at parameter spacing at most `h`, interval endpoints
    /// included.
    pub fn sample_parameters(&self, h: f64) -> Vec<f64> {
        let mut out = Vec::new();
        for &(a, b) in &self.intervals {
            let n = ((b - a) / h).ceil().max(1.0) as usize;
            if b == a {
                out.push(a);
                continue;
            }
            out.extend((0..=n).map(|i| a + (b - a) * i as f64 / n as f64));
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.intervals).expect("interval serialization cannot fail")
    }
}

/// `|E_t| = |E| + Σ min(g, 2t)` over the gaps, with sorted gaps and prefix
/// sums.
#[derive(Debug, Clone)]
pub struct Fattening {
    base: f64,
    gaps: Vec<f64>,
    prefix: Vec<f64>,
    edge: Vec<f64>,
    edge_cap: f64,
}

impl Fattening {
    pub fn eval(&self, t: f64) -> f64 {
        let w = 2.0 * t;
        let k = self.gaps.partition_point(|&g| g <= w);
        let mut total = self.base + self.prefix[k] + w * (self.gaps.len() - k) as f64;
        for e in &self.edge {
            total += e.min(self.edge_cap * t);
        }
        total
    }
}

/// `|E_t|` values on a grid and the fitted log-log slope.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureProfile {
    pub t: Vec<f64>,
    pub values: Vec<f64>,
    pub fit: LineFit,
}

impl MeasureProfile {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,value\n");
        for (t, v) in self.t.iter().zip(&self.values) {
            s.push_str(&format!("{t:e},{v:e}\n"));
        }
        s
    }
}

/// An interval set placed on a one-parameter chart.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChartSet {
    pub set: IntervalSet,
    pub chart: CurveChart,
}

impl BoundarySampler for ChartSet {
    /// Roughly `resolution` samples per unit parameter length, plus endpoints.
    fn sample(&self, resolution: usize) -> Vec<BallPoint> {
        self.set
            .sample_parameters(1.0 / resolution.max(1) as f64)
            .into_iter()
            .map(|s| self.chart.point_unchecked(&[s]))
            .collect()
    }
}

/// A window onto consecutive intervals whose outer endpoints may be clipped.
#[derive(Clone, Copy)]
pub(crate) struct View<'a> {
    ivs: &'a [(f64, f64)],
    lo: f64,
    hi: f64,
}

impl<'a> View<'a> {
    pub(crate) fn whole(ivs: &'a [(f64, f64)]) -> Self {
        View {
            ivs,
            lo: ivs[0].0,
            hi: ivs[ivs.len() - 1].1,
        }
    }

    pub(crate) fn clipped(ivs: &'a [(f64, f64)], lo: f64, hi: f64) -> Self {
        View { ivs, lo, hi }
    }

    fn n(&self) -> usize {
        self.ivs.len()
    }

    fn lo_of(&self, i: usize) -> f64 {
        if i == 0 {
            self.lo
        } else {
            self.ivs[i].0
        }
    }

    fn hi_of(&self, i: usize) -> f64 {
        if i + 1 == self.ivs.len() {
            self.hi
        } else {
            self.ivs[i].1
        }
    }

    pub(crate) fn span(&self) -> f64 {
        self.hi - self.lo
    }

    /// First index `j >= from` with `hi_of(j) > x`, or `n`.
    fn first_hi_above(&self, from: usize, x: f64) -> usize {
        let (mut a, mut b) = (from, self.n());
        while a < b {
            let m = (a + b) / 2;
            if self.hi_of(m) > x {
                b = m;
            } else {
                a = m + 1;
            }
        }
        a
    }

    /// Greedy covering count; a relative slack of `1e-9 eps` absorbs rounding.
    pub(crate) fn cover_count(&self, eps: f64) -> u64 {
        let tol = 1e-9 * eps;
        let mut count = 0u64;
        let mut i = 0;
        let mut p = self.lo_of(0);
        loop {
            let rem = self.hi_of(i) - p;
            if rem > eps + tol {
                let m = ((rem - tol) / eps).floor();
                count += m as u64;
                p += m * eps;
            }
            count += 1;
            let reach = p + eps;
            let j = self.first_hi_above(i, reach + tol);
            if j == self.n() {
                return count;
            }
            p = self.lo_of(j).max(reach);
            i = j;
        }
    }

    pub(crate) fn cover_starts(&self, eps: f64) -> Vec<f64> {
        let tol = 1e-9 * eps;
        let mut starts = Vec::new();
        let mut i = 0;
        let mut p = self.lo_of(0);
        loop {
            let rem = self.hi_of(i) - p;
            if rem > eps + tol {
                let m = ((rem - tol) / eps).floor() as usize;
                starts.extend((0..m).map(|k| p + k as f64 * eps));
                p += m as f64 * eps;
            }
            starts.push(p);
            let reach = p + eps;
            let j = self.first_hi_above(i, reach + tol);
            if j == self.n() {
                return starts;
            }
            p = self.lo_of(j).max(reach);
            i = j;
        }
    }

    /// Smallest `eps` for which two intervals of length `eps` cover the view.
    pub(crate) fn two_cover_threshold(&self) -> f64 {
        let mut best = self.span() / 2.0;
        for i in 0..self.n().saturating_sub(1) {
            let c = (self.hi_of(i) - self.lo).max(self.hi - self.lo_of(i + 1));
            best = best.min(c);
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn cantor_examples() {
        let e = CantorSpec::middle_thirds(1).build().unwrap();
        let iv = e.intervals();
        assert!((iv[0].1 - 1.0 / 3.0).abs() < 1e-15 && (iv[1].0 - 2.0 / 3.0).abs() < 1e-15);
        let e = CantorSpec::middle_thirds(2).build().unwrap();
        let expect = [(0.0, 1.0 / 9.0), (2.0 / 9.0, 1.0 / 3.0), (2.0 / 3.0, 7.0 / 9.0), (8.0 / 9.0, 1.0)];
        for (a, b) in e.intervals().iter().zip(expect) {
            assert!((a.0 - b.0).abs() < 1e-15 && (a.1 - b.1).abs() < 1e-15);
        }
        let s = CantorSpec::new(0.25, 1, (0.0, 1.0)).unwrap();
        assert!((s.first_gap() - 0.5).abs() < 1e-15);
        for (a, b) in s.build().unwrap().intervals() {
            assert!((b - a - 0.25).abs() < 1e-15);
        }
        assert_eq!(CantorSpec::new(0.5, 3, (0.0, 1.0)), Err(Error::BadLambda(0.5)));
        for depth in [1, 5, 12] {
            let s = CantorSpec::new(0.3, depth, (0.0, 2.0)).unwrap();
            assert!(s.removed_length() < s.base_length());
            let e = s.build().unwrap();
            assert_eq!(e.len(), 1 << depth);
            assert!((e.total_length() + s.removed_length() - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn neighborhood_examples() {
        let p = IntervalSet::points(&[0.0], 0.0, 1.0).unwrap();
        assert!((p.neighborhood_measure(0.1) - 0.1).abs() < 1e-15);
        let full = IntervalSet::on_segment(vec![(0.0, 1.0)], 0.0, 1.0).unwrap();
        assert_eq!(full.neighborhood_measure(0.3), 1.0);
        let e = CantorSpec::middle_thirds(10).build().unwrap();
        let t = 3f64.powi(-8);
        let exact = e.neighborhood_measure(t);
        // grid oracle on [0,1]; the circle wrap adds a further t on each side
        let n = 1_000_000;
        let hits = (0..n).filter(|&i| e.distance((i as f64 + 0.5) / n as f64) <= t).count();
        assert!((exact - 2.0 * t - hits as f64 / n as f64).abs() <= 2.0 / n as f64);
        let fast = e.fattening();
        for t in [1e-7, 3e-5, 0.01, 0.2, 5.0] {
            assert!((fast.eval(t) - e.neighborhood_measure(t)).abs() < 1e-12);
        }
        let seg = IntervalSet::on_segment(vec![(0.2, 0.3), (0.5, 0.6)], 0.0, 1.0).unwrap();
        for t in [0.01, 0.1, 0.3, 2.0] {
            assert!((seg.fattening().eval(t) - seg.neighborhood_measure(t)).abs() < 1e-15);
        }
    }

    #[test]
    fn covering_examples() {
        let p = IntervalSet::points(&[0.4], 0.0, 1.0).unwrap();
        assert_eq!(p.covering_number(1e-6), 1);
        let e = CantorSpec::middle_thirds(12).build().unwrap();
        for j in 0..=12 {
            assert_eq!(e.covering_number(3f64.powi(-j)), 1 << j);
        }
        let full = IntervalSet::on_segment(vec![(0.0, 1.0)], 0.0, 1.0).unwrap();
        for eps in [0.3, 0.25, 1e-3, 7e-5] {
            assert_eq!(full.covering_number(eps), (1.0f64 / eps).ceil() as u64);
        }
        let s = CantorSpec::new(0.4, 10, (0.0, 1.0)).unwrap();
        let e = s.build().unwrap();
        for j in 0..=10 {
            assert_eq!(e.covering_number(s.level_length(j)), 1 << j);
        }
    }

    #[test]
    fn cantor_profile_slopes() {
        let grid = crate::fit::logspace(3f64.powi(-12), 3f64.powi(-3), 40);
        let e = IntervalSet::on_segment(vec![(0.0, 1.0)], -10.0, 10.0).unwrap();
        assert!(e.measure_profile(&grid).unwrap().fit.slope.abs() < 0.02);
        assert!(e.measure_profile(&[1.0]).is_err());
    }

    fn random_set() -> impl Strategy<Value = IntervalSet> {
        proptest::collection::vec((0.0f64..1.0, 0.0f64..1.0), 1..30).prop_map(|v| {
            let mut pts: Vec<f64> = v.iter().flat_map(|(a, b)| [*a, *b]).collect();
            pts.sort_by(f64::total_cmp);
            pts.dedup();
            let ivs: Vec<(f64, f64)> = pts.chunks(2).filter(|c| c.len() == 2).map(|c| (c[0], c[0] + 0.5 * (c[1] - c[0]))).collect();
            IntervalSet::on_segment(if ivs.is_empty() { vec![(0.5, 0.5)] } else { ivs }, 0.0, 1.0).unwrap()
        })
    }

    proptest! {
        #[test]
        fn measure_monotone_lipschitz(e in random_set(), t in 1e-6f64..0.5, dt in 0.0f64..0.1) {
            let a = e.neighborhood_measure(t);
            let b = e.neighborhood_measure(t + dt);
            prop_assert!(b >= a - 1e-15);
            prop_assert!(b - a <= 2.0 * e.len() as f64 * dt + 1e-12);
            prop_assert!(b <= 1.0 + 1e-12);
        }

        #[test]
        fn covering_monotone(e in random_set(), eps in 1e-4f64..0.5, f in 1.0f64..3.0) {
            let n = e.covering_number(eps);
            prop_assert!(e.covering_number(eps * f) <= n);
            prop_assert!(e.covering_number(eps / 2.0) <= 2 * n + 1);
        }

        #[test]
        fn starts_match_count(e in random_set(), eps in 1e-3f64..0.5) {
            let starts = e.cover_starts(eps);
            prop_assert_eq!(starts.len() as u64, e.covering_number(eps));
            for s in &starts {
                prop_assert!(e.contains(*s));
            }
        }

        #[test]
        fn two_cover_threshold_matches_greedy(e in random_set()) {
            let v = View::whole(e.intervals());
            let t2 = v.two_cover_threshold();
            prop_assert!(v.cover_count(t2 * (1.0 + 1e-8)) <= 2);
            if v.span() > 0.0 && t2 > 0.0 {
                prop_assert!(v.cover_count(t2 * (1.0 - 1e-6)) >= 3 || v.cover_count(t2 * (1.0 - 1e-6)) == 2 && t2 == v.span() / 2.0);
            }
        }
    }
}
