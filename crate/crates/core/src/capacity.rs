//! Riesz kernels, energies of discrete measures and critical-index detection
//! from the divergence of capacity integrals.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::E;

use crate::error::{Error, Result};
use crate::fit::{linear_fit, loglog_fit, LineFit};
use crate::geometry::{koranyi_distance, BallPoint, CurveChart};
use crate::quad::{integrate, integrate_log, QuadOptions};
use crate::sets::{CantorSpec, IntervalSet};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RieszKernelParams {
    pub alpha: f64,
    pub n: u32,
}

impl RieszKernelParams {
    pub fn new(alpha: f64) -> Result<Self> {
        let p = RieszKernelParams { alpha, n: 2 };
        if !(alpha > 0.0 && alpha <= 2.0) {
            return Err(Error::Invalid(format!("Riesz index {alpha} outside (0, 2]")));
        }
        Ok(p)
    }

    /// Kernel value without the `t > 0` check.
    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        let n = self.n as f64;
        if self.alpha >= n {
            (E / t).ln()
        } else {
            t.powf(self.alpha - n)
        }
    }
}

/// `t^{alpha-n}`, or `log(e/t)` when `alpha = n`.
pub fn riesz_kernel(t: f64, p: RieszKernelParams) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::Invalid(format!("kernel argument {t} must be positive")));
    }
    Ok(p.eval(t))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "snake_case")]
pub enum DiagonalPolicy {
    /// Sum over distinct atoms only; coincident atoms are an error.
    ExcludeDiagonal,
    /// Distances (the diagonal included) are raised to at least `floor`.
    Floored { floor: f64 },
    /// Point masses carry their own infinite self-energy.
    IncludeDiagonal,
}

/// Weighted atoms on the sphere; `params` keeps chart parameters when the
/// measure was pushed forward from parameter space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteMeasure {
    pub points: Vec<BallPoint>,
    pub masses: Vec<f64>,
    #[serde(default)]
    pub params: Vec<Vec<f64>>,
}

impl DiscreteMeasure {
    pub fn new(points: Vec<BallPoint>, masses: Vec<f64>) -> Result<Self> {
        if points.len() != masses.len() || points.is_empty() {
            return Err(Error::Invalid("need one positive mass per atom".into()));
        }
        if masses.iter().any(|m| !(*m > 0.0)) {
            return Err(Error::Invalid("masses must be positive".into()));
        }
        let total = compensated_sum(masses.iter().copied());
        if (total - 1.0).abs() > 1e-12 * (masses.len() as f64).sqrt().max(1.0) {
            return Err(Error::Invalid(format!("masses sum to {total}, not 1")));
        }
        Ok(DiscreteMeasure {
            points,
            masses,
            params: Vec::new(),
        })
    }

    /// Uniform probability on the given chart parameters.
    pub fn uniform_on_chart(chart: CurveChart, params: Vec<Vec<f64>>) -> Result<Self> {
        let n = params.len();
        let points = params.iter().map(|p| chart.point(p)).collect::<Result<Vec<_>>>()?;
        let mut m = DiscreteMeasure::new(points, vec![1.0 / n as f64; n])?;
        m.params = params;
        Ok(m)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        compensated_sum(self.masses.iter().copied())
    }

    /// Smallest positive Korányi distance between atoms (quadratic scan).
    pub fn resolution(&self) -> f64 {
        let mut best = f64::INFINITY;
        for i in 0..self.len() {
            for j in i + 1..self.len() {
                let d = koranyi_distance(&self.points[i], &self.points[j]);
                if d > 0.0 {
                    best = best.min(d);
                }
            }
        }
        best
    }
}

/// Neumaier-compensated sum in slice order.
pub(crate) fn compensated_sum(xs: impl IntoIterator<Item = f64>) -> f64 {
    let (mut s, mut c) = (0.0f64, 0.0f64);
    for x in xs {
        let t = s + x;
        c += if s.abs() >= x.abs() { (s - t) + x } else { (x - t) + s };
        s = t;
    }
    s + c
}

const ROW_BLOCK: usize = 64;

/// Riesz energy `Σ m_i m_j K(d_K(ζ_i, ζ_j))`. Rows are summed in fixed blocks
/// (compensated), then the blocks in order, so the value does not depend on
/// scheduling. Returns `f64::INFINITY` as the infinite-energy flag.
pub fn energy(mu: &DiscreteMeasure, p: RieszKernelParams, policy: DiagonalPolicy) -> Result<f64> {
    let n = mu.len();
    match policy {
        DiagonalPolicy::ExcludeDiagonal if n < 2 => {
            return Err(Error::Invalid("exclude-diagonal energy needs at least two atoms".into()))
        }
        DiagonalPolicy::IncludeDiagonal => return Ok(f64::INFINITY),
        DiagonalPolicy::Floored { floor } if !(floor > 0.0) => {
            return Err(Error::Invalid("energy floor must be positive".into()))
        }
        _ => {}
    }
    let blocks: Vec<Result<f64>> = (0..n.div_ceil(ROW_BLOCK))
        .into_par_iter()
        .map(|b| {
            let mut acc = Vec::with_capacity(ROW_BLOCK * n);
            for i in b * ROW_BLOCK..((b + 1) * ROW_BLOCK).min(n) {
                for j in 0..n {
                    let d = koranyi_distance(&mu.points[i], &mu.points[j]);
                    let k = match policy {
                        DiagonalPolicy::ExcludeDiagonal => {
                            if i == j {
                                continue;
                            }
                            if d == 0.0 {
                                return Err(Error::CoincidentAtoms(i.min(j), i.max(j)));
                            }
                            p.eval(d)
                        }
                        DiagonalPolicy::Floored { floor } => p.eval(d.max(floor)),
                        DiagonalPolicy::IncludeDiagonal => unreachable!(),
                    };
                    acc.push(mu.masses[i] * mu.masses[j] * k);
                }
            }
            Ok(compensated_sum(acc))
        })
        .collect();
    let vals = blocks.into_iter().collect::<Result<Vec<f64>>>()?;
    Ok(compensated_sum(vals))
}

/// The same exclude-diagonal energy by the layer-cake formula
/// `Σ_i m_i Σ_k (K(d_(k)) - K(d_(k+1))) μ_i(d <= d_(k))`, over each atom's
/// sorted distances.
pub fn energy_layer_cake(mu: &DiscreteMeasure, p: RieszKernelParams) -> Result<f64> {
    let n = mu.len();
    if n < 2 {
        return Err(Error::Invalid("exclude-diagonal energy needs at least two atoms".into()));
    }
    let rows: Vec<Result<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut ds: Vec<(f64, f64)> = (0..n)
                .filter(|&j| j != i)
                .map(|j| (koranyi_distance(&mu.points[i], &mu.points[j]), mu.masses[j]))
                .collect();
            if let Some(j) = ds.iter().position(|d| d.0 == 0.0) {
                return Err(Error::CoincidentAtoms(i.min(j), i.max(j)));
            }
            ds.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut cum = 0.0;
            let mut terms = Vec::with_capacity(ds.len());
            for k in 0..ds.len() {
                cum += ds[k].1;
                let next = ds.get(k + 1).map_or(0.0, |d| p.eval(d.0));
                terms.push((p.eval(ds[k].0) - next) * cum);
            }
            Ok(mu.masses[i] * compensated_sum(terms))
        })
        .collect();
    Ok(compensated_sum(rows.into_iter().collect::<Result<Vec<f64>>>()?))
}

/// Atoms at the midpoints of the level-`level` intervals, mass `2^{-level}`
/// each, pushed to the sphere through `chart`.
pub fn natural_cantor_measure(spec: &CantorSpec, level: u32, chart: CurveChart) -> Result<DiscreteMeasure> {
    spec.validate()?;
    if level > spec.depth {
        return Err(Error::Invalid(format!("level {level} exceeds depth {}", spec.depth)));
    }
    if chart.dimension() != 1 {
        return Err(Error::Invalid("natural measure needs a one-parameter chart".into()));
    }
    let params = spec
        .level_intervals(level)
        .into_iter()
        .map(|(a, b)| vec![0.5 * (a + b)])
        .collect();
    DiscreteMeasure::uniform_on_chart(chart, params)
}

/// Natural Cantor measure on the base times the uniform measure on `fiber`
/// equally spaced `x` values in `[-1/2, 1/2]`, through the `M_s` chart.
pub fn natural_product_measure(spec: &CantorSpec, level: u32, fiber: usize) -> Result<DiscreteMeasure> {
    if level > spec.depth || fiber == 0 {
        return Err(Error::Invalid("bad level or empty fiber".into()));
    }
    let xs: Vec<f64> = (0..fiber).map(|i| -0.5 + (i as f64 + 0.5) / fiber as f64).collect();
    let params = spec
        .level_intervals(level)
        .into_iter()
        .flat_map(|(a, b)| xs.iter().map(move |&x| vec![0.5 * (a + b), x]))
        .collect();
    DiscreteMeasure::uniform_on_chart(CurveChart::MsFamily, params)
}

/// Which boundary geometry a capacity question is asked in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CapacityCase {
    Transversal,
    Ctangential,
    Product,
}

impl CapacityCase {
    /// Predicted threshold for a set of dimension `d`.
    pub fn predicted(&self, d: f64) -> f64 {
        match self {
            CapacityCase::Transversal => 2.0 - d,
            CapacityCase::Ctangential => 2.0 - d / 2.0,
            CapacityCase::Product => 1.5 - d,
        }
    }
}

/// Energy of the level-`level` natural measure from the pair-difference
/// multiset: two atoms whose addresses first differ at generation `n` are
/// `Σ ε_g c_g` apart with `ε ∈ {-1,0,1}`, and a difference pattern with `z`
/// zero digits occurs `2^z` times.
pub fn cantor_pair_energy<K: Fn(f64) -> f64 + Sync>(spec: &CantorSpec, level: u32, kernel: K) -> f64 {
    let shifts: Vec<f64> = (1..=level)
        .map(|n| spec.level_length(n - 1) - spec.level_length(n))
        .collect();
    // enumerate ε with the first nonzero digit +1 and double (symmetry)
    let total: f64 = (0..level as usize)
        .into_par_iter()
        .map(|first| {
            let mut acc = Vec::new();
            pattern_sum(&shifts, first + 1, shifts[first], first as i32, &kernel, &mut acc);
            compensated_sum(acc)
        })
        .collect::<Vec<f64>>()
        .into_iter()
        .sum();
    2.0 * total * 0.25f64.powi(level as i32)
}

fn pattern_sum<K: Fn(f64) -> f64>(shifts: &[f64], g: usize, diff: f64, zeros: i32, kernel: &K, acc: &mut Vec<f64>) {
    if g == shifts.len() {
        acc.push(2f64.powi(zeros) * kernel(diff.abs()));
        return;
    }
    pattern_sum(shifts, g + 1, diff, zeros + 1, kernel, acc);
    pattern_sum(shifts, g + 1, diff + shifts[g], zeros, kernel, acc);
    pattern_sum(shifts, g + 1, diff - shifts[g], zeros, kernel, acc);
}

/// `g(Δs) = ∫∫_{[-1/2,1/2]²} K(d_K((s,x), (s+Δs,x'))) dx dx'`, tabulated on
/// a log grid and interpolated linearly in log-log coordinates.
pub struct FiberKernel {
    log_ds: Vec<f64>,
    log_g: Vec<f64>,
}

impl FiberKernel {
    pub fn new(p: RieszKernelParams, ds_min: f64, per_decade: usize) -> Result<Self> {
        let decades = (1.0 / ds_min).log10().ceil().max(1.0);
        let n = (decades as usize) * per_decade + 1;
        let log_ds: Vec<f64> = (0..n)
            .map(|i| (ds_min.ln()) + (-ds_min.ln()) * i as f64 / (n - 1) as f64)
            .collect();
        let log_g = log_ds
            .par_iter()
            .map(|&l| Self::exact(p, l.exp()).map(f64::ln))
            .collect::<Result<Vec<f64>>>()?;
        Ok(FiberKernel { log_ds, log_g })
    }

    /// Nested adaptive quadrature; the inner integrand peaks at `x' = x` with
    /// width about `sqrt(Δs)`.
    pub fn exact(p: RieszKernelParams, ds: f64) -> Result<f64> {
        let w = ds.sqrt();
        let opts = QuadOptions {
            rel_tol: 1e-9,
            ..QuadOptions::default()
        };
        let inner = |x: f64| -> Result<f64> {
            let mut br = vec![-0.5, 0.5];
            for k in [-4.0, -1.0, 0.0, 1.0, 4.0] {
                let b = x + k * w;
                if b > -0.5 && b < 0.5 {
                    br.push(b);
                }
            }
            br.sort_by(f64::total_cmp);
            br.dedup();
            let (cx, sx) = (x.cos(), x.sin());
            let (c, s) = (ds.cos(), ds.sin());
            integrate(
                |y| {
                    let (cy, sy) = (y.cos(), y.sin());
                    let re = 1.0 - c * cx * cy - sx * sy;
                    let im = -s * cx * cy;
                    p.eval(re.hypot(im))
                },
                &br,
                opts,
            )
            .map(|r| r.value)
        };
        let outer = integrate(|x| inner(x).unwrap_or(f64::NAN), &[-0.5, 0.0, 0.5], opts)?;
        Ok(outer.value)
    }

    pub fn eval(&self, ds: f64) -> f64 {
        let l = ds.ln();
        let n = self.log_ds.len();
        let i = self.log_ds.partition_point(|&x| x <= l).clamp(1, n - 1);
        let (x0, x1) = (self.log_ds[i - 1], self.log_ds[i]);
        let t = (l - x0) / (x1 - x0);
        ((1.0 - t) * self.log_g[i - 1] + t * self.log_g[i]).exp()
    }
}

/// Exclude-diagonal energy of the level-`level` natural measure in the given
/// geometry (the product case integrates the uniform fiber exactly).
pub fn natural_energy(spec: &CantorSpec, level: u32, case: CapacityCase, p: RieszKernelParams, fiber: Option<&FiberKernel>) -> Result<f64> {
    Ok(match case {
        CapacityCase::Transversal => cantor_pair_energy(spec, level, |u| p.eval(2.0 * (0.5 * u).sin())),
        CapacityCase::Ctangential => cantor_pair_energy(spec, level, |u| p.eval(1.0 - u.cos())),
        CapacityCase::Product => {
            let g = fiber.ok_or_else(|| Error::Invalid("product energy needs a fiber kernel".into()))?;
            cantor_pair_energy(spec, level, |u| g.eval(u))
        }
    })
}

/// Options for [`critical_alpha_capacity`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalOptions {
    /// Upper cutoff of the truncated integrals.
    pub t_max: f64,
    /// Cutoffs per decade.
    pub per_decade: usize,
    /// Levels used for energy growth (product case).
    pub levels: (u32, u32),
    /// Bisection stops below this width.
    pub tol: f64,
}

impl Default for CriticalOptions {
    fn default() -> Self {
        CriticalOptions {
            t_max: 1e-2,
            per_decade: 4,
            levels: (5, 13),
            tol: 1e-3,
        }
    }
}

/// What a critical-index estimate is computed from.
pub enum CapacityInput<'a> {
    /// A neighbourhood-measure profile `t -> |E_t|` trusted on `[t_min, ∞)`.
    Profile { measure: &'a (dyn Fn(f64) -> f64 + Sync), t_min: f64 },
    /// A built Cantor set: its exact `|E_t|` down to the finest generated
    /// scale, or its natural measures.
    Cantor(CantorSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalAlphaReport {
    pub case: CapacityCase,
    pub alpha_c: f64,
    /// Dimension read off the data (profile slope or the Cantor parameters).
    pub d: f64,
    /// `(alpha, growth slope)` pairs visited by the bisection. A slope `<= 0`
    /// means the truncated quantity keeps growing as the cutoff shrinks.
    pub probes: Vec<(f64, f64)>,
    /// Reporting band: slopes within this of zero are marginal.
    pub band: f64,
}

/// Locates the `alpha` at which the capacity criterion switches from
/// divergent (capacity zero) to convergent (positive capacity).
///
/// For profiles, the increments `∫_{δ_{k+1}}^{δ_k} dt / (t^p |E_t|)` over
/// geometric cutoffs are fitted against `δ_k`; with `|E_t| ≍ t^{1-d}` they
/// scale like `δ^{d-p}`, so the integral converges exactly when the slope is
/// positive. `p = 2 - alpha` transversally, `p = 4 - 2 alpha` for complex
/// tangential arcs. The product case fits the increments of natural-measure
/// energies against the level scale instead.
pub fn critical_alpha_capacity(input: &CapacityInput, case: CapacityCase, opts: CriticalOptions) -> Result<CriticalAlphaReport> {
    match (input, case) {
        (CapacityInput::Cantor(spec), CapacityCase::Product) => product_threshold(spec, opts),
        (CapacityInput::Profile { .. }, CapacityCase::Product) => Err(Error::Invalid(
            "the product case needs a measure family, not a profile".into(),
        )),
        (CapacityInput::Cantor(spec), _) => {
            let e = spec.build()?;
            let t_min = spec.level_length(spec.depth).max(spec.gap_length(spec.depth) / 2.0);
            let fat = e.fattening();
            let m = |t: f64| fat.eval(t);
            profile_threshold(&m, t_min, breaks_for(&e, t_min, opts.t_max), case, opts)
        }
        (CapacityInput::Profile { measure, t_min }, _) => profile_threshold(*measure, *t_min, Vec::new(), case, opts),
    }
}

fn breaks_for(e: &IntervalSet, lo: f64, hi: f64) -> Vec<f64> {
    let mut b: Vec<f64> = e.gaps().into_iter().map(|g| g / 2.0).filter(|&h| h > lo && h < hi).collect();
    b.sort_by(f64::total_cmp);
    b.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs());
    b
}

fn bisect_threshold<F: FnMut(f64) -> Result<f64>>(mut slope: F, lo: f64, hi: f64, tol: f64) -> Result<(f64, Vec<(f64, f64)>)> {
    let (mut a, mut b) = (lo, hi);
    let mut probes = Vec::new();
    let sa = slope(a)?;
    let sb = slope(b)?;
    probes.push((a, sa));
    probes.push((b, sb));
    if !(sa <= 0.0 && sb > 0.0) {
        return Err(Error::TooCoarse(format!(
            "no divergence transition in [{lo}, {hi}] (slopes {sa:.3}, {sb:.3})"
        )));
    }
    while b - a > tol {
        let m = 0.5 * (a + b);
        let s = slope(m)?;
        probes.push((m, s));
        if s <= 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    Ok((0.5 * (a + b), probes))
}

fn profile_threshold(
    measure: &(dyn Fn(f64) -> f64 + Sync),
    t_min: f64,
    extra_breaks: Vec<f64>,
    case: CapacityCase,
    opts: CriticalOptions,
) -> Result<CriticalAlphaReport> {
    let decades = (opts.t_max / t_min).log10();
    if !(decades >= 3.0) {
        return Err(Error::TooCoarse(format!(
            "profile resolved down to {t_min:.3e}; need t_min <= {:.3e} (three decades below t_max)",
            opts.t_max * 1e-3
        )));
    }
    let n = (decades * opts.per_decade as f64).floor() as usize;
    let cuts: Vec<f64> = (0..=n)
        .map(|k| opts.t_max * 10f64.powf(-(k as f64) / opts.per_decade as f64))
        .collect();
    let d = {
        let ts: Vec<f64> = cuts.clone();
        let vs: Vec<f64> = ts.iter().map(|&t| measure(t)).collect();
        1.0 - loglog_fit(&ts, &vs).ok_or_else(|| Error::DegenerateGrid("profile".into()))?.slope
    };
    let power = |alpha: f64| match case {
        CapacityCase::Ctangential => 4.0 - 2.0 * alpha,
        _ => 2.0 - alpha,
    };
    let slope = |alpha: f64| -> Result<f64> {
        let p = power(alpha);
        let incs = cuts
            .par_windows(2)
            .map(|w| {
                let (lo, hi) = (w[1], w[0]);
                let mut br: Vec<f64> = vec![lo.ln()];
                br.extend(extra_breaks.iter().filter(|&&b| b > lo && b < hi).map(|b| b.ln()));
                br.push(hi.ln());
                integrate(
                    |y| {
                        let t = y.exp();
                        t.powf(1.0 - p) / measure(t)
                    },
                    &br,
                    QuadOptions {
                        rel_tol: 1e-10,
                        ..QuadOptions::default()
                    },
                )
                .map(|r| r.value)
            })
            .collect::<Result<Vec<f64>>>()?;
        let fit = loglog_fit(&cuts[..n], &incs).ok_or_else(|| Error::DegenerateGrid("increments".into()))?;
        Ok(fit.slope)
    };
    let (lo, hi) = match case {
        CapacityCase::Ctangential => (0.5, 2.5),
        _ => (0.01, 2.99),
    };
    let (alpha_c, probes) = bisect_threshold(slope, lo, hi, opts.tol)?;
    Ok(CriticalAlphaReport {
        case,
        alpha_c,
        d,
        probes,
        band: 0.05,
    })
}

fn product_threshold(spec: &CantorSpec, opts: CriticalOptions) -> Result<CriticalAlphaReport> {
    let (m0, m1) = opts.levels;
    if m1 > spec.depth || m1 < m0 + 3 {
        return Err(Error::TooCoarse(format!(
            "energy levels {m0}..{m1} need depth >= {m1} and at least four levels"
        )));
    }
    let ds_min = spec.level_length(m1) * 0.5;
    let slope = |alpha: f64| -> Result<f64> {
        let p = RieszKernelParams::new(alpha)?;
        let g = FiberKernel::new(p, ds_min, 24)?;
        let es: Vec<f64> = (m0..=m1)
            .map(|m| natural_energy(spec, m, CapacityCase::Product, p, Some(&g)))
            .collect::<Result<_>>()?;
        let xs: Vec<f64> = (m0..m1).map(|m| spec.level_length(m).ln()).collect();
        let ys: Vec<f64> = es.windows(2).map(|w| (w[1] - w[0]).abs().max(1e-300).ln()).collect();
        Ok(linear_fit(&xs, &ys).ok_or_else(|| Error::DegenerateGrid("energy increments".into()))?.slope)
    };
    let (alpha_c, probes) = bisect_threshold(slope, 0.1, 1.45, opts.tol.max(5e-3))?;
    Ok(CriticalAlphaReport {
        case: CapacityCase::Product,
        alpha_c,
        d: spec.dimension(),
        probes,
        band: 0.05,
    })
}

/// Fitted exponent of `r -> μ(K(ζ, r))`, averaged (in log) over `centers`.
pub fn ball_measure_profile(mu: &DiscreteMeasure, centers: &[BallPoint], r_grid: &[f64]) -> Result<(LineFit, Vec<f64>)> {
    if centers.is_empty() {
        return Err(Error::EmptySet);
    }
    if r_grid.len() < 2 {
        return Err(Error::DegenerateGrid("need at least two radii".into()));
    }
    let logs: Vec<Vec<f64>> = centers
        .par_iter()
        .map(|c| {
            let mut ds: Vec<(f64, f64)> = mu
                .points
                .iter()
                .zip(&mu.masses)
                .map(|(p, m)| (koranyi_distance(c, p), *m))
                .collect();
            ds.sort_by(|a, b| a.0.total_cmp(&b.0));
            let mut cum = Vec::with_capacity(ds.len());
            let mut acc = 0.0;
            for d in &ds {
                acc += d.1;
                cum.push(acc);
            }
            r_grid
                .iter()
                .map(|&r| {
                    let k = ds.partition_point(|d| d.0 < r);
                    if k == 0 {
                        f64::NEG_INFINITY
                    } else {
                        cum[k - 1].ln()
                    }
                })
                .collect()
        })
        .collect();
    let means: Vec<f64> = (0..r_grid.len())
        .map(|j| logs.iter().map(|row| row[j]).sum::<f64>() / centers.len() as f64)
        .collect();
    if means.iter().any(|m| !m.is_finite()) {
        return Err(Error::TooCoarse("some ball holds no atom; raise the smallest radius".into()));
    }
    let xs: Vec<f64> = r_grid.iter().map(|r| r.ln()).collect();
    let fit = linear_fit(&xs, &means).ok_or_else(|| Error::DegenerateGrid("ball profile".into()))?;
    Ok((fit, means.into_iter().map(f64::exp).collect()))
}

/// Energy-sweep rows `(alpha, level, energy)` as CSV.
pub fn energy_sweep_csv(rows: &[(f64, u32, f64)]) -> String {
    let mut s = String::from("alpha,level,energy\n");
    for (a, l, e) in rows {
        s.push_str(&format!("{a},{l},{e:e}\n"));
    }
    s
}

#[cfg(test)]
pub(crate) fn circle_params(q: usize) -> Vec<Vec<f64>> {
    (0..q).map(|i| vec![-std::f64::consts::PI + 2.0 * std::f64::consts::PI * i as f64 / q as f64]).collect()
}

/// Truncated criterion integral `∫_δ^{t_max} dt / (t^p |E_t|)`, exposed for
/// sweeps.
pub fn truncated_criterion(measure: &dyn Fn(f64) -> f64, p: f64, delta: f64, t_max: f64) -> Result<f64> {
    integrate_log(
        |t| 1.0 / (t.powf(p) * measure(t)),
        delta,
        t_max,
        QuadOptions::default(),
    )
    .map(|r| r.value)
}
