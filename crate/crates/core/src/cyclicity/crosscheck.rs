use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::gauss_legendre_on;
use crate::sets::{Ambient, IntervalSet};

use super::chains::{chain_value, ChainCase};
use super::critical::measured_dimension;

/// Full integrals `u² ∫ x1^{1-α} / (u + x1 + q(x2) + x3² + h(t))⁴` against
/// the reduced chains: transversal `q = x2²`, `h = t`; complex tangential
/// `q = |x2|`, `h = t²`; totally real drops `x2` and keeps `h = t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrosscheckReport {
    pub case: ChainCase,
    pub alpha: f64,
    /// Dimension fed to the chain, read off the set's profile.
    pub d: f64,
    pub u: Vec<f64>,
    pub full: Vec<f64>,
    pub full_stderr: Vec<f64>,
    pub chain: Vec<f64>,
    pub ratios: Vec<f64>,
    /// `max ratio / min ratio`.
    pub band: f64,
}

impl CrosscheckReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("u,full,full_stderr,chain,ratio\n");
        for i in 0..self.u.len() {
            s.push_str(&format!("{:e},{:e},{:e},{:e},{:e}\n", self.u[i], self.full[i], self.full_stderr[i], self.chain[i], self.ratios[i]));
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControlReport {
    pub monte_carlo: f64,
    pub stderr: f64,
    pub quadrature: f64,
}

/// Density proportional to `1/x` on `[lo, top]`, continued below `lo` by
/// `(x/lo)^{-beta} / lo` with `beta < 1`.
#[derive(Clone, Copy)]
struct Scale {
    lo: f64,
    span: f64,
    beta: f64,
}

impl Scale {
    fn new(lo: f64, top: f64, beta: f64) -> Self {
        Scale { lo, span: (top / lo).ln(), beta }
    }

    fn below(&self) -> f64 {
        1.0 / (1.0 - self.beta)
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        if rng.random::<f64>() * (self.below() + self.span) < self.below() {
            self.lo * rng.random::<f64>().powf(1.0 - self.beta)
        } else {
            self.lo * (self.span * rng.random::<f64>()).exp()
        }
    }

    fn density(&self, x: f64) -> f64 {
        let z = self.below() + self.span;
        if x >= self.lo {
            1.0 / (z * x)
        } else {
            (x / self.lo).powf(-self.beta) / (z * self.lo)
        }
    }
}

/// Even mixture of uniform and [`Scale`] on `[0, 1]`.
#[derive(Clone, Copy)]
struct LogMix(Scale);

impl LogMix {
    fn new(lo: f64) -> Self {
        LogMix(Scale::new(lo, 1.0, 0.0))
    }

    fn singular(lo: f64, beta: f64) -> Self {
        LogMix(Scale::new(lo, 1.0, beta))
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> (f64, f64) {
        let x = if rng.random::<bool>() { rng.random::<f64>() } else { self.0.sample(rng) };
        (x, 0.5 + 0.5 * self.0.density(x))
    }
}

#[derive(Clone, Copy)]
enum Side {
    /// The set sits at the right end of the piece.
    Left,
    Right,
    Both,
}

#[derive(Clone, Copy)]
struct Piece {
    start: f64,
    end: f64,
    side: Side,
}

impl Piece {
    fn tau_max(&self) -> f64 {
        match self.side {
            Side::Both => 0.5 * (self.end - self.start),
            _ => self.end - self.start,
        }
    }
}

/// Proposal for the boundary variable, an even mixture of: uniform on the
/// ambient range; a [`Scale`]-distributed distance to the set inside a
/// uniformly chosen gap; uniform on `{t <= 2 tau_lo}`.
struct GapSampler<'a> {
    e: &'a IntervalSet,
    lo: f64,
    length: f64,
    pieces: Vec<Piece>,
    eligible: Vec<usize>,
    tau_lo: f64,
    core: Vec<(f64, f64)>,
    core_cum: Vec<f64>,
}

impl<'a> GapSampler<'a> {
    fn new(e: &'a IntervalSet, tau_lo: f64) -> Self {
        let ivs = e.intervals();
        let mut pieces = Vec::new();
        let (lo, length) = match e.ambient() {
            Ambient::Segment { lo, hi } => {
                pieces.push(Piece { start: lo, end: ivs[0].0, side: Side::Left });
                for w in ivs.windows(2) {
                    pieces.push(Piece { start: w[0].1, end: w[1].0, side: Side::Both });
                }
                pieces.push(Piece { start: ivs[ivs.len() - 1].1, end: hi, side: Side::Right });
                (lo, hi - lo)
            }
            Ambient::Circle { period } => {
                for w in ivs.windows(2) {
                    pieces.push(Piece { start: w[0].1, end: w[1].0, side: Side::Both });
                }
                pieces.push(Piece { start: ivs[ivs.len() - 1].1, end: ivs[0].0 + period, side: Side::Both });
                (ivs[0].0, period)
            }
        };
        pieces.retain(|p| p.end > p.start);
        let eligible = (0..pieces.len()).filter(|&i| pieces[i].tau_max() > 2.0 * tau_lo).collect();
        let r = 2.0 * tau_lo;
        let mut core: Vec<(f64, f64)> = Vec::new();
        for &(a, b) in ivs {
            let (mut a, mut b) = (a - r, b + r);
            if let Ambient::Segment { lo, hi } = e.ambient() {
                a = a.max(lo);
                b = b.min(hi);
            }
            match core.last_mut() {
                Some(last) if a <= last.1 => last.1 = last.1.max(b),
                _ => core.push((a, b)),
            }
        }
        let core_cum = core
            .iter()
            .scan(0.0, |acc, (a, b)| {
                *acc += b - a;
                Some(*acc)
            })
            .collect();
        GapSampler { e, lo, length, pieces, eligible, tau_lo, core, core_cum }
    }

    fn core_length(&self) -> f64 {
        self.core_cum[self.core_cum.len() - 1]
    }

    fn gap_density(&self, x: f64) -> f64 {
        if self.eligible.is_empty() {
            return 0.0;
        }
        let j = self.pieces.partition_point(|p| p.end < x);
        let Some(p) = self.pieces.get(j).filter(|p| p.start <= x) else {
            return 0.0;
        };
        let tau = match p.side {
            Side::Left => p.end - x,
            Side::Right => x - p.start,
            Side::Both => (x - p.start).min(p.end - x),
        };
        let tm = p.tau_max();
        if tm <= 2.0 * self.tau_lo {
            return 0.0;
        }
        let half = if matches!(p.side, Side::Both) { 0.5 } else { 1.0 };
        half * Scale::new(self.tau_lo, tm, 0.0).density(tau) / self.eligible.len() as f64
    }

    /// `(t(x), proposal density at x)`.
    fn sample(&self, rng: &mut ChaCha8Rng) -> (f64, f64) {
        let pick = rng.random_range(0..3);
        let x = if pick == 0 || (pick == 1 && self.eligible.is_empty()) {
            self.lo + self.length * rng.random::<f64>()
        } else if pick == 2 {
            let v = self.core_length() * rng.random::<f64>();
            let j = self.core_cum.partition_point(|&c| c < v).min(self.core.len() - 1);
            let (a, b) = self.core[j];
            a + (b - a) * rng.random::<f64>()
        } else {
            let p = self.pieces[self.eligible[rng.random_range(0..self.eligible.len())]];
            let tau = Scale::new(self.tau_lo, p.tau_max(), 0.0).sample(rng);
            match p.side {
                Side::Left => p.end - tau,
                Side::Right => p.start + tau,
                Side::Both if rng.random::<bool>() => p.start + tau,
                Side::Both => p.end - tau,
            }
        };
        let t = self.e.distance(x);
        let uniform = if self.eligible.is_empty() { 2.0 } else { 1.0 };
        let core = if t <= 2.0 * self.tau_lo { 1.0 / self.core_length() } else { 0.0 };
        (t, (uniform / self.length + self.gap_density(x) + core) / 3.0)
    }
}

fn integrand(case: ChainCase, alpha: f64, u: f64, x1: f64, x2: f64, x3: f64, t: f64) -> f64 {
    let (q, h) = match case {
        ChainCase::Transversal => (x2 * x2, t),
        ChainCase::Ctangential => (x2, t * t),
        ChainCase::TotallyReal => (0.0, t),
    };
    x1.powf(1.0 - alpha) * (u + x1 + q + x3 * x3 + h).powi(-4)
}

struct Samplers {
    x1: LogMix,
    x2: LogMix,
    x3: LogMix,
}

impl Samplers {
    fn new(case: ChainCase, alpha: f64, u: f64) -> Self {
        let x2 = match case {
            ChainCase::Ctangential => LogMix::new(1e-2 * u),
            _ => LogMix::new(1e-2 * u.sqrt()),
        };
        Samplers {
            // matches x1^{1-α} near zero so the weights stay bounded
            x1: LogMix::singular(1e-2 * u, (alpha - 1.0).clamp(0.0, 0.9)),
            x2,
            x3: LogMix::new(1e-2 * u.sqrt()),
        }
    }

    /// One importance-weighted draw of the inner variables.
    fn draw(&self, case: ChainCase, rng: &mut ChaCha8Rng) -> (f64, f64, f64, f64) {
        let (x1, q1) = self.x1.sample(rng);
        let (x2, q2) = if case == ChainCase::TotallyReal { (0.0, 1.0) } else { self.x2.sample(rng) };
        let (x3, q3) = self.x3.sample(rng);
        (x1, x2, x3, q1 * q2 * q3)
    }
}

fn mean_and_stderr(sum: f64, sum_sq: f64, n: usize) -> (f64, f64) {
    let nf = n as f64;
    let mean = sum / nf;
    let var = (sum_sq / nf - mean * mean).max(0.0);
    (mean, (var / nf).sqrt())
}

const MAX_REL_STDERR: f64 = 0.05;

/// Monte-Carlo values of the full integral with `t = dist(x4, E)` over the
/// set's ambient range, compared with the reduced chain at each `u`.
pub fn chain_crosscheck_4d(case: ChainCase, e: &IntervalSet, alpha: f64, u_samples: &[f64], mc_budget: usize, seed: u64) -> Result<CrosscheckReport> {
    if mc_budget < 1_000_000 {
        return Err(Error::Invalid(format!("Monte-Carlo budget {mc_budget} below 1e6")));
    }
    if u_samples.is_empty() || u_samples.iter().any(|&u| !(u > 0.0 && u < 1.0)) {
        return Err(Error::DegenerateGrid("u samples must lie in (0, 1)".into()));
    }
    let d = measured_dimension(e)?;
    let mut report = CrosscheckReport {
        case,
        alpha,
        d,
        u: u_samples.to_vec(),
        full: Vec::new(),
        full_stderr: Vec::new(),
        chain: Vec::new(),
        ratios: Vec::new(),
        band: 0.0,
    };
    for (i, &u) in u_samples.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(i as u64));
        let inner = Samplers::new(case, alpha, u);
        let tau_lo = match case {
            ChainCase::Ctangential => 1e-2 * u.sqrt(),
            _ => 1e-2 * u,
        };
        let outer = GapSampler::new(e, tau_lo);
        let (mut s, mut s2) = (0.0, 0.0);
        for _ in 0..mc_budget {
            let (x1, x2, x3, q) = inner.draw(case, &mut rng);
            let (t, q4) = outer.sample(&mut rng);
            let w = integrand(case, alpha, u, x1, x2, x3, t) / (q * q4);
            s += w;
            s2 += w * w;
        }
        let (m, se) = mean_and_stderr(s, s2, mc_budget);
        if se > MAX_REL_STDERR * m {
            return Err(Error::McVariance(se / m));
        }
        let full = u * u * m;
        let chain = chain_value(case, d, alpha, u, 1e-10)?;
        report.full.push(full);
        report.full_stderr.push(u * u * se);
        report.chain.push(chain);
        report.ratios.push(full / chain);
    }
    let (lo, hi) = report.ratios.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &r| (lo.min(r), hi.max(r)));
    report.band = hi / lo;
    Ok(report)
}

/// Degenerate control: the same inner sampler with `t ≡ t_const` and
/// `x4 ∈ [0, 1]`, against tensor Gauss–Legendre quadrature in logarithmic
/// variables.
pub fn constant_t_control(case: ChainCase, alpha: f64, t_const: f64, u: f64, mc_budget: usize, seed: u64) -> Result<ControlReport> {
    if !(alpha < 2.0) {
        return Err(Error::Invalid(format!("alpha {alpha} makes x1^(1-alpha) non-integrable")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let inner = Samplers::new(case, alpha, u);
    let (mut s, mut s2) = (0.0, 0.0);
    for _ in 0..mc_budget {
        let (x1, x2, x3, q) = inner.draw(case, &mut rng);
        let w = integrand(case, alpha, u, x1, x2, x3, t_const) / q;
        s += w;
        s2 += w * w;
    }
    let (m, se) = mean_and_stderr(s, s2, mc_budget);

    // nodes in x = e^y on [1e-14, 1], eight per decade
    let a: f64 = 1e-14;
    let mut nodes: Vec<(f64, f64)> = Vec::new();
    for dec in 0..14 {
        let ya = a.ln() + dec as f64 * std::f64::consts::LN_10;
        for (y, w) in gauss_legendre_on(8, ya, ya + std::f64::consts::LN_10) {
            nodes.push((y.exp(), w * y.exp()));
        }
    }
    let x2_nodes: Vec<(f64, f64)> = if case == ChainCase::TotallyReal { vec![(0.0, 1.0)] } else { nodes.clone() };
    let mut total = 0.0;
    for &(x3, w3) in &nodes {
        for &(x2, w2) in &x2_nodes {
            // x1 below the first node: x1^{1-α} times the value at x1 = 0
            let mut acc = a.powf(2.0 - alpha) / (2.0 - alpha) * integrand(case, 1.0, u, 0.0, x2, x3, t_const);
            for &(x1, w1) in &nodes {
                acc += w1 * integrand(case, alpha, u, x1, x2, x3, t_const);
            }
            total += w3 * w2 * acc;
        }
    }
    Ok(ControlReport {
        monte_carlo: u * u * m,
        stderr: u * u * se,
        quadrature: u * u * total,
    })
}
