use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use critcyc::capacity::{
    ball_measure_profile, energy_sweep_csv, natural_energy, natural_product_measure,
    CapacityCase, FiberKernel, RieszKernelParams,
};
use critcyc::constructions::{f_exp, outer_surrogate, psi_derivative_bound, BumpFunction, OuterWeight, PsiSeries};
use critcyc::cyclicity::{
    chain_crosscheck_4d, chain_verify, estimate_critical_index, layer_cake_check, measured_dimension,
    opt_approximant_distance, quotient_norm_sweep, ChainCase, DilationSweep,
};
use critcyc::fit::{linear_fit, logspace};
use critcyc::geometry::CurveChart;
use critcyc::sets::{fat_cantor, kset_check, CantorSpec, IntervalSet, KSetOptions};
use critcyc::{BallPoint, Complex64, PowerSeries};

use crate::config::{Command, Config, Failure};

/// What a command hands back to the runner.
pub struct Out {
    pub csv: String,
    pub result: Value,
    pub surrogate: Option<String>,
    pub truncation: Option<String>,
    /// Set when a stability flag tripped; artifacts are still written.
    pub unstable: Option<String>,
}

impl Out {
    fn new(csv: String, result: Value) -> Self {
        Out { csv, result, surrogate: None, truncation: None, unstable: None }
    }

    fn surrogate(mut self, s: impl Into<String>) -> Self {
        self.surrogate = Some(s.into());
        self
    }

    fn truncation(mut self, s: impl Into<String>) -> Self {
        self.truncation = Some(s.into());
        self
    }
}

pub fn run(cfg: &Config) -> Result<Out, Failure> {
    match cfg.command {
        Command::CantorBuild => cantor_build(cfg),
        Command::MeasureProfile => measure_profile(cfg),
        Command::KsetCheck => kset(cfg),
        Command::CapacitySweep => capacity_sweep(cfg),
        Command::CriticalAlpha => critical_alpha(cfg),
        Command::ConstructPsi => construct_psi(cfg),
        Command::ConstructOuter => construct_outer(cfg),
        Command::Bump => bump(cfg),
        Command::ChainVerify => chain(cfg),
        Command::ChainCrosscheck => crosscheck(cfg),
        Command::DilationSweep => dilation_sweep(cfg),
        Command::Approximant => approximant(cfg),
        Command::Layercake => layercake(cfg),
        Command::FullReport => full_report(cfg),
    }
}

/// Typed parameters: defaults overlaid with the config/flag overrides.
fn params<T: Serialize + DeserializeOwned + Default>(cfg: &Config) -> Result<T, Failure> {
    let mut base = serde_json::to_value(T::default())?;
    if let Value::Object(m) = &mut base {
        for (k, v) in &cfg.params {
            m.insert(k.clone(), v.clone());
        }
    }
    serde_json::from_value(base).map_err(|e| Failure::Validation(format!("{} parameters: {e}", cfg.command.name())))
}

fn resolution_u32(cfg: &Config, default: u32) -> Result<u32, Failure> {
    match cfg.resolution {
        None => Ok(default),
        Some(r) => u32::try_from(r).map_err(|_| Failure::Validation(format!("resolution {r} is too large"))),
    }
}

fn resolution_usize(cfg: &Config, default: usize) -> Result<usize, Failure> {
    match cfg.resolution {
        None => Ok(default),
        Some(r) => usize::try_from(r).map_err(|_| Failure::Validation(format!("resolution {r} is too large"))),
    }
}

fn to_json<T: Serialize>(v: &T) -> Result<Value, Failure> {
    Ok(serde_json::to_value(v)?)
}

fn cantor(lambda: f64, depth: u32, base: (f64, f64)) -> Result<CantorSpec, Failure> {
    Ok(CantorSpec::new(lambda, depth, base)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum SetKind {
    Cantor,
    FatCantor,
    Interval,
}

fn build_set(kind: SetKind, lambda: f64, depth: u32, base: (f64, f64)) -> Result<IntervalSet, Failure> {
    Ok(match kind {
        SetKind::Cantor => cantor(lambda, depth, base)?.build()?,
        SetKind::FatCantor => fat_cantor(depth, base)?,
        SetKind::Interval => IntervalSet::on_segment(vec![base], base.0, base.1)?,
    })
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct CantorParams {
    lambda: f64,
    depth: u32,
    base: (f64, f64),
}

impl Default for CantorParams {
    fn default() -> Self {
        CantorParams { lambda: 1.0 / 3.0, depth: 4, base: (0.0, 1.0) }
    }
}

fn cantor_build(cfg: &Config) -> Result<Out, Failure> {
    let mut p: CantorParams = params(cfg)?;
    p.depth = resolution_u32(cfg, p.depth)?;
    let spec = cantor(p.lambda, p.depth, p.base)?;
    let e = spec.build()?;
    let mut csv = String::from("index,a,b\n");
    for (i, (a, b)) in e.intervals().iter().enumerate() {
        csv.push_str(&format!("{i},{a},{b}\n"));
    }
    Ok(Out::new(
        csv,
        json!({
            "count": e.len(),
            "intervals": e.intervals(),
            "total_length": e.total_length(),
            "dimension": spec.dimension(),
        }),
    ))
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct ProfileParams {
    lambda: f64,
    depth: u32,
    base: (f64, f64),
    /// Window of the fit; defaults to `[|I_{depth-2}|, 0.1 |base|]`.
    t_min: Option<f64>,
    t_max: Option<f64>,
    points: usize,
}

impl Default for ProfileParams {
    fn default() -> Self {
        ProfileParams { lambda: 1.0 / 3.0, depth: 12, base: (0.0, 1.0), t_min: None, t_max: None, points: 25 }
    }
}

fn measure_profile(cfg: &Config) -> Result<Out, Failure> {
    let mut p: ProfileParams = params(cfg)?;
    p.depth = resolution_u32(cfg, p.depth)?;
    let spec = cantor(p.lambda, p.depth, p.base)?;
    let t_min = p.t_min.unwrap_or_else(|| spec.level_length(p.depth.saturating_sub(2)));
    let t_max = p.t_max.unwrap_or(0.1 * spec.base_length());
    if !(t_min > 0.0 && t_min < t_max) || p.points < 2 {
        return Err(Failure::Validation(format!("need 0 < t_min < t_max and two points, got [{t_min}, {t_max}]")));
    }
    let profile = spec.build()?.measure_profile(&logspace(t_min, t_max, p.points))?;
    Ok(Out::new(
        profile.to_csv(),
        json!({
            "slope": profile.fit.slope,
            "fit": profile.fit,
            "predicted_slope": 1.0 - spec.dimension(),
            "window": [t_min, t_max],
        }),
    ))
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct KsetParams {
    set: SetKind,
    lambda: f64,
    depth: u32,
    base: (f64, f64),
    /// Defaults to the finest generated length `|I_depth|`.
    floor: Option<f64>,
    probe_decades: f64,
    growth_threshold: f64,
}

impl Default for KsetParams {
    fn default() -> Self {
        let o = KSetOptions::new(1.0);
        KsetParams {
            set: SetKind::Cantor,
            lambda: 1.0 / 3.0,
            depth: 12,
            base: (0.0, 1.0),
            floor: None,
            probe_decades: o.probe_decades,
            growth_threshold: o.growth_threshold,
        }
    }
}

fn kset(cfg: &Config) -> Result<Out, Failure> {
    let mut p: KsetParams = params(cfg)?;
    p.depth = resolution_u32(cfg, p.depth)?;
    let e = build_set(p.set, p.lambda, p.depth, p.base)?;
    let floor = match p.floor {
        Some(f) => f,
        None => cantor(p.lambda, p.depth, p.base)?.level_length(p.depth),
    };
    let opts = KSetOptions { floor, probe_decades: p.probe_decades, growth_threshold: p.growth_threshold };
    let rep = kset_check(&e, opts)?;
    let csv = format!(
        "floor,constant,coarse_constant,growth,verdict\n{},{},{},{},{}\n",
        rep.floor,
        rep.constant,
        rep.coarse_constant,
        rep.growth,
        if rep.pass { "PASS" } else { "FAIL" }
    );
    let mut result = to_json(&rep)?;
    result["verdict"] = json!(if rep.pass { "PASS" } else { "FAIL" });
    Ok(Out::new(csv, result))
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct SweepParams {
    lambda: f64,
    depth: u32,
    base: (f64, f64),
    case: CapacityCase,
    alphas: Vec<f64>,
    min_level: u32,
    /// Defaults to `depth`.
    max_level: Option<u32>,
}

impl Default for SweepParams {
    fn default() -> Self {
        SweepParams {
            lambda: 1.0 / 3.0,
            depth: 13,
            base: (0.0, 1.0),
            case: CapacityCase::Transversal,
            alphas: vec![0.6, 0.9, 1.2, 1.5, 1.8],
            min_level: 5,
            max_level: None,
        }
    }
}

fn capacity_sweep(cfg: &Config) -> Result<Out, Failure> {
    let mut p: SweepParams = params(cfg)?;
    let max_level = match cfg.resolution {
        Some(_) => resolution_u32(cfg, 0)?,
        None => p.max_level.unwrap_or(p.depth),
    };
    p.depth = p.depth.max(max_level);
    if max_level < p.min_level + 2 {
        return Err(Failure::Validation(format!("levels {}..{max_level} give fewer than three energies", p.min_level)));
    }
    let spec = cantor(p.lambda, p.depth, p.base)?;
    let mut rows = Vec::new();
    let mut slopes = Vec::new();
    for &alpha in &p.alphas {
        let k = RieszKernelParams::new(alpha)?;
        let fiber = match p.case {
            CapacityCase::Product => Some(FiberKernel::new(k, spec.level_length(max_level) * 0.5, 24)?),
            _ => None,
        };
        let mut es = Vec::new();
        for level in p.min_level..=max_level {
            let e = natural_energy(&spec, level, p.case, k, fiber.as_ref())?;
            rows.push((alpha, level, e));
            es.push(e);
        }
        let xs: Vec<f64> = (p.min_level..max_level).map(|m| spec.level_length(m).ln()).collect();
        let ys: Vec<f64> = es.windows(2).map(|w| (w[1] - w[0]).abs().max(1e-300).ln()).collect();
        let slope = linear_fit(&xs, &ys).map(|f| f.slope);
        slopes.push(json!({ "alpha": alpha, "increment_slope": slope }));
    }
    Ok(Out::new(
        energy_sweep_csv(&rows),
        json!({
            "case": p.case,
            "levels": [p.min_level, max_level],
            "increment_slopes": slopes,
            "predicted_alpha_c": p.case.predicted(spec.dimension()),
        }),
    )
    .truncation(format!("levels={}..{max_level}", p.min_level)))
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct CriticalParams {
    lambda: f64,
    depth: u32,
    base: (f64, f64),
    case: ChainCase,
}

impl Default for CriticalParams {
    fn default() -> Self {
        CriticalParams { lambda: 1.0 / 3.0, depth: 14, base: (0.0, 1.0), case: ChainCase::Transversal }
    }
}

fn critical_row(r: &critcyc::cyclicity::CriticalIndexReport) -> String {
    format!("{},{},{},{},{},{}\n", r.case.name(), r.d, r.predicted, r.cyclic_side, r.capacity_side, r.gap)
}

const CRITICAL_HEADER: &str = "case,d,predicted,cyclic_side,capacity_side,gap\n";

fn critical_alpha(cfg: &Config) -> Result<Out, Failure> {
    let mut p: CriticalParams = params(cfg)?;
    p.depth = resolution_u32(cfg, p.depth)?;
    let spec = cantor(p.lambda, p.depth, p.base)?;
    let rep = estimate_critical_index(&spec, p.case)?;
    Ok(Out::new(format!("{CRITICAL_HEADER}{}", critical_row(&rep)), to_json(&rep)?).truncation(format!("depth={}", p.depth)))
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct PsiParams {
    lambda: f64,
    depth: u32,
    base: (f64, f64),
    k_max: u32,
    beta: f64,
    /// Point of the set approached along the ray `(1-δ) ζ`, `ζ = (e^{is}, 0)`.
    s: Option<f64>,
    deltas: Vec<f64>,
}

impl Default for PsiParams {
    fn default() -> Self {
        PsiParams {
            lambda: 1.0 / 3.0,
            depth: 10,
            base: (0.0, 1.0),
            k_max: 30,
            beta: 2.0,
            s: None,
            deltas: vec![1e-1, 1e-2, 1e-3, 1e-4],
        }
    }
}

fn construct_psi(cfg: &Config) -> Result<Out, Failure> {
    let mut p: PsiParams = params(cfg)?;
    p.k_max = resolution_u32(cfg, p.k_max)?;
    let spec = cantor(p.lambda, p.depth, p.base)?;
    let ps = PsiSeries::from_cantor(&spec, p.k_max)?;
    let f = f_exp(&ps, p.beta)?;
    let s = p.s.unwrap_or(spec.base.0);
    let zeta = CurveChart::MsFamily.point(&[s, 0.0])?;
    let mut csv = String::from("delta,distance,re_psi,im_psi,abs_f,re_psi_over_log,scaled_d1,scaled_d2\n");
    let mut rows = Vec::new();
    for &delta in &p.deltas {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Failure::Validation(format!("delta {delta} outside (0, 1)")));
        }
        let z = zeta.scale(1.0 - delta);
        let dist = ps.distance_to_support(&z);
        let v = ps.eval(&z);
        let ratio = v.re / (1.0 / delta).ln();
        let d1 = psi_derivative_bound(&ps, &z, [1, 0], dist)?.scaled;
        let d2 = psi_derivative_bound(&ps, &z, [2, 0], dist)?.scaled;
        let fz = f(&z).norm();
        csv.push_str(&format!("{delta:e},{dist:e},{},{},{fz:e},{ratio},{d1},{d2}\n", v.re, v.im));
        rows.push(ratio);
    }
    let lo = rows.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = rows.iter().cloned().fold(0.0, f64::max);
    Ok(Out::new(
        csv,
        json!({
            "counts": ps.counts(),
            "tail_sum_after_k_max": ps.tail_sum(p.k_max),
            "log_band": if lo > 0.0 { Some(hi / lo) } else { None },
        }),
    )
    .surrogate(format!("psi(lambda={}, depth={}, beta={})", p.lambda, p.depth, p.beta))
    .truncation(format!("k_max={}", p.k_max)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum OuterWeightKind {
    /// `|1 - e^{iθ}|`, whose outer function is `1 - z`.
    OneMinusZ,
    /// `dist(θ/2π, E)^power` for the Cantor set `E` in `[0, 1]`.
    CantorDistance,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct OuterParams {
    weight: OuterWeightKind,
    lambda: f64,
    depth: u32,
    power: f64,
    /// Defaults to `1e-6` for the Cantor weight, which vanishes on `E`.
    floor: Option<f64>,
    nodes: usize,
    radii: Vec<f64>,
}

impl Default for OuterParams {
    fn default() -> Self {
        OuterParams {
            weight: OuterWeightKind::OneMinusZ,
            lambda: 1.0 / 3.0,
            depth: 8,
            power: 2.0,
            floor: None,
            nodes: 1 << 14,
            radii: vec![0.0, 0.3, 0.5, 0.7, 0.9],
        }
    }
}

fn construct_outer(cfg: &Config) -> Result<Out, Failure> {
    let mut p: OuterParams = params(cfg)?;
    p.nodes = resolution_usize(cfg, p.nodes)?;
    let e = cantor(p.lambda, p.depth, (0.0, 1.0))?.build()?;
    let weight: Box<dyn Fn(f64) -> f64 + Sync> = match p.weight {
        OuterWeightKind::OneMinusZ => Box::new(|t: f64| (Complex64::new(1.0, 0.0) - Complex64::from_polar(1.0, t)).norm()),
        OuterWeightKind::CantorDistance => {
            let power = p.power;
            let e = e.clone();
            Box::new(move |t: f64| e.distance(t / std::f64::consts::TAU).powf(power))
        }
    };
    let floor = match p.weight {
        OuterWeightKind::CantorDistance => Some(p.floor.unwrap_or(1e-6)),
        OuterWeightKind::OneMinusZ => p.floor,
    };
    let w = OuterWeight { weight: weight.as_ref(), floor };
    let mut csv = String::from("r,re,im,abs,reference_error\n");
    let mut max_err: Option<f64> = None;
    for &r in &p.radii {
        let z = Complex64::new(r, 0.0);
        let v = outer_surrogate(&w, z, p.nodes)?;
        let err = match p.weight {
            OuterWeightKind::OneMinusZ => Some((v - (1.0 - z)).norm()),
            OuterWeightKind::CantorDistance => None,
        };
        if let Some(x) = err {
            max_err = Some(max_err.map_or(x, |m: f64| m.max(x)));
        }
        let err_s = err.map(|x| format!("{x:e}")).unwrap_or_default();
        csv.push_str(&format!("{r},{},{},{},{err_s}\n", v.re, v.im, v.norm()));
    }
    Ok(Out::new(csv, json!({ "weight": p.weight, "max_reference_error": max_err }))
        .surrogate("outer(midpoint rule)")
        .truncation(format!("nodes={}", p.nodes)))
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct BumpParams {
    lambda: f64,
    depth: u32,
    /// Use these points as `E` instead of a Cantor set.
    points: Option<Vec<f64>>,
    epsilon: f64,
    grid: usize,
}

impl Default for BumpParams {
    fn default() -> Self {
        BumpParams { lambda: 1.0 / 3.0, depth: 6, points: None, epsilon: 0.5, grid: 1001 }
    }
}

fn bump(cfg: &Config) -> Result<Out, Failure> {
    let mut p: BumpParams = params(cfg)?;
    p.grid = resolution_usize(cfg, p.grid)?;
    if p.grid < 2 {
        return Err(Failure::Validation("grid needs at least two points".into()));
    }
    let e = match &p.points {
        Some(pts) => IntervalSet::points(pts, 0.0, 1.0)?,
        None => cantor(p.lambda, p.depth, (0.0, 1.0))?.build()?,
    };
    let b = BumpFunction::new(&e, p.epsilon)?;
    let mut csv = String::from("x,f,distance\n");
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for i in 0..p.grid {
        let x = i as f64 / (p.grid - 1) as f64;
        let (f, d) = (b.eval(x), e.distance(x));
        csv.push_str(&format!("{x},{f:e},{d:e}\n"));
        if d > 0.0 {
            let r = f / d.powf(2.0 + p.epsilon);
            lo = lo.min(r);
            hi = hi.max(r);
        }
    }
    Ok(Out::new(csv, json!({ "gaps": b.gaps.len(), "ratio_min": lo, "ratio_max": hi, "epsilon": p.epsilon })))
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct ChainParams {
    case: ChainCase,
    d: f64,
    alpha: f64,
    u_min: f64,
    u_max: f64,
    points: usize,
    rel_tol: f64,
}

impl Default for ChainParams {
    fn default() -> Self {
        let d = 2f64.ln() / 3f64.ln();
        ChainParams { case: ChainCase::Transversal, d, alpha: 2.0 - d, u_min: 1e-6, u_max: 1e-2, points: 17, rel_tol: 1e-10 }
    }
}

fn chain(cfg: &Config) -> Result<Out, Failure> {
    let mut p: ChainParams = params(cfg)?;
    p.points = resolution_usize(cfg, p.points)?;
    if p.points < 2 || !(p.u_min > 0.0 && p.u_min < p.u_max) {
        return Err(Failure::Validation("need 0 < u_min < u_max and at least two points".into()));
    }
    let rep = chain_verify(p.case, p.d, p.alpha, &logspace(p.u_min, p.u_max, p.points), p.rel_tol)?;
    Ok(Out::new(
        rep.to_csv(),
        json!({
            "case": rep.case,
            "d": rep.d,
            "alpha": rep.alpha,
            "slope": rep.fit.slope,
            "fit": rep.fit,
            "predicted_slope": rep.predicted_slope,
            "predicted_alpha_c": p.case.predicted_alpha_c(p.d),
        }),
    ))
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct CrosscheckParams {
    case: ChainCase,
    set: SetKind,
    lambda: f64,
    depth: u32,
    base: (f64, f64),
    /// Defaults to the predicted threshold at the measured dimension.
    alpha: Option<f64>,
    u: Vec<f64>,
    budget: usize,
}

impl Default for CrosscheckParams {
    fn default() -> Self {
        CrosscheckParams {
            case: ChainCase::Transversal,
            set: SetKind::Cantor,
            lambda: 1.0 / 3.0,
            depth: 12,
            base: (0.0, 1.0),
            alpha: None,
            u: vec![1e-2, 1e-3, 1e-4],
            budget: 1_000_000,
        }
    }
}

fn crosscheck(cfg: &Config) -> Result<Out, Failure> {
    let seed = cfg.require_seed()?;
    let mut p: CrosscheckParams = params(cfg)?;
    p.budget = resolution_usize(cfg, p.budget)?;
    let e = build_set(p.set, p.lambda, p.depth, p.base)?;
    let alpha = match p.alpha {
        Some(a) => a,
        None => p.case.predicted_alpha_c(measured_dimension(&e)?),
    };
    let rep = chain_crosscheck_4d(p.case, &e, alpha, &p.u, p.budget, seed)?;
    Ok(Out::new(rep.to_csv(), to_json(&rep)?).truncation(format!("budget={}", p.budget)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum Function {
    One,
    Z1,
    OneMinusZ1,
    /// `exp(-beta ψ)` for the Cantor set in the parameters.
    ExpPsi,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct FunctionParams {
    function: Function,
    lambda: f64,
    depth: u32,
    k_max: u32,
    beta: f64,
}

impl Default for FunctionParams {
    fn default() -> Self {
        FunctionParams { function: Function::OneMinusZ1, lambda: 1.0 / 3.0, depth: 10, k_max: 30, beta: 2.0 }
    }
}

impl FunctionParams {
    fn series(&self, degree: usize) -> Result<PowerSeries, Failure> {
        let c = |x: f64| Complex64::new(x, 0.0);
        Ok(match self.function {
            Function::One => PowerSeries::one(degree),
            Function::Z1 => PowerSeries::monomial(1, 0, c(1.0), degree),
            Function::OneMinusZ1 => PowerSeries::from_terms(degree, &[(0, 0, c(1.0)), (1, 0, c(-1.0))]),
            Function::ExpPsi => {
                if !(self.beta > 0.0) {
                    return Err(Failure::Validation(format!("beta {} must be positive", self.beta)));
                }
                let ps = PsiSeries::from_cantor(&cantor(self.lambda, self.depth, (0.0, 1.0))?, self.k_max)?;
                ps.taylor(degree).scale(c(-self.beta)).exp(degree)
            }
        })
    }

    fn surrogate(&self) -> String {
        match self.function {
            Function::ExpPsi => format!("exp(-{} psi), lambda={}, depth={}, k_max={}", self.beta, self.lambda, self.depth, self.k_max),
            Function::One => "1".into(),
            Function::Z1 => "z1".into(),
            Function::OneMinusZ1 => "1 - z1".into(),
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct DilationParams {
    function: Function,
    lambda: f64,
    depth: u32,
    k_max: u32,
    beta: f64,
    alpha: f64,
    radii: Vec<f64>,
    degree: usize,
}

impl Default for DilationParams {
    fn default() -> Self {
        let f = FunctionParams::default();
        DilationParams {
            function: f.function,
            lambda: f.lambda,
            depth: f.depth,
            k_max: f.k_max,
            beta: f.beta,
            alpha: 0.9,
            radii: vec![0.5, 0.6, 0.7, 0.8, 0.9],
            degree: 60,
        }
    }
}

fn dilation_sweep(cfg: &Config) -> Result<Out, Failure> {
    let mut p: DilationParams = params(cfg)?;
    p.degree = resolution_usize(cfg, p.degree)?;
    let fp = FunctionParams { function: p.function, lambda: p.lambda, depth: p.depth, k_max: p.k_max, beta: p.beta };
    let f = fp.series(p.degree)?;
    let rep = quotient_norm_sweep(&f, &DilationSweep::new(p.radii.clone(), p.alpha, p.degree)?)?;
    let unstable = (!rep.truncation_stable).then(|| {
        let bad: Vec<f64> = rep.rows.iter().filter(|w| !w.stable).map(|w| w.r).collect();
        format!("truncation unstable: degree {} and {} disagree at r = {bad:?}", p.degree, p.degree / 2)
    });
    let mut out = Out::new(rep.to_csv(), to_json(&rep)?)
        .surrogate(fp.surrogate())
        .truncation(format!("degree={}", p.degree));
    out.unstable = unstable;
    Ok(out)
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct ApproximantParams {
    function: Function,
    lambda: f64,
    depth: u32,
    k_max: u32,
    beta: f64,
    alpha: f64,
    max_degree: usize,
    /// Truncation degree of `f` itself when it is not a polynomial.
    series_degree: usize,
}

impl Default for ApproximantParams {
    fn default() -> Self {
        let f = FunctionParams::default();
        ApproximantParams {
            function: f.function,
            lambda: f.lambda,
            depth: f.depth,
            k_max: f.k_max,
            beta: f.beta,
            alpha: 1.0,
            max_degree: 10,
            series_degree: 12,
        }
    }
}

fn approximant(cfg: &Config) -> Result<Out, Failure> {
    let mut p: ApproximantParams = params(cfg)?;
    p.max_degree = resolution_usize(cfg, p.max_degree)?;
    let fp = FunctionParams { function: p.function, lambda: p.lambda, depth: p.depth, k_max: p.k_max, beta: p.beta };
    let degree = match p.function {
        Function::ExpPsi => p.series_degree,
        _ => 1,
    };
    let rep = opt_approximant_distance(&fp.series(degree)?, p.alpha, p.max_degree)?;
    let nonincreasing = rep.distances.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-9) + 1e-12);
    let mut result = to_json(&rep)?;
    result["nonincreasing"] = json!(nonincreasing);
    Ok(Out::new(rep.to_csv(), result)
        .surrogate(fp.surrogate())
        .truncation(format!("max_degree={}, series_degree={degree}", p.max_degree)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum Profile {
    /// `(c + t)^{-2}`
    InverseSquare,
    /// `e^{-t}`
    Exp,
    /// `(c + t)^{-1/2}`
    InverseSqrt,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct LayercakeParams {
    points: Vec<f64>,
    profiles: Vec<Profile>,
    offset: f64,
}

impl Default for LayercakeParams {
    fn default() -> Self {
        LayercakeParams {
            points: vec![0.5, 2.0, 2.2, 5.9],
            profiles: vec![Profile::InverseSquare, Profile::Exp, Profile::InverseSqrt],
            offset: 0.01,
        }
    }
}

fn layercake(cfg: &Config) -> Result<Out, Failure> {
    let p: LayercakeParams = params(cfg)?;
    if !(p.offset > 0.0) {
        return Err(Failure::Validation("offset must be positive".into()));
    }
    let c = p.offset;
    let mut csv = String::from("profile,lhs,rhs,relative_gap\n");
    let mut worst = 0.0f64;
    for prof in &p.profiles {
        let r = match prof {
            Profile::InverseSquare => layer_cake_check(&p.points, &|t| (c + t).powi(-2), &|t| -2.0 * (c + t).powi(-3))?,
            Profile::Exp => layer_cake_check(&p.points, &|t| (-t).exp(), &|t| -(-t).exp())?,
            Profile::InverseSqrt => layer_cake_check(&p.points, &|t| (c + t).powf(-0.5), &|t| -0.5 * (c + t).powf(-1.5))?,
        };
        let name = serde_json::to_value(prof)?;
        csv.push_str(&format!("{},{:e},{:e},{:e}\n", name.as_str().unwrap_or_default(), r.lhs, r.rhs, r.relative_gap()));
        worst = worst.max(r.relative_gap());
    }
    Ok(Out::new(csv, json!({ "max_relative_gap": worst })))
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct FullParams {
    lambda: f64,
    depth: u32,
    base: (f64, f64),
    /// Product ball-profile check: level, fiber size and radius window.
    ball_level: u32,
    ball_fiber: usize,
    ball_radii: (f64, f64),
}

impl Default for FullParams {
    fn default() -> Self {
        FullParams { lambda: 1.0 / 3.0, depth: 14, base: (0.0, 1.0), ball_level: 10, ball_fiber: 500, ball_radii: (1e-4, 1e-2) }
    }
}

/// Set, profile, capacity side and chain side, ending in one row per case.
fn full_report(cfg: &Config) -> Result<Out, Failure> {
    let mut p: FullParams = params(cfg)?;
    p.depth = resolution_u32(cfg, p.depth)?;
    let spec = cantor(p.lambda, p.depth, p.base)?;
    let e = spec.build()?;
    let d = measured_dimension(&e)?;
    let mut csv = String::from(CRITICAL_HEADER);
    let mut table = Vec::new();
    for case in ChainCase::ALL {
        let rep = estimate_critical_index(&spec, case)?;
        csv.push_str(&critical_row(&rep));
        table.push(to_json(&rep)?);
    }
    let ball_spec = cantor(p.lambda, p.ball_level, p.base)?;
    let mu = natural_product_measure(&ball_spec, p.ball_level, p.ball_fiber)?;
    let ivs = ball_spec.level_intervals(p.ball_level);
    let centers: Vec<BallPoint> = (0..8)
        .map(|i| CurveChart::MsFamily.point(&[ivs[(i * 131) % ivs.len()].0, -0.3 + 0.08 * i as f64]))
        .collect::<critcyc::Result<_>>()?;
    let (ball_fit, _) = ball_measure_profile(&mu, &centers, &logspace(p.ball_radii.0, p.ball_radii.1, 13))?;
    Ok(Out::new(
        csv,
        json!({
            "set": { "intervals": e.len(), "dimension": spec.dimension(), "measured_dimension": d },
            "critical_alpha": table,
            "product_ball_exponent": { "fitted": ball_fit.slope, "predicted": 0.5 + spec.dimension() },
        }),
    )
    .truncation(format!("depth={}, ball_level={}, ball_fiber={}", p.depth, p.ball_level, p.ball_fiber)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Map;

    fn cfg(command: Command, params: Value) -> Config {
        let params: Map<String, Value> = serde_json::from_value(params).unwrap();
        Config { command, params, seed: None, out: "unused".into(), resolution: None }
    }

    #[test]
    fn unknown_parameters_are_rejected() {
        let r = run(&cfg(Command::CantorBuild, json!({ "depht": 3 })));
        assert!(matches!(r, Err(Failure::Validation(_))));
    }

    #[test]
    fn cantor_build_counts() {
        let out = run(&cfg(Command::CantorBuild, json!({}))).unwrap();
        assert_eq!(out.result["count"], 16);
        assert_eq!(out.csv.lines().count(), 17);
    }

    #[test]
    fn bump_ratio_for_two_points() {
        let out = run(&cfg(Command::Bump, json!({ "points": [0.0, 1.0] }))).unwrap();
        let lo = out.result["ratio_min"].as_f64().unwrap();
        let hi = out.result["ratio_max"].as_f64().unwrap();
        assert!(lo >= 2f64.powf(-2.5) - 1e-9 && hi <= 1.0 + 1e-9, "{lo} {hi}");
    }
}
