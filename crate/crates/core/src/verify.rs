//! Experiments that turn the analytic estimates into measured quantities,
//! plus the check suites used by the command line and the acceptance run.

use std::time::Instant;

use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dyadic::{shifted_lattices, AxisBox, DyadicCube};
use crate::error::{Error, Result};
use crate::exponents::{
    admissibility, decay_thresholds, jeong_lee_polytope, rat, region, scaling_exponent, split_decay_exponent,
    ExponentTriple, MembershipMode, RegionName,
};
use crate::grid::{
    level_sets, lorentz_norm, random_test_function, translate_diff, GridFunction, GridSpec, PowerPyramid,
    TestFunctionKind,
};
use crate::measures::{
    bilinear_sphere_measure, bilinear_sphere_measure_2d, circle_nodes, product_sphere_measure, triangle_measure,
    DiscreteMeasure, MeasureFamily,
};
use crate::operators::{
    adjoint_1, adjoint_2, bessel_multiplier, bilinear_multiplier_apply, continuity_split, exact_adjoint1_pairing,
    exact_adjoint2_pairing, exact_forward_pairing, lacunary_maximal, linearized_adjoint_1, linearized_full,
    sample_multiplier, scale_average, scale_average_at, single_scale_maximal, spectral_translate_diff,
    MultiplierProbe, OperatorConfig,
};
use crate::sparse::{
    build_sparse_family, choose_c0, cz_decompose, linearize, sparse_average_sum, sparse_form, stopping_family,
    verify_sparsity, CubeFamily, SparseCollection, TriplePyramids,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub bound: f64,
    pub pass: bool,
}

impl Check {
    /// Passes when `value ≤ bound`.
    pub fn at_most(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Check { name: name.into(), value, bound, pass: value <= bound }
    }

    /// Passes when `value ≥ bound`.
    pub fn at_least(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Check { name: name.into(), value, bound, pass: value >= bound }
    }

    /// Passes when `value > bound`.
    pub fn above(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Check { name: name.into(), value, bound, pass: value > bound }
    }

    pub fn flag(name: impl Into<String>, ok: bool) -> Self {
        Check { name: name.into(), value: ok as u8 as f64, bound: 1.0, pass: ok }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub suite: String,
    pub pass: bool,
    pub seconds: f64,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    fn finish(suite: &str, start: Instant, checks: Vec<Check>) -> Self {
        SuiteReport {
            suite: suite.to_string(),
            pass: checks.iter().all(|c| c.pass),
            seconds: start.elapsed().as_secs_f64(),
            checks,
        }
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.pass).collect()
    }

    /// CSV rows `suite,check,value,bound,pass`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("suite,check,value,bound,pass\n");
        for c in &self.checks {
            s.push_str(&format!("{},{},{},{},{}\n", self.suite, c.name, c.value, c.bound, c.pass));
        }
        s
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

/// Ordinary least squares `y ≈ slope x + intercept`.
pub fn least_squares(xs: &[f64], ys: &[f64]) -> Result<LinearFit> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::InvalidExperiment("a fit needs at least two points".into()));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidExperiment("abscissae are all equal".into()));
    }
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(LinearFit { slope, intercept: my - slope * mx, r2 })
}

fn recip(x: &num_rational::BigRational) -> f64 {
    let v = x.to_f64().unwrap_or(f64::NAN);
    if v == 0.0 {
        f64::INFINITY
    } else {
        1.0 / v
    }
}

/// `(p, q, r)` as floating exponents (`∞` for a zero reciprocal).
pub fn exponents_f64(x: &ExponentTriple) -> (f64, f64, f64) {
    (recip(&x.inv_p), recip(&x.inv_q), recip(&x.inv_r))
}

fn dilate(f: &GridFunction, t: f64) -> GridFunction {
    let spec = f.spec();
    let c = spec.domain().center();
    GridFunction::from_fn(&spec, |x| {
        let y: Vec<f64> = x.iter().zip(&c).map(|(a, b)| b + (a - b) / t).collect();
        f.eval(&y)
    })
    .expect("same grid")
}

fn boundary_max(f: &GridFunction) -> f64 {
    let spec = f.spec();
    (0..spec.len())
        .filter(|&i| spec.multi_index(i).iter().any(|&m| m == 0 || m + 1 == spec.n))
        .map(|i| f.values[i].abs())
        .fold(0.0, f64::max)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub t_list: Vec<f64>,
    /// `‖L_t(f_t,g_t)‖_r / (‖f_t‖_p ‖g_t‖_q)` with `f_t(x) = f(x/t)`.
    pub ratios: Vec<f64>,
    pub slope: f64,
    pub predicted: f64,
    pub r2: f64,
}

impl ScalingReport {
    pub fn error(&self) -> f64 {
        (self.slope - self.predicted).abs()
    }
}

/// Log-log slope of the normalized output norm under dilation of the inputs
/// about the grid center, against `d (1/r - 1/p - 1/q)`.
pub fn scaling_law_experiment(
    mu: &DiscreteMeasure,
    f: &GridFunction,
    g: &GridFunction,
    x: &ExponentTriple,
    t_list: &[f64],
) -> Result<ScalingReport> {
    if t_list.len() < 2 {
        return Err(Error::InvalidExperiment("scaling fit needs at least two scales".into()));
    }
    let (p, q, r) = exponents_f64(x);
    let mut ratios = Vec::with_capacity(t_list.len());
    for &t in t_list {
        let (ft, gt) = (dilate(f, t), dilate(g, t));
        let out = scale_average_at(&ft, &gt, mu, t)?;
        for (name, v) in [("f", &ft), ("g", &gt), ("output", &out)] {
            if boundary_max(v) > 1e-6 * v.max_abs() {
                return Err(Error::InvalidExperiment(format!("{name} reaches the grid boundary at t = {t}")));
            }
        }
        ratios.push(out.lp_norm(r) / (ft.lp_norm(p) * gt.lp_norm(q)));
    }
    let lx: Vec<f64> = t_list.iter().map(|t| t.ln()).collect();
    let ly: Vec<f64> = ratios.iter().map(|v| v.ln()).collect();
    let fit = least_squares(&lx, &ly)?;
    Ok(ScalingReport {
        t_list: t_list.to_vec(),
        ratios,
        slope: fit.slope,
        predicted: scaling_exponent(x, f.dim).to_f64().unwrap_or(f64::NAN),
        r2: fit.r2,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OperatorKind {
    SingleScale,
    SingleScaleMaximal,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Slot {
    First,
    Second,
    Both,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    /// `|y|` values, strictly decreasing, zero excluded.
    pub abscissae: Vec<f64>,
    pub norms: Vec<f64>,
    pub fitted_eta: f64,
    pub r2: f64,
    /// Norms non-increasing as `|y|` decreases, up to 1% slack.
    pub monotone: bool,
    /// Every norm within the triangle-inequality bound.
    pub triangle_bound_ok: bool,
}

fn apply(kind: OperatorKind, f: &GridFunction, g: &GridFunction, cfg: &OperatorConfig) -> Result<GridFunction> {
    match kind {
        OperatorKind::SingleScale => scale_average(f, g, cfg),
        OperatorKind::SingleScaleMaximal => single_scale_maximal(f, g, cfg),
    }
}

fn abs_fn(f: &GridFunction) -> GridFunction {
    f.with_values(f.values.iter().map(|v| v.abs()).collect())
}

/// `‖Op((I - τ_y) f, g)‖_r` (or in the second slot, or both) over the listed
/// `|y|`, with `y` along the first axis, and the fitted exponent of `|y|`.
pub fn continuity_experiment(
    kind: OperatorKind,
    cfg: &OperatorConfig,
    f: &GridFunction,
    g: &GridFunction,
    x: &ExponentTriple,
    y_list: &[f64],
    which: Slot,
) -> Result<DecayFit> {
    let (_, _, r) = exponents_f64(x);
    let mut ys = Vec::new();
    let mut norms = Vec::new();
    let mut bound_ok = true;
    let mut last = f64::INFINITY;
    for &y in y_list {
        if !(y >= 0.0) || y > cfg.scale_t {
            return Err(Error::Precondition(format!("|y| = {y} must lie in [0, t]")));
        }
        if y >= last {
            return Err(Error::InvalidParameters("y values must be strictly decreasing".into()));
        }
        last = y;
        if y == 0.0 {
            continue;
        }
        let mut v = vec![0.0; f.dim];
        v[0] = y;
        let (f1, g1) = match which {
            Slot::First => (translate_diff(f, &v)?, g.clone()),
            Slot::Second => (f.clone(), translate_diff(g, &v)?),
            Slot::Both => (translate_diff(f, &v)?, translate_diff(g, &v)?),
        };
        let norm = apply(kind, &f1, &g1, cfg)?.lp_norm(r);
        // |Op(a - τa, b)| ≤ Op(|a|, |b|) + Op(|τa|, |b|) for nonnegative weights.
        let fs = match which {
            Slot::Second => vec![abs_fn(f)],
            _ => vec![abs_fn(f), abs_fn(&crate::grid::translate(f, &v))],
        };
        let gs = match which {
            Slot::First => vec![abs_fn(g)],
            _ => vec![abs_fn(g), abs_fn(&crate::grid::translate(g, &v))],
        };
        let rho = r.min(1.0);
        let mut bound = 0.0;
        for a in &fs {
            for b in &gs {
                bound += apply(kind, a, b, cfg)?.lp_norm(r).powf(rho);
            }
        }
        if norm.powf(rho) > bound * (1.0 + 1e-9) {
            bound_ok = false;
        }
        ys.push(y);
        norms.push(norm);
    }
    let lx: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = norms.iter().map(|v| v.max(f64::MIN_POSITIVE).ln()).collect();
    let fit = least_squares(&lx, &ly)?;
    let monotone = norms.windows(2).all(|w| w[1] <= w[0] * 1.01);
    Ok(DecayFit { abscissae: ys, norms, fitted_eta: fit.slope, r2: fit.r2, monotone, triangle_bound_ok: bound_ok })
}

/// Checks the hypotheses of the sparse bound for `x = (1/p, 1/q, 1/r)`:
/// `r ≥ p, q`, `r > 1`, strict improvement, and (where a bounded region is
/// available) interiority in the measure's improving region.
pub fn sparse_hypothesis(family: MeasureFamily, d: usize, x: &ExponentTriple) -> Result<()> {
    let a = admissibility(x);
    if !a.bundle() {
        return Err(Error::InvalidParameters(format!("{x} fails r ≥ p, r ≥ q, r > 1 or strict improvement: {a:?}")));
    }
    let inside = match (family, d) {
        (MeasureFamily::Triangle, d) if d >= 2 => region(RegionName::TriangleLac, d, None)?.contains(x, MembershipMode::Interior),
        (MeasureFamily::Bisphere, d) if d >= 2 => jeong_lee_polytope(d)?.contains(x, MembershipMode::Interior),
        _ => true,
    };
    if !inside {
        return Err(Error::InvalidParameters(format!("{x} is not interior to the improving region of {family:?} at d = {d}")));
    }
    Ok(())
}

/// Nonnegative weight constant on the standard cubes of the given level,
/// with values uniform in `[0, 1]`.
pub fn random_coarse_weight(seed: u64, spec: &GridSpec, level: u32) -> Result<GridFunction> {
    if level > spec.levels() {
        return Err(Error::Resolution(format!("level {level} finer than the grid")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = 1usize << level;
    let vals: Vec<f64> = (0..m.pow(spec.dim as u32)).map(|_| rng.gen_range(0.0..1.0)).collect();
    let shift = spec.levels() - level;
    let values = (0..spec.len())
        .map(|i| {
            let k = spec.multi_index(i).iter().fold(0usize, |acc, &c| acc * m + (c >> shift));
            vals[k]
        })
        .collect();
    GridFunction::new(spec, values)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SparseRatioConfig {
    pub family: MeasureFamily,
    pub dim: usize,
    /// `(1/p, 1/q, 1/r)`.
    pub x: (String, String, String),
    pub trials: usize,
    pub grid_n: usize,
    pub j_min: i32,
    pub j_max: i32,
    pub seed: u64,
    /// Inputs are constant on standard cubes of this level.
    pub coarse_level: u32,
    pub indicator_count: usize,
}

impl SparseRatioConfig {
    /// One-dimensional defaults: 2^10 cells, six lacunary scales.
    pub fn d1(trials: usize, seed: u64) -> Self {
        SparseRatioConfig {
            family: MeasureFamily::Bisphere,
            dim: 1,
            x: ("1/2".into(), "1/2".into(), "1/3".into()),
            trials,
            grid_n: 1024,
            j_min: -8,
            j_max: -3,
            seed,
            coarse_level: 6,
            indicator_count: 4,
        }
    }

    /// Two-dimensional defaults: 256^2 cells, six lacunary scales.
    pub fn d2(trials: usize, seed: u64) -> Self {
        SparseRatioConfig {
            family: MeasureFamily::Bisphere,
            dim: 2,
            x: ("3/5".into(), "3/5".into(), "11/20".into()),
            trials,
            grid_n: 256,
            j_min: -7,
            j_max: -2,
            seed,
            coarse_level: 4,
            indicator_count: 4,
        }
    }

    pub fn triple(&self) -> Result<ExponentTriple> {
        ExponentTriple::parse(&format!("{},{},{}", self.x.0, self.x.1, self.x.2))
    }

    pub fn refined(&self) -> Self {
        SparseRatioConfig { grid_n: 2 * self.grid_n, ..self.clone() }
    }

    pub fn measure(&self) -> Result<DiscreteMeasure> {
        default_measure(self.family, self.dim)
    }
}

/// The coarse quadrature used by the sparse experiments and the command line.
pub fn default_measure(family: MeasureFamily, dim: usize) -> Result<DiscreteMeasure> {
    match (family, dim) {
        (MeasureFamily::Bisphere, 1) => bilinear_sphere_measure(1, 64),
        (MeasureFamily::Bisphere, 2) => bilinear_sphere_measure_2d(4, 2),
        (MeasureFamily::Triangle, 2) => triangle_measure(2, 16),
        (MeasureFamily::ProductSphere, 2) => product_sphere_measure(2, 6),
        (f, d) => Err(Error::NotImplemented(format!(
            "{f:?} at d = {d}; supported: bisphere d=1,2, triangle d=2, product-sphere d=2"
        ))),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub trial: usize,
    pub seed: u64,
    /// `⟨L_lac(f,g), h⟩ / Λ_S(f,g,h)`; `None` when the form vanishes.
    pub ratio: Option<f64>,
    pub cubes: usize,
    pub sparsity_pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SparseRatioStats {
    pub grid_n: usize,
    pub outcomes: Vec<TrialOutcome>,
    pub max_ratio: f64,
    pub median_ratio: f64,
    pub skipped: usize,
    pub sparsity_failures: usize,
}

impl SparseRatioStats {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("trial,seed,value\n");
        for o in &self.outcomes {
            let v = o.ratio.map(|r| r.to_string()).unwrap_or_else(|| "nan".into());
            s.push_str(&format!("{},{},{}\n", o.trial, o.seed, v));
        }
        s
    }
}

fn trial_seed(seed: u64, trial: usize) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(trial as u64)
}

/// One trial: random indicator `f, g`, random piecewise-constant `h`,
/// constructed sparse family and the ratio of the lacunary pairing to the form.
pub fn sparse_trial(cfg: &SparseRatioConfig, trial: usize) -> Result<(TrialOutcome, SparseCollection)> {
    let x = cfg.triple()?;
    let (p, q, r) = exponents_f64(&x);
    let r_prime = r / (r - 1.0);
    let spec = GridSpec::unit(cfg.dim, cfg.grid_n)?;
    let seed = trial_seed(cfg.seed, trial);
    let kind = TestFunctionKind::IndicatorUnionOfCubes {
        count: cfg.indicator_count,
        min_level: 1,
        max_level: cfg.coarse_level,
    };
    let base = seed.wrapping_mul(3);
    let f = random_test_function(base, &kind, &spec)?;
    let g = random_test_function(base.wrapping_add(1), &kind, &spec)?;
    let h = random_coarse_weight(base.wrapping_add(2), &spec, cfg.coarse_level)?;
    let stop = choose_c0(p, q, r_prime)?;
    let root = spec.root_cube();
    let fam = CubeFamily::full(&spec, &root)?;
    let s = build_sparse_family(&f, &g, &h, &root, &stop, &fam)?;
    let rep = verify_sparsity(&s);
    let op = OperatorConfig::new(cfg.measure()?, 1.0)?.with_j_range(cfg.j_min, cfg.j_max)?;
    let num = lacunary_maximal(&f, &g, &op)?.inner(&h);
    let den = sparse_form(&s, &f, &g, &h, p, q, r_prime)?;
    let ratio = if den > 0.0 { Some(num / den) } else { None };
    Ok((TrialOutcome { trial, seed, ratio, cubes: s.len(), sparsity_pass: rep.pass }, s))
}

pub fn sparse_ratio_experiment(cfg: &SparseRatioConfig) -> Result<SparseRatioStats> {
    let x = cfg.triple()?;
    sparse_hypothesis(cfg.family, cfg.dim, &x)?;
    let outcomes: Vec<TrialOutcome> = (0..cfg.trials)
        .into_par_iter()
        .map(|t| sparse_trial(cfg, t).map(|o| o.0))
        .collect::<Result<Vec<_>>>()?;
    let mut ratios: Vec<f64> = outcomes.iter().filter_map(|o| o.ratio).collect();
    ratios.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = if ratios.is_empty() { f64::NAN } else { ratios[ratios.len() / 2] };
    Ok(SparseRatioStats {
        grid_n: cfg.grid_n,
        max_ratio: ratios.last().copied().unwrap_or(f64::NAN),
        median_ratio: median,
        skipped: outcomes.iter().filter(|o| o.ratio.is_none()).count(),
        sparsity_failures: outcomes.iter().filter(|o| !o.sparsity_pass).count(),
        outcomes,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RefinementReport {
    pub coarse: SparseRatioStats,
    pub fine: SparseRatioStats,
    /// `|max_fine - max_coarse| / max_coarse`.
    pub delta: f64,
}

pub fn sparse_refinement(cfg: &SparseRatioConfig) -> Result<RefinementReport> {
    let coarse = sparse_ratio_experiment(cfg)?;
    let fine = sparse_ratio_experiment(&cfg.refined())?;
    let delta = (fine.max_ratio - coarse.max_ratio).abs() / coarse.max_ratio;
    Ok(RefinementReport { coarse, fine, delta })
}

/// `‖f‖_{L^{r,1}(Q0, dμ)} / ⟨f⟩_{Q0,p}`.
pub fn embedding_ratio(f: &GridFunction, q0: &DyadicCube, p: f64, r: f64) -> Result<f64> {
    if !(p > r) {
        return Err(Error::Precondition(format!("embedding needs p > r, got p = {p}, r = {r}")));
    }
    let avg = crate::grid::lp_average(f, q0, p)?;
    Ok(lorentz_norm(f, q0, r)? / avg)
}

/// `p / (p - r)`, from the Chebyshev bound on the distribution function.
pub fn embedding_bound(p: f64, r: f64) -> f64 {
    p / (p - r)
}

/// `Σ_m 2^m ⟨1_{E_m}⟩_{Q0,r} / ‖f‖_{L^{r,1}(Q0, dμ)}`; at most 2.
pub fn level_set_ratio(f: &GridFunction, q0: &DyadicCube, r: f64) -> Result<f64> {
    let spec = f.spec();
    let cells = spec.cube_cells(q0)?;
    let ls = level_sets(f)?;
    let total = cells.count() as f64;
    let mut sum = 0.0;
    for (m, mask) in ls.exponents.iter().zip(&ls.masks) {
        let k = mask.iter().filter(|&&b| b).count() as f64;
        sum += 2f64.powi(*m) * (k / total).powf(1.0 / r);
    }
    Ok(sum / lorentz_norm(f, q0, r)?)
}

/// `Σ_{Q∈S} |Q| ⟨φ⟩_{Q,s} / (|Q0| ⟨φ⟩_{Q0,t})`.
pub fn sparse_average_ratio(s: &SparseCollection, phi: &GridFunction, s_exp: f64, t_exp: f64) -> Result<f64> {
    if !(s_exp >= 1.0 && s_exp < t_exp) {
        return Err(Error::Precondition(format!("need 1 ≤ s < t, got s = {s_exp}, t = {t_exp}")));
    }
    let spec = phi.spec();
    let root = spec.root_cube();
    let q0 = s.cubes.iter().max_by(|a, b| a.generation.cmp(&b.generation)).cloned().unwrap_or(root);
    let lhs = sparse_average_sum(s, phi, s_exp)?;
    let rhs = spec.lattice().measure(&q0) * crate::grid::lp_average(phi, &q0, t_exp)?;
    Ok(lhs / rhs)
}

/// `γ^{-1} (t/(t-s))^{1/s}`: sparsity plus the dyadic maximal bound on `L^{t/s}`.
pub fn sparse_average_bound(gamma: f64, s: f64, t: f64) -> f64 {
    (t / (t - s)).powf(1.0 / s) / gamma
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightVector {
    pub w1: GridFunction,
    pub w2: GridFunction,
    pub p1: f64,
    pub p2: f64,
    /// `(r_1, r_2, r_3)`; the third enters through its conjugate.
    pub r: [f64; 3],
}

impl WeightVector {
    pub fn new(w1: GridFunction, w2: GridFunction, p1: f64, p2: f64, r: [f64; 3]) -> Result<Self> {
        if !w1.same_grid(&w2) {
            return Err(Error::InvalidParameters("weights on different grids".into()));
        }
        if w1.values.iter().chain(&w2.values).any(|&v| !(v > 0.0) || !v.is_finite()) {
            return Err(Error::InvalidParameters("weights must be positive".into()));
        }
        if r.iter().any(|&ri| !(ri >= 1.0)) || r.iter().map(|ri| 1.0 / ri).sum::<f64>() <= 1.0 {
            return Err(Error::InvalidExponent("need r_i ≥ 1 and Σ 1/r_i > 1".into()));
        }
        if !(p1 > r[0] && p2 > r[1]) {
            return Err(Error::InvalidExponent("need p_1 > r_1 and p_2 > r_2".into()));
        }
        let wv = WeightVector { w1, w2, p1, p2, r };
        if !(r[2] > 1.0 && wv.r3_prime() > wv.p()) {
            return Err(Error::InvalidExponent("need r_3' > p".into()));
        }
        Ok(wv)
    }

    /// `1/p = 1/p_1 + 1/p_2`.
    pub fn p(&self) -> f64 {
        1.0 / (1.0 / self.p1 + 1.0 / self.p2)
    }

    pub fn r3_prime(&self) -> f64 {
        self.r[2] / (self.r[2] - 1.0)
    }

    /// `(α, β)` for the three factors `(⨍ ψ^α)^β`: `ψ = w, w_1, w_2`.
    fn powers(&self) -> [(f64, f64); 3] {
        let p = self.p();
        let rp = self.r3_prime();
        [
            (rp / (rp - p), 1.0 / p - 1.0 / rp),
            (self.r[0] / (self.r[0] - self.p1), 1.0 / self.r[0] - 1.0 / self.p1),
            (self.r[1] / (self.r[1] - self.p2), 1.0 / self.r[1] - 1.0 / self.p2),
        ]
    }

    /// Exponent of `c` in the constant when `w_i` is replaced by `c w_i`.
    pub fn homogeneity_exponent(&self, i: usize) -> f64 {
        let pw = self.powers();
        let pi = if i == 0 { self.p1 } else { self.p2 };
        (self.p() / pi) * pw[0].0 * pw[0].1 + pw[i + 1].0 * pw[i + 1].1
    }
}

/// `sup_Q (⨍_Q w^{r'/(r'-p)})^{1/p - 1/r'} Π_i (⨍_Q w_i^{r_i/(r_i-p_i)})^{1/r_i - 1/p_i}`
/// over the family, with `w = Π w_i^{p/p_i}`.
pub fn muckenhoupt_constant(w: &WeightVector, family: &CubeFamily) -> Result<f64> {
    let p = w.p();
    let pw = w.powers();
    let wv: Vec<f64> = w
        .w1
        .values
        .iter()
        .zip(&w.w2.values)
        .map(|(a, b)| a.powf(p / w.p1) * b.powf(p / w.p2))
        .collect();
    let bases = [wv, w.w1.values.clone(), w.w2.values.clone()];
    let pyrs: Vec<PowerPyramid> = bases
        .iter()
        .zip(&pw)
        .map(|(b, (a, _))| PowerPyramid::new(&w.w1.with_values(b.iter().map(|v| v.powf(*a)).collect()), 1.0))
        .collect::<Result<_>>()?;
    let mut best: f64 = 0.0;
    let mut queue = vec![family.root.clone()];
    let mut i = 0;
    while i < queue.len() {
        let q = queue[i].clone();
        let v: f64 = pyrs.iter().zip(&pw).map(|(py, (_, b))| py.average(&q).powf(*b)).product();
        best = best.max(v);
        if q.generation > family.finest {
            let d = q.dim;
            for bits in 0..1usize << d {
                let corner = (0..d).map(|k| 2 * q.corner[k] + ((bits >> (d - 1 - k)) & 1) as i64).collect();
                queue.push(DyadicCube::new(1, q.generation - 1, corner));
            }
        }
        i += 1;
    }
    Ok(best)
}

fn random_cube(rng: &mut ChaCha8Rng, d: usize, lattices: usize) -> DyadicCube {
    let id = rng.gen_range(1..=lattices);
    let gen = rng.gen_range(-5..=5);
    let corner = (0..d).map(|_| rng.gen_range(-20..=20)).collect();
    DyadicCube::new(id, gen, corner)
}

fn random_point_in(rng: &mut ChaCha8Rng, b: &AxisBox) -> Vec<f64> {
    b.lo.iter().zip(&b.hi).map(|(l, h)| l + (h - l) * rng.gen_range(0.0..1.0)).collect()
}

/// Interior overlap by more than `tol` along every axis.
fn overlaps_by(a: &AxisBox, b: &AxisBox, tol: f64) -> bool {
    (0..a.lo.len()).all(|i| a.lo[i].max(b.lo[i]) < a.hi[i].min(b.hi[i]) - tol)
}

fn box_within(inner: &AxisBox, outer: &AxisBox, tol: f64) -> bool {
    inner.lo.iter().zip(&outer.lo).all(|(a, b)| *a >= b - tol) && inner.hi.iter().zip(&outer.hi).all(|(a, b)| *a <= b + tol)
}

/// Randomized structural checks of the shifted lattices.
pub fn dyadic_suite(seed: u64, count: usize) -> Result<SuiteReport> {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut fails = [0usize; 4];
    let mut done = [0usize; 4];
    for it in 0..count {
        let d = 1 + it % 3;
        let fam = shifted_lattices(d, 1.0)?;
        let nl = fam.lattice_count();
        let q = random_cube(&mut rng, d, nl);
        let qb = fam.cube_box(&q);
        let tol = 1e-9 * fam.side(q.generation);
        match it % 4 {
            0 => {
                let kids = fam.children(&q);
                let mut ok = kids.len() == 1 << d;
                let vol: f64 = kids.iter().map(|k| fam.cube_box(k).volume()).sum();
                ok &= (vol - qb.volume()).abs() <= 1e-9 * qb.volume();
                for (a, k) in kids.iter().enumerate() {
                    ok &= fam.parent(k) == q && box_within(&fam.cube_box(k), &qb, tol);
                    for k2 in &kids[a + 1..] {
                        ok &= !overlaps_by(&fam.cube_box(k), &fam.cube_box(k2), tol);
                    }
                }
                let x = random_point_in(&mut rng, &qb);
                ok &= kids.iter().filter(|k| fam.cube_box(k).contains(&x)).count() == 1;
                done[0] += 1;
                fails[0] += !ok as usize;
            }
            1 => {
                let x = random_point_in(&mut rng, &qb);
                let g2 = q.generation + rng.gen_range(-3..=3);
                let other = if rng.gen_bool(0.5) {
                    fam.locate(q.lattice_id, g2, &x)
                } else {
                    let mut c = q.clone();
                    c.generation = g2;
                    c.corner = c.corner.iter().map(|v| v + rng.gen_range(-1..=1)).collect();
                    c
                };
                let ob = fam.cube_box(&other);
                let overlap = overlaps_by(&qb, &ob, tol);
                let nested = fam.contains(&q, &other) || fam.contains(&other, &q);
                let ok = overlap == nested
                    && (!fam.contains(&q, &other) || box_within(&ob, &qb, tol))
                    && (!fam.contains(&other, &q) || box_within(&qb, &ob, tol));
                done[1] += 1;
                fails[1] += !ok as usize;
            }
            2 => {
                let k: Vec<i64> = (0..d).map(|_| rng.gen_range(-30..=30)).collect();
                let m: Vec<i64> = k.iter().map(|v| v - 1).collect();
                let owners = fam.lattices_with_corner(q.generation, &m);
                let c = fam.assign_tripled(q.generation, &k);
                let cb = fam.cube_box(&c);
                let s = fam.side(q.generation);
                let ok = owners == vec![c.lattice_id]
                    && cb.lo.iter().zip(&m).all(|(lo, mi)| (lo - s * *mi as f64 / 3.0).abs() <= 1e-9 * s.max(1.0) * 30.0);
                done[2] += 1;
                fails[2] += !ok as usize;
            }
            _ => {
                let j = rng.gen_range(1..=3usize.pow(d as u32));
                let cover = fam.enlarged_cover(&q, j)?;
                let third = fam.third_subcube(&q, j)?;
                let kids = fam.children(&q);
                let mut ok = cover.iter().all(|c| kids.contains(c) && overlaps_by(&fam.cube_box(c), &third, tol));
                for _ in 0..4 {
                    let x = random_point_in(&mut rng, &third);
                    ok &= cover.iter().any(|c| fam.cube_box(c).contains(&x));
                }
                done[3] += 1;
                fails[3] += !ok as usize;
            }
        }
    }
    let names = ["child-partition", "nesting-trichotomy", "tripled-lattice-uniqueness", "enlarged-cover"];
    let mut checks: Vec<Check> =
        names.iter().zip(&fails).map(|(n, &f)| Check::at_most(format!("{n} failures"), f as f64, 0.0)).collect();
    checks.push(Check::at_least("checks run", done.iter().sum::<usize>() as f64, count as f64));
    Ok(SuiteReport::finish("dyadic", start, checks))
}

fn interior_deviation(v: &GridFunction, radius: f64) -> f64 {
    let spec = v.spec();
    let c = spec.domain().center();
    (0..spec.len())
        .filter(|&i| spec.center(i).iter().zip(&c).all(|(a, b)| (a - b).abs() < radius))
        .map(|i| (v.values[i] - 1.0).abs())
        .fold(0.0, f64::max)
}

fn rel_gap(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

/// Mass normalization, product factorization and the adjoint identities.
pub fn operator_suite(seed: u64, triples: usize) -> Result<SuiteReport> {
    let start = Instant::now();
    let mut checks = Vec::new();
    let s1 = GridSpec::centered(1, 4.0, 128)?;
    let s2 = GridSpec::centered(2, 4.0, 64)?;
    let cases: Vec<(&str, DiscreteMeasure, &GridSpec)> = vec![
        ("triangle d=2", triangle_measure(2, 16)?, &s2),
        ("bisphere d=1", bilinear_sphere_measure(1, 32)?, &s1),
        ("bisphere d=2", bilinear_sphere_measure(2, 8)?, &s2),
        ("product-sphere d=2", product_sphere_measure(2, 8)?, &s2),
    ];
    for (name, mu, spec) in &cases {
        let one = GridFunction::constant(spec, 1.0);
        let out = scale_average(&one, &one, &OperatorConfig::new(mu.clone(), 1.0)?)?;
        checks.push(Check::at_most(format!("L(1,1) = 1 on padded interior, {name}"), interior_deviation(&out, 2.5), 1e-6));
        let adj = adjoint_1(&one, &one, &OperatorConfig::new(mu.clone(), 1.0)?)?;
        checks.push(Check::at_most(format!("S*1(1,1) = 1 on padded interior, {name}"), interior_deviation(&adj, 1.5), 1e-6));
    }
    let bumps = TestFunctionKind::SmoothBumpMixture { count: 3, min_width: 0.3, max_width: 0.8 };
    let f = random_test_function(seed, &bumps, &s2)?;
    let g = random_test_function(seed.wrapping_add(1), &bumps, &s2)?;
    let n = 8;
    let prod = scale_average(&f, &g, &OperatorConfig::new(product_sphere_measure(2, n)?, 0.7)?)?;
    let circle = |phi: &GridFunction| -> GridFunction {
        let mut acc = vec![0.0; phi.values.len()];
        for w in circle_nodes(n) {
            let sh = phi.shifted(&[0.7 * w[0], 0.7 * w[1]]);
            for (a, b) in acc.iter_mut().zip(&sh) {
                *a += b / n as f64;
            }
        }
        phi.with_values(acc)
    };
    let (af, ag) = (circle(&f), circle(&g));
    let fac = prod
        .values
        .iter()
        .zip(af.values.iter().zip(&ag.values))
        .map(|(p, (a, b))| (p - a * b).abs())
        .fold(0.0, f64::max)
        / prod.max_abs();
    checks.push(Check::at_most("product-sphere factorization", fac, 1e-6));

    let mut worst = [0.0f64; 3];
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xA5A5);
    for trial in 0..triples {
        for d in [1usize, 2] {
            let (spec, mu) = if d == 1 {
                (GridSpec::unit(1, 128)?, bilinear_sphere_measure(1, 16)?)
            } else {
                (GridSpec::unit(2, 16)?, triangle_measure(2, 8)?)
            };
            let t = rng.gen_range(0.05..0.2);
            let cfg = OperatorConfig::new(mu, t)?;
            let k = TestFunctionKind::SmoothBumpMixture { count: 2, min_width: 0.05, max_width: 0.2 };
            let base = seed.wrapping_mul(1000).wrapping_add(10 * trial as u64 + d as u64);
            let f = random_test_function(base, &k, &spec)?;
            let g = random_test_function(base.wrapping_add(3), &k, &spec)?;
            let h = random_test_function(base.wrapping_add(7), &k, &spec)?;
            let fwd = exact_forward_pairing(&f, &g, &h, &cfg);
            worst[0] = worst[0].max(rel_gap(fwd, exact_adjoint1_pairing(&f, &g, &h, &cfg)));
            worst[1] = worst[1].max(rel_gap(fwd, exact_adjoint2_pairing(&f, &g, &h, &cfg)));
            let tf = spec_t_field(&spec, base.wrapping_add(11))?;
            let lhs = linearized_full(&f, &g, &tf, &cfg)?.inner(&h);
            let rhs = f.inner(&linearized_adjoint_1(&g, &h, &tf, &cfg)?);
            worst[2] = worst[2].max(rel_gap(lhs, rhs));
        }
    }
    checks.push(Check::at_most("adjoint-1 duality (relative)", worst[0], 1e-6));
    checks.push(Check::at_most("adjoint-2 duality (relative)", worst[1], 1e-6));
    checks.push(Check::at_most("linearized duality (relative)", worst[2], 1e-6));
    let _ = adjoint_2;
    Ok(SuiteReport::finish("operators", start, checks))
}

fn spec_t_field(spec: &GridSpec, seed: u64) -> Result<GridFunction> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    GridFunction::new(spec, (0..spec.len()).map(|_| rng.gen_range(1.0..=2.0)).collect())
}

fn gaussian(spec: &GridSpec, sigma: f64, offset: &[f64]) -> Result<GridFunction> {
    GridFunction::from_fn(spec, |x| {
        let r2: f64 = x.iter().zip(offset).map(|(a, b)| (a - b) * (a - b)).sum();
        (-r2 / (2.0 * sigma * sigma)).exp()
    })
}

fn scaling_setup(family: MeasureFamily, d: usize) -> Result<(DiscreteMeasure, GridSpec)> {
    match (family, d) {
        (MeasureFamily::Bisphere, 1) => Ok((bilinear_sphere_measure(1, 32)?, GridSpec::centered(1, 32.0, 2048)?)),
        (MeasureFamily::Triangle, 2) => Ok((triangle_measure(2, 16)?, GridSpec::centered(2, 32.0, 512)?)),
        (MeasureFamily::Bisphere, 2) => Ok((bilinear_sphere_measure(2, 6)?, GridSpec::centered(2, 32.0, 512)?)),
        (MeasureFamily::ProductSphere, 2) => Ok((product_sphere_measure(2, 6)?, GridSpec::centered(2, 32.0, 512)?)),
        (f, d) => Err(Error::NotImplemented(format!(
            "scaling for {f:?} at d = {d}; supported: bisphere d=1,2, triangle d=2, product-sphere d=2"
        ))),
    }
}

/// Scaling-law fits for three exponent triples on one measure.
pub fn scaling_suite_for(family: MeasureFamily, d: usize, seed: u64) -> Result<SuiteReport> {
    let start = Instant::now();
    let checks = scaling_checks(family, d, &mut ChaCha8Rng::seed_from_u64(seed))?;
    Ok(SuiteReport::finish("scaling", start, checks))
}

fn scaling_checks(family: MeasureFamily, d: usize, rng: &mut ChaCha8Rng) -> Result<Vec<Check>> {
    let triples = [
        ExponentTriple::from_ratios((1, 2), (1, 2), (1, 2)),
        ExponentTriple::from_ratios((1, 3), (1, 3), (1, 2)),
        ExponentTriple::from_ratios((1, 4), (1, 2), (2, 3)),
    ];
    let t_list = [0.25, 0.5, 1.0, 2.0, 4.0];
    let (mu, spec) = scaling_setup(family, d)?;
    let o1: Vec<f64> = (0..d).map(|_| rng.gen_range(-0.3..0.3)).collect();
    let o2: Vec<f64> = (0..d).map(|_| rng.gen_range(-0.3..0.3)).collect();
    let f = gaussian(&spec, 1.0, &o1)?;
    let g = gaussian(&spec, 1.3, &o2)?;
    let mut checks = Vec::new();
    for x in &triples {
        let rep = scaling_law_experiment(&mu, &f, &g, x, &t_list)?;
        checks.push(Check::at_most(format!("slope error {family:?} d={d} at {x}"), rep.error(), 0.1));
    }
    Ok(checks)
}

/// Scaling-law fits for three exponent triples on the `d = 1` sphere and the triangle.
pub fn scaling_suite(seed: u64) -> Result<SuiteReport> {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = scaling_checks(MeasureFamily::Bisphere, 1, &mut rng)?;
    checks.extend(scaling_checks(MeasureFamily::Triangle, 2, &mut rng)?);
    Ok(SuiteReport::finish("scaling", start, checks))
}

/// Continuity fits for both operators and both slots over several seeds.
pub fn continuity_suite(seed: u64, seeds: usize) -> Result<SuiteReport> {
    let start = Instant::now();
    let spec = GridSpec::centered(1, 2.0, 2048)?;
    let x = ExponentTriple::from_ratios((1, 2), (1, 2), (1, 1));
    let (p, q, _) = exponents_f64(&x);
    let cfg = OperatorConfig::new(bilinear_sphere_measure(1, 32)?, 1.0)?;
    let kind = TestFunctionKind::IndicatorUnionOfCubes { count: 3, min_level: 3, max_level: 5 };
    let y_list: Vec<f64> = (3..=8).map(|k| 2f64.powi(-k)).collect();
    let mut checks = Vec::new();
    for s in 0..seeds as u64 {
        let f = random_test_function(seed.wrapping_add(2 * s), &kind, &spec)?;
        let g = random_test_function(seed.wrapping_add(2 * s + 1), &kind, &spec)?;
        let f = f.scaled(1.0 / f.lp_norm(p));
        let g = g.scaled(1.0 / g.lp_norm(q));
        for op in [OperatorKind::SingleScale, OperatorKind::SingleScaleMaximal] {
            for slot in [Slot::First, Slot::Second] {
                let fit = continuity_experiment(op, &cfg, &f, &g, &x, &y_list, slot)?;
                let tag = format!("{op:?} {slot:?} seed {}", seed.wrapping_add(2 * s));
                checks.push(Check::above(format!("eta {tag}"), fit.fitted_eta, 0.0));
                checks.push(Check::at_least(format!("r2 {tag}"), fit.r2, 0.9));
                checks.push(Check::flag(format!("triangle bound {tag}"), fit.triangle_bound_ok));
            }
        }
    }
    Ok(SuiteReport::finish("continuity", start, checks))
}

/// Stopping sets, Calderón–Zygmund splitting and the linearization sandwich.
pub fn cz_suite(seed: u64, triples: usize, sandwiches: usize) -> Result<SuiteReport> {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let exps = [(1.0, 1.0, 1.0), (2.0, 2.0, 2.0), (1.5, 3.0, 2.0), (4.0, 1.25, 3.0)];
    let mut worst_e: f64 = 0.0;
    let mut d0_viol = 0usize;
    let mut mean_err: f64 = 0.0;
    let mut good_excess: f64 = 0.0;
    let mut recon: f64 = 0.0;
    for trial in 0..triples {
        let d = 1 + trial % 2;
        let spec = if d == 1 { GridSpec::unit(1, 256)? } else { GridSpec::unit(2, 32)? };
        let kind = TestFunctionKind::IndicatorUnionOfCubes { count: rng.gen_range(1..5), min_level: 2, max_level: spec.levels() };
        let base = seed.wrapping_mul(7919).wrapping_add(3 * trial as u64);
        let f = random_test_function(base, &kind, &spec)?;
        let g = random_test_function(base.wrapping_add(1), &kind, &spec)?;
        let h = random_test_function(base.wrapping_add(2), &kind, &spec)?;
        let (p, q, rp) = exps[trial % exps.len()];
        let cfg = choose_c0(p, q, rp)?;
        let root = spec.root_cube();
        let fam = CubeFamily::full(&spec, &root)?;
        let st = stopping_family(&f, &g, &h, &root, &cfg, &fam)?;
        let lat = spec.lattice();
        let e: f64 = st.e_set.iter().map(|c| lat.measure(c)).sum();
        worst_e = worst_e.max(e / lat.measure(&root));
        let pyr = TriplePyramids::new(&f, &g, &h, &cfg)?;
        let base_avg = pyr.averages(&root);
        if !st.degenerate {
            for c in &st.d0 {
                let a = pyr.averages(c);
                if (0..3).any(|k| a[k] / base_avg[k] > cfg.c0) {
                    d0_viol += 1;
                }
            }
        }
        let spike = TestFunctionKind::Spike { mass: rng.gen_range(0.1..1.0) };
        let mut fv = f.values.clone();
        for (a, b) in fv.iter_mut().zip(&random_test_function(base.wrapping_add(5), &spike, &spec)?.values) {
            *a += b;
        }
        let fz = GridFunction::new(&spec, fv)?;
        let cz = cz_decompose(&fz, &root, p, &cfg)?;
        for (a, b) in cz.reconstruct().values.iter().zip(&fz.values) {
            recon = recon.max((a - b).abs() / fz.max_abs());
        }
        for c in &cz.bad_cubes {
            let cells = spec.cube_cells(c)?.indices(&spec);
            let piece = &cz.bad_pieces[&c.generation];
            let s: f64 = cells.iter().map(|&i| piece.values[i]).sum();
            let m: f64 = cells.iter().map(|&i| fz.values[i]).sum();
            mean_err = mean_err.max(s.abs() / m);
        }
        good_excess = good_excess.max(cz.good.max_abs() / cz.good_bound(p));
    }
    let mut sandwich_fail = 0usize;
    let mut worst_lower: f64 = 0.0;
    for trial in 0..sandwiches {
        let spec = GridSpec::unit(1, 128)?;
        let kind = TestFunctionKind::IndicatorUnionOfCubes { count: 3, min_level: 2, max_level: 5 };
        let base = seed.wrapping_mul(104729).wrapping_add(5 * trial as u64);
        let f = random_test_function(base, &kind, &spec)?;
        let g = random_test_function(base.wrapping_add(1), &kind, &spec)?;
        let h = random_coarse_weight(base.wrapping_add(2), &spec, 4)?;
        let cfg = choose_c0(2.0, 2.0, 2.0)?;
        let root = spec.root_cube();
        let fam = CubeFamily::truncated(&spec, &root, 5)?;
        let st = stopping_family(&f, &g, &h, &root, &cfg, &fam)?;
        let op = OperatorConfig::new(bilinear_sphere_measure(1, 16)?, 1.0)?;
        let j = 1 + trial % 3;
        let lin = linearize(&st.d0, &f, &g, j, &op)?;
        let sw = lin.sandwich(&h);
        if !sw.holds(1e-12) {
            sandwich_fail += 1;
        }
        if sw.sup_pairing > 0.0 {
            worst_lower = worst_lower.max(sw.linearized / sw.sup_pairing);
        }
    }
    let checks = vec![
        Check::at_most("max |E_Q0| / |Q0|", worst_e, 0.5),
        Check::at_most("D0 ratio violations", d0_viol as f64, 0.0),
        Check::at_most("CZ mean-zero residual (relative)", mean_err, 1e-12),
        Check::at_most("CZ reconstruction (relative)", recon, 1e-12),
        Check::at_most("max good / explicit bound", good_excess, 1.0),
        Check::at_most("sandwich failures", sandwich_fail as f64, 0.0),
        Check::at_most("max linearized / sup pairing", worst_lower, 1.0 + 1e-12),
    ];
    Ok(SuiteReport::finish("cz-stopping", start, checks))
}

/// Embedding, level-set and sparse-average lemmas with explicit constants.
pub fn lemma_suite(seed: u64, families: usize) -> Result<SuiteReport> {
    let start = Instant::now();
    let mut worst_embed = [0.0f64; 2];
    let mut worst_level = [0.0f64; 2];
    let pr = [(2.0, 1.0), (3.0, 2.0)];
    for (k, n) in [256usize, 512].iter().enumerate() {
        let spec = GridSpec::unit(1, *n)?;
        let root = spec.root_cube();
        for s in 0..20u64 {
            let kind = if s % 2 == 0 {
                TestFunctionKind::SmoothBumpMixture { count: 3, min_width: 0.01, max_width: 0.1 }
            } else {
                TestFunctionKind::IndicatorUnionOfCubes { count: 4, min_level: 2, max_level: 7 }
            };
            let f = random_test_function(seed.wrapping_add(s), &kind, &spec)?;
            for &(p, r) in &pr {
                worst_embed[k] = worst_embed[k].max(embedding_ratio(&f, &root, p, r)? / embedding_bound(p, r));
            }
            worst_level[k] = worst_level[k].max(level_set_ratio(&f, &root, 1.0)?.max(level_set_ratio(&f, &root, 2.0)?));
        }
    }
    let spec = GridSpec::unit(1, 256)?;
    let root = spec.root_cube();
    let fam = CubeFamily::full(&spec, &root)?;
    let mut worst_avg: f64 = 0.0;
    for s in 0..families as u64 {
        let kind = TestFunctionKind::IndicatorUnionOfCubes { count: 3, min_level: 2, max_level: 8 };
        let base = seed.wrapping_mul(31).wrapping_add(4 * s);
        let f = random_test_function(base, &kind, &spec)?;
        let g = random_test_function(base.wrapping_add(1), &kind, &spec)?;
        let h = random_test_function(base.wrapping_add(2), &kind, &spec)?;
        let sc = build_sparse_family(&f, &g, &h, &root, &choose_c0(1.0, 1.0, 1.0)?, &fam)?;
        let phi = random_test_function(base.wrapping_add(3), &TestFunctionKind::SmoothBumpMixture { count: 4, min_width: 0.005, max_width: 0.05 }, &spec)?;
        worst_avg = worst_avg.max(sparse_average_ratio(&sc, &phi, 1.0, 2.0)? / sparse_average_bound(sc.gamma, 1.0, 2.0));
    }
    let checks = vec![
        Check::at_most("embedding ratio / p/(p-r), n=256", worst_embed[0], 1.0),
        Check::at_most("embedding ratio / p/(p-r), n=512", worst_embed[1], 1.0),
        Check::at_most("level-set sum / Lorentz norm, n=256", worst_level[0], 2.0),
        Check::at_most("level-set sum / Lorentz norm, n=512", worst_level[1], 2.0),
        Check::at_most("sparse average sum / explicit bound", worst_avg, 1.0),
    ];
    Ok(SuiteReport::finish("lemmas", start, checks))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitDecayReport {
    pub abscissae: Vec<f64>,
    /// `‖A‖_1 + ‖C‖_1` at each `|y|`.
    pub norms: Vec<f64>,
    pub slope: f64,
    pub predicted: f64,
    pub max_identity_error: f64,
}

/// Decay of the split parts for `m = (1 + |(ξ,η)|^2)^{-s/2}` on indicator inputs.
pub fn split_decay_experiment(n: usize, probe: &MultiplierProbe, f: &GridFunction, g: &GridFunction, ks: &[i32]) -> Result<SplitDecayReport> {
    let m = sample_multiplier(n, f.side, bessel_multiplier(probe.decay_s));
    let mut ys = Vec::new();
    let mut norms = Vec::new();
    let mut err: f64 = 0.0;
    for &k in ks {
        let y = 2f64.powi(-k);
        let (a, c) = continuity_split(&m, y, probe, f, g)?;
        let full = bilinear_multiplier_apply(&m, &spectral_translate_diff(f, y)?, g)?;
        let scale = full.max_abs().max(1e-300);
        for i in 0..a.values.len() {
            err = err.max((a.values[i] + c.values[i] - full.values[i]).abs() / scale);
        }
        ys.push(y);
        norms.push(a.lp_norm(1.0) + c.lp_norm(1.0));
    }
    let lx: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = norms.iter().map(|v| v.ln()).collect();
    let fit = least_squares(&lx, &ly)?;
    Ok(SplitDecayReport { abscissae: ys, norms, slope: fit.slope, predicted: probe.decay_exponent(), max_identity_error: err })
}

/// The frequency split: sum identity, decay slope and the threshold arithmetic.
pub fn multiplier_suite(seed: u64) -> Result<SuiteReport> {
    let start = Instant::now();
    let n = 512;
    let spec = GridSpec::new(1, vec![0.0], 1.0, n)?;
    let kind = TestFunctionKind::IndicatorUnionOfCubes { count: 3, min_level: 2, max_level: 4 };
    let f = random_test_function(seed, &kind, &spec)?;
    let g = random_test_function(seed.wrapping_add(1), &kind, &spec)?;
    let probe = MultiplierProbe::new(1.0, 3.0)?;
    let rep = split_decay_experiment(n, &probe, &f, &g, &[1, 2, 3, 4, 5, 6])?;
    let exact = split_decay_exponent(&rat(1, 1), &rat(3, 1));
    let t2 = decay_thresholds(2)?;
    let t4 = decay_thresholds(4)?;
    let t1 = decay_thresholds(1)?;
    let arithmetic = exact == rat(1, 8)
        && t2.first == rat(8, 3)
        && t2.second == Some(rat(8, 1))
        && t2.first_below_four
        && t2.second_below_four == Some(false)
        && t4.first == rat(16, 7)
        && t4.second == Some(rat(16, 5))
        && t4.second_below_four == Some(true)
        && t1.second.is_none();
    let checks = vec![
        Check::at_most("A + C identity (relative)", rep.max_identity_error, 1e-10),
        Check::at_least("split decay slope", rep.slope, 0.8 * rep.predicted),
        Check::flag("threshold rationals", arithmetic),
    ];
    Ok(SuiteReport::finish("multiplier-split", start, checks))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SparseRunReport {
    pub cubes: usize,
    pub pairing: f64,
    pub sparse_form: f64,
    pub ratio: Option<f64>,
    pub sparsity: crate::sparse::SparsityReport,
}

/// Sparse family and ratio for given inputs on the unit grid.
pub fn sparse_run(
    f: &GridFunction,
    g: &GridFunction,
    h: &GridFunction,
    x: &ExponentTriple,
    family: MeasureFamily,
    j_min: i32,
    j_max: i32,
) -> Result<(SparseCollection, SparseRunReport)> {
    sparse_hypothesis(family, f.dim, x)?;
    if !f.same_grid(g) || !f.same_grid(h) {
        return Err(Error::InvalidParameters("inputs on different grids".into()));
    }
    let (p, q, r) = exponents_f64(x);
    let r_prime = r / (r - 1.0);
    let spec = f.spec();
    let root = spec.root_cube();
    let s = build_sparse_family(f, g, h, &root, &choose_c0(p, q, r_prime)?, &CubeFamily::full(&spec, &root)?)?;
    let op = OperatorConfig::new(default_measure(family, f.dim)?, 1.0)?.with_j_range(j_min, j_max)?;
    let pairing = lacunary_maximal(f, g, &op)?.inner(h);
    let form = sparse_form(&s, f, g, h, p, q, r_prime)?;
    let rep = SparseRunReport {
        cubes: s.len(),
        pairing,
        sparse_form: form,
        ratio: if form > 0.0 { Some(pairing / form) } else { None },
        sparsity: verify_sparsity(&s),
    };
    Ok((s, rep))
}

/// Suite names accepted by [`run_suite`].
pub const SUITES: [&str; 8] = ["dyadic", "operators", "scaling", "continuity", "cz", "sparse", "lemmas", "multiplier"];

/// Runs one named suite (or `all`) at acceptance size. `family` and `dim`
/// select the setup for `scaling` and `sparse`; `None` runs the defaults.
pub fn run_suite(name: &str, seed: u64, setup: Option<(MeasureFamily, usize)>) -> Result<Vec<SuiteReport>> {
    let one = |r: Result<SuiteReport>| r.map(|v| vec![v]);
    match name {
        "dyadic" => one(dyadic_suite(seed, 10_000)),
        "operators" => one(operator_suite(seed, 50)),
        "scaling" => match setup {
            None => one(scaling_suite(seed)),
            Some((fam, d)) => one(scaling_suite_for(fam, d, seed)),
        },
        "continuity" => one(continuity_suite(seed, 3)),
        "cz" => one(cz_suite(seed, 100, 25)),
        "lemmas" => one(lemma_suite(seed, 50)),
        "multiplier" => one(multiplier_suite(seed)),
        "sparse" => {
            let cfgs = match setup {
                None => vec![SparseRatioConfig::d1(100, seed), SparseRatioConfig::d2(100, seed)],
                Some((fam, 1)) => vec![SparseRatioConfig { family: fam, ..SparseRatioConfig::d1(100, seed) }],
                Some((fam, d)) => vec![SparseRatioConfig { family: fam, dim: d, ..SparseRatioConfig::d2(100, seed) }],
            };
            cfgs.iter().map(|c| sparse_suite(c).map(|r| r.0)).collect()
        }
        "all" => {
            let mut out = Vec::new();
            for s in SUITES {
                out.extend(run_suite(s, seed, None)?);
            }
            Ok(out)
        }
        other => Err(Error::InvalidParameters(format!("unknown suite {other}; known: {} or all", SUITES.join(", ")))),
    }
}

/// End-to-end sparse bound at one resolution and after one refinement.
pub fn sparse_suite(cfg: &SparseRatioConfig) -> Result<(SuiteReport, RefinementReport)> {
    let start = Instant::now();
    let rep = sparse_refinement(cfg)?;
    let finite = rep.coarse.outcomes.iter().chain(&rep.fine.outcomes).all(|o| o.ratio.is_some_and(f64::is_finite));
    let checks = vec![
        Check::at_most("sparsity violations", (rep.coarse.sparsity_failures + rep.fine.sparsity_failures) as f64, 0.0),
        Check::flag("ratio finite in every trial", finite),
        Check::at_most("relative change of max ratio under refinement", rep.delta, 0.2),
    ];
    Ok((SuiteReport::finish(&format!("sparse d={}", cfg.dim), start, checks), rep))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fit_of_a_line() {
        let f = least_squares(&[0.0, 1.0, 2.0], &[1.0, 3.0, 5.0]).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-14 && (f.r2 - 1.0).abs() < 1e-14);
        assert!(least_squares(&[1.0], &[1.0]).is_err());
    }

    #[test]
    fn scaling_needs_two_scales() {
        let s = GridSpec::centered(1, 8.0, 64).unwrap();
        let f = gaussian(&s, 1.0, &[0.0]).unwrap();
        let mu = bilinear_sphere_measure(1, 8).unwrap();
        let x = ExponentTriple::from_ratios((1, 2), (1, 2), (1, 2));
        assert!(matches!(scaling_law_experiment(&mu, &f, &f, &x, &[1.0]), Err(Error::InvalidExperiment(_))));
    }

    #[test]
    fn truncation_is_detected() {
        let s = GridSpec::centered(1, 4.0, 64).unwrap();
        let f = gaussian(&s, 1.0, &[0.0]).unwrap();
        let mu = bilinear_sphere_measure(1, 8).unwrap();
        let x = ExponentTriple::from_ratios((1, 2), (1, 2), (1, 2));
        assert!(matches!(scaling_law_experiment(&mu, &f, &f, &x, &[1.0, 4.0]), Err(Error::InvalidExperiment(_))));
    }

    #[test]
    fn zero_shift_is_excluded() {
        let s = GridSpec::unit(1, 128).unwrap();
        let f = GridFunction::from_fn(&s, |x| if (0.3..0.6).contains(&x[0]) { 1.0 } else { 0.0 }).unwrap();
        let cfg = OperatorConfig::new(bilinear_sphere_measure(1, 8).unwrap(), 0.1).unwrap();
        let x = ExponentTriple::from_ratios((1, 2), (1, 2), (1, 1));
        let fit = continuity_experiment(OperatorKind::SingleScale, &cfg, &f, &f, &x, &[0.05, 0.025, 0.0], Slot::First).unwrap();
        assert_eq!(fit.abscissae.len(), 2);
        assert!(continuity_experiment(OperatorKind::SingleScale, &cfg, &f, &f, &x, &[0.5], Slot::First).is_err());
    }

    #[test]
    fn constant_weights_have_constant_one() {
        let s = GridSpec::unit(1, 16).unwrap();
        let one = GridFunction::constant(&s, 1.0);
        let w = WeightVector::new(one.clone(), one, 8.0, 8.0, [2.0, 2.0, 1.2]).unwrap();
        let fam = CubeFamily::full(&s, &s.root_cube()).unwrap();
        assert!((muckenhoupt_constant(&w, &fam).unwrap() - 1.0).abs() < 1e-12);
        assert!(w.homogeneity_exponent(0).abs() < 1e-12 && w.homogeneity_exponent(1).abs() < 1e-12);
    }

    #[test]
    fn hypothesis_rejects_small_r() {
        let bad = ExponentTriple::from_ratios((1, 2), (1, 2), (2, 3));
        assert!(sparse_hypothesis(MeasureFamily::Bisphere, 1, &bad).is_err());
        let good = ExponentTriple::from_ratios((1, 2), (1, 2), (1, 3));
        assert!(sparse_hypothesis(MeasureFamily::Bisphere, 1, &good).is_ok());
        let d2 = ExponentTriple::from_ratios((3, 5), (3, 5), (11, 20));
        assert!(sparse_hypothesis(MeasureFamily::Bisphere, 2, &d2).is_ok());
        assert!(sparse_hypothesis(MeasureFamily::Triangle, 2, &good).is_err());
    }

    #[test]
    fn coarse_weight_is_resolution_independent() {
        let a = random_coarse_weight(3, &GridSpec::unit(1, 16).unwrap(), 2).unwrap();
        let b = random_coarse_weight(3, &GridSpec::unit(1, 32).unwrap(), 2).unwrap();
        for i in 0..16 {
            assert_eq!(a.values[i], b.values[2 * i]);
        }
    }
}
