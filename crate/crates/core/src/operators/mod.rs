//! Bilinear averages `L_t(f,g)(x) = Σ_k w_k f(x - t y_k) g(x - t z_k)` and the
//! maximal, localized, adjoint and linearized variants built from them.

pub mod multiplier;

use crate::dyadic::{AxisBox, DyadicCube, LatticeFamily};
use crate::error::{Error, Result};
use crate::grid::{GridFunction, GridSpec};
use crate::measures::DiscreteMeasure;

pub use multiplier::{
    bessel_multiplier, bilinear_multiplier_apply, continuity_split, sample_multiplier, smooth_cutoff, spectral_translate_diff,
    MultiplierGrid, MultiplierProbe,
};

pub const DEFAULT_SUP_SAMPLES: usize = 17;

#[derive(Clone, Debug)]
pub struct OperatorConfig {
    pub measure: DiscreteMeasure,
    pub scale_t: f64,
    /// Number of geometric samples `t 2^{i/N}`, `i < N`, of `s ∈ [t, 2t)`.
    pub sup_samples: usize,
    pub j_min: i32,
    pub j_max: i32,
}

impl OperatorConfig {
    pub fn new(measure: DiscreteMeasure, scale_t: f64) -> Result<Self> {
        let cfg = OperatorConfig { measure, scale_t, sup_samples: DEFAULT_SUP_SAMPLES, j_min: 0, j_max: 0 };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_sup_samples(mut self, n: usize) -> Result<Self> {
        self.sup_samples = n;
        self.validate()?;
        Ok(self)
    }

    pub fn with_j_range(mut self, j_min: i32, j_max: i32) -> Result<Self> {
        self.j_min = j_min;
        self.j_max = j_max;
        self.validate()?;
        Ok(self)
    }

    pub fn with_scale(&self, t: f64) -> Result<Self> {
        let mut c = self.clone();
        c.scale_t = t;
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.scale_t > 0.0) || !self.scale_t.is_finite() {
            return Err(Error::InvalidParameters(format!("scale t = {}", self.scale_t)));
        }
        if self.sup_samples == 0 {
            return Err(Error::InvalidParameters("sup_samples must be at least 1".into()));
        }
        if self.j_min > self.j_max {
            return Err(Error::InvalidParameters("empty j range".into()));
        }
        Ok(())
    }

    /// Sampled scales `t 2^{i/N}` of the octave `[t, 2t)`.
    pub fn octave(&self, t: f64) -> Vec<f64> {
        (0..self.sup_samples).map(|i| t * 2f64.powf(i as f64 / self.sup_samples as f64)).collect()
    }
}

fn check_pair(f: &GridFunction, g: &GridFunction, mu: &DiscreteMeasure) -> Result<()> {
    if !f.same_grid(g) {
        return Err(Error::InvalidParameters("f and g live on different grids".into()));
    }
    if f.dim != mu.dim {
        return Err(Error::InvalidParameters(format!(
            "function dimension {} but measure dimension {}",
            f.dim, mu.dim
        )));
    }
    Ok(())
}

fn scaled(v: &[f64], t: f64) -> Vec<f64> {
    v.iter().map(|c| c * t).collect()
}

/// `out(x) = Σ_k w_k f(x - a_k) g(x - b_k)` at every cell center.
pub fn shifted_product_sum(f: &GridFunction, g: &GridFunction, terms: &[(f64, Vec<f64>, Vec<f64>)]) -> Vec<f64> {
    let spec = f.spec();
    let mut out = vec![0.0; spec.len()];
    for (w, a, b) in terms {
        let sf = f.stencil(a);
        let sg = g.stencil(b);
        match spec.dim {
            1 => {
                for (i, o) in out.iter_mut().enumerate() {
                    *o += w * f.sample(&sf, &[i]) * g.sample(&sg, &[i]);
                }
            }
            2 => {
                let n = spec.n;
                for i in 0..n {
                    for j in 0..n {
                        let m = [i, j];
                        out[i * n + j] += w * f.sample(&sf, &m) * g.sample(&sg, &m);
                    }
                }
            }
            _ => {
                for (k, o) in out.iter_mut().enumerate() {
                    let m = spec.multi_index(k);
                    *o += w * f.sample(&sf, &m) * g.sample(&sg, &m);
                }
            }
        }
    }
    out
}

fn forward_terms(mu: &DiscreteMeasure, t: f64) -> Vec<(f64, Vec<f64>, Vec<f64>)> {
    (0..mu.len()).map(|k| (mu.weights[k], scaled(mu.y(k), t), scaled(mu.z(k), t))).collect()
}

/// `L_t(f,g)` at scale `t`.
pub fn scale_average_at(f: &GridFunction, g: &GridFunction, mu: &DiscreteMeasure, t: f64) -> Result<GridFunction> {
    check_pair(f, g, mu)?;
    Ok(f.with_values(shifted_product_sum(f, g, &forward_terms(mu, t))))
}

pub fn scale_average(f: &GridFunction, g: &GridFunction, cfg: &OperatorConfig) -> Result<GridFunction> {
    cfg.validate()?;
    scale_average_at(f, g, &cfg.measure, cfg.scale_t)
}

fn abs_max_into(acc: &mut [f64], v: &[f64]) {
    for (a, b) in acc.iter_mut().zip(v) {
        *a = a.max(b.abs());
    }
}

fn octave_max(f: &GridFunction, g: &GridFunction, cfg: &OperatorConfig, t: f64) -> Vec<f64> {
    let mut acc = vec![0.0; f.values.len()];
    for s in cfg.octave(t) {
        abs_max_into(&mut acc, &shifted_product_sum(f, g, &forward_terms(&cfg.measure, s)));
    }
    acc
}

/// `sup_{s ∈ [t,2t]} |L_s(f,g)|` over the sampled octave.
pub fn single_scale_maximal(f: &GridFunction, g: &GridFunction, cfg: &OperatorConfig) -> Result<GridFunction> {
    cfg.validate()?;
    check_pair(f, g, &cfg.measure)?;
    Ok(f.with_values(octave_max(f, g, cfg, cfg.scale_t)))
}

/// `max_{j_min ≤ j ≤ j_max} |L_{2^j}(f,g)|`.
pub fn lacunary_maximal(f: &GridFunction, g: &GridFunction, cfg: &OperatorConfig) -> Result<GridFunction> {
    cfg.validate()?;
    check_pair(f, g, &cfg.measure)?;
    let mut acc = vec![0.0; f.values.len()];
    for j in cfg.j_min..=cfg.j_max {
        let t = 2f64.powi(j);
        abs_max_into(&mut acc, &shifted_product_sum(f, g, &forward_terms(&cfg.measure, t)));
    }
    Ok(f.with_values(acc))
}

/// `max_j` of the single-scale maximal operator at `t = 2^j`.
pub fn full_maximal(f: &GridFunction, g: &GridFunction, cfg: &OperatorConfig) -> Result<GridFunction> {
    cfg.validate()?;
    check_pair(f, g, &cfg.measure)?;
    let mut acc = vec![0.0; f.values.len()];
    for j in cfg.j_min..=cfg.j_max {
        let m = octave_max(f, g, cfg, 2f64.powi(j));
        abs_max_into(&mut acc, &m);
    }
    Ok(f.with_values(acc))
}

/// Cutoff applied to an argument: everything, or a union of disjoint boxes.
#[derive(Clone, Debug)]
pub enum Cutoff {
    All,
    Boxes(Vec<AxisBox>),
}

impl Cutoff {
    fn admits(&self, x: &[f64]) -> bool {
        match self {
            Cutoff::All => true,
            Cutoff::Boxes(bs) => bs.iter().any(|b| b.contains(x)),
        }
    }
}

/// `Σ_k w_k (1_A f)(x - t y_k) (1_B g)(x - t z_k)` at the listed cells, with
/// the cutoffs applied to the exact sample points.
pub fn cutoff_average(
    f: &GridFunction,
    g: &GridFunction,
    mu: &DiscreteMeasure,
    t: f64,
    cut_f: &Cutoff,
    cut_g: &Cutoff,
    cells: &[usize],
) -> Result<Vec<f64>> {
    check_pair(f, g, mu)?;
    let spec = f.spec();
    let mut out = vec![0.0; cells.len()];
    let mut p = vec![0.0; spec.dim];
    let mut q = vec![0.0; spec.dim];
    for k in 0..mu.len() {
        let a = scaled(mu.y(k), t);
        let b = scaled(mu.z(k), t);
        let sf = f.stencil(&a);
        let sg = g.stencil(&b);
        let w = mu.weights[k];
        for (o, &c) in out.iter_mut().zip(cells) {
            let x = spec.center(c);
            for i in 0..spec.dim {
                p[i] = x[i] - a[i];
                q[i] = x[i] - b[i];
            }
            if !cut_f.admits(&p) || !cut_g.admits(&q) {
                continue;
            }
            let m = spec.multi_index(c);
            *o += w * f.sample(&sf, &m) * g.sample(&sg, &m);
        }
    }
    Ok(out)
}

/// Operator scale `2^{l(Q)-3}` for a cube of side `2^{l(Q)}`.
pub fn localized_scale(fam: &LatticeFamily, q: &DyadicCube) -> f64 {
    fam.side(q.generation) / 8.0
}

fn support_guard(mu: &DiscreteMeasure, fam: &LatticeFamily, q: &DyadicCube, margin: f64) -> Result<()> {
    let reach = localized_scale(fam, q) * mu.max_coordinate();
    if reach > margin * fam.side(q.generation) {
        return Err(Error::Geometry(format!(
            "measure reach {reach} exceeds the support margin of a cube of side {}",
            fam.side(q.generation)
        )));
    }
    Ok(())
}

fn cube_cells(spec: &GridSpec, fam: &LatticeFamily, q: &DyadicCube) -> Vec<usize> {
    let ranges = spec.box_cells(&fam.cube_box(q));
    crate::grid::block_indices(spec, &ranges)
}

fn scatter(f: &GridFunction, cells: &[usize], vals: &[f64]) -> GridFunction {
    let mut v = vec![0.0; f.values.len()];
    for (&c, &x) in cells.iter().zip(vals) {
        v[c] = x;
    }
    f.with_values(v)
}

/// `L_Q^j(f,g) = L_{2^{l(Q)-3}}(1_{(1/3)Q} f, 1_{((1/3)Q)(j)} g)` evaluated at
/// every cell, without restricting to `Q`.
pub fn localized_operator_unrestricted(
    f: &GridFunction,
    g: &GridFunction,
    q: &DyadicCube,
    j: usize,
    cfg: &OperatorConfig,
) -> Result<GridFunction> {
    let fam = f.spec().lattice();
    let a = Cutoff::Boxes(vec![fam.middle_third(q)]);
    let b = Cutoff::Boxes(vec![fam.third_subcube(q, j)?]);
    let cells: Vec<usize> = (0..f.values.len()).collect();
    let vals = cutoff_average(f, g, &cfg.measure, localized_scale(&fam, q), &a, &b, &cells)?;
    Ok(f.with_values(vals))
}

/// `L_Q^j(f,g)`, evaluated on the cells of `Q`. The support claim
/// `supp L_Q^j ⊆ Q` is checked geometrically: every node displacement must
/// stay within `l(Q)/3`.
pub fn localized_operator(
    f: &GridFunction,
    g: &GridFunction,
    q: &DyadicCube,
    j: usize,
    cfg: &OperatorConfig,
) -> Result<GridFunction> {
    let (cells, vals) = localized_on_cube(f, g, q, j, &cfg.measure)?;
    Ok(scatter(f, &cells, &vals))
}

/// `L_Q^j(f,g)` as (cells of `Q`, values).
pub fn localized_on_cube(
    f: &GridFunction,
    g: &GridFunction,
    q: &DyadicCube,
    j: usize,
    mu: &DiscreteMeasure,
) -> Result<(Vec<usize>, Vec<f64>)> {
    let spec = f.spec();
    let fam = spec.lattice();
    support_guard(mu, &fam, q, 1.0 / 3.0)?;
    let a = Cutoff::Boxes(vec![fam.middle_third(q)]);
    let b = Cutoff::Boxes(vec![fam.third_subcube(q, j)?]);
    let cells = cube_cells(&spec, &fam, q);
    let vals = cutoff_average(f, g, mu, localized_scale(&fam, q), &a, &b, &cells)?;
    Ok((cells, vals))
}

/// `S_{Q,j}(f,g) = L_{2^{l(Q)-3}}(1_{(1/2)Q} f, 1_{Q~(j)} g)`; the domination
/// `S_{Q,j} ≥ L_Q^j` is checked on the cells of `Q`.
pub fn enlarged_operator(
    f: &GridFunction,
    g: &GridFunction,
    q: &DyadicCube,
    j: usize,
    cfg: &OperatorConfig,
) -> Result<GridFunction> {
    f.require_nonneg("f")?;
    g.require_nonneg("g")?;
    let spec = f.spec();
    let fam = spec.lattice();
    support_guard(&cfg.measure, &fam, q, 0.25)?;
    let cover: Vec<AxisBox> = fam.enlarged_cover(q, j)?.iter().map(|c| fam.cube_box(c)).collect();
    let a = Cutoff::Boxes(vec![fam.middle_half(q)]);
    let b = Cutoff::Boxes(cover);
    let cells = cube_cells(&spec, &fam, q);
    let vals = cutoff_average(f, g, &cfg.measure, localized_scale(&fam, q), &a, &b, &cells)?;
    let (_, small) = localized_on_cube(f, g, q, j, &cfg.measure)?;
    for (s, l) in vals.iter().zip(&small) {
        if *s < *l - 1e-12 * (1.0 + l.abs()) {
            return Err(Error::Geometry(format!("enlarged operator {s} below localized {l}")));
        }
    }
    Ok(scatter(f, &cells, &vals))
}

/// Shifts `(w, shift of g, shift of h)` of the first adjoint kernel
/// `g(x - s(z - y)) h(x + s y)`.
pub fn adjoint1_terms(mu: &DiscreteMeasure, s: f64) -> Vec<(f64, Vec<f64>, Vec<f64>)> {
    (0..mu.len())
        .map(|k| {
            let (y, z) = (mu.y(k), mu.z(k));
            let gs = y.iter().zip(z).map(|(a, b)| s * (b - a)).collect();
            let hs = y.iter().map(|a| -s * a).collect();
            (mu.weights[k], gs, hs)
        })
        .collect()
}

/// Shifts `(w, shift of f, shift of h)` of the second adjoint kernel
/// `f(x - s(y - z)) h(x + s z)`.
pub fn adjoint2_terms(mu: &DiscreteMeasure, s: f64) -> Vec<(f64, Vec<f64>, Vec<f64>)> {
    (0..mu.len())
        .map(|k| {
            let (y, z) = (mu.y(k), mu.z(k));
            let fs = y.iter().zip(z).map(|(a, b)| s * (a - b)).collect();
            let hs = z.iter().map(|b| -s * b).collect();
            (mu.weights[k], fs, hs)
        })
        .collect()
}

/// `S^{*,1}(g,h)` with `⟨S(f,g), h⟩ = ⟨f, S^{*,1}(g,h)⟩`, at scale `cfg.scale_t`.
pub fn adjoint_1(g: &GridFunction, h: &GridFunction, cfg: &OperatorConfig) -> Result<GridFunction> {
    check_pair(g, h, &cfg.measure)?;
    Ok(g.with_values(shifted_product_sum(g, h, &adjoint1_terms(&cfg.measure, cfg.scale_t))))
}

/// `S^{*,2}(f,h)` with `⟨S(f,g), h⟩ = ⟨g, S^{*,2}(f,h)⟩`.
pub fn adjoint_2(f: &GridFunction, h: &GridFunction, cfg: &OperatorConfig) -> Result<GridFunction> {
    check_pair(f, h, &cfg.measure)?;
    Ok(f.with_values(shifted_product_sum(f, h, &adjoint2_terms(&cfg.measure, cfg.scale_t))))
}

/// Knots of `x ↦ φ~(x - σ)` along one axis, with its support interval.
fn knots(phi: &GridFunction, axis: usize, sigma: f64) -> (Vec<f64>, f64, f64) {
    let h = phi.h();
    let o = phi.origin[axis] + sigma;
    let ks: Vec<f64> = (-1..=phi.n as i64).map(|i| o + (i as f64 + 0.5) * h).collect();
    (ks, o - 0.5 * h, o + (phi.n as f64 + 0.5) * h)
}

/// `∫ Π_i φ_i~(x - σ_i) dx` for multilinear interpolants, computed exactly
/// by two-point Gauss rules on the common refinement of the knot lattices.
pub fn exact_triple_integral(phis: [&GridFunction; 3], shifts: [&[f64]; 3]) -> f64 {
    let dim = phis[0].dim;
    let mut axes = Vec::with_capacity(dim);
    for ax in 0..dim {
        let mut pts = Vec::new();
        let (mut lo, mut hi) = (f64::NEG_INFINITY, f64::INFINITY);
        for (phi, s) in phis.iter().zip(shifts.iter()) {
            let (ks, a, b) = knots(phi, ax, s[ax]);
            pts.extend(ks);
            lo = lo.max(a);
            hi = hi.min(b);
        }
        if lo >= hi {
            return 0.0;
        }
        pts.retain(|&p| p > lo && p < hi);
        pts.push(lo);
        pts.push(hi);
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        pts.dedup();
        let g = 0.5 / 3f64.sqrt();
        let mut nodes = Vec::with_capacity(2 * pts.len());
        for w in pts.windows(2) {
            let (m, l) = (0.5 * (w[0] + w[1]), w[1] - w[0]);
            nodes.push((m - g * l, 0.5 * l));
            nodes.push((m + g * l, 0.5 * l));
        }
        axes.push(nodes);
    }
    let eval = |x: &[f64]| -> f64 {
        let mut p = 1.0;
        let mut y = vec![0.0; dim];
        for (phi, s) in phis.iter().zip(shifts.iter()) {
            for i in 0..dim {
                y[i] = x[i] - s[i];
            }
            p *= phi.eval(&y);
            if p == 0.0 {
                return 0.0;
            }
        }
        p
    };
    match dim {
        1 => axes[0].iter().map(|&(x, w)| w * eval(&[x])).sum(),
        2 => {
            let mut total = 0.0;
            for &(x, wx) in &axes[0] {
                for &(y, wy) in &axes[1] {
                    total += wx * wy * eval(&[x, y]);
                }
            }
            total
        }
        _ => unimplemented!("exact pairing is provided for d ≤ 2"),
    }
}

/// `⟨S(f,g), h⟩` with interpolants integrated exactly.
pub fn exact_forward_pairing(f: &GridFunction, g: &GridFunction, h: &GridFunction, cfg: &OperatorConfig) -> f64 {
    let zero = vec![0.0; f.dim];
    forward_terms(&cfg.measure, cfg.scale_t)
        .iter()
        .map(|(w, a, b)| w * exact_triple_integral([f, g, h], [a, b, &zero]))
        .sum()
}

/// `⟨f, S^{*,1}(g,h)⟩` with interpolants integrated exactly.
pub fn exact_adjoint1_pairing(f: &GridFunction, g: &GridFunction, h: &GridFunction, cfg: &OperatorConfig) -> f64 {
    let zero = vec![0.0; f.dim];
    adjoint1_terms(&cfg.measure, cfg.scale_t)
        .iter()
        .map(|(w, gs, hs)| w * exact_triple_integral([f, g, h], [&zero, gs, hs]))
        .sum()
}

/// `⟨g, S^{*,2}(f,h)⟩` with interpolants integrated exactly.
pub fn exact_adjoint2_pairing(f: &GridFunction, g: &GridFunction, h: &GridFunction, cfg: &OperatorConfig) -> f64 {
    let zero = vec![0.0; f.dim];
    adjoint2_terms(&cfg.measure, cfg.scale_t)
        .iter()
        .map(|(w, fs, hs)| w * exact_triple_integral([g, f, h], [&zero, fs, hs]))
        .sum()
}

fn check_t_field(f: &GridFunction, tf: &GridFunction) -> Result<()> {
    if !f.same_grid(tf) {
        return Err(Error::InvalidParameters("t field on a different grid".into()));
    }
    if tf.values.iter().any(|&v| !(1.0..=2.0).contains(&v)) {
        return Err(Error::InvalidParameters("t field values must lie in [1, 2]".into()));
    }
    Ok(())
}

/// `T_{t(x)}(f,g)(x) = L_{t_0 t(x)}(f,g)(x)` with `t_0 = cfg.scale_t`.
pub fn linearized_full(
    f: &GridFunction,
    g: &GridFunction,
    t_field: &GridFunction,
    cfg: &OperatorConfig,
) -> Result<GridFunction> {
    check_pair(f, g, &cfg.measure)?;
    check_t_field(f, t_field)?;
    let spec = f.spec();
    let mu = &cfg.measure;
    let mut out = vec![0.0; spec.len()];
    let mut p = vec![0.0; spec.dim];
    let mut q = vec![0.0; spec.dim];
    for (c, o) in out.iter_mut().enumerate() {
        let x = spec.center(c);
        let tau = cfg.scale_t * t_field.values[c];
        for k in 0..mu.len() {
            let (y, z) = (mu.y(k), mu.z(k));
            for i in 0..spec.dim {
                p[i] = x[i] - tau * y[i];
                q[i] = x[i] - tau * z[i];
            }
            *o += mu.weights[k] * f.eval(&p) * g.eval(&q);
        }
    }
    Ok(f.with_values(out))
}

/// Interpolation weights of `φ~(p)` as `(cell index, weight)` pairs.
fn interp_weights(spec: &GridSpec, p: &[f64], out: &mut Vec<(usize, f64)>) {
    out.clear();
    let h = spec.h();
    let n = spec.n as i64;
    let mut base = vec![0i64; spec.dim];
    let mut frac = vec![0.0; spec.dim];
    for k in 0..spec.dim {
        let u = (p[k] - spec.origin[k]) / h - 0.5;
        let fl = u.floor();
        base[k] = fl as i64;
        frac[k] = u - fl;
    }
    'corner: for bits in 0..(1usize << spec.dim) {
        let mut w = 1.0;
        let mut idx = 0i64;
        for k in 0..spec.dim {
            let b = ((bits >> k) & 1) as i64;
            let i = base[k] + b;
            if i < 0 || i >= n {
                continue 'corner;
            }
            idx = idx * n + i;
            w *= if b == 1 { frac[k] } else { 1.0 - frac[k] };
        }
        if w != 0.0 {
            out.push((idx as usize, w));
        }
    }
}

/// Exact transpose in the first slot of the discretized `T_{t(x)}`:
/// `⟨T_{t(x)}(f,g), h⟩ = ⟨f, T^{*,1}_{t(x)}(g,h)⟩` on the grid.
pub fn linearized_adjoint_1(
    g: &GridFunction,
    h: &GridFunction,
    t_field: &GridFunction,
    cfg: &OperatorConfig,
) -> Result<GridFunction> {
    check_pair(g, h, &cfg.measure)?;
    check_t_field(g, t_field)?;
    let spec = g.spec();
    let mu = &cfg.measure;
    let mut out = vec![0.0; spec.len()];
    let mut p = vec![0.0; spec.dim];
    let mut q = vec![0.0; spec.dim];
    let mut ws = Vec::new();
    for c in 0..spec.len() {
        let hv = h.values[c];
        if hv == 0.0 {
            continue;
        }
        let x = spec.center(c);
        let tau = cfg.scale_t * t_field.values[c];
        for k in 0..mu.len() {
            let (y, z) = (mu.y(k), mu.z(k));
            for i in 0..spec.dim {
                p[i] = x[i] - tau * y[i];
                q[i] = x[i] - tau * z[i];
            }
            let coef = mu.weights[k] * hv * g.eval(&q);
            if coef == 0.0 {
                continue;
            }
            interp_weights(&spec, &p, &mut ws);
            for &(i, w) in &ws {
                out[i] += coef * w;
            }
        }
    }
    Ok(g.with_values(out))
}

/// The t field picking, at each cell, the sampled scale attaining the
/// single-scale maximum (first one on ties).
pub fn argmax_t_field(f: &GridFunction, g: &GridFunction, cfg: &OperatorConfig) -> Result<GridFunction> {
    check_pair(f, g, &cfg.measure)?;
    let mut best = vec![f64::NEG_INFINITY; f.values.len()];
    let mut arg = vec![1.0; f.values.len()];
    for s in cfg.octave(cfg.scale_t) {
        let v = shifted_product_sum(f, g, &forward_terms(&cfg.measure, s));
        for i in 0..v.len() {
            if v[i].abs() > best[i] {
                best[i] = v[i].abs();
                arg[i] = s / cfg.scale_t;
            }
        }
    }
    Ok(f.with_values(arg))
}
