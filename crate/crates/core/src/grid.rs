//! Sampled functions on a uniform grid over a root cube, and the scalar
//! primitives built on them.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dyadic::{AxisBox, DyadicCube, LatticeFamily};
use crate::error::{Error, Result};

/// Geometry of a grid: `n^d` cells of side `side / n` over `origin + [0, side)^d`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub dim: usize,
    pub origin: Vec<f64>,
    pub side: f64,
    pub n: usize,
}

impl GridSpec {
    pub fn new(dim: usize, origin: Vec<f64>, side: f64, n: usize) -> Result<Self> {
        if dim == 0 || origin.len() != dim {
            return Err(Error::InvalidDimension(dim));
        }
        if !n.is_power_of_two() {
            return Err(Error::InvalidParameters(format!("n = {n} is not a power of two")));
        }
        if !(side > 0.0 && side.is_finite()) {
            return Err(Error::InvalidParameters(format!("side = {side}")));
        }
        Ok(GridSpec { dim, origin, side, n })
    }

    /// Unit cube `[0,1)^d`.
    pub fn unit(dim: usize, n: usize) -> Result<Self> {
        Self::new(dim, vec![0.0; dim], 1.0, n)
    }

    /// Cube `[-half, half)^d`.
    pub fn centered(dim: usize, half: f64, n: usize) -> Result<Self> {
        Self::new(dim, vec![-half; dim], 2.0 * half, n)
    }

    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn h(&self) -> f64 {
        self.side / self.n as f64
    }

    pub fn cell_volume(&self) -> f64 {
        self.h().powi(self.dim as i32)
    }

    pub fn levels(&self) -> u32 {
        self.n.trailing_zeros()
    }

    /// Row-major multi-index (first axis slowest).
    pub fn multi_index(&self, mut idx: usize) -> Vec<usize> {
        let mut v = vec![0; self.dim];
        for i in (0..self.dim).rev() {
            v[i] = idx % self.n;
            idx /= self.n;
        }
        v
    }

    pub fn flat_index(&self, m: &[usize]) -> usize {
        m.iter().fold(0, |acc, &i| acc * self.n + i)
    }

    pub fn center(&self, idx: usize) -> Vec<f64> {
        let h = self.h();
        self.multi_index(idx)
            .iter()
            .zip(&self.origin)
            .map(|(&i, o)| o + (i as f64 + 0.5) * h)
            .collect()
    }

    pub fn domain(&self) -> AxisBox {
        AxisBox {
            lo: self.origin.clone(),
            hi: self.origin.iter().map(|o| o + self.side).collect(),
        }
    }

    /// The grid's dyadic lattice family; lattice 1 is aligned with the cells.
    pub fn lattice(&self) -> LatticeFamily {
        LatticeFamily::new(self.dim, self.side, self.origin.clone()).expect("valid grid")
    }

    pub fn root_cube(&self) -> DyadicCube {
        DyadicCube::new(1, 0, vec![0; self.dim])
    }

    /// Cell index ranges covered by a standard-lattice subcube of the root.
    pub fn cube_cells(&self, q: &DyadicCube) -> Result<CellRange> {
        if q.dim != self.dim || q.lattice_id != 1 {
            return Err(Error::InvalidParameters("cube is not in the grid lattice".into()));
        }
        if q.generation > 0 {
            return Err(Error::Precondition("cube larger than the grid domain".into()));
        }
        let level = (-q.generation) as u32;
        if level > self.levels() {
            return Err(Error::Resolution(format!(
                "cube of generation {} is finer than {} cells per axis",
                q.generation, self.n
            )));
        }
        let w = self.n >> level;
        let lim = 1i64 << level;
        let mut lo = Vec::with_capacity(self.dim);
        for &c in &q.corner {
            if c < 0 || c >= lim {
                return Err(Error::Precondition("cube outside the grid domain".into()));
            }
            lo.push(c as usize * w);
        }
        Ok(CellRange { lo, width: w })
    }

    /// Standard-lattice cube of the given level (0 = root) holding cell `idx`.
    pub fn cube_of_cell(&self, idx: usize, level: u32) -> DyadicCube {
        let shift = self.levels() - level;
        let corner = self.multi_index(idx).iter().map(|&i| (i >> shift) as i64).collect();
        DyadicCube::new(1, -(level as i32), corner)
    }

    /// Cells whose centers lie in `b`, as per-axis index ranges.
    pub fn box_cells(&self, b: &AxisBox) -> Vec<(usize, usize)> {
        let h = self.h();
        (0..self.dim)
            .map(|i| {
                let a = ((b.lo[i] - self.origin[i]) / h - 0.5).ceil().max(0.0) as usize;
                let e = ((b.hi[i] - self.origin[i]) / h - 0.5).ceil().max(0.0) as usize;
                (a.min(self.n), e.min(self.n))
            })
            .collect()
    }
}

/// Axis-aligned block of cells `lo[i] .. lo[i] + width`.
#[derive(Clone, Debug, PartialEq)]
pub struct CellRange {
    pub lo: Vec<usize>,
    pub width: usize,
}

impl CellRange {
    pub fn count(&self) -> usize {
        self.width.pow(self.lo.len() as u32)
    }

    /// Flat indices of the block in row-major order.
    pub fn indices(&self, spec: &GridSpec) -> Vec<usize> {
        let ranges: Vec<(usize, usize)> = self.lo.iter().map(|&l| (l, l + self.width)).collect();
        block_indices(spec, &ranges)
    }
}

/// Flat indices of a product of per-axis ranges, row-major.
pub fn block_indices(spec: &GridSpec, ranges: &[(usize, usize)]) -> Vec<usize> {
    let mut out = vec![0usize];
    for &(a, b) in ranges {
        let mut next = Vec::with_capacity(out.len() * (b.saturating_sub(a)));
        for base in &out {
            for i in a..b {
                next.push(base * spec.n + i);
            }
        }
        out = next;
    }
    out
}

/// Precomputed multilinear stencil for sampling at `x_cell - shift`.
#[derive(Clone, Debug)]
pub struct Stencil {
    pub off: Vec<i64>,
    pub frac: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridFunction {
    pub dim: usize,
    pub origin: Vec<f64>,
    pub side: f64,
    pub n: usize,
    pub values: Vec<f64>,
    #[serde(skip)]
    pub nonneg: bool,
}

impl GridFunction {
    pub fn new(spec: &GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != spec.len() {
            return Err(Error::InvalidParameters(format!(
                "{} values for a grid of {} cells",
                values.len(),
                spec.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameters("non-finite sample".into()));
        }
        let nonneg = values.iter().all(|&v| v >= 0.0);
        Ok(GridFunction {
            dim: spec.dim,
            origin: spec.origin.clone(),
            side: spec.side,
            n: spec.n,
            values,
            nonneg,
        })
    }

    pub fn zeros(spec: &GridSpec) -> Self {
        Self::new(spec, vec![0.0; spec.len()]).expect("zeros")
    }

    pub fn constant(spec: &GridSpec, c: f64) -> Self {
        Self::new(spec, vec![c; spec.len()]).expect("finite constant")
    }

    /// Sample `f` at the cell centers.
    pub fn from_fn(spec: &GridSpec, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let values = (0..spec.len()).map(|i| f(&spec.center(i))).collect();
        Self::new(spec, values)
    }

    pub fn spec(&self) -> GridSpec {
        GridSpec { dim: self.dim, origin: self.origin.clone(), side: self.side, n: self.n }
    }

    pub fn same_grid(&self, other: &GridFunction) -> bool {
        self.dim == other.dim && self.n == other.n && self.side == other.side && self.origin == other.origin
    }

    pub fn with_values(&self, values: Vec<f64>) -> Self {
        Self::new(&self.spec(), values).expect("same length")
    }

    pub fn h(&self) -> f64 {
        self.side / self.n as f64
    }

    pub fn cell_volume(&self) -> f64 {
        self.h().powi(self.dim as i32)
    }

    pub fn require_nonneg(&self, what: &str) -> Result<()> {
        if self.values.iter().any(|&v| v < 0.0) {
            return Err(Error::Precondition(format!("{what} must be nonnegative")));
        }
        Ok(())
    }

    pub fn stencil(&self, shift: &[f64]) -> Stencil {
        let h = self.h();
        let mut off = Vec::with_capacity(self.dim);
        let mut frac = Vec::with_capacity(self.dim);
        for s in shift {
            let u = -s / h;
            let fl = u.floor();
            off.push(fl as i64);
            frac.push(u - fl);
        }
        Stencil { off, frac }
    }

    #[inline]
    fn at(&self, m: &[i64]) -> f64 {
        let n = self.n as i64;
        let mut idx = 0i64;
        for &i in m {
            if i < 0 || i >= n {
                return 0.0;
            }
            idx = idx * n + i;
        }
        self.values[idx as usize]
    }

    #[inline]
    fn at1(&self, i: i64) -> f64 {
        if i < 0 || i >= self.n as i64 {
            0.0
        } else {
            self.values[i as usize]
        }
    }

    #[inline]
    fn at2(&self, i: i64, j: i64) -> f64 {
        let n = self.n as i64;
        if i < 0 || i >= n || j < 0 || j >= n {
            0.0
        } else {
            self.values[(i * n + j) as usize]
        }
    }

    /// Multilinear interpolant at `x_cell - shift`, cell given by multi-index.
    #[inline]
    pub fn sample(&self, st: &Stencil, m: &[usize]) -> f64 {
        match self.dim {
            1 => {
                let i = m[0] as i64 + st.off[0];
                let t = st.frac[0];
                (1.0 - t) * self.at1(i) + t * self.at1(i + 1)
            }
            2 => {
                let i = m[0] as i64 + st.off[0];
                let j = m[1] as i64 + st.off[1];
                let (s, t) = (st.frac[0], st.frac[1]);
                (1.0 - s) * ((1.0 - t) * self.at2(i, j) + t * self.at2(i, j + 1))
                    + s * ((1.0 - t) * self.at2(i + 1, j) + t * self.at2(i + 1, j + 1))
            }
            _ => {
                let base: Vec<i64> = m.iter().zip(&st.off).map(|(&a, b)| a as i64 + b).collect();
                self.corner_sum(&base, &st.frac)
            }
        }
    }

    fn corner_sum(&self, base: &[i64], frac: &[f64]) -> f64 {
        let mut total = 0.0;
        let mut idx = base.to_vec();
        for bits in 0..(1usize << self.dim) {
            let mut w = 1.0;
            for k in 0..self.dim {
                let b = (bits >> k) & 1;
                idx[k] = base[k] + b as i64;
                w *= if b == 1 { frac[k] } else { 1.0 - frac[k] };
            }
            if w != 0.0 {
                total += w * self.at(&idx);
            }
        }
        total
    }

    /// Multilinear interpolation through the cell centers, zero outside.
    pub fn eval(&self, x: &[f64]) -> f64 {
        let h = self.h();
        let mut base = Vec::with_capacity(self.dim);
        let mut frac = Vec::with_capacity(self.dim);
        for k in 0..self.dim {
            let u = (x[k] - self.origin[k]) / h - 0.5;
            let fl = u.floor();
            base.push(fl as i64);
            frac.push(u - fl);
        }
        match self.dim {
            1 => (1.0 - frac[0]) * self.at1(base[0]) + frac[0] * self.at1(base[0] + 1),
            _ => self.corner_sum(&base, &frac),
        }
    }

    /// Values of `x ↦ φ(x - shift)` at every cell center.
    pub fn shifted(&self, shift: &[f64]) -> Vec<f64> {
        let st = self.stencil(shift);
        let spec = self.spec();
        match self.dim {
            1 => (0..self.n).map(|i| self.sample(&st, &[i])).collect(),
            2 => {
                let mut out = Vec::with_capacity(spec.len());
                for i in 0..self.n {
                    for j in 0..self.n {
                        out.push(self.sample(&st, &[i, j]));
                    }
                }
                out
            }
            _ => (0..spec.len()).map(|k| self.sample(&st, &spec.multi_index(k))).collect(),
        }
    }

    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.cell_volume()
    }

    /// `(∫|φ|^t)^{1/t}` by the midpoint rule; `t = ∞` gives the max.
    pub fn lp_norm(&self, t: f64) -> f64 {
        if t.is_infinite() {
            return self.values.iter().fold(0.0, |m, v| m.max(v.abs()));
        }
        (self.values.iter().map(|v| v.abs().powf(t)).sum::<f64>() * self.cell_volume()).powf(1.0 / t)
    }

    /// Grid inner product `Σ φ ψ |cell|`.
    pub fn inner(&self, other: &GridFunction) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| a * b).sum::<f64>() * self.cell_volume()
    }

    pub fn scaled(&self, c: f64) -> Self {
        self.with_values(self.values.iter().map(|v| c * v).collect())
    }

    pub fn max_abs(&self) -> f64 {
        self.lp_norm(f64::INFINITY)
    }

    /// Multiply by the indicator of a cell set.
    pub fn masked(&self, mask: &[bool]) -> Self {
        self.with_values(self.values.iter().zip(mask).map(|(v, &m)| if m { *v } else { 0.0 }).collect())
    }

    /// CSV rows `index,value`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("index,value\n");
        for (i, v) in self.values.iter().enumerate() {
            s.push_str(&format!("{i},{v}\n"));
        }
        s
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let raw: GridFunction = serde_json::from_str(s)?;
        let spec = GridSpec::new(raw.dim, raw.origin, raw.side, raw.n)?;
        Self::new(&spec, raw.values)
    }
}

/// `⟨φ⟩_{Q,t} = ((1/|Q|) ∫_Q |φ|^t)^{1/t}` over the cells of `Q`.
pub fn lp_average(phi: &GridFunction, q: &DyadicCube, t: f64) -> Result<f64> {
    if !(t > 0.0) || t.is_nan() {
        return Err(Error::InvalidExponent(format!("t = {t}")));
    }
    let cells = phi.spec().cube_cells(q)?;
    let idx = cells.indices(&phi.spec());
    if t.is_infinite() {
        return Ok(idx.iter().fold(0.0, |m, &i| m.max(phi.values[i].abs())));
    }
    let s: f64 = idx.iter().map(|&i| phi.values[i].abs().powf(t)).sum();
    Ok((s / idx.len() as f64).powf(1.0 / t))
}

/// `x ↦ φ(x) - φ(x - y)`.
pub fn translate_diff(phi: &GridFunction, y: &[f64]) -> Result<GridFunction> {
    if y.len() != phi.dim || y.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameters("translation vector".into()));
    }
    let sh = phi.shifted(y);
    Ok(phi.with_values(phi.values.iter().zip(&sh).map(|(a, b)| a - b).collect()))
}

/// `x ↦ φ(x - y)`.
pub fn translate(phi: &GridFunction, y: &[f64]) -> GridFunction {
    phi.with_values(phi.shifted(y))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelSetDecomposition {
    pub exponents: Vec<i32>,
    pub masks: Vec<Vec<bool>>,
    /// Mass `∫ f` of the values below `2^{m_min}` that were dropped.
    pub residual_mass: f64,
    pub cell_volume: f64,
}

impl LevelSetDecomposition {
    pub fn mask(&self, m: i32) -> Option<&Vec<bool>> {
        self.exponents.iter().position(|&e| e == m).map(|k| &self.masks[k])
    }
}

fn dyadic_exponent(v: f64) -> i32 {
    let mut m = v.log2().floor() as i32;
    // Guard against rounding at exact powers of two.
    while 2f64.powi(m) > v {
        m -= 1;
    }
    while 2f64.powi(m + 1) <= v {
        m += 1;
    }
    m
}

/// `E_m = {2^m ≤ f < 2^{m+1}}` over the full positive range.
pub fn level_sets(f: &GridFunction) -> Result<LevelSetDecomposition> {
    f.require_nonneg("f")?;
    let min_pos = f.values.iter().copied().filter(|&v| v > 0.0).fold(f64::INFINITY, f64::min);
    let m_min = if min_pos.is_finite() { dyadic_exponent(min_pos) } else { 0 };
    level_sets_truncated(f, m_min)
}

/// Level sets with `m ≥ m_min`; smaller positive values go to the residual.
pub fn level_sets_truncated(f: &GridFunction, m_min: i32) -> Result<LevelSetDecomposition> {
    f.require_nonneg("f")?;
    let max = f.max_abs();
    let mut exponents = Vec::new();
    let mut masks = Vec::new();
    let mut residual = 0.0;
    if max > 0.0 {
        let m_max = dyadic_exponent(max);
        for m in m_min..=m_max {
            exponents.push(m);
            masks.push(vec![false; f.values.len()]);
        }
        for (i, &v) in f.values.iter().enumerate() {
            if v <= 0.0 {
                continue;
            }
            let m = dyadic_exponent(v);
            if m < m_min {
                residual += v;
            } else {
                masks[(m - m_min) as usize][i] = true;
            }
        }
    }
    Ok(LevelSetDecomposition {
        exponents,
        masks,
        residual_mass: residual * f.cell_volume(),
        cell_volume: f.cell_volume(),
    })
}

/// `∫_0^∞ μ{|f| > s}^{1/r} ds` with `μ` normalized Lebesgue measure on `Q0`.
pub fn lorentz_norm(f: &GridFunction, q0: &DyadicCube, r: f64) -> Result<f64> {
    if !(r >= 1.0) {
        return Err(Error::InvalidExponent(format!("r = {r} < 1")));
    }
    let spec = f.spec();
    let idx = spec.cube_cells(q0)?.indices(&spec);
    let inside: std::collections::HashSet<usize> = idx.iter().copied().collect();
    if f.values.iter().enumerate().any(|(i, &v)| v != 0.0 && !inside.contains(&i)) {
        return Err(Error::Precondition("f is not supported in Q0".into()));
    }
    let mut vals: Vec<f64> = idx.iter().map(|&i| f.values[i].abs()).collect();
    vals.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let n = vals.len() as f64;
    let mut total = 0.0;
    for k in 0..vals.len() {
        let next = if k + 1 < vals.len() { vals[k + 1] } else { 0.0 };
        total += (vals[k] - next) * ((k + 1) as f64 / n).powf(1.0 / r);
    }
    Ok(total)
}

/// Kinds of random inputs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TestFunctionKind {
    /// Union of `count` standard dyadic subcubes with levels in `[min_level, max_level]`.
    IndicatorUnionOfCubes { count: usize, min_level: u32, max_level: u32 },
    /// Sum of `count` Gaussian bumps with random centers in the middle half of
    /// the domain, widths in `[min_width, max_width]` and heights in `[0.5, 1]`.
    SmoothBumpMixture { count: usize, min_width: f64, max_width: f64 },
    /// Single-cell spike of total mass `mass`.
    Spike { mass: f64 },
}

pub fn random_test_function(seed: u64, kind: &TestFunctionKind, spec: &GridSpec) -> Result<GridFunction> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = vec![0.0; spec.len()];
    match kind {
        TestFunctionKind::IndicatorUnionOfCubes { count, min_level, max_level } => {
            if min_level > max_level || *max_level > spec.levels() {
                return Err(Error::InvalidParameters("indicator levels".into()));
            }
            for _ in 0..*count {
                let level = rng.gen_range(*min_level..=*max_level);
                let corner = (0..spec.dim).map(|_| rng.gen_range(0..(1i64 << level))).collect();
                let q = DyadicCube::new(1, -(level as i32), corner);
                for i in spec.cube_cells(&q)?.indices(spec) {
                    values[i] = 1.0;
                }
            }
        }
        TestFunctionKind::SmoothBumpMixture { count, min_width, max_width } => {
            let dom = spec.domain();
            let bumps: Vec<(Vec<f64>, f64, f64)> = (0..*count)
                .map(|_| {
                    let c = (0..spec.dim)
                        .map(|k| {
                            let w = dom.hi[k] - dom.lo[k];
                            dom.lo[k] + w * rng.gen_range(0.25..0.75)
                        })
                        .collect();
                    let width = if max_width > min_width { rng.gen_range(*min_width..*max_width) } else { *min_width };
                    (c, width, rng.gen_range(0.5..1.0))
                })
                .collect();
            for (i, v) in values.iter_mut().enumerate() {
                let x = spec.center(i);
                *v = bumps
                    .iter()
                    .map(|(c, w, a)| {
                        let r2: f64 = x.iter().zip(c).map(|(p, q)| (p - q) * (p - q)).sum();
                        a * (-r2 / (2.0 * w * w)).exp()
                    })
                    .sum();
            }
        }
        TestFunctionKind::Spike { mass } => {
            let i = rng.gen_range(0..spec.len());
            values[i] = mass / spec.cell_volume();
        }
    }
    GridFunction::new(spec, values)
}

/// Per-level sums of `|φ|^t` over the standard dyadic subcubes of the root.
#[derive(Clone, Debug)]
pub struct PowerPyramid {
    pub t: f64,
    pub dim: usize,
    /// `sums[level][flat corner]`, level 0 = root, flat corner row-major in `2^level` per axis.
    pub sums: Vec<Vec<f64>>,
}

impl PowerPyramid {
    pub fn new(phi: &GridFunction, t: f64) -> Result<Self> {
        if !(t > 0.0) || !t.is_finite() {
            return Err(Error::InvalidExponent(format!("t = {t}")));
        }
        let spec = phi.spec();
        let levels = spec.levels() as usize;
        let mut sums = vec![Vec::new(); levels + 1];
        sums[levels] = phi.values.iter().map(|v| v.abs().powf(t)).collect();
        for level in (0..levels).rev() {
            let m = 1usize << level;
            let fine = &sums[level + 1];
            let mut coarse = vec![0.0; m.pow(spec.dim as u32)];
            let fm = 2 * m;
            for (k, v) in fine.iter().enumerate() {
                let mut rest = k;
                let mut ck = 0usize;
                let mut mult = 1usize;
                for _ in 0..spec.dim {
                    let c = rest % fm;
                    rest /= fm;
                    ck += (c / 2) * mult;
                    mult *= m;
                }
                coarse[ck] += v;
            }
            sums[level] = coarse;
        }
        Ok(PowerPyramid { t, dim: spec.dim, sums })
    }

    pub fn levels(&self) -> u32 {
        (self.sums.len() - 1) as u32
    }

    /// Flat position of a grid-lattice cube within its level.
    pub fn slot(&self, q: &DyadicCube) -> (usize, usize) {
        let level = (-q.generation) as usize;
        let m = 1usize << level;
        let k = q.corner.iter().fold(0usize, |acc, &c| acc * m + c as usize);
        (level, k)
    }

    /// `⟨φ⟩_{Q,t}`.
    pub fn average(&self, q: &DyadicCube) -> f64 {
        let (level, k) = self.slot(q);
        let cells = (1usize << ((self.sums.len() - 1 - level) * self.dim)) as f64;
        (self.sums[level][k] / cells).powf(1.0 / self.t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(d: usize, n: usize) -> GridSpec {
        GridSpec::unit(d, n).unwrap()
    }

    #[test]
    fn averages_of_simple_functions() {
        let s = unit(1, 8);
        let q = s.root_cube();
        let c = GridFunction::constant(&s, 3.0);
        assert!((lp_average(&c, &q, 1.5).unwrap() - 3.0).abs() < 1e-12);
        let half = GridFunction::from_fn(&s, |x| if x[0] < 0.5 { 1.0 } else { 0.0 }).unwrap();
        assert!((lp_average(&half, &q, 1.0).unwrap() - 0.5).abs() < 1e-15);
        assert!((lp_average(&half, &q, 2.0).unwrap() - 0.5f64.sqrt()).abs() < 1e-15);
        assert!(matches!(lp_average(&half, &q, 0.0), Err(Error::InvalidExponent(_))));
        let tiny = DyadicCube::new(1, -4, vec![0]);
        assert!(matches!(lp_average(&half, &tiny, 1.0), Err(Error::Resolution(_))));
    }

    #[test]
    fn interpolation_reproduces_samples_and_zero_extends() {
        let s = unit(2, 4);
        let f = GridFunction::from_fn(&s, |x| x[0] + 2.0 * x[1]).unwrap();
        for i in 0..s.len() {
            assert!((f.eval(&s.center(i)) - f.values[i]).abs() < 1e-12);
        }
        assert_eq!(f.eval(&[-0.5, 0.5]), 0.0);
        // Affine data is reproduced between interior centers.
        let v = f.eval(&[0.4, 0.6]);
        assert!((v - (0.4 + 1.2)).abs() < 1e-12);
    }

    #[test]
    fn translate_by_zero_vanishes() {
        let s = unit(2, 8);
        let f = random_test_function(1, &TestFunctionKind::SmoothBumpMixture { count: 3, min_width: 0.05, max_width: 0.2 }, &s).unwrap();
        let d = translate_diff(&f, &[0.0, 0.0]).unwrap();
        assert!(d.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn level_set_examples() {
        let s = unit(1, 8);
        let ind = GridFunction::from_fn(&s, |x| if x[0] < 0.25 { 1.0 } else { 0.0 }).unwrap();
        let ls = level_sets(&ind).unwrap();
        assert_eq!(ls.exponents, vec![0]);
        assert_eq!(ls.masks[0].iter().filter(|&&b| b).count(), 2);
        let three = ind.scaled(3.0);
        let ls = level_sets(&three).unwrap();
        assert_eq!(ls.exponents, vec![1]);
        assert!(level_sets(&ind.scaled(-1.0)).is_err());
    }

    #[test]
    fn lorentz_simple_cases() {
        let s = unit(1, 16);
        let q = s.root_cube();
        let ind = GridFunction::from_fn(&s, |x| if x[0] < 0.25 { 1.0 } else { 0.0 }).unwrap();
        let r = 3.0;
        assert!((lorentz_norm(&ind, &q, r).unwrap() - 0.25f64.powf(1.0 / r)).abs() < 1e-12);
        let c = GridFunction::constant(&s, 2.5);
        assert!((lorentz_norm(&c, &q, 2.0).unwrap() - 2.5).abs() < 1e-12);
        assert!(lorentz_norm(&c, &q, 0.5).is_err());
    }

    #[test]
    fn generators_are_deterministic() {
        let s = unit(2, 16);
        let k = TestFunctionKind::IndicatorUnionOfCubes { count: 4, min_level: 1, max_level: 3 };
        let a = random_test_function(9, &k, &s).unwrap();
        let b = random_test_function(9, &k, &s).unwrap();
        assert_eq!(a, b);
        assert!(a.values.iter().all(|&v| v == 0.0 || v == 1.0));
        let spike = random_test_function(3, &TestFunctionKind::Spike { mass: 1.0 }, &s).unwrap();
        assert!((spike.integral() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn pyramid_matches_direct_average() {
        let s = unit(2, 16);
        let f = random_test_function(2, &TestFunctionKind::SmoothBumpMixture { count: 2, min_width: 0.1, max_width: 0.3 }, &s).unwrap();
        let p = PowerPyramid::new(&f, 1.7).unwrap();
        for level in 0..=4u32 {
            let q = DyadicCube::new(1, -(level as i32), vec![(1 << level) / 2, 0]);
            let direct = lp_average(&f, &q, 1.7).unwrap();
            assert!((p.average(&q) - direct).abs() < 1e-12 * (1.0 + direct));
        }
    }

    #[test]
    fn json_round_trip() {
        let s = unit(1, 4);
        let f = GridFunction::from_fn(&s, |x| x[0]).unwrap();
        let back = GridFunction::from_json(&f.to_json().unwrap()).unwrap();
        assert_eq!(back, f);
    }
}
