//! Stopping families, Calderón–Zygmund splitting, linearization of the
//! localized maximal sum, and recursive construction of sparse families.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dyadic::DyadicCube;
use crate::error::{Error, Result};
use crate::grid::{GridFunction, GridSpec, PowerPyramid};
use crate::operators::{localized_on_cube, OperatorConfig};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StoppingConfig {
    pub c0: f64,
    pub p: f64,
    pub q: f64,
    pub r_prime: f64,
}

fn check_exponent(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0) || !v.is_finite() {
        return Err(Error::InvalidExponent(format!("{name} = {v}")));
    }
    Ok(())
}

impl StoppingConfig {
    pub fn new(c0: f64, p: f64, q: f64, r_prime: f64) -> Result<Self> {
        if !(c0 > 1.0) || !c0.is_finite() {
            return Err(Error::InvalidParameters(format!("C0 = {c0} must exceed 1")));
        }
        check_exponent("p", p)?;
        check_exponent("q", q)?;
        check_exponent("r'", r_prime)?;
        Ok(StoppingConfig { c0, p, q, r_prime })
    }
}

/// `C0 = 2 max(6^{1/p}, 6^{1/q}, 6^{1/r'})`: each exceptional set then has
/// measure below `|Q0| / (6 2^{exponent})`.
pub fn choose_c0(p: f64, q: f64, r_prime: f64) -> Result<StoppingConfig> {
    check_exponent("p", p)?;
    check_exponent("q", q)?;
    check_exponent("r'", r_prime)?;
    let c0 = 2.0 * [p, q, r_prime].iter().map(|e| 6f64.powf(1.0 / e)).fold(0.0, f64::max);
    StoppingConfig::new(c0, p, q, r_prime)
}

/// The grid-lattice cubes inside `root` down to generation `finest`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CubeFamily {
    pub root: DyadicCube,
    pub finest: i32,
}

impl CubeFamily {
    /// All subcubes of `root` resolved by the grid.
    pub fn full(spec: &GridSpec, root: &DyadicCube) -> Result<Self> {
        spec.cube_cells(root)?;
        Ok(CubeFamily { root: root.clone(), finest: -(spec.levels() as i32) })
    }

    /// Subcubes of `root` at most `depth` generations below it.
    pub fn truncated(spec: &GridSpec, root: &DyadicCube, depth: u32) -> Result<Self> {
        spec.cube_cells(root)?;
        let finest = (root.generation - depth as i32).max(-(spec.levels() as i32));
        Ok(CubeFamily { root: root.clone(), finest })
    }

    pub fn contains(&self, q: &DyadicCube) -> bool {
        if q.lattice_id != 1 || q.generation > self.root.generation || q.generation < self.finest {
            return false;
        }
        let k = self.root.generation - q.generation;
        q.corner.iter().zip(&self.root.corner).all(|(c, r)| c >> k == *r)
    }

    /// The members inside `q`, rooted at `q`.
    pub fn restricted(&self, q: &DyadicCube) -> Self {
        CubeFamily { root: q.clone(), finest: self.finest }
    }
}

fn children(q: &DyadicCube) -> Vec<DyadicCube> {
    let d = q.dim;
    (0..1usize << d)
        .map(|bits| {
            let corner = (0..d).map(|i| 2 * q.corner[i] + ((bits >> (d - 1 - i)) & 1) as i64).collect();
            DyadicCube::new(q.lattice_id, q.generation - 1, corner)
        })
        .collect()
}

/// Whether `inner` is a (non-strict) subcube of `outer`, both in the grid lattice.
pub fn is_subcube(outer: &DyadicCube, inner: &DyadicCube) -> bool {
    if inner.generation > outer.generation {
        return false;
    }
    let k = outer.generation - inner.generation;
    inner.corner.iter().zip(&outer.corner).all(|(c, o)| c >> k == *o)
}

/// Power pyramids of `f^p`, `g^q`, `h^{r'}`.
pub struct TriplePyramids {
    pub spec: GridSpec,
    pub pyr: [PowerPyramid; 3],
}

impl TriplePyramids {
    pub fn new(f: &GridFunction, g: &GridFunction, h: &GridFunction, cfg: &StoppingConfig) -> Result<Self> {
        if !f.same_grid(g) || !f.same_grid(h) {
            return Err(Error::InvalidParameters("f, g, h live on different grids".into()));
        }
        Ok(TriplePyramids {
            spec: f.spec(),
            pyr: [PowerPyramid::new(f, cfg.p)?, PowerPyramid::new(g, cfg.q)?, PowerPyramid::new(h, cfg.r_prime)?],
        })
    }

    pub fn averages(&self, q: &DyadicCube) -> [f64; 3] {
        [self.pyr[0].average(q), self.pyr[1].average(q), self.pyr[2].average(q)]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StoppingSets {
    /// Maximal offending cubes, disjoint.
    pub e_set: Vec<DyadicCube>,
    /// Members of the family not inside any offending cube.
    pub d0: Vec<DyadicCube>,
    pub degenerate: bool,
}

/// Coarse-to-fine scan for the maximal cubes whose normalized averages exceed `C0`.
pub fn stopping_family(
    f: &GridFunction,
    g: &GridFunction,
    h: &GridFunction,
    q0: &DyadicCube,
    cfg: &StoppingConfig,
    family: &CubeFamily,
) -> Result<StoppingSets> {
    let pyr = TriplePyramids::new(f, g, h, cfg)?;
    stopping_with(&pyr, q0, cfg, family)
}

pub fn stopping_with(pyr: &TriplePyramids, q0: &DyadicCube, cfg: &StoppingConfig, family: &CubeFamily) -> Result<StoppingSets> {
    if !family.contains(q0) {
        return Err(Error::Precondition("Q0 is not a member of the cube family".into()));
    }
    pyr.spec.cube_cells(q0)?;
    let base = pyr.averages(q0);
    let mut d0 = vec![q0.clone()];
    let mut e_set = Vec::new();
    if base.contains(&0.0) {
        let mut i = 0;
        while i < d0.len() {
            if d0[i].generation > family.finest {
                let kids = children(&d0[i]);
                d0.extend(kids);
            }
            i += 1;
        }
        d0.sort();
        return Ok(StoppingSets { e_set, d0, degenerate: true });
    }
    let mut i = 0;
    while i < d0.len() {
        if d0[i].generation > family.finest {
            for c in children(&d0[i]) {
                let a = pyr.averages(&c);
                if (0..3).any(|k| a[k] / base[k] > cfg.c0) {
                    e_set.push(c);
                } else {
                    d0.push(c);
                }
            }
        }
        i += 1;
    }
    d0.sort();
    e_set.sort();
    Ok(StoppingSets { e_set, d0, degenerate: false })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CZDecomposition {
    pub good: GridFunction,
    /// `β_{f,k}` keyed by the generation `k` of the bad cubes.
    pub bad_pieces: BTreeMap<i32, GridFunction>,
    /// Cells covered by the bad cubes of each generation.
    pub bad_masks: BTreeMap<i32, Vec<bool>>,
    pub bad_cubes: Vec<DyadicCube>,
    pub source: GridFunction,
    pub threshold: f64,
}

impl CZDecomposition {
    /// `good + Σ_k bad_pieces[k]`.
    pub fn reconstruct(&self) -> GridFunction {
        let mut v = self.good.values.clone();
        for b in self.bad_pieces.values() {
            for (a, x) in v.iter_mut().zip(&b.values) {
                *a += x;
            }
        }
        self.good.with_values(v)
    }

    /// `2^{d/p} 2 C0 ⟨f⟩_{Q0,p}`.
    pub fn good_bound(&self, p: f64) -> f64 {
        2f64.powf(self.source.dim as f64 / p) * self.threshold
    }
}

/// `f = γ_f + Σ_k β_{f,k}` over the maximal cubes `P ⊆ Q0` with
/// `⟨f⟩_{P,p} > 2 C0 ⟨f⟩_{Q0,p}`.
pub fn cz_decompose(f: &GridFunction, q0: &DyadicCube, p: f64, cfg: &StoppingConfig) -> Result<CZDecomposition> {
    f.require_nonneg("f")?;
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::InvalidExponent(format!("CZ decomposition needs p ≥ 1, got {p}")));
    }
    let spec = f.spec();
    let q0_cells = spec.cube_cells(q0)?.indices(&spec);
    let mut inside = vec![false; spec.len()];
    for &c in &q0_cells {
        inside[c] = true;
    }
    if f.values.iter().zip(&inside).any(|(v, &m)| *v != 0.0 && !m) {
        return Err(Error::Precondition("f must be supported in Q0".into()));
    }
    let pyr = PowerPyramid::new(f, p)?;
    let base = pyr.average(q0);
    let threshold = 2.0 * cfg.c0 * base;
    let mut out = CZDecomposition {
        good: f.clone(),
        bad_pieces: BTreeMap::new(),
        bad_masks: BTreeMap::new(),
        bad_cubes: Vec::new(),
        source: f.clone(),
        threshold,
    };
    if base == 0.0 {
        return Ok(out);
    }
    let finest = -(spec.levels() as i32);
    let mut queue = vec![q0.clone()];
    let mut i = 0;
    while i < queue.len() {
        if queue[i].generation > finest {
            for c in children(&queue[i]) {
                if pyr.average(&c) > threshold {
                    out.bad_cubes.push(c);
                } else {
                    queue.push(c);
                }
            }
        }
        i += 1;
    }
    out.bad_cubes.sort();
    let mut good = f.values.clone();
    for q in &out.bad_cubes {
        let cells = spec.cube_cells(q)?.indices(&spec);
        let mean = cells.iter().map(|&c| f.values[c]).sum::<f64>() / cells.len() as f64;
        let piece = out.bad_pieces.entry(q.generation).or_insert_with(|| GridFunction::zeros(&spec));
        let mask = out.bad_masks.entry(q.generation).or_insert_with(|| vec![false; spec.len()]);
        for &c in &cells {
            piece.values[c] = f.values[c] - mean;
            good[c] = mean;
            mask[c] = true;
        }
    }
    out.good = f.with_values(good);
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Linearization {
    pub cubes: Vec<DyadicCube>,
    pub j: usize,
    /// Cells of each cube, row-major.
    pub cells: Vec<Vec<usize>>,
    /// `L_Q^j(f,g)` on the cells of each cube.
    pub values: Vec<Vec<f64>>,
    pub h_sets: Vec<Vec<usize>>,
    pub b_sets: Vec<Vec<usize>>,
    /// `sup_{Q ∈ D0} |L_Q^j(f,g)|`.
    pub sup: GridFunction,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sandwich {
    /// `Σ_Q ⟨L_Q^j(f,g), h_Q⟩`.
    pub linearized: f64,
    /// `⟨sup_Q |L_Q^j(f,g)|, h⟩`.
    pub sup_pairing: f64,
}

impl Sandwich {
    pub fn holds(&self, tol: f64) -> bool {
        let s = tol * (1.0 + self.sup_pairing.abs());
        self.linearized <= self.sup_pairing + s && self.sup_pairing <= 2.0 * self.linearized + s
    }
}

impl Linearization {
    /// `h_Q = h 1_{B_Q}` for cube index `i`.
    pub fn h_piece(&self, h: &GridFunction, i: usize) -> GridFunction {
        let mut v = vec![0.0; h.values.len()];
        for &c in &self.b_sets[i] {
            v[c] = h.values[c];
        }
        h.with_values(v)
    }

    pub fn sandwich(&self, h: &GridFunction) -> Sandwich {
        let vol = h.cell_volume();
        let mut lin = 0.0;
        for i in 0..self.cubes.len() {
            let pos: BTreeMap<usize, f64> = self.cells[i].iter().copied().zip(self.values[i].iter().copied()).collect();
            lin += self.b_sets[i].iter().map(|c| pos[c] * h.values[*c]).sum::<f64>() * vol;
        }
        Sandwich { linearized: lin, sup_pairing: self.sup.inner(h) }
    }
}

/// Masks `H_Q = {x ∈ Q : L_Q^j(f,g)(x) ≥ sup/2}` and `B_Q = H_Q \ ⋃_{P ⊊ Q} H_P`.
/// Points where the supremum vanishes go to the smallest cube containing them.
pub fn linearize(
    d0: &[DyadicCube],
    f: &GridFunction,
    g: &GridFunction,
    j: usize,
    cfg: &OperatorConfig,
) -> Result<Linearization> {
    if d0.is_empty() {
        return Err(Error::Precondition("D0 must be nonempty".into()));
    }
    let mut cubes = d0.to_vec();
    cubes.sort();
    let mut cells = Vec::with_capacity(cubes.len());
    let mut values = Vec::with_capacity(cubes.len());
    let mut sup = vec![0.0f64; f.values.len()];
    for q in &cubes {
        let (c, v) = localized_on_cube(f, g, q, j, &cfg.measure)?;
        for (&i, x) in c.iter().zip(&v) {
            sup[i] = sup[i].max(x.abs());
        }
        cells.push(c);
        values.push(v);
    }
    let h_sets: Vec<Vec<usize>> = (0..cubes.len())
        .map(|k| cells[k].iter().zip(&values[k]).filter(|(&i, &v)| v >= 0.5 * sup[i]).map(|(&i, _)| i).collect())
        .collect();
    // Canonical order is coarse first, so walking backwards visits finer cubes first.
    let mut claimed = vec![false; f.values.len()];
    let mut b_sets = vec![Vec::new(); cubes.len()];
    for k in (0..cubes.len()).rev() {
        for &i in &h_sets[k] {
            if !claimed[i] {
                b_sets[k].push(i);
            }
        }
        for &i in &h_sets[k] {
            claimed[i] = true;
        }
    }
    Ok(Linearization { cubes, j, cells, values, h_sets, b_sets, sup: f.with_values(sup) })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SparseCollection {
    pub gamma: f64,
    pub grid: GridSpec,
    pub cubes: Vec<DyadicCube>,
    /// Sorted flat cell indices of each witness `F_Q`.
    pub witnesses: Vec<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
struct SparseCollectionJson {
    gamma: f64,
    grid: GridSpec,
    cubes: Vec<DyadicCube>,
    /// Runs `[start, length]` of each witness.
    witness_masks: Vec<Vec<[usize; 2]>>,
}

fn run_length(cells: &[usize]) -> Vec<[usize; 2]> {
    let mut runs: Vec<[usize; 2]> = Vec::new();
    for &c in cells {
        match runs.last_mut() {
            Some(r) if r[0] + r[1] == c => r[1] += 1,
            _ => runs.push([c, 1]),
        }
    }
    runs
}

impl SparseCollection {
    pub fn len(&self) -> usize {
        self.cubes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cubes.is_empty()
    }

    pub fn to_json(&self) -> Result<String> {
        let j = SparseCollectionJson {
            gamma: self.gamma,
            grid: self.grid.clone(),
            cubes: self.cubes.clone(),
            witness_masks: self.witnesses.iter().map(|w| run_length(w)).collect(),
        };
        Ok(serde_json::to_string(&j)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let j: SparseCollectionJson = serde_json::from_str(s)?;
        if j.cubes.len() != j.witness_masks.len() {
            return Err(Error::InvalidParameters("cube and witness counts differ".into()));
        }
        let witnesses = j
            .witness_masks
            .iter()
            .map(|runs| runs.iter().flat_map(|&[a, l]| a..a + l).collect())
            .collect();
        Ok(SparseCollection { gamma: j.gamma, grid: j.grid, cubes: j.cubes, witnesses })
    }

    /// Sort cubes (and witnesses) into canonical order.
    pub fn normalize(&mut self) {
        let mut pairs: Vec<(DyadicCube, Vec<usize>)> =
            self.cubes.drain(..).zip(self.witnesses.drain(..)).collect();
        pairs.sort_by(|a, b| a.0.cmp(&b.0));
        for (c, w) in pairs {
            self.cubes.push(c);
            self.witnesses.push(w);
        }
    }
}

/// One recursion stage of the sparse construction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StageTrace {
    pub cube: DyadicCube,
    pub stopping_cubes: usize,
    pub witness_fraction: f64,
    pub degenerate: bool,
}

/// Sparse subfamily of `family` built by repeating the stopping construction
/// inside every stopping cube.
pub fn build_sparse_family(
    f: &GridFunction,
    g: &GridFunction,
    h: &GridFunction,
    q0: &DyadicCube,
    cfg: &StoppingConfig,
    family: &CubeFamily,
) -> Result<SparseCollection> {
    Ok(build_sparse_family_traced(f, g, h, q0, cfg, family)?.0)
}

pub fn build_sparse_family_traced(
    f: &GridFunction,
    g: &GridFunction,
    h: &GridFunction,
    q0: &DyadicCube,
    cfg: &StoppingConfig,
    family: &CubeFamily,
) -> Result<(SparseCollection, Vec<StageTrace>)> {
    for (n, v) in [("f", f), ("g", g), ("h", h)] {
        v.require_nonneg(n)?;
    }
    let pyr = TriplePyramids::new(f, g, h, cfg)?;
    let spec = pyr.spec.clone();
    let mut out = SparseCollection { gamma: 0.5, grid: spec.clone(), cubes: Vec::new(), witnesses: Vec::new() };
    let mut trace = Vec::new();
    let mut stack = vec![q0.clone()];
    while let Some(p) = stack.pop() {
        let st = stopping_with(&pyr, &p, cfg, &family.restricted(&p))?;
        let mut removed = vec![false; spec.len()];
        for e in &st.e_set {
            for c in spec.cube_cells(e)?.indices(&spec) {
                removed[c] = true;
            }
        }
        let mut w: Vec<usize> = spec.cube_cells(&p)?.indices(&spec).into_iter().filter(|&c| !removed[c]).collect();
        w.sort_unstable();
        let total = spec.cube_cells(&p)?.count();
        trace.push(StageTrace {
            cube: p.clone(),
            stopping_cubes: st.e_set.len(),
            witness_fraction: w.len() as f64 / total as f64,
            degenerate: st.degenerate,
        });
        out.cubes.push(p);
        out.witnesses.push(w);
        stack.extend(st.e_set.into_iter().rev());
    }
    out.normalize();
    Ok((out, trace))
}

/// `Σ_{Q ∈ S} |Q| ⟨f⟩_{Q,p} ⟨g⟩_{Q,q} ⟨h⟩_{Q,r'}` in canonical cube order.
pub fn sparse_form(
    s: &SparseCollection,
    f: &GridFunction,
    g: &GridFunction,
    h: &GridFunction,
    p: f64,
    q: f64,
    r_prime: f64,
) -> Result<f64> {
    let cfg = StoppingConfig { c0: 2.0, p, q, r_prime };
    check_exponent("p", p)?;
    check_exponent("q", q)?;
    check_exponent("r'", r_prime)?;
    let pyr = TriplePyramids::new(f, g, h, &cfg)?;
    let fam = pyr.spec.lattice();
    let mut cubes = s.cubes.clone();
    cubes.sort();
    let mut total = 0.0;
    for c in &cubes {
        pyr.spec.cube_cells(c)?;
        let a = pyr.averages(c);
        total += fam.measure(c) * a[0] * a[1] * a[2];
    }
    Ok(total)
}

/// `Σ_{Q ∈ S} |Q| ⟨φ⟩_{Q,t}`.
pub fn sparse_average_sum(s: &SparseCollection, phi: &GridFunction, t: f64) -> Result<f64> {
    let pyr = PowerPyramid::new(phi, t)?;
    let spec = phi.spec();
    let fam = spec.lattice();
    let mut cubes = s.cubes.clone();
    cubes.sort();
    let mut total = 0.0;
    for c in &cubes {
        spec.cube_cells(c)?;
        total += fam.measure(c) * pyr.average(c);
    }
    Ok(total)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SparsityReport {
    pub pass: bool,
    pub gamma: f64,
    /// Smallest `|F_Q| / |Q|`.
    pub worst_ratio: f64,
    pub worst_cube: Option<DyadicCube>,
    pub overlapping_pair: Option<(DyadicCube, DyadicCube)>,
    pub violations: usize,
}

/// Checks `F_Q ⊆ Q`, `|F_Q| ≥ γ|Q|` and pairwise disjointness of witnesses.
pub fn verify_sparsity(s: &SparseCollection) -> SparsityReport {
    let spec = &s.grid;
    let mut owner: Vec<Option<usize>> = vec![None; spec.len()];
    let mut rep = SparsityReport {
        pass: true,
        gamma: s.gamma,
        worst_ratio: f64::INFINITY,
        worst_cube: None,
        overlapping_pair: None,
        violations: 0,
    };
    for (i, (q, w)) in s.cubes.iter().zip(&s.witnesses).enumerate() {
        let range = match spec.cube_cells(q) {
            Ok(r) => r,
            Err(_) => {
                rep.violations += 1;
                continue;
            }
        };
        let mut inside = 0usize;
        for &c in w {
            if c >= spec.len() {
                rep.violations += 1;
                continue;
            }
            let m = spec.multi_index(c);
            if m.iter().zip(&range.lo).all(|(&a, &l)| a >= l && a < l + range.width) {
                inside += 1;
            } else {
                rep.violations += 1;
            }
            match owner[c] {
                Some(o) if o != i => {
                    rep.violations += 1;
                    if rep.overlapping_pair.is_none() {
                        rep.overlapping_pair = Some((s.cubes[o].clone(), q.clone()));
                    }
                }
                _ => owner[c] = Some(i),
            }
        }
        let ratio = inside as f64 / range.count() as f64;
        if ratio < rep.worst_ratio {
            rep.worst_ratio = ratio;
            rep.worst_cube = Some(q.clone());
        }
        if ratio < s.gamma {
            rep.violations += 1;
        }
    }
    rep.pass = rep.violations == 0;
    rep
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec1(n: usize) -> GridSpec {
        GridSpec::unit(1, n).unwrap()
    }

    #[test]
    fn c0_formula() {
        assert!((choose_c0(1.0, 1.0, 1.0).unwrap().c0 - 12.0).abs() < 1e-12);
        assert!((choose_c0(2.0, 2.0, 2.0).unwrap().c0 - 2.0 * 6f64.sqrt()).abs() < 1e-12);
        assert!(choose_c0(0.0, 1.0, 1.0).is_err());
        assert!(StoppingConfig::new(1.0, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn constant_inputs_do_not_stop() {
        let s = spec1(16);
        let one = GridFunction::constant(&s, 1.0);
        let cfg = choose_c0(1.0, 1.0, 1.0).unwrap();
        let fam = CubeFamily::full(&s, &s.root_cube()).unwrap();
        let st = stopping_family(&one, &one, &one, &s.root_cube(), &cfg, &fam).unwrap();
        assert!(st.e_set.is_empty());
        assert_eq!(st.d0.len(), 31);
        let sp = build_sparse_family(&one, &one, &one, &s.root_cube(), &cfg, &fam).unwrap();
        assert_eq!(sp.cubes, vec![s.root_cube()]);
        assert_eq!(sp.witnesses[0].len(), 16);
        assert!(verify_sparsity(&sp).pass);
        let form = sparse_form(&sp, &one, &one, &one, 1.0, 1.0, 1.0).unwrap();
        assert!((form - 1.0).abs() < 1e-14);
        let two = one.scaled(2.0);
        assert!((sparse_form(&sp, &two, &one, &one, 1.0, 1.0, 1.0).unwrap() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn spike_stops_at_first_offender() {
        // Mass 1 in one cell of 64: ⟨f⟩ over a cube of 2^k cells is 2^{-k},
        // root average 1/64, so the ratio is 64/2^k and first exceeds 12 at 4 cells.
        let s = spec1(64);
        let mut v = vec![0.0; 64];
        v[37] = 1.0;
        let f = GridFunction::new(&s, v).unwrap();
        let one = GridFunction::constant(&s, 1.0);
        let cfg = choose_c0(1.0, 1.0, 1.0).unwrap();
        let fam = CubeFamily::full(&s, &s.root_cube()).unwrap();
        let st = stopping_family(&f, &one, &one, &s.root_cube(), &cfg, &fam).unwrap();
        assert_eq!(st.e_set, vec![DyadicCube::new(1, -4, vec![9])]);
        assert!(st.d0.iter().all(|q| !is_subcube(&st.e_set[0], q)));
        assert_eq!(st.d0.len() + 7, 127);
    }

    #[test]
    fn cz_of_spike() {
        let s = spec1(32);
        let mut v = vec![0.0; 32];
        v[5] = 32.0;
        let f = GridFunction::new(&s, v).unwrap();
        let cfg = choose_c0(1.0, 1.0, 1.0).unwrap();
        let cz = cz_decompose(&f, &s.root_cube(), 1.0, &cfg).unwrap();
        // Average over 2^k cells is 32/2^k against threshold 24: first bad at one cell.
        assert_eq!(cz.bad_cubes, vec![DyadicCube::new(1, -5, vec![5])]);
        let r = cz.reconstruct();
        assert!(r.values.iter().zip(&f.values).all(|(a, b)| (a - b).abs() < 1e-12));
        let one = GridFunction::constant(&s, 1.0);
        let cz1 = cz_decompose(&one, &s.root_cube(), 2.0, &cfg).unwrap();
        assert!(cz1.bad_cubes.is_empty());
        assert_eq!(cz1.good, one);
    }

    #[test]
    fn overlapping_witnesses_fail() {
        let s = spec1(8);
        let sc = SparseCollection {
            gamma: 0.5,
            grid: s.clone(),
            cubes: vec![s.root_cube(), DyadicCube::new(1, -1, vec![0])],
            witnesses: vec![(0..8).collect(), (0..4).collect()],
        };
        let rep = verify_sparsity(&sc);
        assert!(!rep.pass);
        assert!(rep.overlapping_pair.is_some());
        let ok = SparseCollection { witnesses: vec![(4..8).collect(), (0..4).collect()], ..sc };
        assert!(verify_sparsity(&ok).pass);
        let back = SparseCollection::from_json(&ok.to_json().unwrap()).unwrap();
        assert_eq!(back, ok);
    }

    #[test]
    fn family_membership() {
        let s = spec1(16);
        let fam = CubeFamily::truncated(&s, &DyadicCube::new(1, -1, vec![1]), 2).unwrap();
        assert!(fam.contains(&DyadicCube::new(1, -3, vec![5])));
        assert!(!fam.contains(&DyadicCube::new(1, -4, vec![10])));
        assert!(!fam.contains(&DyadicCube::new(1, -2, vec![0])));
    }
}
