//! Exact rational geometry of exponent triples `(1/p, 1/q, 1/r)`: convex
//! hulls, half-space intersections, named boundedness regions and the
//! threshold arithmetic of the Fourier decay argument.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};

pub type Q = BigRational;

pub fn rat(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

fn int(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

/// Parse `a/b` or an integer.
pub fn parse_rational(s: &str) -> Result<Q> {
    let t = s.trim();
    let bad = || Error::InvalidParameters(format!("not a rational: {s}"));
    match t.split_once('/') {
        Some((a, b)) => {
            let a = BigInt::from_str(a.trim()).map_err(|_| bad())?;
            let b = BigInt::from_str(b.trim()).map_err(|_| bad())?;
            if b.is_zero() {
                return Err(bad());
            }
            Ok(Q::new(a, b))
        }
        None => Ok(Q::from_integer(BigInt::from_str(t).map_err(|_| bad())?)),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExponentTriple {
    pub inv_p: Q,
    pub inv_q: Q,
    pub inv_r: Q,
}

impl ExponentTriple {
    pub fn new(inv_p: Q, inv_q: Q, inv_r: Q) -> Result<Self> {
        if inv_p.is_negative() || inv_q.is_negative() || inv_r.is_negative() {
            return Err(Error::InvalidExponent("reciprocal exponents must be nonnegative".into()));
        }
        Ok(ExponentTriple { inv_p, inv_q, inv_r })
    }

    pub fn from_ratios(p: (i64, i64), q: (i64, i64), r: (i64, i64)) -> Self {
        ExponentTriple { inv_p: rat(p.0, p.1), inv_q: rat(q.0, q.1), inv_r: rat(r.0, r.1) }
    }

    /// Parse `a/b,c/d,e/f`.
    pub fn parse(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(',').collect();
        if parts.len() != 3 {
            return Err(Error::InvalidParameters(format!("expected three comma-separated rationals, got {s}")));
        }
        Self::new(parse_rational(parts[0])?, parse_rational(parts[1])?, parse_rational(parts[2])?)
    }

    fn coords(&self) -> [Q; 3] {
        [self.inv_p.clone(), self.inv_q.clone(), self.inv_r.clone()]
    }

    fn from_coords(c: [Q; 3]) -> Self {
        let [inv_p, inv_q, inv_r] = c;
        ExponentTriple { inv_p, inv_q, inv_r }
    }

    /// `1/r' = 1 - 1/r`.
    pub fn inv_r_prime(&self) -> Q {
        Q::one() - &self.inv_r
    }

    /// Reciprocal of the Hölder exponent `pq/(p+q)`.
    pub fn holder_inv(&self) -> Q {
        &self.inv_p + &self.inv_q
    }

    pub fn to_f64(&self) -> [f64; 3] {
        let f = |x: &Q| x.to_f64().unwrap_or(f64::NAN);
        [f(&self.inv_p), f(&self.inv_q), f(&self.inv_r)]
    }

    /// `(1-θ) self + θ other`.
    pub fn interpolate(&self, other: &Self, theta: &Q) -> Self {
        let a = self.coords();
        let b = other.coords();
        let s = Q::one() - theta;
        Self::from_coords([0, 1, 2].map(|i| &s * &a[i] + theta * &b[i]))
    }
}

impl fmt::Display for ExponentTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.inv_p, self.inv_q, self.inv_r)
    }
}

/// `normal · x ≤ bound`, stored with coprime integer coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Halfspace {
    pub normal: [Q; 3],
    pub bound: Q,
}

impl Halfspace {
    pub fn new(normal: [Q; 3], bound: Q) -> Self {
        let mut h = Halfspace { normal, bound };
        h.normalize();
        h
    }

    fn normalize(&mut self) {
        let all = [&self.normal[0], &self.normal[1], &self.normal[2], &self.bound];
        let l = all.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
        let ints: Vec<BigInt> = all.iter().map(|x| (*x * Q::from_integer(l.clone())).to_integer()).collect();
        let g = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
        if g.is_zero() {
            return;
        }
        let v: Vec<Q> = ints.into_iter().map(|x| Q::from_integer(x / &g)).collect();
        self.normal = [v[0].clone(), v[1].clone(), v[2].clone()];
        self.bound = v[3].clone();
    }

    pub fn value(&self, x: &ExponentTriple) -> Q {
        dot(&self.normal, &x.coords())
    }

    pub fn holds(&self, x: &ExponentTriple) -> bool {
        self.value(x) <= self.bound
    }

    pub fn strict(&self, x: &ExponentTriple) -> bool {
        self.value(x) < self.bound
    }

    /// `1/r ≤ 1/p`, i.e. `r ≥ p`.
    pub fn r_at_least_p() -> Self {
        Halfspace::new([int(-1), int(0), int(1)], int(0))
    }

    /// `1/r ≤ 1/q`, i.e. `r ≥ q`.
    pub fn r_at_least_q() -> Self {
        Halfspace::new([int(0), int(-1), int(1)], int(0))
    }
}

fn sub(a: &[Q; 3], b: &[Q; 3]) -> [Q; 3] {
    [&a[0] - &b[0], &a[1] - &b[1], &a[2] - &b[2]]
}

fn dot(a: &[Q; 3], b: &[Q; 3]) -> Q {
    &a[0] * &b[0] + &a[1] * &b[1] + &a[2] * &b[2]
}

fn cross(a: &[Q; 3], b: &[Q; 3]) -> [Q; 3] {
    [
        &a[1] * &b[2] - &a[2] * &b[1],
        &a[2] * &b[0] - &a[0] * &b[2],
        &a[0] * &b[1] - &a[1] * &b[0],
    ]
}

fn neg(a: &[Q; 3]) -> [Q; 3] {
    [-&a[0], -&a[1], -&a[2]]
}

fn is_zero(a: &[Q; 3]) -> bool {
    a.iter().all(|x| x.is_zero())
}

fn unit(k: usize) -> [Q; 3] {
    let mut v = [int(0), int(0), int(0)];
    v[k] = int(1);
    v
}

/// Unique solution of `a_i · x = b_i`, if the normals are independent.
fn solve3(a: [&[Q; 3]; 3], b: [&Q; 3]) -> Option<[Q; 3]> {
    let c = cross(a[1], a[2]);
    let det = dot(a[0], &c);
    if det.is_zero() {
        return None;
    }
    let cols = |j: usize| -> Q {
        let mut m = [a[0].clone(), a[1].clone(), a[2].clone()];
        for i in 0..3 {
            m[i][j] = b[i].clone();
        }
        dot(&m[0], &cross(&m[1], &m[2]))
    };
    Some([cols(0) / &det, cols(1) / &det, cols(2) / &det])
}

/// Affine dimension of a point set and a spanning set of directions.
fn affine_basis(pts: &[[Q; 3]]) -> (usize, Vec<[Q; 3]>) {
    let mut basis: Vec<[Q; 3]> = Vec::new();
    if pts.is_empty() {
        return (0, basis);
    }
    for p in &pts[1..] {
        let v = sub(p, &pts[0]);
        let independent = match basis.len() {
            0 => !is_zero(&v),
            1 => !is_zero(&cross(&basis[0], &v)),
            2 => !dot(&cross(&basis[0], &basis[1]), &v).is_zero(),
            _ => false,
        };
        if independent {
            basis.push(v);
        }
    }
    (basis.len(), basis)
}

fn side_halfspace(n: &[Q; 3], at: &[Q; 3], pts: &[[Q; 3]]) -> Option<Halfspace> {
    if is_zero(n) {
        return None;
    }
    let b = dot(n, at);
    let vals: Vec<Q> = pts.iter().map(|p| dot(n, p)).collect();
    if vals.iter().all(|v| *v <= b) {
        Some(Halfspace::new(n.clone(), b))
    } else if vals.iter().all(|v| *v >= b) {
        Some(Halfspace::new(neg(n), -b))
    } else {
        None
    }
}

/// H-representation of the convex hull of `pts` and its affine dimension.
fn hull_halfspaces(pts: &[[Q; 3]]) -> (Vec<Halfspace>, usize) {
    let (dim, basis) = affine_basis(pts);
    let p0 = &pts[0];
    let mut hs = Vec::new();
    match dim {
        0 => {
            for k in 0..3 {
                hs.push(Halfspace::new(unit(k), p0[k].clone()));
                hs.push(Halfspace::new(neg(&unit(k)), -&p0[k]));
            }
        }
        1 => {
            let u = &basis[0];
            let mut normals: Vec<[Q; 3]> = Vec::new();
            for k in 0..3 {
                let c = cross(u, &unit(k));
                if !is_zero(&c) && (normals.is_empty() || !is_zero(&cross(&normals[0], &c))) && normals.len() < 2 {
                    normals.push(c);
                }
            }
            for n in normals {
                let b = dot(&n, p0);
                hs.push(Halfspace::new(n.clone(), b.clone()));
                hs.push(Halfspace::new(neg(&n), -b));
            }
            let vals: Vec<Q> = pts.iter().map(|p| dot(u, p)).collect();
            hs.push(Halfspace::new(u.clone(), vals.iter().max().unwrap().clone()));
            hs.push(Halfspace::new(neg(u), -vals.iter().min().unwrap().clone()));
        }
        2 => {
            let n0 = cross(&basis[0], &basis[1]);
            let b0 = dot(&n0, p0);
            hs.push(Halfspace::new(n0.clone(), b0.clone()));
            hs.push(Halfspace::new(neg(&n0), -b0));
            for i in 0..pts.len() {
                for j in i + 1..pts.len() {
                    let m = cross(&n0, &sub(&pts[j], &pts[i]));
                    if let Some(h) = side_halfspace(&m, &pts[i], pts) {
                        hs.push(h);
                    }
                }
            }
        }
        _ => {
            for i in 0..pts.len() {
                for j in i + 1..pts.len() {
                    let a = sub(&pts[j], &pts[i]);
                    for k in j + 1..pts.len() {
                        let n = cross(&a, &sub(&pts[k], &pts[i]));
                        if let Some(h) = side_halfspace(&n, &pts[i], pts) {
                            hs.push(h);
                        }
                    }
                }
            }
        }
    }
    hs.sort();
    hs.dedup();
    (hs, dim)
}

/// Vertices of `{x : h · x ≤ b for all h}` by exact solution of every
/// independent triple of bounding planes.
fn enumerate_vertices(hs: &[Halfspace]) -> Vec<[Q; 3]> {
    let mut out: Vec<[Q; 3]> = Vec::new();
    for i in 0..hs.len() {
        for j in i + 1..hs.len() {
            for k in j + 1..hs.len() {
                let Some(x) = solve3(
                    [&hs[i].normal, &hs[j].normal, &hs[k].normal],
                    [&hs[i].bound, &hs[j].bound, &hs[k].bound],
                ) else {
                    continue;
                };
                if hs.iter().all(|h| dot(&h.normal, &x) <= h.bound) {
                    out.push(x);
                }
            }
        }
    }
    out.sort();
    out.dedup();
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExponentPolytope {
    pub label: String,
    pub vertices: Vec<ExponentTriple>,
    pub halfspaces: Vec<Halfspace>,
    /// Affine dimension of the hull; `None` when empty.
    pub dimension: Option<usize>,
    /// Vertex data copied as printed rather than derived.
    pub transcribed: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MembershipMode {
    Closed,
    Interior,
}

impl ExponentPolytope {
    pub fn from_vertices(label: &str, vertices: &[ExponentTriple]) -> Result<Self> {
        hull_and_intersect(label, vertices, &[])
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn is_full_dimensional(&self) -> bool {
        self.dimension == Some(3)
    }

    pub fn contains(&self, x: &ExponentTriple, mode: MembershipMode) -> bool {
        if self.is_empty() {
            return false;
        }
        match mode {
            MembershipMode::Closed => self.halfspaces.iter().all(|h| h.holds(x)),
            MembershipMode::Interior => self.is_full_dimensional() && self.halfspaces.iter().all(|h| h.strict(x)),
        }
    }

    pub fn intersect(&self, extra: &[Halfspace]) -> Result<Self> {
        let mut hs = self.halfspaces.clone();
        hs.extend_from_slice(extra);
        polytope_from_halfspaces(&self.label, &hs)
    }

    /// Arithmetic mean of the vertices.
    pub fn centroid(&self) -> Option<ExponentTriple> {
        if self.is_empty() {
            return None;
        }
        let n = int(self.vertices.len() as i64);
        let mut s = [int(0), int(0), int(0)];
        for v in &self.vertices {
            let c = v.coords();
            for i in 0..3 {
                s[i] += &c[i];
            }
        }
        Some(ExponentTriple::from_coords(s.map(|x| x / &n)))
    }

    /// Every vertex satisfies every half-space, and re-enumerating the
    /// H-representation returns exactly the stored vertices.
    pub fn cross_check(&self) -> bool {
        if self.is_empty() {
            return true;
        }
        let ok = self.vertices.iter().all(|v| self.halfspaces.iter().all(|h| h.holds(v)));
        let again: Vec<ExponentTriple> =
            enumerate_vertices(&self.halfspaces).into_iter().map(ExponentTriple::from_coords).collect();
        ok && again == self.vertices
    }

    pub fn to_json_value(&self) -> Value {
        json!({
            "label": self.label,
            "dimension": self.dimension,
            "transcribed": self.transcribed,
            "vertices": self.vertices.iter().map(|v| v.coords().iter().map(rat_json).collect::<Vec<_>>()).collect::<Vec<_>>(),
            "halfspaces": self.halfspaces.iter().map(|h| {
                let mut row: Vec<Value> = h.normal.iter().map(rat_json).collect();
                row.push(rat_json(&h.bound));
                row
            }).collect::<Vec<_>>(),
        })
    }

    pub fn to_json(&self) -> String {
        self.to_json_value().to_string()
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(s)?;
        let bad = || Error::InvalidParameters("malformed polytope JSON".into());
        let label = v["label"].as_str().ok_or_else(bad)?.to_string();
        let verts = v["vertices"].as_array().ok_or_else(bad)?;
        let mut vertices = Vec::new();
        for t in verts {
            let c = t.as_array().ok_or_else(bad)?;
            if c.len() != 3 {
                return Err(bad());
            }
            vertices.push(ExponentTriple::new(rat_from_json(&c[0])?, rat_from_json(&c[1])?, rat_from_json(&c[2])?)?);
        }
        let mut p = ExponentPolytope::from_vertices(&label, &vertices)?;
        p.transcribed = v["transcribed"].as_bool().unwrap_or(false);
        Ok(p)
    }

    /// CSV rows with exact and floating coordinates.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("label,inv_p,inv_q,inv_r,inv_p_f64,inv_q_f64,inv_r_f64\n");
        for v in &self.vertices {
            let f = v.to_f64();
            s.push_str(&format!("{},{},{},{},{},{},{}\n", self.label, v.inv_p, v.inv_q, v.inv_r, f[0], f[1], f[2]));
        }
        s
    }
}

fn rat_json(x: &Q) -> Value {
    match (x.numer().to_i64(), x.denom().to_i64()) {
        (Some(n), Some(d)) => json!([n, d]),
        _ => json!([x.numer().to_string(), x.denom().to_string()]),
    }
}

fn rat_from_json(v: &Value) -> Result<Q> {
    let bad = || Error::InvalidParameters(format!("malformed rational {v}"));
    if let Value::String(s) = v {
        return parse_rational(s);
    }
    let a = v.as_array().ok_or_else(bad)?;
    if a.len() != 2 {
        return Err(bad());
    }
    let part = |x: &Value| -> Result<BigInt> {
        match x {
            Value::Number(n) => n.as_i64().map(BigInt::from).ok_or_else(bad),
            Value::String(s) => BigInt::from_str(s).map_err(|_| bad()),
            _ => Err(bad()),
        }
    };
    let d = part(&a[1])?;
    if d.is_zero() {
        return Err(bad());
    }
    Ok(Q::new(part(&a[0])?, d))
}

fn polytope_from_halfspaces(label: &str, hs: &[Halfspace]) -> Result<ExponentPolytope> {
    let verts = enumerate_vertices(hs);
    if verts.is_empty() {
        return Ok(ExponentPolytope {
            label: label.to_string(),
            vertices: Vec::new(),
            halfspaces: hs.to_vec(),
            dimension: None,
            transcribed: false,
        });
    }
    let (clean, dim) = hull_halfspaces(&verts);
    Ok(ExponentPolytope {
        label: label.to_string(),
        vertices: verts.into_iter().map(ExponentTriple::from_coords).collect(),
        halfspaces: clean,
        dimension: Some(dim),
        transcribed: false,
    })
}

/// Exact convex hull of `vertices` intersected with `extra`, returned with
/// both vertex and half-space descriptions. Lower-dimensional hulls carry
/// their dimension.
pub fn hull_and_intersect(label: &str, vertices: &[ExponentTriple], extra: &[Halfspace]) -> Result<ExponentPolytope> {
    if vertices.is_empty() {
        return Err(Error::InvalidParameters("hull of an empty point set".into()));
    }
    let mut pts: Vec<[Q; 3]> = vertices.iter().map(|v| v.coords()).collect();
    pts.sort();
    pts.dedup();
    let (mut hs, _) = hull_halfspaces(&pts);
    hs.extend_from_slice(extra);
    polytope_from_halfspaces(label, &hs)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegionName {
    TriangleLac,
    TriangleFull,
    BisphereLac,
    BisphereFull,
    SphericalSingleScale,
    SchlagMax,
}

impl RegionName {
    pub const ALL: [RegionName; 6] = [
        RegionName::TriangleLac,
        RegionName::TriangleFull,
        RegionName::BisphereLac,
        RegionName::BisphereFull,
        RegionName::SphericalSingleScale,
        RegionName::SchlagMax,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            RegionName::TriangleLac => "triangle-lac",
            RegionName::TriangleFull => "triangle-full",
            RegionName::BisphereLac => "bisphere-lac",
            RegionName::BisphereFull => "bisphere-full",
            RegionName::SphericalSingleScale => "spherical-single-scale",
            RegionName::SchlagMax => "schlag-max",
        }
    }
}

impl FromStr for RegionName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        RegionName::ALL
            .iter()
            .find(|r| r.as_str() == s)
            .copied()
            .ok_or_else(|| Error::InvalidParameters(format!("unknown region {s}")))
    }
}

impl fmt::Display for RegionName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A named region: a union of polytopes.
#[derive(Clone, Debug, PartialEq)]
pub struct Region {
    pub name: RegionName,
    pub dim: usize,
    pub m: Option<u32>,
    pub pieces: Vec<ExponentPolytope>,
}

impl Region {
    pub fn contains(&self, x: &ExponentTriple, mode: MembershipMode) -> bool {
        self.pieces.iter().any(|p| p.contains(x, mode))
    }

    pub fn vertices(&self) -> Vec<ExponentTriple> {
        self.pieces.iter().flat_map(|p| p.vertices.iter().cloned()).collect()
    }

    /// Each piece intersected with `r ≥ p` and `r ≥ q`.
    pub fn sparse_range(&self) -> Result<Vec<ExponentPolytope>> {
        self.pieces.iter().map(|p| p.intersect(&[Halfspace::r_at_least_p(), Halfspace::r_at_least_q()])).collect()
    }

    pub fn to_json_value(&self) -> Value {
        json!({
            "region": self.name.as_str(),
            "d": self.dim,
            "m": self.m,
            "pieces": self.pieces.iter().map(|p| p.to_json_value()).collect::<Vec<_>>(),
        })
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        for (i, p) in self.pieces.iter().enumerate() {
            let c = p.to_csv();
            if i == 0 {
                s.push_str(&c);
            } else {
                s.push_str(c.split_once('\n').map(|x| x.1).unwrap_or(""));
            }
        }
        s
    }
}

fn tr(a: Q, b: Q, c: Q) -> ExponentTriple {
    ExponentTriple { inv_p: a, inv_q: b, inv_r: c }
}

fn require_d(d: usize, min: usize) -> Result<()> {
    if d < min {
        return Err(Error::InvalidParameters(format!("region needs d ≥ {min}, got {d}")));
    }
    Ok(())
}

/// Vertices of the lacunary triangle hull in dimension `d`.
pub fn triangle_lac_vertices(d: usize) -> Vec<ExponentTriple> {
    let d = d as i64;
    let a = rat(d, d + 1);
    vec![
        tr(int(0), int(0), int(0)),
        tr(rat(d, 2 * (d + 1)), rat(d, 2 * (d + 1)), rat(1, d + 1)),
        tr(int(0), int(1), int(1)),
        tr(int(1), int(0), int(1)),
        tr(a.clone(), a.clone(), rat(2 * d, d + 1)),
        tr(a.clone(), a, int(1)),
    ]
}

/// Vertices of the full-maximal triangle hull with `l = m/(m-1)`.
pub fn triangle_full_vertices(d: usize, m: u32) -> Vec<ExponentTriple> {
    let d = d as i64;
    let m = m as i64;
    let a = rat(d - 1, d);
    let s = rat(d * d - d, d * d + 1);
    let t = rat(d - 1, d * d + 1);
    // (d-1)/(l d) = (d-1)(m-1)/(m d).
    let c = rat((d - 1) * (m - 1), m * d);
    vec![
        tr(int(0), int(0), int(0)),
        tr(a.clone(), int(0), a.clone()),
        tr(int(0), a.clone(), a.clone()),
        tr(a.clone(), int(0), rat(1, d)),
        tr(int(0), a, rat(1, d)),
        tr(s.clone(), int(0), t.clone()),
        tr(int(0), s, t),
        tr(c.clone(), c.clone(), &c + &c),
    ]
}

/// Points `M, N, P, Q` of the single-scale maximal bound `L^p × L^∞ → L^q`,
/// as triples `(1/p, 0, 1/q)`.
pub fn schlag_vertices(d: usize) -> Vec<ExponentTriple> {
    let d = d as i64;
    let a = rat(d - 1, d);
    vec![
        tr(int(0), int(0), int(0)),
        tr(a.clone(), int(0), a.clone()),
        tr(a, int(0), rat(1, d)),
        tr(rat(d * d - d, d * d + 1), int(0), rat(d - 1, d * d + 1)),
    ]
}

pub fn ips_sphere_vertices() -> Vec<ExponentTriple> {
    vec![
        tr(int(1), int(0), int(1)),
        tr(int(0), int(1), int(1)),
        tr(int(1), int(1), int(1)),
        tr(int(1), int(1), int(2)),
        tr(int(0), int(0), int(0)),
    ]
}

/// The two hulls whose union is the full bilinear spherical range at `d = 10`.
pub fn bisphere_full_d10() -> [Vec<ExponentTriple>; 2] {
    let f = |a: (i64, i64), b: (i64, i64), c: (i64, i64)| ExponentTriple::from_ratios(a, b, c);
    [
        vec![
            f((1, 1), (9, 10), (9, 10)),
            f((9, 10), (1, 1), (9, 10)),
            f((9, 10), (1, 1), (1, 10)),
            f((1, 1), (9, 10), (1, 10)),
            f((1, 1), (1, 10), (1, 10)),
            f((1, 10), (1, 1), (1, 10)),
            f((1, 10), (1, 10), (1, 10)),
            f((19, 20), (19, 20), (19, 20)),
        ],
        vec![
            f((0, 1), (0, 1), (0, 1)),
            f((0, 1), (1, 1), (0, 1)),
            f((1, 1), (0, 1), (0, 1)),
            f((8, 9), (1, 1), (4, 45)),
            f((1, 1), (8, 9), (4, 45)),
            f((1, 1), (4, 45), (4, 45)),
            f((4, 45), (1, 1), (4, 45)),
            f((4, 45), (4, 45), (4, 45)),
        ],
    ]
}

/// `1/r ≤ 1/p + 1/q < min((2d-1)/d, 1 + d/r)` with `1/p, 1/q ∈ [0,1]` and
/// `r ≤ d` or `d(d-1)/(d-2) ≤ r < ∞`.
pub fn jeong_lee_predicate(d: usize, x: &ExponentTriple) -> bool {
    if d < 2 {
        return false;
    }
    let di = d as i64;
    let one = int(1);
    let in_unit = |v: &Q| !v.is_negative() && *v <= one;
    if !in_unit(&x.inv_p) || !in_unit(&x.inv_q) || !x.inv_r.is_positive() {
        return false;
    }
    let r_ok = x.inv_r >= rat(1, di) || (di > 2 && x.inv_r <= rat(di - 2, di * (di - 1)));
    let s = x.holder_inv();
    let cap = std::cmp::min(rat(2 * di - 1, di), int(1) + int(di) * &x.inv_r);
    r_ok && x.inv_r <= s && s < cap
}

/// Closed polytope inside the Jeong–Lee range (its `r ≤ d` branch).
pub fn jeong_lee_polytope(d: usize) -> Result<ExponentPolytope> {
    require_d(d, 2)?;
    let di = d as i64;
    let hs = vec![
        Halfspace::new([int(-1), int(0), int(0)], int(0)),
        Halfspace::new([int(0), int(-1), int(0)], int(0)),
        Halfspace::new([int(1), int(0), int(0)], int(1)),
        Halfspace::new([int(0), int(1), int(0)], int(1)),
        Halfspace::new([int(0), int(0), int(-1)], rat(-1, di)),
        Halfspace::new([int(-1), int(-1), int(1)], int(0)),
        Halfspace::new([int(1), int(1), int(0)], rat(2 * di - 1, di)),
    ];
    polytope_from_halfspaces("spherical-single-scale", &hs)
}

/// The named region in dimension `d` (and `m` for the full triangle range).
pub fn region(name: RegionName, d: usize, m: Option<u32>) -> Result<Region> {
    let pieces = match name {
        RegionName::TriangleLac => {
            require_d(d, 2)?;
            vec![ExponentPolytope::from_vertices(name.as_str(), &triangle_lac_vertices(d))?]
        }
        RegionName::TriangleFull => {
            let m = m.ok_or_else(|| Error::InvalidParameters("triangle-full needs m".into()))?;
            if m < 2 || d < 2 * m as usize {
                return Err(Error::InvalidParameters(format!("triangle-full needs m ≥ 2 and d ≥ 2m, got d={d}, m={m}")));
            }
            vec![hull_and_intersect(
                name.as_str(),
                &triangle_full_vertices(d, m),
                &[Halfspace::r_at_least_p(), Halfspace::r_at_least_q()],
            )?]
        }
        RegionName::SchlagMax => {
            require_d(d, 2)?;
            let mut p = ExponentPolytope::from_vertices(name.as_str(), &schlag_vertices(d))?;
            p.transcribed = true;
            vec![p]
        }
        RegionName::SphericalSingleScale => vec![jeong_lee_polytope(d)?],
        RegionName::BisphereLac => {
            let ips = ExponentPolytope::from_vertices("ips", &ips_sphere_vertices())?;
            let jl = jeong_lee_polytope(d)?;
            let mut p = jl.intersect(&ips.halfspaces)?;
            p.label = name.as_str().to_string();
            vec![p]
        }
        RegionName::BisphereFull => {
            if d != 10 {
                return Err(Error::InvalidParameters(format!("bisphere-full is stored for d = 10 only, got {d}")));
            }
            bisphere_full_d10()
                .iter()
                .map(|v| {
                    let mut p = ExponentPolytope::from_vertices(name.as_str(), v)?;
                    p.transcribed = true;
                    Ok(p)
                })
                .collect::<Result<Vec<_>>>()?
        }
    };
    let m = if name == RegionName::TriangleFull { m } else { None };
    Ok(Region { name, dim: d, m, pieces })
}

/// Exact region membership; interior mode needs strict facet inequalities.
pub fn membership(r: &Region, x: &ExponentTriple, mode: MembershipMode) -> bool {
    r.contains(x, mode)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Admissibility {
    pub r_ge_p: bool,
    pub r_ge_q: bool,
    pub r_gt_1: bool,
    pub holder: bool,
    pub improving_factor_two: bool,
    pub improving_strict: bool,
}

impl Admissibility {
    /// The hypotheses needed for a sparse bound: `r ≥ p, q`, `r > 1` and a
    /// strict improvement over Hölder.
    pub fn bundle(&self) -> bool {
        self.r_ge_p && self.r_ge_q && self.r_gt_1 && self.improving_strict
    }
}

pub fn admissibility(x: &ExponentTriple) -> Admissibility {
    let s = x.holder_inv();
    Admissibility {
        r_ge_p: x.inv_r <= x.inv_p,
        r_ge_q: x.inv_r <= x.inv_q,
        r_gt_1: x.inv_r < int(1),
        holder: s >= x.inv_r,
        improving_factor_two: s >= &x.inv_r + &x.inv_r,
        improving_strict: s > x.inv_r,
    }
}

/// `d (1/r - 1/p - 1/q)`.
pub fn scaling_exponent(x: &ExponentTriple, d: usize) -> Q {
    int(d as i64) * (&x.inv_r - &x.inv_p - &x.inv_q)
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecayThresholds {
    pub d: usize,
    /// `4d/(2d-1)`.
    pub first: Q,
    pub first_below_four: bool,
    /// `4d/(2d-3)`, undefined when `2d - 3 ≤ 0`.
    pub second: Option<Q>,
    pub second_below_four: Option<bool>,
}

impl DecayThresholds {
    pub fn to_json_value(&self) -> Value {
        json!({
            "d": self.d,
            "first": rat_json(&self.first),
            "first_below_four": self.first_below_four,
            "second": self.second.as_ref().map(rat_json),
            "second_below_four": self.second_below_four,
        })
    }
}

pub fn decay_thresholds(d: usize) -> Result<DecayThresholds> {
    if d == 0 {
        return Err(Error::InvalidDimension(d));
    }
    let di = d as i64;
    let four = int(4);
    let first = rat(4 * di, 2 * di - 1);
    let second = if 2 * di - 3 > 0 { Some(rat(4 * di, 2 * di - 3)) } else { None };
    Ok(DecayThresholds {
        d,
        first_below_four: first < four,
        second_below_four: second.as_ref().map(|s| *s < four),
        first,
        second,
    })
}

/// `s (1 - q/4) / (1 + s)`.
pub fn split_decay_exponent(s: &Q, q: &Q) -> Q {
    s * (int(1) - q / int(4)) / (int(1) + s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(a: (i64, i64), b: (i64, i64), c: (i64, i64)) -> ExponentTriple {
        ExponentTriple::from_ratios(a, b, c)
    }

    #[test]
    fn single_point_hull() {
        let p = ExponentPolytope::from_vertices("pt", &[t((1, 2), (1, 3), (1, 4))]).unwrap();
        assert_eq!(p.vertices, vec![t((1, 2), (1, 3), (1, 4))]);
        assert_eq!(p.dimension, Some(0));
        assert!(p.cross_check());
    }

    #[test]
    fn cube_hull_drops_interior_points() {
        let mut v = Vec::new();
        for a in 0..2 {
            for b in 0..2 {
                for c in 0..2 {
                    v.push(t((a, 1), (b, 1), (c, 1)));
                }
            }
        }
        v.push(t((1, 2), (1, 2), (1, 2)));
        let p = ExponentPolytope::from_vertices("cube", &v).unwrap();
        assert_eq!(p.vertices.len(), 8);
        assert_eq!(p.halfspaces.len(), 6);
        assert!(p.contains(&t((1, 2), (1, 2), (1, 2)), MembershipMode::Interior));
        assert!(!p.contains(&t((1, 1), (1, 2), (1, 2)), MembershipMode::Interior));
        assert!(p.contains(&t((1, 1), (1, 2), (1, 2)), MembershipMode::Closed));
    }

    #[test]
    fn planar_hull_is_flagged() {
        let p = ExponentPolytope::from_vertices("sq", &[t((0, 1), (0, 1), (0, 1)), t((1, 1), (0, 1), (0, 1)), t((0, 1), (1, 1), (0, 1)), t((1, 1), (1, 1), (0, 1)), t((1, 2), (1, 2), (0, 1))]).unwrap();
        assert_eq!(p.dimension, Some(2));
        assert_eq!(p.vertices.len(), 4);
        assert!(p.cross_check());
        assert!(!p.contains(&t((1, 2), (1, 2), (0, 1)), MembershipMode::Interior));
    }

    #[test]
    fn parse_forms() {
        assert_eq!(parse_rational("3/6").unwrap(), rat(1, 2));
        assert_eq!(parse_rational("2").unwrap(), int(2));
        assert!(parse_rational("1/0").is_err());
        assert!(ExponentTriple::parse("1/2,1/2").is_err());
        assert!(ExponentTriple::parse("-1/2,1/2,1").is_err());
    }

    #[test]
    fn thresholds() {
        let t2 = decay_thresholds(2).unwrap();
        assert_eq!(t2.first, rat(8, 3));
        assert!(t2.first_below_four);
        assert_eq!(t2.second, Some(int(8)));
        assert_eq!(t2.second_below_four, Some(false));
        let t4 = decay_thresholds(4).unwrap();
        assert_eq!((t4.first, t4.second), (rat(16, 7), Some(rat(16, 5))));
        assert_eq!(decay_thresholds(1).unwrap().second, None);
        assert_eq!(split_decay_exponent(&int(1), &int(3)), rat(1, 8));
    }

    #[test]
    fn admissibility_examples() {
        let a = admissibility(&t((1, 2), (1, 2), (1, 2)));
        assert!(a.r_ge_p && a.r_ge_q && a.improving_factor_two && a.bundle());
        assert!(!admissibility(&t((1, 1), (1, 1), (2, 1))).r_ge_p);
        assert_eq!(scaling_exponent(&t((1, 2), (1, 2), (1, 2)), 2), int(-1));
        assert_eq!(scaling_exponent(&t((1, 3), (1, 3), (2, 3)), 5), int(0));
    }

    #[test]
    fn json_round_trip() {
        let r = region(RegionName::TriangleLac, 3, None).unwrap();
        let p = &r.pieces[0];
        let back = ExponentPolytope::from_json(&p.to_json()).unwrap();
        assert_eq!(&back, p);
    }
}
