//! Quadrature models of the measures on pairs `(y, z) ∈ R^d × R^d`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeasureFamily {
    Triangle,
    Bisphere,
    ProductSphere,
    Custom,
}

impl std::str::FromStr for MeasureFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "triangle" => Ok(Self::Triangle),
            "bisphere" => Ok(Self::Bisphere),
            "product-sphere" => Ok(Self::ProductSphere),
            "custom" => Ok(Self::Custom),
            _ => Err(Error::InvalidParameters(format!("unknown measure family {s}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscreteMeasure {
    pub dim: usize,
    pub family: MeasureFamily,
    /// Each node is `[y_1..y_d, z_1..z_d]`.
    pub nodes: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    #[serde(skip)]
    pub total_mass: f64,
    #[serde(skip)]
    pub support_diam: f64,
}

impl DiscreteMeasure {
    pub fn new(dim: usize, family: MeasureFamily, nodes: Vec<Vec<f64>>, weights: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidDimension(dim));
        }
        if nodes.is_empty() || nodes.len() != weights.len() {
            return Err(Error::InvalidParameters("empty measure or node/weight mismatch".into()));
        }
        if nodes.iter().any(|v| v.len() != 2 * dim || v.iter().any(|c| !c.is_finite())) {
            return Err(Error::InvalidParameters("node length must be 2d".into()));
        }
        if weights.iter().any(|&w| !(w >= 0.0) || !w.is_finite()) {
            return Err(Error::InvalidParameters("weights must be nonnegative".into()));
        }
        let total_mass = weights.iter().sum();
        let support_diam = diameter(&nodes);
        Ok(DiscreteMeasure { dim, family, nodes, weights, total_mass, support_diam })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn y(&self, k: usize) -> &[f64] {
        &self.nodes[k][..self.dim]
    }

    pub fn z(&self, k: usize) -> &[f64] {
        &self.nodes[k][self.dim..]
    }

    /// Largest `|y|_∞` or `|z|_∞` over the nodes.
    pub fn max_coordinate(&self) -> f64 {
        self.nodes.iter().flat_map(|v| v.iter()).fold(0.0, |m, c| m.max(c.abs()))
    }

    /// `Σ w_k F(y_k, z_k)`.
    pub fn integrate(&self, f: impl Fn(&[f64], &[f64]) -> f64) -> f64 {
        (0..self.len()).map(|k| self.weights[k] * f(self.y(k), self.z(k))).sum()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let raw: DiscreteMeasure = serde_json::from_str(s)?;
        Self::new(raw.dim, raw.family, raw.nodes, raw.weights)
    }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn diameter(nodes: &[Vec<f64>]) -> f64 {
    let mut d: f64 = 0.0;
    for i in 0..nodes.len() {
        for j in i + 1..nodes.len() {
            d = d.max(dist(&nodes[i], &nodes[j]));
        }
    }
    d
}

fn rotate(v: [f64; 2], a: f64) -> [f64; 2] {
    let (s, c) = a.sin_cos();
    [c * v[0] - s * v[1], s * v[0] + c * v[1]]
}

/// Pairs `(y, z)` with `|y| = |z| = |y - z| = 1` in the plane: `y` uniform on
/// the circle and `z = R_{±π/3} y`, both branches with equal weight.
pub fn triangle_measure(dim: usize, n_nodes: usize) -> Result<DiscreteMeasure> {
    if dim != 2 {
        return Err(Error::NotImplemented(format!("triangle measure in dimension {dim} (only 2)")));
    }
    if n_nodes < 8 {
        return Err(Error::InvalidParameters("triangle measure needs at least 8 nodes".into()));
    }
    let mut nodes = Vec::with_capacity(2 * n_nodes);
    for sign in [1.0, -1.0] {
        for k in 0..n_nodes {
            let th = 2.0 * PI * k as f64 / n_nodes as f64;
            let y = [th.cos(), th.sin()];
            let z = rotate(y, sign * PI / 3.0);
            nodes.push(vec![y[0], y[1], z[0], z[1]]);
        }
    }
    let w = 1.0 / nodes.len() as f64;
    let weights = vec![w; nodes.len()];
    DiscreteMeasure::new(2, MeasureFamily::Triangle, nodes, weights)
}

/// Gauss–Legendre nodes and weights on `[0, 1]`.
pub fn gauss_legendre01(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut xs = Vec::with_capacity(n);
    let mut ws = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        xs.push(0.5 * (1.0 - x));
        ws.push(1.0 / ((1.0 - x * x) * dp * dp));
    }
    (xs, ws)
}

/// Normalized surface measure on the unit sphere of `R^{2d}`.
///
/// `d = 1`: uniform nodes on the circle, `(y, z) = (cos θ, sin θ)`.
/// `d = 2`: `(cos α ω₁, sin α ω₂)` with `ω₁, ω₂` uniform on circles of
/// `n_nodes` points and `α` from Gauss–Legendre in `u = sin²α`, which makes
/// the density `sin α cos α dα` uniform; `max(2, n_nodes / 4)` radial nodes.
pub fn bilinear_sphere_measure(dim: usize, n_nodes: usize) -> Result<DiscreteMeasure> {
    match dim {
        1 => {
            if n_nodes < 3 {
                return Err(Error::InvalidParameters("need at least 3 circle nodes".into()));
            }
            let nodes: Vec<Vec<f64>> = (0..n_nodes)
                .map(|k| {
                    let th = 2.0 * PI * k as f64 / n_nodes as f64;
                    vec![th.cos(), th.sin()]
                })
                .collect();
            let weights = vec![1.0 / n_nodes as f64; n_nodes];
            DiscreteMeasure::new(1, MeasureFamily::Bisphere, nodes, weights)
        }
        2 => bilinear_sphere_measure_2d(n_nodes, (n_nodes / 4).max(2)),
        _ => Err(Error::NotImplemented(format!("bilinear sphere measure in dimension {dim} (only 1, 2)"))),
    }
}

/// The `d = 2` sphere with explicit circle and radial node counts.
pub fn bilinear_sphere_measure_2d(n_circle: usize, n_radial: usize) -> Result<DiscreteMeasure> {
    if n_circle < 3 || n_radial < 1 {
        return Err(Error::InvalidParameters("sphere node counts".into()));
    }
    let (us, uw) = gauss_legendre01(n_radial);
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    let wc = 1.0 / (n_circle * n_circle) as f64;
    for (u, w) in us.iter().zip(&uw) {
        let (s, c) = (u.sqrt(), (1.0 - u).sqrt());
        for a in 0..n_circle {
            let ta = 2.0 * PI * a as f64 / n_circle as f64;
            for b in 0..n_circle {
                let tb = 2.0 * PI * (b as f64 + 0.5) / n_circle as f64;
                nodes.push(vec![c * ta.cos(), c * ta.sin(), s * tb.cos(), s * tb.sin()]);
                weights.push(w * wc);
            }
        }
    }
    DiscreteMeasure::new(2, MeasureFamily::Bisphere, nodes, weights)
}

/// Tensor product of two uniform circle quadratures (`|y| = |z| = 1`).
pub fn product_sphere_measure(dim: usize, n_nodes: usize) -> Result<DiscreteMeasure> {
    if dim != 2 {
        return Err(Error::NotImplemented(format!("product sphere measure in dimension {dim} (only 2)")));
    }
    if n_nodes < 3 {
        return Err(Error::InvalidParameters("need at least 3 circle nodes".into()));
    }
    let mut nodes = Vec::with_capacity(n_nodes * n_nodes);
    for a in 0..n_nodes {
        let ta = 2.0 * PI * a as f64 / n_nodes as f64;
        for b in 0..n_nodes {
            let tb = 2.0 * PI * b as f64 / n_nodes as f64;
            nodes.push(vec![ta.cos(), ta.sin(), tb.cos(), tb.sin()]);
        }
    }
    let weights = vec![1.0 / nodes.len() as f64; nodes.len()];
    DiscreteMeasure::new(2, MeasureFamily::ProductSphere, nodes, weights)
}

/// One circle quadrature in the plane, as used by the factors of the
/// product measure.
pub fn circle_nodes(n: usize) -> Vec<[f64; 2]> {
    (0..n)
        .map(|a| {
            let t = 2.0 * PI * a as f64 / n as f64;
            [t.cos(), t.sin()]
        })
        .collect()
}

/// Scale the nodes by the smallest factor making the support diameter at
/// most 1/2. Returns the measure and the factor.
pub fn normalize_support(mu: &DiscreteMeasure) -> Result<(DiscreteMeasure, f64)> {
    if mu.is_empty() {
        return Err(Error::InvalidParameters("empty measure".into()));
    }
    if mu.support_diam <= 0.5 {
        return Ok((mu.clone(), 1.0));
    }
    let factor = 0.5 / mu.support_diam;
    let nodes = mu.nodes.iter().map(|v| v.iter().map(|c| c * factor).collect()).collect();
    let mut out = DiscreteMeasure::new(mu.dim, mu.family, nodes, mu.weights.clone())?;
    // Rounding may leave the recomputed diameter a hair above 1/2.
    out.support_diam = out.support_diam.min(0.5);
    Ok((out, factor))
}

/// `μ̂(ξ, η) = Σ w_k exp(-2πi (ξ·y_k + η·z_k))`.
pub fn fourier_transform(mu: &DiscreteMeasure, xi: &[f64], eta: &[f64]) -> Complex64 {
    (0..mu.len())
        .map(|k| {
            let ph: f64 = mu.y(k).iter().zip(xi).map(|(a, b)| a * b).sum::<f64>()
                + mu.z(k).iter().zip(eta).map(|(a, b)| a * b).sum::<f64>();
            Complex64::from_polar(mu.weights[k], -2.0 * PI * ph)
        })
        .sum()
}

/// Envelope `sup_{s ∈ [ρ, ρ+1]} |μ̂(s ω)|` along a fixed direction `ω` of
/// `R^{2d}`, sampled at `samples` points.
pub fn fourier_envelope(mu: &DiscreteMeasure, dir: &[f64], rho: f64, samples: usize) -> f64 {
    let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
    (0..samples)
        .map(|i| {
            let s = rho + i as f64 / (samples.max(2) - 1) as f64;
            let w: Vec<f64> = dir.iter().map(|v| s * v / norm).collect();
            fourier_transform(mu, &w[..mu.dim], &w[mu.dim..]).norm()
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triangle_nodes_are_unit_triangles() {
        let mu = triangle_measure(2, 32).unwrap();
        assert!((mu.total_mass - 1.0).abs() < 1e-14);
        for k in 0..mu.len() {
            let (y, z) = (mu.y(k), mu.z(k));
            let ny = (y[0] * y[0] + y[1] * y[1]).sqrt();
            let nz = (z[0] * z[0] + z[1] * z[1]).sqrt();
            let nyz = ((y[0] - z[0]).powi(2) + (y[1] - z[1]).powi(2)).sqrt();
            assert!((ny - 1.0).abs() < 1e-12 && (nz - 1.0).abs() < 1e-12 && (nyz - 1.0).abs() < 1e-12);
        }
        assert!(matches!(triangle_measure(3, 32), Err(Error::NotImplemented(_))));
    }

    #[test]
    fn sphere_nodes_are_on_the_sphere() {
        for d in [1, 2] {
            let mu = bilinear_sphere_measure(d, 12).unwrap();
            assert!((mu.total_mass - 1.0).abs() < 1e-13);
            for v in &mu.nodes {
                let r: f64 = v.iter().map(|c| c * c).sum();
                assert!((r - 1.0).abs() < 1e-12);
            }
            for c in 0..d {
                assert!(mu.integrate(|y, _| y[c]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        let (x, w) = gauss_legendre01(5);
        for p in 0..10 {
            let s: f64 = x.iter().zip(&w).map(|(a, b)| b * a.powi(p)).sum();
            assert!((s - 1.0 / (p + 1) as f64).abs() < 1e-14, "degree {p}");
        }
    }

    #[test]
    fn sphere_second_moment() {
        // ∫ y_1^2 dσ = 1/4 on S^3.
        let mu = bilinear_sphere_measure_2d(16, 4).unwrap();
        assert!((mu.integrate(|y, _| y[0] * y[0]) - 0.25).abs() < 1e-13);
        assert!((mu.integrate(|y, z| y[0] * y[0] * z[1] * z[1]) - 1.0 / 24.0).abs() < 1e-13);
    }

    #[test]
    fn product_nodes() {
        let mu = product_sphere_measure(2, 8).unwrap();
        assert_eq!(mu.len(), 64);
        assert!((mu.total_mass - 1.0).abs() < 1e-14);
    }

    #[test]
    fn normalization() {
        let mu = triangle_measure(2, 16).unwrap();
        assert!((mu.support_diam - 2.0 * 2f64.sqrt()).abs() < 1e-12);
        let (nm, f) = normalize_support(&mu).unwrap();
        assert!((diameter(&nm.nodes) - 0.5).abs() < 1e-12);
        assert!((f - 0.5 / mu.support_diam).abs() < 1e-15);
        let (again, f2) = normalize_support(&nm).unwrap();
        assert_eq!(f2, 1.0);
        assert_eq!(again.nodes, nm.nodes);
        assert!((nm.total_mass - 1.0).abs() < 1e-14);
    }

    #[test]
    fn fourier_basics() {
        let mu = triangle_measure(2, 16).unwrap();
        let z = fourier_transform(&mu, &[0.0, 0.0], &[0.0, 0.0]);
        assert!((z.re - 1.0).abs() < 1e-14 && z.im.abs() < 1e-14);
        let a = fourier_transform(&mu, &[0.3, -1.1], &[0.7, 0.2]);
        let b = fourier_transform(&mu, &[-0.3, 1.1], &[-0.7, -0.2]);
        assert!((a - b.conj()).norm() < 1e-13);
    }

    #[test]
    fn json_round_trip() {
        let mu = bilinear_sphere_measure(1, 8).unwrap();
        let back = DiscreteMeasure::from_json(&mu.to_json().unwrap()).unwrap();
        assert_eq!(back.nodes, mu.nodes);
        assert!((back.total_mass - 1.0).abs() < 1e-14);
    }
}
