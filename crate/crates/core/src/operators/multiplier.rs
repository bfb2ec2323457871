//! The bilinear multiplier operator on a periodic one-dimensional grid and
//! the frequency split used for continuity estimates.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridFunction;

/// Samples `m(ξ_k, η_l)` in FFT order, row-major in `k`.
#[derive(Clone, Debug)]
pub struct MultiplierGrid {
    pub n: usize,
    /// Period of the grid; physical frequencies are `k / length`.
    pub length: f64,
    pub values: Vec<Complex64>,
}

impl MultiplierGrid {
    pub fn frequency(&self, k: usize) -> f64 {
        frequency(self.n, self.length, k)
    }

    pub fn at(&self, k: usize, l: usize) -> Complex64 {
        self.values[k * self.n + l]
    }

    pub fn map(&self, f: impl Fn(f64, f64, Complex64) -> Complex64) -> Self {
        let mut values = Vec::with_capacity(self.values.len());
        for k in 0..self.n {
            for l in 0..self.n {
                values.push(f(self.frequency(k), self.frequency(l), self.at(k, l)));
            }
        }
        MultiplierGrid { n: self.n, length: self.length, values }
    }
}

fn frequency(n: usize, length: f64, k: usize) -> f64 {
    let k = if k < n / 2 { k as f64 } else { k as f64 - n as f64 };
    k / length
}

/// Sample `m` on the frequency grid of an `n`-point grid of period `length`.
pub fn sample_multiplier(n: usize, length: f64, m: impl Fn(f64, f64) -> Complex64) -> MultiplierGrid {
    let mut values = Vec::with_capacity(n * n);
    for k in 0..n {
        for l in 0..n {
            values.push(m(frequency(n, length, k), frequency(n, length, l)));
        }
    }
    MultiplierGrid { n, length, values }
}

fn require_1d(f: &GridFunction) -> Result<()> {
    if f.dim != 1 {
        return Err(Error::NotImplemented(format!("multiplier operators in dimension {} (only 1)", f.dim)));
    }
    Ok(())
}

fn coefficients(f: &GridFunction, planner: &mut FftPlanner<f64>) -> Vec<Complex64> {
    let n = f.n;
    let mut buf: Vec<Complex64> = f.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    planner.plan_fft_forward(n).process(&mut buf);
    let s = 1.0 / n as f64;
    buf.iter_mut().for_each(|c| *c *= s);
    buf
}

fn apply_coefficients(fh: &[Complex64], gh: &[Complex64], m: &MultiplierGrid, planner: &mut FftPlanner<f64>) -> Vec<f64> {
    let n = m.n;
    let inv = planner.plan_fft_inverse(n);
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    let mut row = vec![Complex64::new(0.0, 0.0); n];
    for k in 0..n {
        if fh[k] == Complex64::new(0.0, 0.0) {
            continue;
        }
        for l in 0..n {
            row[l] = gh[l] * m.at(k, l);
        }
        inv.process(&mut row);
        for (j, o) in out.iter_mut().enumerate() {
            let ph = Complex64::from_polar(1.0, 2.0 * PI * ((k * j) % n) as f64 / n as f64);
            *o += fh[k] * ph * row[j];
        }
    }
    out.iter().map(|c| c.re).collect()
}

/// `T_m(f,g)(x_j) = Σ_{ξ,η} f^(ξ) g^(η) m(ξ,η) e^{2πi x_j (ξ+η)}` on the
/// periodized grid; the real part is returned.
pub fn bilinear_multiplier_apply(m: &MultiplierGrid, f: &GridFunction, g: &GridFunction) -> Result<GridFunction> {
    require_1d(f)?;
    require_1d(g)?;
    if !f.same_grid(g) || f.n != m.n {
        return Err(Error::InvalidParameters("multiplier and functions must share the grid".into()));
    }
    let mut planner = FftPlanner::new();
    let fh = coefficients(f, &mut planner);
    let gh = coefficients(g, &mut planner);
    Ok(f.with_values(apply_coefficients(&fh, &gh, m, &mut planner)))
}

/// `f - τ_y f` with the periodic translation applied on the Fourier side.
pub fn spectral_translate_diff(f: &GridFunction, y: f64) -> Result<GridFunction> {
    require_1d(f)?;
    let n = f.n;
    let mut planner = FftPlanner::new();
    let mut c = coefficients(f, &mut planner);
    for (k, v) in c.iter_mut().enumerate() {
        *v *= Complex64::new(1.0, 0.0) - Complex64::from_polar(1.0, -2.0 * PI * y * frequency(n, f.side, k));
    }
    planner.plan_fft_inverse(n).process(&mut c);
    Ok(f.with_values(c.iter().map(|z| z.re).collect()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MultiplierProbe {
    pub decay_s: f64,
    pub lq_exponent: f64,
    /// Width of the transition band of the cutoff.
    pub cutoff_eps: f64,
    pub split_a: f64,
}

impl MultiplierProbe {
    /// Probe with the split exponent `a = 1/(1+s)`.
    pub fn new(decay_s: f64, lq_exponent: f64) -> Result<Self> {
        let p = MultiplierProbe { decay_s, lq_exponent, cutoff_eps: 0.25, split_a: 1.0 / (1.0 + decay_s) };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.decay_s > 0.0) {
            return Err(Error::InvalidParameters(format!("decay s = {}", self.decay_s)));
        }
        if !(1.0..4.0).contains(&self.lq_exponent) {
            return Err(Error::InvalidExponent(format!("q = {} must lie in [1, 4)", self.lq_exponent)));
        }
        if !(self.cutoff_eps > 0.0 && self.cutoff_eps < 1.0) {
            return Err(Error::InvalidParameters("cutoff eps must lie in (0, 1)".into()));
        }
        if !(self.split_a > 0.0 && self.split_a < 1.0) {
            return Err(Error::InvalidParameters("split a must lie in (0, 1)".into()));
        }
        Ok(())
    }

    /// `s(1 - q/4)/(1 + s)`.
    pub fn decay_exponent(&self) -> f64 {
        self.decay_s * (1.0 - self.lq_exponent / 4.0) / (1.0 + self.decay_s)
    }

    /// Cutoff radius `|y|^{-a}`.
    pub fn radius(&self, y: f64) -> f64 {
        y.abs().powf(-self.split_a)
    }
}

/// Smooth even cutoff equal to 1 on `[-1+ε, 1-ε]` and 0 outside `(-1, 1)`.
pub fn smooth_cutoff(x: f64, eps: f64) -> f64 {
    let a = x.abs();
    if a <= 1.0 - eps {
        return 1.0;
    }
    if a >= 1.0 {
        return 0.0;
    }
    let u = (1.0 - a) / eps;
    let psi = |v: f64| if v <= 0.0 { 0.0 } else { (-1.0 / v).exp() };
    psi(u) / (psi(u) + psi(1.0 - u))
}

/// `(A, C)` with `A = T_{m_A}(f,g)`, `C = T_{m_C}(f,g)`, where
/// `m_A = (1 - e^{-2πiyξ}) m Φ_R(ξ)` and `m_C = (1 - e^{-2πiyξ}) m (1 - Φ_R(ξ))`,
/// `R = |y|^{-a}`. Their sum is `T_m(f - τ_y f, g)`.
pub fn continuity_split(
    m: &MultiplierGrid,
    y: f64,
    probe: &MultiplierProbe,
    f: &GridFunction,
    g: &GridFunction,
) -> Result<(GridFunction, GridFunction)> {
    probe.validate()?;
    require_1d(f)?;
    if !(y.abs() <= 1.0) {
        return Err(Error::Precondition(format!("|y| = {} exceeds 1", y.abs())));
    }
    if y == 0.0 {
        let z = GridFunction::zeros(&f.spec());
        return Ok((z.clone(), z));
    }
    let r = probe.radius(y);
    let eps = probe.cutoff_eps;
    let diff = |xi: f64| Complex64::new(1.0, 0.0) - Complex64::from_polar(1.0, -2.0 * PI * y * xi);
    let ma = m.map(|xi, _, v| diff(xi) * v * smooth_cutoff(xi / r, eps));
    let mc = m.map(|xi, _, v| diff(xi) * v * (1.0 - smooth_cutoff(xi / r, eps)));
    Ok((bilinear_multiplier_apply(&ma, f, g)?, bilinear_multiplier_apply(&mc, f, g)?))
}

/// `(1 + ξ² + η²)^{-s/2}`.
pub fn bessel_multiplier(s: f64) -> impl Fn(f64, f64) -> Complex64 {
    move |xi, eta| Complex64::new((1.0 + xi * xi + eta * eta).powf(-0.5 * s), 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpec;

    fn grid(n: usize) -> GridSpec {
        GridSpec::new(1, vec![0.0], 1.0, n).unwrap()
    }

    #[test]
    fn unit_multiplier_is_the_product() {
        let s = grid(32);
        let f = GridFunction::from_fn(&s, |x| (2.0 * PI * x[0]).sin() + 0.3).unwrap();
        let g = GridFunction::from_fn(&s, |x| x[0] * (1.0 - x[0])).unwrap();
        let one = sample_multiplier(32, 1.0, |_, _| Complex64::new(1.0, 0.0));
        let out = bilinear_multiplier_apply(&one, &f, &g).unwrap();
        for i in 0..32 {
            assert!((out.values[i] - f.values[i] * g.values[i]).abs() < 1e-12);
        }
        let zero = sample_multiplier(32, 1.0, |_, _| Complex64::new(0.0, 0.0));
        assert!(bilinear_multiplier_apply(&zero, &f, &g).unwrap().values.iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn rejects_two_dimensions() {
        let s = GridSpec::unit(2, 4).unwrap();
        let f = GridFunction::constant(&s, 1.0);
        let m = sample_multiplier(4, 1.0, |_, _| Complex64::new(1.0, 0.0));
        assert!(matches!(bilinear_multiplier_apply(&m, &f, &f), Err(Error::NotImplemented(_))));
    }

    #[test]
    fn cutoff_shape() {
        assert_eq!(smooth_cutoff(0.0, 0.25), 1.0);
        assert_eq!(smooth_cutoff(0.75, 0.25), 1.0);
        assert_eq!(smooth_cutoff(-1.0, 0.25), 0.0);
        let v = smooth_cutoff(0.875, 0.25);
        assert!((v - 0.5).abs() < 1e-12);
        let mut last = 1.0;
        for i in 0..=100 {
            let c = smooth_cutoff(0.75 + 0.0025 * i as f64, 0.25);
            assert!(c <= last + 1e-15);
            last = c;
        }
    }

    #[test]
    fn split_parts_sum_to_translated_difference() {
        let s = grid(64);
        let f = GridFunction::from_fn(&s, |x| if (0.2..0.5).contains(&x[0]) { 1.0 } else { 0.0 }).unwrap();
        let g = GridFunction::from_fn(&s, |x| if (0.4..0.9).contains(&x[0]) { 1.0 } else { 0.0 }).unwrap();
        let m = sample_multiplier(64, 1.0, bessel_multiplier(1.0));
        let probe = MultiplierProbe::new(1.0, 3.0).unwrap();
        let y = 0.125;
        let (a, c) = continuity_split(&m, y, &probe, &f, &g).unwrap();
        let d = spectral_translate_diff(&f, y).unwrap();
        let full = bilinear_multiplier_apply(&m, &d, &g).unwrap();
        for i in 0..64 {
            assert!((a.values[i] + c.values[i] - full.values[i]).abs() < 1e-12);
        }
        let (a0, c0) = continuity_split(&m, 0.0, &probe, &f, &g).unwrap();
        assert!(a0.values.iter().chain(&c0.values).all(|&v| v == 0.0));
        assert!(continuity_split(&m, 1.5, &probe, &f, &g).is_err());
    }

    #[test]
    fn probe_validation() {
        assert!(MultiplierProbe::new(1.0, 4.0).is_err());
        let p = MultiplierProbe::new(1.0, 3.0).unwrap();
        assert!((p.split_a - 0.5).abs() < 1e-15);
        assert!((p.decay_exponent() - 0.125).abs() < 1e-15);
    }
}
