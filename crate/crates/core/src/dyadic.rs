//! Dyadic cubes on the 3^d one-third-shifted lattices.
//!
//! A lattice is fixed by a digit vector `e` in {0,1,2}^d. At generation `j`
//! the cubes of lattice `e` are `origin + side_j * ([0,1)^d + c + e_j/3)` with
//! `side_j = fundamental_side * 2^j`, where `e_j = e` for even `j` and digits
//! 1 and 2 swap for odd `j`. Lattice id 1 (all digits zero) is the unshifted
//! standard lattice.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DyadicCube {
    pub dim: usize,
    pub lattice_id: usize,
    pub generation: i32,
    pub corner: Vec<i64>,
}

impl DyadicCube {
    pub fn new(lattice_id: usize, generation: i32, corner: Vec<i64>) -> Self {
        DyadicCube { dim: corner.len(), lattice_id, generation, corner }
    }

    /// Side length of this cube for the given fundamental side.
    pub fn side(&self, fundamental_side: f64) -> f64 {
        fundamental_side * 2f64.powi(self.generation)
    }
}

impl Ord for DyadicCube {
    /// Coarse generations first, then corners lexicographically.
    fn cmp(&self, other: &Self) -> Ordering {
        self.dim
            .cmp(&other.dim)
            .then(self.lattice_id.cmp(&other.lattice_id))
            .then(other.generation.cmp(&self.generation))
            .then_with(|| self.corner.cmp(&other.corner))
    }
}

impl PartialOrd for DyadicCube {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Half-open axis-parallel box `[lo, hi)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AxisBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl AxisBox {
    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter().zip(&self.lo).zip(&self.hi).all(|((v, l), h)| *l <= *v && *v < *h)
    }

    /// True when the interiors overlap.
    pub fn overlaps(&self, other: &AxisBox) -> bool {
        (0..self.lo.len()).all(|i| self.lo[i].max(other.lo[i]) < self.hi[i].min(other.hi[i]))
    }

    pub fn volume(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(l, h)| (h - l).max(0.0)).product()
    }

    pub fn center(&self) -> Vec<f64> {
        self.lo.iter().zip(&self.hi).map(|(l, h)| 0.5 * (l + h)).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeDescriptor {
    pub id: usize,
    /// Shift digits at generation 0, in thirds of the side length.
    pub digits: Vec<u8>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LatticeFamily {
    pub dim: usize,
    pub fundamental_side: f64,
    pub origin: Vec<f64>,
    pub lattices: Vec<LatticeDescriptor>,
}

fn digits_of(id: usize, dim: usize) -> Vec<u8> {
    let mut rest = id - 1;
    (0..dim)
        .map(|_| {
            let e = (rest % 3) as u8;
            rest /= 3;
            e
        })
        .collect()
}

fn digit_at(e: u8, generation: i32) -> u8 {
    if generation.rem_euclid(2) == 0 {
        e
    } else {
        (3 - e) % 3
    }
}

/// The 3^d shifted lattices with origin at zero.
pub fn shifted_lattices(dim: usize, fundamental_side: f64) -> Result<LatticeFamily> {
    LatticeFamily::new(dim, fundamental_side, vec![0.0; dim])
}

impl LatticeFamily {
    pub fn new(dim: usize, fundamental_side: f64, origin: Vec<f64>) -> Result<Self> {
        if dim == 0 || dim > 12 {
            return Err(Error::InvalidDimension(dim));
        }
        if !(fundamental_side > 0.0 && fundamental_side.is_finite()) {
            return Err(Error::InvalidParameters(format!("fundamental side {fundamental_side}")));
        }
        if origin.len() != dim {
            return Err(Error::InvalidDimension(origin.len()));
        }
        let count = 3usize.pow(dim as u32);
        let lattices = (1..=count).map(|id| LatticeDescriptor { id, digits: digits_of(id, dim) }).collect();
        Ok(LatticeFamily { dim, fundamental_side, origin, lattices })
    }

    pub fn lattice_count(&self) -> usize {
        self.lattices.len()
    }

    fn check(&self, q: &DyadicCube) -> Result<()> {
        if q.dim != self.dim || q.corner.len() != self.dim {
            return Err(Error::InvalidDimension(q.dim));
        }
        if q.lattice_id == 0 || q.lattice_id > self.lattices.len() {
            return Err(Error::InvalidParameters(format!("lattice id {}", q.lattice_id)));
        }
        Ok(())
    }

    /// Shift digits (thirds) of lattice `id` at generation `j`.
    pub fn digits(&self, id: usize, generation: i32) -> Vec<u8> {
        self.lattices[id - 1].digits.iter().map(|&e| digit_at(e, generation)).collect()
    }

    pub fn side(&self, generation: i32) -> f64 {
        self.fundamental_side * 2f64.powi(generation)
    }

    pub fn cube_box(&self, q: &DyadicCube) -> AxisBox {
        let s = self.side(q.generation);
        let e = self.digits(q.lattice_id, q.generation);
        let lo: Vec<f64> = (0..self.dim)
            .map(|i| self.origin[i] + s * (q.corner[i] as f64 + e[i] as f64 / 3.0))
            .collect();
        let hi = lo.iter().map(|l| l + s).collect();
        AxisBox { lo, hi }
    }

    pub fn measure(&self, q: &DyadicCube) -> f64 {
        self.side(q.generation).powi(self.dim as i32)
    }

    /// Integer offset `d` with `parent = floor((c + d) / 2)`.
    fn parent_offsets(&self, id: usize, generation: i32) -> Vec<i64> {
        let a = self.digits(id, generation);
        let b = self.digits(id, generation + 1);
        a.iter().zip(&b).map(|(&x, &y)| (x as i64 - 2 * y as i64) / 3).collect()
    }

    pub fn parent(&self, q: &DyadicCube) -> DyadicCube {
        let d = self.parent_offsets(q.lattice_id, q.generation);
        let corner = q.corner.iter().zip(&d).map(|(c, o)| (c + o).div_euclid(2)).collect();
        DyadicCube::new(q.lattice_id, q.generation + 1, corner)
    }

    /// The 2^d children, lexicographic in the binary offset.
    pub fn children(&self, q: &DyadicCube) -> Vec<DyadicCube> {
        let d = self.parent_offsets(q.lattice_id, q.generation - 1);
        (0..1usize << self.dim)
            .map(|bits| {
                let corner = (0..self.dim)
                    .map(|i| {
                        let b = ((bits >> (self.dim - 1 - i)) & 1) as i64;
                        2 * q.corner[i] + b - d[i]
                    })
                    .collect();
                DyadicCube::new(q.lattice_id, q.generation - 1, corner)
            })
            .collect()
    }

    pub fn ancestor(&self, q: &DyadicCube, generation: i32) -> Option<DyadicCube> {
        if generation < q.generation {
            return None;
        }
        let mut cur = q.clone();
        while cur.generation < generation {
            cur = self.parent(&cur);
        }
        Some(cur)
    }

    /// `inner ⊆ outer` for cubes of the same lattice.
    pub fn contains(&self, outer: &DyadicCube, inner: &DyadicCube) -> bool {
        outer.lattice_id == inner.lattice_id
            && self.ancestor(inner, outer.generation).as_ref() == Some(outer)
    }

    /// The cube of the given lattice and generation containing `x`.
    pub fn locate(&self, id: usize, generation: i32, x: &[f64]) -> DyadicCube {
        let s = self.side(generation);
        let e = self.digits(id, generation);
        let corner = (0..self.dim)
            .map(|i| ((x[i] - self.origin[i]) / s - e[i] as f64 / 3.0).floor() as i64)
            .collect();
        DyadicCube::new(id, generation, corner)
    }

    /// Assign the tripled cube `3Q` of the base cube `Q = (s/3) * ([0,1)^d + k)`
    /// (generation `j`, `s = side_j`) to its unique shifted lattice.
    pub fn assign_tripled(&self, generation: i32, k: &[i64]) -> DyadicCube {
        let mut id = 1usize;
        let mut corner = Vec::with_capacity(self.dim);
        for (i, ki) in k.iter().enumerate() {
            let ej = (ki - 1).rem_euclid(3);
            corner.push((ki - 1 - ej) / 3);
            let e0 = digit_at(ej as u8, generation) as usize;
            id += e0 * 3usize.pow(i as u32);
        }
        DyadicCube::new(id, generation, corner)
    }

    /// Lattices owning a cube of generation `j` whose lower corner is
    /// `origin + (s/3) * m` (exhaustive scan, used as an oracle).
    pub fn lattices_with_corner(&self, generation: i32, m: &[i64]) -> Vec<usize> {
        self.lattices
            .iter()
            .filter(|l| {
                let e = self.digits(l.id, generation);
                m.iter().zip(&e).all(|(mi, &ei)| (mi - ei as i64).rem_euclid(3) == 0)
            })
            .map(|l| l.id)
            .collect()
    }

    /// The 3^d same-size cubes tiling `3Q`, lexicographic in the offset
    /// vector over {-1,0,1}^d (first axis most significant).
    pub fn subcube_enumeration(&self, q: &DyadicCube) -> Vec<DyadicCube> {
        offsets(self.dim)
            .into_iter()
            .map(|o| {
                let corner = q.corner.iter().zip(&o).map(|(c, d)| c + d).collect();
                DyadicCube::new(q.lattice_id, q.generation, corner)
            })
            .collect()
    }

    /// The middle third `(1/3)Q`.
    pub fn middle_third(&self, q: &DyadicCube) -> AxisBox {
        self.third_subcube(q, 3usize.pow(self.dim as u32).div_ceil(2)).expect("center index")
    }

    /// `((1/3)Q)(j)`: the j-th (1-based) of the 3^d subcubes of side l(Q)/3
    /// dividing `Q`, in the same lexicographic order as `subcube_enumeration`.
    pub fn third_subcube(&self, q: &DyadicCube, j: usize) -> Result<AxisBox> {
        let count = 3usize.pow(self.dim as u32);
        if j == 0 || j > count {
            return Err(Error::InvalidParameters(format!("subcube index {j} outside 1..={count}")));
        }
        let b = self.cube_box(q);
        let s = self.side(q.generation) / 3.0;
        let o = &offsets(self.dim)[j - 1];
        let lo: Vec<f64> = (0..self.dim).map(|i| b.lo[i] + s * (o[i] + 1) as f64).collect();
        let hi = lo.iter().map(|l| l + s).collect();
        Ok(AxisBox { lo, hi })
    }

    /// The concentric half-size box `(1/2)Q`.
    pub fn middle_half(&self, q: &DyadicCube) -> AxisBox {
        let b = self.cube_box(q);
        let s = self.side(q.generation);
        AxisBox {
            lo: b.lo.iter().map(|l| l + 0.25 * s).collect(),
            hi: b.lo.iter().map(|l| l + 0.75 * s).collect(),
        }
    }

    /// `Q~(j)`: the minimal set of children of `Q` covering `((1/3)Q)(j)`.
    /// Computed exactly in units of l(Q)/6.
    pub fn enlarged_cover(&self, q: &DyadicCube, j: usize) -> Result<Vec<DyadicCube>> {
        self.check(q)?;
        let count = 3usize.pow(self.dim as u32);
        if j == 0 || j > count {
            return Err(Error::InvalidParameters(format!("subcube index {j} outside 1..={count}")));
        }
        let o = &offsets(self.dim)[j - 1];
        let kids = self.children(q);
        Ok((0..kids.len())
            .filter(|bits| {
                (0..self.dim).all(|i| {
                    let b = ((bits >> (self.dim - 1 - i)) & 1) as i64;
                    let (tlo, thi) = (2 * (o[i] + 1), 2 * (o[i] + 1) + 2);
                    tlo.max(3 * b) < thi.min(3 * b + 3)
                })
            })
            .map(|bits| kids[bits].clone())
            .collect())
    }

    /// Minimal set of children of `Q` covering `target ∩ Q`; empty when the
    /// target misses `Q`.
    pub fn half_child_cover(&self, q: &DyadicCube, target: &AxisBox) -> Vec<DyadicCube> {
        self.children(q).into_iter().filter(|c| self.cube_box(c).overlaps(target)).collect()
    }
}

/// {-1,0,1}^d in lexicographic order.
pub fn offsets(dim: usize) -> Vec<Vec<i64>> {
    let count = 3usize.pow(dim as u32);
    (0..count)
        .map(|mut k| {
            let mut v = vec![0i64; dim];
            for i in (0..dim).rev() {
                v[i] = (k % 3) as i64 - 1;
                k /= 3;
            }
            v
        })
        .collect()
}

/// Index (1-based) of the center entry of the 3^d enumeration.
pub fn center_index(dim: usize) -> usize {
    3usize.pow(dim as u32).div_ceil(2)
}
