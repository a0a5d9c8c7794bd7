//! Sampled real fields on the periodic grid.

use crate::error::{Error, Result};
use crate::grid::Grid;

/// Real scalar samples on a [`Grid`], row-major with x1 fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField {
    grid: Grid,
    data: Vec<f64>,
}

impl ScalarField {
    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            data: vec![0.0; grid.points()],
        }
    }

    pub fn constant(grid: Grid, c: f64) -> Self {
        Self {
            grid,
            data: vec![c; grid.points()],
        }
    }

    pub fn from_data(grid: Grid, data: Vec<f64>) -> Result<Self> {
        if data.len() != grid.points() {
            return Err(Error::ShapeMismatch(format!(
                "expected {} samples, got {}",
                grid.points(),
                data.len()
            )));
        }
        Ok(Self { grid, data })
    }

    /// Sample `f(x1, x2, x3)` at every grid point.
    pub fn from_fn(grid: Grid, mut f: impl FnMut(f64, f64, f64) -> f64) -> Self {
        let n = grid.n();
        let mut data = Vec::with_capacity(grid.points());
        for i3 in 0..n {
            let x3 = grid.coord(i3);
            for i2 in 0..n {
                let x2 = grid.coord(i2);
                for i1 in 0..n {
                    data.push(f(grid.coord(i1), x2, x3));
                }
            }
        }
        Self { grid, data }
    }

    #[inline]
    pub fn grid(&self) -> Grid {
        self.grid
    }

    #[inline]
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    #[inline]
    pub fn at(&self, i1: usize, i2: usize, i3: usize) -> f64 {
        self.data[self.grid.idx(i1, i2, i3)]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn check_finite(&self, what: &str) -> Result<()> {
        if self.is_finite() {
            Ok(())
        } else {
            Err(Error::NonFiniteField(what.to_string()))
        }
    }

    pub fn mean(&self) -> f64 {
        self.data.iter().sum::<f64>() / self.data.len() as f64
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// `self + a * other`, fresh allocation.
    pub fn add_scaled(&self, a: f64, other: &ScalarField) -> ScalarField {
        self.zip(other, |x, y| x + a * y)
    }

    pub fn scale(&self, a: f64) -> ScalarField {
        self.map(|x| a * x)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> ScalarField {
        ScalarField {
            grid: self.grid,
            data: self.data.iter().map(|&x| f(x)).collect(),
        }
    }

    pub fn zip(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> ScalarField {
        assert_eq!(self.grid, other.grid, "zip over mismatched grids");
        ScalarField {
            grid: self.grid,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&x, &y)| f(x, y))
                .collect(),
        }
    }

    pub fn mul(&self, other: &ScalarField) -> ScalarField {
        self.zip(other, |x, y| x * y)
    }

    pub fn sub(&self, other: &ScalarField) -> ScalarField {
        self.zip(other, |x, y| x - y)
    }

    pub fn add(&self, other: &ScalarField) -> ScalarField {
        self.zip(other, |x, y| x + y)
    }

    /// Periodic shift by whole grid cells: result(x) = self(x - s*h*dir).
    /// A pure index permutation, no interpolation.
    pub fn shift(&self, s1: i64, s2: i64, s3: i64) -> ScalarField {
        let n = self.grid.n() as i64;
        let wrap = |i: i64, s: i64| -> usize { (i - s).rem_euclid(n) as usize };
        let mut out = ScalarField::zeros(self.grid);
        let nn = self.grid.n();
        for i3 in 0..nn {
            let j3 = wrap(i3 as i64, s3);
            for i2 in 0..nn {
                let j2 = wrap(i2 as i64, s2);
                for i1 in 0..nn {
                    let j1 = wrap(i1 as i64, s1);
                    out.data[self.grid.idx(i1, i2, i3)] = self.data[self.grid.idx(j1, j2, j3)];
                }
            }
        }
        out
    }
}

/// Three scalar components on a shared grid.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    comps: [ScalarField; 3],
}

impl VectorField {
    pub fn zeros(grid: Grid) -> Self {
        Self {
            comps: [
                ScalarField::zeros(grid),
                ScalarField::zeros(grid),
                ScalarField::zeros(grid),
            ],
        }
    }

    pub fn constant(grid: Grid, v: [f64; 3]) -> Self {
        Self {
            comps: [
                ScalarField::constant(grid, v[0]),
                ScalarField::constant(grid, v[1]),
                ScalarField::constant(grid, v[2]),
            ],
        }
    }

    pub fn from_components(c1: ScalarField, c2: ScalarField, c3: ScalarField) -> Result<Self> {
        c1.grid().check_same(&c2.grid())?;
        c1.grid().check_same(&c3.grid())?;
        Ok(Self { comps: [c1, c2, c3] })
    }

    pub fn from_fn(grid: Grid, mut f: impl FnMut(f64, f64, f64) -> [f64; 3]) -> Self {
        let mut c = [
            ScalarField::zeros(grid),
            ScalarField::zeros(grid),
            ScalarField::zeros(grid),
        ];
        let n = grid.n();
        for i3 in 0..n {
            for i2 in 0..n {
                for i1 in 0..n {
                    let v = f(grid.coord(i1), grid.coord(i2), grid.coord(i3));
                    let idx = grid.idx(i1, i2, i3);
                    for d in 0..3 {
                        c[d].data_mut()[idx] = v[d];
                    }
                }
            }
        }
        Self { comps: c }
    }

    #[inline]
    pub fn grid(&self) -> Grid {
        self.comps[0].grid()
    }

    #[inline]
    pub fn comp(&self, d: usize) -> &ScalarField {
        &self.comps[d]
    }

    #[inline]
    pub fn comp_mut(&mut self, d: usize) -> &mut ScalarField {
        &mut self.comps[d]
    }

    pub fn components(&self) -> &[ScalarField; 3] {
        &self.comps
    }

    pub fn into_components(self) -> [ScalarField; 3] {
        self.comps
    }

    pub fn is_finite(&self) -> bool {
        self.comps.iter().all(|c| c.is_finite())
    }

    pub fn check_finite(&self, what: &str) -> Result<()> {
        if self.is_finite() {
            Ok(())
        } else {
            Err(Error::NonFiniteField(what.to_string()))
        }
    }

    pub fn mean(&self) -> [f64; 3] {
        [self.comps[0].mean(), self.comps[1].mean(), self.comps[2].mean()]
    }

    pub fn max_abs(&self) -> f64 {
        let mut m = 0.0f64;
        let n = self.grid().points();
        for i in 0..n {
            let v = self.magnitude_sq_at(i);
            m = m.max(v);
        }
        m.sqrt()
    }

    #[inline]
    fn magnitude_sq_at(&self, idx: usize) -> f64 {
        let a = self.comps[0].data()[idx];
        let b = self.comps[1].data()[idx];
        let c = self.comps[2].data()[idx];
        a * a + b * b + c * c
    }

    /// Pointwise Euclidean magnitude squared as a scalar field.
    pub fn magnitude_sq(&self) -> ScalarField {
        let mut out = ScalarField::zeros(self.grid());
        for i in 0..self.grid().points() {
            out.data_mut()[i] = self.magnitude_sq_at(i);
        }
        out
    }

    pub fn map2(&self, other: &VectorField, f: impl Fn(f64, f64) -> f64 + Copy) -> VectorField {
        VectorField {
            comps: [
                self.comps[0].zip(&other.comps[0], f),
                self.comps[1].zip(&other.comps[1], f),
                self.comps[2].zip(&other.comps[2], f),
            ],
        }
    }

    pub fn add(&self, other: &VectorField) -> VectorField {
        self.map2(other, |x, y| x + y)
    }

    pub fn sub(&self, other: &VectorField) -> VectorField {
        self.map2(other, |x, y| x - y)
    }

    pub fn add_scaled(&self, a: f64, other: &VectorField) -> VectorField {
        self.map2(other, move |x, y| x + a * y)
    }

    pub fn scale(&self, a: f64) -> VectorField {
        VectorField {
            comps: [
                self.comps[0].scale(a),
                self.comps[1].scale(a),
                self.comps[2].scale(a),
            ],
        }
    }

    /// Pointwise dot product.
    pub fn dot(&self, other: &VectorField) -> ScalarField {
        assert_eq!(self.grid(), other.grid(), "dot over mismatched grids");
        let mut out = ScalarField::zeros(self.grid());
        for d in 0..3 {
            let a = self.comps[d].data();
            let b = other.comps[d].data();
            for (o, (&x, &y)) in out.data_mut().iter_mut().zip(a.iter().zip(b)) {
                *o += x * y;
            }
        }
        out
    }

    /// Pointwise cross product `self x other`.
    pub fn cross(&self, other: &VectorField) -> VectorField {
        assert_eq!(self.grid(), other.grid(), "cross over mismatched grids");
        let [a1, a2, a3] = [
            self.comps[0].data(),
            self.comps[1].data(),
            self.comps[2].data(),
        ];
        let [b1, b2, b3] = [
            other.comps[0].data(),
            other.comps[1].data(),
            other.comps[2].data(),
        ];
        let mut out = VectorField::zeros(self.grid());
        for i in 0..self.grid().points() {
            out.comps[0].data_mut()[i] = a2[i] * b3[i] - a3[i] * b2[i];
            out.comps[1].data_mut()[i] = a3[i] * b1[i] - a1[i] * b3[i];
            out.comps[2].data_mut()[i] = a1[i] * b2[i] - a2[i] * b1[i];
        }
        out
    }

    /// Pointwise scaling by a scalar field.
    pub fn mul_scalar(&self, s: &ScalarField) -> VectorField {
        VectorField {
            comps: [
                self.comps[0].mul(s),
                self.comps[1].mul(s),
                self.comps[2].mul(s),
            ],
        }
    }

    pub fn shift(&self, s1: i64, s2: i64, s3: i64) -> VectorField {
        VectorField {
            comps: [
                self.comps[0].shift(s1, s2, s3),
                self.comps[1].shift(s1, s2, s3),
                self.comps[2].shift(s1, s2, s3),
            ],
        }
    }
}

/// 3x3 tensor field stored as nine scalar fields, row-major in `(i, j)`.
#[derive(Clone, Debug)]
pub struct TensorField {
    grid: Grid,
    comps: Vec<ScalarField>,
}

impl TensorField {
    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            comps: (0..9).map(|_| ScalarField::zeros(grid)).collect(),
        }
    }

    /// Outer product `a (x) b`, entry `(i, j) = a_i b_j`.
    pub fn outer(a: &VectorField, b: &VectorField) -> Self {
        assert_eq!(a.grid(), b.grid(), "outer over mismatched grids");
        let mut t = TensorField::zeros(a.grid());
        for i in 0..3 {
            for j in 0..3 {
                t.comps[3 * i + j] = a.comp(i).mul(b.comp(j));
            }
        }
        t
    }

    #[inline]
    pub fn grid(&self) -> Grid {
        self.grid
    }

    #[inline]
    pub fn entry(&self, i: usize, j: usize) -> &ScalarField {
        &self.comps[3 * i + j]
    }

    #[inline]
    pub fn entry_mut(&mut self, i: usize, j: usize) -> &mut ScalarField {
        &mut self.comps[3 * i + j]
    }

    pub fn sub(&self, other: &TensorField) -> TensorField {
        TensorField {
            grid: self.grid,
            comps: self
                .comps
                .iter()
                .zip(&other.comps)
                .map(|(a, b)| a.sub(b))
                .collect(),
        }
    }

    pub fn add_scaled(&self, a: f64, other: &TensorField) -> TensorField {
        TensorField {
            grid: self.grid,
            comps: self
                .comps
                .iter()
                .zip(&other.comps)
                .map(|(x, y)| x.add_scaled(a, y))
                .collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.comps.iter().fold(0.0, |m, c| m.max(c.max_abs()))
    }
}
