//! Uniform periodic grid on the torus `[0, L)^3`.

use crate::error::{Error, Result};

/// Discretization of the periodic box: `n` points per axis (a power of two),
/// physical period `len`, spacing `h = len / n`.
///
/// Samples live at `x_d = i_d * h`, `i_d = 0..n`. Scalar data is stored
/// row-major with the x1 index fastest: `idx = (i3 * n + i2) * n + i1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    n: usize,
    len: f64,
}

impl Grid {
    pub const DEFAULT_LEN: f64 = std::f64::consts::TAU;

    pub fn new(n: usize, len: f64) -> Result<Self> {
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "n = {n} must be a power of two with n >= 8"
            )));
        }
        if !(len.is_finite() && len > 0.0) {
            return Err(Error::InvalidGrid(format!("box length {len} must be positive")));
        }
        Ok(Self { n, len })
    }

    /// Grid with the default period `2*pi`.
    pub fn unit(n: usize) -> Result<Self> {
        Self::new(n, Self::DEFAULT_LEN)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn len(&self) -> f64 {
        self.len
    }

    /// Grid spacing `h = L / n`.
    #[inline]
    pub fn spacing(&self) -> f64 {
        self.len / self.n as f64
    }

    /// Total number of samples `n^3`.
    #[inline]
    pub fn points(&self) -> usize {
        self.n * self.n * self.n
    }

    /// Quadrature weight of one sample, `h^3`.
    #[inline]
    pub fn cell_volume(&self) -> f64 {
        let h = self.spacing();
        h * h * h
    }

    /// Physical coordinate of sample index `i` along one axis.
    #[inline]
    pub fn coord(&self, i: usize) -> f64 {
        i as f64 * self.spacing()
    }

    /// Integer wavenumber of FFT bin `i`: `0..n/2` then `-n/2..0`.
    #[inline]
    pub fn wavenumber(&self, i: usize) -> i64 {
        let n = self.n as i64;
        let i = i as i64;
        if i < n / 2 {
            i
        } else {
            i - n
        }
    }

    /// Angular frequency `2*pi*k / L` of FFT bin `i`.
    #[inline]
    pub fn frequency(&self, i: usize) -> f64 {
        std::f64::consts::TAU * self.wavenumber(i) as f64 / self.len
    }

    /// Flat index of the sample `(i1, i2, i3)`; x1 fastest.
    #[inline]
    pub fn idx(&self, i1: usize, i2: usize, i3: usize) -> usize {
        (i3 * self.n + i2) * self.n + i1
    }

    pub fn check_same(&self, other: &Grid) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::ShapeMismatch(format!(
                "grids differ: n={} L={} vs n={} L={}",
                self.n, self.len, other.n, other.len
            )))
        }
    }
}
