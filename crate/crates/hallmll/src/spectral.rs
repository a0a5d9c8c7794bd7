//! Discrete Fourier transforms on the periodic grid.
//!
//! Convention: the forward transform is unscaled, the inverse divides by
//! `n^3`. Mode `k = 0` of a forward transform therefore equals
//! `mean * n^3`. Coefficients are indexed like samples, with FFT bin `i`
//! carrying integer wavenumber `i` for `i < n/2` and `i - n` otherwise.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::Result;
use crate::field::{ScalarField, VectorField};
use crate::grid::Grid;

/// Complex Fourier coefficients of a real field.
#[derive(Clone, Debug)]
pub struct SpectralField {
    grid: Grid,
    data: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            data: vec![Complex64::ZERO; grid.points()],
        }
    }

    #[inline]
    pub fn grid(&self) -> Grid {
        self.grid
    }

    #[inline]
    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    /// Coefficient at integer wavevector bins `(i1, i2, i3)`.
    #[inline]
    pub fn at(&self, i1: usize, i2: usize, i3: usize) -> Complex64 {
        self.data[self.grid.idx(i1, i2, i3)]
    }

    /// Apply a multiplier that depends on the angular frequencies
    /// `kappa = 2*pi*k/L` of each mode, in place.
    pub fn apply_multiplier(&mut self, f: impl Fn(f64, f64, f64) -> Complex64) {
        let n = self.grid.n();
        let mut freq = Vec::with_capacity(n);
        for i in 0..n {
            freq.push(self.grid.frequency(i));
        }
        for i3 in 0..n {
            for i2 in 0..n {
                let row = (i3 * n + i2) * n;
                for i1 in 0..n {
                    self.data[row + i1] *= f(freq[i1], freq[i2], freq[i3]);
                }
            }
        }
    }

    /// Zero every mode with `|k| > n/3` (spherical two-thirds truncation).
    pub fn dealias(&mut self) {
        let n = self.grid.n();
        let cutoff_sq = (n as f64 / 3.0) * (n as f64 / 3.0);
        for i3 in 0..n {
            let k3 = self.grid.wavenumber(i3) as f64;
            for i2 in 0..n {
                let k2 = self.grid.wavenumber(i2) as f64;
                for i1 in 0..n {
                    let k1 = self.grid.wavenumber(i1) as f64;
                    if k1 * k1 + k2 * k2 + k3 * k3 > cutoff_sq {
                        self.data[self.grid.idx(i1, i2, i3)] = Complex64::ZERO;
                    }
                }
            }
        }
    }

    /// L2 energy of the coefficients under the chosen normalization:
    /// `(L^3 / n^6) * sum |c_k|^2`, which equals `h^3 * sum |f|^2` by
    /// Parseval.
    pub fn coefficient_energy(&self) -> f64 {
        let n3 = self.grid.points() as f64;
        let scale = self.grid.len().powi(3) / (n3 * n3);
        self.data.iter().map(|c| c.norm_sqr()).sum::<f64>() * scale
    }
}

struct Plans {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

fn plans_for(n: usize) -> Arc<Plans> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Plans>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut map = cache.lock().unwrap();
    map.entry(n)
        .or_insert_with(|| {
            let mut planner = FftPlanner::new();
            Arc::new(Plans {
                forward: planner.plan_fft_forward(n),
                inverse: planner.plan_fft_inverse(n),
            })
        })
        .clone()
}

/// In-place 3-D FFT over a complex cube, one axis at a time.
fn fft3_in_place(grid: Grid, data: &mut [Complex64], inverse: bool) {
    let n = grid.n();
    let plans = plans_for(n);
    let fft = if inverse {
        plans.inverse.clone()
    } else {
        plans.forward.clone()
    };
    let mut scratch = vec![Complex64::ZERO; fft.get_inplace_scratch_len()];

    // axis 1: contiguous lines
    for line in data.chunks_exact_mut(n) {
        fft.process_with_scratch(line, &mut scratch);
    }

    // axis 2: stride n within each i3-plane
    let mut buf = vec![Complex64::ZERO; n];
    for i3 in 0..n {
        let plane = i3 * n * n;
        for i1 in 0..n {
            for i2 in 0..n {
                buf[i2] = data[plane + i2 * n + i1];
            }
            fft.process_with_scratch(&mut buf, &mut scratch);
            for i2 in 0..n {
                data[plane + i2 * n + i1] = buf[i2];
            }
        }
    }

    // axis 3: stride n^2
    let nn = n * n;
    for i2 in 0..n {
        for i1 in 0..n {
            let base = i2 * n + i1;
            for i3 in 0..n {
                buf[i3] = data[base + i3 * nn];
            }
            fft.process_with_scratch(&mut buf, &mut scratch);
            for i3 in 0..n {
                data[base + i3 * nn] = buf[i3];
            }
        }
    }
}

/// Forward transform of a scalar field. Errors on non-finite input.
pub fn forward(f: &ScalarField) -> Result<SpectralField> {
    f.check_finite("forward transform input")?;
    Ok(forward_unchecked(f))
}

pub(crate) fn forward_unchecked(f: &ScalarField) -> SpectralField {
    let mut out = SpectralField::zeros(f.grid());
    for (c, &v) in out.data.iter_mut().zip(f.data()) {
        *c = Complex64::new(v, 0.0);
    }
    fft3_in_place(f.grid(), &mut out.data, false);
    out
}

/// Inverse transform back to a real field; divides by `n^3` and takes the
/// real part (imaginary residue of a Hermitian spectrum is FFT roundoff).
pub fn inverse(f: &SpectralField) -> ScalarField {
    let mut work = f.data.clone();
    fft3_in_place(f.grid, &mut work, true);
    let scale = 1.0 / f.grid.points() as f64;
    let mut out = ScalarField::zeros(f.grid);
    for (o, c) in out.data_mut().iter_mut().zip(&work) {
        *o = c.re * scale;
    }
    out
}

/// Forward transform of all three components.
pub fn forward_vector(v: &VectorField) -> Result<[SpectralField; 3]> {
    Ok([
        forward(v.comp(0))?,
        forward(v.comp(1))?,
        forward(v.comp(2))?,
    ])
}

pub fn inverse_vector(v: &[SpectralField; 3]) -> VectorField {
    VectorField::from_components(inverse(&v[0]), inverse(&v[1]), inverse(&v[2]))
        .expect("components share a grid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn constant_concentrates_at_zero_mode() {
        let g = Grid::unit(8).unwrap();
        let f = ScalarField::constant(g, 1.0);
        let s = forward(&f).unwrap();
        assert!((s.at(0, 0, 0).re - g.points() as f64).abs() < 1e-12);
        let off_energy: f64 = s
            .data()
            .iter()
            .skip(1)
            .map(|c| c.norm())
            .fold(0.0, f64::max);
        assert!(off_energy < 1e-12);
    }

    #[test]
    fn pure_tone_has_two_modes() {
        let g = Grid::unit(8).unwrap();
        let f = ScalarField::from_fn(g, |x, _, _| x.sin());
        let s = forward(&f).unwrap();
        let n3 = g.points() as f64;
        // sin(x1) = (e^{ix1} - e^{-ix1}) / 2i: modes k = (+-1, 0, 0)
        assert!((s.at(1, 0, 0) - Complex64::new(0.0, -n3 / 2.0)).norm() < 1e-9);
        assert!((s.at(7, 0, 0) - Complex64::new(0.0, n3 / 2.0)).norm() < 1e-9);
        let mut residue = 0.0f64;
        for i3 in 0..8 {
            for i2 in 0..8 {
                for i1 in 0..8 {
                    if (i2, i3) != (0, 0) || (i1 != 1 && i1 != 7) {
                        residue = residue.max(s.at(i1, i2, i3).norm());
                    }
                }
            }
        }
        assert!(residue < 1e-9);
    }

    #[test]
    fn roundtrip_on_random_data() {
        let g = Grid::unit(16).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let f = ScalarField::from_fn(g, |_, _, _| rng.random_range(-1.0..1.0));
        let back = inverse(&forward(&f).unwrap());
        let err: f64 = f
            .data()
            .iter()
            .zip(back.data())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(err <= 1e-12, "roundtrip error {err}");
    }

    #[test]
    fn parseval_holds() {
        let g = Grid::unit(16).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let f = ScalarField::from_fn(g, |_, _, _| rng.random_range(-1.0..1.0));
        let phys: f64 = f.data().iter().map(|v| v * v).sum::<f64>() * g.cell_volume();
        let spec = forward(&f).unwrap().coefficient_energy();
        assert!((phys - spec).abs() <= 1e-12 * phys.max(1.0));
    }

    #[test]
    fn non_finite_input_rejected() {
        let g = Grid::unit(8).unwrap();
        let mut f = ScalarField::zeros(g);
        f.data_mut()[3] = f64::NAN;
        assert!(forward(&f).is_err());
    }
}
