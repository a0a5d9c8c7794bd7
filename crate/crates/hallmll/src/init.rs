//! Deterministic initial-data presets.
//!
//! Every random field is seeded, built mode-by-mode in a fixed order and
//! therefore bit-reproducible for a given `(grid, seed, parameters)`.

use num_complex::Complex64;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::calculus::{leray_project, Reduce};
use crate::error::{Error, Result};
use crate::field::VectorField;
use crate::grid::Grid;
use crate::spectral::{inverse, SpectralField};

/// ABC flow `(A sin x3 + C cos x2, B sin x1 + A cos x3, C sin x2 + B cos x1)`:
/// mean-zero, divergence-free, and an eigenfield of curl with eigenvalue one
/// on the `2*pi` box.
pub fn abc_beltrami(grid: Grid, a: f64, b: f64, c: f64) -> VectorField {
    let kappa = std::f64::consts::TAU / grid.len();
    VectorField::from_fn(grid, |x1, x2, x3| {
        let (x1, x2, x3) = (kappa * x1, kappa * x2, kappa * x3);
        [
            a * x3.sin() + c * x2.cos(),
            b * x1.sin() + a * x3.cos(),
            c * x2.sin() + b * x1.cos(),
        ]
    })
}

/// Orszag-Tang-like configuration embedded in 3-D: a planar vortex pair for
/// `u` and a doubled-wavenumber `B`, both divergence-free and mean-zero.
pub fn orszag_tang(grid: Grid, amplitude: f64) -> (VectorField, VectorField) {
    let kappa = std::f64::consts::TAU / grid.len();
    let u = VectorField::from_fn(grid, |x1, x2, _| {
        [
            -amplitude * (kappa * x2).sin(),
            amplitude * (kappa * x1).sin(),
            0.0,
        ]
    });
    let b = VectorField::from_fn(grid, |x1, x2, _| {
        [
            -amplitude * (kappa * x2).sin(),
            amplitude * (2.0 * kappa * x1).sin(),
            0.0,
        ]
    });
    (u, b)
}

fn hermitian_partner(n: usize, i: usize) -> usize {
    if i == 0 {
        0
    } else {
        n - i
    }
}

/// Random real field with spectral support in the closed shell
/// `kmin <= |k| <= kmax`, built from seeded unit-modulus modes with
/// Hermitian symmetry enforced. Not projected; see
/// [`random_band_limited`] for the divergence-free version.
pub fn random_band_limited_raw(
    grid: Grid,
    seed: u64,
    kmin: i64,
    kmax: i64,
    amplitude: f64,
) -> VectorField {
    random_spectral(grid, seed, amplitude, |ksq| {
        let k = (ksq as f64).sqrt();
        if k >= kmin as f64 - 0.5 && k <= kmax as f64 + 0.5 {
            1.0
        } else {
            0.0
        }
    })
}

/// Divergence-free, mean-zero random band-limited field scaled to max
/// amplitude `amplitude`.
pub fn random_band_limited(
    grid: Grid,
    seed: u64,
    kmin: i64,
    kmax: i64,
    amplitude: f64,
) -> VectorField {
    let raw = random_band_limited_raw(grid, seed, kmin.max(1), kmax, 1.0);
    let v = leray_project(&raw);
    let scale = amplitude / v.max_abs().max(1e-300);
    v.scale(scale)
}

/// Divergence-free random field with prescribed spectral decay
/// `|u_hat(k)| ~ |k|^(-slope)` for `1 <= |k| <= kmax`, normalized to unit
/// L2 norm then scaled.
pub fn random_spectral_slope(
    grid: Grid,
    seed: u64,
    slope: f64,
    kmax: i64,
    amplitude: f64,
) -> VectorField {
    let raw = random_spectral(grid, seed, 1.0, |ksq| {
        if ksq == 0 {
            return 0.0;
        }
        let k = (ksq as f64).sqrt();
        if k <= kmax as f64 + 0.5 {
            k.powf(-slope)
        } else {
            0.0
        }
    });
    let v = leray_project(&raw);
    let norm = Reduce::l2_sq_vector(&v).sqrt().max(1e-300);
    v.scale(amplitude / norm)
}

fn random_spectral(
    grid: Grid,
    seed: u64,
    amplitude: f64,
    weight: impl Fn(i64) -> f64,
) -> VectorField {
    let n = grid.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut spectra = [
        SpectralField::zeros(grid),
        SpectralField::zeros(grid),
        SpectralField::zeros(grid),
    ];
    let n3 = grid.points() as f64;
    for i3 in 0..n {
        let k3 = grid.wavenumber(i3);
        for i2 in 0..n {
            let k2 = grid.wavenumber(i2);
            for i1 in 0..n {
                let k1 = grid.wavenumber(i1);
                // Ordered walk; draw for every mode so the stream is
                // independent of the weight function's support.
                let phases: [f64; 3] = [
                    rng.random_range(0.0..std::f64::consts::TAU),
                    rng.random_range(0.0..std::f64::consts::TAU),
                    rng.random_range(0.0..std::f64::consts::TAU),
                ];
                // Skip Nyquist planes and self-conjugate handling beyond
                // k = 0: band-limited presets never reach them.
                if i1 == n / 2 || i2 == n / 2 || i3 == n / 2 {
                    continue;
                }
                let w = weight(k1 * k1 + k2 * k2 + k3 * k3);
                if w == 0.0 {
                    continue;
                }
                let j1 = hermitian_partner(n, i1);
                let j2 = hermitian_partner(n, i2);
                let j3 = hermitian_partner(n, i3);
                let idx = grid.idx(i1, i2, i3);
                let jdx = grid.idx(j1, j2, j3);
                if jdx < idx {
                    continue; // partner already written
                }
                for d in 0..3 {
                    let c = Complex64::from_polar(w * n3, phases[d]);
                    spectra[d].data_mut()[idx] = c;
                    spectra[d].data_mut()[jdx] = c.conj();
                }
            }
        }
    }
    let v = VectorField::from_components(
        inverse(&spectra[0]),
        inverse(&spectra[1]),
        inverse(&spectra[2]),
    )
    .expect("components share a grid");
    v.scale(amplitude)
}

/// Unit-length magnetization: a constant direction plus a band-limited
/// perturbation, renormalized pointwise.
pub fn magnetization_preset(
    grid: Grid,
    seed: u64,
    direction: [f64; 3],
    perturbation: f64,
    kmax: i64,
) -> VectorField {
    let base = VectorField::constant(grid, direction);
    let noise = random_band_limited_raw(grid, seed, 1, kmax, 1.0);
    let scale = if noise.max_abs() > 0.0 {
        perturbation / noise.max_abs()
    } else {
        0.0
    };
    let mut m = base.add_scaled(scale, &noise);
    normalize_in_place(&mut m);
    m
}

/// Renormalize a vector field to unit pointwise length.
pub fn normalize_in_place(m: &mut VectorField) {
    let pts = m.grid().points();
    for i in 0..pts {
        let a = m.comp(0).data()[i];
        let b = m.comp(1).data()[i];
        let c = m.comp(2).data()[i];
        let mag = (a * a + b * b + c * c).sqrt();
        if mag > 0.0 {
            m.comp_mut(0).data_mut()[i] = a / mag;
            m.comp_mut(1).data_mut()[i] = b / mag;
            m.comp_mut(2).data_mut()[i] = c / mag;
        }
    }
}

/// Named preset dispatch used by run configs.
pub enum FluidPreset {
    AbcBeltrami { a: f64, b: f64, c: f64 },
    OrszagTang { amplitude: f64 },
    RandomBand { seed: u64, kmin: i64, kmax: i64, amplitude: f64 },
    SpectralSlope { seed: u64, slope: f64, kmax: i64, amplitude: f64 },
}

impl FluidPreset {
    /// Build `(u, B)` for the MHD/HMHD systems.
    pub fn build(&self, grid: Grid) -> (VectorField, VectorField) {
        match *self {
            FluidPreset::AbcBeltrami { a, b, c } => {
                (VectorField::zeros(grid), abc_beltrami(grid, a, b, c))
            }
            FluidPreset::OrszagTang { amplitude } => orszag_tang(grid, amplitude),
            FluidPreset::RandomBand {
                seed,
                kmin,
                kmax,
                amplitude,
            } => (
                random_band_limited(grid, seed, kmin, kmax, amplitude),
                random_band_limited(grid, seed.wrapping_add(1), kmin, kmax, amplitude),
            ),
            FluidPreset::SpectralSlope {
                seed,
                slope,
                kmax,
                amplitude,
            } => (
                random_spectral_slope(grid, seed, slope, kmax, amplitude),
                random_spectral_slope(grid, seed.wrapping_add(1), slope, kmax, amplitude),
            ),
        }
    }

    pub fn from_name(name: &str, seed: u64, params: &[(String, f64)]) -> Result<Self> {
        let get = |key: &str, default: f64| -> f64 {
            params
                .iter()
                .find(|(k, _)| k == key)
                .map(|(_, v)| *v)
                .unwrap_or(default)
        };
        match name {
            "abc" | "beltrami" => Ok(FluidPreset::AbcBeltrami {
                a: get("a", 1.0),
                b: get("b", 1.0),
                c: get("c", 1.0),
            }),
            "orszag_tang" => Ok(FluidPreset::OrszagTang {
                amplitude: get("amplitude", 1.0),
            }),
            "random_band" => Ok(FluidPreset::RandomBand {
                seed,
                kmin: get("kmin", 1.0) as i64,
                kmax: get("kmax", 4.0) as i64,
                amplitude: get("amplitude", 1.0),
            }),
            "spectral_slope" => Ok(FluidPreset::SpectralSlope {
                seed,
                slope: get("slope", 2.0),
                kmax: get("kmax", 8.0) as i64,
                amplitude: get("amplitude", 1.0),
            }),
            other => Err(Error::Parameter(format!("unknown fluid preset '{other}'"))),
        }
    }
}
