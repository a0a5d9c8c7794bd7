//! Spectral calculus: exact Fourier-multiplier derivatives, the Leray
//! projection, the Biot-Savart potential and grid quadrature.
//!
//! First derivatives zero the Nyquist plane (the odd multiplier has no
//! real-signal representative there); even multipliers keep it. All
//! operators act mode-by-mode and commute with each other to roundoff.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::field::{ScalarField, VectorField};
use crate::grid::Grid;
use crate::spectral::{forward, forward_unchecked, inverse, SpectralField};

/// Frequency along one axis with the Nyquist plane suppressed for odd
/// (first-derivative) multipliers.
#[inline]
fn odd_frequency(grid: Grid, i: usize) -> f64 {
    let n = grid.n();
    if i == n / 2 {
        0.0
    } else {
        grid.frequency(i)
    }
}

fn derivative_spectrum(f: &SpectralField, axis: usize) -> SpectralField {
    let grid = f.grid();
    let n = grid.n();
    let mut out = f.clone();
    for i3 in 0..n {
        for i2 in 0..n {
            for i1 in 0..n {
                let idx = grid.idx(i1, i2, i3);
                let k = match axis {
                    0 => odd_frequency(grid, i1),
                    1 => odd_frequency(grid, i2),
                    _ => odd_frequency(grid, i3),
                };
                out.data_mut()[idx] = f.data()[idx] * Complex64::new(0.0, k);
            }
        }
    }
    out
}

/// Partial derivative of a scalar field along `axis` (0, 1 or 2).
pub fn partial(f: &ScalarField, axis: usize) -> ScalarField {
    let s = forward_unchecked(f);
    inverse(&derivative_spectrum(&s, axis))
}

pub fn gradient(f: &ScalarField) -> VectorField {
    let s = forward_unchecked(f);
    VectorField::from_components(
        inverse(&derivative_spectrum(&s, 0)),
        inverse(&derivative_spectrum(&s, 1)),
        inverse(&derivative_spectrum(&s, 2)),
    )
    .expect("components share a grid")
}

pub fn divergence(v: &VectorField) -> ScalarField {
    let grid = v.grid();
    let mut acc = SpectralField::zeros(grid);
    for axis in 0..3 {
        let s = forward_unchecked(v.comp(axis));
        let d = derivative_spectrum(&s, axis);
        for (a, b) in acc.data_mut().iter_mut().zip(d.data()) {
            *a += b;
        }
    }
    inverse(&acc)
}

pub fn curl(v: &VectorField) -> VectorField {
    let s = [
        forward_unchecked(v.comp(0)),
        forward_unchecked(v.comp(1)),
        forward_unchecked(v.comp(2)),
    ];
    let d = |i: usize, axis: usize| derivative_spectrum(&s[i], axis);
    let sub = |a: SpectralField, b: SpectralField| {
        let mut out = a;
        for (x, y) in out.data_mut().iter_mut().zip(b.data()) {
            *x -= y;
        }
        out
    };
    VectorField::from_components(
        inverse(&sub(d(2, 1), d(1, 2))),
        inverse(&sub(d(0, 2), d(2, 0))),
        inverse(&sub(d(1, 0), d(0, 1))),
    )
    .expect("components share a grid")
}

pub fn laplacian(f: &ScalarField) -> ScalarField {
    let mut s = forward_unchecked(f);
    s.apply_multiplier(|k1, k2, k3| Complex64::new(-(k1 * k1 + k2 * k2 + k3 * k3), 0.0));
    inverse(&s)
}

pub fn laplacian_vector(v: &VectorField) -> VectorField {
    VectorField::from_components(
        laplacian(v.comp(0)),
        laplacian(v.comp(1)),
        laplacian(v.comp(2)),
    )
    .expect("components share a grid")
}

/// Solve `lap(u) = f` with the zero mode of the answer set to zero.
/// The mean of `f` is discarded.
pub fn inverse_laplacian(f: &ScalarField) -> ScalarField {
    let mut s = forward_unchecked(f);
    s.apply_multiplier(|k1, k2, k3| {
        let ksq = k1 * k1 + k2 * k2 + k3 * k3;
        if ksq == 0.0 {
            Complex64::ZERO
        } else {
            Complex64::new(-1.0 / ksq, 0.0)
        }
    });
    inverse(&s)
}

/// L2-orthogonal projection onto divergence-free fields,
/// `I - k k^T / |k|^2` per mode; the mean (`k = 0`) passes through.
pub fn leray_project(v: &VectorField) -> VectorField {
    let grid = v.grid();
    let n = grid.n();
    let mut s = [
        forward_unchecked(v.comp(0)),
        forward_unchecked(v.comp(1)),
        forward_unchecked(v.comp(2)),
    ];
    for i3 in 0..n {
        for i2 in 0..n {
            for i1 in 0..n {
                let k = [
                    odd_frequency(grid, i1),
                    odd_frequency(grid, i2),
                    odd_frequency(grid, i3),
                ];
                let ksq = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
                if ksq == 0.0 {
                    continue;
                }
                let idx = grid.idx(i1, i2, i3);
                let kdotv = k[0] * s[0].data()[idx] + k[1] * s[1].data()[idx]
                    + k[2] * s[2].data()[idx];
                let coef = kdotv / ksq;
                for d in 0..3 {
                    s[d].data_mut()[idx] -= coef * k[d];
                }
            }
        }
    }
    VectorField::from_components(inverse(&s[0]), inverse(&s[1]), inverse(&s[2]))
        .expect("components share a grid")
}

/// Divergence-free, mean-zero vector potential `A` with `curl A = B`:
/// per mode `A = i kappa x B / |kappa|^2`. Requires `mean(B) = 0`
/// componentwise; the torus has no potential for a nonzero mean field.
pub fn biot_savart(b: &VectorField) -> Result<VectorField> {
    let grid = b.grid();
    let tol = 1e-10 * b.max_abs().max(1.0);
    for (d, m) in b.mean().iter().enumerate() {
        if m.abs() > tol {
            return Err(Error::Gauge {
                component: d,
                mean: *m,
            });
        }
    }
    let n = grid.n();
    let s = [
        forward(b.comp(0))?,
        forward(b.comp(1))?,
        forward(b.comp(2))?,
    ];
    let mut out = [
        SpectralField::zeros(grid),
        SpectralField::zeros(grid),
        SpectralField::zeros(grid),
    ];
    for i3 in 0..n {
        for i2 in 0..n {
            for i1 in 0..n {
                let k = [
                    odd_frequency(grid, i1),
                    odd_frequency(grid, i2),
                    odd_frequency(grid, i3),
                ];
                let ksq = k[0] * k[0] + k[1] * k[1] + k[2] * k[2];
                if ksq == 0.0 {
                    continue;
                }
                let idx = grid.idx(i1, i2, i3);
                let bv = [s[0].data()[idx], s[1].data()[idx], s[2].data()[idx]];
                let cross = [
                    k[1] * bv[2] - k[2] * bv[1],
                    k[2] * bv[0] - k[0] * bv[2],
                    k[0] * bv[1] - k[1] * bv[0],
                ];
                let i_over_ksq = Complex64::new(0.0, 1.0 / ksq);
                for d in 0..3 {
                    out[d].data_mut()[idx] = i_over_ksq * cross[d];
                }
            }
        }
    }
    Ok(
        VectorField::from_components(inverse(&out[0]), inverse(&out[1]), inverse(&out[2]))
            .expect("components share a grid"),
    )
}

/// Zero every mode of a physical field outside the two-thirds sphere.
pub fn dealias(v: &VectorField) -> VectorField {
    let apply = |c: &ScalarField| {
        let mut s = forward_unchecked(c);
        s.dealias();
        inverse(&s)
    };
    VectorField::from_components(apply(v.comp(0)), apply(v.comp(1)), apply(v.comp(2)))
        .expect("components share a grid")
}

/// Row-wise divergence of a tensor field: `(div T)_i = sum_j d_j T_ij`.
pub fn divergence_tensor(t: &crate::field::TensorField) -> VectorField {
    let mut out = VectorField::zeros(t.grid());
    for i in 0..3 {
        let mut acc = ScalarField::zeros(t.grid());
        for j in 0..3 {
            acc = acc.add(&partial(t.entry(i, j), j));
        }
        *out.comp_mut(i) = acc;
    }
    out
}

/// Exact heat semigroup `exp(t lap)`: each mode scaled by
/// `exp(-|kappa|^2 t)`. Used as the integrating factor of the stiff
/// diffusion inside the time steppers.
pub fn heat_semigroup(v: &VectorField, t: f64) -> VectorField {
    let apply = |c: &ScalarField| {
        let mut s = forward_unchecked(c);
        s.apply_multiplier(|k1, k2, k3| {
            Complex64::new((-(k1 * k1 + k2 * k2 + k3 * k3) * t).exp(), 0.0)
        });
        inverse(&s)
    };
    VectorField::from_components(apply(v.comp(0)), apply(v.comp(1)), apply(v.comp(2)))
        .expect("components share a grid")
}

/// Squared L2 norm of the full gradient of a vector field,
/// `sum_d sum_i |d_i v_d|_2^2`, evaluated by Parseval in mode space.
pub fn grad_l2_sq(v: &VectorField) -> f64 {
    let grid = v.grid();
    let n = grid.n();
    let n3 = grid.points() as f64;
    let scale = grid.len().powi(3) / (n3 * n3);
    let mut sum = 0.0;
    for d in 0..3 {
        let s = forward_unchecked(v.comp(d));
        for i3 in 0..n {
            let k3 = odd_frequency(grid, i3);
            for i2 in 0..n {
                let k2 = odd_frequency(grid, i2);
                for i1 in 0..n {
                    let k1 = odd_frequency(grid, i1);
                    let ksq = k1 * k1 + k2 * k2 + k3 * k3;
                    sum += ksq * s.data()[grid.idx(i1, i2, i3)].norm_sqr();
                }
            }
        }
    }
    sum * scale
}

/// Reductions over the box: plain integral, Lp norms and inner products.
pub struct Reduce;

impl Reduce {
    /// `h^3 * sum f`.
    pub fn integral(f: &ScalarField) -> f64 {
        f.data().iter().sum::<f64>() * f.grid().cell_volume()
    }

    /// `(h^3 * sum |f|^p)^(1/p)`; `p = inf` is the max norm. Errors on
    /// `p < 1`.
    pub fn lp_norm(f: &ScalarField, p: f64) -> Result<f64> {
        Self::lp_from_magnitudes(f.grid(), f.data().iter().map(|v| v.abs()), p)
    }

    /// Lp norm of the pointwise Euclidean magnitude of a vector field.
    pub fn lp_norm_vector(v: &VectorField, p: f64) -> Result<f64> {
        let mags = (0..v.grid().points()).map(|i| {
            let a = v.comp(0).data()[i];
            let b = v.comp(1).data()[i];
            let c = v.comp(2).data()[i];
            (a * a + b * b + c * c).sqrt()
        });
        Self::lp_from_magnitudes(v.grid(), mags, p)
    }

    fn lp_from_magnitudes(
        grid: Grid,
        mags: impl Iterator<Item = f64>,
        p: f64,
    ) -> Result<f64> {
        if p.is_infinite() && p > 0.0 {
            return Ok(mags.fold(0.0, f64::max));
        }
        if !(p >= 1.0) {
            return Err(Error::Parameter(format!("Lp norm needs p >= 1, got {p}")));
        }
        let sum: f64 = mags.map(|m| m.powf(p)).sum();
        Ok((sum * grid.cell_volume()).powf(1.0 / p))
    }

    /// `h^3 * sum f g`.
    pub fn inner_product(f: &ScalarField, g: &ScalarField) -> Result<f64> {
        f.grid().check_same(&g.grid())?;
        let sum: f64 = f.data().iter().zip(g.data()).map(|(a, b)| a * b).sum();
        Ok(sum * f.grid().cell_volume())
    }

    pub fn inner_product_vector(f: &VectorField, g: &VectorField) -> Result<f64> {
        f.grid().check_same(&g.grid())?;
        let mut sum = 0.0;
        for d in 0..3 {
            sum += f
                .comp(d)
                .data()
                .iter()
                .zip(g.comp(d).data())
                .map(|(a, b)| a * b)
                .sum::<f64>();
        }
        Ok(sum * f.grid().cell_volume())
    }

    /// Squared L2 norm, `h^3 * sum |f|^2`.
    pub fn l2_sq(f: &ScalarField) -> f64 {
        f.data().iter().map(|v| v * v).sum::<f64>() * f.grid().cell_volume()
    }

    pub fn l2_sq_vector(v: &VectorField) -> f64 {
        (0..3).map(|d| Self::l2_sq(v.comp(d))).sum()
    }
}
