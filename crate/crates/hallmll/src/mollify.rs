//! Mollification on the torus: compactly supported smoothing kernels, the
//! associated quadratic commutators, and the remainder decomposition that
//! splits a wedge commutator into a kernel-quadrature term and an
//! increment product.
//!
//! Smoothing is evaluated spectrally with the DFT of the sampled kernel,
//! so `smooth` coincides with the discrete circular convolution
//! `sum_y w(y) u(x - y)` to machine precision and the algebraic identities
//! among commutators close exactly on the grid.

use crate::calculus::Reduce;
use crate::error::{Error, Result};
use crate::field::{ScalarField, TensorField, VectorField};
use crate::grid::Grid;
use crate::spectral::{forward_unchecked, inverse, SpectralField};

/// Kernel profile choices. Both are nonnegative, radial and unit-mass
/// after discrete renormalization; `Bump` is supported in a ball of
/// radius `eps`, the truncated `Gaussian` (std `eps`) in radius `4 eps`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MollifierKind {
    Bump,
    Gaussian,
}

impl MollifierKind {
    pub fn support_radius(self, eps: f64) -> f64 {
        match self {
            MollifierKind::Bump => eps,
            MollifierKind::Gaussian => 4.0 * eps,
        }
    }

    fn profile(self, r_over_eps: f64) -> f64 {
        match self {
            MollifierKind::Bump => {
                let s = r_over_eps * r_over_eps;
                if s < 1.0 {
                    (-1.0 / (1.0 - s)).exp()
                } else {
                    0.0
                }
            }
            MollifierKind::Gaussian => {
                if r_over_eps < 4.0 {
                    (-0.5 * r_over_eps * r_over_eps).exp()
                } else {
                    0.0
                }
            }
        }
    }
}

/// A sampled, renormalized smoothing kernel together with its spectrum.
#[derive(Clone, Debug)]
pub struct MollifierKernel {
    eps: f64,
    kind: MollifierKind,
    /// Kernel density `psi` with `h^3 * sum(psi) = 1`.
    samples: ScalarField,
    /// DFT of the quadrature weights `w = h^3 psi`; `spectrum[0] = 1`.
    spectrum: SpectralField,
    /// Grid offsets inside the support, with their weights.
    support: Vec<([i64; 3], f64)>,
}

impl MollifierKernel {
    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn kind(&self) -> MollifierKind {
        self.kind
    }

    pub fn grid(&self) -> Grid {
        self.samples.grid()
    }

    pub fn samples(&self) -> &ScalarField {
        &self.samples
    }

    /// Transfer factor applied to each Fourier mode by `smooth`.
    pub fn spectrum(&self) -> &SpectralField {
        &self.spectrum
    }

    pub fn support_radius(&self) -> f64 {
        self.kind.support_radius(self.eps)
    }

    /// Discrete mass `h^3 * sum(psi)`.
    pub fn mass(&self) -> f64 {
        Reduce::integral(&self.samples)
    }
}

/// Build a kernel of width `eps` on `grid`. The width must satisfy
/// `3h <= eps` and the kernel support must fit in half the box, which
/// caps `eps` at `L/2` for the bump and `L/8` for the truncated Gaussian.
pub fn make_mollifier(grid: Grid, eps: f64, kind: MollifierKind) -> Result<MollifierKernel> {
    let h = grid.spacing();
    let min = 3.0 * h;
    let max = match kind {
        MollifierKind::Bump => grid.len() / 2.0,
        MollifierKind::Gaussian => grid.len() / 8.0,
    };
    if !(eps >= min && eps <= max) {
        return Err(Error::Resolution { eps, min, max });
    }

    let n = grid.n();
    let len = grid.len();
    let min_image = |i: usize| -> f64 {
        let x = grid.coord(i);
        x.min(len - x)
    };
    let mut raw = ScalarField::zeros(grid);
    for i3 in 0..n {
        let d3 = min_image(i3);
        for i2 in 0..n {
            let d2 = min_image(i2);
            for i1 in 0..n {
                let d1 = min_image(i1);
                let r = (d1 * d1 + d2 * d2 + d3 * d3).sqrt();
                raw.data_mut()[grid.idx(i1, i2, i3)] = kind.profile(r / eps);
            }
        }
    }
    let total: f64 = raw.data().iter().sum();
    if total <= 0.0 {
        return Err(Error::Resolution { eps, min, max });
    }

    // w sums to one; psi = w / h^3 carries unit discrete mass.
    let weights = raw.map(|v| v / total);
    let samples = weights.map(|v| v / grid.cell_volume());
    let spectrum = forward_unchecked(&weights);

    let mut support = Vec::new();
    let half = n as i64 / 2;
    for i3 in 0..n {
        for i2 in 0..n {
            for i1 in 0..n {
                let w = weights.data()[grid.idx(i1, i2, i3)];
                if w > 0.0 {
                    // signed offsets in (-n/2, n/2]
                    let signed = |i: usize| -> i64 {
                        let i = i as i64;
                        if i > half {
                            i - n as i64
                        } else {
                            i
                        }
                    };
                    support.push(([signed(i1), signed(i2), signed(i3)], w));
                }
            }
        }
    }

    Ok(MollifierKernel {
        eps,
        kind,
        samples,
        spectrum,
        support,
    })
}

fn smooth_spectrum(f: &ScalarField, kernel: &MollifierKernel) -> SpectralField {
    let mut s = forward_unchecked(f);
    for (c, k) in s.data_mut().iter_mut().zip(kernel.spectrum.data()) {
        *c *= k;
    }
    s
}

/// `u -> psi_eps * u`, evaluated as a spectral product.
pub fn smooth(f: &ScalarField, kernel: &MollifierKernel) -> Result<ScalarField> {
    f.grid().check_same(&kernel.grid())?;
    Ok(inverse(&smooth_spectrum(f, kernel)))
}

pub fn smooth_vector(v: &VectorField, kernel: &MollifierKernel) -> Result<VectorField> {
    v.grid().check_same(&kernel.grid())?;
    VectorField::from_components(
        smooth(v.comp(0), kernel)?,
        smooth(v.comp(1), kernel)?,
        smooth(v.comp(2), kernel)?,
    )
}

pub fn smooth_tensor(t: &TensorField, kernel: &MollifierKernel) -> Result<TensorField> {
    t.grid().check_same(&kernel.grid())?;
    let mut out = TensorField::zeros(t.grid());
    for i in 0..3 {
        for j in 0..3 {
            *out.entry_mut(i, j) = smooth(t.entry(i, j), kernel)?;
        }
    }
    Ok(out)
}

/// Which bilinear product a commutator acts through.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CommutatorKind {
    /// Scalar output: `(f . g)_eps - f_eps . g_eps`.
    Dot,
    /// Vector output: `(f x g)_eps - f_eps x g_eps`.
    Wedge,
    /// 3x3 output: `(f (x) g)_eps - f_eps (x) g_eps`.
    Tensor,
}

/// Commutator output, arity depending on the kind.
#[derive(Clone, Debug)]
pub enum CommutatorField {
    Scalar(ScalarField),
    Vector(VectorField),
    Tensor(TensorField),
}

/// Dot-product commutator.
pub fn commutator_dot(
    f: &VectorField,
    g: &VectorField,
    kernel: &MollifierKernel,
) -> Result<ScalarField> {
    f.grid().check_same(&g.grid())?;
    f.grid().check_same(&kernel.grid())?;
    let prod = f.dot(g);
    let fs = smooth_vector(f, kernel)?;
    let gs = smooth_vector(g, kernel)?;
    Ok(smooth(&prod, kernel)?.sub(&fs.dot(&gs)))
}

/// Wedge-product commutator.
pub fn commutator_wedge(
    f: &VectorField,
    g: &VectorField,
    kernel: &MollifierKernel,
) -> Result<VectorField> {
    f.grid().check_same(&g.grid())?;
    f.grid().check_same(&kernel.grid())?;
    let prod = f.cross(g);
    let fs = smooth_vector(f, kernel)?;
    let gs = smooth_vector(g, kernel)?;
    Ok(smooth_vector(&prod, kernel)?.sub(&fs.cross(&gs)))
}

/// Tensor-product commutator.
pub fn commutator_tensor(
    f: &VectorField,
    g: &VectorField,
    kernel: &MollifierKernel,
) -> Result<TensorField> {
    f.grid().check_same(&g.grid())?;
    f.grid().check_same(&kernel.grid())?;
    let prod = TensorField::outer(f, g);
    let fs = smooth_vector(f, kernel)?;
    let gs = smooth_vector(g, kernel)?;
    Ok(smooth_tensor(&prod, kernel)?.sub(&TensorField::outer(&fs, &gs)))
}

pub fn commutator(
    f: &VectorField,
    g: &VectorField,
    kind: CommutatorKind,
    kernel: &MollifierKernel,
) -> Result<CommutatorField> {
    Ok(match kind {
        CommutatorKind::Dot => CommutatorField::Scalar(commutator_dot(f, g, kernel)?),
        CommutatorKind::Wedge => CommutatorField::Vector(commutator_wedge(f, g, kernel)?),
        CommutatorKind::Tensor => CommutatorField::Tensor(commutator_tensor(f, g, kernel)?),
    })
}

impl CommutatorField {
    pub fn max_abs(&self) -> f64 {
        match self {
            CommutatorField::Scalar(s) => s.max_abs(),
            CommutatorField::Vector(v) => v.max_abs(),
            CommutatorField::Tensor(t) => t.max_abs(),
        }
    }
}

fn pairwise(
    f: &VectorField,
    g: &VectorField,
    kind: CommutatorKind,
) -> CommutatorField {
    match kind {
        CommutatorKind::Dot => CommutatorField::Scalar(f.dot(g)),
        CommutatorKind::Wedge => CommutatorField::Vector(f.cross(g)),
        CommutatorKind::Tensor => CommutatorField::Tensor(TensorField::outer(f, g)),
    }
}

fn accumulate(acc: &mut CommutatorField, w: f64, term: &CommutatorField) {
    match (acc, term) {
        (CommutatorField::Scalar(a), CommutatorField::Scalar(t)) => {
            for (x, y) in a.data_mut().iter_mut().zip(t.data()) {
                *x += w * y;
            }
        }
        (CommutatorField::Vector(a), CommutatorField::Vector(t)) => {
            for d in 0..3 {
                for (x, y) in a.comp_mut(d).data_mut().iter_mut().zip(t.comp(d).data()) {
                    *x += w * y;
                }
            }
        }
        (CommutatorField::Tensor(a), CommutatorField::Tensor(t)) => {
            for i in 0..3 {
                for j in 0..3 {
                    for (x, y) in a
                        .entry_mut(i, j)
                        .data_mut()
                        .iter_mut()
                        .zip(t.entry(i, j).data())
                    {
                        *x += w * y;
                    }
                }
            }
        }
        _ => unreachable!("kind mismatch"),
    }
}

fn zero_like(grid: Grid, kind: CommutatorKind) -> CommutatorField {
    match kind {
        CommutatorKind::Dot => CommutatorField::Scalar(ScalarField::zeros(grid)),
        CommutatorKind::Wedge => CommutatorField::Vector(VectorField::zeros(grid)),
        CommutatorKind::Tensor => CommutatorField::Tensor(TensorField::zeros(grid)),
    }
}

fn sub_fields(a: &CommutatorField, b: &CommutatorField) -> CommutatorField {
    match (a, b) {
        (CommutatorField::Scalar(x), CommutatorField::Scalar(y)) => {
            CommutatorField::Scalar(x.sub(y))
        }
        (CommutatorField::Vector(x), CommutatorField::Vector(y)) => {
            CommutatorField::Vector(x.sub(y))
        }
        (CommutatorField::Tensor(x), CommutatorField::Tensor(y)) => {
            CommutatorField::Tensor(x.sub(y))
        }
        _ => unreachable!("kind mismatch"),
    }
}

/// Split a commutator into the kernel-quadrature remainder
/// `r_eps(x) = sum_y w(y) (f(x-y) - f(x)) o (g(x-y) - g(x))`
/// and the increment tail `(f - f_eps) o (g - g_eps)`, so that
/// `commutator = r_eps - tail` exactly on the grid.
pub fn cet_split(
    f: &VectorField,
    g: &VectorField,
    kind: CommutatorKind,
    kernel: &MollifierKernel,
) -> Result<(CommutatorField, CommutatorField)> {
    f.grid().check_same(&g.grid())?;
    f.grid().check_same(&kernel.grid())?;
    let radius = kernel.support_radius();
    let half_box = kernel.grid().len() / 2.0;
    if radius > half_box {
        return Err(Error::Wraparound { radius, half_box });
    }

    let grid = f.grid();
    let mut r_eps = zero_like(grid, kind);
    for ([s1, s2, s3], w) in &kernel.support {
        let df = f.shift(*s1, *s2, *s3).sub(f);
        let dg = g.shift(*s1, *s2, *s3).sub(g);
        let term = pairwise(&df, &dg, kind);
        accumulate(&mut r_eps, *w, &term);
    }

    let fs = smooth_vector(f, kernel)?;
    let gs = smooth_vector(g, kernel)?;
    let tail = pairwise(&f.sub(&fs), &g.sub(&gs), kind);
    Ok((r_eps, tail))
}

/// Difference `commutator - (r_eps - tail)`, useful as an identity check.
pub fn cet_split_residual(
    f: &VectorField,
    g: &VectorField,
    kind: CommutatorKind,
    kernel: &MollifierKernel,
) -> Result<f64> {
    let (r_eps, tail) = cet_split(f, g, kind, kernel)?;
    let com = commutator(f, g, kind, kernel)?;
    let diff = sub_fields(&com, &sub_fields(&r_eps, &tail));
    Ok(diff.max_abs())
}
