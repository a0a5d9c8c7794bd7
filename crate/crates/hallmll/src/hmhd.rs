//! Incompressible MHD and Hall-MHD solver in conservative form, with unit
//! viscosity and resistivity:
//!
//! `du/dt + div(u (x) u - B (x) B) + grad p_m = lap u`, `div u = 0`,
//! `dB/dt - curl(u x B) + curl((curl B) x B) = lap B`, `div B = 0`,
//!
//! where the Hall term `curl((curl B) x B)` is present only for the
//! Hall-MHD variant and `p_m = p + |B|^2 / 2` is the magnetic pressure.
//! The momentum equation is stepped in Leray-projected form (the
//! projection absorbs `grad p_m`); the pressure is recovered on demand
//! from its elliptic equation.
//!
//! The mollified regularization replaces the transported/wedged factors
//! by their smoothed versions: transport by `u_eps`, Lorentz force
//! `(curl B) x B_eps`, and `B_eps` inside both wedge terms of the
//! induction equation.

use crate::calculus::{
    curl, divergence, divergence_tensor, heat_semigroup, inverse_laplacian, laplacian_vector,
    leray_project, Reduce,
};
use crate::error::{Error, Result};
use crate::field::{ScalarField, TensorField, VectorField};
use crate::grid::Grid;
use crate::mollify::{smooth_vector, MollifierKernel};
use crate::series::{cumulative_trapezoid, BalanceSeries};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MhdVariant {
    Mhd,
    Hmhd,
}

#[derive(Clone, Debug)]
pub struct MhdState {
    pub t: f64,
    pub u: VectorField,
    pub b: VectorField,
    pub variant: MhdVariant,
    /// Mollification width of the regularized scheme, if any. The kernel
    /// itself travels in [`StepOptions`].
    pub reg_eps: Option<f64>,
}

impl MhdState {
    /// Assemble a state; both fields are Leray-projected so the
    /// divergence constraints hold at machine precision.
    pub fn new(
        t: f64,
        u: VectorField,
        b: VectorField,
        variant: MhdVariant,
        reg_eps: Option<f64>,
    ) -> Result<Self> {
        u.grid().check_same(&b.grid())?;
        u.check_finite("velocity")?;
        b.check_finite("induction")?;
        Ok(Self {
            t,
            u: leray_project(&u),
            b: leray_project(&b),
            variant,
            reg_eps,
        })
    }

    pub fn grid(&self) -> Grid {
        self.u.grid()
    }

    pub fn div_max(&self) -> f64 {
        divergence(&self.u)
            .max_abs()
            .max(divergence(&self.b).max_abs())
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.u.is_finite() && self.b.is_finite()) {
            return Err(Error::BlowUp { t: self.t });
        }
        let d = self.div_max();
        if d > 1e-8 {
            return Err(Error::Usage(format!(
                "divergence constraint violated: max|div| = {d:e}"
            )));
        }
        Ok(())
    }
}

/// Magnetic and kinematic pressure from the elliptic equation
/// `lap p_m = -div div(u (x) u - B (x) B)`; both returned with zero mean.
pub fn pressure_solve(u: &VectorField, b: &VectorField) -> Result<(ScalarField, ScalarField)> {
    u.grid().check_same(&b.grid())?;
    let stress = TensorField::outer(u, u).sub(&TensorField::outer(b, b));
    let source = divergence(&divergence_tensor(&stress)).scale(-1.0);
    let p_m = inverse_laplacian(&source);
    let b_sq_half = b.magnitude_sq().scale(0.5);
    let p_raw = p_m.sub(&b_sq_half);
    let mean = p_raw.mean();
    let p = p_raw.map(|v| v - mean);
    Ok((p_m, p))
}

#[derive(Clone, Debug)]
pub struct MhdDerivative {
    pub du: VectorField,
    pub db: VectorField,
}

fn maybe_dealias(v: VectorField, dealias: bool) -> VectorField {
    if dealias {
        crate::calculus::dealias(&v)
    } else {
        v
    }
}

/// Unregularized right-hand side in projection form:
/// `du = P[-div(u(x)u - B(x)B)] + lap u`,
/// `db = curl(u x B) - [hmhd] curl((curl B) x B) + lap B`.
pub fn rhs(state: &MhdState, dealias: bool) -> MhdDerivative {
    let u = &state.u;
    let b = &state.b;
    let stress = TensorField::outer(u, u).sub(&TensorField::outer(b, b));
    let momentum_flux = maybe_dealias(divergence_tensor(&stress), dealias);
    let du = leray_project(&momentum_flux.scale(-1.0)).add(&laplacian_vector(u));

    let advect = maybe_dealias(u.cross(b), dealias);
    let mut db = curl(&advect);
    if state.variant == MhdVariant::Hmhd {
        let hall = maybe_dealias(curl(b).cross(b), dealias);
        db = db.sub(&curl(&hall));
    }
    let db = db.add(&laplacian_vector(b));
    MhdDerivative { du, db }
}

/// Right-hand side in explicit pressure form,
/// `du = -div(u(x)u - B(x)B) - grad p_m + lap u`; agrees with the
/// projection form to roundoff and exists to check exactly that.
pub fn rhs_pressure_form(state: &MhdState) -> Result<MhdDerivative> {
    let u = &state.u;
    let b = &state.b;
    let stress = TensorField::outer(u, u).sub(&TensorField::outer(b, b));
    let (p_m, _) = pressure_solve(u, b)?;
    let du = divergence_tensor(&stress)
        .scale(-1.0)
        .sub(&crate::calculus::gradient(&p_m))
        .add(&laplacian_vector(u));
    let db = rhs(state, false).db;
    Ok(MhdDerivative { du, db })
}

/// Mollified scheme: transport by `u_eps`, Lorentz term
/// `(curl B) x B_eps`, induction wedges against `B_eps`.
pub fn rhs_regularized(
    state: &MhdState,
    kernel: &MollifierKernel,
    dealias: bool,
) -> Result<MhdDerivative> {
    state.grid().check_same(&kernel.grid())?;
    let u = &state.u;
    let b = &state.b;
    let u_eps = smooth_vector(u, kernel)?;
    let b_eps = smooth_vector(b, kernel)?;

    // (u_eps . grad) u = div(u (x) u_eps) since div u_eps = 0
    let transport = maybe_dealias(divergence_tensor(&TensorField::outer(u, &u_eps)), dealias);
    let lorentz = maybe_dealias(curl(b).cross(&b_eps), dealias);
    let du = leray_project(&lorentz.sub(&transport)).add(&laplacian_vector(u));

    let advect = maybe_dealias(u.cross(&b_eps), dealias);
    let mut db = curl(&advect);
    if state.variant == MhdVariant::Hmhd {
        let hall = maybe_dealias(curl(b).cross(&b_eps), dealias);
        db = db.sub(&curl(&hall));
    }
    let db = db.add(&laplacian_vector(b));
    Ok(MhdDerivative { du, db })
}

/// Stability heuristic:
/// `dt <= min(0.2 h^2 / max(1, max|B|), 0.25 h / max(1, max|u| + max|B|))`,
/// reflecting the quasilinear second-order Hall term and the advective
/// scales.
pub fn stability_bound(state: &MhdState) -> f64 {
    let h = state.grid().spacing();
    let bmax = state.b.max_abs();
    let umax = state.u.max_abs();
    (0.2 * h * h / bmax.max(1.0)).min(0.25 * h / (umax + bmax).max(1.0))
}

#[derive(Clone, Debug, Default)]
pub struct StepOptions {
    /// Kernel of the mollified scheme; `None` steps the plain equations.
    pub kernel: Option<MollifierKernel>,
    pub allow_large_dt: bool,
    /// Two-thirds truncation of quadratic products (on by default
    /// through [`StepOptions::default`] via `RunOptions`; negative
    /// controls switch it off).
    pub no_dealias: bool,
}

impl StepOptions {
    fn dealias(&self) -> bool {
        !self.no_dealias
    }

    fn derivative(&self, state: &MhdState) -> Result<MhdDerivative> {
        match &self.kernel {
            Some(k) => rhs_regularized(state, k, self.dealias()),
            None => Ok(rhs(state, self.dealias())),
        }
    }
}

/// One integrating-factor RK4 step with the exact diffusion factor
/// `exp(-|kappa|^2 dt)` on both fields.
pub fn step(state: &MhdState, dt: f64, opts: &StepOptions) -> Result<MhdState> {
    let bound = stability_bound(state);
    if dt > bound && !opts.allow_large_dt {
        return Err(Error::TimeStep { dt, bound });
    }

    let nonlinear = |s: &MhdState| -> Result<(VectorField, VectorField)> {
        let d = opts.derivative(s)?;
        Ok((
            d.du.sub(&laplacian_vector(&s.u)),
            d.db.sub(&laplacian_vector(&s.b)),
        ))
    };
    let mk = |t: f64, u: VectorField, b: VectorField| MhdState {
        t,
        u,
        b,
        variant: state.variant,
        reg_eps: state.reg_eps,
    };

    let half = dt / 2.0;
    let (k1u, k1b) = nonlinear(state)?;
    let s2 = mk(
        state.t + half,
        heat_semigroup(&state.u.add_scaled(half, &k1u), half),
        heat_semigroup(&state.b.add_scaled(half, &k1b), half),
    );
    let (k2u, k2b) = nonlinear(&s2)?;
    let u_half = heat_semigroup(&state.u, half);
    let b_half = heat_semigroup(&state.b, half);
    let s3 = mk(
        state.t + half,
        u_half.add_scaled(half, &k2u),
        b_half.add_scaled(half, &k2b),
    );
    let (k3u, k3b) = nonlinear(&s3)?;
    let u_full = heat_semigroup(&state.u, dt);
    let b_full = heat_semigroup(&state.b, dt);
    let s4 = mk(
        state.t + dt,
        u_full.add_scaled(dt, &heat_semigroup(&k3u, half)),
        b_full.add_scaled(dt, &heat_semigroup(&k3b, half)),
    );
    let (k4u, k4b) = nonlinear(&s4)?;

    let combine = |full: &VectorField,
                   k1: &VectorField,
                   k2: &VectorField,
                   k3: &VectorField,
                   k4: &VectorField|
     -> VectorField {
        full.add_scaled(dt / 6.0, &heat_semigroup(k1, dt))
            .add_scaled(dt / 3.0, &heat_semigroup(k2, half))
            .add_scaled(dt / 3.0, &heat_semigroup(k3, half))
            .add_scaled(dt / 6.0, k4)
    };
    let u_next = combine(&u_full, &k1u, &k2u, &k3u, &k4u);
    let b_next = combine(&b_full, &k1b, &k2b, &k3b, &k4b);
    let out = mk(state.t + dt, u_next, b_next);
    if !(out.u.is_finite() && out.b.is_finite()) {
        return Err(Error::BlowUp { t: out.t });
    }
    Ok(out)
}

/// One stored sample with the solver's field derivatives at that time.
#[derive(Clone, Debug)]
pub struct MhdSample {
    pub state: MhdState,
    pub du: VectorField,
    pub db: VectorField,
}

#[derive(Clone, Debug)]
pub struct MhdTrajectory {
    pub samples: Vec<MhdSample>,
}

impl MhdTrajectory {
    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.state.t).collect()
    }

    pub fn variant(&self) -> MhdVariant {
        self.samples[0].state.variant
    }
}

pub fn run(
    initial: MhdState,
    dt: f64,
    steps: usize,
    sample_every: usize,
    opts: &StepOptions,
) -> Result<MhdTrajectory> {
    let sample_every = sample_every.max(1);
    let mut samples = Vec::new();
    let mut state = initial;
    let d0 = opts.derivative(&state)?;
    samples.push(MhdSample {
        du: d0.du,
        db: d0.db,
        state: state.clone(),
    });
    for i in 1..=steps {
        state = step(&state, dt, opts)?;
        if i % sample_every == 0 || i == steps {
            let d = opts.derivative(&state)?;
            samples.push(MhdSample {
                du: d.du,
                db: d.db,
                state: state.clone(),
            });
        }
    }
    Ok(MhdTrajectory { samples })
}

/// Energy balance `E(t) + int D = E(0)` with
/// `E = (|u|_2^2 + |B|_2^2) / 2` and `D = |curl u|_2^2 + |curl B|_2^2`.
pub fn energy_report(traj: &MhdTrajectory) -> Result<BalanceSeries> {
    if traj.samples.len() < 2 {
        return Err(Error::InsufficientData(
            "energy report needs at least 2 samples".into(),
        ));
    }
    let times = traj.times();
    let mut value = Vec::new();
    let mut diss = Vec::new();
    for s in &traj.samples {
        value.push(0.5 * (Reduce::l2_sq_vector(&s.state.u) + Reduce::l2_sq_vector(&s.state.b)));
        diss.push(
            Reduce::l2_sq_vector(&curl(&s.state.u)) + Reduce::l2_sq_vector(&curl(&s.state.b)),
        );
    }
    let label = match traj.variant() {
        MhdVariant::Mhd => "mhd-energy",
        MhdVariant::Hmhd => "hmhd-energy",
    };
    BalanceSeries::from_rates(label, times, value, diss)
}

/// Helicity budgets. The vector potential always uses the gauge
/// `div A = 0`, `mean A = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HelicityKind {
    /// `int A . B`, dissipated by `2 int B . curl B` (MHD and Hall-MHD).
    Magneto,
    /// `int u . omega`, `omega = curl u`.
    Fluid,
    /// `int u . B`; a balance law for plain MHD only.
    Crossed,
    /// `int (u + A) . (omega + B)`; Hall-MHD only.
    Total,
}

impl HelicityKind {
    pub fn label(self) -> &'static str {
        match self {
            HelicityKind::Magneto => "magneto-helicity",
            HelicityKind::Fluid => "fluid-helicity",
            HelicityKind::Crossed => "crossed-helicity",
            HelicityKind::Total => "total-helicity",
        }
    }

    pub fn check_variant(self, variant: MhdVariant) -> Result<()> {
        match (self, variant) {
            (HelicityKind::Crossed, MhdVariant::Hmhd) => Err(Error::Usage(
                "crossed fluid-magneto helicity is a balance law for plain MHD only".into(),
            )),
            (HelicityKind::Total, MhdVariant::Mhd) => Err(Error::Usage(
                "total fluid-magneto helicity is a balance law for Hall-MHD only".into(),
            )),
            _ => Ok(()),
        }
    }
}

pub fn helicity_report(traj: &MhdTrajectory, kind: HelicityKind) -> Result<BalanceSeries> {
    if traj.samples.len() < 2 {
        return Err(Error::InsufficientData(
            "helicity report needs at least 2 samples".into(),
        ));
    }
    kind.check_variant(traj.variant())?;
    let times = traj.times();
    let mut value = Vec::new();
    let mut diss = Vec::new();
    for s in &traj.samples {
        let u = &s.state.u;
        let b = &s.state.b;
        match kind {
            HelicityKind::Magneto => {
                let a = crate::calculus::biot_savart(b)?;
                value.push(Reduce::inner_product_vector(&a, b)?);
                diss.push(2.0 * Reduce::inner_product_vector(b, &curl(b))?);
            }
            HelicityKind::Fluid => {
                let omega = curl(u);
                value.push(Reduce::inner_product_vector(u, &omega)?);
                let drag = curl(&omega).add(&b.cross(&curl(b)));
                diss.push(2.0 * Reduce::inner_product_vector(&omega, &drag)?);
            }
            HelicityKind::Crossed => {
                value.push(Reduce::inner_product_vector(u, b)?);
                diss.push(2.0 * Reduce::inner_product_vector(&curl(u), &curl(b))?);
            }
            HelicityKind::Total => {
                let a = crate::calculus::biot_savart(b)?;
                let w = u.add(&a);
                let cw = curl(u).add(b);
                value.push(Reduce::inner_product_vector(&w, &cw)?);
                diss.push(2.0 * Reduce::inner_product_vector(&cw, &curl(&cw))?);
            }
        }
    }
    BalanceSeries::from_rates(kind.label(), times, value, diss)
}

fn check_comparable(a: &MhdTrajectory, b: &MhdTrajectory) -> Result<()> {
    if a.samples.is_empty() || b.samples.is_empty() {
        return Err(Error::InsufficientData("empty trajectory".into()));
    }
    a.samples[0]
        .state
        .grid()
        .check_same(&b.samples[0].state.grid())
        .map_err(|e| Error::Comparison(e.to_string()))?;
    if a.samples.len() != b.samples.len() {
        return Err(Error::Comparison(format!(
            "sample counts differ: {} vs {}",
            a.samples.len(),
            b.samples.len()
        )));
    }
    for (x, y) in a.samples.iter().zip(&b.samples) {
        if (x.state.t - y.state.t).abs() > 1e-12 {
            return Err(Error::Comparison(format!(
                "sample times differ: {} vs {}",
                x.state.t, y.state.t
            )));
        }
    }
    Ok(())
}

/// Two-run gap functional
/// `J(T) = (|du|_2^2 + |dB|_2^2)/2 + int_0^T (|curl du|_2^2 + |curl dB|_2^2)`
/// for the differences `du = u_a - u_b`, `dB = B_a - B_b`. Initial data
/// must agree to 1e-12 in max norm.
pub fn weak_strong_gap(a: &MhdTrajectory, b: &MhdTrajectory) -> Result<Vec<(f64, f64)>> {
    check_comparable(a, b)?;
    let a0 = &a.samples[0].state;
    let b0 = &b.samples[0].state;
    let init_gap = a0.u.sub(&b0.u).max_abs().max(a0.b.sub(&b0.b).max_abs());
    if init_gap > 1e-12 {
        return Err(Error::Comparison(format!(
            "initial data differ by {init_gap:e} in max norm"
        )));
    }
    gap_series(a, b)
}

/// The same functional without the identical-initial-data requirement
/// (perturbation studies measure `J` of a deliberately shifted run).
pub fn gap_series(a: &MhdTrajectory, b: &MhdTrajectory) -> Result<Vec<(f64, f64)>> {
    check_comparable(a, b)?;
    let times = a.times();
    let mut instantaneous = Vec::new();
    let mut rate = Vec::new();
    for (x, y) in a.samples.iter().zip(&b.samples) {
        let du = x.state.u.sub(&y.state.u);
        let db = x.state.b.sub(&y.state.b);
        instantaneous.push(0.5 * (Reduce::l2_sq_vector(&du) + Reduce::l2_sq_vector(&db)));
        rate.push(Reduce::l2_sq_vector(&curl(&du)) + Reduce::l2_sq_vector(&curl(&db)));
    }
    let cum = cumulative_trapezoid(&times, &rate);
    Ok(times
        .iter()
        .zip(instantaneous.iter().zip(&cum))
        .map(|(&t, (i, c))| (t, i + c))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::init;
    use crate::mollify::{make_mollifier, MollifierKind};

    fn grid() -> Grid {
        Grid::unit(16).unwrap()
    }

    fn beltrami_state(variant: MhdVariant) -> MhdState {
        let g = grid();
        MhdState::new(
            0.0,
            VectorField::zeros(g),
            init::abc_beltrami(g, 1.0, 1.0, 1.0),
            variant,
            None,
        )
        .unwrap()
    }

    fn random_state(n: usize, variant: MhdVariant) -> MhdState {
        let g = Grid::unit(n).unwrap();
        MhdState::new(
            0.0,
            init::random_band_limited(g, 31, 1, 3, 0.5),
            init::random_band_limited(g, 32, 1, 3, 0.5),
            variant,
            None,
        )
        .unwrap()
    }

    #[test]
    fn zero_state_is_steady() {
        let g = grid();
        let s = MhdState::new(
            0.0,
            VectorField::zeros(g),
            VectorField::zeros(g),
            MhdVariant::Hmhd,
            None,
        )
        .unwrap();
        let d = rhs(&s, true);
        assert!(d.du.max_abs() == 0.0 && d.db.max_abs() == 0.0);
        let next = step(&s, 1e-3, &StepOptions::default()).unwrap();
        assert!(next.u.max_abs() == 0.0 && next.b.max_abs() == 0.0);
    }

    #[test]
    fn beltrami_eigenrelation() {
        // u = 0, curl B = B: the Hall term vanishes and dB/dt = lap B = -B.
        let s = beltrami_state(MhdVariant::Hmhd);
        let d = rhs(&s, true);
        assert!(d.du.max_abs() <= 1e-10);
        assert!(d.db.add(&s.b).max_abs() <= 1e-10);
    }

    #[test]
    fn hall_term_vanishes_for_force_free_fields() {
        let s_mhd = beltrami_state(MhdVariant::Mhd);
        let s_hall = beltrami_state(MhdVariant::Hmhd);
        let d1 = rhs(&s_mhd, true);
        let d2 = rhs(&s_hall, true);
        assert!(d1.db.sub(&d2.db).max_abs() <= 1e-11);
    }

    #[test]
    fn pressure_solve_examples() {
        let g = grid();
        let zero = VectorField::zeros(g);
        let (pm, p) = pressure_solve(&zero, &zero).unwrap();
        assert!(pm.max_abs() == 0.0 && p.max_abs() == 0.0);

        // u = (sin x2, 0, 0): div div (u (x) u) = d1 d1 (sin^2 x2) = 0
        let u = VectorField::from_fn(g, |_, y, _| [y.sin(), 0.0, 0.0]);
        let (pm, _) = pressure_solve(&u, &zero).unwrap();
        assert!(pm.max_abs() <= 1e-12);
    }

    #[test]
    fn pressure_residual_small_on_random_data() {
        let s = random_state(16, MhdVariant::Hmhd);
        let (pm, p) = pressure_solve(&s.u, &s.b).unwrap();
        let stress = TensorField::outer(&s.u, &s.u).sub(&TensorField::outer(&s.b, &s.b));
        let source = divergence(&divergence_tensor(&stress));
        let residual = crate::calculus::laplacian(&pm).add(&source);
        let scale = (Reduce::l2_sq_vector(&s.u) + Reduce::l2_sq_vector(&s.b))
            / s.grid().len().powi(2);
        assert!(Reduce::l2_sq(&residual).sqrt() <= 1e-10 * scale.max(1e-12));
        assert!(p.mean().abs() <= 1e-13);
    }

    #[test]
    fn projection_and_pressure_forms_agree() {
        let s = random_state(16, MhdVariant::Hmhd);
        let a = rhs(&s, false);
        let b = rhs_pressure_form(&s).unwrap();
        let scale = a.du.max_abs().max(1.0);
        assert!(a.du.sub(&b.du).max_abs() <= 1e-11 * scale);
    }

    #[test]
    fn hall_term_two_forms_agree() {
        // curl((curl B) x B) = curl div(B (x) B) once the gradient part is
        // discarded by curl.
        let g = grid();
        let b = init::random_band_limited(g, 41, 1, 4, 1.0);
        let form1 = curl(&curl(&b).cross(&b));
        let form2 = curl(&divergence_tensor(&TensorField::outer(&b, &b)));
        assert!(form1.sub(&form2).max_abs() <= 1e-10 * form1.max_abs().max(1.0));
    }

    #[test]
    fn integral_curl_pairing_vanishes() {
        // int (-v . curl w + w . curl v) = 0 on the torus
        let g = grid();
        let v = init::random_band_limited(g, 51, 1, 4, 1.0);
        let w = init::random_band_limited(g, 52, 1, 4, 1.0);
        let lhs = -Reduce::inner_product_vector(&v, &curl(&w)).unwrap()
            + Reduce::inner_product_vector(&w, &curl(&v)).unwrap();
        assert!(lhs.abs() <= 1e-10);
    }

    #[test]
    fn beltrami_decays_exactly() {
        let s = beltrami_state(MhdVariant::Hmhd);
        let dt = 0.8 * stability_bound(&s);
        let steps = 40;
        let traj = run(s.clone(), dt, steps, steps, &StepOptions::default()).unwrap();
        let t_end = traj.samples.last().unwrap().state.t;
        let expect = s.b.scale((-t_end).exp());
        let got = &traj.samples.last().unwrap().state.b;
        let rel = got.sub(&expect).max_abs() / s.b.max_abs();
        assert!(rel <= 1e-9, "relative error {rel:e}");
    }

    #[test]
    fn taylor_green_energy_decays() {
        let g = grid();
        let u = VectorField::from_fn(g, |x, y, z| {
            [
                x.sin() * y.cos() * z.cos(),
                -x.cos() * y.sin() * z.cos(),
                0.0,
            ]
        });
        let s = MhdState::new(0.0, u, VectorField::zeros(g), MhdVariant::Mhd, None).unwrap();
        let dt = 0.8 * stability_bound(&s);
        let traj = run(s, dt, 20, 2, &StepOptions::default()).unwrap();
        let report = energy_report(&traj).unwrap();
        for w in report.value.windows(2) {
            assert!(w[1] < w[0]);
        }
    }

    #[test]
    fn step_self_convergence_order() {
        let s = random_state(16, MhdVariant::Hmhd);
        let dt = 0.25 * stability_bound(&s);
        let opts = StepOptions::default();
        let advance = |dt: f64, steps: usize| -> MhdState {
            let mut x = s.clone();
            for _ in 0..steps {
                x = step(&x, dt, &opts).unwrap();
            }
            x
        };
        let c = advance(dt, 4);
        let f = advance(dt / 2.0, 8);
        let ff = advance(dt / 4.0, 16);
        let e1 = c.u.sub(&ff.u).max_abs() + c.b.sub(&ff.b).max_abs();
        let e2 = f.u.sub(&ff.u).max_abs() + f.b.sub(&ff.b).max_abs();
        let order = (e1 / e2).log2();
        assert!(order >= 2.0, "observed order {order}");
    }

    #[test]
    fn divergence_stays_clean_over_run() {
        let s = random_state(16, MhdVariant::Hmhd);
        let dt = 0.8 * stability_bound(&s);
        let traj = run(s, dt, 10, 5, &StepOptions::default()).unwrap();
        for smp in &traj.samples {
            assert!(smp.state.div_max() <= 1e-8);
        }
    }

    #[test]
    fn beltrami_energy_balance_closed_form() {
        let s = beltrami_state(MhdVariant::Hmhd);
        let e0 = 0.5 * Reduce::l2_sq_vector(&s.b);
        let dt = 0.5 * stability_bound(&s);
        let traj = run(s, dt, 60, 6, &StepOptions::default()).unwrap();
        let report = energy_report(&traj).unwrap();
        let t_end = *report.times.last().unwrap();
        let expect_e = e0 * (-2.0 * t_end).exp();
        assert!((report.value.last().unwrap() - expect_e).abs() <= 1e-6 * e0);
        assert!(report.final_residual().abs() <= 1e-6 * e0);
    }

    #[test]
    fn magneto_helicity_of_beltrami() {
        let s = beltrami_state(MhdVariant::Hmhd);
        let dt = 0.5 * stability_bound(&s);
        let traj = run(s.clone(), dt, 40, 8, &StepOptions::default()).unwrap();
        let report = helicity_report(&traj, HelicityKind::Magneto).unwrap();
        // A = B for this field: H_m(0) = |B|_2^2, decaying like exp(-2t)
        let h0 = Reduce::l2_sq_vector(&s.b);
        assert!((report.value[0] - h0).abs() <= 1e-9 * h0);
        assert!(report.final_residual().abs() <= 1e-6 * h0);
        // fluid helicity of a u = 0 run vanishes identically
        let fluid = helicity_report(&traj, HelicityKind::Fluid).unwrap();
        assert!(fluid.value.iter().all(|v| v.abs() <= 1e-12));
        assert!(fluid.dissipation.iter().all(|v| v.abs() <= 1e-12));
    }

    #[test]
    fn mirror_symmetric_field_has_no_magneto_helicity() {
        let g = grid();
        let b = VectorField::from_fn(g, |x, _, _| [0.0, 0.0, x.sin()]);
        let s = MhdState::new(0.0, VectorField::zeros(g), b, MhdVariant::Mhd, None).unwrap();
        let d = rhs(&s, true);
        let traj = MhdTrajectory {
            samples: vec![
                MhdSample {
                    state: s.clone(),
                    du: d.du.clone(),
                    db: d.db.clone(),
                },
                MhdSample {
                    state: MhdState { t: 1e-3, ..s.clone() },
                    du: d.du,
                    db: d.db,
                },
            ],
        };
        let report = helicity_report(&traj, HelicityKind::Magneto).unwrap();
        assert!(report.value[0].abs() <= 1e-12);
    }

    #[test]
    fn crossed_helicity_guards_variant() {
        let s = beltrami_state(MhdVariant::Hmhd);
        let dt = 0.5 * stability_bound(&s);
        let traj = run(s, dt, 2, 1, &StepOptions::default()).unwrap();
        assert!(matches!(
            helicity_report(&traj, HelicityKind::Crossed),
            Err(Error::Usage(_))
        ));
        assert!(helicity_report(&traj, HelicityKind::Total).is_ok());
    }

    #[test]
    fn regularized_rhs_degenerate_cases() {
        let g = grid();
        let k = make_mollifier(g, 4.0 * g.spacing(), MollifierKind::Bump).unwrap();
        let zero = MhdState::new(
            0.0,
            VectorField::zeros(g),
            VectorField::zeros(g),
            MhdVariant::Hmhd,
            Some(k.eps()),
        )
        .unwrap();
        let d = rhs_regularized(&zero, &k, true).unwrap();
        assert!(d.du.max_abs() == 0.0 && d.db.max_abs() == 0.0);

        let constb = MhdState::new(
            0.0,
            VectorField::zeros(g),
            VectorField::constant(g, [0.0, 0.0, 1.0]),
            MhdVariant::Hmhd,
            Some(k.eps()),
        )
        .unwrap();
        let d = rhs_regularized(&constb, &k, true).unwrap();
        assert!(d.db.max_abs() <= 1e-12);
    }

    #[test]
    fn regularized_rhs_approaches_plain_rhs() {
        let s = random_state(16, MhdVariant::Hmhd);
        let g = s.grid();
        let plain = rhs(&s, true);
        let mut prev = f64::INFINITY;
        for eps_h in [12.0, 6.0, 3.0] {
            let k = make_mollifier(g, eps_h * g.spacing(), MollifierKind::Bump).unwrap();
            let reg = rhs_regularized(&s, &k, true).unwrap();
            let diff = (Reduce::l2_sq_vector(&reg.du.sub(&plain.du))
                + Reduce::l2_sq_vector(&reg.db.sub(&plain.db)))
            .sqrt();
            assert!(diff < prev, "difference not monotone: {diff} vs {prev}");
            prev = diff;
        }
    }

    #[test]
    fn gap_functional_behaviour() {
        let s = random_state(16, MhdVariant::Hmhd);
        let dt = 0.5 * stability_bound(&s);
        let t1 = run(s.clone(), dt, 4, 2, &StepOptions::default()).unwrap();
        let t2 = run(s.clone(), dt, 4, 2, &StepOptions::default()).unwrap();
        let gap = weak_strong_gap(&t1, &t2).unwrap();
        assert!(gap.iter().all(|(_, v)| *v == 0.0));

        // perturbed initial data: J(0) = |dB0|_2^2 / 2
        let g = s.grid();
        let delta = init::random_band_limited(g, 99, 1, 2, 1e-3);
        let s2 = MhdState::new(0.0, s.u.clone(), s.b.add(&delta), MhdVariant::Hmhd, None).unwrap();
        let t3 = run(s2.clone(), dt, 4, 2, &StepOptions::default()).unwrap();
        let gap = gap_series(&t1, &t3).unwrap();
        let expect = 0.5 * Reduce::l2_sq_vector(&s.b.sub(&s2.b));
        assert!((gap[0].1 - expect).abs() <= 1e-12);
        assert!(matches!(
            weak_strong_gap(&t1, &t3),
            Err(Error::Comparison(_))
        ));
    }
}
