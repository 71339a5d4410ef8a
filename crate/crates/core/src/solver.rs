//! The Galerkin coefficient ODE and its time integration.
//!
//! The semi-discrete system advances `(u, v)` with `v = u_t` and
//!
//! ```text
//! v_t = P^m div F_n^{-1}( eps(v + alpha u) ) + P^m f(t)
//! ```
//!
//! where the inversion runs pointwise on the collocation grid. rk4 is the
//! default integrator with a stiffness guard that subdivides steps when the
//! inverse-constitutive Jacobian steepens near saturation; implicit midpoint
//! is offered for stiff sweeps, preconditioned per mode by the linearised
//! elastic symbol.

use crate::constitutive::{
    small_strain_stiffness, ConstitutiveError, ConstitutiveParams, RadialProfile,
};
use crate::diagnostics::{self, DiagnosticsRecord};
use crate::mms::MmsForce;
use crate::spectral::{divergence_sym, sym_gradient, SpectralConfig, SpectralField};
use crate::tensors::SymTensorField;
use thiserror::Error;

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

#[derive(Debug, Error)]
pub enum StepError {
    #[error("non-finite state at t = {t}")]
    NonFinite { t: f64 },
    #[error("constitutive inversion failed: {0}")]
    Constitutive(#[from] ConstitutiveError),
    #[error("implicit midpoint failed to converge after {sweeps} sweeps; reduce dt")]
    MidpointStalled { sweeps: u32 },
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error("step at t = {t} failed after {attempts} dt halvings: {source}")]
    StepFailed {
        t: f64,
        attempts: u32,
        source: StepError,
    },
    #[error("dt must be positive and finite")]
    BadDt,
    #[error("T_final must be nonnegative")]
    BadTFinal,
    #[error("cadence {cadence} is not a multiple of dt {dt}")]
    CadenceMismatch { cadence: f64, dt: f64 },
    #[error("sink error: {0}")]
    Sink(#[from] std::io::Error),
    #[error(transparent)]
    Step(#[from] StepError),
}

/// Integrator selection; rk4 is the default.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TimeIntegrator {
    Rk4,
    Midpoint,
}

impl std::fmt::Display for TimeIntegrator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TimeIntegrator::Rk4 => write!(f, "rk4"),
            TimeIntegrator::Midpoint => write!(f, "midpoint"),
        }
    }
}

/// Coefficient vectors of `u` and `u_t` at time `t`, plus step metadata.
#[derive(Clone, Debug)]
pub struct SolverState {
    pub t: f64,
    pub step_index: u64,
    pub u: SpectralField,
    pub v: SpectralField,
    pub params: ConstitutiveParams,
}

impl SolverState {
    pub fn new(u: SpectralField, v: SpectralField, params: ConstitutiveParams) -> Self {
        assert!(u.config().same_space(v.config()), "u and v must share the space");
        SolverState { t: 0.0, step_index: 0, u, v, params }
    }

    pub fn config(&self) -> &SpectralConfig {
        self.u.config()
    }

    /// `w = v + alpha u`, the field whose symmetric gradient feeds the
    /// constitutive inversion.
    pub fn strain_rate_carrier(&self) -> SpectralField {
        let mut w = self.v.clone();
        w.axpy(self.params.alpha, &self.u);
        w
    }
}

/// Body force `f(t, x)`; zero-mean at every time by construction.
#[derive(Clone, Debug)]
pub enum ForceSpec {
    Zero,
    /// `amplitude * cos(omega t) * sin(2 pi k.x) e_component`.
    SingleMode {
        mode: [i64; 3],
        component: usize,
        amplitude: f64,
        omega: f64,
    },
    /// Manufactured-solution force, exact at arbitrary times.
    Manufactured(MmsForce),
    /// Coefficient tables interpolated linearly in `t`, clamped at the ends.
    Tabulated(ForceTable),
}

impl ForceSpec {
    pub fn is_zero(&self) -> bool {
        matches!(self, ForceSpec::Zero)
    }

    pub fn eval(&self, t: f64, config: &SpectralConfig) -> SpectralField {
        match self {
            ForceSpec::Zero => SpectralField::zeros(*config),
            ForceSpec::SingleMode { mode, component, amplitude, omega } => {
                let mut f = SpectralField::zeros(*config);
                // plain sine amplitude A against the sqrt2-normalized basis
                let b = amplitude / std::f64::consts::SQRT_2 * (omega * t).cos();
                f.set_mode(*component, *mode, 0.0, b);
                f
            }
            ForceSpec::Manufactured(m) => m.eval(t, config),
            ForceSpec::Tabulated(table) => table.eval(t, config),
        }
    }
}

/// Time-indexed table of coefficient fields.
#[derive(Clone, Debug)]
pub struct ForceTable {
    times: Vec<f64>,
    fields: Vec<SpectralField>,
}

impl ForceTable {
    pub fn new(times: Vec<f64>, fields: Vec<SpectralField>) -> Self {
        assert_eq!(times.len(), fields.len());
        assert!(!times.is_empty(), "empty force table");
        assert!(times.windows(2).all(|w| w[0] < w[1]), "times must increase");
        ForceTable { times, fields }
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn fields(&self) -> &[SpectralField] {
        &self.fields
    }

    fn eval(&self, t: f64, config: &SpectralConfig) -> SpectralField {
        let field = if t <= self.times[0] {
            self.fields[0].clone()
        } else if t >= *self.times.last().unwrap() {
            self.fields.last().unwrap().clone()
        } else {
            let hi = self.times.partition_point(|&s| s < t).max(1);
            let (t0, t1) = (self.times[hi - 1], self.times[hi]);
            let w = (t - t0) / (t1 - t0);
            let mut f = self.fields[hi - 1].scaled(1.0 - w);
            f.axpy(w, &self.fields[hi]);
            f
        };
        if field.config().same_space(config) {
            field
        } else {
            field.project_to(*config)
        }
    }
}

/// Stress and the radial norms it was built from, shared by the right-hand
/// side and the diagnostics.
pub struct ConstitutiveFields {
    pub stress: SymTensorField,
    /// `|eps(v + alpha u)|` per node.
    pub strain_rate_norm: Vec<f64>,
    /// `|T|` per node.
    pub stress_norm: Vec<f64>,
}

/// Pointwise `T = F_n^{-1}(eps(v + alpha u))` on the collocation grid.
pub fn constitutive_fields(state: &SolverState) -> Result<ConstitutiveFields, StepError> {
    let w = state.strain_rate_carrier();
    let eps = sym_gradient(&w);
    stress_from_strain(&eps, &state.params)
}

pub(crate) fn stress_from_strain(
    eps: &SymTensorField,
    params: &ConstitutiveParams,
) -> Result<ConstitutiveFields, StepError> {
    let profile = RadialProfile::regularised(params)?;
    let strain_rate_norm = eps.frobenius_plane();
    let mut stress = eps.clone();
    let mut stress_norm = vec![0.0; strain_rate_norm.len()];
    let dim = eps.dim();
    // scale each node's direction by s/y where f_n(s) = y
    let mut factors = vec![0.0; strain_rate_norm.len()];
    for (node, &y) in strain_rate_norm.iter().enumerate() {
        if !y.is_finite() {
            return Err(StepError::Constitutive(ConstitutiveError::NonFinite));
        }
        if y > 0.0 {
            let s = profile.invert(y)?;
            stress_norm[node] = s;
            factors[node] = s / y;
        }
    }
    for i in 0..dim {
        for j in i..dim {
            let plane = stress.plane_mut(i, j);
            for (value, &fac) in plane.iter_mut().zip(factors.iter()) {
                *value *= fac;
            }
        }
    }
    Ok(ConstitutiveFields { stress, strain_rate_norm, stress_norm })
}

/// One right-hand-side evaluation.
pub struct RhsEval {
    pub accel: SpectralField,
    /// Grid quadrature of `T : F_n(T)` at this state.
    pub dissipation: f64,
    /// `<f(t), v + alpha u>`, the forcing power at this state.
    pub forcing_power: f64,
    /// Max nodal `|eps(v + alpha u)|`.
    pub max_strain_rate: f64,
    /// Max nodal eigenvalue of `D(F_n^{-1})`, the stiffness the guard tracks.
    pub kappa_max: f64,
}

/// `P^m div F_n^{-1}(eps(v + alpha u)) + P^m f(t)`: the Galerkin projection
/// of `div T + f`, equivalent to the weak form by the adjointness of the
/// discrete divergence.
pub fn galerkin_rhs(state: &SolverState, force: &ForceSpec) -> Result<RhsEval, StepError> {
    let fields = constitutive_fields(state)?;
    rhs_from_fields(state, force, &fields)
}

fn rhs_from_fields(
    state: &SolverState,
    force: &ForceSpec,
    fields: &ConstitutiveFields,
) -> Result<RhsEval, StepError> {
    let config = state.config();
    let profile = RadialProfile::regularised(&state.params)?;
    let mut accel = divergence_sym(&fields.stress, config).expect("shape fixed by construction");
    let forcing_power = if force.is_zero() {
        0.0
    } else {
        let f = force.eval(state.t, config);
        let power = f.inner(&state.strain_rate_carrier());
        accel.axpy(1.0, &f);
        power
    };
    if !accel.is_finite() {
        return Err(StepError::NonFinite { t: state.t });
    }
    let mut dissipation = 0.0;
    for &s in &fields.stress_norm {
        dissipation += s * profile.value(s);
    }
    dissipation /= fields.stress_norm.len() as f64;
    let max_strain_rate = fields.strain_rate_norm.iter().cloned().fold(0.0, f64::max);
    let s_max = fields.stress_norm.iter().cloned().fold(0.0, f64::max);
    let kappa_max = 1.0 / profile.derivative(s_max);
    Ok(RhsEval { accel, dissipation, forcing_power, max_strain_rate, kappa_max })
}

/// Work quantities accumulated over one step with the integrator's own
/// stage quadrature, keeping the discrete energy identity at the method's
/// order.
#[derive(Clone, Copy, Debug, Default)]
pub struct StepWork {
    /// Integral of the dissipation `int T : F_n(T)`.
    pub dissipation: f64,
    /// Integral of `alpha ||v||_2^2`.
    pub damping: f64,
    /// Integral of `<f, v + alpha u>`.
    pub forcing: f64,
}

pub struct StepOutcome {
    pub state: SolverState,
    pub work: StepWork,
}

/// Advances the state by one step of the selected method.
pub fn step(
    state: &SolverState,
    dt: f64,
    force: &ForceSpec,
    method: TimeIntegrator,
) -> Result<StepOutcome, StepError> {
    assert!(dt > 0.0, "dt must be positive");
    match method {
        TimeIntegrator::Rk4 => rk4_step(state, dt, force),
        TimeIntegrator::Midpoint => midpoint_step(state, dt, force),
    }
}

fn stage_work(state: &SolverState, rhs: &RhsEval) -> (f64, f64, f64) {
    let vsq = state.v.l2_norm().powi(2);
    (rhs.dissipation, state.params.alpha * vsq, rhs.forcing_power)
}

fn advanced(state: &SolverState, dt: f64, du: &SpectralField, dv: &SpectralField) -> SolverState {
    let mut u = state.u.clone();
    u.axpy(dt, du);
    let mut v = state.v.clone();
    v.axpy(dt, dv);
    SolverState { t: state.t + dt, step_index: state.step_index, u, v, params: state.params }
}

fn rk4_step(state: &SolverState, dt: f64, force: &ForceSpec) -> Result<StepOutcome, StepError> {
    let k1 = galerkin_rhs(state, force)?;
    let (d1, g1, w1) = stage_work(state, &k1);

    let s2 = advanced(state, 0.5 * dt, &state.v, &k1.accel);
    let k2 = galerkin_rhs(&s2, force)?;
    let (d2, g2, w2) = stage_work(&s2, &k2);

    let s3 = advanced(state, 0.5 * dt, &s2.v, &k2.accel);
    let k3 = galerkin_rhs(&s3, force)?;
    let (d3, g3, w3) = stage_work(&s3, &k3);

    let s4 = advanced(state, dt, &s3.v, &k3.accel);
    let k4 = galerkin_rhs(&s4, force)?;
    let (d4, g4, w4) = stage_work(&s4, &k4);

    let mut u = state.u.clone();
    let mut v = state.v.clone();
    let sixth = dt / 6.0;
    u.axpy(sixth, &state.v);
    u.axpy(2.0 * sixth, &s2.v);
    u.axpy(2.0 * sixth, &s3.v);
    u.axpy(sixth, &s4.v);
    v.axpy(sixth, &k1.accel);
    v.axpy(2.0 * sixth, &k2.accel);
    v.axpy(2.0 * sixth, &k3.accel);
    v.axpy(sixth, &k4.accel);
    if !u.is_finite() || !v.is_finite() {
        return Err(StepError::NonFinite { t: state.t + dt });
    }
    let simpson = |a: f64, b: f64, c: f64, d: f64| dt / 6.0 * (a + 2.0 * b + 2.0 * c + d);
    let work = StepWork {
        dissipation: simpson(d1, d2, d3, d4),
        damping: simpson(g1, g2, g3, g4),
        forcing: simpson(w1, w2, w3, w4),
    };
    let next = SolverState {
        t: state.t + dt,
        step_index: state.step_index + 1,
        u,
        v,
        params: state.params,
    };
    Ok(StepOutcome { state: next, work })
}

/// Per-mode symbol of the linearised elastic operator
/// `w -> kappa_n div eps(w)`: `-kappa_n (2 pi)^2 (|k|^2 I + k k^t) / 2`.
struct ModeSymbol {
    kappa: f64,
}

impl ModeSymbol {
    fn matrix(&self, k: &[i64; 3], dim: usize) -> [[f64; 3]; 3] {
        let mut mat = [[0.0; 3]; 3];
        let ksq: f64 = k.iter().map(|&v| (v * v) as f64).sum();
        let fac = -self.kappa * TWO_PI * TWO_PI * 0.5;
        for i in 0..dim {
            for j in 0..dim {
                let kron = if i == j { ksq } else { 0.0 };
                mat[i][j] = fac * (kron + (k[i] * k[j]) as f64);
            }
        }
        mat
    }
}

fn solve_small(mat: &[[f64; 3]; 3], rhs: &mut [f64], dim: usize) {
    // Gauss elimination with partial pivoting on <= 3x3
    let mut a = *mat;
    let mut perm = [0usize, 1, 2];
    for col in 0..dim {
        let mut piv = col;
        for row in col + 1..dim {
            if a[perm[row]][col].abs() > a[perm[piv]][col].abs() {
                piv = row;
            }
        }
        perm.swap(col, piv);
        let p = a[perm[col]][col];
        for row in col + 1..dim {
            let fac = a[perm[row]][col] / p;
            for j in col..dim {
                a[perm[row]][j] -= fac * a[perm[col]][j];
            }
            rhs[perm[row]] -= fac * rhs[perm[col]];
        }
    }
    let mut out = [0.0; 3];
    for col in (0..dim).rev() {
        let mut acc = rhs[perm[col]];
        for j in col + 1..dim {
            acc -= a[perm[col]][j] * out[j];
        }
        out[col] = acc / a[perm[col]][col];
    }
    rhs[..dim].copy_from_slice(&out[..dim]);
}

/// Applies `field -> L field` for the per-mode symbol.
fn apply_symbol(field: &SpectralField, kappa: f64) -> SpectralField {
    let config = *field.config();
    let dim = config.dim();
    let sym = ModeSymbol { kappa };
    let modes = config.canonical_modes();
    let mut out = SpectralField::zeros(config);
    for (pos, k) in modes.iter().enumerate() {
        let mat = sym.matrix(k, dim);
        for part in 0..2 {
            let mut vin = [0.0; 3];
            for c in 0..dim {
                vin[c] = field.component_coeffs(c)[2 * pos + part];
            }
            for i in 0..dim {
                let mut acc = 0.0;
                for j in 0..dim {
                    acc += mat[i][j] * vin[j];
                }
                out.component_coeffs_mut(i)[2 * pos + part] = acc;
            }
        }
    }
    out
}

/// Solves `(I - c L) x = b` mode by mode.
fn solve_shifted_symbol(b: &SpectralField, kappa: f64, c: f64) -> SpectralField {
    let config = *b.config();
    let dim = config.dim();
    let sym = ModeSymbol { kappa };
    let modes = config.canonical_modes();
    let mut out = b.clone();
    for (pos, k) in modes.iter().enumerate() {
        let lmat = sym.matrix(k, dim);
        let mut mat = [[0.0; 3]; 3];
        for i in 0..dim {
            for j in 0..dim {
                let kron = if i == j { 1.0 } else { 0.0 };
                mat[i][j] = kron - c * lmat[i][j];
            }
        }
        for part in 0..2 {
            let mut rhs = [0.0; 3];
            for ci in 0..dim {
                rhs[ci] = b.component_coeffs(ci)[2 * pos + part];
            }
            solve_small(&mat, &mut rhs, dim);
            for ci in 0..dim {
                out.component_coeffs_mut(ci)[2 * pos + part] = rhs[ci];
            }
        }
    }
    out
}

const MIDPOINT_MAX_SWEEPS: u32 = 50;
const MIDPOINT_TOL: f64 = 1e-12;

fn midpoint_step(state: &SolverState, dt: f64, force: &ForceSpec) -> Result<StepOutcome, StepError> {
    let kappa = small_strain_stiffness(&state.params);
    let alpha = state.params.alpha;
    let c = 0.5 * dt * (1.0 + 0.5 * alpha * dt);

    // b_u = u + dt/2 v ; b_v = v + dt/2 L(alpha u + v)
    let mut b_u = state.u.clone();
    b_u.axpy(0.5 * dt, &state.v);
    let mut w0 = state.v.clone();
    w0.axpy(alpha, &state.u);
    let mut b_v_base = state.v.clone();
    b_v_base.axpy(0.5 * dt, &apply_symbol(&w0, kappa));

    let mut u_next = state.u.clone();
    let mut v_next = state.v.clone();
    let scale = 1.0 + state.u.l2_norm() + state.v.l2_norm();
    let mut converged = false;
    let mut mid = state.clone();
    for _sweep in 0..MIDPOINT_MAX_SWEEPS {
        // midpoint state of the current iterate
        mid.t = state.t + 0.5 * dt;
        mid.u = state.u.add(&u_next).scaled(0.5);
        mid.v = state.v.add(&v_next).scaled(0.5);
        let rhs_mid = galerkin_rhs(&mid, force)?;
        // nonlinear remainder R = N(w_mid) + f - L w_mid
        let w_mid = mid.strain_rate_carrier();
        let mut remainder = rhs_mid.accel.clone();
        remainder.axpy(-1.0, &apply_symbol(&w_mid, kappa));

        let mut rhs_v = b_v_base.clone();
        rhs_v.axpy(dt, &remainder);
        rhs_v.axpy(0.5 * alpha * dt, &apply_symbol(&b_u, kappa));
        let v_new = solve_shifted_symbol(&rhs_v, kappa, c);
        let mut u_new = b_u.clone();
        u_new.axpy(0.5 * dt, &v_new);

        let delta = u_new.sub(&u_next).l2_norm() + v_new.sub(&v_next).l2_norm();
        u_next = u_new;
        v_next = v_new;
        if delta <= MIDPOINT_TOL * scale {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(StepError::MidpointStalled { sweeps: MIDPOINT_MAX_SWEEPS });
    }
    if !u_next.is_finite() || !v_next.is_finite() {
        return Err(StepError::NonFinite { t: state.t + dt });
    }
    // midpoint-rule work increments, consistent at the method's order
    mid.u = state.u.add(&u_next).scaled(0.5);
    mid.v = state.v.add(&v_next).scaled(0.5);
    mid.t = state.t + 0.5 * dt;
    let rhs_mid = galerkin_rhs(&mid, force)?;
    let (d, g, w) = stage_work(&mid, &rhs_mid);
    let work = StepWork { dissipation: dt * d, damping: dt * g, forcing: dt * w };
    let next = SolverState {
        t: state.t + dt,
        step_index: state.step_index + 1,
        u: u_next,
        v: v_next,
        params: state.params,
    };
    Ok(StepOutcome { state: next, work })
}

/// Verified initial data: projected through `P^m`, with the measured
/// `C_* = ||eps(v0 + alpha u0)||_inf` and any admissibility rescale applied.
#[derive(Clone, Debug)]
pub struct InitialData {
    pub u0: SpectralField,
    pub v0: SpectralField,
    pub c_star: f64,
    /// `Some(factor)` when the fields were rescaled to restore `C_* < 1`.
    pub rescale_factor: Option<f64>,
}

/// Projects the requested fields through `P^m` and measures the
/// admissibility constant on the oversampled grid; rescales both fields by
/// `0.95 / C_*` when the measured value reaches 1.
pub fn prepare_initial_data(
    u0: &SpectralField,
    v0: &SpectralField,
    params: &ConstitutiveParams,
    config: &SpectralConfig,
) -> InitialData {
    let mut u = u0.project_to(*config);
    let mut v = v0.project_to(*config);
    let measure = |u: &SpectralField, v: &SpectralField| {
        let mut w = v.clone();
        w.axpy(params.alpha, u);
        sym_gradient(&w).max_frobenius()
    };
    let mut c_star = measure(&u, &v);
    let mut rescale_factor = None;
    if c_star >= 1.0 {
        let factor = 0.95 / c_star;
        u.scale_in_place(factor);
        v.scale_in_place(factor);
        rescale_factor = Some(factor);
        c_star = measure(&u, &v);
    }
    InitialData { u0: u, v0: v, c_star, rescale_factor }
}

/// Run-level options; `dt` must divide `cadence`.
#[derive(Clone, Copy, Debug)]
pub struct RunOptions {
    pub t_final: f64,
    pub dt: f64,
    pub method: TimeIntegrator,
    /// Time between diagnostics rows.
    pub cadence: f64,
    /// Checkpoint every this many nominal steps; 0 disables.
    pub checkpoint_every: u64,
}

/// Receives diagnostics rows and checkpoint states during a run.
pub trait RunSink {
    fn on_record(&mut self, record: &DiagnosticsRecord) -> std::io::Result<()>;
    fn on_checkpoint(&mut self, _state: &SolverState) -> std::io::Result<()> {
        Ok(())
    }
    /// Called with the state at every cadence point, just before the
    /// matching record; lets sweep drivers snapshot derived fields.
    fn on_cadence_state(&mut self, _state: &SolverState) -> std::io::Result<()> {
        Ok(())
    }
}

/// Sink that only accumulates records in memory.
#[derive(Default)]
pub struct MemorySink {
    pub records: Vec<DiagnosticsRecord>,
}

impl RunSink for MemorySink {
    fn on_record(&mut self, record: &DiagnosticsRecord) -> std::io::Result<()> {
        self.records.push(record.clone());
        Ok(())
    }
}

pub struct RunResult {
    pub final_state: SolverState,
    pub records: Vec<DiagnosticsRecord>,
    /// Nominal steps taken (guard substeps not counted).
    pub steps: u64,
    /// Largest guard subdivision used by any nominal step.
    pub max_subdivision: u32,
}

/// Stiffness guard: largest admissible rk4 step for the current state,
/// `0.5 / (kappa_max (2 pi m)^2)`.
///
/// The profile derivative decreases, so the largest nodal eigenvalue of
/// `D(F_n^{-1})` sits at the largest strain-rate norm; one scalar inversion
/// suffices.
pub fn guard_dt_limit(state: &SolverState) -> Result<f64, StepError> {
    let w = state.strain_rate_carrier();
    let y_max = sym_gradient(&w).max_frobenius();
    if !y_max.is_finite() {
        return Err(StepError::NonFinite { t: state.t });
    }
    let profile = RadialProfile::regularised(&state.params)?;
    let s_max = profile.invert(y_max)?;
    let kappa_max = 1.0 / profile.derivative(s_max);
    let m = state.config().degree() as f64;
    Ok(0.5 / (kappa_max * (TWO_PI * m) * (TWO_PI * m)))
}

const MAX_HALVINGS: u32 = 10;

/// Steps from `t = 0` to `T_final`, emitting a diagnostics row at `t = 0`
/// and every cadence, checkpointing on the configured interval, and halving
/// `dt` locally (up to 10 times) when a step fails.
pub fn run(
    initial: &InitialData,
    params: &ConstitutiveParams,
    force: &ForceSpec,
    opts: &RunOptions,
    sink: &mut dyn RunSink,
) -> Result<RunResult, RunError> {
    if !(opts.dt > 0.0) || !opts.dt.is_finite() {
        return Err(RunError::BadDt);
    }
    if opts.t_final < 0.0 {
        return Err(RunError::BadTFinal);
    }
    let cadence_steps = (opts.cadence / opts.dt).round();
    if cadence_steps < 1.0 || (opts.cadence - cadence_steps * opts.dt).abs() > 1e-9 * opts.cadence {
        return Err(RunError::CadenceMismatch { cadence: opts.cadence, dt: opts.dt });
    }
    let cadence_steps = cadence_steps as u64;

    let mut state = SolverState::new(initial.u0.clone(), initial.v0.clone(), *params);
    let mut accum = diagnostics::RunAccumulators::new();
    // runs land on the nominal step lattice; T_final is rounded to it
    let effective_steps = (opts.t_final / opts.dt).round() as u64;

    sink.on_cadence_state(&state)?;
    let record = diagnostics::collect(&state, force, &mut accum).map_err(RunError::Step)?;
    sink.on_record(&record)?;
    let mut records = vec![record];
    let mut max_subdivision = 1u32;

    for step_idx in 0..effective_steps {
        let guard = guard_dt_limit(&state).map_err(RunError::Step)?;
        let base_sub = (opts.dt / guard).ceil().max(1.0) as u32;
        let mut attempt = 0u32;
        loop {
            let n_sub = base_sub.saturating_mul(1 << attempt);
            let sub_dt = opts.dt / f64::from(n_sub);
            match advance_substeps(&state, sub_dt, n_sub, force, opts.method) {
                Ok((mut new_state, work)) => {
                    // keep t on the nominal lattice bit-for-bit
                    new_state.t = (step_idx + 1) as f64 * opts.dt;
                    new_state.step_index = step_idx + 1;
                    accum.absorb(&work);
                    state = new_state;
                    max_subdivision = max_subdivision.max(n_sub);
                    break;
                }
                Err(err) => {
                    attempt += 1;
                    if attempt > MAX_HALVINGS {
                        return Err(RunError::StepFailed { t: state.t, attempts: attempt - 1, source: err });
                    }
                }
            }
        }
        if (step_idx + 1) % cadence_steps == 0 || step_idx + 1 == effective_steps {
            sink.on_cadence_state(&state)?;
            let record = diagnostics::collect(&state, force, &mut accum).map_err(RunError::Step)?;
            sink.on_record(&record)?;
            records.push(record);
        }
        if opts.checkpoint_every > 0 && (step_idx + 1) % opts.checkpoint_every == 0 {
            sink.on_checkpoint(&state)?;
        }
    }

    Ok(RunResult { final_state: state, records, steps: effective_steps, max_subdivision })
}

fn advance_substeps(
    state: &SolverState,
    sub_dt: f64,
    n_sub: u32,
    force: &ForceSpec,
    method: TimeIntegrator,
) -> Result<(SolverState, StepWork), StepError> {
    let mut current = state.clone();
    let mut work = StepWork::default();
    for i in 0..n_sub {
        current.t = state.t + f64::from(i) * sub_dt;
        let outcome = step(&current, sub_dt, force, method)?;
        current = outcome.state;
        work.dissipation += outcome.work.dissipation;
        work.damping += outcome.work.damping;
        work.forcing += outcome.work.forcing;
    }
    Ok((current, work))
}
