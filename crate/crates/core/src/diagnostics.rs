//! Every monitored quantity the energy estimates control.
//!
//! A record is one time-stamped row: energies, cumulative dissipation,
//! strain extrema, the stress integrability norms and the gradient
//! dissipation. Integrals over the box use the equispaced-grid mean, which
//! is spectrally accurate for smooth periodic integrands; cumulative time
//! integrals use the integrator's own stage quadrature (dissipation) or the
//! trapezoid rule on the cadence lattice (gradient dissipation).

use crate::constitutive::{stored_energy_radial, ConstitutiveParams, RadialProfile};
use crate::solver::{self, ForceSpec, SolverState, StepError, StepWork};
use crate::spectral::{divergence_sym, grid_mean, scalar_from_grid, scalar_to_grid, sym_gradient, differentiate_pairs};
use crate::tensors::SymTensorField;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum DiagnosticsError {
    #[error("diagnostics table is empty")]
    EmptyTable,
    #[error("lebesgue exponent must satisfy r >= 1 (got {0})")]
    BadExponent(f64),
}

/// One row of monitored quantities.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagnosticsRecord {
    pub t: f64,
    /// `||u_t||_2^2 / 2`, from coefficient-space Parseval.
    pub kinetic: f64,
    /// `int f_alpha^*(eps(u))`; `+inf` when any node saturates.
    pub stored: f64,
    pub total: f64,
    /// Running `int_0^t int T : F_n(T)`, stage-quadrature accumulated.
    pub dissip_cum: f64,
    /// Max grid `|eps(u)|`.
    pub max_strain: f64,
    /// Max grid `|eps(u_t + alpha u)|`.
    pub strain_rate_max: f64,
    /// `||T||_{L^1(Omega)}`.
    pub t_l1: f64,
    /// `int |T|^{1-a} [,|T| >= 1,]`, the sup-controlled marginal norm.
    pub t_l1me: f64,
    /// `||T||_{L^{1+delta}(Omega)}` with `delta = 2a/3` when the exponent
    /// arithmetic applies (`d = 3`, `a < 2/7`), else the plain `L^1` norm.
    pub t_l1pd: f64,
    /// Running `int_0^t int |grad T|^2 / (1 + |T|)^{1+a}`, trapezoid on the
    /// cadence lattice.
    pub grad_diss_cum: f64,
    /// `||u_tt||_2`.
    pub accel_l2: f64,
}

impl DiagnosticsRecord {
    pub const CSV_HEADER: &'static str =
        "t,kinetic,stored,total,dissip_cum,max_strain,strain_rate_max,T_L1,T_L1me,T_L1pd,grad_diss_cum,accel_L2";

    /// Locale-independent row with 17-significant-digit floats, enough for
    /// exact f64 round-trips.
    pub fn csv_row(&self) -> String {
        let fields = [
            self.t,
            self.kinetic,
            self.stored,
            self.total,
            self.dissip_cum,
            self.max_strain,
            self.strain_rate_max,
            self.t_l1,
            self.t_l1me,
            self.t_l1pd,
            self.grad_diss_cum,
            self.accel_l2,
        ];
        let mut out = String::new();
        for (i, v) in fields.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push_str(&format_g17(*v));
        }
        out
    }

    pub fn parse_csv_row(line: &str) -> Option<Self> {
        let mut it = line.split(',').map(|s| s.trim().parse::<f64>());
        let mut next = || it.next()?.ok();
        Some(DiagnosticsRecord {
            t: next()?,
            kinetic: next()?,
            stored: next()?,
            total: next()?,
            dissip_cum: next()?,
            max_strain: next()?,
            strain_rate_max: next()?,
            t_l1: next()?,
            t_l1me: next()?,
            t_l1pd: next()?,
            grad_diss_cum: next()?,
            accel_l2: next()?,
        })
    }
}

/// 17 significant digits: always round-trips a finite f64 exactly.
pub fn format_g17(v: f64) -> String {
    format!("{:.16e}", v)
}

/// Cross-step accumulators owned by the run loop.
pub struct RunAccumulators {
    dissip_cum: f64,
    grad_diss_cum: f64,
    prev_grad: Option<(f64, f64)>,
    /// Damping and forcing integrals, kept for the energy-balance ledger.
    pub damping_cum: f64,
    pub forcing_cum: f64,
}

impl RunAccumulators {
    #[allow(clippy::new_without_default)]
    pub fn new() -> Self {
        RunAccumulators {
            dissip_cum: 0.0,
            grad_diss_cum: 0.0,
            prev_grad: None,
            damping_cum: 0.0,
            forcing_cum: 0.0,
        }
    }

    pub fn absorb(&mut self, work: &StepWork) {
        self.dissip_cum += work.dissipation;
        self.damping_cum += work.damping;
        self.forcing_cum += work.forcing;
    }
}

/// `(kinetic, stored, total)` of a state.
pub fn energy(state: &SolverState) -> (f64, f64, f64) {
    let kinetic = 0.5 * state.v.l2_norm().powi(2);
    let eps_u = sym_gradient(&state.u);
    let stored = stored_energy(&eps_u, &state.params);
    (kinetic, stored, kinetic + stored)
}

fn stored_energy(eps_u: &SymTensorField, params: &ConstitutiveParams) -> f64 {
    let norms = eps_u.frobenius_plane();
    let mut acc = 0.0;
    for &y in &norms {
        acc += stored_energy_radial(y, params);
    }
    acc / norms.len() as f64
}

/// Grid quadrature of `T : F_n(T) = |T| f_n(|T|) >= 0`.
pub fn dissipation_increment(stress: &SymTensorField, params: &ConstitutiveParams) -> f64 {
    let profile = RadialProfile::for_params(params);
    let norms = stress.frobenius_plane();
    let mut acc = 0.0;
    for &s in &norms {
        acc += s * profile.value(s);
    }
    acc / norms.len() as f64
}

/// `(int |T|^r)^(1/r)` over the unit box.
pub fn lebesgue_norm(stress: &SymTensorField, r: f64) -> Result<f64, DiagnosticsError> {
    if !(r >= 1.0) {
        return Err(DiagnosticsError::BadExponent(r));
    }
    let norms = stress.frobenius_plane();
    let mut acc = 0.0;
    for &s in &norms {
        acc += s.powf(r);
    }
    Ok((acc / norms.len() as f64).powf(1.0 / r))
}

/// `int |grad T|^2 / (1 + |T|)^(1+a)` at one time, with `grad T` taken
/// spectrally on the collocation grid.
pub fn gradient_dissipation_integrand(stress: &SymTensorField, params: &ConstitutiveParams, state: &SolverState) -> f64 {
    let config = state.config();
    let d = stress.dim();
    let nodes = stress.node_count();
    let mut grad_sq = vec![0.0; nodes];
    for i in 0..d {
        for j in i..d {
            let w = if i == j { 1.0 } else { 2.0 };
            let pairs = scalar_from_grid(stress.plane(i, j), config);
            for axis in 0..d {
                let der = differentiate_pairs(&pairs, config, axis);
                let g = scalar_to_grid(&der, config);
                for (acc, v) in grad_sq.iter_mut().zip(g.iter()) {
                    *acc += w * v * v;
                }
            }
        }
    }
    let norms = stress.frobenius_plane();
    let mut acc = 0.0;
    for (gs, s) in grad_sq.iter().zip(norms.iter()) {
        acc += gs / (1.0 + s).powf(1.0 + params.a);
    }
    acc / nodes as f64
}

/// Assembles one diagnostics row from the state, updating the accumulators.
pub fn collect(
    state: &SolverState,
    force: &ForceSpec,
    accum: &mut RunAccumulators,
) -> Result<DiagnosticsRecord, StepError> {
    let params = &state.params;
    let fields = solver::constitutive_fields(state)?;
    let config = state.config();

    let mut accel = divergence_sym(&fields.stress, config).expect("shapes agree");
    if !force.is_zero() {
        accel.axpy(1.0, &force.eval(state.t, config));
    }

    let kinetic = 0.5 * state.v.l2_norm().powi(2);
    let eps_u = sym_gradient(&state.u);
    let stored = stored_energy(&eps_u, params);
    let max_strain = eps_u.max_frobenius();
    let strain_rate_max = fields.strain_rate_norm.iter().cloned().fold(0.0, f64::max);

    let t_l1 = grid_mean(&fields.stress_norm);
    let a = params.a;
    let mut t_l1me = 0.0;
    for &s in &fields.stress_norm {
        if s >= 1.0 {
            t_l1me += s.powf(1.0 - a);
        }
    }
    t_l1me /= fields.stress_norm.len() as f64;

    let exponent = theorem3_exponent(a, config.dim());
    let delta = if exponent.valid { exponent.delta } else { 0.0 };
    let r = 1.0 + delta;
    let mut t_l1pd = 0.0;
    for &s in &fields.stress_norm {
        t_l1pd += s.powf(r);
    }
    t_l1pd = (t_l1pd / fields.stress_norm.len() as f64).powf(1.0 / r);

    let grad_now = gradient_dissipation_integrand(&fields.stress, params, state);
    if let Some((t_prev, g_prev)) = accum.prev_grad {
        accum.grad_diss_cum += 0.5 * (g_prev + grad_now) * (state.t - t_prev);
    }
    accum.prev_grad = Some((state.t, grad_now));

    Ok(DiagnosticsRecord {
        t: state.t,
        kinetic,
        stored,
        total: kinetic + stored,
        dissip_cum: accum.dissip_cum,
        max_strain,
        strain_rate_max,
        t_l1,
        t_l1me,
        t_l1pd,
        grad_diss_cum: accum.grad_diss_cum,
        accel_l2: accel.l2_norm(),
    })
}

/// Exponent arithmetic for the improved stress integrability in three
/// dimensions: valid iff `d = 3` and `a < 2/7`, with `q = 3`, `p = 2q = 6`
/// and `delta = a/q' = 2a/3`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExponentReport {
    pub a: f64,
    pub valid: bool,
    pub q: f64,
    pub q_prime: f64,
    pub p: f64,
    pub delta: f64,
}

pub fn theorem3_exponent(a: f64, dim: usize) -> ExponentReport {
    assert!(a > 0.0, "a must be positive");
    let q = 3.0;
    let q_prime = q / (q - 1.0);
    let p = 2.0 * q;
    let delta = a / q_prime;
    let valid = dim == 3 && a < 2.0 / 7.0;
    if valid {
        // internal consistency guard: the two exponent constraints hold on
        // the admissible range
        let lhs = 1.0 + 2.0 * a * (q - 1.0);
        let rhs = p * (1.0 - a) / 2.0;
        assert!(lhs <= rhs + 1e-12, "exponent constraint violated: {lhs} > {rhs}");
        assert!(1.0 / q <= 2.0 / p + 1e-15);
    }
    ExponentReport { a, valid, q, q_prime, p, delta }
}

/// The sup-in-t and integral-in-t quantities controlled by the a priori
/// bounds, assembled from a completed run's table for cross-`n` comparison.
#[derive(Clone, Debug)]
pub struct AprioriReport {
    pub sup_v_l2: f64,
    pub sup_strain_rate: f64,
    /// `int_Q |T|` via trapezoid over the cadence lattice.
    pub t_l1_q: f64,
    pub sup_t_l1me: f64,
    pub grad_diss_total: f64,
    pub sup_accel_l2: f64,
}

impl AprioriReport {
    pub fn entries(&self) -> [(&'static str, f64); 6] {
        [
            ("sup_v_l2", self.sup_v_l2),
            ("sup_strain_rate", self.sup_strain_rate),
            ("t_l1_q", self.t_l1_q),
            ("sup_t_l1me", self.sup_t_l1me),
            ("grad_diss_total", self.grad_diss_total),
            ("sup_accel_l2", self.sup_accel_l2),
        ]
    }
}

pub fn apriori_report(records: &[DiagnosticsRecord]) -> Result<AprioriReport, DiagnosticsError> {
    if records.is_empty() {
        return Err(DiagnosticsError::EmptyTable);
    }
    let sup = |f: &dyn Fn(&DiagnosticsRecord) -> f64| records.iter().map(|r| f(r)).fold(0.0, f64::max);
    let mut t_l1_q = 0.0;
    for pair in records.windows(2) {
        t_l1_q += 0.5 * (pair[0].t_l1 + pair[1].t_l1) * (pair[1].t - pair[0].t);
    }
    Ok(AprioriReport {
        sup_v_l2: sup(&|r| (2.0 * r.kinetic).sqrt()),
        sup_strain_rate: sup(&|r| r.strain_rate_max),
        t_l1_q,
        sup_t_l1me: sup(&|r| r.t_l1me),
        grad_diss_total: records.last().unwrap().grad_diss_cum,
        sup_accel_l2: sup(&|r| r.accel_l2),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constitutive::Regularisation;
    use crate::spectral::{SpectralConfig, SpectralField};

    fn params(a: f64, alpha: f64, n: u32) -> ConstitutiveParams {
        ConstitutiveParams::regularised(a, alpha, n).unwrap()
    }

    fn zero_state(dim: usize, m: usize, p: ConstitutiveParams) -> SolverState {
        let c = SpectralConfig::with_default_grid(dim, m).unwrap();
        SolverState::new(SpectralField::zeros(c), SpectralField::zeros(c), p)
    }

    #[test]
    fn energy_of_zero_state_vanishes() {
        let s = zero_state(2, 2, params(1.0, 1.0, 4));
        assert_eq!(energy(&s), (0.0, 0.0, 0.0));
    }

    #[test]
    fn kinetic_from_parseval_single_mode() {
        let mut s = zero_state(2, 2, params(1.0, 1.0, 4));
        // unit-L2 mode: coefficient 1 against the orthonormal basis
        s.v.set_mode(1, [1, 0, 0], 0.0, 1.0);
        let (k, st, _) = energy(&s);
        assert!((k - 0.5).abs() < 1e-15);
        assert_eq!(st, 0.0);
    }

    #[test]
    fn stored_energy_matches_quadratic_expansion() {
        let p = params(1.0, 1.0, 4);
        for amp in [1e-3, 1e-4] {
            let mut s = zero_state(2, 2, p);
            s.u.set_mode(1, [1, 0, 0], 0.0, amp);
            let (_, stored, _) = energy(&s);
            // ||eps(u)||_2^2 = 2 (pi amp)^2 for this unit-coefficient shear
            // mode, so the quadratic term is alpha (pi amp)^2
            let expect = p.alpha * (std::f64::consts::PI * amp).powi(2);
            assert!(
                (stored - expect).abs() <= 40.0 * amp.powi(3),
                "amp={amp} stored={stored} expect={expect}"
            );
        }
    }

    #[test]
    fn dissipation_increment_pinned() {
        // constant T with |T| = 1, a = 1, n = 1: T : F_1(T) = |T|^2 = 1
        let p = params(1.0, 1.0, 1);
        let mut t = SymTensorField::zeros(2, [8, 8, 1]);
        t.plane_mut(0, 0).fill(1.0);
        assert!((dissipation_increment(&t, &p) - 1.0).abs() < 1e-14);
        let z = SymTensorField::zeros(2, [8, 8, 1]);
        assert_eq!(dissipation_increment(&z, &p), 0.0);
    }

    #[test]
    fn dissipation_increment_nonnegative_on_random_fields() {
        use rand::Rng;
        use rand_chacha::rand_core::SeedableRng;
        use rand_chacha::ChaCha8Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let p = params(0.7, 1.0, 5);
        for _ in 0..50 {
            let mut t = SymTensorField::zeros(2, [8, 8, 1]);
            for i in 0..2 {
                for j in i..2 {
                    for v in t.plane_mut(i, j) {
                        *v = rng.gen_range(-3.0..3.0);
                    }
                }
            }
            assert!(dissipation_increment(&t, &p) >= 0.0);
        }
    }

    #[test]
    fn lebesgue_norm_pinned_and_monotone_in_r() {
        let mut t = SymTensorField::zeros(2, [8, 8, 1]);
        t.plane_mut(0, 0).fill(2.0);
        assert!((lebesgue_norm(&t, 1.0).unwrap() - 2.0).abs() < 1e-14);
        assert_eq!(lebesgue_norm(&SymTensorField::zeros(2, [8, 8, 1]), 1.5).unwrap(), 0.0);
        assert!(lebesgue_norm(&t, 0.5).is_err());

        use rand::Rng;
        use rand_chacha::rand_core::SeedableRng;
        use rand_chacha::ChaCha8Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        for _ in 0..20 {
            let mut t = SymTensorField::zeros(2, [8, 8, 1]);
            for v in t.plane_mut(0, 1) {
                *v = rng.gen_range(-2.0..2.0);
            }
            let n1 = lebesgue_norm(&t, 1.0).unwrap();
            let n2 = lebesgue_norm(&t, 1.7).unwrap();
            let n3 = lebesgue_norm(&t, 3.0).unwrap();
            assert!(n1 <= n2 * (1.0 + 1e-12) && n2 <= n3 * (1.0 + 1e-12));
        }
    }

    #[test]
    fn exponent_report_pinned_cases() {
        // boundary a = 2/7: invalid (open interval) but both constraint
        // sides equal 15/7
        let a = 2.0 / 7.0;
        let r = theorem3_exponent(a, 3);
        assert!(!r.valid);
        let lhs = 1.0 + 2.0 * a * (r.q - 1.0);
        let rhs = r.p * (1.0 - a) / 2.0;
        assert!((lhs - 15.0 / 7.0).abs() < 1e-14);
        assert!((rhs - 15.0 / 7.0).abs() < 1e-14);
        assert!((r.delta - 4.0 / 21.0).abs() < 1e-15);

        let r2 = theorem3_exponent(0.2, 3);
        assert!(r2.valid);
        assert!((r2.delta - 2.0 / 15.0).abs() < 1e-15);
        assert!((r2.q_prime - 1.5).abs() < 1e-15);

        assert!(!theorem3_exponent(0.5, 3).valid);
        assert!(!theorem3_exponent(0.2, 2).valid);
    }

    #[test]
    fn apriori_report_zero_run_is_zero() {
        let p = ConstitutiveParams::new(1.0, 1.0, Regularisation::Finite(4)).unwrap();
        let s = zero_state(2, 2, p);
        let mut acc = RunAccumulators::new();
        let rec = collect(&s, &ForceSpec::Zero, &mut acc).unwrap();
        let rep = apriori_report(&[rec]).unwrap();
        for (_, v) in rep.entries() {
            assert_eq!(v, 0.0);
        }
        assert!(apriori_report(&[]).is_err());
    }

    #[test]
    fn csv_row_roundtrips_exactly() {
        let rec = DiagnosticsRecord {
            t: 0.30000000000000004,
            kinetic: 1.2345678901234567e-3,
            stored: 2.0,
            total: 2.0012345678901235,
            dissip_cum: 1e-300,
            max_strain: 0.9999999999999999,
            strain_rate_max: 1.0,
            t_l1: 3.3,
            t_l1me: 0.0,
            t_l1pd: 3.3,
            grad_diss_cum: 17.0,
            accel_l2: 1e17,
        };
        let row = rec.csv_row();
        let back = DiagnosticsRecord::parse_csv_row(&row).unwrap();
        assert_eq!(rec, back);
        assert_eq!(DiagnosticsRecord::CSV_HEADER.split(',').count(), row.split(',').count());
    }
}
