//! The constitutive maps and their calculus.
//!
//! Everything here is radial: `F(T) = f(|T|) T / |T|` with
//! `f(s) = s (1 + s^a)^(-1/a)`, and the regularised map adds
//! `s / (n (1 + s^(1 - 1/n)))` to the profile. Inversion therefore reduces
//! to a monotone scalar root-find followed by a rescale of the input
//! direction, which is unconditionally convergent with a bracket.
//!
//! Also housed here: the exact inverses of `F` and `F_alpha` on the
//! saturation ball, the Jacobian of `F_n` as a linear operator on symmetric
//! tensors, the dissipation potential `h_n`, the stored-energy density
//! `f_alpha^*`, and the two inequality oracles used by the property suite.

use crate::tensors::{sym_entry_count, SymTensor};
use thiserror::Error;

mod quadrature;
mod rootfind;

pub(crate) use quadrature::adaptive_quadrature;

/// Regularisation index: finite `n` selects `F_n`, the sentinel selects the
/// unregularised `F`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regularisation {
    Finite(u32),
    Unregularised,
}

impl Regularisation {
    pub fn finite(&self) -> Option<u32> {
        match self {
            Regularisation::Finite(n) => Some(*n),
            Regularisation::Unregularised => None,
        }
    }
}

impl std::fmt::Display for Regularisation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Regularisation::Finite(n) => write!(f, "{}", n),
            Regularisation::Unregularised => write!(f, "inf"),
        }
    }
}

/// Model constants `(a, alpha, n)` governing `F`, `F_n` and their inverses.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConstitutiveParams {
    pub a: f64,
    pub alpha: f64,
    pub n: Regularisation,
}

impl ConstitutiveParams {
    pub fn new(a: f64, alpha: f64, n: Regularisation) -> Result<Self, ConstitutiveError> {
        if !(a > 0.0) || !a.is_finite() {
            return Err(ConstitutiveError::InvalidParameter("a must be positive"));
        }
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(ConstitutiveError::InvalidParameter("alpha must be positive"));
        }
        if let Regularisation::Finite(n) = n {
            if n == 0 {
                return Err(ConstitutiveError::InvalidParameter("n must be >= 1 when finite"));
            }
        }
        Ok(ConstitutiveParams { a, alpha, n })
    }

    pub fn regularised(a: f64, alpha: f64, n: u32) -> Result<Self, ConstitutiveError> {
        Self::new(a, alpha, Regularisation::Finite(n))
    }

    pub fn finite_n(&self) -> Result<u32, ConstitutiveError> {
        self.n.finite().ok_or(ConstitutiveError::RequiresFiniteN)
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum ConstitutiveError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),
    #[error("negative input {0} outside the profile domain [0, inf)")]
    NegativeInput(f64),
    #[error("operation requires a finite regularisation index n")]
    RequiresFiniteN,
    #[error("input norm {norm} reaches the saturation bound {bound}; inverse undefined")]
    Saturated { norm: f64, bound: f64 },
    #[error("non-finite input")]
    NonFinite,
}

/// Scalar map `s -> g(s)` on `[0, inf)` with its derivative; `g(0) = 0` and
/// `g` strictly increasing. Backs `f`, `f_n` and their inverses.
#[derive(Clone, Copy, Debug)]
pub struct RadialProfile {
    a: f64,
    /// `Some(n)` adds the regularising summand `s / (n (1 + s^(1-1/n)))`.
    reg_n: Option<f64>,
}

impl RadialProfile {
    /// Profile of the bounded map `F`.
    pub fn bounded(params: &ConstitutiveParams) -> Self {
        RadialProfile { a: params.a, reg_n: None }
    }

    /// Profile of the regularised map `F_n`; requires finite `n`.
    pub fn regularised(params: &ConstitutiveParams) -> Result<Self, ConstitutiveError> {
        let n = params.finite_n()?;
        Ok(RadialProfile { a: params.a, reg_n: Some(f64::from(n)) })
    }

    /// Selects `F_n` for finite `n` and `F` for the sentinel.
    pub fn for_params(params: &ConstitutiveParams) -> Self {
        match params.n {
            Regularisation::Finite(n) => RadialProfile { a: params.a, reg_n: Some(f64::from(n)) },
            Regularisation::Unregularised => Self::bounded(params),
        }
    }

    pub fn value(&self, s: f64) -> f64 {
        self.value_and_derivative(s).0
    }

    pub fn derivative(&self, s: f64) -> f64 {
        self.value_and_derivative(s).1
    }

    /// Evaluates `(g(s), g'(s))` sharing the expensive powers. The hot loop
    /// of the solver runs through here once per Newton iteration per node.
    pub fn value_and_derivative(&self, s: f64) -> (f64, f64) {
        debug_assert!(s >= 0.0);
        let base = 1.0 + pow_fast(s, self.a);
        // (1 + s^a)^(-1/a) and (1 + s^a)^(-1 - 1/a) from one power
        let bpow = pow_fast_neg_recip(base, self.a);
        let mut g = s * bpow;
        let mut dg = bpow / base;
        if let Some(n) = self.reg_n {
            let sigma = sigma_pow(s, n);
            let denom = n * (1.0 + sigma);
            g += s / denom;
            dg += (1.0 + sigma / n) / (denom * (1.0 + sigma));
        }
        (g, dg)
    }

    /// Secant slope `g(s)/s`, continuously extended at `s = 0`.
    pub fn secant(&self, s: f64) -> f64 {
        if s == 0.0 {
            self.derivative(0.0)
        } else {
            self.value(s) / s
        }
    }

    /// Solves `g(s) = y` for `s >= 0`. Unbounded range requires `reg_n`;
    /// the bounded profile accepts only `y < 1`.
    pub fn invert(&self, y: f64) -> Result<f64, ConstitutiveError> {
        if !y.is_finite() {
            return Err(ConstitutiveError::NonFinite);
        }
        if y < 0.0 {
            return Err(ConstitutiveError::NegativeInput(y));
        }
        if y == 0.0 {
            return Ok(0.0);
        }
        match self.reg_n {
            None => {
                if y >= 1.0 {
                    return Err(ConstitutiveError::Saturated { norm: y, bound: 1.0 });
                }
                Ok(y * (1.0 - y.powf(self.a)).powf(-1.0 / self.a))
            }
            Some(n) => {
                // g is concave and increasing, so Newton started below the
                // root climbs monotonically and cannot overshoot
                let mut s = y / self.derivative(0.0);
                for _ in 0..60 {
                    let (g, dg) = self.value_and_derivative(s);
                    let ds = (y - g) / dg;
                    if ds <= 0.0 {
                        break;
                    }
                    s += ds;
                    if ds <= 1e-13 * (1.0 + s) {
                        return Ok(s);
                    }
                }
                if (self.value(s) - y).abs() <= 1e-12 * (1.0 + y) {
                    return Ok(s);
                }
                // safeguarded bracketed fallback
                let hi = y * (1.0 + n * (1.0 + y));
                Ok(rootfind::monotone_root(|s| self.value(s), |s| self.derivative(s), y, hi))
            }
        }
    }
}

#[inline]
fn pow_fast(s: f64, a: f64) -> f64 {
    if a == 1.0 {
        s
    } else if a == 2.0 {
        s * s
    } else if a == 0.5 {
        s.sqrt()
    } else {
        s.powf(a)
    }
}

#[inline]
fn pow_fast_neg_recip(base: f64, a: f64) -> f64 {
    if a == 1.0 {
        1.0 / base
    } else if a == 2.0 {
        1.0 / base.sqrt()
    } else if a == 0.5 {
        let r = 1.0 / base;
        r * r
    } else {
        base.powf(-1.0 / a)
    }
}

/// `s^(1 - 1/n)` with the continuous extensions: constant 1 for `n = 1`,
/// limit 0 at `s = 0` for `n > 1`.
#[inline]
fn sigma_pow(s: f64, n: f64) -> f64 {
    if n == 1.0 {
        1.0
    } else if s == 0.0 {
        0.0
    } else {
        s.powf(1.0 - 1.0 / n)
    }
}

/// Slope of the regularising summand `s / (n (1 + s^(1-1/n)))` at `s = 0`:
/// `1/2` for `n = 1`
/// (constant denominator `2n`), `1/n` otherwise (`s^(1-1/n) -> 0`).
pub fn regulariser_slope_at_zero(n: u32) -> f64 {
    if n == 1 {
        0.5
    } else {
        1.0 / f64::from(n)
    }
}

/// Small-strain stiffness of the inverse map, `1 / f_n'(0)`.
///
/// This is the factor by which the linearised dynamics sees the elastic
/// operator; at `n = 1` it equals `1/(1 + 1/(2n))` exactly.
pub fn small_strain_stiffness(params: &ConstitutiveParams) -> f64 {
    match params.n {
        Regularisation::Finite(n) => 1.0 / (1.0 + regulariser_slope_at_zero(n)),
        Regularisation::Unregularised => 1.0,
    }
}

/// `f(s) = s (1 + s^a)^(-1/a)`, strictly increasing with limit 1.
pub fn profile_f(s: f64, params: &ConstitutiveParams) -> Result<f64, ConstitutiveError> {
    if s < 0.0 {
        return Err(ConstitutiveError::NegativeInput(s));
    }
    Ok(RadialProfile::bounded(params).value(s))
}

fn radial_map(t: &SymTensor, profile: &RadialProfile) -> SymTensor {
    let s = t.frobenius();
    if s == 0.0 {
        return SymTensor::zero(t.dim());
    }
    t.scale(profile.value(s) / s)
}

/// `F(T) = (1 + |T|^a)^(-1/a) T`; `|F(T)| < 1` for every input.
pub fn apply_f(t: &SymTensor, params: &ConstitutiveParams) -> SymTensor {
    radial_map(t, &RadialProfile::bounded(params))
}

/// `F_n(T) = F(T) + T / (n (1 + |T|^(1-1/n)))`; requires finite `n`.
pub fn apply_fn(t: &SymTensor, params: &ConstitutiveParams) -> Result<SymTensor, ConstitutiveError> {
    Ok(radial_map(t, &RadialProfile::regularised(params)?))
}

/// Unique `T` with `F_n(T) = E`, to relative tolerance 1e-12 in Frobenius
/// norm, by the radial reduction: solve `f_n(s) = |E|`, rescale `E`.
pub fn invert_fn(e: &SymTensor, params: &ConstitutiveParams) -> Result<SymTensor, ConstitutiveError> {
    if !e.is_finite() {
        return Err(ConstitutiveError::NonFinite);
    }
    let profile = RadialProfile::regularised(params)?;
    let y = e.frobenius();
    if y == 0.0 {
        return Ok(SymTensor::zero(e.dim()));
    }
    let s = profile.invert(y)?;
    Ok(e.scale(s / y))
}

/// Inverse of `F` on the open unit ball: `E (1 - |E|^a)^(-1/a)`.
///
/// Hard error at `|E| >= 1`; the caller decides any fallback.
pub fn invert_f(e: &SymTensor, params: &ConstitutiveParams) -> Result<SymTensor, ConstitutiveError> {
    if !e.is_finite() {
        return Err(ConstitutiveError::NonFinite);
    }
    let y = e.frobenius();
    if y >= 1.0 {
        return Err(ConstitutiveError::Saturated { norm: y, bound: 1.0 });
    }
    if y == 0.0 {
        return Ok(SymTensor::zero(e.dim()));
    }
    let s = RadialProfile::bounded(params).invert(y)?;
    Ok(e.scale(s / y))
}

/// Inverse of `F_alpha = F / alpha`: `alpha E (1 - alpha^a |E|^a)^(-1/a)`,
/// defined for `|E| < 1/alpha`.
pub fn invert_f_alpha(e: &SymTensor, params: &ConstitutiveParams) -> Result<SymTensor, ConstitutiveError> {
    if !e.is_finite() {
        return Err(ConstitutiveError::NonFinite);
    }
    let y = e.frobenius();
    let bound = 1.0 / params.alpha;
    if y >= bound {
        return Err(ConstitutiveError::Saturated { norm: y, bound });
    }
    Ok(invert_f(&e.scale(params.alpha), params)?)
}

/// A symmetric linear operator on symmetric `d x d` tensors, stored as a
/// matrix in the orthonormal (off-diagonals scaled by sqrt 2) basis.
#[derive(Clone, Debug)]
pub struct TensorOperator {
    dim: usize,
    mat: [[f64; 6]; 6],
}

impl TensorOperator {
    fn identity_scaled(dim: usize, lambda: f64) -> Self {
        let mut mat = [[0.0; 6]; 6];
        for (i, row) in mat.iter_mut().enumerate().take(sym_entry_count(dim)) {
            row[i] = lambda;
        }
        TensorOperator { dim, mat }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        sym_entry_count(self.dim)
    }

    /// Matrix entries in the orthonormal basis, row-major, `rank x rank`.
    pub fn matrix(&self) -> Vec<f64> {
        let r = self.rank();
        let mut out = Vec::with_capacity(r * r);
        for i in 0..r {
            for j in 0..r {
                out.push(self.mat[i][j]);
            }
        }
        out
    }

    pub fn apply(&self, u: &SymTensor) -> SymTensor {
        assert_eq!(u.dim(), self.dim, "dimension mismatch");
        let coords = u.to_orthonormal();
        let r = self.rank();
        let mut out = [0.0; 6];
        for i in 0..r {
            for j in 0..r {
                out[i] += self.mat[i][j] * coords[j];
            }
        }
        SymTensor::from_orthonormal(self.dim, &out[..r])
    }

    pub fn frobenius_norm(&self) -> f64 {
        let r = self.rank();
        let mut acc = 0.0;
        for i in 0..r {
            for j in 0..r {
                acc += self.mat[i][j] * self.mat[i][j];
            }
        }
        acc.sqrt()
    }

    /// Inverse by Gauss elimination with partial pivoting (rank <= 6).
    pub fn inverse(&self) -> TensorOperator {
        let r = self.rank();
        let mut a = self.mat;
        let mut inv = [[0.0; 6]; 6];
        for (i, row) in inv.iter_mut().enumerate().take(r) {
            row[i] = 1.0;
        }
        for col in 0..r {
            let mut piv = col;
            for row in col + 1..r {
                if a[row][col].abs() > a[piv][col].abs() {
                    piv = row;
                }
            }
            a.swap(col, piv);
            inv.swap(col, piv);
            let p = a[col][col];
            assert!(p != 0.0, "singular operator");
            for j in 0..r {
                a[col][j] /= p;
                inv[col][j] /= p;
            }
            for row in 0..r {
                if row != col {
                    let fac = a[row][col];
                    for j in 0..r {
                        a[row][j] -= fac * a[col][j];
                        inv[row][j] -= fac * inv[col][j];
                    }
                }
            }
        }
        TensorOperator { dim: self.dim, mat: inv }
    }
}

/// Jacobian `DF_n(T)` as a linear operator on symmetric tensors; symmetric
/// positive definite, with eigenvalues `f_n(s)/s` and `f_n'(s)` at `s = |T|`.
pub fn jacobian_fn(t: &SymTensor, params: &ConstitutiveParams) -> Result<TensorOperator, ConstitutiveError> {
    let profile = RadialProfile::regularised(params)?;
    let s = t.frobenius();
    if s == 0.0 {
        return Ok(TensorOperator::identity_scaled(t.dim(), profile.derivative(0.0)));
    }
    let phi = profile.value(s) / s;
    let phi_prime = (profile.derivative(s) * s - profile.value(s)) / (s * s);
    let mut op = TensorOperator::identity_scaled(t.dim(), phi);
    let coords = t.to_orthonormal();
    let r = op.rank();
    for i in 0..r {
        for j in 0..r {
            op.mat[i][j] += phi_prime / s * coords[i] * coords[j];
        }
    }
    Ok(op)
}

/// Integrand of `h_n` as a function of `t = |T|^2`:
/// the radial factor of `T : d/dt F_n(T)`.
fn h_n_integrand(t: f64, a: f64, n: f64) -> f64 {
    let first = (1.0 + t.powf(a / 2.0)).powf(-1.0 - 1.0 / a);
    let sigma = if t == 0.0 && n > 1.0 { 0.0 } else { t.powf(0.5 - 0.5 / n) };
    first + (n + sigma) / (n * n * (1.0 + sigma) * (1.0 + sigma))
}

/// `h_n(s)`: the primitive with `T : d/dt F_n(T(t)) = d/dt h_n(|T|^2) / 2`,
/// computed by adaptive quadrature to 1e-10 absolute.
pub fn h_n(s: f64, params: &ConstitutiveParams) -> Result<f64, ConstitutiveError> {
    if s < 0.0 {
        return Err(ConstitutiveError::NegativeInput(s));
    }
    let n = f64::from(params.finite_n()?);
    let a = params.a;
    Ok(adaptive_quadrature(|t| h_n_integrand(t, a, n), 0.0, s, 1e-10))
}

/// Potential `f_alpha(T) = (1/alpha) int_0^|T| f(t) dt`, radial form.
pub fn potential_f_alpha(s: f64, params: &ConstitutiveParams) -> Result<f64, ConstitutiveError> {
    if s < 0.0 {
        return Err(ConstitutiveError::NegativeInput(s));
    }
    let profile = RadialProfile::bounded(params);
    Ok(adaptive_quadrature(|t| profile.value(t), 0.0, s, 1e-10) / params.alpha)
}

/// Stored-energy density `f_alpha^*(E)`, radial form in `y = |E|`.
///
/// Evaluated through the Fenchel identity
/// `f_alpha^*(E) = E : F_alpha^{-1}(E) - f_alpha(F_alpha^{-1}(E))`;
/// returns `+inf` for `y >= 1/alpha` (the boundary included).
pub fn stored_energy_radial(y: f64, params: &ConstitutiveParams) -> f64 {
    debug_assert!(y >= 0.0);
    let ya = params.alpha * y;
    if ya >= 1.0 {
        return f64::INFINITY;
    }
    if y == 0.0 {
        return 0.0;
    }
    let s0 = params.alpha * y * (1.0 - ya.powf(params.a)).powf(-1.0 / params.a);
    y * s0 - potential_f_alpha(s0, params).expect("s0 >= 0")
}

/// Stored-energy density `f_alpha^*` of a strain value; `+inf` signals a
/// saturated node (a value, not an error).
pub fn stored_energy_density(e: &SymTensor, params: &ConstitutiveParams) -> f64 {
    stored_energy_radial(e.frobenius(), params)
}

/// Both slacks of the two-sided bound
/// `min{1, 2^(1/a-1)} (1+y) <= (1 + y^a)^(1/a) <= max{1, 2^(1/a-1)} (1+y)`;
/// nonnegative on the whole domain.
pub fn lemma1_gap(y: f64, a: f64) -> Result<(f64, f64), ConstitutiveError> {
    if y < 0.0 {
        return Err(ConstitutiveError::NegativeInput(y));
    }
    if !(a > 0.0) {
        return Err(ConstitutiveError::InvalidParameter("a must be positive"));
    }
    let c = (2.0f64).powf(-1.0 + 1.0 / a);
    let mid = (1.0 + y.powf(a)).powf(1.0 / a);
    let lower = c.min(1.0) * (1.0 + y);
    let upper = c.max(1.0) * (1.0 + y);
    Ok((mid - lower, upper - mid))
}

/// Adopted monotonicity constant `min{1, 2^(1/a - a)}`.
///
/// The stronger max-form is probed separately and never asserted.
pub fn lemma2_kappa(a: f64) -> f64 {
    (2.0f64).powf(1.0 / a - a).min(1.0)
}

/// `(T - S) : (F(T) - F(S)) - kappa |T - S|^2 / (1 + |T| + |S|)^(1+a)`;
/// nonnegative under the adopted `kappa`.
pub fn lemma2_gap(t: &SymTensor, s: &SymTensor, params: &ConstitutiveParams) -> f64 {
    lemma2_gap_with_kappa(t, s, params, lemma2_kappa(params.a))
}

pub fn lemma2_gap_with_kappa(t: &SymTensor, s: &SymTensor, params: &ConstitutiveParams, kappa: f64) -> f64 {
    let diff = t.sub(s);
    let lhs = diff.contract(&apply_f(t, params).sub(&apply_f(s, params)));
    let denom = (1.0 + t.frobenius() + s.frobenius()).powf(1.0 + params.a);
    lhs - kappa * diff.contract(&diff) / denom
}

/// Monotonicity denominator of the lemma-2 bound, exposed for the empirical
/// constant estimate in the property suite.
pub fn lemma2_modulus(t: &SymTensor, s: &SymTensor, params: &ConstitutiveParams) -> (f64, f64) {
    let diff = t.sub(s);
    let lhs = diff.contract(&apply_f(t, params).sub(&apply_f(s, params)));
    let denom = diff.contract(&diff) / (1.0 + t.frobenius() + s.frobenius()).powf(1.0 + params.a);
    (lhs, denom)
}

#[cfg(test)]
mod tests;
