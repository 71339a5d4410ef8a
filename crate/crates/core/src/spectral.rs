//! Real trigonometric basis on the periodic unit box.
//!
//! Fields are zero-mean vector-valued trigonometric polynomials of degree at
//! most `m` in the `|k|_inf` sense. Coefficients are stored as real
//! cosine/sine pairs against the orthonormal functions
//! `sqrt(2) cos(2 pi k.x)`, `sqrt(2) sin(2 pi k.x)`, one pair per canonical
//! mode `k` (first nonzero component positive) and per vector component, so
//! the Euclidean norm of the coefficient vector is the L^2 norm of the
//! field. The `k = 0` coefficient is structurally absent.
//!
//! Grids oversample the band (`grid >= 2(m+1)` per axis) because the
//! pointwise constitutive inversion is non-polynomial; transforms project
//! back onto the band, and the residual aliasing is part of the Galerkin
//! approximation error.

use crate::tensors::{grid_node_count, SymTensorField, VectorGridField};
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use std::cell::RefCell;
use std::f64::consts::SQRT_2;
use thiserror::Error;

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

#[derive(Debug, Error, PartialEq)]
pub enum SpectralError {
    #[error("dim must be 1, 2 or 3 (got {0})")]
    BadDim(usize),
    #[error("m must be >= 1")]
    BadDegree,
    #[error("grid axis {axis} has {got} points; need a power of two >= {need}")]
    BadGrid { axis: usize, got: usize, need: usize },
    #[error("grid shape {got:?} does not match config {want:?}")]
    ShapeMismatch { got: Vec<usize>, want: Vec<usize> },
    #[error("operation undefined on the zero field")]
    ZeroField,
}

/// Truncation degree `m`, dimension and collocation grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SpectralConfig {
    dim: usize,
    m: usize,
    grid_shape: [usize; 3],
}

impl SpectralConfig {
    pub fn new(dim: usize, m: usize, grid_shape: &[usize]) -> Result<Self, SpectralError> {
        if !(1..=3).contains(&dim) {
            return Err(SpectralError::BadDim(dim));
        }
        if m < 1 {
            return Err(SpectralError::BadDegree);
        }
        if grid_shape.len() != dim {
            return Err(SpectralError::ShapeMismatch {
                got: grid_shape.to_vec(),
                want: vec![0; dim],
            });
        }
        let mut shape = [1usize; 3];
        for (axis, &n) in grid_shape.iter().enumerate() {
            if !n.is_power_of_two() || n < 2 * (m + 1) {
                return Err(SpectralError::BadGrid { axis, got: n, need: 2 * (m + 1) });
            }
            shape[axis] = n;
        }
        Ok(SpectralConfig { dim, m, grid_shape: shape })
    }

    /// Smallest power-of-two grid satisfying the oversampling requirement.
    pub fn with_default_grid(dim: usize, m: usize) -> Result<Self, SpectralError> {
        let n = (2 * (m + 1)).next_power_of_two();
        let shape: Vec<usize> = vec![n; dim];
        Self::new(dim, m, &shape)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn degree(&self) -> usize {
        self.m
    }

    pub fn grid_shape(&self) -> &[usize] {
        &self.grid_shape[..self.dim]
    }

    pub fn node_count(&self) -> usize {
        grid_node_count(self.dim, self.grid_shape)
    }

    /// Canonical modes: `k` with `|k|_inf <= m`, `k != 0`, first nonzero
    /// component positive, enumerated row-major over the `[-m, m]^d` box.
    ///
    /// This enumeration fixes the coefficient layout and the checkpoint
    /// payload order.
    pub fn canonical_modes(&self) -> Vec<[i64; 3]> {
        let m = self.m as i64;
        let mut out = Vec::with_capacity(self.mode_count());
        let ranges = |active: bool| if active { (-m, m) } else { (0i64, 0i64) };
        let (lo1, hi1) = ranges(self.dim >= 1);
        let (lo2, hi2) = ranges(self.dim >= 2);
        let (lo3, hi3) = ranges(self.dim >= 3);
        for k1 in lo1..=hi1 {
            for k2 in lo2..=hi2 {
                for k3 in lo3..=hi3 {
                    let k = [k1, k2, k3];
                    let first = k.iter().find(|&&v| v != 0);
                    if let Some(&f) = first {
                        if f > 0 {
                            out.push(k);
                        }
                    }
                }
            }
        }
        out
    }

    /// Number of canonical modes: `((2m+1)^d - 1) / 2`.
    pub fn mode_count(&self) -> usize {
        let side = 2 * self.m + 1;
        (side.pow(self.dim as u32) - 1) / 2
    }

    /// Real coefficients per vector component (cos and sin per mode).
    pub fn coeffs_per_component(&self) -> usize {
        2 * self.mode_count()
    }

    pub fn coeff_len(&self) -> usize {
        self.dim * self.coeffs_per_component()
    }

    /// True when both configs describe the same space (grid included).
    pub fn same_space(&self, other: &SpectralConfig) -> bool {
        self == other
    }
}

/// Zero-mean real trigonometric vector field in coefficient form.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField {
    config: SpectralConfig,
    /// Layout: component-major, per canonical mode the (cos, sin) pair.
    coeffs: Vec<f64>,
}

impl SpectralField {
    pub fn zeros(config: SpectralConfig) -> Self {
        SpectralField { config, coeffs: vec![0.0; config.coeff_len()] }
    }

    pub fn config(&self) -> &SpectralConfig {
        &self.config
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn component_coeffs(&self, c: usize) -> &[f64] {
        let n = self.config.coeffs_per_component();
        &self.coeffs[c * n..(c + 1) * n]
    }

    pub fn component_coeffs_mut(&mut self, c: usize) -> &mut [f64] {
        let n = self.config.coeffs_per_component();
        &mut self.coeffs[c * n..(c + 1) * n]
    }

    /// Sets the (cos, sin) pair of `mode` for component `c`. The mode must
    /// be canonical.
    pub fn set_mode(&mut self, c: usize, mode: [i64; 3], cos_amp: f64, sin_amp: f64) {
        let modes = self.config.canonical_modes();
        let pos = modes.iter().position(|&k| k == mode).expect("mode not canonical or out of band");
        let cc = self.component_coeffs_mut(c);
        cc[2 * pos] = cos_amp;
        cc[2 * pos + 1] = sin_amp;
    }

    pub fn axpy(&mut self, alpha: f64, other: &SpectralField) {
        assert!(self.config.same_space(&other.config), "space mismatch");
        for (a, b) in self.coeffs.iter_mut().zip(other.coeffs.iter()) {
            *a += alpha * b;
        }
    }

    pub fn scale_in_place(&mut self, factor: f64) {
        for a in self.coeffs.iter_mut() {
            *a *= factor;
        }
    }

    pub fn scaled(&self, factor: f64) -> SpectralField {
        let mut out = self.clone();
        out.scale_in_place(factor);
        out
    }

    pub fn add(&self, other: &SpectralField) -> SpectralField {
        let mut out = self.clone();
        out.axpy(1.0, other);
        out
    }

    pub fn sub(&self, other: &SpectralField) -> SpectralField {
        let mut out = self.clone();
        out.axpy(-1.0, other);
        out
    }

    /// L^2(Omega) norm, exact by Parseval.
    pub fn l2_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    /// L^2 inner product with another field on the same space.
    pub fn inner(&self, other: &SpectralField) -> f64 {
        assert!(self.config.same_space(&other.config), "space mismatch");
        self.coeffs.iter().zip(other.coeffs.iter()).map(|(a, b)| a * b).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_finite())
    }

    /// Copies shared modes into the target space (orthogonal projection for
    /// a coarser target, zero-padded embedding for a finer one). Grids may
    /// differ; modes are matched by wavenumber.
    pub fn project_to(&self, target: SpectralConfig) -> SpectralField {
        assert_eq!(self.config.dim, target.dim, "dimension mismatch");
        let mut out = SpectralField::zeros(target);
        let src_modes = self.config.canonical_modes();
        let dst_modes = target.canonical_modes();
        // both enumerations are row-major over the mode box, so a merge walk
        // would do; index map is simpler and this is not a hot path
        for (dst_pos, k) in dst_modes.iter().enumerate() {
            if k.iter().any(|&v| v.unsigned_abs() as usize > self.config.m) {
                continue;
            }
            let src_pos = src_modes.iter().position(|kk| kk == k).expect("mode present");
            for c in 0..self.config.dim {
                let src = self.component_coeffs(c);
                let dst = out.component_coeffs_mut(c);
                dst[2 * dst_pos] = src[2 * src_pos];
                dst[2 * dst_pos + 1] = src[2 * src_pos + 1];
            }
        }
        out
    }
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn fft_axis(data: &mut [Complex64], shape: &[usize], axis: usize, inverse: bool) {
    let n = shape[axis];
    let fft = PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(n)
        } else {
            p.plan_fft_forward(n)
        }
    });
    let total: usize = shape.iter().product();
    let stride: usize = shape[axis + 1..].iter().product();
    let mut line = vec![Complex64::default(); n];
    let lines = total / n;
    for l in 0..lines {
        // decompose line index into (outer, inner) around the axis
        let inner = l % stride;
        let outer = l / stride;
        let base = outer * stride * n + inner;
        for (i, v) in line.iter_mut().enumerate() {
            *v = data[base + i * stride];
        }
        fft.process(&mut line);
        for (i, v) in line.iter().enumerate() {
            data[base + i * stride] = *v;
        }
    }
}

fn fftn(data: &mut [Complex64], shape: &[usize], inverse: bool) {
    for axis in 0..shape.len() {
        fft_axis(data, shape, axis, inverse);
    }
}

fn grid_index(shape: &[usize], k: &[i64; 3]) -> usize {
    let mut idx = 0;
    for (axis, &n) in shape.iter().enumerate() {
        let ni = n as i64;
        let wrapped = ((k[axis] % ni) + ni) % ni;
        idx = idx * n + wrapped as usize;
    }
    idx
}

/// Scalar synthesis: coefficient pairs (canonical-mode order) to grid values.
pub(crate) fn scalar_to_grid(pairs: &[f64], config: &SpectralConfig) -> Vec<f64> {
    let shape = config.grid_shape();
    let nodes = config.node_count();
    let mut spec = vec![Complex64::default(); nodes];
    for (pos, k) in config.canonical_modes().iter().enumerate() {
        let (a, b) = (pairs[2 * pos], pairs[2 * pos + 1]);
        if a == 0.0 && b == 0.0 {
            continue;
        }
        // a sqrt2 cos + b sqrt2 sin = c e^{i th} + conj(c) e^{-i th},
        // c = (a - i b)/sqrt2
        let c = Complex64::new(a / SQRT_2, -b / SQRT_2);
        spec[grid_index(shape, k)] = c;
        let neg = [-k[0], -k[1], -k[2]];
        spec[grid_index(shape, &neg)] = c.conj();
    }
    fftn(&mut spec, shape, true);
    spec.into_iter().map(|z| z.re).collect()
}

/// Scalar analysis: grid values to band coefficients (L^2 projection up to
/// aliasing of out-of-band content; `k = 0` dropped).
pub(crate) fn scalar_from_grid(values: &[f64], config: &SpectralConfig) -> Vec<f64> {
    let shape = config.grid_shape();
    let nodes = config.node_count();
    assert_eq!(values.len(), nodes, "grid size mismatch");
    let mut spec: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fftn(&mut spec, shape, false);
    let norm = 1.0 / nodes as f64;
    let mut pairs = vec![0.0; config.coeffs_per_component()];
    for (pos, k) in config.canonical_modes().iter().enumerate() {
        let c = spec[grid_index(shape, k)] * norm;
        pairs[2 * pos] = SQRT_2 * c.re;
        pairs[2 * pos + 1] = -SQRT_2 * c.im;
    }
    pairs
}

/// Derivative along `axis` in coefficient space:
/// `(a, b) -> (2 pi k_axis b, -2 pi k_axis a)` per mode.
pub(crate) fn differentiate_pairs(pairs: &[f64], config: &SpectralConfig, axis: usize) -> Vec<f64> {
    let mut out = vec![0.0; pairs.len()];
    for (pos, k) in config.canonical_modes().iter().enumerate() {
        let w = TWO_PI * k[axis] as f64;
        out[2 * pos] = w * pairs[2 * pos + 1];
        out[2 * pos + 1] = -w * pairs[2 * pos];
    }
    out
}

/// Pointwise evaluation of the truncated series on the grid; exact for
/// in-band fields.
pub fn to_grid(field: &SpectralField) -> VectorGridField {
    let config = field.config;
    let mut shape3 = [1usize; 3];
    shape3[..config.dim].copy_from_slice(config.grid_shape());
    let mut out = VectorGridField::zeros(config.dim, shape3);
    for c in 0..config.dim {
        let g = scalar_to_grid(field.component_coeffs(c), &config);
        out.component_mut(c).copy_from_slice(&g);
    }
    out
}

/// Orthogonal projection of grid data onto the zero-mean degree-`m` space.
pub fn from_grid(values: &VectorGridField, config: &SpectralConfig) -> Result<SpectralField, SpectralError> {
    if values.dim() != config.dim || values.shape()[..config.dim] != config.grid_shape[..config.dim] {
        return Err(SpectralError::ShapeMismatch {
            got: values.shape()[..values.dim()].to_vec(),
            want: config.grid_shape().to_vec(),
        });
    }
    let mut out = SpectralField::zeros(*config);
    for c in 0..config.dim {
        let pairs = scalar_from_grid(values.component(c), config);
        out.component_coeffs_mut(c).copy_from_slice(&pairs);
    }
    Ok(out)
}

/// Symmetric-gradient coefficients per tensor entry, still in band.
fn sym_gradient_pairs(field: &SpectralField) -> Vec<Vec<f64>> {
    let config = field.config;
    let d = config.dim;
    let mut entries = Vec::with_capacity(d * (d + 1) / 2);
    for i in 0..d {
        for j in i..d {
            let di_uj = differentiate_pairs(field.component_coeffs(j), &config, i);
            let mut pair = di_uj;
            let dj_ui = differentiate_pairs(field.component_coeffs(i), &config, j);
            for (p, q) in pair.iter_mut().zip(dj_ui.iter()) {
                *p = 0.5 * (*p + q);
            }
            entries.push(pair);
        }
    }
    entries
}

/// `eps(u) = (grad u + grad u^t)/2`, differentiated analytically in
/// coefficient space and evaluated on the collocation grid.
pub fn sym_gradient(field: &SpectralField) -> SymTensorField {
    let config = field.config;
    let d = config.dim;
    let mut shape3 = [1usize; 3];
    shape3[..d].copy_from_slice(config.grid_shape());
    let mut out = SymTensorField::zeros(d, shape3);
    let mut entry = 0;
    let pairs = sym_gradient_pairs(field);
    for i in 0..d {
        for j in i..d {
            let g = scalar_to_grid(&pairs[entry], &config);
            out.plane_mut(i, j).copy_from_slice(&g);
            entry += 1;
        }
    }
    out
}

/// Galerkin divergence of a symmetric tensor field: transform each entry,
/// truncate to the band, differentiate analytically; adjoint (up to
/// aliasing) to `-sym_gradient` against in-band test fields.
pub fn divergence_sym(tensor: &SymTensorField, config: &SpectralConfig) -> Result<SpectralField, SpectralError> {
    let d = config.dim;
    if tensor.dim() != d || tensor.shape()[..d] != config.grid_shape[..d] {
        return Err(SpectralError::ShapeMismatch {
            got: tensor.shape()[..tensor.dim()].to_vec(),
            want: config.grid_shape().to_vec(),
        });
    }
    // per-entry band coefficients
    let mut entry_pairs = Vec::with_capacity(d * (d + 1) / 2);
    for i in 0..d {
        for j in i..d {
            entry_pairs.push(scalar_from_grid(tensor.plane(i, j), config));
        }
    }
    let mut out = SpectralField::zeros(*config);
    for i in 0..d {
        let acc = out.component_coeffs_mut(i);
        for j in 0..d {
            let (lo, hi) = (i.min(j), i.max(j));
            let e = crate::tensors::upper_index(d, lo, hi);
            let der = differentiate_pairs(&entry_pairs[e], config, j);
            for (a, b) in acc.iter_mut().zip(der.iter()) {
                *a += b;
            }
        }
    }
    Ok(out)
}

/// `||grad F||_2 / ||eps(F)||_2`, evaluated exactly in coefficient space.
///
/// Bounded by sqrt(2) on zero-mean periodic fields, attained on
/// divergence-free shear modes.
pub fn korn_ratio(field: &SpectralField) -> Result<f64, SpectralError> {
    let config = field.config;
    let d = config.dim;
    let mut grad_sq = 0.0;
    for c in 0..d {
        for axis in 0..d {
            let der = differentiate_pairs(field.component_coeffs(c), &config, axis);
            grad_sq += der.iter().map(|v| v * v).sum::<f64>();
        }
    }
    if grad_sq == 0.0 {
        return Err(SpectralError::ZeroField);
    }
    let mut eps_sq = 0.0;
    let mut entry = 0;
    let pairs = sym_gradient_pairs(field);
    for i in 0..d {
        for j in i..d {
            let w = if i == j { 1.0 } else { 2.0 };
            eps_sq += w * pairs[entry].iter().map(|v| v * v).sum::<f64>();
            entry += 1;
        }
    }
    Ok((grad_sq / eps_sq).sqrt())
}

/// Mean of grid values; the quadrature rule for integrals over the unit box
/// (spectrally accurate for smooth periodic integrands).
pub fn grid_mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}
