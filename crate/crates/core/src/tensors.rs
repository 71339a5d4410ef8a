//! Symmetric `d x d` tensor values and tensor fields on a uniform periodic
//! collocation grid.
//!
//! Only the upper triangle is stored, so `T = T^t` holds by construction.
//! The Frobenius norm and the double contraction count off-diagonal entries
//! twice, matching `|A| = (A:A)^(1/2)`.

/// Largest supported spatial dimension.
pub const MAX_DIM: usize = 3;

/// Number of independent entries of a symmetric `d x d` tensor.
pub const fn sym_entry_count(dim: usize) -> usize {
    dim * (dim + 1) / 2
}

/// Index of entry `(i, j)` with `i <= j` in upper-triangular row-major order.
///
/// For `d = 3` the order is `(0,0) (0,1) (0,2) (1,1) (1,2) (2,2)`.
pub fn upper_index(dim: usize, i: usize, j: usize) -> usize {
    debug_assert!(i <= j && j < dim);
    i * dim - i * (i + 1) / 2 + j
}

/// A symmetric tensor value with `dim` in `{1, 2, 3}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SymTensor {
    dim: usize,
    entries: [f64; 6],
}

impl SymTensor {
    pub fn zero(dim: usize) -> Self {
        assert!((1..=MAX_DIM).contains(&dim), "dim must be 1, 2 or 3");
        SymTensor { dim, entries: [0.0; 6] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut t = Self::zero(dim);
        for i in 0..dim {
            t.set(i, i, 1.0);
        }
        t
    }

    /// Builds a tensor from its upper-triangular entries in row-major order.
    pub fn from_upper(dim: usize, upper: &[f64]) -> Self {
        assert_eq!(upper.len(), sym_entry_count(dim));
        let mut t = Self::zero(dim);
        t.entries[..upper.len()].copy_from_slice(upper);
        t
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn upper(&self) -> &[f64] {
        &self.entries[..sym_entry_count(self.dim)]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        self.entries[upper_index(self.dim, i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        self.entries[upper_index(self.dim, i, j)] = value;
    }

    pub fn scale(&self, factor: f64) -> Self {
        let mut out = *self;
        for e in out.entries.iter_mut() {
            *e *= factor;
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        let mut out = *self;
        for (e, o) in out.entries.iter_mut().zip(other.entries.iter()) {
            *e += o;
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-1.0))
    }

    /// Frobenius norm `(T:T)^(1/2)`, off-diagonal entries counted twice.
    pub fn frobenius(&self) -> f64 {
        self.contract(self).sqrt()
    }

    /// Double contraction `T : S`.
    ///
    /// Panics on dimension mismatch.
    pub fn contract(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        let mut acc = 0.0;
        for i in 0..self.dim {
            for j in i..self.dim {
                let w = if i == j { 1.0 } else { 2.0 };
                acc += w * self.get(i, j) * other.get(i, j);
            }
        }
        acc
    }

    pub fn is_finite(&self) -> bool {
        self.upper().iter().all(|e| e.is_finite())
    }

    /// Coordinates in an orthonormal basis of the symmetric tensors
    /// (off-diagonal entries scaled by sqrt(2)), so that the Euclidean dot
    /// product of coordinate vectors equals the tensor contraction.
    pub fn to_orthonormal(&self) -> [f64; 6] {
        let mut out = [0.0; 6];
        let mut idx = 0;
        for i in 0..self.dim {
            for j in i..self.dim {
                let w = if i == j { 1.0 } else { std::f64::consts::SQRT_2 };
                out[idx] = w * self.get(i, j);
                idx += 1;
            }
        }
        out
    }

    pub fn from_orthonormal(dim: usize, coords: &[f64]) -> Self {
        assert_eq!(coords.len(), sym_entry_count(dim));
        let mut t = Self::zero(dim);
        let mut idx = 0;
        for i in 0..dim {
            for j in i..dim {
                let w = if i == j { 1.0 } else { std::f64::consts::SQRT_2 };
                t.set(i, j, coords[idx] / w);
                idx += 1;
            }
        }
        t
    }

    /// Congruence `Q T Q^t` for a `dim x dim` matrix `Q` in row-major order.
    pub fn rotate(&self, q: &[f64]) -> Self {
        let d = self.dim;
        assert_eq!(q.len(), d * d);
        let mut out = Self::zero(d);
        for i in 0..d {
            for j in i..d {
                let mut acc = 0.0;
                for p in 0..d {
                    for r in 0..d {
                        acc += q[i * d + p] * self.get(p, r) * q[j * d + r];
                    }
                }
                out.set(i, j, acc);
            }
        }
        out
    }
}

/// A `d`-component vector field sampled on a uniform periodic grid,
/// stored component-major.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorGridField {
    dim: usize,
    shape: [usize; 3],
    data: Vec<f64>,
}

impl VectorGridField {
    pub fn zeros(dim: usize, shape: [usize; 3]) -> Self {
        let nodes = grid_node_count(dim, shape);
        VectorGridField { dim, shape, data: vec![0.0; dim * nodes] }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn shape(&self) -> [usize; 3] {
        self.shape
    }

    pub fn node_count(&self) -> usize {
        grid_node_count(self.dim, self.shape)
    }

    pub fn component(&self, c: usize) -> &[f64] {
        let n = self.node_count();
        &self.data[c * n..(c + 1) * n]
    }

    pub fn component_mut(&mut self, c: usize) -> &mut [f64] {
        let n = self.node_count();
        &mut self.data[c * n..(c + 1) * n]
    }
}

pub(crate) fn grid_node_count(dim: usize, shape: [usize; 3]) -> usize {
    shape[..dim].iter().product()
}

/// Symmetric tensor values sampled on a uniform periodic grid, one plane per
/// upper-triangular entry. Houses `T`, `eps(u)` and `eps(u_t + alpha u)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SymTensorField {
    dim: usize,
    shape: [usize; 3],
    data: Vec<f64>,
}

impl SymTensorField {
    pub fn zeros(dim: usize, shape: [usize; 3]) -> Self {
        assert!((1..=MAX_DIM).contains(&dim));
        let nodes = grid_node_count(dim, shape);
        SymTensorField { dim, shape, data: vec![0.0; sym_entry_count(dim) * nodes] }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn shape(&self) -> [usize; 3] {
        self.shape
    }

    pub fn node_count(&self) -> usize {
        grid_node_count(self.dim, self.shape)
    }

    pub fn entry_count(&self) -> usize {
        sym_entry_count(self.dim)
    }

    /// Grid plane of entry `(i, j)`, `i <= j`.
    pub fn plane(&self, i: usize, j: usize) -> &[f64] {
        let n = self.node_count();
        let e = upper_index(self.dim, i, j);
        &self.data[e * n..(e + 1) * n]
    }

    pub fn plane_mut(&mut self, i: usize, j: usize) -> &mut [f64] {
        let n = self.node_count();
        let e = upper_index(self.dim, i, j);
        &mut self.data[e * n..(e + 1) * n]
    }

    pub fn tensor_at(&self, node: usize) -> SymTensor {
        let n = self.node_count();
        let mut t = SymTensor::zero(self.dim);
        for e in 0..self.entry_count() {
            t.entries[e] = self.data[e * n + node];
        }
        t
    }

    pub fn set_tensor_at(&mut self, node: usize, t: &SymTensor) {
        assert_eq!(t.dim, self.dim);
        let n = self.node_count();
        for e in 0..self.entry_count() {
            self.data[e * n + node] = t.entries[e];
        }
    }

    /// Frobenius norm at every node.
    pub fn frobenius_plane(&self) -> Vec<f64> {
        let n = self.node_count();
        let mut out = vec![0.0; n];
        for i in 0..self.dim {
            for j in i..self.dim {
                let w = if i == j { 1.0 } else { 2.0 };
                let plane = self.plane(i, j);
                for (o, v) in out.iter_mut().zip(plane.iter()) {
                    *o += w * v * v;
                }
            }
        }
        for o in out.iter_mut() {
            *o = o.sqrt();
        }
        out
    }

    pub fn max_frobenius(&self) -> f64 {
        self.frobenius_plane().into_iter().fold(0.0, f64::max)
    }

    /// Pointwise `self : other` at every node.
    pub fn contract_plane(&self, other: &Self) -> Vec<f64> {
        assert_eq!(self.dim, other.dim);
        assert_eq!(self.shape, other.shape);
        let n = self.node_count();
        let mut out = vec![0.0; n];
        for i in 0..self.dim {
            for j in i..self.dim {
                let w = if i == j { 1.0 } else { 2.0 };
                let pa = self.plane(i, j);
                let pb = other.plane(i, j);
                for (o, (a, b)) in out.iter_mut().zip(pa.iter().zip(pb.iter())) {
                    *o += w * a * b;
                }
            }
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        assert_eq!(self.shape, other.shape);
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(other.data.iter()) {
            *a -= b;
        }
        out
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn tensor_2d(e: [f64; 3]) -> SymTensor {
        SymTensor::from_upper(2, &e)
    }

    #[test]
    fn frobenius_zero_and_diagonal() {
        assert_eq!(SymTensor::zero(2).frobenius(), 0.0);
        let t = tensor_2d([3.0, 0.0, 4.0]);
        assert_eq!(t.frobenius(), 5.0);
    }

    #[test]
    fn frobenius_counts_off_diagonal_twice() {
        let t = tensor_2d([0.0, 1.0, 0.0]);
        assert!((t.frobenius() - std::f64::consts::SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn contract_identity_gives_trace() {
        let id = SymTensor::identity(3);
        assert_eq!(id.contract(&id), 3.0);
        let t = SymTensor::from_upper(3, &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        assert_eq!(t.contract(&SymTensor::zero(3)), 0.0);
        assert!((id.contract(&t) - (1.0 + 4.0 + 6.0)).abs() < 1e-15);
    }

    #[test]
    #[should_panic(expected = "dimension mismatch")]
    fn contract_rejects_dim_mismatch() {
        let _ = SymTensor::zero(2).contract(&SymTensor::zero(3));
    }

    #[test]
    fn orthonormal_coords_roundtrip_and_preserve_contraction() {
        let t = SymTensor::from_upper(3, &[1.0, -0.5, 2.0, 0.25, 1.5, -3.0]);
        let c = t.to_orthonormal();
        let back = SymTensor::from_orthonormal(3, &c[..6]);
        for i in 0..3 {
            for j in 0..3 {
                assert!((t.get(i, j) - back.get(i, j)).abs() < 1e-15);
            }
        }
        let dot: f64 = c.iter().map(|x| x * x).sum();
        assert!((dot - t.contract(&t)).abs() < 1e-12);
    }

    #[test]
    fn tensor_field_plane_roundtrip() {
        let mut f = SymTensorField::zeros(2, [4, 4, 1]);
        let t = tensor_2d([1.0, 2.0, 3.0]);
        f.set_tensor_at(5, &t);
        assert_eq!(f.tensor_at(5), t);
        assert_eq!(f.tensor_at(4), SymTensor::zero(2));
        assert_eq!(f.plane(0, 1)[5], 2.0);
        assert!((f.max_frobenius() - t.frobenius()).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn contract_is_bilinear_and_symmetric(
            a in proptest::array::uniform3(-1e3f64..1e3),
            b in proptest::array::uniform3(-1e3f64..1e3),
            c in proptest::array::uniform3(-1e3f64..1e3),
            lam in -10.0f64..10.0,
        ) {
            let (ta, tb, tc) = (tensor_2d(a), tensor_2d(b), tensor_2d(c));
            prop_assert!((ta.contract(&tb) - tb.contract(&ta)).abs() <= 1e-9);
            let lhs = ta.scale(lam).add(&tb).contract(&tc);
            let rhs = lam * ta.contract(&tc) + tb.contract(&tc);
            prop_assert!((lhs - rhs).abs() <= 1e-6 * (1.0 + lhs.abs()));
        }

        #[test]
        fn cauchy_schwarz(
            a in proptest::array::uniform3(-1e3f64..1e3),
            b in proptest::array::uniform3(-1e3f64..1e3),
        ) {
            let (ta, tb) = (tensor_2d(a), tensor_2d(b));
            prop_assert!(ta.contract(&tb).abs() <= ta.frobenius() * tb.frobenius() * (1.0 + 1e-12));
        }
    }
}
