//! Spectral Galerkin solver for a strain-limiting viscoelastic wave system
//! on the periodic unit box.
//!
//! The model couples the momentum balance `u_tt = div T + f` with the
//! implicit constitutive relation `eps(u_t + alpha u) = F_n(T)`, where
//!
//! ```text
//! F(T)   = (1 + |T|^a)^(-1/a) T
//! F_n(T) = F(T) + T / (n (1 + |T|^(1 - 1/n)))
//! ```
//!
//! `F` is bounded (`|F(T)| < 1`), which limits the strain a priori; the
//! regularisation index `n` makes the map a bijection of the symmetric
//! tensors, so the pointwise inversion `T = F_n^{-1}(eps(u_t + alpha u))`
//! closes the Galerkin dynamics.
//!
//! The crate mirrors that pipeline: [`tensors`] holds symmetric tensor
//! values and grid fields, [`constitutive`] the radial maps, inverses,
//! Jacobians and inequality oracles, [`spectral`] the zero-mean
//! trigonometric basis and its calculus, [`solver`] the coefficient ODE and
//! time stepping, [`diagnostics`] the monitored quantities, [`mms`] the
//! manufactured-solution harness, [`checkpoint`] the bit-exact binary
//! formats, and [`cli`] configuration, drivers and file output.

pub mod checkpoint;
pub mod cli;
pub mod constitutive;
pub mod diagnostics;
pub mod mms;
pub mod solver;
pub mod spectral;
pub mod tensors;

pub use constitutive::{ConstitutiveParams, Regularisation};
pub use solver::{ForceSpec, InitialData, RunOptions, SolverState, TimeIntegrator};
pub use spectral::{SpectralConfig, SpectralField};
pub use tensors::{SymTensor, SymTensorField, VectorGridField};
