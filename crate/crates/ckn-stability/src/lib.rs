//! Numerical toolkit for a family of weighted (Caffarelli–Kohn–Nirenberg type)
//! interpolation inequalities.
//!
//! The crate evaluates weighted Sobolev norms and inequality deficits of radial
//! and axisymmetric test functions, constructs the explicit two-parameter
//! minimizer families of the first- and second-order inequalities, projects
//! functions onto those families, and runs reproducible verification campaigns
//! for the associated stability inequalities, scaling laws and sharpness rates.
//!
//! Layout:
//! - [`params`]: parameter validation, regime classification and derived constants;
//! - [`numerics`]: quadrature for singular/improper weighted integrals, the Gamma
//!   function, and derivative-free 1D/2D minimization;
//! - [`profile`]: test functions and the explicit minimizer families;
//! - [`functionals`]: weighted norms, deficits, pointwise kernels and
//!   Euler–Lagrange residuals;
//! - [`transforms`]: the structural scaling / reduction / normalization maps;
//! - [`projection`]: distance to the minimizer manifolds and alignment functionals;
//! - [`experiments`]: corpus-driven verification campaigns and reports.
//!
//! Low-level numerical kernels are generic over the scalar type through
//! [`scalar::Real`]; everything above them is pinned to [`Scalar`] (`f64`),
//! which is the only width at which the toolkit's tolerances are meaningful.

pub mod error;
pub mod experiments;
pub mod functionals;
pub mod numerics;
pub mod params;
pub mod profile;
pub mod projection;
pub mod scalar;
pub mod transforms;

/// Concrete scalar used by the toolkit-level API.
pub type Scalar = f64;

pub use error::CknError;
pub use profile::{make_profile, make_profile2, MinimizerPoint, ProfileSpec, TestFunction};
pub use params::{derive_first_order, derive_second_order, Ckn2Params, CknParams};

