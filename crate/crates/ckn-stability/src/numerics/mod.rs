//! Scalar-generic numerical kernels: Gamma function, weighted quadrature on
//! the half-line and over axisymmetric domains, and 1D/2D minimization.

mod gamma;
mod optimize;
mod quad;

pub use gamma::{gamma_fn, sphere_area};
pub use optimize::{minimize_2d, minimize_scalar, OptimizeResult};
pub use quad::{
    integrate_axisym, integrate_radial, integrate_segment, integrate_tail, Integral,
    QuadratureSpec, TailCutoff,
};
