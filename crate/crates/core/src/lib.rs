//! Spectral solver and verification tools for 2D incompressible
//! Navier–Stokes on the half-plane `T x R+`, in vorticity form.

pub mod biot_savart;
pub mod dense;
pub mod field;
pub mod harness;
pub mod io;
pub mod kernels;
pub mod norms;
pub mod quad;
pub mod real;
pub mod solvers;
pub mod verify;

pub use num_complex::Complex64 as C64;

pub use field::{make_grid, ModeField, RunConfig, VorticityState, YGrid};
pub use real::Real;



/// Alternative boundary weight at double precision.
pub type ExpWeight = field::ExpWeight<f64>;
