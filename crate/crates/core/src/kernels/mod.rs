//! Fourier-type kernels and their population transforms.

mod functions;
mod params;
mod quadrature;

pub use functions::{eta_kernel, g_pop, psi_pop, varphi};
pub use params::{kernel_params, GridPoint, KernelParams, GRID_ACTIVATION};
pub use quadrature::{integrate, ABS_TOL, MAX_PANELS};
