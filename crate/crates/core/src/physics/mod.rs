//! Single-physics flow operators and the coupled reference solvers that
//! produce ground-truth trajectories.
//!
//! Every flow is a pure function `(u, t) -> u(t)` on a periodic grid. Linear
//! terms are propagated exactly in Fourier space; nonlinear terms use
//! integrating-factor RK4 ([`combined_eq_flow`], [`grayscott_flow`]) or the
//! implicit midpoint rule ([`euler_flow`], [`navier_stokes_reference`]).

mod combined;
mod grayscott;
mod linear;
mod operator;
mod params;
mod stepper;
mod vorticity;

pub use combined::combined_eq_flow;
pub use grayscott::{grayscott_flow, GrayScott, GS_DIFFUSION_A, GS_DIFFUSION_B};
pub use linear::{advdiff_exact_flow, diffusion2d_flow, linear_1d_flow};
pub use operator::{perturb_operator, Flow, FlowOperator};
pub use params::{format_coefficients, parse_coefficients, Coeff, Coefficients, PhysicsKind, PhysicsParams, SolverConfig};
pub use vorticity::{enstrophy, euler_flow, kinetic_energy, navier_stokes_reference, vorticity_flow};
