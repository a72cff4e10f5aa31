//! Spectral-element pressure Poisson solver with low-order overlapping
//! Schwarz preconditioners.
//!
//! The crate discretizes incompressible flow (and MHD in Elsässer variables)
//! with the P_N / P_{N-2} spectral element pairing on periodic rectangular
//! meshes. The pressure system `E p = D M^-1 D^T p = b` is solved with
//! right-preconditioned BiCGStab; the preconditioners are built from Q1
//! finite-element blocks on extended Gauss grids:
//!
//! * block Jacobi on the high-order element operator,
//! * restricted additive Schwarz (Dirichlet interface blocks),
//! * optimized restricted additive Schwarz with zeroth and second order
//!   transmission conditions, optionally inverted by fast diagonalization.
//!
//! Module map:
//!
//! | module        | contents                                              |
//! |---------------|-------------------------------------------------------|
//! | [`sem`]       | quadrature, 1D operators, mesh, fields, gather-scatter |
//! | [`pressure`]  | the pseudo-Laplacian and its right-hand side          |
//! | [`q1`]        | extended grids, Q1 matrices, restriction maps         |
//! | [`optimized`] | transmission parameters, FDM, optimized blocks        |
//! | [`precond`]   | BJ / RAS / ORAS composition                           |
//! | [`krylov`]    | BiCGStab with instrumentation                         |
//! | [`mhd`]       | Elsässer RK2 stepper                                  |
//! | [`experiment`]| run configuration, sweeps and CSV output              |

pub mod error;
pub mod experiment;
pub mod krylov;
pub mod mhd;
pub mod optimized;
pub mod precond;
pub mod pressure;
pub mod q1;
pub mod sem;

pub use error::{Error, Result};
pub use experiment::{run_experiment, run_single, ExperimentKind, ResultRow, RunConfig};
pub use krylov::{bicgstab, solve_pressure, KrylovOptions, KrylovReport};
pub use mhd::{MhdState, MhdStepper, PhysicalParams};
pub use optimized::{compute_params, t0_matrix, FdmBlock, TransmissionParams, TransmissionVariant};
pub use precond::{PrecondConfig, PrecondKind, Preconditioner, RobinSite};
pub use pressure::PseudoLaplacian;
pub use q1::{build_extended_grid, q1_matrices_1d, CornerMode, ExtendedGrid, MassKind, RestrictionMaps};
pub use sem::{Discretization, Mesh2D, OperatorSet1D, PressureField, Quadrature1D, VelocityField};
