//! Numerical laboratory for the free Euler top and the mathematical pendulum.
//!
//! The two systems are implemented side by side in four calculi — classical,
//! delayed, fractional (Caputo), and stochastic — together with the
//! closed-form elliptic solutions of the top and the half-angle maps that
//! carry pendulum trajectories onto its level surfaces.
//!
//! * [`phase`] — states, vector fields, conserved functionals
//! * [`elliptic`] — complete elliptic integral and Jacobi sn/cn/dn (AGM)
//! * [`analytic`] — heteroclinic, elliptic-orbit, and libration solutions
//! * [`ode`] — fixed-step RK4 on uniform grids
//! * [`dde`] — delay systems by the method of steps with dense output
//! * [`fractional`] — Caputo systems via Adams-Bashforth-Moulton PECE
//! * [`stochastic`] — seeded Wiener paths, EM/Milstein/Heun, ensembles
//! * [`correspondence`] — pendulum ↔ top maps and residual certificates
//! * [`verify`] — named verification suites with machine-readable results
//! * [`cli`] — run configuration, dispatch, CSV output

// numeric kernels walk several parallel arrays with one counter; iterator
// rewrites would bury the stencil structure
#![allow(clippy::needless_range_loop)]

pub mod analytic;
pub mod cli;
pub mod correspondence;
pub mod dde;
pub mod elliptic;
pub mod fractional;
pub mod ode;
pub mod phase;
pub mod stochastic;
pub mod verify;
