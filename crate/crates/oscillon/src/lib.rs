//! Pseudo-spectral simulator and verification harness for the damped
//! nonlinear wave equation
//!
//! ```text
//!     ∂tt u + H ∂t u + e^{-2Ht} A u + φ(u) = 0,    A = -∂xx on (0,1), periodic
//! ```
//!
//! with a polynomial potential V (φ = V′) and Hubble damping H > 0. The crate
//! derives the explicit dissipativity constants of the energy estimates from
//! the potential's growth certificate, advances trajectories with an
//! unconditionally stable exact propagator for the linear part, and provides
//! experiment drivers that check every quantitative estimate numerically
//! (dissipative bound, pullback/forward decay, decomposition lemmas,
//! conservation law, box-counting dimension of end-state clouds).

pub mod potential;
pub mod spectral;

pub use potential::{
    builtin, derive_constants, verify_growth, BuiltinName, BuiltinPotential, CertifiedPotential,
    GrowthCertificate, GrowthVerdict, Potential, PotentialError, PotentialPart, RateConstants,
};
pub use spectral::{
    apply_a, energy_x, lq_norm, mean_split, norm_xt, norm_yt, norms, APower, Field, Grid, Norms,
    SpectralError, Spectrum, State,
};

pub mod dynamics;
pub mod oracle;

pub use dynamics::{
    apply_process, evolve, linear_propagate_exact, phi_field, pullback_horizon, rhs, step,
    DynamicsError, Method, Problem, StepperConfig,
};
pub use oracle::{fd_solve, mode_ode_solve, FdGrid, OracleError};

pub mod diagnostics;
pub mod init;
pub mod pullback;

pub use diagnostics::{
    energy_density, hamiltonian_total, identity_residual, localization_metric, DiagnosticsError,
    DiagnosticsRow, EnergyDensityFrame, MomentumConvention, Recorder, TrajectoryRecord,
};
pub use init::{make_initial, rescale_to_energy, InitError, InitKind};
pub use pullback::{
    box_dimension_estimate, decay_fit, decomposition_run, dissipative_check, forward_decay_check,
    geometric_eps_grid, pullback_convergence, truncate_state, DecayFit, DimensionCloud,
    DimensionEstimate, DissipativeReport, PullbackError, PullbackRun,
};

pub mod cli;
