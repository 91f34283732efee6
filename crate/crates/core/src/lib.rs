//! Numerical toolkit for the focusing power NLS `i u_t + Δu + |u|^{p−1}u = 0`
//! in the mass-supercritical, energy-subcritical regime.
//!
//! Every routine is generic over the scalar type through [`Real`]; the
//! `*64` aliases below fix `f64`, which is what the tolerances in the test
//! suites are calibrated for.

pub mod dichotomy;
pub mod error;
pub mod evolve;
pub mod field;
pub mod grid;
pub mod groundstate;
pub mod invariants;
pub mod io;
pub mod modulation;
pub mod params;
pub mod scalar;
pub mod transform;
pub mod virial;

pub use dichotomy::{classify, lambda_roots, DichotomyReport, Verdict};
pub use error::{Error, Result};
pub use evolve::{evolve, evolve_observed, step, EvolveOptions, Scheme, EvolveOutcome, Termination, TrajectoryRecord};
pub use field::Field;
pub use grid::Grid;
pub use groundstate::{
    gn_check, sharp_gn_constant, soliton_1d_closed_form, solve_ground_state, GroundState,
    Normalization, SolverOptions,
};
pub use invariants::{conserved, ConservedQuantities};
pub use modulation::{fit, fit_unscaled, hypotheses_check, ModulationFit};
pub use params::ProblemParams;
pub use scalar::Real;
pub use transform::{galilean_boost, mass_rescale, zero_momentum_frame};
pub use virial::{
    gamma_window, local_virial, make_cutoff, tb_localized, tb_radial, tb_variance, variance,
    variance_rate, LocalizationConstants, VirialReport,
};

pub type Params64 = ProblemParams<f64>;
pub type Grid64 = Grid<f64>;
pub type Field64 = Field<f64>;
pub type GroundState64 = GroundState<f64>;
pub type Params32 = ProblemParams<f32>;
pub type Grid32 = Grid<f32>;
pub type Field32 = Field<f32>;
pub type GroundState32 = GroundState<f32>;
