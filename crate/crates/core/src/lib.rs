//! Numerical core for the degenerate semilinear Dirichlet problem
//!
//! ```text
//! -div(a(x) grad u) = f(u)   in Omega,
//!                 u = 0      on the boundary of Omega and on the zero set of a.
//! ```
//!
//! The crate is `no_std` (it only needs `alloc`) and contains every numerical
//! stage of the solver:
//!
//! - [`grid`]: uniform tensor grids over implicit domains,
//! - [`weights`]: weight evaluation, zero-set detection and admissibility
//!   diagnostics (Muckenhoupt A2 estimate, `L^t` norms of `1/a`),
//! - [`topology`]: connected components of the domain minus the zero set,
//! - [`spectral`]: first Dirichlet eigenpair and the slope/eigenvalue gate,
//! - [`energy`]: truncated nonlinearity, discrete energy and its minimizer,
//! - [`multibump`]: zero extension of bumps and subset enumeration,
//! - [`verify`]: discrete weak residuals and solution diagnostics.
//!
//! File formats, configuration and the command line live in the companion
//! `multibump` crate.

#![cfg_attr(not(test), no_std)]
#![warn(missing_debug_implementations)]

extern crate alloc;

mod error;
mod linalg;
mod math;

pub mod energy;
pub mod grid;
pub mod multibump;
pub mod spectral;
pub mod topology;
pub mod verify;
pub mod weights;

pub use error::{Error, Hypothesis, Result};
pub use linalg::CgStats;

pub mod prelude {
    pub use crate::energy::{
        assemble_energy, minimize_energy, primitive_f, truncate_nonlinearity, BumpSolution, DiscreteEnergy,
        NonlinearityKind, NonlinearitySpec, SolverOptions, TruncatedNonlinearity,
    };
    pub use crate::grid::{build_grid, DomainSpec, Grid, NodeClass};
    pub use crate::multibump::{compose_bumps, enumerate_all, extend_bump, EnumerationOptions, MultiBumpSolution};
    pub use crate::spectral::{check_hypothesis_f2, dirichlet_lambda1, EigenOptions, EigenPair, F2Entry};
    pub use crate::topology::{decompose_components, Component, ComponentId, Decomposition};
    pub use crate::verify::{check_conclusions, weak_residual, VerificationReport, VerifyTolerances};
    pub use crate::weights::{
        assess_admissibility, detect_zero_set, estimate_a2_constant, estimate_lt_norm, evaluate_weight,
        AdmissibilityOptions, AdmissibilityReport, Verdict, WeightField, WeightSpec, ZeroSet,
    };
    pub use crate::{Error, Hypothesis, Result};
}
