//! Weighted sum-rate maximization over rate regions described by a nonlinear
//! spectral-radius constraint `rho_G(e^r - 1) <= 1`.
//!
//! The main pieces:
//!
//! * [`perron`]: spectral radius and Perron vectors of positive matrices.
//! * [`specrad`]: the max-of-linear family `G`, its radius and subgradients.
//! * [`hsd`]: rate-domain and SINR-domain hybrid steepest descent solvers.
//! * [`recover`]: transmit powers that realize a rate vector.
//! * [`scenario`]: synthetic cell-less uplink instances and problem files.
//! * [`diagnostics`]: inverse-Z and sampled convexity checks.
//! * [`wmmse`]: WMMSE baseline.

// NaN must fail every positivity check, hence `!(x > 0.0)` throughout.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod diagnostics;
pub mod error;
pub mod hsd;
pub mod matrix;
pub mod perron;
pub mod recover;
pub mod scenario;
pub mod specrad;
pub mod wmmse;

pub use error::{Error, Result};
pub use hsd::{solve_rate, solve_sinr, IterTrace, SolverConfig};
pub use matrix::Matrix;
pub use perron::{is_inverse_z, perron_pair, spectral_radius, PerronPair, PositiveMatrix};
pub use recover::{achieved_rates, recover_power, InterferenceModel, RecoverOptions, RecoveredSolution};
pub use scenario::{generate_problem, ScenarioParams, UatFProblem};
pub use specrad::MaxLinearFamily;
pub use wmmse::wmmse_solve;
