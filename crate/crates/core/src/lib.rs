//! Equilibrium solver and simulator for an investor's voluntary-disclosure game.
//!
//! An investor who may hold two signals about a firm, `r` and `x` with firm
//! value `θ = r·x`, trades before and after deciding what to disclose. This
//! crate solves the disclosure thresholds of the baseline game and of the
//! firm-response extension, derives report statistics and comparative
//! statics, and checks the equilibria by exact deviation enumeration and
//! Monte Carlo simulation.

pub mod baseline;
pub mod comparative;
pub mod deviation;
pub mod dist;
pub mod error;
pub mod extension;
pub mod figures;
pub mod quad;
pub mod root;
pub mod sim;

pub use baseline::{
    report_stats, solve_baseline, strategy, verify_bayes, vol_elaborate, vol_simple, Action, Case,
    Equilibrium, Message, ModelParams, Position, ReportStats, DEFAULT_TOL,
};
pub use comparative::{
    ext_sensitivity_analytic, ext_sensitivity_fd, sensitivity_analytic, sensitivity_fd,
    stats_sensitivity_analytic, stats_sensitivity_fd, ExtSensitivity, Method, StatsSensitivity,
    ThresholdSensitivity,
};
pub use deviation::{deviation_check, ext_deviation_check, DeviationTable, InvestorState};
pub use dist::{make_normal, RDistribution, XDist, XDistribution};
pub use error::{Error, Result};
pub use extension::{
    firm_strategy, solve_extension, solve_r_bar, ExtCase, ExtEquilibrium, ExtParams, FirmAction,
    RBar,
};
pub use sim::{simulate, SimConfig, SimModel, SimReport};
