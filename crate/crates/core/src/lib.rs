//! Movable-antenna uplink with max-min fair rates: channel and MMSE models,
//! SCA pattern search, dual pattern discovery, time sharing and switching
//! plans.

pub mod baseline;
pub mod channel;
pub mod dual;
pub mod error;
pub mod isotonic;
pub mod mmse;
pub mod pipeline;
pub mod sca;
pub mod scenario;
mod simplex;
pub mod ssmt;
pub mod timeshare;

pub use baseline::{grid_oracle, static_optimal, x1_curve, GridObjective, StaticSolution};
pub use channel::{channel_vector, channel_vectors, ChannelVector, DeploymentPattern};
pub use dual::{discover_patterns, dual_function, DualState, PatternSet};
pub use error::{Error, Result};
pub use mmse::{mmse_sinr, rate_vector, RateVector};
pub use pipeline::{solve_ideal, solve_ssmt, solve_static, IdealSolution, SsmtSolution};
pub use sca::{sca_iterate, ScaTrace};
pub use scenario::{
    load_config, load_scenario, parse_config, reference_scenario, user_table_scenario, ArrayGeometry, Scenario,
    SolverConfig, UserSpec,
};
pub use ssmt::{plan_ssmt, PlanMode, SsmtPlan, SwitchSegment};
pub use timeshare::{allocate_time, TimeAllocation};

pub use nalgebra;
pub use num_complex;
