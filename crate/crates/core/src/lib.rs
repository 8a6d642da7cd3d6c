//! Exact solver and analysis toolkit for finite dynamic-reward MDPs: MDPs
//! whose reward function is indexed by a parameter θ that the agent's own
//! actions can change.

pub mod distribution;
pub mod error;
pub mod examples;
pub mod horizon;
pub mod influence;
pub mod learn;
pub mod model;
pub mod objectives;
pub mod pareto;
pub mod random;
pub mod rational;
pub mod report;
pub mod solvers;
pub mod spec;

pub use distribution::{ThetaWindow, TrajectoryDistribution};
pub use error::{Error, Result};
pub use horizon::{Progression, Regime};
pub use influence::{InfluenceOptions, InfluenceVerdict};
pub use model::{
    ActionIx, Builder, DrMdp, Limits, Pair, Policy, PolicyClass, StateIx, ThetaIx, Trajectory,
    Violation,
};
pub use objectives::{Interpretation, Objective};
pub use rational::Q;
pub use solvers::{Method, OptimalSet, SolveOptions, StationarySet};
pub use spec::{load_spec, save_spec};
