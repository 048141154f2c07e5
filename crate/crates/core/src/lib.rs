//! Probing-enhanced two-stage stochastic programs.
//!
//! The crate answers one question: which components of a random demand
//! vector are worth paying to observe before committing to a facility plan?
//! Given a probe set `S`, `F(S)` is the expected value of the best plan made
//! after seeing the probed demands, and the goal is `max_S F(S) - alpha(S)`.
//!
//! * [`instance`]: the facility location model, demand distributions, and
//!   all raw sampling and support enumeration.
//! * [`recourse`] and [`mip`]: closed-form second-stage revenue and an
//!   in-memory MIP model with an MPS writer.
//! * [`stochprog`]: exact two-stage solves (built-in or external solver)
//!   and the memo table for sampled subproblems.
//! * [`bounds`]: exact `F(S)`, probe costs and node bounds.
//! * [`sampling`]: SAA replications, nested-sampling upper bounds and
//!   statistical lower bounds.
//! * [`bnb`]: branch-and-bound over probe sets.
//! * [`heuristic`]: greedy probing with reused computations.
//! * [`mipgen`]: the nonanticipative big-M formulation.

pub mod bnb;
pub mod bounds;
pub mod error;
pub mod heuristic;
pub mod instance;
pub mod mip;
pub mod mipgen;
pub mod probe;
pub mod recourse;
pub mod rng;
pub mod sampling;
pub mod stats;
pub mod stochprog;
pub mod work;

pub use bnb::{run_bnb, BnbConfig, Branching, SearchMode, SearchReport, SearchStatus};
pub use bounds::{alpha, BoundEstimate, EstimateMode, FEvaluator, ProbeState, StateKind};
pub use error::{Error, Result};
pub use instance::{
    generate_instance, DemandDistribution, DistributionKind, Instance, SampleMode, SampleSpec, Scenario,
};
pub use probe::ProbeSet;
pub use recourse::FirstStageSolution;
pub use stochprog::{Backend, TwoStageResult};
pub use work::{WorkBudget, WorkCounter};
