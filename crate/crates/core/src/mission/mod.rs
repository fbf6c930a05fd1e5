//! Mission orchestration: fixed-partition coverage, iterated partition with
//! handoffs and maximal update, and the centralized single-field baseline.
//!
//! Every algorithm advances in synchronous lockstep. Per step the agents'
//! controllers run (in parallel, each touching only its own state), then the
//! shared workload is decayed once at the new positions, then metrics are
//! recorded.

mod config;
mod record;
mod sim;

pub use config::{AgentsConfig, Algorithm, MissionConfig, MissionParams, OutputConfig};
pub use record::{
    CurveSample, Event, EventKind, FieldSnapshot, IterationEndReason, IterationRecord, RunSummary,
    TrajectoryRow,
};
pub use sim::{handoff_target, run_mission, run_mission_observed, run_mission_with_threads, StepView};
