use serde::Serialize;

use super::Algorithm;

/// One sampled point of the workload curve.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveSample {
    pub t: f64,
    pub k: usize,
    /// `M(t)` recomputed from the raster.
    pub total: f64,
    /// `M(t)` tracked incrementally step by step.
    pub running: f64,
    /// Workload on each agent's current subregion (nearest-agent cells when
    /// the algorithm keeps no partition).
    pub per_agent: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectoryRow {
    pub t: f64,
    pub k: usize,
    /// 1-based agent id.
    pub agent: usize,
    pub x: f64,
    pub y: f64,
    pub mode: &'static str,
    /// `‖u‖` of the step that led here.
    pub speed: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EventKind {
    IterationStart { k: usize },
    IterationEnd { k: usize, reason: IterationEndReason, finisher: Option<usize> },
    MaximalUpdate { k: usize, agent: usize },
    MeshUnavailable { k: usize, agent: usize, error: String },
    Capture { agent: usize, triangle: usize },
    SubregionDone { agent: usize },
    Handoff { agent: usize, from: usize, into_region_of: usize, x: f64, y: f64 },
    Completed,
    MaxSteps,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Event {
    pub t: f64,
    pub step: usize,
    #[serde(flatten)]
    pub kind: EventKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum IterationEndReason {
    /// Total workload reached the completion threshold.
    Completed,
    /// An agent cleared its subregion.
    Finished,
    /// The step cap was hit.
    MaxSteps,
    /// No workload decreased for `stall_steps` consecutive steps.
    Stalled,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationRecord {
    pub k: usize,
    pub start: f64,
    pub end: f64,
    pub reason: IterationEndReason,
    /// 0-based id of the agent whose subregion triggered the handoff.
    pub finisher: Option<usize>,
    pub remaining: f64,
    pub solves: usize,
}

/// A temperature snapshot of one agent's subregion, row-major with `None`
/// outside the subregion.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSnapshot {
    pub k: usize,
    pub agent: usize,
    pub t: f64,
    pub values: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    pub algorithm: Algorithm,
    pub completed: bool,
    /// Actual coverage time `T` (time at stop when not completed).
    pub t: f64,
    /// Optimal time `T*`.
    pub t_star: f64,
    /// `T − T*`.
    pub delta_t: f64,
    pub initial_total: f64,
    pub final_total: f64,
    pub coverage_speed: f64,
    pub steps: usize,
    pub solver_calls: usize,
    pub iterations: Vec<IterationRecord>,
    /// `(t, M(t))` after every step, starting at `t = 0`.
    pub m_curve: Vec<(f64, f64)>,
    pub samples: Vec<CurveSample>,
    pub trajectory: Vec<TrajectoryRow>,
    pub events: Vec<Event>,
    /// Grid layout `(nx, ny)` for the rasters below.
    pub grid: (usize, usize),
    pub initial_raster: Vec<f64>,
    pub final_raster: Vec<f64>,
    /// Label raster per iteration (1-based owners, −1 outside).
    pub partitions: Vec<(usize, Vec<i64>)>,
    pub field_snapshots: Vec<FieldSnapshot>,
}

impl RunSummary {
    /// Whether `M(t)` never increases along the per-step curve.
    pub fn curve_is_monotone(&self) -> bool {
        self.m_curve.windows(2).all(|w| w[1].1 <= w[0].1)
    }
}
