use serde::{Deserialize, Serialize};

use crate::coverage::{CoverageKernel, GaussianTerm};
use crate::field::FieldParams;
use crate::geometry::RegionSpec;
use crate::{Error, Result, Vec2};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Algorithm {
    /// Fixed Voronoi partition, real-time field updates only.
    #[serde(rename = "algo1")]
    Algo1,
    /// Iterated partition with handoffs and maximal update.
    #[serde(rename = "algo3")]
    Algo3,
    /// One global field shared by all agents, no partition.
    #[serde(rename = "centralized")]
    Centralized,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::Centralized, Algorithm::Algo1, Algorithm::Algo3];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Algo1 => "algo1",
            Algorithm::Algo3 => "algo3",
            Algorithm::Centralized => "centralized",
        }
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentsConfig {
    /// Initial positions; their count is the number of agents.
    #[serde(default)]
    pub positions: Vec<[f64; 2]>,
    /// When set (and `positions` is empty) this many agents are placed
    /// uniformly at random in the region using the mission seed.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub random_count: Option<usize>,
    /// Travel speed `V`.
    pub speed: f64,
    pub kernel: CoverageKernel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MissionParams {
    #[serde(default = "MissionParams::default_algorithm")]
    pub algorithm: Algorithm,
    #[serde(default = "MissionParams::default_dt")]
    pub dt: f64,
    /// Real-time update duration per iteration.
    #[serde(default = "MissionParams::default_t_u")]
    pub t_u: f64,
    /// Optional per-iteration real-time durations; iteration `k` (1-based)
    /// uses entry `k − 1`, falling back to `t_u` past the end.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub t_u_schedule: Vec<f64>,
    #[serde(default = "MissionParams::default_k_max")]
    pub k_max: usize,
    /// Completion threshold on the total workload.
    #[serde(default = "MissionParams::default_eps_m")]
    pub eps_m: f64,
    #[serde(default = "MissionParams::default_max_steps")]
    pub max_steps: usize,
    /// Seed for random agent placement; at most `i64::MAX` (TOML integers
    /// are signed).
    #[serde(default)]
    pub seed: u64,
    /// Longest triangle edge for maximal-update meshes; defaults to 0.9·r.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mesh_max_edge: Option<f64>,
    /// Steps without any workload decrease after which an iteration is
    /// abandoned.
    #[serde(default = "MissionParams::default_stall_steps")]
    pub stall_steps: usize,
}

impl Default for MissionParams {
    fn default() -> Self {
        Self {
            algorithm: Self::default_algorithm(),
            dt: Self::default_dt(),
            t_u: Self::default_t_u(),
            t_u_schedule: Vec::new(),
            k_max: Self::default_k_max(),
            eps_m: Self::default_eps_m(),
            max_steps: Self::default_max_steps(),
            seed: 0,
            mesh_max_edge: None,
            stall_steps: Self::default_stall_steps(),
        }
    }
}

impl MissionParams {
    fn default_algorithm() -> Algorithm {
        Algorithm::Algo3
    }
    fn default_dt() -> f64 {
        0.1
    }
    fn default_t_u() -> f64 {
        500.0
    }
    fn default_k_max() -> usize {
        7
    }
    fn default_eps_m() -> f64 {
        1e-3
    }
    fn default_max_steps() -> usize {
        100_000
    }
    fn default_stall_steps() -> usize {
        1000
    }

    /// Real-time update duration of iteration `k` (1-based).
    pub fn t_u_for(&self, k: usize) -> f64 {
        self.t_u_schedule.get(k.wrapping_sub(1)).copied().unwrap_or(self.t_u)
    }
}

/// Which artifacts a run writes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "OutputConfig::default_dir")]
    pub directory: String,
    #[serde(default = "yes")]
    pub summary: bool,
    #[serde(default = "yes")]
    pub workload_curve: bool,
    #[serde(default = "yes")]
    pub trajectory: bool,
    /// Initial/final workload and per-iteration partition rasters.
    #[serde(default)]
    pub rasters: bool,
    /// Temperature snapshots at every iteration start.
    #[serde(default)]
    pub field_snapshots: bool,
    /// Record every n-th step in the curve and trajectory files.
    #[serde(default = "OutputConfig::default_stride")]
    pub sample_stride: usize,
}

fn yes() -> bool {
    true
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            directory: Self::default_dir(),
            summary: true,
            workload_curve: true,
            trajectory: true,
            rasters: false,
            field_snapshots: false,
            sample_stride: Self::default_stride(),
        }
    }
}

impl OutputConfig {
    fn default_dir() -> String {
        "out".to_string()
    }
    fn default_stride() -> usize {
        10
    }
}

/// Everything a mission run needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MissionConfig {
    pub region: RegionSpec,
    #[serde(default)]
    pub workload: Vec<GaussianTerm>,
    pub agents: AgentsConfig,
    #[serde(default)]
    pub field: FieldParams,
    #[serde(default)]
    pub mission: MissionParams,
    #[serde(default)]
    pub output: OutputConfig,
}

impl MissionConfig {
    pub fn num_agents(&self) -> usize {
        if self.agents.positions.is_empty() {
            self.agents.random_count.unwrap_or(0)
        } else {
            self.agents.positions.len()
        }
    }

    pub fn mesh_max_edge(&self) -> f64 {
        self.mission.mesh_max_edge.unwrap_or(0.9 * self.agents.kernel.r)
    }

    /// Per-subregion completion threshold: an even share of `eps_m`, so a
    /// fully finished partition also meets the global threshold.
    pub fn eps_region(&self) -> f64 {
        self.mission.eps_m / self.num_agents().max(1) as f64
    }

    pub fn explicit_positions(&self) -> Vec<Vec2> {
        self.agents.positions.iter().map(|p| Vec2::new(p[0], p[1])).collect()
    }

    /// Checks every parameter invariant that does not need the region.
    pub fn validate(&self) -> Result<()> {
        self.agents.kernel.validate()?;
        self.field.validate()?;
        if !(self.region.spacing > 0.0) {
            return Err(Error::InvalidSpacing(self.region.spacing));
        }
        if self.num_agents() == 0 {
            return Err(Error::NoAgents);
        }
        if !self.agents.positions.is_empty() && self.agents.random_count.is_some() {
            return Err(Error::param("random_count", "give either positions or random_count, not both"));
        }
        if !(self.agents.speed > 0.0) {
            return Err(Error::param("speed", "speed must be positive"));
        }
        let m = &self.mission;
        if !(m.dt > 0.0) {
            return Err(Error::param("dt", "dt must be positive"));
        }
        if !(m.t_u >= 0.0) || m.t_u_schedule.iter().any(|t| !(*t >= 0.0)) {
            return Err(Error::param("t_u", "t_u must be nonnegative"));
        }
        if m.k_max == 0 {
            return Err(Error::param("k_max", "k_max must be at least 1"));
        }
        if !(m.eps_m >= 0.0) {
            return Err(Error::param("eps_m", "eps_m must be nonnegative"));
        }
        if m.seed > i64::MAX as u64 {
            return Err(Error::param("seed", "seed must fit a signed 64-bit integer"));
        }
        if m.max_steps == 0 {
            return Err(Error::param("max_steps", "max_steps must be positive"));
        }
        if m.stall_steps == 0 {
            return Err(Error::param("stall_steps", "stall_steps must be positive"));
        }
        let max_edge = self.mesh_max_edge();
        if !(max_edge < self.agents.kernel.r) {
            return Err(Error::MeshEdgeTooLong { max_edge, radius: self.agents.kernel.r });
        }
        if !(max_edge > 0.0) {
            return Err(Error::param("mesh_max_edge", "mesh_max_edge must be positive"));
        }
        if self.output.sample_stride == 0 {
            return Err(Error::param("sample_stride", "sample_stride must be positive"));
        }
        for term in &self.workload {
            if !(term.amplitude >= 0.0) {
                return Err(Error::param("amplitude", "amplitude must be nonnegative"));
            }
            if !(term.width > 0.0) {
                return Err(Error::param("width", "width must be positive"));
            }
        }
        Ok(())
    }
}
