//! Workload model: coverage kernel, workload decay and the derived
//! performance figures (coverage speed `v`, optimal time `T*`).

use std::f64::consts::PI;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::field::ScalarField;
use crate::geometry::{CellSet, RegionGrid};
use crate::{Error, Result, Vec2};

/// Coverage capacity `p(d) = P·e^{−λd}` for `d ≤ r`, zero beyond.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoverageKernel {
    /// Peak clearing rate (workload per area per time) at the agent.
    #[serde(rename = "P")]
    pub capacity: f64,
    /// Attenuation per unit length.
    pub lambda: f64,
    /// Effective coverage radius.
    pub r: f64,
}

impl CoverageKernel {
    pub fn validate(&self) -> Result<()> {
        if !(self.capacity > 0.0) {
            return Err(Error::param("P", "P must be positive"));
        }
        if !(self.lambda > 0.0) {
            return Err(Error::param("lambda", "lambda must be positive"));
        }
        if !(self.r > 0.0) {
            return Err(Error::param("r", "r must be positive"));
        }
        Ok(())
    }

    /// Clearing rate at distance `d` (assumed nonnegative).
    #[inline]
    pub fn rate(&self, d: f64) -> f64 {
        if d <= self.r {
            self.capacity * (-self.lambda * d).exp()
        } else {
            0.0
        }
    }
}

pub fn kernel_eval(k: &CoverageKernel, d: f64) -> Result<f64> {
    if !(d >= 0.0) {
        return Err(Error::param("d", format!("distance must be nonnegative, got {d}")));
    }
    Ok(k.rate(d))
}

/// Workload cleared per unit time by one stationary agent with nothing
/// clamped: the kernel integrated over its disc,
/// `2πP·(1 − e^{−λr}(1 + λr))/λ²`.
pub fn coverage_speed(k: &CoverageKernel) -> f64 {
    let x = k.lambda * k.r;
    if x < 1e-3 {
        // (1 − e^{−x}(1 + x))/x² = Σ_{n≥2} (−1)^n (n−1)/n! · x^{n−2}
        let mut sum = 0.0;
        let mut fact = 2.0;
        let mut pow = 1.0;
        for n in 2..10 {
            if n > 2 {
                fact *= n as f64;
                pow *= -x;
            }
            sum += (n - 1) as f64 / fact * pow;
        }
        2.0 * PI * k.capacity * k.r * k.r * sum
    } else {
        2.0 * PI * k.capacity * (1.0 - (-x).exp() * (1.0 + x)) / (k.lambda * k.lambda)
    }
}

/// Midpoint-rule version of [`coverage_speed`] on a square lattice of
/// spacing `h`.
pub fn coverage_speed_quadrature(k: &CoverageKernel, h: f64) -> f64 {
    let n = (k.r / h).ceil() as i64 + 1;
    let mut sum = 0.0;
    for i in -n..n {
        let x = (i as f64 + 0.5) * h;
        for j in -n..n {
            let y = (j as f64 + 0.5) * h;
            sum += k.rate(x.hypot(y));
        }
    }
    sum * h * h
}

/// Lower bound on completion time, `M(0) / (N·v)`.
pub fn optimal_time(initial_total: f64, agents: usize, speed: f64) -> Result<f64> {
    if agents == 0 {
        return Err(Error::NoAgents);
    }
    if !(speed > 0.0) {
        return Err(Error::param("v", "coverage speed must be positive"));
    }
    Ok(initial_total / (agents as f64 * speed))
}

/// One term `A·exp(−|x − c|²/w)` of an initial workload mixture.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianTerm {
    pub amplitude: f64,
    pub center: [f64; 2],
    pub width: f64,
}

impl GaussianTerm {
    pub fn eval(&self, p: Vec2) -> f64 {
        let c = Vec2::new(self.center[0], self.center[1]);
        self.amplitude * (-p.dist_sq(c) / self.width).exp()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgentState {
    pub id: usize,
    pub position: Vec2,
    /// Travel speed `V`.
    pub speed: f64,
    pub kernel: CoverageKernel,
}

/// Remaining workload `m(x, t)` on every masked-in cell.
#[derive(Debug, Clone)]
pub struct WorkloadField {
    field: ScalarField,
    initial_total: f64,
    total: f64,
    scratch: Vec<f64>,
    touched: Vec<usize>,
}

/// Workload removed by one coverage step.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StepDelta {
    pub removed: f64,
    /// `(grid index, workload·area removed)` for every cell that changed.
    pub cells: Vec<(usize, f64)>,
}

impl WorkloadField {
    pub fn new(field: ScalarField) -> Self {
        let total = field.integral();
        let n = field.cells().geometry().len();
        Self { field, initial_total: total, total, scratch: vec![0.0; n], touched: Vec::new() }
    }

    pub fn field(&self) -> &ScalarField {
        &self.field
    }

    pub fn cells(&self) -> &Arc<CellSet> {
        self.field.cells()
    }

    /// `M(0)` at construction.
    pub fn initial_total(&self) -> f64 {
        self.initial_total
    }

    /// Running total, updated incrementally by [`apply_coverage_step`].
    pub fn running_total(&self) -> f64 {
        self.total
    }

    pub fn at_cell(&self, grid_idx: usize) -> f64 {
        self.field.at_cell(grid_idx).unwrap_or(0.0)
    }

    /// Per-grid-cell values (zero outside the region), row-major.
    pub fn raster(&self) -> Vec<f64> {
        let g = self.cells().geometry();
        let mut out = vec![0.0; g.len()];
        for (&c, &v) in self.cells().members().iter().zip(self.field.values()) {
            out[c] = v;
        }
        out
    }

    pub fn max_over(&self, cells: &CellSet) -> f64 {
        cells.members().iter().map(|&c| self.at_cell(c)).fold(0.0, f64::max)
    }

    /// Grid cell with the largest workload in `cells`, ties to the lowest index.
    pub fn argmax_over(&self, cells: &CellSet) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for &c in cells.members() {
            let v = self.at_cell(c);
            if best.is_none_or(|(_, b)| v > b) {
                best = Some((c, v));
            }
        }
        best.map(|(c, _)| c)
    }
}

pub fn initial_workload(region: &RegionGrid, mixture: &[GaussianTerm]) -> Result<WorkloadField> {
    for term in mixture {
        if !(term.amplitude >= 0.0) {
            return Err(Error::param("amplitude", format!("amplitude must be nonnegative, got {}", term.amplitude)));
        }
        if !(term.width > 0.0) {
            return Err(Error::param("width", format!("width must be positive, got {}", term.width)));
        }
    }
    let field = ScalarField::from_fn(region.cells().clone(), |p| mixture.iter().map(|t| t.eval(p)).sum());
    Ok(WorkloadField::new(field))
}

/// Advances the workload by `dt`:
/// `m ← max(0, m − dt·Σ_i p_i(|x − s_i|))` on every cell.
pub fn apply_coverage_step(w: &mut WorkloadField, agents: &[AgentState], dt: f64) -> StepDelta {
    let cells = w.field.cells().clone();
    let g = *cells.geometry();
    let h = g.spacing;
    for a in agents {
        let r = a.kernel.r;
        let lo_x = (((a.position.x - r - g.origin.x) / h) - 0.5).floor().max(0.0) as usize;
        let lo_y = (((a.position.y - r - g.origin.y) / h) - 0.5).floor().max(0.0) as usize;
        let hi_x = ((((a.position.x + r - g.origin.x) / h) - 0.5).ceil().max(0.0) as usize).min(g.nx - 1);
        let hi_y = ((((a.position.y + r - g.origin.y) / h) - 0.5).ceil().max(0.0) as usize).min(g.ny - 1);
        for iy in lo_y..=hi_y {
            for ix in lo_x..=hi_x {
                let c = g.index(ix, iy);
                if !cells.contains(c) {
                    continue;
                }
                let rate = a.kernel.rate(g.center(c).dist(a.position));
                if rate > 0.0 {
                    if w.scratch[c] == 0.0 {
                        w.touched.push(c);
                    }
                    w.scratch[c] += rate;
                }
            }
        }
    }
    w.touched.sort_unstable();
    let area = g.spacing * g.spacing;
    let mut delta = StepDelta::default();
    for &c in &w.touched {
        let l = cells.local_index(c).expect("touched cells are members");
        let old = w.field.values()[l];
        let new = (old - dt * w.scratch[c]).max(0.0);
        w.scratch[c] = 0.0;
        if new != old {
            w.field.values_mut()[l] = new;
            let removed = (old - new) * area;
            delta.removed += removed;
            delta.cells.push((c, removed));
        }
    }
    w.touched.clear();
    w.total -= delta.removed;
    delta
}

/// Midpoint-rule integral of the workload over `cells` (whole region if `None`).
pub fn total_workload(w: &WorkloadField, cells: Option<&CellSet>) -> f64 {
    match cells {
        None => w.field.integral(),
        Some(cs) => cs.members().iter().map(|&c| w.at_cell(c)).sum::<f64>() * cs.cell_area(),
    }
}

/// Heat source `h = m / m̄` on `cells`, where `m̄` is the reference maximum
/// (the iteration's initial workload maximum over the same cells). A
/// vanishing reference gives a zero source.
pub fn heat_source(w: &WorkloadField, cells: &Arc<CellSet>, reference_max: f64) -> ScalarField {
    if reference_max <= 1e-12 {
        return ScalarField::zeros(cells.clone());
    }
    let values = cells.members().iter().map(|&c| w.at_cell(c) / reference_max).collect();
    ScalarField::new(cells.clone(), values)
}
