//! Agent motion: the normalised-gradient control law, Euler stepping with
//! projection onto the agent's cell set, and the two field-update regimes.

use std::sync::Arc;

use crate::coverage::{heat_source, AgentState, WorkloadField};
use crate::field::{local_maxima, HeatSolver, ScalarField};
use crate::geometry::{locate_triangle, CellSet, TriMesh};
use crate::{Error, Result, Vec2};

/// Gradient norms at or below this count as zero (the agent holds).
/// Gradients below this fraction of `max|T|/h` are rounding noise.
pub const ZERO_GRADIENT: f64 = 1e-12;

/// `V·∇T/‖∇T‖` at `s`, or zero where the gradient vanishes.
pub fn control_input(field: &ScalarField, s: Vec2, speed: f64) -> Vec2 {
    let floor = ZERO_GRADIENT * field.max_abs() / field.cells().geometry().spacing;
    direction(field.gradient(s), speed, floor)
}

fn direction(g: Vec2, speed: f64, floor: f64) -> Vec2 {
    let n = g.norm();
    if n == 0.0 || n <= floor {
        Vec2::ZERO
    } else {
        g * (speed / n)
    }
}

/// Euler step `s + dt·u`, projected back onto the nearest point of a member
/// cell of `cells` when the step leaves the set.
pub fn step_agent(agent: &AgentState, u: Vec2, dt: f64, cells: &CellSet) -> Result<AgentState> {
    let target = agent.position + u * dt;
    let position = project(target, cells, (2.0 * cells.geometry().spacing).max(dt * u.norm()))?;
    Ok(AgentState { position, ..*agent })
}

/// Nearest point to `p` inside a member cell, searching within `reach`.
pub fn project(p: Vec2, cells: &CellSet, reach: f64) -> Result<Vec2> {
    let g = cells.geometry();
    if g.cell_at(p).is_some_and(|c| cells.contains(c)) {
        return Ok(p);
    }
    let h = g.spacing;
    let span = (reach / h).ceil() as i64 + 1;
    let cx = ((p.x - g.origin.x) / h).floor() as i64;
    let cy = ((p.y - g.origin.y) / h).floor() as i64;
    let inset = 1e-9 * h;
    let mut best: Option<(f64, Vec2)> = None;
    for iy in (cy - span)..=(cy + span) {
        for ix in (cx - span)..=(cx + span) {
            if ix < 0 || iy < 0 || ix >= g.nx as i64 || iy >= g.ny as i64 {
                continue;
            }
            let c = g.index(ix as usize, iy as usize);
            if !cells.contains(c) {
                continue;
            }
            let x0 = g.origin.x + ix as f64 * h;
            let y0 = g.origin.y + iy as f64 * h;
            let q = Vec2::new(p.x.clamp(x0 + inset, x0 + h - inset), p.y.clamp(y0 + inset, y0 + h - inset));
            let d = q.dist(p);
            if d <= reach && best.is_none_or(|(bd, _)| d < bd) {
                best = Some((d, q));
            }
        }
    }
    best.map(|(_, q)| q).ok_or(Error::Projection { x: p.x, y: p.y })
}

/// Center of the cell two moves ahead of `p` on a shortest path through
/// `domain` to the cell `goal` (8-connected, no corner cutting). Ties go to
/// the lowest cell index.
pub fn path_waypoint(domain: &CellSet, p: Vec2, goal: usize) -> Vec2 {
    let g = domain.geometry();
    let mut dist = vec![u32::MAX; g.len()];
    let mut queue = std::collections::VecDeque::from([goal]);
    dist[goal] = 0;
    let moves = |c: usize| {
        let (ix, iy) = g.coords(c);
        g.neighbors8(c).filter(move |&n| {
            if !domain.contains(n) {
                return false;
            }
            let (jx, jy) = g.coords(n);
            // A diagonal move needs both orthogonal cells.
            jx == ix || jy == iy || (domain.contains(g.index(jx, iy)) && domain.contains(g.index(ix, jy)))
        })
    };
    while let Some(c) = queue.pop_front() {
        for n in moves(c) {
            if dist[n] == u32::MAX {
                dist[n] = dist[c] + 1;
                queue.push_back(n);
            }
        }
    }
    let start = match g.cell_at(p).filter(|&c| domain.contains(c)) {
        Some(c) => c,
        None => domain
            .members()
            .iter()
            .copied()
            .min_by(|&a, &b| g.center(a).dist_sq(p).total_cmp(&g.center(b).dist_sq(p)))
            .unwrap_or(goal),
    };
    let mut c = start;
    for _ in 0..2 {
        if c == goal || dist[c] == u32::MAX {
            break;
        }
        c = moves(c).min_by_key(|&n| (dist[n], n)).expect("a reachable cell has a closer neighbour");
    }
    g.center(c)
}

/// Straight move of at most `V·dt` toward the next waypoint to the hottest
/// cell of `field`, through the whole domain.
fn travel(agent: &AgentState, field: &ScalarField, domain: &CellSet, dt: f64) -> Result<(Vec2, AgentState)> {
    let members = field.cells().members();
    let (best, _) = field
        .values()
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |b, (l, &v)| if v > b.1 { (l, v) } else { b });
    let waypoint = path_waypoint(domain, agent.position, members[best]);
    let d = waypoint - agent.position;
    let len = d.norm();
    if len == 0.0 {
        return Ok((Vec2::ZERO, *agent));
    }
    let u = d * (agent.speed / len);
    let target = agent.position + d * (dt * agent.speed / len).min(1.0);
    let position = project(target, domain, 2.0 * domain.geometry().spacing + dt * agent.speed)?;
    Ok((u, AgentState { position, ..*agent }))
}

/// One controller move on `field`: gradient ascent inside the agent's own
/// cells; travel toward the hottest cell when the agent is outside them or
/// the gradient vanishes (the heat sits in a part of the set the agent's
/// component does not touch).
pub fn pursue(agent: &AgentState, field: &ScalarField, ctx: &FieldContext, dt: f64) -> Result<(Vec2, AgentState)> {
    let cells = ctx.cells();
    let inside = cells.contains_point(agent.position);
    if field.max_abs() == 0.0 {
        return Ok((Vec2::ZERO, *agent));
    }
    if inside {
        let u = control_input(field, agent.position, agent.speed);
        if u != Vec2::ZERO {
            return Ok((u, step_agent(agent, u, dt, cells)?));
        }
    }
    travel(agent, field, &ctx.domain, dt)
}

/// Per-agent field context for one iteration.
#[derive(Debug, Clone)]
pub struct FieldContext {
    pub solver: Arc<HeatSolver>,
    /// Normalising maximum of the iteration's initial workload on the cells.
    pub reference_max: f64,
    /// Cells the agent may cross when travelling outside its own set.
    pub domain: Arc<CellSet>,
}

impl FieldContext {
    pub fn cells(&self) -> &Arc<CellSet> {
        self.solver.cells()
    }

    pub fn solve(&self, workload: &WorkloadField) -> Result<ScalarField> {
        let source = heat_source(workload, self.cells(), self.reference_max);
        if source.values().iter().all(|&v| v == 0.0) {
            // The unique solution for a zero source.
            return Ok(source);
        }
        self.solver.solve(&source)
    }
}

/// Result of one controller call.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub agent: AgentState,
    pub u: Vec2,
    /// Number of field solves performed.
    pub solves: usize,
    /// The agent sits in a captured local-maximum triangle.
    pub captured: bool,
    /// The frozen field had no local maximum left to chase.
    pub done: bool,
}

impl StepOutcome {
    /// A stationary outcome with a placeholder agent (used for sampling).
    pub fn hold() -> Self {
        Self::hold_at(AgentState {
            id: 0,
            position: Vec2::ZERO,
            speed: 0.0,
            kernel: crate::coverage::CoverageKernel { capacity: 0.0, lambda: 0.0, r: 0.0 },
        })
    }

    pub fn hold_at(agent: AgentState) -> Self {
        Self { agent, u: Vec2::ZERO, solves: 0, captured: false, done: false }
    }
}

/// Re-solves the field on the agent's cells and moves one step along it.
pub fn realtime_update_step(
    agent: &AgentState,
    ctx: &FieldContext,
    workload: &WorkloadField,
    dt: f64,
) -> Result<StepOutcome> {
    let field = ctx.solve(workload)?;
    let (u, agent) = pursue(agent, &field, ctx, dt)?;
    Ok(StepOutcome { agent, u, solves: 1, captured: false, done: false })
}

/// A field frozen at the last re-solve and the triangles holding its maxima.
#[derive(Debug, Clone)]
pub struct FrozenField {
    pub field: ScalarField,
    pub maxima: Vec<Vec2>,
    /// Triangle for each maximum (the containing one, else the nearest).
    pub capture_triangles: Vec<usize>,
}

impl FrozenField {
    pub fn target(&self) -> Vec2 {
        self.maxima[0]
    }
}

/// Controller regime for one agent.
#[derive(Debug, Clone, Default)]
pub enum ControlMode {
    #[default]
    RealTime,
    Maximal(MaximalState),
}

impl ControlMode {
    pub fn label(&self) -> &'static str {
        match self {
            ControlMode::RealTime => "realtime",
            ControlMode::Maximal(_) => "maximal",
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct MaximalState {
    pub frozen: Option<FrozenField>,
    /// Triangle the agent is currently clearing, if any.
    pub captured_triangle: Option<usize>,
    /// Steps spent travelling on the current frozen field.
    pub travel_steps: usize,
}

/// Inputs to [`maximal_update_step`] that stay fixed during an iteration.
#[derive(Debug, Clone)]
pub struct MaximalContext {
    pub field: FieldContext,
    pub mesh: Arc<TriMesh>,
    /// Triangle workload (workload·area) at or below which a captured
    /// triangle counts as cleared.
    pub triangle_eps: f64,
    /// Travel steps after which a frozen field is abandoned and re-solved.
    pub max_travel_steps: usize,
}

impl MaximalContext {
    pub fn triangle_workload(&self, tri: usize, workload: &WorkloadField) -> f64 {
        let cells = self.field.cells();
        self.mesh.cells_in_triangle(tri, cells).iter().map(|&c| workload.at_cell(c)).sum::<f64>()
            * cells.cell_area()
    }

    fn freeze(&self, workload: &WorkloadField) -> Result<Option<FrozenField>> {
        let field = self.field.solve(workload)?;
        let maxima = local_maxima(&field);
        if maxima.is_empty() {
            return Ok(None);
        }
        let capture_triangles = maxima
            .iter()
            .map(|&m| locate_triangle(&self.mesh, m).unwrap_or_else(|| nearest_triangle(&self.mesh, m)))
            .collect();
        Ok(Some(FrozenField { field, maxima, capture_triangles }))
    }
}

fn nearest_triangle(mesh: &TriMesh, p: Vec2) -> usize {
    (0..mesh.len())
        .min_by(|&a, &b| mesh.centroid(a).dist_sq(p).total_cmp(&mesh.centroid(b).dist_sq(p)))
        .expect("mesh has triangles")
}

/// Frozen-field step: travel along the frozen gradient until the agent is
/// inside a triangle holding one of the field's local maxima, then hold
/// while the shared workload update clears that triangle, then re-solve.
pub fn maximal_update_step(
    agent: &AgentState,
    state: &mut MaximalState,
    ctx: &MaximalContext,
    workload: &WorkloadField,
    dt: f64,
) -> Result<StepOutcome> {
    let mut solves = 0;
    // At most one re-solve per call: a freshly frozen field may again put
    // the agent in an already-clear triangle, which waits for the next step.
    for attempt in 0..2 {
        if state.frozen.is_none() {
            if attempt > 0 && solves > 0 {
                break;
            }
            solves += 1;
            state.captured_triangle = None;
            state.travel_steps = 0;
            match ctx.freeze(workload)? {
                Some(f) => state.frozen = Some(f),
                None => {
                    return Ok(StepOutcome { agent: *agent, u: Vec2::ZERO, solves, captured: false, done: true });
                }
            }
        }
        let frozen = state.frozen.as_ref().expect("frozen field present");
        // The mesh stops at the outermost cell centers; an agent in the rim
        // beyond it counts as being in the nearest triangle.
        let here = locate_triangle(&ctx.mesh, agent.position)
            .or_else(|| Some(nearest_triangle(&ctx.mesh, agent.position)));
        // A maximum on a mesh vertex belongs to every triangle around it.
        let captured = here.filter(|&t| {
            frozen.capture_triangles.contains(&t) || frozen.maxima.iter().any(|&m| ctx.mesh.contains(t, m))
        });
        if let Some(tri) = captured {
            state.captured_triangle = Some(tri);
            if ctx.triangle_workload(tri, workload) <= ctx.triangle_eps {
                state.frozen = None;
                continue;
            }
            return Ok(StepOutcome { agent: *agent, u: Vec2::ZERO, solves, captured: true, done: false });
        }
        state.captured_triangle = None;
        state.travel_steps += 1;
        if state.travel_steps > ctx.max_travel_steps {
            state.frozen = None;
            continue;
        }
        let (u, moved) = pursue(agent, &frozen.field, &ctx.field, dt)?;
        return Ok(StepOutcome { agent: moved, u, solves, captured: false, done: false });
    }
    Ok(StepOutcome { agent: *agent, u: Vec2::ZERO, solves, captured: false, done: false })
}
