use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::record::*;
use super::{Algorithm, MissionConfig};
use crate::control::{
    control_input, maximal_update_step, realtime_update_step, step_agent, ControlMode, FieldContext,
    MaximalContext, MaximalState, StepOutcome,
};
use crate::coverage::{
    apply_coverage_step, coverage_speed, initial_workload, optimal_time, total_workload, AgentState,
    WorkloadField,
};
use crate::field::HeatSolver;
use crate::geometry::{build_region, delaunay_triangulate, voronoi_labels, Partition, RegionGrid, TriMesh};
use crate::{Error, Result, Vec2};

/// Read-only view handed to an observer after every step.
pub struct StepView<'a> {
    pub step: usize,
    pub t: f64,
    pub k: usize,
    pub agents: &'a [AgentState],
    pub outcomes: &'a [StepOutcome],
    pub modes: &'a [ControlMode],
    pub workload: &'a WorkloadField,
    pub partition: Option<&'a Partition>,
    pub meshes: &'a [Option<Arc<TriMesh>>],
}

type Observer<'o> = &'o mut (dyn FnMut(&StepView<'_>) + Send);

/// Runs the configured algorithm on rayon's current thread pool.
pub fn run_mission(cfg: &MissionConfig) -> Result<RunSummary> {
    Sim::new(cfg, None)?.run()
}

/// Like [`run_mission`], calling `observer` after every step.
pub fn run_mission_observed(
    cfg: &MissionConfig,
    observer: &mut (dyn FnMut(&StepView<'_>) + Send),
) -> Result<RunSummary> {
    Sim::new(cfg, Some(observer))?.run()
}

/// Runs on a dedicated pool of `threads` workers (0 = rayon's default).
pub fn run_mission_with_threads(cfg: &MissionConfig, threads: usize) -> Result<RunSummary> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::param("threads", e.to_string()))?;
    pool.install(|| run_mission(cfg))
}

/// Handoff destination for `finisher`: the neighbouring subregion with the
/// most remaining workload (falling back to the fullest subregion overall
/// when no neighbour holds more than `empty`), and the center of its
/// fullest cell. Ties go to the lowest index.
pub fn handoff_target(
    partition: &Partition,
    workload: &WorkloadField,
    finisher: usize,
    empty: f64,
) -> Option<(usize, Vec2)> {
    let remaining: Vec<f64> =
        partition.all_cells().iter().map(|cells| total_workload(workload, Some(cells))).collect();
    let best = |candidates: &mut dyn Iterator<Item = usize>| {
        let mut best: Option<(usize, f64)> = None;
        for j in candidates {
            if remaining[j] > empty && best.is_none_or(|(_, b)| remaining[j] > b) {
                best = Some((j, remaining[j]));
            }
        }
        best.map(|(j, _)| j)
    };
    let j = best(&mut partition.neighbors(finisher))
        .or_else(|| best(&mut (0..partition.num_agents()).filter(|&j| j != finisher)))
        .or_else(|| {
            // Everything is below the threshold; still pick the fullest.
            (0..partition.num_agents())
                .filter(|&j| j != finisher && remaining[j] > 0.0)
                .min_by(|&a, &b| remaining[b].total_cmp(&remaining[a]).then(a.cmp(&b)))
        })?;
    let cell = workload.argmax_over(partition.cells(j))?;
    Some((j, partition.cells(j).geometry().center(cell)))
}

enum PhaseEnd {
    Completed,
    Finished(usize),
    MaxSteps,
    Stalled,
}

struct Sim<'c, 'o> {
    cfg: &'c MissionConfig,
    region: RegionGrid,
    workload: WorkloadField,
    agents: Vec<AgentState>,
    steps: usize,
    k: usize,
    solves: usize,
    since_decrease: usize,
    observer: Option<Observer<'o>>,
    m_curve: Vec<(f64, f64)>,
    samples: Vec<CurveSample>,
    trajectory: Vec<TrajectoryRow>,
    events: Vec<Event>,
    iterations: Vec<IterationRecord>,
    partitions: Vec<(usize, Vec<i64>)>,
    snapshots: Vec<crate::mission::FieldSnapshot>,
    last_sampled: Option<usize>,
}

impl<'c, 'o> Sim<'c, 'o> {
    fn new(cfg: &'c MissionConfig, observer: Option<Observer<'o>>) -> Result<Self> {
        cfg.validate()?;
        let region = build_region(&cfg.region)?;
        let workload = initial_workload(&region, &cfg.workload)?;
        let positions = if cfg.agents.positions.is_empty() {
            random_positions(&region, cfg.num_agents(), cfg.mission.seed)
        } else {
            cfg.explicit_positions()
        };
        for (agent, p) in positions.iter().enumerate() {
            if !region.contains_point(*p) {
                return Err(Error::PositionOutside { agent, x: p.x, y: p.y });
            }
        }
        let agents = positions
            .into_iter()
            .enumerate()
            .map(|(id, position)| AgentState { id, position, speed: cfg.agents.speed, kernel: cfg.agents.kernel })
            .collect();
        Ok(Self {
            cfg,
            region,
            workload,
            agents,
            steps: 0,
            k: 1,
            solves: 0,
            since_decrease: 0,
            observer,
            m_curve: Vec::new(),
            samples: Vec::new(),
            trajectory: Vec::new(),
            events: Vec::new(),
            iterations: Vec::new(),
            partitions: Vec::new(),
            snapshots: Vec::new(),
            last_sampled: None,
        })
    }

    fn t(&self) -> f64 {
        self.steps as f64 * self.cfg.mission.dt
    }

    fn eps_m(&self) -> f64 {
        self.cfg.mission.eps_m
    }

    fn event(&mut self, kind: EventKind) {
        self.events.push(Event { t: self.t(), step: self.steps, kind });
    }

    fn run(mut self) -> Result<RunSummary> {
        let initial_raster = self.workload.raster();
        let m0 = self.workload.initial_total();
        self.m_curve.push((0.0, m0));
        let zero = vec![StepOutcome::hold(); self.agents.len()];
        let labels = vec!["realtime"; self.agents.len()];
        self.sample(None, &zero, &labels);

        let completed = match self.cfg.mission.algorithm {
            Algorithm::Algo1 => {
                let partition = voronoi_labels(&self.region, &self.positions())?;
                self.run_fixed_partition(&partition)?
            }
            Algorithm::Algo3 => self.run_iterated()?,
            Algorithm::Centralized => self.run_centralized()?,
        };
        self.event(if completed { EventKind::Completed } else { EventKind::MaxSteps });

        let v = coverage_speed(&self.cfg.agents.kernel);
        let t_star = optimal_time(m0, self.agents.len(), v)?;
        let t = self.t();
        let (nx, ny) = (self.region.geometry().nx, self.region.geometry().ny);
        Ok(RunSummary {
            algorithm: self.cfg.mission.algorithm,
            completed,
            t,
            t_star,
            delta_t: t - t_star,
            initial_total: m0,
            final_total: total_workload(&self.workload, None),
            coverage_speed: v,
            steps: self.steps,
            solver_calls: self.solves,
            iterations: self.iterations,
            m_curve: self.m_curve,
            samples: self.samples,
            trajectory: self.trajectory,
            events: self.events,
            grid: (nx, ny),
            initial_raster,
            final_raster: self.workload.raster(),
            partitions: self.partitions,
            field_snapshots: self.snapshots,
        })
    }

    fn positions(&self) -> Vec<Vec2> {
        self.agents.iter().map(|a| a.position).collect()
    }

    fn field_contexts(&self, partition: &Partition) -> Result<Vec<Option<FieldContext>>> {
        let field = self.cfg.field;
        let workload = &self.workload;
        let domain = self.region.cells();
        partition
            .all_cells()
            .par_iter()
            .map(|cells| {
                if cells.is_empty() {
                    return Ok(None);
                }
                let solver = Arc::new(HeatSolver::new(cells.clone(), field)?);
                Ok(Some(FieldContext { solver, reference_max: workload.max_over(cells), domain: domain.clone() }))
            })
            .collect()
    }

    fn begin_iteration(&mut self, partition: &Partition, ctxs: &[Option<FieldContext>]) -> Result<()> {
        self.event(EventKind::IterationStart { k: self.k });
        if self.cfg.output.rasters {
            self.partitions.push((self.k, partition.label_raster()));
        }
        if self.cfg.output.field_snapshots {
            let g = *self.region.geometry();
            for (agent, ctx) in ctxs.iter().enumerate() {
                let Some(ctx) = ctx else { continue };
                let field = ctx.solve(&self.workload)?;
                let mut values = vec![None; g.len()];
                for (&c, &v) in field.cells().members().iter().zip(field.values()) {
                    values[c] = Some(v);
                }
                self.snapshots.push(FieldSnapshot { k: self.k, agent, t: self.t(), values });
            }
        }
        Ok(())
    }

    fn end_iteration(&mut self, start: f64, solves_before: usize, reason: IterationEndReason, finisher: Option<usize>) {
        let k = self.k;
        self.event(EventKind::IterationEnd { k, reason, finisher });
        self.iterations.push(IterationRecord {
            k,
            start,
            end: self.t(),
            reason,
            finisher,
            remaining: self.workload.running_total(),
            solves: self.solves - solves_before,
        });
    }

    fn region_totals(&self, partition: &Partition) -> Vec<f64> {
        partition.all_cells().iter().map(|c| total_workload(&self.workload, Some(c))).collect()
    }

    /// Applies the controllers' moves, decays the workload once and records.
    fn advance(
        &mut self,
        outcomes: &[StepOutcome],
        partition: Option<&Partition>,
        region_totals: Option<&mut [f64]>,
        modes: &[ControlMode],
        meshes: &[Option<Arc<TriMesh>>],
    ) {
        for (a, o) in self.agents.iter_mut().zip(outcomes) {
            *a = o.agent;
            self.solves += o.solves;
        }
        let delta = apply_coverage_step(&mut self.workload, &self.agents, self.cfg.mission.dt);
        if delta.removed > 0.0 {
            self.since_decrease = 0;
        } else {
            self.since_decrease += 1;
        }
        if let (Some(p), Some(totals)) = (partition, region_totals) {
            for &(c, removed) in &delta.cells {
                if let Some(owner) = p.owner(c) {
                    totals[owner] -= removed;
                }
            }
        }
        self.steps += 1;
        self.m_curve.push((self.t(), self.workload.running_total()));
        let labels: Vec<&'static str> = modes.iter().map(|m| m.label()).collect();
        if self.steps.is_multiple_of(self.cfg.output.sample_stride) {
            self.sample(partition, outcomes, &labels);
        }
        if let Some(obs) = self.observer.as_mut() {
            obs(&StepView {
                step: self.steps,
                t: self.steps as f64 * self.cfg.mission.dt,
                k: self.k,
                agents: &self.agents,
                outcomes,
                modes,
                workload: &self.workload,
                partition,
                meshes,
            });
        }
    }

    fn sample(&mut self, partition: Option<&Partition>, outcomes: &[StepOutcome], labels: &[&'static str]) {
        if self.last_sampled == Some(self.steps) {
            return;
        }
        self.last_sampled = Some(self.steps);
        let t = self.t();
        let per_agent = match partition {
            Some(p) => self.region_totals(p),
            None => self.nearest_agent_totals(),
        };
        self.samples.push(CurveSample {
            t,
            k: self.k,
            total: total_workload(&self.workload, None),
            running: self.workload.running_total(),
            per_agent,
        });
        for ((a, o), mode) in self.agents.iter().zip(outcomes).zip(labels) {
            self.trajectory.push(TrajectoryRow {
                t,
                k: self.k,
                agent: a.id + 1,
                x: a.position.x,
                y: a.position.y,
                mode,
                speed: o.u.norm(),
            });
        }
    }

    fn nearest_agent_totals(&self) -> Vec<f64> {
        let g = self.region.geometry();
        let mut totals = vec![0.0; self.agents.len()];
        for &c in self.region.cells().members() {
            let x = g.center(c);
            let mut best = 0;
            let mut best_d = f64::INFINITY;
            for (j, a) in self.agents.iter().enumerate() {
                let d = x.dist_sq(a.position);
                if d < best_d {
                    best = j;
                    best_d = d;
                }
            }
            totals[best] += self.workload.at_cell(c);
        }
        totals.iter().map(|t| t * self.region.cell_area()).collect()
    }

    fn finish_sampling(&mut self, partition: Option<&Partition>, modes: &[ControlMode]) {
        let holds = vec![StepOutcome::hold(); self.agents.len()];
        let labels: Vec<&'static str> = modes.iter().map(|m| m.label()).collect();
        self.sample(partition, &holds, &labels);
    }

    /// Real-time control on a fixed partition until the workload is cleared
    /// or the step cap is reached.
    fn run_fixed_partition(&mut self, partition: &Partition) -> Result<bool> {
        let ctxs = self.field_contexts(partition)?;
        self.begin_iteration(partition, &ctxs)?;
        let start = self.t();
        let solves_before = self.solves;
        let modes = vec![ControlMode::RealTime; self.agents.len()];
        let meshes = vec![None; self.agents.len()];
        let mut totals = self.region_totals(partition);
        let dt = self.cfg.mission.dt;
        let completed = loop {
            if self.workload.running_total() <= self.eps_m() {
                break true;
            }
            if self.steps >= self.cfg.mission.max_steps {
                break false;
            }
            let workload = &self.workload;
            let outcomes: Vec<StepOutcome> = self
                .agents
                .par_iter()
                .zip(ctxs.par_iter())
                .map(|(a, ctx)| match ctx {
                    Some(ctx) => realtime_update_step(a, ctx, workload, dt),
                    None => Ok(StepOutcome::hold_at(*a)),
                })
                .collect::<Result<_>>()?;
            self.advance(&outcomes, Some(partition), Some(&mut totals), &modes, &meshes);
        };
        self.finish_sampling(Some(partition), &modes);
        let reason = if completed { IterationEndReason::Completed } else { IterationEndReason::MaxSteps };
        self.end_iteration(start, solves_before, reason, None);
        Ok(completed)
    }

    fn build_meshes(&mut self, partition: &Partition) -> Vec<Option<Arc<TriMesh>>> {
        let max_edge = self.cfg.mesh_max_edge();
        let r = self.cfg.agents.kernel.r;
        let built: Vec<Result<TriMesh>> = partition
            .all_cells()
            .par_iter()
            .map(|cells| {
                if cells.is_empty() {
                    Err(Error::EmptyCellSet)
                } else {
                    delaunay_triangulate(cells, max_edge, r)
                }
            })
            .collect();
        let k = self.k;
        built
            .into_iter()
            .enumerate()
            .map(|(agent, m)| match m {
                Ok(mesh) => Some(Arc::new(mesh)),
                Err(e) => {
                    self.event(EventKind::MeshUnavailable { k, agent, error: e.to_string() });
                    None
                }
            })
            .collect()
    }

    /// One partition iteration: real-time control for `t' ≤ T_u`, then
    /// maximal update, until some agent clears its subregion.
    fn run_iteration(&mut self, partition: &Partition) -> Result<(PhaseEnd, usize)> {
        let n = self.agents.len();
        let ctxs = self.field_contexts(partition)?;
        self.begin_iteration(partition, &ctxs)?;
        let dt = self.cfg.mission.dt;
        let t_u = self.cfg.mission.t_u_for(self.k);
        let eps_region = self.cfg.eps_region();
        let cell_area = self.region.cell_area();
        let mut totals = self.region_totals(partition);
        let mut modes = vec![ControlMode::RealTime; n];
        let mut meshes: Vec<Option<Arc<TriMesh>>> = vec![None; n];
        let mut maximal_ctxs: Vec<Option<MaximalContext>> = vec![None; n];
        let mut switched = false;
        let mut was_captured = vec![false; n];
        let mut was_done = vec![false; n];
        let mut local_steps = 0usize;
        let solves_before = self.solves;
        self.since_decrease = 0;
        let end = loop {
            if self.workload.running_total() <= self.eps_m() {
                break PhaseEnd::Completed;
            }
            if let Some(i) = (0..n).find(|&i| totals[i] <= eps_region) {
                break PhaseEnd::Finished(i);
            }
            if self.steps >= self.cfg.mission.max_steps {
                break PhaseEnd::MaxSteps;
            }
            if self.since_decrease >= self.cfg.mission.stall_steps {
                break PhaseEnd::Stalled;
            }
            let t_prime = local_steps as f64 * dt;
            if !switched && t_prime > t_u {
                switched = true;
                meshes = self.build_meshes(partition);
                for i in 0..n {
                    if let (Some(mesh), Some(ctx)) = (&meshes[i], &ctxs[i]) {
                        let diameter = cells_diameter(ctx.cells());
                        maximal_ctxs[i] = Some(MaximalContext {
                            field: ctx.clone(),
                            mesh: mesh.clone(),
                            triangle_eps: 1e-6 * cell_area * self.agents[i].kernel.capacity,
                            max_travel_steps: (10.0 * diameter / (self.agents[i].speed * dt)).ceil() as usize + 10,
                        });
                        modes[i] = ControlMode::Maximal(MaximalState::default());
                        self.event(EventKind::MaximalUpdate { k: self.k, agent: i });
                    }
                }
            }
            let workload = &self.workload;
            let outcomes: Vec<StepOutcome> = self
                .agents
                .par_iter()
                .zip(modes.par_iter_mut())
                .zip(ctxs.par_iter().zip(maximal_ctxs.par_iter()))
                .map(|((a, mode), (ctx, mctx))| match (mode, ctx, mctx) {
                    (ControlMode::Maximal(state), _, Some(mctx)) => {
                        maximal_update_step(a, state, mctx, workload, dt)
                    }
                    (_, Some(ctx), _) => realtime_update_step(a, ctx, workload, dt),
                    _ => Ok(StepOutcome::hold_at(*a)),
                })
                .collect::<Result<_>>()?;
            for (i, o) in outcomes.iter().enumerate() {
                if o.captured && !was_captured[i] {
                    if let ControlMode::Maximal(MaximalState { captured_triangle: Some(tri), .. }) = &modes[i] {
                        let triangle = *tri;
                        self.event(EventKind::Capture { agent: i, triangle });
                    }
                }
                if o.done && !was_done[i] {
                    self.event(EventKind::SubregionDone { agent: i });
                }
                was_captured[i] = o.captured;
                was_done[i] = o.done;
            }
            self.advance(&outcomes, Some(partition), Some(&mut totals), &modes, &meshes);
            local_steps += 1;
        };
        self.finish_sampling(Some(partition), &modes);
        Ok((end, solves_before))
    }

    fn run_iterated(&mut self) -> Result<bool> {
        let mut partition = voronoi_labels(&self.region, &self.positions())?;
        self.k = 1;
        while self.k < self.cfg.mission.k_max {
            if self.workload.running_total() <= self.eps_m() {
                return Ok(true);
            }
            let start = self.t();
            let (end, solves_before) = self.run_iteration(&partition)?;
            let finisher = match end {
                PhaseEnd::Completed => {
                    self.end_iteration(start, solves_before, IterationEndReason::Completed, None);
                    return Ok(true);
                }
                PhaseEnd::MaxSteps => {
                    self.end_iteration(start, solves_before, IterationEndReason::MaxSteps, None);
                    return Ok(false);
                }
                PhaseEnd::Finished(i) => {
                    self.end_iteration(start, solves_before, IterationEndReason::Finished, Some(i));
                    i
                }
                PhaseEnd::Stalled => {
                    // Hand off the agent with the least work left.
                    let totals = self.region_totals(&partition);
                    let i = (0..totals.len())
                        .min_by(|&a, &b| totals[a].total_cmp(&totals[b]))
                        .unwrap_or(0);
                    self.end_iteration(start, solves_before, IterationEndReason::Stalled, Some(i));
                    i
                }
            };
            partition = self.handoff(&partition, finisher)?;
        }
        if self.workload.running_total() <= self.eps_m() {
            return Ok(true);
        }
        if self.steps >= self.cfg.mission.max_steps {
            return Ok(false);
        }
        self.run_fixed_partition(&partition)
    }

    fn handoff(&mut self, partition: &Partition, finisher: usize) -> Result<Partition> {
        if let Some((j, target)) = handoff_target(partition, &self.workload, finisher, self.cfg.eps_region()) {
            self.agents[finisher].position = target;
            self.event(EventKind::Handoff {
                agent: finisher,
                from: finisher,
                into_region_of: j,
                x: target.x,
                y: target.y,
            });
        }
        let next = voronoi_labels(&self.region, &self.positions())?;
        self.k += 1;
        Ok(next)
    }

    fn run_centralized(&mut self) -> Result<bool> {
        let cells = self.region.cells().clone();
        let ctx = FieldContext {
            solver: Arc::new(HeatSolver::new(cells.clone(), self.cfg.field)?),
            reference_max: self.workload.max_over(&cells),
            domain: cells.clone(),
        };
        let whole = Partition::whole(&self.region);
        self.begin_iteration(&whole, &[Some(ctx.clone())])?;
        let start = self.t();
        let solves_before = self.solves;
        let modes = vec![ControlMode::RealTime; self.agents.len()];
        let meshes = vec![None; self.agents.len()];
        let dt = self.cfg.mission.dt;
        let completed = loop {
            if self.workload.running_total() <= self.eps_m() {
                break true;
            }
            if self.steps >= self.cfg.mission.max_steps {
                break false;
            }
            let field = ctx.solve(&self.workload)?;
            let outcomes: Vec<StepOutcome> = self
                .agents
                .par_iter()
                .enumerate()
                .map(|(i, a)| {
                    let u = control_input(&field, a.position, a.speed);
                    let moved = step_agent(a, u, dt, &cells)?;
                    // The shared solve is booked once, on the first agent.
                    Ok(StepOutcome { agent: moved, u, solves: usize::from(i == 0), captured: false, done: false })
                })
                .collect::<Result<_>>()?;
            self.advance(&outcomes, None, None, &modes, &meshes);
        };
        self.finish_sampling(None, &modes);
        let reason = if completed { IterationEndReason::Completed } else { IterationEndReason::MaxSteps };
        self.end_iteration(start, solves_before, reason, None);
        Ok(completed)
    }
}

fn cells_diameter(cells: &crate::geometry::CellSet) -> f64 {
    let g = cells.geometry();
    let (mut lo, mut hi) = (Vec2::new(f64::INFINITY, f64::INFINITY), Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY));
    for &c in cells.members() {
        let p = g.center(c);
        lo = Vec2::new(lo.x.min(p.x), lo.y.min(p.y));
        hi = Vec2::new(hi.x.max(p.x), hi.y.max(p.y));
    }
    (hi - lo).norm() + g.spacing
}

fn random_positions(region: &RegionGrid, n: usize, seed: u64) -> Vec<Vec2> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = region.geometry();
    let w = g.nx as f64 * g.spacing;
    let h = g.ny as f64 * g.spacing;
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let p = Vec2::new(g.origin.x + rng.gen::<f64>() * w, g.origin.y + rng.gen::<f64>() * h);
        if region.contains_point(p) {
            out.push(p);
        }
    }
    out
}
