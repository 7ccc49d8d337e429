//! One control evaluation step of the receding horizon controller.
//!
//! At a control instant the controller computes the planning horizon (the
//! earliest possible capture), per-agent active target sets on the reachable
//! circle, the finite candidate heading set they induce, greedy travel-cost
//! tours for reward-to-go estimation, and the event-driven action horizon.
//!
//! Everything is a pure function of a [`MissionState`] snapshot plus the
//! mission description, so evaluations are freely repeatable and safe to run
//! concurrently.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::cooperation::{self, TargetPartition};
use crate::geometry::{self, distance, heading_toward, Point};
use crate::model::{AgentId, MissionSpec, Target, TargetId};

#[derive(Debug, Error, PartialEq)]
pub enum ControlError {
    #[error("mission complete: no live targets")]
    MissionComplete,
}

/// Dynamic snapshot at a control instant: the clock, agent positions
/// (parallel to `spec.agents`), the unvisited target set known to the team,
/// and what has been collected so far.
#[derive(Debug, Clone, PartialEq)]
pub struct MissionState {
    pub clock: f64,
    pub agent_positions: Vec<Point>,
    pub live_targets: BTreeSet<TargetId>,
    pub collected: BTreeMap<TargetId, f64>,
}

impl MissionState {
    /// Snapshot at mission start: targets known from time zero are live.
    pub fn initial(spec: &MissionSpec) -> Self {
        Self {
            clock: 0.0,
            agent_positions: spec.agents.iter().map(|a| a.position).collect(),
            live_targets: spec
                .targets
                .iter()
                .filter(|t| t.appears_at <= 0.0)
                .map(|t| t.id)
                .collect(),
            collected: BTreeMap::new(),
        }
    }
}

/// Closest point of a reachable circle to a target, with the heading that
/// reaches it. `degenerate` flags the undefined direction when the agent sits
/// exactly on the target; the heading then defaults to 0.
#[derive(Debug, Clone, Copy)]
pub struct ClosestPoint {
    pub point: Point,
    pub heading: f64,
    pub degenerate: bool,
}

/// Point at travelled distance `reach` from `agent_position` along the ray
/// through `target_position` (past the target when it lies inside the
/// circle).
pub fn closest_point(agent_position: Point, target_position: Point, reach: f64) -> ClosestPoint {
    match heading_toward(agent_position, target_position) {
        Some(heading) => ClosestPoint {
            point: geometry::advance(agent_position, heading, 1.0, reach),
            heading,
            degenerate: false,
        },
        None => ClosestPoint {
            point: geometry::advance(agent_position, 0.0, 1.0, reach),
            heading: 0.0,
            degenerate: true,
        },
    }
}

/// Active target set of one agent, its closest points, and the candidate
/// headings they induce.
#[derive(Debug, Clone)]
pub struct ActiveSetResult {
    pub agent: AgentId,
    pub active_targets: Vec<TargetId>,
    pub closest_points: BTreeMap<TargetId, Point>,
    pub candidate_headings: BTreeMap<TargetId, f64>,
}

/// Ordered visit plan for one agent with estimated visit times.
#[derive(Debug, Clone, PartialEq)]
pub struct TourProjection {
    pub agent: AgentId,
    pub order: Vec<TargetId>,
    pub visit_times: BTreeMap<TargetId, f64>,
}

/// One feasible heading: toward the closest point of an active target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CandidateHeading {
    pub target: TargetId,
    pub heading: f64,
}

/// Output of one control evaluation.
#[derive(Debug, Clone)]
pub struct ControlDecision {
    pub planning_horizon: f64,
    /// Per-agent candidate lists; the joint feasible set is their product.
    pub joint_candidates: Vec<Vec<CandidateHeading>>,
    pub chosen_headings: Vec<f64>,
    /// Active target each chosen heading points at.
    pub chosen_targets: Vec<TargetId>,
    pub action_horizon: f64,
    /// Agent whose equidistance crossing set the action horizon, when the
    /// horizon is crossing-limited rather than capped by the planning horizon.
    pub crossing_agent: Option<AgentId>,
    /// Immediate reward plus reward-to-go of the chosen joint heading.
    pub objective_value: f64,
    /// True when the node budget forced a shallower lookahead.
    pub truncated: bool,
}

/// One live target with its per-step cached quantities.
pub(crate) struct LiveEntry<'a> {
    pub target: &'a Target,
    pub rate: f64,
    pub zeta: f64,
}

/// Cached evaluation context for one control instant (real or hypothetical).
///
/// The sparsity factors are frozen here: they depend on the live set at the
/// instant the step is evaluated, not on hypothetical tour progress.
pub(crate) struct StepContext<'a> {
    pub spec: &'a MissionSpec,
    pub clock: f64,
    pub positions: Vec<Point>,
    pub live: Vec<LiveEntry<'a>>,
}

impl<'a> StepContext<'a> {
    pub fn new(
        spec: &'a MissionSpec,
        clock: f64,
        positions: Vec<Point>,
        live_ids: &BTreeSet<TargetId>,
    ) -> Self {
        let t_mission = spec.mission_time;
        let targets: Vec<&Target> = spec
            .targets
            .iter()
            .filter(|t| live_ids.contains(&t.id))
            .collect();
        let gamma = spec.control.sparsity_gamma;
        let neighbors = spec.control.sparsity_neighbors as usize;
        let live = targets
            .iter()
            .map(|t| {
                let zeta = sparsity_of(t, &targets, gamma, neighbors, t_mission);
                LiveEntry {
                    target: t,
                    rate: t.decay_rate(t_mission),
                    zeta,
                }
            })
            .collect();
        Self {
            spec,
            clock,
            positions,
            live,
        }
    }

    pub fn from_state(spec: &'a MissionSpec, state: &MissionState) -> Self {
        Self::new(
            spec,
            state.clock,
            state.agent_positions.clone(),
            &state.live_targets,
        )
    }

    pub fn tie_tolerance(&self) -> f64 {
        self.spec.control.tie_tolerance
    }

    pub fn live_index(&self, id: TargetId) -> Option<usize> {
        self.live.iter().position(|e| e.target.id == id)
    }

    /// Travel cost of live target `i` seen from `x`.
    pub fn eta(&self, x: Point, i: usize) -> f64 {
        distance(x, self.live[i].target.position) / self.live[i].rate + self.live[i].zeta
    }

    /// Earliest time any agent could trigger a capture, floored at zero.
    pub fn planning_horizon(&self) -> Result<f64, ControlError> {
        if self.live.is_empty() {
            return Err(ControlError::MissionComplete);
        }
        let mut h = f64::INFINITY;
        for (j, agent) in self.spec.agents.iter().enumerate() {
            for entry in &self.live {
                let t = (distance(self.positions[j], entry.target.position)
                    - entry.target.capture_radius)
                    / agent.speed;
                h = h.min(t.max(0.0));
            }
        }
        Ok(h)
    }

    /// Distance agent `j` covers over horizon `h`.
    pub fn reach(&self, j: usize, h: f64) -> f64 {
        self.spec.agents[j].speed * h
    }

    pub fn endpoint(&self, j: usize, heading: f64, h: f64) -> Point {
        geometry::advance(self.positions[j], heading, self.spec.agents[j].speed, h)
    }

    /// Live-target indices from `pool` passing the closest-point travel-cost
    /// test for agent `j`: a target is active iff its cost at its own closest
    /// point is minimal there (inclusive within the tie tolerance).
    pub fn active_indices(&self, j: usize, h: f64, pool: &[usize]) -> Vec<usize> {
        let reach = self.reach(j, h);
        let tol = self.tie_tolerance();
        let mut active = Vec::new();
        for &l in pool {
            let cp = closest_point(self.positions[j], self.live[l].target.position, reach);
            let own = self.eta(cp.point, l);
            if pool.iter().all(|&i| own <= self.eta(cp.point, i) + tol) {
                active.push(l);
            }
        }
        active
    }

    /// Greedy minimum-travel-cost chain over `pool` starting from `start` at
    /// `start_time`, visiting every target once. Ties go to the lowest id.
    pub fn greedy_tour(
        &self,
        start: Point,
        start_time: f64,
        speed: f64,
        pool: &[usize],
    ) -> Vec<(usize, f64)> {
        let mut remaining: Vec<usize> = pool.to_vec();
        remaining.sort_by_key(|&i| self.live[i].target.id);
        let mut tour = Vec::with_capacity(remaining.len());
        let mut pos = start;
        let mut time = start_time;
        while !remaining.is_empty() {
            let mut best = 0;
            let mut best_eta = self.eta(pos, remaining[0]);
            for (k, &i) in remaining.iter().enumerate().skip(1) {
                let e = self.eta(pos, i);
                if e < best_eta {
                    best = k;
                    best_eta = e;
                }
            }
            let i = remaining.remove(best);
            time += distance(pos, self.live[i].target.position) / speed;
            pos = self.live[i].target.position;
            tour.push((i, time));
        }
        tour
    }

    /// Immediate reward of the joint endpoints plus the set of targets they
    /// capture. The reward sums over every (agent, target) capture pair; the
    /// captured set deduplicates for reward-to-go exclusion.
    pub fn immediate(&self, endpoints: &[Point], h: f64) -> (f64, BTreeSet<usize>) {
        let tol = self.tie_tolerance();
        let t_visit = self.clock + h;
        let mut reward = 0.0;
        let mut captured = BTreeSet::new();
        for endpoint in endpoints {
            for (i, entry) in self.live.iter().enumerate() {
                if distance(*endpoint, entry.target.position) <= entry.target.capture_radius + tol
                {
                    reward += entry.target.reward_at(t_visit, self.spec.mission_time);
                    captured.insert(i);
                }
            }
        }
        (reward, captured)
    }

    /// Partition of the given live indices among agents, evaluated at the
    /// context's agent positions.
    pub fn partition(&self, pool: &[usize]) -> TargetPartition {
        let targets: Vec<(TargetId, Point)> = pool
            .iter()
            .map(|&i| (self.live[i].target.id, self.live[i].target.position))
            .collect();
        let agents: Vec<(AgentId, Point)> = self
            .spec
            .agents
            .iter()
            .zip(&self.positions)
            .map(|(a, p)| (a.id, *p))
            .collect();
        cooperation::partition_targets(
            &targets,
            &agents,
            self.spec.control.neighbor_count as usize,
            self.spec.control.cooperation_delta,
        )
        .expect("mission has at least one agent")
    }

    /// Reward-to-go estimate: partition the uncaptured live targets, project
    /// a greedy tour per agent from its hypothetical endpoint, and sum the
    /// discounted rewards along the projected visit times.
    pub fn reward_to_go(&self, endpoints: &[Point], h: f64, captured: &BTreeSet<usize>) -> f64 {
        let remaining: Vec<usize> = (0..self.live.len())
            .filter(|i| !captured.contains(i))
            .collect();
        if remaining.is_empty() {
            return 0.0;
        }
        let start_time = self.clock + h;
        let mut total = 0.0;
        if self.spec.agents.len() == 1 {
            for (i, t) in self.greedy_tour(endpoints[0], start_time, self.spec.agents[0].speed, &remaining) {
                total += self.live[i].target.reward_at(t, self.spec.mission_time);
            }
            return total;
        }
        let partition = self.partition(&remaining);
        for (j, agent) in self.spec.agents.iter().enumerate() {
            let own: Vec<usize> = remaining
                .iter()
                .copied()
                .filter(|&i| partition.assignment[&self.live[i].target.id] == agent.id)
                .collect();
            for (i, t) in self.greedy_tour(endpoints[j], start_time, agent.speed, &own) {
                total += self.live[i].target.reward_at(t, self.spec.mission_time);
            }
        }
        total
    }

    /// Objective of one joint heading: immediate reward plus reward-to-go.
    pub fn objective(&self, headings: &[f64], h: f64) -> f64 {
        let endpoints: Vec<Point> = headings
            .iter()
            .enumerate()
            .map(|(j, u)| self.endpoint(j, *u, h))
            .collect();
        let (j_i, captured) = self.immediate(&endpoints, h);
        j_i + self.reward_to_go(&endpoints, h, &captured)
    }

    /// Per-agent candidate headings: closest-point headings of the agent's
    /// active targets over the whole live set, joined (for multi-agent
    /// missions) with the active targets of its own partition subset so that
    /// every agent can always enter its assigned region.
    pub fn candidates(&self, h: f64) -> Vec<Vec<CandidateHeading>> {
        let all: Vec<usize> = (0..self.live.len()).collect();
        let multi = self.spec.agents.len() > 1;
        let partition = multi.then(|| self.partition(&all));
        let mut result = Vec::with_capacity(self.spec.agents.len());
        for (j, agent) in self.spec.agents.iter().enumerate() {
            let mut chosen: BTreeSet<usize> = self.active_indices(j, h, &all).into_iter().collect();
            if let Some(partition) = &partition {
                let own: Vec<usize> = all
                    .iter()
                    .copied()
                    .filter(|&i| partition.assignment[&self.live[i].target.id] == agent.id)
                    .collect();
                chosen.extend(self.active_indices(j, h, &own));
            }
            let list = chosen
                .into_iter()
                .map(|i| {
                    let target = self.live[i].target;
                    let heading = heading_toward(self.positions[j], target.position)
                        .expect("live target coincides with agent position");
                    CandidateHeading {
                        target: target.id,
                        heading,
                    }
                })
                .collect();
            result.push(list);
        }
        result
    }

    /// Shortest time in `(0, h]` at which some agent moving along its chosen
    /// heading becomes equidistant from two live targets, capped at `h`.
    /// Also reports which agent crosses first, when one does.
    pub fn action_horizon_detail(&self, headings: &[f64], h: f64) -> (f64, Option<usize>) {
        let tol = self.tie_tolerance();
        let mut earliest = h;
        let mut crossing_agent = None;
        for (j, agent) in self.spec.agents.iter().enumerate() {
            for a in 0..self.live.len() {
                for b in (a + 1)..self.live.len() {
                    if let Some(t) = geometry::equidistance_time(
                        self.positions[j],
                        headings[j],
                        agent.speed,
                        self.live[a].target.position,
                        self.live[b].target.position,
                    ) {
                        if t > tol && t < earliest {
                            earliest = t;
                            crossing_agent = Some(j);
                        }
                    }
                }
            }
        }
        (earliest, crossing_agent)
    }

    pub fn action_horizon(&self, headings: &[f64], h: f64) -> f64 {
        self.action_horizon_detail(headings, h).0
    }
}

/// Sparsity factor of `target` within `live`: rank-weighted sum of
/// distance-over-decay-rate of its nearest live neighbors.
fn sparsity_of(
    target: &Target,
    live: &[&Target],
    gamma: f64,
    neighbor_count: usize,
    mission_time: f64,
) -> f64 {
    if gamma == 0.0 || neighbor_count == 0 {
        return 0.0;
    }
    let mut neighbors: Vec<(f64, TargetId, f64)> = live
        .iter()
        .filter(|t| t.id != target.id)
        .map(|t| {
            (
                distance(target.position, t.position),
                t.id,
                t.decay_rate(mission_time),
            )
        })
        .collect();
    neighbors.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
    let mut weight = 1.0;
    let mut zeta = 0.0;
    for (d, _, rate) in neighbors.into_iter().take(neighbor_count) {
        weight *= gamma;
        zeta += weight * d / rate;
    }
    zeta
}

// ---------------------------------------------------------------------------
// State-level operations
// ---------------------------------------------------------------------------

/// Planning horizon from a state: earliest possible capture time over all
/// agents and live targets.
pub fn planning_horizon(spec: &MissionSpec, state: &MissionState) -> Result<f64, ControlError> {
    StepContext::from_state(spec, state).planning_horizon()
}

/// Sparsity factor of a live target at the state's live set.
pub fn sparsity_factor(spec: &MissionSpec, state: &MissionState, target: TargetId) -> f64 {
    let ctx = StepContext::from_state(spec, state);
    let i = ctx.live_index(target).expect("target not live");
    ctx.live[i].zeta
}

/// Travel cost of a live target seen from `point` at the state's live set.
pub fn travel_cost(spec: &MissionSpec, state: &MissionState, target: TargetId, point: Point) -> f64 {
    let ctx = StepContext::from_state(spec, state);
    let i = ctx.live_index(target).expect("target not live");
    ctx.eta(point, i)
}

/// Active target set of the agent at `agent_index` for planning horizon `h`.
pub fn active_targets(
    spec: &MissionSpec,
    state: &MissionState,
    agent_index: usize,
    h: f64,
) -> Result<ActiveSetResult, ControlError> {
    let ctx = StepContext::from_state(spec, state);
    if ctx.live.is_empty() {
        return Err(ControlError::MissionComplete);
    }
    let all: Vec<usize> = (0..ctx.live.len()).collect();
    let active = ctx.active_indices(agent_index, h, &all);
    let reach = ctx.reach(agent_index, h);
    let mut closest_points = BTreeMap::new();
    let mut candidate_headings = BTreeMap::new();
    let mut ids = Vec::with_capacity(active.len());
    for i in active {
        let target = ctx.live[i].target;
        let cp = closest_point(ctx.positions[agent_index], target.position, reach);
        ids.push(target.id);
        closest_points.insert(target.id, cp.point);
        candidate_headings.insert(target.id, cp.heading);
    }
    Ok(ActiveSetResult {
        agent: spec.agents[agent_index].id,
        active_targets: ids,
        closest_points,
        candidate_headings,
    })
}

/// Greedy travel-cost tour over `assigned` from `start_point` at
/// `start_time`; visit times chain the straight-line legs at the agent's
/// speed.
pub fn project_tour(
    spec: &MissionSpec,
    state: &MissionState,
    agent_index: usize,
    start_point: Point,
    start_time: f64,
    assigned: &BTreeSet<TargetId>,
) -> TourProjection {
    let ctx = StepContext::from_state(spec, state);
    let pool: Vec<usize> = (0..ctx.live.len())
        .filter(|&i| assigned.contains(&ctx.live[i].target.id))
        .collect();
    let speed = spec.agents[agent_index].speed;
    let tour = ctx.greedy_tour(start_point, start_time, speed, &pool);
    TourProjection {
        agent: spec.agents[agent_index].id,
        order: tour.iter().map(|(i, _)| ctx.live[*i].target.id).collect(),
        visit_times: tour
            .iter()
            .map(|(i, t)| (ctx.live[*i].target.id, *t))
            .collect(),
    }
}

/// Immediate reward of a joint heading vector over the horizon.
pub fn immediate_reward(spec: &MissionSpec, state: &MissionState, headings: &[f64], h: f64) -> f64 {
    let ctx = StepContext::from_state(spec, state);
    let endpoints: Vec<Point> = headings
        .iter()
        .enumerate()
        .map(|(j, u)| ctx.endpoint(j, *u, h))
        .collect();
    ctx.immediate(&endpoints, h).0
}

/// Reward-to-go estimate of a joint heading vector, excluding rewards already
/// counted as immediate.
pub fn reward_to_go(spec: &MissionSpec, state: &MissionState, headings: &[f64], h: f64) -> f64 {
    let ctx = StepContext::from_state(spec, state);
    let endpoints: Vec<Point> = headings
        .iter()
        .enumerate()
        .map(|(j, u)| ctx.endpoint(j, *u, h))
        .collect();
    let (_, captured) = ctx.immediate(&endpoints, h);
    ctx.reward_to_go(&endpoints, h, &captured)
}

/// Immediate reward plus reward-to-go of one joint heading vector.
pub fn objective(spec: &MissionSpec, state: &MissionState, headings: &[f64], h: f64) -> f64 {
    StepContext::from_state(spec, state).objective(headings, h)
}

/// Original-controller visit-time estimate: direct flight from each agent's
/// hypothetical endpoint to every live target. Diagnostic lower bound only.
pub fn visit_time_lower_bound(
    spec: &MissionSpec,
    state: &MissionState,
    headings: &[f64],
    h: f64,
) -> BTreeMap<(TargetId, AgentId), f64> {
    let ctx = StepContext::from_state(spec, state);
    let mut bounds = BTreeMap::new();
    for (j, agent) in spec.agents.iter().enumerate() {
        let endpoint = ctx.endpoint(j, headings[j], h);
        for entry in &ctx.live {
            let t = ctx.clock + h + distance(endpoint, entry.target.position) / agent.speed;
            bounds.insert((entry.target.id, agent.id), t);
        }
    }
    bounds
}

/// Event-driven action horizon for the chosen joint heading.
pub fn action_horizon(spec: &MissionSpec, state: &MissionState, headings: &[f64], h: f64) -> f64 {
    StepContext::from_state(spec, state).action_horizon(headings, h)
}

/// Partition of the state's live targets among agents at current positions.
pub fn partition_live(spec: &MissionSpec, state: &MissionState) -> TargetPartition {
    let ctx = StepContext::from_state(spec, state);
    let all: Vec<usize> = (0..ctx.live.len()).collect();
    ctx.partition(&all)
}
