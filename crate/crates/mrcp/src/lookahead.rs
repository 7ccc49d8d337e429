//! K-step lookahead search over joint candidate headings.
//!
//! Depth 1 maximizes immediate reward plus reward-to-go over the joint
//! candidate set. Deeper searches hypothetically execute each joint
//! candidate for the full planning horizon, collect any reward reached,
//! re-derive horizons and candidate sets at the hypothetical state, and
//! recurse; the deepest level scores each joint candidate with immediate
//! reward plus reward-to-go. Expansion is exhaustive over the candidate
//! product set, bounded by the configured node budget: when a depth does not
//! fit the budget, the search deterministically retries one level shallower.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::controller::{closest_point, ControlDecision, ControlError, MissionState, StepContext};
use crate::geometry::{distance, Point};
use crate::model::{MissionSpec, TargetId};

#[derive(Debug, Error, PartialEq)]
pub enum LookaheadError {
    #[error(transparent)]
    Control(#[from] ControlError),
    #[error("tree too large: {targets} live targets exceed the enumeration cap of {cap}")]
    TreeTooLarge { targets: usize, cap: usize },
    #[error("path counting requires a single agent")]
    MultiAgent,
}

/// Hypothetical state at a tree node.
struct Node {
    clock: f64,
    positions: Vec<Point>,
    live: BTreeSet<TargetId>,
    /// Reward hypothetically collected along the path to this node.
    accumulated: f64,
}

/// Lexicographic odometer over per-agent candidate counts.
fn joint_indices(counts: &[usize]) -> Vec<Vec<usize>> {
    if counts.iter().any(|&c| c == 0) {
        return Vec::new();
    }
    let total: usize = counts.iter().product();
    let mut all = Vec::with_capacity(total);
    let mut current = vec![0usize; counts.len()];
    loop {
        all.push(current.clone());
        let mut k = counts.len();
        loop {
            if k == 0 {
                return all;
            }
            k -= 1;
            current[k] += 1;
            if current[k] < counts[k] {
                break;
            }
            current[k] = 0;
        }
    }
}

/// Best value reachable from `node` with `levels` branching levels left, or
/// `None` once the node budget is exhausted.
fn explore(spec: &MissionSpec, node: &Node, levels: u32, nodes_left: &mut u64) -> Option<f64> {
    if node.live.is_empty() {
        return Some(node.accumulated);
    }
    let ctx = StepContext::new(spec, node.clock, node.positions.clone(), &node.live);
    let horizon = ctx.planning_horizon().expect("live set is nonempty");
    let candidates = ctx.candidates(horizon);
    let counts: Vec<usize> = candidates.iter().map(|c| c.len()).collect();
    let mut best = f64::NEG_INFINITY;
    for indices in joint_indices(&counts) {
        if *nodes_left == 0 {
            return None;
        }
        *nodes_left -= 1;
        let endpoints: Vec<Point> = indices
            .iter()
            .enumerate()
            .map(|(j, &c)| ctx.endpoint(j, candidates[j][c].heading, horizon))
            .collect();
        let (immediate, captured) = ctx.immediate(&endpoints, horizon);
        let value = if levels <= 1 {
            node.accumulated + immediate + ctx.reward_to_go(&endpoints, horizon, &captured)
        } else {
            let collected: f64 = captured
                .iter()
                .map(|&i| {
                    ctx.live[i]
                        .target
                        .reward_at(node.clock + horizon, spec.mission_time)
                })
                .sum();
            let mut live = node.live.clone();
            for &i in &captured {
                live.remove(&ctx.live[i].target.id);
            }
            let child = Node {
                clock: node.clock + horizon,
                positions: endpoints,
                live,
                accumulated: node.accumulated + collected,
            };
            explore(spec, &child, levels - 1, nodes_left)?
        };
        if value > best {
            best = value;
        }
    }
    Some(best)
}

/// Solves one control evaluation: expands the joint-candidate tree to the
/// configured depth (clamped to the live target count) and returns the
/// first-level joint heading on the best root-to-leaf path, ties resolved
/// toward the lexicographically smallest branch indices.
pub fn solve(spec: &MissionSpec, state: &MissionState) -> Result<ControlDecision, ControlError> {
    if state.live_targets.is_empty() {
        return Err(ControlError::MissionComplete);
    }
    let ctx = StepContext::from_state(spec, state);
    let horizon = ctx.planning_horizon()?;
    let candidates = ctx.candidates(horizon);
    let counts: Vec<usize> = candidates.iter().map(|c| c.len()).collect();
    let root_vectors = joint_indices(&counts);
    let full_depth = spec
        .control
        .lookahead_depth
        .min(state.live_targets.len() as u32)
        .max(1);

    for depth in (1..=full_depth).rev() {
        // Depth 1 always completes; deeper levels run against the budget.
        let mut nodes_left = if depth == 1 {
            u64::MAX
        } else {
            spec.control.node_budget.max(1)
        };
        let mut best: Option<(f64, &Vec<usize>)> = None;
        let mut exceeded = false;
        for indices in &root_vectors {
            let endpoints: Vec<Point> = indices
                .iter()
                .enumerate()
                .map(|(j, &c)| ctx.endpoint(j, candidates[j][c].heading, horizon))
                .collect();
            let (immediate, captured) = ctx.immediate(&endpoints, horizon);
            let value = if depth == 1 {
                immediate + ctx.reward_to_go(&endpoints, horizon, &captured)
            } else {
                let collected: f64 = captured
                    .iter()
                    .map(|&i| {
                        ctx.live[i]
                            .target
                            .reward_at(state.clock + horizon, spec.mission_time)
                    })
                    .sum();
                let mut live = state.live_targets.clone();
                for &i in &captured {
                    live.remove(&ctx.live[i].target.id);
                }
                let child = Node {
                    clock: state.clock + horizon,
                    positions: endpoints,
                    live,
                    accumulated: collected,
                };
                match explore(spec, &child, depth - 1, &mut nodes_left) {
                    Some(v) => immediate + v,
                    None => {
                        exceeded = true;
                        break;
                    }
                }
            };
            if best.as_ref().map_or(true, |(b, _)| value > *b) {
                best = Some((value, indices));
            }
        }
        if exceeded {
            continue;
        }
        let (objective_value, chosen) = best.expect("candidate sets are nonempty");
        let chosen_headings: Vec<f64> = chosen
            .iter()
            .enumerate()
            .map(|(j, &c)| candidates[j][c].heading)
            .collect();
        let chosen_targets: Vec<TargetId> = chosen
            .iter()
            .enumerate()
            .map(|(j, &c)| candidates[j][c].target)
            .collect();
        let (action_horizon, crossing) = ctx.action_horizon_detail(&chosen_headings, horizon);
        return Ok(ControlDecision {
            planning_horizon: horizon,
            joint_candidates: candidates,
            chosen_headings,
            chosen_targets,
            action_horizon,
            crossing_agent: crossing.map(|j| spec.agents[j].id),
            objective_value,
            truncated: depth < full_depth,
        });
    }
    unreachable!("depth 1 search runs within any budget");
}

/// Size of the full visit-sequence tree of a single-agent mission: each node
/// branches over the active target set from the current position, committing
/// the agent to the chosen target before expanding further.
pub fn count_paths(spec: &MissionSpec, state: &MissionState) -> Result<u64, LookaheadError> {
    const CAP: usize = 12;
    if spec.agents.len() != 1 {
        return Err(LookaheadError::MultiAgent);
    }
    if state.live_targets.len() > CAP {
        return Err(LookaheadError::TreeTooLarge {
            targets: state.live_targets.len(),
            cap: CAP,
        });
    }
    fn recurse(spec: &MissionSpec, clock: f64, position: Point, live: &BTreeSet<TargetId>) -> u64 {
        if live.is_empty() {
            return 1;
        }
        let ctx = StepContext::new(spec, clock, vec![position], live);
        let horizon = ctx.planning_horizon().expect("nonempty live set");
        let all: Vec<usize> = (0..ctx.live.len()).collect();
        let active = ctx.active_indices(0, horizon, &all);
        let speed = spec.agents[0].speed;
        let mut paths = 0;
        for i in active {
            let target = ctx.live[i].target;
            let leg = (distance(position, target.position) - target.capture_radius).max(0.0);
            let capture = closest_point(position, target.position, leg).point;
            let mut rest = live.clone();
            rest.remove(&target.id);
            paths += recurse(spec, clock + leg / speed, capture, &rest);
        }
        paths
    }
    Ok(recurse(
        spec,
        state.clock,
        state.agent_positions[0],
        &state.live_targets,
    ))
}
