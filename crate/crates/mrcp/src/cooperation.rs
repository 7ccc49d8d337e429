//! Agent-to-target responsibility sharing.
//!
//! Each target has a neighbor set of its `b` closest agents. Relative
//! distances within the neighbor set feed a piecewise-linear proximity
//! function, and the proximity ordering partitions the live targets among
//! agents for reward-to-go estimation. Functions take explicit position
//! slices so they work equally on real and hypothetical agent locations.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::geometry::{distance, Point};
use crate::model::{AgentId, TargetId};

#[derive(Debug, Error, PartialEq)]
pub enum CooperationError {
    #[error("no agents")]
    NoAgents,
}

/// Distance, relative distance, and proximity matrices for one control
/// instant; rows follow `target_ids`, columns follow `agent_ids`.
#[derive(Debug, Clone)]
pub struct ProximityTable {
    pub target_ids: Vec<TargetId>,
    pub agent_ids: Vec<AgentId>,
    pub direct_distances: Vec<Vec<f64>>,
    pub relative_distances: Vec<Vec<f64>>,
    pub proximities: Vec<Vec<f64>>,
}

/// Ownership map produced by the proximity comparison; total over the
/// supplied targets.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetPartition {
    pub assignment: BTreeMap<TargetId, AgentId>,
    pub sizes: BTreeMap<AgentId, usize>,
}

impl TargetPartition {
    pub fn owned_by(&self, agent: AgentId) -> Vec<TargetId> {
        self.assignment
            .iter()
            .filter(|(_, owner)| **owner == agent)
            .map(|(target, _)| *target)
            .collect()
    }
}

/// The `min(b, N)` agents closest to `target_position`, nearest first,
/// distance ties broken by ascending agent id.
pub fn neighbor_set(
    target_position: Point,
    agents: &[(AgentId, Point)],
    b: usize,
) -> Result<Vec<AgentId>, CooperationError> {
    if agents.is_empty() {
        return Err(CooperationError::NoAgents);
    }
    let mut by_distance: Vec<(f64, AgentId)> = agents
        .iter()
        .map(|(id, pos)| (distance(target_position, *pos), *id))
        .collect();
    by_distance.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
    Ok(by_distance
        .into_iter()
        .take(b.min(agents.len()))
        .map(|(_, id)| id)
        .collect())
}

/// Relative distance of one agent to a target given the target's neighbor
/// set: its share of the summed neighbor distances, 1 for non-members, and 0
/// for members when every neighbor sits exactly on the target.
pub fn relative_distance(
    target_position: Point,
    agent: AgentId,
    agents: &[(AgentId, Point)],
    neighbors: &[AgentId],
) -> f64 {
    if !neighbors.contains(&agent) {
        return 1.0;
    }
    let pos_of = |id: AgentId| {
        agents
            .iter()
            .find(|(a, _)| *a == id)
            .map(|(_, p)| *p)
            .expect("neighbor id not in agent list")
    };
    let total: f64 = neighbors
        .iter()
        .map(|id| distance(target_position, pos_of(*id)))
        .sum();
    if total == 0.0 {
        return 0.0;
    }
    distance(target_position, pos_of(agent)) / total
}

/// Relative proximity function: 1 up to `delta_max`, linearly decreasing
/// through the cooperation band, 0 beyond it.
pub fn proximity(delta: f64, delta_max: f64) -> f64 {
    if delta <= delta_max {
        1.0
    } else if delta <= 1.0 - delta_max {
        (1.0 - delta_max - delta) / (1.0 - 2.0 * delta_max)
    } else {
        0.0
    }
}

impl ProximityTable {
    pub fn compute(
        targets: &[(TargetId, Point)],
        agents: &[(AgentId, Point)],
        neighbor_count: usize,
        cooperation_delta: f64,
    ) -> Result<Self, CooperationError> {
        if agents.is_empty() {
            return Err(CooperationError::NoAgents);
        }
        let mut direct = Vec::with_capacity(targets.len());
        let mut relative = Vec::with_capacity(targets.len());
        let mut prox = Vec::with_capacity(targets.len());
        for (_, tpos) in targets {
            let neighbors = neighbor_set(*tpos, agents, neighbor_count)?;
            let mut drow = Vec::with_capacity(agents.len());
            let mut rrow = Vec::with_capacity(agents.len());
            let mut prow = Vec::with_capacity(agents.len());
            for (aid, apos) in agents {
                drow.push(distance(*tpos, *apos));
                let delta = relative_distance(*tpos, *aid, agents, &neighbors);
                rrow.push(delta);
                prow.push(proximity(delta, cooperation_delta));
            }
            direct.push(drow);
            relative.push(rrow);
            prox.push(prow);
        }
        Ok(Self {
            target_ids: targets.iter().map(|(id, _)| *id).collect(),
            agent_ids: agents.iter().map(|(id, _)| *id).collect(),
            direct_distances: direct,
            relative_distances: relative,
            proximities: prox,
        })
    }
}

/// Assigns every target to exactly one agent: the one with the strictly
/// largest proximity, ties broken by smaller direct distance, then by lower
/// agent id.
pub fn partition_targets(
    targets: &[(TargetId, Point)],
    agents: &[(AgentId, Point)],
    neighbor_count: usize,
    cooperation_delta: f64,
) -> Result<TargetPartition, CooperationError> {
    let table = ProximityTable::compute(targets, agents, neighbor_count, cooperation_delta)?;
    let mut assignment = BTreeMap::new();
    let mut sizes: BTreeMap<AgentId, usize> = agents.iter().map(|(id, _)| (*id, 0)).collect();
    for (row, (tid, _)) in targets.iter().enumerate() {
        let mut best = 0;
        for col in 1..agents.len() {
            let better = table.proximities[row][col] > table.proximities[row][best]
                || (table.proximities[row][col] == table.proximities[row][best]
                    && (table.direct_distances[row][col] < table.direct_distances[row][best]
                        || (table.direct_distances[row][col] == table.direct_distances[row][best]
                            && table.agent_ids[col] < table.agent_ids[best])));
            if better {
                best = col;
            }
        }
        let owner = table.agent_ids[best];
        assignment.insert(*tid, owner);
        *sizes.get_mut(&owner).unwrap() += 1;
    }
    Ok(TargetPartition { assignment, sizes })
}
