//! Mission model: targets, agents, reward discounting, and the static
//! mission description consumed by the engine.
//!
//! All reward arithmetic lives here. A target's reward at time `t` is
//! `initial_reward * discount(t)` where the discount is linear down to the
//! effective deadline and exponential past it. Values are immutable once
//! built; every operation is a pure function of its inputs.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{self, Point, Rect};

/// Identifier of a target within a mission.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct TargetId(pub u32);

/// Identifier of an agent within a mission.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct AgentId(pub u32);

impl std::fmt::Display for TargetId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::fmt::Display for AgentId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A stationary reward-bearing target.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Target {
    pub id: TargetId,
    pub position: Point,
    /// Maximum reward, collected when visiting at time 0.
    pub initial_reward: f64,
    /// Fraction of the reward that decays linearly by the deadline.
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    /// Exponential decay rate of the residual reward past the deadline.
    #[serde(default = "default_beta")]
    pub beta: f64,
    /// Time at which the linear decay segment ends.
    pub deadline: f64,
    /// Visit radius: the target is collected when an agent comes this close.
    #[serde(default)]
    pub capture_radius: f64,
    /// Time at which the target becomes known; 0 means known at mission start.
    #[serde(default)]
    pub appears_at: f64,
}

fn default_alpha() -> f64 {
    1.0
}

fn default_beta() -> f64 {
    1.0
}

impl Target {
    /// Deadline actually used for discounting: the reward cannot outlive the
    /// mission, so the stated deadline is capped at the mission time.
    pub fn effective_deadline(&self, mission_time: f64) -> f64 {
        self.deadline.min(mission_time)
    }

    /// Discount fraction at time `t`, clamped into `[0, 1]`.
    pub fn discount(&self, t: f64, mission_time: f64) -> f64 {
        let d = self.effective_deadline(mission_time);
        let phi = if t <= d {
            1.0 - self.alpha / d * t
        } else {
            (1.0 - self.alpha) * (-self.beta * (t - d)).exp()
        };
        phi.clamp(0.0, 1.0)
    }

    /// Reward collected when visiting at time `t`.
    pub fn reward_at(&self, t: f64, mission_time: f64) -> f64 {
        self.initial_reward * self.discount(t, mission_time)
    }

    /// Average reward decay rate `initial_reward / effective_deadline`,
    /// the denominator of the travel cost.
    pub fn decay_rate(&self, mission_time: f64) -> f64 {
        self.initial_reward / self.effective_deadline(mission_time)
    }

    /// True once the remaining reward has fallen to `epsilon` of the initial
    /// reward; the discount is non-increasing, so it never recovers.
    pub fn is_expired(&self, t: f64, mission_time: f64, epsilon: f64) -> bool {
        self.discount(t, mission_time) <= epsilon
    }

    /// Earliest time at which [`Target::is_expired`] becomes true, or
    /// `f64::INFINITY` when the tail never decays below the threshold.
    pub fn expiry_time(&self, mission_time: f64, epsilon: f64) -> f64 {
        let d = self.effective_deadline(mission_time);
        if self.alpha > 0.0 {
            let t_linear = d * (1.0 - epsilon) / self.alpha;
            if t_linear <= d {
                return t_linear;
            }
        }
        let tail = 1.0 - self.alpha;
        if tail <= epsilon {
            return d;
        }
        if self.beta <= 0.0 {
            return f64::INFINITY;
        }
        d + (tail / epsilon).ln() / self.beta
    }
}

/// A mobile agent moving at fixed speed along a controllable heading.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Agent {
    pub id: AgentId,
    pub position: Point,
    #[serde(default = "default_speed")]
    pub speed: f64,
    #[serde(default)]
    pub heading: f64,
    /// Detection radius; `None` means full information.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sensing_range: Option<f64>,
}

fn default_speed() -> f64 {
    1.0
}

/// Controller parameters shared by every control evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ControllerConfig {
    /// Lookahead depth K; 1 evaluates a single step of immediate reward plus
    /// reward-to-go.
    pub lookahead_depth: u32,
    /// Weight of the sparsity factor; 0 disables it.
    pub sparsity_gamma: f64,
    /// Number of nearest neighbor targets entering the sparsity factor.
    pub sparsity_neighbors: u32,
    /// Cooperation level of the relative proximity function, in `[0, 0.5)`.
    pub cooperation_delta: f64,
    /// Size of the per-target agent neighbor set.
    pub neighbor_count: u32,
    /// A target is dropped once its remaining reward fraction falls to this.
    pub reward_epsilon: f64,
    /// Tolerance for boundary comparisons (captures, ties, arc membership).
    pub tie_tolerance: f64,
    /// Cap on lookahead tree nodes; exceeding it truncates the expansion.
    pub node_budget: u64,
    /// Fly agents back to base after the mission; affects only trajectories.
    pub return_to_base: bool,
}

impl Default for ControllerConfig {
    fn default() -> Self {
        Self {
            lookahead_depth: 1,
            sparsity_gamma: 0.0,
            sparsity_neighbors: 5,
            cooperation_delta: 0.0,
            neighbor_count: 2,
            reward_epsilon: 1e-6,
            tie_tolerance: 1e-9,
            node_budget: 1_000_000,
            return_to_base: false,
        }
    }
}

/// Static description of a mission: the space, the base, all targets and
/// agents, and the controller configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MissionSpec {
    pub space: Rect,
    pub base: Point,
    pub mission_time: f64,
    pub targets: Vec<Target>,
    pub agents: Vec<Agent>,
    #[serde(default)]
    pub control: ControllerConfig,
}

/// Invariant violations found while validating a mission, each naming the
/// offending field.
#[derive(Debug, Error)]
#[error("invalid mission spec:\n{}", violations.join("\n"))]
pub struct ValidationError {
    pub violations: Vec<String>,
}

impl MissionSpec {
    pub fn target(&self, id: TargetId) -> &Target {
        self.targets
            .iter()
            .find(|t| t.id == id)
            .expect("unknown target id")
    }

    /// Checks every model invariant, collecting all violations.
    pub fn validate(&self) -> Result<(), ValidationError> {
        let mut v = Vec::new();
        if !(self.mission_time > 0.0) {
            v.push(format!("mission_time: must be positive, got {}", self.mission_time));
        }
        if self.space.max.x < self.space.min.x || self.space.max.y < self.space.min.y {
            v.push("space: max must not be below min".to_string());
        }
        if !self.space.contains(self.base) {
            v.push("base: must lie inside space".to_string());
        }
        if self.agents.is_empty() {
            v.push("agents: at least one agent required".to_string());
        }
        let mut target_ids = std::collections::BTreeSet::new();
        for (i, t) in self.targets.iter().enumerate() {
            let path = |field: &str| format!("targets[{i}].{field}");
            if !target_ids.insert(t.id) {
                v.push(format!("{}: duplicate target id {}", path("id"), t.id));
            }
            if !self.space.contains(t.position) {
                v.push(format!("{}: outside space", path("position")));
            }
            if !(t.initial_reward > 0.0) {
                v.push(format!("{}: must be positive", path("initial_reward")));
            }
            if !(0.0..=1.0).contains(&t.alpha) {
                v.push(format!("{}: must be within [0,1], got {}", path("alpha"), t.alpha));
            }
            if !(t.beta >= 0.0) {
                v.push(format!("{}: must be nonnegative", path("beta")));
            }
            if !(t.deadline > 0.0) {
                v.push(format!("{}: must be positive", path("deadline")));
            }
            if !(t.capture_radius >= 0.0) {
                v.push(format!("{}: must be nonnegative", path("capture_radius")));
            }
            if !(t.appears_at >= 0.0) {
                v.push(format!("{}: must be nonnegative", path("appears_at")));
            }
        }
        let mut agent_ids = std::collections::BTreeSet::new();
        for (i, a) in self.agents.iter().enumerate() {
            let path = |field: &str| format!("agents[{i}].{field}");
            if !agent_ids.insert(a.id) {
                v.push(format!("{}: duplicate agent id {}", path("id"), a.id));
            }
            if !self.space.contains(a.position) {
                v.push(format!("{}: outside space", path("position")));
            }
            if !(a.speed > 0.0) {
                v.push(format!("{}: must be positive", path("speed")));
            }
            if let Some(r) = a.sensing_range {
                if !(r > 0.0) {
                    v.push(format!("{}: must be positive when present", path("sensing_range")));
                }
            }
        }
        let c = &self.control;
        if c.lookahead_depth < 1 {
            v.push("control.lookahead_depth: must be at least 1".to_string());
        }
        if !(0.0..=1.0).contains(&c.sparsity_gamma) {
            v.push(format!(
                "control.sparsity_gamma: must be within [0,1], got {}",
                c.sparsity_gamma
            ));
        }
        if !(0.0..0.5).contains(&c.cooperation_delta) {
            v.push(format!(
                "control.cooperation_delta: must be within [0,0.5), got {}",
                c.cooperation_delta
            ));
        }
        if c.neighbor_count < 1 {
            v.push("control.neighbor_count: must be at least 1".to_string());
        }
        if !(c.reward_epsilon > 0.0) {
            v.push("control.reward_epsilon: must be positive".to_string());
        }
        if !(c.tie_tolerance > 0.0) {
            v.push("control.tie_tolerance: must be positive".to_string());
        }
        if v.is_empty() {
            Ok(())
        } else {
            Err(ValidationError { violations: v })
        }
    }
}

/// Visit test: an agent at `position` collects `target` when within its
/// capture radius, boundary inclusive up to `tie_tolerance`.
pub fn is_visit(position: Point, target: &Target, tie_tolerance: f64) -> bool {
    geometry::distance(position, target.position) <= target.capture_radius + tie_tolerance
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn target(alpha: f64, beta: f64, deadline: f64) -> Target {
        Target {
            id: TargetId(0),
            position: Point::new(0.0, 0.0),
            initial_reward: 10.0,
            alpha,
            beta,
            deadline,
            capture_radius: 0.0,
            appears_at: 0.0,
        }
    }

    #[test]
    fn discount_linear_endpoints() {
        let t = target(1.0, 1.0, 300.0);
        assert_eq!(t.discount(0.0, 1000.0), 1.0);
        assert_eq!(t.discount(300.0, 1000.0), 0.0);
        assert_eq!(t.discount(150.0, 1000.0), 0.5);
    }

    #[test]
    fn discount_exponential_tail() {
        let t = target(0.5, 1.0, 10.0);
        let got = t.discount(11.0, 1000.0);
        let want = 0.5 * (-1.0_f64).exp();
        assert!((got - want).abs() < 1e-12, "got {got}, want {want}");
        assert!((want - 0.18394).abs() < 1e-5);
    }

    #[test]
    fn reward_values() {
        let t = target(1.0, 1.0, 300.0);
        assert_eq!(t.reward_at(150.0, 1000.0), 5.0);
        assert_eq!(t.reward_at(0.0, 1000.0), 10.0);
        let t12 = Target {
            initial_reward: 12.0,
            ..target(1.0, 1.0, 300.0)
        };
        assert_eq!(t12.reward_at(400.0, 1000.0), 0.0);
    }

    #[test]
    fn effective_deadline_is_min() {
        let t = target(1.0, 1.0, 600.0);
        assert_eq!(t.effective_deadline(300.0), 300.0);
        assert_eq!(target(1.0, 1.0, 300.0).effective_deadline(300.0), 300.0);
        assert_eq!(target(1.0, 1.0, 100.0).effective_deadline(300.0), 100.0);
    }

    #[test]
    fn expiry_linear_and_tail() {
        let lin = target(1.0, 1.0, 300.0);
        let te = lin.expiry_time(1000.0, 1e-6);
        assert!((te - 300.0 * (1.0 - 1e-6)).abs() < 1e-6);
        assert!(lin.is_expired(300.0, 1000.0, 1e-6));
        assert!(!lin.is_expired(299.9, 1000.0, 1e-6));

        let flat = target(0.5, 0.0, 10.0);
        assert_eq!(flat.expiry_time(1000.0, 1e-6), f64::INFINITY);

        let tail = target(0.5, 1.0, 10.0);
        let te = tail.expiry_time(1000.0, 1e-6);
        assert!((tail.discount(te, 1000.0) - 1e-6).abs() < 1e-12);
    }

    #[test]
    fn visit_boundary_inclusive() {
        let mut t = target(1.0, 1.0, 300.0);
        t.capture_radius = 0.5;
        assert!(is_visit(Point::new(0.5, 0.0), &t, 1e-9));
        assert!(!is_visit(Point::new(1.0, 0.0), &t, 1e-9));
        t.capture_radius = 0.0;
        assert!(is_visit(Point::new(0.0, 0.0), &t, 1e-9));
    }

    #[test]
    fn validation_rejects_bad_alpha() {
        let spec = MissionSpec {
            space: Rect::new(Point::new(0.0, 0.0), Point::new(10.0, 10.0)),
            base: Point::new(5.0, 5.0),
            mission_time: 100.0,
            targets: vec![Target {
                alpha: 1.5,
                ..target(1.0, 1.0, 300.0)
            }],
            agents: vec![Agent {
                id: AgentId(1),
                position: Point::new(1.0, 1.0),
                speed: 1.0,
                heading: 0.0,
                sensing_range: None,
            }],
            control: ControllerConfig::default(),
        };
        let err = spec.validate().unwrap_err();
        assert!(err.violations.iter().any(|m| m.contains("alpha")));
    }

    proptest! {
        #[test]
        fn discount_non_increasing(
            alpha in 0.0..=1.0f64,
            beta in 0.0..5.0f64,
            deadline in 1.0..500.0f64,
            mission_time in 1.0..1000.0f64,
        ) {
            let t = Target { alpha, beta, deadline, ..target(1.0, 1.0, 1.0) };
            let horizon = 2.0 * t.effective_deadline(mission_time).max(1.0);
            let mut prev = t.discount(0.0, mission_time);
            for i in 1..=1000 {
                let now = t.discount(horizon * i as f64 / 1000.0, mission_time);
                prop_assert!(now <= prev + 1e-12);
                prop_assert!((0.0..=1.0).contains(&now));
                prev = now;
            }
        }

        #[test]
        fn discount_continuous_at_deadline(
            alpha in 0.0..=1.0f64,
            beta in 0.0..5.0f64,
            deadline in 1.0..500.0f64,
        ) {
            let t = Target { alpha, beta, deadline, ..target(1.0, 1.0, 1.0) };
            let mission_time = 1e9;
            let left = t.discount(deadline, mission_time);
            let right = t.discount(deadline + 1e-9, mission_time);
            prop_assert!((left - right).abs() < 1e-6);
        }

        #[test]
        fn reward_bounded_by_initial(t_query in 0.0..2000.0f64, deadline in 1.0..600.0f64) {
            let t = target(1.0, 1.0, deadline);
            prop_assert!(t.reward_at(t_query, 1000.0) <= t.initial_reward);
        }

        #[test]
        fn advance_preserves_distance(
            x in -100.0..100.0f64,
            y in -100.0..100.0f64,
            heading in 0.0..std::f64::consts::TAU,
            speed in 0.1..10.0f64,
            dt in 0.0..100.0f64,
        ) {
            let p = Point::new(x, y);
            let q = geometry::advance(p, heading, speed, dt);
            prop_assert!((geometry::distance(p, q) - speed * dt).abs() < 1e-9);
        }
    }
}
