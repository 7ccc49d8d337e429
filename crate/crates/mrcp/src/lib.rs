//! Event-driven cooperative receding horizon control for maximum reward
//! collection missions.
//!
//! Mobile agents collect time-decaying rewards from stationary targets in a
//! planar mission space. At event-driven instants the controller solves a
//! finite optimization: it computes the planning horizon (earliest possible
//! capture), reduces the feasible headings of each agent to the finite set
//! induced by its active targets, estimates reward-to-go through greedy
//! travel-cost tours over a cooperative target partition, and optionally
//! looks ahead several hypothetical steps. The chosen joint heading is
//! executed until the next event: a capture, a target appearance or expiry,
//! a sensing-range discovery, or a multiple-immediate-target crossing.
//!
//! The crate ships the mission engine, brute-force and analytic oracles for
//! verifying the controller, mission/TSPLIB ingestion, seeded mission
//! generation, and reporting. See the `examples/` directory for runnable
//! walkthroughs of each capability, or use the `crh` binary for the same
//! workflows from the command line.

pub mod controller;
pub mod engine;
pub mod cooperation;
pub mod geometry;
pub mod lookahead;
pub mod model;

pub use controller::{ControlDecision, MissionState};
pub use engine::{run_mission, MissionEvent, MissionLog};
pub use geometry::{distance, Point, Rect};
pub use model::{Agent, AgentId, ControllerConfig, MissionSpec, Target, TargetId};
