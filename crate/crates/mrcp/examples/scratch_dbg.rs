use mrcp::engine::run_mission;
use mrcp::geometry::{Point, Rect};
use mrcp::model::*;

fn target(id: u32, x: f64, y: f64, reward: f64, deadline: f64) -> Target {
    Target {
        id: TargetId(id),
        position: Point::new(x, y),
        initial_reward: reward,
        alpha: 1.0,
        beta: 1.0,
        deadline,
        capture_radius: 0.0,
        appears_at: 0.0,
    }
}

fn agent(id: u32, x: f64, y: f64) -> Agent {
    Agent {
        id: AgentId(id),
        position: Point::new(x, y),
        speed: 1.0,
        heading: 0.0,
        sensing_range: None,
    }
}

fn main() {
    let s = MissionSpec {
        space: Rect::new(Point::new(-1000.0, -1000.0), Point::new(2000.0, 2000.0)),
        base: Point::new(0.0, 0.0),
        mission_time: 1000.0,
        targets: vec![
            target(1, 12.0, 3.0, 10.0, 300.0),
            target(2, 25.0, -9.0, 8.0, 400.0),
            target(3, 7.0, 30.0, 12.0, 350.0),
        ],
        agents: vec![agent(1, 0.0, 0.0), agent(2, 30.0, 10.0)],
        control: ControllerConfig::default(),
    };
    let log = run_mission(&s).unwrap();
    for e in log.events.iter().take(40) {
        println!("{:12.6}  {:?}", e.time, e.kind);
    }
    println!("... {} events total, reward {}", log.events.len(), log.total_reward);
}
