#![allow(dead_code)]

use leo_handover::geometry::GroundPosition;
use leo_handover::mobility::{self, MobilityConfig, MobilityMode};
use leo_handover::streams::{seeded_stream, Purpose};

pub const CELL_RADIUS: f64 = 25_000.0;

/// Steps `users` smooth-random users for `steps` steps of 10 ms and counts
/// containment, speed-range, acceleration and displacement violations.
pub fn mobility_violations(users: u64, steps: usize) -> usize {
    let r = CELL_RADIUS;
    let cfg = MobilityConfig::with_mode(MobilityMode::SmoothRandom, 10.0);
    let dt = 0.01;
    let mut violations = 0;
    for u in 0..users {
        let mut place = seeded_stream(11, 0, u, Purpose::Placement);
        let mut motion = seeded_stream(11, 0, u, Purpose::Mobility);
        let mut user = mobility::init_user(r, &cfg, &mut place, &mut motion);
        // a quarter start on the edge so reflections get exercised
        if u % 4 == 0 {
            let a = u as f64;
            user.position = GroundPosition::new(r * a.cos(), r * a.sin());
        }
        for _ in 0..steps {
            let next = mobility::step(&user, dt, r, &cfg, &mut motion);
            let moved = (next.position.x - user.position.x).hypot(next.position.y - user.position.y);
            if next.position.radius() > r * (1.0 + 1e-12)
                || !(0.0..=cfg.v_max).contains(&next.speed)
                || (next.speed - user.speed).abs() > cfg.accel_max * dt + 1e-12
                || moved > cfg.v_max * dt + 1e-9
            {
                violations += 1;
            }
            user = next;
        }
    }
    violations
}

fn ks_uniform(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter().enumerate().map(|(i, &x)| ((i + 1) as f64 / n - x).max(x - i as f64 / n)).fold(0.0, f64::max)
}

/// KS statistics of (r/R)^2 and theta/2pi against U(0, 1) for `n` placed
/// users, with the 1% critical value.
pub fn placement_ks(n: u64) -> ([f64; 2], f64) {
    let cfg = MobilityConfig::default();
    let tau = std::f64::consts::TAU;
    let (mut r2, mut theta) = (Vec::new(), Vec::new());
    for u in 0..n {
        let mut place = seeded_stream(5, 0, u, Purpose::Placement);
        let mut motion = seeded_stream(5, 0, u, Purpose::Mobility);
        let p = mobility::init_user(CELL_RADIUS, &cfg, &mut place, &mut motion).position;
        r2.push((p.radius() / CELL_RADIUS).powi(2));
        theta.push(p.y.atan2(p.x).rem_euclid(tau) / tau);
    }
    ([ks_uniform(r2), ks_uniform(theta)], 1.628 / (n as f64).sqrt())
}
