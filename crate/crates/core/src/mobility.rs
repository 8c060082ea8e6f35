//! UE placement and movement inside the circular cell.
//!
//! Mobile users follow a memory-based smooth random model: speed ramps
//! toward a target speed under a bounded acceleration, heading turns toward
//! a target heading redrawn after exponentially distributed intervals, and
//! a user reaching the cell edge has its heading shifted by pi.

use std::f64::consts::{PI, TAU};

use rand::Rng;
use rand_distr::{Distribution, Exp};

use crate::error::{Result, SimError};
use crate::geometry::GroundPosition;
use crate::streams::{seeded_stream, Purpose};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MobilityMode {
    #[default]
    Static,
    SmoothRandom,
}

impl MobilityMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            MobilityMode::Static => "static",
            MobilityMode::SmoothRandom => "mobile",
        }
    }
}

impl std::str::FromStr for MobilityMode {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "static" => Ok(Self::Static),
            "mobile" | "smooth_random" => Ok(Self::SmoothRandom),
            other => Err(SimError::Config(format!("unknown mobility mode '{other}' (static, mobile)"))),
        }
    }
}

/// A speed with elevated selection probability.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PreferredSpeed {
    pub speed: f64,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MobilityConfig {
    pub mode: MobilityMode,
    /// Maximum speed in m/s.
    pub v_max: f64,
    /// Remaining probability mass is uniform over `[0, v_max]`.
    pub preferred_speeds: Vec<PreferredSpeed>,
    /// Mean time between heading changes in seconds (exponential).
    pub direction_change_mean: f64,
    /// Time over which the heading drifts to a new target, seconds.
    pub direction_drift_time: f64,
    /// Bound on |dv/dt| in m/s².
    pub accel_max: f64,
}

impl Default for MobilityConfig {
    fn default() -> Self {
        Self::with_mode(MobilityMode::Static, 10.0)
    }
}

impl MobilityConfig {
    pub fn with_mode(mode: MobilityMode, v_max: f64) -> Self {
        Self {
            mode,
            v_max,
            preferred_speeds: vec![
                PreferredSpeed { speed: 0.0, probability: 0.2 },
                PreferredSpeed { speed: v_max, probability: 0.2 },
            ],
            direction_change_mean: 5.0,
            direction_drift_time: 1.0,
            accel_max: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.v_max > 0.0 && self.v_max.is_finite()) {
            return Err(SimError::Config(format!("v_max must be positive, got {}", self.v_max)));
        }
        let mut total = 0.0;
        for p in &self.preferred_speeds {
            if !(0.0..=self.v_max).contains(&p.speed) {
                return Err(SimError::Config(format!("preferred speed {} outside [0, v_max]", p.speed)));
            }
            if !(p.probability >= 0.0) {
                return Err(SimError::Config("preferred speed probability must be >= 0".into()));
            }
            total += p.probability;
        }
        if total > 1.0 + 1e-12 {
            return Err(SimError::Config(format!("preferred speed probabilities sum to {total} > 1")));
        }
        for (name, v) in [
            ("direction_change_mean", self.direction_change_mean),
            ("direction_drift_time", self.direction_drift_time),
            ("accel_max", self.accel_max),
        ] {
            if !(v > 0.0) {
                return Err(SimError::Config(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    fn draw_speed<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for p in &self.preferred_speeds {
            acc += p.probability;
            if u < acc {
                return p.speed;
            }
        }
        rng.random_range(0.0..=self.v_max)
    }

    fn draw_direction_interval<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        Exp::new(1.0 / self.direction_change_mean).expect("validated positive mean").sample(rng)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UserState {
    pub position: GroundPosition,
    /// m/s
    pub speed: f64,
    /// Heading in radians, normalised to [0, 2pi).
    pub direction: f64,
    pub target_speed: f64,
    pub target_direction: f64,
    /// Signed heading rate while turning, rad/s.
    pub turn_rate: f64,
    pub time_to_direction_change: f64,
}

impl UserState {
    pub fn stationary(position: GroundPosition) -> Self {
        Self {
            position,
            speed: 0.0,
            direction: 0.0,
            target_speed: 0.0,
            target_direction: 0.0,
            turn_rate: 0.0,
            time_to_direction_change: f64::INFINITY,
        }
    }
}

fn wrap_angle(a: f64) -> f64 {
    let w = a.rem_euclid(TAU);
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// Smallest signed rotation taking `from` to `to`, in (-pi, pi].
fn angle_diff(from: f64, to: f64) -> f64 {
    let d = (to - from).rem_euclid(TAU);
    if d > PI {
        d - TAU
    } else {
        d
    }
}

/// Area-uniform position in the disc of radius `cell_radius`.
pub fn place_uniform<R: Rng + ?Sized>(cell_radius: f64, rng: &mut R) -> GroundPosition {
    let r = cell_radius * rng.random::<f64>().sqrt();
    let theta = rng.random_range(0.0..TAU);
    GroundPosition::new(r * theta.cos(), r * theta.sin())
}

/// One user: position from `placement`, kinematic state from `motion`.
pub fn init_user<R: Rng + ?Sized>(
    cell_radius: f64,
    config: &MobilityConfig,
    placement: &mut R,
    motion: &mut R,
) -> UserState {
    let position = place_uniform(cell_radius, placement);
    let direction = motion.random_range(0.0..TAU);
    match config.mode {
        MobilityMode::Static => {
            UserState { direction, target_direction: direction, ..UserState::stationary(position) }
        }
        MobilityMode::SmoothRandom => UserState {
            position,
            speed: config.draw_speed(motion),
            direction,
            target_speed: config.draw_speed(motion),
            target_direction: direction,
            turn_rate: 0.0,
            time_to_direction_change: config.draw_direction_interval(motion),
        },
    }
}

/// Places `count` users for one drop, each from its own keyed streams.
pub fn init_users(
    count: usize,
    cell_radius: f64,
    config: &MobilityConfig,
    seed: u64,
    drop: u64,
) -> Result<Vec<UserState>> {
    if count == 0 {
        return Err(SimError::Config("user count must be at least 1".into()));
    }
    Ok((0..count as u64)
        .map(|u| {
            let mut placement = seeded_stream(seed, drop, u, Purpose::Placement);
            let mut motion = seeded_stream(seed, drop, u, Purpose::Mobility);
            init_user(cell_radius, config, &mut placement, &mut motion)
        })
        .collect())
}

/// Advances one user by `dt` seconds.
pub fn step<R: Rng + ?Sized>(
    user: &UserState,
    dt: f64,
    cell_radius: f64,
    config: &MobilityConfig,
    rng: &mut R,
) -> UserState {
    if config.mode == MobilityMode::Static {
        return *user;
    }
    let mut next = *user;

    // Speed ramps toward its target; a new target is drawn on arrival.
    let max_dv = config.accel_max * dt;
    let gap = next.target_speed - next.speed;
    if gap.abs() <= max_dv {
        next.speed = next.target_speed;
        next.target_speed = config.draw_speed(rng);
    } else {
        next.speed += max_dv.copysign(gap);
    }
    next.speed = next.speed.clamp(0.0, config.v_max);

    // Heading drifts linearly toward its target.
    if next.turn_rate != 0.0 {
        let remaining = angle_diff(next.direction, next.target_direction);
        let turn = next.turn_rate * dt;
        if turn.abs() >= remaining.abs() {
            next.direction = next.target_direction;
            next.turn_rate = 0.0;
        } else {
            next.direction = wrap_angle(next.direction + turn);
        }
    }
    next.time_to_direction_change -= dt;
    if next.time_to_direction_change <= 0.0 {
        next.target_direction = rng.random_range(0.0..TAU);
        next.turn_rate = angle_diff(next.direction, next.target_direction) / config.direction_drift_time;
        next.time_to_direction_change = config.draw_direction_interval(rng);
    }

    let travel = next.speed * dt;
    let (sin, cos) = next.direction.sin_cos();
    let start = user.position;
    let proposed = GroundPosition::new(start.x + travel * cos, start.y + travel * sin);
    if proposed.radius() <= cell_radius {
        next.position = proposed;
        return next;
    }

    // Edge reached: reverse the heading and spend the leftover travel
    // moving back from the boundary crossing point.
    let along = boundary_crossing(start, cos, sin, cell_radius).clamp(0.0, travel);
    let edge = GroundPosition::new(start.x + along * cos, start.y + along * sin);
    next.direction = wrap_angle(next.direction + PI);
    next.target_direction = next.direction;
    next.turn_rate = 0.0;
    let back = travel - along;
    next.position = contain(GroundPosition::new(edge.x - back * cos, edge.y - back * sin), cell_radius);
    next
}

/// Distance along the unit heading `(cos, sin)` from `start` (inside the
/// disc) to the circle of radius `r`.
fn boundary_crossing(start: GroundPosition, cos: f64, sin: f64, r: f64) -> f64 {
    let b = start.x * cos + start.y * sin;
    let c = start.x * start.x + start.y * start.y - r * r;
    let disc = (b * b - c).max(0.0);
    -b + disc.sqrt()
}

fn contain(p: GroundPosition, r: f64) -> GroundPosition {
    let rho = p.radius();
    if rho <= r {
        return p;
    }
    let mut scale = r / rho;
    loop {
        let q = GroundPosition::new(p.x * scale, p.y * scale);
        if q.x * q.x + q.y * q.y <= r * r {
            return q;
        }
        scale *= 1.0 - f64::EPSILON;
    }
}
