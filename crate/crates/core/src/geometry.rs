//! Constellation pass geometry.
//!
//! The frame is a local tangent plane centred on the cell: satellites fly
//! along +x directly over the cell centre, ground points are `(x, y)` in
//! metres. Elevation uses the flat horizontal offset, slant range uses the
//! spherical-Earth relation between elevation and altitude.

use crate::error::{Result, SimError};

/// Mean Earth radius in metres.
pub const EARTH_RADIUS_M: f64 = 6_371_000.0;

/// Cell radius in metres (50 km diameter).
pub const CELL_RADIUS_M: f64 = 25_000.0;

/// A point on the ground in the local frame.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GroundPosition {
    pub x: f64,
    pub y: f64,
}

impl GroundPosition {
    pub const ORIGIN: GroundPosition = GroundPosition { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn radius(&self) -> f64 {
        self.x.hypot(self.y)
    }
}

/// Instantaneous state of one satellite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SatelliteState {
    /// x-coordinate of the sub-satellite point.
    pub along_track: f64,
    pub altitude: f64,
    pub speed: f64,
}

impl SatelliteState {
    /// Horizontal distance from a ground point to the sub-satellite point.
    pub fn ground_distance(&self, ue: GroundPosition) -> f64 {
        (ue.x - self.along_track).hypot(ue.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstellationConfig {
    pub num_satellites: usize,
    /// Along-track separation between consecutive satellites.
    pub spacing: f64,
    pub altitude: f64,
    pub speed: f64,
}

impl Default for ConstellationConfig {
    fn default() -> Self {
        Self { num_satellites: 3, spacing: 50_000.0, altitude: 600_000.0, speed: 7_560.0 }
    }
}

impl ConstellationConfig {
    /// Pass length: ends when the last satellite is over the cell centre.
    pub fn sim_duration(&self) -> f64 {
        (self.num_satellites as f64 - 1.0) * self.spacing / self.speed
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_satellites < 2 {
            return Err(SimError::Config(format!(
                "num_satellites must be at least 2, got {}",
                self.num_satellites
            )));
        }
        for (name, v) in [("spacing", self.spacing), ("altitude", self.altitude), ("speed", self.speed)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(SimError::Config(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    /// Satellite states at time `t` (seconds since S1 was overhead).
    pub fn propagate(&self, t: f64) -> Result<Vec<SatelliteState>> {
        let duration = self.sim_duration();
        // Allow for rounding when t is computed as step * dt.
        if !(t >= 0.0 && t <= duration * (1.0 + 1e-12)) {
            return Err(SimError::TimeOutOfRange { t, duration });
        }
        Ok((0..self.num_satellites)
            .map(|i| SatelliteState {
                along_track: -(i as f64) * self.spacing + self.speed * t,
                altitude: self.altitude,
                speed: self.speed,
            })
            .collect())
    }
}

/// Elevation of `sat` seen from `ue`, in degrees, within (0, 90].
pub fn elevation_angle(ue: GroundPosition, sat: &SatelliteState) -> f64 {
    sat.altitude.atan2(sat.ground_distance(ue)).to_degrees()
}

/// Slant range (metres) for a given elevation (degrees) and altitude.
pub fn slant_distance_from_elevation(elevation_deg: f64, altitude: f64) -> f64 {
    let s = elevation_deg.to_radians().sin();
    let re = EARTH_RADIUS_M;
    ((re * s).powi(2) + altitude * altitude + 2.0 * altitude * re).sqrt() - re * s
}

/// UE to satellite slant range in metres.
pub fn slant_distance(ue: GroundPosition, sat: &SatelliteState) -> f64 {
    slant_distance_from_elevation(elevation_angle(ue, sat), sat.altitude)
}
