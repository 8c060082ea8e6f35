//! Radio-link-failure detection, ping-pong detection and metric counters.

use crate::error::{Result, SimError};
use crate::handover::{HoMechanism, MechanismKind};
use crate::mobility::MobilityMode;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SyncPhase {
    InSync,
    OutOfSync,
}

/// Q_out / Q_in thresholds and the T310 duration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RlfConfig {
    pub q_in: f64,
    pub q_out: f64,
    pub t310_ms: u32,
}

impl Default for RlfConfig {
    fn default() -> Self {
        Self { q_in: -6.0, q_out: -8.0, t310_ms: 500 }
    }
}

impl RlfConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.q_in > self.q_out) {
            return Err(SimError::Config(format!("q_in ({}) must exceed q_out ({})", self.q_in, self.q_out)));
        }
        if self.t310_ms == 0 {
            return Err(SimError::Config("t310_ms must be positive".into()));
        }
        Ok(())
    }
}

/// T310 state machine for one UE.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RlfMonitor {
    pub config: RlfConfig,
    pub phase: SyncPhase,
    pub t310_elapsed_ms: u32,
}

impl RlfMonitor {
    pub fn new(config: RlfConfig) -> Self {
        Self { config, phase: SyncPhase::InSync, t310_elapsed_ms: 0 }
    }

    pub fn reset(&mut self) {
        self.phase = SyncPhase::InSync;
        self.t310_elapsed_ms = 0;
    }

    /// Feeds one SINR sample covering `dt_ms`; returns `true` when a radio
    /// link failure is declared (the monitor is then back in sync).
    ///
    /// The step that drops below Q_out already counts toward T310, so a
    /// constant out-of-sync trace fails after exactly `t310_ms`.
    pub fn update(&mut self, sinr: f64, dt_ms: u32) -> bool {
        match self.phase {
            SyncPhase::InSync => {
                if !(sinr < self.config.q_out) {
                    return false;
                }
                self.phase = SyncPhase::OutOfSync;
                self.t310_elapsed_ms = 0;
            }
            SyncPhase::OutOfSync => {
                if sinr > self.config.q_in {
                    self.reset();
                    return false;
                }
            }
        }
        self.t310_elapsed_ms += dt_ms;
        if self.t310_elapsed_ms >= self.config.t310_ms {
            self.reset();
            return true;
        }
        false
    }
}

/// Flags handovers that return to the previous cell within `window` seconds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PingPongTracker {
    pub last_ho_time: Option<f64>,
    pub previous_serving: Option<usize>,
    pub window: f64,
}

impl PingPongTracker {
    pub fn new(window: f64) -> Self {
        Self { last_ho_time: None, previous_serving: None, window }
    }

    /// Records a handover `from -> to` at time `t`; returns whether it is a
    /// ping-pong.
    pub fn record_handover(&mut self, from: usize, to: usize, t: f64) -> bool {
        let is_pingpong = match (self.previous_serving, self.last_ho_time) {
            (Some(prev), Some(last)) => prev == to && t - last <= self.window,
            _ => false,
        };
        self.previous_serving = Some(from);
        self.last_ho_time = Some(t);
        is_pingpong
    }
}

impl Default for PingPongTracker {
    fn default() -> Self {
        Self::new(5.0)
    }
}

/// Identifies one cell of the result tables.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConfigKey {
    pub mechanism: HoMechanism,
    pub mobility: MobilityMode,
    pub seed: u64,
}

impl ConfigKey {
    pub fn kind(&self) -> MechanismKind {
        self.mechanism.kind()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Counts {
    pub handovers: u64,
    pub pingpong_handovers: u64,
    pub rlfs: u64,
}

impl std::ops::AddAssign for Counts {
    fn add_assign(&mut self, rhs: Self) {
        self.handovers += rhs.handovers;
        self.pingpong_handovers += rhs.pingpong_handovers;
        self.rlfs += rhs.rlfs;
    }
}

impl std::iter::Sum for Counts {
    fn sum<I: Iterator<Item = Counts>>(iter: I) -> Self {
        iter.fold(Counts::default(), |mut acc, c| {
            acc += c;
            acc
        })
    }
}

/// Aggregated counts for one configuration, with the configuration echoed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricsRecord {
    pub key: ConfigKey,
    pub counts: Counts,
}

impl MetricsRecord {
    pub fn handovers(&self) -> u64 {
        self.counts.handovers
    }

    pub fn pingpong_handovers(&self) -> u64 {
        self.counts.pingpong_handovers
    }

    pub fn rlfs(&self) -> u64 {
        self.counts.rlfs
    }
}

/// Sums per-UE (or per-drop) counts into one record for `key`.
pub fn aggregate<I>(key: ConfigKey, parts: I) -> MetricsRecord
where
    I: IntoIterator<Item = Counts>,
{
    MetricsRecord { key, counts: parts.into_iter().sum() }
}
