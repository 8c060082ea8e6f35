//! System-level simulator for handover triggers in a LEO non-terrestrial
//! network: three satellites pass linearly over a single 50 km cell while
//! UEs count handovers, ping-pong handovers and radio link failures under
//! measurement (A3), distance, elevation or timer triggers.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod cli;
pub mod engine;
pub mod error;
pub mod geometry;
pub mod handover;
pub mod mobility;
pub mod monitor;
pub mod streams;

pub use channel::{ChannelConfig, LinkSample, ShadowFadingMode};
pub use engine::{run_campaign, run_config, run_drop, CampaignGrid, DropResult, SimConfig};
pub use error::{Result, SimError};
pub use geometry::{ConstellationConfig, GroundPosition, SatelliteState};
pub use handover::{HoMechanism, MechanismKind};
pub use mobility::{MobilityConfig, MobilityMode, UserState};
pub use monitor::{ConfigKey, Counts, MetricsRecord};
