//! Fixed-step simulation of one satellite pass over the cell.
//!
//! UEs never interact (interference comes only from satellites), so each
//! UE's whole timeline is simulated independently from its own random
//! streams and the per-UE results are reduced afterwards. The output is
//! therefore identical whatever the thread count.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::channel::{self, ChannelConfig, ShadowDraw, ShadowFadingMode};
use crate::error::{Result, SimError};
use crate::geometry::{ConstellationConfig, SatelliteState, CELL_RADIUS_M};
use crate::handover::{self, AssociationState, HoMechanism};
use crate::mobility::{self, MobilityConfig, MobilityMode};
use crate::monitor::{self, ConfigKey, Counts, MetricsRecord, PingPongTracker, RlfConfig, RlfMonitor};
use crate::streams::{seeded_stream, Purpose};

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub constellation: ConstellationConfig,
    pub channel: ChannelConfig,
    pub mobility: MobilityConfig,
    pub mechanism: HoMechanism,
    pub rlf: RlfConfig,
    /// Ping-pong window in seconds.
    pub pingpong_window: f64,
    pub cell_radius: f64,
    pub step_ms: u32,
    pub drops: u32,
    pub users_per_drop: usize,
    /// Seeds placement and mobility, and shadow fading unless
    /// `channel_seed` is set.
    pub base_seed: u64,
    pub channel_seed: Option<u64>,
    /// Keep a per-event trace in each drop result.
    pub record_events: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            constellation: ConstellationConfig::default(),
            channel: ChannelConfig::default(),
            mobility: MobilityConfig::default(),
            mechanism: HoMechanism::Measurement { hys_plus_off: 3.0, ttt_ms: 20 },
            rlf: RlfConfig::default(),
            pingpong_window: 5.0,
            cell_radius: CELL_RADIUS_M,
            step_ms: 10,
            drops: 4,
            users_per_drop: 1963,
            base_seed: 1,
            channel_seed: None,
            record_events: false,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        self.constellation.validate()?;
        self.channel.validate()?;
        self.mobility.validate()?;
        self.rlf.validate()?;
        if self.step_ms == 0 {
            return Err(SimError::Config("step_ms must be positive".into()));
        }
        self.mechanism.validate(self.step_ms)?;
        if !self.rlf.t310_ms.is_multiple_of(self.step_ms) {
            return Err(SimError::Config(format!(
                "t310_ms {} must be a multiple of step_ms {}",
                self.rlf.t310_ms, self.step_ms
            )));
        }
        if !(self.pingpong_window > 0.0) {
            return Err(SimError::Config("pingpong window must be positive".into()));
        }
        if !(self.cell_radius > 0.0) {
            return Err(SimError::Config("cell radius must be positive".into()));
        }
        if self.drops == 0 {
            return Err(SimError::Config("drops must be at least 1".into()));
        }
        if self.users_per_drop == 0 {
            return Err(SimError::Config("users must be at least 1".into()));
        }
        if self.num_steps() == 0 {
            return Err(SimError::Config("pass is shorter than one step".into()));
        }
        Ok(())
    }

    pub fn dt(&self) -> f64 {
        f64::from(self.step_ms) / 1000.0
    }

    /// Whole steps that fit in the pass.
    pub fn num_steps(&self) -> usize {
        let duration_ms = self.constellation.sim_duration() * 1000.0;
        (duration_ms / f64::from(self.step_ms) + 1e-9).floor() as usize
    }

    pub fn key(&self) -> ConfigKey {
        ConfigKey { mechanism: self.mechanism, mobility: self.mobility.mode, seed: self.base_seed }
    }

    fn shadow_seed(&self) -> u64 {
        self.channel_seed.unwrap_or(self.base_seed)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    Handover,
    PingPong,
    RadioLinkFailure,
}

impl EventKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            EventKind::Handover => "ho",
            EventKind::PingPong => "pingpong_ho",
            EventKind::RadioLinkFailure => "rlf",
        }
    }
}

/// One traced event. For radio link failures `to` is the satellite the UE
/// re-associates with.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event {
    pub time: f64,
    pub ue: usize,
    pub kind: EventKind,
    pub from: usize,
    pub to: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DropResult {
    pub drop: u32,
    pub metrics: MetricsRecord,
    /// Ordered by (time, ue); empty unless events were requested.
    pub events: Vec<Event>,
}

struct UeOutcome {
    counts: Counts,
    events: Vec<Event>,
}

struct ShadowSource {
    mode: ShadowFadingMode,
    los: ChaCha8Rng,
    nlos: ChaCha8Rng,
    draws: Vec<ShadowDraw>,
}

impl ShadowSource {
    fn new(config: &SimConfig, drop: u32, ue: usize) -> Self {
        let seed = config.shadow_seed();
        let n = config.constellation.num_satellites;
        let mut source = Self {
            mode: config.channel.shadow_fading_mode,
            los: seeded_stream(seed, u64::from(drop), ue as u64, Purpose::ShadowLos),
            nlos: seeded_stream(seed, u64::from(drop), ue as u64, Purpose::ShadowNlos),
            draws: vec![ShadowDraw::default(); n],
        };
        if source.mode != ShadowFadingMode::Disabled {
            source.redraw();
        }
        source
    }

    fn redraw(&mut self) {
        for d in &mut self.draws {
            d.los = self.los.sample(StandardNormal);
            d.nlos = self.nlos.sample(StandardNormal);
        }
    }

    fn for_step(&mut self, first: bool, dt_ms: u32) -> &[ShadowDraw] {
        if first {
            return &self.draws;
        }
        match self.mode {
            ShadowFadingMode::PerStep => self.redraw(),
            ShadowFadingMode::Correlated { tau_ms } => {
                let a = (-f64::from(dt_ms) / f64::from(tau_ms)).exp();
                let b = (1.0 - a * a).sqrt();
                for d in &mut self.draws {
                    let w_los: f64 = self.los.sample(StandardNormal);
                    let w_nlos: f64 = self.nlos.sample(StandardNormal);
                    d.los = a * d.los + b * w_los;
                    d.nlos = a * d.nlos + b * w_nlos;
                }
            }
            ShadowFadingMode::PerDrop | ShadowFadingMode::Disabled => {}
        }
        &self.draws
    }
}

fn simulate_ue(
    config: &SimConfig,
    drop: u32,
    ue: usize,
    passes: &[Vec<SatelliteState>],
) -> Result<UeOutcome> {
    let dt = config.dt();
    let dt_ms = config.step_ms;
    let n_sats = config.constellation.num_satellites;
    let key = (config.base_seed, u64::from(drop), ue as u64);
    let mut placement = seeded_stream(key.0, key.1, key.2, Purpose::Placement);
    let mut motion = seeded_stream(key.0, key.1, key.2, Purpose::Mobility);
    let mut user = mobility::init_user(config.cell_radius, &config.mobility, &mut placement, &mut motion);
    let mut shadow = ShadowSource::new(config, drop, ue);

    let samples =
        channel::link_samples(user.position, &passes[0], shadow.for_step(true, dt_ms), &config.channel)?;
    let serving = handover::initial_association(&config.mechanism, &samples)?;
    let mut assoc = AssociationState::new(serving, n_sats);
    let mut rlf = RlfMonitor::new(config.rlf);
    let mut pingpong = PingPongTracker::new(config.pingpong_window);
    let mut counts = Counts::default();
    let mut events = Vec::new();

    for (k, sats) in passes.iter().enumerate().skip(1) {
        let t = k as f64 * dt;
        user = mobility::step(&user, dt, config.cell_radius, &config.mobility, &mut motion);
        let samples =
            channel::link_samples(user.position, sats, shadow.for_step(false, dt_ms), &config.channel)?;

        let from = assoc.serving;
        if rlf.update(samples[from].sinr, dt_ms) {
            counts.rlfs += 1;
            let to = handover::initial_association(&config.mechanism, &samples)?;
            assoc.reassociate(to);
            if config.record_events {
                events.push(Event { time: t, ue, kind: EventKind::RadioLinkFailure, from, to });
            }
            continue;
        }

        if let Some(to) = handover::evaluate(&config.mechanism, &mut assoc, &samples, dt_ms) {
            let is_pingpong = pingpong.record_handover(from, to, t);
            assoc.apply_handover(to, t);
            counts.handovers += 1;
            if is_pingpong {
                counts.pingpong_handovers += 1;
            }
            if config.record_events {
                let kind = if is_pingpong { EventKind::PingPong } else { EventKind::Handover };
                events.push(Event { time: t, ue, kind, from, to });
            }
        }
    }
    Ok(UeOutcome { counts, events })
}

/// Satellite states at every step of the pass, step 0 included.
fn precompute_pass(config: &SimConfig) -> Result<Vec<Vec<SatelliteState>>> {
    (0..=config.num_steps()).map(|k| config.constellation.propagate(k as f64 * config.dt())).collect()
}

/// Runs one seeded drop and returns its metrics.
pub fn run_drop(config: &SimConfig, drop: u32) -> Result<DropResult> {
    config.validate()?;
    let passes = precompute_pass(config)?;
    let outcomes = (0..config.users_per_drop)
        .into_par_iter()
        .map(|ue| simulate_ue(config, drop, ue, &passes))
        .collect::<Result<Vec<_>>>()?;

    let counts: Counts = outcomes.iter().map(|o| o.counts).sum();
    let mut events: Vec<Event> = outcomes.into_iter().flat_map(|o| o.events).collect();
    events.sort_by(|a, b| a.time.total_cmp(&b.time).then(a.ue.cmp(&b.ue)));
    Ok(DropResult { drop, metrics: MetricsRecord { key: config.key(), counts }, events })
}

/// Runs every drop of `config` and sums them into one record.
pub fn run_config(config: &SimConfig) -> Result<(MetricsRecord, Vec<DropResult>)> {
    let drops = (0..config.drops).map(|d| run_drop(config, d)).collect::<Result<Vec<_>>>()?;
    let record = monitor::aggregate(config.key(), drops.iter().map(|d| d.metrics.counts));
    Ok((record, drops))
}

/// A sweep: every mechanism setting crossed with every mobility mode,
/// on top of a shared base configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct CampaignGrid {
    pub base: SimConfig,
    pub mechanisms: Vec<HoMechanism>,
    pub mobilities: Vec<MobilityMode>,
}

impl CampaignGrid {
    /// Expanded configurations in output row order.
    pub fn configs(&self) -> Vec<SimConfig> {
        let mut out: Vec<SimConfig> = Vec::with_capacity(self.mechanisms.len() * self.mobilities.len());
        for mechanism in &self.mechanisms {
            for mode in &self.mobilities {
                let mut cfg = self.base.clone();
                cfg.mechanism = *mechanism;
                cfg.mobility.mode = *mode;
                out.push(cfg);
            }
        }
        out.sort_by(|a, b| row_order(&a.key(), &b.key()));
        out
    }
}

/// Table ordering: mechanism, offset, TTT, then static before mobile.
pub fn row_order(a: &ConfigKey, b: &ConfigKey) -> std::cmp::Ordering {
    a.kind()
        .cmp(&b.kind())
        .then(a.mechanism.offset().total_cmp(&b.mechanism.offset()))
        .then(a.mechanism.ttt_ms().cmp(&b.mechanism.ttt_ms()))
        .then((a.mobility == MobilityMode::SmoothRandom).cmp(&(b.mobility == MobilityMode::SmoothRandom)))
}

/// Runs a whole grid; one aggregated record per configuration.
pub fn run_campaign(grid: &CampaignGrid) -> Result<Vec<MetricsRecord>> {
    if grid.mechanisms.is_empty() || grid.mobilities.is_empty() {
        return Err(SimError::Config("campaign grid is empty".into()));
    }
    let configs = grid.configs();
    for cfg in &configs {
        cfg.validate()?;
    }
    configs.iter().map(|cfg| run_config(cfg).map(|(r, _)| r)).collect()
}

/// Measurement grid: every TTT crossed with every margin.
pub fn measurement_grid(ttts_ms: &[u32], margins_db: &[f64]) -> Vec<HoMechanism> {
    ttts_ms
        .iter()
        .flat_map(|&ttt_ms| {
            margins_db.iter().map(move |&hys_plus_off| HoMechanism::Measurement { hys_plus_off, ttt_ms })
        })
        .collect()
}
