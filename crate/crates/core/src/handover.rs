//! Handover triggers: A3-style measurement with time-to-trigger, distance
//! offset, elevation offset and a pass-duration timer.
//!
//! All comparisons are strict, so equality at a threshold never triggers.
//! Ties between qualifying candidates go to the best metric and then the
//! lowest satellite index.

use std::fmt;

use crate::channel::LinkSample;
use crate::error::{Result, SimError};

/// Exactly one trigger rule with its parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HoMechanism {
    /// Target RSS must exceed serving RSS by `hys_plus_off` dB for `ttt_ms`.
    Measurement { hys_plus_off: f64, ttt_ms: u32 },
    /// Target must be closer than serving by more than `d_off` metres.
    Distance { d_off: f64 },
    /// Target elevation must exceed serving elevation by `alpha_off` degrees.
    Elevation { alpha_off: f64 },
    /// Distance rule (zero offset) until the first handover, then hand
    /// over to the next satellite in pass order every `t_off` seconds.
    Timer { t_off: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MechanismKind {
    Measurement,
    Distance,
    Elevation,
    Timer,
}

impl MechanismKind {
    pub const ALL: [MechanismKind; 4] =
        [MechanismKind::Measurement, MechanismKind::Distance, MechanismKind::Elevation, MechanismKind::Timer];

    pub fn as_str(&self) -> &'static str {
        match self {
            MechanismKind::Measurement => "measurement",
            MechanismKind::Distance => "distance",
            MechanismKind::Elevation => "elevation",
            MechanismKind::Timer => "timer",
        }
    }
}

impl fmt::Display for MechanismKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for MechanismKind {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self> {
        MechanismKind::ALL.into_iter().find(|k| k.as_str() == s).ok_or_else(|| {
            SimError::Config(format!("unknown mechanism '{s}' (measurement, distance, elevation, timer)"))
        })
    }
}

impl HoMechanism {
    pub fn kind(&self) -> MechanismKind {
        match self {
            HoMechanism::Measurement { .. } => MechanismKind::Measurement,
            HoMechanism::Distance { .. } => MechanismKind::Distance,
            HoMechanism::Elevation { .. } => MechanismKind::Elevation,
            HoMechanism::Timer { .. } => MechanismKind::Timer,
        }
    }

    /// The offset in its natural reporting unit: dB, km, degrees or seconds.
    pub fn offset(&self) -> f64 {
        match *self {
            HoMechanism::Measurement { hys_plus_off, .. } => hys_plus_off,
            HoMechanism::Distance { d_off } => d_off / 1000.0,
            HoMechanism::Elevation { alpha_off } => alpha_off,
            HoMechanism::Timer { t_off } => t_off,
        }
    }

    pub fn ttt_ms(&self) -> Option<u32> {
        match *self {
            HoMechanism::Measurement { ttt_ms, .. } => Some(ttt_ms),
            _ => None,
        }
    }

    /// Checks the offset and the TTT/step divisibility contract.
    pub fn validate(&self, step_ms: u32) -> Result<()> {
        let offset = match *self {
            HoMechanism::Measurement { hys_plus_off, ttt_ms } => {
                if ttt_ms == 0 || step_ms == 0 || ttt_ms % step_ms != 0 {
                    return Err(SimError::Config(format!(
                        "ttt_ms {ttt_ms} must be a positive multiple of step_ms {step_ms}"
                    )));
                }
                hys_plus_off
            }
            HoMechanism::Distance { d_off } => d_off,
            HoMechanism::Elevation { alpha_off } => alpha_off,
            HoMechanism::Timer { t_off } => {
                if !(t_off > 0.0) {
                    return Err(SimError::Config(format!("t_off must be positive, got {t_off}")));
                }
                t_off
            }
        };
        if !(offset >= 0.0 && offset.is_finite()) {
            return Err(SimError::Config(format!(
                "{} offset must be a non-negative number, got {offset}",
                self.kind()
            )));
        }
        Ok(())
    }
}

/// Per-UE association and trigger bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct AssociationState {
    pub serving: usize,
    /// Accumulated A3 condition time per candidate satellite, ms.
    pub ttt_elapsed: Vec<u32>,
    /// Timer-mode elapsed time since the last handover; `None` until the
    /// first handover starts it.
    pub timer_elapsed_ms: Option<u64>,
    pub last_ho_time: Option<f64>,
    pub previous_serving: Option<usize>,
}

impl AssociationState {
    pub fn new(serving: usize, num_satellites: usize) -> Self {
        Self {
            serving,
            ttt_elapsed: vec![0; num_satellites],
            timer_elapsed_ms: None,
            last_ho_time: None,
            previous_serving: None,
        }
    }

    /// Switches serving satellite and restarts every trigger timer.
    pub fn apply_handover(&mut self, target: usize, t: f64) {
        self.previous_serving = Some(self.serving);
        self.serving = target;
        self.last_ho_time = Some(t);
        self.ttt_elapsed.iter_mut().for_each(|e| *e = 0);
        self.timer_elapsed_ms = Some(0);
    }

    /// Fresh association after a radio link failure; history is dropped.
    pub fn reassociate(&mut self, serving: usize) {
        *self = Self::new(serving, self.ttt_elapsed.len());
    }
}

/// Index of the best value under `better`, lowest index on ties.
fn best_by(values: impl Iterator<Item = (usize, f64)>, better: impl Fn(f64, f64) -> bool) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, v) in values {
        match best {
            Some((_, b)) if !better(v, b) => {}
            _ => best = Some((i, v)),
        }
    }
    best.map(|(i, _)| i)
}

/// Serving satellite at start-up (and after a radio link failure).
pub fn initial_association(mechanism: &HoMechanism, samples: &[LinkSample]) -> Result<usize> {
    if samples.is_empty() {
        return Err(SimError::Config("no satellites to associate with".into()));
    }
    let idx = samples.iter().enumerate();
    let pick = match mechanism {
        HoMechanism::Measurement { .. } => best_by(idx.map(|(i, s)| (i, s.rss)), |a, b| a > b),
        HoMechanism::Elevation { .. } => best_by(idx.map(|(i, s)| (i, s.elevation)), |a, b| a > b),
        HoMechanism::Distance { .. } | HoMechanism::Timer { .. } => {
            best_by(idx.map(|(i, s)| (i, s.distance)), |a, b| a < b)
        }
    };
    Ok(pick.expect("non-empty samples"))
}

/// A3 condition with time-to-trigger. Updates the per-candidate timers in
/// `state` and returns the target once one has held for `ttt_ms`.
pub fn evaluate_measurement(
    state: &mut AssociationState,
    samples: &[LinkSample],
    hys_plus_off: f64,
    ttt_ms: u32,
    dt_ms: u32,
) -> Option<usize> {
    let s = state.serving;
    let threshold = samples[s].rss + hys_plus_off;
    for (t, sample) in samples.iter().enumerate() {
        if t == s {
            state.ttt_elapsed[t] = 0;
        } else if sample.rss > threshold {
            state.ttt_elapsed[t] = state.ttt_elapsed[t].saturating_add(dt_ms);
        } else {
            state.ttt_elapsed[t] = 0;
        }
    }
    best_by(
        samples
            .iter()
            .enumerate()
            .filter(|&(t, _)| t != s && state.ttt_elapsed[t] >= ttt_ms)
            .map(|(t, x)| (t, x.rss)),
        |a, b| a > b,
    )
}

/// Nearest candidate that is closer than serving by more than `d_off`.
pub fn evaluate_distance(state: &AssociationState, samples: &[LinkSample], d_off: f64) -> Option<usize> {
    let s = state.serving;
    let limit = samples[s].distance - d_off;
    best_by(
        samples
            .iter()
            .enumerate()
            .filter(|&(t, x)| t != s && x.distance < limit)
            .map(|(t, x)| (t, x.distance)),
        |a, b| a < b,
    )
}

/// Highest candidate whose elevation beats serving by more than `alpha_off`.
pub fn evaluate_elevation(state: &AssociationState, samples: &[LinkSample], alpha_off: f64) -> Option<usize> {
    let s = state.serving;
    let limit = samples[s].elevation + alpha_off;
    best_by(
        samples
            .iter()
            .enumerate()
            .filter(|&(t, x)| t != s && x.elevation > limit)
            .map(|(t, x)| (t, x.elevation)),
        |a, b| a > b,
    )
}

/// Timer trigger. Before the first handover this is the zero-offset
/// distance rule; afterwards the timer advances by `dt_ms` each step and
/// fires toward the next satellite in pass order.
pub fn evaluate_timer(
    state: &mut AssociationState,
    samples: &[LinkSample],
    t_off: f64,
    dt_ms: u32,
) -> Option<usize> {
    match state.timer_elapsed_ms.as_mut() {
        None => evaluate_distance(state, samples, 0.0),
        Some(elapsed) => {
            *elapsed += u64::from(dt_ms);
            let next = state.serving + 1;
            if *elapsed >= timer_threshold_ms(t_off) && next < samples.len() {
                Some(next)
            } else {
                None
            }
        }
    }
}

fn timer_threshold_ms(t_off: f64) -> u64 {
    (t_off * 1000.0).round() as u64
}

/// Runs the configured trigger for one step.
pub fn evaluate(
    mechanism: &HoMechanism,
    state: &mut AssociationState,
    samples: &[LinkSample],
    dt_ms: u32,
) -> Option<usize> {
    match *mechanism {
        HoMechanism::Measurement { hys_plus_off, ttt_ms } => {
            evaluate_measurement(state, samples, hys_plus_off, ttt_ms, dt_ms)
        }
        HoMechanism::Distance { d_off } => evaluate_distance(state, samples, d_off),
        HoMechanism::Elevation { alpha_off } => evaluate_elevation(state, samples, alpha_off),
        HoMechanism::Timer { t_off } => evaluate_timer(state, samples, t_off, dt_ms),
    }
}
