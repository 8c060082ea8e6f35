//! Dense-urban NTN path loss, received signal strength and SINR.
//!
//! Losses are combined in dB: the basic loss of each LoS/NLoS branch is
//! FSPL plus shadow fading (plus clutter on the NLoS branch), the two
//! branches are weighted by the elevation-dependent LoS probability and a
//! fixed ionospheric scintillation loss is added on top.

use crate::error::{Result, SimError};
use crate::geometry::{self, GroundPosition, SatelliteState};

/// One elevation bucket of the environment table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvironmentRow {
    pub elevation_bucket: u32,
    pub los_probability: f64,
    pub sigma_sf_los: f64,
    pub sigma_sf_nlos: f64,
    pub clutter_loss: f64,
}

const fn row(bucket: u32, p: f64, los: f64, nlos: f64, cl: f64) -> EnvironmentRow {
    EnvironmentRow {
        elevation_bucket: bucket,
        los_probability: p,
        sigma_sf_los: los,
        sigma_sf_nlos: nlos,
        clutter_loss: cl,
    }
}

/// Dense-urban LoS probability, shadow-fading spreads and clutter loss.
pub const DENSE_URBAN: [EnvironmentRow; 9] = [
    row(10, 0.282, 3.5, 15.5, 34.3),
    row(20, 0.331, 3.4, 13.9, 30.9),
    row(30, 0.398, 2.9, 12.4, 29.0),
    row(40, 0.468, 3.0, 11.7, 27.7),
    row(50, 0.537, 3.1, 10.6, 26.8),
    row(60, 0.612, 2.7, 10.5, 26.2),
    row(70, 0.738, 2.5, 10.1, 25.8),
    row(80, 0.820, 2.3, 9.2, 25.5),
    row(90, 0.981, 1.2, 9.2, 25.5),
];

/// Environment table indexed by elevation bucket (10°, 20°, ..., 90°).
#[derive(Debug, Clone, PartialEq)]
pub struct EnvironmentTable {
    rows: [EnvironmentRow; 9],
}

impl Default for EnvironmentTable {
    fn default() -> Self {
        Self { rows: DENSE_URBAN }
    }
}

impl EnvironmentTable {
    pub fn new(rows: [EnvironmentRow; 9]) -> Result<Self> {
        for (i, r) in rows.iter().enumerate() {
            let expected = 10 * (i as u32 + 1);
            if r.elevation_bucket != expected {
                return Err(SimError::Config(format!(
                    "environment row {i} has bucket {}, expected {expected}",
                    r.elevation_bucket
                )));
            }
            if !(0.0..=1.0).contains(&r.los_probability) {
                return Err(SimError::Config(format!(
                    "los_probability for {expected} deg must be in [0, 1]"
                )));
            }
            if r.sigma_sf_los < 0.0 || r.sigma_sf_nlos < 0.0 || r.clutter_loss < 0.0 {
                return Err(SimError::Config(format!("negative dB value in the {expected} deg row")));
            }
            if i > 0 && r.los_probability <= rows[i - 1].los_probability {
                return Err(SimError::Config(format!(
                    "los_probability must increase with elevation (row {expected} deg)"
                )));
            }
        }
        Ok(Self { rows })
    }

    pub fn rows(&self) -> &[EnvironmentRow; 9] {
        &self.rows
    }

    /// Row whose bucket is nearest to `elevation` degrees; ties round up
    /// and anything under 15° uses the 10° row.
    pub fn lookup(&self, elevation: f64) -> Result<&EnvironmentRow> {
        if !(elevation > 0.0 && elevation <= 90.0) {
            return Err(SimError::Domain(format!("elevation must be in (0, 90] degrees, got {elevation}")));
        }
        Ok(&self.rows[Self::bucket_index(elevation)])
    }

    fn bucket_index(elevation: f64) -> usize {
        let nearest = (elevation / 10.0 + 0.5).floor() as i64;
        (nearest.clamp(1, 9) - 1) as usize
    }
}

/// Nearest-bucket lookup in the built-in dense-urban table.
pub fn lookup_environment(elevation: f64) -> Result<EnvironmentRow> {
    EnvironmentTable::default().lookup(elevation).copied()
}

/// When shadow-fading samples are redrawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ShadowFadingMode {
    /// One draw per (UE, satellite) per drop.
    #[default]
    PerDrop,
    /// Fresh independent draw every simulation step.
    PerStep,
    /// First-order Gauss-Markov process in time with the given
    /// decorrelation time in milliseconds; marginal spread is unchanged.
    Correlated { tau_ms: u32 },
    /// Off: all shadow-fading samples are zero.
    Disabled,
}

impl ShadowFadingMode {
    pub fn name(&self) -> String {
        match self {
            ShadowFadingMode::PerDrop => "per_drop".into(),
            ShadowFadingMode::PerStep => "per_step".into(),
            ShadowFadingMode::Correlated { tau_ms } => format!("correlated:{tau_ms}"),
            ShadowFadingMode::Disabled => "disabled".into(),
        }
    }
}

impl std::str::FromStr for ShadowFadingMode {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "per_drop" => Ok(Self::PerDrop),
            "per_step" => Ok(Self::PerStep),
            "disabled" => Ok(Self::Disabled),
            other => {
                let tau =
                    other.strip_prefix("correlated:").and_then(|t| t.parse::<u32>().ok()).filter(|&t| t > 0);
                tau.map(|tau_ms| Self::Correlated { tau_ms }).ok_or_else(|| {
                    SimError::Config(format!(
                        "unknown shadow fading mode '{other}' \
                         (per_drop, per_step, correlated:<tau_ms>, disabled)"
                    ))
                })
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelConfig {
    /// Carrier frequency in GHz.
    pub carrier_frequency: f64,
    /// Ionospheric fluctuation P_fluc in dB.
    pub p_fluc: f64,
    /// EIRP spectral density in dBW/MHz.
    pub eirp_density: f64,
    /// Allocated bandwidth in MHz (one PRB).
    pub prb_bandwidth: f64,
    /// Thermal noise over the PRB in dBm.
    pub noise_power: f64,
    pub shadow_fading_mode: ShadowFadingMode,
    pub environment: EnvironmentTable,
}

impl Default for ChannelConfig {
    fn default() -> Self {
        Self {
            carrier_frequency: 2.0,
            p_fluc: 11.0,
            eirp_density: 34.0,
            prb_bandwidth: 0.18,
            noise_power: -121.4,
            shadow_fading_mode: ShadowFadingMode::PerDrop,
            environment: EnvironmentTable::default(),
        }
    }
}

impl ChannelConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.carrier_frequency > 0.0 && self.carrier_frequency < 6.0) {
            return Err(SimError::Config(format!(
                "carrier_frequency must be in (0, 6) GHz, got {}",
                self.carrier_frequency
            )));
        }
        if !(self.prb_bandwidth > 0.0) {
            return Err(SimError::Config(format!(
                "prb_bandwidth must be positive, got {}",
                self.prb_bandwidth
            )));
        }
        if !(self.p_fluc >= 0.0) {
            return Err(SimError::Config(format!("p_fluc must be non-negative, got {}", self.p_fluc)));
        }
        if !self.eirp_density.is_finite() || !self.noise_power.is_finite() {
            return Err(SimError::Config("eirp_density and noise_power must be finite".into()));
        }
        Ok(())
    }

    /// Scintillation loss, P_fluc / sqrt(2).
    pub fn scintillation_loss(&self) -> f64 {
        self.p_fluc / std::f64::consts::SQRT_2
    }

    /// EIRP over one PRB in dBm.
    pub fn eirp_per_prb_dbm(&self) -> f64 {
        self.eirp_density + 10.0 * self.prb_bandwidth.log10() + 30.0
    }
}

/// Free-space path loss in dB; `distance` in metres, `fc` in GHz.
pub fn fspl(distance: f64, fc: f64) -> Result<f64> {
    if !(distance > 0.0) || !(fc > 0.0) {
        return Err(SimError::Domain(format!(
            "fspl needs positive distance and frequency, got d={distance} fc={fc}"
        )));
    }
    Ok(32.45 + 20.0 * fc.log10() + 20.0 * distance.log10())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Los,
    Nlos,
}

/// FSPL plus shadow fading, plus clutter loss on the NLoS branch.
pub fn basic_path_loss(
    distance: f64,
    fc: f64,
    row: &EnvironmentRow,
    branch: Branch,
    sf_sample: f64,
) -> Result<f64> {
    let free = fspl(distance, fc)?;
    Ok(match branch {
        Branch::Los => free + sf_sample,
        Branch::Nlos => free + sf_sample + row.clutter_loss,
    })
}

/// LoS/NLoS-weighted total path loss in dB, scintillation included.
///
/// `sf_los` and `sf_nlos` are shadow-fading samples in dB, already scaled
/// by the relevant standard deviation.
pub fn total_path_loss(
    distance: f64,
    elevation: f64,
    sf_los: f64,
    sf_nlos: f64,
    config: &ChannelConfig,
) -> Result<f64> {
    let row = config.environment.lookup(elevation)?;
    let fc = config.carrier_frequency;
    let pl_los = basic_path_loss(distance, fc, row, Branch::Los, sf_los)?;
    let pl_nlos = basic_path_loss(distance, fc, row, Branch::Nlos, sf_nlos)?;
    let p = row.los_probability;
    Ok(p * pl_los + (1.0 - p) * pl_nlos + config.scintillation_loss())
}

/// Received signal strength in dBm over the allocated PRB.
pub fn rss(pl_total: f64, config: &ChannelConfig) -> f64 {
    config.eirp_per_prb_dbm() - pl_total
}

fn dbm_to_mw(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0)
}

/// SINR in dB of `serving` against the summed interferers plus noise.
pub fn sinr(serving_rss: f64, interferer_rss: &[f64], noise: f64) -> Result<f64> {
    if !serving_rss.is_finite() {
        return Err(SimError::Domain(format!("serving signal must be finite, got {serving_rss}")));
    }
    let interference: f64 = interferer_rss.iter().copied().map(dbm_to_mw).sum();
    Ok(10.0 * (dbm_to_mw(serving_rss) / (interference + dbm_to_mw(noise))).log10())
}

/// Derived per-link quantities at one time step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkSample {
    pub distance: f64,
    pub elevation: f64,
    pub pl_total: f64,
    pub rss: f64,
    /// SINR assuming this satellite serves and every other one interferes.
    pub sinr: f64,
}

/// Unit-variance shadow-fading draws for one link; scaled by the row's
/// standard deviations at evaluation time.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ShadowDraw {
    pub los: f64,
    pub nlos: f64,
}

/// Link samples from `ue` to every satellite, SINR filled in per serving
/// hypothesis. `draws` holds one entry per satellite.
pub fn link_samples(
    ue: GroundPosition,
    sats: &[SatelliteState],
    draws: &[ShadowDraw],
    config: &ChannelConfig,
) -> Result<Vec<LinkSample>> {
    debug_assert_eq!(sats.len(), draws.len());
    let mut out = Vec::with_capacity(sats.len());
    for (sat, draw) in sats.iter().zip(draws) {
        let elevation = geometry::elevation_angle(ue, sat);
        let distance = geometry::slant_distance_from_elevation(elevation, sat.altitude);
        let row = config.environment.lookup(elevation)?;
        let pl_total = total_path_loss(
            distance,
            elevation,
            draw.los * row.sigma_sf_los,
            draw.nlos * row.sigma_sf_nlos,
            config,
        )?;
        out.push(LinkSample { distance, elevation, pl_total, rss: rss(pl_total, config), sinr: f64::NAN });
    }
    let noise_mw = dbm_to_mw(config.noise_power);
    let powers: Vec<f64> = out.iter().map(|s| dbm_to_mw(s.rss)).collect();
    let total: f64 = powers.iter().sum();
    for (sample, p) in out.iter_mut().zip(&powers) {
        sample.sinr = 10.0 * (p / (total - p + noise_mw)).log10();
    }
    Ok(out)
}
