//! Python bindings for the leo-handover simulator.

use std::collections::BTreeMap;

use leo_handover::channel::{self, ChannelConfig};
use leo_handover::cli::CampaignSpec;
use leo_handover::engine;
use leo_handover::geometry::{self, GroundPosition, SatelliteState};
use leo_handover::{HoMechanism, MechanismKind, MetricsRecord, MobilityMode, SimError};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn to_py(err: SimError) -> PyErr {
    match err {
        SimError::Config(_) | SimError::Domain(_) | SimError::TimeOutOfRange { .. } => {
            PyValueError::new_err(err.to_string())
        }
        SimError::Io { .. } => PyRuntimeError::new_err(err.to_string()),
    }
}

fn mechanism(kind: &str, offset: f64, ttt_ms: u32) -> PyResult<HoMechanism> {
    let kind: MechanismKind = kind.parse().map_err(to_py)?;
    Ok(match kind {
        MechanismKind::Measurement => HoMechanism::Measurement { hys_plus_off: offset, ttt_ms },
        MechanismKind::Distance => HoMechanism::Distance { d_off: offset * 1000.0 },
        MechanismKind::Elevation => HoMechanism::Elevation { alpha_off: offset },
        MechanismKind::Timer => HoMechanism::Timer { t_off: offset },
    })
}

fn counts(r: &MetricsRecord) -> BTreeMap<String, u64> {
    BTreeMap::from([
        ("hos".to_string(), r.handovers()),
        ("pp_hos".to_string(), r.pingpong_handovers()),
        ("rlfs".to_string(), r.rlfs()),
    ])
}

/// One simulator configuration. Offsets use dB (measurement), km
/// (distance), degrees (elevation) or seconds (timer).
#[pyclass(name = "SimConfig", module = "leo_handover_py", from_py_object)]
#[derive(Clone)]
pub struct PySimConfig {
    inner: engine::SimConfig,
}

#[pymethods]
impl PySimConfig {
    #[new]
    #[pyo3(signature = (
        mechanism = "measurement", offset = 3.0, ttt_ms = 20, mobility = "static",
        users = 200, drops = 2, seed = 1, channel_seed = None,
        shadow_fading = "per_drop", step_ms = 10, record_events = false
    ))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        mechanism: &str,
        offset: f64,
        ttt_ms: u32,
        mobility: &str,
        users: usize,
        drops: u32,
        seed: u64,
        channel_seed: Option<u64>,
        shadow_fading: &str,
        step_ms: u32,
        record_events: bool,
    ) -> PyResult<Self> {
        let mut inner = engine::SimConfig {
            mechanism: self::mechanism(mechanism, offset, ttt_ms)?,
            users_per_drop: users,
            drops,
            base_seed: seed,
            channel_seed,
            step_ms,
            record_events,
            ..Default::default()
        };
        inner.mobility.mode = mobility.parse::<MobilityMode>().map_err(to_py)?;
        inner.channel.shadow_fading_mode = shadow_fading.parse().map_err(to_py)?;
        inner.validate().map_err(to_py)?;
        Ok(Self { inner })
    }

    #[getter]
    fn mechanism(&self) -> &'static str {
        self.inner.mechanism.kind().as_str()
    }

    #[getter]
    fn offset(&self) -> f64 {
        self.inner.mechanism.offset()
    }

    #[getter]
    fn mobility(&self) -> &'static str {
        self.inner.mobility.mode.as_str()
    }

    #[getter]
    fn num_steps(&self) -> usize {
        self.inner.num_steps()
    }

    #[getter]
    fn sim_duration(&self) -> f64 {
        self.inner.constellation.sim_duration()
    }

    fn __repr__(&self) -> String {
        format!(
            "SimConfig(mechanism={:?}, offset={}, mobility={:?}, users={}, drops={}, seed={})",
            self.mechanism(),
            self.offset(),
            self.mobility(),
            self.inner.users_per_drop,
            self.inner.drops,
            self.inner.base_seed
        )
    }
}

/// Counts for one drop: {"hos", "pp_hos", "rlfs"}.
#[pyfunction]
fn run_drop(config: &PySimConfig, drop: u32) -> PyResult<BTreeMap<String, u64>> {
    engine::run_drop(&config.inner, drop).map(|r| counts(&r.metrics)).map_err(to_py)
}

/// Counts aggregated over all drops of `config`.
#[pyfunction]
fn run_config(config: &PySimConfig) -> PyResult<BTreeMap<String, u64>> {
    engine::run_config(&config.inner).map(|(r, _)| counts(&r)).map_err(to_py)
}

/// (time_s, ue, event, from, to)
type EventTuple = (f64, usize, String, usize, usize);

/// Event trace of one drop.
#[pyfunction]
fn drop_events(config: &PySimConfig, drop: u32) -> PyResult<Vec<EventTuple>> {
    let mut cfg = config.inner.clone();
    cfg.record_events = true;
    let r = engine::run_drop(&cfg, drop).map_err(to_py)?;
    Ok(r.events.iter().map(|e| (e.time, e.ue, e.kind.as_str().to_string(), e.from, e.to)).collect())
}

/// Runs a campaign described in TOML; one dict per result row.
#[pyfunction]
fn run_campaign_toml(text: &str) -> PyResult<Vec<BTreeMap<String, String>>> {
    let spec = CampaignSpec::from_toml_str(text).map_err(to_py)?;
    let records = engine::run_campaign(&spec.grid().map_err(to_py)?).map_err(to_py)?;
    let header = leo_handover::cli::RESULTS_HEADER;
    Ok(leo_handover::cli::results_rows(&records)
        .into_iter()
        .map(|row| header.iter().map(|h| h.to_string()).zip(row).collect())
        .collect())
}

/// Canonical TOML of the built-in default campaign.
#[pyfunction]
fn default_paper_toml() -> String {
    CampaignSpec::default_paper().to_canonical_string()
}

#[pyfunction]
fn fspl(distance_m: f64, fc_ghz: f64) -> PyResult<f64> {
    channel::fspl(distance_m, fc_ghz).map_err(to_py)
}

/// Total path loss (dB) with optional shadow-fading samples in dB.
#[pyfunction]
#[pyo3(signature = (distance_m, elevation_deg, sf_los_db = 0.0, sf_nlos_db = 0.0))]
fn total_path_loss(distance_m: f64, elevation_deg: f64, sf_los_db: f64, sf_nlos_db: f64) -> PyResult<f64> {
    channel::total_path_loss(distance_m, elevation_deg, sf_los_db, sf_nlos_db, &ChannelConfig::default())
        .map_err(to_py)
}

#[pyfunction]
fn rss(pl_total_db: f64) -> f64 {
    channel::rss(pl_total_db, &ChannelConfig::default())
}

#[pyfunction]
#[pyo3(signature = (serving_dbm, interferers_dbm, noise_dbm = -121.4))]
fn sinr(serving_dbm: f64, interferers_dbm: Vec<f64>, noise_dbm: f64) -> PyResult<f64> {
    channel::sinr(serving_dbm, &interferers_dbm, noise_dbm).map_err(to_py)
}

/// Environment row for an elevation: (bucket, los_probability, sigma_los, sigma_nlos, clutter_loss).
#[pyfunction]
fn lookup_environment(elevation_deg: f64) -> PyResult<(u32, f64, f64, f64, f64)> {
    let r = channel::lookup_environment(elevation_deg).map_err(to_py)?;
    Ok((r.elevation_bucket, r.los_probability, r.sigma_sf_los, r.sigma_sf_nlos, r.clutter_loss))
}

#[pyfunction]
#[pyo3(signature = (ue_x, ue_y, sat_x, altitude = 600e3))]
fn elevation_angle(ue_x: f64, ue_y: f64, sat_x: f64, altitude: f64) -> f64 {
    let sat = SatelliteState { along_track: sat_x, altitude, speed: 0.0 };
    geometry::elevation_angle(GroundPosition::new(ue_x, ue_y), &sat)
}

#[pyfunction]
#[pyo3(signature = (elevation_deg, altitude = 600e3))]
fn slant_distance(elevation_deg: f64, altitude: f64) -> f64 {
    geometry::slant_distance_from_elevation(elevation_deg, altitude)
}

#[pymodule]
pub fn leo_handover_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySimConfig>()?;
    m.add_function(wrap_pyfunction!(run_drop, m)?)?;
    m.add_function(wrap_pyfunction!(run_config, m)?)?;
    m.add_function(wrap_pyfunction!(drop_events, m)?)?;
    m.add_function(wrap_pyfunction!(run_campaign_toml, m)?)?;
    m.add_function(wrap_pyfunction!(default_paper_toml, m)?)?;
    m.add_function(wrap_pyfunction!(fspl, m)?)?;
    m.add_function(wrap_pyfunction!(total_path_loss, m)?)?;
    m.add_function(wrap_pyfunction!(rss, m)?)?;
    m.add_function(wrap_pyfunction!(sinr, m)?)?;
    m.add_function(wrap_pyfunction!(lookup_environment, m)?)?;
    m.add_function(wrap_pyfunction!(elevation_angle, m)?)?;
    m.add_function(wrap_pyfunction!(slant_distance, m)?)?;
    Ok(())
}
