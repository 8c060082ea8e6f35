//! Campaign files, flag overrides and CSV output.
//!
//! A campaign file is TOML with four tables: `[scenario]`, `[sweep]`,
//! `[seeds]` and `[output]`. Missing keys take the built-in defaults;
//! unknown keys are errors.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::channel::{self, ChannelConfig, ShadowFadingMode};
use crate::engine::{self, CampaignGrid, Event, SimConfig};
use crate::error::{Result, SimError};
use crate::geometry::{self, ConstellationConfig, GroundPosition, SatelliteState};
use crate::handover::{HoMechanism, MechanismKind};
use crate::mobility::{MobilityConfig, MobilityMode};
use crate::monitor::{MetricsRecord, RlfConfig};

pub const RESULTS_HEADER: [&str; 8] =
    ["mechanism", "offset", "ttt_ms", "mobility", "seed_group", "hos", "pp_hos", "rlfs"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Scenario {
    pub environment: String,
    pub num_satellites: usize,
    pub satellite_spacing_km: f64,
    pub altitude_km: f64,
    pub satellite_speed_mps: f64,
    pub cell_radius_km: f64,
    pub carrier_frequency_ghz: f64,
    pub eirp_density_dbw_per_mhz: f64,
    pub prb_bandwidth_mhz: f64,
    pub p_fluc_db: f64,
    pub noise_power_dbm: f64,
    pub shadow_fading: String,
    pub v_max_mps: f64,
    pub step_ms: u32,
    pub q_in_db: f64,
    pub q_out_db: f64,
    pub t310_ms: u32,
    pub pingpong_window_s: f64,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            environment: "dense_urban".into(),
            num_satellites: 3,
            satellite_spacing_km: 50.0,
            altitude_km: 600.0,
            satellite_speed_mps: 7560.0,
            cell_radius_km: 25.0,
            carrier_frequency_ghz: 2.0,
            eirp_density_dbw_per_mhz: 34.0,
            prb_bandwidth_mhz: 0.18,
            p_fluc_db: 11.0,
            noise_power_dbm: -121.4,
            shadow_fading: "per_drop".into(),
            v_max_mps: 10.0,
            step_ms: 10,
            q_in_db: -6.0,
            q_out_db: -8.0,
            t310_ms: 500,
            pingpong_window_s: 5.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Sweep {
    pub mechanisms: Vec<String>,
    pub mobility: Vec<String>,
    pub ttt_ms: Vec<u32>,
    pub hys_plus_off_db: Vec<f64>,
    pub d_off_km: Vec<f64>,
    pub alpha_off_deg: Vec<f64>,
    pub t_off_s: Vec<f64>,
}

impl Default for Sweep {
    fn default() -> Self {
        Self {
            mechanisms: MechanismKind::ALL.iter().map(|k| k.as_str().to_string()).collect(),
            mobility: vec!["static".into(), "mobile".into()],
            ttt_ms: vec![20, 40, 60, 80, 100],
            hys_plus_off_db: vec![1.0, 2.0, 3.0, 4.0],
            d_off_km: (0..9).map(|i| f64::from(2 + i) / 2.0).collect(),
            alpha_off_deg: (1..=10).map(f64::from).collect(),
            t_off_s: (0..9).map(|i| f64::from(640 + 5 * i) / 100.0).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Seeds {
    pub base_seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub channel_seed: Option<u64>,
    pub drops: u32,
    pub users_per_drop: usize,
}

impl Default for Seeds {
    fn default() -> Self {
        Self { base_seed: 1, channel_seed: None, drops: 4, users_per_drop: 1963 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Output {
    pub results: PathBuf,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pathloss_trace: Option<PathBuf>,
    pub pathloss_samples: usize,
    pub pathloss_max_km: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub events: Option<PathBuf>,
}

impl Default for Output {
    fn default() -> Self {
        Self {
            results: PathBuf::from("results.csv"),
            pathloss_trace: None,
            pathloss_samples: 126,
            pathloss_max_km: 125.0,
            events: None,
        }
    }
}

/// A complete campaign description.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CampaignSpec {
    pub scenario: Scenario,
    pub sweep: Sweep,
    pub seeds: Seeds,
    pub output: Output,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub mechanism: Option<String>,
    pub seed: Option<u64>,
    pub drops: Option<u32>,
    pub users: Option<usize>,
    pub out: Option<PathBuf>,
    pub trace_pathloss: Option<PathBuf>,
    pub events: Option<PathBuf>,
    /// Raw `section.key=value` assignments.
    pub set: Vec<String>,
}

fn config_err(msg: impl Into<String>) -> SimError {
    SimError::Config(msg.into())
}

fn check(ok: bool, key: &str, msg: impl std::fmt::Display) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(config_err(format!("{key}: {msg}")))
    }
}

fn parse_value(raw: &str) -> toml::Value {
    let doc = format!("v = {raw}");
    match doc.parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").expect("key present"),
        Err(_) => toml::Value::String(raw.to_string()),
    }
}

fn apply_set(table: &mut toml::Table, assignment: &str) -> Result<()> {
    let (path, raw) = assignment
        .split_once('=')
        .ok_or_else(|| config_err(format!("override '{assignment}' is not key=value")))?;
    let (section, key) = path
        .trim()
        .split_once('.')
        .ok_or_else(|| config_err(format!("override key '{}' must be section.key", path.trim())))?;
    let entry = table.entry(section.to_string()).or_insert_with(|| toml::Value::Table(toml::Table::new()));
    let toml::Value::Table(section_table) = entry else {
        return Err(config_err(format!("'{section}' is not a section")));
    };
    section_table.insert(key.to_string(), parse_value(raw.trim()));
    Ok(())
}

impl CampaignSpec {
    /// The built-in scenario with every sweep grid populated.
    pub fn default_paper() -> Self {
        Self::default()
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        Self::from_table(text.parse::<toml::Table>().map_err(|e| config_err(e.to_string()))?)
    }

    fn from_table(table: toml::Table) -> Result<Self> {
        let spec: CampaignSpec = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| config_err(e.message().to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    /// Canonical TOML form; parsing it gives back an equal spec.
    pub fn to_canonical_string(&self) -> String {
        toml::to_string(self).expect("spec is always serialisable")
    }

    pub fn shadow_fading(&self) -> Result<ShadowFadingMode> {
        self.scenario
            .shadow_fading
            .parse()
            .map_err(|e: SimError| config_err(format!("scenario.shadow_fading: {e}")))
    }

    pub fn mechanism_kinds(&self) -> Result<Vec<MechanismKind>> {
        let mut kinds = Vec::new();
        for name in &self.sweep.mechanisms {
            let kind: MechanismKind =
                name.parse().map_err(|e: SimError| config_err(format!("sweep.mechanisms: {e}")))?;
            if !kinds.contains(&kind) {
                kinds.push(kind);
            }
        }
        Ok(kinds)
    }

    pub fn mobilities(&self) -> Result<Vec<MobilityMode>> {
        let mut modes = Vec::new();
        for name in &self.sweep.mobility {
            let mode: MobilityMode =
                name.parse().map_err(|e: SimError| config_err(format!("sweep.mobility: {e}")))?;
            if !modes.contains(&mode) {
                modes.push(mode);
            }
        }
        Ok(modes)
    }

    pub fn validate(&self) -> Result<()> {
        let s = &self.scenario;
        check(s.environment == "dense_urban", "scenario.environment", "only 'dense_urban' is available")?;
        check(s.num_satellites >= 2, "scenario.num_satellites", "must be at least 2")?;
        for (key, v) in [
            ("scenario.satellite_spacing_km", s.satellite_spacing_km),
            ("scenario.altitude_km", s.altitude_km),
            ("scenario.satellite_speed_mps", s.satellite_speed_mps),
            ("scenario.cell_radius_km", s.cell_radius_km),
            ("scenario.prb_bandwidth_mhz", s.prb_bandwidth_mhz),
            ("scenario.v_max_mps", s.v_max_mps),
            ("scenario.pingpong_window_s", s.pingpong_window_s),
        ] {
            check(v > 0.0 && v.is_finite(), key, format!("must be positive, got {v}"))?;
        }
        check(
            s.carrier_frequency_ghz > 0.0 && s.carrier_frequency_ghz < 6.0,
            "scenario.carrier_frequency_ghz",
            format!("must be in (0, 6), got {}", s.carrier_frequency_ghz),
        )?;
        check(s.p_fluc_db >= 0.0, "scenario.p_fluc_db", format!("must be >= 0, got {}", s.p_fluc_db))?;
        check(s.eirp_density_dbw_per_mhz.is_finite(), "scenario.eirp_density_dbw_per_mhz", "must be finite")?;
        check(s.noise_power_dbm.is_finite(), "scenario.noise_power_dbm", "must be finite")?;
        self.shadow_fading()?;
        check(s.step_ms > 0, "scenario.step_ms", "must be positive")?;
        check(
            s.q_in_db > s.q_out_db,
            "scenario.q_in_db",
            format!("q_in ({}) must exceed q_out ({})", s.q_in_db, s.q_out_db),
        )?;
        check(
            s.t310_ms > 0 && s.t310_ms.is_multiple_of(s.step_ms),
            "scenario.t310_ms",
            format!("{} must be a positive multiple of step_ms {}", s.t310_ms, s.step_ms),
        )?;

        let w = &self.sweep;
        let kinds = self.mechanism_kinds()?;
        check(!kinds.is_empty(), "sweep.mechanisms", "must not be empty")?;
        check(!self.mobilities()?.is_empty(), "sweep.mobility", "must not be empty")?;
        let needs = |k: MechanismKind| kinds.contains(&k);
        if needs(MechanismKind::Measurement) {
            check(!w.ttt_ms.is_empty(), "sweep.ttt_ms", "must not be empty")?;
            check(!w.hys_plus_off_db.is_empty(), "sweep.hys_plus_off_db", "must not be empty")?;
        }
        for &ttt in &w.ttt_ms {
            check(
                ttt > 0 && ttt.is_multiple_of(s.step_ms),
                "sweep.ttt_ms",
                format!("{ttt} must be a positive multiple of step_ms {}", s.step_ms),
            )?;
        }
        let grids: [(&str, &[f64], f64, MechanismKind); 4] = [
            ("sweep.hys_plus_off_db", &w.hys_plus_off_db, 30.0, MechanismKind::Measurement),
            ("sweep.d_off_km", &w.d_off_km, 2.0 * s.satellite_spacing_km, MechanismKind::Distance),
            ("sweep.alpha_off_deg", &w.alpha_off_deg, 90.0, MechanismKind::Elevation),
            ("sweep.t_off_s", &w.t_off_s, 3600.0, MechanismKind::Timer),
        ];
        for (key, values, max, kind) in grids {
            if kind != MechanismKind::Measurement && needs(kind) {
                check(!values.is_empty(), key, "must not be empty")?;
            }
            for &v in values {
                check((0.0..=max).contains(&v), key, format!("{v} outside [0, {max}]"))?;
            }
        }
        for &t in &w.t_off_s {
            check(t > 0.0, "sweep.t_off_s", format!("{t} must be positive"))?;
        }

        check(self.seeds.drops >= 1, "seeds.drops", "must be at least 1")?;
        check(self.seeds.users_per_drop >= 1, "seeds.users_per_drop", "must be at least 1")?;
        check(!self.output.results.as_os_str().is_empty(), "output.results", "must not be empty")?;
        check(self.output.pathloss_samples >= 2, "output.pathloss_samples", "must be at least 2")?;
        check(self.output.pathloss_max_km > 0.0, "output.pathloss_max_km", "must be positive")?;
        Ok(())
    }

    fn apply(&mut self, o: &Overrides) {
        if let Some(m) = &o.mechanism {
            self.sweep.mechanisms = vec![m.clone()];
        }
        if let Some(v) = o.seed {
            self.seeds.base_seed = v;
        }
        if let Some(v) = o.drops {
            self.seeds.drops = v;
        }
        if let Some(v) = o.users {
            self.seeds.users_per_drop = v;
        }
        if let Some(p) = &o.out {
            self.output.results = p.clone();
        }
        if let Some(p) = &o.trace_pathloss {
            self.output.pathloss_trace = Some(p.clone());
        }
        if let Some(p) = &o.events {
            self.output.events = Some(p.clone());
        }
    }

    /// Base engine configuration (mechanism and mobility are set per row).
    pub fn base_config(&self) -> Result<SimConfig> {
        let s = &self.scenario;
        let mobility = MobilityConfig::with_mode(MobilityMode::Static, s.v_max_mps);
        let config = SimConfig {
            constellation: ConstellationConfig {
                num_satellites: s.num_satellites,
                spacing: s.satellite_spacing_km * 1000.0,
                altitude: s.altitude_km * 1000.0,
                speed: s.satellite_speed_mps,
            },
            channel: ChannelConfig {
                carrier_frequency: s.carrier_frequency_ghz,
                p_fluc: s.p_fluc_db,
                eirp_density: s.eirp_density_dbw_per_mhz,
                prb_bandwidth: s.prb_bandwidth_mhz,
                noise_power: s.noise_power_dbm,
                shadow_fading_mode: self.shadow_fading()?,
                ..ChannelConfig::default()
            },
            mobility,
            rlf: RlfConfig { q_in: s.q_in_db, q_out: s.q_out_db, t310_ms: s.t310_ms },
            pingpong_window: s.pingpong_window_s,
            cell_radius: s.cell_radius_km * 1000.0,
            step_ms: s.step_ms,
            drops: self.seeds.drops,
            users_per_drop: self.seeds.users_per_drop,
            base_seed: self.seeds.base_seed,
            channel_seed: self.seeds.channel_seed,
            record_events: self.output.events.is_some(),
            ..SimConfig::default()
        };
        config.validate()?;
        Ok(config)
    }

    /// Every mechanism setting of the sweep, in row order.
    pub fn mechanisms(&self) -> Result<Vec<HoMechanism>> {
        let w = &self.sweep;
        let mut out = Vec::new();
        for kind in self.mechanism_kinds()? {
            match kind {
                MechanismKind::Measurement => {
                    out.extend(engine::measurement_grid(&w.ttt_ms, &w.hys_plus_off_db))
                }
                MechanismKind::Distance => {
                    out.extend(w.d_off_km.iter().map(|&d| HoMechanism::Distance { d_off: d * 1000.0 }))
                }
                MechanismKind::Elevation => {
                    out.extend(w.alpha_off_deg.iter().map(|&a| HoMechanism::Elevation { alpha_off: a }))
                }
                MechanismKind::Timer => {
                    out.extend(w.t_off_s.iter().map(|&t| HoMechanism::Timer { t_off: t }))
                }
            }
        }
        Ok(out)
    }

    pub fn grid(&self) -> Result<CampaignGrid> {
        Ok(CampaignGrid {
            base: self.base_config()?,
            mechanisms: self.mechanisms()?,
            mobilities: self.mobilities()?,
        })
    }
}

/// Reads `path` (or starts from the built-in preset when `path` is `None`),
/// applies `set` assignments and flag overrides, then validates.
pub fn parse_config(path: Option<&Path>, overrides: &Overrides) -> Result<CampaignSpec> {
    let mut table = match path {
        Some(p) => {
            let text = fs::read_to_string(p)
                .map_err(|e| config_err(format!("cannot read config file '{}': {e}", p.display())))?;
            text.parse::<toml::Table>()
                .map_err(|e| config_err(format!("malformed config file '{}': {e}", p.display())))?
        }
        None => toml::Table::new(),
    };
    for assignment in &overrides.set {
        apply_set(&mut table, assignment)?;
    }
    let mut spec: CampaignSpec = toml::Value::Table(table)
        .try_into()
        .map_err(|e: toml::de::Error| config_err(e.message().trim().to_string()))?;
    spec.apply(overrides);
    spec.validate()?;
    Ok(spec)
}

fn create(path: &Path) -> Result<fs::File> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| SimError::io(parent, e))?;
    }
    fs::File::create(path).map_err(|e| SimError::io(path, e))
}

fn write_csv(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    let mut w = csv::Writer::from_writer(create(path)?);
    w.write_record(header).map_err(|e| SimError::io(path, e))?;
    for row in rows {
        w.write_record(&row).map_err(|e| SimError::io(path, e))?;
    }
    w.flush().map_err(|e| SimError::io(path, e))
}

/// One CSV row per record, in the order given.
pub fn results_rows(records: &[MetricsRecord]) -> Vec<Vec<String>> {
    records
        .iter()
        .map(|r| {
            let m = r.key.mechanism;
            vec![
                m.kind().as_str().to_string(),
                m.offset().to_string(),
                m.ttt_ms().map(|t| t.to_string()).unwrap_or_default(),
                r.key.mobility.as_str().to_string(),
                r.key.seed.to_string(),
                r.handovers().to_string(),
                r.pingpong_handovers().to_string(),
                r.rlfs().to_string(),
            ]
        })
        .collect()
}

pub fn emit_results(path: &Path, records: &[MetricsRecord]) -> Result<()> {
    write_csv(path, &RESULTS_HEADER, results_rows(records))
}

/// `(ground_distance_m, elevation_deg, pl_total_db)` for a UE at the cell
/// centre with shadow fading off, `samples` points evenly over
/// `[0, max_ground_distance]`.
pub fn pathloss_trace(
    channel: &ChannelConfig,
    altitude: f64,
    max_ground_distance: f64,
    samples: usize,
) -> Result<Vec<(f64, f64, f64)>> {
    if samples < 2 || !(max_ground_distance > 0.0) {
        return Err(config_err("path loss trace needs >= 2 samples over a positive range"));
    }
    (0..samples)
        .map(|i| {
            let ground = max_ground_distance * i as f64 / (samples - 1) as f64;
            let sat = SatelliteState { along_track: ground, altitude, speed: 0.0 };
            let elevation = geometry::elevation_angle(GroundPosition::ORIGIN, &sat);
            let distance = geometry::slant_distance_from_elevation(elevation, altitude);
            let pl = channel::total_path_loss(distance, elevation, 0.0, 0.0, channel)?;
            Ok((ground, elevation, pl))
        })
        .collect()
}

pub fn emit_pathloss_trace(path: &Path, trace: &[(f64, f64, f64)]) -> Result<()> {
    write_csv(
        path,
        &["ground_distance_m", "elevation_deg", "pl_total_db"],
        trace.iter().map(|(g, e, p)| vec![g.to_string(), e.to_string(), p.to_string()]),
    )
}

/// Events of one configuration's drops, tagged with the row they belong to.
pub struct EventBatch<'a> {
    pub record: &'a MetricsRecord,
    pub drop: u32,
    pub events: &'a [Event],
}

pub fn emit_events<'a>(path: &Path, batches: impl IntoIterator<Item = EventBatch<'a>>) -> Result<()> {
    let rows = batches.into_iter().flat_map(|b| {
        let m = b.record.key.mechanism;
        let mobility = b.record.key.mobility.as_str();
        b.events.iter().map(move |e| {
            vec![
                m.kind().as_str().to_string(),
                m.offset().to_string(),
                m.ttt_ms().map(|t| t.to_string()).unwrap_or_default(),
                mobility.to_string(),
                b.drop.to_string(),
                e.time.to_string(),
                e.ue.to_string(),
                e.kind.as_str().to_string(),
                e.from.to_string(),
                e.to.to_string(),
            ]
        })
    });
    write_csv(
        path,
        &["mechanism", "offset", "ttt_ms", "mobility", "drop", "time_s", "ue", "event", "from", "to"],
        rows.collect::<Vec<_>>(),
    )
}

/// Runs the whole campaign and writes every requested output.
pub fn run(spec: &CampaignSpec, log: &mut dyn Write) -> Result<Vec<MetricsRecord>> {
    let grid = spec.grid()?;
    let configs = grid.configs();
    let mut records = Vec::with_capacity(configs.len());
    let mut drops = Vec::new();
    for config in &configs {
        let (record, per_drop) = engine::run_config(config)?;
        let _ = writeln!(
            log,
            "{} {} {} {}: hos={} pp={} rlf={}",
            record.key.kind(),
            record.key.mechanism.offset(),
            record.key.mechanism.ttt_ms().map(|t| t.to_string()).unwrap_or_else(|| "-".into()),
            record.key.mobility.as_str(),
            record.handovers(),
            record.pingpong_handovers(),
            record.rlfs()
        );
        records.push(record);
        drops.push(per_drop);
    }
    emit_results(&spec.output.results, &records)?;
    if let Some(path) = &spec.output.events {
        emit_events(
            path,
            records.iter().zip(&drops).flat_map(|(record, per_drop)| {
                per_drop.iter().map(move |d| EventBatch { record, drop: d.drop, events: &d.events })
            }),
        )?;
    }
    if let Some(path) = &spec.output.pathloss_trace {
        let trace = pathloss_trace(
            &grid.base.channel,
            grid.base.constellation.altitude,
            spec.output.pathloss_max_km * 1000.0,
            spec.output.pathloss_samples,
        )?;
        emit_pathloss_trace(path, &trace)?;
    }
    Ok(records)
}

/// Process exit code for an error: 1 for configuration problems, 2 otherwise.
pub fn exit_code(err: &SimError) -> i32 {
    match err {
        SimError::Config(_) => 1,
        _ => 2,
    }
}
