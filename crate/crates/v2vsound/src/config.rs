//! Scenario configuration files.
//!
//! Scenarios are TOML documents. Every physical quantity carries its unit
//! in the key name (`length_m`, `heading_deg`, `velocity_mps`); the full
//! grammar is documented in `docs/scenario-format.md`.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use sha2::{Digest, Sha256};
use v2vsound_core::array::{PatternModel, BUMPER_HEIGHT_M};
use v2vsound_core::geom::Vec3;
use v2vsound_core::record::CaptureMode;
use v2vsound_core::rxproc::ProcessingConfig;
use v2vsound_core::scenario::{synthetic_drive, DrivePlan, GeoTrack, Scene, StaticPanel, Trajectory, Vehicle, GPS_RATE_HZ};
use v2vsound_core::sweep::{SounderConfig, SweepConfig};
use v2vsound_core::time::GpsTime;

use crate::error::{Error, Result};
use crate::gps;

/// A loaded scenario: the scene plus the sounder, sweep and processing
/// settings it overrides.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub scene: Scene,
    pub sounder: SounderConfig,
    pub sweep: SweepConfig,
    pub processing: ProcessingConfig,
    /// Config text the scenario was loaded from.
    pub source: String,
}

impl Scenario {
    /// Hash of the resolved scene, stable across formatting changes in
    /// the source text.
    pub fn scene_hash(&self) -> String {
        let bytes = serde_json::to_vec(&(&self.scene, &self.sounder, &self.sweep, &self.processing))
            .expect("scenario serializes");
        sha256_hex(&bytes)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct Doc {
    name: String,
    #[serde(default)]
    epoch_gps_s: u64,
    array_height_m: Option<f64>,
    tx_vehicle: String,
    rx_vehicle: String,
    /// `[lat, lon]` projection origin for GPS tracks.
    origin_deg: Option<[f64; 2]>,
    drive: Option<DriveDoc>,
    #[serde(default)]
    vehicles: Vec<VehicleDoc>,
    #[serde(default)]
    panels: Vec<PanelDoc>,
    #[serde(default)]
    sounder: SounderDoc,
    #[serde(default)]
    sweep: SweepDoc,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct DriveDoc {
    distance_m: Option<f64>,
    average_speed_mps: Option<f64>,
    peak_speed_mps: Option<f64>,
    max_separation_m: Option<f64>,
    min_separation_m: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct VehicleDoc {
    id: String,
    length_m: Option<f64>,
    width_m: Option<f64>,
    height_m: Option<f64>,
    #[serde(default)]
    reflective: bool,
    reflection_loss_db: Option<f64>,
    penetration_loss_db: Option<f64>,
    #[serde(rename = "static")]
    fixed: Option<StaticDoc>,
    constant_velocity: Option<ConstantVelocityDoc>,
    waypoints: Option<WaypointsDoc>,
    gps_csv: Option<GpsCsvDoc>,
    drive: Option<DriveRoleDoc>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct StaticDoc {
    position_m: [f64; 2],
    #[serde(default)]
    heading_deg: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConstantVelocityDoc {
    position_m: [f64; 2],
    velocity_mps: [f64; 2],
    #[serde(default)]
    start_s: f64,
    end_s: f64,
    rate_hz: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct WaypointsDoc {
    /// `[t_s, x_m, y_m]` rows.
    points: Vec<[f64; 3]>,
    rate_hz: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GpsCsvDoc {
    path: PathBuf,
    rate_hz: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct DriveRoleDoc {
    role: DriveRole,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(rename_all = "lowercase")]
enum DriveRole {
    Tx,
    Rx,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PanelDoc {
    start_m: [f64; 2],
    end_m: [f64; 2],
    height_m: f64,
    reflection_loss_db: f64,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SounderDoc {
    eirp_dbm: Option<f64>,
    noise_figure_db: Option<f64>,
    noise: Option<bool>,
    rx_pattern: Option<PatternDoc>,
    rx_beamwidth_deg: Option<f64>,
    detection_threshold_db: Option<f64>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum PatternDoc {
    RaisedCosine,
    UniformPlanar,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepDoc {
    dwell_ns: Option<u64>,
    guard_ns: Option<u64>,
    repetition_hz: Option<f64>,
    capture_mode: Option<CaptureMode>,
}

/// Default vehicle dimensions and losses when a key is omitted.
pub const DEFAULT_LENGTH_M: f64 = 4.57;
pub const DEFAULT_WIDTH_M: f64 = 2.0;
pub const DEFAULT_HEIGHT_M: f64 = 2.0;
pub const DEFAULT_REFLECTION_LOSS_DB: f64 = 10.0;
pub const DEFAULT_PENETRATION_LOSS_DB: f64 = 30.0;

/// 1-based line and column of a byte offset.
fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let head = &text[..offset.min(text.len())];
    let line = head.matches('\n').count() + 1;
    let col = head.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, col)
}

fn positive(key: String, v: f64) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::semantic(key, format!("must be positive, got {v}")))
    }
}

fn non_negative(key: String, v: f64) -> Result<f64> {
    if v >= 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::semantic(key, format!("must be non-negative, got {v}")))
    }
}

fn xy(p: [f64; 2]) -> Vec3 {
    Vec3::new(p[0], p[1], 0.0)
}

/// Parse scenario text. `source_name` labels diagnostics; relative track
/// file paths resolve against `base_dir`.
pub fn load_scenario(text: &str, source_name: &str, base_dir: Option<&Path>) -> Result<Scenario> {
    let doc: Doc = toml::from_str(text).map_err(|e| {
        let (line, column) = e.span().map_or((1, 1), |s| line_col(text, s.start));
        Error::Parse {
            source_name: source_name.to_string(),
            line,
            column,
            message: e.message().to_string(),
        }
    })?;
    resolve(doc, text, base_dir)
}

pub fn load_scenario_file(path: &Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    load_scenario(&text, &path.display().to_string(), path.parent())
}

fn resolve(doc: Doc, text: &str, base_dir: Option<&Path>) -> Result<Scenario> {
    let array_height_m = positive("array_height_m".into(), doc.array_height_m.unwrap_or(BUMPER_HEIGHT_M))?;
    let mut index = HashMap::new();
    for (i, v) in doc.vehicles.iter().enumerate() {
        if v.id.is_empty() {
            return Err(Error::semantic(format!("vehicles[{i}].id"), "must not be empty"));
        }
        if index.insert(v.id.as_str(), i).is_some() {
            return Err(Error::semantic(format!("vehicles[{i}].id"), format!("duplicate vehicle id '{}'", v.id)));
        }
    }
    let lookup = |key: &str, id: &str| {
        index
            .get(id)
            .copied()
            .ok_or_else(|| Error::semantic(key, format!("unknown vehicle id '{id}'")))
    };
    let tx_vehicle = lookup("tx_vehicle", &doc.tx_vehicle)?;
    let rx_vehicle = lookup("rx_vehicle", &doc.rx_vehicle)?;
    if tx_vehicle == rx_vehicle {
        return Err(Error::semantic("rx_vehicle", "must differ from tx_vehicle"));
    }

    let plan = drive_plan(doc.drive.as_ref())?;
    let mut drive_tracks: Option<(GeoTrack, GeoTrack)> = None;
    let mut gps_origin = doc.origin_deg.map(|o| (o[0], o[1]));
    let epoch_s = doc.epoch_gps_s as f64;

    let mut vehicles = Vec::with_capacity(doc.vehicles.len());
    for (i, v) in doc.vehicles.iter().enumerate() {
        let key = |k: &str| format!("vehicles[{i}].{k}");
        let trajectory = {
            let set = [
                v.fixed.is_some(),
                v.constant_velocity.is_some(),
                v.waypoints.is_some(),
                v.gps_csv.is_some(),
                v.drive.is_some(),
            ];
            let count = set.iter().filter(|&&b| b).count();
            if count != 1 {
                return Err(Error::semantic(
                    format!("vehicles[{i}]"),
                    format!(
                        "exactly one of static, constant_velocity, waypoints, gps_csv, drive is required, found {count}"
                    ),
                ));
            }
            if let Some(s) = &v.fixed {
                Trajectory::Static {
                    position: xy(s.position_m),
                    heading_deg: s.heading_deg,
                }
            } else if let Some(c) = &v.constant_velocity {
                if !(c.end_s > c.start_s) {
                    return Err(Error::semantic(key("constant_velocity.end_s"), "must be after start_s"));
                }
                let rate = positive(key("constant_velocity.rate_hz"), c.rate_hz.unwrap_or(GPS_RATE_HZ))?;
                let track = GeoTrack::straight(xy(c.position_m), xy(c.velocity_mps), c.start_s, c.end_s, rate)
                    .map_err(|e| Error::semantic(key("constant_velocity"), e.to_string()))?;
                Trajectory::Track(track)
            } else if let Some(w) = &v.waypoints {
                let rate = positive(key("waypoints.rate_hz"), w.rate_hz.unwrap_or(GPS_RATE_HZ))?;
                let pts: Vec<(f64, Vec3)> = w.points.iter().map(|p| (p[0], Vec3::new(p[1], p[2], 0.0))).collect();
                let track = GeoTrack::from_waypoints(&pts, rate).map_err(|_| {
                    Error::semantic(
                        key("waypoints.points"),
                        "need at least two points with strictly increasing t_s",
                    )
                })?;
                Trajectory::Track(track)
            } else if let Some(g) = &v.gps_csv {
                let rate = positive(key("gps_csv.rate_hz"), g.rate_hz.unwrap_or(GPS_RATE_HZ))?;
                let path = match base_dir {
                    Some(dir) if g.path.is_relative() => dir.join(&g.path),
                    _ => g.path.clone(),
                };
                let fixes = gps::read_fixes_file(&path).map_err(|e| Error::semantic(key("gps_csv.path"), e.to_string()))?;
                let first = fixes
                    .first()
                    .ok_or_else(|| Error::semantic(key("gps_csv.path"), "track file has no fixes"))?;
                let origin = *gps_origin.get_or_insert((first.lat_deg, first.lon_deg));
                let track = gps::fixes_to_track(&fixes, origin, epoch_s, rate)
                    .map_err(|e| Error::semantic(key("gps_csv.path"), e.to_string()))?;
                Trajectory::Track(track)
            } else {
                let role = v.drive.as_ref().map(|d| d.role).unwrap_or(DriveRole::Rx);
                if drive_tracks.is_none() {
                    drive_tracks = Some(synthetic_drive(&plan).map_err(|e| Error::semantic("drive", e.to_string()))?);
                }
                let (tx, rx) = drive_tracks.as_ref().expect("drive tracks built");
                Trajectory::Track(if role == DriveRole::Tx { tx.clone() } else { rx.clone() })
            }
        };
        vehicles.push(Vehicle {
            id: v.id.clone(),
            length_m: positive(key("length_m"), v.length_m.unwrap_or(DEFAULT_LENGTH_M))?,
            width_m: positive(key("width_m"), v.width_m.unwrap_or(DEFAULT_WIDTH_M))?,
            height_m: positive(key("height_m"), v.height_m.unwrap_or(DEFAULT_HEIGHT_M))?,
            reflective: v.reflective,
            reflection_loss_db: non_negative(
                key("reflection_loss_db"),
                v.reflection_loss_db.unwrap_or(DEFAULT_REFLECTION_LOSS_DB),
            )?,
            penetration_loss_db: non_negative(
                key("penetration_loss_db"),
                v.penetration_loss_db.unwrap_or(DEFAULT_PENETRATION_LOSS_DB),
            )?,
            trajectory,
        });
    }

    let mut panels = Vec::with_capacity(doc.panels.len());
    for (i, p) in doc.panels.iter().enumerate() {
        let key = |k: &str| format!("panels[{i}].{k}");
        if p.start_m == p.end_m {
            return Err(Error::semantic(key("end_m"), "panel has zero length"));
        }
        panels.push(StaticPanel {
            start: xy(p.start_m),
            end: xy(p.end_m),
            height_m: positive(key("height_m"), p.height_m)?,
            reflection_loss_db: non_negative(key("reflection_loss_db"), p.reflection_loss_db)?,
        });
    }

    let scene = Scene {
        name: doc.name,
        epoch: GpsTime::from_parts(doc.epoch_gps_s, 0),
        vehicles,
        panels,
        tx_vehicle,
        rx_vehicle,
        array_height_m,
    };
    scene.validate().map_err(|e| Error::semantic("vehicles", e.to_string()))?;

    let mut sounder = SounderConfig::default();
    let s = &doc.sounder;
    if let Some(v) = s.eirp_dbm {
        sounder.eirp_dbm = v;
    }
    if let Some(v) = s.noise_figure_db {
        sounder.noise_figure_db = non_negative("sounder.noise_figure_db".into(), v)?;
    }
    if let Some(v) = s.noise {
        sounder.add_noise = v;
    }
    if let Some(v) = s.rx_beamwidth_deg {
        sounder.rx_array.beamwidth_3db_deg = positive("sounder.rx_beamwidth_deg".into(), v)?;
    }
    if let Some(PatternDoc::UniformPlanar) = s.rx_pattern {
        sounder.rx_array = sounder.rx_array.with_planar_pattern();
    } else if let Some(PatternDoc::RaisedCosine) = s.rx_pattern {
        sounder.rx_array.pattern_model = PatternModel::RaisedCosine;
    }
    let mut processing = ProcessingConfig::default();
    if let Some(v) = s.detection_threshold_db {
        processing.detection_threshold_db = positive("sounder.detection_threshold_db".into(), v)?;
    }

    let mut sweep = SweepConfig::default();
    let w = &doc.sweep;
    if let Some(v) = w.dwell_ns {
        sweep.dwell_ns = v;
    }
    if let Some(v) = w.guard_ns {
        sweep.guard_ns = v;
    }
    if let Some(v) = w.repetition_hz {
        sweep.repetition_hz = positive("sweep.repetition_hz".into(), v)?;
    }
    if let Some(v) = w.capture_mode {
        sweep.capture_mode = v;
    }
    Ok(Scenario {
        scene,
        sounder,
        sweep,
        processing,
        source: text.to_string(),
    })
}

fn drive_plan(doc: Option<&DriveDoc>) -> Result<DrivePlan> {
    let mut plan = DrivePlan::default();
    let Some(d) = doc else {
        return Ok(plan);
    };
    let fields = [
        ("drive.distance_m", d.distance_m, &mut plan.distance_m),
        ("drive.average_speed_mps", d.average_speed_mps, &mut plan.average_speed_mps),
        ("drive.peak_speed_mps", d.peak_speed_mps, &mut plan.peak_speed_mps),
        ("drive.max_separation_m", d.max_separation_m, &mut plan.max_separation_m),
        ("drive.min_separation_m", d.min_separation_m, &mut plan.min_separation_m),
    ];
    for (key, v, slot) in fields {
        if let Some(v) = v {
            *slot = positive(key.into(), v)?;
        }
    }
    Ok(plan)
}
