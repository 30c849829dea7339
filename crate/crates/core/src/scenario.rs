//! Scenes, vehicle trajectories and drive statistics.
//!
//! Scene time is seconds since the scene epoch. Positions are in a local
//! tangent plane; a vehicle position is the center of its footprint at
//! ground level.

use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::array::{mount_arrays, ArrayPlacement, Role, VehicleSpec};
use crate::geom::{wrap_deg, OrientedBox, Panel, Vec3};
use crate::time::GpsTime;
use crate::{Error, Result};

/// GPS fix rate of the track recorders, Hz.
pub const GPS_RATE_HZ: f64 = 14.0;

/// One mile in meters.
pub const METERS_PER_MILE: f64 = 1609.344;

/// Meters per second in one mile per hour.
pub const MPS_PER_MPH: f64 = METERS_PER_MILE / 3600.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrackSample {
    pub t_s: f64,
    pub position: Vec3,
    pub velocity: Vec3,
    pub heading_deg: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pose {
    pub position: Vec3,
    pub velocity: Vec3,
    pub heading_deg: f64,
}

impl Pose {
    pub fn stationary(position: Vec3, heading_deg: f64) -> Self {
        Self {
            position,
            velocity: Vec3::ZERO,
            heading_deg,
        }
    }

    /// World position of a point given in this vehicle's frame.
    pub fn to_world(&self, local: Vec3) -> Vec3 {
        self.position + local.rotate_z(self.heading_deg)
    }
}

/// Time-stamped vehicle positions, nominally at the GPS fix rate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeoTrack {
    samples: Vec<TrackSample>,
    rate_hz: f64,
}

impl GeoTrack {
    /// Wrap pre-computed samples; timestamps must be strictly increasing.
    pub fn new(samples: Vec<TrackSample>, rate_hz: f64) -> Result<Self> {
        if samples.is_empty() || samples.windows(2).any(|w| !(w[1].t_s > w[0].t_s)) {
            return Err(Error::BadTrack);
        }
        if !(rate_hz > 0.0) {
            return Err(Error::NonPositive {
                quantity: "track rate",
                value: rate_hz,
            });
        }
        Ok(Self { samples, rate_hz })
    }

    /// Build from timed positions. Knot velocity is the mean of the
    /// adjacent segment slopes; heading follows the velocity and holds its
    /// last value while stopped.
    pub fn from_positions(times: &[f64], positions: &[Vec3], rate_hz: f64, initial_heading_deg: f64) -> Result<Self> {
        if times.len() != positions.len() || times.is_empty() {
            return Err(Error::BadTrack);
        }
        let n = times.len();
        let slope = |i: usize| (positions[i + 1] - positions[i]) * (1.0 / (times[i + 1] - times[i]));
        let mut heading = initial_heading_deg;
        let mut samples = Vec::with_capacity(n);
        for i in 0..n {
            let velocity = if n == 1 {
                Vec3::ZERO
            } else if i == 0 {
                slope(0)
            } else if i == n - 1 {
                slope(n - 2)
            } else {
                (slope(i - 1) + slope(i)) * 0.5
            };
            if libm::hypot(velocity.x, velocity.y) > 0.05 {
                heading = velocity.azimuth_deg();
            }
            samples.push(TrackSample {
                t_s: times[i],
                position: positions[i],
                velocity,
                heading_deg: heading,
            });
        }
        Self::new(samples, rate_hz)
    }

    /// Resample a piecewise-linear waypoint path `(t, position)` at `rate_hz`.
    pub fn from_waypoints(waypoints: &[(f64, Vec3)], rate_hz: f64) -> Result<Self> {
        if waypoints.len() < 2 || waypoints.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            return Err(Error::BadTrack);
        }
        let t0 = waypoints[0].0;
        let t1 = waypoints[waypoints.len() - 1].0;
        let count = libm::floor((t1 - t0) * rate_hz + 1e-9) as usize;
        let mut times: Vec<f64> = (0..=count).map(|k| t0 + k as f64 / rate_hz).collect();
        if t1 - times[times.len() - 1] > 1e-9 {
            times.push(t1);
        }
        let mut seg = 0;
        let positions = times
            .iter()
            .map(|&t| {
                while seg + 2 < waypoints.len() && t > waypoints[seg + 1].0 {
                    seg += 1;
                }
                let (ta, pa) = waypoints[seg];
                let (tb, pb) = waypoints[seg + 1];
                pa + (pb - pa) * ((t - ta) / (tb - ta))
            })
            .collect::<Vec<_>>();
        let heading = (waypoints[1].1 - waypoints[0].1).azimuth_deg();
        Self::from_positions(&times, &positions, rate_hz, heading)
    }

    /// Straight constant-velocity track from `start` over `[t0, t1]`.
    pub fn straight(start: Vec3, velocity: Vec3, t0: f64, t1: f64, rate_hz: f64) -> Result<Self> {
        Self::from_waypoints(&[(t0, start), (t1, start + velocity * (t1 - t0))], rate_hz)
    }

    pub fn samples(&self) -> &[TrackSample] {
        &self.samples
    }

    pub fn rate_hz(&self) -> f64 {
        self.rate_hz
    }

    pub fn start(&self) -> f64 {
        self.samples[0].t_s
    }

    pub fn end(&self) -> f64 {
        self.samples[self.samples.len() - 1].t_s
    }
}

/// Pose at time `t`: exact at knots, linear in between, with the
/// segment slope as velocity.
pub fn sample_track(track: &GeoTrack, t: f64) -> Result<Pose> {
    let s = &track.samples;
    if !(t >= track.start() && t <= track.end()) {
        return Err(Error::OutsideSpan {
            t,
            start: track.start(),
            end: track.end(),
        });
    }
    let i = s.partition_point(|p| p.t_s <= t);
    let a = &s[i - 1];
    if a.t_s == t || i == s.len() {
        return Ok(Pose {
            position: a.position,
            velocity: a.velocity,
            heading_deg: a.heading_deg,
        });
    }
    let b = &s[i];
    let dt = b.t_s - a.t_s;
    let u = (t - a.t_s) / dt;
    let velocity = (b.position - a.position) * (1.0 / dt);
    Ok(Pose {
        position: a.position + (b.position - a.position) * u,
        velocity,
        heading_deg: wrap_deg(a.heading_deg + wrap_deg(b.heading_deg - a.heading_deg) * u),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Trajectory {
    Static { position: Vec3, heading_deg: f64 },
    Track(GeoTrack),
}

impl Trajectory {
    pub fn pose(&self, t: f64) -> Result<Pose> {
        match self {
            Trajectory::Static { position, heading_deg } => Ok(Pose::stationary(*position, *heading_deg)),
            Trajectory::Track(track) => sample_track(track, t),
        }
    }

    /// Time span, `None` when valid at all times.
    pub fn span(&self) -> Option<(f64, f64)> {
        match self {
            Trajectory::Static { .. } => None,
            Trajectory::Track(t) => Some((t.start(), t.end())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Vehicle {
    pub id: String,
    pub length_m: f64,
    pub width_m: f64,
    pub height_m: f64,
    /// Whether the side and end faces produce specular reflections.
    pub reflective: bool,
    pub reflection_loss_db: f64,
    /// Loss added to a direct path that passes through this vehicle.
    pub penetration_loss_db: f64,
    pub trajectory: Trajectory,
}

impl Vehicle {
    pub fn body(&self) -> VehicleSpec {
        VehicleSpec {
            length_m: self.length_m,
            width_m: self.width_m,
            height_m: self.height_m,
            ..VehicleSpec::van()
        }
    }
}

/// Fixed vertical reflector such as a barrier or building wall.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StaticPanel {
    pub start: Vec3,
    pub end: Vec3,
    pub height_m: f64,
    pub reflection_loss_db: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scene {
    pub name: String,
    pub epoch: GpsTime,
    pub vehicles: Vec<Vehicle>,
    pub panels: Vec<StaticPanel>,
    pub tx_vehicle: usize,
    pub rx_vehicle: usize,
    /// Array height above ground on the sounder vehicles, meters.
    pub array_height_m: f64,
}

impl Scene {
    pub fn validate(&self) -> Result<()> {
        if self.tx_vehicle >= self.vehicles.len() || self.rx_vehicle >= self.vehicles.len() {
            return Err(Error::InvalidScene("sounder vehicle index out of range".into()));
        }
        if self.tx_vehicle == self.rx_vehicle {
            return Err(Error::InvalidScene("TX and RX must be different vehicles".into()));
        }
        for v in &self.vehicles {
            for (q, x) in [("length_m", v.length_m), ("width_m", v.width_m), ("height_m", v.height_m)] {
                if !(x > 0.0 && x.is_finite()) {
                    return Err(Error::NonPositive { quantity: q, value: x });
                }
            }
        }
        for p in &self.panels {
            if !(p.height_m > 0.0) {
                return Err(Error::NonPositive {
                    quantity: "panel height_m",
                    value: p.height_m,
                });
            }
            if (p.end - p.start).norm() <= 0.0 {
                return Err(Error::DegenerateGeometry("zero-length panel"));
            }
        }
        if !(self.array_height_m > 0.0) {
            return Err(Error::NonPositive {
                quantity: "array_height_m",
                value: self.array_height_m,
            });
        }
        self.coverage().map(|_| ())
    }

    /// Interval where every vehicle trajectory is defined; unbounded ends
    /// are reported as infinities.
    pub fn coverage(&self) -> Result<(f64, f64)> {
        let mut lo = f64::NEG_INFINITY;
        let mut hi = f64::INFINITY;
        for v in &self.vehicles {
            if let Some((a, b)) = v.trajectory.span() {
                lo = lo.max(a);
                hi = hi.min(b);
            }
        }
        if lo > hi {
            return Err(Error::NoOverlap);
        }
        Ok((lo, hi))
    }

    pub fn covers(&self, t0: f64, t1: f64) -> Result<()> {
        let (lo, hi) = self.coverage()?;
        for t in [t0, t1] {
            if t < lo || t > hi {
                return Err(Error::OutsideSpan { t, start: lo, end: hi });
            }
        }
        Ok(())
    }

    pub fn rx_spec(&self) -> VehicleSpec {
        VehicleSpec {
            array_height_m: self.array_height_m,
            ..self.vehicles[self.rx_vehicle].body()
        }
    }

    pub fn tx_spec(&self) -> VehicleSpec {
        VehicleSpec {
            array_height_m: self.array_height_m,
            ..self.vehicles[self.tx_vehicle].body()
        }
    }

    pub fn rx_arrays(&self) -> Vec<ArrayPlacement> {
        mount_arrays(&self.rx_spec(), Role::Rx)
    }

    pub fn tx_arrays(&self) -> Vec<ArrayPlacement> {
        mount_arrays(&self.tx_spec(), Role::Tx)
    }

    /// Frozen geometry at scene time `t`.
    pub fn snapshot(&self, t: f64) -> Result<SceneSnapshot> {
        let mut vehicles = Vec::with_capacity(self.vehicles.len());
        for v in &self.vehicles {
            let pose = v.trajectory.pose(t)?;
            vehicles.push(VehicleState {
                pose,
                body: OrientedBox {
                    center: Vec3::new(pose.position.x, pose.position.y, 0.0),
                    heading_deg: pose.heading_deg,
                    length: v.length_m,
                    width: v.width_m,
                    height: v.height_m,
                },
                reflective: v.reflective,
                reflection_loss_db: v.reflection_loss_db,
                penetration_loss_db: v.penetration_loss_db,
            });
        }
        let panels = self
            .panels
            .iter()
            .map(|p| (Panel::two_sided(p.start, p.end, 0.0, p.height_m), p.reflection_loss_db))
            .collect();
        Ok(SceneSnapshot {
            t_s: t,
            vehicles,
            panels,
            tx_vehicle: self.tx_vehicle,
            rx_vehicle: self.rx_vehicle,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VehicleState {
    pub pose: Pose,
    pub body: OrientedBox,
    pub reflective: bool,
    pub reflection_loss_db: f64,
    pub penetration_loss_db: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneSnapshot {
    pub t_s: f64,
    pub vehicles: Vec<VehicleState>,
    /// Static reflectors with their reflection loss in dB.
    pub panels: Vec<(Panel, f64)>,
    pub tx_vehicle: usize,
    pub rx_vehicle: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriveStat {
    pub t_s: f64,
    pub separation_m: f64,
    pub rx_speed_mps: f64,
    /// Range rate, positive while the vehicles separate.
    pub relative_speed_mps: f64,
}

/// Separation, RX speed and range rate at every fix of either track
/// inside their common span.
pub fn drive_stats(tx: &GeoTrack, rx: &GeoTrack) -> Result<Vec<DriveStat>> {
    let lo = tx.start().max(rx.start());
    let hi = tx.end().min(rx.end());
    if lo > hi {
        return Err(Error::NoOverlap);
    }
    let mut times: Vec<f64> = tx
        .samples()
        .iter()
        .chain(rx.samples())
        .map(|s| s.t_s)
        .filter(|&t| t >= lo && t <= hi)
        .collect();
    times.sort_by(f64::total_cmp);
    times.dedup();
    let mut out = Vec::with_capacity(times.len());
    for t in times {
        let a = sample_track(tx, t)?;
        let b = sample_track(rx, t)?;
        let d = a.position - b.position;
        let sep = d.norm();
        let rate = if sep > 1e-12 {
            d.dot(a.velocity - b.velocity) / sep
        } else {
            0.0
        };
        out.push(DriveStat {
            t_s: t,
            separation_m: sep,
            rx_speed_mps: b.velocity.norm(),
            relative_speed_mps: rate,
        });
    }
    Ok(out)
}

/// Parameters of the canned drive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DrivePlan {
    pub distance_m: f64,
    pub average_speed_mps: f64,
    pub peak_speed_mps: f64,
    pub max_separation_m: f64,
    pub min_separation_m: f64,
}

impl Default for DrivePlan {
    /// 14.3 miles at an average of 20 mph, peaking at 60 mph, with the
    /// TX pulling up to 250 m ahead.
    fn default() -> Self {
        Self {
            distance_m: 14.3 * METERS_PER_MILE,
            average_speed_mps: 20.0 * MPS_PER_MPH,
            peak_speed_mps: 60.0 * MPS_PER_MPH,
            max_separation_m: 250.0,
            min_separation_m: 15.0,
        }
    }
}

/// Speed profile knots `(t, v)` for an urban drive with one highway leg,
/// scaled so the covered distance matches the plan.
fn speed_profile(plan: &DrivePlan) -> Vec<(f64, f64)> {
    let duration = plan.distance_m / plan.average_speed_mps;
    let vp = plan.peak_speed_mps;
    // times as fractions of the duration; `None` speeds are the urban
    // cruise speed solved below
    let shape: [(f64, Option<f64>); 10] = [
        (0.0, Some(0.0)),
        (0.02, None),
        (0.20, None),
        (0.22, Some(0.0)),
        (0.24, None),
        (0.40, None),
        (0.43, Some(vp)),
        (0.57, Some(vp)),
        (0.60, None),
        (1.0, None),
    ];
    let mut knots: Vec<(f64, Option<f64>)> = shape.iter().map(|&(f, v)| (f * duration, v)).collect();
    let last = knots.len() - 1;
    knots[last].1 = Some(0.0);
    knots.insert(last, (0.98 * duration, None));
    // distance is linear in the cruise speed c: d(c) = d0 + c * d1
    let eval = |c: f64| -> f64 {
        knots
            .windows(2)
            .map(|w| 0.5 * (w[0].1.unwrap_or(c) + w[1].1.unwrap_or(c)) * (w[1].0 - w[0].0))
            .sum()
    };
    let d0 = eval(0.0);
    let c = (plan.distance_m - d0) / (eval(1.0) - d0);
    knots.into_iter().map(|(t, v)| (t, v.unwrap_or(c))).collect()
}

/// Distance covered at time `t` under a piecewise-linear speed profile.
fn distance_at(profile: &[(f64, f64)], t: f64) -> f64 {
    let mut d = 0.0;
    for w in profile.windows(2) {
        let (ta, va) = w[0];
        let (tb, vb) = w[1];
        if t <= ta {
            break;
        }
        let te = t.min(tb);
        let ve = va + (vb - va) * (te - ta) / (tb - ta);
        d += 0.5 * (va + ve) * (te - ta);
    }
    d
}

/// Synthetic straight-road drive: `(tx_track, rx_track)` sampled at the
/// GPS rate. The TX leads; its gap peaks at exactly the planned maximum
/// separation at a fix time in the middle of the highway leg.
pub fn synthetic_drive(plan: &DrivePlan) -> Result<(GeoTrack, GeoTrack)> {
    if !(plan.distance_m > 0.0 && plan.average_speed_mps > 0.0) {
        return Err(Error::NonPositive {
            quantity: "drive distance or speed",
            value: plan.distance_m.min(plan.average_speed_mps),
        });
    }
    let profile = speed_profile(plan);
    let duration = profile[profile.len() - 1].0;
    let n = libm::round(duration * GPS_RATE_HZ) as usize;
    let times: Vec<f64> = (0..=n).map(|k| k as f64 / GPS_RATE_HZ).collect();
    let center = libm::round(0.5 * duration * GPS_RATE_HZ) / GPS_RATE_HZ;
    let width = 0.08 * duration;
    let gap = |t: f64| {
        let u = (t - center) / width;
        plan.min_separation_m + (plan.max_separation_m - plan.min_separation_m) * libm::exp(-u * u)
    };
    let rx: Vec<Vec3> = times.iter().map(|&t| Vec3::new(distance_at(&profile, t), 0.0, 0.0)).collect();
    let tx: Vec<Vec3> = times.iter().zip(&rx).map(|(&t, p)| Vec3::new(p.x + gap(t), 0.0, 0.0)).collect();
    Ok((
        GeoTrack::from_positions(&times, &tx, GPS_RATE_HZ, 0.0)?,
        GeoTrack::from_positions(&times, &rx, GPS_RATE_HZ, 0.0)?,
    ))
}
