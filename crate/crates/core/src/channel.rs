//! Geometric multipath channel: direct and first-order specular paths
//! between array pairs, and their band-limited tapped-delay-line form.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::geom::{Panel, Vec3};
use crate::scenario::SceneSnapshot;
use crate::{Complex, Error, Result, CARRIER_HZ, SAMPLE_RATE_HZ, SPEED_OF_LIGHT};

/// Thermal noise density, dBm/Hz.
pub const THERMAL_NOISE_DBM_HZ: f64 = -174.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PathKind {
    Los,
    Reflected,
    BlockedLos,
}

/// What a reflected path bounced off.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Reflector {
    Panel(usize),
    /// Vehicle index and face (0 front, 1 left, 2 rear, 3 right).
    Vehicle(usize, u8),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Path {
    pub kind: PathKind,
    pub length_m: f64,
    pub delay_s: f64,
    /// Propagation gain including spreading, reflection and blockage loss.
    pub gain_db: f64,
    /// World-frame departure direction at the TX.
    pub aod_az_deg: f64,
    pub aod_el_deg: f64,
    /// World-frame direction at the RX looking back toward the source.
    pub aoa_az_deg: f64,
    pub aoa_el_deg: f64,
    pub doppler_hz: f64,
    pub blockers: u32,
    pub reflector: Option<Reflector>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathSet {
    pub t_s: f64,
    pub tx_array_id: usize,
    pub rx_array_id: usize,
    pub paths: Vec<Path>,
}

impl PathSet {
    pub fn direct(&self) -> Option<&Path> {
        self.paths.iter().find(|p| p.kind != PathKind::Reflected)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelConfig {
    pub frequency_hz: f64,
    /// Highest reflection order traced. Only first order is implemented.
    pub max_reflection_order: u8,
    /// Specular ground reflection. Not implemented; must stay off.
    pub ground_bounce: bool,
}

impl Default for ChannelConfig {
    fn default() -> Self {
        Self {
            frequency_hz: CARRIER_HZ,
            max_reflection_order: 1,
            ground_bounce: false,
        }
    }
}

impl ChannelConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.frequency_hz > 0.0) {
            return Err(Error::NonPositive {
                quantity: "frequency_hz",
                value: self.frequency_hz,
            });
        }
        if self.ground_bounce {
            return Err(Error::Unsupported("ground bounce"));
        }
        if self.max_reflection_order > 1 {
            return Err(Error::Unsupported("reflection order above 1"));
        }
        Ok(())
    }
}

/// Friis free-space loss `20 log10(4 pi d f / c)` in dB.
pub fn free_space_path_loss(distance_m: f64, frequency_hz: f64) -> Result<f64> {
    if !(distance_m > 0.0) {
        return Err(Error::NonPositive {
            quantity: "distance",
            value: distance_m,
        });
    }
    if !(frequency_hz > 0.0) {
        return Err(Error::NonPositive {
            quantity: "frequency",
            value: frequency_hz,
        });
    }
    Ok(20.0 * libm::log10(4.0 * core::f64::consts::PI * distance_m * frequency_hz / SPEED_OF_LIGHT))
}

/// Receiver noise power `-174 + 10 log10(B) + NF` in dBm.
pub fn noise_power_dbm(bandwidth_hz: f64, noise_figure_db: f64) -> f64 {
    THERMAL_NOISE_DBM_HZ + 10.0 * libm::log10(bandwidth_hz) + noise_figure_db
}

/// Doppler shift `(f/c) (v_tx . u_dep - v_rx . u_arr)`, where `u_dep` and
/// `u_arr` are unit propagation directions of the first and last legs.
/// Positive while the route is shortening.
pub fn path_doppler(u_dep: Vec3, u_arr: Vec3, v_tx: Vec3, v_rx: Vec3, frequency_hz: f64) -> f64 {
    frequency_hz / SPEED_OF_LIGHT * (v_tx.dot(u_dep) - v_rx.dot(u_arr))
}

/// One end of a link in world coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Endpoint {
    pub array_id: usize,
    pub position: Vec3,
    pub velocity: Vec3,
    /// World azimuth of the array boresight.
    pub boresight_deg: f64,
    /// Vehicle carrying the array, excluded from blockage tests.
    pub vehicle: Option<usize>,
}

fn blockers(snap: &SceneSnapshot, a: Vec3, b: Vec3, skip: [Option<usize>; 3]) -> (u32, f64) {
    let mut count = 0;
    let mut loss = 0.0;
    for (i, v) in snap.vehicles.iter().enumerate() {
        if skip.contains(&Some(i)) {
            continue;
        }
        if v.body.intersects_segment(a, b) {
            count += 1;
            loss += v.penetration_loss_db;
        }
    }
    (count, loss)
}

struct Candidate {
    panel: Panel,
    loss_db: f64,
    velocity: Vec3,
    owner: Option<usize>,
    tag: Reflector,
}

fn direction(u: Vec3) -> (f64, f64) {
    (u.azimuth_deg(), u.elevation_deg())
}

/// Direct path plus every first-order specular reflection whose legs are
/// unobstructed.
pub fn trace_paths(snap: &SceneSnapshot, cfg: &ChannelConfig, tx: &Endpoint, rx: &Endpoint) -> Result<PathSet> {
    cfg.validate()?;
    let f = cfg.frequency_hz;
    let d = rx.position - tx.position;
    let u = d.normalized().ok_or(Error::DegenerateGeometry("coincident TX and RX"))?;
    let len = d.norm();
    let mut paths = Vec::new();

    let (count, pen) = blockers(snap, tx.position, rx.position, [tx.vehicle, rx.vehicle, None]);
    let (aod_az, aod_el) = direction(u);
    let (aoa_az, aoa_el) = direction(-u);
    paths.push(Path {
        kind: if count > 0 { PathKind::BlockedLos } else { PathKind::Los },
        length_m: len,
        delay_s: len / SPEED_OF_LIGHT,
        gain_db: -free_space_path_loss(len, f)? - pen,
        aod_az_deg: aod_az,
        aod_el_deg: aod_el,
        aoa_az_deg: aoa_az,
        aoa_el_deg: aoa_el,
        doppler_hz: path_doppler(u, u, tx.velocity, rx.velocity, f),
        blockers: count,
        reflector: None,
    });

    let mut candidates = Vec::new();
    for (i, (panel, loss)) in snap.panels.iter().enumerate() {
        candidates.push(Candidate {
            panel: *panel,
            loss_db: *loss,
            velocity: Vec3::ZERO,
            owner: None,
            tag: Reflector::Panel(i),
        });
    }
    for (i, v) in snap.vehicles.iter().enumerate() {
        if !v.reflective || Some(i) == tx.vehicle || Some(i) == rx.vehicle {
            continue;
        }
        for (k, face) in v.body.faces().into_iter().enumerate() {
            candidates.push(Candidate {
                panel: face,
                loss_db: v.reflection_loss_db,
                velocity: v.pose.velocity,
                owner: Some(i),
                tag: Reflector::Vehicle(i, k as u8),
            });
        }
    }

    for c in &candidates {
        let Some(q) = c.panel.reflection_point(tx.position, rx.position) else {
            continue;
        };
        let skip = [tx.vehicle, rx.vehicle, c.owner];
        let (b1, _) = blockers(snap, tx.position, q, skip);
        let (b2, _) = blockers(snap, q, rx.position, skip);
        if b1 + b2 > 0 {
            continue;
        }
        let l1 = q - tx.position;
        let l2 = rx.position - q;
        let (Some(u1), Some(u2)) = (l1.normalized(), l2.normalized()) else {
            continue;
        };
        let total = l1.norm() + l2.norm();
        // a reflector moving along its normal drags the image point
        let n = c.panel.normal;
        let image_rate = rx.velocity - n * (2.0 * n.dot(rx.velocity - c.velocity));
        let doppler = f / SPEED_OF_LIGHT * (tx.velocity.dot(u1) - image_rate.dot(u1));
        let (aod_az, aod_el) = direction(u1);
        let (aoa_az, aoa_el) = direction(-u2);
        paths.push(Path {
            kind: PathKind::Reflected,
            length_m: total,
            delay_s: total / SPEED_OF_LIGHT,
            gain_db: -free_space_path_loss(total, f)? - c.loss_db,
            aod_az_deg: aod_az,
            aod_el_deg: aod_el,
            aoa_az_deg: aoa_az,
            aoa_el_deg: aoa_el,
            doppler_hz: doppler,
            blockers: 0,
            reflector: Some(c.tag),
        });
    }

    Ok(PathSet {
        t_s: snap.t_s,
        tx_array_id: tx.array_id,
        rx_array_id: rx.array_id,
        paths,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CirConfig {
    pub bandwidth_hz: f64,
    pub taps: usize,
    pub frequency_hz: f64,
    /// Half-length of the windowed-sinc pulse, taps.
    pub pulse_half_width: usize,
}

impl Default for CirConfig {
    fn default() -> Self {
        Self {
            bandwidth_hz: SAMPLE_RATE_HZ,
            taps: 2048,
            frequency_hz: CARRIER_HZ,
            pulse_half_width: 32,
        }
    }
}

/// Tapped delay line on a `1/bandwidth` grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Cir {
    pub taps: Vec<Complex>,
    /// Indices of paths whose delay falls outside the window.
    pub dropped: Vec<usize>,
}

/// Hann-windowed sinc sampled at `k - x`, normalized to unit energy so a
/// path's total tap power equals its power regardless of sub-tap delay.
pub fn pulse_taps(x: f64, half_width: usize) -> Vec<(i64, f64)> {
    let w = half_width as f64;
    let base = libm::floor(x) as i64;
    let mut out = Vec::with_capacity(2 * half_width + 2);
    for k in (base - half_width as i64)..=(base + half_width as i64 + 1) {
        let t = k as f64 - x;
        if t.abs() >= w {
            continue;
        }
        let sinc = if t.abs() < 1e-12 {
            1.0
        } else {
            let a = core::f64::consts::PI * t;
            libm::sin(a) / a
        };
        let hann = libm::cos(core::f64::consts::PI * t / (2.0 * w));
        let v = sinc * hann * hann;
        if v != 0.0 {
            out.push((k, v));
        }
    }
    let e: f64 = out.iter().map(|(_, v)| v * v).sum();
    let s = 1.0 / libm::sqrt(e);
    for (_, v) in &mut out {
        *v *= s;
    }
    out
}

/// Superpose paths into taps. Amplitude is `10^((gain + tx + rx)/20)`,
/// phase `-2 pi f_c tau + 2 pi f_d t` with `t` measured from the instant
/// the geometry was frozen. Pulse tails wrap circularly, matching periodic
/// sounding.
pub fn synthesize_cir(paths: &[Path], tx_gain_db: &[f64], rx_gain_db: &[f64], t: f64, cfg: &CirConfig) -> Result<Cir> {
    if tx_gain_db.len() != paths.len() || rx_gain_db.len() != paths.len() {
        return Err(Error::LengthMismatch {
            left: paths.len(),
            right: tx_gain_db.len().min(rx_gain_db.len()),
        });
    }
    let n = cfg.taps;
    let mut taps = alloc::vec![Complex::new(0.0, 0.0); n];
    let mut dropped = Vec::new();
    let two_pi = 2.0 * core::f64::consts::PI;
    for (i, p) in paths.iter().enumerate() {
        let x = p.delay_s * cfg.bandwidth_hz;
        if !(x >= 0.0 && x < n as f64) {
            dropped.push(i);
            continue;
        }
        let amp = libm::pow(10.0, (p.gain_db + tx_gain_db[i] + rx_gain_db[i]) / 20.0);
        // carrier phase reduced in cycles first to keep precision
        let cycles = p.delay_s * cfg.frequency_hz;
        let carrier = -(cycles - libm::floor(cycles));
        let dop = p.doppler_hz * t;
        let phase = two_pi * (carrier + dop - libm::floor(dop));
        let a = Complex::from_polar(amp, phase);
        for (k, v) in pulse_taps(x, cfg.pulse_half_width) {
            let idx = k.rem_euclid(n as i64) as usize;
            taps[idx] += a * v;
        }
    }
    Ok(Cir { taps, dropped })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::OrientedBox;
    use crate::scenario::{Pose, VehicleState};
    use proptest::prelude::*;

    fn fspl_oracle(d: f64, f: f64) -> f64 {
        20.0 * (4.0 * core::f64::consts::PI * d * f / 2.998e8).log10()
    }

    fn endpoint(id: usize, p: Vec3, v: Vec3) -> Endpoint {
        Endpoint {
            array_id: id,
            position: p,
            velocity: v,
            boresight_deg: 0.0,
            vehicle: None,
        }
    }

    fn empty(t: f64) -> SceneSnapshot {
        SceneSnapshot {
            t_s: t,
            vehicles: Vec::new(),
            panels: Vec::new(),
            tx_vehicle: 0,
            rx_vehicle: 1,
        }
    }

    fn blocker(center: Vec3, heading: f64, reflective: bool) -> VehicleState {
        VehicleState {
            pose: Pose::stationary(center, heading),
            body: OrientedBox {
                center,
                heading_deg: heading,
                length: 4.0,
                width: 2.0,
                height: 1.5,
            },
            reflective,
            reflection_loss_db: 6.0,
            penetration_loss_db: 30.0,
        }
    }

    #[test]
    fn fspl_values() {
        let a = free_space_path_loss(100.0, 28e9).unwrap();
        assert!((a - fspl_oracle(100.0, 28e9)).abs() < 1e-12);
        assert!((a - 101.4).abs() < 0.05);
        let b = free_space_path_loss(250.0, 28e9).unwrap();
        assert!((b - fspl_oracle(250.0, 28e9)).abs() < 1e-12);
        // 109.35 dB; quoted to one decimal as 109.4 in link-budget tables
        assert!((b - 109.4).abs() < 0.06);
        let c = free_space_path_loss(200.0, 28e9).unwrap();
        assert!((c - a - 20.0 * 2f64.log10()).abs() < 1e-12);
        assert!(free_space_path_loss(0.0, 28e9).is_err());
        assert!(free_space_path_loss(1.0, -1.0).is_err());
    }

    #[test]
    fn open_scene_single_los() {
        let snap = empty(0.0);
        let tx = endpoint(0, Vec3::new(0.0, 0.0, 0.381), Vec3::ZERO);
        let rx = endpoint(0, Vec3::new(100.0, 0.0, 0.381), Vec3::ZERO);
        let ps = trace_paths(&snap, &ChannelConfig::default(), &tx, &rx).unwrap();
        assert_eq!(ps.paths.len(), 1);
        let p = ps.paths[0];
        assert_eq!(p.kind, PathKind::Los);
        assert!((p.delay_s * 1e9 - 333.6).abs() < 0.05);
        assert!((p.delay_s - 100.0 / 2.998e8).abs() < 1e-18);
    }

    #[test]
    fn blocked_direct_path() {
        let mut snap = empty(0.0);
        let tx = endpoint(0, Vec3::new(0.0, 0.0, 0.381), Vec3::ZERO);
        let rx = endpoint(0, Vec3::new(50.0, 0.0, 0.381), Vec3::ZERO);
        let open = trace_paths(&snap, &ChannelConfig::default(), &tx, &rx).unwrap().paths[0];
        snap.vehicles.push(blocker(Vec3::new(25.0, 0.0, 0.0), 0.0, false));
        let ps = trace_paths(&snap, &ChannelConfig::default(), &tx, &rx).unwrap();
        let p = ps.direct().unwrap();
        assert_eq!(p.kind, PathKind::BlockedLos);
        assert!((open.gain_db - p.gain_db - 30.0).abs() < 1e-12);
        assert_eq!(ps.paths.len(), 1);
    }

    #[test]
    fn reflection_is_longer() {
        let mut snap = empty(0.0);
        snap.panels.push((
            Panel::two_sided(Vec3::new(-100.0, 5.0, 0.0), Vec3::new(100.0, 5.0, 0.0), 0.0, 3.0),
            6.0,
        ));
        let tx = endpoint(0, Vec3::new(0.0, 0.0, 0.381), Vec3::ZERO);
        let rx = endpoint(0, Vec3::new(30.0, 1.0, 0.381), Vec3::ZERO);
        let ps = trace_paths(&snap, &ChannelConfig::default(), &tx, &rx).unwrap();
        assert_eq!(ps.paths.len(), 2);
        let (d, r) = (ps.paths[0], ps.paths[1]);
        assert!(r.delay_s > d.delay_s);
        // image of rx through y = 5 is (30, 9)
        let want = (Vec3::new(30.0, 9.0, 0.381) - tx.position).norm();
        assert!((r.length_m - want).abs() < 1e-9);
        assert!((r.gain_db - (-fspl_oracle(want, 28e9) - 6.0)).abs() < 1e-9);
        assert!(r.aoa_az_deg > 0.0 && r.aoa_az_deg < 180.0);
    }

    #[test]
    fn blocked_leg_drops_reflection() {
        let mut snap = empty(0.0);
        snap.panels.push((
            Panel::two_sided(Vec3::new(-100.0, 5.0, 0.0), Vec3::new(100.0, 5.0, 0.0), 0.0, 3.0),
            6.0,
        ));
        snap.vehicles.push(blocker(Vec3::new(7.5, 3.5, 0.0), 0.0, false));
        let tx = endpoint(0, Vec3::new(0.0, 0.0, 0.381), Vec3::ZERO);
        let rx = endpoint(0, Vec3::new(30.0, 1.0, 0.381), Vec3::ZERO);
        let ps = trace_paths(&snap, &ChannelConfig::default(), &tx, &rx).unwrap();
        assert_eq!(ps.paths.len(), 1);
    }

    #[test]
    fn reflective_vehicle_faces() {
        let mut snap = empty(0.0);
        snap.vehicles.push(blocker(Vec3::new(15.0, 6.0, 0.0), 0.0, true));
        let tx = endpoint(0, Vec3::new(0.0, 0.0, 0.381), Vec3::ZERO);
        let rx = endpoint(0, Vec3::new(30.0, 0.0, 0.381), Vec3::ZERO);
        let ps = trace_paths(&snap, &ChannelConfig::default(), &tx, &rx).unwrap();
        let refl: Vec<_> = ps.paths.iter().filter(|p| p.kind == PathKind::Reflected).collect();
        assert_eq!(refl.len(), 1);
        assert_eq!(refl[0].reflector, Some(Reflector::Vehicle(0, 3)));
        let want = 2.0 * (15.0f64.powi(2) + 5.0f64.powi(2)).sqrt();
        assert!((refl[0].length_m - want).abs() < 1e-9);
    }

    #[test]
    fn unsupported_hooks_rejected() {
        let cfg = ChannelConfig { ground_bounce: true, ..Default::default() };
        assert!(cfg.validate().is_err());
        let cfg = ChannelConfig { max_reflection_order: 2, ..Default::default() };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn degenerate_pair() {
        let p = endpoint(0, Vec3::new(1.0, 1.0, 1.0), Vec3::ZERO);
        assert!(matches!(
            trace_paths(&empty(0.0), &ChannelConfig::default(), &p, &p),
            Err(Error::DegenerateGeometry(_))
        ));
    }

    #[test]
    fn doppler_examples() {
        let u = Vec3::new(1.0, 0.0, 0.0);
        let f = path_doppler(u, u, Vec3::ZERO, Vec3::new(-26.8, 0.0, 0.0), 28e9);
        assert!((f - 26.8 * 28e9 / 2.998e8).abs() < 1e-9);
        assert!(f > 0.0);
        assert_eq!(path_doppler(u, u, Vec3::new(3.0, 0.0, 0.0), Vec3::new(3.0, 0.0, 0.0), 28e9), 0.0);
        // perpendicular crossing at closest approach
        let g = path_doppler(u, u, Vec3::new(0.0, 10.0, 0.0), Vec3::ZERO, 28e9);
        assert_eq!(g, 0.0);
    }

    #[test]
    fn on_grid_tap_and_cancellation() {
        let p = Path {
            kind: PathKind::Los,
            length_m: 0.0,
            delay_s: 70e-9,
            gain_db: -60.0,
            aod_az_deg: 0.0,
            aod_el_deg: 0.0,
            aoa_az_deg: 0.0,
            aoa_el_deg: 0.0,
            doppler_hz: 0.0,
            blockers: 0,
            reflector: None,
        };
        let cir = synthesize_cir(&[p], &[0.0], &[0.0], 0.0, &CirConfig::default()).unwrap();
        let peak = cir.taps[70].norm_sqr();
        assert!((10.0 * peak.log10() + 60.0).abs() < 1e-9);
        for (k, t) in cir.taps.iter().enumerate() {
            if k != 70 {
                assert!(t.norm_sqr() < peak * 0.05);
            }
        }
        // same delay, half a carrier cycle apart
        let mut q = p;
        q.delay_s += 0.5 / 28e9;
        let taps = synthesize_cir(&[p, q], &[0.0; 2], &[0.0; 2], 0.0, &CirConfig::default()).unwrap().taps;
        assert!(taps[70].norm() < 1e-3 * peak.sqrt() * 2.0);
        let far = Path { delay_s: 3e-6, ..p };
        let cir = synthesize_cir(&[far], &[0.0], &[0.0], 0.0, &CirConfig::default()).unwrap();
        assert_eq!(cir.dropped, [0]);
        assert!((CirConfig::default().taps as f64 / SAMPLE_RATE_HZ - 2.048e-6).abs() < 1e-18);
    }

    proptest! {
        #[test]
        fn pulse_energy_is_unit(x in 10.0f64..2000.0) {
            let e: f64 = pulse_taps(x, 32).iter().map(|(_, v)| v * v).sum();
            prop_assert!((e - 1.0).abs() < 1e-12);
        }

        #[test]
        fn reciprocity(
            ax in -40.0f64..40.0, ay in -4.0f64..4.0,
            bx in -40.0f64..40.0, by in -4.0f64..4.0,
            wall in 5.0f64..12.0, cx in -20.0f64..20.0,
        ) {
            let mut snap = empty(0.0);
            snap.panels.push((Panel::two_sided(Vec3::new(-60.0, wall, 0.0), Vec3::new(60.0, wall, 0.0), 0.0, 3.0), 6.0));
            snap.vehicles.push(blocker(Vec3::new(cx, -wall, 0.0), 10.0, true));
            let a = endpoint(0, Vec3::new(ax, ay, 0.381), Vec3::ZERO);
            let b = endpoint(1, Vec3::new(bx, by, 0.381), Vec3::ZERO);
            prop_assume!((a.position - b.position).norm() > 0.5);
            let ab = trace_paths(&snap, &ChannelConfig::default(), &a, &b).unwrap();
            let ba = trace_paths(&snap, &ChannelConfig::default(), &b, &a).unwrap();
            prop_assert_eq!(ab.paths.len(), ba.paths.len());
            for (p, q) in ab.paths.iter().zip(&ba.paths) {
                prop_assert!((p.delay_s - q.delay_s).abs() < 1e-15);
                prop_assert!((p.gain_db - q.gain_db).abs() < 1e-9);
                prop_assert!(crate::geom::angular_offset_deg(p.aod_az_deg, p.aod_el_deg, q.aoa_az_deg, q.aoa_el_deg) < 1e-6);
            }
        }

        #[test]
        fn doppler_matches_range_rate(
            vx in -30.0f64..30.0, vy in -5.0f64..5.0, wx in -30.0f64..30.0,
            bx in 10.0f64..80.0, by in -6.0f64..6.0,
        ) {
            let mut snap = empty(0.0);
            snap.panels.push((Panel::two_sided(Vec3::new(-500.0, 9.0, 0.0), Vec3::new(500.0, 9.0, 0.0), 0.0, 3.0), 6.0));
            let v_tx = Vec3::new(vx, vy, 0.0);
            let v_rx = Vec3::new(wx, 0.0, 0.0);
            let p0 = Vec3::new(0.0, 0.0, 0.381);
            let q0 = Vec3::new(bx, by, 0.381);
            let dt = 1e-3;
            let at = |t: f64| trace_paths(
                &snap,
                &ChannelConfig::default(),
                &endpoint(0, p0 + v_tx * t, v_tx),
                &endpoint(0, q0 + v_rx * t, v_rx),
            ).unwrap();
            let (a, b, mid) = (at(-dt / 2.0), at(dt / 2.0), at(0.0));
            for ((pa, pb), pm) in a.paths.iter().zip(&b.paths).zip(&mid.paths) {
                let numeric = -(pb.length_m - pa.length_m) / dt * 28e9 / 2.998e8;
                prop_assert!((numeric - pm.doppler_hz).abs() < 1.0, "{} vs {}", numeric, pm.doppler_hz);
            }
        }

        #[test]
        fn blocker_never_helps(cx in 5.0f64..45.0, cy in -3.0f64..3.0, h in -90.0f64..90.0) {
            let mut snap = empty(0.0);
            let tx = endpoint(0, Vec3::new(0.0, 0.0, 0.381), Vec3::ZERO);
            let rx = endpoint(0, Vec3::new(50.0, 0.0, 0.381), Vec3::ZERO);
            let before = trace_paths(&snap, &ChannelConfig::default(), &tx, &rx).unwrap().paths[0].gain_db;
            snap.vehicles.push(blocker(Vec3::new(cx, cy, 0.0), h, false));
            let after = trace_paths(&snap, &ChannelConfig::default(), &tx, &rx).unwrap().paths[0].gain_db;
            prop_assert!(after <= before);
        }
    }
}
