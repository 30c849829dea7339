//! Self-test: waveform CAZAC properties, link-budget closure, sweep
//! timing and the pinned byte layouts.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use v2vsound_core::array::build_rx_codebook;
use v2vsound_core::channel::free_space_path_loss;
use v2vsound_core::record::{encode_frame, packetize, CaptureFrame, Iq};
use v2vsound_core::rxproc::{estimate_cir, rss_dbm, ProcessingConfig};
use v2vsound_core::sweep::{build_schedule, Sounder, SweepConfig};
use v2vsound_core::time::GpsTime;
use v2vsound_core::waveform::{generate_zc, validate_cazac, DEFAULT_LENGTH};
use v2vsound_core::CARRIER_HZ;

use crate::error::{Error, Result};
use crate::presets::load_preset;

pub const FRAME_GOLDEN: &str = "frame_v1.rch";
pub const PACKETS_GOLDEN: &str = "packets_v1.bin";

const BUILTIN_FRAME: &[u8] = include_bytes!("../goldens/frame_v1.rch");
const BUILTIN_PACKETS: &[u8] = include_bytes!("../goldens/packets_v1.bin");

pub const DEFAULT_TOLERANCE: f64 = 1e-9;
pub const CAZAC_ROOTS: [usize; 4] = [1, 3, 5, 7];
/// Allowed link-budget closure error, dB.
pub const LINK_TOLERANCE_DB: f64 = 0.1;

pub const GOLDEN_SESSION_ID: u32 = 0xDEAD_BEEF;
pub const GOLDEN_FRAME_ID: u32 = 42;
pub const GOLDEN_PAYLOAD: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct ValidateOptions {
    pub tolerance: f64,
    /// Directory holding golden files in place of the built-in ones.
    pub goldens: Option<PathBuf>,
}

impl Default for ValidateOptions {
    fn default() -> Self {
        Self {
            tolerance: DEFAULT_TOLERANCE,
            goldens: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidateReport {
    pub tolerance: f64,
    pub checks: Vec<Check>,
    pub passed: bool,
}

impl ValidateReport {
    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

/// The frame pinned by [`FRAME_GOLDEN`].
pub fn golden_frame() -> CaptureFrame {
    let iq = [
        (0, 0),
        (1, -1),
        (32767, -32768),
        (-32768, 32767),
        (1234, -4321),
        (-7, 7),
        (256, -256),
        (1000, 2000),
    ];
    CaptureFrame {
        timestamp: GpsTime::new(1_234_567_890, 0x0123_4567_89AB_CDEF),
        rx_channel: 2,
        slot_index: 17,
        beam_index: 23,
        calibration_dbm_fs: -12.5,
        samples: iq.iter().map(|&(i, q)| Iq { i, q }).collect(),
    }
}

/// Datagrams pinned by [`PACKETS_GOLDEN`], back to back.
pub fn golden_packets() -> Result<Vec<u8>> {
    let block = encode_frame(&golden_frame())?;
    Ok(packetize(&block, GOLDEN_SESSION_ID, GOLDEN_FRAME_ID, GOLDEN_PAYLOAD)?
        .iter()
        .flat_map(|p| p.to_bytes())
        .collect())
}

fn check(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Check {
    Check {
        name: name.into(),
        passed,
        detail: detail.into(),
    }
}

fn cazac_checks(tolerance: f64) -> Result<Vec<Check>> {
    CAZAC_ROOTS
        .iter()
        .map(|&u| {
            let r = validate_cazac(&generate_zc(u, DEFAULT_LENGTH)?, tolerance);
            Ok(check(
                format!("cazac root {u}"),
                r.passed(),
                format!(
                    "modulus deviation {:.3e}, off-peak autocorrelation {:.3e} of N, tolerance {:.3e}",
                    r.max_modulus_deviation, r.max_offpeak_autocorr, tolerance
                ),
            ))
        })
        .collect()
}

/// Measured and expected boresight RSS, dBm, on the 100 m LOS preset
/// without noise.
pub fn link_closure() -> Result<(f64, f64)> {
    let mut s = load_preset("los-100m")?;
    s.sounder.add_noise = false;
    let cb = build_rx_codebook(&s.sounder.rx_array);
    let beam = cb
        .beams()
        .iter()
        .find(|b| b.azimuth_deg.abs() < 1e-9 && b.elevation_deg.abs() < 1e-9)
        .ok_or_else(|| Error::Validation("codebook has no boresight beam".into()))?
        .index;
    let schedule = build_schedule(&vec![cb.clone(); 4], &s.sweep, s.sounder.zc_length, s.scene.epoch)?;
    let sounder = Sounder::new(&s.scene, cb, s.sounder.clone())?;
    // transmitter 1 (rear right) faces receive array 0 (front left)
    let f = sounder.simulate_frame(&schedule, 0, beam, 0, 0)?;
    let reference = generate_zc(s.sounder.zc_root, s.sounder.zc_length)?;
    let est = estimate_cir(&f.frame, &reference, &s.sounder.tx_shifts, &ProcessingConfig::default())?;
    let measured = rss_dbm(&est[1]);
    let expected = s.sounder.eirp_dbm + s.sounder.rx_array.boresight_gain_db - free_space_path_loss(100.0, CARRIER_HZ)?;
    Ok((measured, expected))
}

fn schedule_check() -> Result<Check> {
    let cb = build_rx_codebook(&v2vsound_core::array::ArraySpec::rx_preset());
    let s = build_schedule(&vec![cb; 4], &SweepConfig::default(), DEFAULT_LENGTH, GpsTime::default())?;
    let ok = s.span_ns() == 1_160_000 && s.frames_per_sweep() == 116;
    Ok(check(
        "schedule timing",
        ok,
        format!("span {} ns, {} frames per sweep", s.span_ns(), s.frames_per_sweep()),
    ))
}

fn golden_check(name: &str, dir: Option<&Path>, builtin: &[u8], actual: &[u8]) -> Check {
    let loaded;
    let expected = match dir {
        Some(d) => match std::fs::read(d.join(name)) {
            Ok(b) => {
                loaded = b;
                &loaded[..]
            }
            Err(e) => return check(format!("golden {name}"), false, format!("golden {name}: {e}")),
        },
        None => builtin,
    };
    let detail = if expected == actual {
        return check(format!("golden {name}"), true, format!("{} bytes match", actual.len()));
    } else if expected.len() != actual.len() {
        format!("golden {name}: {} bytes pinned, {} encoded", expected.len(), actual.len())
    } else {
        let at = expected.iter().zip(actual).position(|(a, b)| a != b).unwrap_or(0);
        format!(
            "golden {name}: byte {at} differs (pinned {:#04x}, encoded {:#04x})",
            expected[at], actual[at]
        )
    };
    check(format!("golden {name}"), false, detail)
}

pub fn validate(opts: &ValidateOptions) -> Result<ValidateReport> {
    if !(opts.tolerance > 0.0 && opts.tolerance.is_finite()) {
        return Err(Error::Usage(format!("tolerance must be positive, got {}", opts.tolerance)));
    }
    let mut checks = cazac_checks(opts.tolerance)?;
    let (measured, expected) = link_closure()?;
    checks.push(check(
        "link closure 100 m",
        (measured - expected).abs() <= LINK_TOLERANCE_DB,
        format!("measured {measured:.3} dBm, expected {expected:.3} dBm"),
    ));
    checks.push(schedule_check()?);
    let dir = opts.goldens.as_deref();
    checks.push(golden_check(FRAME_GOLDEN, dir, BUILTIN_FRAME, &encode_frame(&golden_frame())?));
    checks.push(golden_check(PACKETS_GOLDEN, dir, BUILTIN_PACKETS, &golden_packets()?));
    let passed = checks.iter().all(|c| c.passed);
    Ok(ValidateReport {
        tolerance: opts.tolerance,
        checks,
        passed,
    })
}
