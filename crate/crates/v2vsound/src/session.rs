//! Session directories.
//!
//! A session holds everything one simulated recording produced:
//!
//! | file | contents |
//! |---|---|
//! | `manifest.json` | [`SessionManifest`] |
//! | `frames.rch` | encoded capture frames back to back |
//! | `truth_paths.csv` | propagation truth behind every frame |
//! | `scenario.toml` | the scenario text the session was simulated from |
//! | `drive_stats.csv` | separation and speeds, when both sounders move |

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use v2vsound_core::record::{decode_frame, CaptureFrame, SessionManifest};
use v2vsound_core::scenario::DriveStat;
use v2vsound_core::sweep::FrameTruth;

use crate::error::{Error, Result};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const FRAMES_FILE: &str = "frames.rch";
pub const TRUTH_FILE: &str = "truth_paths.csv";
pub const SCENARIO_FILE: &str = "scenario.toml";
pub const DRIVE_STATS_FILE: &str = "drive_stats.csv";

pub const TRUTH_HEADER: [&str; 16] = [
    "frame",
    "sweep",
    "slot",
    "rx_array",
    "beam",
    "tx",
    "path",
    "kind",
    "reflector",
    "delay_ns",
    "power_dbm",
    "aod_az_deg",
    "aod_el_deg",
    "aoa_az_deg",
    "aoa_el_deg",
    "doppler_hz",
];

pub const DRIVE_STATS_HEADER: [&str; 4] = ["t_s", "separation_m", "rx_speed_mps", "relative_speed_mps"];

pub fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })?;
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })
}

pub fn csv_writer(path: &Path) -> Result<csv::Writer<BufWriter<File>>> {
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::Writer::from_writer(BufWriter::new(f)))
}

pub fn csv_error(path: &Path) -> impl Fn(csv::Error) -> Error + '_ {
    move |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    }
}

/// Fixed-precision float formatting so CSVs are stable and diffable.
pub fn fmt_f(v: f64, decimals: usize) -> String {
    if v.is_finite() {
        format!("{v:.decimals$}")
    } else if v > 0.0 {
        "inf".into()
    } else if v < 0.0 {
        "-inf".into()
    } else {
        "nan".into()
    }
}

/// Streaming writer for `frames.rch`.
pub struct FrameSink {
    path: PathBuf,
    out: BufWriter<File>,
    pub frames: usize,
    pub bytes: u64,
}

impl FrameSink {
    pub fn create(path: &Path) -> Result<Self> {
        let f = File::create(path).map_err(|e| Error::io(path, e))?;
        Ok(Self {
            path: path.to_path_buf(),
            out: BufWriter::new(f),
            frames: 0,
            bytes: 0,
        })
    }

    pub fn write_block(&mut self, block: &[u8]) -> Result<()> {
        self.out.write_all(block).map_err(|e| Error::io(&self.path, e))?;
        self.frames += 1;
        self.bytes += block.len() as u64;
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        self.out.flush().map_err(|e| Error::io(&self.path, e))
    }
}

pub fn write_truth_rows<W: Write>(
    w: &mut csv::Writer<W>,
    frame_id: u32,
    sweep: usize,
    frame: &CaptureFrame,
    truth: &[FrameTruth],
) -> std::result::Result<(), csv::Error> {
    for t in truth {
        for (i, p) in t.paths.paths.iter().enumerate() {
            let reflector = match p.reflector {
                None => String::new(),
                Some(v2vsound_core::channel::Reflector::Panel(k)) => format!("panel:{k}"),
                Some(v2vsound_core::channel::Reflector::Vehicle(v, face)) => format!("vehicle:{v}:{face}"),
            };
            let kind = match p.kind {
                v2vsound_core::channel::PathKind::Los => "los",
                v2vsound_core::channel::PathKind::BlockedLos => "blocked-los",
                v2vsound_core::channel::PathKind::Reflected => "reflected",
            };
            w.write_record([
                frame_id.to_string(),
                sweep.to_string(),
                frame.slot_index.to_string(),
                frame.rx_channel.to_string(),
                frame.beam_index.to_string(),
                t.tx_id.to_string(),
                i.to_string(),
                kind.to_string(),
                reflector,
                fmt_f(p.delay_s * 1e9, 6),
                fmt_f(t.path_power_dbm(i), 4),
                fmt_f(p.aod_az_deg, 4),
                fmt_f(p.aod_el_deg, 4),
                fmt_f(p.aoa_az_deg, 4),
                fmt_f(p.aoa_el_deg, 4),
                fmt_f(p.doppler_hz, 4),
            ])?;
        }
    }
    Ok(())
}

pub fn write_drive_stats(path: &Path, stats: &[DriveStat]) -> Result<()> {
    let err = csv_error(path);
    let mut w = csv_writer(path)?;
    w.write_record(DRIVE_STATS_HEADER).map_err(&err)?;
    for s in stats {
        w.write_record([
            fmt_f(s.t_s, 6),
            fmt_f(s.separation_m, 4),
            fmt_f(s.rx_speed_mps, 4),
            fmt_f(s.relative_speed_mps, 4),
        ])
        .map_err(&err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Frame file contents: decoded frames in file order, plus the index of
/// every fixed-size block that failed to decode.
#[derive(Debug, Default)]
pub struct FrameScan {
    pub frames: Vec<CaptureFrame>,
    pub corrupt_blocks: Vec<usize>,
    /// Bytes past the last whole block.
    pub trailing_bytes: usize,
}

pub fn read_manifest(dir: &Path) -> Result<SessionManifest> {
    read_json(&dir.join(MANIFEST_FILE))
}

/// Read every frame; a block that fails to decode is reported and skipped
/// so the rest of the session stays usable.
pub fn read_frames(dir: &Path, manifest: &SessionManifest) -> Result<FrameScan> {
    let path = dir.join(FRAMES_FILE);
    let mut bytes = Vec::new();
    File::open(&path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| Error::io(&path, e))?;
    let size = manifest.frame_bytes;
    let mut scan = FrameScan::default();
    if size == 0 {
        scan.trailing_bytes = bytes.len();
        return Ok(scan);
    }
    let mut chunks = bytes.chunks_exact(size);
    for (i, block) in chunks.by_ref().enumerate() {
        match decode_frame(block) {
            Ok((frame, used)) if used == size => scan.frames.push(frame),
            _ => scan.corrupt_blocks.push(i),
        }
    }
    scan.trailing_bytes = chunks.remainder().len();
    Ok(scan)
}
