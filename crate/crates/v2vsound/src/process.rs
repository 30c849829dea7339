//! Session to reports: CIR estimation over every recorded frame and the
//! CSV tables built from it.
//!
//! | file | columns |
//! |---|---|
//! | `beam_rss.csv` | gps_time, tx, rx_array, az, el, rss_dbm |
//! | `beam_rss_el0.csv` | same, elevation-0 row only |
//! | `stacked_cir.csv` | tx, rx_array, tap_ns, power_db_rel |
//! | `delay_spread.csv` | gps_time, sweep, tx, rx_array, beam, rms_delay_spread_ns |
//! | `doppler.csv` | tx, rx_array, doppler_hz, residual_rad, points |
//! | `report.json` | [`ProcessReport`] |
//!
//! Beam angles are local to the receiving array.

use std::collections::BTreeMap;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use v2vsound_core::array::{build_rx_codebook, BeamCodebook};
use v2vsound_core::record::{throughput_report, CaptureFrame, CaptureMode, SessionManifest, ThroughputReport, FORMAT_VERSION};
use v2vsound_core::rxproc::{
    delay_spread, estimate_cir, estimate_doppler, first_arrival, normalize_and_stack, rss_per_beam, BeamRssTable,
    CirEstimate, DopplerEstimate, ProcessingConfig, StackedCir,
};
use v2vsound_core::waveform::generate_zc;

use crate::error::{Error, Result};
use crate::session::{self, fmt_f};

pub const BEAM_RSS_FILE: &str = "beam_rss.csv";
pub const BEAM_RSS_EL0_FILE: &str = "beam_rss_el0.csv";
pub const STACKED_CIR_FILE: &str = "stacked_cir.csv";
pub const DELAY_SPREAD_FILE: &str = "delay_spread.csv";
pub const DOPPLER_FILE: &str = "doppler.csv";
pub const REPORT_FILE: &str = "report.json";

pub const BEAM_RSS_HEADER: [&str; 6] = ["gps_time", "tx", "rx_array", "az", "el", "rss_dbm"];
pub const STACKED_CIR_HEADER: [&str; 4] = ["tx", "rx_array", "tap_ns", "power_db_rel"];
pub const DELAY_SPREAD_HEADER: [&str; 6] = ["gps_time", "sweep", "tx", "rx_array", "beam", "rms_delay_spread_ns"];
pub const DOPPLER_HEADER: [&str; 5] = ["tx", "rx_array", "doppler_hz", "residual_rad", "points"];

/// Taps this far below the peak still count as the first arrival.
pub const FIRST_ARRIVAL_WINDOW_DB: f64 = 25.0;

/// Beams within this much of the best beam of a sweep feed the Doppler fit.
pub const DOPPLER_BEAM_WINDOW_DB: f64 = 30.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProcessOptions {
    /// Overrides the threshold recorded in the manifest.
    pub threshold_db: Option<f64>,
    /// Sweep whose best beams make up the stacked CIRs.
    pub stack_sweep: usize,
    pub delay_spread_threshold_db: f64,
}

impl Default for ProcessOptions {
    fn default() -> Self {
        Self {
            threshold_db: None,
            stack_sweep: 0,
            delay_spread_threshold_db: 20.0,
        }
    }
}

/// One estimate along with the sweep it was captured in.
#[derive(Debug, Clone)]
pub struct SweepEstimate {
    pub sweep: usize,
    pub est: CirEstimate,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelaySpreadRow {
    pub sweep: usize,
    pub tx: usize,
    pub rx_array: usize,
    pub beam: usize,
    pub gps_time: v2vsound_core::time::GpsTime,
    pub rms_ns: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DopplerRow {
    pub tx: usize,
    pub rx_array: usize,
    #[serde(flatten)]
    pub estimate: DopplerEstimate,
}

#[derive(Debug, Clone)]
pub struct Analysis {
    pub estimates: Vec<SweepEstimate>,
    pub rss: BeamRssTable,
    pub rss_el0: BeamRssTable,
    pub stacked: Vec<StackedCir>,
    pub delay_spreads: Vec<DelaySpreadRow>,
    pub doppler: Vec<DopplerRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StackedBeam {
    pub tx: usize,
    pub rx_array: usize,
    pub beam: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProcessReport {
    pub session_id: u32,
    pub scenario_name: String,
    pub detection_threshold_db: f64,
    pub frames_expected: usize,
    pub frames_processed: usize,
    pub lost_count: usize,
    pub lost_frames: Vec<u32>,
    /// Block indices in the frame file that failed to decode.
    pub corrupt_blocks: Vec<usize>,
    pub trailing_bytes: usize,
    pub estimates: usize,
    pub detected_estimates: usize,
    pub stack_sweep: usize,
    pub stacked_beams: Vec<StackedBeam>,
    /// Rates over the recorded span; absent for an empty session.
    pub throughput: Option<ThroughputReport>,
    pub outputs: Vec<String>,
}

/// Sweep a frame belongs to, recovered from its timestamp.
pub fn sweep_of(manifest: &SessionManifest, frame: &CaptureFrame) -> usize {
    let s = &manifest.sweep;
    let guard = match s.capture_mode {
        CaptureMode::Cir => s.guard_ns,
        CaptureMode::FullDwell => 0,
    } as f64;
    let into = (frame.timestamp.total_nanos() as i128 - manifest.epoch.total_nanos() as i128) as f64
        - frame.slot_index as f64 * s.dwell_ns as f64
        - guard;
    (into * s.repetition_hz / 1e9).round().max(0.0) as usize
}

fn empty_table(t: Result<BeamRssTable>) -> Result<BeamRssTable> {
    match t {
        Err(Error::Core(v2vsound_core::Error::EmptyInput)) => Ok(BeamRssTable { entries: Vec::new() }),
        other => other,
    }
}

/// Estimate every frame and build the report tables.
pub fn analyze(manifest: &SessionManifest, frames: &[CaptureFrame], opts: &ProcessOptions) -> Result<Analysis> {
    let s = &manifest.sweep;
    let reference = generate_zc(s.zc_root, s.zc_length)?;
    let cfg = ProcessingConfig {
        detection_threshold_db: opts.threshold_db.unwrap_or(manifest.detection_threshold_db),
    };
    let codebook = build_rx_codebook(&manifest.rx_array);
    let estimates: Vec<SweepEstimate> = frames
        .par_iter()
        .map(|f| {
            let sweep = sweep_of(manifest, f);
            Ok(estimate_cir(f, &reference, &s.tx_shifts, &cfg)?
                .into_iter()
                .map(|est| SweepEstimate { sweep, est })
                .collect::<Vec<_>>())
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    let plain: Vec<CirEstimate> = estimates.iter().map(|e| e.est.clone()).collect();
    let rss = empty_table(rss_per_beam(&plain, &codebook, None).map_err(Error::from))?;
    let rss_el0 = empty_table(rss_per_beam(&plain, &codebook, Some(0.0)).map_err(Error::from))?;
    let stacked = stack(&estimates, &codebook, opts.stack_sweep)?;
    let symbol_s = reference.symbol_period_ns() * 1e-9;
    let delay_spreads = estimates
        .iter()
        .filter(|e| e.est.detected)
        .filter_map(|e| {
            let rms = delay_spread(&e.est, opts.delay_spread_threshold_db, symbol_s).ok()?;
            Some(DelaySpreadRow {
                sweep: e.sweep,
                tx: e.est.tx_id,
                rx_array: e.est.rx_array_id,
                beam: e.est.beam_index,
                gps_time: e.est.timestamp,
                rms_ns: rms * 1e9,
            })
        })
        .collect();
    let doppler = doppler(&estimates);
    Ok(Analysis {
        estimates,
        rss,
        rss_el0,
        stacked,
        delay_spreads,
        doppler,
    })
}

/// Best-RSS beam of every (tx, rx array) pair in one sweep, normalized to
/// the common peak.
fn stack(estimates: &[SweepEstimate], codebook: &BeamCodebook, sweep: usize) -> Result<Vec<StackedCir>> {
    let mut best: BTreeMap<(usize, usize), (f64, &CirEstimate)> = BTreeMap::new();
    for e in estimates.iter().filter(|e| e.sweep == sweep) {
        if codebook.get(e.est.beam_index).is_none() {
            return Err(v2vsound_core::Error::CodebookMismatch.into());
        }
        let p = v2vsound_core::rxproc::rss_dbm(&e.est);
        let key = (e.est.tx_id, e.est.rx_array_id);
        if best.get(&key).map_or(true, |b| p > b.0) {
            best.insert(key, (p, &e.est));
        }
    }
    if best.is_empty() {
        return Ok(Vec::new());
    }
    let sel: Vec<&CirEstimate> = best.values().map(|b| b.1).collect();
    match normalize_and_stack(&sel) {
        Err(v2vsound_core::Error::AllZero) => Ok(Vec::new()),
        other => Ok(other?),
    }
}

/// First-arrival phase against capture time for each pair, over the
/// strongest beams of every sweep.
fn doppler(estimates: &[SweepEstimate]) -> Vec<DopplerRow> {
    let mut best: BTreeMap<(usize, usize, usize), f64> = BTreeMap::new();
    for e in estimates.iter().filter(|e| e.est.detected) {
        let key = (e.est.tx_id, e.est.rx_array_id, e.sweep);
        let b = best.entry(key).or_insert(f64::NEG_INFINITY);
        *b = b.max(e.est.peak_power_dbm);
    }
    let mut series: BTreeMap<(usize, usize), Vec<(f64, v2vsound_core::Complex)>> = BTreeMap::new();
    let t0 = estimates.first().map(|e| e.est.timestamp);
    for e in estimates.iter().filter(|e| e.est.detected) {
        let top = best[&(e.est.tx_id, e.est.rx_array_id, e.sweep)];
        if e.est.peak_power_dbm < top - DOPPLER_BEAM_WINDOW_DB {
            continue;
        }
        if let (Some(k), Some(t0)) = (first_arrival(&e.est, FIRST_ARRIVAL_WINDOW_DB), t0) {
            series
                .entry((e.est.tx_id, e.est.rx_array_id))
                .or_default()
                .push((e.est.timestamp.seconds_since(&t0), e.est.taps[k]));
        }
    }
    series
        .into_iter()
        .filter_map(|((tx, rx_array), mut pts)| {
            pts.sort_by(|a, b| a.0.total_cmp(&b.0));
            let estimate = estimate_doppler(&pts).ok()?;
            Some(DopplerRow { tx, rx_array, estimate })
        })
        .collect()
}

fn write_rss(path: &Path, table: &BeamRssTable) -> Result<()> {
    let err = session::csv_error(path);
    let mut w = session::csv_writer(path)?;
    w.write_record(BEAM_RSS_HEADER).map_err(&err)?;
    for e in &table.entries {
        w.write_record([
            e.timestamp.to_string(),
            e.tx_id.to_string(),
            e.rx_array_id.to_string(),
            fmt_f(e.azimuth_deg, 4),
            fmt_f(e.elevation_deg, 4),
            fmt_f(e.rss_dbm, 4),
        ])
        .map_err(&err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn write_stacked(path: &Path, stacked: &[StackedCir], symbol_ns: f64) -> Result<()> {
    let err = session::csv_error(path);
    let mut w = session::csv_writer(path)?;
    w.write_record(STACKED_CIR_HEADER).map_err(&err)?;
    for s in stacked {
        for (k, p) in s.power_db_rel.iter().enumerate() {
            w.write_record([
                s.tx_id.to_string(),
                s.rx_array_id.to_string(),
                fmt_f(k as f64 * symbol_ns, 3),
                fmt_f(*p, 4),
            ])
            .map_err(&err)?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn write_delay_spreads(path: &Path, rows: &[DelaySpreadRow]) -> Result<()> {
    let err = session::csv_error(path);
    let mut w = session::csv_writer(path)?;
    w.write_record(DELAY_SPREAD_HEADER).map_err(&err)?;
    for r in rows {
        w.write_record([
            r.gps_time.to_string(),
            r.sweep.to_string(),
            r.tx.to_string(),
            r.rx_array.to_string(),
            r.beam.to_string(),
            fmt_f(r.rms_ns, 4),
        ])
        .map_err(&err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn write_doppler(path: &Path, rows: &[DopplerRow]) -> Result<()> {
    let err = session::csv_error(path);
    let mut w = session::csv_writer(path)?;
    w.write_record(DOPPLER_HEADER).map_err(&err)?;
    for r in rows {
        w.write_record([
            r.tx.to_string(),
            r.rx_array.to_string(),
            fmt_f(r.estimate.doppler_hz, 4),
            fmt_f(r.estimate.residual_rad, 6),
            r.estimate.points.to_string(),
        ])
        .map_err(&err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Process the session in `session_dir`, writing reports into `out`.
pub fn process(session_dir: &Path, out: &Path, opts: &ProcessOptions) -> Result<ProcessReport> {
    let manifest = session::read_manifest(session_dir)?;
    if manifest.format_version != FORMAT_VERSION {
        return Err(Error::Validation(format!(
            "session format version {} is not supported (expected {FORMAT_VERSION})",
            manifest.format_version
        )));
    }
    let scan = session::read_frames(session_dir, &manifest)?;
    if opts.stack_sweep > 0 && opts.stack_sweep >= manifest.sweeps {
        return Err(Error::Usage(format!(
            "stack sweep {} out of range: session has {} sweeps",
            opts.stack_sweep, manifest.sweeps
        )));
    }
    let analysis = analyze(&manifest, &scan.frames, opts)?;

    session::create_dir(out)?;
    write_rss(&out.join(BEAM_RSS_FILE), &analysis.rss)?;
    write_rss(&out.join(BEAM_RSS_EL0_FILE), &analysis.rss_el0)?;
    let symbol_ns = 1e9 / manifest.sweep.sample_rate_hz;
    write_stacked(&out.join(STACKED_CIR_FILE), &analysis.stacked, symbol_ns)?;
    write_delay_spreads(&out.join(DELAY_SPREAD_FILE), &analysis.delay_spreads)?;
    write_doppler(&out.join(DOPPLER_FILE), &analysis.doppler)?;

    let throughput = if manifest.duration_s > 0.0 {
        Some(throughput_report(&manifest, manifest.duration_s)?)
    } else {
        None
    };
    let report = ProcessReport {
        session_id: manifest.session_id,
        scenario_name: manifest.scenario_name.clone(),
        detection_threshold_db: opts.threshold_db.unwrap_or(manifest.detection_threshold_db),
        frames_expected: manifest.sweeps * manifest.sweep.slots_per_sweep * manifest.sweep.rx_channels,
        frames_processed: scan.frames.len(),
        lost_count: manifest.lost_frames.len(),
        lost_frames: manifest.lost_frames.clone(),
        corrupt_blocks: scan.corrupt_blocks,
        trailing_bytes: scan.trailing_bytes,
        estimates: analysis.estimates.len(),
        detected_estimates: analysis.estimates.iter().filter(|e| e.est.detected).count(),
        stack_sweep: opts.stack_sweep,
        stacked_beams: analysis
            .stacked
            .iter()
            .map(|s| StackedBeam {
                tx: s.tx_id,
                rx_array: s.rx_array_id,
                beam: s.beam_index,
            })
            .collect(),
        throughput,
        outputs: [
            BEAM_RSS_FILE,
            BEAM_RSS_EL0_FILE,
            STACKED_CIR_FILE,
            DELAY_SPREAD_FILE,
            DOPPLER_FILE,
            REPORT_FILE,
        ]
        .map(String::from)
        .to_vec(),
    };
    session::write_json(&out.join(REPORT_FILE), &report)?;
    Ok(report)
}
