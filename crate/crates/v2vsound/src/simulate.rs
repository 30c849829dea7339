//! Scenario to session: run the sounder over a scene and record what it
//! captures.

use std::collections::BTreeSet;
use std::path::Path;

use rayon::prelude::*;
use v2vsound_core::array::{build_rx_codebook, BeamCodebook};
use v2vsound_core::record::{
    encode_frame, frame_bytes, packetize, CaptureMode, Packet, Reassembler, SessionManifest, SweepParams,
    FORMAT_VERSION,
};
use v2vsound_core::scenario::{drive_stats, Trajectory};
use v2vsound_core::sweep::{build_schedule, Sounder, SweepSchedule};
use v2vsound_core::SAMPLE_RATE_HZ;

use crate::config::Scenario;
use crate::error::{Error, Result};
use crate::session::{self, FrameSink};

/// Payload bytes per emulated datagram, sized for 9000 byte jumbo frames.
pub const DEFAULT_PAYLOAD_BYTES: usize = 8192;

#[derive(Debug, Clone, PartialEq)]
pub struct SimulateOptions {
    pub seed: u64,
    pub duration_s: f64,
    pub repetition_hz: Option<f64>,
    pub capture_mode: Option<CaptureMode>,
    /// Frame ids whose first datagram is dropped in transit.
    pub drop_frames: BTreeSet<u32>,
    pub payload_bytes: usize,
}

impl Default for SimulateOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            duration_s: 1.0,
            repetition_hz: None,
            capture_mode: None,
            drop_frames: BTreeSet::new(),
            payload_bytes: DEFAULT_PAYLOAD_BYTES,
        }
    }
}

/// Session id derived from the seed so reruns are byte-identical.
pub fn session_id(seed: u64) -> u32 {
    (seed ^ (seed >> 32)) as u32 ^ 0x5632_5653
}

/// The schedule and codebook a scenario sweeps with under `opts`.
pub fn plan(scenario: &Scenario, opts: &SimulateOptions) -> Result<(SweepSchedule, BeamCodebook)> {
    let mut cfg = scenario.sweep;
    if let Some(r) = opts.repetition_hz {
        cfg.repetition_hz = r;
    }
    if let Some(m) = opts.capture_mode {
        cfg.capture_mode = m;
    }
    let cb = build_rx_codebook(&scenario.sounder.rx_array);
    let books = vec![cb.clone(); 4];
    let schedule = build_schedule(&books, &cfg, scenario.sounder.zc_length, scenario.scene.epoch)?;
    Ok((schedule, cb))
}

/// Simulate into `out`, creating the directory. Returns the manifest
/// written alongside the frames.
pub fn simulate(scenario: &Scenario, opts: &SimulateOptions, out: &Path) -> Result<SessionManifest> {
    if !(opts.duration_s >= 0.0 && opts.duration_s.is_finite()) {
        return Err(Error::Usage(format!("duration must be non-negative, got {}", opts.duration_s)));
    }
    let (schedule, cb) = plan(scenario, opts)?;
    let sounder = Sounder::new(&scenario.scene, cb, scenario.sounder.clone())?;
    let sweeps = schedule.sweeps_in(opts.duration_s);
    let per_sweep = schedule.frames_per_sweep();
    let total = sweeps
        .checked_mul(per_sweep)
        .filter(|&t| t <= u32::MAX as usize)
        .ok_or_else(|| Error::Usage("session too long for 32-bit frame ids".into()))?;
    if sweeps > 0 {
        // fail before writing anything if the scene runs out
        let t0 = schedule.sweep_start(0).seconds_since(&scenario.scene.epoch);
        let t1 = schedule.sweep_start(sweeps - 1).seconds_since(&scenario.scene.epoch) + schedule.span_ns() as f64 * 1e-9;
        scenario.scene.covers(t0, t1)?;
    }

    session::create_dir(out)?;
    let sid = session_id(opts.seed);
    let frames_path = out.join(session::FRAMES_FILE);
    let truth_path = out.join(session::TRUTH_FILE);
    let mut sink = FrameSink::create(&frames_path)?;
    let truth_err = session::csv_error(&truth_path);
    let mut truth = session::csv_writer(&truth_path)?;
    truth.write_record(session::TRUTH_HEADER).map_err(&truth_err)?;
    let mut lost = Vec::new();

    for m in 0..sweeps {
        let first_id = (m * per_sweep) as u32;
        let frames = execute_sweep_parallel(&sounder, &schedule, m, opts.seed)?;
        let packets: Vec<Vec<Packet>> = frames
            .par_iter()
            .enumerate()
            .map(|(i, f)| {
                let block = encode_frame(&f.frame)?;
                let id = first_id + i as u32;
                let mut p = packetize(&block, sid, id, opts.payload_bytes)?;
                if opts.drop_frames.contains(&id) {
                    p.remove(0);
                }
                Ok(p)
            })
            .collect::<Result<_>>()?;
        let mut rx = Reassembler::new(sid);
        for p in packets.into_iter().flatten() {
            // through the wire format and back
            rx.push(Packet::from_bytes(&p.to_bytes())?);
        }
        let done = rx.finish(Some(first_id..first_id + per_sweep as u32));
        lost.extend(done.lost.iter().copied());
        for (id, block) in &done.frames {
            sink.write_block(block)?;
            let f = &frames[(id - first_id) as usize];
            session::write_truth_rows(&mut truth, *id, m, &f.frame, &f.truth).map_err(&truth_err)?;
        }
    }
    truth.flush().map_err(|e| Error::io(&truth_path, e))?;
    let written = sink.frames;
    let bytes = sink.bytes;
    sink.finish()?;
    debug_assert_eq!(written + lost.len(), total);

    std::fs::write(out.join(session::SCENARIO_FILE), &scenario.source)
        .map_err(|e| Error::io(out.join(session::SCENARIO_FILE), e))?;

    let scene = &scenario.scene;
    if let (Trajectory::Track(tx), Trajectory::Track(rx)) = (
        &scene.vehicles[scene.tx_vehicle].trajectory,
        &scene.vehicles[scene.rx_vehicle].trajectory,
    ) {
        session::write_drive_stats(&out.join(session::DRIVE_STATS_FILE), &drive_stats(tx, rx)?)?;
    }

    let cfg = &scenario.sounder;
    let manifest = SessionManifest {
        format_version: FORMAT_VERSION,
        session_id: sid,
        sweep: SweepParams {
            dwell_ns: schedule.dwell_ns,
            guard_ns: schedule.guard_ns,
            slots_per_sweep: schedule.slots.len(),
            rx_channels: schedule.rx_channels,
            repetition_hz: schedule.repetition_hz,
            capture_mode: schedule.capture_mode,
            samples_per_frame: schedule.capture_samples,
            sample_rate_hz: SAMPLE_RATE_HZ,
            tx_shifts: cfg.tx_shifts.to_vec(),
            zc_root: cfg.zc_root,
            zc_length: cfg.zc_length,
        },
        tx_array: cfg.tx_array,
        rx_array: cfg.rx_array,
        scenario_name: scene.name.clone(),
        scenario_hash: scenario.scene_hash(),
        detection_threshold_db: scenario.processing.detection_threshold_db,
        seed: opts.seed,
        epoch: scene.epoch,
        duration_s: opts.duration_s,
        sweeps,
        frame_count: written,
        frame_bytes: frame_bytes(schedule.capture_samples),
        byte_count: bytes,
        lost_frames: lost,
    };
    manifest.check_accounting()?;
    session::write_json(&out.join(session::MANIFEST_FILE), &manifest)?;
    Ok(manifest)
}

/// [`execute_sweep`] with the frames simulated in parallel; same output.
pub fn execute_sweep_parallel(
    sounder: &Sounder<'_>,
    schedule: &SweepSchedule,
    m: usize,
    seed: u64,
) -> Result<Vec<v2vsound_core::sweep::SimulatedFrame>> {
    let t0 = schedule.sweep_start(m).seconds_since(&sounder.scene().epoch);
    sounder
        .scene()
        .covers(t0, t0 + schedule.span_ns() as f64 * 1e-9)
        .map_err(|_| v2vsound_core::Error::SceneCoverage(t0))?;
    let channels = schedule.rx_channels;
    (0..schedule.frames_per_sweep())
        .into_par_iter()
        .map(|i| Ok(sounder.simulate_frame(schedule, m, i / channels, i % channels, seed)?))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets::load_preset;
    use v2vsound_core::sweep::execute_sweep;

    #[test]
    fn parallel_sweep_matches_core() {
        let s = load_preset("los-100m").unwrap();
        let (schedule, cb) = plan(&s, &SimulateOptions::default()).unwrap();
        let sounder = Sounder::new(&s.scene, cb, s.sounder.clone()).unwrap();
        let a = execute_sweep(&sounder, &schedule, 3, 11).unwrap();
        let b = execute_sweep_parallel(&sounder, &schedule, 3, 11).unwrap();
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.frame, y.frame);
        }
    }
}
