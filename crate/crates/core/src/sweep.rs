//! Beam-sweep schedule and the simulated end-to-end capture.
//!
//! All four receive arrays step through their codebooks together, one slot
//! per dwell. Sweeps start at `epoch + m / repetition_hz`. The transmitters
//! restart their sounding sequence at every whole GPS second, so a capture
//! starting `k` ns after the second sees the sequence rotated by
//! `k mod N`.

use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::SeedableRng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::array::{beam_gain, build_tx_beams, ArrayPlacement, ArraySpec, Beam, BeamCodebook};
use crate::channel::{noise_power_dbm, synthesize_cir, trace_paths, ChannelConfig, CirConfig, Endpoint, PathSet};
use crate::geom::wrap_deg;
use crate::record::{CaptureFrame, CaptureMode, Iq};
use crate::scenario::{Scene, SceneSnapshot};
use crate::time::GpsTime;
use crate::waveform::{cyclic_shift, generate_zc, ZcSequence};
use crate::{fft, Complex, Error, Result, SAMPLE_RATE_HZ};

const NS_PER_S: u128 = 1_000_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub dwell_ns: u64,
    /// Beam settling time discarded at the start of each slot.
    pub guard_ns: u64,
    pub repetition_hz: f64,
    pub capture_mode: CaptureMode,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            dwell_ns: 40_000,
            guard_ns: 1_000,
            repetition_hz: 20.0,
            capture_mode: CaptureMode::Cir,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Slot {
    pub index: usize,
    /// Beam index per receive array.
    pub beams: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSchedule {
    pub epoch: GpsTime,
    pub dwell_ns: u64,
    pub guard_ns: u64,
    pub repetition_hz: f64,
    pub capture_mode: CaptureMode,
    /// Samples per capture window.
    pub capture_samples: usize,
    pub slots: Vec<Slot>,
    pub rx_channels: usize,
}

impl SweepSchedule {
    pub fn span_ns(&self) -> u64 {
        self.dwell_ns * self.slots.len() as u64
    }

    pub fn frames_per_sweep(&self) -> usize {
        self.slots.len() * self.rx_channels
    }

    /// Nanoseconds from the epoch to the start of sweep `m`, rounded to
    /// the nearest nanosecond.
    pub fn sweep_offset_ns(&self, m: usize) -> u128 {
        libm::round(m as f64 * 1e9 / self.repetition_hz) as u128
    }

    pub fn sweep_start(&self, m: usize) -> GpsTime {
        self.epoch.add_nanos(self.sweep_offset_ns(m))
    }

    pub fn slot_start(&self, m: usize, k: usize) -> GpsTime {
        self.epoch
            .add_nanos(self.sweep_offset_ns(m) + k as u128 * self.dwell_ns as u128)
    }

    /// First sample of the capture in slot `k` of sweep `m`.
    pub fn capture_start(&self, m: usize, k: usize) -> GpsTime {
        let guard = match self.capture_mode {
            CaptureMode::Cir => self.guard_ns as u128,
            CaptureMode::FullDwell => 0,
        };
        self.slot_start(m, k).add_nanos(guard)
    }

    /// Number of sweeps starting within `duration_s` of the epoch.
    pub fn sweeps_in(&self, duration_s: f64) -> usize {
        if !(duration_s > 0.0) {
            return 0;
        }
        libm::ceil(duration_s * self.repetition_hz - 1e-9) as usize
    }
}

/// Slot `k` assigns beam `k` of every codebook.
pub fn build_schedule(
    codebooks: &[BeamCodebook],
    cfg: &SweepConfig,
    period_samples: usize,
    epoch: GpsTime,
) -> Result<SweepSchedule> {
    let n = codebooks.first().map(|c| c.len()).unwrap_or(0);
    if n == 0 || codebooks.iter().any(|c| c.len() != n) {
        return Err(Error::CodebookMismatch);
    }
    let capture_ns = (period_samples as f64 * 1e9 / SAMPLE_RATE_HZ) as u64;
    if cfg.dwell_ns <= capture_ns + cfg.guard_ns {
        return Err(Error::DwellTooShort {
            dwell_ns: cfg.dwell_ns,
            capture_ns,
            guard_ns: cfg.guard_ns,
        });
    }
    if !(cfg.repetition_hz > 0.0 && cfg.repetition_hz.is_finite()) {
        return Err(Error::NonPositive {
            quantity: "repetition_hz",
            value: cfg.repetition_hz,
        });
    }
    let span_ns = cfg.dwell_ns * n as u64;
    let period_ns = libm::floor(1e9 / cfg.repetition_hz) as u64;
    if span_ns > period_ns {
        return Err(Error::SweepOverlap { span_ns, period_ns });
    }
    let capture_samples = match cfg.capture_mode {
        CaptureMode::Cir => period_samples,
        CaptureMode::FullDwell => (cfg.dwell_ns as f64 * SAMPLE_RATE_HZ / 1e9) as usize,
    };
    Ok(SweepSchedule {
        epoch,
        dwell_ns: cfg.dwell_ns,
        guard_ns: cfg.guard_ns,
        repetition_hz: cfg.repetition_hz,
        capture_mode: cfg.capture_mode,
        capture_samples,
        slots: (0..n)
            .map(|k| Slot {
                index: k,
                beams: alloc::vec![k; codebooks.len()],
            })
            .collect(),
        rx_channels: codebooks.len(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SounderConfig {
    pub tx_array: ArraySpec,
    pub rx_array: ArraySpec,
    pub eirp_dbm: f64,
    pub noise_figure_db: f64,
    pub add_noise: bool,
    pub zc_root: usize,
    pub zc_length: usize,
    pub tx_shifts: [usize; 2],
    pub channel: ChannelConfig,
    pub pulse_half_width: usize,
    /// Largest I or Q magnitude as a fraction of full scale.
    pub headroom: f64,
}

impl Default for SounderConfig {
    fn default() -> Self {
        Self {
            tx_array: ArraySpec::tx_preset(),
            rx_array: ArraySpec::rx_preset(),
            eirp_dbm: 30.0,
            noise_figure_db: 5.0,
            add_noise: true,
            zc_root: 1,
            zc_length: 2048,
            tx_shifts: [0, 1024],
            channel: ChannelConfig::default(),
            pulse_half_width: 32,
            headroom: 0.9,
        }
    }
}

/// Propagation truth behind one frame, per transmitter.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameTruth {
    pub tx_id: usize,
    pub paths: PathSet,
    /// EIRP-referenced TX term per path, dBm.
    pub tx_term_dbm: Vec<f64>,
    pub rx_gain_db: Vec<f64>,
}

impl FrameTruth {
    /// Received power of path `i` in dBm.
    pub fn path_power_dbm(&self, i: usize) -> f64 {
        self.paths.paths[i].gain_db + self.tx_term_dbm[i] + self.rx_gain_db[i]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedFrame {
    pub sweep: usize,
    pub frame: CaptureFrame,
    pub truth: Vec<FrameTruth>,
}

/// A configured simulated sounder over one scene.
#[derive(Debug, Clone)]
pub struct Sounder<'a> {
    scene: &'a Scene,
    cfg: SounderConfig,
    codebook: BeamCodebook,
    base: ZcSequence,
    tx_spectra: Vec<Vec<Complex>>,
    tx_beams: Vec<Beam>,
    tx_mounts: Vec<ArrayPlacement>,
    rx_mounts: Vec<ArrayPlacement>,
}

impl<'a> Sounder<'a> {
    pub fn new(scene: &'a Scene, codebook: BeamCodebook, cfg: SounderConfig) -> Result<Self> {
        scene.validate()?;
        cfg.channel.validate()?;
        let base = generate_zc(cfg.zc_root, cfg.zc_length)?;
        let mut tx_spectra = Vec::new();
        for &s in &cfg.tx_shifts {
            let mut x = cyclic_shift(&base, s)?.samples().to_vec();
            fft::forward(&mut x);
            tx_spectra.push(x);
        }
        let [(b0, _), (b1, _)] = build_tx_beams();
        let spec = cfg.tx_array;
        let tx_beams = [b0, b1]
            .into_iter()
            .map(|b| Beam {
                beamwidth_3db_deg: spec.beamwidth_3db_deg,
                ..b
            })
            .collect();
        Ok(Self {
            scene,
            codebook,
            base,
            tx_spectra,
            tx_beams,
            tx_mounts: scene.tx_arrays(),
            rx_mounts: scene.rx_arrays(),
            cfg,
        })
    }

    pub fn config(&self) -> &SounderConfig {
        &self.cfg
    }

    pub fn codebook(&self) -> &BeamCodebook {
        &self.codebook
    }

    pub fn base_sequence(&self) -> &ZcSequence {
        &self.base
    }

    pub fn scene(&self) -> &Scene {
        self.scene
    }

    pub fn noise_dbm(&self) -> f64 {
        noise_power_dbm(SAMPLE_RATE_HZ, self.cfg.noise_figure_db)
    }

    pub fn rx_endpoint(&self, snap: &SceneSnapshot, array: usize) -> Endpoint {
        endpoint(snap, snap.rx_vehicle, array, &self.rx_mounts[array])
    }

    pub fn tx_endpoint(&self, snap: &SceneSnapshot, tx: usize) -> Endpoint {
        endpoint(snap, snap.tx_vehicle, tx, &self.tx_mounts[tx])
    }

    /// Paths and per-path gains from transmitter `tx` into receive array
    /// `rx_array` steered to `beam`, at scene time `t`.
    pub fn link(&self, snap: &SceneSnapshot, tx: usize, rx_array: usize, beam: usize) -> Result<FrameTruth> {
        let te = self.tx_endpoint(snap, tx);
        let re = self.rx_endpoint(snap, rx_array);
        let paths = trace_paths(snap, &self.cfg.channel, &te, &re)?;
        let tb = &self.tx_beams[tx];
        let rb = self.codebook.get(beam).ok_or(Error::CodebookMismatch)?;
        let tx_spec = &self.cfg.tx_array;
        let rx_spec = &self.cfg.rx_array;
        let mut tx_term = Vec::with_capacity(paths.paths.len());
        let mut rx_gain = Vec::with_capacity(paths.paths.len());
        for p in &paths.paths {
            let g = beam_gain(tx_spec, tb, wrap_deg(p.aod_az_deg - te.boresight_deg), p.aod_el_deg);
            tx_term.push(self.cfg.eirp_dbm + g - tx_spec.boresight_gain_db);
            rx_gain.push(beam_gain(rx_spec, rb, wrap_deg(p.aoa_az_deg - re.boresight_deg), p.aoa_el_deg));
        }
        Ok(FrameTruth {
            tx_id: tx,
            paths,
            tx_term_dbm: tx_term,
            rx_gain_db: rx_gain,
        })
    }

    /// Simulate slot `slot` on receive channel `channel` of sweep `sweep`.
    pub fn simulate_frame(
        &self,
        schedule: &SweepSchedule,
        sweep: usize,
        slot: usize,
        channel: usize,
        seed: u64,
    ) -> Result<SimulatedFrame> {
        let n = self.cfg.zc_length;
        let beam = schedule.slots[slot].beams[channel];
        let slot_start = schedule.slot_start(sweep, slot);
        let cap_start = schedule.capture_start(sweep, slot);
        let t_slot = slot_start.seconds_since(&self.scene.epoch);
        let snap = self
            .scene
            .snapshot(t_slot)
            .map_err(|_| Error::SceneCoverage(t_slot))?;
        let cir_cfg = CirConfig {
            bandwidth_hz: SAMPLE_RATE_HZ,
            taps: n,
            frequency_hz: self.cfg.channel.frequency_hz,
            pulse_half_width: self.cfg.pulse_half_width,
        };
        let samples = schedule.capture_samples;
        let lead_s = (cap_start.total_nanos() - slot_start.total_nanos()) as f64 * 1e-9;
        let since_pps = cap_start.fraction_nanos() as u128;
        let mut y = alloc::vec![Complex::new(0.0, 0.0); samples];
        let mut truth = Vec::with_capacity(self.tx_spectra.len());
        for tx in 0..self.tx_spectra.len() {
            let link = self.link(&snap, tx, channel, beam)?;
            for (i, p) in link.paths.paths.iter().enumerate() {
                let cir = synthesize_cir(
                    core::slice::from_ref(p),
                    &link.tx_term_dbm[i..=i],
                    &link.rx_gain_db[i..=i],
                    0.0,
                    &cir_cfg,
                )?;
                if !cir.dropped.is_empty() {
                    continue;
                }
                let mut z = cir.taps;
                fft::forward(&mut z);
                for (a, b) in z.iter_mut().zip(&self.tx_spectra[tx]) {
                    *a *= b;
                }
                fft::inverse(&mut z);
                accumulate(&mut y, &z, since_pps, p.doppler_hz, lead_s);
            }
            truth.push(link);
        }
        if self.cfg.add_noise {
            let global = ((sweep * schedule.slots.len() + slot) * schedule.rx_channels + channel) as u64;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(global);
            let sigma = libm::sqrt(libm::pow(10.0, self.noise_dbm() / 10.0) / 2.0);
            for v in &mut y {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                *v += Complex::new(re * sigma, im * sigma);
            }
        }
        let (iq, cal) = quantize(&y, self.cfg.headroom);
        Ok(SimulatedFrame {
            sweep,
            frame: CaptureFrame {
                timestamp: cap_start,
                rx_channel: channel as u8,
                slot_index: slot as u8,
                beam_index: beam as u16,
                calibration_dbm_fs: cal,
                samples: iq,
            },
            truth,
        })
    }
}

fn endpoint(snap: &SceneSnapshot, vehicle: usize, id: usize, mount: &ArrayPlacement) -> Endpoint {
    let pose = snap.vehicles[vehicle].pose;
    Endpoint {
        array_id: id,
        position: pose.to_world(mount.position),
        velocity: pose.velocity,
        boresight_deg: wrap_deg(pose.heading_deg + mount.boresight_heading_deg),
        vehicle: Some(vehicle),
    }
}

/// Add one path's periodic response to the capture, indexing the period
/// by nanoseconds since the last whole second and rotating by its Doppler.
fn accumulate(y: &mut [Complex], z: &[Complex], since_pps: u128, doppler_hz: f64, lead_s: f64) {
    let n = z.len() as u128;
    let step = Complex::from_polar(1.0, 2.0 * core::f64::consts::PI * doppler_hz / SAMPLE_RATE_HZ);
    let mut rot = Complex::new(1.0, 0.0);
    for (k, v) in y.iter_mut().enumerate() {
        if k % 1024 == 0 {
            // re-anchor the recurrence to keep the phase exact
            let cycles = doppler_hz * (lead_s + k as f64 / SAMPLE_RATE_HZ);
            rot = Complex::from_polar(1.0, 2.0 * core::f64::consts::PI * (cycles - libm::floor(cycles)));
        }
        let idx = ((since_pps + k as u128) % NS_PER_S) % n;
        *v += z[idx as usize] * rot;
        rot *= step;
    }
}

/// Scale so the largest component sits at `headroom` of full scale, round
/// to 16 bits, and return the power of a full-scale sample in dBm.
pub fn quantize(y: &[Complex], headroom: f64) -> (Vec<Iq>, f64) {
    let peak = y.iter().map(|c| c.re.abs().max(c.im.abs())).fold(0.0, f64::max);
    let fs = if peak > 0.0 { peak / headroom } else { 1.0 };
    let k = 32767.0 / fs;
    let q = |v: f64| libm::round(v * k).clamp(-32768.0, 32767.0) as i16;
    let iq = y.iter().map(|c| Iq { i: q(c.re), q: q(c.im) }).collect();
    (iq, 20.0 * libm::log10(fs))
}

/// Convert stored samples back to amplitude in sqrt(mW).
pub fn dequantize(frame: &CaptureFrame) -> Vec<Complex> {
    let fs = libm::pow(10.0, frame.calibration_dbm_fs / 20.0) / 32767.0;
    frame
        .samples
        .iter()
        .map(|s| Complex::new(s.i as f64 * fs, s.q as f64 * fs))
        .collect()
}

/// Every frame of sweep `m`, ordered by slot then receive channel.
pub fn execute_sweep(sounder: &Sounder<'_>, schedule: &SweepSchedule, m: usize, seed: u64) -> Result<Vec<SimulatedFrame>> {
    let t0 = schedule.sweep_start(m).seconds_since(&sounder.scene.epoch);
    let t1 = t0 + schedule.span_ns() as f64 * 1e-9;
    sounder.scene.covers(t0, t1).map_err(|e| match e {
        Error::OutsideSpan { t, .. } => Error::SceneCoverage(t),
        other => other,
    })?;
    let mut out = Vec::with_capacity(schedule.frames_per_sweep());
    for k in 0..schedule.slots.len() {
        for ch in 0..schedule.rx_channels {
            out.push(sounder.simulate_frame(schedule, m, k, ch, seed)?);
        }
    }
    Ok(out)
}
