//! Capture processing: per-transmitter CIR estimates, beam RSS tables,
//! normalized CIR stacks, delay statistics and Doppler from phase slopes.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::array::BeamCodebook;
use crate::record::CaptureFrame;
use crate::sweep::dequantize;
use crate::time::GpsTime;
use crate::waveform::{periodic_xcorr, ZcSequence};
use crate::{Complex, Error, Result};

/// Lowest-quartile median of exponentially distributed tap powers sits at
/// `-ln(7/8)` of the mean; dividing by it recovers the mean noise power.
const QUARTILE_MEDIAN_FACTOR: f64 = 0.133_531_392_624_522_6;

/// Power floor used for empty or all-zero profiles, mW.
const MIN_POWER_MW: f64 = 1e-30;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProcessingConfig {
    /// Detection threshold above the noise floor, dB.
    pub detection_threshold_db: f64,
}

impl Default for ProcessingConfig {
    fn default() -> Self {
        Self {
            detection_threshold_db: 12.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CirEstimate {
    pub tx_id: usize,
    pub rx_array_id: usize,
    pub beam_index: usize,
    pub slot_index: usize,
    pub timestamp: GpsTime,
    /// Index of the first tap of this transmitter's window in the full
    /// correlation profile.
    pub window_start: usize,
    /// Complex taps in sqrt(mW), 1 ns apart, starting at zero excess delay.
    pub taps: Vec<Complex>,
    /// Mean noise power per tap, dBm.
    pub noise_floor_dbm: f64,
    pub peak_power_dbm: f64,
    pub peak_delay_ns: f64,
    pub threshold_db: f64,
    pub detected: bool,
}

pub fn power_dbm(c: Complex) -> f64 {
    10.0 * libm::log10(c.norm_sqr().max(MIN_POWER_MW))
}

fn dbm_to_mw(dbm: f64) -> f64 {
    libm::pow(10.0, dbm / 10.0)
}

impl CirEstimate {
    pub fn tap_power_dbm(&self, k: usize) -> f64 {
        power_dbm(self.taps[k])
    }

    /// Detection level in dBm.
    pub fn detection_level_dbm(&self) -> f64 {
        self.noise_floor_dbm + self.threshold_db
    }

    /// Indices of taps above the detection level.
    pub fn detected_taps(&self) -> impl Iterator<Item = usize> + '_ {
        let level = dbm_to_mw(self.detection_level_dbm());
        (0..self.taps.len()).filter(move |&k| self.taps[k].norm_sqr() > level)
    }
}

/// Bias-corrected noise estimate: the median of the quietest quarter of
/// taps, scaled to the mean of an exponential distribution.
pub fn noise_floor_mw(powers: &[f64]) -> f64 {
    if powers.is_empty() {
        return MIN_POWER_MW;
    }
    let mut p = powers.to_vec();
    p.sort_by(f64::total_cmp);
    let quarter = (p.len() / 4).max(1);
    let low = &p[..quarter];
    let median = if quarter % 2 == 1 {
        low[quarter / 2]
    } else {
        0.5 * (low[quarter / 2 - 1] + low[quarter / 2])
    };
    (median / QUARTILE_MEDIAN_FACTOR).max(MIN_POWER_MW)
}

/// Full correlation profile of a capture in sqrt(mW): the period origin is
/// restored from the capture timestamp, then `h[k]` is the response at
/// `k` symbols of delay.
pub fn correlate_frame(frame: &CaptureFrame, reference: &ZcSequence) -> Result<Vec<Complex>> {
    let n = reference.length();
    if frame.samples.len() < n {
        return Err(Error::LengthMismatch {
            left: frame.samples.len(),
            right: n,
        });
    }
    if !frame.calibration_dbm_fs.is_finite() {
        return Err(Error::UnknownCalibration);
    }
    let y = dequantize(frame);
    let since_pps = frame.timestamp.fraction_nanos() as f64;
    let o = libm::round(since_pps / reference.symbol_period_ns()) as usize % n;
    let z: Vec<Complex> = (0..n).map(|m| y[(m + n - o) % n]).collect();
    let base = reference_base(reference);
    let corr = periodic_xcorr(&base, &z)?;
    let scale = 1.0 / n as f64;
    Ok(corr.into_iter().map(|c| c.conj() * scale).collect())
}

fn reference_base(reference: &ZcSequence) -> Vec<Complex> {
    if reference.shift() == 0 {
        return reference.samples().to_vec();
    }
    // undo the stored rotation so windows are always relative to shift 0
    let mut s = reference.samples().to_vec();
    s.rotate_right(reference.shift());
    s
}

/// Window start for a transmitter using `shift`: its response lands
/// `N - shift` symbols late.
pub fn window_start(shift: usize, n: usize) -> usize {
    (n - shift % n) % n
}

/// Correlate a capture and split it into one estimate per transmitter.
pub fn estimate_cir(
    frame: &CaptureFrame,
    reference: &ZcSequence,
    shift_plan: &[usize],
    cfg: &ProcessingConfig,
) -> Result<Vec<CirEstimate>> {
    if shift_plan.is_empty() {
        return Err(Error::EmptyInput);
    }
    let n = reference.length();
    let h = correlate_frame(frame, reference)?;
    let mut starts: Vec<usize> = shift_plan.iter().map(|&s| window_start(s, n)).collect();
    starts.sort_unstable();
    starts.dedup();
    let symbol_ns = reference.symbol_period_ns();
    let mut out = Vec::with_capacity(shift_plan.len());
    for (tx, &s) in shift_plan.iter().enumerate() {
        let start = window_start(s, n);
        let pos = starts.iter().position(|&w| w == start).unwrap_or(0);
        let next = starts.get(pos + 1).copied().unwrap_or(starts[0] + n);
        let len = next - start;
        let taps: Vec<Complex> = (0..len).map(|k| h[(start + k) % n]).collect();
        let powers: Vec<f64> = taps.iter().map(|c| c.norm_sqr()).collect();
        let floor = noise_floor_mw(&powers);
        let (peak_k, peak_p) = powers
            .iter()
            .copied()
            .enumerate()
            .fold((0, 0.0), |acc, (k, p)| if p > acc.1 { (k, p) } else { acc });
        let noise_floor_dbm = 10.0 * libm::log10(floor);
        let peak_power_dbm = 10.0 * libm::log10(peak_p.max(MIN_POWER_MW));
        out.push(CirEstimate {
            tx_id: tx,
            rx_array_id: frame.rx_channel as usize,
            beam_index: frame.beam_index as usize,
            slot_index: frame.slot_index as usize,
            timestamp: frame.timestamp,
            window_start: start,
            taps,
            noise_floor_dbm,
            peak_power_dbm,
            peak_delay_ns: peak_k as f64 * symbol_ns,
            threshold_db: cfg.detection_threshold_db,
            detected: peak_power_dbm > noise_floor_dbm + cfg.detection_threshold_db,
        });
    }
    Ok(out)
}

/// Received power of one estimate: the sum of detected tap powers, or the
/// noise floor when nothing is detected.
pub fn rss_dbm(est: &CirEstimate) -> f64 {
    let total: f64 = est.detected_taps().map(|k| est.taps[k].norm_sqr()).sum();
    if total > 0.0 {
        10.0 * libm::log10(total)
    } else {
        est.noise_floor_dbm
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RssEntry {
    pub timestamp: GpsTime,
    pub tx_id: usize,
    pub rx_array_id: usize,
    pub beam_index: usize,
    /// Array-local pointing.
    pub azimuth_deg: f64,
    pub elevation_deg: f64,
    pub rss_dbm: f64,
    pub detected: bool,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct BeamRssTable {
    pub entries: Vec<RssEntry>,
}

impl BeamRssTable {
    /// Strongest entry for a (tx, rx array) pair.
    pub fn best(&self, tx: usize, rx_array: usize) -> Option<&RssEntry> {
        self.entries
            .iter()
            .filter(|e| e.tx_id == tx && e.rx_array_id == rx_array)
            .max_by(|a, b| a.rss_dbm.total_cmp(&b.rss_dbm))
    }

    /// Strongest entry for an RX array over all transmitters.
    pub fn best_for_array(&self, rx_array: usize) -> Option<&RssEntry> {
        self.entries
            .iter()
            .filter(|e| e.rx_array_id == rx_array)
            .max_by(|a, b| a.rss_dbm.total_cmp(&b.rss_dbm))
    }
}

/// One entry per estimate, optionally restricted to one codebook
/// elevation row.
pub fn rss_per_beam(estimates: &[CirEstimate], codebook: &BeamCodebook, elevation_filter: Option<f64>) -> Result<BeamRssTable> {
    if estimates.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut entries = Vec::with_capacity(estimates.len());
    for e in estimates {
        let beam = codebook.get(e.beam_index).ok_or(Error::CodebookMismatch)?;
        if let Some(el) = elevation_filter {
            if (beam.elevation_deg - el).abs() > 1e-9 {
                continue;
            }
        }
        entries.push(RssEntry {
            timestamp: e.timestamp,
            tx_id: e.tx_id,
            rx_array_id: e.rx_array_id,
            beam_index: e.beam_index,
            azimuth_deg: beam.azimuth_deg,
            elevation_deg: beam.elevation_deg,
            rss_dbm: rss_dbm(e),
            detected: e.detected,
        });
    }
    Ok(BeamRssTable { entries })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StackedCir {
    pub tx_id: usize,
    pub rx_array_id: usize,
    pub beam_index: usize,
    /// Tap power relative to the global peak of the stack, dB.
    pub power_db_rel: Vec<f64>,
}

/// Normalize a selection of estimates to their common peak tap.
pub fn normalize_and_stack(selection: &[&CirEstimate]) -> Result<Vec<StackedCir>> {
    if selection.is_empty() {
        return Err(Error::EmptyInput);
    }
    let peak = selection
        .iter()
        .flat_map(|e| e.taps.iter())
        .map(|c| c.norm_sqr())
        .fold(0.0, f64::max);
    if !(peak > 0.0) {
        return Err(Error::AllZero);
    }
    Ok(selection
        .iter()
        .map(|e| StackedCir {
            tx_id: e.tx_id,
            rx_array_id: e.rx_array_id,
            beam_index: e.beam_index,
            power_db_rel: e
                .taps
                .iter()
                .map(|c| {
                    let p = c.norm_sqr();
                    if p == peak {
                        0.0
                    } else {
                        10.0 * libm::log10(p.max(MIN_POWER_MW) / peak)
                    }
                })
                .collect(),
        })
        .collect())
}

/// Power-weighted RMS delay spread in seconds over taps within
/// `threshold_db` of the peak.
pub fn delay_spread(est: &CirEstimate, threshold_db: f64, symbol_period_s: f64) -> Result<f64> {
    if est.peak_power_dbm - threshold_db < est.noise_floor_dbm {
        return Err(Error::ThresholdBelowNoise { threshold_db });
    }
    let level = dbm_to_mw(est.peak_power_dbm - threshold_db);
    let (mut w, mut m1, mut m2) = (0.0, 0.0, 0.0);
    for (k, c) in est.taps.iter().enumerate() {
        let p = c.norm_sqr();
        if p >= level && p > 0.0 {
            let t = k as f64 * symbol_period_s;
            w += p;
            m1 += p * t;
            m2 += p * t * t;
        }
    }
    if w <= 0.0 {
        return Err(Error::NoTapsAboveThreshold);
    }
    let mean = m1 / w;
    Ok(libm::sqrt((m2 / w - mean * mean).max(0.0)))
}

/// First detected tap within `window_db` of the peak, advanced to the
/// local maximum it belongs to. Returns the tap index.
pub fn first_arrival(est: &CirEstimate, window_db: f64) -> Option<usize> {
    let floor = dbm_to_mw(est.peak_power_dbm - window_db);
    let p = |k: usize| est.taps[k].norm_sqr();
    let mut k = est.detected_taps().find(|&k| p(k) >= floor)?;
    while k + 1 < est.taps.len() && p(k + 1) > p(k) {
        k += 1;
    }
    Some(k)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DopplerEstimate {
    pub doppler_hz: f64,
    /// RMS phase residual of the final fit, radians.
    pub residual_rad: f64,
    pub points: usize,
}

fn fit_slope(t: &[f64], phi: &[f64]) -> (f64, f64) {
    let n = t.len() as f64;
    let mt = t.iter().sum::<f64>() / n;
    let mp = phi.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (a, b) in t.iter().zip(phi) {
        sxx += (a - mt) * (a - mt);
        sxy += (a - mt) * (b - mp);
    }
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (slope, mp - slope * mt)
}

fn wrap_pi(x: f64) -> f64 {
    let two_pi = 2.0 * core::f64::consts::PI;
    x - two_pi * libm::round(x / two_pi)
}

/// Doppler from the phase of one propagation path observed at a sequence
/// of instants, `(seconds, tap value)`, sorted by time.
///
/// The leading run of closely spaced samples (one sweep) is unwrapped
/// sample to sample for a coarse slope; later samples are then unwrapped
/// against the running fit with a doubling time horizon, so gaps far
/// longer than one Doppler cycle are bridged without ambiguity.
pub fn estimate_doppler(samples: &[(f64, Complex)]) -> Result<DopplerEstimate> {
    if samples.len() < 3 {
        return Err(Error::EmptyInput);
    }
    let t0 = samples[0].0;
    let t: Vec<f64> = samples.iter().map(|s| s.0 - t0).collect();
    let arg: Vec<f64> = samples.iter().map(|s| s.1.arg()).collect();
    let step = t[1] - t[0];
    let mut run = 2;
    while run < t.len() && t[run] - t[run - 1] <= 2.0 * step {
        run += 1;
    }
    let mut phi = alloc::vec![arg[0]; 1];
    for k in 1..run {
        let prev = phi[k - 1];
        phi.push(prev + wrap_pi(arg[k] - arg[k - 1]));
    }
    let (mut slope, mut icpt) = fit_slope(&t[..run], &phi);
    let mut used = run;
    let mut horizon = t[run - 1].max(step);
    while used < t.len() {
        horizon *= 2.0;
        let limit = t.partition_point(|&x| x <= horizon).max(used + 1);
        for k in used..limit {
            let pred = icpt + slope * t[k];
            phi.push(pred + wrap_pi(arg[k] - pred));
        }
        used = limit;
        let fit = fit_slope(&t[..used], &phi);
        slope = fit.0;
        icpt = fit.1;
    }
    let resid = libm::sqrt(
        t.iter()
            .zip(&phi)
            .map(|(a, b)| {
                let r = b - (icpt + slope * a);
                r * r
            })
            .sum::<f64>()
            / t.len() as f64,
    );
    Ok(DopplerEstimate {
        doppler_hz: slope / (2.0 * core::f64::consts::PI),
        residual_rad: resid,
        points: t.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::record::Iq;
    use crate::sweep::quantize;
    use crate::waveform::{cyclic_shift, generate_zc};
    use proptest::prelude::*;
    use rand_chacha::ChaCha8Rng;
    use rand_core::SeedableRng;
    use rand_distr::{Distribution, StandardNormal};

    /// Direct construction of a capture: `paths` are (tx, integer delay,
    /// amplitude in sqrt(mW)); the period starts `pps_ns` after the second.
    fn capture(paths: &[(usize, usize, Complex)], pps_ns: u64, noise_mw: f64, seed: u64) -> CaptureFrame {
        let base = generate_zc(1, 2048).unwrap();
        let shifts = [0usize, 1024];
        let mut y = alloc::vec![Complex::new(0.0, 0.0); 2048];
        for &(tx, d, a) in paths {
            let s = cyclic_shift(&base, shifts[tx]).unwrap();
            for (n, v) in y.iter_mut().enumerate() {
                let m = (n + pps_ns as usize + 2048 - d) % 2048;
                *v += s.samples()[m] * a;
            }
        }
        if noise_mw > 0.0 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let sd = (noise_mw / 2.0).sqrt();
            for v in &mut y {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                *v += Complex::new(re, im) * sd;
            }
        }
        let (samples, cal) = quantize(&y, 0.9);
        CaptureFrame {
            timestamp: GpsTime::from_parts(77, pps_ns as u128),
            rx_channel: 1,
            slot_index: 3,
            beam_index: 3,
            calibration_dbm_fs: cal,
            samples,
        }
    }

    fn est(frame: &CaptureFrame) -> Vec<CirEstimate> {
        estimate_cir(frame, &generate_zc(1, 2048).unwrap(), &[0, 1024], &ProcessingConfig::default()).unwrap()
    }

    #[test]
    fn single_tx_single_tap() {
        let a = Complex::from_polar(1e-3, 0.7);
        let f = capture(&[(1, 70, a)], 12_345_678, 0.0, 0);
        let e = est(&f);
        assert_eq!(e[1].window_start, 1024);
        assert_eq!(e[1].peak_delay_ns, 70.0);
        assert!((e[1].peak_power_dbm - (-60.0)).abs() < 0.1);
        assert!((e[1].taps[70] - a).norm() < 1e-3 * 0.01);
        // noise off: the other window only holds quantization residue
        assert!(e[0].peak_power_dbm < e[1].peak_power_dbm - 60.0);
        // with receiver noise the empty window averages at the floor
        let f = capture(&[(1, 70, a)], 12_345_678, 1e-12, 4);
        let e = est(&f);
        assert_eq!(e[1].peak_delay_ns, 70.0);
        let mean = e[0].taps.iter().map(|c| c.norm_sqr()).sum::<f64>() / e[0].taps.len() as f64;
        assert!(10.0 * mean.log10() <= e[0].noise_floor_dbm + 3.0);
        assert!(e[0].detected_taps().next().is_none());
    }

    #[test]
    fn rejects_short_frames_and_bad_calibration() {
        let mut f = capture(&[(0, 5, Complex::new(1.0, 0.0))], 0, 0.0, 0);
        let base = generate_zc(1, 2048).unwrap();
        f.calibration_dbm_fs = f64::NAN;
        assert_eq!(
            estimate_cir(&f, &base, &[0, 1024], &ProcessingConfig::default()),
            Err(Error::UnknownCalibration)
        );
        f.samples.truncate(100);
        assert!(matches!(
            estimate_cir(&f, &base, &[0], &ProcessingConfig::default()),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn noise_floor_estimator_is_unbiased() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p: Vec<f64> = (0..200_000)
            .map(|_| {
                let a: f64 = StandardNormal.sample(&mut rng);
                let b: f64 = StandardNormal.sample(&mut rng);
                (a * a + b * b) / 2.0
            })
            .collect();
        let nf = noise_floor_mw(&p);
        assert!((10.0 * nf.log10()).abs() < 0.1, "{nf}");
        assert!((QUARTILE_MEDIAN_FACTOR - (-(7.0f64 / 8.0).ln())).abs() < 1e-15);
    }

    #[test]
    fn all_noise_rarely_detects() {
        let mut hits = 0;
        for seed in 0..200 {
            let f = capture(&[], 1000, 1e-8, seed);
            for e in est(&f) {
                if e.detected_taps().next().is_some() {
                    hits += 1;
                }
            }
        }
        assert!(hits <= 4, "{hits}");
    }

    #[test]
    fn rss_on_pure_noise_sits_at_floor() {
        let f = capture(&[], 1000, 1e-8, 9);
        let e = est(&f);
        for x in &e {
            assert!((rss_dbm(x) - x.noise_floor_dbm).abs() < 2.0);
            let per_tap = 10.0 * (1e-8f64 / 2048.0).log10();
            assert!((x.noise_floor_dbm - per_tap).abs() < 1.0);
        }
    }

    #[test]
    fn stacking_and_spread() {
        let f = capture(
            &[(0, 100, Complex::new(1e-3, 0.0)), (0, 110, Complex::new(0.0, 1e-3))],
            0,
            1e-15,
            0,
        );
        let e = est(&f);
        let stack = normalize_and_stack(&[&e[0], &e[1]]).unwrap();
        let max = stack.iter().flat_map(|s| s.power_db_rel.iter()).fold(f64::NEG_INFINITY, |a, &b| a.max(b));
        assert_eq!(max, 0.0);
        let ds = delay_spread(&e[0], 10.0, 1e-9).unwrap();
        assert!((ds - 5e-9).abs() < 1e-11, "{ds}");
        let noisy = est(&capture(&[(0, 100, Complex::new(1e-3, 0.0))], 0, 1e-9, 2));
        assert!(matches!(delay_spread(&noisy[0], 80.0, 1e-9), Err(Error::ThresholdBelowNoise { .. })));
        let single = est(&capture(&[(1, 40, Complex::new(1e-3, 0.0))], 0, 0.0, 0));
        assert!(delay_spread(&single[1], 10.0, 1e-9).unwrap().abs() < 1e-12);
        assert_eq!(first_arrival(&e[0], 25.0), Some(100));
        assert!(matches!(normalize_and_stack(&[]), Err(Error::EmptyInput)));
        let mut z = e[0].clone();
        z.taps.iter_mut().for_each(|t| *t = Complex::new(0.0, 0.0));
        assert_eq!(normalize_and_stack(&[&z]), Err(Error::AllZero));
    }

    #[test]
    fn first_arrival_prefers_earliest_cluster() {
        let f = capture(
            &[(0, 70, Complex::new(1e-4, 0.0)), (0, 91, Complex::new(1e-3, 0.0))],
            0,
            1e-12,
            5,
        );
        let e = est(&f);
        assert_eq!(first_arrival(&e[0], 25.0), Some(70));
        // a window narrower than the gap skips the weak early path
        assert_eq!(first_arrival(&e[0], 15.0), Some(91));
    }

    #[test]
    fn doppler_from_sparse_sweeps() {
        let fd = 2503.0;
        let mut s = Vec::new();
        for m in 0..20 {
            for k in 0..29 {
                let t = m as f64 * 0.05 + k as f64 * 40e-6;
                s.push((t, Complex::from_polar(1.0, 2.0 * core::f64::consts::PI * fd * t + 0.3)));
            }
        }
        let d = estimate_doppler(&s).unwrap();
        assert!((d.doppler_hz - fd).abs() < 1e-6);
        assert!(estimate_doppler(&s[..2]).is_err());
    }

    #[test]
    fn zero_samples_wrap() {
        assert_eq!(window_start(0, 2048), 0);
        assert_eq!(window_start(1024, 2048), 1024);
        assert_eq!(window_start(1, 2048), 2047);
        let iq = Iq::default();
        assert_eq!((iq.i, iq.q), (0, 0));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn round_trip_on_grid(d in 0usize..900, tx in 0usize..2, amp_db in -80.0f64..-20.0, ph in -3.1f64..3.1, pps in 0u64..999_999_999) {
            let a = Complex::from_polar(10f64.powf(amp_db / 20.0), ph);
            let f = capture(&[(tx, d, a)], pps, 0.0, 0);
            let e = est(&f);
            prop_assert_eq!(e[tx].peak_delay_ns, d as f64);
            prop_assert!((e[tx].peak_power_dbm - amp_db).abs() <= 0.1);
            prop_assert!(e[1 - tx].peak_power_dbm <= e[tx].peak_power_dbm - 40.0);
        }

        #[test]
        fn round_trip_with_noise(d in 0usize..900, tx in 0usize..2, snr_db in 20.0f64..40.0, seed in any::<u64>()) {
            let noise = 1e-9;
            let a = Complex::from_polar((noise * 10f64.powf(snr_db / 10.0)).sqrt(), 0.4);
            let f = capture(&[(tx, d, a)], 500, noise, seed);
            let e = est(&f);
            prop_assert!((e[tx].peak_delay_ns - d as f64).abs() <= 1.0);
            prop_assert!((e[tx].peak_power_dbm - power_dbm(a)).abs() <= 0.5);
        }

        #[test]
        fn normalization_peak_is_zero(d1 in 0usize..1000, d2 in 0usize..1000, g in -30.0f64..0.0) {
            let f = capture(&[(0, d1, Complex::new(1e-3, 0.0)), (1, d2, Complex::from_polar(1e-3 * 10f64.powf(g / 20.0), 1.0))], 0, 1e-12, 1);
            let e = est(&f);
            let s = normalize_and_stack(&[&e[0], &e[1]]).unwrap();
            let max = s.iter().flat_map(|x| x.power_db_rel.iter()).fold(f64::NEG_INFINITY, |a, &b| a.max(b));
            prop_assert_eq!(max, 0.0);
        }
    }
}
