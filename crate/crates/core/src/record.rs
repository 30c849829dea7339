//! Capture frame codec, recorder packetization and throughput accounting.
//!
//! Frame layout, little-endian, 40-byte header:
//!
//! | offset | size | field                      |
//! |--------|------|----------------------------|
//! | 0      | 4    | magic `RCH2`               |
//! | 4      | 2    | version (1)                |
//! | 6      | 1    | rx channel                 |
//! | 7      | 1    | slot index                 |
//! | 8      | 2    | beam index                 |
//! | 10     | 4    | sample count               |
//! | 14     | 2    | reserved, zero             |
//! | 16     | 8    | GPS seconds                |
//! | 24     | 8    | GPS fraction, Q0.64        |
//! | 32     | 8    | calibration, dBm at full scale (f64) |
//! | 40     | 4·n  | samples, (i16 I, i16 Q)    |

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::array::ArraySpec;
use crate::time::GpsTime;
use crate::{Error, Result};

pub const MAGIC: [u8; 4] = *b"RCH2";
pub const FORMAT_VERSION: u16 = 1;
pub const HEADER_BYTES: usize = 40;
pub const PACKET_HEADER_BYTES: usize = 16;
pub const MIN_PAYLOAD: usize = 64;
pub const MAX_RX_CHANNEL: u8 = 3;

/// An interleaved 16-bit I/Q sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Iq {
    pub i: i16,
    pub q: i16,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaptureFrame {
    pub timestamp: GpsTime,
    pub rx_channel: u8,
    pub slot_index: u8,
    pub beam_index: u16,
    /// Power in dBm of a full-scale (amplitude 1.0) complex sample.
    pub calibration_dbm_fs: f64,
    pub samples: Vec<Iq>,
}

impl CaptureFrame {
    pub fn sample_count(&self) -> usize {
        self.samples.len()
    }

    pub fn encoded_len(&self) -> usize {
        frame_bytes(self.samples.len())
    }
}

/// Encoded size of a frame with `samples` samples.
pub const fn frame_bytes(samples: usize) -> usize {
    HEADER_BYTES + 4 * samples
}

pub fn encode_frame(frame: &CaptureFrame) -> Result<Vec<u8>> {
    let mut out = Vec::with_capacity(frame.encoded_len());
    encode_frame_into(frame, &mut out)?;
    Ok(out)
}

/// Append the encoded frame to `out`.
pub fn encode_frame_into(frame: &CaptureFrame, out: &mut Vec<u8>) -> Result<()> {
    if frame.rx_channel > MAX_RX_CHANNEL {
        return Err(Error::FieldOverflow("rx_channel"));
    }
    let count = u32::try_from(frame.samples.len()).map_err(|_| Error::FieldOverflow("sample_count"))?;
    if !frame.calibration_dbm_fs.is_finite() {
        return Err(Error::FieldOverflow("calibration"));
    }
    out.reserve(frame.encoded_len());
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    out.push(frame.rx_channel);
    out.push(frame.slot_index);
    out.extend_from_slice(&frame.beam_index.to_le_bytes());
    out.extend_from_slice(&count.to_le_bytes());
    out.extend_from_slice(&0u16.to_le_bytes());
    out.extend_from_slice(&frame.timestamp.seconds.to_le_bytes());
    out.extend_from_slice(&frame.timestamp.fraction.to_le_bytes());
    out.extend_from_slice(&frame.calibration_dbm_fs.to_le_bytes());
    for s in &frame.samples {
        out.extend_from_slice(&s.i.to_le_bytes());
        out.extend_from_slice(&s.q.to_le_bytes());
    }
    Ok(())
}

fn take<const K: usize>(b: &[u8], at: usize) -> [u8; K] {
    let mut a = [0u8; K];
    a.copy_from_slice(&b[at..at + K]);
    a
}

/// Decode one frame from the front of `bytes`, returning it with the
/// number of bytes consumed.
pub fn decode_frame(bytes: &[u8]) -> Result<(CaptureFrame, usize)> {
    if bytes.len() < HEADER_BYTES {
        return Err(Error::Truncated {
            need: HEADER_BYTES,
            have: bytes.len(),
        });
    }
    let magic = take::<4>(bytes, 0);
    if magic != MAGIC {
        return Err(Error::BadMagic(magic));
    }
    let version = u16::from_le_bytes(take(bytes, 4));
    if version != FORMAT_VERSION {
        return Err(Error::UnsupportedVersion(version));
    }
    let rx_channel = bytes[6];
    if rx_channel > MAX_RX_CHANNEL {
        return Err(Error::FieldOverflow("rx_channel"));
    }
    let slot_index = bytes[7];
    let beam_index = u16::from_le_bytes(take(bytes, 8));
    let count = u32::from_le_bytes(take(bytes, 10)) as usize;
    let seconds = u64::from_le_bytes(take(bytes, 16));
    let fraction = u64::from_le_bytes(take(bytes, 24));
    let calibration_dbm_fs = f64::from_le_bytes(take(bytes, 32));
    let need = frame_bytes(count);
    if bytes.len() < need {
        return Err(Error::Truncated {
            need,
            have: bytes.len(),
        });
    }
    let samples = bytes[HEADER_BYTES..need]
        .chunks_exact(4)
        .map(|c| Iq {
            i: i16::from_le_bytes([c[0], c[1]]),
            q: i16::from_le_bytes([c[2], c[3]]),
        })
        .collect();
    Ok((
        CaptureFrame {
            timestamp: GpsTime::new(seconds, fraction),
            rx_channel,
            slot_index,
            beam_index,
            calibration_dbm_fs,
            samples,
        },
        need,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PacketHeader {
    pub session_id: u32,
    pub frame_id: u32,
    pub fragment_index: u16,
    pub fragment_count: u16,
    pub payload_len: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Packet {
    pub header: PacketHeader,
    pub payload: Vec<u8>,
}

impl Packet {
    pub fn to_bytes(&self) -> Vec<u8> {
        let h = &self.header;
        let mut out = Vec::with_capacity(PACKET_HEADER_BYTES + self.payload.len());
        out.extend_from_slice(&h.session_id.to_le_bytes());
        out.extend_from_slice(&h.frame_id.to_le_bytes());
        out.extend_from_slice(&h.fragment_index.to_le_bytes());
        out.extend_from_slice(&h.fragment_count.to_le_bytes());
        out.extend_from_slice(&h.payload_len.to_le_bytes());
        out.extend_from_slice(&self.payload);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < PACKET_HEADER_BYTES {
            return Err(Error::MalformedPacket("short header"));
        }
        let header = PacketHeader {
            session_id: u32::from_le_bytes(take(bytes, 0)),
            frame_id: u32::from_le_bytes(take(bytes, 4)),
            fragment_index: u16::from_le_bytes(take(bytes, 8)),
            fragment_count: u16::from_le_bytes(take(bytes, 10)),
            payload_len: u32::from_le_bytes(take(bytes, 12)),
        };
        if bytes.len() != PACKET_HEADER_BYTES + header.payload_len as usize {
            return Err(Error::MalformedPacket("payload length"));
        }
        if header.fragment_count == 0 || header.fragment_index >= header.fragment_count {
            return Err(Error::MalformedPacket("fragment index"));
        }
        Ok(Self {
            header,
            payload: bytes[PACKET_HEADER_BYTES..].to_vec(),
        })
    }
}

/// Split one encoded frame into datagrams of at most `payload_size` bytes
/// of payload each.
pub fn packetize(block: &[u8], session_id: u32, frame_id: u32, payload_size: usize) -> Result<Vec<Packet>> {
    if payload_size < MIN_PAYLOAD {
        return Err(Error::PayloadTooSmall(payload_size));
    }
    let count = block.len().div_ceil(payload_size).max(1);
    let fragment_count = u16::try_from(count).map_err(|_| Error::FieldOverflow("fragment_count"))?;
    let mut chunks: Vec<&[u8]> = block.chunks(payload_size).collect();
    if chunks.is_empty() {
        chunks.push(&[]);
    }
    Ok(chunks
        .into_iter()
        .enumerate()
        .map(|(i, c)| Packet {
            header: PacketHeader {
                session_id,
                frame_id,
                fragment_index: i as u16,
                fragment_count,
                payload_len: c.len() as u32,
            },
            payload: c.to_vec(),
        })
        .collect())
}

#[derive(Debug, Default)]
struct Partial {
    count: u16,
    fragments: BTreeMap<u16, Vec<u8>>,
}

/// Order-independent frame reassembly for one session.
#[derive(Debug, Default)]
pub struct Reassembler {
    session_id: Option<u32>,
    frames: BTreeMap<u32, Partial>,
    rejected: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Reassembled {
    /// Complete frames keyed by frame id.
    pub frames: BTreeMap<u32, Vec<u8>>,
    /// Frame ids with at least one missing fragment.
    pub lost: Vec<u32>,
    /// Packets ignored as foreign, duplicate or inconsistent.
    pub rejected: usize,
}

impl Reassembler {
    pub fn new(session_id: u32) -> Self {
        Self {
            session_id: Some(session_id),
            ..Self::default()
        }
    }

    pub fn push(&mut self, packet: Packet) {
        let h = packet.header;
        if self.session_id.is_some_and(|s| s != h.session_id) {
            self.rejected += 1;
            return;
        }
        let entry = self.frames.entry(h.frame_id).or_insert_with(|| Partial {
            count: h.fragment_count,
            fragments: BTreeMap::new(),
        });
        if entry.count != h.fragment_count || entry.fragments.contains_key(&h.fragment_index) {
            self.rejected += 1;
            return;
        }
        entry.fragments.insert(h.fragment_index, packet.payload);
    }

    /// Finish reassembly. Frame ids in `expected` that never showed up are
    /// reported lost along with partially received ones.
    pub fn finish(self, expected: Option<core::ops::Range<u32>>) -> Reassembled {
        let mut out = Reassembled {
            rejected: self.rejected,
            ..Default::default()
        };
        for (id, p) in self.frames {
            if p.fragments.len() == p.count as usize {
                out.frames.insert(id, p.fragments.into_values().flatten().collect());
            } else {
                out.lost.push(id);
            }
        }
        if let Some(range) = expected {
            for id in range {
                if !out.frames.contains_key(&id) && !out.lost.contains(&id) {
                    out.lost.push(id);
                }
            }
        }
        out.lost.sort_unstable();
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CaptureMode {
    /// One sounding period per dwell.
    Cir,
    /// The whole dwell on every channel.
    FullDwell,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepParams {
    pub dwell_ns: u64,
    pub guard_ns: u64,
    pub slots_per_sweep: usize,
    pub rx_channels: usize,
    pub repetition_hz: f64,
    pub capture_mode: CaptureMode,
    pub samples_per_frame: usize,
    pub sample_rate_hz: f64,
    pub tx_shifts: Vec<usize>,
    pub zc_root: usize,
    pub zc_length: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionManifest {
    pub format_version: u16,
    pub session_id: u32,
    pub sweep: SweepParams,
    pub tx_array: ArraySpec,
    pub rx_array: ArraySpec,
    pub scenario_name: String,
    pub scenario_hash: String,
    /// Detection threshold the scenario asks processing to use, dB.
    pub detection_threshold_db: f64,
    pub seed: u64,
    pub epoch: GpsTime,
    pub duration_s: f64,
    pub sweeps: usize,
    pub frame_count: usize,
    pub frame_bytes: usize,
    pub byte_count: u64,
    /// Frames recorded as lost in transit.
    pub lost_frames: Vec<u32>,
}

impl SessionManifest {
    pub fn check_accounting(&self) -> Result<()> {
        if self.frame_count as u64 * self.frame_bytes as u64 != self.byte_count {
            return Err(Error::InvalidScene(alloc::format!(
                "manifest accounting: {} frames x {} B != {} B",
                self.frame_count,
                self.frame_bytes,
                self.byte_count
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThroughputReport {
    /// ADC stream rate across all channels while a capture is open.
    pub instantaneous_gbps: f64,
    /// Recorded bytes over the wall time.
    pub sustained_gbps: f64,
    pub tb_per_hour: f64,
}

/// Rates for a recorded session. Zero frames give all-zero rates.
pub fn throughput_report(manifest: &SessionManifest, wall_time_s: f64) -> Result<ThroughputReport> {
    if !(wall_time_s > 0.0) {
        return Err(Error::NonPositive {
            quantity: "wall time",
            value: wall_time_s,
        });
    }
    if manifest.frame_count == 0 {
        return Ok(ThroughputReport {
            instantaneous_gbps: 0.0,
            sustained_gbps: 0.0,
            tb_per_hour: 0.0,
        });
    }
    let s = &manifest.sweep;
    let instantaneous = s.rx_channels as f64 * 4.0 * 8.0 * s.sample_rate_hz;
    let bytes_per_s = manifest.byte_count as f64 / wall_time_s;
    Ok(ThroughputReport {
        instantaneous_gbps: instantaneous / 1e9,
        sustained_gbps: bytes_per_s * 8.0 / 1e9,
        tb_per_hour: bytes_per_s * 3600.0 / 1e12,
    })
}

/// Steady-state projection without recording anything: bytes per second
/// for `frames_per_sweep` frames of `samples` samples at `repetition_hz`.
pub fn projected_bytes_per_s(frames_per_sweep: usize, samples: usize, repetition_hz: f64) -> f64 {
    frames_per_sweep as f64 * frame_bytes(samples) as f64 * repetition_hz
}
