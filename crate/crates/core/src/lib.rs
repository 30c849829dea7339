//! Algorithms for a simulated 28 GHz vehicle-to-vehicle directional channel
//! sounder.
//!
//! The crate covers the whole measurement chain without touching the file
//! system: Zadoff-Chu sounding waveforms ([`waveform`]), phased-array beam
//! codebooks and gain patterns ([`array`]), a geometric multipath channel
//! ([`channel`]), the four-array beam sweep ([`sweep`]), the capture frame
//! codec and recorder packetization ([`record`]), scene and track handling
//! ([`scenario`]), and the processing that turns captures back into channel
//! impulse responses and beam RSS tables ([`rxproc`]).
//!
//! `no_std` with `alloc`; file formats, configuration and the CLI live in
//! the `v2vsound` crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod array;
pub mod channel;
pub mod error;
mod fft;
pub mod geom;
pub mod record;
pub mod rxproc;
pub mod scenario;
pub mod sweep;
pub mod time;
pub mod waveform;

pub use error::{Error, Result};

/// Complex baseband sample type used throughout.
pub type Complex = num_complex::Complex64;

/// Speed of light used by every propagation computation, m/s.
pub const SPEED_OF_LIGHT: f64 = 2.998e8;

/// Sounding carrier frequency, Hz.
pub const CARRIER_HZ: f64 = 28e9;

/// Complex sampling rate of the receiver, samples per second.
pub const SAMPLE_RATE_HZ: f64 = 1e9;
