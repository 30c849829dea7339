//! GPS-aligned timestamps with a Q0.64 fractional second.

use core::fmt;

use serde::{Deserialize, Serialize};

const NANOS_PER_SEC: u128 = 1_000_000_000;

/// Whole GPS seconds plus a binary fraction of a second (Q0.64).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
pub struct GpsTime {
    pub seconds: u64,
    pub fraction: u64,
}

impl GpsTime {
    pub const fn new(seconds: u64, fraction: u64) -> Self {
        Self { seconds, fraction }
    }

    pub const fn from_seconds(seconds: u64) -> Self {
        Self { seconds, fraction: 0 }
    }

    /// Build from whole seconds plus nanoseconds (may exceed one second).
    pub fn from_parts(seconds: u64, nanos: u128) -> Self {
        let total = seconds as u128 * NANOS_PER_SEC + nanos;
        Self::from_total_nanos(total)
    }

    pub fn from_total_nanos(total: u128) -> Self {
        let seconds = (total / NANOS_PER_SEC) as u64;
        let ns = total % NANOS_PER_SEC;
        let fraction = ((ns << 64) / NANOS_PER_SEC) as u64;
        Self { seconds, fraction }
    }

    fn frac_to_nanos(fraction: u64) -> u128 {
        (fraction as u128 * NANOS_PER_SEC + (1u128 << 63)) >> 64
    }

    /// Fractional second rounded to the nearest nanosecond.
    pub fn fraction_nanos(&self) -> u64 {
        Self::frac_to_nanos(self.fraction) as u64
    }

    pub fn total_nanos(&self) -> u128 {
        self.seconds as u128 * NANOS_PER_SEC + Self::frac_to_nanos(self.fraction)
    }

    pub fn fraction_f64(&self) -> f64 {
        self.fraction as f64 / 18_446_744_073_709_551_616.0
    }

    pub fn add_nanos(&self, nanos: u128) -> Self {
        Self::from_total_nanos(self.total_nanos() + nanos)
    }

    /// Seconds elapsed since `epoch` (negative if earlier).
    pub fn seconds_since(&self, epoch: &GpsTime) -> f64 {
        let a = self.total_nanos() as i128;
        let b = epoch.total_nanos() as i128;
        (a - b) as f64 * 1e-9
    }
}

impl fmt::Display for GpsTime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{:09}", self.seconds, self.fraction_nanos())
    }
}
