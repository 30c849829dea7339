use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid ZC root {root} for length {length}: need 0 < root < length and gcd(length, root) = 1")]
    InvalidRoot { root: usize, length: usize },
    #[error("invalid ZC length {0}: must be at least 2")]
    InvalidLength(usize),
    #[error("offset {offset} out of range for sequence length {length}")]
    ShiftOutOfRange { offset: usize, length: usize },
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("{quantity} must be positive and finite, got {value}")]
    NonPositive { quantity: &'static str, value: f64 },
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(&'static str),
    #[error("time {t} s outside track span [{start}, {end}]")]
    OutsideSpan { t: f64, start: f64, end: f64 },
    #[error("tracks do not overlap in time")]
    NoOverlap,
    #[error("track needs at least one sample with strictly increasing timestamps")]
    BadTrack,
    #[error("invalid scene: {0}")]
    InvalidScene(String),
    #[error("dwell of {dwell_ns} ns cannot hold a {capture_ns} ns capture plus {guard_ns} ns settling guard")]
    DwellTooShort {
        dwell_ns: u64,
        capture_ns: u64,
        guard_ns: u64,
    },
    #[error("codebooks must be non-empty and of equal length")]
    CodebookMismatch,
    #[error("sweep span of {span_ns} ns exceeds the repetition period of {period_ns} ns")]
    SweepOverlap { span_ns: u64, period_ns: u64 },
    #[error("scene does not cover t = {0} s")]
    SceneCoverage(f64),
    #[error("unsupported model feature: {0}")]
    Unsupported(&'static str),
    #[error("no taps above threshold")]
    NoTapsAboveThreshold,
    #[error("threshold of {threshold_db} dB below the peak reaches under the noise floor")]
    ThresholdBelowNoise { threshold_db: f64 },
    #[error("empty input")]
    EmptyInput,
    #[error("all-zero input")]
    AllZero,
    #[error("unknown or non-finite calibration constant")]
    UnknownCalibration,
    #[error("bad frame magic {0:?}")]
    BadMagic([u8; 4]),
    #[error("unsupported format version {0}")]
    UnsupportedVersion(u16),
    #[error("truncated input: need {need} bytes, have {have}")]
    Truncated { need: usize, have: usize },
    #[error("field overflow: {0}")]
    FieldOverflow(&'static str),
    #[error("payload size {0} below the 64 byte minimum")]
    PayloadTooSmall(usize),
    #[error("malformed packet: {0}")]
    MalformedPacket(&'static str),
}
