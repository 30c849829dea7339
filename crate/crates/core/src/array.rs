//! Phased-array presets, beam codebooks, gain patterns and vehicle mounting.
//!
//! Beam pointing angles are array-local: azimuth 0 / elevation 0 is the
//! array boresight. An array's boresight heading is measured from the
//! vehicle's forward axis, counterclockwise, so the front-left corner of a
//! vehicle faces 45 degrees.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::geom::{angular_offset_deg, Vec3};

/// Array mounting height above ground, 15 inches.
pub const BUMPER_HEIGHT_M: f64 = 0.381;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PatternModel {
    /// Raised-cosine main lobe defined by the 3 dB beamwidth, constant
    /// sidelobe floor beyond it.
    RaisedCosine,
    /// Steered uniform planar array factor with half-wavelength spacing.
    UniformPlanar { rows: u32, cols: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Polarization {
    /// One fixed linear polarization, shared by TX and RX.
    SingleFixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArraySpec {
    pub element_count: u32,
    /// Composite gain at boresight, dB.
    pub boresight_gain_db: f64,
    pub beamwidth_3db_deg: f64,
    /// Sidelobe floor relative to boresight, dB (negative).
    pub sidelobe_floor_db: f64,
    pub pattern_model: PatternModel,
    pub polarization: Polarization,
}

impl ArraySpec {
    /// 256-element transmit array with a 55 degree static beam.
    pub fn tx_preset() -> Self {
        Self {
            element_count: 256,
            boresight_gain_db: 59.1,
            beamwidth_3db_deg: 55.0,
            sidelobe_floor_db: -25.0,
            pattern_model: PatternModel::RaisedCosine,
            polarization: Polarization::SingleFixed,
        }
    }

    /// 64-element receive array.
    pub fn rx_preset() -> Self {
        Self {
            element_count: 64,
            boresight_gain_db: 47.0,
            beamwidth_3db_deg: 13.0,
            sidelobe_floor_db: -25.0,
            pattern_model: PatternModel::RaisedCosine,
            polarization: Polarization::SingleFixed,
        }
    }

    /// Same preset with the square uniform-planar pattern (8x8 or 16x16).
    pub fn with_planar_pattern(mut self) -> Self {
        let side = libm::round(libm::sqrt(self.element_count as f64)) as u32;
        self.pattern_model = PatternModel::UniformPlanar {
            rows: side.max(1),
            cols: side.max(1),
        };
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Beam {
    pub index: usize,
    pub azimuth_deg: f64,
    pub elevation_deg: f64,
    pub beamwidth_3db_deg: f64,
}

/// Rows of the receive codebook, each a fixed elevation with `count`
/// azimuth beams.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodebookLayout {
    pub rows: Vec<CodebookRow>,
    /// Half-width of the azimuth coverage, degrees.
    pub azimuth_half_span_deg: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CodebookRow {
    pub elevation_deg: f64,
    pub count: usize,
}

impl Default for CodebookLayout {
    /// 9 beams at -20, 11 at 0 and 9 at +20 degrees elevation over +-45
    /// degrees of azimuth: 29 beams with an exact elevation-0 cut.
    fn default() -> Self {
        Self {
            rows: alloc::vec![
                CodebookRow { elevation_deg: -20.0, count: 9 },
                CodebookRow { elevation_deg: 0.0, count: 11 },
                CodebookRow { elevation_deg: 20.0, count: 9 },
            ],
            azimuth_half_span_deg: 45.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct BeamCodebook {
    beams: Vec<Beam>,
    layout: CodebookLayout,
}

impl BeamCodebook {
    pub fn beams(&self) -> &[Beam] {
        &self.beams
    }

    pub fn len(&self) -> usize {
        self.beams.len()
    }

    pub fn is_empty(&self) -> bool {
        self.beams.is_empty()
    }

    pub fn get(&self, index: usize) -> Option<&Beam> {
        self.beams.get(index)
    }

    pub fn layout(&self) -> &CodebookLayout {
        &self.layout
    }

    /// Azimuth spacing of the row at `elevation_deg`, if such a row exists.
    pub fn azimuth_spacing_deg(&self, elevation_deg: f64) -> Option<f64> {
        self.layout
            .rows
            .iter()
            .find(|r| (r.elevation_deg - elevation_deg).abs() < 1e-9)
            .map(|r| 2.0 * self.layout.azimuth_half_span_deg / r.count as f64)
    }

    /// Beams of the row at `elevation_deg`.
    pub fn row(&self, elevation_deg: f64) -> impl Iterator<Item = &Beam> {
        self.beams
            .iter()
            .filter(move |b| (b.elevation_deg - elevation_deg).abs() < 1e-9)
    }
}

/// Lay out a codebook: each row's beams sit at the centers of equal
/// azimuth cells across the coverage, so adjacent arrays never share a
/// pointing direction. Ordered by elevation row, then azimuth.
pub fn build_codebook(spec: &ArraySpec, layout: &CodebookLayout) -> BeamCodebook {
    let mut beams = Vec::new();
    let span = 2.0 * layout.azimuth_half_span_deg;
    for row in &layout.rows {
        let step = span / row.count as f64;
        for i in 0..row.count {
            beams.push(Beam {
                index: beams.len(),
                azimuth_deg: -layout.azimuth_half_span_deg + step * (i as f64 + 0.5),
                elevation_deg: row.elevation_deg,
                beamwidth_3db_deg: spec.beamwidth_3db_deg,
            });
        }
    }
    BeamCodebook {
        beams,
        layout: layout.clone(),
    }
}

/// The 29-beam receive sweep codebook.
pub fn build_rx_codebook(spec: &ArraySpec) -> BeamCodebook {
    build_codebook(spec, &CodebookLayout::default())
}

/// Array location and orientation in the vehicle frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArrayPlacement {
    /// Meters, vehicle frame (x forward, y left, z up from the ground).
    pub position: Vec3,
    /// Boresight heading relative to the vehicle forward axis, degrees.
    pub boresight_heading_deg: f64,
}

impl ArrayPlacement {
    pub fn height(&self) -> f64 {
        self.position.z
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VehicleSpec {
    pub length_m: f64,
    pub width_m: f64,
    pub height_m: f64,
    pub array_height_m: f64,
}

impl VehicleSpec {
    /// A 15 ft (4.57 m) van.
    pub fn van() -> Self {
        Self {
            length_m: 4.57,
            width_m: 2.0,
            height_m: 2.0,
            array_height_m: BUMPER_HEIGHT_M,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Tx,
    Rx,
}

/// Corner placements. RX: front-left, front-right, rear-left, rear-right
/// (boresights 45, 315, 135, 225). TX: rear-left, rear-right.
pub fn mount_arrays(vehicle: &VehicleSpec, role: Role) -> Vec<ArrayPlacement> {
    let x = vehicle.length_m / 2.0;
    let y = vehicle.width_m / 2.0;
    let z = vehicle.array_height_m;
    let at = |px: f64, py: f64, heading: f64| ArrayPlacement {
        position: Vec3::new(px, py, z),
        boresight_heading_deg: heading,
    };
    match role {
        Role::Rx => alloc::vec![
            at(x, y, 45.0),
            at(x, -y, 315.0),
            at(-x, y, 135.0),
            at(-x, -y, 225.0),
        ],
        Role::Tx => alloc::vec![at(-x, y, 135.0), at(-x, -y, 225.0)],
    }
}

/// The two static transmit beams (boresight, 55 degrees wide) with their
/// rear-corner placements on the default van.
pub fn build_tx_beams() -> [(Beam, ArrayPlacement); 2] {
    let spec = ArraySpec::tx_preset();
    let p = mount_arrays(&VehicleSpec::van(), Role::Tx);
    let beam = |index| Beam {
        index,
        azimuth_deg: 0.0,
        elevation_deg: 0.0,
        beamwidth_3db_deg: spec.beamwidth_3db_deg,
    };
    [(beam(0), p[0]), (beam(1), p[1])]
}

/// Gain in dB toward an array-local direction when the array is steered to
/// `beam`.
pub fn beam_gain(spec: &ArraySpec, beam: &Beam, azimuth_deg: f64, elevation_deg: f64) -> f64 {
    let rel = match spec.pattern_model {
        PatternModel::RaisedCosine => {
            let off = angular_offset_deg(beam.azimuth_deg, beam.elevation_deg, azimuth_deg, elevation_deg);
            raised_cosine_db(off, beam.beamwidth_3db_deg)
        }
        PatternModel::UniformPlanar { rows, cols } => {
            planar_af_db(rows, cols, beam, azimuth_deg, elevation_deg)
        }
    };
    spec.boresight_gain_db + rel.max(spec.sidelobe_floor_db)
}

/// Power pattern cos^2(pi*theta / (2*bw)): -3 dB at bw/2, first null at bw.
fn raised_cosine_db(offset_deg: f64, beamwidth_deg: f64) -> f64 {
    if offset_deg >= beamwidth_deg {
        return f64::NEG_INFINITY;
    }
    let c = libm::cos(core::f64::consts::PI * offset_deg / (2.0 * beamwidth_deg));
    20.0 * libm::log10(c)
}

fn dirichlet(m: u32, psi: f64) -> f64 {
    let den = libm::sin(psi / 2.0);
    if den.abs() < 1e-12 {
        return 1.0;
    }
    (libm::sin(m as f64 * psi / 2.0) / (m as f64 * den)).abs()
}

fn planar_af_db(rows: u32, cols: u32, beam: &Beam, az: f64, el: f64) -> f64 {
    // elements in the local y-z plane, boresight along +x
    let d = Vec3::from_az_el(az, el);
    let s = Vec3::from_az_el(beam.azimuth_deg, beam.elevation_deg);
    let pi = core::f64::consts::PI;
    if d.x < 0.0 {
        // behind the ground plane
        return f64::NEG_INFINITY;
    }
    let af = dirichlet(cols, pi * (d.y - s.y)) * dirichlet(rows, pi * (d.z - s.z));
    20.0 * libm::log10(af.max(1e-300))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::wrap_deg;
    use proptest::prelude::*;

    #[test]
    fn codebook_rows_and_bounds() {
        let cb = build_rx_codebook(&ArraySpec::rx_preset());
        assert_eq!(cb.len(), 29);
        assert_eq!(cb.row(0.0).count(), 11);
        assert_eq!(cb.row(20.0).count(), 9);
        assert_eq!(cb.row(-20.0).count(), 9);
        for (i, b) in cb.beams().iter().enumerate() {
            assert_eq!(b.index, i);
            assert!(b.azimuth_deg.abs() <= 45.0 && b.elevation_deg.abs() <= 30.0);
            assert!(b.beamwidth_3db_deg > 0.0);
        }
        // ordering: elevation row, then azimuth
        for w in cb.beams().windows(2) {
            assert!(
                w[0].elevation_deg < w[1].elevation_deg
                    || (w[0].elevation_deg == w[1].elevation_deg && w[0].azimuth_deg < w[1].azimuth_deg)
            );
        }
        assert!(cb.row(0.0).any(|b| b.azimuth_deg.abs() < 1e-12));
        assert!((cb.azimuth_spacing_deg(0.0).unwrap() - 90.0 / 11.0).abs() < 1e-12);
    }

    #[test]
    fn four_arrays_give_116_distinct_directions() {
        let cb = build_rx_codebook(&ArraySpec::rx_preset());
        let mounts = mount_arrays(&VehicleSpec::van(), Role::Rx);
        let mut dirs = Vec::new();
        for m in &mounts {
            for b in cb.beams() {
                dirs.push((wrap_deg(m.boresight_heading_deg + b.azimuth_deg), b.elevation_deg));
            }
        }
        assert_eq!(dirs.len(), 116);
        for i in 0..dirs.len() {
            for j in i + 1..dirs.len() {
                assert!(angular_offset_deg(dirs[i].0, dirs[i].1, dirs[j].0, dirs[j].1) > 1e-6);
            }
        }
        // elevation-0 cut covers the full circle without gaps wider than one spacing
        let mut az: Vec<f64> = dirs.iter().filter(|d| d.1 == 0.0).map(|d| (d.0 + 360.0) % 360.0).collect();
        az.sort_by(f64::total_cmp);
        let spacing = 90.0 / 11.0;
        for w in az.windows(2) {
            assert!(w[1] - w[0] <= spacing + 1e-9);
        }
        assert!(az[0] + 360.0 - az[az.len() - 1] <= spacing + 1e-9);
    }

    #[test]
    fn tx_beams() {
        let [(b0, p0), (b1, p1)] = build_tx_beams();
        assert_eq!(b0.beamwidth_3db_deg, 55.0);
        assert_eq!(b1.beamwidth_3db_deg, 55.0);
        assert_eq!(p0.height(), BUMPER_HEIGHT_M);
        assert_eq!(p1.height(), BUMPER_HEIGHT_M);
        assert!(p0.position.x < 0.0 && p0.position.y > 0.0);
        assert!(p1.position.x < 0.0 && p1.position.y < 0.0);
        // mirror symmetry about the longitudinal axis
        assert_eq!(wrap_deg(p0.boresight_heading_deg), -wrap_deg(p1.boresight_heading_deg));
        assert_eq!(p0.position.y, -p1.position.y);
    }

    #[test]
    fn mounting() {
        let van = VehicleSpec::van();
        let rx = mount_arrays(&van, Role::Rx);
        assert_eq!(rx.len(), 4);
        assert!((rx[0].position.x - rx[2].position.x - 4.57).abs() < 1e-12);
        assert!(rx.iter().all(|p| p.height() == 0.381));
        let mut quad: Vec<f64> = rx.iter().map(|p| p.boresight_heading_deg).collect();
        quad.sort_by(f64::total_cmp);
        assert_eq!(quad, [45.0, 135.0, 225.0, 315.0]);
        assert_eq!(mount_arrays(&van, Role::Tx).len(), 2);
    }

    #[test]
    fn tx_gain_values() {
        let spec = ArraySpec::tx_preset();
        let [(beam, _), _] = build_tx_beams();
        assert!((beam_gain(&spec, &beam, 0.0, 0.0) - 59.1).abs() < 1e-12);
        assert!((beam_gain(&spec, &beam, 27.5, 0.0) - (59.1 - 10.0 * libm::log10(2.0))).abs() < 1e-9);
        assert!((beam_gain(&spec, &beam, 180.0, 0.0) - (59.1 - 25.0)).abs() < 1e-12);
    }

    #[test]
    fn planar_pattern_peaks_at_steer() {
        let spec = ArraySpec::rx_preset().with_planar_pattern();
        assert_eq!(spec.pattern_model, PatternModel::UniformPlanar { rows: 8, cols: 8 });
        let beam = Beam { index: 0, azimuth_deg: 20.0, elevation_deg: 10.0, beamwidth_3db_deg: 13.0 };
        let peak = beam_gain(&spec, &beam, 20.0, 10.0);
        assert!((peak - 47.0).abs() < 1e-9);
        for az in -90..=90 {
            assert!(beam_gain(&spec, &beam, az as f64, 10.0) <= peak + 1e-9);
        }
    }

    proptest! {
        #[test]
        fn half_beamwidth_is_minus_3db(bw in 5.0f64..90.0, az in -45.0f64..45.0) {
            let spec = ArraySpec { beamwidth_3db_deg: bw, ..ArraySpec::rx_preset() };
            let beam = Beam { index: 0, azimuth_deg: az, elevation_deg: 0.0, beamwidth_3db_deg: bw };
            let g0 = beam_gain(&spec, &beam, az, 0.0);
            let g = beam_gain(&spec, &beam, az + bw / 2.0, 0.0);
            prop_assert!((g0 - g - 3.0).abs() < 0.02);
        }

        #[test]
        fn symmetric_and_monotone(off in 0.0f64..13.0, d in 0.0f64..5.0) {
            let spec = ArraySpec::rx_preset();
            let beam = Beam { index: 0, azimuth_deg: 10.0, elevation_deg: 0.0, beamwidth_3db_deg: 13.0 };
            let plus = beam_gain(&spec, &beam, 10.0 + off, 0.0);
            let minus = beam_gain(&spec, &beam, 10.0 - off, 0.0);
            prop_assert!((plus - minus).abs() < 1e-9);
            prop_assert!(beam_gain(&spec, &beam, 10.0 + off + d, 0.0) <= plus + 1e-12);
        }
    }

    #[test]
    fn argmax_on_grid_is_pointing() {
        let spec = ArraySpec::rx_preset();
        let cb = build_rx_codebook(&spec);
        for b in cb.beams() {
            let mut best = (f64::NEG_INFINITY, 0.0, 0.0);
            for el in -30..=30 {
                for az in -60..=60 {
                    // grid includes the pointing direction via offset rounding
                    let (a, e) = (b.azimuth_deg + (az as f64 - b.azimuth_deg.round()), el as f64);
                    let g = beam_gain(&spec, b, a, e);
                    if g > best.0 {
                        best = (g, a, e);
                    }
                }
            }
            assert!((best.1 - b.azimuth_deg).abs() < 1e-9 && (best.2 - b.elevation_deg).abs() < 1e-9);
        }
    }
}
