//! GPS track import.
//!
//! Track files are CSV with one fix per row:
//! `gps_time_s, lat_deg, lon_deg, alt_m, speed_mps, heading_deg`, the
//! heading being a compass bearing (clockwise from north). Fixes are
//! projected onto a local tangent plane with an equirectangular projection
//! about an origin fix, x east and y north. Altitude is not used: scenes
//! sit on a flat ground plane.

use std::io::Read;
use std::path::Path;

use serde::Deserialize;
use v2vsound_core::geom::{wrap_deg, Vec3};
use v2vsound_core::scenario::{GeoTrack, TrackSample};

use crate::error::{Error, Result};

/// Equatorial radius of the WGS-84 ellipsoid, m.
pub const EARTH_RADIUS_M: f64 = 6_378_137.0;

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
pub struct GpsFix {
    pub gps_time_s: f64,
    pub lat_deg: f64,
    pub lon_deg: f64,
    pub alt_m: f64,
    pub speed_mps: f64,
    pub heading_deg: f64,
}

pub fn read_fixes<R: Read>(reader: R) -> std::result::Result<Vec<GpsFix>, csv::Error> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let fix: (f64, f64, f64, f64, f64, f64) = rec.deserialize(None)?;
        out.push(GpsFix {
            gps_time_s: fix.0,
            lat_deg: fix.1,
            lon_deg: fix.2,
            alt_m: fix.3,
            speed_mps: fix.4,
            heading_deg: fix.5,
        });
    }
    Ok(out)
}

pub fn read_fixes_file(path: &Path) -> Result<Vec<GpsFix>> {
    let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_fixes(f).map_err(|source| Error::Csv {
        path: path.to_path_buf(),
        source,
    })
}

/// East/north offset of `(lat, lon)` from `origin`, meters.
pub fn project(origin: (f64, f64), lat_deg: f64, lon_deg: f64) -> Vec3 {
    let lat0 = origin.0.to_radians();
    let x = EARTH_RADIUS_M * (lon_deg - origin.1).to_radians() * lat0.cos();
    let y = EARTH_RADIUS_M * (lat_deg - origin.0).to_radians();
    Vec3::new(x, y, 0.0)
}

/// Build a scene-time track from fixes; scene time is GPS time minus
/// `epoch_s`.
pub fn fixes_to_track(fixes: &[GpsFix], origin: (f64, f64), epoch_s: f64, rate_hz: f64) -> v2vsound_core::Result<GeoTrack> {
    let samples = fixes
        .iter()
        .map(|f| {
            // compass bearing to counter-clockwise azimuth from east
            let az = wrap_deg(90.0 - f.heading_deg);
            TrackSample {
                t_s: f.gps_time_s - epoch_s,
                position: project(origin, f.lat_deg, f.lon_deg),
                velocity: Vec3::from_az_el(az, 0.0) * f.speed_mps,
                heading_deg: az,
            }
        })
        .collect();
    GeoTrack::new(samples, rate_hz)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn origin_projects_to_zero() {
        let p = project((40.0, -74.0), 40.0, -74.0);
        assert_eq!(p, Vec3::ZERO);
    }

    #[test]
    fn one_millidegree_north_and_east() {
        let p = project((40.0, -74.0), 40.001, -73.999);
        let k = EARTH_RADIUS_M * 1e-3 * std::f64::consts::PI / 180.0;
        assert!((p.y - k).abs() < 1e-9);
        assert!((p.x - k * 40f64.to_radians().cos()).abs() < 1e-9);
    }

    #[test]
    fn reads_csv_and_converts_heading() {
        let text = "gps_time_s,lat_deg,lon_deg,alt_m,speed_mps,heading_deg\n\
                    100.0,40.0,-74.0,10,0,90\n\
                    101.0,40.0,-73.9999,10,8.5,90\n";
        let fixes = read_fixes(text.as_bytes()).unwrap();
        assert_eq!(fixes.len(), 2);
        let track = fixes_to_track(&fixes, (40.0, -74.0), 100.0, 14.0).unwrap();
        let s = track.samples();
        assert_eq!(s[0].t_s, 0.0);
        assert_eq!(s[1].t_s, 1.0);
        // due east: heading 90 compass is azimuth 0
        assert!(s[1].heading_deg.abs() < 1e-12);
        assert!((s[1].velocity.x - 8.5).abs() < 1e-12);
        assert!(s[1].position.x > 8.0 && s[1].position.x < 9.0);
    }

    #[test]
    fn malformed_row_is_an_error() {
        let text = "t,lat,lon,alt,speed,heading\n1,2,3\n";
        assert!(read_fixes(text.as_bytes()).is_err());
    }
}
