//! Frames and small vector helpers.
//!
//! All frames are right-handed with z up. In a vehicle frame x points
//! forward and y to the left; the world frame is a local tangent plane
//! (x east, y north). Azimuth is measured counterclockwise from +x,
//! elevation upward from the horizontal plane, both in degrees.

use core::ops::{Add, AddAssign, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3::new(0.0, 0.0, 0.0);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(self, o: Vec3) -> Vec3 {
        Vec3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn norm(self) -> f64 {
        libm::sqrt(self.dot(self))
    }

    /// Unit vector, or `None` for a (near) zero vector.
    pub fn normalized(self) -> Option<Vec3> {
        let n = self.norm();
        if n > 1e-12 {
            Some(self * (1.0 / n))
        } else {
            None
        }
    }

    /// Rotate about +z by `deg` degrees.
    pub fn rotate_z(self, deg: f64) -> Vec3 {
        let (s, c) = libm::sincos(deg.to_radians());
        Vec3::new(c * self.x - s * self.y, s * self.x + c * self.y, self.z)
    }

    pub fn from_az_el(az_deg: f64, el_deg: f64) -> Vec3 {
        let (sa, ca) = libm::sincos(az_deg.to_radians());
        let (se, ce) = libm::sincos(el_deg.to_radians());
        Vec3::new(ce * ca, ce * sa, se)
    }

    pub fn azimuth_deg(self) -> f64 {
        libm::atan2(self.y, self.x).to_degrees()
    }

    pub fn elevation_deg(self) -> f64 {
        libm::atan2(self.z, libm::hypot(self.x, self.y)).to_degrees()
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl AddAssign for Vec3 {
    fn add_assign(&mut self, o: Vec3) {
        *self = *self + o;
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, k: f64) -> Vec3 {
        Vec3::new(self.x * k, self.y * k, self.z * k)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

/// Wrap an angle in degrees to (-180, 180].
pub fn wrap_deg(a: f64) -> f64 {
    let mut w = libm::fmod(a, 360.0);
    if w <= -180.0 {
        w += 360.0;
    } else if w > 180.0 {
        w -= 360.0;
    }
    w
}

/// Great-circle angle in degrees between two directions given as az/el.
pub fn angular_offset_deg(az1: f64, el1: f64, az2: f64, el2: f64) -> f64 {
    let a = Vec3::from_az_el(az1, el1);
    let b = Vec3::from_az_el(az2, el2);
    // atan2 form stays accurate near 0 and 180 degrees
    libm::atan2(a.cross(b).norm(), a.dot(b)).to_degrees()
}

/// Solid box resting on the ground plane, yawed about z.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrientedBox {
    /// Center of the footprint at ground level.
    pub center: Vec3,
    pub heading_deg: f64,
    pub length: f64,
    pub width: f64,
    pub height: f64,
}

impl OrientedBox {
    fn to_local(&self, p: Vec3) -> Vec3 {
        (p - self.center).rotate_z(-self.heading_deg)
    }

    /// True when the open segment `a`-`b` passes through the box interior.
    pub fn intersects_segment(&self, a: Vec3, b: Vec3) -> bool {
        let pa = self.to_local(a);
        let pb = self.to_local(b);
        let d = pb - pa;
        let lo = [-self.length / 2.0, -self.width / 2.0, 0.0];
        let hi = [self.length / 2.0, self.width / 2.0, self.height];
        let o = [pa.x, pa.y, pa.z];
        let dir = [d.x, d.y, d.z];
        let (mut t0, mut t1) = (0.0_f64, 1.0_f64);
        for k in 0..3 {
            if dir[k].abs() < 1e-15 {
                if o[k] <= lo[k] || o[k] >= hi[k] {
                    return false;
                }
            } else {
                let mut ta = (lo[k] - o[k]) / dir[k];
                let mut tb = (hi[k] - o[k]) / dir[k];
                if ta > tb {
                    core::mem::swap(&mut ta, &mut tb);
                }
                t0 = t0.max(ta);
                t1 = t1.min(tb);
                if t0 >= t1 {
                    return false;
                }
            }
        }
        // require a non-grazing overlap
        t1 - t0 > 1e-9
    }

    /// The four vertical faces as panels with outward normals.
    pub fn faces(&self) -> [Panel; 4] {
        let hl = self.length / 2.0;
        let hw = self.width / 2.0;
        let corner = |x: f64, y: f64| self.center + Vec3::new(x, y, 0.0).rotate_z(self.heading_deg);
        let fl = corner(hl, hw);
        let fr = corner(hl, -hw);
        let rl = corner(-hl, hw);
        let rr = corner(-hl, -hw);
        let z = (0.0, self.height);
        // Counterclockwise traversal seen from above puts the outward
        // normal on the right of each edge.
        [
            Panel::one_sided(fr, fl, z.0, z.1),
            Panel::one_sided(fl, rl, z.0, z.1),
            Panel::one_sided(rl, rr, z.0, z.1),
            Panel::one_sided(rr, fr, z.0, z.1),
        ]
    }
}

/// Vertical rectangle spanning the ground segment `start`-`end` between
/// `z_min` and `z_max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Panel {
    pub start: Vec3,
    pub end: Vec3,
    pub z_min: f64,
    pub z_max: f64,
    /// Horizontal unit normal.
    pub normal: Vec3,
    /// One-sided panels only reflect on the `normal` side.
    pub one_sided: bool,
}

impl Panel {
    /// Two-sided panel; the normal points to the left of `start`→`end`.
    pub fn two_sided(start: Vec3, end: Vec3, z_min: f64, z_max: f64) -> Self {
        let e = end - start;
        let normal = Vec3::new(-e.y, e.x, 0.0).normalized().unwrap_or(Vec3::new(1.0, 0.0, 0.0));
        Self {
            start: Vec3::new(start.x, start.y, 0.0),
            end: Vec3::new(end.x, end.y, 0.0),
            z_min,
            z_max,
            normal,
            one_sided: false,
        }
    }

    /// One-sided panel reflecting on the right of `start`→`end`.
    pub fn one_sided(start: Vec3, end: Vec3, z_min: f64, z_max: f64) -> Self {
        let mut p = Self::two_sided(start, end, z_min, z_max);
        p.normal = -p.normal;
        p.one_sided = true;
        p
    }

    fn signed_distance(&self, p: Vec3) -> f64 {
        (p - self.start).dot(self.normal)
    }

    /// Mirror `p` through the panel plane.
    pub fn mirror(&self, p: Vec3) -> Vec3 {
        p - self.normal * (2.0 * self.signed_distance(p))
    }

    /// Specular reflection point for a route `a` → panel → `b`, if the
    /// image-method point lands on the panel.
    pub fn reflection_point(&self, a: Vec3, b: Vec3) -> Option<Vec3> {
        let da = self.signed_distance(a);
        let db = self.signed_distance(b);
        let same_side = (da > 1e-9 && db > 1e-9) || (!self.one_sided && da < -1e-9 && db < -1e-9);
        if !same_side {
            return None;
        }
        let image = self.mirror(b);
        let di = self.signed_distance(image);
        let u = da / (da - di);
        let q = a + (image - a) * u;
        let e = self.end - self.start;
        let len2 = e.dot(e);
        if len2 <= 0.0 {
            return None;
        }
        let along = (Vec3::new(q.x, q.y, 0.0) - self.start).dot(e) / len2;
        if !(0.0..=1.0).contains(&along) || q.z < self.z_min || q.z > self.z_max {
            return None;
        }
        Some(q)
    }
}
