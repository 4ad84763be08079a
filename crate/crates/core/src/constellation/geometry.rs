use serde::{Deserialize, Serialize};

use super::{EARTH_RADIUS_KM, LIGHT_SPEED_KM_S};
use crate::num::{Real, Vec3};

/// A location on (or above) the spherical Earth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Real + Deserialize<'de>"))]
pub struct GroundPoint<T> {
    pub latitude_deg: T,
    pub longitude_deg: T,
    #[serde(default)]
    pub altitude_km: T,
}

impl<T: Real> GroundPoint<T> {
    pub fn new(latitude_deg: T, longitude_deg: T) -> Self {
        Self {
            latitude_deg,
            longitude_deg,
            altitude_km: T::zero(),
        }
    }

    pub fn is_valid(&self) -> bool {
        let (lat, lon) = (self.latitude_deg, self.longitude_deg);
        lat >= T::lit(-90.0)
            && lat <= T::lit(90.0)
            && lon >= T::lit(-180.0)
            && lon <= T::lit(180.0)
            && self.altitude_km >= T::zero()
    }

    /// Earth-fixed Cartesian position, km.
    pub fn ecef(&self) -> Vec3<T> {
        let r = T::lit(EARTH_RADIUS_KM) + self.altitude_km;
        let (slat, clat) = self.latitude_deg.to_radians().sin_cos();
        let (slon, clon) = self.longitude_deg.to_radians().sin_cos();
        Vec3::new(r * clat * clon, r * clat * slon, r * slat)
    }

    /// Point reached by travelling `distance_deg` of great-circle arc along `bearing_deg`.
    pub fn destination(&self, bearing_deg: T, distance_deg: T) -> Self {
        let lat1 = self.latitude_deg.to_radians();
        let lon1 = self.longitude_deg.to_radians();
        let d = distance_deg.to_radians();
        let b = bearing_deg.to_radians();
        let lat2 = (lat1.sin() * d.cos() + lat1.cos() * d.sin() * b.cos()).asin();
        let lon2 = lon1 + (b.sin() * d.sin() * lat1.cos()).atan2(d.cos() - lat1.sin() * lat2.sin());
        let mut lon = lon2.to_degrees();
        let full = T::lit(360.0);
        let half = T::lit(180.0);
        while lon > half {
            lon -= full;
        }
        while lon < -half {
            lon += full;
        }
        Self {
            latitude_deg: lat2.to_degrees(),
            longitude_deg: lon,
            altitude_km: self.altitude_km,
        }
    }
}

/// Elevation of `sat` above the local horizon at `ground`, degrees in [-90, 90].
pub fn elevation_deg<T: Real>(sat: &Vec3<T>, ground: &GroundPoint<T>) -> T {
    let g = ground.ecef();
    let up = g.scale(T::one() / g.norm());
    let los = sat.sub(&g);
    let range = los.norm();
    if range <= T::zero() {
        return T::lit(90.0);
    }
    let s = (up.dot(&los) / range).max(-T::one()).min(T::one());
    s.asin().to_degrees()
}

/// One-way propagation delay over the slant range, milliseconds.
pub fn access_delay_ms<T: Real>(sat: &Vec3<T>, ground: &GroundPoint<T>) -> T {
    sat.distance(&ground.ecef()) / T::lit(LIGHT_SPEED_KM_S) * T::lit(1000.0)
}

/// Propagation delay between two points in space, milliseconds.
pub fn link_delay_ms<T: Real>(a: &Vec3<T>, b: &Vec3<T>) -> T {
    a.distance(b) / T::lit(LIGHT_SPEED_KM_S) * T::lit(1000.0)
}
