//! Spherical-Earth geometry: epicentral distance, spherical caps, study regions.

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::real::Real;

/// IUGG mean Earth radius in km.
pub const EARTH_RADIUS_KM: f64 = 6371.0088;

/// A point on the Earth's surface in degrees.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Point<T = f64> {
    pub lat: T,
    pub lon: T,
}

impl<T: Real> Point<T> {
    /// Validates latitude and normalizes longitude into `[-180, 180)`.
    pub fn new(lat: T, lon: T) -> Result<Self> {
        let ninety = T::lit(90.0);
        if !lat.is_finite() || !lon.is_finite() {
            return Err(Error::arg("coordinates must be finite"));
        }
        if lat < -ninety || lat > ninety {
            return Err(Error::arg(format!("latitude {lat} outside [-90, 90]")));
        }
        Ok(Point {
            lat,
            lon: normalize_lon(lon),
        })
    }

    pub fn to_unit(self) -> UnitVec<T> {
        let (slat, clat) = self.lat.to_radians().sin_cos();
        let (slon, clon) = self.lon.to_radians().sin_cos();
        UnitVec([clat * clon, clat * slon, slat])
    }
}

fn normalize_lon<T: Real>(lon: T) -> T {
    let full = T::lit(360.0);
    let half = T::lit(180.0);
    let mut x = (lon + half) % full;
    if x < T::zero() {
        x = x + full;
    }
    // `%` can round up to exactly 360 for tiny negative inputs.
    if x >= full {
        x = x - full;
    }
    x - half
}

/// Great-circle distance in km on a sphere of radius [`EARTH_RADIUS_KM`] (haversine form).
pub fn great_circle_km<T: Real>(a: Point<T>, b: Point<T>) -> T {
    let two = T::lit(2.0);
    let dlat = (b.lat - a.lat).to_radians();
    let dlon = (b.lon - a.lon).to_radians();
    let h = (dlat / two).sin().powi(2)
        + a.lat.to_radians().cos() * b.lat.to_radians().cos() * (dlon / two).sin().powi(2);
    let h = h.min(T::one()).max(T::zero());
    two * T::lit(EARTH_RADIUS_KM) * h.sqrt().asin()
}

/// Area of a spherical cap with the given geodesic radius.
pub fn cap_area_km2<T: Real>(radius_km: T) -> Result<T> {
    let r = T::lit(EARTH_RADIUS_KM);
    if !radius_km.is_finite() || radius_km < T::zero() {
        return Err(Error::arg(format!(
            "cap radius must be >= 0, got {radius_km}"
        )));
    }
    if radius_km > T::PI() * r * (T::one() + T::epsilon()) {
        return Err(Error::arg(format!(
            "cap radius {radius_km} exceeds half the Earth's circumference"
        )));
    }
    let two = T::lit(2.0);
    // 1 - cos(x) = 2 sin^2(x/2) avoids cancellation for small caps.
    let half = radius_km / r / two;
    Ok(two * T::PI() * r * r * two * half.sin().powi(2))
}

pub fn sphere_area_km2<T: Real>() -> T {
    let r = T::lit(EARTH_RADIUS_KM);
    T::lit(4.0) * T::PI() * r * r
}

/// Cartesian unit vector for a surface point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UnitVec<T = f64>(pub [T; 3]);

impl<T: Real> UnitVec<T> {
    pub fn dot(&self, o: &UnitVec<T>) -> T {
        self.0[0] * o.0[0] + self.0[1] * o.0[1] + self.0[2] * o.0[2]
    }

    fn chord2(&self, o: &UnitVec<T>) -> T {
        let d0 = self.0[0] - o.0[0];
        let d1 = self.0[1] - o.0[1];
        let d2 = self.0[2] - o.0[2];
        d0 * d0 + d1 * d1 + d2 * d2
    }

    pub fn to_point(self) -> Point<T> {
        let [x, y, z] = self.0;
        let lat = z.max(-T::one()).min(T::one()).asin().to_degrees();
        let lon = y.atan2(x).to_degrees();
        Point {
            lat,
            lon: normalize_lon(lon),
        }
    }
}

/// Closed spherical cap: every point within `radius_km` great-circle distance of `center`.
#[derive(Clone, Copy, Debug)]
pub struct Cap<T = f64> {
    center: UnitVec<T>,
    radius_km: T,
    max_chord2: T,
}

impl<T: Real> Cap<T> {
    pub fn new(center: Point<T>, radius_km: T) -> Self {
        let theta = radius_km / T::lit(EARTH_RADIUS_KM);
        let chord = T::lit(2.0) * (theta / T::lit(2.0)).min(T::FRAC_PI_2()).sin();
        Cap {
            center: center.to_unit(),
            radius_km,
            max_chord2: chord * chord,
        }
    }

    pub fn radius_km(&self) -> T {
        self.radius_km
    }

    pub fn center(&self) -> UnitVec<T> {
        self.center
    }

    /// Chord length is monotone in arc length, so the comparison is exact up to rounding.
    pub fn contains_unit(&self, u: &UnitVec<T>) -> bool {
        self.center.chord2(u) <= self.max_chord2
    }

    pub fn contains(&self, p: Point<T>) -> bool {
        self.contains_unit(&p.to_unit())
    }
}

/// Latitude-longitude box, `[lat_min, lat_max) x [lon_min, lon_max)`; the
/// north pole is included when `lat_max = 90`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LatLonBox {
    pub lat_min: f64,
    pub lat_max: f64,
    pub lon_min: f64,
    pub lon_max: f64,
}

impl LatLonBox {
    pub fn new(lat_min: f64, lat_max: f64, lon_min: f64, lon_max: f64) -> Result<Self> {
        let ok = (-90.0..=90.0).contains(&lat_min)
            && (-90.0..=90.0).contains(&lat_max)
            && lat_min < lat_max
            && (-180.0..=180.0).contains(&lon_min)
            && (-180.0..=180.0).contains(&lon_max)
            && lon_min < lon_max;
        if !ok {
            return Err(Error::arg(format!(
                "invalid lat-lon box [{lat_min}, {lat_max}) x [{lon_min}, {lon_max})"
            )));
        }
        Ok(LatLonBox {
            lat_min,
            lat_max,
            lon_min,
            lon_max,
        })
    }

    pub fn contains(&self, p: Point) -> bool {
        let lat_ok = p.lat >= self.lat_min
            && (p.lat < self.lat_max || (self.lat_max == 90.0 && p.lat == 90.0));
        let lon_ok = p.lon >= self.lon_min && p.lon < self.lon_max;
        lat_ok && lon_ok
    }

    pub fn area_km2(&self) -> f64 {
        let r = EARTH_RADIUS_KM;
        r * r
            * (self.lon_max - self.lon_min).to_radians()
            * (self.lat_max.to_radians().sin() - self.lat_min.to_radians().sin())
    }

    /// Area-uniform sample.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        let z0 = self.lat_min.to_radians().sin();
        let z1 = self.lat_max.to_radians().sin();
        let z = z0 + (z1 - z0) * rng.random::<f64>();
        let lon = self.lon_min + (self.lon_max - self.lon_min) * rng.random::<f64>();
        Point {
            lat: z
                .clamp(-1.0, 1.0)
                .asin()
                .to_degrees()
                .clamp(self.lat_min, self.lat_max),
            lon: lon.min(self.lon_max).max(self.lon_min),
        }
    }

    fn overlaps(&self, o: &LatLonBox) -> bool {
        self.lat_min < o.lat_max
            && o.lat_min < self.lat_max
            && self.lon_min < o.lon_max
            && o.lon_min < self.lon_max
    }
}

/// Spatial extent of a study.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Region {
    GlobalSphere,
    Cap { center: Point, radius_km: f64 },
    Box(LatLonBox),
}

impl Region {
    pub fn area_km2(&self) -> f64 {
        match self {
            Region::GlobalSphere => sphere_area_km2(),
            Region::Cap { radius_km, .. } => {
                cap_area_km2(*radius_km).expect("validated cap radius")
            }
            Region::Box(b) => b.area_km2(),
        }
    }

    pub fn contains(&self, p: Point) -> bool {
        match self {
            Region::GlobalSphere => true,
            Region::Cap { center, radius_km } => Cap::new(*center, *radius_km).contains(p),
            Region::Box(b) => b.contains(p),
        }
    }

    /// Area-uniform sample from the region.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        match self {
            Region::GlobalSphere => LatLonBox {
                lat_min: -90.0,
                lat_max: 90.0,
                lon_min: -180.0,
                lon_max: 180.0,
            }
            .sample(rng),
            Region::Box(b) => b.sample(rng),
            Region::Cap { center, radius_km } => sample_cap(*center, *radius_km, rng),
        }
    }
}

fn sample_cap<R: Rng + ?Sized>(center: Point, radius_km: f64, rng: &mut R) -> Point {
    // Uniform on the cap about the north pole, then rotated onto `center`.
    let cos_max = (radius_km / EARTH_RADIUS_KM).cos();
    let z = 1.0 - (1.0 - cos_max) * rng.random::<f64>();
    let phi = std::f64::consts::TAU * rng.random::<f64>();
    let s = (1.0 - z * z).max(0.0).sqrt();
    let local = [s * phi.cos(), s * phi.sin(), z];

    let colat = (90.0 - center.lat).to_radians();
    let lon = center.lon.to_radians();
    let (sc, cc) = colat.sin_cos();
    let (sl, cl) = lon.sin_cos();
    // Rotate about y by colatitude, then about z by longitude.
    let x1 = cc * local[0] + sc * local[2];
    let z1 = -sc * local[0] + cc * local[2];
    let y1 = local[1];
    let p = UnitVec([cl * x1 - sl * y1, sl * x1 + cl * y1, z1]).to_point();
    // Rounding can leave the sample a hair outside the cap.
    if great_circle_km(center, p) > radius_km {
        center
    } else {
        p
    }
}

/// Checks that `cells` are pairwise disjoint and tile `region` by area.
pub fn check_partition(cells: &[LatLonBox], region: &Region) -> Result<()> {
    for (i, a) in cells.iter().enumerate() {
        for (j, b) in cells.iter().enumerate().skip(i + 1) {
            if a.overlaps(b) {
                return Err(Error::Partition(format!("cells {i} and {j} overlap")));
            }
        }
    }
    let total: f64 = cells.iter().map(LatLonBox::area_km2).sum();
    let target = region.area_km2();
    if (total - target).abs() > 1e-9 * target.max(1.0) {
        return Err(Error::Partition(format!(
            "cells cover {total:.6} km^2 but the region has {target:.6} km^2"
        )));
    }
    Ok(())
}
