//! Circular Keplerian orbit over a rotating spherical Earth, and ground
//! station visibility.
//!
//! Fidelity limits: no J2, drag, refraction or ellipsoid. Pass timing is
//! deterministic and good to the mission-planning level.

use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::ops::{Add, Mul, Sub};

use crate::error::DomainError;
use crate::scenario::{GroundStation, OrbitSpec};
use crate::window;

pub const EARTH_RADIUS_KM: f64 = 6378.137;
/// Earth gravitational parameter, km^3/s^2.
pub const MU_EARTH_KM3_S2: f64 = 398_600.441_8;
pub const SIDEREAL_DAY_S: f64 = 86_164.090_5;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn norm(self) -> f64 {
        libm::sqrt(self.dot(self))
    }

    /// Rotation about +z by `angle` radians.
    pub fn rotate_z(self, angle: f64) -> Vec3 {
        let (s, c) = (libm::sin(angle), libm::cos(angle));
        Vec3::new(c * self.x - s * self.y, s * self.x + c * self.y, self.z)
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
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

fn rad(deg: f64) -> f64 {
    deg * PI / 180.0
}

fn deg(rad: f64) -> f64 {
    rad * 180.0 / PI
}

pub(crate) fn period_unchecked(altitude_km: f64) -> f64 {
    let a = EARTH_RADIUS_KM + altitude_km;
    2.0 * PI * libm::sqrt(a * a * a / MU_EARTH_KM3_S2)
}

/// Two-body period of a circular orbit at `altitude_km`, in seconds.
pub fn orbital_period(altitude_km: f64) -> Result<f64, DomainError> {
    if !(altitude_km > 0.0) {
        return Err(DomainError::NonPositiveAltitude(altitude_km));
    }
    Ok(period_unchecked(altitude_km))
}

/// Argument of latitude at `t`, radians (unwrapped).
fn orbit_angle(orbit: &OrbitSpec, t: f64) -> f64 {
    rad(orbit.initial_true_anomaly_deg) + 2.0 * PI * t / period_unchecked(orbit.altitude_km)
}

/// Earth rotation angle at simulation time `t`.
pub fn earth_rotation_angle(orbit: &OrbitSpec, t: f64) -> f64 {
    2.0 * PI * (orbit.epoch_s + t) / SIDEREAL_DAY_S
}

/// Inertial position, km.
pub fn propagate_inertial(orbit: &OrbitSpec, t: f64) -> Vec3 {
    let a = EARTH_RADIUS_KM + orbit.altitude_km;
    let u = orbit_angle(orbit, t);
    let (su, cu) = (libm::sin(u), libm::cos(u));
    let (si, ci) = (libm::sin(rad(orbit.inclination_deg)), libm::cos(rad(orbit.inclination_deg)));
    let (so, co) = (libm::sin(rad(orbit.raan_deg)), libm::cos(rad(orbit.raan_deg)));
    Vec3::new(a * (co * cu - so * su * ci), a * (so * cu + co * su * ci), a * su * si)
}

/// Earth-fixed position, km.
pub fn propagate(orbit: &OrbitSpec, t: f64) -> Vec3 {
    propagate_inertial(orbit, t).rotate_z(-earth_rotation_angle(orbit, t))
}

/// Earth-fixed station position on the spherical Earth, km.
pub fn station_position(station: &GroundStation) -> Vec3 {
    let r = EARTH_RADIUS_KM + station.altitude_m / 1000.0;
    let (lat, lon) = (rad(station.latitude_deg), rad(station.longitude_deg));
    Vec3::new(r * libm::cos(lat) * libm::cos(lon), r * libm::cos(lat) * libm::sin(lon), r * libm::sin(lat))
}

/// Elevation above the local horizontal (degrees) and slant range (km).
pub fn elevation_and_range(sat_position: Vec3, station: &GroundStation) -> (f64, f64) {
    let site = station_position(station);
    let rho = sat_position - site;
    let range = rho.norm();
    let up = site * (1.0 / site.norm());
    let sin_el = (rho.dot(up) / range).clamp(-1.0, 1.0);
    (deg(libm::asin(sin_el)), range)
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GeoSample {
    pub t: f64,
    pub sat_position: Vec3,
    pub elevation_deg: f64,
    pub slant_range_km: f64,
}

pub fn sample(orbit: &OrbitSpec, station: &GroundStation, t: f64) -> GeoSample {
    let sat_position = propagate(orbit, t);
    let (elevation_deg, slant_range_km) = elevation_and_range(sat_position, station);
    GeoSample { t, sat_position, elevation_deg, slant_range_km }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PassWindow {
    pub station: String,
    pub t_start: f64,
    pub t_end: f64,
    pub max_elevation_deg: f64,
    pub samples: Vec<GeoSample>,
}

impl PassWindow {
    pub fn duration_s(&self) -> f64 {
        self.t_end - self.t_start
    }

    pub fn min_slant_range_km(&self) -> f64 {
        self.samples.iter().map(|s| s.slant_range_km).fold(f64::INFINITY, f64::min)
    }

    pub fn contains(&self, t0: f64, t1: f64) -> bool {
        self.t_start <= t0 && t1 <= self.t_end
    }
}

/// Visibility windows of `station` within `[t0, t1]`, sorted and disjoint.
///
/// Elevation is sampled every `step` seconds and each edge is bisected to
/// 0.1 s. Edge samples sit on the visible side, so every sample satisfies
/// the station's elevation mask.
pub fn find_passes(orbit: &OrbitSpec, station: &GroundStation, t0: f64, t1: f64, step: f64) -> Vec<PassWindow> {
    if !(t0 < t1) || !(step > 0.0) {
        return Vec::new();
    }
    let visible = |t: f64| sample(orbit, station, t).elevation_deg >= station.min_elevation_deg;
    window::find_runs(t0, t1, step, visible)
        .into_iter()
        .map(|run| {
            let mut samples = Vec::with_capacity(run.interior.len() + 2);
            samples.push(sample(orbit, station, run.start));
            samples.extend(run.interior.iter().map(|&t| sample(orbit, station, t)));
            samples.push(sample(orbit, station, run.end));
            let max_elevation_deg = samples.iter().map(|s| s.elevation_deg).fold(f64::NEG_INFINITY, f64::max);
            PassWindow { station: station.name.clone(), t_start: run.start, t_end: run.end, max_elevation_deg, samples }
        })
        .collect()
}
