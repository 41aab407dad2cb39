//! Battery state of charge against payload load and solar generation.
//!
//! Loads are piecewise constant between simulation events, so a forward
//! Euler step per segment is exact. There is no charge efficiency or
//! degradation term.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::orbit::{self, EARTH_RADIUS_KM};
use crate::payload::{DeviceMode, PayloadState};
use crate::scenario::{OrbitSpec, PlatformSpec};

#[derive(Debug, Clone, PartialEq)]
pub struct GenerationModel {
    pub sunlit_power_w: f64,
    pub eclipse_modeled: bool,
    /// Fixed inertial sun direction (right ascension, declination), degrees.
    pub sun_ra_deg: f64,
    pub sun_dec_deg: f64,
}

impl GenerationModel {
    pub fn sun_direction(&self) -> orbit::Vec3 {
        let (ra, dec) = (self.sun_ra_deg.to_radians(), self.sun_dec_deg.to_radians());
        orbit::Vec3::new(libm::cos(dec) * libm::cos(ra), libm::cos(dec) * libm::sin(ra), libm::sin(dec))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyState {
    pub soc_wh: f64,
    pub t_s: f64,
    pub last_generation_w: f64,
    pub last_load_w: f64,
}

impl EnergyState {
    pub fn full(capacity_wh: f64) -> Self {
        EnergyState { soc_wh: capacity_wh, t_s: 0.0, last_generation_w: 0.0, last_load_w: 0.0 }
    }
}

/// The battery hit empty during a step; `deficit_wh` is what could not be
/// supplied.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Depletion {
    pub t_s: f64,
    pub deficit_wh: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoadProfile {
    pub components: Vec<(String, f64)>,
    pub total_w: f64,
}

/// Mode-dependent draw of every payload device plus the extra power of
/// running experiments.
pub fn total_load(state: &PayloadState) -> LoadProfile {
    let mut components = Vec::new();
    for sdr in &state.sdrs {
        let w = match sdr.mode {
            DeviceMode::Off => 0.0,
            DeviceMode::Standby => sdr.standby_power_w,
            DeviceMode::Active => sdr.active_power_w,
        };
        components.push((String::from(sdr.id.as_str()), w));
    }
    let optical = match state.optical.mode {
        DeviceMode::Off => 0.0,
        DeviceMode::Standby => state.optical.standby_power_w,
        DeviceMode::Active => state.optical.peak_power_w,
    };
    components.push((String::from("optical"), optical));
    for (id, w) in &state.active_experiments {
        components.push((format!("experiment:{id}"), *w));
    }
    let total_w = components.iter().map(|(_, w)| *w).sum();
    LoadProfile { components, total_w }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SupplyViolation {
    Peak,
    Nominal,
}

/// `Err` when the load exceeds the peak supply, or the nominal supply for a
/// sustained load. Equal to the limit is acceptable.
pub fn check_supply(load: &LoadProfile, platform: &PlatformSpec, sustained: bool) -> Result<(), SupplyViolation> {
    if load.total_w > platform.supply_peak_w {
        Err(SupplyViolation::Peak)
    } else if sustained && load.total_w > platform.supply_nominal_w {
        Err(SupplyViolation::Nominal)
    } else {
        Ok(())
    }
}

/// Advances the battery by `dt_s` at constant generation and load.
pub fn step(
    state: &EnergyState,
    generation_w: f64,
    load_w: f64,
    dt_s: f64,
    capacity_wh: f64,
) -> (EnergyState, Option<Depletion>) {
    let t_s = state.t_s + dt_s;
    let raw = state.soc_wh + (generation_w - load_w) * dt_s / 3600.0;
    let depletion = (raw < 0.0).then_some(Depletion { t_s, deficit_wh: -raw });
    let next = EnergyState {
        soc_wh: raw.clamp(0.0, capacity_wh),
        t_s,
        last_generation_w: generation_w,
        last_load_w: load_w,
    };
    (next, depletion)
}

/// Inside the cylindrical Earth shadow cast along the fixed sun direction.
pub fn in_eclipse(t: f64, orbit: &OrbitSpec, model: &GenerationModel) -> bool {
    let r = orbit::propagate_inertial(orbit, t);
    let sun = model.sun_direction();
    let along = r.dot(sun);
    along < 0.0 && (r - sun * along).norm() < EARTH_RADIUS_KM
}

pub fn generation_at(t: f64, orbit: &OrbitSpec, model: &GenerationModel) -> f64 {
    if model.eclipse_modeled && in_eclipse(t, orbit, model) {
        0.0
    } else {
        model.sunlit_power_w
    }
}
