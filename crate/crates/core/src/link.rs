//! RF link margin and optical gate checks.
//!
//! RF closure compares the received C/N0 against a per-band requirement
//! plus margin; the achievable rate is the band's gross-rate cap whenever
//! the link closes. The optical terminal is modelled as a hard gate on slant
//! range and 3-sigma pointing error.

use alloc::collections::BTreeMap;

use crate::error::{DomainError, LinkError};
use crate::orbit::{GeoSample, PassWindow};
use crate::scenario::{Band, FrontEnd, OpticalTerminal};

pub const SPEED_OF_LIGHT_M_S: f64 = 299_792_458.0;
/// -10*log10(k_B), dBW/K/Hz.
pub const BOLTZMANN_DB: f64 = 228.6;

/// Ground-segment and budget figures for one RF band.
#[derive(Debug, Clone, PartialEq)]
pub struct RfLinkParams {
    pub tx_power_dbw: f64,
    /// Overrides the spacecraft antenna gain of the channel when set.
    pub tx_gain_dbi: Option<f64>,
    pub rx_gain_dbi: f64,
    pub system_losses_db: f64,
    pub required_margin_db: f64,
    /// Ground G/T, dB/K.
    pub rx_figure_of_merit_dbk: f64,
    pub required_cn0_dbhz: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkConfig {
    pub bands: BTreeMap<Band, RfLinkParams>,
    /// Pointing error of the laser terminal, 3-sigma degrees. Held constant
    /// for a scenario.
    pub pointing_error_3sigma_deg: f64,
}

/// One RF channel: what the spacecraft side contributes to a budget.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RfChannel {
    pub band: Band,
    pub frequency_hz: f64,
    pub max_rate_bps: f64,
    pub antenna_gain_dbi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum LimitingFactor {
    Range,
    Pointing,
    Margin,
    BandCap,
}

impl LimitingFactor {
    pub fn as_str(self) -> &'static str {
        match self {
            LimitingFactor::Range => "range",
            LimitingFactor::Pointing => "pointing",
            LimitingFactor::Margin => "margin",
            LimitingFactor::BandCap => "band-cap",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkAssessment {
    pub closed: bool,
    /// RF margin in dB relative to the required C/N0. `None` for optical.
    pub margin_db: Option<f64>,
    pub achievable_rate_bps: f64,
    pub limiting_factor: LimitingFactor,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Down,
    Up,
}

/// Free-space path loss, dB.
pub fn fspl_db(frequency_hz: f64, distance_km: f64) -> Result<f64, DomainError> {
    if !(frequency_hz > 0.0) {
        return Err(DomainError::NonPositiveFrequency(frequency_hz));
    }
    if !(distance_km > 0.0) {
        return Err(DomainError::NonPositiveDistance(distance_km));
    }
    let d_m = distance_km * 1000.0;
    Ok(20.0 * libm::log10(4.0 * core::f64::consts::PI * d_m * frequency_hz / SPEED_OF_LIGHT_M_S))
}

/// Received C/N0 minus the required C/N0, dB.
pub fn rf_margin_db(ch: &RfChannel, params: &RfLinkParams, slant_range_km: f64) -> Result<f64, LinkError> {
    let required = params.required_cn0_dbhz.ok_or(LinkError::MissingRequiredCn0(ch.band))?;
    let tx_gain = params.tx_gain_dbi.unwrap_or(ch.antenna_gain_dbi);
    let cn0 = params.tx_power_dbw + tx_gain + params.rx_gain_dbi - fspl_db(ch.frequency_hz, slant_range_km)?
        - params.system_losses_db
        + params.rx_figure_of_merit_dbk
        + BOLTZMANN_DB;
    Ok(cn0 - required)
}

pub fn rf_assess_channel(ch: &RfChannel, params: &RfLinkParams, slant_range_km: f64) -> Result<LinkAssessment, LinkError> {
    let margin = rf_margin_db(ch, params, slant_range_km)?;
    let closed = margin >= params.required_margin_db;
    Ok(LinkAssessment {
        closed,
        margin_db: Some(margin),
        achievable_rate_bps: if closed { ch.max_rate_bps } else { 0.0 },
        limiting_factor: if closed { LimitingFactor::BandCap } else { LimitingFactor::Margin },
    })
}

/// Link budget for a payload front-end at its representative frequency.
pub fn rf_assess(fe: &FrontEnd, params: &RfLinkParams, slant_range_km: f64) -> Result<LinkAssessment, LinkError> {
    let ch = fe.channel().ok_or_else(|| LinkError::NoLinkFrequency(fe.id.0.clone()))?;
    rf_assess_channel(&ch, params, slant_range_km)
}

/// Hard gate on range window and pointing, both bounds inclusive. Range is
/// checked first and reported as the limiting factor when both fail.
pub fn optical_assess(
    term: &OpticalTerminal,
    slant_range_km: f64,
    pointing_error_3sigma_deg: f64,
    direction: Direction,
) -> LinkAssessment {
    let limiting = if !(term.range_min_km <= slant_range_km && slant_range_km <= term.range_max_km) {
        Some(LimitingFactor::Range)
    } else if !(pointing_error_3sigma_deg <= term.pointing_requirement_3sigma_deg) {
        Some(LimitingFactor::Pointing)
    } else {
        None
    };
    let rate = match direction {
        Direction::Down => term.downlink_max_rate_bps,
        Direction::Up => term.uplink_max_rate_bps,
    };
    LinkAssessment {
        closed: limiting.is_none(),
        margin_db: None,
        achievable_rate_bps: if limiting.is_none() { rate } else { 0.0 },
        limiting_factor: limiting.unwrap_or(LimitingFactor::BandCap),
    }
}

/// Data volume a pass can carry, bits: trapezoidal integral of the
/// achievable rate over the window's samples.
pub fn pass_capacity(window: &PassWindow, assess: impl Fn(&GeoSample) -> LinkAssessment) -> f64 {
    let rates: alloc::vec::Vec<(f64, f64)> =
        window.samples.iter().map(|s| (s.t, assess(s).achievable_rate_bps)).collect();
    rates.windows(2).map(|w| 0.5 * (w[0].1 + w[1].1) * (w[1].0 - w[0].0)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::default_scenario;

    #[test]
    fn fspl_reference_points() {
        assert!((fspl_db(2.2e9, 1000.0).unwrap() - 159.3).abs() <= 0.1);
        assert!((fspl_db(20e9, 1000.0).unwrap() - 178.5).abs() <= 0.1);
        let d = fspl_db(2.2e9, 2000.0).unwrap() - fspl_db(2.2e9, 1000.0).unwrap();
        assert!((d - 6.02).abs() <= 0.01);
    }

    #[test]
    fn fspl_matches_engineering_form() {
        for (f_ghz, d_km) in [(0.4339, 550.0), (2.18, 1815.7), (10.475, 2705.0), (19.7, 1000.0)] {
            let eng = 92.45 + 20.0 * libm::log10(f_ghz) + 20.0 * libm::log10(d_km);
            assert!((fspl_db(f_ghz * 1e9, d_km).unwrap() - eng).abs() < 0.01);
        }
    }

    #[test]
    fn fspl_rejects_non_positive_inputs() {
        assert!(fspl_db(0.0, 10.0).is_err());
        assert!(fspl_db(1e9, 0.0).is_err());
        assert!(fspl_db(-1e9, 10.0).is_err());
    }

    #[test]
    fn margin_boundary_is_inclusive() {
        let s = default_scenario();
        let fe = s.frontend(&"FE2".into()).unwrap();
        let mut p = s.link.bands[&Band::S].clone();
        let m = rf_margin_db(&fe.channel().unwrap(), &p, 1234.5).unwrap();
        p.required_margin_db = m;
        let a = rf_assess(fe, &p, 1234.5).unwrap();
        assert!(a.closed);
        assert_eq!(a.achievable_rate_bps, 1.152e6);
    }

    #[test]
    fn zenith_horizon_margin_difference() {
        let s = default_scenario();
        let fe = s.frontend(&"FE2".into()).unwrap();
        let p = &s.link.bands[&Band::S];
        let horizon = 2705.0;
        let dz = rf_assess(fe, p, 550.0).unwrap().margin_db.unwrap() - rf_assess(fe, p, horizon).unwrap().margin_db.unwrap();
        // Oracle: FSPL difference 20*log10(2705/550).
        assert!((dz - 20.0 * libm::log10(horizon / 550.0)).abs() < 1e-9);
        assert!((dz - 13.8).abs() <= 0.1);
    }

    #[test]
    fn missing_cn0_is_a_config_error() {
        let s = default_scenario();
        let fe = s.frontend(&"FE3".into()).unwrap();
        let mut p = s.link.bands[&Band::X].clone();
        p.required_cn0_dbhz = None;
        assert_eq!(rf_assess(fe, &p, 1000.0), Err(LinkError::MissingRequiredCn0(Band::X)));
    }

    #[test]
    fn default_rf_links_close_from_ten_degrees() {
        let s = default_scenario();
        // Slant range at 10 deg elevation for 550 km.
        let range = 1815.7;
        for fe in &s.frontends {
            let a = rf_assess(fe, &s.link.bands[&fe.band], range).unwrap();
            assert!(a.closed, "{} does not close", fe.id);
        }
        let ttc = rf_assess_channel(&s.platform.ttc_channel(), &s.link.bands[&Band::Ttc], range).unwrap();
        assert!(ttc.closed);
        assert_eq!(ttc.achievable_rate_bps, 5e6);
    }

    #[test]
    fn optical_gate_examples() {
        let t = default_scenario().optical;
        let a = optical_assess(&t, 1000.0, 0.5, Direction::Down);
        assert!(a.closed);
        assert_eq!(a.achievable_rate_bps, 1e9);

        let a = optical_assess(&t, 1600.0, 0.5, Direction::Down);
        assert!(!a.closed);
        assert_eq!(a.limiting_factor, LimitingFactor::Range);
        assert_eq!(a.achievable_rate_bps, 0.0);

        let a = optical_assess(&t, 1000.0, 1.0, Direction::Up);
        assert!(a.closed);
        assert_eq!(a.achievable_rate_bps, 1e8);

        let a = optical_assess(&t, 1000.0, 1.2, Direction::Up);
        assert_eq!(a.limiting_factor, LimitingFactor::Pointing);

        let a = optical_assess(&t, 450.0, 1.2, Direction::Down);
        assert_eq!(a.limiting_factor, LimitingFactor::Range);
    }
}
