//! Scenario parameters: platform, payload devices, orbit, ground stations and
//! experiment requests, plus the baseline parameter set and invariant checks.

use alloc::borrow::ToOwned;
use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::energy::GenerationModel;
use crate::link::{LinkConfig, RfChannel, RfLinkParams};
use crate::orbit;

const MHZ: f64 = 1e6;
const GHZ: f64 = 1e9;
const MBPS: f64 = 1e6;

/// Radio or optical band. TTC is the platform's own operations link and is
/// kept apart from the payload S-band front-end.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Band {
    Uhf,
    S,
    X,
    Ka,
    Optical,
    Ttc,
}

impl Band {
    pub const ALL: [Band; 6] = [Band::Uhf, Band::S, Band::X, Band::Ka, Band::Optical, Band::Ttc];

    pub fn label(self) -> &'static str {
        match self {
            Band::Uhf => "uhf",
            Band::S => "s",
            Band::X => "x",
            Band::Ka => "ka",
            Band::Optical => "optical",
            Band::Ttc => "ttc",
        }
    }

    pub fn from_label(label: &str) -> Option<Band> {
        Band::ALL.into_iter().find(|b| b.label().eq_ignore_ascii_case(label))
    }
}

impl fmt::Display for Band {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(transparent))]
pub struct FrontEndId(pub String);

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(transparent))]
pub struct SdrId(pub String);

macro_rules! string_id {
    ($t:ident) => {
        impl $t {
            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl From<&str> for $t {
            fn from(s: &str) -> Self {
                $t(s.to_owned())
            }
        }

        impl fmt::Display for $t {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }
    };
}

string_id!(FrontEndId);
string_id!(SdrId);

#[derive(Debug, Clone, PartialEq)]
pub struct PlatformSpec {
    pub form_factor: String,
    pub payload_mass_limit_kg: f64,
    pub payload_volume_limit_u: f64,
    /// Orbit-average power available to the payload, (low, high) W.
    pub avg_power_available_w: (f64, f64),
    /// Platform-level payload peak power figure. Metadata only; the
    /// operative cap is `supply_peak_w`.
    pub payload_peak_power_ceiling_w: f64,
    pub supply_nominal_w: f64,
    pub supply_peak_w: f64,
    pub battery_capacity_wh: f64,
    pub data_storage_bytes: u64,
    pub ttc_downlink_rate_bps: f64,
    pub ttc_frequency_hz: f64,
    pub ttc_antenna_gain_dbi: f64,
    pub duty_cycle_floor: f64,
    pub lifetime_years: f64,
    /// Minimum continuous time above `supply_nominal_w` that counts as a
    /// sustained overload.
    pub sustained_window_s: f64,
}

impl PlatformSpec {
    pub fn storage_capacity_bits(&self) -> u64 {
        self.data_storage_bytes.saturating_mul(8)
    }

    pub fn ttc_channel(&self) -> RfChannel {
        RfChannel {
            band: Band::Ttc,
            frequency_hz: self.ttc_frequency_hz,
            max_rate_bps: self.ttc_downlink_rate_bps,
            antenna_gain_dbi: self.ttc_antenna_gain_dbi,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FreqRange {
    pub low_hz: f64,
    pub high_hz: f64,
    /// Earth-to-space only; never used as the representative link frequency.
    pub uplink_only: bool,
}

impl FreqRange {
    pub fn new(low_hz: f64, high_hz: f64) -> Self {
        FreqRange { low_hz, high_hz, uplink_only: false }
    }

    pub fn uplink(low_hz: f64, high_hz: f64) -> Self {
        FreqRange { low_hz, high_hz, uplink_only: true }
    }

    pub fn center_hz(&self) -> f64 {
        0.5 * (self.low_hz + self.high_hz)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrontEnd {
    pub id: FrontEndId,
    pub band: Band,
    pub ranges: Vec<FreqRange>,
    pub max_gross_rate_bps: f64,
    pub max_bandwidth_hz: f64,
    pub antenna_gain_dbi: f64,
    pub use_case: String,
}

impl FrontEnd {
    /// Center of the lowest range that can carry a space-to-ground link.
    pub fn link_frequency_hz(&self) -> Option<f64> {
        self.ranges
            .iter()
            .filter(|r| !r.uplink_only)
            .min_by(|a, b| a.low_hz.total_cmp(&b.low_hz))
            .map(FreqRange::center_hz)
    }

    pub fn channel(&self) -> Option<RfChannel> {
        Some(RfChannel {
            band: self.band,
            frequency_hz: self.link_frequency_hz()?,
            max_rate_bps: self.max_gross_rate_bps,
            antenna_gain_dbi: self.antenna_gain_dbi,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SdrUnit {
    pub id: SdrId,
    pub slots: [FrontEndId; 2],
    pub standby_power_w: f64,
    pub active_power_w: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OpticalTerminal {
    pub standby_power_w: f64,
    pub peak_power_w: f64,
    pub downlink_wavelength_nm: f64,
    pub downlink_tx_power_w: f64,
    pub downlink_max_rate_bps: f64,
    pub uplink_wavelength_nm: f64,
    pub uplink_max_rate_bps: f64,
    pub range_min_km: f64,
    pub range_max_km: f64,
    pub pointing_requirement_3sigma_deg: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrbitSpec {
    pub altitude_km: f64,
    pub inclination_deg: f64,
    pub raan_deg: f64,
    pub initial_true_anomaly_deg: f64,
    /// Offset of simulation time zero; sets the Earth rotation phase at t = 0.
    pub epoch_s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundStation {
    pub name: String,
    pub latitude_deg: f64,
    pub longitude_deg: f64,
    pub altitude_m: f64,
    pub min_elevation_deg: f64,
    pub bands: BTreeSet<Band>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub id: String,
    /// Higher is more urgent.
    pub priority: i32,
    pub frontends: Vec<FrontEndId>,
    pub requires_optical: bool,
    /// Must run while a ground station supporting all its bands is in view
    /// with every link closed. Store-and-forward experiments leave this off.
    pub needs_contact: bool,
    pub duration_s: f64,
    pub extra_power_w: f64,
    pub data_rate_bps: f64,
    pub earliest_start_s: f64,
    pub latest_end_s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub duration_s: f64,
    pub time_step_s: f64,
    pub seed: u64,
    /// Report per-orbit duty cycles below the platform floor as violations.
    pub enforce_duty_floor: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub platform: PlatformSpec,
    pub sdrs: Vec<SdrUnit>,
    pub frontends: Vec<FrontEnd>,
    pub optical: OpticalTerminal,
    pub orbit: OrbitSpec,
    pub stations: Vec<GroundStation>,
    pub experiments: Vec<ExperimentSpec>,
    pub link: LinkConfig,
    pub generation: GenerationModel,
    pub sim: SimConfig,
}

impl Scenario {
    pub fn frontend(&self, id: &FrontEndId) -> Option<&FrontEnd> {
        self.frontends.iter().find(|f| &f.id == id)
    }

    pub fn sdr(&self, id: &SdrId) -> Option<&SdrUnit> {
        self.sdrs.iter().find(|s| &s.id == id)
    }

    /// The SDR whose slot holds `fe`.
    pub fn host_sdr(&self, fe: &FrontEndId) -> Option<&SdrUnit> {
        self.sdrs.iter().find(|s| s.slots.contains(fe))
    }

    pub fn station(&self, name: &str) -> Option<&GroundStation> {
        self.stations.iter().find(|s| s.name == name)
    }

    pub fn experiment(&self, id: &str) -> Option<&ExperimentSpec> {
        self.experiments.iter().find(|e| e.id == id)
    }

    pub fn orbital_period_s(&self) -> f64 {
        orbit::period_unchecked(self.orbit.altitude_km)
    }
}

fn frontend(
    id: &str,
    band: Band,
    ranges: Vec<FreqRange>,
    max_rate_bps: f64,
    bandwidth_hz: f64,
    gain_dbi: f64,
    use_case: &str,
) -> FrontEnd {
    FrontEnd {
        id: id.into(),
        band,
        ranges,
        max_gross_rate_bps: max_rate_bps,
        max_bandwidth_hz: bandwidth_hz,
        antenna_gain_dbi: gain_dbi,
        use_case: use_case.to_owned(),
    }
}

fn rf_params(tx_power_dbw: f64, rx_gt_dbk: f64, required_cn0_dbhz: f64) -> RfLinkParams {
    RfLinkParams {
        tx_power_dbw,
        tx_gain_dbi: None,
        rx_gain_dbi: 0.0,
        system_losses_db: 2.0,
        required_margin_db: 3.0,
        rx_figure_of_merit_dbk: rx_gt_dbk,
        required_cn0_dbhz: Some(required_cn0_dbhz),
    }
}

/// Baseline 6GStarLab parameter set with no experiment requests.
pub fn default_scenario() -> Scenario {
    let platform = PlatformSpec {
        form_factor: "6U CubeSat".to_owned(),
        payload_mass_limit_kg: 8.0,
        payload_volume_limit_u: 4.0,
        avg_power_available_w: (7.0, 20.0),
        payload_peak_power_ceiling_w: 160.0,
        supply_nominal_w: 45.0,
        supply_peak_w: 85.0,
        battery_capacity_wh: 42.0,
        data_storage_bytes: 200_000_000_000,
        ttc_downlink_rate_bps: 5.0 * MBPS,
        ttc_frequency_hz: 2200.0 * MHZ,
        ttc_antenna_gain_dbi: 6.0,
        duty_cycle_floor: 0.15,
        lifetime_years: 3.0,
        sustained_window_s: 600.0,
    };

    let frontends = vec![
        frontend(
            "FE1",
            Band::Uhf,
            vec![
                FreqRange::new(433.00 * MHZ, 434.79 * MHZ),
                FreqRange::new(863.00 * MHZ, 870.00 * MHZ),
                FreqRange::new(903.00 * MHZ, 914.20 * MHZ),
            ],
            0.05 * MBPS,
            0.125 * MHZ,
            3.0,
            "DtS IoT",
        ),
        frontend(
            "FE2",
            Band::S,
            vec![
                FreqRange::uplink(1980.00 * MHZ, 2025.00 * MHZ),
                FreqRange::new(2160.00 * MHZ, 2200.00 * MHZ),
            ],
            1.152 * MBPS,
            0.75 * MHZ,
            10.0,
            "DtS IoT NTN (n256)",
        ),
        frontend(
            "FE3",
            Band::X,
            vec![FreqRange::new(10.45 * GHZ, 10.50 * GHZ)],
            2.3 * MBPS,
            1.5 * MHZ,
            11.0,
            "Data backhauling",
        ),
        frontend(
            "FE4",
            Band::Ka,
            vec![
                FreqRange::new(19.30 * GHZ, 20.10 * GHZ),
                FreqRange::new(29.10 * GHZ, 30.00 * GHZ),
            ],
            4.6 * MBPS,
            3.0 * MHZ,
            11.0,
            "NTN (n511)",
        ),
    ];

    let sdrs = vec![
        SdrUnit {
            id: "Minerva-A".into(),
            slots: ["FE1".into(), "FE2".into()],
            standby_power_w: 10.0,
            active_power_w: 30.0,
        },
        SdrUnit {
            id: "Minerva-B".into(),
            slots: ["FE3".into(), "FE4".into()],
            standby_power_w: 10.0,
            active_power_w: 30.0,
        },
    ];

    let optical = OpticalTerminal {
        standby_power_w: 4.0,
        peak_power_w: 25.0,
        downlink_wavelength_nm: 1530.0,
        downlink_tx_power_w: 1.0,
        downlink_max_rate_bps: 1000.0 * MBPS,
        uplink_wavelength_nm: 1560.0,
        uplink_max_rate_bps: 100.0 * MBPS,
        range_min_km: 500.0,
        range_max_km: 1500.0,
        pointing_requirement_3sigma_deg: 1.0,
    };

    let orbit = OrbitSpec {
        altitude_km: 550.0,
        inclination_deg: 97.6,
        raan_deg: 0.0,
        initial_true_anomaly_deg: 0.0,
        epoch_s: 0.0,
    };

    let stations = vec![
        GroundStation {
            name: "Barcelona".to_owned(),
            latitude_deg: 41.389,
            longitude_deg: 2.113,
            altitude_m: 100.0,
            min_elevation_deg: 10.0,
            bands: [Band::Uhf, Band::S, Band::X, Band::Ka, Band::Ttc].into_iter().collect(),
        },
        GroundStation {
            name: "Montsec-OGS".to_owned(),
            latitude_deg: 42.0516,
            longitude_deg: 0.7293,
            altitude_m: 1570.0,
            min_elevation_deg: 15.0,
            bands: [Band::Optical].into_iter().collect(),
        },
    ];

    // Placeholder ground-segment figures: required C/N0 is 10*log10(rate)
    // + 10 dB, and G/T is set so every RF band closes from 10 deg elevation.
    let mut bands = BTreeMap::new();
    bands.insert(Band::Uhf, rf_params(0.0, -15.0, 57.0));
    bands.insert(Band::S, rf_params(0.0, 10.0, 70.6));
    bands.insert(Band::X, rf_params(0.0, 20.0, 73.6));
    bands.insert(Band::Ka, rf_params(0.0, 28.0, 76.6));
    bands.insert(Band::Ttc, rf_params(3.0, 10.0, 77.0));

    Scenario {
        platform,
        sdrs,
        frontends,
        optical,
        orbit,
        stations,
        experiments: Vec::new(),
        link: LinkConfig { bands, pointing_error_3sigma_deg: 0.5 },
        generation: GenerationModel {
            sunlit_power_w: 14.0,
            eclipse_modeled: false,
            sun_ra_deg: 0.0,
            sun_dec_deg: 0.0,
        },
        sim: SimConfig { duration_s: 86_400.0, time_step_s: 10.0, seed: 0, enforce_duty_floor: false },
    }
}

/// Baseline scenario plus a one-day experiment campaign that keeps the
/// payload busy for at least the duty-cycle floor in every orbit.
///
/// Each full orbit gets a 900 s store-and-forward UHF collection slot; a
/// handful of contact experiments exercise the S, X, Ka and optical links.
pub fn demo_scenario() -> Scenario {
    let mut s = default_scenario();
    s.sim.enforce_duty_floor = true;
    let period = s.orbital_period_s();
    let orbits = libm::floor(s.sim.duration_s / period) as usize;

    for k in 0..orbits {
        s.experiments.push(ExperimentSpec {
            id: format!("dts-iot-{k:02}"),
            priority: 1,
            frontends: vec!["FE1".into()],
            requires_optical: false,
            needs_contact: false,
            duration_s: 900.0,
            extra_power_w: 2.0,
            data_rate_bps: 0.02 * MBPS,
            earliest_start_s: k as f64 * period,
            latest_end_s: (k + 1) as f64 * period,
        });
    }

    let contact = |id: &str, priority: i32, fe: Option<&str>, optical: bool, duration_s: f64, extra_w: f64, rate_bps: f64| {
        ExperimentSpec {
            id: id.to_owned(),
            priority,
            frontends: fe.map(|f| vec![FrontEndId::from(f)]).unwrap_or_default(),
            requires_optical: optical,
            needs_contact: true,
            duration_s,
            extra_power_w: extra_w,
            data_rate_bps: rate_bps,
            earliest_start_s: 0.0,
            latest_end_s: 86_400.0,
        }
    };
    s.experiments.push(contact("ka-ntn-n511", 5, Some("FE4"), false, 300.0, 10.0, 1.0 * MBPS));
    s.experiments.push(contact("s-nbiot-n256", 4, Some("FE2"), false, 240.0, 5.0, 0.5 * MBPS));
    s.experiments.push(contact("x-backhaul", 3, Some("FE3"), false, 180.0, 5.0, 2.0 * MBPS));
    s.experiments.push(contact("optical-downlink", 6, None, true, 60.0, 0.0, 50.0 * MBPS));
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum IssueCode {
    SupplyOrder,
    DutyFloorRange,
    NonPositiveBattery,
    NonPositiveStorage,
    InvalidFrequencyRange,
    OverlappingRanges,
    NonPositiveRate,
    SdrPowerOrder,
    DuplicateSlot,
    DanglingFrontend,
    OpticalRangeOrder,
    NonPositivePointing,
    NonPositiveAltitude,
    AngleOutOfRange,
    LatitudeOutOfRange,
    ElevationOutOfRange,
    ExperimentDuration,
    ExperimentWindow,
    NegativeDataRate,
    TimeStep,
    SimDuration,
    DuplicateId,
}

impl IssueCode {
    pub fn as_str(self) -> &'static str {
        match self {
            IssueCode::SupplyOrder => "supply-order",
            IssueCode::DutyFloorRange => "duty-floor-range",
            IssueCode::NonPositiveBattery => "nonpositive-battery",
            IssueCode::NonPositiveStorage => "nonpositive-storage",
            IssueCode::InvalidFrequencyRange => "invalid-frequency-range",
            IssueCode::OverlappingRanges => "overlapping-ranges",
            IssueCode::NonPositiveRate => "nonpositive-rate",
            IssueCode::SdrPowerOrder => "sdr-power-order",
            IssueCode::DuplicateSlot => "duplicate-slot",
            IssueCode::DanglingFrontend => "dangling-frontend",
            IssueCode::OpticalRangeOrder => "optical-range-order",
            IssueCode::NonPositivePointing => "nonpositive-pointing",
            IssueCode::NonPositiveAltitude => "nonpositive-altitude",
            IssueCode::AngleOutOfRange => "angle-out-of-range",
            IssueCode::LatitudeOutOfRange => "latitude-out-of-range",
            IssueCode::ElevationOutOfRange => "elevation-out-of-range",
            IssueCode::ExperimentDuration => "experiment-duration",
            IssueCode::ExperimentWindow => "experiment-window",
            IssueCode::NegativeDataRate => "negative-data-rate",
            IssueCode::TimeStep => "time-step",
            IssueCode::SimDuration => "sim-duration",
            IssueCode::DuplicateId => "duplicate-id",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Issue {
    pub code: IssueCode,
    pub message: String,
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.code.as_str(), self.message)
    }
}

fn angle_ok(deg: f64) -> bool {
    (0.0..360.0).contains(&deg)
}

/// Every invariant violation in `s`. Empty iff the scenario is consistent.
pub fn validate_scenario(s: &Scenario) -> Vec<Issue> {
    let mut issues = Vec::new();
    let mut push = |code: IssueCode, message: String| issues.push(Issue { code, message });

    let p = &s.platform;
    if !(p.supply_nominal_w <= p.supply_peak_w && p.supply_peak_w <= p.payload_peak_power_ceiling_w) {
        push(
            IssueCode::SupplyOrder,
            format!(
                "need nominal {} <= peak {} <= ceiling {} W",
                p.supply_nominal_w, p.supply_peak_w, p.payload_peak_power_ceiling_w
            ),
        );
    }
    if !(p.duty_cycle_floor > 0.0 && p.duty_cycle_floor < 1.0) {
        push(IssueCode::DutyFloorRange, format!("duty cycle floor {} not in (0, 1)", p.duty_cycle_floor));
    }
    if !(p.battery_capacity_wh > 0.0) {
        push(IssueCode::NonPositiveBattery, format!("battery capacity {} Wh", p.battery_capacity_wh));
    }
    if p.data_storage_bytes == 0 {
        push(IssueCode::NonPositiveStorage, "data storage capacity is zero".to_owned());
    }
    if !(p.ttc_downlink_rate_bps > 0.0) {
        push(IssueCode::NonPositiveRate, format!("TTC rate {} bit/s", p.ttc_downlink_rate_bps));
    }

    let mut seen = BTreeSet::new();
    for fe in &s.frontends {
        if !seen.insert(fe.id.clone()) {
            push(IssueCode::DuplicateId, format!("front-end {} defined twice", fe.id));
        }
        for r in &fe.ranges {
            if !(r.low_hz > 0.0 && r.low_hz < r.high_hz) {
                push(
                    IssueCode::InvalidFrequencyRange,
                    format!("{}: range {}..{} Hz", fe.id, r.low_hz, r.high_hz),
                );
            }
        }
        let mut sorted: Vec<&FreqRange> = fe.ranges.iter().collect();
        sorted.sort_by(|a, b| a.low_hz.total_cmp(&b.low_hz));
        if sorted.windows(2).any(|w| w[1].low_hz < w[0].high_hz) {
            push(IssueCode::OverlappingRanges, format!("{}: frequency ranges overlap", fe.id));
        }
        if !(fe.max_gross_rate_bps > 0.0) {
            push(IssueCode::NonPositiveRate, format!("{}: max rate {} bit/s", fe.id, fe.max_gross_rate_bps));
        }
    }

    let mut seen_sdr = BTreeSet::new();
    let mut slotted = BTreeSet::new();
    for sdr in &s.sdrs {
        if !seen_sdr.insert(sdr.id.clone()) {
            push(IssueCode::DuplicateId, format!("SDR {} defined twice", sdr.id));
        }
        if !(sdr.standby_power_w < sdr.active_power_w) {
            push(
                IssueCode::SdrPowerOrder,
                format!("{}: standby {} W not below active {} W", sdr.id, sdr.standby_power_w, sdr.active_power_w),
            );
        }
        for slot in &sdr.slots {
            if s.frontend(slot).is_none() {
                push(IssueCode::DanglingFrontend, format!("{} slot names unknown front-end {}", sdr.id, slot));
            } else if !slotted.insert(slot.clone()) {
                push(IssueCode::DuplicateSlot, format!("front-end {} mounted twice", slot));
            }
        }
    }

    let o = &s.optical;
    if !(o.range_min_km < o.range_max_km) {
        push(IssueCode::OpticalRangeOrder, format!("optical range {}..{} km", o.range_min_km, o.range_max_km));
    }
    if !(o.pointing_requirement_3sigma_deg > 0.0) {
        push(IssueCode::NonPositivePointing, format!("pointing requirement {} deg", o.pointing_requirement_3sigma_deg));
    }
    if !(o.downlink_max_rate_bps > 0.0 && o.uplink_max_rate_bps > 0.0) {
        push(IssueCode::NonPositiveRate, "optical rates must be > 0".to_owned());
    }

    let orb = &s.orbit;
    if !(orb.altitude_km > 0.0) {
        push(IssueCode::NonPositiveAltitude, format!("altitude {} km", orb.altitude_km));
    }
    for (name, v) in [
        ("inclination", orb.inclination_deg),
        ("raan", orb.raan_deg),
        ("true anomaly", orb.initial_true_anomaly_deg),
    ] {
        if !angle_ok(v) {
            push(IssueCode::AngleOutOfRange, format!("{name} {v} deg not in [0, 360)"));
        }
    }

    let mut seen_station = BTreeSet::new();
    for st in &s.stations {
        if !seen_station.insert(st.name.as_str()) {
            push(IssueCode::DuplicateId, format!("station {} defined twice", st.name));
        }
        if !(libm::fabs(st.latitude_deg) <= 90.0) {
            push(IssueCode::LatitudeOutOfRange, format!("{}: latitude {} deg", st.name, st.latitude_deg));
        }
        if !(0.0..90.0).contains(&st.min_elevation_deg) {
            push(
                IssueCode::ElevationOutOfRange,
                format!("{}: min elevation {} deg not in [0, 90)", st.name, st.min_elevation_deg),
            );
        }
    }

    let mut seen_exp = BTreeSet::new();
    for e in &s.experiments {
        if !seen_exp.insert(e.id.as_str()) {
            push(IssueCode::DuplicateId, format!("experiment {} defined twice", e.id));
        }
        if !(e.duration_s > 0.0) {
            push(IssueCode::ExperimentDuration, format!("{}: duration {} s", e.id, e.duration_s));
        }
        if !(e.earliest_start_s < e.latest_end_s) {
            push(
                IssueCode::ExperimentWindow,
                format!("{}: window {}..{} s is empty", e.id, e.earliest_start_s, e.latest_end_s),
            );
        }
        if !(e.data_rate_bps >= 0.0) {
            push(IssueCode::NegativeDataRate, format!("{}: data rate {} bit/s", e.id, e.data_rate_bps));
        }
        for fe in &e.frontends {
            if s.frontend(fe).is_none() {
                push(IssueCode::DanglingFrontend, format!("{} requests unknown front-end {}", e.id, fe));
            }
        }
    }

    if !(s.sim.time_step_s > 0.0) {
        push(IssueCode::TimeStep, format!("time step {} s", s.sim.time_step_s));
    }
    if !(s.sim.duration_s >= s.sim.time_step_s) {
        push(
            IssueCode::SimDuration,
            format!("duration {} s shorter than time step {} s", s.sim.duration_s, s.sim.time_step_s),
        );
    }

    issues
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn baseline_matches_platform_tables() {
        let s = default_scenario();
        assert_eq!(s.platform.data_storage_bytes, 200_000_000_000);
        assert_eq!(s.optical.range_min_km, 500.0);
        assert_eq!(s.optical.range_max_km, 1500.0);
        assert_eq!(s.platform.supply_nominal_w, 45.0);
        assert_eq!(s.platform.supply_peak_w, 85.0);
        assert_eq!(s.platform.payload_peak_power_ceiling_w, 160.0);
        assert_eq!(s.platform.battery_capacity_wh, 42.0);
        assert_eq!(s.platform.ttc_downlink_rate_bps, 5e6);
        assert_eq!(s.optical.downlink_max_rate_bps, 1e9);
        assert_eq!(s.optical.uplink_max_rate_bps, 1e8);
        assert_eq!(s.frontend(&"FE2".into()).unwrap().max_gross_rate_bps, 1.152e6);
        assert_eq!(s.frontend(&"FE1".into()).unwrap().ranges.len(), 3);
    }

    #[test]
    fn baseline_and_demo_self_validate() {
        assert!(validate_scenario(&default_scenario()).is_empty());
        assert!(validate_scenario(&demo_scenario()).is_empty());
    }

    #[test]
    fn elevation_bound_is_reported_once() {
        let mut s = default_scenario();
        s.stations[0].min_elevation_deg = 95.0;
        let issues = validate_scenario(&s);
        assert_eq!(issues.len(), 1);
        assert_eq!(issues[0].code.as_str(), "elevation-out-of-range");
    }

    #[test]
    fn dangling_slot_is_reported_once() {
        let mut s = default_scenario();
        s.sdrs[0].slots[0] = "FE9".into();
        let issues = validate_scenario(&s);
        assert_eq!(issues.len(), 1);
        assert_eq!(issues[0].code, IssueCode::DanglingFrontend);
    }

    #[test]
    fn s_band_link_frequency_skips_uplink_range() {
        let s = default_scenario();
        let f = s.frontend(&"FE2".into()).unwrap().link_frequency_hz().unwrap();
        assert_eq!(f, 2180e6);
        let ka = s.frontend(&"FE4".into()).unwrap().link_frequency_hz().unwrap();
        assert!((ka - 19.7e9).abs() < 1.0);
    }

    #[test]
    fn band_labels_round_trip() {
        for b in Band::ALL {
            assert_eq!(Band::from_label(b.label()), Some(b));
        }
        assert_eq!(Band::from_label("KA"), Some(Band::Ka));
        assert_eq!(Band::from_label("w"), None);
    }
}
