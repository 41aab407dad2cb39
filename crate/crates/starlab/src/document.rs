//! Scenario documents: JSON with unit-suffixed keys, layered over the
//! baseline scenario.
//!
//! Every key is optional. Scalars and objects that are omitted keep their
//! baseline value. A list that is present replaces the baseline list; each
//! item whose id matches a baseline item inherits that item's fields.

use std::collections::BTreeSet;

use serde::{Deserialize, Deserializer, Serialize};
use starlab_core::link::RfLinkParams;
use starlab_core::scenario::{
    ExperimentSpec, FreqRange, FrontEnd, GroundStation, IssueCode, SdrUnit,
};
use starlab_core::{default_scenario, validate_scenario, Band, Scenario};

use crate::error::Error;

const MEGA: f64 = 1e6;
const GIGA: f64 = 1e9;

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDoc {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub platform: Option<PlatformDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub orbit: Option<OrbitDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sdrs: Option<Vec<SdrDoc>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub frontends: Option<Vec<FrontEndDoc>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub optical: Option<OpticalDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stations: Option<Vec<StationDoc>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub experiments: Option<Vec<ExperimentDoc>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub link: Option<LinkDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub power: Option<PowerDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sim: Option<SimDoc>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlatformDoc {
    pub form_factor: Option<String>,
    pub payload_mass_limit_kg: Option<f64>,
    pub payload_volume_limit_u: Option<f64>,
    pub avg_power_min_w: Option<f64>,
    pub avg_power_max_w: Option<f64>,
    pub payload_peak_power_w: Option<f64>,
    pub supply_nominal_w: Option<f64>,
    pub supply_peak_w: Option<f64>,
    pub battery_capacity_wh: Option<f64>,
    pub data_storage_gb: Option<f64>,
    pub ttc_rate_mbps: Option<f64>,
    pub ttc_freq_mhz: Option<f64>,
    pub ttc_gain_dbi: Option<f64>,
    pub duty_cycle_floor: Option<f64>,
    pub lifetime_years: Option<f64>,
    pub sustained_window_s: Option<f64>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OrbitDoc {
    pub altitude_km: Option<f64>,
    pub inclination_deg: Option<f64>,
    pub raan_deg: Option<f64>,
    pub true_anomaly_deg: Option<f64>,
    pub epoch_s: Option<f64>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SdrDoc {
    pub id: String,
    pub slots: Option<[String; 2]>,
    pub standby_w: Option<f64>,
    pub active_w: Option<f64>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrontEndDoc {
    pub id: String,
    pub band: Option<String>,
    /// Ranges usable for space-to-ground links, `[low, high]` MHz.
    pub ranges_mhz: Option<Vec<[f64; 2]>>,
    pub uplink_ranges_mhz: Option<Vec<[f64; 2]>>,
    pub max_rate_mbps: Option<f64>,
    pub bandwidth_mhz: Option<f64>,
    pub gain_dbi: Option<f64>,
    pub use_case: Option<String>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OpticalDoc {
    pub standby_w: Option<f64>,
    pub peak_w: Option<f64>,
    pub downlink_wavelength_nm: Option<f64>,
    pub downlink_tx_power_w: Option<f64>,
    pub downlink_rate_mbps: Option<f64>,
    pub uplink_wavelength_nm: Option<f64>,
    pub uplink_rate_mbps: Option<f64>,
    pub range_min_km: Option<f64>,
    pub range_max_km: Option<f64>,
    pub pointing_req_3sigma_deg: Option<f64>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StationDoc {
    pub name: String,
    pub latitude_deg: Option<f64>,
    pub longitude_deg: Option<f64>,
    pub altitude_m: Option<f64>,
    pub min_elevation_deg: Option<f64>,
    pub bands: Option<Vec<String>>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentDoc {
    pub id: String,
    pub priority: Option<i32>,
    pub frontends: Option<Vec<String>>,
    pub requires_optical: Option<bool>,
    pub needs_contact: Option<bool>,
    pub duration_s: Option<f64>,
    pub extra_power_w: Option<f64>,
    pub data_rate_mbps: Option<f64>,
    pub earliest_start_s: Option<f64>,
    pub latest_end_s: Option<f64>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkDoc {
    pub pointing_error_3sigma_deg: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub uhf: Option<RfDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s: Option<RfDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x: Option<RfDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ka: Option<RfDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ttc: Option<RfDoc>,
}

/// `tx_gain_dbi` and `required_cn0_dbhz` accept `null` to clear them.
#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RfDoc {
    pub tx_power_dbw: Option<f64>,
    #[serde(default, deserialize_with = "nullable", skip_serializing_if = "Option::is_none")]
    pub tx_gain_dbi: Option<Option<f64>>,
    pub rx_gain_dbi: Option<f64>,
    pub system_losses_db: Option<f64>,
    pub required_margin_db: Option<f64>,
    pub rx_gt_dbk: Option<f64>,
    #[serde(default, deserialize_with = "nullable", skip_serializing_if = "Option::is_none")]
    pub required_cn0_dbhz: Option<Option<f64>>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerDoc {
    pub sunlit_power_w: Option<f64>,
    pub eclipse_modeled: Option<bool>,
    pub sun_ra_deg: Option<f64>,
    pub sun_dec_deg: Option<f64>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimDoc {
    pub duration_s: Option<f64>,
    pub step_s: Option<f64>,
    pub seed: Option<u64>,
    pub enforce_duty_floor: Option<bool>,
}

fn nullable<'de, D: Deserializer<'de>, T: Deserialize<'de>>(d: D) -> Result<Option<Option<T>>, D::Error> {
    Option::<T>::deserialize(d).map(Some)
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

fn scaled(value: Option<f64>, factor: f64) -> Option<f64> {
    value.map(|v| v * factor)
}

/// `v / factor`, nudged by a few ulps when needed so that multiplying the
/// result by `factor` gives back exactly `v`.
fn unscaled(v: f64, factor: f64) -> f64 {
    let q = v / factor;
    let (mut up, mut down) = (q, q);
    for _ in 0..8 {
        if up * factor == v {
            return up;
        }
        if down * factor == v {
            return down;
        }
        up = up.next_up();
        down = down.next_down();
    }
    q
}

fn band(label: &str, at: &str) -> Result<Band, Error> {
    Band::from_label(label).ok_or_else(|| Error::Schema(format!("{at}: unknown band {label:?}")))
}

fn required<T>(value: Option<T>, at: &str, key: &str) -> Result<T, Error> {
    value.ok_or_else(|| Error::Schema(format!("{at}: missing {key}")))
}

/// Parses and merges a document without checking scenario invariants.
pub fn parse_scenario(text: &str) -> Result<Scenario, Error> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let doc: ScenarioDoc = serde_json::from_value(value).map_err(|e| Error::Schema(e.to_string()))?;
    apply(doc)
}

/// Parses, merges and validates a scenario document.
pub fn load_scenario(text: &str) -> Result<Scenario, Error> {
    let s = parse_scenario(text)?;
    let issues = validate_scenario(&s);
    if let Some(dangling) = issues.iter().find(|i| i.code == IssueCode::DanglingFrontend) {
        return Err(Error::Reference(dangling.message.clone()));
    }
    if !issues.is_empty() {
        return Err(Error::Invalid(issues));
    }
    Ok(s)
}

pub fn load_scenario_file(path: &std::path::Path) -> Result<Scenario, Error> {
    load_scenario(&crate::read(path)?)
}

fn apply(doc: ScenarioDoc) -> Result<Scenario, Error> {
    let base = default_scenario();
    let mut s = base.clone();

    if let Some(p) = doc.platform {
        let t = &mut s.platform;
        set(&mut t.form_factor, p.form_factor);
        set(&mut t.payload_mass_limit_kg, p.payload_mass_limit_kg);
        set(&mut t.payload_volume_limit_u, p.payload_volume_limit_u);
        set(&mut t.avg_power_available_w.0, p.avg_power_min_w);
        set(&mut t.avg_power_available_w.1, p.avg_power_max_w);
        set(&mut t.payload_peak_power_ceiling_w, p.payload_peak_power_w);
        set(&mut t.supply_nominal_w, p.supply_nominal_w);
        set(&mut t.supply_peak_w, p.supply_peak_w);
        set(&mut t.battery_capacity_wh, p.battery_capacity_wh);
        if let Some(gb) = p.data_storage_gb {
            if !(gb >= 0.0 && gb * GIGA < u64::MAX as f64) {
                return Err(Error::Schema(format!("platform: data_storage_gb {gb} out of range")));
            }
            t.data_storage_bytes = (gb * GIGA).round() as u64;
        }
        set(&mut t.ttc_downlink_rate_bps, scaled(p.ttc_rate_mbps, MEGA));
        set(&mut t.ttc_frequency_hz, scaled(p.ttc_freq_mhz, MEGA));
        set(&mut t.ttc_antenna_gain_dbi, p.ttc_gain_dbi);
        set(&mut t.duty_cycle_floor, p.duty_cycle_floor);
        set(&mut t.lifetime_years, p.lifetime_years);
        set(&mut t.sustained_window_s, p.sustained_window_s);
    }

    if let Some(o) = doc.orbit {
        let t = &mut s.orbit;
        set(&mut t.altitude_km, o.altitude_km);
        set(&mut t.inclination_deg, o.inclination_deg);
        set(&mut t.raan_deg, o.raan_deg);
        set(&mut t.initial_true_anomaly_deg, o.true_anomaly_deg);
        set(&mut t.epoch_s, o.epoch_s);
    }

    if let Some(items) = doc.sdrs {
        s.sdrs = items
            .into_iter()
            .enumerate()
            .map(|(i, d)| {
                let at = format!("sdrs[{i}] ({})", d.id);
                let mut u = match base.sdrs.iter().find(|u| u.id.as_str() == d.id) {
                    Some(u) => u.clone(),
                    None => SdrUnit {
                        id: d.id.as_str().into(),
                        slots: required(d.slots.clone(), &at, "slots")?.map(|f| f.as_str().into()),
                        standby_power_w: required(d.standby_w, &at, "standby_w")?,
                        active_power_w: required(d.active_w, &at, "active_w")?,
                    },
                };
                if let Some(slots) = d.slots {
                    u.slots = slots.map(|f| f.as_str().into());
                }
                set(&mut u.standby_power_w, d.standby_w);
                set(&mut u.active_power_w, d.active_w);
                Ok(u)
            })
            .collect::<Result<_, Error>>()?;
    }

    if let Some(items) = doc.frontends {
        s.frontends = items
            .into_iter()
            .enumerate()
            .map(|(i, d)| {
                let at = format!("frontends[{i}] ({})", d.id);
                let mut fe = match base.frontends.iter().find(|f| f.id.as_str() == d.id) {
                    Some(f) => f.clone(),
                    None => FrontEnd {
                        id: d.id.as_str().into(),
                        band: band(required(d.band.as_deref(), &at, "band")?, &at)?,
                        ranges: Vec::new(),
                        max_gross_rate_bps: required(d.max_rate_mbps, &at, "max_rate_mbps")? * MEGA,
                        max_bandwidth_hz: 0.0,
                        antenna_gain_dbi: 0.0,
                        use_case: String::new(),
                    },
                };
                if let Some(b) = &d.band {
                    fe.band = band(b, &at)?;
                }
                if d.ranges_mhz.is_some() || d.uplink_ranges_mhz.is_some() {
                    let keep_down: Vec<FreqRange> = fe.ranges.iter().copied().filter(|r| !r.uplink_only).collect();
                    let keep_up: Vec<FreqRange> = fe.ranges.iter().copied().filter(|r| r.uplink_only).collect();
                    let mhz = |v: Vec<[f64; 2]>, up: bool| -> Vec<FreqRange> {
                        v.into_iter()
                            .map(|[lo, hi]| FreqRange { low_hz: lo * MEGA, high_hz: hi * MEGA, uplink_only: up })
                            .collect()
                    };
                    let mut ranges = d.ranges_mhz.map_or(keep_down, |v| mhz(v, false));
                    ranges.extend(d.uplink_ranges_mhz.map_or(keep_up, |v| mhz(v, true)));
                    ranges.sort_by(|a, b| a.low_hz.total_cmp(&b.low_hz).then(a.high_hz.total_cmp(&b.high_hz)));
                    fe.ranges = ranges;
                }
                set(&mut fe.max_gross_rate_bps, scaled(d.max_rate_mbps, MEGA));
                set(&mut fe.max_bandwidth_hz, scaled(d.bandwidth_mhz, MEGA));
                set(&mut fe.antenna_gain_dbi, d.gain_dbi);
                set(&mut fe.use_case, d.use_case);
                Ok(fe)
            })
            .collect::<Result<_, Error>>()?;
    }

    if let Some(o) = doc.optical {
        let t = &mut s.optical;
        set(&mut t.standby_power_w, o.standby_w);
        set(&mut t.peak_power_w, o.peak_w);
        set(&mut t.downlink_wavelength_nm, o.downlink_wavelength_nm);
        set(&mut t.downlink_tx_power_w, o.downlink_tx_power_w);
        set(&mut t.downlink_max_rate_bps, scaled(o.downlink_rate_mbps, MEGA));
        set(&mut t.uplink_wavelength_nm, o.uplink_wavelength_nm);
        set(&mut t.uplink_max_rate_bps, scaled(o.uplink_rate_mbps, MEGA));
        set(&mut t.range_min_km, o.range_min_km);
        set(&mut t.range_max_km, o.range_max_km);
        set(&mut t.pointing_requirement_3sigma_deg, o.pointing_req_3sigma_deg);
    }

    if let Some(items) = doc.stations {
        s.stations = items
            .into_iter()
            .enumerate()
            .map(|(i, d)| {
                let at = format!("stations[{i}] ({})", d.name);
                let mut st = match base.stations.iter().find(|g| g.name == d.name) {
                    Some(g) => g.clone(),
                    None => GroundStation {
                        name: d.name.clone(),
                        latitude_deg: required(d.latitude_deg, &at, "latitude_deg")?,
                        longitude_deg: required(d.longitude_deg, &at, "longitude_deg")?,
                        altitude_m: 0.0,
                        min_elevation_deg: 10.0,
                        bands: BTreeSet::new(),
                    },
                };
                set(&mut st.latitude_deg, d.latitude_deg);
                set(&mut st.longitude_deg, d.longitude_deg);
                set(&mut st.altitude_m, d.altitude_m);
                set(&mut st.min_elevation_deg, d.min_elevation_deg);
                if let Some(labels) = d.bands {
                    st.bands = labels.iter().map(|l| band(l, &at)).collect::<Result<_, _>>()?;
                }
                Ok(st)
            })
            .collect::<Result<_, Error>>()?;
    }

    if let Some(p) = doc.power {
        let t = &mut s.generation;
        set(&mut t.sunlit_power_w, p.sunlit_power_w);
        set(&mut t.eclipse_modeled, p.eclipse_modeled);
        set(&mut t.sun_ra_deg, p.sun_ra_deg);
        set(&mut t.sun_dec_deg, p.sun_dec_deg);
    }

    if let Some(d) = doc.sim {
        set(&mut s.sim.duration_s, d.duration_s);
        set(&mut s.sim.time_step_s, d.step_s);
        set(&mut s.sim.seed, d.seed);
        set(&mut s.sim.enforce_duty_floor, d.enforce_duty_floor);
    }

    if let Some(l) = doc.link {
        set(&mut s.link.pointing_error_3sigma_deg, l.pointing_error_3sigma_deg);
        for (b, rf) in [(Band::Uhf, l.uhf), (Band::S, l.s), (Band::X, l.x), (Band::Ka, l.ka), (Band::Ttc, l.ttc)] {
            let Some(rf) = rf else { continue };
            let p = s.link.bands.entry(b).or_insert(RfLinkParams {
                tx_power_dbw: 0.0,
                tx_gain_dbi: None,
                rx_gain_dbi: 0.0,
                system_losses_db: 0.0,
                required_margin_db: 0.0,
                rx_figure_of_merit_dbk: 0.0,
                required_cn0_dbhz: None,
            });
            set(&mut p.tx_power_dbw, rf.tx_power_dbw);
            set(&mut p.tx_gain_dbi, rf.tx_gain_dbi);
            set(&mut p.rx_gain_dbi, rf.rx_gain_dbi);
            set(&mut p.system_losses_db, rf.system_losses_db);
            set(&mut p.required_margin_db, rf.required_margin_db);
            set(&mut p.rx_figure_of_merit_dbk, rf.rx_gt_dbk);
            set(&mut p.required_cn0_dbhz, rf.required_cn0_dbhz);
        }
    }

    // Experiments last: the default request window ends with the horizon.
    if let Some(items) = doc.experiments {
        s.experiments = items
            .into_iter()
            .enumerate()
            .map(|(i, d)| {
                let at = format!("experiments[{i}] ({})", d.id);
                Ok(ExperimentSpec {
                    duration_s: required(d.duration_s, &at, "duration_s")?,
                    id: d.id,
                    priority: d.priority.unwrap_or(0),
                    frontends: d.frontends.unwrap_or_default().iter().map(|f| f.as_str().into()).collect(),
                    requires_optical: d.requires_optical.unwrap_or(false),
                    needs_contact: d.needs_contact.unwrap_or(false),
                    extra_power_w: d.extra_power_w.unwrap_or(0.0),
                    data_rate_bps: scaled(d.data_rate_mbps, MEGA).unwrap_or(0.0),
                    earliest_start_s: d.earliest_start_s.unwrap_or(0.0),
                    latest_end_s: d.latest_end_s.unwrap_or(s.sim.duration_s),
                })
            })
            .collect::<Result<_, Error>>()?;
    }
    Ok(s)
}

/// The full document for `s`, with every key written out.
pub fn to_doc(s: &Scenario) -> ScenarioDoc {
    let p = &s.platform;
    let o = &s.optical;
    let rf = |b: Band| {
        s.link.bands.get(&b).map(|p| RfDoc {
            tx_power_dbw: Some(p.tx_power_dbw),
            tx_gain_dbi: Some(p.tx_gain_dbi),
            rx_gain_dbi: Some(p.rx_gain_dbi),
            system_losses_db: Some(p.system_losses_db),
            required_margin_db: Some(p.required_margin_db),
            rx_gt_dbk: Some(p.rx_figure_of_merit_dbk),
            required_cn0_dbhz: Some(p.required_cn0_dbhz),
        })
    };
    let mhz = |ranges: &[FreqRange], up: bool| -> Vec<[f64; 2]> {
        ranges
            .iter()
            .filter(|r| r.uplink_only == up)
            .map(|r| [unscaled(r.low_hz, MEGA), unscaled(r.high_hz, MEGA)])
            .collect()
    };
    ScenarioDoc {
        platform: Some(PlatformDoc {
            form_factor: Some(p.form_factor.clone()),
            payload_mass_limit_kg: Some(p.payload_mass_limit_kg),
            payload_volume_limit_u: Some(p.payload_volume_limit_u),
            avg_power_min_w: Some(p.avg_power_available_w.0),
            avg_power_max_w: Some(p.avg_power_available_w.1),
            payload_peak_power_w: Some(p.payload_peak_power_ceiling_w),
            supply_nominal_w: Some(p.supply_nominal_w),
            supply_peak_w: Some(p.supply_peak_w),
            battery_capacity_wh: Some(p.battery_capacity_wh),
            data_storage_gb: Some(p.data_storage_bytes as f64 / GIGA),
            ttc_rate_mbps: Some(unscaled(p.ttc_downlink_rate_bps, MEGA)),
            ttc_freq_mhz: Some(unscaled(p.ttc_frequency_hz, MEGA)),
            ttc_gain_dbi: Some(p.ttc_antenna_gain_dbi),
            duty_cycle_floor: Some(p.duty_cycle_floor),
            lifetime_years: Some(p.lifetime_years),
            sustained_window_s: Some(p.sustained_window_s),
        }),
        orbit: Some(OrbitDoc {
            altitude_km: Some(s.orbit.altitude_km),
            inclination_deg: Some(s.orbit.inclination_deg),
            raan_deg: Some(s.orbit.raan_deg),
            true_anomaly_deg: Some(s.orbit.initial_true_anomaly_deg),
            epoch_s: Some(s.orbit.epoch_s),
        }),
        sdrs: Some(
            s.sdrs
                .iter()
                .map(|u| SdrDoc {
                    id: u.id.0.clone(),
                    slots: Some(u.slots.clone().map(|f| f.0)),
                    standby_w: Some(u.standby_power_w),
                    active_w: Some(u.active_power_w),
                })
                .collect(),
        ),
        frontends: Some(
            s.frontends
                .iter()
                .map(|f| FrontEndDoc {
                    id: f.id.0.clone(),
                    band: Some(f.band.label().to_owned()),
                    ranges_mhz: Some(mhz(&f.ranges, false)),
                    uplink_ranges_mhz: Some(mhz(&f.ranges, true)),
                    max_rate_mbps: Some(unscaled(f.max_gross_rate_bps, MEGA)),
                    bandwidth_mhz: Some(unscaled(f.max_bandwidth_hz, MEGA)),
                    gain_dbi: Some(f.antenna_gain_dbi),
                    use_case: Some(f.use_case.clone()),
                })
                .collect(),
        ),
        optical: Some(OpticalDoc {
            standby_w: Some(o.standby_power_w),
            peak_w: Some(o.peak_power_w),
            downlink_wavelength_nm: Some(o.downlink_wavelength_nm),
            downlink_tx_power_w: Some(o.downlink_tx_power_w),
            downlink_rate_mbps: Some(unscaled(o.downlink_max_rate_bps, MEGA)),
            uplink_wavelength_nm: Some(o.uplink_wavelength_nm),
            uplink_rate_mbps: Some(unscaled(o.uplink_max_rate_bps, MEGA)),
            range_min_km: Some(o.range_min_km),
            range_max_km: Some(o.range_max_km),
            pointing_req_3sigma_deg: Some(o.pointing_requirement_3sigma_deg),
        }),
        stations: Some(
            s.stations
                .iter()
                .map(|g| StationDoc {
                    name: g.name.clone(),
                    latitude_deg: Some(g.latitude_deg),
                    longitude_deg: Some(g.longitude_deg),
                    altitude_m: Some(g.altitude_m),
                    min_elevation_deg: Some(g.min_elevation_deg),
                    bands: Some(g.bands.iter().map(|b| b.label().to_owned()).collect()),
                })
                .collect(),
        ),
        experiments: Some(
            s.experiments
                .iter()
                .map(|e| ExperimentDoc {
                    id: e.id.clone(),
                    priority: Some(e.priority),
                    frontends: Some(e.frontends.iter().map(|f| f.0.clone()).collect()),
                    requires_optical: Some(e.requires_optical),
                    needs_contact: Some(e.needs_contact),
                    duration_s: Some(e.duration_s),
                    extra_power_w: Some(e.extra_power_w),
                    data_rate_mbps: Some(unscaled(e.data_rate_bps, MEGA)),
                    earliest_start_s: Some(e.earliest_start_s),
                    latest_end_s: Some(e.latest_end_s),
                })
                .collect(),
        ),
        link: Some(LinkDoc {
            pointing_error_3sigma_deg: Some(s.link.pointing_error_3sigma_deg),
            uhf: rf(Band::Uhf),
            s: rf(Band::S),
            x: rf(Band::X),
            ka: rf(Band::Ka),
            ttc: rf(Band::Ttc),
        }),
        power: Some(PowerDoc {
            sunlit_power_w: Some(s.generation.sunlit_power_w),
            eclipse_modeled: Some(s.generation.eclipse_modeled),
            sun_ra_deg: Some(s.generation.sun_ra_deg),
            sun_dec_deg: Some(s.generation.sun_dec_deg),
        }),
        sim: Some(SimDoc {
            duration_s: Some(s.sim.duration_s),
            step_s: Some(s.sim.time_step_s),
            seed: Some(s.sim.seed),
            enforce_duty_floor: Some(s.sim.enforce_duty_floor),
        }),
    }
}

/// Canonical pretty-printed document for `s`.
pub fn emit_scenario(s: &Scenario) -> String {
    let mut text = serde_json::to_string_pretty(&to_doc(s)).expect("scenario documents always serialize");
    text.push('\n');
    text
}

#[cfg(test)]
mod tests {
    use super::*;
    use starlab_core::demo_scenario;

    #[test]
    fn empty_document_is_the_baseline() {
        assert_eq!(load_scenario("{}").unwrap(), default_scenario());
    }

    #[test]
    fn single_override() {
        let s = load_scenario(r#"{"platform": {"battery_capacity_wh": 120}}"#).unwrap();
        let mut expected = default_scenario();
        expected.platform.battery_capacity_wh = 120.0;
        assert_eq!(s, expected);
    }

    #[test]
    fn unknown_key_is_a_schema_error() {
        let err = load_scenario(r#"{"platform": {"warp_drive": true}}"#).unwrap_err();
        assert!(matches!(err, Error::Schema(_)), "{err:?}");
        assert!(matches!(load_scenario(r#"{"warp": 1}"#), Err(Error::Schema(_))));
        assert!(matches!(load_scenario(r#"{"orbit": {"altitude_km": "high"}}"#), Err(Error::Schema(_))));
    }

    #[test]
    fn malformed_text_is_a_parse_error() {
        assert!(matches!(load_scenario("{"), Err(Error::Parse(_))));
        assert!(matches!(load_scenario(""), Err(Error::Parse(_))));
    }

    #[test]
    fn dangling_slot_is_a_reference_error() {
        let doc = r#"{"sdrs": [{"id": "Minerva-A", "slots": ["FE1", "FE9"]}, {"id": "Minerva-B"}]}"#;
        assert!(matches!(load_scenario(doc), Err(Error::Reference(_))));
    }

    #[test]
    fn invariant_violations_are_rejected() {
        let doc = r#"{"stations": [{"name": "Barcelona", "min_elevation_deg": 95}]}"#;
        match load_scenario(doc) {
            Err(Error::Invalid(issues)) => assert_eq!(issues.len(), 1),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn list_items_inherit_by_id() {
        let doc = r#"{"frontends": [{"id": "FE1"}, {"id": "FE2", "gain_dbi": 12}, {"id": "FE3"}, {"id": "FE4"}]}"#;
        let s = load_scenario(doc).unwrap();
        let mut expected = default_scenario();
        expected.frontends[1].antenna_gain_dbi = 12.0;
        assert_eq!(s, expected);
    }

    #[test]
    fn new_items_need_their_required_fields() {
        let doc = r#"{"stations": [{"name": "Svalbard", "latitude_deg": 78.2}]}"#;
        assert!(matches!(load_scenario(doc), Err(Error::Schema(_))));
        let doc = r#"{"experiments": [{"id": "e1"}]}"#;
        assert!(matches!(load_scenario(doc), Err(Error::Schema(_))));
        let doc = r#"{"experiments": [{"id": "e1", "duration_s": 60, "frontends": ["FE1"]}]}"#;
        let s = load_scenario(doc).unwrap();
        assert_eq!(s.experiments[0].latest_end_s, s.sim.duration_s);
    }

    #[test]
    fn null_clears_optional_link_figures() {
        let s = parse_scenario(r#"{"link": {"x": {"required_cn0_dbhz": null}}}"#).unwrap();
        assert_eq!(s.link.bands[&Band::X].required_cn0_dbhz, None);
        assert_eq!(parse_scenario(&emit_scenario(&s)).unwrap(), s);
    }

    #[test]
    fn emit_round_trips_baseline_and_demo() {
        for s in [default_scenario(), demo_scenario()] {
            assert_eq!(load_scenario(&emit_scenario(&s)).unwrap(), s);
        }
    }
}
