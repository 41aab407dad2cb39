//! Experiment and downlink scheduling onto pass windows and payload devices.

mod exhaustive;
mod greedy;
mod validate;

use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

pub use exhaustive::{plan_exhaustive, ExhaustiveError, MAX_EXHAUSTIVE_REQUESTS, MAX_EXHAUSTIVE_WINDOWS, MIN_EXHAUSTIVE_QUANTUM_S};
pub use greedy::{plan_greedy, Plan, Skip, SkipReason};
pub use validate::{resource_violations, validate, window_violations};

use crate::error::LinkError;
use crate::link::{self, Direction};
use crate::orbit::{self, PassWindow};
use crate::payload::Device;
use crate::scenario::{Band, ExperimentSpec, FrontEndId, GroundStation, Scenario, SdrId};
use crate::window;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum EntryKind {
    Experiment,
    Downlink,
}

/// A device claimed by a schedule entry.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Assignment {
    Sdr { sdr: SdrId, frontend: FrontEndId },
    Optical,
}

impl Assignment {
    pub fn device(&self) -> Device {
        match self {
            Assignment::Sdr { sdr, .. } => Device::Sdr(sdr.clone()),
            Assignment::Optical => Device::Optical,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ScheduleEntry {
    /// Experiment id, or a generated `downlink-NNN` tag.
    pub id: String,
    pub kind: EntryKind,
    pub t_start: f64,
    pub t_end: f64,
    pub devices: Vec<Assignment>,
    pub band: Band,
    /// Ground station that must be in view with every link closed.
    pub station: Option<String>,
    pub extra_power_w: f64,
    /// Data produced into the store while running, bit/s.
    pub data_rate_bps: f64,
}

impl ScheduleEntry {
    pub fn duration_s(&self) -> f64 {
        self.t_end - self.t_start
    }

    pub fn overlaps(&self, other: &ScheduleEntry) -> bool {
        self.t_start < other.t_end && other.t_start < self.t_end
    }

    pub fn is_active_at(&self, t: f64) -> bool {
        self.t_start <= t && t < self.t_end
    }

    /// Device power plus extra draw while the entry runs.
    pub fn load_w(&self, s: &Scenario) -> f64 {
        let devices: f64 = self
            .devices
            .iter()
            .map(|a| match a {
                Assignment::Sdr { sdr, .. } => s.sdr(sdr).map_or(0.0, |u| u.active_power_w),
                Assignment::Optical => s.optical.peak_power_w,
            })
            .sum();
        devices + self.extra_power_w
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Schedule {
    pub entries: Vec<ScheduleEntry>,
}

impl Schedule {
    pub fn new(mut entries: Vec<ScheduleEntry>) -> Self {
        sort_entries(&mut entries);
        Schedule { entries }
    }

    pub fn insert(&mut self, entry: ScheduleEntry) {
        self.entries.push(entry);
        sort_entries(&mut self.entries);
    }

    pub fn experiments(&self) -> impl Iterator<Item = &ScheduleEntry> {
        self.entries.iter().filter(|e| e.kind == EntryKind::Experiment)
    }
}

fn sort_entries(entries: &mut [ScheduleEntry]) {
    entries.sort_by(|a, b| a.t_start.total_cmp(&b.t_start).then_with(|| a.id.cmp(&b.id)));
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum ViolationCode {
    SlotConflict,
    PeakSupply,
    NominalSupply,
    DutyFloor,
    StorageOverflow,
    WindowMiss,
}

impl ViolationCode {
    pub fn as_str(self) -> &'static str {
        match self {
            ViolationCode::SlotConflict => "slot-conflict",
            ViolationCode::PeakSupply => "peak-supply",
            ViolationCode::NominalSupply => "nominal-supply",
            ViolationCode::DutyFloor => "duty-floor",
            ViolationCode::StorageOverflow => "storage-overflow",
            ViolationCode::WindowMiss => "window-miss",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Violation {
    pub code: ViolationCode,
    pub t: f64,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at t={} s: {}", self.code.as_str(), self.t, self.detail)
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DutyCycle {
    pub per_orbit: Vec<f64>,
    pub min: f64,
}

/// Union of `intervals`, sorted and merged.
fn union(mut intervals: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    intervals.retain(|(a, b)| b > a);
    intervals.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(intervals.len());
    for (a, b) in intervals {
        match out.last_mut() {
            Some(last) if a <= last.1 => last.1 = last.1.max(b),
            _ => out.push((a, b)),
        }
    }
    out
}

/// Payload-active fraction of each consecutive orbit `[kT, (k+1)T)` that
/// fits in the horizon. A horizon shorter than one orbit is measured as a
/// single partial window.
pub fn duty_cycle(sched: &Schedule, period_s: f64, horizon_s: f64) -> DutyCycle {
    let active = union(sched.entries.iter().map(|e| (e.t_start, e.t_end)).collect());
    let full = if period_s > 0.0 { libm::floor(horizon_s / period_s) as usize } else { 0 };
    let windows: Vec<(f64, f64)> = if full == 0 {
        if horizon_s > 0.0 {
            alloc::vec![(0.0, horizon_s)]
        } else {
            Vec::new()
        }
    } else {
        (0..full).map(|k| (k as f64 * period_s, (k + 1) as f64 * period_s)).collect()
    };
    let per_orbit: Vec<f64> = windows
        .iter()
        .map(|&(w0, w1)| {
            let busy: f64 = active.iter().map(|&(a, b)| (b.min(w1) - a.max(w0)).max(0.0)).sum();
            busy / (w1 - w0)
        })
        .collect();
    let min = per_orbit.iter().copied().fold(f64::INFINITY, f64::min);
    DutyCycle { min: if per_orbit.is_empty() { 0.0 } else { min }, per_orbit }
}

/// Whether every assigned link is closed towards `station` at time `t`.
pub fn links_closed(s: &Scenario, station: &GroundStation, devices: &[Assignment], t: f64) -> Result<bool, LinkError> {
    let geo = orbit::sample(&s.orbit, station, t);
    if geo.elevation_deg < station.min_elevation_deg {
        return Ok(false);
    }
    for a in devices {
        let closed = match a {
            Assignment::Sdr { frontend, .. } => {
                let fe = s.frontend(frontend).ok_or_else(|| LinkError::NoLinkFrequency(frontend.0.clone()))?;
                let params = s.link.bands.get(&fe.band).ok_or(LinkError::MissingRequiredCn0(fe.band))?;
                link::rf_assess(fe, params, geo.slant_range_km)?.closed
            }
            Assignment::Optical => {
                link::optical_assess(&s.optical, geo.slant_range_km, s.link.pointing_error_3sigma_deg, Direction::Down)
                    .closed
            }
        };
        if !closed {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Candidate interval for placing an entry.
#[derive(Debug, Clone, PartialEq)]
pub struct PlacementWindow {
    pub station: Option<String>,
    pub start: f64,
    pub end: f64,
}

/// Sub-intervals of `pass` where all `devices` close their links.
pub fn link_windows(s: &Scenario, pass: &PassWindow, devices: &[Assignment]) -> Vec<PlacementWindow> {
    let Some(station) = s.station(&pass.station) else {
        return Vec::new();
    };
    let pred = |t: f64| links_closed(s, station, devices, t).unwrap_or(false);
    window::find_runs(pass.t_start, pass.t_end, s.sim.time_step_s, pred)
        .into_iter()
        .map(|r| PlacementWindow { station: Some(pass.station.clone()), start: r.start, end: r.end })
        .collect()
}

/// Devices an experiment claims: the host SDR of each front-end, plus the
/// laser terminal when requested.
pub fn experiment_assignments(exp: &ExperimentSpec, s: &Scenario) -> Option<Vec<Assignment>> {
    let mut out = Vec::new();
    for fe in &exp.frontends {
        let host = s.host_sdr(fe)?;
        out.push(Assignment::Sdr { sdr: host.id.clone(), frontend: fe.clone() });
    }
    if exp.requires_optical {
        out.push(Assignment::Optical);
    }
    Some(out)
}

pub fn experiment_bands(exp: &ExperimentSpec, s: &Scenario) -> Vec<Band> {
    let mut bands: Vec<Band> = exp.frontends.iter().filter_map(|fe| s.frontend(fe)).map(|f| f.band).collect();
    if exp.requires_optical {
        bands.push(Band::Optical);
    }
    bands
}

/// Intervals an experiment may occupy. Store-and-forward experiments may
/// run anywhere in their request window; contact experiments only where a
/// station supporting all their bands sees every link closed.
pub fn placement_windows(exp: &ExperimentSpec, passes: &[PassWindow], s: &Scenario) -> Vec<PlacementWindow> {
    let lo = exp.earliest_start_s.max(0.0);
    let hi = exp.latest_end_s.min(s.sim.duration_s);
    if !exp.needs_contact {
        return if hi > lo { alloc::vec![PlacementWindow { station: None, start: lo, end: hi }] } else { Vec::new() };
    }
    let Some(devices) = experiment_assignments(exp, s) else {
        return Vec::new();
    };
    let bands = experiment_bands(exp, s);
    let mut out = Vec::new();
    for pass in passes {
        let Some(station) = s.station(&pass.station) else { continue };
        if !bands.iter().all(|b| station.bands.contains(b)) {
            continue;
        }
        for w in link_windows(s, pass, &devices) {
            let (a, b) = (w.start.max(lo), w.end.min(hi));
            if b > a {
                out.push(PlacementWindow { station: w.station, start: a, end: b });
            }
        }
    }
    out.sort_by(|x, y| x.start.total_cmp(&y.start).then_with(|| x.station.cmp(&y.station)));
    out
}

/// Planning order: priority descending, then earliest start, then id.
pub fn request_order(a: &ExperimentSpec, b: &ExperimentSpec) -> Ordering {
    b.priority
        .cmp(&a.priority)
        .then_with(|| a.earliest_start_s.total_cmp(&b.earliest_start_s))
        .then_with(|| a.id.cmp(&b.id))
}

pub(crate) fn experiment_entry(
    exp: &ExperimentSpec,
    s: &Scenario,
    window: &PlacementWindow,
    t_start: f64,
) -> Option<ScheduleEntry> {
    let devices = experiment_assignments(exp, s)?;
    let band = experiment_bands(exp, s).first().copied().unwrap_or(Band::Uhf);
    Some(ScheduleEntry {
        id: exp.id.clone(),
        kind: EntryKind::Experiment,
        t_start,
        t_end: t_start + exp.duration_s,
        devices,
        band,
        station: if exp.needs_contact { window.station.clone() } else { None },
        extra_power_w: exp.extra_power_w,
        data_rate_bps: exp.data_rate_bps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;
    use alloc::vec;

    fn entry(id: &str, t0: f64, t1: f64) -> ScheduleEntry {
        ScheduleEntry {
            id: id.to_string(),
            kind: EntryKind::Experiment,
            t_start: t0,
            t_end: t1,
            devices: vec![],
            band: Band::Uhf,
            station: None,
            extra_power_w: 0.0,
            data_rate_bps: 0.0,
        }
    }

    #[test]
    fn duty_cycle_examples() {
        let t = 5739.0;
        let d = duty_cycle(&Schedule::new(vec![entry("a", 100.0, 1000.0)]), t, t);
        assert_eq!(d.per_orbit.len(), 1);
        assert!((d.min - 0.1568).abs() < 1e-4);

        let d = duty_cycle(&Schedule::default(), t, 3.0 * t);
        assert_eq!(d.per_orbit, [0.0, 0.0, 0.0]);
        assert_eq!(d.min, 0.0);

        let d = duty_cycle(&Schedule::new(vec![entry("a", 0.0, 600.0), entry("b", 300.0, 900.0)]), t, t);
        assert!((d.min - 900.0 / t).abs() < 1e-12);
    }

    #[test]
    fn duty_cycle_splits_across_orbits() {
        let d = duty_cycle(&Schedule::new(vec![entry("a", 900.0, 1100.0)]), 1000.0, 2500.0);
        assert_eq!(d.per_orbit.len(), 2);
        assert!((d.per_orbit[0] - 0.1).abs() < 1e-12);
        assert!((d.per_orbit[1] - 0.1).abs() < 1e-12);
    }

    #[test]
    fn short_horizon_is_one_partial_window() {
        let d = duty_cycle(&Schedule::new(vec![entry("a", 0.0, 50.0)]), 1000.0, 100.0);
        assert_eq!(d.per_orbit, [0.5]);
    }

    #[test]
    fn planning_order_is_total() {
        let mk = |id: &str, p: i32, e: f64| ExperimentSpec {
            id: id.to_string(),
            priority: p,
            frontends: vec![],
            requires_optical: false,
            needs_contact: false,
            duration_s: 1.0,
            extra_power_w: 0.0,
            data_rate_bps: 0.0,
            earliest_start_s: e,
            latest_end_s: 10.0,
        };
        let mut v = [mk("c", 1, 0.0), mk("a", 1, 0.0), mk("b", 2, 5.0), mk("d", 1, -1.0)];
        v.sort_by(request_order);
        let ids: Vec<&str> = v.iter().map(|e| e.id.as_str()).collect();
        assert_eq!(ids, ["b", "d", "a", "c"]);
    }
}
