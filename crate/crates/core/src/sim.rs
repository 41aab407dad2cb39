//! Time-stepped execution of a schedule against payload, energy, storage and
//! link state.
//!
//! Steps are cut at every entry boundary, pass edge and link edge, so loads,
//! generation and link rates are constant inside each segment.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write as _;

use sha2::{Digest, Sha256};

use crate::energy::{self, EnergyState};
use crate::error::SimError;
use crate::link::{self, Direction};
use crate::orbit::{self, PassWindow};
use crate::payload::{Device, DeviceMode, PayloadState};
use crate::scenario::{Band, GroundStation, Scenario};
use crate::schedule::{self, Assignment, DutyCycle, EntryKind, Schedule, ScheduleEntry, Violation};
use crate::window;

/// Event kinds, in the order used to break ties at equal timestamps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum EventKind {
    ModeChange,
    PassStart,
    PassEnd,
    LinkOpen,
    LinkClose,
    Overflow,
    Depletion,
    Violation,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::ModeChange => "mode-change",
            EventKind::PassStart => "pass-start",
            EventKind::PassEnd => "pass-end",
            EventKind::LinkOpen => "link-open",
            EventKind::LinkClose => "link-close",
            EventKind::Overflow => "overflow",
            EventKind::Depletion => "depletion",
            EventKind::Violation => "violation",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SimEvent {
    pub t: f64,
    pub kind: EventKind,
    pub device: Option<String>,
    pub detail: String,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EnergySample {
    pub t_s: f64,
    pub soc_wh: f64,
    pub generation_w: f64,
    pub load_w: f64,
}

/// Store level and cumulative counters at a segment boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StorageSample {
    pub t_s: f64,
    pub used_bits: u64,
    pub produced_bits: u64,
    pub downlinked_bits: u64,
    pub dropped_bits: u64,
}

/// Volume carried by one downlink entry.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PassVolume {
    pub entry_id: String,
    pub station: String,
    pub band: Band,
    pub t_start: f64,
    pub t_end: f64,
    /// Rate integrated over the closed-link time, independent of what was
    /// in the store.
    pub link_bits: f64,
    /// Bits actually removed from the store.
    pub downlinked_bits: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Totals {
    pub produced_bits: u64,
    pub downlinked_bits: u64,
    pub dropped_bits: u64,
    pub remaining_bits: u64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Report {
    pub scenario_digest: String,
    pub events: Vec<SimEvent>,
    pub energy_trace: Vec<EnergySample>,
    pub storage_trace: Vec<StorageSample>,
    pub pass_volumes: Vec<PassVolume>,
    pub duty_cycle: DutyCycle,
    pub violations: Vec<Violation>,
    pub totals: Totals,
}

/// SHA-256 of the scenario's canonical debug form, hex encoded. Covers the
/// seed along with every other parameter.
pub fn scenario_digest(s: &Scenario) -> String {
    let hash = Sha256::digest(format!("{s:?}").as_bytes());
    let mut out = String::with_capacity(64);
    for b in hash {
        let _ = write!(out, "{b:02x}");
    }
    out
}

/// Pass windows of every station over the simulation horizon.
pub fn scenario_passes(s: &Scenario) -> Vec<PassWindow> {
    s.stations
        .iter()
        .flat_map(|st| orbit::find_passes(&s.orbit, st, 0.0, s.sim.duration_s, s.sim.time_step_s))
        .collect()
}

/// Sum of the achievable downlink rates of `devices` toward `station` at
/// `t`, or zero unless every link closes above the elevation mask.
pub fn downlink_rate(s: &Scenario, station: &GroundStation, devices: &[Assignment], t: f64) -> Result<f64, SimError> {
    let geo = orbit::sample(&s.orbit, station, t);
    if geo.elevation_deg < station.min_elevation_deg {
        return Ok(0.0);
    }
    let mut total = 0.0;
    for a in devices {
        let assessment = match a {
            Assignment::Optical => {
                link::optical_assess(&s.optical, geo.slant_range_km, s.link.pointing_error_3sigma_deg, Direction::Down)
            }
            Assignment::Sdr { frontend, .. } => {
                let fe = s.frontend(frontend).ok_or_else(|| crate::LinkError::NoLinkFrequency(frontend.0.clone()))?;
                let params = s.link.bands.get(&fe.band).ok_or(crate::LinkError::MissingRequiredCn0(fe.band))?;
                link::rf_assess(fe, params, geo.slant_range_km)?
            }
        };
        if !assessment.closed {
            return Ok(0.0);
        }
        total += assessment.achievable_rate_bps;
    }
    Ok(total)
}

/// A downlink entry clipped to the horizon with its closed-link runs.
struct Session<'a> {
    entry: &'a ScheduleEntry,
    station: String,
    rate: f64,
    runs: Vec<(f64, f64)>,
    link_bits: f64,
    requested: u64,
    downlinked: u64,
}

impl Session<'_> {
    fn open_during(&self, a: f64, b: f64) -> bool {
        self.runs.iter().any(|&(r0, r1)| r0 <= a && b <= r1)
    }

    fn elapsed_open(&self, t: f64) -> f64 {
        self.runs.iter().map(|&(r0, r1)| (t.min(r1) - r0).max(0.0)).sum()
    }
}

/// Executes `sched` over the scenario horizon.
///
/// An invalid schedule is refused unless `force` is set, in which case it
/// runs anyway and each violation is reported as an event.
pub fn run(s: &Scenario, sched: &Schedule, force: bool) -> Result<Report, SimError> {
    let horizon = s.sim.duration_s;
    let dt = s.sim.time_step_s;
    for e in &sched.entries {
        if let Some(name) = &e.station {
            if s.station(name).is_none() {
                return Err(SimError::UnknownStation(name.clone()));
            }
        }
    }
    let passes = scenario_passes(s);
    let violations = schedule::validate(sched, s, &passes);
    if !violations.is_empty() && !force {
        return Err(SimError::InvalidSchedule(violations));
    }

    let mut events = Vec::new();
    for p in &passes {
        let detail = format!("{} max elevation {:.2} deg", p.station, p.max_elevation_deg);
        events.push(SimEvent { t: p.t_start, kind: EventKind::PassStart, device: None, detail: detail.clone() });
        events.push(SimEvent { t: p.t_end, kind: EventKind::PassEnd, device: None, detail });
    }
    if force {
        for v in &violations {
            events.push(SimEvent {
                t: v.t,
                kind: EventKind::Violation,
                device: None,
                detail: format!("{}: {}", v.code.as_str(), v.detail),
            });
        }
    }

    // Entries clipped to the horizon; anything left empty never runs.
    let entries: Vec<ScheduleEntry> = sched
        .entries
        .iter()
        .filter_map(|e| {
            let (a, b) = (e.t_start.max(0.0), e.t_end.min(horizon));
            (a < b).then(|| ScheduleEntry { t_start: a, t_end: b, ..e.clone() })
        })
        .collect();

    let mut sessions = Vec::new();
    for e in entries.iter().filter(|e| e.kind == EntryKind::Downlink) {
        let Some(station) = e.station.as_deref().and_then(|n| s.station(n)) else { continue };
        // Surfaces configuration errors once; the predicate below cannot.
        downlink_rate(s, station, &e.devices, e.t_start)?;
        let open = |t: f64| downlink_rate(s, station, &e.devices, t).is_ok_and(|r| r > 0.0);
        let runs: Vec<(f64, f64)> =
            window::find_runs(e.t_start, e.t_end, dt, open).into_iter().map(|r| (r.start, r.end)).collect();
        let rate = runs.first().map_or(Ok(0.0), |r| downlink_rate(s, station, &e.devices, r.0))?;
        let device = e.devices.first().map(|a| format!("{}", a.device()));
        for &(r0, r1) in &runs {
            let detail = format!("{} {} to {}", e.id, e.band.label(), station.name);
            events.push(SimEvent { t: r0, kind: EventKind::LinkOpen, device: device.clone(), detail: detail.clone() });
            events.push(SimEvent { t: r1, kind: EventKind::LinkClose, device: device.clone(), detail });
        }
        sessions.push(Session {
            entry: e,
            station: station.name.clone(),
            rate,
            runs,
            link_bits: 0.0,
            requested: 0,
            downlinked: 0,
        });
    }

    let mut cuts: Vec<f64> = Vec::new();
    let steps = libm::floor(horizon / dt) as u64;
    cuts.extend((0..=steps).map(|k| k as f64 * dt));
    cuts.push(horizon);
    cuts.extend(entries.iter().flat_map(|e| [e.t_start, e.t_end]));
    cuts.extend(passes.iter().flat_map(|p| [p.t_start, p.t_end]));
    cuts.extend(sessions.iter().flat_map(|x| x.runs.iter().flat_map(|&(a, b)| [a, b])));
    cuts.retain(|&t| (0.0..=horizon).contains(&t));
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();

    let capacity = s.platform.battery_capacity_wh;
    let mut payload = PayloadState::new(s);
    let mut users: BTreeMap<Device, usize> = BTreeMap::new();
    let mut energy = EnergyState::full(capacity);
    let mut produced: BTreeMap<usize, u64> = BTreeMap::new();
    let mut totals = Totals::default();
    let mut depleted = false;
    let mut overflowing = false;

    let mut energy_trace = Vec::with_capacity(cuts.len());
    let mut storage_trace = Vec::with_capacity(cuts.len());
    let gen0 = energy::generation_at(0.0, &s.orbit, &s.generation);
    energy_trace.push(EnergySample { t_s: 0.0, soc_wh: energy.soc_wh, generation_w: gen0, load_w: 0.0 });
    storage_trace.push(StorageSample { t_s: 0.0, used_bits: 0, produced_bits: 0, downlinked_bits: 0, dropped_bits: 0 });

    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        boundary(a, &entries, &mut payload, &mut users, &mut events, force)?;

        let load = energy::total_load(&payload).total_w;
        let generation = energy::generation_at(a, &s.orbit, &s.generation);
        let before = energy.soc_wh;
        let (next, depletion) = energy::step(&energy, generation, load, b - a, capacity);
        energy = next;
        match depletion {
            Some(d) if !depleted => {
                let t = a + before * 3600.0 / (load - generation);
                events.push(SimEvent {
                    t: t.clamp(a, b),
                    kind: EventKind::Depletion,
                    device: None,
                    detail: format!("battery empty, {:.6} Wh unsupplied by t={b} s", d.deficit_wh),
                });
                depleted = true;
            }
            Some(_) => {}
            None => depleted = energy.soc_wh <= 0.0 && depleted,
        }
        energy_trace.push(EnergySample { t_s: b, soc_wh: energy.soc_wh, generation_w: generation, load_w: load });

        let mut dropped_now = 0;
        for (i, e) in entries.iter().enumerate() {
            if e.kind != EntryKind::Experiment || e.data_rate_bps <= 0.0 || !(e.t_start <= a && b <= e.t_end) {
                continue;
            }
            let cumulative = libm::floor(e.data_rate_bps * (b - e.t_start)) as u64;
            let so_far = produced.entry(i).or_insert(0);
            let bits = cumulative.saturating_sub(*so_far);
            *so_far = cumulative.max(*so_far);
            totals.produced_bits += bits;
            if let Some(o) = payload.record_data(&e.id, bits) {
                dropped_now += o.dropped_bits;
            }
        }
        if dropped_now > 0 {
            totals.dropped_bits += dropped_now;
            if !overflowing {
                events.push(SimEvent {
                    t: a,
                    kind: EventKind::Overflow,
                    device: None,
                    detail: format!("store full, {dropped_now} bits dropped in [{a}, {b}]"),
                });
            }
        }
        overflowing = dropped_now > 0;

        for x in sessions.iter_mut().filter(|x| x.open_during(a, b)) {
            x.link_bits += x.rate * (b - a);
            let cumulative = libm::floor(x.rate * x.elapsed_open(b)) as u64;
            let want = cumulative.saturating_sub(x.requested);
            x.requested = cumulative.max(x.requested);
            let got = payload.drain_data(want);
            x.downlinked += got;
            totals.downlinked_bits += got;
        }

        storage_trace.push(StorageSample {
            t_s: b,
            used_bits: payload.store.used_bits(),
            produced_bits: totals.produced_bits,
            downlinked_bits: totals.downlinked_bits,
            dropped_bits: totals.dropped_bits,
        });
    }
    if let Some(&end) = cuts.last() {
        boundary(end, &entries, &mut payload, &mut users, &mut events, force)?;
    }
    totals.remaining_bits = payload.store.used_bits();

    let pass_volumes = sessions
        .iter()
        .map(|x| PassVolume {
            entry_id: x.entry.id.clone(),
            station: x.station.clone(),
            band: x.entry.band,
            t_start: x.entry.t_start,
            t_end: x.entry.t_end,
            link_bits: x.link_bits,
            downlinked_bits: x.downlinked,
        })
        .collect();

    events.sort_by(|x, y| x.t.total_cmp(&y.t).then(x.kind.cmp(&y.kind)));
    Ok(Report {
        scenario_digest: scenario_digest(s),
        events,
        energy_trace,
        storage_trace,
        pass_volumes,
        duty_cycle: schedule::duty_cycle(sched, s.orbital_period_s(), horizon),
        violations,
        totals,
    })
}

/// Applies entry ends, then entry starts, at time `t`.
fn boundary(
    t: f64,
    entries: &[ScheduleEntry],
    payload: &mut PayloadState,
    users: &mut BTreeMap<Device, usize>,
    events: &mut Vec<SimEvent>,
    force: bool,
) -> Result<(), SimError> {
    let mut change = |payload: &mut PayloadState, device: &Device, mode: DeviceMode, id: &str| {
        let from = payload.mode(device).map_or("?", DeviceMode::as_str);
        let result = payload.set_mode(device, mode);
        if result.is_ok() {
            events.push(SimEvent {
                t,
                kind: EventKind::ModeChange,
                device: Some(format!("{device}")),
                detail: format!("{from} -> {} ({id})", mode.as_str()),
            });
        }
        result
    };
    for e in entries.iter().filter(|e| e.t_end == t) {
        payload.active_experiments.remove(&e.id);
        for a in &e.devices {
            let d = a.device();
            let n = users.entry(d.clone()).or_insert(0);
            *n = n.saturating_sub(1);
            if *n == 0 && payload.mode(&d) == Some(DeviceMode::Active) {
                change(payload, &d, DeviceMode::Standby, &e.id)?;
                change(payload, &d, DeviceMode::Off, &e.id)?;
            }
        }
    }
    for e in entries.iter().filter(|e| e.t_start == t) {
        if e.kind == EntryKind::Experiment {
            payload.active_experiments.insert(e.id.clone(), e.extra_power_w);
        }
        for a in &e.devices {
            let d = a.device();
            let n = users.entry(d.clone()).or_insert(0);
            *n += 1;
            if payload.mode(&d) == Some(DeviceMode::Off) {
                change(payload, &d, DeviceMode::Standby, &e.id)?;
                change(payload, &d, DeviceMode::Active, &e.id)?;
            }
            if let Assignment::Sdr { sdr, frontend } = a {
                match payload.activate_frontend(sdr, frontend) {
                    Ok(()) => {}
                    // A forced run keeps going; the conflict is already reported.
                    Err(_) if force => {}
                    Err(err) => return Err(err.into()),
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{default_scenario, demo_scenario, ExperimentSpec};
    use crate::schedule::{link_windows, plan_greedy};
    use alloc::string::ToString;
    use alloc::vec;

    fn s_band_downlink(s: &Scenario, seconds: f64) -> ScheduleEntry {
        let devices = vec![Assignment::Sdr { sdr: "Minerva-A".into(), frontend: "FE2".into() }];
        let w = scenario_passes(s)
            .iter()
            .filter(|p| p.station == "Barcelona")
            .flat_map(|p| link_windows(s, p, &devices))
            .find(|w| w.end - w.start >= seconds + 20.0)
            .expect("a long enough S-band pass");
        ScheduleEntry {
            id: "downlink-000".to_string(),
            kind: EntryKind::Downlink,
            t_start: w.start + 10.0,
            t_end: w.start + 10.0 + seconds,
            devices,
            band: Band::S,
            station: w.station,
            extra_power_w: 0.0,
            data_rate_bps: 0.0,
        }
    }

    #[test]
    fn empty_schedule_one_orbit() {
        let mut s = default_scenario();
        s.sim.duration_s = s.orbital_period_s();
        let r = run(&s, &Schedule::default(), false).unwrap();
        assert!(r.events.iter().all(|e| matches!(e.kind, EventKind::PassStart | EventKind::PassEnd)));
        assert!(r.energy_trace.iter().all(|e| (0.0..=42.0).contains(&e.soc_wh)));
        assert_eq!(r.totals, Totals::default());
        assert_eq!(r.duty_cycle.per_orbit, [0.0]);
    }

    #[test]
    fn s_band_pass_volume() {
        // A 10 deg mask never leaves 600 s of visibility at 550 km.
        let mut s = default_scenario();
        s.stations[0].min_elevation_deg = 0.0;
        let e = s_band_downlink(&s, 600.0);
        let r = run(&s, &Schedule::new(vec![e]), false).unwrap();
        assert_eq!(r.pass_volumes.len(), 1);
        let v = &r.pass_volumes[0];
        // Oracle: 1.152 Mbit/s for 600 s.
        assert!((v.link_bits - 6.912e8).abs() <= 6.912e5, "{}", v.link_bits);
        // Nothing was stored, so nothing came down.
        assert_eq!(v.downlinked_bits, 0);
        let modes = r.events.iter().filter(|e| e.kind == EventKind::ModeChange).count();
        assert_eq!(modes, 4);
    }

    #[test]
    fn depletion_at_constant_load() {
        let mut s = default_scenario();
        s.generation.sunlit_power_w = 0.0;
        s.sim.duration_s = 7200.0;
        let e = ScheduleEntry {
            id: "burn".to_string(),
            kind: EntryKind::Experiment,
            t_start: 0.0,
            t_end: 7200.0,
            devices: vec![Assignment::Sdr { sdr: "Minerva-A".into(), frontend: "FE1".into() }],
            band: Band::Uhf,
            station: None,
            extra_power_w: 0.0,
            data_rate_bps: 0.0,
        };
        let r = run(&s, &Schedule::new(vec![e]), false).unwrap();
        let dep: Vec<_> = r.events.iter().filter(|e| e.kind == EventKind::Depletion).collect();
        assert_eq!(dep.len(), 1);
        // Oracle: 42 Wh / 30 W = 1.4 h.
        assert!((dep[0].t - 5040.0).abs() <= s.sim.time_step_s);
        assert_eq!(r.energy_trace.last().unwrap().soc_wh, 0.0);
    }

    #[test]
    fn conservation_with_overflow() {
        let mut s = default_scenario();
        s.platform.data_storage_bytes = 1_000_000;
        s.sim.duration_s = 3600.0;
        let e = ScheduleEntry {
            id: "flood".to_string(),
            kind: EntryKind::Experiment,
            t_start: 0.0,
            t_end: 1000.0,
            devices: vec![Assignment::Sdr { sdr: "Minerva-A".into(), frontend: "FE1".into() }],
            band: Band::Uhf,
            station: None,
            extra_power_w: 0.0,
            data_rate_bps: 50_000.0,
        };
        let r = run(&s, &Schedule::new(vec![e]), true).unwrap();
        let t = r.totals;
        assert_eq!(t.produced_bits, 50_000_000);
        assert_eq!(t.produced_bits, t.downlinked_bits + t.dropped_bits + t.remaining_bits);
        assert_eq!(t.remaining_bits, 8_000_000);
        assert!(r.events.iter().any(|e| e.kind == EventKind::Overflow));
        assert!(r.events.iter().any(|e| e.kind == EventKind::Violation));
    }

    #[test]
    fn refuses_invalid_schedule_unless_forced() {
        let s = default_scenario();
        let mut e = s_band_downlink(&s, 60.0);
        e.t_start -= 5000.0;
        let sched = Schedule::new(vec![e]);
        assert!(matches!(run(&s, &sched, false), Err(SimError::InvalidSchedule(_))));
        assert!(run(&s, &sched, true).is_ok());
    }

    #[test]
    fn demo_plan_runs_clean_and_deterministic() {
        let s = demo_scenario();
        let passes = scenario_passes(&s);
        let reqs: Vec<ExperimentSpec> = s.experiments.clone();
        let plan = plan_greedy(&reqs, &passes, &s);
        let a = run(&s, &plan.schedule, false).unwrap();
        let b = run(&s, &plan.schedule, false).unwrap();
        assert_eq!(a, b);
        assert!(a.duty_cycle.min >= s.platform.duty_cycle_floor);
        let t = a.totals;
        assert!(t.produced_bits > 0);
        assert!(t.downlinked_bits > 0);
        assert_eq!(t.produced_bits, t.downlinked_bits + t.dropped_bits + t.remaining_bits);
        assert!(a.events.windows(2).all(|w| (w[0].t, w[0].kind) <= (w[1].t, w[1].kind)));
        assert!(a.events.iter().all(|e| (0.0..=s.sim.duration_s).contains(&e.t)));
        assert!(a.energy_trace.iter().all(|e| e.load_w <= 85.0));
    }
}
