use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::{
    experiment_entry, link_windows, placement_windows, request_order, resource_violations, window_violations,
    Assignment, EntryKind, PlacementWindow, Schedule, ScheduleEntry,
};
use crate::orbit::PassWindow;
use crate::payload::{flatsat_check, Finding};
use crate::scenario::{Band, ExperimentSpec, Scenario};

#[derive(Debug, Clone, PartialEq)]
pub enum SkipReason {
    FlatsatFailed(Vec<Finding>),
    NoContactWindow,
    NoFeasibleSlot,
}

impl SkipReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            SkipReason::FlatsatFailed(_) => "flatsat-failed",
            SkipReason::NoContactWindow => "no-contact-window",
            SkipReason::NoFeasibleSlot => "no-feasible-slot",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Skip {
    pub id: String,
    pub reason: SkipReason,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Plan {
    pub schedule: Schedule,
    pub skipped: Vec<Skip>,
}

impl Plan {
    pub fn placed(&self) -> usize {
        self.schedule.experiments().count()
    }
}

/// Places requests one at a time in planning order at the earliest start
/// that keeps the schedule free of violations, then fills the remaining
/// closed-link pass time with downlink sessions.
///
/// Candidate starts are the beginning of each placement window and the end
/// of every entry already placed; those are the only instants where a
/// blocked resource can become free.
pub fn plan_greedy(requests: &[ExperimentSpec], passes: &[PassWindow], s: &Scenario) -> Plan {
    let mut ordered: Vec<&ExperimentSpec> = requests.iter().collect();
    ordered.sort_by(|a, b| request_order(a, b));

    let mut entries: Vec<ScheduleEntry> = Vec::new();
    let mut skipped = Vec::new();
    for exp in ordered {
        if let Err(findings) = flatsat_check(exp, s) {
            skipped.push(Skip { id: exp.id.clone(), reason: SkipReason::FlatsatFailed(findings) });
            continue;
        }
        let windows = placement_windows(exp, passes, s);
        if windows.is_empty() {
            let reason = if exp.needs_contact { SkipReason::NoContactWindow } else { SkipReason::NoFeasibleSlot };
            skipped.push(Skip { id: exp.id.clone(), reason });
            continue;
        }
        match earliest_fit(exp, &windows, &entries, passes, s) {
            Some(e) => entries.push(e),
            None => skipped.push(Skip { id: exp.id.clone(), reason: SkipReason::NoFeasibleSlot }),
        }
    }
    insert_downlinks(&mut entries, passes, s);
    Plan { schedule: Schedule::new(entries), skipped }
}

fn earliest_fit(
    exp: &ExperimentSpec,
    windows: &[PlacementWindow],
    placed: &[ScheduleEntry],
    passes: &[PassWindow],
    s: &Scenario,
) -> Option<ScheduleEntry> {
    let mut candidates: Vec<(f64, usize)> = Vec::new();
    for (i, w) in windows.iter().enumerate() {
        let last = w.end - exp.duration_s;
        let starts = core::iter::once(w.start).chain(placed.iter().map(|e| e.t_end).filter(|&t| t > w.start));
        candidates.extend(starts.filter(|&t| t <= last).map(|t| (t, i)));
    }
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    candidates.dedup();

    let mut trial = placed.to_vec();
    for (t, i) in candidates {
        let Some(e) = experiment_entry(exp, s, &windows[i], t) else { continue };
        if !window_violations(core::slice::from_ref(&e), s, passes).is_empty() {
            continue;
        }
        trial.push(e);
        if resource_violations(&trial, s).is_empty() {
            return trial.pop();
        }
        trial.pop();
    }
    None
}

/// Downlink bands in order of preference: fastest first.
const DOWNLINK_BANDS: [Band; 5] = [Band::Optical, Band::Ka, Band::X, Band::S, Band::Uhf];

fn downlink_assignment(band: Band, s: &Scenario) -> Option<(Assignment, f64)> {
    if band == Band::Optical {
        return Some((Assignment::Optical, s.optical.downlink_max_rate_bps));
    }
    s.sdrs.iter().flat_map(|u| u.slots.iter().map(move |fe| (u, fe))).find_map(|(u, fe_id)| {
        let fe = s.frontend(fe_id).filter(|fe| fe.band == band && fe.link_frequency_hz().is_some())?;
        Some((Assignment::Sdr { sdr: u.id.clone(), frontend: fe_id.clone() }, fe.max_gross_rate_bps))
    })
}

/// Bits produced by experiment entries up to `t`.
fn produced_by(entries: &[ScheduleEntry], t: f64) -> f64 {
    entries
        .iter()
        .filter(|e| e.kind == EntryKind::Experiment)
        .map(|e| e.data_rate_bps * (t.min(e.t_end) - e.t_start).max(0.0))
        .sum()
}

fn insert_downlinks(entries: &mut Vec<ScheduleEntry>, passes: &[PassWindow], s: &Scenario) {
    let mut ordered: Vec<&PassWindow> = passes.iter().collect();
    ordered.sort_by(|a, b| a.t_start.total_cmp(&b.t_start).then_with(|| a.station.cmp(&b.station)));
    let mut drained = 0.0;
    let mut next_id = 0usize;
    for pass in ordered {
        let Some(station) = s.station(&pass.station) else { continue };
        for band in DOWNLINK_BANDS {
            if !station.bands.contains(&band) {
                continue;
            }
            let Some((assignment, rate)) = downlink_assignment(band, s) else { continue };
            let devices = alloc::vec![assignment];
            for w in link_windows(s, pass, &devices) {
                let tag = format!("downlink-{next_id:03}");
                if let Some(e) = fit_downlink(&tag, band, &devices, rate, &w, entries, drained, passes, s) {
                    drained += rate * e.duration_s();
                    entries.push(e);
                    next_id += 1;
                    break;
                }
            }
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn fit_downlink(
    tag: &str,
    band: Band,
    devices: &[Assignment],
    rate: f64,
    w: &PlacementWindow,
    entries: &[ScheduleEntry],
    drained: f64,
    passes: &[PassWindow],
    s: &Scenario,
) -> Option<ScheduleEntry> {
    let device = devices[0].device();
    let mut starts: Vec<f64> = core::iter::once(w.start)
        .chain(entries.iter().map(|e| e.t_end).filter(|&t| t > w.start && t < w.end))
        .collect();
    starts.sort_by(f64::total_cmp);
    starts.dedup();

    let mut trial = entries.to_vec();
    for t in starts {
        let backlog = produced_by(entries, t) - drained;
        if !(backlog > 0.0) {
            continue;
        }
        let wanted = libm::ceil(backlog / rate).max(1.0);
        // Stop before the next entry that holds the same device.
        let blocked = entries
            .iter()
            .filter(|e| e.t_start >= t && e.devices.iter().any(|a| a.device() == device))
            .map(|e| e.t_start)
            .fold(w.end, f64::min);
        let mut end = (t + wanted).min(blocked);
        for _ in 0..12 {
            if !(end > t) {
                break;
            }
            let e = ScheduleEntry {
                id: tag.into(),
                kind: EntryKind::Downlink,
                t_start: t,
                t_end: end,
                devices: devices.to_vec(),
                band,
                station: w.station.clone(),
                extra_power_w: 0.0,
                data_rate_bps: 0.0,
            };
            if window_violations(core::slice::from_ref(&e), s, passes).is_empty() {
                trial.push(e);
                if resource_violations(&trial, s).is_empty() {
                    return trial.pop();
                }
                trial.pop();
            }
            end = t + 0.5 * (end - t);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::orbit::find_passes;
    use crate::scenario::{default_scenario, demo_scenario};
    use crate::schedule::{validate, ViolationCode};
    use alloc::string::ToString;
    use alloc::vec;

    fn request(id: &str, priority: i32, fe: &str, duration_s: f64, window: (f64, f64)) -> ExperimentSpec {
        ExperimentSpec {
            id: id.to_string(),
            priority,
            frontends: vec![fe.into()],
            requires_optical: false,
            needs_contact: false,
            duration_s,
            extra_power_w: 0.0,
            data_rate_bps: 0.0,
            earliest_start_s: window.0,
            latest_end_s: window.1,
        }
    }

    #[test]
    fn empty_request_list() {
        let s = default_scenario();
        let plan = plan_greedy(&[], &[], &s);
        assert!(plan.schedule.entries.is_empty());
        assert!(plan.skipped.is_empty());
    }

    #[test]
    fn different_sdrs_run_concurrently() {
        let s = default_scenario();
        let reqs = [request("A", 1, "FE4", 300.0, (0.0, 300.0)), request("B", 1, "FE1", 300.0, (0.0, 300.0))];
        let plan = plan_greedy(&reqs, &[], &s);
        assert_eq!(plan.placed(), 2);
        assert!(plan.schedule.entries.iter().all(|e| e.t_start == 0.0));
        assert!(validate(&plan.schedule, &s, &[]).is_empty());
    }

    #[test]
    fn same_frontend_is_serialized_or_skipped() {
        let s = default_scenario();
        let reqs = [request("low", 1, "FE2", 300.0, (0.0, 300.0)), request("high", 2, "FE2", 300.0, (0.0, 300.0))];
        let plan = plan_greedy(&reqs, &[], &s);
        assert_eq!(plan.placed(), 1);
        assert_eq!(plan.schedule.entries[0].id, "high");
        assert_eq!(plan.skipped.len(), 1);
        assert_eq!(plan.skipped[0].id, "low");
        assert_eq!(plan.skipped[0].reason.as_str(), "no-feasible-slot");

        let reqs = [request("a", 1, "FE2", 300.0, (0.0, 900.0)), request("b", 1, "FE1", 300.0, (0.0, 900.0))];
        let plan = plan_greedy(&reqs, &[], &s);
        let starts: Vec<f64> = plan.schedule.entries.iter().map(|e| e.t_start).collect();
        assert_eq!(starts, [0.0, 300.0]);
    }

    #[test]
    fn flatsat_failures_are_skipped() {
        let s = default_scenario();
        let mut r = request("hot", 1, "FE1", 300.0, (0.0, 900.0));
        r.extra_power_w = 60.0;
        let plan = plan_greedy(&[r], &[], &s);
        assert_eq!(plan.skipped[0].reason.as_str(), "flatsat-failed");
    }

    #[test]
    fn contact_request_without_pass() {
        let s = default_scenario();
        let mut r = request("ka", 1, "FE4", 300.0, (0.0, 900.0));
        r.needs_contact = true;
        let plan = plan_greedy(&[r], &[], &s);
        assert_eq!(plan.skipped[0].reason, SkipReason::NoContactWindow);
    }

    #[test]
    fn demo_plan_is_clean_and_meets_floor() {
        let s = demo_scenario();
        let passes: Vec<PassWindow> = s
            .stations
            .iter()
            .flat_map(|st| find_passes(&s.orbit, st, 0.0, s.sim.duration_s, s.sim.time_step_s))
            .collect();
        let plan = plan_greedy(&s.experiments, &passes, &s);
        let v = validate(&plan.schedule, &s, &passes);
        assert!(v.is_empty(), "{v:?}");
        assert!(!v.iter().any(|v| v.code == ViolationCode::DutyFloor));
        assert!(plan.schedule.entries.iter().any(|e| e.kind == EntryKind::Downlink));
    }
}
