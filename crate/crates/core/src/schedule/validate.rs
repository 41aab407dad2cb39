use alloc::collections::BTreeSet;
use alloc::format;
use alloc::vec::Vec;

use super::{duty_cycle, links_closed, EntryKind, Schedule, ScheduleEntry, Violation, ViolationCode};
use crate::orbit::PassWindow;
use crate::payload::Device;
use crate::scenario::Scenario;

/// Every violation of `sched` against the scenario's contracts, ordered by
/// time then code.
pub fn validate(sched: &Schedule, s: &Scenario, passes: &[PassWindow]) -> Vec<Violation> {
    let mut out = resource_violations(&sched.entries, s);
    out.extend(window_violations(&sched.entries, s, passes));
    if s.sim.enforce_duty_floor {
        out.extend(duty_violations(sched, s));
    }
    let horizon = s.sim.duration_s;
    for v in &mut out {
        v.t = v.t.clamp(0.0, horizon);
    }
    out.sort_by(|a, b| a.t.total_cmp(&b.t).then(a.code.cmp(&b.code)).then_with(|| a.detail.cmp(&b.detail)));
    out
}

/// Checks that depend on how entries interact: device double-booking, the
/// peak and sustained supply limits, and storage capacity. Removing an
/// entry never adds one of these.
pub fn resource_violations(entries: &[ScheduleEntry], s: &Scenario) -> Vec<Violation> {
    let mut out = Vec::new();
    slot_conflicts(entries, s, &mut out);
    supply(entries, s, &mut out);
    storage(entries, s, &mut out);
    out
}

fn slot_conflicts(entries: &[ScheduleEntry], s: &Scenario, out: &mut Vec<Violation>) {
    for e in entries {
        let mut devices = BTreeSet::new();
        for a in &e.devices {
            if let super::Assignment::Sdr { sdr, frontend } = a {
                let mounted = s.sdr(sdr).is_some_and(|u| u.slots.contains(frontend));
                if !mounted {
                    out.push(Violation {
                        code: ViolationCode::SlotConflict,
                        t: e.t_start,
                        detail: format!("{}: {frontend} is not a slot of {sdr}", e.id),
                    });
                }
            }
            if !devices.insert(a.device()) {
                out.push(Violation {
                    code: ViolationCode::SlotConflict,
                    t: e.t_start,
                    detail: format!("{}: claims {} twice", e.id, a.device()),
                });
            }
        }
    }
    for (i, a) in entries.iter().enumerate() {
        for b in &entries[i + 1..] {
            if !a.overlaps(b) {
                continue;
            }
            let da: BTreeSet<Device> = a.devices.iter().map(|x| x.device()).collect();
            for d in b.devices.iter().map(|x| x.device()) {
                if da.contains(&d) {
                    out.push(Violation {
                        code: ViolationCode::SlotConflict,
                        t: a.t_start.max(b.t_start),
                        detail: format!("{} and {} both use {d}", a.id, b.id),
                    });
                }
            }
        }
    }
}

/// Piecewise-constant total load: `(start, end, watts)` segments between
/// consecutive entry boundaries.
fn load_segments(entries: &[ScheduleEntry], s: &Scenario) -> Vec<(f64, f64, f64)> {
    let mut cuts: Vec<f64> = entries.iter().flat_map(|e| [e.t_start, e.t_end]).collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    cuts.windows(2)
        .map(|w| {
            let load = entries.iter().filter(|e| e.is_active_at(w[0])).map(|e| e.load_w(s)).sum();
            (w[0], w[1], load)
        })
        .collect()
}

/// Maximal runs of consecutive segments satisfying `over`.
fn runs(segments: &[(f64, f64, f64)], over: impl Fn(f64) -> bool) -> Vec<(f64, f64, f64)> {
    let mut out: Vec<(f64, f64, f64)> = Vec::new();
    let mut open: Option<(f64, f64, f64)> = None;
    for &(a, b, w) in segments {
        if over(w) {
            open = Some(match open {
                Some((s0, e0, peak)) if e0 == a => (s0, b, peak.max(w)),
                Some(run) => {
                    out.push(run);
                    (a, b, w)
                }
                None => (a, b, w),
            });
        } else if let Some(run) = open.take() {
            out.push(run);
        }
    }
    out.extend(open);
    out
}

fn supply(entries: &[ScheduleEntry], s: &Scenario, out: &mut Vec<Violation>) {
    let p = &s.platform;
    let segments = load_segments(entries, s);
    for (a, b, w) in runs(&segments, |w| w > p.supply_peak_w) {
        out.push(Violation {
            code: ViolationCode::PeakSupply,
            t: a,
            detail: format!("load {w} W > {} W peak supply over [{a}, {b}]", p.supply_peak_w),
        });
    }
    for (a, b, w) in runs(&segments, |w| w > p.supply_nominal_w) {
        if b - a >= p.sustained_window_s {
            out.push(Violation {
                code: ViolationCode::NominalSupply,
                t: a,
                detail: format!(
                    "load up to {w} W above {} W nominal for {} s (limit {} s)",
                    p.supply_nominal_w,
                    b - a,
                    p.sustained_window_s
                ),
            });
        }
    }
}

/// Production alone must fit; downlink credit is not counted.
fn storage(entries: &[ScheduleEntry], s: &Scenario, out: &mut Vec<Violation>) {
    let capacity = s.platform.storage_capacity_bits() as f64;
    let producers: Vec<&ScheduleEntry> =
        entries.iter().filter(|e| e.kind == EntryKind::Experiment && e.data_rate_bps > 0.0).collect();
    let mut cuts: Vec<f64> = producers.iter().flat_map(|e| [e.t_start, e.t_end]).collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut stored = 0.0;
    for w in cuts.windows(2) {
        let rate: f64 = producers.iter().filter(|e| e.is_active_at(w[0])).map(|e| e.data_rate_bps).sum();
        let next = stored + rate * (w[1] - w[0]);
        if next > capacity {
            let t = w[0] + (capacity - stored) / rate;
            out.push(Violation {
                code: ViolationCode::StorageOverflow,
                t,
                detail: format!("{next} bits produced by t={} s exceed {capacity} bits of storage", w[1]),
            });
            return;
        }
        stored = next;
    }
}

/// Per-entry placement checks: inside the horizon and, for entries bound to
/// a station, inside one of its passes with every link closed.
pub fn window_violations(entries: &[ScheduleEntry], s: &Scenario, passes: &[PassWindow]) -> Vec<Violation> {
    let mut out = Vec::new();
    for e in entries {
        if !(e.t_start < e.t_end) || e.t_start < 0.0 || e.t_end > s.sim.duration_s {
            out.push(Violation {
                code: ViolationCode::WindowMiss,
                t: e.t_start,
                detail: format!("{}: [{}, {}] is not a valid interval inside the horizon", e.id, e.t_start, e.t_end),
            });
            continue;
        }
        let Some(name) = &e.station else {
            if e.kind == EntryKind::Downlink {
                out.push(Violation {
                    code: ViolationCode::WindowMiss,
                    t: e.t_start,
                    detail: format!("{}: downlink without a ground station", e.id),
                });
            }
            continue;
        };
        let miss = |why: &str| Violation { code: ViolationCode::WindowMiss, t: e.t_start, detail: format!("{}: {why}", e.id) };
        let Some(station) = s.station(name) else {
            out.push(miss(&format!("unknown station {name}")));
            continue;
        };
        let Some(pass) = passes.iter().find(|p| &p.station == name && p.contains(e.t_start, e.t_end)) else {
            out.push(miss(&format!("not inside any {name} pass")));
            continue;
        };
        let probe = core::iter::once(e.t_start)
            .chain(pass.samples.iter().map(|g| g.t).filter(|&t| t > e.t_start && t < e.t_end))
            .chain(core::iter::once(e.t_end));
        for t in probe {
            match links_closed(s, station, &e.devices, t) {
                Ok(true) => {}
                Ok(false) => {
                    out.push(Violation {
                        code: ViolationCode::WindowMiss,
                        t,
                        detail: format!("{}: link to {name} not closed at t={t} s", e.id),
                    });
                    break;
                }
                Err(err) => {
                    out.push(miss(&format!("{err}")));
                    break;
                }
            }
        }
    }
    out
}

fn duty_violations(sched: &Schedule, s: &Scenario) -> Vec<Violation> {
    let period = s.orbital_period_s();
    let floor = s.platform.duty_cycle_floor;
    duty_cycle(sched, period, s.sim.duration_s)
        .per_orbit
        .iter()
        .enumerate()
        .filter(|(_, &d)| d < floor)
        .map(|(k, &d)| Violation {
            code: ViolationCode::DutyFloor,
            t: k as f64 * period,
            detail: format!("orbit {k}: duty cycle {d:.4} below floor {floor}"),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::super::{Assignment, ScheduleEntry};
    use super::*;
    use crate::scenario::{default_scenario, Band};
    use alloc::string::ToString;
    use alloc::vec;

    fn on(sdr: &str, fe: &str) -> Assignment {
        Assignment::Sdr { sdr: sdr.into(), frontend: fe.into() }
    }

    fn entry(id: &str, t0: f64, t1: f64, devices: Vec<Assignment>, extra: f64) -> ScheduleEntry {
        ScheduleEntry {
            id: id.to_string(),
            kind: EntryKind::Experiment,
            t_start: t0,
            t_end: t1,
            devices,
            band: Band::Uhf,
            station: None,
            extra_power_w: extra,
            data_rate_bps: 0.0,
        }
    }

    fn codes(v: &[Violation]) -> Vec<ViolationCode> {
        v.iter().map(|v| v.code).collect()
    }

    #[test]
    fn double_booked_sdr() {
        let s = default_scenario();
        let sched = Schedule::new(vec![
            entry("a", 0.0, 300.0, vec![on("Minerva-A", "FE1")], 0.0),
            entry("b", 200.0, 500.0, vec![on("Minerva-A", "FE2")], 0.0),
        ]);
        assert_eq!(codes(&validate(&sched, &s, &[])), [ViolationCode::SlotConflict]);
    }

    #[test]
    fn touching_entries_do_not_conflict() {
        let s = default_scenario();
        let sched = Schedule::new(vec![
            entry("a", 0.0, 300.0, vec![on("Minerva-A", "FE1")], 0.0),
            entry("b", 300.0, 500.0, vec![on("Minerva-A", "FE2")], 0.0),
        ]);
        assert!(validate(&sched, &s, &[]).is_empty());
    }

    #[test]
    fn wrong_slot_is_a_conflict() {
        let s = default_scenario();
        let sched = Schedule::new(vec![entry("a", 0.0, 300.0, vec![on("Minerva-A", "FE3")], 0.0)]);
        assert_eq!(codes(&validate(&sched, &s, &[])), [ViolationCode::SlotConflict]);
    }

    #[test]
    fn duty_floor_examples() {
        let mut s = default_scenario();
        s.sim.enforce_duty_floor = true;
        let t = s.orbital_period_s();
        s.sim.duration_s = t;
        assert_eq!(codes(&validate(&Schedule::default(), &s, &[])), [ViolationCode::DutyFloor]);
        let sched = Schedule::new(vec![
            entry("a", 0.0, 600.0, vec![on("Minerva-A", "FE1")], 0.0),
            entry("b", 1000.0, 1300.0, vec![on("Minerva-B", "FE4")], 0.0),
        ]);
        // 900 s of 5739 s = 0.1568 >= 0.15.
        assert!(validate(&sched, &s, &[]).is_empty());
    }

    #[test]
    fn peak_and_sustained_supply() {
        let s = default_scenario();
        // 30 + 30 + 25 + 1 = 86 W.
        let sched = Schedule::new(vec![
            entry("a", 0.0, 100.0, vec![on("Minerva-A", "FE1")], 1.0),
            entry("b", 0.0, 100.0, vec![on("Minerva-B", "FE4"), Assignment::Optical], 0.0),
        ]);
        assert_eq!(codes(&validate(&sched, &s, &[])), [ViolationCode::PeakSupply]);

        // 30 + 20 = 50 W for 700 s.
        let sched = Schedule::new(vec![entry("a", 0.0, 700.0, vec![on("Minerva-A", "FE1")], 20.0)]);
        assert_eq!(codes(&validate(&sched, &s, &[])), [ViolationCode::NominalSupply]);
        // Same load for 500 s is tolerated.
        let sched = Schedule::new(vec![entry("a", 0.0, 500.0, vec![on("Minerva-A", "FE1")], 20.0)]);
        assert!(validate(&sched, &s, &[]).is_empty());
        // Two back-to-back entries form one continuous 800 s run above 45 W.
        let sched = Schedule::new(vec![
            entry("a", 0.0, 400.0, vec![on("Minerva-A", "FE1")], 20.0),
            entry("b", 400.0, 800.0, vec![on("Minerva-B", "FE4")], 20.0),
        ]);
        assert_eq!(codes(&validate(&sched, &s, &[])), [ViolationCode::NominalSupply]);
    }

    #[test]
    fn storage_overflow_time() {
        let mut s = default_scenario();
        s.platform.data_storage_bytes = 1000;
        let mut e = entry("a", 100.0, 200.0, vec![on("Minerva-A", "FE1")], 0.0);
        e.data_rate_bps = 100.0;
        let v = validate(&Schedule::new(vec![e]), &s, &[]);
        assert_eq!(codes(&v), [ViolationCode::StorageOverflow]);
        assert!((v[0].t - 180.0).abs() < 1e-9);
    }

    #[test]
    fn downlink_needs_a_pass() {
        let s = default_scenario();
        let mut e = entry("downlink-000", 0.0, 100.0, vec![on("Minerva-A", "FE2")], 0.0);
        e.kind = EntryKind::Downlink;
        assert_eq!(codes(&validate(&Schedule::new(vec![e.clone()]), &s, &[])), [ViolationCode::WindowMiss]);
        e.station = Some("Barcelona".to_string());
        assert_eq!(codes(&validate(&Schedule::new(vec![e]), &s, &[])), [ViolationCode::WindowMiss]);
    }

    #[test]
    fn outside_horizon_is_a_window_miss() {
        let s = default_scenario();
        let sched = Schedule::new(vec![entry("late", 86_300.0, 86_500.0, vec![on("Minerva-A", "FE1")], 0.0)]);
        let v = validate(&sched, &s, &[]);
        assert_eq!(codes(&v), [ViolationCode::WindowMiss]);
        assert!(v[0].t <= s.sim.duration_s);
    }
}
