use std::collections::BTreeSet;
use std::sync::OnceLock;

use proptest::prelude::*;
use starlab_core::orbit::PassWindow;
use starlab_core::payload::DataStore;
use starlab_core::scenario::ExperimentSpec;
use starlab_core::schedule::{
    plan_exhaustive, plan_greedy, validate, ExhaustiveError, Schedule, ViolationCode,
};
use starlab_core::sim::scenario_passes;
use starlab_core::{default_scenario, Scenario};

fn half_day() -> &'static (Scenario, Vec<PassWindow>) {
    static CELL: OnceLock<(Scenario, Vec<PassWindow>)> = OnceLock::new();
    CELL.get_or_init(|| {
        let mut s = default_scenario();
        s.sim.duration_s = 43_200.0;
        let passes = scenario_passes(&s);
        (s, passes)
    })
}

#[derive(Debug, Clone)]
struct Req {
    fes: Vec<usize>,
    optical: bool,
    contact: bool,
    pass: usize,
    duration: f64,
    extra: f64,
    rate: f64,
    earliest: f64,
    slack: f64,
    priority: i32,
}

fn req() -> impl Strategy<Value = Req> {
    (
        prop::collection::vec(0usize..4, 0..3),
        prop::bool::weighted(0.15),
        prop::bool::weighted(0.3),
        0usize..16,
        (1u32..20).prop_map(|k| f64::from(k) * 30.0),
        0.0..25.0f64,
        prop_oneof![Just(0.0), 1e3..2e6f64],
        0.0..40_000.0f64,
        0.0..3_000.0f64,
        0i32..5,
    )
        .prop_map(|(fes, optical, contact, pass, duration, extra, rate, earliest, slack, priority)| Req {
            fes,
            optical,
            contact,
            pass,
            duration,
            extra,
            rate,
            earliest,
            slack,
            priority,
        })
}

fn build(reqs: &[Req], passes: &[PassWindow], tight: bool) -> Vec<ExperimentSpec> {
    let fe_ids = ["FE1", "FE2", "FE3", "FE4"];
    reqs.iter()
        .enumerate()
        .map(|(i, r)| {
            let mut fes: Vec<_> = r.fes.iter().map(|&k| fe_ids[k].into()).collect();
            fes.dedup();
            let contact = r.contact && !passes.is_empty();
            let (earliest, latest) = if contact && tight {
                let p = &passes[r.pass % passes.len()];
                (p.t_start - 60.0, p.t_end + 60.0)
            } else if tight {
                (r.earliest, r.earliest + r.duration + r.slack.min(900.0))
            } else {
                (r.earliest, r.earliest + r.duration + r.slack)
            };
            ExperimentSpec {
                id: format!("r{i}"),
                priority: r.priority,
                frontends: fes,
                requires_optical: r.optical,
                needs_contact: contact,
                duration_s: r.duration,
                extra_power_w: r.extra,
                data_rate_bps: r.rate,
                earliest_start_s: earliest,
                latest_end_s: latest,
            }
        })
        .collect()
}

fn codes(s: &Schedule, sc: &Scenario, passes: &[PassWindow]) -> BTreeSet<ViolationCode> {
    validate(s, sc, passes).into_iter().map(|v| v.code).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn greedy_output_validates(reqs in prop::collection::vec(req(), 0..10)) {
        let (s, passes) = half_day();
        let exps = build(&reqs, passes, false);
        let plan = plan_greedy(&exps, passes, s);
        let v = validate(&plan.schedule, s, passes);
        prop_assert!(v.is_empty(), "{:?}", v);
        prop_assert_eq!(plan.placed() + plan.skipped.len(), exps.len());
        let again = plan_greedy(&exps, passes, s);
        prop_assert_eq!(again, plan);
    }

    #[test]
    fn exhaustive_dominates_greedy(reqs in prop::collection::vec(req(), 1..5)) {
        let (s, passes) = half_day();
        let exps = build(&reqs, passes, true);
        let greedy = plan_greedy(&exps, passes, s).placed();
        match plan_exhaustive(&exps, passes, s, 60.0) {
            Ok(best) => {
                prop_assert!(best.entries.len() >= greedy);
                let v = validate(&best, s, passes);
                prop_assert!(v.is_empty(), "{:?}", v);
            }
            Err(ExhaustiveError::Infeasible) => prop_assert_eq!(greedy, 0),
            Err(ExhaustiveError::InstanceTooLarge(why)) => prop_assert!(false, "{}", why),
        }
    }

    #[test]
    fn removing_an_entry_adds_no_resource_violation(reqs in prop::collection::vec(req(), 1..8), drop in any::<prop::sample::Index>()) {
        let (s, passes) = half_day();
        let exps = build(&reqs, passes, false);
        // Entries planned separately so they may collide with each other.
        let mut entries = Vec::new();
        for e in &exps {
            entries.extend(plan_greedy(std::slice::from_ref(e), &[], s).schedule.entries);
            entries.extend(plan_greedy(std::slice::from_ref(e), passes, s).schedule.entries);
        }
        prop_assume!(!entries.is_empty());
        let full = Schedule::new(entries.clone());
        entries.remove(drop.index(entries.len()));
        let fewer = Schedule::new(entries);
        let before = codes(&full, s, passes);
        let after = codes(&fewer, s, passes);
        for code in [ViolationCode::SlotConflict, ViolationCode::PeakSupply, ViolationCode::StorageOverflow] {
            prop_assert!(!after.contains(&code) || before.contains(&code), "{:?} appeared", code);
        }
    }

    #[test]
    fn store_walk_conserves_bits(cap in 0u64..10_000, ops in prop::collection::vec((any::<bool>(), 0u64..4_000), 0..80)) {
        let mut store = DataStore::new(cap);
        let (mut recorded, mut drained, mut dropped) = (0u64, 0u64, 0u64);
        for (i, (is_record, bits)) in ops.into_iter().enumerate() {
            if is_record {
                recorded += bits;
                dropped += store.record(&format!("src{}", i % 3), bits).map_or(0, |o| o.dropped_bits);
            } else {
                let before = store.used_bits();
                let got = store.drain(bits);
                prop_assert_eq!(got, bits.min(before));
                drained += got;
            }
            prop_assert!(store.used_bits() <= cap);
            prop_assert_eq!(store.chunks().map(|c| c.1).sum::<u64>(), store.used_bits());
            prop_assert_eq!(recorded, drained + dropped + store.used_bits());
        }
    }

    #[test]
    fn record_then_drain_is_identity(cap in 1u64..1_000_000, fill in 0u64..1_000_000) {
        let mut store = DataStore::new(cap);
        let bits = fill.min(cap);
        prop_assert!(store.record("a", bits).is_none());
        prop_assert_eq!(store.drain(bits), bits);
        prop_assert_eq!(store.used_bits(), 0);
    }
}

#[test]
fn drain_is_oldest_first() {
    let mut store = DataStore::new(100);
    store.record("a", 30);
    store.record("b", 30);
    store.record("a", 10);
    assert_eq!(store.drain(40), 40);
    let left: Vec<(&str, u64)> = store.chunks().collect();
    assert_eq!(left, [("b", 20), ("a", 10)]);
}
