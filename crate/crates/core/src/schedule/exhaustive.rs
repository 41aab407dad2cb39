use alloc::vec::Vec;
use core::fmt;

use super::{
    experiment_entry, placement_windows, request_order, resource_violations, window_violations, Schedule,
    ScheduleEntry,
};
use crate::orbit::PassWindow;
use crate::payload::flatsat_check;
use crate::scenario::{ExperimentSpec, Scenario};

pub const MAX_EXHAUSTIVE_REQUESTS: usize = 4;
/// Per request.
pub const MAX_EXHAUSTIVE_WINDOWS: usize = 3;
pub const MIN_EXHAUSTIVE_QUANTUM_S: f64 = 60.0;
/// Upper bound on the size of the raw search tree.
const MAX_TREE: f64 = 2e7;

#[derive(Debug, Clone, PartialEq)]
pub enum ExhaustiveError {
    InstanceTooLarge(&'static str),
    Infeasible,
}

impl fmt::Display for ExhaustiveError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExhaustiveError::InstanceTooLarge(why) => write!(f, "instance too large: {why}"),
            ExhaustiveError::Infeasible => f.write_str("infeasible: no request can be placed"),
        }
    }
}

impl core::error::Error for ExhaustiveError {}

/// Reference planner for small instances: tries every combination of
/// candidate starts and keeps a clean schedule with the most requests, then
/// the most total priority.
///
/// Candidate starts per request are a `quantum_s` grid from each window
/// start plus every chain of other request durations laid end to end from
/// any window start. The chains contain every start the greedy planner can
/// pick, so this search never places fewer requests than greedy.
pub fn plan_exhaustive(
    requests: &[ExperimentSpec],
    passes: &[PassWindow],
    s: &Scenario,
    quantum_s: f64,
) -> Result<Schedule, ExhaustiveError> {
    if requests.len() > MAX_EXHAUSTIVE_REQUESTS {
        return Err(ExhaustiveError::InstanceTooLarge("more than 4 requests"));
    }
    if !(quantum_s >= MIN_EXHAUSTIVE_QUANTUM_S) {
        return Err(ExhaustiveError::InstanceTooLarge("time quantum below 60 s"));
    }
    let mut ordered: Vec<&ExperimentSpec> = requests.iter().collect();
    ordered.sort_by(|a, b| request_order(a, b));

    let windows: Vec<_> = ordered
        .iter()
        .map(|exp| if flatsat_check(exp, s).is_ok() { placement_windows(exp, passes, s) } else { Vec::new() })
        .collect();
    if windows.iter().any(|w| w.len() > MAX_EXHAUSTIVE_WINDOWS) {
        return Err(ExhaustiveError::InstanceTooLarge("more than 3 windows for a request"));
    }
    let anchors: Vec<f64> = windows.iter().flatten().map(|w| w.start).collect();

    let mut options: Vec<Vec<ScheduleEntry>> = Vec::new();
    let mut tree = 1.0;
    for (i, exp) in ordered.iter().enumerate() {
        let others: Vec<f64> = ordered.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, e)| e.duration_s).collect();
        let mut starts: Vec<f64> = Vec::new();
        for w in &windows[i] {
            let mut t = w.start;
            let mut k = 0u32;
            while t + exp.duration_s <= w.end {
                starts.push(t);
                k += 1;
                t = w.start + f64::from(k) * quantum_s;
            }
        }
        for &a in &anchors {
            chains(a, &others, &mut starts);
        }
        starts.sort_by(f64::total_cmp);
        starts.dedup();

        let mut opts = Vec::new();
        for &t in &starts {
            for w in windows[i].iter().filter(|w| w.start <= t && t + exp.duration_s <= w.end) {
                let Some(e) = experiment_entry(exp, s, w, t) else { continue };
                let clean = window_violations(core::slice::from_ref(&e), s, passes).is_empty()
                    && resource_violations(core::slice::from_ref(&e), s).is_empty();
                if clean && !opts.contains(&e) {
                    opts.push(e);
                }
            }
        }
        tree *= (opts.len() + 1) as f64;
        if tree > MAX_TREE {
            return Err(ExhaustiveError::InstanceTooLarge("search tree too large"));
        }
        options.push(opts);
    }

    let priorities: Vec<i64> = ordered.iter().map(|e| i64::from(e.priority)).collect();
    let mut search = Search { options: &options, priorities: &priorities, s, best: Vec::new(), best_score: None };
    search.descend(0, &mut Vec::new(), 0);
    let best = search.best;
    if !requests.is_empty() && best.is_empty() {
        return Err(ExhaustiveError::Infeasible);
    }
    Ok(Schedule::new(best))
}

/// Every start reachable by laying an ordered subset of `durations` end to
/// end from `anchor`, summed in the same order a planner would.
fn chains(anchor: f64, durations: &[f64], out: &mut Vec<f64>) {
    out.push(anchor);
    for (i, &d) in durations.iter().enumerate() {
        let rest: Vec<f64> = durations.iter().enumerate().filter(|&(j, _)| j != i).map(|(_, &x)| x).collect();
        chains(anchor + d, &rest, out);
    }
}

struct Search<'a> {
    options: &'a [Vec<ScheduleEntry>],
    priorities: &'a [i64],
    s: &'a Scenario,
    best: Vec<ScheduleEntry>,
    best_score: Option<(usize, i64)>,
}

impl Search<'_> {
    fn done(&self) -> bool {
        // Placing everything also maximizes total priority.
        self.best_score.is_some_and(|(n, _)| n == self.options.len())
    }

    fn descend(&mut self, depth: usize, chosen: &mut Vec<ScheduleEntry>, priority: i64) {
        let score = (chosen.len(), priority);
        if self.best_score.is_none_or(|b| score > b) {
            self.best_score = Some(score);
            self.best = chosen.clone();
        }
        if depth == self.options.len() || self.done() {
            return;
        }
        let remaining = self.options.len() - depth;
        let upside: i64 = self.priorities[depth..].iter().filter(|&&p| p > 0).sum();
        if let Some(b) = self.best_score {
            if (chosen.len() + remaining, priority + upside) <= b {
                return;
            }
        }
        for e in &self.options[depth] {
            chosen.push(e.clone());
            if resource_violations(chosen, self.s).is_empty() {
                self.descend(depth + 1, chosen, priority + self.priorities[depth]);
            }
            chosen.pop();
            if self.done() {
                return;
            }
        }
        self.descend(depth + 1, chosen, priority);
    }
}
