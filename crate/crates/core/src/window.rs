//! Threshold-crossing search shared by pass prediction and link windows.

use alloc::vec::Vec;

/// Bisection stops once the bracket is this narrow.
pub(crate) const EDGE_TOLERANCE_S: f64 = 0.1;

/// Grid `t0, t0 + step, ...` strictly below `t1`, then `t1` itself.
pub(crate) fn grid(t0: f64, t1: f64, step: f64) -> Vec<f64> {
    let mut ts = Vec::new();
    if !(t1 >= t0) || !(step > 0.0) {
        return ts;
    }
    let mut k = 0u64;
    loop {
        let t = t0 + k as f64 * step;
        if t >= t1 {
            break;
        }
        ts.push(t);
        k += 1;
    }
    ts.push(t1);
    ts
}

/// Narrows a bracket between an `outside` and an `inside` time and returns
/// the inside end, so the returned time always satisfies `pred`.
pub(crate) fn refine_edge(pred: &impl Fn(f64) -> bool, mut outside: f64, mut inside: f64) -> f64 {
    while libm::fabs(inside - outside) > EDGE_TOLERANCE_S {
        let mid = 0.5 * (inside + outside);
        if pred(mid) {
            inside = mid;
        } else {
            outside = mid;
        }
    }
    inside
}

/// A maximal interval where `pred` holds, with the grid times inside it.
#[derive(Debug, Clone)]
pub(crate) struct Run {
    pub start: f64,
    pub end: f64,
    pub interior: Vec<f64>,
}

/// Maximal intervals of `[t0, t1]` where `pred` holds, located on a grid of
/// spacing `step` with edges refined by bisection. Runs narrower than the
/// refinement tolerance are dropped.
pub(crate) fn find_runs(t0: f64, t1: f64, step: f64, pred: impl Fn(f64) -> bool) -> Vec<Run> {
    let ts = grid(t0, t1, step);
    let flags: Vec<bool> = ts.iter().map(|&t| pred(t)).collect();
    let mut runs = Vec::new();
    let mut i = 0;
    while i < ts.len() {
        if !flags[i] {
            i += 1;
            continue;
        }
        let first = i;
        while i + 1 < ts.len() && flags[i + 1] {
            i += 1;
        }
        let last = i;
        let start = if first == 0 { ts[0] } else { refine_edge(&pred, ts[first - 1], ts[first]) };
        let end = if last + 1 == ts.len() { ts[last] } else { refine_edge(&pred, ts[last + 1], ts[last]) };
        if end > start {
            let interior = ts[first..=last].iter().copied().filter(|&t| t > start && t < end).collect();
            runs.push(Run { start, end, interior });
        }
        i += 1;
    }
    runs
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_includes_both_ends() {
        assert_eq!(grid(0.0, 25.0, 10.0), [0.0, 10.0, 20.0, 25.0]);
        assert_eq!(grid(0.0, 20.0, 10.0), [0.0, 10.0, 20.0]);
        assert_eq!(grid(5.0, 5.0, 10.0), [5.0]);
    }

    #[test]
    fn runs_are_refined_to_tolerance() {
        let runs = find_runs(0.0, 100.0, 10.0, |t| (33.3..=71.7).contains(&t));
        assert_eq!(runs.len(), 1);
        let r = &runs[0];
        assert!(r.start >= 33.3 && r.start - 33.3 <= EDGE_TOLERANCE_S);
        assert!(r.end <= 71.7 && 71.7 - r.end <= EDGE_TOLERANCE_S);
        assert_eq!(r.interior, [40.0, 50.0, 60.0, 70.0]);
    }

    #[test]
    fn runs_touching_the_horizon_are_not_refined() {
        let runs = find_runs(0.0, 50.0, 10.0, |t| !(12.0..=44.0).contains(&t));
        assert_eq!(runs.len(), 2);
        assert_eq!(runs[0].start, 0.0);
        assert_eq!(runs[1].end, 50.0);
    }
}
