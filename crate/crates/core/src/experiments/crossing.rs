use crate::dynamics::FidelityTrace;

/// Differences smaller than this are treated as ties.
pub const TIE_TOLERANCE: f64 = 1e-4;

/// First time in `[start, end]` at which `a - b` changes sign, ignoring nodes
/// where `|a - b| < TIE_TOLERANCE`. The crossing is refined by linear
/// interpolation between the bracketing nodes.
pub fn detect_crossing(a: &FidelityTrace<f64>, b: &FidelityTrace<f64>, window: (f64, f64)) -> Option<f64> {
    assert_eq!(a.values.len(), b.values.len(), "traces must share a grid");
    let grid = a.grid;
    let diff = |n: usize| a.values[n] - b.values[n];
    let mut last: Option<(usize, bool)> = None;
    for n in 0..grid.len() {
        let t = grid.time(n);
        if t < window.0 {
            continue;
        }
        if t > window.1 {
            break;
        }
        let d = diff(n);
        if d.abs() < TIE_TOLERANCE {
            continue;
        }
        let positive = d > 0.0;
        match last {
            Some((m, sign)) if sign != positive => return Some(refine(&diff, grid.step, m, n)),
            _ => last = Some((n, positive)),
        }
    }
    None
}

/// Zero of the piecewise-linear interpolant of `diff` between nodes `from`
/// and `to`, which carry opposite signs.
fn refine(diff: &impl Fn(usize) -> f64, step: f64, from: usize, to: usize) -> f64 {
    let start = diff(from) > 0.0;
    for k in from..to {
        let (d0, d1) = (diff(k), diff(k + 1));
        if d1 == 0.0 {
            return (k + 1) as f64 * step;
        }
        if (d1 > 0.0) != start {
            return (k as f64 + d0 / (d0 - d1)) * step;
        }
    }
    to as f64 * step
}
