/// Deviations below this are treated as converged in monotonicity checks.
pub const CONVERGED_FLOOR: f64 = 1e-12;

/// Least-squares slope of `ln y` against `ln x` over the positive points.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > 0.0 && **y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some(sxy / sxx)
}

/// Each value at most `(1 + slack)` times its predecessor, or below `floor`.
pub fn monotone_decreasing(values: &[f64], slack: f64, floor: f64) -> bool {
    values
        .windows(2)
        .all(|w| w[1] <= floor || w[1] <= w[0] * (1.0 + slack))
}

/// Each value strictly below its predecessor, unless both are below `floor`.
pub fn strictly_decreasing(values: &[f64], floor: f64) -> bool {
    values
        .windows(2)
        .all(|w| w[1] < w[0] || (w[0] <= floor && w[1] <= floor))
}
