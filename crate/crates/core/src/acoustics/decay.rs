//! Schroeder backward integration and reverberation-time estimation.

/// Backward-integrated energy decay in dB, normalized to 0 dB at tap 0.
pub fn schroeder_curve_db(taps: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    let mut tail: Vec<f64> = taps
        .iter()
        .rev()
        .map(|v| {
            acc += v * v;
            acc
        })
        .collect();
    tail.reverse();
    let total = tail.first().copied().unwrap_or(0.0);
    tail.iter()
        .map(|&e| {
            if total > 0.0 && e > 0.0 {
                10.0 * (e / total).log10()
            } else {
                f64::NEG_INFINITY
            }
        })
        .collect()
}

/// Reverberation time from a least-squares line through the decay between `upper_db` and
/// `lower_db` (e.g. -5 and -25 for T20), extrapolated to 60 dB.
pub fn estimate_rt60(taps: &[f64], sample_rate: u32, upper_db: f64, lower_db: f64) -> Option<f64> {
    let curve = schroeder_curve_db(taps);
    let pts: Vec<(f64, f64)> = curve
        .iter()
        .enumerate()
        .filter(|(_, &db)| db <= upper_db && db >= lower_db)
        .map(|(i, &db)| (i as f64 / sample_rate as f64, db))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (slope < 0.0).then(|| -60.0 / slope)
}
