//! Check that no-change stopping times, scaled by `C`, are approximately
//! geometric: `P(T/C ≥ k) ≈ e^{−k}`.

/// `C = e^h / (R² · s · D)` for a detector pooling `scope_size` sensors.
pub fn geometric_scale(h: f64, r: f64, kl: f64, scope_size: usize) -> f64 {
    h.exp() / (r * r * scope_size as f64 * kl)
}

/// `sup_{k ≥ 1} |P̂(T/C ≥ k) − e^{−k}|` over the empirical distribution of
/// `stop_times`. Returns NaN for an empty sample.
pub fn geometric_approximation_check(stop_times: &[f64], scale: f64) -> f64 {
    if stop_times.is_empty() {
        return f64::NAN;
    }
    let mut scaled: Vec<f64> = stop_times.iter().map(|t| t / scale).collect();
    scaled.sort_by(f64::total_cmp);
    let n = scaled.len() as f64;
    let max = scaled[scaled.len() - 1];
    let mut sup = 0.0f64;
    let mut k = 1u64;
    loop {
        let kf = k as f64;
        let at_least = scaled.len() - scaled.partition_point(|&x| x < kf);
        sup = sup.max((at_least as f64 / n - (-kf).exp()).abs());
        // Past the sample maximum the gap is e^{−k}, which only shrinks.
        if kf > max {
            break;
        }
        k += 1;
    }
    sup
}
