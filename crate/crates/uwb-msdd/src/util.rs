//! Small numeric helpers shared across modules.

/// Exact log-sum-exp of a slice, stable for widely spread log weights.
///
/// Returns negative infinity for an empty slice or all `-inf` entries.
pub fn log_sum_exp(vals: &[f64]) -> f64 {
    let max = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    let sum: f64 = vals.iter().map(|v| (v - max).exp()).sum();
    max + sum.ln()
}

/// In-place normalization of a log-weight vector so that log-sum-exp is 0.
pub fn normalize_log(vals: &mut [f64]) {
    let z = log_sum_exp(vals);
    if z.is_finite() {
        for v in vals.iter_mut() {
            *v -= z;
        }
    }
}

/// Trapezoid rule over uniformly spaced samples.
pub fn trapezoid(samples: &[f64], dt: f64) -> f64 {
    if samples.len() < 2 {
        return 0.0;
    }
    let interior: f64 = samples[1..samples.len() - 1].iter().sum();
    dt * (0.5 * (samples[0] + samples[samples.len() - 1]) + interior)
}

/// Trapezoid rule for the pointwise product of two equally long sample runs.
pub fn trapezoid_product(a: &[f64], b: &[f64], dt: f64) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let n = a.len();
    if n < 2 {
        return 0.0;
    }
    let mut sum = 0.5 * (a[0] * b[0] + a[n - 1] * b[n - 1]);
    for i in 1..n - 1 {
        sum += a[i] * b[i];
    }
    sum * dt
}

/// 95% confidence-interval half width for a binomial proportion
/// (normal approximation).
pub fn binomial_ci95_half_width(errors: u64, trials: u64) -> f64 {
    if trials == 0 {
        return f64::NAN;
    }
    let p = errors as f64 / trials as f64;
    1.96 * (p * (1.0 - p) / trials as f64).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_sum_exp_handles_spread_and_empty() {
        let v = [-1000.0, -1000.0];
        assert!((log_sum_exp(&v) - (-1000.0 + (2.0f64).ln())).abs() < 1e-12);
        assert_eq!(log_sum_exp(&[]), f64::NEG_INFINITY);
        assert_eq!(log_sum_exp(&[f64::NEG_INFINITY]), f64::NEG_INFINITY);
    }

    #[test]
    fn normalize_log_sums_to_one() {
        let mut v = [0.3, -2.0, 5.0];
        normalize_log(&mut v);
        let total: f64 = v.iter().map(|x| x.exp()).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn trapezoid_integrates_linear_function_exactly() {
        let dt = 0.25;
        let samples: Vec<f64> = (0..9).map(|i| 3.0 * (i as f64) * dt + 1.0).collect();
        // integral of 3t+1 over [0, 2] = 8
        assert!((trapezoid(&samples, dt) - 8.0).abs() < 1e-12);
    }
}
