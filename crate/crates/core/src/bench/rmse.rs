/// Error statistics over trials, with the RMSE in dB as
/// `10 log10 sqrt(mean squared error in deg^2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorStats {
    pub rmse_db: f64,
    pub mean_error_deg: f64,
    pub std_error_deg: f64,
    pub count: usize,
}

fn sorted(v: &[f64]) -> Vec<f64> {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    s
}

/// Signed per-source errors after sorting both the estimate and the truth.
pub fn matched_errors(estimate: &[f64], truth: &[f64]) -> Vec<f64> {
    sorted(estimate)
        .iter()
        .zip(sorted(truth))
        .map(|(e, t)| e - t)
        .collect()
}

/// RMSE in dB over all trials and sources; `-inf` when every estimate is exact.
pub fn rmse_db(estimates: &[Vec<f64>], truth: &[f64]) -> f64 {
    error_stats(estimates, truth).rmse_db
}

pub fn error_stats(estimates: &[Vec<f64>], truth: &[f64]) -> ErrorStats {
    let errs: Vec<f64> = estimates.iter().flat_map(|e| matched_errors(e, truth)).collect();
    let n = errs.len() as f64;
    if errs.is_empty() {
        return ErrorStats {
            rmse_db: f64::NAN,
            mean_error_deg: f64::NAN,
            std_error_deg: f64::NAN,
            count: 0,
        };
    }
    let mse = errs.iter().map(|e| e * e).sum::<f64>() / n;
    let mean = errs.iter().sum::<f64>() / n;
    let var = errs.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / n;
    ErrorStats {
        rmse_db: 10.0 * mse.sqrt().log10(),
        mean_error_deg: mean,
        std_error_deg: var.sqrt(),
        count: errs.len(),
    }
}

/// Same dB convention for a variance in deg^2 (e.g. a bound averaged over sources).
pub fn variance_db(mean_variance_deg2: f64) -> f64 {
    10.0 * mean_variance_deg2.sqrt().log10()
}
