use serde::{Deserialize, Serialize};

use super::HarnessError;

/// Five-number summary plus mean and population standard deviation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoxStats {
    pub min: f64,
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
    pub max: f64,
    pub mean: f64,
    pub stddev: f64,
}

/// Box statistics over `rates`.
///
/// Quartiles take the sorted element at zero-based index `⌊p·n⌋` (clamped);
/// the median averages the middle pair for even counts.
pub fn aggregate(rates: &[f64]) -> Result<BoxStats, HarnessError> {
    if rates.is_empty() {
        return Err(HarnessError::EmptyInput);
    }
    let mut xs = rates.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    let rank = |p: f64| xs[((p * n as f64).floor() as usize).min(n - 1)];
    let median = if n % 2 == 1 {
        xs[n / 2]
    } else {
        (xs[n / 2 - 1] + xs[n / 2]) / 2.0
    };
    let mean = xs.iter().sum::<f64>() / n as f64;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n as f64;
    Ok(BoxStats {
        min: xs[0],
        q25: rank(0.25),
        median,
        q75: rank(0.75),
        max: xs[n - 1],
        mean,
        stddev: var.sqrt(),
    })
}
