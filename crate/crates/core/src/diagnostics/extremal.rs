//! Extremal index and tail parameter estimators from a sample.

use serde::Serialize;

use crate::error::{ensure, Error, Result};
use crate::stats::ratio_of_sums;

/// Fewest exceedances accepted by [`blocks_extremal_index`].
pub const MIN_BLOCK_EXCEEDANCES: usize = 50;

/// Blocks estimator `θ̂ = #(blocks with an exceedance) / #exceedances` over
/// the complete blocks of length `block`, clipped to at most 1, with a
/// delta-method standard error treating blocks as independent.
pub fn blocks_extremal_index(samples: &[f64], threshold: f64, block: usize) -> Result<(f64, f64)> {
    ensure(block >= 1, "block", "must be at least 1")?;
    ensure(threshold.is_finite(), "threshold", "must be finite")?;
    let pairs: Vec<(f64, f64)> = samples
        .chunks_exact(block)
        .map(|b| {
            let count = b.iter().filter(|&&x| x > threshold).count();
            (f64::from(u8::from(count > 0)), count as f64)
        })
        .collect();
    let total = pairs.iter().map(|p| p.1).sum::<f64>() as usize;
    if total == 0 {
        return Err(Error::NoExceedances { threshold });
    }
    if total < MIN_BLOCK_EXCEEDANCES {
        return Err(Error::InsufficientData {
            needed: MIN_BLOCK_EXCEEDANCES,
            available: total,
        });
    }
    let (theta, se) = ratio_of_sums(&pairs).expect("positive exceedance count");
    Ok((theta.min(1.0), se))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailEstimates {
    /// Hill estimate of the tail index.
    pub alpha: f64,
    /// Fraction of positive signs among the `k` largest `|x|`.
    pub p: f64,
    pub q: f64,
}

/// Hill estimator on `|x|` from the `k` largest order statistics, plus the
/// sign balance among them.
pub fn tail_estimates(samples: &[f64], k: usize) -> Result<TailEstimates> {
    ensure(
        k >= 1 && 2 * k < samples.len(),
        "k",
        format!("must satisfy 1 <= k < len/2, got k = {k} for {} samples", samples.len()),
    )?;
    let mut sorted: Vec<f64> = samples.to_vec();
    sorted.sort_by(|a, b| b.abs().total_cmp(&a.abs()));
    let floor = sorted[k].abs();
    ensure(floor > 0.0, "samples", "order statistic k+1 is zero")?;
    let top = &sorted[..k];
    let mean_log = top.iter().map(|x| (x.abs() / floor).ln()).sum::<f64>() / k as f64;
    let positive = top.iter().filter(|&&x| x > 0.0).count() as f64 / k as f64;
    Ok(TailEstimates {
        alpha: 1.0 / mean_log,
        p: positive,
        q: 1.0 - positive,
    })
}
