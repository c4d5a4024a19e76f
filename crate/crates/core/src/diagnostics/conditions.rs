//! Pooled Monte Carlo estimators of the local dependence, small-jump and
//! maxima conditions.
//!
//! Conditional probabilities given `|Z_1| > ε b_n` condition on events of
//! probability about `1/n`. By stationarity every exceedance of a long path
//! is an equally valid conditioning event, so each replication simulates one
//! path holding about [`MIN_EXCEEDANCES`] exceedances and the estimate is a
//! ratio of sums over replications.

use rayon::prelude::*;

use super::{DiagnosticsReport, Expectation};
use crate::error::{ensure, Result};
use crate::models::{exceedance_probability, normalizer_bn, truncated_mean, SequenceGenerator, SequenceModel};
use crate::rng::{replicate, SeedStream};
use crate::stable::karamata_truncated_moment_limit;
use crate::stats::{mean_stderr, norm, proportion, ratio_of_sums};

use super::BlockSchedule;

/// Expected exceedances per pooled path.
pub const MIN_EXCEEDANCES: f64 = 20.0;
const MAX_POOLED_LENGTH: usize = 50_000_000;
const CHUNK: usize = 1 << 14;

/// Length of the pooled path: at least `n`, long enough for
/// [`MIN_EXCEEDANCES`] exceedances of `ε b_n`, plus the look-ahead window.
pub fn pooled_length(alpha: f64, n: usize, epsilon: f64, window: usize) -> usize {
    let wanted = (MIN_EXCEEDANCES * n as f64 * epsilon.powf(alpha)).ceil();
    let base = if wanted.is_finite() {
        (wanted as usize).max(n)
    } else {
        MAX_POOLED_LENGTH
    };
    base.min(MAX_POOLED_LENGTH) + window
}

/// Streams `len` observations through `f(offset, chunk)`; stops early when
/// `f` returns false.
fn stream<F>(model: &SequenceModel, len: usize, seed: u64, mut f: F) -> Result<()>
where
    F: FnMut(usize, &[f64]) -> bool,
{
    let mut g = SequenceGenerator::new(model, seed)?;
    let d = g.dim();
    let mut buf = vec![0.0; CHUNK * d];
    let mut offset = 0;
    while offset < len {
        let rows = CHUNK.min(len - offset);
        g.fill(&mut buf[..rows * d]);
        if !f(offset, &buf[..rows * d]) {
            break;
        }
        offset += rows;
    }
    Ok(())
}

/// 0-based indices `j < len` with `|Z_{j+1}| > threshold`.
fn exceedances(model: &SequenceModel, len: usize, threshold: f64, seed: u64) -> Result<Vec<usize>> {
    let d = model.dim();
    let mut out = Vec::new();
    stream(model, len, seed, |offset, chunk| {
        for (i, row) in chunk.chunks_exact(d).enumerate() {
            if norm(row) > threshold {
                out.push(offset + i);
            }
        }
        true
    })?;
    Ok(out)
}

fn validate_common(n: usize, epsilon: f64, reps: usize) -> Result<()> {
    ensure(n >= 1, "n", "must be at least 1")?;
    ensure(
        epsilon > 0.0 && epsilon.is_finite(),
        "epsilon",
        "must be positive and finite",
    )?;
    ensure(reps >= 1, "reps", "must be at least 1")
}

/// Pooled `(hits, conditioning events)` per replication, where an event is
/// an exceedance at `e <= len - 1 - window` and a hit additionally has
/// another exceedance within the following `window` indices.
fn windowed_counts(
    model: &SequenceModel,
    n: usize,
    epsilon: f64,
    windows: &[usize],
    reps: usize,
    seed: u64,
) -> Result<Vec<(f64, Vec<f64>)>> {
    let b = normalizer_bn(model, n)?.value;
    let threshold = epsilon * b;
    let w_max = windows.iter().copied().max().unwrap_or(0);
    let len = pooled_length(model.alpha(), n, epsilon, w_max);
    replicate(reps, SeedStream::new(seed), |_, s| {
        let idx = exceedances(model, len, threshold, s.seed())?;
        let mut den = 0.0;
        let mut hits = vec![0.0; windows.len()];
        for (k, &e) in idx.iter().enumerate() {
            if e + w_max >= len {
                break;
            }
            den += 1.0;
            if let Some(&next) = idx.get(k + 1) {
                let gap = next - e;
                for (h, &w) in hits.iter_mut().zip(windows) {
                    if gap <= w {
                        *h += 1.0;
                    }
                }
            }
        }
        Ok((den, hits))
    })
    .into_iter()
    .collect()
}

/// `P(max_{2<=j<=r_n} |Z_j| > ε b_n | |Z_1| > ε b_n)`, which must vanish
/// under local dependence. The reference is its exact value for an
/// independent sequence with the same marginal, `1 - (1 - P)^{r_n - 1}`.
pub fn estimate_asneg(
    model: &SequenceModel,
    n: usize,
    epsilon: f64,
    schedule: &BlockSchedule,
    reps: usize,
    seed: u64,
) -> Result<DiagnosticsReport> {
    validate_common(n, epsilon, reps)?;
    let r = schedule.r_n(n);
    let window = r - 1;
    let counts = windowed_counts(model, n, epsilon, &[window], reps, seed)?;
    let pairs: Vec<(f64, f64)> = counts.iter().map(|(d, h)| (h[0], *d)).collect();
    let b = normalizer_bn(model, n)?.value;
    let p = exceedance_probability(model, epsilon * b)?;
    let baseline = 1.0 - (1.0 - p).powi(window as i32);
    let params = [("n", n as f64), ("epsilon", epsilon), ("r_n", r as f64)];
    Ok(match ratio_of_sums(&pairs) {
        Some(est) => DiagnosticsReport::new(
            "anticlustering",
            &params,
            est,
            reps,
            Some(Expectation::Vanishes { baseline }),
            seed,
        ),
        None => DiagnosticsReport::degenerate("anticlustering", &params, reps, Some(baseline), seed),
    })
}

/// `P(max_{2<=j<=nt} |Z_j| > ε b_n | |Z_1| > ε b_n)` over a `t` grid with the
/// Poisson limit `1 - exp(-t ε^{-α})` as reference. All grid points share
/// the conditioning events, so the curve is nondecreasing in `t`.
pub fn estimate_asneg2_curve(
    model: &SequenceModel,
    n: usize,
    t_grid: &[f64],
    epsilon: f64,
    reps: usize,
    seed: u64,
) -> Result<Vec<DiagnosticsReport>> {
    validate_common(n, epsilon, reps)?;
    ensure(
        t_grid.iter().all(|&t| t > 0.0 && t.is_finite()),
        "t",
        "grid values must be positive",
    )?;
    let windows: Vec<usize> = t_grid
        .iter()
        .map(|&t| ((n as f64 * t).floor() as usize).saturating_sub(1))
        .collect();
    let counts = windowed_counts(model, n, epsilon, &windows, reps, seed)?;
    let alpha = model.alpha();
    Ok(t_grid
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let pairs: Vec<(f64, f64)> = counts.iter().map(|(d, h)| (h[i], *d)).collect();
            let reference = 1.0 - (-t * epsilon.powf(-alpha)).exp();
            let params = [("n", n as f64), ("epsilon", epsilon), ("t", t)];
            match ratio_of_sums(&pairs) {
                Some(est) => DiagnosticsReport::new(
                    "conditional-exceedance",
                    &params,
                    est,
                    reps,
                    Some(Expectation::Equals(reference)),
                    seed,
                ),
                None => DiagnosticsReport::degenerate("conditional-exceedance", &params, reps, Some(reference), seed),
            }
        })
        .collect())
}

/// `n Σ_{j=2}^{⌊n/k⌋} P(|Z_j| > ε b_n, |Z_1| > ε b_n)`, from joint exceedance
/// frequencies pooled over a long path. The reference is the independence
/// value `n (⌊n/k⌋ - 1) P²`.
pub fn estimate_dprime(
    model: &SequenceModel,
    n: usize,
    k: usize,
    epsilon: f64,
    reps: usize,
    seed: u64,
) -> Result<DiagnosticsReport> {
    validate_common(n, epsilon, reps)?;
    ensure(k >= 2, "k", format!("must be at least 2, got {k}"))?;
    let lags = (n / k).saturating_sub(1);
    let b = normalizer_bn(model, n)?.value;
    let threshold = epsilon * b;
    let len = pooled_length(model.alpha(), n, epsilon, lags);
    let values: Vec<f64> = replicate(reps, SeedStream::new(seed), |_, s| {
        let idx = exceedances(model, len, threshold, s.seed())?;
        let origins = len - lags;
        let mut pairs = 0usize;
        for (a, &e) in idx.iter().enumerate() {
            if e >= origins {
                break;
            }
            pairs += idx[a + 1..].iter().take_while(|&&f| f - e <= lags).count();
        }
        Ok(n as f64 * pairs as f64 / origins as f64)
    })
    .into_iter()
    .collect::<Result<_>>()?;
    let p = exceedance_probability(model, threshold)?;
    let baseline = n as f64 * lags as f64 * p * p;
    let params = [("n", n as f64), ("k", k as f64), ("epsilon", epsilon)];
    Ok(DiagnosticsReport::new(
        "d-prime",
        &params,
        mean_stderr(&values),
        reps,
        Some(Expectation::Vanishes { baseline }),
        seed,
    ))
}

/// `P(|Z_j| > ε b_n | |Z_1| > ε b_n)`, pooled at lag `j - 1`. The reference
/// is the independence value `P(|Z_1| > ε b_n)`.
pub fn estimate_watson(
    model: &SequenceModel,
    n: usize,
    j: usize,
    epsilon: f64,
    reps: usize,
    seed: u64,
) -> Result<DiagnosticsReport> {
    validate_common(n, epsilon, reps)?;
    ensure(j >= 2, "j", format!("must be at least 2, got {j}"))?;
    let lag = j - 1;
    let b = normalizer_bn(model, n)?.value;
    let threshold = epsilon * b;
    let len = pooled_length(model.alpha(), n, epsilon, lag);
    let pairs: Vec<(f64, f64)> = replicate(reps, SeedStream::new(seed), |_, s| {
        let idx = exceedances(model, len, threshold, s.seed())?;
        let mut den = 0.0;
        let mut num = 0.0;
        for &e in &idx {
            if e + lag >= len {
                break;
            }
            den += 1.0;
            if idx.binary_search(&(e + lag)).is_ok() {
                num += 1.0;
            }
        }
        Ok((num, den))
    })
    .into_iter()
    .collect::<Result<_>>()?;
    let baseline = exceedance_probability(model, threshold)?;
    let params = [("n", n as f64), ("j", j as f64), ("epsilon", epsilon)];
    Ok(match ratio_of_sums(&pairs) {
        Some(est) => DiagnosticsReport::new(
            "watson",
            &params,
            est,
            reps,
            Some(Expectation::Vanishes { baseline }),
            seed,
        ),
        None => DiagnosticsReport::degenerate("watson", &params, reps, Some(baseline), seed),
    })
}

/// Frequency of
/// `max_{k<=n} |Σ_{j<=k} (Z_j I(|Z_j| <= ε b_n) - E Z_1 I(|Z_1| <= ε b_n))| >= δ b_n`.
///
/// For `α < 1` the reference is the maximal-inequality bound
/// `(2/δ) · α/(1-α) · ε^{1-α}`; otherwise no reference is attached.
/// Calls sharing a seed reuse the same paths, so estimates over an `ε` grid
/// use common random numbers.
pub fn estimate_small_jump_sup(
    model: &SequenceModel,
    n: usize,
    epsilon: f64,
    delta: f64,
    reps: usize,
    seed: u64,
) -> Result<DiagnosticsReport> {
    validate_common(n, epsilon, reps)?;
    ensure(delta > 0.0, "delta", "must be positive")?;
    let b = normalizer_bn(model, n)?.value;
    let level = epsilon * b;
    let centre = truncated_mean(model, level)?;
    let barrier = delta * b;
    let d = model.dim();
    let hits: Vec<bool> = replicate(reps, SeedStream::new(seed), |_, s| {
        let mut sum = vec![0.0; d];
        let mut hit = false;
        stream(model, n, s.seed(), |_, chunk| {
            for row in chunk.chunks_exact(d) {
                let keep = norm(row) <= level;
                for k in 0..d {
                    sum[k] += if keep { row[k] } else { 0.0 } - centre[k];
                }
                if norm(&sum) >= barrier {
                    hit = true;
                    return false;
                }
            }
            true
        })?;
        Ok(hit)
    })
    .into_iter()
    .collect::<Result<_>>()?;
    let count = hits.iter().filter(|&&h| h).count();
    let alpha = model.alpha();
    let expectation = if alpha < 1.0 {
        Some(Expectation::AtMost(
            2.0 / delta * karamata_truncated_moment_limit(alpha, 1, epsilon)?,
        ))
    } else {
        None
    };
    let params = [("n", n as f64), ("epsilon", epsilon), ("delta", delta)];
    Ok(DiagnosticsReport::new(
        "small-jump",
        &params,
        proportion(count, reps),
        reps,
        expectation,
        seed,
    ))
}

/// `P(max_{1<=j<=nt} |Z_j| <= ε b_n)` against the Poisson limit
/// `exp(-t ε^{-α})`. Paths are generated prefix-consistently, so under a
/// common seed the estimate is pathwise nonincreasing in `t` and
/// nondecreasing in `ε`.
pub fn maxima_cdf(
    model: &SequenceModel,
    n: usize,
    t: f64,
    epsilon: f64,
    reps: usize,
    seed: u64,
) -> Result<DiagnosticsReport> {
    validate_common(n, epsilon, reps)?;
    ensure(t >= 0.0 && t.is_finite(), "t", "must be nonnegative and finite")?;
    let b = normalizer_bn(model, n)?.value;
    let threshold = epsilon * b;
    let len = (n as f64 * t).floor() as usize;
    let d = model.dim();
    let below: Vec<bool> = replicate(reps, SeedStream::new(seed), |_, s| {
        let mut ok = true;
        if len > 0 {
            stream(model, len, s.seed(), |_, chunk| {
                ok = chunk.chunks_exact(d).all(|row| norm(row) <= threshold);
                ok
            })?;
        }
        Ok(ok)
    })
    .into_iter()
    .collect::<Result<_>>()?;
    let count = below.iter().filter(|&&v| v).count();
    let reference = (-t * epsilon.powf(-model.alpha())).exp();
    let params = [("n", n as f64), ("t", t), ("epsilon", epsilon)];
    Ok(DiagnosticsReport::new(
        "maxima-limit",
        &params,
        proportion(count, reps),
        reps,
        Some(Expectation::Equals(reference)),
        seed,
    ))
}

/// Counts `N_n((0, 1] × {|x| > ε})` of rescaled exceedances
/// `#{j <= n: |Z_j| > ε b_n}`, one per replication.
pub fn exceedance_counts(model: &SequenceModel, n: usize, epsilon: f64, reps: usize, seed: u64) -> Result<Vec<u64>> {
    validate_common(n, epsilon, reps)?;
    let threshold = epsilon * normalizer_bn(model, n)?.value;
    replicate(reps, SeedStream::new(seed), |_, s| {
        Ok(exceedances(model, n, threshold, s.seed())?.len() as u64)
    })
    .into_iter()
    .collect()
}

const MOMENT_CHUNK: usize = 1 << 20;

/// Monte Carlo `n b_n^{-order} E(|Z_1|^order I(|Z_1| <= ε b_n))` for each
/// `ε`, with standard errors, from `samples` draws of the marginal.
pub fn empirical_truncated_moments(
    model: &SequenceModel,
    n: usize,
    order: u32,
    epsilons: &[f64],
    samples: usize,
    seed: u64,
) -> Result<Vec<(f64, f64)>> {
    ensure(order == 1 || order == 2, "order", "must be 1 or 2")?;
    ensure(samples >= 2, "samples", "must be at least 2")?;
    ensure(
        epsilons.iter().all(|&e| e > 0.0),
        "epsilon",
        "grid values must be positive",
    )?;
    let b = normalizer_bn(model, n)?.value;
    let levels: Vec<f64> = epsilons.iter().map(|e| e * b).collect();
    let chunks = samples.div_ceil(MOMENT_CHUNK);
    let stream_seed = SeedStream::new(seed);
    let d = model.dim();
    let partial: Vec<Vec<(f64, f64)>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let rows = MOMENT_CHUNK.min(samples - c * MOMENT_CHUNK);
            let mut g = SequenceGenerator::new(model, stream_seed.child(c as u64).seed())?;
            let mut buf = vec![0.0; rows * d];
            g.fill(&mut buf);
            let mut acc = vec![(0.0, 0.0); levels.len()];
            for row in buf.chunks_exact(d) {
                let r = norm(row);
                let v = if order == 1 { r } else { r * r };
                for (a, &level) in acc.iter_mut().zip(&levels) {
                    if r <= level {
                        a.0 += v;
                        a.1 += v * v;
                    }
                }
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    let scale = n as f64 / b.powi(order as i32);
    let total = samples as f64;
    Ok((0..levels.len())
        .map(|i| {
            let (s1, s2) = partial
                .iter()
                .fold((0.0, 0.0), |acc, p| (acc.0 + p[i].0, acc.1 + p[i].1));
            let mean = s1 / total;
            let var = (s2 / total - mean * mean).max(0.0) * total / (total - 1.0);
            (scale * mean, scale * (var / total).sqrt())
        })
        .collect())
}
