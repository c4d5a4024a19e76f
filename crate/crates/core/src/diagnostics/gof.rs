//! Goodness-of-fit checks: Poisson counts, the stable marginal limit, and
//! the maximal inequality for partial sums.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Normal, Uniform};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};
use statrs::function::erf::erfc;

use super::Verdict;
use crate::error::{ensure, Error, Result};
use crate::models::{centering_cn, normalizer_bn, tail_constants, SequenceGenerator, SequenceModel};
use crate::path::partial_sum_path;
use crate::rng::{replicate, SeedStream};
use crate::stable::{simulate_levy_path, Compensation, LevySmallJumpPolicy};
use crate::stats::{ks_critical, ks_two_sample, proportion};

/// Fewest counts accepted by [`gof_poisson`].
pub const MIN_POISSON_COUNTS: usize = 500;
const MIN_EXPECTED_PER_BIN: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PoissonFit {
    /// Sample variance over sample mean.
    pub dispersion: f64,
    pub chi2: f64,
    pub df: usize,
    pub p_value: f64,
}

/// Dispersion index and χ² goodness of fit against Poisson(`mean`). Bins
/// are grown from zero until each expects at least five counts; the last
/// bin collects the upper tail.
pub fn gof_poisson(counts: &[u64], mean: f64) -> Result<PoissonFit> {
    if counts.len() < MIN_POISSON_COUNTS {
        return Err(Error::InsufficientData {
            needed: MIN_POISSON_COUNTS,
            available: counts.len(),
        });
    }
    ensure(mean > 0.0 && mean.is_finite(), "mean", "must be positive and finite")?;
    let total = counts.len() as f64;
    let sample_mean = counts.iter().sum::<u64>() as f64 / total;
    let var = counts.iter().map(|&c| (c as f64 - sample_mean).powi(2)).sum::<f64>() / (total - 1.0);
    let dispersion = if sample_mean > 0.0 { var / sample_mean } else { 0.0 };

    // bins[i] = (lowest count, expected); the upper edge is the next start.
    let mut bins: Vec<(u64, f64)> = Vec::new();
    let mut pmf = (-mean).exp();
    let mut covered = 0.0;
    let mut start = 0u64;
    let mut acc = 0.0;
    let mut k = 0u64;
    loop {
        acc += pmf * total;
        covered += pmf;
        k += 1;
        pmf *= mean / k as f64;
        if acc >= MIN_EXPECTED_PER_BIN {
            bins.push((start, acc));
            start = k;
            acc = 0.0;
            if (1.0 - covered) * total < MIN_EXPECTED_PER_BIN {
                break;
            }
        }
        if pmf == 0.0 && k as f64 > mean {
            break;
        }
    }
    let tail = (1.0 - covered).max(0.0) * total + acc;
    match bins.last_mut() {
        Some(last) if tail < MIN_EXPECTED_PER_BIN => last.1 += tail,
        _ => bins.push((start, tail)),
    }
    let mut observed = vec![0.0; bins.len()];
    for &c in counts {
        let i = bins.partition_point(|b| b.0 <= c) - 1;
        observed[i] += 1.0;
    }
    let chi2: f64 = observed.iter().zip(&bins).map(|(o, b)| (o - b.1).powi(2) / b.1).sum();
    let df = bins.len().saturating_sub(1);
    let p_value = if df == 0 {
        1.0
    } else {
        ChiSquared::new(df as f64).expect("positive df").sf(chi2)
    };
    Ok(PoissonFit {
        dispersion,
        chi2,
        df,
        p_value,
    })
}

/// Level of the two-sample KS test in [`marginal_stable_test`].
pub const MARGINAL_TEST_LEVEL: f64 = 0.001;
/// Truncation radius of the simulated Lévy process.
pub const MARGINAL_TEST_CUT: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MarginalTest {
    pub statistic: f64,
    pub critical: f64,
    pub verdict: Verdict,
}

/// Two-sample KS test between `reps` draws of `X_n(1)` and `reps` draws of
/// the limiting process at time one. For `d > 1` the first coordinate is
/// compared.
pub fn marginal_stable_test(model: &SequenceModel, n: usize, reps: usize, seed: u64) -> Result<MarginalTest> {
    ensure(n >= 1, "n", "must be at least 1")?;
    ensure(reps >= 2, "reps", "must be at least 2")?;
    let b = normalizer_bn(model, n)?.value;
    let c = centering_cn(model, n)?;
    let law = tail_constants(model)?.limit_law()?;
    let policy = LevySmallJumpPolicy::new(MARGINAL_TEST_CUT, Compensation::DriftCompensated, 1)?;
    let stream = SeedStream::new(seed);
    let d = model.dim();
    let sums: Vec<f64> = replicate(reps, stream.tagged("sequence"), |_, s| {
        let mut g = SequenceGenerator::new(model, s.seed())?;
        let mut z = vec![0.0; n * d];
        g.fill(&mut z);
        Ok(partial_sum_path(&z, b, &c, n, 1.0)?.value(1.0)[0])
    })
    .into_iter()
    .collect::<Result<_>>()?;
    let limit: Vec<f64> = replicate(reps, stream.tagged("limit"), |_, s| {
        Ok(simulate_levy_path(&law, 1.0, &policy, s.seed())?.value(1.0)[0])
    })
    .into_iter()
    .collect::<Result<_>>()?;
    let statistic = ks_two_sample(&sums, &limit);
    let critical = ks_critical(MARGINAL_TEST_LEVEL, reps, reps);
    Ok(MarginalTest {
        statistic,
        critical,
        verdict: if statistic <= critical {
            Verdict::Consistent
        } else {
            Verdict::Violated
        },
    })
}

/// Summand distributions with closed-form `E|ζ|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum SummandLaw {
    /// Signed Pareto with `P(|ζ| > x) = x^{-α}` for `x >= 1`, `α > 1`.
    Pareto {
        alpha: f64,
        p: f64,
    },
    Uniform {
        lo: f64,
        hi: f64,
    },
    Normal {
        mean: f64,
        sd: f64,
    },
}

impl SummandLaw {
    pub fn validate(&self) -> Result<()> {
        match *self {
            SummandLaw::Pareto { alpha, p } => {
                ensure(
                    alpha > 1.0 && alpha.is_finite(),
                    "alpha",
                    "needs a finite mean: alpha > 1",
                )?;
                ensure((0.0..=1.0).contains(&p), "p", "must lie in [0, 1]")
            }
            SummandLaw::Uniform { lo, hi } => ensure(lo < hi, "hi", "must exceed lo"),
            SummandLaw::Normal { sd, .. } => ensure(sd > 0.0, "sd", "must be positive"),
        }
    }

    pub fn mean_abs(&self) -> f64 {
        match *self {
            SummandLaw::Pareto { alpha, .. } => alpha / (alpha - 1.0),
            SummandLaw::Uniform { lo, hi } => {
                if lo >= 0.0 {
                    (lo + hi) / 2.0
                } else if hi <= 0.0 {
                    -(lo + hi) / 2.0
                } else {
                    (lo * lo + hi * hi) / (2.0 * (hi - lo))
                }
            }
            SummandLaw::Normal { mean, sd } => {
                let z = mean / sd;
                // E|X| = σ √(2/π) e^{-z²/2} + μ (1 - 2Φ(-z))
                sd * (2.0 / PI).sqrt() * (-z * z / 2.0).exp() + mean * (1.0 - erfc(z / 2f64.sqrt()))
            }
        }
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        match *self {
            SummandLaw::Pareto { alpha, p } => {
                let u: f64 = rng.random();
                let r = (1.0 - u).powf(-1.0 / alpha);
                if rng.random::<f64>() < p {
                    r
                } else {
                    -r
                }
            }
            SummandLaw::Uniform { lo, hi } => Uniform::new(lo, hi).expect("validated").sample(rng),
            SummandLaw::Normal { mean, sd } => Normal::new(mean, sd).expect("validated").sample(rng),
        }
    }
}

/// `k` iid summands from `law` and a barrier `δ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KouniasCase {
    pub law: SummandLaw,
    pub k: usize,
    pub delta: f64,
}

impl KouniasCase {
    /// `δ^{-1} Σ E|ζ_i|`.
    pub fn bound(&self) -> f64 {
        self.k as f64 * self.law.mean_abs() / self.delta
    }

    /// `count` cases with summand law, `k ∈ 1..=10` and `δ ∈ [0.5, 20]`
    /// drawn from `seed`.
    pub fn random_suite(count: usize, seed: u64) -> Vec<KouniasCase> {
        let mut rng = SeedStream::new(seed).rng();
        (0..count)
            .map(|_| {
                let law = match rng.random_range(0..3) {
                    0 => SummandLaw::Pareto {
                        alpha: rng.random_range(1.2..2.0),
                        p: rng.random(),
                    },
                    1 => {
                        let lo = rng.random_range(-2.0..1.0);
                        SummandLaw::Uniform {
                            lo,
                            hi: lo + rng.random_range(0.1..3.0),
                        }
                    }
                    _ => SummandLaw::Normal {
                        mean: rng.random_range(-1.0..1.0),
                        sd: rng.random_range(0.1..2.0),
                    },
                };
                KouniasCase {
                    law,
                    k: rng.random_range(1..=10),
                    delta: 0.5 * 40f64.powf(rng.random::<f64>()),
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KouniasOutcome {
    pub case: KouniasCase,
    pub estimate: f64,
    pub stderr: f64,
    pub bound: f64,
    pub violated: bool,
}

/// Monte Carlo `P(max_{j<=k} |ζ_1 + … + ζ_j| >= δ)` per case against the
/// bound `δ^{-1} Σ E|ζ_i|`; a violation is an excess beyond three
/// standard errors.
pub fn kounias_check(cases: &[KouniasCase], reps: usize, seed: u64) -> Result<Vec<KouniasOutcome>> {
    ensure(reps >= 2, "reps", "must be at least 2")?;
    for c in cases {
        c.law.validate()?;
        ensure(c.k >= 1, "k", "must be at least 1")?;
        ensure(c.delta > 0.0, "delta", "must be positive")?;
    }
    let stream = SeedStream::new(seed);
    Ok(cases
        .iter()
        .enumerate()
        .map(|(i, case)| {
            let mut rng = stream.child(i as u64).rng();
            let hits = (0..reps)
                .filter(|_| {
                    let mut s = 0.0;
                    (0..case.k).any(|_| {
                        s += case.law.sample(&mut rng);
                        s.abs() >= case.delta
                    })
                })
                .count();
            let (estimate, stderr) = proportion(hits, reps);
            let bound = case.bound();
            KouniasOutcome {
                case: *case,
                estimate,
                stderr,
                bound,
                violated: estimate - bound > super::CONSISTENT_SIGMAS * stderr,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_counts_rejected() {
        let fit = gof_poisson(&[1; 1000], 1.0).unwrap();
        assert_eq!(fit.dispersion, 0.0);
        assert!(fit.p_value < 1e-10);
    }

    #[test]
    fn too_few_counts() {
        assert!(gof_poisson(&[1; 499], 1.0).is_err());
    }

    #[test]
    fn bins_cover_all_counts() {
        let mut counts = vec![0u64; 600];
        counts[0] = 40;
        let fit = gof_poisson(&counts, 1.0).unwrap();
        assert!(fit.df >= 1);
        assert!(fit.chi2.is_finite());
    }

    #[test]
    fn mean_abs_closed_forms() {
        let n = SummandLaw::Normal { mean: 0.0, sd: 1.0 };
        assert!((n.mean_abs() - (2.0 / PI).sqrt()).abs() < 1e-14);
        let big = SummandLaw::Normal { mean: 10.0, sd: 1.0 };
        assert!((big.mean_abs() - 10.0).abs() < 1e-12);
        let u = SummandLaw::Uniform { lo: -1.0, hi: 3.0 };
        assert!((u.mean_abs() - 10.0 / 8.0).abs() < 1e-15);
        assert_eq!(SummandLaw::Pareto { alpha: 1.5, p: 0.5 }.mean_abs(), 3.0);
    }

    #[test]
    fn mean_abs_matches_simulation() {
        let mut rng = SeedStream::new(4).rng();
        for law in [
            SummandLaw::Normal { mean: 0.7, sd: 1.3 },
            SummandLaw::Uniform { lo: -0.5, hi: 2.0 },
        ] {
            let m: f64 = (0..200_000).map(|_| law.sample(&mut rng).abs()).sum::<f64>() / 200_000.0;
            assert!((m - law.mean_abs()).abs() < 0.01, "{law:?}: {m}");
        }
    }

    #[test]
    fn single_summand_is_markov() {
        let case = KouniasCase {
            law: SummandLaw::Uniform { lo: 0.0, hi: 2.0 },
            k: 1,
            delta: 1.5,
        };
        let out = kounias_check(&[case], 20_000, 9).unwrap();
        assert!((out[0].estimate - 0.25).abs() < 0.02);
        assert!(!out[0].violated);
    }
}
