//! Estimators for dependence and convergence conditions, with verdicts.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{ensure, Result};
use crate::models::MixingProfile;

mod conditions;
mod exin;
mod extremal;
mod gof;

pub use conditions::{
    empirical_truncated_moments, estimate_asneg, estimate_asneg2_curve, estimate_dprime, estimate_small_jump_sup,
    estimate_watson, exceedance_counts, maxima_cdf, pooled_length, MIN_EXCEEDANCES,
};
pub use exin::{exin_identity_check, ExinRow, ExinTable, MAX_EXIN_N};
pub use extremal::{blocks_extremal_index, tail_estimates, TailEstimates, MIN_BLOCK_EXCEEDANCES};
pub use gof::{
    gof_poisson, kounias_check, marginal_stable_test, KouniasCase, KouniasOutcome, MarginalTest, PoissonFit,
    SummandLaw, MARGINAL_TEST_CUT, MARGINAL_TEST_LEVEL, MIN_POISSON_COUNTS,
};

/// Multiples of the standard error used by [`judge`].
pub const CONSISTENT_SIGMAS: f64 = 3.0;
pub const VIOLATION_SIGMAS: f64 = 5.0;
/// A violation also needs `stderr < VIOLATION_PRECISION · |estimate|`.
pub const VIOLATION_PRECISION: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Consistent,
    Violated,
    Inconclusive,
}

/// What a condition predicts for the estimated quantity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Expectation {
    /// A limit value.
    Equals(f64),
    /// The quantity must vanish asymptotically; `baseline` is its exact
    /// finite-`n` value under independence.
    Vanishes { baseline: f64 },
    /// An upper bound.
    AtMost(f64),
}

impl Expectation {
    pub fn reference(&self) -> f64 {
        match *self {
            Expectation::Equals(r) => r,
            Expectation::Vanishes { baseline } => baseline,
            Expectation::AtMost(b) => b,
        }
    }
}

/// Deterministic verdict: consistent within `3·stderr` of the reference (or
/// below the bound), violated when the excess is beyond `5·stderr` and the
/// estimate is precise, inconclusive otherwise.
pub fn judge(estimate: f64, stderr: f64, expectation: Expectation) -> Verdict {
    let tolerance = CONSISTENT_SIGMAS * stderr;
    let (excess, consistent) = match expectation {
        Expectation::Equals(r) => {
            let d = (estimate - r).abs();
            (d, d <= tolerance)
        }
        Expectation::Vanishes { baseline } => {
            let d = estimate - baseline;
            (d, d.abs() <= tolerance)
        }
        Expectation::AtMost(bound) => {
            let d = estimate - bound;
            (d, d <= tolerance)
        }
    };
    if consistent {
        Verdict::Consistent
    } else if excess > VIOLATION_SIGMAS * stderr && stderr < VIOLATION_PRECISION * estimate.abs() {
        Verdict::Violated
    } else {
        Verdict::Inconclusive
    }
}

/// One estimated condition or limit at one parameter point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    pub condition: String,
    pub params: BTreeMap<String, f64>,
    pub estimate: f64,
    pub stderr: f64,
    pub reps: usize,
    pub reference: Option<f64>,
    pub verdict: Verdict,
    pub seed: u64,
}

impl DiagnosticsReport {
    pub fn new(
        condition: &str,
        params: &[(&str, f64)],
        (estimate, stderr): (f64, f64),
        reps: usize,
        expectation: Option<Expectation>,
        seed: u64,
    ) -> Self {
        let verdict = expectation.map_or(Verdict::Inconclusive, |e| judge(estimate, stderr, e));
        Self {
            condition: condition.to_string(),
            params: params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            estimate,
            stderr,
            reps,
            reference: expectation.map(|e| e.reference()),
            verdict,
            seed,
        }
    }

    /// Report for an estimator that saw no conditioning events.
    pub fn degenerate(condition: &str, params: &[(&str, f64)], reps: usize, reference: Option<f64>, seed: u64) -> Self {
        Self {
            condition: condition.to_string(),
            params: params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            estimate: 0.0,
            stderr: 0.0,
            reps,
            reference,
            verdict: Verdict::Inconclusive,
            seed,
        }
    }

    pub fn param(&self, name: &str) -> Option<f64> {
        self.params.get(name).copied()
    }
}

/// Block sizes `r_n` and separation `l_n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum BlockSchedule {
    /// `r_n = ⌊n^r⌋`, `l_n = ⌊n^l⌋`.
    PowerLaw {
        r: f64,
        l: f64,
    },
    Fixed {
        r: usize,
        l: usize,
    },
}

impl Default for BlockSchedule {
    fn default() -> Self {
        BlockSchedule::PowerLaw { r: 0.6, l: 0.3 }
    }
}

impl BlockSchedule {
    pub fn r_n(&self, n: usize) -> usize {
        match *self {
            BlockSchedule::PowerLaw { r, .. } => (((n as f64).powf(r) + 1e-9).floor() as usize).max(1),
            BlockSchedule::Fixed { r, .. } => r,
        }
    }

    pub fn l_n(&self, n: usize) -> usize {
        match *self {
            BlockSchedule::PowerLaw { l, .. } => (((n as f64).powf(l) + 1e-9).floor() as usize).max(1),
            BlockSchedule::Fixed { l, .. } => l,
        }
    }

    /// Checks along an increasing grid of `n` that `r_n/n`, `l_n/r_n` and
    /// `n φ₀(l_n)/r_n` are nonincreasing and end below their first values
    /// (or at zero).
    pub fn verify(&self, profile: &MixingProfile, grid: &[usize]) -> Result<()> {
        ensure(grid.len() >= 2, "grid", "needs at least two values of n")?;
        ensure(
            grid.windows(2).all(|w| w[0] < w[1]),
            "grid",
            "must be strictly increasing",
        )?;
        let ratios = |f: &dyn Fn(usize) -> f64| grid.iter().map(|&n| f(n)).collect::<Vec<f64>>();
        let checks = [
            ("r_n / n", ratios(&|n| self.r_n(n) as f64 / n as f64)),
            ("l_n / r_n", ratios(&|n| self.l_n(n) as f64 / self.r_n(n) as f64)),
            (
                "n phi0(l_n) / r_n",
                ratios(&|n| n as f64 * profile.phi0(self.l_n(n)) / self.r_n(n) as f64),
            ),
        ];
        for (name, values) in checks {
            let first = values[0];
            let last = *values.last().unwrap();
            ensure(
                values.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12)) && (last < first || last == 0.0),
                "schedule",
                format!("{name} does not decrease along the grid: {values:?}"),
            )?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdict_rules() {
        assert_eq!(judge(0.51, 0.01, Expectation::Equals(0.5)), Verdict::Consistent);
        assert_eq!(judge(0.8, 0.01, Expectation::Equals(0.5)), Verdict::Violated);
        assert_eq!(judge(0.8, 0.2, Expectation::Equals(0.0)), Verdict::Inconclusive);
        assert_eq!(
            judge(0.5, 0.02, Expectation::Vanishes { baseline: 0.01 }),
            Verdict::Violated
        );
        assert_eq!(
            judge(0.011, 0.002, Expectation::Vanishes { baseline: 0.01 }),
            Verdict::Consistent
        );
        assert_eq!(judge(0.1, 0.01, Expectation::AtMost(0.4)), Verdict::Consistent);
        assert_eq!(judge(0.9, 0.01, Expectation::AtMost(0.4)), Verdict::Violated);
    }

    #[test]
    fn report_json_shape() {
        let r = DiagnosticsReport::new(
            "maxima-limit",
            &[("n", 10.0)],
            (0.3, 0.01),
            5,
            Some(Expectation::Equals(0.3)),
            7,
        );
        let json = serde_json::to_string(&r).unwrap();
        assert_eq!(
            json,
            r#"{"condition":"maxima-limit","params":{"n":10.0},"estimate":0.3,"stderr":0.01,"reps":5,"reference":0.3,"verdict":"consistent","seed":7}"#
        );
    }

    #[test]
    fn default_schedule_fits_m_dependence() {
        let s = BlockSchedule::default();
        assert_eq!(s.r_n(100_000), 1000);
        assert_eq!(s.l_n(100_000), 31);
        let grid = [1_000, 10_000, 100_000, 1_000_000];
        s.verify(&MixingProfile::MDependent { m: 2 }, &grid).unwrap();
        s.verify(&MixingProfile::Iid, &grid).unwrap();
        let bad = BlockSchedule::Fixed { r: 10, l: 1 };
        assert!(bad.verify(&MixingProfile::MDependent { m: 2 }, &grid).is_err());
    }
}
