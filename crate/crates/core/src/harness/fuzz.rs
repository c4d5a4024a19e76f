//! Randomized property checks of the J1 distance on step paths with drift.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Result;
use crate::path::{skorohod_j1_distance, uniform_distance, CadlagPath};
use crate::rng::{replicate, SeedStream};

/// Tally of property failures over a fuzz suite.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct FuzzSummary {
    pub cases: usize,
    pub identity: usize,
    pub symmetry: usize,
    pub uniform_bound: usize,
    pub triangle: usize,
    pub closed_form: usize,
    /// Largest `d(a, c) - d(a, b) - d(b, c)` seen.
    pub max_triangle_excess: f64,
    pub max_closed_form_error: f64,
}

impl FuzzSummary {
    pub fn failures(&self) -> usize {
        self.identity + self.symmetry + self.uniform_bound + self.triangle + self.closed_form
    }

    fn merge(mut self, o: FuzzSummary) -> Self {
        self.cases += o.cases;
        self.identity += o.identity;
        self.symmetry += o.symmetry;
        self.uniform_bound += o.uniform_bound;
        self.triangle += o.triangle;
        self.closed_form += o.closed_form;
        self.max_triangle_excess = self.max_triangle_excess.max(o.max_triangle_excess);
        self.max_closed_form_error = self.max_closed_form_error.max(o.max_closed_form_error);
        self
    }
}

/// Closed-form tolerance for the single-jump case.
pub const CLOSED_FORM_TOL: f64 = 1e-6;

type Raw = (Vec<f64>, Vec<f64>, f64, f64);

fn step(times: &[f64], marks: &[f64], start: f64) -> Result<CadlagPath> {
    CadlagPath::from_jumps(1.0, vec![start], vec![0.0], times, marks)
}

fn build((times, marks, start, slope): &Raw) -> Result<CadlagPath> {
    CadlagPath::from_jumps(1.0, vec![*start], vec![*slope], times, marks)
}

fn random_step(rng: &mut ChaCha8Rng) -> Raw {
    let k = rng.random_range(0..=4);
    let times = (0..k).map(|_| rng.random_range(0.001..0.999)).collect();
    let marks = (0..k).map(|_| rng.random_range(-1.0..1.0)).collect();
    let start = if rng.random_bool(0.5) {
        0.0
    } else {
        rng.random_range(-0.5..0.5)
    };
    let slope = if rng.random_bool(0.5) {
        0.0
    } else {
        rng.random_range(-0.5..0.5)
    };
    (times, marks, start, slope)
}

/// Small perturbation of jump epochs and sizes, so that alignments matter.
fn perturb(rng: &mut ChaCha8Rng, (times, marks, start, slope): &Raw) -> Raw {
    let scale = rng.random_range(0.001..0.1);
    let t = times
        .iter()
        .map(|&t| (t + rng.random_range(-scale..scale)).clamp(0.001, 0.999))
        .collect();
    let m = marks.iter().map(|&m| m + rng.random_range(-scale..scale)).collect();
    (t, m, *start, *slope)
}

/// Runs `cases` random triples `(a, b, c)` of one-dimensional step paths on
/// `[0, 1]`, half of them with a linear drift, plus one single-jump pair per case, checking `d(a, a) = 0`,
/// exact symmetry, `d <= uniform distance`, the triangle inequality within
/// `2 tol`, and `d = min(|t_1 - t_2|, |h|)` for equal single jumps.
pub fn skorohod_fuzz(cases: usize, tol: f64, seed: u64) -> Result<FuzzSummary> {
    let results = replicate(cases, SeedStream::new(seed), |_, s| -> Result<FuzzSummary> {
        let mut rng = s.rng();
        let raw_a = random_step(&mut rng);
        let raw_b = if rng.random_bool(0.5) {
            perturb(&mut rng, &raw_a)
        } else {
            random_step(&mut rng)
        };
        let raw_c = if rng.random_bool(0.5) {
            perturb(&mut rng, &raw_b)
        } else {
            random_step(&mut rng)
        };
        let a = build(&raw_a)?;
        let b = build(&raw_b)?;
        let c = build(&raw_c)?;
        let mut out = FuzzSummary {
            cases: 1,
            ..FuzzSummary::default()
        };
        if skorohod_j1_distance(&a, &a, tol)? != 0.0 {
            out.identity += 1;
        }
        let ab = skorohod_j1_distance(&a, &b, tol)?;
        if ab != skorohod_j1_distance(&b, &a, tol)? {
            out.symmetry += 1;
        }
        if ab > uniform_distance(&a, &b)? {
            out.uniform_bound += 1;
        }
        let bc = skorohod_j1_distance(&b, &c, tol)?;
        let ac = skorohod_j1_distance(&a, &c, tol)?;
        let excess = ac - ab - bc;
        out.max_triangle_excess = excess;
        if excess > 2.0 * tol {
            out.triangle += 1;
        }

        let t1 = rng.random_range(0.001..0.999);
        let t2 = rng.random_range(0.001..0.999);
        let h = rng.random_range(-2.0..2.0);
        let d = skorohod_j1_distance(&step(&[t1], &[h], 0.0)?, &step(&[t2], &[h], 0.0)?, tol)?;
        let err = (d - (t1 - t2).abs().min(h.abs())).abs();
        out.max_closed_form_error = err;
        if err > CLOSED_FORM_TOL {
            out.closed_form += 1;
        }
        Ok(out)
    });
    results
        .into_iter()
        .try_fold(FuzzSummary::default(), |acc, r| Ok(acc.merge(r?)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_suite_is_clean() {
        let s = skorohod_fuzz(100, 1e-4, 17).unwrap();
        assert_eq!(s.cases, 100);
        assert_eq!(s.failures(), 0, "{s:?}");
    }
}
