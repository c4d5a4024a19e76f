//! Small statistical primitives shared by the diagnostics.

/// Sample mean and standard error of the mean.
pub fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (0.0, 0.0);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    (mean, (ss / (n as f64 - 1.0) / n as f64).sqrt())
}

/// Binomial proportion and its standard error.
pub fn proportion(successes: usize, trials: usize) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 0.0);
    }
    let p = successes as f64 / trials as f64;
    (p, (p * (1.0 - p) / trials as f64).sqrt())
}

/// Ratio-of-sums estimator `sum(num) / sum(den)` over independent
/// replications, with a delta-method standard error. Returns `None` when the
/// denominators sum to zero.
pub fn ratio_of_sums(pairs: &[(f64, f64)]) -> Option<(f64, f64)> {
    let reps = pairs.len();
    let num: f64 = pairs.iter().map(|p| p.0).sum();
    let den: f64 = pairs.iter().map(|p| p.1).sum();
    if den <= 0.0 {
        return None;
    }
    let ratio = num / den;
    if reps < 2 {
        return Some((ratio, 0.0));
    }
    let mean_den = den / reps as f64;
    let ss: f64 = pairs
        .iter()
        .map(|(a, b)| {
            let r = a - ratio * b;
            r * r
        })
        .sum();
    let var = ss / ((reps as f64 - 1.0) * reps as f64 * mean_den * mean_den);
    Some((ratio, var.sqrt()))
}

/// Two-sample Kolmogorov–Smirnov statistic `sup |F_a - F_b|`.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    if a.is_empty() || b.is_empty() {
        return 0.0;
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let x = if a[i] <= b[j] { a[i] } else { b[j] };
        while i < a.len() && a[i] <= x {
            i += 1;
        }
        while j < b.len() && b[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Asymptotic two-sample KS critical value at significance `level`.
pub fn ks_critical(level: f64, na: usize, nb: usize) -> f64 {
    let c = (-0.5 * (level / 2.0).ln()).sqrt();
    c * ((na + nb) as f64 / (na as f64 * nb as f64)).sqrt()
}

/// Euclidean norm.
#[inline]
pub fn norm(x: &[f64]) -> f64 {
    if x.len() == 1 {
        x[0].abs()
    } else {
        x.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ks_of_identical_samples_is_zero() {
        let a: Vec<f64> = (0..100).map(|i| i as f64).collect();
        assert_eq!(ks_two_sample(&a, &a), 0.0);
    }

    #[test]
    fn ks_of_disjoint_samples_is_one() {
        let a = [1.0, 2.0, 3.0];
        let b = [4.0, 5.0];
        assert_eq!(ks_two_sample(&a, &b), 1.0);
    }

    #[test]
    fn ks_handles_ties() {
        let a = [1.0, 1.0, 2.0, 2.0];
        let b = [1.0, 2.0];
        assert_eq!(ks_two_sample(&a, &b), 0.0);
    }

    #[test]
    fn ks_critical_matches_table() {
        // c(0.05) = 1.358
        let c = ks_critical(0.05, 1000, 1000) / (2.0f64 / 1000.0).sqrt();
        assert!((c - 1.358).abs() < 1e-3);
    }

    #[test]
    fn ratio_of_sums_basic() {
        let (r, se) = ratio_of_sums(&[(1.0, 2.0), (2.0, 4.0), (3.0, 6.0)]).unwrap();
        assert!((r - 0.5).abs() < 1e-15);
        assert!(se < 1e-15);
        assert!(ratio_of_sums(&[(0.0, 0.0)]).is_none());
    }
}
