//! Exact enumeration of the first-passage identity
//! `1 - G_n(t) = (F_n(t + 1/n) - F_n(t)) / P(ξ_1 > u)` for an iid
//! two-valued sequence with `P(ξ > u) = π`, where
//! `F_n(t) = P(max_{2<=j<=nt} ξ_j > u)` and `G_n` is the same probability
//! conditional on `ξ_1 > u`.

use serde::Serialize;

use crate::error::{ensure, Error, Result};

/// Largest `n` accepted; enumeration visits `2^{n+1}` outcomes.
pub const MAX_EXIN_N: usize = 16;

/// One grid point `t = k/n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExinRow {
    pub k: usize,
    pub t: f64,
    pub f: f64,
    pub g: f64,
    pub lhs: f64,
    pub rhs: f64,
}

impl ExinRow {
    pub fn error(&self) -> f64 {
        (self.lhs - self.rhs).abs()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExinTable {
    pub pi: f64,
    pub n: usize,
    /// Rows for `k = 1..=n`. At `k = 0` both functions vanish by convention
    /// and the identity reads `1 = 0`, so that point is not tabulated.
    pub rows: Vec<ExinRow>,
}

impl ExinTable {
    pub fn max_error(&self) -> f64 {
        self.rows.iter().map(ExinRow::error).fold(0.0, f64::max)
    }

    pub fn holds(&self, tol: f64) -> bool {
        self.max_error() <= tol
    }
}

/// Tabulates `F_n(k/n)` and `G_n(k/n)` for `k = 1..=n` by summing the exact
/// probabilities of all `2^{n+1}` exceedance patterns of `ξ_1, …, ξ_{n+1}`.
pub fn exin_identity_check(pi: f64, n: usize) -> Result<ExinTable> {
    ensure(pi > 0.0 && pi < 1.0, "pi", format!("must lie in (0, 1), got {pi}"))?;
    ensure(n >= 1, "n", "must be at least 1")?;
    if n > MAX_EXIN_N {
        return Err(Error::EnumerationTooLarge { n, max: MAX_EXIN_N });
    }
    let len = n + 1;
    // first[k] = P(first exceedance among ξ_2.. is at index k), split by ξ_1.
    let mut first = vec![0.0; len + 2];
    let mut first_given = vec![0.0; len + 2];
    for mask in 0u32..(1u32 << len) {
        let ones = mask.count_ones() as i32;
        let prob = pi.powi(ones) * (1.0 - pi).powi(len as i32 - ones);
        let rest = mask >> 1;
        // 1-based index of the first exceedance among ξ_2..ξ_{n+1}.
        let slot = if rest == 0 {
            len + 1
        } else {
            rest.trailing_zeros() as usize + 2
        };
        first[slot] += prob;
        if mask & 1 == 1 {
            first_given[slot] += prob;
        }
    }
    let cumulative = |v: &[f64], k: usize| -> f64 { v.get(2..=k).map_or(0.0, |s| s.iter().sum()) };
    let f = |k: usize| cumulative(&first, k);
    let g = |k: usize| cumulative(&first_given, k) / pi;
    let rows = (1..=n)
        .map(|k| ExinRow {
            k,
            t: k as f64 / n as f64,
            f: f(k),
            g: g(k),
            lhs: 1.0 - g(k),
            rhs: (f(k + 1) - f(k)) / pi,
        })
        .collect();
    Ok(ExinTable { pi, n, rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn worked_example() {
        let table = exin_identity_check(0.5, 4).unwrap();
        let row = table.rows.iter().find(|r| r.k == 3).unwrap();
        assert!((row.f - 0.75).abs() < 1e-15);
        assert!((table.rows[3].f - 0.875).abs() < 1e-15);
        assert!((row.lhs - 0.25).abs() < 1e-15);
        assert!(table.holds(1e-12));
    }

    #[test]
    fn first_row_is_convention() {
        let table = exin_identity_check(0.3, 6).unwrap();
        assert_eq!(table.rows[0].f, 0.0);
        assert_eq!(table.rows[0].g, 0.0);
        assert!((table.rows[0].rhs - 1.0).abs() < 1e-12);
    }

    #[test]
    fn iid_closed_form() {
        let pi: f64 = 0.1;
        let table = exin_identity_check(pi, 12).unwrap();
        for r in &table.rows {
            let expected = if r.k < 2 {
                0.0
            } else {
                1.0 - (1.0 - pi).powi(r.k as i32 - 1)
            };
            assert!((r.f - expected).abs() < 1e-13);
            assert!((r.g - expected).abs() < 1e-13);
        }
    }

    #[test]
    fn rejects_large_n() {
        assert!(matches!(
            exin_identity_check(0.5, 17),
            Err(Error::EnumerationTooLarge { .. })
        ));
    }
}
