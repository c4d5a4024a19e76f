//! Marked point patterns on `[0, T] × (ℝ^d ∖ {0})`.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{ensure, invalid, Error, Result};
use crate::rng::SeedStream;
use crate::stable::StableLaw;
use crate::stats::{mean_stderr, norm};

/// Time-sorted `(time, mark)` points. Every mark with norm above `floor`
/// that occurred in `[0, T]` is present; nothing is known below it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointPattern {
    horizon: f64,
    dim: usize,
    floor: f64,
    times: Vec<f64>,
    marks: Vec<f64>,
}

impl PointPattern {
    /// `marks` is flattened with stride `dim`; points are sorted by time
    /// (stably, so simultaneous points keep their input order).
    pub fn new(horizon: f64, dim: usize, floor: f64, times: Vec<f64>, marks: Vec<f64>) -> Result<Self> {
        ensure(
            horizon > 0.0 && horizon.is_finite(),
            "horizon",
            "must be positive and finite",
        )?;
        ensure(dim >= 1, "dim", "must be at least 1")?;
        ensure(floor >= 0.0, "floor", "must be nonnegative")?;
        if marks.len() != times.len() * dim {
            return Err(Error::DimensionMismatch {
                expected: times.len() * dim,
                got: marks.len(),
            });
        }
        ensure(
            times.iter().all(|&t| (0.0..=horizon).contains(&t)),
            "times",
            "must lie in [0, horizon]",
        )?;
        for x in marks.chunks_exact(dim) {
            let r = norm(x);
            ensure(r > 0.0 && r.is_finite(), "marks", "must be finite and nonzero")?;
            if r <= floor {
                return Err(Error::MarkBelowThreshold {
                    norm: r,
                    threshold: floor,
                });
            }
        }
        let mut order: Vec<usize> = (0..times.len()).collect();
        order.sort_by(|&i, &j| times[i].total_cmp(&times[j]));
        let sorted_times = order.iter().map(|&i| times[i]).collect();
        let sorted_marks = order
            .iter()
            .flat_map(|&i| marks[i * dim..(i + 1) * dim].iter().copied())
            .collect();
        Ok(Self {
            horizon,
            dim,
            floor,
            times: sorted_times,
            marks: sorted_marks,
        })
    }

    pub fn empty(horizon: f64, dim: usize, floor: f64) -> Result<Self> {
        Self::new(horizon, dim, floor, Vec::new(), Vec::new())
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn floor(&self) -> f64 {
        self.floor
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &[f64])> + '_ {
        self.times.iter().copied().zip(self.marks.chunks_exact(self.dim))
    }

    /// Drops points with `|mark| <= floor` and raises the completeness floor.
    pub fn above(&self, floor: f64) -> Result<Self> {
        ensure(floor >= self.floor, "floor", "cannot lower the completeness floor")?;
        let mut times = Vec::new();
        let mut marks = Vec::new();
        for (t, x) in self.iter() {
            if norm(x) > floor {
                times.push(t);
                marks.extend_from_slice(x);
            }
        }
        Self::new(self.horizon, self.dim, floor, times, marks)
    }

    /// Concatenates `other` after `self`, shifting its times by `self`'s
    /// horizon.
    pub fn append_shifted(&self, other: &Self) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: other.dim,
            });
        }
        let mut times = self.times.clone();
        times.extend(other.times.iter().map(|t| t + self.horizon));
        let mut marks = self.marks.clone();
        marks.extend_from_slice(&other.marks);
        Self::new(
            self.horizon + other.horizon,
            self.dim,
            self.floor.max(other.floor),
            times,
            marks,
        )
        .and_then(|p| p.above(self.floor.max(other.floor)))
    }

    /// Writes `time,mark_0,..` rows.
    pub fn write_columns<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let io = |e: csv::Error| invalid("writer", e.to_string());
        let mut header = vec!["time".to_string()];
        header.extend((0..self.dim).map(|k| format!("mark_{k}")));
        w.write_record(&header).map_err(io)?;
        for (t, x) in self.iter() {
            let mut rec = vec![t.to_string()];
            rec.extend(x.iter().map(f64::to_string));
            w.write_record(&rec).map_err(io)?;
        }
        w.flush().map_err(|e| invalid("writer", e.to_string()))
    }
}

/// `{x : inner < |x| <= outer, x/|x| ∈ directions}`; `None` means every
/// direction. `outer` may be infinite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnularSector {
    pub inner: f64,
    pub outer: f64,
    pub directions: Option<Vec<Vec<f64>>>,
}

impl AnnularSector {
    pub fn annulus(inner: f64, outer: f64) -> Self {
        Self {
            inner,
            outer,
            directions: None,
        }
    }

    pub fn beyond(inner: f64) -> Self {
        Self::annulus(inner, f64::INFINITY)
    }

    pub fn with_directions(mut self, directions: Vec<Vec<f64>>) -> Self {
        self.directions = Some(directions);
        self
    }

    fn validate(&self) -> Result<()> {
        ensure(self.inner > 0.0, "inner", "annuli must stay bounded away from zero")?;
        ensure(self.outer > self.inner, "outer", "must exceed the inner radius")
    }

    fn points_to(&self, direction: &[f64]) -> bool {
        match &self.directions {
            None => true,
            Some(list) => list
                .iter()
                .any(|d| d.len() == direction.len() && d.iter().zip(direction).all(|(a, b)| (a - b).abs() <= 1e-9)),
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        let r = norm(x);
        if !(r > self.inner && r <= self.outer) {
            return false;
        }
        if self.directions.is_none() {
            return true;
        }
        let unit: Vec<f64> = x.iter().map(|v| v / r).collect();
        self.points_to(&unit)
    }

    /// `Π_α` of the sector.
    pub fn levy_mass(&self, law: &StableLaw) -> f64 {
        let a = law.alpha();
        let radial = self.inner.powf(-a)
            - if self.outer.is_infinite() {
                0.0
            } else {
                self.outer.powf(-a)
            };
        law.atoms()
            .iter()
            .filter(|atom| self.points_to(&atom.direction))
            .map(|atom| atom.weight / a * radial)
            .sum()
    }
}

/// `(start, end] × (union of annular sectors)`. Sectors are assumed
/// disjoint when mean measures are computed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RectRegion {
    pub start: f64,
    pub end: f64,
    pub marks: Vec<AnnularSector>,
}

impl RectRegion {
    pub fn new(start: f64, end: f64, marks: Vec<AnnularSector>) -> Result<Self> {
        let r = Self { start, end, marks };
        r.validate()?;
        Ok(r)
    }

    /// `(start, end] × {|x| > radius}`.
    pub fn beyond(start: f64, end: f64, radius: f64) -> Result<Self> {
        Self::new(start, end, vec![AnnularSector::beyond(radius)])
    }

    fn validate(&self) -> Result<()> {
        ensure(
            self.start >= 0.0 && self.end > self.start,
            "region",
            "time interval must satisfy 0 <= start < end",
        )?;
        ensure(!self.marks.is_empty(), "region", "needs at least one sector")?;
        self.marks.iter().try_for_each(AnnularSector::validate)
    }

    pub fn mark_floor(&self) -> f64 {
        self.marks.iter().map(|m| m.inner).fold(f64::INFINITY, f64::min)
    }

    pub fn contains(&self, t: f64, x: &[f64]) -> bool {
        t > self.start && t <= self.end && self.marks.iter().any(|m| m.contains(x))
    }

    /// `Leb × Π_α` of the region.
    pub fn mean_measure(&self, law: &StableLaw) -> f64 {
        (self.end - self.start) * self.marks.iter().map(|m| m.levy_mass(law)).sum::<f64>()
    }
}

/// Points `(j/n, Z_j/b_n)` for `1 <= j <= nT` with `|Z_j| > floor · b_n`.
/// `z` is flattened with stride `dim`.
pub fn extract_point_process(
    z: &[f64],
    dim: usize,
    b_n: f64,
    n: usize,
    horizon: f64,
    floor: f64,
) -> Result<PointPattern> {
    ensure(floor > 0.0, "floor", "must be positive")?;
    ensure(n >= 1, "n", "must be at least 1")?;
    ensure(dim >= 1, "dim", "must be at least 1")?;
    ensure(b_n > 0.0 && b_n.is_finite(), "b_n", "must be positive and finite")?;
    let count = (n as f64 * horizon).floor() as usize;
    let needed = (n as f64 * horizon).ceil() as usize;
    if z.len() < needed * dim {
        return Err(Error::InsufficientData {
            needed,
            available: z.len() / dim,
        });
    }
    let mut times = Vec::new();
    let mut marks = Vec::new();
    let mut scaled = vec![0.0; dim];
    for (j, row) in z[..count * dim].chunks_exact(dim).enumerate() {
        for (s, v) in scaled.iter_mut().zip(row) {
            *s = v / b_n;
        }
        // same predicate as jumps_above on the partial-sum path
        if norm(&scaled) > floor {
            times.push((j + 1) as f64 / n as f64);
            marks.extend_from_slice(&scaled);
        }
    }
    PointPattern::new(horizon, dim, floor, times, marks)
}

/// Poisson process with mean measure `Leb × Π_α` on `[0, T] × {|x| > floor}`.
pub fn sample_poisson_pattern(law: &StableLaw, horizon: f64, floor: f64, seed: u64) -> Result<PointPattern> {
    ensure(floor > 0.0, "floor", "must be positive")?;
    ensure(
        horizon > 0.0 && horizon.is_finite(),
        "horizon",
        "must be positive and finite",
    )?;
    let mut rng = SeedStream::new(seed).rng();
    let mut times = Vec::new();
    let mut marks = Vec::new();
    law.sample_jumps(&mut rng, horizon, floor, f64::INFINITY, &mut times, &mut marks);
    PointPattern::new(horizon, law.dim(), floor, times, marks)
}

/// Number of points of `pattern` inside `region`.
pub fn count_in(pattern: &PointPattern, region: &RectRegion) -> Result<usize> {
    region.validate()?;
    let floor = region.mark_floor();
    if floor < pattern.floor {
        return Err(Error::IncompleteRegion {
            region: floor,
            pattern: pattern.floor,
        });
    }
    ensure(
        region.end <= pattern.horizon,
        "region",
        "time interval extends beyond the pattern horizon",
    )?;
    let lo = pattern.times.partition_point(|&t| t <= region.start);
    let hi = pattern.times.partition_point(|&t| t <= region.end);
    Ok((lo..hi)
        .filter(|&i| {
            let x = &pattern.marks[i * pattern.dim..(i + 1) * pattern.dim];
            region.marks.iter().any(|m| m.contains(x))
        })
        .count())
}

/// Nonnegative step function `Σ_c v_c 1_{R_c}` over disjoint regions.
/// Values may be `+∞`, giving avoidance indicators.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepFunction {
    pub cells: Vec<(RectRegion, f64)>,
}

impl StepFunction {
    pub fn new(cells: Vec<(RectRegion, f64)>) -> Result<Self> {
        for (region, v) in &cells {
            region.validate()?;
            ensure(*v >= 0.0, "f", "step values must be nonnegative")?;
        }
        Ok(Self { cells })
    }

    pub fn zero() -> Self {
        Self { cells: Vec::new() }
    }

    /// `e^{-N(f)}` for one pattern.
    pub fn exp_neg_integral(&self, pattern: &PointPattern) -> Result<f64> {
        let mut total = 0.0;
        for (region, v) in &self.cells {
            let c = count_in(pattern, region)?;
            if c > 0 && *v > 0.0 {
                total += v * c as f64;
            }
        }
        Ok((-total).exp())
    }
}

/// `E e^{-N(f)} = exp(-∫ (1 - e^{-f}) d(Leb × Π_α))` for the Poisson
/// process, in closed form over the cells.
pub fn poisson_laplace_functional(law: &StableLaw, f: &StepFunction) -> Result<f64> {
    let mut exponent = 0.0;
    for (region, v) in &f.cells {
        region.validate()?;
        ensure(*v >= 0.0, "f", "step values must be nonnegative")?;
        exponent += region.mean_measure(law) * (1.0 - (-v).exp());
    }
    Ok((-exponent).exp())
}

/// Monte Carlo mean of `e^{-N(f)}` over replicated patterns and its
/// standard error.
pub fn empirical_laplace(patterns: &[PointPattern], f: &StepFunction) -> Result<(f64, f64)> {
    if patterns.len() < 100 {
        return Err(Error::InsufficientData {
            needed: 100,
            available: patterns.len(),
        });
    }
    let values = patterns
        .iter()
        .map(|p| f.exp_neg_integral(p))
        .collect::<Result<Vec<_>>>()?;
    Ok(mean_stderr(&values))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extraction_thresholds() {
        let mut z = vec![0.01; 10];
        z[2] = 2.0;
        let p = extract_point_process(&z, 1, 1.0, 10, 1.0, 1.0).unwrap();
        assert_eq!(p.len(), 1);
        let (t, x) = p.iter().next().unwrap();
        assert!((t - 0.3).abs() < 1e-15);
        assert_eq!(x, &[2.0]);
        let none = extract_point_process(&[0.5; 10], 1, 1.0, 10, 1.0, 1.0).unwrap();
        assert!(none.is_empty());
        // equality is not an exceedance
        let tie = extract_point_process(&[1.0; 10], 1, 1.0, 10, 1.0, 1.0).unwrap();
        assert!(tie.is_empty());
    }

    #[test]
    fn count_in_rules() {
        let p = PointPattern::new(1.0, 1, 0.5, vec![0.2, 0.6, 0.9], vec![1.0, -3.0, 0.7]).unwrap();
        let full = RectRegion::beyond(0.0, 1.0, 0.5).unwrap();
        assert_eq!(count_in(&p, &full).unwrap(), 3);
        let pos = RectRegion::new(
            0.0,
            1.0,
            vec![AnnularSector::beyond(0.5).with_directions(vec![vec![1.0]])],
        )
        .unwrap();
        assert_eq!(count_in(&p, &pos).unwrap(), 2);
        let low = RectRegion::beyond(0.0, 1.0, 0.1).unwrap();
        assert!(matches!(count_in(&p, &low), Err(Error::IncompleteRegion { .. })));
        let a = RectRegion::beyond(0.0, 0.6, 0.5).unwrap();
        let b = RectRegion::beyond(0.6, 1.0, 0.5).unwrap();
        assert_eq!(count_in(&p, &a).unwrap() + count_in(&p, &b).unwrap(), 3);
        assert!(RectRegion::beyond(0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn laplace_closed_form() {
        let law = StableLaw::symmetric(1.5).unwrap();
        assert_eq!(poisson_laplace_functional(&law, &StepFunction::zero()).unwrap(), 1.0);
        let f = StepFunction::new(vec![(RectRegion::beyond(0.0, 1.0, 1.0).unwrap(), 2f64.ln())]).unwrap();
        let v = poisson_laplace_functional(&law, &f).unwrap();
        assert!((v - (-0.5f64).exp()).abs() < 1e-15);
        let avoid = StepFunction::new(vec![(RectRegion::beyond(0.0, 1.0, 0.5).unwrap(), f64::INFINITY)]).unwrap();
        let v = poisson_laplace_functional(&law, &avoid).unwrap();
        assert!((v - (-(0.5f64).powf(-1.5)).exp()).abs() < 1e-15);
    }

    #[test]
    fn empirical_laplace_of_zero() {
        let patterns: Vec<PointPattern> = (0..100)
            .map(|i| sample_poisson_pattern(&StableLaw::symmetric(1.0).unwrap(), 1.0, 1.0, i).unwrap())
            .collect();
        assert_eq!(empirical_laplace(&patterns, &StepFunction::zero()).unwrap(), (1.0, 0.0));
        assert!(empirical_laplace(&patterns[..10], &StepFunction::zero()).is_err());
    }

    #[test]
    fn pattern_marks_respect_floor() {
        let law = StableLaw::one_dim(0.7, 0.3).unwrap();
        let p = sample_poisson_pattern(&law, 5.0, 0.2, 9).unwrap();
        assert!(p.iter().all(|(t, x)| (0.0..=5.0).contains(&t) && x[0].abs() > 0.2));
        assert!(p.times().windows(2).all(|w| w[0] <= w[1]));
        assert!(PointPattern::new(1.0, 1, 1.0, vec![0.5], vec![0.5]).is_err());
    }
}
