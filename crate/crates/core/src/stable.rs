//! α-stable laws with discrete spectral measures.
//!
//! A [`StableLaw`] is described by its Lévy measure
//!
//! ```text
//! Π_α(B) = Σ_s w_s ∫_0^∞ 1_B(r s) r^{-α-1} dr
//! ```
//!
//! over finitely many unit directions `s` with weights `w_s` (the measure
//! `λ`), plus a shift `τ` entering the characteristic function
//!
//! ```text
//! α ≠ 1:  exp(-Σ_s λ₁(s) |⟨u,s⟩|^α (1 - i tan(πα/2) sgn⟨u,s⟩) + i⟨τ,u⟩)
//! α = 1:  exp(-Σ_s λ₁(s) |⟨u,s⟩| (1 + i (2/π) sgn⟨u,s⟩ log|⟨u,s⟩|) + i⟨τ,u⟩)
//! ```
//!
//! The two spectral measures are linked by `λ₁ = K_α λ` with
//! `K_α = Γ(1-α) cos(πα/2) / α` (and `K_1 = π/2`), the value of
//! `∫_0^∞ (1 - cos r) r^{-α-1} dr`. Under the unit-tail convention
//! `Π_α({|x| > 1}) = 1`, i.e. `Σ_s w_s = α`.

use num_complex::Complex64;
use rand::distr::{Distribution, Open01};
use rand::Rng;
use rand_distr::{Exp1, Poisson};
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{ensure, invalid, Error, Result};
use crate::path::CadlagPath;
use crate::rng::SeedStream;
use crate::stats::norm;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// One atom of a discrete spectral measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralAtom {
    pub direction: Vec<f64>,
    pub weight: f64,
}

impl SpectralAtom {
    pub fn new(direction: Vec<f64>, weight: f64) -> Self {
        Self { direction, weight }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "StableLawRepr", into = "StableLawRepr")]
pub struct StableLaw {
    alpha: f64,
    dim: usize,
    atoms: Vec<SpectralAtom>,
    shift: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct StableLawRepr {
    alpha: f64,
    spectral: Vec<SpectralAtom>,
    shift: Vec<f64>,
}

impl TryFrom<StableLawRepr> for StableLaw {
    type Error = Error;
    fn try_from(r: StableLawRepr) -> Result<Self> {
        StableLaw::new(r.alpha, r.spectral, r.shift)
    }
}

impl From<StableLaw> for StableLawRepr {
    fn from(l: StableLaw) -> Self {
        Self {
            alpha: l.alpha,
            spectral: l.atoms,
            shift: l.shift,
        }
    }
}

/// `K_α` with `λ₁ = K_α λ`.
pub fn correspondence_constant(alpha: f64) -> f64 {
    if (alpha - 1.0).abs() < 1e-12 {
        FRAC_PI_2
    } else {
        statrs::function::gamma::gamma(1.0 - alpha) * (PI * alpha / 2.0).cos() / alpha
    }
}

fn is_alpha_one(alpha: f64) -> bool {
    alpha == 1.0
}

impl StableLaw {
    /// Law with Lévy spectral weights `w_s` given directly.
    pub fn new(alpha: f64, atoms: Vec<SpectralAtom>, shift: Vec<f64>) -> Result<Self> {
        ensure(
            alpha > 0.0 && alpha < 2.0,
            "alpha",
            format!("must lie in (0, 2), got {alpha}"),
        )?;
        ensure(!atoms.is_empty(), "spectral", "needs at least one atom")?;
        let dim = atoms[0].direction.len();
        ensure(dim >= 1, "spectral", "directions must be non-empty vectors")?;
        let mut total = 0.0;
        for a in &atoms {
            if a.direction.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: a.direction.len(),
                });
            }
            let n = norm(&a.direction);
            ensure(
                (n - 1.0).abs() <= 1e-9,
                "spectral",
                format!("direction {:?} is not a unit vector", a.direction),
            )?;
            ensure(
                a.weight >= 0.0 && a.weight.is_finite(),
                "spectral",
                format!("weight {} must be finite and nonnegative", a.weight),
            )?;
            total += a.weight;
        }
        ensure(total > 0.0, "spectral", "weights must have a positive sum")?;
        if shift.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: shift.len(),
            });
        }
        ensure(shift.iter().all(|v| v.is_finite()), "shift", "must be finite")?;
        Ok(Self {
            alpha,
            dim,
            atoms,
            shift,
        })
    }

    /// Rescales the atom weights so that `Π_α({|x| > 1}) = 1`.
    pub fn unit_tail(alpha: f64, atoms: Vec<SpectralAtom>, shift: Vec<f64>) -> Result<Self> {
        let total: f64 = atoms.iter().map(|a| a.weight).sum();
        ensure(total > 0.0, "spectral", "weights must have a positive sum")?;
        let atoms = atoms
            .into_iter()
            .map(|a| SpectralAtom::new(a.direction, a.weight * alpha / total))
            .collect();
        Self::new(alpha, atoms, shift)
    }

    /// One-dimensional unit-tail law with balance `p` (and `q = 1 - p`).
    pub fn one_dim(alpha: f64, p: f64) -> Result<Self> {
        ensure((0.0..=1.0).contains(&p), "p", format!("must lie in [0, 1], got {p}"))?;
        Self::unit_tail(
            alpha,
            vec![SpectralAtom::new(vec![1.0], p), SpectralAtom::new(vec![-1.0], 1.0 - p)],
            vec![0.0],
        )
    }

    pub fn symmetric(alpha: f64) -> Result<Self> {
        Self::one_dim(alpha, 0.5)
    }

    /// One-dimensional law in the `S_α(σ, β, μ)` parametrisation.
    pub fn from_scale_skew(alpha: f64, scale: f64, beta: f64, loc: f64) -> Result<Self> {
        ensure(scale > 0.0, "scale", "must be positive")?;
        ensure((-1.0..=1.0).contains(&beta), "beta", "must lie in [-1, 1]")?;
        ensure(alpha > 0.0 && alpha < 2.0, "alpha", "must lie in (0, 2)")?;
        let lambda1 = scale.powf(alpha);
        let k = correspondence_constant(alpha);
        Self::new(
            alpha,
            vec![
                SpectralAtom::new(vec![1.0], lambda1 * (1.0 + beta) / 2.0 / k),
                SpectralAtom::new(vec![-1.0], lambda1 * (1.0 - beta) / 2.0 / k),
            ],
            vec![loc],
        )
    }

    pub fn standard_cauchy() -> Self {
        Self::from_scale_skew(1.0, 1.0, 0.0, 0.0).expect("valid parameters")
    }

    /// The law of `X(1)` for the Lévy process with generating triplet
    /// `(0, Π_α, drift)` under the truncation `I(|x| <= 1)`.
    pub fn from_levy_triplet(alpha: f64, atoms: Vec<SpectralAtom>, drift: Vec<f64>) -> Result<Self> {
        let mut law = Self::new(alpha, atoms, drift)?;
        let d = law.levy_khintchine_shift();
        for (s, v) in law.shift.iter_mut().zip(d) {
            *s += v;
        }
        Ok(law)
    }

    pub fn with_shift(mut self, shift: Vec<f64>) -> Result<Self> {
        if shift.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: shift.len(),
            });
        }
        self.shift = shift;
        Ok(self)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn atoms(&self) -> &[SpectralAtom] {
        &self.atoms
    }

    pub fn shift(&self) -> &[f64] {
        &self.shift
    }

    /// `λ(S^{d-1}) = Σ_s w_s`.
    pub fn total_weight(&self) -> f64 {
        self.atoms.iter().map(|a| a.weight).sum()
    }

    pub fn is_unit_tail(&self) -> bool {
        (self.total_weight() / self.alpha - 1.0).abs() < 1e-12
    }

    /// True when every atom has a mirror atom `-s` of equal weight.
    pub fn spectral_is_symmetric(&self) -> bool {
        self.atoms.iter().all(|a| {
            let mass_here: f64 = self
                .atoms
                .iter()
                .filter(|b| same_direction(&b.direction, &a.direction))
                .map(|b| b.weight)
                .sum();
            let neg: Vec<f64> = a.direction.iter().map(|v| -v).collect();
            let mass_mirror: f64 = self
                .atoms
                .iter()
                .filter(|b| same_direction(&b.direction, &neg))
                .map(|b| b.weight)
                .sum();
            (mass_here - mass_mirror).abs() <= 1e-12 * mass_here.max(1.0)
        })
    }

    pub fn is_symmetric(&self) -> bool {
        self.spectral_is_symmetric() && self.shift.iter().all(|&v| v == 0.0)
    }

    /// `(σ, β, μ)` of a one-dimensional law.
    pub fn one_dim_parameters(&self) -> Option<(f64, f64, f64)> {
        if self.dim != 1 {
            return None;
        }
        let k = correspondence_constant(self.alpha);
        let (mut plus, mut minus) = (0.0, 0.0);
        for a in &self.atoms {
            if a.direction[0] > 0.0 {
                plus += a.weight * k;
            } else {
                minus += a.weight * k;
            }
        }
        let total = plus + minus;
        Some((total.powf(1.0 / self.alpha), (plus - minus) / total, self.shift[0]))
    }

    /// `Π_α({x : |x| > radius, x/|x| ∈ sector})`; `sector` lists atom indices.
    pub fn tail_mass(&self, radius: f64, sector: Option<&[usize]>) -> Result<f64> {
        ensure(radius > 0.0, "radius", format!("must be positive, got {radius}"))?;
        let weight = match sector {
            None => self.total_weight(),
            Some(idx) => {
                let mut w = 0.0;
                for &i in idx {
                    let atom = self
                        .atoms
                        .get(i)
                        .ok_or_else(|| invalid("sector", format!("atom index {i} out of range")))?;
                    w += atom.weight;
                }
                w
            }
        };
        Ok(weight / self.alpha * radius.powf(-self.alpha))
    }

    /// `∫_{lo < |x| <= hi} x Π_α(dx)`, signed so that `lo > hi` flips the
    /// orientation. `hi = ∞` needs `α > 1`; `lo = 0` needs `α < 1`.
    pub fn truncated_first_moment(&self, lo: f64, hi: f64) -> Vec<f64> {
        let a = self.alpha;
        let radial = if is_alpha_one(a) {
            (hi / lo).ln()
        } else {
            (power_or_limit(hi, 1.0 - a) - power_or_limit(lo, 1.0 - a)) / (1.0 - a)
        };
        let mut out = vec![0.0; self.dim];
        for atom in &self.atoms {
            for (o, s) in out.iter_mut().zip(&atom.direction) {
                *o += atom.weight * s * radial;
            }
        }
        out
    }

    /// Shift `D` with `(0, Π_α, a)` ↔ `τ = a + D`.
    pub fn levy_khintchine_shift(&self) -> Vec<f64> {
        let a = self.alpha;
        let factor = if is_alpha_one(a) {
            1.0 - EULER_GAMMA
        } else if a > 1.0 {
            1.0 / (a - 1.0)
        } else {
            -1.0 / (1.0 - a)
        };
        let mut out = vec![0.0; self.dim];
        for atom in &self.atoms {
            for (o, s) in out.iter_mut().zip(&atom.direction) {
                *o += atom.weight * s * factor;
            }
        }
        out
    }

    /// Drift `a` of the generating triplet, i.e. `τ - D`.
    pub fn triplet_drift(&self) -> Vec<f64> {
        self.shift
            .iter()
            .zip(self.levy_khintchine_shift())
            .map(|(t, d)| t - d)
            .collect()
    }

    pub(crate) fn sampler(&self) -> StableSampler {
        StableSampler::new(self)
    }

    /// Draws marks of a Poisson process with intensity `Leb × Π_α` on
    /// `(0, horizon) × {lo < |x| <= hi}`; returned unsorted as
    /// `(time, mark)` with marks flattened.
    pub(crate) fn sample_jumps<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
        horizon: f64,
        lo: f64,
        hi: f64,
        times: &mut Vec<f64>,
        marks: &mut Vec<f64>,
    ) {
        let a = self.alpha;
        let lo_t = lo.powf(-a);
        let hi_t = if hi.is_infinite() { 0.0 } else { hi.powf(-a) };
        let total = self.total_weight();
        let mean = horizon * total / a * (lo_t - hi_t);
        let count = if mean > 0.0 {
            Poisson::new(mean).expect("finite positive mean").sample(rng) as usize
        } else {
            0
        };
        let cumulative: Vec<f64> = self
            .atoms
            .iter()
            .scan(0.0, |acc, atom| {
                *acc += atom.weight / total;
                Some(*acc)
            })
            .collect();
        times.reserve(count);
        marks.reserve(count * self.dim);
        for _ in 0..count {
            let t: f64 = Open01.sample(rng);
            let pick: f64 = rng.random();
            let atom_idx = cumulative
                .iter()
                .position(|&c| pick < c)
                .unwrap_or(self.atoms.len() - 1);
            let r = loop {
                let u: f64 = Open01.sample(rng);
                let r = (hi_t + u * (lo_t - hi_t)).powf(-1.0 / a);
                if r > lo && r <= hi {
                    break r;
                }
            };
            times.push(horizon * t);
            marks.extend(self.atoms[atom_idx].direction.iter().map(|s| r * s));
        }
    }
}

fn power_or_limit(x: f64, exponent: f64) -> f64 {
    if x.is_infinite() {
        if exponent < 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else if x == 0.0 {
        if exponent > 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        x.powf(exponent)
    }
}

fn same_direction(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= 1e-12)
}

/// Characteristic function `E exp(i⟨u, ζ⟩)`.
pub fn stable_cf(law: &StableLaw, u: &[f64]) -> Result<Complex64> {
    if u.len() != law.dim {
        return Err(Error::DimensionMismatch {
            expected: law.dim,
            got: u.len(),
        });
    }
    ensure(u.iter().all(|v| v.is_finite()), "u", "must be finite")?;
    let alpha = law.alpha;
    let k = correspondence_constant(alpha);
    let mut exponent = Complex64::new(0.0, 0.0);
    for atom in &law.atoms {
        let v: f64 = atom.direction.iter().zip(u).map(|(s, x)| s * x).sum();
        if v == 0.0 || atom.weight == 0.0 {
            continue;
        }
        let lambda1 = k * atom.weight;
        let av = v.abs();
        let term = if is_alpha_one(alpha) {
            Complex64::new(av, v.signum() * av * 2.0 / PI * av.ln())
        } else {
            let m = av.powf(alpha);
            Complex64::new(m, -m * (PI * alpha / 2.0).tan() * v.signum())
        };
        exponent -= lambda1 * term;
    }
    let drift: f64 = law.shift.iter().zip(u).map(|(t, x)| t * x).sum();
    exponent += Complex64::new(0.0, drift);
    Ok(exponent.exp())
}

/// Chambers–Mallows–Stuck sampler for `S_α(σ, β, μ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cms {
    pub alpha: f64,
    pub beta: f64,
    pub scale: f64,
    pub loc: f64,
}

impl Cms {
    /// Transform of a uniform angle `u ∈ (0,1)` and a unit exponential `w`.
    pub fn transform(&self, u: f64, w: f64) -> f64 {
        let (a, b) = (self.alpha, self.beta);
        let v = PI * (u - 0.5);
        if is_alpha_one(a) {
            let h = FRAC_PI_2 + b * v;
            let x = (h * v.tan() - b * (FRAC_PI_2 * w * v.cos() / h).ln()) / FRAC_PI_2;
            self.scale * x + b * self.scale * self.scale.ln() / FRAC_PI_2 + self.loc
        } else {
            let t = b * (PI * a / 2.0).tan();
            let shift = t.atan() / a;
            let s = (1.0 + t * t).powf(1.0 / (2.0 * a));
            let x = s * (a * (v + shift)).sin() / v.cos().powf(1.0 / a)
                * ((v - a * (v + shift)).cos() / w).powf((1.0 - a) / a);
            self.scale * x + self.loc
        }
    }
}

impl Distribution<f64> for Cms {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = Open01.sample(rng);
        let w: f64 = Exp1.sample(rng);
        self.transform(u, w)
    }
}

/// Per-law sampler: a single CMS draw in one dimension, otherwise a sum of
/// totally skewed draws along the spectral directions.
#[derive(Debug, Clone)]
pub(crate) struct StableSampler {
    dim: usize,
    shift: Vec<f64>,
    parts: Vec<(Vec<f64>, Cms)>,
}

impl StableSampler {
    fn new(law: &StableLaw) -> Self {
        let k = correspondence_constant(law.alpha);
        let parts = if law.dim == 1 {
            let (scale, beta, _) = law.one_dim_parameters().expect("one-dimensional");
            vec![(
                vec![1.0],
                Cms {
                    alpha: law.alpha,
                    beta,
                    scale,
                    loc: 0.0,
                },
            )]
        } else {
            law.atoms
                .iter()
                .filter(|a| a.weight > 0.0)
                .map(|a| {
                    (
                        a.direction.clone(),
                        Cms {
                            alpha: law.alpha,
                            beta: 1.0,
                            scale: (k * a.weight).powf(1.0 / law.alpha),
                            loc: 0.0,
                        },
                    )
                })
                .collect()
        };
        Self {
            dim: law.dim,
            shift: law.shift.clone(),
            parts,
        }
    }

    /// Deterministic draw from two uniforms per spectral part.
    pub(crate) fn draw_with(&self, u: &[f64], out: &mut [f64]) {
        out.copy_from_slice(&self.shift);
        for (k, (dir, cms)) in self.parts.iter().enumerate() {
            let x = cms.transform(u[2 * k], -u[2 * k + 1].ln());
            for (o, s) in out.iter_mut().zip(dir) {
                *o += x * s;
            }
        }
    }

    pub(crate) fn sample_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.dim);
        out.copy_from_slice(&self.shift);
        for (dir, cms) in &self.parts {
            let x = cms.sample(rng);
            for (o, s) in out.iter_mut().zip(dir) {
                *o += x * s;
            }
        }
    }
}

/// `count` i.i.d. draws, flattened row-major (`count × dim`).
pub fn sample_stable(law: &StableLaw, count: usize, seed: u64) -> Result<Vec<f64>> {
    ensure(count >= 1, "count", "must be at least 1")?;
    let sampler = law.sampler();
    let mut rng = SeedStream::new(seed).rng();
    let mut out = vec![0.0; count * law.dim];
    for row in out.chunks_exact_mut(law.dim) {
        sampler.sample_into(&mut rng, row);
    }
    Ok(out)
}

/// `Π_α({|x| > radius, x/|x| ∈ sector})`.
pub fn levy_tail_mass(law: &StableLaw, radius: f64, sector: Option<&[usize]>) -> Result<f64> {
    law.tail_mass(radius, sector)
}

/// `α/(order - α) · ε^{order-α}`, the limit of
/// `n b_n^{-order} E(|Z₁|^order I(|Z₁| <= ε b_n))` under regular variation.
pub fn karamata_truncated_moment_limit(alpha: f64, order: u32, epsilon: f64) -> Result<f64> {
    ensure(epsilon > 0.0, "epsilon", "must be positive")?;
    ensure(
        order == 1 || order == 2,
        "order",
        format!("must be 1 or 2, got {order}"),
    )?;
    let o = f64::from(order);
    ensure(
        alpha > 0.0 && alpha < o,
        "alpha",
        format!("order {order} needs 0 < alpha < {order}, got {alpha}"),
    )?;
    Ok(alpha / (o - alpha) * epsilon.powf(o - alpha))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Compensation {
    DriftCompensated,
    Dropped,
}

/// How small jumps are handled by [`simulate_levy_path`].
///
/// Jumps above `epsilon_cut` form the compound-Poisson part. Each further
/// level adds the shell `(ε_k, ε_{k-1}]` with `ε_k = epsilon_cut · 2^{-k}`,
/// so the finest simulated radius is `epsilon_cut · 2^{-(levels-1)}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevySmallJumpPolicy {
    pub epsilon_cut: f64,
    pub compensation: Compensation,
    pub refinement_levels: u32,
}

impl LevySmallJumpPolicy {
    pub fn new(epsilon_cut: f64, compensation: Compensation, refinement_levels: u32) -> Result<Self> {
        let p = Self {
            epsilon_cut,
            compensation,
            refinement_levels,
        };
        p.validate()?;
        Ok(p)
    }

    /// Deepest refinement whose expected jump count over `horizon` stays
    /// within `budget`.
    pub fn with_jump_budget(law: &StableLaw, horizon: f64, epsilon_cut: f64, budget: f64) -> Result<Self> {
        let mut levels = 1u32;
        while levels < 60 {
            let finer = epsilon_cut * 0.5f64.powi(levels as i32);
            if horizon * law.tail_mass(finer, None)? > budget {
                break;
            }
            levels += 1;
        }
        Self::new(epsilon_cut, Compensation::DriftCompensated, levels)
    }

    pub fn validate(&self) -> Result<()> {
        ensure(
            self.epsilon_cut > 0.0 && self.epsilon_cut <= 1.0,
            "epsilon_cut",
            format!("must lie in (0, 1], got {}", self.epsilon_cut),
        )?;
        ensure(
            self.refinement_levels >= 1,
            "refinement_levels",
            "must be a positive integer",
        )
    }

    pub fn finest_radius(&self) -> f64 {
        self.epsilon_cut * 0.5f64.powi(self.refinement_levels as i32 - 1)
    }
}

/// Simulates the Lévy process whose time-one law is `law` on `[0, horizon]`.
///
/// Jumps above the cut are exactly
/// `sample_poisson_pattern(law, horizon, cut, SeedStream::new(seed).child(0).seed())`;
/// refinement shell `k` draws from `child(k)`. With drift compensation the
/// path is `a t + Σ jumps - t ∫_{ε_min<|x|<=1} x Π(dx)` where `a` is the
/// triplet drift; `Dropped` (only for `α < 1`) uses `τ t + Σ jumps`.
pub fn simulate_levy_path(
    law: &StableLaw,
    horizon: f64,
    policy: &LevySmallJumpPolicy,
    seed: u64,
) -> Result<CadlagPath> {
    ensure(
        horizon > 0.0 && horizon.is_finite(),
        "horizon",
        "must be positive and finite",
    )?;
    policy.validate()?;
    let stream = SeedStream::new(seed);
    let mut times = Vec::new();
    let mut marks = Vec::new();
    law.sample_jumps(
        &mut stream.child(0).rng(),
        horizon,
        policy.epsilon_cut,
        f64::INFINITY,
        &mut times,
        &mut marks,
    );
    let mut hi = policy.epsilon_cut;
    for k in 1..policy.refinement_levels {
        let lo = hi / 2.0;
        law.sample_jumps(
            &mut stream.child(u64::from(k)).rng(),
            horizon,
            lo,
            hi,
            &mut times,
            &mut marks,
        );
        hi = lo;
    }
    let slope = match policy.compensation {
        Compensation::DriftCompensated => {
            let comp = law.truncated_first_moment(policy.finest_radius(), 1.0);
            law.triplet_drift().iter().zip(comp).map(|(a, c)| a - c).collect()
        }
        Compensation::Dropped => {
            ensure(
                law.alpha < 1.0,
                "compensation",
                "small jumps may only be dropped when alpha < 1",
            )?;
            law.shift.clone()
        }
    };
    CadlagPath::from_jumps(horizon, vec![0.0; law.dim], slope, &times, &marks)
}
