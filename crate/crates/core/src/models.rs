//! Stationary heavy-tailed sequence models.

use rand::distr::{Distribution, Open01};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{ensure, Result};
use crate::rng::SeedStream;
use crate::stable::{SpectralAtom, StableLaw, StableSampler};

/// Marginal law of an i.i.d. building block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Innovation {
    /// `P(|ξ| > x) = x^{-α}` for `x >= 1`, sign `+1` with probability `p`.
    Pareto {
        alpha: f64,
        p: f64,
    },
    Stable {
        law: StableLaw,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SequenceModel {
    IidPareto {
        alpha: f64,
        p: f64,
    },
    IidStable {
        law: StableLaw,
    },
    /// `Z_j = Σ_{i=0}^{m} c_i ξ_{j-i}`.
    MovingAverage {
        coefficients: Vec<f64>,
        innovation: Innovation,
    },
}

impl Innovation {
    fn validate(&self) -> Result<()> {
        match self {
            Innovation::Pareto { alpha, p } => {
                ensure(
                    *alpha > 0.0 && *alpha < 2.0,
                    "alpha",
                    format!("must lie in (0, 2), got {alpha}"),
                )?;
                ensure((0.0..=1.0).contains(p), "p", format!("must lie in [0, 1], got {p}"))
            }
            Innovation::Stable { .. } => Ok(()),
        }
    }

    fn alpha(&self) -> f64 {
        match self {
            Innovation::Pareto { alpha, .. } => *alpha,
            Innovation::Stable { law } => law.alpha(),
        }
    }

    fn dim(&self) -> usize {
        match self {
            Innovation::Pareto { .. } => 1,
            Innovation::Stable { law } => law.dim(),
        }
    }

    /// Limit of `x^α P(|ξ| > x)` with the directional split.
    fn tail_atoms(&self) -> Vec<SpectralAtom> {
        match self {
            Innovation::Pareto { p, .. } => {
                vec![SpectralAtom::new(vec![1.0], *p), SpectralAtom::new(vec![-1.0], 1.0 - p)]
            }
            Innovation::Stable { law } => law
                .atoms()
                .iter()
                .map(|a| SpectralAtom::new(a.direction.clone(), a.weight / law.alpha()))
                .collect(),
        }
    }

    fn is_symmetric(&self) -> bool {
        match self {
            Innovation::Pareto { p, .. } => *p == 0.5,
            Innovation::Stable { law } => law.is_symmetric(),
        }
    }
}

impl SequenceModel {
    pub fn iid_pareto(alpha: f64, p: f64) -> Result<Self> {
        let m = SequenceModel::IidPareto { alpha, p };
        m.validate()?;
        Ok(m)
    }

    pub fn moving_average(coefficients: Vec<f64>, innovation: Innovation) -> Result<Self> {
        let m = SequenceModel::MovingAverage {
            coefficients,
            innovation,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            SequenceModel::IidPareto { alpha, p } => Innovation::Pareto { alpha: *alpha, p: *p }.validate(),
            SequenceModel::IidStable { .. } => Ok(()),
            SequenceModel::MovingAverage {
                coefficients,
                innovation,
            } => {
                innovation.validate()?;
                ensure(
                    coefficients.len() >= 2,
                    "coefficients",
                    "a moving average needs order m >= 1",
                )?;
                ensure(
                    coefficients.iter().all(|c| c.is_finite()),
                    "coefficients",
                    "must be finite",
                )?;
                ensure(
                    coefficients.iter().filter(|&&c| c != 0.0).count() >= 2,
                    "coefficients",
                    "needs at least two nonzero coefficients",
                )
            }
        }
    }

    fn innovation(&self) -> Innovation {
        match self {
            SequenceModel::IidPareto { alpha, p } => Innovation::Pareto { alpha: *alpha, p: *p },
            SequenceModel::IidStable { law } => Innovation::Stable { law: law.clone() },
            SequenceModel::MovingAverage { innovation, .. } => innovation.clone(),
        }
    }

    fn coefficients(&self) -> Vec<f64> {
        match self {
            SequenceModel::MovingAverage { coefficients, .. } => coefficients.clone(),
            _ => vec![1.0],
        }
    }

    pub fn alpha(&self) -> f64 {
        self.innovation().alpha()
    }

    pub fn dim(&self) -> usize {
        self.innovation().dim()
    }

    /// Dependence range `m` (0 for i.i.d. models).
    pub fn order(&self) -> usize {
        self.coefficients().len() - 1
    }

    pub fn is_symmetric(&self) -> bool {
        self.innovation().is_symmetric()
    }
}

/// Stateful generator. Successive calls continue one realisation, so a
/// longer request under the same seed extends a shorter one.
pub struct SequenceGenerator {
    dim: usize,
    coefficients: Vec<f64>,
    source: Source,
    rng: ChaCha8Rng,
    /// Last `m + 1` innovations, oldest first, flattened.
    window: Vec<f64>,
}

enum Source {
    Pareto { inv_alpha: f64, p: f64 },
    Stable(StableSampler),
}

impl Source {
    #[inline]
    fn draw(&self, rng: &mut ChaCha8Rng, out: &mut [f64]) {
        match self {
            Source::Pareto { inv_alpha, p } => {
                let u: f64 = Open01.sample(rng);
                let s: f64 = rng.random();
                let r = pareto_radius(u, *inv_alpha);
                out[0] = if s < *p { r } else { -r };
            }
            Source::Stable(sampler) => sampler.sample_into(rng, out),
        }
    }
}

#[inline]
fn pareto_radius(u: f64, inv_alpha: f64) -> f64 {
    if inv_alpha == 2.0 {
        1.0 / (u * u)
    } else if inv_alpha == 2.0 / 3.0 {
        1.0 / (u * u).cbrt()
    } else if inv_alpha == 1.0 {
        1.0 / u
    } else {
        u.powf(-inv_alpha)
    }
}

impl SequenceGenerator {
    pub fn new(model: &SequenceModel, seed: u64) -> Result<Self> {
        model.validate()?;
        let dim = model.dim();
        let coefficients = model.coefficients();
        let source = match model.innovation() {
            Innovation::Pareto { alpha, p } => Source::Pareto {
                inv_alpha: 1.0 / alpha,
                p,
            },
            Innovation::Stable { law } => Source::Stable(law.sampler()),
        };
        let mut rng = SeedStream::new(seed).rng();
        let m = coefficients.len() - 1;
        let mut window = vec![0.0; (m + 1) * dim];
        // burn-in: ξ_{1-m}, ..., ξ_0
        for k in 1..=m {
            source.draw(&mut rng, &mut window[k * dim..(k + 1) * dim]);
        }
        Ok(Self {
            dim,
            coefficients,
            source,
            rng,
            window,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Writes the next `out.len() / dim` observations.
    pub fn fill(&mut self, out: &mut [f64]) {
        let d = self.dim;
        if self.coefficients.len() == 1 {
            let c = self.coefficients[0];
            for row in out.chunks_exact_mut(d) {
                self.source.draw(&mut self.rng, row);
                if c != 1.0 {
                    row.iter_mut().for_each(|v| *v *= c);
                }
            }
            return;
        }
        let m = self.coefficients.len() - 1;
        for row in out.chunks_exact_mut(d) {
            self.window.copy_within(d.., 0);
            let newest = m * d;
            self.source.draw(&mut self.rng, &mut self.window[newest..newest + d]);
            row.iter_mut().for_each(|v| *v = 0.0);
            // window holds ξ_{j-m}..ξ_j; coefficient c_i multiplies ξ_{j-i}
            for (i, c) in self.coefficients.iter().enumerate() {
                let xi = &self.window[(m - i) * d..(m - i + 1) * d];
                for (o, x) in row.iter_mut().zip(xi) {
                    *o += c * x;
                }
            }
        }
    }
}

/// `Z_1, …, Z_n` flattened row-major (`n × dim`).
pub fn generate(model: &SequenceModel, length: usize, seed: u64) -> Result<Vec<f64>> {
    ensure(length >= 1, "length", "must be at least 1")?;
    let mut g = SequenceGenerator::new(model, seed)?;
    let mut out = vec![0.0; length * g.dim()];
    g.fill(&mut out);
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailConstants {
    pub alpha: f64,
    /// `lim x^α P(|Z_1| > x)`.
    pub tail_scale: f64,
    /// `(p, q)` for one-dimensional models.
    pub balance: Option<(f64, f64)>,
    /// Directional split of `tail_scale`.
    pub spectral: Vec<SpectralAtom>,
    /// `|c_i|^α ×` innovation tail scale, one entry per coefficient.
    pub contributions: Vec<f64>,
    /// True when `P(|Z_1| > x) = tail_scale x^{-α}` exactly for `x >= 1`.
    pub exact: bool,
}

impl TailConstants {
    /// Unit-tail law of the time-one value of the limiting Lévy process,
    /// whose generating triplet has zero drift.
    pub fn limit_law(&self) -> Result<StableLaw> {
        let atoms: Vec<SpectralAtom> = self.spectral.iter().filter(|a| a.weight > 0.0).cloned().collect();
        let total: f64 = atoms.iter().map(|a| a.weight).sum();
        let scaled = atoms
            .into_iter()
            .map(|a| SpectralAtom::new(a.direction, a.weight / total * self.alpha))
            .collect();
        let dim = self.spectral[0].direction.len();
        StableLaw::from_levy_triplet(self.alpha, scaled, vec![0.0; dim])
    }
}

/// Tail index, tail scale and balance; moving averages combine their
/// coefficients by the single-big-jump rule
/// `P(|Σ c_i ξ_i| > x) ~ Σ |c_i|^α P(|ξ| > x)`.
pub fn tail_constants(model: &SequenceModel) -> Result<TailConstants> {
    model.validate()?;
    let innovation = model.innovation();
    let alpha = innovation.alpha();
    let atoms = innovation.tail_atoms();
    let innovation_scale: f64 = atoms.iter().map(|a| a.weight).sum();
    let coefficients = model.coefficients();
    let mut spectral: Vec<SpectralAtom> = Vec::new();
    let mut contributions = Vec::with_capacity(coefficients.len());
    for &c in &coefficients {
        let w = c.abs().powf(alpha);
        contributions.push(w * innovation_scale);
        if c == 0.0 {
            continue;
        }
        for a in &atoms {
            let dir: Vec<f64> = a.direction.iter().map(|s| s * c.signum()).collect();
            match spectral.iter_mut().find(|b| b.direction == dir) {
                Some(b) => b.weight += w * a.weight,
                None => spectral.push(SpectralAtom::new(dir, w * a.weight)),
            }
        }
    }
    let tail_scale: f64 = contributions.iter().sum();
    let balance = (model.dim() == 1).then(|| {
        let p: f64 = spectral
            .iter()
            .filter(|a| a.direction[0] > 0.0)
            .map(|a| a.weight)
            .sum::<f64>()
            / tail_scale;
        (p, 1.0 - p)
    });
    let exact = matches!(model, SequenceModel::IidPareto { .. });
    Ok(TailConstants {
        alpha,
        tail_scale,
        balance,
        spectral,
        contributions,
        exact,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Normalizer {
    pub value: f64,
    /// Set when only the asymptotic tail constant is known.
    pub asymptotic: bool,
}

/// `b_n` with `n P(|Z_1| > b_n) = 1`, i.e. `(n · tail_scale)^{1/α}`.
pub fn normalizer_bn(model: &SequenceModel, n: usize) -> Result<Normalizer> {
    ensure(n >= 1, "n", "must be at least 1")?;
    let tc = tail_constants(model)?;
    let value = (n as f64 * tc.tail_scale).powf(1.0 / tc.alpha);
    if tc.exact {
        ensure(value >= 1.0, "n", format!("b_n = {value} falls below the Pareto cut 1"))?;
    }
    Ok(Normalizer {
        value,
        asymptotic: !tc.exact,
    })
}

/// Number of quasi-random points used when the truncated mean has no
/// closed form.
const QUASI_MC_POINTS: usize = 1 << 18;

/// `c_n = (n / b_n) E(Z_1 I(|Z_1| <= b_n))`.
pub fn centering_cn(model: &SequenceModel, n: usize) -> Result<Vec<f64>> {
    let b = normalizer_bn(model, n)?.value;
    let scale = n as f64 / b;
    Ok(truncated_mean(model, b)?.into_iter().map(|v| v * scale).collect())
}

/// `E(Z_1 I(|Z_1| <= level))`: closed form for i.i.d. Pareto models, zero
/// for symmetric models, a quasi-Monte Carlo rule otherwise.
pub fn truncated_mean(model: &SequenceModel, level: f64) -> Result<Vec<f64>> {
    model.validate()?;
    ensure(level > 0.0, "level", "must be positive")?;
    let dim = model.dim();
    if model.is_symmetric() {
        return Ok(vec![0.0; dim]);
    }
    if let SequenceModel::IidPareto { alpha, p } = model {
        if level < 1.0 {
            return Ok(vec![0.0]);
        }
        let imbalance = 2.0 * p - 1.0;
        let integral = if *alpha == 1.0 {
            level.ln()
        } else {
            alpha * (level.powf(1.0 - alpha) - 1.0) / (1.0 - alpha)
        };
        return Ok(vec![imbalance * integral]);
    }
    Ok(quasi_mc_truncated_mean(model, level))
}

/// `P(|Z_1| > x)`: exact for i.i.d. Pareto models, the tail asymptotic
/// `tail_scale · x^{-α}` (capped at 1) otherwise.
pub fn exceedance_probability(model: &SequenceModel, x: f64) -> Result<f64> {
    let tc = tail_constants(model)?;
    if x <= 0.0 {
        return Ok(1.0);
    }
    if tc.exact && x < 1.0 {
        return Ok(1.0);
    }
    Ok((tc.tail_scale * x.powf(-tc.alpha)).min(1.0))
}

/// `E(Z_1 I(|Z_1| <= b))` by a Halton rule over the innovations.
fn quasi_mc_truncated_mean(model: &SequenceModel, b: f64) -> Vec<f64> {
    let innovation = model.innovation();
    let coefficients = model.coefficients();
    let dim = innovation.dim();
    let per_innovation = match &innovation {
        Innovation::Pareto { .. } => 2,
        Innovation::Stable { law } => {
            if law.dim() == 1 {
                2
            } else {
                2 * law.atoms().len()
            }
        }
    };
    let dims = per_innovation * coefficients.len();
    let primes = first_primes(dims);
    let mut u = vec![0.0; dims];
    let mut z = vec![0.0; dim];
    let mut xi = vec![0.0; dim];
    let mut sum = vec![0.0; dim];
    for index in 1..=QUASI_MC_POINTS {
        for (k, &base) in primes.iter().enumerate() {
            u[k] = radical_inverse(index as u64, base);
        }
        z.iter_mut().for_each(|v| *v = 0.0);
        for (i, c) in coefficients.iter().enumerate() {
            let block = &u[i * per_innovation..(i + 1) * per_innovation];
            innovation_from_uniforms(&innovation, block, &mut xi);
            for (o, x) in z.iter_mut().zip(&xi) {
                *o += c * x;
            }
        }
        if crate::stats::norm(&z) <= b {
            for (s, v) in sum.iter_mut().zip(&z) {
                *s += v;
            }
        }
    }
    sum.into_iter().map(|s| s / QUASI_MC_POINTS as f64).collect()
}

fn innovation_from_uniforms(innovation: &Innovation, u: &[f64], out: &mut [f64]) {
    match innovation {
        Innovation::Pareto { alpha, p } => {
            let r = u[0].powf(-1.0 / alpha);
            out[0] = if u[1] < *p { r } else { -r };
        }
        Innovation::Stable { law } => law.sampler().draw_with(u, out),
    }
}

fn first_primes(count: usize) -> Vec<u64> {
    let mut primes = Vec::with_capacity(count);
    let mut candidate = 2u64;
    while primes.len() < count {
        if primes.iter().all(|p| !candidate.is_multiple_of(*p)) {
            primes.push(candidate);
        }
        candidate += 1;
    }
    primes
}

fn radical_inverse(mut index: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut factor = inv;
    let mut out = 0.0;
    while index > 0 {
        out += (index % base) as f64 * factor;
        index /= base;
        factor *= inv;
    }
    out
}

/// Analytic bounds on the mixing coefficients `φ₀(n)`, `φ₁(n)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum MixingProfile {
    Iid,
    MDependent {
        m: usize,
    },
    /// Values at lags `1, 2, …`; lags beyond the table reuse the last entry.
    Declared {
        phi0: Vec<f64>,
        phi1: Vec<f64>,
    },
}

impl MixingProfile {
    pub fn declared(phi0: Vec<f64>, phi1: Vec<f64>) -> Result<Self> {
        for (name, table) in [("phi0", &phi0), ("phi1", &phi1)] {
            ensure(!table.is_empty(), name, "table must not be empty")?;
            ensure(
                table.iter().all(|v| (0.0..=1.0).contains(v)),
                name,
                "values must lie in [0, 1]",
            )?;
            ensure(
                table.windows(2).all(|w| w[1] <= w[0]),
                name,
                "must be nonincreasing in the lag",
            )?;
        }
        Ok(MixingProfile::Declared { phi0, phi1 })
    }

    fn lookup(&self, lag: usize, pick_first: bool) -> f64 {
        match self {
            MixingProfile::Iid => 0.0,
            MixingProfile::MDependent { m } => {
                if lag > *m {
                    0.0
                } else {
                    1.0
                }
            }
            MixingProfile::Declared { phi0, phi1 } => {
                let table = if pick_first { phi0 } else { phi1 };
                let i = lag.max(1).min(table.len()) - 1;
                table[i]
            }
        }
    }

    /// Bound on `φ₀(lag)`; for m-dependent sequences 1 up to lag `m`.
    pub fn phi0(&self, lag: usize) -> f64 {
        self.lookup(lag, true)
    }

    pub fn phi1(&self, lag: usize) -> f64 {
        self.lookup(lag, false)
    }
}

pub fn mixing_profile(model: &SequenceModel) -> MixingProfile {
    match model.order() {
        0 => MixingProfile::Iid,
        m => MixingProfile::MDependent { m },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ma11() -> SequenceModel {
        SequenceModel::moving_average(vec![1.0, 1.0], Innovation::Pareto { alpha: 1.5, p: 1.0 }).unwrap()
    }

    #[test]
    fn pareto_support() {
        let m = SequenceModel::iid_pareto(1.5, 1.0).unwrap();
        let z = generate(&m, 5, 3).unwrap();
        assert_eq!(z.len(), 5);
        assert!(z.iter().all(|&v| v >= 1.0));
    }

    #[test]
    fn ma_dominates_innovation() {
        let innov = SequenceModel::iid_pareto(1.5, 1.0).unwrap();
        let z = generate(&ma11(), 100, 11).unwrap();
        // the generator draws the burn-in innovation first, so ξ_j is the
        // (j+1)-th draw of the same stream
        let xi = generate(&innov, 101, 11).unwrap();
        for j in 0..100 {
            assert!(z[j] >= xi[j + 1]);
            assert_eq!(z[j], xi[j + 1] + xi[j]);
        }
    }

    #[test]
    fn prefix_consistency() {
        let long = generate(&ma11(), 50, 4).unwrap();
        let short = generate(&ma11(), 20, 4).unwrap();
        assert_eq!(&long[..20], &short[..]);
    }

    #[test]
    fn normalizers() {
        let m = SequenceModel::iid_pareto(1.0, 0.5).unwrap();
        assert_eq!(normalizer_bn(&m, 100).unwrap().value, 100.0);
        let m = SequenceModel::iid_pareto(1.5, 0.5).unwrap();
        let b = normalizer_bn(&m, 1_000_000).unwrap();
        assert!((b.value - 1e4).abs() < 1e-8 && !b.asymptotic);
        let b = normalizer_bn(&ma11(), 1000).unwrap();
        assert!((b.value - 2000f64.powf(1.0 / 1.5)).abs() < 1e-9 && b.asymptotic);
        assert!(normalizer_bn(&m, 0).is_err());
    }

    #[test]
    fn tail_constant_examples() {
        let tc = tail_constants(&SequenceModel::iid_pareto(1.5, 0.7).unwrap()).unwrap();
        assert_eq!(tc.tail_scale, 1.0);
        let (p, q) = tc.balance.unwrap();
        assert!((p - 0.7).abs() < 1e-15 && (q - 0.3).abs() < 1e-15);
        let tc = tail_constants(&ma11()).unwrap();
        assert_eq!(tc.tail_scale, 2.0);
        assert_eq!(tc.balance.unwrap().0, 1.0);
        let m = SequenceModel::moving_average(vec![2.0, 1.0], Innovation::Pareto { alpha: 1.0, p: 1.0 }).unwrap();
        assert_eq!(tail_constants(&m).unwrap().tail_scale, 3.0);
        let signed = SequenceModel::moving_average(vec![1.0, -1.0], Innovation::Pareto { alpha: 1.5, p: 1.0 }).unwrap();
        assert_eq!(tail_constants(&signed).unwrap().balance.unwrap().0, 0.5);
    }

    #[test]
    fn centering_values() {
        let sym = SequenceModel::iid_pareto(1.5, 0.5).unwrap();
        assert_eq!(centering_cn(&sym, 1000).unwrap(), vec![0.0]);
        let law = StableLaw::symmetric(1.2).unwrap();
        assert_eq!(centering_cn(&SequenceModel::IidStable { law }, 10).unwrap(), vec![0.0]);
        let one = SequenceModel::iid_pareto(0.5, 1.0).unwrap();
        let n = 10_000usize;
        let b = 1e8;
        // (n/b) ∫_1^b x · 0.5 x^{-1.5} dx = (n/b) (sqrt(b) - 1)
        let expected = n as f64 / b * (b.sqrt() - 1.0);
        assert!((centering_cn(&one, n).unwrap()[0] - expected).abs() < 1e-12);
    }

    #[test]
    fn quasi_mc_matches_closed_form() {
        // an MA with a single effective term reduces to the i.i.d. integral
        let m = SequenceModel::MovingAverage {
            coefficients: vec![1.0, 0.0],
            innovation: Innovation::Pareto { alpha: 1.5, p: 0.8 },
        };
        let b = 50.0;
        let qmc = quasi_mc_truncated_mean(&m, b)[0];
        let exact = 0.6 * 1.5 * (b.powf(-0.5) - 1.0) / -0.5;
        assert!((qmc - exact).abs() < 2e-3 * exact.abs(), "{qmc} vs {exact}");
    }

    #[test]
    fn mixing_profiles() {
        assert_eq!(
            mixing_profile(&SequenceModel::iid_pareto(1.0, 0.5).unwrap()).phi0(1),
            0.0
        );
        let ma2 =
            SequenceModel::moving_average(vec![1.0, 0.5, 0.25], Innovation::Pareto { alpha: 1.0, p: 0.5 }).unwrap();
        let prof = mixing_profile(&ma2);
        assert_eq!(prof.phi0(3), 0.0);
        assert!(prof.phi0(2) <= 1.0);
        let declared = MixingProfile::declared(vec![0.5, 0.25], vec![0.4, 0.1]).unwrap();
        assert_eq!(declared.phi0(2), 0.25);
        assert_eq!(declared.phi1(7), 0.1);
        assert!(MixingProfile::declared(vec![0.1, 0.5], vec![0.1]).is_err());
    }

    #[test]
    fn model_validation() {
        assert!(SequenceModel::moving_average(vec![1.0], Innovation::Pareto { alpha: 1.0, p: 0.5 }).is_err());
        assert!(SequenceModel::moving_average(vec![1.0, 0.0, 0.0], Innovation::Pareto { alpha: 1.0, p: 0.5 }).is_err());
        assert!(SequenceModel::iid_pareto(1.0, -0.1).is_err());
    }
}
