//! Experiment configuration: JSON schema, parsing and validation.

use std::fmt;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::diagnostics::{BlockSchedule, MAX_EXIN_N, MIN_POISSON_COUNTS};
use crate::models::SequenceModel;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    SamplerCalibration,
    MaximaLimit,
    PoissonCounts,
    LdDiagnostics,
    SmallJump,
    ExtremalIndex,
    MarginalStable,
    SkorohodFuzz,
    ExinIdentity,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 9] = [
        ExperimentKind::SamplerCalibration,
        ExperimentKind::MaximaLimit,
        ExperimentKind::PoissonCounts,
        ExperimentKind::LdDiagnostics,
        ExperimentKind::SmallJump,
        ExperimentKind::ExtremalIndex,
        ExperimentKind::MarginalStable,
        ExperimentKind::SkorohodFuzz,
        ExperimentKind::ExinIdentity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::SamplerCalibration => "sampler-calibration",
            ExperimentKind::MaximaLimit => "maxima-limit",
            ExperimentKind::PoissonCounts => "poisson-counts",
            ExperimentKind::LdDiagnostics => "ld-diagnostics",
            ExperimentKind::SmallJump => "small-jump",
            ExperimentKind::ExtremalIndex => "extremal-index",
            ExperimentKind::MarginalStable => "marginal-stable",
            ExperimentKind::SkorohodFuzz => "skorohod-fuzz",
            ExperimentKind::ExinIdentity => "exin-identity",
        }
    }

    /// Grid axes read by this kind; other axes are ignored.
    pub fn axes(self) -> &'static [&'static str] {
        match self {
            ExperimentKind::SamplerCalibration => &["epsilon"],
            ExperimentKind::MaximaLimit => &["n", "epsilon", "t"],
            ExperimentKind::PoissonCounts => &["n", "epsilon"],
            ExperimentKind::LdDiagnostics => &["n", "epsilon", "k", "j"],
            ExperimentKind::SmallJump => &["n", "epsilon", "delta"],
            ExperimentKind::ExtremalIndex => &["n", "epsilon"],
            ExperimentKind::MarginalStable => &["n"],
            ExperimentKind::SkorohodFuzz => &[],
            ExperimentKind::ExinIdentity => &["n", "pi"],
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ParameterGrid {
    pub n: Vec<usize>,
    pub epsilon: Vec<f64>,
    pub t: Vec<f64>,
    pub delta: Vec<f64>,
    pub k: Vec<usize>,
    pub j: Vec<usize>,
    /// Exceedance probabilities for the exact first-passage check.
    pub pi: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub kind: ExperimentKind,
    pub model: SequenceModel,
    #[serde(default)]
    pub grid: ParameterGrid,
    pub replications: usize,
    pub seed: u64,
    pub output_dir: PathBuf,
    #[serde(default)]
    pub schedule: BlockSchedule,
}

fn config_error(path: impl Into<String>, message: impl Into<String>) -> HarnessError {
    HarnessError::Config {
        path: path.into(),
        message: message.into(),
    }
}

fn check_each<T: Copy + fmt::Display>(
    axis: &str,
    values: &[T],
    ok: impl Fn(T) -> bool,
    requirement: &str,
) -> Result<(), HarnessError> {
    match values.iter().position(|&v| !ok(v)) {
        Some(i) => Err(config_error(
            format!("grid.{axis}[{i}]"),
            format!("{requirement}, got {}", values[i]),
        )),
        None => Ok(()),
    }
}

impl ExperimentConfig {
    /// Parses JSON; errors carry the path to the offending field.
    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let config: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            config_error(path, e.into_inner().to_string())
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes") + "\n"
    }

    /// Semantic checks beyond the schema.
    pub fn validate(&self) -> Result<(), HarnessError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(config_error(
                "schema_version",
                format!("unsupported version {}, expected {SCHEMA_VERSION}", self.schema_version),
            ));
        }
        self.model
            .validate()
            .map_err(|e| config_error("model", e.to_string()))?;
        if self.replications == 0 {
            return Err(config_error("replications", "must be at least 1"));
        }
        let kind = self.kind;
        let min_reps = match kind {
            ExperimentKind::PoissonCounts => MIN_POISSON_COUNTS,
            ExperimentKind::SamplerCalibration | ExperimentKind::MarginalStable => 2,
            _ => 1,
        };
        if self.replications < min_reps {
            return Err(config_error(
                "replications",
                format!("{kind} needs at least {min_reps}, got {}", self.replications),
            ));
        }
        let g = &self.grid;
        let max_n = if kind == ExperimentKind::ExinIdentity {
            MAX_EXIN_N
        } else {
            usize::MAX
        };
        check_each("n", &g.n, |n| n >= 1 && n <= max_n, &format!("must lie in 1..={max_n}"))?;
        let epsilon_max = if kind == ExperimentKind::SamplerCalibration {
            1.0
        } else {
            f64::INFINITY
        };
        check_each(
            "epsilon",
            &g.epsilon,
            |e| e > 0.0 && e <= epsilon_max,
            &format!("must lie in (0, {epsilon_max}]"),
        )?;
        check_each(
            "t",
            &g.t,
            |t| t >= 0.0 && t.is_finite(),
            "must be nonnegative and finite",
        )?;
        if kind == ExperimentKind::MaximaLimit {
            check_each("t", &g.t, |t| t > 0.0, "must be positive for conditional curves")?;
        }
        check_each("delta", &g.delta, |d| d > 0.0 && d.is_finite(), "must be positive")?;
        check_each("k", &g.k, |k| k >= 2, "must be at least 2")?;
        check_each("j", &g.j, |j| j >= 2, "must be at least 2")?;
        check_each("pi", &g.pi, |p| p > 0.0 && p < 1.0, "must lie in (0, 1)")?;
        if let BlockSchedule::Fixed { r, .. } = self.schedule {
            if r == 0 {
                return Err(config_error("schedule.r", "must be at least 1"));
            }
        }
        Ok(())
    }
}
