//! Ready-made configurations, one per experiment kind, sized to finish in
//! seconds.

use std::path::PathBuf;

use super::config::{ExperimentConfig, ExperimentKind, ParameterGrid, SCHEMA_VERSION};
use crate::diagnostics::BlockSchedule;
use crate::models::{Innovation, SequenceModel};

#[derive(Debug, Clone)]
pub struct CannedExperiment {
    pub name: &'static str,
    pub description: &'static str,
    pub config: ExperimentConfig,
}

const SEED: u64 = 20_240_601;

fn iid(alpha: f64, p: f64) -> SequenceModel {
    SequenceModel::IidPareto { alpha, p }
}

fn ma11() -> SequenceModel {
    SequenceModel::MovingAverage {
        coefficients: vec![1.0, 1.0],
        innovation: Innovation::Pareto { alpha: 1.5, p: 1.0 },
    }
}

fn canned(
    kind: ExperimentKind,
    description: &'static str,
    model: SequenceModel,
    grid: ParameterGrid,
    replications: usize,
) -> CannedExperiment {
    CannedExperiment {
        name: kind.name(),
        description,
        config: ExperimentConfig {
            schema_version: SCHEMA_VERSION,
            kind,
            model,
            grid,
            replications,
            seed: SEED,
            output_dir: PathBuf::from("out").join(kind.name()),
            schedule: BlockSchedule::default(),
        },
    }
}

pub fn canned_experiments() -> Vec<CannedExperiment> {
    use ExperimentKind::*;
    vec![
        canned(
            SamplerCalibration,
            "KS distance between direct stable draws and truncated Levy paths at time one",
            iid(1.5, 0.5),
            ParameterGrid {
                epsilon: vec![0.1, 0.01],
                ..Default::default()
            },
            5_000,
        ),
        canned(
            MaximaLimit,
            "Maxima distribution and conditional exceedance curve against the Poisson limit",
            iid(1.5, 0.5),
            ParameterGrid {
                n: vec![10_000],
                epsilon: vec![1.0],
                t: vec![0.25, 0.5, 1.0, 2.0],
                ..Default::default()
            },
            1_000,
        ),
        canned(
            PoissonCounts,
            "Dispersion and chi-square fit of exceedance counts to a Poisson law",
            iid(1.5, 0.5),
            ParameterGrid {
                n: vec![1_000],
                epsilon: vec![1.0],
                ..Default::default()
            },
            2_000,
        ),
        canned(
            LdDiagnostics,
            "Local dependence, D' and Watson conditions on a clustering moving average",
            ma11(),
            ParameterGrid {
                n: vec![1_000],
                epsilon: vec![1.0],
                k: vec![5, 10, 20],
                j: vec![2, 3],
                ..Default::default()
            },
            200,
        ),
        canned(
            SmallJump,
            "Small-jump maximal deviation against the maximal-inequality bound",
            iid(0.5, 1.0),
            ParameterGrid {
                n: vec![10_000],
                epsilon: vec![0.1, 0.03, 0.01],
                delta: vec![0.5],
                ..Default::default()
            },
            500,
        ),
        canned(
            ExtremalIndex,
            "Blocks estimate of the extremal index of a clustering moving average",
            ma11(),
            ParameterGrid {
                n: vec![10_000],
                epsilon: vec![1.0],
                ..Default::default()
            },
            10,
        ),
        canned(
            MarginalStable,
            "KS test of the normalized partial sum at time one against its stable limit",
            iid(1.5, 0.5),
            ParameterGrid {
                n: vec![1_000],
                ..Default::default()
            },
            2_000,
        ),
        canned(
            SkorohodFuzz,
            "Metric properties of the J1 distance on random step paths",
            iid(1.5, 0.5),
            ParameterGrid::default(),
            1_000,
        ),
        canned(
            ExinIdentity,
            "Exact first-passage identity by enumeration",
            iid(1.5, 0.5),
            ParameterGrid {
                n: vec![4, 8, 12],
                pi: vec![0.1, 0.25, 0.5],
                ..Default::default()
            },
            1,
        ),
    ]
}
