//! Expansion of a configuration into tasks and their execution.

use std::path::PathBuf;

use super::config::{ExperimentConfig, ExperimentKind};
use super::fuzz::skorohod_fuzz;
use super::plot::{emit_plot_data, slug};
use super::{write_atomic, HarnessError};
use crate::diagnostics::{
    blocks_extremal_index, estimate_asneg, estimate_asneg2_curve, estimate_dprime, estimate_small_jump_sup,
    estimate_watson, exceedance_counts, exin_identity_check, gof_poisson, marginal_stable_test, maxima_cdf,
    DiagnosticsReport, Expectation, MARGINAL_TEST_CUT, MARGINAL_TEST_LEVEL, MIN_BLOCK_EXCEEDANCES,
};
use crate::error::Result;
use crate::models::{exceedance_probability, generate, normalizer_bn, tail_constants};
use crate::rng::{replicate, SeedStream};
use crate::stable::{sample_stable, simulate_levy_path, Compensation, LevySmallJumpPolicy};
use crate::stats::{ks_critical, ks_two_sample, mean_stderr};

/// Tolerance passed to the J1 distance by the fuzz experiment.
pub const FUZZ_TOL: f64 = 1e-4;
/// Accepted error of the exact first-passage identity.
const EXIN_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub reports: Vec<DiagnosticsReport>,
    pub report_files: Vec<PathBuf>,
    pub curve_files: Vec<PathBuf>,
}

#[derive(Debug, Clone, Copy)]
enum Task {
    Calibration { cut: f64 },
    Maxima { n: usize, epsilon: f64 },
    Counts { n: usize, epsilon: f64 },
    Dependence { n: usize, epsilon: f64 },
    SmallJump { n: usize, delta: f64 },
    Extremal { n: usize, epsilon: f64 },
    Marginal { n: usize },
    Fuzz,
    Exin { n: usize, pi: f64 },
}

fn pairs<A: Copy, B: Copy>(a: &[A], b: &[B]) -> Vec<(A, B)> {
    a.iter().flat_map(|&x| b.iter().map(move |&y| (x, y))).collect()
}

fn tasks(config: &ExperimentConfig) -> Vec<Task> {
    let g = &config.grid;
    match config.kind {
        ExperimentKind::SamplerCalibration => g.epsilon.iter().map(|&cut| Task::Calibration { cut }).collect(),
        ExperimentKind::MaximaLimit if g.t.is_empty() => Vec::new(),
        ExperimentKind::MaximaLimit => pairs(&g.n, &g.epsilon)
            .into_iter()
            .map(|(n, epsilon)| Task::Maxima { n, epsilon })
            .collect(),
        ExperimentKind::PoissonCounts => pairs(&g.n, &g.epsilon)
            .into_iter()
            .map(|(n, epsilon)| Task::Counts { n, epsilon })
            .collect(),
        ExperimentKind::LdDiagnostics => pairs(&g.n, &g.epsilon)
            .into_iter()
            .map(|(n, epsilon)| Task::Dependence { n, epsilon })
            .collect(),
        ExperimentKind::SmallJump if g.epsilon.is_empty() => Vec::new(),
        ExperimentKind::SmallJump => pairs(&g.n, &g.delta)
            .into_iter()
            .map(|(n, delta)| Task::SmallJump { n, delta })
            .collect(),
        ExperimentKind::ExtremalIndex => pairs(&g.n, &g.epsilon)
            .into_iter()
            .map(|(n, epsilon)| Task::Extremal { n, epsilon })
            .collect(),
        ExperimentKind::MarginalStable => g.n.iter().map(|&n| Task::Marginal { n }).collect(),
        ExperimentKind::SkorohodFuzz => vec![Task::Fuzz],
        ExperimentKind::ExinIdentity => pairs(&g.n, &g.pi)
            .into_iter()
            .map(|(n, pi)| Task::Exin { n, pi })
            .collect(),
    }
}

fn execute(config: &ExperimentConfig, task: Task, seed: u64) -> Result<Vec<DiagnosticsReport>> {
    let model = &config.model;
    let reps = config.replications;
    let g = &config.grid;
    match task {
        Task::Calibration { cut } => {
            let law = tail_constants(model)?.limit_law()?;
            let d = law.dim();
            let stream = SeedStream::new(seed);
            let direct: Vec<f64> = sample_stable(&law, reps, stream.tagged("direct").seed())?
                .into_iter()
                .step_by(d)
                .collect();
            let policy = LevySmallJumpPolicy::new(cut, Compensation::DriftCompensated, 1)?;
            let paths: Vec<f64> = replicate(reps, stream.tagged("levy"), |_, s| {
                Ok(simulate_levy_path(&law, 1.0, &policy, s.seed())?.value(1.0)[0])
            })
            .into_iter()
            .collect::<Result<_>>()?;
            let ks = ks_two_sample(&direct, &paths);
            let critical = ks_critical(MARGINAL_TEST_LEVEL, reps, reps);
            Ok(vec![DiagnosticsReport::new(
                "sampler-calibration",
                &[("cut", cut)],
                (ks, 0.0),
                reps,
                Some(Expectation::AtMost(critical)),
                seed,
            )])
        }
        Task::Maxima { n, epsilon } => {
            // one seed for the whole t grid: common random numbers
            let stream = SeedStream::new(seed);
            let mut out =
                g.t.iter()
                    .map(|&t| maxima_cdf(model, n, t, epsilon, reps, stream.child(0).seed()))
                    .collect::<Result<Vec<_>>>()?;
            out.extend(estimate_asneg2_curve(
                model,
                n,
                &g.t,
                epsilon,
                reps,
                stream.child(1).seed(),
            )?);
            Ok(out)
        }
        Task::Counts { n, epsilon } => {
            let counts = exceedance_counts(model, n, epsilon, reps, seed)?;
            let b = normalizer_bn(model, n)?.value;
            let mean = n as f64 * exceedance_probability(model, epsilon * b)?;
            let fit = gof_poisson(&counts, mean)?;
            let mean_count = counts.iter().sum::<u64>() as f64 / reps as f64;
            let se = (2.0 / (reps as f64 - 1.0)).sqrt();
            Ok(vec![DiagnosticsReport::new(
                "poisson-counts",
                &[
                    ("n", n as f64),
                    ("epsilon", epsilon),
                    ("expected_count", mean),
                    ("mean_count", mean_count),
                    ("chi2_p", fit.p_value),
                ],
                (fit.dispersion, se),
                reps,
                Some(Expectation::Equals(1.0)),
                seed,
            )])
        }
        Task::Dependence { n, epsilon } => {
            let mut out = vec![estimate_asneg(model, n, epsilon, &config.schedule, reps, seed)?];
            for &k in &g.k {
                out.push(estimate_dprime(model, n, k, epsilon, reps, seed)?);
            }
            for &j in &g.j {
                out.push(estimate_watson(model, n, j, epsilon, reps, seed)?);
            }
            Ok(out)
        }
        Task::SmallJump { n, delta } => g
            .epsilon
            .iter()
            .map(|&epsilon| estimate_small_jump_sup(model, n, epsilon, delta, reps, seed))
            .collect(),
        Task::Extremal { n, epsilon } => {
            let b = normalizer_bn(model, n)?.value;
            let threshold = epsilon * b;
            let block = ((n as f64).sqrt().floor() as usize).max(1);
            // room for about twice the minimum number of exceedances
            let wanted = 2.0 * MIN_BLOCK_EXCEEDANCES as f64 / exceedance_probability(model, threshold)?;
            let blocks = (wanted / block as f64).ceil().max(1.0) as usize;
            let len = blocks * block;
            let values: Vec<f64> = replicate(reps, SeedStream::new(seed), |_, s| {
                let z = generate(model, len, s.seed())?;
                let d = model.dim();
                let norms: Vec<f64> = z.chunks_exact(d).map(crate::stats::norm).collect();
                Ok(blocks_extremal_index(&norms, threshold, block)?.0)
            })
            .into_iter()
            .collect::<Result<_>>()?;
            Ok(vec![DiagnosticsReport::new(
                "extremal-index",
                &[("n", n as f64), ("epsilon", epsilon), ("block", block as f64)],
                mean_stderr(&values),
                reps,
                Some(Expectation::Equals(1.0)),
                seed,
            )])
        }
        Task::Marginal { n } => {
            let test = marginal_stable_test(model, n, reps, seed)?;
            Ok(vec![DiagnosticsReport::new(
                "marginal-stable",
                &[("n", n as f64), ("cut", MARGINAL_TEST_CUT)],
                (test.statistic, 0.0),
                reps,
                Some(Expectation::AtMost(test.critical)),
                seed,
            )])
        }
        Task::Fuzz => {
            let s = skorohod_fuzz(reps, FUZZ_TOL, seed)?;
            Ok(vec![DiagnosticsReport::new(
                "skorohod-fuzz",
                &[
                    ("tol", FUZZ_TOL),
                    ("max_triangle_excess", s.max_triangle_excess),
                    ("max_closed_form_error", s.max_closed_form_error),
                ],
                (s.failures() as f64, 0.0),
                reps,
                Some(Expectation::Equals(0.0)),
                seed,
            )])
        }
        Task::Exin { n, pi } => {
            let table = exin_identity_check(pi, n)?;
            Ok(vec![DiagnosticsReport::new(
                "exin-identity",
                &[("n", n as f64), ("pi", pi)],
                (table.max_error(), 0.0),
                1,
                Some(Expectation::AtMost(EXIN_TOL)),
                seed,
            )])
        }
    }
}

fn task_seed(config: &ExperimentConfig, index: usize) -> u64 {
    SeedStream::new(config.seed)
        .tagged(config.kind.name())
        .child(index as u64)
        .seed()
}

/// All reports of a configuration, in grid order, without touching the
/// file system.
pub fn compute_reports(config: &ExperimentConfig) -> std::result::Result<Vec<DiagnosticsReport>, HarnessError> {
    config.validate()?;
    let mut out = Vec::new();
    for (i, task) in tasks(config).into_iter().enumerate() {
        out.extend(execute(config, task, task_seed(config, i))?);
    }
    Ok(out)
}

/// Runs the experiment, writing each report to
/// `<output_dir>/reports/NNNN_<condition>.json` as soon as its grid point
/// finishes and the curves to `<output_dir>/curves/` at the end.
pub fn run(config: &ExperimentConfig) -> std::result::Result<RunSummary, HarnessError> {
    config.validate()?;
    let reports_dir = config.output_dir.join("reports");
    std::fs::create_dir_all(&reports_dir)?;
    let mut reports = Vec::new();
    let mut report_files = Vec::new();
    for (i, task) in tasks(config).into_iter().enumerate() {
        for r in execute(config, task, task_seed(config, i))? {
            let path = reports_dir.join(format!("{:04}_{}.json", reports.len(), slug(&r.condition)));
            let json = serde_json::to_string_pretty(&r)? + "\n";
            write_atomic(&path, json.as_bytes())?;
            report_files.push(path);
            reports.push(r);
        }
    }
    let curve_files = emit_plot_data(&reports, &config.output_dir.join("curves"))?;
    Ok(RunSummary {
        reports,
        report_files,
        curve_files,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::Verdict;
    use crate::harness::config::ParameterGrid;
    use crate::models::SequenceModel;

    fn config(kind: ExperimentKind, grid: ParameterGrid, dir: PathBuf) -> ExperimentConfig {
        ExperimentConfig {
            schema_version: 1,
            kind,
            model: SequenceModel::iid_pareto(1.5, 0.5).unwrap(),
            grid,
            replications: 20,
            seed: 5,
            output_dir: dir,
            schedule: Default::default(),
        }
    }

    #[test]
    fn empty_grid_gives_no_reports() {
        let dir = tempfile::tempdir().unwrap();
        let c = config(ExperimentKind::MaximaLimit, ParameterGrid::default(), dir.path().into());
        let s = run(&c).unwrap();
        assert!(s.reports.is_empty());
        assert!(s.curve_files.is_empty());
    }

    #[test]
    fn exin_reports_pass() {
        let grid = ParameterGrid {
            n: vec![4, 8],
            pi: vec![0.5],
            ..Default::default()
        };
        let c = config(ExperimentKind::ExinIdentity, grid, PathBuf::from("unused"));
        let r = compute_reports(&c).unwrap();
        assert_eq!(r.len(), 2);
        assert!(r.iter().all(|r| r.verdict == Verdict::Consistent));
    }

    #[test]
    fn seeds_follow_chain() {
        let grid = ParameterGrid {
            n: vec![100],
            epsilon: vec![1.0, 2.0],
            ..Default::default()
        };
        let mut c = config(ExperimentKind::PoissonCounts, grid, PathBuf::from("unused"));
        c.replications = 500;
        let r = compute_reports(&c).unwrap();
        let kind = SeedStream::new(5).tagged("poisson-counts");
        assert_eq!(r[0].seed, kind.child(0).seed());
        assert_eq!(r[1].seed, kind.child(1).seed());
    }
}
