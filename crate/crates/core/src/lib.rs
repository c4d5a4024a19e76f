//! Simulation and verification of functional stable limit theorems for
//! weakly dependent heavy-tailed sequences.

pub mod diagnostics;
pub mod error;
pub mod harness;
pub mod models;
pub mod path;
pub mod points;
pub mod rng;
pub mod stable;
pub mod stats;

pub use diagnostics::{judge, BlockSchedule, DiagnosticsReport, Expectation, Verdict};
pub use error::{Error, Result};
pub use models::{
    centering_cn, exceedance_probability, generate, mixing_profile, normalizer_bn, tail_constants, truncated_mean,
    Innovation, MixingProfile, Normalizer, SequenceGenerator, SequenceModel, TailConstants,
};
pub use path::{
    big_jump_path, d_infinity, jumps_above, partial_sum_path, remove_big_jumps, skorohod_j1_distance, uniform_distance,
    CadlagPath, DInfinity, TimeChange,
};
pub use points::{
    count_in, empirical_laplace, extract_point_process, poisson_laplace_functional, sample_poisson_pattern,
    AnnularSector, PointPattern, RectRegion, StepFunction,
};
pub use rng::SeedStream;
pub use stable::{
    karamata_truncated_moment_limit, levy_tail_mass, sample_stable, simulate_levy_path, stable_cf, Compensation,
    LevySmallJumpPolicy, SpectralAtom, StableLaw,
};
