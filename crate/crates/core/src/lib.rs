//! Multi-base representations of integers.
//!
//! A base system fixes pairwise coprime bases `p_1 < ... < p_m` and digits
//! `0..d`; a representation of `n` writes `n = Σ a_ℓ B_ℓ` with increasing
//! `B_ℓ` from the multiplicative monoid `S` generated by the bases. This
//! crate counts representations exactly, samples them uniformly, and checks
//! saddle-point and closed-form asymptotics against the exact counts.

pub mod asymptotics;
pub mod error;
pub mod exact;
pub mod model;
pub mod saddle;
pub mod sampling;
pub mod seq;
pub mod tails;
mod wide;

pub use asymptotics::{
    clt_prediction, fluctuation_K, kappa, leading_coefficient, log_fluctuation, mahler_log_estimate,
    pennington_log_estimate, theorem1_constants, theorem1_log_estimate, theorem2_constants,
    theorem2_log_main_term, CltPrediction, Theorem1Constants, Theorem2Constants,
};
pub use error::{Error, ErrorKind, Result};
pub use exact::{
    build_count_table, build_count_table_with, build_moment_tables, build_moment_tables_with,
    count_brute_force, count_brute_force_with_limit, count_via_power_partition, count_via_power_partition_with,
    exact_distribution, exact_distribution_with, format_sig, rational_to_f64, CountTable, Distribution,
    ExactMoments, MomentTable, BRUTE_FORCE_LIMIT,
};
pub use model::{statistic_value, BaseSystem, Representation, Statistic};
pub use saddle::{
    chernoff_log_bound, estimate_count, estimate_moments, evaluate_f, evaluate_f_unrestricted, solve_saddle,
    GfKind, MomentEstimate, SaddleEvaluation, SaddleResult, SOLVER_TOLERANCE,
};
pub use sampling::{
    build_sampler, build_sampler_with, chi_square_uniformity, digit_frequency_at_one, normality_report,
    normality_report_with, tv_distance, ChiSquareReport, Mode, Sampler, StatReport,
};
pub use seq::{cardinality_estimate, count_upto, generate_upto, SPrefix};
pub use tails::{
    log_tail_ratio, sigma_sum, tail_constant, tail_ratio, verify_tail_bounds, verify_tail_bounds_with, y_grid,
    TailCheck, TailReport, TailSummary,
};
pub use wide::{ln_biguint, Limits};
