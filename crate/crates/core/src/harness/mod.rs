//! Experiment orchestration: MSE evaluation, score-matrix ingestion and
//! sweeps over ε.

pub mod evaluate;
pub mod ingest;
pub mod sweep;

pub use evaluate::{evaluate_mse, log_score_ratio, per_problem_mse, squared_gaps, MseEstimate, DEFAULT_RATIO_TRIALS};
pub use ingest::{ingest_scores, ScoreMatrixFile, UserProblem, DEFAULT_TOP_K};
pub use sweep::{
    default_epsilon_grid, read_rows_csv, run_sweep, write_rows, ExperimentConfig, OutputFormat, ScenarioRef, SweepRow,
};
