//! Dataset ingestion, correlation, and abstention evaluation.

mod abstention;
mod dataset;
mod pipeline;
mod stats;

pub use abstention::{
    abstention_eval, candidate_thresholds, confusion, downsample, fit_threshold, fit_with_accuracy, label_correctness,
    AbstentionReport, FoldReport, LabeledSample, ScoredProblem,
};
pub use dataset::{load_dataset, parse_dataset, Candidate, EntrySignature, ProblemRecord, Response};
pub use pipeline::{
    cluster_problem, evaluate_dataset, evaluate_scores, score_dataset, score_problem, top_correctness, ClassSummary,
    EvaluateOptions, EvaluationReport, ProblemReport, ScoreOptions, ScoreReport, Summary,
};
pub use stats::{incomplete_beta, ln_gamma, pearson, t_test_p_value, CorrelationResult};
