//! Dataset-level scoring and evaluation.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::abstention::{abstention_eval, AbstentionReport, ScoredProblem};
use super::dataset::ProblemRecord;
use super::stats::pearson;
use crate::cluster::{cluster, ClusterOptions, ClusterRecord, ClusterSet};
use crate::interp::correctness_score;
use crate::lang::{parse, ValidationVerdict};
use crate::metrics::{
    llm_probability_baseline, mutual_information, response_distribution, semantic_entropy, Metric, ProbabilityMode,
};
use crate::{Error, Real, Result};

#[derive(Clone, Debug)]
pub struct ScoreOptions {
    pub metric: Metric,
    pub cluster: ClusterOptions,
    pub probability_mode: ProbabilityMode,
    /// Used for both stabilization parameters of the MI estimate.
    pub gamma: Real,
    pub step_budget: u64,
    /// Worker threads; problems are scored concurrently.
    pub jobs: usize,
}

impl Default for ScoreOptions {
    fn default() -> Self {
        ScoreOptions {
            metric: Metric::SeUniform,
            cluster: ClusterOptions::default(),
            probability_mode: ProbabilityMode::default(),
            gamma: 1e-10,
            step_budget: crate::interp::DEFAULT_STEP_BUDGET,
            jobs: 1,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProblemReport {
    pub problem_id: String,
    pub metric: String,
    pub score: Real,
    pub cluster_count: usize,
    pub correctness: Real,
    pub distribution_mode: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub difficulty: Option<String>,
    pub clustering: ClusterRecord,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub metric: String,
    pub problems: Vec<ProblemReport>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassSummary {
    pub n: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub abstention: Option<AbstentionReport<Real>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub metric: String,
    pub n: usize,
    pub correctness_threshold: Real,
    pub r: Real,
    pub p_value: Real,
    pub abstention: AbstentionReport<Real>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub per_class: Option<BTreeMap<String, ClassSummary>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub metric: String,
    pub problems: Vec<ProblemReport>,
    pub summary: Summary,
}

#[derive(Clone, Copy, Debug)]
pub struct EvaluateOptions {
    pub correctness_threshold: Real,
    pub folds: usize,
    pub seed: u64,
    /// Also fit one abstention policy per difficulty class.
    pub per_class: bool,
}

impl Default for EvaluateOptions {
    fn default() -> Self {
        EvaluateOptions {
            correctness_threshold: 0.9,
            folds: 2,
            seed: 0,
            per_class: false,
        }
    }
}

/// Test pass rate of the top-ranked response; an invalid snippet passes nothing.
pub fn top_correctness(rec: &ProblemRecord, step_budget: u64) -> Result<Real> {
    match parse(&rec.top().candidate.snippet) {
        ValidationVerdict::Valid(p) if p.signature() == rec.entry.signature() => {
            correctness_score(&p, &rec.tests, step_budget)
        }
        _ => Ok(0.0),
    }
}

/// Clusters the responses a metric needs (follow-ups included for MI).
pub fn cluster_problem(rec: &ProblemRecord, metric: Metric, opts: &ClusterOptions) -> Result<ClusterSet> {
    let snippets = if metric.needs_followups() {
        rec.all_snippets()
    } else {
        rec.initial_snippets()
    };
    let opts = ClusterOptions {
        signature: Some(rec.entry.signature()),
        ..opts.clone()
    };
    cluster(&snippets, &opts)
}

pub fn score_problem(rec: &ProblemRecord, opts: &ScoreOptions) -> Result<ProblemReport> {
    let metric = opts.metric;
    if metric.needs_followups() {
        if let Some(r) = rec.responses.iter().find(|r| r.followups.is_empty()) {
            return Err(Error::Usage(format!(
                "{metric} needs follow-up responses, but response `{}` of problem `{}` has none",
                r.candidate.snippet.id, rec.id
            )));
        }
    }
    let c = cluster_problem(rec, metric, &opts.cluster)?;
    let score = match metric {
        Metric::SeNorm | Metric::SeUniform => {
            semantic_entropy(&c, &response_distribution(&rec.initial_probs(), metric.mode())?)?
        }
        Metric::MiNorm | Metric::MiUniform => {
            mutual_information(&rec.iterative_record(), &c, metric.mode(), opts.gamma, opts.gamma)?
        }
        Metric::ClusterCount => c.clusters.len() as Real,
        Metric::LlmProb => llm_probability_baseline(&rec.top().candidate.prob, opts.probability_mode)?,
    };
    let distribution_mode = match metric {
        Metric::LlmProb => match opts.probability_mode {
            ProbabilityMode::LengthNormalized => "length_normalized".to_string(),
            ProbabilityMode::Raw => "raw".to_string(),
        },
        _ => metric.mode().to_string(),
    };
    Ok(ProblemReport {
        problem_id: rec.id.clone(),
        metric: metric.name().to_string(),
        score,
        cluster_count: c.clusters.len(),
        correctness: top_correctness(rec, opts.step_budget)?,
        distribution_mode,
        difficulty: rec.difficulty.clone(),
        clustering: ClusterRecord::new(&rec.id, &c),
    })
}

/// Scores every problem; output order and content do not depend on `jobs`.
pub fn score_dataset(problems: &[ProblemRecord], opts: &ScoreOptions) -> Result<ScoreReport> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.jobs.max(1))
        .build()
        .map_err(|e| Error::Usage(format!("cannot start worker pool: {e}")))?;
    let results: Vec<Result<ProblemReport>> = pool.install(|| problems.par_iter().map(|p| score_problem(p, opts)).collect());
    let problems = results.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(ScoreReport {
        metric: opts.metric.name().to_string(),
        problems,
    })
}

/// Uncertainty used for thresholding: confidences are negated.
fn as_uncertainty(metric: Metric, score: Real) -> Real {
    if metric.is_confidence() {
        -score
    } else {
        score
    }
}

pub fn evaluate_scores(report: ScoreReport, metric: Metric, opts: &EvaluateOptions) -> Result<EvaluationReport> {
    let xs: Vec<Real> = report.problems.iter().map(|p| p.score).collect();
    let ys: Vec<Real> = report.problems.iter().map(|p| p.correctness).collect();
    let corr = pearson(&xs, &ys)?;
    let scored = |subset: &[&ProblemReport]| -> Vec<ScoredProblem<Real>> {
        subset
            .iter()
            .map(|p| ScoredProblem {
                problem_id: p.problem_id.clone(),
                uncertainty: as_uncertainty(metric, p.score),
                correctness: p.correctness,
            })
            .collect()
    };
    let all: Vec<&ProblemReport> = report.problems.iter().collect();
    let abstention = abstention_eval(&scored(&all), opts.correctness_threshold, opts.folds, opts.seed)?;

    let per_class = opts.per_class.then(|| {
        let mut groups: BTreeMap<String, Vec<&ProblemReport>> = BTreeMap::new();
        for p in &report.problems {
            let key = p.difficulty.clone().unwrap_or_else(|| "unlabeled".to_string());
            groups.entry(key).or_default().push(p);
        }
        groups
            .into_iter()
            .map(|(k, members)| {
                let summary = match abstention_eval(&scored(&members), opts.correctness_threshold, opts.folds, opts.seed) {
                    Ok(a) => ClassSummary {
                        n: members.len(),
                        abstention: Some(a),
                        error: None,
                    },
                    Err(e) => ClassSummary {
                        n: members.len(),
                        abstention: None,
                        error: Some(e.to_string()),
                    },
                };
                (k, summary)
            })
            .collect()
    });

    Ok(EvaluationReport {
        metric: report.metric.clone(),
        summary: Summary {
            metric: report.metric,
            n: corr.n,
            correctness_threshold: opts.correctness_threshold,
            r: corr.r,
            p_value: corr.p_value,
            abstention,
            per_class,
        },
        problems: report.problems,
    })
}

pub fn evaluate_dataset(
    problems: &[ProblemRecord],
    score: &ScoreOptions,
    opts: &EvaluateOptions,
) -> Result<EvaluationReport> {
    evaluate_scores(score_dataset(problems, score)?, score.metric, opts)
}
