//! Threshold abstention: accept a response iff its uncertainty is at most
//! a fitted threshold.

use num_traits::Float;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

fn lit<T: Float>(v: f64) -> T {
    T::from(v).expect("float literal")
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoredProblem<T> {
    pub problem_id: String,
    pub uncertainty: T,
    pub correctness: T,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabeledSample<T> {
    pub problem_id: String,
    pub uncertainty: T,
    pub correct: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FoldReport<T> {
    pub threshold: T,
    pub size: usize,
    pub accuracy: T,
    pub false_positive_rate: T,
    pub false_negative_rate: T,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AbstentionReport<T> {
    /// Threshold fitted on the whole balanced sample.
    pub threshold: T,
    /// Sample-weighted averages over the validation folds.
    pub accuracy: T,
    pub false_positive_rate: T,
    pub false_negative_rate: T,
    pub folds: usize,
    pub seed: u64,
    /// Size of the balanced sample the folds were cut from.
    pub samples: usize,
    pub fold_reports: Vec<FoldReport<T>>,
}

/// Correct iff correctness strictly exceeds `threshold`.
pub fn label_correctness<T: Float>(scored: &[ScoredProblem<T>], threshold: T) -> Result<Vec<LabeledSample<T>>> {
    if !(threshold >= T::zero() && threshold <= T::one()) {
        return Err(Error::Usage("correctness threshold must lie in [0, 1]".into()));
    }
    Ok(scored
        .iter()
        .map(|s| LabeledSample {
            problem_id: s.problem_id.clone(),
            uncertainty: s.uncertainty,
            correct: s.correctness > threshold,
        })
        .collect())
}

fn counts<T>(samples: &[LabeledSample<T>]) -> (usize, usize) {
    let c = samples.iter().filter(|s| s.correct).count();
    (c, samples.len() - c)
}

/// Randomly drops samples of the larger class until both classes are the
/// same size. Kept samples retain their order.
pub fn downsample<T: Clone>(samples: &[LabeledSample<T>], seed: u64) -> Result<Vec<LabeledSample<T>>> {
    let (c, i) = counts(samples);
    if c == 0 || i == 0 {
        return Err(Error::Degenerate(format!("need both labels to balance ({c} correct, {i} incorrect)")));
    }
    let majority = c > i;
    let target = c.min(i);
    let pool: Vec<usize> = (0..samples.len()).filter(|&k| samples[k].correct == majority).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut keep = vec![true; samples.len()];
    if pool.len() > target {
        for &k in pool.choose_multiple(&mut rng, pool.len() - target) {
            keep[k] = false;
        }
    }
    Ok(samples.iter().zip(keep).filter(|(_, k)| *k).map(|(s, _)| s.clone()).collect())
}

/// `(accuracy, false positives, false negatives)` as fractions of `samples`.
pub fn confusion<T: Float>(samples: &[LabeledSample<T>], threshold: T) -> (T, T, T) {
    let (mut ok, mut fp, mut fn_) = (0usize, 0usize, 0usize);
    for s in samples {
        match (s.uncertainty <= threshold, s.correct) {
            (true, true) | (false, false) => ok += 1,
            (true, false) => fp += 1,
            (false, true) => fn_ += 1,
        }
    }
    let n = lit::<T>(samples.len() as f64);
    (lit::<T>(ok as f64) / n, lit::<T>(fp as f64) / n, lit::<T>(fn_ as f64) / n)
}

/// Candidate thresholds: one below the minimum, midpoints between distinct
/// consecutive values, one above the maximum.
pub fn candidate_thresholds<T: Float>(samples: &[LabeledSample<T>]) -> Vec<T> {
    let mut u: Vec<T> = samples.iter().map(|s| s.uncertainty).collect();
    u.sort_by(|a, b| a.partial_cmp(b).expect("finite uncertainties"));
    u.dedup();
    let mut out = Vec::with_capacity(u.len() + 1);
    if let (Some(&lo), Some(&hi)) = (u.first(), u.last()) {
        out.push(lo - T::one());
        out.extend(u.windows(2).map(|w| (w[0] + w[1]) / lit(2.0)));
        out.push(hi + T::one());
    }
    out
}

/// Threshold with the best training accuracy; ties go to the smallest.
pub fn fit_threshold<T: Float>(train: &[LabeledSample<T>]) -> Result<T> {
    fit_with_accuracy(train).map(|(t, _)| t)
}

pub fn fit_with_accuracy<T: Float>(train: &[LabeledSample<T>]) -> Result<(T, T)> {
    let (c, i) = counts(train);
    if c == 0 || i == 0 {
        return Err(Error::Degenerate(format!(
            "cannot fit a threshold on a single label ({c} correct, {i} incorrect)"
        )));
    }
    if train.iter().any(|s| !s.uncertainty.is_finite()) {
        return Err(Error::Usage("uncertainty is not finite".into()));
    }
    let mut best: Option<(T, T)> = None;
    for t in candidate_thresholds(train) {
        let (acc, _, _) = confusion(train, t);
        if best.is_none_or(|(_, b)| acc > b) {
            best = Some((t, acc));
        }
    }
    Ok(best.expect("nonempty candidates"))
}

/// Balances the labels, shuffles with `seed`, deals each label round-robin
/// into `folds` folds, and validates a threshold fitted on the remaining
/// folds against each one.
pub fn abstention_eval<T: Float>(
    scored: &[ScoredProblem<T>],
    correctness_threshold: T,
    folds: usize,
    seed: u64,
) -> Result<AbstentionReport<T>> {
    if folds < 2 {
        return Err(Error::Usage(format!("cross-validation needs at least 2 folds, got {folds}")));
    }
    let labeled = label_correctness(scored, correctness_threshold)?;
    let mut balanced = downsample(&labeled, seed)?;
    let per_class = balanced.len() / 2;
    if per_class < folds {
        return Err(Error::Usage(format!(
            "{per_class} sample(s) per label after balancing cannot fill {folds} folds"
        )));
    }
    // a separate stream from the one used for downsampling
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    balanced.shuffle(&mut rng);
    let mut fold_of = vec![0usize; balanced.len()];
    let (mut nc, mut ni) = (0usize, 0usize);
    for (k, s) in balanced.iter().enumerate() {
        let counter = if s.correct { &mut nc } else { &mut ni };
        fold_of[k] = *counter % folds;
        *counter += 1;
    }

    let mut fold_reports = Vec::with_capacity(folds);
    let (mut ok, mut fp, mut fn_) = (T::zero(), T::zero(), T::zero());
    for f in 0..folds {
        let (valid, train): (Vec<_>, Vec<_>) = balanced.iter().cloned().zip(&fold_of).partition(|(_, &k)| k == f);
        let valid: Vec<LabeledSample<T>> = valid.into_iter().map(|(s, _)| s).collect();
        let train: Vec<LabeledSample<T>> = train.into_iter().map(|(s, _)| s).collect();
        let threshold = fit_threshold(&train)?;
        let (a, p, n) = confusion(&valid, threshold);
        let w = lit::<T>(valid.len() as f64);
        ok = ok + a * w;
        fp = fp + p * w;
        fn_ = fn_ + n * w;
        fold_reports.push(FoldReport {
            threshold,
            size: valid.len(),
            accuracy: a,
            false_positive_rate: p,
            false_negative_rate: n,
        });
    }
    let total = lit::<T>(balanced.len() as f64);
    Ok(AbstentionReport {
        threshold: fit_threshold(&balanced)?,
        accuracy: ok / total,
        false_positive_rate: fp / total,
        false_negative_rate: fn_ / total,
        folds,
        seed,
        samples: balanced.len(),
        fold_reports,
    })
}
