//! Cluster-level uncertainty scores.
//!
//! All functions are generic over the float type; natural logarithms
//! throughout. Response probabilities come either from length-normalized
//! log-probabilities pushed through a max-shifted softmax, or from the
//! uniform approximation.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::cluster::ClusterSet;
use crate::{Error, Result};

fn lit<T: Float>(v: f64) -> T {
    T::from(v).expect("float literal")
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResponseProb<T> {
    pub id: String,
    /// Sum of token log-probabilities, as reported.
    pub total_logprob: T,
    pub token_count: u32,
}

impl<T: Float> ResponseProb<T> {
    pub fn new(id: impl Into<String>, total_logprob: T, token_count: u32) -> Self {
        ResponseProb {
            id: id.into(),
            total_logprob,
            token_count,
        }
    }
}

/// Probability per response id, in insertion order.
#[derive(Clone, Debug, PartialEq)]
pub struct ResponseDistribution<T> {
    pub probs: Vec<(String, T)>,
}

impl<T: Float> ResponseDistribution<T> {
    pub fn get(&self, id: &str) -> Option<T> {
        self.probs.iter().find(|(k, _)| k == id).map(|(_, p)| *p)
    }

    pub fn values(&self) -> Vec<T> {
        self.probs.iter().map(|(_, p)| *p).collect()
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DistributionMode {
    #[default]
    LengthNormalized,
    Uniform,
}

impl fmt::Display for DistributionMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DistributionMode::LengthNormalized => "length_normalized",
            DistributionMode::Uniform => "uniform",
        })
    }
}

/// How the top-ranked response probability is derived.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProbabilityMode {
    /// `exp(total_logprob / token_count)`
    #[default]
    LengthNormalized,
    /// `exp(total_logprob)`
    Raw,
}

impl FromStr for ProbabilityMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "length-normalized" | "normalized" => Ok(ProbabilityMode::LengthNormalized),
            "raw" => Ok(ProbabilityMode::Raw),
            other => Err(Error::Usage(format!("unknown probability mode `{other}` (length-normalized|raw)"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Metric {
    #[serde(rename = "se-norm")]
    SeNorm,
    #[serde(rename = "se-uniform")]
    SeUniform,
    #[serde(rename = "mi-norm")]
    MiNorm,
    #[serde(rename = "mi-uniform")]
    MiUniform,
    #[serde(rename = "cc")]
    ClusterCount,
    #[serde(rename = "llm-prob")]
    LlmProb,
}

impl Metric {
    pub const ALL: [Metric; 6] = [
        Metric::SeNorm,
        Metric::SeUniform,
        Metric::MiNorm,
        Metric::MiUniform,
        Metric::ClusterCount,
        Metric::LlmProb,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::SeNorm => "se-norm",
            Metric::SeUniform => "se-uniform",
            Metric::MiNorm => "mi-norm",
            Metric::MiUniform => "mi-uniform",
            Metric::ClusterCount => "cc",
            Metric::LlmProb => "llm-prob",
        }
    }

    /// Whether the score is a confidence (higher = more certain) rather than
    /// an uncertainty.
    pub fn is_confidence(self) -> bool {
        self == Metric::LlmProb
    }

    pub fn needs_followups(self) -> bool {
        matches!(self, Metric::MiNorm | Metric::MiUniform)
    }

    pub fn mode(self) -> DistributionMode {
        match self {
            Metric::SeUniform | Metric::MiUniform => DistributionMode::Uniform,
            _ => DistributionMode::LengthNormalized,
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Metric::ALL.into_iter().find(|m| m.name() == s).ok_or_else(|| {
            let names: Vec<&str> = Metric::ALL.iter().map(|m| m.name()).collect();
            Error::Usage(format!("unknown metric `{s}` (one of {})", names.join(", ")))
        })
    }
}

pub fn length_normalize<T: Float>(r: &ResponseProb<T>) -> Result<T> {
    if r.token_count == 0 {
        return Err(Error::Usage(format!("response `{}` has zero tokens", r.id)));
    }
    Ok(r.total_logprob / lit(r.token_count as f64))
}

/// Max-shifted softmax.
pub fn softmax<T: Float>(values: &[T]) -> Result<Vec<T>> {
    if values.is_empty() {
        return Err(Error::Usage("softmax of an empty list".into()));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Usage("softmax input is not finite".into()));
    }
    let max = values.iter().copied().fold(T::neg_infinity(), T::max);
    let exps: Vec<T> = values.iter().map(|&v| (v - max).exp()).collect();
    let z = exps.iter().copied().fold(T::zero(), |a, b| a + b);
    Ok(exps.into_iter().map(|e| e / z).collect())
}

pub fn softmax_distribution<T: Float>(ids: &[String], values: &[T]) -> Result<ResponseDistribution<T>> {
    if ids.len() != values.len() {
        return Err(Error::Usage(format!("{} ids for {} values", ids.len(), values.len())));
    }
    let probs = softmax(values)?;
    Ok(ResponseDistribution {
        probs: ids.iter().cloned().zip(probs).collect(),
    })
}

pub fn uniform_distribution<T: Float>(ids: &[String]) -> Result<ResponseDistribution<T>> {
    if ids.is_empty() {
        return Err(Error::Usage("uniform distribution over zero responses".into()));
    }
    let p = T::one() / lit(ids.len() as f64);
    Ok(ResponseDistribution {
        probs: ids.iter().map(|id| (id.clone(), p)).collect(),
    })
}

/// Distribution of `responses` under `mode`.
pub fn response_distribution<T: Float>(
    responses: &[ResponseProb<T>],
    mode: DistributionMode,
) -> Result<ResponseDistribution<T>> {
    let ids: Vec<String> = responses.iter().map(|r| r.id.clone()).collect();
    match mode {
        DistributionMode::Uniform => uniform_distribution(&ids),
        DistributionMode::LengthNormalized => {
            let values = responses.iter().map(length_normalize).collect::<Result<Vec<T>>>()?;
            softmax_distribution(&ids, &values)
        }
    }
}

/// Probability mass per cluster of `c`; every id of `d` must belong to `c`.
fn cluster_masses<T: Float>(c: &ClusterSet, d: &ResponseDistribution<T>) -> Result<Vec<T>> {
    let index: HashMap<&str, usize> = c
        .clusters
        .iter()
        .enumerate()
        .flat_map(|(k, members)| members.iter().map(move |m| (m.as_str(), k)))
        .collect();
    let mut mass = vec![T::zero(); c.clusters.len()];
    for (id, p) in &d.probs {
        let k = index
            .get(id.as_str())
            .ok_or_else(|| Error::Usage(format!("response `{id}` is not in any cluster")))?;
        mass[*k] = mass[*k] + *p;
    }
    Ok(mass)
}

/// Shannon entropy of the cluster masses.
pub fn semantic_entropy<T: Float>(c: &ClusterSet, d: &ResponseDistribution<T>) -> Result<T> {
    if c.ids().count() != d.probs.len() {
        return Err(Error::Usage(format!(
            "distribution covers {} responses, clusters hold {}",
            d.probs.len(),
            c.ids().count()
        )));
    }
    let mass = cluster_masses(c, d)?;
    if mass.iter().filter(|&&m| m > T::zero()).count() <= 1 {
        // a point mass; avoids rounding residue from p != 1 exactly
        return Ok(T::zero());
    }
    Ok(mass
        .into_iter()
        .filter(|&m| m > T::zero())
        .fold(T::zero(), |acc, m| acc - m * m.ln()))
}

/// Initial responses with the follow-ups generated from each of them.
#[derive(Clone, Debug, PartialEq)]
pub struct IterativeRecord<T> {
    pub initial: Vec<ResponseProb<T>>,
    /// Follow-ups of `initial[k]` at index `k`.
    pub followups: Vec<Vec<ResponseProb<T>>>,
}

/// Mutual information between the cluster of an initial response and the
/// cluster of its follow-ups.
///
/// The conditional for a cluster is the average of its members' follow-up
/// distributions weighted by their initial probability.
pub fn mutual_information<T: Float>(
    rec: &IterativeRecord<T>,
    c: &ClusterSet,
    mode: DistributionMode,
    gamma1: T,
    gamma2: T,
) -> Result<T> {
    if !(gamma1 > T::zero() && gamma2 > T::zero()) {
        return Err(Error::Usage("stabilization parameters must be positive".into()));
    }
    if rec.followups.len() != rec.initial.len() {
        return Err(Error::Usage("one follow-up list per initial response is required".into()));
    }
    if let Some((r, _)) = rec.initial.iter().zip(&rec.followups).find(|(_, f)| f.is_empty()) {
        return Err(Error::Usage(format!("response `{}` has no follow-ups", r.id)));
    }
    let covered = rec.initial.len() + rec.followups.iter().map(Vec::len).sum::<usize>();
    if c.ids().count() != covered {
        return Err(Error::Usage(format!(
            "clusters hold {} responses, the record has {covered}",
            c.ids().count()
        )));
    }

    let k = c.clusters.len();
    let first = response_distribution(&rec.initial, mode)?;
    let mut marginal = vec![T::zero(); k];
    let mut conditional = vec![vec![T::zero(); k]; k];
    for (r, follow) in rec.initial.iter().zip(&rec.followups) {
        let i = c
            .cluster_of(&r.id)
            .ok_or_else(|| Error::Usage(format!("response `{}` is not in any cluster", r.id)))?;
        let w = first.get(&r.id).expect("own id");
        marginal[i] = marginal[i] + w;
        let next = cluster_masses(c, &response_distribution(follow, mode)?)?;
        for (t, m) in next.into_iter().enumerate() {
            conditional[i][t] = conditional[i][t] + w * m;
        }
    }

    let z = marginal.iter().copied().fold(T::zero(), |a, b| a + b);
    let mu1: Vec<T> = marginal.iter().map(|&m| m / z).collect();
    let mu2: Vec<Vec<T>> = conditional
        .into_iter()
        .map(|row| {
            let zi = row.iter().copied().fold(T::zero(), |a, b| a + b);
            if zi > T::zero() {
                row.into_iter().map(|v| v / zi).collect()
            } else {
                row
            }
        })
        .collect();
    // second-response marginal under the joint
    let nu: Vec<T> = (0..k)
        .map(|t| (0..k).fold(T::zero(), |acc, j| acc + mu1[j] * mu2[j][t]))
        .collect();

    let mut total = T::zero();
    for i in 0..k {
        for t in 0..k {
            let joint = mu1[i] * mu2[i][t];
            if joint > T::zero() {
                let product = mu1[i] * nu[t];
                total = total + joint * ((joint + gamma1) / (product + gamma2)).ln();
            }
        }
    }
    Ok(total)
}

pub fn llm_probability_baseline<T: Float>(top: &ResponseProb<T>, mode: ProbabilityMode) -> Result<T> {
    Ok(match mode {
        ProbabilityMode::LengthNormalized => length_normalize(top)?.exp(),
        ProbabilityMode::Raw => top.total_logprob.exp(),
    })
}
