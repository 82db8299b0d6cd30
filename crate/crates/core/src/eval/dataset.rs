//! Benchmark dataset files.

use std::collections::HashSet;
use std::path::Path;

use serde::Deserialize;

use crate::interp::{inputs_from_json, TestCase, Value};
use crate::lang::{Signature, SnipType, SourceSnippet};
use crate::metrics::{IterativeRecord, ResponseProb};
use crate::{Error, Real, Result};

#[derive(Deserialize)]
struct RawDataset {
    problems: Vec<RawProblem>,
}

#[derive(Deserialize)]
struct RawProblem {
    id: String,
    entry: RawEntry,
    responses: Vec<RawResponse>,
    tests: Vec<RawTest>,
    top_ranked: String,
    #[serde(default)]
    difficulty: Option<String>,
}

#[derive(Deserialize)]
struct RawEntry {
    name: String,
    params: Vec<RawParam>,
    #[serde(rename = "return")]
    ret: SnipType,
}

#[derive(Deserialize)]
struct RawParam {
    name: String,
    #[serde(rename = "type")]
    ty: SnipType,
}

#[derive(Deserialize)]
struct RawResponse {
    id: String,
    source: String,
    logprob: f64,
    tokens: u32,
    #[serde(default)]
    followups: Vec<RawFollowup>,
}

#[derive(Deserialize)]
struct RawFollowup {
    id: String,
    source: String,
    logprob: f64,
    tokens: u32,
}

#[derive(Deserialize)]
struct RawTest {
    input: serde_json::Value,
    expected: serde_json::Value,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EntrySignature {
    pub name: String,
    pub params: Vec<(String, SnipType)>,
    pub ret: SnipType,
}

impl EntrySignature {
    pub fn signature(&self) -> Signature {
        Signature {
            params: self.param_types(),
            ret: self.ret,
        }
    }

    pub fn param_types(&self) -> Vec<SnipType> {
        self.params.iter().map(|(_, t)| *t).collect()
    }
}

/// A snippet together with its generation probability.
#[derive(Clone, Debug, PartialEq)]
pub struct Candidate {
    pub snippet: SourceSnippet,
    pub prob: ResponseProb<Real>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Response {
    pub candidate: Candidate,
    /// Responses generated with this one appended to the prompt.
    pub followups: Vec<Candidate>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProblemRecord {
    pub id: String,
    pub entry: EntrySignature,
    pub responses: Vec<Response>,
    pub tests: Vec<TestCase>,
    pub top_ranked: String,
    /// Optional grouping key (for example a difficulty class).
    pub difficulty: Option<String>,
}

impl ProblemRecord {
    pub fn top(&self) -> &Response {
        self.responses
            .iter()
            .find(|r| r.candidate.snippet.id == self.top_ranked)
            .expect("validated top_ranked")
    }

    pub fn initial_snippets(&self) -> Vec<SourceSnippet> {
        self.responses.iter().map(|r| r.candidate.snippet.clone()).collect()
    }

    /// Initial responses followed by every follow-up.
    pub fn all_snippets(&self) -> Vec<SourceSnippet> {
        let mut out = self.initial_snippets();
        for r in &self.responses {
            out.extend(r.followups.iter().map(|f| f.snippet.clone()));
        }
        out
    }

    pub fn initial_probs(&self) -> Vec<ResponseProb<Real>> {
        self.responses.iter().map(|r| r.candidate.prob.clone()).collect()
    }

    pub fn has_followups(&self) -> bool {
        self.responses.iter().all(|r| !r.followups.is_empty())
    }

    pub fn iterative_record(&self) -> IterativeRecord<Real> {
        IterativeRecord {
            initial: self.initial_probs(),
            followups: self
                .responses
                .iter()
                .map(|r| r.followups.iter().map(|f| f.prob.clone()).collect())
                .collect(),
        }
    }
}

fn candidate(id: String, source: String, logprob: f64, tokens: u32, at: &str) -> Result<Candidate, String> {
    if id.is_empty() {
        return Err(format!("{at}.id: empty id"));
    }
    if tokens == 0 {
        return Err(format!("{at}.tokens: must be at least 1"));
    }
    if !logprob.is_finite() {
        return Err(format!("{at}.logprob: not finite"));
    }
    Ok(Candidate {
        prob: ResponseProb::new(id.clone(), logprob, tokens),
        snippet: SourceSnippet::new(id, source),
    })
}

fn convert(raw: RawDataset) -> Result<Vec<ProblemRecord>, String> {
    let mut problem_ids = HashSet::new();
    let mut out = Vec::with_capacity(raw.problems.len());
    for (pi, p) in raw.problems.into_iter().enumerate() {
        let at = format!("problems[{pi}]");
        if p.id.is_empty() {
            return Err(format!("{at}.id: empty id"));
        }
        if !problem_ids.insert(p.id.clone()) {
            return Err(format!("{at}.id: duplicate problem id `{}`", p.id));
        }
        let entry = EntrySignature {
            name: p.entry.name,
            params: p.entry.params.into_iter().map(|q| (q.name, q.ty)).collect(),
            ret: p.entry.ret,
        };
        if p.responses.is_empty() {
            return Err(format!("{at}.responses: at least one response is required"));
        }
        let mut ids = HashSet::new();
        let mut responses = Vec::with_capacity(p.responses.len());
        for (ri, r) in p.responses.into_iter().enumerate() {
            let rat = format!("{at}.responses[{ri}]");
            if !ids.insert(r.id.clone()) {
                return Err(format!("{rat}.id: duplicate response id `{}`", r.id));
            }
            let mut followups = Vec::with_capacity(r.followups.len());
            for (fi, f) in r.followups.into_iter().enumerate() {
                let fat = format!("{rat}.followups[{fi}]");
                if !ids.insert(f.id.clone()) {
                    return Err(format!("{fat}.id: duplicate response id `{}`", f.id));
                }
                followups.push(candidate(f.id, f.source, f.logprob, f.tokens, &fat)?);
            }
            responses.push(Response {
                candidate: candidate(r.id, r.source, r.logprob, r.tokens, &rat)?,
                followups,
            });
        }
        if !responses.iter().any(|r| r.candidate.snippet.id == p.top_ranked) {
            return Err(format!("{at}.top_ranked: `{}` is not a response id", p.top_ranked));
        }
        if p.tests.is_empty() {
            return Err(format!("{at}.tests: at least one test is required"));
        }
        let types = entry.param_types();
        let mut tests = Vec::with_capacity(p.tests.len());
        for (ti, t) in p.tests.into_iter().enumerate() {
            let tat = format!("{at}.tests[{ti}]");
            let inputs = inputs_from_json(&t.input, &types).map_err(|e| format!("{tat}.input: {e}"))?;
            let expected = Value::from_json(&t.expected, entry.ret).map_err(|e| format!("{tat}.expected: {e}"))?;
            tests.push(TestCase { inputs, expected });
        }
        out.push(ProblemRecord {
            id: p.id,
            entry,
            responses,
            tests,
            top_ranked: p.top_ranked,
            difficulty: p.difficulty,
        });
    }
    Ok(out)
}

/// Parses a dataset document. `origin` names the source in errors.
pub fn parse_dataset(text: &str, origin: &str) -> Result<Vec<ProblemRecord>> {
    let load_err = |message: String| Error::Load {
        path: origin.to_string(),
        message,
    };
    let de = &mut serde_json::Deserializer::from_str(text);
    let raw: RawDataset = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        load_err(format!("{path}: {}", e.inner()))
    })?;
    convert(raw).map_err(load_err)
}

pub fn load_dataset(path: &Path) -> Result<Vec<ProblemRecord>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Load {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_dataset(&text, &path.display().to_string())
}
