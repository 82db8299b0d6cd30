//! Partitioning snippets into behavioural equivalence classes.
//!
//! Snippets are visited in id order; each pair not already connected is
//! checked and merged on `Equivalent` (or on `Inconclusive` under the merge
//! policy). Invalid snippets stay alone. Merges are transitive even when a
//! bounded check disagrees, in which case the disagreement is reported as a
//! conflict.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::interp::format_inputs;
use crate::lang::{parse, Program, Signature, SourceSnippet, ValidationVerdict};
use crate::symexec::{check_equivalence, EquivConfig, EquivVerdict};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InconclusivePolicy {
    /// Treat an inconclusive pair as equivalent.
    #[default]
    Merge,
    Separate,
}

impl FromStr for InconclusivePolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "merge" => Ok(InconclusivePolicy::Merge),
            "separate" => Ok(InconclusivePolicy::Separate),
            other => Err(Error::Usage(format!("unknown inconclusive policy `{other}` (merge|separate)"))),
        }
    }
}

impl fmt::Display for InconclusivePolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InconclusivePolicy::Merge => "merge",
            InconclusivePolicy::Separate => "separate",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairVerdict {
    pub a: String,
    pub b: String,
    pub verdict: EquivVerdict,
}

/// A non-equivalent pair that ended up in one cluster through other merges.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Conflict {
    pub a: String,
    pub b: String,
    pub counterexample: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ClusterSet {
    /// Clusters sorted by their smallest id; members sorted.
    pub clusters: Vec<Vec<String>>,
    /// Verdicts of the pairs that were actually checked, in check order.
    pub pair_log: Vec<PairVerdict>,
    pub conflicts: Vec<Conflict>,
    /// Invalid snippets with the reason.
    pub invalid: Vec<(String, String)>,
}

impl ClusterSet {
    /// Index of the cluster containing `id`.
    pub fn cluster_of(&self, id: &str) -> Option<usize> {
        self.clusters.iter().position(|c| c.iter().any(|m| m == id))
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.clusters.iter().flatten().map(String::as_str)
    }

    /// Multiset of cluster sizes, descending.
    pub fn sizes(&self) -> Vec<usize> {
        let mut s: Vec<usize> = self.clusters.iter().map(Vec::len).collect();
        s.sort_unstable_by(|a, b| b.cmp(a));
        s
    }

    /// Builds a cluster set from an explicit partition (no checks recorded).
    pub fn from_partition(clusters: Vec<Vec<String>>) -> Self {
        let mut clusters: Vec<Vec<String>> = clusters
            .into_iter()
            .filter(|c| !c.is_empty())
            .map(|mut c| {
                c.sort();
                c
            })
            .collect();
        clusters.sort();
        ClusterSet {
            clusters,
            ..Default::default()
        }
    }
}

pub fn cluster_count(c: &ClusterSet) -> usize {
    c.clusters.len()
}

pub struct UnionFind {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl UnionFind {
    pub fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
        true
    }

    pub fn connected(&mut self, a: usize, b: usize) -> bool {
        self.find(a) == self.find(b)
    }
}

#[derive(Clone, Debug, Default)]
pub struct ClusterOptions {
    pub equiv: EquivConfig,
    pub policy: InconclusivePolicy,
    /// Signature every valid snippet must have; snippets with another one
    /// are isolated like invalid ones. Defaults to the first valid snippet's.
    pub signature: Option<Signature>,
}

/// Groups `snippets` into equivalence classes.
pub fn cluster(snippets: &[SourceSnippet], opts: &ClusterOptions) -> Result<ClusterSet> {
    let mut order: Vec<&SourceSnippet> = snippets.iter().collect();
    order.sort_by(|a, b| a.id.cmp(&b.id));
    let mut seen = HashSet::new();
    for s in &order {
        if !seen.insert(s.id.as_str()) {
            return Err(Error::Usage(format!("duplicate snippet id `{}`", s.id)));
        }
    }

    let mut invalid = Vec::new();
    let mut programs: Vec<Option<Program>> = Vec::with_capacity(order.len());
    let mut expected = opts.signature.clone();
    for s in &order {
        match parse(s) {
            ValidationVerdict::Valid(p) => {
                let sig = p.signature();
                let want = expected.get_or_insert_with(|| sig.clone());
                if *want == sig {
                    programs.push(Some(p));
                } else {
                    invalid.push((s.id.clone(), format!("signature {sig} differs from {want}")));
                    programs.push(None);
                }
            }
            ValidationVerdict::Invalid(reason) => {
                invalid.push((s.id.clone(), reason));
                programs.push(None);
            }
        }
    }

    let n = order.len();
    let mut uf = UnionFind::new(n);
    let mut pair_log = Vec::new();
    let mut refuted = Vec::new();
    for i in 0..n {
        let Some(p) = &programs[i] else { continue };
        for j in i + 1..n {
            let Some(q) = &programs[j] else { continue };
            if uf.connected(i, j) {
                continue;
            }
            let verdict = check_equivalence(p, q, &opts.equiv)?;
            let merge = match &verdict {
                EquivVerdict::Equivalent => true,
                EquivVerdict::Inconclusive(_) => opts.policy == InconclusivePolicy::Merge,
                EquivVerdict::NotEquivalent(cx) => {
                    refuted.push((i, j, format_inputs(cx)));
                    false
                }
            };
            if merge {
                uf.union(i, j);
            }
            pair_log.push(PairVerdict {
                a: order[i].id.clone(),
                b: order[j].id.clone(),
                verdict,
            });
        }
    }

    let conflicts = refuted
        .into_iter()
        .filter(|(i, j, _)| uf.connected(*i, *j))
        .map(|(i, j, cx)| Conflict {
            a: order[i].id.clone(),
            b: order[j].id.clone(),
            counterexample: cx,
        })
        .collect();

    let mut groups: Vec<Vec<String>> = Vec::new();
    let mut slot_of_root = vec![usize::MAX; n];
    for (i, s) in order.iter().enumerate() {
        let r = uf.find(i);
        if slot_of_root[r] == usize::MAX {
            slot_of_root[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot_of_root[r]].push(s.id.clone());
    }

    Ok(ClusterSet {
        clusters: groups,
        pair_log,
        conflicts,
        invalid,
    })
}

/// One checked pair in the serialized cluster record.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerdictRecord {
    pub a: String,
    pub b: String,
    pub verdict: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub counterexample: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub reason: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvalidRecord {
    pub id: String,
    pub reason: String,
}

/// Serialized form of a [`ClusterSet`] for one problem.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClusterRecord {
    pub problem_id: String,
    pub clusters: Vec<Vec<String>>,
    pub verdicts: Vec<VerdictRecord>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub invalid: Vec<InvalidRecord>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub conflicts: Vec<VerdictRecord>,
}

impl ClusterRecord {
    pub fn new(problem_id: &str, c: &ClusterSet) -> Self {
        let verdicts = c
            .pair_log
            .iter()
            .map(|pv| {
                let (counterexample, reason) = match &pv.verdict {
                    EquivVerdict::Equivalent => (None, None),
                    EquivVerdict::NotEquivalent(cx) => (Some(format_inputs(cx)), None),
                    EquivVerdict::Inconclusive(why) => (None, Some(why.clone())),
                };
                VerdictRecord {
                    a: pv.a.clone(),
                    b: pv.b.clone(),
                    verdict: pv.verdict.tag().to_string(),
                    counterexample,
                    reason,
                }
            })
            .collect();
        ClusterRecord {
            problem_id: problem_id.to_string(),
            clusters: c.clusters.clone(),
            verdicts,
            invalid: c
                .invalid
                .iter()
                .map(|(id, reason)| InvalidRecord {
                    id: id.clone(),
                    reason: reason.clone(),
                })
                .collect(),
            conflicts: c
                .conflicts
                .iter()
                .map(|k| VerdictRecord {
                    a: k.a.clone(),
                    b: k.b.clone(),
                    verdict: "conflict".into(),
                    counterexample: Some(k.counterexample.clone()),
                    reason: None,
                })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn snip(id: &str, text: &str) -> SourceSnippet {
        SourceSnippet::new(id, text)
    }

    #[test]
    fn identical_snippets_form_one_cluster() {
        let text = "fn f(x: int) -> int { return x + 1; }";
        let s = vec![snip("a", text), snip("b", text), snip("c", text)];
        let c = cluster(&s, &ClusterOptions::default()).unwrap();
        assert_eq!(c.clusters, vec![vec!["a", "b", "c"]]);
        // b and c are already connected through a
        assert_eq!(c.pair_log.len(), 2);
    }

    #[test]
    fn invalid_snippets_are_isolated() {
        let s = vec![
            snip("a", "fn f(x: int) -> int { return x + x; }"),
            snip("b", "fn f(x: int) -> int { return 2 * x; }"),
            snip("c", "fn f(x: int) -> int { return y; }"),
        ];
        let c = cluster(&s, &ClusterOptions::default()).unwrap();
        assert_eq!(c.clusters, vec![vec!["a", "b"], vec!["c"]]);
        assert_eq!(cluster_count(&c), 2);
        assert_eq!(c.invalid.len(), 1);
    }

    #[test]
    fn mismatched_signature_is_isolated() {
        let s = vec![
            snip("a", "fn f(x: int) -> int { return x; }"),
            snip("b", "fn f(x: bool) -> int { return 0; }"),
        ];
        let c = cluster(&s, &ClusterOptions::default()).unwrap();
        assert_eq!(cluster_count(&c), 2);
        assert!(c.invalid[0].1.contains("signature"));
    }

    #[test]
    fn duplicate_ids_rejected() {
        let s = vec![snip("a", "fn f() -> int { return 0; }"), snip("a", "fn f() -> int { return 0; }")];
        assert!(matches!(cluster(&s, &ClusterOptions::default()), Err(Error::Usage(_))));
    }

    #[test]
    fn inconclusive_policy_decides_merging() {
        let s = vec![
            snip("a", "fn f(x: int) -> int { while true { x = x + 1; } return x; }"),
            snip("b", "fn f(x: int) -> int { return x; }"),
        ];
        let merged = cluster(&s, &ClusterOptions::default()).unwrap();
        assert_eq!(cluster_count(&merged), 1);
        let opts = ClusterOptions {
            policy: InconclusivePolicy::Separate,
            ..Default::default()
        };
        assert_eq!(cluster_count(&cluster(&s, &opts).unwrap()), 2);
    }

    #[test]
    fn transitive_merge_logs_conflict() {
        // a ~ b and b ~ c are inconclusive (b diverges), a and c differ
        let s = vec![
            snip("a", "fn f(x: int) -> int { return 0; }"),
            snip("b", "fn f(x: int) -> int { while true { x = x + 1; } return x; }"),
            snip("c", "fn f(x: int) -> int { return 1; }"),
        ];
        let c = cluster(&s, &ClusterOptions::default()).unwrap();
        assert_eq!(cluster_count(&c), 1);
        assert_eq!(c.conflicts.len(), 1);
        assert_eq!((c.conflicts[0].a.as_str(), c.conflicts[0].b.as_str()), ("a", "c"));
    }

    #[test]
    fn union_find_basics() {
        let mut uf = UnionFind::new(4);
        assert!(uf.union(0, 1));
        assert!(uf.union(2, 3));
        assert!(!uf.union(1, 0));
        assert!(!uf.connected(0, 3));
        uf.union(1, 2);
        assert!(uf.connected(0, 3));
    }
}
