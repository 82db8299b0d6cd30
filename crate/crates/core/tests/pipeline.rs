//! Dataset loading, scoring and evaluation on the bundled datasets.

use std::collections::BTreeSet;
use std::path::PathBuf;

use semclust::cluster::{cluster, ClusterOptions};
use semclust::eval::{
    evaluate_dataset, load_dataset, score_dataset, score_problem, top_correctness, EvaluateOptions, ProblemRecord,
    ScoreOptions,
};
use semclust::interp::DEFAULT_STEP_BUDGET;
use semclust::lang::parse;
use semclust::metrics::Metric;
use semclust::symexec::{brute_force_equivalence, EquivVerdict, InputDomain};
use semclust::Error;

fn dataset(name: &str) -> Vec<ProblemRecord> {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/datasets").join(name);
    load_dataset(&path).unwrap()
}

fn options(metric: Metric) -> ScoreOptions {
    ScoreOptions {
        metric,
        ..ScoreOptions::default()
    }
}

fn problem<'a>(ps: &'a [ProblemRecord], id: &str) -> &'a ProblemRecord {
    ps.iter().find(|p| p.id == id).unwrap()
}

#[test]
fn equivalent_snippets_carry_no_uncertainty() {
    let ps = dataset("fixture.json");
    let good = problem(&ps, "2892");
    for metric in [Metric::SeNorm, Metric::SeUniform] {
        let r = score_problem(good, &options(metric)).unwrap();
        assert_eq!(r.score, 0.0, "{metric}");
        assert_eq!(r.cluster_count, 1);
    }
    assert_eq!(top_correctness(good, DEFAULT_STEP_BUDGET).unwrap(), 1.0);
}

#[test]
fn cluster_counts_on_the_fixture() {
    let ps = dataset("fixture.json");
    let report = score_dataset(&ps, &options(Metric::ClusterCount)).unwrap();
    let counts: Vec<(&str, f64)> = report.problems.iter().map(|p| (p.problem_id.as_str(), p.score)).collect();
    assert_eq!(
        counts,
        vec![
            ("2892", 1.0),
            ("abs-mixed", 3.0),
            ("sign-five", 5.0),
            ("double-identical", 1.0),
            ("sum-invalid-top", 2.0),
            ("fact-mixed", 2.0)
        ]
    );
    let mixed = &report.problems[1].clustering;
    assert_eq!(mixed.invalid.len(), 1);
    assert_eq!(mixed.invalid[0].id, "d");
    assert_eq!(report.problems[4].correctness, 0.0);
}

#[test]
fn mutual_information_requires_followups() {
    let ps = dataset("fixture.json");
    let err = score_dataset(&ps, &options(Metric::MiNorm)).unwrap_err();
    assert!(matches!(err, Error::Usage(ref m) if m.contains("follow-up")), "{err}");
    // the problem that has them scores fine and, being one cluster, carries no information
    let r = score_problem(problem(&ps, "2892"), &options(Metric::MiNorm)).unwrap();
    assert!(r.score.abs() < 1e-9);
}

#[test]
fn synthetic_clusters_match_the_oracle() {
    // brute-force partition of each problem's initial responses
    let dom = InputDomain::default();
    for p in dataset("synthetic.json") {
        let snippets = p.initial_snippets();
        let progs: Vec<_> = snippets.iter().map(|s| parse(s).program().cloned().unwrap()).collect();
        let mut oracle: Vec<BTreeSet<String>> = Vec::new();
        'outer: for (s, prog) in snippets.iter().zip(&progs) {
            for class in oracle.iter_mut() {
                let rep = snippets.iter().position(|t| class.contains(&t.id)).unwrap();
                if brute_force_equivalence(prog, &progs[rep], dom, DEFAULT_STEP_BUDGET).unwrap() == EquivVerdict::Equivalent {
                    class.insert(s.id.clone());
                    continue 'outer;
                }
            }
            oracle.push(BTreeSet::from([s.id.clone()]));
        }
        let c = cluster(&snippets, &ClusterOptions::default()).unwrap();
        let mut got: Vec<BTreeSet<String>> = c.clusters.iter().map(|k| k.iter().cloned().collect()).collect();
        got.sort();
        oracle.sort();
        assert_eq!(got, oracle, "problem {}", p.id);
    }
}

#[test]
fn synthetic_uncertainty_tracks_correctness() {
    let ps = dataset("synthetic.json");
    let report = evaluate_dataset(&ps, &options(Metric::SeUniform), &EvaluateOptions::default()).unwrap();
    assert_eq!(report.summary.n, 24);
    assert!(report.summary.r < -0.3, "r = {}", report.summary.r);
    assert!(report.summary.p_value < 0.05, "p = {}", report.summary.p_value);
}

#[test]
fn reports_do_not_depend_on_the_worker_count() {
    let ps = dataset("synthetic.json");
    let eval = EvaluateOptions {
        per_class: true,
        ..EvaluateOptions::default()
    };
    let one = evaluate_dataset(&ps, &ScoreOptions { jobs: 1, ..options(Metric::SeNorm) }, &eval).unwrap();
    let four = evaluate_dataset(&ps, &ScoreOptions { jobs: 4, ..options(Metric::SeNorm) }, &eval).unwrap();
    assert_eq!(serde_json::to_string(&one).unwrap(), serde_json::to_string(&four).unwrap());
    assert_eq!(one.summary.per_class.as_ref().unwrap().len(), 3);
}

#[test]
fn constant_scores_are_rejected() {
    let ps = dataset("fixture.json");
    let mut report = score_dataset(&ps, &options(Metric::SeUniform)).unwrap();
    for p in &mut report.problems {
        p.score = 0.25;
    }
    let err = semclust::eval::evaluate_scores(report, Metric::SeUniform, &EvaluateOptions::default()).unwrap_err();
    assert!(matches!(err, Error::UndefinedCorrelation(_)), "{err}");
}
