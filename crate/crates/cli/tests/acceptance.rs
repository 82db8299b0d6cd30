//! Acceptance suite: one PASS/FAIL line per criterion. Exits nonzero if any fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use semclust::cluster::{cluster, ClusterOptions, ClusterSet};
use semclust::eval::{
    abstention_eval, confusion, evaluate_dataset, fit_with_accuracy, load_dataset, pearson, EvaluateOptions,
    LabeledSample, ScoreOptions, ScoredProblem,
};
use semclust::interp::DEFAULT_STEP_BUDGET;
use semclust::lang::{parse_source, Program, SourceSnippet};
use semclust::metrics::{
    mutual_information, response_distribution, semantic_entropy, uniform_distribution, DistributionMode,
    IterativeRecord, Metric, ResponseDistribution, ResponseProb,
};
use semclust::symexec::{brute_force_equivalence, check_equivalence, EquivConfig, EquivVerdict};

const ENTROPY_TOL: f64 = 1e-9;
const MI_ZERO_TOL: f64 = 1e-9;
const MI_LN2_TOL: f64 = 1e-6;
const GAMMA_STABILITY_TOL: f64 = 1e-6;
const PEARSON_R_TOL: f64 = 1e-9;
const PEARSON_P_EXPECTED: f64 = 0.10404;
const PEARSON_P_TOL: f64 = 1e-4;
/// Two-sided p for r = 0.8, n = 5, from a 50-digit evaluation of the t tail.
const PEARSON_P_REFERENCE: f64 = 0.104_088_038_661_827_86;
const RATES_TOL: f64 = 1e-9;
const CHANCE_TOL: f64 = 0.1;
const CORPUS_LIMIT: Duration = Duration::from_secs(60);
const PIPELINE_LIMIT: Duration = Duration::from_secs(300);

type Check = Result<String, String>;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn program(path: PathBuf) -> Program {
    let text = std::fs::read_to_string(&path).unwrap();
    parse_source(&text).program().cloned().unwrap_or_else(|| panic!("{} is invalid", path.display()))
}

fn corpus(name: &str) -> Program {
    program(fixtures().join("corpus").join(format!("{name}.snip")))
}

fn criterion_1() -> Check {
    let text = std::fs::read_to_string(fixtures().join("corpus/pairs.txt")).unwrap();
    let pairs: Vec<Vec<&str>> = text
        .lines()
        .filter(|l| !l.trim().is_empty() && !l.starts_with('#'))
        .map(|l| l.split_whitespace().collect())
        .collect();
    ensure(pairs.len() >= 40, format!("only {} pairs", pairs.len()))?;
    let names: Vec<&str> = pairs.iter().flat_map(|p| [p[0], p[1]]).collect();
    for g in ["good_sorted", "good_count", "good_max"] {
        ensure(names.contains(&g), format!("{g} missing"))?;
    }
    let mutants = pairs.iter().filter(|p| p[2] == "differ").count();
    ensure(mutants >= 10, format!("only {mutants} near-miss pairs"))?;

    let cfg = EquivConfig::default();
    let start = Instant::now();
    let (mut checked, mut inconclusive, mut disagree) = (0, 0, Vec::new());
    for p in &pairs {
        let (a, b) = (corpus(p[0]), corpus(p[1]));
        let sym = check_equivalence(&a, &b, &cfg).map_err(|e| e.to_string())?;
        let brute = brute_force_equivalence(&a, &b, cfg.domain, DEFAULT_STEP_BUDGET).map_err(|e| e.to_string())?;
        if matches!(sym, EquivVerdict::Inconclusive(_)) {
            inconclusive += 1;
            continue;
        }
        checked += 1;
        if sym != brute {
            disagree.push(format!("{} vs {}: {sym} / {brute}", p[0], p[1]));
        }
    }
    let elapsed = start.elapsed();
    ensure(disagree.is_empty(), format!("disagreements: {disagree:?}"))?;
    ensure(elapsed < CORPUS_LIMIT, format!("took {elapsed:?}"))?;
    Ok(format!(
        "{} pairs ({mutants} near-miss), {checked} decided, {inconclusive} inconclusive, 0 disagreements, {:.2}s",
        pairs.len(),
        elapsed.as_secs_f64()
    ))
}

fn criterion_2() -> Check {
    let snippets: Vec<SourceSnippet> = ["good_sorted", "good_count", "good_max"]
        .iter()
        .map(|n| SourceSnippet::new(*n, std::fs::read_to_string(fixtures().join(format!("corpus/{n}.snip"))).unwrap()))
        .collect();
    let c = cluster(&snippets, &ClusterOptions::default()).map_err(|e| e.to_string())?;
    ensure(c.clusters.len() == 1, format!("{} clusters", c.clusters.len()))?;
    let probs: Vec<ResponseProb<f64>> = snippets
        .iter()
        .zip([0.48f64, 0.29, 0.23])
        .map(|(s, p)| ResponseProb::new(s.id.clone(), p.ln(), 1))
        .collect();
    let norm = semantic_entropy(&c, &response_distribution(&probs, DistributionMode::LengthNormalized).unwrap()).unwrap();
    let uni = semantic_entropy(&c, &response_distribution(&probs, DistributionMode::Uniform).unwrap()).unwrap();
    ensure(norm == 0.0 && uni == 0.0, format!("se-norm {norm}, se-uniform {uni}"))?;
    Ok("1 cluster; se-norm 0.0, se-uniform 0.0".into())
}

fn partition(sizes: &[usize]) -> ClusterSet {
    let mut next = 0;
    ClusterSet::from_partition(
        sizes
            .iter()
            .map(|&s| {
                let c = (next..next + s).map(|i| format!("r{i:03}")).collect();
                next += s;
                c
            })
            .collect(),
    )
}

fn criterion_3() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for case in 0..1000 {
        let sizes: Vec<usize> = (0..rng.gen_range(1..7)).map(|_| rng.gen_range(1..5)).collect();
        let n: usize = sizes.iter().sum();
        let mut w: Vec<f64> = (0..n).map(|_| if rng.gen_bool(0.2) { 0.0 } else { rng.gen::<f64>() }).collect();
        if w.iter().all(|&x| x == 0.0) {
            w[0] = 1.0;
        }
        let z: f64 = w.iter().sum();
        let d = ResponseDistribution {
            probs: w.iter().enumerate().map(|(i, x)| (format!("r{i:03}"), x / z)).collect(),
        };
        let c = partition(&sizes);
        let se = semantic_entropy(&c, &d).unwrap();
        let k = sizes.len() as f64;
        ensure(se >= -ENTROPY_TOL && se <= k.ln() + ENTROPY_TOL, format!("case {case}: SE {se} outside [0, ln {k}]"))?;
        let mut start = 0;
        let live = sizes
            .iter()
            .filter(|&&s| {
                let m: f64 = w[start..start + s].iter().sum();
                start += s;
                m > 0.0
            })
            .count();
        ensure((se.abs() <= ENTROPY_TOL) == (live == 1), format!("case {case}: SE {se} with {live} live clusters"))?;
        // uniform split over k equal clusters is ln k, and grows with k
        let each = sizes[0];
        let ids = |k: usize| (0..k * each).map(|i| format!("r{i:03}")).collect::<Vec<_>>();
        let kk = sizes.len();
        let a: f64 = semantic_entropy(&partition(&vec![each; kk]), &uniform_distribution(&ids(kk)).unwrap()).unwrap();
        let b: f64 = semantic_entropy(&partition(&vec![each; kk + 1]), &uniform_distribution(&ids(kk + 1)).unwrap()).unwrap();
        ensure((a - (kk as f64).ln()).abs() <= ENTROPY_TOL, format!("case {case}: uniform split {a} != ln {kk}"))?;
        ensure(b > a, format!("case {case}: {b} <= {a}"))?;
    }
    Ok("1000 randomized cases within 1e-9".into())
}

fn iterative(initial: &[usize], follow: &[Vec<usize>], logprobs: &[f64]) -> (IterativeRecord<f64>, ClusterSet) {
    let k = 1 + initial.iter().chain(follow.iter().flatten()).max().unwrap();
    let mut clusters = vec![Vec::new(); k];
    let mut rec = IterativeRecord {
        initial: Vec::new(),
        followups: Vec::new(),
    };
    for (i, &c) in initial.iter().enumerate() {
        clusters[c].push(format!("i{i}"));
        rec.initial.push(ResponseProb::new(format!("i{i}"), logprobs[i % logprobs.len()], 1));
        let mut f = Vec::new();
        for (j, &fc) in follow[i].iter().enumerate() {
            clusters[fc].push(format!("i{i}f{j}"));
            f.push(ResponseProb::new(format!("i{i}f{j}"), logprobs[(i + j + 1) % logprobs.len()], 1));
        }
        rec.followups.push(f);
    }
    (rec, ClusterSet::from_partition(clusters))
}

fn criterion_4() -> Check {
    let g = 1e-10;
    let mi = |rec: &IterativeRecord<f64>, c: &ClusterSet, g: f64| {
        mutual_information(rec, c, DistributionMode::LengthNormalized, g, g).unwrap()
    };
    let (rec, c) = iterative(&[0, 0, 0], &[vec![0], vec![0, 0], vec![0]], &[-0.5, -1.5, -2.0]);
    let single = mi(&rec, &c, g);
    ensure(single.abs() <= MI_ZERO_TOL, format!("single cluster MI {single}"))?;
    let (rec, c) = iterative(&[0, 1, 1], &[vec![0, 1], vec![0, 1], vec![0, 1]], &[-1.0]);
    let indep = mi(&rec, &c, g);
    ensure(indep.abs() <= MI_ZERO_TOL, format!("independent MI {indep}"))?;
    let (rec, c) = iterative(&[0, 1], &[vec![0, 0], vec![1, 1]], &[-1.0]);
    let coupled = mi(&rec, &c, g);
    ensure((coupled - 2f64.ln()).abs() <= MI_LN2_TOL, format!("coupled MI {coupled}"))?;

    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut worst = 0f64;
    for _ in 0..500 {
        let n = rng.gen_range(1..5);
        let initial: Vec<usize> = (0..n).map(|_| rng.gen_range(0..3)).collect();
        let follow: Vec<Vec<usize>> = (0..n).map(|_| (0..rng.gen_range(1..4)).map(|_| rng.gen_range(0..3)).collect()).collect();
        let lp: Vec<f64> = (0..4).map(|_| -3.0 * rng.gen::<f64>()).collect();
        let (rec, c) = iterative(&initial, &follow, &lp);
        worst = worst.max((mi(&rec, &c, g) - mi(&rec, &c, g / 10.0)).abs());
    }
    ensure(worst < GAMMA_STABILITY_TOL, format!("gamma sensitivity {worst}"))?;
    Ok(format!(
        "single {single:.1e}, independent {indep:.1e}, coupled ln2{:+.1e}, max |dMI| over gamma/10 {worst:.1e}",
        coupled - 2f64.ln()
    ))
}

fn criterion_5() -> Check {
    let up = pearson(&[1.0f64, 2.0, 3.0], &[2.0, 4.0, 6.0]).unwrap();
    let down = pearson(&[1.0f64, 2.0, 3.0], &[6.0, 4.0, 2.0]).unwrap();
    ensure((up.r - 1.0).abs() <= PEARSON_R_TOL, format!("r = {}", up.r))?;
    ensure((down.r + 1.0).abs() <= PEARSON_R_TOL, format!("r = {}", down.r))?;
    let c = pearson(&[1.0f64, 2.0, 3.0, 4.0, 5.0], &[2.0, 1.0, 4.0, 3.0, 5.0]).unwrap();
    ensure((c.r - 0.8).abs() <= PEARSON_R_TOL, format!("r = {}", c.r))?;
    ensure(
        (c.p_value - PEARSON_P_EXPECTED).abs() <= PEARSON_P_TOL,
        format!("p = {} vs {PEARSON_P_EXPECTED}", c.p_value),
    )?;
    ensure(
        (c.p_value - PEARSON_P_REFERENCE).abs() <= 1e-6,
        format!("p = {} vs reference {PEARSON_P_REFERENCE}", c.p_value),
    )?;
    Ok(format!("r = {:.12}, p = {:.10} (reference {PEARSON_P_REFERENCE:.10})", c.r, c.p_value))
}

fn labeled(name: &str) -> Vec<LabeledSample<f64>> {
    serde_json::from_str(&std::fs::read_to_string(fixtures().join("abstention").join(name)).unwrap()).unwrap()
}

fn as_scored(s: &[LabeledSample<f64>]) -> Vec<ScoredProblem<f64>> {
    s.iter()
        .map(|x| ScoredProblem {
            problem_id: x.problem_id.clone(),
            uncertainty: x.uncertainty,
            correctness: if x.correct { 1.0 } else { 0.0 },
        })
        .collect()
}

fn criterion_6() -> Check {
    let mut folds_checked = 0;
    let mut check_folds = |r: &semclust::Abstention| -> Result<(), String> {
        for f in &r.fold_reports {
            let sum = f.accuracy + f.false_positive_rate + f.false_negative_rate;
            ensure((sum - 1.0).abs() <= RATES_TOL, format!("fold rates sum to {sum}"))?;
            folds_checked += 1;
        }
        Ok(())
    };

    let separable: Vec<ScoredProblem<f64>> = (0..20)
        .map(|i| ScoredProblem {
            problem_id: i.to_string(),
            // two tight groups far apart
            uncertainty: if i < 10 { 0.01 * i as f64 } else { 10.0 + 0.01 * i as f64 },
            correctness: if i < 10 { 1.0 } else { 0.0 },
        })
        .collect();
    let sep = abstention_eval(&separable, 0.9, 2, 0).map_err(|e| e.to_string())?;
    check_folds(&sep)?;
    ensure(sep.accuracy == 1.0, format!("separable accuracy {}", sep.accuracy))?;

    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let chance_data: Vec<ScoredProblem<f64>> = (0..200)
        .map(|i| ScoredProblem {
            problem_id: i.to_string(),
            uncertainty: rng.gen(),
            correctness: if rng.gen_bool(0.5) { 1.0 } else { 0.0 },
        })
        .collect();
    let chance = abstention_eval(&chance_data, 0.9, 2, 0).map_err(|e| e.to_string())?;
    check_folds(&chance)?;
    ensure((chance.accuracy - 0.5).abs() <= CHANCE_TOL, format!("chance accuracy {}", chance.accuracy))?;

    let threshold = labeled("threshold.json");
    let (t, acc) = fit_with_accuracy(&threshold).map_err(|e| e.to_string())?;
    ensure((t - 0.45).abs() < 1e-12 && (acc - 0.9).abs() < 1e-12, format!("threshold fixture: t {t}, accuracy {acc}"))?;
    check_folds(&abstention_eval(&as_scored(&threshold), 0.9, 2, 0).map_err(|e| e.to_string())?)?;

    let adversarial = labeled("adversarial.json");
    let (t, _) = fit_with_accuracy(&adversarial).map_err(|e| e.to_string())?;
    let (a, fp, fn_) = confusion(&adversarial, t);
    ensure(
        (a - 0.75).abs() < 1e-12 && (fp - 0.05).abs() < 1e-12 && (fn_ - 0.20).abs() < 1e-12,
        format!("adversarial fixture: accuracy {a}, FP {fp}, FN {fn_}"),
    )?;
    check_folds(&abstention_eval(&as_scored(&adversarial), 0.9, 2, 0).map_err(|e| e.to_string())?)?;

    Ok(format!(
        "{folds_checked} folds sum to 1; separable 1.0; chance {:.3}; threshold 0.45 @ 0.9; adversarial 0.75/0.05/0.20",
        chance.accuracy
    ))
}

fn criterion_7() -> Check {
    let start = Instant::now();
    let problems = load_dataset(&fixtures().join("datasets/synthetic.json")).map_err(|e| e.to_string())?;
    ensure(problems.len() == 24, format!("{} problems", problems.len()))?;
    ensure(problems.iter().all(|p| p.responses.len() == 5), "every problem needs 5 responses")?;
    let opts = ScoreOptions {
        metric: Metric::SeUniform,
        ..ScoreOptions::default()
    };
    let report = evaluate_dataset(&problems, &opts, &EvaluateOptions::default()).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let (r, p) = (report.summary.r, report.summary.p_value);
    ensure(r < -0.3 && p < 0.05, format!("r = {r}, p = {p}"))?;
    ensure(elapsed < PIPELINE_LIMIT, format!("took {elapsed:?}"))?;
    Ok(format!("r = {r:.4}, p = {p:.2e}, {:.2}s", elapsed.as_secs_f64()))
}

fn criterion_8() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let data = fixtures().join("datasets/synthetic.json");
    let mut reports = Vec::new();
    for (i, jobs) in ["1", "1", "4"].iter().enumerate() {
        let out = dir.path().join(format!("report-{i}.json"));
        let o = Command::new(env!("CARGO_BIN_EXE_semclust"))
            .args(["evaluate", data.to_str().unwrap(), "--seed", "0", "--jobs", jobs, "--out"])
            .arg(&out)
            .output()
            .map_err(|e| e.to_string())?;
        ensure(o.status.success(), String::from_utf8_lossy(&o.stderr).into_owned())?;
        reports.push(std::fs::read(&out).map_err(|e| e.to_string())?);
    }
    ensure(reports[0] == reports[1], "consecutive runs differ")?;
    ensure(reports[0] == reports[2], "--jobs 1 and --jobs 4 differ")?;
    Ok(format!("3 runs byte-identical ({} bytes)", reports[0].len()))
}

type Criterion = (&'static str, fn() -> Check);

fn main() {
    let criteria: [Criterion; 8] = [
        ("oracle equivalence on the corpus", criterion_1),
        ("three equivalent snippets carry zero entropy", criterion_2),
        ("entropy bounds and monotonicity", criterion_3),
        ("mutual information identities", criterion_4),
        ("pearson reference values", criterion_5),
        ("abstention arithmetic", criterion_6),
        ("synthetic benchmark sign check", criterion_7),
        ("deterministic reports", criterion_8),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("criterion {} PASS  {name}: {detail} [{secs:.2}s]", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {} FAIL  {name}: {why} [{secs:.2}s]", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
