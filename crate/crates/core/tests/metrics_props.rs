use proptest::prelude::*;
use semclust::cluster::ClusterSet;
use semclust::metrics::{
    mutual_information, semantic_entropy, softmax, uniform_distribution, DistributionMode, IterativeRecord,
    ResponseDistribution, ResponseProb,
};

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        failure_persistence: None,
        ..ProptestConfig::default()
    }
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

fn distribution(weights: &[f64]) -> ResponseDistribution<f64> {
    let z: f64 = weights.iter().sum();
    ResponseDistribution {
        probs: weights.iter().enumerate().map(|(i, w)| (format!("r{i:03}"), w / z)).collect(),
    }
}

fn sizes_and_weights() -> impl Strategy<Value = (Vec<usize>, Vec<f64>)> {
    prop::collection::vec(1usize..5, 1..6).prop_flat_map(|sizes| {
        let n: usize = sizes.iter().sum();
        (Just(sizes), prop::collection::vec(prop_oneof![Just(0.0), 0.01f64..1.0], n))
    })
}

proptest! {
    #![proptest_config(config(256))]

    #[test]
    fn entropy_is_bounded((sizes, mut w) in sizes_and_weights()) {
        if w.iter().all(|&x| x == 0.0) {
            w[0] = 1.0;
        }
        let c = partition(&sizes);
        let d = distribution(&w);
        let se = semantic_entropy(&c, &d).unwrap();
        prop_assert!(se >= 0.0);
        prop_assert!(se <= (sizes.len() as f64).ln() + 1e-9);
        let mut start = 0;
        let live = sizes
            .iter()
            .filter(|&&s| {
                let m: f64 = w[start..start + s].iter().sum();
                start += s;
                m > 0.0
            })
            .count();
        prop_assert_eq!(se == 0.0, live == 1, "se {} with {} live clusters", se, live);
    }

    #[test]
    fn splitting_a_cluster_never_lowers_entropy((sizes, w) in sizes_and_weights(), which in 0usize..6) {
        let k = which % sizes.len();
        prop_assume!(sizes[k] >= 2);
        prop_assume!(w.iter().any(|&x| x > 0.0));
        let mut finer = sizes.clone();
        finer[k] -= 1;
        finer.insert(k + 1, 1);
        let d = distribution(&w);
        let coarse = semantic_entropy(&partition(&sizes), &d).unwrap();
        let fine = semantic_entropy(&partition(&finer), &d).unwrap();
        prop_assert!(fine >= coarse - 1e-12, "{} < {}", fine, coarse);
    }

    #[test]
    fn uniform_split_entropy_grows_with_cluster_count(k in 1usize..12, size in 1usize..4) {
        let ids: Vec<String> = (0..k * size).map(|i| format!("r{i:03}")).collect();
        let d = uniform_distribution::<f64>(&ids).unwrap();
        let se = semantic_entropy(&partition(&vec![size; k]), &d).unwrap();
        prop_assert!((se - (k as f64).ln()).abs() < 1e-9);
        let ids: Vec<String> = (0..(k + 1) * size).map(|i| format!("r{i:03}")).collect();
        let more: f64 = semantic_entropy(&partition(&vec![size; k + 1]), &uniform_distribution(&ids).unwrap()).unwrap();
        prop_assert!(more > se);
    }

    #[test]
    fn softmax_ignores_shifts(v in prop::collection::vec(-50f64..50.0, 1..8), shift in -100f64..100.0) {
        let a = softmax(&v).unwrap();
        let b = softmax(&v.iter().map(|x| x + shift).collect::<Vec<_>>()).unwrap();
        prop_assert!((a.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() < 1e-12);
        }
    }
}

/// Initial responses `i0..`, each with follow-ups `i{k}f{j}`, in the
/// clusters `initial_cluster` / `followup_clusters` name.
fn iterative(initial_cluster: &[usize], followup_clusters: &[Vec<usize>], logprobs: &[f64]) -> (IterativeRecord<f64>, ClusterSet) {
    let k = 1 + initial_cluster
        .iter()
        .chain(followup_clusters.iter().flatten())
        .max()
        .unwrap();
    let mut clusters = vec![Vec::new(); k];
    let mut rec = IterativeRecord {
        initial: Vec::new(),
        followups: Vec::new(),
    };
    for (i, &c) in initial_cluster.iter().enumerate() {
        let id = format!("i{i}");
        clusters[c].push(id.clone());
        rec.initial.push(ResponseProb::new(id, logprobs[i % logprobs.len()], 1));
        let mut f = Vec::new();
        for (j, &fc) in followup_clusters[i].iter().enumerate() {
            let fid = format!("i{i}f{j}");
            clusters[fc].push(fid.clone());
            f.push(ResponseProb::new(fid, logprobs[(i + j + 1) % logprobs.len()], 1));
        }
        rec.followups.push(f);
    }
    (rec, ClusterSet::from_partition(clusters))
}

proptest! {
    #![proptest_config(config(128))]

    #[test]
    fn mutual_information_is_stable_in_gamma(
        init in prop::collection::vec(0usize..3, 1..5),
        follow_seed in prop::collection::vec(prop::collection::vec(0usize..3, 1..4), 5),
        logprobs in prop::collection::vec(-3f64..0.0, 1..6),
    ) {
        let follow: Vec<Vec<usize>> = follow_seed.into_iter().take(init.len()).collect();
        let (rec, c) = iterative(&init, &follow, &logprobs);
        for mode in [DistributionMode::LengthNormalized, DistributionMode::Uniform] {
            let a = mutual_information(&rec, &c, mode, 1e-10, 1e-10).unwrap();
            let b = mutual_information(&rec, &c, mode, 1e-11, 1e-11).unwrap();
            prop_assert!((a - b).abs() < 1e-6);
            prop_assert!(a > -1e-9, "negative MI {}", a);
        }
    }
}

#[test]
fn mutual_information_fixtures() {
    // one cluster: nothing to learn
    let (rec, c) = iterative(&[0, 0], &[vec![0, 0], vec![0]], &[-1.0, -2.0]);
    assert!(mutual_information(&rec, &c, DistributionMode::Uniform, 1e-10, 1e-10).unwrap().abs() < 1e-9);
    // follow-ups ignore what they were conditioned on
    let (rec, c) = iterative(&[0, 1], &[vec![0, 1], vec![0, 1]], &[-1.0]);
    assert!(mutual_information(&rec, &c, DistributionMode::Uniform, 1e-10, 1e-10).unwrap().abs() < 1e-9);
    // follow-ups copy the cluster they were conditioned on
    let (rec, c) = iterative(&[0, 1], &[vec![0, 0], vec![1, 1]], &[-1.0]);
    let mi = mutual_information(&rec, &c, DistributionMode::Uniform, 1e-10, 1e-10).unwrap();
    assert!((mi - 2f64.ln()).abs() < 1e-6, "{mi}");
}
