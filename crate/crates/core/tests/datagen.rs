use pcapass::eval::fit_classifier;
use pcapass::{generate_sbm, load_dataset, GbdtParams, SbmParams, Split};

fn fixture(seed: u64) -> SbmParams {
    SbmParams {
        seed,
        ..SbmParams::default()
    }
}

#[test]
fn edge_density_within_three_sigma() {
    for (n, classes, p_in, p_out) in [(500, 2, 0.04, 0.01), (800, 4, 0.05, 0.005)] {
        let ds = generate_sbm(&SbmParams {
            n_nodes: n,
            n_classes: classes,
            p_in,
            p_out,
            ..fixture(3)
        })
        .unwrap();
        let (mut within, mut across) = (0.0, 0.0);
        for (u, v) in ds.graph.undirected_edges() {
            if ds.labels[u] == ds.labels[v] {
                within += 1.0;
            } else {
                across += 1.0;
            }
        }
        let mut sizes = vec![0.0f64; classes];
        ds.labels.iter().for_each(|&l| sizes[l] += 1.0);
        let pairs_in: f64 = sizes.iter().map(|s| s * (s - 1.0) / 2.0).sum();
        let pairs_out = n as f64 * (n as f64 - 1.0) / 2.0 - pairs_in;
        for (count, pairs, p) in [(within, pairs_in, p_in), (across, pairs_out, p_out)] {
            let sigma = (pairs * p * (1.0 - p)).sqrt();
            assert!(
                (count - pairs * p).abs() <= 3.0 * sigma,
                "{count} vs {}",
                pairs * p
            );
        }
    }
}

#[test]
fn splits_are_stratified_and_disjoint() {
    let ds = generate_sbm(&fixture(7)).unwrap();
    let total = ds.indices(Split::Train).len()
        + ds.indices(Split::Valid).len()
        + ds.indices(Split::Test).len();
    assert_eq!(total, ds.n_nodes());
    for c in 0..ds.n_classes() {
        let in_class = ds.labels.iter().filter(|&&l| l == c).count() as f64;
        let train = ds
            .labels_at(&ds.indices(Split::Train))
            .iter()
            .filter(|&&l| l == c)
            .count() as f64;
        assert!((train - 0.5 * in_class).abs() <= 1.0);
    }
}

#[test]
fn no_feature_signal_gives_chance_accuracy() {
    let ds = generate_sbm(&SbmParams {
        feature_signal: 0.0,
        ..fixture(21)
    })
    .unwrap();
    let (_, m) = fit_classifier(&ds, &ds.features, &GbdtParams::default()).unwrap();
    // 500 test nodes, chance 0.25, sd about 0.019
    assert!((m.test_accuracy - 0.25).abs() < 0.08, "{}", m.test_accuracy);
}

#[test]
fn saved_dataset_reloads_identically() {
    let ds = generate_sbm(&SbmParams {
        n_nodes: 300,
        ..fixture(2)
    })
    .unwrap();
    let dir = tempfile::tempdir().unwrap();
    ds.save(dir.path()).unwrap();
    let back = load_dataset(dir.path()).unwrap();
    assert_eq!(back.labels, ds.labels);
    assert_eq!(back.split, ds.split);
    assert_eq!(back.graph.col_idx(), ds.graph.col_idx());
    assert!(back.features.max_abs_diff(&ds.features) <= 1e-8 * 10.0);
}
