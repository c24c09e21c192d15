//! Acceptance suite. Prints one `PASS`/`FAIL` line per criterion and exits
//! nonzero if any gating criterion fails.
//!
//! Criterion 10 runs only when `PCAPASS_ARXIV_DIR` names a dataset directory.

use std::collections::BTreeMap;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use pcapass::embed::embed_with;
use pcapass::eval::{
    cross_entropy, fit_classifier, oversmoothing_sweep, pearson_correlation, random_search,
    v_measure, HpoSummary, SearchSpace, SweepConfig,
};
use pcapass::graph::{prepare, EdgeList};
use pcapass::pca::pca_inverse_transform;
use pcapass::{
    aggregate, embed, explained_variance_ratio, gbdt_predict, gbdt_predict_proba, gbdt_train,
    generate_sbm, load_dataset, pca_fit, pca_transform, Aggregator, EmbedConfig, FeatureMatrix,
    GbdtParams, Method, SbmParams,
};
use pcapass_testkit::{self as tk, Agg, Dense};
use rand::Rng;

const FIXTURE_SEEDS: [u64; 5] = [7, 8, 9, 10, 11];

type Criterion = (u32, &'static str, u64, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn fm(d: &Dense) -> FeatureMatrix {
    FeatureMatrix::from_rows(d).unwrap()
}

fn dense(m: &FeatureMatrix) -> Dense {
    m.iter_rows().map(<[f64]>::to_vec).collect()
}

fn fixture(seed: u64) -> SbmParams {
    SbmParams {
        n_nodes: 2000,
        n_classes: 4,
        p_in: 0.05,
        p_out: 0.005,
        n_features: 16,
        feature_signal: 1.0,
        seed,
        ..SbmParams::default()
    }
}

fn pair(i: usize) -> (Aggregator, Agg) {
    if i.is_multiple_of(2) {
        (Aggregator::Mean, Agg::Mean)
    } else {
        (Aggregator::SymNorm, Agg::SymNorm)
    }
}

fn pipeline_oracle() -> Outcome {
    let mut rng = tk::rng(101);
    let mut worst: f64 = 0.0;
    for case in 0..100 {
        let n = rng.random_range(2..=30);
        let f = rng.random_range(1..=8);
        let k = rng.random_range(1..=4);
        let d = rng.random_range(1..=8);
        let (agg, oracle) = pair(case);
        let p = rng.random_range(0.0..0.4);
        let edges = tk::random_edges(&mut rng, n, p);
        let x = tk::random_matrix(&mut rng, n, f);
        let g = prepare(&EdgeList::new(n, edges.clone()).unwrap());
        let cfg = EmbedConfig {
            hops: k,
            dim: d,
            aggregator: agg,
            method: Method::PcaPass,
        };
        let mut got = Vec::new();
        embed_with(&g, &fm(&x), &cfg, |_, h| {
            got.push(dense(h));
            Ok(())
        })
        .unwrap();
        let want = tk::pcapass_hops(n, &edges, &x, k, d, oracle);
        if got.len() != want.len() {
            return outcome(
                false,
                format!("case {case}: {} hops vs {}", got.len(), want.len()),
            );
        }
        for (a, b) in got.iter().zip(&want) {
            worst = worst.max(tk::max_abs_diff(a, b));
        }
    }
    outcome(
        worst <= 1e-8,
        format!("max hop-wise error {worst:.2e} over 100 instances (tol 1e-8)"),
    )
}

fn aggregator_oracle() -> Outcome {
    let mut rng = tk::rng(202);
    let mut worst: f64 = 0.0;
    for case in 0..100 {
        let n = rng.random_range(1..=50);
        let f = rng.random_range(1..=6);
        let (agg, oracle) = pair(case);
        let p = rng.random_range(0.0..0.3);
        let edges = tk::random_edges(&mut rng, n, p);
        let x = tk::random_matrix(&mut rng, n, f);
        let g = prepare(&EdgeList::new(n, edges.clone()).unwrap());
        let want = tk::matmul(
            &tk::propagation_matrix(&tk::prepared_adjacency(n, &edges), oracle),
            &x,
        );
        let got = dense(&aggregate(&g, &fm(&x), agg).unwrap());
        worst = worst.max(tk::max_abs_diff(&got, &want));
    }
    outcome(
        worst <= 1e-10,
        format!("max error {worst:.2e} over 100 graphs (tol 1e-10)"),
    )
}

fn pca_spectral() -> Outcome {
    let mut rng = tk::rng(303);
    let (mut ortho, mut eig, mut recon): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for _ in 0..50 {
        let f = rng.random_range(1..=10);
        let n = rng.random_range(f.max(2)..=60);
        let x = tk::random_matrix(&mut rng, n, f);
        let m = pca_fit(&fm(&x), f).unwrap();
        let c = m.components();
        for a in 0..c.rows() {
            for b in 0..c.rows() {
                let dot: f64 = c.row(a).iter().zip(c.row(b)).map(|(p, q)| p * q).sum();
                ortho = ortho.max((dot - if a == b { 1.0 } else { 0.0 }).abs());
            }
        }
        let (vals, _) = tk::jacobi_eigen(&tk::covariance(&x));
        for (got, want) in m.eigenvalues().iter().zip(&vals) {
            eig = eig.max((got - want.max(0.0)).abs());
        }
        let back = pca_inverse_transform(&m, &pca_transform(&m, &fm(&x)).unwrap()).unwrap();
        recon = recon.max(back.max_abs_diff(&fm(&x)));
    }
    let diag: Dense = (1..=5).map(|t| vec![t as f64, t as f64]).collect();
    let ratio = explained_variance_ratio(&pca_fit(&fm(&diag), 2).unwrap());
    let pass = ortho <= 1e-8 && eig <= 1e-8 && recon <= 1e-8 && (ratio[0] - 1.0).abs() <= 1e-12;
    outcome(
        pass,
        format!(
            "orthonormality {ortho:.2e}, eigenvalues {eig:.2e}, reconstruction {recon:.2e}, rank-1 ratio {:.12}",
            ratio[0]
        ),
    )
}

fn end_to_end_lift() -> Outcome {
    let mut wins = 0;
    let mut parts = Vec::new();
    for seed in FIXTURE_SEEDS {
        let ds = generate_sbm(&fixture(seed)).unwrap();
        let params = GbdtParams {
            seed,
            ..GbdtParams::default()
        };
        let (_, raw) = fit_classifier(&ds, &ds.features, &params).unwrap();
        let cfg = EmbedConfig {
            hops: 8,
            dim: 16,
            aggregator: Aggregator::Mean,
            method: Method::PcaPass,
        };
        let e = embed(&ds.graph, &ds.features, &cfg).unwrap();
        let (_, emb) = fit_classifier(&ds, &e.embeddings, &params).unwrap();
        let lift = emb.test_accuracy - raw.test_accuracy;
        if lift >= 0.10 {
            wins += 1;
        }
        parts.push(format!(
            "s{seed} {:.3}->{:.3}",
            raw.test_accuracy, emb.test_accuracy
        ));
    }
    outcome(
        wins >= 3,
        format!("{wins}/5 seeds lift >= 10 points [{}]", parts.join(", ")),
    )
}

fn oversmoothing() -> Outcome {
    let mut wins = 0;
    let mut parts = Vec::new();
    for seed in FIXTURE_SEEDS {
        let ds = generate_sbm(&fixture(seed)).unwrap();
        let cfg = SweepConfig {
            methods: vec![Method::PcaPass, Method::MessagePassing],
            max_hops: 30,
            seed,
            ..SweepConfig::default()
        };
        let r = oversmoothing_sweep(&ds.graph, &ds.features, &ds.labels, &cfg).unwrap();
        let (pp, mp) = (&r[0], &r[1]);
        let ok = pp.best_hops >= mp.best_hops && pp.raw[29] >= mp.raw[29];
        wins += usize::from(ok);
        parts.push(format!(
            "s{seed} argmax {}/{} v@30 {:.3}/{:.3}",
            pp.best_hops, mp.best_hops, pp.raw[29], mp.raw[29]
        ));
    }
    outcome(
        wins >= 3,
        format!(
            "{wins}/5 seeds (pcapass/message_passing) [{}]",
            parts.join("; ")
        ),
    )
}

fn generalization() -> Outcome {
    let ds = generate_sbm(&fixture(7)).unwrap();
    let space = SearchSpace {
        method: Method::PcaPass,
        ..SearchSpace::default()
    };
    let records = random_search(&space, 50, 7, &ds).unwrap();
    let s = HpoSummary::from_records(&records);
    match s.pearson_r {
        Some(r) => outcome(
            r <= -0.5,
            format!(
                "pearson r = {r:.4} over {} runs ({} failed); best-by-valid test acc {:.3}, max {:.3}",
                s.n_runs, s.n_failed, s.best_test_accuracy, s.max_test_accuracy
            ),
        ),
        None => outcome(false, "correlation undefined"),
    }
}

fn gbdt_contracts() -> Outcome {
    let mut rng = tk::rng(707);
    let mut problems = Vec::new();

    let xor = |rng: &mut tk::TestRng, n: usize| {
        let rows: Dense = (0..n)
            .map(|_| vec![rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)])
            .collect();
        let y: Vec<usize> = rows
            .iter()
            .map(|r| usize::from((r[0] > 0.0) != (r[1] > 0.0)))
            .collect();
        (fm(&rows), y)
    };
    let (xt, yt) = xor(&mut rng, 600);
    let (xv, yv) = xor(&mut rng, 300);
    let m = gbdt_train(
        &xt,
        &yt,
        &xv,
        &yv,
        &GbdtParams {
            max_depth: 2,
            n_rounds: 200,
            ..GbdtParams::default()
        },
    )
    .unwrap();
    let xor_acc = pcapass::eval::accuracy(&gbdt_predict(&m, &xt).unwrap(), &yt).unwrap();
    if xor_acc < 0.95 {
        problems.push(format!("xor train acc {xor_acc:.3}"));
    }

    let blobs = |rng: &mut tk::TestRng, per: usize| {
        let centers = [[0.0, 0.0], [6.0, 0.0], [0.0, 6.0]];
        let mut rows = Vec::new();
        let mut y = Vec::new();
        for (c, ctr) in centers.iter().enumerate() {
            for _ in 0..per {
                // sum of 12 uniforms approximates a unit normal
                let mut z = || (0..12).map(|_| rng.random::<f64>()).sum::<f64>() - 6.0;
                let (dx, dy) = (z(), z());
                rows.push(vec![ctr[0] + dx, ctr[1] + dy]);
                y.push(c);
            }
        }
        (fm(&rows), y)
    };
    let (bt, byt) = blobs(&mut rng, 200);
    let (bv, byv) = blobs(&mut rng, 100);
    let m = gbdt_train(&bt, &byt, &bv, &byv, &GbdtParams::default()).unwrap();
    let blob_acc = pcapass::eval::accuracy(&gbdt_predict(&m, &bv).unwrap(), &byv).unwrap();
    if blob_acc < 0.98 {
        problems.push(format!("blob valid acc {blob_acc:.3}"));
    }
    let p = gbdt_predict_proba(&m, &bv).unwrap();
    let sum_err = p
        .iter_rows()
        .map(|r| (r.iter().sum::<f64>() - 1.0).abs())
        .fold(0.0, f64::max);
    if sum_err > 1e-9 {
        problems.push(format!("probability rows off by {sum_err:.2e}"));
    }

    // random labels: validation loss stops improving early
    let noisy = |rng: &mut tk::TestRng, n: usize| {
        let x = fm(&tk::random_matrix(rng, n, 4));
        let y: Vec<usize> = (0..n).map(|_| rng.random_range(0..3)).collect();
        (x, y)
    };
    let (nt, nyt) = noisy(&mut rng, 300);
    let (nv, nyv) = noisy(&mut rng, 150);
    for patience in [1, 5, 10] {
        let params = GbdtParams {
            patience,
            ..GbdtParams::default()
        };
        let m = gbdt_train(&nt, &nyt, &nv, &nyv, &params).unwrap();
        let h = m.valid_history();
        let argmin = (0..h.len()).fold(0, |b, r| if h[r] < h[b] { r } else { b });
        if m.rounds_trained() != m.best_round() + patience || m.rounds_trained() >= params.n_rounds
        {
            problems.push(format!(
                "patience {patience}: trained {} best {}",
                m.rounds_trained(),
                m.best_round()
            ));
        }
        let ce = cross_entropy(&gbdt_predict_proba(&m, &nv).unwrap(), &nyv).unwrap();
        if m.best_round() != argmin || m.rounds().len() != argmin || (ce - h[argmin]).abs() > 1e-12
        {
            problems.push(format!(
                "patience {patience}: best-round bookkeeping mismatch"
            ));
        }
    }
    outcome(
        problems.is_empty(),
        if problems.is_empty() {
            format!("xor {xor_acc:.3}, blobs {blob_acc:.3}, proba sum err {sum_err:.1e}, early stop exact")
        } else {
            problems.join("; ")
        },
    )
}

fn run_all_commands(bin: &str, dir: &Path, threads: usize) -> Result<(), String> {
    let steps: [&[&str]; 6] = [
        &["gen"],
        &["embed"],
        &["train"],
        &["eval"],
        &["sweep"],
        &["hpo", "--set", "hpo_runs=12"],
    ];
    for step in steps {
        let out = Command::new(bin)
            .args(step)
            .args(["--seed", "7", "--threads", &threads.to_string(), "--out"])
            .arg(dir)
            .output()
            .map_err(|e| e.to_string())?;
        if !out.status.success() {
            return Err(format!(
                "{step:?} failed: {}",
                String::from_utf8_lossy(&out.stderr).trim()
            ));
        }
    }
    Ok(())
}

fn read_dir(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                std::fs::read(e.path()).unwrap(),
            )
        })
        .collect()
}

fn numeric_agree(a: &[u8], b: &[u8], rel: f64) -> bool {
    let (Ok(a), Ok(b)) = (std::str::from_utf8(a), std::str::from_utf8(b)) else {
        return false;
    };
    let split = |s: &str| -> Vec<String> {
        s.split(|c: char| c.is_whitespace() || ",:[]{}\"".contains(c))
            .filter(|t| !t.is_empty())
            .map(str::to_string)
            .collect()
    };
    let (ta, tb) = (split(a), split(b));
    ta.len() == tb.len()
        && ta
            .iter()
            .zip(&tb)
            .all(|(x, y)| match (x.parse::<f64>(), y.parse::<f64>()) {
                (Ok(p), Ok(q)) => p == q || (p - q).abs() <= rel * p.abs().max(q.abs()),
                _ => x == y,
            })
}

fn determinism() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_pcapass");
    let root = tempfile::tempdir().unwrap();
    let dirs: Vec<_> = ["a", "b", "c"]
        .iter()
        .map(|d| root.path().join(d))
        .collect();
    for (dir, threads) in dirs.iter().zip([1, 1, 4]) {
        if let Err(e) = run_all_commands(bin, dir, threads) {
            return outcome(false, e);
        }
    }
    let (a, b, c) = (read_dir(&dirs[0]), read_dir(&dirs[1]), read_dir(&dirs[2]));
    if a.keys().ne(b.keys()) || a.keys().ne(c.keys()) {
        return outcome(false, "output file sets differ");
    }
    let differ: Vec<&String> = a.keys().filter(|k| a[*k] != b[*k]).collect();
    if !differ.is_empty() {
        return outcome(false, format!("--threads 1 reruns differ in {differ:?}"));
    }
    let mut identical = 0;
    for (name, bytes) in &a {
        if *bytes == c[name] {
            identical += 1;
        } else if !numeric_agree(bytes, &c[name], 1e-8) {
            return outcome(false, format!("{name} differs between 1 and 4 threads"));
        }
    }
    outcome(
        true,
        format!("{} files byte-identical across reruns; {identical} byte-identical at 4 threads, rest within 1e-8", a.len()),
    )
}

fn metric_units() -> Outcome {
    let perfect = v_measure(&[0, 0, 1, 1, 2], &[2, 2, 0, 0, 1]).unwrap();
    let degenerate = v_measure(&[0, 0, 1, 1], &[0, 0, 0, 0]).unwrap();
    let independent = v_measure(&[0, 0, 1, 1], &[0, 1, 0, 1]).unwrap();
    let mut ce_err: f64 = 0.0;
    for c in 2..=10 {
        let p = FeatureMatrix::from_vec(c, c, vec![1.0 / c as f64; c * c]).unwrap();
        let truth: Vec<usize> = (0..c).collect();
        ce_err = ce_err.max((cross_entropy(&p, &truth).unwrap() - (c as f64).ln()).abs());
    }
    let mut rng = tk::rng(909);
    let mut affine: f64 = 0.0;
    for _ in 0..100 {
        let n = rng.random_range(3..50);
        let xs: Vec<f64> = (0..n).map(|_| rng.random_range(-10.0..10.0)).collect();
        let ys: Vec<f64> = xs
            .iter()
            .map(|x| x + rng.random_range(-10.0..10.0))
            .collect();
        let (a, b) = (rng.random_range(0.1..10.0), rng.random_range(-10.0..10.0));
        let r0 = pearson_correlation(&xs, &ys).unwrap();
        let xt: Vec<f64> = xs.iter().map(|x| a * x + b).collect();
        let yt: Vec<f64> = ys.iter().map(|y| a * y - b).collect();
        affine = affine.max((pearson_correlation(&xt, &ys).unwrap() - r0).abs());
        affine = affine.max((pearson_correlation(&xs, &yt).unwrap() - r0).abs());
    }
    let pass = (perfect - 1.0).abs() <= 1e-12
        && degenerate.abs() <= 1e-12
        && independent.abs() <= 1e-12
        && ce_err <= 1e-12
        && affine <= 1e-12;
    outcome(
        pass,
        format!(
            "v perfect {perfect}, degenerate {degenerate}, independent {independent:.1e}; CE ln C err {ce_err:.1e}; pearson affine err {affine:.1e}"
        ),
    )
}

fn arxiv_stretch(dir: &str) -> Outcome {
    let ds = match load_dataset(dir) {
        Ok(ds) => ds,
        Err(e) => return outcome(false, format!("cannot load {dir}: {e}")),
    };
    let cfg = EmbedConfig {
        hops: 13,
        dim: 64,
        aggregator: Aggregator::Mean,
        method: Method::PcaPass,
    };
    let e = embed(&ds.graph, &ds.features, &cfg).unwrap();
    let (_, m) = fit_classifier(&ds, &e.embeddings, &GbdtParams::default()).unwrap();
    outcome(
        m.test_accuracy >= 0.69,
        format!("test accuracy {:.4}", m.test_accuracy),
    )
}

fn main() {
    let criteria: [Criterion; 9] = [
        (1, "pipeline oracle equivalence", 10, pipeline_oracle),
        (2, "aggregator oracle equivalence", 5, aggregator_oracle),
        (3, "PCA spectral suite", 5, pca_spectral),
        (4, "end-to-end lift", 180, end_to_end_lift),
        (5, "over-smoothing analog", 300, oversmoothing),
        (6, "generalization analog", 900, generalization),
        (7, "GBDT contracts", 60, gbdt_contracts),
        (8, "determinism", 120, determinism),
        (9, "metric unit suite", 1, metric_units),
    ];
    let mut failed = 0;
    for (id, name, budget, run) in criteria {
        let start = Instant::now();
        let mut o = run();
        let elapsed = start.elapsed();
        if elapsed > Duration::from_secs(budget) {
            o.pass = false;
            o.detail.push_str(&format!("; over {budget} s budget"));
        }
        failed += usize::from(!o.pass);
        println!(
            "{} criterion {id} {name}: {} ({:.2} s)",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            elapsed.as_secs_f64()
        );
    }
    match std::env::var("PCAPASS_ARXIV_DIR") {
        Ok(dir) => {
            let start = Instant::now();
            let o = arxiv_stretch(&dir);
            println!(
                "{} criterion 10 stretch ogbn-arxiv (not gating): {} ({:.1} s)",
                if o.pass { "PASS" } else { "FAIL" },
                o.detail,
                start.elapsed().as_secs_f64()
            );
        }
        Err(_) => {
            println!("SKIP criterion 10 stretch ogbn-arxiv (not gating): PCAPASS_ARXIV_DIR unset")
        }
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
