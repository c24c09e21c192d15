use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use pcapass::eval::{
    fit_classifier, oversmoothing_sweep, random_search, score_model, HpoSummary, SplitMetrics,
};
use pcapass::io::{
    embedding_to_bytes, format_float, matrix_to_csv, read_file, read_matrix_csv, write_atomic,
};
use pcapass::{embed as run_embed, generate_sbm, load_dataset, Dataset, FeatureMatrix, GbdtModel};

use crate::config::{FeatureSource, RunConfig};
use crate::CliError;

type CmdResult = Result<(), CliError>;

fn ensure_dir(dir: &Path) -> CmdResult {
    std::fs::create_dir_all(dir).map_err(|e| pcapass::Error::io(dir, e))?;
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> CmdResult {
    let mut text = serde_json::to_string_pretty(value).expect("plain structs serialize");
    text.push('\n');
    write_atomic(path, text.as_bytes())?;
    Ok(())
}

/// JSON has no infinities.
fn finite(v: f64) -> Option<f64> {
    v.is_finite().then_some(v)
}

#[derive(Serialize)]
struct MetricsJson {
    train_accuracy: f64,
    valid_accuracy: f64,
    test_accuracy: f64,
    valid_cross_entropy: f64,
    test_cross_entropy: f64,
    best_round: usize,
    rounds_trained: usize,
}

impl MetricsJson {
    fn new(m: &SplitMetrics, model: &GbdtModel) -> Self {
        MetricsJson {
            train_accuracy: m.train_accuracy,
            valid_accuracy: m.valid_accuracy,
            test_accuracy: m.test_accuracy,
            valid_cross_entropy: m.valid_cross_entropy,
            test_cross_entropy: m.test_cross_entropy,
            best_round: m.best_round,
            rounds_trained: model.rounds_trained(),
        }
    }
}

fn node_inputs(cfg: &RunConfig, ds: &Dataset) -> Result<FeatureMatrix, CliError> {
    let x = match cfg.features {
        FeatureSource::Raw => ds.features.clone(),
        FeatureSource::Embeddings => read_matrix_csv(&cfg.embeddings)?,
    };
    if x.rows() != ds.n_nodes() {
        return Err(pcapass::Error::RowCount {
            what: "embeddings".into(),
            expected: ds.n_nodes(),
            found: x.rows(),
        }
        .into());
    }
    Ok(x)
}

pub fn gen(cfg: &RunConfig) -> CmdResult {
    let ds = generate_sbm(&cfg.sbm)?;
    ensure_dir(&cfg.out)?;
    ds.save(&cfg.out)?;
    println!(
        "generated {} nodes, {} edges, {} classes in {}",
        ds.n_nodes(),
        ds.graph.undirected_edges().len(),
        ds.n_classes(),
        cfg.out.display()
    );
    Ok(())
}

pub fn embed(cfg: &RunConfig) -> CmdResult {
    let ds = load_dataset(&cfg.dataset)?;
    let result = run_embed(&ds.graph, &ds.features, &cfg.embed)?;
    for w in &result.warnings {
        eprintln!("warning: {w}");
    }
    ensure_dir(&cfg.out)?;
    for (i, m) in result.per_hop_models.iter().enumerate() {
        write_atomic(
            cfg.out.join(format!("pca_hop_{}.pcam", i + 1)),
            &m.to_bytes(),
        )?;
    }
    write_atomic(
        cfg.out.join("embeddings.bin"),
        &embedding_to_bytes(&result.embeddings),
    )?;
    write_atomic(
        cfg.out.join("embeddings.csv"),
        matrix_to_csv(&result.embeddings).as_bytes(),
    )?;
    println!(
        "embedded {} nodes to width {} with {} ({} hops)",
        result.embeddings.rows(),
        result.embeddings.cols(),
        cfg.embed.method,
        result.hops_run
    );
    Ok(())
}

pub fn train(cfg: &RunConfig) -> CmdResult {
    let ds = load_dataset(&cfg.dataset)?;
    let x = node_inputs(cfg, &ds)?;
    let (model, metrics) = fit_classifier(&ds, &x, &cfg.gbdt)?;
    ensure_dir(&cfg.out)?;
    write_atomic(cfg.out.join("model.pgbm"), &model.to_bytes())?;
    write_atomic(cfg.out.join("model.txt"), model.text_dump().as_bytes())?;
    write_json(
        &cfg.out.join("metrics.json"),
        &MetricsJson::new(&metrics, &model),
    )?;
    println!(
        "trained {} rounds (kept {}); test accuracy {:.4}",
        model.rounds_trained(),
        model.best_round(),
        metrics.test_accuracy
    );
    Ok(())
}

pub fn eval(cfg: &RunConfig) -> CmdResult {
    let ds = load_dataset(&cfg.dataset)?;
    let model = GbdtModel::from_bytes(&read_file(&cfg.model)?)?;
    let x = node_inputs(cfg, &ds)?;
    let metrics = score_model(&model, &ds, &x)?;
    ensure_dir(&cfg.out)?;
    write_json(
        &cfg.out.join("eval_metrics.json"),
        &MetricsJson::new(&metrics, &model),
    )?;
    println!("test accuracy {:.4}", metrics.test_accuracy);
    Ok(())
}

#[derive(Serialize)]
struct SweepSummaryEntry {
    method: String,
    best_hops: usize,
    best_v_measure: f64,
    final_v_measure: f64,
}

pub fn sweep(cfg: &RunConfig) -> CmdResult {
    let ds = load_dataset(&cfg.dataset)?;
    let results = oversmoothing_sweep(&ds.graph, &ds.features, &ds.labels, &cfg.sweep)?;
    let mut csv = String::from("method,hops,v_measure,normalized\n");
    let mut summary = Vec::with_capacity(results.len());
    for r in &results {
        for (i, (raw, norm)) in r.raw.iter().zip(&r.normalized).enumerate() {
            let _ = writeln!(
                csv,
                "{},{},{},{}",
                r.method,
                i + 1,
                format_float(*raw),
                format_float(*norm)
            );
        }
        summary.push(SweepSummaryEntry {
            method: r.method.to_string(),
            best_hops: r.best_hops,
            best_v_measure: r.raw[r.best_hops - 1],
            final_v_measure: *r.raw.last().expect("at least one hop"),
        });
        println!(
            "{}: best v-measure {:.4} at {} hops",
            r.method,
            r.raw[r.best_hops - 1],
            r.best_hops
        );
    }
    ensure_dir(&cfg.out)?;
    write_atomic(cfg.out.join("sweep.csv"), csv.as_bytes())?;
    write_json(&cfg.out.join("sweep_summary.json"), &summary)?;
    Ok(())
}

#[derive(Serialize)]
struct HpoSummaryJson {
    n_runs: usize,
    n_failed: usize,
    best_run: Option<usize>,
    best_valid_loss: Option<f64>,
    best_test_accuracy: f64,
    max_test_accuracy: f64,
    pearson_r: Option<f64>,
}

pub fn hpo(cfg: &RunConfig) -> CmdResult {
    let ds = load_dataset(&cfg.dataset)?;
    let records = random_search(&cfg.hpo, cfg.hpo_runs, cfg.seed, &ds)?;
    let mut csv = String::from(
        "run,method,hops,dim,aggregator,learning_rate,max_depth,lambda,min_child_hessian,subsample,\
         valid_loss,valid_accuracy,test_accuracy,best_round,error\n",
    );
    for r in &records {
        let error = r
            .error
            .as_deref()
            .unwrap_or("")
            .replace([',', '\n', '\r'], " ");
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.run,
            r.embed.method,
            r.embed.hops,
            r.embed.dim,
            r.embed.aggregator,
            format_float(r.gbdt.learning_rate),
            r.gbdt.max_depth,
            format_float(r.gbdt.lambda),
            format_float(r.gbdt.min_child_hessian),
            format_float(r.gbdt.subsample),
            format_float(r.valid_loss),
            format_float(r.valid_accuracy),
            format_float(r.test_accuracy),
            r.best_round,
            error
        );
    }
    let s = HpoSummary::from_records(&records);
    ensure_dir(&cfg.out)?;
    write_atomic(cfg.out.join("hpo.csv"), csv.as_bytes())?;
    write_json(
        &cfg.out.join("hpo_summary.json"),
        &HpoSummaryJson {
            n_runs: s.n_runs,
            n_failed: s.n_failed,
            best_run: s.best_run,
            best_valid_loss: finite(s.best_valid_loss),
            best_test_accuracy: s.best_test_accuracy,
            max_test_accuracy: s.max_test_accuracy,
            pearson_r: s.pearson_r,
        },
    )?;
    match s.pearson_r {
        Some(r) => println!(
            "{} runs, {} failed; pearson r(valid loss, test acc) = {r:.4}",
            s.n_runs, s.n_failed
        ),
        None => println!(
            "{} runs, {} failed; pearson r undefined",
            s.n_runs, s.n_failed
        ),
    }
    Ok(())
}
