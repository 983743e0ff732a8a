use std::path::{Path, PathBuf};

use domainweb_core::classifier::{self, ClassifierModel, Dataset, EvalMetrics, Hyperparams};
use domainweb_core::graph::LabelIndex;
use domainweb_core::sharing::{
    self, ConnectivityStats, SharingMatrix, DEFAULT_JACCARD_THRESHOLD, DEFAULT_MIN_DOMAINS,
    DEFAULT_MIN_SHARERS,
};
use domainweb_core::{export, normalize_domain};
use domainweb_crawler::Clock;
use serde::Serialize;

use crate::config::{require_file, Context};
use crate::error::{CmdResult, Failure};
use crate::output::{write_json, write_text};

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Share records, NDJSON or `user_id,domain[,shared_at]` CSV
    #[arg(long, value_name = "FILE")]
    shares: Option<PathBuf>,

    /// `domain,label[,category]` CSV [default: <output-dir>/master.csv]
    #[arg(long, value_name = "CSV")]
    labels: Option<PathBuf>,

    /// Print the misinformation probability of these domains
    #[arg(long, value_name = "DOMAIN", num_args = 1..)]
    predict: Vec<String>,

    /// Predict with this saved model instead of training one
    #[arg(long, value_name = "FILE", requires = "predict")]
    model: Option<PathBuf>,

    /// Minimum Jaccard index for a co-sharing edge
    #[arg(long)]
    threshold: Option<f64>,
}

#[derive(Debug, Serialize)]
struct Metrics<'a> {
    test: &'a EvalMetrics,
    best: Hyperparams,
    cv_misinfo_f1: Vec<(f64, f64)>,
    stratified: bool,
    train_size: usize,
    train_size_oversampled: usize,
    test_size: usize,
}

#[derive(Debug, Serialize)]
struct Summary {
    records: usize,
    malformed_records: usize,
    skipped_records: usize,
    domains: usize,
    users: usize,
    domains_after_filter: usize,
    users_after_filter: usize,
    labeled_domains: usize,
    unlabeled_domains: Vec<String>,
    coshare_edges: usize,
    connectivity: ConnectivityStats,
    seed: u64,
}

fn predict(model: &ClassifierModel, matrix: &SharingMatrix, domains: &[String]) -> CmdResult {
    for raw in domains {
        let domain = normalize_domain(raw)
            .map_err(|e| Failure::usage(format!("cannot predict {raw:?}: {e}")))?;
        let users: Vec<&str> = match matrix.row_of(&domain) {
            Some(row) => matrix
                .sharers(row)
                .iter()
                .map(|&u| matrix.users()[u as usize].as_str())
                .collect(),
            None => {
                log::warn!("{domain} has no share records");
                Vec::new()
            }
        };
        let p = model.predict(&model.features_for(&users))?;
        println!("{domain}\t{p:.4}");
    }
    Ok(())
}

fn load_matrix(path: &Path) -> CmdResult<(SharingMatrix, usize, usize, usize)> {
    require_file(path, "share records")?;
    let file = sharing::read_share_records(path)?;
    if file.malformed > 0 {
        log::warn!(
            "{}: skipped {} malformed records",
            path.display(),
            file.malformed
        );
    }
    let total = file.records.len();
    let ingested = sharing::ingest(file.records);
    Ok((ingested.matrix, total, file.malformed, ingested.skipped))
}

pub fn run(ctx: &Context, args: Args) -> CmdResult {
    let social = &ctx.file.social;
    let shares = args
        .shares
        .clone()
        .or_else(|| ctx.file.paths.shares.clone())
        .ok_or_else(|| Failure::usage("no share records given (use --shares)"))?;
    let (full, records, malformed, skipped) = load_matrix(&shares)?;

    if let Some(path) = &args.model {
        require_file(path, "model file")?;
        let model = ClassifierModel::from_json(&std::fs::read_to_string(path)?)?;
        return predict(&model, &full, &args.predict);
    }

    let labels_path = args
        .labels
        .clone()
        .or_else(|| ctx.file.paths.social_labels.clone())
        .unwrap_or_else(|| ctx.master_path());
    require_file(&labels_path, "label file")?;
    let labels = LabelIndex::load(&labels_path)?;

    let threshold = args
        .threshold
        .or(social.jaccard_threshold)
        .unwrap_or(DEFAULT_JACCARD_THRESHOLD);
    let min_domains = social.min_domains.unwrap_or(DEFAULT_MIN_DOMAINS);
    let min_sharers = social.min_sharers.unwrap_or(DEFAULT_MIN_SHARERS);
    let test_fraction = social
        .test_fraction
        .unwrap_or(classifier::DEFAULT_TEST_FRACTION);
    let folds = social.folds.unwrap_or(classifier::DEFAULT_FOLDS);
    let defaults = Hyperparams::default();
    let base = Hyperparams {
        learning_rate: social.learning_rate.unwrap_or(defaults.learning_rate),
        max_epochs: social.max_epochs.unwrap_or(defaults.max_epochs),
        convergence_tol: social.convergence_tol.unwrap_or(defaults.convergence_tol),
        ..defaults
    };
    let grid: Vec<Hyperparams> = match &social.grid {
        Some(values) => values.iter().map(|&l2| base.with_l2(l2)).collect(),
        None => classifier::default_grid()
            .into_iter()
            .map(|hp| base.with_l2(hp.l2_strength))
            .collect(),
    };

    let filtered = sharing::filter_domains(&sharing::filter_users(&full, min_domains), min_sharers);
    let coshare = sharing::build_coshare_graph(&filtered, &labels, threshold);
    let connectivity = sharing::connectivity_stats(&coshare);
    let (data, unlabeled) = Dataset::from_sharing(&filtered, &labels);
    if !unlabeled.is_empty() {
        log::info!(
            "{} domains without a label are left out of training",
            unlabeled.len()
        );
    }

    let split = classifier::split(&data, test_fraction, ctx.seed_for("split"), true)?;
    let tuning = classifier::tune(&split.train, &grid, folds, ctx.seed_for("tune"))?;
    let train_set = classifier::oversample(&split.train, ctx.seed_for("oversample"));
    let mut model = classifier::train(&train_set, &tuning.best, ctx.seed_for("train"))?.model;
    model.trained_at = Some(Clock::from_env()?.stamp());
    let metrics = classifier::evaluate(&model, &split.test)?;

    let dir = ctx.output_dir.join("social");
    write_text(&dir.join("coshare.gexf"), export::coshare_gexf(&coshare))?;
    write_json(&dir.join("connectivity.json"), &connectivity)?;
    write_text(&dir.join("model.json"), model.to_json()? + "\n")?;
    write_json(
        &dir.join("metrics.json"),
        &Metrics {
            test: &metrics,
            best: tuning.best,
            cv_misinfo_f1: tuning
                .scores
                .iter()
                .map(|(hp, f1)| (hp.l2_strength, *f1))
                .collect(),
            stratified: split.stratified,
            train_size: split.train.len(),
            train_size_oversampled: train_set.len(),
            test_size: split.test.len(),
        },
    )?;
    write_json(
        &dir.join("summary.json"),
        &Summary {
            records,
            malformed_records: malformed,
            skipped_records: skipped,
            domains: full.domain_count(),
            users: full.user_count(),
            domains_after_filter: filtered.domain_count(),
            users_after_filter: filtered.user_count(),
            labeled_domains: data.len(),
            unlabeled_domains: unlabeled,
            coshare_edges: coshare.edges.len(),
            connectivity,
            seed: ctx.seed,
        },
    )?;

    println!("{}", metrics.table());
    println!(
        "l2 = {}, {} co-sharing edges; written to {}",
        tuning.best.l2_strength,
        coshare.edges.len(),
        dir.display()
    );
    predict(&model, &full, &args.predict)
}
