use std::path::PathBuf;

use domainweb_core::community::{self, CommunityProfile};
use domainweb_core::graph::{self, Discovery, GraphStats, LabelIndex};
use domainweb_core::snapshot::{validate_run_id, SnapshotStore};
use domainweb_core::{export, Label};
use serde::Serialize;

use crate::config::{require_file, Context};
use crate::error::{CmdResult, Failure};
use crate::output::{write_json, write_text};

pub const DEFAULT_CLIQUE_MIN_SIZE: usize = 3;
pub const DEFAULT_DISCOVERY_K: usize = 2;

#[derive(Debug, clap::Args)]
pub struct Args {
    /// Snapshot run to analyze
    #[arg(long)]
    run_id: String,

    /// Label source: the master list or any `domain,label[,category]` CSV
    /// [default: <output-dir>/master.csv]
    #[arg(long, value_name = "CSV")]
    labels: Option<PathBuf>,

    /// Snapshot directory [default: <output-dir>/snapshots]
    #[arg(long, value_name = "DIR")]
    snapshots: Option<PathBuf>,

    /// Louvain resolution
    #[arg(long)]
    resolution: Option<f64>,

    /// Smallest mutual-link clique to report
    #[arg(long)]
    clique_min_size: Option<usize>,

    /// Report unlabeled domains linked from at least this many misinformation domains
    #[arg(long)]
    discovery_k: Option<usize>,
}

#[derive(Debug, Serialize)]
struct Communities<'a> {
    seed: u64,
    resolution: f64,
    modularity: f64,
    phase_modularity: &'a [f64],
    communities: &'a [CommunityProfile],
}

#[derive(Debug, Serialize)]
struct Summary<'a> {
    run_id: &'a str,
    level: u8,
    graph: GraphStats,
    misinfo_subgraph: GraphStats,
    info_subgraph: GraphStats,
    excluded_domains: &'a [String],
    skipped_links: usize,
    communities: usize,
    modularity: f64,
    cliques: usize,
    discoveries: &'a [Discovery],
}

pub fn run(ctx: &Context, args: Args) -> CmdResult {
    let analysis = &ctx.file.analysis;
    let resolution = args.resolution.or(analysis.resolution).unwrap_or(1.0);
    if !(resolution.is_finite() && resolution > 0.0) {
        return Err(Failure::usage(format!(
            "resolution must be positive, got {resolution}"
        )));
    }
    let min_clique = args
        .clique_min_size
        .or(analysis.clique_min_size)
        .unwrap_or(DEFAULT_CLIQUE_MIN_SIZE);
    let k = args
        .discovery_k
        .or(analysis.discovery_k)
        .unwrap_or(DEFAULT_DISCOVERY_K);

    validate_run_id(&args.run_id)?;
    let store = SnapshotStore::new(args.snapshots.unwrap_or_else(|| ctx.snapshot_dir()));
    if !store.exists(&args.run_id) {
        return Err(Failure::usage(format!(
            "no snapshots for run {:?}: {} not found",
            args.run_id,
            store.run_path(&args.run_id).display()
        )));
    }
    let labels_path = args.labels.unwrap_or_else(|| ctx.master_path());
    require_file(&labels_path, "label file")?;
    let labels = LabelIndex::load(&labels_path)?;

    let snapshots = store.read(&args.run_id)?;
    let build = graph::build_graph(&snapshots, &labels)?;
    let g = &build.graph;
    let partition = community::louvain(g, resolution, ctx.seed_for("louvain"));
    let profiles = community::profile_communities(g, &partition);
    let cliques = graph::find_mutual_cliques(g, min_clique);
    let discoveries = graph::discovered_domains(g, k);
    let members = |label: Label| -> Vec<usize> {
        (0..g.node_count())
            .filter(|&v| g.node(v).label == label)
            .collect()
    };

    let dir = ctx.output_dir.join("analysis").join(&args.run_id);
    let stats_csv = graph::link_stats_csv(g);
    write_text(&dir.join("link_stats.csv"), &stats_csv)?;
    write_text(
        &dir.join("graph.gexf"),
        export::domain_graph_gexf(g, Some(&partition)),
    )?;
    write_text(&dir.join("graph.dot"), export::domain_graph_dot(g))?;
    write_text(&dir.join("partition.csv"), partition.to_csv(g))?;
    write_json(
        &dir.join("communities.json"),
        &Communities {
            seed: partition.seed,
            resolution,
            modularity: partition.modularity,
            phase_modularity: &partition.phase_modularity,
            communities: &profiles,
        },
    )?;
    write_json(&dir.join("cliques.json"), &cliques)?;
    write_json(&dir.join("discoveries.json"), &discoveries)?;
    let all: Vec<usize> = (0..g.node_count()).collect();
    write_json(
        &dir.join("summary.json"),
        &Summary {
            run_id: &args.run_id,
            level: g.level,
            graph: graph::subgraph_stats(g, &all),
            misinfo_subgraph: graph::subgraph_stats(g, &members(Label::Misinfo)),
            info_subgraph: graph::subgraph_stats(g, &members(Label::Info)),
            excluded_domains: &build.excluded_domains,
            skipped_links: build.skipped_links,
            communities: partition.community_count(),
            modularity: partition.modularity,
            cliques: cliques.len(),
            discoveries: &discoveries,
        },
    )?;

    print!("{stats_csv}");
    println!(
        "{} nodes, {} edges, {} communities (Q = {:.4}), {} cliques, {} discoveries; written to {}",
        g.node_count(),
        g.edge_count(),
        partition.community_count(),
        partition.modularity,
        cliques.len(),
        discoveries.len(),
        dir.display()
    );
    Ok(())
}
