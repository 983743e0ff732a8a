use std::path::PathBuf;

use domainweb_core::curation::{
    self, AlexaRanks, CurationConfig, CurationInputs, InfoQuotas, DEFAULT_MISINFO_LIMIT,
};

use crate::config::{require_file, Context};
use crate::error::{CmdResult, Failure};
use crate::output::{write_json, write_text};

#[derive(Debug, clap::Args)]
pub struct Args {
    /// `source,domain[,headline]` CSV; repeat for several lists
    #[arg(long = "sources", value_name = "CSV")]
    sources: Vec<PathBuf>,

    /// `rank,domain` popularity ranking
    #[arg(long, value_name = "CSV")]
    alexa: Option<PathBuf>,

    /// `domain,category` informational candidates
    #[arg(long = "info", value_name = "CSV")]
    info_list: Option<PathBuf>,

    /// Domains to drop, one per line
    #[arg(long, value_name = "FILE")]
    denylist: Option<PathBuf>,

    /// Number of misinformation domains to keep
    #[arg(long)]
    limit: Option<usize>,
}

pub fn run(ctx: &Context, args: Args) -> CmdResult {
    let paths = &ctx.file.paths;
    let sources = if args.sources.is_empty() {
        paths.sources.clone()
    } else {
        args.sources
    };
    if sources.is_empty() {
        return Err(Failure::usage("no source lists given (use --sources)"));
    }

    let mut inputs = CurationInputs::default();
    for path in &sources {
        require_file(path, "source list")?;
        let rows = curation::load_sources(path)?;
        inputs.sources.entries.extend(rows.entries);
        inputs.sources.headline_only += rows.headline_only;
    }
    if let Some(path) = args.alexa.or_else(|| paths.alexa.clone()) {
        require_file(&path, "ranking file")?;
        inputs.ranks = AlexaRanks::load(&path)?;
    }
    if let Some(path) = args.info_list.or_else(|| paths.info_list.clone()) {
        require_file(&path, "informational list")?;
        inputs.info_candidates = curation::load_info_candidates(&path)?;
    }
    if let Some(path) = args.denylist.or_else(|| paths.denylist.clone()) {
        require_file(&path, "denylist")?;
        inputs.denylist = curation::load_denylist(&path)?;
    }

    let config = CurationConfig {
        misinfo_limit: args
            .limit
            .or(ctx.file.curation.misinfo_limit)
            .unwrap_or(DEFAULT_MISINFO_LIMIT),
        quotas: ctx
            .file
            .curation
            .quotas
            .clone()
            .map(InfoQuotas)
            .unwrap_or_default(),
    };
    let (master, report) = curation::curate(&inputs, &config);

    let mut csv = Vec::new();
    curation::write_master_list(&master, &mut csv)?;
    let master_path = ctx.output_dir.join("master.csv");
    write_text(&master_path, csv)?;
    write_json(&ctx.output_dir.join("curation_report.json"), &report)?;
    println!(
        "{} misinformation and {} informational domains written to {}",
        report.final_misinfo,
        report.final_info,
        master_path.display()
    );
    Ok(())
}
