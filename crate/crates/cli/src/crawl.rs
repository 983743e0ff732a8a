use std::path::{Path, PathBuf};
use std::time::Duration;

use domainweb_core::curation::{read_master_list, MASTER_HEADER};
use domainweb_core::normalize_domain;
use domainweb_core::snapshot::{validate_run_id, SnapshotStore};
use domainweb_crawler::fixture::FixtureServer;
use domainweb_crawler::{run_crawl, Clock, CrawlConfig, CrawlSummary, Fetcher};

use crate::config::{require_dir, require_file, Context};
use crate::error::{CmdResult, Failure};
use crate::output::write_json;

/// Per-host delay used against a local fixture server unless set explicitly.
const FIXTURE_DELAY: Duration = Duration::from_millis(10);

#[derive(Debug, clap::Args)]
pub struct Args {
    /// 1 fetches each root page; 2 also follows the root's links
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
    level: Option<u8>,

    /// Serve this fixture corpus locally and crawl it instead of the web
    #[arg(long, value_name = "DIR")]
    fixtures: Option<PathBuf>,

    /// Name of the snapshot run [default: level<L>-<UTC timestamp>]
    #[arg(long)]
    run_id: Option<String>,

    /// Overwrite an existing run with the same id
    #[arg(long)]
    force: bool,

    /// Master list CSV or a plain list of domains [default: <output-dir>/master.csv]
    #[arg(long, value_name = "FILE")]
    domains: Option<PathBuf>,

    /// Ignore robots.txt
    #[arg(long)]
    no_robots: bool,

    /// Maximum fetches in flight
    #[arg(long)]
    concurrency: Option<usize>,

    /// Minimum spacing between requests to one host, in milliseconds
    #[arg(long, value_name = "MS")]
    delay_ms: Option<u64>,

    /// Per-fetch timeout in seconds
    #[arg(long, value_name = "SECS")]
    timeout_secs: Option<f64>,

    /// Level-2 page cap per domain
    #[arg(long)]
    max_pages: Option<usize>,
}

/// Domains from a master list, or from a file with one domain per line
/// (`#` starts a comment).
pub fn read_domain_list(path: &Path) -> CmdResult<Vec<String>> {
    let text = std::fs::read_to_string(path)?;
    let first = text.lines().next().unwrap_or("").trim();
    if first.starts_with(&format!("{},", MASTER_HEADER[0])) {
        return Ok(read_master_list(path)?
            .into_iter()
            .map(|r| r.domain)
            .collect());
    }
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let entry = line.split('#').next().unwrap_or("").trim();
        if entry.is_empty() {
            continue;
        }
        let domain = normalize_domain(entry)
            .map_err(|e| Failure::usage(format!("{}:{}: {e}", path.display(), i + 1)))?;
        out.push(domain);
    }
    Ok(out)
}

fn crawl_config(ctx: &Context, args: &Args, fixtures: bool) -> CmdResult<CrawlConfig> {
    let file = &ctx.file.crawl;
    let mut config = CrawlConfig {
        max_level: args.level.or(file.level).unwrap_or(1),
        respect_robots: !args.no_robots && file.respect_robots.unwrap_or(true),
        ..CrawlConfig::default()
    };
    if let Some(secs) = args.timeout_secs.or(file.timeout_secs) {
        config.per_fetch_timeout = Duration::try_from_secs_f64(secs)
            .map_err(|_| Failure::usage(format!("invalid timeout: {secs}")))?;
    }
    if let Some(n) = args.max_pages.or(file.max_pages_level2) {
        config.max_pages_per_domain_level2 = n;
    }
    if let Some(n) = args.concurrency.or(file.concurrency) {
        config.max_concurrent_fetches = n;
    }
    match args.delay_ms.or(file.per_host_delay_ms) {
        Some(ms) => config.per_host_delay = Duration::from_millis(ms),
        None if fixtures => config.per_host_delay = FIXTURE_DELAY,
        None => {}
    }
    if let Some(ua) = &file.user_agent {
        config.user_agent = ua.clone();
    }
    config.validate()?;
    Ok(config)
}

pub fn run(ctx: &Context, args: Args) -> CmdResult {
    let fixtures = args
        .fixtures
        .clone()
        .or_else(|| ctx.file.paths.fixtures.clone());
    if let Some(dir) = &fixtures {
        require_dir(dir, "fixture directory")?;
    }
    let config = crawl_config(ctx, &args, fixtures.is_some())?;
    let domains_path = args.domains.clone().unwrap_or_else(|| ctx.master_path());
    require_file(&domains_path, "domain list")?;
    let domains = read_domain_list(&domains_path)?;
    if domains.is_empty() {
        log::warn!("{} lists no domains", domains_path.display());
    }

    let clock = Clock::from_env()?;
    let run_id = args.run_id.clone().unwrap_or_else(|| {
        format!(
            "level{}-{}",
            config.max_level,
            clock.now().format("%Y%m%dT%H%M%SZ")
        )
    });
    validate_run_id(&run_id)?;
    let store = SnapshotStore::new(ctx.snapshot_dir());
    if store.exists(&run_id) && !args.force {
        return Err(Failure::usage(format!(
            "run {run_id:?} already exists at {}; pass --force to overwrite it",
            store.run_path(&run_id).display()
        )));
    }

    let runtime = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()?;
    let mut summary: CrawlSummary = runtime.block_on(async {
        match fixtures {
            Some(dir) => {
                let server = FixtureServer::start(dir).await?;
                let fetcher = Fetcher::fixture(config, clock, server.addr)?;
                Ok::<_, Failure>(run_crawl(&fetcher, &domains, &store, &run_id, args.force).await?)
            }
            None => {
                let fetcher = Fetcher::new(config, clock)?;
                Ok(run_crawl(&fetcher, &domains, &store, &run_id, args.force).await?)
            }
        }
    })?;

    // Keep the summary independent of where the output directory lives.
    if let Ok(rel) = summary.path.strip_prefix(&ctx.output_dir) {
        summary.path = rel.to_path_buf();
    }
    write_json(
        &store.dir().join(format!("{run_id}.summary.json")),
        &summary,
    )?;
    println!("{}", serde_json::to_string_pretty(&summary)?);
    Ok(())
}
