use std::collections::HashSet;
use std::path::PathBuf;

use domainweb_core::snapshot::{
    ExclusionReason, FetchResult, FetchStatus, ScrapeSnapshot, SnapshotStore, TransportError,
};
use futures::stream::{self, StreamExt};
use serde::Serialize;
use url::Url;

use crate::error::CrawlError;
use crate::fetch::Fetcher;

/// Fetch `https://<domain>/`, retrying over plain http when the TLS
/// handshake or the connection fails.
async fn fetch_root(fetcher: &Fetcher, domain: &str) -> FetchResult {
    let Ok(https) = Url::parse(&format!("https://{domain}/")) else {
        return invalid_root(fetcher, domain);
    };
    let first = fetcher.fetch_page(&https).await;
    match first.status {
        FetchStatus::Transport(TransportError::Tls | TransportError::Connect) => {
            let http = Url::parse(&format!("http://{domain}/")).expect("valid once https parsed");
            fetcher.fetch_page(&http).await
        }
        _ => first,
    }
}

fn invalid_root(fetcher: &Fetcher, domain: &str) -> FetchResult {
    FetchResult {
        url: domain.to_string(),
        status: FetchStatus::Transport(TransportError::InvalidUrl),
        body_hash: None,
        fetched_at: fetcher.clock().stamp(),
        links: Vec::new(),
    }
}

fn exclusion(root: &FetchResult) -> Option<ExclusionReason> {
    match root.status {
        FetchStatus::Http(404) => Some(ExclusionReason::Root404),
        s if s.is_success() => None,
        _ => Some(ExclusionReason::Unreachable),
    }
}

fn snapshot(domain: &str, level: u8, fetches: Vec<FetchResult>) -> ScrapeSnapshot {
    let reason = exclusion(&fetches[0]);
    ScrapeSnapshot {
        run_id: String::new(),
        domain: domain.to_string(),
        level,
        excluded: reason.is_some(),
        reason,
        fetches,
    }
}

/// Root page only. The snapshot's `run_id` is left empty.
pub async fn crawl_level1(fetcher: &Fetcher, domain: &str) -> ScrapeSnapshot {
    let root = fetch_root(fetcher, domain).await;
    snapshot(domain, 1, vec![root])
}

/// Root page plus every distinct page it links to, in document order and
/// capped by the config. Links differing only by fragment count once, and a
/// link back to the root itself is not refetched.
pub async fn crawl_level2(fetcher: &Fetcher, domain: &str) -> ScrapeSnapshot {
    let root = fetch_root(fetcher, domain).await;
    if exclusion(&root).is_some() {
        return snapshot(domain, 2, vec![root]);
    }
    let mut seen: HashSet<String> = HashSet::new();
    seen.insert(root.url.clone());
    let targets: Vec<Url> = root
        .links
        .iter()
        .filter_map(|l| Url::parse(l).ok())
        .map(|mut u| {
            u.set_fragment(None);
            u
        })
        .filter(|u| seen.insert(u.to_string()))
        .take(fetcher.config().max_pages_per_domain_level2)
        .collect();
    let pages = futures::future::join_all(targets.iter().map(|u| fetcher.fetch_page(u))).await;
    let mut fetches = Vec::with_capacity(pages.len() + 1);
    fetches.push(root);
    fetches.extend(pages);
    snapshot(domain, 2, fetches)
}

pub async fn crawl_domain(fetcher: &Fetcher, domain: &str, level: u8) -> ScrapeSnapshot {
    if level >= 2 {
        crawl_level2(fetcher, domain).await
    } else {
        crawl_level1(fetcher, domain).await
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CrawlSummary {
    pub run_id: String,
    pub path: PathBuf,
    pub snapshots: usize,
    pub succeeded: usize,
    pub excluded_root_404: usize,
    pub excluded_unreachable: usize,
}

/// Crawl `domains` at the configured level into `<store>/<run_id>.ndjson`.
/// Domains are crawled concurrently but written in input order; duplicates
/// are crawled once.
pub async fn run_crawl(
    fetcher: &Fetcher,
    domains: &[String],
    store: &SnapshotStore,
    run_id: &str,
    overwrite: bool,
) -> Result<CrawlSummary, CrawlError> {
    let mut writer = store.create(run_id, overwrite)?;
    let mut seen = HashSet::new();
    let unique: Vec<&String> = domains.iter().filter(|d| seen.insert(d.as_str())).collect();
    let level = fetcher.config().max_level;
    let mut summary = CrawlSummary {
        run_id: run_id.to_string(),
        path: writer.path().to_path_buf(),
        snapshots: 0,
        succeeded: 0,
        excluded_root_404: 0,
        excluded_unreachable: 0,
    };
    let mut results = stream::iter(&unique)
        .map(|d| crawl_domain(fetcher, d, level))
        .buffered(fetcher.config().max_concurrent_fetches);
    while let Some(mut snap) = results.next().await {
        snap.run_id = run_id.to_string();
        match snap.reason {
            None => summary.succeeded += 1,
            Some(ExclusionReason::Root404) => summary.excluded_root_404 += 1,
            Some(ExclusionReason::Unreachable) => summary.excluded_unreachable += 1,
        }
        writer.append(&snap).map_err(|source| CrawlError::Store {
            written: writer.written(),
            total: unique.len(),
            source,
        })?;
        summary.snapshots += 1;
        log::info!("{} {}", snap.domain, snap.fetches[0].status);
    }
    Ok(summary)
}
