#[derive(Debug, thiserror::Error)]
pub enum CrawlError {
    #[error("invalid crawl configuration: {0}")]
    Config(String),
    #[error("failed to build HTTP client: {0}")]
    Client(#[from] reqwest::Error),
    #[error("snapshot store failed after {written} of {total} snapshots: {source}")]
    Store {
        written: usize,
        total: usize,
        #[source]
        source: domainweb_core::Error,
    },
    #[error(transparent)]
    Core(#[from] domainweb_core::Error),
}
