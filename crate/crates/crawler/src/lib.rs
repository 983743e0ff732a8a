//! HTTP crawling for domain hyperlink graphs.
//!
//! A [`Fetcher`] performs stateless GET requests: no cookie store, no pooled
//! connections, manual redirect handling. [`crawl_level1`] fetches a domain's
//! root page; [`crawl_level2`] also fetches every page the root links to.
//! [`run_crawl`] drives a whole domain list into a snapshot store.
//!
//! For offline runs, [`fixture`] serves a directory tree of static pages and
//! [`Fetcher::fixture`] routes every hostname to it.

mod clock;
mod config;
mod crawl;
mod error;
mod extract;
mod fetch;
pub mod fixture;

pub use clock::Clock;
pub use config::CrawlConfig;
pub use crawl::{crawl_domain, crawl_level1, crawl_level2, run_crawl, CrawlSummary};
pub use error::CrawlError;
pub use extract::extract_hyperlinks;
pub use fetch::Fetcher;
