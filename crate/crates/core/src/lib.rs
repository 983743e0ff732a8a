//! Domain-level analytics for mapping misinformation networks.
//!
//! The crate covers the offline half of the toolkit: curating labeled
//! domain lists, turning crawl snapshots into a domain hyperlink graph,
//! community detection, co-sharing graphs built from social share records,
//! and a sparse logistic-regression domain classifier. Network access lives
//! in the `domainweb-crawler` crate.

pub mod classifier;
pub mod community;
pub mod curation;
pub mod domain;
pub mod error;
pub mod export;
pub mod graph;
pub mod label;
pub mod sharing;
pub mod snapshot;

pub use domain::normalize_domain;
pub use error::{Error, Result};
pub use label::{Category, Label};
