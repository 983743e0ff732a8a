use std::time::Duration;

use crate::error::CrawlError;

pub const DEFAULT_USER_AGENT: &str = concat!("domainweb-crawler/", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrawlConfig {
    /// 1 fetches roots only; 2 also follows the root's links.
    pub max_level: u8,
    pub per_fetch_timeout: Duration,
    pub max_pages_per_domain_level2: usize,
    pub max_concurrent_fetches: usize,
    /// Minimum spacing between request starts to the same host.
    pub per_host_delay: Duration,
    pub user_agent: String,
    pub respect_robots: bool,
}

impl Default for CrawlConfig {
    fn default() -> Self {
        CrawlConfig {
            max_level: 1,
            per_fetch_timeout: Duration::from_secs(30),
            max_pages_per_domain_level2: 200,
            max_concurrent_fetches: 16,
            per_host_delay: Duration::from_millis(1000),
            user_agent: DEFAULT_USER_AGENT.to_string(),
            respect_robots: true,
        }
    }
}

impl CrawlConfig {
    pub fn validate(&self) -> Result<(), CrawlError> {
        let problem = if !matches!(self.max_level, 1 | 2) {
            Some(format!("level must be 1 or 2, got {}", self.max_level))
        } else if self.per_fetch_timeout.is_zero() {
            Some("per-fetch timeout must be positive".to_string())
        } else if self.max_pages_per_domain_level2 == 0 {
            Some("level-2 page cap must be positive".to_string())
        } else if self.max_concurrent_fetches == 0 {
            Some("concurrency must be positive".to_string())
        } else if self.per_host_delay.is_zero() {
            Some("per-host delay must be positive".to_string())
        } else if self.user_agent.trim().is_empty() {
            Some("user agent must not be empty".to_string())
        } else {
            None
        };
        match problem {
            Some(p) => Err(CrawlError::Config(p)),
            None => Ok(()),
        }
    }
}
