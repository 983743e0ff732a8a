use chrono::{DateTime, SecondsFormat, Utc};

use crate::error::CrawlError;

/// Source of `fetched_at` timestamps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Clock {
    #[default]
    System,
    Fixed(DateTime<Utc>),
}

impl Clock {
    /// A fixed clock when `SOURCE_DATE_EPOCH` is set, the system clock
    /// otherwise.
    pub fn from_env() -> Result<Clock, CrawlError> {
        match std::env::var("SOURCE_DATE_EPOCH") {
            Ok(v) => Clock::from_epoch_str(&v),
            Err(_) => Ok(Clock::System),
        }
    }

    pub fn from_epoch_str(s: &str) -> Result<Clock, CrawlError> {
        let secs: i64 = s.trim().parse().map_err(|_| {
            CrawlError::Config(format!("SOURCE_DATE_EPOCH is not an integer: {s:?}"))
        })?;
        DateTime::from_timestamp(secs, 0)
            .map(Clock::Fixed)
            .ok_or_else(|| CrawlError::Config(format!("SOURCE_DATE_EPOCH out of range: {secs}")))
    }

    pub fn now(&self) -> DateTime<Utc> {
        match self {
            Clock::System => Utc::now(),
            Clock::Fixed(t) => *t,
        }
    }

    /// RFC 3339 in UTC with second precision.
    pub fn stamp(&self) -> String {
        self.now().to_rfc3339_opts(SecondsFormat::Secs, true)
    }
}
