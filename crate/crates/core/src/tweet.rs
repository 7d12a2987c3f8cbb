//! Tweet records, fetch bookkeeping and the year filter. The network side of
//! harvesting lives in the `altmap` crate; everything here is pure.

use alloc::string::String;
use alloc::vec::Vec;
use core::time::Duration;

use chrono::{DateTime, Datelike, Utc};
use serde::{Deserialize, Serialize};

use crate::doi::Doi;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FetchStatus {
    Ok,
    /// The page no longer exists (HTTP 404 or 410).
    Dead,
    RetryableFailed,
}

impl FetchStatus {
    pub fn is_dead_code(code: u16) -> bool {
        code == 404 || code == 410
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FetchResult {
    pub url: String,
    pub status: FetchStatus,
    /// Last HTTP status seen, 0 when no response was received.
    pub http_code: u16,
    pub body: Option<String>,
    pub attempts: u32,
}

impl FetchResult {
    pub fn ok(url: String, http_code: u16, body: String, attempts: u32) -> Self {
        FetchResult { url, status: FetchStatus::Ok, http_code, body: Some(body), attempts }
    }

    pub fn dead(url: String, http_code: u16, attempts: u32) -> Self {
        FetchResult { url, status: FetchStatus::Dead, http_code, body: None, attempts }
    }

    pub fn failed(url: String, http_code: u16, attempts: u32) -> Self {
        FetchResult { url, status: FetchStatus::RetryableFailed, http_code, body: None, attempts }
    }
}

/// Politeness and retry settings for fetching.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FetchPolicy {
    pub max_parallel: usize,
    /// Requests per second per host.
    pub rate_limit: f64,
    pub max_retries: u32,
    pub backoff_base_ms: u64,
    pub backoff_multiplier: f64,
}

impl Default for FetchPolicy {
    fn default() -> Self {
        FetchPolicy { max_parallel: 8, rate_limit: 2.0, max_retries: 3, backoff_base_ms: 500, backoff_multiplier: 2.0 }
    }
}

impl FetchPolicy {
    pub fn validate(&self) -> Result<()> {
        if self.max_parallel == 0 {
            return Err(Error::InvalidParameter("max_parallel must be at least 1".into()));
        }
        if !(self.rate_limit > 0.0 && self.rate_limit.is_finite()) {
            return Err(Error::InvalidParameter("rate_limit must be positive".into()));
        }
        if !(self.backoff_multiplier >= 1.0 && self.backoff_multiplier.is_finite()) {
            return Err(Error::InvalidParameter("backoff multiplier must be >= 1".into()));
        }
        Ok(())
    }

    /// Minimum spacing between two requests to the same host.
    pub fn request_interval(&self) -> Duration {
        Duration::from_secs_f64(1.0 / self.rate_limit)
    }

    /// Delay before retry number `retry` (1-based).
    pub fn backoff(&self, retry: u32) -> Duration {
        let factor = libm::pow(self.backoff_multiplier, retry.saturating_sub(1) as f64);
        Duration::from_secs_f64(self.backoff_base_ms as f64 / 1000.0 * factor)
    }
}

/// One parsed tweet page.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TweetRecord {
    pub url: String,
    pub author: String,
    pub timestamp: DateTime<Utc>,
    pub year: i32,
    pub text: String,
    pub doi: Doi,
}

impl TweetRecord {
    pub fn new(url: String, author: String, timestamp: DateTime<Utc>, text: String, doi: Doi) -> Self {
        TweetRecord { url, author, year: timestamp.year(), timestamp, text, doi }
    }
}

/// Inclusive range of years.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct YearWindow {
    pub start: i32,
    pub end: i32,
}

impl YearWindow {
    pub fn new(start: i32, end: i32) -> Result<Self> {
        if start > end {
            return Err(Error::InvalidParameter(alloc::format!("year window {start}-{end} is empty")));
        }
        Ok(YearWindow { start, end })
    }

    pub fn contains(&self, year: i32) -> bool {
        self.start <= year && year <= self.end
    }
}

/// Keeps tweets whose year falls in the window, preserving order. Returns the
/// retained tweets and the number removed.
pub fn filter_by_year(tweets: Vec<TweetRecord>, window: YearWindow) -> (Vec<TweetRecord>, usize) {
    let before = tweets.len();
    let kept: Vec<_> = tweets.into_iter().filter(|t| window.contains(t.year)).collect();
    let removed = before - kept.len();
    (kept, removed)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AvailabilityStats {
    pub total: usize,
    pub ok: usize,
    pub dead: usize,
    pub failed: usize,
    pub dead_fraction: f64,
}

impl AvailabilityStats {
    pub fn from_counts(ok: usize, dead: usize, failed: usize) -> Self {
        let total = ok + dead + failed;
        let dead_fraction = if total == 0 { 0.0 } else { dead as f64 / total as f64 };
        AvailabilityStats { total, ok, dead, failed, dead_fraction }
    }

    pub fn usable_fraction(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.ok as f64 / self.total as f64
        }
    }
}

pub fn availability_stats(results: &[FetchResult]) -> AvailabilityStats {
    let mut ok = 0;
    let mut dead = 0;
    let mut failed = 0;
    for r in results {
        match r.status {
            FetchStatus::Ok => ok += 1,
            FetchStatus::Dead => dead += 1,
            FetchStatus::RetryableFailed => failed += 1,
        }
    }
    AvailabilityStats::from_counts(ok, dead, failed)
}
