//! Tweet page harvesting: polite concurrent fetching of a URL manifest and
//! parsing of the fixture page schema.

use std::collections::HashMap;
use std::path::Path;
use std::sync::Arc;
use std::time::Duration;

use altmap_core::{Doi, FetchPolicy, FetchResult, FetchStatus, TweetRecord};
use chrono::{DateTime, Utc};
use scraper::{Html, Selector};
use sha2::{Digest, Sha256};
use tokio::sync::{Mutex, Semaphore};
use tokio::time::Instant;

use crate::error::{Error, IoContext, Result};
use crate::formats::ManifestEntry;

/// Per-host request spacing. Each request reserves the next free slot of
/// its host, so a host never sees more than one request per interval.
#[derive(Debug)]
struct RateLimiter {
    interval: Duration,
    next: Mutex<HashMap<String, Instant>>,
}

impl RateLimiter {
    async fn wait(&self, host: &str) {
        let slot = {
            let mut next = self.next.lock().await;
            let now = Instant::now();
            let slot = next.get(host).copied().filter(|t| *t > now).unwrap_or(now);
            next.insert(host.to_string(), slot + self.interval);
            slot
        };
        tokio::time::sleep_until(slot).await;
    }
}

/// Rewrites `url` to point at `endpoint`, keeping path and query.
pub fn redirect(url: &str, endpoint: &url::Url) -> Result<String> {
    let parsed = url::Url::parse(url).map_err(|e| Error::Http(format!("{url}: {e}")))?;
    let mut out = endpoint.clone();
    out.set_path(parsed.path());
    out.set_query(parsed.query());
    Ok(out.to_string())
}

fn host_of(url: &str) -> String {
    url::Url::parse(url).ok().and_then(|u| u.host_str().map(str::to_string)).unwrap_or_default()
}

struct Fetcher {
    client: reqwest::Client,
    policy: FetchPolicy,
    limiter: RateLimiter,
    endpoint: Option<url::Url>,
}

impl Fetcher {
    async fn fetch(&self, url: &str) -> FetchResult {
        let host = host_of(url);
        let target = match &self.endpoint {
            Some(e) => match redirect(url, e) {
                Ok(t) => t,
                Err(_) => return FetchResult::failed(url.to_string(), 0, 1),
            },
            None => url.to_string(),
        };
        let mut attempts = 0;
        loop {
            attempts += 1;
            self.limiter.wait(&host).await;
            let code = match self.client.get(&target).send().await {
                Ok(resp) => {
                    let code = resp.status().as_u16();
                    if resp.status().is_success() {
                        match resp.text().await {
                            Ok(body) => return FetchResult::ok(url.to_string(), code, body, attempts),
                            Err(_) => code,
                        }
                    } else if FetchStatus::is_dead_code(code) {
                        return FetchResult::dead(url.to_string(), code, attempts);
                    } else {
                        code
                    }
                }
                Err(e) => {
                    log::debug!("{url}: {e}");
                    0
                }
            };
            if attempts > self.policy.max_retries {
                return FetchResult::failed(url.to_string(), code, attempts);
            }
            tokio::time::sleep(self.policy.backoff(attempts)).await;
        }
    }
}

/// Fetches every URL with at most `max_parallel` requests in flight and the
/// per-host rate limit of `policy`. Results come back in input order.
/// `endpoint` replaces scheme, host and port of every URL (for the fixture
/// server); rate limiting still keys on the original host.
pub async fn fetch_all(urls: &[String], policy: &FetchPolicy, endpoint: Option<&str>) -> Result<Vec<FetchResult>> {
    if urls.is_empty() {
        return Err(altmap_core::Error::EmptyManifest.into());
    }
    policy.validate()?;
    let endpoint = endpoint
        .map(|e| url::Url::parse(e).map_err(|err| Error::Config(format!("endpoint `{e}`: {err}"))))
        .transpose()?;
    let client = reqwest::Client::builder()
        .timeout(Duration::from_secs(30))
        .user_agent(concat!("altmap/", env!("CARGO_PKG_VERSION")))
        .build()
        .map_err(|e| Error::Http(e.to_string()))?;
    let fetcher = Arc::new(Fetcher {
        client,
        policy: policy.clone(),
        limiter: RateLimiter { interval: policy.request_interval(), next: Mutex::new(HashMap::new()) },
        endpoint,
    });
    let permits = Arc::new(Semaphore::new(policy.max_parallel));
    let mut tasks = Vec::with_capacity(urls.len());
    for url in urls {
        let fetcher = Arc::clone(&fetcher);
        let permits = Arc::clone(&permits);
        let url = url.clone();
        tasks.push(tokio::spawn(async move {
            let _permit = permits.acquire_owned().await.expect("semaphore is never closed");
            fetcher.fetch(&url).await
        }));
    }
    let mut out = Vec::with_capacity(tasks.len());
    for t in tasks {
        out.push(t.await.map_err(|e| Error::Http(e.to_string()))?);
    }
    Ok(out)
}

/// Blocking wrapper around [`fetch_all`].
pub fn fetch_manifest(urls: &[String], policy: &FetchPolicy, endpoint: Option<&str>) -> Result<Vec<FetchResult>> {
    let rt = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(|e| Error::Http(e.to_string()))?;
    rt.block_on(fetch_all(urls, policy, endpoint))
}

/// Hex SHA-256 of the URL, used as the stored body's file name.
pub fn url_hash(url: &str) -> String {
    hex::encode(Sha256::digest(url.as_bytes()))
}

/// Writes each fetched body to `dir/<url hash>.html`.
pub fn store_bodies(results: &[FetchResult], dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).at(dir)?;
    for r in results {
        if let Some(body) = &r.body {
            let path = dir.join(format!("{}.html", url_hash(&r.url)));
            std::fs::write(&path, body).at(&path)?;
        }
    }
    Ok(())
}

pub fn write_fetch_log(results: &[FetchResult]) -> String {
    let mut out = String::from("url\tstatus\thttp_code\tattempts\n");
    for r in results {
        let status = match r.status {
            FetchStatus::Ok => "ok",
            FetchStatus::Dead => "dead",
            FetchStatus::RetryableFailed => "retryable_failed",
        };
        out.push_str(&format!("{}\t{status}\t{}\t{}\n", r.url, r.http_code, r.attempts));
    }
    out
}

/// Why a page could not be turned into a tweet.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PageError {
    #[error("{0} not found")]
    Missing(&'static str),
    #[error("{0} is empty")]
    Empty(&'static str),
    #[error("bad timestamp `{0}`")]
    Timestamp(String),
}

fn selector(id: &str) -> Selector {
    Selector::parse(&format!("#{id}")).expect("static selector")
}

fn text_of(el: scraper::ElementRef<'_>) -> String {
    el.text().collect::<String>().split_whitespace().collect::<Vec<_>>().join(" ")
}

/// Parses a tweet page: `#tweet-author`, `#tweet-time` (ISO-8601 in its
/// `datetime` attribute or text) and `#tweet-text`.
pub fn extract_tweet(body: &str, url: &str, doi: &Doi) -> Result<TweetRecord, PageError> {
    let doc = Html::parse_document(body);
    let find = |id: &str, what: &'static str| doc.select(&selector(id)).next().ok_or(PageError::Missing(what));
    let author_el = find("tweet-author", "author")?;
    let time_el = find("tweet-time", "timestamp")?;
    let text_el = find("tweet-text", "text")?;

    let author = text_of(author_el);
    let author = author.trim_start_matches('@').to_string();
    if author.is_empty() {
        return Err(PageError::Empty("author"));
    }
    let raw_time = time_el.value().attr("datetime").map(str::to_string).unwrap_or_else(|| text_of(time_el));
    let timestamp = DateTime::parse_from_rfc3339(raw_time.trim())
        .map_err(|_| PageError::Timestamp(raw_time.clone()))?
        .with_timezone(&Utc);
    let text = text_of(text_el);
    if text.is_empty() {
        return Err(PageError::Empty("text"));
    }
    Ok(TweetRecord::new(url.to_string(), author, timestamp, text, doi.clone()))
}

/// Renders a tweet as a page of the fixture schema.
pub fn render_page(tweet: &TweetRecord) -> String {
    format!(
        "<!DOCTYPE html>\n<html><head><meta charset=\"utf-8\"><title>Tweet</title></head><body>\n\
         <article class=\"tweet\">\n<a id=\"tweet-author\">@{}</a>\n<time id=\"tweet-time\" datetime=\"{}\">{}</time>\n\
         <p id=\"tweet-text\">{}</p>\n</article>\n</body></html>\n",
        escape(&tweet.author),
        tweet.timestamp.format("%Y-%m-%dT%H:%M:%SZ"),
        tweet.timestamp.format("%-d %b %Y"),
        escape(&tweet.text)
    )
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Parses the fetched pages of a manifest, in manifest order. Dead and
/// failed URLs are skipped; unparseable pages are returned with the error.
pub fn parse_pages(results: &[FetchResult], manifest: &[ManifestEntry]) -> (Vec<TweetRecord>, Vec<(String, PageError)>) {
    use rayon::prelude::*;
    let parsed: Vec<Option<Result<TweetRecord, (String, PageError)>>> = results
        .par_iter()
        .zip(manifest.par_iter())
        .map(|(r, m)| {
            r.body.as_ref().map(|b| extract_tweet(b, &r.url, &m.doi).map_err(|e| (r.url.clone(), e)))
        })
        .collect();
    let mut tweets = Vec::new();
    let mut errors = Vec::new();
    for p in parsed.into_iter().flatten() {
        match p {
            Ok(t) => tweets.push(t),
            Err(e) => errors.push(e),
        }
    }
    (tweets, errors)
}
