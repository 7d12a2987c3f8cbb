//! Local HTTP server for fixture tweet pages, with scripted failures.

use std::collections::HashMap;
use std::net::SocketAddr;
use std::sync::{Arc, Mutex};
use std::time::{Duration, Instant};

use altmap_core::TweetRecord;
use axum::extract::{Request, State};
use axum::http::StatusCode;
use axum::response::{Html, IntoResponse, Response};
use axum::Router;

use crate::error::{Error, Result};
use crate::harvest::render_page;

/// How the server answers one path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Behavior {
    Page(String),
    /// Answers with this status (404 or 410 for deleted tweets).
    Status(u16),
    /// Answers 503 this many times, then serves the page.
    FailThenPage(u32, String),
}

#[derive(Debug, Default)]
struct Site {
    paths: HashMap<String, Behavior>,
    hits: Mutex<HashMap<String, u32>>,
    log: Mutex<Vec<(Duration, String)>>,
    started: Option<Instant>,
}

/// Pages keyed by URL path.
#[derive(Debug, Clone, Default)]
pub struct FixtureSite {
    paths: HashMap<String, Behavior>,
}

impl FixtureSite {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, path: impl Into<String>, behavior: Behavior) {
        self.paths.insert(path.into(), behavior);
    }

    /// Serves every tweet at the path of its URL.
    pub fn from_tweets<'a>(tweets: impl IntoIterator<Item = &'a TweetRecord>) -> Self {
        let mut site = Self::new();
        for t in tweets {
            if let Ok(u) = url::Url::parse(&t.url) {
                site.insert(u.path(), Behavior::Page(render_page(t)));
            }
        }
        site
    }

    pub fn len(&self) -> usize {
        self.paths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paths.is_empty()
    }
}

async fn handle(State(site): State<Arc<Site>>, req: Request) -> Response {
    let path = req.uri().path().to_string();
    let at = site.started.map(|s| s.elapsed()).unwrap_or_default();
    site.log.lock().expect("log lock").push((at, path.clone()));
    let hit = {
        let mut hits = site.hits.lock().expect("hits lock");
        let h = hits.entry(path.clone()).or_insert(0);
        *h += 1;
        *h
    };
    match site.paths.get(&path) {
        None => StatusCode::NOT_FOUND.into_response(),
        Some(Behavior::Page(body)) => Html(body.clone()).into_response(),
        Some(Behavior::Status(code)) => StatusCode::from_u16(*code).unwrap_or(StatusCode::INTERNAL_SERVER_ERROR).into_response(),
        Some(Behavior::FailThenPage(n, body)) => {
            if hit <= *n {
                StatusCode::SERVICE_UNAVAILABLE.into_response()
            } else {
                Html(body.clone()).into_response()
            }
        }
    }
}

/// A running fixture server; it shuts down when dropped.
pub struct FixtureServer {
    addr: SocketAddr,
    site: Arc<Site>,
    shutdown: Option<tokio::sync::oneshot::Sender<()>>,
    thread: Option<std::thread::JoinHandle<()>>,
}

impl FixtureServer {
    /// Starts serving `site` on `addr` (port 0 picks a free port) from a
    /// background thread.
    pub fn start(site: FixtureSite, addr: SocketAddr) -> Result<Self> {
        let state = Arc::new(Site { paths: site.paths, started: Some(Instant::now()), ..Site::default() });
        let listener = std::net::TcpListener::bind(addr).map_err(|e| Error::io(addr.to_string(), e))?;
        listener.set_nonblocking(true).map_err(|e| Error::io(addr.to_string(), e))?;
        let addr = listener.local_addr().map_err(|e| Error::io(addr.to_string(), e))?;
        let (tx, rx) = tokio::sync::oneshot::channel::<()>();
        let app = Router::new().fallback(handle).with_state(Arc::clone(&state));
        let thread = std::thread::spawn(move || {
            let rt = tokio::runtime::Builder::new_multi_thread()
                .worker_threads(2)
                .enable_all()
                .build()
                .expect("fixture server runtime");
            rt.block_on(async move {
                let listener = tokio::net::TcpListener::from_std(listener).expect("listener");
                let _ = axum::serve(listener, app)
                    .with_graceful_shutdown(async {
                        let _ = rx.await;
                    })
                    .await;
            });
        });
        Ok(FixtureServer { addr, site: state, shutdown: Some(tx), thread: Some(thread) })
    }

    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    /// Base URL, e.g. `http://127.0.0.1:41234`.
    pub fn endpoint(&self) -> String {
        format!("http://{}", self.addr)
    }

    /// Arrival time (since start) and path of every request so far.
    pub fn requests(&self) -> Vec<(Duration, String)> {
        self.site.log.lock().expect("log lock").clone()
    }

    /// Blocks until the server is stopped by another thread or process.
    pub fn wait(mut self) {
        if let Some(t) = self.thread.take() {
            let _ = t.join();
        }
    }
}

impl Drop for FixtureServer {
    fn drop(&mut self) {
        if let Some(tx) = self.shutdown.take() {
            let _ = tx.send(());
        }
        if let Some(t) = self.thread.take() {
            let _ = t.join();
        }
    }
}
