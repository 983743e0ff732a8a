//! Static file server for offline crawls.
//!
//! Requests are answered from `<root>/<host>/<path>`, where `<host>` is the
//! request's Host header without port. `/` maps to `index.html`; `/x` tries
//! `x`, `x/index.html`, then `x.html`. A host directory may also contain:
//!
//! - `STATUS`: a status code returned for every request to that host;
//! - `REDIRECTS`: lines of `<path> <location>`, answered with 301;
//! - `robots.txt`: served as is (absent means 404).
//!
//! Unknown hosts and missing files answer 404.

use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use axum::body::Body;
use axum::extract::State;
use axum::http::{header, HeaderMap, StatusCode, Uri};
use axum::response::Response;
use axum::Router;
use tokio::net::TcpListener;
use tokio::task::JoinHandle;

const CONTROL_FILES: [&str; 2] = ["STATUS", "REDIRECTS"];

pub fn router(root: impl Into<PathBuf>) -> Router {
    Router::new()
        .fallback(handle)
        .with_state(Arc::new(root.into()))
}

/// Serve `root` on `listener` until the task is dropped or the process ends.
pub async fn serve(root: impl Into<PathBuf>, listener: TcpListener) -> std::io::Result<()> {
    axum::serve(listener, router(root)).await
}

/// A server running on an ephemeral localhost port in the background.
pub struct FixtureServer {
    pub addr: SocketAddr,
    handle: JoinHandle<std::io::Result<()>>,
}

impl FixtureServer {
    pub async fn start(root: impl Into<PathBuf>) -> std::io::Result<Self> {
        let listener = TcpListener::bind(("127.0.0.1", 0)).await?;
        let addr = listener.local_addr()?;
        let handle = tokio::spawn(serve(root.into(), listener));
        Ok(FixtureServer { addr, handle })
    }
}

impl Drop for FixtureServer {
    fn drop(&mut self) {
        self.handle.abort();
    }
}

fn respond(status: StatusCode) -> Response {
    Response::builder()
        .status(status)
        .body(Body::empty())
        .expect("static response")
}

fn host_of(headers: &HeaderMap) -> Option<String> {
    let raw = headers.get(header::HOST)?.to_str().ok()?;
    let host = raw
        .rsplit_once(':')
        .map_or(raw, |(h, _)| h)
        .to_ascii_lowercase();
    let ok = !host.is_empty()
        && !host.starts_with('.')
        && !host.contains("..")
        && host
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '.' || c == '-');
    ok.then_some(host)
}

fn redirect_for(dir: &Path, path: &str) -> Option<String> {
    let table = std::fs::read_to_string(dir.join("REDIRECTS")).ok()?;
    table.lines().find_map(|line| {
        let mut parts = line.split_whitespace();
        match (parts.next(), parts.next()) {
            (Some(from), Some(to)) if from == path => Some(to.to_string()),
            _ => None,
        }
    })
}

fn candidates(dir: &Path, path: &str) -> Vec<PathBuf> {
    let rel = path.trim_start_matches('/');
    if rel.is_empty() || rel.ends_with('/') {
        return vec![dir.join(rel).join("index.html")];
    }
    vec![
        dir.join(rel),
        dir.join(rel).join("index.html"),
        dir.join(format!("{rel}.html")),
    ]
}

async fn handle(State(root): State<Arc<PathBuf>>, headers: HeaderMap, uri: Uri) -> Response {
    let Some(host) = host_of(&headers) else {
        return respond(StatusCode::BAD_REQUEST);
    };
    let path = uri.path();
    if path
        .split('/')
        .any(|seg| seg == ".." || seg.starts_with('.'))
    {
        return respond(StatusCode::NOT_FOUND);
    }
    let dir = root.join(&host);
    if !dir.is_dir() {
        return respond(StatusCode::NOT_FOUND);
    }
    if let Ok(code) = std::fs::read_to_string(dir.join("STATUS")) {
        return match code
            .trim()
            .parse::<u16>()
            .ok()
            .and_then(|c| StatusCode::from_u16(c).ok())
        {
            Some(status) => respond(status),
            None => respond(StatusCode::INTERNAL_SERVER_ERROR),
        };
    }
    if let Some(location) = redirect_for(&dir, path) {
        return Response::builder()
            .status(StatusCode::MOVED_PERMANENTLY)
            .header(header::LOCATION, location)
            .body(Body::empty())
            .expect("redirect response");
    }
    let top = path.trim_start_matches('/');
    if CONTROL_FILES.contains(&top) {
        return respond(StatusCode::NOT_FOUND);
    }
    for file in candidates(&dir, path) {
        if !file.is_file() {
            continue;
        }
        let Ok(bytes) = tokio::fs::read(&file).await else {
            return respond(StatusCode::INTERNAL_SERVER_ERROR);
        };
        let content_type = match file.extension().and_then(|e| e.to_str()) {
            Some("html" | "htm") => "text/html; charset=utf-8",
            Some("txt") => "text/plain; charset=utf-8",
            _ if file.extension().is_none() => "text/html; charset=utf-8",
            _ => "application/octet-stream",
        };
        return Response::builder()
            .status(StatusCode::OK)
            .header(header::CONTENT_TYPE, content_type)
            .body(Body::from(bytes))
            .expect("file response");
    }
    respond(StatusCode::NOT_FOUND)
}
