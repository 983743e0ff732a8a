use std::collections::HashMap;
use std::error::Error as _;
use std::net::SocketAddr;
use std::sync::{Arc, Mutex};

use domainweb_core::snapshot::{FetchResult, FetchStatus, TransportError};
use reqwest::dns::{Addrs, Name, Resolve, Resolving};
use reqwest::{redirect, StatusCode};
use sha2::{Digest, Sha256};
use texting_robots::Robot;
use tokio::sync::{OnceCell, Semaphore};
use tokio::time::{sleep, Instant};
use url::Url;

use crate::clock::Clock;
use crate::config::CrawlConfig;
use crate::error::CrawlError;
use crate::extract::extract_hyperlinks;

pub const MAX_REDIRECTS: usize = 5;
/// Bodies are truncated past this many bytes.
pub const MAX_BODY_BYTES: usize = 8 << 20;

/// Sends every hostname to one socket address.
#[derive(Debug, Clone, Copy)]
struct FixtureResolver(SocketAddr);

impl Resolve for FixtureResolver {
    fn resolve(&self, _name: Name) -> Resolving {
        let addr = self.0;
        Box::pin(async move { Ok(Box::new(std::iter::once(addr)) as Addrs) })
    }
}

/// Reserves start times so requests to one host are spaced by `delay`.
#[derive(Debug)]
struct HostGate {
    delay: std::time::Duration,
    next: Mutex<HashMap<String, Instant>>,
}

impl HostGate {
    async fn wait(&self, host: &str) {
        let wait = {
            let mut next = self.next.lock().expect("host gate poisoned");
            let now = Instant::now();
            let slot = next.get(host).copied().filter(|t| *t > now).unwrap_or(now);
            next.insert(host.to_string(), slot + self.delay);
            slot - now
        };
        if !wait.is_zero() {
            sleep(wait).await;
        }
    }
}

struct Page {
    url: Url,
    status: StatusCode,
    body: Vec<u8>,
}

type RobotsCell = Arc<OnceCell<Option<Arc<Robot>>>>;

/// Shared fetch machinery for one crawl run.
pub struct Fetcher {
    client: reqwest::Client,
    config: CrawlConfig,
    clock: Clock,
    /// In fixture mode https is spoken as plain http on the wire.
    fixture: bool,
    permits: Semaphore,
    hosts: HostGate,
    robots: Mutex<HashMap<String, RobotsCell>>,
}

impl Fetcher {
    /// Fetch from the live web.
    pub fn new(config: CrawlConfig, clock: Clock) -> Result<Self, CrawlError> {
        Fetcher::build(config, clock, None)
    }

    /// Resolve every hostname to `server` and speak plain http to it.
    pub fn fixture(
        config: CrawlConfig,
        clock: Clock,
        server: SocketAddr,
    ) -> Result<Self, CrawlError> {
        Fetcher::build(config, clock, Some(server))
    }

    fn build(
        config: CrawlConfig,
        clock: Clock,
        server: Option<SocketAddr>,
    ) -> Result<Self, CrawlError> {
        config.validate()?;
        let mut builder = reqwest::Client::builder()
            .user_agent(config.user_agent.clone())
            .redirect(redirect::Policy::none())
            .timeout(config.per_fetch_timeout)
            .connect_timeout(config.per_fetch_timeout)
            .pool_max_idle_per_host(0);
        if let Some(addr) = server {
            builder = builder.dns_resolver(FixtureResolver(addr)).no_proxy();
        }
        Ok(Fetcher {
            client: builder.build()?,
            permits: Semaphore::new(config.max_concurrent_fetches),
            hosts: HostGate {
                delay: config.per_host_delay,
                next: Mutex::new(HashMap::new()),
            },
            robots: Mutex::new(HashMap::new()),
            fixture: server.is_some(),
            config,
            clock,
        })
    }

    pub fn config(&self) -> &CrawlConfig {
        &self.config
    }

    pub fn clock(&self) -> Clock {
        self.clock
    }

    /// Fetch one page, following up to five redirects. Failures become a
    /// transport tag on the result; links are extracted only from 2xx pages.
    pub async fn fetch_page(&self, url: &Url) -> FetchResult {
        let fail = |status: TransportError| FetchResult {
            url: url.to_string(),
            status: FetchStatus::Transport(status),
            body_hash: None,
            fetched_at: self.clock.stamp(),
            links: Vec::new(),
        };
        if !matches!(url.scheme(), "http" | "https") || url.host_str().is_none() {
            return fail(TransportError::InvalidUrl);
        }
        if self.config.respect_robots && !self.robots_allow(url).await {
            return fail(TransportError::RobotsDisallowed);
        }
        match self.get(url).await {
            Ok(page) => {
                let links = if page.status.is_success() {
                    extract_hyperlinks(&page.body, &page.url)
                } else {
                    Vec::new()
                };
                FetchResult {
                    url: page.url.to_string(),
                    status: FetchStatus::Http(page.status.as_u16()),
                    body_hash: Some(format!("{:x}", Sha256::digest(&page.body))),
                    fetched_at: self.clock.stamp(),
                    links,
                }
            }
            Err(e) => fail(e),
        }
    }

    async fn get(&self, url: &Url) -> Result<Page, TransportError> {
        let mut current = url.clone();
        current.set_fragment(None);
        for hop in 0..=MAX_REDIRECTS {
            let host = current.host_str().unwrap_or_default().to_ascii_lowercase();
            self.hosts.wait(&host).await;
            let _permit = self
                .permits
                .acquire()
                .await
                .map_err(|_| TransportError::Other)?;
            let response = self
                .client
                .get(self.wire_url(&current))
                .send()
                .await
                .map_err(|e| classify(&e))?;
            let status = response.status();
            if status.is_redirection() {
                if let Some(location) = response.headers().get(reqwest::header::LOCATION) {
                    let next = location
                        .to_str()
                        .ok()
                        .and_then(|l| current.join(l).ok())
                        .filter(|u| matches!(u.scheme(), "http" | "https"))
                        .ok_or(TransportError::InvalidUrl)?;
                    if hop == MAX_REDIRECTS {
                        return Err(TransportError::TooManyRedirects);
                    }
                    current = next;
                    current.set_fragment(None);
                    continue;
                }
            }
            let body = read_body(response).await?;
            return Ok(Page {
                url: current,
                status,
                body,
            });
        }
        Err(TransportError::TooManyRedirects)
    }

    fn wire_url(&self, url: &Url) -> Url {
        let mut wire = url.clone();
        if self.fixture && wire.scheme() == "https" {
            let port = wire.port();
            wire.set_scheme("http").expect("https to http");
            wire.set_port(port).expect("port on http url");
        }
        wire
    }

    async fn robots_allow(&self, url: &Url) -> bool {
        let origin = url.origin().ascii_serialization();
        let cell = {
            let mut map = self.robots.lock().expect("robots cache poisoned");
            map.entry(origin.clone()).or_default().clone()
        };
        let robot = cell
            .get_or_init(|| async {
                let robots_url = Url::parse(&origin)
                    .and_then(|o| o.join("/robots.txt"))
                    .ok()?;
                match self.get(&robots_url).await {
                    Ok(page) if page.status.is_success() => {
                        match Robot::new(&self.config.user_agent, &page.body) {
                            Ok(r) => Some(Arc::new(r)),
                            Err(e) => {
                                log::warn!("unparsable robots.txt at {robots_url}: {e}");
                                None
                            }
                        }
                    }
                    // Missing or failing robots.txt allows everything.
                    _ => None,
                }
            })
            .await;
        robot.as_ref().map_or(true, |r| r.allowed(url.as_str()))
    }
}

async fn read_body(mut response: reqwest::Response) -> Result<Vec<u8>, TransportError> {
    let mut body = Vec::new();
    while let Some(chunk) = response.chunk().await.map_err(|e| classify(&e))? {
        let room = MAX_BODY_BYTES - body.len();
        if chunk.len() >= room {
            body.extend_from_slice(&chunk[..room]);
            break;
        }
        body.extend_from_slice(&chunk);
    }
    Ok(body)
}

fn classify(e: &reqwest::Error) -> TransportError {
    if e.is_timeout() {
        return TransportError::Timeout;
    }
    if e.is_dns() {
        return TransportError::Dns;
    }
    let mut chain = e.to_string().to_ascii_lowercase();
    let mut source = e.source();
    while let Some(s) = source {
        chain.push_str(": ");
        chain.push_str(&s.to_string().to_ascii_lowercase());
        source = s.source();
    }
    if ["tls", "certificate", "handshake"]
        .iter()
        .any(|k| chain.contains(k))
    {
        TransportError::Tls
    } else if e.is_connect() {
        TransportError::Connect
    } else if e.is_body() || e.is_decode() {
        TransportError::Body
    } else if e.is_builder() {
        TransportError::InvalidUrl
    } else {
        TransportError::Other
    }
}
