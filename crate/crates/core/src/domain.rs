//! Registrable-domain normalization.
//!
//! Every graph node, share record and curated entry is keyed by its
//! registrable domain: the public suffix plus one label, lowercased, with
//! scheme, port, path, query and sub-labels removed. The suffix data comes
//! from the public suffix list snapshot compiled into the `psl` crate, so
//! results do not depend on the network or on the date the tool runs.

use url::{Host, Url};

use crate::error::{Error, Result};

/// Collapse a URL or bare hostname to its registrable domain.
///
/// `https://www.infowars.com/posts/abc` becomes `infowars.com` and
/// `a.b.example.co.uk/path?q=1` becomes `example.co.uk`. The function is
/// idempotent. Inputs without a host, IP-address hosts and hosts that are
/// themselves a public suffix are rejected.
pub fn normalize_domain(raw: &str) -> Result<String> {
    let trimmed = raw.trim();
    if trimmed.is_empty() {
        return Err(Error::InvalidDomain(raw.to_string()));
    }
    let parsed = match Url::parse(trimmed) {
        Ok(url) if url.has_host() => url,
        // `mailto:`, `javascript:` and friends have no authority.
        Ok(url) if url.cannot_be_a_base() && !looks_like_host_port(trimmed) => {
            return Err(Error::InvalidDomain(raw.to_string()))
        }
        _ => {
            let rest = trimmed.strip_prefix("//").unwrap_or(trimmed);
            Url::parse(&format!("http://{rest}"))
                .map_err(|_| Error::InvalidDomain(raw.to_string()))?
        }
    };

    registrable_domain(&parsed).ok_or_else(|| Error::InvalidDomain(raw.to_string()))
}

/// `example.com:8080/x` parses as scheme `example.com`; spot that case.
fn looks_like_host_port(s: &str) -> bool {
    s.split_once(':').is_some_and(|(_, rest)| {
        let port = rest.split(['/', '?', '#']).next().unwrap_or("");
        !port.is_empty() && port.bytes().all(|b| b.is_ascii_digit())
    })
}

/// Registrable domain of an already-parsed URL, if it has one.
pub fn registrable_domain(url: &Url) -> Option<String> {
    let host = match url.host()? {
        Host::Domain(d) => d,
        Host::Ipv4(_) | Host::Ipv6(_) => return None,
    };
    let host = host.trim_end_matches('.');
    if host.is_empty() || host.split('.').any(str::is_empty) {
        return None;
    }
    let domain = psl::domain_str(host)?;
    Some(domain.to_ascii_lowercase())
}
