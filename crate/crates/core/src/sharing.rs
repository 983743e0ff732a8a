//! Social share records, the binary domain-by-user sharing matrix, and the
//! Jaccard co-sharing graph.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::domain::normalize_domain;
use crate::error::{Error, Result};
use crate::graph::LabelIndex;
use crate::label::{Category, Label};

/// Minimum number of distinct domains a user must share to be kept.
pub const DEFAULT_MIN_DOMAINS: usize = 2;
/// Minimum number of distinct sharers a domain must have to be kept.
pub const DEFAULT_MIN_SHARERS: usize = 5;
/// Co-sharing edge threshold on the Jaccard index.
pub const DEFAULT_JACCARD_THRESHOLD: f64 = 0.01;

/// One share of a domain by a user. Extra fields in the input (geo,
/// replies, ...) are ignored.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShareRecord {
    pub user_id: String,
    pub domain: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shared_at: Option<String>,
}

impl ShareRecord {
    pub fn new(user_id: impl Into<String>, domain: impl Into<String>) -> Self {
        ShareRecord {
            user_id: user_id.into(),
            domain: domain.into(),
            shared_at: None,
        }
    }
}

/// Records read from a file plus the number of unreadable lines.
#[derive(Debug, Clone, Default)]
pub struct ShareFile {
    pub records: Vec<ShareRecord>,
    pub malformed: usize,
}

/// Read share records as newline-delimited JSON, or as a `user_id,domain`
/// CSV when the first non-blank line is not a JSON object.
pub fn read_share_records(path: &Path) -> Result<ShareFile> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut lines = BufReader::new(file).lines();
    let mut out = ShareFile::default();
    let mut first = None;
    for line in lines.by_ref() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if !line.trim().is_empty() {
            first = Some(line);
            break;
        }
    }
    let Some(first) = first else {
        return Ok(out);
    };

    if first.trim_start().starts_with('{') {
        for line in std::iter::once(Ok(first)).chain(lines) {
            let line = line.map_err(|e| Error::io(path, e))?;
            if line.trim().is_empty() {
                continue;
            }
            match serde_json::from_str::<ShareRecord>(&line) {
                Ok(r) => out.records.push(r),
                Err(_) => out.malformed += 1,
            }
        }
        return Ok(out);
    }

    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_path(path)
        .map_err(|e| Error::csv(path, e))?;
    let headers = reader.headers().map_err(|e| Error::csv(path, e))?.clone();
    let find = |name: &str| headers.iter().position(|h| h.eq_ignore_ascii_case(name));
    let (Some(user_col), Some(domain_col)) = (find("user_id"), find("domain")) else {
        return Err(Error::Format {
            path: path.to_path_buf(),
            line: 1,
            message: "expected a user_id,domain header".into(),
        });
    };
    let time_col = find("shared_at");
    for row in reader.records() {
        match row {
            Ok(row) => match (row.get(user_col), row.get(domain_col)) {
                (Some(u), Some(d)) => out.records.push(ShareRecord {
                    user_id: u.to_string(),
                    domain: d.to_string(),
                    shared_at: time_col
                        .and_then(|c| row.get(c))
                        .filter(|s| !s.is_empty())
                        .map(str::to_string),
                }),
                _ => out.malformed += 1,
            },
            Err(_) => out.malformed += 1,
        }
    }
    Ok(out)
}

/// Sparse binary domain-by-user incidence. Row `i` lists, in increasing
/// order, the users that shared domain `i` at least once.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SharingMatrix {
    domains: Vec<String>,
    users: Vec<String>,
    rows: Vec<Vec<u32>>,
}

impl SharingMatrix {
    /// Build from `(domain, sharer indices)` rows. Sharer lists are sorted
    /// and deduplicated.
    pub fn from_rows(
        domains: Vec<String>,
        users: Vec<String>,
        mut rows: Vec<Vec<u32>>,
    ) -> Result<Self> {
        if domains.len() != rows.len() {
            return Err(Error::InvalidParameter(format!(
                "{} domains but {} rows",
                domains.len(),
                rows.len()
            )));
        }
        for row in &mut rows {
            row.sort_unstable();
            row.dedup();
            if row.last().is_some_and(|&u| u as usize >= users.len()) {
                return Err(Error::InvalidParameter("user index out of range".into()));
            }
        }
        Ok(SharingMatrix {
            domains,
            users,
            rows,
        })
    }

    pub fn domains(&self) -> &[String] {
        &self.domains
    }

    pub fn users(&self) -> &[String] {
        &self.users
    }

    pub fn domain_count(&self) -> usize {
        self.domains.len()
    }

    pub fn user_count(&self) -> usize {
        self.users.len()
    }

    /// Sorted user indices that shared domain `row`.
    pub fn sharers(&self, row: usize) -> &[u32] {
        &self.rows[row]
    }

    pub fn row_of(&self, domain: &str) -> Option<usize> {
        self.domains.iter().position(|d| d == domain)
    }

    pub fn contains(&self, row: usize, user: usize) -> bool {
        self.rows[row].binary_search(&(user as u32)).is_ok()
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    /// Distinct sharers per domain.
    pub fn domain_supports(&self) -> Vec<usize> {
        self.rows.iter().map(Vec::len).collect()
    }

    /// Distinct domains per user.
    pub fn user_supports(&self) -> Vec<usize> {
        let mut support = vec![0; self.users.len()];
        for row in &self.rows {
            for &u in row {
                support[u as usize] += 1;
            }
        }
        support
    }

    /// Dense 0/1 rows, for small matrices and tests.
    pub fn to_dense(&self) -> Vec<Vec<u8>> {
        self.rows
            .iter()
            .map(|row| {
                let mut dense = vec![0; self.users.len()];
                for &u in row {
                    dense[u as usize] = 1;
                }
                dense
            })
            .collect()
    }
}

#[derive(Debug, Clone, Default)]
pub struct Ingested {
    pub matrix: SharingMatrix,
    /// Records with an empty user or an unparsable domain.
    pub skipped: usize,
}

/// Fold share records into a binary matrix. Domains and users are indexed
/// by first occurrence; repeated shares collapse to one entry.
pub fn ingest<I: IntoIterator<Item = ShareRecord>>(records: I) -> Ingested {
    let mut domain_index: HashMap<String, usize> = HashMap::new();
    let mut user_index: HashMap<String, u32> = HashMap::new();
    let mut domains = Vec::new();
    let mut users = Vec::new();
    let mut rows: Vec<Vec<u32>> = Vec::new();
    let mut skipped = 0;
    for record in records {
        let user = record.user_id.trim();
        let domain = match normalize_domain(&record.domain) {
            Ok(d) if !user.is_empty() => d,
            _ => {
                skipped += 1;
                continue;
            }
        };
        let row = *domain_index.entry(domain.clone()).or_insert_with(|| {
            domains.push(domain);
            rows.push(Vec::new());
            rows.len() - 1
        });
        let col = *user_index.entry(user.to_string()).or_insert_with(|| {
            users.push(user.to_string());
            (users.len() - 1) as u32
        });
        rows[row].push(col);
    }
    for row in &mut rows {
        row.sort_unstable();
        row.dedup();
    }
    Ingested {
        matrix: SharingMatrix {
            domains,
            users,
            rows,
        },
        skipped,
    }
}

/// Drop users that shared fewer than `min_domains` distinct domains.
pub fn filter_users(matrix: &SharingMatrix, min_domains: usize) -> SharingMatrix {
    let support = matrix.user_supports();
    let mut remap = vec![None; matrix.users.len()];
    let mut users = Vec::new();
    for (j, user) in matrix.users.iter().enumerate() {
        if support[j] >= min_domains {
            remap[j] = Some(users.len() as u32);
            users.push(user.clone());
        }
    }
    let rows = matrix
        .rows
        .iter()
        .map(|row| row.iter().filter_map(|&u| remap[u as usize]).collect())
        .collect();
    SharingMatrix {
        domains: matrix.domains.clone(),
        users,
        rows,
    }
}

/// Drop domains with fewer than `min_sharers` distinct sharers.
pub fn filter_domains(matrix: &SharingMatrix, min_sharers: usize) -> SharingMatrix {
    let (domains, rows) = matrix
        .domains
        .iter()
        .zip(&matrix.rows)
        .filter(|(_, row)| row.len() >= min_sharers)
        .map(|(d, r)| (d.clone(), r.clone()))
        .unzip();
    SharingMatrix {
        domains,
        users: matrix.users.clone(),
        rows,
    }
}

/// `|A ∩ B| / |A ∪ B|` for sorted, deduplicated slices; 0 when both are empty.
pub fn jaccard<T: Ord>(a: &[T], b: &[T]) -> f64 {
    let (mut i, mut j, mut common) = (0, 0, 0usize);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                common += 1;
                i += 1;
                j += 1;
            }
        }
    }
    let union = a.len() + b.len() - common;
    if union == 0 {
        0.0
    } else {
        common as f64 / union as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoShareNode {
    pub domain: String,
    pub label: Label,
    pub category: Category,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoShareEdge {
    /// Node indices with `a < b`.
    pub a: usize,
    pub b: usize,
    pub jaccard: f64,
}

/// Undirected graph over matrix rows; an edge joins two domains whose sharer
/// sets have a positive Jaccard index of at least `threshold`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoShareGraph {
    pub nodes: Vec<CoShareNode>,
    pub edges: Vec<CoShareEdge>,
    pub threshold: f64,
}

impl CoShareGraph {
    pub fn degrees(&self) -> Vec<usize> {
        let mut degree = vec![0; self.nodes.len()];
        for e in &self.edges {
            degree[e.a] += 1;
            degree[e.b] += 1;
        }
        degree
    }
}

/// All-pairs Jaccard graph. Nodes follow matrix row order; edges are sorted
/// by `(a, b)`. Isolated nodes are kept.
pub fn build_coshare_graph(
    matrix: &SharingMatrix,
    labels: &LabelIndex,
    threshold: f64,
) -> CoShareGraph {
    let nodes = matrix
        .domains
        .iter()
        .map(|d| {
            let (label, category) = labels.lookup(d);
            CoShareNode {
                domain: d.clone(),
                label,
                category,
            }
        })
        .collect();
    let mut edges = Vec::new();
    for a in 0..matrix.rows.len() {
        for b in (a + 1)..matrix.rows.len() {
            let j = jaccard(&matrix.rows[a], &matrix.rows[b]);
            if j > 0.0 && j >= threshold {
                edges.push(CoShareEdge { a, b, jaccard: j });
            }
        }
    }
    CoShareGraph {
        nodes,
        edges,
        threshold,
    }
}

/// Mean within-label and cross-label edge counts per misinfo and info node.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ConnectivityStats {
    pub misinfo_within: f64,
    pub misinfo_cross: f64,
    pub info_within: f64,
    pub info_cross: f64,
    /// Number of connected misinfo / info nodes the means are taken over.
    pub misinfo_nodes: usize,
    pub info_nodes: usize,
}

/// Averages are taken over nodes with at least one edge, the nodes that
/// remain once isolated ones are dropped from the picture.
pub fn connectivity_stats(graph: &CoShareGraph) -> ConnectivityStats {
    let n = graph.nodes.len();
    let mut within = vec![0usize; n];
    let mut cross = vec![0usize; n];
    for e in &graph.edges {
        let same = graph.nodes[e.a].label == graph.nodes[e.b].label;
        for v in [e.a, e.b] {
            if same {
                within[v] += 1;
            } else {
                cross[v] += 1;
            }
        }
    }
    let mean = |label: Label| {
        let connected: Vec<usize> = (0..n)
            .filter(|&v| graph.nodes[v].label == label && within[v] + cross[v] > 0)
            .collect();
        if connected.is_empty() {
            return (0.0, 0.0, 0);
        }
        let k = connected.len() as f64;
        (
            connected.iter().map(|&v| within[v]).sum::<usize>() as f64 / k,
            connected.iter().map(|&v| cross[v]).sum::<usize>() as f64 / k,
            connected.len(),
        )
    };
    let (misinfo_within, misinfo_cross, misinfo_nodes) = mean(Label::Misinfo);
    let (info_within, info_cross, info_nodes) = mean(Label::Info);
    ConnectivityStats {
        misinfo_within,
        misinfo_cross,
        info_within,
        info_cross,
        misinfo_nodes,
        info_nodes,
    }
}

/// Shape of a synthetic sharing population with planted structure.
#[derive(Debug, Clone)]
pub struct PlantedConfig {
    pub misinfo_domains: usize,
    pub info_domains: usize,
    /// Users that mostly share misinfo domains; the rest mostly share info.
    pub misinfo_users: usize,
    pub info_users: usize,
    /// Users sharing uniformly at random across both sides.
    pub mixed_users: usize,
    /// Probability that a partisan user's share stays on their side.
    pub loyalty: f64,
    pub min_shares: usize,
    pub max_shares: usize,
}

impl Default for PlantedConfig {
    /// 60 domains (24 misinfo, 36 info) and 400 users.
    fn default() -> Self {
        PlantedConfig {
            misinfo_domains: 24,
            info_domains: 36,
            misinfo_users: 160,
            info_users: 200,
            mixed_users: 40,
            loyalty: 0.9,
            min_shares: 2,
            max_shares: 10,
        }
    }
}

/// Synthetic share records where misinfo and info domains are shared by
/// largely disjoint audiences. Returns the records and the ground-truth
/// labels, misinfo domains first.
pub fn planted_share_records(
    config: &PlantedConfig,
    seed: u64,
) -> (Vec<ShareRecord>, Vec<(String, Label)>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let misinfo: Vec<String> = (0..config.misinfo_domains)
        .map(|i| format!("rumor{i:02}.news"))
        .collect();
    let info: Vec<String> = (0..config.info_domains)
        .map(|i| format!("daily{i:02}.com"))
        .collect();
    let mut records = Vec::new();
    let groups = [
        (config.misinfo_users, Some(true)),
        (config.info_users, Some(false)),
        (config.mixed_users, None),
    ];
    let mut user = 0usize;
    for (count, side) in groups {
        for _ in 0..count {
            let shares = rng.random_range(config.min_shares..=config.max_shares);
            for _ in 0..shares {
                let pick_misinfo = match side {
                    Some(m) => {
                        if rng.random_bool(config.loyalty) {
                            m
                        } else {
                            !m
                        }
                    }
                    None => rng.random_bool(0.5),
                };
                let pool = if pick_misinfo { &misinfo } else { &info };
                let domain = pool[rng.random_range(0..pool.len())].clone();
                records.push(ShareRecord {
                    user_id: format!("u{user:04}"),
                    domain,
                    shared_at: None,
                });
            }
            user += 1;
        }
    }
    let labels = misinfo
        .into_iter()
        .map(|d| (d, Label::Misinfo))
        .chain(info.into_iter().map(|d| (d, Label::Info)))
        .collect();
    (records, labels)
}
