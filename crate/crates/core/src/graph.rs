//! The directed domain hyperlink graph and its statistics.
//!
//! Nodes are registrable domains; an edge `A -> B` means some crawled page
//! of `A` links to a URL whose registrable domain is `B`. The graph is
//! unweighted: page-level links collapse to a single domain-level edge, and
//! self-links are dropped.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::curation::DomainRecord;
use crate::domain::normalize_domain;
use crate::error::{Error, Result};
use crate::label::{Category, Label};
use crate::snapshot::ScrapeSnapshot;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DomainNode {
    pub domain: String,
    pub label: Label,
    pub category: Category,
}

/// Label and category lookup built from the curated master list.
#[derive(Debug, Clone, Default)]
pub struct LabelIndex {
    entries: HashMap<String, (Label, Category)>,
}

impl LabelIndex {
    pub fn from_records(records: &[DomainRecord]) -> Self {
        LabelIndex {
            entries: records
                .iter()
                .map(|r| (r.domain.clone(), (r.label, r.category)))
                .collect(),
        }
    }

    pub fn insert(&mut self, domain: impl Into<String>, label: Label, category: Category) {
        self.entries.insert(domain.into(), (label, category));
    }

    pub fn label(&self, domain: &str) -> Label {
        self.entries.get(domain).map_or(Label::None, |e| e.0)
    }

    pub fn lookup(&self, domain: &str) -> (Label, Category) {
        self.entries
            .get(domain)
            .copied()
            .unwrap_or((Label::None, Category::Uncategorized))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Read any CSV with `domain` and `label` columns and an optional
    /// `category` column; the master list qualifies. Domains are normalized.
    pub fn load(path: &Path) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(|e| Error::csv(path, e))?;
        let headers = reader.headers().map_err(|e| Error::csv(path, e))?.clone();
        let find = |name: &str| headers.iter().position(|h| h.eq_ignore_ascii_case(name));
        let (Some(dc), Some(lc)) = (find("domain"), find("label")) else {
            return Err(Error::Format {
                path: path.to_path_buf(),
                line: 1,
                message: "expected domain and label columns".into(),
            });
        };
        let cc = find("category");
        let mut index = LabelIndex::default();
        for (i, row) in reader.records().enumerate() {
            let row = row.map_err(|e| Error::csv(path, e))?;
            let bad = |message: String| Error::Format {
                path: path.to_path_buf(),
                line: i + 2,
                message,
            };
            let domain =
                normalize_domain(row.get(dc).unwrap_or("")).map_err(|e| bad(e.to_string()))?;
            let label: Label = row
                .get(lc)
                .unwrap_or("")
                .parse()
                .map_err(|e: Error| bad(e.to_string()))?;
            let category: Category = match cc.and_then(|c| row.get(c)) {
                Some(c) => c.parse().map_err(|e: Error| bad(e.to_string()))?,
                None => Category::Uncategorized,
            };
            index.insert(domain, label, category);
        }
        Ok(index)
    }
}

impl FromIterator<(String, Label, Category)> for LabelIndex {
    fn from_iter<T: IntoIterator<Item = (String, Label, Category)>>(iter: T) -> Self {
        let mut index = LabelIndex::default();
        for (d, l, c) in iter {
            index.insert(d, l, c);
        }
        index
    }
}

/// Unweighted directed graph over domains. Nodes are kept sorted by domain
/// so that node indices are stable for a given node set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DomainGraph {
    nodes: Vec<DomainNode>,
    edges: BTreeSet<(usize, usize)>,
    pub level: u8,
    pub run_id: String,
}

impl DomainGraph {
    /// Build from explicit domains and edges. Labels come from `labels`;
    /// self-loops and duplicate edges are dropped and edge endpoints are
    /// added as nodes.
    pub fn from_edges<'a>(
        domains: impl IntoIterator<Item = &'a str>,
        edges: impl IntoIterator<Item = (&'a str, &'a str)>,
        labels: &LabelIndex,
    ) -> Self {
        let mut names: BTreeSet<String> = domains.into_iter().map(str::to_string).collect();
        let edges: Vec<(&str, &str)> = edges.into_iter().collect();
        for (a, b) in &edges {
            names.insert(a.to_string());
            names.insert(b.to_string());
        }
        let mut graph = DomainGraph::with_nodes(names, labels);
        for (a, b) in edges {
            let (ia, ib) = (graph.index_of(a).unwrap(), graph.index_of(b).unwrap());
            if ia != ib {
                graph.edges.insert((ia, ib));
            }
        }
        graph
    }

    fn with_nodes(names: BTreeSet<String>, labels: &LabelIndex) -> Self {
        let nodes = names
            .into_iter()
            .map(|domain| {
                let (label, category) = labels.lookup(&domain);
                DomainNode {
                    domain,
                    label,
                    category,
                }
            })
            .collect();
        DomainGraph {
            nodes,
            edges: BTreeSet::new(),
            level: 1,
            run_id: String::new(),
        }
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn nodes(&self) -> &[DomainNode] {
        &self.nodes
    }

    pub fn node(&self, index: usize) -> &DomainNode {
        &self.nodes[index]
    }

    /// Edges as node-index pairs, in sorted order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn index_of(&self, domain: &str) -> Option<usize> {
        self.nodes
            .binary_search_by(|n| n.domain.as_str().cmp(domain))
            .ok()
    }

    pub fn has_edge(&self, from: usize, to: usize) -> bool {
        self.edges.contains(&(from, to))
    }

    /// Undirected adjacency keeping only reciprocated pairs.
    pub fn mutual_adjacency(&self) -> Vec<BTreeSet<usize>> {
        let mut adj = vec![BTreeSet::new(); self.nodes.len()];
        for &(a, b) in &self.edges {
            if a < b && self.edges.contains(&(b, a)) {
                adj[a].insert(b);
                adj[b].insert(a);
            }
        }
        adj
    }

    /// Undirected projection: `{a, b}` for every edge in either direction.
    pub fn undirected_edges(&self) -> BTreeSet<(usize, usize)> {
        self.edges
            .iter()
            .map(|&(a, b)| (a.min(b), a.max(b)))
            .collect()
    }
}

/// Result of [`build_graph`].
#[derive(Debug, Clone)]
pub struct GraphBuild {
    pub graph: DomainGraph,
    /// Links whose URL had no registrable domain.
    pub skipped_links: usize,
    /// Snapshots ignored because the domain was excluded during the crawl.
    pub excluded_domains: Vec<String>,
}

/// Build the domain graph from one run's snapshots.
///
/// Every non-excluded snapshot domain becomes a node, isolated or not. Each
/// extracted link adds `snapshot.domain -> normalize(link)`.
pub fn build_graph(snapshots: &[ScrapeSnapshot], labels: &LabelIndex) -> Result<GraphBuild> {
    let (run_id, level) = match snapshots.first() {
        Some(s) => (s.run_id.clone(), s.level),
        None => (String::new(), 1),
    };
    if let Some(other) = snapshots
        .iter()
        .find(|s| s.run_id != run_id || s.level != level)
    {
        return Err(Error::InvalidParameter(format!(
            "snapshots mix runs or levels: {run_id:?}/{level} and {:?}/{}",
            other.run_id, other.level
        )));
    }

    let mut names = BTreeSet::new();
    let mut pairs = BTreeSet::new();
    let mut skipped_links = 0;
    let mut excluded_domains = Vec::new();
    for snapshot in snapshots {
        if snapshot.excluded {
            excluded_domains.push(snapshot.domain.clone());
            continue;
        }
        names.insert(snapshot.domain.clone());
        for link in snapshot.links() {
            match normalize_domain(link) {
                Ok(target) => {
                    if target != snapshot.domain {
                        names.insert(target.clone());
                        pairs.insert((snapshot.domain.clone(), target));
                    }
                }
                Err(_) => skipped_links += 1,
            }
        }
    }
    excluded_domains.sort();
    excluded_domains.dedup();

    let mut graph = DomainGraph::with_nodes(names, labels);
    for (a, b) in &pairs {
        let ia = graph.index_of(a).expect("source node");
        let ib = graph.index_of(b).expect("target node");
        graph.edges.insert((ia, ib));
    }
    graph.level = level;
    graph.run_id = run_id;
    Ok(GraphBuild {
        graph,
        skipped_links,
        excluded_domains,
    })
}

/// Outgoing-link counts from one group of source domains.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LinkStatsRow {
    pub key: String,
    pub to_misinfo: usize,
    pub to_none: usize,
    pub to_info: usize,
}

impl LinkStatsRow {
    fn new(key: &str) -> Self {
        LinkStatsRow {
            key: key.to_string(),
            to_misinfo: 0,
            to_none: 0,
            to_info: 0,
        }
    }

    pub fn total(&self) -> usize {
        self.to_misinfo + self.to_none + self.to_info
    }

    /// Percentages of the total, rounded to two decimals. All zero when the
    /// row has no links.
    pub fn percents(&self) -> [f64; 3] {
        let total = self.total();
        [self.to_misinfo, self.to_none, self.to_info].map(|c| percent(c, total))
    }

    fn add(&mut self, target: Label) {
        match target {
            Label::Misinfo => self.to_misinfo += 1,
            Label::None => self.to_none += 1,
            Label::Info => self.to_info += 1,
        }
    }
}

fn percent(count: usize, total: usize) -> f64 {
    if total == 0 {
        0.0
    } else {
        (10_000.0 * count as f64 / total as f64).round() / 100.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Grouping {
    /// Rows `misinfo` and `info`.
    ByLabel,
    /// One row per informational category, in table order.
    ByInfoCategory,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LinkStatsTable {
    pub rows: Vec<LinkStatsRow>,
}

pub const LINK_STATS_HEADER: &str =
    "row,to_misinfo_n,to_misinfo_pct,to_none_n,to_none_pct,to_info_n,to_info_pct,total";

impl LinkStatsTable {
    /// CSV body rows (no header), two-decimal percentages.
    pub fn csv_rows(&self) -> String {
        let mut out = String::new();
        for row in &self.rows {
            let [pm, pn, pi] = row.percents();
            out.push_str(&format!(
                "{},{},{:.2},{},{:.2},{},{:.2},{}\n",
                row.key,
                row.to_misinfo,
                pm,
                row.to_none,
                pn,
                row.to_info,
                pi,
                row.total()
            ));
        }
        out
    }

    pub fn to_csv(&self) -> String {
        format!("{LINK_STATS_HEADER}\n{}", self.csv_rows())
    }

    pub fn row(&self, key: &str) -> Option<&LinkStatsRow> {
        self.rows.iter().find(|r| r.key == key)
    }
}

/// Cross-tabulate outgoing edges by source group and target label.
pub fn link_stats(graph: &DomainGraph, grouping: Grouping) -> LinkStatsTable {
    let mut rows: Vec<LinkStatsRow> = match grouping {
        Grouping::ByLabel => vec![LinkStatsRow::new("misinfo"), LinkStatsRow::new("info")],
        Grouping::ByInfoCategory => Category::TABLE_ORDER
            .iter()
            .map(|c| LinkStatsRow::new(c.as_str()))
            .collect(),
    };
    for (a, b) in graph.edges() {
        let src = graph.node(a);
        let row = match grouping {
            Grouping::ByLabel => match src.label {
                Label::Misinfo => Some(0),
                Label::Info => Some(1),
                Label::None => None,
            },
            Grouping::ByInfoCategory if src.label == Label::Info => Category::TABLE_ORDER
                .iter()
                .position(|c| *c == src.category),
            Grouping::ByInfoCategory => None,
        };
        if let Some(i) = row {
            rows[i].add(graph.node(b).label);
        }
    }
    LinkStatsTable { rows }
}

/// Label rows followed by category rows, as one CSV document.
pub fn link_stats_csv(graph: &DomainGraph) -> String {
    format!(
        "{LINK_STATS_HEADER}\n{}{}",
        link_stats(graph, Grouping::ByLabel).csv_rows(),
        link_stats(graph, Grouping::ByInfoCategory).csv_rows()
    )
}

/// Maximal cliques of the reciprocal-link graph with at least `min_size`
/// members. Members are sorted; cliques are ordered by size descending, then
/// lexicographically.
pub fn find_mutual_cliques(graph: &DomainGraph, min_size: usize) -> Vec<Vec<String>> {
    let adj = graph.mutual_adjacency();
    let mut found = Vec::new();
    let candidates: BTreeSet<usize> = (0..graph.node_count())
        .filter(|&v| !adj[v].is_empty() || min_size <= 1)
        .collect();
    bron_kerbosch(
        &adj,
        &mut Vec::new(),
        candidates,
        BTreeSet::new(),
        &mut found,
    );

    let mut cliques: Vec<Vec<String>> = found
        .into_iter()
        .filter(|c| c.len() >= min_size)
        .map(|c| {
            let mut names: Vec<String> = c.iter().map(|&v| graph.node(v).domain.clone()).collect();
            names.sort();
            names
        })
        .collect();
    cliques.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
    cliques
}

/// Bron–Kerbosch with Tomita pivoting.
fn bron_kerbosch(
    adj: &[BTreeSet<usize>],
    current: &mut Vec<usize>,
    mut candidates: BTreeSet<usize>,
    mut excluded: BTreeSet<usize>,
    out: &mut Vec<Vec<usize>>,
) {
    if candidates.is_empty() {
        if excluded.is_empty() && !current.is_empty() {
            out.push(current.clone());
        }
        return;
    }
    let pivot = candidates
        .union(&excluded)
        .max_by_key(|&&u| adj[u].intersection(&candidates).count())
        .copied()
        .expect("non-empty");
    let branch: Vec<usize> = candidates.difference(&adj[pivot]).copied().collect();
    for v in branch {
        current.push(v);
        bron_kerbosch(
            adj,
            current,
            candidates.intersection(&adj[v]).copied().collect(),
            excluded.intersection(&adj[v]).copied().collect(),
            out,
        );
        current.pop();
        candidates.remove(&v);
        excluded.insert(v);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GraphStats {
    pub nodes: usize,
    pub edges: usize,
    /// Mean out-degree, `|E| / n` (equivalently the mean in-degree).
    pub average_degree: f64,
    /// `|E| / (n (n - 1))`, zero for fewer than two nodes.
    pub density: f64,
}

/// Degree and density of the subgraph induced by `subset` (node indices).
pub fn subgraph_stats(graph: &DomainGraph, subset: &[usize]) -> GraphStats {
    let members: BTreeSet<usize> = subset.iter().copied().collect();
    let n = members.len();
    let edges = graph
        .edges()
        .filter(|(a, b)| members.contains(a) && members.contains(b))
        .count();
    if n <= 1 {
        return GraphStats {
            nodes: n,
            edges,
            average_degree: 0.0,
            density: 0.0,
        };
    }
    GraphStats {
        nodes: n,
        edges,
        average_degree: edges as f64 / n as f64,
        density: edges as f64 / (n * (n - 1)) as f64,
    }
}

/// Same as [`subgraph_stats`] with members given by domain name. Unknown
/// domains are ignored.
pub fn subgraph_stats_by_domain<S: AsRef<str>>(graph: &DomainGraph, domains: &[S]) -> GraphStats {
    let subset: Vec<usize> = domains
        .iter()
        .filter_map(|d| graph.index_of(d.as_ref()))
        .collect();
    subgraph_stats(graph, &subset)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Discovery {
    pub domain: String,
    /// Number of distinct misinfo domains linking here.
    pub misinfo_in_degree: usize,
}

/// Unlabeled domains linked from at least `min_misinfo_sources` distinct
/// misinfo domains, most-linked first.
pub fn discovered_domains(graph: &DomainGraph, min_misinfo_sources: usize) -> Vec<Discovery> {
    let mut counts: BTreeMap<usize, usize> = BTreeMap::new();
    for (a, b) in graph.edges() {
        if graph.node(a).label == Label::Misinfo && graph.node(b).label == Label::None {
            *counts.entry(b).or_default() += 1;
        }
    }
    let mut out: Vec<Discovery> = counts
        .into_iter()
        .filter(|&(_, c)| c >= min_misinfo_sources)
        .map(|(v, c)| Discovery {
            domain: graph.node(v).domain.clone(),
            misinfo_in_degree: c,
        })
        .collect();
    out.sort_by(|a, b| {
        b.misinfo_in_degree
            .cmp(&a.misinfo_in_degree)
            .then_with(|| a.domain.cmp(&b.domain))
    });
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn label_file_formats() {
        let dir = tempfile::tempdir().unwrap();
        let simple = dir.path().join("labels.csv");
        std::fs::write(&simple, "domain,label\nWWW.A.com,misinfo\nb.org,info\n").unwrap();
        let idx = LabelIndex::load(&simple).unwrap();
        assert_eq!(
            idx.lookup("a.com"),
            (Label::Misinfo, Category::Uncategorized)
        );
        assert_eq!(idx.len(), 2);

        let bad = dir.path().join("bad.csv");
        std::fs::write(&bad, "domain,label\na.com,maybe\n").unwrap();
        assert!(matches!(
            LabelIndex::load(&bad),
            Err(Error::Format { line: 2, .. })
        ));
        std::fs::write(&bad, "site,kind\na.com,info\n").unwrap();
        assert!(LabelIndex::load(&bad).is_err());
    }
    use crate::snapshot::{FetchResult, FetchStatus};
    use proptest::prelude::*;

    fn snap(domain: &str, links: &[&str]) -> ScrapeSnapshot {
        ScrapeSnapshot {
            run_id: "t".into(),
            domain: domain.into(),
            level: 1,
            excluded: false,
            reason: None,
            fetches: vec![FetchResult {
                url: format!("https://{domain}/"),
                status: FetchStatus::Http(200),
                body_hash: None,
                fetched_at: String::new(),
                links: links.iter().map(|s| s.to_string()).collect(),
            }],
        }
    }

    fn labels(pairs: &[(&str, Label, Category)]) -> LabelIndex {
        pairs
            .iter()
            .map(|(d, l, c)| (d.to_string(), *l, *c))
            .collect()
    }

    fn names(graph: &DomainGraph) -> Vec<(String, String)> {
        graph
            .edges()
            .map(|(a, b)| (graph.node(a).domain.clone(), graph.node(b).domain.clone()))
            .collect()
    }

    #[test]
    fn page_link_collapses_to_domain_edge() {
        let build = build_graph(
            &[snap(
                "hoggwatch.com",
                &["https://www.infowars.com/posts/abc"],
            )],
            &LabelIndex::default(),
        )
        .unwrap();
        assert_eq!(
            names(&build.graph),
            vec![("hoggwatch.com".into(), "infowars.com".into())]
        );
    }

    #[test]
    fn self_links_and_duplicates_dropped() {
        let build = build_graph(
            &[snap(
                "a.com",
                &[
                    "https://a.com/x",
                    "https://www.a.com/",
                    "https://b.com/1",
                    "http://b.com/2",
                    "mailto:x",
                ],
            )],
            &LabelIndex::default(),
        )
        .unwrap();
        assert_eq!(build.graph.node_count(), 2);
        assert_eq!(build.graph.edge_count(), 1);
        assert_eq!(build.skipped_links, 1);

        let lonely = build_graph(&[snap("a.com", &["/self"])], &LabelIndex::default()).unwrap();
        assert_eq!(lonely.graph.node_count(), 1);
        assert_eq!(lonely.graph.edge_count(), 0);
    }

    #[test]
    fn excluded_snapshots_and_mixed_runs() {
        let mut gone = snap("gone.com", &["https://b.com/"]);
        gone.excluded = true;
        let build = build_graph(&[gone, snap("a.com", &[])], &LabelIndex::default()).unwrap();
        assert_eq!(build.graph.node_count(), 1);
        assert_eq!(build.excluded_domains, vec!["gone.com".to_string()]);

        let mut other = snap("b.com", &[]);
        other.level = 2;
        assert!(build_graph(&[snap("a.com", &[]), other], &LabelIndex::default()).is_err());
    }

    #[test]
    fn one_edge_misinfo_to_info() {
        let idx = labels(&[
            ("m.com", Label::Misinfo, Category::Uncategorized),
            ("i.com", Label::Info, Category::Sports),
        ]);
        let g = DomainGraph::from_edges([], [("m.com", "i.com")], &idx);
        let table = link_stats(&g, Grouping::ByLabel);
        let row = table.row("misinfo").unwrap();
        assert_eq!((row.to_misinfo, row.to_none, row.to_info), (0, 0, 1));
        assert_eq!(row.percents(), [0.0, 0.0, 100.0]);
        assert_eq!(table.row("info").unwrap().total(), 0);
        assert_eq!(table.row("info").unwrap().percents(), [0.0; 3]);
        assert_eq!(
            table.to_csv(),
            format!("{LINK_STATS_HEADER}\nmisinfo,0,0.00,0,0.00,1,100.00,1\ninfo,0,0.00,0,0.00,0,0.00,0\n")
        );
    }

    #[test]
    fn table_percent_arithmetic() {
        // Counts of the first misinfo row reported for the level-1 crawl.
        let row = LinkStatsRow {
            key: "misinfo".into(),
            to_misinfo: 1404,
            to_none: 6098,
            to_info: 343,
        };
        assert_eq!(row.total(), 7845);
        assert_eq!(row.percents(), [17.90, 77.73, 4.37]);
    }

    #[test]
    fn category_rows_in_table_order() {
        let idx = labels(&[
            ("s.com", Label::Info, Category::Sports),
            ("h.com", Label::Info, Category::Health),
            ("m.com", Label::Misinfo, Category::Uncategorized),
        ]);
        let g = DomainGraph::from_edges(
            [],
            [("s.com", "m.com"), ("h.com", "x.com"), ("m.com", "x.com")],
            &idx,
        );
        let t = link_stats(&g, Grouping::ByInfoCategory);
        let keys: Vec<&str> = t.rows.iter().map(|r| r.key.as_str()).collect();
        assert_eq!(
            keys,
            [
                "entertainment",
                "education",
                "newsandmedia",
                "business",
                "sports",
                "religion",
                "health"
            ]
        );
        assert_eq!(t.row("sports").unwrap().to_misinfo, 1);
        assert_eq!(t.row("health").unwrap().to_none, 1);
    }

    fn complete(names: &[&str]) -> Vec<(String, String)> {
        let mut out = Vec::new();
        for a in names {
            for b in names {
                if a != b {
                    out.push((a.to_string(), b.to_string()));
                }
            }
        }
        out
    }

    #[test]
    fn planted_cliques() {
        let news = [
            "cancer.news",
            "climate.news",
            "food.news",
            "health.news",
            "medicine.news",
            "naturalmedicine.news",
            "pollution.news",
            "sciences.news",
        ];
        let trio = [
            "blackeyepolitics.com",
            "greatamericandaily.com",
            "americanpatriotdaily.com",
        ];
        let mut edges = complete(&news);
        edges.extend(complete(&trio));
        // One-way links never create cliques.
        edges.push(("cancer.news".into(), "blackeyepolitics.com".into()));
        edges.push(("other.com".into(), "food.news".into()));
        let g = DomainGraph::from_edges(
            [],
            edges.iter().map(|(a, b)| (a.as_str(), b.as_str())),
            &LabelIndex::default(),
        );
        let cliques = find_mutual_cliques(&g, 3);
        let mut news_sorted = news.to_vec();
        news_sorted.sort();
        let mut trio_sorted = trio.to_vec();
        trio_sorted.sort();
        assert_eq!(cliques, vec![news_sorted, trio_sorted]);
    }

    #[test]
    fn directed_cycle_has_no_mutual_clique() {
        let g = DomainGraph::from_edges(
            [],
            [("a.com", "b.com"), ("b.com", "c.com"), ("c.com", "a.com")],
            &LabelIndex::default(),
        );
        assert!(find_mutual_cliques(&g, 3).is_empty());
    }

    #[test]
    fn density_examples() {
        let tri = complete(&["a.com", "b.com", "c.com"]);
        let g = DomainGraph::from_edges(
            [],
            tri.iter().map(|(a, b)| (a.as_str(), b.as_str())),
            &LabelIndex::default(),
        );
        let all: Vec<usize> = (0..3).collect();
        let s = subgraph_stats(&g, &all);
        assert_eq!(s.edges, 6);
        assert_eq!(s.density, 1.0);
        assert_eq!(s.average_degree, 2.0);

        // 8 nodes, 25 directed edges: a full 5-cycle in both directions
        // (10 edges) plus 15 one-way edges.
        let names: Vec<String> = (0..8).map(|i| format!("n{i}.org")).collect();
        let mut edges: Vec<(usize, usize)> = Vec::new();
        for i in 0..5 {
            edges.push((i, (i + 1) % 5));
            edges.push(((i + 1) % 5, i));
        }
        for i in 0..8 {
            for j in 0..8 {
                if edges.len() < 25 && i < j && j >= 5 {
                    edges.push((i, j));
                }
            }
        }
        assert_eq!(edges.len(), 25);
        let g = DomainGraph::from_edges(
            [],
            edges
                .iter()
                .map(|&(a, b)| (names[a].as_str(), names[b].as_str())),
            &LabelIndex::default(),
        );
        let s = subgraph_stats_by_domain(&g, &names);
        assert_eq!(format!("{:.3}", s.density), "0.446");
        assert_eq!(s.average_degree, 3.125);

        let single = subgraph_stats(&g, &[0]);
        assert_eq!((single.density, single.average_degree), (0.0, 0.0));
    }

    #[test]
    fn discovery_threshold() {
        let idx = labels(&[
            ("m1.com", Label::Misinfo, Category::Uncategorized),
            ("m2.com", Label::Misinfo, Category::Uncategorized),
            ("m3.com", Label::Misinfo, Category::Uncategorized),
            ("i1.com", Label::Info, Category::Business),
            ("i2.com", Label::Info, Category::Business),
        ]);
        let g = DomainGraph::from_edges(
            [],
            [
                ("m1.com", "x.news"),
                ("m2.com", "x.news"),
                ("m3.com", "x.news"),
                ("m1.com", "m2.com"),
                ("i1.com", "y.com"),
                ("i2.com", "y.com"),
                ("m1.com", "z.com"),
            ],
            &idx,
        );
        assert_eq!(
            discovered_domains(&g, 2),
            vec![Discovery {
                domain: "x.news".into(),
                misinfo_in_degree: 3
            }]
        );
        assert!(discovered_domains(&g, 4).is_empty());
        assert_eq!(discovered_domains(&g, 1).len(), 2);
    }

    fn arb_edges(n: usize) -> impl Strategy<Value = Vec<(usize, usize)>> {
        proptest::collection::vec((0..n, 0..n), 0..(n * n))
    }

    fn brute_force_maximal_cliques(adj: &[BTreeSet<usize>]) -> BTreeSet<Vec<usize>> {
        let n = adj.len();
        let is_clique = |mask: u32| {
            (0..n).all(|a| {
                mask & (1 << a) == 0
                    || (0..n).all(|b| a == b || mask & (1 << b) == 0 || adj[a].contains(&b))
            })
        };
        let mut out = BTreeSet::new();
        for mask in 1u32..(1 << n) {
            if mask.count_ones() < 2 || !is_clique(mask) {
                continue;
            }
            let maximal = (0..n).all(|v| mask & (1 << v) != 0 || !is_clique(mask | (1 << v)));
            if maximal {
                out.insert((0..n).filter(|v| mask & (1 << v) != 0).collect());
            }
        }
        out
    }

    proptest! {
        #[test]
        fn cliques_match_brute_force(edges in arb_edges(9)) {
            let names: Vec<String> = (0..9).map(|i| format!("d{i}.com")).collect();
            let g = DomainGraph::from_edges(
                names.iter().map(String::as_str),
                edges.iter().map(|&(a, b)| (names[a].as_str(), names[b].as_str())),
                &LabelIndex::default(),
            );
            let expected: BTreeSet<Vec<usize>> = brute_force_maximal_cliques(&g.mutual_adjacency())
                .into_iter()
                .filter(|c| c.len() >= 3)
                .collect();
            let got: BTreeSet<Vec<usize>> = find_mutual_cliques(&g, 3)
                .iter()
                .map(|c| {
                    let mut v: Vec<usize> = c.iter().map(|d| g.index_of(d).unwrap()).collect();
                    v.sort();
                    v
                })
                .collect();
            prop_assert_eq!(got, expected);
        }

        #[test]
        fn build_is_order_independent(
            links in proptest::collection::vec((0usize..6, 0usize..8), 0..30),
            seed in any::<u64>(),
        ) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let domains: Vec<String> = (0..8).map(|i| format!("s{i}.org")).collect();
            let mut snaps: Vec<ScrapeSnapshot> = (0..6)
                .map(|i| {
                    let l: Vec<String> = links
                        .iter()
                        .filter(|(s, _)| *s == i)
                        .map(|(_, t)| format!("https://www.{}/p", domains[*t]))
                        .collect();
                    let refs: Vec<&str> = l.iter().map(String::as_str).collect();
                    snap(&domains[i], &refs)
                })
                .collect();
            let a = build_graph(&snaps, &LabelIndex::default()).unwrap().graph;
            snaps.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let b = build_graph(&snaps, &LabelIndex::default()).unwrap().graph;
            prop_assert_eq!(a, b);
        }

        #[test]
        fn link_stats_match_tally(edges in arb_edges(10), label_seed in proptest::collection::vec(0u8..3, 10)) {
            let names: Vec<String> = (0..10).map(|i| format!("d{i}.com")).collect();
            let lab = |i: usize| match label_seed[i] { 0 => Label::Misinfo, 1 => Label::Info, _ => Label::None };
            let idx: LabelIndex = (0..10).map(|i| (names[i].clone(), lab(i), Category::Sports)).collect();
            let g = DomainGraph::from_edges(
                names.iter().map(String::as_str),
                edges.iter().map(|&(a, b)| (names[a].as_str(), names[b].as_str())),
                &idx,
            );
            // Independent tally over the deduplicated, loop-free edge list.
            let distinct: BTreeSet<(usize, usize)> = edges.iter().copied().filter(|(a, b)| a != b).collect();
            let mut tally = [[0usize; 3]; 2];
            for (a, b) in &distinct {
                let row = match lab(*a) { Label::Misinfo => 0, Label::Info => 1, Label::None => continue };
                let col = match lab(*b) { Label::Misinfo => 0, Label::None => 1, Label::Info => 2 };
                tally[row][col] += 1;
            }
            let t = link_stats(&g, Grouping::ByLabel);
            for (r, key) in ["misinfo", "info"].iter().enumerate() {
                let row = t.row(key).unwrap();
                prop_assert_eq!([row.to_misinfo, row.to_none, row.to_info], tally[r]);
                if row.total() > 0 {
                    let sum: f64 = row.percents().iter().sum();
                    prop_assert!((sum - 100.0).abs() <= 0.03 + 1e-9);
                }
            }
            let sourced = distinct.iter().filter(|(a, _)| lab(*a) != Label::None).count();
            prop_assert_eq!(t.rows.iter().map(LinkStatsRow::total).sum::<usize>(), sourced);
            // Information rows split by category sum to the info row.
            let cat = link_stats(&g, Grouping::ByInfoCategory);
            prop_assert_eq!(cat.row("sports").unwrap(), &LinkStatsRow { key: "sports".into(), ..t.row("info").unwrap().clone() });
        }

        #[test]
        fn density_bounds(edges in arb_edges(7)) {
            let names: Vec<String> = (0..7).map(|i| format!("d{i}.com")).collect();
            let g = DomainGraph::from_edges(
                names.iter().map(String::as_str),
                edges.iter().map(|&(a, b)| (names[a].as_str(), names[b].as_str())),
                &LabelIndex::default(),
            );
            let all: Vec<usize> = (0..7).collect();
            let s = subgraph_stats(&g, &all);
            prop_assert!((0.0..=1.0).contains(&s.density));
            prop_assert_eq!(s.density, g.edge_count() as f64 / 42.0);
        }
    }
}
