//! Collation of labeled domain-list sources into a scored master list.
//!
//! Raw source lists overlap and contain mislabeled popular sites. Every
//! distinct registrable domain gets a frequency `f` (how many source rows
//! name it) and a popularity rank `r`, and is scored `f * exp(r / 5000)`:
//! popular domains keep a weight near `f`, obscure ones are boosted. The
//! highest-scoring domains, minus a hand-maintained denylist, form the
//! misinformation side of the master list. The informational side is drawn
//! per category from a trusted list.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::domain::normalize_domain;
use crate::error::{Error, Result};
use crate::label::{Category, Label};

/// Divisor applied to the popularity rank inside the score exponent.
pub const RANK_SCALE: f64 = 5000.0;

/// Rank assumed for domains missing from the popularity list: one past the
/// end of a top-million list.
pub const FALLBACK_RANK: u64 = 1_000_001;

/// Default size of the misinformation selection.
pub const DEFAULT_MISINFO_LIMIT: usize = 1059;

/// One row of a labeled source list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceEntry {
    pub source_name: String,
    pub raw_domain: String,
}

impl SourceEntry {
    pub fn new(source_name: impl Into<String>, raw_domain: impl Into<String>) -> Result<Self> {
        let raw_domain = raw_domain.into();
        if raw_domain.trim().is_empty() {
            return Err(Error::InvalidDomain(raw_domain));
        }
        Ok(SourceEntry {
            source_name: source_name.into(),
            raw_domain,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainRecord {
    pub domain: String,
    pub label: Label,
    pub category: Category,
    pub frequency: u32,
    pub alexa_rank: Option<u64>,
    pub score: f64,
    pub sources: BTreeSet<String>,
}

impl DomainRecord {
    /// Rank used for scoring, falling back to [`FALLBACK_RANK`].
    pub fn effective_rank(&self) -> u64 {
        self.alexa_rank.unwrap_or(FALLBACK_RANK)
    }

    fn rescore(&mut self) {
        self.score = score_domain(self.frequency, self.effective_rank());
    }
}

/// `frequency * exp(rank / 5000)`.
pub fn score_domain(frequency: u32, alexa_rank: u64) -> f64 {
    f64::from(frequency) * (alexa_rank as f64 / RANK_SCALE).exp()
}

/// Output of [`collate`].
#[derive(Debug, Clone, Default)]
pub struct Collation {
    /// One record per distinct domain, sorted by domain.
    pub records: Vec<DomainRecord>,
    pub total_raw: usize,
    /// Raw strings that had no registrable domain.
    pub rejected: Vec<String>,
}

/// Deduplicate source entries by registrable domain.
///
/// Records start unranked (scored with [`FALLBACK_RANK`]) and labeled
/// `none`; see [`apply_ranks`] and [`rank_and_select`].
pub fn collate(entries: &[SourceEntry]) -> Collation {
    let mut by_domain: BTreeMap<String, DomainRecord> = BTreeMap::new();
    let mut rejected = Vec::new();
    for entry in entries {
        let domain = match normalize_domain(&entry.raw_domain) {
            Ok(d) => d,
            Err(_) => {
                rejected.push(entry.raw_domain.clone());
                continue;
            }
        };
        let record = by_domain
            .entry(domain.clone())
            .or_insert_with(|| DomainRecord {
                domain,
                label: Label::None,
                category: Category::Uncategorized,
                frequency: 0,
                alexa_rank: None,
                score: 0.0,
                sources: BTreeSet::new(),
            });
        record.frequency += 1;
        record.sources.insert(entry.source_name.clone());
    }
    let mut records: Vec<DomainRecord> = by_domain.into_values().collect();
    for r in &mut records {
        r.rescore();
    }
    Collation {
        records,
        total_raw: entries.len(),
        rejected,
    }
}

/// Popularity ranks keyed by registrable domain.
#[derive(Debug, Clone, Default)]
pub struct AlexaRanks {
    ranks: HashMap<String, u64>,
}

impl AlexaRanks {
    /// Read a `rank,domain` CSV. Duplicate domains keep their best rank.
    pub fn load(path: &Path) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(|e| Error::csv(path, e))?;
        let headers = reader.headers().map_err(|e| Error::csv(path, e))?.clone();
        let rank_col = column(&headers, "rank", path)?;
        let domain_col = column(&headers, "domain", path)?;
        let mut ranks = AlexaRanks::default();
        for (i, row) in reader.records().enumerate() {
            let row = row.map_err(|e| Error::csv(path, e))?;
            let line = i + 2;
            let rank: u64 = row
                .get(rank_col)
                .unwrap_or("")
                .parse()
                .ok()
                .filter(|r| *r >= 1)
                .ok_or_else(|| Error::Format {
                    path: path.to_path_buf(),
                    line,
                    message: "rank must be a positive integer".into(),
                })?;
            let raw = row.get(domain_col).unwrap_or("");
            match normalize_domain(raw) {
                Ok(domain) => ranks.insert(domain, rank),
                Err(_) => warn!(
                    "{}:{line}: skipping unparsable domain {raw:?}",
                    path.display()
                ),
            }
        }
        Ok(ranks)
    }

    pub fn insert(&mut self, domain: String, rank: u64) {
        let slot = self.ranks.entry(domain).or_insert(rank);
        *slot = (*slot).min(rank);
    }

    pub fn get(&self, domain: &str) -> Option<u64> {
        self.ranks.get(domain).copied()
    }

    pub fn len(&self) -> usize {
        self.ranks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranks.is_empty()
    }
}

impl FromIterator<(String, u64)> for AlexaRanks {
    fn from_iter<T: IntoIterator<Item = (String, u64)>>(iter: T) -> Self {
        let mut ranks = AlexaRanks::default();
        for (d, r) in iter {
            ranks.insert(d, r);
        }
        ranks
    }
}

/// Attach popularity ranks and recompute scores.
pub fn apply_ranks(records: &mut [DomainRecord], ranks: &AlexaRanks) {
    for r in records {
        r.alexa_rank = ranks.get(&r.domain);
        r.rescore();
    }
}

/// Score descending, then domain ascending.
pub fn sort_by_score(records: &mut [DomainRecord]) {
    records.sort_by(|a, b| {
        b.score
            .total_cmp(&a.score)
            .then_with(|| a.domain.cmp(&b.domain))
    });
}

#[derive(Debug, Clone, Default)]
pub struct Selection {
    pub selected: Vec<DomainRecord>,
    /// Denylisted domains that were present in the input.
    pub removed: Vec<String>,
    /// Set when fewer than `limit` records were available.
    pub shortfall: Option<usize>,
}

/// Drop denylisted domains and keep the `limit` highest-scoring records,
/// labeled misinformation.
pub fn rank_and_select(
    records: &[DomainRecord],
    denylist: &BTreeSet<String>,
    limit: usize,
) -> Selection {
    let mut removed = Vec::new();
    let mut kept: Vec<DomainRecord> = Vec::with_capacity(records.len());
    for r in records {
        if denylist.contains(&r.domain) {
            removed.push(r.domain.clone());
        } else {
            kept.push(r.clone());
        }
    }
    removed.sort();
    sort_by_score(&mut kept);
    let shortfall = (kept.len() < limit).then(|| limit - kept.len());
    kept.truncate(limit);
    for r in &mut kept {
        r.label = Label::Misinfo;
    }
    Selection {
        selected: kept,
        removed,
        shortfall,
    }
}

/// Per-category selection limits for the informational list.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InfoQuotas(pub BTreeMap<Category, usize>);

impl InfoQuotas {
    pub fn get(&self, category: Category) -> usize {
        self.0.get(&category).copied().unwrap_or(0)
    }

    pub fn total(&self) -> usize {
        self.0.values().sum()
    }
}

impl Default for InfoQuotas {
    /// 222 news, 198 each of business/education/entertainment/sports,
    /// 45 health and 15 religion.
    fn default() -> Self {
        InfoQuotas(BTreeMap::from([
            (Category::NewsAndMedia, 222),
            (Category::Business, 198),
            (Category::Education, 198),
            (Category::Entertainment, 198),
            (Category::Sports, 198),
            (Category::Health, 45),
            (Category::Religion, 15),
        ]))
    }
}

/// A row of the trusted informational list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InfoCandidate {
    pub domain: String,
    pub category: Category,
}

/// Read a `domain,category` CSV in file (popularity) order.
pub fn load_info_candidates(path: &Path) -> Result<Vec<InfoCandidate>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::csv(path, e))?;
    let headers = reader.headers().map_err(|e| Error::csv(path, e))?.clone();
    let domain_col = column(&headers, "domain", path)?;
    let category_col = column(&headers, "category", path)?;
    let mut out = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row = row.map_err(|e| Error::csv(path, e))?;
        let line = i + 2;
        let category: Category =
            row.get(category_col)
                .unwrap_or("")
                .parse()
                .map_err(|e: Error| Error::Format {
                    path: path.to_path_buf(),
                    line,
                    message: e.to_string(),
                })?;
        let raw = row.get(domain_col).unwrap_or("");
        match normalize_domain(raw) {
            Ok(domain) => out.push(InfoCandidate { domain, category }),
            Err(_) => warn!(
                "{}:{line}: skipping unparsable domain {raw:?}",
                path.display()
            ),
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Default)]
pub struct InfoSelection {
    pub records: Vec<DomainRecord>,
    /// Categories whose quota could not be met, with the missing count.
    pub shortfalls: BTreeMap<Category, usize>,
    /// Candidates skipped because they already carry the misinfo label.
    pub collisions: Vec<String>,
}

/// Take up to the quota of candidates per category, in input order.
///
/// Candidates in `misinfo` keep that label and are reported as collisions
/// instead of being selected. Uncategorized candidates are never selected.
pub fn select_informational(
    candidates: &[InfoCandidate],
    quotas: &InfoQuotas,
    misinfo: &HashSet<String>,
) -> InfoSelection {
    let mut taken: BTreeMap<Category, usize> = BTreeMap::new();
    let mut seen: HashSet<&str> = HashSet::new();
    let mut selection = InfoSelection::default();
    for c in candidates {
        if c.category == Category::Uncategorized || !seen.insert(&c.domain) {
            continue;
        }
        let count = taken.entry(c.category).or_default();
        if *count >= quotas.get(c.category) {
            continue;
        }
        if misinfo.contains(&c.domain) {
            selection.collisions.push(c.domain.clone());
            continue;
        }
        *count += 1;
        selection.records.push(DomainRecord {
            domain: c.domain.clone(),
            label: Label::Info,
            category: c.category,
            frequency: 0,
            alexa_rank: None,
            score: 0.0,
            sources: BTreeSet::new(),
        });
    }
    for (&category, &quota) in &quotas.0 {
        if category == Category::Uncategorized {
            continue;
        }
        let got = taken.get(&category).copied().unwrap_or(0);
        if got < quota {
            selection.shortfalls.insert(category, quota - got);
        }
    }
    selection
}

/// Load the informational list and apply the quotas.
pub fn load_informational(path: &Path, quotas: &InfoQuotas) -> Result<InfoSelection> {
    let candidates = load_info_candidates(path)?;
    Ok(select_informational(&candidates, quotas, &HashSet::new()))
}

/// Source rows plus the count of headline-only rows that were skipped.
#[derive(Debug, Clone, Default)]
pub struct SourceRows {
    pub entries: Vec<SourceEntry>,
    pub headline_only: usize,
}

/// Read a `source,domain[,headline]` CSV. Rows without a domain are skipped;
/// those carrying a headline are counted.
pub fn load_sources(path: &Path) -> Result<SourceRows> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_path(path)
        .map_err(|e| Error::csv(path, e))?;
    let headers = reader.headers().map_err(|e| Error::csv(path, e))?.clone();
    let source_col = column(&headers, "source", path)?;
    let domain_col = column(&headers, "domain", path)?;
    let headline_col = headers
        .iter()
        .position(|h| h.eq_ignore_ascii_case("headline"));
    let mut rows = SourceRows::default();
    for row in reader.records() {
        let row = row.map_err(|e| Error::csv(path, e))?;
        let source = row.get(source_col).unwrap_or("");
        let domain = row.get(domain_col).unwrap_or("");
        if domain.is_empty() {
            if headline_col
                .and_then(|c| row.get(c))
                .is_some_and(|h| !h.is_empty())
            {
                rows.headline_only += 1;
            }
            continue;
        }
        rows.entries.push(SourceEntry::new(source, domain)?);
    }
    Ok(rows)
}

/// Read a denylist: one domain per line, `#` starts a comment.
pub fn load_denylist(path: &Path) -> Result<BTreeSet<String>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = BTreeSet::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let entry = line.split('#').next().unwrap_or("").trim();
        if entry.is_empty() {
            continue;
        }
        let domain = normalize_domain(entry).map_err(|_| Error::Format {
            path: path.to_path_buf(),
            line: i + 1,
            message: format!("not a domain: {entry:?}"),
        })?;
        out.insert(domain);
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct CurationConfig {
    pub misinfo_limit: usize,
    pub quotas: InfoQuotas,
}

impl Default for CurationConfig {
    fn default() -> Self {
        CurationConfig {
            misinfo_limit: DEFAULT_MISINFO_LIMIT,
            quotas: InfoQuotas::default(),
        }
    }
}

/// Everything the curation step reads.
#[derive(Debug, Clone, Default)]
pub struct CurationInputs {
    pub sources: SourceRows,
    pub ranks: AlexaRanks,
    pub info_candidates: Vec<InfoCandidate>,
    pub denylist: BTreeSet<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CurationReport {
    pub total_raw: usize,
    pub total_distinct: usize,
    pub headline_only_skipped: usize,
    pub unparsable: Vec<String>,
    pub removed_manual: Vec<String>,
    pub final_misinfo: usize,
    pub final_info: usize,
    pub per_category_counts: BTreeMap<Category, usize>,
    pub label_collisions: Vec<String>,
    pub info_shortfalls: BTreeMap<Category, usize>,
    pub warnings: Vec<String>,
}

/// Run the whole curation step and return the master list in score order.
pub fn curate(
    inputs: &CurationInputs,
    config: &CurationConfig,
) -> (Vec<DomainRecord>, CurationReport) {
    let mut collation = collate(&inputs.sources.entries);
    apply_ranks(&mut collation.records, &inputs.ranks);
    let selection = rank_and_select(&collation.records, &inputs.denylist, config.misinfo_limit);

    let misinfo: HashSet<String> = selection
        .selected
        .iter()
        .map(|r| r.domain.clone())
        .collect();
    let mut info = select_informational(&inputs.info_candidates, &config.quotas, &misinfo);
    apply_ranks(&mut info.records, &inputs.ranks);
    for r in &mut info.records {
        // Informational domains do not come from the sources.
        r.score = 0.0;
    }

    let mut warnings = Vec::new();
    if inputs.sources.entries.is_empty() {
        warnings.push("no source entries".to_string());
    }
    if let Some(missing) = selection.shortfall {
        warnings.push(format!(
            "only {} misinformation domains available, {missing} short of the limit {}",
            selection.selected.len(),
            config.misinfo_limit
        ));
    }
    for (category, missing) in &info.shortfalls {
        warnings.push(format!(
            "informational quota for {category} short by {missing}"
        ));
    }
    for w in &warnings {
        warn!("{w}");
    }

    let mut master = selection.selected;
    master.extend(info.records);
    sort_by_score(&mut master);

    let mut per_category_counts = BTreeMap::new();
    for r in &master {
        *per_category_counts.entry(r.category).or_insert(0) += 1;
    }
    let report = CurationReport {
        total_raw: collation.total_raw,
        total_distinct: collation.records.len(),
        headline_only_skipped: inputs.sources.headline_only,
        unparsable: collation.rejected,
        removed_manual: selection.removed,
        final_misinfo: master.iter().filter(|r| r.label == Label::Misinfo).count(),
        final_info: master.iter().filter(|r| r.label == Label::Info).count(),
        per_category_counts,
        label_collisions: info.collisions,
        info_shortfalls: info.shortfalls,
        warnings,
    };
    (master, report)
}

pub const MASTER_HEADER: [&str; 7] = [
    "domain",
    "label",
    "category",
    "frequency",
    "alexa_rank",
    "score",
    "sources",
];

/// Write the master list as CSV in the order given.
pub fn write_master_list<W: Write>(records: &[DomainRecord], out: W) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    let wrap = |e: csv::Error| Error::csv("<master list>", e);
    writer.write_record(MASTER_HEADER).map_err(wrap)?;
    for r in records {
        let sources = r.sources.iter().cloned().collect::<Vec<_>>().join(";");
        writer
            .write_record([
                r.domain.as_str(),
                r.label.as_str(),
                r.category.as_str(),
                &r.frequency.to_string(),
                &r.alexa_rank.map(|x| x.to_string()).unwrap_or_default(),
                &format!("{:e}", r.score),
                &sources,
            ])
            .map_err(wrap)?;
    }
    writer.flush().map_err(|e| Error::io("<master list>", e))?;
    Ok(())
}

pub fn read_master_list(path: &Path) -> Result<Vec<DomainRecord>> {
    let mut reader = csv::ReaderBuilder::new()
        .from_path(path)
        .map_err(|e| Error::csv(path, e))?;
    let headers = reader.headers().map_err(|e| Error::csv(path, e))?.clone();
    let cols: Vec<usize> = MASTER_HEADER
        .iter()
        .map(|name| column(&headers, name, path))
        .collect::<Result<_>>()?;
    let mut out = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row = row.map_err(|e| Error::csv(path, e))?;
        let line = i + 2;
        let field = |k: usize| row.get(cols[k]).unwrap_or("");
        let bad = |message: String| Error::Format {
            path: path.to_path_buf(),
            line,
            message,
        };
        let domain = normalize_domain(field(0)).map_err(|e| bad(e.to_string()))?;
        if domain != field(0) {
            return Err(bad(format!("domain {:?} is not normalized", field(0))));
        }
        out.push(DomainRecord {
            domain,
            label: field(1).parse().map_err(|e: Error| bad(e.to_string()))?,
            category: field(2).parse().map_err(|e: Error| bad(e.to_string()))?,
            frequency: field(3).parse().map_err(|_| bad("bad frequency".into()))?,
            alexa_rank: match field(4) {
                "" => None,
                s => Some(s.parse().map_err(|_| bad("bad alexa_rank".into()))?),
            },
            score: field(5).parse().map_err(|_| bad("bad score".into()))?,
            sources: field(6)
                .split(';')
                .filter(|s| !s.is_empty())
                .map(str::to_string)
                .collect(),
        });
    }
    Ok(out)
}

fn column(headers: &csv::StringRecord, name: &str, path: &Path) -> Result<usize> {
    headers
        .iter()
        .position(|h| h.eq_ignore_ascii_case(name))
        .ok_or_else(|| Error::Format {
            path: path.to_path_buf(),
            line: 1,
            message: format!("missing column {name:?}"),
        })
}
