//! Optional TOML run configuration. Command-line flags override it; relative
//! paths are taken relative to the config file's directory.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use domainweb_core::Category;
use serde::Deserialize;

use crate::error::Failure;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub paths: Paths,
    #[serde(default)]
    pub curation: CurationSection,
    #[serde(default)]
    pub crawl: CrawlSection,
    #[serde(default)]
    pub analysis: AnalysisSection,
    #[serde(default)]
    pub social: SocialSection,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Paths {
    #[serde(default)]
    pub sources: Vec<PathBuf>,
    pub alexa: Option<PathBuf>,
    pub info_list: Option<PathBuf>,
    pub denylist: Option<PathBuf>,
    /// Master list used for labels and as the crawl domain list.
    pub master: Option<PathBuf>,
    pub snapshots: Option<PathBuf>,
    pub fixtures: Option<PathBuf>,
    pub shares: Option<PathBuf>,
    pub social_labels: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurationSection {
    pub misinfo_limit: Option<usize>,
    pub quotas: Option<BTreeMap<Category, usize>>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrawlSection {
    pub level: Option<u8>,
    pub timeout_secs: Option<f64>,
    pub max_pages_level2: Option<usize>,
    pub concurrency: Option<usize>,
    pub per_host_delay_ms: Option<u64>,
    pub user_agent: Option<String>,
    pub respect_robots: Option<bool>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalysisSection {
    pub resolution: Option<f64>,
    pub clique_min_size: Option<usize>,
    pub discovery_k: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SocialSection {
    pub jaccard_threshold: Option<f64>,
    pub min_domains: Option<usize>,
    pub min_sharers: Option<usize>,
    pub test_fraction: Option<f64>,
    pub folds: Option<usize>,
    pub grid: Option<Vec<f64>>,
    pub learning_rate: Option<f64>,
    pub max_epochs: Option<usize>,
    pub convergence_tol: Option<f64>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::usage(format!("cannot read config {}: {e}", path.display())))?;
        let mut config: FileConfig = toml::from_str(&text)
            .map_err(|e| Failure::usage(format!("invalid config {}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        config.rebase(base);
        Ok(config)
    }

    fn rebase(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        let p = &mut self.paths;
        p.sources.iter_mut().for_each(fix);
        for slot in [
            &mut p.alexa,
            &mut p.info_list,
            &mut p.denylist,
            &mut p.master,
            &mut p.snapshots,
            &mut p.fixtures,
            &mut p.shares,
            &mut p.social_labels,
            &mut self.output_dir,
        ] {
            if let Some(path) = slot.as_mut() {
                fix(path);
            }
        }
    }
}

/// Settings shared by every command after merging flags over the file.
#[derive(Debug, Clone)]
pub struct Context {
    pub seed: u64,
    pub output_dir: PathBuf,
    pub file: FileConfig,
}

pub const DEFAULT_SEED: u64 = 42;

impl Context {
    pub fn new(
        seed: Option<u64>,
        output_dir: Option<PathBuf>,
        config: Option<&Path>,
    ) -> Result<Self, Failure> {
        let file = match config {
            Some(path) => FileConfig::load(path)?,
            None => FileConfig::default(),
        };
        Ok(Context {
            seed: seed.or(file.seed).unwrap_or(DEFAULT_SEED),
            output_dir: output_dir
                .or_else(|| file.output_dir.clone())
                .unwrap_or_else(|| PathBuf::from("out")),
            file,
        })
    }

    /// Independent seed for one consumer of randomness, derived from the run
    /// seed and a fixed stream name.
    pub fn seed_for(&self, stream: &str) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in stream.bytes() {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0100_0000_01b3);
        }
        splitmix64(self.seed ^ h)
    }

    pub fn master_path(&self) -> PathBuf {
        self.file
            .paths
            .master
            .clone()
            .unwrap_or_else(|| self.output_dir.join("master.csv"))
    }

    pub fn snapshot_dir(&self) -> PathBuf {
        self.file
            .paths
            .snapshots
            .clone()
            .unwrap_or_else(|| self.output_dir.join("snapshots"))
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Fail with a usage error unless `path` is an existing file.
pub fn require_file(path: &Path, what: &str) -> Result<(), Failure> {
    if path.is_file() {
        Ok(())
    } else {
        Err(Failure::usage(format!(
            "{what} not found: {}",
            path.display()
        )))
    }
}

pub fn require_dir(path: &Path, what: &str) -> Result<(), Failure> {
    if path.is_dir() {
        Ok(())
    } else {
        Err(Failure::usage(format!(
            "{what} not found: {}",
            path.display()
        )))
    }
}
