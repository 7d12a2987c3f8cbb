//! Pipeline configuration, read from TOML.

use std::path::{Path, PathBuf};

use altmap_core::{ClusterParams, FetchPolicy, LayoutOptions, YearWindow};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Inputs {
    pub publications: PathBuf,
    pub altmetrics: PathBuf,
    /// Pre-fetched tweets (JSON lines of parsed tweets).
    #[serde(default)]
    pub tweets: Option<PathBuf>,
    /// Tweet URL manifest to harvest instead of a tweet store. When absent
    /// and `tweets` is absent too, the manifest is built from the altmetric
    /// records.
    #[serde(default)]
    pub manifest: Option<PathBuf>,
    /// Replaces scheme, host and port of every harvested URL.
    #[serde(default)]
    pub endpoint: Option<String>,
    #[serde(default)]
    pub hashtag_thesaurus: Option<PathBuf>,
    #[serde(default)]
    pub keyword_thesaurus: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TermsConfig {
    /// Target size of the first keyword set (tweeted2_news); the other
    /// keyword sets use the size actually selected there. Default: 1% of
    /// the tweeted2_news vocabulary.
    pub keyword_target: Option<usize>,
    /// Default: 1% of the hashtag vocabulary.
    pub hashtag_target: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClusterConfig {
    pub resolution: f64,
    /// When set, the resolution is tuned toward this many clusters.
    pub target_clusters: Option<usize>,
    pub min_cluster_size: usize,
    pub random_starts: usize,
    pub iterations: usize,
    pub merge_small: bool,
    pub resolution_range: (f64, f64),
    pub max_probes: usize,
}

impl Default for ClusterConfig {
    fn default() -> Self {
        let p = ClusterParams::default();
        ClusterConfig {
            resolution: p.resolution,
            target_clusters: None,
            min_cluster_size: p.min_cluster_size,
            random_starts: p.random_starts,
            iterations: p.iterations,
            merge_small: p.merge_small,
            resolution_range: (0.0, 1.0),
            max_probes: 40,
        }
    }
}

impl ClusterConfig {
    pub fn params(&self, seed: u64) -> ClusterParams {
        ClusterParams {
            resolution: self.resolution,
            min_cluster_size: self.min_cluster_size,
            random_starts: self.random_starts,
            iterations: self.iterations,
            seed,
            merge_small: self.merge_small,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LayoutConfig {
    pub scale: f64,
    pub max_iterations: usize,
    pub tolerance: f64,
    pub per_component: bool,
}

impl Default for LayoutConfig {
    fn default() -> Self {
        let o = LayoutOptions::default();
        LayoutConfig { scale: o.scale, max_iterations: o.max_iterations, tolerance: o.tolerance, per_component: o.per_component }
    }
}

impl LayoutConfig {
    pub fn options(&self, seed: u64) -> LayoutOptions {
        LayoutOptions {
            scale: self.scale,
            max_iterations: self.max_iterations,
            tolerance: self.tolerance,
            seed,
            per_component: self.per_component,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReportConfig {
    pub top_journals: usize,
    pub histogram_range: (usize, usize),
}

impl Default for ReportConfig {
    fn default() -> Self {
        ReportConfig { top_journals: 20, histogram_range: (1, 30) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    #[serde(default)]
    pub seed: u64,
    pub out_dir: PathBuf,
    #[serde(default = "default_year_from")]
    pub year_from: i32,
    #[serde(default = "default_year_to")]
    pub year_to: i32,
    /// Worker threads for clustering and page parsing; 0 = all cores.
    #[serde(default)]
    pub threads: usize,
    pub inputs: Inputs,
    #[serde(default)]
    pub terms: TermsConfig,
    #[serde(default)]
    pub cluster: ClusterConfig,
    #[serde(default)]
    pub layout: LayoutConfig,
    #[serde(default)]
    pub harvest: FetchPolicy,
    #[serde(default)]
    pub report: ReportConfig,
}

fn default_year_from() -> i32 {
    2011
}

fn default_year_to() -> i32 {
    2017
}

impl PipelineConfig {
    /// Reads a config file; relative paths are resolved against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let mut cfg: PipelineConfig = toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        cfg.resolve(path.parent().unwrap_or(Path::new(".")));
        Ok(cfg)
    }

    pub fn resolve(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.out_dir);
        let i = &mut self.inputs;
        fix(&mut i.publications);
        fix(&mut i.altmetrics);
        for p in [&mut i.tweets, &mut i.manifest, &mut i.hashtag_thesaurus, &mut i.keyword_thesaurus].into_iter().flatten() {
            fix(p);
        }
    }

    pub fn window(&self) -> Result<YearWindow> {
        YearWindow::new(self.year_from, self.year_to).map_err(|e| Error::Config(e.to_string()))
    }

    /// Checks everything that can be checked before any work starts.
    pub fn validate(&self) -> Result<()> {
        let i = &self.inputs;
        let required = [("publications", Some(&i.publications)), ("altmetrics", Some(&i.altmetrics))];
        let optional = [
            ("tweets", i.tweets.as_ref()),
            ("manifest", i.manifest.as_ref()),
            ("hashtag_thesaurus", i.hashtag_thesaurus.as_ref()),
            ("keyword_thesaurus", i.keyword_thesaurus.as_ref()),
        ];
        for (name, p) in required.into_iter().chain(optional) {
            if let Some(p) = p {
                if !p.is_file() {
                    return Err(Error::Config(format!("inputs.{name}: {} does not exist", p.display())));
                }
            }
        }
        if i.tweets.is_some() && i.manifest.is_some() {
            return Err(Error::Config("set either inputs.tweets or inputs.manifest, not both".into()));
        }
        self.window()?;
        if self.terms.keyword_target == Some(0) || self.terms.hashtag_target == Some(0) {
            return Err(Error::Config("term targets must be >= 1".into()));
        }
        if self.cluster.target_clusters == Some(0) {
            return Err(Error::Config("cluster.target_clusters must be >= 1".into()));
        }
        self.cluster.params(self.seed).validate().map_err(|e| Error::Config(e.to_string()))?;
        let (lo, hi) = self.cluster.resolution_range;
        if !(lo >= 0.0 && lo <= hi && hi.is_finite()) {
            return Err(Error::Config(format!("cluster.resolution_range [{lo}, {hi}] is empty")));
        }
        if !(self.layout.scale > 0.0 && self.layout.tolerance > 0.0) {
            return Err(Error::Config("layout.scale and layout.tolerance must be positive".into()));
        }
        self.harvest.validate().map_err(|e| Error::Config(e.to_string()))?;
        let (a, b) = self.report.histogram_range;
        if a > b || self.report.top_journals == 0 {
            return Err(Error::Config("report.histogram_range must be ordered and top_journals >= 1".into()));
        }
        Ok(())
    }
}
