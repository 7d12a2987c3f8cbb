//! File-level pipeline stages. Every stage reads its inputs from files and
//! writes its outputs under one directory, so running the whole pipeline
//! and running the stages one by one produce the same bytes.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use altmap_core::seed::derive_seed;
use altmap_core::terms::TermKind;
use altmap_core::tweet::AvailabilityStats;
use altmap_core::{
    classify_papers, hashtag_corpus, keyword_corpus, layout_kk, rank_frequencies, select_top, validate_corpus,
    AltmetricRecord, ClusterAssignment, CoocGraph, CorpusStats, FetchPolicy, HashtagStats, PublicationRecord, Segment,
    TermSet, Thesaurus, TweetRecord, YearWindow,
};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analysis::{cluster_par, tune_par, with_threads};
use crate::config::{ClusterConfig, LayoutConfig, PipelineConfig};
use crate::error::{Error, IoContext, Result};
use crate::formats::{self, read_text};
use crate::harvest;

/// Keyword segments in the order used by the overlap table.
pub const KEYWORD_SEGMENTS: [Segment; 4] = [Segment::All, Segment::NotTweeted, Segment::Tweeted2, Segment::Tweeted2News];

/// Name of the hashtag corpus: tweets about papers tweeted by two or more accounts.
pub const HASHTAG_CORPUS: &str = "hashtags_tweeted2";

pub fn keyword_corpus_name(segment: Segment) -> String {
    format!("keywords_{}", segment.name())
}

/// Every corpus that gets a network, keyword segments first.
pub fn corpus_names() -> Vec<String> {
    KEYWORD_SEGMENTS.iter().map(|&s| keyword_corpus_name(s)).chain([HASHTAG_CORPUS.to_string()]).collect()
}

/// Output directory that remembers what was written into it.
#[derive(Debug)]
pub struct Outputs {
    dir: PathBuf,
    written: Vec<String>,
}

impl Outputs {
    pub fn new(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir).at(&dir)?;
        Ok(Outputs { dir, written: Vec::new() })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn write(&mut self, name: &str, text: &str) -> Result<PathBuf> {
        let path = self.path(name);
        std::fs::write(&path, text).at(&path)?;
        if !self.written.iter().any(|w| w == name) {
            self.written.push(name.to_string());
        }
        Ok(path)
    }

    pub fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<PathBuf> {
        let text = serde_json::to_string_pretty(value).expect("report serializes") + "\n";
        self.write(name, &text)
    }

    pub fn written(&self) -> &[String] {
        &self.written
    }

    /// Renames everything written so far to `<name>.partial`.
    pub fn mark_partial(&self) {
        for name in &self.written {
            let from = self.path(name);
            let to = self.path(&format!("{name}.partial"));
            if let Err(e) = std::fs::rename(&from, &to) {
                log::warn!("could not mark {} as partial: {e}", from.display());
            }
        }
    }
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = read_text(path)?;
    serde_json::from_str(&text).map_err(|e| Error::parse(path, e.line(), e.to_string()))
}

fn stem(path: &Path, suffix: &str) -> String {
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
    name.strip_suffix(suffix).unwrap_or(name).to_string()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IngestReport {
    pub publication_lines: usize,
    pub publication_rejections: usize,
    pub altmetric_lines: usize,
    pub altmetric_rejections: usize,
    pub dropped_urls: usize,
    pub stats: CorpusStats,
}

/// Parses and validates the inputs and writes normalized copies:
/// `publications.jsonl`, `altmetrics.jsonl`, `rejections.tsv`, `corpus_stats.json`.
pub fn ingest(publications: &Path, altmetrics: &Path, out: &mut Outputs) -> Result<IngestReport> {
    let pubs = formats::parse_publications(&read_text(publications)?);
    let alts = formats::parse_altmetrics(&read_text(altmetrics)?);
    let stats = validate_corpus(&pubs.records, pubs.missing_doi, &alts.records)?;
    out.write("publications.jsonl", &formats::write_publications(&pubs.records))?;
    out.write("altmetrics.jsonl", &formats::write_altmetrics(&alts.records))?;
    out.write(
        "rejections.tsv",
        &formats::write_rejections(&[("publications", &pubs.rejections), ("altmetrics", &alts.rejections)]),
    )?;
    let report = IngestReport {
        publication_lines: pubs.lines(),
        publication_rejections: pubs.rejections.len(),
        altmetric_lines: alts.lines(),
        altmetric_rejections: alts.rejections.len(),
        dropped_urls: alts.warnings,
        stats,
    };
    out.write_json("corpus_stats.json", &report)?;
    Ok(report)
}

pub fn load_publications(path: &Path) -> Result<Vec<PublicationRecord>> {
    Ok(formats::parse_publications(&read_text(path)?).records)
}

pub fn load_altmetrics(path: &Path) -> Result<Vec<AltmetricRecord>> {
    Ok(formats::parse_altmetrics(&read_text(path)?).records)
}

/// Reads a tweet store (JSON lines of tweets), re-deriving each year.
pub fn load_tweets(path: &Path) -> Result<Vec<TweetRecord>> {
    let text = read_text(path)?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let t: TweetRecord = serde_json::from_str(line).map_err(|e| Error::parse(path, i + 1, e.to_string()))?;
        out.push(TweetRecord::new(t.url, t.author, t.timestamp, t.text, t.doi));
    }
    Ok(out)
}

pub fn write_tweets(tweets: &[TweetRecord]) -> String {
    tweets.iter().map(|t| serde_json::to_string(t).expect("tweet serializes") + "\n").collect()
}

/// Where tweets come from.
#[derive(Debug, Clone)]
pub enum TweetSource {
    Store(PathBuf),
    Harvest {
        manifest: Vec<formats::ManifestEntry>,
        endpoint: Option<String>,
        policy: FetchPolicy,
        /// Where to keep the fetched pages, if anywhere.
        bodies: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TweetReport {
    pub source: String,
    pub loaded: usize,
    pub availability: Option<AvailabilityStats>,
    pub unparsed_pages: usize,
    pub removed_by_year: usize,
    pub retained: usize,
}

/// Loads or harvests tweets, applies the year window and writes
/// `tweets.jsonl` and `tweet_stats.json` (plus `fetch_log.tsv` when harvesting).
pub fn tweets(source: &TweetSource, window: YearWindow, threads: usize, out: &mut Outputs) -> Result<TweetReport> {
    let (loaded, availability, unparsed, name) = match source {
        TweetSource::Store(path) => (load_tweets(path)?, None, 0, "store"),
        TweetSource::Harvest { manifest, endpoint, policy, bodies } => {
            let urls: Vec<String> = manifest.iter().map(|m| m.url.clone()).collect();
            let results = harvest::fetch_manifest(&urls, policy, endpoint.as_deref())?;
            if let Some(dir) = bodies {
                harvest::store_bodies(&results, dir)?;
            }
            out.write("fetch_log.tsv", &harvest::write_fetch_log(&results))?;
            let (tweets, errors) = with_threads(threads, || harvest::parse_pages(&results, manifest))?;
            for (url, e) in &errors {
                log::warn!("{url}: {e}");
            }
            (tweets, Some(altmap_core::availability_stats(&results)), errors.len(), "harvest")
        }
    };
    let n = loaded.len();
    let (retained, removed) = altmap_core::filter_by_year(loaded, window);
    out.write("tweets.jsonl", &write_tweets(&retained))?;
    let report = TweetReport {
        source: name.into(),
        loaded: n,
        availability,
        unparsed_pages: unparsed,
        removed_by_year: removed,
        retained: retained.len(),
    };
    out.write_json("tweet_stats.json", &report)?;
    Ok(report)
}

pub fn load_thesaurus(path: Option<&Path>, kind: TermKind) -> Result<Thesaurus> {
    match path {
        Some(p) => formats::parse_thesaurus(&read_text(p)?, kind, p),
        None => Ok(match kind {
            TermKind::Hashtag => Thesaurus::default_hashtags(),
            TermKind::Keyword => Thesaurus::default_keywords(),
        }),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HashtagReport {
    /// Ratios as reported: per tweet, per tweeted paper, per DOI paper (two
    /// decimals) and hashtag-bearing tweets in percent (one decimal).
    pub reported: [Option<String>; 4],
    pub stats: HashtagStats,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SegmentReport {
    pub sizes: BTreeMap<String, usize>,
    pub fractions: BTreeMap<String, f64>,
    pub documents: BTreeMap<String, usize>,
}

/// Classifies papers and writes `segments.tsv`, one keyword corpus per
/// segment, the hashtag corpus and `hashtag_stats.json`.
pub fn segment(
    publications: &Path,
    altmetrics: &Path,
    tweets_path: &Path,
    keyword_thesaurus: &Thesaurus,
    hashtag_thesaurus: &Thesaurus,
    out: &mut Outputs,
) -> Result<SegmentReport> {
    let pubs = load_publications(publications)?;
    let alts = load_altmetrics(altmetrics)?;
    let tweets = load_tweets(tweets_path)?;
    let segments = classify_papers(&pubs, &alts);
    out.write("segments.tsv", &formats::write_segments(&pubs, &segments))?;
    let mut report = SegmentReport { sizes: BTreeMap::new(), fractions: BTreeMap::new(), documents: BTreeMap::new() };
    for seg in KEYWORD_SEGMENTS {
        report.sizes.insert(seg.name().into(), segments.size(seg));
        report.fractions.insert(seg.name().into(), segments.fraction(seg).unwrap_or(0.0));
        let corpus = keyword_corpus(segments.get(seg), &pubs, keyword_thesaurus);
        let name = keyword_corpus_name(seg);
        report.documents.insert(name.clone(), corpus.len());
        out.write(&format!("{name}.txt"), &formats::write_corpus(corpus.term_lists()))?;
    }
    let tweeted = segments.get(Segment::Tweeted2);
    let corpus = hashtag_corpus(&tweets, tweeted, hashtag_thesaurus);
    report.documents.insert(HASHTAG_CORPUS.into(), corpus.len());
    out.write(&format!("{HASHTAG_CORPUS}.txt"), &formats::write_corpus(corpus.term_lists()))?;
    let stats = altmap_core::segment::hashtag_stats(&corpus, tweeted.len(), pubs.len());
    out.write_json("hashtag_stats.json", &HashtagReport { reported: stats.rounded(), stats })?;
    out.write_json("segment_stats.json", &report)?;
    Ok(report)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Selection {
    pub vocabulary: usize,
    pub target: usize,
    pub selected: usize,
    pub threshold: Option<u64>,
    pub rule: Option<String>,
}

/// Ranks a corpus and selects its top terms. `target` defaults to 1% of
/// the vocabulary. Writes `<name>.freq.tsv`, `<name>.terms.txt` and
/// `<name>.selection.json`.
pub fn rank(corpus: &Path, target: Option<usize>, out: &mut Outputs) -> Result<TermSet> {
    let name = stem(corpus, ".txt");
    let docs = formats::parse_corpus(&read_text(corpus)?);
    let ranked = rank_frequencies(&docs);
    let target = target.unwrap_or_else(|| altmap_core::default_target(ranked.len().max(1)));
    let set = select_top(&ranked, target)?;
    out.write(&format!("{name}.freq.tsv"), &formats::write_frequencies(&ranked))?;
    out.write(&format!("{name}.terms.txt"), &formats::write_terms(&set.terms))?;
    out.write_json(
        &format!("{name}.selection.json"),
        &Selection {
            vocabulary: ranked.len(),
            target,
            selected: set.len(),
            threshold: set.threshold,
            rule: set.threshold_label(),
        },
    )?;
    Ok(set)
}

/// Builds the co-occurrence network of a corpus restricted to a term list
/// and writes `<name>.paj`, `<name>.nodes.tsv` and `<name>.edges.tsv`.
pub fn build_net(corpus: &Path, terms: &Path, min_edge_weight: Option<f64>, out: &mut Outputs) -> Result<CoocGraph> {
    let name = stem(corpus, ".txt");
    let docs = formats::parse_corpus(&read_text(corpus)?);
    let set = TermSet { terms: formats::parse_terms(&read_text(terms)?), target: 0, threshold: None };
    let graph = altmap_core::network::build_graph(&docs, &set, min_edge_weight)?;
    out.write(&format!("{name}.paj"), &formats::write_pajek(&graph))?;
    out.write(&format!("{name}.nodes.tsv"), &formats::write_nodes(&graph))?;
    out.write(&format!("{name}.edges.tsv"), &formats::write_edges(&graph))?;
    Ok(graph)
}

/// Reads a Pajek network plus its `.nodes.tsv` / `.edges.tsv` sidecars when present.
pub fn read_network(paj: &Path) -> Result<CoocGraph> {
    let mut graph = formats::parse_pajek(&read_text(paj)?, paj)?;
    let base = paj.with_extension("");
    let nodes_path = base.with_extension("nodes.tsv");
    let edges_path = base.with_extension("edges.tsv");
    let nodes = nodes_path.is_file().then(|| read_text(&nodes_path)).transpose()?;
    let edges = edges_path.is_file().then(|| read_text(&edges_path)).transpose()?;
    formats::attach_sidecars(
        &mut graph,
        nodes.as_deref().map(|t| (t, nodes_path.as_path())),
        edges.as_deref().map(|t| (t, edges_path.as_path())),
    )?;
    Ok(graph)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ClusterReport {
    pub resolution: f64,
    pub quality: f64,
    pub clusters: usize,
    pub sizes: Vec<usize>,
    /// `(resolution, clusters)` per probe when the resolution was tuned.
    pub probes: Vec<(f64, usize)>,
}

/// Clusters a network, tuning the resolution when a target count is set.
/// `seed` is the pipeline seed; the clustering seed is derived from it.
/// Writes `<name>.clusters.tsv` and `<name>.cluster.json`.
pub fn cluster_net(paj: &Path, cfg: &ClusterConfig, seed: u64, threads: usize, out: &mut Outputs) -> Result<ClusterReport> {
    let name = stem(paj, ".paj");
    let graph = read_network(paj)?;
    let params = cfg.params(derive_seed(seed, "cluster"));
    let (resolution, assignment, probes) = with_threads(threads, || -> Result<(f64, ClusterAssignment, Vec<(f64, usize)>)> {
        match cfg.target_clusters {
            Some(target) => {
                let t = tune_par(&graph, target, &params, cfg.resolution_range, cfg.max_probes)?;
                Ok((t.resolution, t.assignment, t.probes))
            }
            None => Ok((params.resolution, cluster_par(&graph, &params)?, Vec::new())),
        }
    })??;
    out.write(&format!("{name}.clusters.tsv"), &formats::write_clusters(&graph, &assignment.labels))?;
    let report = ClusterReport {
        resolution,
        quality: assignment.quality,
        clusters: assignment.n_clusters(),
        sizes: assignment.sizes(),
        probes,
    };
    out.write_json(&format!("{name}.cluster.json"), &report)?;
    Ok(report)
}

/// Lays out a clustered network and writes `<name>.map.tsv`.
pub fn layout_net(paj: &Path, clusters: &Path, cfg: &LayoutConfig, seed: u64, out: &mut Outputs) -> Result<altmap_core::Layout> {
    let name = stem(paj, ".paj");
    let graph = read_network(paj)?;
    let labels = formats::parse_clusters(&read_text(clusters)?, clusters, &graph)?;
    let layout = layout_kk(&graph, &cfg.options(derive_seed(seed, "layout")))?;
    let assignment = ClusterAssignment { labels, quality: 0.0 };
    out.write(&format!("{name}.map.tsv"), &formats::write_map(&graph, &layout.positions, &assignment)?)?;
    Ok(layout)
}

/// Writes `overlap.csv` for named term lists.
pub fn report_overlap(sets: &[(String, PathBuf)], out: &mut Outputs) -> Result<altmap_core::report::OverlapTable> {
    let mut named = Vec::new();
    for (name, path) in sets {
        named.push((name.clone(), formats::parse_terms(&read_text(path)?)));
    }
    let table = altmap_core::report::overlap_table(named)?;
    out.write("overlap.csv", &table.to_csv())?;
    Ok(table)
}

/// Writes `journals.csv`, ordered by the tweeted2_news share.
pub fn report_journals(publications: &Path, segments: &Path, top_n: usize, out: &mut Outputs) -> Result<altmap_core::report::JournalImportance> {
    let pubs = load_publications(publications)?;
    let segs = formats::parse_segments(&read_text(segments)?, segments)?;
    let table = altmap_core::report::journal_importance(&segs, &KEYWORD_SEGMENTS, &pubs, top_n, Segment::Tweeted2News)?;
    out.write("journals.csv", &table.to_csv())?;
    Ok(table)
}

/// Writes `hashtag_hist.csv` and `hashtag_hist.svg`.
pub fn report_hashtags(stats: &Path, range: (usize, usize), out: &mut Outputs) -> Result<altmap_core::report::Histogram> {
    let report: HashtagReport = read_json(stats)?;
    let hist = altmap_core::report::hashtag_histogram(&report.stats, range.0, range.1)?;
    out.write("hashtag_hist.csv", &hist.to_csv())?;
    out.write("hashtag_hist.svg", &hist.to_svg())?;
    Ok(hist)
}

/// Writes `network_<name>.svg` from a network and its map file.
pub fn report_network(paj: &Path, map: &Path, out: &mut Outputs) -> Result<PathBuf> {
    let name = stem(paj, ".paj");
    let graph = read_network(paj)?;
    let rows = formats::parse_map(&read_text(map)?, map)?;
    if rows.labels.len() != graph.len() || rows.labels.iter().zip(graph.labels()).any(|(a, b)| a != b) {
        return Err(altmap_core::Error::Coverage(format!("{} does not match {}", map.display(), paj.display())).into());
    }
    let svg = altmap_core::report::render_network_svg(&graph, &rows.positions, &rows.clusters, &Default::default())?;
    out.write(&format!("network_{name}.svg"), &svg)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Artifact {
    pub name: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArtifactManifest {
    pub files: Vec<Artifact>,
}

impl ArtifactManifest {
    pub fn get(&self, name: &str) -> Option<&Artifact> {
        self.files.iter().find(|a| a.name == name)
    }
}

/// Hashes the named files of `dir`, sorted by name.
pub fn hash_files(dir: &Path, names: &[String]) -> Result<ArtifactManifest> {
    let mut names = names.to_vec();
    names.sort();
    names.dedup();
    let mut files = Vec::with_capacity(names.len());
    for name in names {
        let path = dir.join(&name);
        let data = std::fs::read(&path).at(&path)?;
        files.push(Artifact { name, bytes: data.len() as u64, sha256: hex::encode(Sha256::digest(&data)) });
    }
    Ok(ArtifactManifest { files })
}

/// Hashes every regular file of `dir` except `manifest.json` and `.partial` leftovers.
pub fn scan_manifest(dir: &Path) -> Result<ArtifactManifest> {
    let mut names = Vec::new();
    for entry in std::fs::read_dir(dir).at(dir)? {
        let entry = entry.at(dir)?;
        let name = entry.file_name().to_string_lossy().into_owned();
        if entry.file_type().at(dir)?.is_file() && name != "manifest.json" && !name.ends_with(".partial") {
            names.push(name);
        }
    }
    hash_files(dir, &names)
}

fn tweet_source(cfg: &PipelineConfig, out: &Outputs) -> Result<TweetSource> {
    let i = &cfg.inputs;
    if let Some(store) = &i.tweets {
        return Ok(TweetSource::Store(store.clone()));
    }
    let manifest = match &i.manifest {
        Some(p) => formats::parse_manifest(&read_text(p)?, p)?,
        None => {
            let entries = formats::manifest_from_altmetrics(&load_altmetrics(&out.path("altmetrics.jsonl"))?);
            if entries.is_empty() {
                return Err(altmap_core::Error::EmptyManifest.into());
            }
            entries
        }
    };
    Ok(TweetSource::Harvest { manifest, endpoint: i.endpoint.clone(), policy: cfg.harvest.clone(), bodies: None })
}

fn stages(cfg: &PipelineConfig, out: &mut Outputs) -> Result<()> {
    let i = &cfg.inputs;
    ingest(&i.publications, &i.altmetrics, out).map_err(|e| e.in_stage("ingest"))?;

    let source = tweet_source(cfg, out).map_err(|e| e.in_stage("harvest"))?;
    tweets(&source, cfg.window()?, cfg.threads, out).map_err(|e| e.in_stage("harvest"))?;

    let kw = load_thesaurus(i.keyword_thesaurus.as_deref(), TermKind::Keyword).map_err(|e| e.in_stage("segment"))?;
    let ht = load_thesaurus(i.hashtag_thesaurus.as_deref(), TermKind::Hashtag).map_err(|e| e.in_stage("segment"))?;
    let (p, a, t) = (out.path("publications.jsonl"), out.path("altmetrics.jsonl"), out.path("tweets.jsonl"));
    segment(&p, &a, &t, &kw, &ht, out).map_err(|e| e.in_stage("segment"))?;

    // The news segment sets the keyword-set size; the other segments use
    // the size actually selected there.
    let lead = out.path(&format!("{}.txt", keyword_corpus_name(Segment::Tweeted2News)));
    let first = rank(&lead, cfg.terms.keyword_target, out).map_err(|e| e.in_stage("rank"))?;
    if first.is_empty() {
        return Err(Error::from(altmap_core::Error::EmptyTermSet).in_stage("rank"));
    }
    for seg in [Segment::All, Segment::NotTweeted, Segment::Tweeted2] {
        let corpus = out.path(&format!("{}.txt", keyword_corpus_name(seg)));
        rank(&corpus, Some(first.len()), out).map_err(|e| e.in_stage("rank"))?;
    }
    let hashtags = out.path(&format!("{HASHTAG_CORPUS}.txt"));
    rank(&hashtags, cfg.terms.hashtag_target, out).map_err(|e| e.in_stage("rank"))?;

    for name in corpus_names() {
        let corpus = out.path(&format!("{name}.txt"));
        let terms = out.path(&format!("{name}.terms.txt"));
        build_net(&corpus, &terms, None, out).map_err(|e| e.in_stage("build-net"))?;
    }
    for name in corpus_names() {
        let paj = out.path(&format!("{name}.paj"));
        cluster_net(&paj, &cfg.cluster, cfg.seed, cfg.threads, out).map_err(|e| e.in_stage("cluster"))?;
    }
    for name in corpus_names() {
        let paj = out.path(&format!("{name}.paj"));
        let clusters = out.path(&format!("{name}.clusters.tsv"));
        layout_net(&paj, &clusters, &cfg.layout, cfg.seed, out).map_err(|e| e.in_stage("layout"))?;
    }

    let sets: Vec<(String, PathBuf)> = KEYWORD_SEGMENTS
        .iter()
        .map(|&s| (s.name().to_string(), out.path(&format!("{}.terms.txt", keyword_corpus_name(s)))))
        .collect();
    report_overlap(&sets, out).map_err(|e| e.in_stage("report"))?;
    let (p, s) = (out.path("publications.jsonl"), out.path("segments.tsv"));
    report_journals(&p, &s, cfg.report.top_journals, out).map_err(|e| e.in_stage("report"))?;
    let stats = out.path("hashtag_stats.json");
    report_hashtags(&stats, cfg.report.histogram_range, out).map_err(|e| e.in_stage("report"))?;
    for name in corpus_names() {
        let (paj, map) = (out.path(&format!("{name}.paj")), out.path(&format!("{name}.map.tsv")));
        report_network(&paj, &map, out).map_err(|e| e.in_stage("report"))?;
    }
    Ok(())
}

/// Runs every stage and writes `manifest.json` with the hash of each
/// produced file. On failure the files written so far are renamed to
/// `<name>.partial`.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<ArtifactManifest> {
    cfg.validate()?;
    let mut out = Outputs::new(&cfg.out_dir)?;
    match stages(cfg, &mut out) {
        Ok(()) => {
            let manifest = hash_files(out.dir(), out.written())?;
            out.write_json("manifest.json", &manifest)?;
            Ok(manifest)
        }
        Err(e) => {
            out.mark_partial();
            Err(e)
        }
    }
}
