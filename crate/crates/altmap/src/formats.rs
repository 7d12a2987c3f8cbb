//! Readers and writers for every file the pipeline exchanges between stages.
//! The layouts are described in FORMATS.md at the repository root.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;

use altmap_core::corpus::{Parsed, Rejection};
use altmap_core::network::{Edge, Node};
use altmap_core::segment::Segments;
use altmap_core::terms::{RankedEntry, TermKind};
use altmap_core::{AltmetricRecord, ClusterAssignment, CoocGraph, Doi, PublicationRecord, RankedTerms, Segment, Thesaurus};
use serde::{Deserialize, Serialize};

use crate::error::{Error, IoContext, Result};

pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).at(path)
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir).at(dir)?;
        }
    }
    std::fs::write(path, text).at(path)
}

/// Non-blank lines with their 1-based line numbers.
fn numbered(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().map(|(i, l)| (i + 1, l.trim_end_matches('\r'))).filter(|(_, l)| !l.trim().is_empty())
}

#[derive(Debug, Deserialize)]
struct RawPublication {
    #[serde(default)]
    doi: Option<String>,
    year: i32,
    #[serde(default)]
    journal: String,
    #[serde(default)]
    keywords: Option<String>,
    #[serde(default)]
    title: Option<String>,
}

#[derive(Serialize)]
struct PublicationLine<'a> {
    doi: &'a str,
    year: i32,
    journal: &'a str,
    keywords: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    title: Option<&'a str>,
}

/// Splits a `;`-separated keyword field, dropping empty entries.
pub fn split_keywords(field: &str) -> Vec<String> {
    field.split(';').map(str::trim).filter(|k| !k.is_empty()).map(str::to_string).collect()
}

/// Parses publication JSON lines. Blank lines are ignored; every other line
/// is either accepted or listed as a rejection.
pub fn parse_publications(text: &str) -> Parsed<PublicationRecord> {
    let mut out = Parsed::default();
    let mut seen = BTreeSet::new();
    for (line, raw) in numbered(text) {
        let rec: RawPublication = match serde_json::from_str(raw) {
            Ok(r) => r,
            Err(e) => {
                out.rejections.push(Rejection { line, reason: format!("malformed: {e}") });
                continue;
            }
        };
        let doi = Doi::new(rec.doi.as_deref().unwrap_or(""));
        if doi.is_empty() {
            out.missing_doi += 1;
            out.rejections.push(Rejection { line, reason: "missing doi".into() });
            continue;
        }
        if !seen.insert(doi.clone()) {
            out.rejections.push(Rejection { line, reason: "duplicate".into() });
            continue;
        }
        out.records.push(PublicationRecord {
            doi,
            year: rec.year,
            journal: rec.journal.trim().to_string(),
            keywords: split_keywords(rec.keywords.as_deref().unwrap_or("")),
            title: rec.title,
        });
    }
    out
}

pub fn publication_line(p: &PublicationRecord) -> String {
    serde_json::to_string(&PublicationLine {
        doi: p.doi.as_str(),
        year: p.year,
        journal: &p.journal,
        keywords: p.keywords.join("; "),
        title: p.title.as_deref(),
    })
    .expect("publication serializes")
}

pub fn write_publications(pubs: &[PublicationRecord]) -> String {
    pubs.iter().map(|p| publication_line(p) + "\n").collect()
}

#[derive(Debug, Deserialize)]
struct RawAltmetric {
    doi: String,
    #[serde(default)]
    tweet_urls: Vec<String>,
    #[serde(default)]
    account_count: i64,
    #[serde(default)]
    tweet_count: i64,
    #[serde(default)]
    news_count: i64,
}

fn valid_url(u: &str) -> bool {
    matches!(url::Url::parse(u), Ok(p) if matches!(p.scheme(), "http" | "https") && p.host().is_some())
}

/// Parses altmetric JSON lines. Negative counts and records breaking the
/// count invariants are rejected; malformed URLs are dropped with a warning.
pub fn parse_altmetrics(text: &str) -> Parsed<AltmetricRecord> {
    let mut out = Parsed::default();
    let mut seen = BTreeSet::new();
    for (line, raw) in numbered(text) {
        let rec: RawAltmetric = match serde_json::from_str(raw) {
            Ok(r) => r,
            Err(e) => {
                out.rejections.push(Rejection { line, reason: format!("malformed: {e}") });
                continue;
            }
        };
        let doi = Doi::new(&rec.doi);
        if doi.is_empty() {
            out.missing_doi += 1;
            out.rejections.push(Rejection { line, reason: "missing doi".into() });
            continue;
        }
        if rec.account_count < 0 || rec.tweet_count < 0 || rec.news_count < 0 {
            out.rejections.push(Rejection { line, reason: "negative count".into() });
            continue;
        }
        let mut urls = Vec::with_capacity(rec.tweet_urls.len());
        for u in rec.tweet_urls {
            if valid_url(&u) {
                urls.push(u);
            } else {
                log::warn!("line {line}: dropping malformed URL {u:?}");
                out.warnings += 1;
            }
        }
        let record = AltmetricRecord {
            doi,
            tweet_urls: urls,
            account_count: rec.account_count as u64,
            tweet_count: rec.tweet_count as u64,
            news_count: rec.news_count as u64,
        };
        if let Err(rule) = record.check() {
            out.rejections.push(Rejection { line, reason: rule.into() });
            continue;
        }
        if !seen.insert(record.doi.clone()) {
            out.rejections.push(Rejection { line, reason: "duplicate".into() });
            continue;
        }
        out.records.push(record);
    }
    out
}

pub fn write_altmetrics(alts: &[AltmetricRecord]) -> String {
    alts.iter().map(|a| serde_json::to_string(a).expect("altmetric serializes") + "\n").collect()
}

pub fn write_rejections(sources: &[(&str, &[Rejection])]) -> String {
    let mut out = String::from("file\tline\treason\n");
    for (name, rejections) in sources {
        for r in *rejections {
            let _ = writeln!(out, "{name}\t{}\t{}", r.line, r.reason);
        }
    }
    out
}

/// One entry of a tweet URL manifest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub url: String,
    pub doi: Doi,
}

/// Parses `url<TAB>doi` lines.
pub fn parse_manifest(text: &str, path: &Path) -> Result<Vec<ManifestEntry>> {
    let mut out = Vec::new();
    for (line, raw) in numbered(text) {
        let Some((url, doi)) = raw.split_once('\t') else {
            return Err(Error::parse(path, line, "expected `url<TAB>doi`"));
        };
        out.push(ManifestEntry { url: url.trim().to_string(), doi: Doi::new(doi) });
    }
    if out.is_empty() {
        return Err(altmap_core::Error::EmptyManifest.into());
    }
    Ok(out)
}

pub fn write_manifest(entries: &[ManifestEntry]) -> String {
    entries.iter().map(|e| format!("{}\t{}\n", e.url, e.doi)).collect()
}

/// Builds the tweet manifest from altmetric records, in record order.
pub fn manifest_from_altmetrics(alts: &[AltmetricRecord]) -> Vec<ManifestEntry> {
    alts.iter()
        .flat_map(|a| a.tweet_urls.iter().map(|u| ManifestEntry { url: u.clone(), doi: a.doi.clone() }))
        .collect()
}

/// Parses `variant => canonical` rules. Lines starting with `#` are
/// comments; write `\#` for a literal leading hash.
pub fn parse_thesaurus(text: &str, kind: TermKind, path: &Path) -> Result<Thesaurus> {
    let mut rules = Vec::new();
    for (line, raw) in numbered(text) {
        let t = raw.trim();
        if t.starts_with('#') {
            continue;
        }
        let t = t.strip_prefix('\\').unwrap_or(t);
        let Some((v, c)) = t.split_once("=>") else {
            return Err(Error::parse(path, line, "expected `variant => canonical`"));
        };
        let v = altmap_core::terms::normalize_term(kind, v).map_err(|e| Error::parse(path, line, e.to_string()))?;
        let c = altmap_core::terms::normalize_term(kind, c).map_err(|e| Error::parse(path, line, e.to_string()))?;
        rules.push((v, c));
    }
    Ok(Thesaurus::new(rules)?)
}

pub fn write_thesaurus(th: &Thesaurus) -> String {
    th.rules()
        .map(|(v, c)| if v.starts_with('#') { format!("\\{v} => {c}\n") } else { format!("{v} => {c}\n") })
        .collect()
}

/// One document per line, terms separated by single spaces.
pub fn write_corpus<'a>(docs: impl IntoIterator<Item = &'a [String]>) -> String {
    let mut out = String::new();
    for d in docs {
        out.push_str(&d.join(" "));
        out.push('\n');
    }
    out
}

pub fn parse_corpus(text: &str) -> Vec<Vec<String>> {
    text.lines().map(|l| l.split_whitespace().map(str::to_string).collect()).collect()
}

pub fn write_frequencies(ranked: &RankedTerms) -> String {
    let mut out = String::from("term\tfrequency\trank\n");
    for e in &ranked.entries {
        let _ = writeln!(out, "{}\t{}\t{}", e.term, e.frequency, e.rank);
    }
    out
}

pub fn parse_frequencies(text: &str, path: &Path) -> Result<RankedTerms> {
    let mut entries = Vec::new();
    for (line, raw) in numbered(text) {
        if line == 1 && raw.starts_with("term\t") {
            continue;
        }
        let f: Vec<&str> = raw.split('\t').collect();
        if f.len() != 3 {
            return Err(Error::parse(path, line, "expected `term<TAB>frequency<TAB>rank`"));
        }
        let frequency = f[1].parse().map_err(|_| Error::parse(path, line, "bad frequency"))?;
        let rank = f[2].parse().map_err(|_| Error::parse(path, line, "bad rank"))?;
        entries.push(RankedEntry { term: f[0].to_string(), frequency, rank });
    }
    Ok(RankedTerms { entries })
}

/// One term per line.
pub fn write_terms(terms: &[String]) -> String {
    terms.iter().map(|t| format!("{t}\n")).collect()
}

pub fn parse_terms(text: &str) -> Vec<String> {
    numbered(text).map(|(_, l)| l.trim().to_string()).collect()
}

/// Formats `x` with four decimals, rounding exact ties to even.
pub fn format_weight(x: f64) -> String {
    format!("{x:.4}")
}

fn quote(label: &str) -> String {
    format!("\"{}\"", label.replace('"', "\"\""))
}

/// Writes the similarity network in Pajek format.
pub fn write_pajek(graph: &CoocGraph) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "*Vertices {}", graph.len());
    for (i, n) in graph.nodes.iter().enumerate() {
        let _ = writeln!(out, "{} {}", i + 1, quote(&n.label));
    }
    out.push_str("*Edges\n");
    for e in &graph.edges {
        let _ = writeln!(out, "{} {} {}", e.source + 1, e.target + 1, format_weight(e.similarity));
    }
    out
}

fn parse_vertex_line(raw: &str) -> std::result::Result<(usize, String), String> {
    let raw = raw.trim();
    let (id, rest) = raw.split_once(char::is_whitespace).ok_or("expected `id \"label\"`")?;
    let id: usize = id.parse().map_err(|_| format!("bad vertex id `{id}`"))?;
    let rest = rest.trim();
    let Some(body) = rest.strip_prefix('"') else {
        return Err("label must be double-quoted".into());
    };
    let mut label = String::new();
    let mut chars = body.chars().peekable();
    loop {
        match chars.next() {
            None => return Err("unterminated label".into()),
            Some('"') if chars.peek() == Some(&'"') => {
                chars.next();
                label.push('"');
            }
            Some('"') => break,
            Some(c) => label.push(c),
        }
    }
    Ok((id, label))
}

/// Reads a Pajek network. Nodes get zero frequency and weight and edges a
/// zero count; [`attach_sidecars`] fills them in.
pub fn parse_pajek(text: &str, path: &Path) -> Result<CoocGraph> {
    let err = |line: usize, msg: String| Error::parse(path, line, msg);
    let mut lines = numbered(text);
    let Some((line, head)) = lines.next() else {
        return Err(err(1, "empty file".into()));
    };
    let mut words = head.split_whitespace();
    if !words.next().is_some_and(|w| w.eq_ignore_ascii_case("*vertices")) {
        return Err(err(line, "expected `*Vertices N`".into()));
    }
    let n: usize = words.next().and_then(|w| w.parse().ok()).ok_or_else(|| err(line, "bad vertex count".into()))?;
    let mut labels: Vec<Option<String>> = vec![None; n];
    let mut in_edges = false;
    let mut edges = Vec::new();
    let mut seen = BTreeSet::new();
    for (line, raw) in lines {
        if raw.trim_start().starts_with('*') {
            if in_edges || !raw.trim().eq_ignore_ascii_case("*edges") {
                return Err(err(line, format!("unexpected section `{}`", raw.trim())));
            }
            in_edges = true;
            continue;
        }
        if !in_edges {
            let (id, label) = parse_vertex_line(raw).map_err(|m| err(line, m))?;
            if id == 0 || id > n {
                return Err(err(line, format!("vertex id {id} outside 1..={n} (ids are 1-based)")));
            }
            if labels[id - 1].replace(label).is_some() {
                return Err(err(line, format!("vertex {id} listed twice")));
            }
            continue;
        }
        let f: Vec<&str> = raw.split_whitespace().collect();
        if f.len() != 3 {
            return Err(err(line, "expected `i j weight`".into()));
        }
        let id = |s: &str| -> Result<usize> {
            let v: usize = s.parse().map_err(|_| err(line, format!("bad vertex id `{s}`")))?;
            if v == 0 || v > n {
                return Err(err(line, format!("vertex id {v} outside 1..={n} (ids are 1-based)")));
            }
            Ok(v - 1)
        };
        let (a, b) = (id(f[0])?, id(f[1])?);
        let w: f64 = f[2].parse().map_err(|_| err(line, format!("bad weight `{}`", f[2])))?;
        if a == b {
            return Err(err(line, "self-loop".into()));
        }
        if !(w.is_finite() && (0.0..=1.0).contains(&w)) {
            return Err(err(line, format!("weight {w} outside [0, 1]")));
        }
        let (s, t) = (a.min(b), a.max(b));
        if !seen.insert((s, t)) {
            return Err(err(line, format!("duplicate edge {} {}", s + 1, t + 1)));
        }
        edges.push(Edge { source: s, target: t, count: 0, similarity: w });
    }
    let nodes = labels
        .into_iter()
        .enumerate()
        .map(|(i, l)| {
            l.map(|label| Node { label, frequency: 0, weight: 0 })
                .ok_or_else(|| err(1, format!("vertex {} missing", i + 1)))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut g = CoocGraph { nodes, edges };
    g.sort_edges();
    Ok(g)
}

pub fn write_nodes(graph: &CoocGraph) -> String {
    let mut out = String::from("id\tlabel\tfrequency\tweight\n");
    for (i, n) in graph.nodes.iter().enumerate() {
        let _ = writeln!(out, "{}\t{}\t{}\t{}", i + 1, n.label, n.frequency, n.weight);
    }
    out
}

pub fn write_edges(graph: &CoocGraph) -> String {
    let mut out = String::from("source\ttarget\tcount\tcosine\n");
    for e in &graph.edges {
        let _ = writeln!(out, "{}\t{}\t{}\t{}", e.source + 1, e.target + 1, e.count, e.similarity);
    }
    out
}

fn tsv_rows<'a>(text: &'a str, path: &Path, header: &str, cols: usize) -> Result<Vec<(usize, Vec<&'a str>)>> {
    let mut rows = Vec::new();
    for (line, raw) in numbered(text) {
        if line == 1 {
            if raw != header {
                return Err(Error::parse(path, line, format!("expected header `{}`", header.replace('\t', "<TAB>"))));
            }
            continue;
        }
        let f: Vec<&str> = raw.split('\t').collect();
        if f.len() != cols {
            return Err(Error::parse(path, line, format!("expected {cols} tab-separated fields")));
        }
        rows.push((line, f));
    }
    Ok(rows)
}

/// Copies node frequencies/weights and edge counts from the sidecar tables
/// onto a graph read from Pajek.
pub fn attach_sidecars(graph: &mut CoocGraph, nodes: Option<(&str, &Path)>, edges: Option<(&str, &Path)>) -> Result<()> {
    if let Some((text, path)) = nodes {
        for (line, f) in tsv_rows(text, path, "id\tlabel\tfrequency\tweight", 4)? {
            let bad = |what: &str| Error::parse(path, line, format!("bad {what}"));
            let id: usize = f[0].parse().map_err(|_| bad("id"))?;
            let node = id.checked_sub(1).and_then(|i| graph.nodes.get_mut(i)).ok_or_else(|| bad("id"))?;
            if node.label != f[1] {
                return Err(Error::parse(path, line, format!("label `{}` does not match network label `{}`", f[1], node.label)));
            }
            node.frequency = f[2].parse().map_err(|_| bad("frequency"))?;
            node.weight = f[3].parse().map_err(|_| bad("weight"))?;
        }
    }
    if let Some((text, path)) = edges {
        let index: std::collections::BTreeMap<(usize, usize), usize> =
            graph.edges.iter().enumerate().map(|(k, e)| ((e.source, e.target), k)).collect();
        for (line, f) in tsv_rows(text, path, "source\ttarget\tcount\tcosine", 4)? {
            let bad = |what: &str| Error::parse(path, line, format!("bad {what}"));
            let a: usize = f[0].parse().map_err(|_| bad("source"))?;
            let b: usize = f[1].parse().map_err(|_| bad("target"))?;
            let key = (a.min(b).wrapping_sub(1), a.max(b).wrapping_sub(1));
            let k = *index.get(&key).ok_or_else(|| bad("edge: not in the network"))?;
            graph.edges[k].count = f[2].parse().map_err(|_| bad("count"))?;
        }
    }
    Ok(())
}

pub fn write_clusters(graph: &CoocGraph, labels: &[usize]) -> String {
    let mut out = String::from("term\tcluster\n");
    for (n, c) in graph.nodes.iter().zip(labels) {
        let _ = writeln!(out, "{}\t{c}", n.label);
    }
    out
}

/// Reads a cluster table and returns labels in the graph's node order.
pub fn parse_clusters(text: &str, path: &Path, graph: &CoocGraph) -> Result<Vec<usize>> {
    let mut by_term = std::collections::BTreeMap::new();
    for (line, f) in tsv_rows(text, path, "term\tcluster", 2)? {
        let c: usize = f[1].parse().map_err(|_| Error::parse(path, line, "bad cluster"))?;
        by_term.insert(f[0].to_string(), c);
    }
    graph
        .nodes
        .iter()
        .map(|n| {
            by_term
                .get(&n.label)
                .copied()
                .ok_or_else(|| Error::Core(altmap_core::Error::Coverage(format!("no cluster for `{}`", n.label))))
        })
        .collect()
}

/// Map file: `id label x y cluster weight`, coordinates with six decimals.
pub fn write_map(graph: &CoocGraph, positions: &[[f64; 2]], clusters: &ClusterAssignment) -> Result<String> {
    let n = graph.len();
    if positions.len() != n || clusters.labels.len() != n {
        return Err(altmap_core::Error::Coverage(format!(
            "{n} nodes but {} positions and {} cluster labels",
            positions.len(),
            clusters.labels.len()
        ))
        .into());
    }
    let mut out = String::from("id\tlabel\tx\ty\tcluster\tweight\n");
    for (i, node) in graph.nodes.iter().enumerate() {
        let [x, y] = positions[i];
        let _ = writeln!(out, "{}\t{}\t{x:.6}\t{y:.6}\t{}\t{}", i + 1, node.label, clusters.labels[i], node.weight);
    }
    Ok(out)
}

/// Positions and cluster labels read back from a map file.
#[derive(Debug, Clone, PartialEq)]
pub struct MapRows {
    pub labels: Vec<String>,
    pub positions: Vec<[f64; 2]>,
    pub clusters: Vec<usize>,
    pub weights: Vec<u64>,
}

pub fn parse_map(text: &str, path: &Path) -> Result<MapRows> {
    let mut rows = MapRows { labels: Vec::new(), positions: Vec::new(), clusters: Vec::new(), weights: Vec::new() };
    for (line, f) in tsv_rows(text, path, "id\tlabel\tx\ty\tcluster\tweight", 6)? {
        let bad = |what: &str| Error::parse(path, line, format!("bad {what}"));
        let id: usize = f[0].parse().map_err(|_| bad("id"))?;
        if id != rows.labels.len() + 1 {
            return Err(Error::parse(path, line, format!("expected id {}", rows.labels.len() + 1)));
        }
        rows.labels.push(f[1].to_string());
        rows.positions.push([f[2].parse().map_err(|_| bad("x"))?, f[3].parse().map_err(|_| bad("y"))?]);
        rows.clusters.push(f[4].parse().map_err(|_| bad("cluster"))?);
        rows.weights.push(f[5].parse().map_err(|_| bad("weight"))?);
    }
    Ok(rows)
}

/// `doi<TAB>flags`, flags being the comma-separated segment names.
pub fn write_segments(pubs: &[PublicationRecord], segments: &Segments) -> String {
    let mut out = String::from("doi\tflags\n");
    for p in pubs {
        let flags: Vec<&str> = segments.flags(&p.doi).into_iter().map(Segment::name).collect();
        let _ = writeln!(out, "{}\t{}", p.doi, flags.join(","));
    }
    out
}

pub fn parse_segments(text: &str, path: &Path) -> Result<Segments> {
    let mut segments = Segments::default();
    for (line, f) in tsv_rows(text, path, "doi\tflags", 2)? {
        for name in f[1].split(',').filter(|s| !s.is_empty()) {
            let seg: Segment = name.parse().map_err(|_| Error::parse(path, line, format!("unknown segment `{name}`")))?;
            segments.insert(seg, Doi::new(f[0]));
        }
    }
    Ok(segments)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> &'static Path {
        Path::new("test")
    }

    #[test]
    fn weights_round_ties_to_even() {
        assert_eq!(format_weight(0.03125), "0.0312");
        assert_eq!(format_weight(0.09375), "0.0938");
        assert_eq!(format_weight(2.0 / 6f64.sqrt()), "0.8165");
        assert_eq!(format_weight(1.0), "1.0000");
    }

    #[test]
    fn publication_line_mapping() {
        let parsed = parse_publications(
            "{\"doi\":\"https://doi.org/10.1/X\",\"year\":2015,\"journal\":\"Nature\",\"keywords\":\"Climate change; Holocene\"}\n\
             {\"doi\":\"10.1/y\",\"year\":2016,\"journal\":\"Nature\",\"keywords\":\"\"}\n\
             {\"year\":2016,\"journal\":\"Nature\"}\n\
             {\"doi\":\"10.1/x\",\"year\":2017,\"journal\":\"Science\"}\n\
             not json\n",
        );
        assert_eq!(parsed.records.len(), 2);
        assert_eq!(parsed.records[0].doi.as_str(), "10.1/x");
        assert_eq!(parsed.records[0].keywords, vec!["Climate change", "Holocene"]);
        assert!(parsed.records[1].keywords.is_empty());
        assert_eq!(parsed.missing_doi, 1);
        let reasons: Vec<_> = parsed.rejections.iter().map(|r| (r.line, r.reason.as_str())).collect();
        assert_eq!(reasons[..2], [(3, "missing doi"), (4, "duplicate")]);
        assert_eq!(parsed.lines(), 5);
    }

    #[test]
    fn altmetric_rules() {
        let parsed = parse_altmetrics(
            "{\"doi\":\"10.1/x\",\"tweet_urls\":[\"https://t.example/1\",\"nota url\"],\"account_count\":2,\"tweet_count\":2,\"news_count\":1}\n\
             {\"doi\":\"10.1/y\",\"account_count\":-1,\"tweet_count\":2}\n\
             {\"doi\":\"10.1/z\",\"account_count\":1,\"tweet_count\":0}\n",
        );
        assert_eq!(parsed.records.len(), 1);
        assert_eq!(parsed.records[0].tweet_urls, vec!["https://t.example/1"]);
        assert_eq!(parsed.warnings, 1);
        assert_eq!(parsed.rejections[0].reason, "negative count");
        assert_eq!(parsed.rejections.len(), 2);
    }

    #[test]
    fn thesaurus_comments_and_escapes() {
        let th = parse_thesaurus("# hashtag merges\n\\#ANTARCTIC => #ANTARCTICA\nCOP21 => cop\n", TermKind::Hashtag, p()).unwrap();
        assert_eq!(th.apply("#ANTARCTIC"), "#ANTARCTICA");
        assert_eq!(th.apply("#COP21"), "#COP");
        assert_eq!(th.len(), 2);
        let again = parse_thesaurus(&write_thesaurus(&th), TermKind::Hashtag, p()).unwrap();
        assert_eq!(again, th);
        let chain = parse_thesaurus("a => b\nb => c\n", TermKind::Keyword, p());
        assert!(matches!(chain, Err(Error::Core(altmap_core::Error::Thesaurus(_)))));
    }

    #[test]
    fn pajek_two_nodes() {
        let g = CoocGraph::from_similarities(vec!["a".into(), "say \"hi\"".into()], [(0, 1, 2.0 / 6f64.sqrt())]).unwrap();
        let text = write_pajek(&g);
        assert_eq!(text, "*Vertices 2\n1 \"a\"\n2 \"say \"\"hi\"\"\"\n*Edges\n1 2 0.8165\n");
        let back = parse_pajek(&text, p()).unwrap();
        assert_eq!(back.nodes[1].label, "say \"hi\"");
        assert_eq!(back.edges[0].similarity, 0.8165);
    }

    #[test]
    fn pajek_errors_carry_line_numbers() {
        let e = parse_pajek("*Vertices 2\n1 \"a\"\n2 \"b\"\n*Edges\n0 2 0.5\n", p()).unwrap_err();
        assert!(matches!(e, Error::Parse { line: 5, .. }), "{e}");
        assert!(e.to_string().contains("1-based"));
        let e = parse_pajek("*Vertices 2\n1 \"a\"\n*Edges\n", p()).unwrap_err();
        assert!(e.to_string().contains("vertex 2 missing"));
        let e = parse_pajek("*Vertices 1\n1 a\n", p()).unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, .. }));
    }

    #[test]
    fn map_file_round_trip() {
        let g = CoocGraph::from_similarities(vec!["a".into(), "b".into(), "c".into()], [(0, 1, 0.5), (1, 2, 0.25)]).unwrap();
        let clusters = ClusterAssignment { labels: vec![1, 1, 2], quality: 0.0 };
        let pos = [[0.1234567, -2.0], [1.0, 1.0], [3.25, 0.0]];
        let text = write_map(&g, &pos, &clusters).unwrap();
        assert_eq!(text.lines().count(), 4);
        let rows = parse_map(&text, p()).unwrap();
        assert_eq!(rows.positions[0], [0.123457, -2.0]);
        assert_eq!(write_map(&g, &rows.positions, &clusters).unwrap(), text);
        let short = ClusterAssignment { labels: vec![1, 1], quality: 0.0 };
        assert!(write_map(&g, &pos, &short).is_err());
    }

    #[test]
    fn manifest_needs_tabs_and_entries() {
        assert!(matches!(parse_manifest("", p()), Err(Error::Core(altmap_core::Error::EmptyManifest))));
        assert!(matches!(parse_manifest("http://a/1 10.1/x\n", p()), Err(Error::Parse { line: 1, .. })));
        let m = parse_manifest("http://a/1\t10.1/X\n", p()).unwrap();
        assert_eq!(m[0].doi.as_str(), "10.1/x");
    }
}
