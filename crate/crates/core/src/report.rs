//! Comparison reports: term-set overlap tables, journal importance per
//! segment, hashtag-per-paper histograms and SVG network drawings.
//!
//! Every renderer formats numbers with a fixed number of decimals so equal
//! inputs always give byte-identical output.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::corpus::PublicationRecord;
use crate::network::CoocGraph;
use crate::segment::{HashtagStats, Segment, Segments};
use crate::{Error, Result};

/// Pairwise overlaps between named term sets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlapTable {
    pub names: Vec<String>,
    pub sizes: Vec<usize>,
    /// Symmetric intersection counts; the diagonal holds the set sizes.
    pub counts: Vec<Vec<usize>>,
}

impl OverlapTable {
    /// `100 |A ∩ B| / min(|A|, |B|)`.
    pub fn percentage(&self, i: usize, j: usize) -> f64 {
        let denom = self.sizes[i].min(self.sizes[j]);
        if denom == 0 {
            return 0.0;
        }
        100.0 * self.counts[i][j] as f64 / denom as f64
    }

    /// Diagonal: set sizes; lower triangle: counts; upper triangle: percentages.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("set");
        for n in &self.names {
            out.push(',');
            out.push_str(&csv_field(n));
        }
        out.push('\n');
        for i in 0..self.names.len() {
            out.push_str(&csv_field(&self.names[i]));
            for j in 0..self.names.len() {
                out.push(',');
                if i == j {
                    out.push_str(&self.sizes[i].to_string());
                } else if j < i {
                    out.push_str(&self.counts[i][j].to_string());
                } else {
                    let _ = write!(out, "{:.1}%", self.percentage(i, j));
                }
            }
            out.push('\n');
        }
        out
    }
}

/// Builds the overlap table of `sets`, given as `(name, terms)`.
pub fn overlap_table<N, T, S>(sets: impl IntoIterator<Item = (N, T)>) -> Result<OverlapTable>
where
    N: Into<String>,
    T: IntoIterator<Item = S>,
    S: Into<String>,
{
    let mut names = Vec::new();
    let mut members: Vec<BTreeSet<String>> = Vec::new();
    for (name, terms) in sets {
        let name = name.into();
        let set: BTreeSet<String> = terms.into_iter().map(Into::into).collect();
        if set.is_empty() {
            return Err(Error::EmptySegment(name));
        }
        names.push(name);
        members.push(set);
    }
    let k = members.len();
    let mut counts = vec![vec![0; k]; k];
    for i in 0..k {
        for j in 0..k {
            counts[i][j] = if i == j { members[i].len() } else { members[i].intersection(&members[j]).count() };
        }
    }
    let sizes = members.iter().map(BTreeSet::len).collect();
    Ok(OverlapTable { names, sizes, counts })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JournalRow {
    pub journal: String,
    /// Papers per segment, in the table's segment order.
    pub counts: Vec<usize>,
    pub shares: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JournalImportance {
    pub segments: Vec<Segment>,
    pub sizes: Vec<usize>,
    /// Per segment: top journals as `(journal, papers)`.
    pub top: Vec<Vec<(String, usize)>>,
    /// Union of the top lists, ordered by share in the ordering segment.
    pub rows: Vec<JournalRow>,
}

impl JournalImportance {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("journal");
        for s in &self.segments {
            let _ = write!(out, ",{0}_papers,{0}_share", s.name());
        }
        out.push('\n');
        for r in &self.rows {
            out.push_str(&csv_field(&r.journal));
            for (c, s) in r.counts.iter().zip(&r.shares) {
                let _ = write!(out, ",{c},{s:.6}");
            }
            out.push('\n');
        }
        out
    }
}

fn journal_key(name: &str) -> String {
    name.trim().to_lowercase()
}

/// Ranks journals by paper count in each segment, keeps the top `top_n` per
/// segment and reports their union ordered by share in `order_by`.
/// Journal names match after trimming and case folding; the first spelling
/// seen is displayed.
pub fn journal_importance(
    segments: &Segments,
    which: &[Segment],
    pubs: &[PublicationRecord],
    top_n: usize,
    order_by: Segment,
) -> Result<JournalImportance> {
    if top_n == 0 {
        return Err(Error::InvalidParameter("top_n must be >= 1".into()));
    }
    let Some(order_idx) = which.iter().position(|&s| s == order_by) else {
        return Err(Error::InvalidParameter(format!("ordering segment {} is not compared", order_by.name())));
    };
    let mut display: BTreeMap<String, String> = BTreeMap::new();
    for p in pubs {
        if !p.journal.trim().is_empty() {
            display.entry(journal_key(&p.journal)).or_insert_with(|| p.journal.trim().to_string());
        }
    }
    let mut per_segment: Vec<BTreeMap<&str, usize>> = Vec::with_capacity(which.len());
    let mut sizes = Vec::with_capacity(which.len());
    for &seg in which {
        let dois = segments.get(seg);
        if dois.is_empty() {
            return Err(Error::EmptySegment(seg.name().into()));
        }
        sizes.push(dois.len());
        let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
        for p in pubs {
            if dois.contains(&p.doi) && !p.journal.trim().is_empty() {
                *counts.entry(display[&journal_key(&p.journal)].as_str()).or_insert(0) += 1;
            }
        }
        per_segment.push(counts);
    }

    let top: Vec<Vec<(String, usize)>> = per_segment
        .iter()
        .map(|counts| {
            let mut v: Vec<(&str, usize)> = counts.iter().map(|(j, c)| (*j, *c)).collect();
            v.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
            v.into_iter().take(top_n).map(|(j, c)| (j.to_string(), c)).collect()
        })
        .collect();
    let union: BTreeSet<&str> = top.iter().flatten().map(|(j, _)| j.as_str()).collect();
    let mut rows: Vec<JournalRow> = union
        .into_iter()
        .map(|j| {
            let counts: Vec<usize> = per_segment.iter().map(|c| c.get(j).copied().unwrap_or(0)).collect();
            let shares = counts.iter().zip(&sizes).map(|(&c, &n)| c as f64 / n as f64).collect();
            JournalRow { journal: j.to_string(), counts, shares }
        })
        .collect();
    rows.sort_by(|a, b| {
        b.counts[order_idx].cmp(&a.counts[order_idx]).then_with(|| a.journal.cmp(&b.journal))
    });
    Ok(JournalImportance { segments: which.to_vec(), sizes, top, rows })
}

/// Papers per hashtag count over an inclusive range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub lo: usize,
    pub hi: usize,
    /// `bins[k]` counts papers with exactly `lo + k` hashtags.
    pub bins: Vec<u64>,
    /// Papers whose count falls outside the range.
    pub outside: u64,
}

impl Histogram {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("hashtags,papers\n");
        for (k, b) in self.bins.iter().enumerate() {
            let _ = writeln!(out, "{},{b}", self.lo + k);
        }
        out
    }

    /// Bar chart of the bins.
    pub fn to_svg(&self) -> String {
        let (w, h, m) = (640.0, 360.0, 40.0);
        let max = self.bins.iter().copied().max().unwrap_or(0).max(1) as f64;
        let n = self.bins.len() as f64;
        let slot = (w - 2.0 * m) / n;
        let mut out = svg_open(w, h);
        let _ = writeln!(
            out,
            "<line x1=\"{m:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"#333333\" stroke-width=\"1\"/>",
            h - m,
            w - m,
            h - m
        );
        for (k, &b) in self.bins.iter().enumerate() {
            let bh = (h - 2.0 * m) * b as f64 / max;
            let x = m + k as f64 * slot;
            let _ = writeln!(
                out,
                "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{bh:.2}\" fill=\"#4e79a7\"><title>{}: {b}</title></rect>",
                x + 0.1 * slot,
                h - m - bh,
                0.8 * slot,
                self.lo + k
            );
            let _ = writeln!(
                out,
                "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"9\" text-anchor=\"middle\">{}</text>",
                x + 0.5 * slot,
                h - m + 12.0,
                self.lo + k
            );
        }
        let _ = writeln!(out, "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"11\" text-anchor=\"middle\">hashtags per paper</text>", w / 2.0, h - 8.0);
        out.push_str("</svg>\n");
        out
    }
}

/// Bins the per-paper hashtag distribution over `lo..=hi`.
pub fn hashtag_histogram(stats: &HashtagStats, lo: usize, hi: usize) -> Result<Histogram> {
    if lo > hi {
        return Err(Error::InvalidRange(lo, hi));
    }
    let mut bins = vec![0u64; hi - lo + 1];
    let mut outside = 0;
    for (&tags, &papers) in &stats.per_paper {
        match usize::try_from(tags) {
            Ok(t) if (lo..=hi).contains(&t) => bins[t - lo] += papers,
            _ => outside += papers,
        }
    }
    Ok(Histogram { lo, hi, bins, outside })
}

/// Cluster colors; cluster `k` gets entry `(k - 1) % len`.
pub const PALETTE: [&str; 12] = [
    "#e15759", "#4e79a7", "#59a14f", "#f28e2b", "#b07aa1", "#76b7b2", "#edc948", "#ff9da7", "#9c755f", "#bab0ac",
    "#86bcb6", "#d37295",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvgStyle {
    pub width: f64,
    pub height: f64,
    pub margin: f64,
    /// Radius of the node with the largest display weight.
    pub max_radius: f64,
    /// Stroke width of the edge with the largest count.
    pub max_stroke: f64,
    pub font_size: f64,
    pub labels: bool,
}

impl Default for SvgStyle {
    fn default() -> Self {
        SvgStyle { width: 800.0, height: 800.0, margin: 60.0, max_radius: 24.0, max_stroke: 6.0, font_size: 10.0, labels: true }
    }
}

/// Radius per node: `max_radius * sqrt(weight / max weight)`.
pub fn node_radii(graph: &CoocGraph, max_radius: f64) -> Vec<f64> {
    let max = graph.nodes.iter().map(|n| n.weight).max().unwrap_or(0);
    graph
        .nodes
        .iter()
        .map(|n| if max == 0 { max_radius } else { max_radius * libm::sqrt(n.weight as f64 / max as f64) })
        .collect()
}

/// Draws a clustered, laid-out network. Node area grows with the display
/// weight, edge width with the co-occurrence count, and fill color encodes
/// the cluster.
pub fn render_network_svg(graph: &CoocGraph, positions: &[[f64; 2]], clusters: &[usize], style: &SvgStyle) -> Result<String> {
    let n = graph.len();
    if positions.len() != n || clusters.len() != n {
        return Err(Error::Coverage(format!(
            "{n} nodes but {} positions and {} cluster labels",
            positions.len(),
            clusters.len()
        )));
    }
    if let Some(i) = clusters.iter().position(|&c| c == 0) {
        return Err(Error::Coverage(format!("node {} has no cluster", graph.nodes[i].label)));
    }
    let radii = node_radii(graph, style.max_radius);
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for p in positions {
        for a in 0..2 {
            lo[a] = lo[a].min(p[a]);
            hi[a] = hi[a].max(p[a]);
        }
    }
    let span = (hi[0] - lo[0]).max(hi[1] - lo[1]);
    let inner = [style.width - 2.0 * style.margin, style.height - 2.0 * style.margin];
    let k = if span > 0.0 { inner[0].min(inner[1]) / span } else { 0.0 };
    let cx = (lo[0] + hi[0]) / 2.0;
    let cy = (lo[1] + hi[1]) / 2.0;
    let at = |p: [f64; 2]| [style.width / 2.0 + (p[0] - cx) * k, style.height / 2.0 - (p[1] - cy) * k];

    let mut out = svg_open(style.width, style.height);
    let max_count = graph.edges.iter().map(|e| e.count).max().unwrap_or(0);
    out.push_str("<g stroke=\"#999999\" stroke-opacity=\"0.5\">\n");
    for e in &graph.edges {
        let a = at(positions[e.source]);
        let b = at(positions[e.target]);
        let width = if max_count == 0 { 0.5 } else { style.max_stroke * e.count as f64 / max_count as f64 };
        let _ = writeln!(
            out,
            "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke-width=\"{width:.3}\"/>",
            a[0], a[1], b[0], b[1]
        );
    }
    out.push_str("</g>\n<g stroke=\"#ffffff\" stroke-width=\"0.5\">\n");
    for (i, node) in graph.nodes.iter().enumerate() {
        let p = at(positions[i]);
        let color = PALETTE[(clusters[i] - 1) % PALETTE.len()];
        let _ = writeln!(
            out,
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"{:.3}\" fill=\"{color}\" fill-opacity=\"0.85\"><title>{} (cluster {})</title></circle>",
            p[0],
            p[1],
            radii[i],
            escape(&node.label),
            clusters[i]
        );
    }
    out.push_str("</g>\n");
    if style.labels {
        let _ = writeln!(out, "<g font-size=\"{:.1}\" text-anchor=\"middle\" fill=\"#222222\">", style.font_size);
        for (i, node) in graph.nodes.iter().enumerate() {
            let p = at(positions[i]);
            let _ = writeln!(out, "<text x=\"{:.2}\" y=\"{:.2}\">{}</text>", p[0], p[1] + radii[i] + style.font_size, escape(&node.label));
        }
        out.push_str("</g>\n");
    }
    out.push_str("</svg>\n");
    Ok(out)
}

fn svg_open(w: f64, h: f64) -> String {
    format!(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{w:.0}\" height=\"{h:.0}\" viewBox=\"0 0 {w:.0} {h:.0}\" font-family=\"sans-serif\">\n<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n"
    )
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
