//! Binary word/document matrices, co-occurrence counts, cosine similarity
//! and the co-occurrence graph.

use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::terms::TermSet;
use crate::{Error, Result};

/// Sparse binary document x term matrix. Rows hold the sorted column indices
/// of the selected terms a document contains.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DocTermMatrix {
    terms: Vec<String>,
    rows: Vec<Vec<usize>>,
}

impl DocTermMatrix {
    pub fn n_docs(&self) -> usize {
        self.rows.len()
    }

    pub fn n_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> &[String] {
        &self.terms
    }

    pub fn rows(&self) -> &[Vec<usize>] {
        &self.rows
    }

    pub fn get(&self, doc: usize, term: usize) -> bool {
        self.rows[doc].binary_search(&term).is_ok()
    }

    pub fn column_sums(&self) -> Vec<u64> {
        let mut sums = vec![0; self.terms.len()];
        for row in &self.rows {
            for &t in row {
                sums[t] += 1;
            }
        }
        sums
    }
}

/// Restricts documents to the term set. Columns follow the term set order;
/// documents without any selected term are dropped.
pub fn build_matrix<'a, D>(documents: impl IntoIterator<Item = D>, termset: &TermSet) -> Result<DocTermMatrix>
where
    D: IntoIterator<Item = &'a String>,
{
    if termset.is_empty() {
        return Err(Error::EmptyTermSet);
    }
    let index: BTreeMap<&str, usize> = termset.terms.iter().enumerate().map(|(i, t)| (t.as_str(), i)).collect();
    let mut rows = Vec::new();
    for doc in documents {
        let mut row: Vec<usize> = doc.into_iter().filter_map(|t| index.get(t.as_str()).copied()).collect();
        row.sort_unstable();
        row.dedup();
        if !row.is_empty() {
            rows.push(row);
        }
    }
    let m = DocTermMatrix { terms: termset.terms.clone(), rows };
    if let Some(i) = m.column_sums().iter().position(|&s| s == 0) {
        return Err(Error::TermAbsent(m.terms[i].clone()));
    }
    Ok(m)
}

/// Dense symmetric table of co-occurrence counts; the diagonal holds term
/// frequencies.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoocCounts {
    n: usize,
    counts: Vec<u64>,
}

impl CoocCounts {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.counts[i * self.n + j]
    }

    pub fn frequencies(&self) -> Vec<u64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    /// Total co-occurrence of a term with all other terms.
    pub fn total(&self, i: usize) -> u64 {
        (0..self.n).filter(|&j| j != i).map(|j| self.get(i, j)).sum()
    }
}

/// Computes `c_ij = sum_d x[d,i] * x[d,j]`, i.e. the product of the transposed
/// matrix with itself.
pub fn cooccurrence(matrix: &DocTermMatrix) -> CoocCounts {
    let n = matrix.n_terms();
    let mut counts = vec![0u64; n * n];
    for row in matrix.rows() {
        for (a, &i) in row.iter().enumerate() {
            counts[i * n + i] += 1;
            for &j in &row[a + 1..] {
                counts[i * n + j] += 1;
                counts[j * n + i] += 1;
            }
        }
    }
    CoocCounts { n, counts }
}

/// Dense symmetric cosine similarities with a zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct Similarities {
    n: usize,
    values: Vec<f64>,
}

impl Similarities {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }
}

/// Cosine normalization `s_ij = c_ij / sqrt(f_i * f_j)`. For binary data this
/// equals the cosine between the occurrence columns of terms i and j.
pub fn cosine_normalize(counts: &CoocCounts, labels: &[String]) -> Result<Similarities> {
    let n = counts.n();
    let freq = counts.frequencies();
    if let Some(i) = freq.iter().position(|&f| f == 0) {
        return Err(Error::ZeroFrequency(labels.get(i).cloned().unwrap_or_else(|| i.to_string())));
    }
    let mut values = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let c = counts.get(i, j);
            if c > 0 {
                let s = (c as f64 / libm::sqrt(freq[i] as f64 * freq[j] as f64)).min(1.0);
                values[i * n + j] = s;
                values[j * n + i] = s;
            }
        }
    }
    Ok(Similarities { n, values })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub label: String,
    /// Number of documents containing the term.
    pub frequency: u64,
    /// Total co-occurrence with all other terms; drives node size.
    pub weight: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    /// 0-based node index, always less than `target`.
    pub source: usize,
    pub target: usize,
    pub count: u64,
    pub similarity: f64,
}

/// Weighted undirected term co-occurrence graph without self-loops. Edges are
/// sorted by `(source, target)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoocGraph {
    pub nodes: Vec<Node>,
    pub edges: Vec<Edge>,
}

impl CoocGraph {
    /// Builds a graph from labels and `(i, j, similarity)` triples. Counts,
    /// frequencies and weights are left at zero.
    pub fn from_similarities(labels: Vec<String>, edges: impl IntoIterator<Item = (usize, usize, f64)>) -> Result<Self> {
        let n = labels.len();
        let nodes = labels.into_iter().map(|label| Node { label, frequency: 0, weight: 0 }).collect();
        let mut list = Vec::new();
        for (i, j, s) in edges {
            if i == j || i >= n || j >= n {
                return Err(Error::InvalidParameter(alloc::format!("invalid edge {i}-{j}")));
            }
            let (source, target) = if i < j { (i, j) } else { (j, i) };
            list.push(Edge { source, target, count: 0, similarity: s });
        }
        let mut g = CoocGraph { nodes, edges: list };
        g.sort_edges();
        Ok(g)
    }

    pub fn sort_edges(&mut self) {
        self.edges.sort_by_key(|e| (e.source, e.target));
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.nodes.iter().map(|n| n.label.as_str())
    }

    /// Dense similarity matrix (zero where no edge exists).
    pub fn similarity_matrix(&self) -> Vec<f64> {
        let n = self.len();
        let mut m = vec![0.0; n * n];
        for e in &self.edges {
            m[e.source * n + e.target] = e.similarity;
            m[e.target * n + e.source] = e.similarity;
        }
        m
    }

    /// Adjacency lists of `(neighbor, similarity)`.
    pub fn adjacency(&self) -> Vec<Vec<(usize, f64)>> {
        let mut adj = vec![Vec::new(); self.len()];
        for e in &self.edges {
            adj[e.source].push((e.target, e.similarity));
            adj[e.target].push((e.source, e.similarity));
        }
        adj
    }

    /// Connected components (over edges with positive similarity), each
    /// sorted, ordered by size descending and then by smallest node.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let adj = self.adjacency();
        let mut comp = vec![usize::MAX; self.len()];
        let mut out: Vec<Vec<usize>> = Vec::new();
        for start in 0..self.len() {
            if comp[start] != usize::MAX {
                continue;
            }
            let id = out.len();
            let mut members = vec![start];
            comp[start] = id;
            let mut k = 0;
            while k < members.len() {
                let v = members[k];
                k += 1;
                for &(w, s) in &adj[v] {
                    if s > 0.0 && comp[w] == usize::MAX {
                        comp[w] = id;
                        members.push(w);
                    }
                }
            }
            members.sort_unstable();
            out.push(members);
        }
        out.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a[0].cmp(&b[0])));
        out
    }
}

/// Assembles the co-occurrence graph. Node weights are total co-occurrence
/// counts; edges with similarity below `min_edge_weight` are dropped.
pub fn to_graph(sims: &Similarities, counts: &CoocCounts, labels: &[String], min_edge_weight: Option<f64>) -> CoocGraph {
    let n = counts.n();
    let nodes = (0..n)
        .map(|i| Node { label: labels[i].clone(), frequency: counts.get(i, i), weight: counts.total(i) })
        .collect();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let count = counts.get(i, j);
            let similarity = sims.get(i, j);
            if count == 0 || min_edge_weight.is_some_and(|m| similarity < m) {
                continue;
            }
            edges.push(Edge { source: i, target: j, count, similarity });
        }
    }
    CoocGraph { nodes, edges }
}

/// Runs the whole chain from documents to graph.
pub fn build_graph<'a, D>(documents: impl IntoIterator<Item = D>, termset: &TermSet, min_edge_weight: Option<f64>) -> Result<CoocGraph>
where
    D: IntoIterator<Item = &'a String>,
{
    let matrix = build_matrix(documents, termset)?;
    let counts = cooccurrence(&matrix);
    let sims = cosine_normalize(&counts, matrix.terms())?;
    Ok(to_graph(&sims, &counts, matrix.terms(), min_edge_weight))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::borrow::ToOwned;
    use proptest::prelude::*;

    fn docs(raw: &[&[&str]]) -> Vec<Vec<String>> {
        raw.iter().map(|d| d.iter().map(|t| (*t).to_owned()).collect()).collect()
    }

    fn set(terms: &[&str]) -> TermSet {
        TermSet { terms: terms.iter().map(|t| (*t).to_owned()).collect(), target: terms.len(), threshold: None }
    }

    /// Cosine of two columns computed from the definition.
    fn column_cosine(m: &DocTermMatrix, i: usize, j: usize) -> f64 {
        let col = |t: usize| (0..m.n_docs()).map(|d| if m.get(d, t) { 1.0 } else { 0.0 }).collect::<Vec<f64>>();
        let (a, b) = (col(i), col(j));
        let dot: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
        let na: f64 = a.iter().map(|x| x * x).sum::<f64>();
        let nb: f64 = b.iter().map(|x| x * x).sum::<f64>();
        dot / (libm::sqrt(na) * libm::sqrt(nb))
    }

    #[test]
    fn matrix_column_sums() {
        let d = docs(&[&["a", "b"], &["a"], &["a", "c"]]);
        let m = build_matrix(&d, &set(&["a", "b", "c"])).unwrap();
        assert_eq!((m.n_docs(), m.n_terms()), (3, 3));
        assert_eq!(m.column_sums(), vec![3, 1, 1]);
    }

    #[test]
    fn unselected_only_documents_are_dropped() {
        let d = docs(&[&["a", "b"], &["z"], &["b"]]);
        let m = build_matrix(&d, &set(&["a", "b"])).unwrap();
        assert_eq!(m.n_docs(), 2);
    }

    #[test]
    fn matrix_errors() {
        let d = docs(&[&["a"]]);
        assert_eq!(build_matrix(&d, &set(&[])), Err(Error::EmptyTermSet));
        assert_eq!(build_matrix(&d, &set(&["a", "q"])), Err(Error::TermAbsent("q".into())));
    }

    #[test]
    fn counts_from_three_documents() {
        let d = docs(&[&["a", "b"], &["a", "c"], &["a", "b", "c"]]);
        let m = build_matrix(&d, &set(&["a", "b", "c"])).unwrap();
        let c = cooccurrence(&m);
        assert_eq!((c.get(0, 1), c.get(1, 2), c.get(0, 2)), (2, 1, 2));
        assert_eq!(c.frequencies(), vec![3, 2, 2]);
        let g = to_graph(&cosine_normalize(&c, m.terms()).unwrap(), &c, m.terms(), None);
        assert_eq!((g.nodes.len(), g.edges.len()), (3, 3));
        // weight of a = c_ab + c_ac
        assert_eq!(g.nodes[0].weight, 4);
        let s_ab = g.edges[0].similarity;
        assert!((s_ab - 2.0 / libm::sqrt(6.0)).abs() < 1e-15);
        assert!((s_ab - 0.8165).abs() < 1e-4);
    }

    #[test]
    fn identical_and_disjoint_columns() {
        let d = docs(&[&["a", "b"], &["a", "b"], &["c"]]);
        let m = build_matrix(&d, &set(&["a", "b", "c"])).unwrap();
        let c = cooccurrence(&m);
        let s = cosine_normalize(&c, m.terms()).unwrap();
        assert_eq!(s.get(0, 1), 1.0);
        assert_eq!(s.get(0, 2), 0.0);
        let single = docs(&[&["a", "b"]]);
        let m = build_matrix(&single, &set(&["a", "b"])).unwrap();
        assert_eq!(cooccurrence(&m).get(0, 1), 1);
    }

    #[test]
    fn edge_threshold_keeps_nodes() {
        let d = docs(&[&["a", "b"], &["a", "c"], &["a", "b", "c"]]);
        let g = build_graph(&d, &set(&["a", "b", "c"]), Some(1.01)).unwrap();
        assert_eq!((g.nodes.len(), g.edges.len()), (3, 0));
    }

    proptest! {
        #[test]
        fn similarity_matches_column_cosine(bits in proptest::collection::vec(proptest::collection::vec(proptest::bool::ANY, 8), 1..30)) {
            let labels: Vec<String> = (0..8).map(|i| alloc::format!("t{i}")).collect();
            let documents: Vec<Vec<String>> = bits.iter()
                .map(|row| row.iter().enumerate().filter(|(_, b)| **b).map(|(i, _)| labels[i].clone()).collect())
                .collect();
            let present: Vec<String> = labels.iter().filter(|l| documents.iter().any(|d| d.contains(l))).cloned().collect();
            prop_assume!(!present.is_empty());
            let ts = TermSet { target: present.len(), terms: present, threshold: None };
            let m = build_matrix(&documents, &ts).unwrap();
            let c = cooccurrence(&m);
            let s = cosine_normalize(&c, m.terms()).unwrap();
            for i in 0..m.n_terms() {
                for j in 0..m.n_terms() {
                    prop_assert_eq!(c.get(i, j), c.get(j, i));
                    prop_assert_eq!(s.get(i, j), s.get(j, i));
                    if i != j {
                        let v = s.get(i, j);
                        prop_assert!((0.0..=1.0).contains(&v));
                        prop_assert!((v - column_cosine(&m, i, j)).abs() <= 1e-12);
                    }
                }
            }
        }
    }
}
