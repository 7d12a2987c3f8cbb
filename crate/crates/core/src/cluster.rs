//! Resolution-parameterized clustering by local moving.
//!
//! The objective is `Q = sum over same-cluster pairs i<j of (s_ij - gamma)`.
//! Each random start begins from singletons and runs up to `iterations`
//! sweeps; a sweep visits nodes in a seeded random order and moves each node
//! to the cluster with the largest gain, staying put on ties. The clusters
//! found are then collapsed into single nodes and moved again, level by
//! level, until nothing moves. Single-node moves are then tried one at a
//! time and kept only if local moving from them raises the quality. Small
//! clusters are optionally merged afterwards and the best start wins.

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::network::CoocGraph;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterParams {
    pub resolution: f64,
    pub min_cluster_size: usize,
    pub random_starts: usize,
    pub iterations: usize,
    pub seed: u64,
    pub merge_small: bool,
}

impl Default for ClusterParams {
    fn default() -> Self {
        ClusterParams { resolution: 0.1, min_cluster_size: 1, random_starts: 10, iterations: 10, seed: 0, merge_small: true }
    }
}

impl ClusterParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.resolution >= 0.0 && self.resolution.is_finite()) {
            return Err(Error::InvalidParameter("resolution must be finite and >= 0".into()));
        }
        if self.min_cluster_size == 0 || self.random_starts == 0 || self.iterations == 0 {
            return Err(Error::InvalidParameter("min_cluster_size, random_starts and iterations must be >= 1".into()));
        }
        Ok(())
    }
}

/// Cluster label per node (1-based, consecutive, cluster 1 largest) and the
/// quality of the partition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterAssignment {
    pub labels: Vec<usize>,
    pub quality: f64,
}

impl ClusterAssignment {
    pub fn n_clusters(&self) -> usize {
        self.labels.iter().copied().max().unwrap_or(0)
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.n_clusters()];
        for &l in &self.labels {
            sizes[l - 1] += 1;
        }
        sizes
    }
}

/// Dense similarity matrix of a graph.
#[derive(Debug, Clone)]
pub struct Problem {
    n: usize,
    sim: Vec<f64>,
}

impl Problem {
    pub fn new(graph: &CoocGraph) -> Result<Self> {
        if graph.is_empty() {
            return Err(Error::EmptyGraph);
        }
        Ok(Problem { n: graph.len(), sim: graph.similarity_matrix() })
    }

    pub fn from_matrix(n: usize, sim: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyGraph);
        }
        assert_eq!(sim.len(), n * n, "similarity matrix must be n x n");
        Ok(Problem { n, sim })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    fn s(&self, i: usize, j: usize) -> f64 {
        self.sim[i * self.n + j]
    }

    /// Partition quality for arbitrary cluster ids.
    pub fn quality(&self, clusters: &[usize], resolution: f64) -> f64 {
        let mut q = 0.0;
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                if clusters[i] == clusters[j] {
                    q += self.s(i, j) - resolution;
                }
            }
        }
        q
    }
}

/// Quality of a partition of `graph`.
pub fn quality(graph: &CoocGraph, clusters: &[usize], resolution: f64) -> Result<f64> {
    Ok(Problem::new(graph)?.quality(clusters, resolution))
}

/// Renumbers clusters 1.. by decreasing size, ties by the smallest member.
pub fn canonical_labels(clusters: &[usize]) -> Vec<usize> {
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot: alloc::collections::BTreeMap<usize, usize> = alloc::collections::BTreeMap::new();
    for (node, &c) in clusters.iter().enumerate() {
        let g = *slot.entry(c).or_insert_with(|| {
            groups.push(Vec::new());
            groups.len() - 1
        });
        groups[g].push(node);
    }
    // Members are pushed in node order, so each group is sorted.
    groups.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
    let mut labels = vec![0; clusters.len()];
    for (k, g) in groups.iter().enumerate() {
        for &node in g {
            labels[node] = k + 1;
        }
    }
    labels
}

/// Nodes of an aggregated problem: `weight` counts the original nodes and
/// `sim` sums their pairwise similarities.
struct Level {
    n: usize,
    weight: Vec<f64>,
    sim: Vec<f64>,
}

impl Level {
    fn base(p: &Problem) -> Self {
        Level { n: p.n, weight: vec![1.0; p.n], sim: p.sim.clone() }
    }

    fn aggregate(&self, cluster: &[usize], k: usize) -> Self {
        let mut weight = vec![0.0; k];
        let mut sim = vec![0.0; k * k];
        for i in 0..self.n {
            weight[cluster[i]] += self.weight[i];
            for j in 0..self.n {
                if i != j && cluster[i] != cluster[j] {
                    sim[cluster[i] * k + cluster[j]] += self.sim[i * self.n + j];
                }
            }
        }
        Level { n: k, weight, sim }
    }
}

/// Local moving sweeps from singletons. Returns cluster ids (not canonical)
/// and the number of sweeps run.
fn local_moving_level(lv: &Level, resolution: f64, iterations: usize, rng: &mut ChaCha8Rng) -> (Vec<usize>, usize) {
    local_moving_from(lv, (0..lv.n).collect(), resolution, iterations, rng)
}

/// Local moving from a given assignment; ids must be below `lv.n`.
fn local_moving_from(lv: &Level, mut cluster: Vec<usize>, resolution: f64, iterations: usize, rng: &mut ChaCha8Rng) -> (Vec<usize>, usize) {
    let n = lv.n;
    let mut members = vec![0usize; n];
    for &c in &cluster {
        members[c] += 1;
    }
    let mut order: Vec<usize> = (0..n).collect();
    let mut gain = vec![0.0f64; n];
    let mut touched: Vec<usize> = Vec::with_capacity(n);
    let mut is_touched = vec![false; n];
    let mut sweeps = 0;
    for _ in 0..iterations {
        sweeps += 1;
        order.shuffle(rng);
        let mut moved = false;
        for &i in &order {
            let current = cluster[i];
            for j in 0..n {
                if j == i {
                    continue;
                }
                let c = cluster[j];
                if !is_touched[c] {
                    is_touched[c] = true;
                    touched.push(c);
                    gain[c] = 0.0;
                }
                gain[c] += lv.sim[i * n + j] - resolution * lv.weight[i] * lv.weight[j];
            }
            let stay = if is_touched[current] { gain[current] } else { 0.0 };
            let mut best = current;
            let mut best_val = stay;
            touched.sort_unstable();
            for &c in &touched {
                if c != current && gain[c] > best_val {
                    best = c;
                    best_val = gain[c];
                }
            }
            if members[current] > 1 && 0.0 > best_val {
                best = members.iter().position(|&s| s == 0).expect("a free cluster id exists");
                best_val = 0.0;
            }
            for &c in &touched {
                is_touched[c] = false;
            }
            touched.clear();
            if best != current && best_val > stay {
                members[current] -= 1;
                members[best] += 1;
                cluster[i] = best;
                moved = true;
            }
        }
        if !moved {
            break;
        }
    }
    (cluster, sweeps)
}

#[cfg(test)]
fn local_moving(p: &Problem, resolution: f64, iterations: usize, rng: &mut ChaCha8Rng) -> (Vec<usize>, usize) {
    local_moving_level(&Level::base(p), resolution, iterations, rng)
}

/// Local moving followed by aggregation: clusters found at one level become
/// the nodes of the next, until a level moves nothing.
fn multilevel(p: &Problem, resolution: f64, iterations: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut assignment: Vec<usize> = (0..p.n).collect();
    let mut level = Level::base(p);
    loop {
        let (ids, _) = local_moving_level(&level, resolution, iterations, rng);
        let mut dense = vec![usize::MAX; level.n];
        let mut k = 0;
        for &c in &ids {
            if dense[c] == usize::MAX {
                dense[c] = k;
                k += 1;
            }
        }
        let ids: Vec<usize> = ids.iter().map(|&c| dense[c]).collect();
        for a in assignment.iter_mut() {
            *a = ids[*a];
        }
        if k == level.n || k == 1 {
            return assignment;
        }
        level = level.aggregate(&ids, k);
    }
}

/// Tries every single-node move, including ones that lower the quality,
/// reruns local moving from it and keeps the result when the quality
/// strictly rises. This escapes local optima that are one move away from a
/// better basin.
fn perturb_single_moves(p: &Problem, mut cluster: Vec<usize>, resolution: f64, iterations: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let n = p.n;
    let lv = Level::base(p);
    let mut q = p.quality(&cluster, resolution);
    let mut order: Vec<usize> = (0..n).collect();
    for _ in 0..iterations {
        order.shuffle(rng);
        let mut improved = false;
        'nodes: for &i in &order {
            let current = cluster[i];
            let mut present = vec![false; n];
            for (j, &c) in cluster.iter().enumerate() {
                if j != i {
                    present[c] = true;
                }
            }
            let free = (0..n).find(|&c| !present[c]);
            for c in 0..n {
                if c == current || !(present[c] || Some(c) == free) || (!present[current] && !present[c]) {
                    continue;
                }
                let mut trial = cluster.clone();
                trial[i] = c;
                let (trial, _) = local_moving_from(&lv, trial, resolution, iterations, rng);
                let tq = p.quality(&trial, resolution);
                if tq > q {
                    cluster = trial;
                    q = tq;
                    improved = true;
                    break 'nodes;
                }
            }
        }
        if !improved {
            break;
        }
    }
    cluster
}

/// Merges clusters smaller than `min_size` into the cluster they share the
/// most similarity with (ties to the lower label), smallest clusters first.
fn merge_small_clusters(p: &Problem, labels: Vec<usize>, min_size: usize) -> Vec<usize> {
    let mut labels = canonical_labels(&labels);
    loop {
        let k = labels.iter().copied().max().unwrap_or(0);
        if k <= 1 {
            return labels;
        }
        let mut sizes = vec![0usize; k + 1];
        for &l in &labels {
            sizes[l] += 1;
        }
        // Canonical order puts the smallest clusters last; prefer the lowest
        // label among the smallest.
        let Some(small) = (1..=k).filter(|&c| sizes[c] < min_size).min_by_key(|&c| (sizes[c], c)) else {
            return labels;
        };
        let mut link = vec![0.0f64; k + 1];
        for i in 0..p.n {
            if labels[i] != small {
                continue;
            }
            for j in 0..p.n {
                if labels[j] != small {
                    link[labels[j]] += p.s(i, j);
                }
            }
        }
        let mut target = 0;
        for c in 1..=k {
            if c != small && (target == 0 || link[c] > link[target]) {
                target = c;
            }
        }
        for l in labels.iter_mut() {
            if *l == small {
                *l = target;
            }
        }
        labels = canonical_labels(&labels);
    }
}

/// Runs one random start. Start `k` draws from stream `k` of the seeded
/// generator, so starts are independent of execution order.
pub fn cluster_start(p: &Problem, params: &ClusterParams, start: usize) -> ClusterAssignment {
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    rng.set_stream(start as u64);
    let ids = multilevel(p, params.resolution, params.iterations, &mut rng);
    let ids = perturb_single_moves(p, ids, params.resolution, params.iterations, &mut rng);
    let labels = if params.merge_small && params.min_cluster_size > 1 {
        merge_small_clusters(p, ids, params.min_cluster_size)
    } else {
        canonical_labels(&ids)
    };
    let quality = p.quality(&labels, params.resolution);
    ClusterAssignment { labels, quality }
}

/// Picks the best result; on equal quality the lower start index wins.
pub fn best_of(results: impl IntoIterator<Item = ClusterAssignment>) -> Option<ClusterAssignment> {
    let mut best: Option<ClusterAssignment> = None;
    for r in results {
        if best.as_ref().is_none_or(|b| r.quality > b.quality) {
            best = Some(r);
        }
    }
    best
}

/// Clusters the graph, running the random starts sequentially.
pub fn cluster(graph: &CoocGraph, params: &ClusterParams) -> Result<ClusterAssignment> {
    params.validate()?;
    let p = Problem::new(graph)?;
    Ok(cluster_problem(&p, params))
}

pub fn cluster_problem(p: &Problem, params: &ClusterParams) -> ClusterAssignment {
    best_of((0..params.random_starts).map(|s| cluster_start(p, params, s))).expect("at least one start")
}

/// Outcome of a resolution search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tuned {
    pub resolution: f64,
    pub assignment: ClusterAssignment,
    /// Every probe as `(resolution, cluster count)`, in probe order.
    pub probes: Vec<(f64, usize)>,
}

/// Searches `range` for a resolution giving `target` clusters, using bisection
/// (cluster counts grow with the resolution). Returns the first resolution
/// hitting the target, otherwise the one minimizing `|count - target|` with
/// ties to the smaller resolution. The upper bound counts as a hit only when
/// no interior probe hits. `run` clusters at a given resolution.
pub fn tune_with<F>(target: usize, range: (f64, f64), max_probes: usize, mut run: F) -> Result<Tuned>
where
    F: FnMut(f64) -> ClusterAssignment,
{
    let (lo, hi) = range;
    if !(lo.is_finite() && hi.is_finite() && lo >= 0.0 && lo <= hi) {
        return Err(Error::EmptyRange(lo, hi));
    }
    if target == 0 {
        return Err(Error::InvalidParameter("target cluster count must be >= 1".into()));
    }
    let mut probes = Vec::new();
    let mut best: Option<(usize, f64, ClusterAssignment)> = None;
    let mut probe = |gamma: f64, probes: &mut Vec<(f64, usize)>| -> (usize, bool) {
        let a = run(gamma);
        let count = a.n_clusters();
        probes.push((gamma, count));
        let miss = count.abs_diff(target);
        let better = match &best {
            None => true,
            Some((m, g, _)) => miss < *m || (miss == *m && gamma < *g),
        };
        if better {
            best = Some((miss, gamma, a));
        }
        (count, miss == 0)
    };
    let max_probes = max_probes.max(1);
    let (lo_count, hit) = probe(lo, &mut probes);
    if hit || max_probes == 1 || lo == hi || lo_count > target {
        return Ok(finish(best, probes));
    }
    // A hit at the upper bound is only a fallback: there merging usually
    // rebuilds clusters out of singletons, so keep looking inside the range.
    let (hi_count, _) = probe(hi, &mut probes);
    if hi_count < target {
        log::warn!("no resolution in [{lo}, {hi}] yields {target} clusters (max {hi_count})");
        return Ok(finish(best, probes));
    }
    let (mut a, mut b) = (lo, hi);
    while probes.len() < max_probes {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        let (count, hit) = probe(mid, &mut probes);
        if hit {
            break;
        }
        if count < target {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(finish(best, probes))
}

fn finish(best: Option<(usize, f64, ClusterAssignment)>, probes: Vec<(f64, usize)>) -> Tuned {
    let (_, resolution, assignment) = best.expect("at least one probe ran");
    Tuned { resolution, assignment, probes }
}

/// Tunes the resolution of [`cluster`] toward `target` clusters. The
/// resolution in `params` is ignored.
pub fn tune_resolution(
    graph: &CoocGraph,
    target: usize,
    params: &ClusterParams,
    range: (f64, f64),
    max_probes: usize,
) -> Result<Tuned> {
    let p = Problem::new(graph)?;
    if target > p.len() {
        log::warn!("target of {target} clusters exceeds the {} nodes", p.len());
    }
    let mut params = params.clone();
    params.resolution = range.0.max(0.0);
    params.validate()?;
    tune_with(target, range, max_probes, |gamma| {
        let params = ClusterParams { resolution: gamma, ..params.clone() };
        cluster_problem(&p, &params)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::format;
    use alloc::string::String;
    use rand::Rng;

    fn graph(n: usize, edges: &[(usize, usize, f64)]) -> CoocGraph {
        let labels: Vec<String> = (0..n).map(|i| format!("n{i}")).collect();
        CoocGraph::from_similarities(labels, edges.iter().copied()).unwrap()
    }

    fn two_cliques() -> CoocGraph {
        let mut e = Vec::new();
        for base in [0, 4] {
            for i in 0..4 {
                for j in (i + 1)..4 {
                    e.push((base + i, base + j, 1.0));
                }
            }
        }
        e.push((3, 4, 0.1));
        graph(8, &e)
    }

    /// Maximum quality over all set partitions (restricted growth strings).
    fn exhaustive_best(sim: &[f64], n: usize, gamma: f64) -> f64 {
        fn rec(i: usize, n: usize, rgs: &mut Vec<usize>, max: usize, sim: &[f64], gamma: f64, best: &mut f64) {
            if i == n {
                let mut q = 0.0;
                for a in 0..n {
                    for b in (a + 1)..n {
                        if rgs[a] == rgs[b] {
                            q += sim[a * n + b] - gamma;
                        }
                    }
                }
                if q > *best {
                    *best = q;
                }
                return;
            }
            for c in 0..=max + 1 {
                rgs[i] = c;
                rec(i + 1, n, rgs, max.max(c), sim, gamma, best);
            }
        }
        let mut rgs = vec![0; n];
        let mut best = f64::NEG_INFINITY;
        if n == 1 {
            return 0.0;
        }
        rgs[0] = 0;
        rec(1, n, &mut rgs, 0, sim, gamma, &mut best);
        best
    }

    #[test]
    fn two_cliques_split_at_the_bridge() {
        let g = two_cliques();
        let params = ClusterParams { resolution: 0.05, min_cluster_size: 2, ..ClusterParams::default() };
        let a = cluster(&g, &params).unwrap();
        assert_eq!(a.labels, vec![1, 1, 1, 1, 2, 2, 2, 2]);
        let best = exhaustive_best(&g.similarity_matrix(), 8, 0.05);
        assert_eq!(a.quality, best);
    }

    #[test]
    fn high_resolution_gives_singletons() {
        let g = two_cliques();
        let params = ClusterParams { resolution: 1.5, merge_small: false, min_cluster_size: 1, ..ClusterParams::default() };
        let a = cluster(&g, &params).unwrap();
        assert_eq!(a.n_clusters(), 8);
        assert_eq!(a.quality, 0.0);
    }

    #[test]
    fn single_node() {
        let a = cluster(&graph(1, &[]), &ClusterParams::default()).unwrap();
        assert_eq!((a.labels.clone(), a.quality), (vec![1], 0.0));
        assert_eq!(cluster(&graph(0, &[]), &ClusterParams::default()), Err(Error::EmptyGraph));
    }

    #[test]
    fn canonical_labels_order_by_size_then_member() {
        assert_eq!(canonical_labels(&[7, 3, 3, 9, 7, 5]), vec![1, 2, 2, 3, 1, 4]);
    }

    #[test]
    fn small_clusters_merge_into_most_similar() {
        // Node 4 hangs off the first triangle, node 5 off nothing.
        let g = graph(6, &[(0, 1, 1.0), (0, 2, 1.0), (1, 2, 1.0), (3, 4, 0.2), (0, 3, 0.3)]);
        let p = Problem::new(&g).unwrap();
        let merged = merge_small_clusters(&p, vec![0, 0, 0, 1, 1, 2], 3);
        assert_eq!(merged, vec![1, 1, 1, 1, 1, 1]);
        let merged = merge_small_clusters(&p, vec![0, 0, 0, 1, 1, 2], 2);
        // Singleton 5 has no links; it joins the lowest label.
        assert_eq!(merged, vec![1, 1, 1, 2, 2, 1]);
    }

    #[test]
    fn local_moves_never_decrease_quality_and_respect_sweep_cap() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let n = rng.random_range(2..15);
            let mut e = Vec::new();
            for i in 0..n {
                for j in (i + 1)..n {
                    if rng.random_bool(0.4) {
                        e.push((i, j, rng.random_range(1..=32) as f64 / 32.0));
                    }
                }
            }
            let g = graph(n, &e);
            let p = Problem::new(&g).unwrap();
            let (ids, sweeps) = local_moving(&p, 0.25, 3, &mut ChaCha8Rng::seed_from_u64(1));
            assert!(sweeps <= 3);
            assert!(p.quality(&ids, 0.25) >= 0.0);
        }
    }

    #[test]
    fn deterministic_for_seed() {
        let g = two_cliques();
        let params = ClusterParams { resolution: 0.3, seed: 42, ..ClusterParams::default() };
        assert_eq!(cluster(&g, &params), cluster(&g, &params));
    }

    #[test]
    fn tuning_finds_target_on_plateau() {
        // Four 4-cliques in a ring joined by weak edges.
        let mut e = Vec::new();
        for k in 0..4 {
            let b = 4 * k;
            for i in 0..4 {
                for j in (i + 1)..4 {
                    e.push((b + i, b + j, 0.9));
                }
            }
            e.push((b + 3, (b + 4) % 16, 0.1));
        }
        let g = graph(16, &e);
        let params = ClusterParams { min_cluster_size: 2, ..ClusterParams::default() };
        let t = tune_resolution(&g, 4, &params, (0.0, 1.0), 30).unwrap();
        assert_eq!(t.assignment.n_clusters(), 4);
        let again = cluster(&g, &ClusterParams { resolution: t.resolution, ..params.clone() }).unwrap();
        assert_eq!(again.n_clusters(), 4);

        let t1 = tune_resolution(&g, 1, &params, (0.0, 1.0), 30).unwrap();
        assert_eq!(t1.assignment.n_clusters(), 1);
        assert_eq!(t1.resolution, 0.0);

        let params = ClusterParams { merge_small: false, ..ClusterParams::default() };
        let many = tune_resolution(&g, 40, &params, (0.0, 1.0), 30).unwrap();
        assert_eq!(many.assignment.n_clusters(), 16);
        assert!(matches!(tune_resolution(&g, 4, &params, (1.0, 0.5), 30), Err(Error::EmptyRange(..))));
    }

    #[test]
    fn upper_bound_hit_is_only_a_fallback() {
        // Count rises 1 -> 10 across the range but dips back to 4 at the top.
        let count = |g: f64| if g >= 1.0 { 4 } else { 1 + libm::floor(g * 10.0) as usize };
        let fake = |g: f64| ClusterAssignment { labels: (1..=count(g)).collect(), quality: 0.0 };
        let t = tune_with(4, (0.0, 1.0), 30, fake).unwrap();
        assert_eq!(t.assignment.n_clusters(), 4);
        assert!(t.resolution < 1.0, "settled on {}", t.resolution);
        assert_eq!(t.probes[1], (1.0, 4));

        // Nothing inside hits: the upper bound is kept.
        let fake = |g: f64| ClusterAssignment { labels: (1..=if g >= 1.0 { 4 } else { 1 }).collect(), quality: 0.0 };
        let t = tune_with(4, (0.0, 1.0), 10, fake).unwrap();
        assert_eq!((t.resolution, t.assignment.n_clusters()), (1.0, 4));
    }
}
