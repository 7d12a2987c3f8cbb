//! Kamada-Kawai spring layout.
//!
//! Ideal distances are shortest-path lengths over edge lengths `1/s_ij`, so
//! strongly similar terms sit close together. The energy
//! `E = sum_{i<j} 1/2 k_ij (d_ij - L l_ij)^2` with `k_ij = 1/l_ij^2` is
//! minimized one node at a time: the node with the largest gradient norm
//! takes 2-D Newton steps. A step that would raise the energy falls back to
//! gradient descent with backtracking, so the energy never increases.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::network::CoocGraph;
use crate::{Error, Result};

const MAX_HALVINGS: usize = 30;
const MAX_NEWTON_STEPS: usize = 50;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayoutOptions {
    /// Scale constant `L` mapping graph distance to drawing distance.
    pub scale: f64,
    /// Cap on node moves.
    pub max_iterations: usize,
    /// Stop once every node's gradient norm is below this.
    pub tolerance: f64,
    pub seed: u64,
    /// Lay out connected components separately and pack them on a grid.
    pub per_component: bool,
}

impl Default for LayoutOptions {
    fn default() -> Self {
        LayoutOptions { scale: 1.0, max_iterations: 100_000, tolerance: 1e-6, seed: 0, per_component: true }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layout {
    pub positions: Vec<[f64; 2]>,
    /// Sum of the per-component energies at return.
    pub energy: f64,
    pub initial_energy: f64,
    pub iterations: usize,
}

/// All-pairs shortest paths (Floyd-Warshall) with edge length `1/s`.
/// Unreachable pairs are `f64::INFINITY`.
pub fn graph_distances(graph: &CoocGraph) -> Vec<f64> {
    let n = graph.len();
    let mut d = vec![f64::INFINITY; n * n];
    for i in 0..n {
        d[i * n + i] = 0.0;
    }
    for e in &graph.edges {
        if e.similarity > 0.0 {
            let len = 1.0 / e.similarity;
            let (a, b) = (e.source, e.target);
            if len < d[a * n + b] {
                d[a * n + b] = len;
                d[b * n + a] = len;
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            let dik = d[i * n + k];
            if dik == f64::INFINITY {
                continue;
            }
            for j in 0..n {
                let via = dik + d[k * n + j];
                if via < d[i * n + j] {
                    d[i * n + j] = via;
                }
            }
        }
    }
    d
}

/// Spring system of one connected graph.
#[derive(Debug, Clone)]
pub struct KkSystem {
    n: usize,
    /// Target drawing distance `L * l_ij`.
    ideal: Vec<f64>,
    /// Spring strength `1 / l_ij^2`.
    strength: Vec<f64>,
}

impl KkSystem {
    /// Builds the system for a connected graph.
    pub fn new(graph: &CoocGraph, scale: f64) -> Result<Self> {
        if graph.is_empty() {
            return Err(Error::EmptyGraph);
        }
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::InvalidParameter("layout scale must be positive".into()));
        }
        let comps = graph.components();
        if comps.len() > 1 {
            return Err(Error::Disconnected(comps));
        }
        let n = graph.len();
        let dist = graph_distances(graph);
        let mut ideal = vec![0.0; n * n];
        let mut strength = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    let l = dist[i * n + j];
                    ideal[i * n + j] = scale * l;
                    strength[i * n + j] = 1.0 / (l * l);
                }
            }
        }
        Ok(KkSystem { n, ideal, strength })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn energy(&self, pos: &[[f64; 2]]) -> f64 {
        let mut e = 0.0;
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                let d = dist(pos[i], pos[j]);
                let diff = d - self.ideal[i * self.n + j];
                e += 0.5 * self.strength[i * self.n + j] * diff * diff;
            }
        }
        e
    }

    /// Energy of the springs attached to node `m` with `m` placed at `at`.
    fn node_energy(&self, pos: &[[f64; 2]], m: usize, at: [f64; 2]) -> f64 {
        let mut e = 0.0;
        for i in 0..self.n {
            if i != m {
                let diff = dist(at, pos[i]) - self.ideal[m * self.n + i];
                e += 0.5 * self.strength[m * self.n + i] * diff * diff;
            }
        }
        e
    }

    /// Contribution of the spring `(m, i)` to the gradient at `m`.
    fn pair_gradient(&self, pm: [f64; 2], pi: [f64; 2], m: usize, i: usize) -> [f64; 2] {
        let dx = pm[0] - pi[0];
        let dy = pm[1] - pi[1];
        let d = libm::sqrt(dx * dx + dy * dy);
        if d == 0.0 {
            return [0.0, 0.0];
        }
        let k = self.strength[m * self.n + i];
        let f = k * (1.0 - self.ideal[m * self.n + i] / d);
        [f * dx, f * dy]
    }

    /// Partial derivatives of the energy with respect to node `m`.
    pub fn node_gradient(&self, pos: &[[f64; 2]], m: usize) -> [f64; 2] {
        let mut g = [0.0, 0.0];
        for i in 0..self.n {
            if i != m {
                let p = self.pair_gradient(pos[m], pos[i], m, i);
                g[0] += p[0];
                g[1] += p[1];
            }
        }
        g
    }

    /// Full gradient, laid out as `[dE/dx_0, dE/dy_0, dE/dx_1, ...]`.
    pub fn gradient(&self, pos: &[[f64; 2]]) -> Vec<f64> {
        (0..self.n).flat_map(|m| self.node_gradient(pos, m)).collect()
    }

    /// 2x2 Hessian block of node `m`: `[xx, xy, yy]`.
    pub fn node_hessian(&self, pos: &[[f64; 2]], m: usize) -> [f64; 3] {
        let mut h = [0.0; 3];
        for i in 0..self.n {
            if i == m {
                continue;
            }
            let dx = pos[m][0] - pos[i][0];
            let dy = pos[m][1] - pos[i][1];
            let d2 = dx * dx + dy * dy;
            if d2 == 0.0 {
                continue;
            }
            let d3 = d2 * libm::sqrt(d2);
            let k = self.strength[m * self.n + i];
            let l = self.ideal[m * self.n + i];
            h[0] += k * (1.0 - l * dy * dy / d3);
            h[1] += k * l * dx * dy / d3;
            h[2] += k * (1.0 - l * dx * dx / d3);
        }
        h
    }

    /// Minimizes the energy from `pos`. Returns the number of node moves.
    pub fn minimize(&self, pos: &mut [[f64; 2]], tolerance: f64, max_iterations: usize) -> usize {
        let n = self.n;
        if n < 2 {
            return 0;
        }
        let mut grad: Vec<[f64; 2]> = (0..n).map(|m| self.node_gradient(pos, m)).collect();
        let mut stuck = vec![false; n];
        let mut moves = 0;
        while moves < max_iterations {
            let mut m = usize::MAX;
            let mut best = tolerance;
            for (i, g) in grad.iter().enumerate() {
                let norm = libm::hypot(g[0], g[1]);
                if !stuck[i] && norm >= best {
                    best = norm;
                    m = i;
                }
            }
            if m == usize::MAX {
                break;
            }
            let mut inner = 0;
            loop {
                let old = pos[m];
                let Some(new) = self.improve(pos, m, grad[m]) else {
                    stuck[m] = true;
                    break;
                };
                pos[m] = new;
                moves += 1;
                inner += 1;
                stuck.iter_mut().for_each(|s| *s = false);
                for i in 0..n {
                    if i != m {
                        let before = self.pair_gradient(pos[i], old, i, m);
                        let after = self.pair_gradient(pos[i], new, i, m);
                        grad[i][0] += after[0] - before[0];
                        grad[i][1] += after[1] - before[1];
                    }
                }
                grad[m] = self.node_gradient(pos, m);
                if libm::hypot(grad[m][0], grad[m][1]) < tolerance || inner >= MAX_NEWTON_STEPS || moves >= max_iterations {
                    break;
                }
            }
        }
        moves
    }

    /// One safeguarded step for node `m`; `None` when no decrease was found.
    fn improve(&self, pos: &[[f64; 2]], m: usize, g: [f64; 2]) -> Option<[f64; 2]> {
        let p = pos[m];
        let e0 = self.node_energy(pos, m, p);
        let [hxx, hxy, hyy] = self.node_hessian(pos, m);
        let det = hxx * hyy - hxy * hxy;
        let scale = libm::fabs(hxx) + libm::fabs(hyy);
        if det > 1e-12 * scale * scale && hxx > 0.0 {
            let dx = (-g[0] * hyy + g[1] * hxy) / det;
            let dy = (g[0] * hxy - g[1] * hxx) / det;
            let cand = [p[0] + dx, p[1] + dy];
            if cand[0].is_finite() && cand[1].is_finite() && self.node_energy(pos, m, cand) < e0 {
                return Some(cand);
            }
        }
        let ksum: f64 = (0..self.n).filter(|&i| i != m).map(|i| self.strength[m * self.n + i]).sum();
        let mut step = 1.0 / ksum.max(1e-12);
        for _ in 0..MAX_HALVINGS {
            let cand = [p[0] - step * g[0], p[1] - step * g[1]];
            if self.node_energy(pos, m, cand) < e0 {
                return Some(cand);
            }
            step *= 0.5;
        }
        None
    }
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    libm::hypot(a[0] - b[0], a[1] - b[1])
}

/// Seeded placement on the unit circle: node `perm[k]` sits at angle `2 pi k / n`.
pub fn initial_positions(n: usize, seed: u64) -> Vec<[f64; 2]> {
    if n == 1 {
        return vec![[0.0, 0.0]];
    }
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut pos = vec![[0.0, 0.0]; n];
    for (k, &node) in perm.iter().enumerate() {
        let a = 2.0 * PI * k as f64 / n as f64;
        pos[node] = [libm::cos(a), libm::sin(a)];
    }
    pos
}

fn subgraph(graph: &CoocGraph, members: &[usize]) -> CoocGraph {
    let mut index = vec![usize::MAX; graph.len()];
    for (k, &m) in members.iter().enumerate() {
        index[m] = k;
    }
    let nodes = members.iter().map(|&m| graph.nodes[m].clone()).collect();
    let edges = graph
        .edges
        .iter()
        .filter(|e| index[e.source] != usize::MAX && index[e.target] != usize::MAX)
        .map(|e| crate::network::Edge { source: index[e.source], target: index[e.target], ..*e })
        .collect();
    CoocGraph { nodes, edges }
}

/// Lays out a graph. Disconnected graphs need `per_component`; components
/// are then packed on a grid, largest first.
pub fn layout_kk(graph: &CoocGraph, options: &LayoutOptions) -> Result<Layout> {
    if graph.is_empty() {
        return Err(Error::EmptyGraph);
    }
    if !(options.tolerance > 0.0) {
        return Err(Error::InvalidParameter("layout tolerance must be positive".into()));
    }
    let comps = graph.components();
    if comps.len() > 1 && !options.per_component {
        return Err(Error::Disconnected(comps));
    }
    let mut parts = Vec::with_capacity(comps.len());
    for members in &comps {
        let sub = subgraph(graph, members);
        let system = KkSystem::new(&sub, options.scale)?;
        let mut pos = initial_positions(sub.len(), options.seed);
        let initial = system.energy(&pos);
        let iterations = system.minimize(&mut pos, options.tolerance, options.max_iterations);
        let energy = system.energy(&pos);
        parts.push((pos, initial, energy, iterations));
    }

    let mut positions = vec![[0.0, 0.0]; graph.len()];
    let (mut energy, mut initial_energy, mut iterations) = (0.0, 0.0, 0);
    if parts.len() == 1 {
        let (pos, init, e, it) = parts.pop().expect("one component");
        for (k, &m) in comps[0].iter().enumerate() {
            positions[m] = pos[k];
        }
        return Ok(Layout { positions, energy: e, initial_energy: init, iterations: it });
    }

    let cell = parts
        .iter()
        .map(|(pos, ..)| {
            let (lo, hi) = bbox(pos);
            (hi[0] - lo[0]).max(hi[1] - lo[1])
        })
        .fold(0.0f64, f64::max)
        + options.scale;
    let cols = libm::ceil(libm::sqrt(parts.len() as f64)) as usize;
    for (c, ((pos, init, e, it), members)) in parts.iter().zip(&comps).enumerate() {
        let (lo, hi) = bbox(pos);
        let center = [(lo[0] + hi[0]) / 2.0, (lo[1] + hi[1]) / 2.0];
        let origin = [(c % cols) as f64 * cell, -((c / cols) as f64) * cell];
        for (k, &m) in members.iter().enumerate() {
            positions[m] = [pos[k][0] - center[0] + origin[0], pos[k][1] - center[1] + origin[1]];
        }
        energy += e;
        initial_energy += init;
        iterations += it;
    }
    Ok(Layout { positions, energy, initial_energy, iterations })
}

fn bbox(pos: &[[f64; 2]]) -> ([f64; 2], [f64; 2]) {
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for p in pos {
        for a in 0..2 {
            lo[a] = lo[a].min(p[a]);
            hi[a] = hi[a].max(p[a]);
        }
    }
    (lo, hi)
}
