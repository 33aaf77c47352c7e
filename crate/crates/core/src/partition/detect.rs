//! Multi-level greedy modularity maximization.
//!
//! Each level repeatedly moves single nodes to the neighboring community with
//! the best modularity gain, then collapses communities into super-nodes and
//! starts over on the smaller graph. After the last level every community is
//! split into its connected components, so the result never contains an
//! internally disconnected community.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::Partition;
use crate::graph::Graph;

#[derive(Debug, Clone, Copy)]
pub struct DetectConfig {
    pub seed: u64,
    pub max_levels: usize,
    /// Smallest modularity gain that justifies moving a node.
    pub min_gain: f64,
}

impl Default for DetectConfig {
    fn default() -> Self {
        DetectConfig {
            seed: 0,
            max_levels: 32,
            min_gain: 1e-9,
        }
    }
}

impl DetectConfig {
    pub fn with_seed(seed: u64) -> Self {
        DetectConfig {
            seed,
            ..Self::default()
        }
    }
}

/// Weighted graph that allows self-loops, used for the aggregated levels.
struct LevelGraph {
    adj: Vec<Vec<(usize, f64)>>,
    /// Weight of edges collapsed inside each super-node, counted once.
    self_loops: Vec<f64>,
    degrees: Vec<f64>,
}

impl LevelGraph {
    fn from_graph(g: &Graph) -> Self {
        let n = g.node_count();
        let adj: Vec<Vec<(usize, f64)>> = (0..n).map(|i| g.neighbors(i).collect()).collect();
        LevelGraph {
            adj,
            self_loops: vec![0.0; n],
            degrees: g.degrees().to_vec(),
        }
    }

    fn len(&self) -> usize {
        self.adj.len()
    }

    fn aggregate(&self, community: &[usize], count: usize) -> LevelGraph {
        let mut self_loops = vec![0.0; count];
        let mut degrees = vec![0.0; count];
        let mut rows: Vec<std::collections::BTreeMap<usize, f64>> = vec![Default::default(); count];
        for u in 0..self.len() {
            let cu = community[u];
            self_loops[cu] += self.self_loops[u];
            degrees[cu] += self.degrees[u];
            for &(v, w) in &self.adj[u] {
                let cv = community[v];
                if cu == cv {
                    // each internal edge is seen from both ends
                    self_loops[cu] += w / 2.0;
                } else {
                    *rows[cu].entry(cv).or_insert(0.0) += w;
                }
            }
        }
        LevelGraph {
            adj: rows.into_iter().map(|r| r.into_iter().collect()).collect(),
            self_loops,
            degrees,
        }
    }
}

/// Runs local moving until no node moves. Returns true if anything moved.
fn local_moves(lg: &LevelGraph, community: &mut [usize], m2: f64, cfg: &DetectConfig, rng: &mut ChaCha8Rng) -> bool {
    let n = lg.len();
    let mut tot = vec![0.0; n];
    for u in 0..n {
        tot[community[u]] += lg.degrees[u];
    }
    let mut order: Vec<usize> = (0..n).collect();
    let mut links = vec![0.0f64; n];
    let mut touched: Vec<usize> = Vec::new();
    let m = m2 / 2.0;
    let mut any_moved = false;
    loop {
        order.shuffle(rng);
        let mut moved = 0usize;
        for &u in &order {
            let k = lg.degrees[u];
            let own = community[u];
            for &(v, w) in &lg.adj[u] {
                let c = community[v];
                if links[c] == 0.0 {
                    touched.push(c);
                }
                links[c] += w;
            }
            tot[own] -= k;
            let gain = |c: usize, links: &[f64]| links[c] - tot[c] * k / m2;
            let stay = gain(own, &links);
            let mut best = own;
            let mut best_gain = stay;
            touched.sort_unstable();
            for &c in &touched {
                if c == own {
                    continue;
                }
                let g = gain(c, &links);
                if (g - stay) / m > cfg.min_gain && (g > best_gain || (g == best_gain && c < best)) {
                    best = c;
                    best_gain = g;
                }
            }
            tot[best] += k;
            if best != own {
                community[u] = best;
                moved += 1;
            }
            for &c in &touched {
                links[c] = 0.0;
            }
            touched.clear();
        }
        if moved == 0 {
            break;
        }
        any_moved = true;
    }
    any_moved
}

/// Renumbers labels to `0..count` in order of first appearance.
fn renumber(community: &mut [usize]) -> usize {
    let mut map = vec![usize::MAX; community.len()];
    let mut next = 0;
    for c in community.iter_mut() {
        if map[*c] == usize::MAX {
            map[*c] = next;
            next += 1;
        }
        *c = map[*c];
    }
    next
}

/// Splits every community into its connected components.
fn split_disconnected(g: &Graph, labels: &[usize]) -> Vec<usize> {
    let n = g.node_count();
    let mut out = vec![usize::MAX; n];
    let mut next = 0;
    let mut stack = Vec::new();
    for s in 0..n {
        if out[s] != usize::MAX {
            continue;
        }
        out[s] = next;
        stack.push(s);
        while let Some(u) = stack.pop() {
            for (v, _) in g.neighbors(u) {
                if out[v] == usize::MAX && labels[v] == labels[u] {
                    out[v] = next;
                    stack.push(v);
                }
            }
        }
        next += 1;
    }
    out
}

/// Detects communities with multi-level greedy modularity maximization and
/// a final connectivity split. Deterministic for a fixed seed.
pub fn detect_communities(g: &Graph, cfg: &DetectConfig) -> Partition {
    let n = g.node_count();
    let m2 = 2.0 * g.total_weight();
    if n == 0 || m2 == 0.0 {
        return Partition::singletons(n);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut level = LevelGraph::from_graph(g);
    // node_to_super[i] is the super-node that original node i lives in
    let mut node_to_super: Vec<usize> = (0..n).collect();
    for _ in 0..cfg.max_levels {
        let mut community: Vec<usize> = (0..level.len()).collect();
        let moved = local_moves(&level, &mut community, m2, cfg, &mut rng);
        let count = renumber(&mut community);
        for s in node_to_super.iter_mut() {
            *s = community[*s];
        }
        if !moved || count == level.len() {
            break;
        }
        level = level.aggregate(&community, count);
    }
    let split = split_disconnected(g, &node_to_super);
    Partition::from_labels(&split)
}
