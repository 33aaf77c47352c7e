//! Seeded synthetic benchmark networks.
//!
//! All randomness comes from ChaCha8 seeded with the configured seed, which
//! is portable across platforms. The cellular generator draws its global
//! structure (cell count, sizes, densities, cell-to-cell links) from stream 0
//! and the internal edges of cell `i` from stream `i + 1`, so changing one
//! cell's density does not perturb any other cell.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::partition::Partition;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Family {
    Cellular,
    Er,
    ScaleFree,
}

impl std::str::FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cellular" => Ok(Family::Cellular),
            "er" => Ok(Family::Er),
            "sf" | "scale-free" | "scale_free" => Ok(Family::ScaleFree),
            _ => Err(Error::InvalidParameter(format!("unknown family {s:?}"))),
        }
    }
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Family::Cellular => "cellular",
            Family::Er => "er",
            Family::ScaleFree => "sf",
        })
    }
}

/// Cellular-network distributions. Cell count is uniform on the inclusive
/// integer range; densities are uniform on the half-open real ranges.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellularParams {
    pub cells: (usize, usize),
    pub p_inner: (f64, f64),
    pub p_outer: (f64, f64),
}

impl Default for CellularParams {
    fn default() -> Self {
        CellularParams {
            cells: (10, 20),
            p_inner: (0.1, 0.25),
            p_outer: (0.0, 0.5),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorConfig {
    pub family: Family,
    pub n: usize,
    pub seed: u64,
    pub er_p: f64,
    pub sf_m: usize,
    pub sf_gamma: f64,
    pub cellular: CellularParams,
}

impl GeneratorConfig {
    pub fn new(family: Family, seed: u64) -> Self {
        GeneratorConfig {
            family,
            n: 1000,
            seed,
            er_p: 0.015,
            sf_m: 8,
            sf_gamma: 1.5,
            cellular: CellularParams::default(),
        }
    }

    pub fn cellular(seed: u64) -> Self {
        Self::new(Family::Cellular, seed)
    }

    pub fn er(seed: u64) -> Self {
        Self::new(Family::Er, seed)
    }

    pub fn scale_free(seed: u64) -> Self {
        Self::new(Family::ScaleFree, seed)
    }

    pub fn with_n(mut self, n: usize) -> Self {
        self.n = n;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if self.n < 2 {
            return bad(format!("n must be at least 2, got {}", self.n));
        }
        match self.family {
            Family::Er if !(self.er_p > 0.0 && self.er_p <= 1.0) => bad(format!("ER p must lie in (0, 1], got {}", self.er_p)),
            Family::ScaleFree if self.sf_m < 1 || self.sf_m >= self.n => {
                bad(format!("scale-free m must satisfy 1 <= m < n, got {}", self.sf_m))
            }
            Family::ScaleFree if !(self.sf_gamma > 0.0) => bad(format!("gamma must be positive, got {}", self.sf_gamma)),
            Family::Cellular => {
                let c = &self.cellular;
                let in_unit = |r: (f64, f64)| 0.0 <= r.0 && r.0 <= r.1 && r.1 <= 1.0;
                if c.cells.0 < 1 || c.cells.0 > c.cells.1 || !in_unit(c.p_inner) || !in_unit(c.p_outer) {
                    return bad(format!("invalid cellular parameters {c:?}"));
                }
                if self.n < 2 * c.cells.1 {
                    return bad(format!("n = {} is too small for up to {} cells", self.n, c.cells.1));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

/// A generated graph and, for cellular networks, its ground-truth cells.
#[derive(Debug, Clone)]
pub struct Generated {
    pub graph: Graph,
    pub partition: Option<Partition>,
}

pub fn generate(cfg: &GeneratorConfig) -> Result<Generated> {
    match cfg.family {
        Family::Cellular => {
            let (graph, partition) = generate_cellular(cfg)?;
            Ok(Generated {
                graph,
                partition: Some(partition),
            })
        }
        Family::Er => Ok(Generated {
            graph: generate_er_connected(cfg)?,
            partition: None,
        }),
        Family::ScaleFree => Ok(Generated {
            graph: generate_scale_free(cfg)?,
            partition: None,
        }),
    }
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Appends Bernoulli(p) edges among the nodes `base..base + size`.
fn er_block(rng: &mut ChaCha8Rng, base: usize, size: usize, p: f64, edges: &mut Vec<(usize, usize, f64)>) {
    for a in 0..size {
        for b in a + 1..size {
            if rng.random::<f64>() < p {
                edges.push((base + a, base + b, 1.0));
            }
        }
    }
}

/// Cell sizes with the requested total, each at least 2.
fn draw_cell_sizes(rng: &mut ChaCha8Rng, n: usize, cells: usize) -> Result<Vec<usize>> {
    let mean = n as f64 / cells as f64;
    // the second parameter is a variance
    let normal = Normal::new(mean, (cells as f64 / 5.0).sqrt())
        .map_err(|e| Error::InvalidParameter(e.to_string()))?;
    const ATTEMPTS: usize = 10_000;
    for _ in 0..ATTEMPTS {
        let mut sizes: Vec<usize> = (0..cells - 1)
            .map(|_| (normal.sample(rng).round().max(2.0)) as usize)
            .collect();
        let used: usize = sizes.iter().sum();
        if used + 2 <= n {
            sizes.push(n - used);
            return Ok(sizes);
        }
    }
    Err(Error::GeneratorExhausted {
        attempts: ATTEMPTS,
        reason: format!("could not split {n} nodes into {cells} cells of size >= 2"),
    })
}

/// Dense Erdős–Rényi cells joined by an Erdős–Rényi cell-to-cell graph;
/// each linked pair of cells gets one edge between random members.
pub fn generate_cellular(cfg: &GeneratorConfig) -> Result<(Graph, Partition)> {
    cfg.validate()?;
    let params = &cfg.cellular;
    let mut rng = rng_for(cfg.seed, 0);
    let cells = rng.random_range(params.cells.0..=params.cells.1);
    let sizes = draw_cell_sizes(&mut rng, cfg.n, cells)?;
    let densities: Vec<f64> = (0..cells)
        .map(|_| uniform(&mut rng, params.p_inner))
        .collect();
    let p_outer = uniform(&mut rng, params.p_outer);

    let mut starts = Vec::with_capacity(cells);
    let mut labels = Vec::with_capacity(cfg.n);
    let mut base = 0;
    for (c, &size) in sizes.iter().enumerate() {
        starts.push(base);
        labels.extend(std::iter::repeat_n(c, size));
        base += size;
    }

    let mut edges = Vec::new();
    for c in 0..cells {
        let mut cell_rng = rng_for(cfg.seed, c as u64 + 1);
        er_block(&mut cell_rng, starts[c], sizes[c], densities[c], &mut edges);
    }
    for a in 0..cells {
        for b in a + 1..cells {
            if rng.random::<f64>() < p_outer {
                let u = starts[a] + rng.random_range(0..sizes[a]);
                let v = starts[b] + rng.random_range(0..sizes[b]);
                edges.push((u.min(v), u.max(v), 1.0));
            }
        }
    }
    edges.sort_by_key(|e| (e.0, e.1));
    Ok((Graph::from_canonical(cfg.n, edges), Partition::from_labels(&labels)))
}

fn uniform(rng: &mut ChaCha8Rng, range: (f64, f64)) -> f64 {
    range.0 + (range.1 - range.0) * rng.random::<f64>()
}

/// One G(n, p) draw.
pub fn er_graph(n: usize, p: f64, seed: u64) -> Graph {
    let mut rng = rng_for(seed, 0);
    let mut edges = Vec::new();
    er_block(&mut rng, 0, n, p, &mut edges);
    Graph::from_canonical(n, edges)
}

/// G(n, p) redrawn until connected.
pub fn generate_er_connected(cfg: &GeneratorConfig) -> Result<Graph> {
    cfg.validate()?;
    const ATTEMPTS: usize = 10_000;
    let mut rng = rng_for(cfg.seed, 0);
    for _ in 0..ATTEMPTS {
        let mut edges = Vec::new();
        er_block(&mut rng, 0, cfg.n, cfg.er_p, &mut edges);
        let g = Graph::from_canonical(cfg.n, edges);
        if g.is_connected() {
            return Ok(g);
        }
    }
    Err(Error::GeneratorExhausted {
        attempts: ATTEMPTS,
        reason: format!("G({}, {}) never came out connected; p is likely too small", cfg.n, cfg.er_p),
    })
}

/// Growth with nonlinear preferential attachment: starting from an
/// `(m+1)`-clique, every new node links to `m` distinct existing nodes drawn
/// with probability proportional to `degree^gamma`.
pub fn generate_scale_free(cfg: &GeneratorConfig) -> Result<Graph> {
    cfg.validate()?;
    let (n, m, gamma) = (cfg.n, cfg.sf_m, cfg.sf_gamma);
    let mut rng = rng_for(cfg.seed, 0);
    let seed_size = (m + 1).min(n);
    let mut edges = Vec::with_capacity(m * n);
    let mut degree = vec![0usize; n];
    for a in 0..seed_size {
        for b in a + 1..seed_size {
            edges.push((a, b, 1.0));
        }
        degree[a] = seed_size - 1;
    }
    let mut kernel: Vec<f64> = degree[..seed_size].iter().map(|&k| (k as f64).powf(gamma)).collect();
    let mut chosen = Vec::with_capacity(m);
    for v in seed_size..n {
        chosen.clear();
        let mut weights = kernel.clone();
        for _ in 0..m {
            let total: f64 = weights.iter().sum();
            let mut target = rng.random::<f64>() * total;
            let mut pick = weights.len() - 1;
            for (u, &w) in weights.iter().enumerate() {
                if target < w {
                    pick = u;
                    break;
                }
                target -= w;
            }
            // floating leftovers can land on an excluded node
            while weights[pick] == 0.0 {
                pick -= 1;
            }
            weights[pick] = 0.0;
            chosen.push(pick);
        }
        for &u in &chosen {
            edges.push((u, v, 1.0));
            degree[u] += 1;
            kernel[u] = (degree[u] as f64).powf(gamma);
        }
        degree[v] = m;
        kernel.push((m as f64).powf(gamma));
    }
    edges.sort_by_key(|e| (e.0, e.1));
    Ok(Graph::from_canonical(n, edges))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cellular_sizes_and_cells() {
        for seed in 0..10 {
            let (g, p) = generate_cellular(&GeneratorConfig::cellular(seed)).unwrap();
            assert_eq!(g.node_count(), 1000);
            assert_eq!(p.len(), 1000);
            assert!((10..=20).contains(&p.community_count()));
            assert!(p.communities().all(|c| c.len() >= 2));
        }
    }

    #[test]
    fn cellular_without_cell_links_falls_apart_into_cells() {
        let mut cfg = GeneratorConfig::cellular(3);
        cfg.cellular.p_outer = (0.0, 0.0);
        cfg.cellular.p_inner = (0.9, 0.9);
        let (g, p) = generate_cellular(&cfg).unwrap();
        let largest_cell = p.communities().map(<[usize]>::len).max().unwrap();
        let lc = g.largest_component(&vec![false; g.node_count()]);
        assert_eq!(lc.size, largest_cell);
    }

    #[test]
    fn er_defaults_have_expected_edge_count() {
        let g = generate_er_connected(&GeneratorConfig::er(1)).unwrap();
        assert!(g.is_connected());
        let mean: f64 = 0.015 * 1000.0 * 999.0 / 2.0;
        let sd = (mean * (1.0 - 0.015)).sqrt();
        assert!((g.edge_count() as f64 - mean).abs() < 4.0 * sd, "{}", g.edge_count());
    }

    #[test]
    fn er_complete_graph() {
        let mut cfg = GeneratorConfig::er(0).with_n(20);
        cfg.er_p = 1.0;
        let g = generate_er_connected(&cfg).unwrap();
        assert_eq!(g.edge_count(), 190);
    }

    #[test]
    fn er_gives_up_on_hopeless_density() {
        let mut cfg = GeneratorConfig::er(0).with_n(50);
        cfg.er_p = 1e-6;
        assert!(matches!(
            generate_er_connected(&cfg),
            Err(Error::GeneratorExhausted { .. })
        ));
    }

    #[test]
    fn scale_free_edge_arithmetic() {
        let g = generate_scale_free(&GeneratorConfig::scale_free(5)).unwrap();
        assert_eq!(g.node_count(), 1000);
        assert_eq!(g.edge_count(), 8 * (1000 - 9) + 36);
        assert_eq!(g.total_weight(), (8 * (1000 - 9) + 36) as f64);
    }

    #[test]
    fn linear_attachment_is_heavy_tailed() {
        for seed in 0..20 {
            let mut cfg = GeneratorConfig::scale_free(seed).with_n(3000);
            cfg.sf_m = 3;
            cfg.sf_gamma = 1.0;
            let g = generate_scale_free(&cfg).unwrap();
            let max = g.degrees().iter().copied().fold(0.0, f64::max);
            assert!(max > 30.0, "seed {seed}: max degree {max}");
        }
    }

    #[test]
    fn same_seed_same_graph() {
        for cfg in [GeneratorConfig::cellular(7), GeneratorConfig::er(7), GeneratorConfig::scale_free(7)] {
            let a = generate(&cfg).unwrap();
            let b = generate(&cfg).unwrap();
            assert_eq!(a.graph, b.graph);
        }
        let a = generate(&GeneratorConfig::cellular(7)).unwrap().graph;
        let b = generate(&GeneratorConfig::cellular(8)).unwrap().graph;
        assert_ne!(a, b);
    }

    #[test]
    fn config_validation() {
        assert!(generate(&GeneratorConfig::er(0).with_n(1)).is_err());
        let mut sf = GeneratorConfig::scale_free(0).with_n(5);
        sf.sf_m = 5;
        assert!(generate(&sf).is_err());
        let mut er = GeneratorConfig::er(0);
        er.er_p = 1.5;
        assert!(generate(&er).is_err());
    }
}
