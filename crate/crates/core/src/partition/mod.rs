//! Node-to-community assignments and the per-partition statistics that the
//! modularity and centrality formulas read from.

mod detect;

use std::collections::{BTreeMap, BTreeSet};
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::numeric::NeumaierSum;

pub use detect::{detect_communities, DetectConfig};

/// Disjoint cover of `0..n` by communities with dense ids `0..C`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    community_of: Vec<usize>,
    members: Vec<Vec<usize>>,
}

impl Partition {
    /// Builds from arbitrary integer labels, compacting them to `0..C` in
    /// ascending label order.
    pub fn from_labels(labels: &[usize]) -> Self {
        let distinct: BTreeSet<usize> = labels.iter().copied().collect();
        let dense: BTreeMap<usize, usize> = distinct.into_iter().enumerate().map(|(i, l)| (l, i)).collect();
        let community_of: Vec<usize> = labels.iter().map(|l| dense[l]).collect();
        Self::from_dense(community_of, dense.len())
    }

    fn from_dense(community_of: Vec<usize>, count: usize) -> Self {
        let mut members = vec![Vec::new(); count];
        for (node, &c) in community_of.iter().enumerate() {
            members[c].push(node);
        }
        Partition {
            community_of,
            members,
        }
    }

    /// Every node in community 0.
    pub fn single(n: usize) -> Self {
        Self::from_dense(vec![0; n], usize::from(n > 0))
    }

    /// Every node in its own community.
    pub fn singletons(n: usize) -> Self {
        Self::from_dense((0..n).collect(), n)
    }

    pub fn len(&self) -> usize {
        self.community_of.len()
    }

    pub fn is_empty(&self) -> bool {
        self.community_of.is_empty()
    }

    pub fn community_count(&self) -> usize {
        self.members.len()
    }

    #[inline]
    pub fn community_of(&self, node: usize) -> usize {
        self.community_of[node]
    }

    pub fn assignments(&self) -> &[usize] {
        &self.community_of
    }

    pub fn members(&self, community: usize) -> &[usize] {
        &self.members[community]
    }

    pub fn communities(&self) -> impl Iterator<Item = &[usize]> {
        self.members.iter().map(Vec::as_slice)
    }

    /// The partition induced on the nodes with `keep[i]`, renumbered the
    /// same way as [`Graph::induced`]. Communities left empty are dropped and
    /// the survivors keep their relative order.
    pub fn restrict(&self, keep: &[bool]) -> Partition {
        assert_eq!(keep.len(), self.len());
        let labels: Vec<usize> = self
            .community_of
            .iter()
            .zip(keep)
            .filter(|(_, &k)| k)
            .map(|(&c, _)| c)
            .collect();
        Self::from_labels(&labels)
    }

    pub(crate) fn check_graph(&self, g: &Graph) -> Result<()> {
        if self.len() != g.node_count() {
            return Err(Error::PartitionLength {
                expected: g.node_count(),
                got: self.len(),
            });
        }
        Ok(())
    }

    /// Writes `node_id,community_id` rows in node order.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "node_id,community_id")?;
        for (node, c) in self.community_of.iter().enumerate() {
            writeln!(out, "{node},{c}")?;
        }
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(std::io::BufWriter::new(file))
            .map_err(|e| Error::io(path, e))
    }
}

/// A loaded partition plus the original community label of each dense id.
#[derive(Debug, Clone)]
pub struct LoadedPartition {
    pub partition: Partition,
    pub community_labels: Vec<usize>,
}

/// Reads a `node_id,community_id` CSV for a graph with `n` nodes. A header
/// row is optional. Community labels are compacted in ascending order.
pub fn read_partition<R: BufRead>(reader: R, n: usize) -> Result<LoadedPartition> {
    let mut labels: Vec<Option<usize>> = vec![None; n];
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::io("<partition>", e))?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').map(str::trim).collect();
        if fields.len() != 2 {
            return Err(Error::Malformed {
                line: lineno,
                reason: format!("expected node_id,community_id; got {trimmed:?}"),
            });
        }
        let (Ok(node), Ok(comm)) = (fields[0].parse::<usize>(), fields[1].parse::<usize>()) else {
            if lineno == 1 {
                continue; // header
            }
            return Err(Error::Malformed {
                line: lineno,
                reason: format!("non-integer field in {trimmed:?}"),
            });
        };
        if node >= n {
            return Err(Error::NodeOutOfRange { node, n });
        }
        if labels[node].replace(comm).is_some() {
            return Err(Error::DuplicateNode { node, line: lineno });
        }
    }
    let missing: Vec<usize> = (0..n).filter(|&i| labels[i].is_none()).collect();
    if !missing.is_empty() {
        return Err(Error::MissingNodes(missing));
    }
    let raw: Vec<usize> = labels.into_iter().map(Option::unwrap).collect();
    let community_labels: Vec<usize> = raw.iter().copied().collect::<BTreeSet<_>>().into_iter().collect();
    Ok(LoadedPartition {
        partition: Partition::from_labels(&raw),
        community_labels,
    })
}

pub fn load_partition(path: impl AsRef<Path>, n: usize) -> Result<LoadedPartition> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_partition(BufReader::new(file), n)
}

/// Degree bookkeeping for a (graph, partition) pair.
#[derive(Debug, Clone)]
pub struct PartitionStats {
    /// Total degree `d_c` of each community.
    pub d: Vec<f64>,
    /// Weight of intra-community edges.
    pub m_internal: f64,
    pub total_weight: f64,
    pub k_internal: Vec<f64>,
    /// Weight towards foreign communities; exactly 0 for nodes without
    /// external links.
    pub k_external: Vec<f64>,
    /// Group fraction: sum over members of internal/total degree.
    pub mu: Vec<f64>,
    pub sum_d_sq: f64,
    comm_offsets: Vec<usize>,
    comm_ids: Vec<usize>,
    comm_weights: Vec<f64>,
}

impl PartitionStats {
    pub fn compute(g: &Graph, p: &Partition) -> Result<Self> {
        p.check_graph(g)?;
        let n = g.node_count();
        let c_count = p.community_count();
        let degrees = g.degrees();

        let mut d = vec![0.0; c_count];
        for (i, &k) in degrees.iter().enumerate() {
            d[p.community_of(i)] += k;
        }

        let mut k_internal = vec![0.0; n];
        let mut k_external = vec![0.0; n];
        let mut comm_offsets = Vec::with_capacity(n + 1);
        let mut comm_ids = Vec::new();
        let mut comm_weights = Vec::new();
        let mut scratch = vec![0.0f64; c_count];
        let mut touched: Vec<usize> = Vec::new();
        comm_offsets.push(0);
        for i in 0..n {
            for (j, w) in g.neighbors(i) {
                let c = p.community_of(j);
                if scratch[c] == 0.0 {
                    touched.push(c);
                }
                scratch[c] += w;
            }
            touched.sort_unstable();
            for &c in &touched {
                comm_ids.push(c);
                comm_weights.push(scratch[c]);
                scratch[c] = 0.0;
            }
            touched.clear();
            comm_offsets.push(comm_ids.len());
            let own = p.community_of(i);
            let (lo, hi) = (comm_offsets[i], comm_offsets[i + 1]);
            for pos in lo..hi {
                if comm_ids[pos] == own {
                    k_internal[i] = comm_weights[pos];
                } else {
                    k_external[i] += comm_weights[pos];
                }
            }
        }

        let mut m_internal = NeumaierSum::default();
        for &k in &k_internal {
            m_internal.add(k);
        }
        let mut mu = vec![0.0; c_count];
        for i in 0..n {
            if degrees[i] > 0.0 {
                mu[p.community_of(i)] += k_internal[i] / degrees[i];
            }
        }
        let mut sum_d_sq = NeumaierSum::default();
        for &dc in &d {
            sum_d_sq.add(dc * dc);
        }

        Ok(PartitionStats {
            d,
            m_internal: m_internal.total() / 2.0,
            total_weight: g.total_weight(),
            k_internal,
            k_external,
            mu,
            sum_d_sq: sum_d_sq.total(),
            comm_offsets,
            comm_ids,
            comm_weights,
        })
    }

    /// Edge weight from `i` into each community it touches, as
    /// `(community, k_i^c)` in ascending community order.
    pub fn community_degrees(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let (lo, hi) = (self.comm_offsets[i], self.comm_offsets[i + 1]);
        self.comm_ids[lo..hi]
            .iter()
            .copied()
            .zip(self.comm_weights[lo..hi].iter().copied())
    }

    /// `k_i^c` for a single community.
    pub fn k_comm(&self, i: usize, c: usize) -> f64 {
        let (lo, hi) = (self.comm_offsets[i], self.comm_offsets[i + 1]);
        match self.comm_ids[lo..hi].binary_search(&c) {
            Ok(pos) => self.comm_weights[lo + pos],
            Err(_) => 0.0,
        }
    }
}

/// Number of distinct communities other than the node's own among its
/// neighbors.
pub fn neighboring_communities(g: &Graph, p: &Partition, i: usize) -> Result<usize> {
    g.degree(i)?;
    let own = p.community_of(i);
    let mut seen: Vec<usize> = g
        .neighbors(i)
        .map(|(j, _)| p.community_of(j))
        .filter(|&c| c != own)
        .collect();
    seen.sort_unstable();
    seen.dedup();
    Ok(seen.len())
}
