//! Immutable weighted undirected graphs in compressed adjacency form.
//!
//! Nodes are dense ids `0..n`. Every undirected edge is stored twice, once in
//! each endpoint's neighbor list, and neighbor lists are sorted by id. Self
//! loops and non-positive weights are rejected on construction and parallel
//! edges are merged by summing their weights.

use std::collections::{BTreeMap, VecDeque};
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    offsets: Vec<usize>,
    targets: Vec<usize>,
    weights: Vec<f64>,
    degrees: Vec<f64>,
    total_weight: f64,
}

/// A node together with its weighted degree and neighbor slice.
#[derive(Debug, Clone, Copy)]
pub struct NodeView<'a> {
    pub id: usize,
    pub degree: f64,
    pub neighbors: &'a [usize],
    pub weights: &'a [f64],
}

/// External labels for the compacted internal ids, indexed by internal id.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct IdMap {
    external: Vec<String>,
}

impl IdMap {
    pub fn identity(n: usize) -> Self {
        IdMap {
            external: (0..n).map(|i| i.to_string()).collect(),
        }
    }

    pub fn from_labels(external: Vec<String>) -> Self {
        IdMap { external }
    }

    /// True when every internal id is its own external label.
    pub fn is_identity(&self) -> bool {
        self.external.iter().enumerate().all(|(i, e)| *e == i.to_string())
    }

    pub fn external(&self, internal: usize) -> &str {
        &self.external[internal]
    }

    pub fn len(&self) -> usize {
        self.external.len()
    }

    pub fn is_empty(&self) -> bool {
        self.external.is_empty()
    }

    /// Writes the `external_id,internal_id` sidecar CSV.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "external_id,internal_id")?;
        for (internal, ext) in self.external.iter().enumerate() {
            writeln!(out, "{ext},{internal}")?;
        }
        Ok(())
    }
}

/// Component summary returned by [`Graph::largest_component`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Component {
    pub size: usize,
    /// Members in ascending id order.
    pub members: Vec<usize>,
}

impl Graph {
    /// Builds a graph on `n` nodes. Parallel edges are merged by weight sum.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        let mut merged: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for (idx, (u, v, w)) in edges.into_iter().enumerate() {
            let line = idx + 1;
            if u >= n {
                return Err(Error::NodeOutOfRange { node: u, n });
            }
            if v >= n {
                return Err(Error::NodeOutOfRange { node: v, n });
            }
            if u == v {
                return Err(Error::SelfLoop {
                    line,
                    node: u.to_string(),
                });
            }
            if !(w > 0.0) || !w.is_finite() {
                return Err(Error::NonPositiveWeight { line, weight: w });
            }
            *merged.entry((u.min(v), u.max(v))).or_insert(0.0) += w;
        }
        Ok(Self::from_canonical(n, merged.into_iter().map(|((u, v), w)| (u, v, w))))
    }

    /// Builds from edges already known to be valid, with `u < v` and no
    /// duplicates. Used by generators and subgraph extraction.
    pub(crate) fn from_canonical<I>(n: usize, edges: I) -> Self
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        let edges: Vec<(usize, usize, f64)> = edges.into_iter().collect();
        let mut counts = vec![0usize; n + 1];
        for &(u, v, _) in &edges {
            debug_assert!(u != v);
            counts[u + 1] += 1;
            counts[v + 1] += 1;
        }
        for i in 0..n {
            counts[i + 1] += counts[i];
        }
        let offsets = counts;
        let mut fill = offsets.clone();
        let mut targets = vec![0usize; offsets[n]];
        let mut weights = vec![0f64; offsets[n]];
        for &(u, v, w) in &edges {
            targets[fill[u]] = v;
            weights[fill[u]] = w;
            fill[u] += 1;
            targets[fill[v]] = u;
            weights[fill[v]] = w;
            fill[v] += 1;
        }
        let mut degrees = vec![0f64; n];
        for i in 0..n {
            let (lo, hi) = (offsets[i], offsets[i + 1]);
            let mut pairs: Vec<(usize, f64)> = targets[lo..hi]
                .iter()
                .copied()
                .zip(weights[lo..hi].iter().copied())
                .collect();
            pairs.sort_unstable_by_key(|p| p.0);
            for (k, (t, w)) in pairs.into_iter().enumerate() {
                targets[lo + k] = t;
                weights[lo + k] = w;
            }
            degrees[i] = weights[lo..hi].iter().sum();
        }
        let total_weight = edges.iter().map(|e| e.2).sum();
        Graph {
            offsets,
            targets,
            weights,
            degrees,
            total_weight,
        }
    }

    /// A graph with `n` nodes and no edges.
    pub fn empty(n: usize) -> Self {
        Self::from_canonical(n, std::iter::empty())
    }

    pub fn node_count(&self) -> usize {
        self.degrees.len()
    }

    /// Number of distinct undirected edges.
    pub fn edge_count(&self) -> usize {
        self.targets.len() / 2
    }

    /// Total edge weight `M`; equals the edge count when unweighted.
    pub fn total_weight(&self) -> f64 {
        self.total_weight
    }

    pub fn is_empty(&self) -> bool {
        self.degrees.is_empty()
    }

    pub fn degree(&self, i: usize) -> Result<f64> {
        self.check(i)?;
        Ok(self.degrees[i])
    }

    pub fn degrees(&self) -> &[f64] {
        &self.degrees
    }

    pub fn node(&self, i: usize) -> Result<NodeView<'_>> {
        self.check(i)?;
        let (lo, hi) = (self.offsets[i], self.offsets[i + 1]);
        Ok(NodeView {
            id: i,
            degree: self.degrees[i],
            neighbors: &self.targets[lo..hi],
            weights: &self.weights[lo..hi],
        })
    }

    /// Neighbors and edge weights of `i`. Panics on an out-of-range id.
    #[inline]
    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let (lo, hi) = (self.offsets[i], self.offsets[i + 1]);
        self.targets[lo..hi]
            .iter()
            .copied()
            .zip(self.weights[lo..hi].iter().copied())
    }

    #[inline]
    pub fn neighbor_count(&self, i: usize) -> usize {
        self.offsets[i + 1] - self.offsets[i]
    }

    /// Each undirected edge once, as `(u, v, w)` with `u < v`, in id order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.node_count()).flat_map(move |u| {
            self.neighbors(u)
                .filter(move |&(v, _)| u < v)
                .map(move |(v, w)| (u, v, w))
        })
    }

    fn check(&self, i: usize) -> Result<()> {
        if i >= self.node_count() {
            Err(Error::NodeOutOfRange {
                node: i,
                n: self.node_count(),
            })
        } else {
            Ok(())
        }
    }

    /// Largest connected component among nodes with `removed[i] == false`.
    /// Ties on size go to the component holding the smallest node id.
    pub fn largest_component(&self, removed: &[bool]) -> Component {
        assert_eq!(removed.len(), self.node_count(), "mask length must equal N");
        let n = self.node_count();
        let mut seen = removed.to_vec();
        let mut best: Vec<usize> = Vec::new();
        let mut queue = VecDeque::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            queue.push_back(start);
            let mut members = Vec::new();
            while let Some(u) = queue.pop_front() {
                members.push(u);
                for (v, _) in self.neighbors(u) {
                    if !seen[v] {
                        seen[v] = true;
                        queue.push_back(v);
                    }
                }
            }
            // starts are visited in ascending order, so strict > keeps the
            // component with the smallest id on ties
            if members.len() > best.len() {
                best = members;
            }
        }
        best.sort_unstable();
        Component {
            size: best.len(),
            members: best,
        }
    }

    /// Connected component label per node (labels in order of smallest member).
    pub fn component_labels(&self) -> (Vec<usize>, usize) {
        let n = self.node_count();
        let mut label = vec![usize::MAX; n];
        let mut count = 0;
        let mut stack = Vec::new();
        for s in 0..n {
            if label[s] != usize::MAX {
                continue;
            }
            label[s] = count;
            stack.push(s);
            while let Some(u) = stack.pop() {
                for (v, _) in self.neighbors(u) {
                    if label[v] == usize::MAX {
                        label[v] = count;
                        stack.push(v);
                    }
                }
            }
            count += 1;
        }
        (label, count)
    }

    pub fn is_connected(&self) -> bool {
        self.node_count() == 0 || self.component_labels().1 == 1
    }

    /// The graph with node `i` and its edges deleted. Ids above `i` shift
    /// down by one.
    pub fn remove_node(&self, i: usize) -> Result<Graph> {
        self.check(i)?;
        let mut keep = vec![true; self.node_count()];
        keep[i] = false;
        Ok(self.induced(&keep).0)
    }

    /// Subgraph induced by `keep`, with ids compacted in ascending order.
    /// Also returns the original id of every retained node.
    pub fn induced(&self, keep: &[bool]) -> (Graph, Vec<usize>) {
        assert_eq!(keep.len(), self.node_count());
        let mut new_id = vec![usize::MAX; keep.len()];
        let mut original = Vec::new();
        for (i, &k) in keep.iter().enumerate() {
            if k {
                new_id[i] = original.len();
                original.push(i);
            }
        }
        let edges = self
            .edges()
            .filter(|&(u, v, _)| keep[u] && keep[v])
            .map(|(u, v, w)| (new_id[u], new_id[v], w));
        (Graph::from_canonical(original.len(), edges), original)
    }

    /// Writes one `u v w` line per undirected edge. Weights use the shortest
    /// representation that parses back to the same `f64`.
    /// Writes `u<TAB>v<TAB>w` lines, then one bare label per isolated node
    /// so the node count survives a round trip.
    pub fn write_edge_list<W: Write>(&self, mut out: W, ids: Option<&IdMap>) -> std::io::Result<()> {
        let label = |i: usize| ids.map_or_else(|| i.to_string(), |m| m.external(i).to_string());
        for (u, v, w) in self.edges() {
            writeln!(out, "{}\t{}\t{}", label(u), label(v), w)?;
        }
        for i in (0..self.node_count()).filter(|&i| self.neighbor_count(i) == 0) {
            writeln!(out, "{}", label(i))?;
        }
        Ok(())
    }
}

/// Parses an edge list. Lines are `u v [w]`, whitespace separated; a line
/// holding a single label declares a node that may have no edges. Blank
/// lines and lines starting with `#` are skipped. When `weighted` is false
/// any third column is ignored and every edge gets weight 1.
///
/// External ids are compacted to `0..n` in numeric order when every id is an
/// integer, otherwise in lexicographic order.
pub fn parse_edge_list<R: BufRead>(reader: R, weighted: bool) -> Result<(Graph, IdMap)> {
    let mut raw: Vec<(String, String, f64, usize)> = Vec::new();
    let mut lone: Vec<String> = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::io("<edge list>", e))?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        if fields.len() == 1 {
            lone.push(fields[0].to_string());
            continue;
        }
        if fields.len() > 3 {
            return Err(Error::Malformed {
                line: lineno,
                reason: format!("expected 1 to 3 fields, found {}", fields.len()),
            });
        }
        let (u, v) = (fields[0], fields[1]);
        if u == v {
            return Err(Error::SelfLoop {
                line: lineno,
                node: u.to_string(),
            });
        }
        let w = if weighted && fields.len() == 3 {
            let w: f64 = fields[2].parse().map_err(|_| Error::Malformed {
                line: lineno,
                reason: format!("weight {:?} is not a number", fields[2]),
            })?;
            if !(w > 0.0) || !w.is_finite() {
                return Err(Error::NonPositiveWeight { line: lineno, weight: w });
            }
            w
        } else {
            1.0
        };
        raw.push((u.to_string(), v.to_string(), w, lineno));
    }

    let mut labels: Vec<String> = raw
        .iter()
        .flat_map(|(u, v, _, _)| [u.clone(), v.clone()])
        .chain(lone)
        .collect();
    labels.sort_unstable();
    labels.dedup();
    if labels.iter().all(|s| s.parse::<i64>().is_ok()) {
        labels.sort_by_cached_key(|s| (s.parse::<i64>().unwrap(), s.clone()));
    }
    let index: BTreeMap<&str, usize> = labels
        .iter()
        .enumerate()
        .map(|(i, s)| (s.as_str(), i))
        .collect();
    let lookup = |s: &str| index[s];
    let mut merged: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for (u, v, w, lineno) in &raw {
        let (a, b) = (lookup(u), lookup(v));
        if a == b {
            return Err(Error::SelfLoop {
                line: *lineno,
                node: u.clone(),
            });
        }
        *merged.entry((a.min(b), a.max(b))).or_insert(0.0) += w;
    }
    let graph = Graph::from_canonical(
        labels.len(),
        merged.into_iter().map(|((u, v), w)| (u, v, w)),
    );
    Ok((graph, IdMap::from_labels(labels)))
}

pub fn load_edge_list(path: impl AsRef<Path>, weighted: bool) -> Result<(Graph, IdMap)> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    parse_edge_list(BufReader::new(file), weighted)
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::Graph;

    pub fn triangle() -> Graph {
        Graph::from_edges(3, [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]).unwrap()
    }

    /// Two triangles {0,1,2} and {3,4,5} joined by the edge 2-3.
    pub fn barbell() -> Graph {
        Graph::from_edges(
            6,
            [
                (0, 1, 1.0),
                (0, 2, 1.0),
                (1, 2, 1.0),
                (3, 4, 1.0),
                (3, 5, 1.0),
                (4, 5, 1.0),
                (2, 3, 1.0),
            ],
        )
        .unwrap()
    }

    pub fn star(leaves: usize) -> Graph {
        Graph::from_edges(leaves + 1, (1..=leaves).map(|l| (0, l, 1.0))).unwrap()
    }
}
