//! Community-aware centralities used as attack comparators, plus the common
//! [`ScoreVector`] wrapper that fixes each method's attack order.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::partition::{neighboring_communities, Partition, PartitionStats};
use crate::vitality::{community_degree_all, vitality_from_stats};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Method {
    /// Modularity vitality, most negative first.
    Mv,
    /// Absolute modularity vitality, largest magnitude first.
    Amv,
    /// Modularity vitality, most positive first.
    Rmv,
    /// Community-Degree.
    Cd,
    /// Masuda's group-network eigenvector strategy.
    Mas,
    /// Community hub-bridge.
    Chb,
    /// Weighted modular centrality with degree as the base measure.
    WmcD,
    /// Adjusted modular centrality (bridge-weighted) with degree.
    AmcD,
    /// Commn-centrality.
    Cc,
    Deg,
}

impl Method {
    pub const ALL: [Method; 10] = [
        Method::Mv,
        Method::Amv,
        Method::Rmv,
        Method::Cd,
        Method::Mas,
        Method::Chb,
        Method::WmcD,
        Method::AmcD,
        Method::Cc,
        Method::Deg,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Mv => "mv",
            Method::Amv => "amv",
            Method::Rmv => "rmv",
            Method::Cd => "cd",
            Method::Mas => "mas",
            Method::Chb => "chb",
            Method::WmcD => "wmc-d",
            Method::AmcD => "amc-d",
            Method::Cc => "cc",
            Method::Deg => "deg",
        }
    }

    /// Only modularity vitality is attacked in ascending score order.
    pub fn ascending(self) -> bool {
        matches!(self, Method::Mv)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.to_ascii_lowercase();
        Method::ALL
            .into_iter()
            .find(|m| m.name() == lower)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown method {s:?}")))
    }
}

/// Per-node scores for one method and the attack order they induce.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreVector {
    pub method: Method,
    pub scores: Vec<f64>,
    /// Node ids in attack order; ties go to the smaller id.
    pub ranking: Vec<usize>,
}

impl ScoreVector {
    pub fn new(method: Method, scores: Vec<f64>) -> Self {
        let mut ranking: Vec<usize> = (0..scores.len()).collect();
        ranking.sort_by(|&a, &b| attack_order(method, scores[a], scores[b]).then(a.cmp(&b)));
        ScoreVector {
            method,
            scores,
            ranking,
        }
    }

    pub fn len(&self) -> usize {
        self.scores.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scores.is_empty()
    }

    /// First node in attack order.
    pub fn top(&self) -> Option<usize> {
        self.ranking.first().copied()
    }
}

/// `Less` means `a` is attacked before `b`.
pub fn attack_order(method: Method, a: f64, b: f64) -> Ordering {
    if method.ascending() {
        a.total_cmp(&b)
    } else {
        b.total_cmp(&a)
    }
}

#[derive(Debug, Clone, Default)]
pub struct ScoreOptions {
    /// Put twice the intra-community weight on the group-network diagonal.
    pub group_self_loops: bool,
    /// Per-community `R_c` for commn-centrality; defaults to the largest
    /// internal degree in the community.
    pub commn_r: Option<Vec<f64>>,
}

pub fn score(g: &Graph, p: &Partition, method: Method) -> Result<ScoreVector> {
    score_with(g, p, method, &ScoreOptions::default())
}

pub fn score_with(g: &Graph, p: &Partition, method: Method, opts: &ScoreOptions) -> Result<ScoreVector> {
    p.check_graph(g)?;
    if method == Method::Cd {
        return community_degree_all(g, p);
    }
    if method == Method::Deg {
        return Ok(degree_scores(g));
    }
    let s = PartitionStats::compute(g, p)?;
    score_from_stats(g, p, &s, method, opts)
}

pub(crate) fn score_from_stats(
    g: &Graph,
    p: &Partition,
    s: &PartitionStats,
    method: Method,
    opts: &ScoreOptions,
) -> Result<ScoreVector> {
    let scores = match method {
        Method::Mv | Method::Rmv => vitality_from_stats(g, p, s).vitality,
        Method::Amv => vitality_from_stats(g, p, s).vitality.into_iter().map(f64::abs).collect(),
        Method::Cd => return community_degree_all(g, p),
        Method::Mas => masuda(g, p, s, opts.group_self_loops)?,
        Method::Chb => chb(g, p, s),
        Method::WmcD => modular_degree(p, s, false),
        Method::AmcD => modular_degree(p, s, true),
        Method::Cc => commn(g, p, s, opts.commn_r.as_deref())?,
        Method::Deg => g.degrees().to_vec(),
    };
    Ok(ScoreVector::new(method, scores))
}

pub fn degree_scores(g: &Graph) -> ScoreVector {
    ScoreVector::new(Method::Deg, g.degrees().to_vec())
}

pub fn chb_scores(g: &Graph, p: &Partition) -> Result<ScoreVector> {
    score(g, p, Method::Chb)
}

pub fn wmc_scores(g: &Graph, p: &Partition) -> Result<ScoreVector> {
    score(g, p, Method::WmcD)
}

pub fn amc_scores(g: &Graph, p: &Partition) -> Result<ScoreVector> {
    score(g, p, Method::AmcD)
}

pub fn masuda_scores(g: &Graph, p: &Partition) -> Result<ScoreVector> {
    score(g, p, Method::Mas)
}

pub fn commn_scores(g: &Graph, p: &Partition, r: Option<&[f64]>) -> Result<ScoreVector> {
    let opts = ScoreOptions {
        commn_r: r.map(<[f64]>::to_vec),
        ..Default::default()
    };
    score_with(g, p, Method::Cc, &opts)
}

fn chb(g: &Graph, p: &Partition, s: &PartitionStats) -> Vec<f64> {
    (0..g.node_count())
        .map(|i| {
            let size = p.members(p.community_of(i)).len() as f64;
            let b = neighboring_communities(g, p, i).unwrap_or(0) as f64;
            size * s.k_internal[i] + b * s.k_external[i]
        })
        .collect()
}

fn modular_degree(p: &Partition, s: &PartitionStats, adjusted: bool) -> Vec<f64> {
    (0..p.len())
        .map(|i| {
            let mu = s.mu[p.community_of(i)];
            let (wi, we) = if adjusted { (1.0 - mu, mu) } else { (mu, 1.0 - mu) };
            wi * s.k_internal[i] + we * s.k_external[i]
        })
        .collect()
}

fn commn(g: &Graph, p: &Partition, s: &PartitionStats, r: Option<&[f64]>) -> Result<Vec<f64>> {
    let c_count = p.community_count();
    let mut max_int = vec![0.0f64; c_count];
    let mut max_ext = vec![0.0f64; c_count];
    for i in 0..g.node_count() {
        let c = p.community_of(i);
        max_int[c] = max_int[c].max(s.k_internal[i]);
        max_ext[c] = max_ext[c].max(s.k_external[i]);
    }
    if let Some(c) = max_ext.iter().position(|&x| x <= 0.0) {
        return Err(Error::CommnUndefined(c));
    }
    if let Some(r) = r {
        if r.len() != c_count {
            return Err(Error::InvalidParameter(format!(
                "commn R has {} entries for {} communities",
                r.len(),
                c_count
            )));
        }
    }
    Ok((0..g.node_count())
        .map(|i| {
            let c = p.community_of(i);
            let r_c = r.map_or(max_int[c], |r| r[c]);
            let ratio = s.mu[c] / p.members(c).len() as f64;
            let internal = if max_int[c] > 0.0 {
                s.k_internal[i] / max_int[c] * r_c
            } else {
                0.0
            };
            let external = s.k_external[i] / max_ext[c] * r_c;
            (1.0 - ratio) * internal + (1.0 + ratio) * external * external
        })
        .collect())
}

const POWER_TOL: f64 = 1e-10;
const POWER_MAX_ITER: usize = 10_000;

/// Dominant eigenpair of a symmetric nonnegative matrix restricted to the
/// index set `nodes`. Iterates on `B + I` so bipartite blocks converge.
fn power_iteration(b: &[Vec<f64>], nodes: &[usize]) -> Result<(f64, Vec<f64>)> {
    let k = nodes.len();
    let mut x = vec![1.0 / (k as f64).sqrt(); k];
    let mut next = vec![0.0; k];
    for _ in 0..POWER_MAX_ITER {
        for (a, &ca) in nodes.iter().enumerate() {
            next[a] = x[a] + nodes.iter().enumerate().map(|(bi, &cb)| b[ca][cb] * x[bi]).sum::<f64>();
        }
        let norm = next.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Ok((0.0, vec![0.0; k]));
        }
        next.iter_mut().for_each(|v| *v /= norm);
        let delta = x.iter().zip(&next).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        std::mem::swap(&mut x, &mut next);
        if delta < POWER_TOL {
            // Rayleigh quotient of B itself
            let mut lambda = 0.0;
            for (a, &ca) in nodes.iter().enumerate() {
                for (bi, &cb) in nodes.iter().enumerate() {
                    lambda += x[a] * b[ca][cb] * x[bi];
                }
            }
            return Ok((lambda, x));
        }
    }
    Err(Error::NoConvergence {
        iterations: POWER_MAX_ITER,
    })
}

/// Dominant eigenvalue and unit, nonnegative eigenvector of the
/// community-to-community weight matrix. When the group network is
/// disconnected only the component with the largest eigenvalue carries
/// weight.
pub fn group_eigenpair(g: &Graph, p: &Partition, s: &PartitionStats, self_loops: bool) -> Result<(f64, Vec<f64>)> {
    let _ = g;
    let c_count = p.community_count();
    let mut b = vec![vec![0.0; c_count]; c_count];
    for i in 0..p.len() {
        let ci = p.community_of(i);
        for (c, w) in s.community_degrees(i) {
            if c != ci || self_loops {
                b[ci][c] += w;
            }
        }
    }
    // components of the group network
    let mut comp = vec![usize::MAX; c_count];
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for start in 0..c_count {
        if comp[start] != usize::MAX {
            continue;
        }
        let id = groups.len();
        comp[start] = id;
        let mut members = vec![start];
        let mut cursor = 0;
        while cursor < members.len() {
            let c = members[cursor];
            cursor += 1;
            for d in 0..c_count {
                if comp[d] == usize::MAX && (b[c][d] > 0.0 || b[d][c] > 0.0) {
                    comp[d] = id;
                    members.push(d);
                }
            }
        }
        groups.push(members);
    }
    let mut best: (f64, Vec<f64>) = (0.0, vec![0.0; c_count]);
    for members in &groups {
        let has_weight = members.iter().any(|&c| members.iter().any(|&d| b[c][d] > 0.0));
        if !has_weight {
            continue;
        }
        let (lambda, vec) = power_iteration(&b, members)?;
        if lambda > best.0 {
            let mut u = vec![0.0; c_count];
            for (&c, v) in members.iter().zip(vec) {
                u[c] = v.abs();
            }
            best = (lambda, u);
        }
    }
    Ok(best)
}

fn masuda(g: &Graph, p: &Partition, s: &PartitionStats, self_loops: bool) -> Result<Vec<f64>> {
    let (lambda, u) = group_eigenpair(g, p, s, self_loops)?;
    if lambda <= 0.0 {
        return Ok(vec![0.0; g.node_count()]);
    }
    Ok((0..g.node_count())
        .map(|i| {
            let ci = p.community_of(i);
            let reach: f64 = s
                .community_degrees(i)
                .filter(|&(c, _)| c != ci)
                .map(|(c, w)| u[c] * w)
                .sum();
            let x = reach / lambda;
            (2.0 * u[ci] - x) * reach
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::fixtures::*;
    use proptest::prelude::*;

    fn split() -> Partition {
        Partition::from_labels(&[0, 0, 0, 1, 1, 1])
    }

    #[test]
    fn ranking_breaks_ties_by_id() {
        let s = ScoreVector::new(Method::Deg, vec![1.0, 3.0, 3.0, 0.0]);
        assert_eq!(s.ranking, vec![1, 2, 0, 3]);
        let s = ScoreVector::new(Method::Mv, vec![1.0, -3.0, -3.0, 0.0]);
        assert_eq!(s.ranking, vec![1, 2, 3, 0]);
    }

    #[test]
    fn method_names_parse() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
        }
        assert!("pagerank".parse::<Method>().is_err());
    }

    #[test]
    fn masuda_barbell() {
        let g = barbell();
        let p = split();
        let s = PartitionStats::compute(&g, &p).unwrap();
        let (lambda, u) = group_eigenpair(&g, &p, &s, false).unwrap();
        assert!((lambda - 1.0).abs() < 1e-12);
        assert!((u[0] - 0.5f64.sqrt()).abs() < 1e-12);
        let mas = masuda_scores(&g, &p).unwrap();
        assert!((mas.scores[2] - 0.5).abs() < 1e-12);
        assert_eq!(mas.scores[0], 0.0);
    }

    #[test]
    fn masuda_single_community_is_zero() {
        let mas = masuda_scores(&barbell(), &Partition::single(6)).unwrap();
        assert!(mas.scores.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn masuda_disconnected_group_network() {
        // communities {0,1} - {2,3} linked, {4,5} - {6,7} linked more heavily
        let g = Graph::from_edges(
            8,
            [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (4, 5, 1.0), (5, 6, 3.0), (6, 7, 1.0)],
        )
        .unwrap();
        let p = Partition::from_labels(&[0, 0, 1, 1, 2, 2, 3, 3]);
        let s = PartitionStats::compute(&g, &p).unwrap();
        let (lambda, u) = group_eigenpair(&g, &p, &s, false).unwrap();
        assert!((lambda - 3.0).abs() < 1e-9);
        assert_eq!(u[0], 0.0);
        assert_eq!(u[1], 0.0);
        let mas = masuda_scores(&g, &p).unwrap();
        assert_eq!(mas.scores[1], 0.0);
        assert!(mas.scores[5] > 0.0);
    }

    #[test]
    fn chb_barbell() {
        let chb = chb_scores(&barbell(), &split()).unwrap();
        assert_eq!(chb.scores[2], 7.0);
        assert_eq!(chb.scores[0], 6.0);
        let g = Graph::from_edges(3, [(0, 1, 1.0)]).unwrap();
        assert_eq!(chb_scores(&g, &Partition::single(3)).unwrap().scores[2], 0.0);
    }

    #[test]
    fn modular_degree_barbell() {
        let wmc = wmc_scores(&barbell(), &split()).unwrap();
        assert!((wmc.scores[2] - 11.0 / 3.0).abs() < 1e-12);
        let amc = amc_scores(&barbell(), &split()).unwrap();
        assert!((amc.scores[2] + 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn wmc_with_unit_mu_and_no_external_links_is_degree() {
        // mu = 1 cannot arise from a real partition with such a node, so
        // set it directly
        let g = barbell();
        let p = split();
        let mut s = PartitionStats::compute(&g, &p).unwrap();
        s.mu[0] = 1.0;
        let wmc = modular_degree(&p, &s, false);
        assert_eq!(wmc[0], g.degrees()[0]);
    }

    #[test]
    fn commn_undefined_without_external_links() {
        let g = Graph::from_edges(4, [(0, 1, 1.0), (2, 3, 1.0)]).unwrap();
        let err = commn_scores(&g, &Partition::from_labels(&[0, 0, 1, 1]), None).unwrap_err();
        assert!(matches!(err, Error::CommnUndefined(0)));
    }

    #[test]
    fn commn_barbell() {
        let g = barbell();
        let p = split();
        let cc = commn_scores(&g, &p, None).unwrap();
        // R_c = 2; mu/|gamma| = 8/9
        let ratio = 8.0 / 9.0;
        let bridge = (1.0 - ratio) * 2.0 + (1.0 + ratio) * 4.0;
        let interior = (1.0 - ratio) * 2.0;
        assert!((cc.scores[2] - bridge).abs() < 1e-12);
        assert!((cc.scores[0] - interior).abs() < 1e-12);
        assert!(cc.scores.iter().all(|x| x.is_finite()));
    }

    #[test]
    fn commn_single_node_holding_both_maxima() {
        // node 0 is the only member with internal and external links
        let g = Graph::from_edges(3, [(0, 1, 1.0), (0, 2, 1.0)]).unwrap();
        let p = Partition::from_labels(&[0, 0, 1]);
        let s = PartitionStats::compute(&g, &p).unwrap();
        let cc = commn_scores(&g, &p, None).unwrap();
        let (r, ratio) = (1.0, s.mu[0] / 2.0);
        assert!((cc.scores[0] - ((1.0 - ratio) * r + (1.0 + ratio) * r * r)).abs() < 1e-12);
    }

    #[test]
    fn degree_examples() {
        assert!(degree_scores(&triangle()).scores.iter().all(|&x| x == 2.0));
        assert_eq!(degree_scores(&barbell()).scores[2], 3.0);
        assert_eq!(degree_scores(&Graph::empty(1)).scores[0], 0.0);
    }

    #[test]
    fn singleton_partition_reduces_to_external_degree() {
        let g = barbell();
        let p = Partition::singletons(6);
        let chb = chb_scores(&g, &p).unwrap();
        let wmc = wmc_scores(&g, &p).unwrap();
        for i in 0..6 {
            let k = g.degrees()[i];
            let b = neighboring_communities(&g, &p, i).unwrap() as f64;
            assert_eq!(chb.scores[i], b * k);
            assert_eq!(wmc.scores[i], k);
        }
    }

    fn arb_pair() -> impl Strategy<Value = (Graph, Partition, Vec<usize>)> {
        (4usize..30, 1usize..5).prop_flat_map(|(n, c)| {
            (
                proptest::collection::vec((0..n, 0..n, 1u32..4), 1..90),
                proptest::collection::vec(0..c, n),
                Just((0..n).collect::<Vec<usize>>()).prop_shuffle(),
            )
                .prop_map(move |(es, labels, perm)| {
                    let g = Graph::from_edges(
                        n,
                        es.into_iter().filter(|(u, v, _)| u != v).map(|(u, v, w)| (u, v, w as f64)),
                    )
                    .unwrap();
                    (g, Partition::from_labels(&labels), perm)
                })
        })
    }

    proptest! {
        #[test]
        fn scores_are_label_equivariant((g, p, perm) in arb_pair()) {
            let n = g.node_count();
            let h = Graph::from_edges(n, g.edges().map(|(u, v, w)| (perm[u], perm[v], w))).unwrap();
            let mut labels = vec![0; n];
            for i in 0..n {
                labels[perm[i]] = p.community_of(i);
            }
            let q = Partition::from_labels(&labels);
            for m in [Method::Mv, Method::Amv, Method::Cd, Method::Mas, Method::Chb, Method::WmcD, Method::AmcD, Method::Deg] {
                let a = score(&g, &p, m).unwrap();
                let b = score(&h, &q, m).unwrap();
                for i in 0..n {
                    prop_assert!((a.scores[i] - b.scores[perm[i]]).abs() <= 1e-9 * (1.0 + a.scores[i].abs()), "{} node {}", m, i);
                }
            }
        }

        #[test]
        fn masuda_ranking_is_scale_invariant((g, p, _perm) in arb_pair(), scale in 0.1f64..10.0) {
            let h = Graph::from_edges(g.node_count(), g.edges().map(|(u, v, w)| (u, v, w * scale))).unwrap();
            let a = masuda_scores(&g, &p).unwrap();
            let b = masuda_scores(&h, &p).unwrap();
            for i in 0..g.node_count() {
                prop_assert!((a.scores[i] * scale - b.scores[i]).abs() <= 1e-7 * (1.0 + b.scores[i].abs()));
            }
        }
    }
}
