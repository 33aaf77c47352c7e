//! Modularity, the closed-form modularity of `G - {i}`, and the batch
//! modularity vitality for every node.
//!
//! With `d_c` the total degree of community `c`, modularity is
//! `Q = M_int / M - sum_c d_c^2 / (4 M^2)`. Deleting node `i` removes its
//! `k_i` of weight from `M`, its internal weight from `M_int`, and
//! `h_{i,c} = k_i^c + k_i [c == c_i]` from each `d_c`. Only communities that
//! `i` touches change, so the updated square sum is
//! `sum_c d_c^2 - sum_{c: h != 0} (2 d_c h - h^2)` and each node costs
//! `O(deg_i)` on top of one shared statistics pass.

use rayon::prelude::*;

use crate::centrality::{Method, ScoreVector};
use crate::error::Result;
use crate::graph::Graph;
use crate::partition::{Partition, PartitionStats};

/// Below this node count the batch scorers stay on the calling thread.
const PARALLEL_THRESHOLD: usize = 4096;

#[derive(Debug, Clone)]
pub struct VitalityReport {
    pub q_original: f64,
    pub vitality: Vec<f64>,
}

/// Modularity from precomputed statistics. Zero for an edgeless graph.
pub fn modularity_from_stats(s: &PartitionStats) -> f64 {
    let m = s.total_weight;
    if m <= 0.0 {
        return 0.0;
    }
    single_fraction(s.m_internal, m, s.sum_d_sq)
}

/// `m_int / m - sum_sq / (4 m^2)` over one common denominator. With integer
/// weights the numerator is exact, so only the division rounds.
#[inline]
pub(crate) fn single_fraction(m_internal: f64, m: f64, sum_sq: f64) -> f64 {
    (4.0 * m * m_internal - sum_sq) / (4.0 * m * m)
}

pub fn modularity(g: &Graph, p: &Partition) -> Result<f64> {
    Ok(modularity_from_stats(&PartitionStats::compute(g, p)?))
}

/// `(community, h_{i,c})` for every community with nonzero `h`. The node's
/// own community always appears first.
pub fn h_values(g: &Graph, p: &Partition, s: &PartitionStats, i: usize) -> Vec<(usize, f64)> {
    let own = p.community_of(i);
    let k = g.degrees()[i];
    let mut out = vec![(own, s.k_internal[i] + k)];
    out.extend(s.community_degrees(i).filter(|&(c, _)| c != own));
    out
}

/// Sum over touched communities of `(d_c + sign*h)^2 - d_c^2`.
#[inline]
fn square_shift(g: &Graph, p: &Partition, s: &PartitionStats, i: usize, sign: f64) -> f64 {
    let own = p.community_of(i);
    let k = g.degrees()[i];
    let h_own = s.k_internal[i] + k;
    let d_own = s.d[own];
    let mut shift = 2.0 * sign * d_own * h_own + h_own * h_own;
    for (c, h) in s.community_degrees(i) {
        if c != own {
            shift += 2.0 * sign * s.d[c] * h + h * h;
        }
    }
    shift
}

#[inline]
fn after_removal_unchecked(g: &Graph, p: &Partition, s: &PartitionStats, i: usize) -> f64 {
    // no edges survive the removal: the residual modularity is defined as 0
    if g.edge_count() == g.neighbor_count(i) {
        return 0.0;
    }
    let k = g.degrees()[i];
    let m = s.total_weight - k;
    let sum_sq = s.sum_d_sq + square_shift(g, p, s, i, -1.0);
    single_fraction(s.m_internal - s.k_internal[i], m, sum_sq)
}

/// Modularity of `(G - {i}, C - {i})` without rebuilding anything.
pub fn modularity_after_removal(g: &Graph, p: &Partition, s: &PartitionStats, i: usize) -> Result<f64> {
    g.degree(i)?;
    p.check_graph(g)?;
    Ok(after_removal_unchecked(g, p, s, i))
}

fn per_node<F>(n: usize, f: F) -> Vec<f64>
where
    F: Fn(usize) -> f64 + Sync + Send,
{
    if n >= PARALLEL_THRESHOLD {
        (0..n).into_par_iter().map(f).collect()
    } else {
        (0..n).map(f).collect()
    }
}

/// Vitality from already computed statistics.
pub fn vitality_from_stats(g: &Graph, p: &Partition, s: &PartitionStats) -> VitalityReport {
    let q = modularity_from_stats(s);
    let vitality = per_node(g.node_count(), |i| q - after_removal_unchecked(g, p, s, i));
    VitalityReport {
        q_original: q,
        vitality,
    }
}

/// `Q(G, C) - Q(G - {i}, C - {i})` for every node.
pub fn modularity_vitality_all(g: &Graph, p: &Partition) -> Result<VitalityReport> {
    let s = PartitionStats::compute(g, p)?;
    Ok(vitality_from_stats(g, p, &s))
}

/// Community-Degree: the removal formula's penalty term with `h` added
/// instead of subtracted, `sum_c (d_c + h_{i,c})^2 / (4 (M - k_i)^2)`.
/// Zero when the node carries every edge.
pub fn community_degree_all(g: &Graph, p: &Partition) -> Result<ScoreVector> {
    let s = PartitionStats::compute(g, p)?;
    let scores = per_node(g.node_count(), |i| {
        if g.edge_count() == g.neighbor_count(i) {
            return 0.0;
        }
        let m = s.total_weight - g.degrees()[i];
        (s.sum_d_sq + square_shift(g, p, &s, i, 1.0)) / (4.0 * m * m)
    });
    Ok(ScoreVector::new(Method::Cd, scores))
}


#[cfg(test)]
mod tests {
    use super::oracle::*;
    use super::*;
    use crate::graph::fixtures::*;
    use proptest::prelude::*;

    fn split() -> Partition {
        Partition::from_labels(&[0, 0, 0, 1, 1, 1])
    }

    #[test]
    fn barbell_modularity() {
        let q = modularity(&barbell(), &split()).unwrap();
        assert!((q - 5.0 / 14.0).abs() < 1e-15);
        assert!((modularity_double_sum(&barbell(), &split()) - 5.0 / 14.0).abs() < 1e-15);
    }

    #[test]
    fn singleton_partition_modularity() {
        let g = barbell();
        let q = modularity(&g, &Partition::singletons(6)).unwrap();
        let m = g.total_weight();
        let expected = -g.degrees().iter().map(|k| k * k).sum::<f64>() / (4.0 * m * m);
        assert!((q - expected).abs() < 1e-15);
        assert_eq!(modularity(&Graph::empty(3), &Partition::single(3)).unwrap(), 0.0);
    }

    #[test]
    fn barbell_after_removal() {
        let g = barbell();
        let p = split();
        let s = PartitionStats::compute(&g, &p).unwrap();
        assert!((modularity_after_removal(&g, &p, &s, 2).unwrap() - 0.375).abs() < 1e-15);
        assert!((modularity_after_removal(&g, &p, &s, 0).unwrap() - 0.22).abs() < 1e-15);
        assert!(modularity_after_removal(&g, &p, &s, 9).is_err());
    }

    #[test]
    fn star_center_removal_is_zero() {
        let g = star(6);
        let p = Partition::from_labels(&[0, 0, 0, 1, 1, 1, 1]);
        let s = PartitionStats::compute(&g, &p).unwrap();
        assert_eq!(modularity_after_removal(&g, &p, &s, 0).unwrap(), 0.0);
    }

    #[test]
    fn barbell_vitality() {
        let r = modularity_vitality_all(&barbell(), &split()).unwrap();
        assert!((r.vitality[0] - (5.0 / 14.0 - 0.22)).abs() < 1e-15);
        assert!((r.vitality[2] + 1.0 / 56.0).abs() < 1e-15);
        assert_eq!(r.vitality[2], r.vitality[3]);
        assert!(r.vitality[0] > 0.0 && r.vitality[2] < 0.0);
    }

    #[test]
    fn symmetric_graph_has_equal_vitalities() {
        let g = Graph::from_edges(
            6,
            [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0), (3, 4, 1.0), (4, 5, 1.0), (3, 5, 1.0)],
        )
        .unwrap();
        let r = modularity_vitality_all(&g, &split()).unwrap();
        for v in &r.vitality {
            assert!((v - r.vitality[0]).abs() < 1e-15);
        }
    }

    #[test]
    fn barbell_community_degree() {
        let cd = community_degree_all(&barbell(), &split()).unwrap();
        assert!((cd.scores[0] - 1.70).abs() < 1e-15);
        assert!((cd.scores[2] - 3.25).abs() < 1e-15);
    }

    #[test]
    fn community_degree_of_isolated_node() {
        let g = Graph::from_edges(5, [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0)]).unwrap();
        let p = Partition::from_labels(&[0, 0, 1, 1, 1]);
        let s = PartitionStats::compute(&g, &p).unwrap();
        let cd = community_degree_all(&g, &p).unwrap();
        let m = g.total_weight();
        assert!((cd.scores[4] - s.sum_d_sq / (4.0 * m * m)).abs() < 1e-15);
    }

    #[test]
    fn h_summary_includes_own_degree() {
        let g = barbell();
        let p = split();
        let s = PartitionStats::compute(&g, &p).unwrap();
        assert_eq!(h_values(&g, &p, &s, 2), vec![(0, 5.0), (1, 1.0)]);
    }

    fn arb_pair() -> impl Strategy<Value = (Graph, Partition)> {
        (3usize..25, 1usize..5).prop_flat_map(|(n, c)| {
            (
                proptest::collection::vec((0..n, 0..n, 1u32..4), 1..80),
                proptest::collection::vec(0..c, n),
            )
                .prop_map(move |(es, labels)| {
                    let g = Graph::from_edges(
                        n,
                        es.into_iter().filter(|(u, v, _)| u != v).map(|(u, v, w)| (u, v, w as f64 * 0.5)),
                    )
                    .unwrap();
                    (g, Partition::from_labels(&labels))
                })
        })
    }

    proptest! {
        #[test]
        fn fast_vitality_matches_naive((g, p) in arb_pair()) {
            let r = modularity_vitality_all(&g, &p).unwrap();
            for i in 0..g.node_count() {
                let naive = naive_vitality(&g, &p, i);
                prop_assert!((r.vitality[i] - naive).abs() <= 1e-12, "node {}: {} vs {}", i, r.vitality[i], naive);
            }
        }

        #[test]
        fn removal_changes_q_by_minus_vitality((g, p) in arb_pair()) {
            let r = modularity_vitality_all(&g, &p).unwrap();
            let (i, v) = r.vitality.iter().copied().enumerate()
                .min_by(|a, b| a.1.total_cmp(&b.1)).unwrap();
            let mut keep = vec![true; g.node_count()];
            keep[i] = false;
            let (h, _) = g.induced(&keep);
            let q_after = modularity(&h, &p.restrict(&keep)).unwrap();
            prop_assert!((q_after - (r.q_original - v)).abs() < 1e-12);
            if v < -1e-12 {
                prop_assert!(q_after > r.q_original);
            }
        }
    }
}
