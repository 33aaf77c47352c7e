//! Fixtures shared by the criterion benchmarks.

use modvit::{detect_communities, generate, DetectConfig, GeneratorConfig, Graph, Partition};

/// A cellular network of `n` nodes with its detected partition.
pub fn cellular(n: usize, seed: u64) -> (Graph, Partition) {
    let graph = generate(&GeneratorConfig::cellular(seed).with_n(n))
        .expect("cellular parameters are valid")
        .graph;
    let partition = detect_communities(&graph, &DetectConfig::with_seed(seed));
    (graph, partition)
}

/// A nonlinear preferential-attachment network with its detected partition.
pub fn scale_free(n: usize, seed: u64) -> (Graph, Partition) {
    let graph = generate(&GeneratorConfig::scale_free(seed).with_n(n))
        .expect("scale-free parameters are valid")
        .graph;
    let partition = detect_communities(&graph, &DetectConfig::with_seed(seed));
    (graph, partition)
}

#[cfg(test)]
mod tests {
    #[test]
    fn fixtures_are_partitioned() {
        let (g, p) = super::cellular(300, 1);
        assert_eq!(p.len(), g.node_count());
        assert!(p.community_count() > 1);
    }
}
