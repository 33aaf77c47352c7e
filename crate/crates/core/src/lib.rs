//! Modularity vitality: how much a partition's modularity changes when a
//! single node is deleted, computed for every node in `O(M + NC)` time.
//!
//! Positive vitality marks community hubs, negative vitality marks bridges
//! whose deletion makes the partition look more modular. The crate also
//! carries the comparison centralities, attack and fragmentation tooling,
//! seeded network generators, and greedy community deception.
//!
//! ```
//! use modvit::{modularity_vitality_all, Graph, Partition};
//!
//! let g = Graph::from_edges(6, [
//!     (0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0),
//!     (3, 4, 1.0), (4, 5, 1.0), (3, 5, 1.0),
//!     (2, 3, 1.0),
//! ]).unwrap();
//! let p = Partition::from_labels(&[0, 0, 0, 1, 1, 1]);
//! let r = modularity_vitality_all(&g, &p).unwrap();
//! assert!(r.vitality[0] > 0.0);
//! assert!(r.vitality[2] < 0.0);
//! ```

pub mod attacks;
pub mod centrality;
pub mod deception;
pub mod error;
pub mod experiment;
pub mod generators;
pub mod graph;
pub mod numeric;
pub mod partition;
pub mod rank;
pub mod vitality;

pub use attacks::{cost, initial_attack, mba_attack, recomputed_attack, run_attack, AttackOptions, AttackTrace, CostReport, StepRecord, Strategy};
pub use centrality::{score, score_with, Method, ScoreOptions, ScoreVector};
pub use deception::{deceive_greedy, deceive_initial, DeceptionPlan, StopRule, Stopping};
pub use error::{Error, Result};
pub use generators::{generate, Family, GeneratorConfig, Generated};
pub use graph::{load_edge_list, parse_edge_list, Graph, IdMap};
pub use partition::{detect_communities, load_partition, read_partition, DetectConfig, Partition, PartitionStats};
pub use rank::{kendall_tau, kendall_tau_b};
pub use vitality::{modularity, modularity_vitality_all, VitalityReport};
