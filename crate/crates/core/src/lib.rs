//! Memetic breakout local search for the generalized traveling salesman
//! problem.
//!
//! A tour visits every cluster exactly once through one chosen node. The
//! solver combines a genetic outer loop over random-key genomes with breakout
//! local search (2-opt descent, cluster optimization and adaptive swap
//! perturbation) as its improvement step.

pub mod bench;
pub mod bls;
pub mod clustering;
pub mod instance;
pub mod memetic;
pub mod solution;

pub use bench::{run_benchmark, BenchConfig, BenchError, RunReport};
pub use bls::{bls_run, BlsParams, StopSignal};
pub use clustering::{cluster, ClusteringConfig};
pub use instance::{parse_gtsp, parse_tsplib, GtspInstance, InstanceError, NodeSet};
pub use memetic::{solve, MemeticParams};
pub use solution::{cluster_optimization, tour_cost, Tour, TourError};
