//! Turns a TSP node set into a GTSP instance by center-based clustering:
//! pick `m` mutually far-apart centers, then assign every node to its
//! nearest center.

use crate::instance::{GtspInstance, InstanceError, NodeSet};

/// How many clusters to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ClusterCount {
    /// `⌈n / 5⌉`.
    #[default]
    FifthOfNodes,
    Fixed(usize),
}

/// How the first center is chosen. Later centers always maximize the
/// minimum distance to the centers chosen so far.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CenterSeeding {
    /// First center is the node farthest from node 1. This reproduces the
    /// partitions of the usual GTSPLIB benchmark instances.
    #[default]
    FarthestFromFirst,
    /// First two centers are a pair of nodes at maximum distance.
    FarthestPair,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ClusteringConfig {
    pub count: ClusterCount,
    pub seeding: CenterSeeding,
}

impl ClusteringConfig {
    pub fn fixed(m: usize) -> Self {
        Self {
            count: ClusterCount::Fixed(m),
            ..Self::default()
        }
    }

    pub fn cluster_count(&self, n: usize) -> usize {
        match self.count {
            ClusterCount::FifthOfNodes => n.div_ceil(5),
            ClusterCount::Fixed(m) => m,
        }
    }
}

/// Index of the maximum, lowest index on ties.
fn argmax(values: impl Iterator<Item = i64>) -> Option<usize> {
    let mut best: Option<(usize, i64)> = None;
    for (i, v) in values.enumerate() {
        if best.is_none_or(|(_, b)| v > b) {
            best = Some((i, v));
        }
    }
    best.map(|(i, _)| i)
}

/// Chooses `m` centers under the given seeding rule, in selection order.
pub fn choose_centers(nodes: &NodeSet, m: usize, seeding: CenterSeeding) -> Vec<usize> {
    let n = nodes.len();
    assert!(1 <= m && m <= n);
    let mut centers = Vec::with_capacity(m);
    match seeding {
        CenterSeeding::FarthestFromFirst => {
            centers.push(argmax(nodes.row(0).iter().copied()).unwrap());
        }
        CenterSeeding::FarthestPair => {
            let mut best = (0, 0, -1);
            for i in 0..n {
                for j in (i + 1)..n {
                    if nodes.dist(i, j) > best.2 {
                        best = (i, j, nodes.dist(i, j));
                    }
                }
            }
            centers.push(best.0);
            if m > 1 && n > 1 {
                centers.push(best.1);
            }
        }
    }
    let mut is_center = vec![false; n];
    let mut nearest = vec![i64::MAX; n];
    for &c in &centers {
        is_center[c] = true;
        for (v, d) in nearest.iter_mut().enumerate() {
            *d = (*d).min(nodes.dist(v, c));
        }
    }
    while centers.len() < m {
        let next = argmax((0..n).map(|v| if is_center[v] { -1 } else { nearest[v] })).unwrap();
        is_center[next] = true;
        centers.push(next);
        for (v, d) in nearest.iter_mut().enumerate() {
            *d = (*d).min(nodes.dist(v, next));
        }
    }
    centers
}

/// Clusters `nodes` into a GTSP instance named `{m}{name}`.
///
/// Cluster `k` is the one grown around the `k`-th chosen center. Each node
/// joins its nearest center, lowest cluster index on ties; centers always
/// belong to their own cluster.
pub fn cluster(nodes: &NodeSet, cfg: &ClusteringConfig) -> Result<GtspInstance, InstanceError> {
    let n = nodes.len();
    let m = cfg.cluster_count(n);
    if m == 0 || m > n {
        return Err(InstanceError::Invalid(format!(
            "cannot build {m} clusters from {n} nodes"
        )));
    }
    let centers = choose_centers(nodes, m, cfg.seeding);
    let mut members = vec![Vec::new(); m];
    let mut center_cluster = vec![None; n];
    for (k, &c) in centers.iter().enumerate() {
        center_cluster[c] = Some(k);
    }
    for (v, pinned) in center_cluster.into_iter().enumerate() {
        let k = pinned.unwrap_or_else(|| argmin_center(nodes, &centers, v));
        members[k].push(v);
    }
    GtspInstance::new(format!("{m}{}", nodes.name()), nodes.clone(), members)
}

fn argmin_center(nodes: &NodeSet, centers: &[usize], v: usize) -> usize {
    let mut best = (0, i64::MAX);
    for (k, &c) in centers.iter().enumerate() {
        let d = nodes.dist(v, c);
        if d < best.1 {
            best = (k, d);
        }
    }
    best.0
}
