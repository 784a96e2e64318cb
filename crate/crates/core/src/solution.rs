//! GTSP tours: a cyclic order of clusters plus the node visited in each.

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::instance::GtspInstance;

/// Violations reported by [`Tour::validate`] and the move operators.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TourError {
    #[error("order is not a permutation of the {m} clusters")]
    NotPermutation { m: usize },
    #[error("cluster {cluster} picks node {node}, which is not one of its members")]
    ForeignPick { cluster: usize, node: usize },
    #[error("position index is inconsistent with the order")]
    StalePositions,
    #[error("cached cost {cached} differs from recomputed cost {actual}")]
    StaleCost { cached: i64, actual: i64 },
    #[error("tour has {got} clusters, instance has {expected}")]
    WrongSize { got: usize, expected: usize },
    #[error("invalid move: {0}")]
    InvalidMove(String),
    #[error("malformed tour text: {0}")]
    Malformed(String),
}

/// A feasible GTSP tour with cached cost.
///
/// `order[i]` is the cluster visited at position `i`, `pick[k]` the node
/// chosen in cluster `k` and `pos[k]` the position of cluster `k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tour {
    order: Vec<usize>,
    pick: Vec<usize>,
    pos: Vec<usize>,
    cost: i64,
}

/// Sum of the `m` edges of the cycle `order` with node choice `pick`,
/// computed directly from its definition.
pub fn tour_cost(inst: &GtspInstance, order: &[usize], pick: &[usize]) -> i64 {
    let m = order.len();
    if m < 2 {
        return 0;
    }
    let closing = inst.dist(pick[order[m - 1]], pick[order[0]]);
    closing
        + order
            .windows(2)
            .map(|w| inst.dist(pick[w[0]], pick[w[1]]))
            .sum::<i64>()
}

fn positions(order: &[usize]) -> Vec<usize> {
    let mut pos = vec![usize::MAX; order.len()];
    for (i, &k) in order.iter().enumerate() {
        if k < pos.len() {
            pos[k] = i;
        }
    }
    pos
}

impl Tour {
    /// Builds a tour and checks it against the instance.
    pub fn new(inst: &GtspInstance, order: Vec<usize>, pick: Vec<usize>) -> Result<Self, TourError> {
        let pos = positions(&order);
        let mut tour = Self {
            order,
            pick,
            pos,
            cost: 0,
        };
        tour.check_structure(inst)?;
        tour.cost = tour_cost(inst, &tour.order, &tour.pick);
        Ok(tour)
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    /// Node chosen in each cluster, indexed by cluster.
    pub fn picks(&self) -> &[usize] {
        &self.pick
    }

    pub fn pick(&self, cluster: usize) -> usize {
        self.pick[cluster]
    }

    pub fn position(&self, cluster: usize) -> usize {
        self.pos[cluster]
    }

    pub fn cost(&self) -> i64 {
        self.cost
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// Node visited at tour position `i` (taken modulo the tour length).
    #[inline]
    pub fn node_at(&self, i: usize) -> usize {
        self.pick[self.order[i % self.order.len()]]
    }

    /// Nodes in visiting order.
    pub fn nodes(&self) -> Vec<usize> {
        self.order.iter().map(|&k| self.pick[k]).collect()
    }

    fn check_structure(&self, inst: &GtspInstance) -> Result<(), TourError> {
        let m = inst.m();
        if self.order.len() != m || self.pick.len() != m {
            return Err(TourError::WrongSize {
                got: self.order.len(),
                expected: m,
            });
        }
        let mut seen = vec![false; m];
        for &k in &self.order {
            if k >= m || std::mem::replace(&mut seen[k], true) {
                return Err(TourError::NotPermutation { m });
            }
        }
        for (k, &v) in self.pick.iter().enumerate() {
            if v >= inst.n() || inst.cluster_of(v) != k {
                return Err(TourError::ForeignPick { cluster: k, node: v });
            }
        }
        if self.pos.len() != m || self.order.iter().enumerate().any(|(i, &k)| self.pos[k] != i) {
            return Err(TourError::StalePositions);
        }
        Ok(())
    }

    /// Full feasibility check, including the cached cost.
    pub fn validate(&self, inst: &GtspInstance) -> Result<(), TourError> {
        self.check_structure(inst)?;
        let actual = tour_cost(inst, &self.order, &self.pick);
        if actual != self.cost {
            return Err(TourError::StaleCost {
                cached: self.cost,
                actual,
            });
        }
        Ok(())
    }

    fn check_two_opt(&self, x: usize, y: usize) -> Result<(), TourError> {
        let m = self.order.len();
        if !(x < y && y < m) {
            return Err(TourError::InvalidMove(format!(
                "2-opt positions ({x}, {y}) need x < y < {m}"
            )));
        }
        if x == 0 && y == m - 1 {
            return Err(TourError::InvalidMove("2-opt over the whole tour".into()));
        }
        Ok(())
    }

    /// Cost change of reversing the segment of positions `x..=y`.
    pub fn delta_two_opt(&self, inst: &GtspInstance, x: usize, y: usize) -> Result<i64, TourError> {
        self.check_two_opt(x, y)?;
        Ok(self.delta_two_opt_unchecked(inst, x, y))
    }

    /// [`Self::delta_two_opt`] without argument checks, for inner loops.
    #[inline]
    pub fn delta_two_opt_unchecked(&self, inst: &GtspInstance, x: usize, y: usize) -> i64 {
        let m = self.order.len();
        let before = self.node_at(x + m - 1);
        let first = self.node_at(x);
        let last = self.node_at(y);
        let after = self.node_at(y + 1);
        inst.dist(before, last) + inst.dist(first, after)
            - inst.dist(before, first)
            - inst.dist(last, after)
    }

    /// Reverses positions `x..=y`, carrying picks with their clusters.
    pub fn apply_two_opt(&mut self, inst: &GtspInstance, x: usize, y: usize) -> Result<i64, TourError> {
        let delta = self.delta_two_opt(inst, x, y)?;
        self.order[x..=y].reverse();
        for i in x..=y {
            self.pos[self.order[i]] = i;
        }
        self.cost += delta;
        Ok(delta)
    }

    fn check_swap(&self, u: usize, v: usize) -> Result<(), TourError> {
        let m = self.order.len();
        if u == v || u >= m || v >= m {
            return Err(TourError::InvalidMove(format!(
                "swap of clusters ({u}, {v}) needs two distinct clusters below {m}"
            )));
        }
        Ok(())
    }

    /// Indices of the tour edges touching positions `i` and `j`; edge `e`
    /// joins positions `e` and `e + 1`. Shared edges appear once.
    fn swap_edges(&self, i: usize, j: usize) -> ([usize; 4], usize) {
        let m = self.order.len();
        let mut edges = [usize::MAX; 4];
        let mut len = 0;
        for e in [(i + m - 1) % m, i, (j + m - 1) % m, j] {
            if !edges[..len].contains(&e) {
                edges[len] = e;
                len += 1;
            }
        }
        (edges, len)
    }

    /// Cost change of exchanging the tour positions of clusters `u` and `v`.
    pub fn delta_swap(&self, inst: &GtspInstance, u: usize, v: usize) -> Result<i64, TourError> {
        self.check_swap(u, v)?;
        Ok(self.delta_swap_unchecked(inst, u, v))
    }

    #[inline]
    pub fn delta_swap_unchecked(&self, inst: &GtspInstance, u: usize, v: usize) -> i64 {
        let m = self.order.len();
        let (i, j) = (self.pos[u], self.pos[v]);
        let (edges, len) = self.swap_edges(i, j);
        let node_after_swap = |p: usize| {
            let p = p % m;
            let k = if p == i {
                v
            } else if p == j {
                u
            } else {
                self.order[p]
            };
            self.pick[k]
        };
        let mut delta = 0;
        for &e in &edges[..len] {
            delta += inst.dist(node_after_swap(e), node_after_swap(e + 1));
            delta -= inst.dist(self.node_at(e), self.node_at(e + 1));
        }
        delta
    }

    /// Exchanges the positions of clusters `u` and `v`.
    pub fn apply_swap(&mut self, inst: &GtspInstance, u: usize, v: usize) -> Result<i64, TourError> {
        let delta = self.delta_swap(inst, u, v)?;
        let (i, j) = (self.pos[u], self.pos[v]);
        self.order.swap(i, j);
        self.pos.swap(u, v);
        self.cost += delta;
        Ok(delta)
    }

    /// Replaces the node choice, recomputing the cost.
    pub fn set_picks(&mut self, inst: &GtspInstance, pick: Vec<usize>) -> Result<(), TourError> {
        let old = std::mem::replace(&mut self.pick, pick);
        if let Err(e) = self.check_structure(inst) {
            self.pick = old;
            return Err(e);
        }
        self.cost = tour_cost(inst, &self.order, &self.pick);
        Ok(())
    }

    /// Rotation and direction-normalized cluster order: starts at cluster 0
    /// and continues toward the smaller of its two neighbours.
    pub fn canonical_order(&self) -> Vec<usize> {
        let m = self.order.len();
        if m < 3 {
            let mut o = self.order.clone();
            o.sort_unstable();
            return o;
        }
        let start = self.pos[0];
        let next = self.order[(start + 1) % m];
        let prev = self.order[(start + m - 1) % m];
        if next <= prev {
            (0..m).map(|i| self.order[(start + i) % m]).collect()
        } else {
            (0..m).map(|i| self.order[(start + m - i) % m]).collect()
        }
    }

    /// One-line form `cost ; c1:p1 c2:p2 …`, one-based, in visiting order.
    pub fn to_line(&self) -> String {
        let mut s = format!("{} ;", self.cost);
        for &k in &self.order {
            write!(s, " {}:{}", k + 1, self.pick[k] + 1).unwrap();
        }
        s
    }

    /// Parses [`Self::to_line`] output. The cost is recomputed; returns the
    /// tour and the cost written in the text.
    pub fn from_line(inst: &GtspInstance, line: &str) -> Result<(Self, i64), TourError> {
        let (cost, body) = line
            .split_once(';')
            .ok_or_else(|| TourError::Malformed("missing ';'".into()))?;
        let cost: i64 = cost
            .trim()
            .parse()
            .map_err(|_| TourError::Malformed(format!("bad cost '{}'", cost.trim())))?;
        let mut order = Vec::new();
        let mut pick = vec![usize::MAX; inst.m()];
        for item in body.split_whitespace() {
            let parsed = item
                .split_once(':')
                .and_then(|(c, p)| Some((c.parse::<usize>().ok()?, p.parse::<usize>().ok()?)));
            let Some((c, p)) = parsed.filter(|&(c, p)| c >= 1 && p >= 1 && c <= inst.m()) else {
                return Err(TourError::Malformed(format!("bad entry '{item}'")));
            };
            order.push(c - 1);
            pick[c - 1] = p - 1;
        }
        Ok((Self::new(inst, order, pick)?, cost))
    }
}

/// Best node choice for a fixed cyclic cluster order.
///
/// Layered shortest path: every node of the smallest cluster is tried as the
/// start, the path is relaxed layer by layer around the cycle and closed
/// back to the start. Ties keep the earliest start and predecessor.
pub fn cluster_optimization(inst: &GtspInstance, order: &[usize]) -> Tour {
    let m = order.len();
    assert_eq!(m, inst.m(), "order must visit every cluster");
    let pick = optimal_picks(inst, order);
    let pos = positions(order);
    let cost = tour_cost(inst, order, &pick);
    Tour {
        order: order.to_vec(),
        pick,
        pos,
        cost,
    }
}

fn optimal_picks(inst: &GtspInstance, order: &[usize]) -> Vec<usize> {
    let m = order.len();
    let mut pick = vec![0; m];
    if m == 1 {
        pick[order[0]] = inst.members(order[0])[0];
        return pick;
    }
    let shift = (0..m)
        .min_by_key(|&i| (inst.members(order[i]).len(), i))
        .unwrap();
    let layers: Vec<&[usize]> = (0..m).map(|i| inst.members(order[(shift + i) % m])).collect();

    let mut best_cost = i64::MAX;
    let mut best_path = Vec::new();
    // back[l][j]: index into layer l-1 of the predecessor of layer l node j
    let mut back: Vec<Vec<usize>> = layers.iter().map(|l| vec![0; l.len()]).collect();
    let mut cur: Vec<i64> = Vec::new();
    let mut next: Vec<i64> = Vec::new();
    for &start in layers[0] {
        cur.clear();
        cur.extend(layers[1].iter().map(|&v| inst.dist(start, v)));
        for l in 2..m {
            next.clear();
            for (j, &v) in layers[l].iter().enumerate() {
                let (mut arg, mut val) = (0, i64::MAX);
                for (i, &u) in layers[l - 1].iter().enumerate() {
                    let c = cur[i] + inst.dist(u, v);
                    if c < val {
                        val = c;
                        arg = i;
                    }
                }
                next.push(val);
                back[l][j] = arg;
            }
            std::mem::swap(&mut cur, &mut next);
        }
        let (mut arg, mut val) = (0, i64::MAX);
        for (i, &u) in layers[m - 1].iter().enumerate() {
            let c = cur[i] + inst.dist(u, start);
            if c < val {
                val = c;
                arg = i;
            }
        }
        if val < best_cost {
            best_cost = val;
            best_path.clear();
            let mut j = arg;
            for l in (1..m).rev() {
                best_path.push(layers[l][j]);
                if l > 1 {
                    j = back[l][j];
                }
            }
            best_path.push(start);
            best_path.reverse();
        }
    }
    for (i, &v) in best_path.iter().enumerate() {
        pick[order[(shift + i) % m]] = v;
    }
    pick
}

/// Double-bridge mutation: cuts the order into `A|B|C|D` and reassembles
/// `A|C|B|D`. Below eight clusters it rotates three segments `A|B|C` into
/// `A|C|B` instead.
pub fn double_bridge<R: Rng + ?Sized>(inst: &GtspInstance, tour: &Tour, rng: &mut R) -> Tour {
    let m = tour.len();
    let o = &tour.order;
    let order: Vec<usize> = if m >= 8 {
        let mut cuts = rand::seq::index::sample(rng, m - 1, 3).into_vec();
        cuts.iter_mut().for_each(|c| *c += 1);
        cuts.sort_unstable();
        let (a, b, c) = (cuts[0], cuts[1], cuts[2]);
        [&o[..a], &o[b..c], &o[a..b], &o[c..]].concat()
    } else if m >= 3 {
        let mut cuts = rand::seq::index::sample(rng, m - 1, 2).into_vec();
        cuts.iter_mut().for_each(|c| *c += 1);
        cuts.sort_unstable();
        let (a, b) = (cuts[0], cuts[1]);
        [&o[..a], &o[b..], &o[a..b]].concat()
    } else {
        o.clone()
    };
    let pos = positions(&order);
    let cost = tour_cost(inst, &order, &tour.pick);
    Tour {
        order,
        pick: tour.pick.clone(),
        pos,
        cost,
    }
}

/// Random cluster order with optimal node choice for that order.
pub fn semi_random_construction<R: Rng + ?Sized>(inst: &GtspInstance, rng: &mut R) -> Tour {
    let mut order: Vec<usize> = (0..inst.m()).collect();
    order.shuffle(rng);
    cluster_optimization(inst, &order)
}
