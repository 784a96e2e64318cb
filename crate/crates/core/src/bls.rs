//! Breakout local search over GTSP tours.
//!
//! Each outer iteration runs a best-improvement 2-opt descent (followed by
//! node re-selection with [`cluster_optimization`]) and then perturbs the
//! local optimum with a number of swap jumps. The jump count and the kind
//! of each jump adapt to how long the search has been stuck.

use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::time::Instant;

use rand::Rng;

use crate::instance::GtspInstance;
use crate::solution::{cluster_optimization, Tour};

/// Shared cancellation flag with an optional wall-clock deadline.
#[derive(Debug, Clone, Default)]
pub struct StopSignal {
    flag: Arc<AtomicBool>,
    deadline: Option<Instant>,
}

impl StopSignal {
    pub fn new() -> Self {
        Self::default()
    }

    /// A signal that also fires once `deadline` has passed.
    pub fn with_deadline(&self, deadline: Instant) -> Self {
        Self {
            flag: Arc::clone(&self.flag),
            deadline: Some(self.deadline.map_or(deadline, |d| d.min(deadline))),
        }
    }

    pub fn stop(&self) {
        self.flag.store(true, Ordering::Relaxed);
    }

    pub fn is_stopped(&self) -> bool {
        self.flag.load(Ordering::Relaxed) || self.deadline.is_some_and(|d| Instant::now() >= d)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("invalid parameter {name}: {msg}")]
pub struct ParamError {
    pub name: &'static str,
    pub msg: String,
}

/// Tunables of the search.
#[derive(Debug, Clone, PartialEq)]
pub struct BlsParams {
    /// Jumps per ordinary perturbation right after escaping a local optimum.
    pub initial_jumps: usize,
    /// Jumps of a strong perturbation, and the cap for ordinary ones.
    pub max_jumps: usize,
    /// Consecutive non-improving local optima tolerated before a strong
    /// perturbation.
    pub stagnation_limit: usize,
    /// Iterations during which a recently swapped cluster pair stays tabu.
    pub tabu_tenure: u64,
    /// Lower bound on the probability of a directed jump.
    pub directed_floor: f64,
    /// Share of non-directed jumps that are recency-based.
    pub recency_share: f64,
    /// Descents per run.
    pub max_descents: usize,
    /// Candidate pairs sampled per jump.
    pub sample_size: usize,
    /// Scan every cluster pair instead of sampling.
    pub exhaustive_candidates: bool,
}

impl BlsParams {
    /// Defaults for an instance with `m` clusters.
    pub fn for_clusters(m: usize) -> Self {
        Self {
            initial_jumps: 3,
            max_jumps: 6.max((0.4 * m as f64).ceil() as usize),
            stagnation_limit: 10,
            tabu_tenure: m as u64,
            directed_floor: 0.75,
            recency_share: 0.7,
            max_descents: 200,
            sample_size: m.max(1),
            exhaustive_candidates: false,
        }
    }

    pub fn validate(&self) -> Result<(), ParamError> {
        let fail = |name, msg: &str| {
            Err(ParamError {
                name,
                msg: msg.to_string(),
            })
        };
        if self.initial_jumps == 0 {
            return fail("initial_jumps", "must be positive");
        }
        if self.max_jumps < self.initial_jumps {
            return fail("max_jumps", "must be at least initial_jumps");
        }
        if self.stagnation_limit == 0 {
            return fail("stagnation_limit", "must be positive");
        }
        if self.tabu_tenure == 0 {
            return fail("tabu_tenure", "must be positive");
        }
        if !(self.directed_floor > 0.0 && self.directed_floor <= 1.0) {
            return fail("directed_floor", "must lie in (0, 1]");
        }
        if !(0.0..=1.0).contains(&self.recency_share) {
            return fail("recency_share", "must lie in [0, 1]");
        }
        if self.max_descents == 0 {
            return fail("max_descents", "must be positive");
        }
        if self.sample_size == 0 {
            return fail("sample_size", "must be positive");
        }
        Ok(())
    }
}

/// Iteration at which each cluster pair was last moved; symmetric.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HistoryMatrix {
    m: usize,
    stamps: Vec<u64>,
}

impl HistoryMatrix {
    pub fn new(m: usize) -> Self {
        Self {
            m,
            stamps: vec![0; m * m],
        }
    }

    #[inline]
    pub fn get(&self, u: usize, v: usize) -> u64 {
        self.stamps[u * self.m + v]
    }

    pub fn stamp(&mut self, u: usize, v: usize, iter: u64) {
        self.stamps[u * self.m + v] = iter;
        self.stamps[v * self.m + u] = iter;
    }

    pub fn size(&self) -> usize {
        self.m
    }
}

/// Live counters of a run.
#[derive(Debug, Clone)]
pub struct BlsState {
    /// Consecutive local optima without a new best.
    pub omega: usize,
    /// Jumps of the next ordinary perturbation.
    pub jumps: usize,
    /// Global move counter (descent moves and perturbation jumps).
    pub iter: u64,
    pub descents: usize,
    /// Cost of the previous local optimum.
    pub prev_cost: i64,
    pub best: Tour,
}

impl BlsState {
    pub fn new(start: &Tour, params: &BlsParams) -> Self {
        Self {
            omega: 0,
            jumps: params.initial_jumps,
            iter: 0,
            descents: 0,
            prev_cost: start.cost(),
            best: start.clone(),
        }
    }

    pub fn best_cost(&self) -> i64 {
        self.best.cost()
    }
}

/// Best-improvement 2-opt descent on cluster positions.
///
/// Applies the most negative move until none improves; ties go to the
/// lexicographically smallest `(x, y)`. Each move stamps the cluster pair at
/// the segment ends and advances `state.iter`. Returns the number of moves.
pub fn descend(tour: &mut Tour, history: &mut HistoryMatrix, state: &mut BlsState, inst: &GtspInstance) -> usize {
    let m = tour.len();
    if m < 4 {
        // Every 2-opt move on three or fewer clusters leaves the cycle unchanged.
        return 0;
    }
    let mut moves = 0;
    loop {
        let mut best = (0, 0, 0);
        for x in 0..m - 1 {
            let y_end = if x == 0 { m - 1 } else { m };
            for y in (x + 1)..y_end {
                let d = tour.delta_two_opt_unchecked(inst, x, y);
                if d < best.2 {
                    best = (x, y, d);
                }
            }
        }
        if best.2 >= 0 {
            return moves;
        }
        let (x, y, _) = best;
        let (u, v) = (tour.order()[x], tour.order()[y]);
        tour.apply_two_opt(inst, x, y).expect("scanned move is valid");
        history.stamp(u, v, state.iter);
        state.iter += 1;
        moves += 1;
    }
}

/// Alternates descent and node re-selection until neither improves.
fn local_search(tour: &mut Tour, history: &mut HistoryMatrix, state: &mut BlsState, inst: &GtspInstance) {
    loop {
        descend(tour, history, state, inst);
        let reselected = cluster_optimization(inst, tour.order());
        if reselected.cost() >= tour.cost() {
            return;
        }
        *tour = reselected;
    }
}

/// Probability of a directed jump: `exp(-omega / T)`, floored at `p0`.
pub fn probability_directed(omega: usize, stagnation_limit: usize, p0: f64) -> f64 {
    let p = (-(omega as f64) / stagnation_limit as f64).exp();
    if p > p0 {
        p
    } else {
        p0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PerturbationKind {
    /// Least-degrading non-tabu swaps (or swaps that beat the best).
    Directed,
    /// Swaps of the least recently moved cluster pairs.
    Recency,
    /// Any swap.
    Random,
}

pub fn choose_perturbation_kind<R: Rng + ?Sized>(omega: usize, params: &BlsParams, rng: &mut R) -> PerturbationKind {
    let p = probability_directed(omega, params.stagnation_limit, params.directed_floor);
    let r: f64 = rng.gen();
    if r < p {
        PerturbationKind::Directed
    } else if r < p + (1.0 - p) * params.recency_share {
        PerturbationKind::Recency
    } else {
        PerturbationKind::Random
    }
}

/// A swap of two clusters' tour positions, stored with `u < v`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SwapMove {
    pub u: usize,
    pub v: usize,
}

impl SwapMove {
    pub fn new(a: usize, b: usize) -> Self {
        Self {
            u: a.min(b),
            v: a.max(b),
        }
    }
}

fn all_pairs(m: usize) -> Vec<SwapMove> {
    (0..m)
        .flat_map(|u| ((u + 1)..m).map(move |v| SwapMove { u, v }))
        .collect()
}

/// Candidate swaps for one jump of the given kind.
///
/// Draws `sample_size` random pairs (or every pair when
/// `exhaustive_candidates` is set) and filters them:
/// directed keeps the admissible pairs of minimal cost change, where a pair
/// is admissible if it is not tabu or would produce a new best; recency
/// keeps pairs with the oldest history stamp; random keeps everything. When
/// no sampled pair is admissible, the directed set falls back to the pairs
/// of minimal cost change regardless of tabu status.
pub fn sample_candidates<R: Rng + ?Sized>(
    kind: PerturbationKind,
    tour: &Tour,
    history: &HistoryMatrix,
    state: &BlsState,
    params: &BlsParams,
    inst: &GtspInstance,
    rng: &mut R,
) -> Vec<SwapMove> {
    let m = tour.len();
    if m < 2 {
        return Vec::new();
    }
    let pool: Vec<SwapMove> = if params.exhaustive_candidates {
        all_pairs(m)
    } else {
        (0..params.sample_size)
            .map(|_| {
                let a = rng.gen_range(0..m);
                let mut b = rng.gen_range(0..m - 1);
                if b >= a {
                    b += 1;
                }
                SwapMove::new(a, b)
            })
            .collect()
    };
    match kind {
        PerturbationKind::Random => pool,
        PerturbationKind::Recency => {
            let oldest = pool.iter().map(|mv| history.get(mv.u, mv.v)).min().unwrap();
            pool.into_iter()
                .filter(|mv| history.get(mv.u, mv.v) == oldest)
                .collect()
        }
        PerturbationKind::Directed => {
            let scored: Vec<(SwapMove, i64, bool)> = pool
                .into_iter()
                .map(|mv| {
                    let delta = tour.delta_swap_unchecked(inst, mv.u, mv.v);
                    let free = history.get(mv.u, mv.v) + params.tabu_tenure < state.iter;
                    let aspires = tour.cost() + delta < state.best_cost();
                    (mv, delta, free || aspires)
                })
                .collect();
            let any_admissible = scored.iter().any(|s| s.2);
            let keep = |s: &&(SwapMove, i64, bool)| s.2 || !any_admissible;
            let min_delta = scored.iter().filter(keep).map(|s| s.1).min().unwrap();
            scored
                .iter()
                .filter(keep)
                .filter(|s| s.1 == min_delta)
                .map(|s| s.0)
                .collect()
        }
    }
}

/// Applies `jumps` swap jumps to `tour`.
///
/// Every jump picks a kind (or uses `forced`), builds its candidate set,
/// applies one candidate chosen uniformly, stamps the history and advances
/// `state.iter`. A jump that beats the best tour updates it and resets
/// `state.omega`.
#[allow(clippy::too_many_arguments)]
pub fn perturb<R: Rng + ?Sized>(
    tour: &mut Tour,
    jumps: usize,
    forced: Option<PerturbationKind>,
    history: &mut HistoryMatrix,
    state: &mut BlsState,
    params: &BlsParams,
    inst: &GtspInstance,
    rng: &mut R,
) {
    if tour.len() < 2 {
        return;
    }
    for _ in 0..jumps {
        let kind = forced.unwrap_or_else(|| choose_perturbation_kind(state.omega, params, rng));
        let candidates = sample_candidates(kind, tour, history, state, params, inst, rng);
        let mv = candidates[rng.gen_range(0..candidates.len())];
        tour.apply_swap(inst, mv.u, mv.v).expect("candidate swap is valid");
        history.stamp(mv.u, mv.v, state.iter);
        state.iter += 1;
        if tour.cost() < state.best_cost() {
            state.best = tour.clone();
            state.omega = 0;
        }
    }
}

/// What happened around one descent, for instrumentation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DescentRecord {
    /// Cost of the local optimum reached by this descent.
    pub local_cost: i64,
    pub best_before: i64,
    pub omega_before: usize,
    pub jumps_before: usize,
    pub prev_cost_before: i64,
    /// Counters after the restart logic, before the ordinary perturbation.
    pub omega_after: usize,
    pub jumps_after: usize,
    pub strong: bool,
    /// Whether an ordinary perturbation followed.
    pub perturbed: bool,
    /// `omega` once this outer iteration is over.
    pub omega_end: usize,
    pub best_end: i64,
}

#[derive(Debug, Clone)]
pub struct BlsOutcome {
    pub best: Tour,
    pub descents: usize,
    pub iterations: u64,
}

/// Runs breakout local search from `start`.
///
/// Stops after `max_descents` descents, when `stop` fires, or when the
/// instance's best-known cost is reached. The returned tour is a 2-opt and
/// node-selection local optimum.
pub fn bls_run<R: Rng + ?Sized>(
    start: Tour,
    params: &BlsParams,
    inst: &GtspInstance,
    rng: &mut R,
    stop: &StopSignal,
) -> BlsOutcome {
    bls_run_traced(start, params, inst, rng, stop, None)
}

/// [`bls_run`] that also appends one [`DescentRecord`] per descent.
pub fn bls_run_traced<R: Rng + ?Sized>(
    start: Tour,
    params: &BlsParams,
    inst: &GtspInstance,
    rng: &mut R,
    stop: &StopSignal,
    mut trace: Option<&mut Vec<DescentRecord>>,
) -> BlsOutcome {
    let mut tour = start;
    let mut history = HistoryMatrix::new(tour.len());
    let mut state = BlsState::new(&tour, params);
    let reached = |state: &BlsState| inst.best_known().is_some_and(|b| state.best_cost() <= b);

    while state.descents < params.max_descents && !stop.is_stopped() && !reached(&state) {
        local_search(&mut tour, &mut history, &mut state, inst);
        state.descents += 1;
        let c = tour.cost();
        let mut record = DescentRecord {
            local_cost: c,
            best_before: state.best_cost(),
            omega_before: state.omega,
            jumps_before: state.jumps,
            prev_cost_before: state.prev_cost,
            omega_after: 0,
            jumps_after: 0,
            strong: false,
            perturbed: false,
            omega_end: 0,
            best_end: 0,
        };

        if c < state.best_cost() {
            state.best = tour.clone();
            state.omega = 0;
        } else {
            state.omega += 1;
        }

        let strong = state.omega > params.stagnation_limit;
        if strong {
            perturb(
                &mut tour,
                params.max_jumps,
                Some(PerturbationKind::Random),
                &mut history,
                &mut state,
                params,
                inst,
                rng,
            );
            state.omega = 0;
        } else if c == state.prev_cost {
            state.jumps = (state.jumps + 1).min(params.max_jumps);
        } else {
            state.jumps = params.initial_jumps;
        }
        // The previous-optimum cost is the descent's result, not the
        // strongly perturbed cost.
        state.prev_cost = c;
        record.omega_after = state.omega;
        record.jumps_after = state.jumps;
        record.strong = strong;

        // A trailing perturbation would be discarded, so the final
        // iteration skips it.
        let last = state.descents >= params.max_descents || reached(&state);
        if !strong && !last {
            record.perturbed = true;
            let jumps = state.jumps;
            perturb(&mut tour, jumps, None, &mut history, &mut state, params, inst, rng);
        }
        record.omega_end = state.omega;
        record.best_end = state.best_cost();
        if let Some(t) = trace.as_deref_mut() {
            t.push(record);
        }
    }

    // A best found mid-perturbation is not yet a local optimum.
    let mut best = state.best.clone();
    let mut scratch = HistoryMatrix::new(best.len());
    local_search(&mut best, &mut scratch, &mut state, inst);
    BlsOutcome {
        best,
        descents: state.descents,
        iterations: state.iter,
    }
}

/// Whether any 2-opt move would lower the tour cost.
pub fn has_improving_two_opt(tour: &Tour, inst: &GtspInstance) -> bool {
    let m = tour.len();
    (0..m).any(|x| {
        ((x + 1)..m)
            .filter(|&y| !(x == 0 && y == m - 1))
            .any(|y| tour.delta_two_opt_unchecked(inst, x, y) < 0)
    })
}
