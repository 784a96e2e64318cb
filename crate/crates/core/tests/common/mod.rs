//! Independent oracles shared by the integration tests and the acceptance
//! binary. Nothing here calls the solver's own cost or delta code.
#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::PathBuf;

use mbls::bls::{
    bls_run_traced, descend, has_improving_two_opt, perturb, sample_candidates, BlsParams, BlsState, DescentRecord,
    HistoryMatrix, PerturbationKind, StopSignal, SwapMove,
};
use mbls::instance::{GtspInstance, NodeSet, WeightKind};
use mbls::memetic::{uniform_crossover, Genome};
use mbls::solution::{cluster_optimization, double_bridge, semi_random_construction, Tour};
use rand::seq::SliceRandom;
use rand::Rng;

pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

/// Rows of the published benchmark table: name, nodes, clusters, best cost.
pub const TABLE: &[(&str, usize, usize, i64)] = &[
    ("10att48", 48, 10, 5394),
    ("10gr48", 48, 10, 1834),
    ("10hk48", 48, 10, 6386),
    ("11eil51", 51, 11, 174),
    ("11berlin52", 52, 11, 4040),
    ("12brazil58", 58, 12, 15332),
    ("14st70", 70, 14, 316),
    ("16eil76", 76, 16, 209),
    ("16pr76", 76, 16, 64925),
    ("20gr96", 96, 20, 29440),
    ("20kroA100", 100, 20, 9711),
    ("20kroB100", 100, 20, 10328),
    ("20kroC100", 100, 20, 9554),
    ("20kroD100", 100, 20, 9450),
    ("20kroE100", 100, 20, 9523),
    ("20rat99", 99, 20, 497),
    ("20rd100", 100, 20, 3650),
    ("21eil101", 101, 21, 249),
    ("21lin105", 105, 21, 8213),
    ("22pr107", 107, 22, 27898),
    ("24gr120", 120, 24, 2769),
    ("25pr124", 124, 25, 36605),
    ("26ch130", 130, 26, 2828),
    ("26bier127", 127, 26, 72418),
    ("28gr137", 137, 28, 36417),
    ("28pr136", 136, 28, 42570),
    ("29pr144", 144, 29, 45886),
    ("30ch150", 150, 30, 2750),
    ("30kroA150", 150, 30, 11018),
    ("30kroB150", 150, 30, 12196),
    ("31pr152", 152, 31, 51576),
    ("32u159", 159, 32, 22664),
    ("39rat195", 195, 39, 854),
    ("40d198", 198, 40, 10557),
    ("40kroA200", 200, 40, 13406),
    ("40kroB200", 200, 40, 13111),
    ("41gr202", 202, 41, 23301),
    ("45ts225", 225, 45, 68340),
    ("46gr229", 229, 46, 71972),
    ("46pr226", 226, 46, 64007),
    ("53gil262", 262, 53, 1013),
    ("53pr264", 264, 53, 29549),
    ("56a280", 280, 56, 1079),
    ("60pr299", 299, 60, 22615),
    ("64lin318", 318, 64, 20765),
    ("80rd400", 400, 80, 6361),
    ("84fl417", 417, 84, 9651),
    ("88pr439", 439, 88, 60099),
    ("89pcb442", 442, 89, 21657),
];

/// TSPLIB file for a table row, e.g. `20kroA100` -> `kroa100.tsp`.
pub fn tsplib_path(row_name: &str) -> PathBuf {
    let base = row_name.trim_start_matches(|c: char| c.is_ascii_digit());
    data_dir().join("tsplib").join(format!("{}.tsp", base.to_ascii_lowercase()))
}

/// Rounded Euclidean distance computed straight from coordinates.
pub fn oracle_dist(kind: WeightKind, a: (f64, f64), b: (f64, f64)) -> i64 {
    let d = ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt();
    match kind {
        WeightKind::Euc2d => (d + 0.5).floor() as i64,
        WeightKind::Ceil2d => d.ceil() as i64,
        other => panic!("no oracle for {other:?}"),
    }
}

/// Cycle cost over the visited nodes, from raw coordinates.
pub fn oracle_cost(inst: &GtspInstance, order: &[usize], pick: &[usize]) -> i64 {
    let coords = inst.nodes().coords().expect("oracle needs coordinates");
    let kind = inst.nodes().kind();
    let m = order.len();
    (0..m)
        .map(|i| {
            let a = pick[order[i]];
            let b = pick[order[(i + 1) % m]];
            oracle_dist(kind, coords[a], coords[b])
        })
        .sum()
}

pub fn tour_oracle_cost(inst: &GtspInstance, t: &Tour) -> i64 {
    oracle_cost(inst, t.order(), t.picks())
}

/// Random instance with integer coordinates; every cluster is non-empty.
pub fn random_instance<R: Rng>(rng: &mut R, n: usize, m: usize, kind: WeightKind) -> GtspInstance {
    assert!(m >= 1 && m <= n);
    let pts: Vec<(f64, f64)> = (0..n)
        .map(|_| (rng.gen_range(0..1000) as f64, rng.gen_range(0..1000) as f64))
        .collect();
    let mut ids: Vec<usize> = (0..n).collect();
    ids.shuffle(rng);
    let mut sets: Vec<Vec<usize>> = ids[..m].iter().map(|&v| vec![v]).collect();
    for &v in &ids[m..] {
        sets[rng.gen_range(0..m)].push(v);
    }
    let nodes = NodeSet::from_coords("rand", kind, pts).unwrap();
    GtspInstance::new("rand", nodes, sets).unwrap()
}

pub fn random_tour<R: Rng>(rng: &mut R, inst: &GtspInstance) -> Tour {
    let mut order: Vec<usize> = (0..inst.m()).collect();
    order.shuffle(rng);
    let pick = (0..inst.m())
        .map(|k| *inst.members(k).choose(rng).unwrap())
        .collect();
    Tour::new(inst, order, pick).unwrap()
}

/// Minimum cycle cost over every node choice for a fixed cluster order.
pub fn brute_force_co(inst: &GtspInstance, order: &[usize]) -> i64 {
    let m = inst.m();
    let mut idx = vec![0usize; m];
    let mut best = i64::MAX;
    loop {
        let pick: Vec<usize> = (0..m).map(|k| inst.members(k)[idx[k]]).collect();
        best = best.min(oracle_cost(inst, order, &pick));
        let mut k = 0;
        loop {
            if k == m {
                return best;
            }
            idx[k] += 1;
            if idx[k] < inst.members(k).len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

/// Node-selection optimum equals exhaustive enumeration.
pub fn check_cluster_optimization<R: Rng>(rng: &mut R, trials: usize) -> Result<(), String> {
    for t in 0..trials {
        let m = rng.gen_range(1..=5);
        let n = rng.gen_range(m..=12);
        let inst = random_instance(rng, n, m, WeightKind::Euc2d);
        let mut order: Vec<usize> = (0..m).collect();
        order.shuffle(rng);
        let tour = cluster_optimization(&inst, &order);
        let want = brute_force_co(&inst, &order);
        if tour.cost() != want || tour_oracle_cost(&inst, &tour) != want {
            return Err(format!("trial {t}: got {} expected {want}", tour.cost()));
        }
        if !same_cycle(tour.order(), &order) {
            return Err(format!("trial {t}: order changed"));
        }
    }
    Ok(())
}

/// Whether two orders describe the same cycle up to rotation.
pub fn same_cycle(a: &[usize], b: &[usize]) -> bool {
    if a.len() != b.len() {
        return false;
    }
    if a.is_empty() {
        return true;
    }
    let Some(s) = b.iter().position(|&x| x == a[0]) else {
        return false;
    };
    (0..a.len()).all(|i| a[i] == b[(s + i) % b.len()])
}

pub fn check_two_opt_deltas<R: Rng>(rng: &mut R, trials: usize) -> Result<(), String> {
    for t in 0..trials {
        let m = rng.gen_range(4..=25);
        let n = rng.gen_range(m..=3 * m);
        let inst = random_instance(rng, n, m, WeightKind::Euc2d);
        let tour = random_tour(rng, &inst);
        let (x, y) = loop {
            let x = rng.gen_range(0..m - 1);
            let y = rng.gen_range(x + 1..m);
            if !(x == 0 && y == m - 1) {
                break (x, y);
            }
        };
        let delta = tour.delta_two_opt(&inst, x, y).map_err(|e| e.to_string())?;
        let mut order = tour.order().to_vec();
        order[x..=y].reverse();
        let want = oracle_cost(&inst, &order, tour.picks()) - tour_oracle_cost(&inst, &tour);
        if delta != want {
            return Err(format!("trial {t}: 2-opt ({x},{y}) delta {delta} expected {want}"));
        }
        let mut moved = tour.clone();
        moved.apply_two_opt(&inst, x, y).map_err(|e| e.to_string())?;
        if moved.order() != order.as_slice() || moved.cost() != tour.cost() + want {
            return Err(format!("trial {t}: apply_two_opt disagrees"));
        }
    }
    Ok(())
}

pub fn check_swap_deltas<R: Rng>(rng: &mut R, trials: usize) -> Result<(), String> {
    for t in 0..trials {
        let m = rng.gen_range(2..=25);
        let n = rng.gen_range(m..=3 * m);
        let inst = random_instance(rng, n, m, WeightKind::Euc2d);
        let tour = random_tour(rng, &inst);
        let u = rng.gen_range(0..m);
        let v = (u + rng.gen_range(1..m)) % m;
        let delta = tour.delta_swap(&inst, u, v).map_err(|e| e.to_string())?;
        let order = swapped_order(&tour, u, v);
        let want = oracle_cost(&inst, &order, tour.picks()) - tour_oracle_cost(&inst, &tour);
        if delta != want {
            return Err(format!("trial {t}: swap ({u},{v}) delta {delta} expected {want}"));
        }
        let mut moved = tour.clone();
        moved.apply_swap(&inst, u, v).map_err(|e| e.to_string())?;
        if moved.order() != order.as_slice() || moved.cost() != tour.cost() + want {
            return Err(format!("trial {t}: apply_swap disagrees"));
        }
    }
    Ok(())
}

fn swapped_order(tour: &Tour, u: usize, v: usize) -> Vec<usize> {
    tour.order()
        .iter()
        .map(|&k| if k == u { v } else if k == v { u } else { k })
        .collect()
}

/// Expected candidate sets over every cluster pair, by full recomputation.
pub fn brute_force_candidates(
    kind: PerturbationKind,
    tour: &Tour,
    history: &HistoryMatrix,
    state: &BlsState,
    params: &BlsParams,
    inst: &GtspInstance,
) -> BTreeSet<SwapMove> {
    let m = inst.m();
    let pairs: Vec<SwapMove> = (0..m)
        .flat_map(|u| (u + 1..m).map(move |v| SwapMove { u, v }))
        .collect();
    match kind {
        PerturbationKind::Random => pairs.into_iter().collect(),
        PerturbationKind::Recency => {
            let oldest = pairs.iter().map(|p| history.get(p.u, p.v)).min().unwrap();
            pairs.into_iter().filter(|p| history.get(p.u, p.v) == oldest).collect()
        }
        PerturbationKind::Directed => {
            let current = tour_oracle_cost(inst, tour);
            let best = tour_oracle_cost(inst, &state.best);
            let scored: Vec<(SwapMove, i64, bool)> = pairs
                .into_iter()
                .map(|p| {
                    let after = oracle_cost(inst, &swapped_order(tour, p.u, p.v), tour.picks());
                    let tabu = history.get(p.u, p.v) + params.tabu_tenure >= state.iter;
                    (p, after - current, !tabu || after < best)
                })
                .collect();
            let pool: Vec<_> = if scored.iter().any(|s| s.2) {
                scored.into_iter().filter(|s| s.2).collect()
            } else {
                scored
            };
            let min = pool.iter().map(|s| s.1).min().unwrap();
            pool.into_iter().filter(|s| s.1 == min).map(|s| s.0).collect()
        }
    }
}

/// Exhaustive candidate sets equal the brute-force sets on small instances.
pub fn check_candidate_sets<R: Rng>(rng: &mut R, trials: usize) -> Result<(), String> {
    for t in 0..trials {
        let m = rng.gen_range(2..=6);
        let n = rng.gen_range(m..=2 * m + 2);
        let inst = random_instance(rng, n, m, WeightKind::Euc2d);
        let tour = random_tour(rng, &inst);
        let mut params = BlsParams::for_clusters(m);
        params.exhaustive_candidates = true;
        params.tabu_tenure = rng.gen_range(1..=2 * m as u64);
        let mut history = HistoryMatrix::new(m);
        let iter = rng.gen_range(0..30u64);
        for u in 0..m {
            for v in u + 1..m {
                if rng.gen_bool(0.7) {
                    history.stamp(u, v, rng.gen_range(0..=iter));
                }
            }
        }
        let mut state = BlsState::new(&tour, &params);
        state.iter = iter;
        if rng.gen_bool(0.5) {
            state.best = random_tour(rng, &inst);
        }
        for kind in [PerturbationKind::Directed, PerturbationKind::Recency, PerturbationKind::Random] {
            let got: Vec<SwapMove> = sample_candidates(kind, &tour, &history, &state, &params, &inst, rng);
            let got_set: BTreeSet<SwapMove> = got.iter().copied().collect();
            let want = brute_force_candidates(kind, &tour, &history, &state, &params, &inst);
            if got_set != want || got.len() != got_set.len() {
                return Err(format!("trial {t}: {kind:?} set {got:?} expected {want:?}"));
            }
        }
    }
    Ok(())
}

/// A descent leaves no improving 2-opt move under an exhaustive scan.
pub fn check_descent_optimality<R: Rng>(rng: &mut R, trials: usize) -> Result<(), String> {
    for t in 0..trials {
        let m = rng.gen_range(2..=40);
        let n = rng.gen_range(m..=3 * m);
        let inst = random_instance(rng, n, m, WeightKind::Euc2d);
        let mut tour = random_tour(rng, &inst);
        let params = BlsParams::for_clusters(m);
        let mut history = HistoryMatrix::new(m);
        let mut state = BlsState::new(&tour, &params);
        descend(&mut tour, &mut history, &mut state, &inst);
        tour.validate(&inst).map_err(|e| format!("trial {t}: {e}"))?;
        if tour.cost() != tour_oracle_cost(&inst, &tour) {
            return Err(format!("trial {t}: cached cost is stale"));
        }
        if has_improving_two_opt(&tour, &inst) || exhaustive_improving_reversal(&inst, &tour) {
            return Err(format!("trial {t}: descent left an improving move"));
        }
    }
    Ok(())
}

fn exhaustive_improving_reversal(inst: &GtspInstance, tour: &Tour) -> bool {
    let m = tour.len();
    let base = tour_oracle_cost(inst, tour);
    (0..m).any(|x| {
        (x + 1..m).any(|y| {
            let mut order = tour.order().to_vec();
            order[x..=y].reverse();
            oracle_cost(inst, &order, tour.picks()) < base
        })
    })
}

/// Checks the restart and jump-length rules on a recorded run.
pub fn check_trace(trace: &[DescentRecord], params: &BlsParams) -> Result<(), String> {
    for (i, r) in trace.iter().enumerate() {
        let improved = r.local_cost < r.best_before;
        let omega = if improved { 0 } else { r.omega_before + 1 };
        let strong = omega > params.stagnation_limit;
        if r.strong != strong {
            return Err(format!("descent {i}: strong flag {} expected {strong}", r.strong));
        }
        let (want_omega, want_jumps) = if strong {
            (0, r.jumps_before)
        } else if r.local_cost == r.prev_cost_before {
            (omega, (r.jumps_before + 1).min(params.max_jumps))
        } else {
            (omega, params.initial_jumps)
        };
        if r.omega_after != want_omega || r.jumps_after != want_jumps {
            return Err(format!(
                "descent {i}: (omega, L) = ({}, {}) expected ({want_omega}, {want_jumps})",
                r.omega_after, r.jumps_after
            ));
        }
        if r.jumps_after < params.initial_jumps || r.jumps_after > params.max_jumps {
            return Err(format!("descent {i}: L = {} out of range", r.jumps_after));
        }
        let best_mid = r.best_before.min(r.local_cost);
        if r.best_end > best_mid {
            return Err(format!("descent {i}: best cost rose"));
        }
        let want_end = if r.best_end < best_mid { 0 } else { r.omega_after };
        if r.omega_end != want_end {
            return Err(format!("descent {i}: omega at end {} expected {want_end}", r.omega_end));
        }
        if let Some(next) = trace.get(i + 1) {
            if next.prev_cost_before != r.local_cost || next.best_before != r.best_end || next.omega_before != r.omega_end
            {
                return Err(format!("descent {i}: state not carried to the next descent"));
            }
            if next.jumps_before != r.jumps_after {
                return Err(format!("descent {i}: L not carried to the next descent"));
            }
        }
    }
    Ok(())
}

/// Runs traced searches on random instances and checks every record.
pub fn check_traces<R: Rng>(rng: &mut R, runs: usize) -> Result<usize, String> {
    let mut records = 0;
    let mut strong = 0;
    for t in 0..runs {
        let m = rng.gen_range(5..=30);
        let n = rng.gen_range(m..=3 * m);
        let inst = random_instance(rng, n, m, WeightKind::Euc2d);
        let mut params = BlsParams::for_clusters(m);
        params.stagnation_limit = rng.gen_range(1..=6);
        params.max_descents = 150;
        let start = random_tour(rng, &inst);
        let mut trace = Vec::new();
        let out = bls_run_traced(start, &params, &inst, rng, &StopSignal::new(), Some(&mut trace));
        check_trace(&trace, &params).map_err(|e| format!("run {t}: {e}"))?;
        if out.best.cost() > trace.last().unwrap().best_end || out.best.cost() != tour_oracle_cost(&inst, &out.best) {
            return Err(format!("run {t}: returned tour disagrees with the trace"));
        }
        records += trace.len();
        strong += trace.iter().filter(|r| r.strong).count();
    }
    if strong == 0 {
        return Err("no strong perturbation was exercised".into());
    }
    Ok(records)
}

/// Perturbation jumps never break feasibility and keep the best tour honest.
pub fn check_perturbation_feasibility<R: Rng>(rng: &mut R, trials: usize) -> Result<(), String> {
    for t in 0..trials {
        let m = rng.gen_range(2..=15);
        let n = m + rng.gen_range(0..m);
        let inst = random_instance(rng, n, m, WeightKind::Euc2d);
        let mut tour = random_tour(rng, &inst);
        let params = BlsParams::for_clusters(m);
        let mut history = HistoryMatrix::new(m);
        let mut state = BlsState::new(&tour, &params);
        state.omega = rng.gen_range(0..20);
        let start = tour.cost();
        perturb(&mut tour, 5, None, &mut history, &mut state, &params, &inst, rng);
        tour.validate(&inst).map_err(|e| format!("trial {t}: {e}"))?;
        state.best.validate(&inst).map_err(|e| format!("trial {t}: best: {e}"))?;
        if state.iter != 5 || state.best_cost() > start.min(tour.cost()) {
            return Err(format!("trial {t}: bookkeeping off"));
        }
    }
    Ok(())
}

/// Applies `ops` random operators, validating the tour after each one.
pub fn fuzz_operators<R: Rng>(rng: &mut R, ops: usize) -> Result<(), String> {
    let mut done = 0;
    while done < ops {
        let m = rng.gen_range(1..=30);
        let n = m + rng.gen_range(0..2 * m + 1);
        let inst = random_instance(rng, n, m, WeightKind::Euc2d);
        let params = BlsParams::for_clusters(m);
        let mut tour = semi_random_construction(&inst, rng);
        let mut history = HistoryMatrix::new(m);
        let mut state = BlsState::new(&tour, &params);
        let batch = 2000.min(ops - done);
        for step in 0..batch {
            let op = rng.gen_range(0..8);
            match op {
                0 if m >= 3 => {
                    let x = rng.gen_range(0..m - 1);
                    let y = rng.gen_range(x + 1..m);
                    if !(x == 0 && y == m - 1) {
                        tour.apply_two_opt(&inst, x, y).map_err(|e| e.to_string())?;
                    }
                }
                1 if m >= 2 => {
                    let u = rng.gen_range(0..m);
                    let v = (u + rng.gen_range(1..m)) % m;
                    tour.apply_swap(&inst, u, v).map_err(|e| e.to_string())?;
                }
                2 => {
                    let pick = (0..m).map(|k| *inst.members(k).choose(rng).unwrap()).collect();
                    tour.set_picks(&inst, pick).map_err(|e| e.to_string())?;
                }
                3 => tour = cluster_optimization(&inst, tour.order()),
                4 => tour = double_bridge(&inst, &tour, rng),
                5 => {
                    let other = random_tour(rng, &inst);
                    let (a, b) = uniform_crossover(&Genome::encode(&tour), &Genome::encode(&other), rng);
                    tour = if rng.gen_bool(0.5) { a.decode(&inst) } else { b.decode(&inst) };
                }
                6 => perturb(&mut tour, 1, None, &mut history, &mut state, &params, &inst, rng),
                _ => {
                    if rng.gen_bool(0.05) {
                        descend(&mut tour, &mut history, &mut state, &inst);
                    }
                }
            }
            tour.validate(&inst)
                .map_err(|e| format!("operator {op} at step {}: {e}", done + step))?;
            if tour.cost() != tour_oracle_cost(&inst, &tour) {
                return Err(format!("operator {op} at step {}: cost drifted", done + step));
            }
        }
        done += batch;
    }
    Ok(())
}
