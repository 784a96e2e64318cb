//! Genetic layer: a population of BLS-improved tours evolved by tournament
//! selection, uniform crossover on random keys and double-bridge mutation.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::bench::{compute_dev, RunReport};
use crate::bls::{bls_run, BlsParams, StopSignal};
use crate::instance::GtspInstance;
use crate::solution::{cluster_optimization, double_bridge, semi_random_construction, Tour};

/// Random-key encoding of a tour: clusters are visited in increasing key
/// order (ties by cluster index), each at its recorded node.
#[derive(Debug, Clone, PartialEq)]
pub struct Genome {
    pub keys: Vec<f64>,
    pub picks: Vec<usize>,
}

impl Genome {
    /// Keys follow the tour's canonical order, so that equal cycles get
    /// equal keys regardless of rotation or direction.
    pub fn encode(tour: &Tour) -> Self {
        let m = tour.len();
        let mut keys = vec![0.0; m];
        for (i, &k) in tour.canonical_order().iter().enumerate() {
            keys[k] = (i as f64 + 0.5) / m as f64;
        }
        Self {
            keys,
            picks: tour.picks().to_vec(),
        }
    }

    pub fn decode_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.keys.len()).collect();
        order.sort_by(|&a, &b| self.keys[a].total_cmp(&self.keys[b]).then(a.cmp(&b)));
        order
    }

    pub fn decode(&self, inst: &GtspInstance) -> Tour {
        Tour::new(inst, self.decode_order(), self.picks.clone()).expect("genome genes come from feasible tours")
    }
}

#[derive(Debug, Clone)]
pub struct Individual {
    pub genome: Genome,
    pub tour: Tour,
    /// Insertion counter; lower is older.
    pub birth: u64,
}

impl Individual {
    fn new(tour: Tour, birth: u64) -> Self {
        Self {
            genome: Genome::encode(&tour),
            tour,
            birth,
        }
    }

    pub fn cost(&self) -> i64 {
        self.tour.cost()
    }
}

#[derive(Debug, Clone)]
pub struct Population {
    pub individuals: Vec<Individual>,
    pub generation: usize,
    next_birth: u64,
}

impl Population {
    pub fn len(&self) -> usize {
        self.individuals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.individuals.is_empty()
    }

    pub fn best(&self) -> &Individual {
        self.individuals
            .iter()
            .min_by_key(|ind| (ind.cost(), ind.birth))
            .expect("population is never empty")
    }

    /// Builds a population from given tours (used by tests and warm starts).
    pub fn from_tours(tours: Vec<Tour>) -> Self {
        let individuals: Vec<Individual> = tours
            .into_iter()
            .enumerate()
            .map(|(i, t)| Individual::new(t, i as u64))
            .collect();
        let next_birth = individuals.len() as u64;
        Self {
            individuals,
            generation: 0,
            next_birth,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MemeticParams {
    pub bls: BlsParams,
    /// Probability that a child is mutated by a double bridge.
    pub mutation_rate: f64,
    /// Generation bound; the number of clusters when `None`.
    pub max_generations: Option<usize>,
}

impl MemeticParams {
    pub fn for_clusters(m: usize) -> Self {
        Self {
            bls: BlsParams::for_clusters(m),
            mutation_rate: 0.3,
            max_generations: None,
        }
    }
}

/// `⌈m / 2⌉`.
pub fn population_size(m: usize) -> usize {
    m.div_ceil(2).max(1)
}

fn improve(inst: &GtspInstance, start: Tour, params: &BlsParams, seed: u64, stop: &StopSignal) -> (Tour, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let out = bls_run(start, params, inst, &mut rng, stop);
    (out.best, out.descents)
}

/// `⌈m / 2⌉` semi-random tours, each improved by BLS. Also returns the
/// number of descents spent.
pub fn init_population<R: Rng + ?Sized>(
    inst: &GtspInstance,
    params: &MemeticParams,
    rng: &mut R,
    stop: &StopSignal,
) -> (Population, usize) {
    let seeds: Vec<u64> = (0..population_size(inst.m())).map(|_| rng.gen()).collect();
    let improved: Vec<(Tour, usize)> = seeds
        .par_iter()
        .map(|&seed| {
            let mut local = ChaCha8Rng::seed_from_u64(seed);
            let start = semi_random_construction(inst, &mut local);
            improve(inst, start, &params.bls, local.gen(), stop)
        })
        .collect();
    let descents = improved.iter().map(|r| r.1).sum();
    (Population::from_tours(improved.into_iter().map(|r| r.0).collect()), descents)
}

/// Best of three individuals drawn with replacement; the earliest draw wins
/// ties.
pub fn tournament_select<'a, R: Rng + ?Sized>(pop: &'a Population, rng: &mut R) -> &'a Individual {
    let n = pop.len();
    let mut best = &pop.individuals[rng.gen_range(0..n)];
    for _ in 0..2 {
        let cand = &pop.individuals[rng.gen_range(0..n)];
        if cand.cost() < best.cost() {
            best = cand;
        }
    }
    best
}

/// Gene-wise crossover with an explicit mask: where `take_first[k]` holds,
/// child one inherits cluster `k`'s key and node from `a`, child two from
/// `b`; otherwise the other way round.
pub fn uniform_crossover_masked(a: &Genome, b: &Genome, take_first: &[bool]) -> (Genome, Genome) {
    let m = a.keys.len();
    assert_eq!(b.keys.len(), m);
    assert_eq!(take_first.len(), m);
    let mut c1 = a.clone();
    let mut c2 = b.clone();
    for (k, &first) in take_first.iter().enumerate() {
        if !first {
            c1.keys[k] = b.keys[k];
            c1.picks[k] = b.picks[k];
            c2.keys[k] = a.keys[k];
            c2.picks[k] = a.picks[k];
        }
    }
    (c1, c2)
}

pub fn uniform_crossover<R: Rng + ?Sized>(a: &Genome, b: &Genome, rng: &mut R) -> (Genome, Genome) {
    let mask: Vec<bool> = (0..a.keys.len()).map(|_| rng.gen_bool(0.5)).collect();
    uniform_crossover_masked(a, b, &mask)
}

struct ChildJob {
    genome: Genome,
    mutate: bool,
    seed: u64,
}

/// Decodes a child, optionally mutates it, re-selects nodes and runs BLS.
fn raise_child(inst: &GtspInstance, job: &ChildJob, params: &MemeticParams, stop: &StopSignal) -> (Tour, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(job.seed);
    let mut tour = job.genome.decode(inst);
    if job.mutate {
        tour = double_bridge(inst, &tour, &mut rng);
    }
    let tour = cluster_optimization(inst, tour.order());
    improve(inst, tour, &params.bls, rng.gen(), stop)
}

/// Keeps the best `size` of `pool`, older first among equal costs. Copies of
/// the same cycle at the same cost are kept only if the pool runs short.
fn select_survivors(mut pool: Vec<Individual>, size: usize) -> Vec<Individual> {
    pool.sort_by_key(|ind| (ind.cost(), ind.birth));
    let mut kept: Vec<Individual> = Vec::with_capacity(size);
    let mut spare = Vec::new();
    let mut seen: Vec<(i64, Vec<usize>)> = Vec::new();
    for ind in pool {
        let key = (ind.cost(), ind.tour.canonical_order());
        if seen.contains(&key) {
            spare.push(ind);
        } else if kept.len() < size {
            seen.push(key);
            kept.push(ind);
        }
    }
    for ind in spare {
        if kept.len() == size {
            break;
        }
        kept.push(ind);
    }
    kept.sort_by_key(|ind| (ind.cost(), ind.birth));
    kept
}

/// One generation: `⌈size / 2⌉` crossovers of tournament-selected parents,
/// mutation, improvement, and elitist survivor selection over parents and
/// children. Returns the next population and the descents spent.
pub fn evolve_generation<R: Rng + ?Sized>(
    pop: &Population,
    params: &MemeticParams,
    inst: &GtspInstance,
    rng: &mut R,
    stop: &StopSignal,
) -> (Population, usize) {
    let size = pop.len();
    let mut jobs = Vec::with_capacity(2 * size.div_ceil(2));
    for _ in 0..size.div_ceil(2) {
        let a = tournament_select(pop, rng);
        let b = tournament_select(pop, rng);
        let (c1, c2) = uniform_crossover(&a.genome, &b.genome, rng);
        for genome in [c1, c2] {
            let mutate = rng.gen_bool(params.mutation_rate);
            jobs.push(ChildJob {
                genome,
                mutate,
                seed: rng.gen(),
            });
        }
    }
    let children: Vec<(Tour, usize)> = jobs
        .par_iter()
        .map(|job| raise_child(inst, job, params, stop))
        .collect();
    let descents = children.iter().map(|c| c.1).sum();

    let mut next_birth = pop.next_birth;
    let mut pool = pop.individuals.clone();
    for (tour, _) in children {
        pool.push(Individual::new(tour, next_birth));
        next_birth += 1;
    }
    let next = Population {
        individuals: select_survivors(pool, size),
        generation: pop.generation + 1,
        next_birth,
    };
    (next, descents)
}

/// Best cost and population size at a generation boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GenerationStat {
    pub generation: usize,
    pub best_cost: i64,
    pub population: usize,
}

/// Runs the memetic algorithm from `seed`.
///
/// Evolves up to `max_generations` (default: the cluster count)
/// generations, stopping early once the instance's best-known cost is
/// reached or `stop` fires.
pub fn solve(inst: &GtspInstance, params: &MemeticParams, seed: u64, stop: &StopSignal) -> RunReport {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let reached = |pop: &Population| inst.best_known().is_some_and(|b| pop.best().cost() <= b);

    let (mut pop, mut descents) = init_population(inst, params, &mut rng, stop);
    let mut trace = vec![GenerationStat {
        generation: 0,
        best_cost: pop.best().cost(),
        population: pop.len(),
    }];
    let max_generations = params.max_generations.unwrap_or(inst.m());
    while pop.generation < max_generations && !reached(&pop) && !stop.is_stopped() {
        let (next, spent) = evolve_generation(&pop, params, inst, &mut rng, stop);
        pop = next;
        descents += spent;
        trace.push(GenerationStat {
            generation: pop.generation,
            best_cost: pop.best().cost(),
            population: pop.len(),
        });
    }

    let best = pop.best().tour.clone();
    RunReport {
        instance: inst.name().to_string(),
        seed,
        best_cost: best.cost(),
        dev: inst.best_known().and_then(|b| compute_dev(best.cost() as f64, b).ok()),
        wall_seconds: started.elapsed().as_secs_f64(),
        generations: pop.generation,
        descents,
        best,
        trace,
    }
}
