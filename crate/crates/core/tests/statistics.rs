mod common;

use common::*;
use mbls::bls::{choose_perturbation_kind, probability_directed, BlsParams, PerturbationKind};
use mbls::instance::WeightKind;
use mbls::memetic::{tournament_select, Population};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn perturbation_kinds_follow_their_probabilities() {
    let params = BlsParams::for_clusters(20);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let draws = 100_000;
    for omega in [0, 1, 3, 10, 40] {
        let p = probability_directed(omega, params.stagnation_limit, params.directed_floor);
        let q = params.recency_share;
        let mut counts = [0usize; 3];
        for _ in 0..draws {
            counts[match choose_perturbation_kind(omega, &params, &mut rng) {
                PerturbationKind::Directed => 0,
                PerturbationKind::Recency => 1,
                PerturbationKind::Random => 2,
            }] += 1;
        }
        let expected = [p, (1.0 - p) * q, (1.0 - p) * (1.0 - q)];
        for k in 0..3 {
            let freq = counts[k] as f64 / draws as f64;
            assert!((freq - expected[k]).abs() < 0.01, "omega {omega} kind {k}: {freq} vs {}", expected[k]);
        }
    }
}

#[test]
fn tournament_picks_the_best_at_the_expected_rate() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let inst = random_instance(&mut rng, 30, 10, WeightKind::Euc2d);
    for size in [2usize, 5, 8] {
        let tours: Vec<_> = loop {
            let tours: Vec<_> = (0..size).map(|_| random_tour(&mut rng, &inst)).collect();
            let best = tours.iter().map(|t| t.cost()).min().unwrap();
            if tours.iter().filter(|t| t.cost() == best).count() == 1 {
                break tours;
            }
        };
        let best = tours.iter().map(|t| t.cost()).min().unwrap();
        let pop = Population::from_tours(tours);
        let draws = 10_000;
        let hits = (0..draws)
            .filter(|_| tournament_select(&pop, &mut rng).tour.cost() == best)
            .count();
        let expected = 1.0 - (1.0 - 1.0 / size as f64).powi(3);
        let freq = hits as f64 / draws as f64;
        assert!((freq - expected).abs() < 0.02, "size {size}: {freq} vs {expected}");
    }
}
