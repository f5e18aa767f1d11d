//! Temporary tuning harness: GA parameter sweep at desk scale and the
//! full-size scenario bounds. Not part of the deliverable.

use std::time::Instant;

use phasebal::scenarios::{self, Scheme};
use phasebal::{ga, metrics, CustomerOrder, GaConfig, ObjectiveWeights, PhaseAssignment, PhaseId};

fn brute_force_best(network: &phasebal::Network, profile: &phasebal::LoadProfile, cfg: &GaConfig) -> f64 {
    let order = CustomerOrder::movable(network);
    let m = order.len();
    let mut best = f64::NEG_INFINITY;
    for code in 0..3usize.pow(m as u32) {
        let mut c = code;
        let genes: Vec<PhaseId> = (0..m)
            .map(|_| {
                let g = PhaseId::new((c % 3) as u8 + 1).unwrap();
                c /= 3;
                g
            })
            .collect();
        let a = PhaseAssignment::new(genes, order.clone()).unwrap();
        let r = metrics::evaluate(network, &a, profile, &cfg.weights, &cfg.solver).unwrap();
        if r.fitness > best {
            best = r.fitness;
        }
    }
    best
}

fn main() {
    // Desk-scale sweep: for each m, how many of 10 seeds reach the optimum?
    for (pop, stall) in [(40usize, 30u32), (60, 40), (80, 50), (100, 50)] {
        for m in [4usize, 6, 8] {
            let network = scenarios::scenario_network(Scheme::S111, m);
            let profile = scenarios::constant_profile(&network, 200.0, 0.10, 1);
            let base = GaConfig {
                population_size: pop,
                stall_generations: stall,
                ..GaConfig::default()
            };
            let best = brute_force_best(&network, &profile, &base);
            let mut hits = 0;
            let mut gens = 0;
            let t0 = Instant::now();
            for seed in 0..10u64 {
                let cfg = GaConfig { rng_seed: seed, ..base };
                let res = ga::run(&network, &profile, &cfg).unwrap();
                gens += res.generations_run;
                if (res.best_report.fitness - best).abs() < 1e-12 {
                    hits += 1;
                }
            }
            println!(
                "pop={pop:3} stall={stall:2} m={m}: {hits}/10 optimum, avg gens {:.0}, total {:?}",
                gens as f64 / 10.0,
                t0.elapsed()
            );
        }
    }

    // Full-size scenarios with defaults.
    let cases = [
        ("112233 a1 b1 g0.6", Scheme::S112233, 1.0, 1.0, 0.6),
        ("112233 a1 b0 g0  ", Scheme::S112233, 1.0, 0.0, 0.0),
        ("112233 a0 b1 g0  ", Scheme::S112233, 0.0, 1.0, 0.0),
        ("111    a1 b1 g0.6", Scheme::S111, 1.0, 1.0, 0.6),
        ("123123 a1 b1 g0.6", Scheme::S123123, 1.0, 1.0, 0.6),
    ];
    for seed in [42u64, 7, 2024] {
        println!("--- seed {seed}");
        for (name, scheme, alpha, beta, gamma) in cases {
            let network = scenarios::scenario_network(scheme, 60);
            let profile = scenarios::constant_profile(&network, 200.0, 0.10, 1);
            let cfg = GaConfig {
                rng_seed: seed,
                weights: ObjectiveWeights {
                    alpha,
                    beta,
                    gamma,
                    ..ObjectiveWeights::default()
                },
                ..GaConfig::default()
            };
            let t0 = Instant::now();
            let res = ga::run(&network, &profile, &cfg).unwrap();
            let mut counts = [0usize; 3];
            for g in res.best.genes() {
                counts[g.index()] += 1;
            }
            println!(
                "{name}: B={:6.3} dV={:5.3} N={:2} f={:.5} counts={counts:?} gens={} {:?}",
                res.best_report.imbalance_b,
                res.best_report.voltage_drop,
                res.best_report.changes,
                res.best_report.fitness,
                res.generations_run,
                t0.elapsed()
            );
        }
    }
}
