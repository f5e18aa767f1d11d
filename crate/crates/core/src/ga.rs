//! Deterministic-crowding genetic algorithm over integer phase genomes.
//!
//! The engine has no selection operator: every generation the whole
//! population is shuffled into pairs, each pair produces two children by
//! uniform crossover, and each child competes against the parent it is
//! closest to in Hamming distance. The parent survives ties, which keeps
//! established niches alive. Mutation is off by default and available as an
//! opt-in per-gene probability.
//!
//! Reproducibility: one seeded ChaCha8 stream drives a run. Draws happen in
//! a fixed order — population init gene by gene, then per generation the
//! shuffle, then per pair the crossover mask followed by the mutation draws
//! of each child (skipped entirely when `mutation_probability` is zero).
//! Identical configuration and seed give bit-identical results.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::assignment::{CustomerOrder, PhaseAssignment};
use crate::error::{Error, Result};
use crate::loadflow::SolverOptions;
use crate::metrics::{self, FitnessReport, ObjectiveWeights};
use crate::network::{LoadProfile, Network, PhaseId};

/// GA parameters. All defaults are desk-scale: a 60-customer feeder
/// optimizes in seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaConfig {
    /// Individuals per generation; must be even (crossover works on pairs)
    /// and at least 4.
    pub population_size: usize,
    /// Per-gene probability of mutating a child to a different phase.
    /// 0 disables mutation, which is the crowding default.
    pub mutation_probability: f64,
    /// Stop after this many consecutive generations without improvement.
    pub stall_generations: u32,
    /// Hard cap on generations.
    pub max_generations: u32,
    /// Seed of the run's random stream.
    pub rng_seed: u64,
    pub weights: ObjectiveWeights,
    pub solver: SolverOptions,
}

impl Default for GaConfig {
    fn default() -> Self {
        GaConfig {
            population_size: 100,
            mutation_probability: 0.0,
            stall_generations: 50,
            max_generations: 2000,
            rng_seed: 42,
            weights: ObjectiveWeights::default(),
            solver: SolverOptions::default(),
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.population_size < 4 || self.population_size % 2 != 0 {
            return Err(Error::InvalidConfig(format!(
                "population_size must be even and >= 4, got {}",
                self.population_size
            )));
        }
        if !(0.0..=1.0).contains(&self.mutation_probability) {
            return Err(Error::InvalidConfig(format!(
                "mutation_probability must be in [0, 1], got {}",
                self.mutation_probability
            )));
        }
        if self.stall_generations == 0 {
            return Err(Error::InvalidConfig(
                "stall_generations must be at least 1".into(),
            ));
        }
        self.weights.validate()
    }
}

/// Best-so-far objectives at one generation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GenerationRecord {
    pub generation: u32,
    pub best_fitness: f64,
    pub best_imbalance: f64,
    pub best_voltage_drop: f64,
    pub best_changes: usize,
}

/// Outcome of a GA run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GaRunResult {
    pub best: PhaseAssignment,
    pub best_report: FitnessReport,
    /// Number of crowding generations executed.
    pub generations_run: u32,
    /// Best-so-far record per generation, starting at generation 0 (the
    /// evaluated initial population).
    pub history: Vec<GenerationRecord>,
    pub final_population: Vec<(PhaseAssignment, FitnessReport)>,
}

/// `tam_p` random genomes, each gene uniform over the three phases.
pub fn random_population<R: Rng>(
    order: &CustomerOrder,
    tam_p: usize,
    rng: &mut R,
) -> Vec<PhaseAssignment> {
    (0..tam_p)
        .map(|_| {
            let genes = (0..order.len())
                .map(|_| PhaseId::new(rng.gen_range(1..=3)).expect("range is valid"))
                .collect();
            PhaseAssignment::new(genes, order.clone()).expect("generated genes match order")
        })
        .collect()
}

/// Uniform crossover: every position independently swaps the parents' genes
/// with probability 0.5. The two children are positionwise a permutation of
/// the parents, so no allele is ever invented.
pub fn uniform_crossover<R: Rng>(
    p1: &PhaseAssignment,
    p2: &PhaseAssignment,
    rng: &mut R,
) -> Result<(PhaseAssignment, PhaseAssignment)> {
    if p1.len() != p2.len() {
        return Err(Error::LengthMismatch {
            left: p1.len(),
            right: p2.len(),
        });
    }
    let mut g1 = Vec::with_capacity(p1.len());
    let mut g2 = Vec::with_capacity(p2.len());
    for i in 0..p1.len() {
        if rng.gen_bool(0.5) {
            g1.push(p2.phase_at(i));
            g2.push(p1.phase_at(i));
        } else {
            g1.push(p1.phase_at(i));
            g2.push(p2.phase_at(i));
        }
    }
    Ok((
        PhaseAssignment::new(g1, p1.order().clone())?,
        PhaseAssignment::new(g2, p1.order().clone())?,
    ))
}

/// Mutates each gene independently with probability `prob_mut` to a
/// uniformly chosen *different* phase. `prob_mut = 0` returns the input
/// unchanged and draws nothing from the stream.
pub fn mutate<R: Rng>(a: &PhaseAssignment, prob_mut: f64, rng: &mut R) -> PhaseAssignment {
    if prob_mut <= 0.0 {
        return a.clone();
    }
    let genes = a
        .genes()
        .iter()
        .map(|&g| {
            if rng.gen_bool(prob_mut) {
                g.others()[rng.gen_range(0..2)]
            } else {
                g
            }
        })
        .collect();
    PhaseAssignment::new(genes, a.order().clone()).expect("mutation preserves length")
}

/// Hamming distance between two genomes: the crowding distance metric.
pub fn hamming(a: &PhaseAssignment, b: &PhaseAssignment) -> Result<usize> {
    a.hamming(b)
}

/// One crowding generation over an evaluated population, in place.
///
/// The population is shuffled, consecutive pairs are crossed (and mutated if
/// enabled), children are evaluated, and each child competes against the
/// parent of its pair it is closest to: with `D` the Hamming distance, if
/// `D(p1,c1) + D(p2,c2) <= D(p1,c2) + D(p2,c1)` then `p1` faces `c1` and
/// `p2` faces `c2`, otherwise the children are swapped. The higher fitness
/// wins each face-off; the parent wins ties.
pub fn crowding_step<R, F>(
    population: &mut [(PhaseAssignment, FitnessReport)],
    rng: &mut R,
    evaluate: &mut F,
    mutation_probability: f64,
) -> Result<()>
where
    R: Rng,
    F: FnMut(&PhaseAssignment) -> Result<FitnessReport>,
{
    debug_assert!(population.len() % 2 == 0 && population.len() >= 4);
    population.shuffle(rng);

    for k in (0..population.len()).step_by(2) {
        let (p1, p2) = (&population[k].0, &population[k + 1].0);
        let (c1, c2) = uniform_crossover(p1, p2, rng)?;
        let c1 = mutate(&c1, mutation_probability, rng);
        let c2 = mutate(&c2, mutation_probability, rng);
        let r1 = evaluate(&c1)?;
        let r2 = evaluate(&c2)?;

        let straight = hamming(p1, &c1)? + hamming(p2, &c2)?;
        let crossed = hamming(p1, &c2)? + hamming(p2, &c1)?;
        let ((c1, r1), (c2, r2)) = if straight <= crossed {
            ((c1, r1), (c2, r2))
        } else {
            ((c2, r2), (c1, r1))
        };

        if r1.fitness > population[k].1.fitness {
            population[k] = (c1, r1);
        }
        if r2.fitness > population[k + 1].1.fitness {
            population[k + 1] = (c2, r2);
        }
    }
    Ok(())
}

/// An in-progress GA run that can be advanced one generation at a time.
///
/// Owns its inputs so interactive front ends can hold it across calls;
/// [`run`] drives it to termination in one go.
pub struct GaRun {
    network: Network,
    profile: LoadProfile,
    config: GaConfig,
    rng: ChaCha8Rng,
    cache: HashMap<Vec<PhaseId>, FitnessReport>,
    population: Vec<(PhaseAssignment, FitnessReport)>,
    best: (PhaseAssignment, FitnessReport),
    history: Vec<GenerationRecord>,
    generations_run: u32,
    stall: u32,
}

impl GaRun {
    /// Evaluates a random initial population and records generation 0.
    pub fn new(network: Network, profile: LoadProfile, config: GaConfig) -> Result<Self> {
        config.validate()?;
        let order = CustomerOrder::movable(&network);
        if order.is_empty() {
            return Err(Error::NoMovableCustomers);
        }

        let mut rng = ChaCha8Rng::seed_from_u64(config.rng_seed);
        let mut cache: HashMap<Vec<PhaseId>, FitnessReport> = HashMap::new();
        let individuals = random_population(&order, config.population_size, &mut rng);
        let mut population = Vec::with_capacity(individuals.len());
        for a in individuals {
            let report = evaluate_cached(&mut cache, &network, &profile, &config, &a)?;
            population.push((a, report));
        }

        let best_idx = best_index(&population);
        let best = population[best_idx].clone();
        let history = vec![record(0, &best.1)];
        Ok(GaRun {
            network,
            profile,
            config,
            rng,
            cache,
            population,
            best,
            history,
            generations_run: 0,
            stall: 0,
        })
    }

    /// Runs one crowding generation. Returns `false` once the stall window
    /// or the generation cap has been reached (the generation is not run).
    pub fn step(&mut self) -> Result<bool> {
        if self.is_finished() {
            return Ok(false);
        }
        let GaRun {
            network,
            profile,
            config,
            rng,
            cache,
            population,
            ..
        } = self;
        let mut evaluate =
            |a: &PhaseAssignment| evaluate_cached(cache, network, profile, config, a);
        crowding_step(population, rng, &mut evaluate, config.mutation_probability)?;
        self.generations_run += 1;

        let idx = best_index(&self.population);
        if self.population[idx].1.fitness > self.best.1.fitness {
            self.best = self.population[idx].clone();
            self.stall = 0;
        } else {
            self.stall += 1;
        }
        self.history.push(record(self.generations_run, &self.best.1));
        Ok(!self.is_finished())
    }

    pub fn is_finished(&self) -> bool {
        self.stall >= self.config.stall_generations
            || self.generations_run >= self.config.max_generations
    }

    pub fn generations_run(&self) -> u32 {
        self.generations_run
    }

    pub fn best(&self) -> (&PhaseAssignment, &FitnessReport) {
        (&self.best.0, &self.best.1)
    }

    pub fn history(&self) -> &[GenerationRecord] {
        &self.history
    }

    pub fn network(&self) -> &Network {
        &self.network
    }

    pub fn into_result(self) -> GaRunResult {
        GaRunResult {
            best: self.best.0,
            best_report: self.best.1,
            generations_run: self.generations_run,
            history: self.history,
            final_population: self.population,
        }
    }
}

/// Runs the crowding GA to termination: stop once the best fitness has not
/// improved for `stall_generations` consecutive generations, or at
/// `max_generations`. Deterministic in the seed.
pub fn run(network: &Network, profile: &LoadProfile, config: &GaConfig) -> Result<GaRunResult> {
    let mut ga = GaRun::new(network.clone(), profile.clone(), config.clone())?;
    while ga.step()? {}
    Ok(ga.into_result())
}

fn evaluate_cached(
    cache: &mut HashMap<Vec<PhaseId>, FitnessReport>,
    network: &Network,
    profile: &LoadProfile,
    config: &GaConfig,
    assignment: &PhaseAssignment,
) -> Result<FitnessReport> {
    if let Some(report) = cache.get(assignment.genes()) {
        return Ok(report.clone());
    }
    let report = metrics::evaluate(network, assignment, profile, &config.weights, &config.solver)?;
    cache.insert(assignment.genes().to_vec(), report.clone());
    Ok(report)
}

/// Index of the fittest individual; the first one on ties, which keeps the
/// choice deterministic.
fn best_index(population: &[(PhaseAssignment, FitnessReport)]) -> usize {
    let mut best = 0;
    for (i, (_, report)) in population.iter().enumerate().skip(1) {
        if report.fitness > population[best].1.fitness {
            best = i;
        }
    }
    best
}

fn record(generation: u32, report: &FitnessReport) -> GenerationRecord {
    GenerationRecord {
        generation,
        best_fitness: report.fitness,
        best_imbalance: report.imbalance_b,
        best_voltage_drop: report.voltage_drop,
        best_changes: report.changes,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenarios::{self, Scheme};

    fn order_of(n: usize) -> CustomerOrder {
        CustomerOrder::movable(&scenarios::build_test_feeder(n))
    }

    fn assignment(genes: &[u8], order: &CustomerOrder) -> PhaseAssignment {
        let genes = genes
            .iter()
            .map(|&g| PhaseId::new(g).unwrap())
            .collect::<Vec<_>>();
        PhaseAssignment::new(genes, order.clone()).unwrap()
    }

    #[test]
    fn random_population_is_reproducible_and_seed_sensitive() {
        let order = order_of(1);
        let mut rng_a = ChaCha8Rng::seed_from_u64(7);
        let mut rng_b = ChaCha8Rng::seed_from_u64(7);
        let pop_a = random_population(&order, 4, &mut rng_a);
        let pop_b = random_population(&order, 4, &mut rng_b);
        assert_eq!(pop_a, pop_b);
        assert_eq!(pop_a.len(), 4);

        let order60 = order_of(60);
        let mut rng_c = ChaCha8Rng::seed_from_u64(8);
        let mut rng_d = ChaCha8Rng::seed_from_u64(9);
        let pop_c = random_population(&order60, 10, &mut rng_c);
        let pop_d = random_population(&order60, 10, &mut rng_d);
        assert_ne!(pop_c, pop_d);
    }

    #[test]
    fn random_population_gene_frequencies_are_near_uniform() {
        let order = order_of(60);
        let mut rng = ChaCha8Rng::seed_from_u64(123);
        let population = random_population(&order, 100, &mut rng);
        let mut counts = [0usize; 3];
        for a in &population {
            for g in a.genes() {
                counts[g.index()] += 1;
            }
        }
        let total: usize = counts.iter().sum();
        assert_eq!(total, 6000);
        for c in counts {
            let freq = c as f64 / total as f64;
            assert!((0.25..=0.42).contains(&freq), "frequency {freq} out of band");
        }
    }

    #[test]
    fn crossover_of_identical_parents_is_identity() {
        let order = order_of(4);
        let p = assignment(&[1, 2, 3, 1], &order);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let (c1, c2) = uniform_crossover(&p, &p, &mut rng).unwrap();
        assert_eq!(c1, p);
        assert_eq!(c2, p);
    }

    #[test]
    fn crossover_children_permute_parent_genes_positionwise() {
        let order = order_of(16);
        let p1 = assignment(&[1; 16], &order);
        let p2 = assignment(&[2; 16], &order);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (c1, c2) = uniform_crossover(&p1, &p2, &mut rng).unwrap();
        for i in 0..16 {
            let pair = [c1.phase_at(i).value(), c2.phase_at(i).value()];
            assert_ne!(pair[0], pair[1]);
            assert!(pair.contains(&1) && pair.contains(&2));
        }
    }

    #[test]
    fn crossover_swap_rate_is_near_half() {
        let order = order_of(10);
        let p1 = assignment(&[1; 10], &order);
        let p2 = assignment(&[2; 10], &order);
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let mut swapped = 0usize;
        let crossings = 10_000usize;
        for _ in 0..crossings {
            let (c1, _) = uniform_crossover(&p1, &p2, &mut rng).unwrap();
            swapped += c1.genes().iter().filter(|g| g.value() == 2).count();
        }
        let fraction = swapped as f64 / (crossings * 10) as f64;
        assert!((0.48..=0.52).contains(&fraction), "swap fraction {fraction}");
    }

    #[test]
    fn crossover_rejects_length_mismatch() {
        let p1 = assignment(&[1, 2], &order_of(2));
        let p2 = assignment(&[1, 2, 3], &order_of(3));
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(
            uniform_crossover(&p1, &p2, &mut rng),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn mutation_zero_is_identity_and_draws_nothing() {
        let order = order_of(6);
        let a = assignment(&[1, 2, 3, 1, 2, 3], &order);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let before = rng.clone();
        let out = mutate(&a, 0.0, &mut rng);
        assert_eq!(out, a);
        // Stream untouched.
        assert_eq!(rng.get_word_pos(), before.get_word_pos());
    }

    #[test]
    fn mutation_one_always_picks_a_different_phase() {
        let order = order_of(50);
        let a = assignment(&[1; 50], &order);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let out = mutate(&a, 1.0, &mut rng);
        for g in out.genes() {
            assert_ne!(g.value(), 1);
        }
    }

    #[test]
    fn mutation_rate_is_respected() {
        let order = order_of(100);
        let a = assignment(&[1; 100], &order);
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let mut mutated = 0usize;
        for _ in 0..100 {
            let out = mutate(&a, 0.1, &mut rng);
            mutated += out
                .genes()
                .iter()
                .zip(a.genes())
                .filter(|(x, y)| x != y)
                .count();
        }
        let fraction = mutated as f64 / 10_000.0;
        assert!((0.08..=0.12).contains(&fraction), "mutation fraction {fraction}");
    }

    #[test]
    fn hamming_basics() {
        let order = order_of(3);
        let a = assignment(&[1, 2, 3], &order);
        let b = assignment(&[1, 3, 3], &order);
        let c = assignment(&[2, 3, 1], &order);
        assert_eq!(hamming(&a, &a).unwrap(), 0);
        assert_eq!(hamming(&a, &b).unwrap(), 1);
        assert_eq!(hamming(&a, &c).unwrap(), 3);
    }

    /// Toy fitness for generation-level tests: fraction of genes on phase 1,
    /// no load flow involved.
    fn ones_fraction(a: &PhaseAssignment) -> Result<FitnessReport> {
        let ones = a.genes().iter().filter(|g| g.value() == 1).count();
        let fitness = ones as f64 / a.len() as f64;
        Ok(FitnessReport {
            imbalance_b: 0.0,
            voltage_drop: 0.0,
            changes: 0,
            fitness,
            per_snapshot_b: vec![],
            per_snapshot_dv: vec![],
        })
    }

    #[test]
    fn crowding_keeps_parents_when_children_tie() {
        // All-identical population: crossover is a no-op, children tie with
        // parents, parents stay.
        let order = order_of(4);
        let a = assignment(&[1, 2, 1, 3], &order);
        let mut population: Vec<_> = (0..4)
            .map(|_| (a.clone(), ones_fraction(&a).unwrap()))
            .collect();
        let snapshot = population.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        crowding_step(&mut population, &mut rng, &mut ones_fraction, 0.0).unwrap();
        assert_eq!(population, snapshot);
    }

    #[test]
    fn crowding_replaces_parent_with_dominating_child() {
        // Parents complementary on two genes: crossover can produce [1, 1],
        // which dominates, and distance pairing must slot it against its
        // nearest parent. Scan seeds until the dominant child appears.
        let order = order_of(2);
        let p1 = assignment(&[1, 2], &order);
        let p2 = assignment(&[2, 1], &order);
        for seed in 0..64 {
            let mut population = vec![
                (p1.clone(), ones_fraction(&p1).unwrap()),
                (p2.clone(), ones_fraction(&p2).unwrap()),
                (p1.clone(), ones_fraction(&p1).unwrap()),
                (p2.clone(), ones_fraction(&p2).unwrap()),
            ];
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            crowding_step(&mut population, &mut rng, &mut ones_fraction, 0.0).unwrap();
            let best = population
                .iter()
                .map(|(_, r)| r.fitness)
                .fold(f64::NEG_INFINITY, f64::max);
            if best == 1.0 {
                return; // the [1, 1] child won a slot
            }
        }
        panic!("no seed produced the dominating child");
    }

    #[test]
    fn crowding_step_matches_hand_simulation() {
        // Replays the same stream through the documented draw order and
        // applies the pairing/competition rules independently.
        let order = order_of(2);
        let genomes = [[1u8, 1], [2, 3], [3, 2], [1, 3]];
        let population: Vec<_> = genomes
            .iter()
            .map(|g| {
                let a = assignment(g, &order);
                let r = ones_fraction(&a).unwrap();
                (a, r)
            })
            .collect();

        let seed = 4242;
        let mut actual = population.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        crowding_step(&mut actual, &mut rng, &mut ones_fraction, 0.0).unwrap();

        // Hand simulation with its own rng clone.
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut expected = population;
        expected.shuffle(&mut rng);
        for k in (0..4).step_by(2) {
            let p1 = expected[k].0.clone();
            let p2 = expected[k + 1].0.clone();
            let mut g1 = Vec::new();
            let mut g2 = Vec::new();
            for i in 0..2 {
                if rng.gen_bool(0.5) {
                    g1.push(p2.phase_at(i));
                    g2.push(p1.phase_at(i));
                } else {
                    g1.push(p1.phase_at(i));
                    g2.push(p2.phase_at(i));
                }
            }
            let c1 = PhaseAssignment::new(g1, order.clone()).unwrap();
            let c2 = PhaseAssignment::new(g2, order.clone()).unwrap();
            let d = |a: &PhaseAssignment, b: &PhaseAssignment| a.hamming(b).unwrap();
            let (c1, c2) = if d(&p1, &c1) + d(&p2, &c2) <= d(&p1, &c2) + d(&p2, &c1) {
                (c1, c2)
            } else {
                (c2, c1)
            };
            for (slot, child) in [(k, c1), (k + 1, c2)] {
                let child_fit = ones_fraction(&child).unwrap();
                if child_fit.fitness > expected[slot].1.fitness {
                    expected[slot] = (child, child_fit);
                }
            }
        }
        assert_eq!(actual, expected);
    }

    #[test]
    fn run_stalls_out_when_optimum_is_immediate() {
        // Dead feeder with gamma = 0: every assignment scores exactly 1, so
        // the best never improves and the run stops after the stall window.
        let network = scenarios::scenario_network(Scheme::S123123, 2);
        let profile = scenarios::constant_profile(&network, 0.0, 0.0, 1);
        let config = GaConfig {
            population_size: 4,
            stall_generations: 7,
            weights: ObjectiveWeights {
                alpha: 1.0,
                beta: 1.0,
                gamma: 0.0,
                ..ObjectiveWeights::default()
            },
            ..GaConfig::default()
        };
        let result = run(&network, &profile, &config).unwrap();
        assert_eq!(result.generations_run, 7);
        assert_eq!(result.best_report.fitness, 1.0);
        assert_eq!(result.history.len(), 8);
    }

    #[test]
    fn run_is_deterministic_in_the_seed() {
        let network = scenarios::scenario_network(Scheme::S112233, 6);
        let profile = scenarios::constant_profile(&network, 200.0, 0.10, 1);
        let config = GaConfig {
            population_size: 8,
            stall_generations: 5,
            max_generations: 30,
            rng_seed: 2024,
            ..GaConfig::default()
        };
        let a = run(&network, &profile, &config).unwrap();
        let b = run(&network, &profile, &config).unwrap();
        assert_eq!(a, b);
        let c = run(
            &network,
            &profile,
            &GaConfig {
                rng_seed: 2025,
                ..config
            },
        )
        .unwrap();
        assert_ne!(a.final_population, c.final_population);
    }

    #[test]
    fn run_finds_brute_force_optimum_on_tiny_feeder() {
        let network = scenarios::scenario_network(Scheme::S111, 6);
        let profile = scenarios::constant_profile(&network, 200.0, 0.10, 1);
        let config = GaConfig {
            population_size: 40,
            stall_generations: 30,
            rng_seed: 3,
            ..GaConfig::default()
        };

        // Exhaustive oracle over all 3^6 assignments.
        let order = CustomerOrder::movable(&network);
        let mut best = f64::NEG_INFINITY;
        for code in 0..3usize.pow(6) {
            let mut c = code;
            let genes: Vec<PhaseId> = (0..6)
                .map(|_| {
                    let g = PhaseId::new((c % 3) as u8 + 1).unwrap();
                    c /= 3;
                    g
                })
                .collect();
            let a = PhaseAssignment::new(genes, order.clone()).unwrap();
            let r = metrics::evaluate(&network, &a, &profile, &config.weights, &config.solver)
                .unwrap();
            best = best.max(r.fitness);
        }

        let result = run(&network, &profile, &config).unwrap();
        assert!(
            (result.best_report.fitness - best).abs() < 1e-12,
            "GA {} vs brute force {best}",
            result.best_report.fitness
        );
    }

    #[test]
    fn best_so_far_series_is_monotone_and_population_size_constant() {
        let network = scenarios::scenario_network(Scheme::S111, 8);
        let profile = scenarios::constant_profile(&network, 200.0, 0.10, 1);
        let config = GaConfig {
            population_size: 12,
            stall_generations: 10,
            max_generations: 60,
            ..GaConfig::default()
        };
        let result = run(&network, &profile, &config).unwrap();
        assert_eq!(result.final_population.len(), 12);
        for pair in result.history.windows(2) {
            assert!(pair[1].best_fitness >= pair[0].best_fitness);
        }
        for (a, _) in &result.final_population {
            assert_eq!(a.len(), 8);
            assert!(a.genes().iter().all(|g| (1..=3).contains(&g.value())));
        }
    }

    #[test]
    fn crossover_only_conserves_alleles_positionwise() {
        let network = scenarios::scenario_network(Scheme::S112233, 9);
        let profile = scenarios::constant_profile(&network, 200.0, 0.10, 1);
        let order = CustomerOrder::movable(&network);
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let mut population: Vec<_> = random_population(&order, 8, &mut rng)
            .into_iter()
            .map(|a| {
                let r = metrics::evaluate(
                    &network,
                    &a,
                    &profile,
                    &ObjectiveWeights::default(),
                    &SolverOptions::default(),
                )
                .unwrap();
                (a, r)
            })
            .collect();

        let mut evaluate = |a: &PhaseAssignment| {
            metrics::evaluate(
                &network,
                a,
                &profile,
                &ObjectiveWeights::default(),
                &SolverOptions::default(),
            )
        };
        for _ in 0..5 {
            let before: Vec<Vec<PhaseId>> =
                population.iter().map(|(a, _)| a.genes().to_vec()).collect();
            crowding_step(&mut population, &mut rng, &mut evaluate, 0.0).unwrap();
            for (a, _) in &population {
                for (i, g) in a.genes().iter().enumerate() {
                    assert!(
                        before.iter().any(|genes| genes[i] == *g),
                        "allele {g:?} at position {i} appeared from nowhere"
                    );
                }
            }
        }
    }

    #[test]
    fn run_requires_movable_customers() {
        let mut network = scenarios::scenario_network(Scheme::S111, 3);
        for customer in &mut network.customers {
            customer.movable = false;
        }
        let profile = scenarios::constant_profile(&network, 200.0, 0.10, 1);
        let err = run(&network, &profile, &GaConfig::default()).unwrap_err();
        assert!(matches!(err, Error::NoMovableCustomers));
    }
}
