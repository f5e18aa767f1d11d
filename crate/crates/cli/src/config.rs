//! Run configuration: defaults, optional TOML config file, command-line
//! overrides — in that order of precedence.

use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::Deserialize;

use phasebal::{GaConfig, ObjectiveWeights, SolverOptions};

/// Optional config file. Unknown keys are rejected so stale or misspelled
/// parameters never pass silently.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default)]
    pub weights: WeightsSection,
    #[serde(default)]
    pub ga: GaSection,
    #[serde(default)]
    pub solver: SolverSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightsSection {
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub gamma: Option<f64>,
    pub b_max: Option<f64>,
    pub dv_max: Option<f64>,
    pub n_max: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaSection {
    pub population_size: Option<usize>,
    pub mutation_probability: Option<f64>,
    pub stall_generations: Option<u32>,
    pub max_generations: Option<u32>,
    pub rng_seed: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub tolerance: Option<f64>,
    pub max_iterations: Option<u32>,
}

impl ConfigFile {
    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config file {}", path.display()))?;
        match toml::from_str(&text) {
            Ok(file) => Ok(file),
            Err(e) => {
                let line = e
                    .span()
                    .map(|s| text[..s.start.min(text.len())].lines().count().max(1))
                    .unwrap_or(1);
                bail!("{}:{line}: {}", path.display(), e.message())
            }
        }
    }

    /// Applies the file's values over the given defaults.
    pub fn apply(
        &self,
        weights: &mut ObjectiveWeights,
        ga: &mut GaConfig,
        solver: &mut SolverOptions,
    ) {
        let w = &self.weights;
        set(&mut weights.alpha, w.alpha);
        set(&mut weights.beta, w.beta);
        set(&mut weights.gamma, w.gamma);
        set(&mut weights.b_max, w.b_max);
        set(&mut weights.dv_max, w.dv_max);
        set(&mut weights.n_max, w.n_max);

        let g = &self.ga;
        set(&mut ga.population_size, g.population_size);
        set(&mut ga.mutation_probability, g.mutation_probability);
        set(&mut ga.stall_generations, g.stall_generations);
        set(&mut ga.max_generations, g.max_generations);
        set(&mut ga.rng_seed, g.rng_seed);

        let s = &self.solver;
        set(&mut solver.tolerance, s.tolerance);
        set(&mut solver.max_iterations, s.max_iterations);
    }
}

pub fn set<T>(target: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *target = v;
    }
}
