//! Objective mathematics: current-imbalance index and its RMS aggregate,
//! end-of-line voltage drop, reconnection count, and the convex-combination
//! fitness the GA maximizes.

use serde::{Deserialize, Serialize};

use crate::assignment::PhaseAssignment;
use crate::error::{Error, Result};
use crate::loadflow::{self, SolverOptions};
use crate::network::{LoadProfile, Network};

/// Weights and normalization constants of the scalarized objective.
///
/// `alpha`, `beta`, `gamma` weight imbalance, voltage drop and change count;
/// `b_max`, `dv_max`, `n_max` are the expected full-scale values that bring
/// the three terms to a common range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveWeights {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub b_max: f64,
    pub dv_max: f64,
    pub n_max: f64,
}

impl Default for ObjectiveWeights {
    fn default() -> Self {
        ObjectiveWeights {
            alpha: 1.0,
            beta: 1.0,
            gamma: 0.6,
            b_max: 100.0,
            dv_max: 10.0,
            n_max: 50.0,
        }
    }
}

impl ObjectiveWeights {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("gamma", self.gamma),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::InvalidWeights(format!(
                    "{name} must be finite and >= 0, got {v}"
                )));
            }
        }
        if self.alpha + self.beta + self.gamma <= 0.0 {
            return Err(Error::InvalidWeights(
                "alpha + beta + gamma must be positive".into(),
            ));
        }
        for (name, v) in [
            ("b_max", self.b_max),
            ("dv_max", self.dv_max),
            ("n_max", self.n_max),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidWeights(format!(
                    "{name} must be finite and > 0, got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// The evaluated objectives of one assignment over a profile.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitnessReport {
    /// RMS of the per-snapshot imbalance indices, percent.
    pub imbalance_b: f64,
    /// Worst per-snapshot end-of-line voltage drop, percent.
    pub voltage_drop: f64,
    /// Customers whose proposed phase differs from the initial one.
    pub changes: usize,
    /// Scalarized objective; higher is better, 1.0 is a perfect solution.
    pub fitness: f64,
    /// Per-snapshot imbalance index b_t, percent.
    pub per_snapshot_b: Vec<f64>,
    /// Per-snapshot end-of-line voltage drop, percent.
    pub per_snapshot_dv: Vec<f64>,
}

/// Instantaneous current-imbalance index (NEMA MG-1 style):
/// `100 * (I_max - I_mean) / I_mean`, percent. 0 is perfect balance, 200 is
/// a single loaded phase.
///
/// A dead feeder (mean current zero) has no defined imbalance and is
/// reported as [`Error::ZeroMeanCurrent`]; the fitness path maps it to 0.
/// The result is kept inside the algebraic range [0, 200], which rounding
/// could otherwise overshoot by an ulp at the extremes.
pub fn imbalance_instant(currents: [f64; 3]) -> Result<f64> {
    let sum = currents[0] + currents[1] + currents[2];
    if sum <= 0.0 {
        return Err(Error::ZeroMeanCurrent);
    }
    let max = currents.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == sum {
        // Two dead phases: exactly one carries current, the index is
        // exactly at its upper bound.
        return Ok(200.0);
    }
    let mean = sum / 3.0;
    Ok((100.0 * (max - mean) / mean).clamp(0.0, 200.0))
}

/// Root-mean-square aggregate of per-snapshot imbalance indices, percent.
pub fn imbalance_aggregate(per_snapshot: &[f64]) -> Result<f64> {
    if per_snapshot.is_empty() {
        return Err(Error::EmptySeries);
    }
    let n = per_snapshot.len() as f64;
    let sum_sq: f64 = per_snapshot.iter().map(|b| b * b).sum();
    Ok((sum_sq / n).sqrt())
}

/// Instantaneous end-of-line voltage drop,
/// `100 * (V_source - V_end) / V_source`, percent. `v_end` is the worst
/// (lowest) phase voltage at the end-of-line bus.
pub fn voltage_drop_instant(v_source: f64, v_end: f64) -> f64 {
    debug_assert!(v_source > 0.0);
    100.0 * (v_source - v_end) / v_source
}

/// Worst per-snapshot voltage drop over the analysis period, percent.
pub fn voltage_drop_aggregate(per_snapshot: &[f64]) -> Result<f64> {
    per_snapshot
        .iter()
        .copied()
        .fold(None, |acc: Option<f64>, v| {
            Some(acc.map_or(v, |a| a.max(v)))
        })
        .ok_or(Error::EmptySeries)
}

/// Number of customers the proposed assignment moves off their initial
/// phase: the reconnection work a field crew must carry out.
pub fn change_count(initial: &PhaseAssignment, proposed: &PhaseAssignment) -> Result<usize> {
    initial.hamming(proposed)
}

/// Scalarized objective:
/// `1 - (alpha*B/B_max + beta*dV/dV_max + gamma*N/N_max) / (alpha+beta+gamma)`.
///
/// A convex combination of the normalized objectives, subtracted from one so
/// the GA maximizes it. Values are not clamped at their full scale, so a
/// pathological assignment can score below zero; that keeps ranking pressure
/// beyond the expected range.
pub fn fitness(imbalance_b: f64, voltage_drop: f64, changes: usize, weights: &ObjectiveWeights) -> f64 {
    let w = weights;
    let weighted = w.alpha * imbalance_b / w.b_max
        + w.beta * voltage_drop / w.dv_max
        + w.gamma * changes as f64 / w.n_max;
    1.0 - weighted / (w.alpha + w.beta + w.gamma)
}

/// Evaluates one assignment over a whole profile: runs the load flow per
/// snapshot, derives b_t from the transformer currents and dV_t from the
/// worst phase at the end-of-line bus, aggregates both, counts changes
/// against the as-built configuration and scalarizes.
///
/// Policy for degenerate snapshots: a dead snapshot (all currents zero)
/// contributes b_t = 0; a non-converged snapshot contributes b_t = `b_max`
/// and dV_t = 100 %, steering the search away from collapse-inducing
/// assignments without aborting the run.
pub fn evaluate(
    network: &Network,
    assignment: &PhaseAssignment,
    profile: &LoadProfile,
    weights: &ObjectiveWeights,
    options: &SolverOptions,
) -> Result<FitnessReport> {
    weights.validate()?;
    if profile.is_empty() {
        return Err(Error::EmptySeries);
    }

    let results = loadflow::solve_profile(network, assignment, profile, options)?;
    let end_bus = network.end_of_line_bus();
    let v_source = network.source_phase_voltage;

    let mut per_snapshot_b = Vec::with_capacity(results.len());
    let mut per_snapshot_dv = Vec::with_capacity(results.len());
    for result in &results {
        if !result.converged {
            per_snapshot_b.push(weights.b_max);
            per_snapshot_dv.push(100.0);
            continue;
        }
        let b = match imbalance_instant(result.transformer_current) {
            Ok(b) => b,
            Err(Error::ZeroMeanCurrent) => 0.0,
            Err(e) => return Err(e),
        };
        per_snapshot_b.push(b);
        let v_end = result
            .min_phase_voltage_mag(end_bus)
            .expect("end-of-line bus is part of the network");
        per_snapshot_dv.push(voltage_drop_instant(v_source, v_end));
    }

    let imbalance_b = imbalance_aggregate(&per_snapshot_b)?;
    let voltage_drop = voltage_drop_aggregate(&per_snapshot_dv)?;
    let initial = PhaseAssignment::initial(network);
    let changes = change_count(&initial, assignment)?;
    let fitness = fitness(imbalance_b, voltage_drop, changes, weights);

    Ok(FitnessReport {
        imbalance_b,
        voltage_drop,
        changes,
        fitness,
        per_snapshot_b,
        per_snapshot_dv,
    })
}
