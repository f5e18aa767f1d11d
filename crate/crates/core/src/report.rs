//! Per-phase feeder summaries: the numbers an operator compares before and
//! after a reconnection plan.

use serde::Serialize;

use crate::assignment::PhaseAssignment;
use crate::error::Result;
use crate::loadflow::{self, PowerFlowResult, SolverOptions};
use crate::metrics::{self, ObjectiveWeights};
use crate::network::{BusId, LoadProfile, Network, PhaseId};

/// End-of-line condition of one phase across the whole profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseSummary {
    pub phase: PhaseId,
    /// Customers connected to this phase under the evaluated assignment.
    pub customers: usize,
    /// Lowest end-of-line voltage over the profile, volts.
    pub end_voltage_v: f64,
    /// Largest end-of-line drop over the profile, percent.
    pub drop_percent: f64,
    /// Largest transformer current over the profile, amperes.
    pub current_a: f64,
}

/// Feeder-level simulation summary for one assignment over one profile.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationSummary {
    pub per_phase: [PhaseSummary; 3],
    /// Aggregate imbalance index B, percent.
    pub imbalance_b: f64,
    /// Worst-phase end-of-line drop, percent (the dV metric).
    pub max_drop_percent: f64,
    pub end_of_line_bus: BusId,
    pub snapshots: usize,
    /// False if any snapshot failed to converge.
    pub converged: bool,
}

/// Solves the profile and condenses it into per-phase rows. Also returns the
/// raw per-snapshot results for exports.
pub fn summarize(
    network: &Network,
    assignment: &PhaseAssignment,
    profile: &LoadProfile,
    options: &SolverOptions,
) -> Result<(SimulationSummary, Vec<PowerFlowResult>)> {
    let results = loadflow::solve_profile(network, assignment, profile, options)?;
    let end_bus = network.end_of_line_bus();
    let v_source = network.source_phase_voltage;
    let converged = results.iter().all(|r| r.converged);

    let mut customers = [0usize; 3];
    for customer in &network.customers {
        let phase = assignment
            .phase_of(&customer.id)
            .unwrap_or(customer.initial_phase);
        customers[phase.index()] += 1;
    }

    let per_phase = PhaseId::all().map(|phase| {
        let mut end_voltage = f64::INFINITY;
        let mut current = 0.0f64;
        for result in &results {
            let v = result
                .voltage_mag(end_bus, phase)
                .expect("end-of-line bus is part of the network");
            end_voltage = end_voltage.min(v);
            current = current.max(result.phase_current(phase));
        }
        PhaseSummary {
            phase,
            customers: customers[phase.index()],
            end_voltage_v: end_voltage,
            drop_percent: metrics::voltage_drop_instant(v_source, end_voltage),
            current_a: current,
        }
    });

    // Per-snapshot series, with the same degenerate-snapshot policy as the
    // fitness path (default full-scale b for non-converged snapshots).
    let b_max = ObjectiveWeights::default().b_max;
    let mut per_b = Vec::with_capacity(results.len());
    let mut per_dv = Vec::with_capacity(results.len());
    for result in &results {
        if !result.converged {
            per_b.push(b_max);
            per_dv.push(100.0);
            continue;
        }
        per_b.push(metrics::imbalance_instant(result.transformer_current).unwrap_or(0.0));
        let v_end = result
            .min_phase_voltage_mag(end_bus)
            .expect("end-of-line bus is part of the network");
        per_dv.push(metrics::voltage_drop_instant(v_source, v_end));
    }

    let summary = SimulationSummary {
        per_phase,
        imbalance_b: metrics::imbalance_aggregate(&per_b)?,
        max_drop_percent: metrics::voltage_drop_aggregate(&per_dv)?,
        end_of_line_bus: end_bus,
        snapshots: results.len(),
        converged,
    };
    Ok((summary, results))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenarios::{self, Scheme};

    #[test]
    fn summary_matches_direct_metrics() {
        let network = scenarios::scenario_network(Scheme::S112233, 60);
        let assignment = PhaseAssignment::initial(&network);
        let profile = scenarios::constant_profile(&network, 200.0, 0.10, 1);
        let (summary, results) =
            summarize(&network, &assignment, &profile, &SolverOptions::default()).unwrap();
        assert_eq!(results.len(), 1);
        assert!(summary.converged);
        assert_eq!(summary.end_of_line_bus, 60);
        assert_eq!(
            summary.per_phase.map(|p| p.customers),
            [20, 20, 20]
        );
        // Drops must grow with block distance for this scheme.
        assert!(summary.per_phase[0].drop_percent < summary.per_phase[1].drop_percent);
        assert!(summary.per_phase[1].drop_percent < summary.per_phase[2].drop_percent);
        assert_eq!(summary.max_drop_percent, summary.per_phase[2].drop_percent);

        let report = metrics::evaluate(
            &network,
            &assignment,
            &profile,
            &ObjectiveWeights::default(),
            &SolverOptions::default(),
        )
        .unwrap();
        assert_eq!(summary.imbalance_b, report.imbalance_b);
        assert_eq!(summary.max_drop_percent, report.voltage_drop);
    }

    #[test]
    fn summary_takes_worst_snapshot_per_phase() {
        let network = scenarios::scenario_network(Scheme::S111, 10);
        let assignment = PhaseAssignment::initial(&network);
        // Two snapshots, the second one heavier.
        let mut profile = scenarios::constant_profile(&network, 100.0, 0.10, 1);
        profile
            .snapshots
            .extend(scenarios::constant_profile(&network, 300.0, 0.10, 1).snapshots);
        let (summary, _) =
            summarize(&network, &assignment, &profile, &SolverOptions::default()).unwrap();
        let (heavy, _) = summarize(
            &network,
            &assignment,
            &scenarios::constant_profile(&network, 300.0, 0.10, 1),
            &SolverOptions::default(),
        )
        .unwrap();
        assert_eq!(summary.per_phase[0].end_voltage_v, heavy.per_phase[0].end_voltage_v);
        assert_eq!(summary.per_phase[0].current_a, heavy.per_phase[0].current_a);
    }
}
