//! Per-phase radial load flow by backward-forward sweep.
//!
//! Each phase is solved as an independent single-phase radial circuit
//! against an ideal neutral: no mutual impedance between phases and no
//! neutral-shift coupling. Customers are constant-power (P, Q) loads, so
//! their current rises as their node voltage sags. The transformer is a
//! stiff source holding `source_phase_voltage` at bus 0 on every phase.
//!
//! One sweep aggregates branch currents from the leaves to the root, then
//! updates voltages from the root to the leaves; sweeps repeat from a flat
//! start until the largest complex-voltage change falls below
//! `tolerance * source_phase_voltage`. Failure to converge within
//! `max_iterations` is not an error: the result is returned with
//! `converged = false` and the caller decides the policy.

use std::collections::HashMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::assignment::PhaseAssignment;
use crate::error::{Error, Result};
use crate::network::{BusId, LoadProfile, LoadSnapshot, Network, PhaseId};

/// Sweep iteration controls.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    /// Convergence threshold as a fraction of the source phase voltage.
    pub tolerance: f64,
    /// Iteration cap; exceeding it marks the result non-converged.
    pub max_iterations: u32,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tolerance: 1e-6,
            max_iterations: 100,
        }
    }
}

/// Steady-state solution of one snapshot: complex voltage per (bus, phase)
/// and current magnitude per transformer phase.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerFlowResult {
    bus_ids: Vec<BusId>,
    voltages: Vec<[Complex64; 3]>,
    /// |I| per phase through the transformer busbar, amperes.
    pub transformer_current: [f64; 3],
    pub converged: bool,
    /// Sweep count of the slowest phase.
    pub iterations: u32,
}

impl PowerFlowResult {
    /// Complex voltage of a bus on one phase.
    pub fn voltage(&self, bus: BusId, phase: PhaseId) -> Option<Complex64> {
        let idx = self.bus_ids.iter().position(|&b| b == bus)?;
        Some(self.voltages[idx][phase.index()])
    }

    /// Voltage magnitude of a bus on one phase, volts.
    pub fn voltage_mag(&self, bus: BusId, phase: PhaseId) -> Option<f64> {
        self.voltage(bus, phase).map(|v| v.norm())
    }

    /// Lowest of the three phase-voltage magnitudes at a bus: the phase with
    /// the largest drop.
    pub fn min_phase_voltage_mag(&self, bus: BusId) -> Option<f64> {
        let idx = self.bus_ids.iter().position(|&b| b == bus)?;
        Some(
            self.voltages[idx]
                .iter()
                .map(|v| v.norm())
                .fold(f64::INFINITY, f64::min),
        )
    }

    /// Transformer current magnitude on one phase, amperes.
    pub fn phase_current(&self, phase: PhaseId) -> f64 {
        self.transformer_current[phase.index()]
    }

    /// All bus voltages in network order: `(bus id, [V_a, V_b, V_c])`.
    pub fn iter_bus_voltages(&self) -> impl Iterator<Item = (BusId, &[Complex64; 3])> {
        self.bus_ids.iter().copied().zip(self.voltages.iter())
    }
}

/// Traversal data computed once per network and reused across snapshots.
struct Topology {
    /// Parent bus index; `None` for the root.
    parent: Vec<Option<usize>>,
    /// Impedance of the segment feeding each bus; zero for the root.
    feed_impedance: Vec<Complex64>,
    /// Bus indices in breadth-first order from the root (parents first).
    order: Vec<usize>,
    /// Per customer: index of its connection bus.
    customer_bus: Vec<usize>,
    /// Per customer: gene position if movable, else `None`.
    customer_gene: Vec<Option<usize>>,
}

impl Topology {
    fn build(network: &Network) -> Result<Self> {
        let n = network.buses.len();
        let index_of: HashMap<BusId, usize> = network
            .buses
            .iter()
            .enumerate()
            .map(|(i, b)| (b.id, i))
            .collect();
        let root = *index_of
            .get(&0)
            .ok_or_else(|| Error::InvalidAssignment("network has no bus 0".into()))?;

        let mut parent = vec![None; n];
        let mut feed_impedance = vec![Complex64::new(0.0, 0.0); n];
        let mut children: Vec<Vec<usize>> = vec![Vec::new(); n];
        for seg in &network.segments {
            let (from, to) = (index_of[&seg.from], index_of[&seg.to]);
            parent[to] = Some(from);
            feed_impedance[to] = seg.impedance();
            children[from].push(to);
        }

        let mut order = Vec::with_capacity(n);
        let mut queue = std::collections::VecDeque::from([root]);
        while let Some(b) = queue.pop_front() {
            order.push(b);
            queue.extend(&children[b]);
        }

        let mut customer_bus = Vec::with_capacity(network.customers.len());
        let mut customer_gene = Vec::with_capacity(network.customers.len());
        let mut next_gene = 0usize;
        for customer in &network.customers {
            customer_bus.push(index_of[&customer.bus]);
            if customer.movable {
                customer_gene.push(Some(next_gene));
                next_gene += 1;
            } else {
                customer_gene.push(None);
            }
        }

        Ok(Topology {
            parent,
            feed_impedance,
            order,
            customer_bus,
            customer_gene,
        })
    }
}

/// Checks that an assignment's customer ordering is exactly the network's
/// movable customer set, in network order.
fn check_assignment(network: &Network, assignment: &PhaseAssignment) -> Result<()> {
    let expected = network.movable_customer_ids();
    if assignment.len() != expected.len() {
        return Err(Error::InvalidAssignment(format!(
            "expected {} genes for the movable customers, got {}",
            expected.len(),
            assignment.len()
        )));
    }
    for (id, expected_id) in assignment.order().ids().iter().zip(&expected) {
        if id != expected_id {
            return Err(Error::InvalidAssignment(format!(
                "gene order mismatch: expected customer {expected_id}, found {id}"
            )));
        }
    }
    Ok(())
}

/// Solves one snapshot. Non-convergence is reported through the result's
/// `converged` flag, not as an error.
pub fn solve_snapshot(
    network: &Network,
    assignment: &PhaseAssignment,
    snapshot: &LoadSnapshot,
    options: &SolverOptions,
) -> Result<PowerFlowResult> {
    let topology = Topology::build(network)?;
    solve_with(&topology, network, assignment, snapshot, options)
}

/// Solves every snapshot of a profile in order. Errors carry the snapshot
/// index; non-convergence of individual snapshots does not abort the run.
pub fn solve_profile(
    network: &Network,
    assignment: &PhaseAssignment,
    profile: &LoadProfile,
    options: &SolverOptions,
) -> Result<Vec<PowerFlowResult>> {
    let topology = Topology::build(network)?;
    profile
        .snapshots
        .iter()
        .enumerate()
        .map(|(t, snapshot)| {
            solve_with(&topology, network, assignment, snapshot, options)
                .map_err(|e| e.at_snapshot(t))
        })
        .collect()
}

fn solve_with(
    topology: &Topology,
    network: &Network,
    assignment: &PhaseAssignment,
    snapshot: &LoadSnapshot,
    options: &SolverOptions,
) -> Result<PowerFlowResult> {
    check_assignment(network, assignment)?;

    let n = network.buses.len();
    // Aggregate complex load per (bus, phase).
    let mut load = vec![[Complex64::new(0.0, 0.0); 3]; n];
    for (ci, customer) in network.customers.iter().enumerate() {
        let phase = match topology.customer_gene[ci] {
            Some(gene) => assignment.phase_at(gene),
            None => customer.initial_phase,
        };
        let (p, q) = snapshot
            .load_of(&customer.id)
            .ok_or_else(|| Error::MissingLoad(customer.id.clone()))?;
        load[topology.customer_bus[ci]][phase.index()] += Complex64::new(p, q);
    }

    let v0 = Complex64::new(network.source_phase_voltage, 0.0);
    let mut voltages = vec![[v0; 3]; n];
    let mut transformer_current = [0.0f64; 3];
    let mut converged = true;
    let mut iterations = 0u32;

    for phase in PhaseId::all() {
        let pi = phase.index();
        let phase_load: Vec<Complex64> = load.iter().map(|l| l[pi]).collect();
        let (v, root_current, ok, iters) = sweep_phase(topology, v0, &phase_load, options);
        for (bus, voltage) in v.into_iter().enumerate() {
            voltages[bus][pi] = voltage;
        }
        transformer_current[pi] = root_current.norm();
        converged &= ok;
        iterations = iterations.max(iters);
    }

    Ok(PowerFlowResult {
        bus_ids: network.buses.iter().map(|b| b.id).collect(),
        voltages,
        transformer_current,
        converged,
        iterations,
    })
}

/// One-phase backward-forward sweep from a flat start.
fn sweep_phase(
    topology: &Topology,
    v0: Complex64,
    load: &[Complex64],
    options: &SolverOptions,
) -> (Vec<Complex64>, Complex64, bool, u32) {
    let n = load.len();
    let zero = Complex64::new(0.0, 0.0);
    let mut v = vec![v0; n];
    let mut current = vec![zero; n];
    let threshold = options.tolerance * v0.norm();
    let mut converged = false;
    let mut iterations = 0;

    for iter in 1..=options.max_iterations.max(1) {
        iterations = iter;

        // Backward: accumulate each subtree's current into its parent.
        // `current[b]` ends up as the current through the segment feeding
        // bus b; at the root it is the total phase current.
        current.fill(zero);
        for &b in topology.order.iter().rev() {
            if load[b] != zero {
                current[b] += (load[b] / v[b]).conj();
            }
            if let Some(p) = topology.parent[b] {
                let through = current[b];
                current[p] += through;
            }
        }

        // Forward: propagate voltage drops from the root outward. Parents
        // precede children in `order`, so updated values are used.
        let mut max_dv = 0.0f64;
        for &b in topology.order.iter().skip(1) {
            let p = topology.parent[b].expect("non-root bus has a parent");
            let updated = v[p] - topology.feed_impedance[b] * current[b];
            let dv = (updated - v[b]).norm();
            if dv > max_dv || dv.is_nan() {
                max_dv = dv;
            }
            v[b] = updated;
        }

        if !max_dv.is_finite() {
            // Voltage collapse; abandon the phase as non-converged.
            break;
        }
        if max_dv < threshold {
            converged = true;
            break;
        }
    }

    let root = topology.order[0];
    (v, current[root], converged, iterations)
}
