//! Builtin test feeder and connection schemes: a single-trunk circuit with
//! equally spaced customers and constant loads, so benchmark runs are one
//! command.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::assignment::{CustomerOrder, PhaseAssignment};
use crate::network::{
    Bus, Customer, LineSegment, LoadProfile, LoadSnapshot, Network, PhaseId, SegmentKind,
    DEFAULT_SOURCE_PHASE_VOLTAGE, DEFAULT_TRUNK_REACTANCE, DEFAULT_TRUNK_RESISTANCE,
};

/// Initial connection scheme of the builtin scenarios.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scheme {
    /// Contiguous thirds: nearest third on phase 1, middle on 2, farthest
    /// on 3. Balanced counts, very unequal drops.
    S112233,
    /// Round robin along the feeder. The most favorable case.
    S123123,
    /// Everyone on phase 1. The worst case for both objectives.
    S111,
}

impl Scheme {
    pub fn all() -> [Scheme; 3] {
        [Scheme::S112233, Scheme::S123123, Scheme::S111]
    }

    pub fn name(self) -> &'static str {
        match self {
            Scheme::S112233 => "112233",
            Scheme::S123123 => "123123",
            Scheme::S111 => "111",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "112233" => Ok(Scheme::S112233),
            "123123" => Ok(Scheme::S123123),
            "111" => Ok(Scheme::S111),
            other => Err(format!(
                "unknown scheme {other:?}; expected 112233, 123123 or 111"
            )),
        }
    }
}

/// Builds the reference feeder: one aluminum trunk, first customer 20 m from
/// the transformer, then one customer every 10 m, all movable, connected
/// directly at their pole (zero-length drops). Initial phases default to
/// phase 1; see [`scenario_network`] for scheme-stamped variants.
pub fn build_test_feeder(customer_count: usize) -> Network {
    assert!(customer_count >= 1, "a feeder needs at least one customer");
    let mut buses = vec![Bus { id: 0, distance_m: 0.0 }];
    let mut segments = Vec::with_capacity(customer_count);
    let mut customers = Vec::with_capacity(customer_count);
    let width = customer_count.to_string().len();
    for k in 1..=customer_count {
        let distance = 20.0 + (k as f64 - 1.0) * 10.0;
        let length = if k == 1 { 20.0 } else { 10.0 };
        buses.push(Bus { id: k, distance_m: distance });
        segments.push(LineSegment {
            from: k - 1,
            to: k,
            length_m: length,
            resistance_ohm_per_m: DEFAULT_TRUNK_RESISTANCE,
            reactance_ohm_per_m: DEFAULT_TRUNK_REACTANCE,
            kind: SegmentKind::Trunk,
        });
        customers.push(Customer {
            id: format!("C{k:0width$}"),
            bus: k,
            initial_phase: PhaseId::A,
            movable: true,
        });
    }
    Network {
        buses,
        segments,
        customers,
        source_phase_voltage: DEFAULT_SOURCE_PHASE_VOLTAGE,
        transformer_rating_kva: 250.0,
    }
}

/// The scheme's phase for every movable customer, ordered by distance from
/// the transformer, as an assignment over the network's movable customers.
///
/// For `112233` with a customer count not divisible by 3, the remainder
/// goes to phase 3's block.
pub fn apply_scheme(network: &Network, scheme: Scheme) -> PhaseAssignment {
    let order = CustomerOrder::movable(network);
    let distance_of: HashMap<usize, f64> = network
        .buses
        .iter()
        .map(|b| (b.id, b.distance_m))
        .collect();

    // Movable customers ranked by distance, ties kept in network order.
    let mut ranked: Vec<usize> = (0..order.len()).collect();
    let movable: Vec<&Customer> = network.customers.iter().filter(|c| c.movable).collect();
    ranked.sort_by(|&a, &b| {
        distance_of[&movable[a].bus]
            .partial_cmp(&distance_of[&movable[b].bus])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });

    let m = order.len();
    let third = m / 3;
    let mut genes = vec![PhaseId::A; m];
    for (rank, &gene_idx) in ranked.iter().enumerate() {
        genes[gene_idx] = match scheme {
            Scheme::S111 => PhaseId::A,
            Scheme::S123123 => PhaseId::new((rank % 3) as u8 + 1).expect("mod 3 in range"),
            Scheme::S112233 => {
                if rank < third {
                    PhaseId::A
                } else if rank < 2 * third {
                    PhaseId::B
                } else {
                    PhaseId::C
                }
            }
        };
    }
    PhaseAssignment::new(genes, order).expect("genes generated per movable customer")
}

/// Builds the reference feeder with the customers' initial phases stamped to
/// the scheme, so the identity assignment of the result equals
/// [`apply_scheme`]'s output.
pub fn scenario_network(scheme: Scheme, customer_count: usize) -> Network {
    let mut network = build_test_feeder(customer_count);
    let assignment = apply_scheme(&network, scheme);
    for customer in network.customers.iter_mut() {
        if let Some(phase) = assignment.phase_of(&customer.id) {
            customer.initial_phase = phase;
        }
    }
    network
}

/// A flat profile: every customer draws `p_watts` active and
/// `p_watts * q_fraction` reactive power in each of `n` snapshots.
pub fn constant_profile(network: &Network, p_watts: f64, q_fraction: f64, n: usize) -> LoadProfile {
    assert!(n >= 1, "a profile needs at least one snapshot");
    let q = p_watts * q_fraction;
    let snapshots = (0..n)
        .map(|t| {
            let loads = network
                .customers
                .iter()
                .map(|c| (c.id.clone(), (p_watts, q)))
                .collect();
            LoadSnapshot::new(t as i64, loads)
        })
        .collect();
    LoadProfile::new(snapshots)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn phase_counts(a: &PhaseAssignment) -> [usize; 3] {
        let mut counts = [0usize; 3];
        for g in a.genes() {
            counts[g.index()] += 1;
        }
        counts
    }

    #[test]
    fn default_feeder_geometry() {
        let network = build_test_feeder(60);
        assert_eq!(network.customers.len(), 60);
        assert_eq!(network.buses.len(), 61);
        assert_eq!(network.buses.last().unwrap().distance_m, 610.0);
        assert!(network.validate().is_empty());
        assert_eq!(network.source_phase_voltage, 230.9);
        assert_eq!(network.transformer_rating_kva, 250.0);
    }

    #[test]
    fn single_customer_feeder() {
        let network = build_test_feeder(1);
        assert_eq!(network.buses.last().unwrap().distance_m, 20.0);
        assert!(network.validate().is_empty());
    }

    #[test]
    fn ten_customer_feeder_shape() {
        let network = build_test_feeder(10);
        assert_eq!(network.buses.last().unwrap().distance_m, 110.0);
        assert_eq!(network.segments.len(), 10);
        assert!(network.validate().is_empty());
    }

    #[test]
    fn scheme_112233_is_contiguous_thirds() {
        let network = build_test_feeder(60);
        let a = apply_scheme(&network, Scheme::S112233);
        assert_eq!(phase_counts(&a), [20, 20, 20]);
        let values: Vec<u8> = a.genes().iter().map(|g| g.value()).collect();
        assert!(values[..20].iter().all(|&v| v == 1));
        assert!(values[20..40].iter().all(|&v| v == 2));
        assert!(values[40..].iter().all(|&v| v == 3));
    }

    #[test]
    fn scheme_111_puts_everyone_on_phase_one() {
        let network = build_test_feeder(60);
        let a = apply_scheme(&network, Scheme::S111);
        assert_eq!(phase_counts(&a), [60, 0, 0]);
    }

    #[test]
    fn scheme_123123_alternates() {
        let network = build_test_feeder(6);
        let a = apply_scheme(&network, Scheme::S123123);
        let values: Vec<u8> = a.genes().iter().map(|g| g.value()).collect();
        assert_eq!(values, vec![1, 2, 3, 1, 2, 3]);
    }

    #[test]
    fn scheme_123123_counts_are_balanced_for_any_size() {
        for count in 1..=20 {
            let network = build_test_feeder(count);
            let counts = phase_counts(&apply_scheme(&network, Scheme::S123123));
            let max = counts.iter().max().unwrap();
            let min = counts.iter().min().unwrap();
            assert!(max - min <= 1, "count {count}: {counts:?}");
        }
    }

    #[test]
    fn scheme_112233_remainder_goes_to_phase_three() {
        let network = build_test_feeder(7);
        let counts = phase_counts(&apply_scheme(&network, Scheme::S112233));
        assert_eq!(counts, [2, 2, 3]);
    }

    #[test]
    fn scenario_network_stamps_initial_phases() {
        let network = scenario_network(Scheme::S123123, 9);
        let identity = PhaseAssignment::initial(&network);
        let schemed = apply_scheme(&network, Scheme::S123123);
        assert_eq!(identity, schemed);
    }

    #[test]
    fn constant_profile_defaults() {
        let network = build_test_feeder(5);
        let profile = constant_profile(&network, 200.0, 0.10, 4);
        assert_eq!(profile.len(), 4);
        for snapshot in &profile.snapshots {
            assert_eq!(snapshot.customer_count(), 5);
            for customer in &network.customers {
                assert_eq!(snapshot.load_of(&customer.id), Some((200.0, 20.0)));
            }
        }
        assert_eq!(profile.snapshots[0], {
            let mut s = profile.snapshots[1].clone();
            s.timestamp = 0;
            s
        });
        assert!(network.validate_profile(&profile).is_empty());
    }
}
