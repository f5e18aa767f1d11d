//! Radial feeder data model: buses, line segments, customers, source and
//! per-customer load time series.
//!
//! A [`Network`] is immutable after construction and shared read-only by the
//! solver, the metrics and the GA. Structural problems are reported as
//! [`Violation`] values by [`Network::validate`] rather than as errors, so a
//! caller can list every defect of a file in one pass.

use std::collections::{HashMap, HashSet};
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default trunk conductor constants (aluminum, 15 mm²), ohm per meter.
pub const DEFAULT_TRUNK_RESISTANCE: f64 = 1.91e-3;
pub const DEFAULT_TRUNK_REACTANCE: f64 = 0.10e-3;

/// Default service-drop conductor constants (copper, 15 mm²), ohm per meter.
pub const DEFAULT_DROP_RESISTANCE: f64 = 1.15e-3;
pub const DEFAULT_DROP_REACTANCE: f64 = 0.08e-3;

/// Nominal phase-to-neutral source voltage in volts (400 V phase-to-phase).
pub const DEFAULT_SOURCE_PHASE_VOLTAGE: f64 = 230.9;

/// One of the three phases of the feeder. Encoded as 1, 2, 3 (A, B, C);
/// no other value is constructible.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct PhaseId(u8);

impl PhaseId {
    pub const A: PhaseId = PhaseId(1);
    pub const B: PhaseId = PhaseId(2);
    pub const C: PhaseId = PhaseId(3);

    pub fn new(value: u8) -> Result<Self> {
        match value {
            1..=3 => Ok(PhaseId(value)),
            other => Err(Error::InvalidPhase(other)),
        }
    }

    /// All three phases in order A, B, C.
    pub fn all() -> [PhaseId; 3] {
        [Self::A, Self::B, Self::C]
    }

    /// The two phases other than `self`, in ascending order.
    pub fn others(self) -> [PhaseId; 2] {
        match self.0 {
            1 => [Self::B, Self::C],
            2 => [Self::A, Self::C],
            _ => [Self::A, Self::B],
        }
    }

    /// Raw encoding in {1, 2, 3}.
    pub fn value(self) -> u8 {
        self.0
    }

    /// Zero-based index in {0, 1, 2}, for array storage per phase.
    pub fn index(self) -> usize {
        (self.0 - 1) as usize
    }

    /// Letter name: A, B or C.
    pub fn label(self) -> char {
        match self.0 {
            1 => 'A',
            2 => 'B',
            _ => 'C',
        }
    }
}

impl TryFrom<u8> for PhaseId {
    type Error = Error;
    fn try_from(value: u8) -> Result<Self> {
        PhaseId::new(value)
    }
}

impl From<PhaseId> for u8 {
    fn from(p: PhaseId) -> u8 {
        p.0
    }
}

impl fmt::Display for PhaseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label())
    }
}

/// Identifier of a bus. Bus 0 is always the transformer secondary busbar.
pub type BusId = usize;

/// A connection point along the feeder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bus {
    pub id: BusId,
    /// Electrical distance from the transformer busbar, meters.
    pub distance_m: f64,
}

/// Conductor role of a segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SegmentKind {
    /// Three-phase trunk conductor along the feeder.
    Trunk,
    /// Single customer service drop hanging off a trunk bus.
    ServiceDrop,
}

/// A conductor between two buses, directed away from the transformer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineSegment {
    pub from: BusId,
    pub to: BusId,
    pub length_m: f64,
    pub resistance_ohm_per_m: f64,
    pub reactance_ohm_per_m: f64,
    pub kind: SegmentKind,
}

impl LineSegment {
    /// Total series impedance of the segment in ohms.
    pub fn impedance(&self) -> Complex64 {
        Complex64::new(
            self.resistance_ohm_per_m * self.length_m,
            self.reactance_ohm_per_m * self.length_m,
        )
    }
}

/// A single-phase customer attached to a bus.
///
/// Non-movable customers (three-phase services, or meters without usable
/// data) keep their `initial_phase` forever and never enter the gene vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Customer {
    pub id: String,
    pub bus: BusId,
    pub initial_phase: PhaseId,
    pub movable: bool,
}

/// Immutable description of one radial feeder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Network {
    pub buses: Vec<Bus>,
    pub segments: Vec<LineSegment>,
    pub customers: Vec<Customer>,
    /// Phase-to-neutral source voltage at the busbar, volts.
    pub source_phase_voltage: f64,
    /// Transformer nameplate rating, kVA. Descriptive only.
    pub transformer_rating_kva: f64,
}

/// One structural defect found by [`Network::validate`], naming the entity
/// at fault.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    /// The offending entity, e.g. `segment 0->2`, `customer C17`, `bus 4`.
    pub entity: String,
    pub message: String,
}

impl Violation {
    fn new(entity: impl Into<String>, message: impl Into<String>) -> Self {
        Violation {
            entity: entity.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.entity, self.message)
    }
}

impl Network {
    /// Checks every structural invariant and returns one [`Violation`] per
    /// defect; an empty list means the network is well formed. Pure and
    /// idempotent.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();

        if !(self.source_phase_voltage > 0.0) || !self.source_phase_voltage.is_finite() {
            out.push(Violation::new(
                "source",
                format!(
                    "phase voltage must be a positive finite number, got {}",
                    self.source_phase_voltage
                ),
            ));
        }

        // Buses: unique ids, root at distance 0, finite distances.
        let mut ids = HashSet::new();
        for bus in &self.buses {
            if !ids.insert(bus.id) {
                out.push(Violation::new(
                    format!("bus {}", bus.id),
                    "duplicate bus id",
                ));
            }
            if !bus.distance_m.is_finite() || bus.distance_m < 0.0 {
                out.push(Violation::new(
                    format!("bus {}", bus.id),
                    format!("distance must be finite and >= 0, got {}", bus.distance_m),
                ));
            }
        }
        match self.buses.iter().find(|b| b.id == 0) {
            None => out.push(Violation::new("bus 0", "transformer busbar is missing")),
            Some(root) if root.distance_m != 0.0 => out.push(Violation::new(
                "bus 0",
                format!("transformer busbar must sit at 0 m, got {} m", root.distance_m),
            )),
            _ => {}
        }

        let distance_of: HashMap<BusId, f64> =
            self.buses.iter().map(|b| (b.id, b.distance_m)).collect();

        // Segments: positive length/resistance, directed away from the root,
        // at most one feeding segment per bus (a second one closes a loop).
        let mut parent_of: HashMap<BusId, usize> = HashMap::new();
        for (i, seg) in self.segments.iter().enumerate() {
            let name = format!("segment {}->{}", seg.from, seg.to);
            if !(seg.length_m > 0.0) || !seg.length_m.is_finite() {
                out.push(Violation::new(
                    name.clone(),
                    format!("length must be finite and > 0, got {}", seg.length_m),
                ));
            }
            if !(seg.resistance_ohm_per_m > 0.0) || !seg.resistance_ohm_per_m.is_finite() {
                out.push(Violation::new(
                    name.clone(),
                    format!(
                        "resistance must be finite and > 0 ohm/m, got {}",
                        seg.resistance_ohm_per_m
                    ),
                ));
            }
            if seg.reactance_ohm_per_m < 0.0 || !seg.reactance_ohm_per_m.is_finite() {
                out.push(Violation::new(
                    name.clone(),
                    format!(
                        "reactance must be finite and >= 0 ohm/m, got {}",
                        seg.reactance_ohm_per_m
                    ),
                ));
            }
            if !distance_of.contains_key(&seg.from) {
                out.push(Violation::new(
                    name.clone(),
                    format!("from-bus {} does not exist", seg.from),
                ));
                continue;
            }
            if !distance_of.contains_key(&seg.to) {
                out.push(Violation::new(
                    name.clone(),
                    format!("to-bus {} does not exist", seg.to),
                ));
                continue;
            }
            if seg.from >= seg.to {
                out.push(Violation::new(
                    name.clone(),
                    "segments must be directed away from the transformer (from < to)",
                ));
                continue;
            }
            if seg.kind == SegmentKind::Trunk
                && distance_of[&seg.to] <= distance_of[&seg.from]
            {
                out.push(Violation::new(
                    name.clone(),
                    "trunk distances must strictly increase away from the transformer",
                ));
            }
            if parent_of.insert(seg.to, i).is_some() {
                out.push(Violation::new(
                    name,
                    format!("bus {} is fed twice; this segment closes a loop", seg.to),
                ));
            }
        }

        // Reachability: every bus must hang off the root through the parent map.
        for bus in &self.buses {
            if bus.id == 0 {
                continue;
            }
            let mut current = bus.id;
            let mut hops = 0usize;
            let reachable = loop {
                match parent_of.get(&current) {
                    Some(&seg_idx) => {
                        current = self.segments[seg_idx].from;
                        if current == 0 {
                            break true;
                        }
                    }
                    None => break false,
                }
                hops += 1;
                if hops > self.segments.len() {
                    break false;
                }
            };
            if !reachable {
                out.push(Violation::new(
                    format!("bus {}", bus.id),
                    "not connected to the transformer busbar",
                ));
            }
        }

        // Customers: at least one, unique ids, existing buses.
        if self.customers.is_empty() {
            out.push(Violation::new("network", "at least one customer is required"));
        }
        let mut customer_ids = HashSet::new();
        for customer in &self.customers {
            if !customer_ids.insert(customer.id.as_str()) {
                out.push(Violation::new(
                    format!("customer {}", customer.id),
                    "duplicate customer id",
                ));
            }
            if !distance_of.contains_key(&customer.bus) {
                out.push(Violation::new(
                    format!("customer {}", customer.id),
                    format!("references nonexistent bus {}", customer.bus),
                ));
            }
        }

        out
    }

    /// The last trunk bus of the feeder: maximal distance from the
    /// transformer, ties broken by the highest bus id. Service-drop buses do
    /// not qualify. Falls back to bus 0 on a trunk-less network.
    pub fn end_of_line_bus(&self) -> BusId {
        let trunk: HashSet<BusId> = self
            .segments
            .iter()
            .filter(|s| s.kind == SegmentKind::Trunk)
            .map(|s| s.to)
            .chain(std::iter::once(0))
            .collect();
        self.buses
            .iter()
            .filter(|b| trunk.contains(&b.id))
            .max_by(|a, b| {
                a.distance_m
                    .partial_cmp(&b.distance_m)
                    .unwrap_or(std::cmp::Ordering::Equal)
                    .then(a.id.cmp(&b.id))
            })
            .map(|b| b.id)
            .unwrap_or(0)
    }

    /// Ids of movable customers, in network order. This is the gene ordering
    /// of every assignment built for this network.
    pub fn movable_customer_ids(&self) -> Vec<String> {
        self.customers
            .iter()
            .filter(|c| c.movable)
            .map(|c| c.id.clone())
            .collect()
    }

    /// Checks that a profile covers exactly this network's customer set in
    /// every snapshot. Complements [`Network::validate`].
    pub fn validate_profile(&self, profile: &LoadProfile) -> Vec<Violation> {
        let mut out = Vec::new();
        if profile.snapshots.is_empty() {
            out.push(Violation::new("profile", "at least one snapshot is required"));
            return out;
        }
        let expected: HashSet<&str> = self.customers.iter().map(|c| c.id.as_str()).collect();
        for (t, snapshot) in profile.snapshots.iter().enumerate() {
            for customer in &self.customers {
                if snapshot.load_of(&customer.id).is_none() {
                    out.push(Violation::new(
                        format!("snapshot {t}"),
                        format!("missing load for customer {}", customer.id),
                    ));
                }
            }
            for id in snapshot.customer_ids() {
                if !expected.contains(id) {
                    out.push(Violation::new(
                        format!("snapshot {t}"),
                        format!("load for unknown customer {id}"),
                    ));
                }
            }
        }
        out
    }
}

/// Loads of every customer at one metering instant.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadSnapshot {
    pub timestamp: i64,
    loads: HashMap<String, (f64, f64)>,
}

impl LoadSnapshot {
    pub fn new(timestamp: i64, loads: HashMap<String, (f64, f64)>) -> Self {
        LoadSnapshot { timestamp, loads }
    }

    /// (active W, reactive var) drawn by a customer, if present.
    pub fn load_of(&self, customer_id: &str) -> Option<(f64, f64)> {
        self.loads.get(customer_id).copied()
    }

    pub fn customer_ids(&self) -> impl Iterator<Item = &str> {
        self.loads.keys().map(String::as_str)
    }

    pub fn customer_count(&self) -> usize {
        self.loads.len()
    }
}

/// Ordered series of load snapshots; the `n` samples the aggregate metrics
/// run over.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct LoadProfile {
    pub snapshots: Vec<LoadSnapshot>,
}

impl LoadProfile {
    pub fn new(snapshots: Vec<LoadSnapshot>) -> Self {
        LoadProfile { snapshots }
    }

    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenarios;

    fn chain_network() -> Network {
        Network {
            buses: vec![
                Bus { id: 0, distance_m: 0.0 },
                Bus { id: 1, distance_m: 20.0 },
                Bus { id: 2, distance_m: 30.0 },
            ],
            segments: vec![
                LineSegment {
                    from: 0,
                    to: 1,
                    length_m: 20.0,
                    resistance_ohm_per_m: DEFAULT_TRUNK_RESISTANCE,
                    reactance_ohm_per_m: DEFAULT_TRUNK_REACTANCE,
                    kind: SegmentKind::Trunk,
                },
                LineSegment {
                    from: 1,
                    to: 2,
                    length_m: 10.0,
                    resistance_ohm_per_m: DEFAULT_TRUNK_RESISTANCE,
                    reactance_ohm_per_m: DEFAULT_TRUNK_REACTANCE,
                    kind: SegmentKind::Trunk,
                },
            ],
            customers: vec![
                Customer {
                    id: "C1".into(),
                    bus: 1,
                    initial_phase: PhaseId::A,
                    movable: true,
                },
                Customer {
                    id: "C2".into(),
                    bus: 2,
                    initial_phase: PhaseId::B,
                    movable: true,
                },
            ],
            source_phase_voltage: DEFAULT_SOURCE_PHASE_VOLTAGE,
            transformer_rating_kva: 250.0,
        }
    }

    #[test]
    fn phase_id_rejects_out_of_range() {
        assert!(PhaseId::new(0).is_err());
        assert!(PhaseId::new(4).is_err());
        for v in 1..=3 {
            assert_eq!(PhaseId::new(v).unwrap().value(), v);
        }
    }

    #[test]
    fn well_formed_scenario_has_no_violations() {
        let network = scenarios::build_test_feeder(60);
        assert!(network.validate().is_empty());
    }

    #[test]
    fn loop_segment_yields_one_violation_naming_it() {
        let mut network = chain_network();
        network.segments.push(LineSegment {
            from: 0,
            to: 2,
            length_m: 30.0,
            resistance_ohm_per_m: DEFAULT_TRUNK_RESISTANCE,
            reactance_ohm_per_m: DEFAULT_TRUNK_REACTANCE,
            kind: SegmentKind::Trunk,
        });
        let violations = network.validate();
        assert_eq!(violations.len(), 1, "{violations:?}");
        assert_eq!(violations[0].entity, "segment 0->2");
        assert!(violations[0].message.contains("loop"));
    }

    #[test]
    fn customer_on_missing_bus_is_flagged() {
        let mut network = chain_network();
        network.customers[1].bus = 9;
        let violations = network.validate();
        assert_eq!(violations.len(), 1);
        assert_eq!(violations[0].entity, "customer C2");
    }

    #[test]
    fn validate_is_idempotent() {
        let mut network = chain_network();
        network.customers[0].bus = 7;
        assert_eq!(network.validate(), network.validate());
    }

    #[test]
    fn end_of_line_is_farthest_trunk_bus() {
        let network = scenarios::build_test_feeder(60);
        let eol = network.end_of_line_bus();
        let bus = network.buses.iter().find(|b| b.id == eol).unwrap();
        assert_eq!(bus.distance_m, 20.0 + 59.0 * 10.0);
        for b in &network.buses {
            assert!(b.distance_m <= bus.distance_m);
        }
    }

    #[test]
    fn end_of_line_on_bare_busbar_is_root() {
        let network = Network {
            buses: vec![Bus { id: 0, distance_m: 0.0 }],
            segments: vec![],
            customers: vec![Customer {
                id: "C1".into(),
                bus: 0,
                initial_phase: PhaseId::A,
                movable: true,
            }],
            source_phase_voltage: DEFAULT_SOURCE_PHASE_VOLTAGE,
            transformer_rating_kva: 250.0,
        };
        assert_eq!(network.end_of_line_bus(), 0);
    }

    #[test]
    fn end_of_line_distance_tie_takes_higher_id() {
        let mut network = chain_network();
        network.buses[2].distance_m = 20.0;
        // Degenerate on purpose; only the tie rule is under test.
        assert_eq!(network.end_of_line_bus(), 2);
    }

    #[test]
    fn profile_coverage_is_checked_both_ways() {
        let network = chain_network();
        let mut loads = HashMap::new();
        loads.insert("C1".to_string(), (200.0, 20.0));
        loads.insert("GHOST".to_string(), (1.0, 0.0));
        let profile = LoadProfile::new(vec![LoadSnapshot::new(0, loads)]);
        let violations = network.validate_profile(&profile);
        assert_eq!(violations.len(), 2, "{violations:?}");
        assert!(violations.iter().any(|v| v.message.contains("C2")));
        assert!(violations.iter().any(|v| v.message.contains("GHOST")));
    }
}
