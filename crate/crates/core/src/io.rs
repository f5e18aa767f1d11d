//! File formats: network description (TOML), load profiles, reconnection
//! plans, GA history and voltage-profile exports (all delimited text).
//!
//! Readers reject malformed files with the path and line of the offense;
//! invariant breaches found after parsing are located back to the entity's
//! block in the file.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::assignment::PhaseAssignment;
use crate::ga::GenerationRecord;
use crate::loadflow::PowerFlowResult;
use crate::network::{
    Bus, BusId, Customer, LineSegment, LoadProfile, LoadSnapshot, Network, PhaseId, SegmentKind,
    DEFAULT_DROP_REACTANCE, DEFAULT_DROP_RESISTANCE, DEFAULT_TRUNK_REACTANCE,
    DEFAULT_TRUNK_RESISTANCE,
};

/// Errors reading or writing the on-disk formats.
#[derive(Debug, Error)]
pub enum FileError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },
    #[error("{path}: invalid data:\n  {}", problems.join("\n  "))]
    Invalid { path: String, problems: Vec<String> },
}

impl FileError {
    fn io(path: &Path, source: std::io::Error) -> Self {
        FileError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}

pub type FileResult<T> = std::result::Result<T, FileError>;

// ---------------------------------------------------------------------------
// Network file (TOML)
// ---------------------------------------------------------------------------

/// Conductor constants applied to segments that do not override them.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConductorDefaults {
    pub trunk_resistance_ohm_per_m: f64,
    pub trunk_reactance_ohm_per_m: f64,
    pub drop_resistance_ohm_per_m: f64,
    pub drop_reactance_ohm_per_m: f64,
}

impl Default for ConductorDefaults {
    fn default() -> Self {
        ConductorDefaults {
            trunk_resistance_ohm_per_m: DEFAULT_TRUNK_RESISTANCE,
            trunk_reactance_ohm_per_m: DEFAULT_TRUNK_REACTANCE,
            drop_resistance_ohm_per_m: DEFAULT_DROP_RESISTANCE,
            drop_reactance_ohm_per_m: DEFAULT_DROP_REACTANCE,
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NetworkFile {
    source: SourceSection,
    #[serde(default)]
    conductors: ConductorDefaults,
    #[serde(rename = "bus")]
    buses: Vec<BusRow>,
    #[serde(rename = "segment", default)]
    segments: Vec<SegmentRow>,
    #[serde(rename = "customer")]
    customers: Vec<CustomerRow>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SourceSection {
    phase_voltage_v: f64,
    #[serde(default)]
    transformer_rating_kva: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BusRow {
    id: BusId,
    distance_m: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SegmentRow {
    from: BusId,
    to: BusId,
    length_m: f64,
    kind: SegmentKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    resistance_ohm_per_m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    reactance_ohm_per_m: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CustomerRow {
    id: String,
    bus: BusId,
    phase: PhaseId,
    #[serde(default = "default_true")]
    movable: bool,
}

fn default_true() -> bool {
    true
}

/// Reads and validates a network file; any invariant violation rejects the
/// file, located back to the offending block.
pub fn read_network(path: &Path) -> FileResult<Network> {
    let text = fs::read_to_string(path).map_err(|e| FileError::io(path, e))?;
    parse_network(&text, &path.display().to_string())
}

/// Parses a network from TOML text. `label` stands in for the path in
/// error messages.
pub fn parse_network(text: &str, label: &str) -> FileResult<Network> {
    let file: NetworkFile = toml::from_str(text).map_err(|e| FileError::Parse {
        path: label.to_string(),
        line: e
            .span()
            .map(|s| line_of_offset(text, s.start))
            .unwrap_or(1),
        message: e.message().to_string(),
    })?;

    let defaults = file.conductors;
    let network = Network {
        buses: file
            .buses
            .iter()
            .map(|b| Bus {
                id: b.id,
                distance_m: b.distance_m,
            })
            .collect(),
        segments: file
            .segments
            .iter()
            .map(|s| {
                let (r, x) = match s.kind {
                    SegmentKind::Trunk => (
                        defaults.trunk_resistance_ohm_per_m,
                        defaults.trunk_reactance_ohm_per_m,
                    ),
                    SegmentKind::ServiceDrop => (
                        defaults.drop_resistance_ohm_per_m,
                        defaults.drop_reactance_ohm_per_m,
                    ),
                };
                LineSegment {
                    from: s.from,
                    to: s.to,
                    length_m: s.length_m,
                    resistance_ohm_per_m: s.resistance_ohm_per_m.unwrap_or(r),
                    reactance_ohm_per_m: s.reactance_ohm_per_m.unwrap_or(x),
                    kind: s.kind,
                }
            })
            .collect(),
        customers: file
            .customers
            .iter()
            .map(|c| Customer {
                id: c.id.clone(),
                bus: c.bus,
                initial_phase: c.phase,
                movable: c.movable,
            })
            .collect(),
        source_phase_voltage: file.source.phase_voltage_v,
        transformer_rating_kva: file.source.transformer_rating_kva,
    };

    let violations = network.validate();
    if !violations.is_empty() {
        let problems = violations
            .iter()
            .map(|v| match locate_entity(text, &file, &v.entity) {
                Some(line) => format!("line {line}: {v}"),
                None => v.to_string(),
            })
            .collect();
        return Err(FileError::Invalid {
            path: label.to_string(),
            problems,
        });
    }
    Ok(network)
}

/// Serializes a network to the TOML format understood by [`read_network`].
/// Segment impedances are written explicitly, so the file round-trips
/// exactly.
pub fn network_to_string(network: &Network) -> String {
    let file = NetworkFile {
        source: SourceSection {
            phase_voltage_v: network.source_phase_voltage,
            transformer_rating_kva: network.transformer_rating_kva,
        },
        conductors: ConductorDefaults::default(),
        buses: network
            .buses
            .iter()
            .map(|b| BusRow {
                id: b.id,
                distance_m: b.distance_m,
            })
            .collect(),
        segments: network
            .segments
            .iter()
            .map(|s| SegmentRow {
                from: s.from,
                to: s.to,
                length_m: s.length_m,
                kind: s.kind,
                resistance_ohm_per_m: Some(s.resistance_ohm_per_m),
                reactance_ohm_per_m: Some(s.reactance_ohm_per_m),
            })
            .collect(),
        customers: network
            .customers
            .iter()
            .map(|c| CustomerRow {
                id: c.id.clone(),
                bus: c.bus,
                phase: c.initial_phase,
                movable: c.movable,
            })
            .collect(),
    };
    toml::to_string_pretty(&file).expect("network model serializes")
}

pub fn write_network(path: &Path, network: &Network) -> FileResult<()> {
    fs::write(path, network_to_string(network)).map_err(|e| FileError::io(path, e))
}

fn line_of_offset(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())]
        .bytes()
        .filter(|&b| b == b'\n')
        .count()
        + 1
}

/// Line of the n-th `[[name]]` block header in the file.
fn line_of_block(text: &str, name: &str, index: usize) -> Option<usize> {
    let header = format!("[[{name}]]");
    text.lines()
        .enumerate()
        .filter(|(_, l)| l.trim() == header)
        .nth(index)
        .map(|(i, _)| i + 1)
}

/// Maps a violation entity like `segment 0->2` or `customer C17` back to the
/// line of its block in the TOML text.
fn locate_entity(text: &str, file: &NetworkFile, entity: &str) -> Option<usize> {
    if let Some(rest) = entity.strip_prefix("bus ") {
        let id: BusId = rest.parse().ok()?;
        let index = file.buses.iter().position(|b| b.id == id)?;
        return line_of_block(text, "bus", index);
    }
    if let Some(rest) = entity.strip_prefix("segment ") {
        let (from, to) = rest.split_once("->")?;
        let (from, to): (BusId, BusId) = (from.parse().ok()?, to.parse().ok()?);
        let index = file
            .segments
            .iter()
            .position(|s| s.from == from && s.to == to)?;
        return line_of_block(text, "segment", index);
    }
    if let Some(id) = entity.strip_prefix("customer ") {
        let index = file.customers.iter().position(|c| c.id == id)?;
        return line_of_block(text, "customer", index);
    }
    None
}

// ---------------------------------------------------------------------------
// Load profile (CSV)
// ---------------------------------------------------------------------------

const PROFILE_HEADER: [&str; 4] = [
    "timestamp",
    "customer_id",
    "active_power_w",
    "reactive_power_var",
];

/// Reads a load profile: one row per (timestamp, customer), timestamps
/// ascending, every snapshot covering the same customer set.
pub fn read_profile(path: &Path) -> FileResult<LoadProfile> {
    let text = fs::read_to_string(path).map_err(|e| FileError::io(path, e))?;
    parse_profile(&text, &path.display().to_string())
}

pub fn parse_profile(text: &str, label: &str) -> FileResult<LoadProfile> {
    let parse_err = |line: usize, message: String| FileError::Parse {
        path: label.to_string(),
        line,
        message,
    };

    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| parse_err(1, e.to_string()))?
        .clone();
    if headers.iter().collect::<Vec<_>>() != PROFILE_HEADER {
        return Err(parse_err(
            1,
            format!(
                "expected header {}, got {}",
                PROFILE_HEADER.join(","),
                headers.iter().collect::<Vec<_>>().join(",")
            ),
        ));
    }

    let mut snapshots: Vec<LoadSnapshot> = Vec::new();
    let mut current: Option<(i64, HashMap<String, (f64, f64)>, u64)> = None;
    let mut first_ids: Option<Vec<String>> = None;

    let flush = |current: &mut Option<(i64, HashMap<String, (f64, f64)>, u64)>,
                     snapshots: &mut Vec<LoadSnapshot>,
                     first_ids: &mut Option<Vec<String>>|
     -> FileResult<()> {
        if let Some((ts, loads, start_line)) = current.take() {
            let mut ids: Vec<String> = loads.keys().cloned().collect();
            ids.sort();
            match first_ids {
                None => *first_ids = Some(ids),
                Some(expected) => {
                    if &ids != expected {
                        let missing: Vec<_> =
                            expected.iter().filter(|id| !ids.contains(id)).collect();
                        let extra: Vec<_> =
                            ids.iter().filter(|id| !expected.contains(id)).collect();
                        return Err(parse_err(
                            start_line as usize,
                            format!(
                                "snapshot {ts} does not cover the same customers as the first one \
                                 (missing: {missing:?}, unexpected: {extra:?})"
                            ),
                        ));
                    }
                }
            }
            snapshots.push(LoadSnapshot::new(ts, loads));
        }
        Ok(())
    };

    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e
                .position()
                .map(|p| p.line() as usize)
                .unwrap_or(0);
            parse_err(line, e.to_string())
        })?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
        if record.len() != 4 {
            return Err(parse_err(line, format!("expected 4 fields, got {}", record.len())));
        }

        let ts: i64 = record[0]
            .parse()
            .map_err(|_| parse_err(line, format!("bad timestamp {:?}", &record[0])))?;
        let id = record[1].to_string();
        let p: f64 = record[2]
            .parse()
            .map_err(|_| parse_err(line, format!("bad active power {:?}", &record[2])))?;
        let q: f64 = record[3]
            .parse()
            .map_err(|_| parse_err(line, format!("bad reactive power {:?}", &record[3])))?;
        if !p.is_finite() || p < 0.0 {
            return Err(parse_err(line, format!("active power must be finite and >= 0 W, got {p}")));
        }
        if !q.is_finite() {
            return Err(parse_err(line, format!("reactive power must be finite, got {q}")));
        }

        match &mut current {
            Some((current_ts, loads, _)) if *current_ts == ts => {
                if loads.insert(id.clone(), (p, q)).is_some() {
                    return Err(parse_err(line, format!("duplicate row for customer {id} at timestamp {ts}")));
                }
            }
            Some((current_ts, ..)) => {
                if ts < *current_ts {
                    return Err(parse_err(line, format!("timestamps must be ascending: {ts} after {current_ts}")));
                }
                flush(&mut current, &mut snapshots, &mut first_ids)?;
                current = Some((ts, HashMap::from([(id, (p, q))]), line as u64));
            }
            None => current = Some((ts, HashMap::from([(id, (p, q))]), line as u64)),
        }
    }
    flush(&mut current, &mut snapshots, &mut first_ids)?;

    if snapshots.is_empty() {
        return Err(parse_err(1, "profile has no data rows".to_string()));
    }
    Ok(LoadProfile::new(snapshots))
}

/// Serializes a profile; customers are emitted in id order within each
/// snapshot so the output is deterministic.
pub fn profile_to_string(profile: &LoadProfile) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(PROFILE_HEADER).expect("header writes");
    for snapshot in &profile.snapshots {
        let mut ids: Vec<&str> = snapshot.customer_ids().collect();
        ids.sort_unstable();
        for id in ids {
            let (p, q) = snapshot.load_of(id).expect("listed id is present");
            writer
                .write_record(&[
                    snapshot.timestamp.to_string(),
                    id.to_string(),
                    p.to_string(),
                    q.to_string(),
                ])
                .expect("row writes");
        }
    }
    String::from_utf8(writer.into_inner().expect("csv buffer")).expect("csv is utf-8")
}

pub fn write_profile(path: &Path, profile: &LoadProfile) -> FileResult<()> {
    fs::write(path, profile_to_string(profile)).map_err(|e| FileError::io(path, e))
}

// ---------------------------------------------------------------------------
// Reconnection plan / solution file (CSV)
// ---------------------------------------------------------------------------

const SOLUTION_HEADER: [&str; 3] = ["customer_id", "from_phase", "to_phase"];

/// Reads a reconnection plan and applies it to the network's as-built
/// configuration, returning the proposed assignment. Rows must reference
/// movable customers and state their current phase correctly, which guards
/// against stale plans.
pub fn read_solution(path: &Path, network: &Network) -> FileResult<PhaseAssignment> {
    let text = fs::read_to_string(path).map_err(|e| FileError::io(path, e))?;
    parse_solution(&text, &path.display().to_string(), network)
}

pub fn parse_solution(text: &str, label: &str, network: &Network) -> FileResult<PhaseAssignment> {
    let parse_err = |line: usize, message: String| FileError::Parse {
        path: label.to_string(),
        line,
        message,
    };

    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| parse_err(1, e.to_string()))?
        .clone();
    if headers.iter().collect::<Vec<_>>() != SOLUTION_HEADER {
        return Err(parse_err(
            1,
            format!(
                "expected header {}, got {}",
                SOLUTION_HEADER.join(","),
                headers.iter().collect::<Vec<_>>().join(",")
            ),
        ));
    }

    let mut assignment = PhaseAssignment::initial(network);
    let mut seen: Vec<String> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
            parse_err(line, e.to_string())
        })?;
        let line = record.position().map(|p| p.line() as usize).unwrap_or(0);

        let id = record[0].to_string();
        let parse_phase = |field: &str| -> FileResult<PhaseId> {
            field
                .parse::<u8>()
                .ok()
                .and_then(|v| PhaseId::new(v).ok())
                .ok_or_else(|| parse_err(line, format!("bad phase {field:?}; expected 1, 2 or 3")))
        };
        let from = parse_phase(&record[1])?;
        let to = parse_phase(&record[2])?;

        let gene = assignment.order().position(&id).ok_or_else(|| {
            parse_err(line, format!("customer {id} is not a movable customer of the network"))
        })?;
        let current = network
            .customers
            .iter()
            .find(|c| c.id == id)
            .expect("movable customer exists")
            .initial_phase;
        if from != current {
            return Err(parse_err(
                line,
                format!(
                    "customer {id} is on phase {}, not {}; the plan is stale",
                    current.value(),
                    from.value()
                ),
            ));
        }
        if from == to {
            return Err(parse_err(line, format!("customer {id} moves to its own phase")));
        }
        if seen.contains(&id) {
            return Err(parse_err(line, format!("duplicate row for customer {id}")));
        }
        seen.push(id);
        assignment = assignment.with_gene(gene, to);
    }
    Ok(assignment)
}

/// Serializes the changed customers of a proposed assignment, one row per
/// reconnection, in gene order.
pub fn solution_to_string(initial: &PhaseAssignment, proposed: &PhaseAssignment) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(SOLUTION_HEADER).expect("header writes");
    for (i, id) in proposed.order().ids().iter().enumerate() {
        let (from, to) = (initial.phase_at(i), proposed.phase_at(i));
        if from != to {
            writer
                .write_record(&[id.clone(), from.value().to_string(), to.value().to_string()])
                .expect("row writes");
        }
    }
    String::from_utf8(writer.into_inner().expect("csv buffer")).expect("csv is utf-8")
}

pub fn write_solution(
    path: &Path,
    initial: &PhaseAssignment,
    proposed: &PhaseAssignment,
) -> FileResult<()> {
    fs::write(path, solution_to_string(initial, proposed)).map_err(|e| FileError::io(path, e))
}

// ---------------------------------------------------------------------------
// GA history and voltage-profile exports (CSV)
// ---------------------------------------------------------------------------

/// Serializes the per-generation best-so-far series.
pub fn history_to_string(history: &[GenerationRecord]) -> String {
    let mut out = String::from("generation,best_fitness,imbalance_b,voltage_drop,changes\n");
    for r in history {
        writeln!(
            out,
            "{},{},{},{},{}",
            r.generation, r.best_fitness, r.best_imbalance, r.best_voltage_drop, r.best_changes
        )
        .expect("string write");
    }
    out
}

pub fn write_history(path: &Path, history: &[GenerationRecord]) -> FileResult<()> {
    fs::write(path, history_to_string(history)).map_err(|e| FileError::io(path, e))
}

/// Serializes bus voltages along the feeder, one row per
/// (snapshot, bus, phase), for plotting the voltage profile per phase.
pub fn voltage_profile_to_string(network: &Network, results: &[PowerFlowResult]) -> String {
    let distance_of: HashMap<BusId, f64> = network
        .buses
        .iter()
        .map(|b| (b.id, b.distance_m))
        .collect();
    let mut out = String::from("snapshot,bus,distance_m,phase,voltage_v\n");
    for (t, result) in results.iter().enumerate() {
        for (bus, voltages) in result.iter_bus_voltages() {
            for phase in PhaseId::all() {
                writeln!(
                    out,
                    "{},{},{},{},{}",
                    t,
                    bus,
                    distance_of[&bus],
                    phase.value(),
                    voltages[phase.index()].norm()
                )
                .expect("string write");
            }
        }
    }
    out
}

pub fn write_voltage_profile(
    path: &Path,
    network: &Network,
    results: &[PowerFlowResult],
) -> FileResult<()> {
    fs::write(path, voltage_profile_to_string(network, results))
        .map_err(|e| FileError::io(path, e))
}
