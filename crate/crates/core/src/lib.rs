//! Phase rebalancing for low-voltage radial feeders.
//!
//! Utilities pick which customers of a distribution feeder to reconnect to a
//! different phase so that transformer load imbalance and end-of-line
//! voltage drop both shrink with as few field interventions as possible.
//! The search is a deterministic-crowding genetic algorithm over integer
//! phase genomes; candidate configurations are scored by an embedded
//! backward-forward-sweep load flow that treats each phase as an independent
//! radial circuit with constant-power customer loads.
//!
//! Modeling limits, by design: phases are electrically decoupled (no mutual
//! impedance or neutral-shift coupling), the transformer is a stiff source,
//! and customers are single-phase constant-power loads.
//!
//! The crates `phasebal-cli` and `phasebal-web` put a command line and a
//! browser demo on top of this library.

pub mod assignment;
pub mod error;
pub mod ga;
pub mod io;
pub mod loadflow;
pub mod metrics;
pub mod network;
pub mod report;
pub mod scenarios;

pub use assignment::{CustomerOrder, PhaseAssignment};
pub use error::{Error, Result};
pub use ga::{GaConfig, GaRun, GaRunResult, GenerationRecord};
pub use loadflow::{PowerFlowResult, SolverOptions};
pub use metrics::{FitnessReport, ObjectiveWeights};
pub use network::{
    Bus, BusId, Customer, LineSegment, LoadProfile, LoadSnapshot, Network, PhaseId, SegmentKind,
    Violation,
};
pub use report::{PhaseSummary, SimulationSummary};
pub use scenarios::Scheme;
