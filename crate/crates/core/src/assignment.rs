//! Integer phase-assignment genome: one gene in {1, 2, 3} per movable
//! customer, indexed by a fixed customer ordering.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::network::{Network, PhaseId};

/// The fixed ordering of movable customer ids that genes index.
///
/// Every assignment produced for one network shares the same order (cheaply,
/// through an `Arc`), so gene position `i` always refers to the same
/// customer.
#[derive(Debug, Clone, Serialize)]
pub struct CustomerOrder(Arc<[String]>);

impl CustomerOrder {
    /// Order over the movable customers of a network, in network order.
    pub fn movable(network: &Network) -> Self {
        CustomerOrder(network.movable_customer_ids().into())
    }

    pub fn from_ids(ids: Vec<String>) -> Self {
        CustomerOrder(ids.into())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.0
    }

    pub fn position(&self, customer_id: &str) -> Option<usize> {
        self.0.iter().position(|id| id == customer_id)
    }
}

impl PartialEq for CustomerOrder {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0 == other.0
    }
}

impl Eq for CustomerOrder {}

/// A candidate phase configuration: the GA individual.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseAssignment {
    genes: Vec<PhaseId>,
    order: CustomerOrder,
}

impl PhaseAssignment {
    /// Builds an assignment, checking gene count against the order.
    pub fn new(genes: Vec<PhaseId>, order: CustomerOrder) -> Result<Self> {
        if genes.len() != order.len() {
            return Err(Error::LengthMismatch {
                left: genes.len(),
                right: order.len(),
            });
        }
        Ok(PhaseAssignment { genes, order })
    }

    /// The as-built configuration: every movable customer on its initial
    /// phase. This is the reference `N` is counted against.
    pub fn initial(network: &Network) -> Self {
        let order = CustomerOrder::movable(network);
        let genes = network
            .customers
            .iter()
            .filter(|c| c.movable)
            .map(|c| c.initial_phase)
            .collect();
        PhaseAssignment { genes, order }
    }

    pub fn genes(&self) -> &[PhaseId] {
        &self.genes
    }

    pub fn order(&self) -> &CustomerOrder {
        &self.order
    }

    pub fn len(&self) -> usize {
        self.genes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.genes.is_empty()
    }

    /// Gene at position `i`.
    pub fn phase_at(&self, i: usize) -> PhaseId {
        self.genes[i]
    }

    /// Proposed phase of a customer, if it is part of this assignment.
    pub fn phase_of(&self, customer_id: &str) -> Option<PhaseId> {
        self.order.position(customer_id).map(|i| self.genes[i])
    }

    /// Returns a copy with gene `i` replaced.
    pub fn with_gene(&self, i: usize, phase: PhaseId) -> Self {
        let mut genes = self.genes.clone();
        genes[i] = phase;
        PhaseAssignment {
            genes,
            order: self.order.clone(),
        }
    }

    /// Number of positions where the two assignments differ (Hamming
    /// distance over genes).
    pub fn hamming(&self, other: &Self) -> Result<usize> {
        if self.genes.len() != other.genes.len() {
            return Err(Error::LengthMismatch {
                left: self.genes.len(),
                right: other.genes.len(),
            });
        }
        debug_assert!(self.order == other.order, "assignments index different customers");
        Ok(self
            .genes
            .iter()
            .zip(&other.genes)
            .filter(|(a, b)| a != b)
            .count())
    }
}
