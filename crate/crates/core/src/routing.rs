//! Next-hop selection.
//!
//! For each packet the holder builds a table of allowed neighbors and scores
//! each one as
//!
//! ```text
//! cost = α · delay + β / energy + γ / prr
//! ```
//!
//! in raw SI units (seconds, joules). The lowest finite cost wins. A neighbor
//! whose queue is unstable, whose usable energy is gone, or whose link never
//! delivers gets an infinite cost and can never be chosen.

use thiserror::Error;

use crate::energy::RadioParams;
use crate::geometry::{self, NodeId, Position, Topology};
use crate::node::{Packet, TrafficClass};
use crate::queueing::{self, QueueModelParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum RouteError {
    #[error("no allowed neighbor")]
    EmptyTable,
    #[error("no neighbor with finite cost")]
    NoRoute,
}

#[derive(Debug, Clone, Copy, PartialEq, Error)]
#[error("invalid cost weights: {0}")]
pub struct InvalidWeights(&'static str);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostWeights {
    alpha: f64,
    beta: f64,
    gamma: f64,
}

impl CostWeights {
    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Result<Self, InvalidWeights> {
        let all = [alpha, beta, gamma];
        if all.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(InvalidWeights("weights must be finite and non-negative"));
        }
        if all.iter().all(|w| *w == 0.0) {
            return Err(InvalidWeights("at least one weight must be positive"));
        }
        Ok(Self { alpha, beta, gamma })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Multiplies every weight by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self, InvalidWeights> {
        Self::new(self.alpha * factor, self.beta * factor, self.gamma * factor)
    }
}

impl Default for CostWeights {
    fn default() -> Self {
        Self {
            alpha: 0.6,
            beta: 0.3,
            gamma: 0.1,
        }
    }
}

/// Weighted link cost. Infinite when the neighbor cannot usefully take the
/// packet.
pub fn cost(delay: f64, energy: f64, prr: f64, weights: &CostWeights) -> f64 {
    if !delay.is_finite() || energy.is_nan() || energy <= 0.0 || prr.is_nan() || prr <= 0.0 {
        return f64::INFINITY;
    }
    weights.alpha * delay + weights.beta / energy + weights.gamma / prr
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NeighborEntry {
    pub id: NodeId,
    /// Expected queueing wait at the neighbor, plus transmission time when
    /// enabled. Infinite when the neighbor's queue model is unstable.
    pub predicted_delay: f64,
    /// Neighbor's residual energy after paying to receive this packet.
    pub usable_energy: f64,
    pub prr: f64,
    pub cost: f64,
}

impl NeighborEntry {
    pub fn is_finite(&self) -> bool {
        self.cost.is_finite()
    }
}

/// What a sender can see of the network when routing. The simulator exposes
/// ground truth here.
pub trait NetworkSnapshot {
    fn topology(&self) -> &Topology;
    /// Allowed neighbors of `sender`, alive or not, in id order.
    fn candidates(&self, sender: NodeId) -> &[NodeId];
    fn is_alive(&self, id: NodeId) -> bool;
    fn residual_energy(&self, id: NodeId) -> f64;
    /// Current load estimate at `id`'s transmit queues.
    fn queue_params(&self, id: NodeId) -> QueueModelParams;
    fn prr(&self, from: NodeId, to: NodeId) -> f64;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RouteSettings {
    pub weights: CostWeights,
    pub radio: RadioParams,
    /// Add the packet's own transmission time to each predicted delay.
    pub include_service_time: bool,
    pub predictive_drop: bool,
}

/// Predicted per-hop delay for a packet of `class` queued at a node with the
/// given load.
pub fn predicted_delay(
    params: &QueueModelParams,
    class: TrafficClass,
    service: f64,
    include_service: bool,
) -> f64 {
    let wait = match class {
        TrafficClass::RealTime => queueing::wait_rt(params),
        TrafficClass::NonRealTime => queueing::wait_nrt(params),
    };
    match wait {
        Ok(w) if include_service => w + service,
        Ok(w) => w,
        Err(_) => f64::INFINITY,
    }
}

pub fn build_neighbor_table<S: NetworkSnapshot + ?Sized>(
    sender: NodeId,
    packet: &Packet,
    snapshot: &S,
    settings: &RouteSettings,
) -> Result<Vec<NeighborEntry>, RouteError> {
    let service = f64::from(packet.bits) / settings.radio.bandwidth;
    let rx_cost = f64::from(packet.bits) * settings.radio.e_elec;
    let table: Vec<NeighborEntry> = snapshot
        .candidates(sender)
        .iter()
        .copied()
        .filter(|&id| id != sender && snapshot.is_alive(id))
        .map(|id| {
            let predicted_delay = predicted_delay(
                &snapshot.queue_params(id),
                packet.class,
                service,
                settings.include_service_time,
            );
            let usable_energy = snapshot.residual_energy(id) - rx_cost;
            let prr = snapshot.prr(sender, id);
            NeighborEntry {
                id,
                predicted_delay,
                usable_energy,
                prr,
                cost: cost(predicted_delay, usable_energy, prr, &settings.weights),
            }
        })
        .collect();
    if table.is_empty() {
        Err(RouteError::EmptyTable)
    } else {
        Ok(table)
    }
}

/// The entry with the smallest finite cost, lowest id on ties.
pub fn select_next_hop(table: &[NeighborEntry]) -> Result<&NeighborEntry, RouteError> {
    table
        .iter()
        .filter(|e| e.is_finite())
        .min_by(|a, b| a.cost.total_cmp(&b.cost).then(a.id.cmp(&b.id)))
        .ok_or(RouteError::NoRoute)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DropDecision {
    Keep,
    Drop,
}

/// Drops a packet that cannot make its deadline even if every remaining hop
/// is as fast as the best neighbor currently on offer.
pub fn predictive_drop_check(
    packet: &Packet,
    now: f64,
    sender: Position,
    sink: Position,
    delta: f64,
    table: &[NeighborEntry],
) -> DropDecision {
    if packet.deadline.is_infinite() {
        return DropDecision::Keep;
    }
    if packet.deadline < now {
        return DropDecision::Drop;
    }
    let best = table
        .iter()
        .filter(|e| e.is_finite())
        .map(|e| e.predicted_delay)
        .min_by(f64::total_cmp);
    let Some(per_hop) = best else {
        return DropDecision::Keep;
    };
    let hops = f64::from(geometry::hops_linear(sender, sink, delta));
    if now + hops * per_hop > packet.deadline {
        DropDecision::Drop
    } else {
        DropDecision::Keep
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RouteDecision {
    Forward(NeighborEntry),
    /// Deadline cannot be met along any estimated path.
    Predicted,
    NoRoute,
}

/// Full per-hop decision: table, optional deadline prediction, argmin.
pub fn route<S: NetworkSnapshot + ?Sized>(
    sender: NodeId,
    packet: &Packet,
    now: f64,
    snapshot: &S,
    settings: &RouteSettings,
) -> RouteDecision {
    let table = match build_neighbor_table(sender, packet, snapshot, settings) {
        Ok(t) => t,
        Err(_) => return RouteDecision::NoRoute,
    };
    let topo = snapshot.topology();
    if settings.predictive_drop {
        let area = topo.allowed_area(sender);
        if let Ok(delta) = geometry::delta(area, table.len()) {
            let decision = predictive_drop_check(
                packet,
                now,
                topo.position(sender),
                topo.position(topo.sink()),
                delta,
                &table,
            );
            if decision == DropDecision::Drop {
                return RouteDecision::Predicted;
            }
        }
    }
    match select_next_hop(&table) {
        Ok(entry) => RouteDecision::Forward(*entry),
        Err(_) => RouteDecision::NoRoute,
    }
}
