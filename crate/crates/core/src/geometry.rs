//! Node placement and the sink-directed neighbor region.
//!
//! A sender may forward only to nodes it can reach in one hop that are no
//! farther from the sink than the sender itself. That region is the lens
//! formed by the sender's radio disk and the sink-centered disk through the
//! sender. Its area, divided by the number of nodes inside it, gives a
//! typical hop length Δ, and `dist(sender, sink) / Δ` estimates how many hops
//! remain.

use std::f64::consts::PI;
use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub usize);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

impl Position {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }
}

pub fn distance(a: Position, b: Position) -> f64 {
    (a.x - b.x).hypot(a.y - b.y)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("no allowed neighbors")]
pub struct NoNeighbors;

/// Candidate ids are compared by position here; callers exclude the sender
/// itself by id before asking.
pub fn is_allowed_neighbor(
    sender: Position,
    candidate: Position,
    sink: Position,
    radio_range: f64,
) -> bool {
    candidate != sender
        && distance(sender, candidate) <= radio_range
        && distance(candidate, sink) <= distance(sender, sink)
}

/// Area of the intersection of two disks with radii `r1`, `r2` whose centers
/// are `d` apart.
pub fn lens_area(r1: f64, r2: f64, d: f64) -> f64 {
    if d >= r1 + r2 {
        return 0.0;
    }
    if d <= (r1 - r2).abs() {
        let r = r1.min(r2);
        return PI * r * r;
    }
    let a1 = ((d * d + r1 * r1 - r2 * r2) / (2.0 * d * r1))
        .clamp(-1.0, 1.0)
        .acos();
    let a2 = ((d * d + r2 * r2 - r1 * r1) / (2.0 * d * r2))
        .clamp(-1.0, 1.0)
        .acos();
    let k = ((-d + r1 + r2) * (d + r1 - r2) * (d - r1 + r2) * (d + r1 + r2)).max(0.0);
    r1 * r1 * a1 + r2 * r2 * a2 - 0.5 * k.sqrt()
}

/// Area of the allowed-neighbor lens for `sender`.
pub fn allowed_area(sender: Position, sink: Position, radio_range: f64) -> f64 {
    let to_sink = distance(sender, sink);
    lens_area(radio_range, to_sink, to_sink)
}

/// Typical spacing between neighbors: `sqrt(area / count)`.
pub fn delta(area: f64, neighbor_count: usize) -> Result<f64, NoNeighbors> {
    if neighbor_count == 0 {
        return Err(NoNeighbors);
    }
    Ok((area / neighbor_count as f64).sqrt())
}

/// Estimated hop count along a straight path to the sink, at least one.
pub fn hops_linear(sender: Position, sink: Position, delta: f64) -> u32 {
    debug_assert!(delta > 0.0);
    let hops = (distance(sender, sink) / delta).ceil();
    if hops.is_finite() && hops >= 1.0 {
        hops as u32
    } else {
        1
    }
}

/// Static node layout. The sink is one of the nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    positions: Vec<Position>,
    sink: NodeId,
    radio_range: f64,
}

impl Topology {
    pub fn new(positions: Vec<Position>, sink: NodeId, radio_range: f64) -> Self {
        assert!(sink.0 < positions.len(), "sink id out of range");
        assert!(radio_range > 0.0, "radio range must be positive");
        Self {
            positions,
            sink,
            radio_range,
        }
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn sink(&self) -> NodeId {
        self.sink
    }

    pub fn radio_range(&self) -> f64 {
        self.radio_range
    }

    pub fn position(&self, id: NodeId) -> Position {
        self.positions[id.0]
    }

    pub fn ids(&self) -> impl Iterator<Item = NodeId> {
        (0..self.positions.len()).map(NodeId)
    }

    pub fn distance(&self, a: NodeId, b: NodeId) -> f64 {
        distance(self.position(a), self.position(b))
    }

    pub fn distance_to_sink(&self, id: NodeId) -> f64 {
        self.distance(id, self.sink)
    }

    pub fn is_allowed_neighbor(&self, sender: NodeId, candidate: NodeId) -> bool {
        sender != candidate
            && self.distance(sender, candidate) <= self.radio_range
            && self.distance_to_sink(candidate) <= self.distance_to_sink(sender)
    }

    /// Every node in `sender`'s allowed region, in id order, ignoring liveness.
    pub fn allowed_neighbors(&self, sender: NodeId) -> Vec<NodeId> {
        self.ids()
            .filter(|&c| self.is_allowed_neighbor(sender, c))
            .collect()
    }

    pub fn allowed_area(&self, sender: NodeId) -> f64 {
        allowed_area(
            self.position(sender),
            self.position(self.sink),
            self.radio_range,
        )
    }
}
