//! Packets and the per-node dual queues.
//!
//! Every relay keeps one FIFO per traffic class. Real-time packets are always
//! served first, but service is non-preemptive: once a packet starts
//! transmitting it finishes, whatever arrives in the meantime.

use std::collections::VecDeque;
use std::fmt;

use thiserror::Error;

use crate::energy::RadioParams;
use crate::geometry::NodeId;

pub const DEFAULT_QUEUE_CAPACITY: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TrafficClass {
    RealTime,
    NonRealTime,
}

impl TrafficClass {
    pub const ALL: [TrafficClass; 2] = [TrafficClass::RealTime, TrafficClass::NonRealTime];

    pub fn index(self) -> usize {
        match self {
            TrafficClass::RealTime => 0,
            TrafficClass::NonRealTime => 1,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            TrafficClass::RealTime => "rt",
            TrafficClass::NonRealTime => "nrt",
        }
    }
}

impl fmt::Display for TrafficClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PacketId(pub u64);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hop {
    pub node: NodeId,
    pub at: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Packet {
    pub id: PacketId,
    pub class: TrafficClass,
    pub bits: u32,
    pub source: NodeId,
    pub sink: NodeId,
    pub created_at: f64,
    /// Absolute time after which the packet is worthless.
    pub deadline: f64,
    /// Nodes visited so far with arrival times, starting at the source.
    pub trace: Vec<Hop>,
    /// Arrival time at the node currently holding the packet.
    pub arrived_at: f64,
}

impl Packet {
    pub fn new(
        id: PacketId,
        class: TrafficClass,
        bits: u32,
        source: NodeId,
        sink: NodeId,
        created_at: f64,
        deadline: f64,
    ) -> Self {
        assert!(bits > 0, "packets carry at least one bit");
        assert!(deadline > created_at, "deadline must follow creation");
        Self {
            id,
            class,
            bits,
            source,
            sink,
            created_at,
            deadline,
            trace: vec![Hop {
                node: source,
                at: created_at,
            }],
            arrived_at: created_at,
        }
    }

    pub fn is_expired(&self, now: f64) -> bool {
        self.deadline < now
    }

    pub fn current_node(&self) -> NodeId {
        self.trace.last().map(|h| h.node).unwrap_or(self.source)
    }

    pub fn record_hop(&mut self, node: NodeId, at: f64) {
        self.trace.push(Hop { node, at });
        self.arrived_at = at;
    }
}

/// Transmission time of a packet over the radio.
pub fn service_time(packet: &Packet, radio: &RadioParams) -> f64 {
    f64::from(packet.bits) / radio.bandwidth
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{class} queue full")]
pub struct QueueFull {
    pub class: TrafficClass,
    pub packet: Box<Packet>,
}

/// A packet currently being transmitted.
#[derive(Debug, Clone, PartialEq)]
pub struct InService {
    pub packet: Packet,
    pub next_hop: NodeId,
    pub completes_at: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodeQueues {
    rt: VecDeque<Packet>,
    nrt: VecDeque<Packet>,
    in_service: Option<InService>,
    capacity: usize,
}

impl NodeQueues {
    pub fn new(capacity: usize) -> Self {
        Self {
            rt: VecDeque::new(),
            nrt: VecDeque::new(),
            in_service: None,
            capacity,
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    fn fifo_mut(&mut self, class: TrafficClass) -> &mut VecDeque<Packet> {
        match class {
            TrafficClass::RealTime => &mut self.rt,
            TrafficClass::NonRealTime => &mut self.nrt,
        }
    }

    pub fn len(&self, class: TrafficClass) -> usize {
        match class {
            TrafficClass::RealTime => self.rt.len(),
            TrafficClass::NonRealTime => self.nrt.len(),
        }
    }

    /// Packets waiting, not counting the one in service.
    pub fn queued(&self) -> usize {
        self.rt.len() + self.nrt.len()
    }

    pub fn is_idle(&self) -> bool {
        self.in_service.is_none()
    }

    pub fn in_service(&self) -> Option<&InService> {
        self.in_service.as_ref()
    }

    /// Appends the packet to its class queue. The caller starts service if
    /// the transmitter is idle.
    pub fn classify_enqueue(&mut self, packet: Packet) -> Result<(), QueueFull> {
        let class = packet.class;
        let capacity = self.capacity;
        let fifo = self.fifo_mut(class);
        if fifo.len() >= capacity {
            return Err(QueueFull {
                class,
                packet: Box::new(packet),
            });
        }
        fifo.push_back(packet);
        Ok(())
    }

    /// Head of the RT queue if any, else head of the NRT queue.
    pub fn dequeue_next(&mut self) -> Option<Packet> {
        debug_assert!(self.in_service.is_none(), "dequeue while transmitting");
        self.rt.pop_front().or_else(|| self.nrt.pop_front())
    }

    /// Removes every queued packet whose deadline is before `now`. The packet
    /// in service is left alone.
    pub fn expire_drops(&mut self, now: f64) -> Vec<Packet> {
        let mut dropped = Vec::new();
        for fifo in [&mut self.rt, &mut self.nrt] {
            if fifo.iter().any(|p| p.is_expired(now)) {
                let (gone, kept): (VecDeque<Packet>, VecDeque<Packet>) =
                    fifo.drain(..).partition(|p| p.is_expired(now));
                *fifo = kept;
                dropped.extend(gone);
            }
        }
        dropped
    }

    pub fn start_service(&mut self, packet: Packet, next_hop: NodeId, completes_at: f64) {
        assert!(self.in_service.is_none(), "transmitter already busy");
        self.in_service = Some(InService {
            packet,
            next_hop,
            completes_at,
        });
    }

    pub fn finish_service(&mut self) -> Option<InService> {
        self.in_service.take()
    }

    /// Empties both queues and the transmitter.
    pub fn drain_all(&mut self) -> Vec<Packet> {
        let mut all: Vec<Packet> = self
            .in_service
            .take()
            .map(|s| s.packet)
            .into_iter()
            .collect();
        all.extend(self.rt.drain(..));
        all.extend(self.nrt.drain(..));
        all
    }
}

impl Default for NodeQueues {
    fn default() -> Self {
        Self::new(DEFAULT_QUEUE_CAPACITY)
    }
}
