//! Event calendar ordered by (time, sequence number).

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::geometry::NodeId;
use crate::node::{Packet, TrafficClass};

#[derive(Debug, Clone, PartialEq)]
pub enum TxOrigin {
    /// The packet sits in the sender's transmitter slot.
    Queue,
    /// A source's own packet sent without queueing.
    Direct(Box<Packet>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum EventKind {
    PacketGenerated {
        source: NodeId,
        class: TrafficClass,
    },
    TransmissionComplete {
        from: NodeId,
        to: NodeId,
        origin: TxOrigin,
    },
    NodeDeath {
        node: NodeId,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Event {
    pub time: f64,
    pub seq: u64,
    pub kind: EventKind,
}

impl Eq for Event {}

impl Ord for Event {
    fn cmp(&self, other: &Self) -> Ordering {
        // Reversed so that BinaryHeap pops the earliest event first.
        other
            .time
            .total_cmp(&self.time)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Debug, Default)]
pub struct Calendar {
    heap: BinaryHeap<Event>,
    next_seq: u64,
}

impl Calendar {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn schedule(&mut self, time: f64, kind: EventKind) -> u64 {
        debug_assert!(!time.is_nan());
        let seq = self.next_seq;
        self.next_seq += 1;
        self.heap.push(Event { time, seq, kind });
        seq
    }

    pub fn peek_time(&self) -> Option<f64> {
        self.heap.peek().map(|e| e.time)
    }

    pub fn pop(&mut self) -> Option<Event> {
        self.heap.pop()
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Event> {
        self.heap.iter()
    }
}
