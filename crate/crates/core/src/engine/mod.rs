//! Deterministic discrete-event simulation of a sensor field.
//!
//! One run is single-threaded. All randomness comes from labeled streams of
//! the configured seed, so a `(config, seed)` pair always produces the same
//! [`Metrics`].

mod event;
mod metrics;
mod rate;
mod rng;

use std::collections::HashMap;

use rand::Rng;
use rand_distr::{Distribution, Exp};

pub use event::{Calendar, Event, EventKind, TxOrigin};
pub use metrics::{DelaySummary, DropCause, Metrics, NodeMetrics, TimelineRow, WaitStats};
pub use rate::RateEstimator;
pub use rng::{stream, StreamRng};

use crate::config::{ConfigError, ScenarioConfig};
use crate::energy::{rx_energy, tx_energy, Battery, RadioParams};
use crate::geometry::{NodeId, Position, Topology};
use crate::link::LinkStats;
use crate::node::{service_time, NodeQueues, Packet, PacketId, TrafficClass};
use crate::queueing::{ClassLoad, QueueModelParams};
use crate::routing::{self, NetworkSnapshot, RouteDecision, RouteSettings};

/// Hooks into the packet lifecycle, for auditing runs. Every method
/// defaults to doing nothing.
pub trait Observer {
    fn on_event(&mut self, _event: &Event) {}
    fn on_service_start(&mut self, _node: NodeId, _packet: &Packet, _now: f64, _completes_at: f64) {
    }
    fn on_service_end(&mut self, _node: NodeId, _packet: &Packet, _now: f64) {}
    fn on_transmission(&mut self, _from: NodeId, _to: NodeId, _delivered: bool, _now: f64) {}
    fn on_delivered(&mut self, _packet: &Packet, _now: f64) {}
    fn on_dropped(&mut self, _packet: &Packet, _cause: DropCause, _now: f64) {}
}

pub struct NoopObserver;

impl Observer for NoopObserver {}

struct NodeState {
    battery: Battery,
    alive: bool,
    queues: NodeQueues,
    arrivals: [RateEstimator; 2],
}

struct LinkState {
    stats: LinkStats,
    loss: f64,
    rng: StreamRng,
}

pub struct Simulation {
    config: ScenarioConfig,
    radio: RadioParams,
    settings: RouteSettings,
    topology: Topology,
    candidates: Vec<Vec<NodeId>>,
    nodes: Vec<NodeState>,
    links: HashMap<(NodeId, NodeId), LinkState>,
    traffic: HashMap<(NodeId, TrafficClass), StreamRng>,
    sources: Vec<NodeId>,
    is_source: Vec<bool>,
    live_sources: usize,
    calendar: Calendar,
    now: f64,
    ended_at: Option<f64>,
    next_packet: u64,
    metrics: Metrics,
}

/// Runs `config` to completion.
pub fn run(config: &ScenarioConfig) -> Result<Metrics, ConfigError> {
    Ok(Simulation::new(config.clone())?.run())
}

fn place_nodes(config: &ScenarioConfig) -> Vec<Position> {
    let mut positions = vec![Position::new(config.sink.x, config.sink.y)];
    match &config.positions {
        Some(list) => positions.extend(list.iter().map(|p| Position::new(p[0], p[1]))),
        None => {
            let mut rng = stream(config.seed, "placement");
            for _ in 1..config.node_count {
                let x = rng.random_range(0.0..=config.grid.width);
                let y = rng.random_range(0.0..=config.grid.height);
                positions.push(Position::new(x, y));
            }
        }
    }
    positions
}

impl Simulation {
    pub fn new(config: ScenarioConfig) -> Result<Self, ConfigError> {
        config.validate()?;
        let radio = config.radio_params();
        let topology = Topology::new(place_nodes(&config), NodeId(0), config.radio_range());
        let candidates = topology
            .ids()
            .map(|id| topology.allowed_neighbors(id))
            .collect();
        let settings = RouteSettings {
            weights: config.weights(),
            radio,
            include_service_time: config.include_service_time,
            predictive_drop: config.predictive_drop,
        };

        let sink = topology.sink();
        let nodes: Vec<NodeState> = topology
            .ids()
            .map(|id| NodeState {
                battery: if id == sink {
                    Battery::unlimited()
                } else {
                    Battery::new(config.initial_energy)
                },
                alive: true,
                queues: NodeQueues::new(config.queue_capacity),
                arrivals: [
                    RateEstimator::new(config.rate_smoothing),
                    RateEstimator::new(config.rate_smoothing),
                ],
            })
            .collect();
        let node_metrics = nodes
            .iter()
            .map(|n| NodeMetrics {
                initial_energy: n.battery.initial(),
                residual_energy: n.battery.residual(),
                energy_tx: 0.0,
                energy_rx: 0.0,
                transmissions: 0,
                receptions: 0,
                waits: Default::default(),
                died_at: None,
            })
            .collect();

        let sources: Vec<NodeId> = match &config.sources {
            Some(list) => {
                let mut ids: Vec<NodeId> = list.iter().map(|&s| NodeId(s)).collect();
                ids.sort();
                ids.dedup();
                ids
            }
            None => topology.ids().filter(|&id| id != sink).collect(),
        };
        let mut is_source = vec![false; topology.len()];
        for s in &sources {
            is_source[s.0] = true;
        }

        let mut sim = Self {
            metrics: Metrics::new(config.seed, node_metrics, topology.len() - 1),
            live_sources: sources.len(),
            config,
            radio,
            settings,
            topology,
            candidates,
            nodes,
            links: HashMap::new(),
            traffic: HashMap::new(),
            sources,
            is_source,
            calendar: Calendar::new(),
            now: 0.0,
            ended_at: None,
            next_packet: 0,
        };
        for source in sim.sources.clone() {
            for class in TrafficClass::ALL {
                sim.schedule_generation(source, class);
            }
        }
        Ok(sim)
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    pub fn now(&self) -> f64 {
        self.now
    }

    pub fn run(self) -> Metrics {
        self.run_with(&mut NoopObserver)
    }

    pub fn run_with(mut self, observer: &mut dyn Observer) -> Metrics {
        while self.step(observer) {}
        self.finish()
    }

    /// Processes the next event within the horizon. Returns `false` once the
    /// run is over, either because the horizon was reached or because every
    /// source has died.
    pub fn step(&mut self, observer: &mut dyn Observer) -> bool {
        if self.ended_at.is_some() {
            return false;
        }
        let horizon = self.config.duration;
        match self.calendar.peek_time() {
            Some(t) if t <= horizon => {}
            _ => {
                self.ended_at = Some(horizon);
                return false;
            }
        }
        let event = self.calendar.pop().expect("peeked event");
        debug_assert!(event.time >= self.now, "event from the past");
        self.now = event.time;
        observer.on_event(&event);
        self.dispatch(event, observer);
        if !self.sources.is_empty() && self.live_sources == 0 {
            self.ended_at = Some(self.now);
            return false;
        }
        true
    }

    /// Stops the run and returns its metrics. Packets still queued or on the
    /// air are counted as in flight.
    pub fn finish(mut self) -> Metrics {
        let end_time = self.ended_at.unwrap_or(self.now);
        let mut in_flight = 0u64;
        for node in &self.nodes {
            in_flight += node.queues.queued() as u64 + u64::from(!node.queues.is_idle());
        }
        for event in self.calendar.iter() {
            if let EventKind::TransmissionComplete {
                origin: TxOrigin::Direct(_),
                ..
            } = event.kind
            {
                in_flight += 1;
            }
        }
        self.metrics.in_flight = in_flight;
        self.metrics.end_time = end_time;
        for (m, n) in self.metrics.nodes.iter_mut().zip(&self.nodes) {
            m.residual_energy = n.battery.residual();
        }
        self.metrics
    }

    /// Metrics accumulated so far. `in_flight` and residual energies are only
    /// filled in by [`Simulation::finish`].
    pub fn metrics(&self) -> &Metrics {
        &self.metrics
    }

    fn traffic_rate(&self, class: TrafficClass) -> f64 {
        match class {
            TrafficClass::RealTime => self.config.traffic.rt_rate,
            TrafficClass::NonRealTime => self.config.traffic.nrt_rate,
        }
    }

    fn deadline_budget(&self, class: TrafficClass) -> f64 {
        match class {
            TrafficClass::RealTime => self.config.traffic.rt_deadline,
            TrafficClass::NonRealTime => self.config.traffic.nrt_deadline,
        }
    }

    /// Schedules the next Poisson arrival of `class` at `source`.
    fn schedule_generation(&mut self, source: NodeId, class: TrafficClass) {
        let rate = self.traffic_rate(class);
        if rate <= 0.0 {
            return;
        }
        let seed = self.config.seed;
        let rng = self
            .traffic
            .entry((source, class))
            .or_insert_with(|| stream(seed, &format!("traffic/{}/{}", source, class.label())));
        let gap = Exp::new(rate).expect("positive rate").sample(rng);
        let at = self.now + gap;
        if at <= self.config.duration {
            self.calendar
                .schedule(at, EventKind::PacketGenerated { source, class });
        }
    }

    fn dispatch(&mut self, event: Event, observer: &mut dyn Observer) {
        match event.kind {
            EventKind::PacketGenerated { source, class } => {
                self.on_generated(source, class, observer)
            }
            EventKind::TransmissionComplete { from, to, origin } => {
                self.on_transmitted(from, to, origin, observer)
            }
            EventKind::NodeDeath { node } => self.on_death(node, observer),
        }
    }

    fn drop_packet(&mut self, packet: &Packet, cause: DropCause, observer: &mut dyn Observer) {
        self.metrics.drops[packet.class.index()][cause.index()] += 1;
        observer.on_dropped(packet, cause, self.now);
    }

    fn on_generated(&mut self, source: NodeId, class: TrafficClass, observer: &mut dyn Observer) {
        if !self.nodes[source.0].alive {
            return;
        }
        let id = PacketId(self.next_packet);
        self.next_packet += 1;
        let deadline = self.now + self.deadline_budget(class);
        let packet = Packet::new(
            id,
            class,
            self.config.packet_size,
            source,
            self.topology.sink(),
            self.now,
            deadline,
        );
        self.metrics.generated[class.index()] += 1;
        self.schedule_generation(source, class);

        if self.config.queue_at_source {
            self.admit(source, packet, observer);
            return;
        }
        match routing::route(source, &packet, self.now, &*self, &self.settings) {
            RouteDecision::Forward(entry) => {
                let completes_at = self.now + service_time(&packet, &self.radio);
                observer.on_service_start(source, &packet, self.now, completes_at);
                self.calendar.schedule(
                    completes_at,
                    EventKind::TransmissionComplete {
                        from: source,
                        to: entry.id,
                        origin: TxOrigin::Direct(Box::new(packet)),
                    },
                );
            }
            RouteDecision::Predicted => self.drop_packet(&packet, DropCause::Predictive, observer),
            RouteDecision::NoRoute => self.drop_packet(&packet, DropCause::NoRoute, observer),
        }
    }

    /// A packet arriving at a relay's queues.
    fn admit(&mut self, node: NodeId, packet: Packet, observer: &mut dyn Observer) {
        if !self.nodes[node.0].alive {
            self.drop_packet(&packet, DropCause::NodeDeath, observer);
            return;
        }
        if packet.is_expired(self.now) {
            self.drop_packet(&packet, DropCause::Expired, observer);
            return;
        }
        let class = packet.class;
        let state = &mut self.nodes[node.0];
        match state.queues.classify_enqueue(packet) {
            Ok(()) => state.arrivals[class.index()].observe(self.now),
            Err(full) => {
                self.drop_packet(&full.packet, DropCause::BufferOverflow, observer);
                return;
            }
        }
        if self.nodes[node.0].queues.is_idle() {
            self.start_next(node, observer);
        }
    }

    /// Pulls packets off `node`'s queues until one is put on the air or the
    /// queues run dry.
    fn start_next(&mut self, node: NodeId, observer: &mut dyn Observer) {
        if !self.nodes[node.0].alive || !self.nodes[node.0].queues.is_idle() {
            return;
        }
        loop {
            let expired = self.nodes[node.0].queues.expire_drops(self.now);
            for p in &expired {
                self.drop_packet(p, DropCause::Expired, observer);
            }
            let Some(packet) = self.nodes[node.0].queues.dequeue_next() else {
                return;
            };
            match routing::route(node, &packet, self.now, &*self, &self.settings) {
                RouteDecision::Forward(entry) => {
                    let wait = self.now - packet.arrived_at;
                    self.metrics.nodes[node.0].waits[packet.class.index()].record(wait);
                    let completes_at = self.now + service_time(&packet, &self.radio);
                    observer.on_service_start(node, &packet, self.now, completes_at);
                    self.nodes[node.0]
                        .queues
                        .start_service(packet, entry.id, completes_at);
                    self.calendar.schedule(
                        completes_at,
                        EventKind::TransmissionComplete {
                            from: node,
                            to: entry.id,
                            origin: TxOrigin::Queue,
                        },
                    );
                    return;
                }
                RouteDecision::Predicted => {
                    self.drop_packet(&packet, DropCause::Predictive, observer)
                }
                RouteDecision::NoRoute => self.drop_packet(&packet, DropCause::NoRoute, observer),
            }
        }
    }

    fn link(&mut self, from: NodeId, to: NodeId) -> &mut LinkState {
        let (seed, window) = (self.config.seed, self.config.prr_window);
        let loss = self.config.link_loss(from.0, to.0);
        self.links.entry((from, to)).or_insert_with(|| LinkState {
            stats: LinkStats::new(window),
            loss,
            rng: stream(seed, &format!("link/{from}/{to}")),
        })
    }

    fn kill(&mut self, node: NodeId) {
        if self.nodes[node.0].alive {
            self.nodes[node.0].alive = false;
            self.calendar
                .schedule(self.now, EventKind::NodeDeath { node });
        }
    }

    fn on_transmitted(
        &mut self,
        from: NodeId,
        to: NodeId,
        origin: TxOrigin,
        observer: &mut dyn Observer,
    ) {
        let packet = match origin {
            TxOrigin::Direct(p) => *p,
            TxOrigin::Queue => match self.nodes[from.0].queues.finish_service() {
                Some(s) => s.packet,
                // Already drained when the sender died mid-transmission.
                None => return,
            },
        };
        observer.on_service_end(from, &packet, self.now);
        self.deliver_hop(packet, from, to, observer);
        self.start_next(from, observer);
    }

    /// Charges the hop's energy, draws the link outcome and hands the packet
    /// to the receiver.
    fn deliver_hop(
        &mut self,
        mut packet: Packet,
        from: NodeId,
        to: NodeId,
        observer: &mut dyn Observer,
    ) {
        if !self.nodes[from.0].alive {
            self.drop_packet(&packet, DropCause::NodeDeath, observer);
            return;
        }
        let cost = tx_energy(packet.bits, self.topology.distance(from, to), &self.radio);
        let debit = self.nodes[from.0].battery.debit(cost);
        let m = &mut self.metrics.nodes[from.0];
        match debit {
            Ok(()) => {
                m.energy_tx += cost;
                m.transmissions += 1;
                self.metrics.energy_tx += cost;
            }
            Err(dead) => {
                m.energy_tx += dead.drained;
                self.metrics.energy_tx += dead.drained;
                self.drop_packet(&packet, DropCause::NodeDeath, observer);
                self.kill(from);
                return;
            }
        }

        let receiver_alive = self.nodes[to.0].alive;
        let link = self.link(from, to);
        let lost = link.loss > 0.0 && link.rng.random::<f64>() < link.loss;
        let delivered = receiver_alive && !lost;
        link.stats.record_outcome(delivered);
        observer.on_transmission(from, to, delivered, self.now);
        if !receiver_alive {
            self.drop_packet(&packet, DropCause::NodeDeath, observer);
            return;
        }
        if lost {
            self.drop_packet(&packet, DropCause::LinkLoss, observer);
            return;
        }

        if to == self.topology.sink() {
            packet.record_hop(to, self.now);
            if packet.is_expired(self.now) {
                self.drop_packet(&packet, DropCause::Expired, observer);
                return;
            }
            let class = packet.class.index();
            self.metrics.delivered[class] += 1;
            self.metrics.delays[class].push(self.now - packet.created_at);
            self.metrics.delivery_times.push(self.now);
            observer.on_delivered(&packet, self.now);
            return;
        }

        let cost = rx_energy(packet.bits, &self.radio);
        let debit = self.nodes[to.0].battery.debit(cost);
        let m = &mut self.metrics.nodes[to.0];
        match debit {
            Ok(()) => {
                m.energy_rx += cost;
                m.receptions += 1;
                self.metrics.energy_rx += cost;
                packet.record_hop(to, self.now);
                self.admit(to, packet, observer);
            }
            Err(dead) => {
                m.energy_rx += dead.drained;
                self.metrics.energy_rx += dead.drained;
                self.drop_packet(&packet, DropCause::NodeDeath, observer);
                self.kill(to);
            }
        }
    }

    fn on_death(&mut self, node: NodeId, observer: &mut dyn Observer) {
        let stranded = self.nodes[node.0].queues.drain_all();
        for p in &stranded {
            self.drop_packet(p, DropCause::NodeDeath, observer);
        }
        self.metrics.nodes[node.0].died_at = Some(self.now);
        self.metrics.first_death.get_or_insert(self.now);
        let alive = self.nodes.iter().skip(1).filter(|n| n.alive).count();
        self.metrics.alive_timeline.push((self.now, alive));
        if self.is_source[node.0] {
            self.live_sources -= 1;
        }
    }
}

impl NetworkSnapshot for Simulation {
    fn topology(&self) -> &Topology {
        &self.topology
    }

    fn candidates(&self, sender: NodeId) -> &[NodeId] {
        &self.candidates[sender.0]
    }

    fn is_alive(&self, id: NodeId) -> bool {
        self.nodes[id.0].alive
    }

    fn residual_energy(&self, id: NodeId) -> f64 {
        self.nodes[id.0].battery.residual()
    }

    fn queue_params(&self, id: NodeId) -> QueueModelParams {
        let service = f64::from(self.config.packet_size) / self.radio.bandwidth;
        let load = |class: TrafficClass| {
            let rate = self.nodes[id.0].arrivals[class.index()].rate(self.now);
            ClassLoad::deterministic(rate, service).expect("finite non-negative rate")
        };
        QueueModelParams::new(
            load(TrafficClass::RealTime),
            load(TrafficClass::NonRealTime),
        )
    }

    fn prr(&self, from: NodeId, to: NodeId) -> f64 {
        self.links.get(&(from, to)).map_or(1.0, |l| l.stats.prr())
    }
}
