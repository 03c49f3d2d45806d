use std::fmt;

use crate::node::TrafficClass;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DropCause {
    /// Deadline passed while queued or on arrival.
    Expired,
    /// Deadline judged unreachable before transmission.
    Predictive,
    NoRoute,
    BufferOverflow,
    NodeDeath,
    LinkLoss,
}

impl DropCause {
    pub const ALL: [DropCause; 6] = [
        DropCause::Expired,
        DropCause::Predictive,
        DropCause::NoRoute,
        DropCause::BufferOverflow,
        DropCause::NodeDeath,
        DropCause::LinkLoss,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn label(self) -> &'static str {
        match self {
            DropCause::Expired => "expired",
            DropCause::Predictive => "predictive",
            DropCause::NoRoute => "no_route",
            DropCause::BufferOverflow => "buffer_overflow",
            DropCause::NodeDeath => "node_death",
            DropCause::LinkLoss => "link_loss",
        }
    }
}

impl fmt::Display for DropCause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Summary of end-to-end delays for one class.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelaySummary {
    pub count: usize,
    pub mean: f64,
    /// Nearest-rank 95th percentile.
    pub p95: f64,
    pub max: f64,
}

impl DelaySummary {
    pub fn from_samples(samples: &[f64]) -> Option<Self> {
        if samples.is_empty() {
            return None;
        }
        let mut sorted = samples.to_vec();
        sorted.sort_by(f64::total_cmp);
        let n = sorted.len();
        let rank = ((0.95 * n as f64).ceil() as usize).clamp(1, n);
        Some(Self {
            count: n,
            mean: sorted.iter().sum::<f64>() / n as f64,
            p95: sorted[rank - 1],
            max: sorted[n - 1],
        })
    }
}

/// Queueing wait accumulated at one node for one class.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct WaitStats {
    pub count: u64,
    pub total: f64,
}

impl WaitStats {
    pub fn record(&mut self, wait: f64) {
        self.count += 1;
        self.total += wait;
    }

    pub fn mean(&self) -> Option<f64> {
        (self.count > 0).then(|| self.total / self.count as f64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodeMetrics {
    pub initial_energy: f64,
    pub residual_energy: f64,
    pub energy_tx: f64,
    pub energy_rx: f64,
    /// Completed transmissions, lost or not.
    pub transmissions: u64,
    pub receptions: u64,
    /// Indexed by [`TrafficClass::index`].
    pub waits: [WaitStats; 2],
    pub died_at: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Metrics {
    pub seed: u64,
    pub generated: [u64; 2],
    pub delivered: [u64; 2],
    /// `drops[class][cause]`.
    pub drops: [[u64; 6]; 2],
    pub in_flight: u64,
    /// End-to-end delays of delivered packets, per class, in delivery order.
    pub delays: [Vec<f64>; 2],
    /// Sink arrival times of all delivered packets, non-decreasing.
    pub delivery_times: Vec<f64>,
    pub energy_tx: f64,
    pub energy_rx: f64,
    pub first_death: Option<f64>,
    /// `(time, alive sensors)` at the start and after every death.
    pub alive_timeline: Vec<(f64, usize)>,
    /// Time the run stopped: the horizon, or the last source's death.
    pub end_time: f64,
    pub nodes: Vec<NodeMetrics>,
}

impl Metrics {
    pub(crate) fn new(seed: u64, nodes: Vec<NodeMetrics>, alive_sensors: usize) -> Self {
        Self {
            seed,
            generated: [0; 2],
            delivered: [0; 2],
            drops: [[0; 6]; 2],
            in_flight: 0,
            delays: [Vec::new(), Vec::new()],
            delivery_times: Vec::new(),
            energy_tx: 0.0,
            energy_rx: 0.0,
            first_death: None,
            alive_timeline: vec![(0.0, alive_sensors)],
            end_time: 0.0,
            nodes,
        }
    }

    pub fn generated_total(&self) -> u64 {
        self.generated.iter().sum()
    }

    pub fn delivered_total(&self) -> u64 {
        self.delivered.iter().sum()
    }

    pub fn drops_by_cause(&self, cause: DropCause) -> u64 {
        self.drops.iter().map(|c| c[cause.index()]).sum()
    }

    pub fn drops_total(&self) -> u64 {
        self.drops.iter().flatten().sum()
    }

    pub fn drops_for(&self, class: TrafficClass, cause: DropCause) -> u64 {
        self.drops[class.index()][cause.index()]
    }

    /// Generated packets not yet accounted for by the deliveries, drops and
    /// in-flight count. Zero when the bookkeeping is consistent.
    pub fn conservation_gap(&self) -> i128 {
        self.generated_total() as i128
            - self.delivered_total() as i128
            - self.drops_total() as i128
            - self.in_flight as i128
    }

    pub fn energy_consumed(&self) -> f64 {
        self.energy_tx + self.energy_rx
    }

    pub fn delay_summary(&self, class: TrafficClass) -> Option<DelaySummary> {
        DelaySummary::from_samples(&self.delays[class.index()])
    }

    /// Mean queueing wait at `node` for `class`.
    pub fn mean_wait(&self, node: usize, class: TrafficClass) -> Option<f64> {
        self.nodes[node].waits[class.index()].mean()
    }

    pub fn alive_at(&self, t: f64) -> usize {
        self.alive_timeline
            .iter()
            .take_while(|(at, _)| *at <= t)
            .last()
            .map_or(0, |&(_, n)| n)
    }

    /// Alive sensors and cumulative deliveries sampled every `interval`
    /// seconds from zero through the end of the run.
    pub fn timeline(&self, interval: f64) -> Vec<TimelineRow> {
        let mut rows = Vec::new();
        let mut delivered = 0usize;
        let mut step = 0u64;
        loop {
            let t = step as f64 * interval;
            if t > self.end_time && step > 0 {
                break;
            }
            while delivered < self.delivery_times.len() && self.delivery_times[delivered] <= t {
                delivered += 1;
            }
            rows.push(TimelineRow {
                time: t,
                alive: self.alive_at(t),
                delivered: delivered as u64,
            });
            step += 1;
        }
        rows
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimelineRow {
    pub time: f64,
    pub alive: usize,
    pub delivered: u64,
}
