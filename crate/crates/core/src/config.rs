//! Scenario configuration.
//!
//! Files are plain `key = value` lines with `#` comments; nested settings use
//! dotted keys such as `radio.e_elec = 50`. The syntax is a subset of TOML.
//! Every key is optional and falls back to the defaults below.
//!
//! Node 0 is the sink, placed at `sink.x`/`sink.y`. Nodes `1..node_count` are
//! sensors, placed uniformly at random over the grid unless `positions`
//! lists their coordinates explicitly.
//!
//! Radio constants use datasheet units: `radio.e_elec` in nJ/bit,
//! `radio.eps_fs` in pJ/bit/m², `radio.eps_amp` in pJ/bit/m⁴.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::energy::{crossover_distance, RadioParams};
use crate::routing::CostWeights;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed config: {0}")]
    Parse(String),
    #[error("invalid value for `{key}`: {reason}")]
    Invalid { key: &'static str, reason: String },
}

fn invalid(key: &'static str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        key,
        reason: reason.into(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub width: f64,
    pub height: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self {
            width: 1000.0,
            height: 1000.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SinkConfig {
    pub x: f64,
    pub y: f64,
}

impl Default for SinkConfig {
    fn default() -> Self {
        Self { x: 500.0, y: 500.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RadioConfig {
    /// nJ/bit
    pub e_elec: f64,
    /// pJ/bit/m²
    pub eps_fs: f64,
    /// pJ/bit/m⁴
    pub eps_amp: f64,
    /// bits/s
    pub bandwidth: f64,
    /// Communication range in meters; the crossover distance when unset.
    pub range: Option<f64>,
}

impl Default for RadioConfig {
    fn default() -> Self {
        Self {
            e_elec: 50.0,
            eps_fs: 10.0,
            eps_amp: 0.0013,
            bandwidth: 250_000.0,
            range: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrafficConfig {
    /// Packets/s generated by each source.
    pub rt_rate: f64,
    pub nrt_rate: f64,
    /// Seconds from creation to deadline.
    pub rt_deadline: f64,
    pub nrt_deadline: f64,
}

impl Default for TrafficConfig {
    fn default() -> Self {
        Self {
            rt_rate: 0.1,
            nrt_rate: 0.1,
            rt_deadline: 0.5,
            nrt_deadline: 5.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkOverride(pub usize, pub usize, pub f64);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub seed: u64,
    /// Simulated seconds.
    pub duration: f64,
    /// Total nodes including the sink.
    pub node_count: usize,
    /// Joules per sensor battery. The sink is mains powered.
    pub initial_energy: f64,
    /// Bits per data packet.
    pub packet_size: u32,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    /// Packets per class queue.
    pub queue_capacity: usize,
    /// Outcomes kept per link for the reception-rate estimate.
    pub prr_window: usize,
    /// Default loss probability of every directed link.
    pub link_loss: f64,
    /// Per-link `[from, to, loss]` entries overriding `link_loss`.
    pub link_overrides: Vec<LinkOverride>,
    pub predictive_drop: bool,
    /// Add transmission time to the per-hop delay prediction.
    pub include_service_time: bool,
    /// Weight of the newest sample in the arrival-rate estimators.
    pub rate_smoothing: f64,
    /// Queue a source's own packets behind the traffic it relays. When off,
    /// generated packets are transmitted immediately.
    pub queue_at_source: bool,
    /// Bucket width of timeline.csv in seconds.
    pub timeline_interval: f64,
    /// Sensor coordinates, `[x, y]` for nodes 1, 2, ...
    pub positions: Option<Vec<[f64; 2]>>,
    /// Node ids that generate traffic; every sensor when unset.
    pub sources: Option<Vec<usize>>,
    pub grid: GridConfig,
    pub sink: SinkConfig,
    pub radio: RadioConfig,
    pub traffic: TrafficConfig,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            duration: 1000.0,
            node_count: 100,
            initial_energy: 2.0,
            packet_size: 100,
            alpha: 0.6,
            beta: 0.3,
            gamma: 0.1,
            queue_capacity: crate::node::DEFAULT_QUEUE_CAPACITY,
            prr_window: crate::link::DEFAULT_WINDOW,
            link_loss: 0.0,
            link_overrides: Vec::new(),
            predictive_drop: true,
            include_service_time: true,
            rate_smoothing: 0.1,
            queue_at_source: false,
            timeline_interval: 10.0,
            positions: None,
            sources: None,
            grid: GridConfig::default(),
            sink: SinkConfig::default(),
            radio: RadioConfig::default(),
            traffic: TrafficConfig::default(),
        }
    }
}

fn positive(key: &'static str, v: f64) -> Result<(), ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(
            key,
            format!("must be positive and finite, got {v}"),
        ))
    }
}

fn non_negative(key: &'static str, v: f64) -> Result<(), ConfigError> {
    if v >= 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(invalid(
            key,
            format!("must be non-negative and finite, got {v}"),
        ))
    }
}

fn probability(key: &'static str, v: f64) -> Result<(), ConfigError> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(invalid(key, format!("must lie in [0, 1], got {v}")))
    }
}

impl FromStr for ScenarioConfig {
    type Err = ConfigError;

    /// Parses and validates a scenario file.
    fn from_str(text: &str) -> Result<Self, ConfigError> {
        let config: Self = toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        non_negative("duration", self.duration)?;
        if self.node_count < 2 {
            return Err(invalid("node_count", "need a sink and at least one sensor"));
        }
        positive("initial_energy", self.initial_energy)?;
        if self.packet_size == 0 {
            return Err(invalid("packet_size", "must be at least one bit"));
        }
        for (key, w) in [
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("gamma", self.gamma),
        ] {
            non_negative(key, w)?;
        }
        if self.alpha == 0.0 && self.beta == 0.0 && self.gamma == 0.0 {
            return Err(invalid("alpha", "weights must not all be zero"));
        }
        if self.queue_capacity == 0 {
            return Err(invalid("queue_capacity", "must be at least 1"));
        }
        if self.prr_window == 0 {
            return Err(invalid("prr_window", "must be at least 1"));
        }
        probability("link_loss", self.link_loss)?;
        for o in &self.link_overrides {
            if o.0 >= self.node_count || o.1 >= self.node_count || o.0 == o.1 {
                return Err(invalid(
                    "link_overrides",
                    format!("bad link {} -> {}", o.0, o.1),
                ));
            }
            probability("link_overrides", o.2)?;
        }
        if !(self.rate_smoothing > 0.0 && self.rate_smoothing <= 1.0) {
            return Err(invalid(
                "rate_smoothing",
                format!("must lie in (0, 1], got {}", self.rate_smoothing),
            ));
        }
        positive("timeline_interval", self.timeline_interval)?;

        positive("grid.width", self.grid.width)?;
        positive("grid.height", self.grid.height)?;
        let inside = |x: f64, y: f64| {
            (0.0..=self.grid.width).contains(&x) && (0.0..=self.grid.height).contains(&y)
        };
        if !inside(self.sink.x, self.sink.y) {
            return Err(invalid("sink", "sink lies outside the grid"));
        }
        if let Some(positions) = &self.positions {
            if positions.len() != self.node_count - 1 {
                return Err(invalid(
                    "positions",
                    format!(
                        "expected {} sensor positions, got {}",
                        self.node_count - 1,
                        positions.len()
                    ),
                ));
            }
            if let Some(p) = positions.iter().find(|p| !inside(p[0], p[1])) {
                return Err(invalid(
                    "positions",
                    format!("[{}, {}] lies outside the grid", p[0], p[1]),
                ));
            }
        }
        if let Some(sources) = &self.sources {
            if let Some(s) = sources.iter().find(|&&s| s == 0 || s >= self.node_count) {
                return Err(invalid("sources", format!("{s} is not a sensor id")));
            }
        }

        positive("radio.e_elec", self.radio.e_elec)?;
        positive("radio.eps_fs", self.radio.eps_fs)?;
        positive("radio.eps_amp", self.radio.eps_amp)?;
        positive("radio.bandwidth", self.radio.bandwidth)?;
        if let Some(r) = self.radio.range {
            positive("radio.range", r)?;
        }

        non_negative("traffic.rt_rate", self.traffic.rt_rate)?;
        non_negative("traffic.nrt_rate", self.traffic.nrt_rate)?;
        if self.traffic.rt_deadline.is_nan() || self.traffic.rt_deadline <= 0.0 {
            return Err(invalid("traffic.rt_deadline", "must be positive"));
        }
        if self.traffic.nrt_deadline.is_nan() || self.traffic.nrt_deadline <= 0.0 {
            return Err(invalid("traffic.nrt_deadline", "must be positive"));
        }
        Ok(())
    }

    pub fn radio_params(&self) -> RadioParams {
        RadioParams::from_datasheet_units(
            self.radio.e_elec,
            self.radio.eps_fs,
            self.radio.eps_amp,
            self.radio.bandwidth,
        )
    }

    pub fn radio_range(&self) -> f64 {
        self.radio
            .range
            .unwrap_or_else(|| crossover_distance(&self.radio_params()))
    }

    pub fn weights(&self) -> CostWeights {
        CostWeights::new(self.alpha, self.beta, self.gamma).expect("validated weights")
    }

    pub fn link_loss(&self, from: usize, to: usize) -> f64 {
        self.link_overrides
            .iter()
            .rev()
            .find(|o| o.0 == from && o.1 == to)
            .map_or(self.link_loss, |o| o.2)
    }

    /// Serializes every setting as one `key = value` line. Loading the
    /// output gives back an equal config.
    pub fn to_config_string(&self) -> String {
        let mut out = String::new();
        let mut line = |key: &str, value: String| {
            let _ = writeln!(out, "{key} = {value}");
        };
        line("seed", self.seed.to_string());
        line("duration", num(self.duration));
        line("node_count", self.node_count.to_string());
        line("initial_energy", num(self.initial_energy));
        line("packet_size", self.packet_size.to_string());
        line("alpha", num(self.alpha));
        line("beta", num(self.beta));
        line("gamma", num(self.gamma));
        line("queue_capacity", self.queue_capacity.to_string());
        line("prr_window", self.prr_window.to_string());
        line("link_loss", num(self.link_loss));
        let overrides: Vec<String> = self
            .link_overrides
            .iter()
            .map(|o| format!("[{}, {}, {}]", o.0, o.1, num(o.2)))
            .collect();
        line("link_overrides", format!("[{}]", overrides.join(", ")));
        line("predictive_drop", self.predictive_drop.to_string());
        line(
            "include_service_time",
            self.include_service_time.to_string(),
        );
        line("rate_smoothing", num(self.rate_smoothing));
        line("queue_at_source", self.queue_at_source.to_string());
        line("timeline_interval", num(self.timeline_interval));
        if let Some(positions) = &self.positions {
            let items: Vec<String> = positions
                .iter()
                .map(|p| format!("[{}, {}]", num(p[0]), num(p[1])))
                .collect();
            line("positions", format!("[{}]", items.join(", ")));
        }
        if let Some(sources) = &self.sources {
            let items: Vec<String> = sources.iter().map(|s| s.to_string()).collect();
            line("sources", format!("[{}]", items.join(", ")));
        }
        line("grid.width", num(self.grid.width));
        line("grid.height", num(self.grid.height));
        line("sink.x", num(self.sink.x));
        line("sink.y", num(self.sink.y));
        line("radio.e_elec", num(self.radio.e_elec));
        line("radio.eps_fs", num(self.radio.eps_fs));
        line("radio.eps_amp", num(self.radio.eps_amp));
        line("radio.bandwidth", num(self.radio.bandwidth));
        if let Some(r) = self.radio.range {
            line("radio.range", num(r));
        }
        line("traffic.rt_rate", num(self.traffic.rt_rate));
        line("traffic.nrt_rate", num(self.traffic.nrt_rate));
        line("traffic.rt_deadline", num(self.traffic.rt_deadline));
        line("traffic.nrt_deadline", num(self.traffic.nrt_deadline));
        out
    }
}

/// Shortest decimal that parses back to the same f64.
fn num(v: f64) -> String {
    if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{v:?}")
    }
}

pub fn load_config(path: &Path) -> Result<ScenarioConfig, ConfigError> {
    let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_owned(),
        source,
    })?;
    text.parse()
}
