//! End-to-end acceptance checks.
//!
//! Every criterion runs inside one test so the packet-trace audit (criterion
//! 7) can cover every simulation the suite performs. Each criterion prints a
//! single `PASS` or `FAIL` line; the test fails if any criterion fails.
//!
//! Run with `cargo test --release --test acceptance -- --nocapture` to see
//! the report.

use std::collections::HashSet;
use std::fs;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rreed::config::{SinkConfig, TrafficConfig};
use rreed::energy::{crossover_distance, tx_energy, RadioParams};
use rreed::engine::{stream, Observer};
use rreed::geometry::{allowed_area, distance, NodeId, Position};
use rreed::link::LinkStats;
use rreed::node::{Packet, PacketId, TrafficClass};
use rreed::queueing::{wait_nrt, wait_rt, ClassLoad, QueueModelParams};
use rreed::routing::{select_next_hop, NeighborEntry};
use rreed::{DropCause, Metrics, ScenarioConfig, Simulation};

/// Seconds to send one 100-bit packet at 250 kbit/s.
const SERVICE: f64 = 100.0 / 250_000.0;

/// Terminal-event bookkeeping shared by every simulated run.
#[derive(Default)]
struct Audit {
    delivered: u64,
    dropped: u64,
    terminal: HashSet<(u64, PacketId)>,
    double_terminal: u64,
    late: u64,
    regressions: u64,
    loops: u64,
    traces: u64,
    run: u64,
    sink: Position,
    positions: Vec<Position>,
}

impl Audit {
    fn begin(&mut self, sim: &Simulation) {
        self.run += 1;
        let topo = sim.topology();
        self.sink = topo.position(topo.sink());
        self.positions = topo.ids().map(|id| topo.position(id)).collect();
    }

    fn terminate(&mut self, packet: &Packet) {
        if !self.terminal.insert((self.run, packet.id)) {
            self.double_terminal += 1;
        }
    }
}

impl Observer for Audit {
    fn on_delivered(&mut self, packet: &Packet, now: f64) {
        self.delivered += 1;
        self.terminate(packet);
        if now > packet.deadline {
            self.late += 1;
        }
        self.traces += 1;
        let mut seen = HashSet::new();
        let mut last = f64::INFINITY;
        for hop in &packet.trace {
            if !seen.insert(hop.node) {
                self.loops += 1;
            }
            let d = distance(self.positions[hop.node.0], self.sink);
            if d > last {
                self.regressions += 1;
            }
            last = d;
        }
    }

    fn on_dropped(&mut self, packet: &Packet, _cause: DropCause, _now: f64) {
        self.dropped += 1;
        self.terminate(packet);
    }
}

/// Criteria that cannot hold with the stated parameters. They still run and
/// print `FAIL` when they miss, but do not fail the test.
///
/// 8: a 100-outcome window on a link with delivery probability 0.8 lands in
/// [0.75, 0.85] with probability about 0.832 (binomial, 75..=85 successes),
/// so 19 or more of 20 seeds happen only about 13% of the time.
/// `prr_band_rate_matches_binomial` checks the estimator against that rate.
const UNATTAINABLE: &[u32] = &[8];

struct Suite {
    audit: Audit,
    lines: Vec<String>,
    failures: usize,
}

impl Suite {
    fn simulate(&mut self, config: ScenarioConfig) -> Metrics {
        let sim = Simulation::new(config.clone()).expect("valid acceptance scenario");
        self.audit.begin(&sim);
        sim.run_with(&mut self.audit)
    }

    fn report(&mut self, number: u32, name: &str, outcome: Result<String, String>) {
        let line = match outcome {
            Ok(detail) => format!("PASS  {number:>2}. {name}: {detail}"),
            Err(detail) if UNATTAINABLE.contains(&number) => {
                format!("FAIL  {number:>2}. {name}: {detail} (unattainable at these parameters)")
            }
            Err(detail) => {
                self.failures += 1;
                format!("FAIL  {number:>2}. {name}: {detail}")
            }
        };
        println!("{line}");
        self.lines.push(line);
    }
}

/// Sink at the origin, relay at 60 m, source at 120 m. The relay is the only
/// allowed neighbor of the source, and the sink is the only one of the relay.
fn relay_chain(rt_rate: f64, nrt_rate: f64, duration: f64) -> ScenarioConfig {
    ScenarioConfig {
        seed: 7,
        duration,
        node_count: 3,
        positions: Some(vec![[60.0, 0.0], [120.0, 0.0]]),
        sink: SinkConfig { x: 0.0, y: 0.0 },
        sources: Some(vec![2]),
        initial_energy: 1.0e3,
        rate_smoothing: 0.001,
        queue_capacity: 100_000,
        traffic: TrafficConfig {
            rt_rate,
            nrt_rate,
            rt_deadline: f64::INFINITY,
            nrt_deadline: f64::INFINITY,
        },
        ..ScenarioConfig::default()
    }
}

fn relative_error(measured: f64, expected: f64) -> f64 {
    (measured - expected).abs() / expected
}

fn criterion_1(suite: &mut Suite) -> Result<String, String> {
    let budget = Duration::from_secs(30);
    let packets = 400_000.0;
    let mut details = Vec::new();
    let mut ok = true;
    for rho in [0.3, 0.5, 0.7] {
        let lambda = rho / SERVICE;
        let started = Instant::now();
        let m = suite.simulate(relay_chain(lambda, 0.0, packets / lambda));
        let elapsed = started.elapsed();
        let waits = m.nodes[1].waits[TrafficClass::RealTime.index()];
        let measured = waits.mean().unwrap_or(f64::NAN);
        // Closed form for deterministic service, written out independently.
        let r = 0.5 * lambda * SERVICE * SERVICE;
        let expected = r / (1.0 - rho);
        let model = wait_rt(&QueueModelParams::new(
            ClassLoad::deterministic(lambda, SERVICE).unwrap(),
            ClassLoad::deterministic(0.0, SERVICE).unwrap(),
        ))
        .unwrap();
        let err = relative_error(measured, expected);
        ok &= waits.count >= 100_000
            && err <= 0.05
            && relative_error(model, expected) < 1e-12
            && elapsed < budget;
        details.push(format!(
            "rho={rho} n={} W1={expected:.4e} sim={measured:.4e} err={:.2}% {:.1}s",
            waits.count,
            100.0 * err,
            elapsed.as_secs_f64()
        ));
    }
    let detail = details.join("; ");
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn criterion_2(suite: &mut Suite) -> Result<String, String> {
    let rho = 0.6;
    let lambda = rho / SERVICE / 2.0;
    let started = Instant::now();
    let m = suite.simulate(relay_chain(lambda, lambda, 400_000.0 / (2.0 * lambda)));
    let elapsed = started.elapsed();
    let rt = m.nodes[1].waits[TrafficClass::RealTime.index()];
    let nrt = m.nodes[1].waits[TrafficClass::NonRealTime.index()];
    let (rt_mean, nrt_mean) = (
        rt.mean().unwrap_or(f64::NAN),
        nrt.mean().unwrap_or(f64::NAN),
    );
    let rho1 = lambda * SERVICE;
    let r = 0.5 * 2.0 * lambda * SERVICE * SERVICE;
    let expected = r / ((1.0 - rho1) * (1.0 - rho));
    let load = ClassLoad::deterministic(lambda, SERVICE).unwrap();
    let model = wait_nrt(&QueueModelParams::new(load, load)).unwrap();
    let err = relative_error(nrt_mean, expected);
    let detail = format!(
        "W2={expected:.4e} sim NRT={nrt_mean:.4e} (n={}) err={:.2}%, sim RT={rt_mean:.4e} (n={}), {:.1}s",
        nrt.count,
        100.0 * err,
        rt.count,
        elapsed.as_secs_f64()
    );
    if err <= 0.10
        && rt_mean <= nrt_mean
        && relative_error(model, expected) < 1e-12
        && elapsed < Duration::from_secs(60)
    {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn criterion_3(suite: &mut Suite) -> Result<String, String> {
    let expected = (2.0f64 / 7.5e-6).floor() as u64;
    let config = ScenarioConfig {
        duration: 1000.0,
        node_count: 2,
        positions: Some(vec![[50.0, 0.0]]),
        sink: SinkConfig { x: 0.0, y: 0.0 },
        initial_energy: 2.0,
        traffic: TrafficConfig {
            rt_rate: 1000.0,
            nrt_rate: 0.0,
            rt_deadline: f64::INFINITY,
            nrt_deadline: f64::INFINITY,
        },
        ..ScenarioConfig::default()
    };
    let m = suite.simulate(config);
    let first = m
        .nodes
        .iter()
        .filter(|n| n.died_at.is_some())
        .min_by(|a, b| a.died_at.partial_cmp(&b.died_at).unwrap());
    match first {
        Some(node) if node.transmissions == expected && node.died_at == m.first_death => {
            Ok(format!(
                "first death at {:.3} s after {} transmissions",
                m.first_death.unwrap(),
                node.transmissions
            ))
        }
        Some(node) => Err(format!(
            "died after {} transmissions, expected {expected}",
            node.transmissions
        )),
        None => Err("no node died".to_string()),
    }
}

fn criterion_4() -> Result<String, String> {
    let radio = RadioParams::default();
    let d0 = crossover_distance(&radio);
    let eps = 1e-9;
    let gap = (tx_energy(100, d0 - eps, &radio) - tx_energy(100, d0 + eps, &radio)).abs()
        / tx_energy(100, d0, &radio);
    let detail = format!("d0={d0:.6} m, relative jump {gap:.3e}");
    if gap < 1e-6 && (d0 - (10.0f64 / 0.0013).sqrt()).abs() < 1e-9 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn criterion_5() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut disagreements = 0;
    for _ in 0..1000 {
        let len = rng.random_range(0..12);
        let mut table: Vec<NeighborEntry> = (0..len)
            .map(|i| {
                // Small integer costs force frequent ties; some entries are infinite.
                let cost = if rng.random_bool(0.2) {
                    f64::INFINITY
                } else {
                    f64::from(rng.random_range(0..5u8))
                };
                NeighborEntry {
                    id: NodeId(i * 3 + rng.random_range(0..3)),
                    predicted_delay: 0.0,
                    usable_energy: 1.0,
                    prr: 1.0,
                    cost,
                }
            })
            .collect();
        // Table order must not matter.
        for i in (1..table.len()).rev() {
            table.swap(i, rng.random_range(0..=i));
        }
        let mut oracle: Option<&NeighborEntry> = None;
        for e in &table {
            if !e.cost.is_finite() {
                continue;
            }
            oracle = match oracle {
                Some(best) if best.cost < e.cost || (best.cost == e.cost && best.id < e.id) => {
                    Some(best)
                }
                _ => Some(e),
            };
        }
        let chosen = select_next_hop(&table).ok().map(|e| e.id);
        if chosen != oracle.map(|e| e.id) {
            disagreements += 1;
        }
    }
    if disagreements == 0 {
        Ok("1000/1000 tables agree".to_string())
    } else {
        Err(format!("{disagreements} of 1000 tables disagree"))
    }
}

fn criterion_6(suite: &mut Suite) -> Result<String, String> {
    let (late_before, delivered_before) = (suite.audit.late, suite.audit.delivered);
    let mut gaps = 0;
    let mut mismatches = 0;
    let (mut delivered, mut predictive, mut expired) = (0, 0, 0);
    for seed in 1..=20 {
        let config = ScenarioConfig {
            seed,
            duration: 30.0,
            node_count: 50,
            grid: rreed::config::GridConfig {
                width: 300.0,
                height: 300.0,
            },
            sink: SinkConfig { x: 150.0, y: 150.0 },
            traffic: TrafficConfig {
                rt_rate: 2.0,
                nrt_rate: 2.0,
                rt_deadline: 0.0015,
                nrt_deadline: 1.0,
            },
            ..ScenarioConfig::default()
        };
        let (d0, x0) = (suite.audit.delivered, suite.audit.dropped);
        let m = suite.simulate(config);
        if m.conservation_gap() != 0 {
            gaps += 1;
        }
        // The audit counts terminal events independently of the metrics.
        let terminal = (suite.audit.delivered - d0) + (suite.audit.dropped - x0);
        if terminal + m.in_flight != m.generated_total()
            || terminal != m.delivered_total() + m.drops_total()
        {
            mismatches += 1;
        }
        delivered += m.delivered[0];
        predictive += m.drops_for(TrafficClass::RealTime, DropCause::Predictive);
        expired += m.drops_for(TrafficClass::RealTime, DropCause::Expired);
    }
    let late = suite.audit.late - late_before;
    let detail = format!(
        "{} deliveries checked, {late} late; RT delivered {delivered}, predictive drops {predictive}, expired {expired}; \
         conservation failures {gaps}, audit mismatches {mismatches}",
        suite.audit.delivered - delivered_before
    );
    // The scenario must actually exercise tight deadlines.
    if late == 0 && gaps == 0 && mismatches == 0 && delivered > 0 && predictive + expired > 0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn criterion_7(audit: &Audit) -> Result<String, String> {
    let detail = format!(
        "{} delivered traces, {} distance regressions, {} loops, {} packets terminated twice",
        audit.traces, audit.regressions, audit.loops, audit.double_terminal
    );
    if audit.traces > 0 && audit.regressions == 0 && audit.loops == 0 && audit.double_terminal == 0
    {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn criterion_8() -> Result<String, String> {
    let mut estimates = Vec::new();
    for seed in 1..=20 {
        // Same stream label and draw the simulator uses for the link 1 -> 0.
        let mut rng = stream(seed, "link/1/0");
        let mut stats = LinkStats::new(100);
        for _ in 0..500 {
            stats.record_outcome(rng.random::<f64>() >= 0.2);
        }
        estimates.push(stats.prr());
    }
    let inside = estimates
        .iter()
        .filter(|&&p| (0.75..=0.85).contains(&p))
        .count();
    let list: Vec<String> = estimates.iter().map(|p| format!("{p:.2}")).collect();
    let detail = format!("{inside}/20 seeds in [0.75, 0.85]: {}", list.join(" "));
    if inside >= 19 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn criterion_9() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let samples = 1_000_000;
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let sender = Position::new(rng.random_range(0.0..1000.0), rng.random_range(0.0..1000.0));
        let sink = Position::new(rng.random_range(0.0..1000.0), rng.random_range(0.0..1000.0));
        let range = rng.random_range(50.0..400.0);
        let to_sink = distance(sender, sink);
        // The region lies inside both disks; sample uniformly in the smaller one.
        let (center, radius) = if range <= to_sink {
            (sender, range)
        } else {
            (sink, to_sink)
        };
        let mut hits = 0u64;
        for _ in 0..samples {
            let r = radius * rng.random::<f64>().sqrt();
            let theta = rng.random_range(0.0..std::f64::consts::TAU);
            let p = Position::new(center.x + r * theta.cos(), center.y + r * theta.sin());
            if distance(p, sender) <= range && distance(p, sink) <= to_sink {
                hits += 1;
            }
        }
        let estimate = std::f64::consts::PI * radius * radius * hits as f64 / samples as f64;
        worst = worst.max(relative_error(allowed_area(sender, sink, range), estimate));
    }
    let detail = format!(
        "worst relative error {:.3}% over 10 configurations",
        100.0 * worst
    );
    if worst <= 0.005 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn criterion_10() -> Result<String, String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let config = dir.path().join("scenario.toml");
    fs::write(
        &config,
        "seed = 42\nduration = 20.0\nnode_count = 40\ntraffic.rt_rate = 1.0\n",
    )
    .map_err(|e| e.to_string())?;
    let mut outputs = Vec::new();
    for run in ["a", "b"] {
        let out = dir.path().join(run);
        let status = Command::new(env!("CARGO_BIN_EXE_rreed"))
            .arg("--config")
            .arg(&config)
            .arg("--seed")
            .arg("42")
            .arg("--out")
            .arg(&out)
            .arg("--quiet")
            .status()
            .map_err(|e| e.to_string())?;
        if !status.success() {
            return Err(format!("run {run} exited with {status}"));
        }
        outputs.push(fs::read(out.join("metrics.csv")).map_err(|e| e.to_string())?);
    }
    if outputs[0] == outputs[1] && !outputs[0].is_empty() {
        Ok(format!(
            "metrics.csv identical ({} bytes)",
            outputs[0].len()
        ))
    } else {
        Err("metrics.csv differs between runs".to_string())
    }
}

#[test]
fn acceptance() {
    let mut suite = Suite {
        audit: Audit::default(),
        lines: Vec::new(),
        failures: 0,
    };
    let r = criterion_1(&mut suite);
    suite.report(1, "single-class relay wait", r);
    let r = criterion_2(&mut suite);
    suite.report(2, "two-class priority waits", r);
    let r = criterion_3(&mut suite);
    suite.report(3, "energy lifetime", r);
    suite.report(4, "crossover continuity", criterion_4());
    suite.report(5, "routing argmin", criterion_5());
    let r = criterion_6(&mut suite);
    suite.report(6, "deadline guarantee", r);
    let r = criterion_8();
    let audit = std::mem::take(&mut suite.audit);
    suite.report(7, "geometric progress", criterion_7(&audit));
    suite.report(8, "PRR convergence", r);
    suite.report(9, "lens area", criterion_9());
    suite.report(10, "determinism", criterion_10());

    assert_eq!(
        suite.failures,
        0,
        "failed criteria:\n{}",
        suite.lines.join("\n")
    );
}

#[test]
fn prr_band_rate_matches_binomial() {
    // P(75 <= Bin(100, 0.8) <= 85), summed exactly.
    let mut expected = 0.0;
    for k in 75..=85u32 {
        let mut ln_choose = 0.0;
        for i in 0..k {
            ln_choose += f64::from(100 - i).ln() - f64::from(i + 1).ln();
        }
        expected +=
            (ln_choose + f64::from(k) * 0.8f64.ln() + f64::from(100 - k) * 0.2f64.ln()).exp();
    }
    let seeds = 4000;
    let mut inside = 0;
    for seed in 0..seeds {
        let mut rng = stream(seed, "link/1/0");
        let mut stats = LinkStats::new(100);
        for _ in 0..500 {
            stats.record_outcome(rng.random::<f64>() >= 0.2);
        }
        if (0.75..=0.85).contains(&stats.prr()) {
            inside += 1;
        }
    }
    let rate = f64::from(inside) / f64::from(seeds as u32);
    assert!(
        (rate - expected).abs() < 0.025,
        "in-band rate {rate}, binomial {expected}"
    );
}
