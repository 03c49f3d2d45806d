//! CSV and text output.
//!
//! `metrics.csv` has one row per run with the columns in [`METRICS_HEADER`].
//! `timeline.csv` has one row per `(seed, time bucket)` with the columns in
//! [`TIMELINE_HEADER`]. Real numbers are written with nine significant
//! digits in scientific notation. Undefined values (no deliveries, no death)
//! are written as `NA`.

use std::fmt::Write as _;
use std::io::{self, Write};

use crate::engine::{DropCause, Metrics};
use crate::node::TrafficClass;

pub const METRICS_HEADER: &str = "seed,generated_rt,generated_nrt,delivered_rt,delivered_nrt,\
drop_expired,drop_predictive,drop_no_route,drop_buffer_overflow,drop_node_death,drop_link_loss,\
in_flight,mean_delay_rt,p95_delay_rt,max_delay_rt,mean_delay_nrt,p95_delay_nrt,max_delay_nrt,\
energy_consumed,first_death_time";

pub const TIMELINE_HEADER: &str = "seed,time,alive,delivered_cumulative";

pub fn real(v: f64) -> String {
    format!("{v:.8e}")
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "NA".to_string(), real)
}

pub fn metrics_row(m: &Metrics) -> String {
    let mut row = format!(
        "{},{},{},{},{}",
        m.seed, m.generated[0], m.generated[1], m.delivered[0], m.delivered[1]
    );
    for cause in DropCause::ALL {
        let _ = write!(row, ",{}", m.drops_by_cause(cause));
    }
    let _ = write!(row, ",{}", m.in_flight);
    for class in TrafficClass::ALL {
        let s = m.delay_summary(class);
        let _ = write!(
            row,
            ",{},{},{}",
            opt(s.map(|s| s.mean)),
            opt(s.map(|s| s.p95)),
            opt(s.map(|s| s.max))
        );
    }
    let _ = write!(row, ",{},{}", real(m.energy_consumed()), opt(m.first_death));
    row
}

pub fn write_metrics_csv<W: Write>(mut out: W, runs: &[Metrics]) -> io::Result<()> {
    writeln!(out, "{METRICS_HEADER}")?;
    for m in runs {
        writeln!(out, "{}", metrics_row(m))?;
    }
    out.flush()
}

pub fn write_timeline_csv<W: Write>(mut out: W, runs: &[Metrics], interval: f64) -> io::Result<()> {
    writeln!(out, "{TIMELINE_HEADER}")?;
    for m in runs {
        for row in m.timeline(interval) {
            writeln!(
                out,
                "{},{},{},{}",
                m.seed,
                real(row.time),
                row.alive,
                row.delivered
            )?;
        }
    }
    out.flush()
}

fn seconds(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_string(), |s| format!("{:.3} ms", s * 1e3))
}

/// Multi-line human-readable digest of one run.
pub fn summary(m: &Metrics) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "seed {}: simulated {:.3} s", m.seed, m.end_time);
    for class in TrafficClass::ALL {
        let i = class.index();
        let delay = m.delay_summary(class);
        let _ = writeln!(
            s,
            "  {:<3} generated {:>8}  delivered {:>8}  mean delay {}  p95 {}  max {}",
            class.label(),
            m.generated[i],
            m.delivered[i],
            seconds(delay.map(|d| d.mean)),
            seconds(delay.map(|d| d.p95)),
            seconds(delay.map(|d| d.max)),
        );
    }
    let drops: Vec<String> = DropCause::ALL
        .iter()
        .map(|&c| format!("{}={}", c.label(), m.drops_by_cause(c)))
        .collect();
    let _ = writeln!(
        s,
        "  drops: {}  in flight: {}",
        drops.join(" "),
        m.in_flight
    );
    let alive = m.alive_timeline.last().map_or(0, |&(_, n)| n);
    let _ = writeln!(
        s,
        "  energy consumed {:.6} J, first death {}, alive sensors at end {}",
        m.energy_consumed(),
        m.first_death
            .map_or_else(|| "none".to_string(), |t| format!("{t:.3} s")),
        alive
    );
    s
}
