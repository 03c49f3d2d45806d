//! Sliding-window packet reception rate per directed link.

use std::collections::VecDeque;

pub const DEFAULT_WINDOW: usize = 100;

/// The last `window` delivery outcomes on one directed link.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkStats {
    window: usize,
    outcomes: VecDeque<bool>,
    received: usize,
}

impl LinkStats {
    pub fn new(window: usize) -> Self {
        assert!(window > 0, "PRR window must hold at least one outcome");
        Self {
            window,
            outcomes: VecDeque::with_capacity(window),
            received: 0,
        }
    }

    pub fn window_size(&self) -> usize {
        self.window
    }

    pub fn sent_count(&self) -> usize {
        self.outcomes.len()
    }

    pub fn received_count(&self) -> usize {
        self.received
    }

    pub fn record_outcome(&mut self, delivered: bool) {
        if self.outcomes.len() == self.window {
            if let Some(true) = self.outcomes.pop_front() {
                self.received -= 1;
            }
        }
        self.outcomes.push_back(delivered);
        if delivered {
            self.received += 1;
        }
    }

    /// Received over sent within the window. An unused link reports 1.0 so
    /// that it is not penalized before it has been tried.
    pub fn prr(&self) -> f64 {
        if self.outcomes.is_empty() {
            1.0
        } else {
            self.received as f64 / self.outcomes.len() as f64
        }
    }
}

impl Default for LinkStats {
    fn default() -> Self {
        Self::new(DEFAULT_WINDOW)
    }
}
