/// Online arrival-rate estimate from an exponentially weighted mean of
/// interarrival gaps.
///
/// Early on the weighted mean is bias-corrected so the first few gaps are
/// not pulled toward zero. A long silence since the last arrival caps the
/// rate at `1 / silence`, so an idle node's estimate decays.
#[derive(Debug, Clone, PartialEq)]
pub struct RateEstimator {
    smoothing: f64,
    last_arrival: Option<f64>,
    weighted_gap: f64,
    weight: f64,
}

impl RateEstimator {
    pub fn new(smoothing: f64) -> Self {
        assert!(smoothing > 0.0 && smoothing <= 1.0);
        Self {
            smoothing,
            last_arrival: None,
            weighted_gap: 0.0,
            weight: 0.0,
        }
    }

    pub fn observe(&mut self, at: f64) {
        if let Some(last) = self.last_arrival {
            let a = self.smoothing;
            self.weighted_gap = (1.0 - a) * self.weighted_gap + a * (at - last);
            self.weight = (1.0 - a) * self.weight + a;
        }
        self.last_arrival = Some(at);
    }

    /// Arrivals per second as seen at time `now`; zero until two arrivals
    /// have been observed.
    pub fn rate(&self, now: f64) -> f64 {
        let Some(last) = self.last_arrival else {
            return 0.0;
        };
        if self.weight == 0.0 {
            return 0.0;
        }
        let mean_gap = (self.weighted_gap / self.weight).max(now - last);
        (1.0 / mean_gap).min(f64::MAX)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn silent_until_two_arrivals() {
        let mut r = RateEstimator::new(0.1);
        assert_eq!(r.rate(1.0), 0.0);
        r.observe(1.0);
        assert_eq!(r.rate(1.0), 0.0);
        r.observe(1.5);
        assert!((r.rate(1.5) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn periodic_arrivals() {
        let mut r = RateEstimator::new(0.1);
        for i in 0..100 {
            r.observe(i as f64 * 0.01);
        }
        assert!((r.rate(0.99) - 100.0).abs() < 1e-6);
        // Ten seconds of silence.
        assert!((r.rate(10.99) - 0.1).abs() < 1e-9);
    }

    #[test]
    fn tracks_poisson_rate() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut r = RateEstimator::new(0.001);
        let mut t = 0.0;
        for _ in 0..50_000 {
            let u: f64 = rng.random();
            t += -(1.0 - u).ln() / 250.0;
            r.observe(t);
        }
        assert!((r.rate(t) - 250.0).abs() < 0.1 * 250.0, "{}", r.rate(t));
    }

    #[test]
    fn simultaneous_arrivals_saturate() {
        let mut r = RateEstimator::new(1.0);
        r.observe(1.0);
        r.observe(1.0);
        assert_eq!(r.rate(1.0), f64::MAX);
    }
}
