//! Mean waiting times for a two-class, non-preemptive priority M/G/1 queue.
//!
//! Class 1 (real-time) is always served before class 2 (non-real-time), but a
//! job already in service is never interrupted. The Pollaczek-Khinchin mean
//! value results give
//!
//! ```text
//! R  = ½ · Σ λᵢ · E[Xᵢ²]
//! W₁ = R / (1 − ρ₁)
//! W₂ = R / ((1 − ρ₁)(1 − ρ₁ − ρ₂))
//! ```
//!
//! where `ρᵢ = λᵢ · E[Xᵢ]`.

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum QueueError {
    #[error("invalid class load: {0}")]
    InvalidLoad(&'static str),
    /// The offered load sits at or beyond the stability boundary.
    #[error("queue is unstable (utilization {utilization} >= 1)")]
    Unstable { utilization: f64 },
}

/// Offered load of one traffic class at a single server.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassLoad {
    arrival_rate: f64,
    mean_service: f64,
    second_moment: f64,
}

impl ClassLoad {
    pub fn new(
        arrival_rate: f64,
        mean_service: f64,
        second_moment: f64,
    ) -> Result<Self, QueueError> {
        if !arrival_rate.is_finite() || arrival_rate < 0.0 {
            return Err(QueueError::InvalidLoad(
                "arrival rate must be finite and non-negative",
            ));
        }
        if !mean_service.is_finite() || mean_service <= 0.0 {
            return Err(QueueError::InvalidLoad(
                "mean service time must be finite and positive",
            ));
        }
        // Allow a few ulps of slack so that E[X]² computed for deterministic
        // service does not trip the variance check.
        if second_moment.is_nan()
            || second_moment < mean_service * mean_service * (1.0 - 4.0 * f64::EPSILON)
        {
            return Err(QueueError::InvalidLoad("second moment below squared mean"));
        }
        Ok(Self {
            arrival_rate,
            mean_service,
            second_moment,
        })
    }

    /// Load with a constant service time, so `E[X²] = X²`.
    pub fn deterministic(arrival_rate: f64, service: f64) -> Result<Self, QueueError> {
        Self::new(arrival_rate, service, service * service)
    }

    pub fn arrival_rate(&self) -> f64 {
        self.arrival_rate
    }

    pub fn mean_service(&self) -> f64 {
        self.mean_service
    }

    pub fn second_moment(&self) -> f64 {
        self.second_moment
    }

    /// Service rate μ = 1 / E[X].
    pub fn service_rate(&self) -> f64 {
        1.0 / self.mean_service
    }
}

/// Loads of the high-priority (RT) and low-priority (NRT) classes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QueueModelParams {
    pub rt: ClassLoad,
    pub nrt: ClassLoad,
}

impl QueueModelParams {
    pub fn new(rt: ClassLoad, nrt: ClassLoad) -> Self {
        Self { rt, nrt }
    }

    pub fn total_utilization(&self) -> f64 {
        utilization(&self.rt) + utilization(&self.nrt)
    }
}

/// ρ = λ · E[X].
pub fn utilization(load: &ClassLoad) -> f64 {
    load.arrival_rate * load.mean_service
}

/// Mean residual service time seen by an arriving job.
pub fn mean_residual(params: &QueueModelParams) -> f64 {
    0.5 * (params.rt.arrival_rate * params.rt.second_moment
        + params.nrt.arrival_rate * params.nrt.second_moment)
}

/// Mean queueing delay (excluding service) of a real-time job.
pub fn wait_rt(params: &QueueModelParams) -> Result<f64, QueueError> {
    let rho1 = utilization(&params.rt);
    if rho1 >= 1.0 {
        return Err(QueueError::Unstable { utilization: rho1 });
    }
    Ok(mean_residual(params) / (1.0 - rho1))
}

/// Mean queueing delay (excluding service) of a non-real-time job.
pub fn wait_nrt(params: &QueueModelParams) -> Result<f64, QueueError> {
    let rho1 = utilization(&params.rt);
    let rho = rho1 + utilization(&params.nrt);
    if rho >= 1.0 {
        return Err(QueueError::Unstable { utilization: rho });
    }
    Ok(mean_residual(params) / ((1.0 - rho1) * (1.0 - rho)))
}
