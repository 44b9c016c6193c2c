//! Decoupled pricing: `cost = t * (mu0 * vCPU + mu1 * GB) + mu2`.

use serde::{Deserialize, Serialize};

use crate::config::ResourceConfig;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PricingParams {
    /// Price per vCPU-second.
    pub mu0: f64,
    /// Price per GB-second.
    pub mu1: f64,
    /// Price per request / orchestration event.
    pub mu2: f64,
}

impl Default for PricingParams {
    fn default() -> Self {
        Self { mu0: 0.512, mu1: 0.001, mu2: 0.0 }
    }
}

impl PricingParams {
    pub fn is_valid(&self) -> bool {
        [self.mu0, self.mu1, self.mu2].iter().all(|v| v.is_finite() && *v >= 0.0)
    }

    pub fn scaled(&self, k: f64) -> Self {
        Self { mu0: self.mu0 * k, mu1: self.mu1 * k, mu2: self.mu2 * k }
    }
}

/// Cost of one invocation. Memory is billed in GB (MB / 1024).
pub fn function_cost(runtime: f64, config: &ResourceConfig, pricing: &PricingParams) -> f64 {
    runtime * (pricing.mu0 * config.cpu + pricing.mu1 * config.mem_gb()) + pricing.mu2
}

pub fn aggregate_cost<'a, I>(items: I, pricing: &PricingParams) -> f64
where
    I: IntoIterator<Item = (f64, &'a ResourceConfig)>,
{
    items.into_iter().map(|(t, c)| function_cost(t, c, pricing)).sum()
}
