//! Shared fixtures for the pricing benchmarks.

use multibarrier::floor::PricingParams;
use multibarrier::mc::McConfig;
use multibarrier::{BarrierSchedule, BarrierSpec, MarketParams};

pub fn market() -> MarketParams {
    MarketParams::new(100.0, 0.03, 0.25).unwrap()
}

pub fn barriers() -> BarrierSpec {
    BarrierSpec::new(80.0, 125.0).unwrap()
}

pub fn quarterly_coupons(n: usize) -> BarrierSchedule {
    let period = 1.0 / n as f64;
    let tenors: Vec<f64> = (0..n).map(|i| 0.25 + i as f64 * period).collect();
    BarrierSchedule::from_tenors(&tenors, period).unwrap()
}

pub fn pricing_params() -> PricingParams {
    PricingParams::default()
}

pub fn small_mc() -> McConfig {
    McConfig {
        n_paths: 10_000,
        steps_per_window: 256,
        seed: 42,
        antithetic: false,
    }
}
