//! Pricing of digital double-barrier options whose barriers are active only
//! during a set of time windows, under Black-Scholes dynamics.
//!
//! The analytic engine maps the Black-Scholes PDE to the heat equation and
//! propagates a truncated sine-series state through the alternating structure
//! of barrier windows (Dirichlet rectangles, spectral decay) and free periods
//! (heat-kernel convolution followed by re-projection). On top of the digital
//! pricer sit:
//!
//! * [`floor`] — valuation of the terminal structure floor `(F - A)+` of a
//!   barrier-coupon note, where `A` is the number of coupons paid. The law of
//!   `A` is recovered from its moments, which are linear combinations of
//!   multi-window digital prices.
//! * [`corridor`] — a large-`n` approximation of the structure floor by a put
//!   on the occupation time of the barrier corridor.
//! * [`mc`] — an independent Monte Carlo engine (exact GBM skeletons,
//!   reproducible substreams) used to verify the analytic results.
//! * [`reflection`] — an independent image-charges formula for the
//!   single-window survival probability, used for cross-checks only.
//!
//! All operations are pure functions over immutable inputs and are safe to
//! call concurrently. For a fixed configuration every result is
//! deterministic, including the Monte Carlo estimates.

pub mod constants;
pub mod corridor;
mod dd;
mod error;
pub mod floor;
pub mod mc;
pub mod model;
pub mod pricer;
pub mod quad;
pub mod reflection;

pub use error::{Error, Result};
pub use model::{
    alpha_beta, to_heat_coords, BarrierSchedule, BarrierSpec, HeatCoords, MarketParams, Valuation,
    Window,
};
pub use pricer::{FourierState, PriceResult, PriceStatus};
