//! Default numerical parameters shared by the library and the CLI.
//!
//! Every knob here can be overridden per call; these are the documented
//! defaults used when a configuration omits the value.

/// Number of sine-series modes kept by the spectral pricer. The adaptive
/// truncation rule ([`crate::pricer`]) may keep fewer modes when the decay
/// through the shortest barrier window already drives the tail below
/// [`TRUNCATION_RELATIVE_FLOOR`]. Wide-barrier contracts (large log-width)
/// need more modes than this default; see the pricer docs.
pub const DEFAULT_K_MAX: usize = 64;

/// Gauss-Legendre node count for the re-projection and kernel integrals.
pub const DEFAULT_QUAD_NODES: usize = 128;

/// Monte Carlo sample count (pairs when antithetic sampling is enabled).
pub const DEFAULT_N_PATHS: usize = 200_000;

/// Monitoring steps per barrier window in the Monte Carlo engine; also the
/// total grid size over the horizon for occupation-time estimates.
pub const DEFAULT_STEPS_PER_WINDOW: usize = 2048;

/// Default RNG seed.
pub const DEFAULT_SEED: u64 = 42;

/// Relative level (w.r.t. the leading mode) below which the adaptive rule
/// drops sine modes: a mode is kept only while
/// `exp(-(k pi / L)^2 p_min)` exceeds this floor times the leading factor.
pub const TRUNCATION_RELATIVE_FLOOR: f64 = 1e-14;

/// Transformed gap lengths below this are treated as zero (adjacent windows
/// are concatenated instead of convolving with a near-singular kernel).
pub const MIN_TRANSFORMED_GAP: f64 = 1e-12;

/// Most negative probability mass tolerated before clipping in the moment
/// recovery; anything below this is reported as an inconsistency.
pub const PMF_CLIP_TOLERANCE: f64 = 1e-7;

/// Condition-proxy threshold above which the moment system is rejected.
pub const CONDITION_LIMIT: f64 = 1e12;
