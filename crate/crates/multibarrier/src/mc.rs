//! Independent Monte Carlo verification engine.
//!
//! Paths are exact GBM skeletons (log-normal increments) on grids that
//! monitor every barrier window; barrier breaches between grid points are
//! invisible, so raw survival estimates carry an upward bias of order
//! `sqrt(dt)`. The step-halving estimators remove the leading bias term by
//! Richardson extrapolation on nested monitoring grids (the coarse monitor
//! set is a subset of the fine one, so refinement is pathwise monotone).
//!
//! Reproducibility: each sample owns a counter-indexed ChaCha substream, so
//! results are independent of thread count and of the total path budget, and
//! bit-identical for a fixed [`McConfig`].

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::constants::{DEFAULT_N_PATHS, DEFAULT_SEED, DEFAULT_STEPS_PER_WINDOW};
use crate::error::{Error, Result};
use crate::model::{BarrierSchedule, BarrierSpec, MarketParams, Window};

/// Monte Carlo configuration.
///
/// `n_paths` counts samples; with `antithetic` enabled each sample averages a
/// path and its mirrored partner (same substream, negated increments), which
/// never increases the per-sample variance of a bounded payoff.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McConfig {
    pub n_paths: usize,
    pub steps_per_window: usize,
    pub seed: u64,
    pub antithetic: bool,
}

impl Default for McConfig {
    fn default() -> Self {
        McConfig {
            n_paths: DEFAULT_N_PATHS,
            steps_per_window: DEFAULT_STEPS_PER_WINDOW,
            seed: DEFAULT_SEED,
            antithetic: false,
        }
    }
}

impl McConfig {
    fn validate(&self) -> Result<()> {
        if self.n_paths == 0 {
            return Err(Error::param("n_paths", "must be >= 1"));
        }
        if self.steps_per_window == 0 {
            return Err(Error::param("steps_per_window", "must be >= 1"));
        }
        Ok(())
    }
}

/// Direction of the known estimator bias, if any.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BiasNote {
    /// Grid monitoring misses barrier excursions: survival (and anything
    /// monotone in it) is biased upward.
    UpwardSurvivalBias,
    None,
}

/// A Monte Carlo mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n_paths: usize,
    pub bias_note: BiasNote,
}

/// Per-path, per-window survival bits from one simulation run.
///
/// With antithetic sampling the rows interleave each sample's two branches:
/// rows `2i` and `2i + 1` belong to sample `i`.
#[derive(Debug, Clone)]
pub struct SurvivalSample {
    masks: Vec<u64>,
    n_windows: usize,
    paired: bool,
}

impl SurvivalSample {
    pub fn n_windows(&self) -> usize {
        self.n_windows
    }

    pub fn n_rows(&self) -> usize {
        self.masks.len()
    }

    pub fn paired(&self) -> bool {
        self.paired
    }

    /// Survival bit of window `w` on row `row`.
    pub fn bit(&self, row: usize, w: usize) -> bool {
        self.masks[row] >> w & 1 == 1
    }

    /// Number of surviving windows on row `row`.
    pub fn count(&self, row: usize) -> u32 {
        self.masks[row].count_ones()
    }

    pub fn masks(&self) -> &[u64] {
        &self.masks
    }
}

/// One branch's normal-increment stream; the antithetic partner reuses the
/// stream with negated draws.
pub(crate) struct PathStream {
    rng: ChaCha8Rng,
    negate: bool,
}

impl PathStream {
    pub(crate) fn new(seed: u64, stream: u64, negate: bool) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        PathStream { rng, negate }
    }

    #[inline]
    pub(crate) fn normal(&mut self) -> f64 {
        let z: f64 = StandardNormal.sample(&mut self.rng);
        if self.negate {
            -z
        } else {
            z
        }
    }
}

fn time_tol(t: f64) -> f64 {
    1e-12 * t.abs().max(1.0)
}

/// Walks one branch across the schedule, returning one survival mask per
/// monitor stride. Stride `s` monitors every `s`-th fine-grid point of each
/// window (both window endpoints always included); coarse monitor sets are
/// therefore subsets of finer ones.
#[allow(clippy::too_many_arguments)]
fn branch_masks(
    stream: &mut PathStream,
    market: &MarketParams,
    barriers: &BarrierSpec,
    windows: &[Window],
    t0: f64,
    spw: usize,
    strides: &[usize],
    masks: &mut [u64],
) {
    let lo = barriers.low().ln();
    let hi = barriers.up().ln();
    let mu = market.log_drift();
    let vol = market.vol();
    let mut x = market.spot().ln();
    let mut tcur = t0;
    for m in masks.iter_mut() {
        *m = 0;
    }
    let mut alive = vec![false; strides.len()];
    for (wi, w) in windows.iter().enumerate() {
        let hop = w.start() - tcur;
        if hop > time_tol(w.start()) {
            x += mu * hop + vol * hop.sqrt() * stream.normal();
        }
        let inside0 = lo < x && x < hi;
        alive.iter_mut().for_each(|a| *a = inside0);
        let dt = w.length() / spw as f64;
        let sdt = vol * dt.sqrt();
        let mudt = mu * dt;
        for j in 1..=spw {
            x += mudt + sdt * stream.normal();
            let inside = lo < x && x < hi;
            if !inside {
                for (si, &s) in strides.iter().enumerate() {
                    if j % s == 0 {
                        alive[si] = false;
                    }
                }
            }
        }
        for (si, &a) in alive.iter().enumerate() {
            if a {
                masks[si] |= 1 << wi;
            }
        }
        tcur = w.end();
    }
}

/// Runs `f` once per branch and returns `dim` values per sample (pair-mean
/// when antithetic), in deterministic sample order.
fn sample_vectors<F>(config: &McConfig, dim: usize, f: F) -> Vec<f64>
where
    F: Fn(&mut PathStream, &mut [f64]) + Sync,
{
    let chunks: Vec<Vec<f64>> = (0..config.n_paths)
        .into_par_iter()
        .map(|i| {
            let mut out = vec![0.0; dim];
            let mut s = PathStream::new(config.seed, i as u64, false);
            f(&mut s, &mut out);
            if config.antithetic {
                let mut out2 = vec![0.0; dim];
                let mut s2 = PathStream::new(config.seed, i as u64, true);
                f(&mut s2, &mut out2);
                for (a, b) in out.iter_mut().zip(&out2) {
                    *a = 0.5 * (*a + b);
                }
            }
            out
        })
        .collect();
    let mut flat = Vec::with_capacity(config.n_paths * dim);
    for c in chunks {
        flat.extend(c);
    }
    flat
}

/// Mean and standard error over samples for component `j` of flat
/// sample-major data.
fn stat(flat: &[f64], dim: usize, j: usize, n: usize) -> (f64, f64) {
    let mut mean = 0.0;
    for i in 0..n {
        mean += flat[i * dim + j];
    }
    mean /= n as f64;
    if n < 2 {
        return (mean, 0.0);
    }
    let mut var = 0.0;
    for i in 0..n {
        let d = flat[i * dim + j] - mean;
        var += d * d;
    }
    var /= (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

fn check_masked_schedule(schedule: &BarrierSchedule) -> Result<()> {
    if schedule.len() > 64 {
        return Err(Error::InvalidSchedule(
            "Monte Carlo survival masks support at most 64 windows".into(),
        ));
    }
    Ok(())
}

/// Simulates per-window survival indicators on the schedule as given
/// (windows are not concatenated), anchored at `t = 0`.
///
/// A window survives on a path iff every monitor point in the closed window
/// lies strictly between the barriers; a point shared by two adjacent
/// windows is monitored once and applies to both.
pub fn simulate_survival_indicators(
    market: &MarketParams,
    barriers: &BarrierSpec,
    schedule: &BarrierSchedule,
    config: &McConfig,
) -> Result<SurvivalSample> {
    config.validate()?;
    check_masked_schedule(schedule)?;
    let spw = config.steps_per_window;
    let windows = schedule.windows().to_vec();
    let market = *market;
    let barriers = *barriers;

    let rows: Vec<u64> = (0..config.n_paths)
        .into_par_iter()
        .flat_map_iter(|i| {
            let mut out = [0u64; 2];
            let mut s = PathStream::new(config.seed, i as u64, false);
            branch_masks(
                &mut s,
                &market,
                &barriers,
                &windows,
                0.0,
                spw,
                &[1],
                &mut out[..1],
            );
            let first = out[0];
            let second = if config.antithetic {
                let mut s2 = PathStream::new(config.seed, i as u64, true);
                branch_masks(
                    &mut s2,
                    &market,
                    &barriers,
                    &windows,
                    0.0,
                    spw,
                    &[1],
                    &mut out[1..],
                );
                Some(out[1])
            } else {
                None
            };
            std::iter::once(first).chain(second)
        })
        .collect();

    Ok(SurvivalSample {
        masks: rows,
        n_windows: schedule.len(),
        paired: config.antithetic,
    })
}

/// Estimates the discounted multi-window digital price
/// `exp(-r (T_end - t)) P[all windows survive]` on the raw monitoring grid.
///
/// The schedule is concatenated first, so a schedule and its concatenation
/// produce identical estimates path by path under the same seed.
pub fn estimate_bd_price(
    market: &MarketParams,
    barriers: &BarrierSpec,
    schedule: &BarrierSchedule,
    t: f64,
    config: &McConfig,
) -> Result<McEstimate> {
    let (levels, _) = bd_levels(market, barriers, schedule, t, config, &[1])?;
    let df = (-market.rate() * (schedule.end() - t)).exp();
    let n = config.n_paths;
    let (mean, se) = stat(&levels, 1, 0, n);
    Ok(McEstimate {
        mean: df * mean,
        std_error: df * se,
        n_paths: n,
        bias_note: BiasNote::UpwardSurvivalBias,
    })
}

/// Step-halving estimate of the digital price: survival is evaluated on the
/// fine grid and on a `coarse_stride`-times coarser subset of the same
/// paths, and the leading `sqrt(dt)` monitoring bias is removed per path by
/// Richardson extrapolation.
pub fn estimate_bd_price_extrapolated(
    market: &MarketParams,
    barriers: &BarrierSpec,
    schedule: &BarrierSchedule,
    t: f64,
    config: &McConfig,
    coarse_stride: usize,
) -> Result<McEstimate> {
    let (levels, weight) = bd_levels(market, barriers, schedule, t, config, &[coarse_stride, 1])?;
    let df = (-market.rate() * (schedule.end() - t)).exp();
    let n = config.n_paths;
    // per-sample extrapolated value: fine + (fine - coarse) / (sqrt(ratio)-1)
    let mut combo = vec![0.0; n];
    for i in 0..n {
        let coarse = levels[i * 2];
        let fine = levels[i * 2 + 1];
        combo[i] = fine + (fine - coarse) * weight;
    }
    let (mean, se) = stat(&combo, 1, 0, n);
    Ok(McEstimate {
        mean: df * mean,
        std_error: df * se,
        n_paths: n,
        bias_note: BiasNote::None,
    })
}

/// Richardson weight for bias exponent 1/2 and a step ratio of `stride`.
fn richardson_weight(stride: usize) -> f64 {
    1.0 / ((stride as f64).sqrt() - 1.0)
}

fn bd_levels(
    market: &MarketParams,
    barriers: &BarrierSpec,
    schedule: &BarrierSchedule,
    t: f64,
    config: &McConfig,
    strides: &[usize],
) -> Result<(Vec<f64>, f64)> {
    config.validate()?;
    let normalized = schedule.concatenated();
    check_masked_schedule(&normalized)?;
    if t > normalized.first_start() + time_tol(t) {
        return Err(Error::param(
            "t",
            "Monte Carlo digital estimates need t at or before the first window",
        ));
    }
    for &s in strides {
        if s == 0 || !config.steps_per_window.is_multiple_of(s) {
            return Err(Error::param(
                "coarse_stride",
                format!("stride {s} must divide steps_per_window"),
            ));
        }
    }
    let full: u64 = if normalized.len() == 64 {
        !0
    } else {
        (1u64 << normalized.len()) - 1
    };
    let windows = normalized.windows().to_vec();
    let spw = config.steps_per_window;
    let dim = strides.len();
    let market = *market;
    let barriers = *barriers;
    let strides_owned = strides.to_vec();
    let levels = sample_vectors(config, dim, move |stream, out| {
        let mut masks = vec![0u64; dim];
        branch_masks(
            stream,
            &market,
            &barriers,
            &windows,
            t,
            spw,
            &strides_owned,
            &mut masks,
        );
        for (o, m) in out.iter_mut().zip(&masks) {
            *o = if *m == full { 1.0 } else { 0.0 };
        }
    });
    let weight = if strides.len() == 2 {
        richardson_weight(strides[0] / strides[1])
    } else {
        0.0
    };
    Ok((levels, weight))
}

/// Empirical law of the coupon count with per-bin standard errors.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalPmf {
    /// `probs[i]` estimates `P[A = i]`, `i = 0..=n`.
    pub probs: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub n_paths: usize,
    pub bias_note: BiasNote,
}

impl EmpiricalPmf {
    /// Sample moment `sum_i i^nu probs[i]`.
    pub fn moment(&self, nu: u32) -> f64 {
        self.probs
            .iter()
            .enumerate()
            .map(|(i, p)| (i as f64).powi(nu as i32) * p)
            .sum()
    }
}

fn pmf_from_values<F>(
    market: &MarketParams,
    barriers: &BarrierSpec,
    schedule: &BarrierSchedule,
    config: &McConfig,
    strides: &[usize],
    bias: BiasNote,
    f: F,
) -> Result<EmpiricalPmf>
where
    F: Fn(&[u64], &mut [f64]) + Sync,
{
    config.validate()?;
    check_masked_schedule(schedule)?;
    for &s in strides {
        if s == 0 || !config.steps_per_window.is_multiple_of(s) {
            return Err(Error::param(
                "coarse_stride",
                format!("stride {s} must divide steps_per_window"),
            ));
        }
    }
    let n = schedule.len();
    let dim = n + 1;
    let windows = schedule.windows().to_vec();
    let spw = config.steps_per_window;
    let market = *market;
    let barriers = *barriers;
    let strides_owned = strides.to_vec();
    let n_strides = strides.len();
    let flat = sample_vectors(config, dim, move |stream, out| {
        let mut masks = vec![0u64; n_strides];
        branch_masks(
            stream,
            &market,
            &barriers,
            &windows,
            0.0,
            spw,
            &strides_owned,
            &mut masks,
        );
        f(&masks, out);
    });
    let mut probs = vec![0.0; dim];
    let mut ses = vec![0.0; dim];
    for j in 0..dim {
        let (m, s) = stat(&flat, dim, j, config.n_paths);
        probs[j] = m;
        ses[j] = s;
    }
    Ok(EmpiricalPmf {
        probs,
        std_errors: ses,
        n_paths: config.n_paths,
        bias_note: bias,
    })
}

/// Empirical pmf of the coupon count `A` on the raw monitoring grid,
/// anchored at `t = 0`. The schedule is used as given; for a coupon note the
/// windows are the adjacent coupon periods.
pub fn estimate_coupon_pmf(
    market: &MarketParams,
    barriers: &BarrierSpec,
    schedule: &BarrierSchedule,
    config: &McConfig,
) -> Result<EmpiricalPmf> {
    pmf_from_values(
        market,
        barriers,
        schedule,
        config,
        &[1],
        BiasNote::UpwardSurvivalBias,
        |masks, out| {
            out[masks[0].count_ones() as usize] = 1.0;
        },
    )
}

/// Step-halving estimate of the coupon pmf: each bin indicator is Richardson
/// extrapolated per path, so entries are unbiased statistics rather than
/// frequencies and may fall slightly outside `[0, 1]`.
pub fn estimate_coupon_pmf_extrapolated(
    market: &MarketParams,
    barriers: &BarrierSpec,
    schedule: &BarrierSchedule,
    config: &McConfig,
    coarse_stride: usize,
) -> Result<EmpiricalPmf> {
    let w = richardson_weight(coarse_stride);
    pmf_from_values(
        market,
        barriers,
        schedule,
        config,
        &[coarse_stride, 1],
        BiasNote::None,
        move |masks, out| {
            let coarse = masks[0].count_ones() as usize;
            let fine = masks[1].count_ones() as usize;
            out[fine] += 1.0 + w;
            out[coarse] -= w;
        },
    )
}

/// Survival estimates on a ladder of nested monitoring grids (one per
/// stride, coarse to fine) from a single set of paths. Because coarse
/// monitor sets are subsets of fine ones, the estimates decrease
/// monotonically along the ladder path by path.
pub fn estimate_bd_price_refinement(
    market: &MarketParams,
    barriers: &BarrierSpec,
    schedule: &BarrierSchedule,
    t: f64,
    config: &McConfig,
    strides: &[usize],
) -> Result<Vec<McEstimate>> {
    if strides.is_empty() || strides.windows(2).any(|w| w[0] <= w[1]) {
        return Err(Error::param(
            "strides",
            "need a strictly decreasing stride ladder",
        ));
    }
    let (levels, _) = bd_levels(market, barriers, schedule, t, config, strides)?;
    let df = (-market.rate() * (schedule.end() - t)).exp();
    let n = config.n_paths;
    let dim = strides.len();
    let mut out = Vec::with_capacity(dim);
    for j in 0..dim {
        let (mean, se) = stat(&levels, dim, j, n);
        out.push(McEstimate {
            mean: df * mean,
            std_error: df * se,
            n_paths: n,
            bias_note: BiasNote::UpwardSurvivalBias,
        });
    }
    Ok(out)
}

/// Step-halving estimates of the raw coupon-count moments `E[A^nu]`,
/// `nu = 0..=nu_max`, with standard errors from the per-sample extrapolated
/// values.
pub fn estimate_coupon_moments_extrapolated(
    market: &MarketParams,
    barriers: &BarrierSpec,
    schedule: &BarrierSchedule,
    config: &McConfig,
    coarse_stride: usize,
    nu_max: u32,
) -> Result<Vec<McEstimate>> {
    config.validate()?;
    check_masked_schedule(schedule)?;
    if coarse_stride == 0 || !config.steps_per_window.is_multiple_of(coarse_stride) {
        return Err(Error::param(
            "coarse_stride",
            "stride must divide steps_per_window",
        ));
    }
    let w = richardson_weight(coarse_stride);
    let dim = nu_max as usize + 1;
    let windows = schedule.windows().to_vec();
    let spw = config.steps_per_window;
    let market_c = *market;
    let barriers_c = *barriers;
    let strides = vec![coarse_stride, 1];
    let flat = sample_vectors(config, dim, move |stream, out| {
        let mut masks = vec![0u64; 2];
        branch_masks(
            stream,
            &market_c,
            &barriers_c,
            &windows,
            0.0,
            spw,
            &strides,
            &mut masks,
        );
        let coarse = masks[0].count_ones() as f64;
        let fine = masks[1].count_ones() as f64;
        for (nu, o) in out.iter_mut().enumerate() {
            let yf = fine.powi(nu as i32);
            let yc = coarse.powi(nu as i32);
            *o = yf + (yf - yc) * w;
        }
    });
    let mut out = Vec::with_capacity(dim);
    for j in 0..dim {
        let (mean, se) = stat(&flat, dim, j, config.n_paths);
        out.push(McEstimate {
            mean,
            std_error: se,
            n_paths: config.n_paths,
            bias_note: BiasNote::None,
        });
    }
    Ok(out)
}

/// Direct Monte Carlo value of the discounted structure-floor payoff
/// `exp(-r T_n) (F - A)^+` on the raw grid, anchored at `t = 0`.
pub fn estimate_floor_payoff(
    market: &MarketParams,
    barriers: &BarrierSpec,
    schedule: &BarrierSchedule,
    floor: f64,
    config: &McConfig,
) -> Result<McEstimate> {
    floor_payoff_impl(market, barriers, schedule, floor, config, None)
}

/// Step-halving version of [`estimate_floor_payoff`].
pub fn estimate_floor_payoff_extrapolated(
    market: &MarketParams,
    barriers: &BarrierSpec,
    schedule: &BarrierSchedule,
    floor: f64,
    config: &McConfig,
    coarse_stride: usize,
) -> Result<McEstimate> {
    floor_payoff_impl(market, barriers, schedule, floor, config, Some(coarse_stride))
}

fn floor_payoff_impl(
    market: &MarketParams,
    barriers: &BarrierSpec,
    schedule: &BarrierSchedule,
    floor: f64,
    config: &McConfig,
    coarse_stride: Option<usize>,
) -> Result<McEstimate> {
    if !floor.is_finite() || floor <= 0.0 {
        return Err(Error::param("floor", "must be > 0"));
    }
    config.validate()?;
    check_masked_schedule(schedule)?;
    let strides: Vec<usize> = match coarse_stride {
        Some(c) => vec![c, 1],
        None => vec![1],
    };
    for &s in &strides {
        if s == 0 || !config.steps_per_window.is_multiple_of(s) {
            return Err(Error::param(
                "coarse_stride",
                format!("stride {s} must divide steps_per_window"),
            ));
        }
    }
    let w = coarse_stride.map(richardson_weight);
    let windows = schedule.windows().to_vec();
    let spw = config.steps_per_window;
    let market_c = *market;
    let barriers_c = *barriers;
    let n_strides = strides.len();
    let flat = sample_vectors(config, 1, move |stream, out| {
        let mut masks = vec![0u64; n_strides];
        branch_masks(
            stream,
            &market_c,
            &barriers_c,
            &windows,
            0.0,
            spw,
            &strides,
            &mut masks,
        );
        let payoff = |m: u64| (floor - m.count_ones() as f64).max(0.0);
        out[0] = match w {
            None => payoff(masks[0]),
            Some(w) => {
                let coarse = payoff(masks[0]);
                let fine = payoff(masks[1]);
                fine + (fine - coarse) * w
            }
        };
    });
    let df = (-market.rate() * schedule.end()).exp();
    let (mean, se) = stat(&flat, 1, 0, config.n_paths);
    Ok(McEstimate {
        mean: df * mean,
        std_error: df * se,
        n_paths: config.n_paths,
        bias_note: if coarse_stride.is_some() {
            BiasNote::None
        } else {
            BiasNote::UpwardSurvivalBias
        },
    })
}

/// Occupation time (years inside the corridor) of one branch on a uniform
/// grid of `cells` over `[0, horizon]`; a cell counts iff both endpoints lie
/// strictly inside.
pub(crate) fn branch_occupation(
    stream: &mut PathStream,
    market: &MarketParams,
    barriers: &BarrierSpec,
    horizon: f64,
    cells: usize,
) -> f64 {
    let lo = barriers.low().ln();
    let hi = barriers.up().ln();
    let mu = market.log_drift();
    let vol = market.vol();
    let dt = horizon / cells as f64;
    let sdt = vol * dt.sqrt();
    let mudt = mu * dt;
    let mut x = market.spot().ln();
    let mut inside_prev = lo < x && x < hi;
    let mut count = 0usize;
    for _ in 0..cells {
        x += mudt + sdt * stream.normal();
        let inside = lo < x && x < hi;
        if inside && inside_prev {
            count += 1;
        }
        inside_prev = inside;
    }
    count as f64 * dt
}

/// Estimates the discounted occupation-time put
/// `exp(-r T) E[(strike - Int_0^T 1_corridor dt)^+]`.
///
/// For this estimator `steps_per_window` is the total number of grid cells
/// over the horizon (there is no window structure).
pub fn estimate_occupation_put(
    market: &MarketParams,
    barriers: &BarrierSpec,
    horizon: f64,
    strike: f64,
    config: &McConfig,
) -> Result<McEstimate> {
    if !horizon.is_finite() || horizon <= 0.0 {
        return Err(Error::param("horizon", "must be > 0"));
    }
    if !strike.is_finite() || strike < 0.0 {
        return Err(Error::param("strike", "must be >= 0"));
    }
    config.validate()?;
    let cells = config.steps_per_window;
    let market_c = *market;
    let barriers_c = *barriers;
    let flat = sample_vectors(config, 1, move |stream, out| {
        let occ = branch_occupation(stream, &market_c, &barriers_c, horizon, cells);
        out[0] = (strike - occ).max(0.0);
    });
    let df = (-market.rate() * horizon).exp();
    let (mean, se) = stat(&flat, 1, 0, config.n_paths);
    Ok(McEstimate {
        mean: df * mean,
        std_error: df * se,
        n_paths: config.n_paths,
        bias_note: BiasNote::UpwardSurvivalBias,
    })
}
