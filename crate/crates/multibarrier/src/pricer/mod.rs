//! Spectral pricer for multi-window double-barrier digitals.
//!
//! In heat coordinates the value function is propagated forward in
//! transformed time starting from the payoff: inside a barrier window the
//! solution is a sine series on `(0, L)` whose modes decay by
//! `exp(-(k pi / L)^2 p)` (separation of variables); across a free period the
//! compactly supported state is convolved with the Gaussian heat kernel and
//! re-projected onto the sine basis. Iterating window/gap operators realizes
//! the nested-integral pricing formula at cost `O(n K^2 nodes)` instead of an
//! exponential-dimensional quadrature; [`nested`] keeps the literal
//! two-window evaluation as a cross-check oracle.
//!
//! Mode truncation follows the decay through the shortest window: modes whose
//! damping factor falls below `1e-14` of the leading mode are dropped, capped
//! at the caller's `k_max`. Wide corridors (large `L`) decay slowly and need
//! a larger `k_max`; the `truncation_bound` diagnostic reports the estimated
//! dropped tail so callers can tell.

pub mod nested;

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use once_cell::sync::Lazy;

use crate::constants::{MIN_TRANSFORMED_GAP, TRUNCATION_RELATIVE_FLOOR};
use crate::error::{Error, Result};
use crate::model::{
    to_heat_coords, BarrierSchedule, BarrierSpec, HeatCoords, MarketParams, Region, TauWindow,
    Valuation, Window,
};
use crate::quad::GaussLegendre;

/// Gaussian kernel support cutoff: `exp(-y^2/2)` at 12 is ~5e-32, far below
/// every tolerance in this crate, and the cutoff keeps the quadrature nodes
/// where the kernel actually lives when the diffusion span is short.
pub(crate) const Y_CUT: f64 = 12.0;

/// Largest exponent allowed in `exp(-alpha L)` and the outer prefactor.
const EXP_GUARD: f64 = 700.0;

/// Truncated sine-series representation of the heat solution on `(0, L)` at
/// one transformed time; implicitly zero outside the corridor.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierState {
    big_l: f64,
    coeffs: Vec<f64>,
    tau_label: f64,
}

impl FourierState {
    pub fn new(big_l: f64, coeffs: Vec<f64>, tau_label: f64) -> Result<Self> {
        if !big_l.is_finite() || big_l <= 0.0 {
            return Err(Error::param("big_l", format!("must be > 0, got {big_l}")));
        }
        if coeffs.is_empty() {
            return Err(Error::param("coeffs", "need at least one mode"));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::param("coeffs", "coefficients must be finite"));
        }
        Ok(FourierState {
            big_l,
            coeffs,
            tau_label,
        })
    }

    pub fn big_l(&self) -> f64 {
        self.big_l
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn tau_label(&self) -> f64 {
        self.tau_label
    }

    /// Series value `sum_k b_k sin(k pi x / L)` at `x` (no decay applied).
    pub fn eval(&self, x: f64) -> f64 {
        if x <= 0.0 || x >= self.big_l {
            return 0.0;
        }
        let theta = std::f64::consts::PI * x / self.big_l;
        let mut sines = vec![0.0; self.coeffs.len()];
        sin_ladder(theta, &mut sines);
        self.coeffs.iter().zip(&sines).map(|(b, s)| b * s).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PriceStatus {
    Priced,
    KnockedOut,
}

/// A price plus numerical diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceResult {
    /// Present value in units of currency (the digital pays 1).
    pub price: f64,
    /// Estimated magnitude of the dropped sine-series tail.
    pub truncation_bound: f64,
    /// Estimated quadrature error (difference against a half-node run).
    pub quadrature_error: f64,
    pub status: PriceStatus,
}

impl PriceResult {
    pub(crate) fn knocked_out() -> Self {
        PriceResult {
            price: 0.0,
            truncation_bound: 0.0,
            quadrature_error: 0.0,
            status: PriceStatus::KnockedOut,
        }
    }
}

/// Fills `out[k-1] = sin(k theta)` for `k = 1..=out.len()` via the
/// three-term recurrence.
#[inline]
pub(crate) fn sin_ladder(theta: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    let (s1, c1) = theta.sin_cos();
    out[0] = s1;
    if out.len() == 1 {
        return;
    }
    // sin(k theta) = 2 cos(theta) sin((k-1) theta) - sin((k-2) theta)
    let two_c = 2.0 * c1;
    out[1] = two_c * s1;
    for k in 2..out.len() {
        out[k] = two_c * out[k - 1] - out[k - 2];
    }
}

/// Sine-series coefficients of the digital payoff `e^{-alpha x}` on `(0, L)`:
/// `b_k = 2 k pi (1 - (-1)^k e^{-alpha L}) / (alpha^2 L^2 + k^2 pi^2)`.
pub fn payoff_fourier_coeffs(alpha: f64, big_l: f64, k_max: usize) -> Result<FourierState> {
    if !big_l.is_finite() || big_l <= 0.0 {
        return Err(Error::param("big_l", format!("must be > 0, got {big_l}")));
    }
    if k_max < 1 {
        return Err(Error::param("k_max", "must be >= 1"));
    }
    if !alpha.is_finite() {
        return Err(Error::param("alpha", "must be finite"));
    }
    if -alpha * big_l > EXP_GUARD {
        return Err(Error::NumericalFailure(format!(
            "exp(-alpha L) overflows for alpha = {alpha}, L = {big_l}"
        )));
    }
    let e_al = (-alpha * big_l).exp();
    let a2l2 = alpha * alpha * big_l * big_l;
    let pi = std::f64::consts::PI;
    let coeffs = (1..=k_max)
        .map(|k| {
            let kf = k as f64;
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            2.0 * kf * pi * (1.0 - sign * e_al) / (a2l2 + kf * kf * pi * pi)
        })
        .collect();
    FourierState::new(big_l, coeffs, 0.0)
}

/// Advances the state through a barrier window of transformed length `p`:
/// mode `k` is damped by `exp(-(k pi / L)^2 p)`.
pub fn decay_through_barrier(state: &FourierState, p: f64) -> Result<FourierState> {
    if !p.is_finite() || p < 0.0 {
        return Err(Error::param("p", format!("must be >= 0, got {p}")));
    }
    let base = std::f64::consts::PI / state.big_l;
    let coeffs = state
        .coeffs
        .iter()
        .enumerate()
        .map(|(i, &b)| {
            let k = (i + 1) as f64;
            b * (-(k * base) * (k * base) * p).exp()
        })
        .collect();
    FourierState::new(state.big_l, coeffs, state.tau_label + p)
}

fn y_limits(x: f64, s: f64, big_l: f64) -> (f64, f64) {
    let lo = (-x / s).max(-Y_CUT);
    let hi = ((big_l - x) / s).min(Y_CUT);
    (lo, hi)
}

/// Node count able to resolve integrands carrying up to `k` sine modes over
/// the projection interval (just above one node per half-oscillation).
/// Gauss-Legendre below this floor aliases the high modes, so the caller's
/// request is a lower bound only.
fn resolved_nodes(quad_nodes: usize, k: usize) -> usize {
    quad_nodes.max(k + k / 8 + 16)
}

/// Value at `x` of the state propagated freely for transformed time `d`:
/// the heat-kernel convolution of the zero-extended series,
/// `(2 pi)^{-1/2} Int U(x + y sqrt(2d)) e^{-y^2/2} dy` over the support.
pub(crate) fn eval_state_in_gap(
    state: &FourierState,
    x: f64,
    d: f64,
    quad_nodes: usize,
) -> Result<f64> {
    if d < MIN_TRANSFORMED_GAP {
        return Ok(state.eval(x));
    }
    let s = (2.0 * d).sqrt();
    let (lo, hi) = y_limits(x, s, state.big_l);
    if lo >= hi {
        return Ok(0.0);
    }
    // the integrand oscillates with up to k s (hi - lo) / L half-periods
    let half_periods =
        (state.coeffs.len() as f64 * s * (hi - lo) / state.big_l).ceil() as usize;
    let rule = GaussLegendre::with_nodes(resolved_nodes(quad_nodes, half_periods))?;
    let mut ys = Vec::new();
    let mut ws = Vec::new();
    rule.map_to(lo, hi, &mut ys, &mut ws);
    let pi = std::f64::consts::PI;
    let mut sines = vec![0.0; state.coeffs.len()];
    let mut acc = 0.0;
    for (&y, &w) in ys.iter().zip(&ws) {
        let u = x + y * s;
        sin_ladder(pi * u / state.big_l, &mut sines);
        let series: f64 = state.coeffs.iter().zip(&sines).map(|(b, sv)| b * sv).sum();
        acc += w * (-0.5 * y * y).exp() * series;
    }
    Ok(acc / (2.0 * pi).sqrt())
}

/// Series value decayed by `dtau` inside a window, evaluated at `x`.
fn eval_state_in_window(state: &FourierState, x: f64, dtau: f64) -> f64 {
    if x <= 0.0 || x >= state.big_l {
        return 0.0;
    }
    let base = std::f64::consts::PI / state.big_l;
    let theta = base * x;
    let mut sines = vec![0.0; state.coeffs.len()];
    sin_ladder(theta, &mut sines);
    state
        .coeffs
        .iter()
        .zip(&sines)
        .enumerate()
        .map(|(i, (b, s))| {
            let k = (i + 1) as f64;
            b * s * (-(k * base) * (k * base) * dtau).exp()
        })
        .sum()
}

type GapKey = (u64, u64, usize, usize);

static GAP_CACHE: Lazy<RwLock<HashMap<GapKey, Arc<Vec<f64>>>>> =
    Lazy::new(|| RwLock::new(HashMap::new()));

const GAP_CACHE_LIMIT: usize = 1024;

/// Row-major `k x k` matrix taking sine coefficients at the start of a free
/// period of transformed length `d` to the coefficients of the propagated
/// function re-projected on `(0, L)`. Cached process-wide; entries are
/// deterministic functions of the key.
fn gap_matrix(big_l: f64, d: f64, k: usize, quad_nodes: usize) -> Result<Arc<Vec<f64>>> {
    let quad_nodes = resolved_nodes(quad_nodes, k);
    let key: GapKey = (big_l.to_bits(), d.to_bits(), k, quad_nodes);
    if let Some(m) = GAP_CACHE.read().expect("gap cache poisoned").get(&key) {
        return Ok(Arc::clone(m));
    }
    let rule = GaussLegendre::with_nodes(quad_nodes)?;
    let pi = std::f64::consts::PI;
    let s = (2.0 * d).sqrt();
    let mut xs = Vec::new();
    let mut wxs = Vec::new();
    rule.map_to(0.0, big_l, &mut xs, &mut wxs);
    let nx = xs.len();

    // propagated value of each source mode at the projection nodes
    let mut prop = vec![0.0; k * nx]; // prop[mode * nx + ix]
    let mut ys = Vec::new();
    let mut wys = Vec::new();
    let mut sines = vec![0.0; k];
    for (ix, &x) in xs.iter().enumerate() {
        let (lo, hi) = y_limits(x, s, big_l);
        if lo >= hi {
            continue;
        }
        rule.map_to(lo, hi, &mut ys, &mut wys);
        for (&y, &wy) in ys.iter().zip(&wys) {
            let u = x + y * s;
            sin_ladder(pi * u / big_l, &mut sines);
            let g = wy * (-0.5 * y * y).exp();
            for (mode, &sv) in sines.iter().enumerate() {
                prop[mode * nx + ix] += g * sv;
            }
        }
    }
    let inv_sqrt2pi = 1.0 / (2.0 * pi).sqrt();

    let mut m = vec![0.0; k * k]; // m[target * k + source]
    for (ix, &x) in xs.iter().enumerate() {
        sin_ladder(pi * x / big_l, &mut sines);
        let wx = wxs[ix] * 2.0 / big_l;
        for target in 0..k {
            let c = wx * sines[target] * inv_sqrt2pi;
            let row = &mut m[target * k..(target + 1) * k];
            for (source, entry) in row.iter_mut().enumerate() {
                *entry += c * prop[source * nx + ix];
            }
        }
    }
    let m = Arc::new(m);
    let mut cache = GAP_CACHE.write().expect("gap cache poisoned");
    if cache.len() >= GAP_CACHE_LIMIT {
        cache.clear();
    }
    Ok(Arc::clone(cache.entry(key).or_insert(m)))
}

/// Propagates the state through a free period of transformed length `d` and
/// re-projects onto the sine basis of `(0, L)`.
///
/// Both the mode convolutions and the re-projection integrals use
/// Gauss-Legendre quadrature with `quad_nodes` points; the kernel integrals
/// run over the exact finite support of the zero-extended state.
pub fn diffuse_and_reproject(
    state: &FourierState,
    d: f64,
    quad_nodes: usize,
) -> Result<FourierState> {
    if !d.is_finite() || d <= 0.0 {
        return Err(Error::param("d", format!("must be > 0, got {d}")));
    }
    if quad_nodes < 8 {
        return Err(Error::param("quad_nodes", "must be >= 8"));
    }
    let k = state.coeffs.len();
    let m = gap_matrix(state.big_l, d, k, quad_nodes)?;
    let mut coeffs = vec![0.0; k];
    for (target, out) in coeffs.iter_mut().enumerate() {
        let row = &m[target * k..(target + 1) * k];
        *out = row.iter().zip(&state.coeffs).map(|(a, b)| a * b).sum();
    }
    FourierState::new(state.big_l, coeffs, state.tau_label + d)
}

/// Adaptive mode count: keep mode `k` while its damping through the shortest
/// window stays above [`TRUNCATION_RELATIVE_FLOOR`] relative to mode 1.
pub(crate) fn effective_modes(k_max: usize, big_l: f64, p_min: f64) -> usize {
    let base = (std::f64::consts::PI / big_l) * (std::f64::consts::PI / big_l) * p_min;
    if base <= 0.0 {
        return k_max.max(1);
    }
    let k2 = 1.0 + (-TRUNCATION_RELATIVE_FLOOR.ln()) / base;
    let k = k2.sqrt().ceil() as usize;
    k.clamp(1, k_max.max(1))
}

/// Mode count for a full pricing run: the shortest window governs, except
/// that an in-window valuation must also resolve its own (possibly much
/// shorter) remaining decay `dtau`.
fn modes_for_region(k_max: usize, coords: &HeatCoords) -> usize {
    let p_min = coords
        .tau_images
        .iter()
        .map(|w| w.p)
        .fold(f64::INFINITY, f64::min);
    let governing = match coords.region {
        Region::InsideWindow(i) => {
            let dtau = (coords.tau - coords.tau_images[i].tau_start).max(f64::MIN_POSITIVE);
            p_min.min(dtau)
        }
        _ => p_min,
    };
    effective_modes(k_max, coords.big_l, governing)
}

/// Conservative estimate of the dropped series tail, using the coefficient
/// bound `|b_k| <= 2 B / (k pi)` and the total spectral damping accumulated
/// along the propagation.
pub(crate) fn truncation_tail(
    alpha: f64,
    big_l: f64,
    k_used: usize,
    damp_time: f64,
    outer_factor: f64,
) -> f64 {
    let e_al = (-alpha * big_l).exp();
    let b = 1.0 + e_al;
    let pi = std::f64::consts::PI;
    let base = (pi / big_l) * (pi / big_l);
    let mut tail = 0.0;
    for k in (k_used + 1)..(k_used + 4000) {
        let kf = k as f64;
        let term = 2.0 * b / (kf * pi) * (-base * kf * kf * damp_time).exp();
        tail += term;
        if term < 1e-300 || term < 1e-18 * tail {
            break;
        }
    }
    2.0 * outer_factor * tail
}

struct Propagated {
    value: f64,
    damp_time: f64,
}

/// Transformed time below which a `k`-mode series cannot resolve the decay:
/// at this threshold mode `k` still carries `exp(-16)` of its weight.
fn dtau_resolution(big_l: f64, k: usize) -> f64 {
    let rate = (k as f64 * std::f64::consts::PI / big_l).powi(2);
    16.0 / rate
}

/// Runs the window/gap propagation on normalized transformed geometry and
/// evaluates at the valuation point.
///
/// In-window valuations very close to the window's end (transformed `dtau`
/// too small for the mode budget to resolve) bypass the lossy re-projection
/// of the preceding gap and evaluate the free heat propagation directly;
/// the neglected wall effect is `O(exp(-dist^2 / 4 dtau))` at an interior
/// point, far below the series resolution there.
fn propagate_and_eval(
    coords: &HeatCoords,
    k: usize,
    quad_nodes: usize,
    n_windows: usize,
) -> Result<Propagated> {
    let images: Vec<TauWindow> = coords.images_by_tau().copied().collect();
    // images[j] is contract window (n_windows - 1 - j): increasing tau_start
    let mut state = payoff_fourier_coeffs(coords.alpha, coords.big_l, k)?;
    let mut damp_time = 0.0;

    if let Region::InsideWindow(i) = coords.region {
        let j_target = n_windows - 1 - i;
        let dtau = (coords.tau - images[j_target].tau_start).max(0.0);
        let near_edge = dtau < dtau_resolution(coords.big_l, k);
        if j_target == 0 {
            // evaluating within the last window: the left-edge data is the
            // payoff itself, known in closed form
            let value = if near_edge {
                (-coords.alpha * coords.x).exp()
            } else {
                eval_state_in_window(&state, coords.x, dtau)
            };
            return Ok(Propagated {
                value,
                damp_time: dtau,
            });
        }
        for j in 0..j_target {
            state = decay_through_barrier(&state, images[j].p)?;
            damp_time += images[j].p;
            if j + 1 < j_target {
                let gap = images[j + 1].tau_start - images[j].tau_end();
                if gap >= MIN_TRANSFORMED_GAP {
                    state = diffuse_and_reproject(&state, gap, quad_nodes)?;
                    damp_time += gap;
                }
            }
        }
        let gap = images[j_target].tau_start - images[j_target - 1].tau_end();
        let value = if near_edge && gap >= MIN_TRANSFORMED_GAP {
            damp_time += gap + dtau;
            eval_state_in_gap(&state, coords.x, gap + dtau, quad_nodes)?
        } else {
            if gap >= MIN_TRANSFORMED_GAP {
                state = diffuse_and_reproject(&state, gap, quad_nodes)?;
                damp_time += gap;
            }
            damp_time += dtau;
            eval_state_in_window(&state, coords.x, dtau)
        };
        return Ok(Propagated { value, damp_time });
    }

    // gap-region valuation: traverse all future windows fully, then one
    // pointwise kernel evaluation
    let traverse_upto = match coords.region {
        Region::InGapAfter(i) => n_windows - 2 - i,
        Region::BeforeFirstWindow => n_windows - 1,
        Region::InsideWindow(_) => unreachable!(),
    };
    for j in 0..traverse_upto {
        state = decay_through_barrier(&state, images[j].p)?;
        damp_time += images[j].p;
        let gap = images[j + 1].tau_start - images[j].tau_end();
        if gap >= MIN_TRANSFORMED_GAP {
            state = diffuse_and_reproject(&state, gap, quad_nodes)?;
            damp_time += gap;
        }
    }
    let d = coords.tau - images[traverse_upto].tau_end();
    state = decay_through_barrier(&state, images[traverse_upto].p)?;
    damp_time += images[traverse_upto].p + d.max(0.0);
    let value = eval_state_in_gap(&state, coords.x, d, quad_nodes)?;
    Ok(Propagated { value, damp_time })
}

fn check_exponents(coords: &HeatCoords) -> Result<f64> {
    let exponent = coords.alpha * coords.x + coords.beta * coords.tau;
    if (-coords.alpha * coords.big_l) > EXP_GUARD || exponent.abs() > EXP_GUARD {
        return Err(Error::NumericalFailure(
            "transformed prefactor overflows; barriers are too wide for this rate/vol".into(),
        ));
    }
    Ok(exponent.exp())
}

/// Prices the multi-window double-barrier digital by operator propagation.
///
/// Adjacent windows are concatenated first. The valuation instant may lie
/// before the first window, in a gap, or inside a window (with the spot
/// strictly inside the corridor; otherwise the result is knocked out with
/// price 0).
pub fn price_multi_period(
    market: &MarketParams,
    barriers: &BarrierSpec,
    schedule: &BarrierSchedule,
    t: f64,
    spot_at_t: f64,
    k_max: usize,
    quad_nodes: usize,
) -> Result<PriceResult> {
    if k_max < 1 {
        return Err(Error::param("k_max", "must be >= 1"));
    }
    if quad_nodes < 8 {
        return Err(Error::param("quad_nodes", "must be >= 8"));
    }
    let normalized = schedule.concatenated();
    let coords = match to_heat_coords(market, barriers, &normalized, t, spot_at_t)? {
        Valuation::KnockedOut => return Ok(PriceResult::knocked_out()),
        Valuation::Live(c) => c,
    };
    let prefactor = check_exponents(&coords)?;
    let k = modes_for_region(k_max, &coords);

    let full = propagate_and_eval(&coords, k, quad_nodes, normalized.len())?;
    let half = propagate_and_eval(&coords, k, (quad_nodes / 2).max(8), normalized.len())?;

    let price = (prefactor * full.value).max(0.0);
    let truncation_bound = truncation_tail(coords.alpha, coords.big_l, k, full.damp_time, prefactor);
    let quadrature_error = (prefactor * (full.value - half.value)).abs();
    Ok(PriceResult {
        price,
        truncation_bound,
        quadrature_error,
        status: PriceStatus::Priced,
    })
}

/// Single-pass multi-window price without diagnostics; used by bulk callers
/// (moment assembly) that price thousands of schedules.
pub(crate) fn multi_price_value(
    market: &MarketParams,
    barriers: &BarrierSpec,
    schedule: &BarrierSchedule,
    t: f64,
    spot_at_t: f64,
    k_max: usize,
    quad_nodes: usize,
) -> Result<f64> {
    let normalized = schedule.concatenated();
    let coords = match to_heat_coords(market, barriers, &normalized, t, spot_at_t)? {
        Valuation::KnockedOut => return Ok(0.0),
        Valuation::Live(c) => c,
    };
    let prefactor = check_exponents(&coords)?;
    let k = modes_for_region(k_max, &coords);
    let run = propagate_and_eval(&coords, k, quad_nodes, normalized.len())?;
    Ok((prefactor * run.value).max(0.0))
}

/// One-window price for a valuation strictly before the window, evaluated
/// through the closed-form series: prefactor `sqrt(2 pi) (S/B_low)^alpha`
/// times Gaussian-weighted sine integrals of the decayed payoff modes.
///
/// The kernel integral uses the default Gauss-Legendre rule
/// ([`crate::constants::DEFAULT_QUAD_NODES`]); this routine exists as a
/// directly-transcribed counterpart of the one-period formula and must agree
/// with [`price_multi_period`] on single-window schedules.
pub fn price_one_period(
    market: &MarketParams,
    barriers: &BarrierSpec,
    t0: f64,
    p_len: f64,
    t: f64,
    spot_at_t: f64,
    k_max: usize,
) -> Result<PriceResult> {
    if !p_len.is_finite() || p_len <= 0.0 {
        return Err(Error::param("p_len", format!("must be > 0, got {p_len}")));
    }
    if !t.is_finite() || t < 0.0 || t >= t0 {
        return Err(Error::param(
            "t",
            format!("one-period pricing needs 0 <= t < t0, got t = {t}, t0 = {t0}"),
        ));
    }
    if !spot_at_t.is_finite() || spot_at_t <= 0.0 {
        return Err(Error::param("spot_at_t", "must be > 0"));
    }
    let quad_nodes = crate::constants::DEFAULT_QUAD_NODES;
    let (alpha, beta) = crate::model::alpha_beta(market.rate(), market.vol())?;
    let big_l = barriers.log_width();
    let x = (spot_at_t / barriers.low()).ln();
    let half_s2 = 0.5 * market.vol() * market.vol();
    let tau = half_s2 * (t0 + p_len - t);
    let p = half_s2 * p_len;
    let d = tau - p;

    if -alpha * big_l > EXP_GUARD || (alpha * x + beta * tau).abs() > EXP_GUARD {
        return Err(Error::NumericalFailure(
            "transformed prefactor overflows; barriers are too wide for this rate/vol".into(),
        ));
    }
    let k = effective_modes(k_max, big_l, p);
    let pi = std::f64::consts::PI;
    let e_al = (-alpha * big_l).exp();
    let a2l2 = alpha * alpha * big_l * big_l;
    let s = (2.0 * d).sqrt();
    let (lo, hi) = y_limits(x, s, big_l);

    let mut series = 0.0;
    if lo < hi && d >= MIN_TRANSFORMED_GAP {
        let half_periods = (k as f64 * s * (hi - lo) / big_l).ceil() as usize;
        let rule = GaussLegendre::with_nodes(resolved_nodes(quad_nodes, half_periods))?;
        let mut ys = Vec::new();
        let mut ws = Vec::new();
        rule.map_to(lo, hi, &mut ys, &mut ws);
        let mut sines = vec![0.0; k];
        let mut mode_integrals = vec![0.0; k];
        for (&y, &w) in ys.iter().zip(&ws) {
            let u = x + y * s;
            sin_ladder(pi * u / big_l, &mut sines);
            let g = w * (-0.5 * y * y).exp();
            for (m, &sv) in sines.iter().enumerate() {
                mode_integrals[m] += g * sv;
            }
        }
        for (m, integral) in mode_integrals.iter().enumerate() {
            let kf = (m + 1) as f64;
            let sign = if (m + 1) % 2 == 0 { 1.0 } else { -1.0 };
            let coeff = kf * (1.0 - sign * e_al) / (a2l2 + kf * kf * pi * pi);
            series += coeff * (-(kf * pi / big_l) * (kf * pi / big_l) * p).exp() * integral;
        }
    }
    let price = ((2.0 * pi).sqrt() * (alpha * x).exp() * (beta * tau).exp() * series).max(0.0);

    let prefactor = (alpha * x + beta * tau).exp();
    let truncation_bound = truncation_tail(alpha, big_l, k, p + d, prefactor);
    // one-node-halving estimate, mirroring price_multi_period
    let half = {
        let mut st = payoff_fourier_coeffs(alpha, big_l, k)?;
        st = decay_through_barrier(&st, p)?;
        prefactor * eval_state_in_gap(&st, x, d, (quad_nodes / 2).max(8))?
    };
    Ok(PriceResult {
        price,
        truncation_bound,
        quadrature_error: (price - half.max(0.0)).abs(),
        status: PriceStatus::Priced,
    })
}

/// Convenience used by verification code: price one window given as a
/// [`Window`].
pub fn price_one_window(
    market: &MarketParams,
    barriers: &BarrierSpec,
    window: Window,
    t: f64,
    spot_at_t: f64,
    k_max: usize,
) -> Result<PriceResult> {
    price_one_period(
        market,
        barriers,
        window.start(),
        window.length(),
        t,
        spot_at_t,
        k_max,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{BarrierSchedule, BarrierSpec, MarketParams, Window};
    use approx::assert_abs_diff_eq;

    fn sched(ws: &[(f64, f64)]) -> BarrierSchedule {
        BarrierSchedule::new(
            ws.iter()
                .map(|&(s, l)| Window::new(s, l).unwrap())
                .collect(),
        )
        .unwrap()
    }

    fn std_market() -> MarketParams {
        MarketParams::new(100.0, 0.03, 0.25).unwrap()
    }

    fn std_barriers() -> BarrierSpec {
        BarrierSpec::new(80.0, 125.0).unwrap()
    }

    #[test]
    fn sin_ladder_matches_direct() {
        let mut out = vec![0.0; 40];
        for &theta in &[0.1, 1.0, 2.7, 3.1] {
            sin_ladder(theta, &mut out);
            for (i, &s) in out.iter().enumerate() {
                assert_abs_diff_eq!(s, ((i + 1) as f64 * theta).sin(), epsilon = 1e-11);
            }
        }
    }

    #[test]
    fn payoff_coeffs_alpha_zero() {
        let st = payoff_fourier_coeffs(0.0, std::f64::consts::PI, 4).unwrap();
        assert_abs_diff_eq!(st.coeffs()[0], 4.0 / std::f64::consts::PI, epsilon = 1e-14);
        assert_abs_diff_eq!(st.coeffs()[1], 0.0, epsilon = 1e-14);
    }

    #[test]
    fn payoff_coeffs_match_quadrature_oracle() {
        // b_k must equal (2/L) Int_0^L e^{-alpha x} sin(k pi x / L) dx
        let rule = GaussLegendre::with_nodes(200).unwrap();
        for &(alpha, big_l) in &[(0.0, 1.0), (0.5, 0.4), (-0.8, 2.0), (0.02, 0.44628710262841953)]
        {
            let st = payoff_fourier_coeffs(alpha, big_l, 16).unwrap();
            for (i, &b) in st.coeffs().iter().enumerate() {
                let k = (i + 1) as f64;
                let oracle = (2.0 / big_l)
                    * rule.integrate(0.0, big_l, |x| {
                        (-alpha * x).exp() * (k * std::f64::consts::PI * x / big_l).sin()
                    });
                assert_abs_diff_eq!(b, oracle, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn decay_identity_and_single_mode() {
        let st = payoff_fourier_coeffs(0.3, 1.0, 8).unwrap();
        let same = decay_through_barrier(&st, 0.0).unwrap();
        assert_eq!(st.coeffs(), same.coeffs());

        let single =
            FourierState::new(std::f64::consts::PI, vec![1.0, 0.0, 0.0], 0.0).unwrap();
        let dec = decay_through_barrier(&single, 1.0).unwrap();
        assert_abs_diff_eq!(dec.coeffs()[0], (-1.0f64).exp(), epsilon = 1e-15);
        assert_eq!(dec.coeffs()[1], 0.0);
        assert_abs_diff_eq!(dec.tau_label(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn decay_long_period_bound() {
        let st = payoff_fourier_coeffs(0.0, 1.0, 8).unwrap();
        let big_p = 10.0 * (st.big_l() / std::f64::consts::PI).powi(2);
        let dec = decay_through_barrier(&st, big_p).unwrap();
        for (b0, b1) in st.coeffs().iter().zip(dec.coeffs()) {
            assert!(b1.abs() <= b0.abs() * (-10.0f64).exp() + 1e-300);
        }
        assert!(decay_through_barrier(&st, -0.1).is_err());
    }

    #[test]
    fn diffuse_small_d_is_identity() {
        let st = payoff_fourier_coeffs(0.2, 0.5, 12).unwrap();
        let out = diffuse_and_reproject(&st, 1e-10, 128).unwrap();
        for (a, b) in st.coeffs().iter().zip(out.coeffs()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-6);
        }
        assert!(diffuse_and_reproject(&st, 0.0, 128).is_err());
        assert!(diffuse_and_reproject(&st, -1.0, 128).is_err());
    }

    #[test]
    fn diffuse_zero_state_stays_zero() {
        let st = FourierState::new(1.0, vec![0.0; 6], 0.0).unwrap();
        let out = diffuse_and_reproject(&st, 0.05, 64).unwrap();
        assert!(out.coeffs().iter().all(|&c| c == 0.0));
    }

    #[test]
    fn diffuse_matches_tensor_quadrature_oracle() {
        // Single-mode input: output coefficients must match the direct 2-D
        // quadrature of the convolution composed with the projection.
        let big_l = std::f64::consts::PI;
        let d = 0.1;
        let st = FourierState::new(big_l, vec![1.0, 0.0, 0.0, 0.0], 0.0).unwrap();
        let out = diffuse_and_reproject(&st, d, 128).unwrap();

        let rule = GaussLegendre::with_nodes(160).unwrap();
        let s = (2.0 * d).sqrt();
        for target in 1..=4usize {
            let oracle = (2.0 / big_l)
                * rule.integrate(0.0, big_l, |xn| {
                    let inner = rule.integrate(-xn / s, (big_l - xn) / s, |y| {
                        ((xn + y * s) * 1.0).sin() * (-0.5 * y * y).exp()
                    });
                    (target as f64 * xn).sin() * inner / (2.0 * std::f64::consts::PI).sqrt()
                });
            assert_abs_diff_eq!(out.coeffs()[target - 1], oracle, epsilon = 1e-8);
        }
    }

    #[test]
    fn one_period_wide_barriers_is_discount_bond() {
        let market = MarketParams::new(100.0, 0.05, 0.2).unwrap();
        let barriers = BarrierSpec::new(100.0 * 1e-6, 100.0 * 1e6).unwrap();
        let res = price_one_period(&market, &barriers, 0.5, 0.5, 0.0, 100.0, 2048).unwrap();
        let bond = (-0.05f64).exp();
        assert!(
            (res.price - bond).abs() / bond < 1e-4,
            "price {} vs bond {}",
            res.price,
            bond
        );
    }

    #[test]
    fn one_period_vanishing_width_prices_to_zero() {
        let market = std_market();
        let barriers = BarrierSpec::new(100.0 * (1.0 - 5e-5), 100.0 * (1.0 + 5e-5)).unwrap();
        let res = price_one_period(&market, &barriers, 0.25, 0.25, 0.0, 100.0, 64).unwrap();
        assert!(res.price < 1e-6, "price {}", res.price);
    }

    #[test]
    fn one_period_frozen_value() {
        // spot 100, corridor [80, 125], r = 3%, sigma = 25%, window
        // [0.25, 0.5], valued at t = 0. The constant was produced by the
        // independent image-charges route (reflection.rs), which agrees with
        // this series to ~1e-14; it pins the formula against regressions.
        let res = price_one_period(&std_market(), &std_barriers(), 0.25, 0.25, 0.0, 100.0, 64)
            .unwrap();
        assert_abs_diff_eq!(res.price, 0.5986847027802294, epsilon = 1e-9);
    }

    #[test]
    fn multi_reduces_to_one_period() {
        let market = std_market();
        let barriers = std_barriers();
        let one = price_one_period(&market, &barriers, 0.25, 0.25, 0.0, 100.0, 64).unwrap();
        let multi = price_multi_period(
            &market,
            &barriers,
            &sched(&[(0.25, 0.25)]),
            0.0,
            100.0,
            64,
            crate::constants::DEFAULT_QUAD_NODES,
        )
        .unwrap();
        assert_abs_diff_eq!(one.price, multi.price, epsilon = 1e-10);
    }

    #[test]
    fn adjacent_windows_price_like_concatenation() {
        let market = std_market();
        let barriers = std_barriers();
        let split = sched(&[(0.25, 0.125), (0.375, 0.125)]);
        let merged = sched(&[(0.25, 0.25)]);
        let a = price_multi_period(&market, &barriers, &split, 0.0, 100.0, 64, 128).unwrap();
        let b = price_multi_period(&market, &barriers, &merged, 0.0, 100.0, 64, 128).unwrap();
        assert_abs_diff_eq!(a.price, b.price, epsilon = 1e-10);
    }

    #[test]
    fn knocked_out_status() {
        let market = std_market();
        let barriers = std_barriers();
        let res =
            price_multi_period(&market, &barriers, &sched(&[(0.25, 0.5)]), 0.3, 79.0, 64, 128)
                .unwrap();
        assert_eq!(res.status, PriceStatus::KnockedOut);
        assert_eq!(res.price, 0.0);
    }

    #[test]
    fn price_bounded_by_discount_factor() {
        let market = std_market();
        let barriers = std_barriers();
        let schedule = sched(&[(0.25, 0.25), (0.75, 0.25)]);
        let res = price_multi_period(&market, &barriers, &schedule, 0.0, 100.0, 64, 128).unwrap();
        let df = (-market.rate() * schedule.end()).exp();
        assert!(res.price >= 0.0);
        assert!(res.price <= df + 1e-12);
    }

    #[test]
    fn valuation_inside_window_and_gap() {
        let market = std_market();
        let barriers = std_barriers();
        let schedule = sched(&[(0.25, 0.25), (0.75, 0.25)]);
        // inside the first window
        let inside =
            price_multi_period(&market, &barriers, &schedule, 0.3, 100.0, 64, 128).unwrap();
        assert!(inside.price > 0.0);
        // in the gap
        let gap = price_multi_period(&market, &barriers, &schedule, 0.6, 100.0, 64, 128).unwrap();
        assert!(gap.price > 0.0);
        // continuity across the window end: t = 0.5 - eps vs t = 0.5 + eps
        let a = price_multi_period(&market, &barriers, &schedule, 0.5 - 1e-7, 100.0, 64, 128)
            .unwrap();
        let b = price_multi_period(&market, &barriers, &schedule, 0.5 + 1e-7, 100.0, 64, 128)
            .unwrap();
        assert_abs_diff_eq!(a.price, b.price, epsilon = 1e-4);
    }

    #[test]
    fn past_windows_never_affect_the_live_value() {
        // valuation in a gap or inside a later window only sees the future
        // constraints: dropping already-elapsed windows cannot move the price
        let market = std_market();
        let barriers = std_barriers();
        let both = sched(&[(0.25, 0.25), (0.75, 0.25)]);
        let suffix = sched(&[(0.75, 0.25)]);
        for &t in &[0.55, 0.6, 0.74, 0.8, 0.9] {
            let a = price_multi_period(&market, &barriers, &both, t, 100.0, 64, 128)
                .unwrap()
                .price;
            let b = price_multi_period(&market, &barriers, &suffix, t, 100.0, 64, 128)
                .unwrap()
                .price;
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn truncation_bound_covers_k_doubling() {
        let market = std_market();
        let barriers = std_barriers();
        let schedule = sched(&[(0.25, 0.25), (0.75, 0.25)]);
        for k in [8usize, 16, 32] {
            let a = price_multi_period(&market, &barriers, &schedule, 0.0, 100.0, k, 128).unwrap();
            let b =
                price_multi_period(&market, &barriers, &schedule, 0.0, 100.0, 2 * k, 128).unwrap();
            assert!(
                (a.price - b.price).abs() <= a.truncation_bound.max(1e-12),
                "k={k}: |diff| {} > bound {}",
                (a.price - b.price).abs(),
                a.truncation_bound
            );
        }
    }

    #[test]
    fn very_long_window_prices_to_zero_not_error() {
        let market = std_market();
        let barriers = BarrierSpec::new(99.0, 101.0).unwrap();
        let res = price_multi_period(
            &market,
            &barriers,
            &sched(&[(0.5, 30.0)]),
            0.0,
            100.0,
            64,
            128,
        )
        .unwrap();
        assert_eq!(res.status, PriceStatus::Priced);
        assert!(res.price >= 0.0 && res.price < 1e-12);
    }
}
