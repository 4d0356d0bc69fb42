//! Market and contract data types plus the Black-Scholes to heat-equation
//! coordinate change shared by every pricer.
//!
//! The transformation writes the value function as `e^{alpha x + beta tau}
//! U(x, tau)` with `x = log(S / B_low)` and `tau = sigma^2 (T_end - t) / 2`,
//! turning the pricing PDE into the heat equation `U_xx = U_tau`. Barrier
//! windows become rectangles `[tau_i, tau_i + p_i] x (0, L)` with Dirichlet
//! boundaries; the stretches in between become free strips.

use crate::error::{Error, Result};

/// Relative tolerance for treating two window endpoints as the same instant.
const ADJACENCY_TOL: f64 = 1e-12;

/// Risk-neutral Black-Scholes parameters: `dS/S = r dt + sigma dW`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarketParams {
    spot: f64,
    rate: f64,
    vol: f64,
}

impl MarketParams {
    pub fn new(spot: f64, rate: f64, vol: f64) -> Result<Self> {
        if !spot.is_finite() || spot <= 0.0 {
            return Err(Error::param("spot", format!("must be > 0, got {spot}")));
        }
        if !rate.is_finite() || rate <= 0.0 {
            return Err(Error::param("rate", format!("must be > 0, got {rate}")));
        }
        if !vol.is_finite() || vol <= 0.0 {
            return Err(Error::param("vol", format!("must be > 0, got {vol}")));
        }
        Ok(MarketParams { spot, rate, vol })
    }

    pub fn spot(&self) -> f64 {
        self.spot
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn vol(&self) -> f64 {
        self.vol
    }

    /// Risk-neutral drift of `log S`.
    pub fn log_drift(&self) -> f64 {
        self.rate - 0.5 * self.vol * self.vol
    }
}

/// A lower/upper barrier pair, `0 < B_low < B_up`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarrierSpec {
    low: f64,
    up: f64,
}

impl BarrierSpec {
    pub fn new(low: f64, up: f64) -> Result<Self> {
        if !low.is_finite() || low <= 0.0 {
            return Err(Error::param("b_low", format!("must be > 0, got {low}")));
        }
        if !up.is_finite() || up <= low {
            return Err(Error::param(
                "b_up",
                format!("must exceed b_low = {low}, got {up}"),
            ));
        }
        Ok(BarrierSpec { low, up })
    }

    pub fn low(&self) -> f64 {
        self.low
    }

    pub fn up(&self) -> f64 {
        self.up
    }

    /// Log width `L = log(B_up / B_low)` of the corridor.
    pub fn log_width(&self) -> f64 {
        (self.up / self.low).ln()
    }

    /// Whether `s` lies strictly inside the corridor.
    pub fn strictly_inside(&self, s: f64) -> bool {
        self.low < s && s < self.up
    }
}

/// One barrier window `[start, start + length]` in contract time (years).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    start: f64,
    length: f64,
}

impl Window {
    pub fn new(start: f64, length: f64) -> Result<Self> {
        if !start.is_finite() || start < 0.0 {
            return Err(Error::param("start", format!("must be >= 0, got {start}")));
        }
        if !length.is_finite() || length <= 0.0 {
            return Err(Error::param("length", format!("must be > 0, got {length}")));
        }
        Ok(Window { start, length })
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn end(&self) -> f64 {
        self.start + self.length
    }

    /// Closed-interval membership; window boundaries count as inside.
    pub fn contains(&self, t: f64) -> bool {
        self.start <= t && t <= self.end()
    }
}

/// An ordered, non-overlapping list of barrier windows.
///
/// Adjacent windows (`end == next start`) are accepted on input; call
/// [`BarrierSchedule::concatenated`] to merge them. Pricers normalize
/// internally, so adjacency never reaches the transformed geometry.
#[derive(Debug, Clone, PartialEq)]
pub struct BarrierSchedule {
    windows: Vec<Window>,
}

fn same_instant(a: f64, b: f64) -> bool {
    (a - b).abs() <= ADJACENCY_TOL * a.abs().max(b.abs()).max(1.0)
}

impl BarrierSchedule {
    pub fn new(windows: Vec<Window>) -> Result<Self> {
        if windows.is_empty() {
            return Err(Error::InvalidSchedule("schedule has no windows".into()));
        }
        for pair in windows.windows(2) {
            let (prev, next) = (pair[0], pair[1]);
            if next.start() < prev.start() {
                return Err(Error::InvalidSchedule(format!(
                    "windows not sorted: start {} after start {}",
                    prev.start(),
                    next.start()
                )));
            }
            if next.start() < prev.end() && !same_instant(next.start(), prev.end()) {
                return Err(Error::InvalidSchedule(format!(
                    "window starting at {} overlaps previous window ending at {}",
                    next.start(),
                    prev.end()
                )));
            }
        }
        Ok(BarrierSchedule { windows })
    }

    /// Builds the schedule `[T_i, T_i + period]` for the given tenor dates.
    pub fn from_tenors(tenors: &[f64], period: f64) -> Result<Self> {
        let windows = tenors
            .iter()
            .map(|&t| Window::new(t, period))
            .collect::<Result<Vec<_>>>()?;
        Self::new(windows)
    }

    pub fn windows(&self) -> &[Window] {
        &self.windows
    }

    pub fn len(&self) -> usize {
        self.windows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.windows.is_empty()
    }

    pub fn first_start(&self) -> f64 {
        self.windows[0].start()
    }

    /// End of the last window; the digital pays at this time.
    pub fn end(&self) -> f64 {
        self.windows.last().unwrap().end()
    }

    /// Total time covered by the windows.
    pub fn covered_time(&self) -> f64 {
        self.windows.iter().map(Window::length).sum()
    }

    /// Merges every maximal run of adjacent windows into a single window.
    ///
    /// Idempotent; preserves the union of covered intervals. The result
    /// satisfies the strict-gap invariant: no two windows share an endpoint.
    pub fn concatenated(&self) -> BarrierSchedule {
        let mut merged: Vec<Window> = Vec::with_capacity(self.windows.len());
        for &w in &self.windows {
            match merged.last_mut() {
                Some(last) if same_instant(last.end(), w.start()) => {
                    *last = Window {
                        start: last.start(),
                        length: w.end() - last.start(),
                    };
                }
                _ => merged.push(w),
            }
        }
        BarrierSchedule { windows: merged }
    }

    /// The window containing `t` (closed intervals), if any.
    pub fn window_containing(&self, t: f64) -> Option<usize> {
        self.windows.iter().position(|w| w.contains(t))
    }
}

/// Drift and discount constants of the coordinate change,
/// `alpha = -(2r/sigma^2 - 1)/2` and `beta = -2r/sigma^2 - alpha^2`.
pub fn alpha_beta(rate: f64, vol: f64) -> Result<(f64, f64)> {
    if !rate.is_finite() || rate <= 0.0 {
        return Err(Error::param("rate", format!("must be > 0, got {rate}")));
    }
    if !vol.is_finite() || vol <= 0.0 {
        return Err(Error::param("vol", format!("must be > 0, got {vol}")));
    }
    let ratio = 2.0 * rate / (vol * vol);
    let alpha = -0.5 * (ratio - 1.0);
    let beta = -ratio - alpha * alpha;
    Ok((alpha, beta))
}

/// Image of one barrier window under the coordinate change: the window
/// occupies `[tau_start, tau_start + p]` in transformed time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TauWindow {
    pub tau_start: f64,
    pub p: f64,
}

impl TauWindow {
    pub fn tau_end(&self) -> f64 {
        self.tau_start + self.p
    }
}

/// Where the valuation instant sits relative to the windows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    /// Strictly before the first window (or at its boundary from outside).
    BeforeFirstWindow,
    /// Inside window `i` (0-based, contract order).
    InsideWindow(usize),
    /// In the open gap following window `i`.
    InGapAfter(usize),
}

/// Transformed coordinates of a valuation point plus the images of all
/// barrier windows.
#[derive(Debug, Clone, PartialEq)]
pub struct HeatCoords {
    /// Log-moneyness `log(S / B_low)`.
    pub x: f64,
    /// Transformed time `sigma^2 (T_end - t) / 2`.
    pub tau: f64,
    pub alpha: f64,
    pub beta: f64,
    /// Log barrier width `L`.
    pub big_l: f64,
    /// Window images in contract order; `tau_start` is strictly decreasing
    /// and the last window starts at `tau = 0`.
    pub tau_images: Vec<TauWindow>,
    /// Region of the valuation instant.
    pub region: Region,
    sigma: f64,
    b_low: f64,
    t_end: f64,
}

impl HeatCoords {
    /// Inverse transform of the space coordinate.
    pub fn spot_at(&self, x: f64) -> f64 {
        self.b_low * x.exp()
    }

    /// Inverse transform of the time coordinate.
    pub fn time_at(&self, tau: f64) -> f64 {
        self.t_end - 2.0 * tau / (self.sigma * self.sigma)
    }

    /// Window images ordered by increasing transformed time (propagation
    /// order: last contract window first).
    pub fn images_by_tau(&self) -> impl Iterator<Item = &TauWindow> {
        self.tau_images.iter().rev()
    }
}

/// Outcome of preparing a valuation point: either live transformed
/// coordinates, or the contract is already knocked out (price exactly 0).
#[derive(Debug, Clone, PartialEq)]
pub enum Valuation {
    Live(HeatCoords),
    KnockedOut,
}

/// Maps a valuation instant to heat coordinates.
///
/// `t` may lie before the first window, inside a window (boundaries count as
/// inside) or in a gap, but not after expiry. A spot on or outside a barrier
/// while a window is active yields [`Valuation::KnockedOut`], not an error.
pub fn to_heat_coords(
    market: &MarketParams,
    barriers: &BarrierSpec,
    schedule: &BarrierSchedule,
    t: f64,
    spot_at_t: f64,
) -> Result<Valuation> {
    if !spot_at_t.is_finite() || spot_at_t <= 0.0 {
        return Err(Error::param(
            "spot_at_t",
            format!("must be > 0, got {spot_at_t}"),
        ));
    }
    if !t.is_finite() || t < 0.0 {
        return Err(Error::param("t", format!("must be >= 0, got {t}")));
    }
    let t_end = schedule.end();
    if t > t_end && !same_instant(t, t_end) {
        return Err(Error::param(
            "t",
            format!("valuation time {t} lies after expiry {t_end}"),
        ));
    }

    let region = match schedule.window_containing(t) {
        Some(i) => {
            if !barriers.strictly_inside(spot_at_t) {
                return Ok(Valuation::KnockedOut);
            }
            Region::InsideWindow(i)
        }
        None if t < schedule.first_start() => Region::BeforeFirstWindow,
        None => {
            let i = schedule
                .windows()
                .iter()
                .rposition(|w| w.end() < t)
                .expect("t is past the first window but inside no window or gap");
            Region::InGapAfter(i)
        }
    };

    let sigma = market.vol();
    let half_s2 = 0.5 * sigma * sigma;
    let (alpha, beta) = alpha_beta(market.rate(), sigma)?;
    let tau_images = schedule
        .windows()
        .iter()
        .map(|w| TauWindow {
            tau_start: half_s2 * (t_end - w.end()),
            p: half_s2 * w.length(),
        })
        .collect();

    Ok(Valuation::Live(HeatCoords {
        x: (spot_at_t / barriers.low()).ln(),
        tau: half_s2 * (t_end - t),
        alpha,
        beta,
        big_l: barriers.log_width(),
        tau_images,
        region,
        sigma,
        b_low: barriers.low(),
        t_end,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn sched(ws: &[(f64, f64)]) -> BarrierSchedule {
        BarrierSchedule::new(
            ws.iter()
                .map(|&(s, l)| Window::new(s, l).unwrap())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn alpha_beta_unit_ratio() {
        // 2r/sigma^2 = 1 forces alpha = 0, beta = -1 (up to the one-ulp
        // rounding of sigma^2 itself).
        let (a, b) = alpha_beta(0.02, 0.2).unwrap();
        assert_abs_diff_eq!(a, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(b, -1.0, epsilon = 1e-15);
        let (a, b) = alpha_beta(0.08, 0.4).unwrap();
        assert_abs_diff_eq!(a, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(b, -1.0, epsilon = 1e-15);
    }

    #[test]
    fn alpha_beta_identity_holds() {
        let (a, b) = alpha_beta(0.05, 0.2).unwrap();
        let ratio = 2.0 * 0.05 / 0.04;
        assert_abs_diff_eq!(b, -ratio - a * a, epsilon = 1e-15);
        // independently recomputed from the defining formulas
        assert_abs_diff_eq!(a, -0.5 * (ratio - 1.0), epsilon = 1e-15);
    }

    #[test]
    fn alpha_beta_rejects_bad_inputs() {
        assert!(alpha_beta(0.0, 0.2).is_err());
        assert!(alpha_beta(0.05, -0.1).is_err());
        assert!(alpha_beta(f64::NAN, 0.2).is_err());
    }

    #[test]
    fn market_params_validation() {
        assert!(MarketParams::new(100.0, 0.03, 0.25).is_ok());
        assert!(MarketParams::new(-1.0, 0.03, 0.25).is_err());
        assert!(MarketParams::new(100.0, 0.0, 0.25).is_err());
        assert!(MarketParams::new(100.0, 0.03, 0.0).is_err());
    }

    #[test]
    fn barrier_spec_validation() {
        assert!(BarrierSpec::new(80.0, 125.0).is_ok());
        assert!(BarrierSpec::new(125.0, 80.0).is_err());
        assert!(BarrierSpec::new(0.0, 80.0).is_err());
        assert!(BarrierSpec::new(80.0, 80.0).is_err());
    }

    #[test]
    fn schedule_rejects_overlap_and_disorder() {
        let w = |s, l| Window::new(s, l).unwrap();
        assert!(BarrierSchedule::new(vec![w(0.0, 1.0), w(0.5, 1.0)]).is_err());
        assert!(BarrierSchedule::new(vec![w(1.0, 1.0), w(0.0, 0.5)]).is_err());
        assert!(BarrierSchedule::new(vec![]).is_err());
        assert!(Window::new(0.0, 0.0).is_err());
    }

    #[test]
    fn concatenation_merges_adjacent_runs() {
        let s = sched(&[(0.0, 1.0), (1.0, 1.0), (2.0, 1.0)]).concatenated();
        assert_eq!(s.windows(), &[Window::new(0.0, 3.0).unwrap()]);

        let s = sched(&[(0.0, 1.0), (2.0, 1.0)]).concatenated();
        assert_eq!(s.len(), 2);

        let s = sched(&[(0.0, 1.0), (1.0, 2.0), (4.0, 1.0), (5.0, 1.0)]).concatenated();
        assert_eq!(
            s.windows(),
            &[Window::new(0.0, 3.0).unwrap(), Window::new(4.0, 2.0).unwrap()]
        );
    }

    #[test]
    fn concatenation_is_idempotent() {
        let s = sched(&[(0.0, 0.25), (0.25, 0.25), (0.75, 0.5)]);
        let once = s.concatenated();
        assert_eq!(once, once.concatenated());
        assert_abs_diff_eq!(once.covered_time(), s.covered_time(), epsilon = 1e-12);
    }

    #[test]
    fn heat_coords_boundary_values() {
        let market = MarketParams::new(100.0, 0.02, 0.2).unwrap();
        let barriers = BarrierSpec::new(80.0, 125.0).unwrap();
        let schedule = sched(&[(0.5, 0.5)]);
        // spot at the lower barrier before the window: x = 0
        let v = to_heat_coords(&market, &barriers, &schedule, 0.0, 80.0).unwrap();
        let Valuation::Live(c) = v else { panic!() };
        assert_eq!(c.x, 0.0);
        // spot at the upper barrier: x = L
        let v = to_heat_coords(&market, &barriers, &schedule, 0.0, 125.0).unwrap();
        let Valuation::Live(c) = v else { panic!() };
        assert_abs_diff_eq!(c.x, barriers.log_width(), epsilon = 1e-15);
    }

    #[test]
    fn heat_coords_single_window_times() {
        // sigma = 0.2, window [0.5, 1.0], t = 0: tau = 0.02, p = 0.01, tau_1 = 0
        let market = MarketParams::new(100.0, 0.02, 0.2).unwrap();
        let barriers = BarrierSpec::new(80.0, 125.0).unwrap();
        let schedule = sched(&[(0.5, 0.5)]);
        let Valuation::Live(c) = to_heat_coords(&market, &barriers, &schedule, 0.0, 100.0).unwrap()
        else {
            panic!()
        };
        assert_abs_diff_eq!(c.tau, 0.02, epsilon = 1e-15);
        assert_eq!(c.tau_images.len(), 1);
        assert_abs_diff_eq!(c.tau_images[0].p, 0.01, epsilon = 1e-15);
        assert_abs_diff_eq!(c.tau_images[0].tau_start, 0.0, epsilon = 1e-15);
        assert_eq!(c.region, Region::BeforeFirstWindow);
    }

    #[test]
    fn knock_out_inside_window() {
        let market = MarketParams::new(100.0, 0.03, 0.25).unwrap();
        let barriers = BarrierSpec::new(80.0, 125.0).unwrap();
        let schedule = sched(&[(0.25, 0.5)]);
        // on the barrier during the window: knocked out, not an error
        let v = to_heat_coords(&market, &barriers, &schedule, 0.3, 80.0).unwrap();
        assert_eq!(v, Valuation::KnockedOut);
        let v = to_heat_coords(&market, &barriers, &schedule, 0.25, 130.0).unwrap();
        assert_eq!(v, Valuation::KnockedOut);
        // same spot before the window is fine
        let v = to_heat_coords(&market, &barriers, &schedule, 0.1, 130.0).unwrap();
        assert!(matches!(v, Valuation::Live(_)));
        // after expiry: error
        assert!(to_heat_coords(&market, &barriers, &schedule, 1.0, 100.0).is_err());
    }

    #[test]
    fn region_detection_in_gaps() {
        let market = MarketParams::new(100.0, 0.03, 0.25).unwrap();
        let barriers = BarrierSpec::new(80.0, 125.0).unwrap();
        let schedule = sched(&[(0.25, 0.25), (0.75, 0.25)]);
        let Valuation::Live(c) = to_heat_coords(&market, &barriers, &schedule, 0.6, 100.0).unwrap()
        else {
            panic!()
        };
        assert_eq!(c.region, Region::InGapAfter(0));
        let Valuation::Live(c) = to_heat_coords(&market, &barriers, &schedule, 0.8, 100.0).unwrap()
        else {
            panic!()
        };
        assert_eq!(c.region, Region::InsideWindow(1));
    }

    #[test]
    fn round_trip_inverse_transform() {
        let market = MarketParams::new(100.0, 0.05, 0.3).unwrap();
        let barriers = BarrierSpec::new(70.0, 140.0).unwrap();
        let schedule = sched(&[(0.5, 0.25), (1.0, 0.5)]);
        for &(t, s) in &[(0.0, 100.0), (0.3, 90.0), (0.8, 120.0), (1.2, 75.0)] {
            let Valuation::Live(c) = to_heat_coords(&market, &barriers, &schedule, t, s).unwrap()
            else {
                panic!()
            };
            assert_abs_diff_eq!(c.spot_at(c.x), s, epsilon = 1e-12 * s);
            assert_abs_diff_eq!(c.time_at(c.tau), t, epsilon = 1e-12_f64.max(1e-12 * t));
        }
    }

    #[test]
    fn tau_images_strictly_decreasing_last_zero() {
        let market = MarketParams::new(100.0, 0.03, 0.25).unwrap();
        let barriers = BarrierSpec::new(80.0, 125.0).unwrap();
        let schedule = sched(&[(0.1, 0.1), (0.3, 0.2), (0.6, 0.1)]);
        let Valuation::Live(c) = to_heat_coords(&market, &barriers, &schedule, 0.0, 100.0).unwrap()
        else {
            panic!()
        };
        for pair in c.tau_images.windows(2) {
            assert!(pair[0].tau_start > pair[1].tau_start);
        }
        assert_abs_diff_eq!(c.tau_images.last().unwrap().tau_start, 0.0, epsilon = 1e-15);
    }
}
