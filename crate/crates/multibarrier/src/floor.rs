//! Structure-floor valuation for barrier-coupon notes.
//!
//! A note pays one digital coupon per period `[T_{i-1}, T_i]` (corridor
//! survival) plus the terminal premium `(F - A)+`, where `A` is the number of
//! coupons paid. The law of `A` on `{0..n}` is recovered in three steps:
//! moments `E[A^nu]` are linear combinations of multi-window digital
//! probabilities with surjection-count coefficients; `P[A = n]` is the
//! undiscounted one-window digital over the whole coupon span; the remaining
//! masses solve a Vandermonde moment system on the nodes `{0..n-1}`.
//!
//! Numerics: the monomial moments grow like `n^nu`, so for larger `n` their
//! f64 representation alone would poison the recovery. Moment assembly and
//! the Bjorck-Pereyra solve therefore run in double-double internally and
//! round to f64 only at the end; the remaining error is set by the accuracy
//! of the digital prices, not by the solver.

use rayon::prelude::*;

use crate::constants::{CONDITION_LIMIT, PMF_CLIP_TOLERANCE};
use crate::dd::Dd;
use crate::error::{Error, Result};
use crate::model::{BarrierSchedule, BarrierSpec, MarketParams, Window};
use crate::pricer::{multi_price_value, PriceResult, PriceStatus};

/// Spectral-pricer knobs threaded through the moment pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PricingParams {
    pub k_max: usize,
    pub quad_nodes: usize,
}

impl Default for PricingParams {
    fn default() -> Self {
        PricingParams {
            k_max: crate::constants::DEFAULT_K_MAX,
            quad_nodes: crate::constants::DEFAULT_QUAD_NODES,
        }
    }
}

/// Largest coupon count accepted by the exact pipeline; the subset sum over
/// `2^n` digital prices grows past usefulness beyond this.
pub const MAX_COUPONS: usize = 20;

/// Number of surjections from a `nu`-element set onto an `m`-element set:
/// the sum of multinomial coefficients over all positive compositions of
/// `nu` into `m` parts. Zero when `m > nu` (and when exactly one of the
/// arguments is zero). Exact for `nu <= 20`.
pub fn surjection_coefficient(nu: u32, m: u32) -> u128 {
    assert!(nu <= 20 && m <= 20, "surjection_coefficient supports arguments up to 20");
    if m > nu {
        return 0;
    }
    if nu == 0 {
        return 1; // m == 0 here: the empty function
    }
    if m == 0 {
        return 0;
    }
    // inclusion-exclusion over the subset of the target that is missed
    let mut total: i128 = 0;
    for j in 0..=m {
        let sign = if j % 2 == 0 { 1i128 } else { -1i128 };
        let term = binomial(m as u64, j as u64) as i128 * ((m - j) as i128).pow(nu);
        total += sign * term;
    }
    debug_assert!(total >= 0);
    total as u128
}

pub(crate) fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Moments `E[A^nu]`, `nu = 0..n-1`, of the coupon count.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentVector {
    values: Vec<f64>,
    extended: Option<Vec<Dd>>,
}

impl MomentVector {
    /// Wraps plain f64 moments (no extended-precision carrier); used mainly
    /// in tests and round-trip checks.
    pub fn from_values(values: Vec<f64>) -> Self {
        MomentVector {
            values,
            extended: None,
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    fn extended(&self) -> Vec<Dd> {
        match &self.extended {
            Some(e) => e.clone(),
            None => self.values.iter().map(|&v| Dd::from_f64(v)).collect(),
        }
    }

    /// Most negative pivot of the Hankel form of the moment sequence,
    /// relative to its largest pivot; a genuine moment sequence gives a
    /// value no lower than roughly -1e-8 at this crate's price accuracy.
    pub fn hankel_defect(&self) -> f64 {
        let n = self.values.len();
        if n < 3 {
            return 0.0;
        }
        let d = (n - 1) / 2 + 1;
        let mut h = vec![0.0; d * d];
        for i in 0..d {
            for j in 0..d {
                h[i * d + j] = self.values[i + j];
            }
        }
        ldlt_min_pivot(&mut h, d)
    }
}

/// LDL^T pivots of a symmetric matrix (in place); returns the most negative
/// pivot scaled by the largest pivot magnitude.
fn ldlt_min_pivot(h: &mut [f64], d: usize) -> f64 {
    let mut pivots = Vec::with_capacity(d);
    for k in 0..d {
        let mut pivot = h[k * d + k];
        for r in 0..k {
            pivot -= h[k * d + r] * h[k * d + r] * pivots[r];
        }
        pivots.push(pivot);
        if pivot == 0.0 {
            break;
        }
        for i in (k + 1)..d {
            let mut v = h[i * d + k];
            for r in 0..k {
                v -= h[i * d + r] * h[k * d + r] * pivots[r];
            }
            h[i * d + k] = v / pivot;
        }
    }
    let scale = pivots.iter().fold(0.0f64, |a, &p| a.max(p.abs())).max(1.0);
    pivots.iter().fold(0.0f64, |a, &p| a.min(p / scale))
}

/// Recovered law of the coupon count with recovery diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct CouponPmf {
    probs: Vec<f64>,
    residual: f64,
    condition_estimate: f64,
}

impl CouponPmf {
    /// `P[A = i]` for `i = 0..=n`.
    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn n(&self) -> usize {
        self.probs.len() - 1
    }

    /// Largest `[0, 1]` violation observed before clipping.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    /// Gautschi bound on the inverse infinity-norm of the moment matrix:
    /// the amplification of absolute moment errors into the recovered
    /// masses. (The classical full condition number of an equispaced
    /// Vandermonde grows exponentially and would reject every system the
    /// extended-precision solve handles without trouble.)
    pub fn condition_estimate(&self) -> f64 {
        self.condition_estimate
    }

    pub fn mean(&self) -> f64 {
        self.probs
            .iter()
            .enumerate()
            .map(|(i, p)| i as f64 * p)
            .sum()
    }
}

/// Gautschi's expression for `||V^{-1}||_inf` on nonnegative nodes.
pub(crate) fn vandermonde_inverse_norm(nodes: &[f64]) -> f64 {
    let mut best = 0.0f64;
    for (i, &xi) in nodes.iter().enumerate() {
        let mut prod = 1.0;
        for (j, &xj) in nodes.iter().enumerate() {
            if i != j {
                prod *= (1.0 + xj) / (xi - xj).abs();
            }
        }
        best = best.max(prod);
    }
    best
}

/// Bjorck-Pereyra solve of the dual Vandermonde (moment) system
/// `sum_i x_i^nu w_i = b_nu` in double-double arithmetic.
fn bjorck_pereyra_dual(nodes: &[f64], b: &mut [Dd]) {
    let n = nodes.len();
    if n == 0 {
        return;
    }
    for (k, &node) in nodes.iter().enumerate().take(n - 1) {
        for i in (k + 1..n).rev() {
            b[i] = b[i].sub(b[i - 1].mul_f64(node));
        }
    }
    for k in (0..n - 1).rev() {
        for i in k + 1..n {
            b[i] = b[i].div(Dd::from_f64(nodes[i] - nodes[i - k - 1]));
        }
        for i in k..n - 1 {
            b[i] = b[i].sub(b[i + 1]);
        }
    }
}

fn coupon_note_checks(schedule: &BarrierSchedule, t: f64) -> Result<(usize, f64)> {
    let n = schedule.len();
    if n == 0 {
        return Err(Error::InvalidSchedule("no coupon windows".into()));
    }
    if n > MAX_COUPONS {
        return Err(Error::InvalidSchedule(format!(
            "exact floor pipeline enumerates 2^n digital prices; n = {n} exceeds the cap of {MAX_COUPONS}"
        )));
    }
    let period = schedule.windows()[0].length();
    for pair in schedule.windows().windows(2) {
        let gap = pair[1].start() - pair[0].end();
        if gap.abs() > 1e-9 * pair[1].start().abs().max(1.0) {
            return Err(Error::InvalidSchedule(
                "coupon windows must be adjacent (T_{i-1} + P = T_i)".into(),
            ));
        }
        if (pair[1].length() - period).abs() > 1e-9 * period {
            return Err(Error::InvalidSchedule(
                "coupon windows must share one period length".into(),
            ));
        }
    }
    // t may coincide with the first coupon date (window boundaries are
    // closed; the spot constraint at that instant is carried by the pricer)
    if t > schedule.first_start() + 1e-12 * schedule.first_start().abs().max(1.0) {
        return Err(Error::param(
            "t",
            "floor valuation needs t at or before the first coupon window",
        ));
    }
    Ok((n, period))
}

/// Undiscounted digital probability for the coupon subset encoded by `mask`
/// (bit `j` set means coupon `j + 1` is constrained).
fn subset_probability(
    market: &MarketParams,
    barriers: &BarrierSpec,
    coupons: &[Window],
    mask: u32,
    t: f64,
    params: &PricingParams,
) -> Result<f64> {
    let mut windows = Vec::with_capacity(mask.count_ones() as usize);
    for (j, w) in coupons.iter().enumerate() {
        if mask >> j & 1 == 1 {
            windows.push(*w);
        }
    }
    let schedule = BarrierSchedule::new(windows)?;
    let end = schedule.end();
    let discounted = multi_price_value(
        market,
        barriers,
        &schedule,
        t,
        market.spot(),
        params.k_max,
        params.quad_nodes,
    )?;
    Ok(discounted * (market.rate() * (end - t)).exp())
}

/// Moments `E[A^nu]` (`nu = 0 .. n-1`) of the coupon count via the
/// surjection-weighted sum of undiscounted digital prices over coupon
/// subsets. Risk-neutral drift keeps the rate; only the discount factor is
/// dropped. Subsets larger than `n - 1` never contribute (their coefficient
/// vanishes for every needed `nu`).
pub fn moments_of_coupon_count(
    market: &MarketParams,
    barriers: &BarrierSpec,
    schedule: &BarrierSchedule,
    t: f64,
    params: &PricingParams,
) -> Result<MomentVector> {
    let (n, _) = coupon_note_checks(schedule, t)?;
    let coupons = schedule.windows().to_vec();
    let full: u32 = if n == 32 { !0 } else { (1u32 << n) - 1 };

    // all proper non-empty subsets, priced in parallel, reduced in mask order
    let prices: Vec<(u32, f64)> = (1..full)
        .into_par_iter()
        .map(|mask| {
            subset_probability(market, barriers, &coupons, mask, t, params)
                .map(|p| (mask.count_ones(), p))
        })
        .collect::<Result<Vec<_>>>()?;

    // S_m = sum over |J| = m of E[prod_{j in J} C_j]
    let mut subset_sums = vec![Dd::ZERO; n]; // index m = 1..n-1 used
    for &(m, p) in &prices {
        subset_sums[m as usize] = subset_sums[m as usize].add(Dd::from_f64(p));
    }

    let mut values = Vec::with_capacity(n);
    let mut extended = Vec::with_capacity(n);
    values.push(1.0);
    extended.push(Dd::from_f64(1.0));
    for nu in 1..n as u32 {
        let mut acc = Dd::ZERO;
        for m in 1..=nu.min(n as u32 - 1) {
            let c = surjection_coefficient(nu, m);
            if c != 0 {
                acc = acc.add(Dd::from_u128(c).mul(subset_sums[m as usize]));
            }
        }
        values.push(acc.to_f64());
        extended.push(acc);
    }
    Ok(MomentVector {
        values,
        extended: Some(extended),
    })
}

/// Recovers `P[A = i]` from the moment vector and the separately known top
/// mass `p_n`, solving the square Vandermonde system on nodes `{0..n-1}`.
///
/// Small negative masses (down to -1e-7, quadrature noise) are clipped and
/// the law renormalized; anything worse is reported as an inconsistency.
pub fn pmf_from_moments(moments: &MomentVector, p_n: f64) -> Result<CouponPmf> {
    let n = moments.len();
    if n == 0 {
        return Err(Error::param("moments", "need at least the order-0 moment"));
    }
    if !(-1e-6..=1.0 + 1e-6).contains(&p_n) {
        return Err(Error::Inconsistency(format!(
            "P[A = n] = {p_n} is not a probability"
        )));
    }
    let p_n = p_n.clamp(0.0, 1.0);
    if (moments.values()[0] - 1.0).abs() > 1e-6 {
        return Err(Error::Inconsistency(format!(
            "order-0 moment must be 1, got {}",
            moments.values()[0]
        )));
    }
    let n_f = n as f64;
    for (nu, &m) in moments.values().iter().enumerate() {
        let cap = n_f.powi(nu as i32);
        if !(-1e-6 * cap..=cap * (1.0 + 1e-6)).contains(&m) {
            return Err(Error::Inconsistency(format!(
                "moment of order {nu} = {m} outside [0, n^nu] = [0, {cap}]"
            )));
        }
    }

    let nodes: Vec<f64> = (0..n).map(|i| i as f64).collect();
    let condition_estimate = vandermonde_inverse_norm(&nodes);
    if condition_estimate > CONDITION_LIMIT {
        return Err(Error::NumericalFailure(format!(
            "moment system too ill-conditioned: inverse-norm proxy {condition_estimate:.3e} exceeds {CONDITION_LIMIT:.0e}"
        )));
    }

    // rhs_nu = E[A^nu] - n^nu p_n
    let mut rhs = moments.extended();
    let mut n_pow: u128 = 1;
    for (nu, r) in rhs.iter_mut().enumerate() {
        if nu > 0 {
            n_pow *= n as u128;
        }
        *r = r.sub(Dd::from_u128(n_pow).mul_f64(p_n));
    }
    bjorck_pereyra_dual(&nodes, &mut rhs);

    let mut probs: Vec<f64> = rhs.iter().map(|d| d.to_f64()).collect();
    probs.push(p_n);

    let mut residual = 0.0f64;
    for &p in &probs {
        residual = residual.max(-p).max(p - 1.0);
    }
    let residual = residual.max(0.0);
    if residual > PMF_CLIP_TOLERANCE {
        return Err(Error::Inconsistency(format!(
            "recovered masses violate [0, 1] by {residual:.3e} (tolerance {PMF_CLIP_TOLERANCE:.0e}); \
             the moment inputs are inconsistent with a law on {{0..n}}"
        )));
    }
    for p in probs.iter_mut() {
        *p = p.clamp(0.0, 1.0);
    }
    let total: f64 = probs.iter().sum();
    if total <= 0.0 {
        return Err(Error::Inconsistency("recovered law has no mass".into()));
    }
    for p in probs.iter_mut() {
        *p /= total;
    }
    Ok(CouponPmf {
        probs,
        residual,
        condition_estimate,
    })
}

/// Full structure-floor valuation: recovered coupon law plus the discounted
/// truncated-mean price.
#[derive(Debug, Clone, PartialEq)]
pub struct FloorValuation {
    pub result: PriceResult,
    pub pmf: CouponPmf,
    pub moments: MomentVector,
    /// `P[A = n]` from the one-window digital over the whole coupon span.
    pub p_top: f64,
    /// Discount factor `exp(-r (T_n - t))`.
    pub discount: f64,
}

impl FloorValuation {
    pub fn expected_coupons(&self) -> f64 {
        self.pmf.mean()
    }
}

/// Prices the terminal premium `(F - A)+` paid at `T_n`:
/// `exp(-r (T_n - t)) sum_{i=0}^{n AND floor(F)} (F - i) P[A = i]`.
pub fn price_structure_floor(
    market: &MarketParams,
    barriers: &BarrierSpec,
    schedule: &BarrierSchedule,
    floor: f64,
    t: f64,
    params: &PricingParams,
) -> Result<FloorValuation> {
    if !floor.is_finite() || floor <= 0.0 {
        return Err(Error::param("floor", format!("must be > 0, got {floor}")));
    }
    let (n, _) = coupon_note_checks(schedule, t)?;
    let t_end = schedule.end();

    // P[A = n]: one window covering the whole coupon span, undiscounted
    let whole = BarrierSchedule::new(vec![Window::new(
        schedule.first_start(),
        t_end - schedule.first_start(),
    )?])?;
    let p_top = multi_price_value(
        market,
        barriers,
        &whole,
        t,
        market.spot(),
        params.k_max,
        params.quad_nodes,
    )? * (market.rate() * (t_end - t)).exp();

    let moments = moments_of_coupon_count(market, barriers, schedule, t, params)?;
    let pmf = pmf_from_moments(&moments, p_top)?;

    let discount = (-market.rate() * (t_end - t)).exp();
    let cutoff = (floor.floor() as usize).min(n);
    let mut value = 0.0;
    for (i, &p) in pmf.probs().iter().enumerate().take(cutoff + 1) {
        value += (floor - i as f64) * p;
    }
    let price = (discount * value).max(0.0);

    Ok(FloorValuation {
        result: PriceResult {
            price,
            truncation_bound: 0.0,
            quadrature_error: 0.0,
            status: PriceStatus::Priced,
        },
        pmf,
        moments,
        p_top,
        discount,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::Rng;
    use rand::SeedableRng;

    /// Independent Stirling-number-of-the-second-kind recurrence.
    fn stirling2(n: u32, k: u32) -> u128 {
        if n == 0 && k == 0 {
            return 1;
        }
        if n == 0 || k == 0 || k > n {
            return 0;
        }
        let mut prev = vec![0u128; k as usize + 1];
        prev[0] = 1;
        for i in 1..=n {
            let mut cur = vec![0u128; k as usize + 1];
            for j in 1..=k.min(i) {
                cur[j as usize] =
                    prev[j as usize - 1] + j as u128 * prev[j as usize];
            }
            prev = cur;
            prev[0] = 0;
        }
        prev[k as usize]
    }

    /// Brute-force sum of multinomials over compositions with support size m.
    fn brute_surjections(nu: u32, m: u32) -> u128 {
        fn factorial(n: u32) -> u128 {
            (1..=n as u128).product()
        }
        fn rec(remaining: u32, parts: u32, acc: u128, total: &mut u128) {
            if parts == 0 {
                if remaining == 0 {
                    *total += acc;
                }
                return;
            }
            for i in 1..=remaining.saturating_sub(parts - 1) {
                rec(remaining - i, parts - 1, acc / factorial(i), total);
            }
        }
        if m == 0 {
            return if nu == 0 { 1 } else { 0 };
        }
        let mut total = 0u128;
        rec(nu, m, factorial(nu), &mut total);
        total
    }

    #[test]
    fn surjection_examples() {
        assert_eq!(surjection_coefficient(1, 1), 1);
        assert_eq!(surjection_coefficient(3, 5), 0);
        assert_eq!(surjection_coefficient(2, 2), 2);
        assert_eq!(surjection_coefficient(3, 2), 6);
        assert_eq!(surjection_coefficient(4, 3), 36);
        assert_eq!(surjection_coefficient(0, 0), 1);
        assert_eq!(surjection_coefficient(3, 0), 0);
    }

    #[test]
    fn surjections_match_brute_force() {
        for nu in 0..=7u32 {
            for m in 0..=7u32 {
                assert_eq!(
                    surjection_coefficient(nu, m),
                    brute_surjections(nu, m),
                    "nu={nu} m={m}"
                );
            }
        }
    }

    #[test]
    fn surjections_are_factorial_times_stirling() {
        fn factorial(n: u32) -> u128 {
            (1..=n as u128).product()
        }
        for nu in 0..=10u32 {
            for m in 0..=10u32 {
                assert_eq!(
                    surjection_coefficient(nu, m),
                    factorial(m) * stirling2(nu, m),
                    "nu={nu} m={m}"
                );
            }
        }
    }

    #[test]
    fn subset_counts_recover_total_multinomial_mass() {
        // sum_m binom(n, m) c(nu, m) = n^nu, exactly in integers
        for n in 1..=8u32 {
            for nu in 1..=6u32 {
                let mut total: u128 = 0;
                for m in 0..=nu.min(n) {
                    total += binomial(n as u64, m as u64) * surjection_coefficient(nu, m);
                }
                assert_eq!(total, (n as u128).pow(nu), "n={n} nu={nu}");
            }
        }
    }

    #[test]
    fn pmf_recovery_n1() {
        let moments = MomentVector::from_values(vec![1.0]);
        let pmf = pmf_from_moments(&moments, 0.3).unwrap();
        assert_abs_diff_eq!(pmf.probs()[0], 0.7, epsilon = 1e-12);
        assert_abs_diff_eq!(pmf.probs()[1], 0.3, epsilon = 1e-12);
    }

    #[test]
    fn pmf_recovery_point_mass_at_n() {
        let n = 5usize;
        let values: Vec<f64> = (0..n).map(|nu| (n as f64).powi(nu as i32)).collect();
        let pmf = pmf_from_moments(&MomentVector::from_values(values), 1.0).unwrap();
        for i in 0..n {
            assert_abs_diff_eq!(pmf.probs()[i], 0.0, epsilon = 1e-10);
        }
        assert_abs_diff_eq!(pmf.probs()[n], 1.0, epsilon = 1e-10);
    }

    #[test]
    fn pmf_round_trips_random_laws() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
        for trial in 0..100 {
            let n = 1 + (trial % 8) as usize;
            let mut p: Vec<f64> = (0..=n).map(|_| rng.random::<f64>()).collect();
            let total: f64 = p.iter().sum();
            p.iter_mut().for_each(|v| *v /= total);
            let moments: Vec<f64> = (0..n)
                .map(|nu| {
                    p.iter()
                        .enumerate()
                        .map(|(i, &pi)| (i as f64).powi(nu as i32) * pi)
                        .sum()
                })
                .collect();
            let rec = pmf_from_moments(&MomentVector::from_values(moments), p[n]).unwrap();
            for (a, b) in rec.probs().iter().zip(&p) {
                assert_abs_diff_eq!(a, b, epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn pmf_rejects_inconsistent_inputs() {
        // a signed "law" produces a clearly negative mass
        let n = 4usize;
        let p = [0.4, -0.05, 0.25, 0.2, 0.2];
        let moments: Vec<f64> = (0..n)
            .map(|nu| {
                p.iter()
                    .enumerate()
                    .map(|(i, &pi)| (i as f64).powi(nu as i32) * pi)
                    .sum()
            })
            .collect();
        let err = pmf_from_moments(&MomentVector::from_values(moments), p[n]).unwrap_err();
        assert!(matches!(err, Error::Inconsistency(_)));
        // moment exceeding n^nu
        let err = pmf_from_moments(
            &MomentVector::from_values(vec![1.0, 100.0]),
            0.1,
        )
        .unwrap_err();
        assert!(matches!(err, Error::Inconsistency(_)));
        // p_n far outside [0, 1]
        let err =
            pmf_from_moments(&MomentVector::from_values(vec![1.0]), 1.5).unwrap_err();
        assert!(matches!(err, Error::Inconsistency(_)));
    }

    #[test]
    fn hankel_defect_small_for_genuine_moments() {
        let p = [0.1, 0.2, 0.3, 0.25, 0.15];
        let moments: Vec<f64> = (0..4)
            .map(|nu| {
                p.iter()
                    .enumerate()
                    .map(|(i, &pi)| (i as f64).powi(nu) * pi)
                    .sum()
            })
            .collect();
        let mv = MomentVector::from_values(moments);
        assert!(mv.hankel_defect() >= -1e-8, "defect {}", mv.hankel_defect());
    }

    #[test]
    fn condition_proxy_grows_with_n() {
        let proxy = |n: usize| {
            let nodes: Vec<f64> = (0..n).map(|i| i as f64).collect();
            vandermonde_inverse_norm(&nodes)
        };
        assert!(proxy(4) < proxy(8));
        assert!(proxy(8) < proxy(16));
        assert!(proxy(16) < CONDITION_LIMIT);
    }

    fn std_setup() -> (MarketParams, BarrierSpec, BarrierSchedule) {
        let market = MarketParams::new(100.0, 0.03, 0.25).unwrap();
        let barriers = BarrierSpec::new(80.0, 125.0).unwrap();
        let schedule = BarrierSchedule::from_tenors(&[0.25, 0.5, 0.75, 1.0], 0.25).unwrap();
        (market, barriers, schedule)
    }

    #[test]
    fn moments_require_adjacent_equal_windows() {
        let (market, barriers, _) = std_setup();
        let gappy = BarrierSchedule::from_tenors(&[0.25, 0.75], 0.25).unwrap();
        let err =
            moments_of_coupon_count(&market, &barriers, &gappy, 0.0, &PricingParams::default())
                .unwrap_err();
        assert!(matches!(err, Error::InvalidSchedule(_)));
    }

    #[test]
    fn moments_wide_barriers_hit_integer_powers() {
        let (market, _, schedule) = std_setup();
        let wide = BarrierSpec::new(100.0 * 1e-5, 100.0 * 1e5).unwrap();
        let params = PricingParams {
            k_max: 2048,
            quad_nodes: 128,
        };
        let moments =
            moments_of_coupon_count(&market, &wide, &schedule, 0.0, &params).unwrap();
        for (nu, &m) in moments.values().iter().enumerate() {
            let expect = 4f64.powi(nu as i32);
            assert!(
                (m - expect).abs() < 2e-4 * expect,
                "nu={nu}: {m} vs {expect}"
            );
        }
    }

    #[test]
    fn first_moment_is_sum_of_one_window_prices() {
        let (market, barriers, schedule) = std_setup();
        let params = PricingParams::default();
        let moments =
            moments_of_coupon_count(&market, &barriers, &schedule, 0.0, &params).unwrap();
        let mut direct = 0.0;
        for w in schedule.windows() {
            let sub = BarrierSchedule::new(vec![*w]).unwrap();
            direct += multi_price_value(&market, &barriers, &sub, 0.0, 100.0, 64, 128).unwrap()
                * (market.rate() * w.end()).exp();
        }
        assert_abs_diff_eq!(moments.values()[1], direct, epsilon = 1e-10);
    }

    #[test]
    fn floor_parity_above_n() {
        // F >= n makes (F - A)+ linear: price = df (F - E[A])
        let (market, barriers, schedule) = std_setup();
        let params = PricingParams::default();
        let floor = 6.5;
        let val =
            price_structure_floor(&market, &barriers, &schedule, floor, 0.0, &params).unwrap();
        let linear = val.discount * (floor - val.expected_coupons());
        assert_abs_diff_eq!(val.result.price, linear, epsilon = 1e-8);
    }

    #[test]
    fn floor_tiny_f_prices_to_almost_nothing() {
        let (market, barriers, schedule) = std_setup();
        let params = PricingParams::default();
        let val =
            price_structure_floor(&market, &barriers, &schedule, 1e-12, 0.0, &params).unwrap();
        assert!(val.result.price <= 1e-12);
    }

    #[test]
    fn floor_monotone_in_f() {
        let (market, barriers, schedule) = std_setup();
        let params = PricingParams::default();
        let mut last = 0.0;
        for f in [0.5, 1.0, 1.7, 2.0, 3.2, 4.0] {
            let v = price_structure_floor(&market, &barriers, &schedule, f, 0.0, &params)
                .unwrap()
                .result
                .price;
            assert!(v >= last - 1e-12, "floor price must grow with F");
            last = v;
        }
    }
}
