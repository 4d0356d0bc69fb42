//! Image-charges (reflection series) formula for the single-window survival
//! probability of a drifted Brownian motion in a strip.
//!
//! This is an independent verification route for the spectral pricer: the
//! same probability computed through the classical method-of-images density
//! for absorption at two walls, reduced to normal-CDF differences, with the
//! drift handled by a Girsanov tilt. None of the sine-series machinery is
//! shared with this module.

use crate::error::{Error, Result};
use crate::model::{BarrierSpec, MarketParams};
use crate::quad::GaussLegendre;

fn std_normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / std::f64::consts::SQRT_2)
}

/// Probability that `X_u = a + mu u + vol W_u` stays in `(0, width)` for all
/// `u` in `[0, horizon]`, starting from `a` inside the strip.
///
/// Uses the reflection expansion of the absorbed-density integral; the image
/// sum converges like `exp(-(2 j width)^2 / (2 vol^2 horizon))` per pair of
/// terms and is truncated once increments vanish.
pub fn strip_survival_probability(
    a: f64,
    width: f64,
    mu: f64,
    vol: f64,
    horizon: f64,
) -> Result<f64> {
    if !width.is_finite() || width <= 0.0 {
        return Err(Error::param("width", "must be > 0"));
    }
    if !vol.is_finite() || vol <= 0.0 {
        return Err(Error::param("vol", "must be > 0"));
    }
    if !horizon.is_finite() || horizon <= 0.0 {
        return Err(Error::param("horizon", "must be > 0"));
    }
    Ok(strip_survival_unchecked(a, width, mu, vol, horizon))
}

fn strip_survival_unchecked(a: f64, width: f64, mu: f64, vol: f64, horizon: f64) -> f64 {
    if a <= 0.0 || a >= width {
        return 0.0;
    }
    let sd = vol * horizon.sqrt();
    let lam = mu / (vol * vol);
    // term for one image center c with Girsanov weight e^{lam (c - a)}:
    // Int_0^width e^{mu(y-a)/vol^2} phi(y - c; vol^2 u) dy
    //   = e^{lam (c - a)} [Phi((width - c - mu u)/sd) - Phi((-c - mu u)/sd)]
    let term = |c: f64, weight_exp: f64| -> f64 {
        if weight_exp > 700.0 {
            return f64::INFINITY;
        }
        if weight_exp < -700.0 {
            return 0.0;
        }
        weight_exp.exp()
            * (std_normal_cdf((width - c - mu * horizon) / sd)
                - std_normal_cdf((-c - mu * horizon) / sd))
    };
    let mut total = 0.0;
    for j in 0..=64i32 {
        let mut incr = 0.0;
        let js: &[i32] = if j == 0 { &[0] } else { &[-j, j] };
        for &jj in js {
            let shift = 2.0 * jj as f64 * width;
            incr += term(a + shift, lam * shift);
            incr -= term(-a + shift, lam * (shift - 2.0 * a));
        }
        total += incr;
        if j > 0 && incr.abs() < 1e-16 {
            break;
        }
    }
    total.clamp(0.0, 1.0)
}

/// One-window double-barrier digital price via the reflection series:
/// free diffusion from `(t, spot_at_t)` to the window start, then the strip
/// survival probability over the window, discounted to `t`.
///
/// Valuation must be strictly before the window (`t < t0`). The entry
/// integral over the window-start location uses a 400-node Gauss-Legendre
/// rule; accuracy is limited by the image truncation, around 1e-12.
pub fn price_one_period_reflection(
    market: &MarketParams,
    barriers: &BarrierSpec,
    t0: f64,
    p_len: f64,
    t: f64,
    spot_at_t: f64,
) -> Result<f64> {
    if !t.is_finite() || t < 0.0 || t >= t0 {
        return Err(Error::param("t", "need 0 <= t < t0"));
    }
    if !p_len.is_finite() || p_len <= 0.0 {
        return Err(Error::param("p_len", "must be > 0"));
    }
    if !spot_at_t.is_finite() || spot_at_t <= 0.0 {
        return Err(Error::param("spot_at_t", "must be > 0"));
    }
    let width = barriers.log_width();
    let x0 = (spot_at_t / barriers.low()).ln();
    let mu = market.log_drift();
    let vol = market.vol();
    let lead = t0 - t;
    let entry_sd = vol * lead.sqrt();
    let entry_mean = x0 + mu * lead;

    let rule = GaussLegendre::with_nodes(400)?;
    let norm = 1.0 / (entry_sd * (2.0 * std::f64::consts::PI).sqrt());
    let prob = rule.integrate(0.0, width, |a| {
        let dens = norm * (-0.5 * ((a - entry_mean) / entry_sd).powi(2)).exp();
        dens * strip_survival_unchecked(a, width, mu, vol, p_len)
    });
    Ok((-market.rate() * (t0 + p_len - t)).exp() * prob)
}
