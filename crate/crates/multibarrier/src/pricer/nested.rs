//! Literal nested-quadrature evaluation of the two-window price.
//!
//! This walks the recursive integral formula exactly as written for one
//! free/barrier alternation: tensor quadrature over `(x_1, x_2, y_1, y_2)`
//! and an explicit double mode series `(k_1, k_2)`, with the payoff
//! projection integral evaluated numerically rather than in closed form.
//! It is exponentially more expensive than the operator pipeline and exists
//! as a correctness oracle; the two must agree to quadrature tolerance.

use crate::error::{Error, Result};
use crate::model::{to_heat_coords, BarrierSchedule, BarrierSpec, MarketParams, Valuation};
use crate::pricer::{sin_ladder, PriceResult, PriceStatus};
use crate::quad::GaussLegendre;

/// Evaluates the two-window digital by direct tensor quadrature of the
/// nested pricing formula (one heat-kernel layer per integral sign, one mode
/// series per window). Requires exactly two windows separated by a positive
/// gap, and a valuation time before the first window.
pub fn price_two_period_nested(
    market: &MarketParams,
    barriers: &BarrierSpec,
    schedule: &BarrierSchedule,
    t: f64,
    spot_at_t: f64,
    k_max: usize,
    quad_nodes: usize,
) -> Result<PriceResult> {
    if schedule.len() != 2 {
        return Err(Error::param(
            "schedule",
            format!("nested oracle needs exactly 2 windows, got {}", schedule.len()),
        ));
    }
    if t >= schedule.first_start() {
        return Err(Error::param(
            "t",
            "nested oracle evaluates only before the first window",
        ));
    }
    if quad_nodes < 8 {
        return Err(Error::param("quad_nodes", "must be >= 8"));
    }
    let coords = match to_heat_coords(market, barriers, schedule, t, spot_at_t)? {
        Valuation::KnockedOut => return Ok(PriceResult::knocked_out()),
        Valuation::Live(c) => c,
    };
    let big_l = coords.big_l;
    let alpha = coords.alpha;
    // contract order: tau_images[0] is the first window (largest tau_start)
    let first = coords.tau_images[0];
    let second = coords.tau_images[1];
    let p1 = first.p;
    let p2 = second.p;
    let d = first.tau_start - second.tau_end(); // gap between the windows
    let e = coords.tau - first.tau_end(); // free stretch before the first window
    if d <= 0.0 {
        return Err(Error::param(
            "schedule",
            "windows are adjacent; concatenate them and use the one-window formula",
        ));
    }

    let k = crate::pricer::effective_modes(k_max, big_l, p1.min(p2));
    let value = nested_value(alpha, big_l, coords.x, p1, p2, d, e, k, quad_nodes)?;
    let half = nested_value(
        alpha,
        big_l,
        coords.x,
        p1,
        p2,
        d,
        e,
        k,
        (quad_nodes / 2).max(8),
    )?;
    let prefactor = (alpha * coords.x + coords.beta * coords.tau).exp();
    Ok(PriceResult {
        price: (prefactor * value).max(0.0),
        truncation_bound: crate::pricer::truncation_tail(
            alpha,
            big_l,
            k,
            p1 + p2 + d + e,
            prefactor,
        ),
        quadrature_error: (prefactor * (value - half)).abs(),
        status: PriceStatus::Priced,
    })
}

#[allow(clippy::too_many_arguments)]
fn nested_value(
    alpha: f64,
    big_l: f64,
    x: f64,
    p1: f64,
    p2: f64,
    d: f64,
    e: f64,
    k: usize,
    quad_nodes: usize,
) -> Result<f64> {
    let rule = GaussLegendre::with_nodes(quad_nodes)?;
    let pi = std::f64::consts::PI;
    let s_d = (2.0 * d).sqrt();
    let s_e = (2.0 * e).sqrt();

    let mut xs = Vec::new();
    let mut wxs = Vec::new();
    rule.map_to(0.0, big_l, &mut xs, &mut wxs);
    let mut sines = vec![0.0; k];

    // payoff projections: (2/L) Int_0^L e^{-alpha x1} sin(k1 pi x1 / L) dx1,
    // by quadrature (the oracle does not use the closed form)
    let mut payoff_proj = vec![0.0; k];
    for (&x1, &w) in xs.iter().zip(&wxs) {
        sin_ladder(pi * x1 / big_l, &mut sines);
        let g = w * (-alpha * x1).exp() * 2.0 / big_l;
        for (m, &sv) in sines.iter().enumerate() {
            payoff_proj[m] += g * sv;
        }
    }

    // inner layer at each x2 node:
    // I(x2) = (2 pi)^{-1/2} Int dy1 e^{-y1^2/2} sum_k1 payoff_proj[k1]
    //         e^{-(k1 pi/L)^2 p2} sin(k1 pi (x2 + y1 s_d) / L)
    let decayed_payoff: Vec<f64> = payoff_proj
        .iter()
        .enumerate()
        .map(|(m, &b)| {
            let kf = (m + 1) as f64;
            b * (-(kf * pi / big_l) * (kf * pi / big_l) * p2).exp()
        })
        .collect();
    let mut ys = Vec::new();
    let mut wys = Vec::new();
    let inv_sqrt2pi = 1.0 / (2.0 * pi).sqrt();
    let mut inner = vec![0.0; xs.len()];
    for (ix, &x2) in xs.iter().enumerate() {
        let lo = (-x2 / s_d).max(-crate::pricer::Y_CUT);
        let hi = ((big_l - x2) / s_d).min(crate::pricer::Y_CUT);
        if lo >= hi {
            continue;
        }
        rule.map_to(lo, hi, &mut ys, &mut wys);
        let mut acc = 0.0;
        for (&y1, &w) in ys.iter().zip(&wys) {
            let u = x2 + y1 * s_d;
            sin_ladder(pi * u / big_l, &mut sines);
            let series: f64 = decayed_payoff.iter().zip(&sines).map(|(b, s)| b * s).sum();
            acc += w * (-0.5 * y1 * y1).exp() * series;
        }
        inner[ix] = acc * inv_sqrt2pi;
    }

    // mode projections of the inner layer over x2
    let mut proj = vec![0.0; k];
    for (ix, &x2) in xs.iter().enumerate() {
        sin_ladder(pi * x2 / big_l, &mut sines);
        let g = wxs[ix] * inner[ix] * 2.0 / big_l;
        for (m, &sv) in sines.iter().enumerate() {
            proj[m] += g * sv;
        }
    }

    // outermost kernel integral over y2 at the valuation point
    let lo = (-x / s_e).max(-crate::pricer::Y_CUT);
    let hi = ((big_l - x) / s_e).min(crate::pricer::Y_CUT);
    if lo >= hi {
        return Ok(0.0);
    }
    rule.map_to(lo, hi, &mut ys, &mut wys);
    let mut outer = vec![0.0; k];
    for (&y2, &w) in ys.iter().zip(&wys) {
        let u = x + y2 * s_e;
        sin_ladder(pi * u / big_l, &mut sines);
        let g = w * (-0.5 * y2 * y2).exp();
        for (m, &sv) in sines.iter().enumerate() {
            outer[m] += g * sv;
        }
    }

    let mut total = 0.0;
    for m in 0..k {
        let kf = (m + 1) as f64;
        total += proj[m]
            * (-(kf * pi / big_l) * (kf * pi / big_l) * p1).exp()
            * outer[m]
            * inv_sqrt2pi;
    }
    Ok(total)
}
