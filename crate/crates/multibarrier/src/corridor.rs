//! Occupation-time (corridor) approximation of the structure floor.
//!
//! For many short coupon periods, the fraction of periods the underlying
//! spends entirely inside the corridor approaches the fraction of *time* it
//! spends inside — the occupation time. The floor `(F - A)+` is then
//! approximated by `n` puts on the occupation time with strike `F / n`.
//! Both the approximation and the convergence experiment behind it are Monte
//! Carlo estimates sharing the digital engine's path machinery.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::mc::{estimate_occupation_put, McConfig, McEstimate, PathStream};
use crate::model::{BarrierSpec, MarketParams};

/// Corridor-put approximation of the structure floor:
/// `n * exp(-r T) * E[(F/n - occupation)^+]`.
///
/// The occupation put is estimated on a uniform grid of
/// `config.steps_per_window` cells over the horizon, so estimates for
/// different `n` at the same config share the path skeleton exactly.
pub fn approx_floor_via_corridor(
    market: &MarketParams,
    barriers: &BarrierSpec,
    horizon: f64,
    n: usize,
    floor: f64,
    config: &McConfig,
) -> Result<McEstimate> {
    if n == 0 {
        return Err(Error::param("n", "need at least one coupon"));
    }
    if !floor.is_finite() || floor < 0.0 {
        return Err(Error::param("floor", "must be >= 0"));
    }
    let put = estimate_occupation_put(market, barriers, horizon, floor / n as f64, config)?;
    Ok(McEstimate {
        mean: n as f64 * put.mean,
        std_error: n as f64 * put.std_error,
        n_paths: put.n_paths,
        bias_note: put.bias_note,
    })
}

/// One row of the convergence experiment: the mean pathwise gap between the
/// window-survival fraction and the occupation fraction at coupon count `n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub n: usize,
    pub mean_abs_gap: f64,
    pub std_error: f64,
}

/// Both fractions for every requested `n` on one branch, computed on a
/// shared grid: `(occupation fraction, survival fraction per n)`.
///
/// The grid divides evenly into every `n`, windows are closed (both boundary
/// points monitored, shared points applying to both neighbors), and a cell
/// counts toward occupation iff both endpoints are strictly inside. On this
/// common grid a fully surviving window contributes its entire length to the
/// occupation, so survival fraction <= occupation fraction pathwise.
pub(crate) fn branch_fractions(
    stream: &mut PathStream,
    market: &MarketParams,
    barriers: &BarrierSpec,
    horizon: f64,
    cells: usize,
    ns: &[usize],
) -> (f64, Vec<f64>) {
    let lo = barriers.low().ln();
    let hi = barriers.up().ln();
    let mu = market.log_drift();
    let vol = market.vol();
    let dt = horizon / cells as f64;
    let sdt = vol * dt.sqrt();
    let mudt = mu * dt;

    let mut x = market.spot().ln();
    let mut inside_prev = lo < x && x < hi;
    let mut alive: Vec<bool> = ns.iter().map(|_| inside_prev).collect();
    let mut survived = vec![0u32; ns.len()];
    let mut occ_cells = 0usize;
    for j in 1..=cells {
        x += mudt + sdt * stream.normal();
        let inside = lo < x && x < hi;
        if inside && inside_prev {
            occ_cells += 1;
        }
        for (ni, &n) in ns.iter().enumerate() {
            if !inside {
                alive[ni] = false;
            }
            if j % (cells / n) == 0 {
                if alive[ni] {
                    survived[ni] += 1;
                }
                alive[ni] = inside;
            }
        }
        inside_prev = inside;
    }
    let occ_frac = occ_cells as f64 / cells as f64;
    let fracs = survived
        .iter()
        .zip(ns)
        .map(|(&s, &n)| s as f64 / n as f64)
        .collect();
    (occ_frac, fracs)
}

fn lcm(a: usize, b: usize) -> usize {
    fn gcd(mut a: usize, mut b: usize) -> usize {
        while b != 0 {
            let t = b;
            b = a % b;
            a = t;
        }
        a
    }
    a / gcd(a, b) * b
}

/// Measures, per coupon count in `ns`, the mean absolute pathwise gap
/// between the survival fraction `A_n / n` and the occupation fraction.
///
/// All counts share one fine grid (the smallest multiple of `lcm(ns)` at or
/// above `config.steps_per_window`) and one path skeleton, so the reported
/// trend is not confounded by sampling noise.
pub fn occupation_convergence_experiment(
    market: &MarketParams,
    barriers: &BarrierSpec,
    horizon: f64,
    ns: &[usize],
    config: &McConfig,
) -> Result<Vec<ConvergenceRow>> {
    if ns.is_empty() {
        return Err(Error::param("ns", "need at least one coupon count"));
    }
    if ns.contains(&0) {
        return Err(Error::param("ns", "coupon counts must be >= 1"));
    }
    if ns.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::param("ns", "coupon counts must be strictly increasing"));
    }
    if !horizon.is_finite() || horizon <= 0.0 {
        return Err(Error::param("horizon", "must be > 0"));
    }
    let base = ns.iter().copied().fold(1usize, lcm);
    let cells = base * config.steps_per_window.div_ceil(base);

    let market_c = *market;
    let barriers_c = *barriers;
    let ns_owned = ns.to_vec();
    let dim = ns.len();
    let gaps: Vec<Vec<f64>> = (0..config.n_paths)
        .into_par_iter()
        .map(|i| {
            let branch_gaps = |negate: bool| {
                let mut s = PathStream::new(config.seed, i as u64, negate);
                let (occ, fr) =
                    branch_fractions(&mut s, &market_c, &barriers_c, horizon, cells, &ns_owned);
                fr.into_iter().map(|f| (f - occ).abs()).collect::<Vec<f64>>()
            };
            let mut g = branch_gaps(false);
            if config.antithetic {
                let g2 = branch_gaps(true);
                for (a, b) in g.iter_mut().zip(g2) {
                    *a = 0.5 * (*a + b);
                }
            }
            g
        })
        .collect();

    let n_samples = config.n_paths;
    let mut rows = Vec::with_capacity(dim);
    for (ni, &n) in ns.iter().enumerate() {
        let mut mean = 0.0;
        for g in &gaps {
            mean += g[ni];
        }
        mean /= n_samples as f64;
        let mut var = 0.0;
        for g in &gaps {
            let d = g[ni] - mean;
            var += d * d;
        }
        let se = if n_samples > 1 {
            (var / ((n_samples - 1) as f64 * n_samples as f64)).sqrt()
        } else {
            0.0
        };
        rows.push(ConvergenceRow {
            n,
            mean_abs_gap: mean,
            std_error: se,
        });
    }
    Ok(rows)
}
