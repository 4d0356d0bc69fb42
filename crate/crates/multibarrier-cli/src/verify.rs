//! Contract-level oracle cross-checks behind `--verify` and the `verify`
//! command: every check reprices the given contract through an independent
//! route and reports pass/fail.

use anyhow::Result;

use multibarrier::floor::FloorValuation;
use multibarrier::mc::{
    estimate_bd_price, estimate_bd_price_extrapolated, estimate_coupon_moments_extrapolated,
    estimate_coupon_pmf_extrapolated,
};
use multibarrier::pricer::nested::price_two_period_nested;
use multibarrier::pricer::price_multi_period;
use multibarrier::reflection::price_one_period_reflection;

use crate::config::PricingJob;
use crate::report::{CheckReport, McCheck, PmfReport};

fn check(name: &str, passed: bool, detail: String) -> CheckReport {
    CheckReport {
        name: name.into(),
        passed,
        detail,
    }
}

fn skipped(name: &str, why: &str) -> CheckReport {
    check(name, true, format!("skipped: {why}"))
}

/// Largest stride in {4, 2} dividing the step count, if any; the
/// extrapolated estimators need a coarser nested grid.
fn extrapolation_stride(steps_per_window: usize) -> Option<usize> {
    [4usize, 2].into_iter().find(|s| steps_per_window.is_multiple_of(*s))
}

/// Cross-checks for a digital price: discount bound, concatenation
/// invariance, Monte Carlo agreement, and (where the schedule shape allows)
/// the image-charges and literal nested-quadrature routes.
pub fn digital_checks(job: &PricingJob, price: f64) -> Result<(Vec<CheckReport>, Option<McCheck>)> {
    let mut checks = Vec::new();
    let mut mc_check = None;

    let df = (-job.market.rate() * (job.schedule.end() - job.valuation_time)).exp();
    checks.push(check(
        "discount-bound",
        (0.0..=df * (1.0 + 1e-9)).contains(&price),
        format!("0 <= {price:.10} <= {df:.10}"),
    ));

    let merged = job.schedule.concatenated();
    let merged_price = price_multi_period(
        &job.market,
        &job.barriers,
        &merged,
        job.valuation_time,
        job.spot_at_t,
        job.pricing.k_max,
        job.pricing.quad_nodes,
    )?
    .price;
    checks.push(check(
        "concatenation-invariance",
        (price - merged_price).abs() <= 1e-10,
        format!("|{price:.12} - {merged_price:.12}| = {:.2e}", (price - merged_price).abs()),
    ));

    let tol = 1e-12 * job.schedule.first_start().abs().max(1.0);
    if job.valuation_time <= job.schedule.first_start() + tol {
        let est = match extrapolation_stride(job.mc.steps_per_window) {
            Some(stride) => estimate_bd_price_extrapolated(
                &job.market,
                &job.barriers,
                &job.schedule,
                job.valuation_time,
                &job.mc,
                stride,
            )?,
            None => estimate_bd_price(
                &job.market,
                &job.barriers,
                &job.schedule,
                job.valuation_time,
                &job.mc,
            )?,
        };
        let z = (price - est.mean).abs() / est.std_error.max(1e-300);
        checks.push(check(
            "mc-agreement",
            z <= 3.0,
            format!("analytic {price:.6} vs MC {:.6} +- {:.6}, z = {z:.2}", est.mean, est.std_error),
        ));
        mc_check = Some(McCheck {
            mean: est.mean,
            std_error: est.std_error,
            n_paths: est.n_paths,
            z_score: Some(z),
        });
    } else {
        checks.push(skipped("mc-agreement", "valuation is not before the first window"));
    }

    if merged.len() == 1 && job.valuation_time < merged.first_start() {
        let w = merged.windows()[0];
        let refl = price_one_period_reflection(
            &job.market,
            &job.barriers,
            w.start(),
            w.length(),
            job.valuation_time,
            job.spot_at_t,
        )?;
        checks.push(check(
            "reflection-agreement",
            (price - refl).abs() <= 1e-8,
            format!("series {price:.12} vs image charges {refl:.12}"),
        ));
    } else {
        checks.push(skipped(
            "reflection-agreement",
            "needs a single window and valuation before it",
        ));
    }

    if merged.len() == 2 && job.valuation_time < merged.first_start() {
        let nested = price_two_period_nested(
            &job.market,
            &job.barriers,
            &merged,
            job.valuation_time,
            job.spot_at_t,
            job.pricing.k_max,
            96,
        )?
        .price;
        checks.push(check(
            "nested-quadrature-agreement",
            (price - nested).abs() <= 1e-6,
            format!("operator {price:.10} vs literal {nested:.10}"),
        ));
    } else {
        checks.push(skipped(
            "nested-quadrature-agreement",
            "needs exactly two windows and valuation before them",
        ));
    }

    Ok((checks, mc_check))
}

/// Monte Carlo cross-checks of the recovered coupon law and its moments.
/// Returns the checks plus the MC columns for the pmf table.
pub fn floor_checks(
    job: &PricingJob,
    val: &FloorValuation,
) -> Result<(Vec<CheckReport>, PmfReport)> {
    let mut checks = Vec::new();
    let n = job.schedule.len();

    let total: f64 = val.pmf.probs().iter().sum();
    checks.push(check(
        "pmf-normalization",
        (total - 1.0).abs() <= 1e-9 && val.pmf.residual() <= 1e-7,
        format!(
            "sum - 1 = {:+.1e}, pre-clip violation {:.1e}",
            total - 1.0,
            val.pmf.residual()
        ),
    ));

    let mut pmf_report = PmfReport {
        probs: val.pmf.probs().to_vec(),
        residual: val.pmf.residual(),
        condition_estimate: val.pmf.condition_estimate(),
        expected_coupons: val.expected_coupons(),
        mc_probs: None,
        mc_std_errors: None,
        z_scores: None,
    };

    let Some(stride) = extrapolation_stride(job.mc.steps_per_window) else {
        checks.push(skipped("pmf-mc-agreement", "steps_per_window not divisible by 2"));
        return Ok((checks, pmf_report));
    };

    let mc_pmf = estimate_coupon_pmf_extrapolated(
        &job.market,
        &job.barriers,
        &job.schedule,
        &job.mc,
        stride,
    )?;
    let z_scores: Vec<f64> = (0..=n)
        .map(|i| (val.pmf.probs()[i] - mc_pmf.probs[i]) / mc_pmf.std_errors[i].max(1e-300))
        .collect();
    let max_z = z_scores.iter().fold(0.0f64, |a, z| a.max(z.abs()));
    checks.push(check(
        "pmf-mc-agreement",
        max_z <= 3.0,
        format!("worst per-bin |z| = {max_z:.2} over {} bins", n + 1),
    ));

    let nu_max = (n - 1).min(3) as u32;
    if nu_max >= 1 {
        let mc_moments = estimate_coupon_moments_extrapolated(
            &job.market,
            &job.barriers,
            &job.schedule,
            &job.mc,
            stride,
            nu_max,
        )?;
        let mut worst = 0.0f64;
        for (nu, mc) in mc_moments.iter().enumerate().skip(1) {
            let z = (val.moments.values()[nu] - mc.mean).abs() / mc.std_error.max(1e-300);
            worst = worst.max(z);
        }
        checks.push(check(
            "moment-mc-agreement",
            worst <= 3.0,
            format!("worst |z| = {worst:.2} over moments 1..={nu_max}"),
        ));
    }

    pmf_report.mc_probs = Some(mc_pmf.probs.clone());
    pmf_report.mc_std_errors = Some(mc_pmf.std_errors.clone());
    pmf_report.z_scores = Some(z_scores);
    Ok((checks, pmf_report))
}
