//! Command-line front end: parses a contract/market config, dispatches to
//! the pricers and emits a human-readable or machine-readable report.
//!
//! Exit status: 0 when the result is priced and every requested check
//! passes; 2 when a verification check fails; 3 when the contract is already
//! knocked out at valuation; 1 for configuration or numerical errors.

mod config;
mod report;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::Parser;

use multibarrier::corridor::approx_floor_via_corridor;
use multibarrier::floor::price_structure_floor;
use multibarrier::pricer::{price_multi_period, PriceStatus};

use config::{load_job, Command, Overrides, PricingJob};
use report::{CorridorReport, Diagnostics, McCheck, Report, SCHEMA_VERSION};

/// Pricer for digital double-barrier options with multiple barrier windows,
/// structure floors on barrier-coupon notes, and their corridor
/// approximation. Flags can also be set through MULTIBARRIER_* environment
/// variables.
#[derive(Debug, Parser)]
#[command(name = "multibarrier", version)]
struct Cli {
    /// Contract/market configuration file (TOML)
    #[arg(long, env = "MULTIBARRIER_CONFIG")]
    config: PathBuf,

    /// What to compute
    #[arg(long, value_enum, env = "MULTIBARRIER_COMMAND")]
    command: Command,

    /// Run the oracle cross-checks appropriate to the command
    #[arg(long, env = "MULTIBARRIER_VERIFY")]
    verify: bool,

    /// Emit the machine-readable JSON report instead of the table
    #[arg(long, env = "MULTIBARRIER_JSON")]
    json: bool,

    /// Override the RNG seed
    #[arg(long, env = "MULTIBARRIER_SEED")]
    seed: Option<u64>,

    /// Override the Monte Carlo path count
    #[arg(long, env = "MULTIBARRIER_PATHS")]
    paths: Option<usize>,

    /// Override the sine-series mode cap
    #[arg(long, env = "MULTIBARRIER_KMAX")]
    kmax: Option<usize>,

    /// Override the quadrature node count
    #[arg(long, env = "MULTIBARRIER_NODES")]
    nodes: Option<usize>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(report) => {
            if cli.json {
                println!("{}", report.to_json());
            } else {
                print!("{}", report.render_human());
            }
            if report.status != "priced" {
                ExitCode::from(3)
            } else if !report.all_checks_pass() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: &Cli) -> Result<Report> {
    let text = std::fs::read_to_string(&cli.config)
        .with_context(|| format!("cannot read config {}", cli.config.display()))?;
    let job = load_job(
        &text,
        cli.command,
        cli.verify,
        Overrides {
            seed: cli.seed,
            paths: cli.paths,
            k_max: cli.kmax,
            quad_nodes: cli.nodes,
        },
    )?;
    match job.command {
        Command::PriceDigital => price_digital(&job),
        Command::PriceFloor => price_floor(&job),
        Command::PriceCorridor => price_corridor(&job),
        Command::Verify => run_verify(&job),
    }
}

fn base_report(job: &PricingJob) -> Report {
    Report {
        schema_version: SCHEMA_VERSION,
        command: job.command.name().into(),
        status: "priced".into(),
        price: 0.0,
        diagnostics: None,
        mc_check: None,
        moments: None,
        pmf: None,
        corridor: None,
        checks: Vec::new(),
        seed: job.mc.seed,
        n_paths: job.mc.n_paths,
    }
}

fn price_digital(job: &PricingJob) -> Result<Report> {
    let res = price_multi_period(
        &job.market,
        &job.barriers,
        &job.schedule,
        job.valuation_time,
        job.spot_at_t,
        job.pricing.k_max,
        job.pricing.quad_nodes,
    )?;
    let mut report = base_report(job);
    report.price = res.price;
    report.diagnostics = Some(Diagnostics {
        truncation_bound: res.truncation_bound,
        quadrature_error: res.quadrature_error,
    });
    if res.status == PriceStatus::KnockedOut {
        report.status = "knocked_out".into();
        return Ok(report);
    }
    if job.verify {
        let (checks, mc) = verify::digital_checks(job, res.price)?;
        report.checks = checks;
        report.mc_check = mc;
    }
    Ok(report)
}

fn price_floor(job: &PricingJob) -> Result<Report> {
    let floor = job.floor.expect("validated at load time");
    let val = price_structure_floor(
        &job.market,
        &job.barriers,
        &job.schedule,
        floor,
        job.valuation_time,
        &job.pricing,
    )?;
    let mut report = base_report(job);
    report.price = val.result.price;
    report.moments = Some(val.moments.values().to_vec());
    if job.verify {
        let (checks, pmf) = verify::floor_checks(job, &val)?;
        report.checks = checks;
        report.pmf = Some(pmf);
    } else {
        report.pmf = Some(report::PmfReport {
            probs: val.pmf.probs().to_vec(),
            residual: val.pmf.residual(),
            condition_estimate: val.pmf.condition_estimate(),
            expected_coupons: val.expected_coupons(),
            mc_probs: None,
            mc_std_errors: None,
            z_scores: None,
        });
    }
    Ok(report)
}

fn price_corridor(job: &PricingJob) -> Result<Report> {
    let floor = job.floor.expect("validated at load time");
    let est = approx_floor_via_corridor(
        &job.market,
        &job.barriers,
        job.corridor_horizon,
        job.corridor_coupons,
        floor,
        &job.mc,
    )?;
    let mut report = base_report(job);
    report.price = est.mean;
    report.mc_check = Some(McCheck {
        mean: est.mean,
        std_error: est.std_error,
        n_paths: est.n_paths,
        z_score: None,
    });
    report.corridor = Some(CorridorReport {
        horizon: job.corridor_horizon,
        coupons: job.corridor_coupons,
        strike: floor / job.corridor_coupons as f64,
        occupation_put: est.mean / job.corridor_coupons as f64,
        occupation_put_std_error: est.std_error / job.corridor_coupons as f64,
    });
    if job.verify {
        let df = (-job.market.rate() * job.corridor_horizon).exp();
        let bound = df * floor;
        report.checks.push(report::CheckReport {
            name: "corridor-payoff-bound".into(),
            passed: (0.0..=bound * (1.0 + 1e-9)).contains(&est.mean),
            detail: format!("0 <= {:.6} <= df * F = {bound:.6}", est.mean),
        });
    }
    Ok(report)
}

fn run_verify(job: &PricingJob) -> Result<Report> {
    let res = price_multi_period(
        &job.market,
        &job.barriers,
        &job.schedule,
        job.valuation_time,
        job.spot_at_t,
        job.pricing.k_max,
        job.pricing.quad_nodes,
    )?;
    let mut report = base_report(job);
    report.price = res.price;
    report.diagnostics = Some(Diagnostics {
        truncation_bound: res.truncation_bound,
        quadrature_error: res.quadrature_error,
    });
    if res.status == PriceStatus::KnockedOut {
        report.status = "knocked_out".into();
        return Ok(report);
    }
    let (mut checks, mc) = verify::digital_checks(job, res.price)?;
    report.mc_check = mc;
    if let Some(floor) = job.floor {
        let val = price_structure_floor(
            &job.market,
            &job.barriers,
            &job.schedule,
            floor,
            job.valuation_time,
            &job.pricing,
        )?;
        report.moments = Some(val.moments.values().to_vec());
        let (floor_checks, pmf) = verify::floor_checks(job, &val)?;
        checks.extend(floor_checks);
        report.pmf = Some(pmf);
    }
    report.checks = checks;
    Ok(report)
}
