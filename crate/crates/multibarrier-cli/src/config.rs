//! Contract/market configuration file (TOML) and its validation into the
//! library's domain types.

use anyhow::{anyhow, bail, Context, Result};
use serde::Deserialize;

use multibarrier::constants;
use multibarrier::floor::PricingParams;
use multibarrier::mc::McConfig;
use multibarrier::{BarrierSchedule, BarrierSpec, MarketParams, Window};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    market: RawMarket,
    barriers: RawBarriers,
    schedule: RawSchedule,
    #[serde(default)]
    valuation: RawValuation,
    floor: Option<RawFloor>,
    corridor: Option<RawCorridor>,
    #[serde(default)]
    numerics: RawNumerics,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMarket {
    spot: f64,
    rate: f64,
    vol: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBarriers {
    low: f64,
    up: f64,
}

/// Either an explicit window list or a tenor list with one period length.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSchedule {
    windows: Option<Vec<(f64, f64)>>,
    tenors: Option<Vec<f64>>,
    period: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawValuation {
    #[serde(default)]
    time: f64,
    spot: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFloor {
    level: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCorridor {
    horizon: Option<f64>,
    coupons: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNumerics {
    k_max: Option<usize>,
    quad_nodes: Option<usize>,
    n_paths: Option<usize>,
    steps_per_window: Option<usize>,
    seed: Option<u64>,
    antithetic: Option<bool>,
}

/// Command selected on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    PriceDigital,
    PriceFloor,
    PriceCorridor,
    Verify,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::PriceDigital => "price-digital",
            Command::PriceFloor => "price-floor",
            Command::PriceCorridor => "price-corridor",
            Command::Verify => "verify",
        }
    }
}

/// A fully validated pricing job.
#[derive(Debug, Clone)]
pub struct PricingJob {
    pub command: Command,
    pub market: MarketParams,
    pub barriers: BarrierSpec,
    pub schedule: BarrierSchedule,
    pub floor: Option<f64>,
    pub corridor_horizon: f64,
    pub corridor_coupons: usize,
    pub valuation_time: f64,
    pub spot_at_t: f64,
    pub pricing: PricingParams,
    pub mc: McConfig,
    pub verify: bool,
}

/// Command-line / environment overrides applied on top of the config file.
#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub paths: Option<usize>,
    pub k_max: Option<usize>,
    pub quad_nodes: Option<usize>,
}

pub fn load_job(
    text: &str,
    command: Command,
    verify: bool,
    overrides: Overrides,
) -> Result<PricingJob> {
    let raw: RawConfig = toml::from_str(text).context("failed to parse config file")?;

    let market = MarketParams::new(raw.market.spot, raw.market.rate, raw.market.vol)
        .map_err(|e| anyhow!("[market] {e}"))?;
    let barriers = BarrierSpec::new(raw.barriers.low, raw.barriers.up)
        .map_err(|e| anyhow!("[barriers] {e}"))?;

    let schedule = match (&raw.schedule.windows, &raw.schedule.tenors) {
        (Some(ws), None) => {
            let windows = ws
                .iter()
                .map(|&(s, l)| Window::new(s, l))
                .collect::<multibarrier::Result<Vec<_>>>()
                .map_err(|e| anyhow!("[schedule.windows] {e}"))?;
            BarrierSchedule::new(windows).map_err(|e| anyhow!("[schedule.windows] {e}"))?
        }
        (None, Some(tenors)) => {
            let period = raw
                .schedule
                .period
                .ok_or_else(|| anyhow!("[schedule] tenors require a period"))?;
            BarrierSchedule::from_tenors(tenors, period)
                .map_err(|e| anyhow!("[schedule.tenors] {e}"))?
        }
        (Some(_), Some(_)) => {
            bail!("[schedule] give either windows or tenors + period, not both")
        }
        (None, None) => bail!("[schedule] missing: give windows or tenors + period"),
    };

    let valuation_time = raw.valuation.time;
    if !valuation_time.is_finite() || valuation_time < 0.0 {
        bail!("[valuation.time] must be >= 0");
    }
    let spot_at_t = raw.valuation.spot.unwrap_or(market.spot());
    if !spot_at_t.is_finite() || spot_at_t <= 0.0 {
        bail!("[valuation.spot] must be > 0");
    }

    let floor = match &raw.floor {
        Some(f) if f.level > 0.0 && f.level.is_finite() => Some(f.level),
        Some(f) => bail!("[floor.level] must be > 0, got {}", f.level),
        None => None,
    };
    if matches!(command, Command::PriceFloor | Command::PriceCorridor) && floor.is_none() {
        bail!("[floor] section with level is required for {}", command.name());
    }

    let corridor_horizon = raw
        .corridor
        .as_ref()
        .and_then(|c| c.horizon)
        .unwrap_or(schedule.end() - valuation_time);
    if !corridor_horizon.is_finite() || corridor_horizon <= 0.0 {
        bail!("[corridor.horizon] must be > 0");
    }
    let corridor_coupons = raw
        .corridor
        .as_ref()
        .and_then(|c| c.coupons)
        .unwrap_or(schedule.len());

    let pricing = PricingParams {
        k_max: overrides
            .k_max
            .or(raw.numerics.k_max)
            .unwrap_or(constants::DEFAULT_K_MAX),
        quad_nodes: overrides
            .quad_nodes
            .or(raw.numerics.quad_nodes)
            .unwrap_or(constants::DEFAULT_QUAD_NODES),
    };
    if pricing.k_max == 0 {
        bail!("[numerics.k_max] must be >= 1");
    }
    if pricing.quad_nodes < 8 {
        bail!("[numerics.quad_nodes] must be >= 8");
    }
    let mc = McConfig {
        n_paths: overrides
            .paths
            .or(raw.numerics.n_paths)
            .unwrap_or(constants::DEFAULT_N_PATHS),
        steps_per_window: raw
            .numerics
            .steps_per_window
            .unwrap_or(constants::DEFAULT_STEPS_PER_WINDOW),
        seed: overrides
            .seed
            .or(raw.numerics.seed)
            .unwrap_or(constants::DEFAULT_SEED),
        antithetic: raw.numerics.antithetic.unwrap_or(false),
    };
    if mc.n_paths == 0 {
        bail!("[numerics.n_paths] must be >= 1");
    }
    if mc.steps_per_window == 0 {
        bail!("[numerics.steps_per_window] must be >= 1");
    }

    Ok(PricingJob {
        command,
        market,
        barriers,
        schedule,
        floor,
        corridor_horizon,
        corridor_coupons,
        valuation_time,
        spot_at_t,
        pricing,
        mc,
        verify,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOOD: &str = r#"
        [market]
        spot = 100.0
        rate = 0.03
        vol = 0.25

        [barriers]
        low = 80.0
        up = 125.0

        [schedule]
        windows = [[0.25, 0.25], [0.75, 0.25]]
    "#;

    #[test]
    fn parses_minimal_config() {
        let job = load_job(GOOD, Command::PriceDigital, false, Overrides::default()).unwrap();
        assert_eq!(job.schedule.len(), 2);
        assert_eq!(job.mc.seed, constants::DEFAULT_SEED);
        assert_eq!(job.pricing.k_max, constants::DEFAULT_K_MAX);
        assert_eq!(job.spot_at_t, 100.0);
    }

    #[test]
    fn rejects_inverted_barriers_with_field_label() {
        let bad = GOOD.replace("up = 125.0", "up = 70.0");
        let err = load_job(&bad, Command::PriceDigital, false, Overrides::default())
            .unwrap_err()
            .to_string();
        assert!(err.contains("[barriers]"), "{err}");
    }

    #[test]
    fn tenor_form_builds_schedule() {
        let cfg = r#"
            [market]
            spot = 100.0
            rate = 0.03
            vol = 0.25
            [barriers]
            low = 80.0
            up = 125.0
            [schedule]
            tenors = [0.25, 0.5, 0.75, 1.0]
            period = 0.25
            [floor]
            level = 2.0
        "#;
        let job = load_job(cfg, Command::PriceFloor, false, Overrides::default()).unwrap();
        assert_eq!(job.schedule.len(), 4);
        assert_eq!(job.floor, Some(2.0));
        assert_eq!(job.corridor_coupons, 4);
    }

    #[test]
    fn floor_command_requires_floor_section() {
        let err = load_job(GOOD, Command::PriceFloor, false, Overrides::default()).unwrap_err();
        assert!(err.to_string().contains("[floor]"));
    }

    #[test]
    fn overrides_beat_config() {
        let cfg = format!("{GOOD}\n[numerics]\nseed = 7\nn_paths = 1000\n");
        let job = load_job(
            &cfg,
            Command::PriceDigital,
            false,
            Overrides {
                seed: Some(99),
                paths: Some(500),
                k_max: None,
                quad_nodes: None,
            },
        )
        .unwrap();
        assert_eq!(job.mc.seed, 99);
        assert_eq!(job.mc.n_paths, 500);
    }

    #[test]
    fn unknown_keys_are_parse_errors() {
        let bad = format!("{GOOD}\n[market2]\nx = 1\n");
        assert!(load_job(&bad, Command::PriceDigital, false, Overrides::default()).is_err());
    }
}
