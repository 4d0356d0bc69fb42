//! Report schema (versioned) and the human/JSON renderers.
//!
//! The JSON document is deterministic for a fixed config and seed: field
//! order is fixed by the struct, floats print via shortest-round-trip, and
//! nothing time- or host-dependent is included.

use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Report {
    pub schema_version: u32,
    pub command: String,
    pub status: String,
    pub price: f64,
    pub diagnostics: Option<Diagnostics>,
    pub mc_check: Option<McCheck>,
    pub moments: Option<Vec<f64>>,
    pub pmf: Option<PmfReport>,
    pub corridor: Option<CorridorReport>,
    pub checks: Vec<CheckReport>,
    pub seed: u64,
    pub n_paths: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Diagnostics {
    pub truncation_bound: f64,
    pub quadrature_error: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct McCheck {
    pub mean: f64,
    pub std_error: f64,
    pub n_paths: usize,
    pub z_score: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct PmfReport {
    /// Recovered `P[A = i]`, `i = 0..=n`.
    pub probs: Vec<f64>,
    pub residual: f64,
    pub condition_estimate: f64,
    pub expected_coupons: f64,
    /// Monte Carlo cross-check, present under `--verify`.
    pub mc_probs: Option<Vec<f64>>,
    pub mc_std_errors: Option<Vec<f64>>,
    pub z_scores: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CorridorReport {
    pub horizon: f64,
    pub coupons: usize,
    pub strike: f64,
    pub occupation_put: f64,
    pub occupation_put_std_error: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CheckReport {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Report {
    pub fn all_checks_pass(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn render_human(&self) -> String {
        let mut out = String::new();
        let mut line = |s: String| {
            out.push_str(&s);
            out.push('\n');
        };
        line(format!("command          {}", self.command));
        line(format!("status           {}", self.status));
        line(format!("price            {:.10}", self.price));
        if let Some(d) = &self.diagnostics {
            line(format!("truncation bound {:.3e}", d.truncation_bound));
            line(format!("quadrature error {:.3e}", d.quadrature_error));
        }
        if let Some(mc) = &self.mc_check {
            line(format!(
                "mc estimate      {:.10} +- {:.3e}  ({} paths{})",
                mc.mean,
                mc.std_error,
                mc.n_paths,
                mc.z_score
                    .map(|z| format!(", z = {z:.2}"))
                    .unwrap_or_default()
            ));
        }
        if let Some(m) = &self.moments {
            let vals: Vec<String> = m.iter().map(|v| format!("{v:.6}")).collect();
            line(format!("moments          [{}]", vals.join(", ")));
        }
        if let Some(p) = &self.pmf {
            line(format!("expected coupons {:.6}", p.expected_coupons));
            line("coupon law:".to_string());
            for (i, prob) in p.probs.iter().enumerate() {
                let mut row = format!("  P[A={i}]        {prob:.6}");
                if let (Some(mc), Some(se)) = (&p.mc_probs, &p.mc_std_errors) {
                    row.push_str(&format!("   mc {:.6} +- {:.6}", mc[i], se[i]));
                }
                if let Some(z) = &p.z_scores {
                    row.push_str(&format!("   z = {:+.2}", z[i]));
                }
                line(row);
            }
            line(format!(
                "recovery         residual {:.2e}, condition proxy {:.2e}",
                p.residual, p.condition_estimate
            ));
        }
        if let Some(c) = &self.corridor {
            line(format!(
                "corridor         horizon {} y, {} coupons, strike {:.6}",
                c.horizon, c.coupons, c.strike
            ));
            line(format!(
                "occupation put   {:.10} +- {:.3e}",
                c.occupation_put, c.occupation_put_std_error
            ));
        }
        if !self.checks.is_empty() {
            line("checks:".to_string());
            for c in &self.checks {
                line(format!(
                    "  [{}] {} — {}",
                    if c.passed { "pass" } else { "FAIL" },
                    c.name,
                    c.detail
                ));
            }
        }
        line(format!("seed             {}", self.seed));
        out
    }
}
