//! Gauss-Legendre quadrature.
//!
//! Nodes and weights are computed once per order by Newton iteration on the
//! Legendre recurrence and cached process-wide; rules are cheap to share
//! because they are immutable. All integrands in this crate are smooth, so
//! Gauss-Legendre converges spectrally.

use std::collections::HashMap;
use std::sync::Arc;

use once_cell::sync::Lazy;
use std::sync::RwLock;

use crate::error::{Error, Result};

/// A Gauss-Legendre rule on the reference interval `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

static RULE_CACHE: Lazy<RwLock<HashMap<usize, Arc<GaussLegendre>>>> =
    Lazy::new(|| RwLock::new(HashMap::new()));

impl GaussLegendre {
    /// Returns the (cached) rule with `n` nodes.
    pub fn with_nodes(n: usize) -> Result<Arc<Self>> {
        if n < 2 {
            return Err(Error::param("quad_nodes", "need at least 2 nodes"));
        }
        if let Some(rule) = RULE_CACHE.read().expect("quad cache poisoned").get(&n) {
            return Ok(Arc::clone(rule));
        }
        let rule = Arc::new(Self::compute(n));
        let mut cache = RULE_CACHE.write().expect("quad cache poisoned");
        Ok(Arc::clone(cache.entry(n).or_insert(rule)))
    }

    fn compute(n: usize) -> Self {
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let half = n.div_ceil(2);
        for i in 0..half {
            // Tricomi-style initial guess, then Newton on P_n.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    let (_, d2) = legendre_with_derivative(n, x);
                    dp = d2;
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            weights[i] = w;
            nodes[n - 1 - i] = x;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        GaussLegendre { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Nodes and weights mapped to `[a, b]`, appended to the given buffers.
    pub fn map_to(&self, a: f64, b: f64, xs: &mut Vec<f64>, ws: &mut Vec<f64>) {
        let mid = 0.5 * (a + b);
        let scale = 0.5 * (b - a);
        xs.clear();
        ws.clear();
        xs.extend(self.nodes.iter().map(|&t| mid + scale * t));
        ws.extend(self.weights.iter().map(|&w| scale * w));
    }

    /// Integrates `f` over `[a, b]`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, a: f64, b: f64, f: F) -> f64 {
        let mid = 0.5 * (a + b);
        let scale = 0.5 * (b - a);
        let sum: f64 = self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(&t, &w)| w * f(mid + scale * t))
            .sum();
        scale * sum
    }
}

/// Evaluates `(P_n(x), P_n'(x))` via the three-term recurrence.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p_prev = 1.0;
    let mut p = x;
    for k in 2..=n {
        let kf = k as f64;
        let p_next = ((2.0 * kf - 1.0) * x * p - (kf - 1.0) * p_prev) / kf;
        p_prev = p;
        p = p_next;
    }
    let d = n as f64 * (x * p - p_prev) / (x * x - 1.0);
    (p, d)
}
