use super::{DecrementalGraph, EdgeId, GraphError};
use serde::{Deserialize, Serialize};

/// Record of one weight-range reduction at distance scale `d_prime`.
///
/// Reduced weights are integers; multiplying a reduced distance by
/// `scale_factor` gives an upper estimate of the original distance that is
/// never below it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleReduction {
    pub epsilon: f64,
    pub d_prime: u64,
    pub n: usize,
    pub w_min: f64,
    pub w_max: f64,
    pub scale_factor: f64,
    pub ratio_inflation: f64,
    /// Original edge id to reduced edge id; `None` for dropped edges.
    pub edge_map: Vec<Option<EdgeId>>,
}

impl ScaleReduction {
    pub fn new(n: usize, d_prime: u64, epsilon: f64) -> Result<Self, GraphError> {
        if !(epsilon > 0.0 && epsilon <= 1.0) {
            return Err(GraphError::EpsilonOutOfRange(epsilon));
        }
        if d_prime == 0 || !d_prime.is_power_of_two() {
            return Err(GraphError::ScaleNotPowerOfTwo(d_prime));
        }
        let w_min = epsilon * d_prime as f64 / (n.max(2) - 1) as f64;
        Ok(ScaleReduction {
            epsilon,
            d_prime,
            n,
            w_min,
            w_max: 2.0 * d_prime as f64,
            scale_factor: epsilon * w_min,
            ratio_inflation: (1.0 + epsilon) * (1.0 + epsilon),
            edge_map: Vec::new(),
        })
    }

    /// Reduced integer weight of an original weight, or `None` when the edge
    /// is too heavy to lie on any path shorter than `2·d_prime`.
    pub fn reduce(&self, w: f64) -> Option<u64> {
        if w >= self.w_max {
            return None;
        }
        let raised = w.max(self.w_min);
        Some((raised / self.scale_factor).ceil().max(1.0) as u64)
    }

    /// Original-scale value of a reduced distance.
    pub fn unscale(&self, reduced: u64) -> f64 {
        reduced as f64 * self.scale_factor
    }

    /// Upper bound on the reduced distance of any original distance below `2·d_prime`.
    pub fn d_max(&self) -> u64 {
        let hops = (self.n.max(2) - 1) as f64;
        ((2.0 * self.d_prime as f64 + hops * self.w_min) / self.scale_factor).ceil() as u64 + hops as u64
    }
}

/// Drops edges of weight `≥ 2·d_prime`, raises light edges to `w_min` and
/// rescales to integers.
pub fn reduce_weight_range(
    g: &DecrementalGraph,
    d_prime: u64,
    epsilon: f64,
) -> Result<(DecrementalGraph, ScaleReduction), GraphError> {
    let mut red = ScaleReduction::new(g.n(), d_prime, epsilon)?;
    let (reduced, map) = g.filtered(|_, e| red.reduce(e.weight as f64));
    red.edge_map = map;
    Ok((reduced, red))
}
