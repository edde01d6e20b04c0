//! Weighted graphs: one weight-range reduction per distance scale, each with
//! its own combined estimator, answered in original units.

use super::combiner::CombinedEstimator;
use super::params::{Preset, Variant};
use super::SsspError;
use crate::graph::{reduce_weight_range, DecrementalGraph, EdgeId, ScaleReduction};

#[derive(Debug, Clone)]
pub struct Reduced {
    pub reduction: ScaleReduction,
    pub estimator: CombinedEstimator,
}

#[derive(Debug, Clone)]
pub struct WeightedEstimator {
    source: usize,
    levels: Vec<Reduced>,
}

impl WeightedEstimator {
    /// One reduction per power of two `D′` up to `(n − 1)·max weight`.
    pub fn new(
        g: &DecrementalGraph,
        source: usize,
        variant: Variant,
        preset: Preset,
        epsilon: f64,
        c_param: f64,
        seed: u64,
    ) -> Result<Self, SsspError> {
        if source >= g.n() {
            return Err(SsspError::Source(source));
        }
        let top = super::combiner::distance_cap(g).max(1);
        let mut levels = Vec::new();
        let mut d_prime = 1u64;
        loop {
            let (reduced, reduction) = reduce_weight_range(g, d_prime, epsilon)?;
            let cap = reduction.d_max();
            let estimator = CombinedEstimator::with_cap(
                &reduced,
                source,
                variant,
                preset,
                epsilon,
                c_param,
                seed.wrapping_add(d_prime),
                cap,
                |p| p,
            )?;
            levels.push(Reduced { reduction, estimator });
            if d_prime >= top {
                break;
            }
            d_prime *= 2;
        }
        Ok(WeightedEstimator { source, levels })
    }

    pub fn levels(&self) -> &[Reduced] {
        &self.levels
    }

    pub fn delete(&mut self, e: EdgeId) -> Result<(), SsspError> {
        for lv in &mut self.levels {
            if let Some(Some(r)) = lv.reduction.edge_map.get(e) {
                lv.estimator.delete(*r)?;
            }
        }
        Ok(())
    }

    /// Estimate in original units; `None` means unreachable.
    pub fn query(&self, u: usize) -> Option<f64> {
        if u == self.source {
            return Some(0.0);
        }
        self.levels
            .iter()
            .filter_map(|lv| lv.estimator.query(u).map(|q| lv.reduction.unscale(q)))
            .min_by(|a, b| a.total_cmp(b))
    }

    /// Walk from the source to `u` through the reduction giving its estimate.
    pub fn report_path(&mut self, u: usize) -> Result<Option<Vec<usize>>, SsspError> {
        if u == self.source {
            return Ok(Some(vec![u]));
        }
        let best = self
            .levels
            .iter()
            .enumerate()
            .filter_map(|(i, lv)| lv.estimator.query(u).map(|q| (lv.reduction.unscale(q), i)))
            .min_by(|a, b| a.0.total_cmp(&b.0));
        let Some((_, i)) = best else { return Ok(None) };
        self.levels[i].estimator.report_path(u)
    }
}
