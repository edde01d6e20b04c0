//! Decremental approximate single-source shortest paths: per-scale
//! structures and the estimator combining them.

pub mod combiner;
pub mod exact;
pub mod flex;
pub mod order;
pub mod params;
pub mod sparse;
pub mod weighted;
mod walk;

pub use combiner::{distance_cap, CombinedEstimator, EstimatorCounters, Scale, ScaleStructure};
pub use exact::ExactScale;
pub use weighted::{Reduced, WeightedEstimator};
pub use flex::{FlexCounters, FlexScale, PathProfile};
pub use order::{order_sets, OrderError, TopOrder};
pub use sparse::{SparseCounters, SparseScale, SuperRecord};
pub use params::{eta, eta_base, geometric_level, paper_formulas, select_parameters, select_weighted, ParamSet, Preset, RawParams, Variant};

use crate::approx_es::ApproxEsError;
use crate::decomp::DecompError;
use crate::estree::EsError;
use crate::graph::GraphError;
use crate::multigraph::MultigraphError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SsspError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Decomp(#[from] DecompError),
    #[error(transparent)]
    Multigraph(#[from] MultigraphError),
    #[error(transparent)]
    ApproxEs(#[from] ApproxEsError),
    #[error(transparent)]
    Order(#[from] OrderError),
    #[error(transparent)]
    Es(#[from] EsError),
    #[error("source {0} is not a vertex")]
    Source(usize),
    #[error("the {} variant does not report paths", .0.name())]
    PathNotOffered(Variant),
    #[error("scale {0} falls back to an exact tree")]
    Fallback(u64),
    #[error("internal inconsistency: {0}")]
    Inconsistent(&'static str),
}
