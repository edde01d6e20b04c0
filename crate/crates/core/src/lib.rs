//! Decremental approximate single-source shortest paths on directed graphs.

pub mod approx_es;
pub mod cli;
pub mod decomp;
pub mod estree;
pub mod graph;
pub mod multigraph;
pub mod oracle;
pub mod pq;
pub mod separators;
pub mod subgraph;
pub mod sssp;
