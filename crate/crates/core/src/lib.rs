//! Clustering-based approximate maximum inner product search with learnt
//! routing.
//!
//! Documents are partitioned by one of three KMeans variants. A query is
//! routed to the `ell` highest-scoring partitions and only their members are
//! scanned. The routing scores come either from the cluster representatives
//! (the baseline) or from a linear or MLP router trained with a softmax
//! cross-entropy objective to rank the partition holding the query's nearest
//! neighbour first.

pub mod clustering;
pub mod error;
pub mod evaluation;
pub mod formats;
pub mod ivf;
pub mod learning;
pub mod seed;
pub mod synth;
pub mod vectorspace;

pub use error::{Error, Result};
pub use ivf::{IvfIndex, Router};
pub use vectorspace::{Metric, TopKResult, Vector, VectorSet};
