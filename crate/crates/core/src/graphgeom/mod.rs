//! Metric geometry of graphs in `chart x CP^m`.
//!
//! Sources are affine charts with the Euclidean metric, targets carry the
//! chordal Fubini-Study metric (normalized so that `CP^1` has area `pi`),
//! and `chart x target` the sum metric.

mod cloud;
mod hausdorff;
mod lowdisc;
mod metric;
mod project;
mod region;
mod volume;

use thiserror::Error;

pub use cloud::{graph_from_sources, sample_graph, sample_sources, GraphCloud, GraphPoint, SampleOptions};
pub use hausdorff::{directed, hausdorff, hausdorff_brute, NearestIndex};
pub use lowdisc::LowDiscrepancy;
pub(crate) use lowdisc::splitmix64;
pub use metric::{fs_distance, MetricSpec};
pub use project::{graph_distance, newton_distance, GraphDistance, ProjectionOptions};
pub use region::{CompactRegion, Excision, Shape};
pub use volume::{marginal_mass, marginal_mass_csv, volume, Breakdown, VolumeEstimate, VolumeOptions};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeomError {
    #[error("no sample points survive in the region")]
    RegionEmpty,
    #[error("clouds use different regions or metrics")]
    MetricMismatch,
    #[error("unsupported source dimension {0}")]
    UnsupportedDimension(usize),
}
