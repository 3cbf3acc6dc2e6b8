//! Dataset ingestion, normalization, group plans and the simulated feature stream.

mod dataset;
mod io;
mod normalize;
mod plan;
mod stream;

pub use dataset::{Dataset, Labels};
pub use io::{load_dataset, parse_csv, parse_libsvm, DataFormat, LabelSpec};
pub use normalize::{normalize_features, FeatureScaling, NormalizationReport};
pub use plan::{make_group_plan, GroupPlan, GroupStrategy};
pub use stream::{stream_groups, FeatureGroup, FeatureStream};
