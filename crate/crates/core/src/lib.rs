//! Dynamic cluster tracking for time series of clusterings.
//!
//! A [`ClusteringSequence`] holds one partition of the observed members per
//! snapshot. [`track`] links clusters across snapshots into dynamic clusters
//! using bijective majority matches that may reach up to `history` snapshots
//! back, absorbing transient splinters and transitions into the persistent
//! structure they belong to. The [`lifecycle`] module scores and describes
//! the result, [`render`] draws it as an alluvial diagram.

mod error;

pub mod dynamic;
pub mod lifecycle;
pub mod oracle;
pub mod render;
pub mod report;
pub mod similarity;
pub mod snapshot;
pub mod sweep;
pub mod synthetic;
pub mod tracking;

pub use dynamic::{DcId, DcTrack, DynamicClustering};
pub use error::{Error, Result};
pub use similarity::Relations;
pub use snapshot::{ClusterRef, ClusteringSequence, InputFormat, MemberId, Snapshot};
pub use tracking::{track, TrackingState};
