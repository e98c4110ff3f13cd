//! Versioned result documents exchanged between tracking, rendering and
//! event extraction.

use serde::{Deserialize, Serialize};

use crate::dynamic::{DcId, DynamicClustering};
use crate::error::{Error, Result};
use crate::snapshot::{ClusteringSequence, RawSnapshot};

pub const SCHEMA_VERSION: u32 = 1;
pub const TOOL: &str = "dynatrack";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClusterEntry {
    pub dc: DcId,
    pub members: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnapshotEntry {
    pub index: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub clusters: Vec<ClusterEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DcEntry {
    pub id: DcId,
    pub first: usize,
    pub last: usize,
    pub lifespan: usize,
    /// `[time, cluster]` pairs in time order.
    pub clusters: Vec<[usize; 2]>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultDocument {
    pub schema: u32,
    pub tool: String,
    pub version: String,
    pub history: usize,
    pub snapshot_count: usize,
    pub snapshots: Vec<SnapshotEntry>,
    pub dcs: Vec<DcEntry>,
}

impl ResultDocument {
    pub fn new(seq: &ClusteringSequence, dc: &DynamicClustering) -> Self {
        let snapshots = seq
            .to_raw()
            .into_iter()
            .enumerate()
            .map(|(t, raw)| SnapshotEntry {
                index: t,
                label: raw.label,
                clusters: raw
                    .clusters
                    .into_iter()
                    .zip(&dc.labels()[t])
                    .map(|(members, &id)| ClusterEntry { dc: id, members })
                    .collect(),
            })
            .collect();
        let dcs = dc
            .dcs()
            .iter()
            .map(|track| DcEntry {
                id: track.id,
                first: track.first(),
                last: track.last(),
                lifespan: track.lifespan(),
                clusters: track
                    .presence
                    .iter()
                    .zip(&track.clusters)
                    .flat_map(|(&t, cs)| cs.iter().map(move |&c| [t, c]))
                    .collect(),
            })
            .collect();
        ResultDocument {
            schema: SCHEMA_VERSION,
            tool: TOOL.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            history: dc.history(),
            snapshot_count: seq.len(),
            snapshots,
            dcs,
        }
    }

    pub fn to_json(&self) -> String {
        let mut out = serde_json::to_string_pretty(self).expect("result document serializes");
        out.push('\n');
        out
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ResultDocument =
            serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
        if doc.schema != SCHEMA_VERSION {
            return Err(Error::Schema(format!(
                "unsupported schema version {} (expected {SCHEMA_VERSION})",
                doc.schema
            )));
        }
        if doc.snapshot_count != doc.snapshots.len() {
            return Err(Error::Schema(format!(
                "snapshot_count is {} but {} snapshots are listed",
                doc.snapshot_count,
                doc.snapshots.len()
            )));
        }
        Ok(doc)
    }

    /// Rebuilds the clustering sequence and its labeling. Labels are
    /// canonicalized again, so hand-edited ids are accepted.
    pub fn into_parts(self) -> Result<(ClusteringSequence, DynamicClustering)> {
        let mut raw = Vec::with_capacity(self.snapshots.len());
        let mut labels = Vec::with_capacity(self.snapshots.len());
        for (t, snap) in self.snapshots.into_iter().enumerate() {
            if snap.index != t {
                return Err(Error::Schema(format!(
                    "snapshot {t} is listed with index {}",
                    snap.index
                )));
            }
            labels.push(snap.clusters.iter().map(|c| c.dc.0).collect::<Vec<_>>());
            raw.push(RawSnapshot {
                label: snap.label,
                clusters: snap.clusters.into_iter().map(|c| c.members).collect(),
            });
        }
        let seq = ClusteringSequence::from_raw(raw)?;
        let dc = DynamicClustering::from_labels(&seq, &labels, self.history)?;
        Ok((seq, dc))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::track;

    fn fixture() -> ClusteringSequence {
        ClusteringSequence::from_clusters(&[
            vec![vec!["a", "b"], vec!["c"]],
            vec![vec!["a", "b", "d"], vec!["c"]],
        ])
        .unwrap()
    }

    #[test]
    fn round_trip() {
        let seq = fixture();
        let dc = track(&seq, 1);
        let doc = ResultDocument::new(&seq, &dc);
        assert_eq!(doc.schema, 1);
        assert_eq!(doc.dcs.len(), 2);
        assert_eq!(doc.dcs[0].clusters, vec![[0, 0], [1, 0]]);
        let parsed = ResultDocument::from_json(&doc.to_json()).unwrap();
        assert_eq!(parsed, doc);
        let (seq2, dc2) = parsed.into_parts().unwrap();
        assert_eq!(seq2, seq);
        assert_eq!(dc2.labels(), dc.labels());
    }

    #[test]
    fn missing_fields_are_schema_errors() {
        let err = ResultDocument::from_json(r#"{"schema":1,"snapshots":[]}"#).unwrap_err();
        assert!(matches!(err, Error::Schema(_)));
        let seq = fixture();
        let mut doc = ResultDocument::new(&seq, &track(&seq, 1));
        doc.schema = 2;
        let err = ResultDocument::from_json(&doc.to_json()).unwrap_err();
        assert!(err.to_string().contains("schema"));
    }
}
