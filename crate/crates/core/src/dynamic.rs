//! The dynamic clustering produced by tracking.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::snapshot::{ClusterRef, ClusteringSequence, MemberId};

/// Identifier of a dynamic cluster.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DcId(pub u64);

impl fmt::Display for DcId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "dc{}", self.0)
    }
}

/// One dynamic cluster: where it is present, with which clusters and members.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DcTrack {
    pub id: DcId,
    /// Snapshot indices where the DC has at least one cluster, ascending.
    pub presence: Vec<usize>,
    /// Cluster positions per presence entry.
    pub clusters: Vec<Vec<usize>>,
    /// Union of the members of those clusters per presence entry.
    pub members: Vec<BTreeSet<MemberId>>,
}

impl DcTrack {
    /// Number of snapshots the DC is present in.
    pub fn lifespan(&self) -> usize {
        self.presence.len()
    }

    pub fn first(&self) -> usize {
        self.presence[0]
    }

    pub fn last(&self) -> usize {
        self.presence[self.presence.len() - 1]
    }

    /// Local index `j` of snapshot `t`, if present there.
    pub fn local_index(&self, t: usize) -> Option<usize> {
        self.presence.binary_search(&t).ok()
    }

    pub fn members_at(&self, t: usize) -> Option<&BTreeSet<MemberId>> {
        self.local_index(t).map(|j| &self.members[j])
    }

    /// Total member-snapshot count.
    pub fn weight(&self) -> usize {
        self.members.iter().map(BTreeSet::len).sum()
    }

    /// Jaccard index between the member sets at local index `j` and the next
    /// snapshot. `None` when the DC is not present at `presence[j] + 1`.
    pub fn autocorrelation(&self, j: usize) -> Option<f64> {
        let t = *self.presence.get(j)?;
        if self.presence.get(j + 1) != Some(&(t + 1)) {
            return None;
        }
        let (a, b) = (&self.members[j], &self.members[j + 1]);
        let shared = a.intersection(b).count();
        let union = a.len() + b.len() - shared;
        Some(shared as f64 / union as f64)
    }

    /// Local indices `j` such that the DC is present at `presence[j] + 1`.
    pub fn consecutive_pairs(&self) -> impl Iterator<Item = usize> + '_ {
        self.presence
            .windows(2)
            .enumerate()
            .filter(|(_, w)| w[1] == w[0] + 1)
            .map(|(j, _)| j)
    }
}

/// Association of every cluster to a dynamic cluster.
///
/// DC identifiers are canonical: numbered by first appearance in snapshot
/// order, then cluster order, so two clusterings that differ only by
/// renaming compare equal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DynamicClustering {
    history: usize,
    labels: Vec<Vec<DcId>>,
    dcs: Vec<DcTrack>,
}

impl DynamicClustering {
    /// Builds the clustering from arbitrary per-cluster labels.
    pub fn from_labels<L>(
        seq: &ClusteringSequence,
        labels: &[Vec<L>],
        history: usize,
    ) -> Result<Self>
    where
        L: Copy + Eq + std::hash::Hash,
    {
        if labels.len() != seq.len() {
            return Err(Error::Schema(format!(
                "{} label rows for {} snapshots",
                labels.len(),
                seq.len()
            )));
        }
        for (t, row) in labels.iter().enumerate() {
            let expected = seq.snapshots()[t].len();
            if row.len() != expected {
                return Err(Error::Schema(format!(
                    "snapshot {t} has {expected} clusters but {} labels",
                    row.len()
                )));
            }
        }
        let labels = canonicalize(labels);
        let count = labels.iter().flatten().map(|d| d.0 + 1).max().unwrap_or(0) as usize;
        let mut dcs: Vec<DcTrack> = (0..count)
            .map(|i| DcTrack {
                id: DcId(i as u64),
                presence: Vec::new(),
                clusters: Vec::new(),
                members: Vec::new(),
            })
            .collect();
        for (t, row) in labels.iter().enumerate() {
            let snap = &seq.snapshots()[t];
            for (alpha, dc) in row.iter().enumerate() {
                let track = &mut dcs[dc.0 as usize];
                if track.presence.last() != Some(&t) {
                    track.presence.push(t);
                    track.clusters.push(Vec::new());
                    track.members.push(BTreeSet::new());
                }
                let j = track.presence.len() - 1;
                track.clusters[j].push(alpha);
                track.members[j].extend(snap.clusters()[alpha].iter().copied());
            }
        }
        Ok(Self {
            history,
            labels,
            dcs,
        })
    }

    /// History parameter the clustering was produced with.
    pub fn history(&self) -> usize {
        self.history
    }

    pub fn labels(&self) -> &[Vec<DcId>] {
        &self.labels
    }

    pub fn label(&self, g: ClusterRef) -> Option<DcId> {
        self.labels.get(g.time)?.get(g.cluster).copied()
    }

    pub fn dcs(&self) -> &[DcTrack] {
        &self.dcs
    }

    pub fn dc(&self, id: DcId) -> Option<&DcTrack> {
        self.dcs.get(id.0 as usize)
    }

    pub fn dc_count(&self) -> usize {
        self.dcs.len()
    }

    /// Labels restricted to the first `len` snapshots, canonicalized again.
    pub fn prefix_labels(&self, len: usize) -> Vec<Vec<DcId>> {
        canonicalize(&self.labels[..len.min(self.labels.len())])
    }
}

/// Renumbers labels by first appearance (snapshot order, then cluster order).
pub fn canonicalize<L: Copy + Eq + std::hash::Hash>(labels: &[Vec<L>]) -> Vec<Vec<DcId>> {
    let mut map: HashMap<L, DcId> = HashMap::new();
    labels
        .iter()
        .map(|row| {
            row.iter()
                .map(|l| {
                    let next = DcId(map.len() as u64);
                    *map.entry(*l).or_insert(next)
                })
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonicalize_by_first_appearance() {
        let labels = vec![vec![7u64, 3], vec![3, 9, 7]];
        let canon = canonicalize(&labels);
        assert_eq!(
            canon,
            vec![vec![DcId(0), DcId(1)], vec![DcId(1), DcId(2), DcId(0)]]
        );
    }

    #[test]
    fn member_sets_and_presence() {
        let seq = ClusteringSequence::from_clusters(&[
            vec![vec!["a", "b"], vec!["c"]],
            vec![vec!["a"], vec!["b", "c"]],
            vec![vec!["d"]],
        ])
        .unwrap();
        let dc =
            DynamicClustering::from_labels(&seq, &[vec![5, 6], vec![5, 5], vec![6]], 2).unwrap();
        assert_eq!(dc.dc_count(), 2);
        let first = dc.dc(DcId(0)).unwrap();
        assert_eq!(first.presence, vec![0, 1]);
        assert_eq!(first.clusters, vec![vec![0], vec![0, 1]]);
        assert_eq!(first.members[1].len(), 3);
        let second = dc.dc(DcId(1)).unwrap();
        assert_eq!(second.presence, vec![0, 2]);
        // gap: no consecutive pair
        assert_eq!(second.consecutive_pairs().count(), 0);
        assert_eq!(second.autocorrelation(0), None);
        assert_eq!(first.autocorrelation(0), Some(2.0 / 3.0));
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        let seq = ClusteringSequence::from_clusters(&[vec![vec!["a"]]]).unwrap();
        assert!(DynamicClustering::from_labels(&seq, &[vec![0u64, 1]], 1).is_err());
        assert!(DynamicClustering::from_labels::<u64>(&seq, &[], 1).is_err());
    }
}
