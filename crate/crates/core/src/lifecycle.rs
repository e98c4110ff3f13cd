//! Life-cycle events, auto-correlation, total consistency and summary
//! statistics of a dynamic clustering.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::dynamic::{DcId, DynamicClustering};
use crate::snapshot::{ClusteringSequence, MemberId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EventKind {
    Birth,
    Death,
    Growth,
    Shrinkage,
    Split,
    Merge,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LifecycleEvent {
    pub kind: EventKind,
    /// Snapshot at which the event is observed.
    pub time: usize,
    pub dc: DcId,
    /// Other DCs involved in a split or merge.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub related: Vec<DcId>,
    /// Member-count change for growth and shrinkage.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<i64>,
}

impl LifecycleEvent {
    fn new(kind: EventKind, time: usize, dc: DcId) -> Self {
        Self {
            kind,
            time,
            dc,
            related: Vec::new(),
            delta: None,
        }
    }
}

/// All life-cycle events of `dc`, ordered by time, then DC, then kind.
///
/// * birth at `t`: first presence, and no member of `c_t` was present in
///   any DC at `t - 1` (always true at `t = 0`);
/// * death at `t + 1`: last presence at `t < T - 1`, and no member of `c_t`
///   is present at `t + 1`;
/// * growth / shrinkage: size change between adjacent presences;
/// * split at `t + 1`: the members of `c_t` still present at `t + 1` are
///   spread over several clusters belonging to at least two DCs in total
///   (counting the splitting DC itself);
/// * merge at `t + 1`: the members of `c_{t+1}` present at `t` came from
///   more than one DC.
pub fn classify_events(dc: &DynamicClustering, seq: &ClusteringSequence) -> Vec<LifecycleEvent> {
    let snapshots = seq.snapshots();
    let owner: Vec<HashMap<MemberId, (usize, DcId)>> = snapshots
        .iter()
        .map(|snap| {
            let mut map = HashMap::new();
            for (alpha, cluster) in snap.clusters().iter().enumerate() {
                let label = dc.labels()[snap.index()][alpha];
                for &m in cluster {
                    map.insert(m, (alpha, label));
                }
            }
            map
        })
        .collect();

    let mut events = Vec::new();
    for track in dc.dcs() {
        let first = track.first();
        let born = first == 0
            || track.members[0]
                .iter()
                .all(|m| !owner[first - 1].contains_key(m));
        if born {
            events.push(LifecycleEvent::new(EventKind::Birth, first, track.id));
        }

        let last = track.last();
        if last + 1 < seq.len() {
            let members = track.members.last().expect("present at least once");
            if members.iter().all(|m| !owner[last + 1].contains_key(m)) {
                events.push(LifecycleEvent::new(EventKind::Death, last + 1, track.id));
            }
        }

        for (j, &t) in track.presence.iter().enumerate() {
            if t + 1 >= seq.len() {
                continue;
            }
            // split: where did the members of c_t go?
            let mut clusters = BTreeSet::new();
            let mut dcs = BTreeSet::new();
            for m in &track.members[j] {
                if let Some(&(alpha, label)) = owner[t + 1].get(m) {
                    clusters.insert(alpha);
                    dcs.insert(label);
                }
            }
            dcs.remove(&track.id);
            if clusters.len() > 1 && (!dcs.is_empty()) {
                let mut e = LifecycleEvent::new(EventKind::Split, t + 1, track.id);
                e.related = dcs.into_iter().collect();
                events.push(e);
            }

            let Some(next) = track.local_index(t + 1) else {
                continue;
            };
            let (before, after) = (
                track.members[j].len() as i64,
                track.members[next].len() as i64,
            );
            if after != before {
                let kind = if after > before {
                    EventKind::Growth
                } else {
                    EventKind::Shrinkage
                };
                let mut e = LifecycleEvent::new(kind, t + 1, track.id);
                e.delta = Some(after - before);
                events.push(e);
            }
        }

        // merge: where did the members of c_{t+1} come from?
        for (j, &t) in track.presence.iter().enumerate() {
            if t == 0 {
                continue;
            }
            let sources: BTreeSet<DcId> = track.members[j]
                .iter()
                .filter_map(|m| owner[t - 1].get(m).map(|&(_, label)| label))
                .collect();
            if sources.len() > 1 {
                let mut e = LifecycleEvent::new(EventKind::Merge, t, track.id);
                e.related = sources.into_iter().filter(|&d| d != track.id).collect();
                events.push(e);
            }
        }
    }
    events.sort_by_key(|e| (e.time, e.dc, e.kind));
    events
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConsistencyMode {
    AllMembers,
    ResidentsOnly,
}

/// Average auto-correlation over all pairs of adjacent snapshots in which a
/// DC is present. `None` when no DC is present in two adjacent snapshots.
///
/// In [`ConsistencyMode::ResidentsOnly`] the union in each pair's Jaccard
/// index only counts members present in both snapshots of the pair (anywhere
/// in the system). A pair whose union has no such member contributes 0.
pub fn total_consistency(
    dc: &DynamicClustering,
    seq: &ClusteringSequence,
    mode: ConsistencyMode,
) -> Option<f64> {
    let mut residents: HashMap<usize, BTreeSet<MemberId>> = HashMap::new();
    let mut sum = 0.0;
    let mut pairs = 0usize;
    for track in dc.dcs() {
        for j in track.consecutive_pairs() {
            pairs += 1;
            let (a, b) = (&track.members[j], &track.members[j + 1]);
            let shared = a.intersection(b).count();
            let union = match mode {
                ConsistencyMode::AllMembers => a.len() + b.len() - shared,
                ConsistencyMode::ResidentsOnly => {
                    let t = track.presence[j];
                    let r = residents
                        .entry(t)
                        .or_insert_with(|| seq.residents(t, t + 1).expect("snapshot in range"));
                    a.union(b).filter(|m| r.contains(m)).count()
                }
            };
            if union > 0 {
                sum += shared as f64 / union as f64;
            }
        }
    }
    (pairs > 0).then(|| sum / pairs as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryStats {
    pub dc_count: usize,
    /// Lifespan (snapshots present) -> number of DCs.
    pub lifespan_histogram: BTreeMap<usize, usize>,
    pub mean_lifespan: Option<f64>,
    /// Lifespan averaged with each DC weighted by its member-snapshot count:
    /// the lifespan of the DC an average member resides in.
    pub weighted_mean_lifespan: Option<f64>,
}

pub fn summary_stats(dc: &DynamicClustering) -> SummaryStats {
    let mut lifespan_histogram = BTreeMap::new();
    let (mut total, mut weighted, mut weights) = (0usize, 0usize, 0usize);
    for track in dc.dcs() {
        *lifespan_histogram.entry(track.lifespan()).or_insert(0) += 1;
        total += track.lifespan();
        weighted += track.lifespan() * track.weight();
        weights += track.weight();
    }
    let count = dc.dc_count();
    SummaryStats {
        dc_count: count,
        lifespan_histogram,
        mean_lifespan: (count > 0).then(|| total as f64 / count as f64),
        weighted_mean_lifespan: (weights > 0).then(|| weighted as f64 / weights as f64),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single_dc(snaps: &[Vec<Vec<&str>>]) -> (ClusteringSequence, DynamicClustering) {
        let seq = ClusteringSequence::from_clusters(snaps).unwrap();
        let labels: Vec<Vec<u64>> = snaps.iter().map(|s| vec![0; s.len()]).collect();
        let dc = DynamicClustering::from_labels(&seq, &labels, 1).unwrap();
        (seq, dc)
    }

    fn kinds(events: &[LifecycleEvent]) -> Vec<(EventKind, usize)> {
        events.iter().map(|e| (e.kind, e.time)).collect()
    }

    #[test]
    fn autocorrelation_examples() {
        let (_, dc) = single_dc(&[
            vec![vec!["1", "2"]],
            vec![vec!["1", "2"]],
            vec![vec!["1", "3"]],
            vec![vec!["4", "5"]],
        ]);
        let track = &dc.dcs()[0];
        assert_eq!(track.autocorrelation(0), Some(1.0));
        assert_eq!(track.autocorrelation(1), Some(1.0 / 3.0));
        assert_eq!(track.autocorrelation(2), Some(0.0));
        assert_eq!(track.autocorrelation(3), None);
    }

    #[test]
    fn consistency_single_dc() {
        let (seq, dc) = single_dc(&[
            vec![vec!["1", "2"]],
            vec![vec!["1", "2"]],
            vec![vec!["1", "3"]],
        ]);
        let c = total_consistency(&dc, &seq, ConsistencyMode::AllMembers).unwrap();
        assert!((c - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn consistency_undefined_without_pairs() {
        let seq = ClusteringSequence::from_clusters(&[vec![vec!["1"]], vec![vec!["2"]]]).unwrap();
        let dc = DynamicClustering::from_labels(&seq, &[vec![0u64], vec![1]], 1).unwrap();
        assert_eq!(
            total_consistency(&dc, &seq, ConsistencyMode::AllMembers),
            None
        );
        assert_eq!(
            total_consistency(&dc, &seq, ConsistencyMode::ResidentsOnly),
            None
        );
    }

    #[test]
    fn resident_consistency_ignores_turnover() {
        // member 3 leaves the system, 4 arrives: only {1, 2} are residents
        let (seq, dc) = single_dc(&[vec![vec!["1", "2", "3"]], vec![vec!["1", "2", "4"]]]);
        let all = total_consistency(&dc, &seq, ConsistencyMode::AllMembers).unwrap();
        let res = total_consistency(&dc, &seq, ConsistencyMode::ResidentsOnly).unwrap();
        assert!((all - 0.5).abs() < 1e-12);
        assert_eq!(res, 1.0);
    }

    #[test]
    fn growth_shrinkage_and_death() {
        let (seq, dc) = single_dc(&[
            vec![vec!["a", "b"]],
            vec![vec!["a", "b", "c"]],
            vec![vec!["a"]],
        ]);
        let ev = classify_events(&dc, &seq);
        assert_eq!(
            kinds(&ev),
            vec![
                (EventKind::Birth, 0),
                (EventKind::Growth, 1),
                (EventKind::Shrinkage, 2)
            ]
        );
        assert_eq!(ev[1].delta, Some(1));
        assert_eq!(ev[2].delta, Some(-2));

        let seq =
            ClusteringSequence::from_clusters(&[vec![vec!["a", "b"]], vec![vec!["c"]]]).unwrap();
        let dc = DynamicClustering::from_labels(&seq, &[vec![0u64], vec![1]], 1).unwrap();
        let ev = classify_events(&dc, &seq);
        assert_eq!(
            kinds(&ev),
            vec![
                (EventKind::Birth, 0),
                (EventKind::Death, 1),
                (EventKind::Birth, 1)
            ]
        );
    }

    #[test]
    fn no_birth_when_members_came_from_another_dc() {
        let seq = ClusteringSequence::from_clusters(&[
            vec![vec!["a", "b", "c"]],
            vec![vec!["a", "b"], vec!["c"]],
        ])
        .unwrap();
        let dc = DynamicClustering::from_labels(&seq, &[vec![0u64], vec![0, 1]], 1).unwrap();
        let ev = classify_events(&dc, &seq);
        assert!(!ev.iter().any(|e| e.kind == EventKind::Birth && e.time == 1));
        let split = ev.iter().find(|e| e.kind == EventKind::Split).unwrap();
        assert_eq!(
            (split.time, split.dc, split.related.clone()),
            (1, DcId(0), vec![DcId(1)])
        );
    }

    #[test]
    fn merge_event() {
        let seq = ClusteringSequence::from_clusters(&[
            vec![vec!["a", "b"], vec!["c"]],
            vec![vec!["a", "b", "c"]],
        ])
        .unwrap();
        let dc = DynamicClustering::from_labels(&seq, &[vec![0u64, 1], vec![0]], 1).unwrap();
        let ev = classify_events(&dc, &seq);
        let merge = ev.iter().find(|e| e.kind == EventKind::Merge).unwrap();
        assert_eq!(
            (merge.time, merge.dc, merge.related.clone()),
            (1, DcId(0), vec![DcId(1)])
        );
        // the merged-away DC has no death: its member is still present
        assert!(!ev.iter().any(|e| e.kind == EventKind::Death));
    }

    #[test]
    fn splinter_inside_one_dc_is_not_a_split() {
        let seq = ClusteringSequence::from_clusters(&[
            vec![vec!["a", "b", "c"]],
            vec![vec!["a", "b"], vec!["c"]],
        ])
        .unwrap();
        let dc = DynamicClustering::from_labels(&seq, &[vec![0u64], vec![0, 0]], 1).unwrap();
        let ev = classify_events(&dc, &seq);
        assert!(!ev.iter().any(|e| e.kind == EventKind::Split));
    }

    #[test]
    fn summary_examples() {
        let (_, dc) = single_dc(&vec![vec![vec!["a"]]; 5]);
        let s = summary_stats(&dc);
        assert_eq!(s.dc_count, 1);
        assert_eq!(s.mean_lifespan, Some(5.0));
        assert_eq!(s.weighted_mean_lifespan, Some(5.0));
        assert_eq!(s.lifespan_histogram, BTreeMap::from([(5, 1)]));

        // lifespans 1 and 3, sizes 10 and 1 per snapshot
        let big: Vec<String> = (0..10).map(|i| format!("b{i}")).collect();
        let big: Vec<&str> = big.iter().map(String::as_str).collect();
        let seq = ClusteringSequence::from_clusters(&[
            vec![big.clone(), vec!["s"]],
            vec![vec!["s"]],
            vec![vec!["s"]],
        ])
        .unwrap();
        let dc =
            DynamicClustering::from_labels(&seq, &[vec![0u64, 1], vec![1], vec![1]], 1).unwrap();
        let s = summary_stats(&dc);
        assert_eq!(s.mean_lifespan, Some(2.0));
        assert!((s.weighted_mean_lifespan.unwrap() - 19.0 / 13.0).abs() < 1e-12);
    }

    #[test]
    fn summary_of_nothing() {
        let seq = ClusteringSequence::from_clusters::<&str>(&[vec![]]).unwrap();
        let dc = DynamicClustering::from_labels::<u64>(&seq, &[vec![]], 1).unwrap();
        let s = summary_stats(&dc);
        assert_eq!(s.dc_count, 0);
        assert!(s.lifespan_histogram.is_empty());
        assert_eq!(s.mean_lifespan, None);
    }
}
